//! G-sets and finite-rank RG-modules carrying structural certificates.
//!
//! A module is one invertible matrix per group generator. Modules with a
//! distinguished basis permuted up to sign store their action as signed
//! permutations; everything else stores dense matrices. The certificate says
//! what is known about the module and is checked whenever a module is built.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{compose, Group, Perm, Subgroup, Transversal};
use crate::ring::{solve_field, solve_integer, Matrix, RingSpec};

/// A finite left G-set: one permutation of the points per generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSet {
    size: usize,
    action: Vec<Perm>,
    pub labels: Option<Vec<String>>,
}

impl GSet {
    pub fn new(size: usize, action: Vec<Perm>) -> GSet {
        GSet { size, action, labels: None }
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn action(&self) -> &[Perm] {
        &self.action
    }

    /// The regular G-set, points indexed by element.
    pub fn regular(g: &Group) -> GSet {
        let action = (0..g.num_generators())
            .map(|i| {
                let s = g.generator_index(i);
                (0..g.order()).map(|x| g.mul(s, x) as u32).collect()
            })
            .collect();
        GSet::new(g.order(), action)
    }

    /// `n` fixed points.
    pub fn trivial(g: &Group, n: usize) -> GSet {
        GSet::new(n, vec![(0..n as u32).collect(); g.num_generators()])
    }

    /// Permutation of the points by an arbitrary element, composed along its word.
    pub fn element_perm(&self, g: &Group, e: usize) -> Perm {
        let mut p: Perm = (0..self.size as u32).collect();
        for &w in g.word(e).iter().rev() {
            p = compose(&self.action[w], &p);
        }
        p
    }

    /// Checks that the generator permutations define an action of `g`.
    pub fn validate(&self, g: &Group) -> Result<()> {
        if self.action.len() != g.num_generators() {
            return Err(Error::RelationFailure(format!(
                "{} generator permutations for {} generators",
                self.action.len(),
                g.num_generators()
            )));
        }
        for p in &self.action {
            if p.len() != self.size || !crate::group::is_permutation(p) {
                return Err(Error::MalformedPermutation("G-set action is not a permutation".into()));
            }
        }
        let perms: Vec<Perm> = (0..g.order()).map(|e| self.element_perm(g, e)).collect();
        for i in 0..g.num_generators() {
            let s = g.generator_index(i);
            for x in 0..g.order() {
                if compose(&self.action[i], &perms[x]) != perms[g.mul(s, x)] {
                    return Err(Error::RelationFailure(format!(
                        "generator {i} times element {x} disagrees with the product"
                    )));
                }
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.size {
                return Err(Error::ShapeMismatch("label count differs from G-set size".into()));
            }
        }
        Ok(())
    }

    /// Orbits in order of their smallest point, each sorted.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(self.size, &self.action)
    }

    /// Stabilizer of a point as a subgroup of `g`.
    pub fn stabilizer(&self, g: &Group, point: usize) -> Subgroup {
        let members = (0..g.order()).filter(|&e| self.element_perm(g, e)[point] as usize == point).collect();
        g.subgroup(members).expect("stabilizers are subgroups")
    }

    pub fn is_free(&self, g: &Group) -> bool {
        self.orbits().iter().all(|o| o.len() == g.order())
    }

    /// Cartesian product, pair `(a, b)` at index `a·|B| + b`.
    pub fn product(&self, other: &GSet) -> GSet {
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(p, q)| {
                let mut out = Vec::with_capacity(self.size * other.size);
                for a in 0..self.size {
                    for b in 0..other.size {
                        out.push(p[a] * other.size as u32 + q[b]);
                    }
                }
                out
            })
            .collect();
        GSet::new(self.size * other.size, action)
    }

    pub fn disjoint_union(&self, other: &GSet) -> GSet {
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(p, q)| {
                let mut out = p.clone();
                out.extend(q.iter().map(|&x| x + self.size as u32));
                out
            })
            .collect();
        GSet::new(self.size + other.size, action)
    }
}

fn orbits_of(size: usize, gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; size];
    let mut out = Vec::new();
    for start in 0..size {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for p in gens {
                let y = p[x] as usize;
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                    queue.push_back(y);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// Signed permutation: `e_x ↦ ±e_{perm[x]}`, negative where `neg[x]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    pub perm: Perm,
    pub neg: Vec<bool>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> SignedPerm {
        SignedPerm { perm: (0..n as u32).collect(), neg: vec![false; n] }
    }
    pub fn unsigned(perm: Perm) -> SignedPerm {
        let n = perm.len();
        SignedPerm { perm, neg: vec![false; n] }
    }
    pub fn len(&self) -> usize {
        self.perm.len()
    }
    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
    pub fn has_signs(&self) -> bool {
        self.neg.iter().any(|&s| s)
    }
    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        let perm = other.perm.iter().map(|&x| self.perm[x as usize]).collect();
        let neg = (0..other.len()).map(|x| other.neg[x] ^ self.neg[other.perm[x] as usize]).collect();
        SignedPerm { perm, neg }
    }
    pub fn inverse(&self) -> SignedPerm {
        let n = self.len();
        let mut perm = vec![0; n];
        let mut neg = vec![false; n];
        for x in 0..n {
            perm[self.perm[x] as usize] = x as u32;
            neg[self.perm[x] as usize] = self.neg[x];
        }
        SignedPerm { perm, neg }
    }
    pub fn kron(&self, other: &SignedPerm) -> SignedPerm {
        let nb = other.len() as u32;
        let mut perm = Vec::with_capacity(self.len() * other.len());
        let mut neg = Vec::with_capacity(self.len() * other.len());
        for a in 0..self.len() {
            for b in 0..other.len() {
                perm.push(self.perm[a] * nb + other.perm[b]);
                neg.push(self.neg[a] ^ other.neg[b]);
            }
        }
        SignedPerm { perm, neg }
    }
    pub fn direct_sum(&self, other: &SignedPerm) -> SignedPerm {
        let mut perm = self.perm.clone();
        perm.extend(other.perm.iter().map(|&x| x + self.len() as u32));
        let mut neg = self.neg.clone();
        neg.extend_from_slice(&other.neg);
        SignedPerm { perm, neg }
    }
    pub fn to_matrix(&self, ring: RingSpec) -> Matrix {
        let n = self.len();
        let mut m = Matrix::zeros(ring, n, n);
        for x in 0..n {
            m.set(self.perm[x] as usize, x, if self.neg[x] { -1 } else { 1 });
        }
        m
    }
    /// Reads a signed permutation matrix; `None` if the matrix is not one.
    pub fn from_matrix(m: &Matrix) -> Option<SignedPerm> {
        if m.rows() != m.cols() {
            return None;
        }
        let ring = m.ring();
        let minus = ring.neg(1);
        let n = m.cols();
        let mut perm = vec![u32::MAX; n];
        let mut neg = vec![false; n];
        let mut row_used = vec![false; n];
        for (c, col) in m.sparse_columns().into_iter().enumerate() {
            if col.len() != 1 {
                return None;
            }
            let (r, v) = col[0];
            if row_used[r] {
                return None;
            }
            row_used[r] = true;
            perm[c] = r as u32;
            if v == 1 {
                neg[c] = false;
            } else if v == minus {
                neg[c] = true;
            } else {
                return None;
            }
        }
        Some(SignedPerm { perm, neg })
    }
    /// `self · v`.
    pub fn apply_vec(&self, ring: RingSpec, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0; v.len()];
        for x in 0..v.len() {
            out[self.perm[x] as usize] = if self.neg[x] { ring.neg(v[x]) } else { v[x] };
        }
        out
    }
    /// `self · m`: row `x` of `m` moves to row `perm[x]`.
    pub fn left_mul(&self, ring: RingSpec, m: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(ring, m.rows(), m.cols());
        let mut rows: Vec<Vec<i64>> = vec![Vec::new(); m.rows()];
        for x in 0..m.rows() {
            let row = m.row(x);
            rows[self.perm[x] as usize] =
                if self.neg[x] { row.iter().map(|&a| ring.neg(a)).collect() } else { row.to_vec() };
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    out.set(r, c, v);
                }
            }
        }
        out
    }
    /// `m · self`: column `x` of the result is `±` column `perm[x]` of `m`.
    pub fn right_mul(&self, ring: RingSpec, m: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(ring, m.rows(), m.cols());
        for r in 0..m.rows() {
            let row = m.row(r);
            for x in 0..m.cols() {
                let v = row[self.perm[x] as usize];
                if v != 0 {
                    out.set(r, x, if self.neg[x] { ring.neg(v) } else { v });
                }
            }
        }
        out
    }
    fn reduce_signs(mut self, ring: RingSpec) -> SignedPerm {
        if ring.characteristic() == 2 {
            self.neg.iter_mut().for_each(|s| *s = false);
        }
        self
    }
}

/// A basis permuted up to sign: `G·A ⊆ A ∪ (−A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGSet {
    size: usize,
    action: Vec<SignedPerm>,
}

impl SignedGSet {
    pub fn new(size: usize, action: Vec<SignedPerm>) -> SignedGSet {
        SignedGSet { size, action }
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn action(&self) -> &[SignedPerm] {
        &self.action
    }
    pub fn has_signs(&self) -> bool {
        self.action.iter().any(|a| a.has_signs())
    }
    pub fn underlying(&self) -> GSet {
        GSet::new(self.size, self.action.iter().map(|a| a.perm.clone()).collect())
    }
    pub fn element_action(&self, g: &Group, e: usize) -> SignedPerm {
        let mut p = SignedPerm::identity(self.size);
        for &w in g.word(e).iter().rev() {
            p = self.action[w].compose(&p);
        }
        p
    }
    /// Checks the action on `{±a}` respects the group relations.
    pub fn validate(&self, g: &Group) -> Result<()> {
        if self.action.len() != g.num_generators() {
            return Err(Error::RelationFailure("wrong number of generator actions".into()));
        }
        for a in &self.action {
            if a.len() != self.size || a.neg.len() != self.size || !crate::group::is_permutation(&a.perm) {
                return Err(Error::MalformedPermutation("signed action is not a signed permutation".into()));
            }
        }
        let all: Vec<SignedPerm> = (0..g.order()).map(|e| self.element_action(g, e)).collect();
        for i in 0..g.num_generators() {
            let s = g.generator_index(i);
            for x in 0..g.order() {
                if self.action[i].compose(&all[x]) != all[g.mul(s, x)] {
                    return Err(Error::RelationFailure(format!(
                        "signed action: generator {i} times element {x} disagrees with the product"
                    )));
                }
            }
        }
        Ok(())
    }
    pub fn product(&self, other: &SignedGSet) -> SignedGSet {
        SignedGSet::new(
            self.size * other.size,
            self.action.iter().zip(&other.action).map(|(a, b)| a.kron(b)).collect(),
        )
    }
}

/// Matrices of the generators, stored compactly when they are signed permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Monomial(Vec<SignedPerm>),
    Dense(Vec<Matrix>),
}

/// Embedding of a module as a direct summand of a certified ambient module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummandData {
    pub ambient: RGModule,
    /// `ambient.rank × rank`
    pub embedding: Matrix,
    /// `rank × ambient.rank`
    pub projection: Matrix,
}

impl SummandData {
    /// The idempotent `ι∘π` on the ambient module.
    pub fn idempotent(&self) -> Matrix {
        self.embedding.mul(&self.projection)
    }
}

/// What is known about a module's structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// The action permutes the standard basis as the G-set.
    Permutation(GSet),
    /// Permutation on a G-set all of whose orbits are regular.
    Free(GSet),
    /// The action permutes the standard basis up to sign.
    Monomial(SignedGSet),
    /// A direct summand of a certified module.
    Summand(Box<SummandData>),
    General,
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Permutation(_) => "permutation",
            Certificate::Free(_) => "free",
            Certificate::Monomial(_) => "monomial",
            Certificate::Summand(_) => "summand",
            Certificate::General => "general",
        }
    }
}

/// A finite-rank representation of a finite group over `GF(p)` or `ℤ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RGModule {
    group: Arc<Group>,
    ring: RingSpec,
    rank: usize,
    action: Action,
    certificate: Certificate,
}

impl RGModule {
    /// Builds a module, checking the group relations and the certificate.
    pub fn new(
        group: Arc<Group>,
        ring: RingSpec,
        rank: usize,
        action: Action,
        certificate: Certificate,
    ) -> Result<RGModule> {
        let m = RGModule { group, ring, rank, action, certificate };
        m.check()?;
        Ok(m)
    }

    /// Builds without checks; for constructions that are correct by design.
    pub(crate) fn new_unchecked(
        group: Arc<Group>,
        ring: RingSpec,
        rank: usize,
        action: Action,
        certificate: Certificate,
    ) -> RGModule {
        let m = RGModule { group, ring, rank, action, certificate };
        debug_assert!(m.check().is_ok(), "{:?}", m.check());
        m
    }

    /// Module given by dense generator matrices, with no structural claims.
    pub fn from_matrices(group: Arc<Group>, ring: RingSpec, matrices: Vec<Matrix>) -> Result<RGModule> {
        let rank = matrices.first().map_or(0, |m| m.rows());
        RGModule::new(group, ring, rank, Action::Dense(matrices), Certificate::General)
    }

    /// Monomial module on a signed G-set; certified as permutation (or free)
    /// when no signs occur.
    pub fn from_signed(group: Arc<Group>, ring: RingSpec, set: SignedGSet) -> Result<RGModule> {
        let set = SignedGSet::new(set.size, set.action.into_iter().map(|a| a.reduce_signs(ring)).collect());
        if !set.has_signs() {
            return RGModule::linearize(group, &set.underlying(), ring);
        }
        let rank = set.size;
        RGModule::new(group, ring, rank, Action::Monomial(set.action.clone()), Certificate::Monomial(set))
    }

    /// `R(A)`, certified free when every orbit is regular.
    pub fn linearize(group: Arc<Group>, set: &GSet, ring: RingSpec) -> Result<RGModule> {
        set.validate(&group)?;
        let action = Action::Monomial(set.action.iter().map(|p| SignedPerm::unsigned(p.clone())).collect());
        let cert =
            if set.is_free(&group) { Certificate::Free(set.clone()) } else { Certificate::Permutation(set.clone()) };
        Ok(RGModule { group, ring, rank: set.size, action, certificate: cert })
    }

    pub fn free_module(group: Arc<Group>, ring: RingSpec, r: usize) -> RGModule {
        let reg = GSet::regular(&group);
        let mut set = GSet::new(0, vec![Vec::new(); group.num_generators()]);
        for _ in 0..r {
            set = set.disjoint_union(&reg);
        }
        let action = Action::Monomial(set.action.iter().map(|p| SignedPerm::unsigned(p.clone())).collect());
        RGModule { group, ring, rank: set.size, action, certificate: Certificate::Free(set) }
    }

    /// The trivial module of rank `n`.
    pub fn trivial(group: Arc<Group>, ring: RingSpec, n: usize) -> RGModule {
        let set = GSet::trivial(&group, n);
        let action = Action::Monomial(set.action.iter().map(|p| SignedPerm::unsigned(p.clone())).collect());
        let cert = if n == 0 || group.order() == 1 { Certificate::Free(set) } else { Certificate::Permutation(set) };
        RGModule { group, ring, rank: n, action, certificate: cert }
    }

    pub fn zero(group: Arc<Group>, ring: RingSpec) -> RGModule {
        RGModule::trivial(group, ring, 0)
    }

    /// The one-dimensional module on which elements outside the index-2
    /// subgroup `h` act by `−1`.
    pub fn sign_module(group: Arc<Group>, ring: RingSpec, h: &Subgroup) -> Result<RGModule> {
        if h.order() * 2 != group.order() {
            return Err(Error::NotASubgroup("sign module needs an index-2 subgroup".into()));
        }
        let action = (0..group.num_generators())
            .map(|i| SignedPerm { perm: vec![0], neg: vec![!h.contains(group.generator_index(i))] })
            .collect();
        RGModule::from_signed(group, ring, SignedGSet::new(1, action))
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }
    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn action(&self) -> &Action {
        &self.action
    }
    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }
    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// Replaces the certificate after checking it.
    pub fn with_certificate(&self, certificate: Certificate) -> Result<RGModule> {
        RGModule::new(self.group.clone(), self.ring, self.rank, self.action.clone(), certificate)
    }

    /// Signed permutations of the generators when the action is monomial.
    pub fn signed_generators(&self) -> Option<&[SignedPerm]> {
        match &self.action {
            Action::Monomial(v) => Some(v),
            Action::Dense(_) => None,
        }
    }

    pub fn generator_matrix(&self, i: usize) -> Matrix {
        match &self.action {
            Action::Monomial(v) => v[i].to_matrix(self.ring),
            Action::Dense(v) => v[i].clone(),
        }
    }

    pub fn generator_matrices(&self) -> Vec<Matrix> {
        (0..self.group.num_generators()).map(|i| self.generator_matrix(i)).collect()
    }

    /// Signed permutation of an arbitrary element, for monomial actions.
    pub fn element_signed(&self, e: usize) -> Option<SignedPerm> {
        let gens = self.signed_generators()?;
        let mut p = SignedPerm::identity(self.rank);
        for &w in self.group.word(e).iter().rev() {
            p = gens[w].compose(&p);
        }
        Some(p)
    }

    /// Matrix of an arbitrary element, composed along its generator word.
    pub fn element_matrix(&self, e: usize) -> Matrix {
        if let Some(p) = self.element_signed(e) {
            return p.to_matrix(self.ring);
        }
        let mut m = Matrix::identity(self.ring, self.rank);
        for &w in self.group.word(e).iter().rev() {
            m = self.generator_matrix(w).mul(&m);
        }
        m
    }

    /// Matrices of all elements in enumeration order.
    pub fn all_element_matrices(&self) -> Vec<Matrix> {
        let g = &self.group;
        let mut out: Vec<Option<Matrix>> = vec![None; g.order()];
        out[0] = Some(Matrix::identity(self.ring, self.rank));
        for e in 1..g.order() {
            let w = g.word(e);
            let rest = g.mul(g.inv(g.generator_index(w[0])), e);
            let m = self.generator_matrix(w[0]).mul(out[rest].as_ref().expect("shorter word computed first"));
            out[e] = Some(m);
        }
        out.into_iter().map(|m| m.unwrap()).collect()
    }

    /// `ρ(generator i) · m`.
    pub fn left_act(&self, i: usize, m: &Matrix) -> Matrix {
        match &self.action {
            Action::Monomial(v) => v[i].left_mul(self.ring, m),
            Action::Dense(v) => v[i].mul(m),
        }
    }

    /// `m · ρ(generator i)`.
    pub fn right_act(&self, i: usize, m: &Matrix) -> Matrix {
        match &self.action {
            Action::Monomial(v) => v[i].right_mul(self.ring, m),
            Action::Dense(v) => m.mul(&v[i]),
        }
    }

    fn check(&self) -> Result<()> {
        self.ring.validate()?;
        let g = &self.group;
        let ngens = g.num_generators();
        match &self.action {
            Action::Monomial(v) => {
                if v.len() != ngens {
                    return Err(Error::RelationFailure("wrong number of generator actions".into()));
                }
                let set = SignedGSet::new(self.rank, v.clone());
                if self.ring.characteristic() == 2 && set.has_signs() {
                    return Err(Error::InvalidCertificate("signs must be reduced in characteristic 2".into()));
                }
                set.validate(g)?;
            }
            Action::Dense(v) => {
                if v.len() != ngens {
                    return Err(Error::RelationFailure("wrong number of generator matrices".into()));
                }
                for m in v {
                    if m.shape() != (self.rank, self.rank) {
                        return Err(Error::ShapeMismatch("action matrix has the wrong shape".into()));
                    }
                    if m.ring() != self.ring {
                        return Err(Error::RingMismatch("action matrix over another ring".into()));
                    }
                }
                let all = self.all_element_matrices();
                for i in 0..ngens {
                    let s = g.generator_index(i);
                    for x in 0..g.order() {
                        if v[i].mul(&all[x]) != all[g.mul(s, x)] {
                            return Err(Error::RelationFailure(format!(
                                "generator {i} times element {x} disagrees with the product"
                            )));
                        }
                    }
                }
            }
        }
        self.check_certificate()
    }

    fn check_certificate(&self) -> Result<()> {
        let g = &self.group;
        let monomial_matches = |set: &SignedGSet| -> Result<()> {
            if set.size() != self.rank {
                return Err(Error::InvalidCertificate("certificate size differs from rank".into()));
            }
            let ok = match &self.action {
                Action::Monomial(v) => v.as_slice() == set.action(),
                Action::Dense(v) => {
                    v.iter().zip(set.action()).all(|(m, a)| *m == a.to_matrix(self.ring))
                }
            };
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidCertificate("action matrices do not match the certificate".into()))
            }
        };
        let unsigned = |set: &GSet| {
            SignedGSet::new(set.size, set.action.iter().map(|p| SignedPerm::unsigned(p.clone())).collect())
        };
        match &self.certificate {
            Certificate::Permutation(set) => {
                set.validate(g)?;
                monomial_matches(&unsigned(set))
            }
            Certificate::Free(set) => {
                set.validate(g)?;
                if !set.is_free(g) {
                    return Err(Error::InvalidCertificate("G-set has a non-regular orbit".into()));
                }
                monomial_matches(&unsigned(set))
            }
            Certificate::Monomial(set) => {
                set.validate(g)?;
                monomial_matches(set)
            }
            Certificate::Summand(s) => {
                let amb = &s.ambient;
                if amb.ring != self.ring || *amb.group != **g {
                    return Err(Error::InvalidCertificate("ambient module over another ring or group".into()));
                }
                if s.embedding.shape() != (amb.rank, self.rank) || s.projection.shape() != (self.rank, amb.rank) {
                    return Err(Error::InvalidCertificate("embedding/projection shapes".into()));
                }
                if !s.projection.mul(&s.embedding).is_identity() {
                    return Err(Error::InvalidCertificate("projection∘embedding is not the identity".into()));
                }
                if !is_equivariant(self, amb, &s.embedding) || !is_equivariant(amb, self, &s.projection) {
                    return Err(Error::InvalidCertificate("embedding or projection not equivariant".into()));
                }
                Ok(())
            }
            Certificate::General => Ok(()),
        }
    }

    /// Certified as a permutation module (including free).
    pub fn is_permutation_certified(&self) -> bool {
        matches!(self.certificate, Certificate::Permutation(_) | Certificate::Free(_))
    }

    pub fn is_free_certified(&self) -> bool {
        matches!(self.certificate, Certificate::Free(_))
    }

    pub fn is_monomial_certified(&self) -> bool {
        matches!(self.certificate, Certificate::Permutation(_) | Certificate::Free(_) | Certificate::Monomial(_))
    }

    /// Certified as a direct summand of a permutation module.
    pub fn is_p_permutation_certified(&self) -> bool {
        match &self.certificate {
            Certificate::Permutation(_) | Certificate::Free(_) => true,
            Certificate::Summand(s) => s.ambient.is_p_permutation_certified(),
            Certificate::Monomial(_) | Certificate::General => false,
        }
    }

    /// Certified projective: free, a permutation module whose stabilizers have
    /// order prime to `p` over `GF(p)`, or a summand of such.
    pub fn is_projective_certified(&self) -> bool {
        let g = &self.group;
        match (&self.certificate, self.ring) {
            (Certificate::Free(_), _) => true,
            (Certificate::Permutation(set), RingSpec::PrimeField { p }) => set
                .orbits()
                .iter()
                .all(|o| (g.order() / o.len()) % p as usize != 0),
            (Certificate::Summand(s), RingSpec::PrimeField { .. }) => s.ambient.is_projective_certified(),
            _ => false,
        }
    }

    /// The G-set underlying a permutation or free certificate.
    pub fn permutation_gset(&self) -> Option<&GSet> {
        match &self.certificate {
            Certificate::Permutation(s) | Certificate::Free(s) => Some(s),
            _ => None,
        }
    }

    /// The signed G-set of a monomial module, with or without signs.
    pub fn signed_gset(&self) -> Option<SignedGSet> {
        self.signed_generators().map(|v| SignedGSet::new(self.rank, v.to_vec()))
    }

    /// Same module with its action stored densely and no certificate.
    pub fn forget(&self) -> RGModule {
        RGModule {
            group: self.group.clone(),
            ring: self.ring,
            rank: self.rank,
            action: Action::Dense(self.generator_matrices()),
            certificate: Certificate::General,
        }
    }

    /// Transports the module along an invertible change of basis `t`
    /// (new basis vectors are the columns of `t`); certificates other than
    /// summands are dropped.
    pub fn change_basis(&self, t: &Matrix, t_inv: &Matrix) -> RGModule {
        let mats: Vec<Matrix> =
            (0..self.group.num_generators()).map(|i| t_inv.mul(&self.left_act(i, t))).collect();
        let action = match mats.iter().map(SignedPerm::from_matrix).collect::<Option<Vec<_>>>() {
            Some(v) => Action::Monomial(v),
            None => Action::Dense(mats),
        };
        let certificate = match &self.certificate {
            Certificate::Summand(s) => Certificate::Summand(Box::new(SummandData {
                ambient: s.ambient.clone(),
                embedding: s.embedding.mul(t),
                projection: t_inv.mul(&s.projection),
            })),
            _ => Certificate::General,
        };
        RGModule::new_unchecked(self.group.clone(), self.ring, self.rank, action, certificate)
    }

    /// Restores the best monomial certificate available from the action.
    pub fn recertify_monomial(self) -> RGModule {
        if let (Action::Monomial(v), Certificate::General) = (&self.action, &self.certificate) {
            let set = SignedGSet::new(self.rank, v.clone());
            return RGModule::from_signed(self.group.clone(), self.ring, set).expect("action already validated");
        }
        self
    }
}

/// The span of an invariant subset of a monomial basis, with the restricted
/// signed action.
pub fn monomial_subset(m: &RGModule, idx: &[usize]) -> Result<RGModule> {
    let gens = m
        .signed_generators()
        .ok_or_else(|| Error::InvalidCertificate("subset of a module without a monomial basis".into()))?;
    let mut pos = vec![usize::MAX; m.rank];
    for (i, &a) in idx.iter().enumerate() {
        pos[a] = i;
    }
    let mut action = Vec::with_capacity(gens.len());
    for p in gens {
        let mut perm = Vec::with_capacity(idx.len());
        for &a in idx {
            let b = pos[p.perm[a] as usize];
            if b == usize::MAX {
                return Err(Error::InvalidCertificate("basis subset is not invariant".into()));
            }
            perm.push(b as u32);
        }
        action.push(SignedPerm { perm, neg: idx.iter().map(|&a| p.neg[a]).collect() });
    }
    RGModule::from_signed(m.group.clone(), m.ring, SignedGSet::new(idx.len(), action))
}

/// `ρ_target(g)·f = f·ρ_source(g)` for every generator.
pub fn is_equivariant(source: &RGModule, target: &RGModule, f: &Matrix) -> bool {
    if f.shape() != (target.rank, source.rank) || source.ring != target.ring || f.ring() != source.ring {
        return false;
    }
    (0..source.group.num_generators()).all(|i| target.left_act(i, f) == source.right_act(i, f))
}

/// An equivariant map between modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap {
    pub source: RGModule,
    pub target: RGModule,
    pub matrix: Matrix,
}

impl ModuleMap {
    pub fn new(source: RGModule, target: RGModule, matrix: Matrix) -> Result<ModuleMap> {
        if !is_equivariant(&source, &target, &matrix) {
            return Err(Error::NotEquivariant(format!(
                "{}x{} map between ranks {} and {}",
                matrix.rows(),
                matrix.cols(),
                source.rank,
                target.rank
            )));
        }
        Ok(ModuleMap { source, target, matrix })
    }
    pub fn identity(m: &RGModule) -> ModuleMap {
        ModuleMap { source: m.clone(), target: m.clone(), matrix: Matrix::identity(m.ring, m.rank) }
    }
}

fn same_group(a: &RGModule, b: &RGModule) -> Result<()> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch(format!("{} vs {}", a.ring, b.ring)));
    }
    if *a.group != *b.group {
        return Err(Error::RelationFailure("modules over different groups".into()));
    }
    Ok(())
}

/// Diagonal tensor product `M ⊗ N`, basis `e_a ⊗ e_b` at `a·rank(N) + b`.
pub fn tensor(m: &RGModule, n: &RGModule) -> Result<RGModule> {
    same_group(m, n)?;
    let ring = m.ring;
    let g = m.group.clone();
    if let (Some(a), Some(b)) = (m.signed_gset(), n.signed_gset()) {
        let prod = a.product(&b);
        if !prod.has_signs() {
            // any product involving a free G-set is free; linearize detects it
            return RGModule::linearize(g, &prod.underlying(), ring);
        }
        let out = RGModule::new_unchecked(
            g,
            ring,
            prod.size,
            Action::Monomial(prod.action.clone()),
            Certificate::Monomial(prod),
        );
        return Ok(out);
    }
    let mats: Vec<Matrix> =
        (0..g.num_generators()).map(|i| m.generator_matrix(i).kron(&n.generator_matrix(i))).collect();
    let plain = RGModule::new_unchecked(g.clone(), ring, m.rank * n.rank, Action::Dense(mats), Certificate::General);
    // Free ⊗ anything: untwist to an explicit free module (Frobenius).
    if let Some(set) = m.permutation_gset().filter(|_| m.is_free_certified()) {
        return Ok(free_tensor_untwist(&plain, set, n, true));
    }
    if let Some(set) = n.permutation_gset().filter(|_| n.is_free_certified()) {
        return Ok(free_tensor_untwist(&plain, set, m, false));
    }
    // Summand ⊗ permutation: tensor the ambient.
    let summand = |s: &SummandData, other: &RGModule, left: bool| -> Result<Option<RGModule>> {
        if !other.is_permutation_certified() {
            return Ok(None);
        }
        let id = Matrix::identity(ring, other.rank);
        let (amb, emb, proj) = if left {
            (tensor(&s.ambient, other)?, s.embedding.kron(&id), s.projection.kron(&id))
        } else {
            (tensor(other, &s.ambient)?, id.kron(&s.embedding), id.kron(&s.projection))
        };
        Ok(Some(RGModule::new_unchecked(
            plain.group.clone(),
            ring,
            plain.rank,
            plain.action.clone(),
            Certificate::Summand(Box::new(SummandData { ambient: amb, embedding: emb, projection: proj })),
        )))
    };
    if let Certificate::Summand(s) = &m.certificate {
        if let Some(out) = summand(s, n, true)? {
            return Ok(out);
        }
    }
    if let Certificate::Summand(s) = &n.certificate {
        if let Some(out) = summand(s, m, false)? {
            return Ok(out);
        }
    }
    Ok(plain)
}

/// For `F ⊗ N` (or `N ⊗ F`) with `F` free on `set`, the vectors
/// `e_{g·a} ⊗ ρ_N(g) e_x` over orbit representatives `a` form a basis
/// permuted freely by `G`; returns the module certified as a summand (in
/// fact an isomorphic copy) of that free module.
fn free_tensor_untwist(plain: &RGModule, set: &GSet, n: &RGModule, free_left: bool) -> RGModule {
    let g = &plain.group;
    let ring = plain.ring;
    let r = n.rank;
    let elems = n.all_element_matrices();
    let orbits = set.orbits();
    let free = RGModule::free_module(g.clone(), ring, orbits.len() * r);
    // column index in the free module: (orbit o, x) copy, element e
    let mut basis = Matrix::zeros(ring, plain.rank, free.rank);
    for (o, orbit) in orbits.iter().enumerate() {
        let a = orbit[0];
        for e in 0..g.order() {
            let point = set.element_perm(g, e)[a] as usize;
            for x in 0..r {
                let col = (o * r + x) * g.order() + e;
                for y in 0..r {
                    let v = elems[e].get(y, x);
                    if v != 0 {
                        let row = if free_left { point * r + y } else { y * set.size() + point };
                        basis.set(row, col, v);
                    }
                }
            }
        }
    }
    let inv = basis.inverse_any().expect("untwisted basis is invertible");
    RGModule::new_unchecked(
        g.clone(),
        ring,
        plain.rank,
        plain.action.clone(),
        Certificate::Summand(Box::new(SummandData { ambient: free, embedding: inv, projection: basis })),
    )
}

/// `M ⊕ N` with the strongest certificate both summands justify.
pub fn direct_sum(m: &RGModule, n: &RGModule) -> Result<RGModule> {
    same_group(m, n)?;
    let ring = m.ring;
    let g = m.group.clone();
    if let (Some(a), Some(b)) = (m.signed_gset(), n.signed_gset()) {
        let set = SignedGSet::new(
            a.size + b.size,
            a.action.iter().zip(&b.action).map(|(x, y)| x.direct_sum(y)).collect(),
        );
        let both_monomial = m.is_monomial_certified() && n.is_monomial_certified();
        if both_monomial {
            return RGModule::from_signed(g, ring, set);
        }
    }
    let mats: Vec<Matrix> =
        (0..g.num_generators()).map(|i| m.generator_matrix(i).block_diag(&n.generator_matrix(i))).collect();
    let action = match (&m.action, &n.action) {
        (Action::Monomial(a), Action::Monomial(b)) => {
            Action::Monomial(a.iter().zip(b).map(|(x, y)| x.direct_sum(y)).collect())
        }
        _ => Action::Dense(mats),
    };
    let as_summand = |x: &RGModule| -> Option<SummandData> {
        match &x.certificate {
            Certificate::Summand(s) => Some((**s).clone()),
            Certificate::Permutation(_) | Certificate::Free(_) => Some(SummandData {
                ambient: x.clone(),
                embedding: Matrix::identity(ring, x.rank),
                projection: Matrix::identity(ring, x.rank),
            }),
            _ => None,
        }
    };
    let certificate = match (as_summand(m), as_summand(n)) {
        (Some(a), Some(b)) => Certificate::Summand(Box::new(SummandData {
            ambient: direct_sum(&a.ambient, &b.ambient)?,
            embedding: a.embedding.block_diag(&b.embedding),
            projection: a.projection.block_diag(&b.projection),
        })),
        _ => Certificate::General,
    };
    Ok(RGModule::new_unchecked(g, ring, m.rank + n.rank, action, certificate))
}

pub fn direct_sum_all(group: Arc<Group>, ring: RingSpec, mods: &[RGModule]) -> Result<RGModule> {
    let mut acc = RGModule::zero(group, ring);
    for m in mods {
        acc = direct_sum(&acc, m)?;
    }
    Ok(acc)
}

/// A subgroup as a group in its own right, with the map to parent elements.
#[derive(Debug, Clone)]
pub struct SubgroupData {
    pub parent: Arc<Group>,
    pub subgroup: Subgroup,
    pub group: Arc<Group>,
    /// element index in `group` ↦ element index in `parent`
    pub to_parent: Vec<usize>,
}

impl SubgroupData {
    pub fn new(parent: Arc<Group>, subgroup: Subgroup) -> SubgroupData {
        let (g, map) = parent.subgroup_as_group(&subgroup);
        SubgroupData { parent, subgroup, group: Arc::new(g), to_parent: map }
    }
    /// Element index in the subgroup of a parent element lying in it.
    pub fn from_parent(&self, e: usize) -> usize {
        self.to_parent.iter().position(|&x| x == e).expect("element of the subgroup")
    }
}

/// `Res^G_H M`: the generators of `H` act through their parent words.
pub fn restrict(m: &RGModule, h: &SubgroupData) -> Result<RGModule> {
    if *m.group != *h.parent {
        return Err(Error::NotASubgroup("restriction along a subgroup of another group".into()));
    }
    let hg = h.group.clone();
    let parent_of_gen: Vec<usize> = (0..hg.num_generators()).map(|i| h.to_parent[hg.generator_index(i)]).collect();
    let restrict_gset = |s: &GSet| GSet::new(s.size, parent_of_gen.iter().map(|&e| s.element_perm(&m.group, e)).collect());
    let action = match &m.action {
        Action::Monomial(_) => Action::Monomial(parent_of_gen.iter().map(|&e| m.element_signed(e).unwrap()).collect()),
        Action::Dense(_) => Action::Dense(parent_of_gen.iter().map(|&e| m.element_matrix(e)).collect()),
    };
    let certificate = match &m.certificate {
        Certificate::Permutation(s) => Certificate::Permutation(restrict_gset(s)),
        Certificate::Free(s) => Certificate::Free(restrict_gset(s)),
        Certificate::Monomial(s) => Certificate::Monomial(SignedGSet::new(
            s.size,
            parent_of_gen.iter().map(|&e| s.element_action(&m.group, e)).collect(),
        )),
        Certificate::Summand(s) => Certificate::Summand(Box::new(SummandData {
            ambient: restrict(&s.ambient, h)?,
            embedding: s.embedding.clone(),
            projection: s.projection.clone(),
        })),
        Certificate::General => Certificate::General,
    };
    let out = RGModule::new_unchecked(hg, m.ring, m.rank, action, certificate);
    Ok(out.recertify_monomial().recertify_gset())
}

impl RGModule {
    /// A permutation certificate whose G-set happens to be free becomes Free
    /// (and conversely a restricted Free stays Free).
    fn recertify_gset(self) -> RGModule {
        if let Certificate::Permutation(s) = &self.certificate {
            if s.is_free(&self.group) {
                let c = Certificate::Free(s.clone());
                return RGModule { certificate: c, ..self };
            }
        }
        self
    }
}

/// `Ind_H^G N`, basis `g_j ⊗ e_x` at `j·rank(N) + x` for the identity-first
/// transversal; `g·(g_j⊗n) = g_{σ(j)} ⊗ h·n` where `g·g_j = g_{σ(j)}·h`.
pub fn induce(n: &RGModule, h: &SubgroupData) -> Result<(RGModule, Transversal)> {
    if *n.group != *h.group {
        return Err(Error::NotASubgroup("module is not over the given subgroup".into()));
    }
    let g = h.parent.clone();
    let (t, _) = g.coset_action(&h.subgroup)?;
    let k = t.index();
    let r = n.rank;
    let ring = n.ring;
    let block = |s: usize| -> Vec<(usize, usize)> {
        // (σ(j), h as element of the subgroup group) for each j
        t.representatives
            .iter()
            .map(|&gj| {
                let (j2, hh) = t.decompose(&g, g.mul(s, gj));
                (j2, h.from_parent(hh))
            })
            .collect()
    };
    let gen_blocks: Vec<Vec<(usize, usize)>> = (0..g.num_generators()).map(|i| block(g.generator_index(i))).collect();
    let action = if n.signed_generators().is_some() {
        Action::Monomial(
            gen_blocks
                .iter()
                .map(|b| {
                    let mut perm = vec![0u32; k * r];
                    let mut neg = vec![false; k * r];
                    for (j, &(j2, hh)) in b.iter().enumerate() {
                        let sp = n.element_signed(hh).unwrap();
                        for x in 0..r {
                            perm[j * r + x] = (j2 * r + sp.perm[x] as usize) as u32;
                            neg[j * r + x] = sp.neg[x];
                        }
                    }
                    SignedPerm { perm, neg }
                })
                .collect(),
        )
    } else {
        let elems = n.all_element_matrices();
        Action::Dense(
            gen_blocks
                .iter()
                .map(|b| {
                    let mut m = Matrix::zeros(ring, k * r, k * r);
                    for (j, &(j2, hh)) in b.iter().enumerate() {
                        m.set_block(j2 * r, j * r, &elems[hh]);
                    }
                    m
                })
                .collect(),
        )
    };
    let certificate = match &n.certificate {
        Certificate::Summand(s) => {
            let (amb, _) = induce(&s.ambient, h)?;
            let id = Matrix::identity(ring, k);
            Certificate::Summand(Box::new(SummandData {
                ambient: amb,
                embedding: id.kron(&s.embedding),
                projection: id.kron(&s.projection),
            }))
        }
        _ => Certificate::General,
    };
    let out = RGModule::new_unchecked(g, ring, k * r, action, certificate).recertify_monomial();
    Ok((out, t))
}

/// `Infl_{G/N}^G M`: generator `i` of `G` acts as the element `images[i]` of
/// the quotient group that `M` lives over.
pub fn inflate(m: &RGModule, g: Arc<Group>, images: &[usize]) -> Result<RGModule> {
    let q = m.group.clone();
    if images.len() != g.num_generators() || images.iter().any(|&x| x >= q.order()) {
        return Err(Error::RelationFailure("quotient images do not match the generators".into()));
    }
    // homomorphism check: φ defined along words must satisfy φ(s·x) = φ(s)·φ(x)
    let mut phi = vec![0usize; g.order()];
    for e in 1..g.order() {
        phi[e] = g.word(e).iter().rev().fold(0usize, |acc, &w| q.mul(images[w], acc));
    }
    for i in 0..g.num_generators() {
        let s = g.generator_index(i);
        for x in 0..g.order() {
            if phi[g.mul(s, x)] != q.mul(images[i], phi[x]) {
                return Err(Error::RelationFailure("quotient map is not a homomorphism".into()));
            }
        }
    }
    let action = match m.signed_generators() {
        Some(_) => Action::Monomial(images.iter().map(|&e| m.element_signed(e).unwrap()).collect()),
        None => Action::Dense(images.iter().map(|&e| m.element_matrix(e)).collect()),
    };
    let out = RGModule::new(g, m.ring, m.rank, action, Certificate::General)?;
    Ok(out.recertify_monomial())
}

/// Heller loop: `Ω(M) = ker(kG⊗M ↠ M)` where `kG⊗M` is realized as the free
/// module on `e_g ⊗ e_x` and the cover sends it to `ρ(g)e_x`.
pub fn omega(m: &RGModule) -> Result<(RGModule, ModuleMap, ModuleMap)> {
    if !m.ring.is_field() {
        return Err(Error::UnsupportedRing("omega"));
    }
    let g = m.group.clone();
    let ring = m.ring;
    let r = m.rank;
    let free = RGModule::free_module(g.clone(), ring, r);
    // free_module orders points copy-major: copy x, element e at x·|G| + e
    let elems = m.all_element_matrices();
    let mut cover = Matrix::zeros(ring, r, r * g.order());
    for x in 0..r {
        for e in 0..g.order() {
            for y in 0..r {
                let v = elems[e].get(y, x);
                if v != 0 {
                    cover.set(y, x * g.order() + e, v);
                }
            }
        }
    }
    let ker = cover.kernel()?;
    let sub = submodule(&free, &ker)?;
    let cover_map = ModuleMap { source: free.clone(), target: m.clone(), matrix: cover };
    let emb = ModuleMap { source: sub.clone(), target: free, matrix: ker };
    Ok((sub, emb, cover_map))
}

/// The submodule spanned by the (independent) columns of `basis`, with the
/// induced action; fails if the span is not invariant.
pub fn submodule(m: &RGModule, basis: &Matrix) -> Result<RGModule> {
    let ring = m.ring;
    if !ring.is_field() {
        return Err(Error::UnsupportedRing("submodule"));
    }
    let mut mats = Vec::new();
    for i in 0..m.group.num_generators() {
        let img = m.left_act(i, basis);
        let x = solve_field(basis, &img)?
            .ok_or_else(|| Error::NotEquivariant("span is not invariant".into()))?;
        mats.push(x);
    }
    let rank = basis.cols();
    let action = match mats.iter().map(SignedPerm::from_matrix).collect::<Option<Vec<_>>>() {
        Some(v) => Action::Monomial(v),
        None => Action::Dense(mats),
    };
    Ok(RGModule::new_unchecked(m.group.clone(), ring, rank, action, Certificate::General))
}

/// Quotient `M / span(basis)` with the induced action, plus the projection.
pub fn quotient_module(m: &RGModule, basis: &Matrix) -> Result<(RGModule, Matrix)> {
    let ring = m.ring;
    let r = m.rank;
    // extend basis by standard vectors to a full basis
    let mut cols = basis.clone();
    let mut extra = Vec::new();
    let mut rank = basis.rank();
    for i in 0..r {
        let mut e = Matrix::zeros(ring, r, 1);
        e.set(i, 0, 1);
        let cand = cols.hstack(&e);
        let cr = cand.rank();
        if cr > rank {
            cols = cand;
            rank = cr;
            extra.push(i);
        }
    }
    let inv = cols.inverse()?.ok_or_else(|| Error::Stage { stage: "quotient".into(), reason: "basis".into() })?;
    let k = basis.cols();
    let proj = inv.block(k, 0, r - k, r);
    let lift = cols.block(0, k, r, r - k);
    let mats: Vec<Matrix> =
        (0..m.group.num_generators()).map(|i| proj.mul(&m.left_act(i, &lift))).collect();
    let action = if r - k == 0 {
        Action::Monomial(vec![SignedPerm::identity(0); m.group.num_generators()])
    } else {
        Action::Dense(mats)
    };
    Ok((RGModule::new_unchecked(m.group.clone(), ring, r - k, action, Certificate::General), proj))
}

/// Basis of `M^H = {v : ρ(h)v = v for all h ∈ H}` (columns).
pub fn fixed_points(m: &RGModule, h: &Subgroup) -> Result<Matrix> {
    let ring = m.ring;
    if !ring.is_field() {
        return Err(Error::UnsupportedRing("fixed_points"));
    }
    let gens = h.generators();
    if gens.is_empty() {
        return Ok(Matrix::identity(ring, m.rank));
    }
    let id = Matrix::identity(ring, m.rank);
    let mut stacked = Matrix::zeros(ring, 0, m.rank);
    for &e in gens {
        stacked = stacked.vstack(&m.element_matrix(e).sub(&id));
    }
    stacked.kernel()
}

/// Stabilizer of the line through basis vector `a` and the sign by which
/// each stabilizing element acts on it.
fn line_stabilizer(m: &RGModule, a: usize) -> Vec<(usize, bool)> {
    let g = &m.group;
    (0..g.order())
        .filter_map(|e| {
            let sp = m.element_signed(e).unwrap();
            (sp.perm[a] as usize == a).then_some((e, sp.neg[a]))
        })
        .collect()
}

/// Basis of `Hom_G(M, N)` as a list of matrices.
///
/// For monomial `M` a map is determined by the images of orbit
/// representatives, which must transform like the representative under its
/// line stabilizer; otherwise the intertwining equations are solved directly.
pub fn hom_basis(m: &RGModule, n: &RGModule) -> Result<Vec<Matrix>> {
    same_group(m, n)?;
    let ring = m.ring;
    if !ring.is_field() {
        return Err(Error::UnsupportedRing("hom_basis"));
    }
    let g = m.group.clone();
    if let Some(set) = m.signed_gset() {
        let orbits = orbits_of(set.size, &set.action.iter().map(|a| a.perm.clone()).collect::<Vec<_>>());
        let n_elems = n.all_element_matrices();
        let m_elems: Vec<SignedPerm> = (0..g.order()).map(|e| m.element_signed(e).unwrap()).collect();
        let mut out = Vec::new();
        for orbit in &orbits {
            let a = orbit[0];
            let stab = line_stabilizer(m, a);
            let id = Matrix::identity(ring, n.rank);
            let mut eqs = Matrix::zeros(ring, 0, n.rank);
            for &(e, neg) in &stab {
                let target = if neg { id.neg() } else { id.clone() };
                eqs = eqs.vstack(&n_elems[e].sub(&target));
            }
            let sol = eqs.kernel()?;
            // where each orbit point comes from: point = g·a with sign
            let mut reach: Vec<Option<(usize, bool)>> = vec![None; set.size];
            for e in 0..g.order() {
                let p = m_elems[e].perm[a] as usize;
                if reach[p].is_none() {
                    reach[p] = Some((e, m_elems[e].neg[a]));
                }
            }
            for c in 0..sol.cols() {
                let v = sol.col_vec(c);
                let mut f = Matrix::zeros(ring, n.rank, m.rank);
                for &p in orbit {
                    let (e, neg) = reach[p].unwrap();
                    // f(e_p) = ±ρ_N(e) v  since g·e_a = ±e_p
                    let img = n_elems[e].mul(&Matrix::column(ring, &v));
                    for y in 0..n.rank {
                        let val = img.get(y, 0);
                        if val != 0 {
                            f.set(y, p, if neg { ring.neg(val) } else { val });
                        }
                    }
                }
                out.push(f);
            }
        }
        return Ok(out);
    }
    // Kronecker system on vec(X) (row-major): ρ_N(g) X − X ρ_M(g) = 0
    let (rn, rm) = (n.rank, m.rank);
    let id_n = Matrix::identity(ring, rn);
    let id_m = Matrix::identity(ring, rm);
    let mut eqs = Matrix::zeros(ring, 0, rn * rm);
    for i in 0..g.num_generators() {
        let a = n.generator_matrix(i).kron(&id_m);
        let b = id_n.kron(&m.generator_matrix(i).transpose());
        eqs = eqs.vstack(&a.sub(&b));
    }
    let k = eqs.kernel()?;
    Ok((0..k.cols()).map(|c| Matrix::from_vec(ring, rn, rm, k.col_vec(c))).collect())
}

/// An equivariant `φ: X → P` with `p∘φ = f`, where `p: P → Y` and
/// `f: X → Y` are equivariant. Monomial sources are lifted orbit by orbit
/// (values at representatives constrained to the right line-stabilizer
/// eigenspace); summand sources are lifted through their ambient module.
/// Over `ℤ` only free sources are supported.
pub fn lift_equivariant(x: &RGModule, p_mod: &RGModule, p: &Matrix, f: &Matrix) -> Result<Option<Matrix>> {
    let ring = x.ring;
    assert_eq!(p.cols(), p_mod.rank);
    assert_eq!(f.cols(), x.rank);
    if x.rank == 0 {
        return Ok(Some(Matrix::zeros(ring, p_mod.rank, 0)));
    }
    if let Certificate::Summand(s) = &x.certificate {
        let lifted = lift_equivariant(&s.ambient, p_mod, p, &f.mul(&s.projection))?;
        return Ok(lifted.map(|phi| phi.mul(&s.embedding)));
    }
    let Some(set) = x.signed_gset() else {
        if !ring.is_field() {
            return Err(Error::UnsupportedRing("lifting from a general module"));
        }
        // general source: solve p∘φ = f inside Hom_G(X, P)
        let basis = hom_basis(x, p_mod)?;
        if basis.is_empty() {
            return Ok(if f.is_zero() { Some(Matrix::zeros(ring, p_mod.rank, x.rank)) } else { None });
        }
        let cols: Vec<Matrix> = basis.iter().map(|b| flatten(&p.mul(b))).collect();
        let mut a = cols[0].clone();
        for c in &cols[1..] {
            a = a.hstack(c);
        }
        let Some(coef) = solve_field(&a, &flatten(f))? else { return Ok(None) };
        let mut phi = Matrix::zeros(ring, p_mod.rank, x.rank);
        for (i, b) in basis.iter().enumerate() {
            let c = coef.get(i, 0);
            if c != 0 {
                phi = phi.add(&b.scale(c));
            }
        }
        return Ok(Some(phi));
    };
    let g = x.group.clone();
    let perms: Vec<Perm> = set.action.iter().map(|a| a.perm.clone()).collect();
    let orbits = orbits_of(set.size, &perms);
    let p_elems = p_mod.all_element_matrices();
    let x_elems: Vec<SignedPerm> = (0..g.order()).map(|e| x.element_signed(e).unwrap()).collect();
    let mut phi = Matrix::zeros(ring, p_mod.rank, x.rank);
    for orbit in &orbits {
        let a = orbit[0];
        let stab = line_stabilizer(x, a);
        let target = Matrix::column(ring, &f.col_vec(a));
        let v = if stab.len() == 1 {
            let sol = if ring.is_field() { solve_field(p, &target)? } else { solve_integer(p, &target)? };
            match sol {
                Some(v) => v,
                None => return Ok(None),
            }
        } else {
            if !ring.is_field() {
                return Err(Error::UnsupportedRing("lifting from a non-free permutation module"));
            }
            let id = Matrix::identity(ring, p_mod.rank);
            let mut eqs = Matrix::zeros(ring, 0, p_mod.rank);
            for &(e, neg) in &stab {
                let t = if neg { id.neg() } else { id.clone() };
                eqs = eqs.vstack(&p_elems[e].sub(&t));
            }
            let space = eqs.kernel()?;
            match solve_field(&p.mul(&space), &target)? {
                Some(c) => space.mul(&c),
                None => return Ok(None),
            }
        };
        let mut done = vec![false; x.rank];
        for e in 0..g.order() {
            let q = x_elems[e].perm[a] as usize;
            if done[q] {
                continue;
            }
            done[q] = true;
            let img = p_elems[e].mul(&v);
            for y in 0..p_mod.rank {
                let val = img.get(y, 0);
                if val != 0 {
                    phi.set(y, q, if x_elems[e].neg[a] { ring.neg(val) } else { val });
                }
            }
        }
    }
    Ok(Some(phi))
}

/// Column-stacks a matrix into a single column (row-major order).
pub fn flatten(m: &Matrix) -> Matrix {
    Matrix::from_vec(m.ring(), m.rows() * m.cols(), 1, m.data().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32) -> RingSpec {
        RingSpec::gf(p).unwrap()
    }
    fn cyclic(n: u32) -> Arc<Group> {
        Arc::new(Group::enumerate(n as usize, vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap())
    }

    #[test]
    fn linearize_and_free() {
        let c4 = cyclic(4);
        let c2 = c4.generate(&[c4.mul(c4.generator_index(0), c4.generator_index(0))]);
        let (_, set) = c4.coset_action(&c2).unwrap();
        let m = RGModule::linearize(c4.clone(), &set, RingSpec::Integers).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(m.generator_matrix(0).to_rows(), vec![vec![0, 1], vec![1, 0]]);
        let f = RGModule::free_module(cyclic(3), RingSpec::Integers, 2);
        assert_eq!(f.rank(), 6);
        assert!(f.is_free_certified());
        assert_eq!(RGModule::free_module(cyclic(3), gf(3), 0).rank(), 0);
    }

    #[test]
    fn free_tensor_free_is_free() {
        let c3 = cyclic(3);
        let f = RGModule::free_module(c3, gf(3), 1);
        let t = tensor(&f, &f).unwrap();
        assert_eq!(t.rank(), 9);
        assert!(t.is_free_certified());
    }

    #[test]
    fn free_tensor_general_untwists() {
        let c3 = cyclic(3);
        let j2 = RGModule::from_matrices(c3.clone(), gf(3), vec![Matrix::from_rows(gf(3), &[vec![1, 1], vec![0, 1]]).unwrap()]).unwrap();
        let f = RGModule::free_module(c3, gf(3), 1);
        let t = tensor(&f, &j2).unwrap();
        assert!(t.is_projective_certified());
        let t2 = tensor(&j2, &f).unwrap();
        assert!(t2.is_projective_certified());
    }

    #[test]
    fn omega_of_trivial_c2() {
        let c2 = cyclic(2);
        let k = RGModule::trivial(c2, gf(2), 1);
        let (om, emb, cover) = omega(&k).unwrap();
        assert_eq!(om.rank(), 1);
        assert!(om.generator_matrix(0).is_identity());
        assert!(cover.matrix.mul(&emb.matrix).is_zero());
    }

    #[test]
    fn sign_module_over_gf2_is_trivial() {
        let c4 = cyclic(4);
        let h = c4.index2_normal_subgroups().remove(0);
        let l = RGModule::sign_module(c4.clone(), gf(2), &h).unwrap();
        assert!(l.is_permutation_certified());
        let l3 = RGModule::sign_module(c4, gf(3), &h).unwrap();
        assert_eq!(l3.generator_matrix(0).get(0, 0), 2);
    }

    #[test]
    fn hom_free_c2() {
        let f = RGModule::free_module(cyclic(2), gf(2), 1);
        assert_eq!(hom_basis(&f, &f).unwrap().len(), 2);
        let k = RGModule::trivial(cyclic(2), gf(2), 1);
        assert_eq!(hom_basis(&k, &k).unwrap().len(), 1);
        assert_eq!(hom_basis(&k.forget(), &f).unwrap().len(), 1);
    }
}
