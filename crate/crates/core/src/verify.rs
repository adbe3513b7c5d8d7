//! Independent re-check of resolution certificates.
//!
//! The verifier reads the interchange document, not the in-memory objects:
//! it enumerates the group itself, rebuilds every action matrix from the
//! document and re-derives each claim using only the matrix kernel
//! (products, ranks, Smith invariant factors). Clauses are checked in a fixed
//! order and the first violation is reported.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::io::{certificate_doc, ActionDoc, CertificateDoc, ComplexDoc, IndexDoc, MatrixDoc, ModuleDoc, TermCertificateDoc, SCHEMA};
use crate::resolve::{ResolutionCertificate, ResolutionKind};
use crate::ring::{invariant_factors, Matrix, RingSpec};

/// Groups larger than this are refused outright.
pub const MAX_ORDER: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    Schema,
    Ring,
    Group,
    Shape,
    Action,
    TermCertificate,
    Kind,
    DSquared,
    Equivariance,
    ChainMap,
    Exactness,
    HomologyWitness,
    FreeIndex,
    ProjectiveIndex,
}

impl Clause {
    pub const ALL: [Clause; 14] = [
        Clause::Schema,
        Clause::Ring,
        Clause::Group,
        Clause::Shape,
        Clause::Action,
        Clause::TermCertificate,
        Clause::Kind,
        Clause::DSquared,
        Clause::Equivariance,
        Clause::ChainMap,
        Clause::Exactness,
        Clause::HomologyWitness,
        Clause::FreeIndex,
        Clause::ProjectiveIndex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Clause::Schema => "schema",
            Clause::Ring => "ring",
            Clause::Group => "group",
            Clause::Shape => "shape",
            Clause::Action => "action",
            Clause::TermCertificate => "term-certificate",
            Clause::Kind => "kind",
            Clause::DSquared => "d-squared",
            Clause::Equivariance => "equivariance",
            Clause::ChainMap => "chain-map",
            Clause::Exactness => "exactness",
            Clause::HomologyWitness => "homology-witness",
            Clause::FreeIndex => "free-index",
            Clause::ProjectiveIndex => "projective-index",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: Clause,
    pub degree: Option<i64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub violation: Option<Violation>,
}

impl VerifyReport {
    pub fn clause(&self) -> Option<Clause> {
        self.violation.as_ref().map(|v| v.clause)
    }
}

type V<T> = std::result::Result<T, Violation>;

fn fail<T>(clause: Clause, degree: Option<i64>, detail: impl Into<String>) -> V<T> {
    Err(Violation { clause, degree, detail: detail.into() })
}

/// Verifies an in-memory certificate by way of its document.
pub fn verify_certificate(cert: &ResolutionCertificate) -> VerifyReport {
    verify_document(&certificate_doc(cert))
}

pub fn verify_document(doc: &CertificateDoc) -> VerifyReport {
    match run(doc) {
        Ok(()) => VerifyReport { passed: true, violation: None },
        Err(v) => VerifyReport { passed: false, violation: Some(v) },
    }
}

struct Elements {
    order: usize,
    gens: Vec<Vec<u32>>,
    /// For each non-identity element, `(generator, predecessor)` with
    /// element = generator ∘ predecessor.
    steps: Vec<(usize, usize)>,
    /// `times[i][e]` = index of `gens[i] ∘ elements[e]`.
    times: Vec<Vec<usize>>,
}

fn enumerate(degree: usize, gens: &[Vec<u32>]) -> V<Elements> {
    for (i, g) in gens.iter().enumerate() {
        let mut seen = vec![false; degree];
        if g.len() != degree || g.iter().any(|&x| (x as usize) >= degree || std::mem::replace(&mut seen[x as usize], true)) {
            return fail(Clause::Group, None, format!("generator {i} is not a permutation of {degree} points"));
        }
    }
    let id: Vec<u32> = (0..degree as u32).collect();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut elements = vec![id.clone()];
    index.insert(id, 0);
    let mut steps = vec![(usize::MAX, usize::MAX)];
    let mut times: Vec<Vec<usize>> = vec![Vec::new(); gens.len()];
    let mut e = 0;
    while e < elements.len() {
        for (i, g) in gens.iter().enumerate() {
            let p: Vec<u32> = elements[e].iter().map(|&x| g[x as usize]).collect();
            let k = match index.get(&p) {
                Some(&k) => k,
                None => {
                    if elements.len() >= MAX_ORDER {
                        return fail(Clause::Group, None, format!("group order exceeds {MAX_ORDER}"));
                    }
                    elements.push(p.clone());
                    steps.push((i, e));
                    index.insert(p, elements.len() - 1);
                    elements.len() - 1
                }
            };
            times[i].push(k);
        }
        e += 1;
    }
    Ok(Elements { order: elements.len(), gens: gens.to_vec(), steps, times })
}

struct Module<'a> {
    rank: usize,
    gens: Vec<Matrix>,
    cert: &'a TermCertificateDoc,
    ambient: Option<(Box<Module<'a>>, Matrix, Matrix)>,
}

struct Complex<'a> {
    lo: i64,
    terms: Vec<Module<'a>>,
    diffs: Vec<Matrix>,
}

impl Complex<'_> {
    fn rank(&self, s: i64) -> usize {
        self.term(s).map_or(0, |t| t.rank)
    }
    fn term(&self, s: i64) -> Option<&Module<'_>> {
        if s < self.lo {
            return None;
        }
        self.terms.get((s - self.lo) as usize)
    }
    fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }
    /// `d_s: C_s → C_{s−1}`.
    fn d(&self, ring: RingSpec, s: i64) -> Matrix {
        if s > self.lo && s <= self.hi() {
            self.diffs[(s - self.lo - 1) as usize].clone()
        } else {
            Matrix::zeros(ring, self.rank(s - 1), self.rank(s))
        }
    }
}

fn read_matrix(ring: RingSpec, d: &MatrixDoc, rows: usize, cols: usize, what: &str, degree: Option<i64>) -> V<Matrix> {
    if d.rows != rows || d.cols != cols || d.entries.len() != rows || d.entries.iter().any(|r| r.len() != cols) {
        return fail(Clause::Shape, degree, format!("{what}: expected {rows}×{cols}"));
    }
    if let RingSpec::PrimeField { p } = ring {
        if d.entries.iter().flatten().any(|&x| x < 0 || x >= p as i64) {
            return fail(Clause::Shape, degree, format!("{what}: entry is not a residue mod {p}"));
        }
    }
    Ok(Matrix::from_rows_with_cols(ring, &d.entries, cols).expect("shape checked"))
}

fn signed_matrix(ring: RingSpec, images: &[i64], rank: usize, what: &str, degree: Option<i64>) -> V<Matrix> {
    if images.len() != rank {
        return fail(Clause::Shape, degree, format!("{what}: {} images for rank {rank}", images.len()));
    }
    let mut m = Matrix::zeros(ring, rank, rank);
    let mut hit = vec![false; rank];
    for (x, &y) in images.iter().enumerate() {
        let t = y.unsigned_abs() as usize;
        if t == 0 || t > rank || std::mem::replace(&mut hit[t - 1], true) {
            return fail(Clause::Shape, degree, format!("{what}: not a signed permutation"));
        }
        m.set(t - 1, x, if y < 0 { ring.neg(1) } else { 1 });
    }
    Ok(m)
}

fn read_module<'a>(ring: RingSpec, ngens: usize, d: &'a ModuleDoc, what: &str, degree: Option<i64>) -> V<Module<'a>> {
    let r = d.rank;
    let gens = match &d.action {
        ActionDoc::Monomial { generators } => {
            if generators.len() != ngens {
                return fail(Clause::Shape, degree, format!("{what}: {} generator actions for {ngens} generators", generators.len()));
            }
            generators.iter().map(|v| signed_matrix(ring, v, r, what, degree)).collect::<V<Vec<_>>>()?
        }
        ActionDoc::Dense { generators } => {
            if generators.len() != ngens {
                return fail(Clause::Shape, degree, format!("{what}: {} generator actions for {ngens} generators", generators.len()));
            }
            generators.iter().map(|m| read_matrix(ring, m, r, r, what, degree)).collect::<V<Vec<_>>>()?
        }
    };
    let ambient = match &d.certificate {
        TermCertificateDoc::Summand { ambient, embedding, projection } => {
            let a = read_module(ring, ngens, ambient, &format!("{what} ambient"), degree)?;
            let e = read_matrix(ring, embedding, a.rank, r, &format!("{what} embedding"), degree)?;
            let p = read_matrix(ring, projection, r, a.rank, &format!("{what} projection"), degree)?;
            Some((Box::new(a), e, p))
        }
        TermCertificateDoc::Permutation { gset } | TermCertificateDoc::Free { gset } => {
            if gset.len() != ngens || gset.iter().any(|p| p.len() != r) {
                return fail(Clause::Shape, degree, format!("{what}: G-set does not match the module"));
            }
            None
        }
        TermCertificateDoc::Monomial { set } => {
            if set.len() != ngens || set.iter().any(|p| p.len() != r) {
                return fail(Clause::Shape, degree, format!("{what}: signed G-set does not match the module"));
            }
            None
        }
        TermCertificateDoc::General => None,
    };
    Ok(Module { rank: r, gens, cert: &d.certificate, ambient })
}

fn read_complex<'a>(ring: RingSpec, ngens: usize, d: &'a ComplexDoc, name: &str) -> V<Complex<'a>> {
    let terms = d
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let s = d.lo + i as i64;
            read_module(ring, ngens, t, &format!("{name} term"), Some(s))
        })
        .collect::<V<Vec<_>>>()?;
    if d.differentials.len() != terms.len().saturating_sub(1) {
        return fail(Clause::Shape, None, format!("{name}: {} terms but {} differentials", terms.len(), d.differentials.len()));
    }
    let mut diffs = Vec::new();
    for (i, m) in d.differentials.iter().enumerate() {
        let s = d.lo + i as i64 + 1;
        diffs.push(read_matrix(ring, m, terms[i].rank, terms[i + 1].rank, &format!("{name} differential"), Some(s))?);
    }
    Ok(Complex { lo: d.lo, terms, diffs })
}

/// Action matrices of every element, built along the enumeration.
fn element_matrices(ring: RingSpec, g: &Elements, m: &Module) -> Vec<Matrix> {
    let mut out = vec![Matrix::identity(ring, m.rank)];
    for &(i, e) in &g.steps[1..] {
        let next = m.gens[i].mul(&out[e]);
        out.push(next);
    }
    out
}

fn check_action(ring: RingSpec, g: &Elements, m: &Module, what: &str, degree: Option<i64>) -> V<()> {
    let all = element_matrices(ring, g, m);
    for i in 0..g.gens.len() {
        for e in 0..g.order {
            if m.gens[i].mul(&all[e]) != all[g.times[i][e]] {
                return fail(Clause::Action, degree, format!("{what}: action does not respect the group relations"));
            }
        }
    }
    if let Some((a, _, _)) = &m.ambient {
        check_action(ring, g, a, &format!("{what} ambient"), degree)?;
    }
    Ok(())
}

fn orbit_sizes(rank: usize, gset: &[Vec<u32>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; rank];
    let mut sizes = Vec::new();
    for start in 0..rank {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[start] = id;
        let mut stack = vec![start];
        let mut n = 0;
        while let Some(x) = stack.pop() {
            n += 1;
            for p in gset {
                let y = p[x] as usize;
                if comp[y] == usize::MAX {
                    comp[y] = id;
                    stack.push(y);
                }
            }
        }
        sizes.push(n);
    }
    sizes
}

fn equivariant(source: &Module, target: &Module, f: &Matrix) -> bool {
    source.gens.iter().zip(&target.gens).all(|(a, b)| b.mul(f) == f.mul(a))
}

fn check_term_certificate(ring: RingSpec, g: &Elements, m: &Module, what: &str, degree: Option<i64>) -> V<()> {
    match m.cert {
        TermCertificateDoc::Permutation { gset } | TermCertificateDoc::Free { gset } => {
            for (i, p) in gset.iter().enumerate() {
                let images: Vec<i64> = p.iter().map(|&x| x as i64 + 1).collect();
                let pm = match signed_matrix(ring, &images, m.rank, what, degree) {
                    Ok(pm) => pm,
                    Err(_) => return fail(Clause::TermCertificate, degree, format!("{what}: G-set generator {i} is not a permutation")),
                };
                if pm != m.gens[i] {
                    return fail(Clause::TermCertificate, degree, format!("{what}: generator {i} is not the linearized G-set"));
                }
            }
            if matches!(m.cert, TermCertificateDoc::Free { .. }) && orbit_sizes(m.rank, gset).iter().any(|&n| n != g.order) {
                return fail(Clause::TermCertificate, degree, format!("{what}: free claim with a non-regular orbit"));
            }
        }
        TermCertificateDoc::Monomial { set } => {
            for (i, v) in set.iter().enumerate() {
                let sm = match signed_matrix(ring, v, m.rank, what, degree) {
                    Ok(sm) => sm,
                    Err(_) => return fail(Clause::TermCertificate, degree, format!("{what}: signed generator {i} is malformed")),
                };
                if sm != m.gens[i] {
                    return fail(Clause::TermCertificate, degree, format!("{what}: generator {i} is not the signed permutation"));
                }
            }
        }
        TermCertificateDoc::Summand { .. } => {
            let (a, e, p) = m.ambient.as_ref().expect("read with its ambient");
            check_term_certificate(ring, g, a, &format!("{what} ambient"), degree)?;
            if !p.mul(e).is_identity() {
                return fail(Clause::TermCertificate, degree, format!("{what}: projection∘embedding is not the identity"));
            }
            if !equivariant(m, a, e) || !equivariant(a, m, p) {
                return fail(Clause::TermCertificate, degree, format!("{what}: embedding or projection is not equivariant"));
            }
        }
        TermCertificateDoc::General => {}
    }
    Ok(())
}

fn is_p_permutation(m: &Module) -> bool {
    match m.cert {
        TermCertificateDoc::Permutation { .. } | TermCertificateDoc::Free { .. } => true,
        TermCertificateDoc::Summand { .. } => m.ambient.as_ref().is_some_and(|(a, _, _)| is_p_permutation(a)),
        _ => false,
    }
}

fn is_projective(ring: RingSpec, g: &Elements, m: &Module) -> bool {
    match (m.cert, ring) {
        (TermCertificateDoc::Free { .. }, _) => true,
        (TermCertificateDoc::Permutation { gset }, RingSpec::PrimeField { p }) => {
            orbit_sizes(m.rank, gset).iter().all(|&n| (g.order / n) % p as usize != 0)
        }
        (TermCertificateDoc::Summand { .. }, RingSpec::PrimeField { .. }) => {
            m.ambient.as_ref().is_some_and(|(a, _, _)| is_projective(ring, g, a))
        }
        _ => false,
    }
}

fn rank_and_torsion(ring: RingSpec, d: &Matrix) -> (usize, Vec<BigInt>) {
    if d.rows() == 0 || d.cols() == 0 {
        return (0, Vec::new());
    }
    if ring.is_field() {
        return (d.rank(), Vec::new());
    }
    let f = invariant_factors(d);
    (f.len(), f.into_iter().filter(|x| !x.is_one()).collect())
}

fn index_claim(i: Option<IndexDoc>) -> Option<i64> {
    i.map(|d| match d {
        IndexDoc::Degree(m) => m,
        IndexDoc::All(_) => i64::MAX,
    })
}

fn run(doc: &CertificateDoc) -> V<()> {
    if doc.schema != SCHEMA {
        return fail(Clause::Schema, None, format!("schema {:?}, expected {SCHEMA:?}", doc.schema));
    }
    let ring = doc.ring;
    if let RingSpec::PrimeField { p } = ring {
        if RingSpec::gf(p).is_err() {
            return fail(Clause::Ring, None, format!("GF({p}) is not a prime field"));
        }
    }
    let g = enumerate(doc.group.degree, &doc.group.generators)?;
    let ngens = g.gens.len();

    let p = read_complex(ring, ngens, &doc.complex, "complex")?;
    let x = read_complex(ring, ngens, &doc.target, "target")?;
    let (plo, phi) = (p.lo, p.hi());
    let mut aug: HashMap<i64, Matrix> = HashMap::new();
    for c in &doc.augmentation {
        let m = read_matrix(ring, &c.matrix, x.rank(c.degree), p.rank(c.degree), "augmentation", Some(c.degree))?;
        if aug.insert(c.degree, m).is_some() {
            return fail(Clause::Shape, Some(c.degree), "augmentation component listed twice");
        }
    }
    let f = |s: i64| aug.get(&s).cloned().unwrap_or_else(|| Matrix::zeros(ring, x.rank(s), p.rank(s)));

    for (c, name) in [(&p, "complex"), (&x, "target")] {
        for (i, t) in c.terms.iter().enumerate() {
            check_action(ring, &g, t, &format!("{name} term"), Some(c.lo + i as i64))?;
        }
    }
    for (c, name) in [(&p, "complex"), (&x, "target")] {
        for (i, t) in c.terms.iter().enumerate() {
            check_term_certificate(ring, &g, t, &format!("{name} term"), Some(c.lo + i as i64))?;
        }
    }
    for (i, t) in p.terms.iter().enumerate() {
        let ok = match doc.kind {
            ResolutionKind::Permutation => {
                matches!(t.cert, TermCertificateDoc::Permutation { .. } | TermCertificateDoc::Free { .. })
            }
            ResolutionKind::PPermutation => is_p_permutation(t),
        };
        if !ok {
            return fail(Clause::Kind, Some(plo + i as i64), "term certificate does not match the resolution kind");
        }
    }
    for (c, name) in [(&p, "complex"), (&x, "target")] {
        for s in c.lo + 2..=c.hi() {
            if !c.d(ring, s - 1).mul(&c.d(ring, s)).is_zero() {
                return fail(Clause::DSquared, Some(s), format!("{name}: d_{{s−1}}∘d_s ≠ 0"));
            }
        }
    }
    for (c, name) in [(&p, "complex"), (&x, "target")] {
        for s in c.lo + 1..=c.hi() {
            let (a, b) = (c.term(s).expect("in range"), c.term(s - 1).expect("in range"));
            if !equivariant(a, b, &c.d(ring, s)) {
                return fail(Clause::Equivariance, Some(s), format!("{name}: differential is not equivariant"));
            }
        }
    }
    for &s in aug.keys() {
        if (s < plo || s > phi) && !aug[&s].is_zero() {
            return fail(Clause::ChainMap, Some(s), "augmentation outside the resolution's degrees");
        }
    }
    for s in plo..=phi {
        if let (Some(a), Some(b)) = (p.term(s), x.term(s)) {
            if !equivariant(a, b, &f(s)) {
                return fail(Clause::ChainMap, Some(s), "augmentation component is not equivariant");
            }
        }
    }
    for s in plo..=phi + 1 {
        if x.d(ring, s).mul(&f(s)) != f(s - 1).mul(&p.d(ring, s)) {
            return fail(Clause::ChainMap, Some(s), "augmentation does not commute with the differentials");
        }
    }

    // cone_s = X_s ⊕ P_{s−1}, d = [[d_X, f], [0, −d_P]]
    let lo = x.lo.min(plo + 1);
    let hi = x.hi().max(phi + 1);
    let cone_rank = |s: i64| x.rank(s) + p.rank(s - 1);
    let cone_d = |s: i64| {
        let mut m = Matrix::zeros(ring, cone_rank(s - 1), cone_rank(s));
        let (xs, xs1) = (x.rank(s), x.rank(s - 1));
        if xs1 > 0 && xs > 0 {
            m.set_block(0, 0, &x.d(ring, s));
        }
        if xs1 > 0 && p.rank(s - 1) > 0 {
            m.set_block(0, xs, &f(s - 1));
        }
        if p.rank(s - 2) > 0 && p.rank(s - 1) > 0 {
            m.set_block(xs1, xs, &p.d(ring, s - 1).neg());
        }
        m
    };
    let mut ranks: HashMap<i64, (usize, Vec<BigInt>)> = HashMap::new();
    for s in lo..=hi + 1 {
        ranks.insert(s, rank_and_torsion(ring, &cone_d(s)));
    }
    for s in lo..=hi {
        let (out, _) = &ranks[&s];
        let (inc, tors) = &ranks[&(s + 1)];
        if out + inc != cone_rank(s) || !tors.is_empty() {
            return fail(Clause::Exactness, Some(s), "the augmentation is not a quasi-isomorphism");
        }
    }

    let mut claimed: HashMap<i64, (usize, Vec<BigInt>)> = HashMap::new();
    for h in &doc.homology_witness {
        let mut t = Vec::new();
        for x in &h.torsion {
            match x.parse::<BigInt>() {
                Ok(v) => t.push(v),
                Err(_) => return fail(Clause::HomologyWitness, Some(h.degree), "unreadable torsion coefficient"),
            }
        }
        t.sort();
        if claimed.insert(h.degree, (h.rank, t)).is_some() {
            return fail(Clause::HomologyWitness, Some(h.degree), "degree listed twice");
        }
    }
    if claimed.len() != p.terms.len() {
        return fail(Clause::HomologyWitness, None, "witness does not cover the resolution's degrees");
    }
    for s in plo..=phi {
        let (out, _) = rank_and_torsion(ring, &p.d(ring, s));
        let (inc, mut tors) = rank_and_torsion(ring, &p.d(ring, s + 1));
        tors.sort();
        let actual = (p.rank(s) - out - inc, tors);
        if claimed.get(&s) != Some(&actual) {
            return fail(Clause::HomologyWitness, Some(s), "recorded homology differs from the recomputed one");
        }
    }

    if let Some(m) = index_claim(doc.m_free_index) {
        for (i, t) in p.terms.iter().enumerate() {
            let s = plo + i as i64;
            if s <= m && t.rank > 0 && !matches!(t.cert, TermCertificateDoc::Free { .. }) {
                return fail(Clause::FreeIndex, Some(s), format!("claimed free through degree {m}"));
            }
        }
    }
    if let Some(m) = index_claim(doc.m_projective_index) {
        for (i, t) in p.terms.iter().enumerate() {
            let s = plo + i as i64;
            if s <= m && t.rank > 0 && !is_projective(ring, &g, t) {
                return fail(Clause::ProjectiveIndex, Some(s), format!("claimed projective through degree {m}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::resolve::{resolve_trivial, Caps};

    fn c2_doc() -> CertificateDoc {
        let g = catalog::group("C2").unwrap();
        certificate_doc(&resolve_trivial(g, RingSpec::Integers, &Caps::default()).unwrap())
    }

    #[test]
    fn resolution_of_c2_over_z_passes() {
        let r = verify_document(&c2_doc());
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn corrupted_entry_fails() {
        let mut doc = c2_doc();
        let d = &mut doc.complex.differentials[0];
        d.entries[0][0] += 1;
        let r = verify_document(&doc);
        assert!(matches!(r.clause(), Some(Clause::DSquared | Clause::Exactness | Clause::Equivariance)), "{r:?}");
    }

    #[test]
    fn over_claimed_free_index_fails() {
        let mut doc = c2_doc();
        doc.m_free_index = Some(IndexDoc::Degree(5));
        assert_eq!(verify_document(&doc).clause(), Some(Clause::FreeIndex));
    }
}
