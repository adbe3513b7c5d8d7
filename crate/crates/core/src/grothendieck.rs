//! Composition factors, simple modules and the Grothendieck group `G₀(kG)`
//! at desk scale: permutation-module classes and the Cartan quotient.
//!
//! Splitting follows the Holt–Rees form of Norton's criterion: for a random
//! algebra element `A` and an irreducible `f` with `dim ker f(A) = deg f`,
//! the module is irreducible exactly when one vector of `ker f(A)` spins to
//! the whole module and one vector of `ker f(A)ᵀ` spins to the whole dual.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gmodule::{fixed_points, hom_basis, quotient_module, submodule, RGModule};
use crate::group::{Group, Subgroup};
use crate::ring::{invariant_factors, solve_integer, Matrix, RingSpec};

/// Random algebra elements tried before the exhaustive fallback.
pub const MEATAXE_ATTEMPTS: usize = 200;
pub const MEATAXE_RANK_CAP: usize = 64;
/// Largest rank at which every vector is spun when the random search fails.
pub const EXHAUSTIVE_RANK: usize = 8;
/// Random intertwiners tried by [`iso_test`].
pub const ISO_ATTEMPTS: usize = 64;
/// Decomposition attempts per piece of the regular module.
pub const SPLIT_ATTEMPTS: usize = 200;

const MAX_POLY_DEGREE: usize = 4;

/// Row-echelon basis of a subspace of `GF(p)ⁿ`.
struct Echelon {
    ring: RingSpec,
    rows: Vec<(usize, Vec<i64>)>,
}

impl Echelon {
    fn new(ring: RingSpec) -> Echelon {
        Echelon { ring, rows: Vec::new() }
    }

    fn reduce(&self, mut v: Vec<i64>) -> Vec<i64> {
        let r = self.ring;
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x = r.sub(*x, r.mul(c, *y));
                }
            }
        }
        v
    }

    /// Adds `v` if independent; rows are normalized at their pivot.
    fn insert(&mut self, v: Vec<i64>) -> bool {
        let r = self.ring;
        let v = self.reduce(v);
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = r.inv(v[piv]).expect("nonzero in a field");
        let v: Vec<i64> = v.iter().map(|&x| r.mul(x, inv)).collect();
        for (_, row) in &mut self.rows {
            let c = row[piv];
            if c != 0 {
                for (x, y) in row.iter_mut().zip(&v) {
                    *x = r.sub(*x, r.mul(c, *y));
                }
            }
        }
        self.rows.push((piv, v));
        true
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn basis(&self, n: usize) -> Matrix {
        let mut m = Matrix::zeros(self.ring, n, self.rows.len());
        for (j, (_, row)) in self.rows.iter().enumerate() {
            for (i, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }
}

/// The smallest subspace containing `v` and stable under `gens`.
fn spin(gens: &[Matrix], v: Vec<i64>) -> Echelon {
    let ring = gens.first().map_or(RingSpec::PrimeField { p: 2 }, |g| g.ring());
    let mut e = Echelon::new(ring);
    let mut queue = vec![v.clone()];
    e.insert(v);
    while let Some(x) = queue.pop() {
        let col = Matrix::column(ring, &x);
        for g in gens {
            let y = g.mul(&col).col_vec(0);
            if e.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    e
}

/// Monic irreducible polynomials (coefficients from the constant term up)
/// of degree `1..=max_degree`, by trial division.
fn irreducible_polys(p: u32, max_degree: usize) -> Vec<Vec<i64>> {
    let ring = RingSpec::PrimeField { p };
    let mut out: Vec<Vec<i64>> = Vec::new();
    for d in 1..=max_degree {
        let count = (p as usize).pow(d as u32);
        for code in 0..count {
            let mut f = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                f.push((c % p as usize) as i64);
                c /= p as usize;
            }
            f.push(1);
            if out.iter().take_while(|g| 2 * (g.len() - 1) <= d).all(|g| !divides(ring, g, &f)) {
                out.push(f);
            }
        }
    }
    out
}

fn divides(ring: RingSpec, g: &[i64], f: &[i64]) -> bool {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        for (i, &c) in g.iter().enumerate() {
            r[shift + i] = ring.sub(r[shift + i], ring.mul(lead, c));
        }
        r.pop();
    }
    r.iter().all(|&x| x == 0)
}

fn poly_at(f: &[i64], a: &Matrix) -> Matrix {
    let ring = a.ring();
    let n = a.rows();
    let mut r = Matrix::identity(ring, n);
    for &c in f.iter().rev().skip(1) {
        r = r.mul(a).add(&Matrix::identity(ring, n).scale(c));
    }
    r
}

fn random_algebra_element(elems: &[Matrix], ring: RingSpec, rng: &mut ChaCha8Rng) -> Matrix {
    let p = ring.characteristic() as i64;
    let n = elems[0].rows();
    let mut a = Matrix::zeros(ring, n, n);
    for e in elems {
        let c = rng.gen_range(0..p);
        if c != 0 {
            a = a.add(&e.scale(c));
        }
    }
    a
}

enum Split {
    Irreducible,
    /// Columns spanning a proper nonzero submodule.
    Sub(Matrix),
}

fn find_split(m: &RGModule, rng: &mut ChaCha8Rng) -> Result<Split> {
    let ring = m.ring();
    let n = m.rank();
    if n <= 1 {
        return Ok(Split::Irreducible);
    }
    let gens = m.generator_matrices();
    let gens_t: Vec<Matrix> = gens.iter().map(|g| g.transpose()).collect();
    let elems = m.all_element_matrices();
    let polys = irreducible_polys(ring.characteristic(), n.min(MAX_POLY_DEGREE));
    for _ in 0..MEATAXE_ATTEMPTS {
        let a = random_algebra_element(&elems, ring, rng);
        for f in &polys {
            let fa = poly_at(f, &a);
            let ker = fa.kernel()?;
            if ker.cols() == 0 {
                continue;
            }
            let s = spin(&gens, ker.col_vec(0));
            if s.dim() < n {
                return Ok(Split::Sub(s.basis(n)));
            }
            if ker.cols() == f.len() - 1 {
                let kt = fa.transpose().kernel()?;
                let t = spin(&gens_t, kt.col_vec(0));
                if t.dim() < n {
                    // annihilator of a proper invariant subspace of the dual
                    return Ok(Split::Sub(t.basis(n).transpose().kernel()?));
                }
                return Ok(Split::Irreducible);
            }
        }
    }
    let p = ring.characteristic() as u64;
    if n <= EXHAUSTIVE_RANK && p.pow(n as u32) <= 1 << 16 {
        // one vector per line: leading coordinate 1
        for lead in 0..n {
            let free = n - lead - 1;
            for code in 0..p.pow(free as u32) {
                let mut v = vec![0i64; n];
                v[lead] = 1;
                let mut c = code;
                for x in v.iter_mut().skip(lead + 1) {
                    *x = (c % p) as i64;
                    c /= p;
                }
                let s = spin(&gens, v);
                if s.dim() < n {
                    return Ok(Split::Sub(s.basis(n)));
                }
            }
        }
        return Ok(Split::Irreducible);
    }
    Err(Error::Inconclusive(format!("no splitting decision for a module of rank {n}")))
}

fn check_field(m: &RGModule) -> Result<()> {
    if !m.ring().is_field() {
        return Err(Error::NotAField);
    }
    if m.rank() > MEATAXE_RANK_CAP {
        return Err(Error::DimensionCap { rank: m.rank(), cap: MEATAXE_RANK_CAP });
    }
    Ok(())
}

/// Irreducible composition factors, each proved irreducible, in the order
/// of a depth-first walk (submodule before quotient).
pub fn composition_factors(m: &RGModule, seed: u64) -> Result<Vec<RGModule>> {
    check_field(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut stack = vec![m.forget()];
    while let Some(k) = stack.pop() {
        if k.rank() == 0 {
            continue;
        }
        match find_split(&k, &mut rng)? {
            Split::Irreducible => out.push(k),
            Split::Sub(basis) => {
                let (q, _) = quotient_module(&k, &basis)?;
                stack.push(q);
                stack.push(submodule(&k, &basis)?);
            }
        }
    }
    Ok(out)
}

/// Outcome of [`iso_test`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoVerdict {
    /// An invertible intertwiner `M → N`.
    Iso(Matrix),
    /// A reason no isomorphism exists.
    NotIso(String),
    Inconclusive,
}

fn fixed_dims(m: &RGModule, classes: &[Subgroup]) -> Result<Vec<usize>> {
    classes.iter().map(|h| Ok(fixed_points(m, h)?.cols())).collect()
}

/// Compares ranks and fixed-point dimensions over subgroup classes, then
/// looks for an invertible element of `Hom_G(M, N)`: randomly, and by
/// enumeration when the space has at most 4096 elements.
pub fn iso_test(m: &RGModule, n: &RGModule, seed: u64) -> Result<IsoVerdict> {
    let ring = m.ring();
    if !ring.is_field() || n.ring() != ring {
        return Err(Error::NotAField);
    }
    if m.group() != n.group() {
        return Err(Error::RingMismatch("modules over different groups".into()));
    }
    if m.rank() != n.rank() {
        return Ok(IsoVerdict::NotIso(format!("ranks {} and {}", m.rank(), n.rank())));
    }
    let classes = m.group().subgroups(true)?;
    let (dm, dn) = (fixed_dims(m, &classes)?, fixed_dims(n, &classes)?);
    if let Some(i) = (0..classes.len()).find(|&i| dm[i] != dn[i]) {
        return Ok(IsoVerdict::NotIso(format!(
            "fixed points of a subgroup of order {}: dimensions {} and {}",
            classes[i].order(),
            dm[i],
            dn[i]
        )));
    }
    if m.rank() == 0 {
        return Ok(IsoVerdict::Iso(Matrix::zeros(ring, 0, 0)));
    }
    let basis = hom_basis(m, n)?;
    if basis.is_empty() {
        return Ok(IsoVerdict::NotIso("no nonzero intertwiner".into()));
    }
    let p = ring.characteristic() as i64;
    let combine = |coeffs: &[i64]| {
        let mut f = Matrix::zeros(ring, n.rank(), m.rank());
        for (b, &c) in basis.iter().zip(coeffs) {
            if c != 0 {
                f = f.add(&b.scale(c));
            }
        }
        f
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ISO_ATTEMPTS {
        let coeffs: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(0..p)).collect();
        let f = combine(&coeffs);
        if f.is_invertible() {
            return Ok(IsoVerdict::Iso(f));
        }
    }
    let total = (p as u64).checked_pow(basis.len() as u32);
    if total.is_some_and(|t| t <= 4096) {
        for code in 0..total.unwrap() {
            let mut c = code;
            let coeffs: Vec<i64> = (0..basis.len())
                .map(|_| {
                    let x = (c % p as u64) as i64;
                    c /= p as u64;
                    x
                })
                .collect();
            let f = combine(&coeffs);
            if f.is_invertible() {
                return Ok(IsoVerdict::Iso(f));
            }
        }
        return Ok(IsoVerdict::NotIso("no invertible intertwiner (exhaustive)".into()));
    }
    Ok(IsoVerdict::Inconclusive)
}

/// The simple `kG`-modules up to isomorphism, ordered by rank, then by the
/// fixed-point dimensions over subgroup classes, then by discovery order.
/// Run-stable for a given seed; not a global canonical form.
#[derive(Debug, Clone)]
pub struct SimpleBasis {
    pub group: Arc<Group>,
    pub ring: RingSpec,
    pub simples: Vec<RGModule>,
    pub seed: u64,
}

/// Composition multiplicities against a [`SimpleBasis`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct G0Vector {
    pub multiplicities: Vec<i64>,
}

impl G0Vector {
    pub fn is_zero(&self) -> bool {
        self.multiplicities.iter().all(|&x| x == 0)
    }
}

impl SimpleBasis {
    /// Index of the simple isomorphic to `s` (assumed simple).
    pub fn index_of(&self, s: &RGModule) -> Result<usize> {
        for (i, t) in self.simples.iter().enumerate() {
            // Schur: a nonzero map between simples is an isomorphism
            if t.rank() == s.rank() && !hom_basis(s, t)?.is_empty() {
                return Ok(i);
            }
        }
        Err(Error::InvalidCertificate("composition factor matches no simple module".into()))
    }
}

pub fn simples(group: Arc<Group>, ring: RingSpec, seed: u64) -> Result<SimpleBasis> {
    let regular = RGModule::free_module(group.clone(), ring, 1);
    let factors = composition_factors(&regular, seed)?;
    let mut found: Vec<RGModule> = Vec::new();
    for f in factors {
        let mut known = false;
        for t in &found {
            if t.rank() == f.rank() && !hom_basis(&f, t)?.is_empty() {
                known = true;
                break;
            }
        }
        if !known {
            found.push(f);
        }
    }
    let classes = group.subgroups(true)?;
    let mut keyed = found
        .into_iter()
        .map(|s| Ok(((s.rank(), fixed_dims(&s, &classes)?), s)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(SimpleBasis { group, ring, simples: keyed.into_iter().map(|(_, s)| s).collect(), seed })
}

pub fn g0_class(m: &RGModule, basis: &SimpleBasis) -> Result<G0Vector> {
    if m.ring() != basis.ring || **m.group() != *basis.group {
        return Err(Error::RingMismatch("module and simple basis differ".into()));
    }
    let mut multiplicities = vec![0i64; basis.simples.len()];
    for f in composition_factors(m, basis.seed)? {
        multiplicities[basis.index_of(&f)?] += 1;
    }
    Ok(G0Vector { multiplicities })
}

/// Classes of the transitive permutation modules and whether they span `G₀`.
#[derive(Debug, Clone)]
pub struct PpermSpan {
    pub subgroups: Vec<Subgroup>,
    /// Column `j` is the class of `k(G/H_j)`.
    pub lattice: Matrix,
    pub invariant_factors: Vec<BigInt>,
    pub spans: bool,
    /// For each simple `S_i`, integers `x` with `lattice · x = [S_i]`.
    pub witnesses: Option<Matrix>,
}

/// Classes `[k(G/H)]` over subgroup classes and the spanning test by Smith
/// normal form.
pub fn pperm_span(group: Arc<Group>, ring: RingSpec, seed: u64) -> Result<PpermSpan> {
    let basis = simples(group.clone(), ring, seed)?;
    let subgroups = group.subgroups(true)?;
    pperm_span_over(&basis, subgroups)
}

/// [`pperm_span`] for a given basis and list of subgroups.
pub fn pperm_span_over(basis: &SimpleBasis, subgroups: Vec<Subgroup>) -> Result<PpermSpan> {
    let n = basis.simples.len();
    let mut lattice = Matrix::zeros(RingSpec::Integers, n, subgroups.len());
    for (j, h) in subgroups.iter().enumerate() {
        let (_, set) = basis.group.coset_action(h)?;
        let m = RGModule::linearize(basis.group.clone(), &set, basis.ring)?;
        for (i, &c) in g0_class(&m, basis)?.multiplicities.iter().enumerate() {
            lattice.set(i, j, c);
        }
    }
    let factors = invariant_factors(&lattice);
    let spans = factors.len() == n && factors.iter().all(|d| d.is_one());
    let witnesses = if spans { solve_integer(&lattice, &Matrix::identity(RingSpec::Integers, n))? } else { None };
    Ok(PpermSpan { subgroups, lattice, invariant_factors: factors, spans, witnesses })
}

/// The Cartan matrix and the invariant factors of `G₀ / ℙ`.
#[derive(Debug, Clone)]
pub struct CartanReport {
    /// Column `j` is the class of the projective cover of simple `j`.
    pub cartan: Matrix,
    /// Invariant factors of the quotient other than 1.
    pub quotient: Vec<BigInt>,
}

/// Number of simple quotients of `p`, counted with `dim End(S)` weights.
fn top_count(p: &RGModule, basis: &SimpleBasis, ends: &[usize]) -> Result<usize> {
    let mut total = 0;
    for (s, &e) in basis.simples.iter().zip(ends) {
        total += hom_basis(p, s)?.len() / e;
    }
    Ok(total)
}

/// Splits `kG` into indecomposable projectives by Fitting decompositions of
/// random endomorphisms; a piece is indecomposable once it has a single
/// simple quotient.
pub fn projective_indecomposables(basis: &SimpleBasis, seed: u64) -> Result<Vec<RGModule>> {
    let ends = basis.simples.iter().map(|s| Ok(hom_basis(s, s)?.len())).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = Vec::new();
    let mut queue = vec![RGModule::free_module(basis.group.clone(), basis.ring, 1)];
    let p = basis.ring.characteristic() as i64;
    while let Some(piece) = queue.pop() {
        if top_count(&piece, basis, &ends)? == 1 {
            done.push(piece);
            continue;
        }
        let endo = hom_basis(&piece, &piece)?;
        let n = piece.rank();
        let mut split = None;
        for _ in 0..SPLIT_ATTEMPTS {
            let mut a = Matrix::zeros(basis.ring, n, n);
            for b in &endo {
                let c = rng.gen_range(0..p);
                if c != 0 {
                    a = a.add(&b.scale(c));
                }
            }
            let mut pow = a;
            let mut k = 1;
            while k < n {
                pow = pow.mul(&pow);
                k *= 2;
            }
            let r = pow.rank();
            if r > 0 && r < n {
                split = Some((pow.column_space()?, pow.kernel()?));
                break;
            }
        }
        let (im, ker) = split.ok_or_else(|| {
            Error::Inconclusive(format!("no idempotent found splitting a projective of rank {n}"))
        })?;
        queue.push(submodule(&piece, &ker)?);
        queue.push(submodule(&piece, &im)?);
    }
    Ok(done)
}

pub fn cartan_quotient(group: Arc<Group>, ring: RingSpec, seed: u64) -> Result<CartanReport> {
    let basis = simples(group, ring, seed)?;
    cartan_over(&basis, seed)
}

pub fn cartan_over(basis: &SimpleBasis, seed: u64) -> Result<CartanReport> {
    let pims = projective_indecomposables(basis, seed)?;
    let n = basis.simples.len();
    let mut cartan = Matrix::zeros(RingSpec::Integers, n, n);
    for (j, s) in basis.simples.iter().enumerate() {
        let mut cover = None;
        for p in &pims {
            if !hom_basis(p, s)?.is_empty() {
                cover = Some(p);
                break;
            }
        }
        let cover = cover.ok_or_else(|| Error::Inconclusive("a simple module has no projective cover among the pieces".into()))?;
        for (i, &c) in g0_class(cover, basis)?.multiplicities.iter().enumerate() {
            cartan.set(i, j, c);
        }
    }
    let factors = invariant_factors(&cartan);
    if factors.len() != n {
        return Err(Error::Stage { stage: "cartan".into(), reason: "Cartan matrix is singular".into() });
    }
    Ok(CartanReport { cartan, quotient: factors.into_iter().filter(|d| !d.is_one()).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn f(p: u32) -> RingSpec {
        RingSpec::gf(p).unwrap()
    }

    #[test]
    fn polys_over_gf2() {
        let ps = irreducible_polys(2, 3);
        // x, x+1, x²+x+1, x³+x+1, x³+x²+1
        assert_eq!(ps.len(), 5);
    }

    #[test]
    fn regular_c2_factors() {
        let g = catalog::group("C2").unwrap();
        let fs = composition_factors(&RGModule::free_module(g, f(2), 1), 0).unwrap();
        assert_eq!(fs.iter().map(|m| m.rank()).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn regular_s3_factors_over_gf2() {
        let g = catalog::group("S3").unwrap();
        let fs = composition_factors(&RGModule::free_module(g, f(2), 1), 0).unwrap();
        let mut ranks: Vec<usize> = fs.iter().map(|m| m.rank()).collect();
        ranks.sort();
        assert_eq!(ranks, vec![1, 1, 2, 2]);
    }

    #[test]
    fn simples_of_s3() {
        let g = catalog::group("S3").unwrap();
        let b2 = simples(g.clone(), f(2), 0).unwrap();
        assert_eq!(b2.simples.iter().map(|m| m.rank()).collect::<Vec<_>>(), vec![1, 2]);
        let b3 = simples(g, f(3), 0).unwrap();
        assert_eq!(b3.simples.iter().map(|m| m.rank()).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn coset_class_of_s3_over_gf2() {
        let g = catalog::group("S3").unwrap();
        let b = simples(g.clone(), f(2), 0).unwrap();
        let c2 = g.subgroups(true).unwrap().into_iter().find(|h| h.order() == 2).unwrap();
        let (_, set) = g.coset_action(&c2).unwrap();
        let m = RGModule::linearize(g, &set, f(2)).unwrap();
        assert_eq!(g0_class(&m, &b).unwrap().multiplicities, vec![1, 1]);
    }

    #[test]
    fn sign_is_not_trivial_over_gf3() {
        let g = catalog::group("C2").unwrap();
        let k = RGModule::trivial(g.clone(), f(3), 1);
        let l = RGModule::sign_module(g.clone(), f(3), &g.trivial_subgroup()).unwrap();
        assert!(matches!(iso_test(&k, &l, 0).unwrap(), IsoVerdict::NotIso(_)));
    }

    #[test]
    fn cartan_small() {
        let c2 = cartan_quotient(catalog::group("C2").unwrap(), f(2), 0).unwrap();
        assert_eq!(c2.quotient, vec![BigInt::from(2)]);
        let c3 = cartan_quotient(catalog::group("C3").unwrap(), f(3), 0).unwrap();
        assert_eq!(c3.quotient, vec![BigInt::from(3)]);
    }
}
