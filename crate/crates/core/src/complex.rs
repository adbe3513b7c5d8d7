//! Bounded chain complexes of RG-modules in homological grading.
//!
//! `d_s: C_s → C_{s−1}`. Cones use `cone(f)_s = Y_s ⊕ X_{s−1}` with
//! differential `(d_Y, f; 0, −d_X)`. Tensor products order the blocks of
//! degree `s` by decreasing first degree `a` and carry the sign `(−1)^a` on
//! the second factor's differential.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::gmodule::{self, direct_sum, hom_basis, is_equivariant, lift_equivariant, tensor, RGModule};
use crate::group::Group;
use crate::ring::{invariant_factors, Matrix, RingSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    group: Arc<Group>,
    ring: RingSpec,
    lo: i64,
    terms: Vec<RGModule>,
    /// `diffs[i] = d_{lo+i+1}`
    diffs: Vec<Matrix>,
}

/// Result of [`ChainComplex::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub kinds: Vec<(i64, &'static str)>,
    /// Largest `m` with every term in degrees `≤ m` free; `None` when even
    /// the lowest nonzero term is not free. Unbounded when all terms are free.
    pub free_index: Option<i64>,
}

/// Homology in one degree: rank (dimension over a field) and torsion
/// coefficients over `ℤ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyGroup {
    pub degree: i64,
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyReport {
    pub ring: RingSpec,
    pub groups: Vec<HomologyGroup>,
}

impl HomologyReport {
    pub fn at(&self, degree: i64) -> Option<&HomologyGroup> {
        self.groups.iter().find(|h| h.degree == degree)
    }
    pub fn is_zero(&self) -> bool {
        self.groups.iter().all(|h| h.is_zero())
    }
    /// Zero in every degree except possibly `degree`.
    pub fn concentrated_in(&self, degree: i64) -> bool {
        self.groups.iter().all(|h| h.degree == degree || h.is_zero())
    }
}

impl ChainComplex {
    /// Builds a complex, checking shapes, equivariance and `d² = 0`.
    pub fn new(
        group: Arc<Group>,
        ring: RingSpec,
        lo: i64,
        terms: Vec<RGModule>,
        diffs: Vec<Matrix>,
    ) -> Result<ChainComplex> {
        let c = ChainComplex { group, ring, lo, terms, diffs };
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn new_unchecked(
        group: Arc<Group>,
        ring: RingSpec,
        lo: i64,
        terms: Vec<RGModule>,
        diffs: Vec<Matrix>,
    ) -> ChainComplex {
        ChainComplex { group, ring, lo, terms, diffs }
    }

    pub fn zero(group: Arc<Group>, ring: RingSpec) -> ChainComplex {
        ChainComplex { group, ring, lo: 0, terms: Vec::new(), diffs: Vec::new() }
    }

    /// A module placed in a single degree.
    pub fn single(m: RGModule, degree: i64) -> ChainComplex {
        ChainComplex { group: m.group().clone(), ring: m.ring(), lo: degree, terms: vec![m], diffs: Vec::new() }
    }

    /// Two-term complex `source → target` with `target` in degree `degree`.
    pub fn two_term(source: RGModule, target: RGModule, d: Matrix, degree: i64) -> Result<ChainComplex> {
        ChainComplex::new(source.group().clone(), source.ring(), degree, vec![target, source], vec![d])
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }
    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    /// Top degree; `lo − 1` for the empty complex.
    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }
    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }
    pub fn terms(&self) -> &[RGModule] {
        &self.terms
    }
    pub fn differentials(&self) -> &[Matrix] {
        &self.diffs
    }

    pub fn term(&self, s: i64) -> RGModule {
        if s < self.lo || s > self.hi() {
            RGModule::zero(self.group.clone(), self.ring)
        } else {
            self.terms[(s - self.lo) as usize].clone()
        }
    }

    pub fn term_ref(&self, s: i64) -> Option<&RGModule> {
        if s < self.lo || s > self.hi() {
            None
        } else {
            Some(&self.terms[(s - self.lo) as usize])
        }
    }

    pub fn rank(&self, s: i64) -> usize {
        self.term_ref(s).map_or(0, |m| m.rank())
    }

    /// `d_s: C_s → C_{s−1}` (a zero matrix outside the stored range).
    pub fn d(&self, s: i64) -> Matrix {
        if s > self.lo && s <= self.hi() {
            self.diffs[(s - self.lo - 1) as usize].clone()
        } else {
            Matrix::zeros(self.ring, self.rank(s - 1), self.rank(s))
        }
    }

    /// Term ranks from degree `lo` upwards.
    pub fn ranks(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.rank()).collect()
    }

    /// Same complex with zero terms dropped from both ends.
    pub fn trimmed(&self) -> ChainComplex {
        let first = self.terms.iter().position(|t| t.rank() > 0);
        let Some(first) = first else { return ChainComplex::zero(self.group.clone(), self.ring) };
        let last = self.terms.iter().rposition(|t| t.rank() > 0).unwrap();
        ChainComplex {
            group: self.group.clone(),
            ring: self.ring,
            lo: self.lo + first as i64,
            terms: self.terms[first..=last].to_vec(),
            diffs: self.diffs[first..last].to_vec(),
        }
    }

    /// Extends the stored range with zero terms to cover `[lo, hi]`.
    pub fn padded(&self, lo: i64, hi: i64) -> ChainComplex {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        let terms: Vec<RGModule> = (lo..=hi).map(|s| self.term(s)).collect();
        let diffs = (lo + 1..=hi).map(|s| self.d(s)).collect();
        ChainComplex { group: self.group.clone(), ring: self.ring, lo, terms, diffs }
    }

    /// Checks shapes, equivariance of every differential and `d² = 0`,
    /// reporting the first failing degree.
    pub fn validate(&self) -> Result<ValidationReport> {
        if self.diffs.len() + 1 != self.terms.len() && !(self.terms.is_empty() && self.diffs.is_empty()) {
            return Err(Error::Complex { degree: self.lo, reason: "differential count".into() });
        }
        for (i, t) in self.terms.iter().enumerate() {
            let s = self.lo + i as i64;
            if t.ring() != self.ring || **t.group() != *self.group {
                return Err(Error::Complex { degree: s, reason: "term over another ring or group".into() });
            }
        }
        for s in self.lo + 1..=self.hi() {
            let d = &self.diffs[(s - self.lo - 1) as usize];
            let (src, tgt) = (self.term_ref(s).unwrap(), self.term_ref(s - 1).unwrap());
            if d.shape() != (tgt.rank(), src.rank()) {
                return Err(Error::Complex { degree: s, reason: format!("differential shape {:?}", d.shape()) });
            }
            if !is_equivariant(src, tgt, d) {
                return Err(Error::Complex { degree: s, reason: "differential not equivariant".into() });
            }
            if s - 1 > self.lo {
                let prev = &self.diffs[(s - self.lo - 2) as usize];
                if !prev.mul(d).is_zero() {
                    return Err(Error::Complex { degree: s, reason: "d∘d ≠ 0".into() });
                }
            }
        }
        let kinds = self.degrees().map(|s| (s, self.term_ref(s).unwrap().certificate().kind())).collect();
        Ok(ValidationReport { kinds, free_index: self.free_index() })
    }

    /// Largest `m` with all nonzero terms in degrees `≤ m` certified free.
    pub fn free_index(&self) -> Option<i64> {
        self.index_by(|t| t.is_free_certified())
    }

    /// Largest `m` with all nonzero terms in degrees `≤ m` certified projective.
    pub fn projective_index(&self) -> Option<i64> {
        self.index_by(|t| t.is_projective_certified())
    }

    fn index_by(&self, ok: impl Fn(&RGModule) -> bool) -> Option<i64> {
        let mut last = None;
        for s in self.degrees() {
            let t = self.term_ref(s).unwrap();
            if t.rank() > 0 && !ok(t) {
                return last;
            }
            last = Some(s);
        }
        Some(i64::MAX)
    }

    /// Homology from exact rank data: RREF over fields, Smith normal form over `ℤ`.
    pub fn homology(&self) -> HomologyReport {
        let ranks: Vec<(usize, Vec<BigInt>)> = (self.lo..=self.hi() + 1)
            .map(|s| {
                let d = self.d(s);
                if d.rows() == 0 || d.cols() == 0 {
                    (0, Vec::new())
                } else if self.ring.is_field() {
                    (d.rank(), Vec::new())
                } else {
                    let f = invariant_factors(&d);
                    (f.len(), f.into_iter().filter(|x| !x.is_one()).collect())
                }
            })
            .collect();
        let groups = self
            .degrees()
            .map(|s| {
                let i = (s - self.lo) as usize;
                let rank_out = ranks[i].0;
                let (rank_in, torsion) = &ranks[i + 1];
                HomologyGroup { degree: s, rank: self.rank(s) - rank_out - rank_in, torsion: torsion.clone() }
            })
            .collect();
        HomologyReport { ring: self.ring, groups }
    }

    pub fn is_acyclic(&self) -> bool {
        self.homology().is_zero()
    }

    /// `C[k]`: the term in degree `s` moves to `s + k`; differentials pick up `(−1)^k`.
    pub fn shift(&self, k: i64) -> ChainComplex {
        let sign = if k.rem_euclid(2) == 1 { -1 } else { 1 };
        ChainComplex {
            group: self.group.clone(),
            ring: self.ring,
            lo: self.lo + k,
            terms: self.terms.clone(),
            diffs: self.diffs.iter().map(|d| d.scale(sign)).collect(),
        }
    }

    /// Conjugates degree `s` by an invertible change of basis: the new term is
    /// `module` with `t: new → old` and `t_inv: old → new`.
    pub fn replace_term(&mut self, s: i64, module: RGModule, t: &Matrix, t_inv: &Matrix) {
        let i = (s - self.lo) as usize;
        if s > self.lo {
            self.diffs[i - 1] = self.diffs[i - 1].mul(t);
        }
        if s < self.hi() {
            self.diffs[i] = t_inv.mul(&self.diffs[i]);
        }
        self.terms[i] = module;
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<RGModule>, &mut Vec<Matrix>) {
        (&mut self.terms, &mut self.diffs)
    }

    /// Tensor with a module placed in degree 0.
    pub fn tensor_module(&self, m: &RGModule) -> Result<ChainComplex> {
        tensor_complexes(self, &ChainComplex::single(m.clone(), 0))
    }
}

/// A degree-preserving chain map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    /// Components for the source degrees `lo..=hi`.
    comps: Vec<Matrix>,
}

impl ChainMap {
    pub fn new(source: ChainComplex, target: ChainComplex, comps: Vec<Matrix>) -> Result<ChainMap> {
        let f = ChainMap { source, target, comps };
        f.validate()?;
        Ok(f)
    }

    pub(crate) fn new_unchecked(source: ChainComplex, target: ChainComplex, comps: Vec<Matrix>) -> ChainMap {
        ChainMap { source, target, comps }
    }

    /// Builds from a closure giving `f_s` for each source degree.
    pub fn from_fn(
        source: &ChainComplex,
        target: &ChainComplex,
        mut f: impl FnMut(i64) -> Matrix,
    ) -> ChainMap {
        let comps = source.degrees().map(&mut f).collect();
        ChainMap { source: source.clone(), target: target.clone(), comps }
    }

    pub fn identity(c: &ChainComplex) -> ChainMap {
        ChainMap::from_fn(c, c, |s| Matrix::identity(c.ring, c.rank(s)))
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex) -> ChainMap {
        ChainMap::from_fn(source, target, |s| Matrix::zeros(source.ring, target.rank(s), source.rank(s)))
    }

    pub fn comp(&self, s: i64) -> Matrix {
        if s >= self.source.lo && s <= self.source.hi() {
            self.comps[(s - self.source.lo) as usize].clone()
        } else {
            Matrix::zeros(self.source.ring, self.target.rank(s), self.source.rank(s))
        }
    }

    /// Checks shapes, equivariance and `d f = f d` degreewise.
    pub fn validate(&self) -> Result<()> {
        let (x, y) = (&self.source, &self.target);
        if x.ring != y.ring || *x.group != *y.group {
            return Err(Error::RingMismatch("chain map between different rings or groups".into()));
        }
        for s in x.lo..=x.hi() + 1 {
            let f = self.comp(s);
            if f.shape() != (y.rank(s), x.rank(s)) {
                return Err(Error::Complex { degree: s, reason: "chain map component shape".into() });
            }
            if !is_equivariant(&x.term(s), &y.term(s), &f) {
                return Err(Error::Complex { degree: s, reason: "chain map not equivariant".into() });
            }
            if y.d(s).mul(&f) != self.comp(s - 1).mul(&x.d(s)) {
                return Err(Error::Complex { degree: s, reason: "chain map does not commute with d".into() });
            }
        }
        Ok(())
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &ChainMap) -> ChainMap {
        ChainMap::from_fn(&g.source, &self.target, |s| self.comp(s).mul(&g.comp(s)))
    }

    pub fn sub(&self, g: &ChainMap) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |s| self.comp(s).sub(&g.comp(s)))
    }

    pub fn scale(&self, c: i64) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |s| self.comp(s).scale(c))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    /// Quasi-isomorphism test: the cone is acyclic.
    pub fn is_quasi_isomorphism(&self) -> bool {
        cone(self).is_acyclic()
    }
}

/// Maps `h_s: X_s → Y_{s+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homotopy {
    pub comps: Vec<(i64, Matrix)>,
}

impl Homotopy {
    pub fn comp(&self, s: i64, ring: RingSpec, rows: usize, cols: usize) -> Matrix {
        self.comps
            .iter()
            .find(|(d, _)| *d == s)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| Matrix::zeros(ring, rows, cols))
    }
}

/// `f − g = d∘h + h∘d` in every degree.
pub fn is_homotopy(f: &ChainMap, g: &ChainMap, h: &Homotopy) -> bool {
    let (x, y) = (&f.source, &f.target);
    let ring = x.ring;
    let lo = x.lo.min(y.lo) - 1;
    let hi = x.hi().max(y.hi()) + 1;
    (lo..=hi).all(|s| {
        let hs = h.comp(s, ring, y.rank(s + 1), x.rank(s));
        let hs1 = h.comp(s - 1, ring, y.rank(s), x.rank(s - 1));
        let lhs = f.comp(s).sub(&g.comp(s));
        let rhs = y.d(s + 1).mul(&hs).add(&hs1.mul(&x.d(s)));
        lhs == rhs
    })
}

/// Builds a block matrix from `(row_block, col_block, matrix)` entries.
pub(crate) fn assemble(ring: RingSpec, row_sizes: &[usize], col_sizes: &[usize], blocks: &[(usize, usize, Matrix)]) -> Matrix {
    let row_off: Vec<usize> = row_sizes.iter().scan(0, |a, &x| { let o = *a; *a += x; Some(o) }).collect();
    let col_off: Vec<usize> = col_sizes.iter().scan(0, |a, &x| { let o = *a; *a += x; Some(o) }).collect();
    let mut m = Matrix::zeros(ring, row_sizes.iter().sum(), col_sizes.iter().sum());
    for (r, c, b) in blocks {
        if b.rows() > 0 && b.cols() > 0 {
            m.set_block(row_off[*r], col_off[*c], b);
        }
    }
    m
}

/// Mapping cone of `f: X → Y`.
pub fn cone(f: &ChainMap) -> ChainComplex {
    let (x, y) = (&f.source, &f.target);
    let ring = x.ring;
    let lo = y.lo.min(x.lo + 1);
    let hi = y.hi().max(x.hi() + 1);
    let terms: Vec<RGModule> =
        (lo..=hi).map(|s| direct_sum(&y.term(s), &x.term(s - 1)).expect("same ring and group")).collect();
    let diffs = (lo + 1..=hi)
        .map(|s| {
            assemble(
                ring,
                &[y.rank(s - 1), x.rank(s - 2)],
                &[y.rank(s), x.rank(s - 1)],
                &[(0, 0, y.d(s)), (0, 1, f.comp(s - 1)), (1, 1, x.d(s - 1).neg())],
            )
        })
        .collect();
    ChainComplex::new_unchecked(x.group.clone(), ring, lo, terms, diffs)
}

/// Canonical inclusion `Y → cone(f)` and projection `cone(f) → X[1]`.
pub fn cone_maps(f: &ChainMap) -> (ChainMap, ChainMap) {
    let c = cone(f);
    let (x, y) = (&f.source, &f.target);
    let ring = x.ring;
    let incl = ChainMap::from_fn(y, &c, |s| {
        assemble(ring, &[y.rank(s), x.rank(s - 1)], &[y.rank(s)], &[(0, 0, Matrix::identity(ring, y.rank(s)))])
    });
    let xs = x.shift(1);
    let proj = ChainMap::from_fn(&c, &xs, |s| {
        assemble(ring, &[x.rank(s - 1)], &[y.rank(s), x.rank(s - 1)], &[(0, 1, Matrix::identity(ring, x.rank(s - 1)))])
    });
    (incl, proj)
}

/// Direct sum of complexes.
pub fn direct_sum_complexes(a: &ChainComplex, b: &ChainComplex) -> Result<ChainComplex> {
    let ring = a.ring;
    let lo = a.lo.min(b.lo);
    let hi = a.hi().max(b.hi());
    let terms = (lo..=hi).map(|s| direct_sum(&a.term(s), &b.term(s))).collect::<Result<Vec<_>>>()?;
    let diffs = (lo + 1..=hi).map(|s| a.d(s).block_diag(&b.d(s))).collect();
    let _ = ring;
    Ok(ChainComplex::new_unchecked(a.group.clone(), a.ring, lo, terms, diffs))
}

/// Index pairs `(a, b)` with `a + b = s` in block order (decreasing `a`).
pub fn tensor_blocks(c: &ChainComplex, d: &ChainComplex, s: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let mut a = c.hi();
    while a >= c.lo {
        let b = s - a;
        if b >= d.lo && b <= d.hi() {
            out.push((a, b));
        }
        a -= 1;
    }
    out
}

/// `C ⊗ D` with the diagonal action and the Koszul sign rule.
pub fn tensor_complexes(c: &ChainComplex, d: &ChainComplex) -> Result<ChainComplex> {
    if c.ring != d.ring {
        return Err(Error::RingMismatch(format!("{} vs {}", c.ring, d.ring)));
    }
    let ring = c.ring;
    if c.terms.is_empty() || d.terms.is_empty() {
        return Ok(ChainComplex::zero(c.group.clone(), ring));
    }
    let lo = c.lo + d.lo;
    let hi = c.hi() + d.hi();
    let mut terms = Vec::new();
    for s in lo..=hi {
        let mut acc = RGModule::zero(c.group.clone(), ring);
        for (a, b) in tensor_blocks(c, d, s) {
            acc = direct_sum(&acc, &tensor(&c.term(a), &d.term(b))?)?;
        }
        terms.push(acc);
    }
    let mut diffs = Vec::new();
    for s in lo + 1..=hi {
        let src = tensor_blocks(c, d, s);
        let tgt = tensor_blocks(c, d, s - 1);
        let rs: Vec<usize> = tgt.iter().map(|&(a, b)| c.rank(a) * d.rank(b)).collect();
        let cs: Vec<usize> = src.iter().map(|&(a, b)| c.rank(a) * d.rank(b)).collect();
        let mut blocks = Vec::new();
        for (j, &(a, b)) in src.iter().enumerate() {
            if let Some(i) = tgt.iter().position(|&t| t == (a - 1, b)) {
                blocks.push((i, j, c.d(a).kron(&Matrix::identity(ring, d.rank(b)))));
            }
            if let Some(i) = tgt.iter().position(|&t| t == (a, b - 1)) {
                let sign = if a.rem_euclid(2) == 1 { -1 } else { 1 };
                blocks.push((i, j, Matrix::identity(ring, c.rank(a)).kron(&d.d(b)).scale(sign)));
            }
        }
        diffs.push(assemble(ring, &rs, &cs, &blocks));
    }
    Ok(ChainComplex::new_unchecked(c.group.clone(), ring, lo, terms, diffs))
}

/// `f ⊗ g: C ⊗ D → C' ⊗ D'`, blockwise `f_a ⊗ g_b`.
pub fn tensor_maps(f: &ChainMap, g: &ChainMap) -> Result<ChainMap> {
    let src = tensor_complexes(&f.source, &g.source)?;
    let tgt = tensor_complexes(&f.target, &g.target)?;
    let ring = src.ring;
    let (c, d, c2, d2) = (&f.source, &g.source, &f.target, &g.target);
    Ok(ChainMap::from_fn(&src, &tgt, |s| {
        let sb = tensor_blocks(c, d, s);
        let tb = tensor_blocks(c2, d2, s);
        let rs: Vec<usize> = tb.iter().map(|&(a, b)| c2.rank(a) * d2.rank(b)).collect();
        let cs: Vec<usize> = sb.iter().map(|&(a, b)| c.rank(a) * d.rank(b)).collect();
        let mut blocks = Vec::new();
        for (j, &(a, b)) in sb.iter().enumerate() {
            if let Some(i) = tb.iter().position(|&t| t == (a, b)) {
                blocks.push((i, j, f.comp(a).kron(&g.comp(b))));
            }
        }
        assemble(ring, &rs, &cs, &blocks)
    }))
}

/// The swap `C ⊗ D → D ⊗ C`, `x ⊗ y ↦ (−1)^{ab} y ⊗ x`.
pub fn swap_map(c: &ChainComplex, d: &ChainComplex) -> Result<ChainMap> {
    let src = tensor_complexes(c, d)?;
    let tgt = tensor_complexes(d, c)?;
    let ring = c.ring;
    Ok(ChainMap::from_fn(&src, &tgt, |s| {
        let sb = tensor_blocks(c, d, s);
        let tb = tensor_blocks(d, c, s);
        let rs: Vec<usize> = tb.iter().map(|&(b, a)| d.rank(b) * c.rank(a)).collect();
        let cs: Vec<usize> = sb.iter().map(|&(a, b)| c.rank(a) * d.rank(b)).collect();
        let mut blocks = Vec::new();
        for (j, &(a, b)) in sb.iter().enumerate() {
            let i = tb.iter().position(|&t| t == (b, a)).unwrap();
            let (ra, rb) = (c.rank(a), d.rank(b));
            let mut m = Matrix::zeros(ring, rb * ra, ra * rb);
            let sign = if (a * b).rem_euclid(2) == 1 { -1 } else { 1 };
            for x in 0..ra {
                for y in 0..rb {
                    m.set(y * ra + x, x * rb + y, sign);
                }
            }
            blocks.push((i, j, m));
        }
        assemble(ring, &rs, &cs, &blocks)
    }))
}

/// Equivariant sections `σ_j: P_j → P_{j+1}` for `j < n` with
/// `dσ + σd = 1` on `P_j` (`j < n`) and `σ² = 0`. Requires `P` exact in
/// degrees `< n` and projective-certified terms there.
fn contracting_sections(p: &ChainComplex, n: i64) -> Result<Vec<(i64, Matrix)>> {
    let ring = p.ring;
    let mut sig: Vec<(i64, Matrix)> = Vec::new();
    for j in p.lo..n {
        let pj = p.term(j);
        // want d_{j+1} σ_j = 1 − σ_{j−1} d_j
        let prev = match sig.last() {
            Some((d, m)) if *d == j - 1 => m.clone(),
            _ => Matrix::zeros(ring, p.rank(j), p.rank(j - 1)),
        };
        let rhs = Matrix::identity(ring, pj.rank()).sub(&prev.mul(&p.d(j)));
        let s = lift_equivariant(&pj, &p.term(j + 1), &p.d(j + 1), &rhs)?
            .ok_or(Error::Hypothesis { degree: j, reason: "tail is not split exact".into() })?;
        sig.push((j, s));
    }
    // σ' = σ d σ squares to zero and still contracts
    let refined = sig.iter().map(|(j, s)| (*j, s.mul(&p.d(j + 1)).mul(s))).collect();
    Ok(refined)
}

/// Replaces a complex that is exact below `n`, with projective terms there,
/// by one with no terms below `n`, together with a quasi-isomorphism to the
/// input. The negative tail is folded into degrees `n` and `n + 1` using a
/// contraction `σ` of the tail: degree `n` becomes `P_n ⊕ P_{n−2} ⊕ …` and
/// degree `n+1` becomes `P_{n+1} ⊕ P_{n−1} ⊕ …`, with the new differential
/// on the folded part `σ + d`. When `d_n` is injective the tail simply
/// splits off and degree `n` is dropped.
pub fn normalize_zero_free(p: &ChainComplex, n: i64) -> Result<(ChainComplex, ChainMap)> {
    let ring = p.ring;
    let h = p.homology();
    for g in &h.groups {
        if g.degree < n && !g.is_zero() {
            return Err(Error::Hypothesis { degree: g.degree, reason: "homology below n".into() });
        }
    }
    for s in p.lo..n {
        let t = p.term(s);
        let ok = if ring.is_field() { t.is_projective_certified() } else { t.is_free_certified() };
        if t.rank() > 0 && !ok {
            return Err(Error::Hypothesis { degree: s, reason: "term below n not certified projective".into() });
        }
    }
    if (p.lo..n).all(|s| p.rank(s) == 0) {
        let top = p.hi().max(n);
        let q = ChainComplex::new_unchecked(
            p.group.clone(),
            ring,
            n,
            (n..=top).map(|s| p.term(s)).collect(),
            (n + 1..=top).map(|s| p.d(s)).collect(),
        );
        let f = ChainMap::from_fn(&q, p, |s| Matrix::identity(ring, p.rank(s)));
        return Ok((q, f));
    }
    let hi = p.hi().max(n + 1);
    if p.d(n).rank() == p.rank(n) {
        // d_n injective: H_n = 0 and P_{≥n+1} → 0 is quasi-isomorphic
        let top: Vec<RGModule> = (n..=hi).map(|s| if s == n { RGModule::zero(p.group.clone(), ring) } else { p.term(s) }).collect();
        let diffs = (n + 1..=hi).map(|s| if s == n + 1 { Matrix::zeros(ring, 0, p.rank(s)) } else { p.d(s) }).collect();
        let q = ChainComplex::new_unchecked(p.group.clone(), ring, n, top, diffs);
        let f = ChainMap::from_fn(&q, p, |s| {
            if s == n {
                Matrix::zeros(ring, p.rank(n), 0)
            } else {
                Matrix::identity(ring, p.rank(s))
            }
        });
        return Ok((q, f));
    }
    let sig = contracting_sections(p, n)?;
    let sigma = |j: i64| -> Matrix {
        sig.iter().find(|(d, _)| *d == j).map(|(_, m)| m.clone()).unwrap_or_else(|| Matrix::zeros(ring, p.rank(j + 1), p.rank(j)))
    };
    let evens: Vec<i64> = (p.lo..n).rev().filter(|j| (n - j) % 2 == 0).collect();
    let odds: Vec<i64> = (p.lo..n).rev().filter(|j| (n - j) % 2 == 1).collect();
    let mut new0 = p.term(n);
    for &j in &evens {
        new0 = direct_sum(&new0, &p.term(j))?;
    }
    let mut new1 = p.term(n + 1);
    for &j in &odds {
        new1 = direct_sum(&new1, &p.term(j))?;
    }
    let rows0: Vec<i64> = std::iter::once(n).chain(evens.iter().copied()).collect();
    let cols1: Vec<i64> = std::iter::once(n + 1).chain(odds.iter().copied()).collect();
    let rs: Vec<usize> = rows0.iter().map(|&j| p.rank(j)).collect();
    let cs: Vec<usize> = cols1.iter().map(|&j| p.rank(j)).collect();
    let mut blocks = vec![(0usize, 0usize, p.d(n + 1))];
    for (cj, &o) in cols1.iter().enumerate().skip(1) {
        // ψ = σ + d on the odd tail term o: σ_o lands in degree o+1, d in o−1
        if let Some(ri) = rows0.iter().position(|&r| r == o + 1) {
            blocks.push((ri, cj, sigma(o)));
        }
        if let Some(ri) = rows0.iter().position(|&r| r == o - 1) {
            blocks.push((ri, cj, p.d(o)));
        }
    }
    let d1 = assemble(ring, &rs, &cs, &blocks);
    let d2 = assemble(ring, &cs, &[p.rank(n + 2)], &[(0, 0, p.d(n + 2))]);
    let mut terms = vec![new0, new1];
    let mut diffs = vec![d1, d2];
    for s in n + 2..=hi {
        terms.push(p.term(s));
        if s > n + 2 {
            diffs.push(p.d(s));
        }
    }
    if hi < n + 2 {
        diffs.pop();
    }
    let q = ChainComplex::new_unchecked(p.group.clone(), ring, n, terms, diffs);
    // f_n = (1 − σ_{n−1} d_n, 0), f_{n+1} = projection, identity above
    let f0 = Matrix::identity(ring, p.rank(n)).sub(&sigma(n - 1).mul(&p.d(n)));
    let f = ChainMap::from_fn(&q, p, |s| {
        if s == n {
            assemble(ring, &[p.rank(n)], &rs, &[(0, 0, f0.clone())])
        } else if s == n + 1 {
            assemble(ring, &[p.rank(n + 1)], &cs, &[(0, 0, Matrix::identity(ring, p.rank(n + 1)))])
        } else {
            Matrix::identity(ring, p.rank(s))
        }
    });
    Ok((q, f))
}

/// Given `f: P → X` and a quasi-isomorphism `s: Y → X` with `X`, `Y` zero
/// above `m` and `P` projective in degrees `≤ m`, builds `f̂: P → Y` and a
/// homotopy `h` with `s∘f̂ − f = d h + h d`.
///
/// A null-homotopy `k` of `P → cone(s)` is built degree by degree; its
/// `Y`-component is `f̂` and its `X`-component is `−h`.
pub fn lift_through_quasi_iso(f: &ChainMap, s: &ChainMap, m: i64) -> Result<(ChainMap, Homotopy)> {
    let ring = f.source.ring;
    if !ring.is_field() {
        return Err(Error::UnsupportedRing("lift_through_quasi_iso"));
    }
    let (p, x, y) = (&f.source, &f.target, &s.source);
    if x.hi() > m && (m + 1..=x.hi()).any(|j| x.rank(j) > 0) {
        return Err(Error::Hypothesis { degree: m, reason: "target nonzero above m".into() });
    }
    if y.hi() > m && (m + 1..=y.hi()).any(|j| y.rank(j) > 0) {
        return Err(Error::Hypothesis { degree: m, reason: "source of s nonzero above m".into() });
    }
    for j in p.lo..=p.hi().min(m) {
        let t = p.term(j);
        if t.rank() > 0 && !t.is_projective_certified() {
            return Err(Error::Hypothesis { degree: j, reason: "term not certified projective".into() });
        }
    }
    let c = cone(s);
    let mut k: Vec<(i64, Matrix)> = Vec::new();
    let get_k = |k: &Vec<(i64, Matrix)>, j: i64| -> Matrix {
        k.iter().find(|(d, _)| *d == j).map(|(_, m)| m.clone()).unwrap_or_else(|| Matrix::zeros(ring, c.rank(j + 1), p.rank(j)))
    };
    for j in p.lo..=p.hi().min(m) {
        let incl_f = assemble(ring, &[x.rank(j), y.rank(j - 1)], &[p.rank(j)], &[(0, 0, f.comp(j))]);
        let rhs = incl_f.sub(&get_k(&k, j - 1).mul(&p.d(j)));
        let kj = lift_equivariant(&p.term(j), &c.term(j + 1), &c.d(j + 1), &rhs)?
            .ok_or(Error::LiftFailed { degree: j })?;
        k.push((j, kj));
    }
    let fhat = ChainMap::from_fn(p, y, |j| {
        let kj = get_k(&k, j);
        kj.block(x.rank(j + 1), 0, y.rank(j), p.rank(j))
    });
    let h = Homotopy {
        comps: k.iter().map(|(j, kj)| (*j, kj.block(0, 0, x.rank(j + 1), p.rank(*j)).neg())).collect(),
    };
    Ok((fhat, h))
}

/// Dimension of `Hom_{K}(X, Y)` (chain maps modulo null-homotopic ones) and
/// a basis of chain maps representing it.
pub fn hom_mod_homotopy(x: &ChainComplex, y: &ChainComplex) -> Result<(usize, Vec<ChainMap>)> {
    let ring = x.ring;
    if !ring.is_field() {
        return Err(Error::UnsupportedRing("hom_mod_homotopy"));
    }
    let lo = x.lo.min(y.lo) - 1;
    let hi = x.hi().max(y.hi()) + 1;
    let degs: Vec<i64> = (lo..=hi).collect();
    // Hom_G(X_s, Y_s) and Hom_G(X_s, Y_{s+1}) bases
    let maps: Vec<Vec<Matrix>> = degs.iter().map(|&s| hom_or_empty(&x.term(s), &y.term(s))).collect::<Result<_>>()?;
    let homs: Vec<Vec<Matrix>> =
        degs.iter().map(|&s| hom_or_empty(&x.term(s), &y.term(s + 1))).collect::<Result<_>>()?;
    let offs: Vec<usize> = maps.iter().scan(0, |a, v| { let o = *a; *a += v.len(); Some(o) }).collect();
    let total: usize = maps.iter().map(|v| v.len()).sum();
    // coordinates of a family of components in the flattened ambient ⊕ Hom(X_s, Y_s)
    let sizes: Vec<usize> = degs.iter().map(|&s| y.rank(s) * x.rank(s)).collect();
    let flat_offs: Vec<usize> = sizes.iter().scan(0, |a, &v| { let o = *a; *a += v; Some(o) }).collect();
    let flat_total: usize = sizes.iter().sum();
    let embed = |i: usize, m: &Matrix| -> Vec<(usize, i64)> {
        m.data().iter().enumerate().filter(|(_, &v)| v != 0).map(|(k, &v)| (flat_offs[i] + k, v)).collect()
    };
    // chain-map equations: d_Y F_s − F_{s−1} d_X = 0 for each s, in coefficients
    let eq_sizes: Vec<usize> = degs.iter().map(|&s| y.rank(s - 1) * x.rank(s)).collect();
    let eq_offs: Vec<usize> = eq_sizes.iter().scan(0, |a, &v| { let o = *a; *a += v; Some(o) }).collect();
    let eq_total: usize = eq_sizes.iter().sum();
    let mut eqs = Matrix::zeros(ring, eq_total, total);
    for (i, &s) in degs.iter().enumerate() {
        for (b, fb) in maps[i].iter().enumerate() {
            let col = offs[i] + b;
            // contributes d_Y F in equation s and −F d_X in equation s+1
            let a = y.d(s).mul(fb);
            for (k, &v) in a.data().iter().enumerate() {
                if v != 0 {
                    eqs.set(eq_offs[i] + k, col, v);
                }
            }
            if i + 1 < degs.len() {
                let bm = fb.mul(&x.d(s + 1)).neg();
                for (k, &v) in bm.data().iter().enumerate() {
                    if v != 0 {
                        let r = eq_offs[i + 1] + k;
                        let cur = eqs.get(r, col);
                        eqs.set(r, col, ring.add(cur, v));
                    }
                }
            }
        }
    }
    let sol = eqs.kernel()?;
    // chain maps as flattened vectors
    let mut chain_vecs = Matrix::zeros(ring, flat_total, sol.cols());
    let mut chain_maps = Vec::new();
    for c in 0..sol.cols() {
        let coef = sol.col_vec(c);
        let mut comps = Vec::new();
        for (i, &s) in degs.iter().enumerate() {
            let mut f = Matrix::zeros(ring, y.rank(s), x.rank(s));
            for (b, fb) in maps[i].iter().enumerate() {
                let t = coef[offs[i] + b];
                if t != 0 {
                    f = f.add(&fb.scale(t));
                }
            }
            for (r, v) in embed(i, &f) {
                chain_vecs.set(r, c, v);
            }
            comps.push((s, f));
        }
        chain_maps.push(comps);
    }
    // null-homotopic maps d h + h d
    let mut null_vecs = Matrix::zeros(ring, flat_total, 0);
    for (i, &s) in degs.iter().enumerate() {
        for hb in &homs[i] {
            let mut v = Matrix::zeros(ring, flat_total, 1);
            // in degree s: d_Y h_s; in degree s+1: h_s d_X
            let a = y.d(s + 1).mul(hb);
            for (r, val) in embed(i, &a) {
                v.set(r, 0, val);
            }
            if i + 1 < degs.len() {
                let b = hb.mul(&x.d(s + 1));
                for (r, val) in embed(i + 1, &b) {
                    let cur = v.get(r, 0);
                    v.set(r, 0, ring.add(cur, val));
                }
            }
            null_vecs = null_vecs.hstack(&v);
        }
    }
    let null_rank = null_vecs.rank();
    let chain_rank = chain_vecs.rank();
    // representatives: chain maps independent modulo the null-homotopic span
    let mut reps = Vec::new();
    let mut span = null_vecs.clone();
    let mut cur = null_rank;
    for (c, comps) in chain_maps.into_iter().enumerate() {
        let cand = span.hstack(&chain_vecs.select_cols(&[c]));
        let r = cand.rank();
        if r > cur {
            span = cand;
            cur = r;
            let comps_x: Vec<Matrix> = x.degrees().map(|s| comps.iter().find(|(d, _)| *d == s).unwrap().1.clone()).collect();
            reps.push(ChainMap::new_unchecked(x.clone(), y.clone(), comps_x));
        }
    }
    Ok((chain_rank - null_rank, reps))
}

fn hom_or_empty(a: &RGModule, b: &RGModule) -> Result<Vec<Matrix>> {
    if a.rank() == 0 || b.rank() == 0 {
        return Ok(Vec::new());
    }
    hom_basis(a, b)
}

/// Equivariant map `P → Q` from a module map in degree 0, as a chain map
/// between complexes concentrated in degree 0.
pub fn module_map_complex(f: &gmodule::ModuleMap) -> ChainMap {
    let x = ChainComplex::single(f.source.clone(), 0);
    let y = ChainComplex::single(f.target.clone(), 0);
    ChainMap::new_unchecked(x, y, vec![f.matrix.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmodule::RGModule;

    fn c2() -> Arc<Group> {
        Arc::new(Group::enumerate(2, vec![vec![1, 0]]).unwrap())
    }

    fn gf2() -> RingSpec {
        RingSpec::gf(2).unwrap()
    }

    #[test]
    fn single_module_is_valid() {
        let k = RGModule::trivial(c2(), gf2(), 1);
        let c = ChainComplex::single(k, 0);
        assert!(c.validate().is_ok());
        assert_eq!(c.homology().at(0).unwrap().rank, 1);
    }

    #[test]
    fn identity_complex_is_acyclic() {
        let r = RGModule::trivial(c2(), RingSpec::Integers, 1);
        let c = ChainComplex::two_term(r.clone(), r, Matrix::identity(RingSpec::Integers, 1), 0).unwrap();
        assert!(c.is_acyclic());
        assert!(cone(&ChainMap::identity(&c)).is_acyclic());
    }

    #[test]
    fn d_squared_rejected() {
        let g = c2();
        let r = RGModule::trivial(g.clone(), RingSpec::Integers, 1);
        let one = Matrix::identity(RingSpec::Integers, 1);
        let res = ChainComplex::new(g, RingSpec::Integers, 0, vec![r.clone(), r.clone(), r], vec![one.clone(), one]);
        assert!(matches!(res, Err(Error::Complex { degree: 2, .. })));
    }

    #[test]
    fn integer_torsion() {
        let g = c2();
        let r = RGModule::trivial(g, RingSpec::Integers, 1);
        let two = Matrix::from_rows(RingSpec::Integers, &[vec![2]]).unwrap();
        let c = ChainComplex::two_term(r.clone(), r, two, 0).unwrap();
        let h = c.homology();
        assert_eq!(h.at(0).unwrap().torsion, vec![BigInt::from(2)]);
        assert_eq!(h.at(1).unwrap().rank, 0);
    }

    #[test]
    fn hom_mod_homotopy_small() {
        let g = c2();
        let k = RGModule::trivial(g.clone(), gf2(), 1);
        let x = ChainComplex::single(k.clone(), 0);
        assert_eq!(hom_mod_homotopy(&x, &x).unwrap().0, 1);
        let y = ChainComplex::single(k, 1);
        assert_eq!(hom_mod_homotopy(&x, &y).unwrap().0, 0);
        let f = ChainComplex::single(RGModule::free_module(g, gf2(), 1), 0);
        assert_eq!(hom_mod_homotopy(&f, &f).unwrap().0, 2);
    }

    #[test]
    fn normalize_splits_isomorphic_tail() {
        let g = c2();
        let r = RGModule::trivial(Arc::new(Group::enumerate(1, vec![]).unwrap()), RingSpec::Integers, 1);
        let _ = g;
        let p = ChainComplex::two_term(r.clone(), r, Matrix::identity(RingSpec::Integers, 1), -1).unwrap();
        let (q, f) = normalize_zero_free(&p, 0).unwrap();
        assert!(q.trimmed().terms().is_empty());
        assert!(f.validate().is_ok());
    }
}
