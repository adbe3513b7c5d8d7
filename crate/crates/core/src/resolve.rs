//! Finite permutation resolutions of the trivial module over p-groups, their
//! tensor powers, and resolutions of cones.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex::{
    cone, lift_through_quasi_iso, tensor_maps, ChainComplex, ChainMap, HomologyReport,
};
use crate::error::{Error, Result};
use crate::gmodule::RGModule;
use crate::group::{Group, Subgroup};
use crate::koszul::{koszul, monomial_embedding, tensor_induce_complex2};
use crate::ring::{Matrix, RingSpec};
use crate::signfix::{rectify_odd, rectify_signs, split_even};

/// Size limits for the trivial-module resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub order_cap_two: usize,
    pub order_cap_odd: usize,
    pub dim_cap: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps { order_cap_two: 16, order_cap_odd: 27, dim_cap: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolutionKind {
    Permutation,
    PPermutation,
}

/// A bounded complex `P` with a quasi-isomorphism `P → X`.
///
/// For a module `M`, `X` is `M` in degree 0 and the augmentation is
/// `P₀ → M`. The claimed indices are the largest `m` with `P_i` free
/// (resp. certified projective) for all `i ≤ m`; `i64::MAX` means every term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionCertificate {
    pub complex: ChainComplex,
    pub target: ChainComplex,
    pub augmentation: ChainMap,
    pub kind: ResolutionKind,
    pub m_free_index: Option<i64>,
    pub m_projective_index: Option<i64>,
    pub homology_witness: HomologyReport,
}

impl ResolutionCertificate {
    /// Records the indices and homology of `complex` as computed now.
    pub fn assemble(augmentation: ChainMap, kind: ResolutionKind) -> ResolutionCertificate {
        let complex = augmentation.source.clone();
        let target = augmentation.target.clone();
        ResolutionCertificate {
            m_free_index: complex.free_index(),
            m_projective_index: complex.projective_index(),
            homology_witness: complex.homology(),
            complex,
            target,
            augmentation,
            kind,
        }
    }

    /// `cone(P → X)`; for a module target this is `0 → P_n → ⋯ → P₀ → M → 0`
    /// with `M` in degree 0.
    pub fn spliced(&self) -> ChainComplex {
        cone(&self.augmentation).trimmed()
    }

    /// `n` for `0 → P_n → ⋯ → P₀`: the top nonzero degree of `P`, 0 when
    /// `P` is zero.
    pub fn length(&self) -> i64 {
        let p = self.complex.trimmed();
        if p.terms().is_empty() {
            0
        } else {
            p.hi()
        }
    }

    /// The target module when the target is concentrated in degree 0.
    pub fn target_module(&self) -> Option<RGModule> {
        let t = self.target.trimmed();
        if t.terms().is_empty() {
            return Some(RGModule::zero(self.target.group().clone(), self.target.ring()));
        }
        (t.lo() == 0 && t.hi() == 0).then(|| t.term(0))
    }
}

fn check_dims(c: &ChainComplex, cap: usize) -> Result<()> {
    match c.terms().iter().map(|t| t.rank()).max() {
        Some(rank) if rank > cap => Err(Error::DimensionCap { rank, cap }),
        _ => Ok(()),
    }
}

/// Cancels pairs of orbits `A ⊆ C_s`, `B ⊆ C_{s−1}` (with `s − 1 ≥ min_degree`)
/// whose block of `d_s` is invertible. Pairs in one round are chosen so that
/// the combined block is block lower-triangular, and the complex is replaced
/// by the homotopy equivalent one with `d_s' = δ − γΦ⁻¹β` on the remaining
/// orbits. Terms stay monomial on sub-G-sets of the original bases.
pub fn cancel_orbit_pairs(c: &ChainComplex, min_degree: i64) -> Result<ChainComplex> {
    let mut c = c.clone();
    let mut s = c.hi();
    while s - 1 >= min_degree.max(c.lo()) {
        while cancel_round(&mut c, s)? {}
        s -= 1;
    }
    Ok(c.trimmed())
}

fn orbits(m: &RGModule) -> Option<Vec<Vec<usize>>> {
    let gens = m.signed_generators()?;
    let set = crate::gmodule::GSet::new(m.rank(), gens.iter().map(|p| p.perm.clone()).collect());
    Some(set.orbits())
}

fn cancel_round(c: &mut ChainComplex, s: i64) -> Result<bool> {
    let ring = c.ring();
    let (a_mod, b_mod) = (c.term(s), c.term(s - 1));
    let (Some(orb_a), Some(orb_b)) = (orbits(&a_mod), orbits(&b_mod)) else { return Ok(false) };
    let d = c.d(s);
    let mut row_orbit = vec![0usize; b_mod.rank()];
    for (i, o) in orb_b.iter().enumerate() {
        for &r in o {
            row_orbit[r] = i;
        }
    }
    let cols = d.sparse_columns();
    let mut used_b = vec![false; orb_b.len()];
    let mut chosen: Vec<(usize, usize, Matrix)> = Vec::new();
    for (ia, oa) in orb_a.iter().enumerate() {
        let mut hit: Vec<usize> = oa.iter().flat_map(|&x| cols[x].iter().map(|&(r, _)| row_orbit[r])).collect();
        hit.sort_unstable();
        hit.dedup();
        // earlier chosen B rows must not meet this A
        if hit.iter().any(|&ib| used_b[ib]) {
            continue;
        }
        for &ib in &hit {
            let ob = &orb_b[ib];
            if ob.len() != oa.len() {
                continue;
            }
            let phi = d.select_rows(ob).select_cols(oa);
            if let Some(inv) = phi.inverse_any() {
                used_b[ib] = true;
                chosen.push((ia, ib, inv));
                break;
            }
        }
    }
    if chosen.is_empty() {
        return Ok(false);
    }
    let mut used_a = vec![false; orb_a.len()];
    for (ia, _, _) in &chosen {
        used_a[*ia] = true;
    }
    let sel_a: Vec<usize> = chosen.iter().flat_map(|(ia, _, _)| orb_a[*ia].iter().copied()).collect();
    let sel_b: Vec<usize> = chosen.iter().flat_map(|(_, ib, _)| orb_b[*ib].iter().copied()).collect();
    let rest_a: Vec<usize> = (0..orb_a.len()).filter(|&i| !used_a[i]).flat_map(|i| orb_a[i].clone()).collect();
    let rest_b: Vec<usize> = (0..orb_b.len()).filter(|&i| !used_b[i]).flat_map(|i| orb_b[i].clone()).collect();
    let mut rest_a = rest_a;
    let mut rest_b = rest_b;
    rest_a.sort_unstable();
    rest_b.sort_unstable();
    let rows_sel = d.select_rows(&sel_b);
    let phi = rows_sel.select_cols(&sel_a);
    let beta = rows_sel.select_cols(&rest_a);
    let rows_rest = d.select_rows(&rest_b);
    let gamma = rows_rest.select_cols(&sel_a);
    let delta = rows_rest.select_cols(&rest_a);
    // X = Φ⁻¹β by block forward substitution
    let mut x = Matrix::zeros(ring, sel_a.len(), rest_a.len());
    let mut off = 0;
    for (_, _, inv) in &chosen {
        let k = inv.rows();
        let mut rhs = beta.block(off, 0, k, rest_a.len());
        if off > 0 {
            let lower = phi.block(off, 0, k, off);
            rhs = rhs.sub(&lower.mul(&x.block(0, 0, off, rest_a.len())));
        }
        x.set_block(off, 0, &inv.mul(&rhs));
        off += k;
    }
    let new_d = delta.sub(&gamma.mul(&x));
    let new_a = crate::gmodule::monomial_subset(&a_mod, &rest_a)?;
    let new_b = crate::gmodule::monomial_subset(&b_mod, &rest_b)?;
    let up = (s < c.hi()).then(|| c.d(s + 1).select_rows(&rest_a));
    let down = (s - 1 > c.lo()).then(|| c.d(s - 1).select_cols(&rest_b));
    let lo = c.lo();
    let (terms, diffs) = c.parts_mut();
    let ia = (s - lo) as usize;
    terms[ia] = new_a;
    terms[ia - 1] = new_b;
    diffs[ia - 1] = new_d;
    if let Some(u) = up {
        diffs[ia] = u;
    }
    if let Some(dn) = down {
        diffs[ia - 2] = dn;
    }
    Ok(true)
}

/// The exact complex `0 → C_n → ⋯ → C₁ → C₀ → 0` with `C₀ = R` trivial,
/// `C₁` free and every term a permutation module.
pub fn trivial_complex(group: Arc<Group>, ring: RingSpec, caps: &Caps) -> Result<ChainComplex> {
    let p = if group.order() == 1 {
        None
    } else {
        Some(group.p_group_prime().ok_or(Error::Hypothesis { degree: 0, reason: "not a p-group".into() })?)
    };
    let cap = if p == Some(2) { caps.order_cap_two } else { caps.order_cap_odd };
    if group.order() > cap {
        return Err(Error::CapExceeded { order: group.order(), cap });
    }
    match p {
        Some(2) if ring.characteristic() != 2 => two_group_complex(group, ring, caps),
        _ => rectified_koszul(group, ring),
    }
}

/// `Kos(G;R)` with every term made sign-free by a diagonal change of basis.
fn rectified_koszul(group: Arc<Group>, ring: RingSpec) -> Result<ChainComplex> {
    let mut c = koszul(group, ring)?;
    for s in c.degrees() {
        let term = c.term(s);
        let (t, d) = match rectify_odd(&term) {
            Ok(x) => x,
            // characteristic 2 already removed every sign
            Err(_) => rectify_signs(&term)?.ok_or(Error::Stage {
                stage: format!("koszul degree {s}"),
                reason: "signs cannot be removed".into(),
            })?,
        };
        c.replace_term(s, t, &d, &d);
    }
    Ok(c)
}

fn two_group_complex(group: Arc<Group>, ring: RingSpec, caps: &Caps) -> Result<ChainComplex> {
    if group.order() == 1 {
        let r = RGModule::trivial(group, ring, 1);
        return ChainComplex::two_term(r.clone(), r, Matrix::identity(ring, 1), 0);
    }
    let h = group
        .index2_normal_subgroups()
        .into_iter()
        .next()
        .ok_or(Error::Hypothesis { degree: 0, reason: "no index-2 normal subgroup".into() })?;
    let emb = monomial_embedding(group.clone(), &h)?;
    let d = cancel_orbit_pairs(&two_group_complex(emb.subgroup.group.clone(), ring, caps)?, 1)?;
    let mut c = cancel_orbit_pairs(&tensor_induce_complex2(&d, &emb)?, 1)?;
    check_dims(&c, caps.dim_cap)?;
    let l = RGModule::sign_module(group.clone(), ring, &h)?;
    let s = inflated_sign_map(&group, ring, &h, &l)?;
    let mut m = c.hi();
    while m >= 0 {
        c = delta_step(&c, m, &h, &s).map_err(|e| match e {
            Error::DimensionCap { .. } => e,
            e => Error::Stage { stage: format!("|G|={} m={m}", group.order()), reason: e.to_string() },
        })?;
        c = cancel_orbit_pairs(&c, 1)?;
        check_dims(&c, caps.dim_cap)?;
        m -= 1;
    }
    let c0 = c.term(0);
    let trivial_c0 = c0.rank() == 1 && c0.signed_generators().is_some_and(|g| g.iter().all(|p| !p.has_signs()));
    if c.lo() != 0 || !trivial_c0 {
        return Err(Error::Stage { stage: format!("|G|={}", group.order()), reason: "C₀ is not R".into() });
    }
    if !c.term(1).is_free_certified() {
        return Err(Error::Stage { stage: format!("|G|={}", group.order()), reason: "C₁ is not free".into() });
    }
    Ok(c)
}

/// `s: C′ → L` where `C′ = (R → R(G/H))` with `R(G/H)` in degree 0.
fn inflated_sign_map(group: &Arc<Group>, ring: RingSpec, h: &Subgroup, l: &RGModule) -> Result<ChainMap> {
    let (_, set) = group.coset_action(h)?;
    let rgh = RGModule::linearize(group.clone(), &set, ring)?;
    let r = RGModule::trivial(group.clone(), ring, 1);
    let ones = Matrix::from_rows(ring, &[vec![1], vec![1]])?;
    let cprime = ChainComplex::two_term(r, rgh, ones, 0)?;
    let lc = ChainComplex::single(l.clone(), 0);
    let s0 = Matrix::from_rows(ring, &[vec![1, -1]])?;
    ChainMap::new(cprime, lc, vec![s0, Matrix::zeros(ring, 0, 1)])
}

/// One step `(Δ)_{m+1} ⇒ (Δ)_m`: returns a complex whose terms in degrees
/// `≥ m` carry no signs.
fn delta_step(c: &ChainComplex, m: i64, h: &Subgroup, s: &ChainMap) -> Result<ChainComplex> {
    let ring = c.ring();
    let cm = c.term(m);
    if let Some((t, d)) = rectify_signs(&cm)? {
        let mut out = c.clone();
        out.replace_term(m, t, &d, &d);
        return Ok(out);
    }
    if m == 1 {
        return Err(Error::Hypothesis { degree: 1, reason: "degree-1 term is not a permutation module".into() });
    }
    let split = split_even(&cm, h)?;
    let np = split.plus_indices.len();
    let wt = split.witness.transpose();
    let iota_plus = split.witness.select_cols(&(0..np).collect::<Vec<_>>());
    let iota_minus = split.witness.select_cols(&(np..cm.rank()).collect::<Vec<_>>());
    let pi_plus = wt.select_rows(&(0..np).collect::<Vec<_>>());
    let pi_minus = wt.select_rows(&(np..cm.rank()).collect::<Vec<_>>());
    let group = c.group().clone();
    let hi = c.hi();

    // C″ = (⋯ → C_{m+2} → C_{m+1} → C_m⁺), C_m⁺ in degree m−1
    let mut terms2 = vec![split.plus.clone()];
    let mut diffs2 = Vec::new();
    for j in m..hi {
        terms2.push(c.term(j + 1));
        diffs2.push(if j == m { pi_plus.mul(&c.d(m + 1)).neg() } else { c.d(j + 1).neg() });
    }
    let c2 = ChainComplex::new_unchecked(group.clone(), ring, m - 1, terms2, diffs2);

    // C‴ = (N → C_{m−1} → ⋯ → C₀), N = L ⊗ C_m⁻ in degree m
    let mut terms3: Vec<RGModule> = (c.lo()..m).map(|j| c.term(j)).collect();
    terms3.push(split.twisted.clone());
    let mut diffs3: Vec<Matrix> = (c.lo() + 1..m).map(|j| c.d(j)).collect();
    if m > c.lo() {
        diffs3.push(c.d(m).mul(&iota_minus));
    }
    let c3 = ChainComplex::new_unchecked(group.clone(), ring, c.lo(), terms3, diffs3);

    let t = ChainMap::from_fn(&c2, &c3, |j| {
        if j == m - 1 {
            c.d(m).mul(&iota_plus)
        } else if j == m {
            pi_minus.mul(&c.d(m + 1))
        } else {
            Matrix::zeros(ring, c3.rank(j), c2.rank(j))
        }
    });
    debug_assert!(t.validate().is_ok(), "{:?}", t.validate());
    let st = tensor_maps(s, &t)?;
    let out = cone(&st).trimmed();
    out.validate()?;
    Ok(out)
}

/// Resolution `P → R` with `P_i = C_{i+1}` for the complex of
/// [`trivial_complex`]; `P₀ = C₁` is free and the augmentation is `d₁`.
pub fn resolve_trivial(group: Arc<Group>, ring: RingSpec, caps: &Caps) -> Result<ResolutionCertificate> {
    let c = trivial_complex(group.clone(), ring, caps)?;
    Ok(from_exact_complex(&c))
}

/// Splits an exact complex with `C₀ = R` into `P = C_{≥1}` (shifted down)
/// and the augmentation `P₀ → C₀`.
pub fn from_exact_complex(c: &ChainComplex) -> ResolutionCertificate {
    let ring = c.ring();
    let group = c.group().clone();
    let terms: Vec<RGModule> = (1..=c.hi()).map(|s| c.term(s)).collect();
    let diffs: Vec<Matrix> = (2..=c.hi()).map(|s| c.d(s)).collect();
    let p = ChainComplex::new_unchecked(group, ring, 0, terms, diffs);
    let x = ChainComplex::single(c.term(0), 0);
    let aug = ChainMap::new_unchecked(p.clone(), x, {
        let mut v = vec![c.d(1)];
        v.extend((1..=p.hi()).map(|s| Matrix::zeros(ring, 0, p.rank(s))));
        v
    });
    ResolutionCertificate::assemble(aug, ResolutionKind::Permutation)
}

/// `P^{⊗m} → R^{⊗m} = R`, free in degrees `≤ m − 1`.
pub fn m_free_trivial(group: Arc<Group>, ring: RingSpec, m: usize, caps: &Caps) -> Result<ResolutionCertificate> {
    if m == 0 {
        return Err(Error::Hypothesis { degree: 0, reason: "m must be at least 1".into() });
    }
    let base = resolve_trivial(group, ring, caps)?;
    let mut aug = base.augmentation.clone();
    for _ in 1..m {
        aug = tensor_maps(&aug, &base.augmentation)?;
        check_dims(&aug.source, caps.dim_cap)?;
    }
    // R ⊗ ⋯ ⊗ R is rank one with the trivial action already
    Ok(ResolutionCertificate::assemble(aug, ResolutionKind::Permutation))
}

/// Given `f: X → Y` and resolutions `s: P → X`, `t: Q → Y`, lifts `f∘s`
/// through `t` to `h: P → Q` and returns `cone(h) → cone(f)` with
/// components `(q, p) ↦ (t q + k p, s p)`, `k` the lifting homotopy.
pub fn combine_resolutions(
    f: &ChainMap,
    p: &ResolutionCertificate,
    q: &ResolutionCertificate,
) -> Result<ResolutionCertificate> {
    let ring = f.source.ring();
    if !ring.is_field() {
        return Err(Error::UnsupportedRing("combine_resolutions"));
    }
    if p.target != f.source || q.target != f.target {
        return Err(Error::Hypothesis { degree: 0, reason: "resolutions do not match the map".into() });
    }
    let (s, t) = (&p.augmentation, &q.augmentation);
    let top = q.complex.hi().max(f.target.hi());
    let fs = f.compose(s);
    let (h, k) = lift_through_quasi_iso(&fs, t, top)?;
    let ch = cone(&h);
    let cf = cone(f);
    let (px, qy) = (&p.complex, &q.complex);
    let phi = ChainMap::from_fn(&ch, &cf, |j| {
        let mut m = Matrix::zeros(ring, cf.rank(j), ch.rank(j));
        // rows: Y_j ⊕ X_{j−1}; columns: Q_j ⊕ P_{j−1}
        let (yj, qj, pj1) = (f.target.rank(j), qy.rank(j), px.rank(j - 1));
        if yj > 0 && qj > 0 {
            m.set_block(0, 0, &t.comp(j));
        }
        let kj = k.comp(j - 1, ring, f.target.rank(j), pj1);
        if yj > 0 && pj1 > 0 {
            m.set_block(0, qj, &kj);
        }
        if f.source.rank(j - 1) > 0 && pj1 > 0 {
            m.set_block(yj, qj, &s.comp(j - 1));
        }
        m
    });
    phi.validate()?;
    let kind = if p.kind == ResolutionKind::Permutation && q.kind == ResolutionKind::Permutation {
        ResolutionKind::Permutation
    } else {
        ResolutionKind::PPermutation
    };
    Ok(ResolutionCertificate::assemble(phi, kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: u32) -> Arc<Group> {
        Arc::new(Group::enumerate(n as usize, vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap())
    }

    #[test]
    fn c2_over_gf2_is_koszul() {
        let c = trivial_complex(cyclic(2), RingSpec::gf(2).unwrap(), &Caps::default()).unwrap();
        assert_eq!(c.ranks(), vec![1, 2, 1]);
        let r = resolve_trivial(cyclic(2), RingSpec::gf(2).unwrap(), &Caps::default()).unwrap();
        assert_eq!(r.length(), 1);
        assert_eq!(r.spliced().ranks(), vec![1, 2, 1]);
        assert!(r.complex.term(0).is_free_certified());
    }

    #[test]
    fn c3_over_z() {
        let c = trivial_complex(cyclic(3), RingSpec::Integers, &Caps::default()).unwrap();
        assert_eq!(c.ranks(), vec![1, 3, 3, 1]);
        assert!(c.terms().iter().all(|t| t.is_permutation_certified()));
        assert!(c.is_acyclic());
    }

    #[test]
    fn c2_over_z_repairs_sign() {
        let c = trivial_complex(cyclic(2), RingSpec::Integers, &Caps::default()).unwrap();
        assert_eq!(c.ranks(), vec![1, 2, 2, 1]);
        assert!(c.terms().iter().all(|t| t.is_permutation_certified()));
        assert!(c.term(1).is_free_certified());
        assert!(c.is_acyclic());
    }

    #[test]
    fn c4_over_gf3() {
        let c = trivial_complex(cyclic(4), RingSpec::gf(3).unwrap(), &Caps::default()).unwrap();
        assert!(c.terms().iter().all(|t| t.is_permutation_certified()));
        assert!(c.term(1).is_free_certified());
        assert!(c.is_acyclic());
    }

    #[test]
    fn mfree_c2() {
        let r = m_free_trivial(cyclic(2), RingSpec::gf(2).unwrap(), 2, &Caps::default()).unwrap();
        assert_eq!(r.complex.ranks(), vec![4, 4, 1]);
        assert!(r.m_free_index.unwrap() >= 1);
        assert!(r.augmentation.is_quasi_isomorphism());
    }
}
