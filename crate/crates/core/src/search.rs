//! Bounded searches for finite p-permutation resolutions of modules over
//! `GF(p)`: iterated covers by sums of transitive permutation modules
//! `k(G/H)` until the kernel is zero or certified p-permutation.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::gmodule::{direct_sum, direct_sum_all, fixed_points, omega, submodule, RGModule};
use crate::group::{Group, Subgroup};
use crate::resolve::{ResolutionCertificate, ResolutionKind};
use crate::ring::{Matrix, RingSpec};
use crate::signfix::certify_p_permutation;

/// Limits for [`resolve_module_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchCaps {
    /// Largest degree of the resolution.
    pub depth: usize,
    /// Copies of one `k(G/H)` allowed in a single cover.
    pub mult: usize,
    /// Search nodes (kernels examined) before giving up.
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchCaps {
    fn default() -> SearchCaps {
        SearchCaps { depth: 8, mult: 4, budget: 256, seed: 0 }
    }
}

/// How a cover of the current kernel is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    /// Cheapest subgroups (largest first) with the enumerated fixed-point basis.
    MinRank,
    /// Only subgroups of order prime to `p`: a projective cover.
    Projective,
    /// As `MinRank`, with a seeded random basis of each fixed space.
    Shuffled,
}

const STRATEGIES: [Strategy; 3] = [Strategy::MinRank, Strategy::Projective, Strategy::Shuffled];

/// `k(G/H) → K` for each chosen `(H, v)`, summed.
struct Cover {
    module: RGModule,
    map: Matrix,
    summands: Vec<(usize, Vec<i64>)>,
}

struct Classes {
    /// Conjugacy class representatives ordered by decreasing order.
    subgroups: Vec<Subgroup>,
    coset_modules: Vec<(RGModule, Vec<usize>)>,
}

fn classes(group: &Arc<Group>, ring: RingSpec) -> Result<Classes> {
    let mut subgroups = group.subgroups(true)?;
    // stable: ties keep enumeration order
    subgroups.sort_by_key(|h| std::cmp::Reverse(h.order()));
    let coset_modules = subgroups
        .iter()
        .map(|h| {
            let (t, set) = group.coset_action(h)?;
            Ok((RGModule::linearize(group.clone(), &set, ring)?, t.representatives))
        })
        .collect::<Result<_>>()?;
    Ok(Classes { subgroups, coset_modules })
}

fn span_rank(basis: &Matrix, v: &Matrix) -> usize {
    basis.hstack(v).rank()
}

/// `IK = Σ_g (g − 1)K` as columns.
fn augmentation_times(k: &RGModule) -> Matrix {
    let ring = k.ring();
    let id = Matrix::identity(ring, k.rank());
    let mut cols = Matrix::zeros(ring, k.rank(), 0);
    for m in k.all_element_matrices() {
        cols = cols.hstack(&m.sub(&id));
    }
    cols
}

/// `G`-span of `v` in `K`.
fn orbit_span(mats: &[Matrix], v: &Matrix) -> Matrix {
    let ring = v.ring();
    let mut cols = Matrix::zeros(ring, v.rows(), 0);
    for m in mats {
        cols = cols.hstack(&m.mul(v));
    }
    cols
}

fn choose_cover(
    k: &RGModule,
    cl: &Classes,
    strategy: Strategy,
    caps: &SearchCaps,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Cover>> {
    let ring = k.ring();
    let p = ring.characteristic() as usize;
    let g = k.group().clone();
    let mats = k.all_element_matrices();
    // Over a p-group the images only need to span K/IK (Nakayama); otherwise
    // they must span K itself.
    let mut reached = if g.is_p_group(p as u32) { augmentation_times(k) } else { Matrix::zeros(ring, k.rank(), 0) };
    let mut reached_rank = reached.rank();
    let mut summands: Vec<(usize, Vec<i64>)> = Vec::new();
    for (ci, h) in cl.subgroups.iter().enumerate() {
        if reached_rank == k.rank() {
            break;
        }
        if strategy == Strategy::Projective && h.order() % p == 0 {
            continue;
        }
        let mut fixed = fixed_points(k, h)?;
        if strategy == Strategy::Shuffled && fixed.cols() > 1 {
            let mut order: Vec<usize> = (0..fixed.cols()).collect();
            order.shuffle(rng);
            let mut mixed = fixed.select_cols(&order);
            for c in 1..mixed.cols() {
                for d in 0..c {
                    let a = ring.from_int(rand::Rng::gen_range(rng, 0..p.max(2) as i64));
                    for r in 0..mixed.rows() {
                        let x = ring.add(mixed.get(r, c), ring.mul(a, mixed.get(r, d)));
                        mixed.set(r, c, x);
                    }
                }
            }
            fixed = mixed;
        }
        let mut copies = 0;
        for c in 0..fixed.cols() {
            let v = fixed.block(0, c, k.rank(), 1);
            if span_rank(&reached, &v) == reached_rank {
                continue;
            }
            if copies == caps.mult {
                break;
            }
            copies += 1;
            reached = reached.hstack(&orbit_span(&mats, &v));
            reached_rank = reached.rank();
            summands.push((ci, v.col_vec(0)));
        }
    }
    if reached_rank < k.rank() {
        return Ok(None);
    }
    let modules: Vec<RGModule> = summands.iter().map(|(ci, _)| cl.coset_modules[*ci].0.clone()).collect();
    let module = direct_sum_all(g, ring, &modules)?;
    let mut map = Matrix::zeros(ring, k.rank(), module.rank());
    let mut col = 0;
    for (ci, v) in &summands {
        let v = Matrix::column(ring, v);
        for &rep in &cl.coset_modules[*ci].1 {
            map.set_block(0, col, &k.element_matrix(rep).mul(&v));
            col += 1;
        }
    }
    Ok(Some(Cover { module, map, summands }))
}

/// A projective cover `P ↠ M` built from `k(G/H)` with `p ∤ |H|`, minimal
/// when `G` is a `p`-group; returns `P` and the covering map.
pub fn projective_cover(m: &RGModule) -> Result<(RGModule, Matrix)> {
    if !m.ring().is_field() {
        return Err(Error::NotAField);
    }
    let cl = classes(m.group(), m.ring())?;
    let caps = SearchCaps { mult: usize::MAX, ..SearchCaps::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c = choose_cover(m, &cl, Strategy::Projective, &caps, &mut rng)?
        .ok_or_else(|| Error::Stage { stage: "projective cover".into(), reason: "images do not span".into() })?;
    Ok((c.module, c.map))
}

/// `Ω(M)` as the kernel of [`projective_cover`], with its inclusion.
pub fn syzygy(m: &RGModule) -> Result<(RGModule, Matrix)> {
    let (p, c) = projective_cover(m)?;
    let basis = c.kernel()?;
    Ok((submodule(&p, &basis)?, basis))
}

/// A resolution under construction: `terms[i]` with `maps[i]: terms[i] → terms[i−1]`
/// (`maps[0]` lands in the module being resolved).
#[derive(Clone)]
struct Partial {
    terms: Vec<RGModule>,
    maps: Vec<Matrix>,
}

struct Search<'a> {
    caps: &'a SearchCaps,
    classes: Classes,
    budget: usize,
    rng: ChaCha8Rng,
}

impl Search<'_> {
    /// `kernel` sits inside the last term (or the target) through `incl`.
    fn dfs(&mut self, partial: &mut Partial, kernel: RGModule, incl: Matrix, force_projective: bool) -> Result<bool> {
        if self.budget == 0 {
            return Ok(false);
        }
        self.budget -= 1;
        let degree = partial.terms.len();
        if kernel.rank() == 0 {
            return Ok(true);
        }
        if !force_projective {
            if let Ok(cert) = certify_p_permutation(&kernel.clone().recertify_monomial(), self.caps.seed) {
                partial.terms.push(cert);
                partial.maps.push(incl);
                return Ok(true);
            }
        }
        if degree >= self.caps.depth {
            return Ok(false);
        }
        let mut seen: Vec<Vec<(usize, Vec<i64>)>> = Vec::new();
        for &strategy in &STRATEGIES {
            if force_projective && strategy != Strategy::Projective {
                continue;
            }
            // a forced projective cover is determined by the kernel, so the
            // multiplicity cap does not apply to it
            let caps = if force_projective { SearchCaps { mult: usize::MAX, ..*self.caps } } else { *self.caps };
            let Some(cover) = choose_cover(&kernel, &self.classes, strategy, &caps, &mut self.rng)? else {
                continue;
            };
            if seen.contains(&cover.summands) {
                continue;
            }
            seen.push(cover.summands.clone());
            let basis = cover.map.kernel()?;
            let next = submodule(&cover.module, &basis)?;
            partial.terms.push(cover.module.clone());
            partial.maps.push(incl.mul(&cover.map));
            if self.dfs(partial, next, basis, false)? {
                return Ok(true);
            }
            partial.terms.pop();
            partial.maps.pop();
            if self.budget == 0 {
                break;
            }
        }
        Ok(false)
    }
}

fn certificate_from_partial(m: &RGModule, partial: Partial) -> Result<ResolutionCertificate> {
    let ring = m.ring();
    let group = m.group().clone();
    let target = ChainComplex::single(m.clone(), 0);
    if partial.terms.is_empty() {
        // M = 0
        let p = ChainComplex::single(RGModule::zero(group, ring), 0);
        let aug = ChainMap::zero(&p, &target);
        return Ok(ResolutionCertificate::assemble(aug, ResolutionKind::PPermutation));
    }
    let diffs = partial.maps[1..].to_vec();
    let p = ChainComplex::new(group, ring, 0, partial.terms, diffs)?;
    let mut comps = vec![partial.maps[0].clone()];
    comps.extend((1..=p.hi()).map(|s| Matrix::zeros(ring, 0, p.rank(s))));
    let aug = ChainMap::new(p, target, comps)?;
    let cert = ResolutionCertificate::assemble(aug, ResolutionKind::PPermutation);
    if !cert.spliced().is_acyclic() {
        return Err(Error::Stage { stage: "search".into(), reason: "spliced complex is not exact".into() });
    }
    Ok(cert)
}

fn search(m: &RGModule, caps: &SearchCaps, force_projective: bool) -> Result<ResolutionCertificate> {
    if !m.ring().is_field() {
        return Err(Error::NotAField);
    }
    let mut s = Search {
        caps,
        classes: classes(m.group(), m.ring())?,
        budget: caps.budget,
        rng: ChaCha8Rng::seed_from_u64(caps.seed),
    };
    let mut partial = Partial { terms: Vec::new(), maps: Vec::new() };
    let id = Matrix::identity(m.ring(), m.rank());
    if s.dfs(&mut partial, m.clone(), id, force_projective)? {
        return certificate_from_partial(m, partial);
    }
    Err(Error::Exhausted(format!(
        "no p-permutation resolution within depth {}, multiplicity {}, budget {}",
        caps.depth, caps.mult, caps.budget
    )))
}

/// A finite resolution of `m` by p-permutation modules, found by bounded
/// depth-first search over covers. Failure is [`Error::Exhausted`] and says
/// nothing about existence.
///
/// ```
/// use permres::{catalog, gmodule::RGModule, search::*, RingSpec};
/// let g = catalog::group("C2").unwrap();
/// let k = RGModule::trivial(g, RingSpec::gf(2).unwrap(), 1);
/// let cert = resolve_module_search(&k, &SearchCaps::default()).unwrap();
/// assert_eq!(cert.length(), 0);
/// ```
pub fn resolve_module_search(m: &RGModule, caps: &SearchCaps) -> Result<ResolutionCertificate> {
    search(m, caps, false)
}

/// A resolution of `M ⊕ Ω(M)` whose degree-0 term is projective.
///
/// Unless `M ⊕ Ω(M)` is itself certified projective, the first cover is a
/// projective cover; the remaining kernels are searched as usual.
pub fn resolve_omega_pair(m: &RGModule, caps: &SearchCaps) -> Result<ResolutionCertificate> {
    let (om, _, _) = omega(m)?;
    let n = direct_sum(m, &om)?;
    if let Ok(c) = certify_p_permutation(&n.clone().recertify_monomial(), caps.seed) {
        if c.is_projective_certified() {
            return search(&c, caps, false);
        }
    }
    search(&n, caps, true)
}

/// Stage `n` of the approximation: projective covers in degrees `< n`, then
/// a searched resolution of the `n`-th syzygy spliced in from degree `n` on.
/// Stage 0 is `M` itself, returned as the identity on `M`.
pub fn build_qn(m: &RGModule, n: usize, caps: &SearchCaps) -> Result<ChainMap> {
    let ring = m.ring();
    if !ring.is_field() {
        return Err(Error::NotAField);
    }
    if n == 0 {
        let c = ChainComplex::single(m.clone(), 0);
        return Ok(ChainMap::identity(&c));
    }
    let cl = classes(m.group(), ring)?;
    let mut rng = ChaCha8Rng::seed_from_u64(caps.seed);
    let unbounded = SearchCaps { mult: usize::MAX, ..*caps };
    let mut terms = Vec::new();
    let mut maps = Vec::new();
    let mut kernel = m.clone();
    let mut incl = Matrix::identity(ring, m.rank());
    for _ in 0..n {
        let cover = choose_cover(&kernel, &cl, Strategy::Projective, &unbounded, &mut rng)?
            .ok_or_else(|| Error::Stage { stage: "qn".into(), reason: "no projective cover".into() })?;
        let basis = cover.map.kernel()?;
        let next = submodule(&cover.module, &basis)?;
        maps.push(incl.mul(&cover.map));
        terms.push(cover.module);
        kernel = next;
        incl = basis;
    }
    let tail = resolve_module_search(&kernel, caps)?;
    let group = m.group().clone();
    // tail.complex resolves ker(d_{n−1}) ⊆ P_{n−1} through tail.augmentation
    let tail_p = &tail.complex;
    if tail_p.terms().iter().any(|t| t.rank() > 0) {
        maps.push(incl.mul(&tail.augmentation.comp(0)));
        terms.push(tail_p.term(0));
        for s in 1..=tail_p.hi() {
            terms.push(tail_p.term(s));
            maps.push(tail_p.d(s));
        }
    }
    let p = ChainComplex::new(group, ring, 0, terms, maps[1..].to_vec())?;
    let target = ChainComplex::single(m.clone(), 0);
    let mut comps = vec![maps[0].clone()];
    comps.extend((1..=p.hi()).map(|s| Matrix::zeros(ring, 0, p.rank(s))));
    ChainMap::new(p, target, comps)
}

/// The certificate of [`build_qn`] for `n ≥ 1`.
pub fn qn_certificate(m: &RGModule, n: usize, caps: &SearchCaps) -> Result<ResolutionCertificate> {
    if n == 0 {
        return Err(Error::Hypothesis { degree: 0, reason: "stage 0 is the module itself, not a resolution".into() });
    }
    let aug = build_qn(m, n, caps)?;
    Ok(ResolutionCertificate::assemble(aug, ResolutionKind::PPermutation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn jordan(group: &str, p: u32, n: usize) -> RGModule {
        let g = catalog::group(group).unwrap();
        let ring = RingSpec::gf(p).unwrap();
        let mut m = Matrix::identity(ring, n);
        for i in 0..n.saturating_sub(1) {
            m.set(i, i + 1, 1);
        }
        RGModule::from_matrices(g, ring, vec![m]).unwrap()
    }

    #[test]
    fn j2_over_c3() {
        let cert = resolve_module_search(&jordan("C3", 3, 2), &SearchCaps::default()).unwrap();
        assert_eq!(cert.complex.ranks(), vec![3, 1]);
        assert!(cert.complex.term(0).is_free_certified());
        assert!(cert.spliced().is_acyclic());
    }

    #[test]
    fn j2_over_c4_is_permutation() {
        let cert = resolve_module_search(&jordan("C4", 2, 2), &SearchCaps::default()).unwrap();
        assert_eq!(cert.length(), 0);
    }

    #[test]
    fn depth_zero_exhausts() {
        let caps = SearchCaps { depth: 0, ..SearchCaps::default() };
        let r = resolve_module_search(&jordan("C3", 3, 2), &caps);
        assert!(matches!(r, Err(Error::Exhausted(_))));
    }

    #[test]
    fn omega_pair_of_k_over_c2() {
        let cert = resolve_omega_pair(&jordan("C2", 2, 1), &SearchCaps::default()).unwrap();
        assert_eq!(cert.target_module().unwrap().rank(), 2);
        assert!(cert.m_projective_index.is_some_and(|i| i >= 0));
    }

    #[test]
    fn q1_of_k_over_c2() {
        let aug = build_qn(&jordan("C2", 2, 1), 1, &SearchCaps::default()).unwrap();
        assert_eq!(aug.source.ranks(), vec![2, 1]);
        assert!(aug.source.term(0).is_free_certified());
        assert!(aug.is_quasi_isomorphism());
    }
}
