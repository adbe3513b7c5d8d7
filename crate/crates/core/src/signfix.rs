//! Sign-permutation modules: removing signs by a diagonal change of basis,
//! splitting off the `L`-twisted part over an index-2 subgroup, and
//! certifying p-permutation modules over prime fields.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use crate::gmodule::SignedGSet;
use crate::error::{Error, Result};
use crate::gmodule::{
    direct_sum_all, fixed_points, hom_basis, induce, restrict, Certificate, RGModule, SignedPerm, SubgroupData,
    SummandData,
};
use crate::group::{Group, Subgroup};
use crate::ring::{Matrix, RingSpec};

/// Attempts at an invertible intertwiner before giving up.
pub const ISO_ATTEMPTS: usize = 64;

/// Diagonal `±1` change of basis making a monomial action sign-free, if one
/// exists. Signs are propagated along a spanning tree of each orbit and
/// checked on every other edge. Returns the rectified module and `D` with
/// `D⁻¹ ρ(g) D` unsigned (`D = D⁻¹`).
pub fn rectify_signs(m: &RGModule) -> Result<Option<(RGModule, Matrix)>> {
    let gens = m.signed_generators().ok_or(Error::Stage {
        stage: "rectify".into(),
        reason: "module has no monomial basis".into(),
    })?;
    let n = m.rank();
    let ring = m.ring();
    if !gens.iter().any(|p| p.has_signs()) {
        return Ok(Some((m.clone(), Matrix::identity(ring, n))));
    }
    // c[a] = true means e'_a = −e_a
    let mut c: Vec<Option<bool>> = vec![None; n];
    for root in 0..n {
        if c[root].is_some() {
            continue;
        }
        c[root] = Some(false);
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            let ca = c[a].unwrap();
            for p in gens {
                let b = p.perm[a] as usize;
                // ρ e'_a = (±) e_b, so e'_b needs c_b = c_a ⊕ sign
                let want = ca ^ p.neg[a];
                match c[b] {
                    None => {
                        c[b] = Some(want);
                        queue.push_back(b);
                    }
                    Some(cb) if cb != want => return Ok(None),
                    Some(_) => {}
                }
            }
        }
    }
    let mut d = Matrix::zeros(ring, n, n);
    for (a, ca) in c.iter().enumerate() {
        d.set(a, a, if ca.unwrap() { -1 } else { 1 });
    }
    let action: Vec<SignedPerm> = gens
        .iter()
        .map(|p| SignedPerm { perm: p.perm.clone(), neg: vec![false; n] })
        .collect();
    let out = RGModule::from_signed(m.group().clone(), ring, SignedGSet::new(n, action))?;
    Ok(Some((out, d)))
}

/// Sign removal for odd p-groups, where it always succeeds.
pub fn rectify_odd(m: &RGModule) -> Result<(RGModule, Matrix)> {
    let p = m.group().p_group_prime();
    if m.group().order() > 1 && !matches!(p, Some(q) if q % 2 == 1) {
        return Err(Error::Hypothesis { degree: 0, reason: "group is not an odd p-group".into() });
    }
    rectify_signs(m)?.ok_or(Error::SignInconsistent("line stabilizer acts by −1".into()))
}

/// `M = M⁺ ⊕ N` with `N = R·A⁻` and `M⁻ = L ⊗ N` permutation.
#[derive(Debug, Clone)]
pub struct EvenSplit {
    pub plus: RGModule,
    pub minus: RGModule,
    /// `N` itself: the span of `A⁻` with its signed action
    pub twisted: RGModule,
    pub plus_indices: Vec<usize>,
    pub minus_indices: Vec<usize>,
    /// `M⁺ ⊕ N → M`: a permutation matrix in the `(A⁺, A⁻)` block order.
    pub witness: Matrix,
    /// The element outside `H` used to split.
    pub g: usize,
}

/// Splits a monomial module on which the index-2 normal subgroup `h` acts
/// without signs.
pub fn split_even(m: &RGModule, h: &Subgroup) -> Result<EvenSplit> {
    let group = m.group().clone();
    if h.order() * 2 != group.order() {
        return Err(Error::NotASubgroup("split_even needs an index-2 subgroup".into()));
    }
    m.signed_generators().ok_or(Error::Stage { stage: "split_even".into(), reason: "no monomial basis".into() })?;
    for &e in h.generators() {
        if m.element_signed(e).unwrap().has_signs() {
            return Err(Error::Hypothesis { degree: 0, reason: "subgroup acts with signs".into() });
        }
    }
    let g = (0..group.order()).find(|&e| !h.contains(e)).unwrap();
    let sg = m.element_signed(g).unwrap();
    let plus_indices: Vec<usize> = (0..m.rank()).filter(|&a| !sg.neg[a]).collect();
    let minus_indices: Vec<usize> = (0..m.rank()).filter(|&a| sg.neg[a]).collect();
    let sub = |idx: &[usize], strip: bool| -> Result<RGModule> {
        let mut pos = vec![usize::MAX; m.rank()];
        for (i, &a) in idx.iter().enumerate() {
            pos[a] = i;
        }
        let action = (0..group.num_generators())
            .map(|gi| {
                let p = m.element_signed(group.generator_index(gi)).unwrap();
                let perm = idx.iter().map(|&a| pos[p.perm[a] as usize] as u32).collect();
                let neg = idx.iter().map(|&a| p.neg[a] && !strip).collect();
                SignedPerm { perm, neg }
            })
            .collect::<Vec<_>>();
        if action.iter().any(|p: &SignedPerm| p.perm.iter().any(|&x| x as usize == usize::MAX)) {
            return Err(Error::Stage { stage: "split_even".into(), reason: "subset not invariant".into() });
        }
        RGModule::from_signed(group.clone(), m.ring(), SignedGSet::new(idx.len(), action))
    };
    let plus = sub(&plus_indices, false)?;
    if plus.signed_generators().unwrap().iter().any(|p| p.has_signs()) {
        return Err(Error::SignInconsistent("A⁺ is not sign-free".into()));
    }
    let twisted = sub(&minus_indices, false)?;
    let minus = sub(&minus_indices, true)?;
    let ring = m.ring();
    let mut witness = Matrix::zeros(ring, m.rank(), m.rank());
    for (i, &a) in plus_indices.iter().chain(minus_indices.iter()).enumerate() {
        witness.set(a, i, 1);
    }
    Ok(EvenSplit { plus, minus, twisted, plus_indices, minus_indices, witness, g })
}

/// `dim M(K) = dim M^K − dim Σ_{L<K maximal} Tr_L^K(M^L)`.
pub fn brauer_quotient_dim(m: &RGModule, k: &Subgroup, subgroups: &[Subgroup]) -> Result<usize> {
    let fixed = fixed_points(m, k)?;
    let group = m.group();
    let ring = m.ring();
    let mut traces = Matrix::zeros(ring, m.rank(), 0);
    for l in subgroups {
        if l.order() >= k.order() || !l.is_subgroup_of(k) {
            continue;
        }
        let (t, _) = group.coset_action(l)?;
        let fl = fixed_points(m, l)?;
        let mut tr = Matrix::zeros(ring, m.rank(), fl.cols());
        for &x in &t.representatives {
            if k.contains(x) {
                tr = tr.add(&m.element_matrix(x).mul(&fl));
            }
        }
        traces = traces.hstack(&tr);
    }
    let image = if traces.cols() == 0 { 0 } else { traces.rank() };
    Ok(fixed.cols() - image)
}

/// `|(G/H)^K|` for subgroups of `group`.
pub fn mark(group: &Group, k: &Subgroup, h: &Subgroup) -> Result<usize> {
    let (_, set) = group.coset_action(h)?;
    Ok((0..set.size())
        .filter(|&x| k.members().iter().all(|&e| set.element_perm(group, e)[x] as usize == x))
        .count())
}

/// Multiplicities `n_H` of `k(P/H)` over subgroup classes, solved from the
/// Brauer quotient dimensions against the table of marks. `None` when the
/// solution is not a nonnegative integer vector.
pub fn permutation_multiplicities(m: &RGModule) -> Result<Option<Vec<(Subgroup, usize)>>> {
    let group = m.group();
    let classes = group.subgroups(true)?;
    let all = group.subgroups(false)?;
    let dims: Vec<usize> = classes.iter().map(|k| brauer_quotient_dim(m, k, &all)).collect::<Result<_>>()?;
    // marks vanish unless K is subconjugate to H, so solve from the top
    let n = classes.len();
    let mut mult = vec![0i64; n];
    for i in (0..n).rev() {
        let mut rest = dims[i] as i64;
        for j in i + 1..n {
            if mult[j] != 0 {
                rest -= mult[j] * mark(group, &classes[i], &classes[j])? as i64;
            }
        }
        let diag = mark(group, &classes[i], &classes[i])? as i64;
        if rest < 0 || rest % diag != 0 {
            return Ok(None);
        }
        mult[i] = rest / diag;
    }
    Ok(Some(classes.into_iter().zip(mult).filter(|(_, c)| *c > 0).map(|(h, c)| (h, c as usize)).collect()))
}

/// The permutation module `⊕ n_H k(G/H)`.
pub fn permutation_module(group: Arc<Group>, ring: RingSpec, mults: &[(Subgroup, usize)]) -> Result<RGModule> {
    let mut mods = Vec::new();
    for (h, c) in mults {
        let (_, set) = group.coset_action(h)?;
        let one = RGModule::linearize(group.clone(), &set, ring)?;
        for _ in 0..*c {
            mods.push(one.clone());
        }
    }
    direct_sum_all(group, ring, &mods)
}

/// Random invertible element of `Hom_G(X, Y)`, if one is found.
pub fn random_iso(x: &RGModule, y: &RGModule, rng: &mut ChaCha8Rng, attempts: usize) -> Result<Option<Matrix>> {
    if x.rank() != y.rank() {
        return Ok(None);
    }
    if x.rank() == 0 {
        return Ok(Some(Matrix::zeros(x.ring(), 0, 0)));
    }
    let basis = hom_basis(x, y)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let ring = x.ring();
    let p = ring.characteristic() as i64;
    for _ in 0..attempts {
        let mut f = Matrix::zeros(ring, y.rank(), x.rank());
        for b in &basis {
            let c = rng.gen_range(0..p);
            if c != 0 {
                f = f.add(&b.scale(c));
            }
        }
        if f.rank() == x.rank() {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Certifies `M` over `GF(p)` as a direct summand of a permutation module.
///
/// `Res_P M` is matched with a permutation module `X` for a Sylow
/// `p`-subgroup `P` (by removing signs, or via Brauer quotients, the table of
/// marks and a random intertwiner), and `M` is exhibited as a summand of
/// `Ind_P^G X` through `m ↦ [G:P]⁻¹ Σ_j g_j ⊗ g_j⁻¹m` and `g_j ⊗ m ↦ g_j m`.
/// Failure is reported as [`Error::Inconclusive`].
pub fn certify_p_permutation(m: &RGModule, seed: u64) -> Result<RGModule> {
    let ring = m.ring();
    let p = match ring {
        RingSpec::PrimeField { p } => p,
        RingSpec::Integers => return Err(Error::NotAField),
    };
    if m.is_p_permutation_certified() {
        return Ok(m.clone());
    }
    let group = m.group().clone();
    let sylow = group.sylow(p)?;
    let sub = SubgroupData::new(group.clone(), sylow.clone());
    let res = restrict(m, &sub)?;
    // φ: X → Res_P M
    let (x, phi) = match res.signed_generators().map(|_| rectify_signs(&res)) {
        Some(Ok(Some((x, d)))) => (x, d),
        _ => {
            let mults = permutation_multiplicities(&res)?.ok_or(Error::Inconclusive(
                "Brauer quotient dimensions do not match a permutation module".into(),
            ))?;
            let x = permutation_module(sub.group.clone(), ring, &mults)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_iso(&x, &res, &mut rng, ISO_ATTEMPTS)?
                .ok_or(Error::Inconclusive("no invertible intertwiner found".into()))?;
            (x, phi)
        }
    };
    let phi_inv = phi.inverse_any().ok_or(Error::Inconclusive("intertwiner not invertible".into()))?;
    let (amb, t) = induce(&x, &sub)?;
    let r = m.rank();
    let idx = t.index();
    let inv_idx = ring.inv(ring.from_int(idx as i64)).ok_or(Error::NotAField)?;
    let mut embedding = Matrix::zeros(ring, idx * r, r);
    let mut projection = Matrix::zeros(ring, r, idx * r);
    for (j, &gj) in t.representatives.iter().enumerate() {
        let gm = m.element_matrix(gj);
        let gm_inv = m.element_matrix(group.inv(gj));
        embedding.set_block(j * r, 0, &phi_inv.mul(&gm_inv).scale(inv_idx));
        projection.set_block(0, j * r, &gm.mul(&phi));
    }
    let cert = Certificate::Summand(Box::new(SummandData { ambient: amb, embedding, projection }));
    m.with_certificate(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: u32) -> Arc<Group> {
        Arc::new(Group::enumerate(n as usize, vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap())
    }

    #[test]
    fn rectify_c3_example() {
        let g = cyclic(3);
        let sp = SignedPerm { perm: vec![1, 2, 0], neg: vec![true, true, false] };
        let m = RGModule::from_signed(g, RingSpec::Integers, SignedGSet::new(3, vec![sp])).unwrap();
        let (r, d) = rectify_odd(&m).unwrap();
        assert!(r.is_permutation_certified());
        let conj = d.mul(&m.generator_matrix(0)).mul(&d);
        assert_eq!(conj, r.generator_matrix(0));
        assert_eq!((d.get(0, 0), d.get(1, 1), d.get(2, 2)), (1, -1, 1));
    }

    #[test]
    fn split_c4_rank2() {
        let g = cyclic(4);
        let h = g.index2_normal_subgroups().remove(0);
        // g² = −1 here, so the subgroup acts with signs
        let bad = SignedPerm { perm: vec![1, 0], neg: vec![false, true] };
        let m = RGModule::from_signed(g.clone(), RingSpec::Integers, SignedGSet::new(2, vec![bad])).unwrap();
        assert!(matches!(split_even(&m, &h), Err(Error::Hypothesis { .. })));
        let sp = SignedPerm { perm: vec![1, 0], neg: vec![true, true] };
        let m = RGModule::from_signed(g.clone(), RingSpec::Integers, SignedGSet::new(2, vec![sp])).unwrap();
        let s = split_even(&m, &h).unwrap();
        assert_eq!(s.plus.rank(), 0);
        assert_eq!(s.minus.rank(), 2);
        assert!(s.minus.is_permutation_certified());
        let lhs = crate::gmodule::direct_sum(&s.plus, &s.twisted).unwrap();
        assert!(crate::gmodule::is_equivariant(&lhs, &m, &s.witness));
        assert!(s.witness.is_invertible());
    }

    #[test]
    fn certify_trivial_and_coprime() {
        let g = cyclic(2);
        let k = RGModule::trivial(g.clone(), RingSpec::gf(2).unwrap(), 1);
        assert!(certify_p_permutation(&k, 1).unwrap().is_p_permutation_certified());
        let f3 = RingSpec::gf(3).unwrap();
        let m = RGModule::from_matrices(g, f3, vec![Matrix::from_rows(f3, &[vec![0, 1], vec![1, 0]]).unwrap()])
            .unwrap();
        let c = certify_p_permutation(&m, 1).unwrap();
        assert!(c.is_p_permutation_certified());
        assert!(c.is_projective_certified());
    }

    #[test]
    fn jordan_block_c4_is_permutation() {
        let g = cyclic(4);
        let f2 = RingSpec::gf(2).unwrap();
        let j2 = RGModule::from_matrices(g, f2, vec![Matrix::from_rows(f2, &[vec![1, 1], vec![0, 1]]).unwrap()])
            .unwrap();
        let c = certify_p_permutation(&j2, 7).unwrap();
        assert!(c.is_p_permutation_certified());
    }

    #[test]
    fn jordan_block_c3_is_not_certified() {
        let g = cyclic(3);
        let f3 = RingSpec::gf(3).unwrap();
        let j2 = RGModule::from_matrices(g, f3, vec![Matrix::from_rows(f3, &[vec![1, 1], vec![0, 1]]).unwrap()])
            .unwrap();
        assert!(matches!(certify_p_permutation(&j2, 7), Err(Error::Inconclusive(_))));
    }
}
