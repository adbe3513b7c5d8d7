//! The Koszul complex of the augmentation `RG → R` and tensor induction.

use std::sync::Arc;

use crate::complex::{tensor_blocks, tensor_complexes, ChainComplex};
use crate::error::{Error, Result};
use crate::gmodule::{Action, RGModule, SignedGSet, SignedPerm, SubgroupData};
use crate::group::{Group, Subgroup, Transversal};
use crate::ring::{Matrix, RingSpec};

/// Lexicographically ordered `s`-subsets of `{0, …, n−1}` for each `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WedgeBasis {
    pub n: usize,
    pub tuples: Vec<Vec<Vec<usize>>>,
}

impl WedgeBasis {
    pub fn new(n: usize) -> WedgeBasis {
        let mut tuples = vec![Vec::new(); n + 1];
        for mask in 0u64..(1u64 << n) {
            let t: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            tuples[t.len()].push(t);
        }
        for level in &mut tuples {
            level.sort();
        }
        WedgeBasis { n, tuples }
    }

    pub fn position(&self, t: &[usize]) -> usize {
        self.tuples[t.len()].binary_search_by(|x| x.as_slice().cmp(t)).expect("sorted tuple")
    }
}

/// Sorts `t` in place, returning whether the sorting permutation is odd.
fn sort_parity(t: &mut [usize]) -> bool {
    let mut odd = false;
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            t.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    odd
}

/// `Kos(G;R)`: `Λ^s(RG)` in degree `s` for `0 ≤ s ≤ |G|`, with
/// `d(g_{i₁}∧⋯∧g_{i_s}) = Σ_j (−1)^{j−1} g_{i₁}∧⋯∧ĝ_{i_j}∧⋯∧g_{i_s}`.
/// The complex is exact; `Kos_{≥1}` shifted down resolves `R`.
pub fn koszul(group: Arc<Group>, ring: RingSpec) -> Result<ChainComplex> {
    let n = group.order();
    if n > 20 {
        return Err(Error::CapExceeded { order: n, cap: 20 });
    }
    let basis = WedgeBasis::new(n);
    let mut terms = Vec::with_capacity(n + 1);
    for s in 0..=n {
        let level = &basis.tuples[s];
        let action = (0..group.num_generators())
            .map(|gi| {
                let g = group.generator_index(gi);
                let mut perm = vec![0u32; level.len()];
                let mut neg = vec![false; level.len()];
                for (k, t) in level.iter().enumerate() {
                    let mut img: Vec<usize> = t.iter().map(|&x| group.mul(g, x)).collect();
                    neg[k] = sort_parity(&mut img);
                    perm[k] = basis.position(&img) as u32;
                }
                SignedPerm { perm, neg }
            })
            .collect();
        terms.push(RGModule::from_signed(group.clone(), ring, SignedGSet::new(level.len(), action))?);
    }
    let mut diffs = Vec::with_capacity(n);
    for s in 1..=n {
        let mut d = Matrix::zeros(ring, basis.tuples[s - 1].len(), basis.tuples[s].len());
        for (c, t) in basis.tuples[s].iter().enumerate() {
            for j in 0..t.len() {
                let mut face = t.clone();
                face.remove(j);
                let r = basis.position(&face);
                d.set(r, c, if j % 2 == 0 { 1 } else { -1 });
            }
        }
        diffs.push(d);
    }
    Ok(ChainComplex::new_unchecked(group, ring, 0, terms, diffs))
}

/// The embedding `G ↪ S_n ⋉ Hⁿ` attached to a transversal of a normal
/// subgroup: `g·g_j = g_{σ(g)(j)}·h_j(g)` for all `g`, `j`.
#[derive(Debug, Clone)]
pub struct MonomialEmbedding {
    pub group: Arc<Group>,
    pub subgroup: SubgroupData,
    pub transversal: Transversal,
    /// `sigma[g][j]`
    pub sigma: Vec<Vec<usize>>,
    /// `h_components[g][j]`, as element indices of the subgroup's own group
    pub h_components: Vec<Vec<usize>>,
}

impl MonomialEmbedding {
    pub fn index(&self) -> usize {
        self.transversal.index()
    }

    /// Re-checks the defining identity for every element and injectivity.
    pub fn verify(&self) -> Result<()> {
        let g = &self.group;
        let reps = &self.transversal.representatives;
        let mut seen = std::collections::HashSet::new();
        for e in 0..g.order() {
            for (j, &gj) in reps.iter().enumerate() {
                let lhs = g.mul(e, gj);
                let h = self.subgroup.to_parent[self.h_components[e][j]];
                let rhs = g.mul(reps[self.sigma[e][j]], h);
                if lhs != rhs {
                    return Err(Error::RelationFailure(format!("embedding identity fails at element {e}, coset {j}")));
                }
            }
            if !seen.insert((self.sigma[e].clone(), self.h_components[e].clone())) {
                return Err(Error::RelationFailure("embedding not injective".into()));
            }
        }
        Ok(())
    }
}

/// Builds the embedding for a normal subgroup with the identity-first
/// transversal.
pub fn monomial_embedding(group: Arc<Group>, h: &Subgroup) -> Result<MonomialEmbedding> {
    if !group.is_normal(h) {
        return Err(Error::NotNormal);
    }
    let (transversal, _) = group.coset_action(h)?;
    let sub = SubgroupData::new(group.clone(), h.clone());
    let mut sigma = Vec::with_capacity(group.order());
    let mut hs = Vec::with_capacity(group.order());
    for e in 0..group.order() {
        let mut s = Vec::new();
        let mut hc = Vec::new();
        for &gj in &transversal.representatives {
            let (k, h) = transversal.decompose(&group, group.mul(e, gj));
            s.push(k);
            hc.push(sub.from_parent(h));
        }
        sigma.push(s);
        hs.push(hc);
    }
    let emb = MonomialEmbedding { group, subgroup: sub, transversal, sigma, h_components: hs };
    emb.verify()?;
    Ok(emb)
}

/// `N^{⊗G/H}`: basis `e_{i₁}⊗⋯⊗e_{i_n}` in mixed radix with the first
/// factor most significant; `g` sends factor `j` to position `σ(g)(j)`
/// after applying `h_j(g)`.
pub fn tensor_induce_module(n_mod: &RGModule, emb: &MonomialEmbedding) -> Result<RGModule> {
    if **n_mod.group() != *emb.subgroup.group {
        return Err(Error::NotASubgroup("module is not over the embedded subgroup".into()));
    }
    let g = &emb.group;
    let idx = emb.index();
    let r = n_mod.rank();
    let total = r.checked_pow(idx as u32).filter(|&t| t <= crate::group::ORDER_CAP).ok_or(Error::DimensionCap {
        rank: r.saturating_pow(idx as u32),
        cap: crate::group::ORDER_CAP,
    })?;
    let ring = n_mod.ring();
    let digits = |mut x: usize| -> Vec<usize> {
        let mut d = vec![0; idx];
        for j in (0..idx).rev() {
            d[j] = x % r;
            x /= r;
        }
        d
    };
    let undigits = |d: &[usize]| d.iter().fold(0, |a, &x| a * r + x);
    if n_mod.signed_generators().is_some() {
        let action = (0..g.num_generators())
            .map(|gi| {
                let e = g.generator_index(gi);
                let hp: Vec<SignedPerm> =
                    emb.h_components[e].iter().map(|&h| n_mod.element_signed(h).unwrap()).collect();
                let mut perm = vec![0u32; total];
                let mut neg = vec![false; total];
                for x in 0..total {
                    let d = digits(x);
                    let mut out = vec![0; idx];
                    let mut sign = false;
                    for j in 0..idx {
                        out[emb.sigma[e][j]] = hp[j].perm[d[j]] as usize;
                        sign ^= hp[j].neg[d[j]];
                    }
                    perm[x] = undigits(&out) as u32;
                    neg[x] = sign;
                }
                SignedPerm { perm, neg }
            })
            .collect();
        let set = SignedGSet::new(total, action);
        return RGModule::from_signed(g.clone(), ring, set);
    }
    let mats = (0..g.num_generators())
        .map(|gi| {
            let e = g.generator_index(gi);
            let hm: Vec<Matrix> = emb.h_components[e].iter().map(|&h| n_mod.element_matrix(h)).collect();
            let mut m = Matrix::zeros(ring, total, total);
            for x in 0..total {
                let d = digits(x);
                // image of a pure tensor: product over positions of the columns h_j e_{d_j}
                let mut img: Vec<(Vec<usize>, i64)> = vec![(vec![0; idx], 1)];
                for j in 0..idx {
                    let pos = emb.sigma[e][j];
                    let mut next = Vec::new();
                    for (v, c) in &img {
                        for row in 0..r {
                            let a = hm[j].get(row, d[j]);
                            if a != 0 {
                                let mut w = v.clone();
                                w[pos] = row;
                                next.push((w, ring.mul(*c, a)));
                            }
                        }
                    }
                    img = next;
                }
                for (v, c) in img {
                    let y = undigits(&v);
                    let cur = m.get(y, x);
                    m.set(y, x, ring.add(cur, c));
                }
            }
            m
        })
        .collect();
    RGModule::from_matrices(g.clone(), ring, mats)
}

/// `C^{⊗G/H}` for `[G:H] = 2`: the complex `C ⊗ C` over `H²`, restricted
/// along the embedding. Elements outside `H` swap the factors with the sign
/// `(−1)^{ab}` on the `(a, b)` block. Terms must carry monomial actions.
pub fn tensor_induce_complex2(c: &ChainComplex, emb: &MonomialEmbedding) -> Result<ChainComplex> {
    if emb.index() != 2 {
        return Err(Error::Stage { stage: "tensor_induce_complex2".into(), reason: "index must be 2".into() });
    }
    if **c.group() != *emb.subgroup.group {
        return Err(Error::NotASubgroup("complex is not over the embedded subgroup".into()));
    }
    let g = &emb.group;
    let ring = c.ring();
    let cc = tensor_complexes(c, c)?;
    let mut terms = Vec::new();
    for s in cc.degrees() {
        let blocks = tensor_blocks(c, c, s);
        let offsets: Vec<usize> = blocks
            .iter()
            .scan(0, |acc, &(a, b)| {
                let o = *acc;
                *acc += c.rank(a) * c.rank(b);
                Some(o)
            })
            .collect();
        let total = cc.rank(s);
        let mut action = Vec::new();
        for gi in 0..g.num_generators() {
            let e = g.generator_index(gi);
            let swap = emb.sigma[e][0] == 1;
            let (h1, h2) = (emb.h_components[e][0], emb.h_components[e][1]);
            let mut perm = vec![0u32; total];
            let mut neg = vec![false; total];
            for (bi, &(a, b)) in blocks.iter().enumerate() {
                let (ma, mb) = (c.term(a), c.term(b));
                let pa = ma.element_signed(h1).ok_or(Error::Stage {
                    stage: "tensor_induce_complex2".into(),
                    reason: format!("degree {a} term has no monomial basis"),
                })?;
                let pb = mb.element_signed(h2).ok_or(Error::Stage {
                    stage: "tensor_induce_complex2".into(),
                    reason: format!("degree {b} term has no monomial basis"),
                })?;
                let (ra, rb) = (ma.rank(), mb.rank());
                let koszul_sign = swap && (a * b).rem_euclid(2) == 1;
                for x in 0..ra {
                    for y in 0..rb {
                        let src = offsets[bi] + x * rb + y;
                        if !swap {
                            perm[src] = (offsets[bi] + pa.perm[x] as usize * rb + pb.perm[y] as usize) as u32;
                            neg[src] = pa.neg[x] ^ pb.neg[y];
                        } else {
                            // factor 1 (degree a) moves to position 2, factor 2 to position 1
                            let ti = blocks.iter().position(|&t| t == (b, a)).unwrap();
                            let (xa, yb) = (pa.perm[x] as usize, pb.perm[y] as usize);
                            perm[src] = (offsets[ti] + yb * ra + xa) as u32;
                            neg[src] = pa.neg[x] ^ pb.neg[y] ^ koszul_sign;
                        }
                    }
                }
            }
            action.push(SignedPerm { perm, neg });
        }
        terms.push(RGModule::from_signed(g.clone(), ring, SignedGSet::new(total, action))?);
    }
    let diffs = cc.degrees().skip(1).map(|s| cc.d(s)).collect();
    let out = ChainComplex::new_unchecked(g.clone(), ring, cc.lo(), terms, diffs);
    Ok(out)
}

/// Action matrices as dense data, for comparisons in tests and reports.
pub fn action_matrices(m: &RGModule) -> Vec<Matrix> {
    match m.action() {
        Action::Monomial(ps) => ps.iter().map(|p| p.to_matrix(m.ring())).collect(),
        Action::Dense(ms) => ms.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: u32) -> Arc<Group> {
        Arc::new(Group::enumerate(n as usize, vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap())
    }

    #[test]
    fn koszul_c2_over_z() {
        let k = koszul(cyclic(2), RingSpec::Integers).unwrap();
        assert_eq!(k.ranks(), vec![1, 2, 1]);
        assert_eq!(k.d(1), Matrix::from_rows(RingSpec::Integers, &[vec![1, 1]]).unwrap());
        assert_eq!(k.term(2).generator_matrix(0).get(0, 0), -1);
        assert!(k.term(1).is_free_certified());
        assert!(k.validate().is_ok());
        assert!(k.is_acyclic());
    }

    #[test]
    fn koszul_c3_gf3() {
        let k = koszul(cyclic(3), RingSpec::gf(3).unwrap()).unwrap();
        assert_eq!(k.ranks(), vec![1, 3, 3, 1]);
        assert!(k.validate().is_ok());
        assert!(k.is_acyclic());
    }

    #[test]
    fn koszul_trivial_group() {
        let g = Arc::new(Group::enumerate(1, vec![]).unwrap());
        let k = koszul(g, RingSpec::Integers).unwrap();
        assert_eq!(k.ranks(), vec![1, 1]);
    }

    #[test]
    fn embedding_c4_over_c2() {
        let g = cyclic(4);
        let h = g.index2_normal_subgroups().remove(0);
        let emb = monomial_embedding(g.clone(), &h).unwrap();
        let gen = g.generator_index(0);
        assert_eq!(emb.sigma[gen], vec![1, 0]);
    }

    #[test]
    fn tensor_induced_free_set_is_free() {
        let g = cyclic(4);
        let h = g.index2_normal_subgroups().remove(0);
        let emb = monomial_embedding(g.clone(), &h).unwrap();
        let a = RGModule::free_module(emb.subgroup.group.clone(), RingSpec::Integers, 2);
        let t = tensor_induce_module(&a, &emb).unwrap();
        assert_eq!(t.rank(), 16);
        assert!(t.is_free_certified());
    }

    #[test]
    fn tensor_induced_complex_from_trivial_group_is_koszul() {
        let g = cyclic(2);
        let h = g.trivial_subgroup();
        let emb = monomial_embedding(g.clone(), &h).unwrap();
        let one = emb.subgroup.group.clone();
        let r = RGModule::trivial(one, RingSpec::Integers, 1);
        let d = ChainComplex::two_term(r.clone(), r, Matrix::identity(RingSpec::Integers, 1), 0).unwrap();
        let c = tensor_induce_complex2(&d, &emb).unwrap();
        let k = koszul(g, RingSpec::Integers).unwrap();
        assert!(c.validate().is_ok());
        assert_eq!(c.ranks(), k.ranks());
        for s in 0..=2 {
            assert_eq!(action_matrices(&c.term(s)), action_matrices(&k.term(s)));
        }
        for s in 1..=2 {
            assert_eq!(c.d(s), k.d(s));
        }
    }
}
