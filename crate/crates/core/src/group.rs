//! Finite permutation groups with a reproducible element enumeration.
//!
//! Permutations are image vectors: `p[x]` is the image of the point `x`.
//! Composition is right-to-left, `(a·b)[x] = a[b[x]]`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmodule::GSet;

pub type Perm = Vec<u32>;

/// Default order cap for subgroup lattice enumeration.
pub const SUBGROUP_CAP: usize = 24;
/// Hard cap on the order of any group handled here.
pub const ORDER_CAP: usize = 4096;

pub fn compose(a: &[u32], b: &[u32]) -> Perm {
    b.iter().map(|&x| a[x as usize]).collect()
}

pub fn invert(a: &[u32]) -> Perm {
    let mut out = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

pub fn is_permutation(p: &[u32]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        let x = x as usize;
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// JSON form of a group: degree and generator images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub degree: usize,
    pub generators: Vec<Perm>,
}

/// A finite permutation group with all elements listed.
///
/// Elements are enumerated breadth-first over generator words; each layer is
/// sorted lexicographically, so the order is independent of hashing and of
/// the run. Element 0 is the identity.
#[derive(Debug, Clone)]
pub struct Group {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    gen_index: Vec<usize>,
    words: Vec<Vec<usize>>,
    mult: Vec<u32>,
    inverse: Vec<usize>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.generators == other.generators
    }
}
impl Eq for Group {}

impl Group {
    /// Enumerates the group generated by `generators` on `degree` points.
    pub fn enumerate(degree: usize, generators: Vec<Perm>) -> Result<Group> {
        for (i, g) in generators.iter().enumerate() {
            if g.len() != degree || !is_permutation(g) {
                return Err(Error::MalformedPermutation(format!(
                    "generator {i} is not a permutation of 0..{degree}"
                )));
            }
        }
        let identity: Perm = (0..degree as u32).collect();
        let mut index: HashMap<Perm, usize> = HashMap::new();
        let mut elements = vec![identity.clone()];
        let mut words = vec![Vec::new()];
        index.insert(identity, 0);
        let mut layer = vec![0usize];
        while !layer.is_empty() {
            let mut found: Vec<(Perm, Vec<usize>)> = Vec::new();
            let mut fresh: HashMap<Perm, ()> = HashMap::new();
            for &x in &layer {
                for (i, g) in generators.iter().enumerate() {
                    let y = compose(g, &elements[x]);
                    if index.contains_key(&y) || fresh.contains_key(&y) {
                        continue;
                    }
                    let mut w = vec![i];
                    w.extend_from_slice(&words[x]);
                    fresh.insert(y.clone(), ());
                    found.push((y, w));
                }
            }
            found.sort();
            layer.clear();
            for (y, w) in found {
                if elements.len() >= ORDER_CAP {
                    return Err(Error::CapExceeded { order: elements.len() + 1, cap: ORDER_CAP });
                }
                index.insert(y.clone(), elements.len());
                layer.push(elements.len());
                elements.push(y);
                words.push(w);
            }
        }
        let n = elements.len();
        let mut mult = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mult[a * n + b] = index[&compose(&elements[a], &elements[b])] as u32;
            }
        }
        let inverse = (0..n).map(|a| index[&invert(&elements[a])]).collect();
        let gen_index = generators.iter().map(|g| index[g]).collect();
        Ok(Group { degree, generators, elements, gen_index, words, mult, inverse })
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Group> {
        Group::enumerate(spec.degree, spec.generators.clone())
    }

    pub fn spec(&self) -> GroupSpec {
        GroupSpec { degree: self.degree, generators: self.generators.clone() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }
    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }
    /// Element index of generator `i`.
    pub fn generator_index(&self, i: usize) -> usize {
        self.gen_index[i]
    }
    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }
    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }
    /// Generator word `[i₁, …, i_k]` with `element = gen_{i₁}·…·gen_{i_k}`.
    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order() + b] as usize
    }
    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }
    pub fn index_of(&self, p: &[u32]) -> Option<usize> {
        self.elements.iter().position(|e| e.as_slice() == p)
    }
    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(a, x);
            k += 1;
        }
        k
    }

    /// True if `|G|` is a power of `p` (the trivial group counts).
    pub fn is_p_group(&self, p: u32) -> bool {
        let mut n = self.order();
        while n % p as usize == 0 {
            n /= p as usize;
        }
        n == 1
    }

    /// The prime `p` when `G` is a nontrivial `p`-group.
    pub fn p_group_prime(&self) -> Option<u32> {
        let n = self.order();
        (2..=n as u32).find(|&p| n % p as usize == 0).filter(|&p| self.is_p_group(p))
    }

    /// Closure of a set of elements under multiplication.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order()];
        inside[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut members = vec![0usize];
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(g, x);
                if !inside[y] {
                    inside[y] = true;
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        members.sort_unstable();
        members
    }

    /// The subgroup generated by the given elements.
    pub fn generate(&self, gens: &[usize]) -> Subgroup {
        Subgroup::from_members(self, self.closure(gens))
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_members(self, (0..self.order()).collect())
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup::from_members(self, vec![0])
    }

    /// Checks that `members` is a subgroup and wraps it.
    pub fn subgroup(&self, mut members: Vec<usize>) -> Result<Subgroup> {
        members.sort_unstable();
        members.dedup();
        if members.iter().any(|&m| m >= self.order()) {
            return Err(Error::NotASubgroup("element index out of range".into()));
        }
        if members.first() != Some(&0) {
            return Err(Error::NotASubgroup("identity missing".into()));
        }
        let set: Vec<bool> = (0..self.order()).map(|i| members.binary_search(&i).is_ok()).collect();
        for &a in &members {
            if !set[self.inv(a)] {
                return Err(Error::NotASubgroup(format!("not closed under inverse at element {a}")));
            }
            for &b in &members {
                if !set[self.mul(a, b)] {
                    return Err(Error::NotASubgroup(format!("not closed under product at ({a}, {b})")));
                }
            }
        }
        Ok(Subgroup::from_members(self, members))
    }

    pub fn conjugate(&self, h: &Subgroup, g: usize) -> Subgroup {
        let gi = self.inv(g);
        let mut m: Vec<usize> = h.members.iter().map(|&x| self.mul(self.mul(g, x), gi)).collect();
        m.sort_unstable();
        Subgroup::from_members(self, m)
    }

    pub fn is_normal(&self, h: &Subgroup) -> bool {
        (0..self.num_generators()).all(|i| self.conjugate(h, self.gen_index[i]).members == h.members)
    }

    fn mask_of(members: &[usize]) -> u64 {
        members.iter().fold(0u64, |m, &i| m | (1u64 << i))
    }

    fn members_of(mask: u64) -> Vec<usize> {
        (0..64).filter(|&i| mask >> i & 1 == 1).collect()
    }

    /// All subgroups, or one representative per conjugacy class, sorted by
    /// `(order, members)`. Enumeration joins cyclic subgroups until closed.
    pub fn subgroups(&self, up_to_conjugacy: bool) -> Result<Vec<Subgroup>> {
        self.subgroups_with_cap(up_to_conjugacy, SUBGROUP_CAP)
    }

    pub fn subgroups_with_cap(&self, up_to_conjugacy: bool, cap: usize) -> Result<Vec<Subgroup>> {
        let cap = cap.min(64);
        if self.order() > cap {
            return Err(Error::CapExceeded { order: self.order(), cap });
        }
        let n = self.order();
        let mut cyclic: Vec<u64> = (0..n).map(|a| Self::mask_of(&self.closure(&[a]))).collect();
        cyclic.sort_unstable();
        cyclic.dedup();
        let mut all: Vec<u64> = cyclic.clone();
        let mut seen: std::collections::HashSet<u64> = all.iter().copied().collect();
        let mut i = 0;
        while i < all.len() {
            let s = all[i];
            for &c in &cyclic {
                if c & !s == 0 {
                    continue;
                }
                let mut gens = Self::members_of(s);
                gens.extend(Self::members_of(c));
                let j = Self::mask_of(&self.closure(&gens));
                if seen.insert(j) {
                    all.push(j);
                }
            }
            i += 1;
        }
        let mut subs: Vec<Subgroup> =
            all.into_iter().map(|m| Subgroup::from_members(self, Self::members_of(m))).collect();
        subs.sort_by(|a, b| (a.order(), &a.members).cmp(&(b.order(), &b.members)));
        if !up_to_conjugacy {
            return Ok(subs);
        }
        let mut reps: Vec<Subgroup> = Vec::new();
        let mut covered: std::collections::HashSet<Vec<usize>> = Default::default();
        for s in subs {
            if covered.contains(&s.members) {
                continue;
            }
            for g in 0..n {
                covered.insert(self.conjugate(&s, g).members);
            }
            reps.push(s);
        }
        Ok(reps)
    }

    /// A Sylow `p`-subgroup: the first subgroup of the right order in
    /// enumeration order. `G` itself when `G` is a `p`-group, trivial when
    /// `p ∤ |G|`.
    pub fn sylow(&self, p: u32) -> Result<Subgroup> {
        let n = self.order();
        let mut pk = 1usize;
        while n % (pk * p as usize) == 0 {
            pk *= p as usize;
        }
        if pk == 1 {
            return Ok(self.trivial_subgroup());
        }
        if pk == n {
            return Ok(self.whole());
        }
        let subs = self.subgroups_with_cap(false, 64)?;
        Ok(subs.into_iter().find(|s| s.order() == pk).expect("Sylow subgroups exist"))
    }

    /// All index-2 subgroups, as kernels of the nonzero functionals on the
    /// elementary abelian quotient `G/⟨squares, commutators⟩`.
    pub fn index2_normal_subgroups(&self) -> Vec<Subgroup> {
        let n = self.order();
        if n % 2 != 0 {
            return Vec::new();
        }
        let mut gens: Vec<usize> = (0..n).map(|a| self.mul(a, a)).collect();
        for a in 0..n {
            for b in 0..n {
                let c = self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b));
                gens.push(c);
            }
        }
        gens.sort_unstable();
        gens.dedup();
        let frattini = self.closure(&gens);
        // label each element by its coset of N
        let mut coset = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for a in 0..n {
            if coset[a] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(a);
            for &x in &frattini {
                coset[self.mul(a, x)] = c;
            }
        }
        let q = reps.len();
        let r = q.trailing_zeros() as usize;
        debug_assert_eq!(1 << r, q);
        // F2 coordinates of cosets: pick a basis greedily among generator cosets
        let mut coords: Vec<Option<u64>> = vec![None; q];
        coords[coset[0]] = Some(0);
        let mut span: Vec<usize> = vec![coset[0]];
        let mut dim = 0;
        for i in 0..self.num_generators() {
            let g = self.gen_index[i];
            if coords[coset[g]].is_some() {
                continue;
            }
            let bit = 1u64 << dim;
            dim += 1;
            let mut new = Vec::new();
            for &c in &span {
                let v = coords[c].unwrap() | bit;
                let cc = coset[self.mul(g, reps[c])];
                coords[cc] = Some(v);
                new.push(cc);
            }
            span.extend(new);
        }
        debug_assert_eq!(dim, r);
        let mut out = Vec::new();
        for phi in 1u64..(1u64 << r) {
            let members: Vec<usize> = (0..n)
                .filter(|&a| (coords[coset[a]].unwrap() & phi).count_ones() % 2 == 0)
                .collect();
            out.push(Subgroup::from_members(self, members));
        }
        out.sort_by(|a, b| a.members.cmp(&b.members));
        out
    }

    /// Left cosets `g_j H` with an identity-first transversal and the
    /// permutation action of each generator on them.
    pub fn coset_action(&self, h: &Subgroup) -> Result<(Transversal, GSet)> {
        let h = self.subgroup(h.members.clone())?;
        let n = self.order();
        let mut coset = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for g in 0..n {
            if coset[g] != usize::MAX {
                continue;
            }
            let j = reps.len();
            reps.push(g);
            for &x in &h.members {
                coset[self.mul(g, x)] = j;
            }
        }
        let action = (0..self.num_generators())
            .map(|i| {
                let s = self.gen_index[i];
                reps.iter().map(|&r| coset[self.mul(s, r)] as u32).collect()
            })
            .collect();
        let gset = GSet::new(reps.len(), action);
        Ok((Transversal { subgroup: h, representatives: reps, coset_of: coset }, gset))
    }

    /// Same points and elements, as a standalone group generated by the
    /// subgroup's generators; the second value maps its element indices to
    /// indices in `self`.
    pub fn subgroup_as_group(&self, h: &Subgroup) -> (Group, Vec<usize>) {
        let gens: Vec<Perm> = h.gens.iter().map(|&g| self.elements[g].clone()).collect();
        let sub = Group::enumerate(self.degree, gens).expect("subgroup generators are valid");
        let map = sub.elements.iter().map(|p| self.index_of(p).expect("element of parent")).collect();
        (sub, map)
    }

    /// Generator images in `G/N` as a permutation group on the left cosets of `N`.
    pub fn quotient(&self, n: &Subgroup) -> Result<(Group, Transversal)> {
        if !self.is_normal(n) {
            return Err(Error::NotNormal);
        }
        let (t, gset) = self.coset_action(n)?;
        let q = Group::enumerate(gset.size(), gset.action().to_vec())?;
        Ok((q, t))
    }
}

/// A subgroup recorded by sorted element indices of its parent, together
/// with a generating set chosen greedily in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    members: Vec<usize>,
    gens: Vec<usize>,
}

impl Subgroup {
    fn from_members(g: &Group, members: Vec<usize>) -> Subgroup {
        let mut gens = Vec::new();
        let mut span = vec![0usize];
        for &m in &members {
            if span.binary_search(&m).is_err() {
                gens.push(m);
                span = g.closure(&gens);
            }
        }
        Subgroup { members, gens }
    }
    pub fn members(&self) -> &[usize] {
        &self.members
    }
    /// Generating elements, as indices into the parent.
    pub fn generators(&self) -> &[usize] {
        &self.gens
    }
    pub fn order(&self) -> usize {
        self.members.len()
    }
    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }
    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }
}

/// Identity-first representatives of the left cosets of a subgroup.
#[derive(Debug, Clone)]
pub struct Transversal {
    pub subgroup: Subgroup,
    pub representatives: Vec<usize>,
    coset_of: Vec<usize>,
}

impl Transversal {
    pub fn index(&self) -> usize {
        self.representatives.len()
    }
    /// Coset number `j` with `g ∈ g_j H`.
    pub fn coset(&self, g: usize) -> usize {
        self.coset_of[g]
    }
    /// `(j, h)` with `g = g_j·h`.
    pub fn decompose(&self, group: &Group, g: usize) -> (usize, usize) {
        let j = self.coset_of[g];
        (j, group.mul(group.inv(self.representatives[j]), g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: u32) -> Perm {
        (0..n).map(|i| (i + 1) % n).collect()
    }

    #[test]
    fn small_orders() {
        assert_eq!(Group::enumerate(4, vec![cyc(4)]).unwrap().order(), 4);
        let v4 = Group::enumerate(4, vec![vec![1, 0, 2, 3], vec![0, 1, 3, 2]]).unwrap();
        assert_eq!(v4.order(), 4);
        let s3 = Group::enumerate(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(Group::enumerate(3, vec![vec![0, 0, 1]]).is_err());
    }

    #[test]
    fn words_evaluate_to_elements() {
        let s3 = Group::enumerate(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        for i in 0..s3.order() {
            let mut p: Perm = (0..3).collect();
            for &w in s3.word(i).iter().rev() {
                p = compose(&s3.generators()[w], &p);
            }
            assert_eq!(&p, s3.element(i));
        }
    }

    #[test]
    fn subgroup_counts() {
        let c2 = Group::enumerate(2, vec![vec![1, 0]]).unwrap();
        assert_eq!(c2.subgroups(false).unwrap().len(), 2);
        let v4 = Group::enumerate(4, vec![vec![1, 0, 2, 3], vec![0, 1, 3, 2]]).unwrap();
        assert_eq!(v4.subgroups(false).unwrap().len(), 5);
        let s3 = Group::enumerate(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        assert_eq!(s3.subgroups(false).unwrap().len(), 6);
        let classes = s3.subgroups(true).unwrap();
        assert_eq!(classes.iter().map(|s| s.order()).collect::<Vec<_>>(), vec![1, 2, 3, 6]);
    }

    #[test]
    fn sylow_and_index_two() {
        let s3 = Group::enumerate(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        assert_eq!(s3.sylow(3).unwrap().order(), 3);
        assert_eq!(s3.sylow(2).unwrap().order(), 2);
        let c4 = Group::enumerate(4, vec![cyc(4)]).unwrap();
        assert_eq!(c4.sylow(3).unwrap().order(), 1);
        assert_eq!(c4.index2_normal_subgroups().len(), 1);
        let v4 = Group::enumerate(4, vec![vec![1, 0, 2, 3], vec![0, 1, 3, 2]]).unwrap();
        assert_eq!(v4.index2_normal_subgroups().len(), 3);
        let c3 = Group::enumerate(3, vec![cyc(3)]).unwrap();
        assert!(c3.index2_normal_subgroups().is_empty());
        assert_eq!(s3.index2_normal_subgroups().len(), 1);
    }

    #[test]
    fn coset_actions() {
        let s3 = Group::enumerate(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        let c3 = s3.generate(&[s3.generator_index(1)]);
        let (t, a) = s3.coset_action(&c3).unwrap();
        assert_eq!(t.representatives[0], 0);
        assert_eq!(a.action()[0], vec![1, 0]);
        assert_eq!(a.action()[1], vec![0, 1]);
        let (_, whole) = s3.coset_action(&s3.whole()).unwrap();
        assert_eq!(whole.size(), 1);
    }
}
