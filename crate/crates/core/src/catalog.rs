//! Built-in permutation presentations of small groups.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gmodule::{quotient_module, submodule, RGModule};
use crate::group::{Group, GroupSpec, Perm};
use crate::ring::{Matrix, RingSpec};

/// Canonical names, in listing order.
pub const NAMES: &[&str] =
    &["1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "V4", "C2xC4", "C2^3", "D8", "Q8", "C3xC3", "S3", "A4"];

/// Accepted alternative spellings and the names they stand for.
pub const ALIASES: &[(&str, &str)] = &[
    ("C1", "1"),
    ("trivial", "1"),
    ("C2xC2", "V4"),
    ("C2^2", "V4"),
    ("K4", "V4"),
    ("C4xC2", "C2xC4"),
    ("C2xC2xC2", "C2^3"),
    ("D4", "D8"),
    ("C3^2", "C3xC3"),
];

fn cycle_on(degree: usize, points: &[u32]) -> Perm {
    let mut p: Perm = (0..degree as u32).collect();
    for (i, &x) in points.iter().enumerate() {
        p[x as usize] = points[(i + 1) % points.len()];
    }
    p
}

fn product(degree: usize, cycles: &[&[u32]]) -> Perm {
    let mut p: Perm = (0..degree as u32).collect();
    for c in cycles {
        let q = cycle_on(degree, c);
        p = p.iter().map(|&x| q[x as usize]).collect();
    }
    p
}

/// Resolves aliases to a canonical name.
pub fn canonical_name(name: &str) -> Option<&'static str> {
    if let Some(n) = NAMES.iter().find(|n| **n == name) {
        return Some(n);
    }
    ALIASES.iter().find(|(a, _)| *a == name).map(|(_, n)| *n)
}

/// The presentation behind a catalog name.
pub fn spec(name: &str) -> Result<GroupSpec> {
    let canon = canonical_name(name).ok_or_else(|| Error::Parse(format!("unknown group name {name:?}")))?;
    let (degree, generators): (usize, Vec<Perm>) = match canon {
        "1" => (1, vec![]),
        "V4" => (4, vec![product(4, &[&[0, 1], &[2, 3]]), product(4, &[&[0, 2], &[1, 3]])]),
        "C2xC4" => (6, vec![cycle_on(6, &[0, 1]), cycle_on(6, &[2, 3, 4, 5])]),
        "C2^3" => (6, vec![cycle_on(6, &[0, 1]), cycle_on(6, &[2, 3]), cycle_on(6, &[4, 5])]),
        "D8" => (4, vec![cycle_on(4, &[0, 1, 2, 3]), cycle_on(4, &[1, 3])]),
        // left multiplication by i and j on 1, −1, i, −i, j, −j, k, −k
        "Q8" => (8, vec![vec![2, 3, 1, 0, 6, 7, 5, 4], vec![4, 5, 7, 6, 1, 0, 2, 3]]),
        "C3xC3" => (6, vec![cycle_on(6, &[0, 1, 2]), cycle_on(6, &[3, 4, 5])]),
        "S3" => (3, vec![cycle_on(3, &[0, 1]), cycle_on(3, &[0, 1, 2])]),
        "A4" => (4, vec![cycle_on(4, &[0, 1, 2]), product(4, &[&[0, 1], &[2, 3]])]),
        c => {
            let n: usize = c[1..].parse().expect("cyclic catalog name");
            (n, vec![cycle_on(n, &(0..n as u32).collect::<Vec<_>>())])
        }
    };
    Ok(GroupSpec { degree, generators })
}

pub fn group(name: &str) -> Result<Arc<Group>> {
    Ok(Arc::new(Group::from_spec(&spec(name)?)?))
}

/// The unipotent Jordan block of size `n` for the generator of a cyclic
/// group, e.g. `J_n` over `GF(p)C_{p^a}` for `n ≤ p^a`.
pub fn jordan_block(group: Arc<Group>, ring: RingSpec, n: usize) -> Result<RGModule> {
    if group.num_generators() != 1 {
        return Err(Error::Hypothesis { degree: 0, reason: "Jordan blocks need a one-generator group".into() });
    }
    let mut m = Matrix::identity(ring, n);
    for i in 0..n.saturating_sub(1) {
        m.set(i, i + 1, 1);
    }
    RGModule::from_matrices(group, ring, vec![m])
}

/// Indecomposable modules of small rank used as a test corpus, with labels:
/// all Jordan blocks of rank `≤ min(|G|, 4)` for the cyclic `p`-groups C2, C3,
/// C4, and for V4 over GF(2) the complete list of rank `≤ 3` (`k`, the three
/// `k(V4/H)` with `|H| = 2`, `Ω(k)` and `Ω⁻¹(k)`).
pub fn indecomposables(name: &str) -> Result<Vec<(String, RGModule)>> {
    let canon = canonical_name(name).ok_or_else(|| Error::Parse(format!("unknown group name {name:?}")))?;
    let g = group(canon)?;
    match canon {
        "C2" | "C3" | "C4" => {
            let p = if canon == "C3" { 3 } else { 2 };
            let ring = RingSpec::gf(p)?;
            (1..=g.order().min(4)).map(|n| Ok((format!("J{n}"), jordan_block(g.clone(), ring, n)?))).collect()
        }
        "V4" => {
            let ring = RingSpec::gf(2)?;
            let mut out = vec![("k".to_string(), RGModule::trivial(g.clone(), ring, 1))];
            for h in g.subgroups(true)?.into_iter().filter(|h| h.order() == 2) {
                let (_, set) = g.coset_action(&h)?;
                out.push((format!("k(V4/H{})", out.len()), RGModule::linearize(g.clone(), &set, ring)?));
            }
            let free = RGModule::free_module(g.clone(), ring, 1);
            let mut aug = Matrix::zeros(ring, 4, 3);
            for j in 0..3 {
                aug.set(0, j, 1);
                aug.set(j + 1, j, 1);
            }
            out.push(("Omega(k)".into(), submodule(&free, &aug)?));
            let soc = Matrix::column(ring, &[1, 1, 1, 1]);
            out.push(("Omega^-1(k)".into(), quotient_module(&free, &soc)?.0));
            Ok(out)
        }
        _ => Err(Error::Parse(format!("no indecomposable list for {canon}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        let expect = [1, 2, 3, 4, 5, 6, 7, 8, 9, 4, 8, 8, 8, 8, 9, 6, 12];
        for (n, o) in NAMES.iter().zip(expect) {
            assert_eq!(group(n).unwrap().order(), o, "{n}");
        }
    }

    #[test]
    fn q8_is_quaternion() {
        let g = group("Q8").unwrap();
        assert_eq!(g.degree(), 8);
        // a unique involution
        let involutions = (0..8).filter(|&e| g.element_order(e) == 2).count();
        assert_eq!(involutions, 1);
    }

    #[test]
    fn v4_and_unknown() {
        let v = spec("V4").unwrap();
        assert_eq!((v.degree, v.generators.len()), (4, 2));
        assert!(spec("C11").is_err());
        assert_eq!(canonical_name("C2xC2"), Some("V4"));
    }

    #[test]
    fn indecomposable_ranks() {
        let ranks = |n: &str| indecomposables(n).unwrap().iter().map(|(_, m)| m.rank()).collect::<Vec<_>>();
        assert_eq!(ranks("C3"), vec![1, 2, 3]);
        assert_eq!(ranks("C4"), vec![1, 2, 3, 4]);
        assert_eq!(ranks("V4"), vec![1, 2, 2, 2, 3, 3]);
    }
}
