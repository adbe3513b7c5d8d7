//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use permres::catalog;
use permres::complex::{
    cone, direct_sum_complexes, hom_mod_homotopy, is_homotopy, lift_through_quasi_iso, normalize_zero_free,
    swap_map, tensor_complexes, ChainComplex, ChainMap,
};
use permres::gmodule::{direct_sum_all, RGModule};
use permres::group::Group;
use permres::grothendieck::{cartan_quotient, pperm_span};
use permres::io::{certificate_doc, ActionDoc, CertificateDoc, IndexDoc, TermCertificateDoc};
use permres::koszul::koszul;
use permres::resolve::{
    combine_resolutions, from_exact_complex, m_free_trivial, resolve_trivial, Caps, ResolutionCertificate,
    ResolutionKind,
};
use permres::ring::{smith_normal_form, Matrix, RingSpec, ZMatrix};
use permres::search::{resolve_module_search, resolve_omega_pair, SearchCaps};
use permres::signfix::{rectify_odd, split_even};
use permres::verify::{verify_certificate, verify_document, Clause};

fn gf(p: u32) -> RingSpec {
    RingSpec::gf(p).unwrap()
}

fn group(name: &str) -> Arc<Group> {
    catalog::group(name).unwrap()
}

fn criterion(n: usize, title: &str, budget: Duration, body: impl FnOnce() -> String) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let t = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(summary) if t <= budget => (true, summary),
        Ok(summary) => (false, format!("{summary}; over the {budget:?} budget")),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, msg)
        }
    };
    println!("criterion {n:>2} {}  {title}: {detail} [{t:.2?}]", if ok { "PASS" } else { "FAIL" });
    ok
}

fn trivial_action(m: &RGModule) -> bool {
    m.rank() == 1 && m.generator_matrices().iter().all(|g| g.is_identity())
}

/// Ranks of `a ⊗ b` for complexes starting in degree 0.
fn convolve(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn koszul_suite() -> String {
    let rings = [RingSpec::Integers, gf(2), gf(3), gf(5)];
    let mut count = 0;
    for name in catalog::NAMES {
        let g = group(name);
        if g.order() > 8 {
            continue;
        }
        for ring in rings {
            let c = koszul(g.clone(), ring).unwrap();
            c.validate().unwrap();
            assert!(c.is_acyclic(), "Kos({name}) over {ring:?} is not exact");
            // Kos_{≥1} shifted down resolves R
            let h = from_exact_complex(&c).complex.homology();
            assert!(h.concentrated_in(0), "{name} {ring:?}: homology outside degree 0");
            let h0 = h.at(0).unwrap();
            assert!(h0.rank == 1 && h0.torsion.is_empty(), "{name} {ring:?}: H₀ ≠ R");
            assert!(c.term(1).is_free_certified(), "{name} {ring:?}: degree 1 not free");
            for t in c.terms() {
                assert!(t.is_monomial_certified(), "{name} {ring:?}: term not monomial");
                if ring == gf(2) {
                    assert!(t.is_permutation_certified(), "{name}: term not permutation over GF(2)");
                }
            }
            count += 1;
        }
    }
    format!("{count} Koszul complexes")
}

fn check_trivial_resolution(name: &str, ring: RingSpec) -> ResolutionCertificate {
    let cert = resolve_trivial(group(name), ring, &Caps::default()).unwrap();
    let s = cert.spliced();
    assert!(trivial_action(&s.term(0)), "{name} {ring:?}: C₀ is not trivial");
    assert!(s.term(1).is_free_certified(), "{name} {ring:?}: C₁ is not free");
    for t in s.terms() {
        assert!(t.is_permutation_certified(), "{name} {ring:?}: term not permutation");
    }
    let report = verify_certificate(&cert);
    assert!(report.passed, "{name} {ring:?}: {:?}", report.violation);
    cert
}

fn odd_suite() -> String {
    let mut lengths = Vec::new();
    for name in ["C3", "C5", "C7", "C9", "C3xC3"] {
        for ring in [RingSpec::Integers, gf(2), gf(3)] {
            let cert = check_trivial_resolution(name, ring);
            let order = group(name).order() as i64;
            assert_eq!(cert.spliced().hi(), order, "{name} {ring:?}: length");
            lengths.push(order);
        }
    }
    format!("{} resolutions, lengths = |G|", lengths.len())
}

fn two_suite() -> String {
    let mut max_rank = 0;
    let mut count = 0;
    for name in ["C2", "C4", "V4", "C8", "C2xC4", "C2^3", "D8", "Q8"] {
        for ring in [RingSpec::Integers, gf(3)] {
            let cert = check_trivial_resolution(name, ring);
            let top = cert.spliced().ranks().into_iter().max().unwrap();
            assert!(top < 4096, "{name} {ring:?}: rank {top}");
            max_rank = max_rank.max(top);
            count += 1;
        }
    }
    format!("{count} resolutions, largest term rank {max_rank}")
}

fn m_free_suite() -> String {
    let mut count = 0;
    for (name, p) in [("C2", 2), ("C3", 3), ("C4", 2)] {
        let base = resolve_trivial(group(name), gf(p), &Caps::default()).unwrap();
        for m in 1..=3usize {
            let cert = m_free_trivial(group(name), gf(p), m, &Caps::default()).unwrap();
            let report = verify_certificate(&cert);
            assert!(report.passed, "{name} m={m}: {:?}", report.violation);
            let claimed = cert.m_free_index.expect("free index claimed");
            assert!(claimed >= m as i64 - 1, "{name} m={m}: free index {claimed}");
            let mut expect = base.complex.ranks();
            for _ in 1..m {
                expect = convolve(&expect, &base.complex.ranks());
            }
            assert_eq!(cert.complex.ranks(), expect, "{name} m={m}: tensor ranks");
            count += 1;
        }
    }
    let c = resolve_trivial(group("C2"), gf(2), &Caps::default()).unwrap().spliced();
    assert_eq!(c.ranks(), vec![1, 2, 1]);
    let cc = tensor_complexes(&c, &c).unwrap();
    assert_eq!(cc.ranks(), vec![1, 4, 6, 4, 1]);
    format!("{count} tensor powers verified; (1,2,1)⊗(1,2,1) = (1,4,6,4,1)")
}

fn corpus() -> Vec<(String, RGModule)> {
    let mut out = Vec::new();
    for name in ["C2", "C3", "C4", "V4"] {
        for (label, m) in catalog::indecomposables(name).unwrap() {
            out.push((format!("{name} {label}"), m));
        }
    }
    out
}

fn search_caps() -> SearchCaps {
    SearchCaps { depth: 8, mult: 4, ..SearchCaps::default() }
}

fn search_suite() -> String {
    let modules = corpus();
    for (label, m) in &modules {
        let cert = resolve_module_search(m, &search_caps()).unwrap_or_else(|e| panic!("{label}: {e}"));
        let report = verify_certificate(&cert);
        assert!(report.passed, "{label}: {:?}", report.violation);
    }
    format!("{} indecomposables resolved and verified", modules.len())
}

fn omega_suite() -> String {
    let modules = corpus();
    for (label, m) in &modules {
        let cert = resolve_omega_pair(m, &search_caps()).unwrap_or_else(|e| panic!("{label}: {e}"));
        let report = verify_certificate(&cert);
        assert!(report.passed, "{label}: {:?}", report.violation);
        assert!(cert.m_projective_index.is_some_and(|i| i >= 0), "{label}: not 0-projective");
        let target = cert.target_module().unwrap();
        assert_eq!(target.rank(), m.group().order() * m.rank(), "{label}: rank of M ⊕ Ω(M)");
    }
    format!("{} omega pairs", modules.len())
}

const GROTHENDIECK_CASES: [(&str, u32); 6] = [("C2", 2), ("C3", 3), ("S3", 2), ("S3", 3), ("D8", 2), ("A4", 2)];

fn span_suite() -> String {
    for (name, p) in GROTHENDIECK_CASES {
        let s = pperm_span(group(name), gf(p), 0).unwrap();
        assert!(s.spans, "({name}, {p}) does not span: {:?}", s.invariant_factors);
        assert!(s.invariant_factors.iter().all(|d| d.is_one()));
        let w = s.witnesses.as_ref().unwrap();
        assert_eq!(s.lattice.mul(w), Matrix::identity(RingSpec::Integers, w.cols()));
    }
    format!("{} pairs span with integer witnesses", GROTHENDIECK_CASES.len())
}

fn cartan_suite() -> String {
    let mut seen = Vec::new();
    for (name, p) in GROTHENDIECK_CASES {
        let order = BigInt::from(group(name).order());
        let q = cartan_quotient(group(name), gf(p), 0).unwrap().quotient;
        for d in &q {
            let mut x = d.clone();
            while (&x % p).is_zero() {
                x /= p;
            }
            assert!(x.is_one(), "({name}, {p}): {d} is not a power of p");
            assert!((&order % d).is_zero(), "({name}, {p}): {d} does not divide |G|");
        }
        seen.push(format!("{name}/{p}:{:?}", q.iter().map(|d| d.to_string()).collect::<Vec<_>>()));
    }
    let c2 = cartan_quotient(group("C2"), gf(2), 0).unwrap().quotient;
    assert_eq!(c2, vec![BigInt::from(2)]);
    let c3 = cartan_quotient(group("C3"), gf(3), 0).unwrap().quotient;
    assert_eq!(c3, vec![BigInt::from(3)]);
    seen.join(" ")
}

/// The minimal free resolution `⋯ → kC2 → kC2` of `k` over GF(2)C2, with
/// every differential `1 + g`, truncated to degrees `shift..=top`.
fn periodic_free(shift: i64, top: i64) -> ChainComplex {
    let g = group("C2");
    let ring = gf(2);
    let n = (top - shift + 1) as usize;
    let terms = vec![RGModule::free_module(g.clone(), ring, 1); n];
    let d = Matrix::from_rows(ring, &[vec![1, 1], vec![1, 1]]).unwrap();
    ChainComplex::new(g, ring, shift, terms, vec![d; n - 1]).unwrap()
}

fn derived_hom_suite() -> String {
    let g = group("C2");
    let ring = gf(2);
    let k = RGModule::trivial(g.clone(), ring, 1);
    let kg = RGModule::free_module(g.clone(), ring, 1);
    let eta = Matrix::column(ring, &[1, 1]);
    let eps = Matrix::from_rows(ring, &[vec![1, 1]]).unwrap();
    let y_eps = ChainComplex::two_term(kg.clone(), k.clone(), eps.clone(), 0).unwrap();

    let res_k = |m: usize| m_free_trivial(g.clone(), ring, m, &Caps::default()).unwrap();
    let res_kg = ResolutionCertificate::assemble(
        ChainMap::identity(&ChainComplex::single(kg.clone(), 0)),
        ResolutionKind::Permutation,
    );
    // cone(η) ≃ coker η = k and cone(ε) ≃ (ker ε)[1] = k[1]
    let cone_eta = |m: usize| {
        let pk = res_k(m);
        let f = ChainMap::new(pk.target.clone(), res_kg.target.clone(), vec![eta.clone()]).unwrap();
        combine_resolutions(&f, &pk, &res_kg).unwrap()
    };
    let cone_eps = |m: usize| {
        let pk = res_k(m);
        let f = ChainMap::new(res_kg.target.clone(), pk.target.clone(), vec![eps.clone()]).unwrap();
        combine_resolutions(&f, &res_kg, &pk).unwrap()
    };

    // (label, resolution builder, X ≃ k[shift], Y, Hom_D(X, Y))
    type Build<'a> = Box<dyn Fn(usize) -> ResolutionCertificate + 'a>;
    let cases: Vec<(&str, Build, i64, ChainComplex, usize)> = vec![
        ("k → k", Box::new(res_k), 0, ChainComplex::single(k.clone(), 0), 1),
        ("k → k[2]", Box::new(res_k), 0, ChainComplex::single(k.clone(), 2), 1),
        ("cone(η) → (kC2 → k)", Box::new(cone_eta), 0, y_eps, 1),
        ("cone(ε) → k[1]", Box::new(cone_eps), 1, ChainComplex::single(k.clone(), 1), 1),
        ("cone(ε) → kC2", Box::new(cone_eps), 1, ChainComplex::single(kg.clone(), 0), 0),
    ];
    let mut dims = Vec::new();
    for (label, build, shift, y, expect) in cases {
        let top = y.hi();
        // free through degree top + 1, which is what the lifting lemma needs
        let q = build((top + 3) as usize);
        assert!(q.complex.free_index().is_some_and(|i| i >= top + 1), "{label}: free index");
        assert!(q.augmentation.is_quasi_isomorphism(), "{label}: not a resolution");
        let via_perm = hom_mod_homotopy(&q.complex, &y).unwrap().0;
        let via_free = hom_mod_homotopy(&periodic_free(shift, top + 2), &y).unwrap().0;
        assert_eq!(via_perm, via_free, "{label}");
        assert_eq!(via_perm, expect, "{label}");
        dims.push(via_perm);
    }
    format!("5 pairs agree, dimensions {dims:?}")
}

fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn fail(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

fn run_suite<S: Strategy>(
    name: &str,
    cases: u32,
    seed: u8,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) where
    S::Value: std::fmt::Debug,
{
    if let Err(e) = runner(cases, seed).run(&strategy, test) {
        panic!("{name}: {e}");
    }
}

const P_GROUPS: [&str; 7] = ["C2", "C3", "C4", "V4", "C5", "D8", "Q8"];
const RINGS: [RingSpec; 4] =
    [RingSpec::Integers, RingSpec::PrimeField { p: 2 }, RingSpec::PrimeField { p: 3 }, RingSpec::PrimeField { p: 5 }];

fn constructions_are_complexes() {
    run_suite("d² = 0 and equivariance", 24, 1, (0..P_GROUPS.len(), 0..3usize, 0..6usize), |(gi, ri, ci)| {
        let g = group(P_GROUPS[gi]);
        let ring = RINGS[ri];
        let caps = Caps::default();
        let res = resolve_trivial(g.clone(), ring, &caps).map_err(fail)?;
        let c = match ci {
            0 => koszul(g, ring).map_err(fail)?,
            1 => res.complex.clone(),
            2 => res.spliced(),
            3 => cone(&res.augmentation),
            // tensor squares only for small groups: dense terms grow quadratically
            _ if g.order() > 4 => return Ok(()),
            4 => tensor_complexes(&res.complex, &res.complex).map_err(fail)?,
            _ => m_free_trivial(g, ring, 2, &caps).map_err(fail)?.complex,
        };
        c.validate().map_err(fail)?;
        res.augmentation.validate().map_err(fail)?;
        Ok(())
    });
}

fn cones_of_quasi_isos() {
    run_suite("cone of a quasi-isomorphism", 16, 2, (0..P_GROUPS.len(), 0..4usize), |(gi, ri)| {
        let res = resolve_trivial(group(P_GROUPS[gi]), RINGS[ri], &Caps::default()).map_err(fail)?;
        prop_assert!(res.augmentation.is_quasi_isomorphism());
        prop_assert!(cone(&res.augmentation).is_acyclic());
        Ok(())
    });
}

fn lifting_homotopies() {
    let fields = [gf(2), gf(3), gf(5)];
    run_suite(
        "lift through a quasi-isomorphism",
        16,
        3,
        (0..P_GROUPS.len(), 0..3usize, prop::collection::vec(0..5i64, 1..4)),
        |(gi, ri, coeffs)| {
            let g = group(P_GROUPS[gi]);
            let ring = fields[ri];
            let s = resolve_trivial(g.clone(), ring, &Caps::default()).map_err(fail)?.augmentation;
            let p = ChainComplex::single(RGModule::free_module(g.clone(), ring, coeffs.len()), 0);
            // kG^r → k, sum of multiples of the augmentation
            let n = g.order();
            let row: Vec<i64> = coeffs.iter().flat_map(|&c| std::iter::repeat(ring.from_int(c)).take(n)).collect();
            let f = ChainMap::new(p, s.target.clone(), vec![Matrix::from_rows(ring, &[row]).map_err(fail)?])
                .map_err(fail)?;
            let (fhat, h) = lift_through_quasi_iso(&f, &s, s.source.hi().max(0)).map_err(fail)?;
            fhat.validate().map_err(fail)?;
            prop_assert!(is_homotopy(&s.compose(&fhat), &f, &h));
            Ok(())
        },
    );
}

fn normalization_keeps_homology() {
    run_suite("normalize_zero_free", 16, 4, (0..P_GROUPS.len(), 0..3usize, 1..3usize, 1..3i64), |(gi, ri, r, depth)| {
        let g = group(P_GROUPS[gi]);
        let ring = RINGS[ri];
        let res = resolve_trivial(g.clone(), ring, &Caps::default()).map_err(fail)?;
        // a contractible free tail in negative degrees
        let free = ChainComplex::single(RGModule::free_module(g, ring, r), 0);
        let tail = cone(&ChainMap::identity(&free)).shift(-1 - depth);
        let p = direct_sum_complexes(&res.complex, &tail).map_err(fail)?;
        let (q, f) = normalize_zero_free(&p, 0).map_err(fail)?;
        q.validate().map_err(fail)?;
        f.validate().map_err(fail)?;
        prop_assert!(q.degrees().all(|s| s >= 0 || q.rank(s) == 0));
        prop_assert!(f.is_quasi_isomorphism());
        let nonzero = |c: &ChainComplex| {
            c.homology().groups.into_iter().filter(|h| !h.is_zero()).collect::<Vec<_>>()
        };
        prop_assert_eq!(nonzero(&p), nonzero(&q));
        Ok(())
    });
}

fn tensor_swap_signs() {
    run_suite("tensor swap sign", 24, 5, (0..5i64, 0..5i64, 0..4usize), |(a, b, gi)| {
        let g = group(P_GROUPS[gi]);
        let k = RGModule::trivial(g.clone(), RingSpec::Integers, 1);
        let c = ChainComplex::single(k.clone(), a);
        let d = ChainComplex::single(k, b);
        let sw = swap_map(&c, &d).map_err(fail)?;
        let sign = if (a * b) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(sw.comp(a + b), Matrix::from_rows(RingSpec::Integers, &[vec![sign]]).map_err(fail)?);
        // on genuine complexes: a chain map whose square is the identity
        let r = resolve_trivial(g, RingSpec::Integers, &Caps::default()).map_err(fail)?.complex;
        let there = swap_map(&r, &r).map_err(fail)?;
        there.validate().map_err(fail)?;
        let back = swap_map(&r, &r).map_err(fail)?;
        prop_assert!(back.compose(&there) == ChainMap::identity(&there.source));
        Ok(())
    });
}

fn snf_identities() {
    let entries = prop::collection::vec(-30..30i64, 36);
    run_suite("Smith normal form", 64, 6, (1..7usize, 1..7usize, entries), |(r, c, e)| {
        let a = Matrix::from_vec(RingSpec::Integers, r, c, e[..r * c].to_vec());
        let snf = smith_normal_form(&a).map_err(fail)?;
        let za = ZMatrix::from_matrix(&a);
        prop_assert_eq!(snf.u.mul(&za).mul(&snf.v), snf.d.clone());
        prop_assert!(snf.u.determinant().abs().is_one());
        prop_assert!(snf.v.determinant().abs().is_one());
        let diag: Vec<BigInt> = (0..r.min(c)).map(|i| snf.d.get(i, i).clone()).collect();
        for i in 0..r {
            for j in 0..c {
                if i != j {
                    prop_assert!(snf.d.get(i, j).is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative() && !w[1].is_negative());
            if !w[0].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero());
            } else {
                prop_assert!(w[1].is_zero());
            }
        }
        Ok(())
    });
}

fn rectify_conjugation() {
    let groups = ["C3", "C5", "C9", "C3xC3"];
    run_suite("rectify_odd conjugation", 24, 7, (0..groups.len(), 0..4usize, 0..10usize), |(gi, ri, s)| {
        let g = group(groups[gi]);
        let s = s.min(g.order());
        let m = koszul(g.clone(), RINGS[ri]).map_err(fail)?.term(s as i64);
        let (n, d) = rectify_odd(&m).map_err(fail)?;
        prop_assert!(d.mul(&d).is_identity());
        prop_assert!(n.is_permutation_certified());
        for e in 0..g.order() {
            prop_assert_eq!(d.mul(&m.element_matrix(e)).mul(&d), n.element_matrix(e));
        }
        Ok(())
    });
}

fn split_even_witness() {
    let groups = ["C2", "C4", "V4", "D8", "S3"];
    let rings = [RingSpec::Integers, gf(3), gf(5)];
    run_suite(
        "split_even witness",
        24,
        8,
        (0..groups.len(), 0..3usize, 0..4usize, 0..3usize, 0..3usize, 0..4usize),
        |(gi, ri, hi, signs, trivials, ki)| {
            let g = group(groups[gi]);
            let ring = rings[ri];
            let subgroups = g.subgroups(true).map_err(fail)?;
            let index_two: Vec<_> = subgroups.iter().filter(|h| 2 * h.order() == g.order()).collect();
            let h = index_two[hi % index_two.len()];
            let below: Vec<_> = subgroups.iter().filter(|k| k.is_subgroup_of(h)).collect();
            let k = below[ki % below.len()];
            let mut parts = vec![RGModule::sign_module(g.clone(), ring, h).map_err(fail)?; signs + 1];
            parts.extend(vec![RGModule::trivial(g.clone(), ring, 1); trivials]);
            let (_, set) = g.coset_action(k).map_err(fail)?;
            parts.push(RGModule::linearize(g.clone(), &set, ring).map_err(fail)?);
            let m = direct_sum_all(g.clone(), ring, &parts).map_err(fail)?;
            let split = split_even(&m, h).map_err(fail)?;
            let both = direct_sum_all(g.clone(), ring, &[split.plus.clone(), split.twisted.clone()]).map_err(fail)?;
            let w = &split.witness;
            prop_assert!(w.mul(&w.transpose()).is_identity(), "witness is not a permutation matrix");
            for e in 0..g.order() {
                prop_assert_eq!(m.element_matrix(e).mul(w), w.mul(&both.element_matrix(e)));
            }
            prop_assert!(split.minus.is_permutation_certified());
            Ok(())
        },
    );
}

fn expect_clause(doc: &CertificateDoc, clause: Clause, label: &str) {
    let report = verify_document(doc);
    assert!(!report.passed, "{label}: corrupted certificate accepted");
    assert_eq!(report.clause(), Some(clause), "{label}: {:?}", report.violation);
}

fn corrupted_certificates() -> usize {
    let a = certificate_doc(&resolve_trivial(group("C4"), RingSpec::Integers, &Caps::default()).unwrap());
    let b = certificate_doc(&resolve_trivial(group("C3"), gf(3), &Caps::default()).unwrap());
    assert!(verify_document(&a).passed && verify_document(&b).passed);
    type Corruption = (&'static str, Clause, Box<dyn Fn() -> CertificateDoc>);
    let (a0, b0) = (a.clone(), b.clone());
    let with_a = move |f: fn(&mut CertificateDoc)| -> Box<dyn Fn() -> CertificateDoc> {
        let a = a0.clone();
        Box::new(move || {
            let mut d = a.clone();
            f(&mut d);
            d
        })
    };
    let with_b = move |f: fn(&mut CertificateDoc)| -> Box<dyn Fn() -> CertificateDoc> {
        let b = b0.clone();
        Box::new(move || {
            let mut d = b.clone();
            f(&mut d);
            d
        })
    };
    let list: Vec<Corruption> = vec![
        ("schema version", Clause::Schema, with_a(|d| d.schema = "permres/0".into())),
        ("composite field", Clause::Ring, with_a(|d| d.ring = RingSpec::PrimeField { p: 4 })),
        ("repeated generator image", Clause::Group, with_a(|d| d.group.generators[0][0] = d.group.generators[0][1])),
        ("generator image out of range", Clause::Group, with_a(|d| d.group.generators[0][0] = d.group.degree as u32)),
        ("missing differential row", Clause::Shape, with_a(|d| {
            d.complex.differentials[0].entries.pop();
        })),
        ("entry not a residue", Clause::Shape, with_b(|d| d.complex.differentials[0].entries[0][0] = 5)),
        ("rank without images", Clause::Shape, with_a(|d| d.complex.terms[0].rank += 1)),
        ("differential dropped", Clause::Shape, with_a(|d| {
            d.complex.differentials.pop();
        })),
        ("action breaks relations", Clause::Action, with_b(|d| {
            d.target.terms[0].action = ActionDoc::Monomial { generators: vec![vec![-1]] };
        })),
        ("free claim on a non-regular orbit", Clause::TermCertificate, with_a(|d| {
            let TermCertificateDoc::Permutation { gset } = d.complex.terms[2].certificate.clone() else { panic!() };
            d.complex.terms[2].certificate = TermCertificateDoc::Free { gset };
        })),
        ("G-set differs from the action", Clause::TermCertificate, with_a(|d| {
            let TermCertificateDoc::Free { gset } = &mut d.complex.terms[0].certificate else { panic!() };
            let p = gset[0].clone();
            for (i, &x) in p.iter().enumerate() {
                gset[0][x as usize] = i as u32;
            }
        })),
        ("general term in a permutation resolution", Clause::Kind, with_a(|d| {
            d.complex.terms[2].certificate = TermCertificateDoc::General;
        })),
        ("d∘d ≠ 0", Clause::DSquared, with_a(|d| {
            let d1 = &d.complex.differentials[0];
            let r = (0..d1.cols).find(|&c| d1.entries.iter().any(|row| row[c] != 0)).unwrap();
            d.complex.differentials[1].entries[r][0] += 1;
        })),
        ("non-equivariant differential", Clause::Equivariance, with_a(|d| {
            d.complex.differentials[0].entries.swap(0, 1);
        })),
        ("non-equivariant augmentation", Clause::ChainMap, with_a(|d| {
            d.augmentation[0].matrix.entries[0][0] += 1;
        })),
        ("augmentation on a single basis vector", Clause::ChainMap, with_b(|d| {
            for (j, x) in d.augmentation[0].matrix.entries[0].iter_mut().enumerate() {
                *x = i64::from(j == 0);
            }
        })),
        ("augmentation times 2", Clause::Exactness, with_a(|d| {
            for x in d.augmentation[0].matrix.entries.iter_mut().flatten() {
                *x *= 2;
            }
        })),
        ("zero augmentation", Clause::Exactness, with_b(|d| {
            for x in d.augmentation[0].matrix.entries.iter_mut().flatten() {
                *x = 0;
            }
        })),
        ("wrong homology rank", Clause::HomologyWitness, with_a(|d| d.homology_witness[0].rank = 2)),
        ("homology degree missing", Clause::HomologyWitness, with_a(|d| {
            d.homology_witness.pop();
        })),
        ("free index over-claimed", Clause::FreeIndex, with_a(|d| d.m_free_index = Some(IndexDoc::Degree(2)))),
        ("projective index over-claimed", Clause::ProjectiveIndex, with_b(|d| {
            d.m_projective_index = Some(IndexDoc::Degree(2));
        })),
    ];
    for (label, clause, build) in &list {
        expect_clause(&build(), *clause, label);
    }
    list.len()
}

fn property_suites() -> String {
    constructions_are_complexes();
    cones_of_quasi_isos();
    lifting_homotopies();
    normalization_keeps_homology();
    tensor_swap_signs();
    snf_identities();
    rectify_conjugation();
    split_even_witness();
    let n = corrupted_certificates();
    assert!(n >= 20);
    format!("8 property suites; {n} corrupted certificates rejected by the intended clause")
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "Koszul suite", secs(60), koszul_suite),
        criterion(2, "trivial resolutions, odd p", secs(120), odd_suite),
        criterion(3, "trivial resolutions, p = 2", secs(600), two_suite),
        criterion(4, "m-free resolutions", secs(120), m_free_suite),
        criterion(5, "module search on indecomposables", secs(300), search_suite),
        criterion(6, "omega pairs", secs(300), omega_suite),
        criterion(7, "permutation classes span G₀", secs(120), span_suite),
        criterion(8, "Cartan quotient", secs(120), cartan_suite),
        criterion(9, "derived Hom through permutation resolutions", secs(120), derived_hom_suite),
        criterion(10, "property suites and corrupted certificates", secs(600), property_suites),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
