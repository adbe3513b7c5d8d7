//! The `permres` command line: argument parsing, pipelines and exit codes.
//!
//! Every command writes one JSON document (schema `permres/1`) to standard
//! output or to `--out`. Exit codes: 0 success, 2 verification failure,
//! 3 exhausted or inconclusive, 4 input error.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use permres::catalog;
use permres::error::Error;
use permres::gmodule::RGModule;
use permres::grothendieck::{cartan_over, g0_class, pperm_span_over, simples};
use permres::group::{Group, GroupSpec};
use permres::io::{self, CertificateDoc, ComplexDoc, HomologyDoc, ModuleFileDoc, SCHEMA};
use permres::koszul::koszul;
use permres::resolve::{m_free_trivial, resolve_trivial, Caps, ResolutionCertificate};
use permres::ring::{Matrix, RingSpec};
use permres::search::{qn_certificate, resolve_module_search, resolve_omega_pair, SearchCaps};
use permres::verify::{verify_document, VerifyReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_EXHAUSTED: u8 = 3;
pub const EXIT_INPUT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "permres", version, about = "Finite permutation resolutions over group algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON document here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Catalog name or path to a JSON group spec.
    #[arg(long)]
    pub group: String,
    /// `gf<p>` for a prime p, or `int`.
    #[arg(long)]
    pub ring: String,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Path to a `permres/1` module file.
    #[arg(long)]
    pub module: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 4)]
    pub mult: usize,
    #[arg(long, default_value_t = 256)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SearchArgs {
    fn caps(&self) -> SearchCaps {
        SearchCaps { depth: self.depth, mult: self.mult, budget: self.budget, seed: self.seed }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Koszul complex of the augmentation ideal.
    Koszul(Target),
    /// Permutation resolution of the trivial module.
    ResolveTrivial(Target),
    /// Tensor power of the trivial resolution, free in degrees below m.
    Mfree {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        m: usize,
    },
    /// Searched p-permutation resolution of a module.
    ResolveModule(SearchArgs),
    /// Resolution of M ⊕ Ω(M) starting with a projective cover.
    OmegaPair(SearchArgs),
    /// The resolution Q(n): n projective covers, then a searched tail.
    Qn {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        n: usize,
    },
    /// Re-check a certificate file.
    Verify { certificate: PathBuf },
    /// Simple modules, permutation classes and the Cartan quotient.
    G0 {
        #[command(flatten)]
        target: Target,
        /// Also report the class of this module.
        #[arg(long)]
        module: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Built-in group presentations; all of them when no name is given.
    Catalog { names: Vec<String> },
}

/// Exit code and text for one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: u8, stderr: String) -> Outcome {
        Outcome { code, stdout: String::new(), stderr }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Exhausted(_) | Error::Inconclusive(_) | Error::CapExceeded { .. } | Error::DimensionCap { .. } => {
            EXIT_EXHAUSTED
        }
        Error::Stage { .. }
        | Error::Complex { .. }
        | Error::LiftFailed { .. }
        | Error::SignInconsistent(_)
        | Error::InvalidCertificate(_)
        | Error::NotEquivariant(_) => EXIT_VERIFY,
        _ => EXIT_INPUT,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(exit_code(&e), format!("permres: {e}\n"))
}

pub fn parse_ring(s: &str) -> Result<RingSpec, Error> {
    match s {
        "int" | "z" | "Z" => Ok(RingSpec::Integers),
        _ => {
            let p = s
                .strip_prefix("gf")
                .and_then(|p| p.parse::<u32>().ok())
                .ok_or_else(|| Error::InvalidRing(format!("{s:?} is neither gf<p> nor int")))?;
            RingSpec::gf(p)
        }
    }
}

pub fn load_group(s: &str) -> Result<Arc<Group>, Error> {
    if catalog::canonical_name(s).is_some() {
        return catalog::group(s);
    }
    let path = Path::new(s);
    if !path.exists() {
        return Err(Error::Parse(format!("{s:?} is neither a catalog group nor a file")));
    }
    let spec: GroupSpec = io::from_json(&read(path)?)?;
    Ok(Arc::new(Group::from_spec(&spec)?))
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn load_module(path: &Path) -> Result<RGModule, Error> {
    let doc: ModuleFileDoc = io::from_json(&read(path)?)?;
    if doc.schema != SCHEMA {
        return Err(Error::Parse(format!("unsupported schema {:?}", doc.schema)));
    }
    io::module_from_file_doc(&doc)
}

/// Serializes `cert` and re-verifies the serialized form before emitting.
fn emit_certificate(cert: &ResolutionCertificate) -> Outcome {
    let doc = io::certificate_doc(cert);
    let report = verify_document(&doc);
    if !report.passed {
        return Outcome { code: EXIT_VERIFY, stdout: io::to_json(&report), stderr: "permres: certificate failed re-verification\n".into() };
    }
    Outcome::ok(io::to_json(&doc))
}

#[derive(Debug, Serialize)]
pub struct KoszulDoc {
    pub schema: String,
    pub group: GroupSpec,
    pub ring: RingSpec,
    pub complex: ComplexDoc,
    pub homology: Vec<HomologyDoc>,
}

fn run_koszul(t: &Target) -> Result<Outcome, Error> {
    let group = load_group(&t.group)?;
    let ring = parse_ring(&t.ring)?;
    let c = koszul(group.clone(), ring)?;
    c.validate()?;
    let h = c.homology();
    // Kos(G;R) is exact with R in degree 0, so Kos_{≥1} resolves R
    if !h.is_zero() || c.rank(0) != 1 {
        return Ok(Outcome::fail(EXIT_VERIFY, "permres: Koszul complex is not exact\n".into()));
    }
    let doc = KoszulDoc {
        schema: SCHEMA.into(),
        group: group.spec(),
        ring,
        complex: io::complex_doc(&c),
        homology: io::homology_doc(&h),
    };
    Ok(Outcome::ok(io::to_json(&doc)))
}

#[derive(Debug, Serialize)]
pub struct G0Doc {
    pub schema: String,
    pub group: GroupSpec,
    pub ring: RingSpec,
    pub seed: u64,
    /// Ranks of the simple modules, in basis order.
    pub simples: Vec<usize>,
    /// Orders of the subgroup class representatives, one per column.
    pub subgroup_orders: Vec<usize>,
    /// Row `i` gives the multiplicity of simple `i` in each `k(G/H)`.
    pub permutation_classes: Vec<Vec<i64>>,
    pub invariant_factors: Vec<String>,
    pub spans: bool,
    /// Row `i` writes simple `i` as an integer combination of the columns.
    pub witnesses: Option<Vec<Vec<i64>>>,
    /// Column `j` is the class of the projective cover of simple `j`.
    pub cartan: Vec<Vec<i64>>,
    pub cartan_invariants: Vec<String>,
    pub module_class: Option<Vec<i64>>,
}

fn rows(m: &Matrix) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|d| d.to_string()).collect()
}

fn run_g0(t: &Target, module: Option<&Path>, seed: u64) -> Result<Outcome, Error> {
    let group = load_group(&t.group)?;
    let ring = parse_ring(&t.ring)?;
    let module = module.map(load_module).transpose()?;
    if let Some(m) = &module {
        if **m.group() != *group || m.ring() != ring {
            return Err(Error::RingMismatch("module file disagrees with --group/--ring".into()));
        }
    }
    let basis = simples(group.clone(), ring, seed)?;
    let span = pperm_span_over(&basis, group.subgroups(true)?)?;
    let cartan = cartan_over(&basis, seed)?;
    // the witnesses must reproduce the identity
    if let Some(w) = &span.witnesses {
        let n = basis.simples.len();
        if span.lattice.mul(w) != Matrix::identity(RingSpec::Integers, n) {
            return Ok(Outcome::fail(EXIT_VERIFY, "permres: spanning witness check failed\n".into()));
        }
    }
    let doc = G0Doc {
        schema: SCHEMA.into(),
        group: group.spec(),
        ring,
        seed,
        simples: basis.simples.iter().map(|s| s.rank()).collect(),
        subgroup_orders: span.subgroups.iter().map(|h| h.order()).collect(),
        permutation_classes: rows(&span.lattice),
        invariant_factors: strings(&span.invariant_factors),
        spans: span.spans,
        witnesses: span.witnesses.as_ref().map(|w| rows(&w.transpose())),
        cartan: rows(&cartan.cartan),
        cartan_invariants: strings(&cartan.quotient),
        module_class: module.as_ref().map(|m| g0_class(m, &basis).map(|c| c.multiplicities)).transpose()?,
    };
    Ok(Outcome::ok(io::to_json(&doc)))
}

#[derive(Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub order: usize,
    pub degree: usize,
    pub generators: Vec<Vec<u32>>,
}

#[derive(Debug, Serialize)]
pub struct CatalogDoc {
    pub schema: String,
    pub groups: Vec<CatalogEntry>,
}

fn run_catalog(names: &[String]) -> Result<Outcome, Error> {
    let names: Vec<String> =
        if names.is_empty() { catalog::NAMES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    let mut groups = Vec::new();
    for n in &names {
        let g = catalog::group(n)?;
        let spec = g.spec();
        groups.push(CatalogEntry {
            name: catalog::canonical_name(n).unwrap_or(n).to_string(),
            order: g.order(),
            degree: spec.degree,
            generators: spec.generators,
        });
    }
    Ok(Outcome::ok(io::to_json(&CatalogDoc { schema: SCHEMA.into(), groups })))
}

fn run_verify(path: &Path) -> Result<Outcome, Error> {
    let doc: CertificateDoc = io::from_json(&read(path)?)?;
    let report: VerifyReport = verify_document(&doc);
    let code = if report.passed { EXIT_OK } else { EXIT_VERIFY };
    let stderr = match &report.violation {
        Some(v) => format!("permres: clause {} violated\n", v.clause.name()),
        None => String::new(),
    };
    Ok(Outcome { code, stdout: io::to_json(&report), stderr })
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Koszul(t) => run_koszul(t),
        Command::ResolveTrivial(t) => {
            let cert = resolve_trivial(load_group(&t.group)?, parse_ring(&t.ring)?, &Caps::default())?;
            Ok(emit_certificate(&cert))
        }
        Command::Mfree { target, m } => {
            let cert = m_free_trivial(load_group(&target.group)?, parse_ring(&target.ring)?, *m, &Caps::default())?;
            Ok(emit_certificate(&cert))
        }
        Command::ResolveModule(s) => Ok(emit_certificate(&resolve_module_search(&load_module(&s.module)?, &s.caps())?)),
        Command::OmegaPair(s) => Ok(emit_certificate(&resolve_omega_pair(&load_module(&s.module)?, &s.caps())?)),
        Command::Qn { search, n } => {
            Ok(emit_certificate(&qn_certificate(&load_module(&search.module)?, *n, &search.caps())?))
        }
        Command::Verify { certificate } => run_verify(certificate),
        Command::G0 { target, module, seed } => run_g0(target, module.as_deref(), *seed),
        Command::Catalog { names } => run_catalog(names),
    }
}

/// Runs one parsed command, writing to `--out` when given.
pub fn run(cli: &Cli) -> Outcome {
    let mut outcome = dispatch(cli).unwrap_or_else(from_error);
    if let (Some(path), EXIT_OK) = (&cli.out, outcome.code) {
        if let Err(e) = std::fs::write(path, &outcome.stdout) {
            return Outcome::fail(EXIT_INPUT, format!("permres: {}: {e}\n", path.display()));
        }
        outcome.stdout.clear();
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings() {
        assert_eq!(parse_ring("gf3").unwrap(), RingSpec::gf(3).unwrap());
        assert_eq!(parse_ring("int").unwrap(), RingSpec::Integers);
        assert!(parse_ring("gf4").is_err());
        assert!(parse_ring("q").is_err());
    }

    #[test]
    fn exhausted_maps_to_three() {
        assert_eq!(exit_code(&Error::Exhausted("depth".into())), EXIT_EXHAUSTED);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_INPUT);
    }
}
