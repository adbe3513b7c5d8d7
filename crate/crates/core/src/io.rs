//! The `permres/1` JSON interchange format.
//!
//! Matrices are row-major integer arrays with their shape stated explicitly,
//! field elements as residues in `0..p`. Signed permutations are lists of
//! 1-based images, negative where the basis vector picks up a sign:
//! `[2, -1]` is `e₁ ↦ e₂, e₂ ↦ −e₁`. Every object rejects unknown fields.

use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::complex::{ChainComplex, ChainMap, HomologyGroup, HomologyReport};
use crate::error::{Error, Result};
use crate::gmodule::{Action, Certificate, GSet, RGModule, SignedGSet, SignedPerm, SummandData};
use crate::group::{Group, GroupSpec, Perm};
use crate::resolve::{ResolutionCertificate, ResolutionKind};
use crate::ring::{Matrix, RingSpec};

pub const SCHEMA: &str = "permres/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ActionDoc {
    Monomial { generators: Vec<Vec<i64>> },
    Dense { generators: Vec<MatrixDoc> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TermCertificateDoc {
    Permutation { gset: Vec<Perm> },
    Free { gset: Vec<Perm> },
    Monomial { set: Vec<Vec<i64>> },
    Summand { ambient: Box<ModuleDoc>, embedding: MatrixDoc, projection: MatrixDoc },
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub rank: usize,
    pub action: ActionDoc,
    pub certificate: TermCertificateDoc,
}

/// `differentials[i]` is `d_{lo+i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub lo: i64,
    pub terms: Vec<ModuleDoc>,
    pub differentials: Vec<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub degree: i64,
    pub matrix: MatrixDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AllTerms {
    #[serde(rename = "all")]
    All,
}

/// A claimed index: a degree, or `"all"` when every term qualifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexDoc {
    Degree(i64),
    All(AllTerms),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyDoc {
    pub degree: i64,
    pub rank: usize,
    /// Decimal strings, so that large coefficients survive any JSON reader.
    pub torsion: Vec<String>,
}

/// A resolution certificate as exchanged on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub schema: String,
    pub group: GroupSpec,
    pub ring: RingSpec,
    pub kind: ResolutionKind,
    pub complex: ComplexDoc,
    pub target: ComplexDoc,
    /// Components `P_s → X_s`; absent degrees are zero.
    pub augmentation: Vec<ComponentDoc>,
    pub m_free_index: Option<IndexDoc>,
    pub m_projective_index: Option<IndexDoc>,
    pub homology_witness: Vec<HomologyDoc>,
}

/// A single module with its group and ring, as read by `--module`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleFileDoc {
    pub schema: String,
    pub group: GroupSpec,
    pub ring: RingSpec,
    pub module: ModuleDoc,
}

pub fn matrix_doc(m: &Matrix) -> MatrixDoc {
    MatrixDoc { rows: m.rows(), cols: m.cols(), entries: m.to_rows() }
}

pub fn matrix_from_doc(ring: RingSpec, d: &MatrixDoc) -> Result<Matrix> {
    if d.entries.len() != d.rows {
        return Err(Error::Parse(format!("matrix declares {} rows but lists {}", d.rows, d.entries.len())));
    }
    Matrix::from_rows_with_cols(ring, &d.entries, d.cols)
}

pub fn signed_perm_doc(s: &SignedPerm) -> Vec<i64> {
    s.perm.iter().zip(&s.neg).map(|(&x, &n)| if n { -(x as i64 + 1) } else { x as i64 + 1 }).collect()
}

pub fn signed_perm_from_doc(v: &[i64]) -> Result<SignedPerm> {
    let n = v.len() as i64;
    let mut perm = Vec::with_capacity(v.len());
    let mut neg = Vec::with_capacity(v.len());
    for &x in v {
        if x == 0 || x.abs() > n {
            return Err(Error::MalformedPermutation(format!("signed image {x} out of range 1..={n}")));
        }
        perm.push((x.abs() - 1) as u32);
        neg.push(x < 0);
    }
    if !crate::group::is_permutation(&perm) {
        return Err(Error::MalformedPermutation(format!("{v:?} repeats an image")));
    }
    Ok(SignedPerm { perm, neg })
}

pub fn module_doc(m: &RGModule) -> ModuleDoc {
    let action = match m.action() {
        Action::Monomial(v) => ActionDoc::Monomial { generators: v.iter().map(signed_perm_doc).collect() },
        Action::Dense(v) => ActionDoc::Dense { generators: v.iter().map(matrix_doc).collect() },
    };
    let certificate = match m.certificate() {
        Certificate::Permutation(s) => TermCertificateDoc::Permutation { gset: s.action().to_vec() },
        Certificate::Free(s) => TermCertificateDoc::Free { gset: s.action().to_vec() },
        Certificate::Monomial(s) => {
            TermCertificateDoc::Monomial { set: s.action().iter().map(signed_perm_doc).collect() }
        }
        Certificate::Summand(s) => TermCertificateDoc::Summand {
            ambient: Box::new(module_doc(&s.ambient)),
            embedding: matrix_doc(&s.embedding),
            projection: matrix_doc(&s.projection),
        },
        Certificate::General => TermCertificateDoc::General,
    };
    ModuleDoc { rank: m.rank(), action, certificate }
}

/// Rebuilds a module; the action and certificate are checked on the way in.
pub fn module_from_doc(group: &Arc<Group>, ring: RingSpec, d: &ModuleDoc) -> Result<RGModule> {
    let action = match &d.action {
        ActionDoc::Monomial { generators } => {
            Action::Monomial(generators.iter().map(|v| signed_perm_from_doc(v)).collect::<Result<_>>()?)
        }
        ActionDoc::Dense { generators } => {
            Action::Dense(generators.iter().map(|m| matrix_from_doc(ring, m)).collect::<Result<_>>()?)
        }
    };
    let certificate = match &d.certificate {
        TermCertificateDoc::Permutation { gset } => Certificate::Permutation(GSet::new(d.rank, gset.clone())),
        TermCertificateDoc::Free { gset } => Certificate::Free(GSet::new(d.rank, gset.clone())),
        TermCertificateDoc::Monomial { set } => Certificate::Monomial(SignedGSet::new(
            d.rank,
            set.iter().map(|v| signed_perm_from_doc(v)).collect::<Result<_>>()?,
        )),
        TermCertificateDoc::Summand { ambient, embedding, projection } => {
            Certificate::Summand(Box::new(SummandData {
                ambient: module_from_doc(group, ring, ambient)?,
                embedding: matrix_from_doc(ring, embedding)?,
                projection: matrix_from_doc(ring, projection)?,
            }))
        }
        TermCertificateDoc::General => Certificate::General,
    };
    RGModule::new(group.clone(), ring, d.rank, action, certificate)
}

pub fn complex_doc(c: &ChainComplex) -> ComplexDoc {
    ComplexDoc {
        lo: c.lo(),
        terms: c.terms().iter().map(module_doc).collect(),
        differentials: c.differentials().iter().map(matrix_doc).collect(),
    }
}

pub fn complex_from_doc(group: &Arc<Group>, ring: RingSpec, d: &ComplexDoc) -> Result<ChainComplex> {
    let terms = d.terms.iter().map(|t| module_from_doc(group, ring, t)).collect::<Result<Vec<_>>>()?;
    let diffs = d.differentials.iter().map(|m| matrix_from_doc(ring, m)).collect::<Result<Vec<_>>>()?;
    if diffs.len() + 1 != terms.len().max(1) {
        return Err(Error::Parse(format!("{} terms need {} differentials", terms.len(), terms.len().saturating_sub(1))));
    }
    ChainComplex::new(group.clone(), ring, d.lo, terms, diffs)
}

fn index_doc(i: Option<i64>) -> Option<IndexDoc> {
    i.map(|m| if m == i64::MAX { IndexDoc::All(AllTerms::All) } else { IndexDoc::Degree(m) })
}

fn index_from_doc(i: Option<IndexDoc>) -> Option<i64> {
    i.map(|d| match d {
        IndexDoc::Degree(m) => m,
        IndexDoc::All(_) => i64::MAX,
    })
}

pub fn homology_doc(h: &HomologyReport) -> Vec<HomologyDoc> {
    h.groups
        .iter()
        .map(|g| HomologyDoc { degree: g.degree, rank: g.rank, torsion: g.torsion.iter().map(|t| t.to_string()).collect() })
        .collect()
}

pub fn certificate_doc(cert: &ResolutionCertificate) -> CertificateDoc {
    let p = &cert.complex;
    let augmentation = p
        .degrees()
        .filter(|&s| p.rank(s) > 0 || cert.target.rank(s) > 0)
        .map(|s| ComponentDoc { degree: s, matrix: matrix_doc(&cert.augmentation.comp(s)) })
        .collect();
    CertificateDoc {
        schema: SCHEMA.to_string(),
        group: p.group().spec(),
        ring: p.ring(),
        kind: cert.kind,
        complex: complex_doc(p),
        target: complex_doc(&cert.target),
        augmentation,
        m_free_index: index_doc(cert.m_free_index),
        m_projective_index: index_doc(cert.m_projective_index),
        homology_witness: homology_doc(&cert.homology_witness),
    }
}

/// Rebuilds the in-memory certificate, checking every object as it is built.
/// Use [`crate::verify::verify_document`] for a full verdict.
pub fn certificate_from_doc(d: &CertificateDoc) -> Result<ResolutionCertificate> {
    if d.schema != SCHEMA {
        return Err(Error::Parse(format!("unsupported schema {:?}", d.schema)));
    }
    d.ring.validate()?;
    let group = Arc::new(Group::from_spec(&d.group)?);
    let complex = complex_from_doc(&group, d.ring, &d.complex)?;
    let target = complex_from_doc(&group, d.ring, &d.target)?;
    let mut comps = Vec::new();
    for s in complex.degrees() {
        let m = match d.augmentation.iter().find(|c| c.degree == s) {
            Some(c) => matrix_from_doc(d.ring, &c.matrix)?,
            None => Matrix::zeros(d.ring, target.rank(s), complex.rank(s)),
        };
        comps.push(m);
    }
    let augmentation = ChainMap::new(complex.clone(), target.clone(), comps)?;
    let groups = d
        .homology_witness
        .iter()
        .map(|h| {
            let torsion = h
                .torsion
                .iter()
                .map(|t| t.parse::<BigInt>().map_err(|e| Error::Parse(format!("torsion {t:?}: {e}"))))
                .collect::<Result<_>>()?;
            Ok(HomologyGroup { degree: h.degree, rank: h.rank, torsion })
        })
        .collect::<Result<_>>()?;
    Ok(ResolutionCertificate {
        complex,
        target,
        augmentation,
        kind: d.kind,
        m_free_index: index_from_doc(d.m_free_index),
        m_projective_index: index_from_doc(d.m_projective_index),
        homology_witness: HomologyReport { ring: d.ring, groups },
    })
}

pub fn module_file_doc(m: &RGModule) -> ModuleFileDoc {
    ModuleFileDoc { schema: SCHEMA.to_string(), group: m.group().spec(), ring: m.ring(), module: module_doc(m) }
}

pub fn module_from_file_doc(d: &ModuleFileDoc) -> Result<RGModule> {
    if d.schema != SCHEMA {
        return Err(Error::Parse(format!("unsupported schema {:?}", d.schema)));
    }
    d.ring.validate()?;
    let group = Arc::new(Group::from_spec(&d.group)?);
    module_from_doc(&group, d.ring, &d.module)
}

/// Pretty JSON with a trailing newline; field order is fixed by the types.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::resolve::{resolve_trivial, Caps};

    #[test]
    fn signed_images() {
        let s = SignedPerm { perm: vec![1, 0], neg: vec![false, true] };
        assert_eq!(signed_perm_doc(&s), vec![2, -1]);
        assert_eq!(signed_perm_from_doc(&[2, -1]).unwrap(), s);
        assert!(signed_perm_from_doc(&[1, 1]).is_err());
        assert!(signed_perm_from_doc(&[0]).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let g = catalog::group("C4").unwrap();
        let cert = resolve_trivial(g, RingSpec::Integers, &Caps::default()).unwrap();
        let doc = certificate_doc(&cert);
        let text = to_json(&doc);
        let back: CertificateDoc = from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(certificate_from_doc(&back).unwrap(), cert);
        assert_eq!(to_json(&certificate_doc(&certificate_from_doc(&back).unwrap())), text);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"rows":1,"cols":1,"entries":[[1]],"extra":0}"#;
        assert!(from_json::<MatrixDoc>(text).is_err());
        assert!(from_json::<IndexDoc>("\"all\"").is_ok());
        assert!(from_json::<IndexDoc>("\"most\"").is_err());
    }
}
