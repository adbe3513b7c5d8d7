//! Finite permutation resolutions over group algebras, with independently
//! checkable certificates and Grothendieck-group audits.
//!
//! Coefficients are `GF(p)` or `ℤ`, groups are finite permutation groups and
//! modules are finite-rank representations given by one matrix per group
//! generator. Vectors are columns and `ρ(gh) = ρ(g)·ρ(h)`.

pub mod catalog;
pub mod complex;
pub mod error;
pub mod gmodule;
pub mod grothendieck;
pub mod group;
pub mod io;
pub mod koszul;
pub mod resolve;
pub mod ring;
pub mod search;
pub mod signfix;
pub mod verify;

pub use error::{Error, Result};
pub use gmodule::{Certificate, GSet, ModuleMap, RGModule, SignedGSet};
pub use group::{Group, Subgroup};
pub use ring::{Matrix, RingSpec};
