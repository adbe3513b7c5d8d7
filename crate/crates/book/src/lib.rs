//! The guide's chapters, included so that `cargo test` runs their code samples.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/modules.md")]
pub mod modules {}

#[doc = include_str!("../../../book/src/complexes.md")]
pub mod complexes {}

#[doc = include_str!("../../../book/src/trivial.md")]
pub mod trivial {}

#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}

#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}

#[doc = include_str!("../../../book/src/grothendieck.md")]
pub mod grothendieck {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
