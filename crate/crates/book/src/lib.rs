//! Every listing in `book/src` runs as a doc-test of this crate, so
//! `cargo test --workspace` keeps the guide in step with the library.
//! mdbook itself cannot link against workspace crates.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/meshes.md")]
pub mod meshes {}

#[doc = include_str!("../../../book/src/finite-elements.md")]
pub mod finite_elements {}

#[doc = include_str!("../../../book/src/spectral-functions.md")]
pub mod spectral_functions {}

#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}

#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
