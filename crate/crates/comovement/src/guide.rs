//! The book chapters from `book/src`, compiled here so that every code
//! snippet in the guide runs under `cargo test --doc` and cannot drift from
//! the library. mdBook renders the same files; this module renders them as
//! rustdoc pages.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/decomposition.md")]
pub mod decomposition {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/exact-oracle.md")]
pub mod exact_oracle {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/finance.md")]
pub mod finance {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
