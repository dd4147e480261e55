//! Runs the listings of the book as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/lattice.md")]
pub mod lattice {}
#[doc = include_str!("../../../book/src/bands.md")]
pub mod bands {}
#[doc = include_str!("../../../book/src/zak.md")]
pub mod zak {}
#[doc = include_str!("../../../book/src/semimetals.md")]
pub mod semimetals {}
#[doc = include_str!("../../../book/src/finite.md")]
pub mod finite {}
#[doc = include_str!("../../../book/src/phases.md")]
pub mod phases {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
