//! Keeps the guide in `book/` honest: every chapter is included here as a
//! doc comment, so its code fences run as doctests under `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/spaces.md")]
pub mod spaces {}

#[doc = include_str!("../../../book/src/sequences.md")]
pub mod sequences {}

#[doc = include_str!("../../../book/src/separated-sets.md")]
pub mod separated_sets {}

#[doc = include_str!("../../../book/src/pressure.md")]
pub mod pressure {}

#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}

#[doc = include_str!("../../../book/src/duality.md")]
pub mod duality {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
