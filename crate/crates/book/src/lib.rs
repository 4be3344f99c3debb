//! The chapters of the guide in `book/src`, included here so that their
//! snippets run under `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/forward-model.md")]
pub mod forward_model {}

#[doc = include_str!("../../../book/src/characterization.md")]
pub mod characterization {}

#[doc = include_str!("../../../book/src/motion.md")]
pub mod motion {}

#[doc = include_str!("../../../book/src/attacks.md")]
pub mod attacks {}

#[doc = include_str!("../../../book/src/benchmark.md")]
pub mod benchmark {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
