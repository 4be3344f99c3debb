//! Simulation and benchmarking toolkit for scattering-film privacy cameras.
//!
//! The crate models a multi-layer scattering film as a forward operator
//! `y = tau * (x * k) + n`, extracts frame-difference motion features that
//! survive the scattering, mounts deconvolution and learned-restoration
//! attacks against it, and measures the resulting privacy/utility trade-off
//! on a synthetic action/identity benchmark.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod bench;
pub mod characterize;
pub mod config;
pub mod conv;
pub mod error;
pub mod image;
pub mod io;
pub mod kernel;
pub mod motion;
pub mod optics;
pub mod seed;
pub mod testset;

pub use crate::error::{Error, Result};
pub use crate::image::{to_grayscale, Image, VideoClip};
pub use crate::kernel::Kernel2D;
pub use crate::seed::SeedSpec;
