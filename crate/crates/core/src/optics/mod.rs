//! Stochastic multi-layer scattering PSFs and the forward degradation model.
//!
//! A synthesized kernel is a mixture of three unit-mass components:
//!
//! * a residual core, a narrow Gaussian that keeps a shrinking share of the
//!   light near the optical axis,
//! * a broad glare halo whose width grows with the square root of the layer
//!   count,
//! * point speckles at seeded random offsets.
//!
//! Transmittance is carried outside the normalized kernel. Aging lowers it
//! linearly over the first 30 days and slides the speckles from one seeded
//! layout towards a second one. All tuning constants live in
//! [`ScatterModel`].

mod degrade;
mod spatial;
mod store;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel2D;
use crate::seed::SeedSpec;

pub use degrade::{degrade_clip, degrade_frame, degrade_frame_labeled, linear_response, noise_label, Degrader};
pub use spatial::{degrade_spatially_varying, SpatialPsfGrid};
pub use store::{load_psf, save_psf, PsfMetadata, PSF_BIN, PSF_JSON};

/// Days after which aging stops changing the film.
pub const AGING_HORIZON_DAYS: f64 = 30.0;
/// Fractional transmittance lost over the aging horizon.
pub const AGING_TRANSMITTANCE_LOSS: f64 = 0.266;

/// Physical and numerical knobs of one simulated capture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    pub layers: u32,
    pub age_days: f64,
    pub noise_sigma: f64,
    pub kernel_size: usize,
    /// Core radius used when reporting the veiling glare index.
    pub glare_core_radius: f64,
    pub seed: SeedSpec,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            layers: 10,
            age_days: 0.0,
            noise_sigma: 0.01,
            kernel_size: 127,
            glare_core_radius: 4.0,
            seed: SeedSpec::default(),
        }
    }
}

impl ScatterConfig {
    pub fn with_layers(layers: u32) -> Self {
        Self {
            layers,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size.is_multiple_of(2) {
            return Err(Error::param(
                "kernel_size",
                format!("must be odd, got {}", self.kernel_size),
            ));
        }
        if !(self.age_days >= 0.0) {
            return Err(Error::param("age_days", "must be nonnegative"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param("noise_sigma", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Constants of the generative PSF recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterModel {
    /// Halo standard deviation at one layer, pixels.
    pub halo_sigma_base: f64,
    /// Speckles added per layer.
    pub speckles_per_layer: f64,
    /// Speckle offset spread relative to the halo sigma.
    pub speckle_spread: f64,
    /// Share of the non-core mass carried by speckles.
    pub speckle_fraction: f64,
    /// Core mass is `exp(-core_decay * layers)`.
    pub core_decay: f64,
    /// Core sigma is `core_sigma_per_sqrt_layer * sqrt(layers)`.
    pub core_sigma_per_sqrt_layer: f64,
    /// Transmittance of one fresh layer.
    pub layer_transmittance: f64,
    /// Per-channel (R, G, B) gain reached at ten layers.
    pub channel_gain_at_ten: [f64; 3],
}

impl Default for ScatterModel {
    fn default() -> Self {
        Self {
            halo_sigma_base: 6.5,
            speckles_per_layer: 6.0,
            speckle_spread: 1.0,
            speckle_fraction: 0.25,
            core_decay: 0.11,
            core_sigma_per_sqrt_layer: 0.6,
            layer_transmittance: 0.97,
            channel_gain_at_ten: [1.0, 0.97, 0.92],
        }
    }
}

impl ScatterModel {
    pub fn halo_sigma(&self, layers: u32) -> f64 {
        self.halo_sigma_base * (layers.max(1) as f64).sqrt()
    }

    pub fn speckle_count(&self, layers: u32) -> usize {
        (self.speckles_per_layer * layers as f64).ceil() as usize
    }

    pub fn core_mass(&self, layers: u32) -> f64 {
        (-self.core_decay * layers as f64).exp()
    }

    pub fn core_sigma(&self, layers: u32) -> f64 {
        self.core_sigma_per_sqrt_layer * (layers as f64).sqrt()
    }

    /// `layer_transmittance^L * (1 - 0.266 * min(age, 30) / 30)`; exactly 1 without film.
    pub fn transmittance(&self, layers: u32, age_days: f64) -> f64 {
        if layers == 0 {
            return 1.0;
        }
        let age = age_days.clamp(0.0, AGING_HORIZON_DAYS);
        self.layer_transmittance.powi(layers as i32) * (1.0 - AGING_TRANSMITTANCE_LOSS * age / AGING_HORIZON_DAYS)
    }

    pub fn channel_gain(&self, layers: u32) -> [f64; 3] {
        let e = layers as f64 / 10.0;
        self.channel_gain_at_ten.map(|g| g.powf(e))
    }
}

/// A normalized, nonnegative kernel plus transmittance and per-channel gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Psf {
    kernel: Kernel2D,
    transmittance: f64,
    channel_gain: [f64; 3],
}

impl Psf {
    pub fn new(kernel: Kernel2D, transmittance: f64) -> Result<Self> {
        Self::with_channel_gain(kernel, transmittance, [1.0; 3])
    }

    pub fn with_channel_gain(kernel: Kernel2D, transmittance: f64, channel_gain: [f64; 3]) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::param(
                "transmittance",
                format!("must lie in (0, 1], got {transmittance}"),
            ));
        }
        if kernel.weights().iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::param("kernel", "weights must be finite and nonnegative"));
        }
        let sum = kernel.sum();
        if !(sum > 0.0) {
            return Err(Error::param("kernel", "weights sum to zero"));
        }
        // already-normalized kernels are kept bit-for-bit
        let kernel = if (sum - 1.0).abs() > 1e-12 {
            kernel.normalized()
        } else {
            kernel
        };
        Ok(Self {
            kernel,
            transmittance,
            channel_gain,
        })
    }

    pub fn delta(size: usize) -> Result<Self> {
        Self::new(Kernel2D::delta(size)?, 1.0)
    }

    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        Self::new(Kernel2D::gaussian(size, sigma)?, 1.0)
    }

    pub fn kernel(&self) -> &Kernel2D {
        &self.kernel
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn channel_gain(&self) -> [f64; 3] {
        self.channel_gain
    }

    /// Overall gain applied to channel `c` of an image with `channels` channels.
    pub fn gain_for(&self, c: usize, channels: usize) -> f64 {
        if channels == 3 {
            self.transmittance * self.channel_gain[c]
        } else {
            self.transmittance
        }
    }
}

struct SpeckleLayout {
    offsets: Vec<(f64, f64)>,
    amplitudes: Vec<f64>,
}

fn speckle_layout(seed: &SeedSpec, label: &str, count: usize) -> SpeckleLayout {
    let mut rng = seed.stream(label);
    let mut offsets = Vec::with_capacity(count);
    let mut amplitudes = Vec::with_capacity(count);
    for _ in 0..count {
        let dy: f64 = StandardNormal.sample(&mut rng);
        let dx: f64 = StandardNormal.sample(&mut rng);
        let a: f64 = Exp1.sample(&mut rng);
        // keep a little randomness in the tail so that layouts differ in shape
        let jitter: f64 = rng.random_range(0.8..1.2);
        offsets.push((dy * jitter, dx * jitter));
        amplitudes.push(a + 0.05);
    }
    SpeckleLayout { offsets, amplitudes }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Deposits `mass` at a sub-pixel offset with bilinear weights.
fn splat(weights: &mut [f64], size: usize, dy: f64, dx: f64, mass: f64) {
    let r = (size / 2) as f64;
    let (y, x) = (dy + r, dx + r);
    let (y0, x0) = (y.floor(), x.floor());
    let (fy, fx) = (y - y0, x - x0);
    for (oy, wy) in [(0.0, 1.0 - fy), (1.0, fy)] {
        for (ox, wx) in [(0.0, 1.0 - fx), (1.0, fx)] {
            let (yy, xx) = (y0 + oy, x0 + ox);
            if yy >= 0.0 && xx >= 0.0 && (yy as usize) < size && (xx as usize) < size {
                weights[yy as usize * size + xx as usize] += mass * wy * wx;
            }
        }
    }
}

/// Synthesizes a PSF with the default [`ScatterModel`].
pub fn synthesize_psf(cfg: &ScatterConfig) -> Result<Psf> {
    synthesize_psf_with(cfg, &ScatterModel::default())
}

pub fn synthesize_psf_with(cfg: &ScatterConfig, model: &ScatterModel) -> Result<Psf> {
    if cfg.kernel_size.is_multiple_of(2) {
        return Err(Error::param(
            "kernel_size",
            format!("must be odd, got {}", cfg.kernel_size),
        ));
    }
    if !(cfg.age_days >= 0.0) {
        return Err(Error::param("age_days", "must be nonnegative"));
    }
    let size = cfg.kernel_size;
    if cfg.layers == 0 {
        return Psf::delta(size);
    }
    let l = cfg.layers;

    let core = Kernel2D::gaussian(size, model.core_sigma(l).max(1e-3))?;
    let halo = Kernel2D::gaussian(size, model.halo_sigma(l))?;

    let n = model.speckle_count(l);
    let spread = model.speckle_spread * model.halo_sigma(l);
    let fresh = speckle_layout(&cfg.seed, "psf/speckle/fresh", n);
    let aged = speckle_layout(&cfg.seed, "psf/speckle/aged", n);
    let w = smoothstep(cfg.age_days / AGING_HORIZON_DAYS);
    let limit = (size / 2) as f64 - 1.0;
    let mut speckles = vec![0.0; size * size];
    for i in 0..n {
        let (ay, ax) = fresh.offsets[i];
        let (by, bx) = aged.offsets[i];
        let dy = (((1.0 - w) * ay + w * by) * spread).clamp(-limit, limit);
        let dx = (((1.0 - w) * ax + w * bx) * spread).clamp(-limit, limit);
        splat(&mut speckles, size, dy, dx, fresh.amplitudes[i]);
    }
    let speckle_sum: f64 = speckles.iter().sum();

    let c = model.core_mass(l);
    let s = (1.0 - c) * model.speckle_fraction;
    let h = 1.0 - c - s;
    let weights: Vec<f64> = (0..size * size)
        .map(|i| c * core.weights()[i] + h * halo.weights()[i] + s * speckles[i] / speckle_sum)
        .collect();
    let kernel = Kernel2D::new(size, weights)?.normalized();

    Psf::with_channel_gain(kernel, model.transmittance(l, cfg.age_days), model.channel_gain(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(layers: u32, age: f64) -> ScatterConfig {
        ScatterConfig {
            layers,
            age_days: age,
            ..ScatterConfig::default()
        }
    }

    #[test]
    fn zero_layers_is_identity_optics() {
        let psf = synthesize_psf(&cfg(0, 12.0)).unwrap();
        assert_eq!(psf.transmittance(), 1.0);
        assert_eq!(psf.kernel(), &Kernel2D::delta(127).unwrap());
        assert_eq!(psf.channel_gain(), [1.0; 3]);
    }

    #[test]
    fn thirty_day_transmittance_factor() {
        let fresh = synthesize_psf(&cfg(10, 0.0)).unwrap().transmittance();
        let old = synthesize_psf(&cfg(10, 30.0)).unwrap().transmittance();
        assert!((old / fresh - 0.734).abs() < 1e-12);
        // saturates after the horizon
        let older = synthesize_psf(&cfg(10, 90.0)).unwrap().transmittance();
        assert_eq!(old, older);
    }

    #[test]
    fn even_kernel_size_rejected() {
        let mut c = cfg(4, 0.0);
        c.kernel_size = 64;
        assert!(synthesize_psf(&c).is_err());
    }

    #[test]
    fn kernels_are_normalized_and_nonnegative() {
        for l in [1, 2, 5, 10, 12] {
            let psf = synthesize_psf(&cfg(l, 7.0)).unwrap();
            assert!((psf.kernel().sum() - 1.0).abs() < 1e-9);
            assert!(psf.kernel().weights().iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let a = synthesize_psf(&cfg(8, 3.0)).unwrap();
        let b = synthesize_psf(&cfg(8, 3.0)).unwrap();
        assert_eq!(a, b);
        let mut other = cfg(8, 3.0);
        other.seed = SeedSpec::new(99);
        assert_ne!(a, synthesize_psf(&other).unwrap());
    }

    #[test]
    fn aging_drifts_the_kernel() {
        let fresh = synthesize_psf(&cfg(10, 0.0)).unwrap();
        let old = synthesize_psf(&cfg(10, 30.0)).unwrap();
        let d = fresh.kernel().relative_l2_distance(old.kernel());
        assert!(d > 0.05, "drift {d}");
        assert!((old.kernel().sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn psf_rejects_bad_transmittance() {
        let k = Kernel2D::delta(3).unwrap();
        assert!(Psf::new(k.clone(), 0.0).is_err());
        assert!(Psf::new(k.clone(), 1.5).is_err());
        assert!(Psf::new(k, 1.0).is_ok());
    }
}
