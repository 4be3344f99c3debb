use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conv::FftGrid;
use crate::error::{Error, Result};
use crate::optics::Psf;

/// Number of frequency steps between 0 and Nyquist in an MTF curve.
pub const MTF_SAMPLES: usize = 256;

/// One point of a modulation transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtfPoint {
    /// Cycles per pixel.
    pub frequency: f64,
    pub modulation: f64,
}

/// Radially averaged, DC-normalized magnitude of the kernel spectrum on `[0, 0.5]`.
///
/// The kernel is zero-padded to at least 512 samples per side, and each
/// radius is averaged over points on the half circle (the magnitude of a
/// real kernel's spectrum is point-symmetric), with bilinear interpolation
/// between FFT bins.
pub fn mtf_curve(psf: &Psf) -> Vec<MtfPoint> {
    let k = psf.kernel();
    let n = (4 * k.size()).max(512).next_power_of_two();
    let grid = FftGrid::new(n, n);
    let r = k.radius() as isize;
    let mut buf = vec![Complex64::default(); n * n];
    for a in 0..k.size() {
        let gr = (a as isize - r).rem_euclid(n as isize) as usize;
        for b in 0..k.size() {
            let gc = (b as isize - r).rem_euclid(n as isize) as usize;
            buf[gr * n + gc] = Complex64::new(k.at(a, b), 0.0);
        }
    }
    grid.forward(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let dc = mag[0];

    let sample = |fy: f64, fx: f64| -> f64 {
        let y = fy * n as f64;
        let x = fx * n as f64;
        let (y0, x0) = (y.floor(), x.floor());
        let (ty, tx) = (y - y0, x - x0);
        let idx = |yy: f64, xx: f64| {
            let yi = (yy as isize).rem_euclid(n as isize) as usize;
            let xi = (xx as isize).rem_euclid(n as isize) as usize;
            mag[yi * n + xi]
        };
        (1.0 - ty) * ((1.0 - tx) * idx(y0, x0) + tx * idx(y0, x0 + 1.0))
            + ty * ((1.0 - tx) * idx(y0 + 1.0, x0) + tx * idx(y0 + 1.0, x0 + 1.0))
    };

    (0..=MTF_SAMPLES)
        .map(|j| {
            let f = 0.5 * j as f64 / MTF_SAMPLES as f64;
            let modulation = if j == 0 {
                1.0
            } else {
                let steps = ((std::f64::consts::PI * f * n as f64).ceil() as usize).max(16);
                let total: f64 = (0..steps)
                    .map(|s| {
                        let theta = std::f64::consts::PI * (s as f64 + 0.5) / steps as f64;
                        sample(f * theta.sin(), f * theta.cos())
                    })
                    .sum();
                total / steps as f64 / dc
            };
            MtfPoint {
                frequency: f,
                modulation,
            }
        })
        .collect()
}

/// Frequency at which the MTF first falls to one half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mtf50 {
    /// Cycles per pixel; 0.5 (Nyquist) when the curve never falls to one half.
    pub frequency: f64,
    /// False when the curve stays above one half up to Nyquist.
    pub reached: bool,
}

pub fn mtf50_from_curve(curve: &[MtfPoint]) -> Mtf50 {
    for w in curve.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.modulation <= 0.5 {
            let t = if a.modulation == b.modulation {
                0.0
            } else {
                (a.modulation - 0.5) / (a.modulation - b.modulation)
            };
            return Mtf50 {
                frequency: a.frequency + t * (b.frequency - a.frequency),
                reached: true,
            };
        }
    }
    Mtf50 {
        frequency: 0.5,
        reached: false,
    }
}

pub fn mtf50(psf: &Psf) -> Mtf50 {
    mtf50_from_curve(&mtf_curve(psf))
}

/// Closed-form MTF50 of a Gaussian blur with standard deviation `sigma`.
pub fn gaussian_mtf50(sigma: f64) -> f64 {
    (std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI.powi(2) * sigma * sigma)).sqrt()
}

/// Fraction of kernel mass strictly outside the disc of `core_radius` around the center.
///
/// Accepts radii up to the distance of the kernel's corner pixel.
pub fn vgi(psf: &Psf, core_radius: f64) -> Result<f64> {
    let k = psf.kernel();
    let half = k.radius() as f64;
    let max = half * std::f64::consts::SQRT_2;
    if !(core_radius >= 0.0 && core_radius <= max) {
        return Err(Error::param(
            "core_radius",
            format!(
                "must lie in [0, {max:.3}] for a {0}x{0} kernel, got {core_radius}",
                k.size()
            ),
        ));
    }
    let r = k.radius() as isize;
    let r2 = core_radius * core_radius;
    let mut outside = 0.0;
    let mut total = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let w = k.at_offset(dy, dx);
            total += w;
            if ((dy * dy + dx * dx) as f64) > r2 {
                outside += w;
            }
        }
    }
    Ok(outside / total)
}
