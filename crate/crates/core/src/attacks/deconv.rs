use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conv::Convolver;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::optics::Psf;

/// Regularization sweep used by the calibrated Wiener attack.
pub const WIENER_K_SWEEP: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Iteration counts reported for Richardson-Lucy.
pub const RL_ITERATION_SWEEP: [usize; 3] = [5, 10, 20];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerConfig {
    /// Constant noise-to-signal ratio; must be positive.
    pub k: f64,
}

impl WienerConfig {
    pub fn new(k: f64) -> Result<Self> {
        let cfg = Self { k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::param(
                "k",
                format!("must be positive and finite, got {}", self.k),
            ));
        }
        Ok(())
    }
}

impl Default for WienerConfig {
    fn default() -> Self {
        Self { k: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RlConfig {
    pub iterations: usize,
    /// Added to the re-blurred estimate before dividing.
    pub epsilon: f64,
}

impl Default for RlConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            epsilon: 1e-12,
        }
    }
}

impl RlConfig {
    pub fn new(iterations: usize) -> Result<Self> {
        let cfg = Self {
            iterations,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", "must be positive"));
        }
        Ok(())
    }
}

fn scale_channels(img: &Image, psf: &Psf, f: impl Fn(f64, f64) -> f64) -> Image {
    let ch = img.channels();
    let gains: Vec<f64> = (0..ch).map(|c| psf.gain_for(c, ch)).collect();
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| f(v, gains[i % ch]))
        .collect();
    Image::from_vec(img.height(), img.width(), ch, data).expect("same shape")
}

/// Wiener filter bound to one PSF and frame size, reusable across frames.
#[derive(Debug, Clone)]
pub struct WienerFilter {
    psf: Psf,
    conv: Convolver,
    transfer: Vec<Complex64>,
}

impl WienerFilter {
    pub fn new(psf: &Psf, cfg: &WienerConfig, height: usize, width: usize) -> Result<Self> {
        cfg.validate()?;
        let conv = Convolver::new(psf.kernel(), height, width)?;
        let transfer = conv
            .spectrum()
            .iter()
            .map(|h| h.conj() / (h.norm_sqr() + cfg.k))
            .collect();
        Ok(Self {
            psf: psf.clone(),
            conv,
            transfer,
        })
    }

    /// Restores one frame: filter, divide by the channel gain, clamp.
    pub fn apply(&self, y: &Image) -> Result<Image> {
        let x = self.conv.filter(y, &self.transfer)?;
        Ok(scale_channels(&x, &self.psf, |v, g| v / g).clamped())
    }
}

/// `Y conj(H) / (|H|^2 + K)` on the reflect-padded grid, then `/ tau`, clamped.
pub fn wiener_deconvolve(y: &Image, psf: &Psf, cfg: &WienerConfig) -> Result<Image> {
    WienerFilter::new(psf, cfg, y.height(), y.width())?.apply(y)
}

/// Richardson-Lucy bound to one PSF and frame size.
#[derive(Debug, Clone)]
pub struct RichardsonLucy {
    psf: Psf,
    conv: Convolver,
    epsilon: f64,
}

impl RichardsonLucy {
    pub fn new(psf: &Psf, epsilon: f64, height: usize, width: usize) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::param("epsilon", "must be positive"));
        }
        Ok(Self {
            psf: psf.clone(),
            conv: Convolver::new(psf.kernel(), height, width)?,
            epsilon,
        })
    }

    /// Unclamped iterates after each count in `checkpoints` (ascending).
    pub fn run(&self, y: &Image, checkpoints: &[usize]) -> Result<Vec<Image>> {
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("checkpoints", "must be strictly increasing"));
        }
        if y.data().iter().any(|&v| v < 0.0) {
            return Err(Error::param("y", "Richardson-Lucy needs a nonnegative image"));
        }
        let last = checkpoints.last().copied().unwrap_or(0);
        let mut x = scale_channels(y, &self.psf, |v, g| v / g);
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut next = checkpoints.iter().peekable();
        for it in 1..=last {
            let kx = self.conv.apply(&x)?;
            let ratio = y.zip_map(&scale_channels(&kx, &self.psf, |v, g| g * v), |yy, b| {
                yy / (b + self.epsilon)
            })?;
            let corr = self.conv.adjoint(&ratio)?;
            // the FFT can leave -1e-17 where the exact value is zero
            x = x.zip_map(&corr, |a, c| (a * c).max(0.0))?;
            if !x.data().iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite Richardson-Lucy iterate at step {it}"
                )));
            }
            if next.peek() == Some(&&it) {
                out.push(x.clone());
                next.next();
            }
        }
        Ok(out)
    }
}

/// Multiplicative updates `x <- x * K'(y / (tau K x + eps))` starting at `y / tau`.
///
/// `K'` is the exact transpose of the mirror-padded blur, so the total
/// intensity of every iterate equals that of `y / tau` up to `eps`. For
/// centro-symmetric kernels it coincides with convolving by the flipped
/// kernel. The result is clamped only when emitted.
pub fn richardson_lucy(y: &Image, psf: &Psf, cfg: &RlConfig) -> Result<Image> {
    cfg.validate()?;
    let rl = RichardsonLucy::new(psf, cfg.epsilon, y.height(), y.width())?;
    Ok(rl.run(y, &[cfg.iterations])?.remove(0).clamped())
}

/// Unclamped iterate after `iterations` steps; exposes flux and sign for checks.
pub fn richardson_lucy_raw(y: &Image, psf: &Psf, cfg: &RlConfig) -> Result<Image> {
    cfg.validate()?;
    let rl = RichardsonLucy::new(psf, cfg.epsilon, y.height(), y.width())?;
    Ok(rl.run(y, &[cfg.iterations])?.remove(0))
}
