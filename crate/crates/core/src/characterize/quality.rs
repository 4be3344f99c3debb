use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Mean squared difference over all pixels and channels.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = a.len() as f64;
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n)
}

/// PSNR in dB against a peak of 1.0; infinite for identical images.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let r = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - r;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = taps.iter().sum();
    taps.map(|t| t / s)
}

/// Separable filtering over valid window positions only.
fn filter_valid(plane: &[f64], h: usize, w: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h - SSIM_WINDOW + 1, w - SSIM_WINDOW + 1);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = taps.iter().enumerate().map(|(k, t)| t * plane[r * w + c + k]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = taps.iter().enumerate().map(|(k, t)| t * rows[(r + k) * ow + c]).sum();
        }
    }
    out
}

fn ssim_plane(x: &[f64], y: &[f64], h: usize, w: usize) -> f64 {
    let taps = gaussian_taps();
    let c1 = (SSIM_K1 * 1.0f64).powi(2);
    let c2 = (SSIM_K2 * 1.0f64).powi(2);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mx = filter_valid(x, h, w, &taps);
    let my = filter_valid(y, h, w, &taps);
    let sxx = filter_valid(&xx, h, w, &taps);
    let syy = filter_valid(&yy, h, w, &taps);
    let sxy = filter_valid(&xy, h, w, &taps);
    let n = mx.len() as f64;
    (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum::<f64>()
        / n
}

/// SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03 and
/// dynamic range 1, averaged over valid window positions and then channels.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    if a.height() < SSIM_WINDOW || a.width() < SSIM_WINDOW {
        return Err(Error::Dimension(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {}x{}",
            a.height(),
            a.width()
        )));
    }
    let (h, w) = (a.height(), a.width());
    let total: f64 = (0..a.channels())
        .map(|c| ssim_plane(a.plane(c).data(), b.plane(c).data(), h, w))
        .sum();
    Ok(total / a.channels() as f64)
}

pub(crate) mod psnr_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad PSNR `{s}`"))),
        }
    }
}

/// Image-quality metrics of a degraded or restored image against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub ssim: f64,
    /// dB; serialized as `"inf"` for identical images.
    #[serde(with = "psnr_serde")]
    pub psnr: f64,
    pub mse: f64,
}

impl QualityReport {
    pub fn measure(reference: &Image, test: &Image) -> Result<Self> {
        let mse = mse(reference, test)?;
        Ok(Self {
            ssim: ssim(reference, test)?,
            psnr: psnr_from_mse(mse),
            mse,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(seed: u64, h: usize, w: usize, ch: usize) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_vec(h, w, ch, (0..h * w * ch).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn identical_images() {
        let x = noise(1, 20, 24, 3);
        assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);
    }

    #[test]
    fn constant_offset_closed_form() {
        let a = Image::filled(16, 16, 1, 0.0);
        let b = Image::filled(16, 16, 1, 0.1);
        assert!((mse(&a, &b).unwrap() - 0.01).abs() < 1e-15);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn ssim_is_symmetric() {
        let a = noise(2, 30, 30, 1);
        let b = noise(3, 30, 30, 1);
        assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch_and_small_images() {
        assert!(matches!(
            ssim(&Image::new(12, 12, 1), &Image::new(12, 13, 1)),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(mse(&Image::new(4, 4, 1), &Image::new(4, 4, 3)).is_err());
        assert!(matches!(
            ssim(&Image::new(8, 8, 1), &Image::new(8, 8, 1)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn report_serializes_infinite_psnr() {
        let x = noise(4, 12, 12, 1);
        let r = QualityReport::measure(&x, &x).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"psnr\":\"inf\""));
        let back: QualityReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.psnr, f64::INFINITY);
    }
}
