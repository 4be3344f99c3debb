use rand_distr::{Distribution, Normal};

use super::Psf;
use crate::conv::Convolver;
use crate::error::{Error, Result};
use crate::image::{Image, VideoClip};
use crate::seed::SeedSpec;

/// A PSF bound to one frame size, so the kernel spectrum is computed once.
#[derive(Debug, Clone)]
pub struct Degrader {
    psf: Psf,
    conv: Convolver,
}

impl Degrader {
    pub fn new(psf: &Psf, height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            psf: psf.clone(),
            conv: Convolver::new(psf.kernel(), height, width)?,
        })
    }

    pub fn psf(&self) -> &Psf {
        &self.psf
    }

    pub fn convolver(&self) -> &Convolver {
        &self.conv
    }

    /// `tau * gain_c * (x * k)` before noise and clamping.
    pub fn linear(&self, x: &Image) -> Result<Image> {
        let mut y = self.conv.apply(x)?;
        let ch = y.channels();
        for (i, v) in y.data_mut().iter_mut().enumerate() {
            *v *= self.psf.gain_for(i % ch, ch);
        }
        Ok(y)
    }

    pub fn degrade(&self, x: &Image, noise_sigma: f64, seed: &SeedSpec, label: &str) -> Result<Image> {
        let mut y = self.linear(x)?;
        add_noise(&mut y, noise_sigma, seed, label)?;
        Ok(y.clamped())
    }

    pub fn degrade_clip(&self, v: &VideoClip, noise_sigma: f64, seed: &SeedSpec) -> Result<VideoClip> {
        let frames = v
            .frames()
            .iter()
            .enumerate()
            .map(|(t, f)| self.degrade(f, noise_sigma, seed, &noise_label(t)))
            .collect::<Result<Vec<_>>>()?;
        VideoClip::new(frames, v.frame_rate())
    }
}

/// Noise stream label of frame `t` (0-based).
pub fn noise_label(t: usize) -> String {
    format!("noise/frame/{t}")
}

pub(crate) fn add_noise(y: &mut Image, sigma: f64, seed: &SeedSpec, label: &str) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|_| Error::param("noise_sigma", format!("must be finite and >= 0, got {sigma}")))?;
    let mut rng = seed.stream(label);
    for v in y.data_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

/// The noiseless, unclamped response `tau * (x * k)`.
pub fn linear_response(x: &Image, psf: &Psf) -> Result<Image> {
    Degrader::new(psf, x.height(), x.width())?.linear(x)
}

/// `clamp(tau * (x * k) + n)` with noise from the stream `noise/frame/0`.
pub fn degrade_frame(x: &Image, psf: &Psf, noise_sigma: f64, seed: &SeedSpec) -> Result<Image> {
    degrade_frame_labeled(x, psf, noise_sigma, seed, &noise_label(0))
}

pub fn degrade_frame_labeled(x: &Image, psf: &Psf, noise_sigma: f64, seed: &SeedSpec, label: &str) -> Result<Image> {
    Degrader::new(psf, x.height(), x.width())?.degrade(x, noise_sigma, seed, label)
}

/// Same PSF for every frame, fresh noise per frame index.
pub fn degrade_clip(v: &VideoClip, psf: &Psf, noise_sigma: f64, seed: &SeedSpec) -> Result<VideoClip> {
    Degrader::new(psf, v.height(), v.width())?.degrade_clip(v, noise_sigma, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::convolve_direct;
    use crate::kernel::Kernel2D;
    use crate::optics::{synthesize_psf, ScatterConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, h: usize, w: usize) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_vec(h, w, 1, (0..h * w).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn delta_psf_without_noise_is_identity() {
        let x = random_image(1, 12, 12);
        let y = degrade_frame(&x, &Psf::delta(5).unwrap(), 0.0, &SeedSpec::new(1)).unwrap();
        assert!(y.max_abs_diff(&x).unwrap() < 1e-12);
    }

    #[test]
    fn constant_image_scaled_by_transmittance() {
        let x = Image::filled(10, 10, 1, 0.8);
        let psf = Psf::new(Kernel2D::gaussian(7, 1.5).unwrap(), 0.5).unwrap();
        let y = degrade_frame(&x, &psf, 0.0, &SeedSpec::new(1)).unwrap();
        assert!(y.data().iter().all(|v| (v - 0.4).abs() < 1e-12));
    }

    #[test]
    fn difference_of_degradations_is_filtered_difference() {
        let psf = Psf::new(Kernel2D::gaussian(9, 2.0).unwrap(), 0.6).unwrap();
        let a = random_image(2, 16, 16);
        let b = random_image(3, 16, 16);
        let ya = linear_response(&a, &psf).unwrap();
        let yb = linear_response(&b, &psf).unwrap();
        let diff = a.zip_map(&b, |p, q| p - q).unwrap();
        let expect = convolve_direct(&diff, psf.kernel()).unwrap().map(|v| 0.6 * v);
        let got = ya.zip_map(&yb, |p, q| p - q).unwrap();
        assert!(got.max_abs_diff(&expect).unwrap() < 1e-9);
    }

    #[test]
    fn one_frame_clip_matches_frame() {
        let x = random_image(4, 8, 8);
        let psf = Psf::new(Kernel2D::gaussian(5, 1.0).unwrap(), 0.9).unwrap();
        let seed = SeedSpec::new(5);
        let clip = VideoClip::new(vec![x.clone()], 30.0).unwrap();
        let yc = degrade_clip(&clip, &psf, 0.05, &seed).unwrap();
        let yf = degrade_frame(&x, &psf, 0.05, &seed).unwrap();
        assert_eq!(yc.frame(0), &yf);
    }

    #[test]
    fn static_clip_is_time_invariant_without_noise() {
        let x = random_image(6, 20, 20);
        let clip = VideoClip::new(vec![x; 5], 30.0).unwrap();
        let mut c = ScatterConfig::with_layers(6);
        c.kernel_size = 31;
        let psf = synthesize_psf(&c).unwrap();
        let y = degrade_clip(&clip, &psf, 0.0, &SeedSpec::new(1)).unwrap();
        for f in y.frames() {
            assert_eq!(f, y.frame(0));
        }
    }

    #[test]
    fn per_pixel_noise_std_matches_sigma() {
        let sigma = 0.05;
        let clip = VideoClip::new(vec![Image::filled(6, 6, 1, 0.5); 64], 30.0).unwrap();
        let y = degrade_clip(&clip, &Psf::delta(3).unwrap(), sigma, &SeedSpec::new(8)).unwrap();
        let n = y.len() as f64;
        let mut total = 0.0;
        for p in 0..36 {
            let vals: Vec<f64> = y.frames().iter().map(|f| f.data()[p]).collect();
            let m = vals.iter().sum::<f64>() / n;
            total += (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        }
        let sd = total / 36.0;
        assert!((sd - sigma).abs() < 0.1 * sigma, "mean per-pixel std {sd}");
    }

    #[test]
    fn color_channels_get_spectral_gain() {
        let x = Image::filled(6, 6, 3, 0.5);
        let psf = Psf::with_channel_gain(Kernel2D::delta(3).unwrap(), 0.8, [1.0, 0.9, 0.5]).unwrap();
        let y = linear_response(&x, &psf).unwrap();
        assert!((y.get(2, 2, 0) - 0.4).abs() < 1e-12);
        assert!((y.get(2, 2, 1) - 0.36).abs() < 1e-12);
        assert!((y.get(2, 2, 2) - 0.2).abs() < 1e-12);
    }
}
