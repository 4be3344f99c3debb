use crate::error::Result;
use crate::image::{to_grayscale, Image};
use crate::kernel::Kernel2D;
use crate::optics::Psf;

use super::deconv::{WienerConfig, WienerFilter};

/// Gaussian widths tried by the blind search.
pub const BLIND_SIGMAS: std::ops::RangeInclusive<u32> = 1..=15;
pub const BLIND_K: f64 = 1e-3;

/// Variance of the 4-neighbour Laplacian of the grayscale image over interior pixels.
pub fn laplacian_variance(img: &Image) -> f64 {
    let g = to_grayscale(img);
    let (h, w) = (g.height(), g.width());
    if h < 3 || w < 3 {
        return 0.0;
    }
    let d = g.data();
    let vals: Vec<f64> = (1..h - 1)
        .flat_map(|r| (1..w - 1).map(move |c| (r, c)))
        .map(|(r, c)| {
            let i = r * w + c;
            d[i - w] + d[i + w] + d[i - 1] + d[i + 1] - 4.0 * d[i]
        })
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Largest odd kernel side that both covers `4 sigma` and fits the frame.
fn blind_kernel(sigma: f64, height: usize, width: usize) -> Result<Kernel2D> {
    let want = 2 * (4.0 * sigma).ceil() as usize + 1;
    let limit = 2 * height.min(width) - 1;
    let limit = if limit.is_multiple_of(2) { limit - 1 } else { limit };
    Kernel2D::gaussian(want.min(limit), sigma)
}

/// Picks the Gaussian whose Wiener restoration of `y` is sharpest.
///
/// The attacker has no reference for brightness, so the returned PSF has
/// unit transmittance. Ties go to the smaller width.
pub fn estimate_kernel_blind(y: &Image) -> Result<Psf> {
    Ok(blind_search(y)?.0)
}

/// The chosen PSF together with its width.
pub fn blind_search(y: &Image) -> Result<(Psf, f64)> {
    let cfg = WienerConfig::new(BLIND_K)?;
    let mut best: Option<(f64, Psf, f64)> = None;
    for s in BLIND_SIGMAS {
        let sigma = s as f64;
        let psf = Psf::new(blind_kernel(sigma, y.height(), y.width())?, 1.0)?;
        let restored = WienerFilter::new(&psf, &cfg, y.height(), y.width())?.apply(y)?;
        let score = laplacian_variance(&restored);
        if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
            best = Some((score, psf, sigma));
        }
    }
    let (_, psf, sigma) = best.expect("at least one width");
    Ok((psf, sigma))
}
