use super::degrade::{add_noise, noise_label};
use super::Psf;
use crate::conv::Convolver;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::Kernel2D;
use crate::seed::SeedSpec;

/// Blocks per side used when degrading with a spatially varying PSF.
pub const BLOCKS_PER_SIDE: usize = 8;

/// Five calibrated PSFs (center and corners) for one image extent.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialPsfGrid {
    pub center: Psf,
    pub top_left: Psf,
    pub top_right: Psf,
    pub bottom_left: Psf,
    pub bottom_right: Psf,
    pub height: usize,
    pub width: usize,
}

impl SpatialPsfGrid {
    pub fn new(center: Psf, corners: [Psf; 4], height: usize, width: usize) -> Result<Self> {
        let [top_left, top_right, bottom_left, bottom_right] = corners;
        let size = center.kernel().size();
        for p in [&top_left, &top_right, &bottom_left, &bottom_right] {
            if p.kernel().size() != size {
                return Err(Error::Dimension(format!(
                    "all grid kernels must be {size}x{size}, found {}",
                    p.kernel().size()
                )));
            }
        }
        Ok(Self {
            center,
            top_left,
            top_right,
            bottom_left,
            bottom_right,
            height,
            width,
        })
    }

    pub fn uniform(psf: Psf, height: usize, width: usize) -> Self {
        Self {
            top_left: psf.clone(),
            top_right: psf.clone(),
            bottom_left: psf.clone(),
            bottom_right: psf.clone(),
            center: psf,
            height,
            width,
        }
    }

    /// Interpolation weights (center, tl, tr, bl, br) at normalized position `(v, u)` in `[0,1]^2`.
    ///
    /// The center weight is a tent peaking at the middle; the remainder is
    /// shared bilinearly between the corners, so the weights are nonnegative
    /// and sum to one.
    pub fn weights_at(v: f64, u: f64) -> [f64; 5] {
        let wc = (1.0 - (2.0 * u - 1.0).abs()) * (1.0 - (2.0 * v - 1.0).abs());
        let rest = 1.0 - wc;
        [
            wc,
            rest * (1.0 - v) * (1.0 - u),
            rest * (1.0 - v) * u,
            rest * v * (1.0 - u),
            rest * v * u,
        ]
    }

    /// PSF interpolated at normalized position `(v, u)`.
    pub fn psf_at(&self, v: f64, u: f64) -> Result<Psf> {
        let w = Self::weights_at(v, u);
        let psfs = [
            &self.center,
            &self.top_left,
            &self.top_right,
            &self.bottom_left,
            &self.bottom_right,
        ];
        let size = self.center.kernel().size();
        let mut weights = vec![0.0; size * size];
        let mut tau = 0.0;
        let mut gain = [0.0; 3];
        for (p, &wi) in psfs.iter().zip(&w) {
            for (acc, k) in weights.iter_mut().zip(p.kernel().weights()) {
                *acc += wi * k;
            }
            tau += wi * p.transmittance();
            for (g, pg) in gain.iter_mut().zip(p.channel_gain()) {
                *g += wi * pg;
            }
        }
        Psf::with_channel_gain(Kernel2D::new(size, weights)?, tau.min(1.0), gain)
    }
}

/// Bilinear weights between neighbouring block centers along one axis.
fn axis_blend(pos: usize, extent: usize, blocks: usize) -> [(usize, f64); 2] {
    let cell = extent as f64 / blocks as f64;
    let g = ((pos as f64 + 0.5) / cell - 0.5).clamp(0.0, (blocks - 1) as f64);
    let i0 = g.floor() as usize;
    let i1 = (i0 + 1).min(blocks - 1);
    let f = g - i0 as f64;
    [(i0, 1.0 - f), (i1, f)]
}

/// Block-wise degradation with per-block PSFs interpolated from the grid.
///
/// Each of the 8x8 blocks is convolved with the PSF interpolated at its
/// center; the block responses are cross-faded linearly between block
/// centers so there are no seams.
pub fn degrade_spatially_varying(x: &Image, grid: &SpatialPsfGrid, noise_sigma: f64, seed: &SeedSpec) -> Result<Image> {
    if grid.height != x.height() || grid.width != x.width() {
        return Err(Error::ShapeMismatch {
            left: format!("grid {}x{}", grid.height, grid.width),
            right: format!("image {}x{}", x.height(), x.width()),
        });
    }
    let (h, w, ch) = (x.height(), x.width(), x.channels());
    let nb = BLOCKS_PER_SIDE;
    let mut responses = Vec::with_capacity(nb * nb);
    for by in 0..nb {
        for bx in 0..nb {
            let v = (by as f64 + 0.5) / nb as f64;
            let u = (bx as f64 + 0.5) / nb as f64;
            let psf = grid.psf_at(v, u)?;
            let mut y = Convolver::new(psf.kernel(), h, w)?.apply(x)?;
            for (i, val) in y.data_mut().iter_mut().enumerate() {
                *val *= psf.gain_for(i % ch, ch);
            }
            responses.push(y);
        }
    }
    let mut out = Image::new(h, w, ch);
    for r in 0..h {
        let rows = axis_blend(r, h, nb);
        for c in 0..w {
            let cols = axis_blend(c, w, nb);
            for k in 0..ch {
                let mut acc = 0.0;
                for &(by, wy) in &rows {
                    for &(bx, wx) in &cols {
                        let wgt = wy * wx;
                        if wgt != 0.0 {
                            acc += wgt * responses[by * nb + bx].get(r, c, k);
                        }
                    }
                }
                out.set(r, c, k, acc);
            }
        }
    }
    add_noise(&mut out, noise_sigma, seed, &noise_label(0))?;
    Ok(out.clamped())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::degrade_frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn texture(h: usize, w: usize) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        Image::from_vec(h, w, 1, (0..h * w).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    fn laplacian_variance(img: &Image, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        let mut vals = Vec::new();
        for r in r0.max(1)..r1.min(img.height() - 1) {
            for c in c0.max(1)..c1.min(img.width() - 1) {
                let l = img.get(r - 1, c, 0) + img.get(r + 1, c, 0) + img.get(r, c - 1, 0) + img.get(r, c + 1, 0)
                    - 4.0 * img.get(r, c, 0);
                vals.push(l);
            }
        }
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn weights_are_a_partition_of_unity() {
        for (v, u) in [(0.0, 0.0), (0.5, 0.5), (0.2, 0.9), (1.0, 0.3)] {
            let w = SpatialPsfGrid::weights_at(v, u);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
        assert_eq!(SpatialPsfGrid::weights_at(0.5, 0.5)[0], 1.0);
        assert_eq!(SpatialPsfGrid::weights_at(0.0, 1.0)[2], 1.0);
    }

    #[test]
    fn identical_grid_matches_uniform_degradation() {
        let x = texture(40, 48);
        let psf = Psf::new(Kernel2D::gaussian(9, 1.7).unwrap(), 0.8).unwrap();
        let grid = SpatialPsfGrid::uniform(psf.clone(), 40, 48);
        let seed = SeedSpec::new(3);
        let a = degrade_spatially_varying(&x, &grid, 0.02, &seed).unwrap();
        let b = degrade_frame(&x, &psf, 0.02, &seed).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-6);
    }

    #[test]
    fn delta_grid_is_identity() {
        let x = texture(32, 32);
        let grid = SpatialPsfGrid::uniform(Psf::delta(7).unwrap(), 32, 32);
        let y = degrade_spatially_varying(&x, &grid, 0.0, &SeedSpec::new(1)).unwrap();
        assert!(y.max_abs_diff(&x).unwrap() < 1e-12);
    }

    #[test]
    fn sharp_center_blurry_corners() {
        let x = texture(64, 64);
        let blur = Psf::gaussian(21, 5.0).unwrap();
        let grid = SpatialPsfGrid::new(
            Psf::delta(21).unwrap(),
            [blur.clone(), blur.clone(), blur.clone(), blur],
            64,
            64,
        )
        .unwrap();
        let y = degrade_spatially_varying(&x, &grid, 0.0, &SeedSpec::new(1)).unwrap();
        let center = laplacian_variance(&y, 24, 40, 24, 40);
        for (r0, c0) in [(0, 0), (0, 48), (48, 0), (48, 48)] {
            let corner = laplacian_variance(&y, r0, r0 + 16, c0, c0 + 16);
            assert!(center > corner, "center {center} corner {corner}");
        }
    }

    #[test]
    fn extent_mismatch_rejected() {
        let grid = SpatialPsfGrid::uniform(Psf::delta(3).unwrap(), 10, 10);
        let err = degrade_spatially_varying(&Image::new(10, 12, 1), &grid, 0.0, &SeedSpec::new(1));
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }
}
