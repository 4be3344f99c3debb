//! Reflect-padded 2-D convolution.
//!
//! Two evaluation paths are provided: a direct sum ([`convolve_direct`]) and a
//! frequency-domain path ([`Convolver`]). Both compute
//! `y(r, c) = sum k(a, b) x(r - a + R, c - b + R)` with mirror reflection
//! (`c b a | a b c`) outside the image.
//!
//! Mirror reflection makes the image periodic with period `2h` by `2w`, so the frequency path works on exactly one period of that
//! extension. The circular convolution there equals the reflect-padded one
//! for any kernel size, and the extended signal has no jumps at the grid
//! seam, which matters for inverse filters.
//!
//! [`Convolver::adjoint`] is the exact matrix transpose of the padded
//! operator, folding the contributions that land in the padding back onto
//! the pixels they were reflected from.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::Kernel2D;

/// Length of one period of the mirror extension of `n` samples.
fn period(n: usize) -> usize {
    2 * n
}

/// Maps a possibly out-of-range index into `[0, n)` by mirror reflection
/// about the pixel edges, so the border sample repeats (`c b a | a b c`).
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn check_fits(img: &Image, k: &Kernel2D) -> Result<()> {
    if k.size() > 2 * img.height() || k.size() > 2 * img.width() {
        return Err(Error::Dimension(format!(
            "{0}x{0} kernel exceeds twice the {1}x{2} image extent",
            k.size(),
            img.height(),
            img.width()
        )));
    }
    Ok(())
}

/// Convolution, choosing the direct path for small kernels.
pub fn convolve(img: &Image, k: &Kernel2D) -> Result<Image> {
    if k.size() <= 7 {
        convolve_direct(img, k)
    } else {
        Convolver::new(k, img.height(), img.width())?.apply(img)
    }
}

/// Brute-force evaluation; every channel uses the same kernel.
pub fn convolve_direct(img: &Image, k: &Kernel2D) -> Result<Image> {
    check_fits(img, k)?;
    let (h, w, ch) = (img.height(), img.width(), img.channels());
    let r = k.radius() as isize;
    let size = k.size();
    let mut out = Image::new(h, w, ch);
    for row in 0..h {
        for col in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for a in 0..size {
                    let sr = reflect_index(row as isize - a as isize + r, h);
                    for b in 0..size {
                        let wgt = k.at(a, b);
                        if wgt != 0.0 {
                            let sc = reflect_index(col as isize - b as isize + r, w);
                            acc += wgt * img.get(sr, sc, c);
                        }
                    }
                }
                out.set(row, col, c, acc);
            }
        }
    }
    Ok(out)
}

/// Planned forward/inverse 2-D FFTs on a fixed grid.
#[derive(Clone)]
pub struct FftGrid {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftGrid")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl FftGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform including the `1 / (rows * cols)` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_inv, &self.col_inv);
        let s = 1.0 / (self.rows * self.cols) as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    fn run(&self, buf: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(buf.len(), self.rows * self.cols);
        let mut scratch = vec![Complex64::default(); row.get_inplace_scratch_len().max(col.get_inplace_scratch_len())];
        for line in buf.chunks_exact_mut(self.cols) {
            row.process_with_scratch(line, &mut scratch);
        }
        let mut column = vec![Complex64::default(); self.rows];
        for c in 0..self.cols {
            for r in 0..self.rows {
                column[r] = buf[r * self.cols + c];
            }
            col.process_with_scratch(&mut column, &mut scratch);
            for r in 0..self.rows {
                buf[r * self.cols + c] = column[r];
            }
        }
    }
}

/// Frequency-domain convolution with a kernel fixed for one image size.
#[derive(Debug, Clone)]
pub struct Convolver {
    height: usize,
    width: usize,
    radius: usize,
    grid: FftGrid,
    spectrum: Vec<Complex64>,
}

impl Convolver {
    pub fn new(k: &Kernel2D, height: usize, width: usize) -> Result<Self> {
        check_fits(&Image::new(height, width, 1), k)?;
        let radius = k.radius();
        let rows = period(height);
        let cols = period(width);
        let grid = FftGrid::new(rows, cols);
        let r = radius as isize;
        let mut spectrum = vec![Complex64::default(); rows * cols];
        for a in 0..k.size() {
            let gr = (a as isize - r).rem_euclid(rows as isize) as usize;
            for b in 0..k.size() {
                let gc = (b as isize - r).rem_euclid(cols as isize) as usize;
                spectrum[gr * cols + gc] += Complex64::new(k.at(a, b), 0.0);
            }
        }
        grid.forward(&mut spectrum);
        Ok(Self {
            height,
            width,
            radius,
            grid,
            spectrum,
        })
    }

    pub fn grid(&self) -> &FftGrid {
        &self.grid
    }

    /// Transfer function of the kernel on the mirror-period grid (kernel centered at the origin).
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Extends two planes over one mirror period, packed as real and imaginary parts.
    pub fn pad_pair(&self, re: &[f64], im: Option<&[f64]>) -> Vec<Complex64> {
        let (h, w) = (self.height, self.width);
        let (rows, cols) = (self.grid.rows(), self.grid.cols());
        let col_src: Vec<usize> = (0..cols).map(|gc| reflect_index(gc as isize, w)).collect();
        let mut buf = vec![Complex64::default(); rows * cols];
        for gr in 0..rows {
            let sr = reflect_index(gr as isize, h) * w;
            for (gc, &sc) in col_src.iter().enumerate() {
                let i = sr + sc;
                buf[gr * cols + gc] = Complex64::new(re[i], im.map_or(0.0, |p| p[i]));
            }
        }
        buf
    }

    /// Reads the image region back out of a grid buffer.
    pub fn crop_pair(&self, buf: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let (h, w) = (self.height, self.width);
        let cols = self.grid.cols();
        let mut re = Vec::with_capacity(h * w);
        let mut im = Vec::with_capacity(h * w);
        for row in 0..h {
            for v in &buf[row * cols..row * cols + w] {
                re.push(v.re);
                im.push(v.im);
            }
        }
        (re, im)
    }

    fn forward_pair(&self, a: &[f64], b: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
        let mut buf = self.pad_pair(a, b);
        self.grid.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(&self.spectrum) {
            *v *= k;
        }
        self.grid.inverse(&mut buf);
        self.crop_pair(&buf)
    }

    fn filter_pair(&self, a: &[f64], b: Option<&[f64]>, transfer: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut buf = self.pad_pair(a, b);
        self.grid.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(transfer) {
            *v *= k;
        }
        self.grid.inverse(&mut buf);
        self.crop_pair(&buf)
    }

    fn adjoint_pair(&self, a: &[f64], b: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
        let (h, w) = (self.height, self.width);
        let (rows, cols) = (self.grid.rows(), self.grid.cols());
        let mut buf = vec![Complex64::default(); rows * cols];
        for row in 0..h {
            for col in 0..w {
                let i = row * w + col;
                buf[row * cols + col] = Complex64::new(a[i], b.map_or(0.0, |p| p[i]));
            }
        }
        self.grid.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(&self.spectrum) {
            *v *= k.conj();
        }
        self.grid.inverse(&mut buf);
        let col_dst: Vec<usize> = (0..cols).map(|gc| reflect_index(gc as isize, w)).collect();
        let mut re = vec![0.0; h * w];
        let mut im = vec![0.0; h * w];
        for gr in 0..rows {
            let sr = reflect_index(gr as isize, h) * w;
            for (gc, &sc) in col_dst.iter().enumerate() {
                let v = buf[gr * cols + gc];
                re[sr + sc] += v.re;
                im[sr + sc] += v.im;
            }
        }
        (re, im)
    }

    fn check(&self, img: &Image) -> Result<()> {
        if img.height() != self.height || img.width() != self.width {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}", self.height, self.width),
                right: format!("{}x{}", img.height(), img.width()),
            });
        }
        Ok(())
    }

    fn per_channel(
        &self,
        img: &Image,
        op: impl Fn(&Self, &[f64], Option<&[f64]>) -> (Vec<f64>, Vec<f64>),
    ) -> Result<Image> {
        self.check(img)?;
        let planes: Vec<Vec<f64>> = img.planes().into_iter().map(Image::into_vec).collect();
        let mut out: Vec<Image> = Vec::with_capacity(planes.len());
        let mut i = 0;
        while i < planes.len() {
            let second = planes.get(i + 1).map(Vec::as_slice);
            let (a, b) = op(self, &planes[i], second);
            out.push(Image::from_vec(self.height, self.width, 1, a)?);
            if second.is_some() {
                out.push(Image::from_vec(self.height, self.width, 1, b)?);
            }
            i += 2;
        }
        Image::from_planes(&out)
    }

    pub fn apply(&self, img: &Image) -> Result<Image> {
        self.per_channel(img, Self::forward_pair)
    }

    /// Applies an arbitrary transfer function laid out like [`Convolver::spectrum`]
    /// to the reflect-padded image. The transfer function should be
    /// conjugate-symmetric so that real inputs stay real.
    pub fn filter(&self, img: &Image, transfer: &[Complex64]) -> Result<Image> {
        if transfer.len() != self.spectrum.len() {
            return Err(Error::Dimension(format!(
                "transfer function has {} bins, grid has {}",
                transfer.len(),
                self.spectrum.len()
            )));
        }
        self.per_channel(img, |c, a, b| c.filter_pair(a, b, transfer))
    }

    /// Exact transpose of [`Convolver::apply`].
    pub fn adjoint(&self, img: &Image) -> Result<Image> {
        self.per_channel(img, Self::adjoint_pair)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize, ch: usize) -> Image {
        Image::from_vec(h, w, ch, (0..h * w * ch).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn reflect_index_repeats_the_edge() {
        let got: Vec<usize> = (-3..8).map(|i| reflect_index(i, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
        assert_eq!(reflect_index(-7, 1), 0);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = random_image(&mut rng, 9, 11, 3);
        let k = Kernel2D::delta(5).unwrap();
        assert!(convolve_direct(&img, &k).unwrap().max_abs_diff(&img).unwrap() < 1e-15);
        let fft = Convolver::new(&k, 9, 11).unwrap().apply(&img).unwrap();
        assert!(fft.max_abs_diff(&img).unwrap() < 1e-12);
    }

    #[test]
    fn constant_image_scales_by_kernel_sum() {
        let img = Image::filled(8, 8, 1, 0.3);
        let k = Kernel2D::from_fn(5, |dy, dx| 0.05 + 0.01 * (dy + 2 * dx) as f64).unwrap();
        let s = k.sum();
        let out = convolve_direct(&img, &k).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.3 * s).abs() < 1e-12));
    }

    #[test]
    fn direct_and_fft_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = random_image(&mut rng, 16, 16, 1);
        let k = Kernel2D::new(5, (0..25).map(|_| rng.random::<f64>()).collect()).unwrap();
        let d = convolve_direct(&img, &k).unwrap();
        let f = Convolver::new(&k, 16, 16).unwrap().apply(&img).unwrap();
        assert!(d.max_abs_diff(&f).unwrap() < 1e-6);
    }

    #[test]
    fn large_kernel_folds_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = random_image(&mut rng, 6, 7, 3);
        let k = Kernel2D::new(11, (0..121).map(|_| rng.random::<f64>()).collect()).unwrap();
        let d = convolve_direct(&img, &k).unwrap();
        let f = Convolver::new(&k, 6, 7).unwrap().apply(&img).unwrap();
        assert!(d.max_abs_diff(&f).unwrap() < 1e-9);
    }

    #[test]
    fn oversized_kernel_rejected() {
        let img = Image::new(4, 4, 1);
        let k = Kernel2D::delta(9).unwrap();
        assert!(matches!(convolve(&img, &k), Err(Error::Dimension(_))));
    }

    #[test]
    fn adjoint_satisfies_inner_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_image(&mut rng, 10, 13, 3);
        let y = random_image(&mut rng, 10, 13, 3);
        let k = Kernel2D::new(9, (0..81).map(|_| rng.random::<f64>()).collect()).unwrap();
        let conv = Convolver::new(&k, 10, 13).unwrap();
        let ax = conv.apply(&x).unwrap();
        let aty = conv.adjoint(&y).unwrap();
        let lhs: f64 = ax.data().iter().zip(y.data()).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.data().iter().zip(aty.data()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs());
    }
}
