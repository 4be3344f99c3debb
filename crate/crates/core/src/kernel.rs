use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A square convolution kernel with an odd side length, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::param("size", format!("kernel size must be odd, got {size}")));
        }
        if weights.len() != size * size {
            return Err(Error::Dimension(format!(
                "{size}x{size} kernel needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        Ok(Self { size, weights })
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(isize, isize) -> f64) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::param("size", format!("kernel size must be odd, got {size}")));
        }
        let r = (size / 2) as isize;
        let mut weights = Vec::with_capacity(size * size);
        for dy in -r..=r {
            for dx in -r..=r {
                weights.push(f(dy, dx));
            }
        }
        Ok(Self { size, weights })
    }

    /// Unit impulse at the center.
    pub fn delta(size: usize) -> Result<Self> {
        Self::from_fn(size, |dy, dx| if dy == 0 && dx == 0 { 1.0 } else { 0.0 })
    }

    /// Sampled isotropic Gaussian, normalized to unit sum.
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        let s2 = 2.0 * sigma * sigma;
        let k = Self::from_fn(size, |dy, dx| (-((dy * dy + dx * dx) as f64) / s2).exp())?;
        Ok(k.normalized())
    }

    /// Gaussian with side length covering about four standard deviations each way.
    pub fn gaussian_auto(sigma: f64) -> Result<Self> {
        let r = (4.0 * sigma).ceil().max(1.0) as usize;
        Self::gaussian(2 * r + 1, sigma)
    }

    pub fn box_filter(size: usize) -> Result<Self> {
        let w = 1.0 / (size * size) as f64;
        Self::from_fn(size, |_, _| w)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    /// Weight at signed offset from the center.
    pub fn at_offset(&self, dy: isize, dx: isize) -> f64 {
        let r = self.radius() as isize;
        if dy.abs() > r || dx.abs() > r {
            return 0.0;
        }
        self.at((dy + r) as usize, (dx + r) as usize)
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalized(mut self) -> Self {
        let s = self.sum();
        if s != 0.0 {
            for w in &mut self.weights {
                *w /= s;
            }
        }
        self
    }

    /// Zero-pads (or center-crops) to a new odd size.
    pub fn resized(&self, size: usize) -> Result<Self> {
        Self::from_fn(size, |dy, dx| self.at_offset(dy, dx))
    }

    /// Convolves two kernels; the result has side `a.size + b.size - 1`.
    pub fn compose(&self, other: &Kernel2D) -> Kernel2D {
        let size = self.size + other.size - 1;
        let (ra, rb) = (self.radius() as isize, other.radius() as isize);
        let r = ra + rb;
        let mut out = vec![0.0; size * size];
        for ay in -ra..=ra {
            for ax in -ra..=ra {
                let wa = self.at_offset(ay, ax);
                if wa == 0.0 {
                    continue;
                }
                for by in -rb..=rb {
                    for bx in -rb..=rb {
                        let idx = ((ay + by + r) as usize) * size + (ax + bx + r) as usize;
                        out[idx] += wa * other.at_offset(by, bx);
                    }
                }
            }
        }
        Kernel2D { size, weights: out }
    }

    /// L2 distance to `other` divided by the L2 norm of `self`.
    pub fn relative_l2_distance(&self, other: &Kernel2D) -> f64 {
        let size = self.size.max(other.size);
        let r = (size / 2) as isize;
        let (mut num, mut den) = (0.0, 0.0);
        for dy in -r..=r {
            for dx in -r..=r {
                let a = self.at_offset(dy, dx);
                let d = a - other.at_offset(dy, dx);
                num += d * d;
                den += a * a;
            }
        }
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_size_rejected() {
        assert!(Kernel2D::delta(4).is_err());
        assert!(Kernel2D::new(2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn gaussian_is_normalized_and_symmetric() {
        let k = Kernel2D::gaussian(9, 1.3).unwrap();
        assert!((k.sum() - 1.0).abs() < 1e-12);
        assert_eq!(k.at_offset(2, -1), k.at_offset(-2, 1));
        assert_eq!(k.at_offset(1, 3), k.at_offset(3, 1));
    }

    #[test]
    fn compose_with_delta_is_identity() {
        let g = Kernel2D::gaussian(5, 1.0).unwrap();
        let c = g.compose(&Kernel2D::delta(3).unwrap());
        assert_eq!(c.size(), 7);
        assert!(g.resized(7).unwrap().relative_l2_distance(&c) < 1e-15);
    }
}
