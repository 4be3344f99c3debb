use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::conv::reflect_index;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::seed::SeedSpec;

pub const MIN_RIDGE_PATCHES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RidgeConfig {
    /// Odd side of the input patch, at most 11.
    pub patch_size: usize,
    pub lambda: f64,
    /// Upper bound on sampled training patches.
    pub max_patches: usize,
    pub seed: SeedSpec,
    /// Label recorded in the trained restorer.
    pub config_id: String,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            patch_size: 9,
            lambda: 1e-3,
            max_patches: 40_000,
            seed: SeedSpec::default(),
            config_id: String::new(),
        }
    }
}

impl RidgeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size.is_multiple_of(2) || self.patch_size > 11 {
            return Err(Error::param(
                "patch_size",
                format!("must be odd and at most 11, got {}", self.patch_size),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param(
                "lambda",
                "must be positive; an unregularized fit may be singular",
            ));
        }
        if self.max_patches < MIN_RIDGE_PATCHES {
            return Err(Error::param(
                "max_patches",
                format!("must be at least {MIN_RIDGE_PATCHES}"),
            ));
        }
        Ok(())
    }
}

/// Patch-to-pixel linear map learned from paired frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRestorer {
    pub patch_size: usize,
    /// `patch_size^2` row-major patch weights followed by one bias.
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub trained_on: String,
}

impl LinearRestorer {
    pub fn new(patch_size: usize, weights: Vec<f64>, lambda: f64, trained_on: impl Into<String>) -> Result<Self> {
        if patch_size.is_multiple_of(2) {
            return Err(Error::param("patch_size", "must be odd"));
        }
        if weights.len() != patch_size * patch_size + 1 {
            return Err(Error::Dimension(format!(
                "{} weights for a {patch_size}x{patch_size} patch plus bias",
                weights.len()
            )));
        }
        Ok(Self {
            patch_size,
            weights,
            lambda,
            trained_on: trained_on.into(),
        })
    }

    pub fn bias(&self) -> f64 {
        *self.weights.last().expect("bias present")
    }
}

/// Reflect-padded patch around `(r, c)` of plane `ch`, written into `out`.
fn patch_into(img: &Image, ch: usize, r: usize, c: usize, p: usize, out: &mut [f64]) {
    let half = (p / 2) as isize;
    let (h, w) = (img.height(), img.width());
    let mut k = 0;
    for dy in -half..=half {
        let rr = reflect_index(r as isize + dy, h);
        for dx in -half..=half {
            let cc = reflect_index(c as isize + dx, w);
            out[k] = img.get(rr, cc, ch);
            k += 1;
        }
    }
}

/// Sampled design matrix of a ridge fit, kept so the objective can be re-evaluated.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    patch_size: usize,
    lambda: f64,
    /// Rows are `[patch..., 1]`.
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl RidgeProblem {
    /// Samples patches from every channel of every `(clean, degraded)` pair.
    pub fn build(pairs: &[(Image, Image)], cfg: &RidgeConfig) -> Result<Self> {
        cfg.validate()?;
        for (clean, deg) in pairs {
            clean.check_same_shape(deg)?;
        }
        let total: usize = pairs.iter().map(|(c, _)| c.len()).sum();
        if total < MIN_RIDGE_PATCHES {
            return Err(Error::Degenerate(format!(
                "only {total} patches available, need at least {MIN_RIDGE_PATCHES}"
            )));
        }
        let n = total.min(cfg.max_patches);
        let mut rng = cfg.seed.stream("ridge/patches");
        let mut picks = sample(&mut rng, total, n).into_vec();
        picks.sort_unstable();

        let p = cfg.patch_size;
        let dim = p * p + 1;
        let mut a = DMatrix::zeros(n, dim);
        let mut b = DVector::zeros(n);
        let mut patch = vec![0.0; p * p];
        let mut offset = 0;
        let mut pair = 0;
        for (row, &idx) in picks.iter().enumerate() {
            while idx >= offset + pairs[pair].0.len() {
                offset += pairs[pair].0.len();
                pair += 1;
            }
            let (clean, deg) = &pairs[pair];
            let local = idx - offset;
            let ch = local % clean.channels();
            let pix = local / clean.channels();
            let (r, c) = (pix / clean.width(), pix % clean.width());
            patch_into(deg, ch, r, c, p, &mut patch);
            for (j, v) in patch.iter().enumerate() {
                a[(row, j)] = *v;
            }
            a[(row, dim - 1)] = 1.0;
            b[row] = clean.get(r, c, ch);
        }
        Ok(Self {
            patch_size: p,
            lambda: cfg.lambda,
            a,
            b,
        })
    }

    pub fn samples(&self) -> usize {
        self.b.len()
    }

    /// `||A w - b||^2 + lambda ||w||^2`.
    pub fn objective(&self, weights: &[f64]) -> f64 {
        let w = DVector::from_column_slice(weights);
        let r = &self.a * &w - &self.b;
        r.norm_squared() + self.lambda * w.norm_squared()
    }

    /// Closed-form minimizer `(A^T A + lambda I)^-1 A^T b` via Cholesky.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let dim = self.a.ncols();
        let gram = self.a.tr_mul(&self.a) + DMatrix::identity(dim, dim) * self.lambda;
        let rhs = self.a.tr_mul(&self.b);
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Numerical("ridge normal equations are not positive definite".into()))?;
        let w = chol.solve(&rhs);
        if !w.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("ridge solution is not finite".into()));
        }
        Ok(w.as_slice().to_vec())
    }
}

/// Fits a [`LinearRestorer`] mapping degraded patches to clean center pixels.
pub fn ridge_train(pairs: &[(Image, Image)], cfg: &RidgeConfig) -> Result<LinearRestorer> {
    let problem = RidgeProblem::build(pairs, cfg)?;
    LinearRestorer::new(problem.patch_size, problem.solve()?, cfg.lambda, cfg.config_id.clone())
}

/// Sliding-window application with reflect padding; output clamped to `[0, 1]`.
pub fn ridge_apply(r: &LinearRestorer, y: &Image) -> Result<Image> {
    let p = r.patch_size;
    if r.weights.len() != p * p + 1 {
        return Err(Error::Dimension(format!(
            "restorer has {} weights for patch size {p}",
            r.weights.len()
        )));
    }
    let (h, w, ch) = (y.height(), y.width(), y.channels());
    let bias = r.bias();
    let mut out = Image::new(h, w, ch);
    let mut patch = vec![0.0; p * p];
    for c in 0..ch {
        for row in 0..h {
            for col in 0..w {
                patch_into(y, c, row, col, p, &mut patch);
                let v: f64 = patch.iter().zip(&r.weights).map(|(a, b)| a * b).sum::<f64>() + bias;
                out.set(row, col, c, v);
            }
        }
    }
    Ok(out.clamped())
}
