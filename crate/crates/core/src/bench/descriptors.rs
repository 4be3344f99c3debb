use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{to_grayscale, Image};

pub const DEFAULT_GRID: usize = 4;
pub const DEFAULT_TIME_BINS: usize = 8;
pub const INTENSITY_BINS: usize = 16;
pub const ORIENTATION_BINS: usize = 8;
/// Deviations from the temporal median below this never mark a sprite pixel.
pub const SPRITE_THRESHOLD: f64 = 0.05;
/// A pixel is marked when its deviation exceeds this share of the frame's largest one.
pub const SPRITE_RELATIVE_THRESHOLD: f64 = 0.3;
/// Below this many marked pixels a frame falls back to the whole image.
pub const MIN_SPRITE_PIXELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolingConfig {
    pub grid: usize,
    pub time_bins: usize,
}

impl Default for PoolingConfig {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            time_bins: DEFAULT_TIME_BINS,
        }
    }
}

impl PoolingConfig {
    pub fn dim(&self) -> usize {
        self.grid * self.grid * self.time_bins
    }
}

/// Mean squared motion energy on a `grid x grid` layout in `time_bins` slices.
///
/// Entry `b * grid^2 + gy * grid + gx` averages over the frames of bin `b`
/// and the pixels and channels of cell `(gy, gx)`. Bins that receive no
/// frame stay zero.
pub fn action_descriptor(seq: &[Image], cfg: &PoolingConfig) -> Result<Vec<f64>> {
    if seq.is_empty() {
        return Err(Error::Degenerate("action descriptor of an empty sequence".into()));
    }
    if cfg.grid == 0 || cfg.time_bins == 0 {
        return Err(Error::param("grid", "grid and time_bins must be positive"));
    }
    let (h, w) = (seq[0].height(), seq[0].width());
    if h < cfg.grid || w < cfg.grid {
        return Err(Error::Dimension(format!(
            "{h}x{w} frame is smaller than a {0}x{0} grid",
            cfg.grid
        )));
    }
    let g = cfg.grid;
    let mut out = vec![0.0; cfg.dim()];
    let mut counts = vec![0usize; cfg.time_bins];
    for (t, frame) in seq.iter().enumerate() {
        if frame.height() != h || frame.width() != w {
            return Err(Error::ShapeMismatch {
                left: format!("{h}x{w}"),
                right: format!("{}x{}", frame.height(), frame.width()),
            });
        }
        let b = t * cfg.time_bins / seq.len();
        counts[b] += 1;
        let ch = frame.channels();
        for gy in 0..g {
            let (r0, r1) = (gy * h / g, (gy + 1) * h / g);
            for gx in 0..g {
                let (c0, c1) = (gx * w / g, (gx + 1) * w / g);
                let mut acc = 0.0;
                for r in r0..r1 {
                    for c in c0..c1 {
                        for k in 0..ch {
                            let v = frame.get(r, c, k);
                            acc += v * v;
                        }
                    }
                }
                out[b * g * g + gy * g + gx] += acc / ((r1 - r0) * (c1 - c0) * ch) as f64;
            }
        }
    }
    for (b, &n) in counts.iter().enumerate() {
        if n > 0 {
            for v in &mut out[b * g * g..(b + 1) * g * g] {
                *v /= n as f64;
            }
        }
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-frame sprite masks from the deviation against the per-pixel temporal median.
pub fn sprite_masks(frames: &[Image]) -> Vec<Vec<bool>> {
    let gray: Vec<Image> = frames.iter().map(to_grayscale).collect();
    let n = gray[0].len();
    let mut column = vec![0.0; gray.len()];
    let med: Vec<f64> = (0..n)
        .map(|i| {
            for (slot, g) in column.iter_mut().zip(&gray) {
                *slot = g.data()[i];
            }
            median(&mut column)
        })
        .collect();
    gray.iter()
        .map(|g| {
            let dev: Vec<f64> = g.data().iter().zip(&med).map(|(v, m)| (v - m).abs()).collect();
            let peak = dev.iter().copied().fold(0.0, f64::max);
            let thr = SPRITE_THRESHOLD.max(SPRITE_RELATIVE_THRESHOLD * peak);
            let mask: Vec<bool> = dev.iter().map(|&d| d > thr).collect();
            if mask.iter().filter(|&&b| b).count() < MIN_SPRITE_PIXELS {
                vec![true; n]
            } else {
                mask
            }
        })
        .collect()
}

/// Per-channel intensity histograms followed by a gradient-orientation histogram.
///
/// Each block sums to one. Pixels are restricted to the moving sprite where
/// one can be found. Orientation votes are weighted by gradient magnitude;
/// a block without any gradient is uniform.
pub fn identity_descriptor(frames: &[Image]) -> Result<Vec<f64>> {
    if frames.is_empty() {
        return Err(Error::Degenerate("identity descriptor of an empty frame set".into()));
    }
    let first = &frames[0];
    for f in frames {
        first.check_same_shape(f)?;
    }
    let (h, w, ch) = (first.height(), first.width(), first.channels());
    let masks = sprite_masks(frames);
    let mut hist = vec![0.0; ch * INTENSITY_BINS];
    let mut orient = vec![0.0; ORIENTATION_BINS];
    for (frame, mask) in frames.iter().zip(&masks) {
        let gray = to_grayscale(frame);
        for r in 0..h {
            for c in 0..w {
                if !mask[r * w + c] {
                    continue;
                }
                for k in 0..ch {
                    let v = frame.get(r, c, k).clamp(0.0, 1.0);
                    let bin = ((v * INTENSITY_BINS as f64) as usize).min(INTENSITY_BINS - 1);
                    hist[k * INTENSITY_BINS + bin] += 1.0;
                }
                let gy = gray.get((r + 1).min(h - 1), c, 0) - gray.get(r.saturating_sub(1), c, 0);
                let gx = gray.get(r, (c + 1).min(w - 1), 0) - gray.get(r, c.saturating_sub(1), 0);
                let mag = gy.hypot(gx);
                if mag > 0.0 {
                    let theta = gy.atan2(gx).rem_euclid(std::f64::consts::PI);
                    let bin =
                        ((theta / std::f64::consts::PI * ORIENTATION_BINS as f64) as usize).min(ORIENTATION_BINS - 1);
                    orient[bin] += mag;
                }
            }
        }
    }
    for block in hist.chunks_mut(INTENSITY_BINS) {
        let s: f64 = block.iter().sum();
        block.iter_mut().for_each(|v| *v /= s);
    }
    let s: f64 = orient.iter().sum();
    if s > 0.0 {
        orient.iter_mut().for_each(|v| *v /= s);
    } else {
        orient.fill(1.0 / ORIENTATION_BINS as f64);
    }
    hist.extend(orient);
    Ok(hist)
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
