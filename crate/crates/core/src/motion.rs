//! Cross-temporal frame differences and their interval-weighted fusion.
//!
//! For frame `t` of a clip (1-based), with previous index `p = max(1, t - T)`
//! and subsequent index `s = min(len, t + T)`:
//!
//! ```text
//! D_prev = |F_t - F_p|      D_next = |F_t - F_s|      D_mean = |F_t - mean(F)|
//! Psi_t  = proj( w_p * D_prev, w_n * D_next, D_mean )
//! w_p = (s - t) / (s - p)   w_n = (t - p) / (s - p)
//! ```
//!
//! Everything is computed on grayscale frames. A static scattering veil adds
//! the same value to `F_t`, `F_p`, `F_s` and the mean, so it cancels.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv::convolve_direct;
use crate::error::{Error, Result};
use crate::image::{to_grayscale, Image, VideoClip};
use crate::io::{read_json, save_image, write_json};
use crate::kernel::Kernel2D;

pub const DEFAULT_STEP: usize = 4;
pub const MOTION_JSON: &str = "motion.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IfnsConfig {
    /// Frame interval to the previous and subsequent frames.
    pub step: usize,
}

impl Default for IfnsConfig {
    fn default() -> Self {
        Self { step: DEFAULT_STEP }
    }
}

impl IfnsConfig {
    pub fn new(step: usize) -> Result<Self> {
        let cfg = Self { step };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step == 0 {
            return Err(Error::param("step", "must be at least 1"));
        }
        Ok(())
    }

    /// Clamped `(previous, subsequent)` indices for 1-based frame `t`.
    pub fn neighbours(&self, t: usize, len: usize) -> (usize, usize) {
        (t.saturating_sub(self.step).max(1), (t + self.step).min(len))
    }
}

/// The three absolute difference maps of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionStack {
    pub d_prev: Image,
    pub d_next: Image,
    pub d_mean: Image,
    pub prev: usize,
    pub t: usize,
    pub next: usize,
    /// Set when clamping collapsed the interval (single-frame clips).
    pub degenerate: bool,
}

/// A fused, optionally projected, three-channel motion map.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedMotion {
    /// Channels: weighted `D_prev`, weighted `D_next`, `D_mean`.
    pub psi: Image,
    pub prev: usize,
    pub t: usize,
    pub next: usize,
    pub prev_weight: f64,
    pub next_weight: f64,
    pub degenerate: bool,
}

/// Per-pixel mean of the grayscale frames of the whole clip.
pub fn average_frame(v: &VideoClip) -> Image {
    let gray: Vec<Image> = v.frames().iter().map(to_grayscale).collect();
    mean_of(&gray)
}

fn mean_of(frames: &[Image]) -> Image {
    let first = &frames[0];
    let mut acc = vec![0.0; first.len()];
    for f in frames {
        for (a, v) in acc.iter_mut().zip(f.data()) {
            *a += v;
        }
    }
    let n = frames.len() as f64;
    let data = acc.into_iter().map(|a| a / n).collect();
    Image::from_vec(first.height(), first.width(), 1, data).expect("same shape as input")
}

fn abs_diff(a: &Image, b: &Image) -> Image {
    a.zip_map(b, |x, y| (x - y).abs()).expect("frames share a shape")
}

fn check_index(t: usize, len: usize) -> Result<()> {
    if t == 0 || t > len {
        return Err(Error::param("t", format!("frame index {t} outside 1..={len}")));
    }
    Ok(())
}

fn stack_from_gray(gray: &[Image], mean: &Image, t: usize, cfg: &IfnsConfig) -> MotionStack {
    let (prev, next) = cfg.neighbours(t, gray.len());
    let cur = &gray[t - 1];
    let degenerate = prev == next;
    let (d_prev, d_next) = if degenerate {
        let z = Image::new(cur.height(), cur.width(), 1);
        (z.clone(), z)
    } else {
        (abs_diff(cur, &gray[prev - 1]), abs_diff(cur, &gray[next - 1]))
    };
    MotionStack {
        d_prev,
        d_next,
        d_mean: abs_diff(cur, mean),
        prev,
        t,
        next,
        degenerate,
    }
}

/// Difference maps for 1-based frame `t`.
pub fn ifns(v: &VideoClip, t: usize, cfg: &IfnsConfig) -> Result<MotionStack> {
    cfg.validate()?;
    check_index(t, v.len())?;
    let gray: Vec<Image> = v.frames().iter().map(to_grayscale).collect();
    let mean = mean_of(&gray);
    Ok(stack_from_gray(&gray, &mean, t, cfg))
}

/// `(previous, subsequent)` weights; they sum to exactly one.
pub fn cfsa_weights(prev: usize, t: usize, next: usize) -> Result<(f64, f64)> {
    if !(prev <= t && t <= next && prev < next) {
        return Err(Error::Degenerate(format!(
            "need p <= t <= s and p < s, got ({prev}, {t}, {next})"
        )));
    }
    let next_w = (t - prev) as f64 / (next - prev) as f64;
    Ok((1.0 - next_w, next_w))
}

/// Interval-weighted concatenation of a stack, before projection.
pub fn cfsa_fuse(stack: &MotionStack) -> Result<FusedMotion> {
    let (wp, wn) = cfsa_weights(stack.prev, stack.t, stack.next)?;
    let psi = Image::from_planes(&[
        stack.d_prev.map(|v| wp * v),
        stack.d_next.map(|v| wn * v),
        stack.d_mean.clone(),
    ])?;
    Ok(FusedMotion {
        psi,
        prev: stack.prev,
        t: stack.t,
        next: stack.next,
        prev_weight: wp,
        next_weight: wn,
        degenerate: false,
    })
}

/// One 3x3 kernel per motion channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionKernels {
    kernels: [Kernel2D; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    kernels: Vec<Vec<f64>>,
}

impl Default for ProjectionKernels {
    fn default() -> Self {
        Self::identity()
    }
}

impl ProjectionKernels {
    pub fn new(kernels: [Kernel2D; 3]) -> Result<Self> {
        if kernels.iter().any(|k| k.size() != 3) {
            return Err(Error::param("kernels", "projection kernels must be 3x3"));
        }
        Ok(Self { kernels })
    }

    pub fn identity() -> Self {
        let d = Kernel2D::delta(3).expect("3 is odd");
        Self {
            kernels: [d.clone(), d.clone(), d],
        }
    }

    pub fn kernels(&self) -> &[Kernel2D; 3] {
        &self.kernels
    }

    /// Parses `{"kernels": [[9 weights], [9 weights], [9 weights]]}` (row-major).
    pub fn from_json_str(s: &str, path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            reason,
        };
        let file: KernelFile = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
        if file.kernels.len() != 3 {
            return Err(bad(format!("expected 3 kernels, found {}", file.kernels.len())));
        }
        let mut ks = Vec::with_capacity(3);
        for (i, w) in file.kernels.into_iter().enumerate() {
            if w.len() != 9 {
                return Err(bad(format!("kernel {i} has {} weights, expected 9", w.len())));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("kernel {i} has a non-finite weight")));
            }
            ks.push(Kernel2D::new(3, w).map_err(|e| bad(e.to_string()))?);
        }
        let kernels: [Kernel2D; 3] = ks.try_into().expect("three kernels");
        Ok(Self { kernels })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s, path)
    }

    pub fn to_json_string(&self) -> String {
        let file = KernelFile {
            kernels: self.kernels.iter().map(|k| k.weights().to_vec()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("plain numbers serialize")
    }
}

/// Per-channel 3x3 convolution with reflect padding.
pub fn project(fused: &FusedMotion, k3: &ProjectionKernels) -> Result<FusedMotion> {
    if fused.psi.channels() != 3 {
        return Err(Error::Dimension(format!(
            "motion map needs 3 channels, got {}",
            fused.psi.channels()
        )));
    }
    let planes = fused
        .psi
        .planes()
        .iter()
        .zip(&k3.kernels)
        .map(|(p, k)| convolve_direct(p, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(FusedMotion {
        psi: Image::from_planes(&planes)?,
        ..fused.clone()
    })
}

/// Runs differencing, fusion and projection for every frame of a clip.
///
/// Degenerate frames yield all-zero maps with the flag set.
pub fn process_clip(v: &VideoClip, cfg: &IfnsConfig, k3: &ProjectionKernels) -> Result<Vec<FusedMotion>> {
    cfg.validate()?;
    let gray: Vec<Image> = v.frames().iter().map(to_grayscale).collect();
    let mean = mean_of(&gray);
    (1..=gray.len())
        .into_par_iter()
        .map(|t| {
            let stack = stack_from_gray(&gray, &mean, t, cfg);
            if stack.degenerate {
                let f = &gray[t - 1];
                return Ok(FusedMotion {
                    psi: Image::new(f.height(), f.width(), 3),
                    prev: stack.prev,
                    t,
                    next: stack.next,
                    prev_weight: 0.0,
                    next_weight: 0.0,
                    degenerate: true,
                });
            }
            project(&cfsa_fuse(&stack)?, k3)
        })
        .collect()
}

/// One line of `motion.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFrameInfo {
    pub t: usize,
    pub prev: usize,
    pub next: usize,
    pub prev_weight: f64,
    pub next_weight: f64,
    pub degenerate: bool,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionManifest {
    pub step: usize,
    pub frames: Vec<MotionFrameInfo>,
}

pub fn psi_file_name(t: usize) -> String {
    format!("psi_{t:04}.png")
}

/// Writes one 3-channel PNG per frame plus `motion.json`.
pub fn save_motion(seq: &[FusedMotion], cfg: &IfnsConfig, dir: &Path) -> Result<MotionManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::with_capacity(seq.len());
    for m in seq {
        let file = psi_file_name(m.t);
        save_image(&m.psi.clone().clamped(), &dir.join(&file))?;
        frames.push(MotionFrameInfo {
            t: m.t,
            prev: m.prev,
            next: m.next,
            prev_weight: m.prev_weight,
            next_weight: m.next_weight,
            degenerate: m.degenerate,
            file,
        });
    }
    let manifest = MotionManifest { step: cfg.step, frames };
    write_json(&dir.join(MOTION_JSON), &manifest)?;
    Ok(manifest)
}

pub fn load_motion_manifest(dir: &Path) -> Result<MotionManifest> {
    read_json(&dir.join(MOTION_JSON))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(values: &[f64]) -> VideoClip {
        VideoClip::new(values.iter().map(|&v| Image::filled(4, 5, 1, v)).collect(), 30.0).unwrap()
    }

    #[test]
    fn average_of_two_frames() {
        let m = average_frame(&clip(&[0.0, 1.0]));
        assert!(m.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn hand_evaluated_three_frames() {
        let s = ifns(&clip(&[0.0, 0.5, 1.0]), 2, &IfnsConfig::new(1).unwrap()).unwrap();
        assert_eq!((s.prev, s.t, s.next), (1, 2, 3));
        assert!(s.d_prev.data().iter().all(|&v| v == 0.5));
        assert!(s.d_next.data().iter().all(|&v| v == 0.5));
        assert!(s.d_mean.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_pixel_difference() {
        let a = Image::filled(3, 3, 1, 0.2);
        let mut b = a.clone();
        b.set(1, 2, 0, 0.6);
        let v = VideoClip::new(vec![a, b], 1.0).unwrap();
        let s = ifns(&v, 2, &IfnsConfig::new(1).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let want = if (r, c) == (1, 2) { 0.4 } else { 0.0 };
                assert!((s.d_prev.get(r, c, 0) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn index_out_of_range() {
        let v = clip(&[0.1, 0.2]);
        assert!(ifns(&v, 0, &IfnsConfig::default()).is_err());
        assert!(ifns(&v, 3, &IfnsConfig::default()).is_err());
        assert!(IfnsConfig::new(0).is_err());
    }

    #[test]
    fn weights_examples() {
        assert_eq!(cfsa_weights(2, 4, 6).unwrap(), (0.5, 0.5));
        let (a, b) = cfsa_weights(3, 4, 6).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-15 && (b - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(cfsa_weights(1, 1, 5).unwrap(), (1.0, 0.0));
        assert!(matches!(cfsa_weights(2, 2, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn degenerate_single_frame() {
        let out = process_clip(&clip(&[0.7]), &IfnsConfig::default(), &ProjectionKernels::identity()).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].degenerate);
        assert!(out[0].psi.data().iter().all(|&v| v == 0.0));
        let stack = ifns(&clip(&[0.7]), 1, &IfnsConfig::default()).unwrap();
        assert!(cfsa_fuse(&stack).is_err());
    }

    #[test]
    fn box_projection_of_impulse() {
        let mut d = Image::new(7, 7, 1);
        d.set(3, 3, 0, 1.0);
        let z = Image::new(7, 7, 1);
        let stack = MotionStack {
            d_prev: d,
            d_next: z.clone(),
            d_mean: z,
            prev: 1,
            t: 1,
            next: 2,
            degenerate: false,
        };
        let fused = cfsa_fuse(&stack).unwrap();
        let b = Kernel2D::box_filter(3).unwrap();
        let k = ProjectionKernels::new([b.clone(), b.clone(), b]).unwrap();
        let out = project(&fused, &k).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                let want = if (2..=4).contains(&r) && (2..=4).contains(&c) {
                    1.0 / 9.0
                } else {
                    0.0
                };
                assert!((out.psi.get(r, c, 0) - want).abs() < 1e-12);
            }
        }
        let zero = ProjectionKernels::new([
            Kernel2D::new(3, vec![0.0; 9]).unwrap(),
            Kernel2D::new(3, vec![0.0; 9]).unwrap(),
            Kernel2D::new(3, vec![0.0; 9]).unwrap(),
        ])
        .unwrap();
        assert!(project(&fused, &zero).unwrap().psi.data().iter().all(|&v| v == 0.0));
        assert_eq!(project(&fused, &ProjectionKernels::identity()).unwrap(), fused);
    }

    #[test]
    fn kernel_file_round_trip_and_errors() {
        let p = Path::new("k.json");
        let k = ProjectionKernels::identity();
        assert_eq!(ProjectionKernels::from_json_str(&k.to_json_string(), p).unwrap(), k);
        assert!(ProjectionKernels::from_json_str(r#"{"kernels": [[1.0]]}"#, p).is_err());
        assert!(ProjectionKernels::from_json_str(r#"{"kernels": []}"#, p).is_err());
        assert!(ProjectionKernels::from_json_str("not json", p).is_err());
    }

    #[test]
    fn manifest_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = IfnsConfig::new(1).unwrap();
        let seq = process_clip(&clip(&[0.0, 0.5, 1.0]), &cfg, &ProjectionKernels::identity()).unwrap();
        let m = save_motion(&seq, &cfg, dir.path()).unwrap();
        assert_eq!(load_motion_manifest(dir.path()).unwrap(), m);
        assert!(dir.path().join(psi_file_name(3)).exists());
        assert_eq!(m.frames[0].prev_weight, 1.0);
    }
}
