//! Floating-point image and clip containers.
//!
//! Intensities live in `[0, 1]` as `f64`; quantization to 8 bits happens only
//! when reading or writing files (see [`crate::io`]). Pixels are stored
//! row-major with interleaved channels, so the value of channel `c` at
//! `(row, col)` sits at `(row * width + col) * channels + c`.

use crate::error::{Error, Result};

/// ITU-R BT.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self::filled(height, width, channels, 0.0)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Dimension(format!("images have 1 or 3 channels, got {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::Dimension(format!(
                "{height}x{width}x{channels} image needs {} values, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds a single-channel image by evaluating `f(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            channels: 1,
            data,
        }
    }

    /// Assembles an interleaved image from separate single-channel planes.
    pub fn from_planes(planes: &[Image]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::Dimension("no planes given".into()))?;
        if planes.len() != 1 && planes.len() != 3 {
            return Err(Error::Dimension(format!(
                "expected 1 or 3 planes, got {}",
                planes.len()
            )));
        }
        for p in planes {
            if p.channels != 1 || p.height != first.height || p.width != first.width {
                return Err(Error::ShapeMismatch {
                    left: first.shape_string(),
                    right: p.shape_string(),
                });
            }
        }
        let n = planes.len();
        let mut data = vec![0.0; first.height * first.width * n];
        for (c, p) in planes.iter().enumerate() {
            for (i, v) in p.data.iter().enumerate() {
                data[i * n + c] = *v;
            }
        }
        Image::from_vec(first.height, first.width, n, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: f64) {
        self.data[(row * self.width + col) * self.channels + channel] = value;
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub(crate) fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.height, self.width, self.channels)
    }

    pub(crate) fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: self.shape_string(),
                right: other.shape_string(),
            })
        }
    }

    /// Extracts channel `c` as a single-channel image.
    pub fn plane(&self, c: usize) -> Image {
        assert!(c < self.channels);
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        Image {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        }
    }

    pub fn planes(&self) -> Vec<Image> {
        (0..self.channels).map(|c| self.plane(c)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.check_same_shape(other)?;
        Ok(Image {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        })
    }

    /// Clamps every intensity into `[0, 1]`.
    pub fn clamped(mut self) -> Image {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Converts to a single channel using BT.601 luma weights; grayscale input is copied.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2])
        .collect();
    Image {
        height: img.height,
        width: img.width,
        channels: 1,
        data,
    }
}

/// An ordered, non-empty sequence of equally shaped frames.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    frames: Vec<Image>,
    frame_rate: f64,
}

impl VideoClip {
    pub fn new(frames: Vec<Image>, frame_rate: f64) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Dimension("a clip needs at least one frame".into()))?;
        for f in &frames[1..] {
            first.check_same_shape(f)?;
        }
        Ok(Self { frames, frame_rate })
    }

    pub fn frames(&self) -> &[Image] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Image> {
        self.frames
    }

    pub fn frame(&self, t: usize) -> &Image {
        &self.frames[t]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }

    /// Applies `f` to every frame, keeping the frame rate.
    pub fn map_frames(&self, f: impl Fn(usize, &Image) -> Image) -> Result<VideoClip> {
        let frames = self.frames.iter().enumerate().map(|(t, img)| f(t, img)).collect();
        VideoClip::new(frames, self.frame_rate)
    }

    pub fn to_grayscale(&self) -> VideoClip {
        VideoClip {
            frames: self.frames.iter().map(to_grayscale).collect(),
            frame_rate: self.frame_rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_rgb_becomes_ones() {
        let img = Image::filled(4, 5, 3, 1.0);
        let g = to_grayscale(&img);
        assert_eq!(g.channels(), 1);
        assert!(g.data().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn grayscale_is_copied() {
        let img = Image::from_fn(3, 3, |r, c| (r * 3 + c) as f64 / 9.0);
        assert_eq!(to_grayscale(&img), img);
    }

    #[test]
    fn pure_red_uses_luma_weight() {
        let mut img = Image::new(2, 2, 3);
        for r in 0..2 {
            for c in 0..2 {
                img.set(r, c, 0, 1.0);
            }
        }
        let g = to_grayscale(&img);
        assert!(g.data().iter().all(|&v| (v - 0.299).abs() < 1e-12));
    }

    #[test]
    fn planes_round_trip() {
        let img = Image::from_vec(2, 2, 3, (0..12).map(|v| v as f64 / 12.0).collect()).unwrap();
        let back = Image::from_planes(&img.planes()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn clip_rejects_mixed_shapes() {
        let err = VideoClip::new(vec![Image::new(2, 2, 1), Image::new(3, 2, 1)], 25.0);
        assert!(err.is_err());
        assert!(VideoClip::new(vec![], 25.0).is_err());
    }
}
