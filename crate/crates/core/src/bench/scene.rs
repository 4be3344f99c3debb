use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, VideoClip};
use crate::seed::SeedSpec;

pub const CANVAS: usize = 96;
pub const CLIP_FRAMES: usize = 32;
pub const SPRITE_SIZE: usize = 16;
pub const FRAME_RATE: f64 = 25.0;
pub const NUM_ACTIONS: usize = 8;
pub const NUM_IDENTITIES: usize = 12;
pub const NUM_SCENES: usize = 12;
/// Stripe period of the sprite textures, pixels.
pub const STRIPE_PERIOD: f64 = 4.0;

/// Parametric motion families, indexed by action id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionFamily {
    Horizontal,
    Vertical,
    Circular,
    Diagonal,
    ExpandContract,
    Zigzag,
    PauseThenDash,
    FigureEight,
}

impl ActionFamily {
    pub const ALL: [ActionFamily; NUM_ACTIONS] = [
        ActionFamily::Horizontal,
        ActionFamily::Vertical,
        ActionFamily::Circular,
        ActionFamily::Diagonal,
        ActionFamily::ExpandContract,
        ActionFamily::Zigzag,
        ActionFamily::PauseThenDash,
        ActionFamily::FigureEight,
    ];

    pub fn from_id(id: usize) -> Result<Self> {
        Self::ALL
            .get(id)
            .copied()
            .ok_or_else(|| Error::param("action_id", format!("must be below {NUM_ACTIONS}, got {id}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionFamily::Horizontal => "horizontal",
            ActionFamily::Vertical => "vertical",
            ActionFamily::Circular => "circular",
            ActionFamily::Diagonal => "diagonal",
            ActionFamily::ExpandContract => "expand_contract",
            ActionFamily::Zigzag => "zigzag",
            ActionFamily::PauseThenDash => "pause_then_dash",
            ActionFamily::FigureEight => "figure_eight",
        }
    }
}

/// Everything needed to render one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub identity_id: usize,
    pub action_id: usize,
    pub scene_id: usize,
    /// Motion amplitude, pixels.
    pub amplitude: f64,
    /// Oscillation period, frames.
    pub period: f64,
    /// Phase, radians.
    pub phase: f64,
    pub canvas: usize,
    pub frames: usize,
    pub sprite_size: usize,
    pub seed: SeedSpec,
}

impl SceneSpec {
    pub fn new(identity_id: usize, action_id: usize, scene_id: usize, amplitude: f64, period: f64, phase: f64) -> Self {
        Self {
            identity_id,
            action_id,
            scene_id,
            amplitude,
            period,
            phase,
            canvas: CANVAS,
            frames: CLIP_FRAMES,
            sprite_size: SPRITE_SIZE,
            seed: SeedSpec::default(),
        }
    }

    /// Draws trajectory parameters from `rng`.
    pub fn random(identity_id: usize, action_id: usize, scene_id: usize, rng: &mut impl Rng) -> Self {
        let amplitude = rng.random_range(20.0..30.0);
        let period = rng.random_range(6.0..10.0);
        let phase = rng.random_range(0.0..TAU);
        Self::new(identity_id, action_id, scene_id, amplitude, period, phase)
    }

    fn validate(&self) -> Result<()> {
        ActionFamily::from_id(self.action_id)?;
        if self.identity_id >= NUM_IDENTITIES {
            return Err(Error::param(
                "identity_id",
                format!("must be below {NUM_IDENTITIES}, got {}", self.identity_id),
            ));
        }
        if self.scene_id >= NUM_SCENES {
            return Err(Error::param("scene_id", format!("must be below {NUM_SCENES}")));
        }
        if self.frames == 0 || self.sprite_size == 0 || self.canvas < self.sprite_size {
            return Err(Error::param(
                "canvas",
                "needs at least one frame and room for the sprite",
            ));
        }
        if !(self.amplitude >= 0.0 && self.period > 0.0 && self.phase.is_finite()) {
            return Err(Error::param("trajectory", "amplitude >= 0 and period > 0 required"));
        }
        Ok(())
    }
}

/// Sprite center offset from the canvas center and size scale at frame `t`.
pub fn trajectory(spec: &SceneSpec, t: usize) -> Result<(f64, f64, f64)> {
    let family = ActionFamily::from_id(spec.action_id)?;
    let a = spec.amplitude;
    let th = TAU * t as f64 / spec.period + spec.phase;
    let progress = if spec.frames > 1 {
        t as f64 / (spec.frames - 1) as f64
    } else {
        0.0
    };
    let tri = |x: f64| 2.0 / PI * x.sin().asin();
    Ok(match family {
        ActionFamily::Horizontal => (0.0, a * th.sin(), 1.0),
        ActionFamily::Vertical => (a * th.sin(), 0.0, 1.0),
        ActionFamily::Circular => (a * th.sin(), a * th.cos(), 1.0),
        ActionFamily::Diagonal => (0.7 * a * th.sin(), 0.7 * a * th.sin(), 1.0),
        ActionFamily::ExpandContract => (0.0, 0.0, 1.0 + 0.6 * (a / 30.0) * th.sin()),
        ActionFamily::Zigzag => (a * (progress - 0.5), a * tri(2.0 * th), 1.0),
        ActionFamily::PauseThenDash => {
            // the pause ends within the first 40% of the clip, set by the phase
            let start = 0.15 + 0.25 * spec.phase / TAU;
            let x = if progress < start {
                -a
            } else {
                -a + 2.0 * a * (progress - start) / (1.0 - start)
            };
            (0.0, x, 1.0)
        }
        ActionFamily::FigureEight => (0.8 * a * (2.0 * th).sin(), a * th.sin(), 1.0),
    })
}

/// Stripe contrast of the three palettes; the two stripe colors are
/// `mean + contrast` and `mean - contrast`.
const PALETTE_CONTRAST: [[f64; 3]; 3] = [[0.25, 0.0, -0.25], [-0.25, 0.25, 0.0], [0.0, -0.25, 0.25]];
const BASE_COLOR: f64 = 0.6;
/// Radius of the per-identity hue offset.
pub const HUE_OFFSET: f64 = 0.15;

/// Unit chroma axes orthogonal to the luma weights.
fn chroma_axes() -> ([f64; 3], [f64; 3]) {
    let w = crate::image::LUMA_WEIGHTS;
    let e1 = [w[1], -w[0], 0.0];
    let e2 = [
        w[1] * e1[2] - w[2] * e1[1],
        w[2] * e1[0] - w[0] * e1[2],
        w[0] * e1[1] - w[1] * e1[0],
    ];
    let unit = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v.map(|x| x / n)
    };
    (unit(e1), unit(e2))
}

/// Mean sprite color of an identity: a gray base shifted along a
/// luminance-neutral hue circle, one step per identity.
pub fn identity_mean_color(identity: usize) -> [f64; 3] {
    let (e1, e2) = chroma_axes();
    let phi = TAU * identity as f64 / NUM_IDENTITIES as f64;
    [0, 1, 2].map(|c| BASE_COLOR + HUE_OFFSET * (phi.cos() * e1[c] + phi.sin() * e2[c]))
}

/// Stripe colour for texture coordinates `(u, v)` relative to the sprite center.
fn sprite_color(identity: usize, u: f64, v: f64) -> [f64; 3] {
    let palette = identity % 3;
    let pattern = (identity / 3) % 4;
    let coord = match pattern {
        0 => u,
        1 => v,
        2 => (u + v) / std::f64::consts::SQRT_2,
        _ => (u - v) / std::f64::consts::SQRT_2,
    };
    let sign = if (coord / (STRIPE_PERIOD / 2.0)).floor().rem_euclid(2.0) < 1.0 {
        1.0
    } else {
        -1.0
    };
    let d = PALETTE_CONTRAST[palette];
    let mean = identity_mean_color(identity);
    [0, 1, 2].map(|c| (mean[c] + sign * d[c]).clamp(0.0, 1.0))
}

/// Seeded, darker textured background for `scene_id`.
pub fn background(scene_id: usize, canvas: usize) -> Image {
    let seed = SeedSpec::new(0xB6_5CE4E);
    let mut rng = seed.stream(&format!("bench/scene/{scene_id}"));
    // broad shading plus finer texture
    let waves: Vec<(f64, f64, f64, f64)> = (0..8)
        .map(|i| {
            let (f, amp) = if i < 3 { (0.012, 0.12) } else { (0.08, 0.03) };
            (
                rng.random_range(-f..f),
                rng.random_range(-f..f),
                rng.random_range(0.0..TAU),
                rng.random_range(0.5 * amp..amp),
            )
        })
        .collect();
    let tint: [f64; 3] = [
        rng.random_range(0.15..0.35),
        rng.random_range(0.15..0.35),
        rng.random_range(0.15..0.35),
    ];
    let mut img = Image::new(canvas, canvas, 3);
    for r in 0..canvas {
        for c in 0..canvas {
            let f: f64 = waves
                .iter()
                .map(|&(fy, fx, ph, amp)| amp * (TAU * (fy * r as f64 + fx * c as f64) + ph).sin())
                .sum();
            let grain: f64 = rng.random_range(-0.02..0.02);
            for (k, t) in tint.iter().enumerate() {
                img.set(r, c, k, (t + f + grain).clamp(0.0, 1.0));
            }
        }
    }
    img
}

/// Renders a clip; fails if the trajectory leaves the canvas.
pub fn generate_clip(spec: &SceneSpec) -> Result<VideoClip> {
    spec.validate()?;
    let bg = background(spec.scene_id, spec.canvas);
    let n = spec.canvas as f64;
    let center = n / 2.0;
    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let (dy, dx, scale) = trajectory(spec, t)?;
        let half = spec.sprite_size as f64 * scale / 2.0;
        let (cy, cx) = (center + dy, center + dx);
        if cy - half < 0.0 || cx - half < 0.0 || cy + half > n || cx + half > n {
            return Err(Error::param(
                "trajectory",
                format!("sprite leaves the canvas at frame {t} (center {cy:.1}, {cx:.1})"),
            ));
        }
        let mut frame = bg.clone();
        let (r0, r1) = ((cy - half).round() as usize, (cy + half).round() as usize);
        let (c0, c1) = ((cx - half).round() as usize, (cx + half).round() as usize);
        for r in r0..r1 {
            for c in c0..c1 {
                let u = (r as f64 + 0.5 - cy) / scale;
                let v = (c as f64 + 0.5 - cx) / scale;
                let col = sprite_color(spec.identity_id, u, v);
                for (k, value) in col.iter().enumerate() {
                    frame.set(r, c, k, *value);
                }
            }
        }
        frames.push(frame);
    }
    VideoClip::new(frames, FRAME_RATE)
}
