//! The bundled standard test images.
//!
//! Six procedurally generated 96x96 RGB scenes with smooth shading, hard
//! edges and some fine texture. They are regenerated from a fixed seed, so
//! every build sees the same pixels.

use rand::Rng;

use crate::image::Image;
use crate::seed::SeedSpec;

pub const TEST_IMAGE_SIZE: usize = 96;
const TEST_SEED: SeedSpec = SeedSpec::new(0x7E57_1A6E);

fn rgb(f: impl Fn(f64, f64) -> [f64; 3]) -> Image {
    let n = TEST_IMAGE_SIZE;
    let mut img = Image::new(n, n, 3);
    for r in 0..n {
        for c in 0..n {
            let px = f(r as f64 / n as f64, c as f64 / n as f64);
            for (k, v) in px.iter().enumerate() {
                img.set(r, c, k, v.clamp(0.0, 1.0));
            }
        }
    }
    img
}

/// Sum of a few random low-frequency sinusoids, roughly in [-1, 1].
fn smooth_field(label: &str, terms: usize, max_freq: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut rng = TEST_SEED.stream(label);
    (0..terms)
        .map(|_| {
            (
                rng.random_range(-max_freq..max_freq),
                rng.random_range(-max_freq..max_freq),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.3..1.0) / terms as f64,
            )
        })
        .collect()
}

fn eval_field(field: &[(f64, f64, f64, f64)], y: f64, x: f64) -> f64 {
    field
        .iter()
        .map(|&(fy, fx, ph, a)| a * (std::f64::consts::TAU * (fy * y + fx * x) + ph).sin())
        .sum()
}

fn shapes_scene() -> Image {
    let discs = [
        (0.3, 0.3, 0.15, [0.85, 0.3, 0.2]),
        (0.65, 0.7, 0.2, [0.2, 0.5, 0.85]),
        (0.7, 0.25, 0.12, [0.9, 0.85, 0.3]),
    ];
    rgb(|y, x| {
        let mut px = [0.25 + 0.4 * x, 0.3 + 0.3 * y, 0.45];
        for (cy, cx, r, col) in discs {
            if (y - cy).powi(2) + (x - cx).powi(2) < r * r {
                px = col;
            }
        }
        if (0.1..0.2).contains(&y) && (0.55..0.9).contains(&x) {
            px = [0.1, 0.1, 0.12];
        }
        px
    })
}

fn landscape() -> Image {
    let f = smooth_field("landscape", 6, 3.0);
    let g = smooth_field("landscape/detail", 10, 10.0);
    rgb(|y, x| {
        let v = 0.5 + 0.35 * eval_field(&f, y, x) + 0.12 * eval_field(&g, y, x);
        let sky = y < 0.35 + 0.05 * (x * 9.0).sin();
        if sky {
            [0.55 + 0.2 * y, 0.7 + 0.1 * y, 0.9]
        } else {
            [0.35 * v + 0.1, 0.55 * v + 0.1, 0.25 * v]
        }
    })
}

fn portrait() -> Image {
    rgb(|y, x| {
        let face = ((y - 0.5) / 0.32).powi(2) + ((x - 0.5) / 0.24).powi(2) < 1.0;
        let eye = |cx: f64| ((y - 0.42) / 0.04).powi(2) + ((x - cx) / 0.06).powi(2) < 1.0;
        let mouth = ((y - 0.68) / 0.03).powi(2) + ((x - 0.5) / 0.1).powi(2) < 1.0;
        let hair = y < 0.3 && ((y - 0.3) / 0.2).powi(2) + ((x - 0.5) / 0.3).powi(2) < 1.0;
        if eye(0.4) || eye(0.6) {
            [0.1, 0.08, 0.06]
        } else if mouth {
            [0.7, 0.25, 0.25]
        } else if hair {
            [0.3 + 0.05 * (x * 80.0).sin(), 0.2, 0.1]
        } else if face {
            [0.9 - 0.2 * y, 0.7 - 0.15 * y, 0.6 - 0.1 * y]
        } else {
            [0.3, 0.35 + 0.2 * x, 0.4]
        }
    })
}

fn rings() -> Image {
    rgb(|y, x| {
        let d = ((y - 0.5).powi(2) + (x - 0.5).powi(2)).sqrt();
        let v = 0.5 + 0.3 * (d * 40.0).cos() * (-d * 3.0).exp();
        [v, 0.8 * v + 0.1, 0.6 * v + 0.2]
    })
}

fn blocks() -> Image {
    let mut rng = TEST_SEED.stream("blocks");
    let rects: Vec<(f64, f64, f64, f64, [f64; 3])> = (0..14)
        .map(|_| {
            let y = rng.random_range(0.0..0.85);
            let x = rng.random_range(0.0..0.85);
            let h = rng.random_range(0.05..0.25);
            let w = rng.random_range(0.05..0.25);
            let col = [rng.random(), rng.random(), rng.random()];
            (y, x, h, w, col)
        })
        .collect();
    rgb(|y, x| {
        let mut px = [0.6, 0.6, 0.55];
        for &(ry, rx, rh, rw, col) in &rects {
            if y >= ry && y < ry + rh && x >= rx && x < rx + rw {
                px = col;
            }
        }
        px
    })
}

fn fabric() -> Image {
    let f = smooth_field("fabric", 5, 2.0);
    rgb(|y, x| {
        let base = 0.5 + 0.25 * eval_field(&f, y, x);
        let weave = 0.06 * ((y * 96.0 / 3.0).sin() * (x * 96.0 / 5.0).sin());
        [base + weave, 0.8 * base + weave, 0.6 * base + 0.1]
    })
}

/// The six standard test images, in a fixed order.
pub fn standard_test_set() -> Vec<Image> {
    vec![shapes_scene(), landscape(), portrait(), rings(), blocks(), fabric()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_is_deterministic_and_in_range() {
        let a = standard_test_set();
        let b = standard_test_set();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        for img in &a {
            assert_eq!(img.channels(), 3);
            assert!(img.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
