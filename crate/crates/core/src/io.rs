//! File I/O: PNG / binary PNM images, clip directories and atomic writes.
//!
//! A clip directory holds `frame_0001.png`, `frame_0002.png`, ... plus a
//! `clip.json` manifest. Every writer in this module goes through
//! [`write_atomic`], so an interrupted run leaves either the old file or the
//! complete new one.

use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, VideoClip};

pub const CLIP_MANIFEST: &str = "clip.json";

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&text, path)
}

/// Parses JSON; errors name the offending value as a JSON pointer (`/a/0/b`).
pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        Error::Parse {
            path: path.to_path_buf(),
            reason: format!("at `{pointer}`: {}", e.inner()),
        }
    })
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("pgm") | Some("ppm") | Some("pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::Format {
            path: path.to_path_buf(),
            reason: "expected a .png, .pgm or .ppm extension".into(),
        }),
    }
}

/// Encodes an image at 8 bits per channel.
pub fn encode_image(img: &Image, format: ImageFormat) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynamic = if img.channels() == 1 {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, bytes).expect("buffer size"))
    } else {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, bytes).expect("buffer size"))
    };
    let mut out = Cursor::new(Vec::new());
    dynamic.write_to(&mut out, format).map_err(|e| Error::Format {
        path: PathBuf::new(),
        reason: e.to_string(),
    })?;
    Ok(out.into_inner())
}

pub fn save_image(img: &Image, path: &Path) -> Result<()> {
    let format = format_for(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if img.channels() == 3 && ext.eq_ignore_ascii_case("pgm") {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: "PGM holds one channel; use .ppm or .png for color".into(),
        });
    }
    let bytes = encode_image(img, format).map_err(|e| match e {
        Error::Format { reason, .. } => Error::Format {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })?;
    write_atomic(path, &bytes)
}

pub fn decode_image(bytes: &[u8], path: &Path) -> Result<Image> {
    let format = image::guess_format(bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if format != ImageFormat::Png && format != ImageFormat::Pnm {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("{format:?} is not supported"),
        });
    }
    let dynamic = image::load_from_memory_with_format(bytes, format).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let gray = matches!(
        dynamic.color(),
        image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16
    );
    if gray {
        let buf = dynamic.to_luma16();
        let data = buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect();
        Image::from_vec(h, w, 1, data)
    } else {
        let buf = dynamic.to_rgb16();
        let data = buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect();
        Image::from_vec(h, w, 3, data)
    }
}

pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipManifest {
    pub frame_rate: f64,
    pub frame_count: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

pub fn frame_file_name(t: usize) -> String {
    format!("frame_{:04}.png", t + 1)
}

pub fn save_clip(clip: &VideoClip, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (t, frame) in clip.frames().iter().enumerate() {
        save_image(frame, &dir.join(frame_file_name(t)))?;
    }
    let manifest = ClipManifest {
        frame_rate: clip.frame_rate(),
        frame_count: clip.len(),
        channels: clip.channels(),
        height: clip.height(),
        width: clip.width(),
    };
    write_json(&dir.join(CLIP_MANIFEST), &manifest)
}

pub fn load_clip(dir: &Path) -> Result<VideoClip> {
    let manifest: ClipManifest = read_json(&dir.join(CLIP_MANIFEST))?;
    let mut frames = Vec::with_capacity(manifest.frame_count);
    for t in 0..manifest.frame_count {
        let path = dir.join(frame_file_name(t));
        let img = load_image(&path)?;
        if img.channels() != manifest.channels || img.height() != manifest.height || img.width() != manifest.width {
            return Err(Error::Parse {
                path,
                reason: format!(
                    "frame is {}x{}x{}, manifest says {}x{}x{}",
                    img.height(),
                    img.width(),
                    img.channels(),
                    manifest.height,
                    manifest.width,
                    manifest.channels
                ),
            });
        }
        frames.push(img);
    }
    VideoClip::new(frames, manifest.frame_rate).map_err(|e| Error::Parse {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(ch: usize) -> Image {
        let mut img = Image::new(7, 9, ch);
        for r in 0..7 {
            for c in 0..9 {
                for k in 0..ch {
                    img.set(r, c, k, ((r * 9 + c) as f64 * 0.0173 + k as f64 * 0.1) % 1.0);
                }
            }
        }
        img
    }

    #[test]
    fn png_and_pgm_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        for (name, ch) in [("a.png", 1), ("b.png", 3), ("c.pgm", 1), ("d.ppm", 3)] {
            let img = gradient(ch);
            let path = dir.path().join(name);
            save_image(&img, &path).unwrap();
            let back = load_image(&path).unwrap();
            assert_eq!(back.channels(), ch, "{name}");
            assert!(back.max_abs_diff(&img).unwrap() <= 0.5 / 255.0 + 1e-12, "{name}");
        }
    }

    #[test]
    fn malformed_file_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.png");
        std::fs::write(&path, b"\x89PNG\r\n\x1a\nthis is not a png").unwrap();
        assert!(matches!(load_image(&path), Err(Error::Format { .. })));
        std::fs::write(&path, b"plain text").unwrap();
        assert!(matches!(load_image(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_image(Path::new("/definitely/not/here.png")).unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.png"));
    }

    #[test]
    fn color_pgm_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(save_image(&gradient(3), &dir.path().join("x.pgm")).is_err());
    }

    #[test]
    fn clip_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let clip = VideoClip::new(vec![gradient(3), gradient(3).map(|v| 1.0 - v)], 12.5).unwrap();
        save_clip(&clip, dir.path()).unwrap();
        assert!(dir.path().join("frame_0001.png").exists());
        assert!(dir.path().join("frame_0002.png").exists());
        let back = load_clip(dir.path()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.frame_rate(), 12.5);
        assert!(back.frame(1).max_abs_diff(clip.frame(1)).unwrap() <= 0.5 / 255.0 + 1e-12);
    }
}
