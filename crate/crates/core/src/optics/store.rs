//! PSF sidecar format.
//!
//! A PSF is stored as two files in one directory:
//!
//! * `psf.json`: metadata ([`PsfMetadata`]),
//! * `psf.bin`: `kernel_size * kernel_size` little-endian IEEE-754 `f64`
//!   weights, row-major, no header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Psf, ScatterConfig};
use crate::error::{Error, Result};
use crate::io::{read_json, write_atomic, write_json};
use crate::kernel::Kernel2D;

pub const PSF_JSON: &str = "psf.json";
pub const PSF_BIN: &str = "psf.bin";
pub const PSF_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsfMetadata {
    pub format_version: u32,
    pub kernel_size: usize,
    pub transmittance: f64,
    pub channel_gain: [f64; 3],
    /// Always `"f64-le"`.
    pub dtype: String,
    pub data_file: String,
    /// Sum of the stored weights, for a quick integrity check.
    pub weight_sum: f64,
    /// Configuration that produced the PSF, when synthesized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ScatterConfig>,
}

pub fn save_psf(psf: &Psf, dir: &Path, source: Option<&ScatterConfig>) -> Result<()> {
    let k = psf.kernel();
    let meta = PsfMetadata {
        format_version: PSF_FORMAT_VERSION,
        kernel_size: k.size(),
        transmittance: psf.transmittance(),
        channel_gain: psf.channel_gain(),
        dtype: "f64-le".into(),
        data_file: PSF_BIN.into(),
        weight_sum: k.sum(),
        source: source.cloned(),
    };
    let bytes: Vec<u8> = k.weights().iter().flat_map(|w| w.to_le_bytes()).collect();
    write_atomic(&dir.join(PSF_BIN), &bytes)?;
    write_json(&dir.join(PSF_JSON), &meta)
}

/// Loads a PSF from a directory or from the path of its `psf.json`.
pub fn load_psf(path: &Path) -> Result<(Psf, PsfMetadata)> {
    let json = if path.is_dir() {
        path.join(PSF_JSON)
    } else {
        path.to_path_buf()
    };
    let meta: PsfMetadata = read_json(&json)?;
    let parse_err = |reason: String| Error::Parse {
        path: json.clone(),
        reason,
    };
    if meta.dtype != "f64-le" {
        return Err(parse_err(format!("unsupported dtype `{}`", meta.dtype)));
    }
    let bin = json.parent().unwrap_or_else(|| Path::new(".")).join(&meta.data_file);
    let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    let n = meta.kernel_size * meta.kernel_size;
    if bytes.len() != n * 8 {
        return Err(Error::Parse {
            path: bin,
            reason: format!("expected {} bytes, found {}", n * 8, bytes.len()),
        });
    }
    let weights = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let kernel = Kernel2D::new(meta.kernel_size, weights).map_err(|e| parse_err(e.to_string()))?;
    let psf =
        Psf::with_channel_gain(kernel, meta.transmittance, meta.channel_gain).map_err(|e| parse_err(e.to_string()))?;
    Ok((psf, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::synthesize_psf;

    #[test]
    fn psf_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ScatterConfig::with_layers(4);
        cfg.kernel_size = 41;
        let psf = synthesize_psf(&cfg).unwrap();
        save_psf(&psf, dir.path(), Some(&cfg)).unwrap();
        let (back, meta) = load_psf(dir.path()).unwrap();
        assert_eq!(back, psf);
        assert_eq!(meta.source, Some(cfg));
        let (again, _) = load_psf(&dir.path().join(PSF_JSON)).unwrap();
        assert_eq!(again, psf);
    }

    #[test]
    fn truncated_binary_rejected() {
        let dir = tempfile::tempdir().unwrap();
        save_psf(&Psf::delta(5).unwrap(), dir.path(), None).unwrap();
        std::fs::write(dir.path().join(PSF_BIN), [0u8; 16]).unwrap();
        assert!(matches!(load_psf(dir.path()), Err(Error::Parse { .. })));
    }
}
