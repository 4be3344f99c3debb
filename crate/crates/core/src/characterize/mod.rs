//! Optical and image-quality measurements.

mod mtf;
pub(crate) mod quality;

use serde::{Deserialize, Serialize};

pub use mtf::{gaussian_mtf50, mtf50, mtf50_from_curve, mtf_curve, vgi, Mtf50, MtfPoint, MTF_SAMPLES};
pub use quality::{mse, psnr, psnr_from_mse, ssim, QualityReport};

use crate::error::Result;
use crate::optics::Psf;

/// Default core radius for the veiling glare index, in pixels.
pub const DEFAULT_VGI_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalReport {
    /// Cycles per pixel.
    pub mtf50: f64,
    /// False when the MTF never falls to one half (reported as Nyquist).
    pub mtf50_reached: bool,
    pub vgi: f64,
    /// Radius the VGI was integrated with, pixels.
    pub vgi_core_radius: f64,
    pub transmittance: f64,
}

pub fn characterize_psf(psf: &Psf, core_radius: f64) -> Result<OpticalReport> {
    let m = mtf50(psf);
    Ok(OpticalReport {
        mtf50: m.frequency,
        mtf50_reached: m.reached,
        vgi: vgi(psf, core_radius)?,
        vgi_core_radius: core_radius,
        transmittance: psf.transmittance(),
    })
}

/// Column order of characterization CSV rows.
pub const CHARACTERIZATION_HEADER: [&str; 9] = [
    "config_id",
    "layers",
    "age_days",
    "mtf50",
    "vgi",
    "transmittance",
    "ssim",
    "psnr",
    "mse",
];

/// One appended row of the characterization table; quality columns are
/// empty when no image pair was measured.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationRow {
    pub config_id: String,
    pub layers: u32,
    pub age_days: f64,
    pub optical: OpticalReport,
    pub quality: Option<QualityReport>,
}

impl CharacterizationRow {
    pub fn fields(&self) -> Vec<String> {
        let q = self.quality;
        let opt = |f: fn(&QualityReport) -> f64| {
            q.as_ref().map_or(String::new(), |r| {
                let v = f(r);
                if v.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{v:.6}")
                }
            })
        };
        vec![
            self.config_id.clone(),
            self.layers.to_string(),
            format!("{:.3}", self.age_days),
            format!("{:.6}", self.optical.mtf50),
            format!("{:.6}", self.optical.vgi),
            format!("{:.6}", self.optical.transmittance),
            opt(|r| r.ssim),
            opt(|r| r.psnr),
            opt(|r| r.mse),
        ]
    }
}
