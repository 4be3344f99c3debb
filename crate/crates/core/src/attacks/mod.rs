//! Reconstruction attacks against scattered footage.
//!
//! Three attacker levels are modeled:
//!
//! * black box: a Gaussian kernel guessed from the footage alone, then Wiener,
//! * calibrated: the true PSF is known and inverted by Wiener or Richardson-Lucy,
//! * paired data: a patch-wise ridge restorer fitted on clean/degraded pairs.

mod blind;
mod deconv;
mod eval;
mod ridge;

use serde::{Deserialize, Serialize};

pub use blind::{blind_search, estimate_kernel_blind, laplacian_variance, BLIND_K, BLIND_SIGMAS};
pub use deconv::{
    richardson_lucy, richardson_lucy_raw, wiener_deconvolve, RichardsonLucy, RlConfig, WienerConfig, WienerFilter,
    RL_ITERATION_SWEEP, WIENER_K_SWEEP,
};
pub use eval::{
    attack_features, blind_attack, clean_attack_models, degrade_subsampled, evaluate_attack, rl_attack,
    run_attack_suite, subsample, wiener_attack, AttackContext, AttackMethod, AttackSuiteConfig,
};
pub use ridge::{ridge_apply, ridge_train, LinearRestorer, RidgeConfig, RidgeProblem, MIN_RIDGE_PATCHES};

/// Column order of attack CSV rows.
pub const ATTACK_HEADER: [&str; 5] = ["method", "ssim", "psnr", "acc_act", "acc_s"];

/// One row of an attack table, all metrics on the same held-out clips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackReport {
    pub method: String,
    pub ssim: f64,
    #[serde(with = "crate::characterize::quality::psnr_serde")]
    pub psnr: f64,
    pub identity_accuracy: f64,
    pub action_accuracy: f64,
}

impl AttackReport {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            format!("{:.6}", self.ssim),
            if self.psnr.is_infinite() {
                "inf".into()
            } else {
                format!("{:.6}", self.psnr)
            },
            format!("{:.6}", self.action_accuracy),
            format!("{:.6}", self.identity_accuracy),
        ]
    }
}

/// Attack rows as CSV with [`ATTACK_HEADER`].
pub fn attack_table_csv(reports: &[AttackReport]) -> crate::Result<Vec<u8>> {
    let err = |e: csv::Error| crate::Error::Numerical(format!("csv encoding: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ATTACK_HEADER).map_err(err)?;
    for r in reports {
        w.write_record(r.fields()).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| crate::Error::Numerical(format!("csv encoding: {e}")))
}
