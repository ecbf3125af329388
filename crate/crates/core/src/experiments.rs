//! Single sweep points of the interferometer and imaging experiments.

use crate::error::{Error, Result};
use crate::fisher::{chi_menos, stats_from_analytic, MenosReport};
use crate::models::{hg_mode_stats, interferometer_model, interferometer_stats, superres_model};

/// Worst-case susceptibility of the two-detector interferometer readout (unit visibility)
/// at offset `phi`, with logarithmic derivatives taken from the closed-form fringe.
pub fn interferometer_chi(theta: f64, phi: f64) -> Result<MenosReport> {
    let stats = stats_from_analytic(&interferometer_stats(theta, phi, 1.0)?);
    chi_menos(&interferometer_model(theta, phi), &stats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerRow {
    pub phi: f64,
    pub cfi_v1: f64,
    pub cfi_v: f64,
    /// `+∞` where the susceptibility is undefined (`F_C = 0` at the fringe extremes).
    pub chi: f64,
}

/// Row at `θ = 0`.
pub fn interferometer_row(phi: f64, visibility: f64) -> Result<InterferometerRow> {
    let cfi_v1 = stats_from_analytic(&interferometer_stats(0.0, phi, 1.0)?).cfi;
    let cfi_v = stats_from_analytic(&interferometer_stats(0.0, phi, visibility)?).cfi;
    let chi = match interferometer_chi(0.0, phi) {
        Ok(r) => r.chi,
        Err(Error::UndefinedSusceptibility(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(InterferometerRow { phi, cfi_v1, cfi_v, chi })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgRow {
    pub theta: f64,
    pub cfi: f64,
    pub chi: f64,
    pub qfi: f64,
}

/// Hermite-Gauss sorting into `k` outcomes; `χ` uses the 4×4 imaging model with the
/// extreme mode logarithmic derivatives.
pub fn superres_hg_row(theta: f64, sigma: f64, k: usize) -> Result<HgRow> {
    let model = superres_model(theta, sigma)?;
    let stats = stats_from_analytic(&hg_mode_stats(theta, sigma, k)?);
    let chi = chi_menos(&model, &stats)?.chi;
    Ok(HgRow {
        theta,
        cfi: stats.cfi,
        chi,
        qfi: model.qfi_known.expect("analytic QFI"),
    })
}
