//! JSON report documents emitted by the CLI.

use hiercon::dde_sim::Classification;
use hiercon::delay::Verdict;
use hiercon::powershare::PowerReport;
use hiercon::spectral::{CInvariance, SpectralReport};
use serde::Serialize;

#[derive(Serialize)]
pub struct SpectrumReport {
    #[serde(flatten)]
    pub spectral: SpectralReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_invariance: Option<CInvariance>,
}

#[derive(Serialize)]
pub struct SimReport {
    pub classification: Classification,
    pub consensus_prediction: f64,
    pub verdict: Verdict,
    pub binding_layers: Vec<usize>,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub conservation_max_dev: f64,
    /// None means the default step rule was used.
    pub step: Option<f64>,
    pub t_end: f64,
    pub stride: usize,
    pub defaults_applied: Vec<&'static str>,
    pub samples: usize,
}

#[derive(Serialize)]
pub struct PowershareReport {
    #[serde(flatten)]
    pub sim: SimReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerReport>,
}
