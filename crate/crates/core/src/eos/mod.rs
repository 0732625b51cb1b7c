//! Equation-of-state parameterization: a synthetic simulator of Massieu
//! potential derivatives, a linear fitter, refinement around the critical
//! point and spinodal region, and the campaign that drives them through the
//! workflow manager.

mod campaign;
mod fit;
mod form;
mod refine;
mod simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wms::WmsError;

pub use campaign::{
    campaign_ttl, max_relative_change, run_eos_campaign, CampaignConfig, CampaignOutcome, CampaignReport,
    ClusterConfig, CostConfig, EosModel, IterationFit, TaskStats,
};
pub use fit::{
    create_eos_input_from_results, estimate_critical_point, fit_vle_curve, CriticalPoint, EosFit, FitInput, FitRow,
    CRITICAL_GRID,
};
pub use form::{falling, truth_derivs, DerivEntry, Eos, EosForm, EosTerm, MassieuDerivs, DEFAULT_DERIVS};
pub use refine::{
    refine_around_critical_point, refine_around_vle, spinodal_densities, RefineConfig, VleRefinement, SAME_STATE_REL,
};
pub use simulate::{format_result, simulate_state_point, write_result_file, RESULT_FILE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("task parameter `{0}` missing")]
    MissingParam(String),
    #[error("invalid state point T = {t}, rho = {rho}")]
    InvalidState { t: f64, rho: f64 },
    #[error("no simulation results to fit")]
    EmptyResults,
    #[error("{rows} fit rows for {terms} coefficients")]
    TooFewRows { rows: usize, terms: usize },
    #[error("fit design matrix is rank deficient")]
    RankDeficient,
    #[error("fit has no critical point estimate")]
    NoCriticalEstimate,
    #[error("no spinodal sign change of dp/drho at T = {t}")]
    NoSpinodal { t: f64 },
    #[error("not converged after {iterations} iterations")]
    NotConverged { iterations: u32 },
    #[error("invalid campaign configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Wms(#[from] WmsError),
    #[error("{0}")]
    Io(String),
}

/// Reduced temperature and density of one simulation, with the refinement
/// iteration that requested it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub rho: f64,
    pub step: u32,
}

impl StatePoint {
    pub fn new(t: f64, rho: f64, step: u32) -> Result<Self, EosError> {
        if t > 0.0 && rho > 0.0 && t.is_finite() && rho.is_finite() {
            Ok(StatePoint { t, rho, step })
        } else {
            Err(EosError::InvalidState { t, rho })
        }
    }
}

#[cfg(test)]
mod tests;
