//! New state points near the critical point and the spinodal region.

use serde::{Deserialize, Serialize};

use super::{Eos, EosError, EosFit, StatePoint};

/// Relative distance under which two states count as the same.
pub const SAME_STATE_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub critical_t_factors: Vec<f64>,
    pub critical_rho_factors: Vec<f64>,
    pub vle_t_factors: Vec<f64>,
    /// Density range of the spinodal sign scan.
    pub scan_rho_min: f64,
    pub scan_rho_max: f64,
    pub scan_steps: usize,
    /// Bisection bracket width at which a root is accepted.
    pub tolerance: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            critical_t_factors: vec![0.98, 1.0, 1.02],
            critical_rho_factors: vec![0.9, 1.0, 1.1],
            vle_t_factors: vec![0.85, 0.9, 0.95],
            scan_rho_min: 0.005,
            scan_rho_max: 2.0,
            scan_steps: 2000,
            tolerance: 1e-6,
        }
    }
}

/// Spinodal densities found for each refinement temperature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VleRefinement {
    pub points: Vec<StatePoint>,
    /// One [`EosError::NoSpinodal`] per skipped temperature.
    pub skipped: Vec<EosError>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME_STATE_REL * a.abs().max(b.abs())
}

fn is_new(t: f64, rho: f64, sampled: &[StatePoint], fresh: &[StatePoint]) -> bool {
    !sampled.iter().chain(fresh).any(|s| same(s.t, t) && same(s.rho, rho))
}

pub fn refine_around_critical_point(
    fit: &EosFit,
    cfg: &RefineConfig,
    sampled: &[StatePoint],
) -> Result<Vec<StatePoint>, EosError> {
    let c = fit.critical.ok_or(EosError::NoCriticalEstimate)?;
    let mut out = Vec::new();
    for ft in &cfg.critical_t_factors {
        for fr in &cfg.critical_rho_factors {
            let (t, rho) = (c.t * ft, c.rho * fr);
            if t > 0.0 && rho > 0.0 && is_new(t, rho, sampled, &out) {
                out.push(StatePoint { t, rho, step: fit.iteration });
            }
        }
    }
    Ok(out)
}

pub fn refine_around_vle(fit: &EosFit, cfg: &RefineConfig, sampled: &[StatePoint]) -> Result<VleRefinement, EosError> {
    let c = fit.critical.ok_or(EosError::NoCriticalEstimate)?;
    let eos = fit.eos();
    let mut out = VleRefinement::default();
    for f in &cfg.vle_t_factors {
        let t = c.t * f;
        match spinodal_densities(&eos, t, cfg) {
            Some((lo, hi)) => {
                for rho in [lo, hi] {
                    if is_new(t, rho, sampled, &out.points) {
                        out.points.push(StatePoint { t, rho, step: fit.iteration });
                    }
                }
            }
            None => {
                log::warn!("no spinodal at T = {t}; temperature skipped");
                out.skipped.push(EosError::NoSpinodal { t });
            }
        }
    }
    Ok(out)
}

/// The two lowest densities in the scan range where `dp/drho` changes sign.
pub fn spinodal_densities(eos: &Eos, t: f64, cfg: &RefineConfig) -> Option<(f64, f64)> {
    if !(t > 0.0) || cfg.scan_steps < 2 || !(cfg.scan_rho_max > cfg.scan_rho_min) {
        return None;
    }
    let g = |rho: f64| eos.dp_drho(t, rho);
    let width = cfg.scan_rho_max - cfg.scan_rho_min;
    let at = |i: usize| cfg.scan_rho_min + width * i as f64 / cfg.scan_steps as f64;
    let mut roots = Vec::with_capacity(2);
    let mut prev = (at(0), g(at(0)));
    for i in 1..=cfg.scan_steps {
        let x = at(i);
        let gx = g(x);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1.signum() != gx.signum() && gx != 0.0 {
            roots.push(bisect(&g, prev.0, x, prev.1, cfg.tolerance));
        }
        if roots.len() == 2 {
            return Some((roots[0], roots[1]));
        }
        prev = (x, gx);
    }
    None
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, tol: f64) -> f64 {
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
