//! Weighted linear least squares for the coefficients `n_k`, and the
//! critical-point estimate of the fitted equation of state.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Eos, EosError, EosForm, MassieuDerivs};

/// Side length of the critical-point search grid.
pub const CRITICAL_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub rho: f64,
    pub step: u32,
    pub n: u32,
    pub m: u32,
    pub value: f64,
    /// `1 / sigma^2`, or 1 for exact values.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitInput {
    pub rows: Vec<FitRow>,
}

impl FitInput {
    /// Smallest and largest sampled `(T, rho)`.
    pub fn envelope(&self) -> Option<((f64, f64), (f64, f64))> {
        let first = self.rows.first()?;
        let mut t = (first.t, first.t);
        let mut r = (first.rho, first.rho);
        for row in &self.rows {
            t = (t.0.min(row.t), t.1.max(row.t));
            r = (r.0.min(row.rho), r.1.max(row.rho));
        }
        Some((t, r))
    }
}

/// Flattens results into one row per derivative. Repeats of the same state
/// and order are merged with weights `w_i`: value `sum w_i v_i / sum w_i`,
/// weight `sum w_i`.
pub fn create_eos_input_from_results(results: &[MassieuDerivs]) -> Result<FitInput, EosError> {
    if results.is_empty() {
        return Err(EosError::EmptyResults);
    }
    // key: (T bits, rho bits, n, m); value: (order seen, sum w, sum w v, max step)
    let mut merged: BTreeMap<(u64, u64, u32, u32), (usize, f64, f64, u32)> = BTreeMap::new();
    for r in results {
        for e in &r.entries {
            let w = if e.sigma > 0.0 { 1.0 / (e.sigma * e.sigma) } else { 1.0 };
            let next = merged.len();
            let slot = merged
                .entry((r.state.t.to_bits(), r.state.rho.to_bits(), e.n, e.m))
                .or_insert((next, 0.0, 0.0, 0));
            slot.1 += w;
            slot.2 += w * e.value;
            slot.3 = slot.3.max(r.state.step);
        }
    }
    let mut rows: Vec<(usize, FitRow)> = merged
        .into_iter()
        .map(|((t, rho, n, m), (order, w, wv, step))| {
            let row = FitRow {
                t: f64::from_bits(t),
                rho: f64::from_bits(rho),
                step,
                n,
                m,
                value: wv / w,
                weight: w,
            };
            (order, row)
        })
        .collect();
    rows.sort_by_key(|(order, _)| *order);
    Ok(FitInput {
        rows: rows.into_iter().map(|(_, r)| r).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub rho: f64,
    /// Whether Newton refinement of the grid estimate converged.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EosFit {
    pub form: EosForm,
    pub coefficients: Vec<f64>,
    /// `sqrt(sum w r^2 / rows)`.
    pub rms_residual: f64,
    pub rows: usize,
    pub critical: Option<CriticalPoint>,
    /// One more than the largest step in the input.
    pub iteration: u32,
    /// Sampled `(T, rho)` envelope.
    pub envelope: ((f64, f64), (f64, f64)),
}

impl EosFit {
    pub fn eos(&self) -> Eos {
        Eos {
            form: self.form.clone(),
            coefficients: self.coefficients.clone(),
        }
    }
}

pub fn fit_vle_curve(input: &FitInput, form: &EosForm) -> Result<EosFit, EosError> {
    let k = form.len();
    let rows = input.rows.len();
    if k == 0 {
        return Err(EosError::InvalidConfig("fit form has no terms".into()));
    }
    if rows < k {
        return Err(EosError::TooFewRows { rows, terms: k });
    }
    let mut x = DMatrix::<f64>::zeros(rows, k);
    let mut y = DVector::<f64>::zeros(rows);
    for (i, r) in input.rows.iter().enumerate() {
        let sw = r.weight.sqrt();
        for j in 0..k {
            x[(i, j)] = sw * form.basis(j, r.n, r.m, 1.0 / r.t, r.rho);
        }
        y[i] = sw * r.value;
    }
    if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
        return Err(EosError::InvalidConfig("non-finite fit input".into()));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * f64::EPSILON * rows.max(k) as f64;
    if smax == 0.0 || svd.singular_values.iter().any(|&s| s <= tol) {
        return Err(EosError::RankDeficient);
    }
    let coef = svd.solve(&y, tol).map_err(|_| EosError::RankDeficient)?;
    let resid = &x * &coef - &y;
    let rms_residual = (resid.norm_squared() / rows as f64).sqrt();
    let envelope = input.envelope().expect("rows is non-empty");
    let iteration = input.rows.iter().map(|r| r.step).max().unwrap_or(0) + 1;
    let mut fit = EosFit {
        form: form.clone(),
        coefficients: coef.iter().copied().collect(),
        rms_residual,
        rows,
        critical: None,
        iteration,
        envelope,
    };
    fit.critical = estimate_critical_point(&fit.eos(), envelope);
    Ok(fit)
}

/// Grid minimum of `|dp/drho| + |d2p/drho2|` over the envelope, polished by
/// Newton's method on both conditions when that converges.
pub fn estimate_critical_point(eos: &Eos, envelope: ((f64, f64), (f64, f64))) -> Option<CriticalPoint> {
    let ((t0, t1), (r0, r1)) = envelope;
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (CRITICAL_GRID - 1) as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..CRITICAL_GRID {
        let t = at(t0, t1, i);
        for j in 0..CRITICAL_GRID {
            let rho = at(r0, r1, j);
            let score = eos.dp_drho(t, rho).abs() + eos.d2p_drho2(t, rho).abs();
            if score.is_finite() && best.is_none_or(|b| score < b.0) {
                best = Some((score, t, rho));
            }
        }
    }
    let (_, t, rho) = best?;
    Some(match newton_critical(eos, t, rho) {
        Some((t, rho)) => CriticalPoint { t, rho, refined: true },
        None => CriticalPoint { t, rho, refined: false },
    })
}

fn newton_critical(eos: &Eos, mut t: f64, mut rho: f64) -> Option<(f64, f64)> {
    for _ in 0..50 {
        let f = eos.critical_residual(t, rho);
        if f[0].abs().max(f[1].abs()) < 1e-13 {
            return Some((t, rho));
        }
        let (ht, hr) = (1e-6 * t, 1e-6 * rho);
        let dt = |s: f64| eos.critical_residual(t + s * ht, rho);
        let dr = |s: f64| eos.critical_residual(t, rho + s * hr);
        let (tp, tm, rp, rm) = (dt(1.0), dt(-1.0), dr(1.0), dr(-1.0));
        let j = [
            [(tp[0] - tm[0]) / (2.0 * ht), (rp[0] - rm[0]) / (2.0 * hr)],
            [(tp[1] - tm[1]) / (2.0 * ht), (rp[1] - rm[1]) / (2.0 * hr)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let st = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let sr = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        t -= st;
        rho -= sr;
        if !(t > 0.0 && rho > 0.0 && t.is_finite() && rho.is_finite()) {
            return None;
        }
    }
    None
}
