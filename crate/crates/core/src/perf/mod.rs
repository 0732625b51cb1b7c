//! Empirical performance models in the Extra-P normal form.
//!
//! A hypothesis is `t = c0 + c1 * prod_v v^i_v * log2(v)^j_v` over the
//! variables that vary in the data. Every hypothesis is fitted by relative
//! least squares and the one with the smallest leave-one-out error wins.

mod provider;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use provider::{ModelProvider, OracleProvider, PerfProvider};

/// Name under which the resource count `N` enters a model.
pub const RESOURCE_VAR: &str = "N";

pub const DEFAULT_I_EXPONENTS: [f64; 12] = [
    0.0,
    0.25,
    1.0 / 3.0,
    0.5,
    2.0 / 3.0,
    0.75,
    1.0,
    4.0 / 3.0,
    1.5,
    2.0,
    2.5,
    3.0,
];
pub const DEFAULT_J_EXPONENTS: [u32; 3] = [0, 1, 2];

const MAX_HYPOTHESES: usize = 50_000;
/// Two LOO errors closer than this count as a tie.
const CV_TIE: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate design: every hypothesis has singular normal equations")]
    DegenerateDesign,
    #[error("missing variable `{0}`")]
    MissingVariable(String),
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("search space of {0} hypotheses is too large; restrict the variables")]
    SearchSpaceTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub params: BTreeMap<String, f64>,
    pub resources: u32,
    pub runtime: f64,
}

impl Observation {
    pub fn new(params: BTreeMap<String, f64>, resources: u32, runtime: f64) -> Self {
        Observation {
            params,
            resources,
            runtime,
        }
    }

    /// Observation depending on `N` only.
    pub fn of_resources(resources: u32, runtime: f64) -> Self {
        Observation::new(BTreeMap::new(), resources, runtime)
    }

    pub fn value(&self, var: &str) -> Option<f64> {
        if var == RESOURCE_VAR {
            Some(f64::from(self.resources))
        } else {
            self.params.get(var).copied()
        }
    }

    fn check(&self) -> Result<(), PerfError> {
        if self.resources == 0 {
            return Err(PerfError::InvalidObservation("resources must be at least 1".into()));
        }
        if !(self.runtime.is_finite() && self.runtime > 0.0) {
            return Err(PerfError::InvalidObservation(format!("runtime {} is not positive", self.runtime)));
        }
        if let Some((k, v)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(PerfError::InvalidObservation(format!("parameter {k} = {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfConfig {
    pub i_exponents: Vec<f64>,
    pub j_exponents: Vec<u32>,
    /// Lower bound applied to every prediction.
    pub floor: f64,
    /// Variables to model; `None` takes every variable that varies.
    pub variables: Option<Vec<String>>,
}

impl Default for PerfConfig {
    fn default() -> Self {
        PerfConfig {
            i_exponents: DEFAULT_I_EXPONENTS.to_vec(),
            j_exponents: DEFAULT_J_EXPONENTS.to_vec(),
            floor: 1e-9,
            variables: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub i: f64,
    pub j: u32,
}

impl Exponent {
    pub const ZERO: Exponent = Exponent { i: 0.0, j: 0 };

    pub fn is_zero(&self) -> bool {
        self.i == 0.0 && self.j == 0
    }

    fn eval(&self, v: f64) -> f64 {
        let p = if self.i == 0.0 { 1.0 } else { v.powf(self.i) };
        p * v.log2().powi(self.j as i32)
    }

    /// Whether the factor is finite for every sample value in `vals`.
    fn admissible(&self, vals: &[f64]) -> bool {
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        !(self.j > 0 && min < 1.0) && vals.iter().all(|v| self.eval(*v).is_finite())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMED: [(f64, &str); 4] = [(1.0 / 3.0, "1/3"), (2.0 / 3.0, "2/3"), (4.0 / 3.0, "4/3"), (0.25, "1/4")];
        match NAMED.iter().find(|(x, _)| (x - self.i).abs() < 1e-12) {
            Some((_, s)) => write!(f, "({s}, {})", self.j),
            None => write!(f, "({}, {})", self.i, self.j),
        }
    }
}

fn cmp_tuple(a: &[Exponent], b: &[Exponent]) -> std::cmp::Ordering {
    a.iter()
        .map(|e| (e.i, e.j))
        .partial_cmp(b.iter().map(|e| (e.i, e.j)))
        .unwrap_or(std::cmp::Ordering::Equal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfTerm {
    pub coefficient: f64,
    /// One exponent pair per model variable.
    pub exponents: Vec<Exponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    /// Residual sum of squares in seconds squared.
    pub rss: f64,
    /// Mean squared relative leave-one-out residual.
    pub cv_error: f64,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfModel {
    pub variables: Vec<String>,
    /// Constant term first, then the product term if any.
    pub terms: Vec<PerfTerm>,
    pub fit_stats: FitStats,
    pub config: PerfConfig,
    pub observations: Vec<Observation>,
}

impl PerfModel {
    /// Exponents of the non-constant term; all zero for a constant model.
    pub fn exponents(&self) -> Vec<Exponent> {
        self.terms
            .get(1)
            .map(|t| t.exponents.clone())
            .unwrap_or_else(|| vec![Exponent::ZERO; self.variables.len()])
    }

    pub fn constant(&self) -> f64 {
        self.terms[0].coefficient
    }

    /// Coefficient of the product term, 0 for a constant model.
    pub fn slope(&self) -> f64 {
        self.terms.get(1).map_or(0.0, |t| t.coefficient)
    }

    fn raw(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.exponents.iter().zip(values).map(|(e, v)| e.eval(*v)).product::<f64>())
            .sum()
    }

    /// Runtime estimate for `params` on `resources` cores, clamped to the
    /// configured floor.
    pub fn predict(&self, params: &BTreeMap<String, f64>, resources: u32) -> Result<f64, PerfError> {
        let values = self
            .variables
            .iter()
            .map(|v| {
                if v == RESOURCE_VAR {
                    Ok(f64::from(resources))
                } else {
                    params.get(v).copied().ok_or_else(|| PerfError::MissingVariable(v.clone()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = self.raw(&values);
        Ok(if t.is_finite() { t.max(self.config.floor) } else { self.config.floor })
    }

    /// Refits over the accumulated observations plus `new`. An exact
    /// duplicate leaves the model unchanged.
    pub fn update(&self, new: Observation) -> Result<PerfModel, PerfError> {
        if self.observations.contains(&new) {
            return Ok(self.clone());
        }
        let mut all = self.observations.clone();
        all.push(new);
        fit(&all, &self.config)
    }
}

impl fmt::Display for PerfModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t = {:e}", self.constant())?;
        if let Some(t) = self.terms.get(1) {
            write!(f, " + {:e}", t.coefficient)?;
            for (v, e) in self.variables.iter().zip(&t.exponents).filter(|(_, e)| !e.is_zero()) {
                write!(f, " * {v}^{e}")?;
            }
        }
        Ok(())
    }
}

fn model_variables(observations: &[Observation], config: &PerfConfig) -> Result<Vec<String>, PerfError> {
    let first = &observations[0];
    let mut names: Vec<String> = first.params.keys().cloned().collect();
    names.push(RESOURCE_VAR.to_string());
    for o in observations {
        if o.params.len() != first.params.len() || o.params.keys().any(|k| !first.params.contains_key(k)) {
            return Err(PerfError::InvalidObservation("observations disagree on parameter names".into()));
        }
    }
    let candidates = match &config.variables {
        Some(vs) => {
            for v in vs {
                if first.value(v).is_none() {
                    return Err(PerfError::MissingVariable(v.clone()));
                }
            }
            vs.clone()
        }
        None => names,
    };
    Ok(candidates
        .into_iter()
        .filter(|v| {
            let x0 = first.value(v);
            observations.iter().any(|o| o.value(v) != x0)
        })
        .collect())
}

struct Candidate {
    exponents: Vec<Exponent>,
    beta: Vec<f64>,
    cv: f64,
}

/// Weighted least squares on relative residuals with exact LOO errors from
/// the hat matrix.
fn evaluate(columns: &[Vec<f64>], t: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = t.len();
    let p = columns.len();
    let x = DMatrix::from_fn(n, p, |r, c| columns[c][r] / t[r]);
    let y = DVector::from_element(n, 1.0);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() <= smax * 1e-12 {
        return None;
    }
    let beta = svd.solve(&y, smax * 1e-14).ok()?;
    let xtx_inv = (x.transpose() * &x).try_inverse()?;
    let resid = &y - &x * &beta;
    let mut cv = 0.0;
    for r in 0..n {
        let row = x.row(r);
        let h = (row * &xtx_inv * row.transpose())[(0, 0)];
        let denom = 1.0 - h;
        if denom <= 1e-10 {
            return Some((beta.iter().copied().collect(), f64::INFINITY));
        }
        cv += (resid[r] / denom).powi(2);
    }
    Some((beta.iter().copied().collect(), cv / n as f64))
}

/// Selects and fits the best hypothesis for `observations`.
pub fn fit(observations: &[Observation], config: &PerfConfig) -> Result<PerfModel, PerfError> {
    let needed = 4;
    if observations.len() < needed {
        return Err(PerfError::InsufficientData {
            needed,
            got: observations.len(),
        });
    }
    for o in observations {
        o.check()?;
    }
    let variables = model_variables(observations, config)?;
    let t: Vec<f64> = observations.iter().map(|o| o.runtime).collect();
    let values: Vec<Vec<f64>> = variables
        .iter()
        .map(|v| observations.iter().map(|o| o.value(v).unwrap_or(0.0)).collect())
        .collect();

    let options: Vec<Vec<Exponent>> = values
        .iter()
        .map(|vals| {
            config
                .i_exponents
                .iter()
                .flat_map(|&i| config.j_exponents.iter().map(move |&j| Exponent { i, j }))
                .filter(|e| e.admissible(vals))
                .collect::<Vec<_>>()
        })
        .map(|mut opts| {
            opts.sort_by(|a, b| cmp_tuple(&[*a], &[*b]));
            opts.dedup_by(|a, b| a.i == b.i && a.j == b.j);
            if !opts.iter().any(Exponent::is_zero) {
                opts.insert(0, Exponent::ZERO);
            }
            opts
        })
        .collect();
    let total = options.iter().map(Vec::len).try_fold(1usize, |acc, k| acc.checked_mul(k));
    match total {
        Some(k) if k <= MAX_HYPOTHESES => {}
        other => return Err(PerfError::SearchSpaceTooLarge(other.unwrap_or(usize::MAX))),
    }

    let total = total.unwrap_or(0);
    let ones = vec![1.0; t.len()];
    let mut best: Option<Candidate> = None;
    for h in 0..total {
        // mixed-radix decode, last variable fastest, so tuples come in lexicographic order
        let mut rest = h;
        let mut exponents = vec![Exponent::ZERO; variables.len()];
        for (k, opts) in options.iter().enumerate().rev() {
            exponents[k] = opts[rest % opts.len()];
            rest /= opts.len();
        }
        let mut columns = vec![ones.clone()];
        if exponents.iter().any(|e| !e.is_zero()) {
            columns.push(
                (0..t.len())
                    .map(|r| exponents.iter().zip(&values).map(|(e, vals)| e.eval(vals[r])).product())
                    .collect(),
            );
        }
        if let Some((beta, cv)) = evaluate(&columns, &t) {
            if best.as_ref().is_none_or(|b| cv < b.cv - CV_TIE) {
                best = Some(Candidate { exponents, beta, cv });
            }
        }
    }

    let best = best.ok_or(PerfError::DegenerateDesign)?;
    let mut terms = vec![PerfTerm {
        coefficient: best.beta[0],
        exponents: vec![Exponent::ZERO; variables.len()],
    }];
    if best.beta.len() > 1 {
        terms.push(PerfTerm {
            coefficient: best.beta[1],
            exponents: best.exponents,
        });
    }
    let mut model = PerfModel {
        variables,
        terms,
        fit_stats: FitStats {
            rss: 0.0,
            cv_error: best.cv,
            n_obs: observations.len(),
        },
        config: config.clone(),
        observations: observations.to_vec(),
    };
    let rss = (0..t.len())
        .map(|r| {
            let vals: Vec<f64> = values.iter().map(|v| v[r]).collect();
            (t[r] - model.raw(&vals)).powi(2)
        })
        .sum();
    model.fit_stats.rss = rss;
    Ok(model)
}
