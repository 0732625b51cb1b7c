//! Runtime estimators the scheduler can consult.

use std::collections::BTreeMap;
use std::fmt;

use super::{fit, Observation, PerfConfig, PerfModel};

/// Source of runtime estimates `t_p(N)`, refined with measured runtimes.
pub trait PerfProvider {
    /// Estimated runtime, or `None` while no estimate is available.
    fn predict(&self, params: &BTreeMap<String, f64>, resources: u32) -> Option<f64>;
    fn observe(&mut self, obs: Observation);
    fn observation_count(&self) -> usize;
}

/// Refits an empirical model after every observation.
#[derive(Debug, Clone, Default)]
pub struct ModelProvider {
    config: PerfConfig,
    observations: Vec<Observation>,
    model: Option<PerfModel>,
    cv_history: Vec<f64>,
}

impl ModelProvider {
    pub fn new(config: PerfConfig) -> Self {
        ModelProvider {
            config,
            ..Default::default()
        }
    }

    pub fn model(&self) -> Option<&PerfModel> {
        self.model.as_ref()
    }

    /// LOO error after each successful refit.
    pub fn cv_history(&self) -> &[f64] {
        &self.cv_history
    }
}

impl PerfProvider for ModelProvider {
    fn predict(&self, params: &BTreeMap<String, f64>, resources: u32) -> Option<f64> {
        self.model.as_ref()?.predict(params, resources).ok()
    }

    fn observe(&mut self, obs: Observation) {
        self.observations.push(obs);
        match fit(&self.observations, &self.config) {
            Ok(m) => {
                self.cv_history.push(m.fit_stats.cv_error);
                self.model = Some(m);
            }
            Err(e) => log::debug!("performance model not refitted: {e}"),
        }
    }

    fn observation_count(&self) -> usize {
        self.observations.len()
    }
}

type CostFn = Box<dyn Fn(&BTreeMap<String, f64>, u32) -> f64>;

/// Exact estimates from a known cost function.
pub struct OracleProvider {
    cost: CostFn,
    seen: usize,
}

impl OracleProvider {
    pub fn new(cost: impl Fn(&BTreeMap<String, f64>, u32) -> f64 + 'static) -> Self {
        OracleProvider {
            cost: Box::new(cost),
            seen: 0,
        }
    }
}

impl fmt::Debug for OracleProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleProvider").field("seen", &self.seen).finish()
    }
}

impl PerfProvider for OracleProvider {
    fn predict(&self, params: &BTreeMap<String, f64>, resources: u32) -> Option<f64> {
        Some((self.cost)(params, resources))
    }

    fn observe(&mut self, _obs: Observation) {
        self.seen += 1;
    }

    fn observation_count(&self) -> usize {
        self.seen
    }
}
