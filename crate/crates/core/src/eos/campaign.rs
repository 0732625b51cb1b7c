//! The iterated sample, fit and refine loop as a workflow model.

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{
    create_eos_input_from_results, fit_vle_curve, refine_around_critical_point, refine_around_vle,
    simulate_state_point, write_result_file, CriticalPoint, Eos, EosError, EosFit, EosForm, MassieuDerivs,
    RefineConfig, StatePoint, DEFAULT_DERIVS,
};
use crate::perf::{ModelProvider, PerfConfig, RESOURCE_VAR};
use crate::ttl::{emit_ttl, workflow_to_triples};
use crate::wms::{
    run_workflow, taskdir_for, Cluster, Policy, RunReport, TaskObject, TaskRequest, WmsConfig, WorkflowModel,
};
use crate::workflow::{eos_workflow, LogicalValue, Multiplicity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub nodes: u32,
    pub cores_per_node: u32,
    /// Cores requested by each simulation task.
    pub np: u32,
    pub policy: Policy,
    /// Log-space standard deviation of runtime noise.
    pub runtime_noise: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            nodes: 4,
            cores_per_node: 8,
            np: 8,
            policy: Policy::Lpt,
            runtime_noise: 0.05,
        }
    }
}

/// Simulated duration `c0 + c1 * steps / cores` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub c0: f64,
    pub c1: f64,
    pub steps: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            c0: 60.0,
            c1: 0.02,
            steps: 100_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub truth: Eos,
    pub fit_form: EosForm,
    pub orders: Vec<(u32, u32)>,
    pub initial_t: Vec<f64>,
    pub initial_rho: Vec<f64>,
    /// Relative standard deviation of the simulated derivatives.
    pub sigma_rel: f64,
    /// Convergence threshold on the largest relative coefficient change.
    pub epsilon: f64,
    pub max_iterations: u32,
    pub cluster: ClusterConfig,
    pub cost: CostConfig,
    pub refine: RefineConfig,
    /// Root under which per-task result files are written.
    pub results_dir: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 1,
            truth: Eos::default_truth(),
            fit_form: EosForm::default_form(),
            orders: DEFAULT_DERIVS.to_vec(),
            initial_t: vec![1.2, 1.45, 1.7, 1.95, 2.2],
            initial_rho: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            sigma_rel: 0.01,
            epsilon: 1e-4,
            max_iterations: 20,
            cluster: ClusterConfig::default(),
            cost: CostConfig::default(),
            refine: RefineConfig::default(),
            results_dir: None,
        }
    }
}

impl CampaignConfig {
    pub fn check(&self) -> Result<(), EosError> {
        let bad = |m: &str| Err(EosError::InvalidConfig(m.to_string()));
        Eos::new(self.truth.form.clone(), self.truth.coefficients.clone())?;
        if self.fit_form.is_empty() {
            return bad("fit_form has no terms");
        }
        if self.orders.is_empty() {
            return bad("no derivative orders");
        }
        if self.initial_t.is_empty() || self.initial_rho.is_empty() {
            return bad("empty initial grid");
        }
        if self.initial_t.iter().chain(&self.initial_rho).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return bad("initial grid values must be positive and finite");
        }
        if !(self.sigma_rel >= 0.0) || !self.sigma_rel.is_finite() {
            return bad("sigma_rel must be a finite non-negative number");
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be non-negative");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.cluster.np == 0 {
            return bad("np must be at least 1");
        }
        if !(self.cost.c0 >= 0.0 && self.cost.c1 >= 0.0 && self.cost.c0 + self.cost.c1 * self.cost.steps > 0.0) {
            return bad("cost must give positive durations");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationFit {
    pub iteration: u32,
    /// Distinct state points in the fit.
    pub states: usize,
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
    pub critical: Option<CriticalPoint>,
    /// Largest relative coefficient change from the previous iteration.
    pub max_relative_change: Option<f64>,
    /// State points queued for the next iteration.
    pub new_states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskStats {
    pub tasks: usize,
    pub makespan: f64,
    pub idle_core_time: f64,
    pub mean_abs_prediction_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub workflow: String,
    pub seed: u64,
    pub converged: bool,
    pub iterations: u32,
    pub fits: Vec<IterationFit>,
    pub final_coefficients: Vec<f64>,
    pub truth_coefficients: Vec<f64>,
    /// Per-coefficient relative error against the truth, when both forms match.
    pub relative_error: Option<Vec<f64>>,
    pub final_rms: f64,
    /// Expected weighted rms for correctly stated uncertainties.
    pub noise_floor: f64,
    pub critical: Option<CriticalPoint>,
    pub task_stats: TaskStats,
    pub warnings: Vec<String>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn max_relative_error(&self) -> Option<f64> {
        self.relative_error.as_ref().map(|v| v.iter().fold(0.0, |a: f64, b| a.max(*b)))
    }

    pub fn status(&self) -> Result<(), EosError> {
        if self.converged {
            Ok(())
        } else {
            Err(EosError::NotConverged { iterations: self.iterations })
        }
    }
}

/// Everything a campaign produces.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub report: CampaignReport,
    pub run: RunReport,
    /// OSMO description of the executed workflow.
    pub ttl: String,
}

/// Largest `|a_k - b_k| / (|a_k| + 1e-12)`.
pub fn max_relative_change(new: &[f64], old: &[f64]) -> f64 {
    new.iter()
        .zip(old)
        .map(|(a, b)| (a - b).abs() / (a.abs() + 1e-12))
        .fold(0.0, f64::max)
}

/// Workflow model of the parameterization campaign.
#[derive(Debug)]
pub struct EosModel {
    config: CampaignConfig,
    queue: VecDeque<StatePoint>,
    running: BTreeMap<u64, StatePoint>,
    next_id: u64,
    sampled: Vec<StatePoint>,
    results: Vec<MassieuDerivs>,
    fits: Vec<(EosFit, IterationFit)>,
    converged: bool,
    finished: bool,
    warnings: Vec<String>,
    error: Option<EosError>,
}

impl EosModel {
    pub fn new(config: CampaignConfig) -> Result<Self, EosError> {
        config.check()?;
        let mut queue = VecDeque::new();
        for &t in &config.initial_t {
            for &rho in &config.initial_rho {
                let sp = StatePoint::new(t, rho, 0)?;
                if !queue.contains(&sp) {
                    queue.push_back(sp);
                }
            }
        }
        Ok(EosModel {
            config,
            queue,
            running: BTreeMap::new(),
            next_id: 0,
            sampled: Vec::new(),
            results: Vec::new(),
            fits: Vec::new(),
            converged: false,
            finished: false,
            warnings: Vec::new(),
            error: None,
        })
    }

    pub fn sampled(&self) -> &[StatePoint] {
        &self.sampled
    }

    pub fn results(&self) -> &[MassieuDerivs] {
        &self.results
    }

    pub fn fits(&self) -> impl Iterator<Item = &EosFit> {
        self.fits.iter().map(|(f, _)| f)
    }

    /// Post-processes, fits, tests convergence and queues refinements.
    fn close_iteration(&mut self) -> Result<(), EosError> {
        let input = create_eos_input_from_results(&self.results)?;
        let fit = fit_vle_curve(&input, &self.config.fit_form)?;
        let change = self.fits.last().map(|(prev, _)| max_relative_change(&fit.coefficients, &prev.coefficients));
        self.converged = self.config.epsilon.is_infinite() || change.is_some_and(|c| c < self.config.epsilon);
        let iteration = self.fits.len() as u32 + 1;
        let mut fresh = Vec::new();
        if !self.converged && iteration < self.config.max_iterations {
            fresh = refine_around_critical_point(&fit, &self.config.refine, &self.sampled)?;
            let mut known = self.sampled.clone();
            known.extend(fresh.iter().copied());
            let vle = refine_around_vle(&fit, &self.config.refine, &known)?;
            self.warnings.extend(vle.skipped.iter().map(|e| format!("iteration {iteration}: {e}")));
            fresh.extend(vle.points);
            if fresh.is_empty() {
                self.warnings.push(format!("iteration {iteration}: refinement proposed no new state points"));
            }
        }
        let summary = IterationFit {
            iteration,
            states: self.sampled.len(),
            coefficients: fit.coefficients.clone(),
            rms_residual: fit.rms_residual,
            critical: fit.critical,
            max_relative_change: change,
            new_states: fresh.len(),
        };
        log::info!(
            "iteration {iteration}: {} states, rms {:.3e}, change {:?}",
            summary.states,
            summary.rms_residual,
            change
        );
        self.fits.push((fit, summary));
        self.finished = fresh.is_empty();
        self.queue.extend(fresh);
        Ok(())
    }

    pub fn report(&self, run: &RunReport) -> CampaignReport {
        let last = self.fits.last().map(|(f, _)| f);
        let final_coefficients = last.map(|f| f.coefficients.clone()).unwrap_or_default();
        let truth = &self.config.truth;
        let relative_error = (last.is_some() && truth.form == self.config.fit_form).then(|| {
            final_coefficients
                .iter()
                .zip(&truth.coefficients)
                .map(|(a, b)| (a - b).abs() / b.abs().max(1e-300))
                .collect()
        });
        let errs = &run.prediction_errors;
        CampaignReport {
            workflow: self.name(),
            seed: self.config.seed,
            converged: self.converged,
            iterations: self.fits.len() as u32,
            fits: self.fits.iter().map(|(_, s)| s.clone()).collect(),
            final_coefficients,
            truth_coefficients: truth.coefficients.clone(),
            relative_error,
            final_rms: last.map_or(f64::NAN, |f| f.rms_residual),
            noise_floor: if self.config.sigma_rel > 0.0 { 1.0 } else { 0.0 },
            critical: last.and_then(|f| f.critical),
            task_stats: TaskStats {
                tasks: run.records.len(),
                makespan: run.makespan,
                idle_core_time: run.idle_core_time,
                mean_abs_prediction_error: (!errs.is_empty())
                    .then(|| errs.iter().map(|e| e.abs()).sum::<f64>() / errs.len() as f64),
            },
            warnings: self.warnings.clone(),
        }
    }
}

impl WorkflowModel for EosModel {
    fn name(&self) -> String {
        eos_workflow().name
    }

    fn get_task(&mut self) -> TaskRequest {
        if self.queue.is_empty() && self.running.is_empty() && !self.finished && self.error.is_none() {
            if let Err(e) = self.close_iteration() {
                self.error = Some(e);
            }
        }
        if self.error.is_some() {
            self.queue.clear();
        }
        match self.queue.pop_front() {
            Some(sp) => {
                let id = self.next_id;
                self.next_id += 1;
                self.running.insert(id, sp);
                self.sampled.push(sp);
                let params = BTreeMap::from([
                    ("T".to_string(), sp.t),
                    ("rho".to_string(), sp.rho),
                    ("step".to_string(), f64::from(sp.step)),
                ]);
                let mut task = TaskObject::new(id, params);
                task.deploy.np = self.config.cluster.np;
                TaskRequest::Task(task)
            }
            None if self.running.is_empty() => TaskRequest::Final,
            None => TaskRequest::Wait,
        }
    }

    fn deploy(&mut self, task: &mut TaskObject, np: u32, mpi: &str) {
        task.taskdir = taskdir_for(&task.params);
        task.deploy.cmd = vec![mpi.into(), "-np".into(), np.to_string(), "ms2".into(), "state.par".into()];
        task.env = "OMP_NUM_THREADS=1".into();
    }

    fn record_result(&mut self, task: &TaskObject) {
        self.running.remove(&task.id);
        let c = &self.config;
        let outcome = simulate_state_point(task, &c.truth, &c.orders, c.sigma_rel, c.seed).and_then(|d| {
            if let Some(root) = &c.results_dir {
                write_result_file(root, &task.taskdir, &d)?;
            }
            Ok(d)
        });
        match outcome {
            Ok(d) => self.results.push(d),
            Err(e) => {
                if self.error.is_none() {
                    self.error = Some(e);
                }
            }
        }
    }

    fn cost(&self, _task: &TaskObject, cores: u32) -> f64 {
        let c = &self.config.cost;
        c.c0 + c.c1 * c.steps / f64::from(cores.max(1))
    }
}

/// The reference workflow annotated with the fitted coefficients and the
/// executed instance counts.
pub fn campaign_ttl(report: &CampaignReport, initial_states: usize) -> String {
    let mut wf = eos_workflow();
    if let Some(v) = wf.variables.get_mut("n_k") {
        v.value = Some(LogicalValue::Vector(report.final_coefficients.clone()));
    }
    for (id, g) in wf.graphs.iter_mut() {
        g.multiplicity = match g.multiplicity.take() {
            Some(Multiplicity::ConcurrentInstances { .. }) if id == "V1" => Some(Multiplicity::ConcurrentInstances {
                count: Some(initial_states as u32),
            }),
            Some(Multiplicity::IterativeLoop { termination, .. }) => Some(Multiplicity::IterativeLoop {
                count: Some(report.iterations),
                termination,
            }),
            other => other,
        };
    }
    emit_ttl(&workflow_to_triples(&wf))
}

/// Runs the campaign on its simulated cluster. A campaign that hits the
/// iteration cap still returns its outcome; see [`CampaignReport::status`].
pub fn run_eos_campaign(config: &CampaignConfig) -> Result<CampaignOutcome, EosError> {
    let mut model = EosModel::new(config.clone())?;
    let initial_states = model.queue.len();
    let cluster = Cluster::uniform(config.cluster.nodes as usize, config.cluster.cores_per_node)?;
    let mut provider = ModelProvider::new(PerfConfig {
        variables: Some(vec![RESOURCE_VAR.to_string()]),
        ..PerfConfig::default()
    });
    let wms = WmsConfig {
        policy: config.cluster.policy,
        seed: config.seed,
        noise_sigma: config.cluster.runtime_noise,
        ..WmsConfig::default()
    };
    let run = run_workflow(&mut model, &cluster, Some(&mut provider), &wms)?;
    if let Some(e) = model.error.take() {
        return Err(e);
    }
    let report = model.report(&run);
    let ttl = campaign_ttl(&report, initial_states);
    Ok(CampaignOutcome { report, run, ttl })
}
