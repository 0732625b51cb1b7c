//! Deterministic discrete-event execution.

use std::collections::BTreeSet;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::Serialize;

use super::{schedule_next, Cluster, Policy, TaskObject, TaskRequest, WmsError, WorkflowModel};
use crate::perf::{Observation, PerfProvider};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WmsConfig {
    pub policy: Policy,
    pub seed: u64,
    /// Log-space standard deviation of the multiplicative runtime noise.
    pub noise_sigma: f64,
    pub mpi: String,
    /// Wall-clock time of simulated second zero.
    pub epoch: NaiveDateTime,
    /// Reruns of a task that ends with a nonzero return code.
    pub max_retries: u32,
}

impl Default for WmsConfig {
    fn default() -> Self {
        WmsConfig {
            policy: Policy::Lpt,
            seed: 1,
            noise_sigma: 0.05,
            mpi: "mpirun".into(),
            epoch: NaiveDate::from_ymd_opt(2000, 1, 1)
                .and_then(|d| d.and_hms_opt(0, 0, 0))
                .expect("valid date"),
            max_retries: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub task: TaskObject,
    /// Cores taken on each node of `task.deploy.nodes`.
    pub cores: Vec<u32>,
    /// Simulated seconds.
    pub start: f64,
    pub end: f64,
    pub attempt: u32,
    pub predicted: Option<f64>,
}

impl TaskRecord {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub workflow: String,
    pub policy: Policy,
    pub seed: u64,
    pub total_cores: u32,
    /// In completion order.
    pub records: Vec<TaskRecord>,
    pub makespan: f64,
    pub idle_core_time: f64,
    /// Relative error of each available prediction, in completion order.
    pub prediction_errors: Vec<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    workflow: &'a str,
    policy: Policy,
    seed: u64,
    tasks: usize,
    total_cores: u32,
    makespan: f64,
    idle_core_time: f64,
    mean_prediction_error: Option<f64>,
}

impl RunReport {
    /// One JSON record per line.
    pub fn to_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }

    pub fn summary_json(&self) -> String {
        let errs = &self.prediction_errors;
        let summary = Summary {
            workflow: &self.workflow,
            policy: self.policy,
            seed: self.seed,
            tasks: self.records.len(),
            total_cores: self.total_cores,
            makespan: self.makespan,
            idle_core_time: self.idle_core_time,
            mean_prediction_error: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
    }
}

struct Running {
    task: TaskObject,
    cores: Vec<u32>,
    start: f64,
    end: f64,
    attempt: u32,
    predicted: Option<f64>,
}

fn noise(seed: u64, id: u64, attempt: u32, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    let dist = LogNormal::new(0.0, sigma).expect("finite sigma");
    (0..=attempt).map(|_| dist.sample(&mut rng)).last().unwrap_or(1.0)
}

fn stamp(epoch: NaiveDateTime, seconds: f64) -> NaiveDateTime {
    epoch + TimeDelta::microseconds((seconds * 1e6).round() as i64)
}

/// Runs `model` to completion on `cluster`.
///
/// Tasks are pulled until the model answers `Wait` or `Final`, placed by
/// the configured policy, and completed in (end time, id) order. Every
/// completion is acknowledged to the model and reported to the provider.
pub fn run_workflow(
    model: &mut dyn WorkflowModel,
    cluster: &Cluster,
    mut provider: Option<&mut dyn PerfProvider>,
    config: &WmsConfig,
) -> Result<RunReport, WmsError> {
    if !(config.noise_sigma.is_finite() && config.noise_sigma >= 0.0) {
        return Err(WmsError::SchemaError("noise_sigma".into()));
    }
    let mut cluster = cluster.clone();
    let total_cores = cluster.total_cores();
    let mut clock = 0.0_f64;
    let mut ready: Vec<(TaskObject, u32)> = Vec::new();
    let mut running: Vec<Running> = Vec::new();
    let mut issued: BTreeSet<u64> = BTreeSet::new();
    let mut records: Vec<TaskRecord> = Vec::new();
    let mut prediction_errors = Vec::new();
    let mut final_seen = false;
    let mut first_start: Option<f64> = None;
    let mut busy = 0.0;

    loop {
        while !final_seen {
            match model.get_task() {
                TaskRequest::Task(t) => {
                    t.check()?;
                    if !issued.insert(t.id) {
                        return Err(WmsError::DuplicateTask(t.id));
                    }
                    if t.deploy.np > total_cores {
                        return Err(WmsError::AllocationImpossible {
                            np: t.deploy.np,
                            total: total_cores,
                        });
                    }
                    log::debug!("task {} ready at t={clock}", t.id);
                    ready.push((t, 0));
                }
                TaskRequest::Wait => break,
                TaskRequest::Final => final_seen = true,
            }
        }

        let tasks: Vec<TaskObject> = ready.iter().map(|(t, _)| t.clone()).collect();
        let assignments = schedule_next(&tasks, &cluster, config.policy, provider.as_deref());
        let mut picked: Vec<Option<(TaskObject, u32)>> = ready.drain(..).map(Some).collect();
        for a in assignments {
            let (mut task, attempt) = picked[a.index].take().expect("each ready task is assigned once");
            let np = task.deploy.np;
            model.deploy(&mut task, np, &config.mpi);
            task.deploy.np = np;
            let nodes = cluster.allocate(task.id, np)?.expect("assignment fits the free nodes");
            task.deploy.nodes = nodes;
            task.starttime = Some(stamp(config.epoch, clock));
            first_start.get_or_insert(clock);
            let cost = model.cost(&task, np);
            if !(cost.is_finite() && cost > 0.0) {
                return Err(WmsError::InvalidCost { id: task.id, cost });
            }
            let end = clock + cost * noise(config.seed, task.id, attempt, config.noise_sigma);
            running.push(Running {
                cores: a.nodes.iter().map(|(_, c)| *c).collect(),
                task,
                start: clock,
                end,
                attempt,
                predicted: a.predicted,
            });
        }
        ready = picked.into_iter().flatten().collect();

        if running.is_empty() {
            if ready.is_empty() && final_seen {
                break;
            }
            return Err(WmsError::DeadlockDetected);
        }

        let next = running.iter().map(|r| r.end).fold(f64::INFINITY, f64::min);
        clock = next;
        let (mut done, still): (Vec<Running>, Vec<Running>) = running.into_iter().partition(|r| r.end <= next);
        running = still;
        done.sort_by_key(|r| r.task.id);
        for mut r in done {
            cluster.release(r.task.id);
            busy += f64::from(r.task.deploy.np) * (r.end - r.start);
            let rc = model.returncode(&r.task);
            if rc != 0 && r.attempt < config.max_retries {
                log::info!("task {} failed with {rc}; retrying", r.task.id);
                r.task.deploy.nodes.clear();
                r.task.starttime = None;
                ready.push((r.task, r.attempt + 1));
                continue;
            }
            r.task.endtime = Some(stamp(config.epoch, r.end));
            r.task.returncode = Some(rc);
            model.record_result(&r.task);
            let runtime = r.end - r.start;
            if let Some(p) = provider.as_deref_mut() {
                p.observe(Observation::new(r.task.params.clone(), r.task.deploy.np, runtime));
            }
            if let Some(pred) = r.predicted {
                prediction_errors.push((pred - runtime).abs() / runtime);
            }
            records.push(TaskRecord {
                task: r.task,
                cores: r.cores,
                start: r.start,
                end: r.end,
                attempt: r.attempt,
                predicted: r.predicted,
            });
        }
    }

    let last = records.iter().map(|r| r.end).fold(0.0, f64::max);
    let makespan = first_start.map_or(0.0, |first| last - first);
    Ok(RunReport {
        workflow: model.name(),
        policy: config.policy,
        seed: config.seed,
        total_cores,
        records,
        makespan,
        idle_core_time: (f64::from(total_cores) * makespan - busy).max(0.0),
        prediction_errors,
    })
}
