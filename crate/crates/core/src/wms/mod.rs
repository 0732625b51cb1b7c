//! Workflow management: task protocol, simulated cluster, scheduling and
//! the discrete-event run loop.

mod audit;
mod cluster;
mod engine;
mod graph_model;
mod scheduler;
mod task;

use thiserror::Error;

pub use audit::{check_capacity, check_dependencies};
pub use cluster::{Cluster, NodeSpec};
pub use engine::{run_workflow, RunReport, TaskRecord, WmsConfig};
pub use graph_model::{DagModel, DagTask};
pub use scheduler::{priority_order, schedule_next, Assignment, Policy};
pub use task::{parse_task, serialize_task, taskdir_for, Deploy, TaskObject, TIME_FORMAT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WmsError {
    #[error("malformed JSON: {0}")]
    JsonSyntaxError(String),
    #[error("missing or invalid field `{0}`")]
    SchemaError(String),
    #[error("deadlock: no task ready, none running and no final task")]
    DeadlockDetected,
    #[error("task needs {np} cores but the cluster has {total}")]
    AllocationImpossible { np: u32, total: u32 },
    #[error("cluster has no usable nodes")]
    EmptyCluster,
    #[error("task id {0} issued twice")]
    DuplicateTask(u64),
    #[error("cost of task {id} is {cost}, expected a positive duration")]
    InvalidCost { id: u64, cost: f64 },
}

/// Answer of [`WorkflowModel::get_task`].
#[derive(Debug, Clone, PartialEq)]
pub enum TaskRequest {
    Task(TaskObject),
    /// Nothing ready until a running task is acknowledged.
    Wait,
    /// The workflow is complete.
    Final,
}

/// Driving interface between the manager and a workflow model.
pub trait WorkflowModel {
    fn name(&self) -> String;

    fn get_task(&mut self) -> TaskRequest;

    /// Fills in the command and environment for a run on `np` cores.
    fn deploy(&mut self, task: &mut TaskObject, np: u32, mpi: &str);

    /// Acknowledgement of a finished task, with timing and return code set.
    fn record_result(&mut self, task: &TaskObject);

    /// Noise-free simulated duration in seconds on `cores` cores.
    fn cost(&self, task: &TaskObject, cores: u32) -> f64;

    fn returncode(&self, _task: &TaskObject) -> i32 {
        0
    }
}
