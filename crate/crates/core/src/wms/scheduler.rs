//! Ordering of ready tasks and greedy placement.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Cluster, TaskObject};
use crate::perf::PerfProvider;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Ascending task id.
    Fifo,
    /// Longest predicted runtime first, ties by ascending id.
    #[default]
    Lpt,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(Policy::Fifo),
            "lpt" => Ok(Policy::Lpt),
            other => Err(format!("unknown policy `{other}`; expected fifo or lpt")),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Fifo => "fifo",
            Policy::Lpt => "lpt",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Index into the ready list.
    pub index: usize,
    pub id: u64,
    /// Node indices and cores taken on each.
    pub nodes: Vec<(usize, u32)>,
    pub predicted: Option<f64>,
}

/// Execution order of `ready` under `policy`: indices into `ready`.
///
/// LPT needs a prediction for every task; otherwise FIFO applies.
pub fn priority_order(ready: &[TaskObject], policy: Policy, provider: Option<&dyn PerfProvider>) -> Vec<(usize, Option<f64>)> {
    let predictions: Vec<Option<f64>> = ready
        .iter()
        .map(|t| provider.and_then(|p| p.predict(&t.params, t.deploy.np)))
        .collect();
    let mut order: Vec<usize> = (0..ready.len()).collect();
    let by_id = |a: &usize, b: &usize| ready[*a].id.cmp(&ready[*b].id);
    if policy == Policy::Lpt && predictions.iter().all(Option::is_some) {
        order.sort_by(|a, b| {
            let (pa, pb) = (predictions[*a].unwrap_or(0.0), predictions[*b].unwrap_or(0.0));
            pb.partial_cmp(&pa).unwrap_or(Ordering::Equal).then_with(|| by_id(a, b))
        });
    } else {
        order.sort_by(by_id);
    }
    order.into_iter().map(|i| (i, predictions[i])).collect()
}

/// Walks the priority order and places every task that fits on the
/// remaining free nodes. The cluster itself is not modified.
pub fn schedule_next(
    ready: &[TaskObject],
    cluster: &Cluster,
    policy: Policy,
    provider: Option<&dyn PerfProvider>,
) -> Vec<Assignment> {
    let mut scratch = cluster.clone();
    let mut out = Vec::new();
    for (index, predicted) in priority_order(ready, policy, provider) {
        let t = &ready[index];
        if let Some(nodes) = scratch.find(t.deploy.np) {
            let _ = scratch.allocate(t.id, t.deploy.np);
            out.push(Assignment {
                index,
                id: t.id,
                nodes,
                predicted,
            });
        }
    }
    out
}
