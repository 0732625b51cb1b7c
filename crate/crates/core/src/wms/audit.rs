//! Post-run checks of the scheduling invariants.

use std::collections::BTreeMap;

use super::{Cluster, RunReport};

/// Every node holds at most one task at a time and never more cores than
/// it has.
pub fn check_capacity(report: &RunReport, cluster: &Cluster) -> Result<(), String> {
    let caps: BTreeMap<&str, u32> = cluster.nodes().iter().map(|n| (n.id.as_str(), n.cores)).collect();
    let mut spans: BTreeMap<&str, Vec<(f64, f64, u64)>> = BTreeMap::new();
    for r in &report.records {
        if r.task.deploy.nodes.len() != r.cores.len() || r.cores.iter().sum::<u32>() != r.task.deploy.np {
            return Err(format!("task {} allocation does not match NP", r.task.id));
        }
        for (node, cores) in r.task.deploy.nodes.iter().zip(&r.cores) {
            let cap = caps.get(node.as_str()).ok_or_else(|| format!("task {} on unknown node {node}", r.task.id))?;
            if cores > cap {
                return Err(format!("task {} takes {cores} cores on {node} with {cap}", r.task.id));
            }
            spans.entry(node).or_default().push((r.start, r.end, r.task.id));
        }
    }
    for (node, mut s) in spans {
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in s.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(format!("tasks {} and {} overlap on {node}", w[0].2, w[1].2));
            }
        }
    }
    Ok(())
}

/// No task starts before each of its predecessors has ended.
pub fn check_dependencies(report: &RunReport, preds: impl Fn(u64) -> Vec<u64>) -> Result<(), String> {
    let ends: BTreeMap<u64, f64> = report.records.iter().map(|r| (r.task.id, r.end)).collect();
    for r in &report.records {
        for p in preds(r.task.id) {
            match ends.get(&p) {
                Some(e) if *e <= r.start => {}
                Some(e) => return Err(format!("task {} starts at {} before {p} ends at {e}", r.task.id, r.start)),
                None => return Err(format!("task {} ran but predecessor {p} never finished", r.task.id)),
            }
        }
    }
    Ok(())
}
