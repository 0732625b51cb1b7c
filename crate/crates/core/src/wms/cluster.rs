//! Simulated resource manager: exclusive whole-node allocation.

use serde::{Deserialize, Serialize};

use super::WmsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub cores: u32,
}

/// Nodes and their current holder.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    nodes: Vec<NodeSpec>,
    /// Holder task and cores in use, per node.
    held: Vec<Option<(u64, u32)>>,
}

impl Cluster {
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Self, WmsError> {
        if nodes.is_empty() || nodes.iter().any(|n| n.cores == 0) {
            return Err(WmsError::EmptyCluster);
        }
        let held = vec![None; nodes.len()];
        Ok(Cluster { nodes, held })
    }

    /// `count` nodes named `n0`, `n1`, ... with `cores` each.
    pub fn uniform(count: usize, cores: u32) -> Result<Self, WmsError> {
        Cluster::new(
            (0..count)
                .map(|i| NodeSpec {
                    id: format!("n{i}"),
                    cores,
                })
                .collect(),
        )
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn total_cores(&self) -> u32 {
        self.nodes.iter().map(|n| n.cores).sum()
    }

    pub fn free_cores(&self) -> u32 {
        self.nodes
            .iter()
            .zip(&self.held)
            .filter(|(_, h)| h.is_none())
            .map(|(n, _)| n.cores)
            .sum()
    }

    pub fn is_idle(&self) -> bool {
        self.held.iter().all(Option::is_none)
    }

    /// First free nodes, in order, whose cores add up to `np`, with the
    /// cores used on each.
    pub fn find(&self, np: u32) -> Option<Vec<(usize, u32)>> {
        let mut need = np;
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if need == 0 {
                break;
            }
            if self.held[i].is_none() {
                let take = need.min(n.cores);
                out.push((i, take));
                need -= take;
            }
        }
        (need == 0).then_some(out)
    }

    /// Claims nodes for `task`; returns their ids.
    pub fn allocate(&mut self, task: u64, np: u32) -> Result<Option<Vec<String>>, WmsError> {
        if np > self.total_cores() {
            return Err(WmsError::AllocationImpossible {
                np,
                total: self.total_cores(),
            });
        }
        Ok(self.find(np).map(|picks| {
            picks
                .into_iter()
                .map(|(i, cores)| {
                    self.held[i] = Some((task, cores));
                    self.nodes[i].id.clone()
                })
                .collect()
        }))
    }

    pub fn release(&mut self, task: u64) {
        for h in &mut self.held {
            if matches!(h, Some((t, _)) if *t == task) {
                *h = None;
            }
        }
    }

    /// Cores in use per node; never above the node's capacity.
    pub fn usage(&self) -> Vec<u32> {
        self.held.iter().map(|h| h.map_or(0, |(_, c)| c)).collect()
    }
}
