//! Workflow model over a fixed task DAG.

use std::collections::{BTreeMap, BTreeSet};

use super::{taskdir_for, TaskObject, TaskRequest, WorkflowModel};
use crate::ontology::SectionKind;
use crate::workflow::{Id, Section, SimulationWorkflow};

#[derive(Debug, Clone, PartialEq)]
pub struct DagTask {
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub np: u32,
    /// Duration in seconds when run on `np` cores.
    pub cost: f64,
    /// Indices of tasks that must be acknowledged first.
    pub preds: Vec<usize>,
}

/// Issues task `i` (with id `i`) once all its predecessors are
/// acknowledged; answers `Final` after the last acknowledgement.
#[derive(Debug, Clone)]
pub struct DagModel {
    name: String,
    tasks: Vec<DagTask>,
    issued: Vec<bool>,
    done: Vec<bool>,
    acks: Vec<u32>,
    final_sent: bool,
}

impl DagModel {
    pub fn new(name: &str, tasks: Vec<DagTask>) -> Self {
        let n = tasks.len();
        DagModel {
            name: name.to_string(),
            tasks,
            issued: vec![false; n],
            done: vec![false; n],
            acks: vec![0; n],
            final_sent: false,
        }
    }

    /// One task per solver or processor node below `root`. Task `u`
    /// precedes `v` when a chain of causal edges leads from a graph
    /// containing `u` to a graph containing `v`.
    pub fn from_workflow(
        wf: &SimulationWorkflow,
        root: &str,
        np: u32,
        cost: impl Fn(&Section) -> f64,
    ) -> DagModel {
        let graphs = wf.subtree(root);
        let task_nodes: Vec<(&Id, &Section)> = graphs
            .iter()
            .filter_map(|g| wf.node_section(g).map(|s| (g, s)))
            .filter(|(_, s)| matches!(s.kind, SectionKind::Solver | SectionKind::Processor))
            .collect();
        // graphs holding each graph, itself included
        let mut holders: BTreeMap<&Id, BTreeSet<&Id>> = BTreeMap::new();
        for g in &graphs {
            for inner in wf.subtree(g) {
                if let Some(k) = graphs.get(&inner) {
                    holders.entry(k).or_default().insert(g);
                }
            }
        }
        let mut reach: BTreeMap<&Id, BTreeSet<&Id>> = BTreeMap::new();
        for g in &graphs {
            let mut seen = BTreeSet::new();
            let mut stack = vec![g];
            while let Some(x) = stack.pop() {
                for (a, b) in &wf.causal_edges {
                    if a == x {
                        if let Some(b) = graphs.get(b) {
                            if seen.insert(b) {
                                stack.push(b);
                            }
                        }
                    }
                }
            }
            reach.insert(g, seen);
        }
        let precedes = |u: &Id, v: &Id| {
            holders[u]
                .iter()
                .any(|a| holders[v].iter().any(|b| reach[a].contains(b)))
        };
        let tasks = task_nodes
            .iter()
            .enumerate()
            .map(|(k, (node, section))| DagTask {
                label: (*node).clone(),
                params: BTreeMap::from([("index".to_string(), k as f64)]),
                np,
                cost: cost(section),
                preds: task_nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, (other, _))| precedes(other, node))
                    .map(|(j, _)| j)
                    .collect(),
            })
            .collect();
        DagModel::new(&wf.name, tasks)
    }

    pub fn tasks(&self) -> &[DagTask] {
        &self.tasks
    }

    /// Acknowledgements received per task.
    pub fn acks(&self) -> &[u32] {
        &self.acks
    }

    pub fn final_sent(&self) -> bool {
        self.final_sent
    }
}

impl WorkflowModel for DagModel {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn get_task(&mut self) -> TaskRequest {
        let next = (0..self.tasks.len()).find(|&i| !self.issued[i] && self.tasks[i].preds.iter().all(|&p| self.done[p]));
        match next {
            Some(i) => {
                self.issued[i] = true;
                let t = &self.tasks[i];
                let mut task = TaskObject::new(i as u64, t.params.clone());
                task.deploy.np = t.np;
                TaskRequest::Task(task)
            }
            None if self.done.iter().all(|d| *d) && !self.final_sent => {
                self.final_sent = true;
                TaskRequest::Final
            }
            None => TaskRequest::Wait,
        }
    }

    fn deploy(&mut self, task: &mut TaskObject, np: u32, mpi: &str) {
        let label = &self.tasks[task.id as usize].label;
        task.taskdir = format!("{}/{label}", taskdir_for(&task.params));
        task.deploy.cmd = vec![mpi.to_string(), "-np".into(), np.to_string(), format!("./{label}")];
    }

    fn record_result(&mut self, task: &TaskObject) {
        let i = task.id as usize;
        self.done[i] = true;
        self.acks[i] += 1;
    }

    fn cost(&self, task: &TaskObject, _cores: u32) -> f64 {
        self.tasks[task.id as usize].cost
    }
}
