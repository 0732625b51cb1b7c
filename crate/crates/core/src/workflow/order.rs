//! Execution order, processor roles and virtual-graph expansion.

use std::collections::{BTreeMap, BTreeSet};

use crate::ontology::SectionKind;

use super::{GraphKind, Id, LogicalAccess, Multiplicity, ResourceRef, SimulationWorkflow, WorkflowError, WorkflowGraph};

/// Stages of the direct child graphs of concrete graph `g`.
///
/// Every causal predecessor sits in an earlier stage and coupled graphs
/// share a stage.
pub fn topo_order(wf: &SimulationWorkflow, g: &str) -> Result<Vec<BTreeSet<Id>>, WorkflowError> {
    match wf.graphs.get(g) {
        None => Err(WorkflowError::UnknownRef(g.to_string())),
        Some(graph) if graph.kind != GraphKind::Concrete => Err(WorkflowError::NotConcrete(g.to_string())),
        Some(_) => sibling_stages(wf, &wf.child_graphs(g)),
    }
}

fn find(parent: &mut BTreeMap<Id, Id>, x: &Id) -> Id {
    let p = parent[x].clone();
    if p == *x {
        return p;
    }
    let root = find(parent, &p);
    parent.insert(x.clone(), root.clone());
    root
}

/// Layered Kahn over `ids` with coupled graphs contracted.
pub(crate) fn sibling_stages(wf: &SimulationWorkflow, ids: &[Id]) -> Result<Vec<BTreeSet<Id>>, WorkflowError> {
    let members: BTreeSet<&Id> = ids.iter().collect();
    let mut parent: BTreeMap<Id, Id> = ids.iter().map(|i| (i.clone(), i.clone())).collect();
    for (a, b) in &wf.coupling_edges {
        if members.contains(a) && members.contains(b) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent.insert(hi, lo);
            }
        }
    }
    let mut comps: BTreeMap<Id, BTreeSet<Id>> = BTreeMap::new();
    for i in ids {
        let root = find(&mut parent, i);
        comps.entry(root).or_default().insert(i.clone());
    }
    let mut succ: BTreeMap<Id, BTreeSet<Id>> = comps.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    for (a, b) in &wf.causal_edges {
        if members.contains(a) && members.contains(b) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(WorkflowError::CyclicDependency(comps[&ra].iter().cloned().collect()));
            }
            succ.get_mut(&ra).expect("component").insert(rb);
        }
    }
    let mut indeg: BTreeMap<Id, usize> = comps.keys().map(|k| (k.clone(), 0)).collect();
    for targets in succ.values() {
        for t in targets {
            *indeg.get_mut(t).expect("component") += 1;
        }
    }
    let mut stages = Vec::new();
    while !indeg.is_empty() {
        let ready: Vec<Id> = indeg.iter().filter(|(_, d)| **d == 0).map(|(k, _)| k.clone()).collect();
        if ready.is_empty() {
            let stuck = indeg.keys().flat_map(|k| comps[k].iter().cloned()).collect();
            return Err(WorkflowError::CyclicDependency(stuck));
        }
        let mut stage = BTreeSet::new();
        for k in &ready {
            indeg.remove(k);
            stage.extend(comps[k].iter().cloned());
        }
        for k in &ready {
            for t in &succ[k] {
                if let Some(d) = indeg.get_mut(t) {
                    *d -= 1;
                }
            }
        }
        stages.push(stage);
    }
    Ok(stages)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessorRole {
    Postprocessor,
    CoupledProcessor,
    Unclassified,
}

/// Role of processor section `p` derived from the edges at its node.
pub fn classify_processor(wf: &SimulationWorkflow, p: &str) -> Result<ProcessorRole, WorkflowError> {
    let section = wf.sections.get(p).ok_or_else(|| WorkflowError::UnknownRef(p.to_string()))?;
    if section.kind != SectionKind::Processor {
        return Err(WorkflowError::WrongKind(p.to_string()));
    }
    let Some(node) = wf.node_of(&ResourceRef::Section(p.to_string())) else {
        return Ok(ProcessorRole::Unclassified);
    };
    if wf.coupling_edges.iter().any(|(a, b)| *a == node || *b == node) {
        return Ok(ProcessorRole::CoupledProcessor);
    }
    let mut incoming = wf.causal_edges.iter().filter(|(_, b)| *b == node).peekable();
    if incoming.peek().is_none() {
        return Ok(ProcessorRole::Unclassified);
    }
    let all_computing = incoming.all(|(a, _)| {
        wf.node_section(a)
            .is_some_and(|s| matches!(s.kind, SectionKind::Solver | SectionKind::Processor))
    });
    Ok(if all_computing {
        ProcessorRole::Postprocessor
    } else {
        ProcessorRole::Unclassified
    })
}

/// Unrolls virtual graph `v` into a new, uncontained concrete graph holding
/// `n` deep copies of its instantiating graph.
///
/// Copies of an iterative loop are chained causally; concurrent instances
/// stay unordered. Logical variables are shared between copies and
/// simulation outcomes are not duplicated.
pub fn expand_virtual(wf: &mut SimulationWorkflow, v: &str, n: usize) -> Result<Id, WorkflowError> {
    let vg = wf.graphs.get(v).ok_or_else(|| WorkflowError::UnknownRef(v.to_string()))?;
    if vg.kind != GraphKind::Virtual {
        return Err(WorkflowError::NotVirtual(v.to_string()));
    }
    if n == 0 {
        return Err(WorkflowError::ZeroCount);
    }
    let source = vg
        .instantiated_by
        .clone()
        .ok_or_else(|| WorkflowError::UnknownRef(format!("{v}.instantiated_by")))?;
    let iterative = matches!(vg.multiplicity, Some(Multiplicity::IterativeLoop { .. }));
    let expansion = wf.fresh_id("E");

    let graphs = wf.subtree(&source);
    let sections: BTreeSet<Id> = graphs
        .iter()
        .flat_map(|g| wf.graphs[g].contained.iter())
        .filter_map(|r| match r {
            ResourceRef::Section(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let resources: BTreeSet<Id> = graphs
        .iter()
        .flat_map(|g| wf.graphs[g].contained.iter())
        .filter_map(|r| match r {
            ResourceRef::Logical(l) => Some(l.clone()),
            _ => None,
        })
        .collect();

    let mut roots = Vec::with_capacity(n);
    for k in 1..=n {
        let suffix = format!("_{expansion}_{k}");
        let rename = |id: &Id| format!("{id}{suffix}");
        for s in &sections {
            let mut copy = wf.sections[s].clone();
            copy.id = rename(s);
            wf.sections.insert(copy.id.clone(), copy);
        }
        for l in &resources {
            let mut copy = wf.resources[l].clone();
            copy.id = rename(l);
            wf.resources.insert(copy.id.clone(), copy);
        }
        let map_res = |r: &ResourceRef| match r {
            ResourceRef::Section(s) if sections.contains(s) => ResourceRef::Section(rename(s)),
            ResourceRef::Logical(l) if resources.contains(l) => ResourceRef::Logical(rename(l)),
            ResourceRef::Graph(g) if graphs.contains(g) => ResourceRef::Graph(rename(g)),
            other => other.clone(),
        };
        let map_graph = |g: &Id| if graphs.contains(g) { rename(g) } else { g.clone() };
        let copies: Vec<WorkflowGraph> = graphs
            .iter()
            .map(|g| {
                let src = &wf.graphs[g];
                WorkflowGraph {
                    id: rename(g),
                    kind: src.kind,
                    declared_node: src.declared_node,
                    contained: src.contained.iter().map(map_res).collect(),
                    instantiated_by: src.instantiated_by.as_ref().map(map_graph),
                    multiplicity: src.multiplicity.clone(),
                    starting_points: src.starting_points.iter().map(map_graph).collect(),
                    terminal_points: src.terminal_points.iter().map(map_graph).collect(),
                }
            })
            .collect();
        for c in copies {
            wf.graphs.insert(c.id.clone(), c);
        }
        let accesses: Vec<LogicalAccess> = wf
            .accesses
            .values()
            .filter(|a| sections.contains(&a.access_point))
            .map(|a| LogicalAccess {
                id: rename(&a.id),
                access_point: rename(&a.access_point),
                resource: if resources.contains(&a.resource) {
                    rename(&a.resource)
                } else {
                    a.resource.clone()
                },
                carried_variables: a.carried_variables.clone(),
                flags: a.flags,
            })
            .collect();
        for a in accesses {
            wf.accesses.insert(a.id.clone(), a);
        }
        let inner = |set: &BTreeSet<(Id, Id)>| -> Vec<(Id, Id)> {
            set.iter()
                .filter(|(a, b)| graphs.contains(a) && graphs.contains(b))
                .map(|(a, b)| (rename(a), rename(b)))
                .collect()
        };
        let causal = inner(&wf.causal_edges);
        let coupling = inner(&wf.coupling_edges);
        wf.causal_edges.extend(causal);
        wf.coupling_edges.extend(coupling);
        let applies: Vec<(Id, Id)> = wf
            .applies_to
            .iter()
            .filter(|(s, g)| graphs.contains(g) || sections.contains(s))
            .map(|(s, g)| {
                let s = if sections.contains(s) { rename(s) } else { s.clone() };
                (s, map_graph(g))
            })
            .collect();
        wf.applies_to.extend(applies);
        roots.push(rename(&source));
    }
    if iterative {
        for w in roots.windows(2) {
            wf.causal_edges.insert((w[0].clone(), w[1].clone()));
        }
    }
    let contained = roots.into_iter().map(ResourceRef::Graph).collect();
    wf.graphs.insert(
        expansion.clone(),
        WorkflowGraph {
            id: expansion.clone(),
            kind: GraphKind::Concrete,
            declared_node: false,
            contained,
            instantiated_by: None,
            multiplicity: None,
            starting_points: BTreeSet::new(),
            terminal_points: BTreeSet::new(),
        },
    );
    Ok(expansion)
}
