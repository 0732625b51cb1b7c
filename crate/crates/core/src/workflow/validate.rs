//! Structural checks over a whole workflow.

use std::collections::BTreeMap;

use crate::diagnostics::ValidationReport;
use crate::ontology::SectionKind;

use super::order::sibling_stages;
use super::{check_aspects, GraphKind, ResourceRef, SimulationWorkflow};

/// Lists every violation found; an empty report means the workflow is valid.
pub fn validate_workflow(wf: &SimulationWorkflow) -> ValidationReport {
    let mut r = ValidationReport::new();
    check_references(wf, &mut r);
    check_sections(wf, &mut r);
    check_containment(wf, &mut r);
    check_graphs(wf, &mut r);
    check_edges(wf, &mut r);
    check_accesses(wf, &mut r);
    check_outcomes(wf, &mut r);
    r
}

fn check_references(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    for res in wf.resources.values() {
        for v in &res.stored_variables {
            if !wf.variables.contains_key(v) {
                r.error("unknown-ref", &res.id, format!("stored variable `{v}` does not exist"));
            }
        }
    }
    for s in wf.sections.values() {
        for v in s.internal_variables.iter().chain(&s.logical_io) {
            if !wf.variables.contains_key(v) {
                r.error("unknown-ref", &s.id, format!("variable `{v}` does not exist"));
            }
        }
    }
    for g in wf.graphs.values() {
        for c in &g.contained {
            let exists = match c {
                ResourceRef::Section(id) => wf.sections.contains_key(id),
                ResourceRef::Logical(id) => wf.resources.contains_key(id),
                ResourceRef::Graph(id) => wf.graphs.contains_key(id),
            };
            if !exists {
                r.error("unknown-ref", &g.id, format!("contains missing {c}"));
            }
        }
    }
}

fn check_sections(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    for s in wf.sections.values() {
        if let Err(e) = check_aspects(s.kind, &s.aspects) {
            r.error("aspect", &s.id, e.to_string());
        }
    }
    for (s, g) in &wf.applies_to {
        match wf.sections.get(s) {
            None => r.error("unknown-ref", s, "applies_to subject does not exist"),
            Some(sec) if !matches!(sec.kind, SectionKind::UseCase | SectionKind::MaterialsModel) => r.error(
                "applies-to-domain",
                s,
                format!(
                    "only a use_case or materials_model may apply to a workflow graph; `{s}` is a {:?} applying to `{g}`",
                    sec.kind
                ),
            ),
            Some(_) => {}
        }
        if !wf.graphs.contains_key(g) {
            r.error("unknown-ref", s, format!("applies_to target `{g}` does not exist"));
        }
    }
}

fn check_containment(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    let mut container: BTreeMap<&ResourceRef, &str> = BTreeMap::new();
    for g in wf.graphs.values() {
        for c in &g.contained {
            if let Some(first) = container.insert(c, &g.id) {
                r.error(
                    "double-containment",
                    c.id(),
                    format!("{c} is directly contained in both `{first}` and `{}`", g.id),
                );
            }
        }
    }
    // containment must be a forest: no graph may reach itself
    for g in wf.graphs.keys() {
        let mut cur = ResourceRef::Graph(g.clone());
        let mut steps = 0;
        while let Some(parent) = container.get(&cur) {
            if *parent == g || steps > wf.graphs.len() {
                r.error("containment-cycle", g, "graph contains itself");
                break;
            }
            cur = ResourceRef::Graph(parent.to_string());
            steps += 1;
        }
    }
}

fn check_graphs(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    for g in wf.graphs.values() {
        if g.declared_node && g.contained.len() != 1 {
            r.error(
                "node-cardinality",
                &g.id,
                format!("a workflow node contains exactly one resource, found {}", g.contained.len()),
            );
        }
        match g.kind {
            GraphKind::Virtual => {
                if !g.contained.is_empty() {
                    r.error("virtual-graph", &g.id, "a virtual graph contains nothing directly");
                }
                match g.instantiated_by.as_ref().map(|c| (c, wf.graphs.get(c))) {
                    None => r.error("virtual-graph", &g.id, "no concrete graph instantiates it"),
                    Some((c, None)) => r.error("unknown-ref", &g.id, format!("instantiating graph `{c}` does not exist")),
                    Some((c, Some(cg))) if cg.kind != GraphKind::Concrete => {
                        r.error("virtual-graph", &g.id, format!("instantiating graph `{c}` is not concrete"))
                    }
                    Some((c, Some(_))) => {
                        if let Some(outer) = wf.container_of(&ResourceRef::Graph(c.clone())) {
                            r.error(
                                "virtual-graph",
                                c,
                                format!("instantiates `{}` and must not also be contained in `{outer}`", g.id),
                            );
                        }
                    }
                }
                if g.multiplicity.is_none() {
                    r.error("virtual-graph", &g.id, "multiplicity is not declared");
                }
            }
            GraphKind::Concrete => {
                if g.instantiated_by.is_some() || g.multiplicity.is_some() {
                    r.error("virtual-graph", &g.id, "instantiation data on a concrete graph");
                }
            }
        }
        let scope = wf.subtree(&g.id);
        for (label, points) in [("starting", &g.starting_points), ("terminal", &g.terminal_points)] {
            for p in points {
                let ok = wf.graphs.get(p).is_some_and(|n| n.is_node()) && (scope.contains(p) || *p == g.id);
                if !ok {
                    r.error(
                        "dangling-point",
                        &g.id,
                        format!("{label} point `{p}` is not a workflow node inside the graph"),
                    );
                }
            }
        }
    }
}

fn check_edges(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    for (a, b) in &wf.coupling_edges {
        if !wf.coupling_edges.contains(&(b.clone(), a.clone())) {
            r.error("coupling-symmetry", a, format!("coupling with `{b}` is stored in one direction only"));
        }
    }
    for (rule, edges) in [("causal-scope", &wf.causal_edges), ("coupling-scope", &wf.coupling_edges)] {
        for (a, b) in edges {
            if a == b {
                r.error(rule, a, "edge to itself");
                continue;
            }
            if !wf.graphs.contains_key(a) || !wf.graphs.contains_key(b) {
                r.error("unknown-ref", a, format!("edge to `{b}` references a missing graph"));
                continue;
            }
            let ca = wf.container_of(&ResourceRef::Graph(a.clone()));
            let cb = wf.container_of(&ResourceRef::Graph(b.clone()));
            if ca != cb {
                r.error(rule, a, format!("`{a}` and `{b}` are not siblings within one graph"));
            }
        }
    }
    for g in wf.graphs.values().filter(|g| g.kind == GraphKind::Concrete) {
        if let Err(e) = sibling_stages(wf, &wf.child_graphs(&g.id)) {
            r.error("causal-cycle", &g.id, format!("{e}; iteration needs a virtual graph"));
        }
    }
    // top-level graphs form one more sibling group
    let roots: Vec<_> = wf
        .graphs
        .keys()
        .filter(|g| wf.container_of(&ResourceRef::Graph((*g).clone())).is_none())
        .cloned()
        .collect();
    if let Err(e) = sibling_stages(wf, &roots) {
        r.error("causal-cycle", &wf.name, e.to_string());
    }
}

fn check_accesses(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    for a in wf.accesses.values() {
        if !wf.sections.contains_key(&a.access_point) {
            r.error("unknown-ref", &a.id, format!("access point `{}` does not exist", a.access_point));
        }
        if a.flags.is_empty() {
            r.error("empty-access", &a.id, "no access flag is set");
        }
        match wf.resources.get(&a.resource) {
            None => r.error("unknown-ref", &a.id, format!("resource `{}` does not exist", a.resource)),
            Some(res) => {
                for v in &a.carried_variables {
                    if !res.stored_variables.contains(v) {
                        r.error(
                            "carried-variable",
                            &a.id,
                            format!("carried variable `{v}` is not stored in `{}`", res.id),
                        );
                    }
                }
            }
        }
    }
}

fn check_outcomes(wf: &SimulationWorkflow, r: &mut ValidationReport) {
    for o in &wf.simulation_outcome {
        if !wf.is_logical_node(o) {
            r.error("outcome", o, "a simulation outcome must be a logical node");
            continue;
        }
        if !wf.graphs.values().any(|g| g.terminal_points.contains(o)) {
            r.warning("outcome-not-terminal", o, "outcome node is not a terminal point of any graph");
        }
    }
}
