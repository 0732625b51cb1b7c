use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;

fn node(wf: &mut SimulationWorkflow, kind: SectionKind) -> Id {
    let s = wf.add_section(kind, vec![]).unwrap();
    wf.add_node(ResourceRef::Section(s)).unwrap()
}

#[test]
fn section_aspects_are_checked() {
    let mut wf = SimulationWorkflow::new("t");
    let s = wf
        .add_section(SectionKind::Solver, vec![Aspect::text("solver_method_type", "Monte Carlo")])
        .unwrap();
    assert_eq!(s, "S1");
    assert!(matches!(
        wf.add_section(SectionKind::UseCase, vec![Aspect::text("solver_timestep", "1 fs")]),
        Err(WorkflowError::InvalidAspectForKind { kind: SectionKind::UseCase, .. })
    ));
    let twice = vec![Aspect::text("solver_timestep", "1 fs"), Aspect::text("solver_timestep", "2 fs")];
    assert!(matches!(
        wf.add_section(SectionKind::Solver, twice),
        Err(WorkflowError::DuplicateFunctionalAspect(_))
    ));
    let empty = Aspect {
        class: ClassId::osmo("solver_parameter"),
        text: None,
        object: None,
    };
    assert!(matches!(wf.add_section(SectionKind::Solver, vec![empty]), Err(WorkflowError::EmptyAspect(_))));
}

#[test]
fn carried_variable_must_be_stored() {
    let mut wf = SimulationWorkflow::new("t");
    let s = wf.add_section(SectionKind::Solver, vec![]).unwrap();
    let t = wf.add_variable("T", None);
    let l = wf.add_resource(false, &[]).unwrap();
    assert_eq!(
        wf.add_access(&s, &l, AccessFlags::R_INIT, &[&t]),
        Err(WorkflowError::UnknownRef(t.clone()))
    );
    let l2 = wf.add_resource(false, &[&t]).unwrap();
    wf.add_access(&s, &l2, AccessFlags::R_INIT, &[&t]).unwrap();
}

#[test]
fn edges_reject_self_and_unknown() {
    let mut wf = SimulationWorkflow::new("t");
    let a = node(&mut wf, SectionKind::Solver);
    assert_eq!(wf.link(&a, &a), Err(WorkflowError::SelfEdge(a.clone())));
    assert_eq!(wf.couple(&a, "nope"), Err(WorkflowError::UnknownRef("nope".into())));
}

#[test]
fn containment_is_a_forest() {
    let mut wf = SimulationWorkflow::new("t");
    let a = node(&mut wf, SectionKind::Solver);
    wf.add_graph(GraphDecl::Concrete(vec![ResourceRef::Graph(a.clone())])).unwrap();
    assert!(matches!(
        wf.add_graph(GraphDecl::Concrete(vec![ResourceRef::Graph(a)])),
        Err(WorkflowError::DoubleContainment { .. })
    ));
    let s = wf.add_section(SectionKind::Processor, vec![]).unwrap();
    wf.add_node(ResourceRef::Section(s.clone())).unwrap();
    assert!(matches!(
        wf.add_graph_as("X", GraphDecl::Node(ResourceRef::Section(s))),
        Err(WorkflowError::DoubleContainment { .. })
    ));
}

#[test]
fn ambiguity_b_reading() {
    let wf = ambiguity_b();
    let r = validate_workflow(&wf);
    assert!(r.is_empty(), "{:?}", r.diagnostics);
    assert_eq!(classify_processor(&wf, "P1"), Ok(ProcessorRole::Postprocessor));
    let stages = topo_order(&wf, "W").unwrap();
    let pos = |id: &str| stages.iter().position(|s| s.contains(id)).unwrap();
    assert!(pos("S1_node") < pos("P1_node"));
    assert!(wf.is_linked_to("P1_node", "S1_node"));
}

#[test]
fn ambiguity_c_reading() {
    let wf = ambiguity_c();
    let r = validate_workflow(&wf);
    assert!(r.is_empty(), "{:?}", r.diagnostics);
    assert_eq!(classify_processor(&wf, "P1"), Ok(ProcessorRole::CoupledProcessor));
    let stages = topo_order(&wf, "W").unwrap();
    assert_eq!(stages.len(), 1);
    assert!(stages[0].contains("S1_node") && stages[0].contains("P1_node"));
}

#[test]
fn classify_edge_cases() {
    let mut wf = SimulationWorkflow::new("t");
    let p = wf.add_section(SectionKind::Processor, vec![]).unwrap();
    assert_eq!(classify_processor(&wf, &p), Ok(ProcessorRole::Unclassified));
    wf.add_node(ResourceRef::Section(p.clone())).unwrap();
    assert_eq!(classify_processor(&wf, &p), Ok(ProcessorRole::Unclassified));
    let s = wf.add_section(SectionKind::Solver, vec![]).unwrap();
    assert_eq!(classify_processor(&wf, &s), Err(WorkflowError::WrongKind(s)));
    let l = wf.add_resource(false, &[]).unwrap();
    let ln = wf.add_node(ResourceRef::Logical(l)).unwrap();
    wf.link(&ln, &format!("{p}_node")).unwrap();
    assert_eq!(classify_processor(&wf, &p), Ok(ProcessorRole::Unclassified));
}

#[test]
fn solver_applies_to_is_flagged() {
    let mut wf = ambiguity_b();
    wf.applies_to("S1", "W").unwrap();
    let r = validate_workflow(&wf);
    let hits: Vec<_> = r.by_rule("applies-to-domain").collect();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].subject, "S1");
}

#[test]
fn sibling_cycle_is_flagged() {
    let mut wf = SimulationWorkflow::new("t");
    let a = node(&mut wf, SectionKind::Solver);
    let b = node(&mut wf, SectionKind::Processor);
    wf.add_graph_as("G", GraphDecl::Concrete(vec![ResourceRef::Graph(a.clone()), ResourceRef::Graph(b.clone())]))
        .unwrap();
    wf.link(&a, &b).unwrap();
    wf.link(&b, &a).unwrap();
    assert_eq!(validate_workflow(&wf).by_rule("causal-cycle").count(), 1);
    assert!(matches!(topo_order(&wf, "G"), Err(WorkflowError::CyclicDependency(_))));
}

#[test]
fn chain_of_three_gives_three_stages() {
    let mut wf = SimulationWorkflow::new("t");
    let ids: Vec<Id> = (0..3).map(|_| node(&mut wf, SectionKind::Solver)).collect();
    wf.add_graph_as("G", GraphDecl::Concrete(ids.iter().cloned().map(ResourceRef::Graph).collect()))
        .unwrap();
    wf.link(&ids[0], &ids[1]).unwrap();
    wf.link(&ids[1], &ids[2]).unwrap();
    let stages = topo_order(&wf, "G").unwrap();
    assert_eq!(stages.len(), 3);
    assert_eq!(stages[2], BTreeSet::from([ids[2].clone()]));
}

#[test]
fn structural_violations_through_raw_fields() {
    let mut wf = ambiguity_b();
    wf.coupling_edges.insert(("S1_node".into(), "L1_node".into()));
    wf.graphs.get_mut("P1_node").unwrap().contained.push(ResourceRef::Logical("L1".into()));
    wf.accesses.get_mut("A1").unwrap().flags = AccessFlags::none();
    wf.accesses.get_mut("A2").unwrap().carried_variables.push("ghost".into());
    wf.graphs.get_mut("W").unwrap().starting_points.insert("nowhere".into());
    let r = validate_workflow(&wf);
    for rule in [
        "coupling-symmetry",
        "node-cardinality",
        "double-containment",
        "empty-access",
        "carried-variable",
        "dangling-point",
    ] {
        assert!(r.by_rule(rule).count() >= 1, "{rule}: {:?}", r.diagnostics);
    }
}

#[test]
fn non_terminal_outcome_warns() {
    let mut wf = ambiguity_b();
    wf.graphs.get_mut("W").unwrap().terminal_points.clear();
    let r = validate_workflow(&wf);
    assert!(!r.has_errors());
    assert_eq!(r.by_rule("outcome-not-terminal").count(), 1);
    wf.simulation_outcome.insert("S1_node".into());
    assert_eq!(validate_workflow(&wf).by_rule("outcome").count(), 1);
}

#[test]
fn eos_workflow_structure() {
    let wf = eos_workflow();
    let r = validate_workflow(&wf);
    assert!(r.is_empty(), "{:?}", r.diagnostics);
    assert_eq!(wf.count_sections(SectionKind::UseCase), 1);
    assert_eq!(wf.count_sections(SectionKind::MaterialsModel), 2);
    assert_eq!(wf.count_sections(SectionKind::Solver), 2);
    assert_eq!(wf.graphs.values().filter(|g| g.kind == GraphKind::Virtual).count(), 3);
    let stages = topo_order(&wf, "W").unwrap();
    let pos = |id: &str| stages.iter().position(|s| s.contains(id)).unwrap();
    assert!(pos("V1") < pos("V2") && pos("V2") < pos("V3"));
    for p in ["P1", "P2"] {
        assert_eq!(classify_processor(&wf, p), Ok(ProcessorRole::Postprocessor), "{p}");
    }
}

#[test]
fn expand_concurrent_and_iterative() {
    let mut wf = eos_workflow();
    let e = expand_virtual(&mut wf, "V1", 3).unwrap();
    let stages = topo_order(&wf, &e).unwrap();
    assert_eq!(stages.len(), 1);
    assert_eq!(stages[0].len(), 3);
    let e2 = expand_virtual(&mut wf, "V2", 4).unwrap();
    assert_eq!(topo_order(&wf, &e2).unwrap().len(), 4);
    let r = validate_workflow(&wf);
    assert!(r.is_empty(), "{:?}", r.diagnostics);
    assert_eq!(expand_virtual(&mut wf, "C1", 2), Err(WorkflowError::NotVirtual("C1".into())));
    assert_eq!(expand_virtual(&mut wf, "V1", 0), Err(WorkflowError::ZeroCount));
}

#[test]
fn expand_once_is_isomorphic() {
    let mut wf = eos_workflow();
    let e = expand_virtual(&mut wf, "V2", 1).unwrap();
    let copy = wf.child_graphs(&e);
    assert_eq!(copy.len(), 1);
    let shape = |g: &str| {
        let mut kids: Vec<_> = wf
            .child_graphs(g)
            .iter()
            .map(|c| wf.graphs[c].contained.len())
            .collect();
        kids.sort();
        (wf.graphs[g].contained.len(), kids)
    };
    assert_eq!(shape("C2"), shape(&copy[0]));
    let edges_in = |g: &str| {
        let kids: BTreeSet<_> = wf.child_graphs(g).into_iter().collect();
        wf.causal_edges.iter().filter(|(a, b)| kids.contains(a) && kids.contains(b)).count()
    };
    assert_eq!(edges_in("C2"), edges_in(&copy[0]));
}

#[test]
fn builders_are_deterministic() {
    assert_eq!(eos_workflow(), eos_workflow());
    assert_eq!(ambiguity_c(), ambiguity_c());
}

#[test]
fn dot_shapes_for_ambiguity_b() {
    let dot = to_dot(&ambiguity_b());
    assert_eq!(dot.matches("shape=ellipse").count(), 4);
    assert_eq!(dot.matches("shape=triangle").count(), 2);
    assert_eq!(dot.matches("shape=point").count(), 1);
    assert_eq!(dot.matches("style=filled").count(), 0);
    let c = to_dot(&ambiguity_c());
    assert_eq!(c.matches("style=filled").count(), 1);
    assert!(c.contains("dir=both"));
}

/// Every permutation of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

fn sibling_workflow(n: usize, edges: &[(usize, usize)], couplings: &[(usize, usize)]) -> (SimulationWorkflow, Vec<Id>) {
    let mut wf = SimulationWorkflow::new("t");
    let ids: Vec<Id> = (0..n).map(|_| node(&mut wf, SectionKind::Solver)).collect();
    wf.add_graph_as("G", GraphDecl::Concrete(ids.iter().cloned().map(ResourceRef::Graph).collect()))
        .unwrap();
    for &(a, b) in edges {
        if a != b {
            wf.link(&ids[a], &ids[b]).unwrap();
        }
    }
    for &(a, b) in couplings {
        if a != b {
            wf.couple(&ids[a], &ids[b]).unwrap();
        }
    }
    (wf, ids)
}

proptest! {
    #[test]
    fn topo_agrees_with_permutation_oracle(
        n in 1usize..=7,
        raw in proptest::collection::vec((0usize..7, 0usize..7), 0..12),
    ) {
        let edges: Vec<_> = raw.into_iter().filter(|(a, b)| *a < n && *b < n && a != b).collect();
        let (wf, ids) = sibling_workflow(n, &edges, &[]);
        let valid = |perm: &[usize]| {
            let pos: Vec<usize> = { let mut p = vec![0; n]; for (i, x) in perm.iter().enumerate() { p[*x] = i; } p };
            edges.iter().all(|(a, b)| pos[*a] < pos[*b])
        };
        let any_valid = permutations(n).iter().any(|p| valid(p));
        match topo_order(&wf, "G") {
            Ok(stages) => {
                prop_assert!(any_valid);
                let flat: Vec<usize> = stages
                    .iter()
                    .flat_map(|s| s.iter().map(|id| ids.iter().position(|x| x == id).unwrap()))
                    .collect();
                prop_assert_eq!(flat.len(), n);
                prop_assert!(valid(&flat));
                // every predecessor is in a strictly earlier stage
                let stage_of = |i: usize| stages.iter().position(|s| s.contains(&ids[i])).unwrap();
                for (a, b) in &edges {
                    prop_assert!(stage_of(*a) < stage_of(*b));
                }
            }
            Err(_) => prop_assert!(!any_valid),
        }
    }

    #[test]
    fn coupled_graphs_share_a_stage(
        n in 2usize..=8,
        raw in proptest::collection::vec((0usize..8, 0usize..8), 0..8),
        raw_c in proptest::collection::vec((0usize..8, 0usize..8), 0..4),
    ) {
        let edges: Vec<_> = raw.into_iter().filter(|(a, b)| a < b && *b < n).collect();
        let couplings: Vec<_> = raw_c.into_iter().filter(|(a, b)| *a < n && *b < n).collect();
        let (wf, ids) = sibling_workflow(n, &edges, &couplings);
        if let Ok(stages) = topo_order(&wf, "G") {
            for (a, b) in couplings.iter().filter(|(a, b)| a != b) {
                let sa = stages.iter().position(|s| s.contains(&ids[*a]));
                let sb = stages.iter().position(|s| s.contains(&ids[*b]));
                prop_assert_eq!(sa, sb);
            }
        }
        // derived linking is exactly the symmetric closure of causal edges
        for a in &ids {
            for b in &ids {
                let direct = wf.causal_edges.contains(&(a.clone(), b.clone()))
                    || wf.causal_edges.contains(&(b.clone(), a.clone()));
                prop_assert_eq!(wf.is_linked_to(a, b), direct);
            }
        }
        for g in wf.nodes() {
            prop_assert_eq!(g.contained.len(), 1);
        }
    }

    #[test]
    fn expansion_preserves_validity(v in 0usize..3, n in 1usize..5) {
        let mut wf = eos_workflow();
        let name = ["V1", "V2", "V3"][v];
        let e = expand_virtual(&mut wf, name, n).unwrap();
        prop_assert!(validate_workflow(&wf).is_empty());
        prop_assert_eq!(wf.child_graphs(&e).len(), n);
    }
}
