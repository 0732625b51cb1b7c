use proptest::prelude::*;

use super::*;
use crate::ontology::load_builtin_vocabulary;
use crate::workflow::{ambiguity_b, ambiguity_c, eos_workflow, metadynamics_solver, validate_workflow, SimulationWorkflow};

const METADYNAMICS: &str = r#"@prefix : <urn:x-local#> .
@prefix osmo: <urn:x-osmoflow:osmo#> .
@prefix viso-am: <urn:x-osmoflow:viso-am#> .

:SX a osmo:solver;
   osmo:has_solver_method_type [
      a osmo:solver_method_type;
      osmo:has_aspect_object_content [
         a viso-am:sampling_algorithm
      ];
      osmo:has_aspect_text_content
         "Well-tempered metadynamics"
   ].
"#;

fn counts(wf: &SimulationWorkflow) -> [usize; 5] {
    [wf.sections.len(), wf.variables.len(), wf.resources.len(), wf.accesses.len(), wf.graphs.len()]
}

/// Copy with every list sorted: RDF object lists carry no order.
fn normalized(wf: &SimulationWorkflow) -> SimulationWorkflow {
    let mut wf = wf.clone();
    for s in wf.sections.values_mut() {
        s.aspects.sort_by(|a, b| a.class.cmp(&b.class));
        s.internal_variables.sort();
        s.logical_io.sort();
    }
    for r in wf.resources.values_mut() {
        r.stored_variables.sort();
    }
    for a in wf.accesses.values_mut() {
        a.carried_variables.sort();
    }
    for g in wf.graphs.values_mut() {
        g.contained.sort();
    }
    wf
}

fn round_trip(wf: &SimulationWorkflow) -> SimulationWorkflow {
    let text = emit_ttl(&workflow_to_triples(wf));
    let doc = parse_ttl(&text).unwrap();
    triples_to_workflow(&doc, &load_builtin_vocabulary()).unwrap()
}

#[test]
fn metadynamics_listing_structure() {
    let doc = parse_ttl(METADYNAMICS).unwrap();
    assert_eq!(doc.statements.len(), 1);
    let sx = &doc.statements[0];
    assert_eq!(sx.subject, ClassId::local("SX"));
    assert_eq!(sx.line, 5);
    assert_eq!(sx.objects(&rdf_type()).collect::<Vec<_>>(), [&Term::Name(ClassId::osmo("solver"))]);
    let aspects: Vec<_> = sx.objects(&ClassId::osmo("has_solver_method_type")).collect();
    assert_eq!(aspects.len(), 1);
    let Term::Blank(inner) = aspects[0] else { panic!("aspect is not a blank node") };
    let text = inner
        .iter()
        .find(|po| po.predicate == ClassId::osmo("has_aspect_text_content"))
        .unwrap();
    assert_eq!(text.objects, [Term::Literal(Literal::String("Well-tempered metadynamics".into()))]);
    let content = inner
        .iter()
        .find(|po| po.predicate == ClassId::osmo("has_aspect_object_content"))
        .unwrap();
    assert!(matches!(&content.objects[0], Term::Blank(b) if b[0].objects == [Term::Name(ClassId::new("viso-am", "sampling_algorithm"))]));
}

#[test]
fn metadynamics_listing_is_a_fixpoint() {
    let doc = parse_ttl(METADYNAMICS).unwrap();
    let once = emit_ttl(&doc);
    let again = parse_ttl(&once).unwrap();
    assert!(again.structurally_eq(&doc));
    assert_eq!(emit_ttl(&again), once);
    assert!(once.contains("\n:SX a osmo:solver;\n   osmo:has_solver_method_type [\n      a osmo:solver_method_type;"));
}

#[test]
fn metadynamics_listing_matches_built_solver() {
    let doc = parse_ttl(METADYNAMICS).unwrap();
    let wf = triples_to_workflow(&doc, &load_builtin_vocabulary()).unwrap();
    let built = metadynamics_solver();
    assert_eq!(wf.sections["SX"], built.sections["SX"]);
}

#[test]
fn empty_inputs() {
    let doc = parse_ttl("").unwrap();
    assert!(doc.statements.is_empty() && doc.prefixes.is_empty());
    let out = emit_ttl(&TtlDocument::default());
    assert!(out.lines().all(|l| l.starts_with("@prefix ")));
    assert!(out.contains("@prefix osmo: "));
    assert!(parse_ttl(&out).unwrap().structurally_eq(&TtlDocument::default()));
}

#[test]
fn undeclared_prefix() {
    assert_eq!(
        parse_ttl("x:y a z:w .").unwrap_err(),
        TtlError::UnknownPrefix {
            prefix: "x".into(),
            line: 1,
            col: 1
        }
    );
}

#[test]
fn literal_datatypes() {
    let doc = parse_ttl("@prefix : <u#> .\n:s :p true, 3, -2.5, 1e3, \"q\\\"x\\n\" .").unwrap();
    let objs: Vec<_> = doc.statements[0].objects(&ClassId::local("p")).cloned().collect();
    assert_eq!(
        objs,
        [
            Term::Literal(Literal::Boolean(true)),
            Term::Literal(Literal::Integer(3)),
            Term::Literal(Literal::Real(-2.5)),
            Term::Literal(Literal::Real(1000.0)),
            Term::Literal(Literal::String("q\"x\n".into())),
        ]
    );
}

#[test]
fn comments_and_merging() {
    let a = parse_ttl("@prefix : <u#> . # header\n:s :p :o . # trailing\n:s :q 1 .\n").unwrap();
    let b = parse_ttl("@prefix : <u#> .\n:s :q 1; :p :o .").unwrap();
    assert!(a.structurally_eq(&b));
    assert_eq!(emit_ttl(&a), emit_ttl(&b));
}

#[test]
fn error_positions_are_exact() {
    let e = parse_ttl("@prefix : <u#> .\n:s :p\n  ;").unwrap_err();
    assert_eq!(e.position(), Some((3, 3)));
    let e = parse_ttl("@prefix : <u#> .\n:s :p \"open").unwrap_err();
    assert_eq!(e.position().map(|p| p.0), Some(2));
}

#[test]
fn ambiguity_b_document() {
    let doc = workflow_to_triples(&ambiguity_b());
    let text = emit_ttl(&doc);
    assert!(text.contains("osmo:has_simulation_outcome :L2_node"));
    let resources: Vec<_> = doc
        .statements
        .iter()
        .filter(|s| s.objects(&rdf_type()).any(|t| *t == Term::Name(ClassId::osmo("logical_resource"))))
        .map(|s| s.subject.local_name().to_string())
        .collect();
    assert_eq!(resources, ["L1", "L2"]);
}

#[test]
fn workflow_round_trips() {
    let vocab = load_builtin_vocabulary();
    for wf in [ambiguity_b(), ambiguity_c(), eos_workflow(), metadynamics_solver()] {
        let back = normalized(&round_trip(&wf));
        let wf = normalized(&wf);
        assert_eq!(counts(&back), counts(&wf), "{}", wf.name);
        assert_eq!(back.name, wf.name);
        assert_eq!(validate_workflow(&back), validate_workflow(&wf));
        assert_eq!(back.causal_edges, wf.causal_edges);
        assert_eq!(back.coupling_edges, wf.coupling_edges);
        assert_eq!(back.applies_to, wf.applies_to);
        assert_eq!(back.simulation_outcome, wf.simulation_outcome);
        assert_eq!(back.sections, wf.sections);
        assert_eq!(back.variables, wf.variables);
        assert_eq!(back.resources, wf.resources);
        assert_eq!(back.accesses, wf.accesses);
        assert_eq!(back.graphs, wf.graphs);
        let store = doc_to_store(&workflow_to_triples(&wf), &vocab).unwrap();
        assert!(!store.validate().has_errors(), "{}", store.validate().errors().next().unwrap());
    }
}

#[test]
fn node_with_two_resources() {
    let text = r#"@prefix : <u#> .
@prefix osmo: <urn:x-osmoflow:osmo#> .
:S1 a osmo:solver .
:P1 a osmo:processor .
:N a osmo:workflow_node; osmo:contains :S1, :P1 .
"#;
    let err = triples_to_workflow(&parse_ttl(text).unwrap(), &load_builtin_vocabulary()).unwrap_err();
    assert!(matches!(err, TtlError::StructuralError(_)), "{err}");
}

#[test]
fn unknown_vocabulary() {
    let vocab = load_builtin_vocabulary();
    let bad_class = parse_ttl("@prefix : <u#> .\n@prefix osmo: <x#> .\n:S1 a osmo:spaceship .").unwrap();
    assert!(matches!(triples_to_workflow(&bad_class, &vocab), Err(TtlError::VocabularyViolation(_))));
    let bad_pred = parse_ttl("@prefix : <u#> .\n@prefix osmo: <x#> .\n:S1 a osmo:solver; osmo:flies :S2 .").unwrap();
    assert!(matches!(triples_to_workflow(&bad_pred, &vocab), Err(TtlError::VocabularyViolation(_))));
}

#[test]
fn blank_nodes_are_skolemized_deterministically() {
    let doc = parse_ttl(METADYNAMICS).unwrap();
    let vocab = load_builtin_vocabulary();
    let a = doc_to_store(&doc, &vocab).unwrap();
    let b = doc_to_store(&doc, &vocab).unwrap();
    assert_eq!(a.triples(), b.triples());
    let aspect = ClassId::local("SX__has_solver_method_type_1");
    assert!(a.types_of(&aspect).unwrap().contains(&ClassId::osmo("solver_method_type")));
    let content = ClassId::local("SX__has_solver_method_type_1__has_aspect_object_content_1");
    assert!(a.types_of(&content).is_some());
}

fn name_strategy() -> impl Strategy<Value = ClassId> {
    (prop::sample::select(vec!["", "osmo", "ex"]), "[a-z][a-z0-9_]{0,5}").prop_map(|(p, l)| ClassId::new(p, l))
}

fn literal_strategy() -> impl Strategy<Value = Literal> {
    prop_oneof![
        any::<bool>().prop_map(Literal::Boolean),
        any::<i64>().prop_map(Literal::Integer),
        any::<f64>().prop_filter("finite", |f| f.is_finite()).prop_map(Literal::Real),
        ".{0,8}".prop_map(Literal::String),
    ]
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![name_strategy().prop_map(Term::Name), literal_strategy().prop_map(Term::Literal)];
    leaf.prop_recursive(2, 12, 3, |inner| {
        prop::collection::vec((name_strategy(), prop::collection::vec(inner, 1..3)), 0..3).prop_map(|pos| {
            Term::Blank(pos.into_iter().map(|(predicate, objects)| PredicateObjects { predicate, objects }).collect())
        })
    })
}

fn doc_strategy() -> impl Strategy<Value = TtlDocument> {
    let statement = (
        name_strategy(),
        prop::collection::vec((name_strategy(), prop::collection::vec(term_strategy(), 1..3)), 1..4),
    )
        .prop_map(|(subject, pos)| Statement {
            subject,
            predicates: pos.into_iter().map(|(predicate, objects)| PredicateObjects { predicate, objects }).collect(),
            line: 0,
        });
    prop::collection::vec(statement, 0..5).prop_map(|statements| {
        let mut doc = TtlDocument::with_standard_prefixes();
        doc.prefixes.insert(String::new(), "urn:x-test#".into());
        doc.prefixes.insert("ex".into(), "http://example.org/ns#".into());
        doc.statements = statements;
        doc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_documents_round_trip(doc in doc_strategy()) {
        let text = emit_ttl(&doc);
        let back = parse_ttl(&text).unwrap();
        prop_assert!(back.structurally_eq(&doc), "{}", text);
        prop_assert_eq!(emit_ttl(&back), text);
    }

    #[test]
    fn parser_is_total(text in "\\PC{0,60}") {
        if let Err(e) = parse_ttl(&text) {
            prop_assert!(e.position().is_some());
        }
    }

    #[test]
    fn parser_is_total_near_valid(text in "[@a-z:<>#.;,\\[\\] \"\n0-9_-]{0,60}") {
        if let Err(e) = parse_ttl(&text) {
            prop_assert!(e.position().is_some());
        }
    }
}
