//! Mapping between documents, vocabulary stores and workflows.

use std::collections::{BTreeMap, BTreeSet};

use crate::ontology::{
    aspect_spec, rdf_type, rdfs_label, rdfs_subclass_of, ClassId, Literal, Object, SectionKind, VocabularyStore,
};
use crate::workflow::{
    AccessFlags, Aspect, GraphKind, Id, LogicalValue, Multiplicity, ObjectContent, ResourceRef, SimulationWorkflow,
    WorkflowError, WorkflowGraph,
};

use super::{PredicateObjects, Statement, Term, TtlDocument, TtlError};

fn o(local: &str) -> ClassId {
    ClassId::osmo(local)
}

fn loc(id: &str) -> Term {
    Term::Name(ClassId::local(id))
}

fn lit_str(s: &str) -> Term {
    Term::Literal(Literal::String(s.to_string()))
}

fn blank(pairs: Vec<(ClassId, Term)>) -> Term {
    let mut st = Statement::new(ClassId::local("_"));
    for (p, t) in pairs {
        st.push(p, t);
    }
    Term::Blank(st.predicates)
}

fn aspect_term(a: &Aspect) -> Term {
    let mut pairs = vec![(rdf_type(), Term::Name(a.class.clone()))];
    if let Some(obj) = &a.object {
        let t = match obj {
            ObjectContent::Class(c) => blank(vec![(rdf_type(), Term::Name(c.clone()))]),
            ObjectContent::Individual(i) => Term::Name(i.clone()),
            ObjectContent::External(iri) => lit_str(iri),
        };
        pairs.push((o("has_aspect_object_content"), t));
    }
    if let Some(text) = &a.text {
        pairs.push((o("has_aspect_text_content"), lit_str(text)));
    }
    blank(pairs)
}

fn value_term(v: &LogicalValue) -> Term {
    let mut pairs = vec![(rdf_type(), Term::Name(o("logical_value")))];
    match v {
        LogicalValue::Scalar { value, unit } => {
            pairs.push((o("has_scalar_value"), Term::Literal(Literal::Real(*value))));
            if let Some(u) = unit {
                pairs.push((o("has_unit"), lit_str(u)));
            }
        }
        LogicalValue::Vector(xs) => {
            let joined = xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
            pairs.push((o("has_vector_value"), lit_str(&joined)));
        }
        LogicalValue::Text(s) => pairs.push((o("has_string_value"), lit_str(s))),
    }
    blank(pairs)
}

/// OSMO description of `wf`: one typed subject per entity, LDT relations as
/// object properties and set access flags as boolean data properties.
pub fn workflow_to_triples(wf: &SimulationWorkflow) -> TtlDocument {
    let mut doc = TtlDocument::with_standard_prefixes();
    let ty = rdf_type;

    let mut root = Statement::new(ClassId::local(&wf.name));
    root.push(ty(), Term::Name(o("simulation_workflow")));
    for n in &wf.simulation_outcome {
        root.push(o("has_simulation_outcome"), loc(n));
    }
    doc.statements.push(root);

    for s in wf.sections.values() {
        let mut st = Statement::new(ClassId::local(&s.id));
        st.push(ty(), Term::Name(s.kind.class()));
        for a in &s.aspects {
            let pred = aspect_spec(&a.class).map(|spec| spec.relation()).unwrap_or_else(|| o("has_aspect"));
            st.push(pred, aspect_term(a));
        }
        for v in &s.internal_variables {
            st.push(o("has_internal_lv"), loc(v));
        }
        for v in &s.logical_io {
            st.push(o("has_logical_io"), loc(v));
        }
        for (_, g) in wf.applies_to.iter().filter(|(x, _)| *x == s.id) {
            st.push(o("applies_to"), loc(g));
        }
        doc.statements.push(st);
    }

    for v in wf.variables.values() {
        let mut st = Statement::new(ClassId::local(&v.id));
        st.push(ty(), Term::Name(o("logical_variable")));
        st.push(rdfs_label(), lit_str(&v.name));
        if let Some(val) = &v.value {
            st.push(o("has_value"), value_term(val));
        }
        doc.statements.push(st);
    }

    for r in wf.resources.values() {
        let mut st = Statement::new(ClassId::local(&r.id));
        st.push(ty(), Term::Name(o("logical_resource")));
        if r.interactive {
            st.push(o("is_interactive"), Term::Literal(Literal::Boolean(true)));
        }
        for v in &r.stored_variables {
            st.push(o("has_stored_variable"), loc(v));
        }
        doc.statements.push(st);
    }

    for a in wf.accesses.values() {
        let mut st = Statement::new(ClassId::local(&a.id));
        st.push(ty(), Term::Name(o("logical_access")));
        st.push(o("has_access_point"), loc(&a.access_point));
        st.push(o("has_resource"), loc(&a.resource));
        for v in &a.carried_variables {
            st.push(o("has_carried_variable"), loc(v));
        }
        for (prop, _, on) in a.flags.entries() {
            if on {
                st.push(o(prop), Term::Literal(Literal::Boolean(true)));
            }
        }
        doc.statements.push(st);
    }

    for g in wf.graphs.values() {
        let mut st = Statement::new(ClassId::local(&g.id));
        let class = match g.kind {
            GraphKind::Virtual => "virtual_graph",
            GraphKind::Concrete if g.is_node() && matches!(g.contained[0], ResourceRef::Logical(_)) => "logical_node",
            GraphKind::Concrete if g.is_node() || g.declared_node => "workflow_node",
            GraphKind::Concrete => "concrete_graph",
        };
        st.push(ty(), Term::Name(o(class)));
        for c in &g.contained {
            st.push(o("contains"), loc(c.id()));
        }
        for p in &g.starting_points {
            st.push(o("has_starting_point"), loc(p));
        }
        for p in &g.terminal_points {
            st.push(o("has_terminal_point"), loc(p));
        }
        for v in wf.graphs.values().filter(|v| v.instantiated_by.as_deref() == Some(g.id.as_str())) {
            st.push(o("instantiates"), loc(&v.id));
        }
        match &g.multiplicity {
            Some(Multiplicity::ConcurrentInstances { count }) => {
                st.push(o("has_execution_mode"), lit_str("concurrent"));
                if let Some(n) = count {
                    st.push(o("has_instance_count"), Term::Literal(Literal::Integer(i64::from(*n))));
                }
            }
            Some(Multiplicity::IterativeLoop { count, termination }) => {
                st.push(o("has_execution_mode"), lit_str("iterative"));
                if let Some(n) = count {
                    st.push(o("has_instance_count"), Term::Literal(Literal::Integer(i64::from(*n))));
                }
                if let Some(t) = termination {
                    st.push(o("has_termination_condition"), lit_str(t));
                }
            }
            None => {}
        }
        for (_, b) in wf.causal_edges.iter().filter(|(a, _)| *a == g.id) {
            st.push(o("is_direct_cause_of"), loc(b));
        }
        for (_, b) in wf.coupling_edges.iter().filter(|(a, _)| *a == g.id) {
            st.push(o("is_coupled_with"), loc(b));
        }
        doc.statements.push(st);
    }
    doc
}

fn skolem(parent: &ClassId, predicate: &ClassId, ordinal: usize) -> ClassId {
    let base = if parent.prefix().is_empty() {
        parent.local_name().to_string()
    } else {
        format!("{}_{}", parent.prefix(), parent.local_name())
    };
    ClassId::local(&format!("{base}__{}_{ordinal}", predicate.local_name()))
}

/// Flat triples with blank nodes replaced by ids derived from parent
/// subject, predicate and ordinal.
fn flatten(doc: &TtlDocument) -> Vec<(ClassId, ClassId, Object)> {
    fn walk(subject: &ClassId, pos: &[PredicateObjects], out: &mut Vec<(ClassId, ClassId, Object)>) {
        let mut ordinals: BTreeMap<&ClassId, usize> = BTreeMap::new();
        for po in pos {
            for t in &po.objects {
                match t {
                    Term::Name(n) => out.push((subject.clone(), po.predicate.clone(), Object::Entity(n.clone()))),
                    Term::Literal(l) => out.push((subject.clone(), po.predicate.clone(), Object::Literal(l.clone()))),
                    Term::Blank(inner) => {
                        let k = ordinals.entry(&po.predicate).or_insert(0);
                        *k += 1;
                        let id = skolem(subject, &po.predicate, *k);
                        out.push((subject.clone(), po.predicate.clone(), Object::Entity(id.clone())));
                        walk(&id, inner, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for s in &doc.statements {
        walk(&s.subject, &s.predicates, &mut out);
    }
    out
}

/// Asserts every triple of `doc` into a copy of `vocab`.
///
/// Classes and predicates must already exist in the vocabulary. Subjects
/// and objects without an `a` statement become untyped individuals.
pub fn doc_to_store(doc: &TtlDocument, vocab: &VocabularyStore) -> Result<VocabularyStore, TtlError> {
    let mut store = vocab.clone();
    for (p, iri) in &doc.prefixes {
        if !store.prefixes().contains_key(p) {
            store.register_prefix(p, iri);
        }
    }
    let triples = flatten(doc);
    let violation = |e: crate::ontology::OntologyError| TtlError::VocabularyViolation(e.to_string());
    for (s, p, obj) in triples.iter().filter(|t| t.1 == rdf_type()) {
        match obj {
            Object::Entity(c) if store.has_class(c) => store.declare_individual(s.clone(), std::slice::from_ref(c)).map_err(violation)?,
            Object::Entity(c) => return Err(TtlError::VocabularyViolation(format!("class {c} is not in the vocabulary"))),
            Object::Literal(_) => return Err(TtlError::VocabularyViolation(format!("{s} {p} needs a class, not a literal"))),
        }
        store.assert_triple(s.clone(), p.clone(), obj.clone()).map_err(violation)?;
    }
    let known = |store: &VocabularyStore, id: &ClassId| store.has_class(id) || store.types_of(id).is_some();
    for (s, p, obj) in triples.into_iter().filter(|t| t.1 != rdf_type()) {
        if p != rdfs_label() && p != rdfs_subclass_of() && store.relation(&p).is_none() {
            return Err(TtlError::VocabularyViolation(format!("predicate {p} is not in the vocabulary")));
        }
        if !known(&store, &s) {
            store.declare_individual(s.clone(), &[]).map_err(violation)?;
        }
        if let Object::Entity(e) = &obj {
            if !known(&store, e) && p != rdfs_subclass_of() {
                store.declare_individual(e.clone(), &[]).map_err(violation)?;
            }
        }
        store.assert_triple(s, p, obj).map_err(violation)?;
    }
    Ok(store)
}

fn structural(e: WorkflowError) -> TtlError {
    TtlError::StructuralError(e.to_string())
}

struct Reader<'a> {
    statements: BTreeMap<&'a ClassId, &'a Statement>,
}

impl<'a> Reader<'a> {
    fn typed(&self, class: &str) -> Vec<&'a Statement> {
        let c = Term::Name(o(class));
        self.statements
            .values()
            .filter(|s| s.objects(&rdf_type()).any(|t| *t == c))
            .copied()
            .collect()
    }
}

fn local_refs(st: &Statement, pred: &str) -> Result<Vec<Id>, TtlError> {
    st.objects(&o(pred))
        .map(|t| match t {
            Term::Name(n) if n.prefix().is_empty() => Ok(n.local_name().to_string()),
            _ => Err(TtlError::StructuralError(format!(
                "{} osmo:{pred} must point to a local entity",
                st.subject
            ))),
        })
        .collect()
}

fn single_ref(st: &Statement, pred: &str) -> Result<Id, TtlError> {
    let mut refs = local_refs(st, pred)?;
    if refs.len() != 1 {
        return Err(TtlError::StructuralError(format!(
            "{} needs exactly one osmo:{pred}, found {}",
            st.subject,
            refs.len()
        )));
    }
    Ok(refs.remove(0))
}

fn literals<'s>(pos: &'s [PredicateObjects], pred: &str) -> impl Iterator<Item = &'s Literal> + 's {
    let p = o(pred);
    pos.iter()
        .filter(move |po| po.predicate == p)
        .flat_map(|po| po.objects.iter())
        .filter_map(|t| match t {
            Term::Literal(l) => Some(l),
            _ => None,
        })
}

fn string_of(pos: &[PredicateObjects], pred: &str) -> Option<String> {
    literals(pos, pred).find_map(|l| match l {
        Literal::String(s) => Some(s.clone()),
        _ => None,
    })
}

fn flag(subject: &ClassId, pos: &[PredicateObjects], pred: &str) -> Result<bool, TtlError> {
    let mut out = false;
    for l in literals(pos, pred) {
        match l {
            Literal::Boolean(b) => out |= b,
            _ => {
                return Err(TtlError::StructuralError(format!(
                    "{subject} osmo:{pred} must be a boolean"
                )))
            }
        }
    }
    Ok(out)
}

fn count_of(subject: &ClassId, pos: &[PredicateObjects]) -> Result<Option<u32>, TtlError> {
    literals(pos, "has_instance_count")
        .next()
        .map(|l| match l {
            Literal::Integer(n) => u32::try_from(*n).ok().filter(|n| *n > 0),
            _ => None,
        })
        .map(|n| n.ok_or_else(|| TtlError::StructuralError(format!("{subject} has an invalid instance count"))))
        .transpose()
}

fn read_aspect(section: &ClassId, pred: &ClassId, t: &Term) -> Result<Aspect, TtlError> {
    let Term::Blank(pos) = t else {
        return Err(TtlError::StructuralError(format!("{section} {pred} must be an anonymous aspect")));
    };
    let class = pos
        .iter()
        .filter(|po| po.predicate == rdf_type())
        .flat_map(|po| po.objects.iter())
        .find_map(|t| match t {
            Term::Name(c) => Some(c.clone()),
            _ => None,
        })
        .or_else(|| {
            pred.local_name()
                .strip_prefix("has_")
                .map(o)
                .filter(|c| aspect_spec(c).is_some())
        })
        .ok_or_else(|| TtlError::StructuralError(format!("aspect under {section} has no class")))?;
    let object = pos
        .iter()
        .filter(|po| po.predicate == o("has_aspect_object_content"))
        .flat_map(|po| po.objects.iter())
        .next()
        .map(|t| match t {
            Term::Name(i) => Ok(ObjectContent::Individual(i.clone())),
            Term::Literal(Literal::String(s)) | Term::Literal(Literal::ExternalRef(s)) => Ok(ObjectContent::External(s.clone())),
            Term::Blank(inner) => inner
                .iter()
                .filter(|po| po.predicate == rdf_type())
                .flat_map(|po| po.objects.iter())
                .find_map(|t| match t {
                    Term::Name(c) => Some(ObjectContent::Class(c.clone())),
                    _ => None,
                })
                .ok_or_else(|| TtlError::StructuralError(format!("untyped object content under {section}"))),
            Term::Literal(_) => Err(TtlError::StructuralError(format!("object content under {section} must be a string"))),
        })
        .transpose()?;
    Ok(Aspect {
        class,
        text: string_of(pos, "has_aspect_text_content"),
        object,
    })
}

fn read_value(subject: &ClassId, t: &Term) -> Result<LogicalValue, TtlError> {
    let Term::Blank(pos) = t else {
        return Err(TtlError::StructuralError(format!("{subject} osmo:has_value must be anonymous")));
    };
    if let Some(l) = literals(pos, "has_scalar_value").next() {
        let value = match l {
            Literal::Real(f) => *f,
            Literal::Integer(i) => *i as f64,
            _ => return Err(TtlError::StructuralError(format!("{subject} has a non-numeric scalar value"))),
        };
        return Ok(LogicalValue::Scalar {
            value,
            unit: string_of(pos, "has_unit"),
        });
    }
    if let Some(v) = string_of(pos, "has_vector_value") {
        let xs = v
            .split_whitespace()
            .map(|x| x.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| TtlError::StructuralError(format!("{subject} has a malformed vector value")))?;
        return Ok(LogicalValue::Vector(xs));
    }
    string_of(pos, "has_string_value")
        .map(LogicalValue::Text)
        .ok_or_else(|| TtlError::StructuralError(format!("{subject} has an empty value")))
}

/// Rebuilds a workflow from its OSMO description.
///
/// The document is first checked against `vocab`; structural problems that
/// the workflow model cannot represent are reported as `StructuralError`.
/// Everything else is left for `validate_workflow`.
pub fn triples_to_workflow(doc: &TtlDocument, vocab: &VocabularyStore) -> Result<SimulationWorkflow, TtlError> {
    doc_to_store(doc, vocab)?;
    let canonical = doc.canonical();
    let reader = Reader {
        statements: canonical.statements.iter().map(|s| (&s.subject, s)).collect(),
    };
    let check_local = |st: &Statement| {
        if st.subject.prefix().is_empty() {
            Ok(st.subject.local_name().to_string())
        } else {
            Err(TtlError::StructuralError(format!("workflow entity {} must use the local prefix", st.subject)))
        }
    };

    let roots = reader.typed("simulation_workflow");
    if roots.len() > 1 {
        return Err(TtlError::StructuralError("more than one simulation_workflow".into()));
    }
    let mut wf = SimulationWorkflow::new(&match roots.first() {
        Some(st) => check_local(st)?,
        None => "workflow".to_string(),
    });

    for st in reader.typed("logical_variable") {
        let id = check_local(st)?;
        let name = st
            .objects(&rdfs_label())
            .find_map(|t| match t {
                Term::Literal(Literal::String(s)) => Some(s.clone()),
                _ => None,
            })
            .unwrap_or_else(|| id.clone());
        let value = st.objects(&o("has_value")).next().map(|t| read_value(&st.subject, t)).transpose()?;
        wf.add_variable_as(&id, &name, value).map_err(structural)?;
    }

    let mut section_stmts = Vec::new();
    for kind in SectionKind::ALL {
        for st in reader.typed(kind.class().local_name()) {
            let id = check_local(st)?;
            let mut aspects = Vec::new();
            for po in &st.predicates {
                let is_aspect = po.predicate == o("has_aspect")
                    || po
                        .predicate
                        .local_name()
                        .strip_prefix("has_")
                        .is_some_and(|c| po.predicate.prefix() == "osmo" && aspect_spec(&o(c)).is_some());
                if is_aspect {
                    for t in &po.objects {
                        aspects.push(read_aspect(&st.subject, &po.predicate, t)?);
                    }
                }
            }
            wf.add_section_as(&id, kind, aspects).map_err(structural)?;
            for v in local_refs(st, "has_internal_lv")? {
                wf.add_internal_variable(&id, &v).map_err(structural)?;
            }
            for v in local_refs(st, "has_logical_io")? {
                wf.add_logical_io(&id, &v).map_err(structural)?;
            }
            section_stmts.push((id, st));
        }
    }

    for st in reader.typed("logical_resource") {
        let id = check_local(st)?;
        let vars = local_refs(st, "has_stored_variable")?;
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let interactive = flag(&st.subject, &st.predicates, "is_interactive")?;
        wf.add_resource_as(&id, interactive, &refs).map_err(structural)?;
    }

    for st in reader.typed("logical_access") {
        let id = check_local(st)?;
        let point = single_ref(st, "has_access_point")?;
        let resource = single_ref(st, "has_resource")?;
        let carried = local_refs(st, "has_carried_variable")?;
        let refs: Vec<&str> = carried.iter().map(String::as_str).collect();
        let mut flags = AccessFlags::none();
        for (prop, _, _) in AccessFlags::none().entries() {
            flags.set(prop, flag(&st.subject, &st.predicates, prop)?);
        }
        wf.add_access_as(&id, &point, &resource, flags, &refs).map_err(structural)?;
    }

    let mut graph_stmts: BTreeMap<Id, (&Statement, GraphKind, bool)> = BTreeMap::new();
    for (class, kind, node) in [
        ("concrete_graph", GraphKind::Concrete, false),
        ("workflow_node", GraphKind::Concrete, true),
        ("logical_node", GraphKind::Concrete, true),
        ("virtual_graph", GraphKind::Virtual, false),
    ] {
        for st in reader.typed(class) {
            let id = check_local(st)?;
            let entry = graph_stmts.entry(id.clone()).or_insert((st, kind, node));
            if entry.1 != kind {
                return Err(TtlError::StructuralError(format!("{} is both concrete and virtual", st.subject)));
            }
            entry.2 |= node;
        }
    }
    let mut contained_in: BTreeMap<ResourceRef, Id> = BTreeMap::new();
    for (id, (st, kind, node)) in &graph_stmts {
        if wf.contains_id(id) {
            return Err(structural(WorkflowError::DuplicateId(id.clone())));
        }
        let mut contained = Vec::new();
        for c in local_refs(st, "contains")? {
            let r = if wf.sections.contains_key(&c) {
                ResourceRef::Section(c)
            } else if wf.resources.contains_key(&c) {
                ResourceRef::Logical(c)
            } else if graph_stmts.contains_key(&c) {
                ResourceRef::Graph(c)
            } else {
                return Err(structural(WorkflowError::UnknownRef(c)));
            };
            if let Some(first) = contained_in.insert(r.clone(), id.clone()) {
                return Err(structural(WorkflowError::DoubleContainment {
                    resource: r,
                    container: first,
                }));
            }
            contained.push(r);
        }
        if *node && contained.len() != 1 {
            return Err(structural(WorkflowError::NodeCardinalityViolation {
                graph: id.clone(),
                count: contained.len(),
            }));
        }
        if *kind == GraphKind::Virtual && !contained.is_empty() {
            return Err(TtlError::StructuralError(format!("virtual graph {id} contains resources directly")));
        }
        let multiplicity = match string_of(&st.predicates, "has_execution_mode").as_deref() {
            None => None,
            Some("concurrent") => Some(Multiplicity::ConcurrentInstances {
                count: count_of(&st.subject, &st.predicates)?,
            }),
            Some("iterative") => Some(Multiplicity::IterativeLoop {
                count: count_of(&st.subject, &st.predicates)?,
                termination: string_of(&st.predicates, "has_termination_condition"),
            }),
            Some(other) => {
                return Err(TtlError::StructuralError(format!("{id} has unknown execution mode `{other}`")))
            }
        };
        wf.graphs.insert(
            id.clone(),
            WorkflowGraph {
                id: id.clone(),
                kind: *kind,
                declared_node: *node,
                contained,
                instantiated_by: None,
                multiplicity,
                starting_points: local_refs(st, "has_starting_point")?.into_iter().collect(),
                terminal_points: local_refs(st, "has_terminal_point")?.into_iter().collect(),
            },
        );
    }
    for (id, (st, _, _)) in &graph_stmts {
        for v in local_refs(st, "instantiates")? {
            let target = wf
                .graphs
                .get_mut(&v)
                .filter(|g| g.kind == GraphKind::Virtual)
                .ok_or_else(|| TtlError::StructuralError(format!("{id} instantiates `{v}`, which is not a virtual graph")))?;
            if target.instantiated_by.replace(id.clone()).is_some() {
                return Err(TtlError::StructuralError(format!("virtual graph {v} is instantiated twice")));
            }
        }
    }
    for (id, (st, _, _)) in &graph_stmts {
        for b in local_refs(st, "is_direct_cause_of")? {
            wf.link(id, &b).map_err(structural)?;
        }
        for b in local_refs(st, "is_coupled_with")? {
            wf.couple(id, &b).map_err(structural)?;
        }
    }
    for (id, st) in &section_stmts {
        for g in local_refs(st, "applies_to")? {
            wf.applies_to(id, &g).map_err(structural)?;
        }
    }
    if let Some(st) = roots.first() {
        let outcomes: BTreeSet<Id> = local_refs(st, "has_simulation_outcome")?.into_iter().collect();
        for n in &outcomes {
            if !wf.graphs.contains_key(n) {
                return Err(structural(WorkflowError::UnknownRef(n.clone())));
            }
        }
        wf.simulation_outcome = outcomes;
    }
    Ok(wf)
}
