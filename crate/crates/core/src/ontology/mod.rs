//! In-memory vocabulary store for the OSMO and VISO ontologies.
//!
//! The store holds a class hierarchy (multi-parent, acyclic), relation
//! definitions with domain and range, typed individuals and a multiset of
//! asserted triples. Reasoning is limited to the reflexive-transitive
//! subclass closure and domain/range checks.

mod builtin;
mod pe_types;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::ValidationReport;

pub use builtin::{
    aspect_spec, aspects_for, load_builtin_vocabulary, AspectSpec, SectionKind, ASPECTS,
    STANDARD_PREFIXES,
};
pub use pe_types::{pe_type_table, Granularity, ModelType, PeTypeInfo};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OntologyError {
    #[error("class {0} is already registered")]
    DuplicateClass(ClassId),
    #[error("relation {0} is already registered")]
    DuplicateRelation(ClassId),
    #[error("parent class {0} is not registered")]
    UnknownParent(ClassId),
    #[error("subclass edge {0} -> {1} would create a cycle")]
    CycleDetected(ClassId, ClassId),
    #[error("class {0} is not registered")]
    UnknownClass(ClassId),
    #[error("predicate {0} is not a registered relation")]
    UnknownPredicate(ClassId),
    #[error("subject {0} is neither a declared individual nor a class")]
    UnknownSubject(ClassId),
    #[error("prefix `{0}` is not registered")]
    UnknownPrefix(String),
    #[error("unknown PE type `{0}`")]
    UnknownPeType(String),
    #[error("{0} must be an individual for this assertion")]
    NotAnIndividual(ClassId),
    #[error("invalid relation definition {0}: {1}")]
    InvalidRelation(ClassId, &'static str),
    #[error("malformed prefixed name `{0}`")]
    MalformedName(String),
}

/// Prefixed name of a class, relation or individual, e.g. `osmo:solver`
/// or `:SX` (empty prefix = local namespace).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId {
    prefix: String,
    local: String,
}

impl ClassId {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
            local: local.into(),
        }
    }

    pub fn osmo(local: &str) -> Self {
        Self::new("osmo", local)
    }

    pub fn viso(local: &str) -> Self {
        Self::new("viso", local)
    }

    pub fn local(local: &str) -> Self {
        Self::new("", local)
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local_name(&self) -> &str {
        &self.local
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

impl FromStr for ClassId {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, local) = s
            .split_once(':')
            .ok_or_else(|| OntologyError::MalformedName(s.to_string()))?;
        if local.is_empty() {
            return Err(OntologyError::MalformedName(s.to_string()));
        }
        Ok(ClassId::new(prefix, local))
    }
}

impl Serialize for ClassId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LiteralKind {
    String,
    Boolean,
    Integer,
    Real,
    DateTime,
    Quantity,
    ExternalRef,
}

/// Typed literal value. Unit-bearing quantities are plain (value, unit)
/// pairs; references into ontologies not loaded here are opaque IRIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Literal {
    String(String),
    Boolean(bool),
    Integer(i64),
    Real(f64),
    DateTime(chrono::NaiveDateTime),
    Quantity { value: f64, unit: String },
    ExternalRef(String),
}

impl Literal {
    pub fn kind(&self) -> LiteralKind {
        match self {
            Literal::String(_) => LiteralKind::String,
            Literal::Boolean(_) => LiteralKind::Boolean,
            Literal::Integer(_) => LiteralKind::Integer,
            Literal::Real(_) => LiteralKind::Real,
            Literal::DateTime(_) => LiteralKind::DateTime,
            Literal::Quantity { .. } => LiteralKind::Quantity,
            Literal::ExternalRef(_) => LiteralKind::ExternalRef,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    Entity(ClassId),
    Literal(Literal),
}

impl From<ClassId> for Object {
    fn from(id: ClassId) -> Self {
        Object::Entity(id)
    }
}

impl From<Literal> for Object {
    fn from(l: Literal) -> Self {
        Object::Literal(l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub subject: ClassId,
    pub predicate: ClassId,
    pub object: Object,
}

/// Admissible objects of a relation: individuals of any of `classes`
/// (by subclass closure) or literals of any of `literals`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Range {
    pub classes: BTreeSet<ClassId>,
    pub literals: BTreeSet<LiteralKind>,
}

impl Range {
    pub fn classes<I: IntoIterator<Item = ClassId>>(ids: I) -> Self {
        Self {
            classes: ids.into_iter().collect(),
            literals: BTreeSet::new(),
        }
    }

    pub fn literal(kind: LiteralKind) -> Self {
        Self {
            classes: BTreeSet::new(),
            literals: [kind].into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.literals.is_empty()
    }

    pub fn is_datatype(&self) -> bool {
        self.classes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDef {
    pub id: ClassId,
    pub domain: BTreeSet<ClassId>,
    pub range: Range,
    pub symmetric: bool,
    pub functional: bool,
}

impl RelationDef {
    pub fn object(id: ClassId, domain: &[ClassId], range: &[ClassId]) -> Self {
        Self {
            id,
            domain: domain.iter().cloned().collect(),
            range: Range::classes(range.iter().cloned()),
            symmetric: false,
            functional: false,
        }
    }

    pub fn datatype(id: ClassId, domain: &[ClassId], kind: LiteralKind) -> Self {
        Self {
            id,
            domain: domain.iter().cloned().collect(),
            range: Range::literal(kind),
            symmetric: false,
            functional: false,
        }
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn functional(mut self) -> Self {
        self.functional = true;
        self
    }
}

pub fn rdf_type() -> ClassId {
    ClassId::new("rdf", "type")
}

pub fn rdfs_subclass_of() -> ClassId {
    ClassId::new("rdfs", "subClassOf")
}

pub fn rdfs_label() -> ClassId {
    ClassId::new("rdfs", "label")
}

pub fn owl_thing() -> ClassId {
    ClassId::new("owl", "Thing")
}

pub fn is_builtin_predicate(p: &ClassId) -> bool {
    *p == rdf_type() || *p == rdfs_subclass_of() || *p == rdfs_label()
}

pub fn twin_relation() -> ClassId {
    ClassId::viso("is_modelling_twin_of")
}

#[derive(Debug, Clone, Default)]
pub struct VocabularyStore {
    prefixes: BTreeMap<String, String>,
    /// class -> direct parents
    classes: BTreeMap<ClassId, BTreeSet<ClassId>>,
    relations: BTreeMap<ClassId, RelationDef>,
    /// individual -> declared types
    individuals: BTreeMap<ClassId, BTreeSet<ClassId>>,
    triples: Vec<Triple>,
    twins: BTreeSet<(ClassId, ClassId)>,
    pe_types: BTreeMap<String, PeTypeInfo>,
}

impl VocabularyStore {
    /// Store with the standard prefixes and `owl:Thing`, but no vocabulary.
    pub fn empty() -> Self {
        let mut store = Self::default();
        for (p, iri) in STANDARD_PREFIXES {
            store.prefixes.insert(p.to_string(), iri.to_string());
        }
        store.classes.insert(owl_thing(), BTreeSet::new());
        store
    }

    pub fn register_prefix(&mut self, prefix: &str, iri: &str) {
        self.prefixes.insert(prefix.to_string(), iri.to_string());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    fn check_prefix(&self, id: &ClassId) -> Result<(), OntologyError> {
        if self.prefixes.contains_key(id.prefix()) {
            Ok(())
        } else {
            Err(OntologyError::UnknownPrefix(id.prefix().to_string()))
        }
    }

    pub fn register_class(&mut self, id: ClassId, parents: &[ClassId]) -> Result<(), OntologyError> {
        self.check_prefix(&id)?;
        if self.classes.contains_key(&id) || self.relations.contains_key(&id) {
            return Err(OntologyError::DuplicateClass(id));
        }
        if let Some(p) = parents.iter().find(|p| **p == id) {
            return Err(OntologyError::CycleDetected(id.clone(), p.clone()));
        }
        if let Some(p) = parents.iter().find(|p| !self.classes.contains_key(*p)) {
            return Err(OntologyError::UnknownParent(p.clone()));
        }
        self.classes.insert(id, parents.iter().cloned().collect());
        Ok(())
    }

    /// Adds `child rdfs:subClassOf parent` between already registered classes.
    pub fn add_subclass_edge(&mut self, child: &ClassId, parent: &ClassId) -> Result<(), OntologyError> {
        if !self.classes.contains_key(child) {
            return Err(OntologyError::UnknownClass(child.clone()));
        }
        if !self.classes.contains_key(parent) {
            return Err(OntologyError::UnknownParent(parent.clone()));
        }
        if self.is_subclass_of(parent, child)? {
            return Err(OntologyError::CycleDetected(child.clone(), parent.clone()));
        }
        self.classes.get_mut(child).expect("checked").insert(parent.clone());
        Ok(())
    }

    pub fn register_relation(&mut self, def: RelationDef) -> Result<(), OntologyError> {
        self.check_prefix(&def.id)?;
        if self.relations.contains_key(&def.id) || self.classes.contains_key(&def.id) {
            return Err(OntologyError::DuplicateRelation(def.id));
        }
        if def.domain.is_empty() {
            return Err(OntologyError::InvalidRelation(def.id, "empty domain"));
        }
        if def.range.is_empty() {
            return Err(OntologyError::InvalidRelation(def.id, "empty range"));
        }
        if def.symmetric && (def.domain != def.range.classes || !def.range.literals.is_empty()) {
            return Err(OntologyError::InvalidRelation(def.id, "symmetric relation needs domain = range"));
        }
        for c in def.domain.iter().chain(def.range.classes.iter()) {
            if !self.classes.contains_key(c) {
                return Err(OntologyError::UnknownClass(c.clone()));
            }
        }
        self.relations.insert(def.id.clone(), def);
        Ok(())
    }

    /// Declares `id` as an individual of the given (registered) classes.
    pub fn declare_individual(&mut self, id: ClassId, types: &[ClassId]) -> Result<(), OntologyError> {
        self.check_prefix(&id)?;
        if self.classes.contains_key(&id) || self.relations.contains_key(&id) {
            return Err(OntologyError::NotAnIndividual(id));
        }
        if let Some(t) = types.iter().find(|t| !self.classes.contains_key(*t)) {
            return Err(OntologyError::UnknownClass(t.clone()));
        }
        self.individuals.entry(id).or_default().extend(types.iter().cloned());
        Ok(())
    }

    pub fn assert_triple(
        &mut self,
        subject: ClassId,
        predicate: ClassId,
        object: impl Into<Object>,
    ) -> Result<(), OntologyError> {
        let object = object.into();
        if predicate == rdf_type() {
            let Object::Entity(class) = &object else {
                return Err(OntologyError::UnknownClass(ClassId::local("<literal>")));
            };
            self.declare_individual(subject.clone(), std::slice::from_ref(class))?;
            self.triples.push(Triple { subject, predicate, object });
            return Ok(());
        }
        if predicate == rdfs_subclass_of() {
            let Object::Entity(parent) = &object else {
                return Err(OntologyError::UnknownParent(ClassId::local("<literal>")));
            };
            self.add_subclass_edge(&subject, parent)?;
            self.triples.push(Triple { subject, predicate, object });
            return Ok(());
        }
        let symmetric = if predicate == rdfs_label() {
            false
        } else {
            self.relations
                .get(&predicate)
                .ok_or_else(|| OntologyError::UnknownPredicate(predicate.clone()))?
                .symmetric
        };
        if !self.individuals.contains_key(&subject) && !self.classes.contains_key(&subject) {
            return Err(OntologyError::UnknownSubject(subject));
        }
        if predicate == twin_relation() {
            let Object::Entity(other) = &object else {
                return Err(OntologyError::NotAnIndividual(subject));
            };
            if !self.individuals.contains_key(&subject) {
                return Err(OntologyError::NotAnIndividual(subject));
            }
            if !self.individuals.contains_key(other) {
                return Err(OntologyError::NotAnIndividual(other.clone()));
            }
            self.twins.insert((subject.clone(), other.clone()));
            self.twins.insert((other.clone(), subject.clone()));
        }
        if symmetric {
            if let Object::Entity(o) = &object {
                if *o != subject && !self.query(o, &predicate, &Object::Entity(subject.clone())) {
                    self.triples.push(Triple {
                        subject: o.clone(),
                        predicate: predicate.clone(),
                        object: Object::Entity(subject.clone()),
                    });
                }
            }
        }
        self.triples.push(Triple { subject, predicate, object });
        Ok(())
    }

    pub fn query(&self, subject: &ClassId, predicate: &ClassId, object: &Object) -> bool {
        self.triples
            .iter()
            .any(|t| t.subject == *subject && t.predicate == *predicate && t.object == *object)
    }

    pub fn objects<'a>(&'a self, subject: &'a ClassId, predicate: &'a ClassId) -> impl Iterator<Item = &'a Object> + 'a {
        self.triples
            .iter()
            .filter(move |t| t.subject == *subject && t.predicate == *predicate)
            .map(|t| &t.object)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn has_class(&self, id: &ClassId) -> bool {
        self.classes.contains_key(id)
    }

    pub fn relation(&self, id: &ClassId) -> Option<&RelationDef> {
        self.relations.get(id)
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationDef> {
        self.relations.values()
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassId> {
        self.classes.keys()
    }

    pub fn parents(&self, id: &ClassId) -> Option<&BTreeSet<ClassId>> {
        self.classes.get(id)
    }

    pub fn types_of(&self, individual: &ClassId) -> Option<&BTreeSet<ClassId>> {
        self.individuals.get(individual)
    }

    pub fn individuals(&self) -> impl Iterator<Item = (&ClassId, &BTreeSet<ClassId>)> {
        self.individuals.iter()
    }

    pub fn are_twins(&self, a: &ClassId, b: &ClassId) -> bool {
        self.twins.contains(&(a.clone(), b.clone()))
    }

    /// All ancestors of `id` including itself.
    pub fn ancestors(&self, id: &ClassId) -> Result<BTreeSet<ClassId>, OntologyError> {
        if !self.classes.contains_key(id) {
            return Err(OntologyError::UnknownClass(id.clone()));
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([id.clone()]);
        while let Some(c) = queue.pop_front() {
            if !seen.insert(c.clone()) {
                continue;
            }
            if let Some(ps) = self.classes.get(&c) {
                queue.extend(ps.iter().cloned());
            }
        }
        Ok(seen)
    }

    /// Reflexive-transitive subclass test. Every class is below `owl:Thing`.
    pub fn is_subclass_of(&self, a: &ClassId, b: &ClassId) -> Result<bool, OntologyError> {
        if !self.classes.contains_key(b) {
            return Err(OntologyError::UnknownClass(b.clone()));
        }
        let ancestors = self.ancestors(a)?;
        Ok(*b == owl_thing() || ancestors.contains(b))
    }

    /// Registered classes strictly below `b`.
    pub fn subclasses_of(&self, b: &ClassId) -> Vec<ClassId> {
        self.classes
            .keys()
            .filter(|c| *c != b && self.is_subclass_of(c, b).unwrap_or(false))
            .cloned()
            .collect()
    }

    pub fn direct_subclasses_of(&self, b: &ClassId) -> Vec<ClassId> {
        self.classes
            .iter()
            .filter(|(_, ps)| ps.contains(b))
            .map(|(c, _)| c.clone())
            .collect()
    }

    /// Whether an individual with the given declared types falls under any
    /// of `targets`.
    fn types_within(&self, types: &BTreeSet<ClassId>, targets: &BTreeSet<ClassId>) -> bool {
        types
            .iter()
            .any(|t| targets.iter().any(|d| self.is_subclass_of(t, d).unwrap_or(false)))
    }

    pub fn pe_type_lookup(&self, pe_type_id: &str) -> Result<&PeTypeInfo, OntologyError> {
        if !pe_types::is_well_formed(pe_type_id) {
            return Err(OntologyError::UnknownPeType(pe_type_id.to_string()));
        }
        self.pe_types
            .get(pe_type_id)
            .ok_or_else(|| OntologyError::UnknownPeType(pe_type_id.to_string()))
    }

    pub fn pe_types(&self) -> impl Iterator<Item = &PeTypeInfo> {
        self.pe_types.values()
    }

    pub(crate) fn insert_pe_type(&mut self, info: PeTypeInfo) {
        self.pe_types.insert(info.pe_type_id.clone(), info);
    }

    /// Checks every asserted triple against the domain and range of its
    /// predicate. Untyped subjects/objects produce warnings only.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let mut functional_counts: BTreeMap<(&ClassId, &ClassId), usize> = BTreeMap::new();
        for t in &self.triples {
            if t.predicate == rdf_type() || t.predicate == rdfs_subclass_of() {
                continue;
            }
            if t.predicate == rdfs_label() {
                if !matches!(t.object, Object::Literal(Literal::String(_))) {
                    report.error("range", t.subject.to_string(), "rdfs:label expects a string literal");
                }
                continue;
            }
            let Some(rel) = self.relations.get(&t.predicate) else {
                report.error("unknown-predicate", t.subject.to_string(), format!("{} is not registered", t.predicate));
                continue;
            };
            if rel.functional {
                *functional_counts.entry((&t.subject, &t.predicate)).or_default() += 1;
            }
            self.check_domain(t, rel, &mut report);
            self.check_range(t, rel, &mut report);
            if rel.symmetric {
                if let Object::Entity(o) = &t.object {
                    if !self.query(o, &t.predicate, &Object::Entity(t.subject.clone())) {
                        report.error(
                            "symmetry",
                            t.subject.to_string(),
                            format!("{} {} {} is not mirrored", t.subject, t.predicate, o),
                        );
                    }
                }
            }
        }
        for ((s, p), n) in functional_counts {
            if n > 1 {
                report.error("functional", s.to_string(), format!("{p} is functional but has {n} values"));
            }
        }
        report
    }

    fn check_domain(&self, t: &Triple, rel: &RelationDef, report: &mut ValidationReport) {
        if rel.domain.contains(&owl_thing()) {
            return;
        }
        if self.classes.contains_key(&t.subject) {
            let ok = rel.domain.iter().any(|d| self.is_subclass_of(&t.subject, d).unwrap_or(false));
            if !ok {
                report.error("domain", t.subject.to_string(), domain_message(t, rel));
            }
            return;
        }
        match self.individuals.get(&t.subject) {
            Some(types) if !types.is_empty() => {
                if !self.types_within(types, &rel.domain) {
                    report.error("domain", t.subject.to_string(), domain_message(t, rel));
                }
            }
            _ => report.warning(
                "untyped-subject",
                t.subject.to_string(),
                format!("subject of {} has no declared type", t.predicate),
            ),
        }
    }

    fn check_range(&self, t: &Triple, rel: &RelationDef, report: &mut ValidationReport) {
        match &t.object {
            Object::Literal(lit) => {
                if !rel.range.literals.contains(&lit.kind()) {
                    report.error(
                        "range",
                        t.subject.to_string(),
                        format!("{} does not accept a {:?} literal", t.predicate, lit.kind()),
                    );
                }
            }
            Object::Entity(o) => {
                if rel.range.classes.is_empty() {
                    report.error("range", t.subject.to_string(), format!("{} expects a literal, got {o}", t.predicate));
                    return;
                }
                if rel.range.classes.contains(&owl_thing()) {
                    return;
                }
                if self.classes.contains_key(o) {
                    let ok = rel.range.classes.iter().any(|r| self.is_subclass_of(o, r).unwrap_or(false));
                    if !ok {
                        report.error("range", t.subject.to_string(), range_message(t, rel, o));
                    }
                    return;
                }
                match self.individuals.get(o) {
                    Some(types) if !types.is_empty() => {
                        if !self.types_within(types, &rel.range.classes) {
                            report.error("range", t.subject.to_string(), range_message(t, rel, o));
                        }
                    }
                    _ => report.warning(
                        "untyped-object",
                        t.subject.to_string(),
                        format!("object {o} of {} has no declared type", t.predicate),
                    ),
                }
            }
        }
    }
}

fn join(ids: &BTreeSet<ClassId>) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(" or ")
}

fn domain_message(t: &Triple, rel: &RelationDef) -> String {
    format!("domain of {} is {}; subject {} is outside it", rel.id, join(&rel.domain), t.subject)
}

fn range_message(t: &Triple, rel: &RelationDef, o: &ClassId) -> String {
    format!("range of {} is {}; object {o} is outside it", t.predicate, join(&rel.range.classes))
}
