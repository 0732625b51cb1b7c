//! LDT workflow graphs: sections with MODA aspects, logical resources and
//! accesses, causal and coupling edges, and concrete/virtual graph nesting.
//!
//! Entities live in per-kind tables keyed by string ids that share one
//! namespace, so every id can become a `:local` name on serialization.
//! Tables are ordered maps; iteration order is by id everywhere.

mod catalog;
mod dot;
mod order;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ontology::{aspect_spec, ClassId, SectionKind};

pub use catalog::{ambiguity_b, ambiguity_c, eos_workflow, metadynamics_solver};
pub use dot::to_dot;
pub use order::{classify_processor, expand_virtual, topo_order, ProcessorRole};
pub use validate::validate_workflow;

pub type Id = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkflowError {
    #[error("unknown reference `{0}`")]
    UnknownRef(Id),
    #[error("id `{0}` is already in use")]
    DuplicateId(Id),
    #[error("aspect {aspect} is not admissible for a {kind:?} section")]
    InvalidAspectForKind { aspect: ClassId, kind: SectionKind },
    #[error("aspect {0} may occur at most once per section")]
    DuplicateFunctionalAspect(ClassId),
    #[error("aspect {0} has neither text nor object content")]
    EmptyAspect(ClassId),
    #[error("workflow node `{graph}` must contain exactly one resource, got {count}")]
    NodeCardinalityViolation { graph: Id, count: usize },
    #[error("resource {resource} is already contained in `{container}`")]
    DoubleContainment { resource: ResourceRef, container: Id },
    #[error("edge from `{0}` to itself")]
    SelfEdge(Id),
    #[error("`{0}` is not a virtual graph")]
    NotVirtual(Id),
    #[error("`{0}` is not a concrete graph")]
    NotConcrete(Id),
    #[error("instance count must be positive")]
    ZeroCount,
    #[error("`{0}` is not a processor")]
    WrongKind(Id),
    #[error("causal cycle among {0:?}")]
    CyclicDependency(Vec<Id>),
}

/// Content slot of an aspect pointing to something outside the text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ObjectContent {
    /// An anonymous instance of the class, e.g. `[ a viso-am:sampling_algorithm ]`.
    Class(ClassId),
    /// A named individual such as `osmo:CONTINUUM`.
    Individual(ClassId),
    /// Opaque IRI into an ontology that is not loaded.
    External(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aspect {
    pub class: ClassId,
    pub text: Option<String>,
    pub object: Option<ObjectContent>,
}

impl Aspect {
    pub fn text(class: &str, text: &str) -> Self {
        Aspect {
            class: ClassId::osmo(class),
            text: Some(text.to_string()),
            object: None,
        }
    }

    pub fn object(class: &str, object: ObjectContent) -> Self {
        Aspect {
            class: ClassId::osmo(class),
            text: None,
            object: Some(object),
        }
    }

    pub fn with_text(mut self, text: &str) -> Self {
        self.text = Some(text.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub id: Id,
    pub kind: SectionKind,
    pub aspects: Vec<Aspect>,
    pub internal_variables: Vec<Id>,
    pub logical_io: Vec<Id>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogicalValue {
    Scalar { value: f64, unit: Option<String> },
    Vector(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalVariable {
    pub id: Id,
    pub name: String,
    pub value: Option<LogicalValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalResource {
    pub id: Id,
    pub interactive: bool,
    pub stored_variables: Vec<Id>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessFlags {
    pub reads_initially: bool,
    pub reads_parameters: bool,
    pub writes_finally: bool,
    pub reads_during_execution: bool,
    pub writes_during_execution: bool,
}

impl AccessFlags {
    pub const R_INIT: AccessFlags = AccessFlags::none().with(0);
    pub const R_PARAM: AccessFlags = AccessFlags::none().with(1);
    pub const W_FIN: AccessFlags = AccessFlags::none().with(2);
    pub const R_EXEC: AccessFlags = AccessFlags::none().with(3);
    pub const W_EXEC: AccessFlags = AccessFlags::none().with(4);

    pub const fn none() -> Self {
        AccessFlags {
            reads_initially: false,
            reads_parameters: false,
            writes_finally: false,
            reads_during_execution: false,
            writes_during_execution: false,
        }
    }

    const fn with(mut self, i: usize) -> Self {
        match i {
            0 => self.reads_initially = true,
            1 => self.reads_parameters = true,
            2 => self.writes_finally = true,
            3 => self.reads_during_execution = true,
            _ => self.writes_during_execution = true,
        }
        self
    }

    pub fn union(self, o: AccessFlags) -> Self {
        AccessFlags {
            reads_initially: self.reads_initially || o.reads_initially,
            reads_parameters: self.reads_parameters || o.reads_parameters,
            writes_finally: self.writes_finally || o.writes_finally,
            reads_during_execution: self.reads_during_execution || o.reads_during_execution,
            writes_during_execution: self.writes_during_execution || o.writes_during_execution,
        }
    }

    /// Flags in canonical order, as (data property local name, short label, value).
    pub fn entries(&self) -> [(&'static str, &'static str, bool); 5] {
        [
            ("reads_initially", "r_init", self.reads_initially),
            ("reads_parameters", "r_param", self.reads_parameters),
            ("writes_finally", "w_fin", self.writes_finally),
            ("reads_during_execution", "r_exec", self.reads_during_execution),
            ("writes_during_execution", "w_exec", self.writes_during_execution),
        ]
    }

    pub fn set(&mut self, property: &str, value: bool) -> bool {
        let slot = match property {
            "reads_initially" => &mut self.reads_initially,
            "reads_parameters" => &mut self.reads_parameters,
            "writes_finally" => &mut self.writes_finally,
            "reads_during_execution" => &mut self.reads_during_execution,
            "writes_during_execution" => &mut self.writes_during_execution,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn is_empty(&self) -> bool {
        self.entries().iter().all(|e| !e.2)
    }

    pub fn reads(&self) -> bool {
        self.reads_initially || self.reads_parameters || self.reads_during_execution
    }

    pub fn writes(&self) -> bool {
        self.writes_finally || self.writes_during_execution
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalAccess {
    pub id: Id,
    pub access_point: Id,
    pub resource: Id,
    pub carried_variables: Vec<Id>,
    pub flags: AccessFlags,
}

/// Anything a concrete graph can contain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResourceRef {
    Section(Id),
    Logical(Id),
    Graph(Id),
}

impl ResourceRef {
    pub fn id(&self) -> &Id {
        match self {
            ResourceRef::Section(id) | ResourceRef::Logical(id) | ResourceRef::Graph(id) => id,
        }
    }
}

impl fmt::Display for ResourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceRef::Section(id) => write!(f, "section `{id}`"),
            ResourceRef::Logical(id) => write!(f, "logical resource `{id}`"),
            ResourceRef::Graph(id) => write!(f, "graph `{id}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Multiplicity {
    ConcurrentInstances { count: Option<u32> },
    IterativeLoop { count: Option<u32>, termination: Option<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Concrete,
    Virtual,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowGraph {
    pub id: Id,
    pub kind: GraphKind,
    /// Declared as a workflow node; checked against the node law.
    pub declared_node: bool,
    pub contained: Vec<ResourceRef>,
    pub instantiated_by: Option<Id>,
    pub multiplicity: Option<Multiplicity>,
    pub starting_points: BTreeSet<Id>,
    pub terminal_points: BTreeSet<Id>,
}

impl WorkflowGraph {
    /// A concrete graph with exactly one contained resource.
    pub fn is_node(&self) -> bool {
        self.kind == GraphKind::Concrete && self.contained.len() == 1
    }
}

/// How a graph is declared through [`SimulationWorkflow::add_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphDecl {
    Concrete(Vec<ResourceRef>),
    Node(ResourceRef),
    Virtual { instantiated_by: Id, multiplicity: Multiplicity },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationWorkflow {
    /// Name of the `osmo:simulation_workflow` individual.
    pub name: Id,
    pub sections: BTreeMap<Id, Section>,
    pub variables: BTreeMap<Id, LogicalVariable>,
    pub resources: BTreeMap<Id, LogicalResource>,
    pub accesses: BTreeMap<Id, LogicalAccess>,
    pub graphs: BTreeMap<Id, WorkflowGraph>,
    pub applies_to: BTreeSet<(Id, Id)>,
    pub causal_edges: BTreeSet<(Id, Id)>,
    /// Stored in both directions.
    pub coupling_edges: BTreeSet<(Id, Id)>,
    pub simulation_outcome: BTreeSet<Id>,
    counters: BTreeMap<&'static str, usize>,
}

impl Default for SimulationWorkflow {
    fn default() -> Self {
        Self::new("workflow")
    }
}

impl SimulationWorkflow {
    pub fn new(name: &str) -> Self {
        SimulationWorkflow {
            name: name.to_string(),
            sections: BTreeMap::new(),
            variables: BTreeMap::new(),
            resources: BTreeMap::new(),
            accesses: BTreeMap::new(),
            graphs: BTreeMap::new(),
            applies_to: BTreeSet::new(),
            causal_edges: BTreeSet::new(),
            coupling_edges: BTreeSet::new(),
            simulation_outcome: BTreeSet::new(),
            counters: BTreeMap::new(),
        }
    }

    pub fn contains_id(&self, id: &str) -> bool {
        id == self.name
            || self.sections.contains_key(id)
            || self.variables.contains_key(id)
            || self.resources.contains_key(id)
            || self.accesses.contains_key(id)
            || self.graphs.contains_key(id)
    }

    fn claim(&self, id: &str) -> Result<Id, WorkflowError> {
        if id.is_empty() || self.contains_id(id) {
            Err(WorkflowError::DuplicateId(id.to_string()))
        } else {
            Ok(id.to_string())
        }
    }

    pub(crate) fn fresh_id(&mut self, stem: &'static str) -> Id {
        loop {
            let n = self.counters.entry(stem).or_insert(0);
            *n += 1;
            let id = format!("{stem}{n}");
            if !self.contains_id(&id) {
                return id;
            }
        }
    }

    pub fn add_section(&mut self, kind: SectionKind, aspects: Vec<Aspect>) -> Result<Id, WorkflowError> {
        let stem = match kind {
            SectionKind::UseCase => "U",
            SectionKind::MaterialsModel => "M",
            SectionKind::Solver => "S",
            SectionKind::Processor => "P",
        };
        check_aspects(kind, &aspects)?;
        let id = self.fresh_id(stem);
        self.add_section_as(&id, kind, aspects)
    }

    pub fn add_section_as(&mut self, id: &str, kind: SectionKind, aspects: Vec<Aspect>) -> Result<Id, WorkflowError> {
        let id = self.claim(id)?;
        check_aspects(kind, &aspects)?;
        self.sections.insert(
            id.clone(),
            Section {
                id: id.clone(),
                kind,
                aspects,
                internal_variables: Vec::new(),
                logical_io: Vec::new(),
            },
        );
        Ok(id)
    }

    /// Records that `section` reads or writes `variable` (`has_logical_io`).
    pub fn add_logical_io(&mut self, section: &str, variable: &str) -> Result<(), WorkflowError> {
        self.section_variable(section, variable)?.logical_io.push(variable.to_string());
        Ok(())
    }

    /// Records a variable internal to `section` (`has_internal_lv`).
    pub fn add_internal_variable(&mut self, section: &str, variable: &str) -> Result<(), WorkflowError> {
        self.section_variable(section, variable)?
            .internal_variables
            .push(variable.to_string());
        Ok(())
    }

    fn section_variable(&mut self, section: &str, variable: &str) -> Result<&mut Section, WorkflowError> {
        if !self.variables.contains_key(variable) {
            return Err(WorkflowError::UnknownRef(variable.to_string()));
        }
        self.sections
            .get_mut(section)
            .ok_or_else(|| WorkflowError::UnknownRef(section.to_string()))
    }

    pub fn add_variable(&mut self, name: &str, value: Option<LogicalValue>) -> Id {
        let id = self.fresh_id("lv");
        self.variables.insert(
            id.clone(),
            LogicalVariable {
                id: id.clone(),
                name: name.to_string(),
                value,
            },
        );
        id
    }

    pub fn add_variable_as(&mut self, id: &str, name: &str, value: Option<LogicalValue>) -> Result<Id, WorkflowError> {
        let id = self.claim(id)?;
        self.variables.insert(
            id.clone(),
            LogicalVariable {
                id: id.clone(),
                name: name.to_string(),
                value,
            },
        );
        Ok(id)
    }

    pub fn add_resource(&mut self, interactive: bool, vars: &[&str]) -> Result<Id, WorkflowError> {
        self.check_vars(vars)?;
        let id = self.fresh_id("L");
        self.add_resource_as(&id, interactive, vars)
    }

    pub fn add_resource_as(&mut self, id: &str, interactive: bool, vars: &[&str]) -> Result<Id, WorkflowError> {
        let id = self.claim(id)?;
        self.check_vars(vars)?;
        let mut stored: Vec<Id> = Vec::new();
        for v in vars {
            if !stored.iter().any(|s| s == v) {
                stored.push(v.to_string());
            }
        }
        self.resources.insert(
            id.clone(),
            LogicalResource {
                id: id.clone(),
                interactive,
                stored_variables: stored,
            },
        );
        Ok(id)
    }

    fn check_vars(&self, vars: &[&str]) -> Result<(), WorkflowError> {
        match vars.iter().find(|v| !self.variables.contains_key(**v)) {
            Some(v) => Err(WorkflowError::UnknownRef(v.to_string())),
            None => Ok(()),
        }
    }

    pub fn add_access(
        &mut self,
        section: &str,
        resource: &str,
        flags: AccessFlags,
        carried: &[&str],
    ) -> Result<Id, WorkflowError> {
        self.check_access(section, resource, carried)?;
        let id = self.fresh_id("A");
        self.add_access_as(&id, section, resource, flags, carried)
    }

    pub fn add_access_as(
        &mut self,
        id: &str,
        section: &str,
        resource: &str,
        flags: AccessFlags,
        carried: &[&str],
    ) -> Result<Id, WorkflowError> {
        let id = self.claim(id)?;
        self.check_access(section, resource, carried)?;
        self.accesses.insert(
            id.clone(),
            LogicalAccess {
                id: id.clone(),
                access_point: section.to_string(),
                resource: resource.to_string(),
                carried_variables: carried.iter().map(|s| s.to_string()).collect(),
                flags,
            },
        );
        Ok(id)
    }

    fn check_access(&self, section: &str, resource: &str, carried: &[&str]) -> Result<(), WorkflowError> {
        if !self.sections.contains_key(section) {
            return Err(WorkflowError::UnknownRef(section.to_string()));
        }
        let res = self
            .resources
            .get(resource)
            .ok_or_else(|| WorkflowError::UnknownRef(resource.to_string()))?;
        match carried.iter().find(|v| !res.stored_variables.iter().any(|s| s == *v)) {
            Some(v) => Err(WorkflowError::UnknownRef(v.to_string())),
            None => Ok(()),
        }
    }

    pub fn add_graph(&mut self, decl: GraphDecl) -> Result<Id, WorkflowError> {
        let id = match &decl {
            GraphDecl::Node(r) => {
                let base = format!("{}_node", r.id());
                if self.contains_id(&base) {
                    return Err(WorkflowError::DuplicateId(base));
                }
                base
            }
            GraphDecl::Concrete(_) => self.fresh_id("C"),
            GraphDecl::Virtual { .. } => self.fresh_id("V"),
        };
        self.add_graph_as(&id, decl)
    }

    pub fn add_graph_as(&mut self, id: &str, decl: GraphDecl) -> Result<Id, WorkflowError> {
        let id = self.claim(id)?;
        let graph = match decl {
            GraphDecl::Node(r) => {
                self.check_containable(&r)?;
                WorkflowGraph {
                    declared_node: true,
                    ..empty_graph(&id, GraphKind::Concrete, vec![r])
                }
            }
            GraphDecl::Concrete(contained) => {
                let mut seen = BTreeSet::new();
                for r in &contained {
                    self.check_containable(r)?;
                    if !seen.insert(r) {
                        return Err(WorkflowError::DoubleContainment {
                            resource: r.clone(),
                            container: id.clone(),
                        });
                    }
                }
                empty_graph(&id, GraphKind::Concrete, contained)
            }
            GraphDecl::Virtual {
                instantiated_by,
                multiplicity,
            } => {
                match self.graphs.get(&instantiated_by) {
                    None => return Err(WorkflowError::UnknownRef(instantiated_by)),
                    Some(g) if g.kind != GraphKind::Concrete => {
                        return Err(WorkflowError::NotConcrete(instantiated_by))
                    }
                    Some(_) => {}
                }
                WorkflowGraph {
                    instantiated_by: Some(instantiated_by),
                    multiplicity: Some(multiplicity),
                    ..empty_graph(&id, GraphKind::Virtual, Vec::new())
                }
            }
        };
        self.graphs.insert(id.clone(), graph);
        Ok(id)
    }

    /// Wraps a resource into its own workflow node.
    pub fn add_node(&mut self, r: ResourceRef) -> Result<Id, WorkflowError> {
        self.add_graph(GraphDecl::Node(r))
    }

    fn check_containable(&self, r: &ResourceRef) -> Result<(), WorkflowError> {
        let exists = match r {
            ResourceRef::Section(id) => self.sections.contains_key(id),
            ResourceRef::Logical(id) => self.resources.contains_key(id),
            ResourceRef::Graph(id) => self.graphs.contains_key(id),
        };
        if !exists {
            return Err(WorkflowError::UnknownRef(r.id().clone()));
        }
        if let Some(container) = self.container_of(r) {
            return Err(WorkflowError::DoubleContainment {
                resource: r.clone(),
                container,
            });
        }
        Ok(())
    }

    pub fn set_starting_point(&mut self, graph: &str, node: &str) -> Result<(), WorkflowError> {
        self.check_node(node)?;
        self.graph_mut(graph)?.starting_points.insert(node.to_string());
        Ok(())
    }

    pub fn set_terminal_point(&mut self, graph: &str, node: &str) -> Result<(), WorkflowError> {
        self.check_node(node)?;
        self.graph_mut(graph)?.terminal_points.insert(node.to_string());
        Ok(())
    }

    pub fn add_outcome(&mut self, node: &str) -> Result<(), WorkflowError> {
        self.check_node(node)?;
        self.simulation_outcome.insert(node.to_string());
        Ok(())
    }

    fn check_node(&self, node: &str) -> Result<(), WorkflowError> {
        match self.graphs.get(node) {
            Some(g) if g.is_node() => Ok(()),
            _ => Err(WorkflowError::UnknownRef(node.to_string())),
        }
    }

    fn graph_mut(&mut self, id: &str) -> Result<&mut WorkflowGraph, WorkflowError> {
        self.graphs.get_mut(id).ok_or_else(|| WorkflowError::UnknownRef(id.to_string()))
    }

    /// `section applies_to graph`; the subject kind is checked by validation.
    pub fn applies_to(&mut self, section: &str, graph: &str) -> Result<(), WorkflowError> {
        if !self.sections.contains_key(section) {
            return Err(WorkflowError::UnknownRef(section.to_string()));
        }
        if !self.graphs.contains_key(graph) {
            return Err(WorkflowError::UnknownRef(graph.to_string()));
        }
        self.applies_to.insert((section.to_string(), graph.to_string()));
        Ok(())
    }

    fn check_edge(&self, a: &str, b: &str) -> Result<(), WorkflowError> {
        if a == b {
            return Err(WorkflowError::SelfEdge(a.to_string()));
        }
        for x in [a, b] {
            if !self.graphs.contains_key(x) {
                return Err(WorkflowError::UnknownRef(x.to_string()));
            }
        }
        Ok(())
    }

    /// Adds `a is_direct_cause_of b`.
    pub fn link(&mut self, a: &str, b: &str) -> Result<(), WorkflowError> {
        self.check_edge(a, b)?;
        self.causal_edges.insert((a.to_string(), b.to_string()));
        Ok(())
    }

    /// Adds the symmetric pair `a is_coupled_with b`.
    pub fn couple(&mut self, a: &str, b: &str) -> Result<(), WorkflowError> {
        self.check_edge(a, b)?;
        self.coupling_edges.insert((a.to_string(), b.to_string()));
        self.coupling_edges.insert((b.to_string(), a.to_string()));
        Ok(())
    }

    /// Derived: a causal edge in either direction.
    pub fn is_linked_to(&self, a: &str, b: &str) -> bool {
        self.causal_edges.contains(&(a.to_string(), b.to_string()))
            || self.causal_edges.contains(&(b.to_string(), a.to_string()))
    }

    pub fn is_coupled(&self, a: &str, b: &str) -> bool {
        self.coupling_edges.contains(&(a.to_string(), b.to_string()))
    }

    /// Graph directly containing `r`, if any.
    pub fn container_of(&self, r: &ResourceRef) -> Option<Id> {
        self.graphs
            .values()
            .find(|g| g.contained.contains(r))
            .map(|g| g.id.clone())
    }

    /// The workflow node wrapping `r`, if one exists.
    pub fn node_of(&self, r: &ResourceRef) -> Option<Id> {
        self.graphs
            .values()
            .find(|g| g.is_node() && g.contained[0] == *r)
            .map(|g| g.id.clone())
    }

    /// Nodes are concrete graphs with exactly one contained resource.
    pub fn nodes(&self) -> impl Iterator<Item = &WorkflowGraph> {
        self.graphs.values().filter(|g| g.is_node())
    }

    /// A workflow node whose resource is a logical resource.
    pub fn is_logical_node(&self, id: &str) -> bool {
        self.graphs
            .get(id)
            .is_some_and(|g| g.is_node() && matches!(g.contained[0], ResourceRef::Logical(_)))
    }

    /// Section wrapped by node `id`, if it wraps one.
    pub fn node_section(&self, id: &str) -> Option<&Section> {
        match self.graphs.get(id) {
            Some(g) if g.is_node() => match &g.contained[0] {
                ResourceRef::Section(s) => self.sections.get(s),
                _ => None,
            },
            _ => None,
        }
    }

    /// Direct children of `graph` that are themselves graphs.
    pub fn child_graphs(&self, graph: &str) -> Vec<Id> {
        self.graphs
            .get(graph)
            .map(|g| {
                g.contained
                    .iter()
                    .filter_map(|r| match r {
                        ResourceRef::Graph(id) => Some(id.clone()),
                        _ => None,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Graphs reachable from `graph` through containment and instantiation,
    /// including `graph` itself.
    pub fn subtree(&self, graph: &str) -> BTreeSet<Id> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![graph.to_string()];
        while let Some(g) = stack.pop() {
            if !seen.insert(g.clone()) {
                continue;
            }
            if let Some(wg) = self.graphs.get(&g) {
                stack.extend(self.child_graphs(&g));
                if let Some(c) = &wg.instantiated_by {
                    stack.push(c.clone());
                }
            }
        }
        seen
    }

    pub fn count_sections(&self, kind: SectionKind) -> usize {
        self.sections.values().filter(|s| s.kind == kind).count()
    }
}

fn empty_graph(id: &str, kind: GraphKind, contained: Vec<ResourceRef>) -> WorkflowGraph {
    WorkflowGraph {
        id: id.to_string(),
        kind,
        declared_node: false,
        contained,
        instantiated_by: None,
        multiplicity: None,
        starting_points: BTreeSet::new(),
        terminal_points: BTreeSet::new(),
    }
}

pub(crate) fn check_aspects(kind: SectionKind, aspects: &[Aspect]) -> Result<(), WorkflowError> {
    let mut functional_seen = BTreeSet::new();
    for a in aspects {
        let spec = aspect_spec(&a.class).filter(|s| s.section == kind).ok_or_else(|| {
            WorkflowError::InvalidAspectForKind {
                aspect: a.class.clone(),
                kind,
            }
        })?;
        if a.text.is_none() && a.object.is_none() {
            return Err(WorkflowError::EmptyAspect(a.class.clone()));
        }
        if spec.functional && !functional_seen.insert(&a.class) {
            return Err(WorkflowError::DuplicateFunctionalAspect(a.class.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
