//! Static OSMO/VISO vocabulary data.

use serde::{Deserialize, Serialize};

use super::pe_types::{pe_type_table, Granularity};
use super::{owl_thing, ClassId, LiteralKind, Range, RelationDef, VocabularyStore};

pub const STANDARD_PREFIXES: [(&str, &str); 10] = [
    ("", "urn:x-osmoflow:local#"),
    ("osmo", "urn:x-osmoflow:osmo#"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("viso", "urn:x-osmoflow:viso#"),
    ("viso-am", "urn:x-osmoflow:viso-am#"),
    ("viso-co", "urn:x-osmoflow:viso-co#"),
    ("viso-el", "urn:x-osmoflow:viso-el#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SectionKind {
    UseCase,
    MaterialsModel,
    Solver,
    Processor,
}

impl SectionKind {
    pub const ALL: [SectionKind; 4] = [
        SectionKind::UseCase,
        SectionKind::MaterialsModel,
        SectionKind::Solver,
        SectionKind::Processor,
    ];

    pub fn class(self) -> ClassId {
        ClassId::osmo(match self {
            SectionKind::UseCase => "use_case",
            SectionKind::MaterialsModel => "materials_model",
            SectionKind::Solver => "solver",
            SectionKind::Processor => "processor",
        })
    }

    pub fn from_class(class: &ClassId) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.class() == *class)
    }

    fn aspect_group(self) -> &'static str {
        match self {
            SectionKind::UseCase => "use_case_aspect",
            SectionKind::MaterialsModel => "model_aspect",
            SectionKind::Solver => "solver_aspect",
            SectionKind::Processor => "processor_aspect",
        }
    }
}

/// One MODA-numbered aspect class that may describe a section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AspectSpec {
    pub class_local: &'static str,
    pub section: SectionKind,
    pub moda: &'static str,
    /// At most one aspect of this class per section.
    pub functional: bool,
}

impl AspectSpec {
    pub fn class(&self) -> ClassId {
        ClassId::osmo(self.class_local)
    }

    /// Sub-property of `osmo:has_aspect` that points to this aspect.
    pub fn relation(&self) -> ClassId {
        ClassId::osmo(&format!("has_{}", self.class_local))
    }
}

const fn aspect(class_local: &'static str, section: SectionKind, moda: &'static str, functional: bool) -> AspectSpec {
    AspectSpec {
        class_local,
        section,
        moda,
        functional,
    }
}

// MODA entry 4.1 has no named OSMO aspect and is not registered.
pub const ASPECTS: [AspectSpec; 19] = [
    aspect("use_case_description", SectionKind::UseCase, "1.1", true),
    aspect("use_case_material", SectionKind::UseCase, "1.2", false),
    aspect("use_case_geometry", SectionKind::UseCase, "1.3", true),
    aspect("use_case_timespan", SectionKind::UseCase, "1.4", true),
    aspect("use_case_boundary_condition", SectionKind::UseCase, "1.5", false),
    aspect("use_case_literature", SectionKind::UseCase, "1.6", false),
    aspect("model_type", SectionKind::MaterialsModel, "2.1", false),
    aspect("model_granularity", SectionKind::MaterialsModel, "2.2", true),
    aspect("physical_equation", SectionKind::MaterialsModel, "2.3", false),
    aspect("materials_relation", SectionKind::MaterialsModel, "2.4", false),
    aspect("model_boundary_condition", SectionKind::MaterialsModel, "2.5", false),
    aspect("solver_method_type", SectionKind::Solver, "3.1", false),
    aspect("solver_software", SectionKind::Solver, "3.2", false),
    aspect("solver_timestep", SectionKind::Solver, "3.3", true),
    aspect("computational_representation", SectionKind::Solver, "3.4", false),
    aspect("solver_boundary_condition", SectionKind::Solver, "3.5", false),
    aspect("solver_parameter", SectionKind::Solver, "3.6", false),
    aspect("processor_method_type", SectionKind::Processor, "4.2", false),
    aspect("processor_error_statement", SectionKind::Processor, "4.3", false),
];

pub fn aspects_for(kind: SectionKind) -> impl Iterator<Item = &'static AspectSpec> {
    ASPECTS.iter().filter(move |a| a.section == kind)
}

pub fn aspect_spec(class: &ClassId) -> Option<&'static AspectSpec> {
    if class.prefix() != "osmo" {
        return None;
    }
    ASPECTS.iter().find(|a| a.class_local == class.local_name())
}

const VISO_UPPER: [&str; 10] = [
    "software",
    "software_tool",
    "agent",
    "license",
    "programming_language",
    "modelling_related_entity",
    "software_interface",
    "software_update",
    "model_feature",
    "solver_feature",
];

const EL_SOLVER_FEATURES: [&str; 7] = [
    "basis_set",
    "electron_diagonalization",
    "electron_mixing",
    "electron_smearing",
    "ionic_relaxation",
    "kpoint_mesh",
    "symmetry_adapted_solver",
];

const AM_SOLVER_FEATURES: [&str; 7] = [
    "barostat",
    "integrator",
    "electrostatic_solver",
    "geometric_constraint_algorithm",
    "parallelization_scheme",
    "sampling_algorithm",
    "thermostat",
];

const CO_SOLVER_FEATURES: [&str; 5] = [
    "continuum_mesh",
    "divergence_scheme",
    "gradient_scheme",
    "spatial_discretization_scheme",
    "temporal_discretization_scheme",
];

/// Boolean data properties of `osmo:logical_access`, in flag order.
pub(crate) const ACCESS_FLAGS: [&str; 5] = [
    "reads_initially",
    "reads_parameters",
    "writes_finally",
    "reads_during_execution",
    "writes_during_execution",
];

fn o(local: &str) -> ClassId {
    ClassId::osmo(local)
}

fn v(local: &str) -> ClassId {
    ClassId::viso(local)
}

/// Builds the store with the complete built-in vocabulary.
pub fn load_builtin_vocabulary() -> VocabularyStore {
    let mut s = VocabularyStore::empty();
    load_viso(&mut s);
    load_osmo(&mut s);
    s
}

fn class(s: &mut VocabularyStore, id: ClassId, parents: &[ClassId]) {
    s.register_class(id, parents).expect("static vocabulary is consistent");
}

fn rel(s: &mut VocabularyStore, def: RelationDef) {
    s.register_relation(def).expect("static vocabulary is consistent");
}

fn load_viso(s: &mut VocabularyStore) {
    for name in VISO_UPPER {
        let parents = if name == "software_tool" { vec![v("software")] } else { vec![] };
        class(s, v(name), &parents);
    }
    class(s, v("model_type"), &[v("modelling_related_entity")]);

    let branches: [(&str, &str, &[&str]); 3] = [
        ("viso-el", "el", &EL_SOLVER_FEATURES),
        ("viso-am", "am", &AM_SOLVER_FEATURES),
        ("viso-co", "co", &CO_SOLVER_FEATURES),
    ];
    for (prefix, short, solver_features) in branches {
        let solver_root = ClassId::new(prefix, format!("{short}_solver_feature"));
        let model_root = ClassId::new(prefix, format!("{short}_model_feature"));
        class(s, solver_root.clone(), &[v("solver_feature")]);
        class(s, model_root, &[v("model_feature")]);
        for f in solver_features {
            class(s, ClassId::new(prefix, *f), std::slice::from_ref(&solver_root));
        }
    }
    let am_model = ClassId::new("viso-am", "am_model_feature");
    for trait_name in ["physical_equation_trait", "materials_relation_trait", "external_condition_trait"] {
        class(s, ClassId::new("viso-am", trait_name), std::slice::from_ref(&am_model));
    }
    class(s, ClassId::new("viso-am", "force_field"), &[ClassId::new("viso-am", "materials_relation_trait")]);

    let tool = v("software_tool");
    rel(s, RelationDef::object(v("has_feature"), &[tool.clone()], &[v("model_feature"), v("solver_feature")]));
    rel(s, RelationDef::object(v("is_compatible_with"), &[tool.clone()], &[tool.clone()]).symmetric());
    rel(s, RelationDef::object(v("is_tool_for_model"), &[tool.clone()], &[v("model_type")]));
    rel(s, RelationDef::object(v("requires"), &[tool], &[v("software")]));
    rel(s, RelationDef::object(v("is_modelling_twin_of"), &[owl_thing()], &[owl_thing()]).symmetric());
}

fn load_osmo(s: &mut VocabularyStore) {
    class(s, o("simulation_workflow"), &[]);
    class(s, o("workflow_resource"), &[]);
    class(s, o("workflow_graph"), &[o("workflow_resource")]);
    class(s, o("concrete_graph"), &[o("workflow_graph")]);
    class(s, o("virtual_graph"), &[o("workflow_graph")]);
    class(s, o("workflow_node"), &[o("concrete_graph")]);
    class(s, o("logical_node"), &[o("workflow_node")]);
    class(s, o("section_entity"), &[]);
    class(s, o("section"), &[o("section_entity"), o("workflow_resource")]);
    for kind in SectionKind::ALL {
        class(s, kind.class(), &[o("section")]);
    }
    class(s, o("logical_resource"), &[o("workflow_resource")]);
    class(s, o("logical_access"), &[]);
    class(s, o("logical_variable"), &[]);
    class(s, o("logical_value"), &[]);
    for content in ["condition", "timespan_information", "material"] {
        class(s, o(content), &[]);
    }

    class(s, o("aspect"), &[]);
    for kind in SectionKind::ALL {
        class(s, o(kind.aspect_group()), &[o("aspect")]);
    }
    for a in &ASPECTS {
        class(s, a.class(), &[o(a.section.aspect_group())]);
    }

    class(s, o("physical_equation_type"), &[]);
    for info in pe_type_table() {
        class(s, info.class_name.clone(), &[o("physical_equation_type")]);
        s.insert_pe_type(info);
    }
    class(s, o("granularity_level"), &[]);
    for g in Granularity::ALL {
        s.declare_individual(o(g.individual_name()), &[o("granularity_level")])
            .expect("static vocabulary is consistent");
    }

    let wg = o("workflow_graph");
    let section = o("section");
    let access = o("logical_access");
    let variable = o("logical_variable");
    rel(s, RelationDef::object(o("applies_to"), &[o("use_case"), o("materials_model")], &[wg.clone()]));
    rel(s, RelationDef::object(o("contains"), &[o("concrete_graph")], &[o("workflow_resource")]));
    rel(s, RelationDef::object(o("has_access_point"), &[access.clone()], &[section.clone()]).functional());
    rel(s, RelationDef::object(o("has_carried_variable"), &[access.clone()], &[variable.clone()]));
    rel(s, RelationDef::object(o("has_internal_lv"), &[section.clone()], &[variable.clone()]));
    rel(s, RelationDef::object(o("has_logical_io"), &[section.clone()], &[variable.clone()]));
    rel(s, RelationDef::object(o("has_resource"), &[access.clone()], &[o("logical_resource")]).functional());
    rel(s, RelationDef::object(o("has_simulation_outcome"), &[o("simulation_workflow")], &[o("logical_node")]));
    rel(s, RelationDef::object(o("has_starting_point"), &[wg.clone()], &[o("workflow_node")]));
    rel(s, RelationDef::object(o("has_stored_variable"), &[o("logical_resource")], &[variable.clone()]));
    rel(s, RelationDef::object(o("has_terminal_point"), &[wg.clone()], &[o("workflow_node")]));
    rel(s, RelationDef::object(o("has_value"), &[variable.clone()], &[o("logical_value")]).functional());
    rel(s, RelationDef::object(o("instantiates"), &[o("concrete_graph")], &[o("virtual_graph")]).functional());
    rel(s, RelationDef::object(o("is_coupled_with"), &[wg.clone()], &[wg.clone()]).symmetric());
    rel(s, RelationDef::object(o("is_direct_cause_of"), &[wg.clone()], &[wg.clone()]));
    rel(s, RelationDef::object(o("is_linked_to"), &[wg.clone()], &[wg.clone()]).symmetric());

    for flag in ACCESS_FLAGS {
        rel(s, RelationDef::datatype(o(flag), &[access.clone()], LiteralKind::Boolean).functional());
    }
    rel(s, RelationDef::datatype(o("is_interactive"), &[o("logical_resource")], LiteralKind::Boolean).functional());
    let vg = o("virtual_graph");
    rel(s, RelationDef::datatype(o("has_execution_mode"), &[vg.clone()], LiteralKind::String).functional());
    rel(s, RelationDef::datatype(o("has_instance_count"), &[vg.clone()], LiteralKind::Integer).functional());
    rel(s, RelationDef::datatype(o("has_termination_condition"), &[vg], LiteralKind::String).functional());
    let value = o("logical_value");
    let mut scalar = RelationDef::datatype(o("has_scalar_value"), &[value.clone()], LiteralKind::Real).functional();
    scalar.range.literals.insert(LiteralKind::Integer);
    rel(s, scalar);
    rel(s, RelationDef::datatype(o("has_unit"), &[value.clone()], LiteralKind::String).functional());
    rel(s, RelationDef::datatype(o("has_string_value"), &[value.clone()], LiteralKind::String).functional());
    rel(s, RelationDef::datatype(o("has_vector_value"), &[value], LiteralKind::String).functional());

    rel(s, RelationDef::object(o("has_aspect"), &[section], &[o("aspect")]));
    for a in &ASPECTS {
        let mut def = RelationDef::object(a.relation(), &[a.section.class()], &[a.class()]);
        def.functional = a.functional;
        rel(s, def);
    }
    rel(s, RelationDef::datatype(o("has_aspect_text_content"), &[o("aspect")], LiteralKind::String));
    rel(
        s,
        RelationDef {
            id: o("has_aspect_object_content"),
            domain: [o("aspect")].into_iter().collect(),
            range: Range {
                classes: [owl_thing()].into_iter().collect(),
                literals: [LiteralKind::String, LiteralKind::ExternalRef].into_iter().collect(),
            },
            symmetric: false,
            functional: false,
        },
    );
}
