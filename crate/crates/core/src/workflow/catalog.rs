//! Reference workflows: the two LDT readings of one four-section MODA graph,
//! the EOS parameterization workflow, and a single metadynamics solver.

use crate::ontology::{ClassId, SectionKind};

use super::{
    AccessFlags, Aspect, GraphDecl, Multiplicity, ObjectContent, ResourceRef, SimulationWorkflow, WorkflowError,
};

fn sec(id: &str) -> ResourceRef {
    ResourceRef::Section(id.to_string())
}

fn res(id: &str) -> ResourceRef {
    ResourceRef::Logical(id.to_string())
}

/// Sections U1, M1, S1, P1 and resources L1, L2, each wrapped in a node.
fn four_sections(wf: &mut SimulationWorkflow, interactive_l1: bool) -> Result<(), WorkflowError> {
    wf.add_section_as("U1", SectionKind::UseCase, vec![])?;
    wf.add_section_as("M1", SectionKind::MaterialsModel, vec![])?;
    wf.add_section_as("S1", SectionKind::Solver, vec![])?;
    wf.add_section_as("P1", SectionKind::Processor, vec![])?;
    wf.add_resource_as("L1", interactive_l1, &[])?;
    wf.add_resource_as("L2", false, &[])?;
    for s in ["U1", "M1", "S1", "P1"] {
        wf.add_node(sec(s))?;
    }
    for l in ["L1", "L2"] {
        wf.add_node(res(l))?;
    }
    Ok(())
}

fn root_of_nodes(wf: &mut SimulationWorkflow, extra: &[&str]) -> Result<(), WorkflowError> {
    let mut contained: Vec<ResourceRef> = ["U1", "M1", "S1", "P1", "L1", "L2"]
        .iter()
        .chain(extra)
        .map(|x| ResourceRef::Graph(format!("{x}_node")))
        .collect();
    contained.sort();
    wf.add_graph_as("W", GraphDecl::Concrete(contained))?;
    wf.applies_to("U1", "W")?;
    wf.applies_to("M1", "S1_node")?;
    wf.applies_to("M1", "P1_node")?;
    wf.set_terminal_point("W", "L2_node")?;
    wf.add_outcome("L2_node")
}

/// Solver linked to a postprocessor through a finally written resource.
pub fn ambiguity_b() -> SimulationWorkflow {
    let build = || -> Result<SimulationWorkflow, WorkflowError> {
        let mut wf = SimulationWorkflow::new("ldt_b");
        four_sections(&mut wf, false)?;
        root_of_nodes(&mut wf, &[])?;
        wf.set_starting_point("W", "S1_node")?;
        wf.link("S1_node", "P1_node")?;
        wf.add_access_as("A1", "S1", "L1", AccessFlags::W_FIN, &[])?;
        wf.add_access_as("A2", "P1", "L1", AccessFlags::R_INIT, &[])?;
        wf.add_access_as("A3", "P1", "L2", AccessFlags::W_FIN, &[])?;
        Ok(wf)
    };
    build().expect("reference workflow is well formed")
}

/// Solver coupled with a processor; use case and model read parameters
/// from an interactive resource.
pub fn ambiguity_c() -> SimulationWorkflow {
    let build = || -> Result<SimulationWorkflow, WorkflowError> {
        let mut wf = SimulationWorkflow::new("ldt_c");
        four_sections(&mut wf, true)?;
        wf.add_resource_as("L3", false, &[])?;
        wf.add_node(res("L3"))?;
        root_of_nodes(&mut wf, &["L3"])?;
        wf.set_starting_point("W", "S1_node")?;
        wf.set_starting_point("W", "P1_node")?;
        wf.couple("S1_node", "P1_node")?;
        wf.add_access_as("A1", "U1", "L1", AccessFlags::R_PARAM, &[])?;
        wf.add_access_as("A2", "M1", "L1", AccessFlags::R_PARAM, &[])?;
        wf.add_access_as("A3", "S1", "L1", AccessFlags::R_INIT, &[])?;
        wf.add_access_as("A4", "S1", "L3", AccessFlags::W_EXEC, &[])?;
        wf.add_access_as("A5", "P1", "L3", AccessFlags::R_EXEC, &[])?;
        wf.add_access_as("A6", "P1", "L2", AccessFlags::W_FIN, &[])?;
        Ok(wf)
    };
    build().expect("reference workflow is well formed")
}

/// The EOS parameterization campaign as an LDT workflow.
///
/// Concurrent simulation instances (V1 over C1) feed an iterated fit with
/// critical-point refinement (V2 over C2), followed by iterated refinement
/// around the coexistence curve (V3 over C3). All of it sits in root W.
pub fn eos_workflow() -> SimulationWorkflow {
    build_eos().expect("reference workflow is well formed")
}

fn build_eos() -> Result<SimulationWorkflow, WorkflowError> {
    use ObjectContent::{Class, Individual};
    let mut wf = SimulationWorkflow::new("eos_parameterization");
    let osmo = ClassId::osmo;
    let am = |l: &str| ClassId::new("viso-am", l);

    wf.add_section_as(
        "U1",
        SectionKind::UseCase,
        vec![
            Aspect::text("use_case_description", "Thermodynamic properties of phosgene from an equation of state"),
            Aspect::text("use_case_material", "phosgene"),
        ],
    )?;
    wf.add_section_as(
        "M1",
        SectionKind::MaterialsModel,
        vec![
            Aspect::text("model_type", "intermolecular pair potential"),
            Aspect::object("model_granularity", Individual(osmo("ATOMISTIC"))),
            Aspect::object("physical_equation", Class(osmo("pe_type_atomistic_partition_function"))),
            Aspect::object("materials_relation", Class(am("force_field"))).with_text("rigid multi-site phosgene model"),
        ],
    )?;
    wf.add_section_as(
        "S1",
        SectionKind::Solver,
        vec![
            Aspect::object("solver_method_type", Class(am("sampling_algorithm"))).with_text("Monte Carlo, canonical ensemble"),
            Aspect::text("solver_software", "ms2"),
        ],
    )?;
    wf.add_section_as(
        "M2",
        SectionKind::MaterialsModel,
        vec![
            Aspect::text("model_type", "equation of state"),
            Aspect::object("model_granularity", Individual(osmo("CONTINUUM"))),
            Aspect::object("physical_equation", Class(osmo("pe_type_continuum_thermodynamics"))),
        ],
    )?;
    wf.add_section_as(
        "S2",
        SectionKind::Solver,
        vec![
            Aspect::text("solver_method_type", "weighted linear least squares"),
            Aspect::text("solver_software", "EOS fitter"),
        ],
    )?;
    wf.add_section_as(
        "P1",
        SectionKind::Processor,
        vec![Aspect::text("processor_method_type", "Massieu potential derivatives from simulation output")],
    )?;
    wf.add_section_as(
        "P2",
        SectionKind::Processor,
        vec![Aspect::text("processor_method_type", "refinement around the critical point")],
    )?;
    wf.add_section_as(
        "P3",
        SectionKind::Processor,
        vec![Aspect::text("processor_method_type", "refinement around the vapour-liquid coexistence curve")],
    )?;

    wf.add_variable_as("T", "temperature", None)?;
    wf.add_variable_as("rho", "density", None)?;
    wf.add_variable_as("A_nm", "Massieu potential derivatives", None)?;
    wf.add_variable_as("n_k", "EOS coefficients", None)?;
    wf.add_resource_as("L1", true, &["T", "rho"])?;
    wf.add_resource_as("L2", false, &["A_nm"])?;
    wf.add_resource_as("L3", false, &["T", "rho", "A_nm"])?;
    wf.add_resource_as("L4", false, &["n_k"])?;
    wf.add_resource_as("L5", false, &["T", "rho"])?;
    for s in ["U1", "M1", "S1", "M2", "S2", "P1", "P2", "P3"] {
        wf.add_node(sec(s))?;
    }
    for l in ["L1", "L2", "L3", "L4", "L5"] {
        wf.add_node(res(l))?;
    }
    for s in ["S1", "P1"] {
        wf.add_logical_io(s, "A_nm")?;
    }

    let graph = |ids: &[&str]| GraphDecl::Concrete(ids.iter().map(|i| ResourceRef::Graph(format!("{i}_node"))).collect());
    wf.add_graph_as("C1", graph(&["S1", "P1", "L2"]))?;
    wf.add_graph_as("C2", graph(&["S2", "P2"]))?;
    wf.add_graph_as("C3", graph(&["P3", "L5"]))?;
    wf.add_graph_as(
        "V1",
        GraphDecl::Virtual {
            instantiated_by: "C1".into(),
            multiplicity: Multiplicity::ConcurrentInstances { count: None },
        },
    )?;
    let until_converged = || Multiplicity::IterativeLoop {
        count: None,
        termination: Some("maximum relative coefficient change below tolerance".into()),
    };
    wf.add_graph_as(
        "V2",
        GraphDecl::Virtual {
            instantiated_by: "C2".into(),
            multiplicity: until_converged(),
        },
    )?;
    wf.add_graph_as(
        "V3",
        GraphDecl::Virtual {
            instantiated_by: "C3".into(),
            multiplicity: until_converged(),
        },
    )?;
    let mut root: Vec<ResourceRef> = ["U1", "M1", "M2", "L1", "L3", "L4"]
        .iter()
        .map(|i| ResourceRef::Graph(format!("{i}_node")))
        .chain(["V1", "V2", "V3"].iter().map(|v| ResourceRef::Graph(v.to_string())))
        .collect();
    root.sort();
    wf.add_graph_as("W", GraphDecl::Concrete(root))?;

    wf.link("S1_node", "P1_node")?;
    wf.link("S2_node", "P2_node")?;
    wf.link("P3_node", "L5_node")?;
    wf.link("V1", "V2")?;
    wf.link("V2", "V3")?;
    for (g, start, end) in [
        ("C1", "S1_node", "P1_node"),
        ("C2", "S2_node", "P2_node"),
        ("C3", "P3_node", "L5_node"),
        ("W", "L1_node", "L4_node"),
    ] {
        wf.set_starting_point(g, start)?;
        wf.set_terminal_point(g, end)?;
    }
    wf.add_outcome("L4_node")?;

    wf.applies_to("U1", "W")?;
    wf.applies_to("M1", "C1")?;
    wf.applies_to("M2", "C2")?;
    wf.applies_to("M2", "C3")?;

    wf.add_access_as("A1", "U1", "L1", AccessFlags::R_PARAM, &[])?;
    wf.add_access_as("A2", "S1", "L1", AccessFlags::R_INIT, &["T", "rho"])?;
    wf.add_access_as("A3", "S1", "L2", AccessFlags::W_FIN, &["A_nm"])?;
    wf.add_access_as("A4", "P1", "L2", AccessFlags::R_INIT, &["A_nm"])?;
    wf.add_access_as("A5", "P1", "L3", AccessFlags::W_FIN, &["T", "rho", "A_nm"])?;
    wf.add_access_as("A6", "S2", "L3", AccessFlags::R_INIT, &["T", "rho", "A_nm"])?;
    wf.add_access_as("A7", "S2", "L4", AccessFlags::W_FIN, &["n_k"])?;
    wf.add_access_as("A8", "P2", "L4", AccessFlags::R_INIT, &["n_k"])?;
    wf.add_access_as("A9", "P2", "L1", AccessFlags::W_FIN, &["T", "rho"])?;
    wf.add_access_as("A10", "P3", "L4", AccessFlags::R_INIT, &["n_k"])?;
    wf.add_access_as("A11", "P3", "L5", AccessFlags::W_FIN, &["T", "rho"])?;
    wf.add_access_as("A12", "S1", "L5", AccessFlags::R_INIT, &["T", "rho"])?;
    Ok(wf)
}

/// A lone solver `SX` that uses well-tempered metadynamics.
pub fn metadynamics_solver() -> SimulationWorkflow {
    let mut wf = SimulationWorkflow::new("metadynamics");
    wf.add_section_as(
        "SX",
        SectionKind::Solver,
        vec![Aspect::object(
            "solver_method_type",
            ObjectContent::Class(ClassId::new("viso-am", "sampling_algorithm")),
        )
        .with_text("Well-tempered metadynamics")],
    )
    .expect("reference workflow is well formed");
    wf
}
