//! Semantic workflow engine for materials-modelling simulation workflows.
//!
//! Workflows are described with the OSMO/VISO vocabulary and logical data
//! transfer (LDT) graph semantics, serialized as Turtle or JSON task objects,
//! and executed on a simulated cluster by a task-pulling workflow manager that
//! consults an empirical performance model. An equation-of-state
//! parameterization campaign drives the whole pipeline end to end.

pub mod cli;
pub mod diagnostics;
pub mod eos;
pub mod ontology;
pub mod perf;
pub mod ttl;
pub mod wms;
pub mod workflow;
