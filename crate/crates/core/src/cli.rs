//! Command-line front end. Exit codes: 0 success, 1 domain failure
//! (validation errors, non-convergence, unfittable data), 2 usage, I/O or
//! parse failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::diagnostics::{Diagnostic, ValidationReport};
use crate::eos::{run_eos_campaign, CampaignConfig, EosError};
use crate::ontology::load_builtin_vocabulary;
use crate::perf::{fit, Observation, PerfConfig, PerfError};
use crate::ttl::{doc_to_store, parse_ttl, triples_to_workflow, TtlError};
use crate::wms::Policy;
use crate::workflow::{to_dot, validate_workflow};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Environment variable naming the default campaign config file.
pub const CONFIG_ENV: &str = "OSMOFLOW_CONFIG";

pub const REPORT_FILE: &str = "campaign_report.json";
pub const RECORDS_FILE: &str = "run_records.jsonl";
pub const TTL_FILE: &str = "eos-parameterization.ttl";

#[derive(Debug, Parser)]
#[command(name = "osmoflow", version, about = "Semantic simulation workflows: validate, run, visualize, model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a Turtle workflow description against the vocabulary and the LDT rules.
    Validate { path: PathBuf },
    /// Run the equation-of-state parameterization campaign.
    Run(RunArgs),
    /// Render a Turtle workflow description as Graphviz DOT.
    ExportDot {
        path: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit an empirical performance model to a JSON list of observations.
    PerfFit {
        path: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML campaign configuration.
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `lpt` or `fifo`.
    #[arg(long)]
    pub policy: Option<Policy>,
    /// Output directory.
    #[arg(long, default_value = "osmoflow-out")]
    pub out: PathBuf,
    /// Relative noise of the simulated derivatives.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Convergence tolerance; `inf` stops after the first fit.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<u32>,
    #[arg(long)]
    pub nodes: Option<u32>,
    #[arg(long)]
    pub cores_per_node: Option<u32>,
    /// Cores per simulation task.
    #[arg(long)]
    pub np: Option<u32>,
    /// Initial temperatures, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Initial densities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rho_grid: Option<Vec<f64>>,
    /// Also write one result file per task below the output directory.
    #[arg(long)]
    pub write_results: bool,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match cli.command {
        Command::Validate { path } => cmd_validate(&path, err),
        Command::Run(args) => cmd_run(&args, out, err),
        Command::ExportDot { path, out: dest } => cmd_export_dot(&path, dest.as_deref(), out, err),
        Command::PerfFit { path, out: dest } => cmd_perf_fit(&path, dest.as_deref(), out, err),
    }
}

fn read(path: &Path, err: &mut dyn Write) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "{}: {e}", path.display());
        EXIT_USAGE
    })
}

/// Writes `contents` through a temporary file in the target directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(dest: Option<&Path>, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let res = match dest {
        Some(p) => write_atomic(p, text),
        None => out.write_all(text.as_bytes()),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let target = dest.map_or("standard output".to_string(), |p| p.display().to_string());
            let _ = writeln!(err, "{target}: {e}");
            EXIT_USAGE
        }
    }
}

/// Line of the first statement whose subject is `subject`.
fn subject_line(text: &str, subject: &str) -> Option<usize> {
    let local = format!(":{subject}");
    let names = [subject, local.as_str()];
    text.lines().position(|l| {
        let head = l.split_whitespace().next().unwrap_or("");
        names.contains(&head)
    })
    .map(|i| i + 1)
}

fn print_diagnostics(path: &Path, text: &str, report: &ValidationReport, err: &mut dyn Write) {
    for d in &report.diagnostics {
        let Diagnostic { subject, .. } = d;
        match subject_line(text, subject) {
            Some(line) => {
                let _ = writeln!(err, "{}:{line}: {d}", path.display());
            }
            None => {
                let _ = writeln!(err, "{}: {d}", path.display());
            }
        }
    }
}

fn ttl_exit(e: &TtlError) -> u8 {
    match e {
        TtlError::SyntaxError { .. } | TtlError::UnknownPrefix { .. } => EXIT_USAGE,
        TtlError::VocabularyViolation(_) | TtlError::StructuralError(_) => EXIT_DOMAIN,
    }
}

/// Exit 0 iff the file parses and neither the vocabulary nor the workflow
/// rules report an error.
pub fn cmd_validate(path: &Path, err: &mut dyn Write) -> u8 {
    let text = match read(path, err) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let doc = match parse_ttl(&text) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(err, "{}:{e}", path.display());
            return ttl_exit(&e);
        }
    };
    let vocab = load_builtin_vocabulary();
    let store = match doc_to_store(&doc, &vocab) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            return ttl_exit(&e);
        }
    };
    let mut report = store.validate();
    if !report.has_errors() {
        match triples_to_workflow(&doc, &vocab) {
            Ok(wf) => report.extend(validate_workflow(&wf)),
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", path.display());
                return ttl_exit(&e);
            }
        }
    }
    print_diagnostics(path, &text, &report, err);
    if report.has_errors() {
        EXIT_DOMAIN
    } else {
        EXIT_OK
    }
}

pub fn cmd_export_dot(path: &Path, dest: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let text = match read(path, err) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let wf = match parse_ttl(&text).and_then(|doc| triples_to_workflow(&doc, &load_builtin_vocabulary())) {
        Ok(wf) => wf,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    emit(dest, &to_dot(&wf), out, err)
}

pub fn cmd_perf_fit(path: &Path, dest: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let text = match read(path, err) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let observations: Vec<Observation> = match serde_json::from_str(&text) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    match fit(&observations, &PerfConfig::default()) {
        Ok(model) => {
            let json = serde_json::to_string_pretty(&model).expect("model serializes") + "\n";
            emit(dest, &json, out, err)
        }
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            match e {
                PerfError::SearchSpaceTooLarge { .. } => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            }
        }
    }
}

/// Config file (if any) with command-line overrides applied.
pub fn load_config(args: &RunArgs) -> Result<CampaignConfig, String> {
    let mut c = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => CampaignConfig::default(),
    };
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.policy {
        c.cluster.policy = v;
    }
    if let Some(v) = args.sigma {
        c.sigma_rel = v;
    }
    if let Some(v) = args.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = args.max_iterations {
        c.max_iterations = v;
    }
    if let Some(v) = args.nodes {
        c.cluster.nodes = v;
    }
    if let Some(v) = args.cores_per_node {
        c.cluster.cores_per_node = v;
    }
    if let Some(v) = args.np {
        c.cluster.np = v;
    }
    if let Some(v) = &args.t_grid {
        c.initial_t = v.clone();
    }
    if let Some(v) = &args.rho_grid {
        c.initial_rho = v.clone();
    }
    if args.write_results {
        c.results_dir = Some(args.out.clone());
    }
    c.check().map_err(|e| e.to_string())?;
    if c.cluster.nodes == 0 || c.cluster.cores_per_node == 0 {
        return Err("cluster has no usable nodes".into());
    }
    Ok(c)
}

/// Runs the campaign and writes the report, the task records and the
/// workflow description into the output directory.
pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let config = match load_config(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "configuration: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match run_eos_campaign(&config) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "campaign failed: {e}");
            return match e {
                EosError::Wms(_) | EosError::InvalidConfig(_) | EosError::Io(_) => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            };
        }
    };
    let files = [
        (REPORT_FILE, outcome.report.to_json() + "\n"),
        (RECORDS_FILE, outcome.run.to_json_lines()),
        (TTL_FILE, outcome.ttl.clone()),
    ];
    for (name, text) in &files {
        let path = args.out.join(name);
        if let Err(e) = write_atomic(&path, text) {
            let _ = writeln!(err, "{}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    let r = &outcome.report;
    let _ = writeln!(
        out,
        "{}: {} after {} iterations, {} tasks, makespan {:.1} s, final rms {:.3e}",
        r.workflow,
        if r.converged { "converged" } else { "not converged" },
        r.iterations,
        r.task_stats.tasks,
        r.task_stats.makespan,
        r.final_rms
    );
    match r.status() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            EXIT_DOMAIN
        }
    }
}
