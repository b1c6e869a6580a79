//! `scriptflow` command line. Exit codes: 0 success, 1 user or run error, 2 the script has
//! error-severity findings (or evaluation failures for `eval`).

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use scriptflow_core::evaluator::{DEFAULT_MESH_U, DEFAULT_MESH_V};
use scriptflow_core::{serialize, Catalog, Diagnostic};

use crate::backend::{BackendConfig, BackendKind};
use crate::engine::{self, ApiError, Checked};
use crate::runs;
use crate::service::{self, AppState, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(name = "scriptflow", version, about = "Generate, check and evaluate slider-driven geometry scripts")]
pub struct Cli {
    /// Text-generation backend; overrides SF_BACKEND.
    #[arg(long, global = true, value_parser = ["live", "mock"])]
    pub backend: Option<String>,
    /// Component catalog JSON file instead of the built-in one.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory of extra mock fixtures.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the three-stage pipeline on a prompt and write a run directory.
    Generate {
        prompt: String,
        /// Run directory (default runs/<prompt-slug>).
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Parse and lint a script.
    Validate { file: PathBuf },
    /// Apply suggested repairs.
    Repair {
        file: PathBuf,
        /// Diagnostic key to repair (repeatable); all suggested repairs when absent.
        #[arg(long = "only")]
        only: Vec<String>,
        /// Where to write the repaired script (default stdout).
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Evaluate a script, optionally overriding slider values.
    Eval {
        file: PathBuf,
        /// Slider override `<node id>=<value>` (repeatable).
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Export the drawable geometry as .obj or .json.
    Render {
        file: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MESH_U)]
        u: usize,
        #[arg(long, default_value_t = DEFAULT_MESH_V)]
        v: usize,
    },
    /// Print the component catalog.
    Registry,
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

/// Failures that end the command with exit code 1.
#[derive(Debug)]
struct UserError(String);

impl From<ApiError> for UserError {
    fn from(e: ApiError) -> Self {
        let loc = e.location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default();
        UserError(format!("{}{loc}", e.message))
    }
}

impl From<std::io::Error> for UserError {
    fn from(e: std::io::Error) -> Self {
        UserError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, UserError> {
    std::fs::read_to_string(path).map_err(|e| UserError(format!("{}: {e}", path.display())))
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog, UserError> {
    match path {
        None => Ok(Catalog::builtin()),
        Some(p) => Catalog::from_json_str(&read(p)?).map_err(|e| UserError(format!("{}: {e}", p.display()))),
    }
}

fn backend_config(cli: &Cli) -> Result<BackendConfig, UserError> {
    let mut c = BackendConfig::from_env().map_err(|e| UserError(e.to_string()))?;
    if let Some(b) = &cli.backend {
        c.kind = BackendKind::parse(b).expect("clap restricts the values");
    }
    if cli.fixtures.is_some() {
        c.fixtures = cli.fixtures.clone();
    }
    Ok(c)
}

fn diag_line(d: &Diagnostic) -> String {
    let fix = d.repair.as_ref().map(|r| format!(" [fix: {}]", r.kind())).unwrap_or_default();
    format!("{} {:<7} {}  {}{fix}", d.rule.id(), d.severity.name(), d.key(), d.message)
}

fn print_diagnostics(io: &mut Io<'_>, diags: &[Diagnostic]) -> std::io::Result<()> {
    for d in diags {
        writeln!(io.out, "{}", diag_line(d))?;
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    writeln!(io.out, "{} finding(s), {errors} error(s)", diags.len())
}

fn exit_for(checked: &Checked) -> i32 {
    if checked.has_errors() {
        2
    } else {
        0
    }
}

fn run_command(cli: &Cli, io: &mut Io<'_>) -> Result<i32, UserError> {
    let catalog = load_catalog(cli.catalog.as_deref())?;
    match &cli.command {
        Command::Generate { prompt, out } => {
            let config = backend_config(cli)?;
            let backend = config.build().map_err(|e| UserError(e.to_string()))?;
            let t = engine::generate(prompt, &catalog, backend.as_ref())?;
            let dir = out.clone().unwrap_or_else(|| runs::default_dir(prompt));
            runs::write_run(&dir, &t)?;
            if io.json {
                write!(io.out, "{}", engine::body(&t.to_json()))?;
            } else {
                for s in &t.stages {
                    let status = if s.error.is_some() { "failed" } else { "ok" };
                    writeln!(io.out, "stage {}: {status} after {} attempt(s)", s.stage, s.attempts)?;
                    for c in &s.checks {
                        writeln!(io.out, "  note: {c}")?;
                    }
                }
                if t.document.is_some() {
                    print_diagnostics(io, &t.diagnostics)?;
                }
                writeln!(io.out, "run written to {}", dir.display())?;
            }
            if t.document.is_none() {
                writeln!(io.err, "error: {}", engine::generation_failure(&t).message)?;
                return Ok(1);
            }
            Ok(if t.diagnostics.iter().any(Diagnostic::is_error) { 2 } else { 0 })
        }
        Command::Validate { file } => {
            let c = engine::check(&read(file)?, &catalog)?;
            if io.json {
                write!(io.out, "{}", engine::body(&engine::diagnostics_json(&c.diagnostics)))?;
            } else {
                print_diagnostics(io, &c.diagnostics)?;
            }
            Ok(exit_for(&c))
        }
        Command::Repair { file, only, out } => {
            let c = engine::check(&read(file)?, &catalog)?;
            let ids = (!only.is_empty()).then_some(only.as_slice());
            let r = engine::repair(&c, ids, &catalog)?;
            let text = serialize(&r.checked.document);
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            if io.json {
                write!(io.out, "{}", engine::body(&r.to_json()))?;
            } else if out.is_none() {
                write!(io.out, "{text}")?;
            } else {
                for a in &r.applied {
                    writeln!(io.out, "applied {}", a.to_json())?;
                }
                print_diagnostics(io, &r.checked.diagnostics)?;
            }
            Ok(exit_for(&r.checked))
        }
        Command::Eval { file, set } => {
            let c = engine::check(&read(file)?, &catalog)?;
            let mut overrides = std::collections::BTreeMap::new();
            for s in set {
                let (id, v) = s.split_once('=').ok_or_else(|| UserError(format!("--set expects <id>=<value>, got `{s}`")))?;
                let id: u64 = id.trim().parse().map_err(|_| UserError(format!("`{id}` is not a node id")))?;
                let v: f64 = v.trim().parse().map_err(|_| UserError(format!("`{v}` is not a number")))?;
                overrides.insert(scriptflow_core::graph_ir::NodeId(id), v);
            }
            let result = engine::evaluate(&c.document, &overrides, &catalog)?;
            if io.json {
                write!(io.out, "{}", engine::body(&engine::eval_json(&result)))?;
            } else {
                for d in &result.diagnostics {
                    writeln!(io.out, "{}", diag_line(d))?;
                }
                for f in &result.failures {
                    writeln!(io.out, "node {} failed (origin {}): {}", f.node, f.origin, f.message)?;
                }
                for (id, v) in &result.drawables {
                    writeln!(io.out, "node {id}: {} drawable item(s)", v.drawable_count())?;
                }
                writeln!(io.out, "{} drawable item(s), {} failed node(s)", result.drawable_count(), result.failures.len())?;
            }
            Ok(if result.failures.is_empty() { 0 } else { 2 })
        }
        Command::Render { file, out, u, v } => {
            if *u < 2 || *v < 2 {
                return Err(UserError("--u and --v must be at least 2".into()));
            }
            let c = engine::check(&read(file)?, &catalog)?;
            let result = engine::evaluate(&c.document, &Default::default(), &catalog)?;
            let text = match out.extension().and_then(|e| e.to_str()) {
                Some("obj") => engine::render_obj(&result, *u, *v),
                Some("json") => engine::body(&engine::render_json(&result, *u, *v)),
                _ => return Err(UserError(format!("{}: output must end in .obj or .json", out.display()))),
            };
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(out, text)?;
            if !io.json {
                writeln!(io.out, "wrote {} ({} drawable item(s))", out.display(), result.drawable_count())?;
            }
            Ok(0)
        }
        Command::Registry => {
            if io.json {
                write!(io.out, "{}", engine::body(&engine::registry_json(&catalog)))?;
            } else {
                for c in catalog.components() {
                    let ports = |ps: &[scriptflow_core::registry::PortSpec]| ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ");
                    writeln!(io.out, "{:<16} {:<8} in: {}  out: {}", c.canonical_name, c.category.name(), ports(&c.inputs), ports(&c.outputs))?;
                }
            }
            Ok(0)
        }
        Command::Serve { port, host } => {
            let config = backend_config(cli)?;
            let backend = config.build().map_err(|e| UserError(e.to_string()))?;
            let state = AppState::new(catalog, Arc::from(backend));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(SocketAddr::new(*host, *port), state))?;
            Ok(0)
        }
    }
}

/// Runs the command line with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let mut io = Io { out, err, json: cli.json };
    match run_command(&cli, &mut io) {
        Ok(code) => code,
        Err(UserError(m)) => {
            let _ = writeln!(io.err, "error: {m}");
            1
        }
    }
}
