//! Command-line front-end: config loading, dispatch, and artifact output.
//!
//! Exit status is 0 on success, 2 for malformed configs (with the offending
//! field path), 1 for failures inside a computation.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use config::{FlowTask, Kind, Loaded};
use output::{Artifacts, Manifest};

#[derive(Debug)]
pub enum CliError {
    Schema { path: String, msg: String },
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema { path, msg } if path.is_empty() => write!(f, "config error: {msg}"),
            CliError::Schema { path, msg } => write!(f, "config error at `{path}`: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "weightflow", version, about = "Weight filtrations, metric flows and the punctured-cylinder curve flow")]
pub struct Cli {
    /// Output directory (default: `out/<config stem>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized inputs; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for configs with several independent runs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run any experiment config, dispatching on its `kind`.
    Run { config: PathBuf },
    /// Harder–Narasimhan and weight filtrations of a graph's ideal lattice.
    Lattice { config: PathBuf },
    /// Metric flow on a quiver representation.
    Flow {
        #[command(subcommand)]
        verb: FlowVerb,
    },
    /// Curve flow on the punctured cylinder and its reduced system.
    Csf {
        #[command(subcommand)]
        verb: CsfVerb,
    },
    /// Regenerate a figure.
    Reproduce { figure: Figure },
    /// Write the JSON schemas of every config kind.
    Schema {
        #[arg(long, default_value = "schemas")]
        dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum FlowVerb {
    /// Integrate and write the trajectory.
    Run { config: PathBuf },
    /// Lattice-side and flow-side stability verdicts.
    King { config: PathBuf },
    /// Construct and certify the asymptotic solution.
    Asymptotics { config: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum CsfVerb {
    Pde { config: PathBuf },
    Ode { config: PathBuf },
    Compare { config: PathBuf },
    Walls { config: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Figure {
    ChamberDiagrams,
}

/// What a finished command produced.
#[derive(Debug)]
pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: Option<Manifest>,
}

fn expect_kind(loaded: &Loaded, want: Kind) -> Result<(), CliError> {
    if loaded.config.kind != want {
        return Err(CliError::Schema {
            path: "kind".into(),
            msg: format!("this command needs kind `{}`, the config has `{}`", want.name(), loaded.config.kind.name()),
        });
    }
    Ok(())
}

fn run_config(cli: &Cli, path: &Path, want: Option<Kind>, task: Option<FlowTask>, verb: &str) -> Result<Outcome, CliError> {
    let loaded = config::load(path)?;
    if let Some(k) = want {
        expect_kind(&loaded, k)?;
    }
    let c = &loaded.config;
    let dir = cli
        .out
        .clone()
        .or_else(|| c.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(&loaded.stem));
    let seed = cli.seed.unwrap_or(c.seed);
    // Parse before creating any output so schema errors leave no artifacts.
    enum P {
        Lattice(config::LatticePayload),
        Flow(config::FlowPayload),
        Curve(config::CurvePayload),
        Ode(config::OdePayload),
        Walls(config::WallsPayload),
    }
    let payload = match c.kind {
        Kind::Lattice => P::Lattice(c.payload()?),
        Kind::Flow => P::Flow(c.payload()?),
        Kind::CsfPde | Kind::Compare => P::Curve(c.payload()?),
        Kind::CsfOde => P::Ode(c.payload()?),
        Kind::Walls => P::Walls(c.payload()?),
    };
    let mut art = Artifacts::new(&dir, &loaded.hash, seed)?;
    let mut ctx = commands::Ctx { art: &mut art, seed, svg: cli.svg || c.svg, jobs: cli.jobs.or(c.jobs).unwrap_or(1) };
    match payload {
        P::Lattice(p) => commands::lattice(&mut ctx, p)?,
        P::Flow(p) => {
            let task = task.unwrap_or(p.task);
            commands::flow(&mut ctx, p, task)?
        }
        P::Curve(p) if c.kind == Kind::CsfPde => commands::csf_pde(&mut ctx, p)?,
        P::Curve(p) => commands::compare(&mut ctx, p)?,
        P::Ode(p) => commands::csf_ode(&mut ctx, p)?,
        P::Walls(p) => commands::walls(&mut ctx, p)?,
    }
    let manifest = art.finish(verb, Some(c.kind.name()))?;
    Ok(Outcome { dir, manifest: Some(manifest) })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Run { config } => run_config(cli, config, None, None, "run"),
        Command::Lattice { config } => run_config(cli, config, Some(Kind::Lattice), None, "lattice"),
        Command::Flow { verb } => {
            let (config, task, name) = match verb {
                FlowVerb::Run { config } => (config, FlowTask::Run, "flow run"),
                FlowVerb::King { config } => (config, FlowTask::King, "flow king"),
                FlowVerb::Asymptotics { config } => (config, FlowTask::Asymptotics, "flow asymptotics"),
            };
            run_config(cli, config, Some(Kind::Flow), Some(task), name)
        }
        Command::Csf { verb } => {
            let (config, kind, name) = match verb {
                CsfVerb::Pde { config } => (config, Kind::CsfPde, "csf pde"),
                CsfVerb::Ode { config } => (config, Kind::CsfOde, "csf ode"),
                CsfVerb::Compare { config } => (config, Kind::Compare, "csf compare"),
                CsfVerb::Walls { config } => (config, Kind::Walls, "csf walls"),
            };
            run_config(cli, config, Some(kind), None, name)
        }
        Command::Reproduce { figure: Figure::ChamberDiagrams } => {
            let dir = cli.out.clone().unwrap_or_else(|| Path::new("out").join("chamber-diagrams"));
            let spec = serde_json::json!({
                "figure": "chamber-diagrams",
                "representatives": commands::CHAMBER_REPRESENTATIVES.iter().map(|(_, m)| m.to_vec()).collect::<Vec<_>>(),
            });
            let mut art = Artifacts::new(&dir, &config::hash_value(&spec), cli.seed.unwrap_or(0))?;
            commands::chamber_diagrams(&mut art)?;
            let manifest = art.finish("reproduce chamber-diagrams", None)?;
            Ok(Outcome { dir, manifest: Some(manifest) })
        }
        Command::Schema { dir } => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
            for (name, text) in config::all_schemas() {
                std::fs::write(dir.join(name), text).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            Ok(Outcome { dir: dir.clone(), manifest: None })
        }
    }
}

/// Parses `args`, runs the command, reports to stdout/stderr and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            match o.manifest {
                Some(m) => println!("wrote {} file(s) to {}", m.files.len(), o.dir.display()),
                None => println!("wrote schemas to {}", o.dir.display()),
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
