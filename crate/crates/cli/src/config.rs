//! Experiment configs: a versioned envelope with one payload schema per kind.
//! Unknown fields are rejected everywhere.

use std::path::Path;

use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use weightflow::csf::{CompareOptions, GridOptions, InitialCurve, PdeOptions, WallOptions};
use weightflow::flow::{AsymptoticOptions, FlowOptions};
use weightflow::lattice::FIG1_EPS;
use weightflow::lozenge::{Arrow, CMat, QuiverData, Vertex, C};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Lattice,
    Flow,
    CsfPde,
    CsfOde,
    Compare,
    Walls,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::Lattice, Kind::Flow, Kind::CsfPde, Kind::CsfOde, Kind::Compare, Kind::Walls];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Lattice => "lattice",
            Kind::Flow => "flow",
            Kind::CsfPde => "csf-pde",
            Kind::CsfOde => "csf-ode",
            Kind::Compare => "compare",
            Kind::Walls => "walls",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Schema version; must be 1.
    pub version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<String>,
    /// Also write SVG plots.
    #[serde(default)]
    pub svg: bool,
    /// Worker count for configs with several independent runs; `--jobs` takes precedence.
    #[serde(default)]
    pub jobs: Option<usize>,
    /// Kind-specific payload, see `schemas/<kind>.json`.
    pub payload: serde_json::Value,
}

/// A loaded config together with its hash.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub hash: String,
    pub stem: String,
}

fn schema_err(path: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Schema { path: path.into(), msg: msg.into() }
}

fn parse_at<T: DeserializeOwned>(v: serde_json::Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        schema_err(path, e.into_inner().to_string())
    })
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form.
pub fn hash_value(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("JSON values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| schema_err("", format!("malformed JSON: {e}")))?;
    let hash = hash_value(&value);
    let config: ExperimentConfig = parse_at(value, "")?;
    if config.version != CONFIG_VERSION {
        return Err(schema_err("version", format!("unsupported version {}, expected {CONFIG_VERSION}", config.version)));
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    Ok(Loaded { config, hash, stem })
}

impl ExperimentConfig {
    pub fn payload<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        parse_at(self.payload.clone(), "payload")
    }
}

/// A complex number: either a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum ComplexDto {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexDto {
    pub fn value(self) -> C {
        match self {
            ComplexDto::Real(x) => C::new(x, 0.0),
            ComplexDto::Pair([re, im]) => C::new(re, im),
        }
    }
}

/// Row-major matrix.
pub type MatrixDto = Vec<Vec<ComplexDto>>;

fn matrix(rows: &MatrixDto, r: usize, c: usize, path: &str) -> Result<CMat, CliError> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(schema_err(path, format!("expected a {r}×{c} matrix")));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j].value()))
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GraphDto {
    pub masses: Vec<f64>,
    /// Imaginary parts of the vertex charges; empty for a real polarization.
    #[serde(default)]
    pub imag: Vec<f64>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CycleDto {
    pub masses: Vec<f64>,
    /// Arrow orientations; defaults to the five-segment example.
    #[serde(default)]
    pub eps: Option<Vec<i8>>,
}

impl CycleDto {
    pub fn eps(&self) -> Vec<i8> {
        self.eps.clone().unwrap_or_else(|| FIG1_EPS.to_vec())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticePayload {
    Graph(GraphDto),
    Cycle(CycleDto),
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VertexDto {
    #[serde(default = "one")]
    pub dim: usize,
    pub mass: f64,
    #[serde(default)]
    pub rho: f64,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ArrowDto {
    pub source: usize,
    pub target: usize,
    /// `d_target × d_source` matrix.
    pub alpha: MatrixDto,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct QuiverDto {
    pub vertices: Vec<VertexDto>,
    #[serde(default)]
    pub arrows: Vec<ArrowDto>,
}

impl QuiverDto {
    pub fn build(&self) -> Result<QuiverData, CliError> {
        let vertices: Vec<Vertex> =
            self.vertices.iter().map(|v| Vertex { dim: v.dim, mass: v.mass, rho: v.rho }).collect();
        let mut arrows = vec![];
        for (k, a) in self.arrows.iter().enumerate() {
            let path = format!("payload.quiver.arrows[{k}]");
            let (Some(s), Some(t)) = (vertices.get(a.source), vertices.get(a.target)) else {
                return Err(schema_err(path, "arrow refers to a missing vertex"));
            };
            let alpha = matrix(&a.alpha, t.dim, s.dim, &format!("{path}.alpha"))?;
            arrows.push(Arrow { source: a.source, target: a.target, alpha });
        }
        let q = QuiverData { vertices, arrows };
        q.validate().map_err(|e| schema_err("payload.quiver", e.to_string()))?;
        Ok(q)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum FlowTask {
    #[default]
    Run,
    King,
    Asymptotics,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialMetric {
    #[default]
    Identity,
    /// `exp` of a random Hermitian matrix per vertex with entries in `[−scale, scale]`, drawn from the seed.
    Random { scale: f64 },
    /// One Hermitian positive block per vertex.
    Blocks(Vec<MatrixDto>),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FlowTolerances {
    pub tol: Option<f64>,
    pub dt0: Option<f64>,
    pub dt_rel: Option<f64>,
    pub max_steps: Option<usize>,
}

impl FlowTolerances {
    pub fn options(&self) -> FlowOptions {
        let d = FlowOptions::default();
        FlowOptions {
            tol: self.tol.unwrap_or(d.tol),
            dt0: self.dt0.unwrap_or(d.dt0),
            dt_rel: self.dt_rel.unwrap_or(d.dt_rel),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticWindow {
    pub t_min: Option<f64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FlowPayload {
    /// Default action for `run`; `flow run|king|asymptotics` override it.
    #[serde(default)]
    pub task: FlowTask,
    pub quiver: QuiverDto,
    #[serde(default)]
    pub h0: InitialMetric,
    #[serde(default = "default_flow_t_end")]
    pub t_end: f64,
    #[serde(default = "default_flow_t_first")]
    pub t_first: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tolerances: FlowTolerances,
    #[serde(default)]
    pub asymptotic: AsymptoticWindow,
}

fn default_flow_t_end() -> f64 {
    50.0
}

fn default_flow_t_first() -> f64 {
    0.1
}

fn default_samples() -> usize {
    41
}

impl FlowPayload {
    pub fn asymptotic_options(&self) -> AsymptoticOptions {
        let d = AsymptoticOptions::default();
        AsymptoticOptions {
            t_min: self.asymptotic.t_min.unwrap_or(d.t_min),
            t_end: self.asymptotic.t_end.unwrap_or(d.t_end),
            samples: self.asymptotic.samples.unwrap_or(d.samples),
            flow: self.tolerances.options(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CylinderDto {
    #[serde(rename = "L")]
    pub l: f64,
    pub punctures: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveDto {
    Fourier {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Knots { x: Vec<f64>, y: Vec<f64> },
}

impl CurveDto {
    pub fn curve(&self) -> InitialCurve {
        match self {
            CurveDto::Fourier { c0, cos, sin } => InitialCurve::Fourier { c0: *c0, cos: cos.clone(), sin: sin.clone() },
            CurveDto::Knots { x, y } => InitialCurve::Knots { x: x.clone(), y: y.clone() },
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridDto {
    pub ratio: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub uniform_nodes: Option<usize>,
}

impl GridDto {
    pub fn options(&self) -> GridOptions {
        let d = GridOptions::default();
        GridOptions {
            ratio: self.ratio.unwrap_or(d.ratio),
            h_min: self.h_min.unwrap_or(d.h_min),
            h_max: self.h_max.unwrap_or(d.h_max),
            uniform_nodes: self.uniform_nodes.unwrap_or(d.uniform_nodes),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PdeDto {
    pub dt0: Option<f64>,
    pub dt_growth: Option<f64>,
    pub dt_rel: Option<f64>,
    pub dt_max: Option<f64>,
    pub max_change: Option<f64>,
    pub newton_tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub max_steps: Option<usize>,
}

impl PdeDto {
    pub fn options(&self) -> PdeOptions {
        let d = PdeOptions::default();
        PdeOptions {
            dt0: self.dt0.unwrap_or(d.dt0),
            dt_growth: self.dt_growth.unwrap_or(d.dt_growth),
            dt_rel: self.dt_rel.unwrap_or(d.dt_rel),
            dt_max: self.dt_max.unwrap_or(d.dt_max),
            max_change: self.max_change.unwrap_or(d.max_change),
            newton_tol: self.newton_tol.unwrap_or(d.newton_tol),
            max_newton: self.max_newton.unwrap_or(d.max_newton),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
        }
    }
}

/// Shared by `csf-pde` and `compare`.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CurvePayload {
    pub cylinder: CylinderDto,
    pub curve: CurveDto,
    pub t_end: f64,
    #[serde(default = "default_t_first")]
    pub t_first: f64,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(default)]
    pub grid: GridDto,
    #[serde(default)]
    pub pde: PdeDto,
    /// Times of the `f(x, t)` snapshots written to `profiles.csv` and plotted.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn default_t_first() -> f64 {
    1e-3
}

fn default_per_decade() -> usize {
    20
}

impl CurvePayload {
    pub fn compare_options(&self) -> CompareOptions {
        CompareOptions { t_first: self.t_first, per_decade: self.per_decade, pde: self.pde.options() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OdePayload {
    pub graph: CycleDto,
    /// Initial `y_i` at `t0`; drawn log-uniformly from `[0.01, 1]` with the seed when absent.
    #[serde(default)]
    pub y0: Option<Vec<f64>>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

fn default_t0() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WindowDto {
    pub s_lo: Option<f64>,
    pub s_hi: Option<f64>,
    pub points: Option<usize>,
}

impl WindowDto {
    pub fn options(&self) -> WallOptions {
        let d = WallOptions::default();
        WallOptions {
            s_lo: self.s_lo.unwrap_or(d.s_lo),
            s_hi: self.s_hi.unwrap_or(d.s_hi),
            points: self.points.unwrap_or(d.points),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WallsPayload {
    /// Segment lengths `(m₁, …, m₅)` of the five-segment example, one run each.
    pub masses: Vec<[f64; 5]>,
    /// Initial `v` at `s = 0`; zero when absent.
    #[serde(default)]
    pub v0: Option<[f64; 5]>,
    #[serde(default)]
    pub window: WindowDto,
}

pub fn envelope_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
}

pub fn payload_schema(kind: Kind) -> serde_json::Value {
    let s = match kind {
        Kind::Lattice => schemars::schema_for!(LatticePayload),
        Kind::Flow => schemars::schema_for!(FlowPayload),
        Kind::CsfPde | Kind::Compare => schemars::schema_for!(CurvePayload),
        Kind::CsfOde => schemars::schema_for!(OdePayload),
        Kind::Walls => schemars::schema_for!(WallsPayload),
    };
    serde_json::to_value(s).expect("schema serializes")
}

/// `(file name, pretty JSON)` for every shipped schema.
pub fn all_schemas() -> Vec<(String, String)> {
    let mut out = vec![("experiment.json".to_string(), envelope_schema())];
    out.extend(Kind::ALL.iter().map(|&k| (format!("{}.json", k.name()), payload_schema(k))));
    out.into_iter().map(|(n, v)| (n, serde_json::to_string_pretty(&v).unwrap() + "\n")).collect()
}
