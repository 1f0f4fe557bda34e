//! Command-line surface and run orchestration.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use varcap::algebra::rational_to_f64;
use varcap::chebyshev::{chebyshev_transform, default_margin, ChebyshevError, MinimaxOptions, NumericBasis};
use varcap::diameter::{
    circled_equality, diameters, fekete_search, homogeneous_identity, integral_formula_compare, projection_invariance,
    zaharjuta_tau, DiameterError, FeketeConfig, FeketeStrategy,
};
use varcap::fixtures::sphere_circle_chart;
use varcap::ideals::{buchberger, IdealError, DEFAULT_PAIR_BUDGET};
use varcap::okounkov::{okounkov_body, OkounkovError, OkounkovResult};
use varcap::series::{SeriesError, DEFAULT_D_MAX};
use varcap::sets::{
    circled_sample, sample_random_sphere, sample_real_sphere, sphere_variety, CircleAction, OrbitArc, SetsError,
    SphereSeed, VarietyPointCloud, DEFAULT_RESIDUAL_TOL,
};

use crate::io::{read_cloud, read_variety, CloudData, IoError, Variety};
use crate::report::{complex, exponent, fmt_float, num, rational, rationals, ArtifactWriter};

/// Largest `k` accepted on the command line.
pub const K_MAX_GUARD: u32 = 16;
/// Default tolerance of the circled-set comparison.
pub const CIRCLED_TOLERANCE: f64 = 5e-3;

#[derive(Parser, Debug)]
#[command(name = "varcap", version, about = "Okounkov bodies, Chebyshev constants and transfinite diameters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Echo the generators in canonical form.
    Parse,
    /// Reduced Groebner basis (grevlex).
    Groebner,
    /// Okounkov body from N_1, ..., N_kmax.
    Okounkov,
    /// Chebyshev transform log T_k over N_k / k.
    Cheb,
    /// Fekete points and V_k at one degree.
    Fekete,
    /// d_k sequence for k = 1..kmax.
    Tdiam,
    /// Run comparison harnesses.
    Compare {
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Harness::Sandwich, Harness::Integral])]
        harness: Vec<Harness>,
    },
    /// Built-in end-to-end pipelines.
    Demo {
        #[arg(value_enum)]
        target: DemoTarget,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Harness {
    Sandwich,
    Integral,
    Homogeneous,
    Projection,
    Circled,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoTarget {
    Sphere,
    Circle,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Exchange,
    Exhaustive,
}

impl From<Strategy> for FeketeStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Greedy => FeketeStrategy::Greedy,
            Strategy::Exchange => FeketeStrategy::Exchange,
            Strategy::Exhaustive => FeketeStrategy::Exhaustive,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Options {
    /// Variety description (JSON).
    #[arg(long, global = true)]
    pub variety: Option<PathBuf>,
    /// Point cloud (JSON, or CSV by extension).
    #[arg(long, global = true)]
    pub cloud: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true)]
    pub kmax: Option<u32>,
    /// Relative duality gap required of every minimax solve.
    #[arg(long = "gap-tol", global = true, default_value_t = 1e-8)]
    pub gap_tol: f64,
    /// Accepted generator residual for cloud points.
    #[arg(long = "residual-tol", global = true, default_value_t = DEFAULT_RESIDUAL_TOL)]
    pub residual_tol: f64,
    /// Boundary margin for interior Chebyshev averages (default: 5% of the body diameter).
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    #[arg(long = "circled-tol", global = true, default_value_t = CIRCLED_TOLERANCE)]
    pub circled_tol: f64,
    /// Seed for sampled clouds and exchange sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, value_enum, default_value_t = Strategy::Exchange)]
    pub strategy: Strategy,
    /// Subset count up to which the exhaustive strategy enumerates.
    #[arg(long = "exhaustive-cap", global = true, default_value_t = 200_000)]
    pub exhaustive_cap: u64,
    /// Cap on the adaptive series precision.
    #[arg(long = "dmax", global = true, default_value_t = DEFAULT_D_MAX)]
    pub d_max: u32,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("cannot write artifacts: {0}")]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Okounkov(#[from] OkounkovError),
    #[error(transparent)]
    Diameter(#[from] DiameterError),
    #[error(transparent)]
    Chebyshev(#[from] ChebyshevError),
    #[error(transparent)]
    Sets(#[from] SetsError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("not certified: {0}")]
    Uncertified(String),
    #[error("gate failed: {0}")]
    Gate(String),
}

impl CliError {
    /// 1 invalid input, 2 numerical non-certification, 3 internal gate failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Sets(_) | CliError::Ideal(_) | CliError::Series(_) => 1,
            CliError::Uncertified(_) => 2,
            CliError::Okounkov(e) => match e {
                OkounkovError::PrecisionExhausted(_) | OkounkovError::InsufficientPrecision(_) => 2,
                OkounkovError::Series(_) | OkounkovError::Ideal(_) | OkounkovError::KMaxTooSmall => 1,
                _ => 3,
            },
            CliError::Diameter(e) => match e {
                DiameterError::NotCertified(_) => 2,
                DiameterError::Chebyshev(_) | DiameterError::Sets(_) => 1,
                DiameterError::CloudTooSmall { .. }
                | DiameterError::PointCount { .. }
                | DiameterError::NotOnAffinePatch(_)
                | DiameterError::TauUndefined(_)
                | DiameterError::KZero => 1,
                DiameterError::DimsTooShort { .. } => 3,
            },
            CliError::Chebyshev(_) => 1,
            CliError::Write(_) | CliError::Gate(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "invalid_input",
            2 => "not_certified",
            _ => "internal_gate",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() })
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Everything a command needs after flag validation.
pub struct Context {
    pub command: Command,
    pub opts: Options,
    pub minimax: MinimaxOptions,
    pub fekete: FeketeConfig,
}

impl Context {
    pub fn new(cli: Cli) -> Result<Self> {
        let o = &cli.opts;
        for (name, v) in [("gap-tol", Some(o.gap_tol)), ("residual-tol", Some(o.residual_tol)), ("margin", o.margin), ("circled-tol", Some(o.circled_tol))] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [("k", o.k), ("kmax", o.kmax)] {
            match v {
                Some(0) => return Err(CliError::Usage(format!("--{name} must be at least 1"))),
                Some(v) if v > K_MAX_GUARD => {
                    return Err(CliError::Usage(format!("--{name} {v} exceeds the guard {K_MAX_GUARD}")))
                }
                _ => {}
            }
        }
        if o.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        Ok(Context {
            minimax: MinimaxOptions { gap_tol: o.gap_tol, ..MinimaxOptions::default() },
            fekete: FeketeConfig { strategy: o.strategy.into(), exhaustive_cap: o.exhaustive_cap, seed: o.seed },
            command: cli.command,
            opts: cli.opts,
        })
    }

    /// The resolved configuration embedded in every artifact. Thread count
    /// and output directory are left out so artifacts compare byte-for-byte.
    fn config(&self, extra: Value) -> Value {
        let mut c = json!({
            "command": self.command,
            "options": self.opts,
            "minimax": { "gap_tol": num(self.minimax.gap_tol), "max_iterations": self.minimax.max_iterations },
            "fekete": self.fekete,
        });
        if let (Value::Object(c), Value::Object(e)) = (&mut c, extra) {
            c.extend(e);
        }
        c
    }

    fn writer(&self, extra: Value) -> Result<ArtifactWriter> {
        Ok(ArtifactWriter::new(&self.opts.out, self.config(extra))?)
    }

    fn variety(&self) -> Result<Variety> {
        let path = self.opts.variety.as_ref().ok_or_else(|| CliError::Usage("--variety is required".into()))?;
        Ok(read_variety(path)?)
    }

    fn cloud_data(&self) -> Result<CloudData> {
        let path = self.opts.cloud.as_ref().ok_or_else(|| CliError::Usage("--cloud is required".into()))?;
        Ok(read_cloud(path)?)
    }

    /// The variety (or `C^n` matching the cloud) together with the cloud.
    fn variety_and_cloud(&self) -> Result<(Variety, VarietyPointCloud)> {
        let data = self.cloud_data()?;
        let variety = match &self.opts.variety {
            Some(_) => self.variety()?,
            None => Variety::plane(data.nvars()),
        };
        let cloud = data.into_cloud(Some(&variety), self.opts.residual_tol)?;
        Ok((variety, cloud))
    }

    fn k(&self) -> Result<u32> {
        self.opts.k.or(self.opts.kmax).ok_or_else(|| CliError::Usage("--k is required".into()))
    }

    fn kmax(&self, default: u32) -> u32 {
        self.opts.kmax.or(self.opts.k).unwrap_or(default)
    }
}

/// Output of one command: stdout summary entries.
#[derive(Default)]
pub struct Summary {
    entries: Vec<(String, Value)>,
}

impl Summary {
    fn put(&mut self, key: &str, value: Value) {
        self.entries.push((key.to_string(), value));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let map: serde_json::Map<String, Value> = self.entries.iter().cloned().collect();
                serde_json::to_string_pretty(&Value::Object(map)).expect("serializable")
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"]).expect("in-memory write");
                for (k, v) in &self.entries {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    w.write_record([k.as_str(), v.as_str()]).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush")).expect("utf8").trim_end().to_string()
            }
        }
    }
}

pub fn execute(ctx: &Context) -> Result<Summary> {
    let mut summary = Summary::default();
    let outcome = match &ctx.command {
        Command::Parse => parse(ctx, &mut summary),
        Command::Groebner => groebner(ctx, &mut summary),
        Command::Okounkov => okounkov(ctx, &mut summary),
        Command::Cheb => cheb(ctx, &mut summary),
        Command::Fekete => fekete(ctx, &mut summary),
        Command::Tdiam => tdiam(ctx, &mut summary),
        Command::Compare { harness } => compare(ctx, harness, &mut summary),
        Command::Demo { target: DemoTarget::Sphere } => demo_sphere(ctx, &mut summary),
        Command::Demo { target: DemoTarget::Circle } => demo_circle(ctx, &mut summary),
    };
    outcome.map(|()| summary)
}

fn parse(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let v = ctx.variety()?;
    summary.put("variables", json!(v.variables().names()));
    summary.put("ideal", json!(v.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>()));
    Ok(())
}

fn groebner(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let v = ctx.variety()?;
    let gb = buchberger(&v.ideal, DEFAULT_PAIR_BUDGET)?;
    let basis: Vec<String> = gb.elements().iter().map(|g| g.to_string()).collect();
    let mut w = ctx.writer(json!({}))?;
    w.json(
        "groebner.json",
        json!({
            "variables": v.variables().names(),
            "order": "grevlex",
            "basis": basis,
            "leading_monomials": gb.leading_monomials().iter().map(exponent).collect::<Vec<_>>(),
        }),
    )?;
    summary.put("basis", json!(basis));
    summary.put("artifacts", written(&w));
    Ok(())
}

fn written(w: &ArtifactWriter) -> Value {
    json!(w.written().iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>())
}

fn body(ctx: &Context, variety: &Variety, k_max: u32) -> Result<OkounkovResult> {
    let chart = variety.chart(2 * k_max + 4)?;
    Ok(okounkov_body(&chart, k_max, ctx.opts.d_max)?)
}

fn okounkov_json(result: &OkounkovResult) -> Value {
    let stages: Vec<Value> = result
        .stages
        .iter()
        .map(|s| {
            json!({
                "k": s.nu_set.k,
                "m_k": s.nu_set.m_k,
                "nu": s.nu_set.points().iter().map(exponent).collect::<Vec<_>>(),
                "hull_vertices": s.hull.vertices().iter().map(|v| rationals(v)).collect::<Vec<_>>(),
                "hull_volume": rational(s.hull.volume()),
                "cumulative_vertices": s.cumulative.vertices().iter().map(|v| rationals(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "k_max": result.k_max(),
        "precision": result.precision,
        "stabilized": result.stabilized,
        "body_vertices": result.body.vertices().iter().map(|v| rationals(v)).collect::<Vec<_>>(),
        "volume": rational(result.volume()),
        "monotonicity_violations": result.monotonicity_violations,
        "stages": stages,
    })
}

fn write_okounkov(w: &mut ArtifactWriter, result: &OkounkovResult) -> Result<()> {
    w.json("okounkov.json", okounkov_json(result))?;
    let m = result.body.dim();
    let mut columns = vec!["stage".to_string(), "vertex".to_string()];
    columns.extend((1..=m).map(|j| format!("theta_{j}")));
    columns.extend((1..=m).map(|j| format!("x_{j}")));
    let mut rows = Vec::new();
    let mut push = |stage: String, vertices: &[Vec<varcap::algebra::Rational>]| {
        for (i, v) in vertices.iter().enumerate() {
            let mut row = vec![stage.clone(), i.to_string()];
            row.extend(v.iter().map(varcap::algebra::rational_string));
            row.extend(v.iter().map(|r| fmt_float(rational_to_f64(r))));
            rows.push(row);
        }
    };
    for s in &result.stages {
        push(s.nu_set.k.to_string(), s.hull.vertices());
    }
    push("body".into(), result.body.vertices());
    w.csv("okounkov.csv", &columns, &rows)?;
    Ok(())
}

fn okounkov(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let variety = ctx.variety()?;
    let k_max = ctx.kmax(4);
    let result = body(ctx, &variety, k_max)?;
    let mut w = ctx.writer(json!({ "k_max": k_max }))?;
    write_okounkov(&mut w, &result)?;
    summary.put("volume", rational(result.volume()));
    summary.put("stabilized", json!(result.stabilized));
    summary.put("artifacts", written(&w));
    if !result.monotonicity_violations.is_empty() {
        return Err(CliError::Gate(format!("Δ_k ⊆ Δ_rk failed for {:?}", result.monotonicity_violations)));
    }
    Ok(())
}

/// Bases `B_1..B_kmax` and `dims[s] = M_s` for the variety's chart.
fn bases(result: &OkounkovResult) -> (Vec<NumericBasis>, Vec<usize>) {
    let bases: Vec<NumericBasis> = result.stages.iter().map(|s| NumericBasis::from_nu_set(&s.nu_set)).collect();
    let mut dims = vec![1];
    dims.extend(result.stages.iter().map(|s| s.nu_set.m_k));
    (bases, dims)
}

fn transform_rows(grid: &varcap::chebyshev::ChebyshevTransformGrid) -> Vec<Vec<String>> {
    grid.entries
        .iter()
        .map(|e| {
            let mut row = vec![grid.k.to_string()];
            row.extend(e.theta.iter().map(varcap::algebra::rational_string));
            row.push(fmt_float(e.value.log_t));
            row.push(u8::from(e.value.certified()).to_string());
            row.push(fmt_float(e.value.log_t_lower));
            row.push(u8::from(e.interior).to_string());
            row
        })
        .collect()
}

fn transform_columns(m: usize) -> Vec<String> {
    let mut columns = vec!["k".to_string()];
    columns.extend((1..=m).map(|j| format!("theta_{j}")));
    columns.extend(["log_T", "certified", "log_T_lower", "interior"].map(String::from));
    columns
}

/// Writes `cheb_transform.csv` for degree `k`; errors if any value is uncertified.
fn run_transform(
    ctx: &Context,
    w: &mut ArtifactWriter,
    cloud: &VarietyPointCloud,
    result: &OkounkovResult,
    k: u32,
    summary: &mut Summary,
) -> Result<()> {
    let basis = NumericBasis::from_nu_set(&result.stage(k).expect("computed stage").nu_set);
    let margin = ctx.opts.margin.unwrap_or_else(|| default_margin(&result.body));
    let grid = chebyshev_transform(cloud, &basis, margin, &result.body, &ctx.minimax)?;
    w.csv("cheb_transform.csv", &transform_columns(result.body.dim()), &transform_rows(&grid))?;
    summary.put("cheb_full_average", grid.full_average().map_or(Value::Null, num));
    summary.put("cheb_interior_average", grid.interior_average().map_or(Value::Null, num));
    if !grid.all_certified() {
        let bad: Vec<String> = grid.entries.iter().filter(|e| !e.value.certified()).map(|e| e.value.alpha.to_string()).collect();
        return Err(CliError::Uncertified(format!("T_{k} at {}", bad.join(", "))));
    }
    Ok(())
}

fn cheb(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let (variety, cloud) = ctx.variety_and_cloud()?;
    let k = ctx.k()?;
    let result = body(ctx, &variety, k)?;
    let mut w = ctx.writer(json!({ "k": k }))?;
    let outcome = run_transform(ctx, &mut w, &cloud, &result, k, summary);
    summary.put("artifacts", written(&w));
    outcome
}

fn fekete(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let (variety, cloud) = ctx.variety_and_cloud()?;
    let k = ctx.k()?;
    let result = body(ctx, &variety, k)?;
    let basis = NumericBasis::from_nu_set(&result.stage(k).expect("computed stage").nu_set);
    let res = fekete_search(&basis.evaluate(&cloud, k), &ctx.fekete)?;
    let mut w = ctx.writer(json!({ "k": k }))?;
    w.json(
        "fekete.json",
        json!({
            "k": k,
            "m_k": basis.len(),
            "strategy": res.strategy,
            "exact": res.exact,
            "log_v": num(res.log_v),
            "indices": res.points,
            "points": res.points.iter().map(|&i| cloud.points()[i].iter().map(|z| complex(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
    )?;
    summary.put("log_v", num(res.log_v));
    summary.put("exact", json!(res.exact));
    summary.put("artifacts", written(&w));
    Ok(())
}

fn diameter_artifacts(
    w: &mut ArtifactWriter,
    cloud: &VarietyPointCloud,
    bases: &[NumericBasis],
    dims: &[usize],
    config: &FeketeConfig,
    summary: &mut Summary,
) -> Result<()> {
    let report = diameters(cloud, bases, dims, config)?;
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "k": r.norm.k,
                "m_k": r.norm.m_k,
                "h_k": r.norm.h_k,
                "l_k": r.norm.l_k,
                "ratio": rational(&r.norm.ratio()),
                "log_v": num(r.log_v),
                "log_d_k": num(r.log_d_k),
                "d_k": num(r.log_d_k.exp()),
                "log_d_classical": num(r.log_d_classical),
                "log_d_homogeneous": num(r.log_d_homogeneous),
                "strategy": r.fekete.strategy,
                "exact": r.fekete.exact,
                "fekete_indices": r.fekete.points,
            })
        })
        .collect();
    w.json("diameter.json", json!({ "rows": rows, "trend_advisory": report.trend.map_or(Value::Null, num) }))?;
    let columns: Vec<String> =
        ["k", "m_k", "l_k", "ratio", "log_v", "log_d_k", "d_k", "d_classical", "d_homogeneous", "exact"].map(String::from).to_vec();
    let table: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.norm.k.to_string(),
                r.norm.m_k.to_string(),
                r.norm.l_k.to_string(),
                varcap::algebra::rational_string(&r.norm.ratio()),
                fmt_float(r.log_v),
                fmt_float(r.log_d_k),
                fmt_float(r.log_d_k.exp()),
                fmt_float(r.log_d_classical.exp()),
                fmt_float(r.log_d_homogeneous.exp()),
                u8::from(r.fekete.exact).to_string(),
            ]
        })
        .collect();
    w.csv("dk_sequence.csv", &columns, &table)?;
    summary.put("d_k", json!(report.rows.iter().map(|r| num(r.log_d_k.exp())).collect::<Vec<_>>()));
    Ok(())
}

fn tdiam(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let (variety, cloud) = ctx.variety_and_cloud()?;
    let k_max = ctx.kmax(4);
    let result = body(ctx, &variety, k_max)?;
    let (bases, dims) = bases(&result);
    let mut w = ctx.writer(json!({ "k_max": k_max }))?;
    diameter_artifacts(&mut w, &cloud, &bases, &dims, &ctx.fekete, summary)?;
    summary.put("artifacts", written(&w));
    Ok(())
}

fn sandwich_rows(report: &varcap::diameter::IntegralReport) -> Vec<Vec<String>> {
    report
        .sandwiches
        .iter()
        .zip(&report.rows)
        .map(|(s, r)| {
            vec![
                s.k.to_string(),
                s.m_k.to_string(),
                u8::from(s.exact).to_string(),
                fmt_float(s.log_v),
                fmt_float(s.sum_log_norm),
                fmt_float(s.sum_log_lower),
                fmt_float(s.log_factorial),
                fmt_float(s.slack),
                fmt_float(s.lower_margin),
                fmt_float(s.upper_margin),
                s.lower_holds.map_or("".into(), |b| u8::from(b).to_string()),
                u8::from(s.upper_holds).to_string(),
                fmt_float(r.deviation),
                fmt_float(r.bound),
                u8::from(r.within_bound).to_string(),
            ]
        })
        .collect()
}

const SANDWICH_COLUMNS: [&str; 15] = [
    "k",
    "m_k",
    "exact",
    "log_v",
    "sum_log_t",
    "sum_log_t_lower",
    "log_m_k_factorial",
    "slack",
    "lower_margin",
    "upper_margin",
    "lower_holds",
    "upper_holds",
    "deviation",
    "bound",
    "within_bound",
];

fn integral_json(report: &varcap::diameter::IntegralReport) -> Value {
    json!(report
        .sandwiches
        .iter()
        .zip(&report.rows)
        .map(|(s, r)| json!({
            "k": s.k,
            "m_k": s.m_k,
            "exact": s.exact,
            "log_v": num(s.log_v),
            "sum_log_t": num(s.sum_log_norm),
            "sum_log_t_lower": num(s.sum_log_lower),
            "log_m_k_factorial": num(s.log_factorial),
            "slack": num(s.slack),
            "lower_holds": s.lower_holds,
            "upper_holds": s.upper_holds,
            "log_d_k": num(r.log_d_k),
            "mean_log_t": num(r.mean_log_t),
            "deviation": num(r.deviation),
            "bound": num(r.bound),
            "within_bound": r.within_bound,
            "log_t": s.values.iter().map(|v| json!({
                "alpha": exponent(&v.alpha),
                "log_t": num(v.log_t),
                "log_t_lower": num(v.log_t_lower),
                "certified": v.certified(),
            })).collect::<Vec<_>>(),
        }))
        .collect::<Vec<_>>())
}

/// Checks the sandwich gates: exit 3 if a decided inequality fails.
fn sandwich_gate(report: &varcap::diameter::IntegralReport) -> Result<()> {
    for s in &report.sandwiches {
        if !s.upper_holds || s.lower_holds == Some(false) {
            return Err(CliError::Gate(format!("sandwich inequality fails at k = {}", s.k)));
        }
    }
    Ok(())
}

fn circled_json(report: &varcap::diameter::CircledReport) -> Value {
    json!({
        "k": report.k,
        "tolerance": num(report.tolerance),
        "max_difference": num(report.max_difference),
        "hypothesis_violated": report.hypothesis_violated,
        "entries": report.entries.iter().map(|e| json!({
            "alpha": exponent(&e.alpha),
            "log_restricted": num(e.log_restricted),
            "log_full": num(e.log_full),
            "difference": num(e.difference),
            "certified": e.certified,
        })).collect::<Vec<_>>(),
    })
}

fn projection_json(r: &varcap::diameter::ProjectionReport) -> Value {
    json!({
        "k": r.k,
        "m_k": r.m_k,
        "l_k": r.l_k,
        "exponent": rational(&r.exponent),
        "log_v": num(r.log_v),
        "log_v_projected": num(r.log_v_projected),
        "v_relative_difference": num(r.v_relative_difference),
        "swap_relative_difference": num(r.swap_relative_difference),
        "log_d_subfamily": num(r.log_d_subfamily),
        "log_d_projected_classical": num(r.log_d_projected_classical),
        "exponent_relation_difference": num(r.exponent_relation_difference),
    })
}

fn homogeneous_json(r: &varcap::diameter::HomogeneousReport) -> Value {
    json!({
        "k": r.k,
        "n": r.n,
        "h_k": r.h_k,
        "log_vdmh": num(r.log_vdmh),
        "log_vdm_chart": num(r.log_vdm_chart),
        "relative_difference": num(r.relative_difference),
    })
}

fn compare(ctx: &Context, harnesses: &[Harness], summary: &mut Summary) -> Result<()> {
    let (variety, cloud) = ctx.variety_and_cloud()?;
    let k_max = ctx.kmax(2);
    let mut w = ctx.writer(json!({ "k_max": k_max }))?;
    let mut doc = serde_json::Map::new();
    let mut gate = Ok(());
    let needs_body = harnesses.iter().any(|h| matches!(h, Harness::Sandwich | Harness::Integral | Harness::Circled));
    let result = if needs_body { Some(body(ctx, &variety, k_max)?) } else { None };
    if harnesses.iter().any(|h| matches!(h, Harness::Sandwich | Harness::Integral)) {
        let (bases, _) = bases(result.as_ref().expect("body computed"));
        let report = integral_formula_compare(&cloud, &bases, &ctx.fekete, &ctx.minimax)?;
        w.csv("sandwich.csv", &SANDWICH_COLUMNS.map(String::from), &sandwich_rows(&report))?;
        doc.insert("sandwich".into(), integral_json(&report));
        gate = gate.and(sandwich_gate(&report));
    }
    if harnesses.contains(&Harness::Homogeneous) {
        let reports = (1..=k_max)
            .map(|k| {
                let h_k = varcap::diameter::homogeneous_exponents(cloud.nvars(), k).len();
                if cloud.len() < h_k {
                    return Err(DiameterError::PointCount { found: cloud.len(), expected: h_k });
                }
                homogeneous_identity(&cloud.points()[..h_k], k)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        doc.insert("homogeneous".into(), json!(reports.iter().map(homogeneous_json).collect::<Vec<_>>()));
    }
    if harnesses.contains(&Harness::Projection) {
        let split = variety.split.as_ref().ok_or(IoError::Missing("noether_split"))?;
        let [fiber] = split.y() else {
            return Err(CliError::Usage("projection needs exactly one y-variable".into()));
        };
        let r = projection_invariance(&cloud, k_max, split.x(), *fiber, &ctx.fekete)?;
        doc.insert("projection".into(), projection_json(&r));
    }
    if harnesses.contains(&Harness::Circled) {
        let result = result.as_ref().expect("body computed");
        let coords = variety.split.as_ref().ok_or(IoError::Missing("noether_split"))?.x().to_vec();
        let reports = (1..=k_max)
            .map(|k| {
                let basis = NumericBasis::from_nu_set(&result.stage(k).expect("computed stage").nu_set);
                circled_equality(&cloud, &basis, &coords, ctx.opts.circled_tol, &ctx.minimax)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if let Some(r) = reports.iter().find(|r| r.entries.iter().any(|e| !e.certified)) {
            gate = gate.and(Err(CliError::Uncertified(format!("circled comparison at k = {}", r.k))));
        }
        summary.put("circled_max_difference", num(reports.iter().map(|r| r.max_difference).fold(0.0, f64::max)));
        doc.insert("circled".into(), json!(reports.iter().map(circled_json).collect::<Vec<_>>()));
    }
    w.json("comparisons.json", Value::Object(doc))?;
    summary.put("artifacts", written(&w));
    gate
}

/// Seeds of the circled sphere orbits: affine `z1 = w`, `z2 = r`.
const CIRCLED_SEEDS: [((f64, f64), f64); 4] = [((0.3, 0.1), 1.4), ((-0.2, 0.4), 1.8), ((0.5, -0.3), 2.5), ((0.1, 0.0), 1.2)];
const CIRCLED_ANGLES: usize = 256;
const CIRCLED_WINDOW: f64 = 0.9;
const SPHERE_CLOUD_SIZE: usize = 200;
const SANDWICH_SIZES: [(u32, usize); 2] = [(1, 8), (2, 11)];

fn sphere_file_variety() -> Variety {
    let (vars, g) = sphere_variety();
    Variety {
        ideal: varcap::ideals::Ideal::new(&vars, vec![g]).expect("sphere ideal"),
        split: Some(varcap::ideals::NoetherSplit::new(vec![0, 1], vec![2], 3).expect("split")),
        base_point: Some(vec![
            Default::default(),
            Default::default(),
            varcap::algebra::GaussianRational::from_int(1),
        ]),
    }
}

/// Sphere pipeline: body, transform, diameters and every comparison harness.
fn demo_sphere(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let k_max = ctx.kmax(4);
    let k_cheb = k_max.min(3);
    let variety = sphere_file_variety();
    let result = body(ctx, &variety, k_max)?;
    let cloud = sample_real_sphere(SPHERE_CLOUD_SIZE, SphereSeed::Fibonacci(ctx.opts.seed))?;
    let mut w = ctx.writer(json!({
        "k_max": k_max,
        "k_cheb": k_cheb,
        "sphere_cloud": { "size": SPHERE_CLOUD_SIZE, "kind": "fibonacci" },
        "sandwich_clouds": SANDWICH_SIZES.map(|(k, n)| json!({ "k": k, "size": n, "kind": "uniform" })),
        "circled": { "angles": CIRCLED_ANGLES, "window": num(CIRCLED_WINDOW), "seeds": CIRCLED_SEEDS.map(|((re, im), r)| json!([num(re), num(im), num(r)])) },
    }))?;
    write_okounkov(&mut w, &result)?;
    summary.put("volume", rational(result.volume()));
    summary.put("body_vertices", json!(result.body.vertices().iter().map(|v| rationals(v)).collect::<Vec<_>>()));
    let mut gate = run_transform(ctx, &mut w, &cloud, &result, k_cheb, summary);

    let (all_bases, dims) = bases(&result);
    diameter_artifacts(&mut w, &cloud, &all_bases, &dims, &ctx.fekete, summary)?;

    let mut doc = serde_json::Map::new();
    // Sandwich on small clouds with the exact (exhaustive) Fekete maximum.
    let exhaustive = FeketeConfig { strategy: FeketeStrategy::Exhaustive, ..ctx.fekete };
    let mut sandwich = varcap::diameter::IntegralReport { rows: Vec::new(), sandwiches: Vec::new() };
    for (k, n) in SANDWICH_SIZES.into_iter().filter(|&(k, _)| k <= k_max) {
        let small = sample_random_sphere(n, ctx.opts.seed.wrapping_add(k as u64))?;
        let basis = NumericBasis::from_nu_set(&result.stage(k).expect("computed stage").nu_set);
        let r = integral_formula_compare(&small, &[basis], &exhaustive, &ctx.minimax)?;
        sandwich.rows.extend(r.rows);
        sandwich.sandwiches.extend(r.sandwiches);
    }
    w.csv("sandwich.csv", &SANDWICH_COLUMNS.map(String::from), &sandwich_rows(&sandwich))?;
    doc.insert("sandwich".into(), integral_json(&sandwich));
    gate = gate.and(sandwich_gate(&sandwich));

    let projection = projection_invariance(&cloud, k_cheb, &[0, 1], 2, &ctx.fekete)?;
    doc.insert("projection".into(), projection_json(&projection));

    let chart = sphere_circle_chart(2 * k_cheb + 4)?;
    let circle_body = okounkov_body(&chart, k_cheb, ctx.opts.d_max)?;
    let action = CircleAction::new(CIRCLED_WINDOW)?;
    let seeds: Vec<(Complex64, f64)> = CIRCLED_SEEDS.iter().map(|&((re, im), r)| (Complex64::new(re, im), r)).collect();
    let mut circled = serde_json::Map::new();
    for (arc, name) in [(OrbitArc::Full, "full"), (OrbitArc::Half, "half")] {
        let orbit = circled_sample(&seeds, CIRCLED_ANGLES, &action, arc)?;
        let reports = (1..=k_cheb)
            .map(|k| {
                let basis = NumericBasis::from_nu_set(&circle_body.stage(k).expect("computed stage").nu_set);
                circled_equality(&orbit, &basis, &[0, 1], ctx.opts.circled_tol, &ctx.minimax)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let max = reports.iter().map(|r| r.max_difference).fold(0.0, f64::max);
        summary.put(&format!("circled_{name}_max_difference"), num(max));
        if arc == OrbitArc::Full && reports.iter().any(|r| r.hypothesis_violated) {
            gate = gate.and(Err(CliError::Gate(format!("full orbits differ by {max:e}"))));
        }
        circled.insert(name.into(), json!(reports.iter().map(circled_json).collect::<Vec<_>>()));
    }
    doc.insert("circled".into(), Value::Object(circled));

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed);
    let homogeneous = (1..=k_cheb)
        .map(|k| {
            let h_k = varcap::diameter::homogeneous_exponents(3, k).len();
            let points: Vec<Vec<Complex64>> = (0..h_k)
                .map(|_| {
                    let mut z = vec![Complex64::new(1.0, 0.0)];
                    z.extend((0..2).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                    z
                })
                .collect();
            homogeneous_identity(&points, k)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    doc.insert("homogeneous".into(), json!(homogeneous.iter().map(homogeneous_json).collect::<Vec<_>>()));

    w.json("comparisons.json", Value::Object(doc))?;
    summary.put("artifacts", written(&w));
    gate
}

const CIRCLE_POINTS: usize = 512;

/// The unit circle in `C`: diameters against `(k+1)^{1/(2k)}`, `T_k` and `τ_j`.
fn demo_circle(ctx: &Context, summary: &mut Summary) -> Result<()> {
    let k_max = ctx.kmax(8);
    let points: Vec<Vec<Complex64>> = (0..CIRCLE_POINTS)
        .map(|l| vec![Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / CIRCLE_POINTS as f64)])
        .collect();
    let cloud = VarietyPointCloud::affine(&varcap::algebra::Variables::standard(1), points)?;
    let result = body(ctx, &Variety::plane(1), k_max)?;
    let mut w = ctx.writer(json!({ "k_max": k_max, "circle_points": CIRCLE_POINTS }))?;
    let (all_bases, dims) = bases(&result);
    diameter_artifacts(&mut w, &cloud, &all_bases, &dims, &ctx.fekete, summary)?;
    let gate = run_transform(ctx, &mut w, &cloud, &result, k_max, summary);
    let tau = (2..=k_max as usize + 1)
        .map(|j| zaharjuta_tau(&cloud, j, &ctx.minimax))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let oracle: Vec<Value> = (1..=k_max).map(|k| num(((k + 1) as f64).powf(1.0 / (2.0 * k as f64)))).collect();
    w.json(
        "comparisons.json",
        json!({
            "d_k_oracle": oracle,
            "tau": tau.iter().map(|t| json!({
                "j": t.j,
                "alpha": exponent(&t.alpha),
                "log_tau": num(t.log_tau),
                "log_tau_lower": num(t.log_tau_lower),
                "certified": t.certified,
            })).collect::<Vec<_>>(),
        }),
    )?;
    summary.put("artifacts", written(&w));
    gate
}

/// Parses `argv`, runs the command on a pool of the requested size, prints
/// the summary on stdout and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(std::io::stdout(), "{e}");
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let format = cli.opts.format;
    let outcome = Context::new(cli).and_then(|ctx| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.opts.threads.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| execute(&ctx))
    });
    match outcome {
        Ok(summary) => {
            let _ = writeln!(std::io::stdout(), "{}", summary.render(format));
            0
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}
