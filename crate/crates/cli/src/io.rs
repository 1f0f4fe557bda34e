//! Variety and point-cloud files.
//!
//! A variety file is JSON:
//!
//! ```json
//! { "variables": ["z1", "z2", "z3"],
//!   "ideal": ["z1^2 + z2^2 + z3^2 - 1"],
//!   "noether_split": { "x": ["z1", "z2"], "y": ["z3"] },
//!   "base_point": [["0", "0"], ["0", "0"], ["1", "0"]] }
//! ```
//!
//! Base point entries are `[re, im]` rationals written `p` or `p/q`; the split
//! and the base point are only needed for chart-based commands.
//!
//! A cloud file is either JSON with decimal strings
//! (`{ "points": [[["re", "im"], ...], ...], "weights": [["re", "im"], ...] }`,
//! weights optional) or CSV with `2n + 2` columns per row:
//! `re_1, im_1, ..., re_n, im_n, w_re, w_im`. A non-numeric first row is
//! treated as a header.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;
use varcap::algebra::{parse_polynomial, parse_rational, AlgebraError, GaussianRational, Polynomial, Variables};
use varcap::ideals::{Ideal, IdealError, NoetherSplit, NormalFormAlgebra};
use varcap::series::{implicit_series, ImplicitChart, SeriesError};
use varcap::sets::{SetsError, VarietyPointCloud};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("malformed CSV in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("generator {index}: {source}")]
    Generator { index: usize, source: AlgebraError },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Sets(#[from] SetsError),
    #[error("bad number `{0}`")]
    Number(String),
    #[error("{0}")]
    Shape(String),
    #[error("the variety file has no {0}")]
    Missing(&'static str),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VarietyFile {
    variables: Vec<String>,
    #[serde(default)]
    ideal: Vec<String>,
    noether_split: Option<SplitFile>,
    base_point: Option<Vec<[String; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitFile {
    x: Vec<String>,
    y: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudFile {
    points: Vec<Vec<[String; 2]>>,
    weights: Option<Vec<[String; 2]>>,
}

/// A parsed variety description.
#[derive(Clone, Debug)]
pub struct Variety {
    pub ideal: Ideal,
    pub split: Option<NoetherSplit>,
    pub base_point: Option<Vec<GaussianRational>>,
}

impl Variety {
    /// The zero ideal on `C^n` with every coordinate local, about the origin.
    pub fn plane(n: usize) -> Self {
        let vars = Variables::standard(n);
        Variety {
            ideal: Ideal::zero(&vars),
            split: Some(NoetherSplit::new((0..n).collect(), vec![], n).expect("full split")),
            base_point: Some(vec![GaussianRational::default(); n]),
        }
    }

    pub fn variables(&self) -> &Variables {
        self.ideal.variables()
    }

    pub fn generators(&self) -> &[Polynomial] {
        self.ideal.generators()
    }

    pub fn algebra(&self) -> Result<NormalFormAlgebra, IoError> {
        let split = self.split.clone().ok_or(IoError::Missing("noether_split"))?;
        Ok(NormalFormAlgebra::new(self.ideal.clone(), split)?)
    }

    pub fn chart(&self, precision: u32) -> Result<ImplicitChart, IoError> {
        let base = self.base_point.as_ref().ok_or(IoError::Missing("base_point"))?;
        Ok(implicit_series(Arc::new(self.algebra()?), base, precision)?)
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })
}

fn rational_pair(pair: &[String; 2]) -> Result<GaussianRational, IoError> {
    let part = |s: &String| parse_rational(s).ok_or_else(|| IoError::Number(s.clone()));
    Ok(GaussianRational::new(part(&pair[0])?, part(&pair[1])?))
}

fn decimal(text: &str) -> Result<f64, IoError> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IoError::Number(text.to_string()))
}

fn complex_pair(pair: &[String; 2]) -> Result<Complex64, IoError> {
    Ok(Complex64::new(decimal(&pair[0])?, decimal(&pair[1])?))
}

pub fn parse_variety(text: &str, path: &Path) -> Result<Variety, IoError> {
    let file: VarietyFile =
        serde_json::from_str(text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    let vars = Variables::new(&file.variables)?;
    let generators = file
        .ideal
        .iter()
        .enumerate()
        .map(|(index, g)| parse_polynomial(g, &vars).map_err(|source| IoError::Generator { index, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let split = file.noether_split.map(|s| NoetherSplit::from_names(&vars, &s.x, &s.y)).transpose()?;
    let base_point = file.base_point.map(|b| b.iter().map(rational_pair).collect::<Result<Vec<_>, _>>()).transpose()?;
    if let Some(b) = &base_point {
        if b.len() != vars.len() {
            return Err(IoError::Shape(format!("base point has {} entries for {} variables", b.len(), vars.len())));
        }
    }
    Ok(Variety { ideal: Ideal::new(&vars, generators)?, split, base_point })
}

pub fn read_variety(path: &Path) -> Result<Variety, IoError> {
    parse_variety(&read(path)?, path)
}

/// Raw cloud data before it is attached to a variety.
#[derive(Clone, Debug, PartialEq)]
pub struct CloudData {
    pub points: Vec<Vec<Complex64>>,
    pub weights: Vec<Complex64>,
}

impl CloudData {
    pub fn nvars(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Validates the points against `variety` (or `C^n` when absent).
    pub fn into_cloud(self, variety: Option<&Variety>, residual_tol: f64) -> Result<VarietyPointCloud, IoError> {
        let plane;
        let variety = match variety {
            Some(v) => v,
            None => {
                plane = Variety::plane(self.nvars());
                &plane
            }
        };
        Ok(VarietyPointCloud::new(variety.variables(), self.points, self.weights, variety.generators(), residual_tol)?)
    }
}

pub fn parse_cloud_json(text: &str, path: &Path) -> Result<CloudData, IoError> {
    let file: CloudFile =
        serde_json::from_str(text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    let points = file
        .points
        .iter()
        .map(|p| p.iter().map(complex_pair).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let weights = match file.weights {
        Some(w) => w.iter().map(complex_pair).collect::<Result<Vec<_>, _>>()?,
        None => vec![Complex64::new(1.0, 0.0); points.len()],
    };
    Ok(CloudData { points, weights })
}

pub fn parse_cloud_csv(text: &str, path: &Path) -> Result<CloudData, IoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut data = CloudData { points: Vec::new(), weights: Vec::new() };
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|source| IoError::Csv { path: path.to_path_buf(), source })?;
        let fields: Vec<&str> = record.iter().collect();
        if row == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if fields.len() < 4 || !fields.len().is_multiple_of(2) {
            return Err(IoError::Shape(format!("row {row}: expected 2n + 2 columns, found {}", fields.len())));
        }
        let values = fields.iter().map(|f| decimal(f)).collect::<Result<Vec<_>, _>>()?;
        let mut pairs: Vec<Complex64> = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        data.weights.push(pairs.pop().expect("at least two pairs"));
        data.points.push(pairs);
    }
    Ok(data)
}

/// Reads a cloud, choosing the format from the extension (`.csv` or JSON).
pub fn read_cloud(path: &Path) -> Result<CloudData, IoError> {
    let text = read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => parse_cloud_csv(&text, path),
        _ => parse_cloud_json(&text, path),
    }
}

/// Serializes a cloud in the JSON cloud format (17 significant digits).
pub fn cloud_to_json(cloud: &VarietyPointCloud) -> serde_json::Value {
    let pair = |z: &Complex64| serde_json::json!([format!("{:.16e}", z.re), format!("{:.16e}", z.im)]);
    serde_json::json!({
        "points": cloud.points().iter().map(|p| p.iter().map(pair).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "weights": cloud.weights().iter().map(pair).collect::<Vec<_>>(),
    })
}
