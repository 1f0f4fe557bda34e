//! Artifact emission: JSON documents and CSV tables with fixed float formatting.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{Map, Number, Value};
use varcap::algebra::{rational_string, ExponentVector, Rational};

pub const TOOL: &str = "varcap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float with 17 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_float(x)).expect("valid JSON number"))
    } else {
        Value::String(fmt_float(x))
    }
}

/// `d.dddddddddddddddde±x` for finite values, `inf` / `-inf` / `nan` otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
            _ => s,
        }
    }
}

pub fn rational(r: &Rational) -> Value {
    Value::String(rational_string(r))
}

pub fn rationals(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn exponent(e: &ExponentVector) -> Value {
    Value::Array(e.0.iter().map(|&v| Value::from(v)).collect())
}

pub fn complex(z: Complex64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

/// Writes artifacts into one output directory, stamping each JSON document
/// with the tool name, version and resolved configuration.
pub struct ArtifactWriter {
    dir: PathBuf,
    config: Value,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, config: Value) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactWriter { dir: dir.to_path_buf(), config, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn header(&self) -> Map<String, Value> {
        let mut doc = Map::new();
        doc.insert("tool".into(), Value::from(TOOL));
        doc.insert("version".into(), Value::from(VERSION));
        doc.insert("config".into(), self.config.clone());
        doc
    }

    /// Writes `name` as pretty JSON; `body` must be an object.
    pub fn json(&mut self, name: &str, body: Value) -> std::io::Result<()> {
        let mut doc = self.header();
        if let Value::Object(fields) = body {
            doc.extend(fields);
        }
        let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable") + "\n";
        self.put(name, text)
    }

    /// Writes `name` as CSV, preceded by `#` comment lines with the header.
    pub fn csv(&mut self, name: &str, columns: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
        let mut out = format!("# {TOOL} {VERSION}\n# config {}\n", serde_json::to_string(&self.config).expect("serializable"));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(columns).map_err(std::io::Error::other)?;
        for row in rows {
            w.write_record(row).map_err(std::io::Error::other)?;
        }
        out.push_str(&String::from_utf8(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?).expect("utf8"));
        self.put(name, out)
    }

    fn put(&mut self, name: &str, text: String) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use varcap::algebra::rat;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(num(2.0).to_string(), "2.0000000000000000e+0");
        assert_eq!(fmt_float(-2.5e-300), "-2.5000000000000000e-300");
        assert_eq!(num(f64::NEG_INFINITY), Value::String("-inf".into()));
        let back: f64 = fmt_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
        assert_eq!(rational(&rat(-3, 6)), Value::String("-1/2".into()));
    }

    #[test]
    fn artifacts_embed_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), serde_json::json!({"seed": 3})).unwrap();
        w.json("a.json", serde_json::json!({"x": num(1.5)})).unwrap();
        w.csv("b.csv", &["k".into()], &[vec!["1".into()]]).unwrap();
        let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
        assert_eq!(doc["config"]["seed"], 3);
        assert_eq!(doc["version"], VERSION);
        let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
        assert!(csv.contains("\"seed\":3") && csv.ends_with("k\n1\n"));
        assert_eq!(w.written().len(), 2);
    }
}
