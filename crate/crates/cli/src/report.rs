//! Report assembly and serialisation: JSON with fixed 17-significant-digit
//! floats, long-format plot CSV, atomic file writes.

use crate::config::{Cx, RunConfig};
use lie_core::mat::{CMat, C64};
use lie_core::TensorElement;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// pass iff value ≤ tol
    Upper,
    /// pass iff value > tol (negative controls)
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub value: f64,
    pub tol: f64,
    pub bound: Bound,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub conventions: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Check>,
    pub data: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// series name → (x, y) points
    pub series: BTreeMap<String, Vec<(f64, f64)>>,
    /// extra output files (name → contents), written next to report.json
    pub attachments: BTreeMap<String, Vec<u8>>,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Self {
        let mut conventions = BTreeMap::new();
        conventions.insert("sigma".into(), json!(isomonodromy::SIGMA));
        conventions.insert("kappa".into(), Value::Null);
        conventions.insert("hbar".into(), json!("2*pi*i*sfh"));
        conventions.insert("prng".into(), json!("ChaCha8 (rand_chacha 0.9), seeded with seed_from_u64"));
        conventions.insert("ray".into(), json!(cfg.ray));
        conventions.insert("cut".into(), json!(cfg.cut));
        Self {
            command: cfg.command().to_string(),
            config: serde_json::to_value(cfg).expect("config serialises"),
            conventions,
            ..Default::default()
        }
    }

    /// Record `value ≤ tol` under `name`, keeping the worst value when the
    /// same name is checked repeatedly.
    pub fn check(&mut self, name: &str, value: f64, tol: f64) {
        self.check_bound(name, value, tol, Bound::Upper);
    }

    pub fn check_bound(&mut self, name: &str, value: f64, tol: f64, bound: Bound) {
        let worse = |old: f64| match bound {
            Bound::Upper => value > old || value.is_nan(),
            Bound::Lower => value < old || value.is_nan(),
        };
        if let Some(c) = self.residuals.get(name) {
            if !worse(c.value) {
                return;
            }
        }
        let pass = match bound {
            Bound::Upper => value <= tol,
            Bound::Lower => value > tol,
        };
        self.residuals.insert(name.to_string(), Check { value, tol, bound, pass });
    }

    pub fn put(&mut self, key: &str, v: Value) {
        self.data.insert(key.to_string(), v);
    }

    pub fn push_point(&mut self, series: &str, x: f64, y: f64) {
        self.series.entry(series.to_string()).or_default().push((x, y));
    }

    pub fn pass(&self) -> bool {
        self.residuals.values().all(|c| c.pass)
    }

    pub fn to_value(&self) -> Value {
        let series: BTreeMap<&String, Vec<[f64; 2]>> = self.series.iter().map(|(k, v)| (k, v.iter().map(|&(x, y)| [x, y]).collect())).collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "conventions": self.conventions,
            "residuals": self.residuals,
            "data": self.data,
            "series": series,
            "warnings": self.warnings,
            "pass": self.pass(),
        })
    }

    pub fn to_json(&self) -> String {
        to_json_string(&self.to_value())
    }
}

/// Floats as `{:.16e}`: 17 significant digits, independent of the value.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }
}

pub fn to_json_string<T: Serialize>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    v.serialize(&mut ser).expect("serialisable");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf8")
}

pub fn cx(z: C64) -> Cx {
    [z.re, z.im]
}

pub fn matrix(m: &CMat) -> Value {
    let rows: Vec<Vec<Cx>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| cx(m[(i, j)])).collect()).collect();
    json!(rows)
}

/// Nonzero coefficients as {"ij,kl": [re, im]} (0-based indices).
pub fn tensor(t: &TensorElement) -> Value {
    let n = t.n;
    let mut m = serde_json::Map::new();
    for a in 0..n * n {
        for b in 0..n * n {
            let c = t.coef[(a, b)];
            if c != C64::new(0.0, 0.0) {
                m.insert(format!("{}{},{}{}", a / n, a % n, b / n, b % n), json!(cx(c)));
            }
        }
    }
    Value::Object(m)
}

/// Long-format CSV (series, x, y) of the report's series, read back from
/// its JSON form. A report without series gives the header only.
pub fn emit_plot_data(report: &Value) -> String {
    let mut out = String::from("series,x,y\n");
    if let Some(Value::Object(series)) = report.get("series") {
        for (name, pts) in series {
            for p in pts.as_array().into_iter().flatten() {
                let (x, y) = (p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN));
                out.push_str(&format!("{name},{x:.16e},{y:.16e}\n"));
            }
        }
    }
    out
}

/// Write via a temporary sibling and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
