//! Run configuration: parsed from JSON, resolved against per-command
//! defaults, validated, and echoed back in the report.

use crate::CliError;
use lie_core::mat::{self, CMat, C64};
use lie_core::{CartanElement, LieContext};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Complex number as [re, im].
pub type Cx = [f64; 2];

pub const COMMANDS: [&str; 11] = [
    "stokes",
    "factors",
    "monodromy",
    "stokes-map",
    "poisson-verify",
    "twist-order1",
    "quantum-stokes-order1",
    "scl-check",
    "iso-flow",
    "pde-check",
    "duality",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[default]
    Gl,
    Sl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

/// Random instances: `count` draws with ‖B‖_F (or ‖λ‖_F) in [0.1, norm].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub count: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub panels: usize,
    pub nodes: usize,
    pub tail: f64,
    pub height: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        let q = hbar_quantum::QuadConfig::default();
        Self { panels: q.panels, nodes: q.nodes, tail: q.tail, height: q.height }
    }
}

impl QuadSpec {
    pub fn to_config(&self) -> hbar_quantum::QuadConfig {
        hbar_quantum::QuadConfig { panels: self.panels, nodes: self.nodes, tail: self.tail, height: self.height, ..Default::default() }
    }
}

/// Everything a run depends on. Optional fields are filled by `resolve`, so
/// the echoed config is fully explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub kind: Kind,
    /// Diagonal of A.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Cx>>,
    /// B, row-major.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<Cx>>>,
    /// Real Cartan parameter μ for the quantum and flow commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    /// Second A for the κ transfer check of poisson-verify.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_second: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ray: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut: Option<f64>,
    /// Sector for `factors`; both half-turns when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_scale: Option<f64>,
    pub precision: Precision,
    /// Overrides of the per-command tolerances, by residual name.
    pub tolerances: BTreeMap<String, f64>,
    /// Truncation order in ħ (duality).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadSpec>,
    /// Flow: μ velocity, end time, RK4 steps, constancy checkpoints.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_control: Option<bool>,
    /// Output directory; not echoed, so reports do not depend on it.
    #[serde(skip_serializing)]
    pub out: Option<String>,
}

/// Default tolerances per command, before tol_scale.
pub fn default_tolerances(command: &str) -> BTreeMap<String, f64> {
    let t: &[(&str, f64)] = match command {
        "stokes" => &[
            ("unipotence", 1e-9),
            ("pattern", 1e-9),
            ("monodromy", 1e-7),
            ("identity_stokes", 1e-10),
            ("identity_connection", 1e-8),
        ],
        "factors" => &[("factor_product", 1e-8), ("factor_pattern", 1e-9)],
        "monodromy" => &[("monodromy", 1e-7)],
        "stokes-map" => &[("fibre", 1e-10), ("big_cell", 1e-7)],
        "poisson-verify" => &[("kappa_spread", 1e-3), ("bracket", 1e-3), ("bracket_second_a", 1e-3), ("linearization", 1e-4)],
        "twist-order1" => &[("quadrature_rel", 1e-6), ("cocycle", 1e-10)],
        "quantum-stokes-order1" => &[("route_gap", 1e-6), ("swap_symmetry", 1e-14), ("monodromy_identity", 1e-10), ("r_coefficient", 1e-14)],
        "scl-check" => &[("scl", 1e-4)],
        "iso-flow" => &[("stokes_drift", 1e-6), ("spectral_drift", 1e-8), ("control_drift_min", 1e-2)],
        "pde-check" => &[("classical_pde", 1e-4), ("quantum_pde_closed_form", 1e-6), ("quantum_pde_quadrature", 1e-6)],
        "duality" => &[("criteria_disagreements", 0.0), ("i_delta_fixtures", 0.0)],
        _ => &[],
    };
    t.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation { code: "InvalidConfig".into(), message: msg.into() }
}

fn default_mu(n: usize) -> Vec<f64> {
    match n {
        3 => vec![3.0, 1.0, 0.0],
        _ => (0..n).rev().map(|i| i as f64).collect(),
    }
}

/// A in the negated fundamental chamber with unit gaps, shifted so the
/// last entry is −1.
fn default_a(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 - n as f64).collect()
}

impl RunConfig {
    /// Fill every default for `command` so the echo is explicit.
    pub fn resolve(mut self, command: &str) -> Result<Self, CliError> {
        if !COMMANDS.contains(&command) {
            return Err(validation(format!("unknown command '{command}'; expected one of {}", COMMANDS.join(", "))));
        }
        if let Some(c) = &self.command {
            if c != command {
                return Err(validation(format!("config names command '{c}' but '{command}' was requested")));
            }
        }
        self.command = Some(command.to_string());
        let n = self
            .n
            .or_else(|| self.a.as_ref().map(|a| a.len()))
            .or_else(|| self.mu.as_ref().map(|m| m.len()))
            .or_else(|| self.b.as_ref().map(|b| b.len()))
            .unwrap_or(if matches!(command, "iso-flow" | "pde-check") { 3 } else { 2 });
        self.n = Some(n);
        self.tol_scale.get_or_insert(1.0);
        let mut tols = default_tolerances(command);
        for (k, v) in &self.tolerances {
            if !tols.contains_key(k) {
                return Err(validation(format!("unknown tolerance '{k}' for {command}; known: {}", tols.keys().cloned().collect::<Vec<_>>().join(", "))));
            }
            tols.insert(k.clone(), *v);
        }
        self.tolerances = tols;
        match command {
            "stokes" | "factors" | "monodromy" | "stokes-map" => {
                if self.b.is_none() && self.sample.is_none() {
                    self.sample = Some(SampleSpec { count: if command == "factors" { 1 } else { 5 }, norm: 0.5 });
                }
                if command == "factors" && self.a.is_none() {
                    // complex A so that no Stokes ray meets the cut
                    self.a = Some(match n {
                        2 => vec![[0.0, 0.0], [1.0, 0.5]],
                        3 => {
                            if self.ray.is_none() && self.cut.is_none() {
                                self.ray = Some(3.0 * PI / 8.0);
                                self.cut = Some(7.0 * PI / 4.0);
                            }
                            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]
                        }
                        _ => default_a(n).iter().map(|&x| [x, 0.0]).collect(),
                    });
                }
                if self.b.is_some() && self.a.is_none() {
                    self.a = Some(default_a(n).iter().map(|&x| [x, 0.0]).collect());
                }
            }
            "poisson-verify" => {
                let a = self.a.get_or_insert_with(|| default_a(n).iter().map(|&x| [x, 0.0]).collect());
                let first: Vec<f64> = a.iter().map(|x| x[0]).collect();
                self.a_second.get_or_insert_with(|| {
                    let mut s = first.clone();
                    s[0] -= 0.7;
                    s
                });
                self.sample.get_or_insert(SampleSpec { count: 10, norm: 0.2 });
                self.fd_step.get_or_insert(1e-3);
            }
            "twist-order1" | "quantum-stokes-order1" | "scl-check" => {
                self.mu.get_or_insert_with(|| default_mu(n));
                self.quadrature.get_or_insert_with(QuadSpec::default);
                if command == "scl-check" {
                    self.sample.get_or_insert(SampleSpec { count: 8, norm: 1.0 });
                    self.fd_step.get_or_insert(1e-3);
                }
            }
            "iso-flow" | "pde-check" => {
                self.mu.get_or_insert_with(|| (0..n).map(|i| i as f64 - (n - 1) as f64).collect());
                self.velocity.get_or_insert_with(|| {
                    let mut v = vec![0.0; n];
                    v[0] = -1.0;
                    v
                });
                self.t_end.get_or_insert(0.5);
                self.sample.get_or_insert(SampleSpec { count: 1, norm: 0.4 });
                if command == "iso-flow" {
                    self.steps.get_or_insert(500);
                    self.checkpoints.get_or_insert(6);
                    self.negative_control.get_or_insert(true);
                } else {
                    self.fd_step.get_or_insert(1e-3);
                    self.quadrature.get_or_insert_with(QuadSpec::default);
                }
            }
            "duality" => {
                self.order.get_or_insert(2);
                self.sample.get_or_insert(SampleSpec { count: 50, norm: 1.0 });
            }
            _ => {}
        }
        self.ray.get_or_insert(-PI / 2.0);
        self.cut.get_or_insert(PI);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let n = self.n();
        if !(1..=6).contains(&n) {
            return Err(validation(format!("n = {n} outside 1..=6")));
        }
        let ts = self.tol_scale();
        if !(ts.is_finite() && ts > 0.0) {
            return Err(validation(format!("tol_scale must be positive, got {ts}")));
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(validation(format!("tolerance '{k}' must be finite and non-negative")));
            }
        }
        if let Some(a) = &self.a {
            if a.len() != n {
                return Err(validation(format!("A has {} entries, n = {n}", a.len())));
            }
        }
        if let Some(m) = &self.mu {
            if m.len() != n {
                return Err(validation(format!("mu has {} entries, n = {n}", m.len())));
            }
        }
        if let Some(m) = &self.a_second {
            if m.len() != n {
                return Err(validation(format!("a_second has {} entries, n = {n}", m.len())));
            }
        }
        if let Some(v) = &self.velocity {
            if v.len() != n {
                return Err(validation(format!("velocity has {} entries, n = {n}", v.len())));
            }
        }
        if let Some(b) = &self.b {
            if b.len() != n || b.iter().any(|r| r.len() != n) {
                return Err(validation(format!("B must be {n}×{n}")));
            }
        }
        if let Some(s) = &self.sample {
            if s.count == 0 || !(s.norm.is_finite() && s.norm > 0.1) {
                return Err(validation("sample needs count ≥ 1 and norm > 0.1"));
            }
        }
        if let Some(h) = self.fd_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(validation("fd_step must be positive"));
            }
        }
        if let Some(q) = &self.quadrature {
            if q.panels == 0 || q.nodes == 0 || !(q.tail > 0.0) || !(q.height > 0.0) {
                return Err(validation("quadrature needs positive panels, nodes, tail and height"));
            }
        }
        if let Some(s) = self.steps {
            if s == 0 {
                return Err(validation("steps must be positive"));
            }
        }
        if let Some(t) = self.t_end {
            if !(t.is_finite() && t > 0.0) {
                return Err(validation("t_end must be positive"));
            }
        }
        if self.kind == Kind::Sl {
            if let Some(a) = &self.a {
                let tr: f64 = a.iter().map(|x| x[0]).sum::<f64>().abs() + a.iter().map(|x| x[1]).sum::<f64>().abs();
                if tr > 1e-12 {
                    return Err(validation("kind sl needs trace(A) = 0"));
                }
            }
            if let Some(b) = &self.b {
                let tr = (0..n).fold(C64::new(0.0, 0.0), |s, i| s + C64::new(b[i][i][0], b[i][i][1]));
                if tr.norm() > 1e-12 {
                    return Err(validation("kind sl needs trace(B) = 0"));
                }
            }
        }
        Ok(())
    }

    pub fn command(&self) -> &str {
        self.command.as_deref().unwrap_or("")
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(2)
    }

    pub fn tol_scale(&self) -> f64 {
        self.tol_scale.unwrap_or(1.0)
    }

    pub fn ctx(&self) -> LieContext {
        match self.kind {
            Kind::Gl => LieContext::gl(self.n()),
            Kind::Sl => LieContext::sl(self.n()),
        }
    }

    /// Scaled tolerance by residual name.
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(0.0) * self.tol_scale()
    }

    pub fn stokes_config(&self) -> stokes_classical::StokesConfig {
        let base = match self.precision {
            Precision::Double => stokes_classical::StokesConfig::default(),
            Precision::Extended => stokes_classical::StokesConfig::extended(),
        };
        if self.tol_scale() == 1.0 {
            base
        } else {
            base.with_tol_scale(self.tol_scale())
        }
    }

    pub fn a_element(&self) -> Option<CartanElement> {
        self.a.as_ref().map(|a| CartanElement::new(a.iter().map(|x| C64::new(x[0], x[1])).collect()))
    }

    pub fn b_matrix(&self) -> Option<CMat> {
        self.b.as_ref().map(|b| mat::from_rows(&b.iter().map(|r| r.iter().map(|x| C64::new(x[0], x[1])).collect()).collect::<Vec<_>>()))
    }

    pub fn mu_element(&self) -> CartanElement {
        CartanElement::real(self.mu.as_deref().unwrap_or(&[]))
    }
}
