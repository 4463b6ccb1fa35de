//! Flat `key = value` text and JSON renderings of result records.
//!
//! Energies are stored in hartree and expanded to `<key>_hartree` and/or
//! `<key>_ev` lines according to [`Units`]; other quantities keep their key.
//! Vectors expand to `<key>_x`, `<key>_y`, `<key>_z` in the flat form and
//! stay arrays in JSON. Numbers are printed with 12 decimals so identical
//! inputs give byte-identical text.

use std::fmt::Write;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Map, Value as Json};

use crate::dft::{KohnShamBreakdown, ProbeReport};
use crate::electrostatics::{ForceReport, ScaleReport};
use crate::error::{Error, Result};
use crate::hartree_fock::EnergyReport;
use crate::scalar::Real;
use crate::units::HARTREE_TO_EV;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Hartree,
    Ev,
    #[default]
    Both,
}

impl FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hartree" => Ok(Self::Hartree),
            "ev" => Ok(Self::Ev),
            "both" => Ok(Self::Both),
            _ => Err(Error::InvalidInput(format!("unknown unit system {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Hartree.
    Energy(f64),
    Number(f64),
    Vector([f64; 3]),
    Count(usize),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: String,
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            entries: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: Value) -> Self {
        self.entries.push((key.into(), value));
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: Value) {
        self.entries.push((key.into(), value));
    }

    fn expanded(&self, units: Units) -> Vec<(String, Json)> {
        let mut out = Vec::new();
        for (key, value) in &self.entries {
            match value {
                Value::Energy(h) => {
                    if units != Units::Ev {
                        out.push((format!("{key}_hartree"), json!(h)));
                    }
                    if units != Units::Hartree {
                        out.push((format!("{key}_ev"), json!(h * HARTREE_TO_EV)));
                    }
                }
                Value::Number(x) => out.push((key.clone(), json!(x))),
                Value::Vector(v) => out.push((key.clone(), json!(v))),
                Value::Count(n) => out.push((key.clone(), json!(n))),
                Value::Flag(b) => out.push((key.clone(), json!(b))),
                Value::Text(t) => out.push((key.clone(), json!(t))),
            }
        }
        out
    }

    pub fn to_flat(&self, units: Units) -> String {
        let mut s = String::new();
        for (key, value) in self.expanded(units) {
            match value {
                Json::Number(n) if n.is_f64() => {
                    let _ = writeln!(s, "{key} = {}", fixed(n.as_f64().unwrap()));
                }
                Json::Array(items) => {
                    for (axis, item) in ["x", "y", "z"].iter().zip(items) {
                        let x = item.as_f64().unwrap_or(f64::NAN);
                        let _ = writeln!(s, "{key}_{axis} = {}", fixed(x));
                    }
                }
                Json::String(t) => {
                    let _ = writeln!(s, "{key} = {t}");
                }
                other => {
                    let _ = writeln!(s, "{key} = {other}");
                }
            }
        }
        s
    }

    pub fn to_json(&self, units: Units) -> Json {
        let values: Map<String, Json> = self.expanded(units).into_iter().collect();
        json!({ "report": self.kind, "units": units, "values": values })
    }
}

/// Twelve decimals, without a sign on values that round to zero.
fn fixed(x: f64) -> String {
    let s = format!("{x:.12}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn energy_report<T: Real>(r: &EnergyReport<T>, electrons: usize) -> Report {
    let mut rep = Report::new("energy");
    for (name, v) in EnergyReport::<T>::FIELDS.iter().zip(r.values()) {
        rep.push(*name, Value::Energy(v.as_f64()));
    }
    let per_electron = if electrons == 0 {
        0.0
    } else {
        r.self_repulsion.as_f64() / electrons as f64
    };
    rep.push("self_repulsion_per_electron", Value::Energy(per_electron));
    rep.push(
        "repulsion_minus_self",
        Value::Energy((r.electron_repulsion_total - r.self_repulsion).as_f64()),
    );
    rep.push("electrons", Value::Count(electrons));
    rep
}

pub fn kohn_sham_report<T: Real>(r: &KohnShamBreakdown<T>, xc: &str) -> Report {
    let mut rep = Report::new("dft").with("xc", Value::Text(xc.to_string()));
    for (name, v) in KohnShamBreakdown::<T>::FIELDS.iter().zip(r.values()) {
        rep.push(*name, Value::Energy(v.as_f64()));
    }
    rep
}

pub fn force_report(r: &ForceReport) -> Report {
    let mut rep = Report::new("forces");
    for (k, label) in r.labels.iter().enumerate() {
        rep.push(format!("nucleus_{k}_label"), Value::Text(label.clone()));
        rep.push(format!("nucleus_{k}_nuclear"), Value::Vector(r.nuclear[k]));
        rep.push(
            format!("nucleus_{k}_electronic"),
            Value::Vector(r.electronic[k]),
        );
        rep.push(format!("nucleus_{k}_total"), Value::Vector(r.total[k]));
    }
    rep
}

pub fn scale_report(r: &ScaleReport) -> Report {
    Report::new("scale")
        .with("mass_factor", Value::Number(r.mass_factor))
        .with("charge_factor", Value::Number(r.charge_factor))
        .with("bohr_ratio", Value::Number(r.bohr_ratio))
        .with("zeta_before", Value::Number(r.zeta_before))
        .with("zeta_after", Value::Number(r.zeta_after))
        .with("rms_before_bohr", Value::Number(r.rms_before))
        .with("rms_after_bohr", Value::Number(r.rms_after))
        .with("rms_ratio", Value::Number(r.rms_ratio))
        .with("ground_energy_before", Value::Energy(r.energy_before))
        .with("ground_energy_after", Value::Energy(r.energy_after))
        .with("overlap_old_new", Value::Number(r.overlap))
        .with(
            "excited_after_scaling",
            Value::Flag(r.excited_after_scaling),
        )
}

pub fn probe_report(r: &ProbeReport) -> Report {
    Report::new("variational-probe")
        .with("reference", Value::Energy(r.reference_energy))
        .with("samples", Value::Count(r.samples))
        .with("violations", Value::Count(r.violations))
        .with("min_delta", Value::Energy(r.min_delta))
        .with("mean_delta", Value::Energy(r.mean_delta))
        .with("max_delta", Value::Energy(r.max_delta))
}
