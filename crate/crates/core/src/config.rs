//! Run configuration: TOML text with `[solver]`, `[forcing]`, `[init]`,
//! `[[probe]]`, `[bounds]` and `[output]` sections.
//!
//! Every constraint is checked at parse time; violations are reported
//! together, each with the line of the offending key when it can be found.

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::R3Variant;
use crate::diagnostics::{delta_limit, DEFAULT_P_GRID};
use crate::error::{Diagnostic, Error, Result};
use crate::solver::{ForcingSpec, InitSpec, SolverParams};
use crate::verify::Probe;

/// Smallest admissible probe norm `|k|`.
pub const MIN_PROBE_NORM: f64 = 2.0;
/// Smallest admissible cutoff width, in lattice units.
pub const MIN_PROBE_DELTA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "defaults::n")]
    pub n: usize,
    #[serde(default = "defaults::diffusivity")]
    pub nu: f64,
    #[serde(default = "defaults::diffusivity")]
    pub eta: f64,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default = "defaults::t_end")]
    pub t_end: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            n: defaults::n(),
            nu: defaults::diffusivity(),
            eta: defaults::diffusivity(),
            dt: defaults::dt(),
            t_end: defaults::t_end(),
        }
    }
}

/// An exponent `p`; in TOML either a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Exponent(v as f64)),
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(Exponent(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{s}\""))),
        }
    }
}

/// Serde adapter for exponent lists holding `∞`.
pub(crate) mod exponent_list {
    use super::Exponent;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|&p| Exponent(p)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Ok(Vec::<Exponent>::deserialize(d)?.into_iter().map(|e| e.0).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub k: [f64; 3],
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::p_grid")]
    pub p_grid: Vec<Exponent>,
}

impl ProbeSpec {
    pub fn norm(&self) -> f64 {
        self.k.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_probe(&self) -> Probe {
        Probe {
            k: self.k,
            delta: self.delta,
            p_grid: self.p_grid.iter().map(|p| p.0).collect(),
        }
    }
}

/// `ε` either given directly or measured as the time mean of the run's
/// dissipation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsSetting {
    Measured,
    Value(f64),
}

impl Serialize for EpsSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EpsSetting::Measured => s.serialize_str("measured"),
            EpsSetting::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for EpsSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(EpsSetting::Value(v as f64)),
            Raw::Num(v) => Ok(EpsSetting::Value(v)),
            Raw::Str(s) if s == "measured" => Ok(EpsSetting::Measured),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"measured\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// No default: the spectral constant must be stated explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default = "defaults::eps")]
    pub eps: EpsSetting,
    #[serde(default = "defaults::margin")]
    pub margin: f64,
    #[serde(default)]
    pub r3_variant: R3Variant,
    /// Shell range for the spectral theorems.
    #[serde(default = "defaults::shells")]
    pub shells: [usize; 2],
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            c0: None,
            eps: defaults::eps(),
            margin: defaults::margin(),
            r3_variant: R3Variant::default(),
            shells: defaults::shells(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "defaults::dir")]
    pub dir: PathBuf,
    /// Steps between snapshots.
    #[serde(default = "defaults::cadence")]
    pub cadence: usize,
    #[serde(default = "defaults::formats")]
    pub formats: Vec<Format>,
    /// Store every snapshot as an `MHDS1` file; `verify` and `spectrum`
    /// need them.
    #[serde(default = "defaults::snapshots")]
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: defaults::dir(),
            cadence: defaults::cadence(),
            formats: defaults::formats(),
            snapshots: defaults::snapshots(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default, rename = "probe")]
    pub probes: Vec<ProbeSpec>,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub output: OutputSection,
}

mod defaults {
    use super::*;

    pub fn n() -> usize {
        32
    }
    pub fn diffusivity() -> f64 {
        0.02
    }
    pub fn dt() -> f64 {
        0.01
    }
    pub fn t_end() -> f64 {
        1.0
    }
    pub fn delta() -> f64 {
        1.0
    }
    pub fn p_grid() -> Vec<Exponent> {
        DEFAULT_P_GRID.iter().map(|&p| Exponent(p)).collect()
    }
    pub fn eps() -> EpsSetting {
        EpsSetting::Measured
    }
    pub fn margin() -> f64 {
        1.1
    }
    pub fn shells() -> [usize; 2] {
        [2, 10]
    }
    pub fn dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn cadence() -> usize {
        10
    }
    pub fn formats() -> Vec<Format> {
        vec![Format::Csv, Format::Jsonl]
    }
    pub fn snapshots() -> bool {
        true
    }
}

impl RunConfig {
    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            n: self.solver.n,
            nu: self.solver.nu,
            eta: self.solver.eta,
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            cadence: self.output.cadence,
            forcing: self.forcing.clone(),
            init: self.init.clone(),
        }
    }

    pub fn probes(&self) -> Vec<Probe> {
        self.probes.iter().map(ProbeSpec::to_probe).collect()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
    }
}

/// Line (1-based) of `key` inside the `occurrence`-th `[section]` or
/// `[[section]]` block of `text`.
fn locate(text: &str, section: &str, occurrence: usize, key: &str) -> Option<usize> {
    let mut current: Option<(String, usize)> = None;
    let mut seen = std::collections::HashMap::<String, usize>::new();
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_start_matches('[').split(']').next().unwrap_or("").trim().to_string();
            let count = seen.entry(name.clone()).or_insert(0);
            current = Some((name.clone(), *count));
            *count += 1;
            if name == section && current.as_ref().map(|c| c.1) == Some(occurrence) {
                header_line = Some(i + 1);
            }
            continue;
        }
        let in_section = match &current {
            Some((name, idx)) => name == section && *idx == occurrence,
            None => section.is_empty(),
        };
        if in_section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Collector<'a> {
    text: &'a str,
    out: Vec<Diagnostic>,
}

impl Collector<'_> {
    fn push(&mut self, section: &str, occurrence: usize, key: &str, message: String) {
        let line = locate(self.text, section, occurrence, key);
        self.out.push(Diagnostic { line, message });
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        Error::ConfigDiagnostics(vec![Diagnostic {
            line,
            message: e.message().trim().to_string(),
        }])
    })?;
    let diags = validate(&cfg, text);
    if diags.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::ConfigDiagnostics(diags))
    }
}

/// All constraint violations of `cfg`; `text` is used to find line numbers.
pub fn validate(cfg: &RunConfig, text: &str) -> Vec<Diagnostic> {
    let mut c = Collector { text, out: Vec::new() };
    let s = &cfg.solver;
    if s.n < 4 || s.n % 2 != 0 {
        c.push("solver", 0, "n", format!("n must be even and >= 4, got {}", s.n));
    }
    for (key, v) in [("nu", s.nu), ("eta", s.eta)] {
        if !(v >= 0.0 && v.is_finite()) {
            c.push("solver", 0, key, format!("{key} must be a finite number >= 0, got {v}"));
        }
    }
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        c.push("solver", 0, "dt", format!("dt must be > 0, got {}", s.dt));
    }
    if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
        c.push("solver", 0, "t_end", format!("t_end must be >= 0, got {}", s.t_end));
    }
    if s.n >= 4 && s.n % 2 == 0 {
        if let Ok(grid) = crate::spectral::WavenumberGrid::new(s.n) {
            if let Err(e) = cfg.forcing.validate(grid) {
                c.push("forcing", 0, "modes", e.to_string());
            }
        }
    }
    match &cfg.init {
        InitSpec::OrszagTang { beta } if !beta.is_finite() => {
            c.push("init", 0, "beta", format!("beta must be finite, got {beta}"));
        }
        InitSpec::Random { k_lo, k_hi, energy, .. } => {
            if !(*k_lo >= 1.0 && k_hi >= k_lo) {
                c.push("init", 0, "k_lo", format!("random preset needs 1 <= k_lo <= k_hi, got [{k_lo}, {k_hi}]"));
            }
            if !(*energy >= 0.0 && energy.is_finite()) {
                c.push("init", 0, "energy", format!("energy must be >= 0, got {energy}"));
            }
        }
        _ => {}
    }

    for (i, p) in cfg.probes.iter().enumerate() {
        let norm = p.norm();
        if !p.k.iter().all(|x| x.is_finite()) || norm < MIN_PROBE_NORM {
            c.push("probe", i, "k", format!("probe |k| must be >= {MIN_PROBE_NORM}, got {norm}"));
        }
        let limit = delta_limit(norm);
        if !(p.delta > 0.0 && p.delta < limit) {
            c.push(
                "probe",
                i,
                "delta",
                format!("delta = {} violates 0<δ<|k|/(2√3) = {limit:.6} for |k| = {norm:.6}", p.delta),
            );
        } else if p.delta < MIN_PROBE_DELTA {
            c.push(
                "probe",
                i,
                "delta",
                format!("delta = {} is below one lattice unit; the cutoff plateau may hold no modes", p.delta),
            );
        }
        if p.p_grid.is_empty() {
            c.push("probe", i, "p_grid", "p_grid must not be empty".into());
        }
        for e in &p.p_grid {
            if !(e.0 >= 2.0) {
                c.push("probe", i, "p_grid", format!("exponents must be >= 2, got {}", e.0));
            }
        }
    }

    let b = &cfg.bounds;
    if let Some(c0) = b.c0 {
        if !(c0 > 0.0 && c0.is_finite()) {
            c.push("bounds", 0, "c0", format!("c0 must be > 0, got {c0}"));
        }
    }
    if let EpsSetting::Value(v) = b.eps {
        if !(v > 0.0 && v.is_finite()) {
            c.push("bounds", 0, "eps", format!("eps must be > 0 or \"measured\", got {v}"));
        }
    }
    if !(b.margin > 1.0 && b.margin.is_finite()) {
        c.push("bounds", 0, "margin", format!("margin must be > 1, got {}", b.margin));
    }
    if !(b.shells[0] >= 1 && b.shells[1] >= b.shells[0]) {
        c.push("bounds", 0, "shells", format!("shells must satisfy 1 <= lo <= hi, got {:?}", b.shells));
    }

    let o = &cfg.output;
    if o.cadence == 0 {
        c.push("output", 0, "cadence", "cadence must be >= 1".into());
    }
    if o.dir.as_os_str().is_empty() {
        c.push("output", 0, "dir", "output directory must not be empty".into());
    }
    c.out
}

/// Applies a `section.key=value` override to configuration text. The value
/// is parsed as TOML, falling back to a plain string.
pub fn apply_override(text: &str, assignment: &str) -> Result<String> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override key `{path}` must be section.key")))?;
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let value = value.trim();
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let table = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match table {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), parsed);
        }
        _ => {
            return Err(Error::Config(format!(
                "override `{path}`: `{section}` is not a single table"
            )))
        }
    }
    toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.solver_params().cadence, 10);
    }

    #[test]
    fn delta_equal_to_norm_names_the_bound() {
        let text = "[solver]\nn = 16\n\n[[probe]]\nk = [4, 0, 0]\ndelta = 4.0\n";
        let Err(Error::ConfigDiagnostics(d)) = parse_config(text) else {
            panic!("expected diagnostics")
        };
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].line, Some(6));
        assert!(d[0].message.contains("0<δ<|k|/(2√3)"));
    }

    #[test]
    fn all_violations_are_reported_with_lines() {
        let text = "[solver]\nn = 7\ndt = -1.0\n\n[bounds]\nmargin = 0.5\n";
        let Err(Error::ConfigDiagnostics(d)) = parse_config(text) else {
            panic!("expected diagnostics")
        };
        let lines: Vec<_> = d.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![Some(2), Some(3), Some(6)]);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let Err(Error::ConfigDiagnostics(d)) = parse_config("[solver]\nn = = 3\n") else {
            panic!("expected diagnostics")
        };
        assert_eq!(d[0].line, Some(2));
        assert!(parse_config("[solver]\nbogus = 1\n").is_err());
    }

    #[test]
    fn probes_and_infinity_round_trip() {
        let text = r#"
[init]
preset = "random"
seed = 9

[[probe]]
k = [4, 0, 0]
p_grid = [2, 4.5, "inf"]

[[probe]]
k = [0, 8, 0]
delta = 1.5

[bounds]
c0 = 1.6
eps = 0.25
r3_variant = "proof"
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.probes.len(), 2);
        assert!(cfg.probes[0].p_grid[2].0.is_infinite());
        assert_eq!(cfg.bounds.eps, EpsSetting::Value(0.25));
        let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn overrides_replace_values() {
        let text = apply_override("[solver]\nn = 16\n", "solver.nu=0.5").unwrap();
        let text = apply_override(&text, "output.dir=runs/a").unwrap();
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.solver.nu, 0.5);
        assert_eq!(cfg.solver.n, 16);
        assert_eq!(cfg.output.dir, PathBuf::from("runs/a"));
        assert!(apply_override("", "nodot=1").is_err());
    }
}
