//! Command implementations behind the `mhd-spectra` binary: `run`, `bounds`,
//! `verify` and `spectrum`.
//!
//! A run directory holds:
//!
//! | file | content |
//! |------|---------|
//! | `config.cfg` | the validated configuration |
//! | `run.json` | run summary and energy ledger |
//! | `checkpoint.bin` | final state (`MHDS1`) |
//! | `snapshots/snap_NNNNN.bin` | state after step `NNNNN` |
//! | `energy.csv`, `energy.jsonl` | energy ledger per snapshot |
//! | `diagnostics.csv`, `diagnostics.jsonl` | `t, k, p, e_p, h_p, E, eps` |
//! | `spectrum.csv` | shell spectrum per snapshot |
//! | `verify.json` | written by `verify` |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{bounds_report, trapezoid, BoundInputs, BoundsReport, EpsSource, SCHEMA_VERSION};
use crate::config::{parse_config, EpsSetting, Format, RunConfig};
use crate::diagnostics::{
    dissipation_rate, e_p, forcing_functional, shell_spectrum, slope_fit, ShellSpectrum, SlopeFit,
};
use crate::error::{Error, Result};
use crate::solver::{checkpoint, EnergyRecord, Forcing, MhdState, Simulation, Trajectory};
use crate::verify::{any_failed, verify_run, CheckReport, RunView, VerifyOptions};

pub const CONFIG_FILE: &str = "config.cfg";
pub const SUMMARY_FILE: &str = "run.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const VERIFY_FILE: &str = "verify.json";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const FIT_FILE: &str = "spectrum_fit.json";

pub const DIAGNOSTICS_COLUMNS: [&str; 7] = ["t", "k", "p", "e_p", "h_p", "E", "eps"];

const ENERGY_COLUMNS: [&str; 11] = [
    "t",
    "E",
    "kinetic",
    "magnetic",
    "cross_helicity",
    "eps",
    "dissipated",
    "injected",
    "viscous_work",
    "residual",
    "balance",
];

fn with_path<T>(path: &Path, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    with_path(path, fs::write(path, contents))
}

fn read_text(path: &Path) -> Result<String> {
    with_path(path, fs::read_to_string(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// JSON number, with `∞` written as the string `"inf"`.
fn num(x: f64) -> Value {
    if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        json!(x)
    }
}

fn k_label(k: [f64; 3]) -> String {
    format!("{} {} {}", k[0], k[1], k[2])
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub k: [f64; 3],
    pub p: f64,
    pub e_p: f64,
    pub h_p: f64,
    /// Shell energy `E(round(|k|), t)`.
    pub shell_energy: f64,
    pub eps: f64,
}

impl DiagnosticRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.t,
            k_label(self.k),
            self.p,
            self.e_p,
            self.h_p,
            self.shell_energy,
            self.eps
        )
    }

    fn json(&self) -> Value {
        json!({
            "t": self.t,
            "k": self.k,
            "p": num(self.p),
            "e_p": num(self.e_p),
            "h_p": num(self.h_p),
            "E": self.shell_energy,
            "eps": self.eps,
        })
    }
}

/// Diagnostics rows for every snapshot, probe and exponent, in that order.
pub fn diagnostic_rows(traj: &Trajectory, cfg: &RunConfig) -> Result<Vec<DiagnosticRow>> {
    let forcing = Forcing::new(&traj.params.forcing, traj.grid())?;
    let probes = cfg.probes();
    let cuts = probes.iter().map(|p| p.cutoff()).collect::<Result<Vec<_>>>()?;
    let exps: Vec<Vec<f64>> = probes.iter().map(|p| p.exponents()).collect();
    let mut sup: Vec<Vec<f64>> = exps.iter().map(|e| vec![0.0; e.len()]).collect();
    let (nu, eta) = (traj.params.nu, traj.params.eta);
    let mut rows = Vec::new();
    for state in &traj.snapshots {
        let eps = dissipation_rate(state, nu, eta);
        let spectrum = shell_spectrum(state);
        let (f1, f2) = forcing.eval(state.t);
        for (i, cut) in cuts.iter().enumerate() {
            let shell = cut.center_norm().round() as usize;
            let shell_energy = spectrum.get(shell).map_or(0.0, |s| s.energy);
            for (j, &p) in exps[i].iter().enumerate() {
                sup[i][j] = sup[i][j].max(forcing_functional(&f1, &f2, cut, p)?);
                rows.push(DiagnosticRow {
                    t: state.t,
                    k: cut.center(),
                    p,
                    e_p: e_p(state, cut, p)?,
                    h_p: sup[i][j],
                    shell_energy,
                    eps,
                });
            }
        }
    }
    Ok(rows)
}

fn energy_values(state: &MhdState, rec: &EnergyRecord, nu: f64, eta: f64) -> [f64; 11] {
    [
        rec.t,
        rec.energy(),
        rec.kinetic,
        rec.magnetic,
        state.cross_helicity(),
        dissipation_rate(state, nu, eta),
        rec.dissipated,
        rec.injected,
        rec.viscous_work,
        rec.residual,
        rec.balance,
    ]
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = String>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn jsonl(rows: impl IntoIterator<Item = Value>) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(spectra: &[ShellSpectrum]) -> String {
    let mut out = String::from("t,k,E,count\n");
    for s in spectra {
        for shell in &s.shells {
            let _ = writeln!(out, "{},{},{},{}", s.t, shell.k, shell.energy, shell.count);
        }
    }
    out
}

/// Time mean of the dissipation rate over the snapshots (trapezoid rule);
/// the instantaneous value for a zero-length run.
pub fn mean_dissipation(traj: &Trajectory) -> f64 {
    let (nu, eta) = (traj.params.nu, traj.params.eta);
    let samples: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.t, dissipation_rate(s, nu, eta)))
        .collect();
    let span = samples.last().unwrap().0 - samples[0].0;
    if span > 0.0 {
        trapezoid(&samples) / span
    } else {
        samples[0].1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRef {
    pub step: usize,
    pub t: f64,
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub t: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub magnetic: f64,
    pub cross_helicity: f64,
    pub max_divergence: f64,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub n: usize,
    pub nu: f64,
    pub eta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub cadence: usize,
    pub snapshots: Vec<SnapshotRef>,
    #[serde(rename = "final")]
    pub final_state: FinalState,
    /// Time mean of `ε` over the snapshots.
    pub eps_mean: f64,
    pub ledger: Vec<EnergyRecord>,
}

fn snapshot_name(step: usize) -> String {
    format!("{SNAPSHOT_DIR}/snap_{step:05}.bin")
}

/// Runs the simulation of `cfg` and writes every artifact into
/// `cfg.output.dir`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let diags = crate::config::validate(cfg, "");
    if !diags.is_empty() {
        return Err(Error::ConfigDiagnostics(diags));
    }
    let params = cfg.solver_params();
    let mut sim = Simulation::new(params.clone())?;
    let total = sim.total_steps();
    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    sim.run_with(|s, r| {
        snapshots.push(s.clone());
        records.push(*r);
        Ok(())
    })?;
    let traj = Trajectory {
        params,
        snapshots,
        records,
    };
    write_run(cfg, &traj, total)
}

/// Writes the artifacts of a finished trajectory.
pub fn write_run(cfg: &RunConfig, traj: &Trajectory, total_steps: usize) -> Result<RunSummary> {
    let dir = &cfg.output.dir;
    with_path(dir, fs::create_dir_all(dir))?;
    let p = &traj.params;
    write_file(&dir.join(CONFIG_FILE), cfg.to_toml()?.as_bytes())?;

    let last = traj.final_state();
    checkpoint::write_file(&dir.join(CHECKPOINT_FILE), last, p.nu, p.eta)?;
    if cfg.output.snapshots {
        let sd = dir.join(SNAPSHOT_DIR);
        with_path(&sd, fs::create_dir_all(&sd))?;
    }
    let mut refs = Vec::with_capacity(traj.snapshots.len());
    for (i, s) in traj.snapshots.iter().enumerate() {
        let step = (i * p.cadence).min(total_steps);
        let file = if cfg.output.snapshots {
            let name = snapshot_name(step);
            checkpoint::write_file(&dir.join(&name), s, p.nu, p.eta)?;
            Some(name)
        } else {
            None
        };
        refs.push(SnapshotRef { step, t: s.t, file });
    }

    let energy: Vec<[f64; 11]> = traj
        .snapshots
        .iter()
        .zip(&traj.records)
        .map(|(s, r)| energy_values(s, r, p.nu, p.eta))
        .collect();
    let diag = diagnostic_rows(traj, cfg)?;
    if cfg.wants(Format::Csv) {
        let rows = energy
            .iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        write_file(&dir.join("energy.csv"), csv_table(&ENERGY_COLUMNS, rows).as_bytes())?;
        write_file(
            &dir.join("diagnostics.csv"),
            csv_table(&DIAGNOSTICS_COLUMNS, diag.iter().map(DiagnosticRow::csv)).as_bytes(),
        )?;
        let spectra: Vec<ShellSpectrum> = traj.snapshots.iter().map(shell_spectrum).collect();
        write_file(&dir.join(SPECTRUM_FILE), spectrum_csv(&spectra).as_bytes())?;
    }
    if cfg.wants(Format::Jsonl) {
        let rows = energy.iter().map(|v| {
            Value::Object(
                ENERGY_COLUMNS
                    .iter()
                    .zip(v)
                    .map(|(k, x)| (k.to_string(), json!(x)))
                    .collect(),
            )
        });
        write_file(&dir.join("energy.jsonl"), jsonl(rows).as_bytes())?;
        write_file(&dir.join("diagnostics.jsonl"), jsonl(diag.iter().map(DiagnosticRow::json)).as_bytes())?;
    }

    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        n: p.n,
        nu: p.nu,
        eta: p.eta,
        dt: p.dt,
        t_end: p.t_end,
        steps: total_steps,
        cadence: p.cadence,
        snapshots: refs,
        final_state: FinalState {
            t: last.t,
            energy: last.total_energy(),
            kinetic: last.kinetic_energy(),
            magnetic: last.magnetic_energy(),
            cross_helicity: last.cross_helicity(),
            max_divergence: last.max_divergence(),
        },
        eps_mean: mean_dissipation(traj),
        ledger: traj.records.clone(),
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// A finished run read back from its directory.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub summary: RunSummary,
    pub trajectory: Trajectory,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let mut config = parse_config(&read_text(&dir.join(CONFIG_FILE))?)?;
    config.output.dir = dir.to_path_buf();
    let summary: RunSummary = serde_json::from_str(&read_text(&dir.join(SUMMARY_FILE))?)
        .map_err(|e| Error::Artifact(format!("{}: {e}", dir.join(SUMMARY_FILE).display())))?;
    if summary.ledger.len() != summary.snapshots.len() {
        return Err(Error::Artifact(format!(
            "{}: {} ledger entries for {} snapshots",
            dir.join(SUMMARY_FILE).display(),
            summary.ledger.len(),
            summary.snapshots.len()
        )));
    }
    let params = config.solver_params();
    let mut snapshots = Vec::with_capacity(summary.snapshots.len());
    for r in &summary.snapshots {
        let file = r.file.as_ref().ok_or_else(|| {
            Error::Artifact(format!(
                "{} was written without snapshots (output.snapshots = false)",
                dir.display()
            ))
        })?;
        let cp = checkpoint::read_file(&dir.join(file))?;
        if cp.state.grid().n() != params.n {
            return Err(Error::GridMismatch {
                left: cp.state.grid().n(),
                right: params.n,
            });
        }
        snapshots.push(cp.state);
    }
    let trajectory = Trajectory {
        params,
        snapshots,
        records: summary.ledger.clone(),
    };
    Ok(LoadedRun {
        dir: dir.to_path_buf(),
        config,
        summary,
        trajectory,
    })
}

/// `ε` for the bounds: the configured value, or the measured time mean.
pub fn resolve_eps(cfg: &RunConfig, eps_mean: f64) -> (f64, EpsSource) {
    match cfg.bounds.eps {
        EpsSetting::Value(v) => (v, EpsSource::Supplied),
        EpsSetting::Measured => (eps_mean, EpsSource::Measured),
    }
}

/// Bound inputs at the final time of a run; `R₁` is the largest
/// auto-selected value over the configured probes.
pub fn bound_inputs_from_run(run: &LoadedRun) -> Result<BoundInputs> {
    let cfg = &run.config;
    let c0 = cfg
        .bounds
        .c0
        .ok_or_else(|| Error::Config("bounds.c0 must be set to evaluate the inertial-range bounds".into()))?;
    let probes = cfg.probes();
    if probes.is_empty() {
        return Err(Error::Config("at least one [[probe]] is needed to select R1".into()));
    }
    let traj = &run.trajectory;
    let view = RunView::new(traj, cfg.bounds.margin, cfg.bounds.r3_variant)?;
    let mut r1 = vec![0.0; view.times.len()];
    for probe in &probes {
        for (a, b) in r1.iter_mut().zip(view.r1_series(probe)?) {
            *a = f64::max(*a, b);
        }
    }
    let f_inf = view.f_inf_series(&probes)?;
    let last = view.times.len() - 1;
    let (eps, eps_source) = resolve_eps(cfg, run.summary.eps_mean);
    Ok(BoundInputs {
        nu: traj.params.nu,
        eta: traj.params.eta,
        c0,
        eps,
        eps_source,
        t: view.times[last],
        r_sq: view.r_sq[last],
        r1_initial: r1[0],
        r1_final: r1[last],
        f_inf: f_inf[last],
        r3_variant: cfg.bounds.r3_variant,
    })
}

/// Closed-form bounds; needs no simulation.
pub fn cmd_bounds(inputs: &BoundInputs) -> Result<BoundsReport> {
    bounds_report(inputs)
}

/// Contents of `verify.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub schema_version: u32,
    pub any_failed: bool,
    pub reports: Vec<CheckReport>,
}

pub fn verify_options(cfg: &RunConfig, eps_mean: f64) -> VerifyOptions {
    let [lo, hi] = cfg.bounds.shells;
    VerifyOptions {
        probes: cfg.probes(),
        margin: cfg.bounds.margin,
        r3_variant: cfg.bounds.r3_variant,
        shells: (lo, hi),
        inertial: cfg.bounds.c0.map(|c0| (c0, resolve_eps(cfg, eps_mean).0)),
    }
}

/// Runs the inequality harness on a finished run and writes `verify.json`.
pub fn cmd_verify(dir: &Path) -> Result<VerifyOutput> {
    let run = load_run(dir)?;
    let opts = verify_options(&run.config, run.summary.eps_mean);
    let reports = verify_run(&run.trajectory, &opts)?;
    let out = VerifyOutput {
        schema_version: SCHEMA_VERSION,
        any_failed: any_failed(&reports),
        reports,
    };
    write_json(&dir.join(VERIFY_FILE), &out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub schema_version: u32,
    pub t: f64,
    pub k_lo: usize,
    pub k_hi: usize,
    pub fit: SlopeFit,
}

#[derive(Debug, Clone)]
pub struct SpectrumOutput {
    pub spectra: Vec<ShellSpectrum>,
    pub fit: Option<FitOutput>,
}

/// Shell spectra of every snapshot, written to `spectrum.csv`, plus an
/// optional slope fit of the final spectrum over `[k_lo, k_hi]`.
pub fn cmd_spectrum(dir: &Path, fit: Option<(usize, usize)>) -> Result<SpectrumOutput> {
    let run = load_run(dir)?;
    let spectra: Vec<ShellSpectrum> = run.trajectory.snapshots.iter().map(shell_spectrum).collect();
    write_file(&dir.join(SPECTRUM_FILE), spectrum_csv(&spectra).as_bytes())?;
    let fit = match fit {
        Some((k_lo, k_hi)) => {
            let last = spectra.last().expect("trajectory is never empty");
            let out = FitOutput {
                schema_version: SCHEMA_VERSION,
                t: last.t,
                k_lo,
                k_hi,
                fit: slope_fit(last, k_lo, k_hi)?,
            };
            write_json(&dir.join(FIT_FILE), &out)?;
            Some(out)
        }
        None => None,
    };
    Ok(SpectrumOutput { spectra, fit })
}
