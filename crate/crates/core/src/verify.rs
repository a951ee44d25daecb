//! Inequality harness: re-evaluates each lemma and theorem on the snapshots
//! of a finished run and reports signed margins (right side minus left).
//!
//! A check only passes or fails once its hypotheses have been confirmed on
//! the same data; otherwise it is reported as `hypothesis-unmet`.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    compute_r2, compute_r3, energy_bound_sq, f_inf_integrand, hypothesis_lhs, inertial_bounds, k41_condition,
    kolmogorov_spectrum, select_r1, spectral_caps, trapezoid, R3Variant,
};
use crate::diagnostics::{e_p, forcing_functional, make_cutoff, shell_spectrum, CutoffSpec, ShellSpectrum};
use crate::error::Result;
use crate::solver::{Forcing, Trajectory};

/// Relative slack allowed on a margin before it counts as a violation.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

/// Ideal-run drift limit for energy and cross-helicity.
pub const IDEAL_DRIFT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisUnmet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell: Option<usize>,
}

impl Sample {
    pub fn new(t: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            t,
            lhs,
            rhs,
            margin: rhs - lhs,
            shell: None,
        }
    }

    fn in_shell(mut self, k: usize) -> Self {
        self.shell = Some(k);
        self
    }

    pub fn satisfied(&self) -> bool {
        let scale = self.lhs.abs().max(self.rhs.abs());
        self.margin >= -MARGIN_TOLERANCE * scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeInfo {
    pub k: [f64; 3],
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "crate::config::exponent_list")]
    pub p_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeInfo>,
    pub samples: Vec<Sample>,
    pub status: Status,
    pub worst_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    fn judged(name: &str, probe: Option<ProbeInfo>, samples: Vec<Sample>) -> Self {
        let status = if samples.iter().all(Sample::satisfied) {
            Status::Pass
        } else {
            Status::Fail
        };
        let worst_margin = samples.iter().map(|s| s.margin).reduce(f64::min);
        Self {
            name: name.into(),
            probe,
            samples,
            status,
            worst_margin,
            note: None,
        }
    }

    fn unmet(name: &str, probe: Option<ProbeInfo>, why: String) -> Self {
        Self {
            name: name.into(),
            probe,
            samples: Vec::new(),
            status: Status::HypothesisUnmet,
            worst_margin: None,
            note: Some(why),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// `lhs < rhs`, except that `0 < 0` is accepted: with vanishing data every
/// quantity in the lemma is identically zero.
fn strictly_below(lhs: f64, rhs: f64) -> bool {
    lhs < rhs || (lhs == 0.0 && rhs == 0.0)
}

/// A probe wavevector with its cutoff width and exponent grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub k: [f64; 3],
    pub delta: f64,
    pub p_grid: Vec<f64>,
}

impl Probe {
    pub fn cutoff(&self) -> Result<CutoffSpec> {
        make_cutoff(self.k, self.delta)
    }

    fn info(&self) -> ProbeInfo {
        ProbeInfo {
            k: self.k,
            delta: self.delta,
            p_grid: self.p_grid.clone(),
        }
    }

    /// The configured grid with `∞` appended when absent.
    pub fn exponents(&self) -> Vec<f64> {
        let mut g = self.p_grid.clone();
        if !g.iter().any(|p| p.is_infinite()) {
            g.push(f64::INFINITY);
        }
        g
    }
}

/// Per-run quantities shared by the checks, recomputed from the snapshots.
pub struct RunView<'a> {
    pub traj: &'a Trajectory,
    pub forcing: Forcing,
    pub times: Vec<f64>,
    /// `R²(t_i)` at each snapshot.
    pub r_sq: Vec<f64>,
    pub min_diffusivity: f64,
    pub r3_variant: R3Variant,
    pub margin: f64,
}

impl<'a> RunView<'a> {
    pub fn new(traj: &'a Trajectory, margin: f64, r3_variant: R3Variant) -> Result<Self> {
        let grid = traj.grid();
        let forcing = Forcing::new(&traj.params.forcing, grid)?;
        let e0 = traj.snapshots[0].total_energy();
        let r_sq = traj.records.iter().map(|r| energy_bound_sq(e0, r.injected)).collect();
        Ok(Self {
            times: traj.times(),
            forcing,
            r_sq,
            min_diffusivity: traj.params.min_diffusivity(),
            r3_variant,
            margin,
            traj,
        })
    }

    /// `h_p(k, t_i)` for every snapshot: running supremum of the forcing
    /// functional at the snapshot times.
    pub fn h_series(&self, cut: &CutoffSpec, p: f64) -> Result<Vec<f64>> {
        let mut sup: f64 = 0.0;
        let mut out = Vec::with_capacity(self.times.len());
        for &t in &self.times {
            let (f1, f2) = self.forcing.eval(t);
            sup = sup.max(forcing_functional(&f1, &f2, cut, p)?);
            out.push(sup);
        }
        Ok(out)
    }

    /// `R₁(t_i)` auto-selected for one probe.
    pub fn r1_series(&self, probe: &Probe) -> Result<Vec<f64>> {
        let cut = probe.cutoff()?;
        let exps = probe.exponents();
        let h: Vec<Vec<f64>> = exps.iter().map(|&p| self.h_series(&cut, p)).collect::<Result<_>>()?;
        select_r1(
            &self.r_sq,
            |i, p| {
                let j = exps.iter().position(|&q| q == p).expect("exponent from grid");
                h[j][i]
            },
            probe.delta,
            &exps,
            self.min_diffusivity,
            self.margin,
        )
    }

    /// `F_∞(t_i)` at each snapshot, the largest over `probes` of the
    /// trapezoid integral of `|χ̂f̂₁|²_∞ + |χ̂f̂₂|²_∞`.
    pub fn f_inf_series(&self, probes: &[Probe]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.times.len()];
        for probe in probes {
            let cut = probe.cutoff()?;
            let integrand: Vec<f64> = self
                .times
                .iter()
                .map(|&t| {
                    let (f1, f2) = self.forcing.eval(t);
                    f_inf_integrand(&f1, &f2, &cut)
                })
                .collect::<Result<_>>()?;
            let mut acc = 0.0;
            for i in 0..self.times.len() {
                if i > 0 {
                    acc += 0.5 * (self.times[i] - self.times[i - 1]) * (integrand[i] + integrand[i - 1]);
                }
                out[i] = f64::max(out[i], acc);
            }
        }
        Ok(out)
    }

    /// `R₂(t_i)` from `R₁(0)` and `R₃(t_i)`.
    pub fn r2_series(&self, r1_initial: f64, f_inf: &[f64]) -> Result<Vec<f64>> {
        let (nu, eta) = (self.traj.params.nu, self.traj.params.eta);
        self.r_sq
            .iter()
            .zip(f_inf)
            .map(|(&r2, &f)| Ok(compute_r2(r1_initial, compute_r3(r2, f, nu, eta, self.r3_variant)?)))
            .collect()
    }
}

/// Gate for the Lemma 2.9 / 2.10 family: `hypothesis_lhs(p) < (min(ν,η)/6) R₁`
/// at every snapshot and every `p`, and `e_p(k, 0) < R₁(0)/|k|`.
fn lemma_hypotheses(view: &RunView, probe: &Probe, exps: &[f64], r1: &[f64]) -> Result<Option<String>> {
    let cut = probe.cutoff()?;
    let m = view.min_diffusivity;
    for &p in exps {
        let h = view.h_series(&cut, p)?;
        for i in 0..view.times.len() {
            let lhs = hypothesis_lhs(p, probe.delta, view.r_sq[i], h[i]);
            if !strictly_below(lhs, m / 6.0 * r1[i]) {
                return Ok(Some(format!(
                    "R1 hypothesis fails at t = {}, p = {p}: {lhs} >= {}",
                    view.times[i],
                    m / 6.0 * r1[i]
                )));
            }
        }
        let e0 = e_p(&view.traj.snapshots[0], &cut, p)?;
        let bound = r1[0] / cut.center_norm();
        if !strictly_below(e0, bound) {
            return Ok(Some(format!("initial e_{p}(k, 0) = {e0} is not below R1(0)/|k| = {bound}")));
        }
    }
    Ok(None)
}

fn diffusive(view: &RunView) -> Option<String> {
    (view.min_diffusivity <= 0.0).then(|| "min(nu, eta) = 0: the bounds require positive diffusion".to_string())
}

/// `e₂(k, t) ≤ R₁(t)/|k|` at every snapshot.
pub fn check_lemma_2_9(view: &RunView, probe: &Probe, r1: &[f64]) -> Result<CheckReport> {
    const NAME: &str = "lemma_2_9";
    let info = ProbeInfo {
        p_grid: vec![2.0],
        ..probe.info()
    };
    if let Some(why) = diffusive(view) {
        return Ok(CheckReport::unmet(NAME, Some(info), why));
    }
    let p = [2.0];
    if let Some(why) = lemma_hypotheses(view, probe, &p, r1)? {
        return Ok(CheckReport::unmet(NAME, Some(info), why));
    }
    let cut = probe.cutoff()?;
    let norm = cut.center_norm();
    let samples = view
        .traj
        .snapshots
        .iter()
        .zip(r1)
        .map(|(s, &r)| Ok(Sample::new(s.t, e_p(s, &cut, 2.0)?, r / norm)))
        .collect::<Result<_>>()?;
    Ok(CheckReport::judged(NAME, Some(info), samples))
}

/// `max_{p ∈ grid ∪ {∞}} e_p(k, t) ≤ R₁(t)/|k|` at every snapshot.
pub fn check_thm_2_7(view: &RunView, probe: &Probe, r1: &[f64]) -> Result<CheckReport> {
    const NAME: &str = "thm_2_7";
    if let Some(why) = diffusive(view) {
        return Ok(CheckReport::unmet(NAME, Some(probe.info()), why));
    }
    let exps = probe.exponents();
    if let Some(why) = lemma_hypotheses(view, probe, &exps, r1)? {
        return Ok(CheckReport::unmet(NAME, Some(probe.info()), why));
    }
    let cut = probe.cutoff()?;
    let norm = cut.center_norm();
    let mut samples = Vec::new();
    for (s, &r) in view.traj.snapshots.iter().zip(r1) {
        samples.push(Sample::new(s.t, sup_e_p(s, &cut, &exps)?, r / norm));
    }
    Ok(CheckReport::judged(NAME, Some(probe.info()), samples))
}

fn sup_e_p(state: &crate::solver::MhdState, cut: &CutoffSpec, exps: &[f64]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &p in exps {
        best = best.max(e_p(state, cut, p)?);
    }
    Ok(best)
}

/// `∫₀ᵀ sup_p e_p(k, t) dt ≤ R₂²(T) / (min(ν,η) |k|⁴)` for every snapshot
/// time `T`, with the trapezoid rule on the snapshots.
pub fn check_thm_2_8(view: &RunView, probe: &Probe, r1: &[f64], r2: &[f64]) -> Result<CheckReport> {
    const NAME: &str = "thm_2_8";
    if let Some(why) = diffusive(view) {
        return Ok(CheckReport::unmet(NAME, Some(probe.info()), why));
    }
    let exps = probe.exponents();
    if let Some(why) = lemma_hypotheses(view, probe, &exps, r1)? {
        return Ok(CheckReport::unmet(NAME, Some(probe.info()), why));
    }
    let cut = probe.cutoff()?;
    let k4 = cut.center_norm().powi(4);
    let mut series = Vec::new();
    let mut samples = Vec::new();
    for (i, s) in view.traj.snapshots.iter().enumerate() {
        series.push((s.t, sup_e_p(s, &cut, &exps)?));
        let rhs = r2[i] * r2[i] / (view.min_diffusivity * k4);
        samples.push(Sample::new(s.t, trapezoid(&series), rhs));
    }
    Ok(CheckReport::judged(NAME, Some(probe.info()), samples))
}

fn shells_in(spec: &ShellSpectrum, k_lo: usize, k_hi: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    spec.shells
        .iter()
        .filter(move |s| s.k >= k_lo && s.k <= k_hi)
        .map(|s| (s.k, s.energy))
}

/// `E(k, t) ≤ 4π R₁(t)²` per shell `k_lo..=k_hi` and snapshot.
pub fn check_thm_3_1(view: &RunView, r1: &[f64], k_lo: usize, k_hi: usize) -> Result<CheckReport> {
    const NAME: &str = "thm_3_1";
    if let Some(why) = diffusive(view) {
        return Ok(CheckReport::unmet(NAME, None, why));
    }
    let mut samples = Vec::new();
    for (s, &r) in view.traj.snapshots.iter().zip(r1) {
        let spec = shell_spectrum(s);
        for (k, e) in shells_in(&spec, k_lo, k_hi) {
            samples.push(Sample::new(s.t, e, 4.0 * std::f64::consts::PI * r * r).in_shell(k));
        }
    }
    Ok(CheckReport::judged(NAME, None, samples))
}

/// `(1/T) ∫₀ᵀ E(k, t) dt ≤ 4π R₂²(T) / (min(ν,η) T k²)` per shell and
/// snapshot time `T > 0`.
pub fn check_thm_3_2(view: &RunView, r2: &[f64], k_lo: usize, k_hi: usize) -> Result<CheckReport> {
    const NAME: &str = "thm_3_2";
    if let Some(why) = diffusive(view) {
        return Ok(CheckReport::unmet(NAME, None, why));
    }
    let spectra: Vec<ShellSpectrum> = view.traj.snapshots.iter().map(shell_spectrum).collect();
    let (nu, eta) = (view.traj.params.nu, view.traj.params.eta);
    let mut samples = Vec::new();
    for k in k_lo..=k_hi {
        let mut series = Vec::new();
        for (i, spec) in spectra.iter().enumerate() {
            let Some(shell) = spec.get(k) else { continue };
            series.push((spec.t, shell.energy));
            let t = spec.t;
            if t <= 0.0 {
                continue;
            }
            let (_, cap) = spectral_caps(k as f64, 1.0, r2[i], nu, eta, t);
            samples.push(Sample::new(t, trapezoid(&series) / t, cap).in_shell(k));
        }
    }
    Ok(CheckReport::judged(NAME, None, samples))
}

/// `E_K(k) = C₀ε^{2/3}k^{−5/3}` stays inside both caps on `[k₁, k₂]`,
/// and the range is nonempty exactly when the necessary condition holds.
pub fn check_thm_3_4(view: &RunView, c0: f64, eps: f64, r1: f64, r2: f64) -> Result<CheckReport> {
    const NAME: &str = "thm_3_4";
    if let Some(why) = diffusive(view) {
        return Ok(CheckReport::unmet(NAME, None, why));
    }
    let (nu, eta) = (view.traj.params.nu, view.traj.params.eta);
    let t = *view.times.last().expect("nonempty run");
    if t <= 0.0 {
        return Ok(CheckReport::unmet(NAME, None, "run horizon T = 0".into()));
    }
    let (k1, k2) = inertial_bounds(c0, eps, nu, eta, r1, r2, t)?;
    let cond = k41_condition(c0, eps, nu, eta, r1, r2, t)?;
    if cond.holds != (k1 <= k2) {
        let mut r = CheckReport::judged(NAME, None, vec![Sample::new(t, cond.lhs, cond.rhs)]);
        r.status = Status::Fail;
        r.note = Some(format!("condition verdict {} disagrees with k1 = {k1}, k2 = {k2}", cond.holds));
        return Ok(r);
    }
    if !cond.holds {
        return Ok(CheckReport::unmet(
            NAME,
            None,
            format!("necessary condition fails (k1 = {k1} > k2 = {k2}); no inertial range"),
        ));
    }
    let samples = (0..=32)
        .map(|i| {
            let k = k1 * (k2 / k1).powf(i as f64 / 32.0);
            let (a, b) = spectral_caps(k, r1, r2, nu, eta, t);
            Sample::new(t, kolmogorov_spectrum(c0, eps, k), a.min(b))
        })
        .collect();
    Ok(CheckReport::judged(NAME, None, samples))
}

/// `E(t) + min(ν,η) ∫₀ᵗ (‖∇u‖² + ‖∇b‖²) ≤ R²(t)` at each snapshot.
pub fn check_energy_inequality(view: &RunView) -> CheckReport {
    let samples = view
        .traj
        .snapshots
        .iter()
        .zip(&view.traj.records)
        .zip(&view.r_sq)
        .map(|((s, r), &r2)| Sample::new(s.t, s.total_energy() + r.dissipated, r2))
        .collect();
    CheckReport::judged("energy_inequality", None, samples)
}

/// Relative drift of energy and cross-helicity for an ideal, unforced run.
pub fn check_ideal_invariants(view: &RunView) -> CheckReport {
    const NAME: &str = "ideal_invariants";
    let p = &view.traj.params;
    if p.nu != 0.0 || p.eta != 0.0 || view.forcing.is_active() {
        return CheckReport::unmet(NAME, None, "not an ideal unforced run".into());
    }
    let s0 = &view.traj.snapshots[0];
    let (e0, h0) = (s0.total_energy(), s0.cross_helicity());
    // cross-helicity can vanish while energy does not
    let h_scale = if h0.abs() > 1e-8 * e0 { h0.abs() } else { e0 };
    let rel = |d: f64, scale: f64| if scale > 0.0 { d.abs() / scale } else { d.abs() };
    let samples = view
        .traj
        .snapshots
        .iter()
        .map(|s| {
            let de = rel(s.total_energy() - e0, e0);
            let dh = rel(s.cross_helicity() - h0, h_scale);
            Sample::new(s.t, de.max(dh), IDEAL_DRIFT_TOLERANCE)
        })
        .collect();
    CheckReport::judged(NAME, None, samples)
}

/// Options for [`verify_run`].
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub probes: Vec<Probe>,
    pub margin: f64,
    pub r3_variant: R3Variant,
    /// Shell range for the spectral theorems.
    pub shells: (usize, usize),
    /// `(C₀, ε)` for the inertial-range check, when available.
    pub inertial: Option<(f64, f64)>,
}

/// Runs every applicable check on a finished trajectory.
pub fn verify_run(traj: &Trajectory, opts: &VerifyOptions) -> Result<Vec<CheckReport>> {
    let view = RunView::new(traj, opts.margin, opts.r3_variant)?;
    let mut reports = vec![check_energy_inequality(&view)];
    let ideal = traj.params.nu == 0.0 && traj.params.eta == 0.0;
    if ideal {
        reports.push(check_ideal_invariants(&view));
    }
    if let Some(why) = diffusive(&view) {
        for name in ["lemma_2_9", "thm_2_7", "thm_2_8", "thm_3_1", "thm_3_2"] {
            reports.push(CheckReport::unmet(name, None, why.clone()));
        }
        return Ok(reports);
    }
    if opts.probes.is_empty() {
        for name in ["lemma_2_9", "thm_2_7", "thm_2_8", "thm_3_1", "thm_3_2"] {
            reports.push(CheckReport::unmet(name, None, "no probes configured; R1 is undefined".into()));
        }
        return Ok(reports);
    }
    let f_inf = view.f_inf_series(&opts.probes)?;
    let mut r1_all = vec![0.0; view.times.len()];
    for probe in &opts.probes {
        let r1 = view.r1_series(probe)?;
        let r2 = view.r2_series(r1[0], &f_inf)?;
        reports.push(check_lemma_2_9(&view, probe, &r1)?);
        reports.push(check_thm_2_7(&view, probe, &r1)?);
        reports.push(check_thm_2_8(&view, probe, &r1, &r2)?);
        for (a, b) in r1_all.iter_mut().zip(&r1) {
            *a = f64::max(*a, *b);
        }
    }
    let r2_all = view.r2_series(r1_all[0], &f_inf)?;
    let (k_lo, k_hi) = opts.shells;
    reports.push(check_thm_3_1(&view, &r1_all, k_lo, k_hi)?);
    reports.push(check_thm_3_2(&view, &r2_all, k_lo, k_hi)?);
    if let Some((c0, eps)) = opts.inertial {
        let last = view.times.len() - 1;
        reports.push(check_thm_3_4(&view, c0, eps, r1_all[last], r2_all[last])?);
    }
    Ok(reports)
}

/// True when some check with verified hypotheses failed.
pub fn any_failed(reports: &[CheckReport]) -> bool {
    reports.iter().any(|r| r.status == Status::Fail)
}
