//! Closed-form bounds: the energy radius `R`, the attracting radii `R₁`,
//! `R₂`, `R₃`, the forcing integral `F_∞`, the inertial-range endpoints
//! `k₁ ≤ k ≤ k₂`, the maximal time `T₀`, the minimal dissipation `ε_min`,
//! and the region `S` bounded by the two spectral caps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::CutoffSpec;
use crate::error::{require_positive, Error, Result};
use crate::spectral::SpectralField;

pub const SCHEMA_VERSION: u32 = 1;

/// `R²(T) = ‖u₀‖² + ‖b₀‖² + 2 max(0, W(T))` where `W(T)` is the forcing
/// work `∫₀ᵀ ∫ (u·f₁ + b·f₂)`.
pub fn energy_bound_sq(initial_energy: f64, work: f64) -> f64 {
    initial_energy + 2.0 * work.max(0.0)
}

/// `R(T)` from a cumulative work series `(t, W(t))`, linearly interpolated
/// at `t`. An empty series means no forcing.
pub fn energy_bound_r(initial_energy: f64, work: &[(f64, f64)], t: f64) -> f64 {
    energy_bound_sq(initial_energy, interpolate(work, t)).sqrt()
}

fn interpolate(series: &[(f64, f64)], t: f64) -> f64 {
    match series.iter().position(|&(s, _)| s >= t) {
        None => series.last().map_or(0.0, |p| p.1),
        Some(0) => series[0].1,
        Some(i) => {
            let (t0, v0) = series[i - 1];
            let (t1, v1) = series[i];
            if t1 == t0 {
                v1
            } else {
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

/// `2^{1/p} (2δ)^{3/p} R² + 2 h_p`, the left side of the `R₁` hypothesis;
/// the prefactor tends to 1 as `p → ∞`.
pub fn hypothesis_lhs(p: f64, delta: f64, r_sq: f64, h: f64) -> f64 {
    let factor = if p.is_infinite() {
        1.0
    } else {
        2f64.powf(1.0 / p) * (2.0 * delta).powf(3.0 / p)
    };
    factor * r_sq + 2.0 * h
}

/// Chooses `R₁(t)` so that `hypothesis_lhs < (min(ν,η)/6) R₁(t)` holds
/// with the given margin at every sample and every `p`.
///
/// `h(i, p)` returns `h_p(k, t_i)`. The result is made nondecreasing.
pub fn select_r1(
    r_sq: &[f64],
    h: impl Fn(usize, f64) -> f64,
    delta: f64,
    p_grid: &[f64],
    min_diffusivity: f64,
    margin: f64,
) -> Result<Vec<f64>> {
    require_positive("min(nu, eta)", min_diffusivity)?;
    require_positive("delta", delta)?;
    if !(margin > 1.0 && margin.is_finite()) {
        return Err(Error::Constraint(format!("R1 margin must exceed 1, got {margin}")));
    }
    let mut grid: Vec<f64> = p_grid.to_vec();
    if !grid.iter().any(|p| p.is_infinite()) {
        grid.push(f64::INFINITY);
    }
    for &p in &grid {
        crate::diagnostics::check_exponent(p)?;
    }
    let mut out = Vec::with_capacity(r_sq.len());
    let mut running: f64 = 0.0;
    for (i, &r2) in r_sq.iter().enumerate() {
        let worst = grid
            .iter()
            .map(|&p| hypothesis_lhs(p, delta, r2, h(i, p)))
            .fold(0.0, f64::max);
        running = running.max(margin * 6.0 / min_diffusivity * worst);
        out.push(running);
    }
    Ok(out)
}

/// `|χ̂_k f̂₁|²_∞ + |χ̂_k f̂₂|²_∞`, the integrand of `F_∞`.
pub fn f_inf_integrand(f1: &SpectralField, f2: &SpectralField, cut: &CutoffSpec) -> Result<f64> {
    f1.check_grid(f2)?;
    let mut s1: f64 = 0.0;
    let mut s2: f64 = 0.0;
    for (idx, chi) in cut.support(f1.grid()) {
        s1 = s1.max(chi * chi * f1.norm_sqr_at(idx));
        s2 = s2.max(chi * chi * f2.norm_sqr_at(idx));
    }
    Ok(s1 + s2)
}

/// `F_∞(T)`: the largest over probes of the trapezoid-rule time integral of
/// [`f_inf_integrand`], using the samples with `t <= T`.
pub fn compute_f_inf<'a>(
    history: &[(f64, &'a SpectralField, &'a SpectralField)],
    probes: &[CutoffSpec],
    t_end: f64,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Constraint("F_inf needs at least one probe".into()));
    }
    let mut best: f64 = 0.0;
    for cut in probes {
        let mut samples = Vec::new();
        for &(t, f1, f2) in history.iter().filter(|s| s.0 <= t_end) {
            samples.push((t, f_inf_integrand(f1, f2, cut)?));
        }
        best = best.max(trapezoid(&samples));
    }
    Ok(best)
}

/// Trapezoid rule over `(t, value)` samples in increasing time.
pub fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum R3Variant {
    /// `R₃ = 2R²/min(ν,η) + 2F_∞/√min(ν,η)`.
    #[default]
    Theorem,
    /// The `p → ∞` limit of the quadratic-root constant, `4(R² + √F_∞)`.
    Proof,
}

pub fn compute_r3(r_sq: f64, f_inf: f64, nu: f64, eta: f64, variant: R3Variant) -> Result<f64> {
    let m = nu.min(eta);
    require_positive("min(nu, eta)", m)?;
    if !(r_sq >= 0.0 && f_inf >= 0.0) {
        return Err(Error::Constraint(format!(
            "R3 needs R^2 >= 0 and F_inf >= 0, got {r_sq}, {f_inf}"
        )));
    }
    Ok(match variant {
        R3Variant::Theorem => 2.0 * r_sq / m + 2.0 * f_inf / m.sqrt(),
        R3Variant::Proof => 4.0 * (r_sq + f_inf.sqrt()),
    })
}

/// `R₂ = ½(R₃ + √(4R₁(0)² + R₃²))`, the positive root of
/// `x² − R₃x − R₁(0)² = 0`.
pub fn compute_r2(r1_at_0: f64, r3: f64) -> f64 {
    0.5 * (r3 + (4.0 * r1_at_0 * r1_at_0 + r3 * r3).sqrt())
}

/// `(k₁, k₂)` with `k₁ = C₀^{3/5} ε^{2/5} / (4πR₁²)^{3/5}` and
/// `k₂ = (4π / (C₀ min(ν,η)))³ R₂⁶ / (ε² T³)`.
pub fn inertial_bounds(c0: f64, eps: f64, nu: f64, eta: f64, r1: f64, r2: f64, t: f64) -> Result<(f64, f64)> {
    let m = nu.min(eta);
    for (name, v) in [("C0", c0), ("eps", eps), ("min(nu, eta)", m), ("R1", r1), ("R2", r2), ("T", t)] {
        require_positive(name, v)?;
    }
    let k1 = c0.powf(0.6) * eps.powf(0.4) / (4.0 * PI * r1 * r1).powf(0.6);
    let k2 = (4.0 * PI / (c0 * m)).powi(3) * r2.powi(6) / (eps * eps * t.powi(3));
    Ok((k1, k2))
}

/// Kolmogorov-type spectrum `E_K(k) = C₀ ε^{2/3} k^{−5/3}`.
pub fn kolmogorov_spectrum(c0: f64, eps: f64, k: f64) -> f64 {
    c0 * eps.powf(2.0 / 3.0) * k.powf(-5.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub holds: bool,
    /// Right side minus left side.
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// `min(ν,η)^{5/6} C₀ ε^{2/3} ≤ 4π (R₂/√T)^{5/3} R₁^{1/3}`.
pub fn k41_condition(c0: f64, eps: f64, nu: f64, eta: f64, r1: f64, r2: f64, t: f64) -> Result<Condition> {
    let m = nu.min(eta);
    for (name, v) in [("C0", c0), ("eps", eps), ("min(nu, eta)", m), ("R1", r1), ("R2", r2), ("T", t)] {
        require_positive(name, v)?;
    }
    let lhs = m.powf(5.0 / 6.0) * c0 * eps.powf(2.0 / 3.0);
    let rhs = 4.0 * PI * (r2 / t.sqrt()).powf(5.0 / 3.0) * r1.powf(1.0 / 3.0);
    Ok(Condition {
        holds: lhs <= rhs,
        margin: rhs - lhs,
        lhs,
        rhs,
    })
}

/// `T₀ = (4π)^{6/5} R₂² R₁^{2/5} / (ε^{4/5} C₀^{6/5} min(ν,η))`.
pub fn max_time_t0(c0: f64, eps: f64, nu: f64, eta: f64, r1: f64, r2: f64) -> Result<f64> {
    let m = nu.min(eta);
    for (name, v) in [("C0", c0), ("eps", eps), ("min(nu, eta)", m), ("R1", r1), ("R2", r2)] {
        require_positive(name, v)?;
    }
    Ok((4.0 * PI).powf(1.2) * r2 * r2 * r1.powf(0.4) / (eps.powf(0.8) * c0.powf(1.2) * m))
}

/// `ε_min = (4π)^{3/2} R₁^{1/2} R₂^{5/2} / (T₀^{5/4} min(ν,η)^{5/4} C₀^{3/2})`.
pub fn min_dissipation(t0: f64, nu: f64, eta: f64, c0: f64, r1: f64, r2: f64) -> Result<f64> {
    let m = nu.min(eta);
    for (name, v) in [("T0", t0), ("min(nu, eta)", m), ("C0", c0), ("R1", r1), ("R2", r2)] {
        require_positive(name, v)?;
    }
    Ok((4.0 * PI).powf(1.5) * r1.sqrt() * r2.powf(2.5) / (t0.powf(1.25) * m.powf(1.25) * c0.powf(1.5)))
}

/// The two spectral caps `4πR₁²` and `4πR₂²/(min(ν,η) T k²)` at `k`.
pub fn spectral_caps(k: f64, r1: f64, r2: f64, nu: f64, eta: f64, t: f64) -> (f64, f64) {
    let m = nu.min(eta);
    (4.0 * PI * r1 * r1, 4.0 * PI * r2 * r2 / (m * t * k * k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub k: f64,
    pub energy: f64,
    pub cap_r1: f64,
    pub cap_r2: f64,
    pub member: bool,
}

/// Membership of `(k, E)` in `S = {0 ≤ E ≤ 4πR₁², 0 ≤ E ≤ 4πR₂²/(min(ν,η)Tk²)}`.
pub fn region_s(k: f64, energy: f64, r1: f64, r2: f64, nu: f64, eta: f64, t: f64) -> Result<RegionPoint> {
    require_positive("k", k)?;
    require_positive("min(nu, eta)", nu.min(eta))?;
    require_positive("T", t)?;
    let (cap_r1, cap_r2) = spectral_caps(k, r1, r2, nu, eta, t);
    Ok(RegionPoint {
        k,
        energy,
        cap_r1,
        cap_r2,
        member: energy >= 0.0 && energy <= cap_r1 && energy <= cap_r2,
    })
}

/// Sampled boundary of `S` and the `E_K` curve on a log-spaced `k` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurves {
    pub k: Vec<f64>,
    pub cap_r1: Vec<f64>,
    pub cap_r2: Vec<f64>,
    pub kolmogorov: Vec<f64>,
}

pub struct RegionParams {
    pub c0: f64,
    pub eps: f64,
    pub nu: f64,
    pub eta: f64,
    pub r1: f64,
    pub r2: f64,
    pub t: f64,
}

pub fn region_curves(params: &RegionParams, k_min: f64, k_max: f64, samples: usize) -> Result<RegionCurves> {
    require_positive("k_min", k_min)?;
    if !(k_max > k_min) || samples < 2 {
        return Err(Error::Constraint("region curves need k_max > k_min and >= 2 samples".into()));
    }
    let RegionParams { c0, eps, nu, eta, r1, r2, t } = *params;
    let ratio = (k_max / k_min).ln() / (samples - 1) as f64;
    let k: Vec<f64> = (0..samples).map(|i| k_min * (ratio * i as f64).exp()).collect();
    let caps: Vec<(f64, f64)> = k.iter().map(|&k| spectral_caps(k, r1, r2, nu, eta, t)).collect();
    Ok(RegionCurves {
        cap_r1: caps.iter().map(|c| c.0).collect(),
        cap_r2: caps.iter().map(|c| c.1).collect(),
        kolmogorov: k.iter().map(|&k| kolmogorov_spectrum(c0, eps, k)).collect(),
        k,
    })
}

/// How `ε` was obtained for a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsSource {
    Supplied,
    Measured,
}

/// Everything needed to evaluate the closed-form bounds without a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub nu: f64,
    pub eta: f64,
    pub c0: f64,
    pub eps: f64,
    pub eps_source: EpsSource,
    pub t: f64,
    /// `R²(T)`.
    pub r_sq: f64,
    /// `R₁(0)` and `R₁(T)`.
    pub r1_initial: f64,
    pub r1_final: f64,
    pub f_inf: f64,
    #[serde(default)]
    pub r3_variant: R3Variant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub f_inf: f64,
    pub k1: f64,
    pub k2: f64,
    pub condition53: bool,
    pub margin53: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub eps_min: f64,
    pub inputs: BoundInputs,
}

/// Evaluates every closed form. `k₁`, `T₀` and `ε_min` use `R₁(T)`;
/// `R₂` uses `R₁(0)`.
pub fn bounds_report(inputs: &BoundInputs) -> Result<BoundsReport> {
    let b = inputs;
    let r3 = compute_r3(b.r_sq, b.f_inf, b.nu, b.eta, b.r3_variant)?;
    let r2 = compute_r2(b.r1_initial, r3);
    let r1 = b.r1_final;
    let (k1, k2) = inertial_bounds(b.c0, b.eps, b.nu, b.eta, r1, r2, b.t)?;
    let cond = k41_condition(b.c0, b.eps, b.nu, b.eta, r1, r2, b.t)?;
    let t0 = max_time_t0(b.c0, b.eps, b.nu, b.eta, r1, r2)?;
    let eps_min = min_dissipation(t0, b.nu, b.eta, b.c0, r1, r2)?;
    Ok(BoundsReport {
        schema_version: SCHEMA_VERSION,
        r: b.r_sq.sqrt(),
        r1,
        r2,
        r3,
        f_inf: b.f_inf,
        k1,
        k2,
        condition53: cond.holds,
        margin53: cond.margin,
        t0,
        eps_min,
        inputs: b.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn energy_bound_cases() {
        assert_eq!(energy_bound_sq(1.0, 0.0), 1.0);
        assert_eq!(energy_bound_sq(1.0, -3.0), 1.0);
        assert_eq!(energy_bound_sq(1.0, 0.5), 2.0);
        assert_eq!(energy_bound_r(4.0, &[], 7.0), 2.0);
        let w = [(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)];
        assert!((energy_bound_r(1.0, &w, 1.5) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn r1_for_unforced_runs_is_constant() {
        let r = select_r1(&[1.0, 1.0, 1.0], |_, _| 0.0, 1.0, &[2.0, 4.0], 0.5, 1.1).unwrap();
        // max over p of 2^{1/p} 2^{3/p} is at p = 2: 4
        let expected = 1.1 * 12.0 * 4.0;
        for v in r {
            assert!(rel(v, expected) < 1e-15);
        }
        assert!(select_r1(&[1.0], |_, _| 0.0, 1.0, &[2.0], 0.5, 1.0).is_err());
    }

    #[test]
    fn infinite_exponent_entry() {
        assert_eq!(hypothesis_lhs(f64::INFINITY, 0.3, 2.0, 0.25), 2.5);
        let r = select_r1(&[2.0], |_, _| 0.25, 0.1, &[f64::INFINITY], 1.0, 1.5).unwrap();
        assert!(rel(r[0], 1.5 * 6.0 * 2.5) < 1e-15);
    }

    #[test]
    fn r1_is_monotone() {
        let r = select_r1(&[3.0, 1.0, 2.0, 0.5], |_, _| 0.0, 1.0, &[2.0], 1.0, 1.1).unwrap();
        assert!(r.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn r3_r2_examples() {
        assert_eq!(compute_r3(1.0, 0.0, 2.0, 3.0, R3Variant::Theorem).unwrap(), 1.0);
        assert_eq!(compute_r3(1.0, 4.0, 2.0, 3.0, R3Variant::Proof).unwrap(), 12.0);
        assert_eq!(compute_r2(0.0, 3.5), 3.5);
        assert!(compute_r3(1.0, 0.0, 0.0, 1.0, R3Variant::Theorem).is_err());
    }

    #[test]
    fn unit_collapses() {
        let (k1, _) = inertial_bounds(1.0, 1.0, 5.0, 5.0, 1.0, 1.0, 1.0).unwrap();
        assert!(rel(k1, (4.0 * PI).powf(-0.6)) < 1e-15);
        let (_, k2) = inertial_bounds(1.0, 1.0, 4.0 * PI, 4.0 * PI, 1.0, 1.0, 1.0).unwrap();
        assert!(rel(k2, 1.0) < 1e-14);
        let t0 = max_time_t0(1.0, 1.0, 0.5, 0.7, 1.0, 1.0).unwrap();
        assert!(rel(t0, (4.0 * PI).powf(1.2) / 0.5) < 1e-15);
        assert!(inertial_bounds(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn condition_boundary() {
        // choose R₂ so that both sides agree exactly in exact arithmetic
        let (c0, eps, m, r1, t) = (1.0, 1.0, 1.0, 1.0, 1.0);
        let r2 = (1.0 / (4.0 * PI)).powf(0.6);
        let c = k41_condition(c0, eps, m, m, r1, r2, t).unwrap();
        assert!(c.margin.abs() < 1e-14);
        let big = k41_condition(c0, eps, m, m, r1, 10.0 * r2, t).unwrap();
        assert!(big.holds && big.margin > 0.0);
    }

    #[test]
    fn region_membership() {
        assert!(region_s(3.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap().member);
        let cap = 4.0 * PI;
        assert!(!region_s(0.01, cap * (1.0 + 1e-9), 1.0, 1.0, 1.0, 1.0, 1.0).unwrap().member);
    }

    #[test]
    fn trapezoid_of_constant() {
        assert!((trapezoid(&[(0.0, 2.0), (0.5, 2.0), (2.0, 2.0)]) - 4.0).abs() < 1e-15);
    }
}
