//! Cutoff functionals, shell spectra, dissipation rate and power-law fits.

mod cutoff;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::MhdState;
use crate::spectral::{SpectralField, WavenumberGrid};

pub use cutoff::{delta_limit, make_cutoff, CutoffSpec};

/// The exponent grid used wherever a supremum over `2 <= p < ∞` is needed.
pub const DEFAULT_P_GRID: [f64; 7] = [2.0, 3.0, 4.0, 8.0, 16.0, 32.0, f64::INFINITY];

pub fn check_exponent(p: f64) -> Result<()> {
    if p >= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn vec_norm(field: &SpectralField, idx: usize) -> f64 {
    field.norm_sqr_at(idx).sqrt()
}

/// Lattice `L^p` norm of the pair `(a, b)` weighted mode by mode:
/// `(Σ w^p (|a|^p + |b|^p))^{1/p}`, or the max for `p = ∞`.
fn weighted_pair_norm(support: &[(usize, f64)], a: &SpectralField, b: &SpectralField, p: f64) -> f64 {
    if p.is_infinite() {
        return support
            .iter()
            .map(|&(idx, w)| (w * vec_norm(a, idx)).max(w * vec_norm(b, idx)))
            .fold(0.0, f64::max);
    }
    // scale by the largest term so high powers neither overflow nor underflow
    let scale = weighted_pair_norm(support, a, b, f64::INFINITY);
    if scale == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for &(idx, w) in support {
        acc += (w * vec_norm(a, idx) / scale).powf(p) + (w * vec_norm(b, idx) / scale).powf(p);
    }
    scale * acc.powf(1.0 / p)
}

/// `e_p(k, t) = (Σ_ξ |χ̂_k û|^p + |χ̂_k b̂|^p)^{1/p}`; `p = ∞` gives the
/// largest of `|χ̂_k û|`, `|χ̂_k b̂|` over modes.
pub fn e_p(state: &MhdState, cut: &CutoffSpec, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let support = cut.support(state.grid());
    Ok(weighted_pair_norm(&support, &state.u_hat, &state.b_hat, p))
}

/// The instantaneous forcing functional inside `h_p`:
/// `(Σ_ξ (|χ̂_k f̂₁|^p + |χ̂_k f̂₂|^p) / |ξ|^p)^{1/p}`.
pub fn forcing_functional(f1: &SpectralField, f2: &SpectralField, cut: &CutoffSpec, p: f64) -> Result<f64> {
    check_exponent(p)?;
    f1.check_grid(f2)?;
    let grid = f1.grid();
    let support: Vec<(usize, f64)> = cut
        .support(grid)
        .into_iter()
        .filter(|&(idx, _)| idx != 0)
        .map(|(idx, chi)| (idx, chi / grid.k_squared(idx).sqrt()))
        .collect();
    Ok(weighted_pair_norm(&support, f1, f2, p))
}

/// `h_p(k, t)`: the supremum of [`forcing_functional`] over the samples of
/// `history` taken at times `s <= t`.
pub fn h_p<'a, I>(history: I, cut: &CutoffSpec, p: f64, t: f64) -> Result<f64>
where
    I: IntoIterator<Item = (f64, &'a SpectralField, &'a SpectralField)>,
{
    check_exponent(p)?;
    let mut sup: f64 = 0.0;
    for (s, f1, f2) in history {
        if s <= t {
            sup = sup.max(forcing_functional(f1, f2, cut, p)?);
        }
    }
    Ok(sup)
}

/// A probe's functional values sampled along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSeries {
    pub k: [f64; 3],
    pub p: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Running supremum `h_p(k, t)` at the same times.
    pub sup_h: Vec<f64>,
}

impl FunctionalSeries {
    pub fn new(k: [f64; 3], p: f64) -> Self {
        Self {
            k,
            p,
            times: Vec::new(),
            values: Vec::new(),
            sup_h: Vec::new(),
        }
    }

    /// Appends a sample; `forcing` is the instantaneous forcing functional.
    pub fn push(&mut self, t: f64, e: f64, forcing: f64) {
        let prev = self.sup_h.last().copied().unwrap_or(0.0);
        self.times.push(t);
        self.values.push(e);
        self.sup_h.push(prev.max(forcing));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub k: usize,
    pub energy: f64,
    pub count: usize,
}

/// Shell-averaged spectral energy on `k = 1..=n/3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSpectrum {
    pub t: f64,
    pub shells: Vec<Shell>,
}

impl ShellSpectrum {
    pub fn get(&self, k: usize) -> Option<&Shell> {
        self.shells.iter().find(|s| s.k == k)
    }

    /// `Σ_k E(k) M_k / (4πk²)`: the lattice energy carried by the shells.
    pub fn lattice_energy(&self) -> f64 {
        self.shells
            .iter()
            .filter(|s| s.count > 0)
            .map(|s| s.energy * s.count as f64 / (4.0 * PI * (s.k * s.k) as f64))
            .sum()
    }
}

/// Shell index of a mode: `k` with `|ξ| ∈ [k − ½, k + ½)`.
pub fn shell_index(grid: WavenumberGrid, idx: usize) -> usize {
    (grid.k_squared(idx).sqrt() + 0.5).floor() as usize
}

/// `E(k, t) = (4πk² / M_k) Σ_{|ξ| ∈ [k−½, k+½)} (|û|² + |b̂|²)` with `M_k`
/// the number of lattice modes in the shell.
pub fn shell_spectrum(state: &MhdState) -> ShellSpectrum {
    let grid = state.grid();
    let k_max = (grid.n() / 3).max(1);
    let mut sums = vec![0.0; k_max + 1];
    let mut counts = vec![0usize; k_max + 1];
    for idx in 0..grid.len() {
        let s = shell_index(grid, idx);
        if s == 0 || s > k_max {
            continue;
        }
        counts[s] += 1;
        sums[s] += state.u_hat.norm_sqr_at(idx) + state.b_hat.norm_sqr_at(idx);
    }
    let shells = (1..=k_max)
        .map(|k| Shell {
            k,
            energy: if counts[k] == 0 {
                0.0
            } else {
                4.0 * PI * (k * k) as f64 / counts[k] as f64 * sums[k]
            },
            count: counts[k],
        })
        .collect();
    ShellSpectrum { t: state.t, shells }
}

/// `ε(t) = ν Σ|ξ|²|û|² + η Σ|ξ|²|b̂|²`.
pub fn dissipation_rate(state: &MhdState, nu: f64, eta: f64) -> f64 {
    let grid = state.grid();
    let mut gu = 0.0;
    let mut gb = 0.0;
    for idx in 0..grid.len() {
        let k2 = grid.k_squared(idx);
        gu += k2 * state.u_hat.norm_sqr_at(idx);
        gb += k2 * state.b_hat.norm_sqr_at(idx);
    }
    nu * gu + eta * gb
}

/// Least-squares fit `E ≈ prefactor · k^exponent`; `residual` is the RMS
/// misfit in `ln E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
    pub shells_used: usize,
}

pub fn slope_fit(spectrum: &ShellSpectrum, k_lo: usize, k_hi: usize) -> Result<SlopeFit> {
    if k_lo < 1 || k_hi <= k_lo {
        return Err(Error::Constraint(format!(
            "slope fit needs 1 <= k_lo < k_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    let pts: Vec<(f64, f64)> = spectrum
        .shells
        .iter()
        .filter(|s| s.k >= k_lo && s.k <= k_hi && s.count > 0 && s.energy > 0.0 && s.energy.is_finite())
        .map(|s| ((s.k as f64).ln(), s.energy.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientShells { found: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(SlopeFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual: (ss / m).sqrt(),
        shells_used: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn single_mode(grid: WavenumberGrid, mode: [i64; 3], a: [Complex64; 3], b: [Complex64; 3]) -> MhdState {
        let mut s = MhdState::zero(grid);
        s.u_hat.set_mode_pair(mode, a).unwrap();
        s.b_hat.set_mode_pair(mode, b).unwrap();
        s
    }

    #[test]
    fn zero_state_functionals_vanish() {
        let grid = WavenumberGrid::new(16).unwrap();
        let s = MhdState::zero(grid);
        let c = make_cutoff([4.0, 0.0, 0.0], 1.0).unwrap();
        for p in DEFAULT_P_GRID {
            assert_eq!(e_p(&s, &c, p).unwrap(), 0.0);
        }
        assert!(shell_spectrum(&s).shells.iter().all(|sh| sh.energy == 0.0));
        assert_eq!(dissipation_rate(&s, 1.0, 1.0), 0.0);
    }

    #[test]
    fn single_plateau_mode_gives_its_amplitude() {
        let grid = WavenumberGrid::new(16).unwrap();
        let a = [Complex64::new(0.0, 3.0), Complex64::new(4.0, 0.0), Complex64::new(0.0, 0.0)];
        let s = single_mode(grid, [0, 4, 0], a, [Complex64::new(0.0, 0.0); 3]);
        let c = make_cutoff([0.0, 4.0, 0.0], 1.0).unwrap();
        for p in DEFAULT_P_GRID {
            assert!((e_p(&s, &c, p).unwrap() - 5.0).abs() < 1e-14, "p = {p}");
        }
        assert!(matches!(e_p(&s, &c, 1.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn single_mode_shell_and_dissipation() {
        let grid = WavenumberGrid::new(16).unwrap();
        let a = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0)];
        let b = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)];
        let s = single_mode(grid, [3, 0, 0], a, b);
        let spec = shell_spectrum(&s);
        let m3 = spec.get(3).unwrap().count;
        // both members of the Hermitian pair lie in shell 3
        let expected = 4.0 * PI * 9.0 / m3 as f64 * 2.0 * (2.0 + 4.0);
        assert!((spec.get(3).unwrap().energy - expected).abs() < 1e-12 * expected);
        for sh in &spec.shells {
            if sh.k != 3 {
                assert_eq!(sh.energy, 0.0);
            }
        }
        let eps = dissipation_rate(&s, 0.1, 0.2);
        assert!((eps - (0.1 * 9.0 * 2.0 * 2.0 + 0.2 * 9.0 * 4.0 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn shell_counts_match_brute_force() {
        let grid = WavenumberGrid::new(12).unwrap();
        let spec = shell_spectrum(&MhdState::zero(grid));
        for sh in &spec.shells {
            let mut count = 0;
            for x in -5i64..=6 {
                for y in -5i64..=6 {
                    for z in -5i64..=6 {
                        let r = ((x * x + y * y + z * z) as f64).sqrt();
                        if r >= sh.k as f64 - 0.5 && r < sh.k as f64 + 0.5 {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(sh.count, count, "shell {}", sh.k);
        }
    }

    #[test]
    fn slope_fit_on_flat_and_power_law() {
        let make = |f: &dyn Fn(f64) -> f64| ShellSpectrum {
            t: 0.0,
            shells: (1..=10).map(|k| Shell { k, energy: f(k as f64), count: 1 }).collect(),
        };
        let flat = slope_fit(&make(&|_| 2.5), 2, 10).unwrap();
        assert!(flat.exponent.abs() < 1e-14);
        assert!((flat.prefactor - 2.5).abs() < 1e-12);
        let fit = slope_fit(&make(&|k| 1.6 * k.powf(-5.0 / 3.0)), 2, 10).unwrap();
        assert!((fit.exponent + 5.0 / 3.0).abs() < 1e-12);
        assert!((fit.prefactor - 1.6).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(matches!(
            slope_fit(&make(&|_| 1.0), 2, 3),
            Err(Error::InsufficientShells { found: 2 })
        ));
    }

    #[test]
    fn running_sup_is_nondecreasing() {
        let mut s = FunctionalSeries::new([4.0, 0.0, 0.0], 2.0);
        for (t, f) in [(0.0, 1.0), (0.1, 3.0), (0.2, 2.0)] {
            s.push(t, 0.0, f);
        }
        assert_eq!(s.sup_h, vec![1.0, 3.0, 3.0]);
    }
}
