#![allow(dead_code)]

use mhd_spectra::solver::MhdState;
use mhd_spectra::spectral::{dealias, leray_project, PhysicalField, SpectralField, Transform, WavenumberGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn grid(n: usize) -> WavenumberGrid {
    WavenumberGrid::new(n).unwrap()
}

/// Real field with independent uniform values at each grid point.
pub fn random_physical(g: WavenumberGrid, seed: u64) -> PhysicalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = [(); 3].map(|_| (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
    PhysicalField::from_components(g, comps).unwrap()
}

/// Random real field, dealiased and divergence-free.
pub fn random_solenoidal(g: WavenumberGrid, seed: u64) -> SpectralField {
    let t = Transform::new(g);
    let f = t.forward(&random_physical(g, seed)).unwrap();
    leray_project(&dealias(&f))
}

pub fn random_state(g: WavenumberGrid, seed: u64) -> MhdState {
    MhdState::new(random_solenoidal(g, seed), random_solenoidal(g, seed ^ 0x9e37_79b9), 0.0)
}

pub fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..3 {
        for (x, y) in a.component(c).iter().zip(b.component(c)) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Coefficients stored as a map from integer mode to vector.
pub struct Modes(pub Vec<([i64; 3], [Complex64; 3])>);

impl Modes {
    pub fn of(f: &SpectralField) -> Self {
        let g = f.grid();
        Modes(
            (0..g.len())
                .filter(|&i| f.norm_sqr_at(i) > 0.0)
                .map(|i| (g.mode(i), f.at(i)))
                .collect(),
        )
    }
}

/// Exact Fourier coefficients of `(a·∇)b` by direct convolution over the
/// nonzero modes, under the unitary convention where a product picks up
/// `(2π)^{-3/2}`. Output is restricted to modes inside the 2/3 band.
pub fn advective_oracle(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let g = a.grid();
    let norm = TWO_PI.powf(-1.5);
    let i = Complex64::new(0.0, 1.0);
    let mut out = SpectralField::zeros(g);
    let (ma, mb) = (Modes::of(a), Modes::of(b));
    let lim = g.dealias_limit();
    for (ka, va) in &ma.0 {
        for (kb, vb) in &mb.0 {
            let xi = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            if xi.iter().any(|x| x.abs() > lim) {
                continue;
            }
            let idx = g.index_of(xi).unwrap();
            // a_j(η) · i ζ_j · b_i(ζ)
            let dot = va[0] * kb[0] as f64 + va[1] * kb[1] as f64 + va[2] * kb[2] as f64;
            for c in 0..3 {
                out.component_mut(c)[idx] += i * dot * vb[c] * norm;
            }
        }
    }
    out
}

/// `I − ξξᵀ/|ξ|²` applied per mode, mean mode zeroed.
pub fn project_oracle(f: &SpectralField) -> SpectralField {
    let g = f.grid();
    let mut out = SpectralField::zeros(g);
    for idx in 1..g.len() {
        if g.is_nyquist(idx) {
            continue;
        }
        let k = g.mode_f64(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let v = f.at(idx);
        for r in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..3 {
                let m = if r == c { 1.0 } else { 0.0 } - k[r] * k[c] / k2;
                acc += v[c] * m;
            }
            out.component_mut(r)[idx] = acc;
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Tuple {
    pub c0: f64,
    pub eps: f64,
    pub nu: f64,
    pub eta: f64,
    pub r1: f64,
    pub r2: f64,
    pub t: f64,
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn tuples(count: usize, seed: u64) -> Vec<Tuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Tuple {
            c0: log_uniform(&mut rng, 0.1, 10.0),
            eps: log_uniform(&mut rng, 1e-3, 1e3),
            nu: log_uniform(&mut rng, 1e-4, 1.0),
            eta: log_uniform(&mut rng, 1e-4, 1.0),
            r1: log_uniform(&mut rng, 1e-2, 1e2),
            r2: log_uniform(&mut rng, 1e-2, 1e2),
            t: log_uniform(&mut rng, 1e-2, 1e2),
        })
        .collect()
}

/// `ln k₁` and `ln k₂` straight from the intersection equations
/// `C₀ε^{2/3}k^{−5/3} = 4πR₁²` and `C₀ε^{2/3}k^{−5/3} = 4πR₂²/(mTk²)`.
pub fn log_k_oracle(p: &Tuple) -> (f64, f64) {
    let m = p.nu.min(p.eta);
    let a = p.c0.ln() + (2.0 / 3.0) * p.eps.ln();
    let ln_k1 = (a - (4.0 * std::f64::consts::PI * p.r1 * p.r1).ln()) * 0.6;
    let ln_k2 = 3.0 * ((4.0 * std::f64::consts::PI * p.r2 * p.r2).ln() - m.ln() - p.t.ln() - a);
    (ln_k1, ln_k2)
}
