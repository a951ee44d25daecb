use num_complex::Complex64;

use super::{PhysicalField, SpectralField, Transform, ZERO};
use crate::error::Result;

/// `Σ_ξ |c(ξ)|²` weighted by the lattice cell measure.
pub fn parseval_energy(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let mut acc = 0.0;
    for c in field.components() {
        acc += c.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    acc * grid.cell_measure()
}

/// Midpoint quadrature of `∫ |f|² dx` over the torus; exact for
/// trigonometric polynomials resolved by the grid.
pub fn physical_energy(field: &PhysicalField) -> f64 {
    let h = field.grid().spacing();
    let mut acc = 0.0;
    for c in 0..3 {
        acc += field.component(c).iter().map(|v| v * v).sum::<f64>();
    }
    acc * h * h * h
}

/// Per-mode projection onto the plane orthogonal to `ξ`:
/// `z ↦ z − (z·ξ) ξ/|ξ|²`. The mean mode and Nyquist planes are zeroed.
pub fn leray_project(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    project_in_place(&mut out);
    out
}

pub(crate) fn project_in_place(field: &mut SpectralField) {
    let grid = field.grid();
    let comps = field.components_mut_raw();
    for idx in 0..grid.len() {
        if idx == 0 || grid.is_nyquist(idx) {
            for c in comps.iter_mut() {
                c[idx] = ZERO;
            }
            continue;
        }
        let k = grid.mode_f64(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let dot = comps[0][idx] * k[0] + comps[1][idx] * k[1] + comps[2][idx] * k[2];
        let s = dot / k2;
        for c in 0..3 {
            comps[c][idx] -= s * k[c];
        }
    }
    field.mark_solenoidal(true);
}

/// `max_ξ |ξ · c(ξ)|`.
pub fn divergence_max(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        let k = grid.mode_f64(idx);
        let z = field.at(idx);
        let dot = z[0] * k[0] + z[1] * k[1] + z[2] * k[2];
        worst = worst.max(dot.norm());
    }
    worst
}

/// Zeroes every mode with some `3|ξ_i| >= n`, keeping `|ξ_i| <= dealias_limit()`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(field: &mut SpectralField) {
    let grid = field.grid();
    let flag = field.is_solenoidal();
    let comps = field.components_mut_raw();
    for idx in 0..grid.len() {
        if grid.is_dealiased_out(idx) {
            for c in comps.iter_mut() {
                c[idx] = ZERO;
            }
        }
    }
    field.mark_solenoidal(flag);
}

/// Largest violation of `c(−ξ) = conj(c(ξ))`, relative to the largest
/// coefficient.
pub fn hermitian_residual(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let scale = field.max_abs().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        let neg = grid.neg_index(idx);
        for c in 0..3 {
            let z = field.component(c)[idx];
            let w = field.component(c)[neg];
            worst = worst.max((z - w.conj()).norm());
        }
    }
    worst / scale
}

/// Fourier coefficients of `(a·∇)b`, evaluated pseudo-spectrally and then
/// dealiased. Exact (alias-free) when both inputs are already dealiased.
pub fn advective_convolution(
    transform: &Transform,
    a: &SpectralField,
    b: &SpectralField,
) -> Result<SpectralField> {
    a.check_grid(b)?;
    let grid = a.grid();
    if transform.grid() != grid {
        return Err(crate::error::Error::GridMismatch {
            left: transform.grid().n(),
            right: grid.n(),
        });
    }
    let ua = transform.inverse(a)?;

    // ∂_j b_i for all nine (i, j), synthesized two at a time.
    let ks: Vec<[f64; 3]> = (0..grid.len()).map(|i| grid.mode_f64(i)).collect();
    let grad_spec = |i: usize, j: usize| -> Vec<Complex64> {
        b.component(i)
            .iter()
            .zip(&ks)
            .map(|(z, k)| Complex64::new(-z.im * k[j], z.re * k[j]))
            .collect()
    };
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(9);
    for chunk in pairs.chunks(2) {
        let first = grad_spec(chunk[0].0, chunk[0].1);
        if chunk.len() == 2 {
            let second = grad_spec(chunk[1].0, chunk[1].1);
            let (x, y) = transform.inverse_pair(&first, &second);
            grads.push(x);
            grads.push(y);
        } else {
            let (x, _) = transform.inverse_pair(&first, &[]);
            grads.push(x);
        }
    }

    let len = grid.len();
    let mut prod: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (i, out) in prod.iter_mut().enumerate() {
        for p in 0..len {
            out[p] = ua.component(0)[p] * grads[3 * i][p]
                + ua.component(1)[p] * grads[3 * i + 1][p]
                + ua.component(2)[p] * grads[3 * i + 2][p];
        }
    }
    let (px, py) = transform.forward_pair(&prod[0], &prod[1]);
    let (pz, _) = transform.forward_pair(&prod[2], &[]);
    let mut out = SpectralField::from_components(grid, [px, py, pz])?;
    dealias_in_place(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::WavenumberGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spectral(grid: WavenumberGrid, seed: u64) -> SpectralField {
        let t = Transform::new(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PhysicalField::from_fn(grid, |_| {
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
        });
        t.forward(&f).unwrap()
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let grid = WavenumberGrid::new(8).unwrap();
        assert_eq!(parseval_energy(&SpectralField::zeros(grid)), 0.0);
    }

    #[test]
    fn single_pair_energy_is_twice_amplitude_squared() {
        let grid = WavenumberGrid::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        let a = Complex64::new(0.3, -0.4);
        f.set_mode_pair([1, 2, 0], [ZERO, ZERO, a]).unwrap();
        let e = parseval_energy(&f);
        assert!((e - 2.0 * a.norm_sqr() * grid.cell_measure()).abs() < 1e-15);
    }

    #[test]
    fn gradient_mode_is_annihilated_and_orthogonal_mode_kept() {
        let grid = WavenumberGrid::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        let a = Complex64::new(1.5, 0.25);
        f.set_mode_pair([1, 2, -1], [a, a * 2.0, -a]).unwrap();
        let p = leray_project(&f);
        assert!(p.max_abs() < 1e-15);

        let mut g = SpectralField::zeros(grid);
        g.set_mode_pair([1, 2, -1], [a * 2.0, -a, ZERO]).unwrap();
        let q = leray_project(&g);
        let idx = grid.index_of([1, 2, -1]).unwrap();
        for c in 0..3 {
            assert!((q.component(c)[idx] - g.component(c)[idx]).norm() < 1e-15);
        }
        assert!(q.is_solenoidal());
    }

    #[test]
    fn pure_gradient_divergence_is_full() {
        let grid = WavenumberGrid::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        let k = [2.0, -1.0, 2.0];
        let kn = 3.0;
        let a = Complex64::new(0.7, 0.0);
        f.set_mode_pair([2, -1, 2], [a * (k[0] / kn), a * (k[1] / kn), a * (k[2] / kn)])
            .unwrap();
        assert!((divergence_max(&f) - kn * a.norm()).abs() < 1e-14);
    }

    #[test]
    fn projection_removes_divergence_of_random_field() {
        let grid = WavenumberGrid::new(8).unwrap();
        let f = random_spectral(grid, 5);
        let p = leray_project(&f);
        let scale = (0..grid.len())
            .map(|i| grid.k_squared(i).sqrt() * f.norm_sqr_at(i).sqrt())
            .fold(0.0, f64::max);
        assert!(divergence_max(&p) < 1e-12 * scale);
    }

    #[test]
    fn dealias_keeps_inner_modes_and_zeroes_nyquist() {
        let grid = WavenumberGrid::new(8).unwrap();
        let f = random_spectral(grid, 9);
        let d = dealias(&f);
        for idx in 0..grid.len() {
            if grid.is_dealiased_out(idx) {
                assert_eq!(d.norm_sqr_at(idx), 0.0);
            } else {
                assert_eq!(d.at(idx), f.at(idx));
            }
        }
        let nyq = grid.index_of([4, 0, 0]).unwrap();
        assert_eq!(d.norm_sqr_at(nyq), 0.0);
        assert!(parseval_energy(&d) <= parseval_energy(&f));
    }

    #[test]
    fn convolution_of_zero_is_zero() {
        let grid = WavenumberGrid::new(8).unwrap();
        let t = Transform::new(grid);
        let a = dealias(&leray_project(&random_spectral(grid, 1)));
        let z = SpectralField::zeros(grid);
        assert!(advective_convolution(&t, &a, &z).unwrap().max_abs() < 1e-15);
        assert!(advective_convolution(&t, &z, &a).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn convolution_rejects_grid_mismatch() {
        let t = Transform::new(WavenumberGrid::new(8).unwrap());
        let a = SpectralField::zeros(WavenumberGrid::new(8).unwrap());
        let b = SpectralField::zeros(WavenumberGrid::new(4).unwrap());
        assert!(advective_convolution(&t, &a, &b).is_err());
    }
}
