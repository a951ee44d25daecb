use num_complex::Complex64;

use std::sync::Mutex;

use crate::spectral::fft::Band;
use crate::spectral::{SpectralField, Transform, WavenumberGrid, ZERO};

/// Projected, dealiased nonlinear terms of the Fourier-space MHD system:
///
/// ```text
/// N_u = P[(b·∇)b] − P[(u·∇)u],    N_b = P[(b·∇)u] − P[(u·∇)b]
/// ```
///
/// For solenoidal fields these equal `∂_j(b_j b_i − u_j u_i)` and
/// `∂_j(b_j u_i − u_j b_i)`, so only six symmetric and three antisymmetric
/// products are transformed. With dealiased inputs every product is
/// alias-free on the retained modes.
pub struct Nonlinear {
    transform: Transform,
    modes: Vec<[f64; 3]>,
    k_squared: Vec<f64>,
    keep: Vec<bool>,
    in_band: Vec<bool>,
    work: Mutex<Workspace>,
}

/// Five packed complex buffers plus transpose scratch, reused across calls.
#[derive(Default)]
struct Workspace {
    bufs: [Vec<Complex64>; 5],
    tmp: Vec<Complex64>,
}

impl Clone for Nonlinear {
    fn clone(&self) -> Self {
        Self {
            transform: self.transform.clone(),
            modes: self.modes.clone(),
            k_squared: self.k_squared.clone(),
            keep: self.keep.clone(),
            in_band: self.in_band.clone(),
            work: Mutex::default(),
        }
    }
}

impl std::fmt::Debug for Nonlinear {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Nonlinear").field("grid", &self.grid()).finish()
    }
}

pub(crate) struct NonlinearTerms {
    pub du: SpectralField,
    pub db: SpectralField,
    /// `max_x (|u| + |b|)` over collocation points.
    pub max_speed: f64,
}

fn pack(out: &mut Vec<Complex64>, a: &[Complex64], b: &[Complex64]) {
    out.clear();
    // ifft(A + iB) = a + ib for Hermitian A, B
    out.extend(a.iter().zip(b).map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re)));
}

/// Splits the transform of `p + iq` at `ξ` into `(p̂, q̂)`, given the value
/// `zn` at `−ξ`.
#[inline]
fn split(z: Complex64, zn: Complex64, s: f64) -> (Complex64, Complex64) {
    let zc = zn.conj();
    let d = (z - zc) * (0.5 * s);
    ((z + zc) * (0.5 * s), Complex64::new(d.im, -d.re))
}

impl Nonlinear {
    pub fn new(grid: WavenumberGrid) -> Self {
        let modes: Vec<[f64; 3]> = (0..grid.len()).map(|i| grid.mode_f64(i)).collect();
        let k_squared = grid.k_squared_table();
        let in_band: Vec<bool> = (0..grid.len()).map(|i| !grid.is_dealiased_out(i)).collect();
        let keep = (0..grid.len())
            .map(|i| i != 0 && in_band[i] && !grid.is_nyquist(i))
            .collect();
        Self {
            transform: Transform::new(grid),
            modes,
            k_squared,
            keep,
            in_band,
            work: Mutex::default(),
        }
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn grid(&self) -> WavenumberGrid {
        self.transform.grid()
    }

    pub(crate) fn k_squared(&self) -> &[f64] {
        &self.k_squared
    }

    /// Builds a field mode by mode from `value(idx, component)`, evaluated
    /// only on retained modes. With `project`, each mode is made solenoidal.
    pub(crate) fn combine(&self, value: impl Fn(usize, usize) -> Complex64, project: bool) -> SpectralField {
        let len = self.keep.len();
        let mut out = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
        for idx in 0..len {
            if !self.keep[idx] {
                continue;
            }
            let v = [value(idx, 0), value(idx, 1), value(idx, 2)];
            let k = self.modes[idx];
            let d = if project {
                (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / self.k_squared[idx]
            } else {
                ZERO
            };
            for c in 0..3 {
                out[c][idx] = v[c] - d * k[c];
            }
        }
        let mut field = SpectralField::from_components(self.grid(), out).expect("lengths match");
        field.mark_solenoidal(project);
        field
    }

    fn band_of(&self, fields: [&SpectralField; 2]) -> Band {
        let clean = fields.iter().all(|f| {
            f.components().iter().all(|c| {
                c.iter()
                    .zip(&self.in_band)
                    .all(|(z, &inside)| inside || (z.re == 0.0 && z.im == 0.0))
            })
        });
        if clean {
            Band::Dealiased
        } else {
            Band::Full
        }
    }

    pub(crate) fn eval(&self, u: &SpectralField, b: &SpectralField) -> NonlinearTerms {
        let t = &self.transform;
        let band = self.band_of([u, b]);
        let mut guard = self.work.lock().unwrap_or_else(|e| e.into_inner());
        let Workspace { bufs, tmp } = &mut *guard;

        pack(&mut bufs[0], u.component(0), u.component(1));
        pack(&mut bufs[1], u.component(2), b.component(0));
        pack(&mut bufs[2], b.component(1), b.component(2));
        for buf in &mut bufs[..3] {
            t.raw_inverse(buf, tmp, band);
        }
        let len = bufs[0].len();
        for buf in &mut bufs[3..] {
            buf.resize(len, ZERO);
        }

        let s = t.inverse_scale();
        let mut max_speed: f64 = 0.0;
        let [b0, b1, b2, b3, b4] = bufs;
        for p in 0..len {
            let (ux, uy) = (b0[p].re * s, b0[p].im * s);
            let (uz, bx) = (b1[p].re * s, b1[p].im * s);
            let (by, bz) = (b2[p].re * s, b2[p].im * s);
            let su = (ux * ux + uy * uy + uz * uz).sqrt();
            let sb = (bx * bx + by * by + bz * bz).sqrt();
            max_speed = max_speed.max(su + sb);
            // S_ij = b_i b_j − u_i u_j, A_ij = b_j u_i − u_j b_i
            b0[p] = Complex64::new(bx * bx - ux * ux, by * by - uy * uy);
            b1[p] = Complex64::new(bz * bz - uz * uz, bx * by - ux * uy);
            b2[p] = Complex64::new(bx * bz - ux * uz, by * bz - uy * uz);
            b3[p] = Complex64::new(by * ux - uy * bx, bz * ux - uz * bx);
            b4[p] = Complex64::new(bz * uy - uz * by, 0.0);
        }
        for buf in [&mut *b0, &mut *b1, &mut *b2, &mut *b3, &mut *b4] {
            t.raw_forward(buf, tmp, Band::Dealiased);
        }

        let s = t.forward_scale();
        let neg = t.neg_table();
        let mut du = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
        let mut db = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
        let i_times = |z: Complex64| Complex64::new(-z.im, z.re);
        for idx in 0..len {
            if !self.keep[idx] {
                continue;
            }
            let m = neg[idx] as usize;
            let (sxx, syy) = split(b0[idx], b0[m], s);
            let (szz, sxy) = split(b1[idx], b1[m], s);
            let (sxz, syz) = split(b2[idx], b2[m], s);
            let (axy, axz) = split(b3[idx], b3[m], s);
            let ayz = b4[idx] * s;
            let k = self.modes[idx];
            let nu = [
                i_times(sxx * k[0] + sxy * k[1] + sxz * k[2]),
                i_times(sxy * k[0] + syy * k[1] + syz * k[2]),
                i_times(sxz * k[0] + syz * k[1] + szz * k[2]),
            ];
            let nb = [
                i_times(axy * k[1] + axz * k[2]),
                i_times(-axy * k[0] + ayz * k[2]),
                i_times(-axz * k[0] - ayz * k[1]),
            ];
            let k2 = self.k_squared[idx];
            for (out, v) in [(&mut du, nu), (&mut db, nb)] {
                let d = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / k2;
                for c in 0..3 {
                    out[c][idx] = v[c] - d * k[c];
                }
            }
        }
        drop(guard);
        let grid = self.grid();
        let mut du = SpectralField::from_components(grid, du).expect("lengths match");
        let mut db = SpectralField::from_components(grid, db).expect("lengths match");
        du.mark_solenoidal(true);
        db.mark_solenoidal(true);
        NonlinearTerms { du, db, max_speed }
    }
}
