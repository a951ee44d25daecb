use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{PhysicalField, SpectralField, WavenumberGrid, ZERO};
use crate::error::Result;

/// 3D transforms between collocation values and unitary Fourier coefficients.
///
/// Each 3D pass transforms the contiguous axis and then rotates the axes
/// `(x, y, z) -> (y, z, x)`; three such passes return the original layout.
/// Lines are processed in parallel, which does not affect the result.
#[derive(Clone)]
pub struct Transform {
    grid: WavenumberGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
    neg: Arc<Vec<u32>>,
    aliased: Arc<Vec<bool>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// Which spectral modes a transform must handle. With `Dealiased`, input
/// spectra are known to vanish outside the 2/3 band (inverse) or only
/// in-band outputs are wanted (forward), so lines that only touch
/// out-of-band modes are skipped.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Band {
    Full,
    Dealiased,
}

impl Transform {
    pub fn new(grid: WavenumberGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let neg = (0..grid.len()).map(|i| grid.neg_index(i) as u32).collect();
        let n = grid.n() as i64;
        let aliased = (0..grid.n()).map(|i| 3 * grid.wavenumber(i).abs() >= n).collect();
        Self {
            grid,
            forward,
            inverse,
            scratch_len,
            neg: Arc::new(neg),
            aliased: Arc::new(aliased),
        }
    }

    #[inline]
    pub fn grid(&self) -> WavenumberGrid {
        self.grid
    }

    /// `(2π)^{3/2} / n³`: scales a raw DFT into unitary coefficients.
    #[inline]
    pub(crate) fn forward_scale(&self) -> f64 {
        (2.0 * PI).powf(1.5) / self.grid.len() as f64
    }

    #[inline]
    pub(crate) fn inverse_scale(&self) -> f64 {
        (2.0 * PI).powf(-1.5)
    }

    /// Flat index of `−ξ` for every flat index `ξ`.
    pub(crate) fn neg_table(&self) -> &[u32] {
        &self.neg
    }

    fn transform_3d(&self, data: &mut Vec<Complex64>, dir: Direction) {
        let mut tmp = vec![ZERO; data.len()];
        self.raw(data, &mut tmp, dir, Band::Full);
    }

    /// Unscaled in-place transform; `tmp` is scratch of the same length.
    pub(crate) fn raw_forward(&self, data: &mut Vec<Complex64>, tmp: &mut Vec<Complex64>, band: Band) {
        self.raw(data, tmp, Direction::Forward, band);
    }

    pub(crate) fn raw_inverse(&self, data: &mut Vec<Complex64>, tmp: &mut Vec<Complex64>, band: Band) {
        self.raw(data, tmp, Direction::Inverse, band);
    }

    fn raw(&self, data: &mut Vec<Complex64>, tmp: &mut Vec<Complex64>, dir: Direction, band: Band) {
        let n = self.grid.n();
        let plan = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        tmp.resize(data.len(), ZERO);
        let aliased: &[bool] = &self.aliased;
        let pruned = band == Band::Dealiased;
        for pass in 0..3 {
            // slab index a, line index b; the already-transformed axes are
            // (a, b) on the last inverse pass and on the first forward pass
            let skip = |a: usize, b: usize| -> bool {
                pruned
                    && match (dir, pass) {
                        (Direction::Inverse, 0) | (Direction::Forward, 2) => aliased[a] || aliased[b],
                        (Direction::Inverse, 1) => aliased[a],
                        (Direction::Forward, 1) => aliased[b],
                        _ => false,
                    }
            };
            data.par_chunks_mut(n * n).enumerate().for_each_init(
                || vec![ZERO; self.scratch_len],
                |scratch, (a, slab)| {
                    for (b, line) in slab.chunks_exact_mut(n).enumerate() {
                        if !skip(a, b) {
                            plan.process_with_scratch(line, scratch);
                        }
                    }
                },
            );
            // rotated[j][k][i] = data[i][j][k]
            let src: &[Complex64] = data;
            tmp.par_chunks_mut(n * n).enumerate().for_each(|(j, out)| {
                for k in 0..n {
                    for i in 0..n {
                        out[k * n + i] = src[(i * n + j) * n + k];
                    }
                }
            });
            std::mem::swap(data, tmp);
        }
    }

    /// Physical samples to unitary Fourier coefficients. All `n³`
    /// coefficients are kept, so the round trip is exact.
    pub fn forward(&self, f: &PhysicalField) -> Result<SpectralField> {
        self.check(f.grid())?;
        let scale = self.forward_scale();
        let comps = [0, 1, 2].map(|c| {
            let mut buf: Vec<Complex64> = f
                .component(c)
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            self.transform_3d(&mut buf, Direction::Forward);
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        });
        SpectralField::from_components(self.grid, comps)
    }

    /// Unitary Fourier coefficients to physical samples. The imaginary part
    /// of the synthesis is discarded; it vanishes for Hermitian input.
    pub fn inverse(&self, field: &SpectralField) -> Result<PhysicalField> {
        self.check(field.grid())?;
        let (a, b) = self.inverse_pair(field.component(0), field.component(1));
        let (c, _) = self.inverse_pair(field.component(2), &[]);
        PhysicalField::from_components(self.grid, [a, b, c])
    }

    /// Synthesizes two Hermitian spectra with one complex transform:
    /// `ifft(A + iB) = a + ib`. An empty `b` is treated as zero.
    pub(crate) fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut buf: Vec<Complex64> = if b.is_empty() {
            a.to_vec()
        } else {
            a.iter()
                .zip(b)
                .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
                .collect()
        };
        self.transform_3d(&mut buf, Direction::Inverse);
        let s = self.inverse_scale();
        let re = buf.iter().map(|z| z.re * s).collect();
        let im = if b.is_empty() {
            Vec::new()
        } else {
            buf.iter().map(|z| z.im * s).collect()
        };
        (re, im)
    }

    /// Analyzes two real fields with one complex transform, separating the
    /// spectra by Hermitian symmetry. An empty `q` is treated as zero.
    pub(crate) fn forward_pair(&self, p: &[f64], q: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf: Vec<Complex64> = if q.is_empty() {
            p.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            p.iter().zip(q).map(|(&x, &y)| Complex64::new(x, y)).collect()
        };
        self.transform_3d(&mut buf, Direction::Forward);
        let s = self.forward_scale();
        if q.is_empty() {
            buf.iter_mut().for_each(|z| *z *= s);
            return (buf, Vec::new());
        }
        let len = buf.len();
        debug_assert_eq!(len, self.neg.len());
        let mut pa = vec![ZERO; len];
        let mut qa = vec![ZERO; len];
        for (idx, &neg) in self.neg.iter().enumerate() {
            let z = buf[idx];
            let zc = buf[neg as usize].conj();
            pa[idx] = (z + zc) * (0.5 * s);
            // (z - zc) / 2i
            let d = (z - zc) * (0.5 * s);
            qa[idx] = Complex64::new(d.im, -d.re);
        }
        (pa, qa)
    }

    fn check(&self, grid: WavenumberGrid) -> Result<()> {
        if grid != self.grid {
            return Err(crate::error::Error::GridMismatch {
                left: self.grid.n(),
                right: grid.n(),
            });
        }
        Ok(())
    }
}
