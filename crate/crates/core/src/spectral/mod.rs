//! Wavenumber-lattice bookkeeping and the spectral representation of
//! vector fields on the 2π-periodic torus.
//!
//! Modes are stored in FFT index order: index `i` along an axis carries the
//! integer wavenumber `i` for `i <= n/2` and `i - n` otherwise, so each axis
//! covers `{-n/2+1, ..., n/2}`. Coefficients use the unitary convention
//!
//! ```text
//! c(ξ) = (2π)^{-3/2} ∫ f(x) e^{-iξ·x} dx,    f(x) = (2π)^{-3/2} Σ_ξ c(ξ) e^{iξ·x}
//! ```
//!
//! under which `Σ_ξ |c(ξ)|² = ∫ |f|² dx` with unit cell measure.

pub(crate) mod fft;
mod ops;

pub use fft::Transform;
pub use ops::{
    advective_convolution, dealias, divergence_max, hermitian_residual, leray_project,
    parseval_energy, physical_energy,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The integer wavenumber lattice `{-n/2+1, ..., n/2}³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WavenumberGrid {
    n: usize,
}

impl WavenumberGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Config(format!(
                "grid size must be an even integer >= 4, got {n}"
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of lattice modes, `n³`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume weight of one lattice cell. The unit-spacing integer lattice has
    /// weight one.
    #[inline]
    pub fn cell_measure(&self) -> f64 {
        1.0
    }

    /// Physical grid spacing `2π/n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Wavenumber carried by axis index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis index holding wavenumber `k`, if it is on the lattice.
    #[inline]
    pub fn axis_index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > half || k <= -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    #[inline]
    pub fn flat(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Integer wavevector of flat index `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let (ix, iy, iz) = self.unflat(idx);
        [self.wavenumber(ix), self.wavenumber(iy), self.wavenumber(iz)]
    }

    pub fn mode_f64(&self, idx: usize) -> [f64; 3] {
        let m = self.mode(idx);
        [m[0] as f64, m[1] as f64, m[2] as f64]
    }

    pub fn index_of(&self, mode: [i64; 3]) -> Option<usize> {
        Some(self.flat(
            self.axis_index(mode[0])?,
            self.axis_index(mode[1])?,
            self.axis_index(mode[2])?,
        ))
    }

    /// Flat index of `-ξ` under periodic folding. Nyquist planes map onto
    /// themselves.
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (ix, iy, iz) = self.unflat(idx);
        self.flat((n - ix) % n, (n - iy) % n, (n - iz) % n)
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (ix, iy, iz) = self.unflat(idx);
        let h = self.n / 2;
        ix == h || iy == h || iz == h
    }

    /// Largest retained `|ξ_i|` under the 2/3 rule: the largest `K` with
    /// `3K < n`, so that no product of two retained modes aliases back
    /// into the retained band. Equals `⌊n/3⌋` unless `3 | n`.
    #[inline]
    pub fn dealias_limit(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    #[inline]
    pub fn is_dealiased_out(&self, idx: usize) -> bool {
        let m = self.mode(idx);
        let n = self.n as i64;
        m.iter().any(|&k| 3 * k.abs() >= n)
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let m = self.mode(idx);
        (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64
    }

    /// `|ξ|²` for every mode in flat order.
    pub fn k_squared_table(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.k_squared(i)).collect()
    }
}

/// Complex Fourier coefficients of a real 3-component vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: WavenumberGrid,
    comps: [Vec<Complex64>; 3],
    solenoidal: bool,
}

impl SpectralField {
    pub fn zeros(grid: WavenumberGrid) -> Self {
        let len = grid.len();
        Self {
            grid,
            comps: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
            solenoidal: true,
        }
    }

    pub fn from_components(grid: WavenumberGrid, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::Config(format!(
                    "component length {} does not match grid of {} modes",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self {
            grid,
            comps,
            solenoidal: false,
        })
    }

    #[inline]
    pub fn grid(&self) -> WavenumberGrid {
        self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        self.solenoidal = false;
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub(crate) fn components_mut_raw(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.comps
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    /// Writes a coefficient and its Hermitian partner so the field stays real.
    pub fn set_mode_pair(&mut self, mode: [i64; 3], value: [Complex64; 3]) -> Result<()> {
        let idx = self.grid.index_of(mode).ok_or_else(|| {
            Error::Config(format!("mode {mode:?} is outside the {} lattice", self.grid.n))
        })?;
        let neg = self.grid.neg_index(idx);
        self.solenoidal = false;
        for c in 0..3 {
            self.comps[c][idx] = value[c];
            self.comps[c][neg] = value[c].conj();
        }
        Ok(())
    }

    #[inline]
    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn mark_solenoidal(&mut self, flag: bool) {
        self.solenoidal = flag;
    }

    /// `|c(ξ)|²` summed over components.
    #[inline]
    pub fn norm_sqr_at(&self, idx: usize) -> f64 {
        self.comps[0][idx].norm_sqr() + self.comps[1][idx].norm_sqr() + self.comps[2][idx].norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n,
                right: other.grid.n,
            });
        }
        Ok(())
    }

    /// `self + s * other`, componentwise.
    pub fn add_scaled(&mut self, s: f64, other: &SpectralField) {
        for c in 0..3 {
            for (a, b) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *a += b * s;
            }
        }
        self.solenoidal = self.solenoidal && other.solenoidal;
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
    }

    /// Real part of `Σ_ξ c(ξ)·conj(d(ξ))`, the `L²` inner product.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            for (a, b) in self.comps[c].iter().zip(&other.comps[c]) {
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc * self.grid.cell_measure()
    }

    /// Largest coefficient magnitude `max_ξ |c(ξ)|`.
    pub fn max_abs(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.norm_sqr_at(i))
            .fold(0.0, f64::max)
            .sqrt()
    }
}

/// Real 3-vector samples on the `n³` collocation lattice `x_j = 2πj/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: WavenumberGrid,
    comps: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn zeros(grid: WavenumberGrid) -> Self {
        let len = grid.len();
        Self {
            grid,
            comps: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn from_components(grid: WavenumberGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::Config(format!(
                    "component length {} does not match grid of {} points",
                    c.len(),
                    grid.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("physical field has non-finite entries".into()));
            }
        }
        Ok(Self { grid, comps })
    }

    /// Samples `f(x, y, z)` at every collocation point.
    pub fn from_fn(grid: WavenumberGrid, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let h = grid.spacing();
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let (ix, iy, iz) = grid.unflat(idx);
            let v = f([ix as f64 * h, iy as f64 * h, iz as f64 * h]);
            for c in 0..3 {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> WavenumberGrid {
        self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let v = self.at(i);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }
}
