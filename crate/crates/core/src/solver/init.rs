use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{checkpoint, MhdState};
use crate::error::{Error, Result};
use crate::spectral::{dealias, leray_project, parseval_energy, PhysicalField, SpectralField, Transform, WavenumberGrid};

/// Named initial-condition presets. All of them produce zero-mean,
/// solenoidal, dealiased fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    Zero,
    /// Three-dimensional Orszag-Tang-type data:
    /// `u = (−2 sin y, 2 sin x, 0)`,
    /// `b = β(−2 sin 2y + sin z, 2 sin x + sin z, sin x + sin y)`.
    OrszagTang {
        #[serde(default = "default_ot_beta")]
        beta: f64,
    },
    /// Random solenoidal fields whose shell spectrum scales like `k^{−slope}`
    /// on `k_lo <= |ξ| <= k_hi`, normalized to `‖u‖² + ‖b‖² = energy`.
    Random {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "default_k_lo")]
        k_lo: f64,
        #[serde(default = "default_k_hi")]
        k_hi: f64,
        #[serde(default = "default_energy")]
        energy: f64,
    },
    /// Restart from an `MHDS1` checkpoint.
    File { path: PathBuf },
}

fn default_ot_beta() -> f64 {
    0.8
}
fn default_slope() -> f64 {
    5.0 / 3.0
}
fn default_k_lo() -> f64 {
    1.0
}
fn default_k_hi() -> f64 {
    4.0
}
fn default_energy() -> f64 {
    1.0
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::OrszagTang {
            beta: default_ot_beta(),
        }
    }
}

impl InitSpec {
    pub fn build(&self, grid: WavenumberGrid) -> Result<MhdState> {
        match self {
            InitSpec::Zero => Ok(MhdState::zero(grid)),
            InitSpec::OrszagTang { beta } => Ok(orszag_tang(grid, *beta)),
            InitSpec::Random {
                seed,
                slope,
                k_lo,
                k_hi,
                energy,
            } => random_solenoidal(grid, *seed, *slope, *k_lo, *k_hi, *energy),
            InitSpec::File { path } => {
                let ck = checkpoint::read_file(path)?;
                if ck.state.grid() != grid {
                    return Err(Error::Config(format!(
                        "checkpoint {} has n = {}, configuration asks for n = {}",
                        path.display(),
                        ck.state.grid().n(),
                        grid.n()
                    )));
                }
                Ok(ck.state)
            }
        }
    }
}

fn clean(field: &SpectralField) -> SpectralField {
    dealias(&leray_project(field))
}

pub fn orszag_tang(grid: WavenumberGrid, beta: f64) -> MhdState {
    let t = Transform::new(grid);
    let u = PhysicalField::from_fn(grid, |x| [-2.0 * x[1].sin(), 2.0 * x[0].sin(), 0.0]);
    let b = PhysicalField::from_fn(grid, |x| {
        [
            beta * (-2.0 * (2.0 * x[1]).sin() + x[2].sin()),
            beta * (2.0 * x[0].sin() + x[2].sin()),
            beta * (x[0].sin() + x[1].sin()),
        ]
    });
    // the grids match by construction
    let u_hat = clean(&t.forward(&u).expect("grid matches"));
    let b_hat = clean(&t.forward(&b).expect("grid matches"));
    MhdState::new(u_hat, b_hat, 0.0)
}

fn random_field(grid: WavenumberGrid, rng: &mut ChaCha8Rng, slope: f64, k_lo: f64, k_hi: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let neg = grid.neg_index(idx);
        // one draw per Hermitian pair, in flat order
        if neg <= idx || grid.is_nyquist(idx) || grid.is_dealiased_out(idx) {
            continue;
        }
        let k = grid.k_squared(idx).sqrt();
        if k < k_lo || k > k_hi {
            continue;
        }
        let amp = k.powf(-(slope + 2.0) / 2.0);
        let mut v = [Complex64::new(0.0, 0.0); 3];
        for z in &mut v {
            *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        }
        for (c, z) in v.iter().enumerate() {
            f.component_mut(c)[idx] = *z;
            f.component_mut(c)[neg] = z.conj();
        }
    }
    clean(&f)
}

pub fn random_solenoidal(
    grid: WavenumberGrid,
    seed: u64,
    slope: f64,
    k_lo: f64,
    k_hi: f64,
    energy: f64,
) -> Result<MhdState> {
    if !(k_hi >= k_lo && k_lo >= 1.0) {
        return Err(Error::Config(format!(
            "random preset needs 1 <= k_lo <= k_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    if !(energy >= 0.0 && energy.is_finite()) {
        return Err(Error::Config(format!("random preset energy must be >= 0, got {energy}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = random_field(grid, &mut rng, slope, k_lo, k_hi);
    let mut b = random_field(grid, &mut rng, slope, k_lo, k_hi);
    let total = parseval_energy(&u) + parseval_energy(&b);
    if total == 0.0 {
        if energy > 0.0 {
            return Err(Error::Config(format!(
                "no resolved modes in the band [{k_lo}, {k_hi}] on an n = {} grid",
                grid.n()
            )));
        }
        return Ok(MhdState::new(u, b, 0.0));
    }
    let s = (energy / total).sqrt();
    u.scale(s);
    b.scale(s);
    Ok(MhdState::new(u, b, 0.0))
}
