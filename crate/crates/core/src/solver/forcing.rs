use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth::smooth_step;
use crate::spectral::{SpectralField, WavenumberGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    #[default]
    Zero,
    FixedLowMode,
}

/// Deterministic divergence-free body forces `f₁ = f₂` on a few low modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    #[serde(default)]
    pub kind: ForcingKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub modes: Vec<[i64; 3]>,
    /// Ramp duration; the envelope rises smoothly from 0 to 1 over `[0, ramp]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<f64>,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self::zero()
    }
}

/// Largest admissible forcing wavenumber magnitude.
pub const MAX_FORCING_WAVENUMBER: f64 = 2.0;

impl ForcingSpec {
    pub fn zero() -> Self {
        Self {
            kind: ForcingKind::Zero,
            amplitude: 0.0,
            modes: Vec::new(),
            ramp: None,
        }
    }

    pub fn fixed_low_mode(amplitude: f64, modes: Vec<[i64; 3]>, ramp: Option<f64>) -> Self {
        Self {
            kind: ForcingKind::FixedLowMode,
            amplitude,
            modes,
            ramp,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == ForcingKind::Zero || self.amplitude == 0.0 || self.modes.is_empty()
    }

    /// Time envelope in `[0, 1]`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.ramp {
            Some(tau) if tau > 0.0 => smooth_step(t / tau),
            _ => 1.0,
        }
    }

    pub fn validate(&self, grid: WavenumberGrid) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::Config(format!(
                "forcing amplitude must be finite, got {}",
                self.amplitude
            )));
        }
        if let Some(tau) = self.ramp {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Error::Config(format!("forcing ramp must be >= 0, got {tau}")));
            }
        }
        if self.kind == ForcingKind::Zero {
            return Ok(());
        }
        for &m in &self.modes {
            let k2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
            if k2 == 0.0 {
                return Err(Error::ForcingMode {
                    mode: m,
                    reason: "the mean mode cannot be forced".into(),
                });
            }
            if k2.sqrt() > MAX_FORCING_WAVENUMBER {
                return Err(Error::ForcingMode {
                    mode: m,
                    reason: format!("|ξ| = {:.4} exceeds {MAX_FORCING_WAVENUMBER}", k2.sqrt()),
                });
            }
            match grid.index_of(m) {
                Some(idx) if !grid.is_dealiased_out(idx) && !grid.is_nyquist(idx) => {}
                _ => {
                    return Err(Error::ForcingMode {
                        mode: m,
                        reason: format!("outside the resolved modes of an n = {} grid", grid.n()),
                    })
                }
            }
        }
        Ok(())
    }

    /// Unit-envelope forcing pattern.
    fn template(&self, grid: WavenumberGrid) -> Result<SpectralField> {
        self.validate(grid)?;
        let mut f = SpectralField::zeros(grid);
        if self.is_zero() {
            return Ok(f);
        }
        for &m in &self.modes {
            let dir = transverse_unit(m);
            let a = self.amplitude;
            f.set_mode_pair(m, dir.map(|d| Complex64::new(a * d, 0.0)))?;
        }
        Ok(crate::spectral::dealias(&crate::spectral::leray_project(&f)))
    }
}

/// A unit vector orthogonal to `m`, chosen deterministically from the
/// coordinate axis least aligned with it.
fn transverse_unit(m: [i64; 3]) -> [f64; 3] {
    let k = [m[0] as f64, m[1] as f64, m[2] as f64];
    let axis = (0..3)
        .min_by(|&a, &b| k[a].abs().partial_cmp(&k[b].abs()).unwrap().then(a.cmp(&b)))
        .unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let c = [
        k[1] * e[2] - k[2] * e[1],
        k[2] * e[0] - k[0] * e[2],
        k[0] * e[1] - k[1] * e[0],
    ];
    let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    c.map(|v| v / norm)
}

/// Pre-evaluated forcing pattern; evaluation at time `t` only rescales it.
#[derive(Debug, Clone)]
pub struct Forcing {
    spec: ForcingSpec,
    pattern: SpectralField,
    active: bool,
}

impl Forcing {
    pub fn new(spec: &ForcingSpec, grid: WavenumberGrid) -> Result<Self> {
        let pattern = spec.template(grid)?;
        Ok(Self {
            spec: spec.clone(),
            active: !spec.is_zero(),
            pattern,
        })
    }

    pub fn spec(&self) -> &ForcingSpec {
        &self.spec
    }

    #[inline]
    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Envelope scale applied to the pattern at time `t`.
    #[inline]
    pub fn scale_at(&self, t: f64) -> f64 {
        if self.active {
            self.spec.envelope(t)
        } else {
            0.0
        }
    }

    pub fn pattern(&self) -> &SpectralField {
        &self.pattern
    }

    /// `(f̂₁, f̂₂)` at time `t`.
    pub fn eval(&self, t: f64) -> (SpectralField, SpectralField) {
        let mut f = self.pattern.clone();
        f.scale(self.scale_at(t));
        (f.clone(), f)
    }
}

/// Evaluates `(f̂₁, f̂₂)` for `spec` at time `t`.
pub fn forcing_eval(
    spec: &ForcingSpec,
    grid: WavenumberGrid,
    t: f64,
) -> Result<(SpectralField, SpectralField)> {
    Ok(Forcing::new(spec, grid)?.eval(t))
}
