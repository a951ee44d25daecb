use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth::smooth_step;
use crate::spectral::WavenumberGrid;

/// Smooth cutoff of a cube centered at a wavevector `k`:
/// `χ̂_k(ξ) = Π_i ψ(|ξ_i − k_i|)` with `ψ = 1` on `[0, δ/2]` and `ψ = 0`
/// on `[δ, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    center: [f64; 3],
    delta: f64,
}

/// Upper limit on `δ` for a center of norm `k_norm`.
pub fn delta_limit(k_norm: f64) -> f64 {
    k_norm / (2.0 * 3f64.sqrt())
}

pub fn make_cutoff(k: [f64; 3], delta: f64) -> Result<CutoffSpec> {
    let norm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !k.iter().all(|x| x.is_finite()) || norm == 0.0 {
        return Err(Error::Constraint(format!("cutoff center must be a nonzero finite wavevector, got {k:?}")));
    }
    let limit = delta_limit(norm);
    if !(delta > 0.0 && delta < limit) {
        return Err(Error::Constraint(format!(
            "cutoff width δ = {delta} violates 0<δ<|k|/(2√3) = {limit:.6} for |k| = {norm:.6}"
        )));
    }
    Ok(CutoffSpec { center: k, delta })
}

impl CutoffSpec {
    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn center_norm(&self) -> f64 {
        self.center.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// One-dimensional ramp as a function of the distance `r >= 0`.
    pub fn profile(&self, r: f64) -> f64 {
        let half = 0.5 * self.delta;
        1.0 - smooth_step((r - half) / half)
    }

    pub fn value(&self, xi: [f64; 3]) -> f64 {
        let mut v = 1.0;
        for i in 0..3 {
            v *= self.profile((xi[i] - self.center[i]).abs());
            if v == 0.0 {
                break;
            }
        }
        v
    }

    /// Lattice modes of `grid` where the cutoff is positive, as
    /// `(flat index, χ̂)` pairs in flat-index order.
    pub fn support(&self, grid: WavenumberGrid) -> Vec<(usize, f64)> {
        let lo = self.center.map(|c| (c - self.delta).ceil() as i64);
        let hi = self.center.map(|c| (c + self.delta).floor() as i64);
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let chi = self.value([x as f64, y as f64, z as f64]);
                    if chi <= 0.0 {
                        continue;
                    }
                    if let Some(idx) = grid.index_of([x, y, z]) {
                        out.push((idx, chi));
                    }
                }
            }
        }
        out.sort_unstable_by_key(|&(idx, _)| idx);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let c = make_cutoff([4.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(c.value([4.0, 0.0, 0.0]), 1.0);
        assert_eq!(c.value([4.5, 0.5, -0.5]), 1.0);
        assert_eq!(c.value([5.0, 0.0, 0.0]), 0.0);
        assert_eq!(c.value([4.0, 0.0, -1.2]), 0.0);
        let mid = c.value([4.75, 0.0, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn delta_bound_is_enforced() {
        let err = make_cutoff([4.0, 0.0, 0.0], 4.0).unwrap_err().to_string();
        assert!(err.contains("0<δ<|k|/(2√3)"), "{err}");
        assert!(make_cutoff([0.0; 3], 0.1).is_err());
        assert!(make_cutoff([4.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn integer_center_with_unit_delta_has_one_lattice_point() {
        let grid = WavenumberGrid::new(16).unwrap();
        let c = make_cutoff([4.0, 0.0, 0.0], 1.0).unwrap();
        let s = c.support(grid);
        assert_eq!(s, vec![(grid.index_of([4, 0, 0]).unwrap(), 1.0)]);
    }
}
