//! C∞ monotone transition used for cutoff profiles and forcing envelopes.

fn mollifier(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Quintic smoothstep `6s⁵ − 15s⁴ + 10s³` on `[0, 1]`.
fn quintic(s: f64) -> f64 {
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// Rises from 0 (for `s <= 0`) to 1 (for `s >= 1`), smooth and monotone.
///
/// The standard `exp(−1/x)` transition evaluated on a quintic-smoothstep
/// reparametrization of `s`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let x = quintic(s);
    let a = mollifier(x);
    let b = mollifier(1.0 - x);
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(3.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn monotone_on_fine_grid() {
        let mut prev = 0.0;
        for i in 0..=10_000 {
            let v = smooth_step(i as f64 / 10_000.0);
            assert!(v >= prev);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }
}
