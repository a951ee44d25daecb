mod common;

use std::f64::consts::PI;

use common::{log_k_oracle, rel, tuples};
use mhd_spectra::bounds::*;
use proptest::prelude::*;

#[test]
fn bounds_algebra_over_random_tuples() {
    let start = std::time::Instant::now();
    let mut decided = 0;
    for p in tuples(10_000, 2024) {
        let (k1, k2) = inertial_bounds(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2, p.t).unwrap();
        let (l1, l2) = log_k_oracle(&p);
        assert!(rel(k1, l1.exp()) < 1e-10, "{p:?}");
        assert!(rel(k2, l2.exp()) < 1e-10, "{p:?}");

        // (a) ordering equivalence, except within rounding of the boundary
        let cond = k41_condition(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2, p.t).unwrap();
        if (l1 - l2).abs() > 1e-9 {
            assert_eq!(k1 <= k2, cond.holds, "{p:?}: k1 = {k1}, k2 = {k2}, {cond:?}");
            decided += 1;
        }

        // (b) both intersection equations
        let m = p.nu.min(p.eta);
        let ek1 = kolmogorov_spectrum(p.c0, p.eps, k1);
        assert!(rel(ek1, 4.0 * PI * p.r1 * p.r1) < 1e-10, "{p:?}");
        let ek2 = kolmogorov_spectrum(p.c0, p.eps, k2);
        assert!(rel(ek2, 4.0 * PI * p.r2 * p.r2 / (m * p.t * k2 * k2)) < 1e-10, "{p:?}");

        // (c) the two bounds meet at T₀
        let t0 = max_time_t0(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2).unwrap();
        let (a1, a2) = inertial_bounds(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2, t0).unwrap();
        assert!(rel(a1, a2) < 1e-10, "{p:?}");

        // (d) ε_min inverts T₀
        let back = min_dissipation(t0, p.nu, p.eta, p.c0, p.r1, p.r2).unwrap();
        assert!(rel(back, p.eps) < 1e-10, "{p:?}");
    }
    assert!(decided > 9_900);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn condition_holds_exactly_before_t0() {
    for p in tuples(500, 7) {
        let t0 = max_time_t0(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2).unwrap();
        let before = k41_condition(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2, 0.5 * t0).unwrap();
        let after = k41_condition(p.c0, p.eps, p.nu, p.eta, p.r1, p.r2, 2.0 * t0).unwrap();
        assert!(before.holds && !after.holds, "{p:?}");
    }
}

#[test]
fn r2_solves_its_quadratic() {
    for p in tuples(1000, 11) {
        let r3 = compute_r3(p.r1 * p.r1, p.eps, p.nu, p.eta, R3Variant::Theorem).unwrap();
        let m = p.nu.min(p.eta);
        assert!(rel(r3, 2.0 * p.r1 * p.r1 / m + 2.0 * p.eps / m.sqrt()) < 1e-14);
        let r2 = compute_r2(p.r2, r3);
        assert!(r2 > 0.0);
        let q = r2 * r2 - r3 * r2 - p.r2 * p.r2;
        assert!(q.abs() < 1e-12 * r2 * r2, "{p:?}: {q}");
    }
}

#[test]
fn proof_variant_of_r3() {
    let r3 = compute_r3(2.0, 9.0, 0.5, 0.5, R3Variant::Proof).unwrap();
    assert_eq!(r3, 4.0 * (2.0 + 3.0));
}

#[test]
fn unit_parameters_collapse() {
    let (k1, k2) = inertial_bounds(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    assert!(rel(k1, (4.0 * PI).powf(-0.6)) < 1e-15);
    assert!(rel(k2, (4.0 * PI).powi(3)) < 1e-15);
}

#[test]
fn report_is_consistent_with_its_parts() {
    let inputs = BoundInputs {
        nu: 0.02,
        eta: 0.03,
        c0: 1.6,
        eps: 0.4,
        eps_source: EpsSource::Supplied,
        t: 2.0,
        r_sq: 50.0,
        r1_initial: 300.0,
        r1_final: 320.0,
        f_inf: 0.0,
        r3_variant: R3Variant::Theorem,
    };
    let r = bounds_report(&inputs).unwrap();
    assert_eq!(r.schema_version, SCHEMA_VERSION);
    assert!(rel(r.r3, 2.0 * 50.0 / 0.02) < 1e-14);
    assert!(rel(r.r2, compute_r2(300.0, r.r3)) < 1e-15);
    assert_eq!(r.condition53, r.k1 <= r.k2);
    let json = serde_json::to_value(&r).unwrap();
    assert!(json.get("T0").is_some());
    let back: BoundsReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn nonpositive_inputs_are_rejected() {
    assert!(inertial_bounds(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(inertial_bounds(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(max_time_t0(1.0, -1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(min_dissipation(1.0, 1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
}

proptest! {
    #[test]
    fn selected_r1_meets_the_hypothesis_with_margin(
        r_sq in prop::collection::vec(0.01f64..100.0, 1..20),
        h in 0.0f64..10.0,
        delta in 1.0f64..3.0,
        m in 1e-3f64..1.0,
        margin in 1.01f64..3.0,
    ) {
        let grid = [2.0, 3.0, 4.0, 8.0, 16.0, 32.0, f64::INFINITY];
        let r1 = select_r1(&r_sq, |_, _| h, delta, &grid, m, margin).unwrap();
        for (i, &v) in r1.iter().enumerate() {
            if i > 0 {
                prop_assert!(v >= r1[i - 1]);
            }
            for &p in &grid {
                prop_assert!(hypothesis_lhs(p, delta, r_sq[i], h) * margin <= m / 6.0 * v * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn energy_bound_never_below_initial(e0 in 0.0f64..1e3, w in -1e3f64..1e3) {
        prop_assert!(energy_bound_sq(e0, w) >= e0);
    }
}
