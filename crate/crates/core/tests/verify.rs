mod common;

use mhd_spectra::bounds::R3Variant;
use mhd_spectra::solver::{run, ForcingSpec, InitSpec, SolverParams};
use mhd_spectra::verify::{any_failed, verify_run, CheckReport, Probe, Status, VerifyOptions};

fn params(forcing: ForcingSpec) -> SolverParams {
    SolverParams {
        n: 16,
        nu: 0.05,
        eta: 0.04,
        dt: 0.005,
        t_end: 0.3,
        cadence: 5,
        forcing,
        init: InitSpec::Random {
            seed: 12,
            slope: 5.0 / 3.0,
            k_lo: 1.0,
            k_hi: 5.0,
            energy: 2.0,
        },
    }
}

fn options() -> VerifyOptions {
    VerifyOptions {
        probes: vec![
            Probe {
                k: [4.0, 0.0, 0.0],
                delta: 1.0,
                p_grid: vec![2.0, 4.0, 16.0],
            },
            Probe {
                k: [3.0, 3.0, 0.0],
                delta: 1.2,
                p_grid: vec![2.0, 8.0],
            },
        ],
        margin: 1.1,
        r3_variant: R3Variant::Theorem,
        shells: (2, 5),
        inertial: Some((1.6, 0.5)),
    }
}

fn find<'a>(reports: &'a [CheckReport], name: &str) -> Vec<&'a CheckReport> {
    reports.iter().filter(|r| r.name == name).collect()
}

#[test]
fn forced_run_passes_every_check() {
    let spec = ForcingSpec::fixed_low_mode(2.0, vec![[1, 0, 0], [0, 1, 1], [2, 0, 0]], Some(0.05));
    let traj = run(&params(spec)).unwrap();
    let reports = verify_run(&traj, &options()).unwrap();
    for name in ["energy_inequality", "lemma_2_9", "thm_2_7", "thm_2_8", "thm_3_1", "thm_3_2"] {
        let found = find(&reports, name);
        assert!(!found.is_empty(), "{name} missing");
        for r in found {
            assert_eq!(r.status, Status::Pass, "{r:#?}");
        }
    }
    assert!(!find(&reports, "thm_3_4").is_empty());
    assert!(!any_failed(&reports));
}

#[test]
fn both_r3_variants_give_passing_checks() {
    let traj = run(&params(ForcingSpec::zero())).unwrap();
    for variant in [R3Variant::Theorem, R3Variant::Proof] {
        let mut o = options();
        o.r3_variant = variant;
        o.inertial = None;
        let reports = verify_run(&traj, &o).unwrap();
        assert!(!any_failed(&reports), "{variant:?}");
    }
}

#[test]
fn tampered_energy_is_a_failure_not_a_hypothesis_gap() {
    let mut traj = run(&params(ForcingSpec::zero())).unwrap();
    let last = traj.snapshots.len() - 1;
    traj.snapshots[last].u_hat.scale(3.0);
    let reports = verify_run(&traj, &options()).unwrap();
    let energy = find(&reports, "energy_inequality")[0];
    assert_eq!(energy.status, Status::Fail);
    assert!(energy.worst_margin.unwrap() < 0.0);
    assert!(any_failed(&reports));
}

#[test]
fn margin_just_above_one_still_meets_the_hypothesis() {
    let traj = run(&params(ForcingSpec::zero())).unwrap();
    let mut o = options();
    o.margin = 1.0 + 1e-9;
    let reports = verify_run(&traj, &o).unwrap();
    // R₁ selected with a margin just above 1 still satisfies the strict gates
    for r in find(&reports, "lemma_2_9") {
        assert_eq!(r.status, Status::Pass);
    }
}

#[test]
fn reports_serialize_with_kebab_case_status() {
    let traj = run(&params(ForcingSpec::zero())).unwrap();
    let mut o = options();
    o.probes[0].p_grid.push(f64::INFINITY);
    let reports = verify_run(&traj, &o).unwrap();
    let json = serde_json::to_string(&reports).unwrap();
    assert!(json.contains("\"status\":\"pass\""));
    assert!(!json.contains("null"), "{json}");
    let back: Vec<CheckReport> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.len(), reports.len());
}
