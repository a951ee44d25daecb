use mhd_spectra::bounds::R3Variant;
use mhd_spectra::config::*;
use mhd_spectra::solver::{ForcingSpec, InitSpec};
use mhd_spectra::Error;
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        (2.0f64..64.0).prop_map(Exponent),
        Just(Exponent(f64::INFINITY)),
        (2u32..10).prop_map(|p| Exponent(p as f64)),
    ]
}

fn probe() -> impl Strategy<Value = ProbeSpec> {
    (4i32..9, -3i32..4, 0i32..3, 0.0f64..1.0, prop::collection::vec(exponent(), 1..6)).prop_map(
        |(kx, ky, kz, frac, p_grid)| {
            let k = [kx as f64, ky as f64, kz as f64];
            let norm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
            let hi = delta_limit_of(norm);
            ProbeSpec {
                k,
                delta: 1.0 + frac * (hi - 1.0) * 0.99,
                p_grid,
            }
        },
    )
}

fn delta_limit_of(norm: f64) -> f64 {
    norm / (2.0 * 3f64.sqrt())
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        (2usize..20).prop_map(|h| 2 * h),
        0.0f64..1.0,
        0.0f64..1.0,
        1e-4f64..0.1,
        0.0f64..5.0,
        prop::collection::vec(probe(), 0..4),
        prop::option::of(0.1f64..5.0),
        prop_oneof![Just(EpsSetting::Measured), (1e-3f64..10.0).prop_map(EpsSetting::Value)],
        1.01f64..3.0,
        any::<bool>(),
        1usize..50,
        any::<u64>(),
    )
        .prop_map(|(n, nu, eta, dt, t_end, probes, c0, eps, margin, proof, cadence, seed)| RunConfig {
            solver: SolverSection { n, nu, eta, dt, t_end },
            forcing: if seed % 2 == 0 {
                ForcingSpec::zero()
            } else {
                ForcingSpec::fixed_low_mode(0.5, vec![[1, 0, 0], [0, 1, 1]], Some(0.25))
            },
            init: InitSpec::Random {
                seed,
                slope: 5.0 / 3.0,
                k_lo: 1.0,
                k_hi: 3.0,
                energy: 2.0,
            },
            probes,
            bounds: BoundsSection {
                c0,
                eps,
                margin,
                r3_variant: if proof { R3Variant::Proof } else { R3Variant::Theorem },
                shells: [2, 10],
            },
            output: OutputSection {
                dir: "runs/x".into(),
                cadence,
                formats: vec![Format::Csv],
                snapshots: !proof,
            },
        })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(cfg in config()) {
        let text = cfg.to_toml().unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn oversized_delta_is_always_rejected(kx in 2.0f64..20.0, over in 1.0f64..3.0) {
        let text = format!("[[probe]]\nk = [{kx}, 0.0, 0.0]\ndelta = {}\n", over * delta_limit_of(kx));
        match parse_config(&text) {
            Err(Error::ConfigDiagnostics(d)) => {
                prop_assert!(d.iter().any(|d| d.message.contains("0<δ<|k|/(2√3)") && d.line == Some(3)));
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }
}

#[test]
fn example_config_is_valid() {
    let text = include_str!("../../../configs/orszag_tang.cfg");
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.probes.len(), 2);
    assert_eq!(cfg.solver.n, 32);
}

#[test]
fn unknown_sections_and_keys_fail_with_lines() {
    let Err(Error::ConfigDiagnostics(d)) = parse_config("[solver]\nn = 16\n\n[output]\ncadense = 3\n") else {
        panic!("expected diagnostics")
    };
    assert_eq!(d[0].line, Some(5));
    assert!(parse_config("[extra]\nx = 1\n").is_err());
}

#[test]
fn probe_norm_and_small_delta_are_checked() {
    let Err(Error::ConfigDiagnostics(d)) = parse_config("[[probe]]\nk = [1, 0, 0]\ndelta = 0.2\n") else {
        panic!("expected diagnostics")
    };
    assert!(d.iter().any(|d| d.message.contains("|k| must be")));
    let Err(Error::ConfigDiagnostics(d)) = parse_config("[[probe]]\nk = [6, 0, 0]\ndelta = 0.5\n") else {
        panic!("expected diagnostics")
    };
    assert!(d[0].message.contains("below one lattice unit"), "{d:?}");
    let Err(Error::ConfigDiagnostics(d)) =
        parse_config("[[probe]]\nk = [6, 0, 0]\n\n[[probe]]\nk = [8, 0, 0]\np_grid = [1.5]\n")
    else {
        panic!("expected diagnostics")
    };
    assert_eq!(d[0].line, Some(6));
}
