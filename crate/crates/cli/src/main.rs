use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mhd_spectra::bounds::{BoundInputs, EpsSource, R3Variant};
use mhd_spectra::commands::{self, bound_inputs_from_run, load_run};
use mhd_spectra::config::{apply_override, parse_config};
use mhd_spectra::verify::Status;

/// Pseudo-spectral 3D MHD on the periodic torus, with cutoff diagnostics,
/// inertial-range bounds and an inequality verifier.
#[derive(Parser)]
#[command(name = "mhd-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write its artifacts to the output directory.
    Run {
        config: PathBuf,
        /// Override a configuration value, e.g. `--set solver.dt=0.005`.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Shorthand for `--set output.dir=DIR`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the closed-form bounds.
    Bounds(BoundsArgs),
    /// Check every lemma and theorem against a finished run.
    Verify {
        run_dir: PathBuf,
        /// Print the full reports instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Write shell spectra of a finished run, optionally with a slope fit.
    Spectrum {
        run_dir: PathBuf,
        #[arg(long, num_args = 2, value_names = ["K_LO", "K_HI"])]
        fit: Option<Vec<usize>>,
    },
    /// Parse and validate a configuration without running it.
    Check {
        config: PathBuf,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Read inputs from a JSON file.
    #[arg(long, conflicts_with = "run")]
    inputs: Option<PathBuf>,
    /// Derive inputs from a finished run directory.
    #[arg(long)]
    run: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// `R²(T)`.
    #[arg(long)]
    r_sq: Option<f64>,
    /// `R₁(T)`; also used for `R₁(0)` unless `--r1-initial` is given.
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r1_initial: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    f_inf: f64,
    #[arg(long, value_enum, default_value = "theorem")]
    r3_variant: VariantArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Theorem,
    Proof,
}

fn load_config(path: &Path, overrides: &[String]) -> Result<mhd_spectra::config::RunConfig> {
    let mut text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    for o in overrides {
        text = apply_override(&text, o)?;
    }
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn bound_inputs(a: &BoundsArgs) -> Result<BoundInputs> {
    if let Some(path) = &a.inputs {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    if let Some(dir) = &a.run {
        let run = load_run(dir)?;
        let mut inputs = bound_inputs_from_run(&run)?;
        if let Some(c0) = a.c0 {
            inputs.c0 = c0;
        }
        if let Some(eps) = a.eps {
            inputs.eps = eps;
            inputs.eps_source = EpsSource::Supplied;
        }
        return Ok(inputs);
    }
    let need = |v: Option<f64>, name: &str| v.with_context(|| format!("--{name} is required without --inputs or --run"));
    let r1 = need(a.r1, "r1")?;
    Ok(BoundInputs {
        nu: need(a.nu, "nu")?,
        eta: need(a.eta, "eta")?,
        c0: need(a.c0, "c0")?,
        eps: need(a.eps, "eps")?,
        eps_source: EpsSource::Supplied,
        t: need(a.t, "t")?,
        r_sq: need(a.r_sq, "r-sq")?,
        r1_initial: a.r1_initial.unwrap_or(r1),
        r1_final: r1,
        f_inf: a.f_inf,
        r3_variant: match a.r3_variant {
            VariantArg::Theorem => R3Variant::Theorem,
            VariantArg::Proof => R3Variant::Proof,
        },
    })
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MHD_SPECTRA_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("MHD_SPECTRA_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("MHD_SPECTRA_THREADS must be a positive integer, got `{v}`");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    set_threads()?;
    match cli.command {
        Command::Run { config, mut overrides, out } => {
            if let Some(dir) = out {
                overrides.push(format!("output.dir={}", toml_string(&dir)));
            }
            let cfg = load_config(&config, &overrides)?;
            let s = commands::cmd_run(&cfg).context("run failed")?;
            println!(
                "{} steps to t = {}: E = {:.10e}, eps_mean = {:.6e}, max div = {:.3e}",
                s.steps, s.final_state.t, s.final_state.energy, s.eps_mean, s.final_state.max_divergence
            );
            println!("artifacts in {}", cfg.output.dir.display());
        }
        Command::Bounds(a) => {
            let inputs = bound_inputs(&a)?;
            let report = commands::cmd_bounds(&inputs)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match &a.out {
                Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Verify { run_dir, json } => {
            let out = commands::cmd_verify(&run_dir).with_context(|| format!("verifying {}", run_dir.display()))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                for r in &out.reports {
                    let status = match r.status {
                        Status::Pass => "PASS",
                        Status::Fail => "FAIL",
                        Status::HypothesisUnmet => "UNMET",
                    };
                    let probe = r.probe.as_ref().map(|p| format!(" k={:?}", p.k)).unwrap_or_default();
                    let margin = r.worst_margin.map(|m| format!(" worst margin {m:.6e}")).unwrap_or_default();
                    let note = r.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default();
                    println!("{status:5} {}{probe}{margin}{note}", r.name);
                }
            }
            if out.any_failed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Spectrum { run_dir, fit } => {
            let fit = fit.map(|v| (v[0], v[1]));
            let out = commands::cmd_spectrum(&run_dir, fit)?;
            println!("{} spectra written to {}", out.spectra.len(), run_dir.join(commands::SPECTRUM_FILE).display());
            if let Some(f) = out.fit {
                println!(
                    "fit over shells {}..{} at t = {}: exponent {:.6}, prefactor {:.6e}, residual {:.3e}",
                    f.k_lo, f.k_hi, f.t, f.fit.exponent, f.fit.prefactor, f.fit.residual
                );
            }
        }
        Command::Check { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn toml_string(p: &Path) -> String {
    let s = p.display().to_string();
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
