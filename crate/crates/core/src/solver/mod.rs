//! Time integration of the Fourier-space MHD system with an
//! integrating-factor RK4 scheme, plus the energy ledger that tracks the
//! energy inequality along a run.

pub mod checkpoint;
mod forcing;
mod init;
mod nonlinear;

pub use forcing::{forcing_eval, Forcing, ForcingKind, ForcingSpec, MAX_FORCING_WAVENUMBER};
pub use init::{orszag_tang, random_solenoidal, InitSpec};
pub use nonlinear::Nonlinear;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{divergence_max, parseval_energy, SpectralField, WavenumberGrid};

/// Velocity and magnetic spectra at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MhdState {
    pub u_hat: SpectralField,
    pub b_hat: SpectralField,
    pub t: f64,
}

impl MhdState {
    pub fn new(u_hat: SpectralField, b_hat: SpectralField, t: f64) -> Self {
        Self { u_hat, b_hat, t }
    }

    pub fn zero(grid: WavenumberGrid) -> Self {
        Self::new(SpectralField::zeros(grid), SpectralField::zeros(grid), 0.0)
    }

    pub fn grid(&self) -> WavenumberGrid {
        self.u_hat.grid()
    }

    pub fn kinetic_energy(&self) -> f64 {
        parseval_energy(&self.u_hat)
    }

    pub fn magnetic_energy(&self) -> f64 {
        parseval_energy(&self.b_hat)
    }

    /// `‖u‖² + ‖b‖²`.
    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.magnetic_energy()
    }

    /// `∫ u·b dx = Σ Re(û·conj(b̂))`.
    pub fn cross_helicity(&self) -> f64 {
        self.u_hat.inner(&self.b_hat)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u_hat.is_finite() && self.b_hat.is_finite()
    }

    pub fn max_divergence(&self) -> f64 {
        divergence_max(&self.u_hat).max(divergence_max(&self.b_hat))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub n: usize,
    pub nu: f64,
    pub eta: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between stored snapshots.
    pub cadence: usize,
    pub forcing: ForcingSpec,
    pub init: InitSpec,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            n: 32,
            nu: 0.02,
            eta: 0.02,
            dt: 0.002,
            t_end: 0.2,
            cadence: 10,
            forcing: ForcingSpec::zero(),
            init: InitSpec::default(),
        }
    }
}

/// Safety factor in `dt <= CFL · Δx / max(|u| + |b|)`.
pub const CFL_NUMBER: f64 = 0.5;

impl SolverParams {
    pub fn grid(&self) -> Result<WavenumberGrid> {
        WavenumberGrid::new(self.n)
    }

    pub fn min_diffusivity(&self) -> f64 {
        self.nu.min(self.eta)
    }

    /// Checks the parameter constraints. Zero diffusivities are admitted for
    /// ideal runs; the bound formulas reject them separately.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        for (name, v) in [("nu", self.nu), ("eta", self.eta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be >= 1".into()));
        }
        self.forcing.validate(grid)
    }

    /// Number of steps to reach `t_end`; the last one may be shortened.
    pub fn total_steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Energy bookkeeping at one instant.
///
/// `residual = E(t) + 2·dissipated − 2·injected − E(0)` is the energy
/// inequality with the `min(ν, η)` dissipation, so `residual <= 0` up to time
/// discretization error. `balance` uses the exact dissipation `∫ε` instead and
/// vanishes for the exact dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `‖u‖²`
    pub kinetic: f64,
    /// `‖b‖²`
    pub magnetic: f64,
    /// `min(ν, η) ∫₀ᵗ (‖∇u‖² + ‖∇b‖²) ds`
    pub dissipated: f64,
    /// `∫₀ᵗ ∫ (u·f₁ + b·f₂) dx ds`
    pub injected: f64,
    /// `∫₀ᵗ (ν‖∇u‖² + η‖∇b‖²) ds`
    pub viscous_work: f64,
    pub residual: f64,
    pub balance: f64,
}

impl EnergyRecord {
    pub fn energy(&self) -> f64 {
        self.kinetic + self.magnetic
    }
}

/// Time integrals accumulated alongside the state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LedgerIntegrals {
    /// `∫ (‖∇u‖² + ‖∇b‖²)`
    pub gradient: f64,
    /// `∫ (ν‖∇u‖² + η‖∇b‖²)`
    pub viscous: f64,
    /// `∫ (⟨u, f₁⟩ + ⟨b, f₂⟩)`
    pub injected: f64,
}

/// Integrating-factor RK4 stepper. Diffusion is integrated exactly through
/// `exp(−ν|ξ|²h)` and `exp(−η|ξ|²h)`; the ledger integrands are evaluated at
/// the four stage states with the RK4 weights, which keeps the ledger at the
/// same order as the state.
#[derive(Debug, Clone)]
pub struct Stepper {
    nonlinear: Nonlinear,
    forcing: Forcing,
    nu: f64,
    eta: f64,
    factors: Option<Factors>,
}

#[derive(Debug, Clone)]
struct Factors {
    h: f64,
    u_half: Vec<f64>,
    u_full: Vec<f64>,
    b_half: Vec<f64>,
    b_full: Vec<f64>,
}

struct Stage {
    du: SpectralField,
    db: SpectralField,
    gradient: f64,
    viscous: f64,
    injected: f64,
    max_speed: f64,
}

fn weighted_sq(field: &SpectralField, weight: &[f64]) -> f64 {
    let mut acc = 0.0;
    for c in field.components() {
        for (z, w) in c.iter().zip(weight) {
            acc += z.norm_sqr() * w;
        }
    }
    acc
}

impl Stepper {
    pub fn new(params: &SolverParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid()?;
        Ok(Self {
            nonlinear: Nonlinear::new(grid),
            forcing: Forcing::new(&params.forcing, grid)?,
            nu: params.nu,
            eta: params.eta,
            factors: None,
        })
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn nonlinear(&self) -> &Nonlinear {
        &self.nonlinear
    }

    fn factors(&mut self, h: f64) -> &Factors {
        let stale = self.factors.as_ref().map_or(true, |f| f.h != h);
        if stale {
            let k2 = self.nonlinear.k_squared();
            let make = |d: f64, s: f64| -> Vec<f64> { k2.iter().map(|k| (-d * k * s).exp()).collect() };
            self.factors = Some(Factors {
                h,
                u_half: make(self.nu, 0.5 * h),
                u_full: make(self.nu, h),
                b_half: make(self.eta, 0.5 * h),
                b_full: make(self.eta, h),
            });
        }
        self.factors.as_ref().unwrap()
    }

    fn stage(&self, u: &SpectralField, b: &SpectralField, t: f64) -> Stage {
        let terms = self.nonlinear.eval(u, b);
        let mut du = terms.du;
        let mut db = terms.db;
        let k2 = self.nonlinear.k_squared();
        let gu = weighted_sq(u, k2);
        let gb = weighted_sq(b, k2);
        let mut injected = 0.0;
        let s = self.forcing.scale_at(t);
        if s != 0.0 {
            let f = self.forcing.pattern();
            du.add_scaled(s, f);
            db.add_scaled(s, f);
            injected = s * (u.inner(f) + b.inner(f));
        }
        Stage {
            du,
            db,
            gradient: gu + gb,
            viscous: self.nu * gu + self.eta * gb,
            injected,
            max_speed: terms.max_speed,
        }
    }

    /// Full right-hand side `(dû/dt, db̂/dt)` including diffusion and forcing.
    pub fn rhs(&self, state: &MhdState) -> Result<(SpectralField, SpectralField)> {
        if !state.is_finite() {
            return Err(Error::Diverged { t: state.t });
        }
        let st = self.stage(&state.u_hat, &state.b_hat, state.t);
        let k2 = self.nonlinear.k_squared();
        let mut du = st.du;
        let mut db = st.db;
        let flag = du.is_solenoidal();
        for c in 0..3 {
            let (uc, bc) = (state.u_hat.component(c), state.b_hat.component(c));
            let (duc, dbc) = (&mut du.components_mut_raw()[c], &mut db.components_mut_raw()[c]);
            for i in 0..k2.len() {
                duc[i] -= uc[i] * (self.nu * k2[i]);
                dbc[i] -= bc[i] * (self.eta * k2[i]);
            }
        }
        du.mark_solenoidal(flag);
        db.mark_solenoidal(flag);
        Ok((du, db))
    }

    /// Advances `state` by `h`, returning the new state and the ledger
    /// integrals over the step.
    pub fn step(&mut self, state: &MhdState, h: f64) -> Result<(MhdState, LedgerIntegrals)> {
        if !state.is_finite() {
            return Err(Error::Diverged { t: state.t });
        }
        let t = state.t;
        let (u0, b0) = (&state.u_hat, &state.b_hat);

        let s1 = self.stage(u0, b0, t);
        if s1.max_speed > 0.0 {
            let limit = CFL_NUMBER * self.nonlinear.grid().spacing() / s1.max_speed;
            if h > limit * (1.0 + 1e-12) {
                return Err(Error::Cfl { dt: h, limit, t });
            }
        }
        let f = self.factors(h).clone();
        let nl = &self.nonlinear;
        let half = 0.5 * h;

        let u2 = nl.combine(|i, c| (u0.component(c)[i] + s1.du.component(c)[i] * half) * f.u_half[i], false);
        let b2 = nl.combine(|i, c| (b0.component(c)[i] + s1.db.component(c)[i] * half) * f.b_half[i], false);
        let s2 = self.stage(&u2, &b2, t + half);

        let u3 = nl.combine(|i, c| u0.component(c)[i] * f.u_half[i] + s2.du.component(c)[i] * half, false);
        let b3 = nl.combine(|i, c| b0.component(c)[i] * f.b_half[i] + s2.db.component(c)[i] * half, false);
        let s3 = self.stage(&u3, &b3, t + half);

        let u4 = nl.combine(
            |i, c| u0.component(c)[i] * f.u_full[i] + s3.du.component(c)[i] * (h * f.u_half[i]),
            false,
        );
        let b4 = nl.combine(
            |i, c| b0.component(c)[i] * f.b_full[i] + s3.db.component(c)[i] * (h * f.b_half[i]),
            false,
        );
        let s4 = self.stage(&u4, &b4, t + h);

        let rk = |x0: &SpectralField, k: [&SpectralField; 4], full: &[f64], halfs: &[f64]| {
            nl.combine(
                |i, c| {
                    x0.component(c)[i] * full[i]
                        + k[0].component(c)[i] * (h / 6.0 * full[i])
                        + (k[1].component(c)[i] + k[2].component(c)[i]) * (h / 3.0 * halfs[i])
                        + k[3].component(c)[i] * (h / 6.0)
                },
                true,
            )
        };
        let u_new = rk(u0, [&s1.du, &s2.du, &s3.du, &s4.du], &f.u_full, &f.u_half);
        let b_new = rk(b0, [&s1.db, &s2.db, &s3.db, &s4.db], &f.b_full, &f.b_half);

        let w = |a: f64, b: f64, c: f64, d: f64| h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        let integrals = LedgerIntegrals {
            gradient: w(s1.gradient, s2.gradient, s3.gradient, s4.gradient),
            viscous: w(s1.viscous, s2.viscous, s3.viscous, s4.viscous),
            injected: w(s1.injected, s2.injected, s3.injected, s4.injected),
        };

        let next = MhdState::new(u_new, b_new, t + h);
        if !next.is_finite() {
            return Err(Error::Diverged { t: t + h });
        }
        Ok((next, integrals))
    }
}

/// `(dû/dt, db̂/dt)` for `state` under `params`.
pub fn rhs(state: &MhdState, params: &SolverParams) -> Result<(SpectralField, SpectralField)> {
    Stepper::new(params)?.rhs(state)
}

/// A run in progress: owns its state and the accumulated ledger integrals.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: SolverParams,
    stepper: Stepper,
    state: MhdState,
    steps_taken: usize,
    total_steps: usize,
    integrals: LedgerIntegrals,
    initial_energy: f64,
}

impl Simulation {
    pub fn new(params: SolverParams) -> Result<Self> {
        params.validate()?;
        let state = params.init.build(params.grid()?)?;
        Self::with_state(params, state)
    }

    /// Starts from an explicit state; its time is taken as the run origin.
    pub fn with_state(params: SolverParams, mut state: MhdState) -> Result<Self> {
        let stepper = Stepper::new(&params)?;
        if state.grid() != params.grid()? {
            return Err(Error::GridMismatch {
                left: params.n,
                right: state.grid().n(),
            });
        }
        if !state.is_finite() {
            return Err(Error::Diverged { t: state.t });
        }
        state.t = 0.0;
        let total_steps = params.total_steps();
        Ok(Self {
            initial_energy: state.total_energy(),
            params,
            stepper,
            state,
            steps_taken: 0,
            total_steps,
            integrals: LedgerIntegrals::default(),
        })
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn state(&self) -> &MhdState {
        &self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn is_finished(&self) -> bool {
        self.steps_taken >= self.total_steps
    }

    pub fn integrals(&self) -> LedgerIntegrals {
        self.integrals
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn record(&self) -> EnergyRecord {
        let kinetic = self.state.kinetic_energy();
        let magnetic = self.state.magnetic_energy();
        let e = kinetic + magnetic;
        let dissipated = self.params.min_diffusivity() * self.integrals.gradient;
        EnergyRecord {
            t: self.state.t,
            kinetic,
            magnetic,
            dissipated,
            injected: self.integrals.injected,
            viscous_work: self.integrals.viscous,
            residual: e + 2.0 * dissipated - 2.0 * self.integrals.injected - self.initial_energy,
            balance: e + 2.0 * self.integrals.viscous
                - 2.0 * self.integrals.injected
                - self.initial_energy,
        }
    }

    /// Takes one step. Returns `false` once `t_end` has been reached.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let next_index = self.steps_taken + 1;
        let target = if next_index == self.total_steps {
            self.params.t_end
        } else {
            next_index as f64 * self.params.dt
        };
        let h = target - self.state.t;
        let (mut next, inc) = self.stepper.step(&self.state, h)?;
        next.t = target;
        self.state = next;
        self.integrals.gradient += inc.gradient;
        self.integrals.viscous += inc.viscous;
        self.integrals.injected += inc.injected;
        self.steps_taken = next_index;
        Ok(true)
    }

    fn at_snapshot(&self) -> bool {
        self.steps_taken % self.params.cadence == 0 || self.is_finished()
    }

    /// Runs to `t_end`, calling `observer` at the initial state, every
    /// `cadence` steps, and at the final state.
    pub fn run_with<F>(&mut self, mut observer: F) -> Result<()>
    where
        F: FnMut(&MhdState, &EnergyRecord) -> Result<()>,
    {
        if self.steps_taken == 0 {
            observer(&self.state, &self.record())?;
        }
        while self.advance()? {
            if self.at_snapshot() {
                observer(&self.state, &self.record())?;
            }
        }
        Ok(())
    }
}

/// Snapshots and energy records of a completed run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SolverParams,
    pub snapshots: Vec<MhdState>,
    pub records: Vec<EnergyRecord>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn grid(&self) -> WavenumberGrid {
        self.snapshots[0].grid()
    }

    pub fn final_state(&self) -> &MhdState {
        self.snapshots.last().expect("trajectory is never empty")
    }

    /// Energy records at each snapshot.
    pub fn energy_ledger(&self) -> &[EnergyRecord] {
        &self.records
    }
}

pub fn run(params: &SolverParams) -> Result<Trajectory> {
    let mut sim = Simulation::new(params.clone())?;
    run_simulation(&mut sim)
}

pub fn run_from(params: &SolverParams, state: MhdState) -> Result<Trajectory> {
    let mut sim = Simulation::with_state(params.clone(), state)?;
    run_simulation(&mut sim)
}

fn run_simulation(sim: &mut Simulation) -> Result<Trajectory> {
    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    sim.run_with(|s, r| {
        snapshots.push(s.clone());
        records.push(*r);
        Ok(())
    })?;
    Ok(Trajectory {
        params: sim.params().clone(),
        snapshots,
        records,
    })
}

/// Energy ledger of a trajectory.
pub fn energy_ledger(trajectory: &Trajectory) -> Vec<EnergyRecord> {
    trajectory.records.clone()
}
