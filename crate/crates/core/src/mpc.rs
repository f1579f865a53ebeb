//! Receding-horizon control over a pluggable prediction model.
//!
//! Decision variables are the `K_c` future inputs (single shooting). Inputs
//! beyond the control horizon repeat the last one. Each horizon slot lasts
//! one control period and is integrated with `substeps` RK4 steps.

use std::time::Instant;

use nalgebra::{Vector2, Vector4};
use thiserror::Error;

use crate::fuzzy::{AdaptationLaw, FuzzyError, FuzzyModel};
use crate::linalg::{quadratic_form, Mat4, Vec4};
use crate::optimizer::{minimize, NlpProblem, SolverSettings, SolverStatus};
use crate::plant::{self, rk4_step, CoeffSet, Disturbance, PlantError, PlantState};
use crate::reference::{output_state, reference_trajectory, ReferenceSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpcError {
    #[error("invalid MPC configuration: {0}")]
    InvalidConfig(String),
    #[error("prediction divergence at horizon slot {slot}")]
    PredictionDivergence { slot: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcConfig {
    /// Prediction horizon `K_p` (slots).
    pub kp: usize,
    /// Control horizon `K_c` (free inputs).
    pub kc: usize,
    /// State weight.
    pub q: Mat4,
    /// Input weight.
    pub r: f64,
    pub u_max: f64,
    /// Control period (s); also the length of one horizon slot.
    pub period: f64,
    /// RK4 steps per horizon slot.
    pub substeps: usize,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            kp: 5,
            kc: 3,
            q: Mat4::identity() * 0.1,
            r: 0.3,
            u_max: 10.0,
            period: 0.05,
            substeps: 5,
        }
    }
}

impl MpcConfig {
    /// Every violated invariant, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.kc < 1 {
            out.push("K_c ≥ 1 violated".to_string());
        }
        if self.kc > self.kp {
            out.push("K_c ≤ K_p violated".to_string());
        }
        let symmetric = (self.q - self.q.transpose()).amax() <= 1e-12 * self.q.amax().max(1.0);
        if !symmetric || self.q.cholesky().is_none() {
            out.push("Q must be symmetric positive definite".to_string());
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            out.push(format!("R must be positive, got {}", self.r));
        }
        if !(self.u_max.is_finite() && self.u_max >= 0.0) {
            out.push(format!("u_max must be non-negative, got {}", self.u_max));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            out.push(format!("control period must be positive, got {}", self.period));
        }
        if self.substeps < 1 {
            out.push("substeps ≥ 1 violated".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<(), MpcError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(MpcError::InvalidConfig(v.join("; ")))
        }
    }
}

/// One-step predictor used inside the horizon. Every model shares the
/// structure
///
/// ```text
/// θ̈ = a1·θ̇ + b1·u,   α̈ = f(x) + g(x)·(u + d)
/// ```
///
/// and differs only in how `f` and `g` are obtained.
pub trait PredictionModel {
    /// `(f(x), g(x))` of the pendulum acceleration.
    fn pendulum_terms(&self, x: &Vec4) -> (f64, f64);

    /// `(a1, b1)` of the arm acceleration.
    fn arm_coefficients(&self) -> (f64, f64);

    /// Continuous-time state derivative with input `u` and matched disturbance `d`.
    fn derivative(&self, x: &Vec4, u: f64, d: f64) -> Vec4 {
        let (f, g) = self.pendulum_terms(x);
        let (a1, b1) = self.arm_coefficients();
        Vector4::new(x[1], a1 * x[1] + b1 * u, x[3], f + g * (u + d))
    }

    /// Advances `x` by `h` using `substeps` RK4 steps with `u` and `d` held.
    fn advance(&self, x: &Vec4, u: f64, d: f64, h: f64, substeps: usize) -> Vec4 {
        let dh = h / substeps as f64;
        let mut x = *x;
        for _ in 0..substeps {
            x = rk4_step(|_, s| self.derivative(s, u, d), 0.0, &x, dh);
        }
        x
    }
}

/// The analytic model with (possibly detuned) coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalModel {
    pub coeffs: CoeffSet,
}

impl PredictionModel for NominalModel {
    fn pendulum_terms(&self, x: &Vec4) -> (f64, f64) {
        (self.coeffs.drift(x), self.coeffs.input_gain())
    }

    fn arm_coefficients(&self) -> (f64, f64) {
        (self.coeffs.a1, self.coeffs.b1)
    }
}

/// Pendulum acceleration replaced by `f̂(X) + ĝ(X)·(u + d)`; the kinematic
/// rows and the arm row come from the analytic model.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPrediction {
    pub fuzzy: FuzzyModel,
    pub coeffs: CoeffSet,
}

impl PredictionModel for FuzzyPrediction {
    fn pendulum_terms(&self, x: &Vec4) -> (f64, f64) {
        self.fuzzy.estimate(&PlantState(*x))
    }

    fn arm_coefficients(&self) -> (f64, f64) {
        (self.coeffs.a1, self.coeffs.b1)
    }
}

/// Input applied in horizon slot `p` (0-based): constant tail past `K_c`.
fn slot_input(inputs: &[f64], p: usize) -> f64 {
    inputs[p.min(inputs.len() - 1)]
}

/// Predicted states `x̂(1) … x̂(K_p)` from `x0`.
pub fn predict_trajectory(
    model: &dyn PredictionModel,
    x0: &PlantState,
    inputs: &[f64],
    disturbance: &[f64],
    config: &MpcConfig,
) -> Result<Vec<PlantState>, MpcError> {
    if inputs.len() != config.kc || disturbance.len() != config.kp {
        return Err(MpcError::Dimension(format!(
            "expected {} inputs and {} disturbance values, got {} and {}",
            config.kc,
            config.kp,
            inputs.len(),
            disturbance.len()
        )));
    }
    let mut out = Vec::with_capacity(config.kp);
    let mut x = x0.0;
    for (p, d) in disturbance.iter().enumerate() {
        x = model.advance(&x, slot_input(inputs, p), *d, config.period, config.substeps);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(MpcError::PredictionDivergence { slot: p + 1 });
        }
        out.push(PlantState(x));
    }
    Ok(out)
}

/// `Σ ‖x̂(p) − x_ref(p)‖²_Q + R·Σ û(p)²`.
pub fn horizon_cost(states: &[PlantState], inputs: &[f64], refs: &[Vec4], config: &MpcConfig) -> f64 {
    tracking_cost(states, inputs, refs, &[], config)
}

/// Like [`horizon_cost`] with the input term measured from `input_refs`
/// (missing entries count as zero).
pub fn tracking_cost(
    states: &[PlantState],
    inputs: &[f64],
    refs: &[Vec4],
    input_refs: &[f64],
    config: &MpcConfig,
) -> f64 {
    let tracking: f64 = states
        .iter()
        .zip(refs)
        .map(|(x, r)| quadratic_form(&(x.0 - r), &config.q))
        .sum();
    let effort: f64 = inputs
        .iter()
        .enumerate()
        .map(|(p, u)| {
            let du = u - input_refs.get(p).copied().unwrap_or(0.0);
            config.r * du * du
        })
        .sum();
    tracking + effort
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Converged,
    MaxIterations,
    Infeasible,
    /// The solver failed; the warm start was applied instead.
    Fallback,
}

impl StepStatus {
    pub fn name(&self) -> &'static str {
        match self {
            StepStatus::Converged => "converged",
            StepStatus::MaxIterations => "max_iter",
            StepStatus::Infeasible => "infeasible",
            StepStatus::Fallback => "fallback",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(StepStatus::Converged),
            "max_iter" => Some(StepStatus::MaxIterations),
            "infeasible" => Some(StepStatus::Infeasible),
            "fallback" => Some(StepStatus::Fallback),
            _ => None,
        }
    }
}

impl From<SolverStatus> for StepStatus {
    fn from(s: SolverStatus) -> Self {
        match s {
            SolverStatus::Converged => StepStatus::Converged,
            SolverStatus::MaxIterations => StepStatus::MaxIterations,
            SolverStatus::Infeasible => StepStatus::Infeasible,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlStep {
    pub applied_input: f64,
    pub predicted_cost: f64,
    /// Cost of the warm start, for checking that the solve never worsens it.
    pub warm_start_cost: f64,
    pub status: StepStatus,
    /// Wall-clock solve time (s).
    pub solve_time: f64,
    pub optimized_sequence: Vec<f64>,
}

/// Solves one horizon problem. `refs` holds `x_ref` for slots `1..=K_p`,
/// `input_refs` the input references for the free inputs (empty means
/// zero) and `disturbance` the forecast for slots `0..K_p`.
#[allow(clippy::too_many_arguments)]
pub fn solve_step(
    model: &dyn PredictionModel,
    x_k: &PlantState,
    refs: &[Vec4],
    input_refs: &[f64],
    disturbance: &[f64],
    config: &MpcConfig,
    settings: &SolverSettings,
    warm_start: &[f64],
) -> Result<ControlStep, MpcError> {
    if refs.len() != config.kp || warm_start.len() != config.kc {
        return Err(MpcError::Dimension(format!(
            "expected {} references and a warm start of {}, got {} and {}",
            config.kp,
            config.kc,
            refs.len(),
            warm_start.len()
        )));
    }
    let started = Instant::now();
    let cost = |u: &[f64]| match predict_trajectory(model, x_k, u, disturbance, config) {
        Ok(states) => tracking_cost(&states, u, refs, input_refs, config),
        Err(_) => f64::INFINITY,
    };
    let warm: Vec<f64> = warm_start
        .iter()
        .map(|u| u.clamp(-config.u_max, config.u_max))
        .collect();
    let warm_cost = cost(&warm);

    let problem = NlpProblem::new(config.kc, cost)
        .with_bounds(vec![-config.u_max; config.kc], vec![config.u_max; config.kc])
        .map_err(|e| MpcError::InvalidConfig(e.to_string()))?;
    let (sequence, predicted_cost, status) = match minimize(&problem, &warm, settings) {
        Ok(sol) if sol.objective_value.is_finite() && sol.objective_value <= warm_cost => {
            (sol.minimizer, sol.objective_value, sol.status.into())
        }
        _ => (warm.clone(), warm_cost, StepStatus::Fallback),
    };
    Ok(ControlStep {
        applied_input: sequence[0],
        predicted_cost,
        warm_start_cost: warm_cost,
        status,
        solve_time: started.elapsed().as_secs_f64(),
        optimized_sequence: sequence,
    })
}

/// How the horizon targets `x_ref`, `u_ref` are built from the output
/// reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceMode {
    /// `x_ref = (0, 0, y_ref, ẏ_ref)` and `u_ref = 0`.
    Output,
    /// Invert the controller's own prediction model along the output
    /// reference (see [`inversion_targets`]).
    #[default]
    Inversion,
}

impl ReferenceMode {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceMode::Output => "output",
            ReferenceMode::Inversion => "inversion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "output" => Some(ReferenceMode::Output),
            "inversion" => Some(ReferenceMode::Inversion),
            _ => None,
        }
    }
}

/// Horizon targets `(x_ref for slots 1..=K_p, u_ref for slots 0..K_c)`.
///
/// The pendulum pair is pinned to `(y_ref, ẏ_ref)` and the input is chosen
/// so that the model's pendulum acceleration equals `ÿ_ref`:
/// `u = (ÿ_ref − f(x))/g(x) − d`, clamped to the input bound. The arm is
/// integrated under that input from its measured state. With a perfect
/// model these targets are exactly reachable.
pub fn inversion_targets(
    model: &dyn PredictionModel,
    x_k: &PlantState,
    t: f64,
    reference: &ReferenceSpec,
    disturbance: &[f64],
    config: &MpcConfig,
) -> (Vec<Vec4>, Vec<f64>) {
    let (a1, b1) = model.arm_coefficients();
    let n = config.substeps;
    let h = config.period / n as f64;
    let input = |tau: f64, arm: &Vector2<f64>, d: f64| -> f64 {
        let [y, dy, ddy, _] = reference_trajectory(reference, tau);
        let (f, g) = model.pendulum_terms(&Vec4::new(arm[0], arm[1], y, dy));
        ((ddy - f) / g - d).clamp(-config.u_max, config.u_max)
    };
    let mut arm = Vector2::new(x_k.theta(), x_k.theta_dot());
    let mut states = Vec::with_capacity(config.kp);
    let mut inputs = Vec::with_capacity(config.kc);
    for (p, &d) in disturbance.iter().enumerate().take(config.kp) {
        let start = t + config.period * p as f64;
        let mut mean_u = 0.0;
        for j in 0..n {
            let tau = start + h * j as f64;
            mean_u += input(tau, &arm, d) / n as f64;
            let rhs = |tau: f64, s: &Vector2<f64>| Vector2::new(s[1], a1 * s[1] + b1 * input(tau, s, d));
            let k1 = rhs(tau, &arm);
            let k2 = rhs(tau + 0.5 * h, &(arm + k1 * (0.5 * h)));
            let k3 = rhs(tau + 0.5 * h, &(arm + k2 * (0.5 * h)));
            let k4 = rhs(tau + h, &(arm + k3 * h));
            arm += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        if p < config.kc {
            inputs.push(mean_u);
        }
        let [y, dy, _, _] = reference_trajectory(reference, start + config.period);
        states.push(Vec4::new(arm[0], arm[1], y, dy));
    }
    (states, inputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControllerKind {
    #[default]
    Classical,
    Adaptive,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Classical => "classical",
            ControllerKind::Adaptive => "afmpc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "classical" => Some(ControllerKind::Classical),
            "afmpc" => Some(ControllerKind::Adaptive),
            _ => None,
        }
    }
}

/// Which components of `x_ref − x` drive adaptation and the Lyapunov
/// diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorChannels {
    /// Only the pendulum pair `(α, α̇)`; the arm entries are zeroed.
    #[default]
    Pendulum,
    /// All four state errors.
    Full,
}

impl ErrorChannels {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorChannels::Pendulum => "pendulum",
            ErrorChannels::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pendulum" => Some(ErrorChannels::Pendulum),
            "full" => Some(ErrorChannels::Full),
            _ => None,
        }
    }

    pub fn apply(&self, e: Vec4) -> Vec4 {
        match self {
            ErrorChannels::Pendulum => Vec4::new(0.0, 0.0, e[2], e[3]),
            ErrorChannels::Full => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adaptation {
    pub fuzzy: FuzzyModel,
    pub law: AdaptationLaw,
    pub channels: ErrorChannels,
}

/// A receding-horizon controller: classical when `adaptation` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub config: MpcConfig,
    pub settings: SolverSettings,
    /// The controller's analytic model (may differ from the plant).
    pub model: CoeffSet,
    pub adaptation: Option<Adaptation>,
    pub reference_mode: ReferenceMode,
    warm: Vec<f64>,
}

impl Controller {
    pub fn classical(config: MpcConfig, settings: SolverSettings, model: CoeffSet) -> Result<Self, MpcError> {
        config.validate()?;
        Ok(Self {
            config,
            settings,
            model,
            adaptation: None,
            reference_mode: ReferenceMode::default(),
            warm: vec![0.0; config.kc],
        })
    }

    pub fn adaptive(
        config: MpcConfig,
        settings: SolverSettings,
        model: CoeffSet,
        adaptation: Adaptation,
    ) -> Result<Self, MpcError> {
        let mut c = Self::classical(config, settings, model)?;
        c.adaptation = Some(adaptation);
        Ok(c)
    }

    pub fn kind(&self) -> ControllerKind {
        if self.adaptation.is_some() {
            ControllerKind::Adaptive
        } else {
            ControllerKind::Classical
        }
    }

    /// Model-predicted `(f, g)` of the pendulum acceleration at `x`.
    pub fn predicted_fg(&self, x: &PlantState) -> (f64, f64) {
        match &self.adaptation {
            Some(a) => a.fuzzy.estimate(x),
            None => (self.model.drift(&x.0), self.model.input_gain()),
        }
    }

    /// Solves the horizon problem at time `t` and shifts the warm start.
    pub fn control(
        &mut self,
        x: &PlantState,
        t: f64,
        reference: &ReferenceSpec,
        disturbance: &Disturbance,
    ) -> Result<ControlStep, MpcError> {
        let cfg = &self.config;
        let d: Vec<f64> = (0..cfg.kp)
            .map(|p| disturbance.forecast(t + cfg.period * p as f64))
            .collect();
        let nominal;
        let fuzzy;
        let model: &dyn PredictionModel = match &self.adaptation {
            // parameters are frozen for the whole solve
            Some(a) => {
                fuzzy = FuzzyPrediction {
                    fuzzy: a.fuzzy.clone(),
                    coeffs: self.model,
                };
                &fuzzy
            }
            None => {
                nominal = NominalModel { coeffs: self.model };
                &nominal
            }
        };
        let (refs, u_ref) = match self.reference_mode {
            ReferenceMode::Output => (
                (1..=cfg.kp)
                    .map(|p| output_state(reference, t + cfg.period * p as f64))
                    .collect(),
                Vec::new(),
            ),
            ReferenceMode::Inversion => inversion_targets(model, x, t, reference, &d, cfg),
        };
        let step = solve_step(model, x, &refs, &u_ref, &d, cfg, &self.settings, &self.warm)?;
        let seq = &step.optimized_sequence;
        self.warm = seq[1..]
            .iter()
            .copied()
            .chain(std::iter::once(seq[seq.len() - 1]))
            .collect();
        Ok(step)
    }

    /// One adaptation step from the measured state; a no-op for the
    /// classical controller.
    pub fn adapt(&mut self, x: &PlantState, x_ref: &Vec4, u: f64, dt: f64) -> Result<(), MpcError> {
        if let Some(a) = &mut self.adaptation {
            let e = a.channels.apply(x_ref - x.0);
            a.fuzzy = a.law.adapt(&a.fuzzy, &e, x, u, dt)?;
        }
        Ok(())
    }
}

/// Ingredients of the Lyapunov diagnostic
/// `V = ½eᵀPe + eᵀPb·w + (‖θ_f − θ_f*‖² + ‖θ_g − θ_g*‖²)/(2γ)`.
///
/// `θ*` are the best-fit parameters for the true plant. The parameter term
/// is dropped for the classical controller.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovDiagnostic {
    pub p: Mat4,
    pub b: Vec4,
    pub channels: ErrorChannels,
    pub theta_star: Option<(Vec<f64>, Vec<f64>)>,
    pub gain: f64,
}

impl LyapunovDiagnostic {
    fn parameter_term(&self, controller: &Controller) -> f64 {
        match (&self.theta_star, &controller.adaptation) {
            (Some((tf, tg)), Some(a)) => {
                let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
                (sq(&a.fuzzy.theta_f, tf) + sq(&a.fuzzy.theta_g, tg)) / (2.0 * self.gain)
            }
            _ => 0.0,
        }
    }
}

/// Everything the controller does not own: the true plant, the external
/// signals and the simulation step.
#[derive(Debug, Clone)]
pub struct Environment {
    pub plant: CoeffSet,
    pub disturbance: Disturbance,
    pub reference: ReferenceSpec,
    /// Plant integration step (s).
    pub dt: f64,
    pub diagnostic: Option<LyapunovDiagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x: Vec4,
    pub u: f64,
    pub y_ref: f64,
    /// `y_ref − y`.
    pub e: f64,
    pub v: f64,
    pub w_diag: f64,
    /// `|eᵀPb · w_diag|`, the slack allowed to `V̇`.
    pub v_bound: f64,
    pub cost: f64,
    pub status: StepStatus,
    pub solve_time: f64,
    pub sequence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<StepRecord>,
    /// Control period (s).
    pub period: f64,
}

/// Closed-loop failure; the log up to the failure is kept.
#[derive(Debug, Error)]
#[error("{error} (after {} logged steps)", log.records.len())]
pub struct RunFailure {
    pub error: MpcError,
    pub log: TrajectoryLog,
}

/// Runs `steps` control periods from `x0`.
pub fn run_receding_horizon(
    x0: PlantState,
    controller: &mut Controller,
    env: &Environment,
    steps: usize,
) -> Result<TrajectoryLog, Box<RunFailure>> {
    let period = controller.config.period;
    let mut log = TrajectoryLog {
        records: Vec::with_capacity(steps),
        period,
    };
    let fail = |error: MpcError, log: TrajectoryLog| Box::new(RunFailure { error, log });
    if steps == 0 {
        return Err(fail(MpcError::InvalidConfig("steps ≥ 1 violated".into()), log));
    }
    if !(env.dt > 0.0) {
        return Err(fail(PlantError::NonPositiveStep(env.dt).into(), log));
    }
    let inner = ((period / env.dt).round() as usize).max(1);
    let h = period / inner as f64;

    let mut x = x0;
    for k in 0..steps {
        let t = period * k as f64;
        let step = match controller.control(&x, t, &env.reference, &env.disturbance) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, log)),
        };
        let u = step.applied_input;

        let x_ref = output_state(&env.reference, t);
        let y_ref = x_ref[2];
        let (f, g) = controller.predicted_fg(&x);
        let w_diag = (env.plant.drift(&x.0) - f) + (env.plant.input_gain() - g) * u;
        let (v, v_bound) = match &env.diagnostic {
            Some(diag) => {
                let e = diag.channels.apply(x_ref - x.0);
                let s = e.dot(&(diag.p * diag.b));
                let v = 0.5 * quadratic_form(&e, &diag.p) + s * w_diag + diag.parameter_term(controller);
                (v, (s * w_diag).abs())
            }
            None => (f64::NAN, f64::NAN),
        };
        log.records.push(StepRecord {
            t,
            x: x.0,
            u,
            y_ref,
            e: y_ref - x.alpha(),
            v,
            w_diag,
            v_bound,
            cost: step.predicted_cost,
            status: step.status,
            solve_time: step.solve_time,
            sequence: step.optimized_sequence,
        });

        for j in 0..inner {
            let tj = t + h * j as f64;
            if let Err(e) = controller.adapt(&x, &output_state(&env.reference, tj), u, h) {
                return Err(fail(e, log));
            }
            x = match plant::step(&x, u, h, &env.plant, &env.disturbance, tj) {
                Ok(next) => next,
                Err(e) => return Err(fail(e.into(), log)),
            };
        }
    }
    Ok(log)
}
