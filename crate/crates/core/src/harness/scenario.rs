use crate::fuzzy::{build_rule_grid, AdaptationLaw, FuzzyModel};
use crate::linalg::{solve_lyapunov, Mat4, Vec4};
use crate::mpc::{
    run_receding_horizon, Adaptation, Controller, ControllerKind, Environment, LyapunovDiagnostic, TrajectoryLog,
};
use crate::plant::{derive_coefficients, CoeffSet, Disturbance, PlantState};

use super::{HarnessError, ScenarioConfig};

/// Summary of one closed-loop run. Errors are `e = y_ref − y` in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub rmse: f64,
    /// `Σ|e|·Δt` over the logged steps.
    pub iae: f64,
    /// Mean `|e|` over the final 20% of the steps.
    pub steady_state_error: f64,
    pub max_abs_error: f64,
    /// Seconds.
    pub mean_solve_time: f64,
    pub max_solve_time: f64,
}

pub fn compute_metrics(log: &TrajectoryLog, dt: f64) -> Result<RunMetrics, HarnessError> {
    let r = &log.records;
    if r.is_empty() {
        return Err(HarnessError::EmptyLog);
    }
    let n = r.len() as f64;
    let tail = &r[r.len() * 4 / 5..];
    let tail = if tail.is_empty() { &r[r.len() - 1..] } else { tail };
    Ok(RunMetrics {
        rmse: (r.iter().map(|s| s.e * s.e).sum::<f64>() / n).sqrt(),
        iae: r.iter().map(|s| s.e.abs()).sum::<f64>() * dt,
        steady_state_error: tail.iter().map(|s| s.e.abs()).sum::<f64>() / tail.len() as f64,
        max_abs_error: r.iter().map(|s| s.e.abs()).fold(0.0, f64::max),
        mean_solve_time: r.iter().map(|s| s.solve_time).sum::<f64>() / n,
        max_solve_time: r.iter().map(|s| s.solve_time).fold(0.0, f64::max),
    })
}

fn config_error(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(vec![e.to_string()])
}

/// Regular grid of `fit_points⁴` states spanning `fit_fraction` of the
/// fuzzy ranges.
fn fit_samples(cfg: &ScenarioConfig) -> Vec<PlantState> {
    let n = cfg.fuzzy.fit_points;
    let axes: Vec<Vec<f64>> = cfg
        .fuzzy
        .ranges
        .iter()
        .map(|&(lo, hi)| {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) * cfg.fuzzy.fit_fraction);
            (0..n)
                .map(|k| mid - half + 2.0 * half * k as f64 / (n - 1) as f64)
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n.pow(4));
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                for &d in &axes[3] {
                    out.push(PlantState::new(a, b, c, d));
                }
            }
        }
    }
    out
}

/// Least-squares fit of the fuzzy rule grid to `coeffs`.
pub fn initial_fuzzy_model(cfg: &ScenarioConfig, coeffs: &CoeffSet) -> Result<FuzzyModel, HarnessError> {
    let mut grid = build_rule_grid(cfg.fuzzy.counts, cfg.fuzzy.ranges).map_err(config_error)?;
    grid.g_floor = cfg.fuzzy.g_floor;
    grid.fit(&fit_samples(cfg), |x| coeffs.drift(&x.0), |_| coeffs.input_gain())
        .map_err(config_error)
}

fn lyapunov_p(cfg: &ScenarioConfig) -> Result<Mat4, HarnessError> {
    solve_lyapunov(&cfg.lyapunov_a, &(Mat4::identity() * cfg.lyapunov_q)).map_err(config_error)
}

const INPUT_CHANNEL: Vec4 = Vec4::new(0.0, 0.0, 0.0, 1.0);

/// The controller named by `cfg.controller`, built around the mismatched
/// model.
pub fn build_controller(cfg: &ScenarioConfig) -> Result<Controller, HarnessError> {
    let truth = derive_coefficients(&cfg.plant).map_err(config_error)?;
    let model = truth.scaled(&cfg.mismatch);
    let mut ctl = match cfg.controller {
        ControllerKind::Classical => Controller::classical(cfg.mpc, cfg.solver, model),
        ControllerKind::Adaptive => {
            let mut law = AdaptationLaw::new(lyapunov_p(cfg)?, INPUT_CHANNEL);
            law.gain = cfg.fuzzy.gain;
            law.bound = cfg.fuzzy.bound;
            let adaptation = Adaptation {
                fuzzy: initial_fuzzy_model(cfg, &model)?,
                law,
                channels: cfg.fuzzy.channels,
            };
            Controller::adaptive(cfg.mpc, cfg.solver, model, adaptation)
        }
    }
    .map_err(config_error)?;
    ctl.reference_mode = cfg.reference_mode;
    Ok(ctl)
}

/// True plant, disturbance, reference and the Lyapunov diagnostic. The
/// diagnostic's `θ*` is the rule-grid fit to the true plant.
pub fn build_environment(cfg: &ScenarioConfig) -> Result<Environment, HarnessError> {
    let truth = derive_coefficients(&cfg.plant).map_err(config_error)?;
    let disturbance = Disturbance::new(crate::plant::DisturbanceSpec {
        seed: cfg.seed,
        ..cfg.disturbance
    })
    .map_err(config_error)?;
    let diagnostic = match solve_lyapunov(&cfg.lyapunov_a, &(Mat4::identity() * cfg.lyapunov_q)) {
        Ok(p) => {
            let theta_star = match cfg.controller {
                ControllerKind::Adaptive => {
                    let star = initial_fuzzy_model(cfg, &truth)?;
                    Some((star.theta_f, star.theta_g))
                }
                ControllerKind::Classical => None,
            };
            Some(LyapunovDiagnostic {
                p,
                b: INPUT_CHANNEL,
                channels: cfg.fuzzy.channels,
                theta_star,
                gain: cfg.fuzzy.gain,
            })
        }
        // only the adaptive controller needs P; validation has checked it
        Err(_) => None,
    };
    Ok(Environment {
        plant: truth,
        disturbance,
        reference: cfg.reference,
        dt: cfg.dt,
        diagnostic,
    })
}

/// Runs the configured closed loop for `duration / period` control steps.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(TrajectoryLog, RunMetrics), HarnessError> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(HarnessError::Config(violations));
    }
    let mut ctl = build_controller(cfg)?;
    let env = build_environment(cfg)?;
    let steps = ((cfg.duration / cfg.mpc.period).round() as usize).max(1);
    let x0 = PlantState(cfg.initial);
    match run_receding_horizon(x0, &mut ctl, &env, steps) {
        Ok(log) => {
            let metrics = compute_metrics(&log, cfg.mpc.period)?;
            Ok((log, metrics))
        }
        Err(failure) => {
            let t = failure.log.records.last().map_or(0.0, |r| r.t + cfg.mpc.period);
            Err(HarnessError::Divergence {
                t,
                reason: failure.error.to_string(),
                log: Box::new(failure.log),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::{StepRecord, StepStatus};
    use crate::reference::ReferenceSpec;
    use approx::assert_relative_eq;

    fn log_with_errors(errors: &[f64]) -> TrajectoryLog {
        let records = errors
            .iter()
            .enumerate()
            .map(|(k, &e)| StepRecord {
                t: 0.1 * k as f64,
                x: Vec4::zeros(),
                u: 0.0,
                y_ref: e,
                e,
                v: 0.0,
                w_diag: 0.0,
                v_bound: 0.0,
                cost: 0.0,
                status: StepStatus::Converged,
                solve_time: 1e-3 * k as f64,
                sequence: vec![0.0],
            })
            .collect();
        TrajectoryLog { records, period: 0.1 }
    }

    #[test]
    fn zero_error_metrics() {
        let m = compute_metrics(&log_with_errors(&[0.0; 10]), 0.1).unwrap();
        assert_eq!((m.rmse, m.iae, m.steady_state_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_error_metrics() {
        let m = compute_metrics(&log_with_errors(&[0.1; 10]), 0.1).unwrap();
        assert_relative_eq!(m.iae, 0.1, epsilon = 1e-15);
        assert_relative_eq!(m.rmse, 0.1, epsilon = 1e-15);
        assert_relative_eq!(m.steady_state_error, 0.1, epsilon = 1e-15);
        assert_relative_eq!(m.max_solve_time, 9e-3, epsilon = 1e-15);
    }

    #[test]
    fn steady_state_window_is_the_last_fifth() {
        let mut e = vec![1.0; 8];
        e.extend([0.2, 0.4]);
        let m = compute_metrics(&log_with_errors(&e), 0.1).unwrap();
        assert_relative_eq!(m.steady_state_error, 0.3, epsilon = 1e-15);
        assert!(m.steady_state_error <= m.max_abs_error);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(matches!(
            compute_metrics(&TrajectoryLog::default(), 0.1),
            Err(HarnessError::EmptyLog)
        ));
    }

    #[test]
    fn nothing_to_do_from_equilibrium() {
        let cfg = ScenarioConfig {
            reference: ReferenceSpec::Zero,
            initial: Vec4::zeros(),
            duration: 0.5,
            ..ScenarioConfig::default()
        };
        for kind in [ControllerKind::Classical, ControllerKind::Adaptive] {
            let (_, m) = run_scenario(&ScenarioConfig {
                controller: kind,
                ..cfg.clone()
            })
            .unwrap();
            assert!(m.rmse <= 1e-6, "{kind:?}: {}", m.rmse);
        }
    }

    #[test]
    fn fit_samples_span_the_inner_box() {
        let cfg = ScenarioConfig::default();
        let s = fit_samples(&cfg);
        assert_eq!(s.len(), 9usize.pow(4));
        let (lo, hi) = cfg.fuzzy.ranges[1];
        assert_relative_eq!(s[0].theta_dot(), lo * cfg.fuzzy.fit_fraction, epsilon = 1e-12);
        assert_relative_eq!(s[s.len() - 1].theta_dot(), hi * cfg.fuzzy.fit_fraction, epsilon = 1e-12);
    }
}
