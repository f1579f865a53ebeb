use std::fmt::Write as _;

use super::RunMetrics;

/// `afmpc / classical` steady-state error ratio; 1 when both are zero.
fn ratio(afmpc: f64, classical: f64) -> f64 {
    if afmpc == classical {
        1.0
    } else {
        afmpc / classical
    }
}

/// Side-by-side metrics of both controllers plus the steady-state ratio.
pub fn compare_report(classical: &RunMetrics, afmpc: &RunMetrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<28}{:>14}{:>14}", "metric", "classical", "afmpc");
    let rows = [
        ("rmse [rad]", classical.rmse, afmpc.rmse),
        ("iae [rad s]", classical.iae, afmpc.iae),
        (
            "steady_state_error [rad]",
            classical.steady_state_error,
            afmpc.steady_state_error,
        ),
        ("max_abs_error [rad]", classical.max_abs_error, afmpc.max_abs_error),
        (
            "mean_solve_time [ms]",
            classical.mean_solve_time * 1e3,
            afmpc.mean_solve_time * 1e3,
        ),
        (
            "max_solve_time [ms]",
            classical.max_solve_time * 1e3,
            afmpc.max_solve_time * 1e3,
        ),
    ];
    for (name, c, a) in rows {
        let _ = writeln!(out, "{name:<28}{c:>14.6}{a:>14.6}");
    }
    let _ = writeln!(
        out,
        "steady_state_ratio (afmpc/classical) = {:.4}",
        ratio(afmpc.steady_state_error, classical.steady_state_error)
    );
    out
}
