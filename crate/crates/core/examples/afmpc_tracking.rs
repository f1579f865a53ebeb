//! Adaptive fuzzy MPC tracking a sinusoid with a mismatched model, printed
//! alongside the remaining model error `w` of the adapted fuzzy predictor.

use afmpc::harness::{run_scenario, ScenarioConfig};
use afmpc::mpc::ControllerKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig {
        controller: ControllerKind::Adaptive,
        ..ScenarioConfig::default()
    };
    let (log, metrics) = run_scenario(&cfg)?;
    println!("{:>6} {:>9} {:>9} {:>9} {:>10}", "t", "y_ref", "alpha", "u", "|w|");
    for r in log.records.iter().step_by(10) {
        println!(
            "{:>6.2} {:>9.4} {:>9.4} {:>9.3} {:>10.3}",
            r.t,
            r.y_ref,
            r.x[2],
            r.u,
            r.w_diag.abs()
        );
    }
    println!(
        "rmse {:.5} rad, steady-state {:.5} rad",
        metrics.rmse, metrics.steady_state_error
    );
    Ok(())
}
