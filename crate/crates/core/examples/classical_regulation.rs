//! Classical MPC balancing the pendulum from 0.3 rad with an exact model.

use afmpc::harness::{run_scenario, ScenarioConfig};
use afmpc::linalg::Vec4;
use afmpc::mpc::ControllerKind;
use afmpc::plant::CoeffSet;
use afmpc::reference::ReferenceSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig {
        controller: ControllerKind::Classical,
        reference: ReferenceSpec::Zero,
        mismatch: CoeffSet::unit(),
        initial: Vec4::new(0.0, 0.0, 0.3, 0.0),
        duration: 3.0,
        ..ScenarioConfig::default()
    };
    let (log, metrics) = run_scenario(&cfg)?;
    for r in log.records.iter().step_by(4) {
        println!(
            "t = {:5.2}  alpha = {:+.5}  u = {:+.4}  {}",
            r.t,
            r.x[2],
            r.u,
            r.status.name()
        );
    }
    println!("{metrics:#?}");
    Ok(())
}
