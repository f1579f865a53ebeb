//! Both controllers on the default scenario, with their logs written to
//! a temporary directory.

use afmpc::harness::{compare_report, export_csv, run_scenario, ScenarioConfig};
use afmpc::mpc::ControllerKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ScenarioConfig::default();
    let dir = std::env::temp_dir().join("afmpc-compare");
    std::fs::create_dir_all(&dir)?;
    let mut metrics = Vec::new();
    for kind in [ControllerKind::Classical, ControllerKind::Adaptive] {
        let cfg = ScenarioConfig {
            controller: kind,
            ..base.clone()
        };
        let (log, m) = run_scenario(&cfg)?;
        let path = dir.join(format!("{}.csv", kind.name()));
        export_csv(&log, &path, false)?;
        println!("wrote {}", path.display());
        metrics.push(m);
    }
    print!("{}", compare_report(&metrics[0], &metrics[1]));
    Ok(())
}
