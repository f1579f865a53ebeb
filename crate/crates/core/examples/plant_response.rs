//! Open-loop response of the pendulum to a short input pulse, starting
//! slightly off the upright position.

use afmpc::plant::{derive_coefficients, step, Disturbance, PlantParams, PlantState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coeffs = derive_coefficients(&PlantParams::default())?;
    println!("{coeffs:#?}");

    let dt = 1e-3;
    let none = Disturbance::none();
    let mut x = PlantState::new(0.0, 0.0, 0.01, 0.0);
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "t", "theta", "theta_dot", "alpha", "alpha_dot"
    );
    for k in 0..=500 {
        let t = k as f64 * dt;
        if k % 50 == 0 {
            println!(
                "{t:>6.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                x.theta(),
                x.theta_dot(),
                x.alpha(),
                x.alpha_dot()
            );
        }
        let u = if t < 0.05 { 1.0 } else { 0.0 };
        x = step(&x, u, dt, &coeffs, &none, t)?;
    }
    Ok(())
}
