//! The SQP solver on Rosenbrock's function, unconstrained and restricted to
//! the unit disc.

use afmpc::optimizer::{minimize, NlpProblem, SolverSettings};

fn rosenbrock(z: &[f64]) -> f64 {
    (1.0 - z[0]).powi(2) + 100.0 * (z[1] - z[0] * z[0]).powi(2)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let settings = SolverSettings {
        max_iterations: 200,
        ..SolverSettings::default()
    };

    let free = NlpProblem::new(2, rosenbrock);
    let sol = minimize(&free, &[-1.2, 1.0], &settings)?;
    println!(
        "free:  z = {:?}, J = {:.3e}, {} iterations, {}",
        sol.minimizer,
        sol.objective_value,
        sol.iterations,
        sol.status.name()
    );

    let disc = NlpProblem::new(2, rosenbrock).with_constraints(1, |z| vec![z[0] * z[0] + z[1] * z[1] - 1.0]);
    let sol = minimize(&disc, &[0.0, 0.0], &settings)?;
    println!(
        "disc:  z = {:?}, λ = {:?}, KKT residual {:.2e}, {}",
        sol.minimizer,
        sol.multipliers,
        sol.kkt_residual,
        sol.status.name()
    );
    Ok(())
}
