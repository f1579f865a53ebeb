//! Least-squares fit of a 5⁴-rule fuzzy system to the pendulum drift
//! `f(x)` and the error on points between the rule centres.

use std::f64::consts::PI;

use afmpc::fuzzy::build_rule_grid;
use afmpc::plant::{derive_coefficients, PlantParams, PlantState};

fn grid(ranges: [(f64, f64); 4], n: usize, inset: f64) -> Vec<PlantState> {
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let (lo, hi) = (lo + inset * (hi - lo), hi - inset * (hi - lo));
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    };
    let axes: Vec<Vec<f64>> = ranges.iter().map(|&r| axis(r)).collect();
    let mut out = Vec::new();
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

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = derive_coefficients(&PlantParams::default())?;
    let ranges = [(-PI, PI), (-10.0, 10.0), (-PI, PI), (-10.0, 10.0)];
    let model =
        build_rule_grid([5, 5, 5, 5], ranges)?.fit(&grid(ranges, 10, 0.0), |x| c.drift(&x.0), |_| c.input_gain())?;

    let test = grid(ranges, 7, 0.03);
    let (mut err, mut norm) = (0.0, 0.0);
    for x in &test {
        let f = c.drift(&x.0);
        err += (model.f_hat(x) - f).powi(2);
        norm += f * f;
    }
    println!(
        "{} rules, relative RMS error of f̂ on {} points: {:.3}%",
        model.grid_size(),
        test.len(),
        100.0 * (err / norm).sqrt()
    );

    let x = PlantState::new(0.5, 2.0, 0.3, -1.0);
    println!(
        "at {:?}: f = {:.3}, f̂ = {:.3}, g = {:.3}, ĝ = {:.3}",
        x.0.as_slice(),
        c.drift(&x.0),
        model.f_hat(&x),
        c.input_gain(),
        model.g_hat(&x)
    );
    Ok(())
}
