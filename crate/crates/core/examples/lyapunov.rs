//! Solves `AᵀP + PA = −Q` for the adaptation law's error dynamics and shows
//! what goes wrong with a matrix that is not Hurwitz.

use afmpc::harness::default_lyapunov_a;
use afmpc::linalg::{is_positive_definite, lyapunov_residual, solve_lyapunov, Mat4, Vec4};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = default_lyapunov_a();
    let q = Mat4::identity() * 500.0;
    let p = solve_lyapunov(&a, &q)?;
    println!("A = {a}");
    println!("P = {p}");
    println!("residual = {:.3e}", lyapunov_residual(&a, &p, &q));
    println!("P·b = {}", p * Vec4::new(0.0, 0.0, 0.0, 1.0));

    // trace 7: at least one eigenvalue has a positive real part
    let unstable = Mat4::new(
        0.0, 10.0, 0.0, 0.0, //
        0.0, 0.0, 10.0, 0.0, //
        0.0, 0.0, 0.0, 10.0, //
        -17.2, -20.5, -10.0, 7.0,
    );
    match solve_lyapunov(&unstable, &q) {
        Ok(p) => println!("unstable A: P positive definite = {}", is_positive_definite(&p)?),
        Err(e) => println!("unstable A: {e}"),
    }
    Ok(())
}
