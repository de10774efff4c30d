//! Weak-form residual of a computed solution against a separable test
//! function, and the time-scaling of the test-function envelopes.

use memwave::criticality::blow_up_scaling_exponents;
use memwave::diagnostics::{weak_envelope, weak_residual, TestFunctionParams};
use memwave::spectral::SpatialGrid;
use memwave::stepper::{run, ScenarioConfig};

fn main() -> memwave::Result<()> {
    let (gamma, p) = (0.9, 4.5);
    for (points, dt) in [(256, 0.1), (512, 0.05), (1024, 0.025)] {
        let grid = SpatialGrid::new(1, 32.0, points)?;
        let mut config = ScenarioConfig::new(grid, gamma, p, 4.0, 4.5)?;
        config.dt = dt;
        config.amplitude = 0.5;
        let history = run(&config)?;
        let params = TestFunctionParams::new(p, gamma, 6.0, 4.0)?;
        let w = weak_residual(&history, &params, p, gamma)?;
        println!(
            "N = {points:<5} dt = {dt:<6} lhs = {:+.6e} rhs = {:+.6e} residual = {:.3e} ({:.2e} relative)",
            w.lhs,
            w.rhs,
            w.residual,
            w.relative()
        );
    }

    let (n, p) = (1, 2.0);
    let (e1, e2) = blow_up_scaling_exponents(n as u32, gamma, p);
    let a = weak_envelope(n, gamma, p, 4.0, 8, 12.0)?;
    let b = weak_envelope(n, gamma, p, 64.0, 8, 12.0)?;
    let slope = |x: f64, y: f64| (y / x).ln() / 16f64.ln();
    println!("envelope slopes for n = 1, p = 2: predicted e1 = {e1:.4}, e2 = {e2:.4}");
    println!(
        "  measured: second time derivative {:.4}, first time derivative {:.4}, laplacian {:.4}",
        slope(a.second_time, b.second_time),
        slope(a.first_time, b.first_time),
        slope(a.laplacian, b.laplacian)
    );
    Ok(())
}
