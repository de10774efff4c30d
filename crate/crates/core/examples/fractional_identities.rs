//! Riemann-Liouville operators on a uniform grid: inversion, integration by
//! parts and the right derivative of the cutoff `w₁(t) = (1 − t/T)^σ`.

use memwave::frac_ops::{
    adjoint_pairing, cutoff_deriv_closed_form, inversion_residual, rl_deriv_right, rl_integral, CutoffProfile,
    FracOrder, TimeGrid, TimeSeries,
};

fn main() -> memwave::Result<()> {
    let half = FracOrder::new(0.5)?;

    println!("inversion residual for g = sin on [0,1]");
    for steps in [128, 256, 512, 1024] {
        let g = TimeSeries::from_fn(TimeGrid::spanning(1.0, steps)?, f64::sin);
        println!("  dt = 1/{steps:<5} sup |D J g - g| = {:.3e}", inversion_residual(&g, half)?);
    }

    // J^{1/2} of 1 is 2 sqrt(t / pi).
    let grid = TimeGrid::spanning(1.0, 64)?;
    let j = rl_integral(&TimeSeries::from_fn(grid, |_| 1.0), half)?;
    let exact = 2.0 / std::f64::consts::PI.sqrt();
    println!("J^(1/2) 1 at t = 1: {:.12} (exact {exact:.12})", j.values()[64]);

    println!("integration by parts with f = t, g = w1");
    for steps in [256, 512, 1024] {
        let grid = TimeGrid::spanning(1.0, steps)?;
        let f = TimeSeries::from_fn(grid, |t| t);
        let w = CutoffProfile::new(CutoffProfile::DEFAULT_SIGMA, 1.0)?.sample(grid);
        let pair = adjoint_pairing(&f, &w, half)?;
        println!(
            "  dt = 1/{steps:<5} left = {:.8} right = {:.8} rel = {:.2e}",
            pair.left,
            pair.right,
            pair.residual() / pair.scale()
        );
    }

    let grid = TimeGrid::spanning(1.0, 1024)?;
    let profile = CutoffProfile::new(7.0, 1.0)?;
    let order = FracOrder::new(0.25)?;
    println!("right derivatives of w1 (sigma = 7, alpha = 0.25)");
    for k in 0..3 {
        let numeric = rl_deriv_right(&profile.sample(grid), order, k)?;
        for m in [0, 512, 1000] {
            let t = grid.node(m);
            let exact = cutoff_deriv_closed_form(&profile, order, k, t)?;
            println!("  k = {k} t = {t:.4} numeric = {:+.6e} closed form = {exact:+.6e}", numeric.values()[m]);
        }
    }
    Ok(())
}
