//! Fourier symbols of the damped wave propagator and the free linear flow.

use memwave::spectral::{k0_hat, k1_hat, l2_norm, FieldState, Propagator, SpatialGrid};

fn main() -> memwave::Result<()> {
    println!("{:>8} {:>8} {:>14} {:>14}", "t", "|xi|^2", "k0", "k1");
    for t in [0.5, 2.0, 10.0] {
        for xi2 in [0.0, 0.1, 0.25, 1.0, 16.0] {
            println!("{t:>8} {xi2:>8} {:>14.6e} {:>14.6e}", k0_hat(t, xi2)?, k1_hat(t, xi2)?);
        }
    }

    // Low modes decay like the heat flow, high modes like e^{-t/2}.
    let grid = SpatialGrid::new(1, 64.0, 1024)?;
    let propagator = Propagator::new(grid);
    let u = grid.sample(|x| (-x[0] * x[0]).exp());
    let state = FieldState::new(grid, u, vec![0.0; grid.len()], 0.0)?;
    for t in [1.0, 5.0, 20.0, 40.0] {
        let s = propagator.linear_evolve(&state, t)?;
        println!("t = {t:>4}: |u|_2 = {:.6e}, |u_t|_2 = {:.6e}", l2_norm(&grid, &s.u), l2_norm(&grid, &s.v));
    }
    Ok(())
}
