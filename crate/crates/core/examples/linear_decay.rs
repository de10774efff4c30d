//! Free linear flow in one dimension: fitted decay of `‖Du‖₂` and the mass
//! outside the light cone `B(t+K)`.

use memwave::diagnostics::{exterior_energy_with, fit_decay, DEFAULT_DELTA};
use memwave::spectral::{Fourier, SpatialGrid};
use memwave::stepper::{run, ScenarioConfig};

fn main() -> memwave::Result<()> {
    let grid = SpatialGrid::new(1, 250.0, 4096)?;
    let mut config = ScenarioConfig::new(grid, 0.9, 3.0, 4.0, 200.0)?;
    config.dt = 0.25;
    config.nonlinear = false;
    let history = run(&config)?;

    let fit = fit_decay(&history.series(|r| r.l2_du), (20.0, 200.0))?;
    println!(
        "|Du|_2 ~ (1+t)^{:.4} over [20, 200], r^2 = {:.5}, {} samples (heat-like rate -0.75)",
        fit.exponent, fit.r_squared, fit.samples
    );

    let fourier = Fourier::new(grid);
    for t in [0.0, 10.0, 50.0, 100.0, 200.0] {
        let m = (t / config.dt) as usize;
        let r = &history.records[m];
        let e = exterior_energy_with(&fourier, &history.states[m], DEFAULT_DELTA)?;
        println!(
            "t = {t:>5}: |Du|_2 = {:.4e}, mass beyond t+K = {:.1e}, energy beyond t^0.6 = {:.3} of total",
            r.l2_du,
            r.exterior_mass / r.l2_u,
            e.value / r.l2_du
        );
    }
    Ok(())
}
