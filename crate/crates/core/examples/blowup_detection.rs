//! Positive data below `p_γ` blow up; larger amplitudes blow up sooner.

use memwave::criticality::{compute_exponents, Extended};
use memwave::spectral::SpatialGrid;
use memwave::stepper::{run, ScenarioConfig};

fn main() -> memwave::Result<()> {
    let e = compute_exponents(1, 0.9)?;
    if let Extended::Finite(pg) = e.p_gamma {
        println!("n = 1, gamma = 0.9: p_gamma = {pg}");
    }
    for p in [2.0, 3.0] {
        for amplitude in [1.0, 2.0, 4.0] {
            let grid = SpatialGrid::new(1, 64.0, 1024)?;
            let mut config = ScenarioConfig::new(grid, 0.9, p, 4.0, 50.0)?;
            config.dt = 0.05;
            config.amplitude = amplitude;
            let history = run(&config)?;
            let last = history.records.last().unwrap();
            let first = &history.records[0];
            println!(
                "p = {p} eps = {amplitude}: {} at t = {:.2}, growth of |u|_H1 + |u_t|_2 = {:.2e}",
                history.status.label(),
                history.t_detect().unwrap_or(f64::NAN),
                last.blowup_functional() / first.blowup_functional()
            );
        }
    }
    Ok(())
}
