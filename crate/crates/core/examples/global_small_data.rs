//! Small data above the global-existence threshold: the weighted energy
//! `W(t) = (1+t)^j ‖Du‖₂` stays of order `W(1)`.

use memwave::criticality::{classify, DataTraits};
use memwave::diagnostics::weighted_energy;
use memwave::spectral::SpatialGrid;
use memwave::stepper::{run, ScenarioConfig};

fn main() -> memwave::Result<()> {
    let (gamma, p) = (0.9, 4.5);
    let traits = DataTraits {
        positive_mean: true,
        small_data: true,
        compact_support: true,
    };
    println!("predicted: {}", classify(1, gamma, p, traits).tag.as_str());
    for amplitude in [1e-3, 1e-2, 1e-1] {
        let grid = SpatialGrid::new(1, 128.0, 2048)?;
        let mut config = ScenarioConfig::new(grid, gamma, p, 4.0, 100.0)?;
        config.dt = 0.0625;
        config.amplitude = amplitude;
        let history = run(&config)?;
        let w: Vec<f64> = history
            .records
            .iter()
            .map(|r| weighted_energy(r.t, r.l2_du, 1, gamma))
            .collect::<Result<_, _>>()?;
        let w1 = w[16];
        let sup = w.iter().cloned().fold(0.0, f64::max);
        let forcing = history.records.iter().map(|r| r.forcing_l2).fold(0.0, f64::max);
        println!(
            "eps = {amplitude:<6} {}: sup W / W(1) = {:.4}, W(100) / W(1) = {:.4}, max |f|_2 = {forcing:.2e}",
            history.status.label(),
            sup / w1,
            w.last().unwrap() / w1
        );
    }
    Ok(())
}
