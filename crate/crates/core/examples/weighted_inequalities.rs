//! The weight `ψ(x,t)` and the weighted Gagliardo-Nirenberg ratio on bumps
//! travelling with the light cone.

use memwave::diagnostics::{gagliardo_ratio, psi};
use memwave::spectral::SpatialGrid;

fn main() -> memwave::Result<()> {
    let k = 2.0;
    for t in [0.0, 1.0, 10.0] {
        let front = t + k;
        let row: Vec<String> = [0.0, 0.5, 0.9, 0.99]
            .iter()
            .map(|f| {
                let r = f * front;
                let v = psi(&[r], t, k).unwrap();
                format!("psi({r:.2}) = {v:.4} >= {:.4}", r * r / (4.0 * front))
            })
            .collect();
        println!("t = {t}: {}", row.join(", "));
    }

    let grid = SpatialGrid::new(1, 128.0, 4096)?;
    for (q, sigma) in [(2.0, 1.0), (4.0, 0.5), (f64::INFINITY, 0.25)] {
        for t in [1.0, 10.0, 100.0] {
            let centre = 0.5 * t;
            let u = grid.sample(|x| {
                let s = (x[0] - centre).abs();
                if s < 1.0 {
                    (1.0 - s * s).powi(4)
                } else {
                    0.0
                }
            });
            match gagliardo_ratio(&grid, &u, t, q, sigma, k) {
                Ok(r) => println!("q = {q}, sigma = {sigma}, t = {t}: ratio = {r:.4e}"),
                Err(e) => println!("q = {q}, sigma = {sigma}, t = {t}: {e}"),
            }
        }
    }
    Ok(())
}
