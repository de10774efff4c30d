//! Ratio of the singular convolution integral to its three-case bound.

use memwave::diagnostics::{cui_bound_check, log_spaced};

fn main() -> memwave::Result<()> {
    let ts = log_spaced(1.0, 1e4, 40);
    for (theta, a, b) in [(0.5, 1.0, 2.0), (0.5, 0.5, 1.0), (0.2, 0.1, 0.3)] {
        let report = cui_bound_check(theta, a, b, &ts)?;
        println!("theta = {theta}, a = {a}, b = {b}: case {}, sup ratio {:.4}", report.case.label(), report.sup_ratio);
        for row in report.rows.iter().step_by(8) {
            println!("  t = {:>10.2} integral = {:.6e} bound = {:.6e} ratio = {:.5}", row.t, row.lhs, row.bound, row.ratio);
        }
        if let Some((previous, last)) = report.decade_slopes() {
            println!("  log-slope of the ratio: {previous:.2e} then {last:.2e}");
        }
    }
    Ok(())
}
