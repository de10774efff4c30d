//! A p-ladder through the runner: regime predictions against observed
//! outcomes, written as CSV to a directory given on the command line.

use std::path::PathBuf;

use memwave::runner::{emit_report, parse_config, run_subcommand, Subcommand};

const CONFIG: &str = r#"
n = 1
gamma = 0.9
p = 2.0
K = 4.0
amplitude = 1.0
box_half_length = 64.0
points_per_dim = 1024
dt = 0.05
t_end = 50.0
output_dir = "memwave-out/sweep"
sweep_p = [2.0, 3.0, 3.75, 4.0, 4.5]
"#;

fn main() -> memwave::Result<()> {
    let mut manifest = parse_config(CONFIG, Subcommand::Sweep)?;
    manifest.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_subcommand(Subcommand::Sweep, Some(&manifest))?;
    let map = report.table("regime_map").expect("sweep writes a regime map");
    println!("{}", map.to_csv());
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or(manifest.output_dir);
    let files = emit_report(&report, &dir)?;
    println!("wrote {} files under {}", files.len(), dir.display());
    Ok(())
}
