//! Programmatic sweep over partition skew and selection strategy, the same
//! machinery as `fedsim sweep`.

use std::path::Path;

use fedsim::cli::cmd_sweep;

fn main() -> fedsim::Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/minimal.toml");
    let out = std::env::temp_dir().join("fedsim-example-sweep");
    let axes = ["alpha=100,0.1".to_string(), "strategy=none,mixed".to_string()];
    let report = cmd_sweep(&config, &axes, &out, 1, None)?;
    for (cell, res) in &report.cells {
        let acc = res.as_ref().map(|s| s.final_server_acc.unwrap_or(f64::NAN)).unwrap_or(f64::NAN);
        println!("{:?}: final acc {acc:.4}", cell.assignments);
    }
    println!("summary: {}", report.summary_csv.display());
    Ok(())
}
