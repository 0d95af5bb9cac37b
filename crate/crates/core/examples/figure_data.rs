//! Writes CSV data for the solution plots of both built-in systems.
//!
//! ```text
//! cargo run --example figure_data -- out/
//! python3 examples/plot_figures.py out/
//! ```

use std::path::PathBuf;

use stabound::analysis::{builtin_system, run_analyze, AnalysisConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figure_data".into()));
    std::fs::create_dir_all(&dir)?;
    for (id, x0, t_end) in [("example1_lti", [-4.0, 3.0], 6.0), ("example3_ltv", [2.0, -1.0], 5.0)] {
        let cfg = AnalysisConfig::new(builtin_system(id, 0)?, None, t_end, 601)?.with_x0(x0.to_vec())?;
        let analysis = run_analyze(&cfg)?;
        let csv = dir.join(format!("{id}.csv"));
        let report = dir.join(format!("{id}.json"));
        analysis.write_outputs(Some(&csv), Some(&report))?;
        println!("{}", csv.display());
    }
    Ok(())
}
