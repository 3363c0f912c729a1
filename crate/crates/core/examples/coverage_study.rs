//! Coverage of credible contour regions at matching and high truth
//! resolution.
//!
//! ```text
//! cargo run --release --example coverage_study -- [replicates-per-field] [truth-nodes] [seed]
//! ```

use contourmap::sim::{run_coverage_study, CoverageConfig};

fn main() -> contourmap::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let repeats = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let truth_nodes = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let config = CoverageConfig { repeats, truth_nodes, seed, ..CoverageConfig::default() };
    let start = std::time::Instant::now();
    let result = run_coverage_study(&config)?;
    println!("truth lattice {0}x{0}, {1} replicates, noise variance {2:.4}", truth_nodes, result.replicates, result.noise_variance);
    print!("{}", result.to_text());
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
