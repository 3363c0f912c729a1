//! Chooses the largest number of contour levels whose P2 reaches 0.9,
//! showing which candidates the marginal bound rejects without sampling.
//!
//! ```text
//! cargo run --release --example select_levels
//! ```

use contourmap::levels::LevelStrategy;
use contourmap::measures::{select_k, Measure, SelectionSettings};
use contourmap::sim::{run_measure_table, MeasureTableConfig};

fn main() -> contourmap::Result<()> {
    let table = run_measure_table(&MeasureTableConfig { standard_k: vec![], pretty_spacings: vec![], ..MeasureTableConfig::default() })?;
    let f = table.posterior.mean().to_vec();
    for strategy in [LevelStrategy::Standard, LevelStrategy::Pretty] {
        let settings = SelectionSettings { target: 0.9, measure: Measure::P2, strategy, k_max: 8, samples: 5000, seed: 1, audit: true };
        let sel = select_k(&table.posterior, &f, table.mesh.vertex_areas(), &settings)?;
        println!("{strategy:?}: selected K = {} (conservative: {})", sel.k, sel.conservative);
        for c in &sel.candidates {
            let est = c.estimate.map(|e| format!("{:.3}", e.estimate)).unwrap_or_default();
            println!("  K={:<2} bound {:.3}{} estimate {est}", c.k, c.bound, if c.rejected_by_bound { " (rejected)" } else { "" });
        }
    }
    Ok(())
}
