//! P0, P1 and P2 for Standard and Pretty contour maps of a kriged field.
//!
//! ```text
//! cargo run --release --example quality_measures
//! ```

use contourmap::sim::{run_measure_table, MeasureTableConfig};

fn main() -> contourmap::Result<()> {
    let config = MeasureTableConfig { samples: 5000, ..MeasureTableConfig::default() };
    let table = run_measure_table(&config)?;
    print!("{}", table.to_text());
    for row in &table.rows {
        let r = &row.report;
        println!("{} K={}: min rho1 {:.3} min rho2 {:.3}", row.strategy, r.k, r.bound_rho1, r.bound_rho2);
    }
    Ok(())
}
