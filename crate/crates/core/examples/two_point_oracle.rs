//! Exact contour map function for two correlated nodes with a linear field
//! between them, against the Step, Linear and Log interpolations.
//!
//! ```text
//! cargo run --release --example two_point_oracle
//! ```

use contourmap::interp::InterpMethod;
use contourmap::twopoint::{compare_to_oracle, reference_cases, unit_grid};

fn main() -> contourmap::Result<()> {
    let grid = unit_grid(11);
    for (label, model, u) in reference_cases() {
        println!("case ({label}) mean {:?} sd {:?} rho {} level {u}", model.mean, model.sd, model.rho);
        println!("     s    exact     step   linear      log");
        let reports: Vec<_> = InterpMethod::ALL.iter().map(|&m| compare_to_oracle(&model, u, m, &grid, 0.9)).collect::<Result<_, _>>()?;
        for (i, s) in grid.iter().enumerate() {
            println!("  {s:4.1} {:8.4} {:8.4} {:8.4} {:8.4}", reports[0].exact[i], reports[0].interpolated[i], reports[1].interpolated[i], reports[2].interpolated[i]);
        }
        for r in &reports {
            println!("  {:<6} max deviation {:+.4}, false inclusions at 0.9: {}", r.method.name(), r.max_deviation, r.false_inclusions);
        }
    }
    Ok(())
}
