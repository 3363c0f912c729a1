//! Simulates a field, observes it with noise and computes the kriging
//! predictor with its posterior standard deviations.
//!
//! ```text
//! cargo run --release --example kriging
//! ```

use contourmap::gmrf::{build_matern_precision, condition_on_observations, marginal_variances, sample_field};
use contourmap::matern::MaternSpec;
use contourmap::mesh::Triangulation;
use contourmap::sim::observe;

fn main() -> contourmap::Result<()> {
    let mesh = Triangulation::square_lattice(30, 10.0)?;
    let prior = build_matern_precision(&mesh, &MaternSpec::new(1, 1.0, 1.0)?)?;
    let truth = sample_field(&prior, 3, 1).pop().unwrap();
    for count in [50, 500] {
        let obs = observe(&mesh, &truth, 10.0, count, 0.01, 4)?;
        let post = condition_on_observations(&prior, &obs, &mesh)?;
        let sd = marginal_variances(&post)?.std_devs();
        let rmse = (post.mean().iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / truth.len() as f64).sqrt();
        let mean_sd = sd.iter().sum::<f64>() / sd.len() as f64;
        println!("{count:>4} observations: rmse {rmse:.3}, mean posterior sd {mean_sd:.3}");
    }
    Ok(())
}
