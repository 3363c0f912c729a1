//! Gaussian rectangle probabilities by sequential conditioning, compared
//! with closed forms in two dimensions and for independent components.
//!
//! ```text
//! cargo run --release --example rectangle_probability
//! ```

use contourmap::gmrf::PrecisionModel;
use contourmap::normal::{bivariate_interval, standard_interval};
use contourmap::prob::{rectangle_probability, IntervalBox};
use contourmap::sparse::SparseSymMatrix;

fn main() -> contourmap::Result<()> {
    // correlation 0.9, unit variances: Q = inv([[1, .9], [.9, 1]])
    let det = 1.0 - 0.81;
    let q = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0 / det), (1, 0, -0.9 / det), (1, 1, 1.0 / det)])?;
    let model = PrecisionModel::zero_mean(q)?;
    let orthant = IntervalBox::new(vec![f64::NEG_INFINITY; 2], vec![0.0; 2])?;
    let est = rectangle_probability(&model, &orthant, 100_000, 1)?;
    let exact = bivariate_interval([0.0; 2], [[1.0, 0.9], [0.9, 1.0]], [f64::NEG_INFINITY; 2], [0.0; 2])?;
    println!("orthant, rho = 0.9: {:.5} +/- {:.5} (exact {exact:.5})", est.estimate, est.std_error);

    let n = 5000;
    let d: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
    let model = PrecisionModel::zero_mean(SparseSymMatrix::diagonal_matrix(&d))?;
    let b = IntervalBox::new(vec![-3.5; n], vec![3.5; n])?;
    let est = rectangle_probability(&model, &b, 10_000, 1)?;
    let exact: f64 = d.iter().map(|q| standard_interval(-3.5 * q.sqrt(), 3.5 * q.sqrt())).product();
    println!("{n} independent components: {:.6} (exact {exact:.6})", est.estimate);
    Ok(())
}
