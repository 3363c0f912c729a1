//! Builds the finite-element Matérn precision on a lattice, checks the
//! marginal variance against the covariance function and draws a field.
//!
//! ```text
//! cargo run --release --example matern_field
//! ```

use contourmap::gmrf::{build_matern_precision, marginal_variances, sample_field};
use contourmap::matern::{matern_covariance, MaternSpec};
use contourmap::mesh::Triangulation;
use contourmap::sim::check_mesh_resolution;

fn main() -> contourmap::Result<()> {
    let mesh = Triangulation::square_lattice(40, 10.0)?;
    for nu in [1, 2] {
        let spec = MaternSpec::from_range(nu, 3.0, 1.0)?;
        let model = build_matern_precision(&mesh, &spec)?;
        let var = marginal_variances(&model)?;
        let centre = mesh.n_vertices() / 2 + 20;
        let advice = check_mesh_resolution(&spec, &mesh);
        println!(
            "nu={nu} kappa={:.3}: nnz(Q)={} fill(L)={} centre variance {:.3} (C(0) = {:.3}), edge/range {:.3} {}",
            spec.kappa,
            model.precision().nnz(),
            model.factor().nnz(),
            var.values[centre],
            matern_covariance(0.0, &spec),
            advice.ratio,
            if advice.adequate { "ok" } else { "coarse" }
        );
        let x = sample_field(&model, 42, 1).pop().unwrap();
        let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        println!("  one realization spans [{lo:.2}, {hi:.2}]");
    }
    Ok(())
}
