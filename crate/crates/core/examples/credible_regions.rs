//! Contour map function of a kriged field, credible contour-avoiding sets
//! for several credibilities, and GeoJSON/SVG export.
//!
//! ```text
//! cargo run --release --example credible_regions -- [output-dir]
//! ```

use std::path::PathBuf;

use contourmap::export::{credible_sets_geojson, field_svg};
use contourmap::interp::{extract_credible_set, InterpMethod, InterpolatedField};
use contourmap::levels::{assign_level_sets, standard_levels};
use contourmap::measures::contour_function_weighted;
use contourmap::sim::{run_measure_table, MeasureTableConfig};

fn main() -> contourmap::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "credible_regions_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| contourmap::Error::Io { path: out.clone(), source: e })?;
    let table = run_measure_table(&MeasureTableConfig { standard_k: vec![], pretty_spacings: vec![], ..MeasureTableConfig::default() })?;
    let (mesh, post) = (&table.mesh, &table.posterior);
    let levels = standard_levels(post.mean(), 2)?;
    let a = assign_level_sets(post.mean(), &levels);
    let cf = contour_function_weighted(post, &a, &levels, 5000, 1, mesh.vertex_areas())?;
    println!("P0 = {:.3} +/- {:.3}", cf.p0.estimate, cf.p0.std_error);
    for method in InterpMethod::ALL {
        let field = InterpolatedField::new(mesh.clone(), cf.function.values.clone(), method, &a)?;
        let sets: Vec<_> = [0.5, 0.1, 0.05].iter().map(|&al| extract_credible_set(&field, al)).collect::<Result<_, _>>()?;
        for s in &sets {
            println!("{:<6} alpha {:<4} area {:6.2} of {:.0}", method.name(), s.alpha, s.area, mesh.total_area());
        }
        let geo = credible_sets_geojson(&sets, &Default::default());
        let path = out.join(format!("credible_{}.geojson", method.name()));
        std::fs::write(&path, serde_json::to_string_pretty(&geo).unwrap()).map_err(|e| contourmap::Error::Io { path, source: e })?;
        let overlay: Vec<_> = sets[1].polylines.clone();
        let path = out.join(format!("field_{}.svg", method.name()));
        std::fs::write(&path, field_svg(&field.subdivide(2)?, &overlay)).map_err(|e| contourmap::Error::Io { path, source: e })?;
    }
    println!("wrote GeoJSON and SVG files to {}", out.display());
    Ok(())
}
