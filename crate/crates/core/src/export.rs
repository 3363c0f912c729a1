//! GeoJSON and SVG output for credible sets, interpolated fields and
//! contour maps.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::interp::{CredibleSet, InterpolatedField};
use crate::levels::{assign_level_sets, ContourLevelSet};
use crate::mesh::Triangulation;

/// Viridis samples at 0, 1/8, ..., 1.
const VIRIDIS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

/// Colour at `t` in `[0, 1]` by linear interpolation in the table.
pub fn viridis(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let s = x - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    std::array::from_fn(|c| (a[c] as f64 + s * (b[c] as f64 - a[c] as f64)).round() as u8)
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn point(p: [f64; 2]) -> Value {
    json!([p[0], p[1]])
}

/// Boundary polylines as a MultiLineString and the set as a MultiPolygon of
/// per-triangle pieces, each with `properties` plus the set's alpha and
/// method.
pub fn credible_set_features(set: &CredibleSet, properties: &Map<String, Value>) -> Vec<Value> {
    let mut props = properties.clone();
    props.insert("alpha".into(), json!(set.alpha));
    props.insert("threshold".into(), json!(set.threshold()));
    props.insert("method".into(), json!(set.method));
    props.insert("area".into(), json!(set.area));
    let lines: Vec<Value> = set.polylines.iter().map(|l| Value::Array(l.iter().map(|&p| point(p)).collect())).collect();
    let polygons: Vec<Value> = set
        .polygons
        .iter()
        .map(|(_, poly)| {
            let mut ring: Vec<Value> = poly.iter().map(|&p| point(p)).collect();
            ring.push(point(poly[0]));
            json!([ring])
        })
        .collect();
    let mut boundary = props.clone();
    boundary.insert("kind".into(), json!("boundary"));
    let mut region = props;
    region.insert("kind".into(), json!("region"));
    vec![
        json!({"type": "Feature", "properties": boundary, "geometry": {"type": "MultiLineString", "coordinates": lines}}),
        json!({"type": "Feature", "properties": region, "geometry": {"type": "MultiPolygon", "coordinates": polygons}}),
    ]
}

/// FeatureCollection with two features per credible set.
pub fn credible_sets_geojson(sets: &[CredibleSet], properties: &Map<String, Value>) -> Value {
    let features: Vec<Value> = sets.iter().flat_map(|s| credible_set_features(s, properties)).collect();
    json!({"type": "FeatureCollection", "features": features})
}

struct Canvas {
    min: [f64; 2],
    scale: f64,
    height: f64,
    width: f64,
    body: String,
}

const CANVAS_WIDTH: f64 = 600.0;

impl Canvas {
    fn new(mesh: &Triangulation) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for v in mesh.vertices() {
            for c in 0..2 {
                min[c] = min[c].min(v[c]);
                max[c] = max[c].max(v[c]);
            }
        }
        let span = (max[0] - min[0]).max(f64::MIN_POSITIVE);
        let scale = CANVAS_WIDTH / span;
        let height = ((max[1] - min[1]) * scale).max(1.0);
        Self { min, scale, height, width: CANVAS_WIDTH, body: String::new() }
    }

    fn xy(&self, p: [f64; 2]) -> (f64, f64) {
        ((p[0] - self.min[0]) * self.scale, self.height - (p[1] - self.min[1]) * self.scale)
    }

    fn triangle(&mut self, pts: [[f64; 2]; 3], fill: &str) {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.xy(p);
            let _ = write!(d, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(self.body, r#"<polygon points="{d}" fill="{fill}" stroke="{fill}" stroke-width="0.3"/>"#);
    }

    fn polyline(&mut self, line: &[[f64; 2]], stroke: &str, width: f64) {
        let mut d = String::new();
        for (i, &p) in line.iter().enumerate() {
            let (x, y) = self.xy(p);
            let _ = write!(d, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(self.body, r#"<polyline points="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#);
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// Heat map of an interpolated field (triangle colour from the mean vertex
/// value, pruned triangles grey) with optional polylines on top.
pub fn field_svg(field: &InterpolatedField, overlays: &[Vec<[f64; 2]>]) -> String {
    let mesh = field.mesh();
    let mut canvas = Canvas::new(mesh);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = tri.map(|v| mesh.vertices()[v]);
        let fill = if field.pruned()[t] {
            "#bdbdbd".to_string()
        } else {
            let mean = tri.iter().map(|&v| field.values()[v]).sum::<f64>() / 3.0;
            hex(viridis(mean))
        };
        canvas.triangle(pts, &fill);
    }
    for line in overlays {
        canvas.polyline(line, "#d62728", 1.5);
    }
    canvas.finish()
}

/// Contour map of `f`: each level set `G_k` is coloured by the position of
/// its midpoint level `u^e_k` in the colour map. A triangle takes the set of
/// its centroid value.
pub fn contour_map_svg(mesh: &Triangulation, f: &[f64], levels: &ContourLevelSet) -> String {
    let mids = levels.midpoints();
    let (lo, hi) = (mids[0], mids[mids.len() - 1]);
    let colour = |k: usize| hex(viridis(if hi > lo { (mids[k] - lo) / (hi - lo) } else { 0.5 }));
    let centroids: Vec<f64> = mesh.triangles().iter().map(|t| t.iter().map(|&v| f[v]).sum::<f64>() / 3.0).collect();
    let sets = assign_level_sets(&centroids, levels).sets;
    let mut canvas = Canvas::new(mesh);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        canvas.triangle(tri.map(|v| mesh.vertices()[v]), &colour(sets[t]));
    }
    canvas.finish()
}
