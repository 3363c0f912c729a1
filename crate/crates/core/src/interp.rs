//! Continuous interpretation of a per-vertex contour map function: triangle
//! pruning, Step/Linear/Log interpolation, subdivision and extraction of
//! credible contour-avoiding sets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::LevelAssignment;
use crate::mesh::Triangulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpMethod {
    Step,
    Linear,
    Log,
}

impl InterpMethod {
    pub const ALL: [InterpMethod; 3] = [InterpMethod::Step, InterpMethod::Linear, InterpMethod::Log];

    pub fn name(self) -> &'static str {
        match self {
            Self::Step => "step",
            Self::Linear => "linear",
            Self::Log => "log",
        }
    }
}

impl std::fmt::Display for InterpMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InterpMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "step" => Ok(Self::Step),
            "linear" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            other => Err(Error::InvalidParameter(format!("unknown interpolation method `{other}`"))),
        }
    }
}

/// Value at barycentric weights `w` inside an element with vertex values
/// `values`. Step takes the minimum over all vertices of the element.
///
/// Log is clamped into `[Step, Linear]` so that rounding cannot break the
/// min <= geometric mean <= arithmetic mean ordering.
pub fn interpolate(values: [f64; 3], method: InterpMethod, w: [f64; 3]) -> Result<f64> {
    let min = values[0].min(values[1]).min(values[2]);
    let linear = w[0] * values[0] + w[1] * values[1] + w[2] * values[2];
    match method {
        InterpMethod::Step => Ok(min),
        InterpMethod::Linear => Ok(linear),
        InterpMethod::Log => {
            if values.iter().any(|&v| v <= 0.0) {
                return Err(Error::Contract("Log interpolation on an element with a zero vertex value; eliminate needles first".into()));
            }
            let g = (w[0] * values[0].ln() + w[1] * values[1].ln() + w[2] * values[2].ln()).exp();
            Ok(g.clamp(min, linear.max(min)))
        }
    }
}

/// Triangles whose vertices are not all in one level set.
pub fn prune_triangles(mesh: &Triangulation, assignment: &LevelAssignment) -> Vec<bool> {
    mesh.triangles()
        .iter()
        .map(|t| {
            let k = assignment.sets[t[0]];
            assignment.sets[t[1]] != k || assignment.sets[t[2]] != k
        })
        .collect()
}

/// Triangles with a zero-valued vertex, for Step and Log. Linear needs no
/// elimination and gets an all-false mask.
pub fn eliminate_needles(mesh: &Triangulation, values: &[f64], method: InterpMethod) -> Vec<bool> {
    match method {
        InterpMethod::Linear => vec![false; mesh.n_triangles()],
        InterpMethod::Step | InterpMethod::Log => mesh.triangles().iter().map(|t| t.iter().any(|&v| values[v] == 0.0)).collect(),
    }
}

/// Per-vertex values on a triangulation with an interpolation rule and a
/// mask of eliminated triangles.
#[derive(Debug, Clone)]
pub struct InterpolatedField {
    mesh: Triangulation,
    values: Vec<f64>,
    method: InterpMethod,
    pruned: Vec<bool>,
}

impl InterpolatedField {
    /// Prunes mixed-set triangles and, for Step and Log, needle triangles.
    pub fn new(mesh: Triangulation, values: Vec<f64>, method: InterpMethod, assignment: &LevelAssignment) -> Result<Self> {
        if assignment.sets.len() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch { expected: mesh.n_vertices(), found: assignment.sets.len() });
        }
        let mut pruned = prune_triangles(&mesh, assignment);
        Self::check_values(&mesh, &values)?;
        for (p, n) in pruned.iter_mut().zip(eliminate_needles(&mesh, &values, method)) {
            *p |= n;
        }
        Ok(Self { mesh, values, method, pruned })
    }

    /// Field with an explicit pruning mask; needle elimination is still applied.
    pub fn with_mask(mesh: Triangulation, values: Vec<f64>, method: InterpMethod, mut pruned: Vec<bool>) -> Result<Self> {
        Self::check_values(&mesh, &values)?;
        if pruned.len() != mesh.n_triangles() {
            return Err(Error::DimensionMismatch { expected: mesh.n_triangles(), found: pruned.len() });
        }
        for (p, n) in pruned.iter_mut().zip(eliminate_needles(&mesh, &values, method)) {
            *p |= n;
        }
        Ok(Self { mesh, values, method, pruned })
    }

    fn check_values(mesh: &Triangulation, values: &[f64]) -> Result<()> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch { expected: mesh.n_vertices(), found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("interpolated values must lie in [0, 1], got {v}")));
        }
        Ok(())
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> InterpMethod {
        self.method
    }

    pub fn pruned(&self) -> &[bool] {
        &self.pruned
    }

    fn tri_values(&self, t: usize) -> [f64; 3] {
        let tri = self.mesh.triangles()[t];
        [self.values[tri[0]], self.values[tri[1]], self.values[tri[2]]]
    }

    /// Interpolated value in triangle `t`, `None` if it is pruned.
    pub fn value_in(&self, t: usize, w: [f64; 3]) -> Option<f64> {
        if self.pruned[t] {
            return None;
        }
        Some(interpolate(self.tri_values(t), self.method, w).expect("needle triangles are pruned"))
    }

    /// Values at `p` from every unpruned triangle containing it.
    pub fn values_at(&self, p: [f64; 2]) -> Vec<(usize, f64)> {
        self.mesh.containing(p).into_iter().filter_map(|(t, w)| self.value_in(t, w).map(|v| (t, v))).collect()
    }

    /// Whether `p` lies in the closed set `{F >= threshold}` of any unpruned
    /// triangle containing it.
    pub fn in_excursion(&self, p: [f64; 2], threshold: f64) -> bool {
        self.values_at(p).iter().any(|&(_, v)| v >= threshold)
    }

    /// `depth` rounds of 4-way midpoint refinement. Midpoint values come from
    /// the method applied along the shared edge; for Step that is the smaller
    /// endpoint value. Children inherit pruning, and the result is tagged
    /// Linear for plotting.
    pub fn subdivide(&self, depth: usize) -> Result<InterpolatedField> {
        if depth == 0 {
            return Ok(self.clone());
        }
        let mut vertices = self.mesh.vertices().to_vec();
        let mut values = self.values.clone();
        let mut triangles = Vec::with_capacity(4 * self.mesh.n_triangles());
        let mut pruned = Vec::with_capacity(4 * self.mesh.n_triangles());
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (va, vb) = (vertices[key.0], vertices[key.1]);
                vertices.push([0.5 * (va[0] + vb[0]), 0.5 * (va[1] + vb[1])]);
                let (fa, fb) = (values[key.0], values[key.1]);
                values.push(match self.method {
                    InterpMethod::Step => fa.min(fb),
                    InterpMethod::Linear => 0.5 * (fa + fb),
                    InterpMethod::Log => (fa * fb).sqrt().clamp(fa.min(fb), 0.5 * (fa + fb)),
                });
                vertices.len() - 1
            })
        };
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let [a, b, c] = *tri;
            let ab = midpoint(a, b);
            let bc = midpoint(b, c);
            let ca = midpoint(c, a);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            pruned.extend_from_slice(&[self.pruned[t]; 4]);
        }
        let mesh = Triangulation::new(vertices, triangles)?;
        let next = InterpolatedField { mesh, values, method: InterpMethod::Linear, pruned };
        next.subdivide(depth - 1)
    }
}

/// Classification of a triangle against the threshold `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleClass {
    Inside,
    Outside,
    Crossed,
    Pruned,
}

/// A straight piece of set boundary inside (or on an edge of) one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub triangle: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

/// The credible contour-avoiding set `{F >= 1 - alpha}` of an interpolated
/// field on its pruned domain.
#[derive(Debug, Clone, Serialize)]
pub struct CredibleSet {
    pub alpha: f64,
    pub method: InterpMethod,
    pub classes: Vec<TriangleClass>,
    /// Threshold crossings inside triangles.
    pub interior_segments: Vec<Segment>,
    /// Edge sections where the set meets the domain boundary, a pruned
    /// triangle or (for Step) a neighbour outside the set.
    pub boundary_segments: Vec<Segment>,
    /// The part of each triangle inside the set, counterclockwise.
    pub polygons: Vec<(usize, Vec<[f64; 2]>)>,
    /// Segments stitched into polylines; closed rings repeat their start.
    pub polylines: Vec<Vec<[f64; 2]>>,
    pub area: f64,
}

impl CredibleSet {
    pub fn threshold(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn n_inside(&self) -> usize {
        self.classes.iter().filter(|c| **c == TriangleClass::Inside).count()
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    })
    .sum::<f64>()
        * 0.5
}

/// Threshold crossing on the edge between vertices `a` and `b`, computed from
/// the lower-indexed vertex so both adjacent triangles get the same point.
fn edge_crossing(mesh: &Triangulation, g: &[f64], a: usize, b: usize, level: f64) -> [f64; 2] {
    let (i, j) = (a.min(b), a.max(b));
    let s = (level - g[i]) / (g[j] - g[i]);
    lerp(mesh.vertices()[i], mesh.vertices()[j], s)
}

/// Extracts `{F >= 1 - alpha}`. Linear and Log use straight level curves
/// (Log on log values); Step keeps or drops whole triangles.
pub fn extract_credible_set(field: &InterpolatedField, alpha: f64) -> Result<CredibleSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mesh = field.mesh();
    let threshold = 1.0 - alpha;
    let (g, level): (Vec<f64>, f64) = match field.method {
        InterpMethod::Log => (field.values.iter().map(|v| v.ln()).collect(), threshold.ln()),
        _ => (field.values.clone(), threshold),
    };
    let inside_v: Vec<bool> = g.iter().map(|&v| v >= level).collect();
    let classes: Vec<TriangleClass> = mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            if field.pruned[t] {
                return TriangleClass::Pruned;
            }
            let n_in = tri.iter().filter(|&&v| inside_v[v]).count();
            match (field.method, n_in) {
                (_, 3) => TriangleClass::Inside,
                (_, 0) | (InterpMethod::Step, _) => TriangleClass::Outside,
                _ => TriangleClass::Crossed,
            }
        })
        .collect();

    let mut interior_segments = Vec::new();
    let mut boundary_segments = Vec::new();
    let mut polygons = Vec::new();
    let neighbors = mesh.neighbors();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        match classes[t] {
            TriangleClass::Pruned | TriangleClass::Outside => continue,
            TriangleClass::Inside => polygons.push((t, tri.iter().map(|&v| mesh.vertices()[v]).collect())),
            TriangleClass::Crossed => {
                let mut poly = Vec::with_capacity(4);
                let mut cuts = Vec::with_capacity(2);
                for e in 0..3 {
                    let (a, b) = (tri[e], tri[(e + 1) % 3]);
                    if inside_v[a] {
                        poly.push(mesh.vertices()[a]);
                    }
                    if inside_v[a] != inside_v[b] {
                        let p = edge_crossing(mesh, &g, a, b, level);
                        poly.push(p);
                        cuts.push(p);
                    }
                }
                if cuts.len() == 2 && cuts[0] != cuts[1] {
                    interior_segments.push(Segment { triangle: t, start: cuts[0], end: cuts[1] });
                }
                if polygon_area(&poly) > 0.0 {
                    polygons.push((t, poly));
                }
            }
        }
        for e in 0..3 {
            let open = match neighbors[t][e] {
                None => true,
                Some(nb) => match field.method {
                    InterpMethod::Step => classes[nb] != TriangleClass::Inside,
                    _ => classes[nb] == TriangleClass::Pruned,
                },
            };
            if !open {
                continue;
            }
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let piece = match (inside_v[a] || classes[t] == TriangleClass::Inside, inside_v[b] || classes[t] == TriangleClass::Inside) {
                (true, true) => Some((pa, pb)),
                (true, false) => Some((pa, edge_crossing(mesh, &g, a, b, level))),
                (false, true) => Some((edge_crossing(mesh, &g, a, b, level), pb)),
                (false, false) => None,
            };
            if let Some((s, e)) = piece {
                if s != e {
                    boundary_segments.push(Segment { triangle: t, start: s, end: e });
                }
            }
        }
    }
    let area = polygons.iter().map(|(_, p)| polygon_area(p)).sum();
    let tol = 1e-9 * mesh.diameter().max(f64::MIN_POSITIVE);
    let all: Vec<([f64; 2], [f64; 2])> = interior_segments.iter().chain(&boundary_segments).map(|s| (s.start, s.end)).collect();
    let polylines = stitch(&all, tol);
    Ok(CredibleSet { alpha, method: field.method, classes, interior_segments, boundary_segments, polygons, polylines, area })
}

/// Joins segments sharing endpoints (within `tol`) into polylines.
pub fn stitch(segments: &[([f64; 2], [f64; 2])], tol: f64) -> Vec<Vec<[f64; 2]>> {
    let key = |p: [f64; 2]| ((p[0] / tol).round() as i64, (p[1] / tol).round() as i64);
    let mut at: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, s) in segments.iter().enumerate() {
        at.entry(key(s.0)).or_default().push(i);
        at.entry(key(s.1)).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let next_from = |p: [f64; 2], used: &[bool]| -> Option<usize> { at.get(&key(p)).and_then(|v| v.iter().copied().find(|&i| !used[i])) };
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = std::collections::VecDeque::from([segments[start].0, segments[start].1]);
        // forward
        while let Some(i) = next_from(*line.back().unwrap(), &used) {
            used[i] = true;
            let tail = key(*line.back().unwrap());
            let s = segments[i];
            line.push_back(if key(s.0) == tail { s.1 } else { s.0 });
        }
        // backward
        while let Some(i) = next_from(*line.front().unwrap(), &used) {
            used[i] = true;
            let head = key(*line.front().unwrap());
            let s = segments[i];
            line.push_front(if key(s.0) == head { s.1 } else { s.0 });
        }
        lines.push(line.into_iter().collect());
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_triangle() -> Triangulation {
        Triangulation::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    fn same_set(n: usize) -> LevelAssignment {
        LevelAssignment { sets: vec![1; n], values: vec![0.0; n], ties: vec![] }
    }

    #[test]
    fn interpolation_examples() {
        let w = [0.2, 0.3, 0.5];
        assert_eq!(interpolate([0.9, 0.8, 0.95], InterpMethod::Step, w).unwrap(), 0.8);
        let third = 1.0 / 3.0;
        let v = interpolate([0.9; 3], InterpMethod::Log, [third; 3]).unwrap();
        assert!((v - 0.9).abs() < 1e-15);
        let v = interpolate([0.64, 1.0, 0.5], InterpMethod::Log, [0.5, 0.5, 0.0]).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
        assert!(matches!(interpolate([0.0, 0.5, 0.5], InterpMethod::Log, w), Err(Error::Contract(_))));
    }

    proptest! {
        #[test]
        fn step_log_linear_order(v in prop::array::uniform3(1e-6f64..1.0), w in prop::array::uniform3(0.0f64..1.0)) {
            let s: f64 = w.iter().sum::<f64>().max(1e-12);
            let w = [w[0] / s, w[1] / s, w[2] / s];
            let st = interpolate(v, InterpMethod::Step, w).unwrap();
            let lg = interpolate(v, InterpMethod::Log, w).unwrap();
            let li = interpolate(v, InterpMethod::Linear, w).unwrap();
            prop_assert!(st <= lg && lg <= li);
        }
    }

    #[test]
    fn pruning_rules() {
        let mesh = Triangulation::square_lattice(3, 2.0).unwrap();
        assert!(prune_triangles(&mesh, &same_set(9)).iter().all(|p| !p));
        let tri = one_triangle();
        let a = LevelAssignment { sets: vec![0, 0, 1], values: vec![0.0; 3], ties: vec![] };
        assert_eq!(prune_triangles(&tri, &a), vec![true]);
        assert_eq!(eliminate_needles(&tri, &[0.0, 0.9, 0.9], InterpMethod::Step), vec![true]);
        assert_eq!(eliminate_needles(&tri, &[0.0, 0.9, 0.9], InterpMethod::Linear), vec![false]);
        assert_eq!(eliminate_needles(&tri, &[0.1, 0.9, 0.9], InterpMethod::Log), vec![false]);
    }

    #[test]
    fn single_triangle_linear_crossing() {
        let f = InterpolatedField::new(one_triangle(), vec![0.95, 0.85, 0.85], InterpMethod::Linear, &same_set(3)).unwrap();
        let set = extract_credible_set(&f, 0.1).unwrap();
        assert_eq!(set.classes, vec![TriangleClass::Crossed]);
        assert_eq!(set.interior_segments.len(), 1);
        let s = set.interior_segments[0];
        let mut ends = [s.start, s.end];
        ends.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for (got, want) in ends.iter().zip([[0.0, 0.5], [0.5, 0.0]]) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
        assert!((set.area - 0.125).abs() < 1e-12);
    }

    #[test]
    fn full_set_has_no_interior_segments() {
        let mesh = Triangulation::square_lattice(4, 3.0).unwrap();
        let f = InterpolatedField::new(mesh.clone(), vec![1.0; 16], InterpMethod::Log, &same_set(16)).unwrap();
        let set = extract_credible_set(&f, 0.1).unwrap();
        assert!(set.interior_segments.is_empty());
        assert!((set.area - mesh.total_area()).abs() < 1e-12);
        // the boundary is one closed ring around the square
        assert_eq!(set.polylines.len(), 1);
        let ring = &set.polylines[0];
        assert_eq!(ring.first(), ring.last());
    }

    fn bumpy_field(method: InterpMethod) -> InterpolatedField {
        let mesh = Triangulation::square_lattice(12, 4.0).unwrap();
        let values = mesh.vertices().iter().map(|v| (0.5 + 0.45 * (v[0] * 1.3).sin() * (v[1] * 0.9).cos()).clamp(0.0, 1.0)).collect();
        InterpolatedField::new(mesh, values, method, &same_set(144)).unwrap()
    }

    #[test]
    fn area_shrinks_with_threshold_and_vertices_recovered() {
        for method in InterpMethod::ALL {
            let f = bumpy_field(method);
            let mut last = f64::INFINITY;
            for alpha in [0.9, 0.7, 0.5, 0.3, 0.1, 0.05] {
                let set = extract_credible_set(&f, alpha).unwrap();
                assert!(set.area <= last + 1e-12, "{method} {alpha}");
                last = set.area;
                if method != InterpMethod::Step {
                    for (i, &v) in f.values().iter().enumerate() {
                        let p = f.mesh().vertices()[i];
                        assert_eq!(f.in_excursion(p, 1.0 - alpha), v >= 1.0 - alpha);
                    }
                }
            }
        }
    }

    #[test]
    fn subdivision_counts_and_linearity() {
        let f = InterpolatedField::new(one_triangle(), vec![0.2, 0.6, 0.9], InterpMethod::Linear, &same_set(3)).unwrap();
        let s1 = f.subdivide(1).unwrap();
        assert_eq!((s1.mesh().n_triangles(), s1.mesh().n_vertices()), (4, 6));
        let s2 = f.subdivide(2).unwrap();
        assert_eq!(s2.mesh().n_triangles(), 16);
        assert_eq!(&s2.values()[..3], f.values());
        for p in [[0.1, 0.1], [0.3, 0.6], [0.7, 0.2], [0.0, 0.5]] {
            let (t, w) = f.mesh().locate(p).unwrap();
            let direct = f.value_in(t, w).unwrap();
            let via = s2.values_at(p)[0].1;
            assert!((direct - via).abs() < 1e-14);
        }
        let same = f.subdivide(0).unwrap();
        assert_eq!(same.values(), f.values());
    }

    #[test]
    fn needle_triangle_absent_from_step_output() {
        let mesh = Triangulation::square_lattice(3, 2.0).unwrap();
        let mut values = vec![0.95; 9];
        values[0] = 0.0;
        let f = InterpolatedField::new(mesh, values, InterpMethod::Step, &same_set(9)).unwrap();
        let set = extract_credible_set(&f, 0.1).unwrap();
        for (t, tri) in f.mesh().triangles().iter().enumerate() {
            if tri.contains(&0) {
                assert_eq!(set.classes[t], TriangleClass::Pruned);
                assert!(set.polygons.iter().all(|(pt, _)| *pt != t));
            }
        }
    }
}
