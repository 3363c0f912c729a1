//! Triangulations, lumped vertex areas and point location.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Barycentric tolerance used when deciding whether a point lies in a triangle.
const LOCATE_TOL: f64 = 1e-10;

/// A planar triangulation with counterclockwise triangles.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    triangle_areas: Vec<f64>,
    vertex_areas: Vec<f64>,
    locator: OnceLock<PointLocator>,
    neighbors: OnceLock<Vec<[Option<usize>; 3]>>,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Validates indices, reorients clockwise triangles and rejects
    /// zero-area triangles.
    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::DegenerateMesh("non-finite vertex coordinate".into()));
        }
        let scale = bbox_diagonal(&vertices);
        let mut triangle_areas = Vec::with_capacity(triangles.len());
        let mut vertex_areas = vec![0.0; n];
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::DegenerateMesh(format!("triangle {t} references a vertex outside 0..{n}")));
            }
            let mut area = signed_area(&vertices, tri);
            if area < 0.0 {
                tri.swap(1, 2);
                area = -area;
            }
            if !(area > 1e-14 * scale * scale) {
                return Err(Error::DegenerateMesh(format!("triangle {t} has zero area")));
            }
            triangle_areas.push(area);
            for &v in tri.iter() {
                vertex_areas[v] += area / 3.0;
            }
        }
        Ok(Self { vertices, triangles, triangle_areas, vertex_areas, locator: OnceLock::new(), neighbors: OnceLock::new() })
    }

    /// Regular `nx` by `ny` node lattice over a rectangle; each cell is split
    /// into two triangles along the same diagonal. Node `(i, j)` has index `j * nx + i`.
    pub fn lattice(nx: usize, ny: usize, x_range: [f64; 2], y_range: [f64; 2]) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::DegenerateMesh(format!("a {nx}x{ny} lattice has no cells")));
        }
        let mut vertices = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = y_range[0] + (y_range[1] - y_range[0]) * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let x = x_range[0] + (x_range[1] - x_range[0]) * i as f64 / (nx - 1) as f64;
                vertices.push([x, y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let a = j * nx + i;
                let (b, c, d) = (a + 1, a + nx, a + nx + 1);
                triangles.push([a, b, d]);
                triangles.push([a, d, c]);
            }
        }
        Self::new(vertices, triangles)
    }

    /// Square lattice with `nodes` per side over `[0, side]^2`.
    pub fn square_lattice(nodes: usize, side: f64) -> Result<Self> {
        Self::lattice(nodes, nodes, [0.0, side], [0.0, side])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        self.triangle_areas[t]
    }

    /// Lumped (barycentric) vertex areas: one third of each incident triangle.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    pub fn total_area(&self) -> f64 {
        self.triangle_areas.iter().sum()
    }

    /// Diagonal of the vertex bounding box.
    pub fn diameter(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }

    pub fn longest_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |e| (t[e], t[(e + 1) % 3])))
            .map(|(a, b)| dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Unique undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |e| (t[e].min(t[(e + 1) % 3]), t[e].max(t[(e + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// For each triangle, the triangle across edge `e = (v[e], v[(e+1) % 3])`.
    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        self.neighbors.get_or_init(|| {
            let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
            let mut out = vec![[None; 3]; self.triangles.len()];
            for (t, tri) in self.triangles.iter().enumerate() {
                for e in 0..3 {
                    let (a, b) = (tri[e], tri[(e + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    if let Some(&(t2, e2)) = owner.get(&key) {
                        out[t][e] = Some(t2);
                        out[t2][e2] = Some(t);
                    } else {
                        owner.insert(key, (t, e));
                    }
                }
            }
            out
        })
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let det = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1]);
        let w0 = ((b[1] - c[1]) * (p[0] - c[0]) + (c[0] - b[0]) * (p[1] - c[1])) / det;
        let w1 = ((c[1] - a[1]) * (p[0] - c[0]) + (a[0] - c[0]) * (p[1] - c[1])) / det;
        [w0, w1, 1.0 - w0 - w1]
    }

    /// Point at barycentric coordinates `w` in triangle `t`.
    pub fn point_at(&self, t: usize, w: [f64; 3]) -> [f64; 2] {
        let tri = self.triangles[t];
        let mut p = [0.0; 2];
        for k in 0..3 {
            p[0] += w[k] * self.vertices[tri[k]][0];
            p[1] += w[k] * self.vertices[tri[k]][1];
        }
        p
    }

    /// The triangle containing `p` and the (clamped, normalized) barycentric
    /// weights, or `None` outside the mesh. Points on shared edges resolve to
    /// the lowest-indexed containing triangle.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        self.containing(p).into_iter().next()
    }

    /// Every triangle containing `p` (within a small tolerance), ascending.
    pub fn containing(&self, p: [f64; 2]) -> Vec<(usize, [f64; 3])> {
        let locator = self.locator.get_or_init(|| PointLocator::new(self));
        let mut hits = Vec::new();
        for &t in locator.candidates(p) {
            let w = self.barycentric(t as usize, p);
            if w.iter().all(|&x| x >= -LOCATE_TOL) {
                let mut w = w.map(|x| x.max(0.0));
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                hits.push((t as usize, w));
            }
        }
        hits.sort_by_key(|h| h.0);
        hits
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "vertices": self.vertices, "triangles": self.triangles })
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
        Self::new(file.vertices, file.triangles)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_json()).expect("mesh serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

impl PartialEq for Triangulation {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.triangles == other.triangles
    }
}

fn signed_area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| v[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn bbox(v: &[[f64; 2]]) -> [f64; 4] {
    v.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |b, p| {
        [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
    })
}

fn bbox_diagonal(v: &[[f64; 2]]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let b = bbox(v);
    ((b[2] - b[0]).powi(2) + (b[3] - b[1]).powi(2)).sqrt()
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Debug, Clone)]
struct PointLocator {
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl PointLocator {
    fn new(mesh: &Triangulation) -> Self {
        let b = bbox(&mesh.vertices);
        let side = ((mesh.triangles.len() as f64).sqrt().ceil() as usize).max(1);
        let pad = 1e-9 * bbox_diagonal(&mesh.vertices).max(1e-300);
        let origin = [b[0] - pad, b[1] - pad];
        let cell = [((b[2] - b[0]) + 2.0 * pad) / side as f64, ((b[3] - b[1]) + 2.0 * pad) / side as f64];
        let dims = [side, side];
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); side * side];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let tb = bbox(&tri.map(|v| mesh.vertices[v]));
            let (i0, j0) = cell_of(origin, cell, dims, [tb[0] - pad, tb[1] - pad]);
            let (i1, j1) = cell_of(origin, cell, dims, [tb[2] + pad, tb[3] + pad]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    lists[j * side + i].push(t as u32);
                }
            }
        }
        let mut offsets = vec![0];
        let mut items = Vec::new();
        for l in lists {
            items.extend(l);
            offsets.push(items.len());
        }
        Self { origin, cell, dims, offsets, items }
    }

    fn candidates(&self, p: [f64; 2]) -> &[u32] {
        let inside = |k: usize| {
            let rel = (p[k] - self.origin[k]) / self.cell[k];
            rel >= 0.0 && rel <= self.dims[k] as f64
        };
        if !inside(0) || !inside(1) {
            return &[];
        }
        let (i, j) = cell_of(self.origin, self.cell, self.dims, p);
        let c = j * self.dims[0] + i;
        &self.items[self.offsets[c]..self.offsets[c + 1]]
    }
}

fn cell_of(origin: [f64; 2], cell: [f64; 2], dims: [usize; 2], p: [f64; 2]) -> (usize, usize) {
    let idx = |k: usize| (((p[k] - origin[k]) / cell[k]).floor().max(0.0) as usize).min(dims[k] - 1);
    (idx(0), idx(1))
}
