use std::collections::HashMap;
use std::io::{self, Write};

use rand::Rng;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::scalar::Real;

use super::domain::{winding_inside, Domain2D};
use super::GeometryError;

/// A boundary edge with its outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge<T> {
    pub nodes: [usize; 2],
    pub normal: [T; 2],
    pub length: T,
}

/// Conforming triangulation with counter-clockwise triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge<T>>,
    on_boundary: Vec<bool>,
    // (triangle, triangle, shared edge length) for interior edges
    interior_edges: Vec<(usize, usize, T)>,
}

/// Shape statistics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuality<T> {
    pub min_angle_deg: T,
    pub max_edge: T,
    pub min_area: T,
}

impl<T: Real> Mesh2D<T> {
    /// Builds a mesh from raw parts, orienting triangles counter-clockwise.
    pub fn from_parts(
        vertices: Vec<[T; 2]>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<Self, GeometryError> {
        for t in triangles.iter_mut() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(GeometryError::Meshing("triangle references a missing vertex".into()));
            }
            let a = signed_area(&vertices, t);
            if a == T::zero() {
                return Err(GeometryError::Meshing(format!("degenerate triangle {t:?}")));
            }
            if a < T::zero() {
                t.swap(1, 2);
            }
        }
        let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (i, j) = (t[e], t[(e + 1) % 3]);
                edges.entry((i.min(j), i.max(j))).or_default().push((k, e));
            }
        }
        let mut boundary_edges = Vec::new();
        let mut interior_edges = Vec::new();
        let mut on_boundary = vec![false; vertices.len()];
        let mut keys: Vec<_> = edges.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let owners = &edges[&key];
            let (i, j) = key;
            let d = [vertices[j][0] - vertices[i][0], vertices[j][1] - vertices[i][1]];
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            match owners.as_slice() {
                [(k, e)] => {
                    // ccw triangle: outward normal of edge (a → b) is (dy, −dx)
                    let t = triangles[*k];
                    let (a, b) = (t[*e], t[(*e + 1) % 3]);
                    let dd = [vertices[b][0] - vertices[a][0], vertices[b][1] - vertices[a][1]];
                    boundary_edges.push(BoundaryEdge {
                        nodes: [a, b],
                        normal: [dd[1] / len, -dd[0] / len],
                        length: len,
                    });
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
                [(k1, _), (k2, _)] => interior_edges.push((*k1, *k2, len)),
                _ => {
                    return Err(GeometryError::Meshing(format!(
                        "edge {key:?} is shared by more than two triangles"
                    )))
                }
            }
        }
        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            on_boundary,
            interior_edges,
        })
    }

    /// Structured `nx × ny` grid of the rectangle split along one diagonal.
    pub fn structured_rectangle(
        lo: [T; 2],
        hi: [T; 2],
        nx: usize,
        ny: usize,
    ) -> Result<Self, GeometryError> {
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    lo[0] + (hi[0] - lo[0]) * T::from_count(i) / T::from_count(nx),
                    lo[1] + (hi[1] - lo[1]) * T::from_count(j) / T::from_count(ny),
                ]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::from_parts(vertices, triangles)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge<T>] {
        &self.boundary_edges
    }

    pub fn is_boundary_node(&self, i: usize) -> bool {
        self.on_boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.on_boundary
    }

    /// Interior edges as `(triangle, triangle, length)`.
    pub fn interior_edges(&self) -> &[(usize, usize, T)] {
        &self.interior_edges
    }

    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, t: usize) -> T {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn areas(&self) -> Vec<T> {
        (0..self.triangles.len()).map(|t| self.area(t)).collect()
    }

    pub fn total_area(&self) -> T {
        self.areas().iter().fold(T::zero(), |a, b| a + *b)
    }

    pub fn centroid(&self, t: usize) -> [T; 2] {
        let tri = self.triangles[t];
        let third = T::one() / T::lit(3.0);
        let mut c = [T::zero(); 2];
        for &i in &tri {
            c[0] += self.vertices[i][0] * third;
            c[1] += self.vertices[i][1] * third;
        }
        c
    }

    /// Gradients of the three P1 basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[T; 2]; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let twice = T::lit(2.0) * self.area(t);
        [
            [(b[1] - c[1]) / twice, (c[0] - b[0]) / twice],
            [(c[1] - a[1]) / twice, (a[0] - c[0]) / twice],
            [(a[1] - b[1]) / twice, (b[0] - a[0]) / twice],
        ]
    }

    /// Gradient of the P1 interpolant of nodal values `u` on triangle `t`.
    pub fn gradient(&self, t: usize, u: &[T]) -> [T; 2] {
        let g = self.basis_gradients(t);
        let tri = self.triangles[t];
        let mut out = [T::zero(); 2];
        for k in 0..3 {
            out[0] += u[tri[k]] * g[k][0];
            out[1] += u[tri[k]] * g[k][1];
        }
        out
    }

    pub fn quality(&self) -> MeshQuality<T> {
        let mut min_angle = T::infinity();
        let mut max_edge = T::zero();
        let mut min_area = T::infinity();
        for (k, t) in self.triangles.iter().enumerate() {
            let p = t.map(|i| self.vertices[i]);
            let len = |a: [T; 2], b: [T; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            let e = [len(p[1], p[2]), len(p[2], p[0]), len(p[0], p[1])];
            for i in 0..3 {
                max_edge = max_edge.max(e[i]);
                let (a, b, c) = (e[i], e[(i + 1) % 3], e[(i + 2) % 3]);
                let cosang = ((b * b + c * c - a * a) / (T::lit(2.0) * b * c))
                    .max(-T::one())
                    .min(T::one());
                min_angle = min_angle.min(cosang.acos());
            }
            min_area = min_area.min(self.area(k));
        }
        MeshQuality {
            min_angle_deg: min_angle.to_degrees(),
            max_edge,
            min_area,
        }
    }

    /// Checks the admissibility rules for target size `h`: positive areas, minimum
    /// angle of 20 degrees and edges no longer than `1.5 h`.
    pub fn check_admissible(&self, h: T) -> Result<MeshQuality<T>, GeometryError> {
        let q = self.quality();
        if !(q.min_area > T::zero()) || q.min_angle_deg < T::lit(20.0) || q.max_edge > T::lit(1.5) * h {
            return Err(GeometryError::Meshing(format!(
                "quality check failed: min angle {:.2} deg, max edge {:.4} (h = {}), min area {:e}",
                q.min_angle_deg.as_f64(),
                q.max_edge.as_f64(),
                h,
                q.min_area.as_f64()
            )));
        }
        Ok(q)
    }

    /// Perimeter of a union of cells relative to the domain: total length of interior
    /// edges separating the set from its complement.
    pub fn relative_perimeter(&self, cells: &[bool]) -> T {
        self.interior_edges
            .iter()
            .filter(|(a, b, _)| cells[*a] != cells[*b])
            .fold(T::zero(), |acc, (_, _, l)| acc + *l)
    }

    /// `|E|^{1/2} / P(E; Ω)` for a union of cells `E`.
    pub fn isoperimetric_ratio(&self, cells: &[bool]) -> T {
        let area = (0..self.triangles.len())
            .filter(|&t| cells[t])
            .fold(T::zero(), |a, t| a + self.area(t));
        let per = self.relative_perimeter(cells);
        if per == T::zero() {
            return T::infinity();
        }
        area.sqrt() / per
    }

    /// Plain-text export:
    ///
    /// ```text
    /// vertices <n>
    /// <x> <y> <boundary 0|1>      (n lines)
    /// triangles <m>
    /// <i> <j> <k>                 (m lines, counter-clockwise, 0-based)
    /// ```
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for (v, b) in self.vertices.iter().zip(&self.on_boundary) {
            writeln!(w, "{:e} {:e} {}", v[0].as_f64(), v[1].as_f64(), u8::from(*b))?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

fn signed_area<T: Real>(v: &[[T; 2]], t: &[usize; 3]) -> T {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    T::lit(0.5) * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Triangulates a convex domain with target edge length `h`.
///
/// Boundary nodes are placed at equal arclength (spacing ≤ h) on every piece, the
/// interior is filled with a hexagonal lattice of spacing `h` kept at least `0.6 h` away
/// from the boundary, and the Delaunay triangulation of the point set is smoothed by
/// a few Laplacian sweeps of the interior nodes.
pub fn triangulate<T: Real>(dom: &Domain2D<T>, h: T) -> Result<Mesh2D<T>, GeometryError> {
    if !(h > T::zero()) || h >= dom.diameter() / T::lit(4.0) {
        return Err(GeometryError::InvalidParameters(format!(
            "mesh size {h} must lie in (0, diameter/4)"
        )));
    }
    if !dom.convex() {
        return Err(GeometryError::NonConvex);
    }
    let hf = h.as_f64();
    let boundary: Vec<[f64; 2]> = dom
        .boundary_polyline(h)
        .iter()
        .map(|p| [p[0].as_f64(), p[1].as_f64()])
        .collect();
    let fine: Vec<[f64; 2]> = dom
        .boundary_polyline(h / T::lit(16.0))
        .iter()
        .map(|p| [p[0].as_f64(), p[1].as_f64()])
        .collect();
    let nb = boundary.len();
    let c = dom.center().map(|x| x.as_f64());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &fine {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let dy = hf * 3f64.sqrt() / 2.0;
    let mut points = boundary.clone();
    let jmin = ((lo[1] - c[1]) / dy).floor() as i64;
    let jmax = ((hi[1] - c[1]) / dy).ceil() as i64;
    let imin = ((lo[0] - c[0]) / hf).floor() as i64 - 1;
    let imax = ((hi[0] - c[0]) / hf).ceil() as i64 + 1;
    let grid = SegmentGrid::new(&fine, hf);
    for j in jmin..=jmax {
        let y = c[1] + j as f64 * dy;
        let shift = if j.rem_euclid(2) == 1 { 0.5 * hf } else { 0.0 };
        for i in imin..=imax {
            let p = [c[0] + i as f64 * hf + shift, y];
            if winding_inside(&fine, &p) && grid.distance(&fine, &p) >= 0.6 * hf {
                points.push(p);
            }
        }
    }
    let mut tris = delaunay(&points)?;
    for _ in 0..6 {
        smooth(&mut points, &tris, nb);
        tris = delaunay(&points)?;
    }
    let tris = drop_slivers(&points, tris, nb, hf);
    let verts: Vec<[T; 2]> = points.iter().map(|p| [T::lit(p[0]), T::lit(p[1])]).collect();
    let mesh = Mesh2D::from_parts(verts, tris)?;
    mesh.check_admissible(h)?;
    Ok(mesh)
}

fn delaunay(points: &[[f64; 2]]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let pts: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let dt = DelaunayTriangulation::<Point2<f64>>::bulk_load_stable(pts)
        .map_err(|e| GeometryError::Meshing(format!("delaunay insertion failed: {e:?}")))?;
    if dt.num_vertices() < points.len() {
        return Err(GeometryError::Meshing("duplicate mesh points".into()));
    }
    Ok(dt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect())
}

fn smooth(points: &mut [[f64; 2]], tris: &[[usize; 3]], fixed: usize) {
    let mut sum = vec![[0.0f64; 2]; points.len()];
    let mut count = vec![0usize; points.len()];
    for t in tris {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    let (i, j) = (t[a], t[b]);
                    sum[i][0] += points[j][0];
                    sum[i][1] += points[j][1];
                    count[i] += 1;
                }
            }
        }
    }
    for i in fixed..points.len() {
        if count[i] > 0 {
            points[i] = [sum[i][0] / count[i] as f64, sum[i][1] / count[i] as f64];
        }
    }
}

// Removes flat triangles spanned by three boundary nodes on a straight edge.
fn drop_slivers(points: &[[f64; 2]], tris: Vec<[usize; 3]>, nb: usize, h: f64) -> Vec<[usize; 3]> {
    tris.into_iter()
        .filter(|t| {
            let all_boundary = t.iter().all(|&i| i < nb);
            !(all_boundary && signed_area(points, t).abs() < 1e-10 * h * h)
        })
        .collect()
}

/// Uniform bucket grid over boundary segments for distance queries.
struct SegmentGrid {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl SegmentGrid {
    fn new(poly: &[[f64; 2]], cell: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in poly {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let nx = ((hi[0] - lo[0]) / cell).ceil() as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        let n = poly.len();
        for s in 0..n {
            let (a, b) = (poly[s], poly[(s + 1) % n]);
            let i0 = ((a[0].min(b[0]) - lo[0]) / cell).floor() as usize;
            let i1 = ((a[0].max(b[0]) - lo[0]) / cell).floor() as usize;
            let j0 = ((a[1].min(b[1]) - lo[1]) / cell).floor() as usize;
            let j1 = ((a[1].max(b[1]) - lo[1]) / cell).floor() as usize;
            for j in j0..=j1.min(ny - 1) {
                for i in i0..=i1.min(nx - 1) {
                    buckets[j * nx + i].push(s);
                }
            }
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    /// Distance to the polyline, exact when below one cell width, else a lower bound
    /// of at least one cell width.
    fn distance(&self, poly: &[[f64; 2]], p: &[f64; 2]) -> f64 {
        let n = poly.len();
        let ci = ((p[0] - self.origin[0]) / self.cell).floor() as i64;
        let cj = ((p[1] - self.origin[1]) / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        for j in (cj - 1)..=(cj + 1) {
            for i in (ci - 1)..=(ci + 1) {
                if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                    continue;
                }
                for &s in &self.buckets[j as usize * self.nx + i as usize] {
                    best = best.min(segment_distance(p, &poly[s], &poly[(s + 1) % n]));
                }
            }
        }
        best.min(self.cell)
    }
}

fn segment_distance(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Worst (largest) isoperimetric ratio `|E|^{1/2}/P(E; Ω)` found over random cell sets
/// with `|E| ≤ |Ω|/2`.
///
/// Candidates are grown as connected clusters around random seeds and cut by random
/// half-planes through random points.
pub fn relative_isoperimetric_check<T: Real, R: Rng>(
    mesh: &Mesh2D<T>,
    trials: usize,
    rng: &mut R,
) -> T {
    let nt = mesh.num_triangles();
    let areas = mesh.areas();
    let half = mesh.total_area() * T::lit(0.5);
    let mut adjacency = vec![Vec::new(); nt];
    for (a, b, _) in mesh.interior_edges() {
        adjacency[*a].push(*b);
        adjacency[*b].push(*a);
    }
    let centroids: Vec<[T; 2]> = (0..nt).map(|t| mesh.centroid(t)).collect();
    let mut worst = T::zero();
    for trial in 0..trials {
        let mut cells = vec![false; nt];
        if trial % 2 == 0 {
            // cluster grown by breadth-first search up to a random area
            let target = half * T::lit(rng.gen_range(0.0..1.0));
            let seed = rng.gen_range(0..nt);
            let mut queue = std::collections::VecDeque::from([seed]);
            let mut area = T::zero();
            cells[seed] = true;
            area += areas[seed];
            while let Some(t) = queue.pop_front() {
                for &n in &adjacency[t] {
                    if !cells[n] && area + areas[n] <= target {
                        cells[n] = true;
                        area += areas[n];
                        queue.push_back(n);
                    }
                }
            }
        } else {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let anchor = centroids[rng.gen_range(0..nt)];
            let dir = [T::lit(th.cos()), T::lit(th.sin())];
            let mut area = T::zero();
            for t in 0..nt {
                let c = centroids[t];
                if (c[0] - anchor[0]) * dir[0] + (c[1] - anchor[1]) * dir[1] > T::zero() {
                    cells[t] = true;
                    area += areas[t];
                }
            }
            if area > half {
                cells.iter_mut().for_each(|c| *c = !*c);
            }
        }
        if cells.iter().any(|c| *c) {
            worst = worst.max(mesh.isoperimetric_ratio(&cells));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    type D = Domain2D<f64>;

    #[test]
    fn structured_square_is_admissible() {
        let m = Mesh2D::<f64>::structured_rectangle([0.0, 0.0], [1.0, 1.0], 4, 4).unwrap();
        assert_eq!(m.num_triangles(), 32);
        let q = m.check_admissible(0.25).unwrap();
        assert!((q.min_angle_deg - 45.0).abs() < 1e-9);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert_eq!(m.boundary_edges().len(), 16);
    }

    #[test]
    fn disk_mesh_area_and_quality() {
        let d = D::disk(1.0).unwrap();
        let m = triangulate(&d, 0.1).unwrap();
        assert!((m.total_area() - PI).abs() < 0.01 * PI);
        assert!(m.areas().iter().all(|a| *a > 0.0));
        for e in m.boundary_edges() {
            let p = m.vertices()[e.nodes[0]];
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polygon_mesh_reproduces_area() {
        let d = D::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]])
            .unwrap();
        let m = triangulate(&d, 0.1).unwrap();
        assert!((m.total_area() - d.area()).abs() < 1e-12);
    }

    #[test]
    fn half_disk_split() {
        let d = D::disk(1.0).unwrap();
        let m = triangulate(&d, 0.05).unwrap();
        let cells: Vec<bool> = (0..m.num_triangles()).map(|t| m.centroid(t)[1] < 0.0).collect();
        let ratio = m.isoperimetric_ratio(&cells);
        let exact = (PI / 2.0).sqrt() / 2.0;
        assert!((ratio - exact).abs() < 0.01 * exact, "{ratio} vs {exact}");
    }

    #[test]
    fn export_format() {
        let m = Mesh2D::<f64>::structured_rectangle([0.0, 0.0], [1.0, 1.0], 1, 1).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("vertices 4\n"));
        assert!(s.contains("triangles 2\n"));
    }
}
