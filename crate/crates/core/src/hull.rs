//! Convex hulls of small point clouds in ℝ³ and ℝ², with their intrinsic measures.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

pub type Point3 = [f64; 3];
pub type Point2 = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("input is flat: affine rank {rank}")]
    FlatInput { rank: usize },
    #[error("input contains a non-finite coordinate")]
    NonFinite,
    #[error("hull faces do not close up into a manifold")]
    Inconsistent,
}

/// Points closer than this (relative to the cloud diameter) are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// Adjacent faces whose planes agree to this tolerance (relative to diameter) are merged.
pub const COPLANAR_TOL: f64 = 1e-9;

/// A hull edge and the two faces it separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub faces: [usize; 2],
}

/// Closed convex polyhedron. Faces are counterclockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeshMeasures {
    pub volume: f64,
    pub area: f64,
    pub mean_width: f64,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
}

impl MeshMeasures {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count as i64 + self.face_count as i64
    }
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn len3(a: Point3) -> f64 {
    dot3(a, a).sqrt()
}

fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn diameter<const D: usize>(pts: &[[f64; D]]) -> f64 {
    let mut d2 = 0.0f64;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d2 = d2.max(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum());
        }
    }
    d2.sqrt()
}

fn dedup<const D: usize>(points: &[[f64; D]], tol: f64) -> Vec<[f64; D]> {
    let mut out: Vec<[f64; D]> = Vec::with_capacity(points.len());
    for p in points {
        let seen = out
            .iter()
            .any(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= tol);
        if !seen {
            out.push(*p);
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
}

impl Tri {
    fn new(pts: &[Point3], v: [usize; 3]) -> Self {
        let n = cross(sub(pts[v[1]], pts[v[0]]), sub(pts[v[2]], pts[v[0]]));
        let normal = scale(n, 1.0 / len3(n));
        Tri {
            v,
            normal,
            offset: dot3(normal, pts[v[0]]),
        }
    }

    fn distance(&self, p: Point3) -> f64 {
        dot3(self.normal, p) - self.offset
    }

    fn directed_edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

/// Picks four affinely independent points, or reports the affine rank of the cloud.
fn initial_simplex(pts: &[Point3], tol: f64) -> Result<[usize; 4], HullError> {
    if pts.is_empty() {
        return Err(HullError::FlatInput { rank: 0 });
    }
    let i0 = 0;
    let far = |score: &dyn Fn(Point3) -> f64| {
        (0..pts.len())
            .map(|i| (i, score(pts[i])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty")
    };
    let (i1, d1) = far(&|p| len3(sub(p, pts[i0])));
    if d1 <= tol {
        return Err(HullError::FlatInput { rank: 0 });
    }
    let axis = scale(sub(pts[i1], pts[i0]), 1.0 / d1);
    let (i2, d2) = far(&|p| len3(cross(axis, sub(p, pts[i0]))));
    if d2 <= tol {
        return Err(HullError::FlatInput { rank: 1 });
    }
    let n = cross(sub(pts[i1], pts[i0]), sub(pts[i2], pts[i0]));
    let n = scale(n, 1.0 / len3(n));
    let (i3, d3) = far(&|p| dot3(n, sub(p, pts[i0])).abs());
    if d3 <= tol {
        return Err(HullError::FlatInput { rank: 2 });
    }
    Ok([i0, i1, i2, i3])
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Incremental convex hull with coplanar faces merged and collinear vertices dropped.
pub fn convex_hull_3d(points: &[Point3]) -> Result<PolyMesh, HullError> {
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(HullError::NonFinite);
    }
    let scale_len = diameter(points).max(f64::MIN_POSITIVE);
    let pts = dedup(points, DEDUP_TOL * scale_len);
    let eps = DEDUP_TOL * scale_len;
    let simplex = initial_simplex(&pts, eps)?;

    let tris = incremental(&pts, simplex, eps);
    merge_faces(&pts, &tris, COPLANAR_TOL * scale_len)
}

fn incremental(pts: &[Point3], s: [usize; 4], eps: f64) -> Vec<Tri> {
    let inside = scale(
        s.iter()
            .fold([0.0; 3], |acc, &i| [acc[0] + pts[i][0], acc[1] + pts[i][1], acc[2] + pts[i][2]]),
        0.25,
    );
    let mut tris: Vec<Tri> = [[s[0], s[1], s[2]], [s[0], s[1], s[3]], [s[0], s[2], s[3]], [s[1], s[2], s[3]]]
        .into_iter()
        .map(|[a, b, c]| {
            let t = Tri::new(pts, [a, b, c]);
            if t.distance(inside) > 0.0 {
                Tri::new(pts, [a, c, b])
            } else {
                t
            }
        })
        .collect();

    for (p_idx, &p) in pts.iter().enumerate() {
        if s.contains(&p_idx) {
            continue;
        }
        let visible: Vec<bool> = tris.iter().map(|t| t.distance(p) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let visible_edges: HashSet<(usize, usize)> = tris
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| v)
            .flat_map(|(t, _)| t.directed_edges())
            .collect();
        let mut next: Vec<Tri> = tris
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(t, _)| *t)
            .collect();
        // horizon edges keep their orientation from the visible side
        let mut horizon: Vec<(usize, usize)> = visible_edges
            .iter()
            .filter(|&&(a, b)| !visible_edges.contains(&(b, a)))
            .copied()
            .collect();
        horizon.sort_unstable();
        next.extend(horizon.into_iter().map(|(a, b)| Tri::new(pts, [a, b, p_idx])));
        tris = next;
    }
    tris
}

fn merge_faces(pts: &[Point3], tris: &[Tri], tol: f64) -> Result<PolyMesh, HullError> {
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for e in t.directed_edges() {
            edge_owner.insert(e, i);
        }
    }
    let mut uf = UnionFind((0..tris.len()).collect());
    for (i, t) in tris.iter().enumerate() {
        for (a, b) in t.directed_edges() {
            let j = *edge_owner.get(&(b, a)).ok_or(HullError::Inconsistent)?;
            let other = tris[j];
            let apex = other.v.iter().find(|&&v| v != a && v != b).copied().expect("triangle");
            if dot3(t.normal, other.normal) > 0.0 && t.distance(pts[apex]).abs() <= tol {
                uf.union(i, j);
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for i in 0..tris.len() {
        let root = uf.find(i);
        let g = *group_of.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }

    let mut cycles = Vec::with_capacity(groups.len());
    for group in &groups {
        let directed: HashSet<(usize, usize)> =
            group.iter().flat_map(|&i| tris[i].directed_edges()).collect();
        let boundary: HashMap<usize, usize> = directed
            .iter()
            .filter(|&&(a, b)| !directed.contains(&(b, a)))
            .map(|&(a, b)| (a, b))
            .collect();
        let start = *boundary.keys().min().ok_or(HullError::Inconsistent)?;
        let mut cycle = vec![start];
        let mut cur = boundary[&start];
        while cur != start {
            if cycle.len() > boundary.len() {
                return Err(HullError::Inconsistent);
            }
            cycle.push(cur);
            cur = *boundary.get(&cur).ok_or(HullError::Inconsistent)?;
        }
        if cycle.len() != boundary.len() {
            return Err(HullError::Inconsistent);
        }
        cycles.push(cycle);
    }

    let corners = corner_vertices(pts, &cycles);
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(cycles.len());
    for cycle in &cycles {
        let face: Vec<usize> = cycle
            .iter()
            .filter(|v| corners.contains(v))
            .map(|&v| {
                *remap.entry(v).or_insert_with(|| {
                    vertices.push(pts[v]);
                    vertices.len() - 1
                })
            })
            .collect();
        if face.len() < 3 {
            return Err(HullError::Inconsistent);
        }
        faces.push(face);
    }
    let edges = build_edges(&faces)?;
    Ok(PolyMesh {
        vertices,
        faces,
        edges,
    })
}

/// Vertices that are a genuine corner of at least one face boundary.
fn corner_vertices(pts: &[Point3], cycles: &[Vec<usize>]) -> HashSet<usize> {
    let mut corners = HashSet::new();
    for cycle in cycles {
        let k = cycle.len();
        for i in 0..k {
            let (prev, v, next) = (cycle[(i + k - 1) % k], cycle[i], cycle[(i + 1) % k]);
            let e1 = sub(pts[v], pts[prev]);
            let e2 = sub(pts[next], pts[v]);
            if len3(cross(e1, e2)) > COPLANAR_TOL * len3(e1) * len3(e2) {
                corners.insert(v);
            }
        }
    }
    corners
}

fn build_edges(faces: &[Vec<usize>]) -> Result<Vec<Edge>, HullError> {
    let mut by_key: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, face) in faces.iter().enumerate() {
        for i in 0..face.len() {
            let (a, b) = (face[i], face[(i + 1) % face.len()]);
            by_key.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    let mut edges: Vec<Edge> = by_key
        .into_iter()
        .map(|((a, b), fs)| match fs[..] {
            [f1, f2] => Ok(Edge {
                vertices: [a, b],
                faces: [f1, f2],
            }),
            _ => Err(HullError::Inconsistent),
        })
        .collect::<Result<_, _>>()?;
    edges.sort_unstable_by_key(|e| e.vertices);
    Ok(edges)
}

/// Newell normal of a face: outward, with length twice the face area.
pub fn face_normal(mesh: &PolyMesh, face: usize) -> Point3 {
    let f = &mesh.faces[face];
    let mut n = [0.0; 3];
    for i in 0..f.len() {
        let p = mesh.vertices[f[i]];
        let q = mesh.vertices[f[(i + 1) % f.len()]];
        n[0] += (p[1] - q[1]) * (p[2] + q[2]);
        n[1] += (p[2] - q[2]) * (p[0] + q[0]);
        n[2] += (p[0] - q[0]) * (p[1] + q[1]);
    }
    n
}

/// Volume by centroid fan, area by Newell normals, mean width by the edge formula
/// (1/4π) Σ ℓ·θ with θ the exterior dihedral angle.
pub fn mesh_measures(mesh: &PolyMesh) -> MeshMeasures {
    let nv = mesh.vertices.len() as f64;
    let centroid = scale(
        mesh.vertices
            .iter()
            .fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]),
        1.0 / nv,
    );
    let normals: Vec<Point3> = (0..mesh.faces.len()).map(|f| face_normal(mesh, f)).collect();

    let mut volume = 0.0;
    for face in &mesh.faces {
        let a = sub(mesh.vertices[face[0]], centroid);
        for w in face[1..].windows(2) {
            let b = sub(mesh.vertices[w[0]], centroid);
            let c = sub(mesh.vertices[w[1]], centroid);
            volume += dot3(a, cross(b, c)) / 6.0;
        }
    }
    let area = normals.iter().map(|&n| len3(n) / 2.0).sum();
    let mean_width = mesh
        .edges
        .iter()
        .map(|e| {
            let length = len3(sub(mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]));
            let (n1, n2) = (normals[e.faces[0]], normals[e.faces[1]]);
            length * len3(cross(n1, n2)).atan2(dot3(n1, n2))
        })
        .sum::<f64>()
        / (4.0 * PI);

    MeshMeasures {
        volume,
        area,
        mean_width,
        vertex_count: mesh.vertices.len(),
        edge_count: mesh.edges.len(),
        face_count: mesh.faces.len(),
    }
}

/// Object File Format text for external viewers.
pub fn to_off(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(s, "{} {} {}", mesh.vertices.len(), mesh.faces.len(), mesh.edges.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]).unwrap();
    }
    for f in &mesh.faces {
        write!(s, "{}", f.len()).unwrap();
        for i in f {
            write!(s, " {i}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    pub vertices: Vec<Point2>,
}

fn cross2(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist2(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Andrew's monotone chain; collinear boundary points are dropped.
pub fn convex_hull_2d(points: &[Point2]) -> Result<Polygon2D, HullError> {
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(HullError::NonFinite);
    }
    let scale_len = diameter(points).max(f64::MIN_POSITIVE);
    let mut pts = dedup(points, DEDUP_TOL * scale_len);
    if pts.len() < 3 {
        return Err(HullError::FlatInput { rank: pts.len().saturating_sub(1) });
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    // a turn counts only if it is clearly left of the chord
    let left = |o: Point2, a: Point2, b: Point2| cross2(o, a, b) > 1e-12 * dist2(o, a) * dist2(a, b);

    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
        let base = hull.len();
        for &p in pass {
            while hull.len() >= base + 2 && !left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return Err(HullError::FlatInput { rank: 1 });
    }
    Ok(Polygon2D { vertices: hull })
}

/// (area, perimeter) by the shoelace formula and the edge-length sum.
pub fn polygon_measures(p: &Polygon2D) -> (f64, f64) {
    let v = &p.vertices;
    let k = v.len();
    let mut twice_area = 0.0;
    let mut perimeter = 0.0;
    for i in 0..k {
        let (a, b) = (v[i], v[(i + 1) % k]);
        twice_area += a[0] * b[1] - a[1] * b[0];
        perimeter += dist2(a, b);
    }
    (twice_area / 2.0, perimeter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_frame, project_vertices_3d, sample_stream, sample_unit_vector};

    fn cube_corners() -> Vec<Point3> {
        (0..8)
            .map(|k| [0, 1, 2].map(|j| if k >> j & 1 == 1 { 0.5 } else { -0.5 }))
            .collect()
    }

    fn shadow(seed: u64, i: u64) -> (Vec<f64>, Vec<Point3>) {
        let u = sample_unit_vector(4, &mut sample_stream(seed, i)).unwrap();
        let pts = project_vertices_3d(&build_frame(&u)).unwrap();
        (u.into_inner(), pts)
    }

    /// Brute-force combinatorics: facet planes are supporting planes through three points.
    fn brute_force_counts(pts: &[Point3]) -> (usize, usize, usize) {
        let tol = 1e-9;
        let mut planes: Vec<(Point3, f64)> = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    let n = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                    let l = len3(n);
                    if l < 1e-9 {
                        continue;
                    }
                    let mut n = scale(n, 1.0 / l);
                    let mut d = dot3(n, pts[i]);
                    let side: Vec<f64> = pts.iter().map(|&p| dot3(n, p) - d).collect();
                    let above = side.iter().any(|&s| s > tol);
                    let below = side.iter().any(|&s| s < -tol);
                    if above && below {
                        continue;
                    }
                    if above {
                        n = scale(n, -1.0);
                        d = -d;
                    }
                    if !planes.iter().any(|(m, e)| len3(sub(*m, n)) < 1e-7 && (e - d).abs() < 1e-7) {
                        planes.push((n, d));
                    }
                }
            }
        }
        let on = |p: Point3, (n, d): &(Point3, f64)| (dot3(*n, p) - d).abs() < tol;
        let vertices: Vec<Point3> = pts
            .iter()
            .copied()
            .filter(|&p| {
                let ns: Vec<Point3> = planes.iter().filter(|pl| on(p, pl)).map(|pl| pl.0).collect();
                ns.iter().enumerate().any(|(a, &x)| {
                    ns[a + 1..].iter().enumerate().any(|(b, &y)| {
                        ns[a + b + 2..].iter().any(|&z| dot3(x, cross(y, z)).abs() > 1e-9)
                    })
                })
            })
            .collect();
        let vertices = dedup(&vertices, 1e-12);
        let mut edges = 0;
        for a in 0..planes.len() {
            for b in a + 1..planes.len() {
                let shared = vertices.iter().filter(|&&p| on(p, &planes[a]) && on(p, &planes[b])).count();
                if shared >= 2 {
                    edges += 1;
                }
            }
        }
        (vertices.len(), edges, planes.len())
    }

    #[test]
    fn cube_hull() {
        let m = convex_hull_3d(&cube_corners()).unwrap();
        let mm = mesh_measures(&m);
        assert_eq!((mm.vertex_count, mm.edge_count, mm.face_count), (8, 12, 6));
        assert!((mm.volume - 1.0).abs() < 1e-14);
        assert!((mm.area - 6.0).abs() < 1e-14);
        assert!((mm.mean_width - 1.5).abs() < 1e-14);
    }

    #[test]
    fn tetrahedron_hull() {
        let s = 1.0 / 8f64.sqrt();
        let pts = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
        let mm = mesh_measures(&convex_hull_3d(&pts).unwrap());
        assert_eq!((mm.vertex_count, mm.edge_count, mm.face_count), (4, 6, 4));
        // edge 1, interior dihedral arccos(1/3)
        let expected = 6.0 * (PI - (1.0f64 / 3.0).acos()) / (4.0 * PI);
        assert!((mm.mean_width - expected).abs() < 1e-14);
        assert!((mm.volume - 1.0 / (6.0 * 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn flat_inputs_report_rank() {
        let square = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert_eq!(convex_hull_3d(&square), Err(HullError::FlatInput { rank: 2 }));
        let line = [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]];
        assert_eq!(convex_hull_3d(&line), Err(HullError::FlatInput { rank: 1 }));
        assert_eq!(convex_hull_3d(&[[1.0; 3]; 5]), Err(HullError::FlatInput { rank: 0 }));
        assert_eq!(convex_hull_3d(&[[f64::NAN; 3]; 5]), Err(HullError::NonFinite));
    }

    #[test]
    fn axis_shadow_is_the_unit_cube() {
        let f = build_frame(&crate::geometry::UnitVector::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap());
        let mm = mesh_measures(&convex_hull_3d(&project_vertices_3d(&f).unwrap()).unwrap());
        assert_eq!((mm.vertex_count, mm.edge_count, mm.face_count), (8, 12, 6));
        assert!((mm.mean_width - 1.5).abs() < 1e-14);
    }

    #[test]
    fn generic_shadows_agree_with_brute_force() {
        for i in 0..100 {
            let (_, pts) = shadow(3, i);
            let mm = mesh_measures(&convex_hull_3d(&pts).unwrap());
            let counts = (mm.vertex_count, mm.edge_count, mm.face_count);
            assert_eq!(counts, brute_force_counts(&pts), "sample {i}");
            assert_eq!(counts, (14, 24, 12));
        }
    }

    #[test]
    fn shadow_faces_are_parallelograms() {
        for i in 0..200 {
            let (_, pts) = shadow(4, i);
            let m = convex_hull_3d(&pts).unwrap();
            for face in &m.faces {
                assert_eq!(face.len(), 4);
                let [a, b, c, d] = [0, 1, 2, 3].map(|k| m.vertices[face[k]]);
                assert!(len3(sub(sub(b, a), sub(c, d))) < 1e-12);
            }
        }
    }

    #[test]
    fn hull_contains_inputs_and_faces_are_planar() {
        for i in 0..50 {
            let (_, pts) = shadow(5, i);
            let m = convex_hull_3d(&pts).unwrap();
            let diam = diameter(&pts);
            for f in 0..m.faces.len() {
                let n = face_normal(&m, f);
                let n = scale(n, 1.0 / len3(n));
                let d = dot3(n, m.vertices[m.faces[f][0]]);
                for &v in &m.faces[f] {
                    assert!((dot3(n, m.vertices[v]) - d).abs() <= 1e-9 * diam);
                }
                for &p in &pts {
                    assert!(dot3(n, p) - d <= 1e-9 * diam);
                }
            }
        }
    }

    #[test]
    fn hull_is_idempotent() {
        for i in 0..50 {
            let (_, pts) = shadow(6, i);
            let m = convex_hull_3d(&pts).unwrap();
            let again = convex_hull_3d(&m.vertices).unwrap();
            let mut a = m.vertices.clone();
            let mut b = again.vertices.clone();
            a.sort_by(|p, q| p.partial_cmp(q).unwrap());
            b.sort_by(|p, q| p.partial_cmp(q).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn off_dump_layout() {
        let off = to_off(&convex_hull_3d(&cube_corners()).unwrap());
        let lines: Vec<&str> = off.lines().collect();
        assert_eq!(lines[0], "OFF");
        assert_eq!(lines[1], "8 6 12");
        assert_eq!(lines.len(), 2 + 8 + 6);
        assert!(lines[10].starts_with("4 "));
    }

    #[test]
    fn square_with_center_and_duplicates() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [0.5, 0.0]];
        let p = convex_hull_2d(&pts).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(polygon_measures(&p), (1.0, 4.0));
        assert_eq!(
            convex_hull_2d(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]),
            Err(HullError::FlatInput { rank: 1 })
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rotation(a: f64, b: f64, c: f64) -> [Point3; 3] {
            let (sa, ca) = a.sin_cos();
            let (sb, cb) = b.sin_cos();
            let (sc, cc) = c.sin_cos();
            let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
            let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
            let rx = [[1.0, 0.0, 0.0], [0.0, cc, -sc], [0.0, sc, cc]];
            let mul = |p: [Point3; 3], q: [Point3; 3]| {
                [0, 1, 2].map(|i| [0, 1, 2].map(|j| (0..3).map(|k| p[i][k] * q[k][j]).sum()))
            };
            mul(mul(rz, ry), rx)
        }

        proptest! {
            #[test]
            fn euler_characteristic_is_two(pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 4..40)) {
                if let Ok(m) = convex_hull_3d(&pts) {
                    prop_assert_eq!(mesh_measures(&m).euler_characteristic(), 2);
                }
            }

            #[test]
            fn measures_are_rotation_invariant(i in 0u64..10_000, a in 0.0..6.3f64, b in 0.0..6.3f64, c in 0.0..6.3f64) {
                let (_, pts) = shadow(8, i);
                let r = rotation(a, b, c);
                let turned: Vec<Point3> = pts.iter().map(|p| r.map(|row| dot3(row, *p))).collect();
                let m1 = mesh_measures(&convex_hull_3d(&pts).unwrap());
                let m2 = mesh_measures(&convex_hull_3d(&turned).unwrap());
                prop_assert!((m1.volume - m2.volume).abs() < 1e-9 * m1.volume);
                prop_assert!((m1.area - m2.area).abs() < 1e-9 * m1.area);
                prop_assert!((m1.mean_width - m2.mean_width).abs() < 1e-9 * m1.mean_width);
            }

            #[test]
            fn polygon_measures_survive_quarter_turns(pts in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 3..30)) {
                if let Ok(p) = convex_hull_2d(&pts) {
                    let turned: Vec<Point2> = pts.iter().map(|q| [-q[1], q[0]]).collect();
                    let (a1, p1) = polygon_measures(&p);
                    let (a2, p2) = polygon_measures(&convex_hull_2d(&turned).unwrap());
                    prop_assert!(a1 > 0.0 && p1 > 0.0);
                    prop_assert!((a1 - a2).abs() < 1e-12 && (p1 - p2).abs() < 1e-12);
                }
            }
        }
    }
}
