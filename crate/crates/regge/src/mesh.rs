//! Oriented tetrahedral complexes: construction, incidence, boundary
//! classification, local frames, generators and text IO.
//!
//! All coordinates are rational and all derived quantities (orientation
//! signs, frame vectors, centroids) are computed exactly. Simplices are
//! identified by their strictly increasing vertex tuples; the incidence
//! number follows the `(-1)^(j+1)` convention on sorted tuples.

use crate::rational::{parse_q, Q};
use crate::smallalg::Vec3;
use num::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("degenerate tetrahedron {0:?} (zero volume)")]
    DegenerateTet([usize; 4]),
    #[error("non-manifold face {0:?} (shared by more than two tetrahedra)")]
    NonManifoldFace([usize; 3]),
    #[error("duplicate tetrahedron {0:?}")]
    DuplicateTet([usize; 4]),
    #[error("vertex index {index} out of range (have {count} vertices)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("tetrahedron {0:?} repeats a vertex")]
    RepeatedVertex([usize; 4]),
    #[error("mesh needs at least one tetrahedron")]
    Empty,
    #[error("unknown simplex {0:?}")]
    UnknownSimplex(Vec<usize>),
    #[error("invalid mesh parameters: {0}")]
    InvalidParams(String),
    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Incidence number between sorted simplices: `(-1)^(j+1)` when `tau` is
/// `sigma` with the vertex at (0-based) position `j` removed, otherwise 0.
pub fn incidence(tau: &[usize], sigma: &[usize]) -> i64 {
    if tau.len() + 1 != sigma.len() {
        return 0;
    }
    let mut missing = None;
    let mut ti = 0;
    for (j, &v) in sigma.iter().enumerate() {
        if ti < tau.len() && tau[ti] == v {
            ti += 1;
        } else if missing.is_none() {
            missing = Some(j);
        } else {
            return 0;
        }
    }
    match missing {
        Some(j) if ti == tau.len() => {
            // the standard (-1)^(j+1) sign on the 0-based deleted position
            if j % 2 == 0 {
                -1
            } else {
                1
            }
        }
        _ => 0,
    }
}

/// Local frame of an edge: scaled tangent and two scaled normals.
#[derive(Clone, Debug)]
pub struct EdgeFrame {
    pub t: Vec3,
    pub n1: Vec3,
    pub n2: Vec3,
}

/// Local frame of a face: scaled normal and two scaled tangents.
#[derive(Clone, Debug)]
pub struct FaceFrame {
    pub n: Vec3,
    pub t1: Vec3,
    pub t2: Vec3,
}

#[derive(Clone, Debug)]
pub struct FrameSet {
    pub edges: Vec<EdgeFrame>,
    pub faces: Vec<FaceFrame>,
}

/// An oriented tetrahedral complex with derived face/edge tables,
/// adjacency, and interior/boundary flags. Immutable after construction.
#[derive(Clone, Debug)]
pub struct SimplicialComplex3 {
    pub points: Vec<Vec3>,
    /// sorted vertex quadruples
    pub tets: Vec<[usize; 4]>,
    /// sign of the volume of the sorted quadruple (+1 or -1)
    pub tet_sign: Vec<i64>,
    /// sorted vertex triples, lexicographic order
    pub faces: Vec<[usize; 3]>,
    /// sorted vertex pairs, lexicographic order
    pub edges: Vec<[usize; 2]>,
    pub face_index: BTreeMap<[usize; 3], usize>,
    pub edge_index: BTreeMap<[usize; 2], usize>,
    /// tets containing each face (1 = boundary face, 2 = interior face)
    pub face_tets: Vec<Vec<usize>>,
    pub edge_faces: Vec<Vec<usize>>,
    pub vertex_edges: Vec<Vec<usize>>,
    pub face_interior: Vec<bool>,
    pub edge_interior: Vec<bool>,
    pub vertex_interior: Vec<bool>,
}

impl SimplicialComplex3 {
    pub fn build(points: Vec<Vec3>, tets_in: &[[usize; 4]]) -> Result<Self, MeshError> {
        if tets_in.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = points.len();
        let mut tets: Vec<[usize; 4]> = Vec::with_capacity(tets_in.len());
        for t in tets_in {
            for &v in t {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange {
                        index: v,
                        count: nv,
                    });
                }
            }
            let mut s = *t;
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::RepeatedVertex(*t));
            }
            tets.push(s);
        }
        {
            let mut seen = tets.clone();
            seen.sort_unstable();
            if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
                return Err(MeshError::DuplicateTet(w[0]));
            }
        }

        let mut tet_sign = Vec::with_capacity(tets.len());
        for t in &tets {
            let d = signed_volume6(&points, t);
            if d.is_zero() {
                return Err(MeshError::DegenerateTet(*t));
            }
            tet_sign.push(if d.is_positive() { 1 } else { -1 });
        }

        let mut face_index: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        let mut edge_index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for t in &tets {
            for j in 0..4 {
                let f = omit4(t, j);
                face_index.entry(f).or_insert(0);
            }
            for a in 0..4 {
                for b in (a + 1)..4 {
                    edge_index.entry([t[a], t[b]]).or_insert(0);
                }
            }
        }
        let faces: Vec<[usize; 3]> = face_index.keys().copied().collect();
        let edges: Vec<[usize; 2]> = edge_index.keys().copied().collect();
        for (i, f) in faces.iter().enumerate() {
            *face_index.get_mut(f).unwrap() = i;
        }
        for (i, e) in edges.iter().enumerate() {
            *edge_index.get_mut(e).unwrap() = i;
        }

        let mut face_tets = vec![Vec::new(); faces.len()];
        for (k, t) in tets.iter().enumerate() {
            for j in 0..4 {
                let fi = face_index[&omit4(t, j)];
                face_tets[fi].push(k);
            }
        }
        for (fi, ts) in face_tets.iter().enumerate() {
            if ts.len() > 2 {
                return Err(MeshError::NonManifoldFace(faces[fi]));
            }
        }

        let mut edge_faces = vec![Vec::new(); edges.len()];
        for (fi, f) in faces.iter().enumerate() {
            for j in 0..3 {
                let e = omit3(f, j);
                edge_faces[edge_index[&e]].push(fi);
            }
        }
        let mut vertex_edges = vec![Vec::new(); nv];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[e[0]].push(ei);
            vertex_edges[e[1]].push(ei);
        }

        let face_interior: Vec<bool> = face_tets.iter().map(|ts| ts.len() == 2).collect();
        let mut edge_interior = vec![true; edges.len()];
        let mut vertex_interior = vec![false; nv];
        // a vertex incident to no tet stays flagged boundary; real meshes
        // reference every vertex anyway
        for v in tets.iter().flatten() {
            vertex_interior[*v] = true;
        }
        for (fi, f) in faces.iter().enumerate() {
            if !face_interior[fi] {
                for j in 0..3 {
                    edge_interior[edge_index[&omit3(f, j)]] = false;
                }
                for &v in f {
                    vertex_interior[v] = false;
                }
            }
        }

        Ok(SimplicialComplex3 {
            points,
            tets,
            tet_sign,
            faces,
            edges,
            face_index,
            edge_index,
            face_tets,
            edge_faces,
            vertex_edges,
            face_interior,
            edge_interior,
            vertex_interior,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn interior_faces(&self) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&i| self.face_interior[i])
            .collect()
    }
    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edge_interior[i])
            .collect()
    }
    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.vertex_interior[i])
            .collect()
    }

    /// Tetrahedra containing the given (sorted) simplex.
    pub fn star(&self, sigma: &[usize]) -> Result<Vec<usize>, MeshError> {
        let known = match sigma.len() {
            1 => sigma[0] < self.points.len(),
            2 => self.edge_index.contains_key(&[sigma[0], sigma[1]]),
            3 => self
                .face_index
                .contains_key(&[sigma[0], sigma[1], sigma[2]]),
            4 => self
                .tets
                .contains(&[sigma[0], sigma[1], sigma[2], sigma[3]]),
            _ => false,
        };
        if !known {
            return Err(MeshError::UnknownSimplex(sigma.to_vec()));
        }
        Ok((0..self.tets.len())
            .filter(|&k| sigma.iter().all(|v| self.tets[k].contains(v)))
            .collect())
    }

    pub fn faces_of_tet(&self, k: usize) -> [usize; 4] {
        std::array::from_fn(|j| self.face_index[&omit4(&self.tets[k], j)])
    }

    pub fn edges_of_face(&self, f: usize) -> [usize; 3] {
        std::array::from_fn(|j| self.edge_index[&omit3(&self.faces[f], j)])
    }

    pub fn edges_of_tet(&self, k: usize) -> [usize; 6] {
        let t = &self.tets[k];
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        std::array::from_fn(|i| {
            let (a, b) = pairs[i];
            self.edge_index[&[t[a], t[b]]]
        })
    }

    /// Vertex of tet `k` opposite to its face `f`.
    pub fn opposite_vertex(&self, f: usize, k: usize) -> usize {
        let face = &self.faces[f];
        *self.tets[k]
            .iter()
            .find(|v| !face.contains(v))
            .expect("face must belong to tet")
    }

    pub fn edge_vector(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e];
        &self.points[b] - &self.points[a]
    }

    pub fn edge_midpoint(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e];
        (&self.points[a] + &self.points[b]).scale(&crate::rational::qr(1, 2))
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f];
        (&self.points[b] - &self.points[a]).cross(&(&self.points[c] - &self.points[a]))
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f];
        (&(&self.points[a] + &self.points[b]) + &self.points[c]).scale(&crate::rational::qr(1, 3))
    }

    /// Geometric face-to-cell sign: `+1` when the stored face normal points
    /// out of tet `k` across face `f`, `-1` when it points inward.
    pub fn g_face_cell(&self, f: usize, k: usize) -> i64 {
        let n = self.face_normal(f);
        let w = self.opposite_vertex(f, k);
        let d = n.dot(&(&self.points[self.faces[f][0]] - &self.points[w]));
        assert!(!d.is_zero(), "flat tetrahedron slipped through");
        if d.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Geometric edge-to-face sign: `+1` when the stored edge tangent agrees
    /// with the counterclockwise traversal of the face boundary as seen from
    /// the tip of the stored face normal (Stokes convention), else `-1`.
    pub fn g_edge_face(&self, e: usize, f: usize) -> i64 {
        let n = self.face_normal(f);
        let outward = &self.edge_midpoint(e) - &self.face_centroid(f);
        let d = n.cross(&outward).dot(&self.edge_vector(e));
        assert!(!d.is_zero(), "degenerate face traversal");
        if d.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Geometric vertex-to-edge sign: `+1` at the head of the edge tangent,
    /// `-1` at the tail.
    pub fn g_vertex_edge(&self, x: usize, e: usize) -> i64 {
        if self.edges[e][1] == x {
            1
        } else {
            assert_eq!(self.edges[e][0], x, "vertex not on edge");
            -1
        }
    }

    pub fn frames(&self) -> FrameSet {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(ei, _)| {
                let t = self.edge_vector(ei);
                let (n1, n2) = edge_normals(&t);
                EdgeFrame { t, n1, n2 }
            })
            .collect();
        let faces = self
            .faces
            .iter()
            .map(|&[a, b, c]| {
                let t1 = &self.points[b] - &self.points[a];
                let w = &self.points[c] - &self.points[a];
                let n = t1.cross(&w);
                let t2 = n.cross(&t1);
                FaceFrame { n, t1, t2 }
            })
            .collect();
        FrameSet { edges, faces }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
            - self.num_tets() as i64
    }
}

/// Two scaled normals of an edge direction: Gram-Schmidt (without
/// normalization) of the lexicographically first coordinate axes not
/// parallel to `t`.
fn edge_normals(t: &Vec3) -> (Vec3, Vec3) {
    let tt = t.norm2();
    let mut picked: Vec<Vec3> = Vec::new();
    for i in 0..3 {
        let a = Vec3::axis(i);
        if a.cross(t).is_zero() {
            continue;
        }
        // remove the tangential component, then components along already
        // picked normals
        let mut v = &a - &t.scale(&(a.dot(t) / &tt));
        for p in &picked {
            let proj = p.scale(&(v.dot(p) / p.norm2()));
            v = &v - &proj;
        }
        if !v.is_zero() {
            picked.push(v);
        }
        if picked.len() == 2 {
            break;
        }
    }
    assert_eq!(picked.len(), 2, "edge tangent must be nonzero");
    let n2 = picked.pop().unwrap();
    let n1 = picked.pop().unwrap();
    (n1, n2)
}

/// Six times the signed volume of the sorted quadruple.
fn signed_volume6(points: &[Vec3], t: &[usize; 4]) -> Q {
    let a = &points[t[1]] - &points[t[0]];
    let b = &points[t[2]] - &points[t[0]];
    let c = &points[t[3]] - &points[t[0]];
    a.dot(&b.cross(&c))
}

fn omit4(t: &[usize; 4], j: usize) -> [usize; 3] {
    let mut out = [0usize; 3];
    let mut w = 0;
    for (i, &v) in t.iter().enumerate() {
        if i != j {
            out[w] = v;
            w += 1;
        }
    }
    out
}

fn omit3(f: &[usize; 3], j: usize) -> [usize; 2] {
    let mut out = [0usize; 2];
    let mut w = 0;
    for (i, &v) in f.iter().enumerate() {
        if i != j {
            out[w] = v;
            w += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    /// a single reference tetrahedron
    Tet,
    /// structured nx x ny x nz grid of unit cubes, 6 tets per cube
    Box(usize, usize, usize),
    /// 3x3x1 grid with the center cube removed (one tunnel through)
    Tunnel,
    /// 3x3x3 grid with the center cube removed (one internal cavity)
    Cavity,
}

pub fn generate_mesh(kind: MeshKind) -> Result<SimplicialComplex3, MeshError> {
    match kind {
        MeshKind::Tet => {
            let pts = vec![
                Vec3::from_i64(0, 0, 0),
                Vec3::from_i64(1, 0, 0),
                Vec3::from_i64(0, 1, 0),
                Vec3::from_i64(0, 0, 1),
            ];
            SimplicialComplex3::build(pts, &[[0, 1, 2, 3]])
        }
        MeshKind::Box(nx, ny, nz) => {
            if nx == 0 || ny == 0 || nz == 0 {
                return Err(MeshError::InvalidParams(
                    "box dimensions must be positive".into(),
                ));
            }
            grid_mesh(nx, ny, nz, |_, _, _| true)
        }
        MeshKind::Tunnel => grid_mesh(3, 3, 1, |i, j, _| !(i == 1 && j == 1)),
        MeshKind::Cavity => grid_mesh(3, 3, 3, |i, j, k| !(i == 1 && j == 1 && k == 1)),
    }
}

/// Structured grid of unit cubes, each split into six tetrahedra along the
/// main diagonal (Kuhn subdivision: one tet per permutation of the axes).
/// The subdivision is compatible across neighbouring cubes.
fn grid_mesh(
    nx: usize,
    ny: usize,
    nz: usize,
    keep: impl Fn(usize, usize, usize) -> bool,
) -> Result<SimplicialComplex3, MeshError> {
    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                points.push(Vec3::from_i64(i as i64, j as i64, k as i64));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if !keep(i, j, k) {
                    continue;
                }
                for perm in &PERMS {
                    let mut corner = [i, j, k];
                    let mut quad = [vid(corner[0], corner[1], corner[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        corner[axis] += 1;
                        quad[step + 1] = vid(corner[0], corner[1], corner[2]);
                    }
                    tets.push(quad);
                }
            }
        }
    }
    SimplicialComplex3::build(points, &tets)
}

// ---------------------------------------------------------------------------
// Text IO (mesh format v1)
// ---------------------------------------------------------------------------

pub fn write_mesh(mesh: &SimplicialComplex3) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# mesh format v1");
    let _ = writeln!(out, "vertices {}", mesh.points.len());
    for p in &mesh.points {
        let _ = writeln!(
            out,
            "{} {} {}",
            crate::rational::fmt_q(&p.0[0]),
            crate::rational::fmt_q(&p.0[1]),
            crate::rational::fmt_q(&p.0[2])
        );
    }
    let _ = writeln!(out, "tets {}", mesh.tets.len());
    for t in &mesh.tets {
        let _ = writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    out
}

pub fn parse_mesh(text: &str) -> Result<SimplicialComplex3, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let perr = |line: usize, msg: String| MeshError::Parse { line, msg };

    let (ln, header) = lines
        .next()
        .ok_or_else(|| perr(0, "empty mesh file".into()))?;
    let nv: usize = header
        .strip_prefix("vertices")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(ln, format!("expected `vertices N`, got `{header}`")))?;

    let mut points = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, "unexpected end of file in vertex block".into()))?;
        let coords: Vec<&str> = l.split_whitespace().collect();
        if coords.len() != 3 {
            return Err(perr(ln, format!("expected 3 coordinates, got `{l}`")));
        }
        let mut p = [Q::zero(), Q::zero(), Q::zero()];
        for (i, c) in coords.iter().enumerate() {
            p[i] = parse_q(c).map_err(|e| perr(ln, e))?;
        }
        points.push(Vec3(p));
    }

    let (ln, header) = lines
        .next()
        .ok_or_else(|| perr(0, "missing `tets M` line".into()))?;
    let nt: usize = header
        .strip_prefix("tets")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(ln, format!("expected `tets M`, got `{header}`")))?;

    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, "unexpected end of file in tet block".into()))?;
        let idx: Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
        let idx = idx.map_err(|e| perr(ln, format!("bad index: {e}")))?;
        if idx.len() != 4 {
            return Err(perr(ln, format!("expected 4 indices, got `{l}`")));
        }
        tets.push([idx[0], idx[1], idx[2], idx[3]]);
    }
    if let Some((ln, l)) = lines.next() {
        return Err(perr(ln, format!("trailing content `{l}`")));
    }
    SimplicialComplex3::build(points, &tets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_tets() -> SimplicialComplex3 {
        let pts = vec![
            Vec3::from_i64(0, 0, 0),
            Vec3::from_i64(1, 0, 0),
            Vec3::from_i64(0, 1, 0),
            Vec3::from_i64(0, 0, 1),
            Vec3::from_i64(1, 1, 1),
        ];
        SimplicialComplex3::build(pts, &[[0, 1, 2, 3], [1, 2, 3, 4]]).unwrap()
    }

    #[test]
    fn incidence_signs() {
        assert_eq!(incidence(&[0, 1, 2], &[0, 1, 2, 3]), 1);
        assert_eq!(incidence(&[1, 2, 3], &[0, 1, 2, 3]), -1);
        assert_eq!(incidence(&[0, 2, 3], &[0, 1, 2, 3]), 1);
        assert_eq!(incidence(&[0, 1, 3], &[0, 1, 2, 3]), -1);
        assert_eq!(incidence(&[0, 1, 4], &[0, 1, 2, 3]), 0);
        assert_eq!(incidence(&[0], &[0, 5]), 1);
        assert_eq!(incidence(&[5], &[0, 5]), -1);
    }

    #[test]
    fn incidence_dd_zero_on_box() {
        let m = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        for k in 0..m.num_tets() {
            let t = m.tets[k];
            for e in &m.edges {
                let mut sum = 0i64;
                for f in &m.faces {
                    sum += incidence(e, f) * incidence(f, &t);
                }
                assert_eq!(sum, 0);
            }
        }
    }

    #[test]
    fn unit_tet_counts() {
        let m = generate_mesh(MeshKind::Tet).unwrap();
        assert_eq!(
            (m.num_vertices(), m.num_edges(), m.num_faces(), m.num_tets()),
            (4, 6, 4, 1)
        );
        assert!(m.interior_faces().is_empty());
        assert!(m.interior_edges().is_empty());
        assert!(m.interior_vertices().is_empty());
    }

    #[test]
    fn two_tet_counts_and_star() {
        let m = two_tets();
        assert_eq!(m.num_faces(), 7);
        assert_eq!(m.interior_faces().len(), 1);
        // interior face is {1,2,3}; its edges are shared by both tets
        let star = m.star(&[1, 2]).unwrap();
        assert_eq!(star, vec![0, 1]);
        assert_eq!(m.star(&[0, 1, 2, 3]).unwrap(), vec![0]);
        assert!(m.star(&[0, 4]).is_err());
    }

    #[test]
    fn box333_counts_and_euler() {
        let m = generate_mesh(MeshKind::Box(3, 3, 3)).unwrap();
        assert_eq!(m.num_tets(), 162);
        assert_eq!(m.num_vertices(), 64);
        assert_eq!(m.euler_characteristic(), 1);
        // central vertex (1,1,1) in grid coordinates has full Kuhn star
        let central = (4 + 1) * 4 + 1;
        assert!(m.vertex_interior[central]);
        assert_eq!(m.star(&[central]).unwrap().len(), 24);
        assert_eq!(m.interior_vertices().len(), 8);
        assert_eq!(m.interior_faces().len(), 270);
        assert_eq!(m.interior_edges().len(), 117);
    }

    #[test]
    fn box222_interior_counts() {
        let m = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        assert_eq!(m.num_tets(), 48);
        assert_eq!(m.num_vertices(), 27);
        assert_eq!(m.num_edges(), 98);
        assert_eq!(m.num_faces(), 120);
        assert_eq!(m.interior_faces().len(), 72);
        assert_eq!(m.interior_edges().len(), 26);
        assert_eq!(m.interior_vertices().len(), 1);
    }

    #[test]
    fn frame_examples() {
        let m = generate_mesh(MeshKind::Tet).unwrap();
        let fr = m.frames();
        let e01 = m.edge_index[&[0, 1]];
        assert_eq!(fr.edges[e01].t, Vec3::from_i64(1, 0, 0));
        assert_eq!(fr.edges[e01].n1, Vec3::from_i64(0, 1, 0));
        assert_eq!(fr.edges[e01].n2, Vec3::from_i64(0, 0, 1));
        let f012 = m.face_index[&[0, 1, 2]];
        assert_eq!(fr.faces[f012].n, Vec3::from_i64(0, 0, 1));
        // exact orthogonality everywhere
        for (ei, ef) in fr.edges.iter().enumerate() {
            assert!(ef.t.dot(&ef.n1).is_zero(), "edge {ei}");
            assert!(ef.t.dot(&ef.n2).is_zero(), "edge {ei}");
            assert!(!ef.n1.is_zero() && !ef.n2.is_zero());
        }
        for ff in &fr.faces {
            assert!(ff.n.dot(&ff.t1).is_zero());
            assert!(ff.n.dot(&ff.t2).is_zero());
        }
    }

    #[test]
    fn geometric_signs_on_reference_tet() {
        let m = generate_mesh(MeshKind::Tet).unwrap();
        // bottom face {0,1,2}: stored normal (0,0,1) points into the tet
        let f = m.face_index[&[0, 1, 2]];
        assert_eq!(m.g_face_cell(f, 0), -1);
        // traversal of face {0,1,2} wrt its stored normal
        assert_eq!(m.g_edge_face(m.edge_index[&[0, 1]], f), 1);
        assert_eq!(m.g_edge_face(m.edge_index[&[1, 2]], f), 1);
        assert_eq!(m.g_edge_face(m.edge_index[&[0, 2]], f), -1);
        let e = m.edge_index[&[0, 2]];
        assert_eq!(m.g_vertex_edge(2, e), 1);
        assert_eq!(m.g_vertex_edge(0, e), -1);
    }

    #[test]
    fn build_errors() {
        let pts = vec![
            Vec3::from_i64(0, 0, 0),
            Vec3::from_i64(1, 0, 0),
            Vec3::from_i64(0, 1, 0),
            Vec3::from_i64(1, 1, 0),
        ];
        // all four points coplanar
        assert!(matches!(
            SimplicialComplex3::build(pts.clone(), &[[0, 1, 2, 3]]),
            Err(MeshError::DegenerateTet(_))
        ));
        let m = generate_mesh(MeshKind::Tet).unwrap();
        assert!(matches!(
            SimplicialComplex3::build(m.points.clone(), &[[0, 1, 2, 3], [3, 2, 1, 0]]),
            Err(MeshError::DuplicateTet(_))
        ));
        let mut pts5 = m.points.clone();
        pts5.push(Vec3::from_i64(1, 1, 1));
        pts5.push(Vec3::from_i64(-1, -1, -1));
        // three tets sharing face {1,2,3} -> non-manifold
        let r = SimplicialComplex3::build(pts5, &[[0, 1, 2, 3], [1, 2, 3, 4], [1, 2, 3, 5]]);
        assert!(matches!(r, Err(MeshError::NonManifoldFace(_))));
    }

    #[test]
    fn mesh_io_round_trip() {
        let m = two_tets();
        let text = write_mesh(&m);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(back.points, m.points);
        assert_eq!(back.tets, m.tets);
        // determinism: serializing again is byte-identical
        assert_eq!(write_mesh(&back), text);
        assert!(parse_mesh("vertices 1\n0 0 0\n").is_err());
        assert!(parse_mesh("nonsense").is_err());
    }

    #[test]
    fn tunnel_and_cavity_build() {
        let t = generate_mesh(MeshKind::Tunnel).unwrap();
        assert_eq!(t.num_tets(), 48);
        let c = generate_mesh(MeshKind::Cavity).unwrap();
        assert_eq!(c.num_tets(), 156);
        assert!(matches!(
            generate_mesh(MeshKind::Box(0, 1, 1)),
            Err(MeshError::InvalidParams(_))
        ));
    }
}
