//! Exact sparse linear algebra and simplicial (co)homology.
//!
//! Ranks are computed by fraction-free integer elimination: each row is
//! cleared of denominators and kept primitive (content 1), pivots are chosen
//! by a Markowitz fill estimate with entry-size tie-breaking, and row
//! combinations stay in `BigInt`. This keeps intermediate growth in check
//! while staying exact — there is no floating point anywhere.

use crate::mesh::{incidence, SimplicialComplex3};
use crate::rational::Q;
use num::bigint::BigInt;
use num::{Integer, One, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Sparse rational matrix with deterministic entry order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Q>,
}

impl SparseMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        assert!(i < self.rows && j < self.cols, "entry out of bounds");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Q) {
        assert!(i < self.rows && j < self.cols, "entry out of bounds");
        if v.is_zero() {
            return;
        }
        let slot = self.entries.entry((i, j)).or_insert_with(Q::zero);
        *slot += v;
        if slot.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Q)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn transpose(&self) -> SparseMat {
        let mut t = SparseMat::zero(self.cols, self.rows);
        for (i, j, v) in self.iter() {
            t.set(j, i, v.clone());
        }
        t
    }

    pub fn scale(&self, s: &Q) -> SparseMat {
        let mut out = SparseMat::zero(self.rows, self.cols);
        if s.is_zero() {
            return out;
        }
        for (i, j, v) in self.iter() {
            out.set(i, j, v * s);
        }
        out
    }

    pub fn matmul(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        // group other by row for the sparse product
        let mut other_rows: BTreeMap<usize, Vec<(usize, &Q)>> = BTreeMap::new();
        for (i, j, v) in other.iter() {
            other_rows.entry(i).or_default().push((j, v));
        }
        let mut out = SparseMat::zero(self.rows, other.cols);
        for (i, k, a) in self.iter() {
            if let Some(row) = other_rows.get(&k) {
                for (j, b) in row {
                    out.add_to(i, *j, &(a * *b));
                }
            }
        }
        out
    }

    /// Copy `other`, scaled by `s`, into this matrix at the given offset.
    pub fn add_block(&mut self, row_off: usize, col_off: usize, other: &SparseMat, s: &Q) {
        assert!(row_off + other.rows <= self.rows && col_off + other.cols <= self.cols);
        for (i, j, v) in other.iter() {
            self.add_to(row_off + i, col_off + j, &(v * s));
        }
    }

    /// Kronecker product with the identity of size `v`: each entry becomes a
    /// diagonal v x v block.
    pub fn kron_identity(&self, v: usize) -> SparseMat {
        let mut out = SparseMat::zero(self.rows * v, self.cols * v);
        for (i, j, val) in self.iter() {
            for c in 0..v {
                out.set(i * v + c, j * v + c, val.clone());
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Q]) -> Vec<Q> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Q::zero(); self.rows];
        for (i, j, v) in self.iter() {
            out[i] += v * &x[j];
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.rows];
        for ((i, jj), v) in &self.entries {
            if *jj == j {
                out[*i] = v.clone();
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut d = vec![vec![Q::zero(); self.cols]; self.rows];
        for (i, j, v) in self.iter() {
            d[i][j] = v.clone();
        }
        d
    }

    /// Exact rank by fraction-free sparse elimination over the integers.
    pub fn rank(&self) -> usize {
        // primitive integer rows
        let mut rows: Vec<BTreeMap<usize, BigInt>> = Vec::new();
        {
            let mut grouped: BTreeMap<usize, Vec<(usize, &Q)>> = BTreeMap::new();
            for (i, j, v) in self.iter() {
                grouped.entry(i).or_default().push((j, v));
            }
            for (_, cells) in grouped {
                let mut lcm = BigInt::one();
                for (_, v) in &cells {
                    lcm = lcm.lcm(v.denom());
                }
                let mut row: BTreeMap<usize, BigInt> = cells
                    .into_iter()
                    .map(|(j, v)| (j, v.numer() * (&lcm / v.denom())))
                    .collect();
                reduce_content(&mut row);
                rows.push(row);
            }
        }
        eliminate_rank(&mut rows)
    }

    /// Nullspace basis (as column vectors over Q), deterministic.
    /// Dense elimination — intended for the moderate sizes of the test
    /// meshes, not for huge systems.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        crate::smallalg::nullspace_dense(&self.to_dense())
    }

    /// Any exact solution of `self * x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        crate::smallalg::solve_overdetermined(&self.to_dense(), b)
    }
}

fn reduce_content(row: &mut BTreeMap<usize, BigInt>) {
    let mut g = BigInt::zero();
    for v in row.values() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for v in row.values_mut() {
        *v /= &g;
    }
}

/// Sparse fraction-free elimination; consumes the rows and returns the rank.
fn eliminate_rank(rows: &mut [BTreeMap<usize, BigInt>]) -> usize {
    let n = rows.len();
    let mut active: BTreeSet<usize> = (0..n).filter(|&r| !rows[r].is_empty()).collect();
    // column -> active rows containing it
    let mut col_rows: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &r in &active {
        for &c in rows[r].keys() {
            col_rows.entry(c).or_default().insert(r);
        }
    }
    let mut rank = 0usize;
    while !active.is_empty() {
        // Markowitz pivot: minimize (row_nnz - 1) * (col_nnz - 1),
        // tie-break on pivot entry bit length, then on (col, row) for
        // determinism.
        let mut best: Option<(usize, u64, usize, usize)> = None;
        for (&c, rs) in &col_rows {
            if rs.is_empty() {
                continue;
            }
            let col_n = rs.len();
            for &r in rs {
                let score = (rows[r].len() - 1) * (col_n - 1);
                let bits = rows[r][&c].bits();
                let cand = (score, bits, c, r);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        let Some((_, _, pc, pr)) = best else { break };
        rank += 1;
        // remove the pivot row from the active structures
        active.remove(&pr);
        let pivot_row = std::mem::take(&mut rows[pr]);
        for &c in pivot_row.keys() {
            if let Some(rs) = col_rows.get_mut(&c) {
                rs.remove(&pr);
            }
        }
        let pa = pivot_row[&pc].clone();
        let targets: Vec<usize> = col_rows
            .get(&pc)
            .map(|rs| rs.iter().copied().collect())
            .unwrap_or_default();
        for r in targets {
            let ra = rows[r][&pc].clone();
            let g = pa.gcd(&ra);
            let mp = &pa / &g; // multiplier for the target row
            let mr = &ra / &g; // multiplier for the pivot row
                               // row_r := mp * row_r - mr * pivot_row
            let mut changed: Vec<(usize, bool)> = Vec::new();
            if !mp.is_one() {
                for v in rows[r].values_mut() {
                    *v *= &mp;
                }
            }
            for (&c, pv) in &pivot_row {
                let entry = rows[r].entry(c).or_insert_with(BigInt::zero);
                let had = !entry.is_zero();
                *entry -= &mr * pv;
                let has = !entry.is_zero();
                if !has {
                    rows[r].remove(&c);
                }
                if had != has {
                    changed.push((c, has));
                }
            }
            reduce_content(&mut rows[r]);
            for (c, has) in changed {
                let rs = col_rows.entry(c).or_default();
                if has {
                    rs.insert(r);
                } else {
                    rs.remove(&r);
                }
            }
            if rows[r].is_empty() {
                active.remove(&r);
                // column sets were already updated above
            }
        }
        col_rows.remove(&pc);
    }
    rank
}

// ---------------------------------------------------------------------------
// Cochain complexes
// ---------------------------------------------------------------------------

/// A finite cochain complex: spaces are given by their dimensions, the
/// differentials by sparse matrices with `d[k]: space k -> space k+1`.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    pub name: String,
    pub dims: Vec<usize>,
    pub d: Vec<SparseMat>,
}

#[derive(Debug, thiserror::Error)]
#[error("complex `{name}`: d{k_next} . d{k} != 0 ({nnz} nonzero entries in the product)")]
pub struct NotAComplex {
    pub name: String,
    pub k: usize,
    pub k_next: usize,
    pub nnz: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyReport {
    pub complex: String,
    pub space_dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub cohomology: Vec<usize>,
}

impl CochainComplex {
    /// Build and verify shapes and the complex property `d.d = 0` exactly.
    pub fn new(name: &str, dims: Vec<usize>, d: Vec<SparseMat>) -> Result<Self, NotAComplex> {
        assert_eq!(d.len() + 1, dims.len(), "need one differential per step");
        for (k, m) in d.iter().enumerate() {
            assert_eq!(m.cols, dims[k], "d{k} domain dimension");
            assert_eq!(m.rows, dims[k + 1], "d{k} codomain dimension");
        }
        for k in 0..d.len().saturating_sub(1) {
            let prod = d[k + 1].matmul(&d[k]);
            if !prod.is_zero() {
                return Err(NotAComplex {
                    name: name.to_string(),
                    k,
                    k_next: k + 1,
                    nnz: prod.nnz(),
                });
            }
        }
        Ok(CochainComplex {
            name: name.to_string(),
            dims,
            d,
        })
    }

    pub fn ranks(&self) -> Vec<usize> {
        #[cfg(feature = "parallel")]
        {
            crate::par::rank_batch(&self.d.iter().collect::<Vec<_>>())
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.d.iter().map(|m| m.rank()).collect()
        }
    }

    /// Cohomology dimensions: `dim ker d_k - dim ran d_{k-1}` at each slot.
    pub fn cohomology(&self) -> CohomologyReport {
        let ranks = self.ranks();
        let n = self.dims.len();
        let mut coh = Vec::with_capacity(n);
        for k in 0..n {
            let rank_out = if k < self.d.len() { ranks[k] } else { 0 };
            let rank_in = if k > 0 { ranks[k - 1] } else { 0 };
            let dim = self.dims[k] - rank_out - rank_in;
            coh.push(dim);
        }
        CohomologyReport {
            complex: self.name.clone(),
            space_dims: self.dims.clone(),
            ranks,
            cohomology: coh,
        }
    }
}

// ---------------------------------------------------------------------------
// Simplicial oracle: relative homology of (mesh, boundary)
// ---------------------------------------------------------------------------

/// Boundary matrices of the relative chain complex generated by interior
/// simplices (all tets are interior by convention):
/// `b[2]: tets -> interior faces`, `b[1]: interior faces -> interior edges`,
/// `b[0]: interior edges -> interior vertices`.
pub fn relative_boundary_matrices(mesh: &SimplicialComplex3) -> [SparseMat; 3] {
    let f0 = mesh.interior_faces();
    let e0 = mesh.interior_edges();
    let v0 = mesh.interior_vertices();
    let fpos: BTreeMap<usize, usize> = f0.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let epos: BTreeMap<usize, usize> = e0.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let vpos: BTreeMap<usize, usize> = v0.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut b3 = SparseMat::zero(f0.len(), mesh.num_tets());
    for (k, t) in mesh.tets.iter().enumerate() {
        for fi in mesh.faces_of_tet(k) {
            if let Some(&r) = fpos.get(&fi) {
                let s = incidence(&mesh.faces[fi], t);
                b3.add_to(r, k, &crate::rational::q(s));
            }
        }
    }
    let mut b2 = SparseMat::zero(e0.len(), f0.len());
    for (c, &fi) in f0.iter().enumerate() {
        for ei in mesh.edges_of_face(fi) {
            if let Some(&r) = epos.get(&ei) {
                let s = incidence(&mesh.edges[ei], &mesh.faces[fi]);
                b2.add_to(r, c, &crate::rational::q(s));
            }
        }
    }
    let mut b1 = SparseMat::zero(v0.len(), e0.len());
    for (c, &ei) in e0.iter().enumerate() {
        for x in mesh.edges[ei] {
            if let Some(&r) = vpos.get(&x) {
                let s = incidence(&[x], &mesh.edges[ei]);
                b1.add_to(r, c, &crate::rational::q(s));
            }
        }
    }
    [b1, b2, b3]
}

/// De Rham Betti numbers of the underlying domain, computed as dimensions of
/// the relative simplicial homology: `b_k = dim H_{3-k}(mesh, boundary)`.
pub fn de_rham_betti(mesh: &SimplicialComplex3) -> [usize; 4] {
    let [b1, b2, b3] = relative_boundary_matrices(mesh);
    debug_assert!(b1.matmul(&b2).is_zero() && b2.matmul(&b3).is_zero());
    let dims = [
        mesh.interior_vertices().len(),
        mesh.interior_edges().len(),
        mesh.interior_faces().len(),
        mesh.num_tets(),
    ];
    let ranks = {
        #[cfg(feature = "parallel")]
        {
            crate::par::rank_batch(&[&b1, &b2, &b3])
        }
        #[cfg(not(feature = "parallel"))]
        {
            vec![b1.rank(), b2.rank(), b3.rank()]
        }
    };
    // homological degree q: H_q has dim C_q - rank b_q - rank b_{q+1}
    let h = |qdeg: usize| {
        let out = if qdeg >= 1 { ranks[qdeg - 1] } else { 0 };
        let inn = if qdeg < 3 { ranks[qdeg] } else { 0 };
        dims[qdeg] - out - inn
    };
    [h(3), h(2), h(1), h(0)]
}

/// Universal-coefficient sanity check: homology with a `v_dim`-dimensional
/// coefficient space (boundary matrices tensored with the identity) has
/// `v_dim` times the scalar dimensions.
pub fn coefficient_tensor_check(mesh: &SimplicialComplex3, v_dim: usize) -> bool {
    let scalar = de_rham_betti(mesh);
    let [b1, b2, b3] = relative_boundary_matrices(mesh);
    let t = [
        b1.kron_identity(v_dim),
        b2.kron_identity(v_dim),
        b3.kron_identity(v_dim),
    ];
    let dims = [
        mesh.interior_vertices().len() * v_dim,
        mesh.interior_edges().len() * v_dim,
        mesh.interior_faces().len() * v_dim,
        mesh.num_tets() * v_dim,
    ];
    let ranks: Vec<usize> = t.iter().map(|m| m.rank()).collect();
    let h = |qdeg: usize| {
        let out = if qdeg >= 1 { ranks[qdeg - 1] } else { 0 };
        let inn = if qdeg < 3 { ranks[qdeg] } else { 0 };
        dims[qdeg] - out - inn
    };
    (0..4).all(|qd| h(qd) == v_dim * scalar[3 - qd])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};
    use crate::rational::{q, qr};

    #[test]
    fn rank_examples() {
        let mut m = SparseMat::zero(3, 3);
        m.set(0, 0, q(1));
        m.set(1, 1, q(2));
        m.set(2, 2, qr(1, 3));
        assert_eq!(m.rank(), 3);

        // rank-1 outer product
        let mut r1 = SparseMat::zero(3, 4);
        for i in 0..3 {
            for j in 0..4 {
                r1.set(i, j, q((i as i64 + 1) * (j as i64 + 1)));
            }
        }
        assert_eq!(r1.rank(), 1);
        assert_eq!(SparseMat::zero(5, 7).rank(), 0);

        // random-ish integer matrix with known rank 2
        let mut m2 = SparseMat::zero(3, 3);
        let rows = [[1, 2, 3], [4, 5, 6], [7, 8, 9]];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m2.set(i, j, q(v));
            }
        }
        assert_eq!(m2.rank(), 2);
    }

    #[test]
    fn matmul_and_kron() {
        let mut a = SparseMat::zero(2, 3);
        a.set(0, 0, q(1));
        a.set(0, 2, q(2));
        a.set(1, 1, q(-1));
        let mut b = SparseMat::zero(3, 2);
        b.set(0, 1, q(3));
        b.set(2, 0, q(5));
        b.set(1, 0, q(7));
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), q(10));
        assert_eq!(c.get(0, 1), q(3));
        assert_eq!(c.get(1, 0), q(-7));
        let k = a.kron_identity(2);
        assert_eq!(k.rows, 4);
        assert_eq!(k.cols, 6);
        assert_eq!(k.rank(), 2 * a.rank());
    }

    #[test]
    fn solve_and_nullspace() {
        let mut m = SparseMat::zero(2, 3);
        m.set(0, 0, q(1));
        m.set(0, 1, q(1));
        m.set(1, 2, q(2));
        let x = m.solve(&[q(3), q(4)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(3), q(4)]);
        assert_eq!(m.nullspace().len(), 1);
        // inconsistent system
        let mut bad = SparseMat::zero(2, 1);
        bad.set(0, 0, q(1));
        bad.set(1, 0, q(1));
        assert!(bad.solve(&[q(0), q(1)]).is_none());
    }

    #[test]
    fn two_tet_relative_boundary() {
        let pts = vec![
            crate::smallalg::Vec3::from_i64(0, 0, 0),
            crate::smallalg::Vec3::from_i64(1, 0, 0),
            crate::smallalg::Vec3::from_i64(0, 1, 0),
            crate::smallalg::Vec3::from_i64(0, 0, 1),
            crate::smallalg::Vec3::from_i64(1, 1, 1),
        ];
        let m = SimplicialComplex3::build(pts, &[[0, 1, 2, 3], [1, 2, 3, 4]]).unwrap();
        let [_, _, b3] = relative_boundary_matrices(&m);
        assert_eq!((b3.rows, b3.cols), (1, 2));
        let e0 = b3.get(0, 0);
        let e1 = b3.get(0, 1);
        assert!((e0 == q(1) || e0 == q(-1)) && (e1 == q(1) || e1 == q(-1)));
        assert_eq!(de_rham_betti(&m), [1, 0, 0, 0]);
    }

    #[test]
    fn betti_of_generated_meshes() {
        assert_eq!(
            de_rham_betti(&generate_mesh(MeshKind::Tet).unwrap()),
            [1, 0, 0, 0]
        );
        assert_eq!(
            de_rham_betti(&generate_mesh(MeshKind::Box(2, 2, 2)).unwrap()),
            [1, 0, 0, 0]
        );
        assert_eq!(
            de_rham_betti(&generate_mesh(MeshKind::Tunnel).unwrap()),
            [1, 1, 0, 0]
        );
        assert_eq!(
            de_rham_betti(&generate_mesh(MeshKind::Cavity).unwrap()),
            [1, 0, 1, 0]
        );
    }

    #[test]
    fn coefficient_tensoring() {
        let m = generate_mesh(MeshKind::Tunnel).unwrap();
        assert!(coefficient_tensor_check(&m, 1));
        assert!(coefficient_tensor_check(&m, 3));
    }

    #[test]
    fn cochain_complex_detects_bad_composition() {
        let mut d0 = SparseMat::zero(1, 1);
        d0.set(0, 0, q(1));
        let mut d1 = SparseMat::zero(1, 1);
        d1.set(0, 0, q(1));
        assert!(CochainComplex::new("bad", vec![1, 1, 1], vec![d0.clone(), d1]).is_err());
        let good =
            CochainComplex::new("good", vec![1, 1, 1], vec![d0, SparseMat::zero(1, 1)]).unwrap();
        let rep = good.cohomology();
        assert_eq!(rep.cohomology, vec![0, 0, 1]);
    }
}
