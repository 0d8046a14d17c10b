//! Exact assembly of the distributional complexes and the maps between them.
//!
//! Every operator is derived by integration by parts against the scaled-frame
//! bases of [`crate::spaces`]; the frame Gram factors cancel so that all
//! matrix entries are rational. Jump payloads are accumulated per global
//! basis element and then decomposed against the target payload basis; a
//! nonzero decomposition residual is a hard error, because the membership of
//! the payload in the target span is exactly the structural claim being
//! verified.

use std::collections::BTreeMap;

use crate::homology::{CochainComplex, NotAComplex, SparseMat};
use crate::mesh::{FrameSet, SimplicialComplex3};
use crate::rational::{fmt_q, q, qr, Q};
use crate::smallalg::{mskw, rm_basis, solve_dense, solve_overdetermined, Mat3, RigidMotion, Vec3};
use num::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComplexId {
    /// metric perturbations: deformation, incompatibility, divergence
    Regge,
    /// coframe/connection pairs with torsion and curvature blocks
    Twisted,
    /// upper row: full gradients, matrix curl, matrix divergence
    VhRow,
    /// lower row: vector-valued distributional de Rham
    WhRow,
    /// rigid-motion-kernel functionals on cells, faces, edges, vertices
    XRm,
    /// tangential rigid motions on faces and edges
    RmAux,
    /// tangentially continuous piecewise rigid motions
    Ned,
    /// tangentially continuous piecewise linears
    NedC,
    /// piecewise linear normal traces
    P1n,
    /// piecewise constant normal traces
    P0n,
    /// scalar hessian complex
    Hessian,
    /// scalar lowest-order de Rham complex
    Whitney,
}

impl ComplexId {
    pub fn as_str(&self) -> &'static str {
        use ComplexId::*;
        match self {
            Regge => "regge",
            Twisted => "twisted",
            VhRow => "vh_row",
            WhRow => "wh_row",
            XRm => "x_rm",
            RmAux => "rm_aux",
            Ned => "ned",
            NedC => "nedc",
            P1n => "p1n",
            P0n => "p0n",
            Hessian => "hessian",
            Whitney => "whitney",
        }
    }

    pub fn all() -> [ComplexId; 12] {
        use ComplexId::*;
        [
            Regge, Twisted, VhRow, WhRow, XRm, RmAux, Ned, NedC, P1n, P0n, Hessian, Whitney,
        ]
    }

    pub fn parse(s: &str) -> Option<ComplexId> {
        ComplexId::all().into_iter().find(|c| c.as_str() == s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error(transparent)]
    NotAComplex(#[from] NotAComplex),
    #[error("nonzero decomposition residual in {context}")]
    Decomposition { context: String },
    #[error("sign determination failed in {context}")]
    SignSearch { context: String },
    #[error("conflicting duplicate value in {context}")]
    Inconsistent { context: String },
}

type Result<T> = std::result::Result<T, AssemblyError>;

// ---------------------------------------------------------------------------
// Assembler context with per-cell caches
// ---------------------------------------------------------------------------

pub struct Assembler<'a> {
    pub mesh: &'a SimplicialComplex3,
    pub frames: FrameSet,
    /// position of an interior face/edge/vertex in the interior lists
    face_pos: BTreeMap<usize, usize>,
    edge_pos: BTreeMap<usize, usize>,
    vert_pos: BTreeMap<usize, usize>,
    /// gradients of the four vertex hat functions, per cell
    hat_grads: Vec<[Vec3; 4]>,
    /// per cell: symmetric matrix with unit tangential moment on one local
    /// edge and zero on the others
    reg_basis: Vec<Vec<Mat3>>,
    /// per cell: rigid motion with unit tangential moment on one local edge
    ned_basis: Vec<Vec<RigidMotion>>,
    /// per cell: linear field (vertex values) dual to the local edge moments
    /// in the order (value, derivative) per local edge
    nedc_basis: Vec<Vec<[Vec3; 4]>>,
    /// per interior face: rigid motions with normal hat-function trace
    phin: BTreeMap<usize, [RigidMotion; 3]>,
    /// per interior edge: basis of rigid motions with vanishing tangential
    /// component along the edge
    xhat2: BTreeMap<usize, Vec<RigidMotion>>,
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a SimplicialComplex3) -> Assembler<'a> {
        let frames = mesh.frames();
        let face_pos = mesh
            .interior_faces()
            .into_iter()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect();
        let edge_pos: BTreeMap<usize, usize> = mesh
            .interior_edges()
            .into_iter()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let vert_pos = mesh
            .interior_vertices()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();

        let mut hat_grads = Vec::with_capacity(mesh.num_tets());
        let mut reg_basis = Vec::with_capacity(mesh.num_tets());
        let mut ned_basis = Vec::with_capacity(mesh.num_tets());
        let mut nedc_basis = Vec::with_capacity(mesh.num_tets());
        for k in 0..mesh.num_tets() {
            hat_grads.push(cell_hat_gradients(mesh, k));
            reg_basis.push(cell_reg_basis(mesh, &frames, k));
            ned_basis.push(cell_ned_basis(mesh, &frames, k));
            nedc_basis.push(cell_nedc_basis(mesh, &frames, k));
        }

        let phin = mesh
            .interior_faces()
            .into_iter()
            .map(|f| {
                let b = std::array::from_fn(|j| crate::spaces::phi_normal_rm(mesh, &frames, f, j));
                (f, b)
            })
            .collect();
        let xhat2 = mesh
            .interior_edges()
            .into_iter()
            .map(|e| (e, crate::spaces::xhat2_basis(mesh, &frames, e)))
            .collect();

        Assembler {
            mesh,
            frames,
            face_pos,
            edge_pos,
            vert_pos,
            hat_grads,
            reg_basis,
            ned_basis,
            nedc_basis,
            phin,
            xhat2,
        }
    }

    fn nf0(&self) -> usize {
        self.face_pos.len()
    }
    fn ne0(&self) -> usize {
        self.edge_pos.len()
    }
    fn nv0(&self) -> usize {
        self.vert_pos.len()
    }

    // -- payload decompositions -------------------------------------------

    /// Coefficients of a matrix payload against the face basis
    /// `{n x t1, n x t2, (n.n)I - n n^T}` (mutually Frobenius-orthogonal).
    fn face_payload_coeffs(&self, f: usize, payload: &Mat3, context: &str) -> Result<[Q; 3]> {
        let fr = &self.frames.faces[f];
        let b = [
            fr.n.outer(&fr.t1),
            fr.n.outer(&fr.t2),
            &Mat3::identity().scale(&fr.n.norm2()) - &fr.n.outer(&fr.n),
        ];
        let coeffs: [Q; 3] =
            std::array::from_fn(|i| payload.frobenius(&b[i]) / b[i].frobenius(&b[i]));
        let mut residual = payload.clone();
        for i in 0..3 {
            residual = &residual - &b[i].scale(&coeffs[i]);
        }
        if !residual.is_zero() {
            return Err(AssemblyError::Decomposition {
                context: format!("{context} (face payload)"),
            });
        }
        Ok(coeffs)
    }

    /// Coefficients of a vector payload against the two scaled edge normals.
    fn edge_normal_coeffs(&self, e: usize, v: &Vec3, context: &str) -> Result<[Q; 2]> {
        let fr = &self.frames.edges[e];
        let a1 = v.dot(&fr.n1) / fr.n1.norm2();
        let a2 = v.dot(&fr.n2) / fr.n2.norm2();
        let residual = &(v - &fr.n1.scale(&a1)) - &fr.n2.scale(&a2);
        if !residual.is_zero() {
            return Err(AssemblyError::Decomposition {
                context: format!("{context} (edge payload)"),
            });
        }
        Ok([a1, a2])
    }

    /// Coefficient of a normal-valued face vertex value against the scaled
    /// face normal.
    fn normal_coeff(&self, f: usize, v: &Vec3, context: &str) -> Result<Q> {
        let n = &self.frames.faces[f].n;
        let c = v.dot(n) / n.norm2();
        if !(v - &n.scale(&c)).is_zero() {
            return Err(AssemblyError::Decomposition {
                context: format!("{context} (normal trace)"),
            });
        }
        Ok(c)
    }

    // -- upper (V) row ------------------------------------------------------

    /// Full gradient: vertex hats to edge tangential moments plus cellwise
    /// skew modes.
    pub fn grad_lag_vh1(&self) -> SparseMat {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(ne + 3 * mesh.num_tets(), 3 * mesh.num_vertices());
        for e in 0..ne {
            let t = &self.frames.edges[e].t;
            for &x in mesh.edges[e].iter() {
                let s = q(mesh.g_vertex_edge(x, e));
                for c in 0..3 {
                    m.add_to(e, 3 * x + c, &(&t.0[c] * &s));
                }
            }
        }
        let half = qr(1, 2);
        for k in 0..mesh.num_tets() {
            for (li, &x) in mesh.tets[k].iter().enumerate() {
                let g = &self.hat_grads[k][li];
                for i in 0..3 {
                    // skew part of e_i (x) grad(hat): vskw = (grad x e_i)/2
                    let w = g.cross(&Vec3::axis(i)).scale(&half);
                    for axis in 0..3 {
                        m.add_to(ne + 3 * k + axis, 3 * x + i, &w.0[axis]);
                    }
                }
            }
        }
        m
    }

    /// Distributional matrix curl of piecewise constant fields with
    /// tangential-tangential continuity plus cellwise skew modes.
    pub fn curl_vh1_vh2(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(3 * self.nf0(), ne + 3 * mesh.num_tets());
        for (&f, &fp) in &self.face_pos {
            let n_f = &self.frames.faces[f].n;
            // accumulate the jump of each global basis element across f
            let mut jumps: BTreeMap<usize, Mat3> = BTreeMap::new();
            for &k in &mesh.face_tets[f] {
                let s = q(mesh.g_face_cell(f, k));
                for (le, &e) in mesh.edges_of_tet(k).iter().enumerate() {
                    let add = self.reg_basis[k][le].scale(&s);
                    let entry = jumps.entry(e).or_insert_with(Mat3::zero);
                    *entry = &*entry + &add;
                }
                for axis in 0..3 {
                    let add = mskw(&Vec3::axis(axis)).scale(&s);
                    let entry = jumps.entry(ne + 3 * k + axis).or_insert_with(Mat3::zero);
                    *entry = &*entry + &add;
                }
            }
            for (col, u_jump) in jumps {
                let j = u_jump.cross_vec(n_f);
                if j.is_zero() {
                    continue;
                }
                let coeffs = self.face_payload_coeffs(f, &j, "matrix curl")?;
                for i in 0..3 {
                    if !coeffs[i].is_zero() {
                        m.add_to(3 * fp + i, col, &-&coeffs[i]);
                    }
                }
            }
        }
        Ok(m)
    }

    /// Distributional divergence of the face-supported matrix deltas into
    /// edge-supported normal deltas.
    pub fn div_vh2_vh3(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(2 * self.ne0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            let fr = &self.frames.faces[f];
            let nn = fr.n.norm2();
            for &e in mesh.edges_of_face(f).iter() {
                let Some(&ep) = self.edge_pos.get(&e) else {
                    continue;
                };
                let s = q(mesh.g_edge_face(e, f));
                let conormal = self.frames.edges[e].t.cross(&fr.n);
                // normal-tangential columns: payload n_f travels to the edge
                for (i, t_i) in [&fr.t1, &fr.t2].into_iter().enumerate() {
                    let w = t_i.dot(&conormal);
                    if w.is_zero() {
                        continue;
                    }
                    let alphas = self.edge_normal_coeffs(e, &fr.n, "matrix divergence")?;
                    for (ip, a) in alphas.iter().enumerate() {
                        let val = -&(&(&w * a) / &nn) * &s;
                        if !val.is_zero() {
                            m.add_to(2 * ep + ip, 3 * fp + i, &val);
                        }
                    }
                }
                // tangential-trace column: payload is the scaled conormal
                let betas = self.edge_normal_coeffs(e, &conormal, "matrix divergence")?;
                for (ip, b) in betas.iter().enumerate() {
                    let val = -&(b * &s);
                    if !val.is_zero() {
                        m.add_to(2 * ep + ip, 3 * fp + 2, &val);
                    }
                }
            }
        }
        Ok(m)
    }

    // -- lower (W) row ------------------------------------------------------

    pub fn grad_wh(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(3 * self.nf0(), 3 * mesh.num_tets());
        for (&f, &fp) in &self.face_pos {
            for &k in &mesh.face_tets[f] {
                let s = q(-mesh.g_face_cell(f, k));
                for c in 0..3 {
                    m.add_to(3 * fp + c, 3 * k + c, &s);
                }
            }
        }
        m
    }

    pub fn curl_wh(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(3 * self.ne0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            for &e in mesh.edges_of_face(f).iter() {
                if let Some(&ep) = self.edge_pos.get(&e) {
                    let s = q(mesh.g_edge_face(e, f));
                    for c in 0..3 {
                        m.add_to(3 * ep + c, 3 * fp + c, &s);
                    }
                }
            }
        }
        m
    }

    pub fn div_wh(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(3 * self.nv0(), 3 * self.ne0());
        for (&e, &ep) in &self.edge_pos {
            for &x in mesh.edges[e].iter() {
                if let Some(&vp) = self.vert_pos.get(&x) {
                    let s = q(-mesh.g_vertex_edge(x, e));
                    for c in 0..3 {
                        m.add_to(3 * vp + c, 3 * ep + c, &s);
                    }
                }
            }
        }
        m
    }

    // -- algebraic diagram blocks -------------------------------------------

    /// Skew embedding of cellwise constant vectors.
    pub fn s_block0(&self) -> SparseMat {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(ne + 3 * mesh.num_tets(), 3 * mesh.num_tets());
        for k in 0..mesh.num_tets() {
            for i in 0..3 {
                m.set(ne + 3 * k + i, 3 * k + i, Q::one());
            }
        }
        m
    }

    /// Transpose-minus-trace applied to the face deltas of the lower row.
    pub fn s_block1(&self) -> Result<SparseMat> {
        let mut m = SparseMat::zero(3 * self.nf0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            let n = &self.frames.faces[f].n;
            for c in 0..3 {
                let axis = Vec3::axis(c);
                let payload = &n.outer(&axis) - &Mat3::identity().scale(&axis.dot(n));
                let coeffs = self.face_payload_coeffs(f, &payload, "face algebra block")?;
                for i in 0..3 {
                    if !coeffs[i].is_zero() {
                        m.set(3 * fp + i, 3 * fp + c, coeffs[i].clone());
                    }
                }
            }
        }
        Ok(m)
    }

    /// Twice the skew part applied to the edge deltas of the lower row.
    pub fn s_block2(&self) -> Result<SparseMat> {
        let mut m = SparseMat::zero(2 * self.ne0(), 3 * self.ne0());
        for (&e, &ep) in &self.edge_pos {
            let t = &self.frames.edges[e].t;
            for c in 0..3 {
                let payload = t.cross(&Vec3::axis(c));
                let alphas = self.edge_normal_coeffs(e, &payload, "edge algebra block")?;
                for (i, a) in alphas.iter().enumerate() {
                    if !a.is_zero() {
                        m.set(2 * ep + i, 3 * ep + c, a.clone());
                    }
                }
            }
        }
        Ok(m)
    }

    /// Minus the skew extraction on the first upper-row space.
    pub fn t_block1(&self) -> SparseMat {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(3 * mesh.num_tets(), ne + 3 * mesh.num_tets());
        for k in 0..mesh.num_tets() {
            for i in 0..3 {
                m.set(3 * k + i, ne + 3 * k + i, -Q::one());
            }
        }
        m
    }

    /// Inverse of the transpose-minus-trace map on the face deltas.
    pub fn t_block2(&self) -> SparseMat {
        let mut m = SparseMat::zero(3 * self.nf0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            let fr = &self.frames.faces[f];
            for (i, t_i) in [&fr.t1, &fr.t2].into_iter().enumerate() {
                for c in 0..3 {
                    if !t_i.0[c].is_zero() {
                        m.set(3 * fp + c, 3 * fp + i, t_i.0[c].clone());
                    }
                }
            }
            for c in 0..3 {
                if !fr.n.0[c].is_zero() {
                    m.set(3 * fp + c, 3 * fp + 2, -&fr.n.0[c]);
                }
            }
        }
        m
    }

    /// Attempted half-skew-embedding of the edge normal deltas. The payload
    /// only partially lies in the target span; the best rank-one-in-tangent
    /// approximation is assembled and the total squared Frobenius residual
    /// is reported.
    pub fn t_block3(&self) -> (SparseMat, Q) {
        let mut m = SparseMat::zero(3 * self.ne0(), 2 * self.ne0());
        let mut residual = Q::zero();
        let quarter = qr(1, 4);
        for (&e, &ep) in &self.edge_pos {
            let fr = &self.frames.edges[e];
            let tt = fr.t.norm2();
            for (i, n_i) in [&fr.n1, &fr.n2].into_iter().enumerate() {
                let payload = mskw(n_i).scale(&quarter);
                // best approximation c (x) t within the edge delta span
                let c_star = payload.mul_vec(&fr.t).scale(&(Q::one() / &tt));
                for cc in 0..3 {
                    if !c_star.0[cc].is_zero() {
                        m.set(3 * ep + cc, 2 * ep + i, c_star.0[cc].clone());
                    }
                }
                let rem = &payload - &c_star.outer(&fr.t);
                residual += rem.frobenius(&rem);
            }
        }
        (m, residual)
    }

    // -- metric (Regge) complex ----------------------------------------------

    /// Symmetric gradient: vertex hats to edge tangential moments.
    pub fn def_lag_reg(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(mesh.num_edges(), 3 * mesh.num_vertices());
        for e in 0..mesh.num_edges() {
            let t = &self.frames.edges[e].t;
            for &x in mesh.edges[e].iter() {
                let s = q(mesh.g_vertex_edge(x, e));
                for c in 0..3 {
                    m.add_to(e, 3 * x + c, &(&t.0[c] * &s));
                }
            }
        }
        m
    }

    /// Symmetric gradient of the tangentially continuous piecewise linear
    /// space, split into the flat part (edge moments) and the normal face
    /// jumps.
    pub fn def_nedc(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(ne + 3 * self.nf0(), 2 * ne);
        for e0 in 0..ne {
            let tets = mesh.star(&mesh.edges[e0]).expect("edge exists");
            for moment in 0..2 {
                let col = 2 * e0 + moment;
                // flat part: change of the tangential component along each edge
                let mut flat: BTreeMap<usize, Q> = BTreeMap::new();
                for &k in &tets {
                    let le0 = local_edge_index(mesh, k, e0);
                    let u = &self.nedc_basis[k][2 * le0 + moment];
                    for (le, &e) in mesh.edges_of_tet(k).iter().enumerate() {
                        let _ = le;
                        let [a, b] = mesh.edges[e];
                        let la = local_vertex_index(mesh, k, a);
                        let lb = local_vertex_index(mesh, k, b);
                        let t = &self.frames.edges[e].t;
                        let val = (&u[lb] - &u[la]).dot(t);
                        match flat.get(&e) {
                            None => {
                                flat.insert(e, val);
                            }
                            Some(prev) => {
                                if *prev != val {
                                    return Err(AssemblyError::Inconsistent {
                                        context: "flat part of the linear symmetric gradient"
                                            .to_string(),
                                    });
                                }
                            }
                        }
                    }
                }
                for (e, val) in flat {
                    if !val.is_zero() {
                        m.set(e, col, val);
                    }
                }
                // jump part: normal traces on the interior faces of the star
                let mut face_jumps: BTreeMap<usize, [Vec3; 3]> = BTreeMap::new();
                for &k in &tets {
                    let le0 = local_edge_index(mesh, k, e0);
                    let u = &self.nedc_basis[k][2 * le0 + moment];
                    for &f in mesh.faces_of_tet(k).iter() {
                        if !self.face_pos.contains_key(&f) {
                            continue;
                        }
                        let s = q(mesh.g_face_cell(f, k));
                        let entry = face_jumps
                            .entry(f)
                            .or_insert_with(|| std::array::from_fn(|_| Vec3::zero()));
                        for (j, &v) in mesh.faces[f].iter().enumerate() {
                            let lv = local_vertex_index(mesh, k, v);
                            entry[j] = &entry[j] + &u[lv].scale(&s);
                        }
                    }
                }
                for (f, vals) in face_jumps {
                    let fp = self.face_pos[&f];
                    for (j, v) in vals.iter().enumerate() {
                        let c = self.normal_coeff(f, v, "linear symmetric gradient jump")?;
                        if !c.is_zero() {
                            m.set(ne + 3 * fp + j, col, c);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Correction map: edge moments to normal face functionals. Column `e`
    /// is the jump part of the symmetric gradient of the derivative-moment
    /// lift of the unit moment on `e`.
    pub fn correction_k(&self, def_nedc: &SparseMat) -> SparseMat {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(3 * self.nf0(), ne);
        for (i, j, v) in def_nedc.iter() {
            if i >= ne && j % 2 == 1 {
                m.set(i - ne, j / 2, v.clone());
            }
        }
        m
    }

    /// Lift matrix: unit edge moment to the derivative-moment coefficient of
    /// the tangentially continuous piecewise linear space.
    pub fn lift_l(&self) -> SparseMat {
        let ne = self.mesh.num_edges();
        let mut m = SparseMat::zero(2 * ne, ne);
        for e in 0..ne {
            m.set(2 * e + 1, e, Q::one());
        }
        m
    }

    /// Linearized curvature: edge moments to tangential-tangential edge
    /// deltas, assembled through the correction map.
    pub fn inc_reg(&self, correction: &SparseMat) -> Result<SparseMat> {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(self.ne0(), ne);
        for e0 in 0..ne {
            // accumulated rigid motion argument per interior edge
            let mut acc: BTreeMap<usize, RigidMotion> = BTreeMap::new();
            for (&f, &fp) in &self.face_pos {
                for j in 0..3 {
                    let coeff = correction.get(3 * fp + j, e0);
                    if coeff.is_zero() {
                        continue;
                    }
                    let p = &self.phin[&f][j];
                    for &e in mesh.edges_of_face(f).iter() {
                        if self.edge_pos.contains_key(&e) {
                            let s = &coeff * &q(mesh.g_edge_face(e, f));
                            let entry = acc.entry(e).or_insert_with(RigidMotion::zero);
                            *entry = entry.add(&p.scale(&s));
                        }
                    }
                }
            }
            for (e, r) in acc {
                if r.is_zero() {
                    continue;
                }
                let lambda = self.regprime_multiple(e, &r)?;
                if !lambda.is_zero() {
                    // the edge functional with this argument is minus the
                    // tangential delta, and the curvature carries another minus
                    m.set(self.edge_pos[&e], e0, lambda);
                }
            }
        }
        Ok(m)
    }

    /// Express an accumulated rigid motion argument on edge `e` as a multiple
    /// of the canonical one whose edge functional is minus the
    /// tangential-tangential delta.
    fn regprime_multiple(&self, e: usize, r: &RigidMotion) -> Result<Q> {
        let t = &self.frames.edges[e].t;
        let v0 = &self.mesh.points[self.mesh.edges[e][0]];
        let lambda = r.b.dot(t) / t.norm2();
        let canonical = RigidMotion::new(-&t.cross(v0), t.clone());
        if !(r.add(&canonical.scale(&-&lambda))).is_zero() {
            return Err(AssemblyError::Decomposition {
                context: "curvature reduction to tangential edge deltas".to_string(),
            });
        }
        Ok(lambda)
    }

    /// Distributional divergence of tangential-tangential edge deltas into
    /// vector vertex deltas.
    pub fn div_regprime(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(3 * self.nv0(), self.ne0());
        for (&e, &ep) in &self.edge_pos {
            let t = &self.frames.edges[e].t;
            for &x in mesh.edges[e].iter() {
                if let Some(&vp) = self.vert_pos.get(&x) {
                    let s = q(-mesh.g_vertex_edge(x, e));
                    for c in 0..3 {
                        let val = &t.0[c] * &s;
                        if !val.is_zero() {
                            m.add_to(3 * vp + c, ep, &val);
                        }
                    }
                }
            }
        }
        m
    }

    // -- rigid-motion functional complexes ------------------------------------

    /// Incidence with geometric jump signs on interior simplices:
    /// faces-of-cells, edges-of-faces, vertices-of-edges.
    pub fn g_incidence(&self) -> [SparseMat; 3] {
        let mesh = self.mesh;
        let mut d0 = SparseMat::zero(self.nf0(), mesh.num_tets());
        for (&f, &fp) in &self.face_pos {
            for &k in &mesh.face_tets[f] {
                d0.set(fp, k, q(mesh.g_face_cell(f, k)));
            }
        }
        let mut d1 = SparseMat::zero(self.ne0(), self.nf0());
        for (&f, &fp) in &self.face_pos {
            for &e in mesh.edges_of_face(f).iter() {
                if let Some(&ep) = self.edge_pos.get(&e) {
                    d1.set(ep, fp, q(mesh.g_edge_face(e, f)));
                }
            }
        }
        let mut d2 = SparseMat::zero(self.nv0(), self.ne0());
        for (&e, &ep) in &self.edge_pos {
            for &x in mesh.edges[e].iter() {
                if let Some(&vp) = self.vert_pos.get(&x) {
                    d2.set(vp, ep, q(mesh.g_vertex_edge(x, e)));
                }
            }
        }
        [d0, d1, d2]
    }

    /// First map of the tangential rigid motion row: cellwise rigid motions
    /// to edge-moment coordinates on interior faces.
    pub fn rm_aux_d0(&self) -> SparseMat {
        let mesh = self.mesh;
        let basis = rm_basis();
        let mut m = SparseMat::zero(3 * self.nf0(), 6 * mesh.num_tets());
        for (&f, &fp) in &self.face_pos {
            for &k in &mesh.face_tets[f] {
                let s = q(mesh.g_face_cell(f, k));
                for (le, &e) in mesh.edges_of_face(f).iter().enumerate() {
                    let mid = mesh.edge_midpoint(e);
                    let t = &self.frames.edges[e].t;
                    for (r, p) in basis.iter().enumerate() {
                        let val = &p.eval(&mid).dot(t) * &s;
                        if !val.is_zero() {
                            m.add_to(3 * fp + le, 6 * k + r, &val);
                        }
                    }
                }
            }
        }
        m
    }

    /// Second map of the tangential rigid motion row: the edge-moment
    /// coordinate of an interior edge is selected from each incident face.
    pub fn rm_aux_d1(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(self.ne0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            for (le, &e) in mesh.edges_of_face(f).iter().enumerate() {
                if let Some(&ep) = self.edge_pos.get(&e) {
                    m.set(ep, 3 * fp + le, q(mesh.g_edge_face(e, f)));
                }
            }
        }
        m
    }

    // -- tangentially continuous rigid motion (Nedelec) complex ----------------

    /// Symmetric gradient of the lowest-order tangentially continuous space:
    /// normal face jumps of the piecewise rigid motion basis.
    pub fn def_ned(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let ne = mesh.num_edges();
        let mut m = SparseMat::zero(3 * self.nf0(), ne);
        for e0 in 0..ne {
            let tets = mesh.star(&mesh.edges[e0]).expect("edge exists");
            let mut face_jumps: BTreeMap<usize, RigidMotion> = BTreeMap::new();
            for &k in &tets {
                let le0 = local_edge_index(mesh, k, e0);
                let p = &self.ned_basis[k][le0];
                for &f in mesh.faces_of_tet(k).iter() {
                    if !self.face_pos.contains_key(&f) {
                        continue;
                    }
                    let s = q(mesh.g_face_cell(f, k));
                    let entry = face_jumps.entry(f).or_insert_with(RigidMotion::zero);
                    *entry = entry.add(&p.scale(&s));
                }
            }
            for (f, jump) in face_jumps {
                let fp = self.face_pos[&f];
                for (j, &v) in mesh.faces[f].iter().enumerate() {
                    let val = jump.eval(&mesh.points[v]);
                    let c = self.normal_coeff(f, &val, "rigid motion gradient jump")?;
                    if !c.is_zero() {
                        m.set(3 * fp + j, e0, c);
                    }
                }
            }
        }
        Ok(m)
    }

    /// Incompatibility on the normal face functionals, expressed in the
    /// tangentially vanishing edge functional bases.
    pub fn inc_phi(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(5 * self.ne0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            for j in 0..3 {
                let p = &self.phin[&f][j];
                for &e in mesh.edges_of_face(f).iter() {
                    let Some(&ep) = self.edge_pos.get(&e) else {
                        continue;
                    };
                    let s = q(mesh.g_edge_face(e, f));
                    let coeffs = self.xhat2_coords(e, p)?;
                    for (jb, c) in coeffs.iter().enumerate() {
                        let val = c * &s;
                        if !val.is_zero() {
                            m.add_to(5 * ep + jb, 3 * fp + j, &val);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Coordinates of a rigid motion in the tangentially vanishing basis of
    /// an interior edge.
    fn xhat2_coords(&self, e: usize, p: &RigidMotion) -> Result<Vec<Q>> {
        let basis = &self.xhat2[&e];
        let pc = p.coords();
        let mut rows: Vec<Vec<Q>> = Vec::with_capacity(6);
        for r in 0..6 {
            rows.push(basis.iter().map(|b| b.coords()[r].clone()).collect());
        }
        solve_overdetermined(&rows, &pc).ok_or_else(|| AssemblyError::Decomposition {
            context: "membership in the tangentially vanishing edge space".to_string(),
        })
    }

    /// Divergence of the tangentially vanishing edge functionals into vertex
    /// functionals with full rigid motion argument.
    pub fn div_xhat2(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(6 * self.nv0(), 5 * self.ne0());
        for (&e, &ep) in &self.edge_pos {
            for (jb, p) in self.xhat2[&e].iter().enumerate() {
                let pc = p.coords();
                for &x in mesh.edges[e].iter() {
                    if let Some(&vp) = self.vert_pos.get(&x) {
                        let s = q(mesh.g_vertex_edge(x, e));
                        for (r, c) in pc.iter().enumerate() {
                            let val = c * &s;
                            if !val.is_zero() {
                                m.add_to(6 * vp + r, 5 * ep + jb, &val);
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Coordinates of the tangential-tangential edge delta inside the
    /// tangentially vanishing edge functional space (with its sign).
    pub fn regprime_embed(&self, e: usize) -> Result<Vec<Q>> {
        let t = &self.frames.edges[e].t;
        let v0 = &self.mesh.points[self.mesh.edges[e][0]];
        // the delta equals minus the edge functional with this argument
        let canonical = RigidMotion::new(-&t.cross(v0), t.clone());
        self.xhat2_coords(e, &canonical.scale(&-Q::one()))
    }

    // -- scalar-normal trace complexes ----------------------------------------

    /// Face jumps of the normal derivative of scalar vertex hats, as
    /// multiples of the scaled face normal.
    pub fn normal_jump_lag(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(self.nf0(), mesh.num_vertices());
        for (&f, &fp) in &self.face_pos {
            let mut jumps: BTreeMap<usize, Vec3> = BTreeMap::new();
            for &k in &mesh.face_tets[f] {
                let s = q(mesh.g_face_cell(f, k));
                for (li, &x) in mesh.tets[k].iter().enumerate() {
                    let add = self.hat_grads[k][li].scale(&s);
                    let entry = jumps.entry(x).or_insert_with(Vec3::zero);
                    *entry = &*entry + &add;
                }
            }
            for (x, jv) in jumps {
                if jv.is_zero() {
                    continue;
                }
                let c = self.normal_coeff(f, &jv, "scalar gradient jump")?;
                if !c.is_zero() {
                    m.set(fp, x, c);
                }
            }
        }
        Ok(m)
    }

    /// Restriction of constant normal face fields to the edge normal frames.
    pub fn p0n_d1(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(2 * self.ne0(), self.nf0());
        for (&f, &fp) in &self.face_pos {
            let n = &self.frames.faces[f].n;
            for &e in mesh.edges_of_face(f).iter() {
                if let Some(&ep) = self.edge_pos.get(&e) {
                    let s = q(mesh.g_edge_face(e, f));
                    let alphas = self.edge_normal_coeffs(e, n, "normal restriction")?;
                    for (i, a) in alphas.iter().enumerate() {
                        let val = a * &s;
                        if !val.is_zero() {
                            m.add_to(2 * ep + i, fp, &val);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Evaluation of constant edge normal fields at interior vertices.
    pub fn p0n_d2(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(3 * self.nv0(), 2 * self.ne0());
        for (&e, &ep) in &self.edge_pos {
            let fr = &self.frames.edges[e];
            for (i, n_i) in [&fr.n1, &fr.n2].into_iter().enumerate() {
                for &x in mesh.edges[e].iter() {
                    if let Some(&vp) = self.vert_pos.get(&x) {
                        let s = q(mesh.g_vertex_edge(x, e));
                        for c in 0..3 {
                            let val = &n_i.0[c] * &s;
                            if !val.is_zero() {
                                m.add_to(3 * vp + c, 2 * ep + i, &val);
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Normal face jumps of the tangentially continuous piecewise linears,
    /// in the linear-normal face bases (the jump block of [`Self::def_nedc`]).
    pub fn p1n_d0(&self, def_nedc: &SparseMat) -> SparseMat {
        let ne = self.mesh.num_edges();
        let mut m = SparseMat::zero(3 * self.nf0(), 2 * ne);
        for (i, j, v) in def_nedc.iter() {
            if i >= ne {
                m.set(i - ne, j, v.clone());
            }
        }
        m
    }

    /// Restriction of linear normal face fields to interior edges.
    pub fn p1n_d1(&self) -> Result<SparseMat> {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(4 * self.ne0(), 3 * self.nf0());
        for (&f, &fp) in &self.face_pos {
            let n = &self.frames.faces[f].n;
            for &e in mesh.edges_of_face(f).iter() {
                let Some(&ep) = self.edge_pos.get(&e) else {
                    continue;
                };
                let s = q(mesh.g_edge_face(e, f));
                let alphas = self.edge_normal_coeffs(e, n, "normal restriction")?;
                for (j, &v) in mesh.faces[f].iter().enumerate() {
                    // hat of a face vertex restricted to an edge: the matching
                    // endpoint hat, or zero if the vertex is opposite
                    let Some(mpos) = mesh.edges[e].iter().position(|&w| w == v) else {
                        continue;
                    };
                    for (i, a) in alphas.iter().enumerate() {
                        let val = a * &s;
                        if !val.is_zero() {
                            m.add_to(4 * ep + 2 * i + mpos, 3 * fp + j, &val);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Evaluation of linear edge normal fields at interior vertices.
    pub fn p1n_d2(&self) -> SparseMat {
        let mesh = self.mesh;
        let mut m = SparseMat::zero(3 * self.nv0(), 4 * self.ne0());
        for (&e, &ep) in &self.edge_pos {
            let fr = &self.frames.edges[e];
            for (i, n_i) in [&fr.n1, &fr.n2].into_iter().enumerate() {
                for (mpos, &x) in mesh.edges[e].iter().enumerate() {
                    if let Some(&vp) = self.vert_pos.get(&x) {
                        let s = q(mesh.g_vertex_edge(x, e));
                        for c in 0..3 {
                            let val = &n_i.0[c] * &s;
                            if !val.is_zero() {
                                m.add_to(3 * vp + c, 4 * ep + 2 * i + mpos, &val);
                            }
                        }
                    }
                }
            }
        }
        m
    }

    // -- hessian complex -------------------------------------------------------

    pub fn hess_d0(&self) -> Result<SparseMat> {
        Ok(self.normal_jump_lag()?.scale(&-Q::one()))
    }

    pub fn hess_d1(&self) -> Result<SparseMat> {
        // same coefficients as the constant normal restriction
        self.p0n_d1()
    }

    pub fn hess_d2(&self) -> SparseMat {
        self.p0n_d2().scale(&-Q::one())
    }

    // -- scalar de Rham complex --------------------------------------------------

    pub fn whitney_matrices(&self) -> [SparseMat; 3] {
        let mesh = self.mesh;
        let mut d0 = SparseMat::zero(mesh.num_edges(), mesh.num_vertices());
        for e in 0..mesh.num_edges() {
            for &x in mesh.edges[e].iter() {
                d0.set(e, x, q(mesh.g_vertex_edge(x, e)));
            }
        }
        let mut d1 = SparseMat::zero(mesh.num_faces(), mesh.num_edges());
        for f in 0..mesh.num_faces() {
            for &e in mesh.edges_of_face(f).iter() {
                d1.set(f, e, q(mesh.g_edge_face(e, f)));
            }
        }
        let mut d2 = SparseMat::zero(mesh.num_tets(), mesh.num_faces());
        for k in 0..mesh.num_tets() {
            for &f in mesh.faces_of_tet(k).iter() {
                d2.set(k, f, q(mesh.g_face_cell(f, k)));
            }
        }
        [d0, d1, d2]
    }
}

// ---------------------------------------------------------------------------
// Per-cell local bases
// ---------------------------------------------------------------------------

fn local_vertex_index(mesh: &SimplicialComplex3, k: usize, v: usize) -> usize {
    mesh.tets[k]
        .iter()
        .position(|&w| w == v)
        .expect("vertex belongs to cell")
}

fn local_edge_index(mesh: &SimplicialComplex3, k: usize, e: usize) -> usize {
    mesh.edges_of_tet(k)
        .iter()
        .position(|&w| w == e)
        .expect("edge belongs to cell")
}

/// Gradients of the four vertex hat functions of a cell.
fn cell_hat_gradients(mesh: &SimplicialComplex3, k: usize) -> [Vec3; 4] {
    let verts = mesh.tets[k];
    let rows: Vec<Vec<Q>> = verts
        .iter()
        .map(|&v| {
            let p = &mesh.points[v];
            vec![Q::one(), p.0[0].clone(), p.0[1].clone(), p.0[2].clone()]
        })
        .collect();
    std::array::from_fn(|li| {
        let rhs: Vec<Q> = (0..4)
            .map(|r| if r == li { Q::one() } else { Q::zero() })
            .collect();
        let sol = solve_dense(&rows, &rhs).expect("nondegenerate cell");
        Vec3([sol[1].clone(), sol[2].clone(), sol[3].clone()])
    })
}

/// Per-cell symmetric matrices dual to the tangential-tangential edge
/// moments, in local edge order.
fn cell_reg_basis(mesh: &SimplicialComplex3, frames: &FrameSet, k: usize) -> Vec<Mat3> {
    let edges = mesh.edges_of_tet(k);
    let rows: Vec<Vec<Q>> = edges
        .iter()
        .map(|&e| {
            let t = &frames.edges[e].t;
            let two = q(2);
            vec![
                &t.0[0] * &t.0[0],
                &(&t.0[0] * &t.0[1]) * &two,
                &(&t.0[0] * &t.0[2]) * &two,
                &t.0[1] * &t.0[1],
                &(&t.0[1] * &t.0[2]) * &two,
                &t.0[2] * &t.0[2],
            ]
        })
        .collect();
    (0..6)
        .map(|le| {
            let rhs: Vec<Q> = (0..6)
                .map(|r| if r == le { Q::one() } else { Q::zero() })
                .collect();
            let s = solve_dense(&rows, &rhs).expect("unisolvent edge moments");
            Mat3([
                [s[0].clone(), s[1].clone(), s[2].clone()],
                [s[1].clone(), s[3].clone(), s[4].clone()],
                [s[2].clone(), s[4].clone(), s[5].clone()],
            ])
        })
        .collect()
}

/// Per-cell rigid motions dual to the tangential edge moments.
fn cell_ned_basis(mesh: &SimplicialComplex3, frames: &FrameSet, k: usize) -> Vec<RigidMotion> {
    let edges = mesh.edges_of_tet(k);
    let rows: Vec<Vec<Q>> = edges
        .iter()
        .map(|&e| {
            let t = &frames.edges[e].t;
            let mid = mesh.edge_midpoint(e);
            let mxt = mid.cross(t);
            vec![
                t.0[0].clone(),
                t.0[1].clone(),
                t.0[2].clone(),
                mxt.0[0].clone(),
                mxt.0[1].clone(),
                mxt.0[2].clone(),
            ]
        })
        .collect();
    (0..6)
        .map(|le| {
            let rhs: Vec<Q> = (0..6)
                .map(|r| if r == le { Q::one() } else { Q::zero() })
                .collect();
            let c = solve_dense(&rows, &rhs).expect("unisolvent edge moments");
            RigidMotion::from_coords(&c)
        })
        .collect()
}

/// Per-cell linear vector fields (as vertex values) dual to the value and
/// derivative moments of the tangential component on the six edges.
fn cell_nedc_basis(mesh: &SimplicialComplex3, frames: &FrameSet, k: usize) -> Vec<[Vec3; 4]> {
    let verts = mesh.tets[k];
    let edges = mesh.edges_of_tet(k);
    let half = qr(1, 2);
    // unknown layout: 3*local_vertex + component
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(12);
    for &e in edges.iter() {
        let [a, b] = mesh.edges[e];
        let la = verts.iter().position(|&w| w == a).unwrap();
        let lb = verts.iter().position(|&w| w == b).unwrap();
        let t = &frames.edges[e].t;
        // value moment: midpoint tangential component
        let mut row_v = vec![Q::zero(); 12];
        for c in 0..3 {
            row_v[3 * la + c] = &t.0[c] * &half;
            row_v[3 * lb + c] = &t.0[c] * &half;
        }
        rows.push(row_v);
        // derivative moment: change of the tangential component
        let mut row_d = vec![Q::zero(); 12];
        for c in 0..3 {
            row_d[3 * la + c] = -&t.0[c];
            row_d[3 * lb + c] = t.0[c].clone();
        }
        rows.push(row_d);
    }
    (0..12)
        .map(|dof| {
            let rhs: Vec<Q> = (0..12)
                .map(|r| if r == dof { Q::one() } else { Q::zero() })
                .collect();
            let sol = solve_dense(&rows, &rhs).expect("unisolvent linear edge moments");
            std::array::from_fn(|lv| {
                Vec3([
                    sol[3 * lv].clone(),
                    sol[3 * lv + 1].clone(),
                    sol[3 * lv + 2].clone(),
                ])
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Complex assembly
// ---------------------------------------------------------------------------

/// Structure data of the twisted complex: the algebraic connecting blocks
/// with the signs that make the squares anticommute, and the one-sided
/// inverse blocks (the last of which has a nonzero membership residual,
/// reported rather than hidden).
pub struct TwistedStructure {
    pub s_blocks: [SparseMat; 3],
    pub signs: [i64; 3],
    pub t_blocks: [SparseMat; 3],
    pub t3_residual: Q,
}

pub fn assemble_twisted_structure(asm: &Assembler) -> Result<TwistedStructure> {
    let s0 = asm.s_block0();
    let s1 = asm.s_block1()?;
    let s2 = asm.s_block2()?;
    let grad_v = asm.grad_lag_vh1();
    let curl_v = asm.curl_vh1_vh2()?;
    let div_v = asm.div_vh2_vh3()?;
    let grad_w = asm.grad_wh();
    let curl_w = asm.curl_wh();
    let _ = grad_v;
    // anticommutation signs: d_V S_k = sign * S_{k+1} d_W
    let sign_of = |lhs: &SparseMat, rhs: &SparseMat, context: &str| -> Result<i64> {
        let diff = {
            let mut d = lhs.clone();
            d.add_block(0, 0, rhs, &-Q::one());
            d
        };
        if diff.is_zero() {
            return Ok(1);
        }
        let sum = {
            let mut s = lhs.clone();
            s.add_block(0, 0, rhs, &Q::one());
            s
        };
        if sum.is_zero() {
            return Ok(-1);
        }
        Err(AssemblyError::SignSearch {
            context: context.to_string(),
        })
    };
    // with s0 fixed to +1, the A1 corner sign must cancel curl_V S0 against
    // S1 grad_W, and the A2 corner sign must cancel div_V (sign1 S1) against
    // S2 curl_W
    let lhs1 = curl_v.matmul(&s0);
    let rhs1 = s1.matmul(&grad_w);
    let raw1 = sign_of(&lhs1, &rhs1, "first anticommutation square")?;
    let sign1 = -raw1;
    let lhs2 = div_v.matmul(&s1).scale(&q(sign1));
    let rhs2 = s2.matmul(&curl_w);
    let raw2 = sign_of(&lhs2, &rhs2, "second anticommutation square")?;
    let sign2 = -raw2;
    let (t3, t3_residual) = asm.t_block3();
    Ok(TwistedStructure {
        s_blocks: [s0, s1.scale(&q(sign1)), s2.scale(&q(sign2))],
        signs: [1, sign1, sign2],
        // the one-sided inverses carry the same signs as the blocks they invert
        t_blocks: [
            asm.t_block1(),
            asm.t_block2().scale(&q(sign1)),
            t3.scale(&q(sign2)),
        ],
        t3_residual,
    })
}

pub fn assemble_complex(id: ComplexId, asm: &Assembler) -> Result<CochainComplex> {
    let mesh = asm.mesh;
    let (nv, ne, nf, nk) = (
        mesh.num_vertices(),
        mesh.num_edges(),
        mesh.num_faces(),
        mesh.num_tets(),
    );
    let (f0, e0, v0) = (asm.nf0(), asm.ne0(), asm.nv0());
    let complex = match id {
        ComplexId::Regge => {
            let def = asm.def_lag_reg();
            let def_nc = asm.def_nedc()?;
            let k_map = asm.correction_k(&def_nc);
            let inc = asm.inc_reg(&k_map)?;
            let div = asm.div_regprime();
            CochainComplex::new(
                id.as_str(),
                vec![3 * nv, ne, e0, 3 * v0],
                vec![def, inc, div],
            )?
        }
        ComplexId::VhRow => CochainComplex::new(
            id.as_str(),
            vec![3 * nv, ne + 3 * nk, 3 * f0, 2 * e0],
            vec![asm.grad_lag_vh1(), asm.curl_vh1_vh2()?, asm.div_vh2_vh3()?],
        )?,
        ComplexId::WhRow => CochainComplex::new(
            id.as_str(),
            vec![3 * nk, 3 * f0, 3 * e0, 3 * v0],
            vec![asm.grad_wh(), asm.curl_wh(), asm.div_wh()],
        )?,
        ComplexId::Twisted => {
            let st = assemble_twisted_structure(asm)?;
            let dims = vec![
                3 * nv + 3 * nk,
                (ne + 3 * nk) + 3 * f0,
                3 * f0 + 3 * e0,
                2 * e0 + 3 * v0,
            ];
            let mut a0 = SparseMat::zero(dims[1], dims[0]);
            a0.add_block(0, 0, &asm.grad_lag_vh1(), &Q::one());
            a0.add_block(0, 3 * nv, &st.s_blocks[0], &Q::one());
            a0.add_block(ne + 3 * nk, 3 * nv, &asm.grad_wh(), &Q::one());
            let mut a1 = SparseMat::zero(dims[2], dims[1]);
            a1.add_block(0, 0, &asm.curl_vh1_vh2()?, &Q::one());
            a1.add_block(0, ne + 3 * nk, &st.s_blocks[1], &Q::one());
            a1.add_block(3 * f0, ne + 3 * nk, &asm.curl_wh(), &Q::one());
            let mut a2 = SparseMat::zero(dims[3], dims[2]);
            a2.add_block(0, 0, &asm.div_vh2_vh3()?, &Q::one());
            a2.add_block(0, 3 * f0, &st.s_blocks[2], &Q::one());
            a2.add_block(2 * e0, 3 * f0, &asm.div_wh(), &Q::one());
            CochainComplex::new(id.as_str(), dims, vec![a0, a1, a2])?
        }
        ComplexId::XRm => {
            let [d0, d1, d2] = asm.g_incidence();
            CochainComplex::new(
                id.as_str(),
                vec![6 * nk, 6 * f0, 6 * e0, 6 * v0],
                vec![
                    d0.kron_identity(6),
                    d1.kron_identity(6),
                    d2.kron_identity(6),
                ],
            )?
        }
        ComplexId::RmAux => CochainComplex::new(
            id.as_str(),
            vec![6 * nk, 3 * f0, e0, 0],
            vec![asm.rm_aux_d0(), asm.rm_aux_d1(), SparseMat::zero(0, e0)],
        )?,
        ComplexId::Ned => CochainComplex::new(
            id.as_str(),
            vec![ne, 3 * f0, 5 * e0, 6 * v0],
            vec![asm.def_ned()?, asm.inc_phi()?, asm.div_xhat2()],
        )?,
        ComplexId::NedC => {
            let def_nc = asm.def_nedc()?;
            let k_map = asm.correction_k(&def_nc);
            let inc_r = asm.inc_reg(&k_map)?;
            let inc_p = asm.inc_phi()?;
            // middle space: edge moments plus normal face functionals
            let mut d1 = SparseMat::zero(5 * e0, ne + 3 * f0);
            d1.add_block(0, ne, &inc_p, &Q::one());
            for (&e, &ep) in &asm.edge_pos {
                let embed = asm.regprime_embed(e)?;
                for col in 0..ne {
                    let lam = inc_r.get(ep, col);
                    if lam.is_zero() {
                        continue;
                    }
                    for (jb, c) in embed.iter().enumerate() {
                        let val = c * &lam;
                        if !val.is_zero() {
                            d1.add_to(5 * ep + jb, col, &val);
                        }
                    }
                }
            }
            CochainComplex::new(
                id.as_str(),
                vec![2 * ne, ne + 3 * f0, 5 * e0, 6 * v0],
                vec![def_nc, d1, asm.div_xhat2()],
            )?
        }
        ComplexId::P1n => {
            let def_nc = asm.def_nedc()?;
            CochainComplex::new(
                id.as_str(),
                vec![2 * ne, 3 * f0, 4 * e0, 3 * v0],
                vec![asm.p1n_d0(&def_nc), asm.p1n_d1()?, asm.p1n_d2()],
            )?
        }
        ComplexId::P0n => CochainComplex::new(
            id.as_str(),
            vec![nv, f0, 2 * e0, 3 * v0],
            vec![asm.normal_jump_lag()?, asm.p0n_d1()?, asm.p0n_d2()],
        )?,
        ComplexId::Hessian => CochainComplex::new(
            id.as_str(),
            vec![nv, f0, 2 * e0, 3 * v0],
            vec![asm.hess_d0()?, asm.hess_d1()?, asm.hess_d2()],
        )?,
        ComplexId::Whitney => {
            let [d0, d1, d2] = asm.whitney_matrices();
            CochainComplex::new(id.as_str(), vec![nv, ne, nf, nk], vec![d0, d1, d2])?
        }
    };
    Ok(complex)
}

// ---------------------------------------------------------------------------
// Chain maps
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ChainMap {
    pub name: String,
    pub src: ComplexId,
    pub dst: ComplexId,
    pub blocks: Vec<SparseMat>,
}

impl ChainMap {
    /// Exact commutation check of all squares.
    pub fn commutes(&self, src: &CochainComplex, dst: &CochainComplex) -> bool {
        for k in 0..src.d.len() {
            let lhs = dst.d[k].matmul(&self.blocks[k]);
            let rhs = self.blocks[k + 1].matmul(&src.d[k]);
            let mut diff = lhs;
            diff.add_block(0, 0, &rhs, &-Q::one());
            if !diff.is_zero() {
                return false;
            }
        }
        true
    }
}

/// Identification of the rigid-motion functional complex with the simplicial
/// chain complex with rigid motion coefficients (same incidence structure).
pub fn chainmap_kappa(asm: &Assembler) -> ChainMap {
    let mesh = asm.mesh;
    let dims = [
        6 * mesh.num_tets(),
        6 * asm.nf0(),
        6 * asm.ne0(),
        6 * asm.nv0(),
    ];
    ChainMap {
        name: "kappa".to_string(),
        src: ComplexId::XRm,
        dst: ComplexId::XRm,
        blocks: dims.iter().map(|&d| SparseMat::identity(d)).collect(),
    }
}

/// Tangential restriction: rigid motion functionals to tangential rigid
/// motions on faces and edges.
pub fn chainmap_g(asm: &Assembler) -> ChainMap {
    let mesh = asm.mesh;
    let basis = rm_basis();
    let g0 = SparseMat::identity(6 * mesh.num_tets());
    let mut g1 = SparseMat::zero(3 * asm.nf0(), 6 * asm.nf0());
    for (&f, &fp) in &asm.face_pos {
        for (le, &e) in mesh.edges_of_face(f).iter().enumerate() {
            let mid = mesh.edge_midpoint(e);
            let t = &asm.frames.edges[e].t;
            for (r, p) in basis.iter().enumerate() {
                let val = p.eval(&mid).dot(t);
                if !val.is_zero() {
                    g1.set(3 * fp + le, 6 * fp + r, val);
                }
            }
        }
    }
    let mut g2 = SparseMat::zero(asm.ne0(), 6 * asm.ne0());
    for (&e, &ep) in &asm.edge_pos {
        let mid = mesh.edge_midpoint(e);
        let t = &asm.frames.edges[e].t;
        for (r, p) in basis.iter().enumerate() {
            let val = p.eval(&mid).dot(t);
            if !val.is_zero() {
                g2.set(ep, 6 * ep + r, val);
            }
        }
    }
    let g3 = SparseMat::zero(0, 6 * asm.nv0());
    ChainMap {
        name: "g".to_string(),
        src: ComplexId::XRm,
        dst: ComplexId::RmAux,
        blocks: vec![g0, g1, g2, g3],
    }
}

/// Normal-trace restriction: the tangentially continuous linear complex to
/// the piecewise linear normal trace complex.
pub fn chainmap_j(asm: &Assembler) -> Result<ChainMap> {
    let mesh = asm.mesh;
    let ne = mesh.num_edges();
    let j0 = SparseMat::identity(2 * ne);
    let mut j1 = SparseMat::zero(3 * asm.nf0(), ne + 3 * asm.nf0());
    for i in 0..3 * asm.nf0() {
        j1.set(i, ne + i, Q::one());
    }
    let mut j2 = SparseMat::zero(4 * asm.ne0(), 5 * asm.ne0());
    for (&e, &ep) in &asm.edge_pos {
        for (jb, p) in asm.xhat2[&e].iter().enumerate() {
            for (mpos, &x) in mesh.edges[e].iter().enumerate() {
                let val = p.eval(&mesh.points[x]);
                let alphas = asm.edge_normal_coeffs(e, &val, "normal trace restriction")?;
                for (i, a) in alphas.iter().enumerate() {
                    if !a.is_zero() {
                        j2.set(4 * ep + 2 * i + mpos, 5 * ep + jb, a.clone());
                    }
                }
            }
        }
    }
    let mut j3 = SparseMat::zero(3 * asm.nv0(), 6 * asm.nv0());
    let basis = rm_basis();
    for (&x, &vp) in &asm.vert_pos {
        for (r, p) in basis.iter().enumerate() {
            let val = p.eval(&mesh.points[x]);
            for c in 0..3 {
                if !val.0[c].is_zero() {
                    j3.set(3 * vp + c, 6 * vp + r, val.0[c].clone());
                }
            }
        }
    }
    Ok(ChainMap {
        name: "j".to_string(),
        src: ComplexId::NedC,
        dst: ComplexId::P1n,
        blocks: vec![j0, j1, j2, j3],
    })
}

/// Geometric identification of the hessian complex with the constant normal
/// trace complex (signed identity blocks in the chosen bases).
pub fn chainmap_hess_geom(asm: &Assembler) -> ChainMap {
    let nv = asm.mesh.num_vertices();
    let b0 = SparseMat::identity(nv);
    let b1 = SparseMat::identity(asm.nf0()).scale(&-Q::one());
    let b2 = SparseMat::identity(2 * asm.ne0()).scale(&-Q::one());
    let b3 = SparseMat::identity(3 * asm.nv0());
    ChainMap {
        name: "hess_geom".to_string(),
        src: ComplexId::Hessian,
        dst: ComplexId::P0n,
        blocks: vec![b0, b1, b2, b3],
    }
}

// ---------------------------------------------------------------------------
// Matrix export
// ---------------------------------------------------------------------------

/// Coordinate-format text export with exact rational entries, one
/// `row col value` triple per line (1-based indices).
pub fn write_matrix_market(m: &SparseMat) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate rational general\n");
    out.push_str(&format!("{} {} {}\n", m.rows, m.cols, m.nnz()));
    for (i, j, v) in m.iter() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, fmt_q(v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};

    fn asm_for(kind: MeshKind) -> (SimplicialComplex3, ()) {
        (generate_mesh(kind).unwrap(), ())
    }

    #[test]
    fn all_complexes_square_to_zero_on_two_cubes() {
        let (mesh, _) = asm_for(MeshKind::Box(2, 1, 1));
        let asm = Assembler::new(&mesh);
        for id in ComplexId::all() {
            let c = assemble_complex(id, &asm).unwrap_or_else(|e| {
                panic!("{}: {e}", id.as_str());
            });
            assert_eq!(c.dims.len(), 4, "{}", id.as_str());
        }
    }

    #[test]
    fn twisted_signs_are_determined() {
        let (mesh, _) = asm_for(MeshKind::Box(2, 1, 1));
        let asm = Assembler::new(&mesh);
        let st = assemble_twisted_structure(&asm).unwrap();
        assert_eq!(st.signs[0], 1);
        assert!(st.signs[1] == 1 || st.signs[1] == -1);
        assert!(st.signs[2] == 1 || st.signs[2] == -1);
        assert!(st.t3_residual > Q::zero());
    }

    #[test]
    fn one_sided_inverses_of_the_algebra_blocks() {
        let (mesh, _) = asm_for(MeshKind::Box(2, 1, 1));
        let asm = Assembler::new(&mesh);
        let s1 = asm.s_block1().unwrap();
        let t2 = asm.t_block2();
        let prod = t2.matmul(&s1);
        let mut diff = prod.clone();
        diff.add_block(0, 0, &SparseMat::identity(s1.cols), &-Q::one());
        assert!(diff.is_zero(), "T2 S1 = I");
        let prod2 = s1.matmul(&t2);
        let mut diff2 = prod2.clone();
        diff2.add_block(0, 0, &SparseMat::identity(s1.rows), &-Q::one());
        assert!(diff2.is_zero(), "S1 T2 = I");
        // T1 applied after the skew embedding gives minus the identity
        let s0 = asm.s_block0();
        let t1 = asm.t_block1();
        let mut diff3 = t1.matmul(&s0);
        diff3.add_block(0, 0, &SparseMat::identity(s0.cols), &Q::one());
        assert!(diff3.is_zero(), "T1 S0 = -I");
    }

    #[test]
    fn chain_maps_commute_on_two_cubes() {
        let (mesh, _) = asm_for(MeshKind::Box(2, 1, 1));
        let asm = Assembler::new(&mesh);
        let x_rm = assemble_complex(ComplexId::XRm, &asm).unwrap();
        let rm_aux = assemble_complex(ComplexId::RmAux, &asm).unwrap();
        let nedc = assemble_complex(ComplexId::NedC, &asm).unwrap();
        let p1n = assemble_complex(ComplexId::P1n, &asm).unwrap();
        let hess = assemble_complex(ComplexId::Hessian, &asm).unwrap();
        let p0n = assemble_complex(ComplexId::P0n, &asm).unwrap();
        assert!(chainmap_kappa(&asm).commutes(&x_rm, &x_rm));
        assert!(chainmap_g(&asm).commutes(&x_rm, &rm_aux));
        assert!(chainmap_j(&asm).unwrap().commutes(&nedc, &p1n));
        assert!(chainmap_hess_geom(&asm).commutes(&hess, &p0n));
    }

    #[test]
    fn matrix_export_round_trip_shape() {
        let (mesh, _) = asm_for(MeshKind::Tet);
        let asm = Assembler::new(&mesh);
        let c = assemble_complex(ComplexId::Whitney, &asm).unwrap();
        let text = write_matrix_market(&c.d[0]);
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        let header: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(header, vec![c.d[0].rows, c.d[0].cols, c.d[0].nnz()]);
    }
}
