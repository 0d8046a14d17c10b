//! Degree-of-freedom spaces: enumeration of every finite element /
//! distributional basis used by the assembled complexes.
//!
//! Bases use scaled frames throughout (edge tangents `t_e = v1 - v0`, face
//! normals `n_f = (v1-v0)x(v2-v0)`, unnormalized edge normals); every
//! downstream decomposition accounts for the Gram factors, which keeps all
//! matrices rational. The delta/functional families that take a rigid
//! motion argument are represented by their `(a, b)` coordinates.

use crate::mesh::{FrameSet, SimplicialComplex3};
use crate::rational::Q;
use crate::smallalg::{solve_overdetermined, Mat3, RigidMotion, Vec3};
use num::Zero;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SpaceId {
    /// vector-valued linear Lagrange (3 per vertex)
    Lag,
    /// Regge: piecewise constant symmetric, tt-continuous (1 per edge)
    Reg,
    /// tt edge deltas on interior edges
    RegPrime,
    /// vector vertex deltas on interior vertices
    LagPrime,
    /// first-type Nedelec, lowest order (1 per edge)
    Ned,
    /// second-type Nedelec, lowest order (2 per edge)
    NedC,
    /// Regge + cellwise skew modes
    Vh1,
    /// face deltas: n x t1, n x t2 and tangential-trace payloads
    Vh2,
    /// edge normal deltas (2 per interior edge)
    Vh3,
    /// piecewise constant vectors (3 per cell)
    Wh0,
    /// face deltas c x n_f (3 per interior face)
    Wh1,
    /// edge deltas c x t_e (3 per interior edge)
    Wh2,
    /// vertex deltas (3 per interior vertex)
    Wh3,
    /// piecewise rigid motions (6 per cell)
    X0,
    /// face functionals with rigid motion argument (6 per interior face)
    X1,
    /// edge functionals with rigid motion argument (6 per interior edge)
    X2,
    /// vertex functionals with rigid motion argument (6 per interior vertex)
    X3,
    /// face functionals with purely normal linear argument (3 per interior face)
    Phi,
    /// edge functionals with argument vanishing tangentially (5 per interior edge)
    XHat2,
    /// tangential rigid motions on interior faces (3 each)
    RMFaceSpace,
    /// tangential rigid motions on interior edges (1 each)
    RMEdgeSpace,
    /// linear normal fields on interior faces (3 each)
    P1nF,
    /// linear normal fields on interior edges (4 each)
    P1nE,
    /// vector values at interior vertices (3 each)
    P1nX,
    /// constant normal fields on interior faces (1 each)
    P0nF,
    /// constant normal fields on interior edges (2 each)
    P0nE,
    /// vector values at interior vertices (3 each)
    P0nX,
    /// scalar linear Lagrange (1 per vertex)
    ScalarLag,
    /// scalar lowest-order edge elements (1 per edge)
    ScalarNed,
    /// scalar lowest-order face elements (1 per face)
    ScalarRT,
    /// scalar piecewise constants (1 per cell)
    ScalarP0,
    /// face deltas n_f n_f^T (1 per interior face)
    HessV1,
    /// edge deltas n_i t_e^T (2 per interior edge)
    HessV2,
    /// vector vertex deltas (3 per interior vertex)
    HessV3,
}

impl SpaceId {
    pub fn as_str(&self) -> &'static str {
        use SpaceId::*;
        match self {
            Lag => "lag",
            Reg => "reg",
            RegPrime => "reg0p",
            LagPrime => "lag0p",
            Ned => "ned",
            NedC => "nedc",
            Vh1 => "vh1",
            Vh2 => "vh2",
            Vh3 => "vh3",
            Wh0 => "wh0",
            Wh1 => "wh1",
            Wh2 => "wh2",
            Wh3 => "wh3",
            X0 => "x0",
            X1 => "x1",
            X2 => "x2",
            X3 => "x3",
            Phi => "phi",
            XHat2 => "xhat2",
            RMFaceSpace => "rm_f",
            RMEdgeSpace => "rm_e",
            P1nF => "p1n_f",
            P1nE => "p1n_e",
            P1nX => "p1n_x",
            P0nF => "p0n_f",
            P0nE => "p0n_e",
            P0nX => "p0n_x",
            ScalarLag => "lag_s",
            ScalarNed => "ned_s",
            ScalarRT => "rt_s",
            ScalarP0 => "p0_s",
            HessV1 => "hess_v1",
            HessV2 => "hess_v2",
            HessV3 => "hess_v3",
        }
    }

    pub fn parse(s: &str) -> Option<SpaceId> {
        use SpaceId::*;
        let all = [
            Lag,
            Reg,
            RegPrime,
            LagPrime,
            Ned,
            NedC,
            Vh1,
            Vh2,
            Vh3,
            Wh0,
            Wh1,
            Wh2,
            Wh3,
            X0,
            X1,
            X2,
            X3,
            Phi,
            XHat2,
            RMFaceSpace,
            RMEdgeSpace,
            P1nF,
            P1nE,
            P1nX,
            P0nF,
            P0nE,
            P0nX,
            ScalarLag,
            ScalarNed,
            ScalarRT,
            ScalarP0,
            HessV1,
            HessV2,
            HessV3,
        ];
        all.into_iter().find(|id| id.as_str() == s)
    }
}

/// One basis functional. Index conventions: `comp` is a coordinate axis
/// (0..3), `rm` indexes the canonical rigid motion basis (0..6), frame
/// indices are 0-based into the scaled frame vectors of the simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    LagNode {
        vertex: usize,
        comp: usize,
    },
    RegEdge {
        edge: usize,
    },
    RegPrimeEdge {
        edge: usize,
    },
    LagPrimeVertex {
        vertex: usize,
        comp: usize,
    },
    NedEdge {
        edge: usize,
    },
    NedCEdge {
        edge: usize,
        moment: NedCMoment,
    },
    CellSkw {
        cell: usize,
        axis: usize,
    },
    Vh2FaceNT {
        face: usize,
        i: usize,
    },
    Vh2FaceTT {
        face: usize,
    },
    Vh3EdgeN {
        edge: usize,
        i: usize,
    },
    Wh0Cell {
        cell: usize,
        comp: usize,
    },
    Wh1Face {
        face: usize,
        comp: usize,
    },
    Wh2Edge {
        edge: usize,
        comp: usize,
    },
    Wh3Vertex {
        vertex: usize,
        comp: usize,
    },
    Xcell {
        cell: usize,
        rm: usize,
    },
    Phi1Face {
        face: usize,
        rm: usize,
    },
    Phi2Edge {
        edge: usize,
        rm: usize,
    },
    Phi3Vertex {
        vertex: usize,
        rm: usize,
    },
    PhiNormal {
        face: usize,
        j: usize,
    },
    XHat2 {
        edge: usize,
        j: usize,
    },
    RMFace {
        face: usize,
        j: usize,
    },
    RMEdge {
        edge: usize,
    },
    P1nFace {
        face: usize,
        j: usize,
    },
    P1nEdge {
        edge: usize,
        normal: usize,
        vert: usize,
    },
    P1nVertex {
        vertex: usize,
        comp: usize,
    },
    P0nFace {
        face: usize,
    },
    P0nEdge {
        edge: usize,
        normal: usize,
    },
    P0nVertex {
        vertex: usize,
        comp: usize,
    },
    ScalarLagNode {
        vertex: usize,
    },
    ScalarNedEdge {
        edge: usize,
    },
    ScalarRTFace {
        face: usize,
    },
    ScalarP0Cell {
        cell: usize,
    },
    HessV1Face {
        face: usize,
    },
    HessV2Edge {
        edge: usize,
        i: usize,
    },
    HessV3Vertex {
        vertex: usize,
        comp: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NedCMoment {
    /// value moment: mean of the tangential component
    Value,
    /// derivative moment: tangential derivative of the tangential component
    Derivative,
}

#[derive(Clone, Debug)]
pub struct DofSpace {
    pub id: SpaceId,
    pub dofs: Vec<DofKind>,
}

impl DofSpace {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// Position of each DofKind, for assembling matrix rows deterministically.
    pub fn position(&self, dof: &DofKind) -> Option<usize> {
        self.dofs.iter().position(|d| d == dof)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown space id `{0}`")]
pub struct UnknownSpace(pub String);

pub fn enumerate_space(id: SpaceId, mesh: &SimplicialComplex3) -> DofSpace {
    use DofKind::*;
    let mut dofs = Vec::new();
    match id {
        SpaceId::Lag => {
            for v in 0..mesh.num_vertices() {
                for comp in 0..3 {
                    dofs.push(LagNode { vertex: v, comp });
                }
            }
        }
        SpaceId::Reg => {
            for e in 0..mesh.num_edges() {
                dofs.push(RegEdge { edge: e });
            }
        }
        SpaceId::RegPrime => {
            for e in mesh.interior_edges() {
                dofs.push(RegPrimeEdge { edge: e });
            }
        }
        SpaceId::LagPrime => {
            for v in mesh.interior_vertices() {
                for comp in 0..3 {
                    dofs.push(LagPrimeVertex { vertex: v, comp });
                }
            }
        }
        SpaceId::Ned => {
            for e in 0..mesh.num_edges() {
                dofs.push(NedEdge { edge: e });
            }
        }
        SpaceId::NedC => {
            for e in 0..mesh.num_edges() {
                dofs.push(NedCEdge {
                    edge: e,
                    moment: NedCMoment::Value,
                });
                dofs.push(NedCEdge {
                    edge: e,
                    moment: NedCMoment::Derivative,
                });
            }
        }
        SpaceId::Vh1 => {
            for e in 0..mesh.num_edges() {
                dofs.push(RegEdge { edge: e });
            }
            for k in 0..mesh.num_tets() {
                for axis in 0..3 {
                    dofs.push(CellSkw { cell: k, axis });
                }
            }
        }
        SpaceId::Vh2 => {
            for f in mesh.interior_faces() {
                dofs.push(Vh2FaceNT { face: f, i: 0 });
                dofs.push(Vh2FaceNT { face: f, i: 1 });
                dofs.push(Vh2FaceTT { face: f });
            }
        }
        SpaceId::Vh3 => {
            for e in mesh.interior_edges() {
                dofs.push(Vh3EdgeN { edge: e, i: 0 });
                dofs.push(Vh3EdgeN { edge: e, i: 1 });
            }
        }
        SpaceId::Wh0 => {
            for k in 0..mesh.num_tets() {
                for comp in 0..3 {
                    dofs.push(Wh0Cell { cell: k, comp });
                }
            }
        }
        SpaceId::Wh1 => {
            for f in mesh.interior_faces() {
                for comp in 0..3 {
                    dofs.push(Wh1Face { face: f, comp });
                }
            }
        }
        SpaceId::Wh2 => {
            for e in mesh.interior_edges() {
                for comp in 0..3 {
                    dofs.push(Wh2Edge { edge: e, comp });
                }
            }
        }
        SpaceId::Wh3 => {
            for v in mesh.interior_vertices() {
                for comp in 0..3 {
                    dofs.push(Wh3Vertex { vertex: v, comp });
                }
            }
        }
        SpaceId::X0 => {
            for k in 0..mesh.num_tets() {
                for rm in 0..6 {
                    dofs.push(Xcell { cell: k, rm });
                }
            }
        }
        SpaceId::X1 => {
            for f in mesh.interior_faces() {
                for rm in 0..6 {
                    dofs.push(Phi1Face { face: f, rm });
                }
            }
        }
        SpaceId::X2 => {
            for e in mesh.interior_edges() {
                for rm in 0..6 {
                    dofs.push(Phi2Edge { edge: e, rm });
                }
            }
        }
        SpaceId::X3 => {
            for v in mesh.interior_vertices() {
                for rm in 0..6 {
                    dofs.push(Phi3Vertex { vertex: v, rm });
                }
            }
        }
        SpaceId::Phi => {
            for f in mesh.interior_faces() {
                for j in 0..3 {
                    dofs.push(PhiNormal { face: f, j });
                }
            }
        }
        SpaceId::XHat2 => {
            for e in mesh.interior_edges() {
                for j in 0..5 {
                    dofs.push(XHat2 { edge: e, j });
                }
            }
        }
        SpaceId::RMFaceSpace => {
            for f in mesh.interior_faces() {
                for j in 0..3 {
                    dofs.push(RMFace { face: f, j });
                }
            }
        }
        SpaceId::RMEdgeSpace => {
            for e in mesh.interior_edges() {
                dofs.push(RMEdge { edge: e });
            }
        }
        SpaceId::P1nF => {
            for f in mesh.interior_faces() {
                for j in 0..3 {
                    dofs.push(P1nFace { face: f, j });
                }
            }
        }
        SpaceId::P1nE => {
            for e in mesh.interior_edges() {
                for normal in 0..2 {
                    for vert in 0..2 {
                        dofs.push(P1nEdge {
                            edge: e,
                            normal,
                            vert,
                        });
                    }
                }
            }
        }
        SpaceId::P1nX => {
            for v in mesh.interior_vertices() {
                for comp in 0..3 {
                    dofs.push(P1nVertex { vertex: v, comp });
                }
            }
        }
        SpaceId::P0nF => {
            for f in mesh.interior_faces() {
                dofs.push(P0nFace { face: f });
            }
        }
        SpaceId::P0nE => {
            for e in mesh.interior_edges() {
                for normal in 0..2 {
                    dofs.push(P0nEdge { edge: e, normal });
                }
            }
        }
        SpaceId::P0nX => {
            for v in mesh.interior_vertices() {
                for comp in 0..3 {
                    dofs.push(P0nVertex { vertex: v, comp });
                }
            }
        }
        SpaceId::ScalarLag => {
            for v in 0..mesh.num_vertices() {
                dofs.push(ScalarLagNode { vertex: v });
            }
        }
        SpaceId::ScalarNed => {
            for e in 0..mesh.num_edges() {
                dofs.push(ScalarNedEdge { edge: e });
            }
        }
        SpaceId::ScalarRT => {
            for f in 0..mesh.num_faces() {
                dofs.push(ScalarRTFace { face: f });
            }
        }
        SpaceId::ScalarP0 => {
            for k in 0..mesh.num_tets() {
                dofs.push(ScalarP0Cell { cell: k });
            }
        }
        SpaceId::HessV1 => {
            for f in mesh.interior_faces() {
                dofs.push(HessV1Face { face: f });
            }
        }
        SpaceId::HessV2 => {
            for e in mesh.interior_edges() {
                dofs.push(HessV2Edge { edge: e, i: 0 });
                dofs.push(HessV2Edge { edge: e, i: 1 });
            }
        }
        SpaceId::HessV3 => {
            for v in mesh.interior_vertices() {
                for comp in 0..3 {
                    dofs.push(HessV3Vertex { vertex: v, comp });
                }
            }
        }
    }
    DofSpace { id, dofs }
}

// ---------------------------------------------------------------------------
// Computed basis data for the solved families
// ---------------------------------------------------------------------------

/// The unique rigid motion whose restriction to face `f` equals
/// `lambda_j * n_f` (barycentric hat of the j-th face vertex, scaled normal).
/// A rigid motion is linear, so it suffices to match values at the three
/// vertices; the 9x6 system is consistent and has a unique solution.
pub fn phi_normal_rm(
    mesh: &SimplicialComplex3,
    frames: &FrameSet,
    f: usize,
    j: usize,
) -> RigidMotion {
    let n = &frames.faces[f].n;
    let verts = mesh.faces[f];
    let mut a_rows: Vec<Vec<Q>> = Vec::with_capacity(9);
    let mut b_rhs: Vec<Q> = Vec::with_capacity(9);
    for (vi, &v) in verts.iter().enumerate() {
        let x = &mesh.points[v];
        // p(x) = a + b x x; row for component c of p(x)
        for c in 0..3 {
            let mut row = vec![Q::zero(); 6];
            row[c] = num::One::one();
            // (b x x)_c = sum_d eps(c,d,?) ... build by columns: derivative of
            // (b x x)_c with respect to b_d is (e_d x x)_c
            for d in 0..3 {
                row[3 + d] = Vec3::axis(d).cross(x).0[c].clone();
            }
            a_rows.push(row);
            let target = if vi == j { n.0[c].clone() } else { Q::zero() };
            b_rhs.push(target);
        }
    }
    let sol = solve_overdetermined(&a_rows, &b_rhs)
        .expect("normal-trace rigid motion system must be consistent");
    RigidMotion::from_coords(&sol)
}

/// Deterministic basis of the 5-dimensional space of rigid motions whose
/// tangential component vanishes along edge `e` (the value of `p . t_e` is
/// constant along an edge, so one linear constraint suffices).
pub fn xhat2_basis(mesh: &SimplicialComplex3, frames: &FrameSet, e: usize) -> Vec<RigidMotion> {
    let t = &frames.edges[e].t;
    let m = mesh.edge_midpoint(e);
    // (a + b x m) . t = a.t + b.(m x t)
    let mut row = t.0.to_vec();
    row.extend(m.cross(t).0.clone());
    let basis = crate::smallalg::nullspace_dense(&[row]);
    assert_eq!(basis.len(), 5, "tangential constraint has rank 1");
    basis.iter().map(|v| RigidMotion::from_coords(v)).collect()
}

/// Payload data of a basis functional, in scaled frames.
#[derive(Clone, Debug)]
pub enum Payload {
    /// matrix delta on a simplex
    Matrix(Mat3),
    /// vector delta on a simplex
    Vector(Vec3),
    /// scalar (nodal or delta) functional
    Scalar(Q),
    /// functional taking a rigid motion argument, stored by (a,b)
    RigidMotion(RigidMotion),
}

/// Exact payload of a DOF in scaled frames, together with the carrying
/// simplex (as sorted vertex indices) and a short description of the
/// functional.
pub fn payload(
    dof: &DofKind,
    mesh: &SimplicialComplex3,
    frames: &FrameSet,
) -> (Vec<usize>, Payload, &'static str) {
    use DofKind::*;
    let q1: Q = num::One::one();
    match *dof {
        LagNode { vertex, comp } => (
            vec![vertex],
            Payload::Vector(Vec3::axis(comp)),
            "vertex value of one component",
        ),
        RegEdge { edge } => {
            let t = &frames.edges[edge].t;
            (
                mesh.edges[edge].to_vec(),
                Payload::Matrix(t.outer(t)),
                "tangential-tangential edge moment",
            )
        }
        RegPrimeEdge { edge } => {
            let t = &frames.edges[edge].t;
            (
                mesh.edges[edge].to_vec(),
                Payload::Matrix(t.outer(t)),
                "tangential-tangential edge delta",
            )
        }
        LagPrimeVertex { vertex, comp }
        | Wh3Vertex { vertex, comp }
        | P0nVertex { vertex, comp }
        | P1nVertex { vertex, comp }
        | HessV3Vertex { vertex, comp } => (
            vec![vertex],
            Payload::Vector(Vec3::axis(comp)),
            "vector vertex delta",
        ),
        NedEdge { edge } => (
            mesh.edges[edge].to_vec(),
            Payload::Vector(frames.edges[edge].t.clone()),
            "tangential edge moment",
        ),
        NedCEdge { edge, moment } => (
            mesh.edges[edge].to_vec(),
            Payload::Vector(frames.edges[edge].t.clone()),
            match moment {
                NedCMoment::Value => "tangential edge moment (value)",
                NedCMoment::Derivative => "tangential edge moment (derivative)",
            },
        ),
        CellSkw { cell, axis } => (
            mesh.tets[cell].to_vec(),
            Payload::Matrix(crate::smallalg::mskw(&Vec3::axis(axis))),
            "cellwise skew mode",
        ),
        Vh2FaceNT { face, i } => {
            let fr = &frames.faces[face];
            let t = if i == 0 { &fr.t1 } else { &fr.t2 };
            (
                mesh.faces[face].to_vec(),
                Payload::Matrix(fr.n.outer(t)),
                "normal-tangential face delta",
            )
        }
        Vh2FaceTT { face } => {
            let fr = &frames.faces[face];
            let nn = fr.n.norm2();
            let payload = &Mat3::identity().scale(&nn) - &fr.n.outer(&fr.n);
            (
                mesh.faces[face].to_vec(),
                Payload::Matrix(payload),
                "tangential-trace face delta",
            )
        }
        Vh3EdgeN { edge, i } => {
            let fr = &frames.edges[edge];
            let n = if i == 0 { &fr.n1 } else { &fr.n2 };
            (
                mesh.edges[edge].to_vec(),
                Payload::Vector(n.clone()),
                "normal edge delta",
            )
        }
        Wh0Cell { cell, comp } => (
            mesh.tets[cell].to_vec(),
            Payload::Vector(Vec3::axis(comp)),
            "cellwise constant vector",
        ),
        Wh1Face { face, comp } => (
            mesh.faces[face].to_vec(),
            Payload::Matrix(Vec3::axis(comp).outer(&frames.faces[face].n)),
            "axis-normal face delta",
        ),
        Wh2Edge { edge, comp } => (
            mesh.edges[edge].to_vec(),
            Payload::Matrix(Vec3::axis(comp).outer(&frames.edges[edge].t)),
            "axis-tangent edge delta",
        ),
        Xcell { cell, rm } => (
            mesh.tets[cell].to_vec(),
            Payload::RigidMotion(crate::smallalg::rm_basis()[rm].clone()),
            "cellwise rigid motion",
        ),
        Phi1Face { face, rm } => (
            mesh.faces[face].to_vec(),
            Payload::RigidMotion(crate::smallalg::rm_basis()[rm].clone()),
            "face functional with rigid motion argument",
        ),
        Phi2Edge { edge, rm } => (
            mesh.edges[edge].to_vec(),
            Payload::RigidMotion(crate::smallalg::rm_basis()[rm].clone()),
            "edge functional with rigid motion argument",
        ),
        Phi3Vertex { vertex, rm } => (
            vec![vertex],
            Payload::RigidMotion(crate::smallalg::rm_basis()[rm].clone()),
            "vertex functional with rigid motion argument",
        ),
        PhiNormal { face, j } => (
            mesh.faces[face].to_vec(),
            Payload::RigidMotion(phi_normal_rm(mesh, frames, face, j)),
            "face functional with normal linear argument",
        ),
        XHat2 { edge, j } => (
            mesh.edges[edge].to_vec(),
            Payload::RigidMotion(xhat2_basis(mesh, frames, edge)[j].clone()),
            "edge functional with tangentially vanishing argument",
        ),
        RMFace { face, .. } => (
            mesh.faces[face].to_vec(),
            Payload::Scalar(q1.clone()),
            "tangential rigid motion on a face (edge-moment coordinate)",
        ),
        RMEdge { edge } => (
            mesh.edges[edge].to_vec(),
            Payload::Scalar(q1.clone()),
            "tangential rigid motion on an edge",
        ),
        P1nFace { face, j } => {
            let _ = j;
            (
                mesh.faces[face].to_vec(),
                Payload::Vector(frames.faces[face].n.clone()),
                "barycentric-times-normal field on a face",
            )
        }
        P1nEdge { edge, normal, .. } => {
            let fr = &frames.edges[edge];
            let n = if normal == 0 { &fr.n1 } else { &fr.n2 };
            (
                mesh.edges[edge].to_vec(),
                Payload::Vector(n.clone()),
                "barycentric-times-normal field on an edge",
            )
        }
        P0nFace { face } => (
            mesh.faces[face].to_vec(),
            Payload::Vector(frames.faces[face].n.clone()),
            "constant normal field on a face",
        ),
        P0nEdge { edge, normal } => {
            let fr = &frames.edges[edge];
            let n = if normal == 0 { &fr.n1 } else { &fr.n2 };
            (
                mesh.edges[edge].to_vec(),
                Payload::Vector(n.clone()),
                "constant normal field on an edge",
            )
        }
        ScalarLagNode { vertex } => (
            vec![vertex],
            Payload::Scalar(q1.clone()),
            "scalar vertex value",
        ),
        ScalarNedEdge { edge } => (
            mesh.edges[edge].to_vec(),
            Payload::Scalar(q1.clone()),
            "scalar tangential edge moment",
        ),
        ScalarRTFace { face } => (
            mesh.faces[face].to_vec(),
            Payload::Scalar(q1.clone()),
            "scalar normal face moment",
        ),
        ScalarP0Cell { cell } => (
            mesh.tets[cell].to_vec(),
            Payload::Scalar(q1.clone()),
            "scalar cell mean",
        ),
        HessV1Face { face } => {
            let n = &frames.faces[face].n;
            (
                mesh.faces[face].to_vec(),
                Payload::Matrix(n.outer(n)),
                "normal-normal face delta",
            )
        }
        HessV2Edge { edge, i } => {
            let fr = &frames.edges[edge];
            let n = if i == 0 { &fr.n1 } else { &fr.n2 };
            (
                mesh.edges[edge].to_vec(),
                Payload::Matrix(n.outer(&fr.t)),
                "normal-tangential edge delta",
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};
    use crate::rational::q;
    use num::Zero;

    #[test]
    fn dimension_formulas_on_test_meshes() {
        for kind in [
            MeshKind::Tet,
            MeshKind::Box(2, 2, 2),
            MeshKind::Tunnel,
            MeshKind::Cavity,
        ] {
            let m = generate_mesh(kind).unwrap();
            let (nv, ne, nf, nk) = (m.num_vertices(), m.num_edges(), m.num_faces(), m.num_tets());
            let (v0, e0, f0) = (
                m.interior_vertices().len(),
                m.interior_edges().len(),
                m.interior_faces().len(),
            );
            let dim = |id| enumerate_space(id, &m).dim();
            assert_eq!(dim(SpaceId::Lag), 3 * nv);
            assert_eq!(dim(SpaceId::Reg), ne);
            assert_eq!(dim(SpaceId::RegPrime), e0);
            assert_eq!(dim(SpaceId::LagPrime), 3 * v0);
            assert_eq!(dim(SpaceId::Ned), ne);
            assert_eq!(dim(SpaceId::NedC), 2 * ne);
            assert_eq!(dim(SpaceId::Vh1), ne + 3 * nk);
            assert_eq!(dim(SpaceId::Vh2), 3 * f0);
            assert_eq!(dim(SpaceId::Vh3), 2 * e0);
            assert_eq!(dim(SpaceId::Wh0), 3 * nk);
            assert_eq!(dim(SpaceId::Wh1), 3 * f0);
            assert_eq!(dim(SpaceId::Wh2), 3 * e0);
            assert_eq!(dim(SpaceId::Wh3), 3 * v0);
            assert_eq!(dim(SpaceId::X0), 6 * nk);
            assert_eq!(dim(SpaceId::X1), 6 * f0);
            assert_eq!(dim(SpaceId::X2), 6 * e0);
            assert_eq!(dim(SpaceId::X3), 6 * v0);
            assert_eq!(dim(SpaceId::Phi), 3 * f0);
            assert_eq!(dim(SpaceId::XHat2), 5 * e0);
            assert_eq!(dim(SpaceId::RMFaceSpace), 3 * f0);
            assert_eq!(dim(SpaceId::RMEdgeSpace), e0);
            assert_eq!(dim(SpaceId::P1nF), 3 * f0);
            assert_eq!(dim(SpaceId::P1nE), 4 * e0);
            assert_eq!(dim(SpaceId::P1nX), 3 * v0);
            assert_eq!(dim(SpaceId::P0nF), f0);
            assert_eq!(dim(SpaceId::P0nE), 2 * e0);
            assert_eq!(dim(SpaceId::P0nX), 3 * v0);
            assert_eq!(dim(SpaceId::ScalarLag), nv);
            assert_eq!(dim(SpaceId::ScalarNed), ne);
            assert_eq!(dim(SpaceId::ScalarRT), nf);
            assert_eq!(dim(SpaceId::ScalarP0), nk);
            assert_eq!(dim(SpaceId::HessV1), f0);
            assert_eq!(dim(SpaceId::HessV2), 2 * e0);
            assert_eq!(dim(SpaceId::HessV3), 3 * v0);
        }
    }

    #[test]
    fn vh1_on_single_tet() {
        let m = generate_mesh(MeshKind::Tet).unwrap();
        assert_eq!(enumerate_space(SpaceId::Vh1, &m).dim(), 9);
        // Regge complex spaces on single tet: (12, 6, 0, 0)
        assert_eq!(enumerate_space(SpaceId::Lag, &m).dim(), 12);
        assert_eq!(enumerate_space(SpaceId::Reg, &m).dim(), 6);
        assert_eq!(enumerate_space(SpaceId::RegPrime, &m).dim(), 0);
        assert_eq!(enumerate_space(SpaceId::LagPrime, &m).dim(), 0);
    }

    #[test]
    fn phi_normal_solves_trace_condition() {
        let m = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let fr = m.frames();
        let f = m.interior_faces()[0];
        for j in 0..3 {
            let p = phi_normal_rm(&m, &fr, f, j);
            for (vi, &v) in m.faces[f].iter().enumerate() {
                let val = p.eval(&m.points[v]);
                let expect = if vi == j {
                    fr.faces[f].n.clone()
                } else {
                    Vec3::zero()
                };
                assert_eq!(val, expect);
            }
        }
    }

    #[test]
    fn xhat2_basis_satisfies_constraint() {
        let m = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let fr = m.frames();
        for &e in m.interior_edges().iter().take(5) {
            let basis = xhat2_basis(&m, &fr, e);
            assert_eq!(basis.len(), 5);
            let [a, b] = m.edges[e];
            for p in &basis {
                // tangential component vanishes at both endpoints
                assert!(p.eval(&m.points[a]).dot(&fr.edges[e].t).is_zero());
                assert!(p.eval(&m.points[b]).dot(&fr.edges[e].t).is_zero());
            }
        }
    }

    #[test]
    fn space_id_round_trip() {
        for id in [
            SpaceId::Lag,
            SpaceId::XHat2,
            SpaceId::P1nE,
            SpaceId::HessV2,
            SpaceId::ScalarP0,
        ] {
            assert_eq!(SpaceId::parse(id.as_str()), Some(id));
        }
        assert_eq!(SpaceId::parse("bogus"), None);
    }

    #[test]
    fn payload_examples() {
        let m = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let fr = m.frames();
        let f = m.interior_faces()[0];
        let (simplex, p, _) = payload(&DofKind::Vh2FaceNT { face: f, i: 0 }, &m, &fr);
        assert_eq!(simplex, m.faces[f].to_vec());
        match p {
            Payload::Matrix(mat) => assert_eq!(mat, fr.faces[f].n.outer(&fr.faces[f].t1)),
            _ => panic!("expected matrix payload"),
        }
        // tangential-trace payload is symmetric and annihilates the normal
        let (_, ptt, _) = payload(&DofKind::Vh2FaceTT { face: f }, &m, &fr);
        match ptt {
            Payload::Matrix(mat) => {
                assert_eq!(mat, mat.transpose());
                assert!(mat.mul_vec(&fr.faces[f].n).is_zero());
                assert_eq!(mat.trace(), fr.faces[f].n.norm2() * q(2));
            }
            _ => panic!("expected matrix payload"),
        }
    }
}
