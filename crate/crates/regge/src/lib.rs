//! Exact discrete differential complexes on 3D tetrahedral meshes.
//!
//! Everything in this crate is computed over arbitrary-precision rationals:
//! meshes carry rational coordinates, degree-of-freedom spaces are enumerated
//! with explicit rational payloads, differential operators are assembled as
//! exact sparse matrices, and cohomology dimensions come from exact rank
//! computations. The point is to make dimension-level statements about the
//! Regge elasticity sequence, its twisted (coframe/connection) extension and
//! a family of auxiliary distributional complexes checkable as integer
//! equalities rather than floating-point approximations.

// index loops are the clearer form in the elimination and assembly kernels,
// where iterator rewrites conflict with in-place row updates
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod cartan;
pub mod homology;
pub mod mesh;
pub mod par;
pub mod poly;
pub mod rational;
pub mod smallalg;
pub mod spaces;
pub mod verify;

pub use homology::{CochainComplex, CohomologyReport, SparseMat};
pub use mesh::{MeshKind, SimplicialComplex3};
pub use rational::Q;
