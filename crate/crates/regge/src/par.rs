//! Batch rank computation, data-parallel by default.
//!
//! Rank computations for the differentials of a complex (or a whole suite of
//! checks) are independent, so they parallelize trivially. The `parallel`
//! feature (on by default) fans them out with rayon; disabling it falls back
//! to the sequential path with identical results — output order is the input
//! order either way.

use crate::homology::SparseMat;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ranks of a batch of matrices, parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn rank_batch(mats: &[&SparseMat]) -> Vec<usize> {
    mats.par_iter().map(|m| m.rank()).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn rank_batch(mats: &[&SparseMat]) -> Vec<usize> {
    rank_batch_seq(mats)
}

/// Sequential reference implementation, always available (used by the
/// benchmark suite for comparison).
pub fn rank_batch_seq(mats: &[&SparseMat]) -> Vec<usize> {
    mats.iter().map(|m| m.rank()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::relative_boundary_matrices;
    use crate::mesh::{generate_mesh, MeshKind};

    #[test]
    fn parallel_matches_sequential() {
        let m = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let [b1, b2, b3] = relative_boundary_matrices(&m);
        let mats = [&b1, &b2, &b3];
        assert_eq!(rank_batch(&mats), rank_batch_seq(&mats));
    }
}
