//! Randomized invariants of the exact arithmetic layers.

use num::Zero;
use proptest::prelude::*;

use regge::homology::SparseMat;
use regge::rational::{fmt_q, parse_q, qr};
use regge::smallalg::{mskw, sym, vskw, Mat3, Vec3};

fn arb_q() -> impl Strategy<Value = regge::rational::Q> {
    (-1000i64..1000, 1i64..60).prop_map(|(n, d)| qr(n, d))
}

fn arb_vec3() -> impl Strategy<Value = Vec3> {
    [arb_q(), arb_q(), arb_q()].prop_map(Vec3)
}

fn arb_mat3() -> impl Strategy<Value = Mat3> {
    [arb_vec3(), arb_vec3(), arb_vec3()].prop_map(|rows| Mat3(rows.map(|r| r.0)))
}

proptest! {
    #[test]
    fn rational_text_round_trip(v in arb_q()) {
        prop_assert_eq!(parse_q(&fmt_q(&v)).unwrap(), v);
    }

    #[test]
    fn skew_embedding_reproduces_cross_product(a in arb_vec3(), b in arb_vec3()) {
        prop_assert_eq!(mskw(&a).mul_vec(&b), a.cross(&b));
    }

    #[test]
    fn symmetric_part_plus_skew_part_is_identity(m in arb_mat3()) {
        let recomposed = &sym(&m) + &mskw(&vskw(&m));
        prop_assert_eq!(recomposed, m);
    }

    #[test]
    fn rank_is_transpose_invariant(entries in proptest::collection::vec(arb_q(), 16)) {
        let mut m = SparseMat::zero(4, 4);
        for (k, v) in entries.into_iter().enumerate() {
            if !v.is_zero() {
                m.set(k / 4, k % 4, v);
            }
        }
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }
}
