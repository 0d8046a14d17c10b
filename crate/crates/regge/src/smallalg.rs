//! Exact 3D vector/matrix algebra, rigid motions, and the pointwise tensor
//! identity suite used to sanity-check every algebraic convention in the
//! crate.

use crate::poly::{MatPoly, VecPoly};
use crate::rational::{q, Q};
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq)]
pub struct Vec3(pub [Q; 3]);

#[derive(Clone, PartialEq, Eq)]
pub struct Mat3(pub [[Q; 3]; 3]);

impl fmt::Debug for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.0 {
            writeln!(f, "[{} {} {}]", r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

impl Vec3 {
    pub fn zero() -> Self {
        Vec3([Q::zero(), Q::zero(), Q::zero()])
    }

    pub fn new(x: Q, y: Q, z: Q) -> Self {
        Vec3([x, y, z])
    }

    pub fn from_i64(x: i64, y: i64, z: i64) -> Self {
        Vec3([q(x), q(y), q(z)])
    }

    pub fn axis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = Q::one();
        v
    }

    pub fn dot(&self, o: &Vec3) -> Q {
        (0..3).map(|i| &self.0[i] * &o.0[i]).sum()
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ])
    }

    pub fn scale(&self, s: &Q) -> Vec3 {
        Vec3([&self.0[0] * s, &self.0[1] * s, &self.0[2] * s])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn outer(&self, o: &Vec3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i] * &o.0[j])
        }))
    }

    /// Squared Euclidean length (always rational).
    pub fn norm2(&self) -> Q {
        self.dot(self)
    }
}

impl Add for &Vec3 {
    type Output = Vec3;
    fn add(self, o: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Sub for &Vec3 {
    type Output = Vec3;
    fn sub(self, o: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }
}

impl Neg for &Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3(std::array::from_fn(|i| -&self.0[i]))
    }
}

impl Mat3 {
    pub fn zero() -> Self {
        Mat3(std::array::from_fn(|_| std::array::from_fn(|_| Q::zero())))
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = Q::one();
        }
        m
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i].clone())
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.0[i][j].clone()))
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].clone())
        }))
    }

    pub fn trace(&self) -> Q {
        &(&self.0[0][0] + &self.0[1][1]) + &self.0[2][2]
    }

    pub fn scale(&self, s: &Q) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i][j] * s)
        }))
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.row(i).dot(v)))
    }

    /// v^T M w, exact.
    pub fn bilinear(&self, v: &Vec3, w: &Vec3) -> Q {
        v.dot(&self.mul_vec(w))
    }

    /// Frobenius pairing A : B.
    pub fn frobenius(&self, o: &Mat3) -> Q {
        let mut s = Q::zero();
        for i in 0..3 {
            for j in 0..3 {
                s += &self.0[i][j] * &o.0[i][j];
            }
        }
        s
    }

    /// Row-wise cross product with a vector: row i of the result is
    /// `row_i(self) x v`.
    pub fn cross_vec(&self, v: &Vec3) -> Mat3 {
        let rows: [Vec3; 3] = std::array::from_fn(|i| self.row(i).cross(v));
        Mat3(std::array::from_fn(|i| rows[i].0.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    pub fn det(&self) -> Q {
        let m = &self.0;
        &(&(&m[0][0] * &(&(&m[1][1] * &m[2][2]) - &(&m[1][2] * &m[2][1])))
            - &(&m[0][1] * &(&(&m[1][0] * &m[2][2]) - &(&m[1][2] * &m[2][0]))))
            + &(&m[0][2] * &(&(&m[1][0] * &m[2][1]) - &(&m[1][1] * &m[2][0])))
    }
}

impl Add for &Mat3 {
    type Output = Mat3;
    fn add(self, o: &Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i][j] + &o.0[i][j])
        }))
    }
}

impl Sub for &Mat3 {
    type Output = Mat3;
    fn sub(self, o: &Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i][j] - &o.0[i][j])
        }))
    }
}

impl Neg for &Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| -&self.0[i][j])
        }))
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;
    fn mul(self, o: &Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.row(i).dot(&o.col(j)))
        }))
    }
}

// ---------------------------------------------------------------------------
// Pointwise algebraic maps
// ---------------------------------------------------------------------------

pub fn sym(m: &Mat3) -> Mat3 {
    (m + &m.transpose()).scale(&crate::rational::qr(1, 2))
}

pub fn skw(m: &Mat3) -> Mat3 {
    (m - &m.transpose()).scale(&crate::rational::qr(1, 2))
}

pub fn dev(m: &Mat3) -> Mat3 {
    let t = m.trace() / q(3);
    m - &Mat3::identity().scale(&t)
}

pub fn iota(s: &Q) -> Mat3 {
    Mat3::identity().scale(s)
}

/// The skew matrix with `mskw(v) w = v x w`.
pub fn mskw(v: &Vec3) -> Mat3 {
    let [a, b, c] = &v.0;
    Mat3([
        [Q::zero(), -c.clone(), b.clone()],
        [c.clone(), Q::zero(), -a.clone()],
        [-b.clone(), a.clone(), Q::zero()],
    ])
}

/// Inverse of `mskw` composed with the skew part.
pub fn vskw(m: &Mat3) -> Vec3 {
    let s = skw(m);
    Vec3([s.0[2][1].clone(), s.0[0][2].clone(), s.0[1][0].clone()])
}

/// `S u = u^T - tr(u) I`.
pub fn s_op(m: &Mat3) -> Mat3 {
    &m.transpose() - &iota(&m.trace())
}

/// Inverse of `s_op` in 3D: `v^T - tr(v)/2 I`.
pub fn s_inv(m: &Mat3) -> Mat3 {
    &m.transpose() - &iota(&(m.trace() / q(2)))
}

// ---------------------------------------------------------------------------
// Rigid motions
// ---------------------------------------------------------------------------

/// Infinitesimal rigid motion `x -> a + b x x`, stored by its canonical
/// coordinates `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidMotion {
    pub a: Vec3,
    pub b: Vec3,
}

impl RigidMotion {
    pub fn new(a: Vec3, b: Vec3) -> Self {
        RigidMotion { a, b }
    }

    pub fn zero() -> Self {
        RigidMotion::new(Vec3::zero(), Vec3::zero())
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        &self.a + &self.b.cross(x)
    }

    /// `curl(a + b x x) = 2b`.
    pub fn curl(&self) -> Vec3 {
        self.b.scale(&q(2))
    }

    /// Constant (skew) gradient of the field, row-wise convention:
    /// `grad p = (b x x) nabla = -mskw(b)`... the row-wise gradient of
    /// `x -> b x x` is `mskw(b)^T`.
    pub fn grad(&self) -> Mat3 {
        mskw(&self.b).transpose()
    }

    pub fn add(&self, o: &RigidMotion) -> RigidMotion {
        RigidMotion::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn scale(&self, s: &Q) -> RigidMotion {
        RigidMotion::new(self.a.scale(s), self.b.scale(s))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Coordinates in the canonical basis returned by [`rm_basis`].
    pub fn coords(&self) -> [Q; 6] {
        [
            self.a.0[0].clone(),
            self.a.0[1].clone(),
            self.a.0[2].clone(),
            self.b.0[0].clone(),
            self.b.0[1].clone(),
            self.b.0[2].clone(),
        ]
    }

    pub fn from_coords(c: &[Q]) -> Self {
        assert_eq!(c.len(), 6);
        RigidMotion::new(
            Vec3([c[0].clone(), c[1].clone(), c[2].clone()]),
            Vec3([c[3].clone(), c[4].clone(), c[5].clone()]),
        )
    }
}

/// Canonical basis of the 6-dimensional rigid motion space: three
/// translations followed by three rotations.
pub fn rm_basis() -> [RigidMotion; 6] {
    std::array::from_fn(|i| {
        if i < 3 {
            RigidMotion::new(Vec3::axis(i), Vec3::zero())
        } else {
            RigidMotion::new(Vec3::zero(), Vec3::axis(i - 3))
        }
    })
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
#[error("algebraic identity `{identity}` violated: {detail}")]
pub struct IdentityViolated {
    pub identity: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub instances_per_identity: usize,
    pub identities: Vec<String>,
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    let n = rng.gen_range(-9i64..=9);
    let d = rng.gen_range(1i64..=4);
    crate::rational::qr(n, d)
}

pub fn rand_vec3(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3(std::array::from_fn(|_| rand_q(rng)))
}

pub fn rand_mat3(rng: &mut ChaCha8Rng) -> Mat3 {
    Mat3(std::array::from_fn(|_| {
        std::array::from_fn(|_| rand_q(rng))
    }))
}

pub fn rand_rm(rng: &mut ChaCha8Rng) -> RigidMotion {
    RigidMotion::new(rand_vec3(rng), rand_vec3(rng))
}

/// Check the pointwise tensor identities underpinning the discrete
/// operators, with exact polynomial differentiation on random rational
/// inputs. Any violation is an implementation bug, never a tolerated state.
pub fn verify_pointwise_identities(seed: u64) -> Result<IdentityReport, IdentityViolated> {
    const N: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = Vec::new();

    // (a) curl lift: p.curl(A).n = curl(A^T p).n + 1/2 n.A.curl(p)
    // for rigid motions p and traceless polynomial matrices A.
    for k in 0..N {
        let p = rand_rm(&mut rng);
        let n = rand_vec3(&mut rng);
        let mut a = MatPoly::rand(&mut rng, 2);
        a = a.make_traceless();
        let p_poly = VecPoly::from_rigid_motion(&p);
        let lhs = a.curl_rows().transpose_mul_vecpoly(&p_poly).dot_const(&n);
        let curl_pa = a.transpose_mul_vecpoly(&p_poly).curl();
        let half = crate::rational::qr(1, 2);
        let corr = a.mul_const_vec(&p.curl()).dot_const(&n).scale(&half);
        let rhs = &curl_pa.dot_const(&n) + &corr;
        if lhs != rhs {
            return Err(IdentityViolated {
                identity: "curl-lift",
                detail: format!("instance {k}: lhs != rhs"),
            });
        }
    }
    done.push("curl-lift".to_string());

    // (b) grad u : (a ox b) - Def u : (a ox b) = -1/2 curl u . (a x b)
    for k in 0..N {
        let u = VecPoly::rand(&mut rng, 2);
        let a = rand_vec3(&mut rng);
        let b = rand_vec3(&mut rng);
        let g = u.grad_rows();
        let d = g.sym();
        let ab = a.outer(&b);
        let lhs = &g.frobenius_const(&ab) - &d.frobenius_const(&ab);
        let rhs = u
            .curl()
            .dot_const(&a.cross(&b))
            .scale(&crate::rational::qr(-1, 2));
        if lhs != rhs {
            return Err(IdentityViolated {
                identity: "symgrad-defect",
                detail: format!("instance {k}"),
            });
        }
    }
    done.push("symgrad-defect".to_string());

    // (c) mskw(c) x n = -(c.n) I + n ox c
    for k in 0..N {
        let c = rand_vec3(&mut rng);
        let n = rand_vec3(&mut rng);
        let lhs = mskw(&c).cross_vec(&n);
        let rhs = &(-&iota(&c.dot(&n))) + &n.outer(&c);
        if lhs != rhs {
            return Err(IdentityViolated {
                identity: "mskw-cross",
                detail: format!("instance {k}"),
            });
        }
    }
    done.push("mskw-cross".to_string());

    // (d) sym = id - mskw o vskw; Sinv o S = S o Sinv = id;
    //     A : mskw(n) = 2 vskw(A) . n;  mskw(v) w = v x w.
    for k in 0..N {
        let u = rand_mat3(&mut rng);
        let n = rand_vec3(&mut rng);
        let v = rand_vec3(&mut rng);
        let w = rand_vec3(&mut rng);
        if sym(&u) != &u - &mskw(&vskw(&u)) {
            return Err(IdentityViolated {
                identity: "sym-decomposition",
                detail: format!("instance {k}"),
            });
        }
        if s_inv(&s_op(&u)) != u || s_op(&s_inv(&u)) != u {
            return Err(IdentityViolated {
                identity: "s-inversion",
                detail: format!("instance {k}"),
            });
        }
        if u.frobenius(&mskw(&n)) != vskw(&u).dot(&n) * q(2) {
            return Err(IdentityViolated {
                identity: "skew-pairing",
                detail: format!("instance {k}"),
            });
        }
        if mskw(&v).mul_vec(&w) != v.cross(&w) {
            return Err(IdentityViolated {
                identity: "mskw-action",
                detail: format!("instance {k}"),
            });
        }
    }
    done.push("sym-decomposition".to_string());
    done.push("s-inversion".to_string());
    done.push("skew-pairing".to_string());
    done.push("mskw-action".to_string());

    // rigid motion facts: curl(a + b x x) = 2b, eval linearity.
    for _ in 0..N {
        let p = rand_rm(&mut rng);
        let pp = VecPoly::from_rigid_motion(&p);
        if pp.curl().as_const().expect("constant curl") != p.b.scale(&q(2)) {
            return Err(IdentityViolated {
                identity: "rm-curl",
                detail: "curl(a + b x x) != 2b".into(),
            });
        }
    }
    done.push("rm-curl".to_string());

    Ok(IdentityReport {
        seed,
        instances_per_identity: N,
        identities: done,
    })
}

// ---------------------------------------------------------------------------
// Small dense exact linear algebra helpers (used all over assembly)
// ---------------------------------------------------------------------------

/// Solve the dense square system `A x = b` over the rationals.
/// Returns `None` when `A` is singular.
pub fn solve_dense(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n) && b.len() == n);
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(r, rhs)| {
            let mut row = r.clone();
            row.push(rhs.clone());
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].clone();
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = &m[r][col] / &inv;
                for c in col..=n {
                    let sub = &factor * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

/// Least-structure solve of a (possibly overdetermined) dense system
/// `A x = b` with `A` of full column rank: solves via the normal-free
/// row-reduction and returns `None` if the system is inconsistent.
pub fn solve_overdetermined(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(r, rhs)| {
            let mut row = r.clone();
            row.push(rhs.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let piv = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(piv) = piv else { continue };
        m.swap(rank, piv);
        let inv = m[rank][col].clone();
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &inv;
                for c in col..=cols {
                    let sub = &factor * &m[rank][c];
                    m[r][c] -= sub;
                }
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    // consistency: rows beyond rank must have zero rhs
    for r in rank..rows {
        if !m[r][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![Q::zero(); cols];
    for (r, c) in pivots {
        x[c] = &m[r][cols] / &m[r][c];
    }
    Some(x)
}

/// Nullspace basis of a dense matrix (rows x cols), as column vectors.
/// Deterministic: free variables are taken in increasing column order.
pub fn nullspace_dense(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let mut pivot_of_col = vec![usize::MAX; cols];
    let mut rank = 0usize;
    for col in 0..cols {
        let piv = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(piv) = piv else { continue };
        m.swap(rank, piv);
        let inv = m[rank][col].clone();
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &inv;
                for c in col..cols {
                    let sub = &factor * &m[rank][c];
                    m[r][c] -= sub;
                }
            }
        }
        pivot_of_col[col] = rank;
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_of_col[free] != usize::MAX {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for c in 0..cols {
            let r = pivot_of_col[c];
            if r != usize::MAX {
                v[c] = -(&m[r][free] / &m[r][c]);
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    #[test]
    fn mskw_matches_table() {
        let m = mskw(&Vec3::from_i64(1, 0, 0));
        let expect = Mat3([[q(0), q(0), q(0)], [q(0), q(0), q(-1)], [q(0), q(1), q(0)]]);
        assert_eq!(m, expect);
    }

    #[test]
    fn s_of_identity() {
        let i = Mat3::identity();
        assert_eq!(s_op(&i), i.scale(&q(-2)));
        assert_eq!(s_inv(&i.scale(&q(-2))), i);
    }

    #[test]
    fn sym_fixed_point_and_vskw_kernel() {
        let m = Mat3([[q(1), q(2), q(3)], [q(2), q(4), q(5)], [q(3), q(5), q(6)]]);
        assert_eq!(sym(&m), m);
        assert!(vskw(&m).is_zero());
    }

    #[test]
    fn rigid_motion_eval_and_curl() {
        let p = RigidMotion::new(Vec3::zero(), Vec3::axis(0));
        assert_eq!(p.eval(&Vec3::from_i64(0, 0, 1)), Vec3::from_i64(0, -1, 0));
        let r = RigidMotion::new(rand_vec3(&mut ChaCha8Rng::seed_from_u64(3)), {
            Vec3([qr(2, 3), qr(-1, 5), q(4)])
        });
        assert_eq!(r.curl(), r.b.scale(&q(2)));
        let c = RigidMotion::new(Vec3::from_i64(5, -2, 7), Vec3::zero());
        for x in [Vec3::zero(), Vec3::from_i64(3, 1, -4)] {
            assert_eq!(c.eval(&x), c.a);
        }
    }

    #[test]
    fn identity_suite_passes() {
        let report = verify_pointwise_identities(7).expect("identities hold");
        assert_eq!(report.instances_per_identity, 20);
        assert!(report.identities.len() >= 7);
    }

    #[test]
    fn trace_of_s_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = rand_mat3(&mut rng);
            assert_eq!(s_op(&u).trace(), u.trace() * q(-2));
        }
    }

    #[test]
    fn dense_solver_round_trip() {
        let a = vec![
            vec![q(2), q(1), q(0)],
            vec![q(0), q(1), q(4)],
            vec![q(1), q(0), q(1)],
        ];
        let b = vec![q(3), q(9), q(3)];
        let x = solve_dense(&a, &b).unwrap();
        for (row, rhs) in a.iter().zip(&b) {
            let lhs: Q = row.iter().zip(&x).map(|(c, v)| c * v).sum();
            assert_eq!(&lhs, rhs);
        }
    }

    #[test]
    fn nullspace_of_skew_matrix() {
        let m = mskw(&Vec3::from_i64(1, 2, 3));
        let rows: Vec<Vec<Q>> = (0..3).map(|i| m.0[i].to_vec()).collect();
        let ns = nullspace_dense(&rows);
        assert_eq!(ns.len(), 1);
    }
}
