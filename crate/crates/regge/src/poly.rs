//! Exact polynomial calculus on scalar, vector and matrix fields over `Q`.
//!
//! Polynomials are sparse maps from exponent triples to rational
//! coefficients. Degrees stay tiny (at most 3 in this crate), so no effort
//! is made to be clever about representation; the value here is exactness:
//! differentiation, composition with affine maps and mean values over
//! simplices are all computed without rounding.

use crate::rational::{q, Q};
use crate::smallalg::{Mat3, RigidMotion, Vec3};
use num::{BigInt, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Sparse polynomial in three variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    /// exponent triple -> coefficient; zero coefficients are never stored.
    terms: BTreeMap<[u32; 3], Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        p.add_term([0, 0, 0], c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0u32; 3];
        e[i] = 1;
        let mut p = Poly::zero();
        p.add_term(e, Q::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: [u32; 3], coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(Q::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = *e;
            d[i] -= 1;
            out.add_term(d, c * q(e[i] as i64));
        }
        out
    }

    pub fn eval(&self, x: &Vec3) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for i in 0..3 {
                for _ in 0..e[i] {
                    term *= &x.0[i];
                }
            }
            acc += term;
        }
        acc
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn as_const(&self) -> Option<Q> {
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&[0, 0, 0]) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Substitute each variable `x_i` by the polynomial `subs[i]`
    /// (in an independent variable set, reusing the same representation).
    pub fn compose(&self, subs: &[Poly; 3]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for i in 0..3 {
                for _ in 0..e[i] {
                    term = &term * &subs[i];
                }
            }
            out = &out + &term;
        }
        out
    }

    fn rand(rng: &mut ChaCha8Rng, deg: u32) -> Poly {
        let mut p = Poly::zero();
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                for c in 0..=(deg - a - b) {
                    let n = rng.gen_range(-5i64..=5);
                    let d = rng.gen_range(1i64..=3);
                    p.add_term([a, b, c], crate::rational::qr(n, d));
                }
            }
        }
        p
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&q(-1))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Vector- and matrix-valued polynomials
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VecPoly(pub [Poly; 3]);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatPoly(pub [[Poly; 3]; 3]);

impl VecPoly {
    pub fn zero() -> Self {
        VecPoly(std::array::from_fn(|_| Poly::zero()))
    }

    pub fn constant(v: &Vec3) -> Self {
        VecPoly(std::array::from_fn(|i| Poly::constant(v.0[i].clone())))
    }

    /// The identity field `x -> x`.
    pub fn position() -> Self {
        VecPoly(std::array::from_fn(Poly::var))
    }

    pub fn from_rigid_motion(p: &RigidMotion) -> Self {
        // a + b x x, expanded coordinatewise.
        let x = VecPoly::position();
        let bx = VecPoly::constant(&p.b).cross(&x);
        &VecPoly::constant(&p.a) + &bx
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.0[i].eval(x)))
    }

    pub fn as_const(&self) -> Option<Vec3> {
        let c: [Option<Q>; 3] = std::array::from_fn(|i| self.0[i].as_const());
        if c.iter().all(|x| x.is_some()) {
            Some(Vec3(std::array::from_fn(|i| c[i].clone().unwrap())))
        } else {
            None
        }
    }

    pub fn cross(&self, o: &VecPoly) -> VecPoly {
        let a = &self.0;
        let b = &o.0;
        VecPoly([
            &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
            &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
            &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
        ])
    }

    pub fn dot(&self, o: &VecPoly) -> Poly {
        let mut s = Poly::zero();
        for i in 0..3 {
            s = &s + &(&self.0[i] * &o.0[i]);
        }
        s
    }

    pub fn dot_const(&self, v: &Vec3) -> Poly {
        let mut s = Poly::zero();
        for i in 0..3 {
            s = &s + &self.0[i].scale(&v.0[i]);
        }
        s
    }

    pub fn scale(&self, s: &Q) -> VecPoly {
        VecPoly(std::array::from_fn(|i| self.0[i].scale(s)))
    }

    pub fn curl(&self) -> VecPoly {
        VecPoly([
            &self.0[2].partial(1) - &self.0[1].partial(2),
            &self.0[0].partial(2) - &self.0[2].partial(0),
            &self.0[1].partial(0) - &self.0[0].partial(1),
        ])
    }

    pub fn div(&self) -> Poly {
        let mut s = Poly::zero();
        for i in 0..3 {
            s = &s + &self.0[i].partial(i);
        }
        s
    }

    /// Row-wise gradient: `M[i][j] = d u_i / d x_j`.
    pub fn grad_rows(&self) -> MatPoly {
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i].partial(j))
        }))
    }

    pub fn rand(rng: &mut ChaCha8Rng, deg: u32) -> VecPoly {
        VecPoly(std::array::from_fn(|_| Poly::rand(rng, deg)))
    }
}

impl Add for &VecPoly {
    type Output = VecPoly;
    fn add(self, o: &VecPoly) -> VecPoly {
        VecPoly(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Sub for &VecPoly {
    type Output = VecPoly;
    fn sub(self, o: &VecPoly) -> VecPoly {
        VecPoly(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }
}

impl MatPoly {
    pub fn zero() -> Self {
        MatPoly(std::array::from_fn(|_| {
            std::array::from_fn(|_| Poly::zero())
        }))
    }

    pub fn constant(m: &Mat3) -> Self {
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| Poly::constant(m.0[i][j].clone()))
        }))
    }

    pub fn eval(&self, x: &Vec3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j].eval(x))
        }))
    }

    pub fn row(&self, i: usize) -> VecPoly {
        VecPoly(self.0[i].clone())
    }

    pub fn transpose(&self) -> MatPoly {
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].clone())
        }))
    }

    pub fn trace(&self) -> Poly {
        &(&self.0[0][0] + &self.0[1][1]) + &self.0[2][2]
    }

    pub fn scale(&self, s: &Q) -> MatPoly {
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j].scale(s))
        }))
    }

    pub fn sym(&self) -> MatPoly {
        let t = self.transpose();
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| (&self.0[i][j] + &t.0[i][j]).scale(&crate::rational::qr(1, 2)))
        }))
    }

    pub fn make_traceless(&self) -> MatPoly {
        let t = self.trace().scale(&crate::rational::qr(1, 3));
        let mut out = self.clone();
        for i in 0..3 {
            out.0[i][i] = &out.0[i][i] - &t;
        }
        out
    }

    /// Row-wise curl: row `i` of the result is `curl(row_i(self))`.
    pub fn curl_rows(&self) -> MatPoly {
        MatPoly(std::array::from_fn(|i| self.row(i).curl().0))
    }

    /// Row-wise divergence: component `i` is `div(row_i(self))`.
    pub fn div_rows(&self) -> VecPoly {
        VecPoly(std::array::from_fn(|i| self.row(i).div()))
    }

    /// `self^T v` for a polynomial vector `v`.
    pub fn transpose_mul_vecpoly(&self, v: &VecPoly) -> VecPoly {
        VecPoly(std::array::from_fn(|j| {
            let mut s = Poly::zero();
            for i in 0..3 {
                s = &s + &(&self.0[i][j] * &v.0[i]);
            }
            s
        }))
    }

    /// `self v` for a constant vector `v`.
    pub fn mul_const_vec(&self, v: &Vec3) -> VecPoly {
        VecPoly(std::array::from_fn(|i| {
            let mut s = Poly::zero();
            for j in 0..3 {
                s = &s + &self.0[i][j].scale(&v.0[j]);
            }
            s
        }))
    }

    /// Frobenius pairing with a constant matrix.
    pub fn frobenius_const(&self, m: &Mat3) -> Poly {
        let mut s = Poly::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = &s + &self.0[i][j].scale(&m.0[i][j]);
            }
        }
        s
    }

    pub fn rand(rng: &mut ChaCha8Rng, deg: u32) -> MatPoly {
        MatPoly(std::array::from_fn(|_| {
            std::array::from_fn(|_| Poly::rand(rng, deg))
        }))
    }
}

impl Add for &MatPoly {
    type Output = MatPoly;
    fn add(self, o: &MatPoly) -> MatPoly {
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i][j] + &o.0[i][j])
        }))
    }
}

impl Sub for &MatPoly {
    type Output = MatPoly;
    fn sub(self, o: &MatPoly) -> MatPoly {
        MatPoly(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i][j] - &o.0[i][j])
        }))
    }
}

// ---------------------------------------------------------------------------
// Exact mean values over simplices
// ---------------------------------------------------------------------------

fn factorial(n: u32) -> BigInt {
    (1..=n as u64)
        .map(BigInt::from)
        .product::<BigInt>()
        .max(BigInt::one())
}

/// Exact mean value of `p` over the simplex with the given vertices
/// (1 to 4 of them, spanning a point, segment, triangle or tetrahedron).
///
/// The polynomial is pulled back to the reference simplex through the
/// barycentric parametrization and the mean of each monomial
/// `t^a` over the standard `k`-simplex is `k! * prod(a_i!) / (k + sum a)!`.
pub fn mean_over_simplex(p: &Poly, verts: &[Vec3]) -> Q {
    let k = verts.len() - 1;
    assert!(k <= 3, "simplex dimension at most 3");
    if k == 0 {
        return p.eval(&verts[0]);
    }
    // x_j = v0_j + sum_i t_i (v_{i+1,j} - v0_j), with t_i the first k
    // variables of the parameter polynomial ring.
    let subs: [Poly; 3] = std::array::from_fn(|j| {
        let mut s = Poly::constant(verts[0].0[j].clone());
        for i in 0..k {
            let d = &verts[i + 1].0[j] - &verts[0].0[j];
            s = &s + &Poly::var(i).scale(&d);
        }
        s
    });
    let pulled = p.compose(&subs);
    let kf = factorial(k as u32);
    let mut mean = Q::zero();
    for (e, c) in &pulled.terms {
        // exponents beyond the first k variables must vanish by construction
        debug_assert!(e[k..].iter().all(|&a| a == 0));
        let total: u32 = e.iter().sum();
        let mut num = kf.clone();
        for &a in &e[..k] {
            num *= factorial(a);
        }
        let den = factorial(k as u32 + total);
        mean += c * Q::new(num, den);
    }
    mean
}

/// Exact mean of a vector field over a simplex, componentwise.
pub fn mean_vec_over_simplex(v: &VecPoly, verts: &[Vec3]) -> Vec3 {
    Vec3(std::array::from_fn(|i| mean_over_simplex(&v.0[i], verts)))
}

/// Exact mean of a matrix field over a simplex, entrywise.
pub fn mean_mat_over_simplex(m: &MatPoly, verts: &[Vec3]) -> Mat3 {
    Mat3(std::array::from_fn(|i| {
        std::array::from_fn(|j| mean_over_simplex(&m.0[i][j], verts))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;
    use rand::SeedableRng;

    #[test]
    fn derivative_and_product() {
        // d/dx (x^2 y) = 2 x y
        let p = &(&Poly::var(0) * &Poly::var(0)) * &Poly::var(1);
        let d = p.partial(0);
        let expect = (&Poly::var(0) * &Poly::var(1)).scale(&q(2));
        assert_eq!(d, expect);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let f = Poly::rand(&mut rng, 3);
            let grad = VecPoly(std::array::from_fn(|i| f.partial(i)));
            assert_eq!(grad.curl(), VecPoly::zero());
        }
    }

    #[test]
    fn div_of_curl_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let u = VecPoly::rand(&mut rng, 3);
            assert!(u.curl().div().is_zero());
        }
    }

    #[test]
    fn mean_over_unit_segment() {
        // mean of x over [0,1] on the x-axis is 1/2; of x^2 is 1/3
        let a = Vec3::from_i64(0, 0, 0);
        let b = Vec3::from_i64(1, 0, 0);
        let x = Poly::var(0);
        assert_eq!(mean_over_simplex(&x, &[a.clone(), b.clone()]), qr(1, 2));
        let x2 = &Poly::var(0) * &Poly::var(0);
        assert_eq!(mean_over_simplex(&x2, &[a, b]), qr(1, 3));
    }

    #[test]
    fn mean_over_reference_triangle_and_tet() {
        let v0 = Vec3::from_i64(0, 0, 0);
        let v1 = Vec3::from_i64(1, 0, 0);
        let v2 = Vec3::from_i64(0, 1, 0);
        let v3 = Vec3::from_i64(0, 0, 1);
        let x = Poly::var(0);
        // mean of x over the reference triangle is 1/3, over the tet 1/4
        assert_eq!(
            mean_over_simplex(&x, &[v0.clone(), v1.clone(), v2.clone()]),
            qr(1, 3)
        );
        assert_eq!(mean_over_simplex(&x, &[v0, v1, v2, v3]), qr(1, 4));
    }

    #[test]
    fn mean_is_affine_invariant_for_constants() {
        let verts = [
            Vec3::from_i64(2, -1, 3),
            Vec3::from_i64(5, 0, 1),
            Vec3::from_i64(-2, 4, 4),
            Vec3::from_i64(1, 1, -7),
        ];
        let c = Poly::constant(qr(7, 3));
        assert_eq!(mean_over_simplex(&c, &verts), qr(7, 3));
    }

    #[test]
    fn composition_matches_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = Poly::rand(&mut rng, 2);
        // compose with a shift and evaluate
        let subs: [Poly; 3] =
            std::array::from_fn(|i| &Poly::var(i) + &Poly::constant(q(i as i64 + 1)));
        let composed = p.compose(&subs);
        let t = Vec3([qr(1, 2), qr(-1, 3), q(2)]);
        let shifted = Vec3([&t.0[0] + &q(1), &t.0[1] + &q(2), &t.0[2] + &q(3)]);
        assert_eq!(composed.eval(&t), p.eval(&shifted));
    }
}
