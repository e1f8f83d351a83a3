//! Quaternions, Cayley-Dickson octonions, columns of `H^2` and seeded sampling
//! of the spheres used throughout the crate.
//!
//! Everything here is a plain `Copy` value; no operation allocates or keeps state.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Tolerance for single algebraic operations.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for identities that compose several operations.
pub const COMPOSITE_TOL: f64 = 1e-10;

/// Below this norm `qexp` switches to its two-term series.
const QEXP_SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub re: f64,
    pub im: [f64; 3],
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(re: f64, i: f64, j: f64, k: f64) -> Self {
        Self { re, im: [i, j, k] }
    }

    pub const fn real(re: f64) -> Self {
        Self::new(re, 0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.re, self.im[0], self.im[1], self.im[2]]
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im[0], -self.im[1], -self.im[2])
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im[0] * self.im[0] + self.im[1] * self.im[1] + self.im[2] * self.im[2]
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product on `R^4`, i.e. `re(conj(self) * other)`.
    pub fn dot(self, other: Self) -> f64 {
        self.re * other.re
            + self.im[0] * other.im[0]
            + self.im[1] * other.im[1]
            + self.im[2] * other.im[2]
    }

    pub fn imag(self) -> ImaginaryQuaternion {
        ImaginaryQuaternion(self.im)
    }

    pub fn imag_norm(self) -> f64 {
        self.imag().norm()
    }

    /// `self / |self|`; the zero quaternion is returned unchanged.
    pub fn normalize(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn inverse(self) -> Self {
        self.conj() * (1.0 / self.norm_sqr())
    }

    /// `self * x * conj(self)`.
    pub fn conjugate_by(self, x: Self) -> Self {
        self * x * self.conj()
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn powi(self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self };
        (0..k.unsigned_abs()).fold(Self::ONE, |acc, _| acc * base)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        (self - other)
            .to_array()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:+}i {:+}j {:+}k",
            self.re, self.im[0], self.im[1], self.im[2]
        )
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.re + o.re,
            self.im[0] + o.im[0],
            self.im[1] + o.im[1],
            self.im[2] + o.im[2],
        )
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.re - o.re,
            self.im[0] - o.im[0],
            self.im[1] - o.im[1],
            self.im[2] - o.im[2],
        )
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im[0], -self.im[1], -self.im[2])
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.re * s, self.im[0] * s, self.im[1] * s, self.im[2] * s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.re / s, self.im[0] / s, self.im[1] / s, self.im[2] / s)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let [a1, a2, a3] = self.im;
        let [b1, b2, b3] = b.im;
        let a0 = self.re;
        let b0 = b.re;
        Self::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

/// A purely imaginary quaternion, i.e. an element of the Lie algebra of `S^3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryQuaternion(pub [f64; 3]);

impl ImaginaryQuaternion {
    pub const I: Self = Self([1.0, 0.0, 0.0]);
    pub const J: Self = Self([0.0, 1.0, 0.0]);
    pub const K: Self = Self([0.0, 0.0, 1.0]);

    pub fn new(i: f64, j: f64, k: f64) -> Self {
        Self([i, j, k])
    }

    pub fn to_quat(self) -> Quaternion {
        Quaternion { re: 0.0, im: self.0 }
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dot(self, o: Self) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn scale(self, s: f64) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for ImaginaryQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl From<ImaginaryQuaternion> for Quaternion {
    fn from(p: ImaginaryQuaternion) -> Self {
        p.to_quat()
    }
}

/// Exponential map of `S^3` at 1: `cos|p| + (p/|p|) sin|p|`.
pub fn qexp(p: ImaginaryQuaternion) -> Quaternion {
    let r = p.norm();
    if r < QEXP_SERIES_THRESHOLD {
        Quaternion::ONE + p.to_quat() * (1.0 - r * r / 6.0)
    } else {
        let (s, c) = r.sin_cos();
        Quaternion::real(c) + p.to_quat() * (s / r)
    }
}

/// Octonion as a Cayley-Dickson pair of quaternions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Octonion {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl Octonion {
    pub const ONE: Self = Self {
        a: Quaternion::ONE,
        b: Quaternion::ZERO,
    };

    pub fn new(a: Quaternion, b: Quaternion) -> Self {
        Self { a, b }
    }

    pub fn conj(self) -> Self {
        Self::new(self.a.conj(), -self.b)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Add for Octonion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

/// `(a,b)(c,d) = (ac - conj(d) b, da + b conj(c))`.
impl Mul for Octonion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - o.b.conj() * self.b,
            o.b * self.a + self.b * o.a.conj(),
        )
    }
}

pub fn omul(x: Octonion, y: Octonion) -> Octonion {
    x * y
}

/// A column of `H^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuatPair {
    pub first: Quaternion,
    pub second: Quaternion,
}

impl QuatPair {
    pub const ZERO: Self = Self {
        first: Quaternion::ZERO,
        second: Quaternion::ZERO,
    };
    /// The north pole `(1, 0)`.
    pub const E1: Self = Self {
        first: Quaternion::ONE,
        second: Quaternion::ZERO,
    };
    pub const E2: Self = Self {
        first: Quaternion::ZERO,
        second: Quaternion::ONE,
    };

    pub const fn new(first: Quaternion, second: Quaternion) -> Self {
        Self { first, second }
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self::new(
            Quaternion::new(a[0], a[1], a[2], a[3]),
            Quaternion::new(a[4], a[5], a[6], a[7]),
        )
    }

    pub fn to_array(self) -> [f64; 8] {
        let [a0, a1, a2, a3] = self.first.to_array();
        let [b0, b1, b2, b3] = self.second.to_array();
        [a0, a1, a2, a3, b0, b1, b2, b3]
    }

    pub fn norm_sqr(self) -> f64 {
        self.first.norm_sqr() + self.second.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dot(self, o: Self) -> f64 {
        self.first.dot(o.first) + self.second.dot(o.second)
    }

    pub fn normalize(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.first * s, self.second * s)
    }

    /// Componentwise `q * x`.
    pub fn left_mul(self, q: Quaternion) -> Self {
        Self::new(q * self.first, q * self.second)
    }

    /// Componentwise `x * q`.
    pub fn right_mul(self, q: Quaternion) -> Self {
        Self::new(self.first * q, self.second * q)
    }

    /// Componentwise `q x conj(q)`.
    pub fn conjugate_by(self, q: Quaternion) -> Self {
        Self::new(q.conjugate_by(self.first), q.conjugate_by(self.second))
    }

    pub fn as_octonion(self) -> Octonion {
        Octonion::new(self.first, self.second)
    }

    pub fn from_octonion(o: Octonion) -> Self {
        Self::new(o.a, o.b)
    }

    pub fn max_abs_diff(self, o: Self) -> f64 {
        self.first
            .max_abs_diff(o.first)
            .max(self.second.max_abs_diff(o.second))
    }

    pub fn is_finite(self) -> bool {
        self.first.is_finite() && self.second.is_finite()
    }
}

impl Add for QuatPair {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.first + o.first, self.second + o.second)
    }
}

impl Sub for QuatPair {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.first - o.first, self.second - o.second)
    }
}

impl Neg for QuatPair {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.first, -self.second)
    }
}

impl Mul<f64> for QuatPair {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// The quaternionic Hermitian product `conj(u1) v1 + conj(u2) v2`.
pub fn hermitian(u: QuatPair, v: QuatPair) -> Quaternion {
    u.first.conj() * v.first + u.second.conj() * v.second
}

/// Spheres that can be sampled by [`random_unit`] and [`Sampler`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereKind {
    /// Unit quaternions, returned as `(q, 0)`.
    S3,
    /// `S^6 ⊂ Im H × H`.
    S6,
    /// `S^7 ⊂ H^2`.
    S7,
    /// `S^5 ⊂ Im H × Im H`.
    S5ImaginaryPair,
}

/// Seeded sampler of uniform points on spheres.
///
/// The generator is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`);
/// Gaussian coordinates come from `rand_distr::StandardNormal` and are
/// normalized, which yields the uniform distribution on the sphere.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Sampler for item `index` of a run seeded by `master`.
    pub fn for_sample(master: u64, index: u64) -> Self {
        Self::new(sub_seed(master, index))
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        self.rng.random_range(lo..hi)
    }

    pub fn int_in(&mut self, lo: i64, hi_inclusive: i64) -> i64 {
        use rand::Rng;
        self.rng.random_range(lo..=hi_inclusive)
    }

    fn unit_vector<const N: usize>(&mut self) -> [f64; N] {
        loop {
            let mut x = [0.0; N];
            for c in x.iter_mut() {
                *c = self.gaussian();
            }
            let n = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 1e-6 {
                for c in x.iter_mut() {
                    *c /= n;
                }
                return x;
            }
        }
    }

    pub fn unit_quaternion(&mut self) -> Quaternion {
        Quaternion::from_array(self.unit_vector::<4>())
    }

    pub fn unit_imaginary(&mut self) -> ImaginaryQuaternion {
        ImaginaryQuaternion(self.unit_vector::<3>())
    }

    /// Uniform point of `S^7`.
    pub fn s7(&mut self) -> QuatPair {
        QuatPair::from_array(self.unit_vector::<8>())
    }

    /// Uniform point of `S^6 ⊂ Im H × H` as `(p, w)`.
    pub fn s6(&mut self) -> (ImaginaryQuaternion, Quaternion) {
        let x = self.unit_vector::<7>();
        (
            ImaginaryQuaternion([x[0], x[1], x[2]]),
            Quaternion::new(x[3], x[4], x[5], x[6]),
        )
    }

    /// Uniform point of `S^5 ⊂ Im H × Im H` as `(p1, p2)`.
    pub fn s5(&mut self) -> (ImaginaryQuaternion, ImaginaryQuaternion) {
        let x = self.unit_vector::<6>();
        (
            ImaginaryQuaternion([x[0], x[1], x[2]]),
            ImaginaryQuaternion([x[3], x[4], x[5]]),
        )
    }

    pub fn sample(&mut self, kind: SphereKind) -> QuatPair {
        match kind {
            SphereKind::S3 => QuatPair::new(self.unit_quaternion(), Quaternion::ZERO),
            SphereKind::S6 => {
                let (p, w) = self.s6();
                QuatPair::new(p.to_quat(), w)
            }
            SphereKind::S7 => self.s7(),
            SphereKind::S5ImaginaryPair => {
                let (p1, p2) = self.s5();
                QuatPair::new(p1.to_quat(), p2.to_quat())
            }
        }
    }
}

/// One uniform sample of the named sphere, embedded in `H^2`.
pub fn random_unit(kind: SphereKind, seed: u64) -> QuatPair {
    Sampler::new(seed).sample(kind)
}

/// SplitMix64 finalizer applied to `(master, index)`; used to derive
/// per-sample seeds so that results do not depend on evaluation order.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn multiplication_table() {
        use Quaternion as Q;
        assert_eq!(Q::I * Q::J, Q::K);
        assert_eq!(Q::J * Q::K, Q::I);
        assert_eq!(Q::K * Q::I, Q::J);
        assert_eq!(Q::J * Q::I, -Q::K);
        assert_eq!(Q::I * Q::I, -Q::ONE);
        let q = Q::new(0.3, -1.2, 4.0, 0.5);
        assert_eq!(Q::ONE * q, q);
        assert_eq!(q * Q::ONE, q);
    }

    #[test]
    fn unit_product_of_conjugate_pair() {
        let a = Quaternion::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0);
        let b = Quaternion::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0);
        assert!(close(a * b, Quaternion::ONE, 1e-15));
    }

    #[test]
    fn conj_and_norm() {
        let q = Quaternion::new(1.0, 2.0, -3.0, 0.5);
        assert_abs_diff_eq!(q.conj().norm(), q.norm());
        assert!(close(q * q.conj(), Quaternion::real(q.norm_sqr()), 4.0 * f64::EPSILON * q.norm_sqr()));
    }

    #[test]
    fn qexp_cases() {
        assert_eq!(qexp(ImaginaryQuaternion::default()), Quaternion::ONE);
        assert!(close(qexp(ImaginaryQuaternion::I.scale(FRAC_PI_2)), Quaternion::I, 1e-15));
        let mut s = Sampler::new(3);
        for _ in 0..20 {
            let dir = s.unit_imaginary();
            assert!(close(qexp(dir.scale(PI)), -Quaternion::ONE, 1e-15));
        }
        let tiny = ImaginaryQuaternion::new(1e-10, -2e-10, 3e-11);
        let e = qexp(tiny);
        assert!(close(e, Quaternion::ONE + tiny.to_quat(), 1e-18));
        assert!(close(e * qexp(-tiny), Quaternion::ONE, 1e-16));
    }

    #[test]
    fn qexp_inverse_pair() {
        let mut s = Sampler::new(11);
        for _ in 0..1000 {
            let p = s.unit_imaginary().scale(s.uniform(0.0, 10.0));
            assert!(close(qexp(p) * qexp(-p), Quaternion::ONE, 1e-12));
        }
    }

    #[test]
    fn octonion_examples() {
        let o = |a: Quaternion, b: Quaternion| Octonion::new(a, b);
        use Quaternion as Q;
        assert_eq!(o(Q::I, Q::ZERO) * o(Q::J, Q::ZERO), o(Q::K, Q::ZERO));
        assert_eq!(o(Q::ZERO, Q::ONE) * o(Q::ZERO, Q::ONE), o(-Q::ONE, Q::ZERO));
        assert_eq!(o(Q::I, Q::ZERO) * o(Q::ZERO, Q::ONE), o(Q::ZERO, Q::I));
    }

    #[test]
    fn octonion_restricts_to_quaternions_bitwise() {
        let mut s = Sampler::new(5);
        for _ in 0..1000 {
            let a = s.unit_quaternion() * s.uniform(0.1, 3.0);
            let b = s.unit_quaternion() * s.uniform(0.1, 3.0);
            let prod = Octonion::new(a, Quaternion::ZERO) * Octonion::new(b, Quaternion::ZERO);
            assert_eq!(prod.a.to_array(), (a * b).to_array());
            assert_eq!(prod.b.norm(), 0.0);
        }
    }

    #[test]
    fn octonion_norm_is_multiplicative() {
        let mut s = Sampler::new(6);
        for _ in 0..1000 {
            let x = s.s7().as_octonion();
            let y = s.s7().as_octonion();
            assert!(((x * y).norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn hermitian_examples() {
        let e1 = QuatPair::E1;
        let e2 = QuatPair::E2;
        assert_eq!(hermitian(e1, e2), Quaternion::ZERO);
        assert_eq!(hermitian(e1, e1), Quaternion::ONE);
        let u = QuatPair::new(Quaternion::I, Quaternion::J).scale(FRAC_1_SQRT_2);
        assert!(close(hermitian(u, u), Quaternion::ONE, 1e-15));
    }

    #[test]
    fn hermitian_is_sesquilinear_and_left_invariant() {
        let mut s = Sampler::new(9);
        for _ in 0..1000 {
            let u = s.s7();
            let v = s.s7();
            let a = s.unit_quaternion() * 1.7;
            let b = s.unit_quaternion() * 0.4;
            let lhs = hermitian(u.right_mul(a), v.right_mul(b));
            let rhs = a.conj() * hermitian(u, v) * b;
            assert!(close(lhs, rhs, 1e-12));
            let q = s.unit_quaternion();
            assert!(close(hermitian(u.left_mul(q), v.left_mul(q)), hermitian(u, v), 1e-12));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_unit() {
        for kind in [SphereKind::S3, SphereKind::S6, SphereKind::S7, SphereKind::S5ImaginaryPair] {
            let a = random_unit(kind, 42);
            let b = random_unit(kind, 42);
            assert_eq!(a, b);
            assert!((a.norm() - 1.0).abs() <= 1e-14);
        }
        assert_eq!(random_unit(SphereKind::S6, 1).first.re, 0.0);
        let p = random_unit(SphereKind::S5ImaginaryPair, 1);
        assert_eq!(p.first.re, 0.0);
        assert_eq!(p.second.re, 0.0);
        assert_eq!(random_unit(SphereKind::S3, 1).second, Quaternion::ZERO);
    }

    #[test]
    fn s7_samples_are_centered() {
        let mut mean = [0.0; 8];
        let count = 10_000;
        for seed in 0..count {
            let x = random_unit(SphereKind::S7, seed).to_array();
            for (m, c) in mean.iter_mut().zip(x) {
                *m += c / count as f64;
            }
        }
        for m in mean {
            assert!(m.abs() < 0.05, "coordinate mean {m}");
        }
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(7, 0), sub_seed(7, 1));
        assert_ne!(sub_seed(7, 0), sub_seed(8, 0));
        assert_eq!(sub_seed(7, 3), sub_seed(7, 3));
    }
}
