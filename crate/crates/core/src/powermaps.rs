//! Power maps `ρ_n` of `S^7`, written in the suspension chart
//! `(cos t + p sin t, w sin t)`, together with the clutching data `b` and `σ`.
//!
//! `ρ_n` only rescales the suspension angle `t`, so it agrees with the
//! octonion power `u ↦ u^n`. [`oct_power`] evaluates the latter by repeated
//! Cayley-Dickson multiplication and serves as an independent oracle.

use nalgebra::{SMatrix, SVector};

use crate::algebra::{qexp, ImaginaryQuaternion, Octonion, QuatPair, Quaternion, COMPOSITE_TOL};
use crate::error::{check_unit, GeomError, Result};

/// Below this value of `sin t` the chart direction `(p, w)` is unobservable.
pub const GAUGE_THRESHOLD: f64 = 1e-12;

/// Smallest `sin t` (of the target and of every preimage) accepted by [`degree_check`].
const REGULAR_SIN_MIN: f64 = 1e-6;
/// Jacobian determinants below this magnitude reject the value as non-regular.
const REGULAR_DET_MIN: f64 = 1e-6;

const SIGMA_INVERSE_TOL: f64 = 1e-12;
const SIGMA_INVERSE_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuspensionCoords {
    pub t: f64,
    pub p: ImaginaryQuaternion,
    pub w: Quaternion,
    /// Set when `sin t` is below [`GAUGE_THRESHOLD`]; `(p, w)` is then `(i, 0)`.
    pub degenerate: bool,
}

impl SuspensionCoords {
    pub fn reconstruct(&self) -> QuatPair {
        let (s, c) = self.t.sin_cos();
        QuatPair::new(Quaternion::real(c) + self.p.to_quat() * s, self.w * s)
    }
}

/// Splits a unit `u ∈ S^7` into suspension coordinates.
///
/// The angle is computed as `atan2(|Im u|, re u1)`, which equals
/// `arccos(re u1)` on the sphere but stays accurate near the poles.
pub fn decompose(u: QuatPair) -> Result<SuspensionCoords> {
    check_unit(u.norm(), COMPOSITE_TOL)?;
    let c = u.first.re;
    let s = (u.first.imag().norm_sqr() + u.second.norm_sqr()).sqrt();
    let t = s.atan2(c);
    if s <= GAUGE_THRESHOLD {
        return Ok(SuspensionCoords {
            t,
            p: ImaginaryQuaternion::I,
            w: Quaternion::ZERO,
            degenerate: true,
        });
    }
    Ok(SuspensionCoords {
        t,
        p: u.first.imag().scale(1.0 / s),
        w: u.second * (1.0 / s),
        degenerate: false,
    })
}

/// `ρ_n(cos t + p sin t, w sin t) = (cos nt + p sin nt, w sin nt)`.
pub fn rho(n: i64, u: QuatPair) -> Result<QuatPair> {
    let c = decompose(u)?;
    Ok(SuspensionCoords {
        t: n as f64 * c.t,
        ..c
    }
    .reconstruct())
}

/// The octonion power `u^n` by repeated multiplication.
///
/// A single octonion generates an associative subalgebra, so the
/// left-to-right product is unambiguous. Negative powers use the
/// conjugate, which is the inverse on the unit sphere.
pub fn oct_power(n: i64, u: QuatPair) -> Result<QuatPair> {
    check_unit(u.norm(), COMPOSITE_TOL)?;
    let base = if n < 0 {
        u.as_octonion().conj()
    } else {
        u.as_octonion()
    };
    let mut acc = Octonion::ONE;
    for _ in 0..n.unsigned_abs() {
        acc = acc * base;
    }
    Ok(QuatPair::from_octonion(acc))
}

/// Exact differential of `ρ_n` at `u` applied to a tangent vector `du`.
///
/// Uses `d(u^m) = Σ_k u^k du u^(m-1-k)`, well defined because any two
/// octonions generate an associative subalgebra. On the unit sphere
/// `ρ_{-m} = conj ∘ ρ_m`, so negative exponents conjugate the result.
pub fn rho_differential(n: i64, u: QuatPair, du: QuatPair) -> QuatPair {
    let m = n.unsigned_abs() as usize;
    if m == 0 {
        return QuatPair::ZERO;
    }
    let x = u.as_octonion();
    let dx = du.as_octonion();
    let mut powers = Vec::with_capacity(m);
    let mut acc = Octonion::ONE;
    for _ in 0..m {
        powers.push(acc);
        acc = acc * x;
    }
    let mut sum = Octonion::default();
    for k in 0..m {
        sum = sum + (powers[k] * dx) * powers[m - 1 - k];
    }
    let out = QuatPair::from_octonion(sum);
    if n < 0 {
        QuatPair::from_octonion(out.as_octonion().conj())
    } else {
        out
    }
}

/// A point `(p, w)` of `S^6 ⊂ Im H × H`: the argument of `b` and `σ`, and
/// the initial direction of the geodesics leaving the north pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClutchValue {
    pub p: ImaginaryQuaternion,
    pub w: Quaternion,
}

impl ClutchValue {
    pub fn new(p: ImaginaryQuaternion, w: Quaternion) -> Result<Self> {
        check_unit((p.norm_sqr() + w.norm_sqr()).sqrt(), COMPOSITE_TOL)?;
        Ok(Self { p, w })
    }

    pub fn as_pair(&self) -> QuatPair {
        QuatPair::new(self.p.to_quat(), self.w)
    }

    pub fn norm(&self) -> f64 {
        self.as_pair().norm()
    }

    /// `(q p conj(q), q w conj(q))`.
    pub fn conjugate_by(&self, q: Quaternion) -> Self {
        Self {
            p: q.conjugate_by(self.p.to_quat()).imag(),
            w: q.conjugate_by(self.w),
        }
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.as_pair().max_abs_diff(o.as_pair())
    }
}

impl std::ops::Neg for ClutchValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            p: -self.p,
            w: -self.w,
        }
    }
}

/// `b(p, w) = (w/|w|) e^{πp} (conj(w)/|w|)`, a map `S^6 \ {w = 0} → S^3`.
pub fn clutch_b(x: &ClutchValue) -> Result<Quaternion> {
    let wn = x.w.norm();
    if wn == 0.0 {
        return Err(GeomError::Domain(
            "b(p, w) is undefined at w = 0; the limit value is -1".into(),
        ));
    }
    let wh = x.w * (1.0 / wn);
    Ok(wh * qexp(x.p.scale(std::f64::consts::PI)) * wh.conj())
}

fn sigma_once(x: &ClutchValue) -> ClutchValue {
    match clutch_b(x) {
        Ok(b) => x.conjugate_by(b.conj()),
        Err(_) => *x,
    }
}

/// Solves `σ(y) = x` by the fixed-point iteration `y ← b(y) x conj(b(y))`.
fn sigma_inverse_once(x: &ClutchValue) -> Result<ClutchValue> {
    let mut y = *x;
    let mut last_step = f64::INFINITY;
    for _ in 0..SIGMA_INVERSE_MAX_ITER {
        let next = match clutch_b(&y) {
            Ok(b) => x.conjugate_by(b),
            Err(_) => *x,
        };
        last_step = next.max_abs_diff(&y);
        y = next;
        if last_step <= SIGMA_INVERSE_TOL {
            return Ok(y);
        }
    }
    Err(GeomError::NotConverged {
        iterations: SIGMA_INVERSE_MAX_ITER,
        last_step,
    })
}

/// `σ^n(x)` with `σ(p, w) = conj(b) (p, w) b`; `σ` fixes the points with `w = 0`.
pub fn sigma_pow(n: i64, x: &ClutchValue) -> Result<ClutchValue> {
    check_unit(x.norm(), COMPOSITE_TOL)?;
    let mut y = *x;
    for _ in 0..n.unsigned_abs() {
        y = if n > 0 {
            sigma_once(&y)
        } else {
            sigma_inverse_once(&y)?
        };
    }
    Ok(y)
}

/// Orthonormal basis of `T_x S^7`, oriented so that `det[x, f_1..f_7] > 0`.
pub fn tangent_frame(x: QuatPair) -> [QuatPair; 7] {
    let xa = x.to_array();
    let drop = (0..8)
        .max_by(|&a, &b| xa[a].abs().total_cmp(&xa[b].abs()))
        .unwrap_or(0);
    let mut frame: Vec<QuatPair> = Vec::with_capacity(7);
    for idx in (0..8).filter(|&i| i != drop) {
        let mut e = [0.0; 8];
        e[idx] = 1.0;
        let mut v = QuatPair::from_array(e);
        for _ in 0..2 {
            v = v - x * v.dot(x);
            for f in &frame {
                v = v - *f * v.dot(*f);
            }
        }
        frame.push(v.normalize());
    }
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    m.set_column(0, &SVector::<f64, 8>::from(xa));
    for (j, f) in frame.iter().enumerate() {
        m.set_column(j + 1, &SVector::<f64, 8>::from(f.to_array()));
    }
    if m.determinant() < 0.0 {
        frame[6] = -frame[6];
    }
    frame.try_into().expect("seven frame vectors")
}

/// Signed count of the preimages of a regular value `y` under `ρ_n`.
///
/// Preimages are enumerated in closed form: `ρ_n` fixes the direction
/// `(p, w)` up to sign and multiplies the angle by `n`, so they are the
/// solutions `t' ∈ (0, π)` of `cos(n t') = cos(t_y)`. Each contributes the
/// sign of a 7×7 central-difference Jacobian between oriented tangent frames.
pub fn degree_check(n: i64, y: QuatPair, jac_step: f64) -> Result<i64> {
    let target = decompose(y)?;
    let sin_y = target.t.sin();
    if target.degenerate || sin_y < REGULAR_SIN_MIN {
        return Err(GeomError::NotRegular {
            det: 0.0,
            t: target.t,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    let m = n.unsigned_abs() as f64;
    let ty = target.t;
    let mut times = Vec::new();
    for k in 0..=n.unsigned_abs() {
        let k = k as f64;
        for num in [ty + 2.0 * std::f64::consts::PI * k, 2.0 * std::f64::consts::PI * k - ty] {
            let t = num / m;
            if t > 0.0 && t < std::f64::consts::PI {
                times.push(t);
            }
        }
    }
    let y_frame = tangent_frame(y);
    let mut degree = 0;
    for t in times {
        let sign = (n as f64 * t).sin() / sin_y;
        if t.sin() < REGULAR_SIN_MIN || sign.abs() < 0.5 {
            return Err(GeomError::NotRegular { det: 0.0, t });
        }
        let sign = sign.signum();
        let pre = SuspensionCoords {
            t,
            p: target.p.scale(sign),
            w: target.w * sign,
            degenerate: false,
        }
        .reconstruct();
        let check = rho(n, pre)?.max_abs_diff(y);
        if check > 1e-9 {
            return Err(GeomError::Domain(format!(
                "preimage enumeration inconsistent at t = {t}: residual {check:e}"
            )));
        }
        let x_frame = tangent_frame(pre);
        let mut jac = SMatrix::<f64, 7, 7>::zeros();
        let (sh, ch) = jac_step.sin_cos();
        for (j, f) in x_frame.iter().enumerate() {
            let plus = rho(n, (pre * ch + *f * sh).normalize())?;
            let minus = rho(n, (pre * ch - *f * sh).normalize())?;
            let dv = (plus - minus) * (1.0 / (2.0 * jac_step));
            for (i, g) in y_frame.iter().enumerate() {
                jac[(i, j)] = g.dot(dv);
            }
        }
        let det = jac.determinant();
        if det.abs() < REGULAR_DET_MIN {
            return Err(GeomError::NotRegular { det, t });
        }
        degree += if det > 0.0 { 1 } else { -1 };
    }
    Ok(degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Sampler;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn s6_point(s: &mut Sampler) -> ClutchValue {
        let (p, w) = s.s6();
        ClutchValue::new(p, w).unwrap()
    }

    #[test]
    fn decompose_poles_and_equator() {
        let north = decompose(QuatPair::E1).unwrap();
        assert_eq!(north.t, 0.0);
        assert!(north.degenerate);
        assert_eq!(north.p, ImaginaryQuaternion::I);

        let c = decompose(QuatPair::new(Quaternion::I, Quaternion::ZERO)).unwrap();
        assert!((c.t - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(c.p, ImaginaryQuaternion::I);
        assert_eq!(c.w, Quaternion::ZERO);

        let q = Quaternion::new(0.5, -0.5, 0.5, 0.5);
        let c = decompose(QuatPair::new(Quaternion::ZERO, q)).unwrap();
        assert!((c.t - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(c.p.norm(), 0.0);
        assert!(c.w.max_abs_diff(q) < 1e-15);
    }

    #[test]
    fn decompose_rejects_non_unit() {
        let u = QuatPair::E1.scale(1.1);
        assert!(matches!(decompose(u), Err(GeomError::NotUnit { .. })));
        assert!(rho(2, u).is_err());
        assert!(oct_power(2, u).is_err());
    }

    #[test]
    fn decompose_round_trip() {
        let mut s = Sampler::new(1);
        for _ in 0..1000 {
            let u = s.s7();
            let c = decompose(u).unwrap();
            assert!(c.reconstruct().max_abs_diff(u) <= 1e-12);
            assert!((c.p.norm_sqr() + c.w.norm_sqr() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rho_identity_and_parity_examples() {
        let mut s = Sampler::new(2);
        for _ in 0..100 {
            let u = s.s7();
            assert!(rho(1, u).unwrap().max_abs_diff(u) <= 1e-13);
            let x = s6_point(&mut s).as_pair();
            assert!(rho(3, x).unwrap().max_abs_diff(-x) <= 1e-12);
            assert!(rho(2, x).unwrap().max_abs_diff(-QuatPair::E1) <= 1e-12);
        }
    }

    #[test]
    fn oct_power_examples() {
        let u = Sampler::new(4).s7();
        assert_eq!(oct_power(0, u).unwrap(), QuatPair::E1);
        let i = QuatPair::new(Quaternion::I, Quaternion::ZERO);
        assert_eq!(oct_power(-1, i).unwrap(), QuatPair::new(-Quaternion::I, Quaternion::ZERO));
        assert_eq!(oct_power(2, QuatPair::E2).unwrap(), -QuatPair::E1);
    }

    #[test]
    fn rho_matches_octonion_power() {
        let mut s = Sampler::new(5);
        for _ in 0..2000 {
            let u = s.s7();
            let n = s.int_in(-6, 6);
            let d = rho(n, u).unwrap().max_abs_diff(oct_power(n, u).unwrap());
            assert!(d <= 1e-12, "n = {n}: {d:e}");
        }
        let u = s.s7();
        assert!(rho(5, u).unwrap().max_abs_diff(oct_power(5, u).unwrap()) <= 1e-12);
    }

    #[test]
    fn rho_composes_multiplicatively() {
        let mut s = Sampler::new(6);
        for _ in 0..500 {
            let u = s.s7();
            let m = s.int_in(-4, 4);
            let n = s.int_in(-4, 4);
            let lhs = rho(m, rho(n, u).unwrap()).unwrap();
            let rhs = rho(m * n, u).unwrap();
            assert!(lhs.max_abs_diff(rhs) <= 1e-12);
        }
    }

    #[test]
    fn differential_matches_finite_differences() {
        let mut s = Sampler::new(7);
        for _ in 0..100 {
            let u = s.s7();
            let mut du = s.s7();
            du = du - u * du.dot(u);
            let n = s.int_in(-5, 5);
            let h = 1e-6;
            let fd = (rho(n, (u + du * h).normalize()).unwrap()
                - rho(n, (u - du * h).normalize()).unwrap())
                * (0.5 / h);
            let exact = rho_differential(n, u, du);
            assert!(fd.max_abs_diff(exact) < 1e-7, "n = {n}");
        }
        // at the north pole the differential is multiplication by n
        let du = QuatPair::new(Quaternion::J, Quaternion::K);
        let d = rho_differential(3, QuatPair::E1, du);
        assert!(d.max_abs_diff(du * 3.0) < 1e-15);
    }

    #[test]
    fn clutch_b_examples() {
        let mut s = Sampler::new(8);
        let w = s.unit_quaternion();
        let x = ClutchValue::new(ImaginaryQuaternion::default(), w).unwrap();
        assert!(clutch_b(&x).unwrap().max_abs_diff(Quaternion::ONE) <= 1e-15);

        let r3 = 3.0_f64.sqrt() / 2.0;
        let x = ClutchValue::new(ImaginaryQuaternion::new(r3, 0.0, 0.0), Quaternion::K * 0.5).unwrap();
        let arg = r3 * PI;
        let expected = Quaternion::new(arg.cos(), -arg.sin(), 0.0, 0.0);
        assert!(clutch_b(&x).unwrap().max_abs_diff(expected) <= 1e-15);

        for _ in 0..1000 {
            let b = clutch_b(&s6_point(&mut s)).unwrap();
            assert!((b.norm() - 1.0).abs() <= 1e-14);
        }
        let pole = ClutchValue::new(ImaginaryQuaternion::I, Quaternion::ZERO).unwrap();
        assert!(matches!(clutch_b(&pole), Err(GeomError::Domain(_))));
    }

    #[test]
    fn sigma_examples() {
        let mut s = Sampler::new(9);
        let w = s.unit_quaternion();
        let x = ClutchValue::new(ImaginaryQuaternion::default(), w).unwrap();
        assert!(sigma_pow(1, &x).unwrap().max_abs_diff(&x) <= 1e-15);

        let p = s.unit_imaginary();
        let x = ClutchValue::new(p, Quaternion::ZERO).unwrap();
        assert_eq!(sigma_pow(1, &x).unwrap(), x);
        assert_eq!(sigma_pow(-3, &x).unwrap(), x);

        for _ in 0..500 {
            let x = s6_point(&mut s);
            let there = sigma_pow(1, &x).unwrap();
            assert!((there.norm() - 1.0).abs() <= 1e-14);
            let back = sigma_pow(-1, &there).unwrap();
            assert!(back.max_abs_diff(&x) <= 1e-10);
            let n = s.int_in(-3, 3);
            let y = sigma_pow(n, &x).unwrap();
            assert!(sigma_pow(-n, &y).unwrap().max_abs_diff(&x) <= 1e-10);
        }
    }

    #[test]
    fn rho_and_sigma_are_conjugation_equivariant() {
        let mut s = Sampler::new(10);
        for _ in 0..1000 {
            let q = s.unit_quaternion();
            let u = s.s7();
            let n = s.int_in(-5, 5);
            let lhs = rho(n, u.conjugate_by(q)).unwrap();
            let rhs = rho(n, u).unwrap().conjugate_by(q);
            assert!(lhs.max_abs_diff(rhs) <= 1e-11);

            let x = s6_point(&mut s);
            let m = s.int_in(-3, 3);
            let lhs = sigma_pow(m, &x.conjugate_by(q)).unwrap();
            let rhs = sigma_pow(m, &x).unwrap().conjugate_by(q);
            assert!(lhs.max_abs_diff(&rhs) <= 1e-11);
        }
    }

    #[test]
    fn tangent_frames_are_oriented_orthonormal() {
        let mut s = Sampler::new(12);
        for _ in 0..50 {
            let x = s.s7();
            let f = tangent_frame(x);
            for a in 0..7 {
                assert!(f[a].dot(x).abs() < 1e-14);
                for b in 0..7 {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((f[a].dot(f[b]) - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn degree_examples() {
        let mut s = Sampler::new(13);
        for _ in 0..10 {
            let y = s.s7();
            assert_eq!(degree_check(1, y, 1e-6).unwrap(), 1);
            assert_eq!(degree_check(-1, y, 1e-6).unwrap(), -1);
            assert_eq!(degree_check(3, y, 1e-6).unwrap(), 3);
            assert_eq!(degree_check(0, y, 1e-6).unwrap(), 0);
        }
        assert!(matches!(
            degree_check(2, QuatPair::E1, 1e-6),
            Err(GeomError::NotRegular { .. })
        ));
    }
}
