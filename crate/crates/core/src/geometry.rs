//! Connection metric on `E^10_n`, horizontal lifts and the geodesic checks
//! around the circle `Σ^1_n`.
//!
//! The connection of `Sp(2) → S^7` is the orthogonal complement of the fibers
//! for the bi-invariant metric, i.e. `<<v, dv>> = 0`. Its pull-back along
//! `ρ̃_n` gives the same condition on the second column of `E^10_n`, since
//! `ρ̃_n` does not touch `v`. A tangent vector `(du, dv)` therefore splits as
//! a horizontal part with `Im <<v, dv>> = 0` plus the vertical `(0, -v ξ)`.

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::algebra::{hermitian, qexp, ImaginaryQuaternion, QuatPair, Quaternion, COMPOSITE_TOL};
use crate::bundle::{
    act, alpha_circle, membership_residual, stratum_classify, BundlePoint, GroupElement,
    OrbitWitness, Strata, EXTERNAL_MEMBERSHIP_TOL,
};
use crate::error::{GeomError, Result};
use crate::powermaps::{rho, rho_differential, ClutchValue};

/// Orbit-witness tolerance used by [`wiedersehen_check`].
pub const WIEDERSEHEN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricParams {
    nu: f64,
}

impl MetricParams {
    pub fn new(nu: f64) -> Result<Self> {
        if nu > 0.0 && nu.is_finite() {
            Ok(Self { nu })
        } else {
            Err(GeomError::Domain(format!("fiber scale must be positive, got {nu}")))
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

impl Default for MetricParams {
    fn default() -> Self {
        Self { nu: 1.0 }
    }
}

/// A tangent vector of `E^10_n` in ambient coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub at: BundlePoint,
    pub du: QuatPair,
    pub dv: QuatPair,
}

/// Derivative of `<<ρ_n(u), v>>` along `(du, dv)`.
fn constraint_derivative(at: &BundlePoint, du: QuatPair, dv: QuatPair) -> Quaternion {
    let a = rho(at.n(), at.u()).expect("bundle points are unit");
    hermitian(rho_differential(at.n(), at.u(), du), at.v()) + hermitian(a, dv)
}

impl TangentVector {
    /// Checks tangency to both spheres and to the defining constraint.
    pub fn new(at: BundlePoint, du: QuatPair, dv: QuatPair) -> Result<Self> {
        let scale = 1.0f64.max(du.norm() + dv.norm());
        let su = at.u().dot(du).abs();
        let sv = at.v().dot(dv).abs();
        if su > COMPOSITE_TOL * scale || sv > COMPOSITE_TOL * scale {
            return Err(GeomError::NotTangent(format!(
                "not tangent to S^7 x S^7 (defects {su:e}, {sv:e})"
            )));
        }
        let c = constraint_derivative(&at, du, dv).norm();
        if c > 1e-8 * scale {
            return Err(GeomError::NotTangent(format!(
                "constraint derivative {c:e} is not zero"
            )));
        }
        Ok(Self { at, du, dv })
    }

    /// No tangency check; for finite-difference data.
    pub fn new_unchecked(at: BundlePoint, du: QuatPair, dv: QuatPair) -> Self {
        Self { at, du, dv }
    }

    /// The tangent vector over `du` (projected to `T_u S^7`) whose vertical
    /// component is `(0, v η)`; `η = 0` gives the horizontal lift of `du`.
    pub fn from_base(at: BundlePoint, du: QuatPair, eta: ImaginaryQuaternion) -> Self {
        let du = du - at.u() * du.dot(at.u());
        let a = rho(at.n(), at.u()).expect("bundle points are unit");
        let c = hermitian(rho_differential(at.n(), at.u(), du), at.v());
        let dv = a.right_mul(-c) + at.v().right_mul(eta.to_quat());
        Self { at, du, dv }
    }

    pub fn zero(at: BundlePoint) -> Self {
        Self::new_unchecked(at, QuatPair::ZERO, QuatPair::ZERO)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.du.max_abs_diff(o.du).max(self.dv.max_abs_diff(o.dv))
    }

    /// Pushforward under the (linear) action of `g`.
    pub fn transform(&self, g: &GroupElement) -> Self {
        let (du, dv) = g.apply_columns(self.du, self.dv);
        Self::new_unchecked(act(g, &self.at), du, dv)
    }
}

impl std::ops::Add for TangentVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new_unchecked(self.at, self.du + o.du, self.dv + o.dv)
    }
}

/// Fundamental field of the principal action: `(0, -v ξ)`.
pub fn vertical_generator(at: &BundlePoint, xi: ImaginaryQuaternion) -> TangentVector {
    TangentVector::new_unchecked(*at, QuatPair::ZERO, at.v().right_mul(-xi.to_quat()))
}

/// Fundamental field of the `⋆`-action: `(ξ u - u ξ, ξ v)`.
pub fn star_generator(at: &BundlePoint, xi: ImaginaryQuaternion) -> TangentVector {
    let x = xi.to_quat();
    let u = at.u();
    TangentVector::new_unchecked(*at, u.left_mul(x) - u.right_mul(x), at.v().left_mul(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalSplit {
    pub horizontal: TangentVector,
    pub vertical: TangentVector,
    /// Lie-algebra coordinate of the vertical part: `vertical = (0, -v ξ)`.
    pub xi: ImaginaryQuaternion,
}

pub fn split_horizontal(x: &TangentVector) -> Result<HorizontalSplit> {
    let tangent = TangentVector::new(x.at, x.du, x.dv)?;
    Ok(split_unchecked(&tangent))
}

fn split_unchecked(x: &TangentVector) -> HorizontalSplit {
    let xi = -hermitian(x.at.v(), x.dv).imag();
    let vertical = vertical_generator(&x.at, xi);
    let horizontal = TangentVector::new_unchecked(x.at, x.du, x.dv - vertical.dv);
    HorizontalSplit {
        horizontal,
        vertical,
        xi,
    }
}

/// `ν <ξ_X, ξ_Y> + re <<dπ X, dπ Y>>`: fibers of curvature `1/ν`, the
/// pulled-back connection, and the round metric of curvature 1 on `S^7`.
pub fn metric_eval(m: &MetricParams, x: &TangentVector, y: &TangentVector) -> Result<f64> {
    if x.at.n() != y.at.n() || x.at.max_abs_diff(&y.at) > 1e-12 {
        return Err(GeomError::MismatchedBase);
    }
    let sx = split_unchecked(x);
    let sy = split_unchecked(y);
    Ok(m.nu() * sx.xi.dot(sy.xi) + x.du.dot(y.du))
}

/// The explicit lift `γ̃_n(t)` of the great circle
/// `β(t) = (cos t + p sin t, w sin t)` starting at the identity matrix.
pub fn lift_gamma(n: i64, dir: &ClutchValue, t: f64) -> BundlePoint {
    let (st, ct) = t.sin_cos();
    let p = dir.p;
    let w = dir.w;
    let u = QuatPair::new(Quaternion::real(ct) + p.to_quat() * st, w * st);
    let wn = w.norm();
    if wn == 0.0 {
        return BundlePoint::new_unchecked(n, u, QuatPair::E2);
    }
    let nt = n as f64 * t;
    let (snt, cnt) = nt.sin_cos();
    let e = qexp(p.scale(nt));
    let wh = w * (1.0 / wn);
    let v = QuatPair::new(
        -(e * w.conj()) * snt,
        wh * e * (Quaternion::real(cnt) - p.to_quat() * snt) * wh.conj(),
    );
    BundlePoint::new_unchecked(n, u, v)
}

/// Residuals of the two horizontality properties of the explicit lift at
/// time `t`, using a central difference with step `h`:
/// `|Im <<v, v'>>|` (horizontal for `E^10_n → S^7`) and the largest
/// `|<γ̃', Z_ξ>_ν|` over the `⋆`-generators `ξ ∈ {i, j, k}`.
pub fn lift_horizontality_residuals(
    n: i64,
    dir: &ClutchValue,
    t: f64,
    h: f64,
    m: &MetricParams,
) -> (f64, f64) {
    let x = lift_gamma(n, dir, t);
    let plus = lift_gamma(n, dir, t + h);
    let minus = lift_gamma(n, dir, t - h);
    let du = (plus.u() - minus.u()) * (0.5 / h);
    let dv = (plus.v() - minus.v()) * (0.5 / h);
    let vel = TangentVector::new_unchecked(x, du, dv);
    let bundle = hermitian(x.v(), dv).imag().norm();
    let star = [ImaginaryQuaternion::I, ImaginaryQuaternion::J, ImaginaryQuaternion::K]
        .into_iter()
        .map(|xi| {
            metric_eval(m, &vel, &star_generator(&x, xi))
                .expect("same base point")
                .abs()
        })
        .fold(0.0, f64::max);
    (bundle, star)
}

/// A curve in `S^7`.
pub trait Curve {
    fn point(&self, s: f64) -> QuatPair;

    fn velocity(&self, s: f64) -> QuatPair {
        let h = 1e-6;
        (self.point(s + h) - self.point(s - h)) * (0.5 / h)
    }
}

/// `s ↦ cos s · start + sin s · direction` for orthonormal `start`, `direction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreatCircle {
    pub start: QuatPair,
    pub direction: QuatPair,
}

impl Curve for GreatCircle {
    fn point(&self, s: f64) -> QuatPair {
        let (sn, cs) = s.sin_cos();
        self.start * cs + self.direction * sn
    }

    fn velocity(&self, s: f64) -> QuatPair {
        let (sn, cs) = s.sin_cos();
        self.direction * cs - self.start * sn
    }
}

/// Adapter turning a closure into a [`Curve`] with finite-difference velocity.
pub struct FnCurve<F>(pub F);

impl<F: Fn(f64) -> QuatPair> Curve for FnCurve<F> {
    fn point(&self, s: f64) -> QuatPair {
        (self.0)(s)
    }
}

fn quat_column(q: Quaternion) -> [f64; 4] {
    q.to_array()
}

/// Solves for `v'` from
/// `<<ρ_n(β), v'>> = -<<(ρ_n ∘ β)', v>>` and `<<v, v'>> = 0`,
/// an 8×8 real linear system.
fn transport_rhs<C: Curve>(n: i64, curve: &C, s: f64, v: QuatPair, step: usize) -> Result<QuatPair> {
    let b = curve.point(s).normalize();
    let db = curve.velocity(s);
    let a = rho(n, b)?;
    let da = rho_differential(n, b, db);
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    for j in 0..8 {
        let mut e = [0.0; 8];
        e[j] = 1.0;
        let ej = QuatPair::from_array(e);
        let top = quat_column(hermitian(a, ej));
        let bottom = quat_column(hermitian(v, ej));
        for i in 0..4 {
            m[(i, j)] = top[i];
            m[(i + 4, j)] = bottom[i];
        }
    }
    let c = quat_column(-hermitian(da, v));
    let rhs = SVector::<f64, 8>::from([c[0], c[1], c[2], c[3], 0.0, 0.0, 0.0, 0.0]);
    let lu = m.lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(GeomError::SingularSystem { step });
    }
    let sol = lu.solve(&rhs).ok_or(GeomError::SingularSystem { step })?;
    let mut out = [0.0; 8];
    out.copy_from_slice(sol.as_slice());
    Ok(QuatPair::from_array(out))
}

/// Horizontal lift of `curve` on `[0, s_end]` starting at `(curve(0), v0)`.
///
/// Classical RK4 on the second column; after each step `v` is projected
/// back onto the unit fiber `{<<ρ_n(β), v>> = 0, |v| = 1}`.
pub fn horizontal_transport<C: Curve>(
    n: i64,
    curve: &C,
    s_end: f64,
    v0: QuatPair,
    steps: usize,
) -> Result<Vec<BundlePoint>> {
    let u0 = curve.point(0.0);
    let residual = membership_residual(n, u0, v0);
    if residual > EXTERNAL_MEMBERSHIP_TOL {
        return Err(GeomError::NotInBundle { n, residual });
    }
    let steps = steps.max(1);
    let h = s_end / steps as f64;
    let mut v = v0;
    let mut path = Vec::with_capacity(steps + 1);
    path.push(BundlePoint::new_unchecked(n, u0, v0));
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = transport_rhs(n, curve, s, v, k)?;
        let k2 = transport_rhs(n, curve, s + 0.5 * h, v + k1 * (0.5 * h), k)?;
        let k3 = transport_rhs(n, curve, s + 0.5 * h, v + k2 * (0.5 * h), k)?;
        let k4 = transport_rhs(n, curve, s + h, v + k3 * h, k)?;
        v = v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let s_next = (k + 1) as f64 * h;
        let u = curve.point(s_next);
        let a = rho(n, u.normalize())?;
        v = (v - a.right_mul(hermitian(a, v))).normalize();
        path.push(BundlePoint::new_unchecked(n, u, v));
    }
    Ok(path)
}

/// `⋆`-orbit candidate for `y = q ⋆ x` and its residual, without a cut-off.
pub fn star_orbit_residual(x: &BundlePoint, y: &BundlePoint) -> OrbitWitness {
    let raw = y.v().first * x.v().first.conj() + y.v().second * x.v().second.conj();
    let q = raw.normalize();
    let residual = act(&GroupElement::star(q), x)
        .max_abs_diff(y)
        .max((raw.norm() - 1.0).abs());
    OrbitWitness { q, residual }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WiedersehenReport {
    /// `γ̃(π)` against `α_n(π)`.
    pub antipode: OrbitWitness,
    /// `γ̃(2π)` against `α_n(0)`.
    pub closing: OrbitWitness,
}

impl WiedersehenReport {
    pub fn max_residual(&self) -> f64 {
        self.antipode.residual.max(self.closing.residual)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Checks that the geodesic leaving the identity in direction `(p, w)`
/// reaches the `⋆`-orbit of the antipode `α_n(π)` at time `π` and returns
/// to the starting orbit at time `2π`.
pub fn wiedersehen_check(n: i64, dir: &ClutchValue) -> WiedersehenReport {
    let pi = std::f64::consts::PI;
    WiedersehenReport {
        antipode: star_orbit_residual(&alpha_circle(n, pi), &lift_gamma(n, dir, pi)),
        closing: star_orbit_residual(&alpha_circle(n, 0.0), &lift_gamma(n, dir, 2.0 * pi)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoinSegment {
    pub path: Vec<BundlePoint>,
    /// Length of the segment in `S^7`; `π/2` by construction.
    pub length: f64,
    /// Length of the sampled polygon in `S^7`, a consistency check on `length`.
    pub polyline_length: f64,
    pub start_strata: Strata,
    pub end_strata: Strata,
    pub end_membership_residual: f64,
    /// Largest `|<<v, v'>>|` over the sampled steps.
    pub max_horizontality_defect: f64,
}

/// Horizontal lift of the quarter great circle from `(cos t0, sin t0)` to the
/// purely imaginary unit column `y`, starting on `α_n(t0)`.
pub fn join_segment(n: i64, t0: f64, y: QuatPair, step: f64) -> Result<JoinSegment> {
    if y.first.re.abs() > crate::algebra::ALGEBRA_TOL || y.second.re.abs() > crate::algebra::ALGEBRA_TOL {
        return Err(GeomError::Domain("join endpoint must be purely imaginary".into()));
    }
    crate::error::check_unit(y.norm(), COMPOSITE_TOL)?;
    if !(step > 0.0) {
        return Err(GeomError::Domain(format!("step must be positive, got {step}")));
    }
    let start = alpha_circle(n, t0);
    let curve = GreatCircle {
        start: start.u(),
        direction: y,
    };
    let quarter = std::f64::consts::FRAC_PI_2;
    let steps = (quarter / step).ceil() as usize;
    let path = horizontal_transport(n, &curve, quarter, start.v(), steps)?;
    let polyline_length = path
        .windows(2)
        .map(|w| (w[1].u() - w[0].u()).norm())
        .sum();
    let mut max_horizontality_defect: f64 = 0.0;
    for w in path.windows(2) {
        let dv = w[1].v() - w[0].v();
        let mid = (w[1].v() + w[0].v()).normalize();
        max_horizontality_defect = max_horizontality_defect.max(hermitian(mid, dv).imag().norm() / (quarter / steps as f64));
    }
    let end = *path.last().expect("non-empty path");
    Ok(JoinSegment {
        length: quarter,
        polyline_length,
        start_strata: stratum_classify(&start),
        end_strata: stratum_classify(&end),
        end_membership_residual: end.residual(),
        max_horizontality_defect,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Sampler;
    use crate::bundle::star_orbit_witness;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn s6(s: &mut Sampler) -> ClutchValue {
        let (p, w) = s.s6();
        ClutchValue::new(p, w).unwrap()
    }

    fn random_tangent(x: BundlePoint, s: &mut Sampler) -> TangentVector {
        let du = s.s7() * s.uniform(0.2, 2.0);
        let eta = s.unit_imaginary().scale(s.uniform(-2.0, 2.0));
        TangentVector::from_base(x, du, eta)
    }

    #[test]
    fn from_base_produces_tangent_vectors() {
        let mut s = Sampler::new(1);
        for n in -4..=4 {
            for _ in 0..50 {
                let x = BundlePoint::random(n, &mut s);
                let t = random_tangent(x, &mut s);
                assert!(TangentVector::new(x, t.du, t.dv).is_ok());
            }
        }
        let x = BundlePoint::random(2, &mut s);
        assert!(TangentVector::new(x, x.u(), QuatPair::ZERO).is_err());
    }

    #[test]
    fn split_examples() {
        let mut s = Sampler::new(2);
        let x = BundlePoint::random(3, &mut s);
        let gen = vertical_generator(&x, ImaginaryQuaternion::I);
        let sp = split_horizontal(&gen).unwrap();
        assert!(sp.horizontal.du.norm() + sp.horizontal.dv.norm() <= 1e-15);
        assert!((sp.xi.to_quat() - Quaternion::I).norm() <= 1e-15);

        let h = TangentVector::from_base(x, s.s7(), ImaginaryQuaternion::default());
        let sp = split_horizontal(&h).unwrap();
        assert!(sp.vertical.dv.norm() <= 1e-15);

        for _ in 0..200 {
            let n = s.int_in(-4, 4);
            let x = BundlePoint::random(n, &mut s);
            let t = random_tangent(x, &mut s);
            let sp = split_horizontal(&t).unwrap();
            assert!((sp.horizontal + sp.vertical).max_abs_diff(&t) <= 1e-13);
            assert!(hermitian(x.v(), sp.horizontal.dv).imag().norm() <= 1e-12);
            assert_eq!(sp.vertical.du, QuatPair::ZERO);
        }
    }

    #[test]
    fn metric_examples() {
        let mut s = Sampler::new(3);
        let m = MetricParams::new(2.5).unwrap();
        let x = BundlePoint::random(1, &mut s);
        let vert = vertical_generator(&x, ImaginaryQuaternion::I);
        assert!((metric_eval(&m, &vert, &vert).unwrap() - 2.5).abs() <= 1e-14);

        let du = TangentVector::from_base(x, s.s7(), ImaginaryQuaternion::default()).du;
        let hor = TangentVector::from_base(x, du.scale(1.0 / du.norm()), ImaginaryQuaternion::default());
        assert!((metric_eval(&m, &hor, &hor).unwrap() - 1.0).abs() <= 1e-14);
        assert!(metric_eval(&m, &vert, &hor).unwrap().abs() <= 1e-14);

        let other = TangentVector::zero(BundlePoint::random(1, &mut s));
        assert_eq!(metric_eval(&m, &vert, &other), Err(GeomError::MismatchedBase));
        assert!(MetricParams::new(0.0).is_err());
        assert!(MetricParams::new(-1.0).is_err());
    }

    #[test]
    fn metric_is_symmetric_positive_and_linear_in_nu() {
        let mut s = Sampler::new(4);
        for _ in 0..100 {
            let x = BundlePoint::random(s.int_in(-3, 3), &mut s);
            let a = random_tangent(x, &mut s);
            let b = random_tangent(x, &mut s);
            let m = MetricParams::new(s.uniform(0.1, 3.0)).unwrap();
            let ab = metric_eval(&m, &a, &b).unwrap();
            let ba = metric_eval(&m, &b, &a).unwrap();
            assert!((ab - ba).abs() <= 1e-13);
            assert!(metric_eval(&m, &a, &a).unwrap() > 0.0);

            let vert = split_horizontal(&a).unwrap().vertical;
            let vals: Vec<f64> = [0.5, 1.0, 2.0]
                .iter()
                .map(|&nu| metric_eval(&MetricParams::new(nu).unwrap(), &vert, &vert).unwrap())
                .collect();
            let slope = (vals[2] - vals[0]) / 1.5;
            assert!((slope - vert.dv.norm_sqr()).abs() <= 1e-12);
            assert!((vals[1] - slope).abs() <= 1e-12);
        }
    }

    #[test]
    fn actions_are_isometric() {
        let mut s = Sampler::new(5);
        for _ in 0..100 {
            let n = s.int_in(-4, 4);
            let x = BundlePoint::random(n, &mut s);
            let g = GroupElement::random(&mut s);
            let a = random_tangent(x, &mut s);
            let b = random_tangent(x, &mut s);
            let m = MetricParams::new(s.uniform(0.2, 3.0)).unwrap();
            let before = metric_eval(&m, &a, &b).unwrap();
            let after = metric_eval(&m, &a.transform(&g), &b.transform(&g)).unwrap();
            assert!((before - after).abs() <= 1e-9);
        }
    }

    #[test]
    fn lift_examples() {
        let mut s = Sampler::new(6);
        for n in -3..=3 {
            let dir = s6(&mut s);
            assert!(lift_gamma(n, &dir, 0.0).max_abs_diff(&BundlePoint::identity(n)) <= 1e-15);
        }
        let p = s.unit_imaginary();
        let dir = ClutchValue::new(p, Quaternion::ZERO).unwrap();
        for n in -3..=3 {
            let t = 1.3;
            let x = lift_gamma(n, &dir, t);
            let e = qexp(p.scale(t));
            assert!(x.u().max_abs_diff(QuatPair::new(e, Quaternion::ZERO)) <= 1e-15);
            assert_eq!(x.v(), QuatPair::E2);
        }
    }

    #[test]
    fn lift_is_in_bundle_and_projects_to_great_circle() {
        let mut s = Sampler::new(7);
        for _ in 0..300 {
            let n = s.int_in(-5, 5);
            let dir = s6(&mut s);
            let t = s.uniform(-7.0, 7.0);
            let x = lift_gamma(n, &dir, t);
            assert!(x.residual() <= 1e-11);
            let beta = GreatCircle {
                start: QuatPair::E1,
                direction: dir.as_pair(),
            };
            assert!(x.u().max_abs_diff(beta.point(t)) <= 1e-13);
        }
    }

    #[test]
    fn lift_near_w_zero_is_continuous() {
        let p = ImaginaryQuaternion::new(0.6, 0.0, 0.8);
        let exact = ClutchValue::new(p, Quaternion::ZERO).unwrap();
        let eps: f64 = 1e-9;
        let near = ClutchValue::new(p.scale((1.0 - eps * eps).sqrt()), Quaternion::new(0.0, 0.0, eps, 0.0)).unwrap();
        for n in -3..=3 {
            for t in [0.3, 1.0, 2.5] {
                let a = lift_gamma(n, &exact, t);
                let b = lift_gamma(n, &near, t);
                assert!(a.max_abs_diff(&b) <= 1e-7, "n = {n}, t = {t}");
            }
        }
    }

    #[test]
    fn lift_is_doubly_horizontal() {
        let mut s = Sampler::new(8);
        let m = MetricParams::default();
        for _ in 0..200 {
            let n = s.int_in(-4, 4);
            let dir = s6(&mut s);
            let t = s.uniform(0.0, 2.0 * PI);
            let (bundle, star) = lift_horizontality_residuals(n, &dir, t, 1e-6, &m);
            assert!(bundle <= 1e-6 && star <= 1e-6, "{bundle:e} {star:e}");
        }
    }

    #[test]
    fn transport_keeps_constant_curve_fixed() {
        let mut s = Sampler::new(9);
        let x = BundlePoint::random(3, &mut s);
        let u = x.u();
        let curve = FnCurve(move |_s: f64| u);
        let path = horizontal_transport(3, &curve, 1.0, x.v(), 50).unwrap();
        assert!(path.last().unwrap().v().max_abs_diff(x.v()) <= 1e-14);
    }

    #[test]
    fn transport_reproduces_explicit_lift() {
        let mut s = Sampler::new(10);
        for n in [-3, -1, 0, 1, 2, 4] {
            let dir = s6(&mut s);
            let curve = GreatCircle {
                start: QuatPair::E1,
                direction: dir.as_pair(),
            };
            let t_end = 2.0;
            let steps = 2000;
            let path = horizontal_transport(n, &curve, t_end, QuatPair::E2, steps).unwrap();
            for (k, x) in path.iter().enumerate().step_by(97) {
                let t = k as f64 * t_end / steps as f64;
                let d = x.max_abs_diff(&lift_gamma(n, &dir, t));
                assert!(d <= 1e-7, "n = {n}, t = {t}: {d:e}");
                assert!(x.residual() <= 1e-8);
            }
        }
    }

    #[test]
    fn transport_closes_in_fiber_over_loop() {
        let mut s = Sampler::new(11);
        let x = BundlePoint::random(2, &mut s);
        let mut d = s.s7();
        d = (d - x.u() * d.dot(x.u())).normalize();
        let curve = GreatCircle {
            start: x.u(),
            direction: d,
        };
        let path = horizontal_transport(2, &curve, 2.0 * PI, x.v(), 4000).unwrap();
        let end = path.last().unwrap();
        assert!(end.u().max_abs_diff(x.u()) <= 1e-12);
        assert!(end.residual() <= 1e-8);
    }

    #[test]
    fn transport_rhs_matches_closed_form_horizontal_lift() {
        let mut s = Sampler::new(12);
        for _ in 0..50 {
            let n = s.int_in(-4, 4);
            let x = BundlePoint::random(n, &mut s);
            let mut d = s.s7();
            d = (d - x.u() * d.dot(x.u())).normalize();
            let curve = GreatCircle {
                start: x.u(),
                direction: d,
            };
            let from_system = transport_rhs(n, &curve, 0.0, x.v(), 0).unwrap();
            let closed = TangentVector::from_base(x, d, ImaginaryQuaternion::default()).dv;
            assert!(from_system.max_abs_diff(closed) <= 1e-12);
        }
    }

    #[test]
    fn transport_rejects_bad_start() {
        let curve = GreatCircle {
            start: QuatPair::E1,
            direction: QuatPair::E2,
        };
        let err = horizontal_transport(1, &curve, 1.0, QuatPair::E1, 10).unwrap_err();
        assert!(matches!(err, GeomError::NotInBundle { .. }));
    }

    #[test]
    fn wiedersehen_examples() {
        let p = ImaginaryQuaternion::new(0.0, 0.6, 0.8);
        let dir = ClutchValue::new(p, Quaternion::ZERO).unwrap();
        for n in -3..=3 {
            let r = wiedersehen_check(n, &dir);
            assert!(r.passed(1e-12), "{r:?}");
        }
        let mut s = Sampler::new(13);
        for n in [0, 3] {
            for _ in 0..50 {
                let r = wiedersehen_check(n, &s6(&mut s));
                assert!(r.passed(WIEDERSEHEN_TOL));
            }
        }
    }

    #[test]
    fn clutching_relation_sample() {
        let mut s = Sampler::new(14);
        for n in -3..=3 {
            for _ in 0..50 {
                let dir = s6(&mut s);
                let sig = crate::powermaps::sigma_pow(n, &dir).unwrap();
                let lhs = lift_gamma(n, &dir, FRAC_PI_2);
                let rhs = lift_gamma(n, &(-sig), FRAC_PI_2).negated();
                assert!(star_orbit_witness(&rhs, &lhs, 1e-9).unwrap().is_some());
            }
        }
    }

    #[test]
    fn join_examples() {
        let y = QuatPair::new(Quaternion::I, Quaternion::ZERO);
        let seg = join_segment(2, 0.0, y, 1e-2).unwrap();
        let end = seg.path.last().unwrap();
        assert!(end.u().max_abs_diff(y) <= 1e-14);
        assert!(seg.end_strata.in_e8 && seg.start_strata.in_e1);
        assert_eq!(seg.length, FRAC_PI_2);
        assert!((seg.polyline_length - FRAC_PI_2).abs() <= 1e-4);
        assert!(seg.end_membership_residual <= 1e-8);

        let mut s = Sampler::new(15);
        let (p1, p2) = s.s5();
        let y = QuatPair::new(p1.to_quat(), p2.to_quat());
        let t0 = 0.9;
        let start = alpha_circle(0, t0).u();
        assert!(start.dot(y).abs() <= 1e-15);
        let a = join_segment(2, t0, y, 1e-2).unwrap();
        let b = join_segment(0, t0, y, 1e-2).unwrap();
        assert_eq!(a.path.last().unwrap().u(), b.path.last().unwrap().u());

        let bad = QuatPair::new(Quaternion::ONE, Quaternion::ZERO);
        assert!(join_segment(1, 0.0, bad, 1e-2).is_err());
    }
}
