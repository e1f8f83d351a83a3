//! The principal `S^3`-bundles `E^10_n = {(u, v) ∈ S^7 × S^7 : <<ρ_n(u), v>> = 0}`
//! and the group actions on them.
//!
//! A point is stored as the two columns `u`, `v` of a quaternionic 2×2
//! matrix. The `⋆`-action `q ⋆ (u, v) = (q u conj(q), q v)` has quotient
//! `Σ^7_n`; the `•`-action `q • (u, v) = (u, v conj(q))` is the principal
//! action of `E^10_n → S^7`. Both are special cases of the
//! `Z2 × Z2 × S^3 × S^3 × S^3` action implemented by [`act`].

use serde::Serialize;

use crate::algebra::{hermitian, ImaginaryQuaternion, QuatPair, Quaternion, Sampler, COMPOSITE_TOL};
use crate::error::{GeomError, Result};
use crate::powermaps::rho;

/// Membership tolerance for points supplied from outside the crate.
pub const EXTERNAL_MEMBERSHIP_TOL: f64 = 1e-8;
/// Threshold below which normal-form invariants count as zero.
const NORMAL_FORM_DEGENERATE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BundlePoint {
    n: i64,
    u: QuatPair,
    v: QuatPair,
}

impl BundlePoint {
    /// Validates membership in `E^10_n` up to [`EXTERNAL_MEMBERSHIP_TOL`].
    pub fn new(n: i64, u: QuatPair, v: QuatPair) -> Result<Self> {
        let residual = membership_residual(n, u, v);
        if residual <= EXTERNAL_MEMBERSHIP_TOL {
            Ok(Self { n, u, v })
        } else {
            Err(GeomError::NotInBundle { n, residual })
        }
    }

    pub(crate) fn new_unchecked(n: i64, u: QuatPair, v: QuatPair) -> Self {
        Self { n, u, v }
    }

    /// Identity matrix `(1 0; 0 1)`, a point of every `E^10_n`.
    pub fn identity(n: i64) -> Self {
        Self::new_unchecked(n, QuatPair::E1, QuatPair::E2)
    }

    /// A random point: `u` uniform on `S^7`, `v` uniform on the fiber
    /// `{v : <<ρ_n(u), v>> = 0}`.
    pub fn random(n: i64, sampler: &mut Sampler) -> Self {
        let u = sampler.s7();
        let a = rho(n, u).expect("sampled point is unit");
        let v = complete_column(a, sampler);
        Self::new_unchecked(n, u, v)
    }

    /// A random point over a prescribed base point `u`.
    pub fn random_over(n: i64, u: QuatPair, sampler: &mut Sampler) -> Result<Self> {
        let a = rho(n, u)?;
        let v = complete_column(a, sampler);
        Self::new(n, u, v)
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn u(&self) -> QuatPair {
        self.u
    }

    pub fn v(&self) -> QuatPair {
        self.v
    }

    pub fn residual(&self) -> f64 {
        membership_residual(self.n, self.u, self.v)
    }

    /// Entrywise negation `(-u, -v)`; maps `E^10_n` to itself.
    pub fn negated(&self) -> Self {
        Self::new_unchecked(self.n, -self.u, -self.v)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.u.max_abs_diff(o.u).max(self.v.max_abs_diff(o.v))
    }

    /// The 16 real coordinates `u1, u2, v1, v2`.
    pub fn to_array(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        out[..8].copy_from_slice(&self.u.to_array());
        out[8..].copy_from_slice(&self.v.to_array());
        out
    }

    pub fn from_array(n: i64, a: &[f64; 16]) -> Result<Self> {
        let mut u = [0.0; 8];
        let mut v = [0.0; 8];
        u.copy_from_slice(&a[..8]);
        v.copy_from_slice(&a[8..]);
        Self::new(n, QuatPair::from_array(u), QuatPair::from_array(v))
    }
}

/// Random unit `v` with `<<a, v>> = 0` for a unit column `a`.
fn complete_column(a: QuatPair, sampler: &mut Sampler) -> QuatPair {
    loop {
        let z = sampler.s7();
        let v = z - a.right_mul(hermitian(a, z));
        let n = v.norm();
        if n > 1e-3 {
            return v.scale(1.0 / n);
        }
    }
}

/// `|<<ρ_n(u), v>>|` plus the unit-norm defects of `u` and `v`.
pub fn membership_residual(n: i64, u: QuatPair, v: QuatPair) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if !(nu > 0.0 && nu.is_finite() && nv.is_finite()) {
        return f64::INFINITY;
    }
    let ru = rho(n, u.scale(1.0 / nu)).expect("normalized");
    hermitian(ru, v).norm() + (nu - 1.0).abs() + (nv - 1.0).abs()
}

/// An element of `Sp(2)` given by its two columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sp2Element {
    pub col1: QuatPair,
    pub col2: QuatPair,
}

impl Sp2Element {
    pub const IDENTITY: Self = Self {
        col1: QuatPair::E1,
        col2: QuatPair::E2,
    };

    pub fn new(col1: QuatPair, col2: QuatPair) -> Result<Self> {
        let m = Self { col1, col2 };
        let residual = m.residual();
        if residual <= COMPOSITE_TOL {
            Ok(m)
        } else {
            Err(GeomError::NotSymplectic { residual })
        }
    }

    /// Deviation from `conj(A)^t A = 1`.
    pub fn residual(&self) -> f64 {
        hermitian(self.col1, self.col2).norm()
            + (self.col1.norm() - 1.0).abs()
            + (self.col2.norm() - 1.0).abs()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.col1
            .max_abs_diff(o.col1)
            .max(self.col2.max_abs_diff(o.col2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn times(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// An element `(B, q1, q2, q3)` of `Z2 × Z2 × S^3 × S^3 × S^3`, with `B`
/// the diagonal sign matrix `diag(signs[0], signs[1])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub signs: [Sign; 2],
    pub q1: Quaternion,
    pub q2: Quaternion,
    pub q3: Quaternion,
}

impl GroupElement {
    pub const IDENTITY: Self = Self {
        signs: [Sign::Plus, Sign::Plus],
        q1: Quaternion::ONE,
        q2: Quaternion::ONE,
        q3: Quaternion::ONE,
    };

    pub fn new(signs: [Sign; 2], q1: Quaternion, q2: Quaternion, q3: Quaternion) -> Result<Self> {
        for q in [q1, q2, q3] {
            crate::error::check_unit(q.norm(), crate::algebra::ALGEBRA_TOL)?;
        }
        Ok(Self { signs, q1, q2, q3 })
    }

    /// The Gromoll-Meyer action `q ⋆ (u, v) = (q u conj(q), q v)`.
    pub fn star(q: Quaternion) -> Self {
        Self {
            q1: q,
            q2: q,
            ..Self::IDENTITY
        }
    }

    /// The principal action `q • (u, v) = (u, v conj(q))`.
    pub fn bullet(q: Quaternion) -> Self {
        Self {
            q3: q,
            ..Self::IDENTITY
        }
    }

    pub fn signs(e1: Sign, e2: Sign) -> Self {
        Self {
            signs: [e1, e2],
            ..Self::IDENTITY
        }
    }

    pub fn random(sampler: &mut Sampler) -> Self {
        let sign = |s: &mut Sampler| if s.uniform(0.0, 1.0) < 0.5 { Sign::Plus } else { Sign::Minus };
        let signs = [sign(sampler), sign(sampler)];
        Self {
            signs,
            q1: sampler.unit_quaternion(),
            q2: sampler.unit_quaternion(),
            q3: sampler.unit_quaternion(),
        }
    }

    /// `self ∘ other`: act by `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            signs: [self.signs[0].times(other.signs[0]), self.signs[1].times(other.signs[1])],
            q1: self.q1 * other.q1,
            q2: self.q2 * other.q2,
            q3: self.q3 * other.q3,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            signs: self.signs,
            q1: self.q1.conj(),
            q2: self.q2.conj(),
            q3: self.q3.conj(),
        }
    }

    /// Action on a pair of columns; linear, so it also serves as the differential.
    pub fn apply_columns(&self, u: QuatPair, v: QuatPair) -> (QuatPair, QuatPair) {
        let e1 = self.signs[0].value();
        let e2 = self.signs[1].value();
        let q1c = self.q1.conj();
        let q3c = self.q3.conj();
        (
            QuatPair::new(self.q1 * u.first * q1c * e1, self.q2 * u.second * q1c * e2),
            QuatPair::new(self.q1 * v.first * q3c * e1, self.q2 * v.second * q3c * e2),
        )
    }
}

pub fn act(g: &GroupElement, x: &BundlePoint) -> BundlePoint {
    let (u, v) = g.apply_columns(x.u, x.v);
    BundlePoint::new_unchecked(x.n, u, v)
}

/// Certificate that `y = q ⋆ x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitWitness {
    pub q: Quaternion,
    pub residual: f64,
}

/// Decides whether `y` lies on the `⋆`-orbit of `x`.
///
/// If `y.v = q x.v` then `q = y.v1 conj(x.v1) + y.v2 conj(x.v2)` because
/// `|x.v| = 1`, so the only candidate is computed directly and checked.
pub fn star_orbit_witness(x: &BundlePoint, y: &BundlePoint, tol: f64) -> Result<Option<OrbitWitness>> {
    if x.n != y.n {
        return Err(GeomError::MismatchedN(x.n, y.n));
    }
    let raw = y.v.first * x.v.first.conj() + y.v.second * x.v.second.conj();
    let unit_defect = (raw.norm() - 1.0).abs();
    if unit_defect > 1e-8 {
        return Ok(None);
    }
    let q = raw.normalize();
    let residual = act(&GroupElement::star(q), x).max_abs_diff(y).max(unit_defect);
    Ok((residual <= tol).then_some(OrbitWitness { q, residual }))
}

/// `ρ̃_n(u, v) = (ρ_n(u), v)`, the bundle map `E^10_n → Sp(2)` covering `ρ_n`.
pub fn rho_tilde(x: &BundlePoint) -> Result<Sp2Element> {
    let residual = x.residual();
    if residual > EXTERNAL_MEMBERSHIP_TOL {
        return Err(GeomError::NotInBundle { n: x.n, residual });
    }
    Sp2Element::new(rho(x.n, x.u)?, x.v)
}

/// `α_n(t) = ((cos t, sin t), (-sin nt, cos nt))`; its `⋆`-image is the
/// fixed circle `Σ^1_n` of the `SO(3)`-action.
pub fn alpha_circle(n: i64, t: f64) -> BundlePoint {
    let (s, c) = t.sin_cos();
    let (sn, cn) = (n as f64 * t).sin_cos();
    BundlePoint::new_unchecked(
        n,
        QuatPair::new(Quaternion::real(c), Quaternion::real(s)),
        QuatPair::new(Quaternion::real(-sn), Quaternion::real(cn)),
    )
}

/// The cohomogeneity-two slice
/// `(cos t + i cos s sin t, -sin s sin nt; sin s sin t, cos nt - i cos s sin nt)`.
pub fn normal_form_point(n: i64, s: f64, t: f64) -> BundlePoint {
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    let (snt, cnt) = (n as f64 * t).sin_cos();
    BundlePoint::new_unchecked(
        n,
        QuatPair::new(Quaternion::new(ct, cs * st, 0.0, 0.0), Quaternion::real(ss * st)),
        QuatPair::new(Quaternion::real(-ss * snt), Quaternion::new(cnt, -cs * snt, 0.0, 0.0)),
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DegenerateFlags {
    pub sin_t: bool,
    pub sin_s: bool,
    pub cos_s: bool,
}

impl DegenerateFlags {
    pub fn any(&self) -> bool {
        self.sin_t || self.sin_s || self.cos_s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalForm {
    pub s: f64,
    pub t: f64,
    /// Group element carrying the input onto `normal_form_point(n, s, t)`.
    pub witness: GroupElement,
    pub residual: f64,
    pub degenerate: DegenerateFlags,
}

/// Unit quaternion `q` with `q a conj(q) = i` for a unit imaginary `a`.
fn rotation_to_i(a: ImaginaryQuaternion) -> Quaternion {
    let q = Quaternion::ONE - Quaternion::I * a.to_quat();
    if q.norm() < 1e-8 {
        Quaternion::J
    } else {
        q.normalize()
    }
}

/// Moves `x` into the slice of [`normal_form_point`] with `s ∈ [0, π/2]`,
/// `t ∈ [0, π]`, using only the `S^3 × S^3 × S^3` part of the action.
pub fn normal_form(x: &BundlePoint) -> NormalForm {
    let u = x.u;
    let c = u.first.re;
    let a = u.first.imag_norm();
    let b = u.second.norm();
    let st = (a * a + b * b).sqrt();
    let t = st.atan2(c);
    let s = b.atan2(a);
    let degenerate = DegenerateFlags {
        sin_t: st <= NORMAL_FORM_DEGENERATE,
        sin_s: b <= NORMAL_FORM_DEGENERATE,
        cos_s: a <= NORMAL_FORM_DEGENERATE,
    };
    let q1 = if degenerate.cos_s {
        Quaternion::ONE
    } else {
        rotation_to_i(u.first.imag().scale(1.0 / a))
    };
    let q2 = if degenerate.sin_s {
        Quaternion::ONE
    } else {
        q1 * u.second.conj() * (1.0 / b)
    };
    let target = normal_form_point(x.n, s, t);
    let rotated_v = QuatPair::new(q1 * x.v.first, q2 * x.v.second);
    let q3 = hermitian(rotated_v, target.v).conj().normalize();
    let witness = GroupElement {
        q1,
        q2,
        q3,
        ..GroupElement::IDENTITY
    };
    let residual = act(&witness, x).max_abs_diff(&target);
    NormalForm {
        s,
        t,
        witness,
        residual,
        degenerate,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Strata {
    /// `u ∈ Im H × H`.
    pub in_e9: bool,
    /// `u ∈ Im H × Im H`.
    pub in_e8: bool,
    /// `u ∈ R × R`, the preimage of the circle.
    pub in_e1: bool,
}

pub fn stratum_classify(x: &BundlePoint) -> Strata {
    let tol = COMPOSITE_TOL;
    let re1 = x.u.first.re.abs() <= tol;
    let re2 = x.u.second.re.abs() <= tol;
    Strata {
        in_e9: re1,
        in_e8: re1 && re2,
        in_e1: x.u.first.imag_norm() <= tol && x.u.second.imag_norm() <= tol,
    }
}

/// The `⋆`-orbit representative with `v = (0, 1)` of a point of `E^8_0`:
/// `((p1, p2), (0, q)) ↦ ((conj(q) p1 q, conj(q) p2 q), (0, 1))`.
pub fn sigma5_canonical_rep(x: &BundlePoint) -> Result<BundlePoint> {
    if x.n != 0 {
        return Err(GeomError::WrongStratum(format!("expected n = 0, got n = {}", x.n)));
    }
    if !stratum_classify(x).in_e8 {
        return Err(GeomError::WrongStratum("u is not purely imaginary".into()));
    }
    if x.v.first.norm() > COMPOSITE_TOL {
        return Err(GeomError::WrongStratum(format!(
            "v1 = {} is not zero",
            x.v.first
        )));
    }
    let q = x.v.second.normalize();
    let u = x.u.conjugate_by(q.conj());
    Ok(BundlePoint::new_unchecked(0, u, QuatPair::E2))
}
