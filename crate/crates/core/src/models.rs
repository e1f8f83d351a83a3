//! Comparison models: Milnor spheres `M^7_{k,l}` with the Davis
//! `GL(2,R) × SO(3)` action and the submanifold `M^5_d`, the Brieskorn
//! varieties `W^5_d` and `W^7_{6n-1,3}`, and the curves `α`, `β` whose
//! isotropy groups identify `M^5_d` with `W^5_d`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{qexp, ImaginaryQuaternion, Quaternion, Sampler, ALGEBRA_TOL, COMPOSITE_TOL};
use crate::error::{GeomError, Result};

/// Brieskorn polynomial tolerance for stored points.
pub const POLY_TOL: f64 = 1e-10;
/// Below this a Möbius denominator counts as vanishing.
const DENOM_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Chart {
    First,
    Second,
}

impl Chart {
    fn other(self) -> Self {
        match self {
            Chart::First => Chart::Second,
            Chart::Second => Chart::First,
        }
    }
}

/// Gluing exponents `(k, l)` with `k + l = 1`; `d = k - l` is odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Exponents {
    k: i64,
    l: i64,
}

impl Exponents {
    pub fn new(k: i64, l: i64) -> Result<Self> {
        if k + l != 1 {
            return Err(GeomError::Domain(format!("exponents must satisfy k + l = 1, got ({k}, {l})")));
        }
        Ok(Self { k, l })
    }

    pub fn from_d(d: i64) -> Result<Self> {
        if d.rem_euclid(2) != 1 {
            return Err(GeomError::Domain(format!("d = k - l must be odd, got {d}")));
        }
        Ok(Self {
            k: (d + 1) / 2,
            l: (1 - d) / 2,
        })
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn l(&self) -> i64 {
        self.l
    }

    pub fn d(&self) -> i64 {
        self.k - self.l
    }

    fn swapped(self) -> Self {
        Self { k: self.l, l: self.k }
    }
}

/// A point of `M^7_{k,l}` in one of the two `H × S^3` charts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MilnorPoint {
    pub chart: Chart,
    pub u: Quaternion,
    v: Quaternion,
    pub exps: Exponents,
}

impl MilnorPoint {
    pub fn new(chart: Chart, u: Quaternion, v: Quaternion, exps: Exponents) -> Result<Self> {
        crate::error::check_unit(v.norm(), ALGEBRA_TOL)?;
        if !u.is_finite() {
            return Err(GeomError::Domain("non-finite base coordinate".into()));
        }
        Ok(Self { chart, u, v, exps })
    }

    pub fn v(&self) -> Quaternion {
        self.v
    }

    pub fn with_negated_v(&self) -> Self {
        Self { v: -self.v, ..*self }
    }

    /// Distance to `o` after bringing both to the chart of `self`;
    /// infinite when `o` sits at the pole of that chart.
    pub fn displacement(&self, o: &MilnorPoint) -> f64 {
        let o = if o.chart == self.chart {
            *o
        } else {
            match milnor_transition(o) {
                Ok(t) => t,
                Err(_) => return f64::INFINITY,
            }
        };
        o.u.max_abs_diff(self.u).max(o.v.max_abs_diff(self.v))
    }

    pub fn random_overlap(exps: Exponents, s: &mut Sampler) -> Self {
        let u = Quaternion::new(s.gaussian(), s.gaussian(), s.gaussian(), s.gaussian());
        let chart = if s.uniform(0.0, 1.0) < 0.5 { Chart::First } else { Chart::Second };
        Self {
            chart,
            u,
            v: s.unit_quaternion(),
            exps,
        }
    }

    /// A random point of `M^5_d`: `re v = 0` and `re(u v) = 0`.
    pub fn random_m5(exps: Exponents, s: &mut Sampler) -> Self {
        let v = s.unit_imaginary();
        let g = ImaginaryQuaternion::new(s.gaussian(), s.gaussian(), s.gaussian()).to_quat();
        let along = v.to_quat() * g.dot(v.to_quat());
        let im = g - along;
        let u = Quaternion::real(s.gaussian()) + im;
        let chart = if s.uniform(0.0, 1.0) < 0.5 { Chart::First } else { Chart::Second };
        Self {
            chart,
            u,
            v: v.to_quat(),
            exps,
        }
    }
}

/// `x^k` for unit `x`, negative powers through the conjugate.
fn unit_pow(x: Quaternion, k: i64) -> Quaternion {
    let base = if k < 0 { x.conj() } else { x };
    (0..k.unsigned_abs()).fold(Quaternion::ONE, |acc, _| acc * base)
}

/// Gluing map `(u, v) ↦ (u/|u|², û^k v û^l)` and its inverse.
pub fn milnor_transition(x: &MilnorPoint) -> Result<MilnorPoint> {
    let r2 = x.u.norm_sqr();
    if r2 < DENOM_MIN * DENOM_MIN {
        return Err(GeomError::Domain("u = 0 is not in the chart overlap".into()));
    }
    let u = x.u / r2;
    let (k, l) = (x.exps.k, x.exps.l);
    let v = match x.chart {
        Chart::First => {
            let h = x.u.normalize();
            unit_pow(h, k) * x.v * unit_pow(h, l)
        }
        Chart::Second => {
            let h = u.normalize();
            unit_pow(h, -k) * x.v * unit_pow(h, -l)
        }
    };
    Ok(MilnorPoint {
        chart: x.chart.other(),
        u,
        v,
        exps: x.exps,
    })
}

/// Real 2×2 matrix `[[a, c], [b, d]]` acting by Möbius transformations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self · o`
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.c * o.b,
            c: self.a * o.c + self.c * o.d,
            b: self.b * o.a + self.d * o.b,
            d: self.b * o.c + self.d * o.d,
        }
    }
}

/// An element of `GL(2,R) × SO(3)`, with the extra involution `v ↦ -v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MilnorGroupElement {
    m: Mat2,
    q: Quaternion,
    pub negate_v: bool,
}

impl MilnorGroupElement {
    pub fn new(m: Mat2, q: Quaternion, negate_v: bool) -> Result<Self> {
        if m.det().abs() < DENOM_MIN {
            return Err(GeomError::Domain("matrix is not invertible".into()));
        }
        crate::error::check_unit(q.norm(), COMPOSITE_TOL)?;
        Ok(Self { m, q, negate_v })
    }

    pub fn from_o2(g: &O2Element, q: Quaternion) -> Result<Self> {
        Self::new(g.matrix(), q, false)
    }

    pub fn m(&self) -> Mat2 {
        self.m
    }

    pub fn q(&self) -> Quaternion {
        self.q
    }
}

fn mobius_chart1(m: &Mat2, x: &MilnorPoint) -> Option<MilnorPoint> {
    let den = x.u * m.b + Quaternion::real(m.d);
    if den.norm() < DENOM_MIN {
        return None;
    }
    let num = x.u * m.a + Quaternion::real(m.c);
    let h = den.normalize();
    Some(MilnorPoint {
        chart: Chart::First,
        u: num * den.inverse(),
        v: unit_pow(h, x.exps.k) * x.v * unit_pow(h, x.exps.l) * m.det().signum(),
        exps: x.exps,
    })
}

fn mobius_chart2(m: &Mat2, x: &MilnorPoint) -> Option<MilnorPoint> {
    let den = x.u * m.c + Quaternion::real(m.a);
    if den.norm() < DENOM_MIN {
        return None;
    }
    let num = x.u * m.d + Quaternion::real(m.b);
    let h = (x.u.conj() * m.c + Quaternion::real(m.a)).normalize();
    Some(MilnorPoint {
        chart: Chart::Second,
        u: num * den.inverse(),
        v: unit_pow(h, x.exps.k) * x.v * unit_pow(h, x.exps.l) * m.det().signum(),
        exps: x.exps,
    })
}

/// Davis action in whichever chart has a non-vanishing denominator.
/// The result may land in the other chart. The fiber is twisted by the sign
/// of `det m`, which keeps `v` on `S^3` and agrees with `det m` on `O(2)`.
pub fn milnor_act(g: &MilnorGroupElement, x: &MilnorPoint) -> Result<MilnorPoint> {
    let y = MilnorPoint {
        u: g.q.conjugate_by(x.u),
        v: g.q.conjugate_by(x.v),
        ..*x
    };
    let apply = |p: &MilnorPoint| match p.chart {
        Chart::First => mobius_chart1(&g.m, p),
        Chart::Second => mobius_chart2(&g.m, p),
    };
    let out = match apply(&y) {
        Some(p) => p,
        None => {
            let t = milnor_transition(&y)?;
            apply(&t).ok_or_else(|| GeomError::Domain("both Möbius denominators vanish".into()))?
        }
    };
    Ok(if g.negate_v { out.with_negated_v() } else { out })
}

/// `|re v| + |re(u v)|`, zero exactly on `M^5_d`.
pub fn m5_residual(x: &MilnorPoint) -> f64 {
    x.v.re.abs() + (x.u * x.v).re.abs()
}

/// `α(s) = (i tan s, j)` in the first chart.
pub fn milnor_alpha(s: f64, exps: Exponents) -> Result<MilnorPoint> {
    if s.cos().abs() < 1e-12 || !s.is_finite() {
        return Err(GeomError::Domain(format!("α is not defined at s = {s}")));
    }
    Ok(MilnorPoint {
        chart: Chart::First,
        u: Quaternion::I * s.tan(),
        v: Quaternion::J,
        exps,
    })
}

/// `(u, v) ↦ (ū, v̄)` from `M^7_d` to `M^7_{-d}`.
pub fn milnor_conjugate(x: &MilnorPoint) -> MilnorPoint {
    MilnorPoint {
        chart: x.chart,
        u: x.u.conj(),
        v: x.v.conj(),
        exps: x.exps.swapped(),
    }
}

/// `R(θ)` or `R(θ) · diag(1, -1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct O2Element {
    pub theta: f64,
    pub reflect: bool,
}

impl O2Element {
    pub const IDENTITY: Self = Self { theta: 0.0, reflect: false };

    pub fn rotation(theta: f64) -> Self {
        Self { theta, reflect: false }
    }

    pub fn reflection(theta: f64) -> Self {
        Self { theta, reflect: true }
    }

    pub fn matrix(&self) -> Mat2 {
        let (s, c) = self.theta.sin_cos();
        let r = Mat2 { a: c, b: s, c: -s, d: c };
        if self.reflect {
            r.mul(&Mat2 { a: 1.0, b: 0.0, c: 0.0, d: -1.0 })
        } else {
            r
        }
    }
}

pub type Mat3 = [[f64; 3]; 3];

/// Rotation `x ↦ q x q̄` of `Im H` in the basis `i, j, k`.
pub fn so3_from_quaternion(q: Quaternion) -> Mat3 {
    let q = q.normalize();
    let mut m = [[0.0; 3]; 3];
    for (col, e) in [Quaternion::I, Quaternion::J, Quaternion::K].into_iter().enumerate() {
        let img = q.conjugate_by(e);
        for row in 0..3 {
            m[row][col] = img.im[row];
        }
    }
    m
}

fn orthogonality_defect(a: &Mat3) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|r| a[r][i] * a[r][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn mat3_apply(a: &Mat3, z: &[Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (r, o) in out.iter_mut().enumerate() {
        *o = z[0] * a[r][0] + z[1] * a[r][1] + z[2] * a[r][2];
    }
    out
}

fn check_rotation(a: &Mat3) -> Result<()> {
    let defect = orthogonality_defect(a);
    if defect > COMPOSITE_TOL || det3(a) < 0.0 {
        return Err(GeomError::Domain(format!(
            "matrix is not a rotation (orthogonality defect {defect:e})"
        )));
    }
    Ok(())
}

fn norm_sqr_c(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

fn sum_squares(z: &[Complex64; 3]) -> Complex64 {
    z[0] * z[0] + z[1] * z[1] + z[2] * z[2]
}

/// A point of `W^5_d = {z0^d + z1² + z2² + z3² = 0} ∩ S^7`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BrieskornPoint5 {
    d: u32,
    pub z0: Complex64,
    pub z: [Complex64; 3],
}

impl BrieskornPoint5 {
    pub fn new(d: u32, z0: Complex64, z: [Complex64; 3]) -> Result<Self> {
        if d == 0 {
            return Err(GeomError::Domain("exponent must be positive".into()));
        }
        let x = Self { d, z0, z };
        crate::error::check_unit(x.norm(), ALGEBRA_TOL)?;
        if x.poly_residual() > POLY_TOL {
            return Err(GeomError::Domain(format!(
                "not on the Brieskorn variety (residual {:e})",
                x.poly_residual()
            )));
        }
        Ok(x)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn norm(&self) -> f64 {
        (self.z0.norm_sqr() + norm_sqr_c(&self.z)).sqrt()
    }

    pub fn poly_residual(&self) -> f64 {
        (self.z0.powu(self.d) + sum_squares(&self.z)).norm()
    }

    /// Unit-norm and polynomial defects combined.
    pub fn residual(&self) -> f64 {
        (self.norm() - 1.0).abs() + self.poly_residual()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut m = (self.z0 - o.z0).norm();
        for i in 0..3 {
            m = m.max((self.z[i] - o.z[i]).norm());
        }
        m
    }

    pub fn random(d: u32, s: &mut Sampler) -> Self {
        let z0 = Complex64::new(s.gaussian(), s.gaussian());
        let z = quadric_solution(-z0.powu(d), s);
        let (z0, z) = scale_weighted(&[(z0, 1.0 / d as f64)], &z);
        Self { d, z0: z0[0], z }
    }
}

/// A point of `W^7_{6n-1,3} = {w^{6n-1} + z0³ + z1² + z2² + z3² = 0} ∩ S^9`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BrieskornPoint7 {
    n: u32,
    pub w: Complex64,
    pub z0: Complex64,
    pub z: [Complex64; 3],
}

impl BrieskornPoint7 {
    pub fn new(n: u32, w: Complex64, z0: Complex64, z: [Complex64; 3]) -> Result<Self> {
        if n == 0 {
            return Err(GeomError::Domain("n must be positive".into()));
        }
        let x = Self { n, w, z0, z };
        crate::error::check_unit(x.norm(), ALGEBRA_TOL)?;
        if x.poly_residual() > POLY_TOL {
            return Err(GeomError::Domain(format!(
                "not on the Brieskorn variety (residual {:e})",
                x.poly_residual()
            )));
        }
        Ok(x)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn w_exponent(&self) -> u32 {
        6 * self.n - 1
    }

    pub fn norm(&self) -> f64 {
        (self.w.norm_sqr() + self.z0.norm_sqr() + norm_sqr_c(&self.z)).sqrt()
    }

    pub fn poly_residual(&self) -> f64 {
        (self.w.powu(self.w_exponent()) + self.z0.powu(3) + sum_squares(&self.z)).norm()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut m = (self.w - o.w).norm().max((self.z0 - o.z0).norm());
        for i in 0..3 {
            m = m.max((self.z[i] - o.z[i]).norm());
        }
        m
    }

    pub fn random(n: u32, s: &mut Sampler) -> Self {
        let m = 6 * n - 1;
        let w = Complex64::new(s.gaussian(), s.gaussian());
        let z0 = Complex64::new(s.gaussian(), s.gaussian());
        let z = quadric_solution(-(w.powu(m) + z0.powu(3)), s);
        let (head, z) = scale_weighted(&[(w, 1.0 / m as f64), (z0, 1.0 / 3.0)], &z);
        Self { n, w: head[0], z0: head[1], z }
    }

    /// A random point with `z2 = z3 = 0`, i.e. on `W^3_{6n-1,3,2}`.
    pub fn random_w3(n: u32, s: &mut Sampler) -> Self {
        let m = 6 * n - 1;
        let w = Complex64::new(s.gaussian(), s.gaussian());
        let z0 = Complex64::new(s.gaussian(), s.gaussian());
        let z1 = (-(w.powu(m) + z0.powu(3))).sqrt();
        let zero = Complex64::new(0.0, 0.0);
        let (head, z) = scale_weighted(&[(w, 1.0 / m as f64), (z0, 1.0 / 3.0)], &[z1, zero, zero]);
        Self { n, w: head[0], z0: head[1], z }
    }
}

/// Some `z ∈ C^3` with `z1² + z2² + z3² = c`: `√c (a x̂ + i b ŷ)` with
/// orthonormal real `x̂, ŷ` and `a² - b² = 1`.
fn quadric_solution(c: Complex64, s: &mut Sampler) -> [Complex64; 3] {
    let x = s.unit_imaginary();
    let g = s.unit_imaginary();
    let y = {
        let p = g.to_quat() - x.to_quat() * g.dot(x);
        p.normalize().imag()
    };
    let b = s.uniform(0.0, 1.5);
    let a = (1.0 + b * b).sqrt();
    let r = c.sqrt();
    let mut z = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        z[i] = r * Complex64::new(a * x.0[i], b * y.0[i]);
    }
    z
}

/// Weighted-homogeneous rescaling `(λ^{w_i} h_i, λ^{1/2} z)` onto the unit
/// sphere; it preserves any Brieskorn polynomial with matching weights.
fn scale_weighted(head: &[(Complex64, f64)], z: &[Complex64; 3]) -> (Vec<Complex64>, [Complex64; 3]) {
    let zn = norm_sqr_c(z);
    let norm_at = |lam: f64| -> f64 {
        head.iter().map(|(h, wt)| h.norm_sqr() * lam.powf(2.0 * wt)).sum::<f64>() + lam * zn
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while norm_at(hi) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let lam = 0.5 * (lo + hi);
    let scaled_head: Vec<Complex64> = head.iter().map(|(h, wt)| h * lam.powf(*wt)).collect();
    let r = lam.sqrt();
    let mut scaled_z = [z[0] * r, z[1] * r, z[2] * r];
    // absorb the remaining norm defect into z, which changes the polynomial
    // only at second order
    let total = scaled_head.iter().map(|h| h.norm_sqr()).sum::<f64>() + norm_sqr_c(&scaled_z);
    if zn > 0.0 {
        let fix = ((1.0 - total) / norm_sqr_c(&scaled_z) + 1.0).max(0.0).sqrt();
        for c in &mut scaled_z {
            *c *= fix;
        }
    }
    (scaled_head, scaled_z)
}

/// `(e^{2iθ} z0, e^{idθ} A z)`, preceded by `(z̄0, z̄)` when `reflect`.
pub fn brieskorn_act5(g: &O2Element, a: &Mat3, x: &BrieskornPoint5) -> Result<BrieskornPoint5> {
    check_rotation(a)?;
    let (z0, z) = if g.reflect {
        (x.z0.conj(), [x.z[0].conj(), x.z[1].conj(), x.z[2].conj()])
    } else {
        (x.z0, x.z)
    };
    let rot0 = Complex64::from_polar(1.0, 2.0 * g.theta);
    let rotz = Complex64::from_polar(1.0, x.d as f64 * g.theta);
    let az = mat3_apply(a, &z);
    Ok(BrieskornPoint5 {
        d: x.d,
        z0: rot0 * z0,
        z: [rotz * az[0], rotz * az[1], rotz * az[2]],
    })
}

/// `A` acting on the last three coordinates of `W^7`.
pub fn brieskorn_act7_so3(a: &Mat3, x: &BrieskornPoint7) -> Result<BrieskornPoint7> {
    check_rotation(a)?;
    Ok(BrieskornPoint7 {
        z: mat3_apply(a, &x.z),
        ..*x
    })
}

/// The root of `1 - s² + s^d` in `(-1, 0)`; only odd `d` have one.
pub fn beta_lower_end(d: u32) -> Result<f64> {
    if d % 2 == 0 {
        return Err(GeomError::Domain(format!("1 - s² + s^d has no negative root for even d = {d}")));
    }
    let f = |s: f64| 1.0 - s * s + s.powi(d as i32);
    let (mut lo, mut hi) = (-1.0f64, 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `β(s) = (s, 0, √(1-s²-s^d)/√2, -i √(1-s²+s^d)/√2)` on `[s₋, 0]`.
pub fn brieskorn_beta(d: u32, s: f64) -> Result<BrieskornPoint5> {
    let lower = beta_lower_end(d)?;
    if !(s >= lower - 1e-12 && s <= 0.0) {
        return Err(GeomError::Domain(format!("β is defined on [{lower}, 0], got s = {s}")));
    }
    let sd = s.powi(d as i32);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = (1.0 - s * s - sd).max(0.0).sqrt() * r;
    // at the end point the radicand vanishes exactly; evaluating it would
    // leave a square root of rounding noise
    let minus = if s <= lower { 0.0 } else { (1.0 - s * s + sd).max(0.0).sqrt() * r };
    let zero = Complex64::new(0.0, 0.0);
    Ok(BrieskornPoint5 {
        d,
        z0: Complex64::new(s, 0.0),
        z: [zero, Complex64::new(plus, 0.0), Complex64::new(0.0, -minus)],
    })
}

/// `|z2| + |z3|`, zero exactly on the fixed set of `diag(1, -1, -1)`.
pub fn w7_fixed_residual(x: &BrieskornPoint7) -> f64 {
    x.z[1].norm() + x.z[2].norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveFamily {
    MilnorAlpha,
    BrieskornBeta,
}

impl FromStr for CurveFamily {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "milnor-alpha" => Ok(Self::MilnorAlpha),
            "brieskorn-beta" => Ok(Self::BrieskornBeta),
            other => Err(GeomError::Domain(format!(
                "unknown curve family '{other}' (expected milnor-alpha or brieskorn-beta)"
            ))),
        }
    }
}

impl fmt::Display for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MilnorAlpha => "milnor-alpha",
            Self::BrieskornBeta => "brieskorn-beta",
        })
    }
}

/// An `O(2) × SO(3)` element, with `SO(3)` given by a unit quaternion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotropyCandidate {
    pub label: String,
    pub o2: O2Element,
    pub q: Quaternion,
}

impl IsotropyCandidate {
    pub fn new(label: impl Into<String>, o2: O2Element, q: Quaternion) -> Self {
        Self {
            label: label.into(),
            o2,
            q: q.normalize(),
        }
    }

    pub fn random(s: &mut Sampler) -> Self {
        let o2 = O2Element {
            theta: s.uniform(-std::f64::consts::PI, std::f64::consts::PI),
            reflect: s.uniform(0.0, 1.0) < 0.5,
        };
        Self::new("random", o2, s.unit_quaternion())
    }
}

fn diag_minus_one_plus_one() -> O2Element {
    // diag(-1, 1) = R(π) · diag(1, -1)
    O2Element::reflection(std::f64::consts::PI)
}

/// Members of the isotropy group at `s = 0` for the sampled `τ`.
pub fn k_minus_candidates(taus: &[f64]) -> Vec<IsotropyCandidate> {
    let mut out = Vec::new();
    let minus_e = O2Element::rotation(std::f64::consts::PI);
    for &tau in taus {
        let e = qexp(ImaginaryQuaternion::J.scale(tau));
        out.push(IsotropyCandidate::new(format!("K-:E,e^(j{tau})"), O2Element::IDENTITY, e));
        out.push(IsotropyCandidate::new(format!("K-:-E,i e^(j{tau})"), minus_e, Quaternion::I * e));
        out.push(IsotropyCandidate::new(format!("K-:diag(1,-1),e^(j{tau})"), O2Element::reflection(0.0), e));
        out.push(IsotropyCandidate::new(
            format!("K-:diag(-1,1),i e^(j{tau})"),
            diag_minus_one_plus_one(),
            Quaternion::I * e,
        ));
    }
    out
}

/// The principal isotropy group, present for all interior `s`.
pub fn h_candidates() -> Vec<IsotropyCandidate> {
    vec![
        IsotropyCandidate::new("H:E,1", O2Element::IDENTITY, Quaternion::ONE),
        IsotropyCandidate::new("H:-E,i", O2Element::rotation(std::f64::consts::PI), Quaternion::I),
        IsotropyCandidate::new("H:diag(1,-1),j", O2Element::reflection(0.0), Quaternion::J),
        IsotropyCandidate::new("H:diag(-1,1),k", diag_minus_one_plus_one(), Quaternion::K),
    ]
}

/// Members of the isotropy group at `s = π/4` for the sampled `θ`; both
/// lifts `±e^{-(d/2)iθ}` are listed.
pub fn k_plus_candidates(d: i64, thetas: &[f64]) -> Vec<IsotropyCandidate> {
    let mut out = Vec::new();
    for &theta in thetas {
        let e = qexp(ImaginaryQuaternion::I.scale(-0.5 * d as f64 * theta));
        for (sign, lift) in [("+", e), ("-", -e)] {
            out.push(IsotropyCandidate::new(format!("K+:R({theta}),{sign}e"), O2Element::rotation(theta), lift));
            out.push(IsotropyCandidate::new(
                format!("K+:R({theta})diag(1,-1),{sign}e j"),
                O2Element::reflection(theta),
                lift * Quaternion::J,
            ));
        }
    }
    out
}

/// `β`-parameter matching `α(s)`: `α(0) ↔ β(s₋)` and `α(π/4) ↔ β(0)`.
pub fn matched_beta_parameter(d: u32, s_alpha: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_4).contains(&s_alpha) {
        return Err(GeomError::Domain(format!("α-parameter must lie in [0, π/4], got {s_alpha}")));
    }
    let lower = beta_lower_end(d)?;
    Ok(lower * (1.0 - s_alpha / FRAC_PI_4))
}

/// Displacement of the curve point at `s` under each candidate.
///
/// On the Milnor side the curve is `α` in `M^7_{k,l}` with `k - l = d`;
/// on the Brieskorn side it is `β` in `W^5_d` with `A` the rotation of `q`.
pub fn isotropy_scan(family: CurveFamily, s: f64, d: i64, candidates: &[IsotropyCandidate]) -> Result<Vec<f64>> {
    match family {
        CurveFamily::MilnorAlpha => {
            if !(0.0..=FRAC_PI_4).contains(&s) {
                return Err(GeomError::Domain(format!("α is scanned on [0, π/4], got s = {s}")));
            }
            let x = milnor_alpha(s, Exponents::from_d(d)?)?;
            candidates
                .iter()
                .map(|c| {
                    let g = MilnorGroupElement::from_o2(&c.o2, c.q)?;
                    Ok(x.displacement(&milnor_act(&g, &x)?))
                })
                .collect()
        }
        CurveFamily::BrieskornBeta => {
            if d <= 0 {
                return Err(GeomError::Domain(format!("Brieskorn exponent must be positive, got {d}")));
            }
            let x = brieskorn_beta(d as u32, s)?;
            candidates
                .iter()
                .map(|c| Ok(x.max_abs_diff(&brieskorn_act5(&c.o2, &so3_from_quaternion(c.q), &x)?)))
                .collect()
        }
    }
}
