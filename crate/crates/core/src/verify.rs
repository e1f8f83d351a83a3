//! Batch verification suites, JSON reports and geodesic CSV export.
//!
//! Each suite draws its samples from [`Sampler::for_sample`] so a report is
//! a pure function of its [`SuiteConfig`]. Checks are sorted by name; a
//! suite whose check list is empty passes vacuously.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::algebra::{QuatPair, Quaternion, Sampler};
use crate::bundle::{
    act, normal_form, normal_form_point, rho_tilde, sigma5_canonical_rep, star_orbit_witness, BundlePoint,
    GroupElement,
};
use crate::error::GeomError;
use crate::geometry::{
    join_segment, lift_gamma, lift_horizontality_residuals, star_orbit_residual, wiedersehen_check, MetricParams,
};
use crate::models::{
    brieskorn_act5, brieskorn_act7_so3, h_candidates, isotropy_scan, k_minus_candidates, k_plus_candidates,
    m5_residual, matched_beta_parameter, milnor_act, milnor_transition, so3_from_quaternion, w7_fixed_residual,
    BrieskornPoint5, BrieskornPoint7, Chart, CurveFamily, Exponents, IsotropyCandidate, MilnorGroupElement,
    MilnorPoint, O2Element,
};
use crate::powermaps::{decompose, degree_check, oct_power, rho, sigma_pow, ClutchValue};

/// Environment variable overriding every default tolerance.
pub const TOL_ENV: &str = "GM_SPHERES_TOL";

/// Finite-difference step of the lift velocity and the degree Jacobian.
const FD_STEP: f64 = 1e-6;
/// Random isotropy candidates must move the curve point by more than this.
const MOVED_MIN: f64 = 1e-3;
/// Listed isotropy members must move the curve point by at most this.
const FIXED_MAX: f64 = 1e-11;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] GeomError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    RhoOracle,
    Parity,
    BundleInvariance,
    PullbackIdentity,
    Horizontality,
    Wiedersehen,
    Clutching,
    Degree,
    Join,
    Sigma5Rep,
    NormalForm,
    MilnorIsotropy,
    BrieskornIsotropy,
    M5Invariance,
    W7Fixed,
}

impl Suite {
    pub const ALL: [Suite; 15] = [
        Suite::RhoOracle,
        Suite::Parity,
        Suite::BundleInvariance,
        Suite::PullbackIdentity,
        Suite::Horizontality,
        Suite::Wiedersehen,
        Suite::Clutching,
        Suite::Degree,
        Suite::Join,
        Suite::Sigma5Rep,
        Suite::NormalForm,
        Suite::MilnorIsotropy,
        Suite::BrieskornIsotropy,
        Suite::M5Invariance,
        Suite::W7Fixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RhoOracle => "rho-oracle",
            Suite::Parity => "parity",
            Suite::BundleInvariance => "bundle-invariance",
            Suite::PullbackIdentity => "pullback-identity",
            Suite::Horizontality => "horizontality",
            Suite::Wiedersehen => "wiedersehen",
            Suite::Clutching => "clutching",
            Suite::Degree => "degree",
            Suite::Join => "join",
            Suite::Sigma5Rep => "sigma5-rep",
            Suite::NormalForm => "normal-form",
            Suite::MilnorIsotropy => "milnor-isotropy",
            Suite::BrieskornIsotropy => "brieskorn-isotropy",
            Suite::M5Invariance => "m5-invariance",
            Suite::W7Fixed => "w7-fixed",
        }
    }

    /// One line describing what the suite checks.
    pub fn describe(self) -> &'static str {
        match self {
            Suite::RhoOracle => "suspension power map equals the octonion power",
            Suite::Parity => "odd powers are ±id and even powers are constant on S^6",
            Suite::BundleInvariance => "E^10_n is invariant under Z2 x Z2 x S3 x S3 x S3; star and bullet commute",
            Suite::PullbackIdentity => "rho~_n of the lift at t equals the n = 1 lift at nt",
            Suite::Horizontality => "the explicit lift is horizontal for both fibrations",
            Suite::Wiedersehen => "geodesics from the circle refocus on the antipodal orbit and close at 2 pi",
            Suite::Clutching => "half-turn orbit relation through sigma^n",
            Suite::Degree => "rho_n has degree n",
            Suite::Join => "horizontal quarter circles from the circle end on E^8_n",
            Suite::Sigma5Rep => "canonical star-orbit representative on E^8_0 (n ignored)",
            Suite::NormalForm => "cohomogeneity-two normal form round trip",
            Suite::MilnorIsotropy => "isotropy groups along alpha in M^5_d (n is d, odd and positive)",
            Suite::BrieskornIsotropy => "isotropy groups along beta in W^5_d match alpha (n is d)",
            Suite::M5Invariance => "M^5_d is invariant; fixed set of (-E, i) (n is d, odd)",
            Suite::W7Fixed => "fixed set of diag(1,-1,-1) on W^7_{6n-1,3} is W^3 (n >= 1)",
        }
    }

    pub fn registry_listing() -> String {
        Suite::ALL
            .iter()
            .map(|s| format!("  {:<20}{}", s.name(), s.describe()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, VerifyError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::Usage(format!("unknown suite '{s}'; available suites:\n{}", Suite::registry_listing())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub n: i64,
    pub nu: f64,
    pub samples: usize,
    pub seed: u64,
    /// Overrides every default `≤` threshold when set.
    pub tol: Option<f64>,
    pub step: f64,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            n: 3,
            nu: 1.0,
            samples: 100,
            seed: 0,
            tol: None,
            step: 1e-2,
        }
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(VerifyError::Usage(format!("--{name} must be positive, got {x}")))
            }
        };
        positive("nu", self.nu)?;
        positive("step", self.step)?;
        if let Some(t) = self.tol {
            positive("tol", t)?;
        }
        if self.samples == 0 {
            return Err(VerifyError::Usage("--samples must be positive".into()));
        }
        Ok(())
    }

    /// Reads the tolerance override from [`TOL_ENV`] if none is set.
    pub fn with_env_tol(mut self) -> Result<Self, VerifyError> {
        if self.tol.is_none() {
            if let Ok(raw) = std::env::var(TOL_ENV) {
                let t: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| VerifyError::Usage(format!("{TOL_ENV} is not a number: '{raw}'")))?;
                self.tol = Some(t);
            }
        }
        Ok(self)
    }

    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

/// Extra data attached to the worst sample of a check.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub sample: u64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub params: SuiteConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_time_ms: u64,
}

/// Largest residual of a check with a `≤ tol` threshold.
struct MaxCheck {
    name: &'static str,
    tol: f64,
    worst: f64,
    witness: Option<Witness>,
}

impl MaxCheck {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, sample: u64, residual: f64) {
        self.record_with(sample, residual, || Vec::new());
    }

    fn record_with(&mut self, sample: u64, residual: f64, values: impl FnOnce() -> Vec<f64>) {
        let worse = !(residual <= self.worst) || self.witness.is_none();
        if worse && !(self.worst.is_nan()) {
            self.worst = if residual.is_nan() { f64::NAN } else { residual.max(self.worst) };
            let values = values();
            self.witness = (!values.is_empty()).then_some(Witness { sample, values });
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            passed: self.worst <= self.tol,
            max_residual: self.worst,
            witness: self.witness,
        }
    }
}

/// Number of samples violating a qualitative condition; passes at zero and
/// ignores the tolerance override.
struct CountCheck {
    name: &'static str,
    failures: u64,
    first: Option<u64>,
}

impl CountCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: 0,
            first: None,
        }
    }

    fn record(&mut self, sample: u64, ok: bool) {
        if !ok {
            self.failures += 1;
            self.first.get_or_insert(sample);
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            passed: self.failures == 0,
            max_residual: self.failures as f64,
            witness: self.first.map(|sample| Witness {
                sample,
                values: Vec::new(),
            }),
        }
    }
}

fn quat_values(q: Quaternion) -> Vec<f64> {
    q.to_array().to_vec()
}

fn random_clutch(s: &mut Sampler) -> ClutchValue {
    let (p, w) = s.s6();
    ClutchValue::new(p, w).expect("sampled on S^6")
}

fn require_odd_positive_d(n: i64, suite: Suite) -> Result<i64, VerifyError> {
    if n > 0 && n % 2 == 1 {
        Ok(n)
    } else {
        Err(VerifyError::Usage(format!("suite {suite} reads --n as d, which must be odd and positive; got {n}")))
    }
}

/// Runs one suite. Numeric failures of individual samples surface as failed
/// checks; only invalid configurations are errors.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, VerifyError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut checks = match cfg.suite {
        Suite::RhoOracle => suite_rho_oracle(cfg)?,
        Suite::Parity => suite_parity(cfg)?,
        Suite::BundleInvariance => suite_bundle_invariance(cfg),
        Suite::PullbackIdentity => suite_pullback(cfg)?,
        Suite::Horizontality => suite_horizontality(cfg),
        Suite::Wiedersehen => suite_wiedersehen(cfg),
        Suite::Clutching => suite_clutching(cfg)?,
        Suite::Degree => suite_degree(cfg)?,
        Suite::Join => suite_join(cfg)?,
        Suite::Sigma5Rep => suite_sigma5(cfg)?,
        Suite::NormalForm => suite_normal_form(cfg),
        Suite::MilnorIsotropy => suite_isotropy(cfg, CurveFamily::MilnorAlpha)?,
        Suite::BrieskornIsotropy => suite_isotropy(cfg, CurveFamily::BrieskornBeta)?,
        Suite::M5Invariance => suite_m5(cfg)?,
        Suite::W7Fixed => suite_w7(cfg)?,
    };
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report {
        suite: cfg.suite,
        params: *cfg,
        checks,
        passed,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn suite_rho_oracle(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    let mut oracle = MaxCheck::new("rho-vs-octonion-power", cfg.tol_or(1e-12));
    let mut chart = MaxCheck::new("suspension-round-trip", cfg.tol_or(1e-12));
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let u = s.s7();
        let a = rho(cfg.n, u)?;
        let b = oct_power(cfg.n, u)?;
        oracle.record_with(i, a.max_abs_diff(b), || u.to_array().to_vec());
        chart.record(i, decompose(u)?.reconstruct().max_abs_diff(u));
    }
    Ok(vec![oracle.finish(), chart.finish()])
}

fn suite_parity(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    let m_max = cfg.n.abs();
    let mut odd = MaxCheck::new("odd-powers", cfg.tol_or(1e-12));
    let mut even = MaxCheck::new("even-powers", cfg.tol_or(1e-12));
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let (p, w) = s.s6();
        let u = QuatPair::new(p.to_quat(), w);
        for m in -m_max..=m_max {
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            odd.record(i, rho(2 * m + 1, u)?.max_abs_diff(u * sign));
            even.record(i, rho(2 * m, u)?.max_abs_diff(QuatPair::E1 * sign));
        }
    }
    Ok(vec![odd.finish(), even.finish()])
}

fn suite_bundle_invariance(cfg: &SuiteConfig) -> Vec<Check> {
    let tol = cfg.tol_or(1e-11);
    let mut membership = MaxCheck::new("membership", tol);
    let mut commute = MaxCheck::new("star-bullet-commute", tol);
    let mut law = MaxCheck::new("action-law", tol);
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let x = BundlePoint::random(cfg.n, &mut s);
        let g = GroupElement::random(&mut s);
        let h = GroupElement::random(&mut s);
        membership.record(i, act(&g, &x).residual());
        let a = GroupElement::star(s.unit_quaternion());
        let b = GroupElement::bullet(s.unit_quaternion());
        let ab = act(&a, &act(&b, &x));
        let ba = act(&b, &act(&a, &x));
        commute.record(i, ab.max_abs_diff(&ba));
        law.record(i, act(&g, &act(&h, &x)).max_abs_diff(&act(&g.compose(&h), &x)));
    }
    vec![membership.finish(), commute.finish(), law.finish()]
}

fn suite_pullback(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    const GRID: usize = 100;
    let mut check = MaxCheck::new("pullback-identity", cfg.tol_or(1e-10));
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let dir = random_clutch(&mut s);
        for k in 0..GRID {
            let t = 2.0 * PI * k as f64 / GRID as f64;
            let m = rho_tilde(&lift_gamma(cfg.n, &dir, t))?;
            let y = lift_gamma(1, &dir, cfg.n as f64 * t);
            let err = m.col1.max_abs_diff(y.u()).max(m.col2.max_abs_diff(y.v()));
            check.record_with(i, err, || vec![t]);
        }
    }
    Ok(vec![check.finish()])
}

fn suite_horizontality(cfg: &SuiteConfig) -> Vec<Check> {
    let metric = MetricParams::new(cfg.nu).expect("validated");
    let tol = cfg.tol_or(1e-6);
    let mut bundle = MaxCheck::new("bundle-horizontal", tol);
    let mut star = MaxCheck::new("star-horizontal", tol);
    let mut membership = MaxCheck::new("lift-membership", cfg.tol_or(1e-11));
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let dir = random_clutch(&mut s);
        let t = s.uniform(0.0, 2.0 * PI);
        let (b, st) = lift_horizontality_residuals(cfg.n, &dir, t, FD_STEP, &metric);
        bundle.record_with(i, b, || vec![t]);
        star.record_with(i, st, || vec![t]);
        membership.record(i, lift_gamma(cfg.n, &dir, t).residual());
    }
    vec![bundle.finish(), star.finish(), membership.finish()]
}

fn suite_wiedersehen(cfg: &SuiteConfig) -> Vec<Check> {
    let tol = cfg.tol_or(1e-9);
    let mut antipode = MaxCheck::new("antipode-orbit", tol);
    let mut closing = MaxCheck::new("closing-orbit", tol);
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let r = wiedersehen_check(cfg.n, &random_clutch(&mut s));
        antipode.record_with(i, r.antipode.residual, || quat_values(r.antipode.q));
        closing.record_with(i, r.closing.residual, || quat_values(r.closing.q));
    }
    vec![antipode.finish(), closing.finish()]
}

fn suite_clutching(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    let mut check = MaxCheck::new("half-turn-orbit", cfg.tol_or(1e-9));
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let dir = random_clutch(&mut s);
        let sig = sigma_pow(cfg.n, &dir)?;
        let lhs = lift_gamma(cfg.n, &dir, FRAC_PI_2);
        let rhs = lift_gamma(cfg.n, &(-sig), FRAC_PI_2).negated();
        let w = star_orbit_residual(&rhs, &lhs);
        check.record_with(i, w.residual, || quat_values(w.q));
    }
    Ok(vec![check.finish()])
}

fn suite_degree(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    const MAX_DRAWS: usize = 100;
    let mut check = CountCheck::new("degree-equals-n");
    let mut admissible = CountCheck::new("regular-value-found");
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let mut result = None;
        for _ in 0..MAX_DRAWS {
            match degree_check(cfg.n, s.s7(), FD_STEP) {
                Ok(deg) => {
                    result = Some(deg);
                    break;
                }
                Err(GeomError::NotRegular { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        admissible.record(i, result.is_some());
        check.record(i, result == Some(cfg.n));
    }
    Ok(vec![check.finish(), admissible.finish()])
}

fn suite_join(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    let mut start = CountCheck::new("start-in-e1");
    let mut end = CountCheck::new("end-in-e8");
    let mut membership = MaxCheck::new("end-membership", cfg.tol_or(1e-8));
    let mut endpoint = MaxCheck::new("end-on-target", cfg.tol_or(1e-12));
    // chord sums underestimate arc length by about L h² / 24
    let mut length = MaxCheck::new("polyline-length", cfg.tol_or(FRAC_PI_2 * cfg.step * cfg.step / 12.0));
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let t0 = s.uniform(0.0, 2.0 * PI);
        let (p1, p2) = s.s5();
        let y = QuatPair::new(p1.to_quat(), p2.to_quat());
        let seg = join_segment(cfg.n, t0, y, cfg.step)?;
        start.record(i, seg.start_strata.in_e1);
        end.record(i, seg.end_strata.in_e8);
        membership.record(i, seg.end_membership_residual);
        endpoint.record(i, seg.path.last().expect("non-empty").u().max_abs_diff(y));
        length.record(i, (seg.polyline_length - seg.length).abs());
    }
    Ok(vec![start.finish(), end.finish(), membership.finish(), endpoint.finish(), length.finish()])
}

fn suite_sigma5(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    let tol = cfg.tol_or(1e-12);
    let mut idempotent = MaxCheck::new("idempotent", tol);
    let mut faithful = MaxCheck::new("orbit-faithful", tol);
    let mut exact = CountCheck::new("v-is-e2");
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let (p1, p2) = s.s5();
        let v2 = s.unit_quaternion();
        let x = BundlePoint::new(
            0,
            QuatPair::new(p1.to_quat(), p2.to_quat()),
            QuatPair::new(Quaternion::ZERO, v2),
        )?;
        let r = sigma5_canonical_rep(&x)?;
        let rr = sigma5_canonical_rep(&r)?;
        idempotent.record(i, rr.max_abs_diff(&r));
        let w = star_orbit_residual(&x, &r);
        faithful.record_with(i, w.residual, || quat_values(w.q));
        exact.record(i, r.v() == QuatPair::E2);
    }
    Ok(vec![idempotent.finish(), faithful.finish(), exact.finish()])
}

fn suite_normal_form(cfg: &SuiteConfig) -> Vec<Check> {
    let tol = cfg.tol_or(1e-9);
    let mut params = MaxCheck::new("recovered-parameters", tol);
    let mut witness = MaxCheck::new("witness-residual", tol);
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let ss = s.uniform(0.05, FRAC_PI_2 - 0.05);
        let tt = s.uniform(0.05, PI - 0.05);
        let g = GroupElement::random(&mut s);
        let g = GroupElement {
            signs: GroupElement::IDENTITY.signs,
            ..g
        };
        let x = act(&g, &normal_form_point(cfg.n, ss, tt));
        let nf = normal_form(&x);
        params.record_with(i, (nf.s - ss).abs().max((nf.t - tt).abs()), || vec![ss, tt]);
        witness.record(i, nf.residual);
    }
    vec![params.finish(), witness.finish()]
}

/// Scan points `(s_α, s_β)` and the candidates expected to fix each.
fn isotropy_plan(d: i64, samples: usize, seed: u64) -> Result<Vec<(f64, f64, Vec<IsotropyCandidate>, Vec<IsotropyCandidate>)>, VerifyError> {
    let mut s = Sampler::for_sample(seed, 0);
    let taus: Vec<f64> = (0..4).map(|_| s.uniform(-PI, PI)).collect();
    let thetas: Vec<f64> = (0..4).map(|_| s.uniform(-PI, PI)).collect();
    let h = h_candidates();
    let mut k_minus = k_minus_candidates(&taus);
    k_minus.extend(h.iter().cloned());
    let mut k_plus = k_plus_candidates(d, &thetas);
    k_plus.extend(h.iter().cloned());
    let interior: Vec<f64> = (0..3).map(|_| s.uniform(0.05, FRAC_PI_4 - 0.05)).collect();
    let mut plan = Vec::new();
    let mut points = vec![(0.0, k_minus)];
    points.extend(interior.into_iter().map(|x| (x, h.clone())));
    points.push((FRAC_PI_4, k_plus));
    for (idx, (sa, listed)) in points.into_iter().enumerate() {
        let sb = matched_beta_parameter(d as u32, sa)?;
        let mut rs = Sampler::for_sample(seed, idx as u64 + 1);
        let random: Vec<IsotropyCandidate> = (0..samples).map(|_| IsotropyCandidate::random(&mut rs)).collect();
        plan.push((sa, sb, listed, random));
    }
    Ok(plan)
}

fn suite_isotropy(cfg: &SuiteConfig, family: CurveFamily) -> Result<Vec<Check>, VerifyError> {
    let d = require_odd_positive_d(cfg.n, cfg.suite)?;
    let mut listed_check = MaxCheck::new("listed-members-fix", cfg.tol_or(FIXED_MAX));
    let mut random_check = CountCheck::new("random-elements-move");
    let mut pattern = CountCheck::new("pattern-matches-other-side");
    let other = match family {
        CurveFamily::MilnorAlpha => CurveFamily::BrieskornBeta,
        CurveFamily::BrieskornBeta => CurveFamily::MilnorAlpha,
    };
    let plan = isotropy_plan(d, cfg.samples, cfg.seed)?;
    let mut sample = 0u64;
    for (sa, sb, listed, random) in &plan {
        let param = |f: CurveFamily| if f == CurveFamily::MilnorAlpha { *sa } else { *sb };
        let all: Vec<IsotropyCandidate> = listed.iter().chain(random.iter()).cloned().collect();
        let here = isotropy_scan(family, param(family), d, &all)?;
        let there = isotropy_scan(other, param(other), d, &all)?;
        for (k, disp) in here.iter().enumerate() {
            if k < listed.len() {
                listed_check.record_with(sample, *disp, || vec![*sa, *sb, k as f64]);
            } else {
                random_check.record(sample, *disp > MOVED_MIN);
            }
            pattern.record(sample, (*disp <= FIXED_MAX) == (there[k] <= FIXED_MAX));
            sample += 1;
        }
    }
    let mut checks = vec![listed_check.finish(), random_check.finish(), pattern.finish()];
    if family == CurveFamily::BrieskornBeta {
        // the involution (-E, i) moves a point of W^5_d by exactly 2|z1|
        let mut slice = MaxCheck::new("involution-fixed-set-is-z1-slice", cfg.tol_or(1e-12));
        let inv = O2Element::rotation(PI);
        let a = so3_from_quaternion(Quaternion::I);
        for i in 0..cfg.samples as u64 {
            let mut s = Sampler::for_sample(cfg.seed, 1_000_000 + i);
            let x = BrieskornPoint5::random(d as u32, &mut s);
            let y = brieskorn_act5(&inv, &a, &x)?;
            slice.record(i, (y.max_abs_diff(&x) - 2.0 * x.z[0].norm()).abs());
        }
        checks.push(slice.finish());
    }
    Ok(checks)
}

fn suite_m5(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    let exps = Exponents::from_d(cfg.n).map_err(|e| VerifyError::Usage(format!("suite m5-invariance reads --n as d: {e}")))?;
    let tol = cfg.tol_or(1e-10);
    let mut transition = MaxCheck::new("invariant-under-transition", tol);
    let mut action = MaxCheck::new("invariant-under-action", tol);
    let mut fixed = MaxCheck::new("involution-fixed-points-in-m5", tol);
    let involution = MilnorGroupElement::from_o2(&O2Element::rotation(PI), Quaternion::I)?;
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let x = MilnorPoint::random_m5(exps, &mut s);
        transition.record(i, m5_residual(&milnor_transition(&x)?));
        let o2 = O2Element {
            theta: s.uniform(-PI, PI),
            reflect: s.uniform(0.0, 1.0) < 0.5,
        };
        let g = MilnorGroupElement::new(o2.matrix(), s.unit_quaternion(), s.uniform(0.0, 1.0) < 0.5)?;
        action.record_with(i, m5_residual(&milnor_act(&g, &x)?), || vec![o2.theta]);

        // fixed points of (-E, i): u in span(1, i), v in span(j, k)
        let phi = s.uniform(-PI, PI);
        let p = MilnorPoint::new(
            Chart::First,
            Quaternion::new(s.gaussian(), s.gaussian(), 0.0, 0.0),
            Quaternion::new(0.0, 0.0, phi.cos(), phi.sin()),
            exps,
        )?;
        let moved = p.displacement(&milnor_act(&involution, &p)?);
        fixed.record(i, moved.max(m5_residual(&p)));
    }
    Ok(vec![transition.finish(), action.finish(), fixed.finish()])
}

fn suite_w7(cfg: &SuiteConfig) -> Result<Vec<Check>, VerifyError> {
    if cfg.n < 1 {
        return Err(VerifyError::Usage(format!("suite w7-fixed needs n >= 1, got {}", cfg.n)));
    }
    let n = cfg.n as u32;
    let inv = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    let mut w3_residual = MaxCheck::new("w3-points-fixed", cfg.tol_or(1e-12));
    let mut w3_member = MaxCheck::new("w3-points-on-w7", cfg.tol_or(1e-10));
    let mut iff = CountCheck::new("moves-iff-residual-positive");
    let mut generic = CountCheck::new("generic-points-not-fixed");
    for i in 0..cfg.samples as u64 {
        let mut s = Sampler::for_sample(cfg.seed, i);
        let p = BrieskornPoint7::random_w3(n, &mut s);
        let moved = brieskorn_act7_so3(&inv, &p)?.max_abs_diff(&p);
        w3_residual.record(i, w7_fixed_residual(&p).max(moved));
        w3_member.record(i, p.poly_residual().max((p.norm() - 1.0).abs()));
        let x = BrieskornPoint7::random(n, &mut s);
        let moved = brieskorn_act7_so3(&inv, &x)?.max_abs_diff(&x);
        let r = w7_fixed_residual(&x);
        iff.record(i, (moved > 0.0) == (r > 0.0));
        generic.record(i, r > 0.0);
    }
    Ok(vec![w3_residual.finish(), w3_member.finish(), iff.finish(), generic.finish()])
}

/// JSON number with 17 significant digits, `null` when not finite.
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl Serialize for SuiteConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SuiteConfig", 7)?;
        st.serialize_field("suite", self.suite.name())?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("nu", &Num(self.nu))?;
        st.serialize_field("samples", &self.samples)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("tol", &self.tol.map(Num))?;
        st.serialize_field("step", &Num(self.step))?;
        st.end()
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Witness", 2)?;
        st.serialize_field("sample", &self.sample)?;
        st.serialize_field("values", &self.values.iter().map(|&v| Num(v)).collect::<Vec<_>>())?;
        st.end()
    }
}

impl Serialize for Check {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Check", 4)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("passed", &self.passed)?;
        st.serialize_field("max_residual", &Num(self.max_residual))?;
        if let Some(w) = &self.witness {
            st.serialize_field("witness", w)?;
        } else {
            st.skip_field("witness")?;
        }
        st.end()
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Report", 5)?;
        st.serialize_field("suite", self.suite.name())?;
        st.serialize_field("params", &self.params)?;
        st.serialize_field("checks", &self.checks)?;
        st.serialize_field("passed", &self.passed)?;
        st.serialize_field("wall_time_ms", &self.wall_time_ms)?;
        st.end()
    }
}

pub fn report_json(r: &Report) -> String {
    to_pretty(r)
}

/// Writes the report to `path`, or to standard output for `None` or `-`.
pub fn emit_report(r: &Report, path: Option<&str>) -> Result<(), VerifyError> {
    write_text(&report_json(r), path)
}

/// Writes `text` to `path`, or to standard output for `None` or `-`.
pub fn write_text(text: &str, path: Option<&str>) -> Result<(), VerifyError> {
    match path {
        None | Some("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|source| VerifyError::Io {
            path: p.to_string(),
            source,
        }),
    }
}

pub const TRACE_HEADER: &str =
    "t,u1_re,u1_i,u1_j,u1_k,u2_re,u2_i,u2_j,u2_k,v1_re,v1_i,v1_j,v1_k,v2_re,v2_i,v2_j,v2_k";

/// Samples of the explicit lift at `t = 0, step, 2 step, …, ≤ t_max`.
pub fn trace_csv(n: i64, dir: &ClutchValue, t_max: f64, step: f64) -> Result<String, VerifyError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(VerifyError::Usage(format!("step must be positive, got {step}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(VerifyError::Usage(format!("t_max must be non-negative, got {t_max}")));
    }
    let rows = (t_max / step + 1e-9).floor() as usize;
    let mut out = String::with_capacity((rows + 2) * 400);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for k in 0..=rows {
        let t = k as f64 * step;
        let x = lift_gamma(n, dir, t);
        write!(out, "{t:.16e}").expect("string write");
        for c in x.to_array() {
            write!(out, ",{c:.16e}").expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn trace_geodesic(
    n: i64,
    dir: &ClutchValue,
    t_max: f64,
    step: f64,
    out_path: Option<&str>,
) -> Result<(), VerifyError> {
    write_text(&trace_csv(n, dir, t_max, step)?, out_path)
}

/// Parses a trace back into `(t, point)` rows.
pub fn parse_trace(n: i64, csv: &str) -> Result<Vec<(f64, BundlePoint)>, VerifyError> {
    let mut lines = csv.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(VerifyError::Usage("trace header mismatch".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| VerifyError::Usage(format!("bad number '{f}': {e}"))))
                .collect::<Result<_, _>>()?;
            if vals.len() != 17 {
                return Err(VerifyError::Usage(format!("expected 17 columns, got {}", vals.len())));
            }
            let mut a = [0.0; 16];
            a.copy_from_slice(&vals[1..]);
            Ok((vals[0], BundlePoint::from_array(n, &a)?))
        })
        .collect()
}

fn nums(values: &[f64]) -> Vec<Num> {
    values.iter().map(|&v| Num(v)).collect()
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializes");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct OrbitEqOutput {
    n: i64,
    equal: bool,
    q: Vec<Num>,
    residual: Num,
    tol: Num,
}

/// `⋆`-orbit equality of two points as JSON; the flag is the verdict.
pub fn orbit_eq_json(x: &BundlePoint, y: &BundlePoint, tol: f64) -> Result<(bool, String), VerifyError> {
    if x.n() != y.n() {
        return Err(VerifyError::Usage(format!("points have different n ({} and {})", x.n(), y.n())));
    }
    let equal = star_orbit_witness(x, y, tol)?.is_some();
    let w = star_orbit_residual(x, y);
    let out = OrbitEqOutput {
        n: x.n(),
        equal,
        q: nums(&w.q.to_array()),
        residual: Num(w.residual),
        tol: Num(tol),
    };
    Ok((equal, to_pretty(&out)))
}

#[derive(Serialize)]
struct NormalFormOutput {
    n: i64,
    s: Num,
    t: Num,
    residual: Num,
    degenerate: crate::bundle::DegenerateFlags,
    signs: [f64; 2],
    q1: Vec<Num>,
    q2: Vec<Num>,
    q3: Vec<Num>,
}

pub fn normal_form_json(x: &BundlePoint) -> String {
    let nf = normal_form(x);
    let w = nf.witness;
    to_pretty(&NormalFormOutput {
        n: x.n(),
        s: Num(nf.s),
        t: Num(nf.t),
        residual: Num(nf.residual),
        degenerate: nf.degenerate,
        signs: [w.signs[0].value(), w.signs[1].value()],
        q1: nums(&w.q1.to_array()),
        q2: nums(&w.q2.to_array()),
        q3: nums(&w.q3.to_array()),
    })
}

#[derive(Serialize)]
struct DegreeOutput {
    n: i64,
    y: Vec<Num>,
    degree: i64,
    passed: bool,
}

/// Signed preimage count of `y` under `ρ_n`; passes when it equals `n`.
pub fn degree_json(n: i64, y: QuatPair, jac_step: f64) -> Result<(bool, String), VerifyError> {
    let degree = degree_check(n, y, jac_step)?;
    let passed = degree == n;
    Ok((
        passed,
        to_pretty(&DegreeOutput {
            n,
            y: nums(&y.to_array()),
            degree,
            passed,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(suite: Suite) -> SuiteConfig {
        SuiteConfig {
            samples: 20,
            seed: 5,
            ..SuiteConfig::new(suite)
        }
    }

    #[test]
    fn registry_round_trips() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        let err = "bogus".parse::<Suite>().unwrap_err();
        assert!(err.to_string().contains("rho-oracle"));
    }

    #[test]
    fn every_suite_passes_with_defaults() {
        for s in Suite::ALL {
            let mut cfg = quick(s);
            if s == Suite::W7Fixed {
                cfg.n = 1;
            }
            let r = run_suite(&cfg).unwrap();
            assert!(r.passed, "{s}: {}", report_json(&r));
            assert!(!r.checks.is_empty());
            for c in &r.checks {
                assert!(c.max_residual <= cfg.tol.unwrap_or(f64::INFINITY) || c.passed);
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = quick(Suite::Clutching);
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.checks, b.checks);
        let strip = |r: &Report| Report { wall_time_ms: 0, ..r.clone() };
        assert_eq!(report_json(&strip(&a)), report_json(&strip(&b)));
    }

    #[test]
    fn tight_tolerance_fails_without_error() {
        let cfg = SuiteConfig {
            tol: Some(1e-30),
            ..quick(Suite::Horizontality)
        };
        let r = run_suite(&cfg).unwrap();
        assert!(!r.passed);
        assert!(r.checks.iter().any(|c| !c.passed && c.max_residual > 1e-30));
    }

    #[test]
    fn bad_configs_are_usage_errors() {
        let mut cfg = quick(Suite::MilnorIsotropy);
        cfg.n = 2;
        assert!(matches!(run_suite(&cfg), Err(VerifyError::Usage(_))));
        let cfg = SuiteConfig {
            nu: -1.0,
            ..quick(Suite::Horizontality)
        };
        assert!(matches!(run_suite(&cfg), Err(VerifyError::Usage(_))));
        let cfg = SuiteConfig {
            n: 0,
            ..quick(Suite::W7Fixed)
        };
        assert!(matches!(run_suite(&cfg), Err(VerifyError::Usage(_))));
    }

    #[test]
    fn json_layout() {
        let r = Report {
            suite: Suite::Parity,
            params: quick(Suite::Parity),
            checks: vec![Check {
                name: "a".into(),
                passed: true,
                max_residual: 0.1,
                witness: None,
            }],
            passed: true,
            wall_time_ms: 3,
        };
        let text = report_json(&r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let pos: Vec<usize> = ["\"suite\"", "\"params\"", "\"checks\"", "\"passed\": true,\n", "\"wall_time_ms\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("\"tol\": null"));
        assert!(v["checks"][0].get("witness").is_none());
    }

    #[test]
    fn empty_report_passes_vacuously() {
        let checks: Vec<Check> = Vec::new();
        assert!(checks.iter().all(|c| c.passed));
    }

    #[test]
    fn trace_rows() {
        let dir = ClutchValue::new(crate::algebra::ImaginaryQuaternion::new(0.0, 0.6, 0.0), Quaternion::new(0.8, 0.0, 0.0, 0.0)).unwrap();
        let csv = trace_csv(1, &dir, 0.0, 0.1).unwrap();
        let rows = parse_trace(1, &csv).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].1.to_array(), BundlePoint::identity(1).to_array());

        let csv = trace_csv(1, &dir, PI, PI / 100.0).unwrap();
        let rows = parse_trace(1, &csv).unwrap();
        assert_eq!(rows.len(), 101);
        let (t, last) = rows.last().unwrap();
        assert!((t - PI).abs() <= 1e-12);
        assert!(last.u().max_abs_diff(-QuatPair::E1) <= 1e-12);
        for (_, x) in &rows {
            assert!(x.residual() <= 1e-9);
        }
        assert!(trace_csv(1, &dir, 1.0, 0.0).is_err());
    }
}
