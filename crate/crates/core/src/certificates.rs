//! Closed-form constants and inequalities attached to each problem family,
//! evaluated against computed solutions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::operator::{apply_derivative, apply_fractional};
use crate::problem::{ProblemKind, ProblemSpec, ScalarFn};
use crate::solver::Solution;
use crate::spectral::{SpectralField, TWO_PI};

const SCAN_POINTS: usize = 4001;
const MAX_DOUBLINGS: usize = 60;

fn smooth_parts(p: &ProblemSpec) -> Result<(&ScalarFn, bool)> {
    match &p.kind {
        ProblemKind::Smooth { g, coercive } => Ok((g, *coercive)),
        _ => Err(Error::InvalidProblem("smooth family required".into())),
    }
}

fn linspace(a: f64, b: f64, m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |i| a + (b - a) * i as f64 / (m - 1) as f64)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Global minimum of a coercive `g`: the window doubles until both ends
/// exceed the sampled minimum by one, then golden-section refines.
fn coercive_min(g: &ScalarFn, window: f64) -> Result<(f64, f64, f64)> {
    let mut w = window.max(1e-3);
    for _ in 0..MAX_DOUBLINGS {
        let zs: Vec<f64> = linspace(-w, w, SCAN_POINTS).collect();
        let vals: Vec<f64> = zs.iter().map(|&z| g.eval(z)).collect();
        let (imin, &vmin) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty scan");
        let ends_ok = vals[0] >= vmin + 1.0 && vals[SCAN_POINTS - 1] >= vmin + 1.0;
        if ends_ok && imin > 0 && imin < SCAN_POINTS - 1 {
            let z = golden_min(|z| g.eval(z), zs[imin - 1], zs[imin + 1], 1e-10);
            let gz = g.eval(z).min(vmin);
            return Ok((z, gz, w));
        }
        w *= 2.0;
    }
    Err(Error::WindowGrowthExceeded)
}

/// `θ = min_{x, z} (g(z) - h(x))`.
pub fn theta_smooth(p: &ProblemSpec, z_window_init: f64) -> Result<f64> {
    let (g, _) = smooth_parts(p)?;
    let (_, gmin, _) = coercive_min(g, z_window_init)?;
    Ok(gmin - p.h.max())
}

/// `t* = max_x (g(0) - h(x))`; `u ≡ 0` is a supersolution for `t ≥ t*`.
pub fn t_star_smooth(p: &ProblemSpec) -> Result<f64> {
    let (g, _) = smooth_parts(p)?;
    Ok(g.eval(0.0) - p.h.min())
}

/// Smallest `R` with `g(z) > t2 + max h` for all `|z| ≥ R`, to within 1e-6.
pub fn coercive_radius(p: &ProblemSpec, t2: f64) -> Result<f64> {
    let (g, _) = smooth_parts(p)?;
    let level = t2 + p.h.max();
    let (_, _, mut w) = coercive_min(g, 1.0)?;
    let mut grown = 0;
    while !(g.eval(w) > level && g.eval(-w) > level && g.eval(2.0 * w) > level && g.eval(-2.0 * w) > level) {
        w *= 2.0;
        grown += 1;
        if grown > MAX_DOUBLINGS {
            return Err(Error::WindowGrowthExceeded);
        }
    }
    let zs: Vec<f64> = linspace(0.0, w, SCAN_POINTS).collect();
    let mut radius: f64 = 0.0;
    for sign in [1.0, -1.0] {
        // outermost sampled point still at or below the level
        let Some(i) = (0..SCAN_POINTS).rev().find(|&i| g.eval(sign * zs[i]) <= level) else {
            continue;
        };
        if i == SCAN_POINTS - 1 {
            return Err(Error::WindowGrowthExceeded);
        }
        let (mut lo, mut hi) = (zs[i], zs[i + 1]);
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            if g.eval(sign * mid) <= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        radius = radius.max(hi);
    }
    Ok(radius)
}

/// `M = R + sqrt(2π) ||h||_{L^2} / c`, the sup bound with the drift constant `1/c`.
pub fn sup_bound_m(p: &ProblemSpec, t2: f64) -> Result<f64> {
    if !(p.c > 0.0) {
        return Err(Error::DriftRequired);
    }
    Ok(coercive_radius(p, t2)? + TWO_PI.sqrt() * p.h.l2() / p.c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularConstants {
    pub theta: f64,
    pub t_star: f64,
    pub r_t: Option<f64>,
}

/// `θ = (μ β_min)^{1/(μ+1)}`, `t* = (μ+1)(β_max/μ^μ)^{1/(μ+1)}`, `r_t = (β_min/t)^{1/μ}`.
pub fn singular_constants(mu: f64, beta: &SpectralField, t: Option<f64>) -> Result<SingularConstants> {
    let (bmin, bmax) = (beta.min(), beta.max());
    if !(bmin > 0.0) {
        return Err(Error::InvalidBeta(bmin));
    }
    let theta = (mu * bmin).powf(1.0 / (mu + 1.0));
    let t_star = (mu + 1.0) * (bmax / mu.powf(mu)).powf(1.0 / (mu + 1.0));
    let r_t = match t {
        Some(t) if t > 0.0 => Some((bmin / t).powf(1.0 / mu)),
        Some(t) => return Err(Error::InvalidProblem(format!("r_t needs t > 0, got {t}"))),
        None => None,
    };
    Ok(SingularConstants { theta, t_star, r_t })
}

/// Nodal means of a field and of its positive and negative parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedMeans {
    pub mean: f64,
    pub plus: f64,
    pub minus: f64,
}

impl SignedMeans {
    pub fn of(f: &SpectralField) -> Self {
        let n = f.n() as f64;
        let plus = f.values().iter().map(|v| v.max(0.0)).sum::<f64>() / n;
        let minus = f.values().iter().map(|v| (-v).max(0.0)).sum::<f64>() / n;
        Self {
            mean: f.mean(),
            plus,
            minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArConstants {
    pub a0: f64,
    pub a1: f64,
    pub m1: f64,
    pub m2: f64,
    /// `M1 == M2`: the averaged nonlinearity has a single sign change.
    pub degenerate: bool,
    pub r0: f64,
    pub big_r0: f64,
    pub gamma: SignedMeans,
    pub beta: SignedMeans,
    pub e: SignedMeans,
}

pub(crate) struct ArData<'a> {
    pub mu: f64,
    pub rho: f64,
    pub gamma: &'a SpectralField,
    pub beta: &'a SpectralField,
    pub e: &'a SpectralField,
}

pub(crate) fn ar_parts(p: &ProblemSpec) -> Result<ArData<'_>> {
    match &p.kind {
        ProblemKind::AttractiveRepulsive {
            mu,
            rho,
            gamma,
            beta,
            e,
        } => Ok(ArData {
            mu: *mu,
            rho: *rho,
            gamma,
            beta,
            e,
        }),
        _ => Err(Error::InvalidProblem("attractive-repulsive family required".into())),
    }
}

/// The averaged nonlinearity `φ(x) = γ̄/x^μ - β̄/x^ρ - ē`.
pub fn averaged_phi(p: &ProblemSpec) -> Result<impl Fn(f64) -> f64> {
    let d = ar_parts(p)?;
    let (g, b, e) = (d.gamma.mean(), d.beta.mean(), d.e.mean());
    let (mu, rho) = (d.mu, d.rho);
    Ok(move |x: f64| g / x.powf(mu) - b / x.powf(rho) - e)
}

pub(crate) fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Sign changes of `φ` on a log grid over `[1e-6, 1e6]`, each refined by bisection.
pub(crate) fn phi_roots(phi: &impl Fn(f64) -> f64) -> Vec<f64> {
    let m = 2401;
    let xs: Vec<f64> = (0..m).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / (m - 1) as f64)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let mut roots = Vec::new();
    for i in 0..m - 1 {
        if vals[i] == 0.0 {
            roots.push(xs[i]);
        } else if vals[i] * vals[i + 1] < 0.0 {
            roots.push(bisect(phi, xs[i], xs[i + 1]));
        }
    }
    roots
}

/// `A0`, `A1` nodal bounds and the root bracket `M1 ≤ M2` of the averaged
/// nonlinearity. `run_bounds = (r, R)` are solution bounds from a run,
/// merged into `r0 = min(M1, r)` and `R0 = max(M2, R)`.
///
/// When `μ = ρ` the `β̄₊` term of `A1` has no finite exponent and is omitted.
pub fn ar_constants(p: &ProblemSpec, run_bounds: Option<(f64, f64)>) -> Result<ArConstants> {
    let d = ar_parts(p)?;
    let gamma = SignedMeans::of(d.gamma);
    let beta = SignedMeans::of(d.beta);
    let e = SignedMeans::of(d.e);
    if !(gamma.mean > 0.0 && e.mean > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "need mean(gamma) > 0 and mean(e) > 0 (got {}, {})",
            gamma.mean, e.mean
        )));
    }
    let (mu, rho) = (d.mu, d.rho);
    let a0 = f64::max(1.0, ((gamma.plus + beta.minus) / e.mean).powf(1.0 / rho));
    let a1 = if beta.plus > 0.0 {
        let first = (gamma.mean / (2.0 * e.plus)).powf(1.0 / mu);
        if mu > rho {
            first.min((gamma.mean / (2.0 * beta.plus)).powf(1.0 / (mu - rho)))
        } else {
            first
        }
    } else {
        (gamma.mean / e.plus).powf(1.0 / mu)
    };
    let phi = averaged_phi(p)?;
    let roots = phi_roots(&phi);
    let (Some(&m1), Some(&m2)) = (roots.first(), roots.last()) else {
        return Err(Error::RootBracketFailed);
    };
    let (r0, big_r0) = match run_bounds {
        Some((r, big_r)) => (m1.min(r), m2.max(big_r)),
        None => (m1, m2),
    };
    Ok(ArConstants {
        a0,
        a1,
        m1,
        m2,
        degenerate: roots.len() == 1,
        r0,
        big_r0,
        gamma,
        beta,
        e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trend {
    PlusInfinity,
    Finite(f64),
    MinusInfinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimProbe {
    pub samples: Vec<(f64, f64)>,
    pub trend: Trend,
}

impl LimProbe {
    /// The condition asks for `+∞` as `x → 0+`.
    pub fn satisfied(&self) -> bool {
        self.trend == Trend::PlusInfinity
    }
}

/// Samples `cx/2 - 2π γ̄₋/x^μ - 2π β̄₊/x^ρ` on `[1e-8, 1e2]` and classifies
/// its behaviour as `x → 0+`. Advisory only.
pub fn lim_condition_probe(p: &ProblemSpec) -> Result<LimProbe> {
    let d = ar_parts(p)?;
    let gm = SignedMeans::of(d.gamma).minus;
    let bp = SignedMeans::of(d.beta).plus;
    let c = p.c;
    let f = |x: f64| c * x / 2.0 - TWO_PI * gm / x.powf(d.mu) - TWO_PI * bp / x.powf(d.rho);
    let samples: Vec<(f64, f64)> = (0..=100)
        .map(|i| {
            let x = 10f64.powf(-8.0 + 10.0 * i as f64 / 100.0);
            (x, f(x))
        })
        .collect();
    let (v0, v1) = (samples[0].1, samples[10].1);
    let trend = if v0 < -1e3 && v0 < v1 {
        Trend::MinusInfinity
    } else if v0 > 1e3 && v0 > v1 {
        Trend::PlusInfinity
    } else {
        Trend::Finite(v0)
    };
    Ok(LimProbe { samples, trend })
}

/// Residuals of the integral identities a solution must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `|mean φ(x, u)|`, the averaged equation.
    pub mean_value: f64,
    /// `|c ||u'||^2 + <ψ, u'>|` with ψ the x-dependent coupling (`c > 0`).
    pub drift_energy: Option<f64>,
    /// `|mean (Δ)^s u|`.
    pub fractional_mean: f64,
    /// `|<(Δ)^s u, u'>|`.
    pub fractional_drift: f64,
    /// `max(0, [v]^2_{H^s} - 2π (t - θ) sup|v|)` with `v = u - ū` (smooth, `c = 0`).
    pub zero_mean_slack: Option<f64>,
}

impl IdentityResiduals {
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("mean_value".into(), self.mean_value);
        m.insert("fractional_mean".into(), self.fractional_mean);
        m.insert("fractional_drift".into(), self.fractional_drift);
        if let Some(v) = self.drift_energy {
            m.insert("drift_energy".into(), v);
        }
        if let Some(v) = self.zero_mean_slack {
            m.insert("zero_mean_slack".into(), v);
        }
        m
    }
}

pub fn verify_identities(sol: &Solution, p: &ProblemSpec) -> Result<IdentityResiduals> {
    let u = &sol.u;
    p.h.check_grid(u)?;
    let n = u.n();
    let pt = p.with_t(sol.t.unwrap_or(p.t_or_zero()));
    let p = if p.t.is_some() { &pt } else { p };
    let phi: Vec<f64> = u.values().iter().enumerate().map(|(j, &x)| p.pointwise(j, x).0).collect();
    let mean_value = (phi.iter().sum::<f64>() / n as f64).abs();

    let du = apply_derivative(u);
    let frac = apply_fractional(u, p.s)?;
    let fractional_mean = frac.mean().abs();
    let fractional_drift = frac.inner(&du).abs();

    let drift_energy = if p.c > 0.0 {
        let psi = SpectralField::from_values(
            u.grid(),
            u.values().iter().enumerate().map(|(j, &x)| p.drift_coupling(j, x)).collect(),
        )?;
        Some((p.c * u.l2_deriv().powi(2) + psi.inner(&du)).abs())
    } else {
        None
    };

    let zero_mean_slack = match (&p.kind, p.c == 0.0) {
        (ProblemKind::Smooth { .. }, true) => {
            let theta = theta_smooth(p, 1.0)?;
            let t = p.t_or_zero();
            let v = u.shifted(-u.mean());
            let lhs = v.hs_seminorm(p.s)?.powi(2);
            Some((lhs - TWO_PI * (t - theta) * v.sup()).max(0.0))
        }
        _ => None,
    };

    Ok(IdentityResiduals {
        mean_value,
        drift_energy,
        fractional_mean,
        fractional_drift,
        zero_mean_slack,
    })
}

/// All constants attached to a problem, plus any numerically located fold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CertificateReport {
    pub family: String,
    pub theta: Option<f64>,
    pub t_star: Option<f64>,
    pub t1_numeric: Option<f64>,
    pub t2: Option<f64>,
    pub coercive_radius: Option<f64>,
    pub m_sup_bound: Option<f64>,
    /// Constant in the drift energy bound, `1/c`.
    pub drift_constant: Option<f64>,
    pub r_t: Option<f64>,
    pub a0: Option<f64>,
    pub a1: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub r0: Option<f64>,
    pub big_r0: Option<f64>,
    pub identity_residuals: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub extra: BTreeMap<String, f64>,
}

/// Width of the window in which a located fold may sit below `θ`.
pub const FOLD_TOLERANCE: f64 = 1e-6;

impl CertificateReport {
    /// Records the located fold and checks `θ ≤ t1`.
    pub fn set_fold(&mut self, t1: f64) {
        self.t1_numeric = Some(t1);
        if let Some(theta) = self.theta {
            self.flags.insert("theta_le_t1".into(), theta <= t1 + FOLD_TOLERANCE);
        }
    }

    /// `true` when `t < θ`, i.e. no periodic solution exists.
    pub fn infeasible(&self, t: f64) -> bool {
        matches!(self.theta, Some(theta) if t < theta)
    }

    /// Flat `key=value` text, keys in a fixed order, numbers with 17
    /// significant digits.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let num = |v: f64| format!("{v:.16e}");
        let _ = writeln!(out, "family={}", self.family);
        let scalars = [
            ("theta", self.theta),
            ("t_star", self.t_star),
            ("t1_numeric", self.t1_numeric),
            ("t2", self.t2),
            ("coercive_radius", self.coercive_radius),
            ("M_sup_bound", self.m_sup_bound),
            ("drift_constant", self.drift_constant),
            ("r_t", self.r_t),
            ("A0", self.a0),
            ("A1", self.a1),
            ("M1", self.m1),
            ("M2", self.m2),
            ("r0", self.r0),
            ("R0", self.big_r0),
        ];
        for (k, v) in scalars {
            if let Some(v) = v {
                let _ = writeln!(out, "{k}={}", num(v));
            }
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "{k}={}", num(*v));
        }
        for (k, v) in &self.identity_residuals {
            let _ = writeln!(out, "residual.{k}={}", num(*v));
        }
        for (k, v) in &self.flags {
            let _ = writeln!(out, "flag.{k}={}", if *v { "pass" } else { "fail" });
        }
        out
    }
}

/// Evaluates every constant available for the problem's family. `t2` is the
/// upper parameter used by the smooth sup bound (defaults to `t`).
pub fn certify(p: &ProblemSpec, t2: Option<f64>) -> Result<CertificateReport> {
    let mut r = CertificateReport::default();
    match &p.kind {
        ProblemKind::Smooth { coercive, .. } => {
            r.family = "smooth".into();
            r.t_star = Some(t_star_smooth(p)?);
            if *coercive {
                r.theta = Some(theta_smooth(p, 1.0)?);
                let t2 = t2.unwrap_or(p.t_or_zero());
                r.t2 = Some(t2);
                r.coercive_radius = Some(coercive_radius(p, t2)?);
                if p.c > 0.0 {
                    r.m_sup_bound = Some(sup_bound_m(p, t2)?);
                    r.drift_constant = Some(1.0 / p.c);
                }
            }
        }
        ProblemKind::SingularMems { mu, beta } => {
            r.family = "singular_mems".into();
            let t = p.t.filter(|&t| t > 0.0);
            let k = singular_constants(*mu, beta, t)?;
            r.theta = Some(k.theta);
            r.t_star = Some(k.t_star);
            r.r_t = k.r_t;
            if p.c > 0.0 {
                r.drift_constant = Some(1.0 / p.c);
            }
        }
        ProblemKind::AttractiveRepulsive { .. } => {
            r.family = "attractive_repulsive".into();
            let k = ar_constants(p, None)?;
            r.a0 = Some(k.a0);
            r.a1 = Some(k.a1);
            r.m1 = Some(k.m1);
            r.m2 = Some(k.m2);
            r.r0 = Some(k.r0);
            r.big_r0 = Some(k.big_r0);
            r.flags.insert("bracket_degenerate".into(), k.degenerate);
            let probe = lim_condition_probe(p)?;
            r.flags.insert("lim_condition".into(), probe.satisfied());
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundFlag {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    /// Distance to the bound in the direction that makes it pass.
    pub slack: f64,
    pub pass: bool,
}

/// Checks the a-priori bounds of the solution's family.
pub fn verify_bounds(sol: &Solution, report: &CertificateReport, p: &ProblemSpec) -> Result<Vec<BoundFlag>> {
    let u = &sol.u;
    let mut flags = Vec::new();
    let mut push = |name, value: f64, bound: f64, below: bool, strict: bool| {
        let slack = if below { bound - value } else { value - bound };
        let pass = if strict { slack > 0.0 } else { slack >= 0.0 };
        flags.push(BoundFlag {
            name,
            value,
            bound,
            slack,
            pass,
        });
    };
    match &p.kind {
        ProblemKind::Smooth { .. } => {
            if p.c > 0.0 {
                let m = report.m_sup_bound.ok_or(Error::MissingCertificate("M_sup_bound"))?;
                push("sup_below_M", u.sup(), m, true, true);
            }
        }
        ProblemKind::SingularMems { beta, .. } => {
            let t = sol.t.or(p.t).ok_or(Error::MissingCertificate("t"))?;
            let bmin = beta.min();
            let mu = match p.kind {
                ProblemKind::SingularMems { mu, .. } => mu,
                _ => unreachable!(),
            };
            // r_t depends on t; the report value is used when it matches
            let r_t = report.r_t.ok_or(Error::MissingCertificate("r_t"))?;
            let r_t = if p.t == sol.t { r_t } else { (bmin / t).powf(1.0 / mu) };
            push("min_above_r_t", u.min(), r_t, false, true);
            if p.c > 0.0 {
                let bound = (beta.l2() + t * TWO_PI.sqrt()) / p.c;
                push("deriv_l2_bound", u.l2_deriv(), bound, true, false);
            }
        }
        ProblemKind::AttractiveRepulsive { .. } => {
            let a0 = report.a0.ok_or(Error::MissingCertificate("A0"))?;
            let a1 = report.a1.ok_or(Error::MissingCertificate("A1"))?;
            push("min_below_A0", u.min(), a0, true, false);
            push("max_above_A1", u.max(), a1, false, false);
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ScalarFn;
    use crate::spectral::PeriodicGrid;
    use std::f64::consts::PI;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(32).unwrap()
    }

    fn smooth(g: ScalarFn, h: SpectralField, c: f64, coercive: bool) -> ProblemSpec {
        ProblemSpec::smooth(0.5, c, 0.0, h, g, coercive).unwrap()
    }

    fn cosh() -> SpectralField {
        SpectralField::sample(grid(), f64::cos).unwrap()
    }

    #[test]
    fn theta_values() {
        let zero = SpectralField::zeros(grid());
        assert!(theta_smooth(&smooth(ScalarFn::square(), zero, 1.0, true), 1.0).unwrap().abs() < 1e-12);
        let th = theta_smooth(&smooth(ScalarFn::square(), cosh(), 1.0, true), 1.0).unwrap();
        assert!((th + 1.0).abs() < 1e-12);
        let shifted = ScalarFn::from_expr("(u - 3.7)^2 + 0.25").unwrap();
        let th = theta_smooth(&smooth(shifted, SpectralField::zeros(grid()), 1.0, true), 0.5).unwrap();
        assert!((th - 0.25).abs() < 1e-12);
        assert!(matches!(
            theta_smooth(&smooth(ScalarFn::identity(), cosh(), 1.0, false), 1.0),
            Err(Error::WindowGrowthExceeded)
        ));
    }

    #[test]
    fn t_star_values() {
        let zero = SpectralField::zeros(grid());
        assert_eq!(t_star_smooth(&smooth(ScalarFn::square(), zero.clone(), 1.0, true)).unwrap(), 0.0);
        assert!((t_star_smooth(&smooth(ScalarFn::square(), cosh(), 1.0, true)).unwrap() - 1.0).abs() < 1e-15);
        let g3 = ScalarFn::from_expr("u^2 + 3").unwrap();
        assert_eq!(t_star_smooth(&smooth(g3, zero, 1.0, true)).unwrap(), 3.0);
    }

    #[test]
    fn radius_and_m() {
        let zero = SpectralField::zeros(grid());
        let p = smooth(ScalarFn::square(), zero.clone(), 1.0, true);
        let r = coercive_radius(&p, 4.0).unwrap();
        assert!(r >= 2.0 && r - 2.0 <= 1e-6, "{r}");
        let q = smooth(ScalarFn::square(), cosh(), 1.0, true);
        let r = coercive_radius(&q, 0.0).unwrap();
        assert!(r >= 1.0 && r - 1.0 <= 1e-6);
        assert_eq!(coercive_radius(&p, -1.0).unwrap(), 0.0);

        let m = sup_bound_m(&p, 4.0).unwrap();
        assert!((m - 2.0).abs() <= 1e-6);
        let m = sup_bound_m(&q, 1.0).unwrap();
        let want = 2f64.sqrt() + (2.0 * PI).sqrt() * PI.sqrt();
        assert!((m - want).abs() <= 1e-6);
        let p0 = smooth(ScalarFn::square(), zero, 0.0, true);
        assert!(matches!(sup_bound_m(&p0, 1.0), Err(Error::DriftRequired)));
    }

    #[test]
    fn singular_values() {
        let one = SpectralField::constant(grid(), 1.0);
        let k = singular_constants(2.0, &one, Some(4.0)).unwrap();
        assert!((k.theta - 2f64.cbrt()).abs() < 1e-15);
        assert!((k.theta - 1.259921).abs() < 1e-6);
        assert!((k.t_star - 3.0 * 4f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!((k.t_star - 1.889882).abs() < 1e-6);
        assert_eq!(k.r_t, Some(0.5));
        let k = singular_constants(1.0, &one, None).unwrap();
        assert_eq!((k.theta, k.t_star, k.r_t), (1.0, 2.0, None));
        assert!(matches!(
            singular_constants(2.0, &SpectralField::zeros(grid()), None),
            Err(Error::InvalidBeta(_))
        ));
    }

    fn ar(gamma: f64, beta: f64, e: SpectralField, mu: f64, rho: f64) -> ProblemSpec {
        let g = grid();
        ProblemSpec::attractive_repulsive(
            0.5,
            1.0,
            mu,
            rho,
            SpectralField::constant(g, gamma),
            SpectralField::constant(g, beta),
            e,
        )
        .unwrap()
    }

    #[test]
    fn ar_values() {
        let one = SpectralField::constant(grid(), 1.0);
        let k = ar_constants(&ar(1.0, -0.2, one.clone(), 2.0, 1.0), None).unwrap();
        assert!((k.a0 - 1.2).abs() < 1e-14);
        assert!((k.a1 - 1.0).abs() < 1e-14);
        let root = (0.2 + 4.04f64.sqrt()) / 2.0;
        assert!((k.m1 - root).abs() < 1e-12);

        let k = ar_constants(&ar(1.0, 0.0, one.clone(), 2.0, 1.0), None).unwrap();
        assert!(k.degenerate);
        assert!((k.m1 - 1.0).abs() < 1e-12 && (k.m2 - 1.0).abs() < 1e-12);

        let zero_e = SpectralField::zeros(grid());
        assert!(matches!(
            ar_constants(&ar(1.0, 0.0, zero_e, 2.0, 1.0), None),
            Err(Error::InvalidProblem(_))
        ));

        // positive beta: two-case A1 and two distinct roots of
        // 1/x^2 - 0.2/x - 1 + ... here phi = 1/x^2 - 0.1/x - 1
        let k = ar_constants(&ar(1.0, 0.1, one, 2.0, 1.0), Some((0.5, 3.0))).unwrap();
        let a1_want = f64::min((1.0f64 / 2.0).sqrt(), 1.0 / (2.0 * 0.1));
        assert!((k.a1 - a1_want).abs() < 1e-14);
        assert_eq!((k.r0, k.big_r0), (0.5, 3.0));
    }

    #[test]
    fn lim_probe_trends() {
        let one = SpectralField::constant(grid(), 1.0);
        let p = ar(1.0, 0.0, one.clone(), 2.0, 1.0);
        assert!(matches!(lim_condition_probe(&p).unwrap().trend, Trend::Finite(v) if v.abs() < 1e-6));
        let p = ar(1.0, 0.3, one.clone(), 2.0, 1.0);
        assert_eq!(lim_condition_probe(&p).unwrap().trend, Trend::MinusInfinity);
        let g = grid();
        let p = ProblemSpec::attractive_repulsive(
            0.5,
            1.0,
            2.0,
            1.0,
            SpectralField::constant(g, -1.0),
            SpectralField::zeros(g),
            one,
        )
        .unwrap();
        let probe = lim_condition_probe(&p).unwrap();
        assert_eq!(probe.trend, Trend::MinusInfinity);
        assert!(!probe.satisfied());
    }

    #[test]
    fn identities_detect_perturbation() {
        let g = grid();
        let p = ProblemSpec::smooth(0.5, 1.0, 0.25, SpectralField::zeros(g), ScalarFn::square(), true).unwrap();
        let exact = Solution::new(SpectralField::constant(g, 0.5), Some(0.25), 0.0, 1e-10, 0);
        let r = verify_identities(&exact, &p).unwrap();
        assert!(r.mean_value <= 1e-13 && r.fractional_mean <= 1e-13 && r.fractional_drift <= 1e-13);
        assert!(r.drift_energy.unwrap() <= 1e-13);
        let bad = Solution::new(SpectralField::constant(g, 0.51), Some(0.25), 0.0, 1e-10, 0);
        let r = verify_identities(&bad, &p).unwrap();
        // first order: 0.01 * g'(0.5) = 0.01
        assert!((r.mean_value - 0.0101).abs() < 1e-12);

        let lin = ProblemSpec::smooth(0.5, 1.0, 2.0, cosh(), ScalarFn::identity(), false).unwrap();
        let u = SpectralField::sample(g, |x| 2.0 + x.sin()).unwrap();
        let r = verify_identities(&Solution::new(u, Some(2.0), 0.0, 1e-10, 0), &lin).unwrap();
        assert!(r.drift_energy.unwrap() <= 1e-12);
    }

    #[test]
    fn bounds_examples() {
        let g = grid();
        let p = ProblemSpec::smooth(0.5, 1.0, 0.25, SpectralField::zeros(g), ScalarFn::square(), true).unwrap();
        let rep = certify(&p, Some(4.0)).unwrap();
        let sol = Solution::new(SpectralField::constant(g, 0.5), Some(0.25), 0.0, 1e-10, 0);
        let flags = verify_bounds(&sol, &rep, &p).unwrap();
        assert!(flags.iter().all(|f| f.pass));
        assert!((flags[0].bound - 2.0).abs() < 1e-6);

        let m = ProblemSpec::singular_mems(0.5, 1.0, 2.0, 2.0, SpectralField::constant(g, 1.0)).unwrap();
        let rep = certify(&m, None).unwrap();
        assert!((rep.r_t.unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let sol = Solution::new(SpectralField::constant(g, 1.0), Some(2.0), 0.0, 1e-10, 0);
        assert!(verify_bounds(&sol, &rep, &m).unwrap().iter().all(|f| f.pass));

        let empty = CertificateReport::default();
        assert!(matches!(verify_bounds(&sol, &empty, &m), Err(Error::MissingCertificate(_))));
    }

    #[test]
    fn report_kv_is_stable() {
        let g = grid();
        let p = ProblemSpec::smooth(0.5, 1.0, 0.25, SpectralField::zeros(g), ScalarFn::square(), true).unwrap();
        let mut rep = certify(&p, Some(4.0)).unwrap();
        rep.set_fold(0.0);
        let text = rep.to_kv();
        assert!(text.starts_with("family=smooth\n"));
        assert!(text.contains("theta=0.0000000000000000e0\n"));
        assert!(text.contains("flag.theta_le_t1=pass"));
        assert_eq!(text, certify(&p, Some(4.0)).map(|mut r| { r.set_fold(0.0); r.to_kv() }).unwrap());
        assert!(rep.infeasible(-0.5) && !rep.infeasible(0.1));
    }
}
