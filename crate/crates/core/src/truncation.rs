//! Ordered sub/supersolution pairs and the truncated fixed-point iteration
//! that traps a solution between them.
//!
//! Sub/supersolutions are checked classically at the nodes: the fields here
//! are trigonometric polynomials, so no viscosity test functions are needed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::resolvent_solve;
use crate::problem::ProblemSpec;
use crate::solver::{newton_solve, newton_system, residual, NewtonOptions, NodalSystem, Solution};
use crate::spectral::{PeriodicGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Sub,
    Super,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub side: Side,
    /// `+residual` for a subsolution, `-residual` for a supersolution.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub holds: bool,
}

/// Nodal sub/supersolution test. A subsolution satisfies
/// `(Δ)^s η + c η' + φ(x, η) ≥ 0`, a supersolution the reverse.
pub fn check_sub_super(field: &SpectralField, p: &ProblemSpec, side: Side, tol: f64) -> Result<MarginReport> {
    let r = residual(field, p)?;
    let sign = match side {
        Side::Sub => 1.0,
        Side::Super => -1.0,
    };
    let margins: Vec<f64> = r.values().iter().map(|v| sign * v).collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MarginReport {
        side,
        margins,
        min_margin,
        holds: min_margin >= -tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMargins {
    pub sub_min: f64,
    pub super_min: f64,
}

/// An ordered pair `η ≤ β` of a subsolution and a supersolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSuperPair {
    pub eta: SpectralField,
    pub beta_field: SpectralField,
    pub margins: PairMargins,
}

impl SubSuperPair {
    pub fn new(p: &ProblemSpec, eta: SpectralField, beta_field: SpectralField) -> Result<Self> {
        eta.check_grid(&beta_field)?;
        let excess = eta
            .values()
            .iter()
            .zip(beta_field.values())
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max);
        if excess > 0.0 {
            return Err(Error::InvalidPair { excess });
        }
        let sub = check_sub_super(&eta, p, Side::Sub, 0.0)?;
        let sup = check_sub_super(&beta_field, p, Side::Super, 0.0)?;
        Ok(Self {
            eta,
            beta_field,
            margins: PairMargins {
                sub_min: sub.min_margin,
                super_min: sup.min_margin,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub newton: NewtonOptions,
    pub max_picard: usize,
    /// Picard counts as stagnated when the update shrinks by less than this
    /// factor over a window of five iterations.
    pub stagnation_ratio: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            max_picard: 200,
            stagnation_ratio: 0.5,
        }
    }
}

/// Which solver produced the fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointRoute {
    Picard,
    NewtonFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub solution: Solution,
    pub route: FixedPointRoute,
    pub picard_iterations: usize,
}

fn clamp(u: &SpectralField, lo: &SpectralField, hi: &SpectralField) -> SpectralField {
    let v = u
        .values()
        .iter()
        .zip(lo.values().iter().zip(hi.values()))
        .map(|(&x, (&a, &b))| x.clamp(a, b))
        .collect();
    SpectralField::from_values(u.grid(), v).expect("finite")
}

/// The truncated equation `(Δ)^s u + c u' - u + T u + φ(x, T u) = 0`, with
/// `T` the nodal clamp onto `[η, β]`.
struct TruncatedSystem<'a> {
    p: &'a ProblemSpec,
    pair: &'a SubSuperPair,
}

impl TruncatedSystem<'_> {
    /// `-T u - φ(x, T u)`, the right-hand side of the resolvent iteration.
    fn rhs(&self, u: &SpectralField) -> SpectralField {
        let tu = clamp(u, &self.pair.eta, &self.pair.beta_field);
        let vals = tu
            .values()
            .iter()
            .enumerate()
            .map(|(j, &v)| -v - self.p.pointwise(j, v).0)
            .collect();
        SpectralField::from_values(u.grid(), vals).expect("finite truncated map")
    }
}

impl NodalSystem for TruncatedSystem<'_> {
    fn grid(&self) -> PeriodicGrid {
        self.p.grid()
    }

    fn residual(&self, u: &SpectralField) -> Result<SpectralField> {
        let lin = self.p.linear().apply(u);
        let rhs = self.rhs(u);
        let vals = lin
            .values()
            .iter()
            .zip(u.values())
            .zip(rhs.values())
            .map(|((l, x), r)| l - x - r)
            .collect();
        SpectralField::from_values(u.grid(), vals)
    }

    fn jacobian(&self, u: &SpectralField) -> Result<DMatrix<f64>> {
        let n = u.n();
        let mut m = DMatrix::from_row_slice(n, n, &self.p.linear().matrix(u.grid()));
        let (lo, hi) = (self.pair.eta.values(), self.pair.beta_field.values());
        for (j, &x) in u.values().iter().enumerate() {
            let inside = x > lo[j] && x < hi[j];
            let d = if inside { 1.0 + self.p.pointwise(j, x).1 } else { 0.0 };
            m[(j, j)] += d - 1.0;
        }
        Ok(m)
    }

    fn needs_positivity(&self) -> bool {
        false
    }

    fn t(&self) -> Option<f64> {
        self.p.t
    }
}

/// Resolvent iteration `u ← K(-T u - φ(x, T u))`, `K = ((Δ)^s + c d/dx - 1)^{-1}`,
/// started from `η`. If it stagnates, Newton on the truncated residual takes
/// over. The returned field lies in `[η - tol, β + tol]` and solves the
/// untruncated equation to `tol`.
pub fn truncated_fixed_point(p: &ProblemSpec, pair: &SubSuperPair, opts: &FixedPointOptions) -> Result<FixedPointResult> {
    p.h.check_grid(&pair.eta)?;
    let excess = pair
        .eta
        .values()
        .iter()
        .zip(pair.beta_field.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    if excess > 0.0 {
        return Err(Error::InvalidPair { excess });
    }
    let tol = opts.newton.tol;
    let sys = TruncatedSystem { p, pair };

    let mut u = pair.eta.clone();
    let mut updates: Vec<f64> = Vec::new();
    let mut route = FixedPointRoute::Picard;
    let mut picard_iterations = 0;
    loop {
        if sys.residual(&u)?.sup() <= tol {
            break;
        }
        let stagnated = updates.len() >= 5 && {
            let last = updates[updates.len() - 1];
            let earlier = updates[updates.len() - 5];
            last > opts.stagnation_ratio * earlier
        };
        if stagnated || picard_iterations >= opts.max_picard {
            route = FixedPointRoute::NewtonFallback;
            let start = clamp(&u, &pair.eta, &pair.beta_field);
            u = newton_system(&sys, &start, &opts.newton, &[])
                .map_err(|e| match e {
                    Error::MaxIterExceeded { residual, .. } => Error::NoConvergence { residual },
                    other => other,
                })?
                .u;
            break;
        }
        let next = resolvent_solve(&sys.rhs(&u), p.s, p.c, 1.0)?;
        updates.push(next.dist_sup(&u));
        u = next;
        picard_iterations += 1;
    }

    let below = pair
        .eta
        .values()
        .iter()
        .zip(u.values())
        .any(|(e, x)| *x < e - tol);
    let above = pair
        .beta_field
        .values()
        .iter()
        .zip(u.values())
        .any(|(b, x)| *x > b + tol);
    if below || above {
        return Err(Error::NoConvergence {
            residual: sys.residual(&u)?.sup(),
        });
    }

    // inside the box the truncation is inactive up to rounding; polish on
    // the untruncated equation
    let solution = match residual(&u, p) {
        Ok(r) if r.sup() <= tol => Solution::new(u, p.t, r.sup(), tol, picard_iterations),
        _ => newton_solve(&u, p, &opts.newton).map_err(|e| match e {
            Error::MaxIterExceeded { residual, .. } => Error::NoConvergence { residual },
            other => other,
        })?,
    };
    Ok(FixedPointResult {
        solution,
        route,
        picard_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ScalarFn;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(32).unwrap()
    }

    fn quadratic(t: f64) -> ProblemSpec {
        ProblemSpec::smooth(0.5, 1.0, t, SpectralField::zeros(grid()), ScalarFn::square(), true).unwrap()
    }

    #[test]
    fn margins() {
        let g = grid();
        let p = quadratic(1.0);
        let sub = check_sub_super(&SpectralField::constant(g, -2.0), &p, Side::Sub, 0.0).unwrap();
        assert!(sub.holds);
        assert!((sub.min_margin - 3.0).abs() < 1e-14);
        let sup = check_sub_super(&SpectralField::zeros(g), &p, Side::Super, 0.0).unwrap();
        assert!(sup.holds && (sup.min_margin - 1.0).abs() < 1e-14);
        let exact = SpectralField::constant(g, -1.0);
        for side in [Side::Sub, Side::Super] {
            let r = check_sub_super(&exact, &p, side, 1e-12).unwrap();
            assert!(r.holds && r.min_margin.abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_pair() {
        let g = grid();
        let p = quadratic(1.0);
        let pair = SubSuperPair::new(&p, SpectralField::constant(g, -2.0), SpectralField::zeros(g)).unwrap();
        let out = truncated_fixed_point(&p, &pair, &FixedPointOptions::default()).unwrap();
        let u = &out.solution.u;
        assert!(u.min() >= -2.0 - 1e-10 && u.max() <= 1e-10);
        assert!(out.solution.residual_sup <= 1e-9);
        assert!(u.dist_sup(&SpectralField::constant(g, -1.0)) < 1e-9);
    }

    #[test]
    fn mems_pair() {
        let g = grid();
        let t = 2.5;
        let p = ProblemSpec::singular_mems(0.5, 1.0, t, 2.0, SpectralField::constant(g, 1.0)).unwrap();
        let r_t = (1.0 / t).powf(0.5);
        let b0 = 2f64.powf(1.0 / 3.0);
        let pair = SubSuperPair::new(&p, SpectralField::constant(g, r_t), SpectralField::constant(g, b0)).unwrap();
        assert!(pair.margins.sub_min >= 0.0 && pair.margins.super_min >= 0.0);
        let out = truncated_fixed_point(&p, &pair, &FixedPointOptions::default()).unwrap();
        let u = out.solution.u.mean();
        assert!(u >= r_t && u <= b0);
        assert!((u + 1.0 / (u * u) - t).abs() < 1e-9);
    }

    #[test]
    fn nonconstant_forcing_pair() {
        let g = grid();
        let h = SpectralField::sample(g, |x| 0.3 * x.cos()).unwrap();
        let p = ProblemSpec::smooth(0.5, 1.0, 1.0, h, ScalarFn::square(), true).unwrap();
        // u ≡ 0 is a supersolution when t ≥ max(g(0) - h) = 0.3; η ≡ -3 a subsolution
        let pair = SubSuperPair::new(&p, SpectralField::constant(g, -3.0), SpectralField::zeros(g)).unwrap();
        let out = truncated_fixed_point(&p, &pair, &FixedPointOptions::default()).unwrap();
        assert!(out.solution.u.min() >= -3.0 - 1e-10 && out.solution.u.max() <= 1e-10);
        assert!(residual(&out.solution.u, &p).unwrap().sup() <= 1e-9);
    }

    #[test]
    fn invalid_pair() {
        let g = grid();
        let p = quadratic(1.0);
        assert!(matches!(
            SubSuperPair::new(&p, SpectralField::constant(g, 1.0), SpectralField::zeros(g)),
            Err(Error::InvalidPair { .. })
        ));
    }
}
