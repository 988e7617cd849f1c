//! Problem families and their pointwise nonlinearities.
//!
//! Every equation has the form `(Δ)^s u + c u' + φ(x, u) = 0`:
//!
//! * smooth:               `φ = g(u) - t - h(x)`
//! * singular (MEMS type): `φ = u + β(x)/u^μ - t`
//! * attractive-repulsive: `φ = e(x) - γ(x)/u^μ + β(x)/u^ρ`

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::operator::LinearPart;
use crate::spectral::{check_order, PeriodicGrid, SpectralField};

/// A scalar nonlinearity `g` together with its derivative.
#[derive(Clone)]
pub struct ScalarFn {
    label: String,
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
        }
    }

    /// Builds `g(u)` from an expression in `u`; the derivative is symbolic.
    pub fn from_expr(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        if e.depends_on(Var::X) {
            return Err(Error::Expr(format!("g must depend on u only: '{src}'")));
        }
        let d = e.derivative(Var::U);
        Ok(Self::new(src, move |u| e.eval(0.0, u), move |u| d.eval(0.0, u)))
    }

    pub fn square() -> Self {
        Self::new("u^2", |u| u * u, |u| 2.0 * u)
    }

    pub fn identity() -> Self {
        Self::new("u", |u| u, |_| 1.0)
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.value)(u)
    }

    pub fn deriv(&self, u: f64) -> f64 {
        (self.deriv)(u)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub enum ProblemKind {
    Smooth {
        g: ScalarFn,
        /// Whether `g(u) → +∞` as `|u| → ∞`.
        coercive: bool,
    },
    SingularMems {
        mu: f64,
        beta: SpectralField,
    },
    AttractiveRepulsive {
        mu: f64,
        rho: f64,
        gamma: SpectralField,
        beta: SpectralField,
        e: SpectralField,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Smooth,
    SingularMems,
    AttractiveRepulsive,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub s: f64,
    pub c: f64,
    /// Bifurcation parameter; absent for the attractive-repulsive family.
    pub t: Option<f64>,
    /// Forcing; identically zero for the singular families.
    pub h: SpectralField,
    pub kind: ProblemKind,
}

impl ProblemSpec {
    pub fn smooth(s: f64, c: f64, t: f64, h: SpectralField, g: ScalarFn, coercive: bool) -> Result<Self> {
        let p = Self {
            s,
            c,
            t: Some(t),
            h,
            kind: ProblemKind::Smooth { g, coercive },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn singular_mems(s: f64, c: f64, t: f64, mu: f64, beta: SpectralField) -> Result<Self> {
        let grid = beta.grid();
        let p = Self {
            s,
            c,
            t: Some(t),
            h: SpectralField::zeros(grid),
            kind: ProblemKind::SingularMems { mu, beta },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn attractive_repulsive(
        s: f64,
        c: f64,
        mu: f64,
        rho: f64,
        gamma: SpectralField,
        beta: SpectralField,
        e: SpectralField,
    ) -> Result<Self> {
        let grid = gamma.grid();
        let p = Self {
            s,
            c,
            t: None,
            h: SpectralField::zeros(grid),
            kind: ProblemKind::AttractiveRepulsive {
                mu,
                rho,
                gamma,
                beta,
                e,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.s)?;
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidProblem(format!("drift c = {} must be >= 0", self.c)));
        }
        let grid = self.h.grid();
        match &self.kind {
            ProblemKind::Smooth { .. } => {
                if self.t.is_none() {
                    return Err(Error::InvalidProblem("smooth family needs t".into()));
                }
            }
            ProblemKind::SingularMems { mu, beta } => {
                if self.t.is_none() {
                    return Err(Error::InvalidProblem("singular family needs t".into()));
                }
                if !(*mu >= 1.0) {
                    return Err(Error::InvalidProblem(format!("mu = {mu} must be >= 1")));
                }
                self.h.check_grid(beta)?;
                if !(beta.min() > 0.0) {
                    return Err(Error::InvalidBeta(beta.min()));
                }
            }
            ProblemKind::AttractiveRepulsive {
                mu,
                rho,
                gamma,
                beta,
                e,
            } => {
                if !(*rho > 0.0 && mu >= rho && *mu >= 1.0) {
                    return Err(Error::InvalidProblem(format!(
                        "need mu >= rho > 0 and mu >= 1 (mu = {mu}, rho = {rho})"
                    )));
                }
                for f in [gamma, beta, e] {
                    if f.grid() != grid {
                        return Err(Error::GridMismatch {
                            field: f.n(),
                            expected: grid.n(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        match self.kind {
            ProblemKind::Smooth { .. } => Family::Smooth,
            ProblemKind::SingularMems { .. } => Family::SingularMems,
            ProblemKind::AttractiveRepulsive { .. } => Family::AttractiveRepulsive,
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.h.grid()
    }

    pub fn linear(&self) -> LinearPart {
        LinearPart { s: self.s, c: self.c }
    }

    pub fn is_singular(&self) -> bool {
        !matches!(self.kind, ProblemKind::Smooth { .. })
    }

    pub fn with_t(&self, t: f64) -> Self {
        let mut p = self.clone();
        p.t = Some(t);
        p
    }

    pub fn t_or_zero(&self) -> f64 {
        self.t.unwrap_or(0.0)
    }

    /// `φ(x_j, u)` and `∂φ/∂u` at node `j`.
    pub fn pointwise(&self, j: usize, u: f64) -> (f64, f64) {
        let t = self.t_or_zero();
        match &self.kind {
            ProblemKind::Smooth { g, .. } => (g.eval(u) - t - self.h.values()[j], g.deriv(u)),
            ProblemKind::SingularMems { mu, beta } => {
                let b = beta.values()[j];
                let p = u.powf(-mu);
                (u + b * p - t, 1.0 - mu * b * p / u)
            }
            ProblemKind::AttractiveRepulsive {
                mu,
                rho,
                gamma,
                beta,
                e,
            } => {
                let (g, b, ev) = (gamma.values()[j], beta.values()[j], e.values()[j]);
                let pm = u.powf(-mu);
                let pr = u.powf(-rho);
                (ev - g * pm + b * pr, mu * g * pm / u - rho * b * pr / u)
            }
        }
    }

    /// `∂φ/∂t` (the same at every node).
    pub fn dphi_dt(&self) -> f64 {
        match self.kind {
            ProblemKind::AttractiveRepulsive { .. } => 0.0,
            _ => -1.0,
        }
    }

    /// Part of `φ` whose product with `u'` does not integrate to zero by
    /// itself; it balances `c ||u'||^2` in the drift energy identity.
    pub fn drift_coupling(&self, j: usize, u: f64) -> f64 {
        match &self.kind {
            ProblemKind::Smooth { .. } => -self.h.values()[j],
            ProblemKind::SingularMems { mu, beta } => beta.values()[j] * u.powf(-mu),
            ProblemKind::AttractiveRepulsive { .. } => self.pointwise(j, u).0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(16).unwrap()
    }

    #[test]
    fn validation() {
        let g = grid();
        let beta = SpectralField::constant(g, 1.0);
        assert!(ProblemSpec::singular_mems(0.5, 1.0, 2.0, 2.0, beta.clone()).is_ok());
        assert!(ProblemSpec::singular_mems(0.5, 1.0, 2.0, 0.5, beta.clone()).is_err());
        let neg = SpectralField::sample(g, f64::cos).unwrap();
        assert!(matches!(
            ProblemSpec::singular_mems(0.5, 1.0, 2.0, 2.0, neg),
            Err(Error::InvalidBeta(_))
        ));
        let one = SpectralField::constant(g, 1.0);
        assert!(ProblemSpec::attractive_repulsive(0.5, 1.0, 1.0, 2.0, one.clone(), one.clone(), one.clone()).is_err());
        assert!(ProblemSpec::attractive_repulsive(0.5, 1.0, 2.0, 1.0, one.clone(), one.clone(), one.clone()).is_ok());
        assert!(ProblemSpec::smooth(1.5, 1.0, 0.0, one.clone(), ScalarFn::square(), true).is_err());
        assert!(ProblemSpec::smooth(0.5, -1.0, 0.0, one, ScalarFn::square(), true).is_err());
    }

    #[test]
    fn pointwise_derivatives() {
        let g = grid();
        let b = SpectralField::sample(g, |x| 1.0 + 0.5 * x.cos()).unwrap();
        let probs = [
            ProblemSpec::smooth(0.5, 1.0, 0.3, b.clone(), ScalarFn::from_expr("u^3 - u").unwrap(), true).unwrap(),
            ProblemSpec::singular_mems(0.5, 1.0, 2.0, 2.0, b.clone()).unwrap(),
            ProblemSpec::attractive_repulsive(0.5, 1.0, 2.5, 1.5, b.clone(), b.scaled(-0.3), b.clone()).unwrap(),
        ];
        for p in &probs {
            for j in [0, 5] {
                let u = 1.3;
                let eps = 1e-6;
                let fd = (p.pointwise(j, u + eps).0 - p.pointwise(j, u - eps).0) / (2.0 * eps);
                assert!((fd - p.pointwise(j, u).1).abs() < 1e-7);
            }
        }
    }
}
