//! Residual and Jacobian assembly, damped Newton, and deflated search for
//! multiple solutions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::spectral::{PeriodicGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Lower bound kept by every accepted iterate of a singular problem.
    pub min_u_floor: f64,
    pub max_halvings: usize,
    /// Sup-norm radius below which two solutions count as the same.
    pub deflation_radius: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            min_u_floor: 1e-8,
            max_halvings: 30,
            deflation_radius: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub l2_deriv: f64,
}

impl Diagnostics {
    pub fn of(u: &SpectralField) -> Self {
        Self {
            mean: u.mean(),
            min: u.min(),
            max: u.max(),
            l2_deriv: u.l2_deriv(),
        }
    }
}

/// A converged state.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: SpectralField,
    pub t: Option<f64>,
    pub residual_sup: f64,
    pub tol: f64,
    pub iterations: usize,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn new(u: SpectralField, t: Option<f64>, residual_sup: f64, tol: f64, iterations: usize) -> Self {
        let diagnostics = Diagnostics::of(&u);
        Self {
            u,
            t,
            residual_sup,
            tol,
            iterations,
            diagnostics,
        }
    }
}

fn check_positive(u: &SpectralField, p: &ProblemSpec) -> Result<()> {
    if p.is_singular() && !(u.min() > 0.0) {
        return Err(Error::PositivityViolated { min_u: u.min() });
    }
    Ok(())
}

/// Nodal residual `(Δ)^s u + c u' + φ(x, u)`.
pub fn residual(u: &SpectralField, p: &ProblemSpec) -> Result<SpectralField> {
    p.h.check_grid(u)?;
    check_positive(u, p)?;
    let lin = p.linear().apply(u);
    let vals = lin
        .values()
        .iter()
        .zip(u.values())
        .enumerate()
        .map(|(j, (&l, &uj))| l + p.pointwise(j, uj).0)
        .collect();
    SpectralField::from_values(u.grid(), vals)
}

/// Dense Jacobian of [`residual`] in the nodal basis.
pub fn jacobian(u: &SpectralField, p: &ProblemSpec) -> Result<DMatrix<f64>> {
    p.h.check_grid(u)?;
    check_positive(u, p)?;
    let n = u.n();
    let mut m = DMatrix::from_row_slice(n, n, &p.linear().matrix(u.grid()));
    for (j, &uj) in u.values().iter().enumerate() {
        m[(j, j)] += p.pointwise(j, uj).1;
    }
    Ok(m)
}

/// A square nonlinear system on nodal values.
pub(crate) trait NodalSystem {
    fn grid(&self) -> PeriodicGrid;
    fn residual(&self, u: &SpectralField) -> Result<SpectralField>;
    fn jacobian(&self, u: &SpectralField) -> Result<DMatrix<f64>>;
    /// Whether iterates must stay above the positivity floor.
    fn needs_positivity(&self) -> bool;
    fn t(&self) -> Option<f64>;
}

pub(crate) struct PlainSystem<'a> {
    pub p: &'a ProblemSpec,
}

impl NodalSystem for PlainSystem<'_> {
    fn grid(&self) -> PeriodicGrid {
        self.p.grid()
    }
    fn residual(&self, u: &SpectralField) -> Result<SpectralField> {
        residual(u, self.p)
    }
    fn jacobian(&self, u: &SpectralField) -> Result<DMatrix<f64>> {
        jacobian(u, self.p)
    }
    fn needs_positivity(&self) -> bool {
        self.p.is_singular()
    }
    fn t(&self) -> Option<f64> {
        self.p.t
    }
}

/// Solves `J x = b`; a nearly singular matrix gets a tiny diagonal shift.
pub(crate) fn linear_solve(j: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = j.amax().max(1.0);
    if let Some(x) = j.clone().lu().solve(b) {
        if x.iter().all(|v| v.is_finite()) && x.amax() < 1e12 * (1.0 + b.amax()) {
            return Ok(x);
        }
    }
    let n = j.nrows();
    let shifted = j + DMatrix::identity(n, n) * (1e-10 * scale);
    match shifted.lu().solve(b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::SingularJacobian),
    }
}

/// Deflation operator `Π (1/||u - u_i||^2 + 1)` over known solutions.
struct Deflation<'a> {
    known: &'a [SpectralField],
}

impl Deflation<'_> {
    fn factor(&self, u: &SpectralField) -> f64 {
        self.known
            .iter()
            .map(|k| {
                let d = u.axpy(-1.0, k);
                1.0 / d.inner(&d) + 1.0
            })
            .product()
    }

    /// Gradient of `ln D` in nodal coordinates.
    fn log_gradient(&self, u: &SpectralField) -> Vec<f64> {
        let n = u.n();
        let h = u.grid().spacing();
        let mut g = vec![0.0; n];
        for k in self.known {
            let d = u.axpy(-1.0, k);
            let d2 = d.inner(&d);
            let f = 1.0 / d2 + 1.0;
            for (gj, dj) in g.iter_mut().zip(d.values()) {
                *gj += -2.0 * h * dj / (d2 * d2) / f;
            }
        }
        g
    }
}

pub(crate) fn newton_system(
    sys: &dyn NodalSystem,
    u0: &SpectralField,
    opts: &NewtonOptions,
    known: &[SpectralField],
) -> Result<Solution> {
    let grid = sys.grid();
    if u0.grid() != grid {
        return Err(Error::GridMismatch {
            field: u0.n(),
            expected: grid.n(),
        });
    }
    let positive = sys.needs_positivity();
    if positive && !(u0.min() > opts.min_u_floor) {
        return Err(Error::PositivityViolated { min_u: u0.min() });
    }
    let deflation = Deflation { known };
    let merit = |f: &SpectralField, u: &SpectralField| f.sup() * deflation.factor(u);

    let mut u = u0.clone();
    let mut f = sys.residual(&u)?;
    let mut iterations = 0;
    loop {
        let r = f.sup();
        if r <= opts.tol {
            return Ok(Solution::new(u, sys.t(), r, opts.tol, iterations));
        }
        if iterations >= opts.max_iter {
            return Err(Error::MaxIterExceeded {
                iterations,
                residual: r,
            });
        }
        iterations += 1;

        let jac = sys.jacobian(&u)?;
        let rhs = DVector::from_iterator(grid.n(), f.values().iter().map(|v| -v));
        let mut step: Vec<f64> = linear_solve(jac, &rhs)?.iter().copied().collect();
        if !known.is_empty() {
            // Newton step of the deflated residual via Sherman-Morrison
            let grad = deflation.log_gradient(&u);
            let beta: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
            let denom = 1.0 - beta;
            if denom.abs() > 1e-12 {
                step.iter_mut().for_each(|v| *v /= denom);
            }
        }
        let step = SpectralField::from_values(grid, step)?;

        let m0 = merit(&f, &u);
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        let mut positivity_blocked = true;
        for _ in 0..=opts.max_halvings {
            let trial = u.axpy(alpha, &step);
            if positive && !(trial.min() > opts.min_u_floor) {
                alpha *= 0.5;
                continue;
            }
            positivity_blocked = false;
            if let Ok(ft) = sys.residual(&trial) {
                if merit(&ft, &trial) < m0 * (1.0 - 1e-4 * alpha) {
                    accepted = Some((trial, ft));
                    break;
                }
                fallback = Some((trial, ft));
            }
            alpha *= 0.5;
        }
        match accepted.or(fallback) {
            Some((nu, nf)) => {
                u = nu;
                f = nf;
            }
            None if positive && positivity_blocked => {
                return Err(Error::PositivityViolated {
                    min_u: u.axpy(alpha, &step).min(),
                })
            }
            None => {
                return Err(Error::MaxIterExceeded {
                    iterations,
                    residual: r,
                })
            }
        }
    }
}

/// Damped Newton for the problem's residual.
pub fn newton_solve(u0: &SpectralField, p: &ProblemSpec, opts: &NewtonOptions) -> Result<Solution> {
    newton_system(&PlainSystem { p }, u0, opts, &[])
}

/// Newton with deflation of previously found solutions; each seed that
/// converges to a new solution (sup distance above the deflation radius)
/// extends the result.
pub fn deflated_search(p: &ProblemSpec, seeds: &[SpectralField], opts: &NewtonOptions) -> Vec<Solution> {
    let mut found: Vec<Solution> = Vec::new();
    let mut known: Vec<SpectralField> = Vec::new();
    for seed in seeds {
        let Ok(sol) = newton_system(&PlainSystem { p }, seed, opts, &known) else {
            continue;
        };
        let fresh = known
            .iter()
            .all(|k| k.dist_sup(&sol.u) > opts.deflation_radius);
        let plain = residual(&sol.u, p).map(|r| r.sup()).unwrap_or(f64::INFINITY);
        if fresh && plain <= opts.tol {
            known.push(sol.u.clone());
            found.push(sol);
        }
    }
    found
}

/// Range of the constant part of generated seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRange {
    pub lo: f64,
    pub hi: f64,
    /// Amplitude of the random low-mode perturbation.
    pub wiggle: f64,
}

/// Deterministic seed fields: constants spread over the range (the first
/// `count/2` evenly spaced, the rest random) plus small random modes `k ≤ 3`.
pub fn default_seeds(grid: PeriodicGrid, count: usize, rng_seed: u64, range: SeedRange) -> Vec<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let even = count / 2;
    (0..count)
        .map(|i| {
            let base = if i < even {
                if even == 1 {
                    0.5 * (range.lo + range.hi)
                } else {
                    range.lo + (range.hi - range.lo) * i as f64 / (even - 1) as f64
                }
            } else {
                rng.random_range(range.lo..=range.hi)
            };
            let modes: Vec<(f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.random_range(-1.0..=1.0) * range.wiggle,
                        rng.random_range(-1.0..=1.0) * range.wiggle,
                    )
                })
                .collect();
            SpectralField::sample(grid, |x| {
                base + modes
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let kx = (k + 1) as f64 * x;
                        a * kx.cos() + b * kx.sin()
                    })
                    .sum::<f64>()
            })
            .expect("finite seed")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ScalarFn;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn quadratic(t: f64, n: usize) -> ProblemSpec {
        ProblemSpec::smooth(0.5, 1.0, t, SpectralField::zeros(grid(n)), ScalarFn::square(), true).unwrap()
    }

    fn linear(s: f64, n: usize) -> ProblemSpec {
        let g = grid(n);
        ProblemSpec::smooth(s, 1.0, 2.0, SpectralField::sample(g, f64::cos).unwrap(), ScalarFn::identity(), false)
            .unwrap()
    }

    #[test]
    fn residual_examples() {
        let g = grid(32);
        let p = quadratic(0.25, 32);
        assert!(residual(&SpectralField::constant(g, 0.5), &p).unwrap().sup() == 0.0);
        for s in [0.2, 0.5, 0.8] {
            let u = SpectralField::sample(g, |x| 2.0 + x.sin()).unwrap();
            assert!(residual(&u, &linear(s, 32)).unwrap().sup() <= 1e-12);
        }
        let mems = ProblemSpec::singular_mems(0.5, 1.0, 2.0, 2.0, SpectralField::constant(g, 1.0)).unwrap();
        assert!(residual(&SpectralField::constant(g, 1.0), &mems).unwrap().sup() < 1e-15);
        assert!(matches!(
            residual(&SpectralField::constant(g, -1.0), &mems),
            Err(Error::PositivityViolated { .. })
        ));
    }

    #[test]
    fn jacobian_diagonal_and_constant_mode() {
        let g = grid(16);
        let p = quadratic(0.25, 16);
        let u = SpectralField::constant(g, 0.5);
        let j = jacobian(&u, &p).unwrap();
        let lin = DMatrix::from_row_slice(16, 16, &p.linear().matrix(g));
        for i in 0..16 {
            assert!((j[(i, i)] - lin[(i, i)] - 1.0).abs() < 1e-14);
        }
        // constant vector: the linear part annihilates it
        let row_sum: f64 = (0..16).map(|c| j[(3, c)]).sum();
        assert!((row_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn newton_examples() {
        let g = grid(32);
        let sol = newton_solve(&SpectralField::constant(g, 0.4), &quadratic(0.25, 32), &NewtonOptions::default()).unwrap();
        assert!(sol.u.dist_sup(&SpectralField::constant(g, 0.5)) < 1e-10);

        for s in [0.25, 0.5, 0.75] {
            let sol = newton_solve(&SpectralField::zeros(g), &linear(s, 32), &NewtonOptions::default()).unwrap();
            let exact = SpectralField::sample(g, |x| 2.0 + x.sin()).unwrap();
            assert!(sol.u.dist_sup(&exact) < 1e-10);
        }

        let err = newton_solve(&SpectralField::zeros(g), &quadratic(-1.0, 32), &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MaxIterExceeded { .. }), "{err:?}");
    }

    #[test]
    fn singular_newton_keeps_floor() {
        let g = grid(32);
        let beta = SpectralField::sample(g, |x| 1.0 + 0.5 * x.cos()).unwrap();
        let p = ProblemSpec::singular_mems(0.5, 1.0, 3.0, 2.0, beta).unwrap();
        let sol = newton_solve(&SpectralField::constant(g, 0.7), &p, &NewtonOptions::default()).unwrap();
        assert!(sol.u.min() > 0.0);
        assert!(sol.residual_sup <= 1e-10);
        assert!(matches!(
            newton_solve(&SpectralField::zeros(g), &p, &NewtonOptions::default()),
            Err(Error::PositivityViolated { .. })
        ));
    }

    #[test]
    fn deflation_examples() {
        let g = grid(32);
        let seeds: Vec<_> = [1.0, -1.0, 0.0].iter().map(|&c| SpectralField::constant(g, c)).collect();
        let sols = deflated_search(&quadratic(0.25, 32), &seeds, &NewtonOptions::default());
        let mut means: Vec<f64> = sols.iter().map(|s| s.u.mean()).collect();
        means.sort_by(f64::total_cmp);
        assert_eq!(means.len(), 2);
        assert!((means[0] + 0.5).abs() < 1e-8 && (means[1] - 0.5).abs() < 1e-8);

        let sols = deflated_search(&quadratic(0.0, 32), &seeds, &NewtonOptions::default());
        assert_eq!(sols.len(), 1);
        assert!(sols[0].u.sup() < 1e-4);

        let many = default_seeds(g, 50, 7, SeedRange { lo: -3.0, hi: 3.0, wiggle: 0.1 });
        assert!(deflated_search(&quadratic(-0.5, 32), &many, &NewtonOptions::default()).is_empty());
    }

    #[test]
    fn seeds_are_deterministic() {
        let g = grid(16);
        let r = SeedRange { lo: 0.2, hi: 3.0, wiggle: 0.05 };
        assert_eq!(default_seeds(g, 10, 3, r), default_seeds(g, 10, 3, r));
        assert_ne!(default_seeds(g, 10, 3, r), default_seeds(g, 10, 4, r));
    }
}
