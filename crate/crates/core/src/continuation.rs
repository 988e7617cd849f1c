//! Parameter continuation in `t`, fold location and the averaging homotopy
//! for the attractive-repulsive family.

use nalgebra::{DMatrix, DVector};

use crate::certificates::{ar_constants, averaged_phi, bisect, phi_roots};
use crate::error::{Error, Result};
use crate::problem::{ProblemKind, ProblemSpec};
use crate::solver::{jacobian, linear_solve, newton_solve, newton_system, residual, NewtonOptions, NodalSystem, Solution};
use crate::spectral::{PeriodicGrid, SpectralField};

/// Unit tangent `(du, dt)` in the metric `(1/n) Σ a_j b_j + dt^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub du: Vec<f64>,
    pub dt: f64,
}

impl Tangent {
    fn normalized(du: Vec<f64>, dt: f64) -> Self {
        let n = du.len() as f64;
        let norm = (du.iter().map(|v| v * v).sum::<f64>() / n + dt * dt).sqrt();
        Self {
            du: du.into_iter().map(|v| v / norm).collect(),
            dt: dt / norm,
        }
    }

    fn flipped(self) -> Self {
        Self {
            du: self.du.into_iter().map(|v| -v).collect(),
            dt: -self.dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// Natural continuation could not step past this `t`.
    FoldSuspected { t: f64 },
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub points: Vec<Solution>,
    pub tangents: Vec<Tangent>,
    /// Arclength of the step leading to each point (0 for the first).
    pub steps: Vec<f64>,
    /// Indices `i` where `dt` changes sign between points `i` and `i + 1`.
    pub folds: Vec<usize>,
    pub termination: Termination,
}

impl Branch {
    /// Whether the point at `i` is immediately followed by a fold.
    pub fn fold_flag(&self, i: usize) -> bool {
        self.folds.contains(&i)
    }
}

fn require_t(p: &ProblemSpec) -> Result<f64> {
    p.t.ok_or_else(|| Error::InvalidProblem("continuation needs a parameter t".into()))
}


/// Tangent from `J du = -R_t dt` with `dt = 1`, oriented so `dt` has sign `dir`.
fn initial_tangent(u: &SpectralField, p: &ProblemSpec, dir: f64) -> Result<Tangent> {
    let n = u.n();
    let rt = p.dphi_dt();
    let du = linear_solve(jacobian(u, p)?, &DVector::from_element(n, -rt))?;
    let tan = Tangent::normalized(du.iter().copied().collect(), 1.0);
    Ok(if dir < 0.0 { tan.flipped() } else { tan })
}

/// Tangent at `(u, t)` from the bordered system with `prev` as the last row;
/// this orients it so that `<prev, new> > 0`.
fn bordered_tangent(u: &SpectralField, p: &ProblemSpec, prev: &Tangent) -> Result<Tangent> {
    let n = u.n();
    let m = bordered_matrix(u, p, prev)?;
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let x = linear_solve(m, &rhs)?;
    let tan = Tangent::normalized(x.rows(0, n).iter().copied().collect(), x[n]);
    let dot = weighted_dot(&tan.du, &prev.du) + tan.dt * prev.dt;
    Ok(if dot < 0.0 { tan.flipped() } else { tan })
}

fn weighted_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

fn bordered_matrix(u: &SpectralField, p: &ProblemSpec, tau: &Tangent) -> Result<DMatrix<f64>> {
    let n = u.n();
    let j = jacobian(u, p)?;
    let rt = p.dphi_dt();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&j);
    for i in 0..n {
        m[(i, n)] = rt;
        m[(n, i)] = tau.du[i] / n as f64;
    }
    m[(n, n)] = tau.dt;
    Ok(m)
}

/// Pseudo-arclength corrector: Newton on `R(u, t) = 0` plus the hyperplane
/// `<tau, (u, t) - anchor> = ds`.
struct Corrector<'a> {
    p: &'a ProblemSpec,
    anchor: &'a SpectralField,
    t_anchor: f64,
    tau: &'a Tangent,
    ds: f64,
    opts: &'a NewtonOptions,
    max_iter: usize,
}

impl Corrector<'_> {
    fn eval(&self, u: &SpectralField, t: f64) -> Result<(SpectralField, f64)> {
        let r = residual(u, &self.p.with_t(t))?;
        let du: Vec<f64> = u.values().iter().zip(self.anchor.values()).map(|(a, b)| a - b).collect();
        let c = weighted_dot(&self.tau.du, &du) + self.tau.dt * (t - self.t_anchor) - self.ds;
        Ok((r, c))
    }

    fn run(&self) -> Result<(SpectralField, f64, usize, f64)> {
        let grid = self.anchor.grid();
        let n = grid.n();
        let positive = self.p.is_singular();
        let pred: Vec<f64> = self
            .anchor
            .values()
            .iter()
            .zip(&self.tau.du)
            .map(|(a, d)| a + self.ds * d)
            .collect();
        let mut u = SpectralField::from_values(grid, pred)?;
        let mut t = self.t_anchor + self.ds * self.tau.dt;
        if positive && !(u.min() > self.opts.min_u_floor) {
            return Err(Error::PositivityViolated { min_u: u.min() });
        }
        let (mut r, mut c) = self.eval(&u, t)?;
        for it in 0..=self.max_iter {
            let merit = r.sup().max(c.abs());
            if r.sup() <= self.opts.tol && c.abs() <= self.opts.tol {
                return Ok((u, t, it, r.sup()));
            }
            if it == self.max_iter {
                return Err(Error::NoConvergence { residual: merit });
            }
            let pt = self.p.with_t(t);
            let m = bordered_matrix(&u, &pt, self.tau)?;
            let mut rhs = DVector::zeros(n + 1);
            for (i, v) in r.values().iter().enumerate() {
                rhs[i] = -v;
            }
            rhs[n] = -c;
            let x = linear_solve(m, &rhs)?;
            let step = SpectralField::from_values(grid, x.rows(0, n).iter().copied().collect())?;
            let mut alpha = 1.0;
            let mut next = None;
            for _ in 0..=self.opts.max_halvings {
                let trial = u.axpy(alpha, &step);
                if !positive || trial.min() > self.opts.min_u_floor {
                    let tt = t + alpha * x[n];
                    if let Ok((rt, ct)) = self.eval(&trial, tt) {
                        if rt.sup().max(ct.abs()) < merit * (1.0 - 1e-4 * alpha) {
                            next = Some((trial, tt, rt, ct));
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            let Some((nu, nt, nr, nc)) = next else {
                return Err(Error::NoConvergence { residual: merit });
            };
            (u, t, r, c) = (nu, nt, nr, nc);
        }
        unreachable!()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArclengthOptions {
    pub newton: NewtonOptions,
    pub ds: f64,
    pub ds_min: f64,
    pub max_steps: usize,
    /// Initial direction of travel in `t` (`-1` or `+1`).
    pub direction: f64,
    /// Stop once `t` leaves `[t_min, t_max]`.
    pub t_min: f64,
    pub t_max: f64,
    pub corrector_iter: usize,
}

impl Default for ArclengthOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            ds: 0.05,
            ds_min: 1e-8,
            max_steps: 200,
            direction: -1.0,
            t_min: f64::NEG_INFINITY,
            t_max: f64::INFINITY,
            corrector_iter: 15,
        }
    }
}

/// Natural continuation from `t_from` to `t_to` starting from `seed`;
/// the step halves on failure and the run ends with `FoldSuspected` once it
/// drops below `1e-6 |dt|`.
pub fn continue_natural(
    p: &ProblemSpec,
    t_from: f64,
    t_to: f64,
    dt: f64,
    seed: &SpectralField,
    opts: &NewtonOptions,
) -> Result<Branch> {
    require_t(p)?;
    let first = newton_solve(seed, &p.with_t(t_from), opts).map_err(|e| Error::SeedFailed(e.to_string()))?;
    let dir = if t_to >= t_from { 1.0 } else { -1.0 };
    let nominal = dt.abs();
    if !(nominal > 0.0) {
        return Err(Error::InvalidProblem("dt must be nonzero".into()));
    }
    let mut tangents = vec![initial_tangent(&first.u, &p.with_t(t_from), dir)?];
    let mut points = vec![first];
    let mut steps = vec![0.0];
    let mut h = nominal;
    let mut termination = Termination::Completed;
    while (t_to - points.last().unwrap().t.unwrap()) * dir > 1e-14 {
        let last = points.last().unwrap();
        let t0 = last.t.unwrap();
        let h_try = h.min((t_to - t0).abs());
        let t1 = t0 + dir * h_try;
        let tan = tangents.last().unwrap();
        // tangent predictor: du/dt = tan.du / tan.dt
        let pred = if tan.dt.abs() > 1e-12 {
            let scale = dir * h_try / tan.dt;
            let v = last.u.values().iter().zip(&tan.du).map(|(a, d)| a + scale * d).collect();
            SpectralField::from_values(last.u.grid(), v)?
        } else {
            last.u.clone()
        };
        let pt = p.with_t(t1);
        let attempt = newton_solve(&pred, &pt, opts).or_else(|_| newton_solve(&last.u, &pt, opts));
        match attempt {
            Ok(sol) => {
                let tnew = initial_tangent(&sol.u, &pt, dir)?;
                let ds = {
                    let d: Vec<f64> = sol.u.values().iter().zip(last.u.values()).map(|(a, b)| a - b).collect();
                    (weighted_dot(&d, &d) + h_try * h_try).sqrt()
                };
                points.push(sol);
                tangents.push(tnew);
                steps.push(ds);
                h = (2.0 * h).min(nominal);
            }
            Err(_) => {
                h *= 0.5;
                if h < 1e-6 * nominal {
                    termination = Termination::FoldSuspected { t: t0 };
                    break;
                }
            }
        }
    }
    Ok(Branch {
        points,
        tangents,
        steps,
        folds: Vec::new(),
        termination,
    })
}

/// Pseudo-arclength continuation from a converged solution. Steps halve on
/// corrector failure (`StepCollapse` below `ds_min`) and return towards the
/// nominal size after easy steps. Folds are flagged where the tangent's `dt`
/// changes sign.
pub fn continue_arclength(p: &ProblemSpec, seed: &Solution, opts: &ArclengthOptions) -> Result<Branch> {
    require_t(p)?;
    let t0 = seed.t.or(p.t).expect("checked above");
    let p0 = p.with_t(t0);
    let first_tan = initial_tangent(&seed.u, &p0, opts.direction)?;
    let mut points = vec![seed.clone()];
    let mut tangents = vec![first_tan];
    let mut steps = vec![0.0];
    let mut folds = Vec::new();
    let mut ds = opts.ds;
    let mut termination = Termination::MaxSteps;
    for _ in 0..opts.max_steps {
        let last = points.last().unwrap();
        let tau = tangents.last().unwrap();
        let t_last = last.t.unwrap();
        let (u, t, iters, res) = loop {
            let corr = Corrector {
                p,
                anchor: &last.u,
                t_anchor: t_last,
                tau,
                ds,
                opts: &opts.newton,
                max_iter: opts.corrector_iter,
            };
            match corr.run() {
                Ok(out) => break out,
                Err(_) => {
                    ds *= 0.5;
                    if ds < opts.ds_min {
                        return Err(Error::StepCollapse(ds));
                    }
                }
            }
        };
        let pt = p.with_t(t);
        let tan = bordered_tangent(&u, &pt, tau)?;
        if tan.dt * tau.dt < 0.0 {
            folds.push(points.len() - 1);
        }
        points.push(Solution::new(u, Some(t), res, opts.newton.tol, iters));
        tangents.push(tan);
        steps.push(ds);
        if iters <= 4 {
            ds = (2.0 * ds).min(opts.ds);
        }
        if t < opts.t_min || t > opts.t_max {
            termination = Termination::Completed;
            break;
        }
    }
    Ok(Branch {
        points,
        tangents,
        steps,
        folds,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPoint {
    pub t1: f64,
    pub solution: Solution,
    pub tangent: Tangent,
}

/// Refines the first flagged fold by regula falsi (Illinois) on the
/// arclength offset until the tangent's `|dt| ≤ 1e-8`.
pub fn locate_fold(p: &ProblemSpec, branch: &Branch, opts: &NewtonOptions) -> Result<FoldPoint> {
    let &i = branch.folds.first().ok_or(Error::NoFoldInBranch)?;
    let base = &branch.points[i];
    let tau = &branch.tangents[i];
    let t_base = base.t.ok_or(Error::NoFoldInBranch)?;
    let eval = |sigma: f64| -> Result<(SpectralField, f64, Tangent, f64)> {
        let corr = Corrector {
            p,
            anchor: &base.u,
            t_anchor: t_base,
            tau,
            ds: sigma,
            opts,
            max_iter: 30,
        };
        let (u, t, _, res) = corr.run()?;
        let tan = bordered_tangent(&u, &p.with_t(t), tau)?;
        Ok((u, t, tan, res))
    };
    let (mut a, mut fa) = (0.0, tau.dt);
    let (mut b, mut fb) = (branch.steps[i + 1], branch.tangents[i + 1].dt);
    if fa * fb > 0.0 {
        return Err(Error::NoFoldInBranch);
    }
    let mut side = 0;
    let mut best: Option<(SpectralField, f64, Tangent, f64)> = None;
    for _ in 0..100 {
        let sigma = (a * fb - b * fa) / (fb - fa);
        let (u, t, tan, res) = eval(sigma)?;
        let f = tan.dt;
        let done = f.abs() <= 1e-8 || (b - a).abs() < 1e-15;
        best = Some((u, t, tan, res));
        if done {
            break;
        }
        if f * fb < 0.0 {
            (a, fa) = (b, fb);
            (b, fb) = (sigma, f);
            side = 0;
        } else {
            (b, fb) = (sigma, f);
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let (u, t, tangent, res) = best.expect("at least one evaluation");
    if tangent.dt.abs() > 1e-8 {
        return Err(Error::NoConvergence { residual: tangent.dt.abs() });
    }
    Ok(FoldPoint {
        t1: t,
        solution: Solution::new(u, Some(t), res, opts.tol, 0),
        tangent,
    })
}

/// Positive constant equilibrium `ã` of the averaged nonlinearity
/// `γ̄/a^μ - β̄/a^ρ - ē`, bisected to full precision.
pub fn scalar_equilibrium(p: &ProblemSpec) -> Result<f64> {
    ar_constants(p, None).map_err(|e| match e {
        Error::RootBracketFailed => Error::NoBracket,
        other => other,
    })?;
    let phi = averaged_phi(p)?;
    let roots = phi_roots(&phi);
    let &a = roots.first().ok_or(Error::NoBracket)?;
    // polish within the sampled bracket
    let a = bisect(&phi, a * (1.0 - 1e-9), a * (1.0 + 1e-9));
    if phi(a).abs() > 1e-12 {
        return Err(Error::NoBracket);
    }
    Ok(a)
}

/// Residual `L u + (1-λ) mean(φ(·, u)) + λ φ(·, u)`: at `λ = 0` the
/// nonlinearity is replaced by its average.
struct HomotopySystem<'a> {
    p: &'a ProblemSpec,
    lambda: f64,
}

impl NodalSystem for HomotopySystem<'_> {
    fn grid(&self) -> PeriodicGrid {
        self.p.grid()
    }
    fn residual(&self, u: &SpectralField) -> Result<SpectralField> {
        if !(u.min() > 0.0) {
            return Err(Error::PositivityViolated { min_u: u.min() });
        }
        let lin = self.p.linear().apply(u);
        let phi: Vec<f64> = u.values().iter().enumerate().map(|(j, &x)| self.p.pointwise(j, x).0).collect();
        let mean = phi.iter().sum::<f64>() / phi.len() as f64;
        let l = self.lambda;
        let v = lin
            .values()
            .iter()
            .zip(&phi)
            .map(|(a, f)| a + (1.0 - l) * mean + l * f)
            .collect();
        SpectralField::from_values(u.grid(), v)
    }
    fn jacobian(&self, u: &SpectralField) -> Result<DMatrix<f64>> {
        let n = u.n();
        let mut m = DMatrix::from_row_slice(n, n, &self.p.linear().matrix(u.grid()));
        let l = self.lambda;
        for (j, &x) in u.values().iter().enumerate() {
            let d = self.p.pointwise(j, x).1;
            for i in 0..n {
                m[(i, j)] += (1.0 - l) * d / n as f64;
            }
            m[(j, j)] += l * d;
        }
        Ok(m)
    }
    fn needs_positivity(&self) -> bool {
        true
    }
    fn t(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyState {
    pub lambda: f64,
    pub solution: Solution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyRun {
    pub a_start: f64,
    pub states: Vec<HomotopyState>,
    pub solution: Solution,
}

/// Tracks the homotopy from the constant `ã` at `λ = 0` to `λ = 1` in
/// `steps` uniform increments, halving on failure; a step below `1e-4`
/// stalls.
pub fn mawhin_homotopy(p: &ProblemSpec, steps: usize, opts: &NewtonOptions) -> Result<HomotopyRun> {
    if !matches!(p.kind, ProblemKind::AttractiveRepulsive { .. }) {
        return Err(Error::InvalidProblem("homotopy needs the attractive-repulsive family".into()));
    }
    let a = scalar_equilibrium(p)?;
    let nominal = 1.0 / steps.max(1) as f64;
    let start = SpectralField::constant(p.grid(), a);
    let sol0 = newton_system(&HomotopySystem { p, lambda: 0.0 }, &start, opts, &[])
        .map_err(|_| Error::HomotopyStall { lambda: 0.0 })?;
    let mut states = vec![HomotopyState {
        lambda: 0.0,
        solution: sol0,
    }];
    let mut dl = nominal;
    let mut lambda = 0.0;
    while lambda < 1.0 {
        let next = (lambda + dl).min(1.0);
        let prev = &states.last().unwrap().solution.u;
        match newton_system(&HomotopySystem { p, lambda: next }, prev, opts, &[]) {
            Ok(sol) => {
                lambda = next;
                states.push(HomotopyState { lambda, solution: sol });
                dl = nominal;
            }
            Err(_) => {
                dl *= 0.5;
                if dl < 1e-4 {
                    return Err(Error::HomotopyStall { lambda });
                }
            }
        }
    }
    let last = &states.last().unwrap().solution;
    let solution = Solution::new(last.u.clone(), None, residual(&last.u, p)?.sup(), opts.tol, last.iterations);
    Ok(HomotopyRun {
        a_start: a,
        states,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ScalarFn;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(16).unwrap()
    }

    fn quadratic(t: f64) -> ProblemSpec {
        ProblemSpec::smooth(0.5, 1.0, t, SpectralField::zeros(grid()), ScalarFn::square(), true).unwrap()
    }

    fn mems(t: f64) -> ProblemSpec {
        ProblemSpec::singular_mems(0.5, 1.0, t, 2.0, SpectralField::constant(grid(), 1.0)).unwrap()
    }

    #[test]
    fn natural_stops_near_quadratic_fold() {
        let p = quadratic(1.0);
        let seed = SpectralField::constant(grid(), 1.0);
        let b = continue_natural(&p, 1.0, -0.5, 0.05, &seed, &NewtonOptions::default()).unwrap();
        match b.termination {
            Termination::FoldSuspected { t } => assert!(t > -1e-6 && t < 0.05, "{t}"),
            ref other => panic!("{other:?}"),
        }
        for pt in &b.points {
            assert!(pt.residual_sup <= 1e-10);
            assert!((pt.u.mean().powi(2) - pt.t.unwrap()).abs() < 1e-9);
        }
        assert!(matches!(
            continue_natural(&quadratic(-1.0), -1.0, 0.0, 0.1, &SpectralField::zeros(grid()), &NewtonOptions::default()),
            Err(Error::SeedFailed(_))
        ));
    }

    #[test]
    fn arclength_turns_the_quadratic_fold() {
        let p = quadratic(1.0);
        let seed = newton_solve(&SpectralField::constant(grid(), 1.0), &p, &NewtonOptions::default()).unwrap();
        let opts = ArclengthOptions {
            ds: 0.1,
            max_steps: 60,
            t_max: 1.0,
            ..Default::default()
        };
        let b = continue_arclength(&p, &seed, &opts).unwrap();
        assert_eq!(b.termination, Termination::Completed);
        assert_eq!(b.folds.len(), 1);
        assert!(b.points.last().unwrap().u.mean() < -0.9);
        let fold = locate_fold(&p, &b, &NewtonOptions::default()).unwrap();
        assert!(fold.t1.abs() <= 1e-6, "{}", fold.t1);
        assert!(fold.solution.u.sup() < 1e-3);
    }

    #[test]
    fn mems_fold_value() {
        let p = mems(3.0);
        let seed = newton_solve(&SpectralField::constant(grid(), 2.9), &p, &NewtonOptions::default()).unwrap();
        let opts = ArclengthOptions {
            ds: 0.1,
            max_steps: 100,
            t_max: 3.0,
            ..Default::default()
        };
        let b = continue_arclength(&p, &seed, &opts).unwrap();
        assert!(b.points.iter().all(|s| s.u.min() > 0.0));
        let fold = locate_fold(&p, &b, &NewtonOptions::default()).unwrap();
        let want = 3.0 * 4f64.powf(-1.0 / 3.0);
        assert!((fold.t1 - want).abs() <= 1e-4, "{}", fold.t1);
        assert!((fold.solution.u.mean() - 2f64.cbrt()).abs() < 1e-3);
    }

    #[test]
    fn no_fold_is_reported() {
        let p = quadratic(1.0);
        let b = continue_natural(&p, 1.0, 2.0, 0.5, &SpectralField::constant(grid(), 1.0), &NewtonOptions::default())
            .unwrap();
        assert!(matches!(locate_fold(&p, &b, &NewtonOptions::default()), Err(Error::NoFoldInBranch)));
    }

    fn ar(beta: f64) -> ProblemSpec {
        let g = grid();
        ProblemSpec::attractive_repulsive(
            0.5,
            1.0,
            2.0,
            1.0,
            SpectralField::constant(g, 1.0),
            SpectralField::constant(g, beta),
            SpectralField::constant(g, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn scalar_equilibrium_values() {
        let a = scalar_equilibrium(&ar(-0.2)).unwrap();
        assert!((a - (0.2 + 4.04f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((a - 1.104988).abs() < 1e-6);
        assert!((scalar_equilibrium(&ar(0.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn homotopy_with_constant_data_stays_constant() {
        let run = mawhin_homotopy(&ar(-0.2), 20, &NewtonOptions::default()).unwrap();
        assert_eq!(run.states.len(), 21);
        let want = (0.2 + 4.04f64.sqrt()) / 2.0;
        for st in &run.states {
            assert!((st.solution.u.mean() - want).abs() < 1e-10);
        }
        assert!(run.solution.residual_sup <= 1e-10);
    }

    #[test]
    fn homotopy_with_forcing() {
        let g = grid();
        let e = SpectralField::sample(g, |x| 1.0 + 0.3 * x.cos()).unwrap();
        let p = ProblemSpec::attractive_repulsive(
            0.6,
            1.0,
            2.0,
            1.0,
            SpectralField::constant(g, 1.0),
            SpectralField::constant(g, -0.2),
            e,
        )
        .unwrap();
        let run = mawhin_homotopy(&p, 20, &NewtonOptions::default()).unwrap();
        assert!(run.solution.residual_sup <= 1e-10);
        assert!(run.solution.u.max() - run.solution.u.min() > 1e-3);
    }
}
