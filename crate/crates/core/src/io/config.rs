use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::problem::{ProblemSpec, ScalarFn};
use crate::solver::{NewtonOptions, SeedRange};
use crate::spectral::{PeriodicGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Smooth,
    SingularMems,
    AttractiveRepulsive,
}

/// Problem descriptor. Coefficient fields are expressions in `x`; `g` is an
/// expression in `u`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: FamilyTag,
    pub s: f64,
    #[serde(default)]
    pub c: f64,
    pub t: Option<f64>,
    /// Window `[t_lo, t_hi]` that bounds continuation runs.
    pub t_range: Option<[f64; 2]>,
    pub g: Option<String>,
    pub h: Option<String>,
    /// Inferred from `g` when absent.
    pub coercive: Option<bool>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub beta: Option<String>,
    pub gamma: Option<String>,
    pub e: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// RNG seed for the deflation seed list.
    pub seeds: u64,
    pub seed_count: usize,
    pub seed_lo: Option<f64>,
    pub seed_hi: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            seeds: 0,
            seed_count: 20,
            seed_lo: None,
            seed_hi: None,
        }
    }
}

/// Which solution at the starting `t` seeds a continuation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartBranch {
    /// Largest mean.
    Upper,
    /// Smallest mean.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub ds: f64,
    pub max_steps: usize,
    /// Initial direction of travel in `t`.
    pub direction: f64,
    pub start: StartBranch,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            ds: 0.05,
            max_steps: 200,
            direction: -1.0,
            start: StartBranch::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomotopyConfig {
    pub steps: usize,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self { steps: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub field: String,
    pub tol: f64,
    pub threshold: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            field: "cos(x) + 0.3*sin(3*x)".into(),
            tol: 1e-9,
            threshold: 1e-6,
        }
    }
}

/// Artifact file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub branch: String,
    pub fields: String,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            branch: "branch.csv".into(),
            fields: "fields.csv".into(),
            report: "report.txt".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub homotopy: HomotopyConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

fn check(cond: bool, path: &str, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(schema(path, message))
    }
}

/// Parses and validates a JSON experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive_finite(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        let p = &self.problem;
        check(p.s > 0.0 && p.s < 1.0, "problem.s", "must lie in (0, 1)")?;
        check(p.c.is_finite() && p.c >= 0.0, "problem.c", "must be finite and >= 0")?;
        check(p.t.is_none_or(f64::is_finite), "problem.t", "must be finite")?;
        if let Some([lo, hi]) = p.t_range {
            check(lo.is_finite() && hi.is_finite() && lo < hi, "problem.t_range", "need finite lo < hi")?;
        }
        let allowed: &[&str] = match p.family {
            FamilyTag::Smooth => {
                check(p.t.is_some(), "problem.t", "required for the smooth family")?;
                check(p.g.is_some(), "problem.g", "required for the smooth family")?;
                &["g", "h", "coercive"]
            }
            FamilyTag::SingularMems => {
                check(p.t.is_some(), "problem.t", "required for the singular family")?;
                check(p.mu.is_some_and(|m| m >= 1.0 && m.is_finite()), "problem.mu", "required, >= 1")?;
                check(p.beta.is_some(), "problem.beta", "required for the singular family")?;
                &["mu", "beta"]
            }
            FamilyTag::AttractiveRepulsive => {
                check(p.t.is_none(), "problem.t", "the attractive-repulsive family has no t")?;
                check(p.t_range.is_none(), "problem.t_range", "the attractive-repulsive family has no t")?;
                let mu = p.mu.ok_or_else(|| schema("problem.mu", "required"))?;
                let rho = p.rho.ok_or_else(|| schema("problem.rho", "required"))?;
                check(mu.is_finite() && mu >= 1.0, "problem.mu", "must be >= 1")?;
                check(rho > 0.0 && rho <= mu, "problem.rho", "need 0 < rho <= mu")?;
                for (v, k) in [(&p.gamma, "gamma"), (&p.beta, "beta"), (&p.e, "e")] {
                    check(v.is_some(), &format!("problem.{k}"), "required")?;
                }
                &["mu", "rho", "gamma", "beta", "e"]
            }
        };
        let present = [
            ("g", p.g.is_some()),
            ("h", p.h.is_some()),
            ("coercive", p.coercive.is_some()),
            ("mu", p.mu.is_some()),
            ("rho", p.rho.is_some()),
            ("beta", p.beta.is_some()),
            ("gamma", p.gamma.is_some()),
            ("e", p.e.is_some()),
        ];
        for (k, is) in present {
            check(!is || allowed.contains(&k), &format!("problem.{k}"), "not used by this family")?;
        }
        for (k, src) in [("g", &p.g), ("h", &p.h), ("beta", &p.beta), ("gamma", &p.gamma), ("e", &p.e)] {
            if let Some(src) = src {
                let e = Expr::parse(src).map_err(|e| schema(&format!("problem.{k}"), e.to_string()))?;
                let wrong = if k == "g" { Var::X } else { Var::U };
                check(!e.depends_on(wrong), &format!("problem.{k}"), "depends on the wrong variable")?;
            }
        }

        let n = self.grid.n;
        check(n >= 8 && n.is_multiple_of(2) && n <= 4096, "grid.n", "must be even in [8, 4096]")?;
        let s = &self.solver;
        check(positive_finite(s.tol) && s.tol < 1.0, "solver.tol", "must lie in (0, 1)")?;
        check(s.max_iter >= 1 && s.max_iter <= 10_000, "solver.max_iter", "must lie in [1, 10000]")?;
        check(s.seed_count >= 1 && s.seed_count <= 10_000, "solver.seed_count", "must lie in [1, 10000]")?;
        if let (Some(lo), Some(hi)) = (s.seed_lo, s.seed_hi) {
            check(lo <= hi, "solver.seed_hi", "must be >= seed_lo")?;
        }
        let c = &self.continuation;
        check(positive_finite(c.ds) && c.ds <= 10.0, "continuation.ds", "must lie in (0, 10]")?;
        check(c.max_steps >= 1 && c.max_steps <= 100_000, "continuation.max_steps", "must lie in [1, 100000]")?;
        check(c.direction == 1.0 || c.direction == -1.0, "continuation.direction", "must be 1 or -1")?;
        check(self.homotopy.steps >= 1 && self.homotopy.steps <= 100_000, "homotopy.steps", "must be >= 1")?;
        let o = &self.oracle;
        check(o.tol > 1e-14 && o.tol < 1.0, "oracle.tol", "must lie in (1e-14, 1)")?;
        check(positive_finite(o.threshold), "oracle.threshold", "must be > 0")?;
        Expr::parse(&o.field).map_err(|e| schema("oracle.field", e.to_string()))?;
        for (k, v) in [
            ("outputs.branch", &self.outputs.branch),
            ("outputs.fields", &self.outputs.fields),
            ("outputs.report", &self.outputs.report),
        ] {
            check(!v.is_empty(), k, "must be a file name")?;
        }
        Ok(())
    }

    pub fn grid(&self) -> PeriodicGrid {
        PeriodicGrid::new(self.grid.n).expect("validated")
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            ..Default::default()
        }
    }

    pub fn seed_range(&self) -> SeedRange {
        let (lo, hi) = match self.problem.family {
            FamilyTag::Smooth => (-3.0, 3.0),
            _ => (0.2, 3.0),
        };
        SeedRange {
            lo: self.solver.seed_lo.unwrap_or(lo),
            hi: self.solver.seed_hi.unwrap_or(hi),
            wiggle: 0.1,
        }
    }

    fn field(&self, src: Option<&str>, default: &str) -> Result<SpectralField> {
        let e = Expr::parse(src.unwrap_or(default))?;
        SpectralField::sample(self.grid(), |x| e.eval(x, 0.0))
    }

    /// Builds the problem at the configured `t`.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let p = &self.problem;
        match p.family {
            FamilyTag::Smooth => {
                let g = ScalarFn::from_expr(p.g.as_deref().expect("validated"))?;
                let coercive = p.coercive.unwrap_or_else(|| looks_coercive(&g));
                let h = self.field(p.h.as_deref(), "0")?;
                ProblemSpec::smooth(p.s, p.c, p.t.expect("validated"), h, g, coercive)
            }
            FamilyTag::SingularMems => {
                let beta = self.field(p.beta.as_deref(), "1")?;
                ProblemSpec::singular_mems(p.s, p.c, p.t.expect("validated"), p.mu.expect("validated"), beta)
            }
            FamilyTag::AttractiveRepulsive => ProblemSpec::attractive_repulsive(
                p.s,
                p.c,
                p.mu.expect("validated"),
                p.rho.expect("validated"),
                self.field(p.gamma.as_deref(), "1")?,
                self.field(p.beta.as_deref(), "0")?,
                self.field(p.e.as_deref(), "1")?,
            ),
        }
    }
}

/// `g` grows at both ends of a wide window.
fn looks_coercive(g: &ScalarFn) -> bool {
    let g0 = g.eval(0.0);
    [1e3, -1e3, 1e6, -1e6].iter().all(|&z| {
        let v = g.eval(z);
        v.is_finite() && v > g0 + 1.0
    })
}
