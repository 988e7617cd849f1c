use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::{ExperimentConfig, FamilyTag, StartBranch};
use super::export::{branch_csv, fields_csv, num, BranchRow};
use crate::certificates::{certify, verify_bounds, verify_identities, CertificateReport};
use crate::continuation::{continue_arclength, locate_fold, mawhin_homotopy, ArclengthOptions, Branch};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::operator::apply_fractional;
use crate::problem::ProblemSpec;
use crate::pv::{build_pv_kernel, pv_apply};
use crate::solver::{deflated_search, default_seeds, Solution};
use crate::spectral::SpectralField;

pub const EXIT_OK: i32 = 0;
/// Configuration or file-system error.
pub const EXIT_IO: i32 = 1;
/// Certified nonexistence: `t < θ`.
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Continue,
    Fold,
    Homotopy,
    Certify,
    OracleCheck,
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "solve" => Self::Solve,
            "continue" => Self::Continue,
            "fold" => Self::Fold,
            "homotopy" => Self::Homotopy,
            "certify" => Self::Certify,
            "oracle-check" => Self::OracleCheck,
            other => return Err(Error::InvalidProblem(format!("unknown command '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutcome {
    pub code: i32,
    pub artifacts: Vec<PathBuf>,
    pub stdout: String,
    pub stderr: String,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    outcome: RunOutcome,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, text)?;
        self.outcome.artifacts.push(path);
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.outcome.stdout.push_str(&line);
        self.outcome.stdout.push('\n');
    }

    fn fail(&mut self, code: i32, msg: String) {
        self.outcome.code = code;
        self.outcome.stderr.push_str(&msg);
        self.outcome.stderr.push('\n');
    }
}

/// Runs a command, writing artifacts under `out_dir`. Errors are mapped to
/// exit codes with the message in `stderr`.
pub fn run_command(cmd: Command, cfg: &ExperimentConfig, out_dir: &Path) -> RunOutcome {
    let mut ctx = Ctx {
        cfg,
        out: out_dir,
        outcome: RunOutcome::default(),
    };
    let res = std::fs::create_dir_all(out_dir).map_err(Error::from).and_then(|_| match cmd {
        Command::Solve => solve(&mut ctx),
        Command::Continue => branch_cmd(&mut ctx, false),
        Command::Fold => branch_cmd(&mut ctx, true),
        Command::Homotopy => homotopy(&mut ctx),
        Command::Certify => certify_cmd(&mut ctx),
        Command::OracleCheck => oracle(&mut ctx),
    });
    if let Err(e) = res {
        let code = match e {
            Error::Io(_) | Error::SchemaError { .. } => EXIT_IO,
            _ => EXIT_FAILURE,
        };
        ctx.fail(code, format!("error: {e}"));
    }
    ctx.outcome
}

fn base_report(p: &ProblemSpec) -> CertificateReport {
    let mut r = certify(p, None).unwrap_or_default();
    if r.family.is_empty() {
        r.family = format!("{:?}", p.family()).to_lowercase();
    }
    if let Some(t) = p.t {
        r.extra.insert("t".into(), t);
    }
    r
}

/// Writes the report and sets exit code 2 when `t < θ`.
fn check_infeasible(ctx: &mut Ctx, p: &ProblemSpec, report: &mut CertificateReport) -> Result<bool> {
    let Some(t) = p.t else { return Ok(false) };
    if !report.infeasible(t) {
        return Ok(false);
    }
    report.flags.insert("infeasible".into(), true);
    let theta = report.theta.expect("infeasible implies theta");
    ctx.write(&ctx.cfg.outputs.report.clone(), &report.to_kv())?;
    ctx.say(format!("infeasible: t={} < theta={}", num(t), num(theta)));
    ctx.fail(EXIT_INFEASIBLE, format!("certified infeasible: t = {t} < theta = {theta}"));
    Ok(true)
}

fn annotate(report: &mut CertificateReport, p: &ProblemSpec, prefix: &str, sol: &Solution) -> Result<()> {
    let ids = verify_identities(sol, p)?;
    for (k, v) in ids.to_map() {
        report.identity_residuals.insert(format!("{prefix}.{k}"), v);
    }
    if let Ok(flags) = verify_bounds(sol, report, p) {
        for f in flags {
            report.flags.insert(format!("{prefix}.{}", f.name), f.pass);
        }
    }
    Ok(())
}

fn seeds(cfg: &ExperimentConfig) -> Vec<SpectralField> {
    default_seeds(cfg.grid(), cfg.solver.seed_count, cfg.solver.seeds, cfg.seed_range())
}

fn solve(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let p = cfg.problem_spec()?;
    let mut report = base_report(&p);
    if check_infeasible(ctx, &p, &mut report)? {
        return Ok(());
    }
    let mut sols = deflated_search(&p, &seeds(cfg), &cfg.newton());
    if sols.is_empty() {
        ctx.fail(EXIT_FAILURE, format!("no solution found from {} seeds", cfg.solver.seed_count));
        return Ok(());
    }
    sols.sort_by(|a, b| b.diagnostics.mean.total_cmp(&a.diagnostics.mean));
    report.extra.insert("solution_count".into(), sols.len() as f64);
    for (i, s) in sols.iter().enumerate() {
        annotate(&mut report, &p, &format!("sol{i}"), s)?;
    }
    let rows: Vec<BranchRow> = sols.iter().map(|s| BranchRow::of(s, false)).collect();
    ctx.write(&cfg.outputs.branch, &branch_csv(&rows)?)?;
    ctx.write(&cfg.outputs.fields, &fields_csv(&sols)?)?;
    ctx.write(&cfg.outputs.report, &report.to_kv())?;
    ctx.say(format!("solutions={}", sols.len()));
    for s in &sols {
        ctx.say(format!("u_mean={} residual_sup={}", num(s.diagnostics.mean), num(s.residual_sup)));
    }
    Ok(())
}

fn trace(cfg: &ExperimentConfig, p: &ProblemSpec) -> Result<Branch> {
    let mut sols = deflated_search(p, &seeds(cfg), &cfg.newton());
    sols.sort_by(|a, b| b.diagnostics.mean.total_cmp(&a.diagnostics.mean));
    if cfg.continuation.start == StartBranch::Lower {
        sols.reverse();
    }
    let seed = sols
        .into_iter()
        .next()
        .ok_or_else(|| Error::SeedFailed("no solution at the starting t".into()))?;
    let [t_min, t_max] = cfg.problem.t_range.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    let opts = ArclengthOptions {
        newton: cfg.newton(),
        ds: cfg.continuation.ds,
        max_steps: cfg.continuation.max_steps,
        direction: cfg.continuation.direction,
        t_min,
        t_max,
        ..Default::default()
    };
    continue_arclength(p, &seed, &opts)
}

fn branch_cmd(ctx: &mut Ctx, fold: bool) -> Result<()> {
    let cfg = ctx.cfg;
    if cfg.problem.family == FamilyTag::AttractiveRepulsive {
        return Err(Error::InvalidProblem("continuation needs a family with parameter t".into()));
    }
    let p = cfg.problem_spec()?;
    let mut report = base_report(&p);
    if check_infeasible(ctx, &p, &mut report)? {
        return Ok(());
    }
    let branch = trace(cfg, &p)?;
    ctx.write(&cfg.outputs.branch, &branch_csv(&BranchRow::rows(&branch))?)?;
    ctx.write(&cfg.outputs.fields, &fields_csv(&branch.points)?)?;
    report.extra.insert("branch_points".into(), branch.points.len() as f64);
    report.extra.insert("fold_count".into(), branch.folds.len() as f64);
    ctx.say(format!("points={} folds={}", branch.points.len(), branch.folds.len()));
    if fold {
        match locate_fold(&p, &branch, &cfg.newton()) {
            Ok(f) => {
                report.set_fold(f.t1);
                report.extra.insert("fold_u_mean".into(), f.solution.diagnostics.mean);
                report.extra.insert("fold_residual_sup".into(), f.solution.residual_sup);
                ctx.say(format!("t1={}", num(f.t1)));
            }
            Err(e) => {
                ctx.write(&cfg.outputs.report, &report.to_kv())?;
                ctx.fail(EXIT_FAILURE, format!("error: {e}"));
                return Ok(());
            }
        }
    }
    ctx.write(&cfg.outputs.report, &report.to_kv())?;
    Ok(())
}

fn homotopy(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let p = cfg.problem_spec()?;
    let run = mawhin_homotopy(&p, cfg.homotopy.steps, &cfg.newton())?;
    let mut report = base_report(&p);
    report.extra.insert("a_start".into(), run.a_start);
    report.extra.insert("homotopy_states".into(), run.states.len() as f64);
    annotate(&mut report, &p, "sol0", &run.solution)?;

    let mut csv = String::from("lambda,u_mean,u_min,u_max,l2_deriv,residual_sup,iterations\n");
    for st in &run.states {
        let d = &st.solution.diagnostics;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            num(st.lambda),
            num(d.mean),
            num(d.min),
            num(d.max),
            num(d.l2_deriv),
            num(st.solution.residual_sup),
            st.solution.iterations
        );
    }
    ctx.write(&cfg.outputs.branch, &csv)?;
    ctx.write(&cfg.outputs.fields, &fields_csv(std::slice::from_ref(&run.solution))?)?;
    ctx.write(&cfg.outputs.report, &report.to_kv())?;
    ctx.say(format!("a_start={}", num(run.a_start)));
    ctx.say(format!("residual_sup={}", num(run.solution.residual_sup)));
    Ok(())
}

fn certify_cmd(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let p = cfg.problem_spec()?;
    let mut report = certify(&p, None)?;
    if let Some(t) = p.t {
        report.extra.insert("t".into(), t);
    }
    if check_infeasible(ctx, &p, &mut report)? {
        return Ok(());
    }
    ctx.write(&cfg.outputs.report, &report.to_kv())?;
    ctx.say(report.to_kv().trim_end().to_string());
    Ok(())
}

fn oracle(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let grid = cfg.grid();
    let s = cfg.problem.s;
    let e = Expr::parse(&cfg.oracle.field)?;
    let u = SpectralField::sample(grid, |x| e.eval(x, 0.0))?;
    let kernel = build_pv_kernel(s, grid, cfg.oracle.tol)?;
    let pv = pv_apply(&u, &kernel)?;
    let spectral = apply_fractional(&u, s)?;
    let diff = pv.dist_sup(&spectral);
    let pass = diff <= cfg.oracle.threshold;
    let mut text = String::new();
    let _ = writeln!(text, "s={}", num(s));
    let _ = writeln!(text, "n={}", grid.n());
    let _ = writeln!(text, "c1s={}", num(kernel.c1s()));
    let _ = writeln!(text, "image_count={}", kernel.image_count());
    let _ = writeln!(text, "panels={}", kernel.panels());
    let _ = writeln!(text, "quadrature_error={}", num(kernel.quadrature_error()));
    let _ = writeln!(text, "tail_bound={}", num(kernel.tail_bound()));
    let _ = writeln!(text, "max_abs_diff={}", num(diff));
    let _ = writeln!(text, "threshold={}", num(cfg.oracle.threshold));
    let _ = writeln!(text, "flag.oracle={}", if pass { "pass" } else { "fail" });
    ctx.write(&cfg.outputs.report, &text)?;
    ctx.say(format!("max_abs_diff={}", num(diff)));
    if !pass {
        ctx.fail(
            EXIT_FAILURE,
            format!("oracle mismatch {diff:e} exceeds {:e}", cfg.oracle.threshold),
        );
    }
    Ok(())
}
