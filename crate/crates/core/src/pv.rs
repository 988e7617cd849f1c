//! Principal-value quadrature for `(Δ)^s`, used as an independent check on
//! the Fourier multiplier.
//!
//! For a 2π-periodic `u`,
//! `(Δ)^s u(x) = C_{1,s} ∫_0^{2π} [u(x+w) + u(x-w) - 2u(x)] K(w) dw` with the
//! periodized kernel `K(w) = Σ_{m≥0} (w + 2πm)^{-(1+2s)}`. The symmetric
//! second difference is `O(w^2)`, so the integrand behaves like `w^{1-2s}`
//! at the origin and a graded Gauss-Legendre rule handles it without any
//! cancellation.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::c1s_constant;
use crate::spectral::{check_order, inverse, PeriodicGrid, SpectralField, TWO_PI};

const POINTS_PER_PANEL: usize = 8;
const MIN_PANELS: usize = 16;
const MAX_PANELS: usize = 1 << 15;
const MAX_IMAGES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct PVKernel {
    s: f64,
    c1s: f64,
    grid: PeriodicGrid,
    image_count: usize,
    panels: usize,
    grading: f64,
    /// Quadrature abscissae in `(0, 2π)`, increasing.
    nodes: Vec<f64>,
    /// Gauss-Legendre weights on the graded panels.
    weights: Vec<f64>,
    /// Periodized kernel at each abscissa.
    kernel: Vec<f64>,
    /// Self-convergence estimate of the quadrature error, scaled by `c1s`.
    quadrature_error: f64,
    /// Truncation bound on the image sum.
    tail_bound: f64,
}

impl PVKernel {
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn c1s(&self) -> f64 {
        self.c1s
    }
    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }
    pub fn image_count(&self) -> usize {
        self.image_count
    }
    pub fn panels(&self) -> usize {
        self.panels
    }
    pub fn grading(&self) -> f64 {
        self.grading
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn kernel_values(&self) -> &[f64] {
        &self.kernel
    }
    pub fn quadrature_error(&self) -> f64 {
        self.quadrature_error
    }
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

/// Euler-Maclaurin remainder bound for `Σ_{m≥M} (w + 2πm)^{-a}` after the
/// integral, endpoint, `B_2` and `B_4` corrections, evaluated at the worst
/// case `w = 0`. The summand is completely monotone so the first omitted
/// term bounds the error.
pub fn image_tail_bound(s: f64, images: usize) -> f64 {
    let a = 1.0 + 2.0 * s;
    let poch: f64 = (0..5).map(|i| a + i as f64).product();
    let b6 = 1.0 / 42.0;
    let fact6 = 720.0;
    b6 / fact6 * poch * TWO_PI.powi(5) * (TWO_PI * images as f64).powf(-a - 5.0)
}

/// Periodized kernel with `images` explicit terms and an Euler-Maclaurin tail.
pub fn periodized_kernel(s: f64, w: f64, images: usize) -> f64 {
    let a = 1.0 + 2.0 * s;
    let mut sum: f64 = (0..images).map(|m| (w + TWO_PI * m as f64).powf(-a)).sum();
    let z = w + TWO_PI * images as f64;
    // ∫_M^∞ f + f(M)/2 - (1/12) f'(M) + (1/720) f'''(M)
    let integral = z.powf(1.0 - a) / (TWO_PI * (a - 1.0));
    let f = z.powf(-a);
    let d1 = -a * TWO_PI * z.powf(-a - 1.0);
    let d3 = -a * (a + 1.0) * (a + 2.0) * TWO_PI.powi(3) * z.powf(-a - 3.0);
    sum += integral + 0.5 * f - d1 / 12.0 + d3 / 720.0;
    sum
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn graded_rule(panels: usize, grading: f64, gl: &GaussLegendre) -> Rule {
    let mut nodes = Vec::with_capacity(panels * POINTS_PER_PANEL);
    let mut weights = Vec::with_capacity(panels * POINTS_PER_PANEL);
    let edge = |q: usize| TWO_PI * (q as f64 / panels as f64).powf(grading);
    for q in 0..panels {
        let (a, b) = (edge(q), edge(q + 1));
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        // gauss-quad lists nodes in decreasing order
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (x, wt) in pairs {
            let w = mid + half * x;
            // strong grading pushes the first abscissae below any useful
            // scale; their contribution is O(w^{2-2s})
            if w < 1e-100 {
                continue;
            }
            nodes.push(w);
            weights.push(half * wt);
        }
    }
    Rule { nodes, weights }
}

/// `2cos(kw) - 2`, written to avoid cancellation at small `w`.
fn second_difference_factor(k: f64, w: f64) -> f64 {
    let h = (0.5 * k * w).sin();
    -4.0 * h * h
}

/// Integrals `∫ (2cos(kw) - 2) K(w) dw` for `k = 1..=n/2` under a rule.
fn probe_integrals(rule: &Rule, kernel: &[f64], kmax: usize) -> Vec<f64> {
    (1..=kmax)
        .map(|k| {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .zip(kernel)
                .map(|((&w, &wt), &kv)| wt * kv * second_difference_factor(k as f64, w))
                .sum()
        })
        .collect()
}

/// Builds the graded quadrature and image count so that both the kernel
/// truncation and the quadrature self-convergence estimate fall below
/// `target_tol`.
pub fn build_pv_kernel(s: f64, grid: PeriodicGrid, target_tol: f64) -> Result<PVKernel> {
    check_order(s)?;
    if !(target_tol > 1e-14) || !target_tol.is_finite() {
        return Err(Error::ToleranceUnreachable(target_tol));
    }
    let c1s = c1s_constant(s);

    let mut images = 1;
    while image_tail_bound(s, images) >= target_tol {
        images *= 2;
        if images > MAX_IMAGES {
            return Err(Error::ToleranceUnreachable(target_tol));
        }
    }
    let tail_bound = image_tail_bound(s, images);

    let grading = f64::max(2.0, 2.0 / (1.0 - s));
    let gl = GaussLegendre::new(NonZeroUsize::new(POINTS_PER_PANEL).unwrap());
    let kmax = grid.n() / 2;

    let kernel_on = |rule: &Rule| -> Vec<f64> {
        rule.nodes
            .iter()
            .map(|&w| periodized_kernel(s, w, images))
            .collect()
    };

    let mut panels = MIN_PANELS;
    let mut rule = graded_rule(panels, grading, &gl);
    let mut kern = kernel_on(&rule);
    let mut prev = probe_integrals(&rule, &kern, kmax);
    loop {
        let next_panels = panels * 2;
        if next_panels > MAX_PANELS {
            return Err(Error::ToleranceUnreachable(target_tol));
        }
        let next_rule = graded_rule(next_panels, grading, &gl);
        let next_kern = kernel_on(&next_rule);
        let next = probe_integrals(&next_rule, &next_kern, kmax);
        let err = c1s
            * prev
                .iter()
                .zip(&next)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        panels = next_panels;
        rule = next_rule;
        kern = next_kern;
        prev = next;
        if err < target_tol {
            return Ok(PVKernel {
                s,
                c1s,
                grid,
                image_count: images,
                panels,
                grading,
                nodes: rule.nodes,
                weights: rule.weights,
                kernel: kern,
                quadrature_error: err,
                tail_bound,
            });
        }
    }
}

/// Evaluates `(Δ)^s u` at every node by quadrature over the second
/// difference, with `u(x ± w)` taken from the trigonometric interpolant.
pub fn pv_apply(field: &SpectralField, kernel: &PVKernel) -> Result<SpectralField> {
    if field.grid() != kernel.grid {
        return Err(Error::GridMismatch {
            field: field.n(),
            expected: kernel.grid.n(),
        });
    }
    let grid = field.grid();
    let n = grid.n();
    let coeffs = field.coeffs();
    let ks: Vec<f64> = grid.wavenumbers().into_iter().map(|k| k as f64).collect();
    let mut acc = vec![0.0; n];
    let mut shifted = vec![Complex64::new(0.0, 0.0); n];
    for ((&w, &wt), &kv) in kernel.nodes.iter().zip(&kernel.weights).zip(&kernel.kernel) {
        // interpolant at x+w plus interpolant at x-w, minus 2u(x): each mode
        // picks up exp(ikw) + exp(-ikw) - 2
        for ((dst, &c), &k) in shifted.iter_mut().zip(coeffs).zip(&ks) {
            *dst = c * second_difference_factor(k, w);
        }
        let second_diff = inverse(&shifted);
        let scale = wt * kv;
        for (a, d) in acc.iter_mut().zip(second_diff) {
            *a += scale * d;
        }
    }
    let c1s = kernel.c1s;
    SpectralField::from_values(grid, acc.into_iter().map(|v| c1s * v).collect())
}
