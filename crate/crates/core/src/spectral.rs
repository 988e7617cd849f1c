//! Periodic grids, discrete trigonometric transforms and the norms used by
//! the a-priori estimates.
//!
//! Fourier coefficients follow the convention
//! `u(x_j) = sum_k c_k exp(i k x_j)` with `c_k = (1/n) sum_j u_j exp(-i k x_j)`,
//! so `cos(x)` has `c_{+1} = c_{-1} = 1/2`. Coefficients are stored in FFT
//! order internally; [`SpectralField::coeffs_centered`] returns the
//! `k = -n/2 .. n/2-1` layout.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Uniform grid `x_j = 2 pi j / n` on one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("node count {n} is odd")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "node count {n} below minimum {}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Wavenumber stored at FFT index `idx`; index `n/2` is the Nyquist mode `-n/2`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let half = self.n / 2;
        if idx < half {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }
}

pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

pub fn inverse(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Periodic distance on the circle of length `2 pi`.
pub fn periodic_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub sup: f64,
    pub l2: f64,
    pub l2_deriv: f64,
}

/// A real 2π-periodic function held by its nodal values, with lazily cached
/// Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: PeriodicGrid,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl SpectralField {
    pub fn from_values(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch {
                field: values.len(),
                expected: grid.n(),
            });
        }
        if let Some((j, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::SampleError {
                x: grid.node(j),
                value: v,
            });
        }
        Ok(Self {
            grid,
            values,
            coeffs: OnceLock::new(),
        })
    }

    /// Samples a closed-form function at the grid nodes.
    pub fn sample(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n()],
            coeffs: OnceLock::new(),
        }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Builds a field from coefficients in FFT order. Only the real part of
    /// the inverse transform is kept.
    pub fn from_coeffs(grid: PeriodicGrid, coeffs: Vec<Complex64>) -> Self {
        let values = inverse(&coeffs);
        Self {
            grid,
            values,
            coeffs: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| forward(&self.values))
    }

    /// Coefficient of wavenumber `k` in `-n/2 .. n/2-1`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.n() as i64;
        assert!((-n / 2..n / 2).contains(&k), "wavenumber {k} outside grid");
        self.coeffs()[k.rem_euclid(n) as usize]
    }

    /// Coefficients in the layout `k = -n/2 .. n/2-1`.
    pub fn coeffs_centered(&self) -> Vec<Complex64> {
        let n = self.n() as i64;
        (-n / 2..n / 2).map(|k| self.coeff(k)).collect()
    }

    /// Applies a Fourier multiplier given as a function of the wavenumber.
    pub fn map_coeffs(&self, mut mult: impl FnMut(i64) -> Complex64) -> Self {
        let grid = self.grid;
        let out = self
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c * mult(grid.wavenumber(i)))
            .collect();
        Self::from_coeffs(grid, out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other)?;
        Self::from_values(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn shifted(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v + a).collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                field: other.n(),
                expected: self.n(),
            });
        }
        Ok(())
    }

    /// Nodal mean, which is the exact period average of a band-limited field.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        (TWO_PI * self.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `||u'||_{L^2}` computed from the spectral derivative, which drops the
    /// Nyquist mode.
    pub fn l2_deriv(&self) -> f64 {
        let nyq = self.grid.nyquist_index();
        let sum: f64 = self
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != nyq)
            .map(|(i, c)| (self.grid.wavenumber(i) as f64).powi(2) * c.norm_sqr())
            .sum();
        (TWO_PI * sum).sqrt()
    }

    pub fn norms(&self) -> Norms {
        Norms {
            sup: self.sup(),
            l2: self.l2(),
            l2_deriv: self.l2_deriv(),
        }
    }

    /// Gagliardo-type seminorm `sqrt(2 pi sum |k|^{2s} |c_k|^2)`.
    pub fn hs_seminorm(&self, s: f64) -> Result<f64> {
        check_order(s)?;
        let sum: f64 = self
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.grid.wavenumber(i).unsigned_abs() as f64;
                k.powf(2.0 * s) * c.norm_sqr()
            })
            .sum();
        Ok((TWO_PI * sum).sqrt())
    }

    /// Largest nodal Hölder quotient `|u_i - u_j| / d(x_i, x_j)^alpha` with the
    /// periodic distance. A grid diagnostic, not a bound.
    pub fn holder_quotient(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidExponent(alpha));
        }
        let n = self.n();
        let mut best = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = periodic_distance(self.grid.node(i), self.grid.node(j));
                let q = (self.values[i] - self.values[j]).abs() / d.powf(alpha);
                best = best.max(q);
            }
        }
        Ok(best)
    }

    /// Trapezoid inner product `(2 pi / n) sum_j a_j b_j`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    /// Sup-norm distance.
    pub fn dist_sup(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(s))
    }
}
