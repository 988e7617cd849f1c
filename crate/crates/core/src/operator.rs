//! The periodic fractional Laplacian through its Fourier multiplier, the
//! drift derivative, and the shifted resolvent.
//!
//! Sign convention: `(Δ)^s := -(-Δ)^s`, so the multiplier is `-|k|^{2s}`.

use rustfft::num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::spectral::{check_order, PeriodicGrid, SpectralField};

/// Multipliers `m_k = -|k|^{2s}` for a grid, in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSymbol {
    s: f64,
    multipliers: Vec<f64>,
}

impl FractionalSymbol {
    pub fn new(s: f64, grid: PeriodicGrid) -> Result<Self> {
        check_order(s)?;
        let multipliers = grid
            .wavenumbers()
            .into_iter()
            .map(|k| fractional_multiplier(s, k))
            .collect();
        Ok(Self { s, multipliers })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Multipliers in FFT order.
    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }
}

pub fn fractional_multiplier(s: f64, k: i64) -> f64 {
    if k == 0 {
        0.0
    } else {
        -(k.unsigned_abs() as f64).powf(2.0 * s)
    }
}

/// `(Δ)^s u`.
pub fn apply_fractional(field: &SpectralField, s: f64) -> Result<SpectralField> {
    check_order(s)?;
    Ok(field.map_coeffs(|k| fractional_multiplier(s, k).into()))
}

/// Spectral derivative `u'`. The Nyquist mode is dropped so the result stays real.
pub fn apply_derivative(field: &SpectralField) -> SpectralField {
    let nyq = -(field.n() as i64) / 2;
    field.map_coeffs(|k| derivative_multiplier(k, nyq))
}

fn derivative_multiplier(k: i64, nyq: i64) -> Complex64 {
    if k == nyq {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, k as f64)
    }
}

/// The constant `C_{1,s} = s 4^s Γ(s + 1/2) / (sqrt(pi) Γ(1 - s))`.
pub fn c1s_constant(s: f64) -> f64 {
    s * 4f64.powf(s) * gamma(s + 0.5) / (std::f64::consts::PI.sqrt() * gamma(1.0 - s))
}

/// The linear part `(Δ)^s + c d/dx` of every equation handled here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPart {
    pub s: f64,
    pub c: f64,
}

impl LinearPart {
    pub fn new(s: f64, c: f64) -> Result<Self> {
        check_order(s)?;
        Ok(Self { s, c })
    }

    pub fn symbol(&self, k: i64, n: usize) -> Complex64 {
        let nyq = -(n as i64) / 2;
        Complex64::new(fractional_multiplier(self.s, k), 0.0) + self.c * derivative_multiplier(k, nyq)
    }

    pub fn apply(&self, u: &SpectralField) -> SpectralField {
        let n = u.n();
        u.map_coeffs(|k| self.symbol(k, n))
    }

    /// Dense nodal matrix of the operator, row-major `n x n`.
    pub fn matrix(&self, grid: PeriodicGrid) -> Vec<f64> {
        let n = grid.n();
        // Circulant: column j is the shift of column 0.
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let col0 = self.apply(&SpectralField::from_values(grid, e0).expect("finite"));
        let col0 = col0.values();
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                m[i * n + j] = col0[(i + n - j) % n];
            }
        }
        m
    }
}

/// Solves `(Δ)^s u + c u' - sigma u = f` symbol-wise.
pub fn resolvent_solve(f: &SpectralField, s: f64, c: f64, sigma: f64) -> Result<SpectralField> {
    check_order(s)?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidShift(sigma));
    }
    let lin = LinearPart { s, c };
    let n = f.n();
    Ok(f.map_coeffs(|k| 1.0 / (lin.symbol(k, n) - sigma)))
}
