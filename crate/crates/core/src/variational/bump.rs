//! Radial bump `f̂(ξ) = c·ψ(|ξ|)` supported on the shell `1/2 < |ξ| ≤ 1`.

use std::f64::consts::PI;

use quadrature::double_exponential;

use crate::error::{Error, Result};

// ψ peaks at e^{-16}; integrands are rescaled by e^{32} to keep the
// quadrature tolerance meaningful.
const PEAK_LOG: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpProfile {
    dim: usize,
    norm: f64,
}

/// `ψ(r) = exp(−1/((r − 1/2)(1 − r)))` on `(1/2, 1)`, zero elsewhere.
pub fn psi(r: f64) -> f64 {
    psi_scaled(r) * (-PEAK_LOG).exp()
}

fn psi_scaled(r: f64) -> f64 {
    if r <= 0.5 || r >= 1.0 {
        return 0.0;
    }
    (PEAK_LOG - 1.0 / ((r - 0.5) * (1.0 - r))).exp()
}

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked by caller"),
    }
}

impl BumpProfile {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("bump in dimension {dim}")));
        }
        let scaled = radial_l2(dim, 1.0);
        Ok(BumpProfile {
            dim,
            norm: PEAK_LOG.exp() / scaled.sqrt(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `f̂` at a point of modulus `r`.
    pub fn fourier(&self, r: f64) -> f64 {
        self.norm * psi(r)
    }

    /// `∫_{ℝ^d} f̂(ξ)² dξ` recomputed by quadrature; 1 up to quadrature error.
    pub fn l2_norm_sq(&self) -> f64 {
        let c = self.norm * (-PEAK_LOG).exp();
        radial_l2(self.dim, c * c)
    }
}

fn radial_l2(dim: usize, scale: f64) -> f64 {
    let out = double_exponential::integrate(
        |r| {
            let p = psi_scaled(r);
            scale * p * p * r.powi(dim as i32 - 1)
        },
        0.5,
        1.0,
        1e-14,
    );
    sphere_area(dim) * out.integral
}
