//! Mode-wise law of the low-pass process `Z_M`.
//!
//! Per mode, `Y(t) = w B(t)` with `w = ⟨n⟩^{-d/2}` and `dZ = λ(Y − Z)dt`,
//! `λ = ⟨n⟩^{-d/2} M^{d/2}`. Then `X = Y − Z` solves `dX = −λX dt + w dB`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{bracket_from_norm2, norm2, radial_sum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMoments {
    pub var_y: f64,
    pub var_x: f64,
    pub cov_yx: f64,
}

pub fn relaxation_rate(dim: usize, n2: u64, m: usize) -> f64 {
    let half = dim as f64 / 2.0;
    bracket_from_norm2(n2).powf(-half) * (m as f64).powf(half)
}

/// `(1 − e^{-x})/x`, stable near 0.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x / 2.0
    } else {
        -(-x).exp_m1() / x
    }
}

pub fn zm_moments_exact(n: &[i64], m: usize) -> Result<ModeMoments> {
    let n2 = norm2(n);
    if n2 > (m * m) as u64 {
        return Err(Error::InvalidParameter(format!(
            "mode {n:?} lies outside |n| ≤ M = {m}"
        )));
    }
    Ok(moments_from_norm2(n.len(), n2, m))
}

pub fn moments_from_norm2(dim: usize, n2: u64, m: usize) -> ModeMoments {
    let lam = relaxation_rate(dim, n2, m);
    let var_y = bracket_from_norm2(n2).powi(-(dim as i32));
    ModeMoments {
        var_y,
        var_x: var_y * phi1(2.0 * lam),
        cov_yx: var_y * phi1(lam),
    }
}

/// `Σ_{|n|≤M} (varY − varX) = E[2∫Y_N Z_M − ∫Z_M²]`.
pub fn alpha_numerator(dim: usize, m: usize) -> f64 {
    radial_sum(dim, m, |n2| {
        let mo = moments_from_norm2(dim, n2, m);
        mo.var_y - mo.var_x
    })
}

/// `E|Z_M(x)|² = Σ_{|n|≤M} (varY − 2cov + varX)`.
pub fn zm_pointwise_variance(dim: usize, m: usize) -> f64 {
    radial_sum(dim, m, |n2| {
        let mo = moments_from_norm2(dim, n2, m);
        mo.var_y - 2.0 * mo.cov_yx + mo.var_x
    })
}

/// `E|∫:(Y_N − Z_M)²:dx|² = 2Σ_{|n|≤N} Var(X̂_n)²`, with `X = Y` above `M`.
pub fn wick_residual_second_moment(dim: usize, m: usize, n: usize) -> f64 {
    radial_sum(dim, n, |n2| {
        let v = if n2 <= (m * m) as u64 {
            moments_from_norm2(dim, n2, m).var_x
        } else {
            bracket_from_norm2(n2).powi(-(dim as i32))
        };
        2.0 * v * v
    })
}

/// Conditional expectation of the continuous-time drift cost of one mode
/// given its terminal values.
///
/// For the drift `d(t) = −λX(t) + c` the cost is `∫₀¹|d(t)|²dt`; given
/// `V = (Y(1), X(1))` it equals
/// `λ²w²·r + λ²(b₁₁|Y|² + b₂₂|X|² + 2b₁₂Re(Y X̄)) − 2λc Re(j₁Y + j₂X) + c²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalCost {
    pub lambda: f64,
    pub residual: f64,
    pub b11: f64,
    pub b22: f64,
    pub b12: f64,
    pub j1: f64,
    pub j2: f64,
}

impl ConditionalCost {
    pub fn new(lambda: f64) -> Self {
        let l = lambda;
        let e = (-l).exp();
        let e2 = e * e;
        // unit-weight covariances of X(t) with Y(1), X(1), and itself
        let b = phi1(2.0 * l);
        let c0 = phi1(l);
        let det = b - c0 * c0;
        let int_p = (1.0 - phi1(l)) / l;
        let int_q = (1.0 - e).powi(2) / (2.0 * l * l);
        let int_v = (1.0 - phi1(2.0 * l)) / (2.0 * l);
        let int_pp = (1.0 - 2.0 * phi1(l) + phi1(2.0 * l)) / (l * l);
        let int_qq = ((1.0 - e2 * e2) / (2.0 * l) - 2.0 * e2) / (4.0 * l * l);
        let int_pq = ((1.0 - e).powi(2) / l - e + e * (1.0 - e2) / (2.0 * l)) / (2.0 * l * l);
        let explained = (b * int_pp - 2.0 * c0 * int_pq + int_qq) / det;
        let d2 = det * det;
        ConditionalCost {
            lambda: l,
            residual: int_v - explained,
            b11: (b * b * int_pp - 2.0 * b * c0 * int_pq + c0 * c0 * int_qq) / d2,
            b22: (int_qq - 2.0 * c0 * int_pq + c0 * c0 * int_pp) / d2,
            b12: (b * int_pq - b * c0 * int_pp - c0 * int_qq + c0 * c0 * int_pq) / d2,
            j1: (b * int_p - c0 * int_q) / det,
            j2: (int_q - c0 * int_p) / det,
        }
    }

    /// `E[∫|−λX + c|² | Y(1) = y, X(1) = x]` for a mode of weight `w`.
    pub fn eval(&self, w: f64, y: Complex64, x: Complex64, c: f64) -> f64 {
        let l = self.lambda;
        let quad = self.b11 * y.norm_sqr() + self.b22 * x.norm_sqr() + 2.0 * self.b12 * (y * x.conj()).re;
        let lin = self.j1 * y.re + self.j2 * x.re;
        l * l * (w * w * self.residual + quad) - 2.0 * l * c * lin + c * c
    }

    /// Unconditional mean `λ²w²∫Var X(t)dt + c²`.
    pub fn mean(&self, w: f64, c: f64) -> f64 {
        let l = self.lambda;
        let int_v = (1.0 - phi1(2.0 * l)) / (2.0 * l);
        l * l * w * w * int_v + c * c
    }
}
