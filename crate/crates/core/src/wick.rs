//! Hermite/complex Wick calculus and the renormalized potential energies.
//!
//! Real Wick powers are `:u_N^k: = H_k(u_N; σ_N)`. Complex even powers use the
//! explicit forms `:|u|²: = |u|² − σ` and `:|u|⁴: = |u|⁴ − 4σ|u|² + 2σ²`.

use crate::error::{Error, Result};
use crate::field::{integrate, Grid, Reality, SpectralField};

pub const MAX_ORDER: usize = 8;

/// Hermite polynomial `H_k(x; σ)` with variance parameter `σ`.
pub fn hermite(k: usize, x: f64, sigma: f64) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::HermiteOrder(k));
    }
    Ok(hermite_unchecked(k, x, sigma))
}

#[inline]
pub(crate) fn hermite_unchecked(k: usize, x: f64, s: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        2 => x * x - s,
        3 => x * (x * x - 3.0 * s),
        4 => {
            let x2 = x * x;
            x2 * x2 - 6.0 * s * x2 + 3.0 * s * s
        }
        _ => {
            let (mut prev, mut cur) = (hermite_unchecked(3, x, s), hermite_unchecked(4, x, s));
            for j in 4..k {
                let next = x * cur - j as f64 * s * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Plain three-term recursion from `H_0, H_1`, without the closed forms.
pub fn hermite_recursive(k: usize, x: f64, s: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * s * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Variance parameter and order used to renormalize powers of one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickContext {
    pub sigma: f64,
    pub order: usize,
    pub reality: Reality,
}

impl WickContext {
    /// Context with `σ = σ_N` of the field's lattice.
    pub fn for_field(field: &SpectralField, order: usize) -> Self {
        WickContext {
            sigma: field.lattice().sigma(),
            order,
            reality: field.reality(),
        }
    }

    pub fn check(&self, field: &SpectralField) -> Result<()> {
        check_sigma(self.sigma, field)
    }
}

pub(crate) fn check_sigma(sigma: f64, field: &SpectralField) -> Result<()> {
    let expected = field.lattice().sigma();
    if (sigma - expected).abs() > 1e-12 * expected.max(1.0) {
        return Err(Error::SigmaMismatch {
            given: sigma,
            expected,
        });
    }
    Ok(())
}

/// Pointwise `H_k(u_N(x_j); σ_N)` on the grid.
pub fn wick_power(field: &SpectralField, k: usize, ctx: &WickContext) -> Result<Grid<f64>> {
    if !field.is_real() {
        return Err(Error::FieldMismatch(
            "real Wick powers need a real field; use the complex variants".into(),
        ));
    }
    if k > MAX_ORDER {
        return Err(Error::HermiteOrder(k));
    }
    ctx.check(field)?;
    let s = ctx.sigma;
    Ok(field.to_grid()?.map(|u| hermite_unchecked(k, u, s)))
}

fn modulus_sq_grid(field: &SpectralField, ctx: &WickContext) -> Result<Grid<f64>> {
    if field.is_real() {
        return Err(Error::FieldMismatch("complex Wick powers need a complex field".into()));
    }
    ctx.check(field)?;
    Ok(field.to_complex_grid().map(|z| z.norm_sqr()))
}

/// `:|u_N|²: = |u_N|² − σ_N`.
pub fn complex_wick_square(field: &SpectralField, ctx: &WickContext) -> Result<Grid<f64>> {
    let s = ctx.sigma;
    Ok(modulus_sq_grid(field, ctx)?.map(|m| m - s))
}

/// `:|u_N|⁴: = |u_N|⁴ − 4σ_N|u_N|² + 2σ_N²`.
pub fn complex_wick_quartic(field: &SpectralField, ctx: &WickContext) -> Result<Grid<f64>> {
    let s = ctx.sigma;
    Ok(modulus_sq_grid(field, ctx)?.map(|m| complex_quartic(m, s)))
}

#[inline]
pub(crate) fn complex_quartic(m: f64, s: f64) -> f64 {
    m * m - 4.0 * s * m + 2.0 * s * s
}

/// `∫ :u_N²: dx = Σ|û(n)|² − σ_N`, computed spectrally. For complex fields
/// this is `∫ :|u_N|²: dx`.
pub fn wick_mass(field: &SpectralField) -> f64 {
    field.l2_norm_sq() - field.lattice().sigma()
}

/// `R_N(u) = (σ/k) ∫ :u_N^k: dx` for `k ∈ {3, 4}`; complex fields use the
/// complex quartic (only `k = 4`).
pub fn potential_rn(field: &SpectralField, coupling: f64, k: usize) -> Result<f64> {
    if !(k == 3 || k == 4) {
        return Err(Error::UnsupportedOrder(k));
    }
    let ctx = WickContext::for_field(field, k);
    let grid = match field.reality() {
        Reality::Real => wick_power(field, k, &ctx)?,
        Reality::Complex if k == 4 => complex_wick_quartic(field, &ctx)?,
        Reality::Complex => return Err(Error::UnsupportedOrder(k)),
    };
    Ok(coupling / k as f64 * integrate(&grid))
}

/// `𝓡_N(u) = (σ/3) ∫ :u_N³: dx − A (∫ :u_N²: dx)²`.
pub fn potential_cubic_tamed(field: &SpectralField, coupling: f64, taming: f64) -> Result<f64> {
    let ctx = WickContext::for_field(field, 3);
    let cubic = integrate(&wick_power(field, 3, &ctx)?);
    let mass = wick_mass(field);
    Ok(coupling / 3.0 * cubic - taming * mass * mass)
}

/// Taming exponent `γ = (4α − d)/(2α − d)` for the smooth law `μ_α`.
pub fn tamed_gamma(alpha: f64, dim: usize) -> Result<f64> {
    let d = dim as f64;
    if alpha.is_nan() || alpha <= d / 2.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed d/2")));
    }
    Ok((4.0 * alpha - d) / (2.0 * alpha - d))
}

/// `(σ/4) ∫ u_N⁴ dx − A (∫ u_N² dx)^γ`, no renormalization.
pub fn potential_quartic_tamed_smooth(field: &SpectralField, coupling: f64, taming: f64, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let grid = field.to_grid()?;
    let quartic = integrate(&grid.map(|u| u * u * u * u));
    let mass = field.l2_norm_sq();
    Ok(coupling / 4.0 * quartic - taming * mass.powf(gamma))
}

/// Binomial expansion of `(σ/k) ∫ H_k(Y + Θ; σ_N) dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftExpansion {
    pub total: f64,
    /// `terms[ℓ] = (σ/k) C(k,ℓ) ∫ Θ^{k−ℓ} H_ℓ(Y; σ_N) dx`.
    pub terms: Vec<f64>,
}

/// Expands `(σ/k)∫ :(Y+Θ)^k:` as `Σ_ℓ C(k,ℓ) ∫ Θ^{k−ℓ} :Y^ℓ:`. `Θ` must be
/// real and supported inside the cutoff of `Y`.
pub fn wick_shift_expand(
    y: &SpectralField,
    theta: &SpectralField,
    k: usize,
    sigma_n: f64,
    coupling: f64,
) -> Result<ShiftExpansion> {
    if k > MAX_ORDER {
        return Err(Error::HermiteOrder(k));
    }
    if !y.is_real() || !theta.is_real() {
        return Err(Error::FieldMismatch("shift expansion needs real fields".into()));
    }
    check_sigma(sigma_n, y)?;
    let theta = align_support(y, theta)?;
    let (gy, gt) = SpectralField::to_grid_pair(y, &theta)?;
    Ok(shift_expand_grids(&gy, &gt, k, sigma_n, coupling))
}

/// Brings `theta` onto the lattice of `y`, rejecting any mass outside `|n| ≤ N`.
pub(crate) fn align_support(y: &SpectralField, theta: &SpectralField) -> Result<SpectralField> {
    if theta.spec() == y.spec() {
        return Ok(theta.clone());
    }
    let n = y.lattice().cutoff();
    if theta.lattice().dim() != y.lattice().dim() {
        return Err(Error::FieldMismatch("dimension mismatch".into()));
    }
    if theta.lattice().cutoff() > n {
        if theta.support_norm2() > (n * n) as u64 {
            return Err(Error::Support(format!(
                "shift has modes beyond the cutoff N = {n}"
            )));
        }
        theta.restrict(y.lattice().clone())
    } else {
        theta.extend(y.lattice().clone())
    }
}

pub(crate) fn shift_expand_grids(gy: &Grid<f64>, gt: &Grid<f64>, k: usize, s: f64, coupling: f64) -> ShiftExpansion {
    let len = gy.values.len();
    let mut sums = vec![vec![0.0; len]; k + 1];
    for (j, (&yv, &tv)) in gy.values.iter().zip(&gt.values).enumerate() {
        let mut tpow = 1.0;
        for l in (0..=k).rev() {
            sums[l][j] = tpow * hermite_unchecked(l, yv, s);
            tpow *= tv;
        }
    }
    let scale = coupling / k as f64;
    let terms: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(l, v)| scale * binomial(k, l) * crate::stats::pairwise_sum(v) / len as f64)
        .collect();
    let total = crate::stats::pairwise_sum(&terms);
    ShiftExpansion { total, terms }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
