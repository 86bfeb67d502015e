//! Per-sample Boué–Dupuis integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{integrate, Grid, SpectralField};
use crate::spectrum::{bracket_from_norm2, Lattice, LatticeSpec};
use crate::transform::{next_fast_size, GridTransform};
use crate::wick::{
    align_support, complex_wick_quartic, shift_expand_grids, wick_mass, wick_power, ShiftExpansion, WickContext,
};

#[derive(Clone, Debug, PartialEq)]
pub struct QuarticObjective {
    pub objective: f64,
    /// Whether `|∫(:Y²: + 2YΘ + Θ²)dx| ≤ K`.
    pub cutoff_active: bool,
    pub shifted_mass: f64,
    pub expansion: ShiftExpansion,
}

impl QuarticObjective {
    /// `R_N(Y + Θ)`.
    pub fn potential(&self) -> f64 {
        self.expansion.total
    }

    /// `R_N(Y)`, the `ℓ = 4` term.
    pub fn unshifted_potential(&self) -> f64 {
        self.expansion.terms[4]
    }
}

/// `∫(:Y²: + 2YΘ + Θ²) dx`, computed spectrally.
pub fn shifted_wick_mass(y: &SpectralField, theta: &SpectralField) -> Result<f64> {
    let theta = align_support(y, theta)?;
    Ok(wick_mass(y) + 2.0 * y.inner(&theta)? + theta.l2_norm_sq())
}

/// `−min(R_N(Y+Θ), L)·𝟙{|∫(:Y²:+2YΘ+Θ²)| ≤ K} + ½·drift_cost`.
pub fn bd_objective_quartic(
    y: &SpectralField,
    theta: &SpectralField,
    drift_cost: f64,
    coupling: f64,
    ceiling: f64,
    k_cut: f64,
) -> Result<QuarticObjective> {
    if !y.is_real() || !theta.is_real() {
        return Err(Error::FieldMismatch("objective needs real fields".into()));
    }
    let theta = align_support(y, theta)?;
    let (gy, gt) = SpectralField::to_grid_pair(y, &theta)?;
    let expansion = shift_expand_grids(&gy, &gt, 4, y.lattice().sigma(), coupling);
    let shifted_mass = shifted_wick_mass(y, &theta)?;
    Ok(quartic_from_parts(expansion, shifted_mass, drift_cost, ceiling, k_cut))
}

pub(crate) fn quartic_from_parts(
    expansion: ShiftExpansion,
    shifted_mass: f64,
    drift_cost: f64,
    ceiling: f64,
    k_cut: f64,
) -> QuarticObjective {
    let cutoff_active = shifted_mass.abs() <= k_cut;
    let gain = if cutoff_active { expansion.total.min(ceiling) } else { 0.0 };
    QuarticObjective {
        objective: -gain + 0.5 * drift_cost,
        cutoff_active,
        shifted_mass,
        expansion,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexQuarticObjective {
    pub objective: f64,
    pub cutoff_active: bool,
    pub shifted_mass: f64,
    /// `(σ/4)∫:|Y+Θ|⁴:dx`.
    pub potential: f64,
}

/// `−min((σ/4)∫:|Y+Θ|⁴:, L)·𝟙{|∫:|Y+Θ|²:| ≤ K} + ½·drift_cost` for a complex
/// `Y`; Wick ordering is with respect to the variance of `Y`.
pub fn bd_objective_complex_quartic(
    y: &SpectralField,
    theta: &SpectralField,
    drift_cost: f64,
    coupling: f64,
    ceiling: f64,
    k_cut: f64,
) -> Result<ComplexQuarticObjective> {
    if y.is_real() {
        return Err(Error::FieldMismatch("complex objective needs a complex field".into()));
    }
    let theta = align_support(y, theta)?;
    let u = y.combine(1.0, &theta, 1.0)?;
    let ctx = WickContext::for_field(&u, 4);
    let potential = coupling * integrate(&complex_wick_quartic(&u, &ctx)?) / 4.0;
    let shifted_mass = wick_mass(&u);
    let cutoff_active = shifted_mass.abs() <= k_cut;
    let gain = if cutoff_active { potential.min(ceiling) } else { 0.0 };
    Ok(ComplexQuarticObjective {
        objective: -gain + 0.5 * drift_cost,
        cutoff_active,
        shifted_mass,
        potential,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubicObjective {
    pub objective: f64,
    /// `(σ/3)∫:(Y+Θ)³:dx`.
    pub cubic: f64,
    /// `{∫(:Y²: + 2YΘ + Θ²)dx}²`.
    pub taming: f64,
}

/// `−𝓡_N(Y+Θ) + ½·drift_cost` with `𝓡_N(u) = (σ/3)∫:u³: − A(∫:u²:)²`.
pub fn bd_objective_cubic(
    y: &SpectralField,
    theta: &SpectralField,
    drift_cost: f64,
    coupling: f64,
    taming: f64,
) -> Result<CubicObjective> {
    if !y.is_real() || !theta.is_real() {
        return Err(Error::FieldMismatch("objective needs real fields".into()));
    }
    let theta = align_support(y, theta)?;
    let (gy, gt) = SpectralField::to_grid_pair(y, &theta)?;
    let cubic = shift_expand_grids(&gy, &gt, 3, y.lattice().sigma(), coupling).total;
    let mass = shifted_wick_mass(y, &theta)?;
    let sq = mass * mass;
    Ok(CubicObjective {
        objective: -(cubic - taming * sq) + 0.5 * drift_cost,
        cubic,
        taming: sq,
    })
}

/// `max_x |⟨∇⟩^{-ε} g(x)|` for grid values `g`, using the signed grid
/// frequencies.
pub fn smoothed_sup_norm(grid: &Grid<f64>, eps: f64) -> f64 {
    let t = GridTransform::new(grid.dim, grid.size);
    let mut buf: Vec<Complex64> = grid.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    t.forward(&mut buf);
    let g = grid.size as i64;
    let signed = |k: i64| if k > g / 2 { k - g } else { k };
    for (idx, c) in buf.iter_mut().enumerate() {
        let mut rest = idx as i64;
        let mut n2 = 0u64;
        for _ in 0..grid.dim {
            let k = signed(rest % g);
            rest /= g;
            n2 += (k * k) as u64;
        }
        *c *= bracket_from_norm2(n2).powf(-eps) / grid.values.len() as f64;
    }
    t.inverse(&mut buf);
    buf.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
}

/// `‖:Y³:‖_{W^{-ε,∞}}` on a grid fine enough (`G ≥ 6N+1`) to resolve `:Y³:`
/// without aliasing.
pub fn cubic_besov_norm(y: &SpectralField, eps: f64) -> Result<f64> {
    let n = y.lattice().cutoff();
    let grid = next_fast_size(6 * n + 1).max(y.spec().grid());
    let fine = Lattice::new(LatticeSpec::with_grid(y.lattice().dim(), n, grid)?);
    let yf = y.extend(fine)?;
    let ctx = WickContext {
        sigma: y.lattice().sigma(),
        order: 3,
        reality: y.reality(),
    };
    Ok(smoothed_sup_norm(&wick_power(&yf, 3, &ctx)?, eps))
}
