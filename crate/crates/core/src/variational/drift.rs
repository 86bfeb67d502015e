//! The bump `f_M`, the constant `α_{M,N}`, and the drift `θ⁰` whose terminal
//! value is `Θ⁰ = −Z_M(1) + √α_{M,N} f_M`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::bump::BumpProfile;
use super::ou::{alpha_numerator, moments_from_norm2, relaxation_rate, ConditionalCost};
use crate::error::{Error, Result};
use crate::field::{integrate, Reality, SpectralField};
use crate::rng::{complex_normal, normal};
use crate::spectrum::{bracket_from_norm2, radial_sum, Lattice, LatticeSpec};

pub const MIN_SCALE: usize = 4;
pub const MIN_TIME_STEPS: usize = 64;

fn check_scale(m: usize, n: usize) -> Result<()> {
    if m < MIN_SCALE {
        return Err(Error::InvalidParameter(format!("M = {m} below {MIN_SCALE}")));
    }
    if m > n {
        return Err(Error::InvalidParameter(format!("M = {m} exceeds the cutoff N = {n}")));
    }
    Ok(())
}

fn bump_coeff(profile: &BumpProfile, m: usize, n2: u64) -> f64 {
    let mf = m as f64;
    mf.powf(-(profile.dim() as f64) / 2.0) * profile.fourier((n2 as f64).sqrt() / mf)
}

/// `f_M = M^{-d/2} Σ f̂(n/M) e_n` on the lattice of `spec`.
pub fn build_fm(m: usize, profile: &BumpProfile, spec: &LatticeSpec) -> Result<SpectralField> {
    build_fm_on(m, profile, &Lattice::new(*spec))
}

pub fn build_fm_on(m: usize, profile: &BumpProfile, lattice: &Arc<Lattice>) -> Result<SpectralField> {
    check_scale(m, lattice.cutoff())?;
    if profile.dim() != lattice.dim() {
        return Err(Error::InvalidParameter("bump and lattice dimensions differ".into()));
    }
    let coeffs = (0..lattice.len())
        .map(|i| Complex64::new(bump_coeff(profile, m, lattice.norm2(i)), 0.0))
        .collect();
    SpectralField::from_coeffs(lattice.clone(), coeffs, Reality::Real)
}

/// `∫f_M² dx`, summed over shells.
pub fn fm_mass(m: usize, profile: &BumpProfile) -> f64 {
    radial_sum(profile.dim(), m, |n2| bump_coeff(profile, m, n2).powi(2))
}

pub fn alpha_mn(m: usize, n: usize, profile: &BumpProfile) -> Result<f64> {
    check_scale(m, n)?;
    let num = alpha_numerator(profile.dim(), m);
    if num <= 0.0 {
        return Err(Error::Covariance(format!("nonpositive α numerator {num} at M = {m}")));
    }
    Ok(num / fm_mass(m, profile))
}

/// `Q(u) = ¼∫u⁴ dx`.
pub fn quartic_q(field: &SpectralField) -> Result<f64> {
    let g = field.to_grid()?;
    Ok(integrate(&g.map(|v| v * v * v * v)) / 4.0)
}

#[derive(Clone, Debug)]
struct LowMode {
    index: usize,
    neg: usize,
    weight: f64,
    lambda: f64,
    multiplicity: f64,
    bracket_d: f64,
    shift: f64,
    moments: (f64, f64, f64),
    cost: ConditionalCost,
}

/// Everything about `θ⁰` that does not depend on the sample.
#[derive(Clone, Debug)]
pub struct DriftSetup {
    lattice: Arc<Lattice>,
    m: usize,
    alpha: f64,
    f_m: SpectralField,
    reality: Reality,
    low: Vec<LowMode>,
    high: Vec<(usize, usize, f64)>,
}

impl DriftSetup {
    pub fn new(lattice: Arc<Lattice>, m: usize) -> Result<Self> {
        Self::with_reality(lattice, m, Reality::Real)
    }

    /// For complex fields every lattice point is an independent complex mode.
    pub fn with_reality(lattice: Arc<Lattice>, m: usize, reality: Reality) -> Result<Self> {
        let dim = lattice.dim();
        check_scale(m, lattice.cutoff())?;
        let profile = BumpProfile::new(dim)?;
        let alpha = alpha_mn(m, lattice.cutoff(), &profile)?;
        let f_m = build_fm_on(m, &profile, &lattice)?;
        let root = alpha.sqrt();
        let mut low = Vec::new();
        let mut high = Vec::new();
        let points: Vec<usize> = match reality {
            Reality::Real => lattice.half().to_vec(),
            Reality::Complex => (0..lattice.len()).collect(),
        };
        for i in points {
            let n2 = lattice.norm2(i);
            let neg = if reality == Reality::Real { lattice.neg(i) } else { i };
            let weight = lattice.bracket(i).powf(-(dim as f64) / 2.0);
            if n2 <= (m * m) as u64 {
                let lambda = relaxation_rate(dim, n2, m);
                let mo = moments_from_norm2(dim, n2, m);
                low.push(LowMode {
                    index: i,
                    neg,
                    weight,
                    lambda,
                    multiplicity: if neg == i { 1.0 } else { 2.0 },
                    bracket_d: bracket_from_norm2(n2).powi(dim as i32),
                    shift: root * f_m.coeffs()[i].re,
                    moments: (mo.var_y, mo.var_x, mo.cov_yx),
                    cost: ConditionalCost::new(lambda),
                });
            } else {
                high.push((i, neg, weight));
            }
        }
        Ok(DriftSetup {
            lattice,
            m,
            alpha,
            f_m,
            reality,
            low,
            high,
        })
    }

    pub fn with_cutoff(dim: usize, m: usize, n: usize) -> Result<Self> {
        Self::new(Lattice::new(LatticeSpec::new(dim, n)?), m)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn f_m(&self) -> &SpectralField {
        &self.f_m
    }

    /// Number of independent modes driven by the low-pass process.
    pub fn low_modes(&self) -> usize {
        self.low.len()
    }

    /// Lattice indices of the half-space representatives with `|n| ≤ M`.
    pub fn low_indices(&self) -> Vec<usize> {
        self.low.iter().map(|l| l.index).collect()
    }

    /// `E[drift cost]` of the continuous-time drift, exact.
    pub fn mean_drift_cost(&self) -> f64 {
        let t: Vec<f64> = self
            .low
            .iter()
            .map(|l| l.multiplicity * l.bracket_d * l.cost.mean(l.weight, l.shift))
            .collect();
        crate::stats::pairwise_sum(&t)
    }

    /// `E[∫₀¹‖θ⁰(t)‖² dt | Y_N(1), Z_M(1)]` for the continuous-time drift.
    pub fn conditional_drift_cost(&self, y: &SpectralField, z: &SpectralField) -> f64 {
        let t: Vec<f64> = self
            .low
            .iter()
            .map(|l| {
                let yv = y.coeffs()[l.index];
                let xv = yv - z.coeffs()[l.index];
                l.multiplicity * l.bracket_d * l.cost.eval(l.weight, yv, xv, l.shift)
            })
            .collect();
        crate::stats::pairwise_sum(&t)
    }

    pub fn theta0(&self, z: &SpectralField) -> Result<SpectralField> {
        z.combine(-1.0, &self.f_m, self.alpha.sqrt())
    }
}

/// Per-mode histories of `Ŷ` and `Ẑ_M` at `t_j = j/J`, for the half-space
/// representatives with `|n| ≤ M` (the other modes carry no drift).
#[derive(Clone, Debug)]
pub struct PathRecord {
    pub modes: Vec<usize>,
    pub y: Vec<Vec<Complex64>>,
    pub z: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct DriftEnsemble {
    pub m: usize,
    pub n: usize,
    /// 0 for the exact terminal sampler.
    pub time_steps: usize,
    pub y: SpectralField,
    pub z: SpectralField,
    pub theta0: SpectralField,
    /// `∫₀¹‖θ⁰(t)‖²_{L²}dt`; for the exact sampler, its conditional mean given
    /// the terminal values.
    pub drift_cost: f64,
    /// `∫₀¹‖dZ_M/dt‖²_{H^{d/2}}dt` along the simulated path (`None` for the
    /// exact sampler).
    pub z_energy: Option<f64>,
    pub paths: Option<PathRecord>,
}

fn draw<R: Rng + ?Sized>(real: bool, rng: &mut R) -> Complex64 {
    if real {
        Complex64::new(normal(rng), 0.0)
    } else {
        complex_normal(rng)
    }
}

fn mirror(coeffs: &mut [Complex64], i: usize, neg: usize, v: Complex64) {
    coeffs[i] = v;
    if neg != i {
        coeffs[neg] = v.conj();
    }
}

/// Euler–exponential simulation of `(Ŷ, Ẑ_M)` on `J` steps.
pub fn simulate_paths<R: Rng + ?Sized>(
    setup: &DriftSetup,
    time_steps: usize,
    rng: &mut R,
    record: bool,
) -> Result<DriftEnsemble> {
    if time_steps < MIN_TIME_STEPS {
        return Err(Error::InvalidParameter(format!(
            "J = {time_steps} below {MIN_TIME_STEPS}"
        )));
    }
    let lat = &setup.lattice;
    let dt = 1.0 / time_steps as f64;
    let sq = dt.sqrt();
    let mut yc = vec![Complex64::default(); lat.len()];
    let mut zc = yc.clone();
    let mut cost = Vec::with_capacity(setup.low.len());
    let mut energy = Vec::with_capacity(setup.low.len());
    let mut rec = record.then(|| PathRecord {
        modes: setup.low_indices(),
        y: Vec::with_capacity(setup.low.len()),
        z: Vec::with_capacity(setup.low.len()),
    });
    for l in &setup.low {
        let real = setup.reality == Reality::Real && l.index == l.neg;
        let decay = (-l.lambda * dt).exp();
        let (mut y, mut z) = (Complex64::default(), Complex64::default());
        let (mut c, mut e) = (0.0, 0.0);
        let mut hist = record.then(|| (vec![y], vec![z]));
        for _ in 0..time_steps {
            let z_next = decay * z + (1.0 - decay) * y;
            let v = (z_next - z) / dt;
            c += dt * (l.shift - v).norm_sqr();
            e += dt * v.norm_sqr();
            y += draw(real, rng) * (l.weight * sq);
            z = z_next;
            if let Some((hy, hz)) = hist.as_mut() {
                hy.push(y);
                hz.push(z);
            }
        }
        if let (Some(r), Some((hy, hz))) = (rec.as_mut(), hist) {
            r.y.push(hy);
            r.z.push(hz);
        }
        cost.push(l.multiplicity * l.bracket_d * c);
        energy.push(l.multiplicity * l.bracket_d * e);
        mirror(&mut yc, l.index, l.neg, y);
        mirror(&mut zc, l.index, l.neg, z);
    }
    for &(i, neg, w) in &setup.high {
        mirror(&mut yc, i, neg, draw(setup.reality == Reality::Real && i == neg, rng) * w);
    }
    finish(
        setup,
        yc,
        zc,
        time_steps,
        crate::stats::pairwise_sum(&cost),
        Some(crate::stats::pairwise_sum(&energy)),
        rec,
    )
}

/// Draws `(Y_N(1), Z_M(1))` from their exact joint law.
pub fn sample_terminal_exact<R: Rng + ?Sized>(
    setup: &DriftSetup,
    rng: &mut R,
) -> Result<(SpectralField, SpectralField)> {
    let lat = &setup.lattice;
    let mut yc = vec![Complex64::default(); lat.len()];
    let mut zc = yc.clone();
    for l in &setup.low {
        let real = setup.reality == Reality::Real && l.index == l.neg;
        let (vy, vx, cov) = l.moments;
        let y = draw(real, rng) * vy.sqrt();
        let resid = (vx - cov * cov / vy).max(0.0).sqrt();
        let x = y * (cov / vy) + draw(real, rng) * resid;
        mirror(&mut yc, l.index, l.neg, y);
        mirror(&mut zc, l.index, l.neg, y - x);
    }
    for &(i, neg, w) in &setup.high {
        mirror(&mut yc, i, neg, draw(setup.reality == Reality::Real && i == neg, rng) * w);
    }
    Ok((
        SpectralField::from_coeffs(lat.clone(), yc, setup.reality)?,
        SpectralField::from_coeffs(lat.clone(), zc, setup.reality)?,
    ))
}

/// Exact terminal sample with the conditional drift cost attached.
pub fn exact_ensemble<R: Rng + ?Sized>(setup: &DriftSetup, rng: &mut R) -> Result<DriftEnsemble> {
    let (y, z) = sample_terminal_exact(setup, rng)?;
    let cost = setup.conditional_drift_cost(&y, &z);
    let theta0 = setup.theta0(&z)?;
    Ok(DriftEnsemble {
        m: setup.m,
        n: setup.lattice.cutoff(),
        time_steps: 0,
        y,
        z,
        theta0,
        drift_cost: cost,
        z_energy: None,
        paths: None,
    })
}

fn finish(
    setup: &DriftSetup,
    yc: Vec<Complex64>,
    zc: Vec<Complex64>,
    time_steps: usize,
    drift_cost: f64,
    z_energy: Option<f64>,
    paths: Option<PathRecord>,
) -> Result<DriftEnsemble> {
    let y = SpectralField::from_coeffs(setup.lattice.clone(), yc, setup.reality)?;
    let z = SpectralField::from_coeffs(setup.lattice.clone(), zc, setup.reality)?;
    let theta0 = setup.theta0(&z)?;
    Ok(DriftEnsemble {
        m: setup.m,
        n: setup.lattice.cutoff(),
        time_steps,
        y,
        z,
        theta0,
        drift_cost,
        z_energy,
        paths,
    })
}

pub fn build_theta0(setup: &DriftSetup, ensemble: &DriftEnsemble) -> Result<SpectralField> {
    setup.theta0(&ensemble.z)
}
