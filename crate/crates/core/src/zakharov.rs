//! Two-dimensional Zakharov Gibbs measure with the wave field integrated out.
//!
//! With `w = :|u_N|²: = |u_N|² − σ_N`, integrating `e^{Q_N(u,W)}` against the
//! white-noise law of `W` gives `exp(¼Σ_n|ŵ(n)|²) = exp(¼∫w² dx)`; the
//! velocity fields contribute a factor 1.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exec::{try_map_samples, Execution};
use crate::field::{integrate, sample, GaussLaw, Reality, SpectralField};
use crate::partition::{exp_report, EstimateReport};
use crate::rng::{derive_seed, substream};
use crate::spectrum::{radial_sum, Lattice, LatticeSpec};
use crate::stats::Summary;
use crate::variational::{bd_objective_complex_quartic, exact_ensemble, quartic_q, DriftSetup};
use crate::wick::{complex_wick_quartic, wick_mass, WickContext};

pub const DIM: usize = 2;

/// `μ_1`: complex Gaussian with weights `⟨n⟩^{-1}` on `𝕋²`, which in two
/// dimensions is the log-correlated law.
pub fn mu1() -> GaussLaw {
    GaussLaw::log_correlated(Reality::Complex)
}

fn check(u: &SpectralField) -> Result<()> {
    if u.is_real() {
        return Err(Error::FieldMismatch("Zakharov field must be complex".into()));
    }
    if u.lattice().dim() != DIM {
        return Err(Error::FieldMismatch("Zakharov field lives on the 2-torus".into()));
    }
    Ok(())
}

/// Grid values of `|u_N|²`.
fn modulus_sq(u: &SpectralField) -> Vec<f64> {
    u.to_complex_grid().values.iter().map(|z| z.norm_sqr()).collect()
}

/// `¼∫(:|u_N|²:)² dx`.
pub fn wave_marginal_log(u: &SpectralField) -> Result<f64> {
    check(u)?;
    let s = u.lattice().sigma();
    let mut g = u.to_complex_grid().map(|z| z.norm_sqr() - s);
    g.values.iter_mut().for_each(|v| *v *= *v);
    Ok(integrate(&g) / 4.0)
}

/// Zero-mode / nonzero-mode split of `∫(:|u_N|²:)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveSplit {
    /// `∫:|u_N|²: dx`.
    pub wick_mass: f64,
    /// `‖π_{≠0}|u_N|²‖²_{L²}`.
    pub nonzero_sq: f64,
}

impl WaveSplit {
    pub fn of(u: &SpectralField) -> Result<Self> {
        check(u)?;
        let m = modulus_sq(u);
        let n = m.len() as f64;
        let mean = crate::stats::pairwise_sum(&m) / n;
        let sq: Vec<f64> = m.iter().map(|v| (v - mean) * (v - mean)).collect();
        Ok(WaveSplit {
            wick_mass: wick_mass(u),
            nonzero_sq: crate::stats::pairwise_sum(&sq) / n,
        })
    }

    /// `¼(∫:|u|²:)² + ¼‖π_{≠0}|u|²‖²`.
    pub fn log_density(&self) -> f64 {
        0.25 * (self.wick_mass * self.wick_mass + self.nonzero_sq)
    }
}

/// `Σ_{|n₁|≤N}⟨n₁⟩⁻² Σ_{|n₃|≤N, n₃≠n₁}⟨n₃⟩⁻² = S² − T`.
pub fn zak_second_moment_exact(n: usize) -> f64 {
    let s = radial_sum(DIM, n, |k| 1.0 / (1.0 + k as f64));
    let t = radial_sum(DIM, n, |k| (1.0 + k as f64).powi(-2));
    s * s - t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZakharovScan {
    pub cutoffs: Vec<usize>,
    #[serde(rename = "K")]
    pub k: f64,
    /// Thresholds `M` for `P(‖π_{≠0}|u_N|²‖_{L²} > M)`.
    pub thresholds: Vec<f64>,
    /// Ceiling `L` on the log-density; `None` for no truncation.
    pub ceiling: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

fn context(r: EstimateReport, n: usize, seed: u64, k: f64, l: Option<f64>) -> EstimateReport {
    r.with_context(DIM, n, &mu1().label(), "zakharov", seed)
        .with_param("K", json!(k))
        .with_param("L", json!(l))
}

/// Per cutoff: threshold probabilities, the cutoff probability, and
/// `E[𝟙_{|∫:|u|²:|≤K} e^{min(¼∫(:|u|²:)², L)}]`.
pub fn zak_divergence_scan(cfg: &ZakharovScan, exec: Execution) -> Result<Vec<EstimateReport>> {
    if cfg.k <= 0.0 {
        return Err(Error::InvalidParameter("K must be positive".into()));
    }
    let mut out = Vec::new();
    for &n in &cfg.cutoffs {
        let lat = Lattice::new(LatticeSpec::new(DIM, n)?);
        let seed = derive_seed(cfg.seed, n as u64);
        let splits = try_map_samples(exec, cfg.samples, |i| {
            WaveSplit::of(&sample(&mu1(), &lat, &mut substream(seed, i as u64))?)
        })?;
        let ctx = |r| context(r, n, cfg.seed, cfg.k, cfg.ceiling);
        for &m in &cfg.thresholds {
            let hit: Vec<f64> = splits
                .iter()
                .map(|s| f64::from(u8::from(s.nonzero_sq.sqrt() > m)))
                .collect();
            out.push(
                ctx(EstimateReport::from_summary("threshold_probability", &Summary::of(&hit))?)
                    .with_param("M", json!(m)),
            );
        }
        let inside: Vec<f64> = splits
            .iter()
            .map(|s| f64::from(u8::from(s.wick_mass.abs() <= cfg.k)))
            .collect();
        out.push(ctx(EstimateReport::from_summary("cutoff_probability", &Summary::of(&inside))?));
        let nonzero: Vec<f64> = splits.iter().map(|s| s.nonzero_sq).collect();
        out.push(ctx(EstimateReport::from_summary("nonzero_second_moment", &Summary::of(&nonzero))?));
        let expo: Vec<f64> = splits
            .iter()
            .map(|s| {
                if s.wick_mass.abs() > cfg.k {
                    return f64::NEG_INFINITY;
                }
                let v = s.log_density();
                cfg.ceiling.map_or(v, |l| v.min(l))
            })
            .collect();
        let tail = match cfg.ceiling {
            Some(l) => splits.iter().filter(|s| s.log_density() >= l).count() as f64 / splits.len() as f64,
            None => 0.0,
        };
        out.push(ctx(exp_report(&expo)?).with_tail(tail));
    }
    Ok(out)
}

/// `E[𝟙_{|∫:|u_N|²:|≤K} e^{min(R_N, L)}]` with `R_N = ¼∫:|u_N|⁴:dx`.
pub fn zak_change_of_variables_check(
    n: usize,
    k: f64,
    ceiling: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    let lat = Lattice::new(LatticeSpec::new(DIM, n)?);
    let ex = try_map_samples(exec, samples, |i| {
        let u = sample(&mu1(), &lat, &mut substream(seed, i as u64))?;
        if wick_mass(&u).abs() > k {
            return Ok::<_, Error>((f64::NEG_INFINITY, false));
        }
        let ctx = WickContext::for_field(&u, 4);
        let r = integrate(&complex_wick_quartic(&u, &ctx)?) / 4.0;
        Ok((r.min(ceiling), r >= ceiling))
    })?;
    let expo: Vec<f64> = ex.iter().map(|e| e.0).collect();
    let tail = ex.iter().filter(|e| e.1).count() as f64 / ex.len() as f64;
    Ok(exp_report(&expo)?
        .with_context(DIM, n, &mu1().label(), "zakharov_change_of_variables", seed)
        .with_param("K", json!(k))
        .with_param("L", json!(ceiling))
        .with_tail(tail))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZakharovBound {
    pub cutoffs: Vec<usize>,
    /// Drift scale `M = N / ratio`.
    pub cutoff_ratio: usize,
    #[serde(rename = "K")]
    pub k: f64,
    /// `L = factor·α²·Q(f_M)`.
    pub ceiling_factor: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Variational lower bound on `log E[𝟙_{|∫:|u_N|²:|≤K} e^{min(R_N, L)}]` for
/// `R_N = ¼∫:|u_N|⁴:dx`, evaluated at the drift `θ⁰` on the complex field.
/// Emits `bd_objective`, `log_partition_lower_bound` and the shifted
/// `cutoff_probability` per cutoff.
pub fn zak_variational_bound(cfg: &ZakharovBound, exec: Execution) -> Result<Vec<EstimateReport>> {
    if cfg.k <= 0.0 || cfg.cutoff_ratio == 0 {
        return Err(Error::InvalidParameter("need K > 0 and a positive ratio".into()));
    }
    let mut out = Vec::new();
    for &n in &cfg.cutoffs {
        let m = n / cfg.cutoff_ratio;
        let lat = Lattice::new(LatticeSpec::new(DIM, n)?);
        let setup = DriftSetup::with_reality(lat, m, Reality::Complex)?;
        let ceiling = cfg.ceiling_factor * setup.alpha().powi(2) * quartic_q(setup.f_m())?;
        let seed = derive_seed(cfg.seed, n as u64);
        let evals = try_map_samples(exec, cfg.samples, |i| {
            let e = exact_ensemble(&setup, &mut substream(seed, i as u64))?;
            bd_objective_complex_quartic(&e.y, &e.theta0, e.drift_cost, 1.0, ceiling, cfg.k)
        })?;
        let ctx = |r: EstimateReport| {
            r.with_context(DIM, n, &mu1().label(), "zakharov_change_of_variables", cfg.seed)
                .with_param("K", json!(cfg.k))
                .with_param("L", json!(ceiling))
                .with_param("M", json!(m))
                .with_param("alpha", json!(setup.alpha()))
        };
        let obj: Vec<f64> = evals.iter().map(|e| e.objective).collect();
        let bound: Vec<f64> = obj.iter().map(|v| -v).collect();
        let inside: Vec<f64> = evals.iter().map(|e| f64::from(u8::from(e.cutoff_active))).collect();
        let tail = evals.iter().filter(|e| e.cutoff_active && e.potential >= ceiling).count() as f64
            / evals.len() as f64;
        out.push(ctx(EstimateReport::from_summary("bd_objective", &Summary::of(&obj))?));
        out.push(ctx(EstimateReport::from_summary("log_partition_lower_bound", &Summary::of(&bound))?).with_tail(tail));
        out.push(ctx(EstimateReport::from_summary("cutoff_probability", &Summary::of(&inside))?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{bracket_from_norm2, for_each_point};
    use num_complex::Complex64;
    use std::collections::BTreeMap;

    fn lattice(n: usize) -> std::sync::Arc<Lattice> {
        Lattice::new(LatticeSpec::new(DIM, n).unwrap())
    }

    #[test]
    fn second_moment_values() {
        assert!((zak_second_moment_exact(1) - 7.0).abs() < 1e-12);
        for n in [2, 3, 5] {
            let mut s = Vec::new();
            for_each_point(DIM, n, |p| s.push(1.0 / (1.0 + (p[0] * p[0] + p[1] * p[1]) as f64)));
            let direct: f64 = s
                .iter()
                .enumerate()
                .map(|(i, a)| a * s.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b).sum::<f64>())
                .sum();
            assert!((zak_second_moment_exact(n) - direct).abs() < 1e-10 * direct);
        }
    }

    #[test]
    fn zero_field() {
        let u = SpectralField::zeros(lattice(4), Reality::Complex);
        let s = u.lattice().sigma();
        assert!((wave_marginal_log(&u).unwrap() - s * s / 4.0).abs() < 1e-12);
        assert!(wave_marginal_log(&SpectralField::zeros(lattice(4), Reality::Real)).is_err());
    }

    #[test]
    fn split_matches_direct() {
        let lat = lattice(6);
        for i in 0..20 {
            let u = sample(&mu1(), &lat, &mut substream(21, i)).unwrap();
            let w = wave_marginal_log(&u).unwrap();
            let s = WaveSplit::of(&u).unwrap();
            assert!((w - s.log_density()).abs() < 1e-10 * w.abs().max(1.0));
            // the nonzero part alone never exceeds the total
            assert!(w >= 0.25 * s.nonzero_sq - 1e-12);
        }
    }

    /// `log ∫ e^{-b x} e^{-x²/(2v)} dx / √(2πv)` by the trapezoid rule.
    fn log_gauss_mgf(b: f64, v: f64) -> f64 {
        let h = 1e-3;
        let sd = v.sqrt();
        let centre = -b * v;
        let steps = (16.0 * sd / h) as i64;
        let sum: f64 = (-steps..=steps)
            .map(|j| {
                let x = centre + j as f64 * h;
                (-b * x - x * x / (2.0 * v)).exp()
            })
            .sum();
        (sum * h / (2.0 * std::f64::consts::PI * v).sqrt()).ln()
    }

    // Integrates each Fourier mode of W numerically: W has a real N(0,1)
    // zero mode and, on a half space Λ, complex modes with independent
    // N(0,½) real and imaginary parts.
    #[test]
    fn quadrature_oracle() {
        let lat = lattice(1);
        for i in 0..10 {
            let u = sample(&mu1(), &lat, &mut substream(22, i)).unwrap();
            let mut w: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
            for a in 0..lat.len() {
                for b in 0..lat.len() {
                    let (p, q) = (lat.point(a), lat.point(b));
                    *w.entry((p[0] - q[0], p[1] - q[1])).or_default() += u.coeffs()[a] * u.coeffs()[b].conj();
                }
            }
            let s = lat.sigma();
            let mut log = 0.0;
            for (&(x, y), c) in &w {
                if (x, y) == (0, 0) {
                    log += log_gauss_mgf((c.re - s) / 2f64.sqrt(), 1.0);
                } else if y > 0 || (y == 0 && x > 0) {
                    log += log_gauss_mgf(2f64.sqrt() * c.re, 0.5) + log_gauss_mgf(2f64.sqrt() * c.im, 0.5);
                }
            }
            let direct = wave_marginal_log(&u).unwrap();
            assert!(((log - direct).exp() - 1.0).abs() < 1e-6, "{log} vs {direct}");
        }
    }

    #[test]
    fn second_moment_monte_carlo() {
        let n = 4;
        let lat = lattice(n);
        let v: Vec<f64> = (0..20_000)
            .map(|i| WaveSplit::of(&sample(&mu1(), &lat, &mut substream(23, i)).unwrap()).unwrap().nonzero_sq)
            .collect();
        assert!(Summary::of(&v).within(zak_second_moment_exact(n), 4.0));
    }

    #[test]
    fn sigma_matches_mu1_variance() {
        let lat = lattice(7);
        let direct = radial_sum(DIM, 7, |k| bracket_from_norm2(k).powi(-2));
        assert!((lat.sigma() - direct).abs() < 1e-12);
        assert!((mu1().pointwise_variance(&lat) - direct).abs() < 1e-12);
    }

    #[test]
    fn change_of_variables_ceiling() {
        let r0 = zak_change_of_variables_check(4, 1.0, 0.0, 400, 3, Execution::Sequential).unwrap();
        assert!(r0.mean <= 1.0);
        let r1 = zak_change_of_variables_check(4, 1.0, 5.0, 400, 3, Execution::Sequential).unwrap();
        assert!(r1.mean >= r0.mean);
    }
}
