//! Divergence scan over the drift scale `M`.

use serde::{Deserialize, Serialize};

use super::drift::{exact_ensemble, quartic_q, simulate_paths, DriftSetup};
use super::objective::shifted_wick_mass;
use crate::error::Result;
use crate::exec::{try_map_samples, Execution};
use crate::field::SpectralField;
use crate::rng::{derive_seed, substream};
use crate::stats::Summary;
use crate::wick::{shift_expand_grids, wick_mass};

/// One CSV row: `M, N, K, L, samples, mean, stderr, ci_low, ci_high, quantity_tag`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub quantity_tag: String,
}

impl ScanRow {
    pub fn from_summary(m: usize, n: usize, k: Option<f64>, l: f64, s: &Summary, tag: &str) -> Self {
        let (lo, hi) = s.ci99();
        ScanRow {
            m,
            n,
            k,
            l,
            samples: s.count,
            mean: s.mean,
            stderr: s.stderr,
            ci_low: lo,
            ci_high: hi,
            quantity_tag: tag.to_string(),
        }
    }

    pub fn exact(m: usize, n: usize, k: Option<f64>, l: f64, samples: usize, value: f64, tag: &str) -> Self {
        ScanRow {
            m,
            n,
            k,
            l,
            samples,
            mean: value,
            stderr: 0.0,
            ci_low: value,
            ci_high: value,
            quantity_tag: tag.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceConfig {
    pub dim: usize,
    pub scales: Vec<usize>,
    /// `N = ratio·M`.
    pub cutoff_ratio: usize,
    pub k_cuts: Vec<f64>,
    pub coupling: f64,
    /// `L(M) = factor·|σ|·α²·Q(f_M)` unless `ceiling` is set.
    pub ceiling_factor: f64,
    pub ceiling: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    /// `None`: exact terminal sampler with the conditional drift cost;
    /// `Some(J)`: simulated paths on `J` steps.
    pub time_steps: Option<usize>,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig {
            dim: 2,
            scales: vec![8, 16, 32, 64],
            cutoff_ratio: 2,
            k_cuts: vec![1.0],
            coupling: 1.0,
            ceiling_factor: 10.0,
            ceiling: None,
            samples: 20_000,
            seed: 0,
            time_steps: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct SampleEval {
    shifted: f64,
    unshifted: f64,
    mass: f64,
    shifted_mass: f64,
    cost: f64,
}

/// Per-sample data of one scale, in sample order.
#[derive(Clone, Debug)]
pub struct ScaleSamples {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub ceiling: f64,
    evals: Vec<SampleEval>,
}

impl ScaleSamples {
    pub fn len(&self) -> usize {
        self.evals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evals.is_empty()
    }

    pub fn objectives(&self, k_cut: f64) -> Vec<f64> {
        self.evals
            .iter()
            .map(|e| {
                let active = e.shifted_mass.abs() <= k_cut;
                let gain = if active { e.shifted.min(self.ceiling) } else { 0.0 };
                -gain + 0.5 * e.cost
            })
            .collect()
    }

    pub fn cutoff_indicators(&self, k_cut: f64) -> Vec<f64> {
        self.evals
            .iter()
            .map(|e| f64::from(u8::from(e.shifted_mass.abs() <= k_cut)))
            .collect()
    }

    /// `min(R_N(Y), L)` on the cutoff event `|∫:Y²:| ≤ K`, `−∞` off it.
    pub fn direct_exponents(&self, k_cut: f64) -> Vec<f64> {
        self.evals
            .iter()
            .map(|e| {
                if e.mass.abs() <= k_cut {
                    e.unshifted.min(self.ceiling)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect()
    }

    pub fn drift_costs(&self) -> Vec<f64> {
        self.evals.iter().map(|e| e.cost).collect()
    }

    pub fn shifted_potentials(&self) -> Vec<f64> {
        self.evals.iter().map(|e| e.shifted).collect()
    }
}

/// `(log mean e^{v}, stderr of the log)` by the delta method; `−∞` entries
/// contribute zero.
pub fn log_mean_exp(v: &[f64]) -> (f64, f64) {
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, 0.0);
    }
    let scaled: Vec<f64> = v.iter().map(|x| (x - top).exp()).collect();
    let s = Summary::of(&scaled);
    (top + s.mean.ln(), s.stderr / s.mean)
}

pub fn sample_scale(cfg: &DivergenceConfig, m: usize, exec: Execution) -> Result<ScaleSamples> {
    let setup = DriftSetup::with_cutoff(cfg.dim, m, cfg.cutoff_ratio * m)?;
    let alpha = setup.alpha();
    let ceiling = match cfg.ceiling {
        Some(l) => l,
        None => cfg.ceiling_factor * cfg.coupling.abs() * alpha * alpha * quartic_q(setup.f_m())?,
    };
    let seed = derive_seed(cfg.seed, m as u64);
    let sigma = setup.lattice().sigma();
    let evals = try_map_samples(exec, cfg.samples, |i| {
        let mut rng = substream(seed, i as u64);
        let ens = match cfg.time_steps {
            None => exact_ensemble(&setup, &mut rng)?,
            Some(j) => simulate_paths(&setup, j, &mut rng, false)?,
        };
        let (gy, gt) = SpectralField::to_grid_pair(&ens.y, &ens.theta0)?;
        let exp = shift_expand_grids(&gy, &gt, 4, sigma, cfg.coupling);
        Ok::<_, crate::Error>(SampleEval {
            shifted: exp.total,
            unshifted: exp.terms[4],
            mass: wick_mass(&ens.y),
            shifted_mass: shifted_wick_mass(&ens.y, &ens.theta0)?,
            cost: ens.drift_cost,
        })
    })?;
    Ok(ScaleSamples {
        m,
        n: setup.lattice().cutoff(),
        alpha,
        ceiling,
        evals,
    })
}

/// Rows for one scale. Tags:
/// `bd_objective` (mean per-sample objective at `θ⁰`),
/// `log_partition_lower_bound` (its negative, a lower bound on
/// `log E[e^{min(R_N,L)·𝟙}]`), `cutoff_probability` (under the shifted
/// field), `partition` and `log_partition` (direct estimate of
/// `E[𝟙_{|∫:Y²:|≤K} e^{min(R_N,L)}]`), plus the K-independent `alpha`,
/// `drift_cost` and `shifted_potential`.
pub fn scale_rows(cfg: &DivergenceConfig, s: &ScaleSamples) -> Vec<ScanRow> {
    let (m, n, l, count) = (s.m, s.n, s.ceiling, s.len());
    let mut rows = vec![
        ScanRow::exact(m, n, None, l, count, s.alpha, "alpha"),
        ScanRow::from_summary(m, n, None, l, &Summary::of(&s.drift_costs()), "drift_cost"),
        ScanRow::from_summary(m, n, None, l, &Summary::of(&s.shifted_potentials()), "shifted_potential"),
    ];
    for &k in &cfg.k_cuts {
        let obj = Summary::of(&s.objectives(k));
        rows.push(ScanRow::from_summary(m, n, Some(k), l, &obj, "bd_objective"));
        let neg = Summary {
            mean: -obj.mean,
            ..obj
        };
        rows.push(ScanRow::from_summary(m, n, Some(k), l, &neg, "log_partition_lower_bound"));
        rows.push(ScanRow::from_summary(
            m,
            n,
            Some(k),
            l,
            &Summary::of(&s.cutoff_indicators(k)),
            "cutoff_probability",
        ));
        let expo = s.direct_exponents(k);
        let lin: Vec<f64> = expo.iter().map(|x| x.exp()).collect();
        rows.push(ScanRow::from_summary(m, n, Some(k), l, &Summary::of(&lin), "partition"));
        let (lm, lse) = log_mean_exp(&expo);
        let log_row = Summary {
            count,
            mean: lm,
            std_dev: lse * (count as f64).sqrt(),
            stderr: lse,
        };
        rows.push(ScanRow::from_summary(m, n, Some(k), l, &log_row, "log_partition"));
    }
    rows
}

pub fn divergence_scan(cfg: &DivergenceConfig, exec: Execution) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for &m in &cfg.scales {
        let s = sample_scale(cfg, m, exec)?;
        rows.extend(scale_rows(cfg, &s));
    }
    Ok(rows)
}
