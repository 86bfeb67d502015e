//! Monte Carlo estimates of truncated partition functions and moment
//! diagnostics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exec::{try_map_samples, Execution};
use crate::field::{sample, GaussLaw, SpectralField};
use crate::rng::{derive_seed, substream};
use crate::spectrum::{Lattice, LatticeSpec};
use crate::stats::{Summary, Z99};
use crate::wick::{potential_cubic_tamed, potential_quartic_tamed_smooth, potential_rn, wick_mass};
use crate::zakharov::wave_marginal_log;

pub const MIN_SAMPLES: usize = 100;
/// Largest exponent whose exponential is still a finite `f64` with headroom.
const EXP_LIMIT: f64 = 700.0;

/// Uniform result record; serializes to the JSON report schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub law: String,
    pub potential: String,
    pub params: Map<String, Value>,
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub ci: [f64; 2],
    pub tail_flag: f64,
    pub seed: u64,
    pub lower_bound_only: bool,
}

impl EstimateReport {
    pub fn from_summary(quantity: &str, s: &Summary) -> Result<Self> {
        if s.count < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "{} samples; reports need at least {MIN_SAMPLES}",
                s.count
            )));
        }
        let (lo, hi) = s.ci99();
        Ok(EstimateReport {
            quantity: quantity.to_string(),
            d: 0,
            n: 0,
            law: String::new(),
            potential: String::new(),
            params: Map::new(),
            samples: s.count,
            mean: s.mean,
            stderr: s.stderr,
            ci: [lo, hi],
            tail_flag: 0.0,
            seed: 0,
            lower_bound_only: false,
        })
    }

    pub fn with_context(mut self, d: usize, n: usize, law: &str, potential: &str, seed: u64) -> Self {
        self.d = d;
        self.n = n;
        self.law = law.to_string();
        self.potential = potential.to_string();
        self.seed = seed;
        self
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_tail(mut self, tail_flag: f64) -> Self {
        self.tail_flag = tail_flag;
        self.lower_bound_only = tail_flag > 0.5;
        self
    }

    /// Whether the 99% intervals of two reports intersect.
    pub fn overlaps(&self, other: &EstimateReport) -> bool {
        self.ci[0] <= other.ci[1] && other.ci[0] <= self.ci[1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `R_N = (σ/k)∫:u^k:`.
    Quartic { coupling: f64, order: usize },
    /// `(σ/3)∫:u³: − A(∫:u²:)²`.
    CubicTamed { coupling: f64, taming: f64 },
    /// `(σ/4)∫u⁴ − A(∫u²)^γ`.
    SmoothTamed { coupling: f64, taming: f64, gamma: f64 },
    /// `¼∫(:|u|²:)²`, the wave-marginalized Zakharov log-density.
    Zakharov,
}

impl Potential {
    pub fn label(&self) -> &'static str {
        match self {
            Potential::Quartic { .. } => "quartic",
            Potential::CubicTamed { .. } => "cubic_tamed",
            Potential::SmoothTamed { .. } => "smooth_tamed",
            Potential::Zakharov => "zakharov",
        }
    }

    /// Unbounded above: positive even coupling or odd order.
    pub fn is_focusing(&self) -> bool {
        match *self {
            Potential::Quartic { coupling, order } => coupling > 0.0 || order % 2 == 1,
            Potential::Zakharov => true,
            _ => false,
        }
    }

    pub fn evaluate(&self, u: &SpectralField) -> Result<f64> {
        match *self {
            Potential::Quartic { coupling, order } => potential_rn(u, coupling, order),
            Potential::CubicTamed { coupling, taming } => potential_cubic_tamed(u, coupling, taming),
            Potential::SmoothTamed { coupling, taming, gamma } => {
                potential_quartic_tamed_smooth(u, coupling, taming, gamma)
            }
            Potential::Zakharov => wave_marginal_log(u),
        }
    }

    fn params(&self) -> Map<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(mut m)) => {
                m.remove("kind");
                m
            }
            _ => Map::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMode {
    /// `∫:u²: ≤ K`.
    Signed,
    /// `|∫:u²:| ≤ K`.
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCutoff {
    pub k: f64,
    pub mode: CutoffMode,
}

impl MassCutoff {
    pub fn absolute(k: f64) -> Self {
        MassCutoff {
            k,
            mode: CutoffMode::Absolute,
        }
    }

    /// Tests the Wick-ordered mass `∫:u²:` (or `∫:|u|²:`) renormalized by
    /// the pointwise variance `sigma` of the law.
    pub fn admits(&self, u: &SpectralField, sigma: f64) -> bool {
        let m = u.l2_norm_sq() - sigma;
        match self.mode {
            CutoffMode::Signed => m <= self.k,
            CutoffMode::Absolute => m.abs() <= self.k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpEstimate {
    pub law: GaussLaw,
    pub dim: usize,
    pub cutoff_n: usize,
    pub potential: Potential,
    /// Ceiling `L` in `e^{min(V, L)}`.
    pub ceiling: Option<f64>,
    pub cutoff: Option<MassCutoff>,
    pub samples: usize,
    pub seed: u64,
}

/// Exponents `min(V, L)` on the cutoff event (`−∞` off it) and whether each
/// sample hit the ceiling.
fn exponents(cfg: &ExpEstimate, exec: Execution) -> Result<Vec<(f64, bool)>> {
    let lat = Lattice::new(LatticeSpec::new(cfg.dim, cfg.cutoff_n)?);
    cfg.law.validate(cfg.dim)?;
    let sigma = cfg.law.pointwise_variance(&lat);
    try_map_samples(exec, cfg.samples, |i| {
        let u = sample(&cfg.law, &lat, &mut substream(cfg.seed, i as u64))?;
        if let Some(c) = cfg.cutoff {
            if !c.admits(&u, sigma) {
                return Ok((f64::NEG_INFINITY, false));
            }
        }
        let v = cfg.potential.evaluate(&u)?;
        Ok(match cfg.ceiling {
            Some(l) if v >= l => (l, true),
            _ => (v, false),
        })
    })
}

/// `E[𝟙_{cutoff} e^{min(V, L)}]`. Reported on the linear scale (tag
/// `partition`) unless some exponent exceeds the `f64` range, in which case
/// the report carries `log E[…]` with a delta-method error (tag
/// `log_partition`).
pub fn estimate_exp_potential(cfg: &ExpEstimate, exec: Execution) -> Result<EstimateReport> {
    if cfg.ceiling.is_none() && matches!(cfg.potential, Potential::Quartic { .. }) && cfg.potential.is_focusing() {
        return Err(Error::InvalidParameter(
            "focusing quartic estimates need a truncation L".into(),
        ));
    }
    if cfg.samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "{} samples; reports need at least {MIN_SAMPLES}",
            cfg.samples
        )));
    }
    let ex = exponents(cfg, exec)?;
    let values: Vec<f64> = ex.iter().map(|e| e.0).collect();
    let tail = ex.iter().filter(|e| e.1).count() as f64 / ex.len() as f64;
    let report = exp_report(&values)?;
    let mut r = report
        .with_context(cfg.dim, cfg.cutoff_n, &cfg.law.label(), cfg.potential.label(), cfg.seed)
        .with_tail(if cfg.potential.is_focusing() { tail } else { 0.0 });
    r.params = cfg.potential.params();
    r.params.insert("L".into(), json!(cfg.ceiling));
    r.params.insert(
        "cutoff".into(),
        match cfg.cutoff {
            Some(c) => json!({"K": c.k, "mode": c.mode}),
            None => Value::Null,
        },
    );
    Ok(r)
}

/// Report of `E[e^{v}]` from exponents `v` (`−∞` allowed).
pub fn exp_report(values: &[f64]) -> Result<EstimateReport> {
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top <= EXP_LIMIT {
        let lin: Vec<f64> = values.iter().map(|v| v.exp()).collect();
        return EstimateReport::from_summary("partition", &Summary::of(&lin));
    }
    let scaled: Vec<f64> = values.iter().map(|v| (v - top).exp()).collect();
    let s = Summary::of(&scaled);
    let rel = s.stderr / s.mean;
    let log = Summary {
        count: s.count,
        mean: top + s.mean.ln(),
        std_dev: rel * (s.count as f64).sqrt(),
        stderr: rel,
    };
    EstimateReport::from_summary("log_partition", &log)
}

/// One row of the Cauchy diagnostic: `‖R_{N'} − R_N‖_{L²(μ)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_next")]
    pub n_next: usize,
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `(σ/k)∫:u^k:` including the `k = 2` Wick mass.
fn wick_potential(u: &SpectralField, coupling: f64, k: usize) -> Result<f64> {
    if k == 2 {
        Ok(coupling / 2.0 * wick_mass(u))
    } else {
        potential_rn(u, coupling, k)
    }
}

/// Couples all truncations through one sample at the largest cutoff and
/// reports the L²(μ) distance between consecutive `R_N`.
#[allow(clippy::too_many_arguments)]
pub fn rn_cauchy_diagnostic(
    law: &GaussLaw,
    dim: usize,
    cutoffs: &[usize],
    k: usize,
    coupling: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CauchyRow>> {
    if cutoffs.windows(2).any(|w| w[1] < w[0]) || cutoffs.is_empty() {
        return Err(Error::InvalidParameter("cutoff list must be nondecreasing".into()));
    }
    let lattices: Vec<Arc<Lattice>> = cutoffs
        .iter()
        .map(|&n| LatticeSpec::new(dim, n).map(Lattice::new))
        .collect::<Result<_>>()?;
    let top = lattices.last().expect("nonempty").clone();
    let per_sample: Vec<Vec<f64>> = try_map_samples(exec, samples, |i| {
        let u = sample(law, &top, &mut substream(seed, i as u64))?;
        let vals = lattices
            .iter()
            .map(|l| wick_potential(&u.restrict(l.clone())?, coupling, k))
            .collect::<Result<Vec<f64>>>()?;
        Ok::<_, Error>(vals.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect())
    })?;
    let mut rows = Vec::new();
    for j in 0..cutoffs.len() - 1 {
        let sq: Vec<f64> = per_sample.iter().map(|v| v[j]).collect();
        let s = Summary::of(&sq);
        let norm = s.mean.sqrt();
        let se = if norm > 0.0 { s.stderr / (2.0 * norm) } else { 0.0 };
        rows.push(CauchyRow {
            n: cutoffs[j],
            n_next: cutoffs[j + 1],
            samples,
            mean: norm,
            stderr: se,
            ci_low: norm - Z99 * se,
            ci_high: norm + Z99 * se,
        });
    }
    Ok(rows)
}

/// Hypercontractivity check `‖X‖_{L⁴} ≤ 3^{k/2}‖X‖_{L²}` for a functional in
/// the `k`-th chaos.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub order: usize,
    pub samples: usize,
    pub ratio: f64,
    pub stderr: f64,
    pub ci: [f64; 2],
    pub bound: f64,
    pub violated: bool,
}

pub fn chaos_moment_check(values: &[f64], order: usize) -> ChaosReport {
    let n = values.len() as f64;
    let x2: Vec<f64> = values.iter().map(|x| x * x).collect();
    let x4: Vec<f64> = x2.iter().map(|x| x * x).collect();
    let (s2, s4) = (Summary::of(&x2), Summary::of(&x4));
    let (m2, m4) = (s2.mean, s4.mean);
    let ratio = m4.powf(0.25) / m2.sqrt();
    // delta method on (m4, m2)
    let (g4, g2) = (ratio / (4.0 * m4), -ratio / (2.0 * m2));
    let cov = x2
        .iter()
        .zip(&x4)
        .map(|(a, b)| (a - m2) * (b - m4))
        .sum::<f64>()
        / (n - 1.0);
    let var = g4 * g4 * s4.std_dev.powi(2) + g2 * g2 * s2.std_dev.powi(2) + 2.0 * g4 * g2 * cov;
    let stderr = (var.max(0.0) / n).sqrt();
    let bound = 3f64.powf(order as f64 / 2.0);
    let ci = [ratio - Z99 * stderr, ratio + Z99 * stderr];
    ChaosReport {
        order,
        samples: values.len(),
        ratio,
        stderr,
        ci,
        bound,
        violated: ci[0] > bound,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionScan {
    pub estimate: ExpEstimate,
    pub cutoffs: Vec<usize>,
}

/// One estimate per cutoff, each on its own stream `derive_seed(seed, N)`.
pub fn partition_scan(scan: &PartitionScan, exec: Execution) -> Result<Vec<EstimateReport>> {
    scan.cutoffs
        .iter()
        .map(|&n| {
            let cfg = ExpEstimate {
                cutoff_n: n,
                seed: derive_seed(scan.estimate.seed, n as u64),
                ..scan.estimate.clone()
            };
            estimate_exp_potential(&cfg, exec).map(|mut r| {
                r.seed = scan.estimate.seed;
                r
            })
        })
        .collect()
}
