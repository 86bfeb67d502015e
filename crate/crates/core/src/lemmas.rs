//! Quick property checks over the spectral, field, Wick and variational
//! layers, each reported with the quantity measured and its tolerance.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::{map_samples, try_map_samples, Execution};
use crate::field::{integrate, sample, GaussLaw, Reality, SpectralField};
use crate::rng::{derive_seed, substream};
use crate::spectrum::{bracket, for_each_point, green_truncated, radial_sum, sigma_n, Lattice, LatticeSpec};
use crate::stats::{CompensatedSum, Summary};
use crate::variational::{alpha_mn, exact_ensemble, fm_mass, shifted_wick_mass, BumpProfile, DriftSetup};
use crate::wick::{hermite, potential_rn, wick_mass, wick_shift_expand};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: f64,
    /// Absolute tolerance on `|measured − target|`.
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            measured,
            target,
            tolerance,
            passed: (measured - target).abs() <= tolerance,
        }
    }

    fn statistical(name: &str, s: &Summary, target: f64, k: f64) -> Self {
        Self::new(name, s.mean, target, k * s.stderr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub dim: usize,
    pub cutoff: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            dim: 2,
            cutoff: 16,
            samples: 4000,
            seed: 0,
        }
    }
}

fn rel(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

pub fn run_lemma_checks(cfg: &LemmaConfig, exec: Execution) -> Result<Vec<Check>> {
    let (d, n) = (cfg.dim, cfg.cutoff);
    let spec = LatticeSpec::new(d, n)?;
    let lat = Lattice::new(spec);
    let sigma = sigma_n(&spec);
    let mut out = Vec::new();

    let mut direct = CompensatedSum::new();
    for_each_point(d, n, |p| direct.add(bracket(&p[..d]).powf(-(d as f64))));
    out.push(Check::new("sigma_N equals the lattice sum", sigma, direct.value(), rel(sigma)));
    let origin = vec![0.0; d];
    out.push(Check::new("G_N(0) equals sigma_N", green_truncated(&spec, &origin), sigma, rel(sigma)));

    let law = GaussLaw::log_correlated(Reality::Real);
    let seed = derive_seed(cfg.seed, 1);
    let fields: Vec<SpectralField> =
        try_map_samples(exec, cfg.samples, |i| sample(&law, &lat, &mut substream(seed, i as u64)))?;

    let u = &fields[0];
    let grid_mass = integrate(&u.to_grid()?.map(|v| v * v));
    out.push(Check::new(
        "Parseval on the grid",
        grid_mass,
        u.l2_norm_sq(),
        1e-10 * grid_mass.abs().max(1.0),
    ));
    let back = SpectralField::from_grid(lat.clone(), &u.to_grid()?)?;
    let err = back
        .coeffs()
        .iter()
        .zip(u.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    out.push(Check::new("grid round trip", err, 0.0, 1e-10));

    let at0: Vec<f64> = fields.iter().map(|f| f.to_grid().map(|g| g.values[0])).collect::<Result<_>>()?;
    let sq: Vec<f64> = at0.iter().map(|v| v * v).collect();
    out.push(Check::statistical("E[u_N(0)^2] = sigma_N", &Summary::of(&sq), sigma, 4.0));

    for (k, m) in [(1, 1), (1, 2), (2, 2), (1, 3)] {
        let v: Vec<f64> = at0
            .iter()
            .map(|&x| hermite(k, x, sigma).and_then(|a| Ok(a * hermite(m, x, sigma)?)))
            .collect::<Result<_>>()?;
        let target = if k == m {
            (1..=k).product::<usize>() as f64 * sigma.powi(k as i32)
        } else {
            0.0
        };
        out.push(Check::statistical(
            &format!("E[H_{k} H_{m}] orthogonality"),
            &Summary::of(&v),
            target,
            4.0,
        ));
    }

    let masses: Vec<f64> = fields.iter().map(|f| wick_mass(f).powi(2)).collect();
    let var = 2.0 * radial_sum(d, n, |k| (1.0 + k as f64).powf(-(d as f64)));
    out.push(Check::statistical("Var of the Wick mass", &Summary::of(&masses), var, 4.0));

    let profile = BumpProfile::new(d)?;
    let fm = crate::variational::build_fm(4, &profile, &spec)?;
    let theta = fm.scaled(0.7);
    let shifted = u.combine(1.0, &theta, 1.0)?;
    let expanded = wick_shift_expand(u, &theta, 4, sigma, 1.0)?.total;
    let direct = potential_rn(&shifted, 1.0, 4)?;
    out.push(Check::new(
        "Wick shift expansion",
        expanded,
        direct,
        1e-10 * direct.abs().max(1.0),
    ));

    let m_small = 4.min(n);
    let m_large = n;
    let gap_small = (fm_mass(m_small, &profile) - 1.0).abs();
    let gap_large = (fm_mass(m_large, &profile) - 1.0).abs();
    out.push(Check::new("f_M mass approaches 1", gap_large, 0.0, gap_small));
    let a1 = alpha_mn(m_small, n, &profile)?;
    let a2 = alpha_mn(m_small, 2 * n, &profile)?;
    out.push(Check::new("alpha independent of N", a1, a2, rel(a1)));

    let setup = DriftSetup::new(lat.clone(), (n / 2).max(4))?;
    let seed = derive_seed(cfg.seed, 2);
    let ens = try_map_samples(exec, cfg.samples, |i| exact_ensemble(&setup, &mut substream(seed, i as u64)))?;
    let costs: Vec<f64> = ens.iter().map(|e| e.drift_cost).collect();
    out.push(Check::statistical(
        "conditional drift cost mean",
        &Summary::of(&costs),
        setup.mean_drift_cost(),
        4.0,
    ));
    let shifted: Vec<f64> = map_samples(exec, ens.len(), |i| {
        shifted_wick_mass(&ens[i].y, &ens[i].theta0).unwrap_or(f64::NAN)
    });
    out.push(Check::statistical("shifted Wick mass centered", &Summary::of(&shifted), 0.0, 4.0));
    Ok(out)
}
