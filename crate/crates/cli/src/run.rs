//! Dispatch from a resolved config to the library, and artifact emission.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use logfield::ensemble::write_ensemble;
use logfield::lemmas::{run_lemma_checks, Check, LemmaConfig};
use logfield::partition::{partition_scan, EstimateReport, ExpEstimate, MassCutoff, PartitionScan, Potential};
use logfield::rng::substream;
use logfield::variational::{divergence_scan, DivergenceConfig, ScanRow};
use logfield::zakharov::{
    zak_change_of_variables_check, zak_divergence_scan, zak_variational_bound, ZakharovBound, ZakharovScan,
};
use logfield::{sample, Error, Execution, GaussLaw, Lattice, LatticeSpec, Reality};

use crate::config::{CommandKind, Format, Route, RunConfig};

/// Ceiling factor for the variational drift scans, `L = factor·α²·Q(f_M)`.
const CEILING_FACTOR: f64 = 10.0;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Internal(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidLattice(_)
            | Error::InvalidLaw(_)
            | Error::InvalidParameter(_)
            | Error::UnsupportedOrder(_)
            | Error::HermiteOrder(_) => RunError::Config(e.to_string()),
            _ => RunError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Internal(e.to_string())
    }
}

pub enum Artifact {
    Rows(Vec<ScanRow>),
    Reports(Vec<EstimateReport>),
    Checks(Vec<Check>),
    Ensemble(Vec<u8>),
}

fn law(cfg: &RunConfig) -> GaussLaw {
    match cfg.alpha {
        Some(a) => GaussLaw::smooth(a, Reality::Real),
        None => GaussLaw::log_correlated(Reality::Real),
    }
}

fn scan(cfg: &RunConfig, potential: Potential, exec: Execution) -> Result<Vec<EstimateReport>, RunError> {
    let scan = PartitionScan {
        estimate: ExpEstimate {
            law: law(cfg),
            dim: cfg.d,
            cutoff_n: 0,
            potential,
            ceiling: cfg.ceiling,
            cutoff: cfg.k_cut.first().map(|&k| MassCutoff::absolute(k)),
            samples: cfg.samples,
            seed: cfg.seed,
        },
        cutoffs: cfg.n.clone(),
    };
    Ok(partition_scan(&scan, exec)?)
}

fn zakharov(cfg: &RunConfig, exec: Execution) -> Result<Vec<EstimateReport>, RunError> {
    let k = cfg.k_cut[0];
    let mut out = Vec::new();
    let wants = |r: Route| cfg.route == r || cfg.route == Route::All;
    if wants(Route::Direct) {
        let s = ZakharovScan {
            cutoffs: cfg.n.clone(),
            k,
            thresholds: cfg.threshold.clone(),
            ceiling: cfg.ceiling,
            samples: cfg.samples,
            seed: cfg.seed,
        };
        out.extend(zak_divergence_scan(&s, exec)?);
    }
    if wants(Route::ChangeOfVariables) {
        match cfg.ceiling {
            Some(l) => {
                for &n in &cfg.n {
                    out.push(zak_change_of_variables_check(n, k, l, cfg.samples, cfg.seed, exec)?);
                }
            }
            None if cfg.route == Route::ChangeOfVariables => {
                return Err(RunError::Config("the change-of-variables route needs --L".into()))
            }
            None => {}
        }
    }
    if wants(Route::Bound) {
        let b = ZakharovBound {
            cutoffs: cfg.n.clone(),
            cutoff_ratio: cfg.ratio,
            k,
            ceiling_factor: CEILING_FACTOR,
            samples: cfg.samples,
            seed: cfg.seed,
        };
        out.extend(zak_variational_bound(&b, exec)?);
    }
    Ok(out)
}

pub fn execute(cfg: &RunConfig, exec: Execution) -> Result<Artifact, RunError> {
    match cfg.command {
        CommandKind::Sample => {
            let lat = Lattice::new(LatticeSpec::new(cfg.d, cfg.n[0])?);
            let law = law(cfg);
            let fields = (0..cfg.samples)
                .map(|i| sample(&law, &lat, &mut substream(cfg.seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut buf = Vec::new();
            write_ensemble(&mut buf, &fields)?;
            Ok(Artifact::Ensemble(buf))
        }
        CommandKind::VerifyLemmas => {
            let lc = LemmaConfig {
                dim: cfg.d,
                cutoff: cfg.n[0],
                samples: cfg.samples,
                seed: cfg.seed,
            };
            Ok(Artifact::Checks(run_lemma_checks(&lc, exec)?))
        }
        CommandKind::ScanPartition => scan(
            cfg,
            Potential::Quartic {
                coupling: cfg.sigma,
                order: cfg.k,
            },
            exec,
        )
        .map(Artifact::Reports),
        CommandKind::ScanCubic => scan(
            cfg,
            Potential::CubicTamed {
                coupling: cfg.sigma,
                taming: cfg.taming,
            },
            exec,
        )
        .map(Artifact::Reports),
        CommandKind::ScanSmooth => {
            let gamma = cfg
                .gamma
                .ok_or_else(|| RunError::Config("scan-smooth needs gamma".into()))?;
            scan(
                cfg,
                Potential::SmoothTamed {
                    coupling: cfg.sigma,
                    taming: cfg.taming,
                    gamma,
                },
                exec,
            )
            .map(Artifact::Reports)
        }
        CommandKind::ScanDivergence => {
            let dc = DivergenceConfig {
                dim: cfg.d,
                scales: cfg.m.clone(),
                cutoff_ratio: cfg.ratio,
                k_cuts: cfg.k_cut.clone(),
                coupling: cfg.sigma,
                ceiling_factor: CEILING_FACTOR,
                ceiling: cfg.ceiling,
                samples: cfg.samples,
                seed: cfg.seed,
                time_steps: cfg.time_steps,
            };
            Ok(Artifact::Rows(divergence_scan(&dc, exec)?))
        }
        CommandKind::Zakharov => zakharov(cfg, exec).map(Artifact::Reports),
    }
}

/// Flat CSV form of [`EstimateReport`]; `params` is a JSON object string.
#[derive(Serialize)]
struct ReportRow<'a> {
    quantity: &'a str,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    law: &'a str,
    potential: &'a str,
    params: String,
    samples: usize,
    mean: f64,
    stderr: f64,
    ci_low: f64,
    ci_high: f64,
    tail_flag: f64,
    seed: u64,
    lower_bound_only: bool,
}

impl<'a> From<&'a EstimateReport> for ReportRow<'a> {
    fn from(r: &'a EstimateReport) -> Self {
        ReportRow {
            quantity: &r.quantity,
            d: r.d,
            n: r.n,
            law: &r.law,
            potential: &r.potential,
            params: serde_json::Value::Object(r.params.clone()).to_string(),
            samples: r.samples,
            mean: r.mean,
            stderr: r.stderr,
            ci_low: r.ci[0],
            ci_high: r.ci[1],
            tail_flag: r.tail_flag,
            seed: r.seed,
            lower_bound_only: r.lower_bound_only,
        }
    }
}

fn csv_body<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| RunError::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| RunError::Internal(e.to_string()))
}

fn csv_with_echo(cfg: &RunConfig, body: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, v) in cfg.to_pairs() {
        out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
    }
    out.extend(body);
    out
}

fn json_doc(cfg: &RunConfig, key: &str, value: serde_json::Value) -> Result<Vec<u8>, RunError> {
    let doc = json!({ "config": cfg, key: value });
    let mut s = serde_json::to_vec_pretty(&doc).map_err(|e| RunError::Internal(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value, RunError> {
    serde_json::to_value(v).map_err(|e| RunError::Internal(e.to_string()))
}

/// Serialized bytes of the main artifact.
pub fn render(cfg: &RunConfig, artifact: &Artifact) -> Result<Vec<u8>, RunError> {
    match (artifact, cfg.format) {
        (Artifact::Ensemble(bytes), _) => Ok(bytes.clone()),
        (Artifact::Rows(rows), Format::Csv) => Ok(csv_with_echo(cfg, csv_body(rows)?)),
        (Artifact::Rows(rows), Format::Json) => json_doc(cfg, "rows", to_value(rows)?),
        (Artifact::Reports(reps), Format::Csv) => Ok(csv_with_echo(cfg, csv_body(reps.iter().map(ReportRow::from))?)),
        (Artifact::Reports(reps), Format::Json) => json_doc(cfg, "reports", to_value(reps)?),
        (Artifact::Checks(checks), Format::Csv) => Ok(csv_with_echo(cfg, csv_body(checks)?)),
        (Artifact::Checks(checks), Format::Json) => json_doc(cfg, "checks", to_value(checks)?),
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| RunError::Internal(e.to_string()))?;
    Ok(())
}

/// Sidecar for binary ensembles, which have no room for the config echo.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

pub fn sidecar(cfg: &RunConfig) -> Result<Vec<u8>, RunError> {
    json_doc(cfg, "ensemble", json!({ "d": cfg.d, "N": cfg.n[0], "samples": cfg.samples }))
}

pub fn print_checks(checks: &[Check]) {
    println!("{:<38} {:>16} {:>16} {:>12}  result", "check", "measured", "target", "tolerance");
    for c in checks {
        println!(
            "{:<38} {:>16.8e} {:>16.8e} {:>12.3e}  {}",
            c.name,
            c.measured,
            c.target,
            c.tolerance,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
}
