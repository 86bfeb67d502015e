//! Flags, the flat `key=value` config file, and the resolved run config.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use logfield::wick::tamed_gamma;

pub const SEED_ENV: &str = "LCG_SEED";

#[derive(Parser, Debug)]
#[command(name = "logfield", version, about = "Monte Carlo scans for log-correlated Gibbs measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a field ensemble.
    Sample(Flags),
    /// Run the spectral, field, Wick and variational property checks.
    VerifyLemmas(Flags),
    /// `E[e^{R_N}]` over an N list.
    ScanPartition(Flags),
    /// Boué–Dupuis objective and truncated partition estimates over an M list.
    ScanDivergence(Flags),
    /// Tamed cubic `E[e^{𝓡_N}]` over an N list.
    ScanCubic(Flags),
    /// Smooth tamed quartic `E[e^{𝓡^γ_N}]` over an N list.
    ScanSmooth(Flags),
    /// Zakharov scans: direct marginal, change of variables, variational bound.
    Zakharov(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Sample(f) => (CommandKind::Sample, f),
            Command::VerifyLemmas(f) => (CommandKind::VerifyLemmas, f),
            Command::ScanPartition(f) => (CommandKind::ScanPartition, f),
            Command::ScanDivergence(f) => (CommandKind::ScanDivergence, f),
            Command::ScanCubic(f) => (CommandKind::ScanCubic, f),
            Command::ScanSmooth(f) => (CommandKind::ScanSmooth, f),
            Command::Zakharov(f) => (CommandKind::Zakharov, f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Sample,
    VerifyLemmas,
    ScanPartition,
    ScanDivergence,
    ScanCubic,
    ScanSmooth,
    Zakharov,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Sample => "sample",
            CommandKind::VerifyLemmas => "verify-lemmas",
            CommandKind::ScanPartition => "scan-partition",
            CommandKind::ScanDivergence => "scan-divergence",
            CommandKind::ScanCubic => "scan-cubic",
            CommandKind::ScanSmooth => "scan-smooth",
            CommandKind::Zakharov => "zakharov",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    ChangeOfVariables,
    Bound,
    All,
}

/// Every flag is optional so that argv can be layered over a config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Wick-mass cutoff(s).
    #[arg(long = "K", value_delimiter = ',', allow_negative_numbers = true)]
    pub k_cut: Option<Vec<f64>>,
    /// Ceiling on the exponent.
    #[arg(long = "L", allow_negative_numbers = true)]
    pub ceiling: Option<f64>,
    /// Taming constant.
    #[arg(long = "A", allow_negative_numbers = true)]
    pub taming: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Smoothness of the base law `⟨n⟩^{-2α}`; log-correlated if absent.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Coupling constant.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Interaction order.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time steps for simulated drift paths; exact terminal sampling if absent.
    #[arg(long = "J")]
    pub time_steps: Option<usize>,
    /// `N = ratio·M` for drift scans.
    #[arg(long)]
    pub ratio: Option<usize>,
    /// Thresholds for `P(‖π_{≠0}|u|²‖ > M)` in the Zakharov scan.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub threshold: Option<Vec<f64>>,
    #[arg(long)]
    pub route: Option<Route>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Flat `key=value` file; argv overrides it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; never part of the echoed config.
    #[arg(long)]
    pub workers: Option<usize>,
}

macro_rules! layer {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Flags { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Flags {
    /// Field-wise `self` over `base`.
    pub fn over(self, base: Flags) -> Flags {
        layer!(
            self, base, d, n, m, k_cut, ceiling, taming, gamma, alpha, sigma, k, samples, seed, time_steps,
            ratio, threshold, route, output, format, config, workers
        )
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("config line {}: expected key=value", no + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Runs the pairs through the same flag parser as argv.
pub fn flags_from_pairs(kind: CommandKind, pairs: &BTreeMap<String, String>) -> Result<Flags, ConfigError> {
    let mut argv = vec!["logfield".to_string(), kind.name().to_string()];
    for (k, v) in pairs {
        if k == "command" {
            continue;
        }
        if matches!(k.as_str(), "config" | "workers") {
            return Err(ConfigError(format!("key {k} is not allowed in a config file")));
        }
        argv.push(format!("--{k}={v}"));
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| ConfigError(first_line(&e.to_string())))?;
    Ok(cli.command.split().1)
}

pub fn first_line(s: &str) -> String {
    s.lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("invalid arguments")
        .trim()
        .trim_start_matches("error: ")
        .to_string()
}

/// The resolved configuration; echoed into every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    #[serde(rename = "K")]
    pub k_cut: Vec<f64>,
    #[serde(rename = "L")]
    pub ceiling: Option<f64>,
    #[serde(rename = "A")]
    pub taming: f64,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma: f64,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "J")]
    pub time_steps: Option<usize>,
    pub ratio: usize,
    pub threshold: Vec<f64>,
    pub route: Route,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn resolve(kind: CommandKind, f: Flags, env_seed: Option<&str>) -> Result<RunConfig, ConfigError> {
        use CommandKind::*;
        let seed = match (f.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("{SEED_ENV}={s} is not an unsigned integer")))?,
            (None, None) => 0,
        };
        let d = f.d.unwrap_or(if kind == ScanSmooth { 1 } else { 2 });
        let default_n = match kind {
            Sample | VerifyLemmas => vec![16],
            ScanSmooth => vec![32, 64, 128, 256],
            Zakharov => vec![8, 16, 32, 64, 128],
            _ => vec![16, 32, 64, 128],
        };
        let alpha = match kind {
            ScanSmooth => Some(f.alpha.unwrap_or(1.0)),
            _ => f.alpha,
        };
        let gamma = match (kind, f.gamma, alpha) {
            (ScanSmooth, None, Some(a)) => Some(tamed_gamma(a, d).map_err(|e| ConfigError(e.to_string()))?),
            (_, g, _) => g,
        };
        let cfg = RunConfig {
            command: kind,
            d,
            n: f.n.unwrap_or(default_n),
            m: f.m.unwrap_or_else(|| vec![8, 16, 32, 64]),
            k_cut: f.k_cut.unwrap_or_else(|| match kind {
                ScanDivergence | Zakharov => vec![1.0],
                _ => Vec::new(),
            }),
            ceiling: f.ceiling,
            taming: f.taming.unwrap_or(5.0),
            gamma,
            alpha,
            sigma: f.sigma.unwrap_or(match kind {
                ScanPartition => -1.0,
                ScanCubic => 3.0,
                _ => 1.0,
            }),
            k: f.k.unwrap_or(4),
            samples: f.samples.unwrap_or(match kind {
                Sample => 100,
                VerifyLemmas => 4000,
                _ => 1000,
            }),
            seed,
            time_steps: f.time_steps,
            ratio: f.ratio.unwrap_or(2),
            threshold: f.threshold.unwrap_or_else(|| vec![8.0, 12.0]),
            route: f.route.unwrap_or(Route::All),
            output: f.output,
            format: f.format.unwrap_or(Format::Csv),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if !(1..=3).contains(&self.d) {
            return bad(format!("d = {} must be 1, 2 or 3", self.d));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("N must be a nonempty list of positive cutoffs".into());
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.k_cut.iter().any(|k| k.is_nan() || *k <= 0.0) {
            return bad("every K must be positive".into());
        }
        if self.ratio == 0 {
            return bad("ratio must be positive".into());
        }
        if matches!(self.command, CommandKind::ScanDivergence) && self.m.iter().any(|&m| m < 4) {
            return bad("every M must be at least 4".into());
        }
        if matches!(self.command, CommandKind::Sample) && self.output.is_none() {
            return bad("sample needs --output".into());
        }
        if matches!(self.command, CommandKind::Zakharov) && self.d != 2 {
            return bad("the Zakharov scans live on the 2-torus (d = 2)".into());
        }
        Ok(())
    }

    /// `key=value` lines in the config-file syntax; `None` fields are omitted
    /// since they resolve back to `None`.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut p = vec![
            ("command".to_string(), self.command.name().to_string()),
            ("d".into(), self.d.to_string()),
            ("N".into(), join(&self.n)),
            ("M".into(), join(&self.m)),
        ];
        if !self.k_cut.is_empty() {
            p.push(("K".into(), join(&self.k_cut)));
        }
        if let Some(l) = self.ceiling {
            p.push(("L".into(), l.to_string()));
        }
        p.push(("A".into(), self.taming.to_string()));
        if let Some(g) = self.gamma {
            p.push(("gamma".into(), g.to_string()));
        }
        if let Some(a) = self.alpha {
            p.push(("alpha".into(), a.to_string()));
        }
        p.push(("sigma".into(), self.sigma.to_string()));
        p.push(("k".into(), self.k.to_string()));
        p.push(("samples".into(), self.samples.to_string()));
        p.push(("seed".into(), self.seed.to_string()));
        if let Some(j) = self.time_steps {
            p.push(("J".into(), j.to_string()));
        }
        p.push(("ratio".into(), self.ratio.to_string()));
        p.push(("threshold".into(), join(&self.threshold)));
        let route = serde_json::to_value(self.route).expect("route serializes");
        p.push(("route".into(), route.as_str().unwrap_or_default().to_string()));
        if let Some(o) = &self.output {
            p.push(("output".into(), o.display().to_string()));
        }
        let format = serde_json::to_value(self.format).expect("format serializes");
        p.push(("format".into(), format.as_str().unwrap_or_default().to_string()));
        p
    }

    /// Recovers the config from the `# key=value` preamble of a CSV artifact.
    #[cfg(test)]
    pub fn from_csv_echo(text: &str) -> Result<RunConfig, ConfigError> {
        let pairs = pairs_from_file(text)?;
        let kind = pairs
            .get("command")
            .and_then(|c| CommandKind::from_str(c, false).ok())
            .ok_or_else(|| ConfigError("echo has no command".into()))?;
        RunConfig::resolve(kind, flags_from_pairs(kind, &pairs)?, None)
    }
}

/// Config pairs from either a plain config file or a CSV artifact, whose
/// `# key=value` preamble is the echoed config.
pub fn pairs_from_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    if !text.starts_with("# command=") {
        return parse_pairs(text);
    }
    let lines: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim()))
        .collect();
    parse_pairs(&lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_skip_comments_and_reject_junk() {
        let p = parse_pairs("# header\nd = 2\n\nN=8,16 # trailing\n").unwrap();
        assert_eq!(p["d"], "2");
        assert_eq!(p["N"], "8,16");
        assert!(parse_pairs("d 2").is_err());
    }

    #[test]
    fn argv_overrides_file() {
        let file = flags_from_pairs(
            CommandKind::ScanPartition,
            &parse_pairs("sigma=-1\nsamples=500\nN=16,32").unwrap(),
        )
        .unwrap();
        let argv = Flags {
            samples: Some(200),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(CommandKind::ScanPartition, argv.over(file), None).unwrap();
        assert_eq!(cfg.samples, 200);
        assert_eq!(cfg.sigma, -1.0);
        assert_eq!(cfg.n, vec![16, 32]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        let kind = CommandKind::ScanCubic;
        assert!(flags_from_pairs(kind, &parse_pairs("bogus=1").unwrap()).is_err());
        assert!(flags_from_pairs(kind, &parse_pairs("d=two").unwrap()).is_err());
        assert!(flags_from_pairs(kind, &parse_pairs("workers=2").unwrap()).is_err());
        let f = flags_from_pairs(kind, &parse_pairs("d=7").unwrap()).unwrap();
        assert!(RunConfig::resolve(kind, f, None).is_err());
    }

    #[test]
    fn seed_falls_back_to_env() {
        let kind = CommandKind::ScanCubic;
        assert_eq!(RunConfig::resolve(kind, Flags::default(), Some("42")).unwrap().seed, 42);
        let f = Flags {
            seed: Some(3),
            ..Flags::default()
        };
        assert_eq!(RunConfig::resolve(kind, f, Some("42")).unwrap().seed, 3);
        assert!(RunConfig::resolve(kind, Flags::default(), Some("x")).is_err());
    }

    #[test]
    fn echo_round_trips() {
        for kind in [
            CommandKind::VerifyLemmas,
            CommandKind::ScanPartition,
            CommandKind::ScanDivergence,
            CommandKind::ScanCubic,
            CommandKind::ScanSmooth,
            CommandKind::Zakharov,
        ] {
            let f = Flags {
                ceiling: Some(12.5),
                time_steps: Some(128),
                sigma: Some(-0.1),
                ..Flags::default()
            };
            let cfg = RunConfig::resolve(kind, f, Some("9")).unwrap();
            let echo: String = cfg.to_pairs().iter().map(|(k, v)| format!("# {k}={v}\n")).collect();
            assert_eq!(RunConfig::from_csv_echo(&echo).unwrap(), cfg);
            let json = serde_json::to_string(&cfg).unwrap();
            assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), cfg);
        }
    }
}
