//! Command implementations behind the `opcqkd` binary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use opcqkd::channel::{hwp_matrix, round_trip_matrix, CouplingSpec, PerturbationSequence};
use opcqkd::protocol::{run_session, SessionConfig, SessionStats};
use opcqkd::rng::RngSeed;
use opcqkd::states::IntensityRole;

pub const VERIFY_THRESHOLD: f64 = 1e-8;
pub const SWEEP_HEADER: [&str; 5] = ["value", "qber", "gain_signal", "gain_decoy", "sifted_fraction"];

/// Bad command-line input; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Seed from the wall clock, for runs that did not pin one.
pub fn fresh_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    RngSeed(nanos).derive(u64::from(std::process::id()), opcqkd::rng::StreamRole::Channel).0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest<C, R> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub results: R,
}

impl<C, R> RunManifest<C, R> {
    fn new(command: &str, seed: u64, config: C, started_at: DateTime<Utc>, results: R) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config,
            started_at,
            finished_at: Utc::now(),
            results,
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Symmetric,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyArgs {
    pub dim: usize,
    pub q: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: VerifyMode,
    pub kappa_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub dim: usize,
    pub n_cores: usize,
    pub q: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: VerifyMode,
    /// Largest `‖M_T − D‖_max` over all trials.
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub threshold: f64,
    pub failed_trials: usize,
    pub passed: bool,
}

pub fn verify(args: &VerifyArgs) -> Result<VerifyReport> {
    if args.dim < 2 || !args.dim.is_multiple_of(2) {
        return Err(usage(format!("--dim must be even and at least 2, got {}", args.dim)));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let n = args.dim / 2;
    let spec = CouplingSpec {
        kappa_scale: args.kappa_scale,
        ..CouplingSpec::default()
    };
    let seed = RngSeed(args.seed);
    let d = hwp_matrix(n);
    let mut deviations = Vec::with_capacity(args.trials);
    for t in 0..args.trials {
        let mut rng = seed.stream(t as u64, opcqkd::rng::StreamRole::Channel);
        let seq = match args.mode {
            VerifyMode::Symmetric => PerturbationSequence::random_symmetric(n, args.q, &spec, &mut rng),
            VerifyMode::General => PerturbationSequence::random_general(n, args.q, &mut rng),
        }
        .map_err(|e| usage(e.to_string()))?;
        deviations.push(round_trip_matrix(&seq).max_abs_diff(&d));
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let failed_trials = deviations.iter().filter(|&&x| x > VERIFY_THRESHOLD).count();
    Ok(VerifyReport {
        dim: args.dim,
        n_cores: n,
        q: args.q,
        trials: args.trials,
        seed: args.seed,
        mode: args.mode,
        max_deviation,
        mean_deviation: deviations.iter().sum::<f64>() / deviations.len() as f64,
        threshold: VERIFY_THRESHOLD,
        failed_trials,
        passed: failed_trials == 0,
    })
}

pub fn run_verify(args: &VerifyArgs, out: Option<&Path>) -> Result<VerifyReport> {
    let started = Utc::now();
    let report = verify(args)?;
    if let Some(path) = out {
        write_json(path, &RunManifest::new("verify", args.seed, args.clone(), started, report.clone()))?;
    }
    Ok(report)
}

// ---------------------------------------------------------------- session

/// Read a session config; fills in a fresh seed when none is given.
pub fn load_config(path: &Path) -> Result<SessionConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg: SessionConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    cfg.validate()
        .with_context(|| format!("invalid config {}", path.display()))?;
    if cfg.seed.is_none() {
        cfg.seed = Some(fresh_seed());
    }
    Ok(cfg)
}

pub type SessionManifest = RunManifest<SessionConfig, SessionStats>;

pub fn run_session_command(config_path: &Path, out: &Path) -> Result<SessionManifest> {
    let started = Utc::now();
    let cfg = load_config(config_path)?;
    let stats = run_session(&cfg)?;
    let manifest = RunManifest::new("session", cfg.effective_seed(), cfg, started, stats);
    write_json(out, &manifest)?;
    Ok(manifest)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

pub fn summary_table(stats: &SessionStats) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "sent {}  detected {}  sifted {}  errors {}\n",
        stats.sent, stats.detected, stats.sifted, stats.errors
    ));
    s.push_str(&format!("{:<12}{:>10}{:>10}{:>12}\n", "basis", "sifted", "errors", "qber"));
    for b in &stats.per_basis {
        s.push_str(&format!("{:<12}{:>10}{:>10}{:>12}\n", b.basis, b.sifted, b.errors, fmt_opt(b.qber)));
    }
    s.push_str(&format!("{:<12}{:>10}{:>10}{:>12}\n", "all", stats.sifted, stats.errors, fmt_opt(stats.qber)));
    s.push_str(&format!("{:<12}{:>10}{:>10}{:>12}\n", "intensity", "mu", "sent", "gain"));
    for i in &stats.per_intensity {
        let role = serde_json::to_value(i.role).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        s.push_str(&format!("{:<12}{:>10.4}{:>10}{:>12}\n", role, i.mu, i.sent, fmt_opt(i.gain)));
    }
    s
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepAxis {
    QPerturbations,
    NCores,
    MuSignal,
    KappaL,
}

impl SweepAxis {
    fn is_integer(self) -> bool {
        matches!(self, SweepAxis::QPerturbations | SweepAxis::NCores)
    }

    fn apply(self, cfg: &mut SessionConfig, value: f64) -> Result<()> {
        match self {
            SweepAxis::QPerturbations => cfg.q_perturbations = value as usize,
            SweepAxis::NCores => cfg.n_cores = value as usize,
            SweepAxis::KappaL => cfg.kappa_l = value,
            SweepAxis::MuSignal => {
                let signal = cfg
                    .intensities
                    .iter_mut()
                    .find(|p| p.role == IntensityRole::Signal)
                    .ok_or_else(|| usage("config has no signal intensity to sweep"))?;
                signal.mu = value;
            }
        }
        Ok(())
    }
}

pub fn parse_values(raw: &[String], axis: SweepAxis) -> Result<Vec<f64>> {
    let tokens: Vec<&str> = raw.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if tokens.is_empty() {
        return Err(usage("--values must list at least one value"));
    }
    tokens
        .iter()
        .map(|t| {
            let v: f64 = t.parse().map_err(|_| usage(format!("not a number: {t:?}")))?;
            if !v.is_finite() {
                return Err(usage(format!("not a finite number: {t:?}")));
            }
            if axis.is_integer() && (v < 0.0 || v.fract() != 0.0) {
                return Err(usage(format!("axis needs non-negative integers, got {t}")));
            }
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub stats: SessionStats,
}

pub fn sweep(base: &SessionConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(usage("--values must list at least one value"));
    }
    values
        .iter()
        .map(|&value| {
            let mut cfg = base.clone();
            axis.apply(&mut cfg, value)?;
            let stats = run_session(&cfg).with_context(|| format!("sweep point {value}"))?;
            Ok(SweepRow { value, stats })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow], axis: SweepAxis) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let value = if axis.is_integer() {
            (r.value as u64).to_string()
        } else {
            r.value.to_string()
        };
        w.write_record([
            value,
            opt(r.stats.qber),
            opt(r.stats.gain(IntensityRole::Signal)),
            opt(r.stats.gain(IntensityRole::Decoy)),
            r.stats.sifted_fraction.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn run_sweep_command(config_path: &Path, axis: SweepAxis, raw_values: &[String], out: &Path) -> Result<Vec<SweepRow>> {
    let values = parse_values(raw_values, axis)?;
    let cfg = load_config(config_path)?;
    let rows = sweep(&cfg, axis, &values)?;
    let text = sweep_csv(&rows, axis)?;
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    Ok(rows)
}

/// Resolved output path, refusing to run a command whose output directory
/// does not exist.
pub fn check_output(path: &Path) -> Result<PathBuf> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            bail!("output directory {} does not exist", dir.display())
        }
        _ => Ok(path.to_path_buf()),
    }
}
