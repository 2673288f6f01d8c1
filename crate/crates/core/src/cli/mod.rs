//! Command-line driver behind the `krr-sphere` binary.
//!
//! Every subcommand takes either flags, a `--preset`, or a JSON
//! [`ExperimentConfig`] via `--config`. Exit codes: 0 on success, 1 for usage
//! errors (bad flags, configs or domain violations), 2 for numeric failures.

pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::eigenframework::{
    benign_condition_check, catastrophic_condition_check, e0_bracket, predicted_risk,
    BenignDiagnostics, E0Bracket, RiskPrediction, TargetSpec,
};
use crate::error::{Error, Result};
use crate::harmonics::{index_summary, IndexSummary};
use crate::regimes::{
    classify_bandwidth_regime, master_upper_bound, risk_lower_bound, scan, verify_assumptions,
    AssumptionCheck, AssumptionThresholds, BandwidthSchedule, LowerBound, Modifier, ScanConfig,
    UpperBound, UpperVariant,
};
use crate::simulator::{run_experiment, JitterPolicy, SimConfig, SimResult, SimTarget};
use crate::spectrum::{build_spectrum, SpectrumSpec, DEFAULT_TAIL_TOL};

use output::{scan_csv, sim_csv, stable_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub d: u32,
    pub tau: f64,
    pub m: u64,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictConfig {
    pub d: u32,
    pub tau: f64,
    pub m: u64,
    pub sigma_sq: f64,
    pub target: TargetSpec,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub d: u32,
    pub m: u64,
    pub bandwidth: BandwidthSchedule,
    pub sigma_sq: f64,
    pub target: TargetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

/// Parameters of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandConfig {
    Spectrum(SpectrumConfig),
    Predict(PredictConfig),
    Regime(RegimeConfig),
    Simulate { runs: Vec<SimConfig> },
    Scan(ScanConfig),
}

impl CommandConfig {
    fn name(&self) -> &'static str {
        match self {
            CommandConfig::Spectrum(_) => "spectrum",
            CommandConfig::Predict(_) => "predict",
            CommandConfig::Regime(_) => "regime",
            CommandConfig::Simulate { .. } => "simulate",
            CommandConfig::Scan(_) => "scan",
        }
    }
}

/// Where results go.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Output path; `both` writes `<path>.csv` and `<path>.json`. Stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A complete experiment as stored in a `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub run: CommandConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Parser)]
#[command(name = "krr-sphere", version, about = "Risk predictions, bounds and simulations for Gaussian kernel ridgeless regression on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gaussian-kernel eigenvalues by degree, truncated with a certified tail.
    Spectrum(SpectrumArgs),
    /// Closed-form risk prediction at one (d, tau, m).
    Predict(PredictArgs),
    /// Bandwidth case, assumptions, bounds and E0 bracket at one point.
    Regime(RegimeArgs),
    /// Monte Carlo risk of the minimum-norm interpolant.
    Simulate(SimulateArgs),
    /// Predictions and bounds along a schedule, with a regime classification.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON experiment config; replaces the other parameter flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Constant target value.
    #[arg(long, conflicts_with = "target_file")]
    pub target_constant: Option<f64>,
    /// JSON file holding a per-degree target.
    #[arg(long)]
    pub target_file: Option<PathBuf>,
}

impl TargetArgs {
    fn resolve(&self) -> Result<TargetSpec> {
        match (&self.target_file, self.target_constant) {
            (Some(p), _) => {
                let t: TargetSpec = serde_json::from_str(&read_text(p)?)?;
                TargetSpec::new(t.coefficients, t.bound)
            }
            (None, Some(c)) => Ok(TargetSpec::constant(c)),
            (None, None) => Ok(TargetSpec::constant(1.0)),
        }
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_sq: f64,
    /// Explicit ridge; 0 is the interpolant.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleKind {
    InverseLog,
    Log,
    Power,
    Constant,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Fixed bandwidth.
    #[arg(long, conflicts_with = "schedule")]
    pub tau: Option<f64>,
    /// Bandwidth `scale * m^{-1/(d-1)} * t(m)`.
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleKind>,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Exponent for `--schedule power`.
    #[arg(long, default_value_t = 0.0)]
    pub power: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_sq: f64,
    /// Eigenvalue-floor constant for the lower bound (measured when absent).
    #[arg(long)]
    pub b: Option<f64>,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    pub target_constant: f64,
    #[arg(long, default_value_t = 2000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 32)]
    pub n_trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Largest level for the `corollary3` preset.
    #[arg(long, default_value_t = 2)]
    pub l_max: u32,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: Common,
}

/// Result of the `regime` command.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeSummary {
    pub d: u32,
    pub m: u64,
    pub tau: f64,
    pub bandwidth_case: u8,
    pub index: IndexSummary,
    pub prediction: RiskPrediction,
    pub assumptions: AssumptionCheck,
    pub upper_sq: Option<UpperBound>,
    pub upper_lin: Option<UpperBound>,
    pub lower: LowerBound,
    pub e0_bracket: E0Bracket,
    pub benign: Option<BenignDiagnostics>,
    /// `r_k / k` at `k = 1.1 m`.
    pub catastrophic_ratio: Option<f64>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))
}

fn load_config(path: &Path, expected: &str) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_json(&read_text(path)?)?;
    if cfg.run.name() != expected {
        return Err(Error::domain(format!(
            "config describes a '{}' run, not '{expected}'",
            cfg.run.name()
        )));
    }
    Ok(cfg)
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::domain(format!("--{flag} is required without --config")))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(
    out: &OutputSpec,
    csv: impl FnOnce() -> Result<String>,
    json: impl FnOnce() -> Result<String>,
) -> Result<()> {
    match (out.format, out.path.as_deref()) {
        (Format::Csv, p) => write_out(p, &csv()?),
        (Format::Json, p) => write_out(p, &json()?),
        (Format::Both, Some(p)) => {
            write_out(Some(&p.with_extension("csv")), &csv()?)?;
            write_out(Some(&p.with_extension("json")), &json()?)
        }
        (Format::Both, None) => {
            write_out(None, &json()?)?;
            write_out(None, &csv()?)
        }
    }
}

fn json_output(path: Option<PathBuf>) -> OutputSpec {
    OutputSpec {
        path,
        format: Format::Json,
    }
}

pub fn run_spectrum(cfg: &SpectrumConfig, out: &OutputSpec) -> Result<()> {
    let sys = build_spectrum(&SpectrumSpec::new(cfg.d, cfg.tau)?, cfg.m, cfg.tail_tol)?;
    let flat = sys.flattened_total();
    eprintln!(
        "degrees={} eigenvalues={} trace_partial={} tail_bound={}",
        sys.degrees.len(),
        flat,
        output::fmt_f64(sys.trace_partial),
        output::fmt_f64(sys.tail_bound)
    );
    write_out(out.path.as_deref(), &stable_json(&sys)?)
}

pub fn run_predict(cfg: &PredictConfig, out: &OutputSpec) -> Result<()> {
    let sys = build_spectrum(&SpectrumSpec::new(cfg.d, cfg.tau)?, cfg.m, cfg.tail_tol)?;
    let p = predicted_risk(&sys, &cfg.target, cfg.sigma_sq, cfg.m, cfg.delta)?;
    write_out(out.path.as_deref(), &stable_json(&p)?)
}

pub fn regime_summary(cfg: &RegimeConfig) -> Result<RegimeSummary> {
    let tau = cfg.bandwidth.tau(cfg.d, cfg.m)?;
    let case = classify_bandwidth_regime(cfg.d, &cfg.bandwidth)?;
    let sys = build_spectrum(&SpectrumSpec::new(cfg.d, tau)?, cfg.m, cfg.tail_tol)?;
    let prediction = predicted_risk(&sys, &cfg.target, cfg.sigma_sq, cfg.m, 0.0)?;
    let assumptions = verify_assumptions(&sys, cfg.m, &AssumptionThresholds::default())?;
    let lower = risk_lower_bound(&sys, cfg.m, cfg.sigma_sq, cfg.b)?;
    let bracket_b = lower.b;
    Ok(RegimeSummary {
        d: cfg.d,
        m: cfg.m,
        tau,
        bandwidth_case: case.number(),
        index: index_summary(cfg.d, cfg.m)?,
        upper_sq: master_upper_bound(&sys, cfg.m, &cfg.target, cfg.sigma_sq, UpperVariant::Squared).ok(),
        upper_lin: master_upper_bound(&sys, cfg.m, &cfg.target, cfg.sigma_sq, UpperVariant::Linear).ok(),
        lower,
        e0_bracket: e0_bracket(&sys, cfg.m, if bracket_b > 0.0 { bracket_b } else { 1.0 })?,
        benign: benign_condition_check(&sys, cfg.m).ok(),
        catastrophic_ratio: catastrophic_condition_check(&sys, cfg.m, 0.1).ok(),
        prediction,
        assumptions,
    })
}

pub fn run_regime(cfg: &RegimeConfig, out: &OutputSpec) -> Result<()> {
    let s = regime_summary(cfg)?;
    eprintln!(
        "case={} total={} e0={}",
        s.bandwidth_case,
        output::fmt_f64(s.prediction.total),
        output::fmt_f64(s.prediction.e_factor)
    );
    write_out(out.path.as_deref(), &stable_json(&s)?)
}

/// One simulate row: a finished experiment or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SimEntry {
    Done(SimResult),
    Failed {
        d: u32,
        m: u64,
        tau: f64,
        error: String,
    },
}

/// Run every config in order. Invalid configs fail the whole batch; numeric
/// failures are recorded per entry.
pub fn run_simulations(runs: &[SimConfig]) -> Result<Vec<SimEntry>> {
    for c in runs {
        c.validate()?;
    }
    runs.iter()
        .map(|c| match run_experiment(c) {
            Ok(r) => Ok(SimEntry::Done(r)),
            Err(e) if e.is_usage() => Err(e),
            Err(e) => Ok(SimEntry::Failed {
                d: c.d,
                m: c.m,
                tau: c.tau,
                error: e.to_string(),
            }),
        })
        .collect()
}

/// Writes every entry, then fails with a numeric error if any experiment failed.
pub fn run_simulate(runs: &[SimConfig], out: &OutputSpec) -> Result<()> {
    let entries = run_simulations(runs)?;
    for e in &entries {
        match e {
            SimEntry::Done(r) => eprintln!(
                "d={} m={} empirical={} stderr={} predicted={} null={}",
                r.d,
                r.m,
                output::fmt_f64(r.empirical_mean),
                output::fmt_f64(r.empirical_stderr),
                output::fmt_f64(r.predicted_total),
                output::fmt_f64(r.null_risk)
            ),
            SimEntry::Failed { d, m, error, .. } => eprintln!("d={d} m={m} failed: {error}"),
        }
    }
    emit(out, || sim_csv(&entries), || stable_json(&entries))?;
    let failed = entries
        .iter()
        .filter(|e| matches!(e, SimEntry::Failed { .. }))
        .count();
    if failed > 0 {
        return Err(Error::Numeric(format!(
            "{failed} of {} experiments failed",
            entries.len()
        )));
    }
    Ok(())
}

pub fn run_scan(cfg: &ScanConfig, out: &OutputSpec) -> Result<()> {
    let report = scan(cfg)?;
    eprintln!(
        "classification={} points={}",
        report.classification.as_str(),
        report.points.len()
    );
    emit(out, || scan_csv(&report), || stable_json(&report))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Spectrum(a) => {
            let (cfg, out) = match &a.common.config {
                Some(p) => match load_config(p, "spectrum")? {
                    ExperimentConfig {
                        run: CommandConfig::Spectrum(c),
                        output,
                    } => (c, output),
                    _ => unreachable!("checked by load_config"),
                },
                None => (
                    SpectrumConfig {
                        d: required(a.d, "d")?,
                        tau: required(a.tau, "tau")?,
                        m: required(a.m, "m")?,
                        tail_tol: a.tail_tol,
                    },
                    OutputSpec::default(),
                ),
            };
            run_spectrum(&cfg, &override_path(out, a.common.out, Format::Json))
        }
        Command::Predict(a) => {
            let (cfg, out) = match &a.common.config {
                Some(p) => match load_config(p, "predict")? {
                    ExperimentConfig {
                        run: CommandConfig::Predict(c),
                        output,
                    } => (c, output),
                    _ => unreachable!("checked by load_config"),
                },
                None => (
                    PredictConfig {
                        d: required(a.d, "d")?,
                        tau: required(a.tau, "tau")?,
                        m: required(a.m, "m")?,
                        sigma_sq: a.sigma_sq,
                        target: a.target.resolve()?,
                        delta: a.delta,
                        tail_tol: DEFAULT_TAIL_TOL,
                    },
                    OutputSpec::default(),
                ),
            };
            run_predict(&cfg, &override_path(out, a.common.out, Format::Json))
        }
        Command::Regime(a) => {
            let (cfg, out) = match &a.common.config {
                Some(p) => match load_config(p, "regime")? {
                    ExperimentConfig {
                        run: CommandConfig::Regime(c),
                        output,
                    } => (c, output),
                    _ => unreachable!("checked by load_config"),
                },
                None => {
                    let bandwidth = match (a.tau, a.schedule) {
                        (Some(tau), _) => BandwidthSchedule::Fixed { tau },
                        (None, Some(kind)) => BandwidthSchedule::Scaled {
                            scale: a.scale,
                            modifier: match kind {
                                ScheduleKind::InverseLog => Modifier::InverseLog,
                                ScheduleKind::Log => Modifier::Log,
                                ScheduleKind::Power => Modifier::Power { p: a.power },
                                ScheduleKind::Constant => Modifier::Constant,
                            },
                        },
                        (None, None) => {
                            return Err(Error::domain("one of --tau or --schedule is required"))
                        }
                    };
                    (
                        RegimeConfig {
                            d: required(a.d, "d")?,
                            m: required(a.m, "m")?,
                            bandwidth,
                            sigma_sq: a.sigma_sq,
                            target: a.target.resolve()?,
                            b: a.b,
                            tail_tol: DEFAULT_TAIL_TOL,
                        },
                        OutputSpec::default(),
                    )
                }
            };
            run_regime(&cfg, &override_path(out, a.common.out, Format::Json))
        }
        Command::Simulate(a) => {
            let (runs, mut out) = match (&a.common.config, &a.preset) {
                (Some(p), _) => match load_config(p, "simulate")? {
                    ExperimentConfig {
                        run: CommandConfig::Simulate { runs },
                        output,
                    } => (runs, output),
                    _ => unreachable!("checked by load_config"),
                },
                (None, Some(name)) => (presets::sim_preset(name)?, OutputSpec::default()),
                (None, None) => {
                    let d = required(a.d, "d")?;
                    (
                        vec![SimConfig {
                            d,
                            m: required(a.m, "m")?,
                            tau: required(a.tau, "tau")?,
                            sigma_sq: a.sigma_sq,
                            target: SimTarget::Constant {
                                value: a.target_constant,
                            },
                            n_test: a.n_test,
                            n_trials: a.n_trials,
                            seed: a.seed,
                            jitter: JitterPolicy::default(),
                        }],
                        OutputSpec::default(),
                    )
                }
            };
            if let Some(f) = a.format {
                out.format = f;
            }
            run_simulate(&runs, &override_path(out, a.common.out, Format::Csv))
        }
        Command::Scan(a) => {
            let (cfg, mut out) = match (&a.common.config, &a.preset) {
                (Some(p), _) => match load_config(p, "scan")? {
                    ExperimentConfig {
                        run: CommandConfig::Scan(c),
                        output,
                    } => (c, output),
                    _ => unreachable!("checked by load_config"),
                },
                (None, Some(name)) => (presets::scan_preset(name, a.l_max)?, OutputSpec::default()),
                (None, None) => return Err(Error::domain("scan needs --preset or --config")),
            };
            if let Some(f) = a.format {
                out.format = f;
            }
            run_scan(&cfg, &override_path(out, a.common.out, Format::Csv))
        }
    }
}

/// Flag `--out` wins over the config's path; JSON-only commands force JSON.
fn override_path(mut out: OutputSpec, flag: Option<PathBuf>, only: Format) -> OutputSpec {
    if flag.is_some() {
        out.path = flag;
    }
    if only == Format::Json {
        return json_output(out.path);
    }
    out
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}
