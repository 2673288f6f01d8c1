//! Bandwidth and dimension schedules, the risk bounds evaluated along them,
//! and the overfitting classification of a scanned series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigenframework::{level_index, predicted_risk, Spectrum, TargetSpec};
use crate::error::{Error, Result};
use crate::harmonics::{index_summary, multiplicity};
use crate::spectrum::{build_spectrum, SpectrumSpec, DEFAULT_TAIL_TOL};

/// Slowly varying factor `t(m)` multiplying `m^{-1/(d-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modifier {
    /// `1 / ln m`
    InverseLog,
    /// `ln m`
    Log,
    /// `m^p`
    Power { p: f64 },
    /// `1`
    Constant,
}

/// How the bandwidth `tau` depends on `(d, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandwidthSchedule {
    Fixed { tau: f64 },
    /// `tau = scale * m^{-1/(d-1)} * t(m)`
    Scaled { scale: f64, modifier: Modifier },
}

impl BandwidthSchedule {
    pub fn tau(&self, d: u32, m: u64) -> Result<f64> {
        if d < 2 {
            return Err(Error::domain(format!("dimension d must be at least 2, got {d}")));
        }
        let tau = match *self {
            BandwidthSchedule::Fixed { tau } => tau,
            BandwidthSchedule::Scaled { scale, modifier } => {
                if m < 2 {
                    return Err(Error::domain("scaled bandwidth needs m >= 2"));
                }
                let mf = m as f64;
                let t = match modifier {
                    Modifier::InverseLog => 1.0 / mf.ln(),
                    Modifier::Log => mf.ln(),
                    Modifier::Power { p } => mf.powf(p),
                    Modifier::Constant => 1.0,
                };
                scale * mf.powf(-1.0 / (d as f64 - 1.0)) * t
            }
        };
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!(
                "bandwidth must be positive and finite, got {tau} at d={d}, m={m}"
            )));
        }
        Ok(tau)
    }
}

/// The three fixed-dimension bandwidth regimes, relative to `m^{-1/(d-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthCase {
    /// `tau = o(m^{-1/(d-1)})`
    Case1,
    /// `tau = omega(m^{-1/(d-1)})`
    Case2,
    /// `tau = Theta(m^{-1/(d-1)})`
    Case3,
}

impl BandwidthCase {
    pub fn number(self) -> u8 {
        match self {
            BandwidthCase::Case1 => 1,
            BandwidthCase::Case2 => 2,
            BandwidthCase::Case3 => 3,
        }
    }
}

/// Symbolic regime of a schedule; no data is looked at.
pub fn classify_bandwidth_regime(d: u32, schedule: &BandwidthSchedule) -> Result<BandwidthCase> {
    if d < 2 {
        return Err(Error::domain(format!("dimension d must be at least 2, got {d}")));
    }
    Ok(match *schedule {
        BandwidthSchedule::Fixed { .. } => BandwidthCase::Case2,
        BandwidthSchedule::Scaled { modifier, .. } => match modifier {
            Modifier::InverseLog => BandwidthCase::Case1,
            Modifier::Log => BandwidthCase::Case2,
            Modifier::Constant => BandwidthCase::Case3,
            Modifier::Power { p } if p < 0.0 => BandwidthCase::Case1,
            Modifier::Power { p } if p > 0.0 => BandwidthCase::Case2,
            Modifier::Power { .. } => BandwidthCase::Case3,
        },
    })
}

/// Which `(d, m)` pairs a scan visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimensionSchedule {
    Fixed { d: u32, ms: Vec<u64> },
    /// `m = round(d^alpha)`
    Polynomial { alpha: f64, ds: Vec<u32> },
    /// `m = 2^d`
    Logarithmic { ds: Vec<u32> },
    /// `d = 2^{2^l}`, `m = 2^{2^{2l}}`
    Subpolynomial { ls: Vec<u32> },
}

impl DimensionSchedule {
    /// Geometric grid `start, start*ratio, ...` with `count` points.
    pub fn geometric_m(d: u32, start: u64, ratio: u64, count: usize) -> Self {
        let ms = (0..count)
            .map(|i| start * ratio.pow(i as u32))
            .collect();
        DimensionSchedule::Fixed { d, ms }
    }

    pub fn grid(&self) -> Result<Vec<(u32, u64)>> {
        let pairs: Vec<(u32, u64)> = match self {
            DimensionSchedule::Fixed { d, ms } => ms.iter().map(|&m| (*d, m)).collect(),
            DimensionSchedule::Polynomial { alpha, ds } => {
                if !(*alpha > 0.0) {
                    return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
                }
                let mut out = Vec::with_capacity(ds.len());
                for &d in ds {
                    let exact = (d as f64).powf(*alpha);
                    let m = exact.round();
                    if !(m >= 2.0 && m < 2f64.powi(53)) || (m / exact - 1.0).abs() > 0.01 {
                        return Err(Error::domain(format!(
                            "d={d} with alpha={alpha} gives no integer m within 1% of d^alpha"
                        )));
                    }
                    out.push((d, m as u64));
                }
                out
            }
            DimensionSchedule::Logarithmic { ds } => ds
                .iter()
                .map(|&d| {
                    1u64.checked_shl(d)
                        .filter(|_| d < 64)
                        .map(|m| (d, m))
                        .ok_or_else(|| Error::domain(format!("m = 2^{d} does not fit in u64")))
                })
                .collect::<Result<_>>()?,
            DimensionSchedule::Subpolynomial { ls } => ls
                .iter()
                .map(|&l| {
                    let ed = 1u32.checked_shl(l).filter(|&e| e < 32);
                    let em = 1u32.checked_shl(2 * l).filter(|&e| e < 64);
                    match (ed, em) {
                        (Some(ed), Some(em)) if l >= 1 => Ok((1u32 << ed, 1u64 << em)),
                        _ => Err(Error::domain(format!(
                            "subpolynomial level l={l} is outside 1..=2"
                        ))),
                    }
                })
                .collect::<Result<_>>()?,
        };
        if pairs.is_empty() {
            return Err(Error::domain("empty schedule grid"));
        }
        for &(d, m) in &pairs {
            if d < 2 || m < 2 {
                return Err(Error::domain(format!(
                    "grid point (d={d}, m={m}) needs d >= 2 and m >= 2"
                )));
            }
        }
        Ok(pairs)
    }
}

/// Pass thresholds for the measured assumption constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionThresholds {
    pub a_max: f64,
    pub b_min: f64,
    pub c_max: f64,
}

impl Default for AssumptionThresholds {
    fn default() -> Self {
        AssumptionThresholds {
            a_max: 1.0 + 1e-8,
            b_min: 0.0,
            c_max: f64::MAX,
        }
    }
}

/// Measured `A`, `b`, `c` and whether each clears its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionCheck {
    /// `sum N lambda` including the tail bound.
    pub a: f64,
    /// `(m - L_m) * min_{k <= k_m} lambda_k`
    pub b: f64,
    /// `1 / (min_{k <= k_m} lambda_k * N_{k_m})`
    pub c: f64,
    pub a_ok: bool,
    pub b_ok: bool,
    pub c_ok: bool,
    pub l_m: f64,
}

/// Measure the trace, eigenvalue-floor and decay constants at sample size `m`.
///
/// When the first level already holds `m` modes there is no `k_m`; level 0
/// stands in for it and `L_m = 0`.
pub fn verify_assumptions<S: Spectrum + ?Sized>(
    spectrum: &S,
    m: u64,
    thresholds: &AssumptionThresholds,
) -> Result<AssumptionCheck> {
    let levels = spectrum.levels();
    if levels.is_empty() {
        return Err(Error::domain("spectrum has no levels"));
    }
    let idx = level_index(spectrum, m);
    let j_m = idx.k_m.unwrap_or(0);
    let min_log = levels[..=j_m]
        .iter()
        .map(|l| l.log_lambda)
        .fold(f64::INFINITY, f64::min);
    let a = spectrum.trace_partial() + spectrum.tail_bound();
    let b = (m as f64 - idx.l_m) * min_log.exp();
    let c = (-min_log - levels[j_m].count.ln()).exp();
    Ok(AssumptionCheck {
        a,
        b,
        c,
        a_ok: a <= thresholds.a_max,
        b_ok: b > thresholds.b_min,
        c_ok: c <= thresholds.c_max,
        l_m: idx.l_m,
    })
}

/// Which bias term the upper bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperVariant {
    /// `B^2 A^2 / m^2 * sum N / lambda^2`
    Squared,
    /// `B^2 A / m^2 * sum N / lambda`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub variant: UpperVariant,
    /// `(1 - L_m/m)^-1 (1 - m/U_m)^-1`
    pub factor: f64,
    pub bias_term: f64,
    pub value: f64,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Upper bound on the ridgeless test risk from the index straddle `L_m < m < U_m`.
pub fn master_upper_bound<S: Spectrum + ?Sized>(
    spectrum: &S,
    m: u64,
    target: &TargetSpec,
    sigma_sq: f64,
    variant: UpperVariant,
) -> Result<UpperBound> {
    let levels = spectrum.levels();
    let mf = m as f64;
    let idx = level_index(spectrum, m);
    let u_m = idx.u_m.ok_or_else(|| {
        Error::domain(format!("U_m is beyond the retained levels at m = {m}"))
    })?;
    if mf >= u_m {
        return Err(Error::domain(format!(
            "upper bound needs m < U_m; got m = {m}, U_m = {u_m}"
        )));
    }
    let factor = 1.0 / ((1.0 - idx.l_m / mf) * (1.0 - mf / u_m));
    let bias_term = match target.max_degree() {
        None => 0.0,
        Some(top) => {
            let last = levels.last().map_or(0, |l| l.k);
            if top > last {
                return Err(Error::domain(format!(
                    "target has mass on level {top} beyond the retained level {last}"
                )));
            }
            let power = match variant {
                UpperVariant::Squared => 2.0,
                UpperVariant::Linear => 1.0,
            };
            let log_sum = levels
                .iter()
                .take_while(|l| l.k <= top)
                .map(|l| l.count.ln() - power * l.log_lambda)
                .fold(f64::NEG_INFINITY, log_add);
            let a = spectrum.trace_partial() + spectrum.tail_bound();
            let b = target.b();
            if b == 0.0 {
                0.0
            } else {
                (2.0 * b.ln() + power * a.ln() - 2.0 * mf.ln() + log_sum).exp()
            }
        }
    };
    Ok(UpperBound {
        variant,
        factor,
        bias_term,
        value: factor * (sigma_sq + bias_term),
    })
}

/// Result of [`risk_lower_bound`]; `value` is absent when the assumption fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub b: f64,
    pub l_m: f64,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Keeps the default `b` strictly inside the admissible range.
const B_SHRINK: f64 = 1.0 - 1e-12;

/// `(1 - (b/(b+1))^2 L_m/m)^-1 sigma^2`.
///
/// Without an explicit `b` the measured one is used, capped at 1.
pub fn risk_lower_bound<S: Spectrum + ?Sized>(
    spectrum: &S,
    m: u64,
    sigma_sq: f64,
    b: Option<f64>,
) -> Result<LowerBound> {
    let check = verify_assumptions(spectrum, m, &AssumptionThresholds::default())?;
    let b_used = match b {
        Some(b) => b,
        None => check.b.min(1.0) * B_SHRINK,
    };
    let note = if !(b_used > 0.0) {
        Some(format!("b must be positive, got {b_used}"))
    } else if b_used >= check.b {
        Some(format!(
            "eigenvalue floor fails: b = {b_used} is not below the measured {}",
            check.b
        ))
    } else {
        None
    };
    let value = note.is_none().then(|| {
        let frac = b_used / (b_used + 1.0);
        sigma_sq / (1.0 - frac * frac * check.l_m / m as f64)
    });
    Ok(LowerBound {
        b: b_used,
        l_m: check.l_m,
        value,
        note,
    })
}

/// Overfitting taxonomy for a finite series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Benign,
    Tempered,
    Catastrophic,
    InconsistentNonbenign,
    Indeterminate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Benign => "benign",
            Classification::Tempered => "tempered",
            Classification::Catastrophic => "catastrophic",
            Classification::InconsistentNonbenign => "inconsistent_nonbenign",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

/// Cutoffs used by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    /// Relative excess at the last point below which a series can be benign.
    pub benign_excess: f64,
    /// Log-log slope of the excess at or below which a series can be benign.
    pub benign_slope: f64,
    /// Log-log slope of the total over the last half marking divergence.
    pub catastrophic_slope: f64,
    /// Relative band around a horizontal fit of the excess.
    pub tempered_band: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds {
            benign_excess: 0.05,
            benign_slope: -0.1,
            catastrophic_slope: 0.2,
            tempered_band: 0.2,
        }
    }
}

/// Trend statistics behind a classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trend {
    /// Least-squares slope of `ln(total - sigma^2)` against `ln m`.
    pub excess_slope: Option<f64>,
    /// Least-squares slope of `ln total` against `ln m` over the last half.
    pub total_slope_upper_half: Option<f64>,
    /// `(total - sigma^2) / sigma^2` at the largest grid point.
    pub last_relative_excess: Option<f64>,
    /// Largest relative deviation of the excess from its mean.
    pub excess_spread: Option<f64>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Classify `(m, total)` pairs given in grid order.
pub fn classify(
    series: &[(u64, f64)],
    sigma_sq: f64,
    thresholds: &ClassifyThresholds,
) -> (Classification, Trend) {
    let scale = if sigma_sq > 0.0 { sigma_sq } else { 1.0 };
    let rel: Vec<f64> = series.iter().map(|&(_, t)| (t - sigma_sq) / scale).collect();
    let ln_m: Vec<f64> = series.iter().map(|&(m, _)| (m as f64).ln()).collect();

    let excess_slope = if rel.iter().all(|&e| e > 0.0) {
        let ln_e: Vec<f64> = rel.iter().map(|e| e.ln()).collect();
        loglog_slope(&ln_m, &ln_e)
    } else {
        None
    };
    let half = series.len() / 2;
    let upper = &series[half.min(series.len())..];
    let total_slope_upper_half = if upper.iter().all(|&(_, t)| t > 0.0) {
        let ln_t: Vec<f64> = upper.iter().map(|&(_, t)| t.ln()).collect();
        loglog_slope(&ln_m[half..], &ln_t)
    } else {
        None
    };
    let mean = rel.iter().sum::<f64>() / rel.len().max(1) as f64;
    let excess_spread = (!rel.is_empty() && mean > 0.0)
        .then(|| rel.iter().map(|e| (e / mean - 1.0).abs()).fold(0.0, f64::max));
    let trend = Trend {
        excess_slope,
        total_slope_upper_half,
        last_relative_excess: rel.last().copied(),
        excess_spread,
    };
    if series.len() < 3 {
        return (Classification::Indeterminate, trend);
    }

    let last = *rel.last().expect("non-empty");
    let increasing = upper.windows(2).all(|w| w[1].1 > w[0].1);
    let class = if last < thresholds.benign_excess
        && excess_slope.is_some_and(|s| s <= thresholds.benign_slope)
    {
        Classification::Benign
    } else if increasing
        && total_slope_upper_half.is_some_and(|s| s >= thresholds.catastrophic_slope)
    {
        Classification::Catastrophic
    } else if mean >= thresholds.benign_excess
        && excess_spread.is_some_and(|s| s <= thresholds.tempered_band)
    {
        Classification::Tempered
    } else if rel.iter().all(|&e| e >= thresholds.benign_excess) {
        Classification::InconsistentNonbenign
    } else {
        Classification::Indeterminate
    };
    (class, trend)
}

/// Everything a scan needs besides the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub dimension: DimensionSchedule,
    pub bandwidth: BandwidthSchedule,
    pub target: TargetSpec,
    pub sigma_sq: f64,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    /// Eigenvalue-floor constant for the lower bound; measured when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default)]
    pub thresholds: ClassifyThresholds,
    #[serde(default)]
    pub assumptions: AssumptionThresholds,
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub m: u64,
    pub d: u32,
    pub tau: f64,
    pub kappa: Option<f64>,
    pub e0: Option<f64>,
    pub total: Option<f64>,
    pub upper_sq: Option<f64>,
    pub upper_lin: Option<f64>,
    pub lower: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub k_m: Option<u64>,
    pub l_m: Option<f64>,
    pub u_m: Option<f64>,
    /// Short tags: failed assumptions, unmet preconditions, containment misses, errors.
    pub flags: Vec<String>,
}

impl ScanPoint {
    fn empty(d: u32, m: u64, tau: f64) -> Self {
        ScanPoint {
            m,
            d,
            tau,
            kappa: None,
            e0: None,
            total: None,
            upper_sq: None,
            upper_lin: None,
            lower: None,
            a: None,
            b: None,
            c: None,
            k_m: None,
            l_m: None,
            u_m: None,
            flags: Vec::new(),
        }
    }

    /// Whether the total sits inside every bound present at this point.
    pub fn contained(&self) -> bool {
        !self.flags.iter().any(|f| f.starts_with("outside_"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub classification: Classification,
    pub trend: Trend,
    pub sigma_sq: f64,
    pub points: Vec<ScanPoint>,
}

impl RegimeReport {
    pub const CSV_HEADER: [&'static str; 13] = [
        "m", "d", "tau", "kappa", "e0", "total", "upper_sq", "upper_lin", "lower", "A", "b",
        "c", "flags",
    ];
}

/// Relative slack when comparing a total against a bound.
const CONTAINMENT_SLACK: f64 = 1e-10;

fn evaluate_point(config: &ScanConfig, d: u32, m: u64) -> ScanPoint {
    let tau = match config.bandwidth.tau(d, m) {
        Ok(t) => t,
        Err(e) => {
            let mut p = ScanPoint::empty(d, m, f64::NAN);
            p.flags.push(format!("error:{e}"));
            return p;
        }
    };
    let mut p = ScanPoint::empty(d, m, tau);
    if let Err(e) = fill_point(config, &mut p) {
        p.flags.push(format!("error:{e}"));
    }
    p
}

fn fill_point(config: &ScanConfig, p: &mut ScanPoint) -> Result<()> {
    let (d, m) = (p.d, p.m);
    let sys = build_spectrum(&SpectrumSpec::new(d, p.tau)?, m, config.tail_tol)?;
    let pred = predicted_risk(&sys, &config.target, config.sigma_sq, m, 0.0)?;
    p.kappa = Some(pred.kappa);
    p.e0 = Some(pred.e_factor);
    p.total = Some(pred.total);
    let idx = index_summary(d, m)?;
    p.k_m = Some(idx.k_m);
    p.l_m = Some(idx.l_m as f64);
    p.u_m = Some(idx.u_m_f64());

    let check = verify_assumptions(&sys, m, &config.assumptions)?;
    p.a = Some(check.a);
    p.b = Some(check.b);
    p.c = Some(check.c);
    for (ok, tag) in [(check.a_ok, "A"), (check.b_ok, "b"), (check.c_ok, "c")] {
        if !ok {
            p.flags.push(format!("assumption_{tag}_fails"));
        }
    }

    let total = pred.total;
    for (variant, slot, tag) in [
        (UpperVariant::Squared, &mut p.upper_sq, "upper_sq"),
        (UpperVariant::Linear, &mut p.upper_lin, "upper_lin"),
    ] {
        match master_upper_bound(&sys, m, &config.target, config.sigma_sq, variant) {
            Ok(u) => *slot = Some(u.value),
            Err(_) => p.flags.push(format!("{tag}_precondition")),
        }
    }
    if p.upper_sq.is_some_and(|u| total > u * (1.0 + CONTAINMENT_SLACK)) {
        p.flags.push("outside_upper_sq".into());
    }
    if p.upper_lin.is_some_and(|u| total > u * (1.0 + CONTAINMENT_SLACK)) {
        p.flags.push("outside_upper_lin".into());
    }
    let lower = risk_lower_bound(&sys, m, config.sigma_sq, config.b)?;
    match lower.value {
        Some(v) => {
            p.lower = Some(v);
            if total < v * (1.0 - CONTAINMENT_SLACK) {
                p.flags.push("outside_lower".into());
            }
        }
        None => p.flags.push("lower_assumption".into()),
    }
    Ok(())
}

/// Evaluate every grid point (in parallel) and classify the resulting series.
///
/// Per-point failures become `error:` flags; only an invalid grid is fatal.
pub fn scan(config: &ScanConfig) -> Result<RegimeReport> {
    if !(config.sigma_sq >= 0.0 && config.sigma_sq.is_finite()) {
        return Err(Error::domain(format!(
            "noise variance must be finite and >= 0, got {}",
            config.sigma_sq
        )));
    }
    let grid = config.dimension.grid()?;
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&(d, m)| evaluate_point(config, d, m))
        .collect();
    let series: Vec<(u64, f64)> = points
        .iter()
        .filter_map(|p| p.total.map(|t| (p.m, t)))
        .collect();
    let (classification, trend) = classify(&series, config.sigma_sq, &config.thresholds);
    Ok(RegimeReport {
        classification,
        trend,
        sigma_sq: config.sigma_sq,
        points,
    })
}

/// A quantity compared against a published bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

fn check_le(name: &str, value: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        value,
        bound,
        pass: value <= bound,
    }
}

fn check_ge(name: &str, value: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        value,
        bound,
        pass: value >= bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityPoint {
    pub d: u32,
    pub m: u64,
    pub k_m: u64,
    pub l_over_m: f64,
    pub m_over_u: f64,
    /// `N(d, k_m + i) / m` for `i = -1, 0, 1`; the first is absent at `k_m = 0`.
    pub n_over_m: [Option<f64>; 3],
    pub checks: Vec<BoundCheck>,
}

/// Lower constants for `N(d, k_m + i)/m`, `i = -1, 0, 1`, under `m = 2^d`.
const LOG_SCALING_LOWER: [f64; 3] = [1.0 / 54.0, 1.0 / 9.0, 2.0 / 3.0];
/// Upper constants for the same ratios.
const LOG_SCALING_UPPER: [f64; 3] = [1.0 / 3.0, 1.0, 6.0];

/// Index quantities along an integer dimension schedule, with the checks
/// that apply to that schedule.
pub fn multiplicity_scaling_report(schedule: &DimensionSchedule) -> Result<Vec<MultiplicityPoint>> {
    if let DimensionSchedule::Polynomial { .. } = schedule {
        return Err(Error::domain(
            "multiplicity scaling report needs an integer schedule",
        ));
    }
    let levels: Vec<Option<u32>> = match schedule {
        DimensionSchedule::Subpolynomial { ls } => ls.iter().map(|&l| Some(l)).collect(),
        _ => vec![None; schedule.grid()?.len()],
    };
    schedule
        .grid()?
        .into_iter()
        .zip(levels)
        .map(|((d, m), l)| {
            let idx = index_summary(d, m)?;
            let mf = m as f64;
            let ratio = |k: u64| -> Result<f64> { Ok(multiplicity(d, k)?.as_f64() / mf) };
            let n_over_m = [
                if idx.k_m == 0 { None } else { Some(ratio(idx.k_m - 1)?) },
                Some(ratio(idx.k_m)?),
                Some(ratio(idx.k_m + 1)?),
            ];
            let l_over_m = idx.l_m as f64 / mf;
            let m_over_u = mf / idx.u_m_f64();
            let mut checks = Vec::new();
            match schedule {
                DimensionSchedule::Logarithmic { .. } => {
                    let df = d as f64;
                    checks.push(check_ge("k_m >= d/5", idx.k_m as f64, df / 5.0));
                    checks.push(check_le("k_m <= d/2", idx.k_m as f64, df / 2.0));
                    for (i, r) in n_over_m.iter().enumerate() {
                        if let Some(r) = r {
                            let name = ["N(k_m-1)/m", "N(k_m)/m", "N(k_m+1)/m"][i];
                            checks.push(check_ge(name, *r, LOG_SCALING_LOWER[i]));
                            checks.push(check_le(name, *r, LOG_SCALING_UPPER[i]));
                        }
                    }
                    checks.push(check_ge("L_m/m >= 1/54", l_over_m, LOG_SCALING_LOWER[0]));
                    checks.push(check_le("U_m/m <= 6", 1.0 / m_over_u, LOG_SCALING_UPPER[2]));
                }
                DimensionSchedule::Subpolynomial { .. } => {
                    let l = l.expect("level present for subpolynomial grids");
                    let want = (1u64 << l) + l as u64 - 1;
                    checks.push(BoundCheck {
                        name: "k_m = 2^l + l - 1".into(),
                        value: idx.k_m as f64,
                        bound: want as f64,
                        pass: idx.k_m == want,
                    });
                    checks.push(check_le("L_m/m <= 3/(2 ln m)", l_over_m, 1.5 / mf.ln()));
                    checks.push(check_le(
                        "m/U_m <= d^-0.89",
                        m_over_u,
                        (d as f64).powf(-0.89),
                    ));
                }
                _ => {}
            }
            Ok(MultiplicityPoint {
                d,
                m,
                k_m: idx.k_m,
                l_over_m,
                m_over_u,
                n_over_m,
                checks,
            })
        })
        .collect()
}
