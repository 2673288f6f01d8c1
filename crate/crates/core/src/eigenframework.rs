//! Closed-form risk prediction for kernel ridge(less) regression.
//!
//! Given eigenvalues `lambda_i`, a sample size `m` and ridge `delta`, the
//! effective regularization `kappa` is the root of
//!
//! ```text
//! sum_i lambda_i / (lambda_i + kappa) + delta / kappa = m,
//! ```
//!
//! and the predicted test risk is
//!
//! ```text
//! E * ( sum_i (1 - L_i)^2 beta_i^2 + sigma^2 ),   L_i = lambda_i / (lambda_i + kappa),
//! E = m / (m - sum_i L_i^2).
//! ```
//!
//! All sums run over distinct eigenvalues weighted by multiplicity, so a
//! spectrum with millions of eigenvalues in a few hundred levels costs a few
//! hundred operations per evaluation. Any [`Spectrum`] works: the Gaussian
//! [`EigenSystem`] or a [`SyntheticSpectrum`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{EigenSystem, Level};

/// A spectrum given as levels of distinct eigenvalues, sorted decreasing.
pub trait Spectrum {
    fn levels(&self) -> &[Level];

    /// Upper bound on the eigenvalue mass not listed in [`Spectrum::levels`].
    fn tail_bound(&self) -> f64 {
        0.0
    }

    fn trace_partial(&self) -> f64 {
        self.levels().iter().map(|l| l.count * l.lambda()).sum()
    }

    fn flattened_total(&self) -> f64 {
        self.levels().iter().map(|l| l.count).sum()
    }
}

impl Spectrum for EigenSystem {
    fn levels(&self) -> &[Level] {
        &self.degrees
    }

    fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    fn trace_partial(&self) -> f64 {
        self.trace_partial
    }
}

/// A user-supplied spectrum, for kernels other than the Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpectrum {
    pub levels: Vec<Level>,
    pub tail_bound: f64,
}

impl SyntheticSpectrum {
    /// Build from `(lambda, count)` pairs; sorts, merges equal eigenvalues and
    /// numbers the levels `0, 1, ...` in decreasing order.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::with_tail(pairs, 0.0)
    }

    pub fn with_tail(pairs: &[(f64, f64)], tail_bound: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("synthetic spectrum needs at least one level"));
        }
        if !(tail_bound >= 0.0 && tail_bound.is_finite()) {
            return Err(Error::domain(format!(
                "tail bound must be finite and >= 0, got {tail_bound}"
            )));
        }
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for &(lambda, count) in pairs {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::domain(format!(
                    "eigenvalues must be positive, got {lambda}"
                )));
            }
            if !(count >= 1.0 && count.fract() == 0.0 && count.is_finite()) {
                return Err(Error::domain(format!(
                    "counts must be positive integers, got {count}"
                )));
            }
            sorted.push((lambda, count));
        }
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut levels: Vec<Level> = Vec::with_capacity(sorted.len());
        for (lambda, count) in sorted {
            match levels.last_mut() {
                Some(last) if last.log_lambda == lambda.ln() => last.count += count,
                _ => levels.push(Level {
                    k: levels.len() as u64,
                    log_lambda: lambda.ln(),
                    count,
                }),
            }
        }
        Ok(SyntheticSpectrum { levels, tail_bound })
    }
}

impl Spectrum for SyntheticSpectrum {
    fn levels(&self) -> &[Level] {
        &self.levels
    }

    fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

/// Position of `m` among cumulative level counts.
///
/// `k_m` is the last level whose cumulative count is below `m` (`None` when
/// the first level alone already reaches `m`); `l_m` is that cumulative
/// count and `u_m` the count one level later, when that level is retained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelIndex {
    pub m: u64,
    pub k_m: Option<usize>,
    pub l_m: f64,
    pub u_m: Option<f64>,
}

pub fn level_index<S: Spectrum + ?Sized>(spectrum: &S, m: u64) -> LevelIndex {
    let mf = m as f64;
    let mut cum = 0.0;
    let mut k_m = None;
    let mut u_m = None;
    for (j, level) in spectrum.levels().iter().enumerate() {
        let next = cum + level.count;
        if next < mf {
            k_m = Some(j);
            cum = next;
        } else {
            u_m = Some(next);
            break;
        }
    }
    LevelIndex {
        m,
        k_m,
        l_m: cum,
        u_m,
    }
}

/// Single-harmonic coefficient mass for one degree (or level).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetCoefficient {
    pub k: u64,
    /// `sum of beta_i^2` over the harmonics of this degree.
    pub beta_sq: f64,
    /// Largest single-harmonic coefficient magnitude, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs: Option<f64>,
}

impl TargetCoefficient {
    /// A certified bound on single coefficients of this degree.
    pub fn coefficient_bound(&self) -> f64 {
        self.max_abs.unwrap_or_else(|| self.beta_sq.sqrt())
    }
}

/// Target function, stored as per-degree squared coefficient mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TargetSpec {
    pub coefficients: Vec<TargetCoefficient>,
    /// Per-harmonic coefficient bound `B`; defaults to the certified maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl TargetSpec {
    pub fn new(coefficients: Vec<TargetCoefficient>, bound: Option<f64>) -> Result<Self> {
        for c in &coefficients {
            if !(c.beta_sq >= 0.0 && c.beta_sq.is_finite()) {
                return Err(Error::domain(format!(
                    "beta^2 must be finite and >= 0, got {}",
                    c.beta_sq
                )));
            }
            if let Some(a) = c.max_abs {
                if !(a >= 0.0 && a * a <= c.beta_sq * (1.0 + 1e-12) + 1e-300) {
                    return Err(Error::domain("max_abs must satisfy max_abs^2 <= beta_sq"));
                }
            }
        }
        let t = TargetSpec {
            coefficients,
            bound,
        };
        if let Some(b) = bound {
            if t.certified_bound() > b * (1.0 + 1e-12) {
                return Err(Error::domain(format!(
                    "coefficient bound B={b} is below a known coefficient magnitude {}",
                    t.certified_bound()
                )));
            }
        }
        Ok(t)
    }

    pub fn zero() -> Self {
        TargetSpec::default()
    }

    /// `f*(x) = c`: all mass on degree 0.
    pub fn constant(c: f64) -> Self {
        TargetSpec {
            coefficients: vec![TargetCoefficient {
                k: 0,
                beta_sq: c * c,
                max_abs: Some(c.abs()),
            }],
            bound: None,
        }
    }

    /// `f*(x) = u . x` on `S^{d-1}`: mass `|u|^2/d` on degree 1.
    ///
    /// In the orthonormal basis `sqrt(d) x_i` the coefficients are `u_i/sqrt(d)`.
    pub fn linear(u: &[f64]) -> Self {
        let d = u.len() as f64;
        let norm_sq: f64 = u.iter().map(|x| x * x).sum();
        let max_abs = u.iter().fold(0.0f64, |a, x| a.max(x.abs())) / d.sqrt();
        TargetSpec {
            coefficients: vec![TargetCoefficient {
                k: 1,
                beta_sq: norm_sq / d,
                max_abs: Some(max_abs),
            }],
            bound: None,
        }
    }

    /// `||f*||^2`.
    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|c| c.beta_sq).sum()
    }

    fn certified_bound(&self) -> f64 {
        self.coefficients
            .iter()
            .filter(|c| c.beta_sq > 0.0)
            .map(TargetCoefficient::coefficient_bound)
            .fold(0.0, f64::max)
    }

    /// `B`: the configured bound, else the largest certified coefficient bound.
    pub fn b(&self) -> f64 {
        self.bound.unwrap_or_else(|| self.certified_bound())
    }

    /// Highest degree carrying nonzero mass.
    pub fn max_degree(&self) -> Option<u64> {
        self.coefficients
            .iter()
            .filter(|c| c.beta_sq > 0.0)
            .map(|c| c.k)
            .max()
    }
}

/// Root of the effective-regularization equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaSolution {
    pub kappa: f64,
    /// `|sum L_i + delta/kappa - m|` at the returned root.
    pub residual: f64,
    /// Root once the omitted tail mass is charged at its bound, `tail/kappa`.
    pub kappa_with_tail: f64,
    /// `kappa_with_tail / kappa - 1`.
    pub tail_sensitivity: f64,
}

/// `lambda/(lambda+kappa)` evaluated from logs.
fn learnability(log_lambda: f64, log_kappa: f64) -> f64 {
    1.0 / (1.0 + (log_kappa - log_lambda).exp())
}

/// `kappa/(lambda+kappa)` evaluated from logs.
fn unlearnability(log_lambda: f64, log_kappa: f64) -> f64 {
    1.0 / (1.0 + (log_lambda - log_kappa).exp())
}

fn kappa_lhs(levels: &[Level], log_kappa: f64, delta: f64, extra_mass: f64) -> f64 {
    let sum: f64 = levels
        .iter()
        .map(|l| l.count * learnability(l.log_lambda, log_kappa))
        .sum();
    let ridge = delta + extra_mass;
    // in logs: kappa itself may underflow on deep spectra
    if ridge > 0.0 {
        sum + (ridge.ln() - log_kappa).exp()
    } else {
        sum
    }
}

/// Bisection on `ln kappa` down to adjacent floats.
fn bisect_log_kappa(
    levels: &[Level],
    m: f64,
    delta: f64,
    extra_mass: f64,
    trace: f64,
) -> Result<f64> {
    let f = |lk: f64| kappa_lhs(levels, lk, delta, extra_mass) - m;
    let lambda_min = levels.last().expect("non-empty spectrum").log_lambda;
    let step = 1e6f64.ln();
    let mut lo = lambda_min - step;
    let mut hi = trace.max(f64::MIN_POSITIVE).ln() + step;
    let mut expansions = 0;
    while f(lo) <= 0.0 {
        lo -= step;
        expansions += 1;
        if expansions > 200 || !lo.is_finite() {
            return Err(Error::Solver("cannot bracket kappa from below".into()));
        }
    }
    while f(hi) >= 0.0 {
        hi += step;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::Solver("cannot bracket kappa from above".into()));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Solve for `kappa_delta`.
pub fn solve_kappa<S: Spectrum + ?Sized>(
    spectrum: &S,
    m: u64,
    delta: f64,
) -> Result<KappaSolution> {
    if m < 1 {
        return Err(Error::domain("sample size m must be at least 1"));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!(
            "ridge delta must be finite and >= 0, got {delta}"
        )));
    }
    let levels = spectrum.levels();
    if levels.is_empty() {
        return Err(Error::domain("empty spectrum"));
    }
    let mf = m as f64;
    if delta == 0.0 && spectrum.flattened_total() <= mf {
        return Err(Error::Solver(format!(
            "ridgeless fit needs retained rank above m = {m}, have {}",
            spectrum.flattened_total()
        )));
    }
    let trace = spectrum.trace_partial() + spectrum.tail_bound();
    let log_kappa = bisect_log_kappa(levels, mf, delta, 0.0, trace)?;
    let residual = (kappa_lhs(levels, log_kappa, delta, 0.0) - mf).abs();
    let kappa = log_kappa.exp();
    let (kappa_with_tail, tail_sensitivity) = if spectrum.tail_bound() > 0.0 {
        let lk = bisect_log_kappa(levels, mf, delta, spectrum.tail_bound(), trace)?;
        (lk.exp(), (lk - log_kappa).exp_m1())
    } else {
        (kappa, 0.0)
    };
    Ok(KappaSolution {
        kappa,
        residual,
        kappa_with_tail,
        tail_sensitivity,
    })
}

/// Per-level learnabilities `L_k = lambda_k / (lambda_k + kappa)`.
pub fn learnabilities<S: Spectrum + ?Sized>(spectrum: &S, kappa: f64) -> Vec<f64> {
    let lk = kappa.ln();
    spectrum
        .levels()
        .iter()
        .map(|l| learnability(l.log_lambda, lk))
        .collect()
}

/// `E = m / (m - sum N L^2)`.
pub fn overfitting_coefficient<S: Spectrum + ?Sized>(
    spectrum: &S,
    kappa: f64,
    m: u64,
) -> Result<f64> {
    let lk = kappa.ln();
    let mf = m as f64;
    // m - sum N L^2 = (m - sum N L) + sum N L (1 - L), which avoids cancellation when E is large
    let mut sum_l = 0.0;
    let mut sum_lu = 0.0;
    for l in spectrum.levels() {
        let a = learnability(l.log_lambda, lk);
        sum_l += l.count * a;
        sum_lu += l.count * a * unlearnability(l.log_lambda, lk);
    }
    let denom = (mf - sum_l) + sum_lu;
    if !(denom > 0.0) {
        return Err(Error::Numeric(format!(
            "sum of squared learnabilities reaches m = {m}; E is undefined"
        )));
    }
    Ok(mf / denom)
}

/// Output of [`predicted_risk`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskPrediction {
    pub kappa: f64,
    #[serde(skip)]
    pub learnabilities: Vec<f64>,
    pub e_factor: f64,
    /// `E * sum (1 - L_k)^2 beta_k^2`.
    pub bias: f64,
    /// `E * sigma^2`.
    pub variance: f64,
    pub total: f64,
    pub residual: f64,
    /// `sum (1 - L_k)^2 beta_k^2` before the `E` factor.
    #[serde(skip)]
    pub bias_inner: f64,
    #[serde(skip)]
    pub tail_sensitivity: f64,
}

/// Predicted test risk of the ridge(less) estimator.
pub fn predicted_risk<S: Spectrum + ?Sized>(
    spectrum: &S,
    target: &TargetSpec,
    sigma_sq: f64,
    m: u64,
    delta: f64,
) -> Result<RiskPrediction> {
    if !(sigma_sq >= 0.0 && sigma_sq.is_finite()) {
        return Err(Error::domain(format!(
            "noise variance must be finite and >= 0, got {sigma_sq}"
        )));
    }
    let sol = solve_kappa(spectrum, m, delta)?;
    let e = overfitting_coefficient(spectrum, sol.kappa, m)?;
    let lk = sol.kappa.ln();
    let levels = spectrum.levels();
    let bias_inner: f64 = target
        .coefficients
        .iter()
        .map(|c| {
            let u = levels
                .iter()
                .find(|l| l.k == c.k)
                .map_or(1.0, |l| unlearnability(l.log_lambda, lk));
            u * u * c.beta_sq
        })
        .sum();
    Ok(RiskPrediction {
        kappa: sol.kappa,
        learnabilities: learnabilities(spectrum, sol.kappa),
        e_factor: e,
        bias: e * bias_inner,
        variance: e * sigma_sq,
        total: e * (bias_inner + sigma_sq),
        residual: sol.residual,
        bias_inner,
        tail_sensitivity: sol.tail_sensitivity,
    })
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Effective ranks at flattened index `k` (the number of leading eigenvalues removed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveRanks {
    pub k: u64,
    /// `sum_{i>k} lambda_i / lambda_{k+1}`
    pub r: f64,
    /// `(sum_{i>k} lambda_i)^2 / sum_{i>k} lambda_i^2`
    pub big_r: f64,
}

/// Suffix sums of a spectrum, kept in logs, for repeated rank queries.
///
/// The tail mass enters both sums: as `tail` in the first moment and as
/// `tail * lambda_last` in the second, which keeps `r <= R <= r^2`.
pub struct RankTable<'a> {
    levels: &'a [Level],
    /// cumulative counts through each level
    cum: Vec<f64>,
    /// `ln sum_{i >= j} N_i lambda_i` (+ tail), length `levels + 1`
    log_mass: Vec<f64>,
    /// `ln sum_{i >= j} N_i lambda_i^2` (+ tail * lambda_last), length `levels + 1`
    log_sq: Vec<f64>,
}

impl<'a> RankTable<'a> {
    pub fn new<S: Spectrum + ?Sized>(spectrum: &'a S) -> Self {
        let levels = spectrum.levels();
        let n = levels.len();
        let mut cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for l in levels {
            acc += l.count;
            cum.push(acc);
        }
        let tail = spectrum.tail_bound();
        let log_tail = if tail > 0.0 {
            tail.ln()
        } else {
            f64::NEG_INFINITY
        };
        let last = levels.last().map_or(0.0, |l| l.log_lambda);
        let mut log_mass = vec![log_tail; n + 1];
        let mut log_sq = vec![log_tail + last; n + 1];
        for j in (0..n).rev() {
            let ln_n = levels[j].count.ln();
            log_mass[j] = log_add(ln_n + levels[j].log_lambda, log_mass[j + 1]);
            log_sq[j] = log_add(ln_n + 2.0 * levels[j].log_lambda, log_sq[j + 1]);
        }
        RankTable {
            levels,
            cum,
            log_mass,
            log_sq,
        }
    }

    pub fn flattened_total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// Level holding flattened (1-based) index `k+1`.
    fn level_of(&self, k: f64) -> Option<usize> {
        let j = self.cum.partition_point(|&c| c <= k);
        (j < self.levels.len()).then_some(j)
    }

    /// `sum_{i > j} N_i lambda_i / lambda_j` plus tail, for level `j`.
    fn after_level_ratio(&self, j: usize) -> f64 {
        (self.log_mass[j + 1] - self.levels[j].log_lambda).exp()
    }

    pub fn ranks(&self, k: u64) -> Result<EffectiveRanks> {
        let kf = k as f64;
        let j = self.level_of(kf).ok_or_else(|| {
            Error::Numeric(format!(
                "effective rank at k = {k} needs eigenvalue {} but only {} are retained",
                k + 1,
                self.flattened_total()
            ))
        })?;
        let lam = self.levels[j].log_lambda;
        let left = self.cum[j] - kf;
        let r = left + self.after_level_ratio(j);
        let log_s = lam + r.ln();
        let log_q = log_add(left.ln() + 2.0 * lam, self.log_sq[j + 1]);
        Ok(EffectiveRanks {
            k,
            r,
            big_r: (2.0 * log_s - log_q).exp(),
        })
    }

    /// Iterate `(first flattened k of the block, block size, k + r_k)`.
    ///
    /// Inside a block of equal eigenvalues `k + r_k` does not change.
    fn blocks(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.levels.len()).map(move |j| {
            let start = if j == 0 { 0.0 } else { self.cum[j - 1] };
            (
                start,
                self.levels[j].count,
                self.cum[j] + self.after_level_ratio(j),
            )
        })
    }
}

pub fn effective_ranks<S: Spectrum + ?Sized>(
    spectrum: &S,
    at: &[u64],
) -> Result<Vec<EffectiveRanks>> {
    let table = RankTable::new(spectrum);
    at.iter().map(|&k| table.ranks(k)).collect()
}

/// One side of the `E_0` bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSide {
    pub k: u64,
    pub value: f64,
}

/// Bounds on `E_0`, each present only when its precondition holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct E0Bracket {
    /// `(1 - k/m)^-1 (1 - m/(k + r_k))^-1` at `k = L_m`; needs `k < m < k + r_k`.
    pub upper: Option<BoundSide>,
    /// `1 / (1 - (m/k)(k - m)/(k - m + r_k))`, best over scanned `k >= m`.
    /// Not a certified bound: it can exceed `E_0` just before a block edge.
    pub lower: Option<BoundSide>,
    /// `(1 - (b/(b+1))^2 k/m)^-1` at the first `k < m` with `k + b r_k >= m`.
    pub zhou_lower: Option<BoundSide>,
    pub notes: Vec<String>,
}

impl E0Bracket {
    /// Largest available lower bound, `lower` included.
    pub fn best_lower(&self) -> Option<f64> {
        match (self.lower, self.zhou_lower) {
            (Some(a), Some(b)) => Some(a.value.max(b.value)),
            (a, b) => a.or(b).map(|s| s.value),
        }
    }
}

/// Number of `k >= m` candidates tried for the lower bound.
const LOWER_SCAN_POINTS: usize = 256;

pub fn e0_bracket<S: Spectrum + ?Sized>(spectrum: &S, m: u64, b: f64) -> Result<E0Bracket> {
    if m < 2 {
        return Err(Error::domain("sample size m must be at least 2"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("b must be positive, got {b}")));
    }
    let table = RankTable::new(spectrum);
    let mf = m as f64;
    let mut notes = Vec::new();

    let idx = level_index(spectrum, m);
    let k_up = idx.l_m as u64;
    let upper = match table.ranks(k_up) {
        Ok(rk) if (k_up as f64) < mf && rk.r + k_up as f64 > mf => Some(BoundSide {
            k: k_up,
            value: 1.0 / ((1.0 - k_up as f64 / mf) * (1.0 - mf / (k_up as f64 + rk.r))),
        }),
        Ok(_) => {
            notes.push(format!(
                "upper: precondition r_k + k > m unmet at k = {k_up}"
            ));
            None
        }
        Err(e) => {
            notes.push(format!("upper: {e}"));
            None
        }
    };

    let total = table.flattened_total();
    let mut lower: Option<BoundSide> = None;
    if total > mf {
        let top = total - 1.0;
        let mut candidates: Vec<f64> = table
            .blocks()
            .map(|(s, _, _)| s)
            .filter(|&s| s >= mf && s <= top)
            .collect();
        let ratio = (top / mf).powf(1.0 / LOWER_SCAN_POINTS as f64);
        candidates.extend(
            (0..=LOWER_SCAN_POINTS).map(|i| (mf * ratio.powi(i as i32)).round().clamp(mf, top)),
        );
        for k in candidates {
            let rk = table.ranks(k as u64)?;
            let excess = k - mf;
            let inner = (mf / k) * excess / (excess + rk.r);
            let value = 1.0 / (1.0 - inner);
            if lower.map_or(true, |l| value > l.value) {
                lower = Some(BoundSide { k: k as u64, value });
            }
        }
    } else {
        notes.push("lower: retained rank does not exceed m".into());
    }

    let mut zhou_lower = None;
    let frac = b / (b + 1.0);
    for (start, size, c) in table.blocks() {
        if start >= mf {
            break;
        }
        // inside the block k + b r_k = b c + (1 - b) k
        let last = (start + size - 1.0).min(mf - 1.0);
        let hit = if b <= 1.0 {
            let need = if b == 1.0 {
                if c >= mf {
                    start
                } else {
                    f64::INFINITY
                }
            } else {
                ((mf - b * c) / (1.0 - b)).ceil().max(start)
            };
            (need <= last).then_some(need)
        } else {
            (b * c + (1.0 - b) * start >= mf).then_some(start)
        };
        if let Some(k) = hit {
            zhou_lower = Some(BoundSide {
                k: k as u64,
                value: 1.0 / (1.0 - frac * frac * k / mf),
            });
            break;
        }
    }
    if zhou_lower.is_none() {
        notes.push(format!(
            "zhou_lower: no k < m with k + b r_k >= m (b = {b})"
        ));
    }

    Ok(E0Bracket {
        upper,
        lower,
        zhou_lower,
        notes,
    })
}

/// Result of [`benign_condition_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenignDiagnostics {
    /// Smallest `k` with `n < k + r_k`.
    pub k_n: u64,
    pub k_over_n: f64,
    pub n_over_big_r: f64,
}

pub fn benign_condition_check<S: Spectrum + ?Sized>(
    spectrum: &S,
    n: u64,
) -> Result<BenignDiagnostics> {
    let table = RankTable::new(spectrum);
    let nf = n as f64;
    let (start, _, _) = table
        .blocks()
        .find(|&(_, _, c)| nf < c)
        .ok_or_else(|| Error::Numeric(format!("k_n for n = {n} lies beyond the retained rank")))?;
    let k_n = start as u64;
    let rk = table.ranks(k_n)?;
    Ok(BenignDiagnostics {
        k_n,
        k_over_n: start / nf,
        n_over_big_r: nf / rk.big_r,
    })
}

/// `r_k / k` at `k = ceil((1 + eps) m)`.
pub fn catastrophic_condition_check<S: Spectrum + ?Sized>(
    spectrum: &S,
    m: u64,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let k = ((1.0 + eps) * m as f64).ceil() as u64;
    let rk = RankTable::new(spectrum).ranks(k)?;
    Ok(rk.r / k as f64)
}
