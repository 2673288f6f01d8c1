//! Monte Carlo check of the predictions: draw points uniformly on the
//! sphere, fit the minimum-norm Gaussian-kernel interpolant and measure its
//! test risk.
//!
//! Each trial draws from its own ChaCha stream keyed by `(seed, trial)`, so
//! trials can run in any order and the aggregate is bit-reproducible.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigenframework::{predicted_risk, TargetSpec};
use crate::error::{Error, Result};
use crate::spectrum::{build_spectrum, SpectrumSpec, DEFAULT_TAIL_TOL};

/// Largest sample size accepted in a config.
pub const MAX_M: u64 = 4096;
/// Accepted fits satisfy `|K alpha - y|_inf <= RESIDUAL_TOL * max |y|`.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Samples used to confirm the squared norm of a linear target.
pub const WITNESS_SAMPLES: usize = 1_000_000;
/// Stream index reserved for the witness draw (trials use `0..n_trials`).
const WITNESS_STREAM: u64 = u64::MAX;

/// `n` points uniform on `S^{d-1}`, one per row.
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        loop {
            let mut norm_sq = 0.0;
            for j in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                x[(i, j)] = z;
                norm_sq += z * z;
            }
            if norm_sq > 0.0 {
                let inv = 1.0 / norm_sq.sqrt();
                for j in 0..d {
                    x[(i, j)] *= inv;
                }
                break;
            }
        }
    }
    x
}

/// `exp(-|a_i - b_j|^2 / tau^2)` for unit rows `a_i`, `b_j`.
pub fn cross_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let inv = 1.0 / (tau * tau);
    (a * b.transpose()).map(|dot| (-(2.0 - 2.0 * dot.min(1.0)) * inv).exp())
}

/// Kernel matrix of one point set; the diagonal is exactly 1.
pub fn gram(points: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut k = cross_gram(points, points, tau);
    for i in 0..k.nrows() {
        k[(i, i)] = 1.0;
    }
    // the product is symmetric only up to rounding
    for i in 0..k.nrows() {
        for j in 0..i {
            k[(i, j)] = k[(j, i)];
        }
    }
    k
}

/// Relative ridges `eps * trace / m` tried in order until a fit is accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterPolicy {
    pub ladder: Vec<f64>,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            ladder: vec![0.0, 1e-12, 1e-10, 1e-8],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub alpha: DVector<f64>,
    /// Rung `eps` that was accepted.
    pub jitter: f64,
    /// `|K alpha - y|_inf` against the unjittered matrix.
    pub residual: f64,
}

/// Solve `K alpha = y` by Cholesky, climbing the jitter ladder on failure.
pub fn fit_interpolant(k: &DMatrix<f64>, y: &DVector<f64>, policy: &JitterPolicy) -> Result<Fit> {
    let m = k.nrows();
    if m == 0 || k.ncols() != m || y.len() != m {
        return Err(Error::domain("gram must be square and match y"));
    }
    let scale = k.trace() / m as f64;
    let tol = RESIDUAL_TOL * y.amax();
    let mut last = String::from("empty jitter ladder");
    for &eps in &policy.ladder {
        let mut kj = k.clone();
        for i in 0..m {
            kj[(i, i)] += eps * scale;
        }
        let Some(chol) = Cholesky::new(kj) else {
            last = format!("Cholesky failed at jitter {eps:e}");
            continue;
        };
        let alpha = chol.solve(y);
        let residual = (k * &alpha - y).amax();
        if residual <= tol {
            return Ok(Fit {
                alpha,
                jitter: eps,
                residual,
            });
        }
        last = format!("residual {residual:e} above {tol:e} at jitter {eps:e}");
    }
    Err(Error::Numeric(format!("interpolation failed: {last}")))
}

/// Ground-truth function for a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimTarget {
    Constant { value: f64 },
    /// `f*(x) = u . x`
    Linear { u: Vec<f64> },
}

impl SimTarget {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SimTarget::Constant { value } => *value,
            SimTarget::Linear { u } => u.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }

    /// `E[f*(x)^2]` under the uniform distribution.
    pub fn norm_sq(&self) -> f64 {
        match self {
            SimTarget::Constant { value } => value * value,
            SimTarget::Linear { u } => u.iter().map(|a| a * a).sum::<f64>() / u.len() as f64,
        }
    }

    pub fn to_target_spec(&self) -> TargetSpec {
        match self {
            SimTarget::Constant { value } => TargetSpec::constant(*value),
            SimTarget::Linear { u } => TargetSpec::linear(u),
        }
    }
}

/// Mean and standard error of `f*(x)^2` over `samples` uniform points.
pub fn norm_sq_witness(target: &SimTarget, d: usize, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(WITNESS_STREAM);
    let mut point = vec![0.0; d];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let x = sample_sphere(d, 1, &mut rng);
        point.iter_mut().zip(x.iter()).for_each(|(p, v)| *p = *v);
        let v = target.eval(&point).powi(2);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    (mean, (var / samples as f64).sqrt())
}

/// Mean over test points of `(f_hat - f*)^2`, plus `sigma^2`.
pub fn estimate_risk(
    alpha: &DVector<f64>,
    train: &DMatrix<f64>,
    test: &DMatrix<f64>,
    tau: f64,
    target: &SimTarget,
    sigma_sq: f64,
) -> f64 {
    let pred = cross_gram(test, train, tau) * alpha;
    let d = test.ncols();
    let mut row = vec![0.0; d];
    let mut acc = 0.0;
    for i in 0..test.nrows() {
        for j in 0..d {
            row[j] = test[(i, j)];
        }
        let e = pred[i] - target.eval(&row);
        acc += e * e;
    }
    acc / test.nrows() as f64 + sigma_sq
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub d: u32,
    pub m: u64,
    pub tau: f64,
    pub sigma_sq: f64,
    pub target: SimTarget,
    pub n_test: usize,
    pub n_trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub jitter: JitterPolicy,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::domain(format!("d must be at least 2, got {}", self.d)));
        }
        if !(1..=MAX_M).contains(&self.m) {
            return Err(Error::domain(format!("m must be in 1..={MAX_M}, got {}", self.m)));
        }
        if self.n_test < 100 {
            return Err(Error::domain(format!("n_test must be at least 100, got {}", self.n_test)));
        }
        if self.n_trials < 1 {
            return Err(Error::domain("n_trials must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::domain(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.sigma_sq >= 0.0 && self.sigma_sq.is_finite()) {
            return Err(Error::domain(format!("sigma_sq must be >= 0, got {}", self.sigma_sq)));
        }
        if let SimTarget::Linear { u } = &self.target {
            if u.len() != self.d as usize {
                return Err(Error::domain(format!(
                    "linear target has {} components for d = {}",
                    u.len(),
                    self.d
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub risk: Option<f64>,
    pub jitter: Option<f64>,
    pub train_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub d: u32,
    pub m: u64,
    pub tau: f64,
    pub sigma_sq: f64,
    pub empirical_mean: f64,
    pub empirical_stderr: f64,
    pub null_risk: f64,
    pub bayes_risk: f64,
    pub predicted_total: f64,
    pub jitter_max: f64,
    pub trials: Vec<TrialRecord>,
}

impl SimResult {
    pub const CSV_HEADER: [&'static str; 9] = [
        "m",
        "d",
        "tau",
        "empirical_mean",
        "empirical_stderr",
        "predicted_total",
        "null_risk",
        "bayes_risk",
        "jitter_max",
    ];
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct TrialOutcome {
    risk: f64,
    jitter: f64,
    residual: f64,
}

fn run_trial(cfg: &SimConfig, trial: usize) -> Result<TrialOutcome> {
    let mut rng = trial_rng(cfg.seed, trial);
    let d = cfg.d as usize;
    let m = cfg.m as usize;
    let x = sample_sphere(d, m, &mut rng);
    let noise = cfg.sigma_sq.sqrt();
    let mut row = vec![0.0; d];
    let y = DVector::from_iterator(
        m,
        (0..m).map(|i| {
            for j in 0..d {
                row[j] = x[(i, j)];
            }
            let z: f64 = rng.sample(StandardNormal);
            cfg.target.eval(&row) + noise * z
        }),
    );
    let fit = fit_interpolant(&gram(&x, cfg.tau), &y, &cfg.jitter)?;
    let test = sample_sphere(d, cfg.n_test, &mut rng);
    let risk = estimate_risk(&fit.alpha, &x, &test, cfg.tau, &cfg.target, cfg.sigma_sq);
    Ok(TrialOutcome {
        risk,
        jitter: fit.jitter,
        residual: fit.residual,
    })
}

/// Run all trials and pair the aggregate with the closed-form prediction.
///
/// Fails when more than a fifth of the trials fail.
pub fn run_experiment(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    if let SimTarget::Linear { .. } = cfg.target {
        let (mean, se) = norm_sq_witness(&cfg.target, cfg.d as usize, WITNESS_SAMPLES, cfg.seed);
        let exact = cfg.target.norm_sq();
        if (mean - exact).abs() > 5.0 * se + 1e-12 {
            return Err(Error::Numeric(format!(
                "linear target mass |u|^2/d = {exact} disagrees with the sampled {mean} (se {se})"
            )));
        }
    }
    let spec = SpectrumSpec::new(cfg.d, cfg.tau)?;
    let system = build_spectrum(&spec, cfg.m, DEFAULT_TAIL_TOL)?;
    let predicted = predicted_risk(&system, &cfg.target.to_target_spec(), cfg.sigma_sq, cfg.m, 0.0)?;

    let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect();
    let trials: Vec<TrialRecord> = outcomes
        .into_iter()
        .enumerate()
        .map(|(trial, o)| match o {
            Ok(o) => TrialRecord {
                trial,
                risk: Some(o.risk),
                jitter: Some(o.jitter),
                train_residual: Some(o.residual),
                error: None,
            },
            Err(e) => TrialRecord {
                trial,
                risk: None,
                jitter: None,
                train_residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let risks: Vec<f64> = trials.iter().filter_map(|t| t.risk).collect();
    let failed = trials.len() - risks.len();
    if failed * 5 > trials.len() || risks.is_empty() {
        let first = trials.iter().find_map(|t| t.error.clone()).unwrap_or_default();
        return Err(Error::Numeric(format!(
            "{failed} of {} trials failed; first: {first}",
            trials.len()
        )));
    }
    let n = risks.len() as f64;
    let mean = risks.iter().sum::<f64>() / n;
    let stderr = if risks.len() > 1 {
        let var = risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let jitter_max = trials.iter().filter_map(|t| t.jitter).fold(0.0, f64::max);
    Ok(SimResult {
        d: cfg.d,
        m: cfg.m,
        tau: cfg.tau,
        sigma_sq: cfg.sigma_sq,
        empirical_mean: mean,
        empirical_stderr: stderr,
        null_risk: cfg.sigma_sq + cfg.target.norm_sq(),
        bayes_risk: cfg.sigma_sq,
        predicted_total: predicted.total,
        jitter_max,
        trials,
    })
}
