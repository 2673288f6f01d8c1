//! Gaussian-kernel spectrum on the sphere `S^{d-1}`.
//!
//! For `K(x, y) = exp(-|x - y|^2 / tau^2)` every degree-`k` harmonic shares the
//! eigenvalue
//!
//! ```text
//! lambda_k = exp(-T) tau^(d-2) Gamma(d/2) I_{k+d/2-1}(T),   T = 2 / tau^2,
//! ```
//!
//! normalized so that `sum_k N(d,k) lambda_k = K(x,x) = 1`. Everything is kept
//! in logs; [`build_spectrum`] truncates the degree sequence once a certified
//! bound on the omitted trace mass is small enough.

pub mod bessel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics;

/// Default relative tail tolerance for [`build_spectrum`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Hard cap on the number of retained degrees.
pub const MAX_DEGREE: u64 = 100_000;
/// Retained flattened rank must reach this multiple of `m`.
pub const TRUNCATION_MARGIN: u64 = 10;

/// Dimension and bandwidth of a Gaussian kernel on `S^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub d: u32,
    pub tau: f64,
}

impl SpectrumSpec {
    pub fn new(d: u32, tau: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain(format!(
                "dimension d must be at least 2, got {d}"
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!(
                "bandwidth tau must be positive, got {tau}"
            )));
        }
        Ok(SpectrumSpec { d, tau })
    }

    /// The Bessel argument `2 / tau^2`.
    pub fn t(&self) -> f64 {
        2.0 / (self.tau * self.tau)
    }

    /// Bessel order of degree 0.
    fn v0(&self) -> f64 {
        0.5 * self.d as f64 - 1.0
    }

    fn log_prefactor(&self) -> f64 {
        let d = self.d as f64;
        -self.t() + (d - 2.0) * self.tau.ln() + libm::lgamma(0.5 * d)
    }
}

/// One distinct eigenvalue with its multiplicity.
///
/// `count` is a float because multiplicities outgrow `u64` quickly in high
/// dimension; it is an exact integer below `2^53` and serializes as one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Degree (or position, for synthetic spectra).
    pub k: u64,
    pub log_lambda: f64,
    #[serde(with = "count_format")]
    pub count: f64,
}

mod count_format {
    use serde::{Deserialize, Deserializer, Serializer};

    const EXACT: f64 = 9_007_199_254_740_992.0; // 2^53

    pub fn serialize<S: Serializer>(c: &f64, s: S) -> Result<S::Ok, S::Error> {
        if c.fract() == 0.0 && *c >= 0.0 && *c < EXACT {
            s.serialize_u64(*c as u64)
        } else {
            s.serialize_f64(*c)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

impl Level {
    pub fn lambda(&self) -> f64 {
        self.log_lambda.exp()
    }
}

/// Truncated Gaussian-kernel spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub d: u32,
    pub tau: f64,
    pub degrees: Vec<Level>,
    /// `sum N(d,k) lambda_k` over the retained degrees.
    pub trace_partial: f64,
    /// Certified upper bound on the trace mass of omitted degrees.
    pub tail_bound: f64,
}

impl EigenSystem {
    pub fn spec(&self) -> SpectrumSpec {
        SpectrumSpec {
            d: self.d,
            tau: self.tau,
        }
    }

    /// Number of retained eigenvalues counted with multiplicity.
    pub fn flattened_total(&self) -> f64 {
        self.degrees.iter().map(|l| l.count).sum()
    }
}

/// Stopping rule for [`build_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub tail_tol: f64,
    pub margin: u64,
    pub max_degree: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_tol: DEFAULT_TAIL_TOL,
            margin: TRUNCATION_MARGIN,
            max_degree: MAX_DEGREE,
        }
    }
}

/// `ln lambda_k` for a single degree.
pub fn eigenvalue_log(spec: &SpectrumSpec, k: u64) -> Result<f64> {
    Ok(spec.log_prefactor() + bessel::log_bessel_i(spec.v0() + k as f64, spec.t())?)
}

/// Upper bound on `lambda_{k+1}/lambda_k`, valid for every later degree too.
fn ratio_upper(spec: &SpectrumSpec, k: u64) -> f64 {
    let t = spec.t();
    let v = spec.v0() + k as f64;
    let segura = bessel::segura_bracket(v, t).1;
    let simple = t / (2.0 * (k as f64 + 0.5 * spec.d as f64));
    segura.min(simple)
}

/// Retain degrees until the flattened rank reaches `margin * m` and the
/// omitted trace mass is certified below `tail_tol * trace_partial`.
pub fn build_spectrum_with(
    spec: &SpectrumSpec,
    m: u64,
    policy: &TruncationPolicy,
) -> Result<EigenSystem> {
    let spec = SpectrumSpec::new(spec.d, spec.tau)?;
    if m < 2 {
        return Err(Error::domain(format!(
            "sample size m must be at least 2, got {m}"
        )));
    }
    if !(policy.tail_tol > 0.0 && policy.tail_tol < 1.0) {
        return Err(Error::domain(format!(
            "tail_tol must lie in (0, 1), got {}",
            policy.tail_tol
        )));
    }
    let need_rank = m as f64 * policy.margin as f64;
    let prefactor = spec.log_prefactor();
    let mut chunk = 64usize;
    loop {
        let cap = (chunk as u64).min(policy.max_degree + 1) as usize;
        let log_i = bessel::log_bessel_i_orders(spec.v0(), cap, spec.t())?;
        let mut degrees = Vec::with_capacity(cap);
        let mut trace = 0.0f64;
        let mut rank = 0.0f64;
        for (k, li) in log_i.iter().enumerate() {
            let k = k as u64;
            let count = harmonics::multiplicity(spec.d, k)?.as_f64();
            if !count.is_finite() {
                return Err(Error::Numeric(format!(
                    "multiplicity N({}, {k}) overflows f64",
                    spec.d
                )));
            }
            let log_lambda = prefactor + li;
            if let Some(prev) = degrees.last().map(|l: &Level| l.log_lambda) {
                if log_lambda >= prev {
                    return Err(Error::Numeric(format!(
                        "eigenvalues not decreasing at degree {k}"
                    )));
                }
            }
            let mass = count * log_lambda.exp();
            trace += mass;
            rank += count;
            degrees.push(Level {
                k,
                log_lambda,
                count,
            });

            let g = ratio_upper(&spec, k) * harmonics::multiplicity_ratio(spec.d, k);
            let tail = if g < 0.5 {
                mass * g / (1.0 - g)
            } else {
                f64::INFINITY
            };
            if rank >= need_rank && tail <= policy.tail_tol * trace {
                return Ok(EigenSystem {
                    d: spec.d,
                    tau: spec.tau,
                    degrees,
                    trace_partial: trace,
                    tail_bound: tail,
                });
            }
        }
        if cap as u64 > policy.max_degree {
            return Err(Error::Budget(format!(
                "d={} tau={} m={m}: stopping rule not met within {} degrees",
                spec.d, spec.tau, policy.max_degree
            )));
        }
        chunk *= 4;
    }
}

/// [`build_spectrum_with`] using the default margin and degree cap.
pub fn build_spectrum(spec: &SpectrumSpec, m: u64, tail_tol: f64) -> Result<EigenSystem> {
    build_spectrum_with(
        spec,
        m,
        &TruncationPolicy {
            tail_tol,
            ..TruncationPolicy::default()
        },
    )
}

/// Open interval containing `lambda_{k+1}/lambda_k`.
pub fn ratio_bracket(spec: &SpectrumSpec, k: u64) -> (f64, f64) {
    let t = spec.t();
    let a = k as f64 + 0.5 * spec.d as f64;
    (t / (2.0 * a + t), t / ((a - 0.5) + t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCheck {
    pub k: u64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub checks: Vec<RatioCheck>,
    pub violations: usize,
    /// Largest distance outside the bracket, in log-ratio units; 0 when none.
    pub max_violation: f64,
}

/// Check every consecutive ratio of a spectrum against [`ratio_bracket`].
pub fn check_ratio_bounds(system: &EigenSystem) -> RatioReport {
    let spec = system.spec();
    let mut checks = Vec::new();
    let mut max_violation = 0.0f64;
    for w in system.degrees.windows(2) {
        let log_ratio = w[1].log_lambda - w[0].log_lambda;
        let (lower, upper) = ratio_bracket(&spec, w[0].k);
        let (ll, lu) = (lower.ln(), upper.ln());
        let inside = ll < log_ratio && log_ratio < lu;
        if !inside {
            max_violation = max_violation.max((ll - log_ratio).max(log_ratio - lu).max(0.0));
        }
        checks.push(RatioCheck {
            k: w[0].k,
            ratio: log_ratio.exp(),
            lower,
            upper,
            inside,
        });
    }
    let violations = checks.iter().filter(|c| !c.inside).count();
    RatioReport {
        checks,
        violations,
        max_violation,
    }
}

/// Bracket `(ln lower, ln upper)` on the largest eigenvalue `lambda_0`.
///
/// Even `d` start from `exp(T)/(1+2T) < I_0(T) < exp(T)/sqrt(1+2T)`, odd `d`
/// from the closed form of `I_{1/2}`; each further order multiplies by
/// `T/(2(v+1)+T) < I_{v+1}/I_v < T/(2v+1)`.
pub fn first_eigenvalue_bracket(spec: &SpectrumSpec) -> (f64, f64) {
    let t = spec.t();
    let (mut lo, mut hi, mut v) = if spec.d % 2 == 0 {
        let base = t - (1.0 + 2.0 * t).ln();
        (base, t - 0.5 * (1.0 + 2.0 * t).ln(), 0.0)
    } else {
        // ln( sqrt(2/(pi T)) sinh T ), exact
        let exact =
            0.5 * (2.0 / (std::f64::consts::PI * t)).ln() + t + (-(-2.0 * t).exp_m1() / 2.0).ln();
        (exact, exact, 0.5)
    };
    while v < spec.v0() - 1e-9 {
        lo += (t / (2.0 * (v + 1.0) + t)).ln();
        hi += (t / (2.0 * v + 1.0)).ln();
        v += 1.0;
    }
    let p = spec.log_prefactor();
    (p + lo, p + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_examples() {
        let s = SpectrumSpec::new(2, 1.0).unwrap();
        assert!((eigenvalue_log(&s, 0).unwrap().exp() - 0.308508322553671).abs() < 1e-13);
        let s3 = SpectrumSpec::new(3, 1.0).unwrap();
        assert!((eigenvalue_log(&s3, 0).unwrap().exp() - 0.245421090277816).abs() < 1e-13);
        let r = (eigenvalue_log(&s, 1).unwrap() - eigenvalue_log(&s, 0).unwrap()).exp();
        assert!((r - 0.697775).abs() < 1e-6);
        let (lo, hi) = ratio_bracket(&s, 0);
        assert!(lo < r && r < hi && lo > 0.49 && hi < 0.81);
    }

    #[test]
    fn trace_and_margin() {
        let sys = build_spectrum(&SpectrumSpec::new(3, 1.0).unwrap(), 10, 1e-10).unwrap();
        assert!((sys.trace_partial + sys.tail_bound - 1.0).abs() < 1e-8);
        let sys = build_spectrum(&SpectrumSpec::new(2, 1.0).unwrap(), 4, 1e-10).unwrap();
        assert!(sys.flattened_total() >= 40.0);
        assert!(sys.trace_partial <= 1.0 + 1e-12);
        assert!(sys.trace_partial + sys.tail_bound >= 1.0 - 1e-12);
    }

    #[test]
    fn ratio_report_examples() {
        for (d, tau, kmax) in [(2u32, 1.0, 10usize), (6, 0.5, 20)] {
            let sys = build_spectrum(&SpectrumSpec::new(d, tau).unwrap(), 2, 1e-10).unwrap();
            assert!(sys.degrees.len() > kmax);
            let rep = check_ratio_bounds(&sys);
            assert_eq!(rep.violations, 0);
        }
        let single = EigenSystem {
            d: 3,
            tau: 1.0,
            degrees: vec![Level {
                k: 0,
                log_lambda: -1.0,
                count: 1.0,
            }],
            trace_partial: 0.3,
            tail_bound: 0.7,
        };
        assert!(check_ratio_bounds(&single).checks.is_empty());
    }

    #[test]
    fn invalid_spec() {
        assert!(SpectrumSpec::new(1, 1.0).is_err());
        assert!(SpectrumSpec::new(3, 0.0).is_err());
        let s = SpectrumSpec::new(3, 1.0).unwrap();
        assert!(build_spectrum(&s, 1, 1e-10).is_err());
        assert!(build_spectrum(&s, 5, 0.0).is_err());
    }

    #[test]
    fn budget_error() {
        let s = SpectrumSpec::new(3, 0.01).unwrap();
        let policy = TruncationPolicy {
            max_degree: 5,
            ..TruncationPolicy::default()
        };
        assert!(matches!(
            build_spectrum_with(&s, 2, &policy),
            Err(Error::Budget(_))
        ));
    }
}
