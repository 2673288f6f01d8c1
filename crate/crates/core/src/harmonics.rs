//! Multiplicities of spherical-harmonic degrees on `S^{d-1}` and the index
//! machinery that locates a sample size `m` between consecutive degree blocks.
//!
//! Degrees are 0-based: degree 0 is the constant harmonic. Counts are exact
//! (`u64`) while they fit and always carry a natural-log value, so callers can
//! move to the log domain once `d` or `k` get large.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomials with `min(r, n-r)` up to this size are logged term by term.
const LOG_BINOM_DIRECT: u64 = 64;

/// A multiplicity or cumulative multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeCount {
    pub d: u32,
    pub k: u64,
    /// Exact value when it fits in a `u64`.
    pub value_exact: Option<u64>,
    /// Natural log of the value; always finite.
    pub value_log: f64,
}

impl DegreeCount {
    fn new(d: u32, k: u64, exact: Option<u64>, log_fallback: impl FnOnce() -> f64) -> Self {
        let value_log = match exact {
            Some(v) => (v as f64).ln(),
            None => log_fallback(),
        };
        DegreeCount {
            d,
            k,
            value_exact: exact,
            value_log,
        }
    }

    /// The value as a float (may be `inf` when only the log fits).
    pub fn as_f64(&self) -> f64 {
        match self.value_exact {
            Some(v) => v as f64,
            None => self.value_log.exp(),
        }
    }
}

/// Where `m` sits among the cumulative degree counts.
///
/// `k_m` is the largest degree whose cumulative count is below `m`;
/// `l_m` is that cumulative count and `u_m` the one a degree later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub m: u64,
    pub k_m: u64,
    pub l_m: u64,
    pub u_m: Option<u64>,
    pub u_m_log: f64,
}

impl IndexSummary {
    pub fn u_m_f64(&self) -> f64 {
        match self.u_m {
            Some(u) => u as f64,
            None => self.u_m_log.exp(),
        }
    }
}

fn check_d(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!(
            "dimension d must be at least 2, got {d}"
        )));
    }
    Ok(())
}

pub(crate) fn binom_exact(n: u64, r: u64) -> Option<u64> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        acc = acc.checked_mul(n as u128 - r as u128 + i)? / i;
    }
    u64::try_from(acc).ok()
}

/// `ln C(n, r)` for `r <= n`.
pub(crate) fn ln_binom(n: u64, r: u64) -> f64 {
    debug_assert!(r <= n);
    let r = r.min(n - r);
    if r <= LOG_BINOM_DIRECT {
        let base = (n - r) as f64;
        (1..=r).map(|i| (base / i as f64).ln_1p()).sum()
    } else {
        libm::lgamma(n as f64 + 1.0)
            - libm::lgamma(r as f64 + 1.0)
            - libm::lgamma((n - r) as f64 + 1.0)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn multiplicity_exact(d: u32, k: u64) -> Option<u64> {
    if d == 2 {
        return Some(if k == 0 { 1 } else { 2 });
    }
    let d = d as u64;
    let a = binom_exact(k.checked_add(d - 1)?, d - 1)?;
    let b = if k >= 2 {
        binom_exact(k + d - 3, d - 1)?
    } else {
        0
    };
    Some(a - b)
}

/// Log-domain multiplicity, independent of the exact integer path.
pub fn log_multiplicity(d: u32, k: u64) -> f64 {
    match d {
        2 => {
            if k == 0 {
                0.0
            } else {
                std::f64::consts::LN_2
            }
        }
        _ => {
            let d = d as u64;
            let lead = ((2 * k + d - 2) as f64).ln() - ((d - 2) as f64).ln();
            lead + ln_binom(k + d - 3, d - 3)
        }
    }
}

/// Number of linearly independent degree-`k` spherical harmonics on `S^{d-1}`.
pub fn multiplicity(d: u32, k: u64) -> Result<DegreeCount> {
    check_d(d)?;
    Ok(DegreeCount::new(d, k, multiplicity_exact(d, k), || {
        log_multiplicity(d, k)
    }))
}

fn cumulative_exact(d: u32, k: u64) -> Option<u64> {
    let d = d as u64;
    let a = binom_exact(k.checked_add(d - 1)?, d - 1)?;
    let b = binom_exact(k + d - 2, d - 1)?;
    a.checked_add(b)
}

/// Log-domain cumulative count, independent of the exact integer path.
pub fn log_cumulative(d: u32, k: u64) -> f64 {
    let d = d as u64;
    let a = ln_binom(k + d - 1, d - 1);
    let b = if k >= 1 {
        ln_binom(k + d - 2, d - 1)
    } else {
        f64::NEG_INFINITY
    };
    log_add(a, b)
}

/// Total count of harmonics of degrees `0..=k`.
pub fn cumulative_multiplicity(d: u32, k: u64) -> Result<DegreeCount> {
    check_d(d)?;
    Ok(DegreeCount::new(d, k, cumulative_exact(d, k), || {
        log_cumulative(d, k)
    }))
}

/// `N(d, k+1) / N(d, k)`; non-increasing in `k`.
pub fn multiplicity_ratio(d: u32, k: u64) -> f64 {
    if d == 2 {
        return if k == 0 { 2.0 } else { 1.0 };
    }
    let (d, k) = (d as f64, k as f64);
    (2.0 * k + d) * (k + d - 2.0) / ((2.0 * k + d - 2.0) * (k + 1.0))
}

/// Smallest degree `k` with `cumulative(d, k) >= target`.
fn first_degree_reaching(d: u32, target: u64) -> u64 {
    let reaches = |k: u64| cumulative_exact(d, k).map_or(true, |c| c >= target);
    if reaches(0) {
        return 0;
    }
    let mut hi = 1u64;
    while !reaches(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // reaches(lo) is false, reaches(hi) is true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Locate `m` between consecutive cumulative degree counts.
pub fn index_summary(d: u32, m: u64) -> Result<IndexSummary> {
    check_d(d)?;
    if m < 2 {
        return Err(Error::domain(format!(
            "sample size m must be at least 2, got {m}"
        )));
    }
    let k_m = first_degree_reaching(d, m) - 1;
    let l_m = cumulative_exact(d, k_m).expect("cumulative below m fits in u64");
    let upper = cumulative_multiplicity(d, k_m + 1)?;
    Ok(IndexSummary {
        m,
        k_m,
        l_m,
        u_m: upper.value_exact,
        u_m_log: upper.value_log,
    })
}

/// Degree of the `j`-th largest eigenvalue (1-based, counted with multiplicity).
pub fn invert_index(d: u32, j: u64) -> Result<u64> {
    check_d(d)?;
    if j == 0 {
        return Err(Error::domain("flattened index j is 1-based; got 0"));
    }
    Ok(first_degree_reaching(d, j))
}
