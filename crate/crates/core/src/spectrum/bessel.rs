//! Modified Bessel functions of the first kind, `I_v(x)`, in the log domain.
//!
//! Two independent evaluations:
//!
//! * [`log_bessel_i_series`] sums the defining power series with a running
//!   log-sum-exp. Slow for large `x`, but simple enough to serve as the oracle.
//! * [`log_bessel_i`] anchors at the fractional order `v - floor(v)` (power
//!   series for small `x`, Hankel asymptotic expansion otherwise) and walks up
//!   in order through ratios `I_{v+1}/I_v` obtained by backward recurrence.
//!
//! Neither path ever forms `I_v(x)` itself, so `x` in the thousands and
//! orders in the thousands are fine.

use crate::error::{Error, Result};

/// Below this argument the anchor uses the power series.
const ANCHOR_SERIES_MAX_X: f64 = 30.0;
/// Extra orders above `max(v, x)` where the backward recurrence starts.
const RECURRENCE_HEADROOM: f64 = 60.0;
/// Series terms this far (in log) below the running maximum are dropped.
const SERIES_CUTOFF: f64 = 50.0;

fn check_domain(v: f64, x: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("Bessel order must be >= 0, got {v}")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!(
            "Bessel argument must be > 0, got {x}"
        )));
    }
    Ok(())
}

/// `ln I_v(x)` from the power series `sum_j (x/2)^{2j+v} / (j! Γ(v+j+1))`.
pub fn log_bessel_i_series(v: f64, x: f64) -> Result<f64> {
    check_domain(v, x)?;
    let step = 2.0 * (0.5 * x).ln();
    let peak = 0.5 * ((v * v + x * x).sqrt() - v);
    // log of the term ratio to t_0 = 1
    let mut lt = 0.0f64;
    let mut lmax = 0.0f64;
    let mut acc = 1.0f64; // sum of exp(lt - lmax)
    let mut j = 0.0f64;
    loop {
        lt += step - (j + 1.0).ln() - (v + j + 1.0).ln();
        j += 1.0;
        if lt > lmax {
            acc = acc * (lmax - lt).exp() + 1.0;
            lmax = lt;
        } else {
            acc += (lt - lmax).exp();
        }
        if j > peak && lt < lmax - SERIES_CUTOFF {
            break;
        }
    }
    Ok(v * (0.5 * x).ln() - libm::lgamma(v + 1.0) + lmax + acc.ln())
}

/// `ln I_v(x)` from `e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(v) / x^k`, for `x >= 30`, `v < 1`.
fn log_bessel_i_asymptotic(v: f64, x: f64) -> f64 {
    let mu = 4.0 * v * v;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0.0f64;
    loop {
        let odd = 2.0 * k + 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * (k + 1.0) * x);
        if next.abs() >= term.abs() {
            break; // asymptotic series has started to diverge
        }
        sum += next;
        if next.abs() < 1e-18 * sum.abs() {
            break;
        }
        term = next;
        k += 1.0;
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

/// Bracket `(lower, upper)` on `I_{v+1}(x)/I_v(x)`.
pub fn segura_bracket(v: f64, x: f64) -> (f64, f64) {
    let a = v + 1.0;
    let b = v + 0.5;
    (
        x / (a + (a * a + x * x).sqrt()),
        x / (b + (b * b + x * x).sqrt()),
    )
}

/// Ratios `I_{v0+j+1}(x)/I_{v0+j}(x)` for `j = 0..count`, by backward recurrence.
pub(crate) fn ratios_backward(v0: f64, count: usize, x: f64) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let v_end = v0 + count as f64;
    let top = ((v_end.max(x) + RECURRENCE_HEADROOM) - v0).ceil() as usize;
    let mut rho = segura_bracket(v0 + top as f64, x).0;
    let mut out = vec![0.0; count];
    for j in (0..top).rev() {
        let v = v0 + j as f64;
        rho = x / (2.0 * (v + 1.0) + x * rho);
        if j < count {
            out[j] = rho;
        }
    }
    out
}

/// `I_{v+1}(x)/I_v(x)`, always in `(0, 1)`.
pub fn bessel_ratio(v: f64, x: f64) -> Result<f64> {
    check_domain(v, x)?;
    Ok(ratios_backward(v, 1, x)[0])
}

fn log_anchor(a: f64, x: f64) -> f64 {
    if x < ANCHOR_SERIES_MAX_X {
        log_bessel_i_series(a, x).expect("anchor domain checked by caller")
    } else {
        log_bessel_i_asymptotic(a, x)
    }
}

/// `ln I_v(x)` via fractional-order anchor and a ratio chain.
pub fn log_bessel_i(v: f64, x: f64) -> Result<f64> {
    check_domain(v, x)?;
    Ok(*log_bessel_i_orders(v, 1, x)?
        .last()
        .expect("one order requested"))
}

/// `ln I_{v0+j}(x)` for `j = 0..count`, sharing one anchor and one recurrence sweep.
pub fn log_bessel_i_orders(v0: f64, count: usize, x: f64) -> Result<Vec<f64>> {
    check_domain(v0, x)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = v0.floor();
    let a = v0 - n;
    let skip = n as usize;
    let ratios = ratios_backward(a, skip + count - 1, x);
    // Neumaier summation: thousands of log-ratios are added to a large running value
    let mut sum = log_anchor(a, x);
    let mut comp = 0.0f64;
    let mut out = Vec::with_capacity(count);
    for (j, r) in std::iter::once(&1.0).chain(ratios.iter()).enumerate() {
        if j > 0 {
            let term = r.ln();
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        if j >= skip {
            out.push(sum + comp);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b).exp() - 1.0).abs()
    }

    #[test]
    fn known_values() {
        assert!((log_bessel_i_series(0.0, 2.0).unwrap() - 2.279585302336067f64.ln()).abs() < 1e-14);
        let half = (1.0 / std::f64::consts::PI).sqrt() * 2.0f64.sinh();
        assert!(rel(log_bessel_i_series(0.5, 2.0).unwrap(), half.ln()) < 1e-14);
        assert!(rel(log_bessel_i(0.5, 2.0).unwrap(), half.ln()) < 1e-14);
        assert!(log_bessel_i_series(0.0, 1e-300).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ratio_known_value() {
        let r = bessel_ratio(0.0, 2.0).unwrap();
        assert!((r - 0.697774657964008).abs() < 1e-13, "{r}");
    }

    #[test]
    fn half_integer_closed_form_large_x() {
        // I_{1/2}(x) = sqrt(2/(pi x)) sinh x
        for x in [31.0f64, 75.0, 200.0, 700.0] {
            let exact = 0.5 * (2.0 / (std::f64::consts::PI * x)).ln()
                + x
                + (-(-2.0 * x).exp_m1() / 2.0).ln();
            assert!(rel(log_bessel_i(0.5, x).unwrap(), exact) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(log_bessel_i(-1.0, 1.0).is_err());
        assert!(log_bessel_i(1.0, 0.0).is_err());
        assert!(bessel_ratio(1.0, -2.0).is_err());
    }

    #[test]
    fn orders_match_single_calls() {
        let seq = log_bessel_i_orders(1.5, 20, 7.0).unwrap();
        for (j, l) in seq.iter().enumerate() {
            let single = log_bessel_i_series(1.5 + j as f64, 7.0).unwrap();
            assert!(rel(*l, single) < 1e-13);
        }
    }
}
