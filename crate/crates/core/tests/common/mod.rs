//! Oracles shared by the integration tests.

#![allow(dead_code)]

/// Illinois false-position root of `sum lambda/(lambda+kappa) + delta/kappa - m`
/// on a per-mode list, in plain (non-log) arithmetic.
pub fn oracle_kappa(modes: &[f64], m: f64, delta: f64) -> f64 {
    let f = |k: f64| modes.iter().map(|&l| l / (l + k)).sum::<f64>() + delta / k - m;
    let (mut a, mut b) = (1e-300f64, 1e300f64);
    // shrink the huge bracket geometrically first
    for _ in 0..4000 {
        let mid = (a * b).sqrt();
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b / a < 1.0 + 1e-3 {
            break;
        }
    }
    let (mut fa, mut fb) = (f(a), f(b));
    let mut side = 0;
    for _ in 0..500 {
        let c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            break;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    if f(a).abs() < f(b).abs() {
        a
    } else {
        b
    }
}

/// Ridgeless-or-ridge total risk from a per-mode list of `(lambda, beta_sq)`,
/// with `unlearned` mass sitting outside the listed modes.
pub fn per_mode_total(modes: &[(f64, f64)], unlearned: f64, sigma_sq: f64, m: f64, delta: f64) -> (f64, f64) {
    let lambdas: Vec<f64> = modes.iter().map(|&(l, _)| l).collect();
    let kappa = oracle_kappa(&lambdas, m, delta);
    let mut sum_l2 = 0.0;
    let mut inner = unlearned;
    for &(l, b) in modes {
        let li = l / (l + kappa);
        sum_l2 += li * li;
        inner += (1.0 - li).powi(2) * b;
    }
    (kappa, m / (m - sum_l2) * (inner + sigma_sq))
}
