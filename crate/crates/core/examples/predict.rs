//! Closed-form risk of the interpolant and of a ridge fit, plus the E0 bracket.

use krr_sphere::eigenframework::{e0_bracket, effective_ranks, predicted_risk, TargetSpec};
use krr_sphere::spectrum::{build_spectrum, SpectrumSpec, DEFAULT_TAIL_TOL};

fn main() -> krr_sphere::Result<()> {
    let m = 200;
    let sys = build_spectrum(&SpectrumSpec::new(5, 1.0)?, m, DEFAULT_TAIL_TOL)?;
    let target = TargetSpec::constant(1.0);

    for delta in [0.0, 1e-3, 1e-1] {
        let p = predicted_risk(&sys, &target, 1.0, m, delta)?;
        println!(
            "delta={delta:<6} kappa={:.4e} E={:.4} bias={:.4} variance={:.4} total={:.4}",
            p.kappa, p.e_factor, p.bias, p.variance, p.total
        );
    }

    let ranks = effective_ranks(&sys, &[0, 10, 50])?;
    for r in ranks {
        println!("k={} r_k={:.3} R_k={:.3}", r.k, r.r, r.big_r);
    }
    let bracket = e0_bracket(&sys, m, 1.0)?;
    println!(
        "E0 upper {:?}, lower {:?}",
        bracket.upper.map(|s| s.value),
        bracket.zhou_lower.map(|s| s.value)
    );
    Ok(())
}
