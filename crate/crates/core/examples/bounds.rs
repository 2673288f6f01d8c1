//! Bandwidth case, assumption constants and the risk bounds at one point.

use krr_sphere::eigenframework::{predicted_risk, TargetSpec};
use krr_sphere::regimes::{
    classify_bandwidth_regime, master_upper_bound, risk_lower_bound, verify_assumptions,
    AssumptionThresholds, BandwidthSchedule, Modifier, UpperVariant,
};
use krr_sphere::spectrum::{build_spectrum, SpectrumSpec, DEFAULT_TAIL_TOL};

fn main() -> krr_sphere::Result<()> {
    let (d, m, sigma_sq) = (6, 512, 1.0);
    let target = TargetSpec::constant(1.0);

    for schedule in [
        BandwidthSchedule::Scaled { scale: 1.0, modifier: Modifier::InverseLog },
        BandwidthSchedule::Fixed { tau: 1.0 },
        BandwidthSchedule::Scaled { scale: 2.0, modifier: Modifier::Constant },
    ] {
        let tau = schedule.tau(d, m)?;
        let case = classify_bandwidth_regime(d, &schedule)?;
        let sys = build_spectrum(&SpectrumSpec::new(d, tau)?, m, DEFAULT_TAIL_TOL)?;
        let total = predicted_risk(&sys, &target, sigma_sq, m, 0.0)?.total;
        let a = verify_assumptions(&sys, m, &AssumptionThresholds::default())?;
        let upper = master_upper_bound(&sys, m, &target, sigma_sq, UpperVariant::Linear)
            .map(|u| u.value)
            .ok();
        let lower = risk_lower_bound(&sys, m, sigma_sq, None)?;
        println!("case {} tau={tau:.4}", case.number());
        println!("  A={:.10} b={:.3e} c={:.3e}", a.a, a.b, a.c);
        println!("  {:?} <= {total:.6} <= {:?}", lower.value, upper);
    }
    Ok(())
}
