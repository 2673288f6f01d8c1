//! Monte Carlo risk of the interpolant next to its closed-form prediction.

use krr_sphere::simulator::{run_experiment, JitterPolicy, SimConfig, SimTarget};

fn main() -> krr_sphere::Result<()> {
    for m in [32, 64, 128] {
        let cfg = SimConfig {
            d: 6,
            m,
            tau: 1.0,
            sigma_sq: 1.0,
            target: SimTarget::Constant { value: 1.0 },
            n_test: 1000,
            n_trials: 16,
            seed: 42,
            jitter: JitterPolicy::default(),
        };
        let r = run_experiment(&cfg)?;
        println!(
            "m={m:<4} empirical {:.4} +- {:.4}  predicted {:.4}  null {}",
            r.empirical_mean, r.empirical_stderr, r.predicted_total, r.null_risk
        );
    }
    Ok(())
}
