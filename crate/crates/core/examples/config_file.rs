//! Build an experiment config, save it as JSON and run it the way the binary does.

use krr_sphere::cli::{run_predict, CommandConfig, ExperimentConfig, Format, OutputSpec, PredictConfig};
use krr_sphere::eigenframework::TargetSpec;

fn main() -> krr_sphere::Result<()> {
    let cfg = ExperimentConfig {
        run: CommandConfig::Predict(PredictConfig {
            d: 3,
            tau: 0.7,
            m: 64,
            sigma_sq: 0.25,
            target: TargetSpec::linear(&[1.0, 0.0, 0.0]),
            delta: 0.0,
            tail_tol: 1e-10,
        }),
        output: OutputSpec { path: None, format: Format::Json },
    };
    let text = cfg.to_json()?;
    println!("{text}");
    // krr-sphere predict --config <file> reads exactly this
    assert_eq!(ExperimentConfig::from_json(&text)?, cfg);

    if let CommandConfig::Predict(p) = &cfg.run {
        run_predict(p, &cfg.output)?;
    }
    Ok(())
}
