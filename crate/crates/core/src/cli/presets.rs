//! Named experiment setups, one per reproduced claim.

use crate::eigenframework::TargetSpec;
use crate::error::{Error, Result};
use crate::regimes::{
    AssumptionThresholds, BandwidthSchedule, ClassifyThresholds, DimensionSchedule, Modifier,
    ScanConfig,
};
use crate::simulator::{JitterPolicy, SimConfig, SimTarget};
use crate::spectrum::DEFAULT_TAIL_TOL;

pub const SCAN_PRESETS: &[&str] = &[
    "theorem1-case1",
    "theorem1-case2",
    "theorem1-case3",
    "corollary1",
    "corollary1-alpha1",
    "corollary2",
    "corollary3",
];

pub const SIM_PRESETS: &[&str] = &[
    "appendixA-a",
    "appendixA-b",
    "appendixA-c",
    "agreement-d4",
    "agreement-d6",
];

/// `m = 64, 128, ..., 4096`.
fn theorem1_ms() -> Vec<u64> {
    (0..7).map(|i| 64u64 << i).collect()
}

/// Perfect squares from 16 to 1024, so `d^1.5` is an integer.
fn corollary1_ds() -> Vec<u32> {
    [4u32, 6, 8, 12, 16, 24, 32].iter().map(|r| r * r).collect()
}

fn scan_config(dimension: DimensionSchedule, bandwidth: BandwidthSchedule) -> ScanConfig {
    ScanConfig {
        dimension,
        bandwidth,
        target: TargetSpec::constant(1.0),
        sigma_sq: 1.0,
        tail_tol: DEFAULT_TAIL_TOL,
        b: None,
        thresholds: ClassifyThresholds::default(),
        assumptions: AssumptionThresholds::default(),
    }
}

/// Scan preset by name. `l_max` only applies to `corollary3`.
pub fn scan_preset(name: &str, l_max: u32) -> Result<ScanConfig> {
    let fixed = BandwidthSchedule::Fixed { tau: 1.0 };
    let d6 = DimensionSchedule::Fixed {
        d: 6,
        ms: theorem1_ms(),
    };
    Ok(match name {
        "theorem1-case1" => scan_config(
            d6,
            BandwidthSchedule::Scaled {
                scale: 1.0,
                modifier: Modifier::InverseLog,
            },
        ),
        "theorem1-case2" => scan_config(d6, fixed),
        "theorem1-case3" => scan_config(
            d6,
            BandwidthSchedule::Scaled {
                scale: 2.0,
                modifier: Modifier::Constant,
            },
        ),
        "corollary1" => scan_config(
            DimensionSchedule::Polynomial {
                alpha: 1.5,
                ds: corollary1_ds(),
            },
            fixed,
        ),
        "corollary1-alpha1" => scan_config(
            DimensionSchedule::Polynomial {
                alpha: 1.0,
                ds: corollary1_ds(),
            },
            fixed,
        ),
        "corollary2" => scan_config(
            DimensionSchedule::Logarithmic {
                ds: (10..=20).collect(),
            },
            fixed,
        ),
        "corollary3" => {
            if !(1..=2).contains(&l_max) {
                return Err(Error::domain(format!("--l-max must be 1 or 2, got {l_max}")));
            }
            let mut c = scan_config(
                DimensionSchedule::Subpolynomial {
                    ls: (1..=l_max).collect(),
                },
                fixed,
            );
            c.target.bound = Some(1.0);
            c
        }
        _ => {
            return Err(Error::domain(format!(
                "unknown scan preset '{name}'; expected one of {}",
                SCAN_PRESETS.join(", ")
            )))
        }
    })
}

fn sim_series(
    d: u32,
    ms: &[u64],
    tau: impl Fn(u64) -> f64,
    sigma_sq: f64,
    value: f64,
) -> Vec<SimConfig> {
    ms.iter()
        .map(|&m| SimConfig {
            d,
            m,
            tau: tau(m),
            sigma_sq,
            target: SimTarget::Constant { value },
            n_test: 2000,
            n_trials: 32,
            seed: 1,
            jitter: JitterPolicy::default(),
        })
        .collect()
}

/// Simulation preset by name: one config per sample size.
pub fn sim_preset(name: &str) -> Result<Vec<SimConfig>> {
    let ms = [64u64, 256, 1024];
    let case1 = |d: u32| {
        move |m: u64| {
            BandwidthSchedule::Scaled {
                scale: 1.0,
                modifier: Modifier::InverseLog,
            }
            .tau(d, m)
            .expect("valid schedule")
        }
    };
    let case3 = |d: u32| {
        move |m: u64| {
            BandwidthSchedule::Scaled {
                scale: 2.0,
                modifier: Modifier::Constant,
            }
            .tau(d, m)
            .expect("valid schedule")
        }
    };
    Ok(match name {
        "appendixA-a" => sim_series(6, &ms, case1(6), 1.0, 10.0),
        "appendixA-b" => sim_series(4, &ms, |_| 1.0, 10.0, 10.0),
        "appendixA-c" => sim_series(6, &ms, case3(6), 100.0, 10.0),
        "agreement-d4" => sim_series(4, &[64, 128, 256], |_| 1.0, 1.0, 1.0),
        "agreement-d6" => sim_series(6, &[64, 128, 256], |_| 1.0, 1.0, 1.0),
        _ => {
            return Err(Error::domain(format!(
                "unknown simulate preset '{name}'; expected one of {}",
                SIM_PRESETS.join(", ")
            )))
        }
    })
}
