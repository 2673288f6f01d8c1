use std::path::PathBuf;
use std::process::{Command, Output};

use krr_sphere::cli::{CommandConfig, ExperimentConfig, Format, OutputSpec, PredictConfig, SpectrumConfig};
use krr_sphere::eigenframework::TargetSpec;
use krr_sphere::simulator::{JitterPolicy, SimConfig, SimTarget};
use proptest::prelude::*;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krr-sphere"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("krr-sphere-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(text: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text)
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn spectrum_trace_near_one() {
    let v = json(&bin(&["spectrum", "--d", "3", "--tau", "1", "--m", "10"]));
    let total = v["trace_partial"].as_f64().unwrap() + v["tail_bound"].as_f64().unwrap();
    assert!((total - 1.0).abs() < 1e-8, "{total}");
}

#[test]
fn spectrum_margin_retains_forty() {
    let v = json(&bin(&["spectrum", "--d", "2", "--tau", "1", "--m", "4"]));
    let flat: f64 = v["degrees"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["count"].as_f64().unwrap())
        .sum();
    assert!(flat >= 40.0, "{flat}");
}

#[test]
fn bad_dimension_is_usage_error() {
    let out = bin(&["spectrum", "--d", "1", "--tau", "1", "--m", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("dimension d must be at least 2"), "{msg}");
    assert_eq!(msg.lines().count(), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin(&["scan", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(bin(&["bogus"]).status.code(), Some(1));
    assert_eq!(bin(&["predict", "--d", "3"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn numeric_failure_exits_two() {
    // the d = 4, tau = 1 Gram matrix at m = 1024 cannot be interpolated in f64
    let out = bin(&[
        "simulate", "--d", "4", "--m", "1024", "--tau", "1", "--n-trials", "2", "--n-test", "100",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // the failed experiment is still written, with empty result columns
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "1024");
    assert_eq!(&rows[0][3], "");
}

#[test]
fn predict_and_regime_run() {
    let p = json(&bin(&["predict", "--d", "4", "--tau", "1", "--m", "50"]));
    assert!(p["total"].as_f64().unwrap() > 1.0);
    let r = json(&bin(&[
        "regime", "--d", "6", "--m", "256", "--schedule", "inverse-log",
    ]));
    assert_eq!(r["bandwidth_case"].as_u64(), Some(1));
    let r = json(&bin(&["regime", "--d", "6", "--m", "256", "--tau", "1"]));
    assert_eq!(r["bandwidth_case"].as_u64(), Some(2));
}

#[test]
fn case_two_scan_increases() {
    let out = bin(&["scan", "--preset", "theorem1-case2"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    let totals: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(totals.len(), 7);
    assert!(totals.windows(2).all(|w| w[1] > w[0]), "{totals:?}");
}

#[test]
fn corollary3_rows() {
    let out = bin(&["scan", "--preset", "corollary3", "--l-max", "2"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    let dm: Vec<(String, String)> = rows.iter().map(|r| (r[1].to_string(), r[0].to_string())).collect();
    assert_eq!(
        dm,
        vec![("4".into(), "16".into()), ("16".into(), "65536".into())]
    );
}

#[test]
fn csv_header_frozen() {
    let out = bin(&["scan", "--preset", "corollary2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "m,d,tau,kappa,e0,total,upper_sq,upper_lin,lower,A,b,c,flags"
    );
}

#[test]
fn outputs_are_byte_stable() {
    let a = scratch("stable-a");
    let b = scratch("stable-b");
    for p in [&a, &b] {
        let s = p.to_str().unwrap();
        let out = bin(&["scan", "--preset", "theorem1-case3", "--format", "both", "--out", s]);
        assert!(out.status.success());
    }
    for ext in ["csv", "json"] {
        let x = std::fs::read(a.with_extension(ext)).unwrap();
        let y = std::fs::read(b.with_extension(ext)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{ext}");
    }
}

#[test]
fn config_file_drives_command() {
    let path = scratch("predict.json");
    let out = scratch("predict-out.json");
    let cfg = ExperimentConfig {
        run: CommandConfig::Predict(PredictConfig {
            d: 5,
            tau: 0.8,
            m: 100,
            sigma_sq: 0.5,
            target: TargetSpec::constant(2.0),
            delta: 0.0,
            tail_tol: 1e-10,
        }),
        output: OutputSpec {
            path: Some(out.clone()),
            format: Format::Json,
        },
    };
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    let res = bin(&["predict", "--config", path.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(v["total"].as_f64().unwrap() > 0.5);

    // a config for another command is rejected
    let res = bin(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    let spectrum = (2u32..50, 0.01f64..10.0, 2u64..10_000, 1e-14f64..1e-4).prop_map(|(d, tau, m, tail_tol)| {
        CommandConfig::Spectrum(SpectrumConfig { d, tau, m, tail_tol })
    });
    let simulate = (2u32..10, 1u64..4096, 0.01f64..5.0, 0.0f64..100.0, -50.0f64..50.0, any::<u64>())
        .prop_map(|(d, m, tau, sigma_sq, value, seed)| CommandConfig::Simulate {
            runs: vec![SimConfig {
                d,
                m,
                tau,
                sigma_sq,
                target: SimTarget::Constant { value },
                n_test: 100,
                n_trials: 3,
                seed,
                jitter: JitterPolicy::default(),
            }],
        });
    let format = prop_oneof![Just(Format::Csv), Just(Format::Json), Just(Format::Both)];
    (prop_oneof![spectrum, simulate], format, proptest::option::of("[a-z]{1,8}")).prop_map(
        |(run, format, path)| ExperimentConfig {
            run,
            output: OutputSpec {
                path: path.map(PathBuf::from),
                format,
            },
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn config_round_trips(cfg in arb_config()) {
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
