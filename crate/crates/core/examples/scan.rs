//! Run a named scan and print its classification and rows.
//!
//!     cargo run --release --example scan -- corollary1

use krr_sphere::cli::presets::{scan_preset, SCAN_PRESETS};
use krr_sphere::regimes::scan;

fn main() -> krr_sphere::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "theorem1-case2".into());
    if !SCAN_PRESETS.contains(&name.as_str()) {
        eprintln!("presets: {}", SCAN_PRESETS.join(", "));
        std::process::exit(1);
    }
    let report = scan(&scan_preset(&name, 2)?)?;
    println!("{name}: {}", report.classification.as_str());
    println!("{:?}", report.trend);
    for p in &report.points {
        println!(
            "d={:<5} m={:<6} tau={:.4} total={:.6} lower={:?} upper_lin={:?} {}",
            p.d,
            p.m,
            p.tau,
            p.total.unwrap_or(f64::NAN),
            p.lower,
            p.upper_lin,
            p.flags.join(";")
        );
    }
    Ok(())
}
