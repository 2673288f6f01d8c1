//! Gaussian-kernel eigenvalues on the sphere, truncated with a certified tail.

use krr_sphere::spectrum::{build_spectrum, check_ratio_bounds, first_eigenvalue_bracket, SpectrumSpec};

fn main() -> krr_sphere::Result<()> {
    let spec = SpectrumSpec::new(4, 1.0)?;
    let sys = build_spectrum(&spec, 100, 1e-10)?;
    println!(
        "{} degrees, {} eigenvalues, trace {:.12} + tail {:.2e}",
        sys.degrees.len(),
        sys.flattened_total(),
        sys.trace_partial,
        sys.tail_bound
    );
    for l in sys.degrees.iter().take(6) {
        println!("k={:<3} N={:<5} lambda={:.6e}", l.k, l.count, l.lambda());
    }

    let (lo, hi) = first_eigenvalue_bracket(&spec);
    println!(
        "lambda_0 = {:.6e} in [{:.6e}, {:.6e}]",
        sys.degrees[0].lambda(),
        lo.exp(),
        hi.exp()
    );
    let ratios = check_ratio_bounds(&sys);
    println!("{} consecutive ratios, {} outside their bracket", ratios.checks.len(), ratios.violations);
    Ok(())
}
