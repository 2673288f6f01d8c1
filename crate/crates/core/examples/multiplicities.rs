//! Harmonic multiplicities and where a sample size falls among them.

use krr_sphere::harmonics::{cumulative_multiplicity, index_summary, invert_index, multiplicity};

fn main() -> krr_sphere::Result<()> {
    let d = 6;
    println!("degree  N(d,k)  cumulative");
    for k in 0..8 {
        let n = multiplicity(d, k)?;
        let c = cumulative_multiplicity(d, k)?;
        println!("{k:>6}  {:>6}  {:>10}", n.as_f64(), c.as_f64());
    }

    for m in [10, 100, 1000, 10_000] {
        let idx = index_summary(d, m)?;
        println!("m={m}: k_m={} L_m={} U_m={}", idx.k_m, idx.l_m, idx.u_m_f64());
    }
    println!("eigenvalue #500 belongs to degree {}", invert_index(d, 500)?);

    // far too large for u64, still fine in logs
    let big = multiplicity(1000, 400)?;
    println!("ln N(1000, 400) = {:.3}", big.value_log);
    Ok(())
}
