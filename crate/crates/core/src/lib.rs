//! Gaussian kernel ridge(less) regression on the unit sphere `S^{d-1}`.
//!
//! The crate computes the Mercer spectrum of `exp(-||x - x'||^2 / tau)` on the
//! sphere, predicts test risk with the omniscient eigenframework, evaluates the
//! overfitting bounds for the three bandwidth regimes and checks predictions
//! against Monte Carlo interpolation.
//!
//! Modules, bottom up:
//! - [`harmonics`]: spherical harmonic multiplicities `N(d, k)`, exact and in logs.
//! - [`spectrum`]: Bessel-based eigenvalues with a certified truncation tail.
//! - [`eigenframework`]: effective regularization `kappa`, overfitting factor
//!   `E_0`, bias/variance and effective ranks.
//! - [`regimes`]: bandwidth cases, assumption constants, upper and lower bounds.
//! - [`simulator`]: seeded sphere sampling, Gram solves and empirical risk.
//! - [`cli`]: configs, presets and stable CSV/JSON output behind the binary.
//!
//! ```
//! use krr_sphere::spectrum::{build_spectrum, SpectrumSpec};
//! let spec = SpectrumSpec::new(3, 1.0).unwrap();
//! let sys = build_spectrum(&spec, 100, 1e-10).unwrap();
//! assert!((sys.trace_partial + sys.tail_bound - 1.0).abs() < 1e-8);
//! ```

pub mod cli;
pub mod eigenframework;
pub mod error;
pub mod harmonics;
pub mod regimes;
pub mod simulator;
pub mod spectrum;

pub use error::{Error, Result};
