//! Independent oracles used by the test suites of the slate workspace.
//!
//! Everything in this crate is deliberately written from first principles
//! (naive enumeration, textbook quadrature, classic special functions) so
//! that it shares no code path with the implementations it is used to
//! check. It is a dev-dependency only and never ships in release builds.

pub mod chi2;
pub mod hermite;
pub mod pl;
pub mod smoothing;
pub mod stats;

pub use chi2::{chi_square_gof, chi_square_pvalue, chi_square_two_sample};
pub use hermite::{gauss_hermite, gaussian_expectation_1d, gaussian_expectation_2d};
pub use pl::{enumerate_slates, pl_slate_prob, softmax, top_k_indices};
pub use smoothing::{normal_cdf, smoothed_value_1d, smoothed_value_2d};
pub use stats::total_variation;
