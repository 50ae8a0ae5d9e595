//! Numerical laboratory for sums of a random completely multiplicative function.
//!
//! `S_N = Σ_{n ≤ N} z(n)` with `z(p)` independent and uniform on the unit
//! circle. The crate provides:
//!
//! - [`sieve`]: smallest-prime-factor sieve, Ω, and the level sets `E_{N,m}`
//! - [`sathe`]: the Φ Euler product and the Sathe–Selberg estimate of `|E_{N,m}|`
//! - [`moments`]: exact `L²`/`L⁴` moments of `S_N` and `S_{N,m}` with brute oracles
//! - [`chaos`]: seeded, parallel Monte Carlo over Steinhaus and Rademacher chaos
//! - [`dirichlet`]: time averages of `Σ n^{−it}`
//! - [`exponent`]: the log-power exponents of the `‖S_N‖_q` lower bounds

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod dirichlet;
pub mod error;
pub mod exponent;
pub mod moments;
pub mod sathe;
pub mod sieve;

pub use chaos::{
    draw_sample, estimate_moment, projection_coeff_check, tail_probability, ChaosSample, Model,
    MomentEstimate, ProjectionReport, SamplerConfig, TailEstimate, DEFAULT_SEED,
};
pub use dirichlet::{DirichletGrid, TimeAverage};
pub use error::{LabError, Result};
pub use exponent::{
    exponent_report, lower_bound_exponent, optimal_y, theorem_constant, ExponentReport,
    TheoremConstant,
};
pub use moments::{
    energy_brute, energy_fast, fourth_moment_homog_brute, fourth_moment_homog_identity,
    helson_upper_bound, l4_asymptotic_fit, projection_beta_l2, ratio_4_2, EnergyResult,
    HelsonBound, HomogeneousMoment, L4Fit, Method,
};
pub use sathe::{
    delta_eps, l2_exponent_y, log_gamma, sathe_predict, PhiEvaluator, PhiValue, SathePrediction,
};
pub use sieve::{CountTable, FactorSieve};
