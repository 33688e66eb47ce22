//! kernelab: a laboratory for Gaussian process regression and kernel ridge
//! regression under possibly misspecified Matérn/Wendland correlation
//! functions.
//!
//! The crate provides the stationary kernels and their spectral-decay
//! envelopes, fixed space-filling designs with fill/separation diagnostics,
//! the shared regularized dual predictor, theoretical convergence-rate
//! calculators, and a reproducible Monte-Carlo harness that estimates
//! empirical log-log convergence slopes and compares them to theory.
//!
//! Modules, bottom-up:
//!
//! - [`specfun`]: `K_nu` and the (log-)Beta function.
//! - [`quad`]: adaptive Gauss–Kronrod integration.
//! - [`kernels`]: Matérn and generalized Wendland correlation functions,
//!   spectral densities and envelopes.
//! - [`designs`]: grids, Halton sequences, fill distance, separation radius.
//! - [`regress`]: Gram systems, GP path simulation, the regularized
//!   predictor, conditional variance, power function, schedules.
//! - [`rates`]: theoretical slope/rate formulas, the triangle target,
//!   eigen-decay estimation.
//! - [`harness`]: the experiment engine, report emission, and the
//!   four-row convergence study.

pub mod designs;
pub mod harness;
pub mod kernels;
pub mod quad;
pub mod rates;
pub mod regress;
pub mod specfun;
