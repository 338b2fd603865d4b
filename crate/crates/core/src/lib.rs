//! Mann iteration of `k`-strict pseudocontractions in 2-uniformly smooth
//! spaces, with sampled geometry checks and certified rates of asymptotic
//! regularity.
//!
//! The crate is organised bottom-up:
//!
//! * [`spaces`]: `ℓ₂ⁿ` and `ℓ_pⁿ` (`p ≥ 2`) with norms, duality maps and
//!   declared geometry constants.
//! * [`moduli`]: sampled `ρ_E`, `δ_E`, `β*_E`, the inequality
//!   `‖x+y‖² ≤ ‖x‖² + 2j(x)(y) + d‖y‖²`, and the explicit constant `d_c`.
//! * [`operators`]: strict pseudocontractions with known fixed points and
//!   their averaged maps `T_t`.
//! * [`iteration`]: the Mann engine, the step reparameterization
//!   `t'_n = t_n·d/(1−k)` and the equivalence check between both runs.
//! * [`rates`]: step schedules, exact rates of divergence `θ`, the rates
//!   `h1`–`h4` and their empirical certification.
//! * [`cli`]: JSON-configured experiments writing CSV/JSON artifacts.
//!
//! ```
//! use mann_rates::operators::scaled_negation;
//! use mann_rates::rates::{certify_instance, CertifyOptions, RateVariant, ScheduleKind, StepSchedule};
//! use mann_rates::spaces::{Space, Vector};
//!
//! let line = Space::hilbert(1)?;
//! let t = scaled_negation(2.0, &line)?; // T = −2·id, k = 1/3
//! let steps = StepSchedule::strict(ScheduleKind::Constant { a: 1.0 / 6.0 }, t.k(), line.d())?;
//! let x0 = Vector::new(vec![1.0])?;
//! let run = certify_instance(&t, &x0, &steps, 1000, RateVariant::H4, &[0.5, 0.1], Some(1.0), &CertifyOptions::default())?;
//! assert!(run.certificates.iter().all(|c| c.pass));
//! # Ok::<(), mann_rates::Error>(())
//! ```

// `!(x <= bound)` is used on purpose so NaN lands on the failing side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod iteration;
pub mod moduli;
pub mod operators;
pub mod rates;
mod rng;
pub mod spaces;
pub mod validation;

pub use error::{Error, Result};
