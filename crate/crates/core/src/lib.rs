//! Extreme value laws for observables maximized on curves and subspaces.
//!
//! The crate simulates three families of hyperbolic systems (toral
//! automorphisms of the 2-torus, all-to-all coupled expanding circle maps and
//! periodic Lorentz gas billiards), evaluates observables whose extremal set
//! is a line segment or a synchrony subspace, and estimates extremal indices
//! from the resulting time series. Closed-form predictions for the extremal
//! index live in [`theory`]; Monte-Carlo probes of the return structure that
//! determines it live in [`diagnostics`].
//!
//! ```
//! use hypex_core::systems::ToralAutomorphism;
//! use hypex_core::theory::predict_theta_coupled;
//!
//! let cat = ToralAutomorphism::cat_map();
//! assert!((cat.lambda_plus() - 2.618_033_988_7).abs() < 1e-9);
//!
//! let theta = predict_theta_coupled(2, 0.1, 3.0, None).unwrap();
//! assert!((theta.value - (1.0 - 1.0 / 2.7)).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evt;
pub mod experiment;
pub mod geometry;
pub mod observables;
pub mod parallel;
pub mod recipes;
pub mod rng;
pub mod systems;
pub mod theory;

pub use error::{Error, Result};
