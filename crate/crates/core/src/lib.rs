//! Hierarchical cyber-physical consensus systems: declarative hierarchy
//! model, layer Laplacian assembly, spectral and interlayer-delay
//! stability analysis, and time-domain simulation of the delayed closed
//! loop, with a power-sharing application layer on top.
//!
//! The typical pipeline:
//!
//! ```
//! use hiercon::{delay, dde_sim, hierarchy, powershare, spectral};
//! use std::f64::consts::PI;
//!
//! let spec = powershare::fig1_spec(&[PI / 7.0, PI / 9.0]);
//! let matrices = hierarchy::assemble(&spec).unwrap();
//! let report = spectral::spectral_report(&matrices, None).unwrap();
//! let verdict = delay::stability_verdict(&spec, &report).unwrap();
//! assert_eq!(verdict.verdict, delay::Verdict::Stable);
//!
//! let delays = delay::effective_delays(&spec);
//! let opts = dde_sim::SimOptions { t_end: 30.0, stride: 10, ..Default::default() };
//! let traj = dde_sim::integrate(&matrices, &delays, &powershare::fig1_x0(), &opts).unwrap();
//! assert!(dde_sim::conservation_deviation(&traj, matrices.conservation_weights()) < 1e-6);
//! ```

pub mod dde_sim;
pub mod delay;
pub mod eig;
pub mod expm;
pub mod hierarchy;
pub mod lambert;
pub mod mat;
pub mod powershare;
pub mod random;
pub mod scenario;
pub mod spectral;
