//! Mean oscillations, Gurov-Reshetnyak and `A_inf` certificates, and
//! rearrangement bounds for functions on a grid carrying an arbitrary
//! (possibly non-doubling) discrete measure.
//!
//! A [`WeightedGrid`] holds one weight `mu(cell) >= 0` and one value
//! `f(cell) >= 0` per cell of a cubic grid. Every analysis is an exhaustive
//! scan over a deterministic cube family ([`EnumerationMode`]) with
//! double-double prefix tables for cube masses and integrals.
//!
//! ```
//! use meanosc_core::{gr_epsilon, EnumerationMode, WeightedGrid};
//!
//! let wg = WeightedGrid::from_1d(vec![1.0; 4], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
//! let gr = gr_epsilon(&wg, &EnumerationMode::All).unwrap();
//! assert_eq!(gr.epsilon, 1.5);
//! ```
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod ainfty;
pub mod covering;
pub mod enumerate;
pub mod error;
pub mod generators;
pub mod grid;
pub mod holder;
pub mod numeric;
pub mod oscillation;
mod prefix;
pub mod rearrangement;
pub mod scan;

pub use ainfty::{
    alpha_profile, level_fraction, roundtrip_epsilon, thm1_forward_params, thm1_reverse_bound,
    verify_thm1_forward, verify_thm1_reverse, AlphaProfile, LevelParams, MarginReport,
};
pub use covering::{build_covering, overlap_constant, CellSet, CoveringResult, CoveringStyle};
pub use enumerate::{cube_count, enumerate_cubes, EnumerationMode};
pub use error::{Error, ErrorKind, Result};
pub use generators::{generate, measured_epsilon, FunctionKind, GenSpec, MeasureKind, Position};
pub use grid::{validate, Cube, Grid, ValidationReport, Violation, WeightedGrid};
pub use holder::{
    optimize_rh_exponent, rh_constant, rh_exponent_bound, thm2_bound, verify_thm2, RhConstant,
    RhOptimum, Thm2Params, Thm2Record, Thm2Report, Thm2Verifier,
};
pub use oscillation::{gr_epsilon, mean, oscillation, GrResult, OscStats};
pub use rearrangement::{rearrangement, rearrangement_on, StepFunction};
pub use scan::ScanStrategy;
