//! The user guide, embedded chapter by chapter from `book/src` so that
//! every code sample in the rendered book compiles and runs as a
//! documentation test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lattice.md")]
pub mod lattice_geometry {}

#[doc = include_str!("../../../book/src/operators.md")]
pub mod graded_operators {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral_calculus {}

#[doc = include_str!("../../../book/src/smoothing.md")]
pub mod smoothed_windows {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics_and_light_cones {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments_and_cli {}
