//! Boundary-element solver for time-harmonic scattering by composite
//! piecewise-homogeneous dielectrics, including geometries with junctions.
//!
//! Units: lengths in metres. Magnetic traces are stored scaled by the
//! free-space impedance, so all impedances below are relative to it.

pub mod fields;
pub mod formulations;
pub mod geometry;
pub mod krylov;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod spaces;

pub use num_complex::Complex64 as C64;
pub type Point = glam::DVec3;
