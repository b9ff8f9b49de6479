//! Exact finite-field models of toy shtukas.
//!
//! The crate is layered bottom-up: [`gf`] provides the field tower,
//! [`linalg`] canonical subspaces and Grassmannians, [`toysht`] the point
//! predicates and partial Frobeniuses, [`charts`] the Artin–Schreier charts
//! and power-series multiplicity probes, [`divisors`] the horospherical
//! coefficient calculus and [`tate`] the finite model of Fourier analysis on
//! a Tate space.

pub mod charts;
pub mod divisors;
pub mod gf;
pub mod linalg;
pub mod padic;
pub mod tate;
pub mod toysht;

pub use gf::{Elem, Field, FieldError};
pub use linalg::{Budget, LinalgError, Matrix, Scalars, Subspace};
pub use padic::PAdicRational;
