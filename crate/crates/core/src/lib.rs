//! Numerics for quasi-periodic CMV and Schrödinger operators sampled along
//! skew-shift orbits on the torus.
//!
//! The building blocks are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmv;
pub mod cocycle;
pub mod error;
pub mod green;
pub mod io;
pub mod linalg;
pub mod montecarlo;
pub mod sampling;
pub mod scalar;
pub mod schrodinger;
pub mod spectral;
pub mod stats;
pub mod torus;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type TorusPoint64 = torus::TorusPoint<f64>;
pub type SkewShiftMap64 = torus::SkewShiftMap<f64>;
pub type SamplingFunction64 = sampling::SamplingFunction<f64>;
pub type VerblunskyPath64 = sampling::VerblunskyPath<f64>;
pub type TrigPolynomial64 = sampling::TrigPolynomial<f64>;
pub type FiniteCmv64 = cmv::FiniteCmv<f64>;
pub type PotentialSpec64 = schrodinger::PotentialSpec<f64>;
pub type SchrodingerFiniteOp64 = schrodinger::SchrodingerFiniteOp<f64>;
