//! Numerical harmonic analysis on uniform grids: the Wiener algebra, the
//! Feichtinger algebra S0, bounded measures, mild distributions, Shannon
//! sampling, translation-invariant systems and kernel operators.
//!
//! Every object lives on a finite uniform [`Grid`]; integrals are Riemann sums
//! and the Fourier transform is an FFT with analytic phase correction.

pub mod bupu;
pub mod corpus;
pub mod error;
pub mod feichtinger;
pub mod fourier;
pub mod grid;
pub mod measures;
pub mod mild;
pub mod numeric;
pub mod sampling;
pub mod systems;
pub mod verify;
pub mod wiener;

pub use error::{Error, Result};
pub use grid::{
    act, integrate, inner, norms, pointwise, sample, sample_named, Action, Axis, Field, Generator,
    Grid, LatticeMatrix, Norms, Pointwise, SampledFunction,
};
pub use measures::BoundedMeasure;
pub use mild::{Component, MildDistribution};
pub use systems::{KernelKind, KernelOperator, Path, Tils};
pub use verify::{run_verify, Report, RunConfig};
