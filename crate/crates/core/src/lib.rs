//! Matrix-free many-body dynamics of a spin-1/2 "closed universe": a single
//! measured spin coupled to a small ferromagnetic measurement apparatus which
//! is itself embedded in a random spin-glass environment.
//!
//! The crate provides
//!
//! * a bitmask computational basis and matrix-free spin operator kernels
//!   ([`hilbert`]),
//! * construction and application of the full model Hamiltonian, including
//!   the mean-field nonlinear self-interaction of the apparatus
//!   magnetization ([`model`]),
//! * a Lanczos ground-state solver, a Chebyshev propagator, and the outer
//!   nonlinear time-evolution loop ([`solvers`]),
//! * trajectory observables ([`observables`]), and
//! * measurement experiments: initial-state preparation, collapse
//!   classification and Born-rule ensemble statistics ([`experiment`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! enables standard-library float intrinsics and the optional `parallel`
//! feature enables rayon-parallel kernels. All floating-point reductions use
//! a fixed chunked summation tree, so results are bit-identical no matter
//! how many threads are used.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod experiment;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod rng;
pub mod solvers;

pub(crate) mod math;

pub use error::{Error, Result};
pub use hilbert::{Axis, Layout, StateVector, Subsystem, C64};
pub use model::{build_couplings, CouplingSet, FieldValue, ModelConfig};
pub use solvers::chebyshev::ChebyshevConfig;
pub use solvers::evolve::{evolve, FieldUpdate, TrajectoryConfig, TrajectoryRecord};
pub use solvers::lanczos::{lanczos_ground_state, LanczosConfig};
