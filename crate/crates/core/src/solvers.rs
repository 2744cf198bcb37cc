//! Numerical solvers: Lanczos ground states, the Chebyshev short-time
//! propagator, and the outer nonlinear evolution loop.

pub mod chebyshev;
pub mod evolve;
pub mod lanczos;

pub(crate) mod tridiag;
