//! Spectral analysis of diffusion generators whose paths jump back into the
//! domain when they hit the boundary.
//!
//! The generator acts as `-Laplace` on functions satisfying the nonlocal
//! boundary condition `u|_boundary = <u>_mu`, where `mu` is the jump
//! distribution. Everything is expressed through the closed-form Dirichlet
//! eigenbasis of the domain and the secular function
//! `m(lambda) = sum_n (1, chi_n) <chi_n>_mu / (lambda_n - lambda)`.

pub mod basis;
pub mod bessel;
pub mod domain;
pub mod enclosure;
pub mod error;
pub mod measure;
pub mod numrange;
pub mod plot;
pub mod quadrature;
pub mod resolvent;
pub mod secular;
pub mod spectrum;
pub mod stochastic;

pub use basis::{build_basis, BasisSet, Mode, ModeLabel, Parity};
pub use domain::{DomainSpec, Point, Shape};
pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Runs two closures, in parallel when the `parallel` feature is on.
pub(crate) fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
