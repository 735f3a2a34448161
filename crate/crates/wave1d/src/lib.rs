//! Explicit finite-volume solver for the 1-D semilinear wave equation
//! `u_tt - u_xx = f(u, u_t, u_x)` with first-order absorbing boundary
//! conditions, plus Schwarz waveform relaxation (SWR) drivers:
//!
//! * a nonoverlapping waveform-relaxation iteration that exchanges
//!   characteristic transmission data (linear or nonlinear) between
//!   subdomains over the whole time window, and
//! * the classical overlapping variant with Dirichlet exchange.
//!
//! The crate also carries the discrete energy diagnostics used to study the
//! iteration (energy lower bound under the CFL condition, the
//! summation-by-parts energy identity, and the interface remainder terms).
//!
//! Modules:
//! * [`model`] - meshes, subdomain layouts, nonlinearities, transmission
//!   conditions, initial data.
//! * [`fd`] - the finite-difference stencils used everywhere else.
//! * [`solver`] - the explicit time-stepping engine for one (sub)domain.
//! * [`swr`] - iteration drivers, residuals, error metrics.
//! * [`energy`] - discrete energies and identities.
//! * [`config`], [`experiments`], [`output`] - the experiment harness
//!   behind the `wave1d` binary.

// stencil code reads clearest with explicit node indices
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod energy;
pub mod experiments;
pub mod fd;
pub mod model;
pub mod output;
pub mod solver;
pub mod swr;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("CFL condition violated: dt={dt}, dx={dx}, margin={margin}")]
    CflViolation { dt: f64, dx: f64, margin: f64 },

    #[error("solution blew up at node j={j}, time level n={n}{}",
            .subdomain.map(|i| format!(" (subdomain {i})")).unwrap_or_default())]
    BlowUp {
        subdomain: Option<usize>,
        j: usize,
        n: usize,
    },

    #[error("iteration did not converge within {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
