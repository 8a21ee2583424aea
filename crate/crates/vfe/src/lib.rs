//! Vortex filament energetics for the 3D Ginzburg-Landau model near the
//! first critical field.
//!
//! The library is organised around the objects that control the onset of
//! vorticity in a superconducting sample occupying a bounded domain:
//!
//! * [`geometry`]: tubular charts around a candidate filament axis, with the
//!   closed ball as the fully worked analytic sample geometry, plus length
//!   functionals on graph-type curves in chart coordinates.
//! * [`fields`]: the Meissner field of the ball, flux functionals,
//!   Biot-Savart evaluation for polyline filaments, and the domain constant
//!   `C_Omega` extracted from a regularised field energy.
//! * [`isoflux`]: the flux-to-length ratio, its second variation (the
//!   quadratic form `Q`), spectral nondegeneracy checks, and ratio
//!   maximisation over graph curves.
//! * [`renorm`]: the renormalised interaction energy `W_N` of `N` nearly
//!   parallel filaments and its minimisation.
//! * [`critfield`]: the critical-field ladder `H_N` and the matching
//!   energy expansion used to count optimal vortex numbers.
//! * [`profile`]: the radial vortex core profile, the core energy constant
//!   `gamma`, and a renormalised-energy cross-check on perforated disks.
//! * [`cli`]: the config-driven batch front end used by the `vfe` binary.
//!
//! Numerical conventions shared across modules: curves in chart coordinates
//! are piecewise linear on explicit grids, integrals of smooth quantities use
//! fixed-order Gauss panels or the trapezoid rule on the curve grid, and all
//! randomness flows through a seeded ChaCha generator so every run is
//! reproducible bit for bit.

pub mod cli;
pub mod critfield;
pub mod fields;
pub mod geometry;
pub mod isoflux;
mod opt;
pub mod profile;
pub mod quad;
pub mod renorm;

/// Crate-wide error type.
///
/// The split matters for the CLI: validation/argument/domain problems map to
/// exit code 2, solver failures map to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numerical input lies outside the region where a formula is valid.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a structural precondition (sizes, signs, ranges).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A configuration file or override could not be interpreted.
    #[error("validation error: {0}")]
    Validation(String),

    /// An iterative solver exhausted its budget without meeting its tolerance.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// A descent run stalled: the line search failed repeatedly.
    /// Carries the last iterate so callers can inspect or restart.
    #[error("line search stagnated: {message}")]
    Stagnation {
        message: String,
        last: Box<renorm::FilamentFamily>,
    },

    /// Two filaments touch at a grid node; the interaction energy is singular.
    #[error("curves {i} and {j} coincide at grid node {k}")]
    CoincidentNodes { i: usize, j: usize, k: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) | Error::Stagnation { .. } => 3,
            _ => 2,
        }
    }
}

/// Shared worker pool for the embarrassingly parallel quadrature loops.
///
/// Honors `VFE_THREADS` (a positive integer) the first time it is touched;
/// afterwards the pool size is fixed for the life of the process. All
/// parallel reductions in the crate collect per-chunk partial results and
/// combine them in index order, so the thread count never changes output
/// bits.
pub(crate) fn thread_pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(raw) = std::env::var("VFE_THREADS") {
            if let Ok(n) = raw.trim().parse::<usize>() {
                if n >= 1 {
                    builder = builder.num_threads(n);
                }
            }
        }
        builder.build().expect("failed to build worker pool")
    })
}
