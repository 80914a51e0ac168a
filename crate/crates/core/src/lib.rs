//! Limiting eigenvalue distributions of filtered Wigner band matrices.
//!
//! Three independent routes to the same measure:
//!
//! * [`combinat`] and [`moments`]: moments as sums of tree integrals over
//!   Wigner set partitions, and the faster `Φ_n/Ψ_n` generating-function
//!   recursion;
//! * [`colorsolve`]: the color equations for the Stieltjes transform, solved
//!   by fixed-point iteration and inverted to a density;
//! * [`matrixlab`]: Monte Carlo sampling of filtered Wigner matrices and of
//!   the Gaussian colored model, with a Householder/QL eigensolver.
//!
//! [`algebra`] carries out the exact resultant/discriminant algebra that
//! certifies the Stieltjes transform satisfies a polynomial equation.

pub mod algebra;
pub mod cli;
pub mod colorsolve;
pub mod combinat;
pub mod error;
pub mod exact;
pub mod kernel;
pub mod matrixlab;
pub mod moments;
pub mod nice;
pub mod numeric;

pub use error::{Error, Result};
pub use kernel::{kernel_from_filter, validate_kernel, ColorPoint, Filter, Kernel};
