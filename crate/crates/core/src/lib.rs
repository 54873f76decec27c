//! Best low-rank approximation of real matrices in the Chebyshev
//! (entrywise max) norm.
//!
//! The building blocks, bottom up:
//!
//! - [`linalg`]: dense matrices, LU with partial pivoting, Householder QR.
//! - [`equidistant`]: the best equidistant point of an `(r+1)×r` system,
//!   by determinants and by the sign/null-vector route.
//! - [`remez`]: Remez exchange for `min_u ‖a - V u‖∞` and the row-separable
//!   fixed-factor problem `min_U ‖A - U V^T‖_C`.
//! - [`alternating`]: alternating minimization over both factors, plus the
//!   alternance check for local optimality.
//! - [`oracle`]: brute-force subset enumeration used to verify the above.
//! - [`synth`]: matrices with prescribed singular values and the benchmark.
//! - [`cli`]: the `cheblr` command line.
//!
//! ```
//! use chebyshev_lowrank::{linalg::Matrix, remez::{remez_solve, RemezOptions}};
//!
//! let v = Matrix::column(&[1.0, 1.0, 1.0]);
//! let out = remez_solve(&v, &[0.0, 1.0, 2.0], &RemezOptions::default()).unwrap();
//! assert!((out.mu - 1.0).abs() < 1e-15);
//! ```

pub mod alternating;
pub mod cli;
pub mod equidistant;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod remez;
pub mod seed;
pub mod synth;

pub use alternating::{alternating_minimize, verify_local_optimality, AlternatingOptions, AlternatingResult};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use remez::{fixed_factor_solve, remez_solve, RemezOptions, RemezOutcome};
