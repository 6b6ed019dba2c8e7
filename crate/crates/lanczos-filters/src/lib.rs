//! Krylov-subspace regularization for discrete ill-posed problems.
//!
//! This crate implements conjugate gradients on the normal equations (CGNE,
//! the LSQR-equivalent iteration) and CG applied to the Tikhonov-shifted
//! normal equations (CGT), both driven by one Golub-Kahan bidiagonalization
//! of the operator and the noisy data. On top of the solvers it provides
//! the algebra that connects them:
//!
//! * explicit inverse entries of the projected symmetric tridiagonal via
//!   forward/backward determinant recurrences ([`tridiag`]);
//! * shift increments `g(c)`, `h(c)` expressing the recurrences of
//!   `T + cI` as monic-polynomial corrections of those of `T`;
//! * damping factors ("Lanczos filters") `gamma_i(c)` with
//!   `omega_i(c) = gamma_i(c) omega_i(0)`, expressing every CGT iterate as
//!   a per-coefficient filtering of the CGNE iterate ([`filters`]);
//! * residual identities and a representation of the data-space residual in
//!   the left bidiagonalization basis;
//! * classical direct regularization (TSVD, Tikhonov through the SVD) as
//!   oracles, and the shaw/gravity test problems ([`problems`]).
//!
//! # Quick start
//!
//! ```
//! use lanczos_filters::bidiag::{GkbState, Reorth};
//! use lanczos_filters::filters::lanczos_filters_ratio;
//! use lanczos_filters::problems::{add_noise, build_shaw};
//! use lanczos_filters::solvers::{cgne_iterate, cgt_iterate};
//!
//! let problem = add_noise(&build_shaw(100).unwrap(), 1e-4, 1).unwrap();
//! let gkb = GkbState::run(&problem.matrix, &problem.y_noisy, 8, Reorth::Full).unwrap();
//! let cg = cgne_iterate(&problem.matrix, &problem.y_noisy, &gkb, 8, Some(&problem.x_true)).unwrap();
//! let t = gkb.to_tridiag(8).unwrap();
//! let cgt = cgt_iterate(&problem.matrix, &problem.y_noisy, &gkb, 8, 1e-4 * t.a_max(), None).unwrap();
//! let gamma = lanczos_filters_ratio(&gkb, 8, 1e-4 * t.a_max()).unwrap();
//! for i in 0..8 {
//!     assert!((cgt.omega[i] - gamma.gamma[i] * cg.omega[i]).abs() <= 1e-10 * cg.omega[i].abs());
//! }
//! ```
//!
//! The runnable studies live in `examples/`; `cargo run --bin lfl` exposes
//! them as a small command-line harness.

pub mod bidiag;
mod error;
pub mod filters;
pub mod harness;
pub mod io;
pub mod problems;
pub mod signedlog;
pub mod solvers;
pub mod tridiag;

pub use error::{Error, Result};
