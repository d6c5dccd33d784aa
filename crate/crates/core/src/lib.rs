//! Learning port-Hamiltonian dynamics with structured Gaussian processes and turning the
//! learned model into a passivity-based tracking controller.
//!
//! The crate is `no_std` (it needs `alloc`). Times are milliseconds throughout.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod control;
pub mod error;
pub mod filter;
pub mod gp;
pub mod integrate;
pub mod linalg;
pub mod math;
pub mod microactuator;
pub mod optim;
pub mod phs;
pub mod spline;
pub mod trajectory;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
