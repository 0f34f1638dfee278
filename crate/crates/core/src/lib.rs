//! Exact free probability and factor arithmetic for interpolated free group
//! factors.

pub mod calculus;
pub mod engine;
pub mod nc;
pub mod scalar;
pub mod two_proj;
pub mod verify;
pub mod matrix_model;
