//! Exact-arithmetic circuit walks on polyhedra `{x : Ax = b, x ≥ 0}`.

pub mod circuits;
pub mod error;
pub mod format;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod polyhedron;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
