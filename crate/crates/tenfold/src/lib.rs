//! Classification of symmetry-compatible quadratic fermion Hamiltonians
//! into tenfold-way symmetric-space families.

pub mod error;
pub mod matkit;
pub mod grouprep;
pub mod nambu;
pub mod presets;
pub mod transfer;
pub mod classify;
pub mod ensemble;
pub mod pipeline;
pub mod pool;
pub mod spec;

pub use error::{Error, Result};
