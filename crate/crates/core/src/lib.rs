//! Exact Brascamp–Lieb constants on finitely generated abelian groups, their
//! duals, euclidean spaces, and finite groups.

pub mod abelian;
pub mod error;
pub mod exact;
pub mod intmat;

pub use error::{BlError, Result};
pub mod rankcheck;
pub mod rational;
pub mod discrete;
pub mod compact;
pub mod duality;
pub mod euclid;
pub mod finite;
pub mod io;
