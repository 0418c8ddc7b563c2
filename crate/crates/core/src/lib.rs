pub mod capacity;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod norms;
pub mod orbits;
pub mod quadrature;
pub mod scenario;
pub mod translated;

pub use error::{Error, Result};
