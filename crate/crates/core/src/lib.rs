pub mod canonical;
pub mod constraints;
pub mod dynamics;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod legendre;
pub mod report;
pub mod sampling;
pub mod symbolic;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{Chart, VectorField};
pub use legendre::LagrangianSystem;
