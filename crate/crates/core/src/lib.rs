pub mod code;
pub mod error;
pub mod experiments;
pub mod pauli;
pub mod projection;
pub mod qse;
pub mod sampling;
pub mod sim;

pub use error::{Error, Result};
