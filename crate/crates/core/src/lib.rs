pub mod beam;
pub mod cli;
pub mod coupling;
pub mod dynamics;
pub mod observables;
pub mod error;
pub mod numerics;
pub mod structure;

pub use error::{Error, Result};
