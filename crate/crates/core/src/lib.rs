pub mod bounds;
pub mod cli;
pub mod error;
pub mod minimize;
pub mod oracle;
pub mod qsim;
pub mod report;
pub mod rootfind;
pub mod tangent_family;
pub mod verify;

pub use error::{Error, Result};
