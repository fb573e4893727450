pub mod dual;
pub mod error;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod thermo;
pub mod thermo_limit;
pub mod witness;

pub use error::{Error, Result};
