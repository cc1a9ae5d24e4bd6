//! Numerical toolkit around the topological degree of boundary maps on
//! domains in C^N: degree certificates from signed zero counts, winding
//! numbers along complex-line slices, holomorphic extendibility tests for
//! mixed-polynomial boundary data, and construction of holomorphic
//! polynomial completions that certify non-extendability by forcing a
//! negative degree.

pub mod degree;
pub mod domains;
pub mod error;
pub mod extension;
pub mod mixed;
pub mod params;
pub mod verify;
pub mod winding;
pub mod witness;

pub use error::{Error, Result};
pub use params::Params;
