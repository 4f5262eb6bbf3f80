//! Linear algebra over F_p and Q_p with non-archimedean norms, magic
//! witnesses, unitary dilations and the supporting analysis tools.

pub mod analysis;
pub mod census;
pub mod cli;
pub mod dilation;
pub mod error;
pub mod fields;
pub mod io;
pub mod linalg;
pub mod magic;

pub use error::{Error, Result};
pub use fields::{Cancellation, FieldDescriptor, FieldKind, Scalar};
pub use linalg::{Matrix, Vector};
pub use magic::MagicWitness;
