pub mod bddc;
pub mod bench;
pub mod decomp;
pub mod error;
pub mod ilut;
pub mod krylov;
pub mod linalg;
pub mod mesh;
pub mod sparse_la;
pub mod stokes;
pub mod substructure;

pub use error::{Error, Result};
