//! Exact deformations of associative algebras in convolution categories over
//! cocommutative coalgebra extensions.
//!
//! See the guide in `book/` for conventions and the spec file format.

pub mod coalgebra;
pub mod cohomology;
pub mod convolution;
pub mod deformation;
pub mod error;
pub mod extension;
pub mod format;
pub mod matrix;
pub mod scalar;
pub mod subspace;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/library.md")]
    struct Library;

    #[doc = include_str!("../../../book/src/spec-format.md")]
    struct SpecFormat;
}
