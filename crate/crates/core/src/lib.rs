//! Kernel for the contextual modal type theory Cocon, its translations into
//! an internal modal type theory and a Fitch-style system, and a small
//! finite-presheaf calculator.

pub mod check;
pub mod fitch;
pub mod gen;
pub mod itt;
pub mod laws;
pub mod pipeline;
pub mod presheaf;
pub mod surface;
pub mod syntax;
pub mod translate;

pub use syntax::*;
