//! Exact tree algebra for Thompson's groups F and T, tree tensor networks built from a
//! planar perfect isometry, their correlation functions, and a trivalent diagram calculus.

pub mod correlators;
pub mod diffapprox;
pub mod dyadic;
pub mod error;
pub mod forest;
pub mod semicont;
pub mod tensorlab;
pub mod thompson;
pub mod trivalent;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
