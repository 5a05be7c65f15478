//! Modular frames of Hilbert C*-modules over finite-dimensional C*-algebras
//! `A = M_{k_1} + ... + M_{k_m}`, and closest tight frames in `C^n`.

pub mod algebra;
pub mod error;
pub mod frame;
pub mod invariants;
pub mod io;
pub mod matrix;
pub mod module;
pub mod random;
pub mod resolution;
pub mod tight;

pub use algebra::{AlgebraElement, AlgebraMatrix, AlgebraShape};
pub use error::{Error, Result};
pub use frame::{Frame, FrameReport, Relation};
pub use matrix::{CMatrix, C64};
pub use module::{inner, ModuleOperator, ModuleVector, SubmoduleDescriptor};
pub use resolution::ResolutionSequence;
pub use tight::HilbertFrame;
