//! Wreath recursions, nuclei, twisting and curve pullback for quadratic
//! Thurston maps with four postcritical points.

pub mod cli;
pub mod curves;
pub mod moduli;
pub mod nucleus;
pub mod portraits;
pub mod twist;
pub mod word;
pub mod wreath;

pub use word::{cyclic_decompose, Family, Letter, Pattern, Word};
pub use wreath::{GenRecursion, WreathRecursion};
