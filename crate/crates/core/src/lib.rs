//! Exact and numeric tools for unit-distance colorings of slices
//! `ℝⁿ × [0,ε]ᵏ`.

pub mod coloring;
pub mod geom;
pub mod isbell;
pub mod linalg;
pub mod point;
pub mod rational_slice;
pub mod replayer;
pub mod scalar;
pub mod sphere_constructions;
pub mod stability;
pub mod udg;

pub use point::{ExactPoint, FloatPoint, Point, SliceSpec};
pub use scalar::{Backing, BackingKind, Rational};
