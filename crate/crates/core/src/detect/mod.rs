//! Symmetry detection: lattice, rotation centers, mirror and glide axes,
//! group classification, and cell extraction.

pub mod classify;
pub mod color;
pub mod extract;
pub mod lattice;
pub mod mismatch;
pub mod overlay;
pub mod search;

pub use classify::{classify, classify_with, ClassifyOptions, SymmetrySignature};
pub use color::color_permutation_check;
pub use extract::{extract_fundamental_domain, extract_unit_cell, regenerate, Frame};
pub use lattice::detect_lattice;
pub use mismatch::{isometry_mismatch, pattern_difference, Evaluator, DEFAULT_THETA};
pub use overlay::annotate;
pub use search::{find_glide_axes, find_reflection_axes, find_rotation_centers, AxisHit, CenterHit, GlideHit};
