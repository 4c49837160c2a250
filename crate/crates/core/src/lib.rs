//! Wallpaper-group ornaments: generation, symmetry detection, and analysis of
//! perceptual survey data.

pub mod detect;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod geometry;
pub mod groups;
pub mod lattice;
pub mod raster;
pub mod survey;

pub use detect::{classify, classify_with, ClassifyOptions, SymmetrySignature};
pub use error::{Error, Result};
pub use generate::{
    apply_color_scheme, generate, generate_with_cosets, overlap_compose, proper_unit_cell, Blend, ColorPermutation,
    ColorScheme, FundamentalDomain, GenerateOptions, Generation, Resampling, UnitCellSpec,
};
pub use geometry::{Isometry2, IsometryKind, Line, Mat2, Point2, Vec2};
pub use groups::{group_generators, orbit, FracOp, GroupName, WallpaperGroup};
pub use lattice::{Lattice, LatticeClass};
pub use raster::{Color, RasterPattern};
