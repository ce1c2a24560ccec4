//! Curvature invariants of space-like surfaces in 4-dimensional neutral space forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature_engine;
pub mod error;
pub mod expr_parser;
pub mod field_analysis;
pub mod jets;
pub mod pseudo_linalg;
pub mod surface_catalog;

pub use error::{Error, Result};
