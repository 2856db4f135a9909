//! Finite-lattice fields, integer boxes, summed-area tables, union volumes and norms.

mod field;
pub mod io;
mod prefix;
mod rect;
mod union;

pub use field::{lp_norm, ScalarField};
pub use prefix::{build_prefix_sum, rect_sum, PrefixSumTable};
pub(crate) use prefix::{row_major_strides, MAX_DIM};
pub use rect::{Cells, Dim, Rect};
pub use union::{overlap_volume, union_volume, CompressedGrid};
