//! Compact convex bodies of ℝ² and ℝ³ and the operations on them.

pub mod body;
pub mod chart;
pub mod clip;
pub mod hausdorff;
pub mod hull;
pub mod lgp;
pub mod normals;

pub use body::{convex_hull, unit_cube, ConvexBody, Degeneracy, Facet};
pub use chart::{extract_graph_chart, ChartOptions, ChartReport, GraphChart};
pub use clip::{intersection, Plane};
pub use hausdorff::{hausdorff_distance, hausdorff_distance_with, CompactSet, HausdorffConvention};
pub use hull::Hull;
pub use lgp::{has_local_geodesic_property, local_geodesic_report, LgpOptions, LgpReport};
pub use normals::{supporting_normals, DirectionKind, DirectionSet};
