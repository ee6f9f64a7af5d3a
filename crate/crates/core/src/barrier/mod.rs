//! Mollified distance functions, smoothed intersections, excision and the
//! volume-minimising Plateau loop.

pub mod curvature;
pub mod mollify;
pub mod plateau;
pub mod smooth;

pub use curvature::{level_set_curvature, shape_from_derivatives, CurvatureMatrixSet, LevelShape};
pub use mollify::{mollify, mollify_at, Mollifier};
pub use plateau::{
    classify_all, classify_boundary_point, excise, excision_chart, fit_curvature, hausdorff_to_cap, section_measure, solve_plateau,
    target_curvature, volume, BarrierState, Classification, ClassifyOptions, Excision, ExcisionOptions, ExcisionRecord, FrozenKind,
    FrozenSet, IterationLog, PlateauOptions, PlateauRun, RunStatus, Tag, TagCounts,
};
pub use smooth::{smooth_intersection, smoothing_window, SmoothOptions, SmoothReport, SmoothedIntersection};
