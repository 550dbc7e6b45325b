//! Depth metrics with median scaling, scale-aligned snippet ATE and the
//! mean-odometry baseline.

mod depth;
mod odometry;
mod trajectory;

pub use depth::{
    depth_metrics, depth_metrics_set, format_depth_report, format_depth_table, median, median_scale,
    DepthEvalOptions, DepthMetrics, ScaleMode, METRIC_NAMES, REFERENCE_ROW,
};
pub use odometry::{
    evaluate_snippets, mean_odometry_baseline, side_rotation_magnitude, snippet_ate, split_snippets, AteResult,
    AteSummary,
};
pub use trajectory::{format_trajectory, load_trajectory, parse_trajectory, save_trajectory, Trajectory};
