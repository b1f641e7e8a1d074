//! Shared fixtures for the benchmarks.

use fcl_core::{load_metric, sample_points, BasePoint, MetricField};

pub const FUNK3: &str = "funk(3)";
pub const RANDERS3: &str = "randers(3) { 1, 0, 0; 0, 1, 0; 0, 0, 1; 0.1*x[2], -0.1*x[1], 0.1*x[1]*x[2] }";

/// A compiled metric and `count` seeded sample points.
pub fn fixture(src: &str, count: usize) -> (MetricField, Vec<BasePoint>) {
    let m = load_metric(src).expect("benchmark metrics parse");
    let pts = sample_points(&m, m.default_domain(), count, 1).expect("benchmark domains are non-empty");
    (m, pts)
}
