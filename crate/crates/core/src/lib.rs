//! Numerical Finsler geometry on top of truncated Taylor arithmetic.
//!
//! A metric is given by its F² in a small text language ([`dsl`]), compiled
//! into a [`MetricField`], and examined one base point at a time through a
//! [`Geometry`]: every tensor there is a jet, so all `x`- and
//! `y`-derivatives are exact up to round-off.

pub mod classify;
pub mod covariant;
pub mod curvature;
pub mod dsl;
pub mod error;
pub mod fd;
pub mod fields;
pub mod geodesic;
pub mod identities;
pub mod jet;
pub mod metric;
pub mod point;
pub mod sampler;
pub mod tensor;

pub use classify::{ClassificationRecord, GibFit, Predicate, SurfaceFrame, Tolerances};
pub use curvature::{CurvaturePack, FlagFit, DEFAULT_TOLERANCE};
pub use dsl::{parse_metric, MetricKind, MetricSpec, ParseError};
pub use error::{Error, Result};
pub use fields::{Geometry, PointFrame};
pub use geodesic::{GeodesicDiagnostics, GeodesicPath};
pub use identities::{Identity, IdentityReport, Suite, Verdict};
pub use jet::{Jet, MultiIndex, DEFAULT_ORDER};
pub use metric::{compile_metric, load_metric, Domain, MetricField};
pub use point::BasePoint;
pub use sampler::sample_points;
pub use tensor::{JetTensor, TensorValue, Variance};
