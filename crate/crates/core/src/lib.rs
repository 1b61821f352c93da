//! Metric and topological analysis of links of real and complex polynomial
//! zero sets: inner metrics on embedded complexes, Lipschitz normal embedding
//! constants, simplicial homology over Z2 and Z, loop transfer between
//! Hausdorff-close complexes, choking-cycle probes and multiplicity estimates,
//! aggregated into a per-germ smoothness verdict.

pub mod complex;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod homology;
pub mod lne;
pub mod pipeline;
pub mod poly;
pub mod sampler;
pub mod transfer;

pub use complex::{EmbeddedComplex, GeodesicPath, LoopPath};
pub use error::Error;
pub use geometry::PointCloud;
pub use homology::{BettiVector, ChainComplex, CycleClass, Ring};
pub use lne::{LlneProfile, LneReport};
pub use pipeline::{ChokeProbe, MultiplicityReport, SmoothnessReport};
pub use poly::{FieldTag, PolynomialSystem};
pub use sampler::{LinkSample, TangentConeModel};
pub use transfer::{SystoleEstimate, TransferCertificate};

/// Absolute tolerance for metric comparisons (edge weights, norms).
pub const METRIC_TOL: f64 = 1e-9;
/// Duplicate-vertex detection tolerance.
pub const DUP_TOL: f64 = 1e-12;
/// Newton convergence tolerance on normalized residuals.
pub const RESIDUAL_TOL: f64 = 1e-10;
