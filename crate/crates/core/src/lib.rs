//! Provenance toolkit for AI-generated source code.
//!
//! The numeric core is generic over [`Scalar`]; [`Exact`] (rational) gives
//! platform-stable threshold decisions, `f64` is the fast default.

pub mod analytics;
pub mod cascade;
pub mod corpus;
pub mod detectors;
pub mod diagnostics;
pub mod eval;
pub mod lexical;
pub mod model;
pub mod scalar;

pub use cascade::{classify, classify_batch, threshold_sweep, DecisionPath, EnsembleConfig, Mode, Verdict};
pub use diagnostics::Diagnostic;
pub use eval::{metrics, ConfusionCounts, Metric, MetricsReport};
pub use model::SCHEMA_VERSION;
pub use scalar::{parse_decimal, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i128>;

pub type ExactConfig = EnsembleConfig<Exact>;
pub type ExactVerdict = Verdict<Exact>;
pub type ExactMetricsReport = MetricsReport<Exact>;
pub type F64Config = EnsembleConfig<f64>;
pub type F64Verdict = Verdict<f64>;
pub type F64MetricsReport = MetricsReport<f64>;
