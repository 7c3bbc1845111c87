//! Validation of a binary classifier against a panel of human annotators
//! when no perfect gold standard exists.
//!
//! The crate covers the whole pipeline:
//!
//! - [`data`]: label schemes, annotation panels, prediction and pet files.
//! - [`consensus`]: majority-vote reference labels, exact match, Fleiss' kappa,
//!   per-rater match rates and the qualification gate.
//! - [`metrics`]: 2×2 contingency tables and the eight-metric suite.
//! - [`resample`]: seeded, order-independent bootstrap and sample-size simulation.
//! - [`latent`]: the conditional-independence latent-class model fit by EM.
//! - [`calibration`]: Brier score, concordance, logistic recalibration and
//!   bootstrap bias-corrected calibration curves.
//! - [`sim`]: synthetic panels and probability series with known truth.
//! - [`report`]: the serialized report document.

pub mod calibration;
pub mod consensus;
pub mod data;
pub mod datasets;
mod error;
pub mod latent;
pub mod metrics;
pub mod report;
pub mod resample;
pub mod sim;

pub use error::{Error, Result};

pub use calibration::{CalibrationReport, ProbabilitySeries, RecalibrationFit};
pub use consensus::{AgreementReport, ReferenceLabeling};
pub use data::{AnnotationTable, Label, LabelScheme, LifeStage, PetRecord, PredictionRecord};
pub use latent::{EmTrace, LatentClassModel, VotePatternTable};
pub use metrics::{ContingencyTable, Metric, MetricSuite};
pub use resample::{BootstrapSpec, IntervalEstimate};
