//! Three-level analysis of gait recorded under different occlusal
//! conditions.
//!
//! * Level 1 ([`level1`]): a weighted composite score per stride and its
//!   per-condition, per-session summaries.
//! * Level 2 ([`level2`]): descriptive dispersion of state-space trajectories.
//! * Level 3 ([`embedding`]): a graph-based nonlinear embedding of the
//!   nine-dimensional state vectors.
//!
//! [`dissociation`] ties Level 1 and Level 3 together: it looks for
//! conditions that score alike but sit in different latent regions.
//! [`synth`] generates seeded datasets for testing all of the above.

pub mod dissociation;
pub mod embedding;
pub mod error;
pub mod ingest;
pub mod level1;
pub mod level2;
pub mod preprocess;
pub mod report;
pub mod stats;
pub mod synth;

pub use dissociation::{detect_dissociation, DissociationReport, StabilityReport, Thresholds};
pub use embedding::{embed, EmbedParams, EmbeddingResult, InitMode, OptimizerMode};
pub use error::{Error, Result};
pub use ingest::{
    filter_linear_phases, parse_dataset, ConditionLabel, GaitDataset, GaitObservation, Phase, SessionLabel,
    StateVector, FEATURE_COUNT, FEATURE_NAMES,
};
pub use level1::{delta_percent, gpps, s_meca, ScoreMode, ScoreRecord, ScoreSummary};
pub use level2::{trajectory_dispersion, DispersionStats};
pub use preprocess::{preprocess_pipeline, FeatureMatrix, PreprocessConfig, Preprocessed, RowLabel, ScalerParams};
