use std::path::PathBuf;

use gptm_core::Error as ModelError;
use serde_json::{json, Value};

use crate::model::{functional_json, vector_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_MODEL: i32 = 2;
/// A yes/no question answered "no"; the payload carries the certificate.
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_BAD_JSON: i32 = 65;
pub const EXIT_PRODUCT_TOO_LARGE: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    BadJson { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    /// A certificate failed re-verification. Never expected.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn bad_json(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::BadJson { path: path.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::BadJson { .. } => EXIT_BAD_JSON,
            CliError::Model(ModelError::ProductTooLarge { .. }) => EXIT_PRODUCT_TOO_LARGE,
            CliError::Model(_) => EXIT_INVALID_MODEL,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn payload(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Model(e) = self {
            v["invariant"] = json!(invariant_name(e));
            match e {
                ModelError::EffectNotPositive { label, separator } => {
                    v["certificate"] = json!({ "label": label, "separator": functional_json(separator) });
                }
                ModelError::NotNormalized { residual } => {
                    v["certificate"] = json!({ "residual": vector_json(residual) });
                }
                ModelError::ProductTooLarge { size, limit } => {
                    v["size"] = json!(size);
                    v["limit"] = json!(limit);
                }
                _ => {}
            }
        }
        v
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::BadJson { .. } => "bad_json",
            CliError::Model(ModelError::ProductTooLarge { .. }) => "product_too_large",
            CliError::Model(_) => "invalid_model",
            CliError::Internal(_) => "internal",
        }
    }
}

pub fn invariant_name(e: &ModelError) -> &'static str {
    match e {
        ModelError::DimensionMismatch { .. } => "DimensionMismatch",
        ModelError::ZeroGenerator(_) => "ZeroGenerator",
        ModelError::NotGenerating { .. } => "NotGenerating",
        ModelError::NotProper => "NotProper",
        ModelError::NotOrderUnit { .. } => "NotOrderUnit",
        ModelError::UnsupportedKind(_) => "UnsupportedKind",
        ModelError::NotClassical => "NotClassical",
        ModelError::MalformedProblem(_) => "MalformedProblem",
        ModelError::EffectNotPositive { .. } => "EffectNotPositive",
        ModelError::NotNormalized { .. } => "NotNormalized",
        ModelError::DuplicateLabel(_) => "DuplicateLabel",
        ModelError::NoOutcomes => "NoOutcomes",
        ModelError::BadDistribution(_) => "BadDistribution",
        ModelError::WeightOutOfRange => "WeightOutOfRange",
        ModelError::SpaceMismatch => "SpaceMismatch",
        ModelError::LabelMismatch(_) => "LabelMismatch",
        ModelError::NotStochastic(_) => "NotStochastic",
        ModelError::NotAPartition(_) => "NotAPartition",
        ModelError::EmptyList => "EmptyList",
        ModelError::NotAnEnsemble(_) => "NotAnEnsemble",
        ModelError::ProductTooLarge { .. } => "ProductTooLarge",
        ModelError::NotAState(_) => "NotAState",
        ModelError::BadExperiment(_) => "BadExperiment",
        ModelError::ParameterMismatch => "ParameterMismatch",
    }
}
