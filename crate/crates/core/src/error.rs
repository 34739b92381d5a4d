use thiserror::Error;

use crate::compare::CompareError;
use crate::corpus::CorpusError;
use crate::credit::CreditError;
use crate::impact::ImpactError;
use crate::normalization::NormalizationError;
use crate::ranking::RankingError;
use crate::report::ReportError;
use crate::synth::SynthError;

/// Any failure of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Normalization(#[from] NormalizationError),
    #[error(transparent)]
    Credit(#[from] CreditError),
    #[error(transparent)]
    Impact(#[from] ImpactError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Corpus(e) => match e {
                CorpusError::Io { .. } => "io",
                CorpusError::Csv { .. } | CorpusError::Schema { .. } => "schema",
                CorpusError::DuplicateKey { .. } => "duplicate-key",
                CorpusError::Byline { .. } => "byline",
                CorpusError::Config(_) => "config",
                CorpusError::WindowOrder { .. } => "window-order",
            },
            Error::Normalization(NormalizationError::File(_)) => "schema",
            Error::Normalization(_) => "baseline-undefined",
            Error::Credit(_) => "empty-byline",
            Error::Impact(e) => match e {
                ImpactError::MissingWeights { .. } => "missing-weights",
                ImpactError::Normalization(_) => "baseline-undefined",
                ImpactError::Credit(_) => "empty-byline",
                ImpactError::Corpus(_) => "window-order",
                ImpactError::UnknownProfessor(_) => "unknown-professor",
            },
            Error::Ranking(e) => match e {
                RankingError::EmptyCohort(_) => "empty-cohort",
                RankingError::InvalidScore { .. } => "domain",
                RankingError::DuplicateProfessor(_) => "duplicate-key",
            },
            Error::Compare(e) => match e {
                CompareError::CohortMismatch { .. } => "cohort-mismatch",
                _ => "undefined-correlation",
            },
            Error::Synth(SynthError::Spec(_)) => "spec",
            Error::Synth(SynthError::Corpus(_)) => "schema",
            Error::Report(e) => match e {
                ReportError::Io { .. } => "io",
                _ => "schema",
            },
        }
    }

    /// 2 for computation failures (missing weights or baselines), 1 for
    /// everything about the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Normalization(NormalizationError::File(_)) => 1,
            Error::Normalization(_) | Error::Impact(_) | Error::Credit(_) => 2,
            _ => 1,
        }
    }
}
