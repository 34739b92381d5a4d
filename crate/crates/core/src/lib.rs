//! Total-impact scoring of researchers and analysis of how the choice of
//! publication-impact indicator shifts their scores, ranks, percentiles and
//! quartiles within research fields.
//!
//! The pipeline runs in stages, one module each:
//!
//! * [`corpus`] loads and validates professors, publications, bylines, the
//!   field taxonomy and the citation/IF weights table.
//! * [`normalization`] builds per-(year, subject category) baselines and
//!   rescales citations and journal impact factors.
//! * [`credit`] splits each publication among its authors.
//! * [`impact`] computes per-publication scores and the yearly total impact
//!   of each professor under the [`ScoreVariant::C`] and [`ScoreVariant::WC`]
//!   indicators.
//! * [`ranking`] ranks professors within cohorts on a 0-100 percentile scale.
//! * [`compare`] quantifies the differences between the two rankings.
//! * [`synth`] generates seeded synthetic corpora.
//! * [`report`] reads and writes the CSV interchange files.
//! * [`pipeline`] chains every stage.

pub mod compare;
pub mod corpus;
pub mod credit;
pub mod error;
pub mod impact;
pub mod normalization;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod synth;

pub use compare::{
    compare_cohort, pearson, quartile_contingency, spearman, uncited_sensitivity, CohortComparison, ComparisonReport,
    DeltaRow, DeltaScore,
};
pub use corpus::{
    citation_window, load_corpus, AcademicRank, Byline, BylineEntry, BylinePolicy, CohortKind, Corpus, CorpusFiles,
    DocType, ObservationConfig, Professor, ProfessorId, PubId, Publication, ScId, SdsId, Taxonomy, UdaId, Weights,
    WeightsTable,
};
pub use credit::{fractional_contributions, CreditVector};
pub use error::Error;
pub use impact::{publication_score, score_corpus, total_impact, ImpactScore, ScoreVariant};
pub use normalization::{build_baselines, normalized_citations, normalized_if, BaselineCell, BaselineTable};
pub use pipeline::{run_pipeline, write_pipeline, PipelineOptions, PipelineOutput};
pub use ranking::{assign_quartiles, rank_cohort, CohortKey, Quartile, RankedCohort, RankedEntry};
pub use report::{Precision, ScoreRecord};
pub use synth::{generate_corpus, SynthSpec};
