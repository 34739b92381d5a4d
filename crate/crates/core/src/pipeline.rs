//! All stages chained: baselines, scores, rankings and the comparison.

use std::fs;
use std::path::{Path, PathBuf};

use crate::compare::{build_report, ComparisonReport};
use crate::corpus::{BylinePolicy, CohortKind, Corpus};
use crate::impact::{ScoreVariant, Scorer};
use crate::normalization::{build_baselines, BaselineTable};
use crate::report::{
    pair_rankings, rank_scores, score_records, write_comparison, write_ranking, write_scores, CohortRanking, Precision,
    ReportError, ScoreRecord, BASELINES_FILE, SCORES_FILE,
};
use crate::Error;

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineOptions {
    /// Overrides the cohort key of the corpus configuration.
    pub cohort_kind: Option<CohortKind>,
    pub policy_override: Option<BylinePolicy>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub baselines: BaselineTable,
    /// Both variants, ordered by professor then variant.
    pub scores: Vec<ScoreRecord>,
    pub ranking_c: Vec<CohortRanking>,
    pub ranking_wc: Vec<CohortRanking>,
    pub report: ComparisonReport,
}

pub fn ranking_file(variant: ScoreVariant) -> String {
    format!("ranking_{variant}.csv")
}

pub fn score_stage(
    corpus: &Corpus,
    variants: &[ScoreVariant],
    policy_override: Option<BylinePolicy>,
) -> Result<(BaselineTable, Vec<ScoreRecord>), Error> {
    let baselines = build_baselines(corpus);
    let scores = Scorer::new(corpus, &baselines, corpus.weights())
        .with_policy_override(policy_override)
        .score_all(variants)?;
    let records = score_records(corpus, &scores);
    Ok((baselines, records))
}

pub fn run_pipeline(corpus: &Corpus, options: PipelineOptions) -> Result<PipelineOutput, Error> {
    let kind = options.cohort_kind.unwrap_or(corpus.config().cohort_kind);
    let (baselines, scores) = score_stage(corpus, &ScoreVariant::BOTH, options.policy_override)?;
    let ranking_c = rank_scores(&scores, ScoreVariant::C, kind)?;
    let ranking_wc = rank_scores(&scores, ScoreVariant::WC, kind)?;
    let report = build_report(pair_rankings(&ranking_c, &ranking_wc)?)?;
    Ok(PipelineOutput {
        baselines,
        scores,
        ranking_c,
        ranking_wc,
        report,
    })
}

/// Writes the full output tree; returns the paths written in order.
pub fn write_pipeline(dir: &Path, out: &PipelineOutput, precision: Precision) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut written = Vec::new();
    let path = dir.join(BASELINES_FILE);
    out.baselines.write_csv(&path)?;
    written.push(path);
    let path = dir.join(SCORES_FILE);
    write_scores(&path, &out.scores, precision)?;
    written.push(path);
    for (variant, ranking) in [(ScoreVariant::C, &out.ranking_c), (ScoreVariant::WC, &out.ranking_wc)] {
        let path = dir.join(ranking_file(variant));
        write_ranking(&path, ranking, precision)?;
        written.push(path);
    }
    written.extend(write_comparison(dir, &out.report, precision)?);
    Ok(written)
}
