//! CSV interchange: scores, rankings and the comparison outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compare::{CohortInput, ComparisonReport, DeltaScore, Dispersion};
use crate::corpus::{AcademicRank, CohortKind, Corpus, ProfessorId, SdsId, UdaId};
use crate::impact::{ImpactScore, ScoreVariant};
use crate::ranking::{rank_cohort, CohortKey, RankedCohort, RankedEntry};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed CSV in {file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("{file} line {line}: {message}")]
    Schema { file: String, line: usize, message: String },
}

/// Number rendering for output files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Precision {
    /// Scores 3 d.p., percentiles and percentages 1 d.p., correlations 3 d.p.
    #[default]
    Table,
    /// Shortest representation that round-trips.
    Full,
}

impl Precision {
    fn fixed(self, x: f64, digits: usize) -> String {
        match self {
            Self::Table => format!("{x:.digits$}"),
            Self::Full => format!("{x}"),
        }
    }

    pub fn score(self, x: f64) -> String {
        self.fixed(x, 3)
    }

    pub fn percentile(self, x: f64) -> String {
        self.fixed(x, 1)
    }

    pub fn percent(self, x: f64) -> String {
        self.fixed(x, 1)
    }

    pub fn correlation(self, x: f64) -> String {
        self.fixed(x, 3)
    }

    /// `"24.3"`, `"∞"` or `"n.a."`.
    pub fn delta_score(self, d: DeltaScore) -> String {
        match d {
            DeltaScore::Finite(v) => self.percent(v),
            DeltaScore::Infinite => "∞".into(),
            DeltaScore::NotApplicable => "n.a.".into(),
        }
    }

    fn opt_correlation(self, x: Option<f64>) -> String {
        x.map(|v| self.correlation(v)).unwrap_or_else(|| "n.a.".into())
    }
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    csv::Writer::from_path(path).map_err(|source| ReportError::Csv {
        file: file_label(path),
        source,
    })
}

fn write_all<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    let csv_err = |source| ReportError::Csv {
        file: file_label(path),
        source,
    };
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes a header-only file when `rows` is empty.
fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    let csv_err = |source| ReportError::Csv {
        file: file_label(path),
        source,
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_all<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ReportError> {
    let file = fs::File::open(path).map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })?;
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| ReportError::Csv {
            file: file_label(path),
            source,
        })
}

fn schema(path: &Path, index: usize, message: impl Into<String>) -> ReportError {
    ReportError::Schema {
        file: file_label(path),
        line: index + 2,
        message: message.into(),
    }
}

/// A total-impact score with the professor's field attributes, so later
/// stages can run from the scores file alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub professor_id: ProfessorId,
    pub variant: ScoreVariant,
    pub value: f64,
    pub n_publications: usize,
    pub t: u32,
    pub sds_id: SdsId,
    pub uda_id: UdaId,
    pub academic_rank: Option<AcademicRank>,
}

/// Joins scores with the corpus' professor attributes.
pub fn score_records(corpus: &Corpus, scores: &[ImpactScore]) -> Vec<ScoreRecord> {
    scores
        .iter()
        .filter_map(|s| {
            let p = corpus.professor(&s.professor_id)?;
            Some(ScoreRecord {
                professor_id: s.professor_id.clone(),
                variant: s.variant,
                value: s.value,
                n_publications: s.n_publications,
                t: s.t,
                sds_id: p.sds_id.clone(),
                uda_id: p.uda_id.clone(),
                academic_rank: Some(p.academic_rank),
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRow {
    professor_id: String,
    variant: String,
    value: String,
    n_publications: usize,
    t: u32,
    sds_id: String,
    uda_id: Option<String>,
    academic_rank: Option<String>,
}

pub const SCORES_FILE: &str = "scores.csv";
pub const BASELINES_FILE: &str = "baselines.csv";
pub const RANKING_FILE: &str = "ranking.csv";

pub fn write_scores(path: &Path, records: &[ScoreRecord], precision: Precision) -> Result<(), ReportError> {
    write_all(
        path,
        records.iter().map(|r| ScoreRow {
            professor_id: r.professor_id.0.clone(),
            variant: r.variant.to_string(),
            value: precision.score(r.value),
            n_publications: r.n_publications,
            t: r.t,
            sds_id: r.sds_id.0.clone(),
            uda_id: Some(r.uda_id.0.clone()),
            academic_rank: r.academic_rank.map(|a| a.to_string()),
        }),
    )
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>, ReportError> {
    read_all::<ScoreRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let value: f64 = row
                .value
                .parse()
                .map_err(|_| schema(path, i, format!("value `{}` is not a number", row.value)))?;
            Ok(ScoreRecord {
                professor_id: ProfessorId(row.professor_id),
                variant: row.variant.parse().map_err(|e: String| schema(path, i, e))?,
                value,
                n_publications: row.n_publications,
                t: row.t,
                sds_id: SdsId(row.sds_id),
                uda_id: UdaId(row.uda_id.unwrap_or_default()),
                academic_rank: row
                    .academic_rank
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|e: String| schema(path, i, e)))
                    .transpose()?,
            })
        })
        .collect()
}

/// A ranked cohort with the per-professor facts the comparison needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortRanking {
    pub ranked: RankedCohort,
    pub uda_id: UdaId,
    pub n_publications: BTreeMap<ProfessorId, usize>,
}

/// Groups the `variant` records into cohorts and ranks each one.
///
/// Cohorts come out sorted by key. A professor without an academic rank
/// cannot be placed when cohorts are split by rank.
pub fn rank_scores(
    records: &[ScoreRecord],
    variant: ScoreVariant,
    kind: CohortKind,
) -> Result<Vec<CohortRanking>, crate::Error> {
    struct Group {
        uda: UdaId,
        scores: Vec<(ProfessorId, f64)>,
        pubs: BTreeMap<ProfessorId, usize>,
    }
    let mut groups: BTreeMap<CohortKey, Group> = BTreeMap::new();
    for r in records.iter().filter(|r| r.variant == variant) {
        let key = match kind {
            CohortKind::Sds => CohortKey::sds(r.sds_id.clone()),
            CohortKind::SdsAndRank => {
                let rank = r.academic_rank.ok_or_else(|| ReportError::Schema {
                    file: SCORES_FILE.into(),
                    line: 0,
                    message: format!("professor `{}` has no academic rank", r.professor_id),
                })?;
                CohortKey::from_parts(&r.sds_id, rank, kind)
            }
        };
        let g = groups.entry(key).or_insert_with(|| Group {
            uda: r.uda_id.clone(),
            scores: Vec::new(),
            pubs: BTreeMap::new(),
        });
        g.scores.push((r.professor_id.clone(), r.value));
        g.pubs.insert(r.professor_id.clone(), r.n_publications);
    }
    groups
        .into_iter()
        .map(|(key, g)| {
            Ok(CohortRanking {
                ranked: rank_cohort(key, variant, &g.scores)?,
                uda_id: g.uda,
                n_publications: g.pubs,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct RankingRow {
    professor_id: String,
    score: f64,
    rank: u32,
    percentile: f64,
    quartile: String,
    variant: String,
    cohort: String,
    uda_id: Option<String>,
    n_publications: Option<usize>,
}

/// Writes cohorts in the order given (rank, then professor id within each).
pub fn write_ranking(path: &Path, cohorts: &[CohortRanking], precision: Precision) -> Result<(), ReportError> {
    let header = [
        "professor_id",
        "score",
        "rank",
        "percentile",
        "quartile",
        "variant",
        "cohort",
        "uda_id",
        "n_publications",
    ];
    let rows = cohorts.iter().flat_map(|c| {
        c.ranked.entries.iter().map(move |e| {
            vec![
                e.professor_id.0.clone(),
                precision.score(e.score),
                e.rank.to_string(),
                precision.percentile(e.percentile),
                e.quartile.to_string(),
                c.ranked.variant.to_string(),
                c.ranked.key.to_string(),
                c.uda_id.0.clone(),
                c.n_publications.get(&e.professor_id).copied().unwrap_or(0).to_string(),
            ]
        })
    });
    write_table(path, &header, rows)
}

/// Reads a ranking file back into cohorts, keyed by (variant, cohort).
///
/// Ranks and percentiles are taken as written, not recomputed.
pub fn read_ranking(path: &Path) -> Result<BTreeMap<(ScoreVariant, CohortKey), CohortRanking>, ReportError> {
    let mut out: BTreeMap<(ScoreVariant, CohortKey), CohortRanking> = BTreeMap::new();
    for (i, row) in read_all::<RankingRow>(path)?.into_iter().enumerate() {
        let variant: ScoreVariant = row.variant.parse().map_err(|e: String| schema(path, i, e))?;
        let key: CohortKey = row.cohort.parse().map_err(|e: String| schema(path, i, e))?;
        let quartile = row.quartile.parse().map_err(|e: String| schema(path, i, e))?;
        if !(0.0..=100.0).contains(&row.percentile) || row.rank == 0 {
            return Err(schema(path, i, "rank must be >= 1 and percentile in [0, 100]"));
        }
        let id = ProfessorId(row.professor_id);
        let entry = out.entry((variant, key.clone())).or_insert_with(|| CohortRanking {
            ranked: RankedCohort {
                key,
                variant,
                entries: Vec::new(),
            },
            uda_id: UdaId(row.uda_id.clone().unwrap_or_default()),
            n_publications: BTreeMap::new(),
        });
        entry.n_publications.insert(id.clone(), row.n_publications.unwrap_or(0));
        entry.ranked.entries.push(RankedEntry {
            professor_id: id,
            score: row.score,
            rank: row.rank,
            percentile: row.percentile,
            quartile,
        });
    }
    for c in out.values_mut() {
        c.ranked
            .entries
            .sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.professor_id.cmp(&b.professor_id)));
    }
    Ok(out)
}

/// Matches C and WC rankings cohort by cohort.
pub fn pair_rankings(c: &[CohortRanking], wc: &[CohortRanking]) -> Result<Vec<CohortInput>, crate::Error> {
    let wc_by_key: BTreeMap<&CohortKey, &CohortRanking> = wc.iter().map(|r| (&r.ranked.key, r)).collect();
    if let Some(extra) = wc.iter().find(|w| !c.iter().any(|x| x.ranked.key == w.ranked.key)) {
        return Err(crate::compare::CompareError::CohortMismatch {
            key: extra.ranked.key.clone(),
            detail: "cohort present only in the second ranking".into(),
        }
        .into());
    }
    c.iter()
        .map(|base| {
            let alt = wc_by_key
                .get(&base.ranked.key)
                .ok_or_else(|| crate::compare::CompareError::CohortMismatch {
                    key: base.ranked.key.clone(),
                    detail: "cohort present only in the first ranking".into(),
                })?;
            let mut n_publications = base.n_publications.clone();
            for (id, n) in &alt.n_publications {
                let e = n_publications.entry(id.clone()).or_insert(*n);
                *e = (*e).max(*n);
            }
            Ok(CohortInput {
                uda_id: base.uda_id.clone(),
                c: base.ranked.clone(),
                wc: alt.ranked.clone(),
                n_publications,
            })
        })
        .collect()
}

pub const COMPARISON_FILES: [&str; 8] = [
    "comparison.csv",
    "cohort_stats.csv",
    "uda_stats.csv",
    "contingency.csv",
    "scatter.csv",
    "shift_histogram.csv",
    "boxplot.csv",
    "summary.csv",
];

fn dispersion_cells(d: Option<&Dispersion>, fmt: impl Fn(f64) -> String, with_cohorts: bool) -> Vec<String> {
    match d {
        Some(d) => {
            let mut v = vec![fmt(d.min)];
            if with_cohorts {
                v.push(d.min_cohort.to_string());
            }
            v.push(fmt(d.max));
            if with_cohorts {
                v.push(d.max_cohort.to_string());
            }
            v.push(fmt(d.mean));
            v.push(fmt(d.sd));
            v
        }
        None => vec![String::new(); if with_cohorts { 6 } else { 4 }],
    }
}

/// Writes every comparison output into `dir`; returns the paths written.
pub fn write_comparison(
    dir: &Path,
    report: &ComparisonReport,
    precision: Precision,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let p = precision;
    let path = |name: &str| dir.join(name);

    write_table(
        &path("comparison.csv"),
        &[
            "cohort",
            "uda_id",
            "professor_id",
            "score_c",
            "rank_c",
            "percentile_c",
            "quartile_c",
            "score_wc",
            "rank_wc",
            "percentile_wc",
            "quartile_wc",
            "delta_score_pct",
            "delta_rank",
            "delta_percentile",
        ],
        report.cohorts.iter().flat_map(|s| {
            s.comparison.rows.iter().map(move |r| {
                vec![
                    s.comparison.key.to_string(),
                    s.uda_id.to_string(),
                    r.professor_id.to_string(),
                    p.score(r.score_c),
                    r.rank_c.to_string(),
                    p.percentile(r.percentile_c),
                    r.quartile_c.to_string(),
                    p.score(r.score_wc),
                    r.rank_wc.to_string(),
                    p.percentile(r.percentile_wc),
                    r.quartile_wc.to_string(),
                    p.delta_score(r.delta_score),
                    r.rank_shift().to_string(),
                    p.percentile(r.delta_percentile),
                ]
            })
        }),
    )?;

    write_table(
        &path("cohort_stats.csv"),
        &[
            "cohort",
            "uda_id",
            "n_professors",
            "pearson",
            "spearman",
            "avg_abs_percentile_shift",
            "avg_abs_rank_shift",
            "share_unshifted_pct",
            "uncited_share_pct",
        ],
        report.cohorts.iter().map(|s| {
            let c = &s.comparison;
            vec![
                c.key.to_string(),
                s.uda_id.to_string(),
                c.len().to_string(),
                p.opt_correlation(c.pearson_scores),
                p.opt_correlation(c.spearman_ranks),
                p.percentile(c.avg_abs_percentile_shift),
                p.fixed(c.avg_abs_rank_shift, 2),
                p.percent(100.0 * c.share_unshifted),
                p.percent(100.0 * s.uncited_share),
            ]
        }),
    )?;

    let total = report.contingency.total();
    let pct_of = |n: u64, of: u64| if of == 0 { 0.0 } else { 100.0 * n as f64 / of as f64 };
    let mut uda_rows: Vec<Vec<String>> = report
        .udas
        .iter()
        .map(|u| {
            let mut row = vec![
                u.uda_id.to_string(),
                u.n_cohorts.to_string(),
                u.n_professors.to_string(),
            ];
            row.extend(dispersion_cells(Some(&u.percentile_shift), |x| p.percentile(x), true));
            row.extend(dispersion_cells(u.pearson.as_ref(), |x| p.correlation(x), false));
            row.extend(dispersion_cells(u.spearman.as_ref(), |x| p.correlation(x), false));
            let q = u.quartile_shifts;
            row.push(q.shifting.to_string());
            row.push(p.percent(pct_of(q.shifting, q.n_professors)));
            row.push(q.shifting_two.to_string());
            row.push(p.fixed(pct_of(q.shifting_two, q.n_professors), 2));
            row
        })
        .collect();
    let (all_shift, all_two) = report
        .contingency
        .by_uda
        .values()
        .fold((0, 0), |(a, b), q| (a + q.shifting, b + q.shifting_two));
    let mut total_row = vec!["Total".to_owned(), report.cohorts.len().to_string(), total.to_string()];
    total_row.extend(vec![String::new(); 14]);
    total_row.push(all_shift.to_string());
    total_row.push(p.percent(pct_of(all_shift, total)));
    total_row.push(all_two.to_string());
    total_row.push(p.fixed(pct_of(all_two, total), 2));
    uda_rows.push(total_row);
    write_table(
        &path("uda_stats.csv"),
        &[
            "uda_id",
            "n_cohorts",
            "n_professors",
            "shift_min",
            "shift_min_cohort",
            "shift_max",
            "shift_max_cohort",
            "shift_avg",
            "shift_sd",
            "pearson_min",
            "pearson_max",
            "pearson_avg",
            "pearson_sd",
            "spearman_min",
            "spearman_max",
            "spearman_avg",
            "spearman_sd",
            "shifting_quartiles",
            "shifting_quartiles_pct",
            "shifting_two_quartiles",
            "shifting_two_quartiles_pct",
        ],
        uda_rows,
    )?;

    let shares = report.contingency.shares();
    write_table(
        &path("contingency.csv"),
        &[
            "quartile_c",
            "wc_Q1_pct",
            "wc_Q2_pct",
            "wc_Q3_pct",
            "wc_Q4_pct",
            "wc_Q1_n",
            "wc_Q2_n",
            "wc_Q3_n",
            "wc_Q4_n",
        ],
        crate::ranking::Quartile::ALL.iter().map(|q| {
            let i = q.index();
            let mut row = vec![q.to_string()];
            row.extend(shares[i].iter().map(|s| p.fixed(100.0 * s, 2)));
            row.extend(report.contingency.counts[i].iter().map(|c| c.to_string()));
            row
        }),
    )?;

    let mut scatter = Vec::new();
    for s in &report.cohorts {
        for r in &s.comparison.rows {
            scatter.push(vec![
                "professor".to_owned(),
                s.comparison.key.to_string(),
                r.professor_id.to_string(),
                p.score(r.score_c),
                p.score(r.score_wc),
            ]);
        }
    }
    for s in &report.cohorts {
        scatter.push(vec![
            "cohort".to_owned(),
            s.comparison.key.to_string(),
            String::new(),
            p.percent(100.0 * s.uncited_share),
            p.percentile(s.comparison.avg_abs_percentile_shift),
        ]);
    }
    write_table(
        &path("scatter.csv"),
        &["kind", "cohort", "professor_id", "x", "y"],
        scatter,
    )?;

    write_table(
        &path("shift_histogram.csv"),
        &["cohort", "rank_shift", "n_professors", "share_pct"],
        report.cohorts.iter().flat_map(|s| {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for r in &s.comparison.rows {
                *counts.entry(r.delta_rank).or_default() += 1;
            }
            let n = s.comparison.len();
            counts.into_iter().map(move |(shift, k)| {
                vec![
                    s.comparison.key.to_string(),
                    shift.to_string(),
                    k.to_string(),
                    p.percent(100.0 * k as f64 / n as f64),
                ]
            })
        }),
    )?;

    write_table(
        &path("boxplot.csv"),
        &["uda_id", "n_cohorts", "min", "q1", "median", "q3", "max"],
        report.udas.iter().map(|u| {
            let b = u.shift_box;
            vec![
                u.uda_id.to_string(),
                u.n_cohorts.to_string(),
                p.percentile(b.min),
                p.percentile(b.q1),
                p.percentile(b.median),
                p.percentile(b.q3),
                p.percentile(b.max),
            ]
        }),
    )?;

    write_table(
        &path("summary.csv"),
        &["metric", "value"],
        [
            vec!["n_cohorts".to_owned(), report.cohorts.len().to_string()],
            vec!["n_professors".to_owned(), total.to_string()],
            vec![
                "quartile_unchanged_pct".to_owned(),
                p.fixed(100.0 * report.contingency.diagonal_share(), 2),
            ],
            vec![
                "uncited_share_vs_shift_pearson".to_owned(),
                p.opt_correlation(report.uncited.as_ref().map(|u| u.pearson_r)),
            ],
        ],
    )?;

    Ok(COMPARISON_FILES.iter().map(|n| path(n)).collect())
}
