//! Differences between the C and WC rankings.
//!
//! Per cohort: score/rank/percentile deltas for each professor, score and
//! rank correlations and the average absolute percentile shift. Across
//! cohorts: per-UDA dispersion of those statistics, the quartile contingency
//! matrix, and the relation between the share of uncited professors and the
//! average shift.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::corpus::{ProfessorId, UdaId};
use crate::ranking::{CohortKey, Quartile, RankedCohort};

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation needs at least 2 points, got {0}")]
    TooShort(usize),
    #[error("correlation undefined: {0} vector is constant")]
    Undefined(&'static str),
    #[error("cohort `{key}` mismatch: {detail}")]
    CohortMismatch { key: CohortKey, detail: String },
    #[error("uncited-share sensitivity needs at least 2 cohorts, got {0}")]
    TooFewCohorts(usize),
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), CompareError> {
    if x.len() != y.len() {
        return Err(CompareError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CompareError::TooShort(x.len()));
    }
    Ok(())
}

/// Sample Pearson correlation, computed on centered values.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CompareError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(CompareError::Undefined("first"));
    }
    if syy == 0.0 {
        return Err(CompareError::Undefined("second"));
    }
    // sqrt of the product keeps pearson(x, x) exactly 1
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks in ascending order; tied values get the mean of the
/// positions they occupy.
pub fn fractional_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation of the fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, CompareError> {
    check_pair(x, y)?;
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// Relative score change from the baseline to the alternative indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaScore {
    /// `100 * (alt - base) / base`.
    Finite(f64),
    /// Base score zero, alternative positive.
    Infinite,
    /// Both scores zero.
    NotApplicable,
}

impl DeltaScore {
    pub fn between(base: f64, alt: f64) -> Self {
        if base > 0.0 {
            Self::Finite(100.0 * (alt - base) / base)
        } else if alt > 0.0 {
            Self::Infinite
        } else {
            Self::NotApplicable
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub professor_id: ProfessorId,
    pub score_c: f64,
    pub score_wc: f64,
    pub rank_c: u32,
    pub rank_wc: u32,
    pub percentile_c: f64,
    pub percentile_wc: f64,
    pub quartile_c: Quartile,
    pub quartile_wc: Quartile,
    pub delta_score: DeltaScore,
    /// `rank_c - rank_wc`: positive when the professor climbs.
    pub delta_rank: i64,
    /// `percentile_wc - percentile_c`.
    pub delta_percentile: f64,
}

/// Direction-marked rank change: `"3 ↑"`, `"1 ↓"` or `"0 ="`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankShift(pub i64);

impl fmt::Display for RankShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("0 ="),
            d if d > 0 => write!(f, "{d} ↑"),
            d => write!(f, "{} ↓", -d),
        }
    }
}

impl DeltaRow {
    pub fn rank_shift(&self) -> RankShift {
        RankShift(self.delta_rank)
    }

    /// Number of quartiles crossed (0 to 3).
    pub fn quartile_shift(&self) -> usize {
        self.quartile_c.index().abs_diff(self.quartile_wc.index())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortComparison {
    pub key: CohortKey,
    /// Ordered like the baseline ranking (rank, then professor id).
    pub rows: Vec<DeltaRow>,
    /// `None` when either score vector is constant.
    pub pearson_scores: Option<f64>,
    pub spearman_ranks: Option<f64>,
    pub avg_abs_percentile_shift: f64,
    pub avg_abs_rank_shift: f64,
    /// Share of professors whose rank label did not change.
    pub share_unshifted: f64,
}

impl CohortComparison {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Share of the cohort that is productive yet has a zero baseline score.
    pub fn uncited_share(&self, n_publications: impl Fn(&ProfessorId) -> usize) -> f64 {
        let uncited = self
            .rows
            .iter()
            .filter(|r| r.score_c == 0.0 && n_publications(&r.professor_id) > 0)
            .count();
        uncited as f64 / self.rows.len() as f64
    }
}

/// Pairs the baseline (normally C) and alternative (normally WC) rankings of
/// one cohort.
pub fn compare_cohort(baseline: &RankedCohort, alternative: &RankedCohort) -> Result<CohortComparison, CompareError> {
    let key = baseline.key.clone();
    if baseline.key != alternative.key {
        return Err(CompareError::CohortMismatch {
            key,
            detail: format!("paired with cohort `{}`", alternative.key),
        });
    }
    if baseline.entries.is_empty() {
        return Err(CompareError::CohortMismatch {
            key,
            detail: "cohort is empty".into(),
        });
    }
    let alt: BTreeMap<&ProfessorId, _> = alternative.entries.iter().map(|e| (&e.professor_id, e)).collect();
    let base_ids: BTreeSet<&ProfessorId> = baseline.entries.iter().map(|e| &e.professor_id).collect();
    if alt.len() != alternative.entries.len() || base_ids.len() != baseline.entries.len() {
        return Err(CompareError::CohortMismatch {
            key,
            detail: "duplicate professor ids".into(),
        });
    }
    if let Some(missing) = base_ids.iter().find(|id| !alt.contains_key(**id)) {
        return Err(CompareError::CohortMismatch {
            key,
            detail: format!("professor `{missing}` missing from the second ranking"),
        });
    }
    if let Some(extra) = alt.keys().find(|id| !base_ids.contains(**id)) {
        return Err(CompareError::CohortMismatch {
            key,
            detail: format!("professor `{extra}` missing from the first ranking"),
        });
    }

    let rows: Vec<DeltaRow> = baseline
        .entries
        .iter()
        .map(|b| {
            let a = alt[&b.professor_id];
            DeltaRow {
                professor_id: b.professor_id.clone(),
                score_c: b.score,
                score_wc: a.score,
                rank_c: b.rank,
                rank_wc: a.rank,
                percentile_c: b.percentile,
                percentile_wc: a.percentile,
                quartile_c: b.quartile,
                quartile_wc: a.quartile,
                delta_score: DeltaScore::between(b.score, a.score),
                delta_rank: b.rank as i64 - a.rank as i64,
                delta_percentile: a.percentile - b.percentile,
            }
        })
        .collect();

    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.score_c).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.score_wc).collect();
    Ok(CohortComparison {
        key,
        pearson_scores: pearson(&xs, &ys).ok(),
        spearman_ranks: spearman(&xs, &ys).ok(),
        avg_abs_percentile_shift: rows.iter().map(|r| r.delta_percentile.abs()).sum::<f64>() / n,
        avg_abs_rank_shift: rows.iter().map(|r| r.delta_rank.unsigned_abs() as f64).sum::<f64>() / n,
        share_unshifted: rows.iter().filter(|r| r.delta_rank == 0).count() as f64 / n,
        rows,
    })
}

/// 4x4 quartile contingency over all professors plus per-UDA shift counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuartileContingency {
    /// `counts[i][j]`: professors in quartile `i` under C and `j` under WC.
    pub counts: [[u64; 4]; 4],
    pub by_uda: BTreeMap<UdaId, QuartileShifts>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuartileShifts {
    pub n_professors: u64,
    /// Professors changing quartile at all.
    pub shifting: u64,
    /// Professors moving two or more quartiles.
    pub shifting_two: u64,
}

impl QuartileContingency {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Population shares; all zero for an empty population.
    pub fn shares(&self) -> [[f64; 4]; 4] {
        let total = self.total();
        let mut out = [[0.0; 4]; 4];
        if total == 0 {
            return out;
        }
        for (i, row) in self.counts.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                out[i][j] = *c as f64 / total as f64;
            }
        }
        out
    }

    pub fn diagonal_share(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..4).map(|i| self.counts[i][i]).sum::<u64>() as f64 / total as f64
    }

    pub fn transposed(&self) -> Self {
        let mut counts = [[0; 4]; 4];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                counts[j][i] = *c;
            }
        }
        Self {
            counts,
            by_uda: self.by_uda.clone(),
        }
    }
}

/// Cross-tabulates quartiles under both indicators for every professor.
pub fn quartile_contingency<'a>(
    cohorts: impl IntoIterator<Item = (&'a UdaId, &'a CohortComparison)>,
) -> QuartileContingency {
    let mut out = QuartileContingency::default();
    for (uda, cohort) in cohorts {
        let shifts = out.by_uda.entry(uda.clone()).or_default();
        for row in &cohort.rows {
            out.counts[row.quartile_c.index()][row.quartile_wc.index()] += 1;
            shifts.n_professors += 1;
            let q = row.quartile_shift();
            if q >= 1 {
                shifts.shifting += 1;
            }
            if q >= 2 {
                shifts.shifting_two += 1;
            }
        }
    }
    out
}

/// Per-cohort (uncited share, average shift) points and their correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct UncitedSensitivity {
    pub points: Vec<(CohortKey, f64, f64)>,
    pub pearson_r: f64,
}

/// Correlates the uncited share of each cohort with its average absolute
/// percentile shift.
pub fn uncited_sensitivity(points: &[(CohortKey, f64, f64)]) -> Result<UncitedSensitivity, CompareError> {
    if points.len() < 2 {
        return Err(CompareError::TooFewCohorts(points.len()));
    }
    let shares: Vec<f64> = points.iter().map(|p| p.1).collect();
    let shifts: Vec<f64> = points.iter().map(|p| p.2).collect();
    Ok(UncitedSensitivity {
        points: points.to_vec(),
        pearson_r: pearson(&shares, &shifts)?,
    })
}

/// Min/max (with the cohort attaining them), mean and sample standard
/// deviation of a per-cohort statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispersion {
    pub min: f64,
    pub min_cohort: CohortKey,
    pub max: f64,
    pub max_cohort: CohortKey,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Dispersion {
    /// `None` for an empty input. Ties for min/max keep the first cohort.
    pub fn of(values: &[(CohortKey, f64)]) -> Option<Self> {
        let (first_key, first) = values.first()?;
        let mut d = Self {
            min: *first,
            min_cohort: first_key.clone(),
            max: *first,
            max_cohort: first_key.clone(),
            mean: 0.0,
            sd: 0.0,
            n: values.len(),
        };
        for (k, v) in &values[1..] {
            if *v < d.min {
                d.min = *v;
                d.min_cohort = k.clone();
            }
            if *v > d.max {
                d.max = *v;
                d.max_cohort = k.clone();
            }
        }
        let n = values.len() as f64;
        d.mean = values.iter().map(|(_, v)| v).sum::<f64>() / n;
        if values.len() > 1 {
            let ss: f64 = values.iter().map(|(_, v)| (v - d.mean).powi(2)).sum();
            d.sd = (ss / (n - 1.0)).sqrt();
        }
        Some(d)
    }
}

/// Five-number summary with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (v.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UdaStats {
    pub uda_id: UdaId,
    pub n_cohorts: usize,
    pub n_professors: usize,
    pub percentile_shift: Dispersion,
    pub shift_box: BoxSummary,
    /// Over cohorts with a defined correlation only.
    pub pearson: Option<Dispersion>,
    pub spearman: Option<Dispersion>,
    pub quartile_shifts: QuartileShifts,
}

/// Everything needed to compare one cohort.
#[derive(Debug, Clone)]
pub struct CohortInput {
    pub uda_id: UdaId,
    pub c: RankedCohort,
    pub wc: RankedCohort,
    /// Publication counts, to tell uncited from unproductive professors.
    pub n_publications: BTreeMap<ProfessorId, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSection {
    pub uda_id: UdaId,
    pub comparison: CohortComparison,
    pub uncited_share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Sorted by cohort key.
    pub cohorts: Vec<CohortSection>,
    pub udas: Vec<UdaStats>,
    pub contingency: QuartileContingency,
    /// `None` with fewer than two cohorts or constant inputs.
    pub uncited: Option<UncitedSensitivity>,
}

/// Compares every cohort and aggregates per UDA and globally.
///
/// Aggregates are accumulated in cohort-key order, so the result does not
/// depend on the order of `inputs`.
pub fn build_report(mut inputs: Vec<CohortInput>) -> Result<ComparisonReport, CompareError> {
    inputs.sort_by(|a, b| a.c.key.cmp(&b.c.key));
    let mut cohorts = Vec::with_capacity(inputs.len());
    for input in &inputs {
        let comparison = compare_cohort(&input.c, &input.wc)?;
        let uncited_share = comparison.uncited_share(|id| input.n_publications.get(id).copied().unwrap_or(0));
        cohorts.push(CohortSection {
            uda_id: input.uda_id.clone(),
            comparison,
            uncited_share,
        });
    }

    let contingency = quartile_contingency(cohorts.iter().map(|s| (&s.uda_id, &s.comparison)));

    let mut by_uda: BTreeMap<&UdaId, Vec<&CohortSection>> = BTreeMap::new();
    for s in &cohorts {
        by_uda.entry(&s.uda_id).or_default().push(s);
    }
    let udas = by_uda
        .into_iter()
        .map(|(uda, sections)| {
            let shifts: Vec<(CohortKey, f64)> = sections
                .iter()
                .map(|s| (s.comparison.key.clone(), s.comparison.avg_abs_percentile_shift))
                .collect();
            let collect = |f: fn(&CohortComparison) -> Option<f64>| -> Vec<(CohortKey, f64)> {
                sections
                    .iter()
                    .filter_map(|s| f(&s.comparison).map(|v| (s.comparison.key.clone(), v)))
                    .collect()
            };
            let raw_shifts: Vec<f64> = shifts.iter().map(|(_, v)| *v).collect();
            UdaStats {
                uda_id: uda.clone(),
                n_cohorts: sections.len(),
                n_professors: sections.iter().map(|s| s.comparison.len()).sum(),
                percentile_shift: Dispersion::of(&shifts).expect("at least one cohort per UDA"),
                shift_box: BoxSummary::of(&raw_shifts).expect("at least one cohort per UDA"),
                pearson: Dispersion::of(&collect(|c| c.pearson_scores)),
                spearman: Dispersion::of(&collect(|c| c.spearman_ranks)),
                quartile_shifts: contingency.by_uda.get(uda).copied().unwrap_or_default(),
            }
        })
        .collect();

    let points: Vec<(CohortKey, f64, f64)> = cohorts
        .iter()
        .map(|s| {
            (
                s.comparison.key.clone(),
                s.uncited_share,
                s.comparison.avg_abs_percentile_shift,
            )
        })
        .collect();
    let uncited = uncited_sensitivity(&points).ok();

    Ok(ComparisonReport {
        cohorts,
        udas,
        contingency,
        uncited,
    })
}
