//! Cohort rankings on a 0-100 percentile scale.
//!
//! Ranks use competition ranking (ties share the best position of their
//! group). Percentiles are `100 * (N - rank) / (N - 1)`, except that a zero
//! score always sits at percentile 0, so unproductive and uncited professors
//! are pooled at the bottom of the scale.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{AcademicRank, CohortKind, Professor, ProfessorId, SdsId};
use crate::impact::ScoreVariant;

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("cohort `{0}` is empty")]
    EmptyCohort(CohortKey),
    #[error("professor `{professor_id}` has invalid score {score} (scores must be finite and >= 0)")]
    InvalidScore { professor_id: ProfessorId, score: f64 },
    #[error("professor `{0}` appears twice in the cohort")]
    DuplicateProfessor(ProfessorId),
}

/// Identifies a ranking cohort: an SDS, optionally split by academic rank.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CohortKey {
    pub sds_id: SdsId,
    pub academic_rank: Option<AcademicRank>,
}

impl CohortKey {
    pub fn sds(sds_id: impl Into<SdsId>) -> Self {
        Self {
            sds_id: sds_id.into(),
            academic_rank: None,
        }
    }

    pub fn for_professor(professor: &Professor, kind: CohortKind) -> Self {
        Self::from_parts(&professor.sds_id, professor.academic_rank, kind)
    }

    pub fn from_parts(sds_id: &SdsId, rank: AcademicRank, kind: CohortKind) -> Self {
        Self {
            sds_id: sds_id.clone(),
            academic_rank: match kind {
                CohortKind::Sds => None,
                CohortKind::SdsAndRank => Some(rank),
            },
        }
    }
}

impl fmt::Display for CohortKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.academic_rank {
            None => write!(f, "{}", self.sds_id),
            Some(rank) => write!(f, "{}|{}", self.sds_id, rank),
        }
    }
}

impl FromStr for CohortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('|') {
            None => Ok(Self::sds(s)),
            Some((sds, rank)) => Ok(Self {
                sds_id: sds.into(),
                academic_rank: Some(rank.parse()?),
            }),
        }
    }
}

/// Performance quartile; `Q1` is the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quartile {
    pub const ALL: [Quartile; 4] = [Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4];

    /// `[75, 100]` is Q1, `[50, 75)` Q2, `[25, 50)` Q3, `[0, 25)` Q4.
    pub fn from_percentile(percentile: f64) -> Self {
        if percentile >= 75.0 {
            Self::Q1
        } else if percentile >= 50.0 {
            Self::Q2
        } else if percentile >= 25.0 {
            Self::Q3
        } else {
            Self::Q4
        }
    }

    /// 0 for Q1 through 3 for Q4.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Q1 => "Q1",
            Self::Q2 => "Q2",
            Self::Q3 => "Q3",
            Self::Q4 => "Q4",
        }
    }
}

impl fmt::Display for Quartile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quartile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Q1" | "q1" => Ok(Self::Q1),
            "Q2" | "q2" => Ok(Self::Q2),
            "Q3" | "q3" => Ok(Self::Q3),
            "Q4" | "q4" => Ok(Self::Q4),
            other => Err(format!("unknown quartile `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub professor_id: ProfessorId,
    pub score: f64,
    pub rank: u32,
    pub percentile: f64,
    pub quartile: Quartile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCohort {
    pub key: CohortKey,
    pub variant: ScoreVariant,
    /// Sorted by rank, then professor id.
    pub entries: Vec<RankedEntry>,
}

impl RankedCohort {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, id: &ProfessorId) -> Option<&RankedEntry> {
        self.entries.iter().find(|e| &e.professor_id == id)
    }
}

fn percentile(n: usize, rank: u32, score: f64) -> f64 {
    if score == 0.0 {
        0.0
    } else if n == 1 {
        100.0
    } else {
        100.0 * (n as f64 - rank as f64) / (n as f64 - 1.0)
    }
}

/// Ranks a cohort from its (professor, score) pairs.
pub fn rank_cohort(
    key: CohortKey,
    variant: ScoreVariant,
    scores: &[(ProfessorId, f64)],
) -> Result<RankedCohort, RankingError> {
    if scores.is_empty() {
        return Err(RankingError::EmptyCohort(key));
    }
    if let Some((id, s)) = scores.iter().find(|(_, s)| !(s.is_finite() && *s >= 0.0)) {
        return Err(RankingError::InvalidScore {
            professor_id: id.clone(),
            score: *s,
        });
    }
    let mut sorted: Vec<&(ProfessorId, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    let n = sorted.len();
    let mut entries = Vec::with_capacity(n);
    let mut rank = 1u32;
    for (i, (id, score)) in sorted.iter().enumerate() {
        if i > 0 && *score != sorted[i - 1].1 {
            rank = i as u32 + 1;
        }
        let pct = percentile(n, rank, *score);
        entries.push(RankedEntry {
            professor_id: id.clone(),
            score: *score,
            rank,
            percentile: pct,
            quartile: Quartile::from_percentile(pct),
        });
    }
    let mut ids: Vec<&ProfessorId> = entries.iter().map(|e| &e.professor_id).collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(RankingError::DuplicateProfessor(w[0].clone()));
    }
    Ok(RankedCohort { key, variant, entries })
}

/// Recomputes every entry's quartile from its percentile.
pub fn assign_quartiles(mut cohort: RankedCohort) -> RankedCohort {
    for e in &mut cohort.entries {
        e.quartile = Quartile::from_percentile(e.percentile);
    }
    cohort
}
