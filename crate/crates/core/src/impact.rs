//! Publication scores and yearly total impact.
//!
//! A professor's total impact is `(1/t) * sum(score_i * share_i)` over the
//! publications linked to them, where `t` is their years on staff and
//! `share_i` their fractional credit on publication `i`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{citation_window, BylinePolicy, Corpus, CorpusError, ProfessorId, Publication, ScId, WeightsTable};
use crate::credit::{fractional_contributions, CreditError};
use crate::normalization::{normalized_citations, normalized_if, BaselineTable, NormalizationError};

/// Which per-publication impact measure is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreVariant {
    /// Normalized early citations only.
    C,
    /// Weighted combination of normalized citations and normalized journal IF.
    WC,
}

impl ScoreVariant {
    pub const BOTH: [ScoreVariant; 2] = [ScoreVariant::C, ScoreVariant::WC];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::C => "c",
            Self::WC => "wc",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::C => Self::WC,
            Self::WC => Self::C,
        }
    }
}

impl fmt::Display for ScoreVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c" => Ok(Self::C),
            "wc" => Ok(Self::WC),
            other => Err(format!("unknown score variant `{other}` (expected c or wc)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ImpactError {
    #[error("no weights for subject category `{sc_id}` with a {window}-year citation window")]
    MissingWeights { sc_id: ScId, window: u32 },
    #[error(transparent)]
    Normalization(#[from] NormalizationError),
    #[error(transparent)]
    Credit(#[from] CreditError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("professor `{0}` is not in the corpus")]
    UnknownProfessor(ProfessorId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactScore {
    pub professor_id: ProfessorId,
    pub variant: ScoreVariant,
    pub value: f64,
    pub n_publications: usize,
    /// Years on staff in the observation period.
    pub t: u32,
}

/// Score of one publication under `variant`.
///
/// The WC weights are looked up by subject category and by the citation
/// window between the publication year and `observation_year`.
pub fn publication_score(
    publication: &Publication,
    variant: ScoreVariant,
    baselines: &BaselineTable,
    weights: &WeightsTable,
    observation_year: i32,
) -> Result<f64, ImpactError> {
    let nc = normalized_citations(publication, baselines)?;
    match variant {
        ScoreVariant::C => Ok(nc),
        ScoreVariant::WC => {
            let window = citation_window(publication.year, observation_year)?;
            let w = weights
                .get(&publication.sc_id, window)
                .ok_or_else(|| ImpactError::MissingWeights {
                    sc_id: publication.sc_id.clone(),
                    window,
                })?;
            let nif = normalized_if(publication, baselines)?;
            Ok(w.citation * nc + w.impact_factor * nif)
        }
    }
}

/// Evaluates total impact against a fixed corpus, baselines and weights.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    corpus: &'a Corpus,
    baselines: &'a BaselineTable,
    weights: &'a WeightsTable,
    policy_override: Option<BylinePolicy>,
}

impl<'a> Scorer<'a> {
    pub fn new(corpus: &'a Corpus, baselines: &'a BaselineTable, weights: &'a WeightsTable) -> Self {
        Self {
            corpus,
            baselines,
            weights,
            policy_override: None,
        }
    }

    /// Uses `policy` for every byline instead of the SDS policy.
    pub fn with_policy_override(mut self, policy: Option<BylinePolicy>) -> Self {
        self.policy_override = policy;
        self
    }

    pub fn total_impact(&self, professor_id: &ProfessorId, variant: ScoreVariant) -> Result<ImpactScore, ImpactError> {
        let professor = self
            .corpus
            .professor(professor_id)
            .ok_or_else(|| ImpactError::UnknownProfessor(professor_id.clone()))?;
        let policy = match self.policy_override {
            Some(p) => p,
            None => self
                .corpus
                .taxonomy()
                .policy_of(&professor.sds_id)
                .expect("corpus validated SDS membership"),
        };
        let observation_year = self.corpus.config().observation_year;
        let authorships = self.corpus.authorships(professor_id);
        let mut sum = 0.0;
        for (pub_id, entry_idx) in authorships {
            let publication = self.corpus.publication(pub_id).expect("corpus validated links");
            let byline = self.corpus.byline(pub_id).expect("corpus validated links");
            let share = fractional_contributions(byline, policy)?.weights[*entry_idx];
            let score = publication_score(publication, variant, self.baselines, self.weights, observation_year)?;
            sum += score * share;
        }
        Ok(ImpactScore {
            professor_id: professor_id.clone(),
            variant,
            value: sum / professor.years_on_staff as f64,
            n_publications: authorships.len(),
            t: professor.years_on_staff,
        })
    }

    /// Scores of every professor, ordered by professor id then by `variants`.
    pub fn score_all(&self, variants: &[ScoreVariant]) -> Result<Vec<ImpactScore>, ImpactError> {
        let mut out = Vec::with_capacity(self.corpus.num_professors() * variants.len());
        for professor in self.corpus.professors() {
            for &variant in variants {
                out.push(self.total_impact(&professor.id, variant)?);
            }
        }
        Ok(out)
    }
}

/// Yearly total impact of one professor.
pub fn total_impact(
    professor_id: &ProfessorId,
    variant: ScoreVariant,
    corpus: &Corpus,
    baselines: &BaselineTable,
    weights: &WeightsTable,
) -> Result<ImpactScore, ImpactError> {
    Scorer::new(corpus, baselines, weights).total_impact(professor_id, variant)
}

/// Scores every professor of the corpus with the corpus' own weights table.
pub fn score_corpus(
    corpus: &Corpus,
    baselines: &BaselineTable,
    variants: &[ScoreVariant],
) -> Result<Vec<ImpactScore>, ImpactError> {
    Scorer::new(corpus, baselines, corpus.weights()).score_all(variants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        AcademicRank, Byline, BylineEntry, DocType, ObservationConfig, ProfessorRecord, SdsInfo, Taxonomy, Weights,
    };
    use crate::normalization::{build_baselines, BaselineCell};

    fn publication(citations: u64, journal_if: f64) -> Publication {
        Publication {
            id: "A".into(),
            year: 2016,
            sc_id: "SC".into(),
            citations,
            journal_if,
            doc_type: DocType::Article,
        }
    }

    fn table(mean_c: f64, mean_if: f64) -> BaselineTable {
        BaselineTable::from_cells([BaselineCell {
            year: 2016,
            sc_id: "SC".into(),
            mean_cited_citations: Some(mean_c),
            mean_if: Some(mean_if),
            n_publications: 1,
            n_cited: 1,
        }])
    }

    fn weights(wc: f64, wif: f64) -> WeightsTable {
        let mut w = WeightsTable::new();
        w.insert("SC".into(), 3, Weights::new(wc, wif).unwrap());
        w
    }

    #[test]
    fn affine_combination() {
        // nc = 1/2, nif = 1.2
        let p = publication(1, 1.2);
        let s = publication_score(&p, ScoreVariant::WC, &table(2.0, 1.0), &weights(0.8, 0.2), 2018).unwrap();
        assert!((s - 0.64).abs() < 1e-12);
    }

    #[test]
    fn identity_weights_collapse_to_citations() {
        let t = table(3.0, 1.7);
        let w = weights(1.0, 0.0);
        for c in 0..6 {
            let p = publication(c, 2.3);
            let a = publication_score(&p, ScoreVariant::C, &t, &w, 2018).unwrap();
            let b = publication_score(&p, ScoreVariant::WC, &t, &w, 2018).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uncited_paper_scores_under_wc_only() {
        let p = publication(0, 2.0);
        let t = table(3.0, 1.0);
        let w = weights(0.7, 0.3);
        assert_eq!(publication_score(&p, ScoreVariant::C, &t, &w, 2018).unwrap(), 0.0);
        assert!(publication_score(&p, ScoreVariant::WC, &t, &w, 2018).unwrap() > 0.0);
    }

    #[test]
    fn missing_weights_names_the_pair() {
        let p = publication(1, 2.0);
        let err = publication_score(&p, ScoreVariant::WC, &table(1.0, 1.0), &weights(1.0, 0.0), 2017).unwrap_err();
        match err {
            ImpactError::MissingWeights { sc_id, window } => {
                assert_eq!(sc_id.as_str(), "SC");
                assert_eq!(window, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        // C never needs weights
        assert!(publication_score(&p, ScoreVariant::C, &table(1.0, 1.0), &WeightsTable::new(), 2017).is_ok());
    }

    fn corpus(t: u32, pubs: &[(&str, u64, usize)]) -> Corpus {
        // each tuple: pub id, citations, number of alphabetical co-authors incl. P1
        let mut taxonomy = Taxonomy::default();
        taxonomy.sds.insert(
            "S".into(),
            SdsInfo {
                uda_id: "1".into(),
                policy: BylinePolicy::Alphabetical,
            },
        );
        taxonomy.sc_ids.insert("SC".into());
        let professors = vec![
            ProfessorRecord {
                id: "P1".into(),
                sds_id: "S".into(),
                academic_rank: AcademicRank::Full,
                years_on_staff: t,
            },
            ProfessorRecord {
                id: "P0".into(),
                sds_id: "S".into(),
                academic_rank: AcademicRank::Full,
                years_on_staff: 3,
            },
        ];
        let mut publications = Vec::new();
        let mut bylines = Vec::new();
        for (id, citations, n) in pubs {
            publications.push(Publication {
                id: (*id).into(),
                year: 2016,
                sc_id: "SC".into(),
                citations: *citations,
                journal_if: 1.0,
                doc_type: DocType::Article,
            });
            let entries = (0..*n)
                .map(|i| BylineEntry {
                    position: i as u32 + 1,
                    author_key: format!("k{i}"),
                    university_id: "U".into(),
                    professor_id: (i == 0).then(|| "P1".into()),
                })
                .collect();
            bylines.push(Byline::new((*id).into(), entries).unwrap());
        }
        Corpus::new(
            ObservationConfig::new(2015, 2017, 2018).unwrap(),
            taxonomy,
            professors,
            publications,
            bylines,
            weights(0.5, 0.5),
        )
        .unwrap()
    }

    #[test]
    fn single_term_total_impact() {
        // one paper at the cell mean (score 1.0), two authors (share 0.5), t = 2
        let c = corpus(2, &[("A", 5, 2)]);
        let b = build_baselines(&c);
        let s = total_impact(&"P1".into(), ScoreVariant::C, &c, &b, c.weights()).unwrap();
        assert!((s.value - 0.25).abs() < 1e-12);
        assert_eq!(s.n_publications, 1);
        assert_eq!(s.t, 2);
    }

    #[test]
    fn unproductive_professor_scores_zero() {
        let c = corpus(2, &[("A", 5, 2)]);
        let b = build_baselines(&c);
        for v in ScoreVariant::BOTH {
            let s = total_impact(&"P0".into(), v, &c, &b, c.weights()).unwrap();
            assert_eq!(s.value, 0.0);
            assert_eq!(s.n_publications, 0);
        }
    }

    #[test]
    fn two_publication_sum() {
        // cited mean 4.5, so scores 4/3 and 2/3; shares 0.5 and 1.0; t = 3
        let c = corpus(3, &[("A", 6, 2), ("B", 3, 1)]);
        let b = build_baselines(&c);
        let s = total_impact(&"P1".into(), ScoreVariant::C, &c, &b, c.weights()).unwrap();
        let expected = (1.0 / 3.0) * (6.0 / 4.5 * 0.5 + 3.0 / 4.5 * 1.0);
        assert!((s.value - expected).abs() < 1e-12);
    }

    #[test]
    fn unknown_professor() {
        let c = corpus(2, &[]);
        let b = build_baselines(&c);
        assert!(matches!(
            total_impact(&"nobody".into(), ScoreVariant::C, &c, &b, c.weights()),
            Err(ImpactError::UnknownProfessor(_))
        ));
    }

    #[test]
    fn score_all_order() {
        let c = corpus(2, &[("A", 5, 2)]);
        let b = build_baselines(&c);
        let all = score_corpus(&c, &b, &ScoreVariant::BOTH).unwrap();
        let keys: Vec<_> = all.iter().map(|s| (s.professor_id.as_str(), s.variant)).collect();
        assert_eq!(
            keys,
            vec![
                ("P0", ScoreVariant::C),
                ("P0", ScoreVariant::WC),
                ("P1", ScoreVariant::C),
                ("P1", ScoreVariant::WC)
            ]
        );
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("WC".parse::<ScoreVariant>().unwrap(), ScoreVariant::WC);
        assert_eq!("c".parse::<ScoreVariant>().unwrap(), ScoreVariant::C);
        assert!("both".parse::<ScoreVariant>().is_err());
    }
}
