//! Domain model, CSV ingestion and validation.
//!
//! A [`Corpus`] is built either from the five CSV files (see [`load_corpus`])
//! or programmatically through [`Corpus::new`]; both paths run the same
//! validation, so every corpus in memory satisfies the referential
//! invariants: each professor's SDS is in the taxonomy, each publication's
//! subject category is known, byline positions are exactly `1..=n`, and every
//! byline link points at a professor that survived the staff-years filter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Professors with fewer years on staff than this are dropped at load.
pub const MIN_YEARS_ON_STAFF: u32 = 2;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_newtype!(
    /// Opaque professor identifier.
    ProfessorId
);
id_newtype!(
    /// Opaque publication identifier.
    PubId
);
id_newtype!(
    /// Scientific disciplinary sector, the field every professor belongs to.
    SdsId
);
id_newtype!(
    /// University disciplinary area, a grouping of SDSs.
    UdaId
);
id_newtype!(
    /// Journal subject category.
    ScId
);

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
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
    #[error("duplicate {kind} `{key}`")]
    DuplicateKey { kind: &'static str, key: String },
    #[error("byline of publication `{pub_id}`: {message}")]
    Byline { pub_id: PubId, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("publication year {publication_year} is after observation year {observation_year}")]
    WindowOrder {
        publication_year: i32,
        observation_year: i32,
    },
}

fn parse_enum<T>(value: &str, options: &[(&str, T)], what: &str) -> Result<T, String>
where
    T: Copy,
{
    let wanted = value.trim().to_ascii_lowercase();
    options
        .iter()
        .find(|(name, _)| *name == wanted)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            format!("unknown {what} `{value}` (expected one of {})", names.join(", "))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AcademicRank {
    Assistant,
    Associate,
    Full,
}

impl AcademicRank {
    pub const ALL: [AcademicRank; 3] = [Self::Assistant, Self::Associate, Self::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Assistant => "assistant",
            Self::Associate => "associate",
            Self::Full => "full",
        }
    }
}

impl fmt::Display for AcademicRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AcademicRank {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_enum(
            s,
            &[
                ("assistant", Self::Assistant),
                ("associate", Self::Associate),
                ("full", Self::Full),
            ],
            "academic rank",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocType {
    Article,
    Letter,
    Review,
    Proceeding,
}

impl DocType {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Article => "article",
            Self::Letter => "letter",
            Self::Review => "review",
            Self::Proceeding => "proceeding",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_enum(
            s,
            &[
                ("article", Self::Article),
                ("letter", Self::Letter),
                ("review", Self::Review),
                ("proceeding", Self::Proceeding),
            ],
            "document type",
        )
    }
}

/// How co-authors share credit for a publication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BylinePolicy {
    /// Authors listed alphabetically: equal shares.
    Alphabetical,
    /// Author order signals contribution: first and last authors weigh most.
    Positional,
}

impl BylinePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Alphabetical => "alphabetical",
            Self::Positional => "positional",
        }
    }
}

impl fmt::Display for BylinePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BylinePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_enum(
            s,
            &[("alphabetical", Self::Alphabetical), ("positional", Self::Positional)],
            "byline policy",
        )
    }
}

/// What defines a ranking cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum CohortKind {
    /// All professors of an SDS.
    #[default]
    Sds,
    /// Professors of the same SDS and academic rank.
    SdsAndRank,
}

impl CohortKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sds => "sds",
            Self::SdsAndRank => "sds_and_rank",
        }
    }
}

impl fmt::Display for CohortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CohortKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_enum(
            s,
            &[("sds", Self::Sds), ("sds_and_rank", Self::SdsAndRank)],
            "cohort key",
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Professor {
    pub id: ProfessorId,
    pub sds_id: SdsId,
    pub uda_id: UdaId,
    pub academic_rank: AcademicRank,
    pub years_on_staff: u32,
}

/// One row of `professors.csv`; the UDA is resolved through the taxonomy.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfessorRecord {
    pub id: ProfessorId,
    pub sds_id: SdsId,
    pub academic_rank: AcademicRank,
    pub years_on_staff: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Publication {
    pub id: PubId,
    pub year: i32,
    pub sc_id: ScId,
    /// Citation count at the observation date.
    pub citations: u64,
    /// Two-year impact factor of the hosting journal for the publication year.
    pub journal_if: f64,
    pub doc_type: DocType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BylineEntry {
    /// 1-based position in the author list.
    pub position: u32,
    pub author_key: String,
    pub university_id: String,
    pub professor_id: Option<ProfessorId>,
}

/// Ordered author list of one publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Byline {
    pub pub_id: PubId,
    entries: Vec<BylineEntry>,
}

impl Byline {
    /// Sorts entries by position and checks they are exactly `1..=n`.
    pub fn new(pub_id: PubId, mut entries: Vec<BylineEntry>) -> Result<Self, CorpusError> {
        if entries.is_empty() {
            return Err(CorpusError::Byline {
                pub_id,
                message: "no authors".into(),
            });
        }
        entries.sort_by_key(|e| e.position);
        for (i, entry) in entries.iter().enumerate() {
            let expected = i as u32 + 1;
            if entry.position != expected {
                let message = if i > 0 && entries[i - 1].position == entry.position {
                    format!("duplicate position {}", entry.position)
                } else {
                    format!("expected position {expected}, found {}", entry.position)
                };
                return Err(CorpusError::Byline { pub_id, message });
            }
        }
        Ok(Self { pub_id, entries })
    }

    pub fn entries(&self) -> &[BylineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdsInfo {
    pub uda_id: UdaId,
    pub policy: BylinePolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    pub sds: BTreeMap<SdsId, SdsInfo>,
    pub sc_ids: BTreeSet<ScId>,
}

impl Taxonomy {
    pub fn uda_of(&self, sds: &SdsId) -> Option<&UdaId> {
        self.sds.get(sds).map(|i| &i.uda_id)
    }

    pub fn policy_of(&self, sds: &SdsId) -> Option<BylinePolicy> {
        self.sds.get(sds).map(|i| i.policy)
    }
}

/// Observation period and census year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationConfig {
    pub period_start: i32,
    pub period_end: i32,
    pub observation_year: i32,
    pub cohort_kind: CohortKind,
}

impl ObservationConfig {
    pub fn new(period_start: i32, period_end: i32, observation_year: i32) -> Result<Self, CorpusError> {
        let config = Self {
            period_start,
            period_end,
            observation_year,
            cohort_kind: CohortKind::Sds,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_cohort_kind(mut self, kind: CohortKind) -> Self {
        self.cohort_kind = kind;
        self
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.period_start > self.period_end || self.period_end > self.observation_year {
            return Err(CorpusError::Config(format!(
                "need period_start <= period_end <= observation_year, got {} / {} / {}",
                self.period_start, self.period_end, self.observation_year
            )));
        }
        Ok(())
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    ///
    /// Recognised keys: `period_start`, `period_end`, `observation_year`,
    /// `cohort_key` (optional, default `sds`).
    pub fn from_kv_str(text: &str) -> Result<Self, CorpusError> {
        let pairs = parse_kv(text).map_err(CorpusError::Config)?;
        let year = |key: &str| -> Result<i32, CorpusError> {
            let raw = pairs
                .get(key)
                .ok_or_else(|| CorpusError::Config(format!("missing key `{key}`")))?;
            raw.parse()
                .map_err(|_| CorpusError::Config(format!("`{key}` is not a year: `{raw}`")))
        };
        let mut config = Self {
            period_start: year("period_start")?,
            period_end: year("period_end")?,
            observation_year: year("observation_year")?,
            cohort_kind: CohortKind::Sds,
        };
        if let Some(kind) = pairs.get("cohort_key") {
            config.cohort_kind = kind.parse().map_err(CorpusError::Config)?;
        }
        for key in pairs.keys() {
            if !["period_start", "period_end", "observation_year", "cohort_key"].contains(&key.as_str()) {
                return Err(CorpusError::Config(format!("unknown key `{key}`")));
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_kv_str(&text)
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "period_start={}\nperiod_end={}\nobservation_year={}\ncohort_key={}\n",
            self.period_start, self.period_end, self.observation_year, self.cohort_kind
        )
    }
}

/// Splits `key=value` lines into a map. Later duplicates are rejected.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got `{line}`", i + 1))?;
        let key = key.trim().to_owned();
        if out.insert(key.clone(), value.trim().to_owned()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", i + 1));
        }
    }
    Ok(out)
}

/// Number of calendar years with citation opportunity, counting the
/// publication year itself: a 2015 paper observed at the end of 2018 has a
/// four-year window.
pub fn citation_window(publication_year: i32, observation_year: i32) -> Result<u32, CorpusError> {
    if publication_year > observation_year {
        return Err(CorpusError::WindowOrder {
            publication_year,
            observation_year,
        });
    }
    Ok((observation_year - publication_year + 1) as u32)
}

/// Pair of weights combining normalized citations and normalized IF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub citation: f64,
    pub impact_factor: f64,
}

impl Weights {
    pub fn new(citation: f64, impact_factor: f64) -> Result<Self, String> {
        if !citation.is_finite() || !impact_factor.is_finite() {
            return Err("weights must be finite".into());
        }
        if citation < 0.0 || impact_factor < 0.0 || citation + impact_factor <= 0.0 {
            return Err(format!(
                "weights must be non-negative with a positive sum, got ({citation}, {impact_factor})"
            ));
        }
        Ok(Self {
            citation,
            impact_factor,
        })
    }
}

/// Weights per (subject category, citation window in years).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightsTable {
    rows: BTreeMap<(ScId, u32), Weights>,
}

impl WeightsTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a row, returning `false` if the key was already present.
    pub fn insert(&mut self, sc_id: ScId, window_years: u32, weights: Weights) -> bool {
        self.rows.insert((sc_id, window_years), weights).is_none()
    }

    pub fn get(&self, sc_id: &ScId, window_years: u32) -> Option<Weights> {
        self.rows.get(&(sc_id.clone(), window_years)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScId, u32, Weights)> {
        self.rows.iter().map(|((sc, w), weights)| (sc, *w, *weights))
    }

    pub fn sc_ids(&self) -> BTreeSet<ScId> {
        self.rows.keys().map(|(sc, _)| sc.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// What the loader dropped or rewrote.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Professors dropped for having fewer than [`MIN_YEARS_ON_STAFF`] years.
    pub excluded_professors: Vec<ProfessorId>,
    /// Byline links to excluded professors, turned into untracked authors.
    pub unlinked_authorships: usize,
}

/// (publication, index into its byline entries) for one authorship.
pub type Authorship = (PubId, usize);

/// Validated, cross-linked, immutable collection of the input data.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    config: ObservationConfig,
    taxonomy: Taxonomy,
    professors: BTreeMap<ProfessorId, Professor>,
    publications: BTreeMap<PubId, Publication>,
    bylines: BTreeMap<PubId, Byline>,
    weights: WeightsTable,
    authorships: BTreeMap<ProfessorId, Vec<Authorship>>,
    report: LoadReport,
}

fn schema(file: &str, index: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Schema {
        file: file.to_owned(),
        // header is line 1
        line: index + 2,
        message: message.into(),
    }
}

impl Corpus {
    /// Validates and cross-links the parts. Record indices in errors are
    /// reported as CSV line numbers (header on line 1).
    pub fn new(
        config: ObservationConfig,
        taxonomy: Taxonomy,
        professors: Vec<ProfessorRecord>,
        publications: Vec<Publication>,
        bylines: Vec<Byline>,
        weights: WeightsTable,
    ) -> Result<Self, CorpusError> {
        config.validate()?;

        let mut report = LoadReport::default();
        let mut all_ids = BTreeSet::new();
        let mut kept = BTreeMap::new();
        for (i, rec) in professors.into_iter().enumerate() {
            if !all_ids.insert(rec.id.clone()) {
                return Err(CorpusError::DuplicateKey {
                    kind: "professor_id",
                    key: rec.id.0,
                });
            }
            let info = taxonomy.sds.get(&rec.sds_id).ok_or_else(|| {
                schema(
                    "professors.csv",
                    i,
                    format!("professor `{}` has unknown sds_id `{}`", rec.id, rec.sds_id),
                )
            })?;
            if rec.years_on_staff < MIN_YEARS_ON_STAFF {
                report.excluded_professors.push(rec.id);
                continue;
            }
            kept.insert(
                rec.id.clone(),
                Professor {
                    id: rec.id,
                    sds_id: rec.sds_id,
                    uda_id: info.uda_id.clone(),
                    academic_rank: rec.academic_rank,
                    years_on_staff: rec.years_on_staff,
                },
            );
        }

        let mut pubs = BTreeMap::new();
        for (i, p) in publications.into_iter().enumerate() {
            if !taxonomy.sc_ids.contains(&p.sc_id) {
                return Err(schema(
                    "publications.csv",
                    i,
                    format!("publication `{}` has unknown sc_id `{}`", p.id, p.sc_id),
                ));
            }
            if p.year < config.period_start || p.year > config.period_end {
                return Err(schema(
                    "publications.csv",
                    i,
                    format!(
                        "publication `{}` year {} outside observation period {}-{}",
                        p.id, p.year, config.period_start, config.period_end
                    ),
                ));
            }
            if !p.journal_if.is_finite() || p.journal_if < 0.0 {
                return Err(schema(
                    "publications.csv",
                    i,
                    format!("publication `{}` has invalid journal_if {}", p.id, p.journal_if),
                ));
            }
            if pubs.contains_key(&p.id) {
                return Err(CorpusError::DuplicateKey {
                    kind: "pub_id",
                    key: p.id.0,
                });
            }
            pubs.insert(p.id.clone(), p);
        }

        let mut linked = BTreeMap::new();
        let mut authorships: BTreeMap<ProfessorId, Vec<Authorship>> = BTreeMap::new();
        for mut byline in bylines {
            if !pubs.contains_key(&byline.pub_id) {
                return Err(CorpusError::Byline {
                    pub_id: byline.pub_id,
                    message: "publication not found".into(),
                });
            }
            if linked.contains_key(&byline.pub_id) {
                return Err(CorpusError::DuplicateKey {
                    kind: "byline for pub_id",
                    key: byline.pub_id.0,
                });
            }
            let mut seen = BTreeSet::new();
            for (idx, entry) in byline.entries.iter_mut().enumerate() {
                let Some(pid) = entry.professor_id.clone() else {
                    continue;
                };
                if kept.contains_key(&pid) {
                    if !seen.insert(pid.clone()) {
                        return Err(CorpusError::Byline {
                            pub_id: byline.pub_id.clone(),
                            message: format!("professor `{pid}` appears twice"),
                        });
                    }
                    authorships.entry(pid).or_default().push((byline.pub_id.clone(), idx));
                } else if all_ids.contains(&pid) {
                    entry.professor_id = None;
                    report.unlinked_authorships += 1;
                } else {
                    return Err(CorpusError::Byline {
                        pub_id: byline.pub_id.clone(),
                        message: format!("unknown professor_id `{pid}` at position {}", entry.position),
                    });
                }
            }
            linked.insert(byline.pub_id.clone(), byline);
        }
        for list in authorships.values_mut() {
            list.sort();
        }

        Ok(Self {
            config,
            taxonomy,
            professors: kept,
            publications: pubs,
            bylines: linked,
            weights,
            authorships,
            report,
        })
    }

    pub fn config(&self) -> &ObservationConfig {
        &self.config
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn weights(&self) -> &WeightsTable {
        &self.weights
    }

    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn professors(&self) -> impl Iterator<Item = &Professor> {
        self.professors.values()
    }

    pub fn professor(&self, id: &ProfessorId) -> Option<&Professor> {
        self.professors.get(id)
    }

    pub fn publications(&self) -> impl Iterator<Item = &Publication> {
        self.publications.values()
    }

    pub fn publication(&self, id: &PubId) -> Option<&Publication> {
        self.publications.get(id)
    }

    pub fn bylines(&self) -> impl Iterator<Item = &Byline> {
        self.bylines.values()
    }

    pub fn byline(&self, id: &PubId) -> Option<&Byline> {
        self.bylines.get(id)
    }

    /// Publications the professor is linked to, with the byline entry index,
    /// sorted by publication id.
    pub fn authorships(&self, id: &ProfessorId) -> &[Authorship] {
        self.authorships.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_professors(&self) -> usize {
        self.professors.len()
    }

    pub fn num_publications(&self) -> usize {
        self.publications.len()
    }

    /// Citation window of a publication relative to the census year.
    pub fn window_of(&self, publication: &Publication) -> Result<u32, CorpusError> {
        citation_window(publication.year, self.config.observation_year)
    }
}

/// Paths of the five corpus files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFiles {
    pub professors: PathBuf,
    pub publications: PathBuf,
    pub bylines: PathBuf,
    pub taxonomy: PathBuf,
    pub weights: PathBuf,
}

impl CorpusFiles {
    pub const PROFESSORS: &'static str = "professors.csv";
    pub const PUBLICATIONS: &'static str = "publications.csv";
    pub const BYLINES: &'static str = "bylines.csv";
    pub const TAXONOMY: &'static str = "taxonomy.csv";
    pub const WEIGHTS: &'static str = "weights.csv";
    /// Observation configuration written next to a corpus.
    pub const CONFIG: &'static str = "config.txt";

    /// The standard file names inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            professors: dir.join(Self::PROFESSORS),
            publications: dir.join(Self::PUBLICATIONS),
            bylines: dir.join(Self::BYLINES),
            taxonomy: dir.join(Self::TAXONOMY),
            weights: dir.join(Self::WEIGHTS),
        }
    }

    pub fn all(&self) -> [&Path; 5] {
        [
            &self.professors,
            &self.publications,
            &self.bylines,
            &self.taxonomy,
            &self.weights,
        ]
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ProfessorRow {
    professor_id: String,
    sds_id: String,
    academic_rank: String,
    years_on_staff: u32,
}

#[derive(Debug, Deserialize, Serialize)]
struct PublicationRow {
    pub_id: String,
    year: i32,
    sc_id: String,
    citations: u64,
    journal_if: f64,
    doc_type: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct BylineRow {
    pub_id: String,
    position: u32,
    author_key: String,
    university_id: String,
    professor_id: Option<String>,
}

#[derive(Debug, Deserialize, Serialize)]
struct TaxonomyRow {
    sds_id: String,
    uda_id: String,
    byline_policy: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct WeightsRow {
    sc_id: String,
    window_years: u32,
    w_citation: f64,
    w_if: f64,
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| CorpusError::Csv {
            file: file_label(path),
            source,
        })
}

fn nonempty(file: &str, index: usize, field: &str, value: String) -> Result<String, CorpusError> {
    if value.is_empty() {
        Err(schema(file, index, format!("empty {field}")))
    } else {
        Ok(value)
    }
}

/// Reads, validates and cross-links the five corpus files.
pub fn load_corpus(files: &CorpusFiles, config: ObservationConfig) -> Result<Corpus, CorpusError> {
    let taxonomy_file = file_label(&files.taxonomy);
    let mut taxonomy = Taxonomy::default();
    for (i, row) in read_rows::<TaxonomyRow>(&files.taxonomy)?.into_iter().enumerate() {
        let policy = row
            .byline_policy
            .parse()
            .map_err(|e: String| schema(&taxonomy_file, i, e))?;
        let sds = SdsId(nonempty(&taxonomy_file, i, "sds_id", row.sds_id)?);
        let info = SdsInfo {
            uda_id: UdaId(nonempty(&taxonomy_file, i, "uda_id", row.uda_id)?),
            policy,
        };
        if taxonomy.sds.insert(sds.clone(), info).is_some() {
            return Err(CorpusError::DuplicateKey {
                kind: "sds_id",
                key: sds.0,
            });
        }
    }

    let weights_file = file_label(&files.weights);
    let mut weights = WeightsTable::new();
    for (i, row) in read_rows::<WeightsRow>(&files.weights)?.into_iter().enumerate() {
        let w = Weights::new(row.w_citation, row.w_if).map_err(|e| schema(&weights_file, i, e))?;
        if row.window_years == 0 {
            return Err(schema(&weights_file, i, "window_years must be >= 1"));
        }
        let sc = ScId(nonempty(&weights_file, i, "sc_id", row.sc_id)?);
        if !weights.insert(sc.clone(), row.window_years, w) {
            return Err(CorpusError::DuplicateKey {
                kind: "weights row",
                key: format!("{sc}/{}", row.window_years),
            });
        }
    }
    taxonomy.sc_ids = weights.sc_ids();

    let prof_file = file_label(&files.professors);
    let professors = read_rows::<ProfessorRow>(&files.professors)?
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            Ok(ProfessorRecord {
                id: ProfessorId(nonempty(&prof_file, i, "professor_id", row.professor_id)?),
                sds_id: SdsId(row.sds_id),
                academic_rank: row
                    .academic_rank
                    .parse()
                    .map_err(|e: String| schema(&prof_file, i, e))?,
                years_on_staff: row.years_on_staff,
            })
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;

    let pub_file = file_label(&files.publications);
    let publications = read_rows::<PublicationRow>(&files.publications)?
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            Ok(Publication {
                id: PubId(nonempty(&pub_file, i, "pub_id", row.pub_id)?),
                year: row.year,
                sc_id: ScId(row.sc_id),
                citations: row.citations,
                journal_if: row.journal_if,
                doc_type: row.doc_type.parse().map_err(|e: String| schema(&pub_file, i, e))?,
            })
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;

    let byline_file = file_label(&files.bylines);
    let mut grouped: BTreeMap<PubId, Vec<BylineEntry>> = BTreeMap::new();
    for (i, row) in read_rows::<BylineRow>(&files.bylines)?.into_iter().enumerate() {
        let pub_id = PubId(nonempty(&byline_file, i, "pub_id", row.pub_id)?);
        grouped.entry(pub_id).or_default().push(BylineEntry {
            position: row.position,
            author_key: row.author_key,
            university_id: row.university_id,
            professor_id: row.professor_id.filter(|s| !s.is_empty()).map(ProfessorId),
        });
    }
    let bylines = grouped
        .into_iter()
        .map(|(pub_id, entries)| Byline::new(pub_id, entries))
        .collect::<Result<Vec<_>, _>>()?;

    Corpus::new(config, taxonomy, professors, publications, bylines, weights)
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CorpusError> {
    let io_err = |source: io::Error| CorpusError::Io {
        path: path.to_owned(),
        source,
    };
    let csv_err = |source: csv::Error| CorpusError::Csv {
        file: file_label(path),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)
}

/// Writes the corpus back out as the five CSV files plus `config.txt`.
///
/// Professors excluded at load time are not written.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<CorpusFiles, CorpusError> {
    fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let files = CorpusFiles::in_dir(dir);
    write_rows(
        &files.professors,
        corpus.professors().map(|p| ProfessorRow {
            professor_id: p.id.0.clone(),
            sds_id: p.sds_id.0.clone(),
            academic_rank: p.academic_rank.to_string(),
            years_on_staff: p.years_on_staff,
        }),
    )?;
    write_rows(
        &files.publications,
        corpus.publications().map(|p| PublicationRow {
            pub_id: p.id.0.clone(),
            year: p.year,
            sc_id: p.sc_id.0.clone(),
            citations: p.citations,
            journal_if: p.journal_if,
            doc_type: p.doc_type.to_string(),
        }),
    )?;
    write_rows(
        &files.bylines,
        corpus.bylines().flat_map(|b| {
            b.entries().iter().map(move |e| BylineRow {
                pub_id: b.pub_id.0.clone(),
                position: e.position,
                author_key: e.author_key.clone(),
                university_id: e.university_id.clone(),
                professor_id: e.professor_id.as_ref().map(|p| p.0.clone()),
            })
        }),
    )?;
    write_rows(
        &files.taxonomy,
        corpus.taxonomy().sds.iter().map(|(sds, info)| TaxonomyRow {
            sds_id: sds.0.clone(),
            uda_id: info.uda_id.0.clone(),
            byline_policy: info.policy.to_string(),
        }),
    )?;
    write_rows(
        &files.weights,
        corpus.weights().iter().map(|(sc, window, w)| WeightsRow {
            sc_id: sc.0.clone(),
            window_years: window,
            w_citation: w.citation,
            w_if: w.impact_factor,
        }),
    )?;
    let config_path = dir.join(CorpusFiles::CONFIG);
    fs::write(&config_path, corpus.config().to_kv_string()).map_err(|source| CorpusError::Io {
        path: config_path,
        source,
    })?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn minimal(dir: &Path) {
        write(
            dir,
            "professors.csv",
            "professor_id,sds_id,academic_rank,years_on_staff\nP1,ING-IND/07,full,2\n",
        );
        write(
            dir,
            "publications.csv",
            "pub_id,year,sc_id,citations,journal_if,doc_type\nA1,2016,SC1,3,1.5,article\n",
        );
        write(
            dir,
            "bylines.csv",
            "pub_id,position,author_key,university_id,professor_id\nA1,1,k1,U1,P1\n",
        );
        write(
            dir,
            "taxonomy.csv",
            "sds_id,uda_id,byline_policy\nING-IND/07,9,alphabetical\n",
        );
        write(
            dir,
            "weights.csv",
            "sc_id,window_years,w_citation,w_if\nSC1,3,0.8,0.2\n",
        );
    }

    fn config() -> ObservationConfig {
        ObservationConfig::new(2015, 2017, 2018).unwrap()
    }

    #[test]
    fn citation_window_examples() {
        assert_eq!(citation_window(2015, 2018).unwrap(), 4);
        assert_eq!(citation_window(2018, 2018).unwrap(), 1);
        assert_eq!(citation_window(2017, 2018).unwrap(), 2);
        assert!(matches!(
            citation_window(2019, 2018),
            Err(CorpusError::WindowOrder { .. })
        ));
    }

    #[test]
    fn loads_smallest_corpus() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        let corpus = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap();
        assert_eq!(corpus.num_professors(), 1);
        assert_eq!(corpus.num_publications(), 1);
        let p = corpus.professor(&"P1".into()).unwrap();
        assert_eq!(p.uda_id.as_str(), "9");
        assert_eq!(corpus.authorships(&"P1".into()), &[(PubId::from("A1"), 0)]);
        assert!(corpus.report().excluded_professors.is_empty());
    }

    #[test]
    fn short_tenure_professor_is_excluded_and_unlinked() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "professors.csv",
            "professor_id,sds_id,academic_rank,years_on_staff\nP1,ING-IND/07,full,2\nP2,ING-IND/07,assistant,1\n",
        );
        write(
            dir.path(),
            "bylines.csv",
            "pub_id,position,author_key,university_id,professor_id\nA1,1,k1,U1,P1\nA1,2,k2,U1,P2\n",
        );
        let corpus = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap();
        assert_eq!(corpus.num_professors(), 1);
        assert_eq!(corpus.report().excluded_professors, vec![ProfessorId::from("P2")]);
        assert_eq!(corpus.report().unlinked_authorships, 1);
        let byline = corpus.byline(&"A1".into()).unwrap();
        assert_eq!(byline.len(), 2);
        assert!(byline.entries()[1].professor_id.is_none());
    }

    #[test]
    fn byline_gap_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "bylines.csv",
            "pub_id,position,author_key,university_id,professor_id\nA1,1,k1,U1,P1\nA1,3,k3,U2,\n",
        );
        let err = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap_err();
        match err {
            CorpusError::Byline { pub_id, .. } => assert_eq!(pub_id.as_str(), "A1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_position_is_rejected() {
        let err = Byline::new(
            "X".into(),
            vec![
                BylineEntry {
                    position: 1,
                    author_key: "a".into(),
                    university_id: "u".into(),
                    professor_id: None,
                },
                BylineEntry {
                    position: 1,
                    author_key: "b".into(),
                    university_id: "u".into(),
                    professor_id: None,
                },
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate position 1"));
    }

    #[test]
    fn unknown_sds_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "professors.csv",
            "professor_id,sds_id,academic_rank,years_on_staff\nP1,ING-IND/07,full,2\nP9,MAT/04,full,3\n",
        );
        let err = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap_err();
        match err {
            CorpusError::Schema { file, line, message } => {
                assert_eq!(file, "professors.csv");
                assert_eq!(line, 3);
                assert!(message.contains("MAT/04"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_sc_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "publications.csv",
            "pub_id,year,sc_id,citations,journal_if,doc_type\nA1,2016,SC9,3,1.5,article\n",
        );
        let err = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap_err();
        assert!(matches!(err, CorpusError::Schema { ref message, .. } if message.contains("SC9")));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "publications.csv",
            "pub_id,year,sc_id,citations,journal_if,doc_type\nA1,2016,SC1,3,1.5,article\nA1,2017,SC1,0,1.5,review\n",
        );
        let err = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateKey { kind: "pub_id", .. }));

        minimal(dir.path());
        write(
            dir.path(),
            "professors.csv",
            "professor_id,sds_id,academic_rank,years_on_staff\nP1,ING-IND/07,full,2\nP1,ING-IND/07,full,3\n",
        );
        let err = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::DuplicateKey {
                kind: "professor_id",
                ..
            }
        ));
    }

    #[test]
    fn dangling_professor_link_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "bylines.csv",
            "pub_id,position,author_key,university_id,professor_id\nA1,1,k1,U1,P7\n",
        );
        let err = load_corpus(&CorpusFiles::in_dir(dir.path()), config()).unwrap_err();
        assert!(err.to_string().contains("P7"));
    }

    #[test]
    fn year_outside_period_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        write(
            dir.path(),
            "publications.csv",
            "pub_id,year,sc_id,citations,journal_if,doc_type\nA1,2014,SC1,3,1.5,article\n",
        );
        assert!(load_corpus(&CorpusFiles::in_dir(dir.path()), config()).is_err());
    }

    #[test]
    fn load_is_idempotent_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        minimal(dir.path());
        let files = CorpusFiles::in_dir(dir.path());
        let a = load_corpus(&files, config()).unwrap();
        let b = load_corpus(&files, config()).unwrap();
        assert_eq!(a, b);

        let out = tempfile::tempdir().unwrap();
        let written = write_corpus(&a, out.path()).unwrap();
        let c = load_corpus(&written, config()).unwrap();
        assert_eq!(a, c);
        let round = ObservationConfig::from_file(&out.path().join("config.txt")).unwrap();
        assert_eq!(round, config());
    }

    #[test]
    fn config_parsing() {
        let c = ObservationConfig::from_kv_str(
            "# census\nperiod_start=2015\nperiod_end = 2017\nobservation_year=2018\ncohort_key=sds_and_rank\n",
        )
        .unwrap();
        assert_eq!(c.cohort_kind, CohortKind::SdsAndRank);
        assert!(ObservationConfig::from_kv_str("period_start=2018\nperiod_end=2017\nobservation_year=2018").is_err());
        assert!(ObservationConfig::from_kv_str("period_start=2015\nperiod_end=2017").is_err());
        assert!(
            ObservationConfig::from_kv_str("period_start=2015\nperiod_end=2017\nobservation_year=2018\nfoo=1").is_err()
        );
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(0.0, 0.0).is_err());
        assert!(Weights::new(-0.1, 1.0).is_err());
        assert!(Weights::new(f64::NAN, 1.0).is_err());
        assert!(Weights::new(1.0, 0.0).is_ok());
    }
}
