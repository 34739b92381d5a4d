//! Seeded synthetic corpora.
//!
//! # Randomness
//!
//! Every draw comes from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`, which
//! guarantees a stable output stream across versions). Each SDS gets its own
//! stream, keyed by 32 bytes taken from a SplitMix64 sequence started at
//! `seed ^ (sds_index * 0x9E3779B97F4A7C15)`. Only `next_u64` is used;
//! derived draws are:
//!
//! * uniform `[0, 1)`: `(x >> 11) * 2^-53`
//! * uniform integer in `[lo, hi]`: `lo + ((x as u128 * span) >> 64)`
//! * geometric on `{1, 2, ..}` with mean `m`: `1 + floor(ln(1 - u) / ln(1 - 1/m))`
//! * standard normal: Box-Muller, `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`
//! * citations of a cited paper: `1 + floor(s * ((1 - u)^(-1/alpha) - 1))`
//!   (discretised Lomax), with `s` solved numerically so the mean matches
//! * journal IF: `mean * exp(sigma * z - sigma^2 / 2)`, rounded to 3 decimals
//!   and floored at 0.001
//!
//! Identical specs therefore yield identical corpora on every platform.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::corpus::{
    parse_kv, AcademicRank, Byline, BylineEntry, BylinePolicy, Corpus, CorpusError, DocType, ObservationConfig,
    ProfessorId, ProfessorRecord, PubId, Publication, ScId, SdsId, SdsInfo, Taxonomy, UdaId, Weights, WeightsTable,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_sds: usize,
    /// Inclusive range of cohort sizes.
    pub professors_per_sds: (usize, usize),
    pub n_uda: usize,
    /// Probability a professor has no publications.
    pub unproductive_share: f64,
    /// Mean publication count of productive professors (geometric, >= 1).
    pub mean_pubs: f64,
    /// Probability a publication is uncited; one value for all SDSs or one per SDS.
    pub uncited_share: Vec<f64>,
    /// Mean citations of cited publications (>= 1).
    pub citation_mean: f64,
    /// Lomax tail index of the citation law (> 1; smaller is heavier).
    pub citation_tail: f64,
    pub if_mean: f64,
    pub if_sigma: f64,
    /// Mean byline length (geometric on `{1, 2, ..}`).
    pub authors_mean: f64,
    pub n_universities: usize,
    pub n_subject_categories: usize,
    /// Probability a publication is in its SDS's home subject category.
    pub home_sc_share: f64,
    /// Probability a second professor of the same SDS joins a byline.
    pub coauthor_share: f64,
    /// Byline policy per SDS, cycled.
    pub policies: Vec<BylinePolicy>,
    /// `(w_citation, w_if)` for citation windows 1, 2, ..; must cover every
    /// window of the observation period.
    pub weights: Vec<(f64, f64)>,
    pub period_start: i32,
    pub period_end: i32,
    pub observation_year: i32,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_sds: 4,
            professors_per_sds: (20, 40),
            n_uda: 2,
            unproductive_share: 0.08,
            mean_pubs: 4.0,
            uncited_share: vec![0.15],
            citation_mean: 6.0,
            citation_tail: 3.0,
            if_mean: 2.5,
            if_sigma: 0.6,
            authors_mean: 4.0,
            n_universities: 30,
            n_subject_categories: 6,
            home_sc_share: 0.8,
            coauthor_share: 0.1,
            policies: vec![BylinePolicy::Alphabetical, BylinePolicy::Positional],
            weights: vec![(0.55, 0.45), (0.7, 0.3), (0.85, 0.15), (0.95, 0.05)],
            period_start: 2015,
            period_end: 2017,
            observation_year: 2018,
            seed: 42,
        }
    }
}

fn spec_err(msg: impl Into<String>) -> SynthError {
    SynthError::Spec(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, SynthError> {
    raw.trim()
        .parse()
        .map_err(|_| spec_err(format!("`{key}`: cannot parse `{raw}`")))
}

impl SynthSpec {
    /// Parses `key=value` lines over the defaults. Keys are the field names;
    /// `professors_per_sds` takes `N` or `MIN..MAX`, `uncited_share` and
    /// `policies` take comma lists, `weights` takes `wc:wif` pairs separated
    /// by commas.
    pub fn from_kv_str(text: &str) -> Result<Self, SynthError> {
        let pairs = parse_kv(text).map_err(SynthError::Spec)?;
        let mut spec = Self::default();
        for (key, raw) in &pairs {
            let k = key.as_str();
            match k {
                "n_sds" => spec.n_sds = parse_num(k, raw)?,
                "professors_per_sds" => {
                    spec.professors_per_sds = match raw.split_once("..") {
                        Some((lo, hi)) => (parse_num(k, lo)?, parse_num(k, hi)?),
                        None => {
                            let n = parse_num(k, raw)?;
                            (n, n)
                        }
                    }
                }
                "n_uda" => spec.n_uda = parse_num(k, raw)?,
                "unproductive_share" => spec.unproductive_share = parse_num(k, raw)?,
                "mean_pubs" => spec.mean_pubs = parse_num(k, raw)?,
                "uncited_share" => {
                    spec.uncited_share = raw.split(',').map(|v| parse_num(k, v)).collect::<Result<_, _>>()?
                }
                "citation_mean" => spec.citation_mean = parse_num(k, raw)?,
                "citation_tail" => spec.citation_tail = parse_num(k, raw)?,
                "if_mean" => spec.if_mean = parse_num(k, raw)?,
                "if_sigma" => spec.if_sigma = parse_num(k, raw)?,
                "authors_mean" => spec.authors_mean = parse_num(k, raw)?,
                "n_universities" => spec.n_universities = parse_num(k, raw)?,
                "n_subject_categories" => spec.n_subject_categories = parse_num(k, raw)?,
                "home_sc_share" => spec.home_sc_share = parse_num(k, raw)?,
                "coauthor_share" => spec.coauthor_share = parse_num(k, raw)?,
                "policies" => {
                    spec.policies = raw
                        .split(',')
                        .map(|p| p.parse().map_err(SynthError::Spec))
                        .collect::<Result<_, _>>()?
                }
                "weights" => {
                    spec.weights = raw
                        .split(',')
                        .map(|pair| {
                            let (c, i) = pair
                                .split_once(':')
                                .ok_or_else(|| spec_err(format!("`weights`: expected wc:wif, got `{pair}`")))?;
                            Ok((parse_num(k, c)?, parse_num(k, i)?))
                        })
                        .collect::<Result<_, SynthError>>()?
                }
                "period_start" => spec.period_start = parse_num(k, raw)?,
                "period_end" => spec.period_end = parse_num(k, raw)?,
                "observation_year" => spec.observation_year = parse_num(k, raw)?,
                "seed" => spec.seed = parse_num(k, raw)?,
                _ => return Err(spec_err(format!("unknown key `{key}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    fn max_window(&self) -> usize {
        (self.observation_year - self.period_start + 1) as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let share = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(spec_err(format!("`{name}` must be in [0, 1], got {v}")))
            }
        };
        if self.n_sds == 0 || self.n_uda == 0 || self.n_universities == 0 || self.n_subject_categories == 0 {
            return Err(spec_err(
                "counts (n_sds, n_uda, n_universities, n_subject_categories) must be positive",
            ));
        }
        let (lo, hi) = self.professors_per_sds;
        if lo == 0 || lo > hi {
            return Err(spec_err(format!("professors_per_sds range {lo}..{hi} is invalid")));
        }
        share("unproductive_share", self.unproductive_share)?;
        share("home_sc_share", self.home_sc_share)?;
        share("coauthor_share", self.coauthor_share)?;
        if self.uncited_share.len() != 1 && self.uncited_share.len() != self.n_sds {
            return Err(spec_err(format!(
                "uncited_share needs 1 or n_sds = {} values, got {}",
                self.n_sds,
                self.uncited_share.len()
            )));
        }
        for v in &self.uncited_share {
            share("uncited_share", *v)?;
        }
        for (name, v) in [
            ("mean_pubs", self.mean_pubs),
            ("citation_mean", self.citation_mean),
            ("authors_mean", self.authors_mean),
        ] {
            if !v.is_finite() || v < 1.0 {
                return Err(spec_err(format!("`{name}` must be >= 1, got {v}")));
            }
        }
        if !self.citation_tail.is_finite() || self.citation_tail <= 1.0 {
            return Err(spec_err("`citation_tail` must be > 1"));
        }
        if !self.if_mean.is_finite() || !self.if_sigma.is_finite() || self.if_mean <= 0.0 || self.if_sigma < 0.0 {
            return Err(spec_err("`if_mean` must be > 0 and `if_sigma` >= 0"));
        }
        if self.policies.is_empty() {
            return Err(spec_err("`policies` is empty"));
        }
        ObservationConfig::new(self.period_start, self.period_end, self.observation_year)?;
        if self.period_end - self.period_start + 1 < 2 {
            return Err(spec_err("observation period must span at least 2 years"));
        }
        if self.weights.len() < self.max_window() {
            return Err(spec_err(format!(
                "`weights` must cover citation windows 1..={}, got {} pairs",
                self.max_window(),
                self.weights.len()
            )));
        }
        for (c, i) in &self.weights {
            Weights::new(*c, *i).map_err(SynthError::Spec)?;
        }
        Ok(())
    }

    fn uncited_for(&self, sds_index: usize) -> f64 {
        if self.uncited_share.len() == 1 {
            self.uncited_share[0]
        } else {
            self.uncited_share[sds_index]
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for one SDS; see the module docs for the derivation.
fn sds_stream(seed: u64, sds_index: usize) -> Draws {
    let mut state = seed ^ (sds_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    Draws(ChaCha8Rng::from_seed(key))
}

pub(crate) struct Draws(ChaCha8Rng);

impl Draws {
    #[cfg(test)]
    pub(crate) fn from_seed(seed: u64) -> Self {
        sds_stream(seed, 0)
    }

    pub(crate) fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub(crate) fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        let span = (hi - lo + 1) as u128;
        lo + ((self.0.next_u64() as u128 * span) >> 64) as usize
    }

    pub(crate) fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub(crate) fn geometric(&mut self, mean: f64) -> usize {
        if mean <= 1.0 {
            return 1;
        }
        let u = self.unit();
        1 + ((1.0 - u).ln() / (1.0 - 1.0 / mean).ln()).floor() as usize
    }

    pub(crate) fn normal(&mut self) -> f64 {
        let u1 = self.unit();
        let u2 = self.unit();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub(crate) fn citations(&mut self, law: &CitationLaw) -> u64 {
        if law.scale == 0.0 {
            return 1;
        }
        let u = self.unit();
        let x = law.scale * ((1.0 - u).powf(-1.0 / law.tail) - 1.0);
        1 + x.floor().min(1e12) as u64
    }

    pub(crate) fn impact_factor(&mut self, mean: f64, sigma: f64) -> f64 {
        let raw = mean * (sigma * self.normal() - sigma * sigma / 2.0).exp();
        ((raw * 1000.0).round() / 1000.0).max(0.001)
    }
}

/// Discretised Lomax law with the scale fitted to a target mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CitationLaw {
    pub(crate) tail: f64,
    pub(crate) scale: f64,
}

impl CitationLaw {
    /// `E[1 + floor(X)] = 1 + sum_{k >= 1} (1 + k/s)^(-alpha)` for
    /// `X ~ Lomax(alpha, s)`.
    pub(crate) fn mean_for_scale(tail: f64, scale: f64) -> f64 {
        const TERMS: usize = 20_000;
        let mut sum = 0.0;
        for k in 1..=TERMS {
            sum += (1.0 + k as f64 / scale).powf(-tail);
        }
        // integral tail from TERMS + 1/2
        let x0 = TERMS as f64 + 0.5;
        sum += scale / (tail - 1.0) * (1.0 + x0 / scale).powf(1.0 - tail);
        1.0 + sum
    }

    pub(crate) fn fit(mean: f64, tail: f64) -> Self {
        if mean <= 1.0 {
            return Self { tail, scale: 0.0 };
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while Self::mean_for_scale(tail, hi) < mean {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if Self::mean_for_scale(tail, mid) < mean {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self {
            tail,
            scale: 0.5 * (lo + hi),
        }
    }
}

const DOC_TYPES: [(f64, DocType); 4] = [
    (0.80, DocType::Article),
    (0.90, DocType::Review),
    (0.95, DocType::Letter),
    (1.00, DocType::Proceeding),
];

fn sc_name(i: usize) -> ScId {
    ScId(format!("SC{:02}", i + 1))
}

/// Generates a corpus (with its weights table) from `spec`.
pub fn generate_corpus(spec: &SynthSpec) -> Result<Corpus, SynthError> {
    spec.validate()?;
    let law = CitationLaw::fit(spec.citation_mean, spec.citation_tail);

    let mut taxonomy = Taxonomy::default();
    let mut weights = WeightsTable::new();
    for sc in 0..spec.n_subject_categories {
        taxonomy.sc_ids.insert(sc_name(sc));
        for (w, (c, i)) in spec.weights.iter().enumerate() {
            weights.insert(
                sc_name(sc),
                w as u32 + 1,
                Weights::new(*c, *i).map_err(SynthError::Spec)?,
            );
        }
    }

    let mut professors = Vec::new();
    let mut publications = Vec::new();
    let mut bylines = Vec::new();
    for s in 0..spec.n_sds {
        let mut rng = sds_stream(spec.seed, s);
        let sds_id = SdsId(format!("SDS{:03}", s + 1));
        taxonomy.sds.insert(
            sds_id.clone(),
            SdsInfo {
                uda_id: UdaId(format!("UDA{:02}", s % spec.n_uda + 1)),
                policy: spec.policies[s % spec.policies.len()],
            },
        );
        let home_sc = s % spec.n_subject_categories;
        let uncited = spec.uncited_for(s);
        let n_prof = rng.int_inclusive(spec.professors_per_sds.0, spec.professors_per_sds.1);
        let max_years = (spec.period_end - spec.period_start + 1) as usize;
        let ids: Vec<ProfessorId> = (0..n_prof)
            .map(|j| ProfessorId(format!("S{:03}P{:04}", s + 1, j + 1)))
            .collect();
        for id in &ids {
            professors.push(ProfessorRecord {
                id: id.clone(),
                sds_id: sds_id.clone(),
                academic_rank: AcademicRank::ALL[rng.int_inclusive(0, 2)],
                years_on_staff: rng.int_inclusive(2, max_years) as u32,
            });
        }
        let mut pub_counter = 0usize;
        for (j, id) in ids.iter().enumerate() {
            if rng.bernoulli(spec.unproductive_share) {
                continue;
            }
            let n_pubs = rng.geometric(spec.mean_pubs);
            for _ in 0..n_pubs {
                pub_counter += 1;
                let pub_id = PubId(format!("S{:03}A{:05}", s + 1, pub_counter));
                let year = spec.period_start + rng.int_inclusive(0, max_years - 1) as i32;
                let sc = if rng.bernoulli(spec.home_sc_share) {
                    home_sc
                } else {
                    rng.int_inclusive(0, spec.n_subject_categories - 1)
                };
                let citations = if rng.bernoulli(uncited) { 0 } else { rng.citations(&law) };
                let journal_if = rng.impact_factor(spec.if_mean, spec.if_sigma);
                let u = rng.unit();
                let doc_type = DOC_TYPES
                    .iter()
                    .find(|(p, _)| u < *p)
                    .map(|(_, d)| *d)
                    .unwrap_or(DocType::Article);

                let n_authors = rng.geometric(spec.authors_mean);
                let mut links: BTreeMap<usize, ProfessorId> = BTreeMap::new();
                links.insert(rng.int_inclusive(0, n_authors - 1), id.clone());
                if n_authors >= 2 && n_prof >= 2 && rng.bernoulli(spec.coauthor_share) {
                    let mut other = rng.int_inclusive(0, n_prof - 2);
                    if other >= j {
                        other += 1;
                    }
                    let mut slot = rng.int_inclusive(0, n_authors - 2);
                    if links.contains_key(&slot) {
                        slot = n_authors - 1;
                    }
                    links.insert(slot, ids[other].clone());
                }
                let entries = (0..n_authors)
                    .map(|k| {
                        let university = rng.int_inclusive(1, spec.n_universities);
                        let professor_id = links.get(&k).cloned();
                        BylineEntry {
                            position: k as u32 + 1,
                            author_key: match &professor_id {
                                Some(p) => p.0.clone(),
                                None => format!("{pub_id}-{}", k + 1),
                            },
                            university_id: format!("U{university:03}"),
                            professor_id,
                        }
                    })
                    .collect();
                bylines.push(Byline::new(pub_id.clone(), entries)?);
                publications.push(Publication {
                    id: pub_id,
                    year,
                    sc_id: sc_name(sc),
                    citations,
                    journal_if,
                    doc_type,
                });
            }
        }
    }

    let config = ObservationConfig::new(spec.period_start, spec.period_end, spec.observation_year)?;
    Ok(Corpus::new(
        config,
        taxonomy,
        professors,
        publications,
        bylines,
        weights,
    )?)
}
