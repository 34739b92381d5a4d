#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use citeshift::corpus::{ProfessorRecord, SdsInfo};
use citeshift::{
    AcademicRank, Byline, BylineEntry, BylinePolicy, Corpus, DocType, ObservationConfig, ProfessorId, PubId,
    Publication, ScId, SdsId, Taxonomy, UdaId, Weights, WeightsTable,
};

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

pub const PERIOD: (i32, i32) = (2015, 2017);
pub const OBSERVATION_YEAR: i32 = 2018;

pub fn sc(i: usize) -> ScId {
    ScId(format!("SC{i}"))
}

/// Random publication list: few cells, frequent zero citations and IFs.
pub fn random_publications(rng: &mut TestRng, n: usize) -> Vec<Publication> {
    (0..n)
        .map(|i| Publication {
            id: PubId(format!("A{i:03}")),
            year: PERIOD.0 + rng.below(3) as i32,
            sc_id: sc(rng.below(3)),
            citations: if rng.chance(0.3) { 0 } else { rng.range(1, 200) as u64 },
            journal_if: if rng.chance(0.1) {
                0.0
            } else {
                (rng.range(1, 20_000) as f64) / 1000.0
            },
            doc_type: DocType::Article,
        })
        .collect()
}

pub fn random_byline(rng: &mut TestRng, pub_id: &PubId, n: usize, universities: usize) -> Byline {
    let entries = (0..n)
        .map(|k| BylineEntry {
            position: k as u32 + 1,
            author_key: format!("{pub_id}-{k}"),
            university_id: format!("U{}", rng.below(universities)),
            professor_id: None,
        })
        .collect();
    Byline::new(pub_id.clone(), entries).unwrap()
}

/// Everything `Corpus::new` needs, kept open for tests that relink
/// authorships or change staff years before building.
#[derive(Clone)]
pub struct CorpusParts {
    pub config: ObservationConfig,
    pub taxonomy: Taxonomy,
    pub professors: Vec<ProfessorRecord>,
    pub publications: Vec<Publication>,
    pub bylines: Vec<Byline>,
    pub weights: WeightsTable,
}

impl CorpusParts {
    pub fn build(self) -> Corpus {
        Corpus::new(
            self.config,
            self.taxonomy,
            self.professors,
            self.publications,
            self.bylines,
            self.weights,
        )
        .unwrap()
    }

    /// Links `professor` at entry `k` of byline `byline_index`.
    pub fn link_at(&mut self, byline_index: usize, k: usize, professor: &ProfessorId) {
        let byline = &self.bylines[byline_index];
        let mut entries = byline.entries().to_vec();
        entries[k].professor_id = Some(professor.clone());
        entries[k].author_key = professor.0.clone();
        self.bylines[byline_index] = Byline::new(byline.pub_id.clone(), entries).unwrap();
    }
}

/// A small single-SDS corpus with random weights and no authorship links.
pub fn random_parts(rng: &mut TestRng, n_publications: usize, n_professors: usize) -> CorpusParts {
    let mut taxonomy = Taxonomy::default();
    let policy = if rng.chance(0.5) {
        BylinePolicy::Positional
    } else {
        BylinePolicy::Alphabetical
    };
    taxonomy.sds.insert(
        SdsId::from("SDS1"),
        SdsInfo {
            uda_id: UdaId::from("UDA1"),
            policy,
        },
    );
    let mut weights = WeightsTable::new();
    for i in 0..3 {
        taxonomy.sc_ids.insert(sc(i));
        for window in 1..=4 {
            let w = rng.unit();
            weights.insert(sc(i), window, Weights::new(w, 1.0 - w).unwrap());
        }
    }
    let publications = random_publications(rng, n_publications);
    let bylines = publications
        .iter()
        .map(|p| {
            let n = rng.range(1, 8);
            random_byline(rng, &p.id, n, 3)
        })
        .collect();
    let professors = (0..n_professors)
        .map(|j| ProfessorRecord {
            id: ProfessorId(format!("P{j:02}")),
            sds_id: SdsId::from("SDS1"),
            academic_rank: AcademicRank::ALL[j % 3],
            years_on_staff: rng.range(2, 3) as u32,
        })
        .collect();
    CorpusParts {
        config: ObservationConfig::new(PERIOD.0, PERIOD.1, OBSERVATION_YEAR).unwrap(),
        taxonomy,
        professors,
        publications,
        bylines,
        weights,
    }
}

/// One published row of the worked ranking example.
pub struct PublishedRow {
    pub id: &'static str,
    pub printed_c: &'static str,
    pub rank_c: u32,
    pub percentile_c: &'static str,
    pub printed_wc: &'static str,
    pub rank_wc: u32,
    pub percentile_wc: &'static str,
    pub delta_score: &'static str,
    pub delta_rank: &'static str,
    /// Unrounded scores consistent with the printed ones.
    pub c: f64,
    pub wc: f64,
}

macro_rules! row {
    ($id:literal, $pc:literal, $rc:literal, $qc:literal, $pw:literal, $rw:literal, $qw:literal, $ds:literal, $dr:literal, $c:literal, $wc:literal) => {
        PublishedRow {
            id: $id,
            printed_c: $pc,
            rank_c: $rc,
            percentile_c: $qc,
            printed_wc: $pw,
            rank_wc: $rw,
            percentile_wc: $qw,
            delta_score: $ds,
            delta_rank: $dr,
            c: $c,
            wc: $wc,
        }
    };
}

/// Aerospace propulsion, 26 professors.
pub const PROPULSION: [PublishedRow; 26] = [
    row!("10712", "2.703", 1, "100", "3.360", 1, "100.0", "24.3", "0 =", 2.703, 3.35983),
    row!("49114", "0.824", 2, "96", "1.268", 2, "96.0", "53.9", "0 =", 0.824, 1.26814),
    row!("49109", "0.773", 3, "92", "0.906", 3, "92.0", "17.2", "0 =", 0.773, 0.90596),
    row!("4045", "0.666", 4, "88", "0.853", 4, "88.0", "28.2", "0 =", 0.66575, 0.85349),
    row!("2590", "0.633", 5, "84", "0.759", 5, "84.0", "19.8", "0 =", 0.63315, 0.75851),
    row!("78162", "0.548", 6, "80", "0.698", 7, "76.0", "27.5", "1 ↓", 0.54783, 0.69848),
    row!("49106", "0.504", 7, "76", "0.731", 6, "80.0", "44.9", "1 ↑", 0.5044, 0.731),
    row!("4047", "0.365", 8, "72", "0.489", 8, "72.0", "34.0", "0 =", 0.365, 0.4891),
    row!("37761", "0.240", 9, "68", "0.383", 10, "64.0", "59.4", "1 ↓", 0.24, 0.38256),
    row!("4044", "0.224", 10, "64", "0.479", 9, "68.0", "113.7", "1 ↑", 0.224, 0.47869),
    row!("2597", "0.211", 11, "60", "0.340", 11, "60.0", "61.4", "0 =", 0.21096, 0.34049),
    row!("5463", "0.191", 12, "56", "0.287", 12, "56.0", "50.7", "0 =", 0.19077, 0.28749),
    row!("49118", "0.183", 13, "52", "0.268", 13, "52.0", "46.7", "0 =", 0.183, 0.26846),
    row!("49115", "0.105", 14, "48", "0.132", 14, "48.0", "26.1", "0 =", 0.105, 0.1324),
    row!("49117", "0.074", 15, "44", "0.085", 18, "32.0", "15.0", "3 ↓", 0.0737, 0.08475),
    row!("78159", "0.069", 16, "40", "0.103", 15, "44.0", "48.6", "1 ↑", 0.069, 0.10253),
    row!("2595", "0.059", 17, "36", "0.085", 17, "36.0", "43.3", "0 =", 0.0594, 0.08512),
    row!("4046", "0.059", 17, "36", "0.072", 19, "28.0", "21.3", "2 ↓", 0.0594, 0.07205),
    row!("4048", "0.047", 19, "28", "0.099", 16, "40.0", "110.6", "3 ↑", 0.047, 0.09898),
    row!("49111", "0.036", 20, "24", "0.038", 21, "20.0", "5.6", "1 ↓", 0.036, 0.03802),
    row!("2589", "0.024", 21, "20", "0.025", 22, "16.0", "5.6", "1 ↓", 0.024, 0.02534),
    row!("87212", "0.020", 22, "16", "0.040", 20, "24.0", "97.5", "2 ↑", 0.0202, 0.0399),
    row!("49113", "0.000", 23, "0", "0.012", 23, "12.0", "∞", "0 =", 0.0, 0.012),
    row!("2592", "0.000", 23, "0", "0.004", 24, "8.0", "∞", "1 ↓", 0.0, 0.004),
    row!("2599", "0.000", 23, "0", "0.000", 25, "0.0", "n.a.", "2 ↓", 0.0, 0.0),
    row!("40946", "0.000", 23, "0", "0.000", 25, "0.0", "n.a.", "2 ↓", 0.0, 0.0),
];

/// Percentile as printed, normalised to one decimal.
pub fn one_decimal(printed: &str) -> String {
    format!("{:.1}", printed.parse::<f64>().unwrap())
}
