//! Field baselines and rescaling of citations and journal impact factors.
//!
//! Citations are divided by the mean citation count of the *cited*
//! publications of the same year and subject category; impact factors by the
//! mean of the positive impact factors of the same cell.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, PubId, Publication, ScId};

#[derive(Debug, Error, PartialEq)]
pub enum NormalizationError {
    #[error("no baseline cell for year {year}, subject category `{sc_id}` (publication `{pub_id}`)")]
    MissingCell { pub_id: PubId, year: i32, sc_id: ScId },
    #[error("{what} baseline undefined for year {year}, subject category `{sc_id}` (publication `{pub_id}`)")]
    BaselineUndefined {
        pub_id: PubId,
        year: i32,
        sc_id: ScId,
        what: &'static str,
    },
    #[error("baselines file: {0}")]
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCell {
    pub year: i32,
    pub sc_id: ScId,
    /// Mean citations over the cited publications of the cell.
    pub mean_cited_citations: Option<f64>,
    /// Mean impact factor over the publications of the cell with positive IF.
    pub mean_if: Option<f64>,
    pub n_publications: u64,
    pub n_cited: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaselineTable {
    cells: BTreeMap<(i32, ScId), BaselineCell>,
}

impl BaselineTable {
    /// One cell per (year, subject category) present in `publications`.
    ///
    /// IF sums are accumulated in iteration order, so callers that need
    /// bit-identical results must feed publications in a fixed order (the
    /// corpus iterates by publication id).
    pub fn from_publications<'a>(publications: impl IntoIterator<Item = &'a Publication>) -> Self {
        #[derive(Default)]
        struct Acc {
            n: u64,
            n_cited: u64,
            citation_sum: u64,
            n_if: u64,
            if_sum: f64,
        }
        let mut acc: BTreeMap<(i32, ScId), Acc> = BTreeMap::new();
        for p in publications {
            let a = acc.entry((p.year, p.sc_id.clone())).or_default();
            a.n += 1;
            if p.citations > 0 {
                a.n_cited += 1;
                a.citation_sum += p.citations;
            }
            if p.journal_if > 0.0 {
                a.n_if += 1;
                a.if_sum += p.journal_if;
            }
        }
        let cells = acc
            .into_iter()
            .map(|((year, sc_id), a)| {
                let cell = BaselineCell {
                    year,
                    sc_id: sc_id.clone(),
                    mean_cited_citations: (a.n_cited > 0).then(|| a.citation_sum as f64 / a.n_cited as f64),
                    mean_if: (a.n_if > 0).then(|| a.if_sum / a.n_if as f64),
                    n_publications: a.n,
                    n_cited: a.n_cited,
                };
                ((year, sc_id), cell)
            })
            .collect();
        Self { cells }
    }

    pub fn from_cells(cells: impl IntoIterator<Item = BaselineCell>) -> Self {
        Self {
            cells: cells.into_iter().map(|c| ((c.year, c.sc_id.clone()), c)).collect(),
        }
    }

    pub fn get(&self, year: i32, sc_id: &ScId) -> Option<&BaselineCell> {
        self.cells.get(&(year, sc_id.clone()))
    }

    pub fn cells(&self) -> impl Iterator<Item = &BaselineCell> {
        self.cells.values()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn cell_for(&self, p: &Publication) -> Result<&BaselineCell, NormalizationError> {
        self.get(p.year, &p.sc_id)
            .ok_or_else(|| NormalizationError::MissingCell {
                pub_id: p.id.clone(),
                year: p.year,
                sc_id: p.sc_id.clone(),
            })
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), NormalizationError> {
        let err = |e: csv::Error| NormalizationError::File(e.to_string());
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        for c in self.cells() {
            w.serialize(BaselineRow {
                year: c.year,
                sc_id: c.sc_id.0.clone(),
                mean_cited_citations: c.mean_cited_citations,
                mean_if: c.mean_if,
                n_publications: c.n_publications,
                n_cited: c.n_cited,
            })
            .map_err(err)?;
        }
        w.flush().map_err(|e| NormalizationError::File(e.to_string()))
    }

    /// Reads an exported table; empty mean fields are undefined baselines.
    pub fn read_csv(path: &Path) -> Result<Self, NormalizationError> {
        let file = fs::File::open(path).map_err(|e| NormalizationError::File(format!("{}: {e}", path.display())))?;
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let mut cells = Vec::new();
        for row in r.deserialize::<BaselineRow>() {
            let row = row.map_err(|e| NormalizationError::File(e.to_string()))?;
            if row.n_cited > row.n_publications {
                return Err(NormalizationError::File(format!(
                    "cell {}/{}: n_cited > n_publications",
                    row.year, row.sc_id
                )));
            }
            cells.push(BaselineCell {
                year: row.year,
                sc_id: ScId(row.sc_id),
                mean_cited_citations: row.mean_cited_citations,
                mean_if: row.mean_if,
                n_publications: row.n_publications,
                n_cited: row.n_cited,
            });
        }
        Ok(Self::from_cells(cells))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BaselineRow {
    year: i32,
    sc_id: String,
    mean_cited_citations: Option<f64>,
    mean_if: Option<f64>,
    n_publications: u64,
    n_cited: u64,
}

/// Baselines of every (year, subject category) cell of the corpus.
pub fn build_baselines(corpus: &Corpus) -> BaselineTable {
    BaselineTable::from_publications(corpus.publications())
}

/// Citations divided by the cell's mean over cited publications; 0 for an
/// uncited publication whatever the baseline.
pub fn normalized_citations(p: &Publication, baselines: &BaselineTable) -> Result<f64, NormalizationError> {
    if p.citations == 0 {
        return Ok(0.0);
    }
    let cell = baselines.cell_for(p)?;
    let mean = cell
        .mean_cited_citations
        .filter(|m| *m > 0.0)
        .ok_or_else(|| NormalizationError::BaselineUndefined {
            pub_id: p.id.clone(),
            year: p.year,
            sc_id: p.sc_id.clone(),
            what: "citation",
        })?;
    Ok(p.citations as f64 / mean)
}

/// Journal IF divided by the cell's mean positive IF; 0 for a venue without IF.
pub fn normalized_if(p: &Publication, baselines: &BaselineTable) -> Result<f64, NormalizationError> {
    if p.journal_if == 0.0 {
        return Ok(0.0);
    }
    let cell = baselines.cell_for(p)?;
    let mean = cell
        .mean_if
        .filter(|m| *m > 0.0)
        .ok_or_else(|| NormalizationError::BaselineUndefined {
            pub_id: p.id.clone(),
            year: p.year,
            sc_id: p.sc_id.clone(),
            what: "impact factor",
        })?;
    Ok(p.journal_if / mean)
}
