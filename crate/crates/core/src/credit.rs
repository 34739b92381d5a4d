//! Fractional authorship credit.

use thiserror::Error;

use crate::corpus::{Byline, BylinePolicy, PubId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CreditError {
    #[error("publication `{0}` has an empty byline")]
    EmptyByline(PubId),
}

/// Shares of one publication, aligned with byline positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditVector {
    pub pub_id: PubId,
    pub weights: Vec<f64>,
}

impl CreditVector {
    /// Share of the author at the given 1-based position.
    pub fn at_position(&self, position: u32) -> Option<f64> {
        self.weights.get((position as usize).checked_sub(1)?).copied()
    }
}

/// Shares when first and last author are at the same university: 40% each,
/// the rest split evenly among the others.
fn same_university_schedule(n: usize) -> Vec<f64> {
    let mut w = vec![0.2 / (n - 2) as f64; n];
    w[0] = 0.4;
    w[n - 1] = 0.4;
    w
}

/// Shares when first and last author are at different universities: 30% to
/// first and last, 15% to second and penultimate, 10% split among the rest.
fn cross_university_schedule(n: usize) -> Vec<f64> {
    if n == 4 {
        // no "others" left for the 10%: it goes to the two middle authors
        return vec![0.3, 0.2, 0.2, 0.3];
    }
    let mut w = vec![0.1 / (n - 4) as f64; n];
    w[0] = 0.3;
    w[n - 1] = 0.3;
    w[1] = 0.15;
    w[n - 2] = 0.15;
    w
}

/// Splits a publication among its authors.
///
/// Alphabetical bylines give every author `1/n`. Positional bylines follow
/// the life-science convention: with `n >= 4`, a shared first/last
/// university yields 40/20-split/40, otherwise 30/15/10-split/15/30. Short
/// bylines fall back to `1.0`, `(0.5, 0.5)` and `(0.4, 0.2, 0.4)`.
pub fn fractional_contributions(byline: &Byline, policy: BylinePolicy) -> Result<CreditVector, CreditError> {
    let entries = byline.entries();
    let n = entries.len();
    if n == 0 {
        return Err(CreditError::EmptyByline(byline.pub_id.clone()));
    }
    let weights = match (policy, n) {
        (BylinePolicy::Alphabetical, _) => vec![1.0 / n as f64; n],
        (BylinePolicy::Positional, 1) => vec![1.0],
        (BylinePolicy::Positional, 2) => vec![0.5, 0.5],
        (BylinePolicy::Positional, 3) => same_university_schedule(3),
        (BylinePolicy::Positional, _) => {
            if entries[0].university_id == entries[n - 1].university_id {
                same_university_schedule(n)
            } else {
                cross_university_schedule(n)
            }
        }
    };
    Ok(CreditVector {
        pub_id: byline.pub_id.clone(),
        weights,
    })
}
