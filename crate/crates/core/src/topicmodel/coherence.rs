//! UMass topic coherence over the training documents.

use super::{top_word_indices, TopicModel};
use crate::ingest::DocTermMatrix;
use crate::{Error, Result};

/// Sorted document indices per vocabulary term.
#[derive(Debug, Clone)]
pub struct DocumentSets {
    by_term: Vec<Vec<u32>>,
}

impl DocumentSets {
    pub fn from_matrix(matrix: &DocTermMatrix) -> Self {
        let mut by_term = vec![Vec::new(); matrix.n_terms()];
        for (d, row) in matrix.rows.iter().enumerate() {
            for e in row {
                by_term[e.term].push(d as u32);
            }
        }
        DocumentSets { by_term }
    }

    pub fn from_sets(by_term: Vec<Vec<u32>>) -> Self {
        let by_term = by_term
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        DocumentSets { by_term }
    }

    pub fn count(&self, term: usize) -> usize {
        self.by_term[term].len()
    }

    pub fn co_count(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.by_term[a], &self.by_term[b]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// UMass score of an ordered word list (highest-ranked first):
/// sum over m > l of ln((D(w_m, w_l) + 1) / D(w_l)).
pub fn umass_score(words: &[usize], sets: &DocumentSets) -> Result<f64> {
    let mut score = 0.0;
    for m in 1..words.len() {
        for l in 0..m {
            let base = sets.count(words[l]);
            if base == 0 {
                return Err(Error::contract(format!(
                    "term {} occurs in no document",
                    words[l]
                )));
            }
            score += ((sets.co_count(words[m], words[l]) + 1) as f64 / base as f64).ln();
        }
    }
    Ok(score)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceScores {
    pub per_topic: Vec<f64>,
    pub mean: f64,
}

pub fn umass_coherence(
    model: &TopicModel,
    documents: &DocTermMatrix,
    top_m: usize,
) -> Result<CoherenceScores> {
    if top_m < 2 {
        return Err(Error::config("coherence needs top_m >= 2"));
    }
    let sets = DocumentSets::from_matrix(documents);
    let per_topic = (0..model.k())
        .map(|t| umass_score(&top_word_indices(model, t, top_m), &sets))
        .collect::<Result<Vec<f64>>>()?;
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceScores { per_topic, mean })
}
