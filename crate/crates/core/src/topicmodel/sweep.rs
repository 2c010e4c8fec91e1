//! Exhaustive grid search over (K, alpha, beta) scored by mean UMass
//! coherence.

use serde::{Deserialize, Serialize};

use super::{fit_lda, umass_coherence, LdaConfig};
use crate::ingest::DocTermMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub k: Vec<usize>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerBudget {
    pub iterations: usize,
    pub burn_in: usize,
    pub sample_every: usize,
}

impl Default for SamplerBudget {
    fn default() -> Self {
        SamplerBudget {
            iterations: 150,
            burn_in: 50,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mean_coherence: f64,
}

/// Fits every grid point with the same budget and seed; rows come back best
/// first, grid order breaking ties.
pub fn sweep_hyperparameters(
    matrix: &DocTermMatrix,
    grid: &HyperGrid,
    budget: SamplerBudget,
    rng_seed: u64,
    top_m: usize,
) -> Result<Vec<SweepRow>> {
    if grid.k.is_empty() || grid.alpha.is_empty() || grid.beta.is_empty() {
        return Err(Error::config("hyperparameter grid is empty"));
    }
    let mut rows = Vec::new();
    for &k in &grid.k {
        for &alpha in &grid.alpha {
            for &beta in &grid.beta {
                let config = LdaConfig {
                    k,
                    alpha,
                    beta,
                    iterations: budget.iterations,
                    burn_in: budget.burn_in,
                    sample_every: budget.sample_every,
                    rng_seed,
                };
                let model = fit_lda(matrix, &config)?;
                let coherence = umass_coherence(&model, matrix, top_m)?;
                log::info!(
                    "sweep K={k} alpha={alpha} beta={beta}: {:.4}",
                    coherence.mean
                );
                rows.push(SweepRow {
                    k,
                    alpha,
                    beta,
                    mean_coherence: coherence.mean,
                });
            }
        }
    }
    rows.sort_by(|a, b| b.mean_coherence.total_cmp(&a.mean_coherence));
    Ok(rows)
}
