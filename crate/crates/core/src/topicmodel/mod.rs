//! LDA over a weighted document-term matrix, fitted with collapsed Gibbs
//! sampling where every term occurrence is one sampling unit carrying the
//! occurrence's weight (1 for raw counts, idf for TF-IDF).
//!
//! Each sweep samples every document against the topic-word counts frozen at
//! the start of the sweep plus the document's own in-sweep changes; counts are
//! rebuilt at the sweep boundary in document-id order. Every document draws
//! from its own RNG stream keyed by `(rng_seed, document id)`, so the fit
//! does not depend on document order or on the number of worker threads.

mod coherence;
mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{DocId, DocTermMatrix, MatrixEntry, Vocabulary};
use crate::{Error, Result};

pub use coherence::{umass_coherence, umass_score, CoherenceScores, DocumentSets};
pub use sweep::{sweep_hyperparameters, HyperGrid, SamplerBudget, SweepRow};

/// Width of the per-topic word lists in reports.
pub const DEFAULT_TOP_WORDS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub sample_every: usize,
    /// Set by the caller; pipeline runs derive it from the top-level seed.
    #[serde(skip)]
    pub rng_seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k: 50,
            alpha: 0.253,
            beta: 0.946,
            iterations: 500,
            burn_in: 200,
            sample_every: 10,
            rng_seed: 42,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("K must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::config("alpha and beta must be positive"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::config("burn_in must be smaller than iterations"));
        }
        if self.sample_every < 1 {
            return Err(Error::config("sample_every must be at least 1"));
        }
        Ok(())
    }
}

/// Stable 64-bit FNV-1a, used to key RNG streams by document id.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of the stream named `key` under `seed`.
pub fn derive_seed(seed: u64, key: &str) -> u64 {
    let mut z = seed ^ fnv1a(key.as_bytes());
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, key))
}

/// Draws an index with probability proportional to `weights[i]`, given their
/// running total.
fn draw(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let total = *cumulative.last().expect("non-empty");
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

#[derive(Debug, Clone)]
pub struct TopicModel {
    /// K x V, row-stochastic.
    pub phi: Vec<Vec<f64>>,
    /// D x K, row-stochastic, parallel to `doc_ids`.
    pub theta: Vec<Vec<f64>>,
    /// Final-sweep weighted counts.
    pub n_dk: Vec<Vec<f64>>,
    pub n_kw: Vec<Vec<f64>>,
    pub n_k: Vec<f64>,
    pub config: LdaConfig,
    pub vocab: Vocabulary,
    pub doc_ids: Vec<DocId>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn theta_of(&self, id: &DocId) -> Option<&[f64]> {
        self.doc_ids
            .iter()
            .position(|d| d == id)
            .map(|i| self.theta[i].as_slice())
    }
}

struct DocState {
    /// Global term per local term slot.
    terms: Vec<usize>,
    /// Local term slot and weight per sampling unit.
    units: Vec<(usize, f64)>,
    z: Vec<usize>,
    n_dk: Vec<f64>,
    total: f64,
    rng: ChaCha8Rng,
}

impl DocState {
    fn new(row: &[MatrixEntry], key: &str, k: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, key);
        let terms: Vec<usize> = row.iter().map(|e| e.term).collect();
        let units: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .flat_map(|(slot, e)| std::iter::repeat_n((slot, e.unit_weight()), e.count as usize))
            .collect();
        let mut n_dk = vec![0.0; k];
        let z: Vec<usize> = units
            .iter()
            .map(|&(_, w)| {
                let t = rng.random_range(0..k);
                n_dk[t] += w;
                t
            })
            .collect();
        let total = units.iter().map(|&(_, w)| w).sum();
        DocState {
            terms,
            units,
            z,
            n_dk,
            total,
            rng,
        }
    }

    /// One pass over this document's units against frozen global counts.
    fn sweep(&mut self, n_kw: &[f64], n_k: &[f64], v: usize, alpha: f64, beta: f64) {
        let k = self.n_dk.len();
        let v_beta = v as f64 * beta;
        let mut delta_kw = vec![0.0; self.terms.len() * k];
        let mut delta_k = vec![0.0; k];
        let mut cumulative = vec![0.0; k];
        for (u, &(slot, w)) in self.units.iter().enumerate() {
            let term = self.terms[slot];
            let old = self.z[u];
            self.n_dk[old] -= w;
            delta_kw[slot * k + old] -= w;
            delta_k[old] -= w;

            let mut acc = 0.0;
            for t in 0..k {
                let word = (n_kw[t * v + term] + delta_kw[slot * k + t]).max(0.0);
                let topic = (n_k[t] + delta_k[t]).max(0.0);
                acc += (self.n_dk[t].max(0.0) + alpha) * (word + beta) / (topic + v_beta);
                cumulative[t] = acc;
            }
            let new = draw(&mut self.rng, &cumulative);

            self.z[u] = new;
            self.n_dk[new] += w;
            delta_kw[slot * k + new] += w;
            delta_k[new] += w;
        }
    }
}

fn rebuild_counts(docs: &[DocState], order: &[usize], k: usize, v: usize) -> (Vec<f64>, Vec<f64>) {
    let mut n_kw = vec![0.0; k * v];
    let mut n_k = vec![0.0; k];
    for &d in order {
        let doc = &docs[d];
        for (&(slot, w), &t) in doc.units.iter().zip(&doc.z) {
            n_kw[t * v + doc.terms[slot]] += w;
            n_k[t] += w;
        }
    }
    (n_kw, n_k)
}

fn normalize_row(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        row.iter_mut().for_each(|x| *x /= s);
    }
}

pub fn fit_lda(matrix: &DocTermMatrix, config: &LdaConfig) -> Result<TopicModel> {
    config.validate()?;
    if matrix.rows.is_empty() {
        return Err(Error::Empty("document-term matrix has no rows".into()));
    }
    if let Some(i) = matrix
        .rows
        .iter()
        .position(|r| r.is_empty() || r.iter().map(|e| e.weight).sum::<f64>() <= 0.0)
    {
        return Err(Error::contract(format!(
            "document {} has zero weight",
            matrix.doc_ids[i]
        )));
    }
    let k = config.k;
    let v = matrix.n_terms();
    let total_units: u64 = matrix.rows.iter().flatten().map(|e| e.count as u64).sum();
    if k as u64 > total_units {
        log::warn!("K = {k} exceeds the {total_units} sampling units in the corpus");
    }

    let mut docs: Vec<DocState> = matrix
        .rows
        .iter()
        .zip(&matrix.doc_ids)
        .map(|(row, id)| DocState::new(row, &id.to_string(), k, config.rng_seed))
        .collect();
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.sort_by(|&a, &b| matrix.doc_ids[a].cmp(&matrix.doc_ids[b]));

    let (mut n_kw, mut n_k) = rebuild_counts(&docs, &order, k, v);
    let v_beta = v as f64 * config.beta;
    let k_alpha = k as f64 * config.alpha;
    let mut phi_acc = vec![vec![0.0; v]; k];
    let mut theta_acc = vec![vec![0.0; k]; docs.len()];
    let mut samples = 0usize;

    for sweep in 1..=config.iterations {
        let (frozen_kw, frozen_k) = (&n_kw, &n_k);
        docs.par_iter_mut()
            .for_each(|d| d.sweep(frozen_kw, frozen_k, v, config.alpha, config.beta));
        (n_kw, n_k) = rebuild_counts(&docs, &order, k, v);

        let take = sweep > config.burn_in && (sweep - config.burn_in) % config.sample_every == 0;
        if take || (sweep == config.iterations && samples == 0) {
            samples += 1;
            for t in 0..k {
                for w in 0..v {
                    phi_acc[t][w] += (n_kw[t * v + w] + config.beta) / (n_k[t] + v_beta);
                }
            }
            for (acc, d) in theta_acc.iter_mut().zip(&docs) {
                for t in 0..k {
                    acc[t] += (d.n_dk[t].max(0.0) + config.alpha) / (d.total + k_alpha);
                }
            }
        }
    }

    for row in phi_acc.iter_mut().chain(theta_acc.iter_mut()) {
        row.iter_mut().for_each(|x| *x /= samples as f64);
        normalize_row(row);
    }
    Ok(TopicModel {
        phi: phi_acc,
        theta: theta_acc,
        n_dk: docs.iter().map(|d| d.n_dk.clone()).collect(),
        n_kw: n_kw.chunks(v).map(<[f64]>::to_vec).collect(),
        n_k,
        config: config.clone(),
        vocab: matrix.vocab.clone(),
        doc_ids: matrix.doc_ids.clone(),
    })
}

/// Folds a held-out document into a fitted model, keeping topic-word counts
/// fixed. `doc_key` selects the RNG stream. Entries whose term index is
/// outside the model vocabulary are ignored.
pub fn infer_document(
    model: &TopicModel,
    row: &[MatrixEntry],
    doc_key: &str,
    iterations: usize,
) -> Result<Vec<f64>> {
    let v = model.n_terms();
    let known: Vec<MatrixEntry> = row
        .iter()
        .filter(|e| e.term < v && e.count > 0 && e.weight > 0.0)
        .copied()
        .collect();
    if known.is_empty() {
        return Err(Error::Empty("no known terms".into()));
    }
    if iterations < 1 {
        return Err(Error::config("fold-in needs at least one iteration"));
    }
    let k = model.k();
    let (alpha, beta) = (model.config.alpha, model.config.beta);
    let v_beta = v as f64 * beta;
    let k_alpha = k as f64 * alpha;
    let mut doc = DocState::new(&known, doc_key, k, model.config.rng_seed);
    let word_factor: Vec<Vec<f64>> = doc
        .terms
        .iter()
        .map(|&w| {
            (0..k)
                .map(|t| (model.n_kw[t][w] + beta) / (model.n_k[t] + v_beta))
                .collect()
        })
        .collect();

    let burn_in = iterations / 2;
    let mut acc = vec![0.0; k];
    let mut cumulative = vec![0.0; k];
    for it in 0..iterations {
        for u in 0..doc.units.len() {
            let (slot, w) = doc.units[u];
            let old = doc.z[u];
            doc.n_dk[old] -= w;
            let mut running = 0.0;
            for t in 0..k {
                running += (doc.n_dk[t].max(0.0) + alpha) * word_factor[slot][t];
                cumulative[t] = running;
            }
            let new = draw(&mut doc.rng, &cumulative);
            doc.z[u] = new;
            doc.n_dk[new] += w;
        }
        if it >= burn_in {
            for t in 0..k {
                acc[t] += (doc.n_dk[t].max(0.0) + alpha) / (doc.total + k_alpha);
            }
        }
    }
    normalize_row(&mut acc);
    Ok(acc)
}

/// The `n` highest-weight terms of `topic`, ties broken by term.
pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    let row = model.phi.get(topic).ok_or(Error::Index {
        index: topic,
        len: model.k(),
    })?;
    if n < 1 {
        return Err(Error::config("top_words needs n >= 1"));
    }
    let mut ranked: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| model.vocab.term(a.0).cmp(model.vocab.term(b.0)))
    });
    Ok(ranked
        .into_iter()
        .take(n)
        .map(|(w, p)| (model.vocab.term(w).to_string(), p))
        .collect())
}

pub(crate) fn top_word_indices(model: &TopicModel, topic: usize, n: usize) -> Vec<usize> {
    top_words(model, topic, n)
        .expect("topic in range")
        .iter()
        .map(|(t, _)| model.vocab.index_of(t).expect("model term"))
        .collect()
}

#[derive(Debug, Serialize)]
struct TopicRecord<'a> {
    topic_id: usize,
    top_words: Vec<WordRecord<'a>>,
    coherence: f64,
}

#[derive(Debug, Serialize)]
struct WordRecord<'a> {
    term: &'a str,
    weight: f64,
}

/// Renders `topics.json`.
pub fn topics_json(
    model: &TopicModel,
    coherence: &CoherenceScores,
    n_words: usize,
) -> Result<String> {
    let words: Vec<Vec<(String, f64)>> = (0..model.k())
        .map(|t| top_words(model, t, n_words))
        .collect::<Result<_>>()?;
    let records: Vec<TopicRecord> = words
        .iter()
        .enumerate()
        .map(|(t, ws)| TopicRecord {
            topic_id: t,
            top_words: ws
                .iter()
                .map(|(term, weight)| WordRecord {
                    term,
                    weight: *weight,
                })
                .collect(),
            coherence: coherence.per_topic[t],
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&records).expect("serializable");
    s.push('\n');
    Ok(s)
}

/// Renders `theta.csv`: `account_id,week,t0..t{K-1}` with 6 decimals.
pub fn theta_csv(model: &TopicModel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["account_id".to_string(), "week".to_string()];
    header.extend((0..model.k()).map(|t| format!("t{t}")));
    w.write_record(&header).expect("in-memory write");
    for (id, row) in model.doc_ids.iter().zip(&model.theta) {
        let mut rec = vec![id.account_id.clone(), id.week.to_string()];
        rec.extend(row.iter().map(|p| format!("{p:.6}")));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
