//! Synthetic corpora, follow graphs and convergence scenarios with known
//! ground truth, plus brute-force oracles used by the acceptance tests.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::Serialize;

use crate::ingest::{Document, Tweet, WeekKey};
use crate::{Error, Result};

pub use oracle::{
    ari, entropy_jsd, match_topics, oracle_betweenness, oracle_kcore, spearman, total_variation,
    TopicMatch,
};

/// Symmetric Dirichlet prior of the planted topic-word rows.
pub const PLANTED_PHI_PRIOR: f64 = 0.1;

/// Words per scenario tweet, before the seed hashtag.
pub const TWEET_WORDS: usize = 12;

/// Draws from a symmetric Dirichlet by normalizing Gamma variates.
pub fn sample_dirichlet(rng: &mut impl Rng, dim: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    let mut x: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    if s > 0.0 && s.is_finite() {
        x.iter_mut().for_each(|v| *v /= s);
    } else {
        // every variate underflowed: put the mass on one coordinate
        x = vec![0.0; dim];
        x[rng.random_range(0..dim)] = 1.0;
    }
    x
}

fn padded(prefix: &str, i: usize, total: usize) -> String {
    let width = total.saturating_sub(1).max(1).to_string().len();
    format!("{prefix}{i:0width$}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedTopics {
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub terms: Vec<String>,
}

/// Documents generated by the LDA process. Terms are `w<index>` and every
/// document falls in one week, as account `d<index>`.
pub fn gen_lda_corpus(
    k: usize,
    v: usize,
    d: usize,
    doc_len: usize,
    concentration: f64,
    seed: u64,
) -> Result<(Vec<Document>, PlantedTopics)> {
    if k == 0 || v == 0 || d == 0 || doc_len == 0 || k > v {
        return Err(Error::config("corpus sizes must be positive with K <= V"));
    }
    if !(concentration > 0.0) {
        return Err(Error::config("concentration must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<String> = (0..v).map(|i| padded("w", i, v)).collect();
    let phi: Vec<Vec<f64>> = (0..k)
        .map(|_| sample_dirichlet(&mut rng, v, PLANTED_PHI_PRIOR))
        .collect();
    let word_dists: Vec<WeightedIndex<f64>> = phi
        .iter()
        .map(|row| WeightedIndex::new(row).expect("stochastic row"))
        .collect();
    let week = WeekKey::from_monday(NaiveDate::from_ymd_opt(2020, 1, 6).expect("date"))?;
    let mut theta = Vec::with_capacity(d);
    let mut docs = Vec::with_capacity(d);
    for j in 0..d {
        let row = if k == 1 {
            vec![1.0]
        } else {
            sample_dirichlet(&mut rng, k, concentration)
        };
        let topic_dist = WeightedIndex::new(&row).expect("stochastic row");
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for _ in 0..doc_len {
            let z = topic_dist.sample(&mut rng);
            let w = word_dists[z].sample(&mut rng);
            *counts.entry(terms[w].clone()).or_default() += 1;
        }
        docs.push(Document {
            account_id: padded("d", j, d),
            week,
            term_counts: counts,
            tweet_count: 1,
        });
        theta.push(row);
    }
    Ok((docs, PlantedTopics { phi, theta, terms }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedPartition {
    pub ids: Vec<String>,
    pub blocks: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
}

impl PlantedPartition {
    pub fn block_map(&self) -> BTreeMap<String, usize> {
        self.ids
            .iter()
            .cloned()
            .zip(self.blocks.iter().copied())
            .collect()
    }
}

fn check_probabilities(p_in: f64, p_out: f64) -> Result<()> {
    if !(0.0 <= p_out && p_out <= p_in && p_in <= 1.0) {
        return Err(Error::config(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in {p_in}, p_out {p_out}"
        )));
    }
    Ok(())
}

/// Stochastic block model over named nodes; each undirected edge becomes a
/// pair of reciprocal follows.
fn sbm_edges(
    blocks: &[usize],
    ids: &[String],
    p_in: f64,
    p_out: f64,
    rng: &mut impl Rng,
) -> Vec<(String, String)> {
    let mut edges = Vec::new();
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            let p = if blocks[a] == blocks[b] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((ids[a].clone(), ids[b].clone()));
                edges.push((ids[b].clone(), ids[a].clone()));
            }
        }
    }
    edges
}

pub fn gen_sbm_graph(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Vec<(String, String)>, PlantedPartition)> {
    check_probabilities(p_in, p_out)?;
    let n: usize = block_sizes.iter().sum();
    let ids: Vec<String> = (0..n).map(|i| padded("v", i, n)).collect();
    let blocks: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = sbm_edges(&blocks, &ids, p_in, p_out, &mut rng);
    Ok((
        edges,
        PlantedPartition {
            ids,
            blocks,
            p_in,
            p_out,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub weeks: usize,
    /// Sizes of communities A and B.
    pub community_sizes: [usize; 2],
    pub words_per_group: usize,
    /// Mixing weight towards the shared distribution, per week.
    pub lambda_schedule: Vec<f64>,
    pub tweets_per_week: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub start: NaiveDate,
    pub seed: u64,
}

impl ScenarioConfig {
    /// `λ_t = t / (T - 1)`.
    pub fn linear(weeks: usize, community_size: usize, seed: u64) -> Self {
        let lambda = (0..weeks)
            .map(|t| t as f64 / (weeks.max(2) - 1) as f64)
            .collect();
        Self::with_schedule(lambda, community_size, seed)
    }

    pub fn constant(weeks: usize, community_size: usize, lambda: f64, seed: u64) -> Self {
        Self::with_schedule(vec![lambda; weeks], community_size, seed)
    }

    fn with_schedule(lambda_schedule: Vec<f64>, community_size: usize, seed: u64) -> Self {
        ScenarioConfig {
            weeks: lambda_schedule.len(),
            community_sizes: [community_size; 2],
            words_per_group: 20,
            lambda_schedule,
            tweets_per_week: 3,
            p_in: 0.3,
            p_out: 0.02,
            start: NaiveDate::from_ymd_opt(2020, 1, 6).expect("date"),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        check_probabilities(self.p_in, self.p_out)?;
        if self.weeks == 0 || self.lambda_schedule.len() != self.weeks {
            return Err(Error::config(
                "lambda schedule must have one entry per week",
            ));
        }
        if self
            .lambda_schedule
            .iter()
            .any(|l| !(0.0..=1.0).contains(l))
            || self.lambda_schedule.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::config(
                "lambda schedule must be nondecreasing in [0, 1]",
            ));
        }
        if self.community_sizes.contains(&0)
            || self.words_per_group == 0
            || self.tweets_per_week == 0
        {
            return Err(Error::config("scenario sizes must be positive"));
        }
        WeekKey::from_monday(self.start)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    /// Account to community (0 = A, 1 = B).
    pub planted_blocks: BTreeMap<String, usize>,
    /// Word distributions of A, B and the shared group, over `vocabulary`.
    pub planted_phi: Vec<Vec<f64>>,
    pub vocabulary: Vec<String>,
    pub lambda_schedule: Vec<f64>,
    pub true_mixture_jsd_per_week: Vec<f64>,
    pub weeks: Vec<WeekKey>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub tweets: Vec<Tweet>,
    pub edges: Vec<(String, String)>,
    pub truth: GroundTruth,
    pub config: ScenarioConfig,
}

/// Index of the shared word group in `GroundTruth::planted_phi`.
pub const SHARED_GROUP: usize = 2;

/// Mixtures of communities A and B in week `t`.
pub fn planted_mixtures(phi: &[Vec<f64>], lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let mix = |own: &[f64]| -> Vec<f64> {
        own.iter()
            .zip(&phi[SHARED_GROUP])
            .map(|(&o, &s)| (1.0 - lambda) * o + lambda * s)
            .collect()
    };
    (mix(&phi[0]), mix(&phi[1]))
}

/// Two communities whose tweet vocabularies move from disjoint word groups
/// towards a shared one as λ grows.
pub fn gen_convergence_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w = config.words_per_group;
    let vocabulary: Vec<String> = ["aw", "bw", "sw"]
        .iter()
        .flat_map(|p| (1..=w).map(move |i| format!("{p}{i}")))
        .collect();
    let planted_phi: Vec<Vec<f64>> = (0..3)
        .map(|g| {
            (0..3 * w)
                .map(|i| if i / w == g { 1.0 / w as f64 } else { 0.0 })
                .collect()
        })
        .collect();

    let [na, nb] = config.community_sizes;
    let mut accounts: Vec<(String, usize)> = (0..na).map(|i| (padded("a", i, na), 0)).collect();
    accounts.extend((0..nb).map(|i| (padded("b", i, nb), 1)));
    let ids: Vec<String> = accounts.iter().map(|a| a.0.clone()).collect();
    let blocks: Vec<usize> = accounts.iter().map(|a| a.1).collect();
    let edges = sbm_edges(&blocks, &ids, config.p_in, config.p_out, &mut rng);

    let mut weeks = Vec::with_capacity(config.weeks);
    let mut jsd_per_week = Vec::with_capacity(config.weeks);
    let mut tweets = Vec::new();
    let mut week = WeekKey::from_monday(config.start)?;
    for &lambda in &config.lambda_schedule {
        let (pa, pb) = planted_mixtures(&planted_phi, lambda);
        jsd_per_week.push(entropy_jsd(&pa, &pb));
        let dists = [
            WeightedIndex::new(&pa).expect("mixture"),
            WeightedIndex::new(&pb).expect("mixture"),
        ];
        for (id, block) in &accounts {
            for j in 0..config.tweets_per_week {
                let words: Vec<&str> = (0..TWEET_WORDS)
                    .map(|_| vocabulary[dists[*block].sample(&mut rng)].as_str())
                    .collect();
                let offset = Duration::hours((j as i64 * 168) / config.tweets_per_week as i64 + 9);
                tweets.push(Tweet {
                    account_id: id.clone(),
                    created_at: week.start() + offset,
                    text: format!("{} #covid19", words.join(" ")),
                    lang: Some("en".into()),
                });
            }
        }
        weeks.push(week);
        week = week.next();
    }

    Ok(Scenario {
        tweets,
        edges,
        truth: GroundTruth {
            planted_blocks: accounts.into_iter().collect(),
            planted_phi,
            vocabulary,
            lambda_schedule: config.lambda_schedule.clone(),
            true_mixture_jsd_per_week: jsd_per_week,
            weeks,
        },
        config: config.clone(),
    })
}

impl Scenario {
    pub fn accounts(&self) -> BTreeSet<String> {
        self.truth.planted_blocks.keys().cloned().collect()
    }

    pub fn tweets_jsonl(&self) -> String {
        self.tweets
            .iter()
            .map(|t| t.to_json_line() + "\n")
            .collect()
    }

    pub fn ground_truth_json(&self) -> String {
        serde_json::to_string_pretty(&self.truth).expect("serializable") + "\n"
    }

    /// Writes `tweets.jsonl`, `follows.csv`, `ground_truth.json` and a
    /// `pipeline.toml` that runs the full pipeline on them.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))
        };
        write("tweets.jsonl", self.tweets_jsonl())?;
        write("follows.csv", crate::netmap::follows_csv(&self.edges))?;
        write("ground_truth.json", self.ground_truth_json())?;
        write("pipeline.toml", crate::pipeline::scenario_config_toml(self))?;
        Ok(())
    }
}
