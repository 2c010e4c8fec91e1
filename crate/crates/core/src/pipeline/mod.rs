//! End-to-end orchestration: ingest, monthly maps, topics over the whole
//! window, weekly bridging and the convergence report.

mod config;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate};

use crate::bridge::{self, BridgingScores, TopicBridgeRow};
use crate::converge::{self, ClusterTopicSeries, PairReport};
use crate::ingest::{self, Normalizer, Tweet, WeekKey};
use crate::netmap::{self, ClusterTarget, LabelMap, MapSnapshot, Month};
use crate::synth::Scenario;
use crate::topicmodel::{self, CoherenceScores, LdaConfig, TopicModel};
use crate::{Error, Result};

pub use config::{
    BridgeConfig, ConvergenceConfig, IngestConfig, MapConfig, MonthConfig, Overrides, Paths,
    PipelineConfig, Seeds, DEFAULT_CONFIG,
};
pub use report::render_report;

/// Label of the snapshot spanning every configured month.
pub const WINDOW_LABEL: &str = "window";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Config,
    Ingest,
    Map,
    Topics,
    Bridge,
    Converge,
    Report,
}

impl Stage {
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Config => 2,
            Stage::Ingest => 10,
            Stage::Map => 11,
            Stage::Topics => 12,
            Stage::Bridge => 13,
            Stage::Converge => 14,
            Stage::Report => 15,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Map => "map",
            Stage::Topics => "topics",
            Stage::Bridge => "bridge",
            Stage::Converge => "converge",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.name(), self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestSummary {
    pub lines_parsed: usize,
    pub lines_skipped: usize,
    pub after_language: usize,
    pub after_dedupe: usize,
    pub in_window: usize,
    pub follow_edges: usize,
}

#[derive(Debug, Clone)]
pub struct Topics {
    pub model: TopicModel,
    pub coherence: CoherenceScores,
    pub n_documents: usize,
}

#[derive(Debug, Clone)]
pub struct Bridges {
    pub weekly: Vec<(WeekKey, BridgingScores)>,
    pub rows: Vec<TopicBridgeRow>,
    /// Weeks with at least one scored account, and their dominant topic.
    pub dominant: Vec<(WeekKey, usize)>,
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub series: ClusterTopicSeries,
    pub reports: Vec<PairReport>,
    pub weeks: Vec<WeekKey>,
    /// Documents per week assigned to each topic, indexed `[topic][week]`.
    pub volumes: Vec<Vec<usize>>,
}

/// Everything computed by a run, up to the last requested stage.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: PipelineConfig,
    pub ingest: IngestSummary,
    pub tweets: Vec<Tweet>,
    pub edges: Vec<(String, String)>,
    pub snapshots: Vec<MapSnapshot>,
    pub window: Option<MapSnapshot>,
    pub topics: Option<Topics>,
    pub bridges: Option<Bridges>,
    pub convergence: Option<Convergence>,
}

fn normalizer(config: &PipelineConfig) -> Result<Normalizer> {
    match &config.paths.stopwords {
        Some(p) => Normalizer::from_file(p),
        None => Ok(Normalizer::default()),
    }
}

fn run_ingest(
    config: &PipelineConfig,
) -> Result<(Vec<Tweet>, Vec<(String, String)>, IngestSummary)> {
    let parsed = ingest::read_tweets(&config.paths.tweets, config.ingest.strict)?;
    let languages: BTreeSet<String> = config
        .ingest
        .languages
        .iter()
        .map(|l| l.to_lowercase())
        .collect();
    let kept = ingest::filter_language(&parsed.tweets, &languages, config.ingest.keep_unlabeled);
    let deduped = if config.ingest.dedupe_exact {
        ingest::dedupe_exact(&kept)
    } else {
        kept.clone()
    };
    let tweets = ingest::tweets_in_range(&deduped, config.window()?);
    let edges = netmap::read_follows(&config.paths.follows)?;
    let summary = IngestSummary {
        lines_parsed: parsed.tweets.len(),
        lines_skipped: parsed.skipped.len(),
        after_language: kept.len(),
        after_dedupe: deduped.len(),
        in_window: tweets.len(),
        follow_edges: edges.len(),
    };
    Ok((tweets, edges, summary))
}

fn run_map(
    config: &PipelineConfig,
    tweets: &[Tweet],
    edges: &[(String, String)],
) -> Result<(Vec<MapSnapshot>, MapSnapshot)> {
    let mut label_files: BTreeMap<PathBuf, LabelMap> = BTreeMap::new();
    let mut labels_for = |path: Option<&PathBuf>| -> Result<Option<LabelMap>> {
        let Some(path) = path else { return Ok(None) };
        if !label_files.contains_key(path) {
            label_files.insert(path.clone(), netmap::read_labels(path)?);
        }
        Ok(label_files.get(path).cloned())
    };
    let params = config.map_params();
    let mut snapshots = Vec::new();
    for (spec, month) in config.months.iter().zip(config.month_specs()?) {
        let labels = labels_for(spec.labels.as_ref().or(config.paths.labels.as_ref()))?;
        snapshots.push(netmap::build_snapshot(
            &month,
            tweets,
            edges,
            &params,
            labels.as_ref(),
        )?);
    }
    let window = Month {
        label: WINDOW_LABEL.into(),
        range: config.window()?,
        activity_threshold: config.convergence.activity_threshold,
    };
    let labels = labels_for(config.paths.labels.as_ref())?;
    let window = netmap::build_snapshot(&window, tweets, edges, &params, labels.as_ref())?;
    Ok((snapshots, window))
}

fn run_topics(
    config: &PipelineConfig,
    tweets: &[Tweet],
    snapshots: &[MapSnapshot],
    window: &MapSnapshot,
) -> Result<Topics> {
    let accounts: BTreeSet<String> = snapshots
        .iter()
        .chain(std::iter::once(window))
        .flat_map(|s| s.members.iter().cloned())
        .collect();
    let docs = ingest::build_documents(tweets, &accounts, &normalizer(config)?);
    if docs.is_empty() {
        return Err(Error::Empty(
            "no documents from seed-active accounts".into(),
        ));
    }
    let vocab = ingest::build_vocabulary(&docs, config.ingest.min_df, config.ingest.max_df_ratio)?;
    let matrix = ingest::build_matrix(&docs, &vocab, config.ingest.weighting)?;
    let model = topicmodel::fit_lda(&matrix, &config.lda_config())?;
    let coherence =
        topicmodel::umass_coherence(&model, &matrix, config.convergence.coherence_top_m)?;
    Ok(Topics {
        model,
        coherence,
        n_documents: matrix.n_docs(),
    })
}

fn model_weeks(model: &TopicModel) -> Vec<WeekKey> {
    let weeks: BTreeSet<WeekKey> = model.doc_ids.iter().map(|d| d.week).collect();
    weeks.into_iter().collect()
}

/// The month snapshot whose range holds the week's Monday, else the
/// whole-window snapshot.
fn snapshot_for_week<'a>(
    week: WeekKey,
    months: &[Month],
    snapshots: &'a [MapSnapshot],
    window: &'a MapSnapshot,
) -> &'a MapSnapshot {
    let t = week.start();
    months
        .iter()
        .position(|m| m.range.0 <= t && t <= m.range.1)
        .map(|i| &snapshots[i])
        .unwrap_or(window)
}

fn run_bridge(
    config: &PipelineConfig,
    topics: &Topics,
    snapshots: &[MapSnapshot],
    window: &MapSnapshot,
) -> Result<Bridges> {
    let months = config.month_specs()?;
    let mut cache: BTreeMap<String, BridgingScores> = BTreeMap::new();
    let mut weekly = Vec::new();
    let mut rows = Vec::new();
    let mut dominant = Vec::new();
    for week in model_weeks(&topics.model) {
        let snap = snapshot_for_week(week, &months, snapshots, window);
        let scores = cache
            .entry(snap.month.clone())
            .or_insert_with(|| bridge::bridging_centrality(&snap.graph))
            .clone();
        let theta = bridge::week_theta(&topics.model, week);
        let week_rows: Vec<TopicBridgeRow> = (0..topics.model.k())
            .map(|t| bridge::topic_bridging(&scores, &theta, t, week, config.bridge.top_n))
            .collect::<Result<_>>()?;
        if week_rows.iter().any(|r| r.argmax.is_some()) {
            dominant.push((week, bridge::dominant_bridge(&week_rows, week)?));
        }
        rows.extend(week_rows);
        weekly.push((week, scores));
    }
    Ok(Bridges {
        weekly,
        rows,
        dominant,
    })
}

fn run_converge(
    config: &PipelineConfig,
    topics: &Topics,
    window: &MapSnapshot,
) -> Result<Convergence> {
    let clusters: BTreeMap<usize, BTreeSet<String>> = (0..window.assignment.n_clusters)
        .map(|c| {
            let ids = window
                .cluster_nodes(c)
                .into_iter()
                .map(|v| window.graph.id(v).to_string())
                .collect();
            (c, ids)
        })
        .collect();
    let series = converge::build_series(&topics.model, &clusters);
    let reports = converge::convergence_report(&series, config.trend())?;
    let weeks = model_weeks(&topics.model);
    let volumes = (0..topics.model.k())
        .map(|t| converge::topic_volume_series(&topics.model, t, &weeks))
        .collect::<Result<_>>()?;
    Ok(Convergence {
        series,
        reports,
        weeks,
        volumes,
    })
}

/// Runs every stage up to and including `through`.
pub fn analyze(config: &PipelineConfig, through: Stage) -> Result<Analysis, PipelineError> {
    config.validate().at(Stage::Config)?;
    if !config.paths.tweets.exists() {
        return Err(Error::io(
            &config.paths.tweets,
            std::io::Error::new(std::io::ErrorKind::NotFound, "tweets file not found"),
        ))
        .at(Stage::Ingest);
    }
    let (tweets, edges, summary) = run_ingest(config).at(Stage::Ingest)?;
    log::info!(
        "ingest: {} tweets in window, {} follow edges",
        tweets.len(),
        edges.len()
    );
    let mut analysis = Analysis {
        config: config.clone(),
        ingest: summary,
        tweets,
        edges,
        snapshots: Vec::new(),
        window: None,
        topics: None,
        bridges: None,
        convergence: None,
    };
    if through < Stage::Map {
        return Ok(analysis);
    }
    let (snapshots, window) = run_map(config, &analysis.tweets, &analysis.edges).at(Stage::Map)?;
    log::info!(
        "map: {} snapshots, window has {} core accounts",
        snapshots.len(),
        window.graph.len()
    );
    analysis.snapshots = snapshots;
    if through < Stage::Topics {
        analysis.window = Some(window);
        return Ok(analysis);
    }
    let topics =
        run_topics(config, &analysis.tweets, &analysis.snapshots, &window).at(Stage::Topics)?;
    log::info!(
        "topics: K = {}, mean coherence {:.4}",
        topics.model.k(),
        topics.coherence.mean
    );
    if through >= Stage::Bridge {
        analysis.bridges =
            Some(run_bridge(config, &topics, &analysis.snapshots, &window).at(Stage::Bridge)?);
    }
    if through >= Stage::Converge {
        analysis.convergence = Some(run_converge(config, &topics, &window).at(Stage::Converge)?);
    }
    analysis.topics = Some(topics);
    analysis.window = Some(window);
    Ok(analysis)
}

/// Named file contents produced by `stage`.
pub fn stage_artifacts(
    analysis: &Analysis,
    stage: Stage,
) -> Result<Vec<(String, String)>, PipelineError> {
    let missing = |what: &str| PipelineError {
        stage,
        source: Error::contract(format!("{what} has not been computed")),
    };
    let mut out = Vec::new();
    match stage {
        Stage::Config | Stage::Ingest => {}
        Stage::Map => {
            let window = analysis.window.as_ref().ok_or_else(|| missing("map"))?;
            for snap in analysis.snapshots.iter().chain(std::iter::once(window)) {
                out.push((
                    format!("clusters_{}.json", snap.month),
                    netmap::clusters_json(snap),
                ));
                out.push((
                    format!("map_{}.svg", snap.month),
                    netmap::render_map_svg(snap),
                ));
            }
        }
        Stage::Topics => {
            let t = analysis.topics.as_ref().ok_or_else(|| missing("topics"))?;
            let json = topicmodel::topics_json(
                &t.model,
                &t.coherence,
                analysis.config.convergence.top_words,
            )
            .at(stage)?;
            out.push(("topics.json".into(), json));
            out.push(("theta.csv".into(), topicmodel::theta_csv(&t.model)));
        }
        Stage::Bridge => {
            let b = analysis.bridges.as_ref().ok_or_else(|| missing("bridge"))?;
            out.push(("bridging.csv".into(), bridge::bridging_csv(&b.weekly)));
            out.push((
                "topic_bridges.csv".into(),
                bridge::topic_bridges_csv(&b.rows),
            ));
        }
        Stage::Converge => {
            let c = analysis
                .convergence
                .as_ref()
                .ok_or_else(|| missing("convergence"))?;
            out.push((
                "divergence.csv".into(),
                converge::divergence_csv(&c.reports),
            ));
        }
        Stage::Report => out.push(("report.md".into(), render_report(analysis).at(stage)?)),
    }
    Ok(out)
}

/// Writes files into `dir` through a staging directory, so a failed run
/// leaves no partial output behind.
pub fn write_artifacts(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let staging = dir.join(format!(".staging-{}", std::process::id()));
    let result = (|| {
        std::fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        for (name, body) in files {
            let path = staging.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        let mut written = Vec::new();
        for (name, _) in files {
            let to = dir.join(name);
            std::fs::rename(staging.join(name), &to).map_err(|e| Error::io(&to, e))?;
            written.push(to);
        }
        Ok(written)
    })();
    let _ = std::fs::remove_dir_all(&staging);
    result
}

#[derive(Debug)]
pub struct RunOutput {
    pub analysis: Analysis,
    pub written: Vec<PathBuf>,
}

/// Runs the stages needed for `stages` and writes their artifacts.
pub fn run_stages(config: &PipelineConfig, stages: &[Stage]) -> Result<RunOutput, PipelineError> {
    let through = stages.iter().copied().max().unwrap_or(Stage::Ingest);
    let analysis = analyze(config, through)?;
    let mut files = Vec::new();
    for &stage in stages {
        files.extend(stage_artifacts(&analysis, stage)?);
    }
    let written = write_artifacts(&config.paths.output_dir, &files).at(Stage::Report)?;
    Ok(RunOutput { analysis, written })
}

/// The full pipeline with every artifact.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    run_stages(
        config,
        &[
            Stage::Map,
            Stage::Topics,
            Stage::Bridge,
            Stage::Converge,
            Stage::Report,
        ],
    )
}

fn month_bounds(first: NaiveDate, last: NaiveDate) -> Vec<MonthConfig> {
    let mut out = Vec::new();
    let mut cur = first;
    while cur <= last {
        let next_month = if cur.month() == 12 {
            NaiveDate::from_ymd_opt(cur.year() + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(cur.year(), cur.month() + 1, 1)
        }
        .expect("valid date");
        let end = (next_month - Days::new(1)).min(last);
        out.push(MonthConfig {
            label: cur.format("%Y-%m").to_string(),
            start: format!("{}T00:00:00Z", cur.format("%Y-%m-%d")),
            end: format!("{}T23:59:59Z", end.format("%Y-%m-%d")),
            activity_threshold: 1,
            labels: None,
        });
        cur = end + Days::new(1);
    }
    out
}

/// Pipeline config for a generated scenario directory.
pub fn scenario_config(scenario: &Scenario) -> PipelineConfig {
    let first = scenario.config.start;
    let last = first + Days::new(7 * scenario.config.weeks as u64 - 1);
    PipelineConfig {
        rng_seed: scenario.config.seed,
        paths: Paths {
            tweets: "tweets.jsonl".into(),
            follows: "follows.csv".into(),
            labels: None,
            stopwords: None,
            output_dir: "out".into(),
        },
        ingest: IngestConfig {
            max_df_ratio: 0.9,
            ..IngestConfig::default()
        },
        seeds: Seeds {
            hashtags: vec!["#covid19".into()],
        },
        months: month_bounds(first, last),
        map: MapConfig {
            kcore_k: 2,
            target: ClusterTarget::Count(2),
            min_cluster_size: 3,
            layout_iterations: 100,
        },
        lda: LdaConfig {
            k: 3,
            alpha: 0.1,
            beta: 0.01,
            iterations: 300,
            burn_in: 100,
            sample_every: 10,
            ..LdaConfig::default()
        },
        bridge: BridgeConfig::default(),
        convergence: ConvergenceConfig::default(),
    }
}

pub fn scenario_config_toml(scenario: &Scenario) -> String {
    format!(
        "# Generated scenario run; paths are relative to this file.\n{}",
        scenario_config(scenario).to_toml()
    )
}
