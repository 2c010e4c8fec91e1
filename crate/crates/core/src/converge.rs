//! Per-cluster weekly topic distributions, Jensen-Shannon divergence between
//! cluster pairs, trend detection and topic volume.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::WeekKey;
use crate::topicmodel::TopicModel;
use crate::{Error, Result};

const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

/// (cluster, week) to a distribution over topics.
pub type ClusterTopicSeries = BTreeMap<(usize, WeekKey), Vec<f64>>;

/// Mean θ of the members with a document that week, renormalized.
///
/// `week_theta` maps accounts to their θ row for one week. Rows are summed in
/// account order, so the result does not depend on how `members` was built.
pub fn cluster_topic_distribution(
    week_theta: &BTreeMap<String, Vec<f64>>,
    members: &BTreeSet<String>,
) -> Result<Vec<f64>> {
    let mut sum: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (_, row) in week_theta.iter().filter(|(a, _)| members.contains(*a)) {
        if sum.is_empty() {
            sum = vec![0.0; row.len()];
        } else if sum.len() != row.len() {
            return Err(Error::contract("θ rows differ in length"));
        }
        for (s, x) in sum.iter_mut().zip(row) {
            *s += x;
        }
        n += 1;
    }
    let total: f64 = sum.iter().sum();
    if n == 0 || total <= 0.0 {
        return Err(Error::Empty("empty cluster-week".into()));
    }
    Ok(sum.into_iter().map(|s| s / total).collect())
}

/// Distributions for every cluster-week with at least one member document.
pub fn build_series(
    model: &TopicModel,
    clusters: &BTreeMap<usize, BTreeSet<String>>,
) -> ClusterTopicSeries {
    let weeks: BTreeSet<WeekKey> = model.doc_ids.iter().map(|d| d.week).collect();
    let mut series = ClusterTopicSeries::new();
    for week in weeks {
        let theta = crate::bridge::week_theta(model, week);
        for (&c, members) in clusters {
            if let Ok(dist) = cluster_topic_distribution(&theta, members) {
                series.insert((c, week), dist);
            }
        }
    }
    series
}

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::contract(format!(
            "{name} has a negative or non-finite entry"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::contract(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// Jensen-Shannon divergence with base-2 logarithms, in `[0, 1]`.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::contract(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    let term = |a: f64, m: f64| if a > 0.0 { a * (a / m).log2() } else { 0.0 };
    let d: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            0.5 * (term(a, m) + term(b, m))
        })
        .sum();
    Ok(d.clamp(0.0, 1.0))
}

/// `1 - jsd`; higher means more topically similar.
pub fn convergence_score(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(1.0 - jsd(p, q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub week: WeekKey,
    pub jsd: f64,
    pub convergence_score: f64,
}

/// One row per week where both clusters have a distribution.
pub fn convergence_series(
    series: &ClusterTopicSeries,
    a: usize,
    b: usize,
) -> Result<Vec<ConvergenceRow>> {
    if a == b {
        return Err(Error::contract("cluster pair must be distinct"));
    }
    let mut rows = Vec::new();
    for ((c, week), p) in series {
        if *c != a {
            continue;
        }
        if let Some(q) = series.get(&(b, *week)) {
            let d = jsd(p, q)?;
            rows.push(ConvergenceRow {
                week: *week,
                jsd: d,
                convergence_score: 1.0 - d,
            });
        }
    }
    if rows.is_empty() {
        log::warn!("clusters {a} and {b} share no weeks");
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Converging,
    Diverging,
    Stable,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trend::Converging => "converging",
            Trend::Diverging => "diverging",
            Trend::Stable => "stable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendConfig {
    pub min_slope: f64,
    pub min_weeks: usize,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            min_slope: 0.02,
            min_weeks: 4,
        }
    }
}

/// Ordinary least-squares slope of `y` against `0, 1, 2, ...`.
pub fn ols_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (v - y_mean);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn detect_convergence(scores: &[f64], config: TrendConfig) -> Result<(Trend, f64)> {
    if scores.len() < config.min_weeks.max(2) {
        return Err(Error::Empty(format!(
            "series of {} weeks is shorter than the minimum {}",
            scores.len(),
            config.min_weeks.max(2)
        )));
    }
    let slope = ols_slope(scores);
    let trend = if slope >= config.min_slope {
        Trend::Converging
    } else if slope <= -config.min_slope {
        Trend::Diverging
    } else {
        Trend::Stable
    };
    Ok((trend, slope))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub a: usize,
    pub b: usize,
    pub rows: Vec<ConvergenceRow>,
    /// `None` when too few common weeks.
    pub trend: Option<(Trend, f64)>,
}

/// Reports for every unordered pair of clusters present in `series`.
pub fn convergence_report(
    series: &ClusterTopicSeries,
    config: TrendConfig,
) -> Result<Vec<PairReport>> {
    let clusters: BTreeSet<usize> = series.keys().map(|k| k.0).collect();
    let clusters: Vec<usize> = clusters.into_iter().collect();
    let pairs: Vec<(usize, usize)> = clusters
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| clusters[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let rows = convergence_series(series, a, b)?;
            let scores: Vec<f64> = rows.iter().map(|r| r.convergence_score).collect();
            let trend = detect_convergence(&scores, config).ok();
            Ok(PairReport { a, b, rows, trend })
        })
        .collect()
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Documents whose argmax topic is `topic`, counted per week.
pub fn topic_volume_series(
    model: &TopicModel,
    topic: usize,
    weeks: &[WeekKey],
) -> Result<Vec<usize>> {
    if topic >= model.k() {
        return Err(Error::Index {
            index: topic,
            len: model.k(),
        });
    }
    let mut counts: BTreeMap<WeekKey, usize> = BTreeMap::new();
    for (id, row) in model.doc_ids.iter().zip(&model.theta) {
        if argmax(row) == topic {
            *counts.entry(id.week).or_default() += 1;
        }
    }
    Ok(weeks
        .iter()
        .map(|w| counts.get(w).copied().unwrap_or(0))
        .collect())
}

pub fn divergence_csv(reports: &[PairReport]) -> String {
    let mut rows: Vec<(WeekKey, usize, usize, f64, f64)> = reports
        .iter()
        .flat_map(|r| {
            r.rows
                .iter()
                .map(move |x| (x.week, r.a, r.b, x.jsd, x.convergence_score))
        })
        .collect();
    rows.sort_by(|x, y| (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["week", "cluster_a", "cluster_b", "jsd", "convergence_score"])
        .expect("in-memory write");
    for (week, a, b, d, s) in rows {
        w.write_record([
            week.to_string(),
            a.to_string(),
            b.to_string(),
            format!("{d:.6}"),
            format!("{s:.6}"),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn wk(i: u32) -> WeekKey {
        let d = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap() + chrono::Days::new(7 * i as u64);
        WeekKey::from_monday(d).unwrap()
    }

    fn theta(rows: &[(&str, &[f64])]) -> BTreeMap<String, Vec<f64>> {
        rows.iter()
            .map(|(a, r)| (a.to_string(), r.to_vec()))
            .collect()
    }

    fn members(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn distribution_examples() {
        let t = theta(&[("a", &[0.7, 0.3]), ("b", &[1.0, 0.0]), ("c", &[0.0, 1.0])]);
        assert_eq!(
            cluster_topic_distribution(&t, &members(&["a"])).unwrap(),
            vec![0.7, 0.3]
        );
        assert_eq!(
            cluster_topic_distribution(&t, &members(&["b", "c"])).unwrap(),
            vec![0.5, 0.5]
        );
        let t3 = theta(&[
            ("x", &[0.2, 0.3, 0.5]),
            ("y", &[0.6, 0.1, 0.3]),
            ("z", &[0.1, 0.8, 0.1]),
        ]);
        let d = cluster_topic_distribution(&t3, &members(&["x", "y", "z"])).unwrap();
        for (got, want) in d.iter().zip([0.3, 0.4, 0.3]) {
            assert!((got - want).abs() < 1e-12);
        }
        let err = cluster_topic_distribution(&t, &members(&["nobody"])).unwrap_err();
        assert!(err.to_string().contains("empty cluster-week"));
    }

    #[test]
    fn jsd_examples() {
        assert_eq!(jsd(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(jsd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((jsd(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 0.311278).abs() < 1e-6);
        assert!((convergence_score(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 0.688722).abs() < 1e-6);
        assert_eq!(convergence_score(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(convergence_score(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn jsd_contract_errors() {
        assert!(matches!(jsd(&[1.0], &[0.5, 0.5]), Err(Error::Contract(_))));
        assert!(matches!(
            jsd(&[0.5, 0.6], &[0.5, 0.5]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            jsd(&[1.5, -0.5], &[0.5, 0.5]),
            Err(Error::Contract(_))
        ));
    }

    fn series_of(entries: &[(usize, u32, [f64; 2])]) -> ClusterTopicSeries {
        entries
            .iter()
            .map(|&(c, w, p)| ((c, wk(w)), p.to_vec()))
            .collect()
    }

    #[test]
    fn series_uses_common_weeks() {
        let s = series_of(&[
            (0, 0, [1.0, 0.0]),
            (0, 1, [0.5, 0.5]),
            (0, 2, [0.5, 0.5]),
            (1, 0, [0.0, 1.0]),
            (1, 2, [0.5, 0.5]),
            (1, 3, [0.5, 0.5]),
        ]);
        let rows = convergence_series(&s, 0, 1).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.week).collect::<Vec<_>>(),
            vec![wk(0), wk(2)]
        );
        assert_eq!(rows[0].jsd, 1.0);
        assert_eq!(rows[1].convergence_score, 1.0);
        assert!(convergence_series(&s, 0, 0).is_err());
        assert!(convergence_series(&s, 0, 7).unwrap().is_empty());
    }

    #[test]
    fn three_common_weeks() {
        let s = series_of(&[
            (0, 0, [1.0, 0.0]),
            (0, 1, [0.9, 0.1]),
            (0, 2, [0.8, 0.2]),
            (1, 0, [0.2, 0.8]),
            (1, 1, [0.3, 0.7]),
            (1, 2, [0.4, 0.6]),
        ]);
        let report = convergence_report(&s, TrendConfig::default()).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].rows.len(), 3);
        assert!(report[0].trend.is_none());
        assert!(report[0].rows.windows(2).all(|w| w[0].week < w[1].week));
    }

    #[test]
    fn trend_examples() {
        let (t, slope) =
            detect_convergence(&[0.30, 0.40, 0.52, 0.61, 0.70], TrendConfig::default()).unwrap();
        assert_eq!(t, Trend::Converging);
        assert!((slope - 0.101).abs() < 1e-12);
        assert_eq!(
            detect_convergence(&[0.4; 5], TrendConfig::default()).unwrap(),
            (Trend::Stable, 0.0)
        );
        let (t, _) =
            detect_convergence(&[0.70, 0.61, 0.52, 0.40, 0.30], TrendConfig::default()).unwrap();
        assert_eq!(t, Trend::Diverging);
        assert!(detect_convergence(&[0.1, 0.2, 0.3], TrendConfig::default()).is_err());
    }

    #[test]
    fn argmax_ties_to_smallest() {
        assert_eq!(argmax(&[0.25; 4]), 0);
        assert_eq!(argmax(&[0.1, 0.45, 0.45]), 1);
    }

    #[test]
    fn divergence_csv_format() {
        let s = series_of(&[(0, 0, [1.0, 0.0]), (1, 0, [0.5, 0.5])]);
        let report = convergence_report(&s, TrendConfig::default()).unwrap();
        let csv = divergence_csv(&report);
        assert_eq!(
            csv,
            "week,cluster_a,cluster_b,jsd,convergence_score\n2020-01-06,0,1,0.311278,0.688722\n"
        );
    }

    fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], k).prop_filter_map(
            "all zero",
            |v| {
                let s: f64 = v.iter().sum();
                (s > 0.0).then(|| v.iter().map(|x| x / s).collect())
            },
        )
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|k| (distribution(k), distribution(k)))
    }

    proptest! {
        #[test]
        fn jsd_symmetric_and_bounded((p, q) in pair()) {
            let d = jsd(&p, &q).unwrap();
            prop_assert_eq!(d, jsd(&q, &p).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!(jsd(&p, &p).unwrap().abs() < 1e-12);
        }

        #[test]
        fn trend_is_shift_invariant(scores in prop::collection::vec(0.0f64..1.0, 4..12), c in -0.5f64..0.5) {
            let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
            let cfg = TrendConfig::default();
            prop_assert_eq!(detect_convergence(&scores, cfg).unwrap().0, detect_convergence(&shifted, cfg).unwrap().0);
        }

        #[test]
        fn distribution_ignores_member_order(rows in prop::collection::vec(distribution(3), 1..8), picks in prop::collection::vec(any::<bool>(), 8)) {
            let t: BTreeMap<String, Vec<f64>> = rows.iter().enumerate().map(|(i, r)| (format!("a{i}"), r.clone())).collect();
            let chosen: Vec<String> = (0..rows.len()).filter(|&i| picks[i]).map(|i| format!("a{i}")).collect();
            prop_assume!(!chosen.is_empty());
            let forward: BTreeSet<String> = chosen.iter().cloned().collect();
            let backward: BTreeSet<String> = chosen.iter().rev().cloned().collect();
            let d = cluster_topic_distribution(&t, &forward).unwrap();
            prop_assert_eq!(&d, &cluster_topic_distribution(&t, &backward).unwrap());
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn report_rows_sum_to_one(entries in prop::collection::vec((0usize..3, 0u32..6, distribution(2)), 1..20)) {
            let s: ClusterTopicSeries = entries.into_iter().map(|(c, w, p)| ((c, wk(w)), p)).collect();
            for r in convergence_report(&s, TrendConfig::default()).unwrap() {
                for row in &r.rows {
                    prop_assert_eq!(row.jsd + row.convergence_score, 1.0);
                }
            }
        }
    }
}
