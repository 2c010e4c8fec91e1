//! `report.md` rendering.

use std::fmt::Write;

use super::Analysis;
use crate::netmap::{density_ratio, ei_index, format_share};
use crate::topicmodel::top_words;
use crate::{Error, Result};

const REPORT_TOP_WORDS: usize = 8;

fn escape(cell: &str) -> String {
    cell.replace('|', "\\|")
}

pub fn render_report(a: &Analysis) -> Result<String> {
    let topics = a
        .topics
        .as_ref()
        .ok_or_else(|| Error::contract("report needs topics"))?;
    let bridges = a
        .bridges
        .as_ref()
        .ok_or_else(|| Error::contract("report needs bridges"))?;
    let conv = a
        .convergence
        .as_ref()
        .ok_or_else(|| Error::contract("report needs convergence"))?;
    let window = a
        .window
        .as_ref()
        .ok_or_else(|| Error::contract("report needs the window map"))?;
    let (start, end) = a.config.window()?;
    let model = &topics.model;
    let mut s = String::new();

    writeln!(s, "# Convergence report\n").unwrap();
    writeln!(s, "## Overview\n").unwrap();
    writeln!(
        s,
        "- Window: {} to {}",
        start.format("%Y-%m-%d"),
        end.format("%Y-%m-%d")
    )
    .unwrap();
    writeln!(
        s,
        "- Tweets: {} parsed, {} skipped, {} in window after language filter and deduplication",
        a.ingest.lines_parsed, a.ingest.lines_skipped, a.ingest.in_window
    )
    .unwrap();
    writeln!(s, "- Follow edges: {}", a.ingest.follow_edges).unwrap();
    writeln!(
        s,
        "- Documents: {} account-weeks over {} weeks, vocabulary of {} terms",
        topics.n_documents,
        conv.weeks.len(),
        model.n_terms()
    )
    .unwrap();
    writeln!(
        s,
        "- Topics: K = {}, alpha = {}, beta = {}, mean UMass coherence {:.4}",
        model.k(),
        model.config.alpha,
        model.config.beta,
        topics.coherence.mean
    )
    .unwrap();
    writeln!(s, "- Seed: {}\n", a.config.rng_seed).unwrap();

    writeln!(s, "## Map Snapshots\n").unwrap();
    for snap in a.snapshots.iter().chain(std::iter::once(window)) {
        writeln!(s, "### {}\n", snap.month).unwrap();
        writeln!(
            s,
            "Seed-active accounts: {}. After k-core pruning (k = {}): {} accounts, {} edges, {} clusters.\n",
            snap.members.len(),
            a.config.map.kcore_k,
            snap.graph.len(),
            snap.graph.undirected_edge_count(),
            snap.assignment.n_clusters
        )
        .unwrap();
        for w in &snap.warnings {
            writeln!(s, "> warning: {w}\n").unwrap();
        }
        if snap.assignment.n_clusters == 0 {
            continue;
        }
        writeln!(
            s,
            "| Cluster | Label | Group | Members | Share | E-I index | Density ratio |"
        )
        .unwrap();
        writeln!(s, "|---|---|---|---|---|---|---|").unwrap();
        for c in 0..snap.assignment.n_clusters {
            let nodes = snap.cluster_nodes(c);
            let label = snap.assignment.labels.get(&c);
            let ratio = density_ratio(&snap.graph, &nodes)
                .map(|r| format!("{r:.3}"))
                .unwrap_or_else(|_| "n/a".into());
            writeln!(
                s,
                "| {c} | {} | {} | {} | {} | {:.3} | {ratio} |",
                escape(label.map(|l| l.label.as_str()).unwrap_or("")),
                escape(label.map(|l| l.group.as_str()).unwrap_or("")),
                nodes.len(),
                format_share(snap.shares[c]),
                ei_index(&snap.graph, &nodes)?
            )
            .unwrap();
        }
        writeln!(s).unwrap();
    }

    writeln!(s, "## Topics\n").unwrap();
    writeln!(s, "| Topic | Coherence | Top words |").unwrap();
    writeln!(s, "|---|---|---|").unwrap();
    for t in 0..model.k() {
        let words: Vec<String> = top_words(model, t, REPORT_TOP_WORDS)?
            .into_iter()
            .map(|w| w.0)
            .collect();
        writeln!(
            s,
            "| {t} | {:.4} | {} |",
            topics.coherence.per_topic[t],
            escape(&words.join(", "))
        )
        .unwrap();
    }
    writeln!(s).unwrap();

    writeln!(s, "## Bridges\n").unwrap();
    if bridges.dominant.is_empty() {
        writeln!(s, "No week has a mapped account with a document.\n").unwrap();
    } else {
        writeln!(s, "| Week | Dominant topic | Max bridging | Account |").unwrap();
        writeln!(s, "|---|---|---|---|").unwrap();
        for &(week, topic) in &bridges.dominant {
            let row = bridges
                .rows
                .iter()
                .find(|r| r.week == week && r.topic == topic)
                .expect("dominant topic has a row");
            writeln!(
                s,
                "| {week} | {topic} | {:.6} | {} |",
                row.max_bc,
                escape(row.argmax.as_deref().unwrap_or(""))
            )
            .unwrap();
        }
        writeln!(s).unwrap();
    }

    writeln!(s, "## Convergence\n").unwrap();
    writeln!(s, "Clusters are those of the {} map.\n", window.month).unwrap();
    if conv.reports.is_empty() {
        writeln!(
            s,
            "Fewer than two clusters have documents; nothing to compare.\n"
        )
        .unwrap();
    }
    for r in &conv.reports {
        writeln!(s, "### Clusters {} and {}\n", r.a, r.b).unwrap();
        match r.trend {
            Some((trend, slope)) => {
                writeln!(s, "Trend: {trend} (slope {slope:+.4} per week)\n").unwrap()
            }
            None => writeln!(s, "Trend: not assessed ({} common weeks)\n", r.rows.len()).unwrap(),
        }
        if r.rows.is_empty() {
            continue;
        }
        writeln!(s, "| Week | JSD | Convergence score |").unwrap();
        writeln!(s, "|---|---|---|").unwrap();
        for row in &r.rows {
            writeln!(
                s,
                "| {} | {:.6} | {:.6} |",
                row.week, row.jsd, row.convergence_score
            )
            .unwrap();
        }
        writeln!(s).unwrap();
    }

    writeln!(s, "### Topic volume\n").unwrap();
    let active: Vec<usize> = (0..model.k())
        .filter(|&t| conv.volumes[t].iter().any(|&c| c > 0))
        .collect();
    write!(s, "| Week |").unwrap();
    for t in &active {
        write!(s, " t{t} |").unwrap();
    }
    write!(s, "\n|---|").unwrap();
    for _ in &active {
        write!(s, "---|").unwrap();
    }
    writeln!(s).unwrap();
    for (i, week) in conv.weeks.iter().enumerate() {
        write!(s, "| {week} |").unwrap();
        for &t in &active {
            write!(s, " {} |", conv.volumes[t][i]).unwrap();
        }
        writeln!(s).unwrap();
    }
    Ok(s)
}
