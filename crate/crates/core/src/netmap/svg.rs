//! Static SVG rendering of a map snapshot.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::MapSnapshot;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f", "#393b79", "#637939",
];

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 24.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Legend key for a cluster: its group when labeled, else the cluster id.
fn legend_key(snapshot: &MapSnapshot, cluster: usize) -> String {
    match snapshot.assignment.labels.get(&cluster) {
        Some(l) => l.group.clone(),
        None => format!("cluster {cluster}"),
    }
}

/// Nodes colored by labeled group (or cluster when unlabeled), radius
/// proportional to degree, edges in light gray, legend on the right.
pub fn render_map_svg(snapshot: &MapSnapshot) -> String {
    let graph = &snapshot.graph;
    let positions = snapshot
        .layout
        .clone()
        .unwrap_or_else(|| super::fr_layout(graph, 100, 0));
    let keys: Vec<String> = (0..snapshot.assignment.n_clusters)
        .map(|c| legend_key(snapshot, c))
        .collect();
    let mut colors: BTreeMap<&str, &str> = BTreeMap::new();
    for key in &keys {
        let next = PALETTE[colors.len() % PALETTE.len()];
        colors.entry(key.as_str()).or_insert(next);
    }
    let max_degree = (0..graph.len())
        .map(|v| graph.degree(v))
        .max()
        .unwrap_or(0)
        .max(1);
    let span = CANVAS - 2.0 * MARGIN;
    let to_px = |(x, y): (f64, f64)| (MARGIN + x * span, MARGIN + y * span);

    let legend_w = 220.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = CANVAS + legend_w,
        h = CANVAS
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, "<title>{}</title>", escape(&snapshot.month)).unwrap();
    writeln!(
        s,
        r##"<g stroke="#cccccc" stroke-width="0.5" stroke-opacity="0.6">"##
    )
    .unwrap();
    for (a, b) in graph.undirected_edges() {
        let (x1, y1) = to_px(positions[a]);
        let (x2, y2) = to_px(positions[b]);
        writeln!(
            s,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, r#"<g stroke="white" stroke-width="0.5">"#).unwrap();
    for v in 0..graph.len() {
        let (x, y) = to_px(positions[v]);
        let r = 2.0 + 8.0 * graph.degree(v) as f64 / max_degree as f64;
        let color = keys
            .get(
                snapshot
                    .assignment
                    .cluster_of
                    .get(v)
                    .copied()
                    .unwrap_or(usize::MAX),
            )
            .map_or("#999999", |k| colors[k.as_str()]);
        writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{color}"><title>{}</title></circle>"#,
            escape(graph.id(v))
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, r#"<g font-family="sans-serif" font-size="13">"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-weight="bold">{}</text>"#,
        CANVAS + 10.0,
        MARGIN,
        escape(&snapshot.month)
    )
    .unwrap();
    for (i, (key, color)) in colors.iter().enumerate() {
        let y = MARGIN + 24.0 + i as f64 * 20.0;
        writeln!(
            s,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            CANVAS + 10.0,
            y - 10.0,
            CANVAS + 28.0,
            y,
            escape(key)
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    s.push_str("</svg>\n");
    s
}
