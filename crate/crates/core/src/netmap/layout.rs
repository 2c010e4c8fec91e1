//! Fruchterman-Reingold force-directed layout.
//!
//! Each connected component is laid out on its own, normalized to a square
//! cell whose side grows with the square root of the component size, and the
//! cells are shelf-packed without overlap. The result is scaled into the
//! unit square.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FollowGraph;
use crate::topicmodel::fnv1a;

pub type Point = (f64, f64);

/// FR simulation in a unit frame.
#[derive(Debug, Clone)]
pub struct ForceLayout {
    positions: Vec<Point>,
    edges: Vec<(usize, usize)>,
    ideal: f64,
}

impl ForceLayout {
    pub fn new(positions: Vec<Point>, edges: Vec<(usize, usize)>) -> Self {
        let ideal = (1.0 / positions.len().max(1) as f64).sqrt();
        ForceLayout {
            positions,
            edges,
            ideal,
        }
    }

    /// Ideal edge length `k = sqrt(area / n)`.
    pub fn ideal_length(&self) -> f64 {
        self.ideal
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// One iteration; no node moves further than `temperature`.
    pub fn step(&mut self, temperature: f64) {
        let n = self.positions.len();
        let k = self.ideal;
        let mut disp = vec![(0.0, 0.0); n];
        for v in 0..n {
            for u in v + 1..n {
                let (dx, dy, d) = self.delta(v, u);
                let f = k * k / d;
                disp[v].0 += dx / d * f;
                disp[v].1 += dy / d * f;
                disp[u].0 -= dx / d * f;
                disp[u].1 -= dy / d * f;
            }
        }
        for &(v, u) in &self.edges {
            let (dx, dy, d) = self.delta(v, u);
            let f = d * d / k;
            disp[v].0 -= dx / d * f;
            disp[v].1 -= dy / d * f;
            disp[u].0 += dx / d * f;
            disp[u].1 += dy / d * f;
        }
        for (p, (dx, dy)) in self.positions.iter_mut().zip(disp) {
            let len = (dx * dx + dy * dy).sqrt();
            if len > 0.0 {
                let step = len.min(temperature);
                p.0 += dx / len * step;
                p.1 += dy / len * step;
            }
        }
    }

    /// Vector from u to v and its length, kept away from zero.
    fn delta(&self, v: usize, u: usize) -> (f64, f64, f64) {
        let (pv, pu) = (self.positions[v], self.positions[u]);
        let (mut dx, mut dy) = (pv.0 - pu.0, pv.1 - pu.1);
        let mut d = (dx * dx + dy * dy).sqrt();
        if d < 1e-9 {
            // coincident points: separate along a fixed direction
            dx = 1e-6 * (1 + v % 7) as f64;
            dy = 1e-6 * (1 + u % 5) as f64;
            d = (dx * dx + dy * dy).sqrt();
        }
        (dx, dy, d)
    }

    /// Runs `iterations` steps with linear cooling from `t0` towards zero.
    pub fn run(&mut self, iterations: usize, t0: f64) {
        for it in 0..iterations {
            let t = t0 * (1.0 - it as f64 / iterations as f64);
            self.step(t);
        }
    }
}

fn normalize_to_unit(points: &mut [Point]) {
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points.iter() {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let span = (max_x - min_x).max(max_y - min_y);
    for p in points.iter_mut() {
        if span > 0.0 {
            // center the shorter axis
            p.0 = (p.0 - min_x) / span + (1.0 - (max_x - min_x) / span) / 2.0;
            p.1 = (p.1 - min_y) / span + (1.0 - (max_y - min_y) / span) / 2.0;
        } else {
            *p = (0.5, 0.5);
        }
    }
}

/// Node positions in `[0, 1]^2`, indexed like the graph; deterministic given
/// `seed`.
pub fn fr_layout(graph: &FollowGraph, iterations: usize, seed: u64) -> Vec<Point> {
    let n = graph.len();
    let mut out = vec![(0.5, 0.5); n];
    if n <= 1 {
        return out;
    }
    let mut comps = graph.components();
    // biggest first, ties by smallest member
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut cells: Vec<(Vec<usize>, Vec<Point>, f64)> = Vec::new();
    for comp in comps {
        let mut local = vec![usize::MAX; n];
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let edges: Vec<(usize, usize)> = graph
            .undirected_edges()
            .filter(|&(a, _)| local[a] != usize::MAX)
            .map(|(a, b)| (local[a], local[b]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(graph.id(comp[0]).as_bytes()));
        let start: Vec<Point> = comp.iter().map(|_| (rng.random(), rng.random())).collect();
        let mut sim = ForceLayout::new(start, edges);
        sim.run(iterations, 0.1);
        let mut pts = sim.positions().to_vec();
        normalize_to_unit(&mut pts);
        let side = (comp.len() as f64).sqrt();
        cells.push((comp, pts, side));
    }

    // shelf packing: rows no wider than the side of the total-area square
    let area: f64 = cells.iter().map(|c| c.2 * c.2).sum();
    let row_limit = area.sqrt().max(cells[0].2);
    let pad = 0.15;
    let (mut x, mut y, mut row_h) = (0.0f64, 0.0f64, 0.0f64);
    let mut placed: Vec<Point> = Vec::with_capacity(n);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (comp, pts, side) in &cells {
        if x > 0.0 && x + side > row_limit + 1e-9 {
            x = 0.0;
            y += row_h + pad;
            row_h = 0.0;
        }
        for (&v, &(px, py)) in comp.iter().zip(pts) {
            order.push(v);
            placed.push((x + px * side, y + py * side));
        }
        x += side + pad;
        row_h = row_h.max(*side);
    }
    normalize_to_unit(&mut placed);
    for (v, p) in order.into_iter().zip(placed) {
        out[v] = p;
    }
    out
}
