//! Minimum spanning forests.
//!
//! Edges are totally ordered by `(weight, min index, max index)`, so the
//! forest is unique and every routine here returns the same edge set for the
//! same graph. The production path is filter-Kruskal: the lighter half of the
//! edges (by median selection) is processed first, then heavy edges already
//! spanned by the partial forest are discarded before recursing. With a strict
//! total order this selects exactly the edges plain Kruskal would.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::rgg::Rgg;

const SORT_CUTOFF: usize = 4096;
const BRUTE_FORCE_MAX_NODES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub i: u32,
    pub j: u32,
    pub weight: f64,
}

impl MstEdge {
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstResult {
    pub node_count: usize,
    /// Sum of edge weights, accumulated in increasing edge order.
    pub total_weight: f64,
    /// Forest edges in increasing `(weight, i, j)` order.
    pub edges: Vec<MstEdge>,
    pub degrees: Vec<u32>,
    pub components: usize,
    pub forest: bool,
}

impl MstResult {
    pub(crate) fn from_edges(node_count: usize, mut edges: Vec<MstEdge>, components: usize) -> Self {
        edges.sort_unstable_by(MstEdge::cmp_key);
        let mut degrees = vec![0u32; node_count];
        for e in &edges {
            degrees[e.i as usize] += 1;
            degrees[e.j as usize] += 1;
        }
        let total_weight = edges.iter().map(|e| e.weight).sum();
        Self {
            node_count,
            total_weight,
            edges,
            degrees,
            components,
            forest: components > 1,
        }
    }

    /// `½ Σ_i w(X_i, T)`: half the sum over nodes of incident tree weight.
    pub fn half_incident_weight(&self) -> f64 {
        let mut incident = vec![0.0f64; self.node_count];
        for e in &self.edges {
            incident[e.i as usize] += e.weight;
            incident[e.j as usize] += e.weight;
        }
        0.5 * incident.iter().sum::<f64>()
    }

    pub fn summary(&self) -> MstSummary {
        MstSummary {
            node_count: self.node_count,
            total_weight: self.total_weight,
            edge_count: self.edges.len(),
            components: self.components,
            forest: self.forest,
            max_degree: self.degrees.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "weight"])?;
        for e in &self.edges {
            w.write_record([e.i.to_string(), e.j.to_string(), e.weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.summary())?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstSummary {
    pub node_count: usize,
    pub total_weight: f64,
    pub edge_count: usize,
    pub components: usize,
    pub forest: bool,
    pub max_degree: u32,
}

fn filter_kruskal(edges: &mut [MstEdge], dsu: &mut DisjointSets, out: &mut Vec<MstEdge>) {
    if dsu.sets() <= 1 || edges.is_empty() {
        return;
    }
    if edges.len() <= SORT_CUTOFF {
        edges.sort_unstable_by(MstEdge::cmp_key);
        for e in edges.iter() {
            if dsu.union(e.i, e.j) {
                out.push(*e);
                if dsu.sets() == 1 {
                    return;
                }
            }
        }
        return;
    }
    let mid = edges.len() / 2;
    edges.select_nth_unstable_by(mid, MstEdge::cmp_key);
    let (light, heavy) = edges.split_at_mut(mid);
    filter_kruskal(light, dsu, out);
    let mut keep = 0;
    for k in 0..heavy.len() {
        let e = heavy[k];
        if !dsu.same(e.i, e.j) {
            heavy[keep] = e;
            keep += 1;
        }
    }
    filter_kruskal(&mut heavy[..keep], dsu, out);
}

/// Per-component minimum spanning trees of `g`, summed.
pub fn minimum_spanning_forest(g: &Rgg) -> MstResult {
    let n = g.node_count();
    let mut work: Vec<MstEdge> = g
        .edges
        .iter()
        .map(|e| MstEdge {
            i: e.i,
            j: e.j,
            weight: e.weight,
        })
        .collect();
    let mut dsu = DisjointSets::new(n);
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    filter_kruskal(&mut work, &mut dsu, &mut chosen);
    MstResult::from_edges(n, chosen, dsu.sets())
}

/// Exhaustive minimum spanning forest by branch-and-bound over edge subsets.
///
/// Independent of the union-find and sorting machinery; meant as a test oracle.
pub fn brute_force_mst(g: &Rgg) -> Result<MstResult> {
    let n = g.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::Refused(format!(
            "exhaustive search limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )));
    }

    // components by depth-first search over an adjacency matrix
    let mut adj = [[false; BRUTE_FORCE_MAX_NODES]; BRUTE_FORCE_MAX_NODES];
    for e in &g.edges {
        adj[e.i as usize][e.j as usize] = true;
        adj[e.j as usize][e.i as usize] = true;
    }
    let mut seen = [false; BRUTE_FORCE_MAX_NODES];
    let mut components = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        components += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if adj[u][v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }

    let target = n - components;
    let edges = &g.edges;
    let mut labels = [0u8; BRUTE_FORCE_MAX_NODES];
    for (k, l) in labels.iter_mut().enumerate() {
        *l = k as u8;
    }

    struct Search<'a> {
        edges: &'a [crate::rgg::Edge],
        target: usize,
        current: Vec<usize>,
        best_weight: f64,
        best: Option<Vec<usize>>,
    }

    impl Search<'_> {
        fn go(&mut self, idx: usize, weight: f64, labels: [u8; BRUTE_FORCE_MAX_NODES]) {
            if self.current.len() == self.target {
                if weight < self.best_weight {
                    self.best_weight = weight;
                    self.best = Some(self.current.clone());
                }
                return;
            }
            if weight >= self.best_weight
                || self.edges.len() - idx < self.target - self.current.len()
            {
                return;
            }
            let e = self.edges[idx];
            let (la, lb) = (labels[e.i as usize], labels[e.j as usize]);
            if la != lb {
                let mut merged = labels;
                for l in merged.iter_mut() {
                    if *l == lb {
                        *l = la;
                    }
                }
                self.current.push(idx);
                self.go(idx + 1, weight + e.weight, merged);
                self.current.pop();
            }
            self.go(idx + 1, weight, labels);
        }
    }

    let mut search = Search {
        edges,
        target,
        current: Vec::with_capacity(target),
        best_weight: f64::INFINITY,
        best: None,
    };
    search.go(0, 0.0, labels);
    let picked = search.best.unwrap_or_default();
    let chosen = picked
        .into_iter()
        .map(|k| MstEdge {
            i: edges[k].i,
            j: edges[k].j,
            weight: edges[k].weight,
        })
        .collect();
    Ok(MstResult::from_edges(n, chosen, components))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub max_degree: u32,
    /// `histogram[d]` = number of nodes with forest degree `d`.
    pub histogram: Vec<usize>,
}

pub fn mst_degree_stats(m: &MstResult) -> DegreeStats {
    let max_degree = m.degrees.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max_degree as usize + 1];
    for &d in &m.degrees {
        histogram[d as usize] += 1;
    }
    DegreeStats {
        max_degree,
        histogram,
    }
}
