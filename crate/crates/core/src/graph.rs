//! Weighted undirected graphs, Laplacian products and edge-list ingestion.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted undirected graph in CSR form.
///
/// Edges are kept in first-insertion order with `u < v`. The adjacency rows
/// list neighbours in the same order, and `degree[i]` is the left-to-right
/// sum of row `i`, which is also the order `laplacian_apply` sums in, so
/// `L·1` is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl Graph {
    /// Builds a graph from weighted edges. Self-loops are dropped and
    /// repeated pairs have their weights summed.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Ok(Self::build(n, edges)?.0)
    }

    /// Builds a graph and also returns `(merged_duplicates, dropped_self_loops)`.
    fn build(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<(Self, usize, usize)> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut merged: Vec<(usize, usize, f64)> = Vec::new();
        let mut duplicates = 0;
        let mut loops = 0;
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) has non-positive or non-finite weight {w}"
                )));
            }
            if u == v {
                loops += 1;
                continue;
            }
            let key = (u.min(v), u.max(v));
            match index.get(&key) {
                Some(&i) => {
                    merged[i].2 += w;
                    duplicates += 1;
                }
                None => {
                    index.insert(key, merged.len());
                    merged.push((key.0, key.1, w));
                }
            }
        }
        Ok((Self::from_unique_edges(n, merged), duplicates, loops))
    }

    fn from_unique_edges(n: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(u, v, _) in &edges {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0usize; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(u, v, w) in &edges {
            neighbors[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        let degree = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum())
            .collect();
        Graph {
            n,
            edges,
            offsets,
            neighbors,
            weights,
            degree,
        }
    }

    /// Unit-weight path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::from_unique_edges(n, (1..n).map(|i| (i - 1, i, 1.0)).collect())
    }

    /// Unit-weight complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0)))
            .collect();
        Self::from_unique_edges(n, edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v, w)` with `u < v`, in insertion order.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Neighbours of `v` with edge weights.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Weight of edge `{u, v}`, or zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.neighbors(u)
            .find(|&(x, _)| x == v)
            .map_or(0.0, |(_, w)| w)
    }

    /// Sum of all edge weights (`m`).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// `(D - A) x`.
    pub fn laplacian_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.n, x.len())?;
        let mut out = vec![0.0; self.n];
        self.laplacian_apply_into(x, &mut out);
        Ok(out)
    }

    /// `(D - A) x` into a caller-provided buffer. Lengths must equal `n`.
    pub(crate) fn laplacian_apply_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.weights[k] * x[self.neighbors[k]];
            }
            out[i] = self.degree[i] * x[i] - acc;
        }
    }

    /// `xᵀ L x` evaluated edge-wise as `Σ w_uv (x_u - x_v)²`.
    pub fn laplacian_quadratic(&self, x: &[f64]) -> Result<f64> {
        Error::check_len(self.n, x.len())?;
        Ok(self
            .edges
            .iter()
            .map(|&(u, v, w)| {
                let d = x[u] - x[v];
                w * d * d
            })
            .sum())
    }

    /// Dense `L`. Intended for small graphs and oracles.
    pub fn dense_laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for &(u, v, w) in &self.edges {
            l[(u, v)] -= w;
            l[(v, u)] -= w;
            l[(u, u)] += w;
            l[(v, v)] += w;
        }
        l
    }

    /// Connected components as a per-node label, labels in order of the
    /// smallest node they contain.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for (u, _) in self.neighbors(v) {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        queue.push_back(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Subgraph induced by the largest connected component. Ties go to the
    /// component holding the smallest node id. Surviving nodes keep their
    /// relative order.
    pub fn largest_component(&self) -> ComponentSubgraph {
        let label = self.components();
        let count = label.iter().copied().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; count];
        for &c in &label {
            sizes[c] += 1;
        }
        // Component labels are ordered by smallest member, so the first
        // maximum wins ties.
        let best = sizes
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, usize)>, (c, &s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((c, s)),
            })
            .map(|(c, _)| c);

        let mut old_to_new = vec![None; self.n];
        let mut new_to_old = Vec::new();
        if let Some(best) = best {
            for (v, &c) in label.iter().enumerate() {
                if c == best {
                    old_to_new[v] = Some(new_to_old.len());
                    new_to_old.push(v);
                }
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v, w)| Some((old_to_new[u]?, old_to_new[v]?, w)))
            .collect();
        ComponentSubgraph {
            graph: Self::from_unique_edges(new_to_old.len(), edges),
            old_to_new,
            new_to_old,
        }
    }

    /// Parses an edge list. See [`IngestOptions`] for the id conventions.
    ///
    /// Each non-comment line is `u v [w]`, split on whitespace and/or commas.
    /// `#` and `%` start comment lines. A `# nodes: N` line switches the
    /// file to numeric ids in `0..N`, which is what [`Graph::to_edge_list`]
    /// writes.
    pub fn from_edge_list(text: &str, options: &IngestOptions) -> Result<EdgeListParse> {
        let mut mode = options.ids;
        let mut declared_nodes: Option<usize> = None;
        let mut labels: Vec<String> = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let mut raw = Vec::new();
        let mut max_numeric: Option<usize> = None;

        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#').or_else(|| trimmed.strip_prefix('%')) {
                if let Some(n) = parse_nodes_directive(comment) {
                    let n = n.map_err(|message| Error::Parse {
                        line: lineno,
                        message,
                    })?;
                    declared_nodes = Some(n);
                    mode = IdMode::Numeric;
                }
                continue;
            }
            let tokens: Vec<&str> = trimmed
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            if tokens.len() < 2 || tokens.len() > 3 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected `u v [w]`, found {} fields", tokens.len()),
                });
            }
            let weight = match tokens.get(2) {
                None => 1.0,
                Some(t) => t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid weight `{t}`"),
                })?,
            };
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::validation(format!(
                    "line {lineno}: weight must be positive and finite, got {weight}"
                )));
            }
            let mut ids = [0usize; 2];
            for (slot, token) in ids.iter_mut().zip(&tokens[..2]) {
                *slot = match mode {
                    IdMode::Numeric => {
                        let id = token.parse::<usize>().map_err(|_| Error::Parse {
                            line: lineno,
                            message: format!("node id `{token}` is not a nonnegative integer"),
                        })?;
                        if let Some(n) = declared_nodes {
                            if id >= n {
                                return Err(Error::Parse {
                                    line: lineno,
                                    message: format!("node id {id} outside declared 0..{n}"),
                                });
                            }
                        }
                        max_numeric = Some(max_numeric.map_or(id, |m: usize| m.max(id)));
                        id
                    }
                    IdMode::FirstSeen => match lookup.get(*token) {
                        Some(&id) => id,
                        None => {
                            let id = labels.len();
                            labels.push((*token).to_string());
                            lookup.insert((*token).to_string(), id);
                            id
                        }
                    },
                };
            }
            raw.push((ids[0], ids[1], weight));
        }

        let n = match mode {
            IdMode::FirstSeen => labels.len(),
            IdMode::Numeric => {
                let n = declared_nodes.unwrap_or_else(|| max_numeric.map_or(0, |m| m + 1));
                labels = (0..n).map(|i| i.to_string()).collect();
                n
            }
        };
        if n == 0 {
            return Err(Error::validation("edge list describes an empty graph"));
        }
        let (graph, merged_duplicates, dropped_self_loops) = Self::build(n, raw)?;
        Ok(EdgeListParse {
            graph,
            labels,
            merged_duplicates,
            dropped_self_loops,
        })
    }

    /// Serializes as `u v w` lines with 17 significant digits, preceded by a
    /// `# nodes: N` header so isolated nodes and ids survive a round trip.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 32 + 16);
        let _ = writeln!(out, "# nodes: {}", self.n);
        for &(u, v, w) in &self.edges {
            let _ = writeln!(out, "{u} {v} {w:.16e}");
        }
        out
    }
}

fn parse_nodes_directive(comment: &str) -> Option<Result<usize, String>> {
    let rest = comment.trim().strip_prefix("nodes")?;
    let rest = rest.trim_start().strip_prefix(':').unwrap_or(rest).trim();
    Some(
        rest.parse::<usize>()
            .map_err(|_| format!("invalid node count `{rest}` in nodes directive")),
    )
}

/// How node tokens map to ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdMode {
    /// Any token is a label; labels get dense ids in first-seen order.
    #[default]
    FirstSeen,
    /// Tokens are integer ids used verbatim; `n` is the largest id plus one.
    Numeric,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestOptions {
    #[serde(default)]
    pub ids: IdMode,
}

/// Result of [`Graph::from_edge_list`].
#[derive(Debug, Clone)]
pub struct EdgeListParse {
    pub graph: Graph,
    /// Original label of each dense id.
    pub labels: Vec<String>,
    /// Number of repeated undirected edges folded into an earlier one.
    pub merged_duplicates: usize,
    pub dropped_self_loops: usize,
}

impl EdgeListParse {
    /// Dense id of an original label.
    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Output of [`Graph::largest_component`].
#[derive(Debug, Clone)]
pub struct ComponentSubgraph {
    pub graph: Graph,
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}
