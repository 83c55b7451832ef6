//! Random graph generators (ER, BA, two-block SBM), the SBM expected graph,
//! and closed-form PD on that expected graph.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::PdDefinition;
use crate::opinion::{stream_rng, OpinionVector};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Erdős–Rényi `G(n, p)` with unit weights.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    gen_er_with(n, p, &mut stream_rng(seed, 0))
}

pub fn gen_er_with<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        return Err(Error::validation("ER graph needs at least one node"));
    }
    check_probability("p", p)?;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::new(n, edges)
}

/// Barabási–Albert preferential attachment. Starts from a star on
/// `m_ba + 1` nodes (hub 0); every later node adds `m_ba` edges to distinct
/// existing nodes picked with probability proportional to degree.
pub fn gen_ba(n: usize, m_ba: usize, seed: u64) -> Result<Graph> {
    gen_ba_with(n, m_ba, &mut stream_rng(seed, 0))
}

pub fn gen_ba_with<R: Rng + ?Sized>(n: usize, m_ba: usize, rng: &mut R) -> Result<Graph> {
    if m_ba == 0 || m_ba >= n {
        return Err(Error::validation(format!(
            "BA needs 1 <= m_ba < n, got m_ba = {m_ba}, n = {n}"
        )));
    }
    let mut edges = Vec::with_capacity(m_ba + (n - m_ba - 1) * m_ba);
    // Each node appears once per incident edge.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for v in 1..=m_ba {
        edges.push((0, v, 1.0));
        endpoints.extend([0, v]);
    }
    let mut chosen = Vec::with_capacity(m_ba);
    for v in m_ba + 1..n {
        chosen.clear();
        while chosen.len() < m_ba {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v, 1.0));
            endpoints.extend([t, v]);
        }
    }
    Graph::new(n, edges)
}

/// Two-block SBM: `V₊` is the first `n/2` nodes, `V₋` the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

impl SbmSpec {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        let spec = Self { n, p, q };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "SBM needs a positive even node count, got {}",
                self.n
            )));
        }
        check_probability("p", self.p)?;
        check_probability("q", self.q)
    }

    /// Extra conditions for the closed-form results: `0 < q < p`.
    pub fn validate_theory(&self) -> Result<()> {
        self.validate()?;
        if !(self.q > 0.0 && self.q < self.p) {
            return Err(Error::validation(format!(
                "closed forms need 0 < q < p, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        Ok(())
    }

    pub fn in_positive_block(&self, v: usize) -> bool {
        v < self.n / 2
    }

    /// `+1` on `V₊`, `−1` on `V₋`.
    pub fn opinions(&self) -> OpinionVector {
        let half = self.n / 2;
        OpinionVector::new((0..self.n).map(|i| if i < half { 1.0 } else { -1.0 }).collect())
            .expect("±1 opinions are in range")
    }
}

pub fn gen_sbm(spec: &SbmSpec, seed: u64) -> Result<(Graph, OpinionVector)> {
    gen_sbm_with(spec, &mut stream_rng(seed, 0))
}

pub fn gen_sbm_with<R: Rng + ?Sized>(spec: &SbmSpec, rng: &mut R) -> Result<(Graph, OpinionVector)> {
    spec.validate()?;
    let mut edges = Vec::new();
    for u in 0..spec.n {
        for v in u + 1..spec.n {
            let same = spec.in_positive_block(u) == spec.in_positive_block(v);
            if rng.random_bool(if same { spec.p } else { spec.q }) {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok((Graph::new(spec.n, edges)?, spec.opinions()))
}

/// Weighted complete graph of the expected adjacency: `p` within blocks,
/// `q` across, no self-loops.
pub fn sbm_expected_graph(spec: &SbmSpec) -> Result<Graph> {
    spec.validate()?;
    if !(spec.p > 0.0 && spec.q > 0.0) {
        return Err(Error::validation("expected SBM graph needs p, q > 0"));
    }
    let n = spec.n;
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            let same = spec.in_positive_block(u) == spec.in_positive_block(v);
            edges.push((u, v, if same { spec.p } else { spec.q }));
        }
    }
    Graph::new(n, edges)
}

/// PD of the expected SBM graph with `K = αI` and ±1 opinions:
/// standard `α²(1+nq)n/(nq+α)²`, alternative `α²n/(nq+α)`.
pub fn sbm_pd_closed_form(spec: &SbmSpec, alpha: f64, definition: PdDefinition) -> Result<f64> {
    spec.validate_theory()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!("alpha must be positive, got {alpha}")));
    }
    let n = spec.n as f64;
    let nq = n * spec.q;
    Ok(match definition {
        PdDefinition::Standard => alpha * alpha * (1.0 + nq) * n / ((nq + alpha) * (nq + alpha)),
        PdDefinition::Alternative => alpha * alpha * n / (nq + alpha),
    })
}
