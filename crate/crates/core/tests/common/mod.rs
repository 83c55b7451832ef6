//! Shared helpers: seeded random instances and a dense oracle that shares
//! no code with the library's solvers.

#![allow(dead_code)]

use fjpd::opinion::stream_rng;
use fjpd::{Graph, OpinionVector, StubbornnessVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 0xACCE)
}

/// Random weighted graph: a random spanning tree (when `connected`) plus
/// each other pair with probability `p`, weights in `[0.1, 3]`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, connected: bool) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        if connected {
            let u = rng.random_range(0..v);
            edges.push((u, v, rng.random_range(0.1..=3.0)));
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, rng.random_range(0.1..=3.0)));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_opinions(rng: &mut impl Rng, n: usize) -> OpinionVector {
    OpinionVector::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap()
}

/// Stubbornness in `(0, hi]`.
pub fn random_stubbornness(rng: &mut impl Rng, n: usize, hi: f64) -> StubbornnessVector {
    StubbornnessVector::new((0..n).map(|_| hi * (1.0 - rng.random::<f64>())).collect()).unwrap()
}

/// Mean-zero opinions in `[-1, 1]` with `s[l] = 0`.
pub fn neutral_opinions(rng: &mut impl Rng, n: usize, l: usize) -> OpinionVector {
    let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    s[l] = 0.0;
    if n > 1 {
        let shift = s.iter().sum::<f64>() / (n - 1) as f64;
        for (i, v) in s.iter_mut().enumerate() {
            if i != l {
                *v -= shift;
            }
        }
    }
    let peak = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    OpinionVector::new(s.iter().map(|v| v / peak).collect()).unwrap()
}

pub fn random_instance(
    rng: &mut impl Rng,
    n: usize,
) -> (Graph, OpinionVector, StubbornnessVector) {
    let p = rng.random_range(0.0..=(6.0 / n as f64).min(1.0));
    let connected = rng.random_bool(0.8);
    let g = random_graph(rng, n, p, connected);
    let s = random_opinions(rng, n);
    let k = random_stubbornness(rng, n, 10.0);
    (g, s, k)
}

/// Row-major dense matrix.
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    /// Laplacian assembled edge by edge.
    pub fn laplacian(g: &Graph) -> Self {
        let mut m = Self::zeros(g.node_count());
        for &(u, v, w) in g.edges() {
            m.add(u, u, w);
            m.add(v, v, w);
            m.add(u, v, -w);
            m.add(v, u, -w);
        }
        m
    }

    pub fn plus_diag(mut self, d: &[f64]) -> Self {
        for (i, v) in d.iter().enumerate() {
            self.add(i, i, *v);
        }
        self
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j) * x[j]).sum())
            .collect()
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut x = b.to_vec();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))
                .unwrap();
            if p != c {
                for j in 0..n {
                    a.swap(c * n + j, p * n + j);
                }
                x.swap(c, p);
            }
            let piv = a[c * n + c];
            for r in c + 1..n {
                let f = a[r * n + c] / piv;
                if f != 0.0 {
                    for j in c..n {
                        a[r * n + j] -= f * a[c * n + j];
                    }
                    x[r] -= f * x[c];
                }
            }
        }
        for c in (0..n).rev() {
            let tail: f64 = (c + 1..n).map(|j| a[c * n + j] * x[j]).sum();
            x[c] = (x[c] - tail) / a[c * n + c];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn centered(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

/// Oracle equilibrium `(L+K)⁻¹Ks`.
pub fn oracle_equilibrium(g: &Graph, s: &[f64], k: &[f64]) -> Vec<f64> {
    let ks: Vec<f64> = s.iter().zip(k).map(|(a, b)| a * b).collect();
    Dense::laplacian(g).plus_diag(k).solve(&ks)
}

/// Oracle PD: `z̄ᵀ(I+L)z̄` for the oracle equilibrium.
pub fn oracle_pd(g: &Graph, s: &[f64], k: &[f64]) -> f64 {
    let zb = centered(&oracle_equilibrium(g, s, k));
    dot(&zb, &zb) + dot(&zb, &Dense::laplacian(g).mul(&zb))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
