//! Innate opinions, stubbornness vectors, sampling and the centering
//! transforms `s̄` and `s̄_K`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{dot, ShiftedLaplacian, SolverConfig};

/// Innate opinions, one per node, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.abs() <= 1.0))
        {
            return Err(Error::validation(format!(
                "opinion {i} is {v}, outside [-1, 1]"
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Copy with entry `i` replaced.
    pub fn with_entry(&self, i: usize, value: f64) -> Result<Self> {
        let mut v = self.0.clone();
        *v.get_mut(i)
            .ok_or_else(|| Error::validation(format!("node {i} out of range")))? = value;
        Self::new(v)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_values(text)?)
    }
}

impl AsRef<[f64]> for OpinionVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Per-node stubbornness `k`, all entries strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StubbornnessVector(Vec<f64>);

impl StubbornnessVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::validation(format!(
                "stubbornness {i} is {v}; every k_i must be positive"
            )));
        }
        Ok(Self(values))
    }

    /// `k ≡ alpha`.
    pub fn uniform(n: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; n])
    }

    /// `k = 1 + ε·e_l`.
    pub fn single_boost(n: usize, node: usize, epsilon: f64) -> Result<Self> {
        if node >= n {
            return Err(Error::validation(format!("node {node} out of range 0..{n}")));
        }
        let mut k = vec![1.0; n];
        k[node] += epsilon;
        Self::new(k)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(alpha)` when every entry equals `alpha`.
    pub fn homogeneous(&self) -> Option<f64> {
        let first = *self.0.first()?;
        self.0.iter().all(|&k| k == first).then_some(first)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_values(text)?)
    }
}

impl AsRef<[f64]> for StubbornnessVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Reads a JSON array or one value per line (`#` comments allowed).
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.parse::<f64>().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("invalid number `{line}`"),
        })?);
    }
    Ok(out)
}

/// One value per line, shortest round-trip formatting.
pub fn format_values(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

/// Sampling distributions for innate opinions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum OpinionDistribution {
    /// i.i.d. `U[-1, 1]`.
    Uniform,
    /// `N(0, 0.5²)` clipped to `[-1, 1]`.
    Gaussian,
    /// `N(-0.5, 0.25²)` on nodes flagged `true` in `negative`, `N(+0.5, 0.25²)`
    /// elsewhere, clipped to `[-1, 1]`.
    BipolarGaussian { negative: Vec<bool> },
}

impl OpinionDistribution {
    pub const GAUSSIAN_SIGMA: f64 = 0.5;
    pub const BIPOLAR_MEAN: f64 = 0.5;
    pub const BIPOLAR_SIGMA: f64 = 0.25;

    /// Parses a distribution tag. The bipolar variant gets two equal blocks,
    /// the second half negative, matching the SBM block layout.
    pub fn from_tag(tag: &str, n: usize) -> Result<Self> {
        match tag {
            "uniform" => Ok(Self::Uniform),
            "gaussian" => Ok(Self::Gaussian),
            "bipolar-gaussian" | "bipolar_gaussian" => Ok(Self::BipolarGaussian {
                negative: (0..n).map(|i| i >= n / 2).collect(),
            }),
            other => Err(Error::validation(format!(
                "unknown opinion distribution `{other}`"
            ))),
        }
    }
}

/// Deterministic RNG for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_opinions(n: usize, dist: &OpinionDistribution, seed: u64) -> Result<OpinionVector> {
    sample_opinions_with(n, dist, &mut stream_rng(seed, 0))
}

pub fn sample_opinions_with<R: Rng + ?Sized>(
    n: usize,
    dist: &OpinionDistribution,
    rng: &mut R,
) -> Result<OpinionVector> {
    if n == 0 {
        return Err(Error::validation("cannot sample opinions for zero nodes"));
    }
    let values = match dist {
        OpinionDistribution::Uniform => {
            let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
            (0..n).map(|_| u.sample(rng)).collect()
        }
        OpinionDistribution::Gaussian => {
            let g = Normal::new(0.0, OpinionDistribution::GAUSSIAN_SIGMA).expect("valid sigma");
            (0..n).map(|_| g.sample(rng).clamp(-1.0, 1.0)).collect()
        }
        OpinionDistribution::BipolarGaussian { negative } => {
            Error::check_len(n, negative.len())?;
            let m = OpinionDistribution::BIPOLAR_MEAN;
            let sd = OpinionDistribution::BIPOLAR_SIGMA;
            let neg = Normal::new(-m, sd).expect("valid sigma");
            let pos = Normal::new(m, sd).expect("valid sigma");
            negative
                .iter()
                .map(|&is_neg| {
                    let d = if is_neg { &neg } else { &pos };
                    d.sample(rng).clamp(-1.0, 1.0)
                })
                .collect()
        }
    };
    OpinionVector::new(values)
}

/// `s̄ = s − (sᵀ1/n)·1`.
pub fn center(s: &[f64]) -> Vec<f64> {
    crate::linalg::subtract_mean(s)
}

/// Centering data for a given `(L, K, s)`.
#[derive(Debug, Clone, Serialize)]
pub struct CenteredOpinions {
    /// `s̄`, plain mean-centering.
    pub s_bar: Vec<f64>,
    /// `s̄_K = s − (⟨s, 1_K⟩/n)·1`.
    pub s_bar_k: Vec<f64>,
    /// `1_K = K (L + K)⁻¹ 1`.
    pub one_k: Vec<f64>,
    /// `⟨s, 1 − 1_K⟩/n`, so that `s̄_K = s̄ + mu·1`.
    pub mu: f64,
}

/// `1_K = K (L + K)⁻¹ 1` via one SPD solve.
pub fn one_k(g: &Graph, k: &StubbornnessVector, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = g.node_count();
    Error::check_len(n, k.len())?;
    let op = ShiftedLaplacian::new(g, k.as_slice())?;
    let y = op.solve(&vec![1.0; n], cfg)?.x;
    Ok(y.iter().zip(k.as_slice()).map(|(y, k)| y * k).collect())
}

pub fn center_k(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<CenteredOpinions> {
    let n = g.node_count();
    Error::check_len(n, s.len())?;
    let one_k = one_k(g, k, cfg)?;
    let s = s.as_slice();
    let nf = n as f64;
    let shift = dot(s, &one_k) / nf;
    let s_bar_k = s.iter().map(|v| v - shift).collect();
    let mu = s.iter().zip(&one_k).map(|(s, o)| s * (1.0 - o)).sum::<f64>() / nf;
    Ok(CenteredOpinions {
        s_bar: center(s),
        s_bar_k,
        one_k,
        mu,
    })
}
