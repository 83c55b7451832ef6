//! Eigen-machinery for `L`, spectral PD/P series for homogeneous
//! stubbornness, and the upper bounds on PD and on polarization changes.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{norm, power_iteration, PowerEstimate, ShiftedLaplacian, DENSE_LIMIT};
use crate::opinion::{center, one_k, StubbornnessVector};

/// Full eigendecomposition of a graph Laplacian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: DMatrix<f64>,
    /// `λ₂ > 0`, in which case column 0 spans the constant vectors.
    pub connected: bool,
}

pub fn eigendecompose(g: &Graph) -> Result<SpectralData> {
    eigendecompose_with_limit(g, DENSE_LIMIT)
}

pub fn eigendecompose_with_limit(g: &Graph, limit: usize) -> Result<SpectralData> {
    let n = g.node_count();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    let eig = SymmetricEigen::new(g.dense_laplacian());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let scale = eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    let connected = n <= 1 || eigenvalues[1] > 1e-8 * scale;
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        connected,
    })
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `γ_j = ⟨s̄, q_j⟩` with `s̄` the mean-centered input. On connected
    /// graphs `γ₁` is set to exactly zero.
    pub fn coefficients(&self, s: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.len(), s.len())?;
        let s_bar = DVector::from_vec(center(s));
        let mut gamma: Vec<f64> = (self.eigenvectors.transpose() * s_bar).iter().copied().collect();
        if self.connected && !gamma.is_empty() {
            gamma[0] = 0.0;
        }
        Ok(gamma)
    }

    /// `Σ_j f(λ_j) γ_j²`.
    fn series(&self, s: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
        let gamma = self.coefficients(s)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(&gamma)
            .map(|(&l, &g)| f(l.max(0.0)) * g * g)
            .sum())
    }

    /// `Σ λ_j q_j q_jᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(format!("stubbornness must be positive, got {alpha}")))
    }
}

/// `PD(α) = Σ_{j≥2} (1 + λ_j) / (1 + λ_j/α)² · γ_j²`.
pub fn pd_homogeneous_spectral(spec: &SpectralData, s: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    spec.series(s, |l| {
        let d = 1.0 + l / alpha;
        (1.0 + l) / (d * d)
    })
}

/// `P(α) = Σ_{j≥2} γ_j² / (1 + λ_j/α)²`.
pub fn polarization_homogeneous_spectral(spec: &SpectralData, s: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    spec.series(s, |l| {
        let d = 1.0 + l / alpha;
        1.0 / (d * d)
    })
}

/// An upper bound together with the parameters it depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub bound_value: f64,
    pub binding_parameters: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual_pd: Option<f64>,
    /// Set when a parameter is undefined (e.g. `C` with `α = β`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    fn new(name: &str, bound_value: f64, params: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            bound_value,
            binding_parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            actual_pd: None,
            note: None,
        }
    }

    /// Attaches a measured value for comparison.
    pub fn with_actual(mut self, actual: f64) -> Self {
        self.actual_pd = Some(actual);
        self
    }

    /// `actual ≤ bound + 1e-8`, or `true` when nothing was measured.
    pub fn holds(&self) -> bool {
        self.actual_pd.is_none_or(|a| a <= self.bound_value + 1e-8)
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.binding_parameters.get(name).copied()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(format!("radius must be nonnegative, got {r}")))
    }
}

/// PD bound for `K = αI` and `‖s‖ ≤ R`: `R²α²/(4(α−1))` when `α > 2`,
/// `R²` otherwise (the two agree at `α = 2`).
pub fn pd_bound_homogeneous(r: f64, alpha: f64) -> Result<BoundReport> {
    check_radius(r)?;
    check_alpha(alpha)?;
    let bound = if alpha > 2.0 {
        r * r * alpha * alpha / (4.0 * (alpha - 1.0))
    } else {
        r * r
    };
    Ok(BoundReport::new("pd_homogeneous", bound, &[("R", r), ("alpha", alpha)]))
}

/// Top eigenvalue of `PᵀP = K (K+L)⁻¹ (L+I) (K+L)⁻¹ K`, matrix-free.
/// Each step costs two SPD solves and one Laplacian product.
pub fn pd_operator_top_eigenvalue(
    g: &Graph,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<PowerEstimate> {
    let n = g.node_count();
    Error::check_len(n, k.len())?;
    let kk = k.as_slice();
    let op = ShiftedLaplacian::new(g, kk)?;
    let ones = vec![1.0; n];
    let shifted = ShiftedLaplacian::new(g, &ones)?;
    power_iteration(
        n,
        |x| {
            let kx: Vec<f64> = x.iter().zip(kk).map(|(a, b)| a * b).collect();
            let y = op.solve(&kx, cfg)?.x;
            let w = shifted.apply(&y);
            let u = op.solve(&w, cfg)?.x;
            Ok(u.iter().zip(kk).map(|(a, b)| a * b).collect())
        },
        1e-8,
        10_000,
    )
}

/// PD bound for general `K` and `‖s‖ ≤ R`: `(R² + μ²n)·λ_max(PᵀP)` with
/// `μ = R‖1 − 1_K‖₂/n`, the largest `⟨s, 1 − 1_K⟩/n` over the ball.
pub fn pd_bound_inhomogeneous(
    g: &Graph,
    k: &StubbornnessVector,
    r: f64,
    cfg: &SolverConfig,
) -> Result<BoundReport> {
    check_radius(r)?;
    let n = g.node_count();
    let ok = one_k(g, k, cfg)?;
    let gap: Vec<f64> = ok.iter().map(|v| 1.0 - v).collect();
    let mu = r * norm(&gap) / n as f64;
    let top = pd_operator_top_eigenvalue(g, k, cfg)?;
    let bound = (r * r + mu * mu * n as f64) * top.value;
    Ok(BoundReport::new(
        "pd_inhomogeneous",
        bound,
        &[
            ("R", r),
            ("mu", mu),
            ("lambda_max", top.value),
            ("power_iterations", top.iterations as f64),
        ],
    ))
}

/// `C = (α^{1/3} − β^{1/3}) / (β^{−2/3} − α^{−2/3})`, the maximiser of
/// `x ↦ (1+x/β)⁻² − (1+x/α)⁻²` on `x > 0`.
pub fn polarization_change_extremum(alpha: f64, beta: f64) -> f64 {
    (alpha.cbrt() - beta.cbrt()) / (beta.powf(-2.0 / 3.0) - alpha.powf(-2.0 / 3.0))
}

/// Bound on `P(β) − P(α)` for `α < β` and `‖s‖ ≤ R`, independent of the graph.
pub fn polarization_change_bound(r: f64, alpha: f64, beta: f64) -> Result<BoundReport> {
    check_radius(r)?;
    check_alpha(alpha)?;
    check_alpha(beta)?;
    if alpha > beta {
        return Err(Error::validation(format!("need alpha <= beta, got {alpha} > {beta}")));
    }
    if alpha == beta {
        let mut report = BoundReport::new("polarization_change", 0.0, &[("R", r), ("alpha", alpha), ("beta", beta)]);
        report.note = Some("C undefined for alpha == beta".into());
        return Ok(report);
    }
    let c = polarization_change_extremum(alpha, beta);
    let f = |x: f64| 1.0 / ((1.0 + c / x) * (1.0 + c / x));
    let bound = (f(beta) - f(alpha)) * r * r;
    Ok(BoundReport::new(
        "polarization_change",
        bound,
        &[("R", r), ("alpha", alpha), ("beta", beta), ("C", c)],
    ))
}

/// Bound on `PD_alt(β) − PD_alt(α)`: `(β − α)R²`.
pub fn pd_bound_alternative(r: f64, alpha: f64, beta: f64) -> Result<BoundReport> {
    check_radius(r)?;
    check_alpha(alpha)?;
    check_alpha(beta)?;
    if alpha > beta {
        return Err(Error::validation(format!("need alpha <= beta, got {alpha} > {beta}")));
    }
    Ok(BoundReport::new(
        "pd_alternative_change",
        (beta - alpha) * r * r,
        &[("R", r), ("alpha", alpha), ("beta", beta)],
    ))
}
