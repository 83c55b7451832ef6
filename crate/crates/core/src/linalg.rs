//! Linear algebra kernels: preconditioned CG on `L + diag(d)`, dense
//! fallbacks for small systems, and power iteration for symmetric operators.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest `n` for which dense matrices are formed.
pub const DENSE_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    /// Jacobi scaling by the diagonal `D + K`.
    #[default]
    Diagonal,
}

/// Iterative solver settings.
///
/// `max_iterations: None` means `10·n` for CG and `10⁶` for fixed-point sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rel_tolerance: f64,
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-10,
            max_iterations: None,
            preconditioner: Preconditioner::Diagonal,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(rel_tolerance: f64) -> Self {
        Self {
            rel_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance.is_finite()) {
            return Err(Error::validation("rel_tolerance must be positive"));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::validation("max_iterations must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn cg_iterations(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or((10 * n).max(1))
    }

    pub(crate) fn fixed_point_iterations(&self) -> usize {
        self.max_iterations.unwrap_or(1_000_000)
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖A x - b‖₂ / ‖b‖₂` (zero when `b = 0`).
    pub residual: f64,
}

/// The SPD operator `L + diag(shift)` with all `shift_i > 0`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedLaplacian<'a> {
    pub graph: &'a Graph,
    pub shift: &'a [f64],
}

impl<'a> ShiftedLaplacian<'a> {
    pub fn new(graph: &'a Graph, shift: &'a [f64]) -> Result<Self> {
        Error::check_len(graph.node_count(), shift.len())?;
        Ok(Self { graph, shift })
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.graph.laplacian_apply_into(x, out);
        for ((o, s), xi) in out.iter_mut().zip(self.shift).zip(x) {
            *o += s * xi;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }

    /// Conjugate gradients for `(L + diag(shift)) x = b`, starting from zero.
    pub fn solve(&self, b: &[f64], cfg: &SolverConfig) -> Result<Solution> {
        let n = self.graph.node_count();
        Error::check_len(n, b.len())?;
        cfg.validate()?;
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok(Solution {
                x: vec![0.0; n],
                iterations: 0,
                residual: 0.0,
            });
        }
        let inv_diag: Vec<f64> = match cfg.preconditioner {
            Preconditioner::Diagonal => self
                .graph
                .degree()
                .iter()
                .zip(self.shift)
                .map(|(d, s)| 1.0 / (d + s))
                .collect(),
            Preconditioner::None => vec![1.0; n],
        };

        let max_iter = cfg.cg_iterations(n);
        let target = cfg.rel_tolerance * b_norm;
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut r_norm = b_norm;

        for it in 1..=max_iter {
            self.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: r_norm / b_norm,
                });
            }
            let step = rz / pap;
            axpy(step, &p, &mut x);
            axpy(-step, &ap, &mut r);
            r_norm = norm(&r);
            if r_norm <= target {
                // Report the true residual rather than the recursively updated one.
                self.apply_into(&x, &mut ap);
                let true_res = ap
                    .iter()
                    .zip(b)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                return Ok(Solution {
                    x,
                    iterations: it,
                    residual: true_res / b_norm,
                });
            }
            for ((zi, ri), mi) in z.iter_mut().zip(&r).zip(&inv_diag) {
                *zi = ri * mi;
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        Err(Error::NonConvergence {
            iterations: max_iter,
            residual: r_norm / b_norm,
        })
    }

    /// Dense `L + diag(shift)`.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.graph.node_count();
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: DENSE_LIMIT,
            });
        }
        let mut m = self.graph.dense_laplacian();
        for i in 0..n {
            m[(i, i)] += self.shift[i];
        }
        Ok(m)
    }

    /// Direct LU solve on the dense matrix.
    pub fn solve_dense(&self, b: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.graph.node_count(), b.len())?;
        let m = self.to_dense()?;
        let rhs = DVector::from_column_slice(b);
        m.lu()
            .solve(&rhs)
            .map(|x| x.as_slice().to_vec())
            .ok_or_else(|| Error::validation("dense system is singular"))
    }
}

/// Estimate of the top eigenvalue of a symmetric PSD operator.
#[derive(Debug, Clone)]
pub struct PowerEstimate {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Rayleigh quotient after each step.
    pub history: Vec<f64>,
}

/// Power iteration with Rayleigh-quotient stopping
/// `|ρ_t − ρ_{t−1}| ≤ tol·|ρ_t|`.
pub fn power_iteration<F>(
    n: usize,
    mut op: F,
    tol: f64,
    max_iterations: usize,
) -> Result<PowerEstimate>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if n == 0 {
        return Err(Error::validation("power iteration on an empty operator"));
    }
    // All-ones plus a fixed, non-symmetric perturbation.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let v_norm = norm(&v);
    scale(&mut v, 1.0 / v_norm);
    let mut history = Vec::new();
    let mut previous = f64::NAN;
    for it in 1..=max_iterations {
        let w = op(&v)?;
        let rho = dot(&v, &w);
        history.push(rho);
        let w_norm = norm(&w);
        if w_norm == 0.0 {
            return Ok(PowerEstimate {
                value: 0.0,
                vector: v,
                iterations: it,
                history,
            });
        }
        v = w;
        scale(&mut v, 1.0 / w_norm);
        if (rho - previous).abs() <= tol * rho.abs() {
            return Ok(PowerEstimate {
                value: rho,
                vector: v,
                iterations: it,
                history,
            });
        }
        previous = rho;
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        residual: (history[history.len() - 1] - previous).abs(),
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(x: &mut [f64], alpha: f64) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// `x − mean(x)·1`.
pub fn subtract_mean(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    x.iter().map(|v| v - m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_matches_dense_on_path() {
        let g = Graph::path(3);
        let k = [1.0, 1.0, 2.0];
        let op = ShiftedLaplacian::new(&g, &k).unwrap();
        let b = [1.0, -1.0, 0.0];
        let cg = op.solve(&b, &SolverConfig::with_tolerance(1e-14)).unwrap();
        let dense = op.solve_dense(&b).unwrap();
        for (a, d) in cg.x.iter().zip(&dense) {
            assert!((a - d).abs() < 1e-13);
        }
        assert!(cg.residual < 1e-13);
    }

    #[test]
    fn cg_without_preconditioner() {
        let g = Graph::complete(6);
        let k = [0.5; 6];
        let op = ShiftedLaplacian::new(&g, &k).unwrap();
        let cfg = SolverConfig {
            preconditioner: Preconditioner::None,
            ..SolverConfig::with_tolerance(1e-12)
        };
        let sol = op.solve(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &cfg).unwrap();
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let g = Graph::path(4);
        let op = ShiftedLaplacian::new(&g, &[1.0; 4]).unwrap();
        let sol = op.solve(&[0.0; 4], &SolverConfig::default()).unwrap();
        assert_eq!(sol.x, vec![0.0; 4]);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let g = Graph::path(50);
        let k = vec![1e-3; 50];
        let op = ShiftedLaplacian::new(&g, &k).unwrap();
        let cfg = SolverConfig {
            max_iterations: Some(2),
            ..SolverConfig::with_tolerance(1e-14)
        };
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        assert!(matches!(op.solve(&b, &cfg), Err(Error::NonConvergence { iterations: 2, .. })));
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let d = [1.0, 5.0, 2.0];
        let est = power_iteration(3, |x| Ok(x.iter().zip(&d).map(|(a, b)| a * b).collect()), 1e-12, 10_000)
            .unwrap();
        assert!((est.value - 5.0).abs() < 1e-9);
    }
}
