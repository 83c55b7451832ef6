//! The FJ fixed point `z* = (L + K)⁻¹ K s`, by synchronous sweeps of the
//! update rule or by a preconditioned CG solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{norm, subtract_mean, ShiftedLaplacian};
pub use crate::linalg::{Preconditioner, SolverConfig};
use crate::opinion::{center_k, OpinionVector, StubbornnessVector};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equilibrium {
    pub z_star: Vec<f64>,
    /// `z* − mean(z*)·1`.
    pub z_bar: Vec<f64>,
    pub iterations: usize,
    /// For CG, `‖(L+K)z − Ks‖₂/‖Ks‖₂`; for sweeps, the last max-norm step.
    pub residual: f64,
}

impl Equilibrium {
    fn from_z(z_star: Vec<f64>, iterations: usize, residual: f64) -> Self {
        let z_bar = subtract_mean(&z_star);
        Self {
            z_star,
            z_bar,
            iterations,
            residual,
        }
    }
}

/// Which route computes `z*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Cg,
    FixedPoint,
    Dense,
}

fn check_inputs(g: &Graph, s: &OpinionVector, k: &StubbornnessVector) -> Result<()> {
    Error::check_len(g.node_count(), s.len())?;
    Error::check_len(g.node_count(), k.len())
}

/// Synchronous sweeps
/// `z_i ← (k_i s_i + Σ_j w_ij z_j) / (k_i + Σ_j w_ij)`
/// until `‖z⁽ᵗ⁾ − z⁽ᵗ⁻¹⁾‖∞ ≤ rel_tolerance`.
pub fn iterate_fj(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    z0: &[f64],
    cfg: &SolverConfig,
) -> Result<Equilibrium> {
    check_inputs(g, s, k)?;
    Error::check_len(g.node_count(), z0.len())?;
    cfg.validate()?;
    let n = g.node_count();
    let s = s.as_slice();
    let k = k.as_slice();
    let deg = g.degree();
    let max_iter = cfg.fixed_point_iterations();

    let mut z = z0.to_vec();
    let mut next = vec![0.0; n];
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        gap = 0.0;
        for i in 0..n {
            let pull: f64 = g.neighbors(i).map(|(j, w)| w * z[j]).sum();
            let v = (k[i] * s[i] + pull) / (k[i] + deg[i]);
            gap = f64::max(gap, (v - z[i]).abs());
            next[i] = v;
        }
        std::mem::swap(&mut z, &mut next);
        if gap <= cfg.rel_tolerance {
            return Ok(Equilibrium::from_z(z, it, gap));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: gap,
    })
}

/// Solves `(L + K) z = K s` by CG.
pub fn solve_equilibrium(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<Equilibrium> {
    check_inputs(g, s, k)?;
    let rhs: Vec<f64> = s.as_slice().iter().zip(k.as_slice()).map(|(s, k)| s * k).collect();
    let sol = ShiftedLaplacian::new(g, k.as_slice())?.solve(&rhs, cfg)?;
    Ok(Equilibrium::from_z(sol.x, sol.iterations, sol.residual))
}

/// Dense LU solve of `(L + K) z = K s`; for small graphs and oracles.
pub fn solve_equilibrium_dense(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
) -> Result<Equilibrium> {
    check_inputs(g, s, k)?;
    let op = ShiftedLaplacian::new(g, k.as_slice())?;
    let rhs: Vec<f64> = s.as_slice().iter().zip(k.as_slice()).map(|(s, k)| s * k).collect();
    let z = op.solve_dense(&rhs)?;
    let r = op.apply(&z);
    let res: Vec<f64> = r.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let denom = norm(&rhs);
    let residual = if denom == 0.0 { 0.0 } else { norm(&res) / denom };
    Ok(Equilibrium::from_z(z, 1, residual))
}

/// Dispatches on [`SolverKind`]; the fixed-point route starts from `z0 = s`.
pub fn equilibrium_with(
    kind: SolverKind,
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<Equilibrium> {
    match kind {
        SolverKind::Cg => solve_equilibrium(g, s, k, cfg),
        SolverKind::FixedPoint => iterate_fj(g, s, k, s.as_slice(), cfg),
        SolverKind::Dense => solve_equilibrium_dense(g, s, k),
    }
}

/// `z̄ = (L + K)⁻¹ K s̄_K`, the centered equilibrium without forming `z*`.
pub fn mean_centered_equilibrium(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    check_inputs(g, s, k)?;
    let c = center_k(g, s, k, cfg)?;
    let rhs: Vec<f64> = c.s_bar_k.iter().zip(k.as_slice()).map(|(s, k)| s * k).collect();
    Ok(ShiftedLaplacian::new(g, k.as_slice())?.solve(&rhs, cfg)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: &[f64]) -> OpinionVector {
        OpinionVector::new(v.to_vec()).unwrap()
    }

    fn kv(v: &[f64]) -> StubbornnessVector {
        StubbornnessVector::new(v.to_vec()).unwrap()
    }

    fn assert_vec(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn path_equilibria() {
        let g = Graph::path(3);
        let s = ov(&[1.0, -1.0, 0.0]);
        let cfg = SolverConfig::with_tolerance(1e-14);
        let eq = solve_equilibrium(&g, &s, &kv(&[1.0, 1.0, 1.0]), &cfg).unwrap();
        assert_vec(&eq.z_star, &[0.375, -0.25, -0.125], 1e-13);
        assert_vec(&eq.z_bar, &eq.z_star, 1e-13);

        let eq = solve_equilibrium(&g, &s, &kv(&[1.0, 1.0, 2.0]), &cfg).unwrap();
        assert_vec(&eq.z_star, &[5.0 / 13.0, -3.0 / 13.0, -1.0 / 13.0], 1e-13);

        let it = iterate_fj(&g, &s, &kv(&[1.0, 1.0, 1.0]), &[0.0; 3], &cfg).unwrap();
        assert_vec(&it.z_star, &[0.375, -0.25, -0.125], 1e-12);
    }

    #[test]
    fn consensus_is_immediate() {
        let g = Graph::complete(4);
        let s = ov(&[0.3; 4]);
        let k = kv(&[1.0, 2.0, 0.5, 7.0]);
        let eq = iterate_fj(&g, &s, &k, s.as_slice(), &SolverConfig::default()).unwrap();
        assert_eq!(eq.iterations, 1);
        assert_vec(&eq.z_star, s.as_slice(), 1e-15);
    }

    #[test]
    fn zero_opinions_give_zero() {
        let g = Graph::path(5);
        let eq = solve_equilibrium(&g, &ov(&[0.0; 5]), &kv(&[2.0; 5]), &SolverConfig::default())
            .unwrap();
        assert_eq!(eq.z_star, vec![0.0; 5]);
    }

    #[test]
    fn lemma_route_on_path() {
        let g = Graph::path(3);
        let s = ov(&[1.0, -1.0, 0.0]);
        let cfg = SolverConfig::with_tolerance(1e-14);
        let zb = mean_centered_equilibrium(&g, &s, &kv(&[1.0, 1.0, 2.0]), &cfg).unwrap();
        assert_vec(&zb, &[14.0 / 39.0, -10.0 / 39.0, -4.0 / 39.0], 1e-13);
    }

    #[test]
    fn dense_route_agrees() {
        let g = Graph::path(3);
        let s = ov(&[1.0, -1.0, 0.0]);
        let k = kv(&[1.0, 1.0, 2.0]);
        let d = solve_equilibrium_dense(&g, &s, &k).unwrap();
        assert_vec(&d.z_star, &[5.0 / 13.0, -3.0 / 13.0, -1.0 / 13.0], 1e-14);
        for kind in [SolverKind::Cg, SolverKind::FixedPoint, SolverKind::Dense] {
            let e = equilibrium_with(kind, &g, &s, &k, &SolverConfig::with_tolerance(1e-13)).unwrap();
            assert_vec(&e.z_star, &d.z_star, 1e-11);
        }
    }

    #[test]
    fn sweep_cap_is_an_error() {
        let g = Graph::path(10);
        let s = ov(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let cfg = SolverConfig {
            max_iterations: Some(3),
            ..SolverConfig::with_tolerance(1e-14)
        };
        let err = iterate_fj(&g, &s, &kv(&[0.1; 10]), &[0.0; 10], &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 3, .. }));
    }

    #[test]
    fn dimension_checks() {
        let g = Graph::path(3);
        let err = solve_equilibrium(&g, &ov(&[0.0; 2]), &kv(&[1.0; 3]), &SolverConfig::default());
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }
}
