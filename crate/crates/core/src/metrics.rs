//! Polarization, disagreement and the PD index.
//!
//! Everything is evaluated through the centered equilibrium `z̄`:
//! `P = z̄ᵀz̄`, `D = z̄ᵀLz̄` and `PD = P + D`. The alternative definition
//! weights polarization by stubbornness, `P_K = z̄ᵀKz̄`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_equilibrium, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::dot;
use crate::opinion::{center_k, OpinionVector, StubbornnessVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdDefinition {
    #[default]
    Standard,
    /// Stubbornness-weighted polarization `z̄ᵀKz̄`.
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdReport {
    pub polarization: f64,
    pub disagreement: f64,
    pub pd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polarization_alt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pd_alt: Option<f64>,
    pub definition_tag: PdDefinition,
}

/// `Σ w_uv (z_u − z_v)² = zᵀLz`.
pub fn disagreement(g: &Graph, z_star: &[f64]) -> Result<f64> {
    g.laplacian_quadratic(z_star)
}

/// `z̄ᵀz̄`. Rejects inputs whose sum exceeds `1e-8·n`.
pub fn polarization(z_bar: &[f64]) -> Result<f64> {
    let sum: f64 = z_bar.iter().sum();
    if sum.abs() > 1e-8 * z_bar.len().max(1) as f64 {
        return Err(Error::validation(format!(
            "polarization expects a mean-centered vector, sum is {sum:e}"
        )));
    }
    Ok(dot(z_bar, z_bar))
}

pub fn pd_index(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<PdReport> {
    let eq = solve_equilibrium(g, s, k, cfg)?;
    let polarization = polarization(&eq.z_bar)?;
    let disagreement = g.laplacian_quadratic(&eq.z_bar)?;
    Ok(PdReport {
        polarization,
        disagreement,
        pd: polarization + disagreement,
        polarization_alt: None,
        pd_alt: None,
        definition_tag: PdDefinition::Standard,
    })
}

/// Standard and alternative PD together. The alternative value is
/// cross-checked against `s̄_Kᵀ K (K+L)⁻¹ K s̄_K`, which equals `(K s̄_K)ᵀ z̄`.
pub fn pd_alternative(
    g: &Graph,
    s: &OpinionVector,
    k: &StubbornnessVector,
    cfg: &SolverConfig,
) -> Result<PdReport> {
    let eq = solve_equilibrium(g, s, k, cfg)?;
    let polarization = polarization(&eq.z_bar)?;
    let disagreement = g.laplacian_quadratic(&eq.z_bar)?;
    let polarization_alt: f64 = eq
        .z_bar
        .iter()
        .zip(k.as_slice())
        .map(|(z, k)| k * z * z)
        .sum();
    let pd_alt = polarization_alt + disagreement;

    let c = center_k(g, s, k, cfg)?;
    let quad: f64 = c
        .s_bar_k
        .iter()
        .zip(k.as_slice())
        .zip(&eq.z_bar)
        .map(|((s, k), z)| k * s * z)
        .sum();
    let tolerance = 1e-8 * (1.0 + pd_alt.abs());
    if (quad - pd_alt).abs() > tolerance {
        return Err(Error::RouteMismatch {
            what: "alternative PD vs quadratic form",
            first: pd_alt,
            second: quad,
            tolerance,
        });
    }
    Ok(PdReport {
        polarization,
        disagreement,
        pd: polarization + disagreement,
        polarization_alt: Some(polarization_alt),
        pd_alt: Some(pd_alt),
        definition_tag: PdDefinition::Alternative,
    })
}

/// `(pd − pd_fj) / pd_fj`.
pub fn relative_change(pd: f64, pd_fj: f64) -> Result<f64> {
    if pd_fj == 0.0 {
        return Err(Error::UndefinedBaseline);
    }
    Ok((pd - pd_fj) / pd_fj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_case(k: &[f64]) -> (Graph, OpinionVector, StubbornnessVector) {
        (
            Graph::path(3),
            OpinionVector::new(vec![1.0, -1.0, 0.0]).unwrap(),
            StubbornnessVector::new(k.to_vec()).unwrap(),
        )
    }

    #[test]
    fn disagreement_examples() {
        let g = Graph::path(3);
        assert!((disagreement(&g, &[0.375, -0.25, -0.125]).unwrap() - 0.40625).abs() < 1e-15);
        assert_eq!(disagreement(&g, &[0.7; 3]).unwrap(), 0.0);
        let d = disagreement(&g, &[5.0 / 13.0, -3.0 / 13.0, -1.0 / 13.0]).unwrap();
        assert!((d - 68.0 / 169.0).abs() < 1e-15);
    }

    #[test]
    fn polarization_examples() {
        assert!((polarization(&[0.375, -0.25, -0.125]).unwrap() - 0.21875).abs() < 1e-15);
        assert_eq!(polarization(&[0.0; 4]).unwrap(), 0.0);
        let p = polarization(&[14.0 / 39.0, -10.0 / 39.0, -4.0 / 39.0]).unwrap();
        assert!((p - 312.0 / 1521.0).abs() < 1e-15);
        assert!(polarization(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn three_node_pd() {
        let cfg = SolverConfig::with_tolerance(1e-14);
        let (g, s, k) = path_case(&[1.0, 1.0, 1.0]);
        let r = pd_index(&g, &s, &k, &cfg).unwrap();
        assert!((r.pd - 0.625).abs() < 1e-12);
        assert_eq!(r.pd, r.polarization + r.disagreement);

        let (g, s, k) = path_case(&[1.0, 1.0, 2.0]);
        let r = pd_index(&g, &s, &k, &cfg).unwrap();
        assert!((r.pd - 0.6075).abs() < 1e-4);
        assert!((r.pd - 924.0 / 1521.0).abs() < 1e-12);
    }

    #[test]
    fn constant_opinions_have_zero_pd() {
        let g = Graph::complete(5);
        let s = OpinionVector::new(vec![-0.4; 5]).unwrap();
        let k = StubbornnessVector::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let r = pd_index(&g, &s, &k, &SolverConfig::default()).unwrap();
        assert!(r.pd.abs() < 1e-16);
    }

    #[test]
    fn alternative_matches_at_identity() {
        let cfg = SolverConfig::with_tolerance(1e-14);
        let (g, s, k) = path_case(&[1.0, 1.0, 1.0]);
        let r = pd_alternative(&g, &s, &k, &cfg).unwrap();
        assert!((r.pd_alt.unwrap() - 0.625).abs() < 1e-12);
        assert!((r.pd_alt.unwrap() - r.pd).abs() < 1e-12);
    }

    #[test]
    fn alternative_on_boosted_path() {
        // Dense 3x3 oracle: s̄_K = s − (1/39)·1, z̄ = (14,−10,−4)/39,
        // K s̄_K = (38,−40,−2)/39, so s̄_Kᵀ K (K+L)⁻¹ K s̄_K = 940/1521.
        let cfg = SolverConfig::with_tolerance(1e-14);
        let (g, s, k) = path_case(&[1.0, 1.0, 2.0]);
        let r = pd_alternative(&g, &s, &k, &cfg).unwrap();
        assert!((r.pd_alt.unwrap() - 940.0 / 1521.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn relative_change_examples() {
        assert!((relative_change(0.6075, 0.6250).unwrap() + 0.028).abs() < 1e-12);
        assert_eq!(relative_change(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(relative_change(1.25, 1.0).unwrap(), 0.25);
        assert!(matches!(relative_change(1.0, 0.0), Err(Error::UndefinedBaseline)));
    }
}
