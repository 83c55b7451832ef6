//! Friedkin–Johnsen opinion dynamics with per-node stubbornness.
//!
//! The crate computes equilibria of the FJ model on weighted undirected
//! graphs, the polarization-disagreement (PD) index and its components,
//! spectral formulas and upper bounds for homogeneous and inhomogeneous
//! stubbornness, exact rank-one stubbornness updates, and a small seeded
//! experiment harness.
//!
//! Everything that touches a linear system goes through sparse solves
//! against `L + K` (conjugate gradients); dense paths exist for small
//! graphs and serve as oracles.

pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod opinion;
pub mod perturbation;
pub mod spectral;

pub use equilibrium::{
    iterate_fj, mean_centered_equilibrium, solve_equilibrium, Equilibrium, Preconditioner,
    SolverConfig,
};
pub use error::{Error, Result};
pub use graph::{EdgeListParse, Graph, IdMode, IngestOptions};
pub use metrics::{pd_alternative, pd_index, relative_change, PdDefinition, PdReport};
pub use opinion::{center, center_k, CenteredOpinions, OpinionDistribution, OpinionVector, StubbornnessVector};
