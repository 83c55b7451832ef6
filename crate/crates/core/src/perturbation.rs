//! Rank-one stubbornness updates around the vanilla model `K = I`.
//!
//! Raising node `l`'s stubbornness by `ε` gives `K = I + ε e_l e_lᵀ`, and
//! Sherman–Morrison expresses `(L+K)⁻¹K` through the resolvent
//! `R = (I+L)⁻¹` alone:
//!
//! ```text
//! (L+K)⁻¹K x = R x + ε/(1+ε r_ll) · (x_l − (R x)_l) · R e_l
//! 1_K        = 1   + ε/(1+ε r_ll) · (e_l − R e_l)
//! ```
//!
//! so the perturbed PD needs only two solves against `I + L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{dot, ShiftedLaplacian};
use crate::metrics::pd_index;
use crate::opinion::{center, OpinionVector, StubbornnessVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResult {
    pub node: usize,
    pub epsilon: f64,
    pub pd_before: f64,
    /// Value from the closed form (or the Sherman–Morrison route).
    pub pd_after: f64,
    /// Direct recomputation with the updated `K`, when it was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pd_after_direct: Option<f64>,
    /// `[(I+L)⁻¹]_ll`.
    pub r_ll: f64,
    /// `z̄_l` in the vanilla model.
    pub z_bar_l_fj: f64,
    /// `⟨s, 1_K⟩² / n` with the post-update `K`.
    pub shift_term: f64,
    /// `(2ε + ε² r_ll)/(1 + ε r_ll)² · (z̄_l^FJ)²`.
    pub damping_term: f64,
}

/// Whether to recompute the perturbed PD directly and compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossCheck {
    #[default]
    Both,
    FormulaOnly,
}

/// Agreement tolerance for the two routes, relative to `1 + PD`.
fn route_tolerance(cfg: &SolverConfig) -> f64 {
    f64::max(1e-9, 10.0 * cfg.rel_tolerance)
}

/// Shared resolvent data for node `l`.
struct Resolvent {
    /// `R e_l`.
    column: Vec<f64>,
    r_ll: f64,
    /// `R s̄`.
    z_fj: Vec<f64>,
    s_bar: Vec<f64>,
    pd_before: f64,
}

impl Resolvent {
    fn new(g: &Graph, s: &[f64], l: usize, cfg: &SolverConfig) -> Result<Self> {
        let n = g.node_count();
        let ones = vec![1.0; n];
        let op = ShiftedLaplacian::new(g, &ones)?;
        let mut e = vec![0.0; n];
        e[l] = 1.0;
        let column = op.solve(&e, cfg)?.x;
        let r_ll = column[l];
        let s_bar = center(s);
        let z_fj = op.solve(&s_bar, cfg)?.x;
        // R maps mean-zero vectors to mean-zero vectors, so z_fj is z̄^FJ.
        let pd_before = dot(&z_fj, &z_fj) + g.laplacian_quadratic(&z_fj)?;
        Ok(Self {
            column,
            r_ll,
            z_fj,
            s_bar,
            pd_before,
        })
    }

    fn gain(&self, epsilon: f64) -> f64 {
        epsilon / (1.0 + epsilon * self.r_ll)
    }

    /// `1_K` after the update.
    fn one_k(&self, l: usize, epsilon: f64) -> Vec<f64> {
        let c = self.gain(epsilon);
        let mut v: Vec<f64> = self.column.iter().map(|r| 1.0 - c * r).collect();
        v[l] += c;
        v
    }

    fn damping(&self, l: usize, epsilon: f64) -> f64 {
        let d = 1.0 + epsilon * self.r_ll;
        (2.0 * epsilon + epsilon * epsilon * self.r_ll) / (d * d) * self.z_fj[l] * self.z_fj[l]
    }
}

fn check_node(g: &Graph, s: &OpinionVector, l: usize) -> Result<()> {
    Error::check_len(g.node_count(), s.len())?;
    if l >= g.node_count() {
        return Err(Error::validation(format!(
            "node {l} out of range 0..{}",
            g.node_count()
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64, allow_zero: bool) -> Result<()> {
    let ok = epsilon.is_finite() && (epsilon > 0.0 || (allow_zero && epsilon == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!("epsilon must be positive, got {epsilon}")))
    }
}

fn direct_pd_after(
    g: &Graph,
    s: &OpinionVector,
    l: usize,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let k = StubbornnessVector::single_boost(g.node_count(), l, epsilon)?;
    Ok(pd_index(g, s, &k, cfg)?.pd)
}

fn compare(what: &'static str, formula: f64, direct: f64, pd_before: f64, cfg: &SolverConfig) -> Result<()> {
    let tolerance = route_tolerance(cfg) * (1.0 + pd_before.abs());
    if (formula - direct).abs() > tolerance {
        return Err(Error::RouteMismatch {
            what,
            first: formula,
            second: direct,
            tolerance,
        });
    }
    Ok(())
}

/// `[(I + L)⁻¹]_ll`, positive for every graph.
pub fn resolvent_diagonal(g: &Graph, l: usize, cfg: &SolverConfig) -> Result<f64> {
    let n = g.node_count();
    if l >= n {
        return Err(Error::validation(format!("node {l} out of range 0..{n}")));
    }
    let ones = vec![1.0; n];
    let mut e = vec![0.0; n];
    e[l] = 1.0;
    Ok(ShiftedLaplacian::new(g, &ones)?.solve(&e, cfg)?.x[l])
}

/// Closed form for a neutral node: with `⟨s, 1⟩ = 0` and `s_l = 0`,
///
/// `PD_after = PD − ⟨s, 1_K⟩²/n − (2ε + ε² r_ll)/(1 + ε r_ll)² · (z̄_l^FJ)²`.
pub fn perturbed_pd_exact(
    g: &Graph,
    s: &OpinionVector,
    l: usize,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<PerturbationResult> {
    perturbed_pd_exact_with(g, s, l, epsilon, cfg, CrossCheck::Both)
}

pub fn perturbed_pd_exact_with(
    g: &Graph,
    s: &OpinionVector,
    l: usize,
    epsilon: f64,
    cfg: &SolverConfig,
    check: CrossCheck,
) -> Result<PerturbationResult> {
    check_node(g, s, l)?;
    check_epsilon(epsilon, false)?;
    let n = g.node_count() as f64;
    let total: f64 = s.as_slice().iter().sum();
    if total.abs() > 1e-8 * n.max(1.0) {
        return Err(Error::validation(format!(
            "closed form needs mean-zero opinions, sum is {total:e}"
        )));
    }
    if s.as_slice()[l].abs() > 1e-12 {
        return Err(Error::validation(format!(
            "closed form needs a neutral node, s_{l} = {}",
            s.as_slice()[l]
        )));
    }

    let res = Resolvent::new(g, s.as_slice(), l, cfg)?;
    let one_k = res.one_k(l, epsilon);
    let inner = dot(s.as_slice(), &one_k);
    let shift_term = inner * inner / n;
    let damping_term = res.damping(l, epsilon);
    let pd_after = res.pd_before - shift_term - damping_term;

    let pd_after_direct = match check {
        CrossCheck::Both => {
            let direct = direct_pd_after(g, s, l, epsilon, cfg)?;
            compare("closed form vs direct PD", pd_after, direct, res.pd_before, cfg)?;
            Some(direct)
        }
        CrossCheck::FormulaOnly => None,
    };
    Ok(PerturbationResult {
        node: l,
        epsilon,
        pd_before: res.pd_before,
        pd_after,
        pd_after_direct,
        r_ll: res.r_ll,
        z_bar_l_fj: res.z_fj[l],
        shift_term,
        damping_term,
    })
}

/// Perturbed PD for any `s_l`, through the Sherman–Morrison route:
///
/// `PD_after = yᵀ(L+I)y + 2μ⟨s̄, 1_K⟩ + μ²n`, `y = (L+K)⁻¹K s̄`,
/// `μ = ⟨s, 1 − 1_K⟩/n`.
///
/// For mean-zero `s` the tail collapses to `−⟨s, 1_K⟩²/n`. `ε = 0` is
/// accepted and returns the baseline.
pub fn perturbed_pd_general(
    g: &Graph,
    s: &OpinionVector,
    l: usize,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<PerturbationResult> {
    perturbed_pd_general_with(g, s, l, epsilon, cfg, CrossCheck::Both)
}

pub fn perturbed_pd_general_with(
    g: &Graph,
    s: &OpinionVector,
    l: usize,
    epsilon: f64,
    cfg: &SolverConfig,
    check: CrossCheck,
) -> Result<PerturbationResult> {
    check_node(g, s, l)?;
    check_epsilon(epsilon, true)?;
    let n = g.node_count() as f64;
    let sv = s.as_slice();
    let res = Resolvent::new(g, sv, l, cfg)?;
    let c = res.gain(epsilon);

    let lift = c * (res.s_bar[l] - res.z_fj[l]);
    let y: Vec<f64> = res
        .z_fj
        .iter()
        .zip(&res.column)
        .map(|(z, r)| z + lift * r)
        .collect();
    let quad = dot(&y, &y) + g.laplacian_quadratic(&y)?;
    let one_k = res.one_k(l, epsilon);
    let mu = sv.iter().zip(&one_k).map(|(s, o)| s * (1.0 - o)).sum::<f64>() / n;
    let pd_after = quad + 2.0 * mu * dot(&res.s_bar, &one_k) + mu * mu * n;

    let inner = dot(sv, &one_k);
    let pd_after_direct = match check {
        CrossCheck::Both => {
            let direct = if epsilon == 0.0 {
                pd_index(g, s, &StubbornnessVector::uniform(g.node_count(), 1.0)?, cfg)?.pd
            } else {
                direct_pd_after(g, s, l, epsilon, cfg)?
            };
            compare("Sherman-Morrison vs direct PD", pd_after, direct, res.pd_before, cfg)?;
            Some(direct)
        }
        CrossCheck::FormulaOnly => None,
    };
    Ok(PerturbationResult {
        node: l,
        epsilon,
        pd_before: res.pd_before,
        pd_after,
        pd_after_direct,
        r_ll: res.r_ll,
        z_bar_l_fj: res.z_fj[l],
        shift_term: inner * inner / n,
        damping_term: res.damping(l, epsilon),
    })
}

/// Applies `(L+K)⁻¹K` with `K = I + ε e_l e_lᵀ` using only the resolvent
/// column `R e_l`; `x ↦ R x` is supplied by the caller.
pub fn sherman_morrison_apply(
    resolvent_column: &[f64],
    r_x: &[f64],
    x: &[f64],
    l: usize,
    epsilon: f64,
) -> Vec<f64> {
    let r_ll = resolvent_column[l];
    let c = epsilon / (1.0 + epsilon * r_ll);
    let lift = c * (x[l] - r_x[l]);
    r_x.iter()
        .zip(resolvent_column)
        .map(|(a, r)| a + lift * r)
        .collect()
}

/// Sweep grid for [`reduction_interval_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl ScanGrid {
    fn point(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Bisection width for interval endpoints.
pub const SCAN_RESOLUTION: f64 = 1e-4;

/// `PD(K = I + ε e_l e_lᵀ) − PD(K = I)` with `s_l` replaced by `x`.
pub fn pd_change_at(
    g: &Graph,
    template: &OpinionVector,
    l: usize,
    epsilon: f64,
    x: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let s = template.with_entry(l, x)?;
    let base = pd_index(g, &s, &StubbornnessVector::uniform(g.node_count(), 1.0)?, cfg)?.pd;
    let after = direct_pd_after(g, &s, l, epsilon, cfg)?;
    Ok(after - base)
}

/// Sweeps `s_l` over the grid and returns the maximal runs where the PD
/// change is negative. Interior endpoints are refined by bisection to
/// [`SCAN_RESOLUTION`]; runs touching the grid ends keep the grid bound.
pub fn reduction_interval_scan(
    g: &Graph,
    s_template: &OpinionVector,
    l: usize,
    epsilon: f64,
    grid: ScanGrid,
    cfg: &SolverConfig,
) -> Result<Vec<Interval>> {
    check_node(g, s_template, l)?;
    check_epsilon(epsilon, false)?;
    if !(grid.lo < grid.hi) || grid.steps < 2 {
        return Err(Error::validation("scan grid needs lo < hi and at least 2 steps"));
    }
    if grid.lo < -1.0 || grid.hi > 1.0 {
        return Err(Error::validation("scan grid must stay inside [-1, 1]"));
    }
    let delta = |x: f64| pd_change_at(g, s_template, l, epsilon, x, cfg);
    let values: Vec<f64> = (0..grid.steps)
        .into_par_iter()
        .map(|i| delta(grid.point(i)))
        .collect::<Result<_>>()?;

    // Finds the sign change between a (non-negative side) and b.
    let refine = |mut neg: f64, mut nonneg: f64| -> Result<f64> {
        while (neg - nonneg).abs() > SCAN_RESOLUTION {
            let mid = 0.5 * (neg + nonneg);
            if delta(mid)? < 0.0 {
                neg = mid;
            } else {
                nonneg = mid;
            }
        }
        Ok(0.5 * (neg + nonneg))
    };

    let mut out = Vec::new();
    let mut i = 0;
    while i < grid.steps {
        if values[i] >= 0.0 {
            i += 1;
            continue;
        }
        let start = i;
        while i < grid.steps && values[i] < 0.0 {
            i += 1;
        }
        let end = i - 1;
        let lo = if start == 0 {
            grid.lo
        } else {
            refine(grid.point(start), grid.point(start - 1))?
        };
        let hi = if end + 1 == grid.steps {
            grid.hi
        } else {
            refine(grid.point(end), grid.point(end + 1))?
        };
        out.push(Interval { lo, hi });
    }
    Ok(out)
}
