//! Stationary solution of the Pauli master equation, edge fluxes and
//! per-reservoir currents.

use std::fmt;

use crate::error::{NetworkError, Result};
use crate::linalg;
use crate::network::{build_laplacian, Quantity, TransitionNetwork};

/// Normalized occupation probabilities of the network states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates non-negativity and unit sum (within 1e-12).
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(NetworkError::InvalidParameter(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(NetworkError::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(ProbabilityVector(p))
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
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Stationary distribution `L p = 0`, `Σ p = 1`.
pub fn solve_steady_state(net: &TransitionNetwork) -> Result<ProbabilityVector> {
    let p = linalg::gth_stationary(&net.rate_matrix())
        .map_err(|state| NetworkError::SingularBeyondRankOne { state })?;
    Ok(ProbabilityVector(p))
}

/// Stationary distribution from the Markov-chain tree theorem,
/// `p_i = det(L[i;i]) / Σ_j det(L[j;j])`. Also returns the normalization.
pub fn tree_theorem_distribution(net: &TransitionNetwork) -> Result<(ProbabilityVector, f64)> {
    let l = build_laplacian(net);
    let minors: Vec<f64> = (0..l.dim())
        .map(|i| linalg::principal_minor(&l, &[i]))
        .collect();
    let total: f64 = minors.iter().sum();
    if total == 0.0 {
        return Err(NetworkError::SingularBeyondRankOne { state: 0 });
    }
    if !total.is_normal() {
        return Err(NetworkError::NumericalUnderflow { value: total });
    }
    Ok((
        ProbabilityVector(minors.into_iter().map(|m| m / total).collect()),
        total,
    ))
}

/// Stationary distribution from an LU solve of `L` with one row replaced by
/// the normalization constraint.
pub fn nullspace_distribution(net: &TransitionNetwork) -> Result<ProbabilityVector> {
    let l = build_laplacian(net);
    let p = linalg::lu_nullspace(&l).ok_or(NetworkError::SingularBeyondRankOne { state: 0 })?;
    // Round-off can leave tiny negative entries.
    let p: Vec<f64> = p.into_iter().map(|x| x.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    Ok(ProbabilityVector(p.into_iter().map(|x| x / total).collect()))
}

/// `‖L p‖∞ / (‖L‖·‖p‖)`.
pub fn stationarity_residual(net: &TransitionNetwork, p: &ProbabilityVector) -> f64 {
    let l = build_laplacian(net);
    let n = l.dim();
    let worst = (0..n)
        .map(|i| (0..n).map(|j| l.get(i, j) * p[j]).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let pmax = p.as_slice().iter().fold(0.0_f64, |m, &x| m.max(x));
    worst / (l.max_abs() * pmax)
}

/// Directed flows along one edge at the given distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFlow {
    /// `a → b` probability flow (`a < b`).
    pub forward: f64,
    /// `b → a` probability flow.
    pub backward: f64,
}

impl EdgeFlow {
    pub fn net(&self) -> f64 {
        self.forward - self.backward
    }

    pub fn traffic(&self) -> f64 {
        self.forward.max(self.backward)
    }
}

/// Flows per graph edge and per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFluxMap {
    pub edges: Vec<EdgeFlow>,
    /// Indexed like `net.channels()`; forward = channel `from → to`.
    pub channels: Vec<EdgeFlow>,
}

impl EdgeFluxMap {
    /// Largest `|Σ incident net flux|` over states, relative to the largest
    /// one-directional flow.
    pub fn max_divergence(&self, net: &TransitionNetwork) -> f64 {
        let mut div = vec![0.0; net.n_states()];
        for (edge, flow) in net.edges().iter().zip(&self.edges) {
            div[edge.a] -= flow.net();
            div[edge.b] += flow.net();
        }
        let scale = self
            .edges
            .iter()
            .map(EdgeFlow::traffic)
            .fold(0.0_f64, f64::max);
        let worst = div.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }
}

pub fn edge_fluxes(net: &TransitionNetwork, p: &ProbabilityVector) -> EdgeFluxMap {
    let edges = net
        .edges()
        .iter()
        .map(|e| EdgeFlow {
            forward: e.rate_ab * p[e.a],
            backward: e.rate_ba * p[e.b],
        })
        .collect();
    let channels = net
        .channels()
        .iter()
        .map(|c| EdgeFlow {
            forward: c.rate_forward * p[c.from],
            backward: c.rate_backward * p[c.to],
        })
        .collect();
    EdgeFluxMap { edges, channels }
}

/// Steady-state current of one quantity from one reservoir into the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirCurrent {
    pub reservoir: usize,
    pub quantity: Quantity,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurrentReport {
    pub currents: Vec<ReservoirCurrent>,
}

impl CurrentReport {
    pub fn get(&self, reservoir: usize, quantity: Quantity) -> Option<f64> {
        self.currents
            .iter()
            .find(|c| c.reservoir == reservoir && c.quantity == quantity)
            .map(|c| c.value)
    }

    /// Sum over reservoirs of one quantity.
    pub fn total(&self, quantity: Quantity) -> f64 {
        self.currents
            .iter()
            .filter(|c| c.quantity == quantity)
            .map(|c| c.value)
            .sum()
    }

    /// Largest `|current|` of a quantity, used to scale conservation checks.
    pub fn scale(&self, quantity: Quantity) -> f64 {
        self.currents
            .iter()
            .filter(|c| c.quantity == quantity)
            .fold(0.0_f64, |m, c| m.max(c.value.abs()))
    }

    /// CSV rows `sweep_value,reservoir_id,quantity,current`.
    pub fn csv_rows(&self, sweep_value: f64) -> Vec<String> {
        self.currents
            .iter()
            .map(|c| format!("{sweep_value},{},{},{:e}", c.reservoir, c.quantity, c.value))
            .collect()
    }
}

impl fmt::Display for CurrentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.currents {
            writeln!(f, "reservoir {:>3}  {:<8} {:+.6e}", c.reservoir, c.quantity, c.value)?;
        }
        Ok(())
    }
}

/// Quantities annotated on every channel (heat needs energy and, at nonzero
/// chemical potential, particle number).
pub fn available_quantities(net: &TransitionNetwork) -> Vec<Quantity> {
    Quantity::ALL
        .into_iter()
        .filter(|&q| {
            net.channels().iter().all(|c| {
                let mu = net.reservoir(c.reservoir).map_or(0.0, |r| r.chemical_potential);
                c.transported.get(q, mu).is_some()
            })
        })
        .collect()
}

/// `J_v^q = Σ_{channels of v} q · (net forward flow)`, positive into the
/// system. Fails if a channel of any reservoir lacks a requested annotation.
pub fn reservoir_currents(
    net: &TransitionNetwork,
    p: &ProbabilityVector,
    quantities: &[Quantity],
) -> Result<CurrentReport> {
    let flows = edge_fluxes(net, p);
    let mut currents = Vec::new();
    for res in net.reservoirs() {
        for &q in quantities {
            let mut value = 0.0;
            for (ci, c) in net.channels().iter().enumerate() {
                if c.reservoir != res.id {
                    continue;
                }
                let carried = c.transported.get(q, res.chemical_potential).ok_or_else(|| {
                    NetworkError::MissingAnnotation {
                        channel: ci,
                        quantity: q.name().to_string(),
                    }
                })?;
                value += carried * flows.channels[ci].net();
            }
            currents.push(ReservoirCurrent {
                reservoir: res.id,
                quantity: q,
                value,
            });
        }
    }
    Ok(CurrentReport { currents })
}
