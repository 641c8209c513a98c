//! Cycle fluxes from the matrix-tree formula
//! `J(C±) = Π(C±) · det(L[C;C]) / Σ_i det(L[i;i])`, their ranking, and the
//! decomposition of steady-state edge fluxes into cycle contributions.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::cycles::{enumerate_cycles, CanonicalCycle, DirectedCycle, Orientation};
use crate::error::{NetworkError, Result};
use crate::linalg::principal_minor;
use crate::network::{build_laplacian, Laplacian, TransitionNetwork};
use crate::steady_state::{edge_fluxes, solve_steady_state, ProbabilityVector};

/// Ordering used to rank cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankKey {
    /// `max(J+, J−)`: one-directional traffic, so futile cycles rank high.
    #[default]
    Traffic,
    /// `|J+ − J−|`.
    Net,
}

impl std::str::FromStr for RankKey {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traffic" => Ok(RankKey::Traffic),
            "net" => Ok(RankKey::Net),
            other => Err(NetworkError::InvalidParameter(format!(
                "unknown rank key `{other}` (expected traffic|net)"
            ))),
        }
    }
}

/// Quantities exchanged with one reservoir per completion of a cycle,
/// positive into the system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CycleTransport {
    pub reservoir: usize,
    pub energy: f64,
    pub particle: f64,
    pub spin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleFluxRecord {
    pub cycle: CanonicalCycle,
    pub pi_forward: f64,
    pub pi_backward: f64,
    pub rooted_minor: f64,
    pub normalization: f64,
    pub j_forward: f64,
    pub j_backward: f64,
    pub j_net: f64,
    /// `ln(Π+/Π−)`, accumulated step by step; infinite if a rate vanishes.
    pub affinity: f64,
    /// Per reservoir (in `net.reservoirs()` order), per forward completion.
    pub transport: Vec<CycleTransport>,
    /// Per reservoir, per backward completion. Differs from `-transport` only
    /// when collapsed edges mix reservoirs in direction-dependent proportions.
    pub transport_backward: Vec<CycleTransport>,
}

impl CycleFluxRecord {
    pub fn traffic(&self) -> f64 {
        self.j_forward.max(self.j_backward)
    }

    pub fn j(&self, orientation: Orientation) -> f64 {
        match orientation {
            Orientation::Forward => self.j_forward,
            Orientation::Backward => self.j_backward,
        }
    }

    pub fn transport_for(&self, reservoir: usize) -> Option<&CycleTransport> {
        self.transport.iter().find(|t| t.reservoir == reservoir)
    }

    fn rank_value(&self, key: RankKey) -> f64 {
        match key {
            RankKey::Traffic => self.traffic(),
            RankKey::Net => self.j_net.abs(),
        }
    }
}

/// Product of directed rates around the cycle.
pub fn cycle_weight(net: &TransitionNetwork, cycle: &DirectedCycle) -> f64 {
    cycle
        .steps()
        .map(|(from, _, e)| net.edge(e).rate_from(from))
        .product()
}

/// `det(L[C;C])`: total weight of spanning forests rooted on the cycle's states.
pub fn rooted_minor(l: &Laplacian, cycle: &CanonicalCycle) -> f64 {
    principal_minor(l, cycle.vertices())
}

/// `Σ = Σ_i det(L[i;i])`, the total weight of rooted spanning trees.
pub fn normalization(l: &Laplacian) -> Result<f64> {
    let sigma: f64 = (0..l.dim()).map(|i| principal_minor(l, &[i])).sum();
    if !sigma.is_normal() {
        return Err(NetworkError::NumericalUnderflow { value: sigma });
    }
    Ok(sigma)
}

fn affinity(net: &TransitionNetwork, cycle: &DirectedCycle) -> f64 {
    cycle
        .steps()
        .map(|(from, to, e)| {
            let edge = net.edge(e);
            edge.rate_from(from).ln() - edge.rate_from(to).ln()
        })
        .sum()
}

/// Expected exchange with each reservoir per traversal of `cycle`. A
/// collapsed edge is attributed to its channels in proportion to their rates
/// in the direction travelled. Missing annotations count as zero.
pub fn cycle_transport(net: &TransitionNetwork, cycle: &DirectedCycle) -> Vec<CycleTransport> {
    let mut out: Vec<CycleTransport> = net
        .reservoirs()
        .iter()
        .map(|r| CycleTransport {
            reservoir: r.id,
            ..Default::default()
        })
        .collect();
    for (from, _, e) in cycle.steps() {
        let edge = net.edge(e);
        let total = edge.rate_from(from);
        let n_channels = edge.channels.len() as f64;
        for &ci in &edge.channels {
            let ch = &net.channels()[ci];
            let share = if total > 0.0 {
                net.channel_rate_from(ci, from) / total
            } else {
                1.0 / n_channels
            };
            let sign = if from == ch.from { 1.0 } else { -1.0 };
            let slot = out
                .iter_mut()
                .find(|t| t.reservoir == ch.reservoir)
                .expect("validated reservoir");
            let t = &ch.transported;
            slot.energy += share * sign * t.energy.unwrap_or(0.0);
            slot.particle += share * sign * t.particle.unwrap_or(0.0);
            slot.spin += share * sign * t.spin.unwrap_or(0.0);
        }
    }
    out
}

fn record_for(
    net: &TransitionNetwork,
    l: &Laplacian,
    sigma: f64,
    cycle: &CanonicalCycle,
) -> CycleFluxRecord {
    let forward = cycle.forward();
    let backward = cycle.backward();
    let pi_forward = cycle_weight(net, forward);
    let pi_backward = cycle_weight(net, &backward);
    let minor = rooted_minor(l, cycle);
    let j_forward = pi_forward * minor / sigma;
    let j_backward = pi_backward * minor / sigma;
    CycleFluxRecord {
        cycle: cycle.clone(),
        pi_forward,
        pi_backward,
        rooted_minor: minor,
        normalization: sigma,
        j_forward,
        j_backward,
        j_net: j_forward - j_backward,
        affinity: affinity(net, forward),
        transport: cycle_transport(net, forward),
        transport_backward: cycle_transport(net, &backward),
    }
}

/// Flux record of a single cycle.
pub fn cycle_flux_pair(net: &TransitionNetwork, cycle: &CanonicalCycle) -> Result<CycleFluxRecord> {
    let l = build_laplacian(net);
    let sigma = normalization(&l)?;
    Ok(record_for(net, &l, sigma, cycle))
}

/// Top `k` cycles by traffic.
pub fn rank_cycles(net: &TransitionNetwork, k: usize) -> Result<Vec<CycleFluxRecord>> {
    let analysis = FluxAnalysis::new(net)?;
    Ok(analysis
        .top(k, RankKey::Traffic)
        .into_iter()
        .cloned()
        .collect())
}

/// Cycle-flux decomposition of one edge's steady-state net flux.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDecomposition {
    pub edge: usize,
    /// Net `a → b` flux from the stationary distribution.
    pub steady_flux: f64,
    /// `max` of the two one-directional flows; the scale for `relative_residual`.
    pub traffic: f64,
    pub cycle_sum: f64,
    /// `(record index, signed j_net)` for every cycle through the edge.
    pub contributions: Vec<(usize, f64)>,
    pub residual: f64,
    pub relative_residual: f64,
}

pub fn decompose_edge_flux(net: &TransitionNetwork, edge: usize) -> Result<EdgeDecomposition> {
    let analysis = FluxAnalysis::new(net)?;
    let p = solve_steady_state(net)?;
    analysis.decompose_edge(edge, &p)
}

/// Schnakenberg entropy production `Σ_C (J+ − J−) ln(Π+/Π−)`.
pub fn entropy_production(net: &TransitionNetwork) -> Result<f64> {
    Ok(FluxAnalysis::new(net)?.entropy_production())
}

/// Flux records for every cycle of a network, sharing one Laplacian and one
/// normalization.
#[derive(Debug, Clone)]
pub struct FluxAnalysis {
    net: TransitionNetwork,
    laplacian: Laplacian,
    normalization: f64,
    records: Vec<CycleFluxRecord>,
}

impl FluxAnalysis {
    pub fn new(net: &TransitionNetwork) -> Result<Self> {
        let cycles = enumerate_cycles(net)?;
        Self::with_cycles(net, &cycles)
    }

    /// Evaluate a precomputed cycle list (e.g. reused across a sweep).
    pub fn with_cycles(net: &TransitionNetwork, cycles: &[CanonicalCycle]) -> Result<Self> {
        let laplacian = build_laplacian(net);
        let sigma = normalization(&laplacian)?;
        let records = cycles
            .par_iter()
            .map(|c| record_for(net, &laplacian, sigma, c))
            .collect();
        Ok(FluxAnalysis {
            net: net.clone(),
            laplacian,
            normalization: sigma,
            records,
        })
    }

    pub fn network(&self) -> &TransitionNetwork {
        &self.net
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn records(&self) -> &[CycleFluxRecord] {
        &self.records
    }

    pub fn find(&self, cycle: &CanonicalCycle) -> Option<&CycleFluxRecord> {
        self.records
            .binary_search_by(|r| r.cycle.cmp(cycle))
            .ok()
            .map(|i| &self.records[i])
            .or_else(|| self.records.iter().find(|r| &r.cycle == cycle))
    }

    /// Records sorted by `key` descending, ties broken by canonical key.
    pub fn ranked(&self, key: RankKey) -> Vec<&CycleFluxRecord> {
        self.ranked_indices(key)
            .into_iter()
            .map(|i| &self.records[i])
            .collect()
    }

    /// Indices into [`records`](Self::records) in ranking order.
    pub fn ranked_indices(&self, key: RankKey) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.records.len()).collect();
        out.sort_by(|&a, &b| {
            let (a, b) = (&self.records[a], &self.records[b]);
            b.rank_value(key)
                .total_cmp(&a.rank_value(key))
                .then_with(|| a.cycle.cmp(&b.cycle))
        });
        out
    }

    pub fn top(&self, k: usize, key: RankKey) -> Vec<&CycleFluxRecord> {
        let mut ranked = self.ranked(key);
        ranked.truncate(k);
        ranked
    }

    pub fn entropy_production(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.j_net != 0.0)
            .map(|r| r.j_net * r.affinity)
            .sum()
    }

    pub fn decompose_edge(&self, edge: usize, p: &ProbabilityVector) -> Result<EdgeDecomposition> {
        if edge >= self.net.edges().len() {
            return Err(NetworkError::InvalidParameter(format!(
                "edge {edge} out of range"
            )));
        }
        let contributions: Vec<(usize, f64)> = self
            .records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                r.cycle
                    .edge_sign(&self.net, edge)
                    .map(|s| (i, s * r.j_net))
            })
            .collect();
        let flows = edge_fluxes(&self.net, p);
        let flow = flows.edges[edge];
        let cycle_sum: f64 = contributions.iter().map(|&(_, c)| c).sum();
        Ok(finish(edge, flow.net(), flow.traffic(), cycle_sum, contributions))
    }

    /// Decomposition of every edge; per-cycle contributions are omitted.
    pub fn decompose_all(&self, p: &ProbabilityVector) -> Vec<EdgeDecomposition> {
        let mut sums = vec![0.0; self.net.edges().len()];
        for r in &self.records {
            for (from, _, e) in r.cycle.forward().steps() {
                let sign = if from == self.net.edge(e).a { 1.0 } else { -1.0 };
                sums[e] += sign * r.j_net;
            }
        }
        let flows = edge_fluxes(&self.net, p);
        flows
            .edges
            .iter()
            .zip(sums)
            .enumerate()
            .map(|(e, (flow, sum))| finish(e, flow.net(), flow.traffic(), sum, Vec::new()))
            .collect()
    }

    pub fn max_decomposition_residual(&self, p: &ProbabilityVector) -> f64 {
        self.decompose_all(p)
            .iter()
            .map(|d| d.relative_residual)
            .fold(0.0, f64::max)
    }
}

fn finish(
    edge: usize,
    steady_flux: f64,
    traffic: f64,
    cycle_sum: f64,
    contributions: Vec<(usize, f64)>,
) -> EdgeDecomposition {
    let residual = (cycle_sum - steady_flux).abs();
    let relative_residual = match traffic.partial_cmp(&0.0) {
        Some(Ordering::Greater) => residual / traffic,
        _ => residual,
    };
    EdgeDecomposition {
        edge,
        steady_flux,
        traffic,
        cycle_sum,
        contributions,
        residual,
        relative_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{GraphMode, ReservoirSpec, StateNode, Statistics, TransitionChannel, Transported};
    use std::collections::BTreeMap;

    fn generic(rates: &[(usize, usize, f64, f64)], n: usize) -> TransitionNetwork {
        let states = (0..n)
            .map(|id| StateNode {
                id,
                label: format!("{id}"),
                energy: 0.0,
                quantum_numbers: BTreeMap::new(),
            })
            .collect();
        let res = vec![ReservoirSpec {
            id: 0,
            statistics: Statistics::Boson,
            temperature: 1.0,
            chemical_potential: 0.0,
            coupling: 1.0,
        }];
        let channels = rates
            .iter()
            .map(|&(from, to, fw, bw)| TransitionChannel {
                from,
                to,
                reservoir: 0,
                rate_forward: fw,
                rate_backward: bw,
                transported: Transported::new(1.0, 0.0, 0.0),
            })
            .collect();
        TransitionNetwork::new(states, res, channels, GraphMode::Collapsed).unwrap()
    }

    #[test]
    fn symmetric_ring_fluxes() {
        let net = generic(&[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (2, 0, 1.0, 1.0)], 3);
        let a = FluxAnalysis::new(&net).unwrap();
        assert_eq!(a.records().len(), 1);
        let r = &a.records()[0];
        assert_eq!(r.pi_forward, 1.0);
        assert_eq!(r.rooted_minor, 1.0);
        assert_eq!(r.normalization, 9.0);
        assert!((r.j_forward - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(r.j_net, 0.0);
        assert_eq!(a.entropy_production(), 0.0);
        let p = solve_steady_state(&net).unwrap();
        let d = a.decompose_edge(0, &p).unwrap();
        assert_eq!(d.cycle_sum, 0.0);
        assert!(d.residual < 1e-16);
    }

    #[test]
    fn weight_is_product_of_directed_rates() {
        let net = generic(&[(0, 1, 2.0, 3.0), (1, 2, 5.0, 7.0), (2, 0, 11.0, 13.0)], 3);
        let c = DirectedCycle::from_vertices(&net, &[0, 1, 2]).unwrap();
        assert_eq!(cycle_weight(&net, &c), 2.0 * 5.0 * 11.0);
        assert_eq!(cycle_weight(&net, &c.reversed()), 13.0 * 7.0 * 3.0);
    }

    #[test]
    fn driven_ring_has_positive_entropy_production() {
        let net = generic(&[(0, 1, 2.0, 1.0), (1, 2, 2.0, 1.0), (2, 0, 2.0, 1.0), (2, 3, 1.0, 0.5)], 4);
        let a = FluxAnalysis::new(&net).unwrap();
        let r = &a.records()[0];
        assert!((r.affinity - 3.0 * 2f64.ln()).abs() < 1e-14);
        assert!(r.j_net > 0.0);
        assert!(a.entropy_production() > 0.0);
        let p = solve_steady_state(&net).unwrap();
        assert!(a.max_decomposition_residual(&p) < 1e-14);
        // the dangling edge carries no net flux
        let d = a.decompose_edge(3, &p).unwrap();
        assert!(d.contributions.is_empty());
        assert!(d.steady_flux.abs() < 1e-15);
    }

    #[test]
    fn ranking_orders_by_traffic_then_key() {
        let net = generic(
            &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (2, 0, 1.0, 1.0), (1, 3, 1.0, 1.0), (3, 2, 1.0, 1.0)],
            4,
        );
        let a = FluxAnalysis::new(&net).unwrap();
        let ranked = a.ranked(RankKey::Traffic);
        for w in ranked.windows(2) {
            let (x, y) = (w[0], w[1]);
            assert!(x.traffic() > y.traffic() || (x.traffic() == y.traffic() && x.cycle < y.cycle));
        }
        assert_eq!(a.top(2, RankKey::Net).len(), 2);
    }

    #[test]
    fn transport_per_completion_sums_steps() {
        let net = generic(&[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (2, 0, 1.0, 1.0)], 3);
        let a = FluxAnalysis::new(&net).unwrap();
        // forward 0->1 (+1), 1->2 (+1), 2->0 (+1, channel is 2->0)
        assert_eq!(a.records()[0].transport[0].energy, 3.0);
        assert_eq!(a.records()[0].transport_backward[0].energy, -3.0);
    }
}
