//! Gillespie sampling of the master equation and Hill's loop-erasure count of
//! cycle completions along a trajectory.

use std::collections::HashMap;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cycles::{canonical_form, CanonicalCycle, DirectedCycle, Orientation};
use crate::error::{NetworkError, Result};
use crate::flux::CycleFluxRecord;
use crate::network::TransitionNetwork;

/// One sojourn: the walker sits in `state` for `dwell`, having arrived along
/// graph edge `via` (`None` for the initial state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub state: usize,
    pub dwell: f64,
    pub via: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub visits: Vec<Visit>,
    pub seed: u64,
    pub total_time: f64,
}

impl Trajectory {
    /// Hand-built trajectory through `states`, each held for `dwell`. Each
    /// hop must be a single edge of `net`.
    pub fn from_states(net: &TransitionNetwork, states: &[usize], dwell: f64) -> Result<Self> {
        let mut visits = Vec::with_capacity(states.len());
        for (i, &s) in states.iter().enumerate() {
            if s >= net.n_states() {
                return Err(NetworkError::InvalidSimulation(format!("no state {s}")));
            }
            let via = if i == 0 {
                None
            } else {
                match net.edges_between(states[i - 1], s) {
                    [e] => Some(*e),
                    [] => {
                        return Err(NetworkError::InvalidSimulation(format!(
                            "states {} and {s} are not adjacent",
                            states[i - 1]
                        )))
                    }
                    _ => {
                        return Err(NetworkError::InvalidSimulation(format!(
                            "states {} and {s} are joined by several channels",
                            states[i - 1]
                        )))
                    }
                }
            };
            visits.push(Visit { state: s, dwell, via });
        }
        Ok(Trajectory {
            visits,
            seed: 0,
            total_time: dwell * states.len() as f64,
        })
    }

    /// Fraction of time spent in each state.
    pub fn occupancy(&self, n_states: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n_states];
        for v in &self.visits {
            occ[v.state] += v.dwell;
        }
        let total: f64 = occ.iter().sum();
        occ.iter_mut().for_each(|x| *x /= total);
        occ
    }
}

/// Per-state cumulative exit rates, one entry per incident edge.
struct JumpTable {
    exits: Vec<Vec<(usize, usize, f64)>>,
    totals: Vec<f64>,
}

impl JumpTable {
    fn new(net: &TransitionNetwork) -> Self {
        let mut exits = Vec::with_capacity(net.n_states());
        let mut totals = Vec::with_capacity(net.n_states());
        for v in 0..net.n_states() {
            let mut cum = 0.0;
            let mut row = Vec::new();
            for &(e, w) in net.neighbors(v) {
                let r = net.edge(e).rate_from(v);
                if r > 0.0 {
                    cum += r;
                    row.push((e, w, cum));
                }
            }
            exits.push(row);
            totals.push(cum);
        }
        JumpTable { exits, totals }
    }
}

/// Run a Gillespie simulation from `initial` for `total_time`, reporting each
/// visit to `sink` as soon as its dwell is known. The last dwell is truncated
/// at `total_time`. The generator is ChaCha8 seeded by `seed`, so a given
/// `(net, initial, total_time, seed)` always yields the same visits.
pub fn simulate_with(
    net: &TransitionNetwork,
    initial: usize,
    total_time: f64,
    seed: u64,
    mut sink: impl FnMut(Visit),
) -> Result<()> {
    if initial >= net.n_states() {
        return Err(NetworkError::InvalidSimulation(format!(
            "initial state {initial} out of range"
        )));
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(NetworkError::InvalidSimulation(format!(
            "total time must be positive and finite, got {total_time}"
        )));
    }
    let table = JumpTable::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0;
    let mut state = initial;
    let mut via = None;
    loop {
        let total = table.totals[state];
        if total <= 0.0 {
            return Err(NetworkError::AbsorbingState {
                state,
                label: net.state(state).label.clone(),
            });
        }
        let u: f64 = rng.sample(Open01);
        let dwell = -u.ln() / total;
        if t + dwell >= total_time {
            sink(Visit {
                state,
                dwell: total_time - t,
                via,
            });
            return Ok(());
        }
        sink(Visit { state, dwell, via });
        t += dwell;
        let target = rng.random::<f64>() * total;
        let row = &table.exits[state];
        let k = row.partition_point(|&(_, _, c)| c <= target).min(row.len() - 1);
        via = Some(row[k].0);
        state = row[k].1;
    }
}

pub fn simulate(
    net: &TransitionNetwork,
    initial: usize,
    total_time: f64,
    seed: u64,
) -> Result<Trajectory> {
    let mut visits = Vec::new();
    simulate_with(net, initial, total_time, seed, |v| visits.push(v))?;
    Ok(Trajectory {
        visits,
        seed,
        total_time,
    })
}

/// Completion counts of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleCounts {
    pub forward: u64,
    pub backward: u64,
}

impl CycleCounts {
    pub fn get(&self, orientation: Orientation) -> u64 {
        match orientation {
            Orientation::Forward => self.forward,
            Orientation::Backward => self.backward,
        }
    }
}

/// Hill's loop erasure: the walk is kept as a stack of distinct states. On
/// revisiting a state already on the stack, the loop above it is popped and
/// counted. A two-state loop counts only if it went out and back along
/// different channels.
#[derive(Debug, Clone, Default)]
pub struct CycleCounter {
    stack: Vec<usize>,
    /// Edge used to enter `stack[i]`; unused for `i = 0`.
    entry: Vec<usize>,
    position: Vec<Option<usize>>,
    counts: HashMap<CanonicalCycle, CycleCounts>,
    discarded: u64,
    time: f64,
    occupancy: Vec<f64>,
}

impl CycleCounter {
    pub fn new(n_states: usize) -> Self {
        CycleCounter {
            position: vec![None; n_states],
            occupancy: vec![0.0; n_states],
            ..Default::default()
        }
    }

    pub fn visit(&mut self, v: Visit) {
        self.time += v.dwell;
        self.occupancy[v.state] += v.dwell;
        let Some(edge) = v.via else {
            self.reset_to(v.state);
            return;
        };
        if self.stack.is_empty() {
            self.reset_to(v.state);
            return;
        }
        match self.position[v.state] {
            Some(i) => {
                let k = self.stack.len() - i;
                let vertices = self.stack[i..].to_vec();
                let mut edges: Vec<usize> = self.entry[i + 1..].to_vec();
                edges.push(edge);
                for &s in &self.stack[i + 1..] {
                    self.position[s] = None;
                }
                self.stack.truncate(i + 1);
                self.entry.truncate(i + 1);
                if k == 2 && edges[0] == edges[1] {
                    self.discarded += 1;
                    return;
                }
                let (canonical, orientation) =
                    canonical_form(&DirectedCycle::from_parts(vertices, edges));
                let c = self.counts.entry(canonical).or_default();
                match orientation {
                    Orientation::Forward => c.forward += 1,
                    Orientation::Backward => c.backward += 1,
                }
            }
            None => {
                self.position[v.state] = Some(self.stack.len());
                self.stack.push(v.state);
                self.entry.push(edge);
            }
        }
    }

    fn reset_to(&mut self, state: usize) {
        for &s in &self.stack {
            self.position[s] = None;
        }
        self.stack.clear();
        self.entry.clear();
        self.position[state] = Some(0);
        self.stack.push(state);
        self.entry.push(usize::MAX);
    }

    pub fn finish(self, seed: u64) -> CycleCountReport {
        let total: f64 = self.occupancy.iter().sum();
        let occupancy = self
            .occupancy
            .iter()
            .map(|x| if total > 0.0 { x / total } else { 0.0 })
            .collect();
        let mut counts: Vec<(CanonicalCycle, CycleCounts)> = self.counts.into_iter().collect();
        counts.sort_by(|a, b| a.0.cmp(&b.0));
        CycleCountReport {
            counts,
            total_time: self.time,
            discarded_excursions: self.discarded,
            occupancy,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleCountReport {
    /// Sorted by canonical key.
    pub counts: Vec<(CanonicalCycle, CycleCounts)>,
    pub total_time: f64,
    pub discarded_excursions: u64,
    /// Fraction of time spent in each state.
    pub occupancy: Vec<f64>,
    pub seed: u64,
}

impl CycleCountReport {
    pub fn counts_for(&self, cycle: &CanonicalCycle) -> CycleCounts {
        self.counts
            .binary_search_by(|(c, _)| c.cmp(cycle))
            .map(|i| self.counts[i].1)
            .unwrap_or_default()
    }

    pub fn total_completions(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c.forward + c.backward).sum()
    }
}

pub fn count_cycle_completions(trajectory: &Trajectory) -> CycleCountReport {
    let n = trajectory
        .visits
        .iter()
        .map(|v| v.state + 1)
        .max()
        .unwrap_or(0);
    let mut counter = CycleCounter::new(n);
    for &v in &trajectory.visits {
        counter.visit(v);
    }
    counter.finish(trajectory.seed)
}

/// Simulate and count without storing the trajectory.
pub fn simulate_cycle_counts(
    net: &TransitionNetwork,
    initial: usize,
    total_time: f64,
    seed: u64,
) -> Result<CycleCountReport> {
    let mut counter = CycleCounter::new(net.n_states());
    simulate_with(net, initial, total_time, seed, |v| counter.visit(v))?;
    Ok(counter.finish(seed))
}

/// Rate estimate `count / time` with Poisson standard error `√count / time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEstimate {
    pub count: u64,
    pub rate: f64,
    pub std_error: f64,
}

impl FluxEstimate {
    fn new(count: u64, time: f64) -> Self {
        FluxEstimate {
            count,
            rate: count as f64 / time,
            std_error: (count as f64).sqrt() / time,
        }
    }

    /// `(rate − expected) / σ`, with σ taken from the expected count so that
    /// a zero observed count is still judged.
    pub fn z_score(&self, expected: f64, time: f64) -> f64 {
        let sigma = (expected * time).max(1.0).sqrt() / time;
        (self.rate - expected) / sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFlux {
    pub cycle: CanonicalCycle,
    pub forward: FluxEstimate,
    pub backward: FluxEstimate,
}

impl EmpiricalFlux {
    pub fn net(&self) -> f64 {
        self.forward.rate - self.backward.rate
    }

    /// Standard error of the net rate.
    pub fn net_std_error(&self) -> f64 {
        self.forward.std_error.hypot(self.backward.std_error)
    }
}

pub fn empirical_cycle_flux(report: &CycleCountReport) -> Result<Vec<EmpiricalFlux>> {
    if !(report.total_time > 0.0) {
        return Err(NetworkError::InvalidSimulation(
            "report covers no time".into(),
        ));
    }
    Ok(report
        .counts
        .iter()
        .map(|(c, n)| EmpiricalFlux {
            cycle: c.clone(),
            forward: FluxEstimate::new(n.forward, report.total_time),
            backward: FluxEstimate::new(n.backward, report.total_time),
        })
        .collect())
}

/// One orientation of one cycle compared with its analytic flux.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxComparison {
    pub cycle: CanonicalCycle,
    pub orientation: Orientation,
    pub analytic: f64,
    pub estimate: FluxEstimate,
    pub z_score: f64,
}

/// Compare every orientation of every analytic record with the counts.
pub fn compare_with_analytic(
    report: &CycleCountReport,
    records: &[CycleFluxRecord],
) -> Vec<FluxComparison> {
    let mut out = Vec::with_capacity(2 * records.len());
    for r in records {
        let counts = report.counts_for(&r.cycle);
        for o in [Orientation::Forward, Orientation::Backward] {
            let estimate = FluxEstimate::new(counts.get(o), report.total_time);
            out.push(FluxComparison {
                cycle: r.cycle.clone(),
                orientation: o,
                analytic: r.j(o),
                z_score: estimate.z_score(r.j(o), report.total_time),
                estimate,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{GraphMode, ReservoirSpec, StateNode, Statistics, TransitionChannel, Transported};
    use std::collections::BTreeMap;

    fn ring(n: usize, extra: &[(usize, usize)], mode: GraphMode) -> TransitionNetwork {
        let states = (0..n)
            .map(|id| StateNode {
                id,
                label: format!("{id}"),
                energy: 0.0,
                quantum_numbers: BTreeMap::new(),
            })
            .collect();
        let res = (0..2)
            .map(|id| ReservoirSpec {
                id,
                statistics: Statistics::Boson,
                temperature: 1.0,
                chemical_potential: 0.0,
                coupling: 1.0,
            })
            .collect();
        let mut pairs: Vec<(usize, usize, usize)> = (0..n).map(|i| (i, (i + 1) % n, 0)).collect();
        pairs.extend(extra.iter().map(|&(a, b)| (a, b, 0)));
        if mode == GraphMode::Multigraph {
            pairs.push((0, 1, 1));
        }
        let channels = pairs
            .into_iter()
            .map(|(from, to, reservoir)| TransitionChannel {
                from,
                to,
                reservoir,
                rate_forward: 1.0,
                rate_backward: 1.0,
                transported: Transported::default(),
            })
            .collect();
        TransitionNetwork::new(states, res, channels, mode).unwrap()
    }

    #[test]
    fn hand_traces() {
        let net = ring(4, &[(1, 3)], GraphMode::Collapsed);
        // 0,1,2,3,0 : one completion of the 4-ring
        let r = count_cycle_completions(&Trajectory::from_states(&net, &[0, 1, 2, 3, 0], 1.0).unwrap());
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts[0].0.vertices(), &[0, 1, 2, 3]);
        assert_eq!(r.counts[0].1, CycleCounts { forward: 1, backward: 0 });
        // 0,1,2,1,3,0 : excursion 1-2-1 discarded, then 0-1-3-0
        let r = count_cycle_completions(&Trajectory::from_states(&net, &[0, 1, 2, 1, 3, 0], 1.0).unwrap());
        assert_eq!(r.discarded_excursions, 1);
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts[0].0.vertices(), &[0, 1, 3]);
        assert_eq!(r.counts[0].1.forward, 1);
        // reverse direction is a backward completion
        let r = count_cycle_completions(&Trajectory::from_states(&net, &[0, 3, 1, 0], 1.0).unwrap());
        assert_eq!(r.counts[0].1, CycleCounts { forward: 0, backward: 1 });
    }

    #[test]
    fn multigraph_two_cycles_need_distinct_channels() {
        let net = ring(3, &[], GraphMode::Multigraph);
        let e01: Vec<usize> = net.edges_between(0, 1).to_vec();
        assert_eq!(e01.len(), 2);
        let mut c = CycleCounter::new(3);
        c.visit(Visit { state: 0, dwell: 1.0, via: None });
        c.visit(Visit { state: 1, dwell: 1.0, via: Some(e01[0]) });
        c.visit(Visit { state: 0, dwell: 1.0, via: Some(e01[0]) });
        c.visit(Visit { state: 1, dwell: 1.0, via: Some(e01[0]) });
        c.visit(Visit { state: 0, dwell: 1.0, via: Some(e01[1]) });
        let r = c.finish(0);
        assert_eq!(r.discarded_excursions, 1);
        assert_eq!(r.total_completions(), 1);
        assert_eq!(r.counts[0].0.len(), 2);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let net = ring(3, &[], GraphMode::Collapsed);
        let a = simulate(&net, 0, 500.0, 11).unwrap();
        let b = simulate(&net, 0, 500.0, 11).unwrap();
        let c = simulate(&net, 0, 500.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.visits.iter().all(|v| v.dwell > 0.0));
        let t: f64 = a.visits.iter().map(|v| v.dwell).sum();
        assert!((t - 500.0).abs() < 1e-9);
        let streamed = simulate_cycle_counts(&net, 0, 500.0, 11).unwrap();
        assert_eq!(streamed, count_cycle_completions(&a));
    }

    #[test]
    fn two_state_occupancy() {
        let states = (0..2)
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
        let ch = vec![TransitionChannel {
            from: 0,
            to: 1,
            reservoir: 0,
            rate_forward: 2.0,
            rate_backward: 3.0,
            transported: Transported::default(),
        }];
        let net = TransitionNetwork::new(states, res, ch, GraphMode::Collapsed).unwrap();
        let report = simulate_cycle_counts(&net, 0, 2e5, 3).unwrap();
        // telegraph process: Var = 2 p0 p1 / ((k01 + k10) T)
        let sigma = (2.0 * 0.6f64 * 0.4 / (5.0 * 2e5)).sqrt();
        assert!((report.occupancy[0] - 0.6).abs() < 3.0 * sigma, "{}", report.occupancy[0]);
    }

    #[test]
    fn absorbing_state_aborts() {
        let states = (0..2)
            .map(|id| StateNode {
                id,
                label: format!("s{id}"),
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
        let ch = vec![TransitionChannel {
            from: 0,
            to: 1,
            reservoir: 0,
            rate_forward: 1.0,
            rate_backward: 0.0,
            transported: Transported::default(),
        }];
        let net = TransitionNetwork::new(states, res, ch, GraphMode::Collapsed).unwrap();
        let err = simulate(&net, 0, 1e3, 1).unwrap_err();
        assert!(matches!(err, NetworkError::AbsorbingState { state: 1, .. }));
    }
}
