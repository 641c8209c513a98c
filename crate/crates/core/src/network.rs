//! State-transition networks and their Laplacian transition matrix.
//!
//! A [`TransitionNetwork`] holds the states of a device, the reservoirs it is
//! coupled to, and one [`TransitionChannel`] per (state pair, reservoir). The
//! graph view used for cycles depends on [`GraphMode`]: in collapsed mode the
//! channels of one state pair merge into a single edge whose rates are the
//! reservoir sums; in multigraph mode every channel is its own edge.
//!
//! Units are dimensionless with ħ = k_B = e = 1.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{NetworkError, Result};

/// How parallel channels between the same pair of states are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    /// One edge per unordered state pair, rates summed over reservoirs.
    #[default]
    Collapsed,
    /// One edge per channel.
    Multigraph,
}

impl fmt::Display for GraphMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphMode::Collapsed => f.write_str("collapsed"),
            GraphMode::Multigraph => f.write_str("multigraph"),
        }
    }
}

impl std::str::FromStr for GraphMode {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collapsed" => Ok(GraphMode::Collapsed),
            "multigraph" => Ok(GraphMode::Multigraph),
            other => Err(NetworkError::InvalidParameter(format!(
                "unknown graph mode `{other}` (expected collapsed|multigraph)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

/// Transported quantities. `Heat` is derived as energy − μ·particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Energy,
    Heat,
    Particle,
    Spin,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::Energy,
        Quantity::Heat,
        Quantity::Particle,
        Quantity::Spin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Energy => "energy",
            Quantity::Heat => "heat",
            Quantity::Particle => "particle",
            Quantity::Spin => "spin",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateNode {
    pub id: usize,
    pub label: String,
    pub energy: f64,
    pub quantum_numbers: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub id: usize,
    pub statistics: Statistics,
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(rename = "mu", default)]
    pub chemical_potential: f64,
    /// Effective golden-rule rate prefactor.
    pub coupling: f64,
}

/// Quantities carried into the central system when a channel fires in its
/// forward direction. The backward direction carries the negation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Transported {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
}

impl Transported {
    pub fn new(energy: f64, particle: f64, spin: f64) -> Self {
        Transported {
            energy: Some(energy),
            particle: Some(particle),
            spin: Some(spin),
        }
    }

    /// Annotated value; `Heat` needs `energy` and uses `particle` (0 if absent).
    pub fn get(&self, quantity: Quantity, chemical_potential: f64) -> Option<f64> {
        match quantity {
            Quantity::Energy => self.energy,
            Quantity::Particle => self.particle,
            Quantity::Spin => self.spin,
            Quantity::Heat => {
                let e = self.energy?;
                match self.particle {
                    Some(n) => Some(e - chemical_potential * n),
                    None if chemical_potential == 0.0 => Some(e),
                    None => None,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionChannel {
    pub from: usize,
    pub to: usize,
    pub reservoir: usize,
    #[serde(rename = "rate_fw")]
    pub rate_forward: f64,
    #[serde(rename = "rate_bw")]
    pub rate_backward: f64,
    #[serde(default)]
    pub transported: Transported,
}

/// JSON form of a state; the id is its position in the `states` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub label: String,
    pub energy: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub quantum_numbers: BTreeMap<String, f64>,
}

/// Declarative model description; the on-disk JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub mode: GraphMode,
    pub states: Vec<StateSpec>,
    pub reservoirs: Vec<ReservoirSpec>,
    pub channels: Vec<TransitionChannel>,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| NetworkError::InvalidParameter(format!("model JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }
}

/// Graph edge between states `a < b`, aggregating one or more channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub channels: Vec<usize>,
    pub rate_ab: f64,
    pub rate_ba: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// Rate of traversing the edge starting at `from`.
    pub fn rate_from(&self, from: usize) -> f64 {
        if from == self.a {
            self.rate_ab
        } else {
            self.rate_ba
        }
    }
}

/// Validated, immutable transition network.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionNetwork {
    states: Vec<StateNode>,
    reservoirs: Vec<ReservoirSpec>,
    channels: Vec<TransitionChannel>,
    mode: GraphMode,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    pair_edges: HashMap<(usize, usize), Vec<usize>>,
    reservoir_index: HashMap<usize, usize>,
}

impl TransitionNetwork {
    pub fn new(
        states: Vec<StateNode>,
        reservoirs: Vec<ReservoirSpec>,
        channels: Vec<TransitionChannel>,
        mode: GraphMode,
    ) -> Result<Self> {
        validate_states(&states)?;
        let reservoir_index = validate_reservoirs(&reservoirs)?;
        validate_channels(&channels, states.len(), &reservoir_index)?;
        check_connected(&states, &channels)?;

        let edges = build_edges(&channels, mode);
        let mut adjacency = vec![Vec::new(); states.len()];
        let mut pair_edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.a].push((e, edge.b));
            adjacency[edge.b].push((e, edge.a));
            pair_edges.entry((edge.a, edge.b)).or_default().push(e);
        }

        Ok(TransitionNetwork {
            states,
            reservoirs,
            channels,
            mode,
            edges,
            adjacency,
            pair_edges,
            reservoir_index,
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let states = spec
            .states
            .iter()
            .enumerate()
            .map(|(id, s)| StateNode {
                id,
                label: s.label.clone(),
                energy: s.energy,
                quantum_numbers: s.quantum_numbers.clone(),
            })
            .collect();
        Self::new(
            states,
            spec.reservoirs.clone(),
            spec.channels.clone(),
            spec.mode,
        )
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            mode: self.mode,
            states: self
                .states
                .iter()
                .map(|s| StateSpec {
                    label: s.label.clone(),
                    energy: s.energy,
                    quantum_numbers: s.quantum_numbers.clone(),
                })
                .collect(),
            reservoirs: self.reservoirs.clone(),
            channels: self.channels.clone(),
        }
    }

    /// Same states and channels viewed in another graph mode.
    pub fn with_mode(&self, mode: GraphMode) -> Result<Self> {
        Self::new(
            self.states.clone(),
            self.reservoirs.clone(),
            self.channels.clone(),
            mode,
        )
    }

    /// Multiply every rate by `factor`. Cycle fluxes scale linearly; ratios
    /// and probabilities are unchanged.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(NetworkError::InvalidParameter(format!(
                "rate scale factor must be positive and finite, got {factor}"
            )));
        }
        let channels = self
            .channels
            .iter()
            .map(|c| TransitionChannel {
                rate_forward: c.rate_forward * factor,
                rate_backward: c.rate_backward * factor,
                ..c.clone()
            })
            .collect();
        Self::new(
            self.states.clone(),
            self.reservoirs.clone(),
            channels,
            self.mode,
        )
    }

    /// Rescale so the largest channel rate is 1. Returns the applied factor.
    pub fn normalized(&self) -> Result<(Self, f64)> {
        let max = self
            .channels
            .iter()
            .flat_map(|c| [c.rate_forward, c.rate_backward])
            .fold(0.0_f64, f64::max);
        if max == 0.0 {
            return Err(NetworkError::InvalidParameter(
                "all rates are zero".to_string(),
            ));
        }
        let factor = 1.0 / max;
        Ok((self.rescaled(factor)?, factor))
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateNode] {
        &self.states
    }

    pub fn state(&self, id: usize) -> &StateNode {
        &self.states[id]
    }

    pub fn state_by_label(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s.label == label)
    }

    pub fn reservoirs(&self) -> &[ReservoirSpec] {
        &self.reservoirs
    }

    pub fn reservoir(&self, id: usize) -> Option<&ReservoirSpec> {
        self.reservoir_index.get(&id).map(|&i| &self.reservoirs[i])
    }

    pub fn channels(&self) -> &[TransitionChannel] {
        &self.channels
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// `(edge, neighbour)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Edges joining `u` and `v` (in either order).
    pub fn edges_between(&self, u: usize, v: usize) -> &[usize] {
        let key = (u.min(v), u.max(v));
        self.pair_edges.get(&key).map_or(&[], Vec::as_slice)
    }

    /// Total rate `i → j` summed over all channels.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.edges_between(i, j)
            .iter()
            .map(|&e| self.edges[e].rate_from(i))
            .sum()
    }

    /// Dense `K[i][j]` = total rate `i → j`.
    pub fn rate_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_states();
        let mut k = vec![vec![0.0; n]; n];
        for c in &self.channels {
            k[c.from][c.to] += c.rate_forward;
            k[c.to][c.from] += c.rate_backward;
        }
        k
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        self.adjacency[i]
            .iter()
            .map(|&(e, _)| self.edges[e].rate_from(i))
            .sum()
    }

    /// Directed rate of channel `c` when fired from state `from`.
    pub fn channel_rate_from(&self, c: usize, from: usize) -> f64 {
        let ch = &self.channels[c];
        if from == ch.from {
            ch.rate_forward
        } else {
            ch.rate_backward
        }
    }

    /// Label path such as `|00⟩→|10⟩→|00⟩` for a closed vertex sequence.
    pub fn format_cycle(&self, vertices: &[usize]) -> String {
        let mut out = String::new();
        for &v in vertices.iter().chain(vertices.first()) {
            if !out.is_empty() {
                out.push('→');
            }
            out.push_str(&self.states[v].label);
        }
        out
    }
}

fn validate_states(states: &[StateNode]) -> Result<()> {
    if states.is_empty() {
        return Err(NetworkError::InvalidState("network has no states".into()));
    }
    let mut labels = HashSet::new();
    for (i, s) in states.iter().enumerate() {
        if s.id != i {
            return Err(NetworkError::InvalidState(format!(
                "state at position {i} has id {}",
                s.id
            )));
        }
        if !labels.insert(s.label.as_str()) {
            return Err(NetworkError::InvalidState(format!(
                "duplicate label `{}`",
                s.label
            )));
        }
        if !s.energy.is_finite() {
            return Err(NetworkError::InvalidState(format!(
                "state `{}` has non-finite energy",
                s.label
            )));
        }
    }
    Ok(())
}

fn validate_reservoirs(reservoirs: &[ReservoirSpec]) -> Result<HashMap<usize, usize>> {
    let mut index = HashMap::new();
    for (i, r) in reservoirs.iter().enumerate() {
        let bad = |reason: &str| NetworkError::InvalidReservoir {
            id: r.id,
            reason: reason.to_string(),
        };
        if !(r.temperature.is_finite() && r.temperature > 0.0) {
            return Err(bad("temperature must be positive"));
        }
        if !(r.coupling.is_finite() && r.coupling > 0.0) {
            return Err(bad("coupling must be positive"));
        }
        if !r.chemical_potential.is_finite() {
            return Err(bad("chemical potential must be finite"));
        }
        if r.statistics == Statistics::Boson && r.chemical_potential != 0.0 {
            return Err(bad("bosonic reservoirs have zero chemical potential"));
        }
        if index.insert(r.id, i).is_some() {
            return Err(bad("duplicate reservoir id"));
        }
    }
    Ok(index)
}

fn validate_channels(
    channels: &[TransitionChannel],
    n_states: usize,
    reservoirs: &HashMap<usize, usize>,
) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, c) in channels.iter().enumerate() {
        if c.from >= n_states || c.to >= n_states {
            return Err(NetworkError::DanglingReference(format!(
                "channel {i} references state {} but there are {n_states} states",
                c.from.max(c.to)
            )));
        }
        if !reservoirs.contains_key(&c.reservoir) {
            return Err(NetworkError::DanglingReference(format!(
                "channel {i} references unknown reservoir {}",
                c.reservoir
            )));
        }
        if c.from == c.to {
            return Err(NetworkError::InvalidRate {
                channel: i,
                reason: format!("self-loop on state {}", c.from),
            });
        }
        for (name, r) in [("forward", c.rate_forward), ("backward", c.rate_backward)] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(NetworkError::InvalidRate {
                    channel: i,
                    reason: format!("{name} rate {r} is not a finite non-negative number"),
                });
            }
        }
        let key = (c.from.min(c.to), c.from.max(c.to), c.reservoir);
        if !seen.insert(key) {
            return Err(NetworkError::DuplicateChannel {
                from: c.from,
                to: c.to,
                reservoir: c.reservoir,
            });
        }
    }
    Ok(())
}

fn check_connected(states: &[StateNode], channels: &[TransitionChannel]) -> Result<()> {
    let n = states.len();
    let mut adj = vec![Vec::new(); n];
    for c in channels {
        if c.rate_forward > 0.0 || c.rate_backward > 0.0 {
            adj[c.from].push(c.to);
            adj[c.to].push(c.from);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    match seen.iter().position(|&s| !s) {
        Some(state) => Err(NetworkError::DisconnectedGraph {
            state,
            label: states[state].label.clone(),
        }),
        None => Ok(()),
    }
}

fn build_edges(channels: &[TransitionChannel], mode: GraphMode) -> Vec<Edge> {
    let mut edges: Vec<Edge> = Vec::new();
    let mut by_pair: HashMap<(usize, usize), usize> = HashMap::new();
    for (ci, c) in channels.iter().enumerate() {
        let (a, b) = (c.from.min(c.to), c.from.max(c.to));
        let (ab, ba) = if c.from == a {
            (c.rate_forward, c.rate_backward)
        } else {
            (c.rate_backward, c.rate_forward)
        };
        let existing = match mode {
            GraphMode::Collapsed => by_pair.get(&(a, b)).copied(),
            GraphMode::Multigraph => None,
        };
        match existing {
            Some(e) => {
                let edge = &mut edges[e];
                edge.channels.push(ci);
                edge.rate_ab += ab;
                edge.rate_ba += ba;
            }
            None => {
                by_pair.insert((a, b), edges.len());
                edges.push(Edge {
                    a,
                    b,
                    channels: vec![ci],
                    rate_ab: ab,
                    rate_ba: ba,
                });
            }
        }
    }
    edges
}

/// Dense Laplacian transition matrix, `L[i][j] = -k(j→i)` off the diagonal and
/// `L[j][j]` the total exit rate of `j`. Columns sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    n: usize,
    data: Vec<f64>,
}

impl Laplacian {
    pub fn from_rates(rates: &[Vec<f64>]) -> Self {
        let n = rates.len();
        let mut data = vec![0.0; n * n];
        for (j, row) in rates.iter().enumerate() {
            for (i, &k) in row.iter().enumerate() {
                if i != j {
                    data[i * n + j] -= k;
                    data[j * n + j] += k;
                }
            }
        }
        Laplacian { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Rate `from → to` recovered from the off-diagonal entry.
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        -self.get(to, from)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

pub fn build_laplacian(net: &TransitionNetwork) -> Laplacian {
    Laplacian::from_rates(&net.rate_matrix())
}

/// Outcome of a local-detailed-balance check on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceDiagnostic {
    pub channel: usize,
    /// `ln(k_fw/k_bw) + (ΔE − μΔn)/T`; `None` when a rate is zero.
    pub residual: Option<f64>,
}

impl BalanceDiagnostic {
    pub fn is_zero_rate(&self) -> bool {
        self.residual.is_none()
    }
}

/// Compare each channel's rate ratio with `exp(-(ΔE − μΔn)/T)` of its reservoir,
/// where ΔE is the state-energy change along the forward direction and Δn the
/// annotated particle number (0 if absent).
pub fn validate_detailed_balance(net: &TransitionNetwork) -> Vec<BalanceDiagnostic> {
    net.channels()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let res = net.reservoir(c.reservoir).expect("validated reservoir");
            let residual = if c.rate_forward > 0.0 && c.rate_backward > 0.0 {
                let de = net.state(c.to).energy - net.state(c.from).energy;
                let dn = c.transported.particle.unwrap_or(0.0);
                let expected = -(de - res.chemical_potential * dn) / res.temperature;
                Some((c.rate_forward / c.rate_backward).ln() - expected)
            } else {
                None
            };
            BalanceDiagnostic {
                channel: i,
                residual,
            }
        })
        .collect()
}
