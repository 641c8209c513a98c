//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cycleflux::{
    canonical_form, CanonicalCycle, DirectedCycle, GraphMode, ReservoirSpec, StateNode,
    Statistics, TransitionChannel, TransitionNetwork, Transported,
};
use rand::Rng;

/// Every simple cycle by exhaustive depth-first search from each start
/// vertex through larger vertices only.
pub fn brute_force_cycles(net: &TransitionNetwork) -> BTreeSet<CanonicalCycle> {
    let mut found = BTreeSet::new();
    for s in 0..net.n_states() {
        let mut path = vec![s];
        let mut edges = Vec::new();
        dfs(net, s, &mut path, &mut edges, &mut found);
    }
    found
}

fn dfs(
    net: &TransitionNetwork,
    s: usize,
    path: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    found: &mut BTreeSet<CanonicalCycle>,
) {
    let v = *path.last().unwrap();
    for &(e, w) in net.neighbors(v) {
        if w == s {
            let closes = match path.len() {
                1 => false,
                2 => e != edges[0],
                _ => true,
            };
            if closes {
                let mut es = edges.clone();
                es.push(e);
                let c = DirectedCycle::new(net, path.clone(), es).unwrap();
                found.insert(canonical_form(&c).0);
            }
        } else if w > s && !path.contains(&w) {
            path.push(w);
            edges.push(e);
            dfs(net, s, path, edges, found);
            path.pop();
            edges.pop();
        }
    }
}

/// Total weight of spanning forests in which every vertex outside `roots`
/// points (through a chain of chosen out-edges) at a vertex of `roots`.
/// `rates[i][j]` is the rate `i → j`.
pub fn brute_force_forest_weight(rates: &[Vec<f64>], roots: &[usize]) -> f64 {
    let n = rates.len();
    let free: Vec<usize> = (0..n).filter(|v| !roots.contains(v)).collect();
    let mut choice = vec![usize::MAX; n];
    forest_rec(rates, roots, &free, 0, &mut choice)
}

fn forest_rec(
    rates: &[Vec<f64>],
    roots: &[usize],
    free: &[usize],
    k: usize,
    choice: &mut Vec<usize>,
) -> f64 {
    if k == free.len() {
        return if reaches_roots(roots, free, choice) {
            free.iter().map(|&v| rates[v][choice[v]]).product()
        } else {
            0.0
        };
    }
    let v = free[k];
    let mut total = 0.0;
    for w in 0..rates.len() {
        if w != v && rates[v][w] > 0.0 {
            choice[v] = w;
            total += forest_rec(rates, roots, free, k + 1, choice);
        }
    }
    total
}

fn reaches_roots(roots: &[usize], free: &[usize], choice: &[usize]) -> bool {
    free.iter().all(|&start| {
        let mut v = start;
        for _ in 0..=free.len() {
            if roots.contains(&v) {
                return true;
            }
            v = choice[v];
        }
        false
    })
}

/// Connected random network: a random spanning tree plus extra edges with
/// probability `p_extra`, all rates uniform in `[0.1, 10]`. With
/// `parallel > 0`, that many extra channels duplicate existing pairs through
/// a second reservoir.
pub fn random_network(
    rng: &mut impl Rng,
    n: usize,
    p_extra: f64,
    parallel: usize,
    mode: GraphMode,
) -> TransitionNetwork {
    let mut pairs = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p_extra {
                pairs.insert((u, v));
            }
        }
    }
    let mut rate = || rng.random_range(0.1..10.0);
    let mut channels: Vec<TransitionChannel> = pairs
        .iter()
        .map(|&(a, b)| channel(a, b, 0, rate(), rate()))
        .collect();
    let list: Vec<(usize, usize)> = pairs.into_iter().collect();
    for k in 0..parallel.min(list.len()) {
        let (a, b) = list[(k * 7) % list.len()];
        if channels.iter().any(|c| c.from == a && c.to == b && c.reservoir == 1) {
            continue;
        }
        channels.push(channel(a, b, 1, rate(), rate()));
    }
    network(n, channels, mode)
}

pub fn channel(from: usize, to: usize, reservoir: usize, fw: f64, bw: f64) -> TransitionChannel {
    TransitionChannel {
        from,
        to,
        reservoir,
        rate_forward: fw,
        rate_backward: bw,
        transported: Transported::new(1.0, 0.0, 0.0),
    }
}

pub fn network(n: usize, channels: Vec<TransitionChannel>, mode: GraphMode) -> TransitionNetwork {
    let states = (0..n)
        .map(|id| StateNode {
            id,
            label: format!("s{id}"),
            energy: 0.0,
            quantum_numbers: BTreeMap::new(),
        })
        .collect();
    let reservoirs = (0..2)
        .map(|id| ReservoirSpec {
            id,
            statistics: Statistics::Boson,
            temperature: 1.0,
            chemical_potential: 0.0,
            coupling: 1.0,
        })
        .collect();
    TransitionNetwork::new(states, reservoirs, channels, mode).unwrap()
}

/// Symmetric ring `0 → 1 → … → n−1 → 0` with all rates 1.
pub fn symmetric_ring(n: usize) -> TransitionNetwork {
    let channels = (0..n).map(|i| channel(i, (i + 1) % n, 0, 1.0, 1.0)).collect();
    network(n, channels, GraphMode::Collapsed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
