mod common;

use common::{brute_force_cycles, rel_err};
use cycleflux::models::{
    PUMP_LABELS, PUMP_LOWER, PUMP_MAGNON, PUMP_SPIN_CYCLE, PUMP_UPPER_LEFT, PUMP_UPPER_RIGHT,
    TRANSISTOR_LEFT, TRANSISTOR_MIDDLE, TRANSISTOR_RIGHT,
};
use cycleflux::steady_state::nullspace_distribution;
use cycleflux::{
    build_pump, build_transistor, canonical_form, cycle_weight, decompose_edge_flux,
    reservoir_currents, solve_steady_state, tree_theorem_distribution, DirectedCycle,
    FluxAnalysis, GraphMode, ModelSpec, PumpParams, Quantity, RankKey, TransistorParams,
    TransitionNetwork,
};

fn pump(dt: f64) -> TransitionNetwork {
    let mut p = PumpParams::default();
    p.set("dT", dt).unwrap();
    build_pump(&p, GraphMode::Collapsed).unwrap()
}

fn transistor(t_m: f64) -> TransitionNetwork {
    let p = TransistorParams {
        T_M: t_m,
        ..Default::default()
    };
    build_transistor(&p, GraphMode::Collapsed).unwrap()
}

#[test]
fn pump_census_and_labels() {
    let net = pump(0.2);
    let cycles = cycleflux::enumerate_cycles(&net).unwrap();
    assert_eq!(cycles.len(), 14);
    let labels: Vec<&str> = net.states().iter().map(|s| s.label.as_str()).collect();
    assert_eq!(labels, PUMP_LABELS);
    let multi = build_pump(&PumpParams::default(), GraphMode::Multigraph).unwrap();
    let m = cycleflux::enumerate_cycles(&multi).unwrap();
    // each of the three upper-dot pairs adds a 2-cycle through reservoirs 1 and 2
    assert_eq!(m.iter().filter(|c| c.len() == 2).count(), 3);
    assert_eq!(m.len(), brute_force_cycles(&multi).len());
}

#[test]
fn transistor_census_matches_exhaustive_search() {
    let net = transistor(0.5);
    let fast = cycleflux::enumerate_cycles(&net).unwrap();
    let slow: Vec<_> = brute_force_cycles(&net).into_iter().collect();
    assert_eq!(fast.len(), slow.len());
    assert_eq!(fast, slow);
}

#[test]
fn spin_cycle_carries_one_spin() {
    let net = pump(0.2);
    let c = DirectedCycle::from_labels(&net, &PUMP_SPIN_CYCLE).unwrap();
    assert_eq!(
        net.format_cycle(c.vertices()),
        "|00⟩→|10⟩→|1↑⟩→|0↑⟩→|0↓⟩→|00⟩"
    );
    let (canon, o) = canonical_form(&c);
    let a = FluxAnalysis::new(&net).unwrap();
    let r = a.find(&canon).unwrap();
    let t = if o == cycleflux::Orientation::Forward {
        &r.transport
    } else {
        &r.transport_backward
    };
    let spin = |id| t.iter().find(|x| x.reservoir == id).unwrap().spin;
    assert_eq!(spin(PUMP_LOWER), 1.0);
    assert_eq!(spin(PUMP_MAGNON), -1.0);
    assert_eq!(spin(PUMP_UPPER_LEFT) + spin(PUMP_UPPER_RIGHT), 0.0);
    // weight recomputed directly from the rate matrix
    let k = net.rate_matrix();
    let v = c.vertices();
    let direct: f64 = (0..v.len()).map(|i| k[v[i]][v[(i + 1) % v.len()]]).product();
    assert!(rel_err(direct, cycle_weight(&net, &c)) < 1e-15);
}

#[test]
fn pump_spin_is_conserved() {
    for dt in [-0.3, 0.0, 0.25] {
        let net = pump(dt);
        let p = solve_steady_state(&net).unwrap();
        let c = reservoir_currents(&net, &p, &Quantity::ALL).unwrap();
        let spin = |id| c.get(id, Quantity::Spin).unwrap();
        assert_eq!(spin(PUMP_UPPER_LEFT), 0.0);
        assert_eq!(spin(PUMP_UPPER_RIGHT), 0.0);
        // absolute floor well below the O(1e-3) currents at nonzero bias
        let tol = |q| 1e-10 * c.scale(q) + 1e-16;
        assert!((spin(PUMP_LOWER) + spin(PUMP_MAGNON)).abs() < tol(Quantity::Spin));
        assert!(c.total(Quantity::Energy).abs() < tol(Quantity::Energy));
        assert!(c.total(Quantity::Particle).abs() < tol(Quantity::Particle));
    }
}

#[test]
fn pump_ranking_structure() {
    let net = pump(0.2);
    let a = FluxAnalysis::new(&net).unwrap();
    let top = a.top(14, RankKey::Traffic);
    // the lower-dot triangle with the upper dot empty is futile
    assert_eq!(top[0].cycle.label(&net), "|00⟩→|0↑⟩→|0↓⟩→|00⟩");
    assert!(top[0].j_net.abs() <= 1e-12 * top[0].traffic());
    let spin = DirectedCycle::from_labels(&net, &PUMP_SPIN_CYCLE).unwrap();
    let (canon, _) = canonical_form(&spin);
    let rank = top.iter().position(|r| r.cycle == canon).unwrap();
    assert!(rank < 4, "spin cycle ranked {rank}");
    // among cycles exchanging spin with reservoir 3 it carries the largest net flux
    let spin_of = |r: &cycleflux::CycleFluxRecord| r.transport_for(PUMP_LOWER).unwrap().spin;
    let best = top
        .iter()
        .filter(|r| spin_of(r) != 0.0)
        .max_by(|x, y| (x.j_net * spin_of(x)).abs().total_cmp(&(y.j_net * spin_of(y)).abs()))
        .unwrap();
    assert_eq!(best.cycle, canon);
}

#[test]
fn transistor_top_cycle_cancels_middle_energy() {
    let net = transistor(0.5);
    let a = FluxAnalysis::new(&net).unwrap();
    let top = a.top(1, RankKey::Traffic)[0];
    assert_eq!(top.transport_for(TRANSISTOR_MIDDLE).unwrap().energy, 0.0);
    assert_eq!(top.cycle.len(), 10);
    let e = |l: &str| net.state(net.state_by_label(l).unwrap()).energy;
    let gap = (e("|−↓+⟩") - e("|−↑+⟩")) + (e("|+↑−⟩") - e("|+↓−⟩"));
    assert_eq!(gap, 0.0);
}

#[test]
fn transistor_mirror_symmetry() {
    let p = TransistorParams {
        T_L: 0.4,
        T_M: 0.7,
        T_R: 1.9,
        w_LM: 8.0,
        ..Default::default()
    };
    let currents = |p: &TransistorParams| {
        let net = build_transistor(p, GraphMode::Collapsed).unwrap();
        let prob = solve_steady_state(&net).unwrap();
        reservoir_currents(&net, &prob, &[Quantity::Energy]).unwrap()
    };
    let a = currents(&p);
    let b = currents(&p.mirrored());
    let e = |r: &cycleflux::CurrentReport, id| r.get(id, Quantity::Energy).unwrap();
    assert!(rel_err(e(&a, TRANSISTOR_LEFT), e(&b, TRANSISTOR_RIGHT)) < 1e-10);
    assert!(rel_err(e(&a, TRANSISTOR_RIGHT), e(&b, TRANSISTOR_LEFT)) < 1e-10);
    assert!(rel_err(e(&a, TRANSISTOR_MIDDLE), e(&b, TRANSISTOR_MIDDLE)) < 1e-10);
}

#[test]
fn three_stationary_routes_agree() {
    for net in [pump(0.2), transistor(0.5), transistor(0.1)] {
        let gth = solve_steady_state(&net).unwrap();
        let (tree, _) = tree_theorem_distribution(&net).unwrap();
        let lu = nullspace_distribution(&net).unwrap();
        for i in 0..net.n_states() {
            assert!(rel_err(gth[i], tree[i]) < 1e-12);
            assert!(rel_err(lu[i], tree[i]) < 1e-6, "state {i}: {} vs {}", lu[i], tree[i]);
        }
    }
}

#[test]
fn spin_flip_edge_decomposes() {
    let net = pump(0.2);
    let e = net.edges_between(1, 2)[0];
    let d = decompose_edge_flux(&net, e).unwrap();
    assert!(d.residual <= 1e-10 * d.steady_flux.abs());
    assert!(!d.contributions.is_empty());
}

#[test]
fn built_networks_round_trip_through_json() {
    for net in [pump(0.2), transistor(0.3)] {
        let json = net.to_spec().to_json();
        let back = TransitionNetwork::from_spec(&ModelSpec::from_json(&json).unwrap()).unwrap();
        assert_eq!(back, net);
    }
}
