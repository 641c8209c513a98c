mod common;

use common::symmetric_ring;
use cycleflux::models::PUMP_SPIN_CYCLE;
use cycleflux::stochastic::compare_with_analytic;
use cycleflux::{
    build_pump, canonical_form, empirical_cycle_flux, simulate_cycle_counts, solve_steady_state,
    DirectedCycle, FluxAnalysis, GraphMode, PumpParams,
};

#[test]
fn ring_completion_rate_is_one_ninth() {
    let net = symmetric_ring(3);
    let report = simulate_cycle_counts(&net, 0, 2e5, 7).unwrap();
    let est = empirical_cycle_flux(&report).unwrap();
    assert_eq!(est.len(), 1);
    let e = &est[0];
    for f in [e.forward, e.backward] {
        assert!((f.rate - 1.0 / 9.0).abs() < 3.0 * f.std_error, "{f:?}");
    }
    assert!(e.net().abs() < 3.0 * e.net_std_error());
}

fn pump_net(dt: f64) -> cycleflux::TransitionNetwork {
    let mut p = PumpParams::default();
    p.set("dT", dt).unwrap();
    build_pump(&p, GraphMode::Collapsed).unwrap().normalized().unwrap().0
}

#[test]
fn pump_occupancy_matches_steady_state() {
    let net = pump_net(0.2);
    let p = solve_steady_state(&net).unwrap();
    let report = simulate_cycle_counts(&net, 0, 2e5, 21).unwrap();
    for i in 0..net.n_states() {
        // loose bound: correlation times are O(1) in normalized units
        assert!((report.occupancy[i] - p[i]).abs() < 0.01, "state {i}");
    }
}

#[test]
fn equilibrium_pump_has_no_net_circulation() {
    let net = pump_net(0.0);
    let report = simulate_cycle_counts(&net, 0, 3e5, 5).unwrap();
    for e in empirical_cycle_flux(&report).unwrap() {
        if e.forward.count + e.backward.count > 0 {
            assert!(e.net().abs() <= 3.5 * e.net_std_error().max(1.0 / report.total_time));
        }
    }
}

#[test]
fn biased_pump_spin_cycle_turns_the_right_way() {
    let net = pump_net(0.2);
    let analysis = FluxAnalysis::new(&net).unwrap();
    let (canon, _) = canonical_form(&DirectedCycle::from_labels(&net, &PUMP_SPIN_CYCLE).unwrap());
    let analytic = analysis.find(&canon).unwrap();
    let report = simulate_cycle_counts(&net, 0, 2e6, 99).unwrap();
    let counts = report.counts_for(&canon);
    let empirical = counts.forward as f64 - counts.backward as f64;
    assert_eq!(empirical.signum(), analytic.j_net.signum());
    let cmp = compare_with_analytic(&report, analysis.records());
    assert_eq!(cmp.len(), 28);
}
