//! Steady states, cycle enumeration and cycle-flux ranking for Markovian
//! transition networks of open quantum devices.
//!
//! A [`TransitionNetwork`] holds states, reservoirs and reservoir-resolved
//! channels. From it the crate computes the stationary distribution,
//! reservoir currents, every simple cycle, and each cycle's forward and
//! backward flux `J(C±) = Π(C±) det(L[C;C]) / Σ_i det(L[i;i])`. A Gillespie
//! sampler with loop-erasure counting checks those fluxes independently.
//!
//! ```
//! use cycleflux::{build_pump, FluxAnalysis, GraphMode, PumpParams, RankKey};
//!
//! let net = build_pump(&PumpParams::default(), GraphMode::Collapsed).unwrap();
//! let analysis = FluxAnalysis::new(&net).unwrap();
//! assert_eq!(analysis.records().len(), 14);
//! let top = analysis.top(3, RankKey::Traffic);
//! assert!(top[0].traffic() >= top[1].traffic());
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cycles;
pub mod error;
pub mod flux;
pub mod linalg;
pub mod models;
pub mod network;
pub mod report;
pub mod steady_state;
pub mod stochastic;
pub mod sweep;

pub use cycles::{
    canonical_form, enumerate_cycles, enumerate_cycles_with_budget, CanonicalCycle,
    DirectedCycle, Orientation,
};
pub use error::{NetworkError, Result};
pub use flux::{
    cycle_flux_pair, cycle_weight, decompose_edge_flux, entropy_production, rank_cycles,
    rooted_minor, CycleFluxRecord, CycleTransport, EdgeDecomposition, FluxAnalysis, RankKey,
};
pub use models::{
    bose_occupation, build_pump, build_transistor, fermi_occupation, PumpParams,
    TransistorParams,
};
pub use network::{
    build_laplacian, validate_detailed_balance, Edge, GraphMode, Laplacian, ModelSpec, Quantity,
    ReservoirSpec, StateNode, StateSpec, Statistics, TransitionChannel, TransitionNetwork,
    Transported,
};
pub use steady_state::{
    edge_fluxes, reservoir_currents, solve_steady_state, tree_theorem_distribution,
    CurrentReport, ProbabilityVector,
};
pub use stochastic::{
    count_cycle_completions, empirical_cycle_flux, simulate, simulate_cycle_counts,
    CycleCountReport, Trajectory,
};
pub use sweep::{
    amplification_factor, detect_ndtc, run_sweep, switch_threshold, ModelConfig, SweepResult,
    SweepSpec,
};
