//! Parameter sweeps over the device models and the transistor figures of
//! merit derived from them: amplification factor, negative differential
//! thermal conductance and switch threshold.

use rayon::prelude::*;

use crate::cycles::{enumerate_cycles, CanonicalCycle};
use crate::error::{NetworkError, Result};
use crate::flux::{FluxAnalysis, RankKey};
use crate::models::{
    build_pump, build_transistor, PumpParams, TransistorParams, TRANSISTOR_LEFT,
    TRANSISTOR_MIDDLE, TRANSISTOR_RIGHT,
};
use crate::network::{GraphMode, Quantity, TransitionNetwork};
use crate::steady_state::{
    available_quantities, reservoir_currents, solve_steady_state, stationarity_residual,
    CurrentReport,
};

/// A network source whose parameters can be varied by name.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Pump(PumpParams),
    Transistor(TransistorParams),
    /// A fixed network; it has no named parameters.
    Network(TransitionNetwork),
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Pump(_) => "pump",
            ModelConfig::Transistor(_) => "transistor",
            ModelConfig::Network(_) => "network",
        }
    }

    pub fn build(&self, mode: GraphMode) -> Result<TransitionNetwork> {
        match self {
            ModelConfig::Pump(p) => build_pump(p, mode),
            ModelConfig::Transistor(p) => build_transistor(p, mode),
            ModelConfig::Network(n) => n.with_mode(mode),
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelConfig::Pump(_) => PumpParams::NAMES,
            ModelConfig::Transistor(_) => TransistorParams::NAMES,
            ModelConfig::Network(_) => &[],
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        match self {
            ModelConfig::Pump(p) => p.get(name),
            ModelConfig::Transistor(p) => p.get(name),
            ModelConfig::Network(_) => Err(no_params(name)),
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self {
            ModelConfig::Pump(p) => p.set(name, value),
            ModelConfig::Transistor(p) => p.set(name, value),
            ModelConfig::Network(_) => Err(no_params(name)),
        }
    }

    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut m = self.clone();
        m.set(name, value)?;
        Ok(m)
    }
}

fn no_params(name: &str) -> NetworkError {
    NetworkError::InvalidParameter(format!(
        "a network loaded from file has no parameter `{name}`"
    ))
}

fn at_point(param: &str, value: f64) -> impl Fn(NetworkError) -> NetworkError + '_ {
    move |e| NetworkError::AtSweepPoint {
        param: param.to_string(),
        value,
        source: Box::new(e),
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: ModelConfig,
    pub mode: GraphMode,
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Cycles ranked in the top `top_k` at any grid point are tracked.
    pub top_k: usize,
    pub rank_key: RankKey,
}

impl SweepSpec {
    pub fn new(model: ModelConfig, param: &str, start: f64, stop: f64, count: usize) -> Self {
        SweepSpec {
            model,
            mode: GraphMode::Collapsed,
            param: param.to_string(),
            start,
            stop,
            count,
            top_k: 5,
            rank_key: RankKey::Traffic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(NetworkError::InvalidParameter(format!(
                "a sweep needs at least 2 points, got {}",
                self.count
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(NetworkError::InvalidParameter(
                "sweep bounds must be finite".into(),
            ));
        }
        self.model.get(&self.param).map(|_| ())
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub currents: CurrentReport,
    pub probabilities: Vec<f64>,
    pub stationarity_residual: f64,
    /// Largest relative mismatch between cycle-flux sums and edge fluxes.
    pub decomposition_residual: f64,
    /// Aligned with [`SweepResult::cycles`].
    pub j_forward: Vec<f64>,
    pub j_backward: Vec<f64>,
    /// Indices of this point's top-k cycles, in rank order.
    pub top: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: String,
    pub state_labels: Vec<String>,
    pub reservoirs: Vec<usize>,
    pub quantities: Vec<Quantity>,
    pub cycles: Vec<CanonicalCycle>,
    pub cycle_labels: Vec<String>,
    /// Union of every point's top-k, as indices into `cycles` in canonical order.
    pub tracked: Vec<usize>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// One current across the sweep (NaN where the quantity is not available).
    pub fn current(&self, reservoir: usize, quantity: Quantity) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.currents.get(reservoir, quantity).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn j_net(&self, cycle: usize) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.j_forward[cycle] - p.j_backward[cycle])
            .collect()
    }

    pub fn cycle_index(&self, cycle: &CanonicalCycle) -> Option<usize> {
        self.cycles.binary_search(cycle).ok()
    }

    pub fn max_decomposition_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.decomposition_residual)
            .fold(0.0, f64::max)
    }
}

fn edge_pairs(net: &TransitionNetwork) -> Vec<(usize, usize, usize)> {
    net.edges()
        .iter()
        .map(|e| (e.a, e.b, e.channels.len()))
        .collect()
}

/// Evaluate every grid point (concurrently; output keeps grid order). The
/// cycle list is enumerated once and reused, which requires every point to
/// share the same topology.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let grid = spec.grid();
    let build = |x: f64| -> Result<TransitionNetwork> {
        spec.model
            .with(&spec.param, x)
            .and_then(|m| m.build(spec.mode))
            .map_err(at_point(&spec.param, x))
    };
    let first = build(grid[0])?;
    let cycles = enumerate_cycles(&first)?;
    let topology = edge_pairs(&first);
    let quantities = available_quantities(&first);

    let points = grid
        .par_iter()
        .map(|&x| {
            let net = build(x)?;
            if edge_pairs(&net) != topology {
                return Err(at_point(&spec.param, x)(NetworkError::InvalidParameter(
                    "network topology changed along the sweep".into(),
                )));
            }
            evaluate_point(&net, x, &cycles, &quantities, spec).map_err(at_point(&spec.param, x))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tracked: Vec<usize> = points.iter().flat_map(|p| p.top.iter().copied()).collect();
    tracked.sort_unstable();
    tracked.dedup();
    Ok(SweepResult {
        param: spec.param.clone(),
        state_labels: first.states().iter().map(|s| s.label.clone()).collect(),
        reservoirs: first.reservoirs().iter().map(|r| r.id).collect(),
        quantities,
        cycle_labels: cycles.iter().map(|c| c.label(&first)).collect(),
        cycles,
        tracked,
        points,
    })
}

fn evaluate_point(
    net: &TransitionNetwork,
    value: f64,
    cycles: &[CanonicalCycle],
    quantities: &[Quantity],
    spec: &SweepSpec,
) -> Result<SweepPoint> {
    let p = solve_steady_state(net)?;
    let currents = reservoir_currents(net, &p, quantities)?;
    let analysis = FluxAnalysis::with_cycles(net, cycles)?;
    let mut top = analysis.ranked_indices(spec.rank_key);
    top.truncate(spec.top_k);
    Ok(SweepPoint {
        value,
        stationarity_residual: stationarity_residual(net, &p),
        decomposition_residual: analysis.max_decomposition_residual(&p),
        probabilities: p.as_slice().to_vec(),
        currents,
        j_forward: analysis.records().iter().map(|r| r.j_forward).collect(),
        j_backward: analysis.records().iter().map(|r| r.j_backward).collect(),
        top,
    })
}

/// Steady-state energy currents `[J_L, J_M, J_R]` into the transistor.
pub fn transistor_currents(p: &TransistorParams) -> Result<[f64; 3]> {
    let net = build_transistor(p, GraphMode::Collapsed)?;
    let prob = solve_steady_state(&net)?;
    let report = reservoir_currents(&net, &prob, &[Quantity::Energy])?;
    let get = |id| report.get(id, Quantity::Energy).unwrap_or(0.0);
    Ok([
        get(TRANSISTOR_LEFT),
        get(TRANSISTOR_MIDDLE),
        get(TRANSISTOR_RIGHT),
    ])
}

/// Transistor currents along a grid of one parameter, evaluated concurrently.
pub fn transistor_scan(base: &TransistorParams, param: &str, grid: &[f64]) -> Result<Vec<[f64; 3]>> {
    grid.par_iter()
        .map(|&x| {
            let mut p = base.clone();
            p.set(param, x)?;
            transistor_currents(&p).map_err(at_point(param, x))
        })
        .collect()
}

/// Differences smaller than this are treated as zero current change.
pub const CURRENT_ZERO_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationResult {
    /// Interior grid points where `alpha` is evaluated.
    pub points: Vec<f64>,
    /// `|ΔJ_L / ΔJ_M|` from centered differences; NaN where undefined.
    pub alpha: Vec<f64>,
    /// `ΔJ_M` changes sign across the point.
    pub divergence: Vec<bool>,
    /// Both differences vanish (e.g. at equilibrium), so `alpha` is NaN.
    pub undefined: Vec<bool>,
}

impl AmplificationResult {
    /// Maximal runs of consecutive points with `alpha > threshold`, as
    /// `(first, last)` point values.
    pub fn windows_above(&self, threshold: f64) -> Vec<(f64, f64)> {
        runs(&self.points, |i| self.alpha[i] > threshold)
    }

    pub fn divergence_points(&self) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.divergence)
            .filter(|(_, &d)| d)
            .map(|(&t, _)| t)
            .collect()
    }
}

fn runs(points: &[f64], pred: impl Fn(usize) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..points.len() {
        match (pred(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((points[s], points[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((points[s], points[points.len() - 1]));
    }
    out
}

fn check_columns(grid: &[f64], cols: &[&[f64]]) -> Result<()> {
    if cols.iter().any(|c| c.len() != grid.len()) {
        return Err(NetworkError::InvalidParameter(
            "current columns must match the grid length".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NetworkError::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Amplification factor `α_L = |∂J_L/∂J_M|` by centered differences.
pub fn amplification_factor(grid: &[f64], j_l: &[f64], j_m: &[f64]) -> Result<AmplificationResult> {
    check_columns(grid, &[j_l, j_m])?;
    let n = grid.len();
    let mut out = AmplificationResult {
        points: Vec::new(),
        alpha: Vec::new(),
        divergence: Vec::new(),
        undefined: Vec::new(),
    };
    for i in 1..n.saturating_sub(1) {
        let dl = j_l[i + 1] - j_l[i - 1];
        let dm = j_m[i + 1] - j_m[i - 1];
        let undefined = dl.abs() <= CURRENT_ZERO_TOL && dm.abs() <= CURRENT_ZERO_TOL;
        out.points.push(grid[i]);
        out.alpha.push(if undefined { f64::NAN } else { (dl / dm).abs() });
        out.undefined.push(undefined);
        let left = j_m[i] - j_m[i - 1];
        let right = j_m[i + 1] - j_m[i];
        out.divergence.push(!undefined && left * right < 0.0);
    }
    Ok(out)
}

/// Maximal intervals where `−J_M` grows with the swept temperature.
pub fn detect_ndtc(grid: &[f64], j_m: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_columns(grid, &[j_m])?;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..grid.len().saturating_sub(1) {
        let rising = -(j_m[i + 1] - j_m[i]) > CURRENT_ZERO_TOL;
        match (rising, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((grid[s], grid[i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], grid[grid.len() - 1]));
    }
    Ok(out)
}

/// Located extremum of `J_M(T_M)` and the amplification factor on a grid
/// refined around it.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedDivergence {
    pub t_star: f64,
    /// `(spacing, α)` for each refinement level.
    pub levels: Vec<(f64, f64)>,
    pub alpha_max: f64,
}

/// Refine around an extremum of `J_M` bracketed by `[lo, hi]`: golden-section
/// search for `T_M*`, then centered differences of shrinking spacing `h`
/// evaluated at `T_M* + h/2`.
pub fn refine_divergence(base: &TransistorParams, lo: f64, hi: f64) -> Result<RefinedDivergence> {
    let j = |t: f64| -> Result<[f64; 3]> {
        let mut p = base.clone();
        p.T_M = t;
        transistor_currents(&p)
    };
    let jm = |t: f64| j(t).map(|c| c[1]);
    let (m_lo, m_mid, m_hi) = (jm(lo)?, jm(0.5 * (lo + hi))?, jm(hi)?);
    let sign = if m_mid >= m_lo.max(m_hi) { -1.0 } else { 1.0 };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (sign * jm(c)?, sign * jm(d)?);
    while b - a > 1e-9 * hi.abs().max(1e-12) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = sign * jm(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = sign * jm(d)?;
        }
    }
    let t_star = 0.5 * (a + b);
    let mut levels = Vec::new();
    let mut h = 0.25 * (hi - lo);
    let floor = 1e-6 * t_star;
    while h > floor && levels.len() < 40 {
        let x = t_star + 0.5 * h;
        let (up, down) = (j(x + h)?, j(x - h)?);
        let alpha = ((up[0] - down[0]) / (up[1] - down[1])).abs();
        levels.push((h, alpha));
        if alpha > 1e6 {
            break;
        }
        h *= 0.5;
    }
    let alpha_max = levels.iter().map(|l| l.1).fold(0.0, f64::max);
    Ok(RefinedDivergence {
        t_star,
        levels,
        alpha_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub halvings: usize,
    /// Largest relative change of `α` between the last two grids, away from
    /// divergences.
    pub max_relative_change: f64,
    pub converged: bool,
}

/// Amplification over `T_M ∈ [start, stop]`, halving the grid spacing until
/// `α` changes by less than `tol` (relative) at the coarse points.
pub fn amplification_converged(
    base: &TransistorParams,
    start: f64,
    stop: f64,
    count: usize,
    tol: f64,
    max_halvings: usize,
) -> Result<(AmplificationResult, ConvergenceReport)> {
    let eval = |n: usize| -> Result<AmplificationResult> {
        let grid = linspace(start, stop, n);
        let currents = transistor_scan(base, "T_M", &grid)?;
        let jl: Vec<f64> = currents.iter().map(|c| c[0]).collect();
        let jm: Vec<f64> = currents.iter().map(|c| c[1]).collect();
        amplification_factor(&grid, &jl, &jm)
    };
    let mut n = count.max(3);
    let mut coarse = eval(n)?;
    let mut report = ConvergenceReport {
        halvings: 0,
        max_relative_change: f64::INFINITY,
        converged: false,
    };
    for h in 1..=max_halvings {
        let fine_n = 2 * n - 1;
        let fine = eval(fine_n)?;
        // coarse interior point k sits at fine interior index 2k + 1
        let near_divergence = |k: usize| {
            (k.saturating_sub(1)..=(k + 1).min(coarse.points.len() - 1))
                .any(|i| coarse.divergence[i])
        };
        let change = (0..coarse.points.len())
            .filter(|&k| !near_divergence(k) && !coarse.undefined[k])
            .map(|k| {
                let (a, b) = (coarse.alpha[k], fine.alpha[2 * k + 1]);
                (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max);
        report = ConvergenceReport {
            halvings: h,
            max_relative_change: change,
            converged: change < tol,
        };
        coarse = fine;
        n = fine_n;
        if report.converged {
            break;
        }
    }
    Ok((coarse, report))
}

/// First grid value (linearly interpolated) where `j` reaches `target`.
fn first_crossing(grid: &[f64], j: &[f64], target: f64) -> Option<f64> {
    let i = j.iter().position(|&x| x >= target)?;
    if i == 0 {
        return Some(grid[0]);
    }
    let (x0, x1, y0, y1) = (grid[i - 1], grid[i], j[i - 1], j[i]);
    Some(x0 + (target - y0) / (y1 - y0) * (x1 - x0))
}

/// Where `J_L` first reaches half its plateau (the maximum over the grid).
pub fn half_plateau_threshold(grid: &[f64], j_l: &[f64]) -> Option<f64> {
    let plateau = j_l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(plateau > 0.0) {
        return None;
    }
    first_crossing(grid, j_l, 0.5 * plateau)
}

/// Where `J_L` first exceeds `factor` times its value at the first grid point.
pub fn rise_onset(grid: &[f64], j_l: &[f64], factor: f64) -> Option<f64> {
    let off = *j_l.first()?;
    if !(off > 0.0) {
        return None;
    }
    first_crossing(grid, j_l, factor * off)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub w_m: f64,
    pub off_level: f64,
    pub plateau: f64,
    pub threshold: Option<f64>,
    /// Where `J_L` doubles its off level.
    pub onset: Option<f64>,
}

/// Half-plateau switch threshold of `J_L(T_M)` for each `ω_M`.
pub fn switch_threshold(
    base: &TransistorParams,
    w_m_values: &[f64],
    t_grid: &[f64],
) -> Result<Vec<ThresholdRow>> {
    w_m_values
        .iter()
        .map(|&w| {
            let mut p = base.clone();
            p.w_M = w;
            let currents = transistor_scan(&p, "T_M", t_grid)?;
            let jl: Vec<f64> = currents.iter().map(|c| c[0]).collect();
            Ok(ThresholdRow {
                w_m: w,
                off_level: jl[0],
                plateau: jl.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                threshold: half_plateau_threshold(t_grid, &jl),
                onset: rise_onset(t_grid, &jl, 2.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(0.1, 0.7, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 0.7);
        assert!((g[3] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn linear_currents_give_constant_alpha() {
        let g = linspace(0.0, 1.0, 11);
        let jm: Vec<f64> = g.iter().map(|x| x * 1e-3).collect();
        let jl: Vec<f64> = g.iter().map(|x| 2e-3 * x).collect();
        let a = amplification_factor(&g, &jl, &jm).unwrap();
        assert_eq!(a.points.len(), 9);
        for &x in &a.alpha {
            assert!((x - 2.0).abs() < 1e-9);
        }
        assert!(a.divergence.iter().all(|d| !d));
        assert_eq!(a.windows_above(1.5), vec![(g[1], g[9])]);
    }

    #[test]
    fn flat_currents_are_undefined() {
        let g = linspace(0.0, 1.0, 5);
        let z = vec![0.0; 5];
        let a = amplification_factor(&g, &z, &z).unwrap();
        assert!(a.alpha.iter().all(|x| x.is_nan()));
        assert!(a.undefined.iter().all(|&u| u));
        assert!(a.divergence.iter().all(|d| !d));
    }

    #[test]
    fn divergence_marks_extremum() {
        let g = linspace(-1.0, 1.0, 21);
        let jm: Vec<f64> = g.iter().map(|x| 1e-3 * (x - 0.03) * (x - 0.03)).collect();
        let jl: Vec<f64> = g.iter().map(|x| 1e-3 * x).collect();
        let a = amplification_factor(&g, &jl, &jm).unwrap();
        let marked = a.divergence_points();
        assert_eq!(marked.len(), 1);
        assert!(marked[0].abs() < 1e-12);
    }

    #[test]
    fn ndtc_intervals() {
        let g = linspace(0.0, 1.0, 6);
        assert!(detect_ndtc(&g, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap().is_empty());
        let jm = [0.0, -1.0, -2.0, -1.5, -1.0, -3.0];
        assert_eq!(detect_ndtc(&g, &jm).unwrap(), vec![(g[0], g[2]), (g[4], g[5])]);
        assert!(detect_ndtc(&g, &jm[..3]).is_err());
    }

    #[test]
    fn thresholds_interpolate() {
        let g = [0.0, 1.0, 2.0, 3.0];
        let j = [0.1, 0.2, 1.0, 1.2];
        assert_eq!(half_plateau_threshold(&g, &j), Some(1.5));
        assert_eq!(rise_onset(&g, &j, 2.0), Some(1.0));
        assert_eq!(half_plateau_threshold(&g, &[0.0; 4]), None);
    }

    #[test]
    fn sweep_spec_validation() {
        let m = ModelConfig::Pump(PumpParams::default());
        assert!(SweepSpec::new(m.clone(), "dT", 0.0, 1.0, 1).validate().is_err());
        assert!(SweepSpec::new(m.clone(), "bogus", 0.0, 1.0, 3).validate().is_err());
        assert!(SweepSpec::new(m, "eps_U", 0.0, 1.0, 3).validate().is_ok());
    }

    #[test]
    fn construction_errors_name_the_grid_point() {
        let spec = SweepSpec::new(ModelConfig::Pump(PumpParams::default()), "T3", 1.0, -1.0, 3);
        match run_sweep(&spec).unwrap_err() {
            NetworkError::AtSweepPoint { param, value, .. } => {
                assert_eq!(param, "T3");
                assert!(value <= 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
