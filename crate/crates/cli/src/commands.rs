use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use cycleflux::report::{currents_csv, cycle_count_csv, num, ranked_csv, sweep_csv};
use cycleflux::steady_state::available_quantities;
use cycleflux::sweep::{amplification_converged, linspace, transistor_scan, AmplificationResult};
use cycleflux::{
    amplification_factor, detect_ndtc, reservoir_currents, run_sweep, simulate_cycle_counts,
    solve_steady_state, switch_threshold, FluxAnalysis, GraphMode, ModelConfig, RankKey,
    SweepSpec, TransistorParams, TransitionNetwork,
};

use crate::config::{parse_assignment, Config};
use crate::GlobalOpts;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Parameter to vary (e.g. dT, eps_U, T_M).
    #[arg(long)]
    param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// Also write the currents in long format (one row per reservoir and quantity).
    #[arg(long)]
    currents: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulated time.
    #[arg(long)]
    time: Option<f64>,
    /// Initial state, by label or index.
    #[arg(long)]
    initial: Option<String>,
    /// Keep the physical rate scale instead of rescaling the fastest rate to 1.
    #[arg(long)]
    raw_rates: bool,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// ω_M values, comma separated.
    #[arg(long, value_delimiter = ',')]
    w_m: Option<Vec<f64>>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_stop: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AmplifyArgs {
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_stop: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
    /// Halve the grid until α_L changes by less than 5%.
    #[arg(long)]
    converge: bool,
    /// Recompute from a saved sweep CSV instead of solving the model.
    #[arg(long)]
    from_csv: Option<PathBuf>,
    #[arg(long, default_value = "sweep_value")]
    x_column: String,
    #[arg(long, default_value = "J1_energy")]
    jl_column: String,
    #[arg(long, default_value = "J2_energy")]
    jm_column: String,
}

pub struct Context {
    config: Config,
    model: ModelConfig,
    mode: GraphMode,
    top_k: usize,
    rank_key: RankKey,
    seed: u64,
    output: Option<PathBuf>,
}

impl Context {
    pub fn new(opts: &GlobalOpts) -> Result<Self> {
        let config = match &opts.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let mut model = config.model(opts.model.as_deref(), opts.network.as_deref())?;
        for s in &opts.set {
            let (name, value) = parse_assignment(s)?;
            model.set(&name, value)?;
        }
        let rank_key = match (opts.rank_key, &config.rank_key) {
            (Some(k), _) => k,
            (None, Some(s)) => s.parse()?,
            (None, None) => RankKey::default(),
        };
        Ok(Context {
            mode: opts.mode.or(config.mode).unwrap_or_default(),
            top_k: opts.top_k.or(config.top_k).unwrap_or(5),
            seed: opts.seed.or(config.seed).unwrap_or(1),
            output: opts.output.clone(),
            rank_key,
            model,
            config,
        })
    }

    fn network(&self) -> Result<TransitionNetwork> {
        Ok(self.model.build(self.mode)?)
    }

    fn top<'a>(&self, a: &'a FluxAnalysis) -> Vec<&'a cycleflux::CycleFluxRecord> {
        let k = if self.top_k == 0 { a.records().len() } else { self.top_k };
        a.top(k, self.rank_key)
    }

    fn emit(&self, text: &str) -> Result<()> {
        write_or_print(self.output.as_deref(), text)
    }

    fn transistor(&self) -> Result<&TransistorParams> {
        match &self.model {
            ModelConfig::Transistor(p) => Ok(p),
            other => bail!("this command needs the transistor model, got {}", other.name()),
        }
    }

    pub fn analyze(&self) -> Result<()> {
        let net = self.network()?;
        let p = solve_steady_state(&net)?;
        let currents = reservoir_currents(&net, &p, &available_quantities(&net))?;
        let a = FluxAnalysis::new(&net)?;
        println!(
            "model {} ({} mode): {} states, {} edges, {} cycles",
            self.model.name(),
            self.mode,
            net.n_states(),
            net.edges().len(),
            a.records().len()
        );
        println!("steady state:");
        for (s, x) in net.states().iter().zip(p.as_slice()) {
            println!("  {:<12} {}", s.label, num(*x));
        }
        println!("currents into the system:");
        for c in &currents.currents {
            println!("  reservoir {} {:<8} {}", c.reservoir, c.quantity, num(c.value));
        }
        println!("entropy production {}", num(a.entropy_production()));
        println!(
            "max edge decomposition residual (relative to traffic) {}",
            num(a.max_decomposition_residual(&p))
        );
        println!("top cycles by {}:", rank_key_name(self.rank_key));
        for (i, r) in self.top(&a).iter().enumerate() {
            println!(
                "  {:>3}. {}  J+ {}  J- {}  net {}",
                i + 1,
                r.cycle.label(&net),
                num(r.j_forward),
                num(r.j_backward),
                num(r.j_net)
            );
        }
        if let Some(path) = &self.output {
            write_or_print(Some(path), &currents_csv(&[(None, &currents)]))?;
        }
        Ok(())
    }

    pub fn rank(&self) -> Result<()> {
        let net = self.network()?;
        let a = FluxAnalysis::new(&net)?;
        self.emit(&ranked_csv(&net, &self.top(&a)))
    }

    pub fn sweep(&self, args: &SweepArgs) -> Result<()> {
        let s = &self.config.sweep;
        let param = args
            .param
            .clone()
            .or_else(|| s.param.clone())
            .context("no sweep parameter (use --param or [sweep] param)")?;
        let spec = SweepSpec {
            mode: self.mode,
            top_k: self.top_k,
            rank_key: self.rank_key,
            ..SweepSpec::new(
                self.model.clone(),
                &param,
                args.start.or(s.start).context("no sweep start")?,
                args.stop.or(s.stop).context("no sweep stop")?,
                args.count.or(s.count).unwrap_or(51),
            )
        };
        let result = run_sweep(&spec)?;
        eprintln!(
            "swept {} over {} points, tracking {} cycles; max decomposition residual {}",
            param,
            result.points.len(),
            result.tracked.len(),
            num(result.max_decomposition_residual())
        );
        if let Some(path) = &args.currents {
            let rows: Vec<_> = result
                .points
                .iter()
                .map(|p| (Some(p.value), &p.currents))
                .collect();
            write_or_print(Some(path), &currents_csv(&rows))?;
        }
        self.emit(&sweep_csv(&result))
    }

    pub fn simulate(&self, args: &SimulateArgs) -> Result<()> {
        let built = self.network()?;
        let raw = args.raw_rates || self.config.simulate.raw_rates.unwrap_or(false);
        let net = if raw { built } else { built.normalized()?.0 };
        let time = args.time.or(self.config.simulate.time).unwrap_or(1e6);
        let initial = match args.initial.as_ref().or(self.config.simulate.initial.as_ref()) {
            None => 0,
            Some(s) => match net.state_by_label(s) {
                Some(i) => i,
                None => s
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i < net.n_states())
                    .with_context(|| format!("unknown initial state `{s}`"))?,
            },
        };
        let report = simulate_cycle_counts(&net, initial, time, self.seed)?;
        let a = FluxAnalysis::new(&net)?;
        eprintln!(
            "simulated time {} (seed {}): {} cycle completions, {} excursions left open",
            num(report.total_time),
            report.seed,
            report.total_completions(),
            report.discarded_excursions
        );
        self.emit(&cycle_count_csv(&net, &report, Some(&a)))
    }

    pub fn threshold(&self, args: &ThresholdArgs) -> Result<()> {
        let base = self.transistor()?;
        let t = &self.config.threshold;
        let w = args
            .w_m
            .clone()
            .or_else(|| t.w_m.clone())
            .unwrap_or_else(|| vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        let grid = linspace(
            args.t_start.or(t.t_start).unwrap_or(0.01),
            args.t_stop.or(t.t_stop).unwrap_or(3.0),
            args.t_count.or(t.t_count).unwrap_or(300),
        );
        let rows = switch_threshold(base, &w, &grid)?;
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["w_m", "off_level", "plateau", "threshold", "threshold_over_w_m", "onset"])?;
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        for r in rows {
            out.write_record([
                r.w_m.to_string(),
                num(r.off_level),
                num(r.plateau),
                opt(r.threshold),
                opt(r.threshold.map(|x| x / r.w_m)),
                opt(r.onset),
            ])?;
        }
        self.emit(&String::from_utf8(out.into_inner()?)?)
    }

    pub fn amplify(&self, args: &AmplifyArgs) -> Result<()> {
        let (grid, jl, jm) = match &args.from_csv {
            Some(path) => read_columns(path, &[&args.x_column, &args.jl_column, &args.jm_column])
                .map(|mut c| {
                    let jm = c.pop().unwrap();
                    let jl = c.pop().unwrap();
                    (c.pop().unwrap(), jl, jm)
                })?,
            None => {
                let base = self.transistor()?;
                let a = &self.config.amplify;
                let (start, stop, count) = (
                    args.t_start.or(a.t_start).unwrap_or(0.02),
                    args.t_stop.or(a.t_stop).unwrap_or(3.0),
                    args.t_count.or(a.t_count).unwrap_or(150),
                );
                let count = if args.converge {
                    let (amp, report) = amplification_converged(base, start, stop, count, 0.05, 6)?;
                    eprintln!(
                        "grid halved {} times; α_L change {:.3}% (converged: {})",
                        report.halvings,
                        100.0 * report.max_relative_change,
                        report.converged
                    );
                    amp.points.len() + 2
                } else {
                    count
                };
                let grid = linspace(start, stop, count);
                let currents = transistor_scan(base, "T_M", &grid)?;
                let jl = currents.iter().map(|c| c[0]).collect();
                let jm = currents.iter().map(|c| c[1]).collect();
                (grid, jl, jm)
            }
        };
        let amp = amplification_factor(&grid, &jl, &jm)?;
        for (lo, hi) in detect_ndtc(&grid, &jm)? {
            eprintln!("NDTC interval [{lo}, {hi}]");
        }
        for t in amp.divergence_points() {
            eprintln!("α_L diverges near {t}");
        }
        self.emit(&amplification_csv(&amp))
    }

    pub fn export(&self) -> Result<()> {
        let mut json = self.network()?.to_spec().to_json();
        json.push('\n');
        self.emit(&json)
    }
}

fn rank_key_name(k: RankKey) -> &'static str {
    match k {
        RankKey::Traffic => "traffic",
        RankKey::Net => "net flux",
    }
}

fn amplification_csv(amp: &AmplificationResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sweep_value", "alpha_l", "divergence", "undefined"])
        .expect("in-memory writer");
    for i in 0..amp.points.len() {
        w.write_record([
            amp.points[i].to_string(),
            num(amp.alpha[i]),
            amp.divergence[i].to_string(),
            amp.undefined[i].to_string(),
        ])
        .expect("in-memory writer");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).with_context(|| path.display().to_string())?;
    let headers = r.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .with_context(|| format!("{}: no column `{n}`", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec?;
        for (col, &i) in cols.iter_mut().zip(&idx) {
            col.push(rec[i].parse::<f64>().with_context(|| format!("bad number `{}`", &rec[i]))?);
        }
    }
    Ok(cols)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
