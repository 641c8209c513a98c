//! Builders for the two reference devices: a Coulomb-drag spin-Seebeck pump
//! (two dots, six states) and a qutrit–qubit–qutrit thermal transistor
//! (eighteen states).
//!
//! Rates are golden-rule rates with flat couplings. A fermionic channel
//! `a → b` that adds an electron at energy cost `ΔE` fires at `Γ f(ΔE)` and
//! reverses at `Γ (1 − f(ΔE))`. A bosonic channel absorbs at `γ N(|ΔE|)` and
//! emits at `γ (N(|ΔE|) + 1)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{NetworkError, Result};
use crate::network::{
    GraphMode, ReservoirSpec, StateNode, Statistics, TransitionChannel, TransitionNetwork,
    Transported,
};

pub fn fermi_occupation(w: f64, temperature: f64, mu: f64) -> f64 {
    1.0 / (((w - mu) / temperature).exp() + 1.0)
}

pub fn bose_occupation(w: f64, temperature: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(NetworkError::NonPositiveFrequency(w));
    }
    Ok(1.0 / (w / temperature).exp_m1())
}

/// `(rate a → b, rate b → a)` for a bosonic channel with `ΔE = E_b − E_a`.
fn boson_rates(de: f64, temperature: f64, gamma: f64) -> Result<(f64, f64)> {
    let n = bose_occupation(de.abs(), temperature)?;
    Ok(if de > 0.0 {
        (gamma * n, gamma * (n + 1.0))
    } else {
        (gamma * (n + 1.0), gamma * n)
    })
}

fn invalid(msg: String) -> NetworkError {
    NetworkError::InvalidParameter(msg)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {value}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PumpParams {
    #[serde(rename = "eps_U")]
    pub eps_u: f64,
    pub eps_up: f64,
    pub eps_dn: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    #[serde(rename = "T3")]
    pub t3: f64,
    #[serde(rename = "T4")]
    pub t4: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    #[serde(rename = "Gamma1")]
    pub gamma1: f64,
    #[serde(rename = "Gamma2")]
    pub gamma2: f64,
    #[serde(rename = "Gamma3")]
    pub gamma3: f64,
    #[serde(rename = "Gamma4")]
    pub gamma4: f64,
}

impl Default for PumpParams {
    fn default() -> Self {
        PumpParams {
            eps_u: 1.0,
            eps_up: -1.0,
            eps_dn: 1.0,
            u: 3.0,
            t1: 1.2,
            t2: 1.0,
            t3: 1.0,
            t4: 1.0,
            mu1: 0.0,
            mu2: 0.0,
            mu3: 0.0,
            gamma1: 0.01,
            gamma2: 0.01,
            gamma3: 0.01,
            gamma4: 0.01,
        }
    }
}

impl PumpParams {
    /// Parameter names accepted by [`set`](Self::set).
    pub const NAMES: &'static [&'static str] = &[
        "eps_U", "eps_up", "eps_dn", "U", "T1", "T2", "T3", "T4", "T0", "dT", "mu1", "mu2",
        "mu3", "Gamma1", "Gamma2", "Gamma3", "Gamma4", "Gamma",
    ];

    /// Equilibrium pump at `T0` with the remaining defaults.
    pub fn equilibrium(t0: f64) -> Self {
        PumpParams {
            t1: t0,
            t2: t0,
            t3: t0,
            t4: t0,
            ..Default::default()
        }
    }

    /// `T1 − T2`, the thermal bias across the upper dot.
    pub fn delta_t(&self) -> f64 {
        self.t1 - self.t2
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "eps_U" => self.eps_u,
            "eps_up" => self.eps_up,
            "eps_dn" => self.eps_dn,
            "U" => self.u,
            "T1" => self.t1,
            "T2" | "T0" => self.t2,
            "T3" => self.t3,
            "T4" => self.t4,
            "dT" => self.delta_t(),
            "mu1" => self.mu1,
            "mu2" => self.mu2,
            "mu3" => self.mu3,
            "Gamma1" | "Gamma" => self.gamma1,
            "Gamma2" => self.gamma2,
            "Gamma3" => self.gamma3,
            "Gamma4" => self.gamma4,
            other => return Err(invalid(format!("unknown pump parameter `{other}`"))),
        })
    }

    /// Set a parameter by name. `dT` sets `T1 = T2 + dT`; `T0` moves
    /// `T2 = T3 = T4` and keeps the bias; `Gamma` sets all four couplings.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "eps_U" => self.eps_u = value,
            "eps_up" => self.eps_up = value,
            "eps_dn" => self.eps_dn = value,
            "U" => self.u = value,
            "T1" => self.t1 = value,
            "T2" => self.t2 = value,
            "T3" => self.t3 = value,
            "T4" => self.t4 = value,
            "T0" => {
                let bias = self.delta_t();
                self.t2 = value;
                self.t3 = value;
                self.t4 = value;
                self.t1 = value + bias;
            }
            "dT" => self.t1 = self.t2 + value,
            "mu1" => self.mu1 = value,
            "mu2" => self.mu2 = value,
            "mu3" => self.mu3 = value,
            "Gamma1" => self.gamma1 = value,
            "Gamma2" => self.gamma2 = value,
            "Gamma3" => self.gamma3 = value,
            "Gamma4" => self.gamma4 = value,
            "Gamma" => {
                self.gamma1 = value;
                self.gamma2 = value;
                self.gamma3 = value;
                self.gamma4 = value;
            }
            other => return Err(invalid(format!("unknown pump parameter `{other}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("T1", self.t1),
            ("T2", self.t2),
            ("T3", self.t3),
            ("T4", self.t4),
            ("Gamma1", self.gamma1),
            ("Gamma2", self.gamma2),
            ("Gamma3", self.gamma3),
            ("Gamma4", self.gamma4),
        ] {
            check_positive(name, v)?;
        }
        for (name, v) in [
            ("eps_U", self.eps_u),
            ("eps_up", self.eps_up),
            ("eps_dn", self.eps_dn),
            ("U", self.u),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("mu3", self.mu3),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Lower-dot occupations in state order.
const LOWER: [(&str, f64, f64); 3] = [("0", 0.0, 0.0), ("↑", 1.0, 0.5), ("↓", 1.0, -0.5)];

/// States in the six-state pump, ids `0..6`: `|00⟩ |0↑⟩ |0↓⟩ |10⟩ |1↑⟩ |1↓⟩`.
/// The first symbol is the upper dot, the second the lower dot.
pub const PUMP_LABELS: [&str; 6] = ["|00⟩", "|0↑⟩", "|0↓⟩", "|10⟩", "|1↑⟩", "|1↓⟩"];

/// The five-step loop that moves one unit of spin from reservoir 3 to bath 4.
pub const PUMP_SPIN_CYCLE: [&str; 5] = ["|00⟩", "|10⟩", "|1↑⟩", "|0↑⟩", "|0↓⟩"];

pub const PUMP_UPPER_LEFT: usize = 1;
pub const PUMP_UPPER_RIGHT: usize = 2;
pub const PUMP_LOWER: usize = 3;
pub const PUMP_MAGNON: usize = 4;

fn pump_id(upper: usize, lower: usize) -> usize {
    3 * upper + lower
}

/// Spin-Seebeck pump. Reservoirs 1 and 2 feed the upper dot, reservoir 3 the
/// lower dot (spin ±½ per electron), bath 4 flips the lower spin. Reservoir 4
/// gains one unit of spin for every `↑ → ↓` flip.
pub fn build_pump(p: &PumpParams, mode: GraphMode) -> Result<TransitionNetwork> {
    p.validate()?;
    let lower_eps = [0.0, p.eps_up, p.eps_dn];
    let mut states = Vec::with_capacity(6);
    for upper in 0..2 {
        for (l, &(_, n_l, s_z)) in LOWER.iter().enumerate() {
            let n_u = upper as f64;
            let mut qn = BTreeMap::new();
            qn.insert("n_U".to_string(), n_u);
            qn.insert("n_L".to_string(), n_l);
            qn.insert("S_z".to_string(), s_z);
            states.push(StateNode {
                id: pump_id(upper, l),
                label: PUMP_LABELS[pump_id(upper, l)].to_string(),
                energy: p.eps_u * n_u + lower_eps[l] + p.u * n_u * n_l,
                quantum_numbers: qn,
            });
        }
    }
    let reservoirs = vec![
        fermion(PUMP_UPPER_LEFT, p.t1, p.mu1, p.gamma1),
        fermion(PUMP_UPPER_RIGHT, p.t2, p.mu2, p.gamma2),
        fermion(PUMP_LOWER, p.t3, p.mu3, p.gamma3),
        ReservoirSpec {
            id: PUMP_MAGNON,
            statistics: Statistics::Boson,
            temperature: p.t4,
            chemical_potential: 0.0,
            coupling: p.gamma4,
        },
    ];
    let energy = |id: usize| states[id].energy;
    let mut channels = Vec::new();
    for l in 0..3 {
        let (a, b) = (pump_id(0, l), pump_id(1, l));
        for r in &reservoirs[..2] {
            channels.push(fermion_channel(a, b, energy(b) - energy(a), r, 0.0));
        }
    }
    for upper in 0..2 {
        let empty = pump_id(upper, 0);
        for l in 1..3 {
            let b = pump_id(upper, l);
            channels.push(fermion_channel(
                empty,
                b,
                energy(b) - energy(empty),
                &reservoirs[2],
                LOWER[l].2,
            ));
        }
        let (up, dn) = (pump_id(upper, 1), pump_id(upper, 2));
        let de = energy(dn) - energy(up);
        let (fw, bw) = boson_rates(de, p.t4, p.gamma4).map_err(|_| NetworkError::ZeroGapChannel {
            from: PUMP_LABELS[up].into(),
            to: PUMP_LABELS[dn].into(),
        })?;
        channels.push(TransitionChannel {
            from: up,
            to: dn,
            reservoir: PUMP_MAGNON,
            rate_forward: fw,
            rate_backward: bw,
            transported: Transported::new(de, 0.0, -1.0),
        });
    }
    TransitionNetwork::new(states, reservoirs, channels, mode)
}

fn fermion(id: usize, temperature: f64, mu: f64, coupling: f64) -> ReservoirSpec {
    ReservoirSpec {
        id,
        statistics: Statistics::Fermion,
        temperature,
        chemical_potential: mu,
        coupling,
    }
}

fn fermion_channel(from: usize, to: usize, de: f64, r: &ReservoirSpec, spin: f64) -> TransitionChannel {
    let f = fermi_occupation(de, r.temperature, r.chemical_potential);
    TransitionChannel {
        from,
        to,
        reservoir: r.id,
        rate_forward: r.coupling * f,
        rate_backward: r.coupling * (1.0 - f),
        transported: Transported::new(de, 1.0, spin),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[allow(non_snake_case)]
pub struct TransistorParams {
    pub w_L: f64,
    pub w_M: f64,
    pub w_R: f64,
    pub w_LM: f64,
    pub w_MR: f64,
    pub w_LR: f64,
    pub w0_L: f64,
    pub w0_R: f64,
    pub T_L: f64,
    pub T_M: f64,
    pub T_R: f64,
    pub gamma_L: f64,
    pub gamma_M: f64,
    pub gamma_R: f64,
}

impl Default for TransistorParams {
    fn default() -> Self {
        TransistorParams {
            w_L: 1.0,
            w_M: 1.0,
            w_R: 1.0,
            w_LM: 10.0,
            w_MR: 10.0,
            w_LR: 0.0,
            w0_L: 3.0,
            w0_R: 3.0,
            T_L: 2.5,
            T_M: 0.5,
            T_R: 0.2,
            gamma_L: 0.01,
            gamma_M: 0.01,
            gamma_R: 0.01,
        }
    }
}

pub const TRANSISTOR_LEFT: usize = 1;
pub const TRANSISTOR_MIDDLE: usize = 2;
pub const TRANSISTOR_RIGHT: usize = 3;

/// Qutrit levels `+`, `−`, `G` with `(σ^z, d)`.
const QUTRIT: [(&str, f64, f64); 3] = [("+", 1.0, 1.0), ("−", -1.0, 1.0), ("G", 0.0, 0.0)];
/// Qubit levels `↑`, `↓` with `σ^z`.
const QUBIT: [(&str, f64); 2] = [("↑", 1.0), ("↓", -1.0)];

fn transistor_id(l: usize, m: usize, r: usize) -> usize {
    6 * l + 3 * m + r
}

impl TransistorParams {
    pub const NAMES: &'static [&'static str] = &[
        "w_L", "w_M", "w_R", "w_LM", "w_MR", "w_LR", "w0_L", "w0_R", "T_L", "T_M", "T_R",
        "gamma_L", "gamma_M", "gamma_R", "gamma",
    ];

    pub fn equilibrium(t: f64) -> Self {
        TransistorParams {
            T_L: t,
            T_M: t,
            T_R: t,
            ..Default::default()
        }
    }

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "w_L" => &mut self.w_L,
            "w_M" => &mut self.w_M,
            "w_R" => &mut self.w_R,
            "w_LM" => &mut self.w_LM,
            "w_MR" => &mut self.w_MR,
            "w_LR" => &mut self.w_LR,
            "w0_L" => &mut self.w0_L,
            "w0_R" => &mut self.w0_R,
            "T_L" => &mut self.T_L,
            "T_M" => &mut self.T_M,
            "T_R" => &mut self.T_R,
            "gamma_L" => &mut self.gamma_L,
            "gamma_M" => &mut self.gamma_M,
            "gamma_R" => &mut self.gamma_R,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        let name = if name == "gamma" { "gamma_L" } else { name };
        self.clone()
            .slot(name)
            .map(|v| *v)
            .ok_or_else(|| invalid(format!("unknown transistor parameter `{name}`")))
    }

    /// Set a parameter by name; `gamma` sets all three couplings.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if name == "gamma" {
            self.gamma_L = value;
            self.gamma_M = value;
            self.gamma_R = value;
            return Ok(());
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| invalid(format!("unknown transistor parameter `{name}`")))?;
        *slot = value;
        Ok(())
    }

    /// The same device mirrored left ↔ right.
    pub fn mirrored(&self) -> Self {
        TransistorParams {
            w_L: self.w_R,
            w_R: self.w_L,
            w_LM: self.w_MR,
            w_MR: self.w_LM,
            w0_L: self.w0_R,
            w0_R: self.w0_L,
            T_L: self.T_R,
            T_R: self.T_L,
            gamma_L: self.gamma_R,
            gamma_R: self.gamma_L,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("T_L", self.T_L),
            ("T_M", self.T_M),
            ("T_R", self.T_R),
            ("gamma_L", self.gamma_L),
            ("gamma_M", self.gamma_M),
            ("gamma_R", self.gamma_R),
        ] {
            check_positive(name, v)?;
        }
        Ok(())
    }

    fn energy(&self, l: usize, m: usize, r: usize) -> f64 {
        let (sl, dl) = (QUTRIT[l].1, QUTRIT[l].2);
        let (sr, dr) = (QUTRIT[r].1, QUTRIT[r].2);
        let sm = QUBIT[m].1;
        0.5 * (self.w_L * sl + self.w_M * sm + self.w_R * sr)
            + 0.5 * (self.w_LM * sl * sm + self.w_MR * sr * sm + self.w_LR * sl * sr)
            + self.w0_L * dl
            + self.w0_R * dr
    }
}

/// `|l m r⟩` label, e.g. `|+↑−⟩`.
pub fn transistor_label(l: usize, m: usize, r: usize) -> String {
    format!("|{}{}{}⟩", QUTRIT[l].0, QUBIT[m].0, QUTRIT[r].0)
}

/// Qutrit–qubit–qutrit transistor with baths L (1), M (2), R (3). Each bath
/// moves its own subsystem: L and R connect `G` with `±`, M flips the qubit.
pub fn build_transistor(p: &TransistorParams, mode: GraphMode) -> Result<TransitionNetwork> {
    p.validate()?;
    let mut states = Vec::with_capacity(18);
    for l in 0..3 {
        for m in 0..2 {
            for r in 0..3 {
                let mut qn = BTreeMap::new();
                qn.insert("sz_L".to_string(), QUTRIT[l].1);
                qn.insert("sz_M".to_string(), QUBIT[m].1);
                qn.insert("sz_R".to_string(), QUTRIT[r].1);
                states.push(StateNode {
                    id: transistor_id(l, m, r),
                    label: transistor_label(l, m, r),
                    energy: p.energy(l, m, r),
                    quantum_numbers: qn,
                });
            }
        }
    }
    let bath = |id, temperature, coupling| ReservoirSpec {
        id,
        statistics: Statistics::Boson,
        temperature,
        chemical_potential: 0.0,
        coupling,
    };
    let reservoirs = vec![
        bath(TRANSISTOR_LEFT, p.T_L, p.gamma_L),
        bath(TRANSISTOR_MIDDLE, p.T_M, p.gamma_M),
        bath(TRANSISTOR_RIGHT, p.T_R, p.gamma_R),
    ];
    const G: usize = 2;
    let mut pairs = Vec::new();
    for m in 0..2 {
        for other in 0..3 {
            for x in 0..2 {
                pairs.push((transistor_id(G, m, other), transistor_id(x, m, other), &reservoirs[0]));
                pairs.push((transistor_id(other, m, G), transistor_id(other, m, x), &reservoirs[2]));
            }
        }
    }
    for l in 0..3 {
        for r in 0..3 {
            pairs.push((transistor_id(l, 1, r), transistor_id(l, 0, r), &reservoirs[1]));
        }
    }
    let mut channels = Vec::with_capacity(pairs.len());
    for (a, b, res) in pairs {
        let de = states[b].energy - states[a].energy;
        if de == 0.0 {
            return Err(NetworkError::ZeroGapChannel {
                from: states[a].label.clone(),
                to: states[b].label.clone(),
            });
        }
        let (fw, bw) = boson_rates(de, res.temperature, res.coupling)?;
        channels.push(TransitionChannel {
            from: a,
            to: b,
            reservoir: res.id,
            rate_forward: fw,
            rate_backward: bw,
            transported: Transported {
                energy: Some(de),
                particle: Some(0.0),
                spin: None,
            },
        });
    }
    TransitionNetwork::new(states, reservoirs, channels, mode)
}
