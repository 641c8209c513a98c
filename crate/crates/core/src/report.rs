//! CSV reports. Column sets are fixed so downstream scripts can rely on them.
//!
//! * currents: `sweep_value,reservoir_id,quantity,current`
//! * ranking: `rank,cycle_string,j_forward,j_backward,j_net,affinity,traffic`
//!   followed by `energy_<id>,spin_<id>` for every reservoir
//! * sweep: `sweep_value`, one `J<id>_<quantity>` column per current,
//!   `p[<state>]` per state, the two residuals, then `j_forward[<cycle>]`,
//!   `j_backward[<cycle>]`, `j_net[<cycle>]` per tracked cycle
//! * cycle counts: `cycle_string,count_forward,count_backward,rate_forward,
//!   se_forward,rate_backward,se_backward` and, when analytic values are
//!   given, `j_forward,j_backward,z_forward,z_backward`

use csv::Writer;

use crate::cycles::Orientation;
use crate::flux::{CycleFluxRecord, FluxAnalysis};
use crate::network::TransitionNetwork;
use crate::steady_state::CurrentReport;
use crate::stochastic::{empirical_cycle_flux, CycleCountReport};
use crate::sweep::SweepResult;

/// Shortest round-trip decimal, in exponent form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn finish(w: Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn writer() -> Writer<Vec<u8>> {
    Writer::from_writer(Vec::new())
}

fn row<I, S>(w: &mut Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).expect("in-memory writer");
}

/// A `None` sweep value (single operating point) leaves the column empty.
pub fn currents_csv(rows: &[(Option<f64>, &CurrentReport)]) -> String {
    let mut w = writer();
    row(&mut w, ["sweep_value", "reservoir_id", "quantity", "current"]);
    for (x, report) in rows {
        for c in &report.currents {
            row(
                &mut w,
                [
                    x.map(|v| v.to_string()).unwrap_or_default(),
                    c.reservoir.to_string(),
                    c.quantity.to_string(),
                    num(c.value),
                ],
            );
        }
    }
    finish(w)
}

pub fn ranked_csv(net: &TransitionNetwork, records: &[&CycleFluxRecord]) -> String {
    let mut w = writer();
    let mut header: Vec<String> = [
        "rank",
        "cycle_string",
        "j_forward",
        "j_backward",
        "j_net",
        "affinity",
        "traffic",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for r in net.reservoirs() {
        header.push(format!("energy_{}", r.id));
        header.push(format!("spin_{}", r.id));
    }
    row(&mut w, &header);
    for (i, rec) in records.iter().enumerate() {
        let mut fields = vec![
            (i + 1).to_string(),
            rec.cycle.label(net),
            num(rec.j_forward),
            num(rec.j_backward),
            num(rec.j_net),
            num(rec.affinity),
            num(rec.traffic()),
        ];
        for t in &rec.transport {
            fields.push(num(t.energy));
            fields.push(num(t.spin));
        }
        row(&mut w, &fields);
    }
    finish(w)
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut w = writer();
    let mut header = vec!["sweep_value".to_string()];
    for &r in &result.reservoirs {
        for q in &result.quantities {
            header.push(format!("J{r}_{q}"));
        }
    }
    header.extend(result.state_labels.iter().map(|l| format!("p[{l}]")));
    header.push("stationarity_residual".into());
    header.push("decomposition_residual".into());
    for &c in &result.tracked {
        let l = &result.cycle_labels[c];
        header.push(format!("j_forward[{l}]"));
        header.push(format!("j_backward[{l}]"));
        header.push(format!("j_net[{l}]"));
    }
    row(&mut w, &header);
    for p in &result.points {
        let mut fields = vec![p.value.to_string()];
        for &r in &result.reservoirs {
            for &q in &result.quantities {
                fields.push(num(p.currents.get(r, q).unwrap_or(f64::NAN)));
            }
        }
        fields.extend(p.probabilities.iter().map(|&x| num(x)));
        fields.push(num(p.stationarity_residual));
        fields.push(num(p.decomposition_residual));
        for &c in &result.tracked {
            fields.push(num(p.j_forward[c]));
            fields.push(num(p.j_backward[c]));
            fields.push(num(p.j_forward[c] - p.j_backward[c]));
        }
        row(&mut w, &fields);
    }
    finish(w)
}

pub fn cycle_count_csv(
    net: &TransitionNetwork,
    report: &CycleCountReport,
    analytic: Option<&FluxAnalysis>,
) -> String {
    let mut w = writer();
    let mut header = vec![
        "cycle_string",
        "count_forward",
        "count_backward",
        "rate_forward",
        "se_forward",
        "rate_backward",
        "se_backward",
    ];
    if analytic.is_some() {
        header.extend(["j_forward", "j_backward", "z_forward", "z_backward"]);
    }
    row(&mut w, &header);
    let Ok(estimates) = empirical_cycle_flux(report) else {
        return finish(w);
    };
    for e in &estimates {
        let mut fields = vec![
            e.cycle.label(net),
            e.forward.count.to_string(),
            e.backward.count.to_string(),
            num(e.forward.rate),
            num(e.forward.std_error),
            num(e.backward.rate),
            num(e.backward.std_error),
        ];
        if let Some(a) = analytic {
            match a.find(&e.cycle) {
                Some(r) => {
                    for o in [Orientation::Forward, Orientation::Backward] {
                        fields.push(num(r.j(o)));
                    }
                    fields.push(num(e.forward.z_score(r.j_forward, report.total_time)));
                    fields.push(num(e.backward.z_score(r.j_backward, report.total_time)));
                }
                None => fields.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        row(&mut w, &fields);
    }
    finish(w)
}
