//! JSON reports and CSV tables.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use securefn_core::charact::{EquivalenceClass, Refutation, SecurityCertificate};
use securefn_core::osrb::{EncoderKind, OsrbReport};
use securefn_core::protosim::Round;
use securefn_core::rateopt::{Certification, RateOutcome, RateResult, RestartKind};
use securefn_core::{Alphabet, AuxPair, Channel, Instance};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub instance: String,
    pub instance_digest: String,
    pub tool_version: &'static str,
    pub seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
    pub results: Value,
}

impl Report {
    pub fn new(command: Vec<String>, instance: &Instance, seeds: Vec<u64>, started: Instant, results: Value) -> Self {
        Report {
            command,
            instance: instance.name.clone(),
            instance_digest: crate::instance_file::digest(instance),
            tool_version: env!("CARGO_PKG_VERSION"),
            seeds,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Rows of a channel as nested arrays, one per input tuple.
pub fn channel_rows(ch: &Channel) -> Value {
    Value::from(
        ch.rows()
            .chunks(ch.output_len())
            .map(|r| Value::from(r.to_vec()))
            .collect::<Vec<_>>(),
    )
}

fn symbols(a: &Alphabet, idx: &[usize]) -> Value {
    Value::from(idx.iter().map(|&i| a.symbol(i).to_string()).collect::<Vec<_>>())
}

pub fn class_json(inst: &Instance, c: &EquivalenceClass) -> Value {
    json!({
        "y": inst.y().symbol(c.y),
        "z": symbols(inst.z(), &c.z_members),
        "alpha": c.alpha,
        "gamma": c.gamma,
    })
}

pub fn refutation_json(inst: &Instance, r: &Refutation) -> Value {
    let y = |i: usize| inst.y().symbol(i).to_string();
    match *r {
        Refutation::ClassCount { y: a, y_other, k, k_other } => json!({
            "kind": "class-count",
            "y": y(a), "y_other": y(y_other), "k": k, "k_other": k_other,
        }),
        Refutation::AlphaMismatch { y: a, y_other, class } => json!({
            "kind": "alpha-mismatch",
            "y": y(a), "y_other": y(y_other), "class": class,
        }),
        Refutation::ClassSum { class, x, y: a, y_other, sum, sum_other } => json!({
            "kind": "class-sum",
            "class": class, "x": inst.x().symbol(x),
            "y": y(a), "y_other": y(y_other), "sum": sum, "sum_other": sum_other,
        }),
    }
}

pub fn certificate_json(inst: &Instance, cert: &SecurityCertificate) -> Value {
    match cert {
        SecurityCertificate::Computable { k, classes } => json!({
            "computable": true,
            "k": k,
            "classes": classes
                .iter()
                .map(|per_y| per_y.iter().map(|c| class_json(inst, c)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        SecurityCertificate::Refuted(r) => json!({
            "computable": false,
            "refutation": refutation_json(inst, r),
        }),
    }
}

pub fn aux_json(aux: &AuxPair) -> Value {
    json!({
        "u_symbols": aux.u_alphabet().symbols(),
        "p_u_given_x": channel_rows(&aux.encoder),
        "p_z_given_uy": channel_rows(&aux.decoder),
    })
}

pub fn rate_json(r: &RateResult) -> Value {
    let (outcome, bits) = match r.outcome {
        RateOutcome::Bits(b) => ("finite", Some(b)),
        RateOutcome::Infinite => ("infinity", None),
        RateOutcome::Infeasible => ("infeasible-at-budget", None),
    };
    let label = match r.certification {
        Certification::Exact => "exact",
        Certification::UpperBound => "upper-bound",
    };
    let trace: Vec<Value> = r
        .restart_trace
        .iter()
        .map(|t| {
            let kind = match t.kind {
                RestartKind::DeterministicBaseline => "deterministic-baseline".to_string(),
                RestartKind::WChannel => "w-channel".to_string(),
                RestartKind::Random(i) => format!("random-{i}"),
            };
            json!({"start": kind, "best_feasible_bits": t.best_feasible, "iterations": t.iterations})
        })
        .collect();
    json!({
        "mode": match r.mode {
            securefn_core::rateopt::Mode::WithPrivacy => "rs",
            securefn_core::rateopt::Mode::NoPrivacy => "rns",
        },
        "outcome": outcome,
        "rate_bits": bits,
        "label": label,
        "u_card": r.u_card,
        "best_aux": r.best_aux.as_ref().map(aux_json),
        "constraint_residuals": r.residuals.map(|res| json!({
            "u_x_y": res.u_x_y,
            "z_uy_x": res.z_uy_x,
            "u_yz_x": res.u_yz_x,
        })),
        "correctness_residual": r.correctness_residual,
        "restart_trace": trace,
    })
}

pub fn osrb_json(r: &OsrbReport) -> Value {
    json!({
        "n": r.n,
        "rate_f": r.rate_f,
        "rate_m": r.rate_m,
        "effective_rate_f": r.effective_rate_f,
        "effective_rate_m": r.effective_rate_m,
        "f_bins": r.f_bins,
        "m_bins": r.m_bins,
        "decode_error_rate": r.decode_error_rate,
        "decode_failures": r.decode_failures,
        "empirical_tv": r.empirical_tv,
        "independence_tv": r.independence_tv,
        "leakage_proxy": r.leakage_proxy,
        "trials": r.trials,
        "seed": r.seed.0,
        "encoder": match r.encoder {
            EncoderKind::IdealizedIid => "idealized-iid",
        },
    })
}

pub const TABLE_HEADER: [&str; 9] = [
    "n",
    "rate_f",
    "rate_m",
    "decode_error_rate",
    "empirical_tv",
    "independence_tv",
    "leakage_proxy",
    "trials",
    "seed",
];

pub fn write_table(path: &Path, rows: &[OsrbReport]) -> CliResult<()> {
    let io = |e: csv::Error| CliError::io(format!("cannot write {}", path.display()), e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(TABLE_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.rate_f.to_string(),
            r.rate_m.to_string(),
            r.decode_error_rate.to_string(),
            r.empirical_tv.to_string(),
            r.independence_tv.to_string(),
            r.leakage_proxy.to_string(),
            r.trials.to_string(),
            r.seed.0.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

/// One `x,y,u,z` line per round, symbols by label.
pub fn write_transcript(path: &Path, inst: &Instance, u: &Alphabet, records: &[Round]) -> CliResult<()> {
    let io = |e: csv::Error| CliError::io(format!("cannot write {}", path.display()), e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["x", "y", "u", "z"]).map_err(io)?;
    for r in records {
        w.write_record([
            inst.x().symbol(r.x),
            inst.y().symbol(r.y),
            u.symbol(r.u),
            inst.z().symbol(r.z),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}
