//! Subcommand implementations. Each returns a report and an exit status.

use std::path::PathBuf;
use std::time::Instant;

use serde_json::json;

use securefn_core::charact::{self, Rate};
use securefn_core::instance::{X, Y, Z};
use securefn_core::osrb::{self, OsrbReport};
use securefn_core::probcore::tv_distance;
use securefn_core::protosim::OneRoundProtocol;
use securefn_core::rateopt::{self, AuxSpec, Mode, RateOutcome};
use securefn_core::{AuxPair, Instance, Seed};

use crate::error::{CliError, CliResult, ExitStatus};
use crate::report::{self, Report};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub status: ExitStatus,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome {
            report,
            status: ExitStatus::Success,
        }
    }
}

pub fn characterize(instance: &Instance, command: Vec<String>) -> CliResult<Outcome> {
    let started = Instant::now();
    let cert = charact::check_computable(instance)?;
    let mut results = report::certificate_json(instance, &cert);
    let rate = charact::optimal_rate_full_support(instance)?;
    results["rate"] = json!(match rate {
        Rate::Bits(_) => "finite",
        Rate::Infinite => "infinity",
    });
    results["rate_bits"] = json!(rate.bits());
    if cert.is_computable() {
        let w = charact::build_w(instance, &cert)?;
        results["w"] = json!({
            "p_w_given_x": report::channel_rows(&w.p_w_given_x),
            "p_z_given_wy": report::channel_rows(&w.p_z_given_wy),
        });
    }
    Ok(Outcome::ok(Report::new(command, instance, vec![], started, results)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateOptions {
    pub mode: Mode,
    pub u_card: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: u64,
    pub max_iters: Option<usize>,
}

pub fn rate(instance: &Instance, opts: &RateOptions, command: Vec<String>) -> CliResult<Outcome> {
    let started = Instant::now();
    let mut spec = AuxSpec::new(opts.mode);
    spec.u_card = opts.u_card;
    spec.seed = Seed(opts.seed);
    if let Some(r) = opts.restarts {
        spec.restarts = r;
    }
    if let Some(m) = opts.max_iters {
        spec.max_iters = m;
    }
    let result = match opts.mode {
        Mode::WithPrivacy => rateopt::minimize_rs(instance, &spec)?,
        Mode::NoPrivacy => rateopt::minimize_rns(instance, &spec)?,
    };
    let status = match result.outcome {
        RateOutcome::Infeasible => ExitStatus::InfeasibleAtBudget,
        _ => ExitStatus::Success,
    };
    let results = report::rate_json(&result);
    Ok(Outcome {
        report: Report::new(command, instance, vec![opts.seed], started, results),
        status,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub rounds: usize,
    pub seed: u64,
    pub transcript_out: Option<PathBuf>,
    /// Symbol of the agreed reference input; the first `y` when absent.
    pub agreed_y1: Option<String>,
}

pub fn simulate(instance: &Instance, opts: &SimulateOptions, command: Vec<String>) -> CliResult<Outcome> {
    let started = Instant::now();
    let y1 = match &opts.agreed_y1 {
        None => 0,
        Some(s) => instance
            .y()
            .index_of(s)
            .ok_or_else(|| CliError::usage(format!("agreed y1 {s:?} is not a y symbol")))?,
    };
    let protocol = OneRoundProtocol::new(instance, y1)?;
    let exact = protocol.induced_distribution()?;
    let analytic_tv = tv_distance(&exact.marginal(&[X, Y, Z])?, &instance.target_joint())?;
    let analytic_leakage = protocol.analytic_leakage()?;
    let (transcript, sim) = protocol.run(opts.rounds, Seed(opts.seed))?;
    if let Some(path) = &opts.transcript_out {
        report::write_transcript(path, instance, &protocol.u_alphabet(), &transcript.records)?;
    }
    let results = json!({
        "rounds": sim.rounds,
        "agreed_y1": instance.y().symbol(sim.agreed_y1),
        "k": sim.k,
        "message_rule": protocol.message_rule().chunks(sim.k).map(<[f64]>::to_vec).collect::<Vec<_>>(),
        "analytic_tv": analytic_tv,
        "analytic_leakage_bits": analytic_leakage,
        "empirical_tv": sim.empirical_tv,
        "empirical_leakage_bits": sim.empirical_leakage,
        "transcript_out": opts.transcript_out.as_ref().map(|p| p.display().to_string()),
    });
    Ok(Outcome::ok(Report::new(command, instance, vec![opts.seed], started, results)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Bins `U^n` into `(f, m)` with the chosen auxiliary pair.
    ProtocolB,
    /// Bins `W^n` at `rate_m` only.
    SwW,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsrbOptions {
    pub n_list: Vec<usize>,
    pub rate_f: Option<f64>,
    pub rate_m: Option<f64>,
    /// `rate_f:rate_m` cells separated by commas; overrides the single rates.
    pub grid: Option<String>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub scheme: Scheme,
}

pub fn parse_grid(spec: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut cells = Vec::new();
    for cell in spec.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        let (f, m) = cell
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("grid cell {cell:?} is not rate_f:rate_m")))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("grid cell {cell:?}: {s:?} is not a number")))
        };
        cells.push((num(f)?, num(m)?));
    }
    if cells.is_empty() {
        return Err(CliError::usage("rate grid is empty"));
    }
    Ok(cells)
}

/// `W` when the problem is certified computable, otherwise the best
/// deterministic encoder with `|U| = |X|` and no privacy constraint.
pub fn default_aux(instance: &Instance) -> CliResult<(AuxPair, &'static str)> {
    if instance.has_full_support() {
        if let Ok(cert) = charact::check_computable(instance) {
            if cert.is_computable() {
                return Ok((charact::build_w(instance, &cert)?.as_aux_pair(instance), "w-channel"));
            }
        }
    }
    let base = rateopt::enumerate_deterministic_u(instance, instance.x().size(), Mode::NoPrivacy)?;
    match (base.outcome, base.best_aux) {
        (RateOutcome::Bits(_), Some(aux)) => Ok((aux, "deterministic-baseline")),
        _ => Err(CliError {
            status: ExitStatus::InfeasibleAtBudget,
            message: "no correct deterministic auxiliary pair to bin".into(),
        }),
    }
}

pub fn osrb(instance: &Instance, opts: &OsrbOptions, command: Vec<String>) -> CliResult<Outcome> {
    let started = Instant::now();
    let grid = match (&opts.grid, opts.rate_f, opts.rate_m) {
        (Some(g), _, _) => parse_grid(g)?,
        (None, Some(f), Some(m)) => vec![(f, m)],
        (None, None, Some(m)) if opts.scheme == Scheme::SwW => vec![(0.0, m)],
        _ => return Err(CliError::usage("give --rate-f and --rate-m, or --grid")),
    };
    if opts.n_list.is_empty() {
        return Err(CliError::usage("--n-list is empty"));
    }
    let seed = Seed(opts.seed);
    let (cells, aux_kind): (Vec<OsrbReport>, &str) = match opts.scheme {
        Scheme::ProtocolB => {
            let (aux, kind) = default_aux(instance)?;
            (
                osrb::rate_region_sweep(instance, &aux, &grid, &opts.n_list, opts.trials, seed)?,
                kind,
            )
        }
        Scheme::SwW => {
            if grid.iter().any(|&(f, _)| f != 0.0) {
                return Err(CliError::usage("the sw-w scheme has no f bins; rate_f must be 0"));
            }
            let mut cells = Vec::new();
            for &(_, m) in &grid {
                for &n in &opts.n_list {
                    cells.push(osrb::simulate_sw_w_scheme(instance, m, n, opts.trials, seed)?);
                }
            }
            (cells, "w-channel")
        }
    };
    if let Some(path) = &opts.out {
        report::write_table(path, &cells)?;
    }
    let results = json!({
        "scheme": match opts.scheme {
            Scheme::ProtocolB => "protocol-b",
            Scheme::SwW => "sw-w",
        },
        "aux": aux_kind,
        "cells": cells.iter().map(report::osrb_json).collect::<Vec<_>>(),
        "table": opts.out.as_ref().map(|p| p.display().to_string()),
    });
    Ok(Outcome::ok(Report::new(command, instance, vec![opts.seed], started, results)))
}
