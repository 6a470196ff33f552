//! The six experiments. Each returns an [`Outcome`] holding a JSON summary
//! and CSV tables; [`write_artifacts`] puts them on disk.

use std::collections::BTreeMap;
use std::path::PathBuf;

use kpp_core::coeff::estimate_means;
use kpp_core::equilibria::{stability_bound, verify_stability_decay, SlackModel};
use kpp_core::fronts::{
    default_shifts, estimate_speed, probe_speed_interval, takeover_verify, track, ProbeConfig, TakeoverThresholds,
    Verdict,
};
use kpp_core::fmt::sig;
use kpp_core::kppsolve::{init, solve, Field, InitialData};
use kpp_core::subsuper::{capped_lower, certify_ordering, supersolution, BlockSpec, Relation, WaveParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifact::{self, Meta};
use crate::config::{parse_assignment, Command, ExperimentConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Confirmed,
    Inconclusive,
    Violated,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Confirmed => 0,
            Status::Inconclusive => 3,
            Status::Violated => 4,
        }
    }

    fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Confirmed => Status::Confirmed,
            Verdict::Inconclusive => Status::Inconclusive,
            Verdict::Violated => Status::Violated,
        }
    }

    fn check(ok: bool) -> Self {
        if ok {
            Status::Confirmed
        } else {
            Status::Violated
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: Command,
    pub status: Status,
    pub result: Value,
    /// `(file name, CSV body)`.
    pub tables: Vec<(String, Vec<u8>)>,
    /// One-line human summary.
    pub summary: String,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes to JSON")
}

fn csv<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> kpp_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Runs `command` on `config` without touching the file system.
pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    if let Some(c) = config.command {
        if c != command {
            return Err(CliError::usage(format!(
                "config is for `{}`, invoked as `{}`",
                c.name(),
                command.name()
            )));
        }
    }
    match command {
        Command::Mean => mean(config),
        Command::Takeover => takeover(config),
        Command::Interval => interval(config),
        Command::Stability => stability(config),
        Command::Certify => certify(config),
        Command::Sweep => sweep(config),
    }
}

/// Writes `<command>.json` and the CSV tables into the config's output
/// directory.
pub fn write_artifacts(config: &ExperimentConfig, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let mut resolved = config.clone();
    resolved.command = Some(outcome.command);
    let meta = Meta::new(outcome.command, &resolved);
    let dir = &config.output;
    let mut result = outcome.result.clone();
    if let Value::Object(m) = &mut result {
        m.insert("status".into(), to_value(&outcome.status));
    }
    let mut paths = vec![artifact::write(
        dir,
        &format!("{}.json", outcome.command.name()),
        artifact::json_document(&meta, &result).as_bytes(),
    )?];
    for (name, body) in &outcome.tables {
        paths.push(artifact::write(dir, name, &artifact::csv_document(&meta, body))?);
    }
    Ok(paths)
}

fn positive_horizon(t_end: f64) -> Result<f64, CliError> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(CliError::usage(format!("solver.t_end must be positive, got {t_end}")));
    }
    Ok(t_end)
}

fn mean(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let (h0, h1) = a
        .horizon
        .ok_or_else(|| CliError::usage("mean needs analysis.horizon = [t_lo, t_hi]"))?;
    if !(h1 > h0) {
        return Err(CliError::usage("analysis.horizon must have positive length"));
    }
    let path = cfg.path.build(h0, h1)?;
    let est = estimate_means(&path, a.r_min, a.stride(), (h0, h1))?;
    let ordered = est.a_low <= est.a_mean + 1e-12 && est.a_mean <= est.a_high + 1e-12;
    Ok(Outcome {
        command: Command::Mean,
        status: Status::check(ordered),
        summary: format!(
            "least mean {}, average {}, greatest mean {}",
            sig(est.a_low),
            sig(est.a_mean),
            sig(est.a_high)
        ),
        result: json!({ "means": est, "path": path.describe() }),
        tables: vec![],
    })
}

fn takeover(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let t_end = positive_horizon(cfg.solver.t_end)?;
    let path = cfg.path.build(0.0, t_end + 1.0)?;
    let grid = cfg.grid.build()?;
    let data = cfg.initial.clone().unwrap_or(InitialData::heaviside(0.0));
    let traj = solve(&init(&data, &grid)?, &path, t_end, &cfg.solver.build())?;
    let trace = track(&traj, &a.levels)?.with_provenance(format!(
        "{} on [{}, {}] dx {} dt {}",
        path.describe(),
        sig(cfg.grid.x_lo),
        sig(cfg.grid.x_hi),
        sig(cfg.grid.dx),
        sig(cfg.solver.dt)
    ));
    let speed = estimate_speed(&trace, a.burn_in())?;
    let means = estimate_means(&path, a.r_min, a.stride(), (0.0, t_end))?;
    let c_star = 2.0 * means.a_mean.sqrt();
    let checks = a
        .t_checks
        .clone()
        .unwrap_or_else(|| vec![t_end / 4.0, t_end / 2.0, t_end]);
    let thresholds = TakeoverThresholds {
        outer_max: cfg.tolerances.outer_max,
        inner_min: cfg.tolerances.inner_min,
    };
    let report = takeover_verify(&traj, c_star, a.h, &checks, thresholds)?;
    Ok(Outcome {
        command: Command::Takeover,
        status: Status::from_verdict(report.verdict),
        summary: format!(
            "speed {} +- {} (predicted {}), takeover {:?}",
            sig(speed.speed),
            sig(speed.stderr),
            sig(c_star),
            report.verdict
        ),
        result: json!({ "speed": speed, "means": means, "c_star": c_star, "takeover": report }),
        tables: vec![("front.csv".into(), csv(|w| trace.write_csv(w))?)],
    })
}

fn interval(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let shifts = default_shifts(a.shift_count, a.shift_scale);
    let path = cfg.path.build(0.0, a.t_probe + a.shift_scale + 1.0)?;
    let data = cfg.initial.clone().unwrap_or(InitialData::CompactBump {
        center: 0.0,
        half_width: 2.0,
        height: 1.0,
    });
    let mut probe = ProbeConfig::new(cfg.grid.build()?, cfg.solver.build().store_every(usize::MAX));
    probe.eps_spread = cfg.tolerances.eps_spread;
    probe.eps_vanish = cfg.tolerances.eps_vanish;
    let iv = probe_speed_interval(&path, &data, &a.c_grid()?, &shifts, a.t_probe, &probe)?;
    let decided = iv.c_lo.is_some() && iv.c_hi.is_some() && iv.monotone;
    let show = |c: Option<f64>| c.map_or("undecided".to_string(), sig);
    let mut table = String::from("c,spread,vanish\n");
    for s in &iv.speeds {
        table += &format!("{},{},{}\n", sig(s.c), s.spread as u8, s.vanish as u8);
    }
    Ok(Outcome {
        command: Command::Interval,
        status: if decided { Status::Confirmed } else { Status::Inconclusive },
        summary: format!("speed interval [{}, {}] at t = {}", show(iv.c_lo), show(iv.c_hi), sig(a.t_probe)),
        result: json!({ "interval": iv }),
        tables: vec![("interval.csv".into(), table.into_bytes())],
    })
}

fn stability(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let t_end = positive_horizon(cfg.solver.t_end)?;
    let path = cfg.path.build(0.0, t_end + 1.0)?;
    let grid = cfg.grid.build()?;
    let data = cfg.initial.clone().unwrap_or(InitialData::Cosine {
        lo: 0.5,
        hi: 2.0,
        period: 40.0,
    });
    let u0 = init(&data, &grid)?;
    let bound = stability_bound(u0.min(), u0.max())?;
    // no front to keep away from the ends
    let traj = solve(&u0, &path, t_end, &cfg.solver.build().margin(0.0))?;
    let slack = cfg
        .tolerances
        .slack
        .unwrap_or_else(|| SlackModel::CALIBRATED.slack(grid.dx(), cfg.solver.dt));
    let rep = verify_stability_decay(&traj, &path, &bound, slack)?;
    Ok(Outcome {
        command: Command::Stability,
        status: Status::check(rep.passed),
        summary: format!(
            "M = {}, worst excess {} at t = {} (slack {})",
            sig(bound.m),
            sig(rep.max_violation),
            sig(rep.t_max_violation),
            sig(slack)
        ),
        tables: vec![("stability.csv".into(), csv(|w| rep.write_csv(w))?)],
        result: json!({ "stability": rep }),
    })
}

fn certify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let t_end = positive_horizon(cfg.solver.t_end)?;
    let path = cfg.path.build(0.0, t_end + 1.0)?;
    let grid = cfg.grid.build()?;
    let upper = supersolution(&path, a.mu)?;
    let u0 = match &cfg.initial {
        Some(d) => init(d, &grid)?,
        None => {
            let vals = grid.nodes().map(|x| upper.eval(0.0, x)).collect::<kpp_core::Result<_>>()?;
            Field::new(grid, vals, 0.0)?
        }
    };
    let traj = solve(&u0, &path, t_end, &cfg.solver.build())?;
    let slack = cfg
        .tolerances
        .slack
        .unwrap_or_else(|| 1e-6 + SlackModel::CALIBRATED.slack(grid.dx(), cfg.solver.dt));
    let mut reports = vec![("upper", certify_ordering(&traj, &upper, Relation::Below, slack)?)];
    let mut wave = Value::Null;
    if let Some(mu_tilde) = a.mu_tilde {
        let spec = BlockSpec {
            r_min: a.r_min,
            horizon: (0.0, t_end + 1.0),
        };
        let w = WaveParams::build(&path, a.mu, mu_tilde, a.delta, a.d, spec)?;
        wave = json!({ "mu": w.mu, "mu_tilde": w.mu_tilde, "delta": w.delta, "d": w.d, "d_b": w.d_b, "a_low": w.a_low });
        reports.push(("lower", certify_ordering(&traj, &capped_lower(&w, 0.0), Relation::Above, slack)?));
    }
    let passed = reports.iter().all(|(_, r)| r.passed);
    let summary = reports
        .iter()
        .map(|(n, r)| format!("{n} bound worst {} ({})", sig(r.max_violation), if r.passed { "ok" } else { "violated" }))
        .collect::<Vec<_>>()
        .join(", ");
    let mut tables = Vec::new();
    for (n, r) in &reports {
        tables.push((format!("{n}.csv"), csv(|w| r.write_csv(w))?));
    }
    let map: BTreeMap<&str, Value> = reports.iter().map(|(n, r)| (*n, to_value(r))).collect();
    Ok(Outcome {
        command: Command::Certify,
        status: Status::check(passed),
        summary,
        result: json!({ "slack": slack, "wave": wave, "reports": map }),
        tables,
    })
}

#[derive(Debug, Clone, Serialize)]
struct Cell {
    label: String,
    seed: Option<u64>,
    status: Option<Status>,
    exit_code: i32,
    metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Headline numbers of a result, used for the sweep aggregates.
fn metrics(command: Command, result: &Value) -> BTreeMap<String, f64> {
    let picks: &[(&str, &str)] = match command {
        Command::Mean => &[("a_low", "/means/a_low"), ("a_mean", "/means/a_mean"), ("a_high", "/means/a_high")],
        Command::Takeover => &[("speed", "/speed/speed"), ("c_star", "/c_star")],
        Command::Interval => &[("c_lo", "/interval/c_lo"), ("c_hi", "/interval/c_hi")],
        Command::Stability => &[("max_violation", "/stability/max_violation")],
        Command::Certify => &[
            ("upper_violation", "/reports/upper/max_violation"),
            ("lower_violation", "/reports/lower/max_violation"),
        ],
        Command::Sweep => &[],
    };
    picks
        .iter()
        .filter_map(|(k, p)| result.pointer(p).and_then(Value::as_f64).map(|v| (k.to_string(), v)))
        .collect()
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::usage("sweep needs a [sweep] table"))?;
    if spec.command == Command::Sweep {
        return Err(CliError::usage("sweep cannot nest sweeps"));
    }
    if !spec.seeds.is_empty() && cfg.path.seed().is_none() {
        return Err(CliError::usage("sweep seeds need a seeded (noise) path"));
    }
    let mut base = cfg.clone();
    base.sweep = None;
    base.command = None;
    let variants = if spec.variants.is_empty() {
        vec![crate::config::Variant {
            label: "base".into(),
            set: vec![],
        }]
    } else {
        spec.variants.clone()
    };
    let seeds: Vec<Option<u64>> = if spec.seeds.is_empty() {
        vec![None]
    } else {
        spec.seeds.iter().copied().map(Some).collect()
    };
    let mut jobs = Vec::new();
    for v in &variants {
        let mut overrides = v.set.iter().map(|s| parse_assignment(s)).collect::<Result<Vec<_>, _>>()?;
        for &seed in &seeds {
            if let Some(s) = seed {
                overrides.push(("path.seed".into(), s.to_string()));
            }
            jobs.push((v.label.clone(), seed, base.with_overrides(&overrides)?));
            if seed.is_some() {
                overrides.pop();
            }
        }
    }
    jobs.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    let command = spec.command;
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|(label, seed, c)| match execute(command, c) {
            Ok(o) => Cell {
                label: label.clone(),
                seed: *seed,
                status: Some(o.status),
                exit_code: o.status.exit_code(),
                metrics: metrics(command, &o.result),
                error: None,
            },
            Err(e) => Cell {
                label: label.clone(),
                seed: *seed,
                status: None,
                exit_code: e.exit_code(),
                metrics: BTreeMap::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();

    let mut aggregates: BTreeMap<String, BTreeMap<String, Value>> = BTreeMap::new();
    for v in &variants {
        let group: Vec<&Cell> = cells.iter().filter(|c| c.label == v.label).collect();
        let mut names: Vec<&String> = group.iter().flat_map(|c| c.metrics.keys()).collect();
        names.sort();
        names.dedup();
        let entry = aggregates.entry(v.label.clone()).or_default();
        for name in names {
            let xs: Vec<f64> = group.iter().filter_map(|c| c.metrics.get(name).copied()).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            entry.insert(name.clone(), json!({ "n": xs.len(), "mean": mean, "min": min, "max": max }));
        }
    }
    let worst = cells.iter().map(|c| c.exit_code).max().unwrap_or(0);
    let status = match worst {
        0 => Status::Confirmed,
        3 => Status::Inconclusive,
        _ => Status::Violated,
    };
    let mut table = String::from("label,seed,exit_code,metric,value\n");
    for c in &cells {
        let seed = c.seed.map_or(String::new(), |s| s.to_string());
        if c.metrics.is_empty() {
            table += &format!("{},{},{},,\n", c.label, seed, c.exit_code);
        }
        for (k, v) in &c.metrics {
            table += &format!("{},{},{},{},{}\n", c.label, seed, c.exit_code, k, sig(*v));
        }
    }
    Ok(Outcome {
        command: Command::Sweep,
        status,
        summary: format!("{} cells of `{}`, worst exit code {worst}", cells.len(), command.name()),
        result: json!({ "command": command, "cells": cells, "aggregates": aggregates }),
        tables: vec![("sweep.csv".into(), table.into_bytes())],
    })
}
