use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::front_position;
use crate::coeff::CoefficientPath;
use crate::kppsolve::{init, solve, Field, Grid1D, InitialData, SolveConfig};
use crate::{Error, Result};

/// Smallest admissible pair time; earlier crossings are dominated by the
/// initial ramp.
pub const T_MIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub t: f64,
    pub s: f64,
    pub x_t: f64,
    /// Crossing at time `s` of the run under the path shifted by `t`.
    pub x_s_shifted: f64,
    pub x_t_plus_s: f64,
    /// `x_t + x_s_shifted - x_t_plus_s`.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub times: Vec<f64>,
    pub level: f64,
    pub pairs: Vec<PairViolation>,
    pub m_hat: f64,
    pub argmax: (f64, f64),
}

impl SubadditivityReport {
    pub fn get(&self, t: f64, s: f64) -> Option<&PairViolation> {
        self.pairs.iter().find(|p| p.t == t && p.s == s)
    }

    /// Relative change of the defect constant against `other`, measured
    /// against the larger of the two magnitudes (floored at one space unit).
    pub fn relative_change(&self, other: &SubadditivityReport) -> f64 {
        (other.m_hat - self.m_hat).abs() / self.m_hat.abs().max(other.m_hat.abs()).max(1.0)
    }
}

/// Sorted times with every midpoint inserted.
pub fn midpoint_refinement(times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * times.len());
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            out.push(0.5 * (times[i - 1] + t));
        }
        out.push(t);
    }
    out
}

/// Front crossings of the run from `start` at each of the increasing `times`.
pub fn front_positions_at(
    start: &Field,
    path: &CoefficientPath,
    times: &[f64],
    config: &SolveConfig,
    level: f64,
) -> Result<Vec<f64>> {
    let mut cur = start.clone();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > cur.t() {
            cur = solve(&cur, path, t, config)?.last().clone();
        }
        let x = front_position(&cur, level)
            .position()
            .ok_or(Error::NoFront { t, level })?;
        out.push(x + cur.frame_shift());
    }
    Ok(out)
}

/// Defect `x(t) + x(s; shifted by t) - x(t + s)` of level crossings started
/// from the Heaviside step at 0, over all pairs from `times`.
pub fn subadditivity_check(
    path: &CoefficientPath,
    times: &[f64],
    grid: &Grid1D,
    config: &SolveConfig,
    level: f64,
) -> Result<SubadditivityReport> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("pair times must be nonempty and increasing"));
    }
    if times[0] < T_MIN {
        return Err(Error::param(format!("pair times must be >= {T_MIN}")));
    }
    let start = init(&InitialData::heaviside(0.0), grid)?;

    let mut base_times: Vec<f64> = times.to_vec();
    for &t in times {
        for &s in times {
            base_times.push(t + s);
        }
    }
    base_times.sort_by(f64::total_cmp);
    base_times.dedup();

    // job 0 is the unshifted run; job k is the run under the shift times[k-1]
    let jobs: Vec<Option<f64>> = std::iter::once(None).chain(times.iter().map(|&t| Some(t))).collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|job| match job {
            None => front_positions_at(&start, path, &base_times, config, level),
            Some(t) => front_positions_at(&start, &path.shift(*t), times, config, level),
        })
        .collect::<Result<_>>()?;

    let base = |t: f64| {
        let i = base_times.iter().position(|&b| b == t).unwrap();
        results[0][i]
    };
    let mut pairs = Vec::with_capacity(times.len() * times.len());
    for (i, &t) in times.iter().enumerate() {
        for (j, &s) in times.iter().enumerate() {
            let x_t = base(t);
            let x_s_shifted = results[i + 1][j];
            let x_t_plus_s = base(t + s);
            pairs.push(PairViolation {
                t,
                s,
                x_t,
                x_s_shifted,
                x_t_plus_s,
                v: x_t + x_s_shifted - x_t_plus_s,
            });
        }
    }
    if let Some(p) = pairs.iter().find(|p| !p.v.is_finite()) {
        return Err(Error::NonFinite { t: p.t + p.s, node: 0 });
    }
    let best = pairs.iter().max_by(|a, b| a.v.total_cmp(&b.v)).unwrap();
    Ok(SubadditivityReport {
        times: times.to_vec(),
        level,
        m_hat: best.v,
        argmax: (best.t, best.s),
        pairs,
    })
}
