use serde::{Deserialize, Serialize};

use super::{front_position, Verdict};
use crate::kppsolve::{Field, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TakeoverThresholds {
    /// Largest admissible `u` beyond `(c + h) t` at the final check.
    pub outer_max: f64,
    /// Smallest admissible `u` inside `(c - h) t` at the final check.
    pub inner_min: f64,
}

impl Default for TakeoverThresholds {
    fn default() -> Self {
        Self {
            outer_max: 1e-3,
            inner_min: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TakeoverRow {
    pub t: f64,
    pub outer_edge: f64,
    pub inner_edge: f64,
    pub outer_sup: f64,
    pub inner_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TakeoverReport {
    pub c_star: f64,
    pub h: f64,
    pub thresholds: TakeoverThresholds,
    pub rows: Vec<TakeoverRow>,
    pub verdict: Verdict,
}

/// Checks that the solution has died out beyond `(c_star + h) t` and taken
/// over inside `max(0, (c_star - h) t)` at each check time. `c_star` is
/// `2 sqrt(a_mean)` of the path; positions are lab coordinates.
pub fn takeover_verify(
    trajectory: &Trajectory,
    c_star: f64,
    h: f64,
    t_checks: &[f64],
    thresholds: TakeoverThresholds,
) -> Result<TakeoverReport> {
    if !(h > 0.0) || !(c_star > 0.0) {
        return Err(Error::param("take-over margin and speed must be positive"));
    }
    if t_checks.is_empty() {
        return Err(Error::param("need at least one check time"));
    }
    let mut rows = Vec::with_capacity(t_checks.len());
    for &tc in t_checks {
        let f = trajectory.nearest(tc);
        let t = f.t();
        let outer_edge = (c_star + h) * t;
        let inner_edge = ((c_star - h) * t).max(0.0);
        let x_hi = f.lab_x(f.grid().len() - 1);
        if outer_edge > x_hi {
            return Err(Error::DomainTooSmall(format!(
                "outer region starts at {outer_edge} beyond the right end {x_hi} at t={t}"
            )));
        }
        let mut outer_sup: f64 = 0.0;
        let mut inner_inf = f64::INFINITY;
        for (i, &u) in f.values().iter().enumerate() {
            let x = f.lab_x(i);
            if x >= outer_edge {
                outer_sup = outer_sup.max(u);
            }
            if x <= inner_edge {
                inner_inf = inner_inf.min(u);
            }
        }
        if inner_inf == f64::INFINITY {
            inner_inf = f.interpolate(inner_edge - f.frame_shift()).unwrap_or(f64::NAN);
        }
        rows.push(TakeoverRow {
            t,
            outer_edge,
            inner_edge,
            outer_sup,
            inner_inf,
        });
    }
    let last = rows.last().unwrap();
    let ok = |r: &TakeoverRow| r.outer_sup <= thresholds.outer_max && r.inner_inf >= thresholds.inner_min;
    let verdict = if ok(last) {
        Verdict::Confirmed
    } else {
        // still improving: the horizon, not the prediction, is at fault
        let first = &rows[0];
        let improving = rows.len() > 1
            && last.outer_sup <= first.outer_sup
            && 1.0 - last.inner_inf <= 1.0 - first.inner_inf;
        if improving {
            Verdict::Inconclusive
        } else {
            Verdict::Violated
        }
    };
    Ok(TakeoverReport {
        c_star,
        h,
        thresholds,
        rows,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub x_steep: f64,
    pub x_other: f64,
    pub violation: f64,
    /// Offset from the crossing where the violation occurs.
    pub at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOrderingReport {
    pub level: f64,
    /// Offsets closer than this to the crossing are ignored.
    pub exclusion: f64,
    pub rows: Vec<ProfileRow>,
    pub max_violation: f64,
}

/// Compares the profiles of `steep` and `other`, each centred at its own
/// half-level crossing: `steep` must lie above `other` behind the crossing
/// and below it ahead of the crossing. Offsets within `2 dx` of the
/// crossing are excluded.
pub fn profile_ordering_check(
    steep: &Trajectory,
    other: &Trajectory,
    times: &[f64],
) -> Result<ProfileOrderingReport> {
    let level = 0.5;
    let exclusion = 2.0 * steep.grid().dx();
    let mut rows = Vec::with_capacity(times.len());
    for &tc in times {
        let a = steep.nearest(tc);
        let b = other.nearest(tc);
        let xa = crossing_or_err(a, level)?;
        let xb = crossing_or_err(b, level)?;
        let mut worst: f64 = 0.0;
        let mut at = 0.0;
        for (i, &ua) in a.values().iter().enumerate() {
            let y = a.grid().x(i) - xa;
            if y.abs() < exclusion {
                continue;
            }
            let Some(ub) = b.interpolate(a.grid().x(i) + (xb - xa)) else { continue };
            let v = if y < 0.0 { ub - ua } else { ua - ub };
            if v > worst {
                worst = v;
                at = y;
            }
        }
        rows.push(ProfileRow {
            t: a.t(),
            x_steep: xa + a.frame_shift(),
            x_other: xb + b.frame_shift(),
            violation: worst,
            at,
        });
    }
    let max_violation = rows.iter().map(|r| r.violation).fold(0.0, f64::max);
    Ok(ProfileOrderingReport {
        level,
        exclusion,
        rows,
        max_violation,
    })
}

fn crossing_or_err(f: &Field, level: f64) -> Result<f64> {
    front_position(f, level)
        .position()
        .ok_or(Error::NoFront { t: f.t(), level })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub t_window: (f64, f64),
    /// `(x_probe, sup over the window of |v - 1| on x <= x_probe)`, in the
    /// order given.
    pub deviations: Vec<(f64, f64)>,
    /// Deviation does not grow as the probe moves left.
    pub monotone: bool,
}

/// Uniformity of the left tail of a moving-frame run: how far `v` stays
/// from 1 left of each probe point over `t_window`. Probe positions are
/// frame coordinates.
pub fn tail_uniformity(trajectory: &Trajectory, x_probes: &[f64], t_window: (f64, f64)) -> Result<TailReport> {
    let frames: Vec<&Field> = trajectory
        .frames()
        .iter()
        .filter(|f| f.t() >= t_window.0 - 1e-9 && f.t() <= t_window.1 + 1e-9)
        .collect();
    let Some(first) = frames.first() else {
        return Err(Error::HorizonTooShort(format!(
            "no stored frames in [{}, {}]",
            t_window.0, t_window.1
        )));
    };
    // a fully invaded frame has no crossing but is already past formation
    if first.min() < 0.5 {
        crossing_or_err(first, 0.5)?;
    }
    let deviations: Vec<(f64, f64)> = x_probes
        .iter()
        .map(|&xp| {
            let dev = frames
                .iter()
                .flat_map(|f| {
                    let g = f.grid();
                    f.values()
                        .iter()
                        .enumerate()
                        .filter(move |(i, _)| g.x(*i) <= xp)
                        .map(|(_, &v)| (v - 1.0).abs())
                })
                .fold(0.0, f64::max);
            (xp, dev)
        })
        .collect();
    let mut sorted = deviations.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(TailReport {
        t_window,
        deviations,
        monotone,
    })
}
