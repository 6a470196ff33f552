//! Front tracking and spreading-speed diagnostics.
//!
//! Fronts are located at level crossings of stored frames: the position at
//! level `l` is the rightmost down-crossing of `l`, interpolated linearly
//! between the bracketing nodes.

mod checks;
mod interval;
mod subadditivity;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use checks::{
    profile_ordering_check, tail_uniformity, takeover_verify, ProfileOrderingReport, ProfileRow, TailReport,
    TakeoverReport, TakeoverRow, TakeoverThresholds,
};
pub use interval::{
    default_shifts, probe_speed_interval, ProbeConfig, ProbeDecision, ProbeRegion, SpeedInterval,
};
pub use subadditivity::{
    front_positions_at, midpoint_refinement, subadditivity_check, PairViolation, SubadditivityReport,
};

use crate::fmt::sig;
use crate::kppsolve::{Field, Trajectory};
use crate::{Error, Result};

/// Front levels used throughout: the half level and the quarter level.
pub const DEFAULT_LEVELS: [f64; 2] = [0.5, 0.25];

/// Outcome of a level-crossing search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FrontOutcome {
    /// Crossing position in the field's own grid coordinates.
    At { x: f64 },
    NoFront,
}

impl FrontOutcome {
    pub fn position(self) -> Option<f64> {
        match self {
            FrontOutcome::At { x } => Some(x),
            FrontOutcome::NoFront => None,
        }
    }
}

/// Three-valued verdict shared by the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Confirmed,
    Inconclusive,
    Violated,
}

impl Verdict {
    /// Worst of two verdicts (violated > inconclusive > confirmed).
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Confirmed,
        }
    }
}

/// Rightmost down-crossing of `level` (grid coordinates of the field).
pub fn front_position(field: &Field, level: f64) -> FrontOutcome {
    crossing(field.values(), field.grid().x_lo(), field.grid().dx(), level)
}

pub(crate) fn crossing(values: &[f64], x_lo: f64, dx: f64, level: f64) -> FrontOutcome {
    for i in (0..values.len() - 1).rev() {
        let (a, b) = (values[i], values[i + 1]);
        if a >= level && b < level {
            let w = (a - level) / (a - b);
            return FrontOutcome::At {
                x: x_lo + (i as f64 + w) * dx,
            };
        }
    }
    FrontOutcome::NoFront
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub t: f64,
    pub frame_shift: f64,
    /// Lab-frame crossing per level; `None` marks a gap.
    pub x: Vec<Option<f64>>,
}

/// Level crossings of every stored frame of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub levels: Vec<f64>,
    pub samples: Vec<FrontSample>,
    pub provenance: String,
}

impl FrontTrace {
    /// Builds a trace from `(t, x)` pairs at a single level.
    pub fn from_points(level: f64, points: &[(f64, f64)]) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::param("trace times must be strictly increasing"));
        }
        Ok(Self {
            levels: vec![level],
            samples: points
                .iter()
                .map(|&(t, x)| FrontSample {
                    t,
                    frame_shift: 0.0,
                    x: vec![Some(x)],
                })
                .collect(),
            provenance: String::new(),
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Non-gap `(t, x)` pairs at level index `k` (lab frame).
    pub fn series(&self, k: usize) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.x.get(k).copied().flatten().map(|x| (s.t, x)))
            .collect()
    }

    /// As [`series`](Self::series) but in the coordinates of the moving frame.
    pub fn frame_series(&self, k: usize) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.x.get(k).copied().flatten().map(|x| (s.t, x - s.frame_shift)))
            .collect()
    }

    pub fn gaps(&self, k: usize) -> usize {
        self.samples.iter().filter(|s| s.x.get(k).copied().flatten().is_none()).count()
    }

    /// `t,x_<level>...` rows; gaps are empty cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if !self.provenance.is_empty() {
            writeln!(w, "# {}", self.provenance)?;
        }
        write!(w, "t")?;
        for l in &self.levels {
            write!(w, ",{}", level_column(*l))?;
        }
        writeln!(w)?;
        for s in &self.samples {
            write!(w, "{}", sig(s.t))?;
            for x in &s.x {
                match x {
                    Some(x) => write!(w, ",{}", sig(*x))?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn level_column(level: f64) -> String {
    if level == 0.5 {
        "x_half".into()
    } else if level == 0.25 {
        "x_quarter".into()
    } else {
        format!("x_{}", sig(level))
    }
}

/// Extracts the crossing of every level in every stored frame.
pub fn track(trajectory: &Trajectory, levels: &[f64]) -> Result<FrontTrace> {
    if levels.is_empty() || levels.iter().any(|l| !l.is_finite()) {
        return Err(Error::param("need at least one finite level"));
    }
    let samples = trajectory
        .frames()
        .iter()
        .map(|f| FrontSample {
            t: f.t(),
            frame_shift: f.frame_shift(),
            x: levels
                .iter()
                .map(|&l| front_position(f, l).position().map(|x| x + f.frame_shift()))
                .collect(),
        })
        .collect();
    Ok(FrontTrace {
        levels: levels.to_vec(),
        samples,
        provenance: String::new(),
    })
}

/// Portion of a trace discarded before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BurnIn {
    /// Drop this fraction of the traced time span.
    Fraction { fraction: f64 },
    /// Fit on exactly `[t_a, t_b]`.
    Window { t_a: f64, t_b: f64 },
}

impl Default for BurnIn {
    fn default() -> Self {
        BurnIn::Fraction { fraction: 0.25 }
    }
}

/// Shortest accepted fit window.
pub const MIN_FIT_WINDOW: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub stderr: f64,
    pub t_a: f64,
    pub t_b: f64,
    /// Root-mean-square residual of the fit.
    pub residual_norm: f64,
    pub samples: usize,
    /// `x(t_end)/t_end` at the last fitted sample.
    pub endpoint_ratio: f64,
}

/// Least-squares slope of the first level of `trace` over the fit window.
pub fn estimate_speed(trace: &FrontTrace, burn_in: BurnIn) -> Result<SpeedEstimate> {
    let series = trace.series(0);
    if series.is_empty() {
        return Err(Error::HorizonTooShort("trace has no crossings".into()));
    }
    let (t_a, t_b) = match burn_in {
        BurnIn::Fraction { fraction } => {
            if !(0.0..1.0).contains(&fraction) {
                return Err(Error::param("burn-in fraction must lie in [0, 1)"));
            }
            let t0 = trace.samples[0].t;
            let t1 = trace.samples.last().unwrap().t;
            (t0 + fraction * (t1 - t0), t1)
        }
        BurnIn::Window { t_a, t_b } => (t_a, t_b),
    };
    if !(t_b - t_a >= MIN_FIT_WINDOW) {
        return Err(Error::HorizonTooShort(format!(
            "fit window [{t_a}, {t_b}] shorter than {MIN_FIT_WINDOW}"
        )));
    }
    let pts: Vec<(f64, f64)> = series
        .into_iter()
        .filter(|&(t, _)| t >= t_a - 1e-9 && t <= t_b + 1e-9)
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::HorizonTooShort(format!("{n} samples in fit window")));
    }
    let nf = n as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    let speed = sxy / sxx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - xm - speed * (p.0 - tm)).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    let (tl, xl) = *pts.last().unwrap();
    Ok(SpeedEstimate {
        speed,
        stderr,
        t_a,
        t_b,
        residual_norm: (ssr / nf).sqrt(),
        samples: n,
        endpoint_ratio: if tl != 0.0 { xl / tl } else { f64::NAN },
    })
}
