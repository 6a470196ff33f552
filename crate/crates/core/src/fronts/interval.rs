use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientPath;
use crate::kppsolve::{init, solve, Field, Grid1D, InitialData, SolveConfig};
use crate::{Error, Result};

/// Which part of the line counts as "inside" `c t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeRegion {
    /// `|x| <= c t` inside, `|x| >= c t` outside (compactly supported data).
    Symmetric,
    /// `x <= c t` inside, `x >= c t` outside (front-like data).
    OneSided,
}

impl ProbeRegion {
    pub fn for_data(data: &InitialData) -> Self {
        match data {
            InitialData::CompactBump { .. } => ProbeRegion::Symmetric,
            _ => ProbeRegion::OneSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub grid: Grid1D,
    pub solve: SolveConfig,
    pub eps_spread: f64,
    pub eps_vanish: f64,
}

impl ProbeConfig {
    pub fn new(grid: Grid1D, solve: SolveConfig) -> Self {
        Self {
            grid,
            solve,
            eps_spread: 0.9,
            eps_vanish: 0.05,
        }
    }
}

/// Inner minimum and outer maximum at one `(c, shift)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeDecision {
    pub c: f64,
    pub shift: f64,
    pub inner_min: f64,
    pub outer_max: f64,
    pub spread: bool,
    pub vanish: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedDecision {
    pub c: f64,
    /// Spread for every shift.
    pub spread: bool,
    /// Vanished for every shift.
    pub vanish: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedInterval {
    /// Largest `c` such that every probe speed up to it spreads.
    pub c_lo: Option<f64>,
    /// Smallest `c` such that every probe speed from it on vanishes.
    pub c_hi: Option<f64>,
    pub t_probe: f64,
    pub region: ProbeRegion,
    pub eps_spread: f64,
    pub eps_vanish: f64,
    pub c_grid: Vec<f64>,
    pub shifts: Vec<f64>,
    pub speeds: Vec<SpeedDecision>,
    pub decisions: Vec<ProbeDecision>,
    /// False when spreading or vanishing is not monotone in `c`, which
    /// usually means `t_probe` is too short.
    pub monotone: bool,
}

/// `n` shifts evenly spread over `[0, scale)`.
pub fn default_shifts(n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|k| scale * k as f64 / n as f64).collect()
}

/// Classifies each probe speed by solving from `u0` under every shifted
/// path up to `t_probe`.
pub fn probe_speed_interval(
    path: &CoefficientPath,
    u0: &InitialData,
    c_grid: &[f64],
    shifts: &[f64],
    t_probe: f64,
    config: &ProbeConfig,
) -> Result<SpeedInterval> {
    if c_grid.is_empty() || shifts.is_empty() {
        return Err(Error::param("probe needs at least one speed and one shift"));
    }
    if c_grid.windows(2).any(|w| !(w[1] > w[0])) || c_grid[0] < 0.0 {
        return Err(Error::param("probe speeds must be nonnegative and increasing"));
    }
    if !(t_probe > 0.0) {
        return Err(Error::param("probe time must be positive"));
    }
    let region = ProbeRegion::for_data(u0);
    let g = config.grid;
    let reach = c_grid.last().unwrap() * t_probe;
    if reach > g.x_hi() || (region == ProbeRegion::Symmetric && -reach < g.x_lo()) {
        return Err(Error::DomainTooSmall(format!(
            "probe reach {reach} exceeds domain [{}, {}]",
            g.x_lo(),
            g.x_hi()
        )));
    }
    let start = init(u0, &g)?;
    let finals: Vec<Field> = shifts
        .par_iter()
        .map(|&s| {
            let p = path.shift(s);
            solve(&start, &p, t_probe, &config.solve).map(|tr| tr.last().clone())
        })
        .collect::<Result<_>>()?;

    let mut decisions = Vec::with_capacity(c_grid.len() * shifts.len());
    let mut speeds = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        let edge = c * t_probe;
        let mut all_spread = true;
        let mut all_vanish = true;
        for (f, &shift) in finals.iter().zip(shifts) {
            let (inner_min, outer_max) = region_extrema(f, edge, region);
            let spread = inner_min >= config.eps_spread;
            let vanish = outer_max <= config.eps_vanish;
            all_spread &= spread;
            all_vanish &= vanish;
            decisions.push(ProbeDecision {
                c,
                shift,
                inner_min,
                outer_max,
                spread,
                vanish,
            });
        }
        speeds.push(SpeedDecision {
            c,
            spread: all_spread,
            vanish: all_vanish,
        });
    }

    let n_spread = speeds.iter().take_while(|d| d.spread).count();
    let n_vanish = speeds.iter().rev().take_while(|d| d.vanish).count();
    let monotone = speeds.iter().filter(|d| d.spread).count() == n_spread
        && speeds.iter().filter(|d| d.vanish).count() == n_vanish
        && n_spread + n_vanish <= speeds.len();
    Ok(SpeedInterval {
        c_lo: n_spread.checked_sub(1).map(|i| speeds[i].c),
        c_hi: (n_vanish > 0).then(|| speeds[speeds.len() - n_vanish].c),
        t_probe,
        region,
        eps_spread: config.eps_spread,
        eps_vanish: config.eps_vanish,
        c_grid: c_grid.to_vec(),
        shifts: shifts.to_vec(),
        speeds,
        decisions,
        monotone,
    })
}

/// `(min inside, max outside)` of `edge` in lab coordinates. Empty regions
/// contribute `+inf` / `0` respectively.
fn region_extrema(f: &Field, edge: f64, region: ProbeRegion) -> (f64, f64) {
    let mut inner = f64::INFINITY;
    let mut outer: f64 = 0.0;
    for (i, &u) in f.values().iter().enumerate() {
        let x = f.lab_x(i);
        let d = match region {
            ProbeRegion::Symmetric => x.abs(),
            ProbeRegion::OneSided => x,
        };
        if d <= edge {
            inner = inner.min(u);
        }
        if d >= edge {
            outer = outer.max(u);
        }
    }
    // a symmetric region narrower than a cell holds no node
    if inner == f64::INFINITY {
        inner = f.interpolate(-f.frame_shift()).unwrap_or(f64::INFINITY);
    }
    (inner, outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::make_constant;

    #[test]
    fn constant_rate_brackets_two() {
        let p = make_constant(1.0, 0.0, 100.0).unwrap();
        let g = Grid1D::with_spacing(-120.0, 120.0, 0.2).unwrap();
        let cfg = ProbeConfig::new(g, SolveConfig::with_dt(0.02).store_every(1000).margin(10.0));
        let bump = InitialData::CompactBump {
            center: 0.0,
            half_width: 2.0,
            height: 1.0,
        };
        let cs: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
        let iv = probe_speed_interval(&p, &bump, &cs, &[0.0, 1.0], 40.0, &cfg).unwrap();
        assert!(iv.monotone);
        let (lo, hi) = (iv.c_lo.unwrap(), iv.c_hi.unwrap());
        assert!(lo <= hi);
        assert!(lo >= 1.5 && hi <= 2.5, "[{lo}, {hi}]");
        assert!(iv.speeds[0].spread);
        assert_eq!(iv.decisions.len(), cs.len() * 2);
    }

    #[test]
    fn reach_beyond_domain_is_rejected() {
        let p = make_constant(1.0, 0.0, 100.0).unwrap();
        let g = Grid1D::with_spacing(-10.0, 10.0, 0.5).unwrap();
        let cfg = ProbeConfig::new(g, SolveConfig::default());
        let e = probe_speed_interval(&p, &InitialData::heaviside(0.0), &[1.0, 3.0], &[0.0], 5.0, &cfg);
        assert!(matches!(e, Err(Error::DomainTooSmall(_))));
    }
}
