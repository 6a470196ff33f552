//! Monotone finite-difference solver for `u_t = u_xx + a(t) u (1 - u)` on a
//! truncated line with zero-flux ends, in a fixed frame or in the frame
//! moving with `c(t) = (mu^2 + a(t))/mu`, where the equation reads
//! `v_t = v_xx + c(t) v_x + a(t) v (1 - v)`.

mod grid;
mod init;
mod io;
mod scheme;

use serde::{Deserialize, Serialize};

pub use grid::Grid1D;
pub use init::{init, InitialData};
pub use io::{read_binary, write_binary, write_csv, BINARY_MAGIC};

use crate::coeff::CoefficientPath;
use crate::{Error, Result};
use scheme::Stepper;

/// Grid samples of `u(t, .)`.
///
/// In a moving frame node `x_i` sits at lab position `x_i + frame_shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
    t: f64,
    frame_shift: f64,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param("field length does not match grid"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t, node: i });
        }
        Ok(Self {
            grid,
            values,
            t,
            frame_shift: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn frame_shift(&self) -> f64 {
        self.frame_shift
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Lab-frame position of node `i`.
    pub fn lab_x(&self, i: usize) -> f64 {
        self.grid.x(i) + self.frame_shift
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation at grid coordinate `x`; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let g = &self.grid;
        if !(x >= g.x_lo() && x <= g.x_hi()) {
            return None;
        }
        let s = (x - g.x_lo()) / g.dx();
        let i = (s.floor() as usize).min(g.len() - 2);
        let w = (s - i as f64).clamp(0.0, 1.0);
        Some(self.values[i] + w * (self.values[i + 1] - self.values[i]))
    }
}

/// Reference frame of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Frame {
    #[default]
    Fixed,
    /// Frame travelling with `c(t) = (mu^2 + a(t))/mu`.
    Moving { mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub dt: f64,
    pub frame: Frame,
    /// Store every `store_every`-th step (the first and last frames are
    /// always stored).
    pub store_every: usize,
    /// Level-1/2 crossings must stay this far from both ends; `0` disables
    /// the check.
    pub margin: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            frame: Frame::Fixed,
            store_every: 100,
            margin: 50.0,
        }
    }
}

impl SolveConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn store_every(mut self, n: usize) -> Self {
        self.store_every = n;
        self
    }

    pub fn margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    fn validate(&self) -> Result<Option<f64>> {
        if !(self.dt > 0.0) {
            return Err(Error::param("time step must be positive"));
        }
        if self.store_every == 0 {
            return Err(Error::param("store stride must be at least 1"));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::param("front margin must be nonnegative"));
        }
        match self.frame {
            Frame::Fixed => Ok(None),
            Frame::Moving { mu } if mu > 0.0 => Ok(Some(mu)),
            Frame::Moving { mu } => Err(Error::param(format!("frame exponent must be positive, got {mu}"))),
        }
    }
}

/// Stored frames of one solve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    frames: Vec<Field>,
    dt: f64,
    frame: Frame,
}

impl Trajectory {
    pub(crate) fn from_frames(frames: Vec<Field>, dt: f64, frame: Frame) -> Self {
        Self { frames, dt, frame }
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn first(&self) -> &Field {
        &self.frames[0]
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("trajectory holds at least one frame")
    }

    pub fn grid(&self) -> &Grid1D {
        self.frames[0].grid()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Stored frame closest to `t`.
    pub fn nearest(&self, t: f64) -> &Field {
        self.frames
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .unwrap()
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }
}

/// Advances `field` by one step of size `dt`.
pub fn step(field: &Field, path: &CoefficientPath, dt: f64, frame: Frame) -> Result<Field> {
    let mu = SolveConfig::with_dt(dt).frame(frame).validate()?;
    let mut out = field.clone();
    let mut stepper = Stepper::new(field.grid, dt, mu);
    let shift = stepper.advance(&mut out.values, path, field.t)?;
    out.t = field.t + dt;
    out.frame_shift += shift;
    check_finite(&out)?;
    Ok(out)
}

fn check_finite(f: &Field) -> Result<()> {
    match f.values.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::NonFinite { t: f.t, node }),
        None => Ok(()),
    }
}

/// Positions (grid coordinates) where the field crosses `level`.
pub(crate) fn crossings(values: &[f64], grid: &Grid1D, level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..values.len() - 1 {
        let (a, b) = (values[i] - level, values[i + 1] - level);
        if (a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0) {
            out.push(grid.x(i) + grid.dx() * a / (a - b));
        }
    }
    out
}

fn check_margin(f: &Field, margin: f64) -> Result<()> {
    if margin <= 0.0 {
        return Ok(());
    }
    let g = f.grid;
    for x in crossings(&f.values, &g, 0.5) {
        if x < g.x_lo() + margin || x > g.x_hi() - margin {
            return Err(Error::MarginBreach {
                t: f.t,
                x,
                x_lo: g.x_lo(),
                x_hi: g.x_hi(),
                margin,
            });
        }
    }
    Ok(())
}

/// Solves from `init` (at its own time stamp) to `t_end`.
pub fn solve(init: &Field, path: &CoefficientPath, t_end: f64, config: &SolveConfig) -> Result<Trajectory> {
    let mu = config.validate()?;
    let t0 = init.t;
    if !(t_end >= t0) {
        return Err(Error::param(format!("end time {t_end} before start {t0}")));
    }
    if !path.covers(t0, t_end) {
        let (lo, hi) = path.range();
        return Err(Error::param(format!(
            "path range [{lo}, {hi}] does not cover [{t0}, {t_end}]"
        )));
    }
    check_finite(init)?;
    check_margin(init, config.margin)?;

    let span = t_end - t0;
    let n_steps = if span > 0.0 {
        ((span / config.dt) - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    let mut stepper = Stepper::new(init.grid, config.dt, mu);
    let mut current = init.clone();
    let mut frames = vec![current.clone()];
    for k in 1..=n_steps {
        let t = t0 + (k - 1) as f64 * config.dt;
        let last = k == n_steps;
        if last {
            let h = t_end - t;
            if (h - config.dt).abs() > 1e-12 * config.dt {
                stepper = Stepper::new(init.grid, h, mu);
            }
        }
        let t_next = if last { t_end } else { t + config.dt };
        let shift = stepper.advance_to(&mut current.values, path, t, t_next)?;
        current.frame_shift += shift;
        current.t = if last { t_end } else { t0 + k as f64 * config.dt };
        if last || k % config.store_every == 0 {
            check_finite(&current)?;
            check_margin(&current, config.margin)?;
            frames.push(current.clone());
        }
    }
    Ok(Trajectory::from_frames(frames, config.dt, config.frame))
}

/// [`solve`] in the frame moving with `c(t) = (mu^2 + a(t))/mu`.
///
/// When the frame outruns the front, the zero-flux right end holds the
/// far-field values in place instead of letting them flow out, and they grow
/// like `e^{int a}`; keep the right end far enough ahead of the front that
/// they stay negligible over the horizon.
pub fn solve_moving_frame(
    init: &Field,
    path: &CoefficientPath,
    mu: f64,
    t_end: f64,
    config: &SolveConfig,
) -> Result<Trajectory> {
    solve(init, path, t_end, &config.frame(Frame::Moving { mu }))
}

/// Right end of a domain that keeps a front started near 0 inside the
/// safety margin up to `t_end`: `2 sqrt(a_high) t_end * 1.1 + margin`.
pub fn recommend_x_hi(t_end: f64, a_high: f64, margin: f64) -> f64 {
    2.0 * a_high.sqrt() * t_end * 1.1 + margin
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::make_constant;
    use crate::equilibria::logistic_solution;

    fn grid() -> Grid1D {
        Grid1D::with_spacing(-20.0, 20.0, 0.1).unwrap()
    }

    #[test]
    fn equilibria_are_fixed() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let g = grid();
        let zero = init(&InitialData::Constant { value: 0.0 }, &g).unwrap();
        let one = init(&InitialData::Constant { value: 1.0 }, &g).unwrap();
        let z = step(&zero, &p, 0.01, Frame::Fixed).unwrap();
        assert!(z.values().iter().all(|&u| u == 0.0));
        let o = step(&one, &p, 0.01, Frame::Fixed).unwrap();
        assert!(o.values().iter().all(|&u| (u - 1.0).abs() < 1e-15));
        let o = step(&one, &p, 0.01, Frame::Moving { mu: 1.0 }).unwrap();
        assert!(o.values().iter().all(|&u| (u - 1.0).abs() < 1e-15));
    }

    #[test]
    fn one_step_matches_logistic() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let f = init(&InitialData::Constant { value: 0.5 }, &grid()).unwrap();
        let s = step(&f, &p, 1e-3, Frame::Fixed).unwrap();
        let exact = logistic_solution(0.5, &p, 1e-3).unwrap();
        assert!(s.values().iter().all(|u| (u - exact).abs() < 1e-5));
    }

    #[test]
    fn homogeneous_solve_matches_closed_form() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let f = init(&InitialData::Constant { value: 2.0 }, &grid()).unwrap();
        let traj = solve(&f, &p, 5.0, &SolveConfig::with_dt(1e-4).store_every(500).margin(0.0)).unwrap();
        for fr in traj.frames() {
            let t = fr.t();
            let exact = 2.0 * t.exp() / (1.0 + 2.0 * (t.exp() - 1.0));
            let spread = fr.max() - fr.min();
            assert!(spread < 1e-10);
            assert!((fr.values()[0] - exact).abs() < 1e-4);
        }
        assert_eq!(traj.last().t(), 5.0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let f = init(&InitialData::Constant { value: 0.0 }, &grid()).unwrap();
        let traj = solve(&f, &p, 2.0, &SolveConfig::default().margin(0.0)).unwrap();
        assert!(traj.frames().iter().all(|fr| fr.max() == 0.0));
    }

    #[test]
    fn monotonicity_violation_aborts() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let f = init(&InitialData::Constant { value: 50.0 }, &grid()).unwrap();
        assert!(matches!(
            solve(&f, &p, 1.0, &SolveConfig::with_dt(0.01).margin(0.0)),
            Err(Error::Monotonicity { .. })
        ));
    }

    #[test]
    fn margin_breach_aborts() {
        let p = make_constant(1.0, 0.0, 100.0).unwrap();
        let f = init(&InitialData::heaviside(0.0), &grid()).unwrap();
        let err = solve(&f, &p, 20.0, &SolveConfig::with_dt(0.01).store_every(10).margin(5.0)).unwrap_err();
        assert!(matches!(err, Error::MarginBreach { .. }), "{err}");
    }

    #[test]
    fn path_must_cover_horizon() {
        let p = make_constant(1.0, 0.0, 1.0).unwrap();
        let f = init(&InitialData::Constant { value: 0.5 }, &grid()).unwrap();
        assert!(solve(&f, &p, 2.0, &SolveConfig::default()).is_err());
    }

    #[test]
    fn short_last_step_lands_on_end_time() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let f = init(&InitialData::Constant { value: 0.5 }, &grid()).unwrap();
        let traj = solve(&f, &p, 1.0025, &SolveConfig::with_dt(0.01).margin(0.0)).unwrap();
        assert_eq!(traj.last().t(), 1.0025);
        let exact = logistic_solution(0.5, &p, 1.0025).unwrap();
        assert!((traj.last().values()[5] - exact).abs() < 1e-3);
    }

    #[test]
    fn moving_frame_tracks_shift() {
        let p = make_constant(1.0, 0.0, 10.0).unwrap();
        let f = init(&InitialData::Constant { value: 0.5 }, &grid()).unwrap();
        let traj = solve_moving_frame(&f, &p, 2.0, 4.0, &SolveConfig::with_dt(0.01).margin(0.0)).unwrap();
        // c = (4 + 1)/2 = 2.5
        assert!((traj.last().frame_shift() - 10.0).abs() < 1e-9);
    }
}
