//! Growth-rate paths `t -> a(t)` and their ergodic mean functionals.

mod blocks;
mod linear;
mod means;
mod noise;
pub mod switching;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use blocks::{build_b, PiecewiseB};
use linear::PiecewiseLinear;
pub use means::{estimate_means, mean_ladder, windowed_mean, MeanEstimate};
pub use noise::{NoiseParams, NoisePath};

use crate::fmt::sig;
use crate::{Error, Result};

/// What a [`CoefficientPath`] was built from; recorded in exported files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathKind {
    Constant { a: f64 },
    Periodic { mean: f64, amplitude: f64, period: f64 },
    Switching,
    NoiseEquilibrium { noise: NoiseParams, t_trunc: f64 },
    Tabulated,
}

#[derive(Debug, Clone)]
enum Shape {
    Constant(f64),
    Periodic { mean: f64, amplitude: f64, period: f64 },
    Linear(Arc<PiecewiseLinear>),
}

/// A strictly positive growth rate on a finite time range.
///
/// Paths are immutable; [`shift`](Self::shift) returns a translated view
/// sharing the underlying samples. Internally every evaluation happens at
/// `t + offset` in the coordinates the path was built in, so that
/// `shift(p, s).eval(t)` and `p.eval(t + s)` perform identical arithmetic.
#[derive(Debug, Clone)]
pub struct CoefficientPath {
    kind: PathKind,
    shape: Shape,
    /// Range in base coordinates.
    lo: f64,
    hi: f64,
    offset: f64,
}

/// Constant rate `a > 0` on `[t_lo, t_hi]`.
pub fn make_constant(a: f64, t_lo: f64, t_hi: f64) -> Result<CoefficientPath> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::param(format!("constant rate must be positive, got {a}")));
    }
    CoefficientPath::new(PathKind::Constant { a }, Shape::Constant(a), t_lo, t_hi)
}

/// `a(t) = mean + amplitude * sin(2 pi t / period)`.
pub fn make_periodic(
    mean: f64,
    amplitude: f64,
    period: f64,
    t_lo: f64,
    t_hi: f64,
) -> Result<CoefficientPath> {
    if !(mean - amplitude.abs() > 0.0) {
        return Err(Error::param(format!(
            "periodic rate needs mean > |amplitude|, got mean {mean}, amplitude {amplitude}"
        )));
    }
    if !(period > 0.0) {
        return Err(Error::param("period must be positive"));
    }
    CoefficientPath::new(
        PathKind::Periodic {
            mean,
            amplitude,
            period,
        },
        Shape::Periodic {
            mean,
            amplitude,
            period,
        },
        t_lo,
        t_hi,
    )
}

/// The explicit oscillating coefficient with least mean 1 and greatest mean 2.
pub fn make_switching(t_lo: f64, t_hi: f64) -> Result<CoefficientPath> {
    let table = switching::table(t_lo.abs().max(t_hi.abs()))?;
    CoefficientPath::new(PathKind::Switching, Shape::Linear(Arc::new(table)), t_lo, t_hi)
}

/// Linear interpolation through uniformly spaced positive samples.
pub fn make_tabulated(t0: f64, dt: f64, values: Vec<f64>) -> Result<CoefficientPath> {
    tabulated_with_kind(PathKind::Tabulated, t0, dt, values)
}

pub(crate) fn tabulated_with_kind(
    kind: PathKind,
    t0: f64,
    dt: f64,
    values: Vec<f64>,
) -> Result<CoefficientPath> {
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::param("tabulated rates must be positive and finite"));
    }
    let table = PiecewiseLinear::uniform(t0, dt, values)?;
    let (lo, hi) = (table.start(), table.end());
    CoefficientPath::new(kind, Shape::Linear(Arc::new(table)), lo, hi)
}

/// The random equilibrium `t -> Y(theta_t omega)` of the real-noise logistic
/// equation, tabulated on the noise grid over `[t_lo, t_hi]`.
///
/// `t_trunc` defaults to the truncation whose tail bound is below `1e-8`.
pub fn equilibrium_path(
    noise: &NoisePath,
    t_lo: f64,
    t_hi: f64,
    t_trunc: Option<f64>,
) -> Result<CoefficientPath> {
    let t_trunc = t_trunc.unwrap_or_else(|| crate::equilibria::default_truncation(noise));
    let (t0, values) = crate::equilibria::equilibrium_samples(noise, t_lo, t_hi, t_trunc)?;
    let kind = PathKind::NoiseEquilibrium {
        noise: noise.params().copied().unwrap_or(NoiseParams {
            seed: 0,
            kappa: f64::NAN,
            sigma: f64::NAN,
            xi_max: f64::NAN,
            dt: noise.dt(),
        }),
        t_trunc,
    };
    tabulated_with_kind(kind, t0, noise.dt(), values)
}

impl CoefficientPath {
    fn new(kind: PathKind, shape: Shape, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param(format!("empty or non-finite range [{lo}, {hi}]")));
        }
        if let Shape::Linear(table) = &shape {
            if lo < table.start() || hi > table.end() {
                return Err(Error::param("range exceeds tabulated samples"));
            }
        }
        Ok(Self {
            kind,
            shape,
            lo,
            hi,
            offset: 0.0,
        })
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    /// Accumulated time translation.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Evaluation range in this path's own time.
    pub fn range(&self) -> (f64, f64) {
        (self.lo - self.offset, self.hi - self.offset)
    }

    pub fn covers(&self, s: f64, t: f64) -> bool {
        let (lo, hi) = self.range();
        s >= lo && t <= hi
    }

    /// Time translation: `shift(p, s).eval(t) == p.eval(t + s)`.
    pub fn shift(&self, s: f64) -> Self {
        Self {
            offset: self.offset + s,
            ..self.clone()
        }
    }

    /// Restricts the evaluation range (in this path's own time).
    pub fn restrict(&self, t_lo: f64, t_hi: f64) -> Result<Self> {
        let (lo, hi) = self.range();
        if t_lo < lo || t_hi > hi || !(t_hi > t_lo) {
            return Err(Error::param(format!(
                "cannot restrict [{lo}, {hi}] to [{t_lo}, {t_hi}]"
            )));
        }
        Ok(Self {
            lo: t_lo + self.offset,
            hi: t_hi + self.offset,
            ..self.clone()
        })
    }

    fn base(&self, t: f64) -> Result<f64> {
        let tb = t + self.offset;
        if !(tb >= self.lo && tb <= self.hi) {
            let (lo, hi) = self.range();
            return Err(Error::OutOfRange { t, lo, hi });
        }
        Ok(tb)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.shape_eval(self.base(t)?))
    }

    fn shape_eval(&self, tb: f64) -> f64 {
        match &self.shape {
            Shape::Constant(a) => *a,
            Shape::Periodic {
                mean,
                amplitude,
                period,
            } => {
                // phase reduction makes whole-period shifts exact on dyadic grids
                let phase = (tb / period).rem_euclid(1.0);
                mean + amplitude * (2.0 * PI * phase).sin()
            }
            Shape::Linear(p) => p.eval(tb),
        }
    }

    /// Primitive in base coordinates, up to a constant.
    fn shape_primitive(&self, tb: f64) -> f64 {
        match &self.shape {
            Shape::Constant(a) => a * tb,
            Shape::Periodic {
                mean,
                amplitude,
                period,
            } => {
                let w = 2.0 * PI / period;
                mean * tb - amplitude / w * (w * tb).cos()
            }
            Shape::Linear(p) => p.primitive(tb),
        }
    }

    /// `int_s^t a`. Exact for constant and piecewise-linear paths, closed
    /// form for periodic ones.
    pub fn integral(&self, s: f64, t: f64) -> Result<f64> {
        let (a, b) = (self.base(s)?, self.base(t)?);
        Ok(match &self.shape {
            Shape::Constant(c) => c * (b - a),
            Shape::Periodic {
                mean,
                amplitude,
                period,
            } => {
                let w = 2.0 * PI / period;
                mean * (b - a) - amplitude / w * ((w * b).cos() - (w * a).cos())
            }
            Shape::Linear(_) => self.shape_primitive(b) - self.shape_primitive(a),
        })
    }

    /// Maximum of `a` over `[s, t]`.
    pub fn max_on(&self, s: f64, t: f64) -> Result<f64> {
        let (a, b) = (self.base(s)?, self.base(t)?);
        Ok(match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Periodic {
                mean,
                amplitude,
                period,
            } => {
                // crest at phase pi/2 (or 3pi/2 for negative amplitude)
                let crest = if *amplitude >= 0.0 { 0.25 } else { 0.75 };
                let k = (a / period - crest).ceil();
                if (k + crest) * period <= b {
                    mean + amplitude.abs()
                } else {
                    self.shape_eval(a).max(self.shape_eval(b))
                }
            }
            Shape::Linear(p) => p.max_on(a, b),
        })
    }

    /// Minimum of `a` over `[s, t]`.
    pub fn min_on(&self, s: f64, t: f64) -> Result<f64> {
        let (a, b) = (self.base(s)?, self.base(t)?);
        Ok(match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Periodic {
                mean,
                amplitude,
                period,
            } => {
                let trough = if *amplitude >= 0.0 { 0.75 } else { 0.25 };
                let k = (a / period - trough).ceil();
                if (k + trough) * period <= b {
                    mean - amplitude.abs()
                } else {
                    self.shape_eval(a).min(self.shape_eval(b))
                }
            }
            Shape::Linear(p) => p.min_on(a, b),
        })
    }

    /// Native sample nodes strictly inside `(s, t)`, in this path's time.
    /// Empty for the analytic kinds.
    pub fn nodes_between(&self, s: f64, t: f64) -> Vec<f64> {
        match &self.shape {
            Shape::Linear(p) => {
                let (a, b) = (s + self.offset, t + self.offset);
                let k = p.knots();
                let i0 = k.partition_point(|&x| x <= a);
                let i1 = k.partition_point(|&x| x < b);
                k[i0.min(i1)..i1].iter().map(|x| x - self.offset).collect()
            }
            _ => Vec::new(),
        }
    }

    /// One-line description of the path for file headers.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        match &self.kind {
            PathKind::Constant { a } => write!(s, "kind=constant a={}", sig(*a)),
            PathKind::Periodic {
                mean,
                amplitude,
                period,
            } => write!(
                s,
                "kind=periodic mean={} amplitude={} period={}",
                sig(*mean),
                sig(*amplitude),
                sig(*period)
            ),
            PathKind::Switching => write!(s, "kind=switching"),
            PathKind::NoiseEquilibrium { noise, t_trunc } => write!(
                s,
                "kind=noise-equilibrium seed={} kappa={} sigma={} xi_max={} dt={} t_trunc={}",
                noise.seed,
                sig(noise.kappa),
                sig(noise.sigma),
                sig(noise.xi_max),
                sig(noise.dt),
                sig(*t_trunc)
            ),
            PathKind::Tabulated => write!(s, "kind=tabulated"),
        }
        .expect("write to String");
        let (lo, hi) = self.range();
        write!(s, " range=[{},{}] shift={}", sig(lo), sig(hi), sig(self.offset)).expect("write");
        s
    }

    /// Writes `(t, a(t))` rows on a uniform grid of step `dt` with a header
    /// comment describing the path.
    pub fn write_csv<W: Write>(&self, mut w: W, dt: f64) -> Result<()> {
        let (lo, hi) = self.range();
        writeln!(w, "# {}", self.describe())?;
        writeln!(w, "t,value")?;
        let n = ((hi - lo) / dt).floor() as usize;
        for i in 0..=n {
            let t = (lo + i as f64 * dt).min(hi);
            writeln!(w, "{},{}", sig(t), sig(self.eval(t)?))?;
        }
        Ok(())
    }
}

impl NoisePath {
    /// Writes `(t, xi(t))` on the sample grid, with the generator
    /// parameters in the header comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (lo, hi) = self.range();
        match self.params() {
            Some(p) => writeln!(
                w,
                "# kind=noise seed={} kappa={} sigma={} xi_max={} dt={} range=[{},{}]",
                p.seed,
                sig(p.kappa),
                sig(p.sigma),
                sig(p.xi_max),
                sig(p.dt),
                sig(lo),
                sig(hi)
            )?,
            None => writeln!(w, "# kind=noise-samples dt={} range=[{},{}]", sig(self.dt()), sig(lo), sig(hi))?,
        }
        writeln!(w, "t,value")?;
        for (t, v) in self.base_knots().iter().zip(self.samples()) {
            writeln!(w, "{},{}", sig(t - self.offset()), sig(*v))?;
        }
        Ok(())
    }
}
