use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{Field, Grid1D};
use crate::{Error, Result};

/// Initial-data classes.
///
/// `Heaviside` is the step `1` left of `at`, `0` right of it, regularized
/// by a linear ramp over exactly one cell centred at `at`. `FrontLike` is
/// positive on the far left and vanishes right of `at`; `CompactBump` has
/// bounded support; `Exponential` is `min(1, e^{-mu (x - at)})`; `Cosine`
/// oscillates between `lo` and `hi` with the given period, peaking at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Heaviside {
        #[serde(default)]
        at: f64,
    },
    FrontLike {
        #[serde(default)]
        at: f64,
        plateau: f64,
        width: f64,
    },
    CompactBump {
        #[serde(default)]
        center: f64,
        half_width: f64,
        height: f64,
    },
    Constant {
        value: f64,
    },
    Exponential {
        mu: f64,
        #[serde(default)]
        at: f64,
    },
    Cosine {
        lo: f64,
        hi: f64,
        period: f64,
    },
    #[serde(rename = "custom-samples", alias = "samples")]
    Samples {
        values: Vec<f64>,
    },
}

impl InitialData {
    pub fn heaviside(at: f64) -> Self {
        Self::Heaviside { at }
    }
}

/// Samples `data` on `grid` at time 0.
pub fn init(data: &InitialData, grid: &Grid1D) -> Result<Field> {
    let dx = grid.dx();
    let values: Vec<f64> = match data {
        InitialData::Heaviside { at } => grid
            .nodes()
            .map(|x| (0.5 - (x - at) / dx).clamp(0.0, 1.0))
            .collect(),
        InitialData::FrontLike { at, plateau, width } => {
            if !(*plateau > 0.0) {
                return Err(Error::param("front-like plateau must be positive"));
            }
            if !(*width >= dx) {
                return Err(Error::param("front-like transition must span at least one cell"));
            }
            grid.nodes()
                .map(|x| plateau * ((at - x) / width).clamp(0.0, 1.0))
                .collect()
        }
        InitialData::CompactBump {
            center,
            half_width,
            height,
        } => {
            if !(*height >= 0.0) {
                return Err(Error::param("bump height must be nonnegative"));
            }
            if !(*half_width > 0.0)
                || center - half_width < grid.x_lo()
                || center + half_width > grid.x_hi()
            {
                return Err(Error::param("bump support must lie inside the grid"));
            }
            grid.nodes()
                .map(|x| {
                    let z = (x - center) / half_width;
                    if z.abs() < 1.0 {
                        height * (FRAC_PI_2 * z).cos().powi(2)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        InitialData::Constant { value } => {
            if !(*value >= 0.0) || !value.is_finite() {
                return Err(Error::param("constant initial value must be nonnegative"));
            }
            vec![*value; grid.len()]
        }
        InitialData::Exponential { mu, at } => {
            if !(*mu > 0.0) {
                return Err(Error::param("exponential decay rate must be positive"));
            }
            grid.nodes().map(|x| (-mu * (x - at)).exp().min(1.0)).collect()
        }
        InitialData::Cosine { lo, hi, period } => {
            if !(*lo >= 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::param("cosine data needs 0 <= lo <= hi"));
            }
            if !(*period > 0.0) {
                return Err(Error::param("cosine period must be positive"));
            }
            let k = 2.0 * std::f64::consts::PI / period;
            grid.nodes()
                .map(|x| lo + (hi - lo) * 0.5 * (1.0 + (k * x).cos()))
                .collect()
        }
        InitialData::Samples { values } => {
            if values.len() != grid.len() {
                return Err(Error::param(format!(
                    "{} samples for a grid of {} nodes",
                    values.len(),
                    grid.len()
                )));
            }
            if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::param("initial samples must be finite and nonnegative"));
            }
            values.clone()
        }
    };
    Field::new(*grid, values, 0.0)
}
