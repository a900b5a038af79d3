//! Time-shaping kernels for the additive model: how a parent's infection at
//! `t_parent` feeds the hazard of a child at time `t`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_POW_DELTA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// Constant kernel, exponential pairwise delays.
    Exp,
    /// `1 / (t - t_parent)` beyond a minimum delay, power-law delays.
    Pow,
    /// Linear kernel `t - t_parent`, Rayleigh pairwise delays.
    Ray,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Exp => "exp",
            Shape::Pow => "pow",
            Shape::Ray => "ray",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" => Ok(Shape::Exp),
            "pow" => Ok(Shape::Pow),
            "ray" => Ok(Shape::Ray),
            other => Err(Error::InvalidConfig(format!(
                "unknown shaping function `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingFunction {
    shape: Shape,
    delta: f64,
}

impl ShapingFunction {
    /// `delta` is the minimum delay below which the power-law kernel is 0.
    /// It is ignored by the other shapes but must still be positive.
    pub fn new(shape: Shape, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "shaping delta must be positive and finite, got {delta}"
            )));
        }
        Ok(ShapingFunction { shape, delta })
    }

    pub fn exp() -> Self {
        ShapingFunction {
            shape: Shape::Exp,
            delta: DEFAULT_POW_DELTA,
        }
    }

    pub fn pow(delta: f64) -> Result<Self> {
        ShapingFunction::new(Shape::Pow, delta)
    }

    pub fn ray() -> Self {
        ShapingFunction {
            shape: Shape::Ray,
            delta: DEFAULT_POW_DELTA,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Kernel value `gamma(t_parent; t)`; zero whenever `t <= t_parent`.
    #[inline]
    pub fn hazard(&self, t_parent: f64, t: f64) -> f64 {
        let dt = t - t_parent;
        if !(dt > 0.0) {
            return 0.0;
        }
        match self.shape {
            Shape::Exp => 1.0,
            Shape::Ray => dt,
            Shape::Pow => {
                if dt >= self.delta {
                    1.0 / dt
                } else {
                    0.0
                }
            }
        }
    }

    /// Integral of [`hazard`](Self::hazard) from `t_parent` to `t`.
    #[inline]
    pub fn cumulative(&self, t_parent: f64, t: f64) -> f64 {
        let dt = t - t_parent;
        if !(dt > 0.0) {
            return 0.0;
        }
        match self.shape {
            Shape::Exp => dt,
            Shape::Ray => 0.5 * dt * dt,
            Shape::Pow => {
                if dt >= self.delta {
                    (dt / self.delta).ln()
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for ShapingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::Pow => write!(f, "pow(delta={})", self.delta),
            s => write!(f, "{s}"),
        }
    }
}

pub fn shaping_hazard(f: &ShapingFunction, t_parent: f64, t: f64) -> f64 {
    f.hazard(t_parent, t)
}

pub fn shaping_cumulative(f: &ShapingFunction, t_parent: f64, t: f64) -> f64 {
    f.cumulative(t_parent, t)
}
