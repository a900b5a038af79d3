//! Baseline hazards for the multiplicative model.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_INVERSE_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    /// `e^a0`
    Const,
    /// `e^a0 * t`
    Linear,
    /// `e^a0 / t`, zero below `epsilon`
    Inverse,
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Const => "const",
            BaselineKind::Linear => "linear",
            BaselineKind::Inverse => "inverse",
        })
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "const" | "constant" => Ok(BaselineKind::Const),
            "linear" => Ok(BaselineKind::Linear),
            "inverse" => Ok(BaselineKind::Inverse),
            other => Err(Error::InvalidConfig(format!("unknown baseline `{other}`"))),
        }
    }
}

/// Parent-independent hazard shared by every node, scaled by `e^log_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    kind: BaselineKind,
    log_scale: f64,
    epsilon: f64,
}

impl Baseline {
    pub fn new(kind: BaselineKind, log_scale: f64, epsilon: f64) -> Result<Self> {
        if !log_scale.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "baseline log-scale must be finite, got {log_scale}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "baseline epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Baseline {
            kind,
            log_scale,
            epsilon,
        })
    }

    pub fn constant(log_scale: f64) -> Result<Self> {
        Baseline::new(BaselineKind::Const, log_scale, DEFAULT_INVERSE_EPSILON)
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rate(&self, t: f64) -> f64 {
        let scale = self.log_scale.exp();
        match self.kind {
            BaselineKind::Const => scale,
            BaselineKind::Linear => scale * t.max(0.0),
            BaselineKind::Inverse => {
                if t >= self.epsilon {
                    scale / t
                } else {
                    0.0
                }
            }
        }
    }

    /// `ln rate(t)`; `-inf` where the rate vanishes.
    pub fn log_rate(&self, t: f64) -> f64 {
        match self.kind {
            BaselineKind::Const => self.log_scale,
            BaselineKind::Linear => self.log_scale + t.ln(),
            BaselineKind::Inverse => {
                if t >= self.epsilon {
                    self.log_scale - t.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Closed-form integral of the rate over `[a, b]` (0 when `b <= a`).
    #[inline]
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let scale = self.log_scale.exp();
        match self.kind {
            BaselineKind::Const => scale * (b - a),
            BaselineKind::Linear => scale * 0.5 * (b * b - a * a),
            BaselineKind::Inverse => scale * (b.max(self.epsilon) / a.max(self.epsilon)).ln(),
        }
    }

    /// Smallest `b >= a` with `integral(a, b) == amount`.
    pub fn invert(&self, a: f64, amount: f64) -> f64 {
        if !(amount > 0.0) {
            return a;
        }
        if amount.is_infinite() {
            return f64::INFINITY;
        }
        let r = amount * (-self.log_scale).exp();
        match self.kind {
            BaselineKind::Const => a + r,
            BaselineKind::Linear => (a * a + 2.0 * r).sqrt(),
            BaselineKind::Inverse => a.max(self.epsilon) * r.exp(),
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(a0={})", self.kind, self.log_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(a0: f64) -> Vec<Baseline> {
        [BaselineKind::Const, BaselineKind::Linear, BaselineKind::Inverse]
            .into_iter()
            .map(|k| Baseline::new(k, a0, 1e-3).unwrap())
            .collect()
    }

    #[test]
    fn integrals_are_additive_over_intervals() {
        for b in all(-0.7) {
            let whole = b.integral(0.0, 3.0);
            let split = b.integral(0.0, 1.2) + b.integral(1.2, 3.0);
            assert!((whole - split).abs() < 1e-12, "{b}");
        }
    }

    #[test]
    fn invert_undoes_integral() {
        for b in all(0.3) {
            for &a in &[0.0, 0.5, 2.0] {
                let amount = 0.8;
                let end = b.invert(a, amount);
                assert!((b.integral(a, end) - amount).abs() < 1e-12, "{b} from {a}");
            }
            assert_eq!(b.invert(1.0, 0.0), 1.0);
        }
    }

    #[test]
    fn inverse_is_zero_below_epsilon() {
        let b = Baseline::new(BaselineKind::Inverse, 0.0, 0.1).unwrap();
        assert_eq!(b.rate(0.05), 0.0);
        assert_eq!(b.integral(0.0, 0.1), 0.0);
        assert!((b.integral(0.0, 0.2) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(b.log_rate(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn const_unit_rate() {
        let b = Baseline::constant(0.0).unwrap();
        assert_eq!(b.rate(5.0), 1.0);
        assert_eq!(b.integral(1.0, 3.0), 2.0);
        assert_eq!(b.log_rate(2.0), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Baseline::new(BaselineKind::Inverse, 0.0, 0.0).is_err());
        assert!(Baseline::new(BaselineKind::Const, f64::INFINITY, 1e-3).is_err());
    }
}
