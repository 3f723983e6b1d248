//! Per-agent convex cost families.
//!
//! Each family supplies closed forms for the cost, its derivative (the
//! marginal cost, in λ units) and the inverse of the derivative. Fitness is
//! the negated marginal cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family tag, used where only the kind of cost matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Quadratic,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Exponential => f.write_str("exponential"),
            Family::Quadratic => f.write_str("quadratic"),
        }
    }
}

/// Coefficients of one cost family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostKind {
    /// `a * exp((w - lower) / (upper - lower))`
    Exponential { a: f64 },
    /// `a/2 * (w - lower)^2 + b * w`
    Quadratic { a: f64, b: f64 },
}

/// One agent's cost function together with its box `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    kind: CostKind,
    lower: f64,
    upper: f64,
}

impl CostModel {
    pub fn exponential(a: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(CostKind::Exponential { a }, lower, upper)
    }

    pub fn quadratic(a: f64, b: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(CostKind::Quadratic { a, b }, lower, upper)
    }

    /// Quadratic written as `alpha * (w - lower)^2 + b * w`, i.e. `a = 2 alpha`.
    pub fn quadratic_from_alpha(alpha: f64, b: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::quadratic(2.0 * alpha, b, lower, upper)
    }

    pub fn new(kind: CostKind, lower: f64, upper: f64) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidCost(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match kind {
            CostKind::Exponential { a } => positive("a", a)?,
            CostKind::Quadratic { a, b } => {
                positive("a", a)?;
                positive("b", b)?;
            }
        }
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::InvalidCost(format!(
                "bounds must be finite, got [{lower}, {upper}]"
            )));
        }
        if lower < 0.0 {
            return Err(Error::InvalidCost(format!(
                "lower bound {lower} is negative"
            )));
        }
        if lower > upper {
            return Err(Error::InvalidCost(format!(
                "lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        if matches!(kind, CostKind::Exponential { .. }) && lower == upper {
            return Err(Error::InvalidCost(
                "exponential cost needs upper > lower".to_string(),
            ));
        }
        Ok(CostModel { kind, lower, upper })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn family(&self) -> Family {
        match self.kind {
            CostKind::Exponential { .. } => Family::Exponential,
            CostKind::Quadratic { .. } => Family::Quadratic,
        }
    }

    /// Leading coefficient `a`.
    pub fn a(&self) -> f64 {
        match self.kind {
            CostKind::Exponential { a } | CostKind::Quadratic { a, .. } => a,
        }
    }

    /// Linear coefficient `b` (quadratic family only).
    pub fn b(&self) -> Option<f64> {
        match self.kind {
            CostKind::Exponential { .. } => None,
            CostKind::Quadratic { b, .. } => Some(b),
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn in_box(&self, w: f64) -> bool {
        self.lower <= w && w <= self.upper
    }

    pub fn cost(&self, w: f64) -> f64 {
        match self.kind {
            CostKind::Exponential { a } => a * ((w - self.lower) / self.width()).exp(),
            CostKind::Quadratic { a, b } => {
                let d = w - self.lower;
                0.5 * a * d * d + b * w
            }
        }
    }

    /// Derivative of [`cost`](Self::cost).
    pub fn marginal(&self, w: f64) -> f64 {
        match self.kind {
            CostKind::Exponential { a } => {
                let u = self.width();
                a / u * ((w - self.lower) / u).exp()
            }
            CostKind::Quadratic { a, b } => a * (w - self.lower) + b,
        }
    }

    /// Payoff of the potential game: `-marginal(w)`.
    pub fn fitness(&self, w: f64) -> f64 {
        -self.marginal(w)
    }

    /// The unique `w` with `marginal(w) == lambda`. Not clamped to the box.
    pub fn inverse_marginal(&self, lambda: f64) -> Result<f64> {
        match self.kind {
            CostKind::Exponential { .. } => {
                if lambda > 0.0 {
                    Ok(self.inverse_marginal_log(lambda.ln()))
                } else {
                    Err(Error::NonpositiveLambda(lambda))
                }
            }
            CostKind::Quadratic { a, b } => Ok((lambda + a * self.lower - b) / a),
        }
    }

    /// Exponential inverse expressed in `ln lambda`; affine in its argument.
    ///
    /// For the quadratic family this exponentiates and defers to the linear form.
    pub fn inverse_marginal_log(&self, ln_lambda: f64) -> f64 {
        match self.kind {
            CostKind::Exponential { a } => {
                let u = self.width();
                self.lower + u * (ln_lambda - a.ln() + u.ln())
            }
            CostKind::Quadratic { a, b } => (ln_lambda.exp() + a * self.lower - b) / a,
        }
    }

    /// Marginal cost at the lower and upper bound.
    pub fn marginal_range(&self) -> (f64, f64) {
        (self.marginal(self.lower), self.marginal(self.upper))
    }

    /// Best response to a common marginal level, clamped to the box.
    pub fn clamped_response(&self, lambda: f64) -> f64 {
        let (lo, hi) = self.marginal_range();
        if lambda <= lo {
            self.lower
        } else if lambda >= hi {
            self.upper
        } else {
            // lambda > lo > 0 here, so the inverse exists for both families.
            self.inverse_marginal(lambda)
                .map(|w| w.clamp(self.lower, self.upper))
                .unwrap_or(self.lower)
        }
    }
}
