//! Monotone parameter shifts `Λ(s)` between two asymptotic values.
//!
//! Profiles are evaluated in shift time `s = r·t`; the rate lives with the
//! nonautonomous system so one profile serves every rate of a sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    /// `(Δ/2)(tanh(Δs/2) + 1) + λ₋`
    Tanh,
    /// Chord from `(-τ, λ₋)` to `(τ, λ₊)`, constant outside.
    PiecewiseLinear,
    /// Frozen at `lambda_minus` (which must equal `lambda_plus`).
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ShiftProfile<T> {
    pub kind: ShiftKind,
    pub lambda_minus: T,
    pub lambda_plus: T,
    /// Closeness threshold defining `τ`.
    #[serde(default = "default_delta")]
    pub delta: T,
}

fn default_delta<T: Real>() -> T {
    T::lit(1e-3)
}

impl<T: Real> ShiftProfile<T> {
    pub fn tanh(lambda_minus: T, lambda_plus: T, delta: T) -> Self {
        Self { kind: ShiftKind::Tanh, lambda_minus, lambda_plus, delta }
    }

    pub fn piecewise_linear(lambda_minus: T, lambda_plus: T, delta: T) -> Self {
        Self { kind: ShiftKind::PiecewiseLinear, lambda_minus, lambda_plus, delta }
    }

    pub fn constant(value: T) -> Self {
        Self { kind: ShiftKind::Constant, lambda_minus: value, lambda_plus: value, delta: default_delta() }
    }

    /// `Δ = λ₊ − λ₋`
    #[inline]
    pub fn span(&self) -> T {
        self.lambda_plus - self.lambda_minus
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.lambda_minus.is_finite() && self.lambda_plus.is_finite() && self.delta.is_finite();
        if !finite {
            return Err(Error::invalid("shift limits and delta must be finite"));
        }
        match self.kind {
            ShiftKind::Constant => {
                if self.lambda_minus != self.lambda_plus {
                    return Err(Error::invalid("constant shift requires lambda_minus == lambda_plus"));
                }
            }
            ShiftKind::Tanh | ShiftKind::PiecewiseLinear => {
                if !(self.lambda_minus < self.lambda_plus) {
                    return Err(Error::invalid(format!(
                        "shift requires lambda_minus < lambda_plus (got {} and {})",
                        self.lambda_minus, self.lambda_plus
                    )));
                }
                if !(self.delta > T::zero()) {
                    return Err(Error::invalid("shift delta must be positive"));
                }
                if self.kind == ShiftKind::PiecewiseLinear && !(self.delta < self.span() / T::lit(2.0)) {
                    return Err(Error::invalid(format!(
                        "piecewise-linear shift requires delta < (lambda_plus - lambda_minus)/2 (got {})",
                        self.delta
                    )));
                }
            }
        }
        Ok(())
    }

    /// Shift time `τ` at which the tanh profile is `δ`-close to its limits:
    /// `τ = (ln(Δ − δ) − ln δ)/Δ`.
    pub fn tau_threshold(&self) -> Result<T> {
        let span = self.span();
        if !(span > T::zero()) {
            return Err(Error::invalid("tau is undefined for a shift with lambda_minus >= lambda_plus"));
        }
        if !(self.delta > T::zero()) || !(self.delta < span) {
            return Err(Error::invalid(format!(
                "tau requires 0 < delta < lambda_plus - lambda_minus (delta = {}, span = {})",
                self.delta, span
            )));
        }
        Ok(((span - self.delta).ln() - self.delta.ln()) / span)
    }

    /// Parameter value at shift time `s`.
    pub fn eval(&self, s: T) -> T {
        let (lo, hi) = (self.lambda_minus, self.lambda_plus);
        let span = self.span();
        let two = T::lit(2.0);
        let value = match self.kind {
            ShiftKind::Constant => return lo,
            ShiftKind::Tanh => span / two * ((span * s / two).tanh() + T::one()) + lo,
            ShiftKind::PiecewiseLinear => {
                let tau = self.piecewise_tau();
                if s < -tau {
                    lo
                } else if s > tau {
                    hi
                } else {
                    (hi + lo) / two + span / (two * tau) * s
                }
            }
        };
        // rounding can overshoot the limits by an ulp
        value.max(lo).min(hi)
    }

    /// `dΛ/ds`. At the kinks of the piecewise-linear profile the interior
    /// slope is returned.
    pub fn derivative(&self, s: T) -> T {
        let span = self.span();
        let two = T::lit(2.0);
        match self.kind {
            ShiftKind::Constant => T::zero(),
            ShiftKind::Tanh => {
                let sech = T::one() / (span * s / two).cosh();
                span * span / T::lit(4.0) * sech * sech
            }
            ShiftKind::PiecewiseLinear => {
                let tau = self.piecewise_tau();
                if s.abs() <= tau {
                    span / (two * tau)
                } else {
                    T::zero()
                }
            }
        }
    }

    fn piecewise_tau(&self) -> T {
        // validated profiles always have a positive tau; fall back to a step
        self.tau_threshold().unwrap_or(T::zero()).max(T::min_positive_value())
    }
}
