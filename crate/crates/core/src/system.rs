//! The Rössler vector field, frozen and with a shifted `a` parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::OdeSystem;
use crate::linalg::Mat3;
use crate::scalar::Real;
use crate::shift::ShiftProfile;

/// A point in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> State<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn max_norm(&self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

impl<T: Real> From<[T; 3]> for State<T> {
    fn from(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<T: Real> From<State<T>> for [T; 3] {
    fn from(s: State<T>) -> Self {
        s.to_array()
    }
}

/// Parameters of the frozen system
/// `ẋ = −y − z, ẏ = x + a y, ż = b + z (x − c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RosslerParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Default for RosslerParams<T> {
    fn default() -> Self {
        Self { a: T::lit(0.2), b: T::lit(0.2), c: T::lit(5.7) }
    }
}

/// Equilibria of the frozen system.
///
/// `inner` is the one with the smaller scale factor `|ζ|` (the equilibrium
/// that undergoes the Hopf bifurcation). `outer` is absent when `a = 0`,
/// where the quadratic for `ζ` degenerates to a linear equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibria<T> {
    pub inner: State<T>,
    pub outer: Option<State<T>>,
}

impl<T: Real> RosslerParams<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn with_a(self, a: T) -> Self {
        Self { a, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_finite() && self.b.is_finite() && self.c.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("Rössler parameters must be finite"))
        }
    }

    #[inline]
    pub fn vector_field(&self, s: &[T; 3]) -> [T; 3] {
        let [x, y, z] = *s;
        [-y - z, x + self.a * y, self.b + z * (x - self.c)]
    }

    #[inline]
    pub fn jacobian(&self, s: &[T; 3]) -> Mat3<T> {
        let (zero, one) = (T::zero(), T::one());
        [[zero, -one, -one], [one, self.a, zero], [s[2], zero, s[0] - self.c]]
    }

    /// `div f = a + x − c`
    #[inline]
    pub fn divergence(&self, s: &[T; 3]) -> T {
        self.a + s[0] - self.c
    }

    /// Equilibria `ζ (a, −1, 1)` with `a ζ² − c ζ + b = 0`.
    pub fn equilibria(&self) -> Result<Equilibria<T>> {
        let RosslerParams { a, b, c } = *self;
        let point = |zeta: T| State::new(a * zeta, -zeta, zeta);
        if a == T::zero() {
            if c == T::zero() {
                return Err(Error::invalid("a = c = 0: the frozen system has no equilibria"));
            }
            return Ok(Equilibria { inner: point(b / c), outer: None });
        }
        let disc = c * c - T::lit(4.0) * a * b;
        if disc < T::zero() {
            return Err(Error::NoRealEquilibria { discriminant: disc.to_f64_lossy() });
        }
        // q = (c ± √disc)/2 with the sign of c avoids cancellation; the roots are q/a and b/q
        let sign = if c >= T::zero() { T::one() } else { -T::one() };
        let q = (c + sign * disc.sqrt()) / T::lit(2.0);
        let (z1, z2) = if q == T::zero() { (T::zero(), T::zero()) } else { (q / a, b / q) };
        let (inner, outer) = if z1.abs() <= z2.abs() { (z1, z2) } else { (z2, z1) };
        Ok(Equilibria { inner: point(inner), outer: Some(point(outer)) })
    }
}

impl<T: Real> OdeSystem<T, 3> for RosslerParams<T> {
    #[inline]
    fn rhs(&self, _t: T, y: &[T; 3]) -> [T; 3] {
        self.vector_field(y)
    }
}

/// Rössler system whose `a` follows `shift` evaluated at `rate · t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct NonautonomousSpec<T> {
    pub b: T,
    pub c: T,
    pub shift: ShiftProfile<T>,
    pub rate: T,
}

impl<T: Real> NonautonomousSpec<T> {
    pub fn new(b: T, c: T, shift: ShiftProfile<T>, rate: T) -> Self {
        Self { b, c, shift, rate }
    }

    pub fn with_rate(&self, rate: T) -> Self {
        Self { rate, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        self.shift.validate()?;
        if !(self.rate > T::zero()) || !self.rate.is_finite() {
            return Err(Error::invalid(format!("rate must be positive and finite (got {})", self.rate)));
        }
        RosslerParams::new(self.shift.lambda_minus, self.b, self.c).validate()
    }

    /// Frozen parameters at time `t`.
    #[inline]
    pub fn params_at(&self, t: T) -> RosslerParams<T> {
        RosslerParams::new(self.shift.eval(self.rate * t), self.b, self.c)
    }

    pub fn past_params(&self) -> RosslerParams<T> {
        RosslerParams::new(self.shift.lambda_minus, self.b, self.c)
    }

    pub fn future_params(&self) -> RosslerParams<T> {
        RosslerParams::new(self.shift.lambda_plus, self.b, self.c)
    }

    #[inline]
    pub fn vector_field(&self, t: T, s: &[T; 3]) -> [T; 3] {
        self.params_at(t).vector_field(s)
    }
}

impl<T: Real> OdeSystem<T, 3> for NonautonomousSpec<T> {
    #[inline]
    fn rhs(&self, t: T, y: &[T; 3]) -> [T; 3] {
        self.vector_field(t, y)
    }
}
