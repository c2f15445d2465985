//! Dormand–Prince 5(4) integration with dense output and event location.
//!
//! The stepper follows Hairer, Nørsett & Wanner (DOPRI5): fifth-order
//! propagation, embedded fourth-order error estimate, first-same-as-last
//! stage reuse and the fourth-order continuous extension. Events are located
//! on the continuous extension, so they cost no extra field evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem<T, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N];
}

impl<T, F, const N: usize> OdeSystem<T, N> for F
where
    F: Fn(T, &[T; N]) -> [T; N],
{
    #[inline]
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub h_max: T,
    /// Attempted steps (accepted and rejected) before giving up.
    pub max_steps: u64,
    /// Max-norm beyond which a trajectory counts as escaped.
    pub escape_radius: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rtol: T::tol_floor(1e-12, 100.0),
            atol: T::tol_floor(1e-12, 100.0),
            h_init: T::lit(1e-3),
            h_max: T::lit(0.1),
            max_steps: 100_000_000,
            escape_radius: T::lit(1e4),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(self, rtol: T, atol: T) -> Self {
        Self { rtol, atol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !(positive(self.rtol) && positive(self.atol)) {
            return Err(Error::invalid("integrator tolerances must be positive"));
        }
        if !(positive(self.h_init) && positive(self.h_max)) {
            return Err(Error::invalid("integrator step sizes must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        if !(self.escape_radius > T::zero()) {
            return Err(Error::invalid("escape_radius must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Surface value goes from non-positive to positive.
    Rising,
    Falling,
    Both,
}

type Surface<'a, T, const N: usize> = Box<dyn Fn(T, &[T; N]) -> T + Send + Sync + 'a>;
type Constraint<'a, T, const N: usize> = Box<dyn Fn(T, &[T; N]) -> bool + Send + Sync + 'a>;

/// Zero crossings of a scalar surface along the trajectory.
pub struct EventSpec<'a, T, const N: usize> {
    surface: Surface<'a, T, N>,
    pub direction: Direction,
    constraint: Option<Constraint<'a, T, N>>,
}

impl<'a, T: Real, const N: usize> EventSpec<'a, T, N> {
    pub fn new(surface: impl Fn(T, &[T; N]) -> T + Send + Sync + 'a, direction: Direction) -> Self {
        Self { surface: Box::new(surface), direction, constraint: None }
    }

    /// Crossings are only reported where `constraint` holds.
    pub fn with_constraint(mut self, constraint: impl Fn(T, &[T; N]) -> bool + Send + Sync + 'a) -> Self {
        self.constraint = Some(Box::new(constraint));
        self
    }

    #[inline]
    pub fn surface(&self, t: T, y: &[T; N]) -> T {
        (self.surface)(t, y)
    }

    fn admits(&self, t: T, y: &[T; N]) -> bool {
        self.constraint.as_ref().is_none_or(|c| c(t, y))
    }

    fn brackets(&self, g0: T, g1: T) -> bool {
        let zero = T::zero();
        let rising = g0 <= zero && g1 > zero;
        let falling = g0 >= zero && g1 < zero;
        match self.direction {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Both => rising || falling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionSample<T, const N: usize> {
    pub t: T,
    pub state: [T; N],
}

pub type EventHit<T, const N: usize> = SolutionSample<T, N>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T, const N: usize> {
    /// Time reached: `t1`, or the event time if the observer stopped early.
    pub t: T,
    pub state: [T; N],
    /// Accepted step endpoints (including the initial point) when recording.
    pub samples: Vec<SolutionSample<T, N>>,
    pub events: Vec<EventHit<T, N>>,
    pub stats: StepStats,
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<T, const N: usize> {
    pub t0: T,
    pub h: T,
    pub y0: [T; N],
    pub y1: [T; N],
    cont: [[T; N]; 4],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    /// Continuous extension at `t ∈ [t0, t0 + h]`.
    pub fn eval(&self, t: T) -> [T; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        let [c1, c2, c3, c4] = &self.cont;
        let mut out = [T::zero(); N];
        for i in 0..N {
            out[i] = self.y0[i] + theta * (c1[i] + theta1 * (c2[i] + theta * (c3[i] + theta1 * c4[i])));
        }
        out
    }
}

/// What the driver reports to an observer.
pub enum Observation<'s, T, const N: usize> {
    Step(&'s DenseStep<T, N>),
    Event(&'s EventHit<T, N>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn combine<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for &(coef, k) in terms {
        let c = h * T::lit(coef);
        for i in 0..N {
            out[i] = out[i] + c * k[i];
        }
    }
    out
}

fn all_finite<T: Real, const N: usize>(y: &[T; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn max_norm<T: Real, const N: usize>(y: &[T; N]) -> T {
    y.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

struct Stages<T, const N: usize> {
    y1: [T; N],
    k: [[T; N]; 7],
}

fn rk_stages<T: Real, F: OdeSystem<T, N> + ?Sized, const N: usize>(
    field: &F,
    t: T,
    y: &[T; N],
    k1: &[T; N],
    h: T,
) -> Stages<T, N> {
    let l = T::lit;
    let k2 = field.rhs(t + l(C2) * h, &combine(y, h, &[(A21, k1)]));
    let k3 = field.rhs(t + l(C3) * h, &combine(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = field.rhs(t + l(C4) * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = field.rhs(t + l(C5) * h, &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = field.rhs(t + h, &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y1 = combine(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = field.rhs(t + h, &y1);
    Stages { y1, k: [*k1, k2, k3, k4, k5, k6, k7] }
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    fn from_stages(t0: T, h: T, y0: [T; N], st: &Stages<T, N>) -> Self {
        let k = &st.k;
        let ydiff: [T; N] = std::array::from_fn(|i| st.y1[i] - y0[i]);
        let bspl: [T; N] = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
        let c3: [T; N] = std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]);
        let c4: [T; N] = std::array::from_fn(|i| {
            h * (T::lit(D1) * k[0][i]
                + T::lit(D3) * k[2][i]
                + T::lit(D4) * k[3][i]
                + T::lit(D5) * k[4][i]
                + T::lit(D6) * k[5][i]
                + T::lit(D7) * k[6][i])
        });
        Self { t0, h, y0, y1: st.y1, cont: [ydiff, bspl, c3, c4] }
    }
}

struct Stepper<'a, T, F: ?Sized, const N: usize> {
    field: &'a F,
    cfg: &'a IntegratorConfig<T>,
    t: T,
    y: [T; N],
    f: [T; N],
    h: T,
    stats: StepStats,
}

impl<'a, T: Real, F: OdeSystem<T, N> + ?Sized, const N: usize> Stepper<'a, T, F, N> {
    fn new(field: &'a F, cfg: &'a IntegratorConfig<T>, t0: T, y0: [T; N], t1: T) -> Self {
        let f = field.rhs(t0, &y0);
        let h = cfg.h_init.min(cfg.h_max).min(t1 - t0);
        Self { field, cfg, t: t0, y: y0, f, h, stats: StepStats { evaluations: 1, ..Default::default() } }
    }

    fn error_norm(&self, y1: &[T; N], k: &[[T; N]; 7], h: T) -> T {
        let mut acc = T::zero();
        for i in 0..N {
            let e = h
                * (T::lit(E1) * k[0][i]
                    + T::lit(E3) * k[2][i]
                    + T::lit(E4) * k[3][i]
                    + T::lit(E5) * k[4][i]
                    + T::lit(E6) * k[5][i]
                    + T::lit(E7) * k[6][i]);
            let sk = self.cfg.atol + self.cfg.rtol * self.y[i].abs().max(y1[i].abs());
            let r = e / sk;
            acc = acc + r * r;
        }
        (acc / T::from_usize(N).unwrap()).sqrt()
    }

    /// Takes one accepted step, never past `t_end`.
    fn step(&mut self, t_end: T) -> Result<DenseStep<T, N>> {
        let safety = T::lit(0.9);
        let mut reject_streak = false;
        loop {
            if self.stats.accepted + self.stats.rejected >= self.cfg.max_steps {
                return Err(Error::StepBudgetExceeded {
                    t: self.t.to_f64_lossy(),
                    steps: self.stats.accepted + self.stats.rejected,
                });
            }
            let remaining = t_end - self.t;
            let mut h = self.h.min(self.cfg.h_max);
            if self.t + T::lit(1.01) * h >= t_end {
                h = remaining;
            }
            let h_floor = T::lit(16.0) * T::epsilon() * self.t.abs().max(T::one());
            if h < h_floor && h < remaining {
                return Err(Error::StepSizeUnderflow { t: self.t.to_f64_lossy(), h: h.to_f64_lossy() });
            }
            let st = rk_stages(self.field, self.t, &self.y, &self.f, h);
            self.stats.evaluations += 6;
            let err = self.error_norm(&st.y1, &st.k, h);
            if !err.is_finite() || err > T::one() {
                self.stats.rejected += 1;
                let fac =
                    if err.is_finite() { (safety * err.powf(T::lit(-0.2))).max(T::lit(0.2)) } else { T::lit(0.2) };
                self.h = h * fac.min(T::one());
                reject_streak = true;
                continue;
            }
            let mut fac = if err == T::zero() { T::lit(5.0) } else { safety * err.powf(T::lit(-0.2)) };
            fac = fac.max(T::lit(0.2)).min(T::lit(5.0));
            if reject_streak {
                fac = fac.min(T::one());
            }
            self.stats.accepted += 1;

            let dense = DenseStep::from_stages(self.t, h, self.y, &st);

            self.t = if h == remaining { t_end } else { self.t + h };
            self.y = st.y1;
            self.f = st.k[6];
            self.h = (h * fac).min(self.cfg.h_max);
            if !all_finite(&self.y) {
                return Err(Error::NonFiniteState { t: self.t.to_f64_lossy() });
            }
            return Ok(dense);
        }
    }
}

/// Locates a zero of `g` on the continuous extension inside `[ta, tb]`.
///
/// Illinois-modified regula falsi; bisection whenever the secant point
/// leaves the bracket. Stops once the bracket is below `1e-12` (or a few
/// ulps of `t`) and returns the endpoint with the smaller surface value.
fn locate_event<T: Real, const N: usize>(
    ev: &EventSpec<'_, T, N>,
    step: &DenseStep<T, N>,
    (mut a, mut ga): (T, T),
    (mut b, mut gb): (T, T),
) -> (T, [T; N]) {
    if ga == T::zero() {
        return (a, step.eval(a));
    }
    let t_tol = T::lit(1e-12).max(T::lit(8.0) * T::epsilon() * a.abs().max(b.abs()));
    let half = T::lit(0.5);
    let mut last_side = 0i8;
    for _ in 0..200 {
        if b - a <= t_tol {
            break;
        }
        let mut c = b - gb * (b - a) / (gb - ga);
        if !(c > a && c < b) {
            c = a + half * (b - a);
        }
        let gc = ev.surface(c, &step.eval(c));
        if gc == T::zero() {
            return (c, step.eval(c));
        }
        if (gc > T::zero()) == (gb > T::zero()) {
            b = c;
            gb = gc;
            if last_side == 1 {
                ga = ga * half;
            }
            last_side = 1;
        } else {
            a = c;
            ga = gc;
            if last_side == -1 {
                gb = gb * half;
            }
            last_side = -1;
        }
    }
    // ga/gb may carry Illinois scaling; compare true values
    let (ya, yb) = (step.eval(a), step.eval(b));
    if ev.surface(a, &ya).abs() <= ev.surface(b, &yb).abs() {
        (a, ya)
    } else {
        (b, yb)
    }
}

/// General driver: integrates `field` from `(t0, x0)` to `t1`, reporting
/// accepted steps and located events to `observer`, which may stop the run.
///
/// Trajectories whose max-norm exceeds `cfg.escape_radius` end with
/// [`Error::Blowup`].
pub fn solve<T, F, const N: usize>(
    field: &F,
    t0: T,
    t1: T,
    x0: [T; N],
    cfg: &IntegratorConfig<T>,
    event: Option<&EventSpec<'_, T, N>>,
    mut observer: impl FnMut(Observation<'_, T, N>) -> Control,
) -> Result<(T, [T; N], StepStats)>
where
    T: Real,
    F: OdeSystem<T, N> + ?Sized,
{
    if !(t0 < t1) {
        return Err(Error::invalid(format!("integration interval must satisfy t0 < t1 (got {t0}, {t1})")));
    }
    if !all_finite(&x0) {
        return Err(Error::NonFiniteState { t: t0.to_f64_lossy() });
    }
    let mut stepper = Stepper::new(field, cfg, t0, x0, t1);
    let mut tracker = EventTracker::new(event, t0, &x0);
    while stepper.t < t1 {
        let step = stepper.step(t1)?;
        if let Some(stop) = tracker.advance(&step, cfg, &mut observer)? {
            return Ok((stop.t, stop.state, stepper.stats));
        }
    }
    Ok((stepper.t, stepper.y, stepper.stats))
}

/// Integrates along a prescribed time mesh without error control.
///
/// Used to differentiate numerical solutions: trajectories replayed on one
/// mesh depend smoothly on their initial data, whereas adaptive runs switch
/// step sequences discontinuously. Events and escape are handled as in
/// [`solve`].
pub fn solve_on_mesh<T, F, const N: usize>(
    field: &F,
    mesh: &[T],
    x0: [T; N],
    cfg: &IntegratorConfig<T>,
    event: Option<&EventSpec<'_, T, N>>,
    mut observer: impl FnMut(Observation<'_, T, N>) -> Control,
) -> Result<(T, [T; N], StepStats)>
where
    T: Real,
    F: OdeSystem<T, N> + ?Sized,
{
    if mesh.len() < 2 || mesh.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("mesh must contain at least two strictly increasing times"));
    }
    if !all_finite(&x0) {
        return Err(Error::NonFiniteState { t: mesh[0].to_f64_lossy() });
    }
    let mut stats = StepStats::default();
    let mut tracker = EventTracker::new(event, mesh[0], &x0);
    let mut y = x0;
    for w in mesh.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let f = field.rhs(t, &y);
        let st = rk_stages(field, t, &y, &f, h);
        stats.accepted += 1;
        stats.evaluations += 7;
        let step = DenseStep::from_stages(t, h, y, &st);
        y = st.y1;
        if !all_finite(&y) {
            return Err(Error::NonFiniteState { t: w[1].to_f64_lossy() });
        }
        if let Some(stop) = tracker.advance(&step, cfg, &mut observer)? {
            return Ok((stop.t, stop.state, stats));
        }
    }
    Ok((mesh[mesh.len() - 1], y, stats))
}

struct EventTracker<'e, 'a, T, const N: usize> {
    event: Option<&'e EventSpec<'a, T, N>>,
    g_prev: Option<T>,
}

impl<'e, 'a, T: Real, const N: usize> EventTracker<'e, 'a, T, N> {
    fn new(event: Option<&'e EventSpec<'a, T, N>>, t0: T, x0: &[T; N]) -> Self {
        Self { event, g_prev: event.map(|ev| ev.surface(t0, x0)) }
    }

    /// Reports `step` and any event inside it; `Some` when the observer stops.
    fn advance(
        &mut self,
        step: &DenseStep<T, N>,
        cfg: &IntegratorConfig<T>,
        observer: &mut impl FnMut(Observation<'_, T, N>) -> Control,
    ) -> Result<Option<SolutionSample<T, N>>> {
        if observer(Observation::Step(step)) == Control::Stop {
            return Ok(Some(SolutionSample { t: step.t1(), state: step.y1 }));
        }
        if let (Some(ev), Some(g0)) = (self.event, self.g_prev) {
            let g1 = ev.surface(step.t1(), &step.y1);
            if ev.brackets(g0, g1) {
                let (te, ye) = locate_event(ev, step, (step.t0, g0), (step.t1(), g1));
                if ev.admits(te, &ye) {
                    let hit = SolutionSample { t: te, state: ye };
                    if observer(Observation::Event(&hit)) == Control::Stop {
                        return Ok(Some(hit));
                    }
                }
            }
            self.g_prev = Some(g1);
        }
        let norm = max_norm(&step.y1);
        if norm > cfg.escape_radius {
            return Err(Error::Blowup { t: step.t1().to_f64_lossy(), norm: norm.to_f64_lossy() });
        }
        Ok(None)
    }
}

/// Integrates to `t1`. With `record`, every accepted step endpoint is kept.
pub fn integrate<T, F, const N: usize>(
    field: &F,
    t0: T,
    t1: T,
    x0: [T; N],
    cfg: &IntegratorConfig<T>,
    record: bool,
) -> Result<Solution<T, N>>
where
    T: Real,
    F: OdeSystem<T, N> + ?Sized,
{
    let mut samples = Vec::new();
    if record {
        samples.push(SolutionSample { t: t0, state: x0 });
    }
    let (t, state, stats) = solve(field, t0, t1, x0, cfg, None, |obs| {
        if let (true, Observation::Step(s)) = (record, obs) {
            samples.push(SolutionSample { t: s.t1(), state: s.y1 });
        }
        Control::Continue
    })?;
    Ok(Solution { t, state, samples, events: Vec::new(), stats })
}

/// Integrates to `t1` collecting every admissible crossing of `ev`.
pub fn integrate_with_events<T, F, const N: usize>(
    field: &F,
    t0: T,
    t1: T,
    x0: [T; N],
    cfg: &IntegratorConfig<T>,
    ev: &EventSpec<'_, T, N>,
) -> Result<Solution<T, N>>
where
    T: Real,
    F: OdeSystem<T, N> + ?Sized,
{
    let mut events = Vec::new();
    let (t, state, stats) = solve(field, t0, t1, x0, cfg, Some(ev), |obs| {
        if let Observation::Event(hit) = obs {
            events.push(*hit);
        }
        Control::Continue
    })?;
    Ok(Solution { t, state, samples: Vec::new(), events, stats })
}

/// Classical fixed-step use of the fifth-order formula, for convergence studies.
pub fn integrate_fixed_step<T, F, const N: usize>(field: &F, t0: T, t1: T, x0: [T; N], steps: usize) -> [T; N]
where
    T: Real,
    F: OdeSystem<T, N> + ?Sized,
{
    let h = (t1 - t0) / T::from_usize(steps).unwrap();
    let mut y = x0;
    for n in 0..steps {
        let t = t0 + T::from_usize(n).unwrap() * h;
        let f = field.rhs(t, &y);
        y = rk_stages(field, t, &y, &f, h).y1;
    }
    y
}
