//! Pullback runs of the shifted system, the gap function `η(r)` and the
//! search for critical rates at which the pullback attractor limits onto the
//! period-one orbit rather than the whole chaotic attractor.
//!
//! For an equilibrium past limit the pullback attractor is a single
//! trajectory, approximated by integrating from a point near the past
//! equilibrium at a finite `t_start`. Its last section crossing before the
//! horizon `T` is compared with the orbit's fixed point `γ`; a zero of the
//! signed distance from the local stable manifold marks a rate where the
//! trajectory lands on `Wˢ(Γ₊)`.

use std::cmp::Ordering;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, solve, Control, IntegratorConfig, Observation};
use crate::linalg::{dot2, solve2, Vec2};
use crate::poincare::{detect_crossings, CrossingRecord, Section, SectionPoint};
use crate::scalar::Real;
use crate::system::{NonautonomousSpec, State};
use crate::upo::PeriodicOrbit;

/// Initial point, start time and horizon of a pullback run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackRunConfig<T> {
    pub z_init: State<T>,
    pub t_start: T,
    /// Horizon `T`.
    pub horizon: T,
    pub integ: IntegratorConfig<T>,
}

impl<T: Real> Default for PullbackRunConfig<T> {
    /// `z_init = (−0.007, 0.035, −0.035)`, `t_start = −30`, `T = 150`.
    fn default() -> Self {
        Self {
            z_init: State::new(T::lit(-0.007), T::lit(0.035), T::lit(-0.035)),
            t_start: T::lit(-30.0),
            horizon: T::lit(150.0),
            integ: IntegratorConfig::default(),
        }
    }
}

impl<T: Real> PullbackRunConfig<T> {
    /// Inner equilibrium of the past-limit frozen system.
    pub fn auto_z_init(spec: &NonautonomousSpec<T>) -> Result<State<T>> {
        Ok(spec.past_params().equilibria()?.inner)
    }

    pub fn with_auto_z_init(self, spec: &NonautonomousSpec<T>) -> Result<Self> {
        Ok(Self { z_init: Self::auto_z_init(spec)?, ..self })
    }

    pub fn with_horizon(self, horizon: T) -> Self {
        Self { horizon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < T::zero() && T::zero() < self.horizon) {
            return Err(Error::invalid(format!(
                "pullback run requires t_start < 0 < T (got t_start = {}, T = {})",
                self.t_start, self.horizon
            )));
        }
        if !self.z_init.is_finite() {
            return Err(Error::invalid("z_init must be finite"));
        }
        self.integ.validate()
    }
}

/// State of the pullback trajectory at time `t`.
pub fn pullback_state_at<T: Real>(spec: &NonautonomousSpec<T>, run: &PullbackRunConfig<T>, t: T) -> Result<State<T>> {
    let sol = integrate(spec, run.t_start, t, run.z_init.to_array(), &run.integ, false)?;
    Ok(State::from(sol.state))
}

/// Every qualifying crossing on `[t_start, T]`.
pub fn pullback_crossings<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
) -> Result<Vec<CrossingRecord<T>>> {
    detect_crossings(spec, &Section::default(), run.t_start, run.horizon, run.z_init.to_array(), &run.integ)
}

/// Last crossing with `t_N ≤ T`, and the number of crossings `N`.
pub fn pullback_final_crossing<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
) -> Result<(CrossingRecord<T>, usize)> {
    let crossings = pullback_crossings(spec, run)?;
    let n = crossings.len();
    crossings.last().map(|c| (*c, n)).ok_or(Error::NoCrossing { horizon: run.horizon.to_f64_lossy() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Coefficient along `v_u` of the displacement in the `(v_s, v_u)` basis.
    UnstableCoefficient,
    /// `⟨d, v_s⟩ / ‖v_s‖²`
    PaperProjection,
}

impl GapMode {
    pub const ALL: [GapMode; 2] = [GapMode::UnstableCoefficient, GapMode::PaperProjection];

    pub fn name(self) -> &'static str {
        match self {
            GapMode::UnstableCoefficient => "unstable_coefficient",
            GapMode::PaperProjection => "paper_projection",
        }
    }
}

/// `η` for a displacement `d` from `γ`.
pub fn eta_from_displacement<T: Real>(d: Vec2<T>, orbit: &PeriodicOrbit<T>, mode: GapMode) -> Result<T> {
    match mode {
        GapMode::PaperProjection => Ok(dot2(&d, &orbit.v_s) / dot2(&orbit.v_s, &orbit.v_s)),
        GapMode::UnstableCoefficient => {
            let basis = [[orbit.v_s[0], orbit.v_u[0]], [orbit.v_s[1], orbit.v_u[1]]];
            let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
            let coeffs =
                solve2(&basis, &d, T::lit(1e-8)).ok_or(Error::DegenerateEigenbasis { det: det.to_f64_lossy() })?;
            Ok(coeffs[1])
        }
    }
}

fn check_eigenbasis<T: Real>(orbit: &PeriodicOrbit<T>) -> Result<()> {
    eta_from_displacement([T::zero(), T::zero()], orbit, GapMode::UnstableCoefficient).map(|_| ())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult<T> {
    pub r: T,
    pub eta: T,
    pub n_crossings: usize,
    pub t_last: T,
    pub mode: GapMode,
}

/// Final crossing of one pullback run, before any choice of gap mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalCrossing<T> {
    pub r: T,
    pub n_crossings: usize,
    pub t_last: T,
    pub point: SectionPoint<T>,
}

impl<T: Real> FinalCrossing<T> {
    pub fn gap(&self, orbit: &PeriodicOrbit<T>, mode: GapMode) -> Result<GapResult<T>> {
        let d = [self.point.u - orbit.gamma.u, self.point.v - orbit.gamma.v];
        Ok(GapResult {
            r: self.r,
            eta: eta_from_displacement(d, orbit, mode)?,
            n_crossings: self.n_crossings,
            t_last: self.t_last,
            mode,
        })
    }
}

pub fn final_crossing<T: Real>(spec: &NonautonomousSpec<T>, run: &PullbackRunConfig<T>) -> Result<FinalCrossing<T>> {
    let (c, n) = pullback_final_crossing(spec, run)?;
    Ok(FinalCrossing { r: spec.rate, n_crossings: n, t_last: c.t, point: c.point })
}

fn check_orbit_params<T: Real>(spec: &NonautonomousSpec<T>, orbit: &PeriodicOrbit<T>) {
    let future = spec.future_params();
    if orbit.params != future {
        warn!("orbit computed at {:?}, but the future-limit parameters are {:?}", orbit.params, future);
    }
}

/// Gap function at `spec.rate`.
pub fn gap<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    orbit: &PeriodicOrbit<T>,
    mode: GapMode,
) -> Result<GapResult<T>> {
    check_orbit_params(spec, orbit);
    final_crossing(spec, run)?.gap(orbit, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Ok,
    NoCrossing,
    /// Escape or any other breakdown of the trajectory integration.
    Blowup,
}

impl ScanStatus {
    pub fn name(self) -> &'static str {
        match self {
            ScanStatus::Ok => "ok",
            ScanStatus::NoCrossing => "no_crossing",
            ScanStatus::Blowup => "blowup",
        }
    }
}

/// One grid point of a scan; `crossing` is present iff `status` is `Ok`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample<T> {
    pub r: T,
    pub status: ScanStatus,
    pub crossing: Option<FinalCrossing<T>>,
}

impl<T: Real> ScanSample<T> {
    pub fn gap(&self, orbit: &PeriodicOrbit<T>, mode: GapMode) -> Option<GapResult<T>> {
        self.crossing.and_then(|c| c.gap(orbit, mode).ok())
    }
}

fn sample_at<T: Real>(spec: &NonautonomousSpec<T>, run: &PullbackRunConfig<T>, r: T) -> ScanSample<T> {
    match final_crossing(&spec.with_rate(r), run) {
        Ok(c) => ScanSample { r, status: ScanStatus::Ok, crossing: Some(c) },
        Err(Error::NoCrossing { .. }) => ScanSample { r, status: ScanStatus::NoCrossing, crossing: None },
        Err(e) => {
            debug!("rate {r}: {e}");
            ScanSample { r, status: ScanStatus::Blowup, crossing: None }
        }
    }
}

/// A scan sample with its gap value, if the run produced one.
pub type ScanRow<T> = (ScanSample<T>, Option<GapResult<T>>);

/// Uniform grid of `samples` rates on `[r_min, r_max]`.
pub fn rate_grid<T: Real>(r_min: T, r_max: T, samples: usize) -> Result<Vec<T>> {
    if !(r_min < r_max) || !(r_min > T::zero()) {
        return Err(Error::invalid(format!("rate range requires 0 < r_min < r_max (got {r_min}, {r_max})")));
    }
    if samples < 2 {
        return Err(Error::invalid("a scan needs at least 2 samples"));
    }
    let n = T::from_usize(samples - 1).unwrap();
    Ok((0..samples)
        .map(|i| if i == samples - 1 { r_max } else { r_min + (r_max - r_min) * T::from_usize(i).unwrap() / n })
        .collect())
}

/// Final crossings on a uniform rate grid, evaluated in parallel and
/// returned in grid order. Failed rows carry their status.
pub fn scan_final_crossings<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    r_min: T,
    r_max: T,
    samples: usize,
) -> Result<Vec<ScanSample<T>>> {
    spec.shift.validate()?;
    run.validate()?;
    let grid = rate_grid(r_min, r_max, samples)?;
    Ok(grid.into_par_iter().map(|r| sample_at(spec, run, r)).collect())
}

/// `η` on a uniform rate grid. Rows without a gap value have `eta = None`.
pub fn scan_eta<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    orbit: &PeriodicOrbit<T>,
    r_min: T,
    r_max: T,
    samples: usize,
    mode: GapMode,
) -> Result<Vec<ScanRow<T>>> {
    check_eigenbasis(orbit)?;
    check_orbit_params(spec, orbit);
    let rows = scan_final_crossings(spec, run, r_min, r_max, samples)?;
    Ok(rows.into_iter().map(|s| (s, s.gap(orbit, mode))).collect())
}

/// Adjacent grid pairs whose `η` values have opposite signs, regardless of
/// crossing counts.
pub fn sign_changes<T: Real>(etas: &[Option<T>]) -> usize {
    etas.windows(2).filter(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if (a > T::zero()) != (b > T::zero()))).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct RefineConfig<T> {
    /// Bisection stops once the rate bracket is narrower than this.
    pub tol_r: T,
    /// Roots must reach `|η| < tol_eta`.
    pub tol_eta: T,
    /// Secant polishing steps after bisection.
    pub max_iter: usize,
}

impl<T: Real> Default for RefineConfig<T> {
    fn default() -> Self {
        Self { tol_r: T::tol_floor(1e-9, 64.0), tol_eta: T::tol_floor(1e-6, 1e4), max_iter: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ConfirmConfig<T> {
    /// Required consecutive returns inside the tube, `K`.
    pub shadow_periods: usize,
    pub tube_eps: T,
    /// Section returns examined beyond `T`.
    pub max_returns: usize,
}

impl<T: Real> Default for ConfirmConfig<T> {
    fn default() -> Self {
        Self { shadow_periods: 3, tube_eps: T::lit(0.05), max_returns: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRate<T> {
    pub r_c: T,
    pub eta_at_root: T,
    pub n_crossings: usize,
    pub confirmed: bool,
    pub shadow_periods: usize,
    pub mode: GapMode,
}

#[derive(Debug, Clone, Copy)]
struct Point<T> {
    r: T,
    eta: T,
    n: usize,
}

struct Refiner<'a, T> {
    spec: &'a NonautonomousSpec<T>,
    run: &'a PullbackRunConfig<T>,
    orbit: &'a PeriodicOrbit<T>,
    mode: GapMode,
    cfg: &'a RefineConfig<T>,
}

impl<T: Real> Refiner<'_, T> {
    fn eval(&self, r: T) -> Option<Point<T>> {
        let g = gap(&self.spec.with_rate(r), self.run, self.orbit, self.mode).ok()?;
        Some(Point { r, eta: g.eta, n: g.n_crossings })
    }

    /// Roots in `[lo, hi]` on constant-`N` pieces. Brackets whose ends differ
    /// in `N` are split until the jump is isolated below `tol_r`, then dropped.
    fn roots(&self, lo: Point<T>, hi: Point<T>, out: &mut Vec<Point<T>>) {
        let same_n = lo.n == hi.n;
        let sign_change = (lo.eta > T::zero()) != (hi.eta > T::zero());
        if same_n && !sign_change {
            return;
        }
        if lo.eta == T::zero() && same_n {
            out.push(lo);
            return;
        }
        if hi.r - lo.r < self.cfg.tol_r {
            if same_n {
                if let Some(p) = self.polish(lo, hi) {
                    out.push(p);
                }
            } else {
                debug!("dropping crossing-count jump {} -> {} near r = {}", lo.n, hi.n, lo.r);
            }
            return;
        }
        let mid = lo.r + (hi.r - lo.r) / T::lit(2.0);
        match self.eval(mid) {
            Some(m) => {
                self.roots(lo, m, out);
                self.roots(m, hi, out);
            }
            None => debug!("gap evaluation failed at r = {mid}; bracket dropped"),
        }
    }

    /// Illinois secant steps inside a constant-`N` sign-change bracket until
    /// `|η| < tol_eta`.
    fn polish(&self, mut lo: Point<T>, mut hi: Point<T>) -> Option<Point<T>> {
        let best = |a: Point<T>, b: Point<T>| if a.eta.abs() <= b.eta.abs() { a } else { b };
        let (mut f_lo, mut f_hi) = (lo.eta, hi.eta);
        let mut side = 0i8;
        for _ in 0..self.cfg.max_iter {
            let b = best(lo, hi);
            if b.eta.abs() < self.cfg.tol_eta {
                return Some(b);
            }
            let mut r = hi.r - f_hi * (hi.r - lo.r) / (f_hi - f_lo);
            if !(r > lo.r && r < hi.r) {
                r = lo.r + (hi.r - lo.r) / T::lit(2.0);
            }
            if r <= lo.r || r >= hi.r {
                break;
            }
            let m = self.eval(r)?;
            if m.n != lo.n {
                debug!("crossing count changed while polishing near r = {r}");
                break;
            }
            if (m.eta > T::zero()) == (hi.eta > T::zero()) {
                hi = m;
                f_hi = m.eta;
                if side == 1 {
                    f_lo = f_lo / T::lit(2.0);
                }
                side = 1;
            } else {
                lo = m;
                f_lo = m.eta;
                if side == -1 {
                    f_hi = f_hi / T::lit(2.0);
                }
                side = -1;
            }
        }
        let b = best(lo, hi);
        if b.eta.abs() < self.cfg.tol_eta {
            Some(b)
        } else {
            debug!("no root with |eta| < tol_eta near r = {} (best {})", b.r, b.eta);
            None
        }
    }
}

/// Counts and spread of section returns after the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PostHorizon<T> {
    pub crossings: Vec<CrossingRecord<T>>,
    /// Leading run of returns inside the tube around `γ`.
    pub shadow_periods: usize,
    /// Largest distance between any two returns.
    pub band: T,
}

/// Continues a pullback run from its state at `T` for up to
/// `cfg.max_returns` section returns.
pub fn post_horizon<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    gamma: SectionPoint<T>,
    cfg: &ConfirmConfig<T>,
) -> Result<PostHorizon<T>> {
    let at_t = pullback_state_at(spec, run, run.horizon)?;
    // generous time budget: returns take about six time units
    let t_end = run.horizon + T::from_usize(cfg.max_returns.max(1) * 50).unwrap();
    let section = Section::default();
    let ev = section.event();
    let mut crossings = Vec::new();
    solve(spec, run.horizon, t_end, at_t.to_array(), &run.integ, Some(&ev), |obs| {
        if let Observation::Event(hit) = obs {
            if hit.t > run.horizon {
                crossings.push(CrossingRecord {
                    t: hit.t,
                    point: section.project(&hit.state),
                    index: crossings.len(),
                    state: State::from(hit.state),
                });
                if crossings.len() >= cfg.max_returns {
                    return Control::Stop;
                }
            }
        }
        Control::Continue
    })?;
    let shadow_periods = crossings.iter().take_while(|c| c.point.distance(&gamma) < cfg.tube_eps).count();
    let mut band = T::zero();
    for (i, a) in crossings.iter().enumerate() {
        for b in &crossings[i + 1..] {
            band = band.max(a.point.distance(&b.point));
        }
    }
    Ok(PostHorizon { crossings, shadow_periods, band })
}

/// Whether the trajectory at `spec.rate` shadows `γ` for at least `K`
/// consecutive returns after the horizon. Escape counts as not confirmed.
pub fn confirm_weak_tracking<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    orbit: &PeriodicOrbit<T>,
    cfg: &ConfirmConfig<T>,
) -> (bool, usize) {
    if !cfg.tube_eps.is_finite() {
        warn!("tube_eps is not finite; weak-tracking confirmation is vacuous");
    }
    match post_horizon(spec, run, orbit.gamma, cfg) {
        Ok(ph) => (ph.shadow_periods >= cfg.shadow_periods, ph.shadow_periods),
        Err(e) => {
            debug!("confirmation at r = {}: {e}", spec.rate);
            (false, 0)
        }
    }
}

/// Scan, refine and confirm critical rates on `[r_min, r_max]`.
///
/// Brackets are refined in parallel; the result is sorted by rate.
#[allow(clippy::too_many_arguments)]
pub fn find_critical_rates<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    orbit: &PeriodicOrbit<T>,
    r_min: T,
    r_max: T,
    samples: usize,
    mode: GapMode,
    refine: &RefineConfig<T>,
    confirm: &ConfirmConfig<T>,
) -> Result<Vec<CriticalRate<T>>> {
    let rows = scan_eta(spec, run, orbit, r_min, r_max, samples, mode)?;
    critical_rates_from_scan(spec, run, orbit, &rows, mode, refine, confirm)
}

/// Refinement and confirmation stage of [`find_critical_rates`] for an
/// existing scan.
pub fn critical_rates_from_scan<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    orbit: &PeriodicOrbit<T>,
    rows: &[ScanRow<T>],
    mode: GapMode,
    refine: &RefineConfig<T>,
    confirm: &ConfirmConfig<T>,
) -> Result<Vec<CriticalRate<T>>> {
    let points: Vec<Option<Point<T>>> =
        rows.iter().map(|(_, g)| g.map(|g| Point { r: g.r, eta: g.eta, n: g.n_crossings })).collect();
    let refiner = Refiner { spec, run, orbit, mode, cfg: refine };
    let mut roots: Vec<Point<T>> = points
        .par_windows(2)
        .flat_map_iter(|w| {
            let mut out = Vec::new();
            if let (Some(lo), Some(hi)) = (w[0], w[1]) {
                refiner.roots(lo, hi, &mut out);
            }
            out
        })
        .collect();
    roots.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap_or(Ordering::Equal));
    roots.dedup_by(|a, b| (a.r - b.r).abs() < refine.tol_r);

    Ok(roots
        .par_iter()
        .map(|p| {
            let (confirmed, shadow_periods) = confirm_weak_tracking(&spec.with_rate(p.r), run, orbit, confirm);
            CriticalRate { r_c: p.r, eta_at_root: p.eta, n_crossings: p.n, confirmed, shadow_periods, mode }
        })
        .collect())
}

/// Forward-limit classification of the pullback trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate<T> {
    /// Returns after the horizon spread over a band wider than `10 · tube_eps`.
    StrongTracking {
        band: T,
    },
    WeakTracking {
        shadow_periods: usize,
    },
    /// Escape before the horizon (or while following it up).
    Diverged {
        escape_time: T,
    },
    Undecided {
        shadow_periods: usize,
        band: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FateClass {
    StrongTracking,
    WeakTracking,
    Diverged,
    Undecided,
}

impl<T> Fate<T> {
    pub fn class(&self) -> FateClass {
        match self {
            Fate::StrongTracking { .. } => FateClass::StrongTracking,
            Fate::WeakTracking { .. } => FateClass::WeakTracking,
            Fate::Diverged { .. } => FateClass::Diverged,
            Fate::Undecided { .. } => FateClass::Undecided,
        }
    }
}

/// Classifies the pullback trajectory at `spec.rate` followed to `horizon`.
pub fn classify_fate<T: Real>(
    spec: &NonautonomousSpec<T>,
    run: &PullbackRunConfig<T>,
    orbit: &PeriodicOrbit<T>,
    horizon: T,
    confirm: &ConfirmConfig<T>,
) -> Result<Fate<T>> {
    let run = run.with_horizon(horizon);
    run.validate()?;
    match post_horizon(spec, &run, orbit.gamma, confirm) {
        Ok(ph) => {
            if ph.shadow_periods >= confirm.shadow_periods {
                Ok(Fate::WeakTracking { shadow_periods: ph.shadow_periods })
            } else if ph.band > T::lit(10.0) * confirm.tube_eps {
                Ok(Fate::StrongTracking { band: ph.band })
            } else {
                Ok(Fate::Undecided { shadow_periods: ph.shadow_periods, band: ph.band })
            }
        }
        Err(Error::Blowup { t, .. }) => Ok(Fate::Diverged { escape_time: T::lit(t) }),
        Err(e) => Err(e),
    }
}

/// Dimension condition for weak tracking: `dim(A₋) ≤ dim(Wˢ(S₊))`.
pub fn weak_tracking_feasible(dim_past_attractor: f64, dim_stable_set: f64) -> Result<bool> {
    if !(dim_past_attractor >= 0.0 && dim_stable_set >= 0.0) {
        return Err(Error::invalid(format!(
            "dimensions must be non-negative (got {dim_past_attractor}, {dim_stable_set})"
        )));
    }
    Ok(dim_past_attractor <= dim_stable_set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::ShiftProfile;
    use crate::system::RosslerParams;

    fn synthetic_orbit() -> PeriodicOrbit<f64> {
        PeriodicOrbit {
            gamma: SectionPoint::new(-5.0, 0.02),
            period: 6.0,
            lambda_s: 1e-14,
            lambda_u: -2.4,
            v_s: [0.6, 0.8],
            v_u: [1.0, 0.0],
            params: RosslerParams::default(),
            jacobian: [[0.0; 2]; 2],
            det: 1e-14,
            residual: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn gap_modes_on_eigen_axes() {
        let o = synthetic_orbit();
        for mode in GapMode::ALL {
            assert_eq!(eta_from_displacement([0.0, 0.0], &o, mode).unwrap(), 0.0);
        }
        let along_s = eta_from_displacement(o.v_s, &o, GapMode::UnstableCoefficient).unwrap();
        assert!(along_s.abs() < 1e-15);
        assert!((eta_from_displacement(o.v_s, &o, GapMode::PaperProjection).unwrap() - 1.0).abs() < 1e-15);
        let along_u = eta_from_displacement(o.v_u, &o, GapMode::UnstableCoefficient).unwrap();
        assert!((along_u - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_basis_is_rejected() {
        let mut o = synthetic_orbit();
        o.v_u = o.v_s;
        assert!(matches!(
            eta_from_displacement([1.0, 0.0], &o, GapMode::UnstableCoefficient),
            Err(Error::DegenerateEigenbasis { .. })
        ));
        assert!(eta_from_displacement([1.0, 0.0], &o, GapMode::PaperProjection).is_ok());
    }

    #[test]
    fn feasibility_truth_table() {
        assert!(weak_tracking_feasible(0.0, 2.0).unwrap());
        assert!(!weak_tracking_feasible(2.1, 2.0).unwrap());
        assert!(weak_tracking_feasible(1.0, 1.0).unwrap());
        assert!(weak_tracking_feasible(-1.0, 2.0).is_err());
    }

    #[test]
    fn grid_and_sign_changes() {
        let g = rate_grid(0.9, 1.0, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.9);
        assert_eq!(g[200], 1.0);
        assert!(rate_grid(1.0, 0.9, 10).is_err());
        assert!(rate_grid(0.9, 1.0, 1).is_err());
        assert_eq!(sign_changes(&[Some(1.0), Some(-1.0), None, Some(2.0), Some(3.0), Some(-0.5)]), 2);
    }

    #[test]
    fn no_crossing_before_short_horizon() {
        let spec = NonautonomousSpec::new(0.2, 5.7, ShiftProfile::tanh(-0.2, 0.2, 1e-3), 0.95);
        // from the equilibrium itself the first crossing comes after the Hopf delay
        let run = PullbackRunConfig { horizon: 30.0, ..Default::default() }.with_auto_z_init(&spec).unwrap();
        assert!(matches!(pullback_final_crossing(&spec, &run), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn run_validation() {
        let bad = PullbackRunConfig::<f64> { t_start: 5.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(PullbackRunConfig::<f64>::default().validate().is_ok());
    }
}
