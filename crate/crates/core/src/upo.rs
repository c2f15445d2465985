//! Period-one unstable periodic orbit as a fixed point of the return map.
//!
//! Newton's method runs on `F(ξ) = P(ξ) − ξ` with `DP` from the variational
//! equations. The section map of the Rössler flow contracts areas by a factor
//! around `10⁻¹⁴` per loop, far below what the entries of `DP` resolve, so the
//! determinant used for the multipliers comes from Liouville's formula and the
//! stable multiplier is recovered as `det / λ_u`.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::linalg::{det2, eigen2_with_det, norm2, solve2, spectrum_from_invariants, trace2, Mat2, Spectrum2, Vec2};
use crate::poincare::{detect_crossings, Linearization, ReturnMap, SectionPoint};
use crate::scalar::Real;
use crate::system::RosslerParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct UpoConfig<T> {
    pub integ: IntegratorConfig<T>,
    /// Start of the seeding trajectory.
    pub seed_start: [T; 3],
    pub transient: T,
    pub record: T,
    pub max_iter: usize,
    /// Newton stops once `‖P(ξ) − ξ‖` is below this.
    pub tol: T,
    /// `|det(DP − I)|` below this is treated as singular.
    pub singular_det: T,
    pub max_flight: T,
}

impl<T: Real> Default for UpoConfig<T> {
    fn default() -> Self {
        Self {
            integ: IntegratorConfig::default(),
            seed_start: [T::one(), T::one(), T::zero()],
            transient: T::lit(200.0),
            record: T::lit(2000.0),
            max_iter: 50,
            tol: T::tol_floor(1e-9, 1e4),
            singular_det: T::lit(1e-12),
            max_flight: T::lit(50.0),
        }
    }
}

impl<T: Real> UpoConfig<T> {
    fn return_map(&self, p: RosslerParams<T>) -> ReturnMap<T> {
        ReturnMap { max_flight: self.max_flight, ..ReturnMap::new(p, self.integ) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit<T> {
    pub gamma: SectionPoint<T>,
    pub period: T,
    pub lambda_s: T,
    pub lambda_u: T,
    pub v_s: Vec2<T>,
    pub v_u: Vec2<T>,
    pub params: RosslerParams<T>,
    /// `DP(γ)` from the variational equations.
    pub jacobian: Mat2<T>,
    /// `det DP(γ)` from Liouville's formula.
    pub det: T,
    /// `‖P(γ) − γ‖`
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> PeriodicOrbit<T> {
    pub fn is_saddle(&self) -> bool {
        self.lambda_s.abs() < T::one() && self.lambda_u.abs() > T::one()
    }
}

/// Crossing whose successor lies closest to it, from a long frozen run.
pub fn seed_guess_from_recurrence<T: Real>(p: &RosslerParams<T>, cfg: &UpoConfig<T>) -> Result<SectionPoint<T>> {
    let warm = integrate(p, T::zero(), cfg.transient, cfg.seed_start, &cfg.integ, false)?;
    let map = cfg.return_map(*p);
    let crossings =
        detect_crossings(p, &map.section, cfg.transient, cfg.transient + cfg.record, warm.state, &cfg.integ)?;
    if crossings.len() < 10 {
        return Err(Error::NoReturn { max_flight: cfg.record.to_f64_lossy() });
    }
    let best = crossings
        .windows(2)
        .min_by(|a, b| {
            let da = a[0].point.distance(&a[1].point);
            let db = b[0].point.distance(&b[1].point);
            da.partial_cmp(&db).expect("finite crossings")
        })
        .expect("at least two crossings");
    debug!("recurrence seed {:?}, successor distance {}", best[0].point, best[0].point.distance(&best[1].point));
    Ok(best[0].point)
}

/// Newton iterate and its linearization at convergence.
struct Converged<T> {
    gamma: SectionPoint<T>,
    lin: Linearization<T>,
    residual: T,
    iterations: usize,
}

fn residual_at<T: Real>(map: &ReturnMap<T>, q: Vec2<T>) -> Option<T> {
    let (img, _) = map.map(SectionPoint::from_vec(q)).ok()?;
    let r = (img.u - q[0]).hypot(img.v - q[1]);
    r.is_finite().then_some(r)
}

fn newton<T: Real>(p: &RosslerParams<T>, guess: SectionPoint<T>, cfg: &UpoConfig<T>) -> Result<Converged<T>> {
    let map = cfg.return_map(*p);
    let mut q = guess.to_vec();
    let mut last_residual = T::infinity();
    for iter in 0..=cfg.max_iter {
        let lin = map.linearize(SectionPoint::from_vec(q))?;
        let f = [lin.image.u - q[0], lin.image.v - q[1]];
        let res = norm2(&f);
        debug!("newton iter {iter}: q = {q:?}, residual {res}");
        if res < cfg.tol {
            return Ok(Converged { gamma: SectionPoint::from_vec(q), lin, residual: res, iterations: iter });
        }
        if iter == cfg.max_iter {
            break;
        }
        let j = lin.jacobian;
        let a = [[j[0][0] - T::one(), j[0][1]], [j[1][0], j[1][1] - T::one()]];
        let d = det2(&a);
        let delta =
            solve2(&a, &[-f[0], -f[1]], cfg.singular_det).ok_or(Error::SingularJacobian { det: d.to_f64_lossy() })?;

        // halve the step up to five times until the residual decreases
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..=5 {
            let trial = [q[0] + alpha * delta[0], q[1] + alpha * delta[1]];
            if let Some(r) = residual_at(&map, trial) {
                if r < res {
                    accepted = Some(trial);
                    break;
                }
            }
            alpha = alpha * T::lit(0.5);
        }
        match accepted {
            Some(next) => q = next,
            None => {
                return Err(Error::NewtonDiverged { iterations: iter + 1, residual: res.to_f64_lossy() });
            }
        }
        last_residual = res;
    }
    Err(Error::NewtonDiverged { iterations: cfg.max_iter, residual: last_residual.to_f64_lossy() })
}

/// Fixed point of the return map near `guess`, with its Floquet data.
///
/// Eigenvectors are unit length with the first nonzero component positive.
pub fn find_fixed_point<T: Real>(
    p: &RosslerParams<T>,
    guess: SectionPoint<T>,
    cfg: &UpoConfig<T>,
) -> Result<PeriodicOrbit<T>> {
    let c = newton(p, guess, cfg)?;
    let eig = eigen2_with_det(&c.lin.jacobian, c.lin.liouville_det)?;
    let [lambda_u, lambda_s] = eig.values;
    let [v_u, v_s] = eig.vectors;
    Ok(PeriodicOrbit {
        gamma: c.gamma,
        period: c.lin.flight,
        lambda_s,
        lambda_u,
        v_s,
        v_u,
        params: *p,
        jacobian: c.lin.jacobian,
        det: c.lin.liouville_det,
        residual: c.residual,
        iterations: c.iterations,
    })
}

/// Seeds from a recurrence search and refines with [`find_fixed_point`].
pub fn find_period_one_orbit<T: Real>(p: &RosslerParams<T>, cfg: &UpoConfig<T>) -> Result<PeriodicOrbit<T>> {
    let guess = seed_guess_from_recurrence(p, cfg)?;
    find_fixed_point(p, guess, cfg)
}

/// Return-map multipliers of the period-one orbit at `p`.
pub fn multipliers<T: Real>(
    p: &RosslerParams<T>,
    guess: SectionPoint<T>,
    cfg: &UpoConfig<T>,
) -> Result<(SectionPoint<T>, Spectrum2<T>)> {
    let c = newton(p, guess, cfg)?;
    Ok((c.gamma, spectrum_from_invariants(trace2(&c.lin.jacobian), c.lin.liouville_det)))
}

/// Parameter `a` where the period-one orbit's dominant multiplier crosses −1.
///
/// The orbit is continued in `a` with step `0.005` from the low end of
/// `a_range`, each Newton solve seeded by the previous fixed point; the first
/// grid cell where `Re λ + 1` changes sign is then bisected to `1e-6`.
pub fn locate_period_doubling<T: Real>(b: T, c: T, a_range: (T, T), cfg: &UpoConfig<T>) -> Result<T> {
    let (lo, hi) = a_range;
    if !(lo < hi) {
        return Err(Error::invalid("a_range must satisfy lo < hi"));
    }
    let no_bracket = || Error::NoBracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() };
    let params = |a: T| RosslerParams::new(a, b, c);
    let phi = |s: &Spectrum2<T>| s.dominant_real_part() + T::one();

    let step = T::lit(0.005);
    let mut a_prev = lo;
    let mut seed = seed_guess_from_recurrence(&params(lo), cfg)?;
    let (g, s) = multipliers(&params(lo), seed, cfg)?;
    seed = g;
    let mut phi_prev = phi(&s);
    let mut k = 1usize;
    let bracket = loop {
        let a = (lo + T::from_usize(k).unwrap() * step).min(hi);
        let (g, s) = multipliers(&params(a), seed, cfg)?;
        let phi_a = phi(&s);
        debug!("continuation a = {a}: gamma = {g:?}, multiplier + 1 = {phi_a}");
        if (phi_prev > T::zero()) != (phi_a > T::zero()) {
            break (a_prev, seed, phi_prev, a);
        }
        if a >= hi {
            return Err(no_bracket());
        }
        a_prev = a;
        seed = g;
        phi_prev = phi_a;
        k += 1;
    };

    let (mut a_lo, mut seed_lo, phi_lo, mut a_hi) = bracket;
    let tol = T::lit(1e-6);
    while a_hi - a_lo > tol {
        let mid = (a_lo + a_hi) / T::lit(2.0);
        let (g, s) = multipliers(&params(mid), seed_lo, cfg)?;
        if (phi(&s) > T::zero()) == (phi_lo > T::zero()) {
            a_lo = mid;
            seed_lo = g;
        } else {
            a_hi = mid;
        }
    }
    Ok((a_lo + a_hi) / T::lit(2.0))
}
