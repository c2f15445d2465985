//! The section `Σ = {x = y, x ≤ 0}`, crossing extraction and the return map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{solve, solve_on_mesh, Control, Direction, EventSpec, IntegratorConfig, Observation, OdeSystem};
use crate::linalg::{Mat2, Vec2};
use crate::scalar::Real;
use crate::system::{RosslerParams, State};

/// Section coordinates `(u, v) = (x, z)` of a point on `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionPoint<T> {
    pub u: T,
    pub v: T,
}

impl<T: Real> SectionPoint<T> {
    pub const fn new(u: T, v: T) -> Self {
        Self { u, v }
    }

    pub fn to_vec(self) -> Vec2<T> {
        [self.u, self.v]
    }

    pub fn from_vec(v: Vec2<T>) -> Self {
        Self::new(v[0], v[1])
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingRecord<T> {
    pub t: T,
    pub point: SectionPoint<T>,
    pub index: usize,
    pub state: State<T>,
}

/// Surface `g = x − y` restricted to `x ≤ x_max`, crossed in `direction`.
///
/// On `y = x` with `x < 0` and small `z`, `ẋ − ẏ = −(2 + a)x − z > 0`, so the
/// default rising crossings give one intersection per loop of the attractor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section<T> {
    pub direction: Direction,
    pub x_max: T,
}

impl<T: Real> Default for Section<T> {
    fn default() -> Self {
        Self { direction: Direction::Rising, x_max: T::zero() }
    }
}

impl<T: Real> Section<T> {
    #[inline]
    pub fn surface(&self, s: &[T; 3]) -> T {
        s[0] - s[1]
    }

    pub fn event(&self) -> EventSpec<'static, T, 3> {
        let x_max = self.x_max;
        EventSpec::new(|_t, s: &[T; 3]| s[0] - s[1], self.direction).with_constraint(move |_t, s| s[0] <= x_max)
    }

    /// `(u, v) ↦ (u, u, v)`
    pub fn lift(&self, q: SectionPoint<T>) -> [T; 3] {
        [q.u, q.u, q.v]
    }

    pub fn project(&self, s: &[T; 3]) -> SectionPoint<T> {
        SectionPoint::new(s[0], s[2])
    }
}

/// Every qualifying crossing of `section` by the trajectory on `[t0, t1]`.
pub fn detect_crossings<T, F>(
    field: &F,
    section: &Section<T>,
    t0: T,
    t1: T,
    x0: [T; 3],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<CrossingRecord<T>>>
where
    T: Real,
    F: OdeSystem<T, 3> + ?Sized,
{
    let ev = section.event();
    let mut out = Vec::new();
    solve(field, t0, t1, x0, cfg, Some(&ev), |obs| {
        if let Observation::Event(hit) = obs {
            out.push(CrossingRecord {
                t: hit.t,
                point: section.project(&hit.state),
                index: out.len(),
                state: State::from(hit.state),
            });
        }
        Control::Continue
    })?;
    Ok(out)
}

/// Return map of the frozen system together with its linearization.
#[derive(Debug, Clone, Copy)]
pub struct Linearization<T> {
    pub image: SectionPoint<T>,
    pub flight: T,
    /// Section Jacobian from the variational equations.
    pub jacobian: Mat2<T>,
    /// `det DP` from Liouville's formula, `exp(∫ div f) · (n·f(q))/(n·f(P q))`.
    pub liouville_det: T,
}

#[derive(Debug, Clone, Copy)]
pub struct ReturnMap<T> {
    pub params: RosslerParams<T>,
    pub section: Section<T>,
    pub integ: IntegratorConfig<T>,
    /// Flight-time cap before [`Error::NoReturn`].
    pub max_flight: T,
}

impl<T: Real> ReturnMap<T> {
    pub fn new(params: RosslerParams<T>, integ: IntegratorConfig<T>) -> Self {
        Self { params, section: Section::default(), integ, max_flight: T::lit(50.0) }
    }

    fn no_return(&self) -> Error {
        Error::NoReturn { max_flight: self.max_flight.to_f64_lossy() }
    }

    /// Next qualifying crossing after leaving `q`, and the flight time.
    pub fn map(&self, q: SectionPoint<T>) -> Result<(SectionPoint<T>, T)> {
        let (state, flight) = self.first_return(self.section.lift(q))?;
        Ok((self.section.project(&state), flight))
    }

    /// First qualifying crossing strictly after time 0 from `x0`.
    pub fn first_return(&self, x0: [T; 3]) -> Result<([T; 3], T)> {
        let ev = self.section.event();
        let mut hit = None;
        solve(&self.params, T::zero(), self.max_flight, x0, &self.integ, Some(&ev), |obs| match obs {
            Observation::Event(e) if e.t > T::zero() => {
                hit = Some((e.state, e.t));
                Control::Stop
            }
            _ => Control::Continue,
        })?;
        hit.ok_or_else(|| self.no_return())
    }

    /// `n`-fold composition.
    pub fn iterate(&self, q: SectionPoint<T>, n: usize) -> Result<Vec<(SectionPoint<T>, T)>> {
        let mut out = Vec::with_capacity(n);
        let mut cur = q;
        for _ in 0..n {
            let (next, flight) = self.map(cur)?;
            out.push((next, flight));
            cur = next;
        }
        Ok(out)
    }

    /// Central finite-difference Jacobian with step `h_fd`.
    ///
    /// Perturbed trajectories are replayed on the step mesh of the base
    /// trajectory (extended by a few steps), which keeps the numerical map
    /// smooth in `q` so the difference quotient is not swamped by step-size
    /// switching noise.
    pub fn jacobian(&self, q: SectionPoint<T>, h_fd: T) -> Result<Mat2<T>> {
        let mesh = self.return_mesh(q)?;
        let mut jac = [[T::zero(); 2]; 2];
        for col in 0..2 {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[col] = qp[col] + h_fd;
            qm[col] = qm[col] - h_fd;
            let pp = self.map_on_mesh(SectionPoint::from_vec(qp), &mesh)?;
            let pm = self.map_on_mesh(SectionPoint::from_vec(qm), &mesh)?;
            let two_h = h_fd + h_fd;
            jac[0][col] = (pp.u - pm.u) / two_h;
            jac[1][col] = (pp.v - pm.v) / two_h;
        }
        Ok(jac)
    }

    fn return_mesh(&self, q: SectionPoint<T>) -> Result<Vec<T>> {
        let ev = self.section.event();
        let mut mesh = vec![T::zero()];
        let mut found = false;
        solve(
            &self.params,
            T::zero(),
            self.max_flight,
            self.section.lift(q),
            &self.integ,
            Some(&ev),
            |obs| match obs {
                Observation::Step(s) => {
                    mesh.push(s.t1());
                    Control::Continue
                }
                Observation::Event(e) if e.t > T::zero() => {
                    found = true;
                    Control::Stop
                }
                Observation::Event(_) => Control::Continue,
            },
        )?;
        if !found {
            return Err(self.no_return());
        }
        let n = mesh.len();
        let h = mesh[n - 1] - mesh[n - 2];
        for _ in 0..8 {
            let last = mesh[mesh.len() - 1];
            mesh.push(last + h);
        }
        Ok(mesh)
    }

    fn map_on_mesh(&self, q: SectionPoint<T>, mesh: &[T]) -> Result<SectionPoint<T>> {
        let ev = self.section.event();
        let mut hit = None;
        solve_on_mesh(&self.params, mesh, self.section.lift(q), &self.integ, Some(&ev), |obs| match obs {
            Observation::Event(e) if e.t > T::zero() => {
                hit = Some(self.section.project(&e.state));
                Control::Stop
            }
            _ => Control::Continue,
        })?;
        hit.ok_or_else(|| self.no_return())
    }

    /// Image, flight time and Jacobian of the return map at `q` from the
    /// variational equations `Ṁ = J(x) M` along the trajectory.
    pub fn linearize(&self, q: SectionPoint<T>) -> Result<Linearization<T>> {
        let p = self.params;
        let field = |_t: T, w: &[T; 13]| -> [T; 13] {
            let x = [w[0], w[1], w[2]];
            let f = p.vector_field(&x);
            let j = p.jacobian(&x);
            let mut out = [T::zero(); 13];
            out[..3].copy_from_slice(&f);
            for r in 0..3 {
                for c in 0..3 {
                    out[3 + 3 * r + c] = j[r][0] * w[3 + c] + j[r][1] * w[6 + c] + j[r][2] * w[9 + c];
                }
            }
            out[12] = p.divergence(&x);
            out
        };
        let x0 = self.section.lift(q);
        let mut w0 = [T::zero(); 13];
        w0[..3].copy_from_slice(&x0);
        w0[3] = T::one();
        w0[7] = T::one();
        w0[11] = T::one();

        let x_max = self.section.x_max;
        let ev = EventSpec::new(|_t, w: &[T; 13]| w[0] - w[1], self.section.direction)
            .with_constraint(move |_t, w| w[0] <= x_max);
        // tolerances apply to the 3-D state; the sensitivities share them
        let mut hit = None;
        solve(&field, T::zero(), self.max_flight, w0, &self.integ, Some(&ev), |obs| match obs {
            Observation::Event(e) if e.t > T::zero() => {
                hit = Some((e.t, e.state));
                Control::Stop
            }
            _ => Control::Continue,
        })?;
        let (flight, w1) = hit.ok_or_else(|| self.no_return())?;

        let x1 = [w1[0], w1[1], w1[2]];
        let m = |r: usize, c: usize| w1[3 + 3 * r + c];
        let f1 = p.vector_field(&x1);
        let n_f1 = f1[0] - f1[1];
        let n_f0 = {
            let f0 = p.vector_field(&x0);
            f0[0] - f0[1]
        };
        // δx1 = (I − f1 nᵀ/(n·f1)) M E δq with n = (1, −1, 0) and E δq = (δu, δu, δv)
        let me = |r: usize, col: usize| if col == 0 { m(r, 0) + m(r, 1) } else { m(r, 2) };
        let column = |col: usize| {
            let n_me = me(0, col) - me(1, col);
            [me(0, col) - f1[0] * n_me / n_f1, me(2, col) - f1[2] * n_me / n_f1]
        };
        let (c0, c1) = (column(0), column(1));
        let jac = [[c0[0], c1[0]], [c0[1], c1[1]]];
        let liouville_det = w1[12].exp() * n_f0 / n_f1;
        Ok(Linearization { image: self.section.project(&x1), flight, jacobian: jac, liouville_det })
    }
}
