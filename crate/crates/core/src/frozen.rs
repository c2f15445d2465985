//! Stability of the inner equilibrium and the Hopf point of the frozen system.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{det3, Mat3};
use crate::scalar::Real;
use crate::system::RosslerParams;

/// Coefficients `(p2, p1, p0)` of `λ³ + p2 λ² + p1 λ + p0 = det(λI − J)`.
pub fn characteristic_polynomial<T: Real>(j: &Mat3<T>) -> [T; 3] {
    let tr = j[0][0] + j[1][1] + j[2][2];
    let minors = (j[0][0] * j[1][1] - j[0][1] * j[1][0])
        + (j[0][0] * j[2][2] - j[0][2] * j[2][0])
        + (j[1][1] * j[2][2] - j[1][2] * j[2][1]);
    [-tr, minors, -det3(j)]
}

/// Roots of a monic cubic, sorted by real part descending (then imaginary
/// part descending).
pub fn cubic_roots<T: Real>(coeffs: [T; 3]) -> [Complex<T>; 3] {
    let [p2, p1, p0] = coeffs;
    let poly = |x: T| ((x + p2) * x + p1) * x + p0;
    let dpoly = |x: T| (T::lit(3.0) * x + T::lit(2.0) * p2) * x + p1;

    // a real root from Cardano on the depressed cubic t³ + pt + q, x = t − p2/3
    let three = T::lit(3.0);
    let shift = p2 / three;
    let p = p1 - p2 * p2 / three;
    let q = T::lit(2.0) * p2 * p2 * p2 / T::lit(27.0) - p2 * p1 / three + p0;
    let disc = q * q / T::lit(4.0) + p * p * p / T::lit(27.0);
    let t = if disc >= T::zero() {
        let s = disc.sqrt();
        (-q / T::lit(2.0) + s).cbrt() + (-q / T::lit(2.0) - s).cbrt()
    } else {
        // three real roots; take the largest
        let r = (-p / three).sqrt();
        let arg = (T::lit(3.0) * q / (T::lit(2.0) * p * r)).max(-T::one()).min(T::one());
        T::lit(2.0) * r * (arg.acos() / three).cos()
    };
    let mut x = t - shift;
    for _ in 0..8 {
        let d = dpoly(x);
        if d == T::zero() {
            break;
        }
        let next = x - poly(x) / d;
        if !next.is_finite() || (poly(next).abs() >= poly(x).abs()) {
            break;
        }
        x = next;
    }

    // deflate to λ² + b λ + c
    let b = p2 + x;
    let c = p1 + x * b;
    let d = b * b - T::lit(4.0) * c;
    let two = T::lit(2.0);
    let (r1, r2) = if d >= T::zero() {
        let sq = d.sqrt();
        let big = if b >= T::zero() { (-b - sq) / two } else { (-b + sq) / two };
        let small = if big == T::zero() { T::zero() } else { c / big };
        (Complex::new(big, T::zero()), Complex::new(small, T::zero()))
    } else {
        let im = (-d).sqrt() / two;
        (Complex::new(-b / two, im), Complex::new(-b / two, -im))
    };
    let mut roots = [Complex::new(x, T::zero()), r1, r2];
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    roots
}

/// Eigenvalues of the Jacobian at the inner equilibrium.
pub fn equilibrium_eigenvalues<T: Real>(p: &RosslerParams<T>) -> Result<[Complex<T>; 3]> {
    let eq = p.equilibria()?.inner;
    Ok(cubic_roots(characteristic_polynomial(&p.jacobian(&eq.to_array()))))
}

/// Real part of the complex-conjugate eigenvalue pair, if there is one.
pub fn complex_pair_real_part<T: Real>(p: &RosslerParams<T>) -> Result<Option<Complex<T>>> {
    let ev = equilibrium_eigenvalues(p)?;
    Ok(ev.iter().copied().find(|z| z.im > T::zero()))
}

/// Parameter `a` where the complex pair at the inner equilibrium crosses
/// the imaginary axis, by bisection.
pub fn locate_hopf<T: Real>(b: T, c: T, a_range: (T, T)) -> Result<T> {
    let (lo, hi) = a_range;
    if !(lo < hi) {
        return Err(Error::invalid("a_range must satisfy lo < hi"));
    }
    let no_bracket = || Error::NoBracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() };
    let re_at = |a: T| -> Result<T> {
        complex_pair_real_part(&RosslerParams::new(a, b, c))?.map(|z| z.re).ok_or_else(no_bracket)
    };
    let (mut a_lo, mut a_hi) = (lo, hi);
    let (mut f_lo, f_hi) = (re_at(lo)?, re_at(hi)?);
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(no_bracket());
    }
    let re_tol = T::tol_floor(1e-10, 16.0);
    for _ in 0..200 {
        let mid = (a_lo + a_hi) / T::lit(2.0);
        if mid <= a_lo || mid >= a_hi {
            break;
        }
        let f_mid = re_at(mid)?;
        if f_mid.abs() < re_tol && a_hi - a_lo < T::lit(1e-12).max(T::epsilon() * T::lit(4.0)) {
            return Ok(mid);
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            a_lo = mid;
            f_lo = f_mid;
        } else {
            a_hi = mid;
        }
    }
    Ok((a_lo + a_hi) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn char_residual(p: &RosslerParams<f64>, lambda: Complex<f64>) -> f64 {
        let eq = p.equilibria().unwrap().inner.to_array();
        let j = p.jacobian(&eq);
        let m = |r: usize, c: usize| Complex::new(j[r][c], 0.0) - if r == c { lambda } else { Complex::new(0.0, 0.0) };
        let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        det.norm()
    }

    #[test]
    fn stable_for_negative_a() {
        let p = RosslerParams::new(-0.2, 0.2, 5.7);
        let ev = equilibrium_eigenvalues(&p).unwrap();
        assert!(ev.iter().all(|z| z.re < 0.0));
        for z in ev {
            assert!(char_residual(&p, z) < 1e-8);
        }
    }

    #[test]
    fn unstable_pair_after_hopf() {
        let p = RosslerParams::new(0.1, 0.2, 5.7);
        let ev = equilibrium_eigenvalues(&p).unwrap();
        assert!(ev[0].re > 0.0 && ev[0].im != 0.0);
        assert_eq!(ev[0].re, ev[1].re);
        assert_eq!(ev[0].im, -ev[1].im);
    }

    #[test]
    fn sum_and_product_match_trace_and_det() {
        for a in [-0.2, -0.05, 0.0, 0.1, 0.3] {
            let p = RosslerParams::new(a, 0.2, 5.7);
            let eq = p.equilibria().unwrap().inner.to_array();
            let j = p.jacobian(&eq);
            let ev = equilibrium_eigenvalues(&p).unwrap();
            let sum: Complex<f64> = ev.iter().sum();
            let prod = ev[0] * ev[1] * ev[2];
            assert!((sum.re - (j[0][0] + j[1][1] + j[2][2])).abs() < 1e-8 && sum.im.abs() < 1e-8);
            assert!((prod.re - det3(&j)).abs() < 1e-8 && prod.im.abs() < 1e-8);
        }
    }

    #[test]
    fn cubic_with_three_real_roots() {
        // (x − 1)(x − 2)(x + 3) = x³ − 7x + 6
        let r = cubic_roots([0.0, -7.0, 6.0]);
        let re: Vec<f64> = r.iter().map(|z| z.re).collect();
        assert!((re[0] - 2.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12 && (re[2] + 3.0).abs() < 1e-12);
        assert!(r.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn hopf_location() {
        let a: f64 = locate_hopf(0.2, 5.7, (-0.05, 0.05)).unwrap();
        assert!((a - 0.005978).abs() < 1e-3);
        let pair = complex_pair_real_part(&RosslerParams::new(a, 0.2, 5.7)).unwrap().unwrap();
        assert!(pair.re.abs() < 1e-10);
        assert!(pair.im > 0.1);
        let other: f64 = locate_hopf(0.2, 5.7, (-0.01, 0.2)).unwrap();
        assert!((a - other).abs() < 1e-8);
        assert!(matches!(locate_hopf(0.2, 5.7, (-0.2, -0.1)), Err(Error::NoBracket { .. })));
    }
}
