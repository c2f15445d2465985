//! Fixed-size 2×2 and 3×3 helpers. Everything here is closed form.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Vec2<T> = [T; 2];
pub type Mat2<T> = [[T; 2]; 2];
pub type Mat3<T> = [[T; 3]; 3];

#[inline]
pub fn det2<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[inline]
pub fn trace2<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] + m[1][1]
}

#[inline]
pub fn mul2v<T: Real>(m: &Mat2<T>, v: &Vec2<T>) -> Vec2<T> {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
pub fn norm2<T: Real>(v: &Vec2<T>) -> T {
    v[0].hypot(v[1])
}

#[inline]
pub fn dot2<T: Real>(a: &Vec2<T>, b: &Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

/// Solves `m x = rhs` by Cramer's rule; `None` if `|det m| <= min_det`.
pub fn solve2<T: Real>(m: &Mat2<T>, rhs: &Vec2<T>, min_det: T) -> Option<Vec2<T>> {
    let det = det2(m);
    if !(det.abs() > min_det) {
        return None;
    }
    Some([(rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det, (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det])
}

pub fn mat3_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn det3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Real eigen-decomposition of a 2×2 matrix.
///
/// `values[0]` has the larger modulus. Eigenvectors are unit length with the
/// first nonzero component positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2<T> {
    pub values: [T; 2],
    pub vectors: [Vec2<T>; 2],
}

/// Spectrum of a 2×2 matrix, which may be a complex pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum2<T> {
    Real([T; 2]),
    Complex { re: T, im: T },
}

impl<T: Real> Spectrum2<T> {
    /// Eigenvalue of largest modulus, reduced to its real part.
    pub fn dominant_real_part(&self) -> T {
        match *self {
            Spectrum2::Real(v) => v[0],
            Spectrum2::Complex { re, .. } => re,
        }
    }

    pub fn spectral_radius(&self) -> T {
        match *self {
            Spectrum2::Real(v) => v[0].abs(),
            Spectrum2::Complex { re, im } => re.hypot(im),
        }
    }
}

/// Eigenvalues of a 2×2 matrix, ordered by decreasing modulus.
pub fn spectrum2<T: Real>(m: &Mat2<T>) -> Spectrum2<T> {
    spectrum_from_invariants(trace2(m), det2(m))
}

/// Roots of `λ² − tr λ + det`, ordered by decreasing modulus.
///
/// The small root is recovered as `det / large` to avoid cancellation, which
/// matters for strongly dissipative return maps where `det` is tiny.
pub fn spectrum_from_invariants<T: Real>(tr: T, det: T) -> Spectrum2<T> {
    let two = T::lit(2.0);
    let disc = tr * tr - T::lit(4.0) * det;
    if disc < T::zero() {
        return Spectrum2::Complex { re: tr / two, im: (-disc).sqrt() / two };
    }
    let sq = disc.sqrt();
    let big = if tr >= T::zero() { (tr + sq) / two } else { (tr - sq) / two };
    let small = if big == T::zero() { T::zero() } else { det / big };
    Spectrum2::Real([big, small])
}

pub fn eigen2<T: Real>(m: &Mat2<T>) -> Result<Eigen2<T>> {
    eigen2_with_det(m, det2(m))
}

/// Like [`eigen2`], but with the determinant supplied by the caller.
///
/// Useful when `det m` is known more accurately than the entries of `m`
/// allow it to be computed, e.g. from Liouville's formula.
pub fn eigen2_with_det<T: Real>(m: &Mat2<T>, det: T) -> Result<Eigen2<T>> {
    let values = match spectrum_from_invariants(trace2(m), det) {
        Spectrum2::Real(v) => v,
        Spectrum2::Complex { re, im } => {
            return Err(Error::ComplexMultipliers { re: re.to_f64_lossy(), im: im.to_f64_lossy() })
        }
    };
    let mut vectors = [[T::zero(); 2]; 2];
    for (slot, &lambda) in vectors.iter_mut().zip(values.iter()) {
        *slot = eigenvector2(m, lambda);
    }
    Ok(Eigen2 { values, vectors })
}

fn eigenvector2<T: Real>(m: &Mat2<T>, lambda: T) -> Vec2<T> {
    // Null vectors of (m - lambda I) read off either row; keep the better scaled one.
    let from_row0 = [m[0][1], lambda - m[0][0]];
    let from_row1 = [lambda - m[1][1], m[1][0]];
    let v = if norm2(&from_row0) >= norm2(&from_row1) { from_row0 } else { from_row1 };
    let n = norm2(&v);
    if n == T::zero() {
        // m is a multiple of the identity
        return [T::one(), T::zero()];
    }
    canonical_sign([v[0] / n, v[1] / n])
}

/// Flips `v` so its first nonzero component is positive.
pub fn canonical_sign<T: Real>(v: Vec2<T>) -> Vec2<T> {
    let lead = if v[0] != T::zero() { v[0] } else { v[1] };
    if lead < T::zero() {
        [-v[0], -v[1]]
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_residuals_on_saddle() {
        let m: Mat2<f64> = [[-2.404, 0.1172], [-0.0039, 1.9e-4]];
        let e = eigen2(&m).unwrap();
        for k in 0..2 {
            let mv = mul2v(&m, &e.vectors[k]);
            assert!((mv[0] - e.values[k] * e.vectors[k][0]).abs() < 1e-12);
            assert!((mv[1] - e.values[k] * e.vectors[k][1]).abs() < 1e-12);
            assert!((norm2(&e.vectors[k]) - 1.0).abs() < 1e-14);
        }
        assert!(e.values[0].abs() > 1.0 && e.values[1].abs() < 1.0);
        assert!(((e.values[0] * e.values[1]) - det2(&m)).abs() < 1e-15);
    }

    #[test]
    fn tiny_determinant_keeps_small_eigenvalue() {
        // rank-one plus 1e-14: naive (tr - sqrt)/2 would lose it entirely
        let m: Mat2<f64> = [[-2.4, 0.12], [-0.0039, 0.12 * 0.0039 / 2.4 + 1e-14 / -2.4]];
        match spectrum2(&m) {
            Spectrum2::Real([big, small]) => {
                assert!((big * small - det2(&m)).abs() < 1e-28);
                assert!(small.abs() < 1e-13);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn complex_pair_is_rejected() {
        let rot: Mat2<f64> = [[0.0, -1.0], [1.0, 0.0]];
        assert!(matches!(eigen2(&rot), Err(Error::ComplexMultipliers { .. })));
        assert_eq!(spectrum2(&rot).spectral_radius(), 1.0);
    }

    #[test]
    fn solve_and_identity_eigenvectors() {
        let m: Mat2<f64> = [[2.0, 1.0], [1.0, 3.0]];
        let x = solve2(&m, &[3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve2::<f64>(&[[1.0, 2.0], [2.0, 4.0]], &[1.0, 1.0], 1e-12).is_none());
        let e = eigen2::<f64>(&[[3.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(e.vectors[0], [1.0, 0.0]);
    }

    #[test]
    fn canonical_sign_rules() {
        assert_eq!(canonical_sign([-0.6, 0.8]), [0.6, -0.8]);
        assert_eq!(canonical_sign([0.0, -1.0]), [0.0, 1.0]);
    }
}
