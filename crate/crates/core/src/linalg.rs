//! Rank-two reductions and dense Hermitian eigen solvers backing the oracles.
//!
//! Both oracle problems live in span{h_b, h_e}. [`SpanBasis`] maps them to 2×2
//! Hermitian matrices via Gram–Schmidt; the dense paths build the full M×M
//! operator and never look at the closed-form scalars.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on power-iteration steps.
pub const POWER_ITER_MAX: usize = 100_000;
/// Convergence threshold on successive Rayleigh quotients, relative to the shift.
pub const POWER_ITER_TOL: f64 = 1e-13;

/// How an eigen oracle obtains its principal eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMethod {
    /// Analytic 2×2 problem in an orthonormal basis of span{h_b, h_e}.
    #[default]
    SpanReduction,
    /// Full M×M Hermitian eigendecomposition.
    DenseEigen,
    /// Shifted power iteration on the full M×M operator.
    PowerIteration,
}

/// Orthonormal basis {u1, u2} with h_b = x·u1 and h_e = a·u1 + b·u2.
pub(crate) struct SpanBasis {
    u1: Vec<Complex64>,
    u2: Option<Vec<Complex64>>,
    pub x: f64,
    pub a: Complex64,
    pub b: f64,
}

pub(crate) fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(p, q)| p.conj() * q).sum()
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl SpanBasis {
    pub fn new(h_b: &[Complex64], h_e: &[Complex64]) -> Result<Self> {
        if h_b.len() != h_e.len() {
            return Err(Error::Domain(format!(
                "length mismatch: {} vs {}",
                h_b.len(),
                h_e.len()
            )));
        }
        let x = norm(h_b);
        if x == 0.0 || norm(h_e) == 0.0 {
            return Err(Error::Domain("channel vector is zero".into()));
        }
        let u1: Vec<Complex64> = h_b.iter().map(|z| z / x).collect();
        let mut a = dot(&u1, h_e);
        let mut r: Vec<Complex64> = h_e.iter().zip(&u1).map(|(e, u)| e - a * u).collect();
        // second pass keeps r orthogonal to u1 when h_e is nearly parallel
        let a2 = dot(&u1, &r);
        r.iter_mut().zip(&u1).for_each(|(e, u)| *e -= a2 * u);
        a += a2;
        let b = norm(&r);
        let u2 = (b > 0.0).then(|| r.iter().map(|z| z / b).collect());
        Ok(Self { u1, u2, x, a, b })
    }

    /// v0·u1 + v1·u2, scaled to unit norm.
    pub fn lift(&self, v: [Complex64; 2]) -> Vec<Complex64> {
        let mut w: Vec<Complex64> = self.u1.iter().map(|u| v[0] * u).collect();
        if let Some(u2) = &self.u2 {
            w.iter_mut().zip(u2).for_each(|(p, u)| *p += v[1] * u);
        }
        let n = norm(&w);
        w.iter_mut().for_each(|p| *p /= n);
        w
    }
}

/// Largest root of q·ν² − t·ν + c = 0 for q > 0 and c ≤ 0, without cancellation.
pub(crate) fn top_root(q: f64, t: f64, c: f64) -> f64 {
    let s = (t * t - 4.0 * q * c).sqrt();
    if t >= 0.0 {
        (t + s) / (2.0 * q)
    } else if s - t > 0.0 {
        -2.0 * c / (s - t)
    } else {
        0.0
    }
}

/// Null vector of the singular 2×2 matrix [[m00, m01], [m10, m11]], from its stronger row.
pub(crate) fn null_vector(
    m00: Complex64,
    m01: Complex64,
    m10: Complex64,
    m11: Complex64,
) -> [Complex64; 2] {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let (r0, r1) = (
        m00.norm_sqr() + m01.norm_sqr(),
        m10.norm_sqr() + m11.norm_sqr(),
    );
    match (r0 >= r1, r0.max(r1) > 0.0) {
        (_, false) => [one, zero],
        (true, true) => [-m01, m00],
        (false, true) => [-m11, m10],
    }
}

/// Σ_k c_k·h_k·h_kᴴ as a dense M×M matrix.
pub(crate) fn dense_rank_sum(terms: &[(f64, &[Complex64])]) -> DMatrix<Complex64> {
    let m = terms[0].1.len();
    let mut out = DMatrix::<Complex64>::zeros(m, m);
    for &(c, h) in terms {
        let v = DVector::from_column_slice(h);
        out += (&v * v.adjoint()) * Complex64::new(c, 0.0);
    }
    out
}

/// Principal eigenpair from a full Hermitian eigendecomposition.
pub(crate) fn dense_top(a: DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let eig = a.symmetric_eigen();
    let (mut best, mut idx) = (f64::NEG_INFINITY, 0);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > best {
            best = l;
            idx = i;
        }
    }
    (best, eig.eigenvectors.column(idx).into_owned())
}

/// A^{-1/2} for Hermitian positive definite A, via its eigendecomposition.
pub(crate) fn dense_inv_sqrt(a: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = a.symmetric_eigen();
    if let Some(&l) = eig.eigenvalues.iter().find(|&&l| l <= 0.0) {
        return Err(Error::Numerical {
            message: "matrix is not positive definite".into(),
            residual: l,
        });
    }
    let d = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::new(l.sqrt().recip(), 0.0)),
    );
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Principal eigenpair of Hermitian `a` by power iteration on a + shift·I.
pub(crate) fn power_top(a: &DMatrix<Complex64>, shift: f64) -> Result<(f64, DVector<Complex64>)> {
    let n = a.nrows();
    let mut v = DVector::from_fn(n, |i, _| {
        let t = i as f64;
        Complex64::new((1.618 * t + 0.3).sin() + 1.5, (2.7 * t + 0.7).cos())
    });
    v /= Complex64::new(v.norm(), 0.0);
    let scale = shift.abs().max(1.0);
    let mut prev = f64::NAN;
    let mut step = 0.0;
    for _ in 0..POWER_ITER_MAX {
        let mut y = a * &v;
        y += &v * Complex64::new(shift, 0.0);
        let q = v.dotc(&y).re;
        let ny = y.norm();
        if ny == 0.0 {
            return Ok((-shift, v));
        }
        v = y / Complex64::new(ny, 0.0);
        step = (q - prev).abs();
        if step < POWER_ITER_TOL * scale {
            return Ok((q - shift, v));
        }
        prev = q;
    }
    Err(Error::Numerical {
        message: format!("power iteration did not converge in {POWER_ITER_MAX} steps"),
        residual: step / scale,
    })
}

/// Maximum absolute column sum.
pub(crate) fn norm_one(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn span_basis_reconstructs_inputs() {
        let hb = [c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7)];
        let he = [c(0.2, 0.0), c(1.0, 1.0), c(-0.4, 0.9)];
        let s = SpanBasis::new(&hb, &he).unwrap();
        let ub = s.lift([c(1.0, 0.0), c(0.0, 0.0)]);
        for (u, h) in ub.iter().zip(&hb) {
            assert!((u * s.x - h).norm() < 1e-14);
        }
        let ue = s.lift([s.a, c(s.b, 0.0)]);
        let ne = norm(&he);
        for (u, h) in ue.iter().zip(&he) {
            assert!((u * ne - h).norm() < 1e-14);
        }
    }

    #[test]
    fn parallel_inputs_have_no_second_direction() {
        let hb = [c(1.0, 0.0), c(0.0, 1.0)];
        let he = [c(0.0, 2.0), c(-2.0, 0.0)];
        let s = SpanBasis::new(&hb, &he).unwrap();
        assert!(s.b < 1e-15);
    }

    #[test]
    fn top_root_branches_agree() {
        for &(q, t, c) in &[
            (2.0, 3.0, -1.0),
            (2.0, -3.0, -1.0),
            (1.0, -1e8, -1e-8),
            (1.0, 4.0, 0.0),
        ] {
            let r = top_root(q, t, c);
            assert!(
                (q * r * r - t * r + c).abs()
                    <= 1e-12
                        * (q * r * r)
                            .abs()
                            .max(t.abs() * r.abs())
                            .max(c.abs())
                            .max(1e-300)
            );
        }
        assert_eq!(top_root(1.0, -2.0, 0.0), 0.0);
    }

    #[test]
    fn dense_paths_agree() {
        let h1: Vec<Complex64> = (0..9)
            .map(|i| c((i as f64).sin(), (0.3 * i as f64).cos()))
            .collect();
        let h2: Vec<Complex64> = (0..9)
            .map(|i| c((0.7 * i as f64).cos(), -(1.1 * i as f64).sin()))
            .collect();
        let a = dense_rank_sum(&[(3.0, &h1), (-2.0, &h2)]);
        let (l_eig, _) = dense_top(a.clone());
        let (l_pow, v) = power_top(&a, norm_one(&a)).unwrap();
        assert!((l_eig - l_pow).abs() < 1e-9 * l_eig.abs());
        let r = &a * &v - &v * Complex64::new(l_pow, 0.0);
        assert!(r.norm() < 1e-5 * l_eig.abs());
    }

    #[test]
    fn inverse_square_root() {
        let h: Vec<Complex64> = (0..5).map(|i| c(i as f64, 1.0)).collect();
        let mut q = dense_rank_sum(&[(0.5, &h)]);
        q += DMatrix::<Complex64>::identity(5, 5);
        let s = dense_inv_sqrt(q.clone()).unwrap();
        let id = &s * q * &s;
        assert!((id - DMatrix::<Complex64>::identity(5, 5)).norm() < 1e-12);
    }
}
