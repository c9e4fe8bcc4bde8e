//! Minimal dense linear-algebra layer: symmetric matrices, LDL^T solves,
//! dominant-eigenvalue extraction by shifted power iteration, and the Gauss
//! error function. Everything here is pure and allocation-local.

use crate::error::{Error, Result};

/// Dense symmetric matrix. Construction symmetrizes by averaging, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>, // row-major n*n
}

impl SymMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n*n");
        let mut a = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = m;
                a[j * n + i] = m;
            }
        }
        SymMatrix { n, a }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = d[i];
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Adds `coef * I` to the diagonal.
    pub fn add_diag(&mut self, coef: f64) {
        for i in 0..self.n {
            self.a[i * self.n + i] += coef;
        }
    }

    /// self += coef * other (orders must match).
    pub fn add_scaled(&mut self, coef: f64, other: &SymMatrix) {
        assert_eq!(self.n, other.n);
        for (x, y) in self.a.iter_mut().zip(other.a.iter()) {
            *x += coef * y;
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// LDL^T factorization of a symmetric matrix, reusable for repeated solves.
pub struct LdltFactor {
    n: usize,
    l: Vec<f64>, // unit lower triangle, row-major
    d: Vec<f64>,
}

/// Pivot magnitudes below `1e-12 * max|A|` reject the factorization.
const PIVOT_REL_TOL: f64 = 1e-12;

pub fn factor_ldlt(a: &SymMatrix) -> Result<LdltFactor> {
    let n = a.order();
    let threshold = PIVOT_REL_TOL * a.max_abs().max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = a.get(j, j);
        for k in 0..j {
            dj -= l[j * n + k] * l[j * n + k] * d[k];
        }
        if dj.abs() < threshold {
            return Err(Error::SingularMatrix { pivot: dj.abs(), threshold });
        }
        d[j] = dj;
        l[j * n + j] = 1.0;
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k] * d[k];
            }
            l[i * n + j] = v / dj;
        }
    }
    Ok(LdltFactor { n, l, d })
}

impl LdltFactor {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let n = self.n;
        let mut x = b.to_vec();
        // forward: L z = b
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
        }
        // diagonal
        for i in 0..n {
            x[i] /= self.d[i];
        }
        // backward: L^T x = z
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
        }
        Ok(x)
    }
}

/// Solves A x = b for symmetric nonsingular A. Relative residual is bounded
/// by the factorization accuracy; callers needing the bound asserted do so in
/// tests.
pub fn solve_linear(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.order() {
        return Err(Error::DimensionMismatch { expected: a.order(), got: b.len() });
    }
    factor_ldlt(a)?.solve(b)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Largest (rightmost) eigenvalue and a unit eigenvector of a symmetric
/// matrix, by power iteration on A + sI with a Gershgorin shift s that makes
/// the spectrum nonnegative.
pub fn largest_eigenvalue(
    a: &SymMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    assert!(tol > 0.0, "tol must be positive");
    let n = a.order();
    // Gershgorin bound on the most negative eigenvalue.
    let mut shift = 0.0f64;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if j != i {
                row_sum += a.get(i, j).abs();
            }
        }
        shift = shift.max(row_sum - a.get(i, i));
    }
    shift = shift.max(0.0);

    // Deterministic quasi-random start to avoid accidental orthogonality.
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let mut z = (i as u64).wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(0x2545f4914f6cdd1d);
            z ^= z >> 33;
            z = z.wrapping_mul(0xff51afd7ed558ccd);
            z ^= z >> 33;
            (z as f64 / u64::MAX as f64) - 0.5 + 1.0
        })
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    // Residual is judged relative to the matrix scale, not |lambda|: a top
    // eigenvalue near zero (e.g. a negative-semidefinite input) would make a
    // |lambda|-relative test unattainable.
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut w = a.mul_vec(&v);
        for i in 0..n {
            w[i] += shift * v[i];
        }
        let nw = norm2(&w);
        if nw < f64::MIN_POSITIVE {
            // A + sI annihilates v: v is an exact eigenvector for eigenvalue -s.
            return Ok((-shift, v));
        }
        w.iter_mut().for_each(|x| *x /= nw);
        // Rayleigh quotient on the original matrix.
        let av = a.mul_vec(&w);
        let lambda = dot(&w, &av);
        residual = (0..n)
            .map(|i| (av[i] - lambda * w[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        v = w;
        if residual <= tol * lambda.abs().max(scale) {
            return Ok((lambda, v));
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

pub const EIG_TOL: f64 = 1e-10;
pub const EIG_MAX_ITER: usize = 10_000;

/// Full symmetric eigensolve by cyclic Jacobi sweeps; returns the largest
/// eigenvalue and its eigenvector. Unconditionally convergent, O(n^3) per
/// sweep — the fallback for spectra too clustered for power iteration.
pub fn jacobi_largest(a: &SymMatrix) -> (f64, Vec<f64>) {
    let n = a.order();
    let mut m: Vec<f64> = (0..n * n).map(|k| a.get(k / n, k % n)).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let top = (0..n).max_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j])).unwrap();
    let vec: Vec<f64> = (0..n).map(|k| v[k * n + top]).collect();
    (m[top * n + top], vec)
}

/// Largest eigenvalue with guaranteed termination: power iteration first,
/// Jacobi sweeps when the spectrum is too clustered for it to converge.
pub fn largest_eigenvalue_robust(a: &SymMatrix) -> (f64, Vec<f64>) {
    match largest_eigenvalue(a, EIG_TOL, EIG_MAX_ITER) {
        Ok(r) => r,
        Err(_) => jacobi_largest(a),
    }
}

/// Gauss error function, |error| <= 1e-12 on finite reals. Alternating
/// Maclaurin series for |z| <= 2, Lentz-style continued fraction for the
/// complementary function beyond.
pub fn erf(z: f64) -> f64 {
    if z < 0.0 {
        return -erf(-z);
    }
    if z == 0.0 {
        return 0.0;
    }
    if z > 6.0 {
        return 1.0;
    }
    const TWO_OVER_SQRT_PI: f64 = 1.1283791670955126;
    if z <= 2.0 {
        // sum_n (-1)^n z^(2n+1) / (n! (2n+1))
        let zz = z * z;
        let mut term = z;
        let mut sum = 0.0;
        let mut n = 0u32;
        loop {
            let contrib = term / (2 * n + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
            n += 1;
            term *= -zz / n as f64;
        }
        TWO_OVER_SQRT_PI * sum
    } else {
        // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(...))))
        let mut f = 0.0;
        for k in (1..=80).rev() {
            f = (k as f64 / 2.0) / (z + f);
        }
        let erfc = (-z * z).exp() / std::f64::consts::PI.sqrt() / (z + f);
        1.0 - erfc
    }
}
