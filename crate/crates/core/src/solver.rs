//! The quadratic-margin semi-supervised classifier: closed-form weights, the
//! convexity guard, decision scores, and the default regularization policy.
//!
//! Weights solve (lambda*I - alpha_u*(1/n)X_u X_u^T + alpha_l*(1/n)X_l X_l^T)
//! omega = (1/sqrt(n)) X_l y_l; scores are omega^T x / sqrt(n).

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{self, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub alpha_l: f64,
    pub alpha_u: f64,
    pub lambda: f64,
}

impl HyperParams {
    pub fn new(alpha_l: f64, alpha_u: f64, lambda: f64) -> Self {
        HyperParams { alpha_l, alpha_u, lambda }
    }
}

/// Default relative inflation of lambda above the spectral threshold.
pub const LAMBDA_INFLATION: f64 = 1e-3;

/// Which Gram matrix the default lambda policy takes its top eigenvalue from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaSource {
    /// (1/n) X X^T over all samples (default).
    Whole,
    /// (1/n) X_u X_u^T over unlabeled samples only.
    Unlabeled,
}

impl std::fmt::Display for LambdaSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaSource::Whole => write!(f, "whole"),
            LambdaSource::Unlabeled => write!(f, "unlabeled"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub omega: Vec<f64>,
    pub n_train: usize,
    pub hyper: HyperParams,
    /// Per-feature shift subtracted from every input before scoring; empty
    /// when the model was trained on raw (uncentered) features.
    pub offset: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    omega: Vec<f64>,
    n_train: usize,
    alpha_l: f64,
    alpha_u: f64,
    lambda: f64,
    #[serde(default)]
    offset: Vec<f64>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile {
            omega: self.omega.clone(),
            n_train: self.n_train,
            alpha_l: self.hyper.alpha_l,
            alpha_u: self.hyper.alpha_u,
            lambda: self.hyper.lambda,
            offset: self.offset.clone(),
        })
        .expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("bad model file: {e}")))?;
        if f.n_train == 0 {
            return Err(Error::Config("model n_train must be >= 1".into()));
        }
        if !f.offset.is_empty() && f.offset.len() != f.omega.len() {
            return Err(Error::Config(format!(
                "model offset has {} entries for {} weights",
                f.offset.len(),
                f.omega.len()
            )));
        }
        Ok(LinearModel {
            omega: f.omega,
            n_train: f.n_train,
            hyper: HyperParams::new(f.alpha_l, f.alpha_u, f.lambda),
            offset: f.offset,
        })
    }
}

static FIT_COUNT: AtomicU64 = AtomicU64::new(0);

/// Number of closed-form fits performed so far in this process. Used by
/// selection tests to assert how many solves a strategy needed.
pub fn fit_count() -> u64 {
    FIT_COUNT.load(Ordering::Relaxed)
}

/// (1 + inflation) times the top eigenvalue of the chosen (1/n)-scaled Gram.
pub fn default_lambda(ds: &Dataset, source: LambdaSource, inflation: f64) -> Result<f64> {
    let idx: Vec<usize> = match source {
        LambdaSource::Whole => (0..ds.n()).collect(),
        LambdaSource::Unlabeled => ds.unlabeled_idx().to_vec(),
    };
    if idx.is_empty() {
        return Err(Error::InsufficientSamples(format!(
            "lambda policy '{source}' has no samples to form a Gram matrix"
        )));
    }
    let gram = ds.scaled_gram(&idx);
    let (top, _) = numerics::largest_eigenvalue_robust(&gram);
    Ok((1.0 + inflation) * top)
}

/// lambda minus the top eigenvalue of alpha_u*(1/n)X_u X_u^T -
/// alpha_l*(1/n)X_l X_l^T. The objective is convex iff this is positive.
pub fn convexity_margin(ds: &Dataset, hp: &HyperParams) -> Result<f64> {
    let mut diff = SymMatrix::zeros(ds.dim());
    diff.add_scaled(hp.alpha_u, &ds.scaled_gram(ds.unlabeled_idx()));
    diff.add_scaled(-hp.alpha_l, &ds.scaled_gram(ds.labeled_idx()));
    let (top, _) = numerics::largest_eigenvalue_robust(&diff);
    Ok(hp.lambda - top)
}

/// lambda*I + alpha_l*(1/n)X_l X_l^T - alpha_u*(1/n)X_u X_u^T.
#[cfg(test)]
fn system_matrix(ds: &Dataset, hp: &HyperParams) -> SymMatrix {
    let mut a = SymMatrix::zeros(ds.dim());
    a.add_scaled(-hp.alpha_u, &ds.scaled_gram(ds.unlabeled_idx()));
    a.add_scaled(hp.alpha_l, &ds.scaled_gram(ds.labeled_idx()));
    a.add_diag(hp.lambda);
    a
}

/// Closed-form fit via a single symmetric solve; refuses non-convex settings.
pub fn fit_qlds(ds: &Dataset, hp: &HyperParams) -> Result<LinearModel> {
    if ds.n_labeled() == 0 {
        return Err(Error::InsufficientSamples("fit requires labeled samples".into()));
    }
    let g_u = ds.scaled_gram(ds.unlabeled_idx());
    let g_l = ds.scaled_gram(ds.labeled_idx());
    // alpha_u = 0 subtracts nothing, so lambda > 0 already implies convexity;
    // skip the eigenvalue computation on that hot path.
    let margin = if hp.alpha_u == 0.0 {
        hp.lambda
    } else {
        let (top_u, _) = numerics::largest_eigenvalue_robust(&g_u);
        if hp.lambda > hp.alpha_u * top_u {
            // sufficient: lambda_max(au*G_u - al*G_l) <= au*lambda_max(G_u),
            // so this conservative margin already certifies convexity
            hp.lambda - hp.alpha_u * top_u
        } else {
            let mut diff = SymMatrix::zeros(ds.dim());
            diff.add_scaled(hp.alpha_u, &g_u);
            diff.add_scaled(-hp.alpha_l, &g_l);
            let (top, _) = numerics::largest_eigenvalue_robust(&diff);
            hp.lambda - top
        }
    };
    if margin <= 0.0 {
        return Err(Error::NonConvex { margin });
    }
    let mut a = SymMatrix::zeros(ds.dim());
    a.add_scaled(-hp.alpha_u, &g_u);
    a.add_scaled(hp.alpha_l, &g_l);
    a.add_diag(hp.lambda);
    let b = ds.labeled_response();
    let omega = numerics::solve_linear(&a, &b)?;
    FIT_COUNT.fetch_add(1, Ordering::Relaxed);
    Ok(LinearModel { omega, n_train: ds.n(), hyper: *hp, offset: Vec::new() })
}

/// f(x) = omega^T x / sqrt(n_train), one score per column of `points`
/// (column-major d x m).
pub fn decision_scores(model: &LinearModel, points: &[f64]) -> Result<Vec<f64>> {
    let d = model.dim();
    if d == 0 || points.len() % d != 0 {
        return Err(Error::DimensionMismatch { expected: d, got: points.len() });
    }
    let s = 1.0 / (model.n_train as f64).sqrt();
    Ok(points
        .chunks_exact(d)
        .map(|x| {
            let dot = if model.offset.is_empty() {
                numerics::dot(&model.omega, x)
            } else {
                model
                    .omega
                    .iter()
                    .zip(x)
                    .zip(&model.offset)
                    .map(|((w, xi), m)| w * (xi - m))
                    .sum()
            };
            s * dot
        })
        .collect())
}

/// Sign rule: -1 when f(x) < 0, +1 otherwise (ties go to +1).
pub fn predict(model: &LinearModel, points: &[f64]) -> Result<Vec<f64>> {
    Ok(decision_scores(model, points)?
        .into_iter()
        .map(|f| if f < 0.0 { -1.0 } else { 1.0 })
        .collect())
}

/// Fraction of unlabeled points misclassified against the ground truth.
pub fn transductive_error(model: &LinearModel, ds: &Dataset) -> Result<f64> {
    let truth = ds.true_unlabeled_labels().ok_or(Error::MissingTruth)?;
    let pts = ds.submatrix(ds.unlabeled_idx());
    let preds = predict(model, &pts)?;
    let wrong = preds.iter().zip(truth).filter(|(p, t)| *p != *t).count();
    Ok(wrong as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_gmm, GmmSpec};

    fn ds_from(
        d: usize,
        cols: Vec<f64>,
        labeled: Vec<usize>,
        labels: Vec<f64>,
        truth: Option<Vec<f64>>,
    ) -> Dataset {
        let n = cols.len() / d;
        let unlabeled: Vec<usize> = (0..n).filter(|i| !labeled.contains(i)).collect();
        Dataset::new(d, n, cols, labeled, unlabeled, labels, truth).unwrap()
    }

    // Cyclic Jacobi oracle for top eigenvalues of small symmetric matrices.
    fn jacobi_top(a: &SymMatrix) -> f64 {
        let n = a.order();
        let mut m: Vec<f64> = (0..n * n).map(|k| a.get(k / n, k % n)).collect();
        for _ in 0..100 {
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq.abs() < 1e-300 {
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
                }
            }
        }
        (0..n).map(|i| m[i * n + i]).fold(f64::NEG_INFINITY, f64::max)
    }

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn random_ds(d: usize, n_l: usize, n_u: usize, state: &mut u64) -> Dataset {
        let n = n_l + n_u;
        let cols: Vec<f64> = (0..d * n).map(|_| splitmix(state)).collect();
        let labels: Vec<f64> = (0..n_l).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let truth: Vec<f64> = (0..n_u).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Dataset::new(
            d,
            n,
            cols,
            (0..n_l).collect(),
            (n_l..n).collect(),
            labels,
            if n_u > 0 { Some(truth) } else { None },
        )
        .unwrap()
    }

    #[test]
    fn default_lambda_rank_one() {
        let ds = ds_from(2, vec![1.0, 0.0], vec![0], vec![1.0], None);
        let l = default_lambda(&ds, LambdaSource::Whole, 0.0).unwrap();
        assert!((l - 1.0).abs() < 1e-10);
        let inflated = default_lambda(&ds, LambdaSource::Whole, 1e-3).unwrap();
        assert!((inflated - 1.001).abs() < 1e-10);
    }

    #[test]
    fn default_lambda_matches_jacobi() {
        let mut state = 17u64;
        let ds = random_ds(4, 6, 4, &mut state);
        let l = default_lambda(&ds, LambdaSource::Whole, 1e-3).unwrap();
        let idx: Vec<usize> = (0..ds.n()).collect();
        let oracle = jacobi_top(&ds.scaled_gram(&idx));
        assert!((l - 1.001 * oracle).abs() < 1e-9);
        let lu = default_lambda(&ds, LambdaSource::Unlabeled, 0.0).unwrap();
        let ou = jacobi_top(&ds.scaled_gram(ds.unlabeled_idx()));
        assert!((lu - ou).abs() < 1e-9);
    }

    #[test]
    fn margin_without_unlabeled_weight() {
        let mut state = 21u64;
        let ds = random_ds(3, 4, 4, &mut state);
        let hp = HyperParams::new(1.0, 0.0, 0.5);
        // -alpha_l * G_l is negative semidefinite, so the margin is >= lambda.
        let m = convexity_margin(&ds, &hp).unwrap();
        assert!(m >= 0.5 - 1e-12);
    }

    #[test]
    fn margin_at_inflated_lambda() {
        let mut state = 33u64;
        let ds = random_ds(3, 3, 6, &mut state);
        let top = jacobi_top(&ds.scaled_gram(ds.unlabeled_idx()));
        let hp = HyperParams::new(0.0, 1.0, 1.001 * top);
        let m = convexity_margin(&ds, &hp).unwrap();
        assert!((m - 1e-3 * top).abs() < 1e-9);
    }

    #[test]
    fn margin_matches_jacobi() {
        let mut state = 9u64;
        let ds = random_ds(2, 1, 2, &mut state);
        let hp = HyperParams::new(0.7, 1.3, 2.0);
        let mut diff = SymMatrix::zeros(2);
        diff.add_scaled(1.3, &ds.scaled_gram(ds.unlabeled_idx()));
        diff.add_scaled(-0.7, &ds.scaled_gram(ds.labeled_idx()));
        let oracle = 2.0 - jacobi_top(&diff);
        let m = convexity_margin(&ds, &hp).unwrap();
        assert!((m - oracle).abs() < 1e-9);
    }

    #[test]
    fn fit_scalar_closed_form() {
        let ds = ds_from(1, vec![2.0], vec![0], vec![1.0], None);
        let hp = HyperParams::new(1.0, 0.0, 1.0);
        let model = fit_qlds(&ds, &hp).unwrap();
        assert!((model.omega[0] - 0.4).abs() < 1e-12);
        let scores = decision_scores(&model, &[1.0]).unwrap();
        assert!((scores[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn fit_zero_labeled_features() {
        let ds = ds_from(2, vec![0.0, 0.0, 1.0, 1.0], vec![0], vec![1.0], Some(vec![1.0]));
        let model = fit_qlds(&ds, &HyperParams::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(model.omega, vec![0.0, 0.0]);
    }

    #[test]
    fn fit_nonconvex_rejected() {
        let mut state = 3u64;
        let ds = random_ds(3, 2, 8, &mut state);
        let top = jacobi_top(&ds.scaled_gram(ds.unlabeled_idx()));
        let hp = HyperParams::new(0.0, 1.0, 0.5 * top);
        assert!(matches!(fit_qlds(&ds, &hp), Err(Error::NonConvex { .. })));
    }

    #[test]
    fn unlabeled_scores_match_direct_formula() {
        // With alpha_l = 0 the unlabeled scores reduce to
        // (1/n) y_l^T X_l^T (lambda I - (1/n) X_u X_u^T)^{-1} X_u.
        let mut state = 77u64;
        let ds = random_ds(5, 3, 5, &mut state);
        let top = jacobi_top(&ds.scaled_gram(ds.unlabeled_idx()));
        let lambda = 1.5 * top + 0.5;
        let model = fit_qlds(&ds, &HyperParams::new(0.0, 1.0, lambda)).unwrap();
        let scores = decision_scores(&model, &ds.submatrix(ds.unlabeled_idx())).unwrap();

        // independent route: Gaussian elimination on the resolvent
        let n = ds.n() as f64;
        let mut a = SymMatrix::zeros(5);
        a.add_scaled(-1.0, &ds.scaled_gram(ds.unlabeled_idx()));
        a.add_diag(lambda);
        let mut rhs = vec![0.0; 5];
        for (&j, &y) in ds.labeled_idx().iter().zip(ds.labels()) {
            for r in 0..5 {
                rhs[r] += y * ds.column(j)[r];
            }
        }
        // plain GE with partial pivoting
        let dsz = 5usize;
        let mut m = vec![0.0; dsz * (dsz + 1)];
        for i in 0..dsz {
            for j in 0..dsz {
                m[i * (dsz + 1) + j] = a.get(i, j);
            }
            m[i * (dsz + 1) + dsz] = rhs[i];
        }
        for col in 0..dsz {
            let piv = (col..dsz)
                .max_by(|&r, &s| {
                    m[r * (dsz + 1) + col].abs().total_cmp(&m[s * (dsz + 1) + col].abs())
                })
                .unwrap();
            for j in 0..=dsz {
                m.swap(col * (dsz + 1) + j, piv * (dsz + 1) + j);
            }
            for r in (col + 1)..dsz {
                let f = m[r * (dsz + 1) + col] / m[col * (dsz + 1) + col];
                for j in col..=dsz {
                    m[r * (dsz + 1) + j] -= f * m[col * (dsz + 1) + j];
                }
            }
        }
        let mut q = vec![0.0; dsz];
        for i in (0..dsz).rev() {
            let mut v = m[i * (dsz + 1) + dsz];
            for j in (i + 1)..dsz {
                v -= m[i * (dsz + 1) + j] * q[j];
            }
            q[i] = v / m[i * (dsz + 1) + i];
        }
        for (k, &j) in ds.unlabeled_idx().iter().enumerate() {
            let direct = numerics::dot(&q, ds.column(j)) / n;
            assert!((scores[k] - direct).abs() < 1e-10, "col {k}");
        }
    }

    #[test]
    fn scores_linear_and_homogeneous() {
        let mut state = 4u64;
        let ds = random_ds(3, 4, 2, &mut state);
        let model = fit_qlds(&ds, &HyperParams::new(1.0, 0.0, 2.0)).unwrap();
        assert_eq!(decision_scores(&model, &[0.0, 0.0, 0.0]).unwrap(), vec![0.0]);
        let x = [0.4, -1.2, 0.7];
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let f1 = decision_scores(&model, &x).unwrap()[0];
        let f2 = decision_scores(&model, &x2).unwrap()[0];
        assert!((f2 - 2.0 * f1).abs() < 1e-12);
    }

    #[test]
    fn predict_sign_rule() {
        let model = LinearModel {
            omega: vec![1.0],
            n_train: 1,
            hyper: HyperParams::new(1.0, 0.0, 1.0),
            offset: vec![],
        };
        assert_eq!(predict(&model, &[-0.3]).unwrap(), vec![-1.0]);
        assert_eq!(predict(&model, &[0.0]).unwrap(), vec![1.0]);
        assert_eq!(predict(&model, &[0.3]).unwrap(), vec![1.0]);
    }

    #[test]
    fn predictions_invariant_under_triplet_scaling() {
        let mut state = 55u64;
        let ds = random_ds(4, 6, 10, &mut state);
        let lambda = default_lambda(&ds, LambdaSource::Whole, 1e-3).unwrap();
        let base = HyperParams::new(0.8, 0.6, lambda);
        let pts = ds.submatrix(ds.unlabeled_idx());
        let p0 = predict(&fit_qlds(&ds, &base).unwrap(), &pts).unwrap();
        for t in [0.1, 7.0, 10.0] {
            let hp = HyperParams::new(t * 0.8, t * 0.6, t * lambda);
            let p = predict(&fit_qlds(&ds, &hp).unwrap(), &pts).unwrap();
            assert_eq!(p0, p, "t = {t}");
        }
    }

    #[test]
    fn ridge_reduction_matches_normal_equations() {
        // alpha_u = 0, alpha_l = 1: omega solves the ridge normal equations
        // (lambda I + (1/n) X_l X_l^T) w = (1/sqrt(n)) X_l y_l.
        let mut state = 91u64;
        let ds = random_ds(3, 8, 0, &mut state);
        let model = fit_qlds(&ds, &HyperParams::new(1.0, 0.0, 0.7)).unwrap();
        let n = ds.n() as f64;
        // build and solve the normal equations entrywise, no shared code path
        let d = 3usize;
        let mut a = vec![0.0; d * d];
        let mut b = vec![0.0; d];
        for (&j, &y) in ds.labeled_idx().iter().zip(ds.labels()) {
            let x = ds.column(j);
            for r in 0..d {
                for c in 0..d {
                    a[r * d + c] += x[r] * x[c] / n;
                }
                b[r] += y * x[r] / n.sqrt();
            }
        }
        for r in 0..d {
            a[r * d + r] += 0.7;
        }
        // Cramer-free GE solve
        let mut m = vec![0.0; d * (d + 1)];
        for i in 0..d {
            m[i * (d + 1)..i * (d + 1) + d].copy_from_slice(&a[i * d..(i + 1) * d]);
            m[i * (d + 1) + d] = b[i];
        }
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&r, &s| m[r * (d + 1) + col].abs().total_cmp(&m[s * (d + 1) + col].abs()))
                .unwrap();
            for j in 0..=d {
                m.swap(col * (d + 1) + j, piv * (d + 1) + j);
            }
            for r in (col + 1)..d {
                let f = m[r * (d + 1) + col] / m[col * (d + 1) + col];
                for j in col..=d {
                    m[r * (d + 1) + j] -= f * m[col * (d + 1) + j];
                }
            }
        }
        let mut w = vec![0.0; d];
        for i in (0..d).rev() {
            let mut v = m[i * (d + 1) + d];
            for j in (i + 1)..d {
                v -= m[i * (d + 1) + j] * w[j];
            }
            w[i] = v / m[i * (d + 1) + i];
        }
        for r in 0..d {
            assert!((model.omega[r] - w[r]).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_alignment_near_threshold() {
        let spec = GmmSpec {
            d: 30,
            mu_norm: 3.0,
            n_l1: 20,
            n_l2: 20,
            n_u1: 300,
            n_u2: 300,
            seed: 11,
        };
        let ds = crate::data::center(&generate_gmm(&spec));
        let gu = ds.scaled_gram(ds.unlabeled_idx());
        let (top, v) =
            numerics::largest_eigenvalue(&gu, numerics::EIG_TOL, numerics::EIG_MAX_ITER).unwrap();
        let hp = HyperParams::new(0.0, 1.0, (1.0 + 1e-6) * top);
        let model = fit_qlds(&ds, &hp).unwrap();
        let cos = numerics::dot(&model.omega, &v).abs()
            / (numerics::norm2(&model.omega) * numerics::norm2(&v));
        assert!(cos >= 0.999, "cosine {cos}");
    }

    #[test]
    fn stationarity_of_solution() {
        let mut state = 123u64;
        let ds = random_ds(6, 10, 14, &mut state);
        let lambda = default_lambda(&ds, LambdaSource::Whole, 1e-3).unwrap();
        let hp = HyperParams::new(0.9, 0.7, lambda);
        let model = fit_qlds(&ds, &hp).unwrap();
        let a = system_matrix(&ds, &hp);
        let b = ds.labeled_response();
        let grad: Vec<f64> = a
            .mul_vec(&model.omega)
            .iter()
            .zip(&b)
            .map(|(p, q)| p - q)
            .collect();
        let bound = 1e-8 * (1.0 + numerics::norm2(&model.omega));
        assert!(numerics::norm2(&grad) <= bound);
    }

    #[test]
    fn transductive_error_counts() {
        // hand fixture: 6 unlabeled scalar points, model omega = 1
        let model = LinearModel {
            omega: vec![1.0],
            n_train: 1,
            hyper: HyperParams::new(1.0, 0.0, 1.0),
            offset: vec![],
        };
        let cols = vec![5.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0];
        let truth = vec![1.0, -1.0, -1.0, -1.0, 1.0, 1.0]; // 2 mistakes
        let ds = Dataset::new(
            1,
            7,
            cols,
            vec![0],
            (1..7).collect(),
            vec![1.0],
            Some(truth.clone()),
        )
        .unwrap();
        let e = transductive_error(&model, &ds).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-15);

        // flipped truth complements the error
        let flipped: Vec<f64> = truth.iter().map(|y| -y).collect();
        let ds2 = Dataset::new(
            1,
            7,
            ds.features().to_vec(),
            vec![0],
            (1..7).collect(),
            vec![1.0],
            Some(flipped),
        )
        .unwrap();
        let e2 = transductive_error(&model, &ds2).unwrap();
        assert!((e + e2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_json_round_trip() {
        let model = LinearModel {
            omega: vec![0.25, -1.5],
            n_train: 12,
            hyper: HyperParams::new(0.3, 0.7, 2.5),
            offset: vec![0.1, -0.2],
        };
        let text = model.to_json();
        let back = LinearModel::from_json(&text).unwrap();
        assert_eq!(model, back);
        assert!(text.contains("\"omega\""));
        assert!(text.contains("\"n_train\""));
    }

    #[test]
    fn missing_truth_is_an_error() {
        let ds = ds_from(1, vec![1.0, 2.0], vec![0, 1], vec![1.0, -1.0], None);
        let model = fit_qlds(&ds, &HyperParams::new(1.0, 0.0, 1.0)).unwrap();
        assert!(matches!(transductive_error(&model, &ds), Err(Error::MissingTruth)));
    }
}
