//! Asymptotic performance predictor for the quadratic-margin classifier.
//!
//! In the large-dimensional limit the unlabeled decision scores of each class
//! are Gaussian; this module resolves the deterministic-equivalent fixed
//! point, the per-class score means, the shared variance, and the predicted
//! classification error — all from labeled data and sample counts alone.
//! The class-mean Gram matrix M^T M is estimated from labeled samples by a
//! split-half cross product that cancels the noise bias.

use serde::Serialize;

use crate::data::{ClassCounts, Dataset};
use crate::error::{Error, Result};
use crate::numerics::erf;
use crate::solver::HyperParams;

/// Limiting sample ratios: c_l[j] = n_lj/n, c_u[j] = n_uj/n, c0 = d/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRatios {
    pub c_l: [f64; 2],
    pub c_u: [f64; 2],
    pub c0: f64,
}

impl From<&ClassCounts> for LimitRatios {
    fn from(cc: &ClassCounts) -> Self {
        LimitRatios { c_l: cc.c_l(), c_u: cc.c_u(), c0: cc.c0() }
    }
}

/// Converged solution of the deterministic-equivalent fixed point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedPoint {
    pub delta: f64,
    pub kappa: [f64; 2],
    pub a: [f64; 2],
    pub d: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
}

/// Estimate (or exact value) of the 2x2 class-mean Gram matrix M^T M.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GramEstimate {
    /// Row-major symmetric 2x2.
    pub mtm: [f64; 4],
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Estimated,
    Exact,
}

impl GramEstimate {
    pub fn exact(m11: f64, m12: f64, m22: f64) -> Self {
        GramEstimate { mtm: [m11, m12, m12, m22], provenance: Provenance::Exact }
    }
}

/// Predicted Gaussian score statistics and the induced error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryStats {
    pub m1: f64,
    pub m2: f64,
    pub sigma2: f64,
    pub eps_star: f64,
}

const FP_TOL: f64 = 1e-14;
const FP_MAX_ITER: usize = 10_000;

fn kappas(r: &LimitRatios, hp: &HyperParams, delta: f64) -> [f64; 2] {
    let pl = 1.0 + hp.alpha_l * delta;
    let pu = 1.0 - hp.alpha_u * delta;
    [
        r.c_l[0] * hp.alpha_l / pl - r.c_u[0] * hp.alpha_u / pu,
        r.c_l[1] * hp.alpha_l / pl - r.c_u[1] * hp.alpha_u / pu,
    ]
}

/// Iterates delta <- c0/(lambda + kappa_1 + kappa_2) from delta = c0/lambda.
pub fn solve_fixed_point_limits(r: &LimitRatios, hp: &HyperParams) -> Result<FixedPoint> {
    if hp.lambda <= 0.0 {
        return Err(Error::Config("lambda must be positive".into()));
    }
    let guard = |delta: f64| -> Result<()> {
        if delta <= 0.0 || 1.0 - hp.alpha_u * delta <= 0.0 || 1.0 + hp.alpha_l * delta <= 0.0 {
            return Err(Error::InvalidRegime(format!(
                "iterate delta = {delta} violates the resolvent positivity guards"
            )));
        }
        Ok(())
    };
    let mut delta = r.c0 / hp.lambda;
    guard(delta)?;
    let mut iterations = 0;
    let mut k = kappas(r, hp, delta);
    loop {
        iterations += 1;
        let next = r.c0 / (hp.lambda + k[0] + k[1]);
        guard(next)?;
        let gap = (next - delta).abs();
        delta = next;
        k = kappas(r, hp, delta);
        if gap <= FP_TOL {
            break;
        }
        if iterations >= FP_MAX_ITER {
            return Err(Error::NoConvergence { iterations, residual: gap });
        }
    }
    let residual = (delta * (hp.lambda + k[0] + k[1]) - r.c0).abs();
    let pl = 1.0 + hp.alpha_l * delta;
    let pu = 1.0 - hp.alpha_u * delta;
    let a = [
        r.c_l[0] * hp.alpha_l * hp.alpha_l / (pl * pl)
            + r.c_u[0] * hp.alpha_u * hp.alpha_u / (pu * pu),
        r.c_l[1] * hp.alpha_l * hp.alpha_l / (pl * pl)
            + r.c_u[1] * hp.alpha_u * hp.alpha_u / (pu * pu),
    ];
    let q0 = delta / r.c0;
    let cu_total = r.c_u[0] + r.c_u[1];
    let mut d = [0.0; 2];
    for j in 0..2 {
        let denom = 1.0 - r.c0 * q0 * q0 * a[j];
        if denom <= 0.0 {
            return Err(Error::InvalidRegime(format!(
                "second-order guard 1 - c0*q0^2*a_{} = {denom} is not positive",
                j + 1
            )));
        }
        // trace-positive convention for the per-class resolvent moment
        d[j] = r.c0 * q0 * q0 * cu_total / (pu * pu * denom);
    }
    Ok(FixedPoint { delta, kappa: k, a, d, residual, iterations })
}

pub fn solve_fixed_point(counts: &ClassCounts, hp: &HyperParams) -> Result<FixedPoint> {
    solve_fixed_point_limits(&LimitRatios::from(counts), hp)
}

// --- small dense 2x2 helpers (row-major [a, b, c, d]) ---

fn mul2(x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

fn inv2(x: &[f64; 4]) -> Result<[f64; 4]> {
    let det = x[0] * x[3] - x[1] * x[2];
    if det.abs() < 1e-300 {
        return Err(Error::DegenerateTheory("singular 2x2 system".into()));
    }
    Ok([x[3] / det, -x[1] / det, -x[2] / det, x[0] / det])
}

fn quad2(b: &[f64; 2], x: &[f64; 4], c: &[f64; 2]) -> f64 {
    b[0] * (x[0] * c[0] + x[1] * c[1]) + b[1] * (x[2] * c[0] + x[3] * c[1])
}

/// Splits the labeled indices by class (class 1 = label -1, class 2 = +1).
fn labeled_by_class(ds: &Dataset) -> [Vec<usize>; 2] {
    let mut by = [Vec::new(), Vec::new()];
    for (&j, &y) in ds.labeled_idx().iter().zip(ds.labels()) {
        by[if y < 0.0 { 0 } else { 1 }].push(j);
    }
    by
}

fn sum_columns(ds: &Dataset, idx: &[usize]) -> Vec<f64> {
    let mut s = vec![0.0; ds.dim()];
    for &j in idx {
        let x = ds.column(j);
        for r in 0..ds.dim() {
            s[r] += x[r];
        }
    }
    s
}

/// Unbiased estimate of M^T M from labeled samples: split-half cross product
/// on the diagonal (cancels the identity-noise term), full cross product off
/// the diagonal, then projection onto the PSD cone.
pub fn estimate_gram(ds: &Dataset) -> Result<GramEstimate> {
    let by = labeled_by_class(ds);
    for (j, cls) in by.iter().enumerate() {
        if cls.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "class {} has {} labeled samples; the split-half diagonal needs 2",
                j + 1,
                cls.len()
            )));
        }
    }
    let mut mtm = [0.0f64; 4];
    for i in 0..2 {
        let n = by[i].len();
        let n1 = n / 2;
        let s1 = sum_columns(ds, &by[i][..n1]);
        let s2 = sum_columns(ds, &by[i][n1..]);
        mtm[i * 3] = crate::numerics::dot(&s1, &s2) / (n1 as f64 * (n - n1) as f64);
    }
    let s_a = sum_columns(ds, &by[0]);
    let s_b = sum_columns(ds, &by[1]);
    let off = crate::numerics::dot(&s_a, &s_b) / (by[0].len() as f64 * by[1].len() as f64);
    mtm[1] = off;
    mtm[2] = off;
    Ok(GramEstimate { mtm: psd_project2(&mtm), provenance: Provenance::Estimated })
}

/// Clips negative eigenvalues of a symmetric 2x2 matrix at zero.
fn psd_project2(m: &[f64; 4]) -> [f64; 4] {
    let (a, b, c) = (m[0], 0.5 * (m[1] + m[2]), m[3]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (mean + rad, mean - rad);
    if l2 >= 0.0 {
        return [a, b, b, c];
    }
    if l1 <= 0.0 {
        return [0.0; 4];
    }
    // eigenvector for l1
    let (vx, vy) = if b.abs() > 1e-300 { (l1 - c, b) } else if a >= c { (1.0, 0.0) } else { (0.0, 1.0) };
    let nv = (vx * vx + vy * vy).sqrt();
    let (vx, vy) = (vx / nv, vy / nv);
    [l1 * vx * vx, l1 * vx * vy, l1 * vx * vy, l1 * vy * vy]
}

/// Deterministic equivalent of the labeled quadratic form whose negative
/// lambda-derivative is the limiting squared weight norm (the score variance).
fn h_value(r: &LimitRatios, hp: &HyperParams, mtm: &[f64; 4]) -> Result<(f64, FixedPoint, [f64; 4])> {
    let fp = solve_fixed_point_limits(r, hp)?;
    let q0 = fp.delta / r.c0;
    for (j, &k) in fp.kappa.iter().enumerate() {
        if k == 0.0 {
            return Err(Error::DegenerateTheory(format!(
                "kappa_{} vanished; the resolvent block is singular",
                j + 1
            )));
        }
    }
    let dk_inv = [1.0 / fp.kappa[0], 0.0, 0.0, 1.0 / fp.kappa[1]];
    let mcal = inv2(&[
        dk_inv[0] + q0 * mtm[0],
        q0 * mtm[1],
        q0 * mtm[2],
        dk_inv[3] + q0 * mtm[3],
    ])?;
    // M^T Qbar M = q0*MtM - q0^2 * MtM * Mcal * MtM
    let t = mul2(mtm, &mul2(&mcal, mtm));
    let mqm = [
        q0 * mtm[0] - q0 * q0 * t[0],
        q0 * mtm[1] - q0 * q0 * t[1],
        q0 * mtm[2] - q0 * q0 * t[2],
        q0 * mtm[3] - q0 * q0 * t[3],
    ];
    let pl = 1.0 + hp.alpha_l * fp.delta;
    let b = [-r.c_l[0], r.c_l[1]];
    let h = (r.c_l[0] + r.c_l[1]) * fp.delta / pl + quad2(&b, &mqm, &b) / (pl * pl);
    Ok((h, fp, mqm))
}

/// Relative half-width of the central difference used for the variance.
const DERIV_REL_STEP: f64 = 1e-6;

/// Gaussian score statistics: per-class means from the resolved resolvent
/// block, variance as the negative lambda-derivative of `h_value`.
pub fn theory_statistics(
    r: &LimitRatios,
    gram: &GramEstimate,
    hp: &HyperParams,
) -> Result<TheoryStats> {
    let (_, fp, mqm) = h_value(r, hp, &gram.mtm)?;
    let pl = 1.0 + hp.alpha_l * fp.delta;
    let pu = 1.0 - hp.alpha_u * fp.delta;
    let b = [-r.c_l[0], r.c_l[1]];
    let m1 = (b[0] * mqm[0] + b[1] * mqm[2]) / (pl * pu);
    let m2 = (b[0] * mqm[1] + b[1] * mqm[3]) / (pl * pu);

    let eps = DERIV_REL_STEP * hp.lambda;
    let hi = h_value(r, &HyperParams { lambda: hp.lambda + eps, ..*hp }, &gram.mtm)?.0;
    let lo = h_value(r, &HyperParams { lambda: hp.lambda - eps, ..*hp }, &gram.mtm)?.0;
    let sigma2 = -(hi - lo) / (2.0 * eps);
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateTheory(format!(
            "predicted score variance {sigma2} is not positive"
        )));
    }
    let mut stats = TheoryStats { m1, m2, sigma2, eps_star: 0.0 };
    stats.eps_star = theoretical_error(&stats)?;
    Ok(stats)
}

/// Predicted misclassification rate of the sign rule on the two Gaussians:
/// (1/2)(1 - erf(|m1 - m2| / (2*sqrt(2)*sigma))).
pub fn theoretical_error(stats: &TheoryStats) -> Result<f64> {
    if !(stats.sigma2 > 0.0) {
        return Err(Error::DegenerateTheory(format!(
            "variance {} is not positive",
            stats.sigma2
        )));
    }
    let sigma = stats.sigma2.sqrt();
    let z = (stats.m1 - stats.m2).abs() / (2.0 * std::f64::consts::SQRT_2 * sigma);
    Ok(0.5 * (1.0 - erf(z)))
}

/// Full pipeline with a caller-supplied Gram estimate (computed once per
/// dataset and reused across hyperparameter evaluations).
pub fn predict_error_with_gram(
    counts: &ClassCounts,
    gram: &GramEstimate,
    hp: &HyperParams,
) -> Result<TheoryStats> {
    theory_statistics(&LimitRatios::from(counts), gram, hp)
}

/// Convenience pipeline: estimate the Gram, derive counts, predict.
pub fn predict_error(
    ds: &Dataset,
    hp: &HyperParams,
    assume_matched_proportions: bool,
) -> Result<TheoryStats> {
    let gram = estimate_gram(ds)?;
    let counts = crate::data::class_counts(ds, assume_matched_proportions)?;
    predict_error_with_gram(&counts, &gram, hp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    fn hp(alpha_l: f64, alpha_u: f64, lambda: f64) -> HyperParams {
        HyperParams::new(alpha_l, alpha_u, lambda)
    }

    #[test]
    fn fixed_point_decoupled() {
        let r = LimitRatios { c_l: [0.5, 0.5], c_u: [0.0, 0.0], c0: 1.0 };
        let fp = solve_fixed_point_limits(&r, &hp(0.0, 0.0, 2.0)).unwrap();
        assert!((fp.delta - 0.5).abs() < 1e-14);
        assert_eq!(fp.kappa, [0.0, 0.0]);
        assert_eq!(fp.a, [0.0, 0.0]);
    }

    #[test]
    fn fixed_point_golden_ratio() {
        // delta solves delta^2 + delta - 1 = 0
        let r = LimitRatios { c_l: [0.5, 0.5], c_u: [0.0, 0.0], c0: 1.0 };
        let fp = solve_fixed_point_limits(&r, &hp(1.0, 0.0, 1.0)).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((fp.delta - golden).abs() < 1e-12, "{}", fp.delta);
    }

    fn bisection_delta(r: &LimitRatios, h: &HyperParams) -> f64 {
        // independent root-finder on g(delta) = delta*(lambda+k1+k2) - c0
        let g = |delta: f64| {
            let k = kappas(r, h, delta);
            delta * (h.lambda + k[0] + k[1]) - r.c0
        };
        let cap = if h.alpha_u > 0.0 { (1.0 / h.alpha_u) * (1.0 - 1e-9) } else { 1e6 };
        // scan for a sign change from below
        let steps = 200_000;
        let mut lo = cap * 1e-12;
        let mut hi = lo;
        let mut found = false;
        for i in 1..=steps {
            let x = cap * i as f64 / steps as f64;
            if g(x) > 0.0 {
                hi = x;
                found = true;
                break;
            }
            lo = x;
        }
        assert!(found, "no sign change located");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fixed_point_matches_bisection_oracle() {
        let r = LimitRatios { c_l: [0.05, 0.05], c_u: [0.45, 0.45], c0: 0.5 };
        let h = hp(1.0, 0.5, 2.0);
        let fp = solve_fixed_point_limits(&r, &h).unwrap();
        let oracle = bisection_delta(&r, &h);
        assert!((fp.delta - oracle).abs() < 1e-10, "{} vs {oracle}", fp.delta);
        assert!(fp.residual <= 1e-10);
    }

    #[test]
    fn fixed_point_residual_across_grid() {
        // lambda sits above the unlabeled spectral edge 0.9*(1+sqrt(0.2/0.9))^2,
        // so every alpha pair in [0,1]^2 is inside the valid regime
        let r = LimitRatios { c_l: [0.04, 0.06], c_u: [0.5, 0.4], c0: 0.2 };
        for i in 0..=10 {
            for j in 0..=10 {
                let h = hp(i as f64 / 10.0, j as f64 / 10.0, 2.5);
                let fp = solve_fixed_point_limits(&r, &h).unwrap();
                assert!(fp.residual <= 1e-10, "({i},{j})");
                assert!(1.0 - h.alpha_u * fp.delta > 0.0);
            }
        }
    }

    fn two_class_ds(cols: Vec<Vec<f64>>, labels: Vec<f64>) -> Dataset {
        let d = cols[0].len();
        let n = cols.len();
        let flat: Vec<f64> = cols.into_iter().flatten().collect();
        Dataset::new(d, n, flat, (0..n).collect(), vec![], labels, None).unwrap()
    }

    #[test]
    fn gram_noiseless_identity() {
        // every class-1 sample equals mu with mu.mu = 1
        let mu = vec![1.0, 0.0];
        let nu = vec![0.0, 1.0];
        let ds = two_class_ds(
            vec![mu.clone(), mu.clone(), nu.clone(), nu.clone()],
            vec![-1.0, -1.0, 1.0, 1.0],
        );
        let g = estimate_gram(&ds).unwrap();
        assert!((g.mtm[0] - 1.0).abs() < 1e-15);
        assert!((g.mtm[3] - 1.0).abs() < 1e-15);
        assert!(g.mtm[1].abs() < 1e-15, "orthogonal means");
    }

    #[test]
    fn gram_needs_two_per_class() {
        let ds = two_class_ds(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![-1.0, 1.0],
        );
        assert!(matches!(estimate_gram(&ds), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn gram_monte_carlo_rate() {
        // The split-half diagonal has std sqrt(2*mu.mu/n_l + d/(n_l/2)^2) per
        // class: ~0.57 at n_lj = 100 (3-sigma band +-1.7) and ~0.10 at
        // n_lj = 1000 (band +-0.3). Check both scales against mu.mu = 4.
        let run = |n_lj: usize, band: f64| {
            let mut hits = 0;
            for seed in 0..20u64 {
                let spec = crate::data::GmmSpec {
                    d: 400,
                    mu_norm: 4.0,
                    n_l1: n_lj,
                    n_l2: n_lj,
                    n_u1: 0,
                    n_u2: 0,
                    seed: 1000 + seed,
                };
                let ds = crate::data::generate_gmm(&spec);
                let g = estimate_gram(&ds).unwrap();
                if (g.mtm[0] - 4.0).abs() <= band && (g.mtm[3] - 4.0).abs() <= band {
                    hits += 1;
                }
            }
            hits
        };
        assert!(run(100, 1.7) >= 18, "coarse scale drifted");
        assert!(run(1000, 0.3) >= 18, "fine scale drifted");
    }

    #[test]
    fn psd_projection_clips() {
        let m = psd_project2(&[1.0, 2.0, 2.0, 1.0]); // eigenvalues 3, -1
        let mean = 0.5 * (m[0] + m[3]);
        let rad = (0.25 * (m[0] - m[3]).powi(2) + m[1] * m[1]).sqrt();
        assert!(mean - rad >= -1e-12);
        assert!((mean + rad - 3.0).abs() < 1e-12);
    }

    fn figure_ratios() -> LimitRatios {
        // d=100, n_lj=100, n_uj=1000
        LimitRatios { c_l: [100.0 / 2200.0; 2], c_u: [1000.0 / 2200.0; 2], c0: 100.0 / 2200.0 }
    }

    #[test]
    fn stats_zero_signal_is_chance() {
        let r = figure_ratios();
        let g = GramEstimate::exact(0.0, 0.0, 0.0);
        let s = theory_statistics(&r, &g, &hp(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(s.m1, 0.0);
        assert_eq!(s.m2, 0.0);
        assert!((s.eps_star - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stats_symmetric_means() {
        let r = figure_ratios();
        let g = GramEstimate::exact(2.25, 0.0, 2.25);
        let s = theory_statistics(&r, &g, &hp(1.0, 0.5, 1.2)).unwrap();
        assert!((s.m1 + s.m2).abs() < 1e-12, "m1={} m2={}", s.m1, s.m2);
        assert!(s.m1 < 0.0 && s.m2 > 0.0);
    }

    #[test]
    fn stats_kappa_zero_guard() {
        let r = figure_ratios();
        let g = GramEstimate::exact(1.0, 0.0, 1.0);
        assert!(matches!(
            theory_statistics(&r, &g, &hp(0.0, 0.0, 1.0)),
            Err(Error::DegenerateTheory(_))
        ));
    }

    #[test]
    fn error_formula_values() {
        let mk = |m1, m2, sigma2| TheoryStats { m1, m2, sigma2, eps_star: 0.0 };
        assert!((theoretical_error(&mk(0.3, 0.3, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        // |m1-m2| = 2, sigma = 1 -> Phi(-1) = 0.158655...
        let v = theoretical_error(&mk(-1.0, 1.0, 1.0)).unwrap();
        assert!((v - 0.15865525393145707).abs() < 1e-12);
        let tiny = theoretical_error(&mk(0.0, 1.0, 1e-24)).unwrap();
        assert!(tiny < 1e-10);
        assert!(theoretical_error(&mk(0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn eps_invariant_under_triplet_scaling() {
        let r = figure_ratios();
        let g = GramEstimate::exact(2.25, -0.1, 2.0);
        let base = theory_statistics(&r, &g, &hp(0.8, 0.6, 1.1)).unwrap();
        for t in [0.5, 2.0] {
            let s = theory_statistics(&r, &g, &hp(t * 0.8, t * 0.6, t * 1.1)).unwrap();
            assert!(
                (s.eps_star - base.eps_star).abs() < 1e-8,
                "t={t}: {} vs {}",
                s.eps_star,
                base.eps_star
            );
        }
    }

    #[test]
    fn eps_class_swap_symmetry() {
        let r = LimitRatios { c_l: [0.03, 0.07], c_u: [0.5, 0.3], c0: 0.1 };
        let swapped = LimitRatios { c_l: [0.07, 0.03], c_u: [0.3, 0.5], c0: 0.1 };
        let g = GramEstimate::exact(2.0, 0.4, 3.0);
        let gs = GramEstimate::exact(3.0, 0.4, 2.0);
        let h0 = hp(0.9, 0.4, 1.3);
        let a = theory_statistics(&r, &g, &h0).unwrap();
        let b = theory_statistics(&swapped, &gs, &h0).unwrap();
        assert!((a.eps_star - b.eps_star).abs() < 1e-10);
    }

    #[test]
    fn eps_bounded() {
        let r = figure_ratios();
        for &(al, au, m) in &[(1.0, 0.0, 0.01), (0.3, 0.7, 5.0), (1.0, 1.0, 2.25)] {
            let g = GramEstimate::exact(m, 0.0, m);
            let s = theory_statistics(&r, &g, &hp(al, au, 1.5)).unwrap();
            assert!((0.0..=0.5).contains(&s.eps_star), "eps = {}", s.eps_star);
        }
    }

    #[test]
    fn predict_error_pure_and_cache_transparent() {
        let spec = crate::data::GmmSpec {
            d: 40,
            mu_norm: 3.0,
            n_l1: 20,
            n_l2: 20,
            n_u1: 100,
            n_u2: 100,
            seed: 5,
        };
        let ds = crate::data::center(&crate::data::generate_gmm(&spec));
        let lam = crate::solver::default_lambda(&ds, crate::solver::LambdaSource::Whole, 1e-3)
            .unwrap();
        let h0 = hp(1.0, 0.3, lam);
        let a = predict_error(&ds, &h0, true).unwrap();
        let b = predict_error(&ds, &h0, true).unwrap();
        assert_eq!(a.eps_star, b.eps_star);

        // one cached gram equals independent evaluations across a small grid
        let gram = estimate_gram(&ds).unwrap();
        let counts = crate::data::class_counts(&ds, true).unwrap();
        for i in 0..5 {
            let h1 = hp(1.0, 0.1 * i as f64, lam);
            let cached = predict_error_with_gram(&counts, &gram, &h1).unwrap();
            let fresh = predict_error(&ds, &h1, true).unwrap();
            assert_eq!(cached.eps_star, fresh.eps_star);
        }
    }
}
