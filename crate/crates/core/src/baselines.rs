//! Self-training baseline: iteratively pseudo-labels confident unlabeled
//! points and refits a plain least-squares classifier (the alpha = (1, 0)
//! reduction). Pseudo-labels are frozen once assigned.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::select::LambdaPolicy;
use crate::solver::{self, fit_qlds, HyperParams, LinearModel};

#[derive(Debug, Clone)]
pub struct SelfTrainConfig {
    /// Quantiles of |score| over the remaining unlabeled points tried as
    /// confidence thresholds each round. Entries > 1 mean "no point passes".
    pub threshold_quantiles: Vec<f64>,
    pub max_rounds: usize,
    pub inner_cv_folds: usize,
    pub seed: u64,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            threshold_quantiles: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            max_rounds: 10,
            inner_cv_folds: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub labeled_pool: usize,
    pub newly_added: usize,
    pub threshold: f64,
    pub inner_cv_error: f64,
}

/// Builds the working dataset for the current pool: original labeled plus
/// frozen pseudo-labels; everything else stays unlabeled.
fn pool_dataset(ds: &Dataset, pseudo: &[(usize, f64)]) -> Dataset {
    let mut labeled_idx = ds.labeled_idx().to_vec();
    let mut labels = ds.labels().to_vec();
    let pseudo_set: std::collections::HashSet<usize> = pseudo.iter().map(|&(j, _)| j).collect();
    for &(j, y) in pseudo {
        labeled_idx.push(j);
        labels.push(y);
    }
    let unlabeled_idx: Vec<usize> = ds
        .unlabeled_idx()
        .iter()
        .copied()
        .filter(|j| !pseudo_set.contains(j))
        .collect();
    Dataset::new(
        ds.dim(),
        ds.n(),
        ds.features().to_vec(),
        labeled_idx,
        unlabeled_idx,
        labels,
        None,
    )
    .expect("pool construction preserves invariants")
}

/// Held-out error over the ORIGINAL labeled samples only, K-fold stratified;
/// pseudo-labeled points always stay in the training side.
fn inner_cv_error(
    ds: &Dataset,
    pseudo: &[(usize, f64)],
    extra: &[(usize, f64)],
    folds: usize,
    seed: u64,
    hp: &HyperParams,
) -> Result<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_orig = ds.n_labeled();
    let mut assignment = vec![0usize; n_orig];
    for class_sign in [-1.0, 1.0] {
        let mut members: Vec<usize> = ds
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == class_sign)
            .map(|(p, _)| p)
            .collect();
        for k in 0..members.len() {
            let pick = k + (rng.next_u64() as usize) % (members.len() - k);
            members.swap(k, pick);
        }
        for (r, &p) in members.iter().enumerate() {
            assignment[p] = r % folds;
        }
    }
    let mut total = 0.0;
    for fold in 0..folds {
        let d = ds.dim();
        let mut cols = Vec::new();
        let mut labeled_idx = Vec::new();
        let mut labels = Vec::new();
        let mut held_cols = Vec::new();
        let mut held_labels = Vec::new();
        let mut next = 0usize;
        for (pos, &j) in ds.labeled_idx().iter().enumerate() {
            if assignment[pos] == fold {
                held_cols.extend_from_slice(ds.column(j));
                held_labels.push(ds.labels()[pos]);
            } else {
                cols.extend_from_slice(ds.column(j));
                labeled_idx.push(next);
                labels.push(ds.labels()[pos]);
                next += 1;
            }
        }
        for &(j, y) in pseudo.iter().chain(extra) {
            cols.extend_from_slice(ds.column(j));
            labeled_idx.push(next);
            labels.push(y);
            next += 1;
        }
        let train = Dataset::new(d, next, cols, labeled_idx, vec![], labels, None)
            .expect("fold invariants hold");
        let model = fit_qlds(&train, hp)?;
        let preds = solver::predict(&model, &held_cols)?;
        let wrong = preds.iter().zip(&held_labels).filter(|(p, t)| *p != *t).count();
        total += wrong as f64 / held_labels.len() as f64;
    }
    Ok(total / folds as f64)
}

/// Nearest-rank quantile of the sorted |score| values; quantiles above 1
/// yield +infinity (no point is confident enough).
fn quantile_threshold(sorted_abs: &[f64], q: f64) -> f64 {
    if q > 1.0 {
        return f64::INFINITY;
    }
    if sorted_abs.is_empty() {
        return f64::INFINITY;
    }
    let idx = (q.max(0.0) * (sorted_abs.len() - 1) as f64).floor() as usize;
    sorted_abs[idx]
}

pub fn self_train(
    ds: &Dataset,
    cfg: &SelfTrainConfig,
    policy: &LambdaPolicy,
) -> Result<(LinearModel, Vec<RoundRecord>)> {
    if cfg.threshold_quantiles.is_empty() || cfg.max_rounds == 0 {
        return Err(Error::Config("self-training needs thresholds and at least one round".into()));
    }
    let n1 = ds.labels().iter().filter(|&&y| y < 0.0).count();
    let n2 = ds.n_labeled() - n1;
    if n1 < 2 || n2 < 2 {
        return Err(Error::InsufficientSamples(format!(
            "self-training needs 2 labeled samples per class, got ({n1}, {n2})"
        )));
    }
    let folds = cfg.inner_cv_folds.max(2).min(n1.min(n2));
    let lambda = policy.resolve(ds)?;
    let hp = HyperParams::new(1.0, 0.0, lambda);

    let mut pseudo: Vec<(usize, f64)> = Vec::new();
    let mut history = Vec::new();
    for round in 1..=cfg.max_rounds {
        let pool = pool_dataset(ds, &pseudo);
        let model = fit_qlds(&pool, &hp)?;
        let remaining: Vec<usize> = pool.unlabeled_idx().to_vec();
        if remaining.is_empty() {
            break;
        }
        let scores = solver::decision_scores(&model, &ds.submatrix(&remaining))?;
        let mut sorted_abs: Vec<f64> = scores.iter().map(|f| f.abs()).collect();
        sorted_abs.sort_by(f64::total_cmp);

        // pick the threshold whose augmented pool cross-validates best
        let mut best: Option<(f64, f64)> = None; // (threshold, cv error)
        for &q in &cfg.threshold_quantiles {
            let thr = quantile_threshold(&sorted_abs, q);
            let extra: Vec<(usize, f64)> = remaining
                .iter()
                .zip(&scores)
                .filter(|(_, f)| f.abs() >= thr)
                .map(|(&j, &f)| (j, if f < 0.0 { -1.0 } else { 1.0 }))
                .collect();
            let err = inner_cv_error(ds, &pseudo, &extra, folds, cfg.seed, &hp)?;
            if best.map_or(true, |(_, b)| err < b) {
                best = Some((thr, err));
            }
        }
        let (threshold, cv_err) = best.expect("at least one threshold evaluated");
        let newly: Vec<(usize, f64)> = remaining
            .iter()
            .zip(&scores)
            .filter(|(_, f)| f.abs() >= threshold)
            .map(|(&j, &f)| (j, if f < 0.0 { -1.0 } else { 1.0 }))
            .collect();
        let added = newly.len();
        pseudo.extend(newly);
        history.push(RoundRecord {
            round,
            labeled_pool: ds.n_labeled() + pseudo.len(),
            newly_added: added,
            threshold,
            inner_cv_error: cv_err,
        });
        if added == 0 {
            break;
        }
    }
    let final_model = fit_qlds(&pool_dataset(ds, &pseudo), &hp)?;
    Ok((final_model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{center, generate_gmm, GmmSpec};

    fn gmm(seed: u64) -> Dataset {
        center(&generate_gmm(&GmmSpec {
            d: 20,
            mu_norm: 3.0,
            n_l1: 10,
            n_l2: 10,
            n_u1: 60,
            n_u2: 60,
            seed,
        }))
    }

    #[test]
    fn unreachable_threshold_reduces_to_plain_fit() {
        let ds = gmm(1);
        let cfg = SelfTrainConfig {
            threshold_quantiles: vec![2.0], // above any |f|
            max_rounds: 3,
            ..Default::default()
        };
        let policy = LambdaPolicy::default();
        let (model, history) = self_train(&ds, &cfg, &policy).unwrap();
        let lambda = policy.resolve(&ds).unwrap();
        let plain = fit_qlds(&ds, &HyperParams::new(1.0, 0.0, lambda)).unwrap();
        assert_eq!(model.omega, plain.omega, "must match the plain fit bitwise");
        assert_eq!(history.len(), 1);
        assert_eq!(history[0].newly_added, 0);
    }

    #[test]
    fn zero_threshold_saturates_in_one_round() {
        let ds = gmm(2);
        let cfg = SelfTrainConfig {
            threshold_quantiles: vec![0.0],
            max_rounds: 1,
            ..Default::default()
        };
        let (_, history) = self_train(&ds, &cfg, &LambdaPolicy::default()).unwrap();
        assert_eq!(history[0].newly_added, ds.n_unlabeled());
    }

    #[test]
    fn pool_grows_monotonically() {
        let ds = gmm(3);
        let (_, history) = self_train(&ds, &SelfTrainConfig::default(), &LambdaPolicy::default())
            .unwrap();
        for w in history.windows(2) {
            assert!(w[1].labeled_pool >= w[0].labeled_pool);
        }
    }

    #[test]
    fn insufficient_class_rejected() {
        let ds = center(&generate_gmm(&GmmSpec {
            d: 5,
            mu_norm: 2.0,
            n_l1: 1,
            n_l2: 6,
            n_u1: 20,
            n_u2: 20,
            seed: 4,
        }));
        assert!(matches!(
            self_train(&ds, &SelfTrainConfig::default(), &LambdaPolicy::default()),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn tracks_plain_fit_on_gmm() {
        // paired comparison: self-training should not be much worse than the
        // plain supervised fit
        let policy = LambdaPolicy::default();
        let mut st_total = 0.0;
        let mut plain_total = 0.0;
        let trials = 20;
        for seed in 0..trials {
            let ds = gmm(500 + seed);
            let (st_model, _) = self_train(&ds, &SelfTrainConfig::default(), &policy).unwrap();
            let lambda = policy.resolve(&ds).unwrap();
            let plain = fit_qlds(&ds, &HyperParams::new(1.0, 0.0, lambda)).unwrap();
            st_total += solver::transductive_error(&st_model, &ds).unwrap();
            plain_total += solver::transductive_error(&plain, &ds).unwrap();
        }
        let st_mean = st_total / trials as f64;
        let plain_mean = plain_total / trials as f64;
        assert!(
            st_mean <= plain_mean + 0.02,
            "self-training {st_mean:.4} vs plain {plain_mean:.4}"
        );
    }

    #[test]
    fn history_serializes() {
        let ds = gmm(6);
        let (_, history) = self_train(&ds, &SelfTrainConfig::default(), &LambdaPolicy::default())
            .unwrap();
        let text = serde_json::to_string(&history).unwrap();
        assert!(text.contains("newly_added"));
    }
}
