//! Experiment reproduction engine: seeded Monte Carlo benchmarks comparing
//! selectors and baselines, score-density matching against the asymptotic
//! prediction, phase diagrams of the semi-supervised gain, proportion
//! robustness sweeps, and the selector runtime comparison.

use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::baselines::{self, SelfTrainConfig};
use crate::data::{center, generate_gmm, largest_remainder, Dataset, GmmSpec};
use crate::error::{Error, Result};
use crate::select::{fit_with_selection, Grid, LambdaPolicy, Selector};
use crate::solver::{self, fit_qlds, HyperParams};
use crate::stats::{mann_whitney, MannWhitney};
use crate::theory;

/// Methods the benchmark table can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// QLDS with the label-free theoretical selector.
    TheorySelect,
    /// QLDS with stratified cross-validation over the grid.
    CvSelect { folds: usize },
    /// QLDS with the ground-truth oracle selector (upper bound).
    OracleSelect,
    /// Plain supervised least-squares fit, alpha = (1, 0).
    LsSvm,
    /// Graph-style unlabeled smoother, alpha = (0, 1).
    GbSsl,
    /// Self-training on top of the supervised fit.
    SelfTrain,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::TheorySelect => "qlds_th".into(),
            Method::CvSelect { .. } => "qlds_cv".into(),
            Method::OracleSelect => "qlds_or".into(),
            Method::LsSvm => "ls_svm".into(),
            Method::GbSsl => "gb_ssl".into(),
            Method::SelfTrain => "self_train".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub method: String,
    /// None when the trial failed; see `failure`.
    pub error: Option<f64>,
    pub seconds: f64,
    pub chosen: Option<(f64, f64)>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_error: f64,
    pub std_error: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseTest {
    pub method_a: String,
    pub method_b: String,
    pub u1: f64,
    pub u2: f64,
    pub p_value: f64,
    /// Two-sided significance at the 0.01 level.
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub summaries: Vec<MethodSummary>,
    pub pairwise: Vec<PairwiseTest>,
    pub trials: Vec<TrialResult>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("method,mean_error,std_error,n_ok,n_failed\n");
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.method, s.mean_error, s.std_error, s.n_ok, s.n_failed
            ));
        }
        out
    }
}

/// FNV-1a content hash, hex-encoded; used to fingerprint resolved configs.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// SplitMix64 step: derives independent per-trial seeds from one root seed.
pub fn trial_seed(seed0: u64, trial: u64) -> u64 {
    let mut z = seed0.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9e3779b97f4a7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn run_method(
    ds: &Dataset,
    method: Method,
    grid: &Grid,
    policy: &LambdaPolicy,
    seed: u64,
) -> Result<(f64, Option<(f64, f64)>)> {
    match method {
        Method::TheorySelect => {
            let (model, sel) = fit_with_selection(
                ds,
                Selector::Theoretical { assume_matched_proportions: true },
                grid,
                policy,
            )?;
            Ok((solver::transductive_error(&model, ds)?, Some(sel.chosen)))
        }
        Method::CvSelect { folds } => {
            let (model, sel) =
                fit_with_selection(ds, Selector::CrossValidation { folds, seed }, grid, policy)?;
            Ok((solver::transductive_error(&model, ds)?, Some(sel.chosen)))
        }
        Method::OracleSelect => {
            let (model, sel) = fit_with_selection(ds, Selector::Oracle, grid, policy)?;
            Ok((solver::transductive_error(&model, ds)?, Some(sel.chosen)))
        }
        Method::LsSvm => {
            let lambda = policy.resolve(ds)?;
            let model = fit_qlds(ds, &HyperParams::new(1.0, 0.0, lambda))?;
            Ok((solver::transductive_error(&model, ds)?, Some((1.0, 0.0))))
        }
        Method::GbSsl => {
            let lambda = policy.resolve(ds)?;
            let model = fit_qlds(ds, &HyperParams::new(0.0, 1.0, lambda))?;
            Ok((solver::transductive_error(&model, ds)?, Some((0.0, 1.0))))
        }
        Method::SelfTrain => {
            let cfg = SelfTrainConfig { seed, ..Default::default() };
            let (model, _) = baselines::self_train(ds, &cfg, policy)?;
            Ok((solver::transductive_error(&model, ds)?, Some((1.0, 0.0))))
        }
    }
}

/// Seeded benchmark over independently generated splits: per-method
/// mean ± std plus all pairwise Mann-Whitney comparisons. Failed trials are
/// recorded and excluded from the aggregates.
pub fn run_benchmark(
    spec: &GmmSpec,
    methods: &[Method],
    n_trials: usize,
    seed0: u64,
    grid: &Grid,
    policy: &LambdaPolicy,
) -> Result<BenchReport> {
    if n_trials < 2 {
        return Err(Error::Config("benchmark needs at least 2 trials".into()));
    }
    if methods.is_empty() {
        return Err(Error::Config("benchmark needs at least one method".into()));
    }
    // trials run in parallel; aggregation below is ordered by trial index
    let trials: Vec<TrialResult> = (0..n_trials as u64)
        .into_par_iter()
        .flat_map_iter(|t| {
            let seed = trial_seed(seed0, t);
            let ds = center(&generate_gmm(&GmmSpec { seed, ..*spec }));
            methods
                .iter()
                .map(|&m| {
                    let started = Instant::now();
                    let outcome = run_method(&ds, m, grid, policy, seed);
                    let seconds = started.elapsed().as_secs_f64();
                    match outcome {
                        Ok((error, chosen)) => TrialResult {
                            seed,
                            method: m.name(),
                            error: Some(error),
                            seconds,
                            chosen,
                            failure: None,
                        },
                        Err(e) => TrialResult {
                            seed,
                            method: m.name(),
                            error: None,
                            seconds,
                            chosen: None,
                            failure: Some(e.to_string()),
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut summaries = Vec::new();
    let mut errors_by_method = Vec::new();
    for m in methods {
        let name = m.name();
        let errs: Vec<f64> = trials
            .iter()
            .filter(|t| t.method == name)
            .filter_map(|t| t.error)
            .collect();
        let n_failed = n_trials - errs.len();
        let mean = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
        let var = if errs.len() > 1 {
            errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (errs.len() - 1) as f64
        } else {
            0.0
        };
        summaries.push(MethodSummary {
            method: name,
            mean_error: mean,
            std_error: var.sqrt(),
            n_ok: errs.len(),
            n_failed,
        });
        errors_by_method.push(errs);
    }

    let mut pairwise = Vec::new();
    for i in 0..methods.len() {
        for j in (i + 1)..methods.len() {
            if errors_by_method[i].is_empty() || errors_by_method[j].is_empty() {
                continue;
            }
            let MannWhitney { u1, u2, p_value, .. } =
                mann_whitney(&errors_by_method[i], &errors_by_method[j]);
            pairwise.push(PairwiseTest {
                method_a: methods[i].name(),
                method_b: methods[j].name(),
                u1,
                u2,
                p_value,
                significant: p_value < 0.01,
            });
        }
    }

    let config = serde_json::json!({
        "gmm": spec,
        "methods": methods.iter().map(Method::name).collect::<Vec<_>>(),
        "n_trials": n_trials,
        "seed0": seed0,
        "grid_points": grid.points,
        "lambda_policy": policy,
    });
    let config_hash = content_hash(config.to_string().as_bytes());
    Ok(BenchReport { config, config_hash, summaries, pairwise, trials })
}

pub const DENSITY_BINS: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryOverlay {
    pub m1: f64,
    pub m2: f64,
    pub sigma: f64,
    pub eps_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub bin_lo: f64,
    pub bin_width: f64,
    /// Per-class histogram counts over DENSITY_BINS equal-width bins.
    pub counts_class1: Vec<u64>,
    pub counts_class2: Vec<u64>,
    pub empirical: [ClassStats; 2],
    /// Absent when the dataset has no unlabeled samples.
    pub theory: Option<TheoryOverlay>,
    /// |empirical mean - m_j| per class, when theory is available.
    pub mean_delta: Option<[f64; 2]>,
    /// |empirical std - sigma| per class, when theory is available.
    pub std_delta: Option<[f64; 2]>,
    pub empirical_error: f64,
}

impl DensityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count_class1,count_class2\n");
        for k in 0..DENSITY_BINS {
            let lo = self.bin_lo + k as f64 * self.bin_width;
            out.push_str(&format!(
                "{},{},{},{}\n",
                lo,
                lo + self.bin_width,
                self.counts_class1[k],
                self.counts_class2[k]
            ));
        }
        out
    }
}

fn stats_of(values: &[f64]) -> ClassStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    ClassStats { mean, std: var.sqrt() }
}

/// Fits at `hp` over `n_seeds` independent draws, pools the per-class
/// decision scores, and compares histogram statistics against the asymptotic
/// Gaussian prediction. Scores are taken on the unlabeled samples, or on the
/// labeled ones when the spec has no unlabeled part.
pub fn density_match(
    spec: &GmmSpec,
    hp: &HyperParams,
    n_seeds: usize,
    seed0: u64,
) -> Result<DensityReport> {
    if n_seeds == 0 {
        return Err(Error::Config("density matching needs at least one seed".into()));
    }
    let mut scores1 = Vec::new();
    let mut scores2 = Vec::new();
    let mut m1_sum = 0.0;
    let mut m2_sum = 0.0;
    let mut sigma_sum = 0.0;
    let mut eps_sum = 0.0;
    let mut err_sum = 0.0;
    let has_unlabeled = spec.n_u1 + spec.n_u2 > 0;
    for t in 0..n_seeds as u64 {
        let seed = trial_seed(seed0, t);
        let ds = center(&generate_gmm(&GmmSpec { seed, ..*spec }));
        let model = fit_qlds(&ds, hp)?;
        if has_unlabeled {
            let scores = solver::decision_scores(&model, &ds.submatrix(ds.unlabeled_idx()))?;
            let truth = ds.true_unlabeled_labels().ok_or(Error::MissingTruth)?;
            let mut wrong = 0usize;
            for (f, &y) in scores.iter().zip(truth) {
                if y < 0.0 {
                    scores1.push(*f);
                } else {
                    scores2.push(*f);
                }
                let pred = if *f < 0.0 { -1.0 } else { 1.0 };
                if pred != y {
                    wrong += 1;
                }
            }
            err_sum += wrong as f64 / truth.len() as f64;
            let stats = theory::predict_error(&ds, hp, true)?;
            m1_sum += stats.m1;
            m2_sum += stats.m2;
            sigma_sum += stats.sigma2.sqrt();
            eps_sum += stats.eps_star;
        } else {
            let scores = solver::decision_scores(&model, &ds.submatrix(ds.labeled_idx()))?;
            let mut wrong = 0usize;
            for (f, &y) in scores.iter().zip(ds.labels()) {
                if y < 0.0 {
                    scores1.push(*f);
                } else {
                    scores2.push(*f);
                }
                let pred = if *f < 0.0 { -1.0 } else { 1.0 };
                if pred != y {
                    wrong += 1;
                }
            }
            err_sum += wrong as f64 / ds.n_labeled() as f64;
        }
    }
    let all: Vec<f64> = scores1.iter().chain(&scores2).copied().collect();
    if all.is_empty() {
        return Err(Error::InsufficientSamples("no scores to histogram".into()));
    }
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / DENSITY_BINS as f64).max(f64::MIN_POSITIVE);
    let bin_of = |f: f64| (((f - lo) / width) as usize).min(DENSITY_BINS - 1);
    let mut counts_class1 = vec![0u64; DENSITY_BINS];
    let mut counts_class2 = vec![0u64; DENSITY_BINS];
    for &f in &scores1 {
        counts_class1[bin_of(f)] += 1;
    }
    for &f in &scores2 {
        counts_class2[bin_of(f)] += 1;
    }
    let empirical = [stats_of(&scores1), stats_of(&scores2)];
    let k = n_seeds as f64;
    let theory_overlay = if has_unlabeled {
        Some(TheoryOverlay {
            m1: m1_sum / k,
            m2: m2_sum / k,
            sigma: sigma_sum / k,
            eps_star: eps_sum / k,
        })
    } else {
        None
    };
    let (mean_delta, std_delta) = match &theory_overlay {
        Some(t) => (
            Some([(empirical[0].mean - t.m1).abs(), (empirical[1].mean - t.m2).abs()]),
            Some([(empirical[0].std - t.sigma).abs(), (empirical[1].std - t.sigma).abs()]),
        ),
        None => (None, None),
    };
    let config = serde_json::json!({
        "gmm": spec,
        "hyper": hp,
        "n_seeds": n_seeds,
        "seed0": seed0,
        "bins": DENSITY_BINS,
    });
    let config_hash = content_hash(config.to_string().as_bytes());
    Ok(DensityReport {
        config,
        config_hash,
        bin_lo: lo,
        bin_width: width,
        counts_class1,
        counts_class2,
        empirical,
        theory: theory_overlay,
        mean_delta,
        std_delta,
        empirical_error: err_sum / k,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseConfig {
    pub d: usize,
    /// Unlabeled samples per class (fixed across cells).
    pub n_u_per_class: usize,
    pub n_seeds: usize,
    pub seed0: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub labeled_sizes: Vec<usize>,
    pub mu_norms: Vec<f64>,
    /// gain[i][j] = mean(error(ls_svm) - error(qlds_th)) at
    /// (labeled_sizes[i], mu_norms[j]); None marks a failed cell.
    pub gain: Vec<Vec<Option<f64>>>,
}

impl PhaseReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("labeled_per_class,mu_norm,gain\n");
        for (i, &nl) in self.labeled_sizes.iter().enumerate() {
            for (j, &mu) in self.mu_norms.iter().enumerate() {
                match self.gain[i][j] {
                    Some(g) => out.push_str(&format!("{nl},{mu},{g}\n")),
                    None => out.push_str(&format!("{nl},{mu},NA\n")),
                }
            }
        }
        out
    }
}

/// Mean gain of theory-selected QLDS over the supervised fit on a
/// (labeled size per class) x (task difficulty) lattice.
pub fn phase_diagram(
    labeled_sizes: &[usize],
    mu_norms: &[f64],
    base: &PhaseConfig,
    grid: &Grid,
    policy: &LambdaPolicy,
) -> Result<PhaseReport> {
    if labeled_sizes.is_empty() || mu_norms.is_empty() {
        return Err(Error::Config("phase diagram needs nonempty axes".into()));
    }
    let cells: Vec<(usize, usize)> = (0..labeled_sizes.len())
        .flat_map(|i| (0..mu_norms.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let spec = GmmSpec {
                d: base.d,
                mu_norm: mu_norms[j],
                n_l1: labeled_sizes[i],
                n_l2: labeled_sizes[i],
                n_u1: base.n_u_per_class,
                n_u2: base.n_u_per_class,
                seed: 0,
            };
            let mut total = 0.0;
            for t in 0..base.n_seeds as u64 {
                let seed = trial_seed(base.seed0 ^ ((i as u64) << 32 | j as u64), t);
                let ds = center(&generate_gmm(&GmmSpec { seed, ..spec }));
                let th = run_method(&ds, Method::TheorySelect, grid, policy, seed);
                let ls = run_method(&ds, Method::LsSvm, grid, policy, seed);
                match (th, ls) {
                    (Ok((e_th, _)), Ok((e_ls, _))) => total += e_ls - e_th,
                    _ => return None,
                }
            }
            Some(total / base.n_seeds as f64)
        })
        .collect();
    let mut gain = vec![vec![None; mu_norms.len()]; labeled_sizes.len()];
    for (&(i, j), g) in cells.iter().zip(results) {
        gain[i][j] = g;
    }
    let config = serde_json::json!({
        "base": base,
        "labeled_sizes": labeled_sizes,
        "mu_norms": mu_norms,
        "grid_points": grid.points,
        "lambda_policy": policy,
    });
    let config_hash = content_hash(config.to_string().as_bytes());
    Ok(PhaseReport {
        config,
        config_hash,
        labeled_sizes: labeled_sizes.to_vec(),
        mu_norms: mu_norms.to_vec(),
        gain,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionConfig {
    pub d: usize,
    pub mu_norm: f64,
    /// Labeled samples per class (kept balanced).
    pub n_l_per_class: usize,
    /// Total unlabeled samples, split across classes by the tested ratio.
    pub n_u_total: usize,
    pub n_seeds: usize,
    pub seed0: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionRow {
    /// Unlabeled class-imbalance ratio n_u1 / n_u2.
    pub ratio: f64,
    /// Error when selection assumes labeled proportions carry over.
    pub error_assumed: f64,
    /// Error when selection sees the true unlabeled class counts.
    pub error_truth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub rows: Vec<ProportionRow>,
}

impl ProportionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ratio,error_assumed,error_truth\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.ratio, r.error_assumed, r.error_truth));
        }
        out
    }
}

/// For each unlabeled imbalance ratio, runs the theoretical selector twice -
/// once assuming matched proportions, once with the true class counts - and
/// reports the resulting transductive errors averaged over seeds.
pub fn proportion_robustness(
    base: &ProportionConfig,
    ratios: &[f64],
    grid: &Grid,
    policy: &LambdaPolicy,
) -> Result<ProportionReport> {
    if ratios.is_empty() || ratios.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Config("ratios must be positive".into()));
    }
    let rows: Vec<Result<ProportionRow>> = ratios
        .par_iter()
        .map(|&ratio| {
            let split = largest_remainder(&[ratio, 1.0], base.n_u_total);
            let spec = GmmSpec {
                d: base.d,
                mu_norm: base.mu_norm,
                n_l1: base.n_l_per_class,
                n_l2: base.n_l_per_class,
                n_u1: split[0],
                n_u2: split[1],
                seed: 0,
            };
            let mut sum_assumed = 0.0;
            let mut sum_truth = 0.0;
            for t in 0..base.n_seeds as u64 {
                let seed = trial_seed(base.seed0 ^ ratio.to_bits(), t);
                let ds = center(&generate_gmm(&GmmSpec { seed, ..spec }));
                for (assume, acc) in
                    [(true, &mut sum_assumed), (false, &mut sum_truth)]
                {
                    let (model, _) = fit_with_selection(
                        &ds,
                        Selector::Theoretical { assume_matched_proportions: assume },
                        grid,
                        policy,
                    )?;
                    *acc += solver::transductive_error(&model, &ds)?;
                }
            }
            Ok(ProportionRow {
                ratio,
                error_assumed: sum_assumed / base.n_seeds as f64,
                error_truth: sum_truth / base.n_seeds as f64,
            })
        })
        .collect();
    let rows: Vec<ProportionRow> = rows.into_iter().collect::<Result<_>>()?;
    let config = serde_json::json!({
        "base": base,
        "ratios": ratios,
        "grid_points": grid.points,
        "lambda_policy": policy,
    });
    let config_hash = content_hash(config.to_string().as_bytes());
    Ok(ProportionReport { config, config_hash, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct RuntimeRow {
    /// Size parameter: n_{lj} = n_{uj} = d.
    pub size: usize,
    pub t_theory: f64,
    pub t_cv: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuntimeReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub rows: Vec<RuntimeRow>,
}

impl RuntimeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,t_theory,t_cv,speedup\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.3},{:.3},{:.3}\n",
                r.size, r.t_theory, r.t_cv, r.speedup
            ));
        }
        out
    }
}

/// Wall-clock comparison of the two selectors on square problems where every
/// per-class count equals the dimension.
pub fn runtime_compare(
    sizes: &[usize],
    grid: &Grid,
    folds: usize,
    seed0: u64,
    policy: &LambdaPolicy,
) -> Result<RuntimeReport> {
    if sizes.is_empty() {
        return Err(Error::Config("runtime comparison needs at least one size".into()));
    }
    let mut rows = Vec::new();
    for (k, &d) in sizes.iter().enumerate() {
        let seed = trial_seed(seed0, k as u64);
        let spec =
            GmmSpec { d, mu_norm: 2.0, n_l1: d, n_l2: d, n_u1: d, n_u2: d, seed };
        let ds = center(&generate_gmm(&spec));
        let started = Instant::now();
        crate::select::select_theoretical(&ds, grid, policy, true)?;
        let t_theory = started.elapsed().as_secs_f64();
        let started = Instant::now();
        crate::select::select_cross_validation(&ds, grid, folds, seed, policy)?;
        let t_cv = started.elapsed().as_secs_f64();
        rows.push(RuntimeRow { size: d, t_theory, t_cv, speedup: t_cv / t_theory });
    }
    let config = serde_json::json!({
        "sizes": sizes,
        "folds": folds,
        "seed0": seed0,
        "grid_points": grid.points,
        "lambda_policy": policy,
    });
    let config_hash = content_hash(config.to_string().as_bytes());
    Ok(RuntimeReport { config, config_hash, rows })
}
