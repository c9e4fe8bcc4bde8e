//! Gradient-descent laboratory for alternative semi-supervised losses: three
//! labeled losses x two unlabeled losses trained with a hand-rolled Adam,
//! used to compare against the closed-form quadratic objective.
//!
//! All losses use the same margin scaling m_i = omega^T x_i / sqrt(n) as the
//! closed-form objective so alpha values are comparable across both paths.

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::solver::{self, HyperParams, LinearModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LabeledLoss {
    Square,
    HingeSurrogate,
    LogLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnlabeledLoss {
    QuadraticMargin,
    ExpSurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossSpec {
    pub labeled: LabeledLoss,
    pub unlabeled: UnlabeledLoss,
    /// Sharpness of the hinge surrogate.
    pub gamma: f64,
    /// Coefficient inside the exponential margin surrogate.
    pub exp_coef: f64,
}

impl LossSpec {
    pub fn new(labeled: LabeledLoss, unlabeled: UnlabeledLoss) -> Self {
        LossSpec { labeled, unlabeled, gamma: 20.0, exp_coef: 3.0 }
    }

    pub fn all_six() -> Vec<LossSpec> {
        let mut out = Vec::new();
        for l in [LabeledLoss::Square, LabeledLoss::HingeSurrogate, LabeledLoss::LogLoss] {
            for u in [UnlabeledLoss::QuadraticMargin, UnlabeledLoss::ExpSurrogate] {
                out.push(LossSpec::new(l, u));
            }
        }
        out
    }

    pub fn name(&self) -> String {
        let l = match self.labeled {
            LabeledLoss::Square => "square",
            LabeledLoss::HingeSurrogate => "hinge_surrogate",
            LabeledLoss::LogLoss => "log_loss",
        };
        let u = match self.unlabeled {
            UnlabeledLoss::QuadraticMargin => "quadratic_margin",
            UnlabeledLoss::ExpSurrogate => "exp_surrogate",
        };
        format!("{l}+{u}")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub first_moment_decay: f64,
    pub second_moment_decay: f64,
    pub epsilon_hat: f64,
    pub epochs: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            learning_rate: 1e-3,
            weight_decay: 1e-5,
            first_moment_decay: 0.9,
            second_moment_decay: 0.999,
            epsilon_hat: 1e-8,
            epochs: 2000,
        }
    }
}

/// Numerically safe log(1 + exp(z)).
fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Logistic sigmoid, stable on both tails.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Objective value and exact analytic gradient at `omega`:
/// alpha_l * sum of labeled losses + alpha_u * unlabeled term
/// + (lambda/2)*||omega||^2, margins scaled by 1/sqrt(n).
pub fn loss_and_gradient(
    spec: &LossSpec,
    hp: &HyperParams,
    ds: &Dataset,
    omega: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let d = ds.dim();
    if omega.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: omega.len() });
    }
    let s = 1.0 / (ds.n() as f64).sqrt();
    let mut value = 0.0;
    let mut grad = vec![0.0; d];
    let add = |coef_dm: f64, x: &[f64], grad: &mut Vec<f64>| {
        for r in 0..d {
            grad[r] += coef_dm * s * x[r];
        }
    };

    for (&j, &y) in ds.labeled_idx().iter().zip(ds.labels()) {
        let x = ds.column(j);
        let m = s * crate::numerics::dot(omega, x);
        let (l, dl_dm) = match spec.labeled {
            LabeledLoss::Square => (0.5 * (y - m) * (y - m), m - y),
            LabeledLoss::HingeSurrogate => {
                let z = spec.gamma * (1.0 - y * m);
                (log1p_exp(z) / spec.gamma, -y * sigmoid(z))
            }
            LabeledLoss::LogLoss => (log1p_exp(-y * m), -y * sigmoid(-y * m)),
        };
        value += hp.alpha_l * l;
        add(hp.alpha_l * dl_dm, x, &mut grad);
    }

    for &j in ds.unlabeled_idx() {
        let x = ds.column(j);
        let m = s * crate::numerics::dot(omega, x);
        let (u, du_dm) = match spec.unlabeled {
            UnlabeledLoss::QuadraticMargin => (-0.5 * m * m, -m),
            UnlabeledLoss::ExpSurrogate => {
                let e = (-spec.exp_coef * m * m).exp();
                (e, -2.0 * spec.exp_coef * m * e)
            }
        };
        value += hp.alpha_u * u;
        add(hp.alpha_u * du_dm, x, &mut grad);
    }

    let mut norm2 = 0.0;
    for r in 0..d {
        norm2 += omega[r] * omega[r];
        grad[r] += hp.lambda * omega[r];
    }
    value += 0.5 * hp.lambda * norm2;
    Ok((value, grad))
}

/// Full-batch Adam from zero initialization; weight decay enters as an
/// additive decay * omega term in the gradient.
pub fn train(
    spec: &LossSpec,
    hp: &HyperParams,
    ds: &Dataset,
    cfg: &OptimConfig,
) -> Result<LinearModel> {
    train_with_trace(spec, hp, ds, cfg).map(|(m, _)| m)
}

/// Same as `train` but also returns the per-epoch loss trajectory.
pub fn train_with_trace(
    spec: &LossSpec,
    hp: &HyperParams,
    ds: &Dataset,
    cfg: &OptimConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    let d = ds.dim();
    let mut omega = vec![0.0; d];
    let mut m1 = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let (value, mut grad) = loss_and_gradient(spec, hp, ds, &omega)?;
        if !value.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        trace.push(value);
        for r in 0..d {
            grad[r] += cfg.weight_decay * omega[r];
        }
        let b1 = cfg.first_moment_decay;
        let b2 = cfg.second_moment_decay;
        let bc1 = 1.0 - b1.powi(epoch as i32);
        let bc2 = 1.0 - b2.powi(epoch as i32);
        for r in 0..d {
            m1[r] = b1 * m1[r] + (1.0 - b1) * grad[r];
            m2[r] = b2 * m2[r] + (1.0 - b2) * grad[r] * grad[r];
            let mhat = m1[r] / bc1;
            let vhat = m2[r] / bc2;
            omega[r] -= cfg.learning_rate * mhat / (vhat.sqrt() + cfg.epsilon_hat);
        }
    }
    Ok((LinearModel { omega, n_train: ds.n(), hyper: *hp, offset: Vec::new() }, trace))
}

#[derive(Debug, Clone, Serialize)]
pub struct LossReportRow {
    pub spec: String,
    pub alpha_l: f64,
    pub alpha_u: f64,
    pub lambda: f64,
    pub oracle_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub rows: Vec<LossReportRow>,
}

impl LossReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("spec,alpha_l,alpha_u,lambda,oracle_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.spec, r.alpha_l, r.alpha_u, r.lambda, r.oracle_error
            ));
        }
        out
    }
}

/// Trains every spec at every (alpha_l, alpha_u, lambda) grid point and keeps
/// each spec's oracle-best transductive error (one row per spec).
pub fn loss_grid_oracle_compare(
    ds: &Dataset,
    specs: &[LossSpec],
    grid: &[(f64, f64, f64)],
    cfg: &OptimConfig,
) -> Result<LossReport> {
    if ds.true_unlabeled_labels().is_none() {
        return Err(Error::MissingTruth);
    }
    let mut rows = Vec::new();
    for spec in specs {
        let mut best: Option<LossReportRow> = None;
        for &(alpha_l, alpha_u, lambda) in grid {
            let hp = HyperParams::new(alpha_l, alpha_u, lambda);
            let model = match train(spec, &hp, ds, cfg) {
                Ok(m) => m,
                Err(_) => continue, // divergent grid points are skipped
            };
            let err = solver::transductive_error(&model, ds)?;
            if best.as_ref().map_or(true, |b| err < b.oracle_error) {
                best = Some(LossReportRow {
                    spec: spec.name(),
                    alpha_l,
                    alpha_u,
                    lambda,
                    oracle_error: err,
                });
            }
        }
        rows.push(best.ok_or(Error::AllPointsInvalid)?);
    }
    Ok(LossReport { rows })
}
