//! Dataset model, file ingestion (CSV and libsvm text), global-mean
//! centering, and the synthetic two-class Gaussian-mixture generator.
//!
//! Features are stored column-major with columns as samples (d x n), matching
//! the solver's Gram conventions. Class 1 carries label -1, class 2 label +1.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

/// Immutable sample collection with a labeled/unlabeled split.
#[derive(Debug, Clone)]
pub struct Dataset {
    d: usize,
    n: usize,
    /// Column-major d x n; column j occupies `features[j*d..(j+1)*d]`.
    features: Vec<f64>,
    labeled_idx: Vec<usize>,
    unlabeled_idx: Vec<usize>,
    /// Aligned with `labeled_idx`, values in {-1, +1}.
    labels: Vec<f64>,
    /// Aligned with `unlabeled_idx`; evaluation/oracle use only.
    true_unlabeled_labels: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        d: usize,
        n: usize,
        features: Vec<f64>,
        labeled_idx: Vec<usize>,
        unlabeled_idx: Vec<usize>,
        labels: Vec<f64>,
        true_unlabeled_labels: Option<Vec<f64>>,
    ) -> Result<Self> {
        if features.len() != d * n {
            return Err(Error::DimensionMismatch { expected: d * n, got: features.len() });
        }
        if labels.len() != labeled_idx.len() {
            return Err(Error::DimensionMismatch {
                expected: labeled_idx.len(),
                got: labels.len(),
            });
        }
        if let Some(t) = &true_unlabeled_labels {
            if t.len() != unlabeled_idx.len() {
                return Err(Error::DimensionMismatch {
                    expected: unlabeled_idx.len(),
                    got: t.len(),
                });
            }
        }
        let mut seen = vec![false; n];
        for &i in labeled_idx.iter().chain(unlabeled_idx.iter()) {
            if i >= n || seen[i] {
                return Err(Error::Config(format!(
                    "index {i} out of range or duplicated in the split"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Config(
                "labeled and unlabeled indices must cover every sample".into(),
            ));
        }
        for &y in labels.iter().chain(true_unlabeled_labels.iter().flatten()) {
            if y != -1.0 && y != 1.0 {
                return Err(Error::LabelDomain(y));
            }
        }
        Ok(Dataset {
            d,
            n,
            features,
            labeled_idx,
            unlabeled_idx,
            labels,
            true_unlabeled_labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_labeled(&self) -> usize {
        self.labeled_idx.len()
    }

    pub fn n_unlabeled(&self) -> usize {
        self.unlabeled_idx.len()
    }

    pub fn labeled_idx(&self) -> &[usize] {
        &self.labeled_idx
    }

    pub fn unlabeled_idx(&self) -> &[usize] {
        &self.unlabeled_idx
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn true_unlabeled_labels(&self) -> Option<&[f64]> {
        self.true_unlabeled_labels.as_deref()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.features[j * self.d..(j + 1) * self.d]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// (1/n) * sum over the listed columns of x x^T, with n the full sample
    /// count of the dataset (the paper's Gram normalization).
    pub fn scaled_gram(&self, idx: &[usize]) -> SymMatrix {
        let d = self.d;
        let inv_n = 1.0 / self.n as f64;
        let mut g = vec![0.0; d * d];
        for &j in idx {
            let x = self.column(j);
            for r in 0..d {
                let xr = x[r] * inv_n;
                for c in r..d {
                    g[r * d + c] += xr * x[c];
                }
            }
        }
        for r in 0..d {
            for c in 0..r {
                g[r * d + c] = g[c * d + r];
            }
        }
        SymMatrix::new(d, g)
    }

    /// (1/sqrt(n)) X_l y_l — the right-hand side of the closed-form solution.
    pub fn labeled_response(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.d];
        let s = 1.0 / (self.n as f64).sqrt();
        for (&j, &y) in self.labeled_idx.iter().zip(&self.labels) {
            let x = self.column(j);
            for r in 0..self.d {
                b[r] += s * y * x[r];
            }
        }
        b
    }

    /// Dense d x m matrix (column-major) holding the listed columns.
    pub fn submatrix(&self, idx: &[usize]) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.d * idx.len());
        for &j in idx {
            m.extend_from_slice(self.column(j));
        }
        m
    }
}

/// Per-class sample counts and the limiting ratios used by the theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassCounts {
    pub n_l1: usize,
    pub n_l2: usize,
    pub n_u1: usize,
    pub n_u2: usize,
    pub n: usize,
    pub d: usize,
}

impl ClassCounts {
    pub fn c_l(&self) -> [f64; 2] {
        [self.n_l1 as f64 / self.n as f64, self.n_l2 as f64 / self.n as f64]
    }

    pub fn c_u(&self) -> [f64; 2] {
        [self.n_u1 as f64 / self.n as f64, self.n_u2 as f64 / self.n as f64]
    }

    pub fn c0(&self) -> f64 {
        self.d as f64 / self.n as f64
    }
}

/// Two-class isotropic Gaussian mixture with means +-mu, mu = (mu_norm/2) e1.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GmmSpec {
    pub d: usize,
    pub mu_norm: f64,
    pub n_l1: usize,
    pub n_l2: usize,
    pub n_u1: usize,
    pub n_u2: usize,
    pub seed: u64,
}

fn map_label(raw: f64) -> Result<f64> {
    // Accepted encodings: {-1,+1} and {0,1}; 0 maps to -1.
    if raw == -1.0 || raw == 1.0 {
        Ok(raw)
    } else if raw == 0.0 {
        Ok(-1.0)
    } else {
        Err(Error::LabelDomain(raw))
    }
}

/// Loads a headered CSV whose rows are samples. `label_column` holds the
/// class, `labeled_flag_column` holds 0/1; every remaining column is a
/// feature, kept in file order. Rows flagged 0 become unlabeled and their
/// label is preserved as ground truth.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    labeled_flag_column: &str,
) -> Result<Dataset> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(&pstr, e))?;
    let headers = reader.headers().map_err(|e| csv_error(&pstr, e))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: pstr.clone(),
            line: 1,
            column: 0,
            message: format!("missing column '{name}'"),
        })
    };
    let label_col = find(label_column)?;
    let flag_col = find(labeled_flag_column)?;
    let feat_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_col && c != flag_col)
        .collect();
    let d = feat_cols.len();

    let mut columns: Vec<f64> = Vec::new();
    let mut labeled_idx = Vec::new();
    let mut unlabeled_idx = Vec::new();
    let mut labels = Vec::new();
    let mut truth = Vec::new();
    for (rec_i, rec) in reader.records().enumerate() {
        let line = rec_i + 2; // header is line 1
        let rec = rec.map_err(|e| csv_error(&pstr, e))?;
        let cell = |c: usize| -> Result<f64> {
            rec.get(c)
                .ok_or(())
                .and_then(|s| s.trim().parse::<f64>().map_err(|_| ()))
                .map_err(|_| Error::Parse {
                    path: pstr.clone(),
                    line,
                    column: c + 1,
                    message: format!("expected a numeric value, got '{}'", rec.get(c).unwrap_or("")),
                })
        };
        for &c in &feat_cols {
            columns.push(cell(c)?);
        }
        let y = map_label(cell(label_col)?)?;
        let flag = cell(flag_col)?;
        if flag == 1.0 {
            labeled_idx.push(rec_i);
            labels.push(y);
        } else if flag == 0.0 {
            unlabeled_idx.push(rec_i);
            truth.push(y);
        } else {
            return Err(Error::Parse {
                path: pstr.clone(),
                line,
                column: flag_col + 1,
                message: format!("labeled flag must be 0 or 1, got {flag}"),
            });
        }
    }
    let n = labeled_idx.len() + unlabeled_idx.len();
    let truth = if unlabeled_idx.is_empty() { None } else { Some(truth) };
    Dataset::new(d, n, columns, labeled_idx, unlabeled_idx, labels, truth)
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = match e.position() {
        Some(p) => p.line() as usize,
        None => 0,
    };
    let message = e.to_string();
    match e.into_kind() {
        // a failure to read the file is an I/O problem, not a parse problem
        csv::ErrorKind::Io(io) => {
            Error::Io(std::io::Error::new(io.kind(), format!("{path}: {io}")))
        }
        _ => Error::Parse { path: path.into(), line, column: 0, message },
    }
}

/// Loads sparse "label idx:val ..." text (1-based feature indices) into a
/// dense matrix, then forms the labeled set by a seeded stratified sample of
/// `n_labeled` rows; all remaining rows become unlabeled with their labels
/// kept as ground truth.
pub fn load_libsvm(path: impl AsRef<Path>, n_labeled: usize, seed: u64) -> Result<Dataset> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let file = std::fs::File::open(path)?;
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut d = 0usize;
    for (li, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = li + 1;
        let mut parts = line.split_whitespace();
        let Some(first) = parts.next() else { continue };
        let raw: f64 = first.parse().map_err(|_| Error::Parse {
            path: pstr.clone(),
            line: lineno,
            column: 1,
            message: format!("bad label '{first}'"),
        })?;
        let y = map_label(raw)?;
        let mut entries = Vec::new();
        for (ci, tok) in parts.enumerate() {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: pstr.clone(),
                line: lineno,
                column: ci + 2,
                message: format!("expected idx:val, got '{tok}'"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| Error::Parse {
                path: pstr.clone(),
                line: lineno,
                column: ci + 2,
                message: format!("bad feature index '{idx_s}'"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| Error::Parse {
                path: pstr.clone(),
                line: lineno,
                column: ci + 2,
                message: format!("bad feature value '{val_s}'"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    path: pstr.clone(),
                    line: lineno,
                    column: ci + 2,
                    message: "feature indices are 1-based".into(),
                });
            }
            d = d.max(idx);
            entries.push((idx - 1, val));
        }
        rows.push((y, entries));
    }
    let n = rows.len();
    if n_labeled > n {
        return Err(Error::InsufficientSamples(format!(
            "requested {n_labeled} labeled samples from a file with {n} rows"
        )));
    }

    let mut features = vec![0.0; d * n];
    for (j, (_, entries)) in rows.iter().enumerate() {
        for &(r, v) in entries {
            features[j * d + r] = v;
        }
    }

    // Stratified split: per-class quotas by largest remainder, then a seeded
    // without-replacement draw inside each class.
    let neg: Vec<usize> = (0..n).filter(|&j| rows[j].0 < 0.0).collect();
    let pos: Vec<usize> = (0..n).filter(|&j| rows[j].0 > 0.0).collect();
    let quotas = largest_remainder(&[neg.len() as f64, pos.len() as f64], n_labeled);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut labeled: Vec<usize> = Vec::with_capacity(n_labeled);
    for (class_rows, quota) in [(&neg, quotas[0]), (&pos, quotas[1])] {
        if quota > class_rows.len() {
            return Err(Error::InsufficientSamples(format!(
                "stratified quota {quota} exceeds class size {}",
                class_rows.len()
            )));
        }
        let mut pool = class_rows.clone();
        for k in 0..quota {
            let pick = k + (rng.next_u64() as usize) % (pool.len() - k);
            pool.swap(k, pick);
        }
        labeled.extend_from_slice(&pool[..quota]);
    }
    labeled.sort_unstable();
    let mut is_labeled = vec![false; n];
    for &j in &labeled {
        is_labeled[j] = true;
    }
    let unlabeled: Vec<usize> = (0..n).filter(|&j| !is_labeled[j]).collect();
    let labels: Vec<f64> = labeled.iter().map(|&j| rows[j].0).collect();
    let truth: Vec<f64> = unlabeled.iter().map(|&j| rows[j].0).collect();
    let truth = if unlabeled.is_empty() { None } else { Some(truth) };
    Dataset::new(d, n, features, labeled, unlabeled, labels, truth)
}

/// Subtracts the per-feature mean taken over all samples, labeled and
/// unlabeled jointly. Returns a new dataset; the input is untouched.
pub fn center(ds: &Dataset) -> Dataset {
    let (d, n) = (ds.d, ds.n);
    let mean = feature_means(ds);
    let mut out = ds.clone();
    for j in 0..n {
        for r in 0..d {
            out.features[j * d + r] -= mean[r];
        }
    }
    out
}

/// Per-feature mean over all samples, labeled and unlabeled jointly.
pub fn feature_means(ds: &Dataset) -> Vec<f64> {
    let (d, n) = (ds.d, ds.n);
    let mut mean = vec![0.0; d];
    for j in 0..n {
        let x = ds.column(j);
        for r in 0..d {
            mean[r] += x[r];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    mean
}

/// Standard normal via Box-Muller over ChaCha12 output; platform-stable and
/// fully determined by the stream.
struct NormalSource {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl NormalSource {
    fn new(seed: u64) -> Self {
        NormalSource { rng: ChaCha12Rng::seed_from_u64(seed), spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0,1], u2 in [0,1)
        let u1 = ((self.rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
        let u2 = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Draws the mixture: class 1 columns from N(-mu, I) with label -1, class 2
/// from N(+mu, I) with label +1. Column order is labeled class 1, labeled
/// class 2, unlabeled class 1, unlabeled class 2.
pub fn generate_gmm(spec: &GmmSpec) -> Dataset {
    assert!(spec.mu_norm > 0.0, "mu_norm must be positive");
    let d = spec.d;
    let n = spec.n_l1 + spec.n_l2 + spec.n_u1 + spec.n_u2;
    let half = spec.mu_norm / 2.0;
    let mut src = NormalSource::new(spec.seed);
    let mut features = Vec::with_capacity(d * n);
    let mut draw = |sign: f64, count: usize, features: &mut Vec<f64>| {
        for _ in 0..count {
            for r in 0..d {
                let m = if r == 0 { sign * half } else { 0.0 };
                features.push(m + src.next());
            }
        }
    };
    draw(-1.0, spec.n_l1, &mut features);
    draw(1.0, spec.n_l2, &mut features);
    draw(-1.0, spec.n_u1, &mut features);
    draw(1.0, spec.n_u2, &mut features);

    let n_l = spec.n_l1 + spec.n_l2;
    let labeled_idx: Vec<usize> = (0..n_l).collect();
    let unlabeled_idx: Vec<usize> = (n_l..n).collect();
    let mut labels = vec![-1.0; spec.n_l1];
    labels.extend(std::iter::repeat(1.0).take(spec.n_l2));
    let mut truth = vec![-1.0; spec.n_u1];
    truth.extend(std::iter::repeat(1.0).take(spec.n_u2));
    let truth = if unlabeled_idx.is_empty() { None } else { Some(truth) };
    Dataset::new(d, n, features, labeled_idx, unlabeled_idx, labels, truth)
        .expect("generator invariants hold by construction")
}

/// Splits `total` into integers proportional to `weights` (largest-remainder
/// rounding; ties go to the lower index).
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let w_sum: f64 = weights.iter().sum();
    if w_sum <= 0.0 {
        let mut out = vec![0; weights.len()];
        if !out.is_empty() {
            out[0] = total;
        }
        return out;
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / w_sum).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        (quotas[j] - quotas[j].floor())
            .partial_cmp(&(quotas[i] - quotas[i].floor()))
            .unwrap()
            .then(i.cmp(&j))
    });
    for &i in &order {
        if remaining == 0 {
            break;
        }
        out[i] += 1;
        remaining -= 1;
    }
    out
}

/// Per-class counts. Labeled counts are read off the labels; unlabeled counts
/// come from the matched-proportions rule c_uj = c_lj * n_u / n_l (default)
/// or from the ground-truth labels when `assume_matched_proportions` is off.
pub fn class_counts(ds: &Dataset, assume_matched_proportions: bool) -> Result<ClassCounts> {
    if ds.n_labeled() == 0 {
        return Err(Error::InsufficientSamples(
            "class counts require at least one labeled sample".into(),
        ));
    }
    let n_l1 = ds.labels.iter().filter(|&&y| y < 0.0).count();
    let n_l2 = ds.labels.len() - n_l1;
    let n_u = ds.n_unlabeled();
    let (n_u1, n_u2) = if n_u == 0 {
        (0, 0)
    } else if assume_matched_proportions {
        let q = largest_remainder(&[n_l1 as f64, n_l2 as f64], n_u);
        (q[0], q[1])
    } else {
        let truth = ds.true_unlabeled_labels().ok_or(Error::MissingTruth)?;
        let u1 = truth.iter().filter(|&&y| y < 0.0).count();
        (u1, n_u - u1)
    };
    Ok(ClassCounts { n_l1, n_l2, n_u1, n_u2, n: ds.n(), d: ds.dim() })
}
