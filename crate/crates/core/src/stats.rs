//! Two-sided Mann-Whitney U test: exact enumeration for small groups,
//! tie-corrected normal approximation otherwise.

use crate::numerics::erf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    pub u1: f64,
    pub u2: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks of the pooled sample, returned per element.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    ranks
}

fn u_from_ranks(ranks: &[f64], in_a: &[bool], n1: usize) -> f64 {
    let r1: f64 = ranks.iter().zip(in_a).filter(|(_, &a)| a).map(|(r, _)| r).sum();
    r1 - (n1 * (n1 + 1)) as f64 / 2.0
}

/// Standard normal upper tail via the error function.
fn phi_tail(z: f64) -> f64 {
    0.5 * (1.0 - erf(z / std::f64::consts::SQRT_2))
}

/// Below this per-group size the exact permutation distribution is used.
const EXACT_LIMIT: usize = 8;

pub fn mann_whitney(a: &[f64], b: &[f64]) -> MannWhitney {
    let (n1, n2) = (a.len(), b.len());
    assert!(n1 >= 1 && n2 >= 1, "both groups must be nonempty");
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let mut in_a = vec![false; n1 + n2];
    for flag in in_a.iter_mut().take(n1) {
        *flag = true;
    }
    let u1 = u_from_ranks(&ranks, &in_a, n1);
    let u2 = n1 as f64 * n2 as f64 - u1;
    let mean = n1 as f64 * n2 as f64 / 2.0;

    if n1 < EXACT_LIMIT && n2 < EXACT_LIMIT {
        // exact two-sided p over all group assignments of the pooled ranks
        let obs_dev = (u1 - mean).abs();
        let mut total = 0u64;
        let mut extreme = 0u64;
        let n = n1 + n2;
        let mut chosen = vec![false; n];
        fn rec(
            start: usize,
            left: usize,
            n: usize,
            chosen: &mut Vec<bool>,
            ranks: &[f64],
            n1: usize,
            mean: f64,
            obs_dev: f64,
            total: &mut u64,
            extreme: &mut u64,
        ) {
            if left == 0 {
                let u = u_from_ranks(ranks, chosen, n1);
                *total += 1;
                if (u - mean).abs() + 1e-12 >= obs_dev {
                    *extreme += 1;
                }
                return;
            }
            if n - start < left {
                return;
            }
            chosen[start] = true;
            rec(start + 1, left - 1, n, chosen, ranks, n1, mean, obs_dev, total, extreme);
            chosen[start] = false;
            rec(start + 1, left, n, chosen, ranks, n1, mean, obs_dev, total, extreme);
        }
        rec(0, n1, n, &mut chosen, &ranks, n1, mean, obs_dev, &mut total, &mut extreme);
        return MannWhitney { u1, u2, p_value: extreme as f64 / total as f64, exact: true };
    }

    // normal approximation with tie correction and continuity correction
    let n = (n1 + n2) as f64;
    let mut tie_term = 0.0;
    let mut sorted: Vec<f64> = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n1 as f64 * n2 as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if var <= 0.0 {
        1.0 // all observations tied: no evidence of a shift
    } else {
        let z = ((u1 - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * phi_tail(z)).min(1.0)
    };
    MannWhitney { u1, u2, p_value: p, exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_sum_invariant() {
        let mut state = 3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 1000) as f64 / 100.0
        };
        for trial in 0..50 {
            let n1 = 2 + trial % 12;
            let n2 = 2 + (trial * 7) % 15;
            let a: Vec<f64> = (0..n1).map(|_| next()).collect();
            let b: Vec<f64> = (0..n2).map(|_| next()).collect();
            let r = mann_whitney(&a, &b);
            assert!((r.u1 + r.u2 - (n1 * n2) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_groups_no_effect() {
        let a = vec![2.0; 10];
        let r = mann_whitney(&a, &a);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.u1, r.u2);
    }

    #[test]
    fn fully_separated_small_groups() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(r.u1, 0.0);
        assert!(r.exact);
        // only U in {0, 9} is as extreme: 2 of C(6,3) = 20 assignments
        assert!((r.p_value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn exact_symmetry() {
        let a = [1.0, 3.0, 5.0, 7.0];
        let b = [2.0, 4.0, 6.0];
        let r1 = mann_whitney(&a, &b);
        let r2 = mann_whitney(&b, &a);
        assert!((r1.p_value - r2.p_value).abs() < 1e-12);
        assert_eq!(r1.u1, r2.u2);
    }

    #[test]
    fn approximation_tracks_exact() {
        // same data pushed through both paths by padding group sizes
        let a: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..7).map(|i| i as f64 + 2.5).collect();
        let exact = mann_whitney(&a, &b);
        assert!(exact.exact);
        let a8: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let b8: Vec<f64> = (0..8).map(|i| i as f64 + 2.5).collect();
        let approx = mann_whitney(&a8, &b8);
        assert!(!approx.exact);
        // both should flag a clear shift
        assert!(exact.p_value < 0.1);
        assert!(approx.p_value < 0.1);
    }

    #[test]
    fn tie_correction_applies() {
        let a = vec![1.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0];
        let b = vec![1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 4.0];
        let r = mann_whitney(&a, &b);
        assert!(r.p_value > 0.05 && r.p_value <= 1.0);
        assert!((r.u1 + r.u2 - 64.0).abs() < 1e-9);
    }
}
