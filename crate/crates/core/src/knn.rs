//! One-dimensional k-nearest-neighbour estimators of differential entropy
//! and Kullback–Leibler divergence, their variance model, and the
//! iterated-copy averaging used to shrink estimator noise.
//!
//! Neighbour distances come from sorted copies of the data: the k-th
//! neighbour of a point is found by walking outward from its position, so
//! every query is exact and a full estimate costs `O(n log n + n k)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sample::Sample;
use crate::special::{digamma, trigamma};

/// Relative size (to the sample range) of the jitter that separates exact
/// duplicates before neighbour search.
const TIE_JITTER: f64 = 1e-12;

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// Sorted copy of `values` with runs of exact duplicates spread
/// symmetrically by `TIE_JITTER * range`.
fn sorted_untied(values: &[f64]) -> Result<Vec<f64>> {
    untie(sorted(values))
}

fn untie(mut s: Vec<f64>) -> Result<Vec<f64>> {
    let (lo, hi) = match (s.first(), s.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::EmptyInput),
    };
    if !(hi > lo) {
        return Err(Error::Estimation("all values are identical".into()));
    }
    let eps = TIE_JITTER * (hi - lo);
    let mut tied = false;
    let mut i = 0;
    while i < s.len() {
        let mut j = i + 1;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        let run = j - i;
        if run > 1 {
            tied = true;
            let centre = (run - 1) as f64 / 2.0;
            for (t, v) in s[i..j].iter_mut().enumerate() {
                *v += (t as f64 - centre) * eps;
            }
        }
        i = j;
    }
    if tied {
        s.sort_unstable_by(f64::total_cmp);
    }
    Ok(s)
}

/// Distance from `s[i]` to its k-th nearest neighbour within `s` (sorted).
fn kth_within(s: &[f64], i: usize, k: usize) -> f64 {
    let x = s[i];
    let mut left = i;
    let mut right = i + 1;
    let mut d = 0.0;
    for _ in 0..k {
        let dl = if left > 0 { x - s[left - 1] } else { f64::INFINITY };
        let dr = if right < s.len() { s[right] - x } else { f64::INFINITY };
        if dl <= dr {
            d = dl;
            left -= 1;
        } else {
            d = dr;
            right += 1;
        }
    }
    d
}

/// Distance from `x` to its k-th nearest neighbour in sorted `q`, where
/// `pos` is the number of elements of `q` below `x`.
fn kth_across(q: &[f64], x: f64, pos: usize, k: usize) -> f64 {
    let mut left = pos;
    let mut right = pos;
    let mut d = 0.0;
    for _ in 0..k {
        let dl = if left > 0 { x - q[left - 1] } else { f64::INFINITY };
        let dr = if right < q.len() { q[right] - x } else { f64::INFINITY };
        if dl <= dr {
            d = dl;
            left -= 1;
        } else {
            d = dr;
            right += 1;
        }
    }
    d
}

/// Kozachenko–Leonenko entropy estimate in nats,
/// `ψ(n) - ψ(k) + (1/n) Σ ln(2 ρ_k(i))`.
pub fn knn_entropy(sample: &Sample, k: usize) -> Result<f64> {
    let n = sample.len();
    if k < 1 || n <= k {
        return Err(Error::InvalidParameter(format!("need n > k >= 1, got n={n}, k={k}")));
    }
    let s = sorted_untied(sample.values())?;
    let mut sum_ln = 0.0;
    for i in 0..n {
        let rho = kth_within(&s, i, k);
        if !(rho > 0.0) {
            return Err(Error::Estimation("zero neighbour distance after tie jitter".into()));
        }
        sum_ln += (2.0 * rho).ln();
    }
    Ok(digamma(n as f64) - digamma(k as f64) + sum_ln / n as f64)
}

/// kNN estimate of `D(P || Q)` in nats,
/// `(1/n) Σ ln(ν_k(i) / ρ_k(i)) + ln(m / (n - 1))`, where `ρ` is measured
/// within `p` (excluding the point itself) and `ν` from each point of `p`
/// to `q`. Small negative values are estimator noise and are returned as is.
///
/// Identical samples return exactly zero.
pub fn knn_kld(p: &Sample, q: &Sample, k: usize) -> Result<f64> {
    let n = p.len();
    let m = q.len();
    if k < 1 || n <= k || m < k {
        return Err(Error::InvalidParameter(format!(
            "need |p| > k >= 1 and |q| >= k, got |p|={n}, |q|={m}, k={k}"
        )));
    }
    let sp = sorted(p.values());
    let sq = sorted(q.values());
    if sp == sq {
        return Ok(0.0);
    }
    let sp = untie(sp)?;
    // A constant reference sample is legal; it only needs no ties with p.
    let mut sq = if sq[0] == sq[m - 1] { sq } else { untie(sq)? };
    // Nudge reference points that coincide exactly with a point of p.
    let eps = TIE_JITTER * (sp[n - 1] - sp[0]);
    let mut nudged = false;
    let mut j = 0;
    for &x in &sp {
        while j < m && sq[j] < x {
            j += 1;
        }
        let mut t = j;
        while t < m && sq[t] == x {
            sq[t] += eps;
            nudged = true;
            t += 1;
        }
    }
    if nudged {
        sq.sort_unstable_by(f64::total_cmp);
    }

    let mut sum = 0.0;
    let mut pos = 0;
    for (i, &x) in sp.iter().enumerate() {
        while pos < m && sq[pos] < x {
            pos += 1;
        }
        let rho = kth_within(&sp, i, k);
        let nu = kth_across(&sq, x, pos, k);
        if !(rho > 0.0) || !(nu > 0.0) {
            return Err(Error::Estimation("zero neighbour distance after tie jitter".into()));
        }
        sum += (nu / rho).ln();
    }
    Ok(sum / n as f64 + (m as f64 / (n as f64 - 1.0)).ln())
}

/// Which divergence an estimate refers to, for generators `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KldDirection {
    /// `D(P || Q)`
    Forward,
    /// `D(Q || P)`
    Reverse,
    /// Mean of both directions.
    Symmetrized,
}

/// Source of the `Var(ln p(X))` term in the variance model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", content = "value", rename_all = "snake_case")]
pub enum VarLogDensity {
    /// Known analytically from the generating model.
    Model(f64),
    /// Estimated from kNN density values (see [`plugin_var_log_density`]).
    PlugIn(f64),
}

impl VarLogDensity {
    pub fn value(&self) -> f64 {
        match *self {
            Self::Model(v) | Self::PlugIn(v) => v,
        }
    }
}

/// Plug-in estimate of `Var(ln p(X))` from kNN densities
/// `p̂_i = k / ((n-1) 2 ρ_k(i))`. The log of a kNN density carries extra
/// variance `ψ₁(k)`, which is subtracted (floored at zero).
pub fn plugin_var_log_density(sample: &Sample, k: usize) -> Result<VarLogDensity> {
    let n = sample.len();
    if k < 1 || n <= k + 1 {
        return Err(Error::InvalidParameter(format!("need n > k + 1, got n={n}, k={k}")));
    }
    let s = sorted_untied(sample.values())?;
    let ln_dens: Vec<f64> = (0..n)
        .map(|i| (k as f64 / ((n - 1) as f64 * 2.0 * kth_within(&s, i, k))).ln())
        .collect();
    if ln_dens.iter().any(|v| !v.is_finite()) {
        return Err(Error::Estimation("zero neighbour distance after tie jitter".into()));
    }
    let mean = ln_dens.iter().sum::<f64>() / n as f64;
    let var = ln_dens.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(VarLogDensity::PlugIn((var - trigamma(k as f64)).max(0.0)))
}

/// The per-sample entropy variance bracket `Var(ln p) + ψ₁(k)`.
pub fn entropy_variance_bracket(var_log_density: f64, k: usize) -> f64 {
    var_log_density + trigamma(k as f64)
}

/// Predicted KLD variance in nats², `(1/n) (3 v / n_iter + (1 + ρ²) / 2)`
/// with `v` the entropy variance bracket.
pub fn kld_variance_with(n: usize, n_iter: usize, rho: f64, bracket: f64) -> Result<f64> {
    if n < 2 || n_iter < 1 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and n_iter >= 1, got {n}, {n_iter}")));
    }
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be <= 1, got {rho}")));
    }
    Ok((3.0 * bracket / n_iter as f64 + 0.5 * (1.0 + rho * rho)) / n as f64)
}

/// [`kld_variance_with`] for normal data and `k = 1`, where the bracket is
/// `0.5 + ψ₁(1) ≈ 2.145` and the expression reduces to
/// `(1/n)(6.44 / n_iter + 1/2)` at `ρ = 0`.
pub fn kld_variance(n: usize, n_iter: usize, rho: f64) -> Result<f64> {
    kld_variance_with(n, n_iter, rho, entropy_variance_bracket(0.5, 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KldEstimate {
    pub value_nats: f64,
    pub k: usize,
    /// Size of the first sample of each pair.
    pub n: usize,
    pub n_iterations: usize,
    pub failed_iterations: usize,
    pub predicted_sd_nats: f64,
    pub direction: KldDirection,
    pub var_log_density: VarLogDensity,
    /// Per-iteration values in iteration order (failed iterations omitted).
    pub iterations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragingOptions {
    pub k: usize,
    pub n_iterations: usize,
    pub seed: u64,
    pub direction: KldDirection,
    /// Sample size entering the variance model; defaults to the size of the
    /// first sample. Amplification scans pass the training size.
    pub variance_n: Option<usize>,
    pub var_log_density: VarLogDensity,
}

impl AveragingOptions {
    pub fn new(k: usize, n_iterations: usize, seed: u64) -> Self {
        Self {
            k,
            n_iterations,
            seed,
            direction: KldDirection::Forward,
            variance_n: None,
            var_log_density: VarLogDensity::Model(0.5),
        }
    }
}

fn directed_kld(p: &Sample, q: &Sample, k: usize, direction: KldDirection) -> Result<f64> {
    match direction {
        KldDirection::Forward => knn_kld(p, q, k),
        KldDirection::Reverse => knn_kld(q, p, k),
        KldDirection::Symmetrized => Ok(0.5 * (knn_kld(p, q, k)? + knn_kld(q, p, k)?)),
    }
}

/// Seeds handed to the generators for iteration `i`.
pub fn iteration_seeds(seed: u64, i: usize) -> (u64, u64) {
    let s = derive_seed(seed, i as u64);
    (derive_seed(s, 0), derive_seed(s, 1))
}

/// Mean kNN divergence over independently regenerated sample pairs.
///
/// Iteration `i` draws `p_gen(a)` and `q_gen(b)` with
/// `(a, b) = iteration_seeds(seed, i)`; iterations may run concurrently
/// and are combined in index order. Fails when more than 20% of the
/// iterations fail.
pub fn averaged_kld<P, Q>(p_gen: P, q_gen: Q, opts: &AveragingOptions) -> Result<KldEstimate>
where
    P: Fn(u64) -> Result<Sample> + Sync,
    Q: Fn(u64) -> Result<Sample> + Sync,
{
    if opts.n_iterations < 1 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    let results: Vec<Result<(usize, f64)>> = (0..opts.n_iterations)
        .into_par_iter()
        .map(|i| {
            let (sp, sq) = iteration_seeds(opts.seed, i);
            let p = p_gen(sp)?;
            let q = q_gen(sq)?;
            Ok((p.len(), directed_kld(&p, &q, opts.k, opts.direction)?))
        })
        .collect();
    let mut iterations = Vec::with_capacity(results.len());
    let mut n = 0;
    let mut first_error = None;
    for r in results {
        match r {
            Ok((len, v)) => {
                if iterations.is_empty() {
                    n = len;
                }
                iterations.push(v);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = opts.n_iterations - iterations.len();
    if failed * 5 > opts.n_iterations || iterations.is_empty() {
        return Err(Error::Estimation(format!(
            "{failed} of {} iterations failed; first error: {}",
            opts.n_iterations,
            first_error.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    let value = iterations.iter().sum::<f64>() / iterations.len() as f64;
    let bracket = entropy_variance_bracket(opts.var_log_density.value(), opts.k);
    let var = kld_variance_with(opts.variance_n.unwrap_or(n), iterations.len(), 0.0, bracket)?;
    Ok(KldEstimate {
        value_nats: value,
        k: opts.k,
        n,
        n_iterations: opts.n_iterations,
        failed_iterations: failed,
        predicted_sd_nats: var.sqrt(),
        direction: opts.direction,
        var_log_density: opts.var_log_density,
        iterations,
    })
}
