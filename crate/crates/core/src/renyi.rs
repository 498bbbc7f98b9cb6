//! Discrete Rényi entropies of histograms and the data-side estimators of
//! the shape factor `F = exp(r_1 - r_2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::{uniform_divergence, Histogram};

/// `R_q = ln(Σ p_i^q) / (1 - q)` over occupied bins, with `p_i = n_i / N`.
/// `q = 1` is the Shannon entropy and `q = 0` is `ln` of the number of
/// occupied bins.
pub fn discrete_renyi(hist: &Histogram, q: f64) -> Result<f64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("order must be finite and >= 0, got {q}")));
    }
    if q == 1.0 {
        return hist.shannon_entropy();
    }
    if hist.n_total() == 0 {
        return Err(Error::EmptyInput);
    }
    let (k, divergence) = uniform_divergence(hist.counts(), hist.n_total(), q);
    Ok((k as f64).ln() - divergence)
}

/// `R_q` of a probability vector; zero entries are skipped and the rest
/// renormalised.
pub fn renyi_of_probabilities(probs: &[f64], q: f64) -> Result<f64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("order must be finite and >= 0, got {q}")));
    }
    if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter("probabilities must be finite and >= 0".into()));
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyInput);
    }
    let p = probs.iter().filter(|&&p| p > 0.0).map(|&p| p / total);
    Ok(if q == 0.0 {
        (p.count() as f64).ln()
    } else if q == 1.0 {
        -p.map(|p| p * p.ln()).sum::<f64>()
    } else {
        p.map(|p| p.powf(q)).sum::<f64>().ln() / (1.0 - q)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenyiSpectrum {
    pub orders: Vec<f64>,
    pub discrete_values: Vec<f64>,
    pub delta: f64,
}

impl RenyiSpectrum {
    pub fn of(hist: &Histogram, orders: &[f64]) -> Result<Self> {
        let discrete_values = orders
            .iter()
            .map(|&q| discrete_renyi(hist, q))
            .collect::<Result<_>>()?;
        Ok(Self {
            orders: orders.to_vec(),
            discrete_values,
            delta: hist.delta(),
        })
    }

    /// `R_q + ln Δ`, which approaches the differential `r_q` as `Δ → 0`.
    pub fn continuous_estimates(&self) -> Vec<f64> {
        let shift = self.delta.ln();
        self.discrete_values.iter().map(|r| r + shift).collect()
    }
}

/// Weighted entries per bin `μ'_H = Σ p_i n_i = N Σ p_i²`.
pub fn weighted_entries_per_bin(hist: &Histogram) -> Result<f64> {
    let n = hist.n_total();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let sum_sq: f64 = hist.counts().iter().map(|&c| (c as f64).powi(2)).sum();
    Ok(sum_sq / n as f64)
}

/// Data-side shape factors `(F_μ, F_E)` for a histogram of `n` entries
/// binned at exponent `m`: `F_μ = n^{1/m} exp(-R_2)` and
/// `F_E = exp(H_B - R_2)`. Both are most reliable for `2 <= m <= 3`.
pub fn estimate_f(hist: &Histogram, n: usize, m: f64) -> Result<(f64, f64)> {
    if !(m > 0.0) || n < 1 {
        return Err(Error::InvalidParameter(format!("need n >= 1 and m > 0, got {n}, {m}")));
    }
    let r2 = discrete_renyi(hist, 2.0)?;
    let h_b = hist.shannon_entropy()?;
    Ok(((n as f64).powf(1.0 / m) * (-r2).exp(), (h_b - r2).exp()))
}
