//! Poisson-likelihood χ² (Baker–Cousins) and amplitude-only fits of a
//! fixed model shape to a histogram.

use serde::Serialize;

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};
use crate::histogram::Histogram;

/// Predictions below this are treated as empty bins and dropped.
const MIN_PREDICTION: f64 = 1e-12;

fn bc_term(n: f64, y: f64) -> f64 {
    if n == 0.0 {
        y
    } else {
        y - n + n * (n / y).ln()
    }
}

/// `χ² = 2 Σ [y_i - n_i + n_i ln(n_i / y_i)]`; a bin with `n_i = 0`
/// contributes `2 y_i`.
pub fn baker_cousins_chi2(observed: &[u64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::InvalidParameter(format!(
            "{} observed bins but {} predictions",
            observed.len(),
            predicted.len()
        )));
    }
    let mut chi2 = 0.0;
    for (i, (&n, &y)) in observed.iter().zip(predicted).enumerate() {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Domain(format!("prediction {y} in bin {i} is not positive")));
        }
        chi2 += bc_term(n as f64, y);
    }
    Ok(2.0 * chi2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Expected number of events in the fit range under the fitted model.
    pub amplitude: f64,
    /// Half-width of the `Δχ² = 1` interval.
    pub amplitude_error: f64,
    pub chi2: f64,
    pub dof: usize,
    pub range: (f64, f64),
    pub n_bins: usize,
}

impl FitResult {
    pub fn chi2_per_dof(&self) -> f64 {
        self.chi2 / self.dof as f64
    }
}

/// Fits `y_i = a · P(bin_i)` to the bins lying wholly inside `range`, with
/// `P` the exact model probability of each bin and `a` the only free
/// parameter.
///
/// The χ² minimum is at `a = Σ n_i / Σ P_i`; the error is found by
/// bisection on both sides of the minimum where χ² rises by one.
pub fn amplitude_fit(observed: &Histogram, model: &DistributionModel, range: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty fit range [{lo}, {hi}]")));
    }
    let tol = 1e-9 * observed.delta();
    let mut counts = Vec::new();
    let mut masses = Vec::new();
    let mut n_bins = 0;
    for i in 0..observed.n_bins() {
        let (l, r) = (observed.left_edge(i), observed.right_edge(i));
        if l < lo - tol || r > hi + tol {
            continue;
        }
        n_bins += 1;
        let p = model.interval_mass(l, r);
        if p >= MIN_PREDICTION {
            counts.push(observed.counts()[i]);
            masses.push(p);
        }
    }
    if counts.len() < 10 {
        return Err(Error::Fit(format!("fit range holds {} usable bins, need >= 10", counts.len())));
    }
    let total_n: f64 = counts.iter().map(|&c| c as f64).sum();
    let total_p: f64 = masses.iter().sum();
    if !(total_n > 0.0) {
        return Err(Error::Fit("no entries in the fit range".into()));
    }
    let a_hat = total_n / total_p;
    let chi2_at = |a: f64| -> f64 {
        2.0 * counts
            .iter()
            .zip(&masses)
            .map(|(&n, &p)| bc_term(n as f64, a * p))
            .sum::<f64>()
    };
    let chi2_min = chi2_at(a_hat);
    let target = chi2_min + 1.0;
    let crossing = |dir: f64| -> Result<f64> {
        let scale = a_hat / total_n.sqrt();
        let mut inner = a_hat;
        let mut outer = a_hat + dir * scale;
        let mut tries = 0;
        while chi2_at(outer) < target {
            inner = outer;
            outer = a_hat + (outer - a_hat) * 2.0;
            tries += 1;
            if tries > 60 || outer <= 0.0 {
                return Err(Error::Fit("could not bracket the Δχ² = 1 crossing".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if chi2_at(mid) < target {
                inner = mid;
            } else {
                outer = mid;
            }
            if (outer - inner).abs() <= 1e-12 * a_hat {
                break;
            }
        }
        Ok(0.5 * (inner + outer))
    };
    let up = crossing(1.0)?;
    let down = crossing(-1.0)?;
    Ok(FitResult {
        amplitude: a_hat,
        amplitude_error: 0.5 * (up - down),
        chi2: chi2_min,
        dof: counts.len() - 1,
        range,
        n_bins,
    })
}
