//! Shimazaki–Shinomoto histogram cost as a function of `M`, its
//! normalisation between `M = 1` and `M = 2`, and the one-parameter shape
//! fit for `A`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::{bin_width, mu_entries_per_bin, Histogram};
use crate::sample::Sample;

/// `C_B = (2 μ_B - σ_B²) / Δ²` with the mean and (population) variance of
/// the bin counts.
pub fn raw_cost(hist: &Histogram) -> Result<f64> {
    counts_cost(hist.counts(), hist.delta())
}

fn counts_cost(counts: &[u64], delta: f64) -> Result<f64> {
    let k = counts.len();
    if k < 2 {
        return Err(Error::Domain(format!("cost needs at least 2 bins, got {k}")));
    }
    let kf = k as f64;
    let mean = counts.iter().sum::<u64>() as f64 / kf;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / kf;
    Ok((2.0 * mean - var) / (delta * delta))
}

/// `M ∈ {1.0, 1.1, ..., 4.0}`.
pub fn default_grid() -> Vec<f64> {
    (10..=40).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostPoint {
    pub m: f64,
    /// Bin width actually used (see [`cost_scan`]).
    pub delta: f64,
    pub n_bins: usize,
    pub raw_cost: f64,
    pub normalized_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostScan {
    pub points: Vec<CostPoint>,
    pub n: usize,
    pub h_used: f64,
    pub fitted_a: Option<f64>,
    /// `C_B(1) == C_B(2)`: normalised costs are NaN, raw costs still valid.
    pub degenerate_normalization: bool,
}

/// Counts over `n_bins` equal bins spanning exactly `[lo, hi]`.
fn tiled_counts(values: &[f64], lo: f64, hi: f64, n_bins: usize) -> Vec<u64> {
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &v in values {
        counts[(((v - lo) / width) as usize).min(n_bins - 1)] += 1;
    }
    counts
}

fn cost_at(values: &[f64], lo: f64, hi: f64, h_nats: f64, m: f64) -> Result<(f64, usize, f64)> {
    let target = bin_width(h_nats, values.len(), m)?;
    let n_bins = (((hi - lo) / target).round() as usize).max(1);
    let delta = (hi - lo) / n_bins as f64;
    let counts = tiled_counts(values, lo, hi, n_bins);
    Ok((delta, n_bins, counts_cost(&counts, delta)?))
}

/// Raw and normalised cost over `m_grid`, re-binning the raw sample at each
/// point.
///
/// The bin width for each `M` comes from `exp(h) n^{-1/M}`, rounded to the
/// nearest width that tiles `[min, max]` with a whole number of bins (the
/// cost estimator assumes the bins cover the observation interval exactly;
/// a truncated last bin biases the count variance). The relative change to
/// the width is at most `1 / (2 n_bins)`.
///
/// Normalisation: `C_norm(M) = (C_B(M) - C_B(2)) / (C_B(1) - C_B(2))`.
pub fn cost_scan(sample: &Sample, h_nats: f64, m_grid: &[f64]) -> Result<CostScan> {
    if m_grid.is_empty() {
        return Err(Error::InvalidParameter("empty M grid".into()));
    }
    for w in m_grid.windows(2) {
        if !(w[1] > w[0]) || w[1] - w[0] > 0.1 + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "M grid must ascend in steps of at most 0.1 ({} -> {})",
                w[0], w[1]
            )));
        }
    }
    if m_grid.iter().any(|&m| !(1.0..=4.0).contains(&m)) {
        return Err(Error::InvalidParameter("M grid must lie within [1, 4]".into()));
    }
    let (lo, hi) = sample.range().ok_or(Error::EmptyInput)?;
    if !(hi > lo) {
        return Err(Error::Domain("cost scan needs a sample with non-zero range".into()));
    }
    let values = sample.values();
    let costs: Vec<(f64, usize, f64)> = m_grid
        .par_iter()
        .map(|&m| cost_at(values, lo, hi, h_nats, m))
        .collect::<Result<_>>()?;
    let c1 = cost_at(values, lo, hi, h_nats, 1.0)?.2;
    let c2 = cost_at(values, lo, hi, h_nats, 2.0)?.2;
    let raw: Vec<(f64, f64, usize, f64)> = m_grid
        .iter()
        .zip(costs)
        .map(|(&m, (delta, n_bins, c))| (m, delta, n_bins, c))
        .collect();
    Ok(CostScan::from_raw(raw, c1, c2, values.len(), h_nats))
}

impl CostScan {
    /// Assembles a scan from `(M, delta, n_bins, raw_cost)` rows and the
    /// reference costs at `M = 1` and `M = 2`.
    pub fn from_raw(rows: Vec<(f64, f64, usize, f64)>, c1: f64, c2: f64, n: usize, h_used: f64) -> Self {
        let span = c1 - c2;
        let degenerate = !(span.abs() > 1e-12 * c1.abs().max(c2.abs())) || !span.is_finite();
        let points = rows
            .into_iter()
            .map(|(m, delta, n_bins, raw_cost)| CostPoint {
                m,
                delta,
                n_bins,
                raw_cost,
                normalized_cost: if degenerate { f64::NAN } else { (raw_cost - c2) / span },
            })
            .collect();
        let mut scan = Self {
            points,
            n,
            h_used,
            fitted_a: None,
            degenerate_normalization: degenerate,
        };
        scan.fitted_a = fit_a(&scan).ok();
        scan
    }

    pub fn normalized_at(&self, m: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.m - m).abs() < 1e-9)
            .map(|p| p.normalized_cost)
    }
}

/// Normalised cost model `1/μ_H - n^{-1/2} + A (n^{-2/M} - 1/n)`.
pub fn model_cost(n: usize, m: f64, a: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(1.0 / mu_entries_per_bin(n, m)? - nf.powf(-0.5) + a * shape_regressor(n, m))
}

fn shape_regressor(n: usize, m: f64) -> f64 {
    let nf = n as f64;
    nf.powf(-2.0 / m) - 1.0 / nf
}

/// Least-squares `A` for the normalised cost model, with uniform weights
/// over the whole grid. The model is linear in `A`, so the fit is closed
/// form.
pub fn fit_a(scan: &CostScan) -> Result<f64> {
    if scan.points.len() < 10 {
        return Err(Error::Fit(format!("need at least 10 grid points, got {}", scan.points.len())));
    }
    let first = scan.points.first().expect("non-empty").m;
    let last = scan.points.last().expect("non-empty").m;
    if first > 1.0 + 1e-9 || last < 4.0 - 1e-9 {
        return Err(Error::Fit(format!("grid [{first}, {last}] does not span [1, 4]")));
    }
    if scan.degenerate_normalization {
        return Err(Error::Fit("normalisation is degenerate".into()));
    }
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in &scan.points {
        let x = shape_regressor(scan.n, p.m);
        let y = p.normalized_cost - model_cost(scan.n, p.m, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
        sxx += x * x;
        sxy += x * y;
    }
    if !(sxx > 1e-300) {
        return Err(Error::Fit("shape regressor vanishes on the grid".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionModel;

    #[test]
    fn raw_cost_examples() {
        let flat = Histogram::from_counts(0.0, 1.0, vec![3, 3, 3, 3]).unwrap();
        assert_eq!(raw_cost(&flat).unwrap(), 6.0);
        let two = Histogram::from_counts(0.0, 0.5, vec![1, 5]).unwrap();
        assert_eq!(raw_cost(&two).unwrap(), 8.0);
        let one = Histogram::from_counts(0.0, 0.5, vec![7]).unwrap();
        assert!(matches!(raw_cost(&one), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_validation() {
        let s = DistributionModel::standard_normal().sample(500, 1).unwrap();
        assert!(cost_scan(&s, 1.4, &[]).is_err());
        assert!(cost_scan(&s, 1.4, &[1.0, 1.5]).is_err());
        assert!(cost_scan(&s, 1.4, &[0.5, 0.6]).is_err());
        assert!(cost_scan(&s, 1.4, &[2.0, 1.9]).is_err());
        let constant = Sample::ingested(vec![1.0; 10]).unwrap();
        assert!(cost_scan(&constant, 0.0, &default_grid()).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[10], 2.0);
        assert_eq!(g[30], 4.0);
    }

    #[test]
    fn uniform_cost_peaks_at_m1() {
        let s = DistributionModel::uniform(0.0, 1.0).unwrap().sample(10_000, 4).unwrap();
        let scan = cost_scan(&s, 0.0, &default_grid()).unwrap();
        assert!(scan.points[10].raw_cost < scan.points[0].raw_cost);
        assert_eq!(scan.normalized_at(1.0), Some(1.0));
        assert_eq!(scan.normalized_at(2.0), Some(0.0));
        for p in scan.points.iter().filter(|p| p.m >= 2.0) {
            assert!(p.normalized_cost.abs() < 0.02, "M={} {}", p.m, p.normalized_cost);
        }
        // single-seed fits scatter by about 0.3; the median is stable
        let mut a: Vec<f64> = (0..9)
            .map(|seed| {
                let s = DistributionModel::uniform(0.0, 1.0).unwrap().sample(10_000, seed).unwrap();
                cost_scan(&s, 0.0, &default_grid()).unwrap().fitted_a.unwrap()
            })
            .collect();
        a.sort_unstable_by(f64::total_cmp);
        assert!(a[4].abs() < 0.2, "{a:?}");
    }

    #[test]
    fn tiled_width_stays_close_to_target() {
        let m = DistributionModel::standard_normal();
        let s = m.sample(10_000, 8).unwrap();
        let scan = cost_scan(&s, m.differential_entropy(), &default_grid()).unwrap();
        for p in &scan.points {
            let target = bin_width(m.differential_entropy(), 10_000, p.m).unwrap();
            assert!((p.delta / target - 1.0).abs() <= 0.5 / p.n_bins as f64 + 1e-12);
        }
    }

    #[test]
    fn degenerate_normalisation_is_flagged() {
        let rows = (10..=40)
            .map(|i| (i as f64 / 10.0, 0.1, 10, 5.0))
            .collect::<Vec<_>>();
        let scan = CostScan::from_raw(rows, 5.0, 5.0, 1000, 0.0);
        assert!(scan.degenerate_normalization);
        assert!(scan.points.iter().all(|p| p.normalized_cost.is_nan() && p.raw_cost == 5.0));
        assert!(scan.fitted_a.is_none());
        assert!(matches!(fit_a(&scan), Err(Error::Fit(_))));
    }

    #[test]
    fn fit_recovers_planted_a() {
        let n = 10_000;
        let rows: Vec<_> = default_grid()
            .into_iter()
            .map(|m| (m, 0.1, 10, model_cost(n, m, 2.5).unwrap()))
            .collect();
        // References 1 and 0 make the normalised costs equal the model.
        let scan = CostScan::from_raw(rows, 1.0, 0.0, n, 0.0);
        assert!((scan.fitted_a.unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn refit_after_exact_renormalisation_is_stable() {
        let m = DistributionModel::standard_normal();
        let s = m.sample(10_000, 12).unwrap();
        let scan = cost_scan(&s, m.differential_entropy(), &default_grid()).unwrap();
        // Feed the normalised costs back in as raw costs; their M=1 and M=2
        // values are exactly 1 and 0.
        let rows: Vec<_> = scan
            .points
            .iter()
            .map(|p| (p.m, p.delta, p.n_bins, p.normalized_cost))
            .collect();
        let again = CostScan::from_raw(rows, 1.0, 0.0, scan.n, scan.h_used);
        assert!((again.fitted_a.unwrap() - scan.fitted_a.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fit_requires_full_grid() {
        let m = DistributionModel::standard_normal();
        let s = m.sample(2000, 3).unwrap();
        let grid: Vec<f64> = (10..=30).map(|i| i as f64 / 10.0).collect();
        let scan = cost_scan(&s, m.differential_entropy(), &grid).unwrap();
        assert!(scan.fitted_a.is_none());
        assert!(fit_a(&scan).is_err());
    }
}
