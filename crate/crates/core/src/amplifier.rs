//! The GenCopy amplifier and the algebra of effective binning exponents.
//!
//! An amplifier that turns `N` training events into `G N` generated ones
//! behaves, at best, like a histogram of `N` events binned at
//! `M_eff = 2 ln(G N) / ln(N)`. Beyond `M_eff = 3` the generated sample
//! resolves structure the training data never carried.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::{bin_width, Histogram};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sample::{Provenance, Sample};

/// Default reference exponent for GenCopy binning.
pub const DEFAULT_M0: f64 = 2.0;
/// Upper end of the Goldilocks range, the amplification bound.
pub const BOUND_M_EFF: f64 = 3.0;
/// Tolerance on `M_eff` for the `at_bound` verdict.
pub const VERDICT_TOLERANCE: f64 = 0.005;
/// Training sizes below this are prone to range truncation.
pub const SMALL_TRAINING_WARNING: usize = 1000;

/// Histogram used by GenCopy: width `exp(h) n^{-1/m0}` from the sample
/// minimum.
pub fn gencopy_binning(training: &Sample, h_nats: f64, m0: f64) -> Result<Histogram> {
    if training.len() < 2 {
        return Err(Error::Domain(format!("training sample needs >= 2 points, got {}", training.len())));
    }
    let delta = bin_width(h_nats, training.len(), m0)?;
    Histogram::build_from_min(training, delta)
}

/// GenCopy at the default `M0 = 2`.
pub fn gencopy(training: &Sample, gain: usize, h_nats: f64, seed: u64) -> Result<Sample> {
    gencopy_with(training, gain, h_nats, seed, DEFAULT_M0)
}

/// Emits `gain` copies of the training sample, each point moved to a
/// uniformly random position inside its own bin. Per-bin counts of the
/// output are exactly `gain` times the training counts. Copy `c` uses seed
/// `derive_seed(seed, c)`; copies are concatenated in order.
pub fn gencopy_with(training: &Sample, gain: usize, h_nats: f64, seed: u64, m0: f64) -> Result<Sample> {
    if gain < 1 {
        return Err(Error::Domain("gain must be >= 1".into()));
    }
    let hist = gencopy_binning(training, h_nats, m0)?;
    let bins: Vec<usize> = training
        .values()
        .iter()
        .map(|&x| hist.bin_index(x).expect("training values lie above the sample minimum"))
        .collect();
    let copies: Vec<Vec<f64>> = (0..gain)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, c as u64));
            bins.iter()
                .map(|&i| place_in_bin(&hist, i, rng.random::<f64>()))
                .collect()
        })
        .collect();
    let mut lineage = training.seed_lineage().to_vec();
    lineage.push(seed);
    Ok(Sample::from_finite(copies.concat(), Provenance::Generated, lineage))
}

/// `x_start + (i + u) Δ`, nudged if rounding carried it into a neighbour.
fn place_in_bin(hist: &Histogram, i: usize, u: f64) -> f64 {
    let mut x = hist.x_start() + (i as f64 + u) * hist.delta();
    while hist.bin_index(x).is_some_and(|b| b > i) {
        x = x.next_down();
    }
    while hist.bin_index(x).is_none_or(|b| b < i) {
        x = x.next_up();
    }
    x
}

/// `M_eff = 2 ln(n_gen) / ln(n_train)`.
pub fn m_eff(n_train: usize, n_gen: usize) -> Result<f64> {
    if n_train < 2 || n_gen < n_train {
        return Err(Error::Domain(format!(
            "need n_train >= 2 and n_gen >= n_train, got {n_train}, {n_gen}"
        )));
    }
    Ok(2.0 * (n_gen as f64).ln() / (n_train as f64).ln())
}

/// Largest gain reaching `m_cap` from reference `m0`:
/// `round(n^(m_cap/m0 - 1))`.
pub fn max_gain(n_train: usize, m_cap: f64, m0: f64) -> Result<usize> {
    if n_train < 2 || !(m0 >= 2.0) || !(m_cap >= m0) {
        return Err(Error::Domain(format!(
            "need n_train >= 2 and m_cap >= m0 >= 2, got {n_train}, {m_cap}, {m0}"
        )));
    }
    Ok((n_train as f64).powf(m_cap / m0 - 1.0).round() as usize)
}

/// Integer gain whose `M_eff` is closest to `target` (at least 1).
pub fn gain_for_m_eff(n_train: usize, target: f64) -> Result<usize> {
    if n_train < 2 || !(target >= 2.0) {
        return Err(Error::Domain(format!("need n_train >= 2 and target >= 2, got {n_train}, {target}")));
    }
    Ok(((n_train as f64).powf(target / 2.0 - 1.0).round() as usize).max(1))
}

/// Effective exponent of data first binned at `m_pre` and then amplified
/// to `m_after`: `2 m_after / m_pre`.
pub fn chain_m_eff(m_pre: f64, m_after: f64) -> Result<f64> {
    if !(m_pre >= 2.0) || !(m_after >= m_pre) {
        return Err(Error::Domain(format!("need 2 <= m_pre <= m_after, got {m_pre}, {m_after}")));
    }
    Ok(2.0 * m_after / m_pre)
}

/// Bound on `M_eff` for data already amplified to `m_pre`: `6 / m_pre`.
pub fn chain_bound(m_pre: f64) -> Result<f64> {
    if !(m_pre >= 2.0) {
        return Err(Error::Domain(format!("need m_pre >= 2, got {m_pre}")));
    }
    Ok(2.0 * BOUND_M_EFF / m_pre)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Within,
    AtBound,
    Exceeds,
}

impl Verdict {
    pub fn classify(m_eff: f64) -> Self {
        if (m_eff - BOUND_M_EFF).abs() <= VERDICT_TOLERANCE {
            Self::AtBound
        } else if m_eff < BOUND_M_EFF {
            Self::Within
        } else {
            Self::Exceeds
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Within => "within",
            Self::AtBound => "at_bound",
            Self::Exceeds => "exceeds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplificationReport {
    pub n_train: usize,
    pub n_generated: usize,
    pub gain: f64,
    pub m_eff: f64,
    pub verdict: Verdict,
    pub m0: f64,
    /// `exp(h) / sqrt(n_train)`, when an entropy was supplied.
    pub resolution_delta: Option<f64>,
    pub warnings: Vec<String>,
}

/// Classifies an amplification of `n_train` events to `n_gen`.
pub fn audit(n_train: usize, n_gen: usize, h_nats: Option<f64>) -> Result<AmplificationReport> {
    if n_train < 2 || n_gen < 2 {
        return Err(Error::Domain(format!("counts must be >= 2, got {n_train}, {n_gen}")));
    }
    let m = 2.0 * (n_gen as f64).ln() / (n_train as f64).ln();
    let mut warnings = Vec::new();
    if n_gen < n_train {
        warnings.push(format!("fewer generated ({n_gen}) than training ({n_train}) events"));
    }
    if n_train < SMALL_TRAINING_WARNING {
        warnings.push(format!(
            "training size {n_train} is below {SMALL_TRAINING_WARNING}; the generated range may be truncated"
        ));
    }
    Ok(AmplificationReport {
        n_train,
        n_generated: n_gen,
        gain: n_gen as f64 / n_train as f64,
        m_eff: m,
        verdict: Verdict::classify(m),
        m0: DEFAULT_M0,
        resolution_delta: h_nats.map(|h| h.exp() / (n_train as f64).sqrt()),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionModel;

    fn training(n: usize, seed: u64) -> (Sample, f64) {
        let m = DistributionModel::standard_normal();
        (m.sample(n, seed).unwrap(), m.differential_entropy())
    }

    #[test]
    fn gain_one_preserves_counts() {
        let (t, h) = training(2000, 1);
        let out = gencopy(&t, 1, h, 9).unwrap();
        assert_eq!(out.len(), 2000);
        assert_eq!(out.provenance(), Provenance::Generated);
        let hist = gencopy_binning(&t, h, 2.0).unwrap();
        let again = Histogram::build(&out, hist.delta(), hist.x_start()).unwrap();
        assert_eq!(&again.counts()[..hist.n_bins()], hist.counts());
    }

    #[test]
    fn counts_scale_exactly_with_gain() {
        let (t, h) = training(2000, 2);
        let out = gencopy(&t, 45, h, 3).unwrap();
        assert_eq!(out.len(), 90_000);
        let hist = gencopy_binning(&t, h, 2.0).unwrap();
        let lo = hist.x_start();
        let hi = lo + hist.n_bins() as f64 * hist.delta();
        let mut counts = vec![0u64; hist.n_bins()];
        for &x in out.values() {
            assert!(x >= lo && x < hi);
            counts[hist.bin_index(x).unwrap()] += 1;
        }
        for (c, t) in counts.iter().zip(hist.counts()) {
            assert_eq!(*c, 45 * t);
        }
    }

    #[test]
    fn gencopy_is_deterministic() {
        let (t, h) = training(500, 4);
        assert_eq!(gencopy(&t, 7, h, 11).unwrap(), gencopy(&t, 7, h, 11).unwrap());
        assert_ne!(gencopy(&t, 7, h, 11).unwrap(), gencopy(&t, 7, h, 12).unwrap());
    }

    #[test]
    fn gencopy_errors() {
        let (t, h) = training(100, 5);
        assert!(matches!(gencopy(&t, 0, h, 1), Err(Error::Domain(_))));
        let one = Sample::ingested(vec![1.0]).unwrap();
        assert!(gencopy(&one, 2, h, 1).is_err());
    }

    #[test]
    fn entropy_is_conserved() {
        let (t, h) = training(2000, 6);
        let hist = gencopy_binning(&t, h, 2.0).unwrap();
        let out = gencopy(&t, 13, h, 7).unwrap();
        let amp = Histogram::build(&out, hist.delta(), hist.x_start()).unwrap();
        let h_train = hist.shannon_entropy().unwrap();
        assert!((amp.shannon_entropy().unwrap() - h_train).abs() < 1e-9);
    }

    #[test]
    fn m_eff_examples() {
        assert!((m_eff(1000, 50_000).unwrap() - 3.13).abs() < 0.005);
        assert_eq!(m_eff(777, 777).unwrap(), 2.0);
        assert!((m_eff(2000, 90_000).unwrap() - 3.0).abs() < 0.005);
        assert!(m_eff(1, 5).is_err());
        assert!(m_eff(10, 5).is_err());
    }

    #[test]
    fn max_gain_examples() {
        assert_eq!(max_gain(2000, 3.0, 2.0).unwrap(), 45);
        assert_eq!(max_gain(2000, 2.5, 2.0).unwrap(), 7);
        assert_eq!(max_gain(500, 3.0, 2.0).unwrap(), 22);
        assert!(max_gain(500, 1.5, 2.0).is_err());
        for n in [500, 2000, 100_000] {
            let g = max_gain(n, 3.0, 2.0).unwrap();
            assert!((m_eff(n, g * n).unwrap() - 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn listed_scan_gains() {
        let gains: Vec<usize> = [2.0, 2.5, 3.0, 3.5, 4.0]
            .iter()
            .map(|&m| gain_for_m_eff(2000, m).unwrap())
            .collect();
        assert_eq!(gains, vec![1, 7, 45, 299, 2000]);
    }

    #[test]
    fn chain_examples() {
        assert_eq!(chain_m_eff(2.0, 3.7).unwrap(), 3.7);
        assert!((chain_m_eff(2.446, 3.0).unwrap() - 2.453).abs() < 0.0005);
        assert_eq!(chain_bound(3.0).unwrap(), 2.0);
        assert_eq!(chain_bound(2.0).unwrap(), 3.0);
        assert!(matches!(chain_m_eff(3.0, 2.5), Err(Error::Domain(_))));
        assert!(chain_m_eff(1.5, 2.5).is_err());
    }

    #[test]
    fn audit_examples() {
        let r = audit(1000, 50_000, None).unwrap();
        assert_eq!(r.verdict, Verdict::Exceeds);
        assert!((r.m_eff - 3.13).abs() < 0.005);
        assert_eq!(r.gain, 50.0);
        assert_eq!(audit(100, 1000, None).unwrap().verdict, Verdict::AtBound);
        let w = audit(2000, 2000, Some(1.0)).unwrap();
        assert_eq!(w.verdict, Verdict::Within);
        assert_eq!(w.m_eff, 2.0);
        assert!((w.resolution_delta.unwrap() - 1f64.exp() / 2000f64.sqrt()).abs() < 1e-15);
        assert!(w.warnings.is_empty());
        assert_eq!(audit(100, 1000, None).unwrap().warnings.len(), 1);
    }
}
