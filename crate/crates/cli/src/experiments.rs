//! Experiment drivers: amplification scans, error-model checks, cost
//! scans, Table-1 style fits, shape-factor tables and audits.
//!
//! Every driver is a pure function of its inputs and seed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ampbound_core::amplifier::{audit, gencopy, m_eff};
use ampbound_core::cost::{cost_scan, default_grid};
use ampbound_core::histfit::amplitude_fit;
use ampbound_core::histogram::bin_width;
use ampbound_core::knn::{
    averaged_kld, entropy_variance_bracket, kld_variance_with, knn_entropy, knn_kld, plugin_var_log_density,
    AveragingOptions, KldDirection, VarLogDensity,
};
use ampbound_core::renyi::estimate_f;
use ampbound_core::rng::derive_seed;
use ampbound_core::transforms::{mapped_amplify, TRANSFORMED_ENTROPY_K};
use ampbound_core::{AmplificationReport, CostScan, DistributionModel, FitResult, Histogram, Sample, Transform};
use serde::Serialize;

use crate::config::GridSpec;
use crate::io::{ingest_sample, IngestError};

pub type DriverResult<T> = Result<T, ampbound_core::Error>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplifier {
    GenCopy,
    Mapped(Transform),
}

/// One amplification scan: training data, amplifier and grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSetup {
    pub variant: String,
    pub model: DistributionModel,
    /// Size of the raw training sample.
    pub n_raw: usize,
    /// Gain applied to the raw sample before the scan.
    pub preamp_gain: Option<usize>,
    pub amplifier: Amplifier,
    pub grid: GridSpec,
    pub k: Vec<usize>,
    pub n_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KldRow {
    pub variant: String,
    pub m_eff: f64,
    pub gain: usize,
    pub k: usize,
    pub n_iter: usize,
    pub kld_nats: f64,
    pub predicted_sd_nats: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointError {
    pub variant: String,
    pub gain: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KldSeries {
    pub rows: Vec<KldRow>,
    pub errors: Vec<PointError>,
}

impl KldSeries {
    pub fn extend(&mut self, other: KldSeries) {
        self.rows.extend(other.rows);
        self.errors.extend(other.errors);
    }
}

/// Differential entropy of `model` after `transform`, in closed form for
/// the log map of a lognormal and by kNN estimate from `training`
/// otherwise.
pub fn transformed_entropy(model: &DistributionModel, transform: Transform, training: &Sample) -> DriverResult<f64> {
    match (model, transform) {
        (DistributionModel::LogNormal { mu, sigma }, Transform::Log | Transform::BoxCox(0.0)) => {
            Ok(DistributionModel::normal(*mu, *sigma)?.differential_entropy())
        }
        (_, Transform::Identity) => Ok(model.differential_entropy()),
        _ => knn_entropy(&transform.forward(training)?, TRANSFORMED_ENTROPY_K),
    }
}

/// Training sample for one scan run.
pub fn scan_training(setup: &ScanSetup, seed: u64) -> DriverResult<Sample> {
    let raw = setup.model.sample(setup.n_raw, derive_seed(seed, 0))?;
    match setup.preamp_gain {
        Some(g) => gencopy(&raw, g, setup.model.differential_entropy(), derive_seed(seed, 1)),
        None => Ok(raw),
    }
}

/// KLD from a fresh reference sample of size `G n` to the amplified
/// sample, for every gain in the grid. The training sample is fixed for
/// the run; iterations regenerate both the amplified and the reference
/// samples. Failed grid points are reported, not fatal.
pub fn kld_scan(setup: &ScanSetup, seed: u64) -> DriverResult<KldSeries> {
    let training = scan_training(setup, seed)?;
    let n = training.len();
    let h_amp = match setup.amplifier {
        Amplifier::GenCopy => setup.model.differential_entropy(),
        Amplifier::Mapped(t) => transformed_entropy(&setup.model, t, &training)?,
    };
    let gains = setup
        .grid
        .gains(n)
        .map_err(ampbound_core::Error::InvalidParameter)?;
    let var_log_p = VarLogDensity::Model(setup.model.var_log_density());
    let mut series = KldSeries::default();
    for gain in gains {
        let amplify = |s: u64| match setup.amplifier {
            Amplifier::GenCopy => gencopy(&training, gain, h_amp, s),
            Amplifier::Mapped(t) => mapped_amplify(&training, t, gain, s, Some(h_amp)),
        };
        let reference = |s: u64| setup.model.sample(gain * n, s);
        let point_seed = derive_seed(derive_seed(seed, 2), gain as u64);
        let m = m_eff(n, gain * n)?;
        for &k in &setup.k {
            let opts = AveragingOptions {
                k,
                n_iterations: setup.n_iterations,
                seed: point_seed,
                direction: KldDirection::Forward,
                variance_n: Some(n),
                var_log_density: var_log_p,
            };
            match averaged_kld(reference, amplify, &opts) {
                Ok(est) => {
                    let bracket = entropy_variance_bracket(var_log_p.value(), k);
                    let row = |n_iter: usize, value: f64| -> DriverResult<KldRow> {
                        Ok(KldRow {
                            variant: setup.variant.clone(),
                            m_eff: m,
                            gain,
                            k,
                            n_iter,
                            kld_nats: value,
                            predicted_sd_nats: kld_variance_with(n, n_iter, 0.0, bracket)?.sqrt(),
                            seed,
                        })
                    };
                    series.rows.push(row(1, est.iterations[0])?);
                    if setup.n_iterations > 1 {
                        series.rows.push(row(est.iterations.len(), est.value_nats)?);
                    }
                }
                Err(e) => series.errors.push(PointError {
                    variant: setup.variant.clone(),
                    gain,
                    seed,
                    message: e.to_string(),
                }),
            }
        }
    }
    Ok(series)
}

/// Runs a scan for each seed in turn.
pub fn kld_scan_ensemble(setup: &ScanSetup, seeds: &[u64]) -> DriverResult<KldSeries> {
    let mut all = KldSeries::default();
    for &s in seeds {
        all.extend(kld_scan(setup, s)?);
    }
    Ok(all)
}

/// Seeds of an ensemble derived from a master seed.
pub fn ensemble_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| derive_seed(master, 1000 + i)).collect()
}

/// Ensemble summary of one `(variant, k, n_iter)` slice, per gain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub m_eff: f64,
    pub gain: usize,
    pub runs: usize,
    pub mean_kld_nats: f64,
    /// Spread of single-run values across the ensemble (NaN for one run).
    pub empirical_sd_nats: f64,
    pub predicted_sd_nats: f64,
}

pub fn summarize(rows: &[KldRow], variant: &str, k: usize, n_iter: usize) -> Vec<PointSummary> {
    let mut by_gain: BTreeMap<usize, Vec<&KldRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.variant == variant && r.k == k && r.n_iter == n_iter) {
        by_gain.entry(r.gain).or_default().push(r);
    }
    by_gain
        .into_iter()
        .map(|(gain, rs)| {
            let n = rs.len() as f64;
            let mean = rs.iter().map(|r| r.kld_nats).sum::<f64>() / n;
            let var = rs.iter().map(|r| (r.kld_nats - mean).powi(2)).sum::<f64>() / (n - 1.0);
            PointSummary {
                m_eff: rs[0].m_eff,
                gain,
                runs: rs.len(),
                mean_kld_nats: mean,
                empirical_sd_nats: if rs.len() > 1 { var.sqrt() } else { f64::NAN },
                predicted_sd_nats: rs[0].predicted_sd_nats,
            }
        })
        .collect()
}

/// Smallest `M_eff` whose ensemble-mean KLD exceeds `sigmas` predicted
/// standard deviations; `None` if no grid point does.
pub fn knee(summary: &[PointSummary], sigmas: f64) -> Option<f64> {
    summary
        .iter()
        .find(|p| p.mean_kld_nats > sigmas * p.predicted_sd_nats)
        .map(|p| p.m_eff)
}

/// Least-squares slope of `y` on `x` and its standard error from the
/// residuals.
pub fn slope_with_error(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some((slope, (rss / (nf - 2.0) / sxx).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorModelRow {
    pub n_iter: usize,
    pub repeats: usize,
    pub mean_kld_nats: f64,
    pub empirical_sd_nats: f64,
    pub predicted_sd_nats: f64,
}

/// Spread of the averaged KLD at unit gain over independent training
/// samples, against the variance model, for each averaging depth.
pub fn error_model(
    model: &DistributionModel,
    n: usize,
    n_iters: &[usize],
    repeats: usize,
    k: usize,
    seed: u64,
) -> DriverResult<Vec<ErrorModelRow>> {
    let depth = n_iters.iter().copied().max().unwrap_or(1);
    let h = model.differential_entropy();
    let var_log_p = model.var_log_density();
    let mut per_repeat: Vec<Vec<f64>> = Vec::with_capacity(repeats);
    for r in 0..repeats as u64 {
        let run = derive_seed(seed, r);
        let training = model.sample(n, derive_seed(run, 0))?;
        let opts = AveragingOptions {
            k,
            n_iterations: depth,
            seed: derive_seed(run, 2),
            direction: KldDirection::Forward,
            variance_n: Some(n),
            var_log_density: VarLogDensity::Model(var_log_p),
        };
        let est = averaged_kld(|s| model.sample(n, s), |s| gencopy(&training, 1, h, s), &opts)?;
        per_repeat.push(est.iterations);
    }
    let bracket = entropy_variance_bracket(var_log_p, k);
    n_iters
        .iter()
        .map(|&ni| {
            let vals: Vec<f64> = per_repeat
                .iter()
                .map(|it| it[..ni.min(it.len())].iter().sum::<f64>() / ni.min(it.len()) as f64)
                .collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() as f64 - 1.0);
            Ok(ErrorModelRow {
                n_iter: ni,
                repeats,
                mean_kld_nats: m,
                empirical_sd_nats: var.sqrt(),
                predicted_sd_nats: kld_variance_with(n, ni, 0.0, bracket)?.sqrt(),
            })
        })
        .collect()
}

/// Cost scans over the default grid, one sample per model.
pub fn cost_experiment(models: &[DistributionModel], n: usize, seed: u64) -> DriverResult<Vec<CostScan>> {
    models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let s = m.sample(n, derive_seed(seed, i as u64))?;
            cost_scan(&s, m.differential_entropy(), &default_grid())
        })
        .collect()
}

/// The four shapes of the cost comparison, in order of increasing cost.
pub fn cost_models() -> Vec<DistributionModel> {
    vec![
        DistributionModel::uniform(0.0, 1.0).expect("valid"),
        DistributionModel::standard_normal(),
        DistributionModel::moyal(),
        DistributionModel::standard_lognormal(),
    ]
}

/// Geometry of the Table-1 histograms: 0.1-wide bins over `[0, 40]`.
pub const FIT_BIN_WIDTH: f64 = 0.1;
pub const FIT_RANGE: (f64, f64) = (0.0, 40.0);
pub const FIT_NARROW_RANGE: (f64, f64) = (0.0, 20.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub label: String,
    pub gain: usize,
    pub n: usize,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitTableOutput {
    pub rows: Vec<FitRow>,
    /// Histograms over [`FIT_RANGE`]: full simulation, GenCopy, mapped.
    pub histograms: Vec<(String, Histogram)>,
}

/// Fits a lognormal shape, amplitude only, to a full simulation of
/// `gain * n_train` events and to GenCopy and log-mapped amplifications of
/// `n_train` events.
pub fn fit_table(n_train: usize, gain: usize, seed: u64) -> DriverResult<FitTableOutput> {
    let model = DistributionModel::standard_lognormal();
    let n_bins = ((FIT_RANGE.1 - FIT_RANGE.0) / FIT_BIN_WIDTH).round() as usize;
    let full = model.sample(gain * n_train, derive_seed(seed, 0))?;
    let training = model.sample(n_train, derive_seed(seed, 1))?;
    let amplified = gencopy(&training, gain, model.differential_entropy(), derive_seed(seed, 2))?;
    let h_log = transformed_entropy(&model, Transform::Log, &training)?;
    let mapped = mapped_amplify(&training, Transform::Log, gain, derive_seed(seed, 3), Some(h_log))?;
    let mut rows = Vec::new();
    let mut histograms = Vec::new();
    for (label, g, n, sample, ranges) in [
        ("full", 1, gain * n_train, &full, vec![FIT_RANGE]),
        ("gencopy", gain, n_train, &amplified, vec![FIT_RANGE]),
        ("mapped", gain, n_train, &mapped, vec![FIT_RANGE, FIT_NARROW_RANGE]),
    ] {
        let hist = Histogram::over_range(sample, FIT_RANGE.0, FIT_BIN_WIDTH, n_bins)?;
        for range in ranges {
            rows.push(FitRow {
                label: label.to_string(),
                gain: g,
                n,
                fit: amplitude_fit(&hist, &model, range)?,
            });
        }
        histograms.push((label.to_string(), hist));
    }
    Ok(FitTableOutput { rows, histograms })
}

/// The five shapes of the shape-factor table.
pub fn table_a1_models() -> Vec<DistributionModel> {
    vec![
        DistributionModel::uniform(0.0, 1.0).expect("valid"),
        DistributionModel::standard_normal(),
        DistributionModel::exponential(1.0).expect("valid"),
        DistributionModel::moyal(),
        DistributionModel::standard_lognormal(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1Row {
    pub distribution: String,
    pub r1_minus_r2_model: f64,
    pub f_model: f64,
    pub s_model: f64,
    pub f_mu_data: f64,
    pub f_e_data: f64,
}

/// Model and data-side shape factors; data from `n` events binned at `m`.
pub fn table_a1(n: usize, m: f64, seed: u64) -> DriverResult<Vec<A1Row>> {
    table_a1_models()
        .iter()
        .enumerate()
        .map(|(i, model)| {
            let r1 = model.renyi_differential(1.0)?;
            let r2 = model.renyi_differential(2.0)?;
            let s = model.sample(n, derive_seed(seed, i as u64))?;
            let hist = Histogram::build_from_min(&s, bin_width(model.differential_entropy(), n, m)?)?;
            let (f_mu, f_e) = estimate_f(&hist, n, m)?;
            Ok(A1Row {
                distribution: model.to_string(),
                r1_minus_r2_model: r1 - r2,
                f_model: model.shape_f()?,
                s_model: model.song_s(),
                f_mu_data: f_mu,
                f_e_data: f_e,
            })
        })
        .collect()
}

/// A count given directly or read from a sample file.
#[derive(Debug, Clone, PartialEq)]
pub enum CountSource {
    Count(usize),
    File(PathBuf),
}

impl std::str::FromStr for CountSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(n) => Self::Count(n),
            Err(_) => Self::File(PathBuf::from(s)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditOutcome {
    #[serde(flatten)]
    pub report: AmplificationReport,
    /// `D(training || generated)` when both samples were supplied.
    pub kld_nats: Option<f64>,
    pub kld_sd_nats: Option<f64>,
    pub var_log_density: Option<VarLogDensity>,
}

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Core(#[from] ampbound_core::Error),
}

pub fn run_audit(train: &CountSource, generated: &CountSource, k: usize) -> Result<AuditOutcome, AuditError> {
    let load = |src: &CountSource| -> Result<(usize, Option<Sample>), IngestError> {
        match src {
            CountSource::Count(n) => Ok((*n, None)),
            CountSource::File(p) => {
                let s = ingest_sample(p)?;
                Ok((s.len(), Some(s)))
            }
        }
    };
    let (n_train, train_sample) = load(train)?;
    let (n_gen, gen_sample) = load(generated)?;
    let h = match &train_sample {
        Some(s) if s.len() > TRANSFORMED_ENTROPY_K => knn_entropy(s, TRANSFORMED_ENTROPY_K).ok(),
        _ => None,
    };
    let report = audit(n_train, n_gen, h)?;
    let (kld, sd, vlp) = match (&train_sample, &gen_sample) {
        (Some(t), Some(g)) => {
            let d = knn_kld(t, g, k)?;
            let v = plugin_var_log_density(t, k.max(TRANSFORMED_ENTROPY_K))?;
            let sd = kld_variance_with(t.len(), 1, 0.0, entropy_variance_bracket(v.value(), k))?.sqrt();
            (Some(d), Some(sd), Some(v))
        }
        _ => (None, None, None),
    };
    Ok(AuditOutcome {
        report,
        kld_nats: kld,
        kld_sd_nats: sd,
        var_log_density: vlp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReaxisRow {
    pub generated_events: f64,
    pub error: f64,
    pub m_eff: f64,
}

/// Re-expresses `(generated_events, error)` pairs against `M_eff` for a
/// generator trained on `n_train` events.
pub fn reaxis(text: &str, n_train: usize) -> Result<Vec<ReaxisRow>, IngestError> {
    if n_train < 2 {
        return Err(IngestError::Parse {
            line: 0,
            message: "training size must be >= 2".into(),
        });
    }
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.split('\n').enumerate() {
        let line = i + 1;
        let l = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = l.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(IngestError::Parse {
                line,
                message: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        if !header_seen {
            header_seen = true;
            if cols[0].parse::<f64>().is_err() {
                continue;
            }
        }
        let num = |c: &str| -> Result<f64, IngestError> {
            c.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::Parse {
                line,
                message: format!("`{c}` is not a finite number"),
            })
        };
        let g = num(cols[0])?;
        let e = num(cols[1])?;
        if !(g >= 1.0) {
            return Err(IngestError::Parse {
                line,
                message: "generated_events must be >= 1".into(),
            });
        }
        rows.push(ReaxisRow {
            generated_events: g,
            error: e,
            m_eff: 2.0 * g.ln() / (n_train as f64).ln(),
        });
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(rows)
}
