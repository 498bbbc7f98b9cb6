//! Command-line surface and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use ampbound_core::amplifier::gencopy;
use ampbound_core::cost::model_cost;
use ampbound_core::histogram::{bin_width, mu_entries_per_bin};
use ampbound_core::knn::knn_entropy;
use ampbound_core::transforms::{mapped_amplify, TRANSFORMED_ENTROPY_K};
use ampbound_core::{DistributionModel, Transform};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{short_hash, ExperimentConfig, ExperimentKind, GridSpec};
use crate::emit::{Cell, Plot, RunStamp, Series, Table};
use crate::experiments::{
    cost_experiment, cost_models, error_model, fit_table, kld_scan_ensemble, reaxis, run_audit, table_a1,
    Amplifier, CountSource, KldRow, KldSeries, ScanSetup,
};
use crate::io::{format_sample, ingest_sample};

const NATS_TO_BITS: f64 = std::f64::consts::LOG2_E;

#[derive(Debug, Parser)]
#[command(name = "ampbound", version, about = "Entropy-based binning, kNN divergences and amplification audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output directory; tables go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7b,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample from a model.
    Sample {
        #[arg(long, default_value = "normal(0,1)")]
        model: DistributionModel,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample file to write; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bin width for a target resolution, from a model or a sample file.
    Binwidth {
        #[arg(long, conflicts_with = "input")]
        model: Option<DistributionModel>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Sample size (defaults to the size of the input file).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2.5)]
        m: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Differential entropy in nats, closed form or kNN estimate.
    Entropy {
        #[arg(long, conflicts_with = "input")]
        model: Option<DistributionModel>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = TRANSFORMED_ENTROPY_K)]
        k: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Normalised binning cost over the default resolution grid.
    CostScan {
        #[arg(long, default_value = "normal(0,1)")]
        model: DistributionModel,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Amplify a sample file by GenCopy, optionally in a mapped space.
    Amplify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        gain: usize,
        #[arg(long)]
        transform: Option<Transform>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample file to write; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// KLD of amplified samples against fresh references over a gain grid.
    KldScan {
        #[arg(long, default_value = "normal(0,1)")]
        model: DistributionModel,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, conflicts_with = "gain")]
        meff_max: Option<f64>,
        /// Explicit gains, comma separated.
        #[arg(long, value_delimiter = ',')]
        gain: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        iters: usize,
        #[arg(long)]
        transform: Option<Transform>,
        /// Pre-amplify the training sample by this gain first.
        #[arg(long)]
        preamp: Option<usize>,
        /// Number of independent training samples.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Amplitude fits of full, GenCopy and mapped lognormal histograms.
    FitTable {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 45)]
        gain: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Rényi shape factors, model and data side.
    TableA1 {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 2.5)]
        m: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Effective resolution of a generated sample against its training set.
    Audit {
        /// Training sample file or event count.
        #[arg(long)]
        train: CountSource,
        /// Generated sample file or event count.
        #[arg(long)]
        generated: CountSource,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a figure's data and plot.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Reduced grids and repeats.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Input table for fig7b: generated_events,error.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        n_train: Option<usize>,
    },
    /// Run an experiment config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

/// Where and how tables and plots are written.
pub struct Emitter {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub stamp: RunStamp,
}

impl Emitter {
    fn new(output: &Output, stamp: RunStamp) -> Self {
        Self {
            out: output.out.clone(),
            format: output.format,
            stamp,
        }
    }

    fn render(&self, table: &Table) -> String {
        match self.format {
            Format::Csv => table.to_csv(&self.stamp),
            Format::Json => {
                let doc = serde_json::json!({
                    "header": self.stamp.header().trim_start_matches("# "),
                    "rows": table.to_json(),
                });
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
            }
        }
    }

    pub fn table(&self, name: &str, table: &Table) -> Result<()> {
        let text = self.render(table);
        match &self.out {
            Some(dir) => {
                let ext = if self.format == Format::Csv { "csv" } else { "json" };
                write_file(&dir.join(format!("{name}.{ext}")), &text)
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Plots are only written when an output directory is set.
    pub fn plot(&self, name: &str, plot: &Plot) -> Result<()> {
        match &self.out {
            Some(dir) => write_file(&dir.join(format!("{name}.svg")), &plot.to_svg()),
            None => Ok(()),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Number of grid points that failed; the process exits nonzero when
/// this is positive.
pub type FailedPoints = usize;

pub fn run(cli: Cli) -> Result<FailedPoints> {
    match cli.command {
        Command::Sample { model, n, seed, out } => {
            let s = model.sample(n, seed)?;
            let header = format!("# ampbound {} model={model} n={n} seed={seed}", env!("CARGO_PKG_VERSION"));
            write_or_print(&out, &format_sample(s.values(), Some(&header)))?;
            Ok(0)
        }
        Command::Binwidth { model, input, n, m, output } => {
            let (h, n, source) = entropy_source(model, input, TRANSFORMED_ENTROPY_K, n)?;
            let n = n.context("--n is required with --model")?;
            let mut t = Table::new(&["source", "n", "m", "h_nats", "delta", "mu_entries_per_bin"]);
            t.push(vec![
                source.as_str().into(),
                n.into(),
                m.into(),
                h.into(),
                bin_width(h, n, m)?.into(),
                mu_entries_per_bin(n, m)?.into(),
            ]);
            let stamp = RunStamp {
                config_hash: short_hash(&format!("binwidth;{source};n={n};m={m}")),
                seed: 0,
            };
            Emitter::new(&output, stamp).table("binwidth", &t)?;
            Ok(0)
        }
        Command::Entropy { model, input, k, output } => {
            let (h, n, source) = entropy_source(model, input, k, None)?;
            let mut t = Table::new(&["source", "n", "k", "h_nats", "h_bits"]);
            let n = n.map(Cell::from).unwrap_or_else(|| "".into());
            t.push(vec![source.as_str().into(), n, k.into(), h.into(), (h * NATS_TO_BITS).into()]);
            let stamp = RunStamp {
                config_hash: short_hash(&format!("entropy;{source};k={k}")),
                seed: 0,
            };
            Emitter::new(&output, stamp).table("entropy", &t)?;
            Ok(0)
        }
        Command::CostScan { model, n, seed, output } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::CostScan);
            cfg.model = model;
            cfg.n_train = n;
            cfg.seed = seed;
            execute(&cfg, &output)
        }
        Command::Amplify {
            input,
            gain,
            transform,
            seed,
            out,
        } => {
            let training = ingest_sample(&input)?;
            let generated = match transform {
                None | Some(Transform::Identity) => {
                    let h = knn_entropy(&training, TRANSFORMED_ENTROPY_K)?;
                    gencopy(&training, gain, h, seed)?
                }
                Some(t) => mapped_amplify(&training, t, gain, seed, None)?,
            };
            let header = format!(
                "# ampbound {} gencopy gain={gain} transform={} seed={seed}",
                env!("CARGO_PKG_VERSION"),
                transform.map(|t| t.to_string()).unwrap_or_else(|| "none".into())
            );
            write_or_print(&out, &format_sample(generated.values(), Some(&header)))?;
            Ok(0)
        }
        Command::KldScan {
            model,
            n,
            meff_max,
            gain,
            k,
            iters,
            transform,
            preamp,
            seeds,
            seed,
            output,
        } => {
            let mut cfg = ExperimentConfig::new(if preamp.is_some() {
                ExperimentKind::PreampScan
            } else {
                ExperimentKind::KldScan
            });
            cfg.model = model;
            cfg.n_train = n;
            cfg.grid = if gain.is_empty() {
                GridSpec::Default {
                    meff_max: meff_max.unwrap_or(4.0),
                }
            } else {
                GridSpec::Gains(gain)
            };
            cfg.k = k;
            cfg.n_iterations = iters;
            cfg.transform = transform;
            if let Some(g) = preamp {
                cfg.preamp_gain = g;
            }
            cfg.seeds = seeds;
            cfg.seed = seed;
            cfg.validate()?;
            execute(&cfg, &output)
        }
        Command::FitTable { n, gain, seed, output } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::FitTable);
            cfg.model = DistributionModel::standard_lognormal();
            cfg.n_train = n;
            cfg.gain = gain;
            cfg.seed = seed;
            execute(&cfg, &output)
        }
        Command::TableA1 { n, m, seed, output } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::TableA1);
            cfg.n_train = n;
            cfg.m = m;
            cfg.seed = seed;
            execute(&cfg, &output)
        }
        Command::Audit { train, generated, k, out } => {
            let outcome = run_audit(&train, &generated, k)?;
            let text = format!("{}\n", serde_json::to_string_pretty(&outcome)?);
            write_or_print(&out, &text)?;
            Ok(0)
        }
        Command::Reproduce {
            figure,
            quick,
            seed,
            out,
            format,
            input,
            n_train,
        } => reproduce(figure, quick, seed, &Output { out: Some(out), format }, input, n_train),
        Command::Run { config, output } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg: ExperimentConfig = text.parse().with_context(|| config.display().to_string())?;
            let output = Output {
                out: output.out.or_else(|| Some(cfg.out_dir.clone())),
                format: output.format,
            };
            execute(&cfg, &output)
        }
    }
}

fn entropy_source(
    model: Option<DistributionModel>,
    input: Option<PathBuf>,
    k: usize,
    n: Option<usize>,
) -> Result<(f64, Option<usize>, String)> {
    match (model, input) {
        (Some(m), None) => Ok((m.differential_entropy(), n, m.to_string())),
        (None, Some(path)) => {
            let s = ingest_sample(&path)?;
            let h = knn_entropy(&s, k)?;
            Ok((h, Some(n.unwrap_or(s.len())), path.display().to_string()))
        }
        _ => bail!("give exactly one of --model or --input"),
    }
}

/// Runs a validated config and writes its outputs.
pub fn execute(cfg: &ExperimentConfig, output: &Output) -> Result<FailedPoints> {
    let em = Emitter::new(
        output,
        RunStamp {
            config_hash: cfg.hash(),
            seed: cfg.seed,
        },
    );
    match cfg.experiment {
        ExperimentKind::CostScan => {
            let scans = cost_experiment(std::slice::from_ref(&cfg.model), cfg.n_train, cfg.seed)?;
            let (t, _) = cost_tables(&[cfg.model], &scans)?;
            em.table("cost_scan", &t)?;
            em.plot("cost_scan", &cost_plot(&[cfg.model], &scans))?;
            Ok(0)
        }
        ExperimentKind::KldScan | ExperimentKind::PreampScan => {
            let setup = scan_setup(cfg);
            let seeds = if cfg.seeds == 1 {
                vec![cfg.seed]
            } else {
                crate::experiments::ensemble_seeds(cfg.seed, cfg.seeds)
            };
            let series = kld_scan_ensemble(&setup, &seeds)?;
            em.table("kld_scan", &kld_table(&series.rows))?;
            em.plot("kld_scan", &kld_plot("KLD against effective resolution", &series.rows, false))?;
            Ok(report_errors(&series))
        }
        ExperimentKind::FitTable => {
            let out = fit_table(cfg.n_train, cfg.gain, cfg.seed)?;
            em.table("fit_table", &fit_rows_table(&out.rows))?;
            em.table("fit_histograms", &fit_hist_table(&out.histograms))?;
            Ok(0)
        }
        ExperimentKind::TableA1 => {
            em.table("table_a1", &a1_table(&table_a1(cfg.n_train, cfg.m, cfg.seed)?))?;
            Ok(0)
        }
        ExperimentKind::Audit => {
            let train: CountSource = cfg.audit_train.as_deref().unwrap_or_default().parse()?;
            let generated: CountSource = cfg.audit_generated.as_deref().unwrap_or_default().parse()?;
            let outcome = run_audit(&train, &generated, cfg.k[0])?;
            let text = format!("{}\n", serde_json::to_string_pretty(&outcome)?);
            match &output.out {
                Some(dir) => write_file(&dir.join("audit.json"), &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn scan_setup(cfg: &ExperimentConfig) -> ScanSetup {
    let amplifier = match cfg.transform {
        None | Some(Transform::Identity) => Amplifier::GenCopy,
        Some(t) => Amplifier::Mapped(t),
    };
    let variant = match amplifier {
        Amplifier::GenCopy => cfg.model.name().to_string(),
        Amplifier::Mapped(t) => format!("{}+{t}", cfg.model.name()),
    };
    let preamp = cfg.experiment == ExperimentKind::PreampScan;
    ScanSetup {
        variant: if preamp { format!("{variant}-preamp") } else { variant },
        model: cfg.model,
        n_raw: cfg.n_train,
        preamp_gain: preamp.then_some(cfg.preamp_gain),
        amplifier,
        grid: cfg.grid.clone(),
        k: cfg.k.clone(),
        n_iterations: cfg.n_iterations,
    }
}

fn report_errors(series: &KldSeries) -> FailedPoints {
    for e in &series.errors {
        eprintln!("grid point {} gain {} seed {}: {}", e.variant, e.gain, e.seed, e.message);
    }
    series.errors.len()
}

pub fn kld_table(rows: &[KldRow]) -> Table {
    let mut t = Table::new(&[
        "variant",
        "m_eff",
        "gain",
        "k",
        "n_iter",
        "kld_nats",
        "kld_bits",
        "predicted_sd_nats",
        "predicted_sd_bits",
        "seed",
    ]);
    for r in rows {
        t.push(vec![
            r.variant.as_str().into(),
            r.m_eff.into(),
            r.gain.into(),
            r.k.into(),
            r.n_iter.into(),
            r.kld_nats.into(),
            (r.kld_nats * NATS_TO_BITS).into(),
            r.predicted_sd_nats.into(),
            (r.predicted_sd_nats * NATS_TO_BITS).into(),
            r.seed.into(),
        ]);
    }
    t
}

/// One series per `(variant, k, n_iter)`, averaged over seeds, with the
/// predicted sd as error bars. With `by_gain` the x axis is the gain.
pub fn kld_plot(title: &str, rows: &[KldRow], by_gain: bool) -> Plot {
    let mut keys: Vec<(String, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.variant.clone(), r.k, r.n_iter);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let series = keys
        .into_iter()
        .map(|(variant, k, n_iter)| {
            let summary = crate::experiments::summarize(rows, &variant, k, n_iter);
            Series {
                name: format!("{variant} k={k} N_I={n_iter}"),
                points: summary
                    .iter()
                    .map(|p| (if by_gain { p.gain as f64 } else { p.m_eff }, p.mean_kld_nats * NATS_TO_BITS))
                    .collect(),
                errors: Some(summary.iter().map(|p| p.predicted_sd_nats * NATS_TO_BITS).collect()),
            }
        })
        .collect();
    Plot {
        title: title.into(),
        x_label: if by_gain { "gain G" } else { "M_eff" }.into(),
        y_label: "KLD (bits)".into(),
        log_x: by_gain,
        series,
    }
}

fn cost_tables(models: &[DistributionModel], scans: &[ampbound_core::CostScan]) -> Result<(Table, Table)> {
    let mut t = Table::new(&["model", "M", "delta", "n_bins", "raw", "normalized", "model_cnr_at_fitted_a"]);
    let mut fits = Table::new(&["model", "n", "fitted_a", "theoretical_a", "degenerate_normalization"]);
    for (model, scan) in models.iter().zip(scans) {
        for p in &scan.points {
            let model_c = match scan.fitted_a {
                Some(a) => model_cost(scan.n, p.m, a)?,
                None => f64::NAN,
            };
            t.push(vec![
                model.to_string().into(),
                p.m.into(),
                p.delta.into(),
                p.n_bins.into(),
                p.raw_cost.into(),
                p.normalized_cost.into(),
                model_c.into(),
            ]);
        }
        fits.push(vec![
            model.to_string().into(),
            scan.n.into(),
            scan.fitted_a.unwrap_or(f64::NAN).into(),
            model.theoretical_a().unwrap_or(f64::NAN).into(),
            (scan.degenerate_normalization as usize).into(),
        ]);
    }
    Ok((t, fits))
}

fn cost_plot(models: &[DistributionModel], scans: &[ampbound_core::CostScan]) -> Plot {
    Plot {
        title: "Normalised binning cost".into(),
        x_label: "M".into(),
        y_label: "normalised cost".into(),
        log_x: false,
        series: models
            .iter()
            .zip(scans)
            .map(|(m, s)| Series {
                name: m.to_string(),
                points: s.points.iter().map(|p| (p.m, p.normalized_cost)).collect(),
                errors: None,
            })
            .collect(),
    }
}

fn fit_rows_table(rows: &[crate::experiments::FitRow]) -> Table {
    let mut t = Table::new(&[
        "dataset",
        "gain",
        "n",
        "range_lo",
        "range_hi",
        "n_bins",
        "amplitude",
        "amplitude_error",
        "chi2",
        "dof",
        "chi2_per_dof",
    ]);
    for r in rows {
        t.push(vec![
            r.label.as_str().into(),
            r.gain.into(),
            r.n.into(),
            r.fit.range.0.into(),
            r.fit.range.1.into(),
            r.fit.n_bins.into(),
            r.fit.amplitude.into(),
            r.fit.amplitude_error.into(),
            r.fit.chi2.into(),
            r.fit.dof.into(),
            r.fit.chi2_per_dof().into(),
        ]);
    }
    t
}

fn fit_hist_table(hists: &[(String, ampbound_core::Histogram)]) -> Table {
    let mut cols = vec!["bin_left", "bin_right"];
    cols.extend(hists.iter().map(|(l, _)| l.as_str()));
    let mut t = Table::new(&cols);
    if let Some((_, first)) = hists.first() {
        for b in 0..first.n_bins() {
            let mut row: Vec<Cell> = vec![first.left_edge(b).into(), first.right_edge(b).into()];
            row.extend(hists.iter().map(|(_, h)| Cell::from(h.counts()[b])));
            t.push(row);
        }
    }
    t
}

fn a1_table(rows: &[crate::experiments::A1Row]) -> Table {
    let mut t = Table::new(&["distribution", "r1_minus_r2_model", "F_model", "S_model", "F_mu_data", "F_E_data"]);
    for r in rows {
        t.push(vec![
            r.distribution.as_str().into(),
            r.r1_minus_r2_model.into(),
            r.f_model.into(),
            r.s_model.into(),
            r.f_mu_data.into(),
            r.f_e_data.into(),
        ]);
    }
    t
}

/// Grid and averaging depth of the figure scans.
fn figure_scan(quick: bool) -> (GridSpec, usize) {
    if quick {
        (GridSpec::MEff(vec![2.0, 2.5, 3.0]), 2)
    } else {
        (GridSpec::Default { meff_max: 4.0 }, 16)
    }
}

fn reproduce(
    figure: Figure,
    quick: bool,
    seed: u64,
    output: &Output,
    input: Option<PathBuf>,
    n_train: Option<usize>,
) -> Result<FailedPoints> {
    let name = format!("{figure:?}").to_lowercase();
    let canonical = format!("reproduce={name};quick={quick};n_train={n_train:?}");
    let em = Emitter::new(
        output,
        RunStamp {
            config_hash: short_hash(&canonical),
            seed,
        },
    );
    let (grid, n_iter) = figure_scan(quick);
    let normal = DistributionModel::standard_normal();
    let lognormal = DistributionModel::standard_lognormal();
    let scan = |variant: &str, model, n_raw, preamp_gain, amplifier, k: Vec<usize>| ScanSetup {
        variant: variant.into(),
        model,
        n_raw,
        preamp_gain,
        amplifier,
        grid: grid.clone(),
        k,
        n_iterations: n_iter,
    };
    match figure {
        Figure::Fig1 => {
            let models = cost_models();
            let scans = cost_experiment(&models, if quick { 2000 } else { 10_000 }, seed)?;
            let (t, fits) = cost_tables(&models, &scans)?;
            em.table("fig1_cost", &t)?;
            em.table("fig1_fits", &fits)?;
            em.plot("fig1", &cost_plot(&models, &scans))?;
            Ok(0)
        }
        Figure::Fig3 => {
            let series = kld_scan_ensemble(&scan("normal", normal, 2000, None, Amplifier::GenCopy, vec![1, 4]), &[seed])?;
            em.table("fig3a", &kld_table(&series.rows))?;
            em.plot("fig3a", &kld_plot("Normal: KLD against M_eff", &series.rows, false))?;
            let (depths, repeats): (&[usize], usize) = if quick { (&[1, 2], 5) } else { (&[1, 2, 4, 8, 16], 100) };
            let rows = error_model(&normal, 2000, depths, repeats, 1, seed)?;
            let mut t = Table::new(&["n_iter", "repeats", "mean_kld_nats", "empirical_sd_nats", "predicted_sd_nats"]);
            for r in &rows {
                t.push(vec![
                    r.n_iter.into(),
                    r.repeats.into(),
                    r.mean_kld_nats.into(),
                    r.empirical_sd_nats.into(),
                    r.predicted_sd_nats.into(),
                ]);
            }
            em.table("fig3b", &t)?;
            let line = |name: &str, f: fn(&crate::experiments::ErrorModelRow) -> f64| Series {
                name: name.into(),
                points: rows.iter().map(|r| (r.n_iter as f64, f(r))).collect(),
                errors: None,
            };
            em.plot(
                "fig3b",
                &Plot {
                    title: "KLD error against averaging depth".into(),
                    x_label: "N_I".into(),
                    y_label: "sd (nats)".into(),
                    log_x: true,
                    series: vec![line("empirical", |r| r.empirical_sd_nats), line("predicted", |r| r.predicted_sd_nats)],
                },
            )?;
            Ok(report_errors(&series))
        }
        Figure::Fig4 => {
            let mut series = kld_scan_ensemble(
                &scan("lognormal", lognormal, 2000, None, Amplifier::GenCopy, vec![1]),
                &[seed],
            )?;
            series.extend(kld_scan_ensemble(
                &scan("lognormal+log", lognormal, 2000, None, Amplifier::Mapped(Transform::Log), vec![1]),
                &[seed],
            )?);
            em.table("fig4", &kld_table(&series.rows))?;
            em.plot("fig4a", &kld_plot("Lognormal: unmapped and mapped", &series.rows, false))?;
            em.plot("fig4b", &kld_plot("Lognormal: unmapped and mapped", &series.rows, true))?;
            Ok(report_errors(&series))
        }
        Figure::Fig5 => {
            let mut series = kld_scan_ensemble(
                &scan("preamp", normal, 500, Some(4), Amplifier::GenCopy, vec![1]),
                &[seed],
            )?;
            series.extend(kld_scan_ensemble(
                &scan("control", normal, 2000, None, Amplifier::GenCopy, vec![1]),
                &[seed],
            )?);
            em.table("fig5", &kld_table(&series.rows))?;
            em.plot("fig5", &kld_plot("Pre-amplified training against control", &series.rows, false))?;
            Ok(report_errors(&series))
        }
        Figure::Fig6 => {
            let out = fit_table(2000, 45, seed)?;
            em.table("table1", &fit_rows_table(&out.rows))?;
            let hist = fit_hist_table(&out.histograms);
            em.table("fig6_hist", &hist)?;
            let series = out
                .histograms
                .iter()
                .map(|(label, h)| Series {
                    name: label.clone(),
                    points: (0..h.n_bins())
                        .map(|b| (0.5 * (h.left_edge(b) + h.right_edge(b)), h.counts()[b] as f64))
                        .collect(),
                    errors: None,
                })
                .collect();
            em.plot(
                "fig6",
                &Plot {
                    title: "Lognormal histograms".into(),
                    x_label: "x".into(),
                    y_label: "entries per bin".into(),
                    log_x: false,
                    series,
                },
            )?;
            Ok(0)
        }
        Figure::Fig7b => {
            let path = input.context("fig7b needs --input with generated_events,error rows")?;
            let n_train = n_train.context("fig7b needs --n-train")?;
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let rows = reaxis(&text, n_train).with_context(|| path.display().to_string())?;
            let mut t = Table::new(&["generated_events", "error", "m_eff"]);
            for r in &rows {
                t.push(vec![r.generated_events.into(), r.error.into(), r.m_eff.into()]);
            }
            em.table("fig7b", &t)?;
            em.plot(
                "fig7b",
                &Plot {
                    title: format!("Error against M_eff, n_train = {n_train}"),
                    x_label: "M_eff".into(),
                    y_label: "error".into(),
                    log_x: false,
                    series: vec![Series {
                        name: "input".into(),
                        points: rows.iter().map(|r| (r.m_eff, r.error)).collect(),
                        errors: None,
                    }],
                },
            )?;
            Ok(0)
        }
    }
}
