//! Information-theoretic tools for judging data amplification.
//!
//! A continuous variable sampled `N` times carries a finite Shannon entropy
//! `H = ln(N) / M` once binned at width `Δ = exp(h) N^{-1/M}`, with the
//! "Goldilocks" exponent `M` between 2 and 3. Generating more events than
//! were used for training cannot add information, which bounds the useful
//! gain of any generator:
//!
//! ```text
//! M_eff = 2 ln(generated) / ln(training) <= 3
//! ```
//!
//! The crate provides the pieces needed to study and audit that bound:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`distributions`] | closed-form models, entropies, shape constants `A`, `F`, `S` |
//! | [`histogram`] | fixed-width binning, entropy-exact bin width, `M` estimators |
//! | [`cost`] | Shimazaki–Shinomoto cost scans and the one-parameter `A` fit |
//! | [`knn`] | kNN entropy and KL-divergence estimators with variance models |
//! | [`amplifier`] | the GenCopy amplifier, `M_eff` algebra and the bound auditor |
//! | [`transforms`] | Box-Cox / Yeo-Johnson maps and mapped amplification |
//! | [`histfit`] | Baker–Cousins Poisson χ² and amplitude-only fits |
//! | [`renyi`] | discrete Rényi spectra and data-side `F` estimators |
//!
//! Everything is computed in nats; convert with [`NATS_PER_BIT`] for display.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplifier;
pub mod cost;
pub mod distributions;
pub mod error;
pub mod histfit;
pub mod histogram;
pub mod knn;
pub mod quadrature;
pub mod renyi;
pub mod rng;
pub mod sample;
pub mod special;
pub mod transforms;

pub use amplifier::{AmplificationReport, Verdict};
pub use cost::CostScan;
pub use distributions::{Curvature, DistributionModel};
pub use error::{Error, Result};
pub use histfit::FitResult;
pub use histogram::Histogram;
pub use knn::{KldDirection, KldEstimate};
pub use renyi::RenyiSpectrum;
pub use sample::{Provenance, Sample};
pub use transforms::Transform;

/// `ln 2`: divide a value in nats by this to get bits.
pub const NATS_PER_BIT: f64 = std::f64::consts::LN_2;
