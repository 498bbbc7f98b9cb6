//! Command-line experiments for entropy-based binning and amplification
//! bounds: configs, drivers, sample-file ingestion and CSV/JSON/SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod emit;
pub mod experiments;
pub mod io;
