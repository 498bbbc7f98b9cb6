//! Fixed-width histograms, the entropy-exact bin width and the `M`
//! statistic.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Bin width `Δ = exp(h) · n^(-1/m)` that gives a histogram of `n` entries
/// the Shannon entropy `ln(n) / m`.
pub fn bin_width(h_nats: f64, n: usize, m: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("bin width needs n >= 2, got {n}")));
    }
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::Domain(format!("M must be >= 1, got {m}")));
    }
    if !h_nats.is_finite() {
        return Err(Error::InvalidParameter("differential entropy must be finite".into()));
    }
    Ok(h_nats.exp() * (n as f64).powf(-1.0 / m))
}

/// Mean entries per bin, `n^(1 - 1/m)`, for a flat histogram.
pub fn mu_entries_per_bin(n: usize, m: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::Domain(format!("M must be >= 1, got {m}")));
    }
    Ok((n as f64).powf(1.0 - 1.0 / m))
}

/// `M_B = ln(n) / H_B`.
pub fn m_from_entropy(n: usize, h_b: f64) -> Result<f64> {
    if !(h_b > 0.0) {
        return Err(Error::Domain(format!("histogram entropy must be > 0, got {h_b}")));
    }
    Ok((n as f64).ln() / h_b)
}

/// Entropy and `M` estimated from the largest bin alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxBinEstimate {
    pub entropy_bits: f64,
    pub m: f64,
}

/// `H_X = log2(n / n_max) + 1` bits (without the `+1` for a flat
/// histogram) and `M_X = log2(n) / H_X`.
pub fn m_from_max_bin(n: u64, n_max: u64, uniform: bool) -> Result<MaxBinEstimate> {
    if n_max < 1 || n_max > n {
        return Err(Error::Domain(format!("need 1 <= n_max <= n, got n_max={n_max}, n={n}")));
    }
    let entropy_bits = (n as f64 / n_max as f64).log2() + if uniform { 0.0 } else { 1.0 };
    if entropy_bits <= 0.0 {
        return Err(Error::Domain("max-bin entropy is zero; M undefined".into()));
    }
    Ok(MaxBinEstimate {
        entropy_bits,
        m: (n as f64).log2() / entropy_bits,
    })
}

/// A fixed-width histogram anchored at `x_start`.
///
/// Bins are right-open, `[x_start + iΔ, x_start + (i+1)Δ)`, except that the
/// sample maximum always lands in the last bin. Empty bins are kept so that
/// the geometry is fixed by `(x_start, delta, n_bins)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    x_start: f64,
    delta: f64,
    counts: Vec<u64>,
    n_total: u64,
    partial_last_bin: bool,
}

impl Histogram {
    /// Bins `sample` with width `delta` from `x_start`; the bin count is
    /// `ceil((max - x_start) / delta)` (at least one).
    pub fn build(sample: &Sample, delta: f64, x_start: f64) -> Result<Self> {
        Self::build_values(sample.values(), delta, x_start)
    }

    /// As [`Histogram::build`], anchored at the sample minimum.
    pub fn build_from_min(sample: &Sample, delta: f64) -> Result<Self> {
        let (lo, _) = sample.range().ok_or(Error::EmptyInput)?;
        Self::build_values(sample.values(), delta, lo)
    }

    pub(crate) fn build_values(values: &[f64], delta: f64, x_start: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("bin width must be > 0, got {delta}")));
        }
        if !x_start.is_finite() {
            return Err(Error::InvalidParameter("x_start must be finite".into()));
        }
        let first = *values.first().ok_or(Error::EmptyInput)?;
        let (lo, hi) = values.iter().fold((first, first), |(l, h), &v| (l.min(v), h.max(v)));
        if lo < x_start {
            return Err(Error::InvalidParameter(format!(
                "x_start {x_start} is above the sample minimum {lo}"
            )));
        }
        let span = (hi - x_start) / delta;
        let n_bins = (span.ceil() as usize).max(1);
        if n_bins > 100_000_000 {
            return Err(Error::InvalidParameter(format!("{n_bins} bins requested")));
        }
        let mut counts = vec![0u64; n_bins];
        for &v in values {
            let i = (((v - x_start) / delta) as usize).min(n_bins - 1);
            counts[i] += 1;
        }
        Ok(Self {
            x_start,
            delta,
            counts,
            n_total: values.len() as u64,
            partial_last_bin: span.fract() != 0.0,
        })
    }

    /// Builds a histogram directly from bin counts.
    pub fn from_counts(x_start: f64, delta: f64, counts: Vec<u64>) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() || !x_start.is_finite() {
            return Err(Error::InvalidParameter("need finite x_start and delta > 0".into()));
        }
        if counts.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n_total = counts.iter().sum();
        Ok(Self {
            x_start,
            delta,
            counts,
            n_total,
            partial_last_bin: false,
        })
    }

    /// Fixed geometry: `n_bins` bins of width `delta` from `x_start`.
    /// Values outside `[x_start, x_start + n_bins delta)` are not counted.
    pub fn over_range(sample: &Sample, x_start: f64, delta: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::InvalidParameter("need at least one bin".into()));
        }
        let mut counts = vec![0u64; n_bins];
        let end = x_start + n_bins as f64 * delta;
        for &v in sample.values() {
            if v >= x_start && v < end {
                counts[(((v - x_start) / delta) as usize).min(n_bins - 1)] += 1;
            }
        }
        Self::from_counts(x_start, delta, counts)
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Whether the sample range stops short of the last bin's right edge.
    pub fn partial_last_bin(&self) -> bool {
        self.partial_last_bin
    }

    pub fn left_edge(&self, bin: usize) -> f64 {
        self.x_start + bin as f64 * self.delta
    }

    pub fn right_edge(&self, bin: usize) -> f64 {
        self.x_start + (bin + 1) as f64 * self.delta
    }

    /// Upper edge of the last bin.
    pub fn x_end(&self) -> f64 {
        self.right_edge(self.n_bins() - 1)
    }

    /// Bin that `x` falls into, using the same rule as [`Histogram::build`];
    /// `None` below `x_start`. Values past the last bin clamp into it.
    pub fn bin_index(&self, x: f64) -> Option<usize> {
        if !(x >= self.x_start) {
            return None;
        }
        Some((((x - self.x_start) / self.delta) as usize).min(self.n_bins() - 1))
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Plug-in Shannon entropy `H_B = -Σ (n_i/N) ln(n_i/N)` in nats.
    pub fn shannon_entropy(&self) -> Result<f64> {
        if self.n_total == 0 {
            return Err(Error::EmptyInput);
        }
        let (k, divergence) = uniform_divergence(&self.counts, self.n_total, 1.0);
        Ok((k as f64).ln() - divergence)
    }

    /// `M_B = ln(N) / H_B` for this histogram.
    pub fn m_from_entropy(&self) -> Result<f64> {
        m_from_entropy(self.n_total as usize, self.shannon_entropy()?)
    }

    /// `M_X` from the largest bin; `uniform` drops the `+1` bit.
    pub fn m_from_max_bin(&self, uniform: bool) -> Result<MaxBinEstimate> {
        m_from_max_bin(self.n_total, self.max_count(), uniform)
    }

    /// CSV with a `#` header line carrying the geometry, then
    /// `bin_index,left_edge,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# x_start={},delta={},n_total={},partial_last_bin={}\nbin_index,left_edge,count\n",
            self.x_start, self.delta, self.n_total, self.partial_last_bin
        );
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{c}", self.left_edge(i));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let (ln, header) = lines.next().ok_or(Error::EmptyInput)?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| perr(ln, "expected `# x_start=...` header".into()))?;
        let mut x_start = None;
        let mut delta = None;
        let mut n_total = None;
        let mut partial = false;
        for field in header.split(',') {
            let (key, value) = field
                .trim()
                .split_once('=')
                .ok_or_else(|| perr(ln, format!("malformed header field `{field}`")))?;
            let num = || value.parse::<f64>().map_err(|_| perr(ln, format!("bad value for {key}")));
            match key {
                "x_start" => x_start = Some(num()?),
                "delta" => delta = Some(num()?),
                "n_total" => {
                    n_total = Some(value.parse::<u64>().map_err(|_| perr(ln, "bad n_total".into()))?)
                }
                "partial_last_bin" => partial = value == "true",
                _ => {}
            }
        }
        let (x_start, delta, n_total) = match (x_start, delta, n_total) {
            (Some(x), Some(d), Some(n)) => (x, d, n),
            _ => return Err(perr(ln, "header needs x_start, delta and n_total".into())),
        };
        match lines.next() {
            Some((_, "bin_index,left_edge,count")) => {}
            Some((l, _)) => return Err(perr(l, "expected column header".into())),
            None => return Err(Error::EmptyInput),
        }
        let mut counts = Vec::new();
        for (l, row) in lines {
            if row.is_empty() {
                continue;
            }
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != 3 {
                return Err(perr(l, format!("expected 3 columns, found {}", cols.len())));
            }
            let idx: usize = cols[0].parse().map_err(|_| perr(l, "bad bin_index".into()))?;
            if idx != counts.len() {
                return Err(perr(l, format!("bin_index {idx} out of order")));
            }
            counts.push(cols[2].parse::<u64>().map_err(|_| perr(l, "bad count".into()))?);
        }
        let mut hist = Self::from_counts(x_start, delta, counts)?;
        if hist.n_total != n_total {
            return Err(Error::Parse {
                line: 1,
                message: format!("n_total {n_total} disagrees with summed counts {}", hist.n_total),
            });
        }
        hist.partial_last_bin = partial;
        Ok(hist)
    }
}

/// Rényi divergence of order `q` between the occupied-bin probabilities and
/// the flat distribution over the same `K` bins, returned with `K`.
///
/// Entropies are `ln K` minus this divergence. Working with ratios to the
/// mean count makes a flat histogram give exactly zero and keeps the
/// ordering of orders intact under rounding.
pub(crate) fn uniform_divergence(counts: &[u64], n_total: u64, q: f64) -> (usize, f64) {
    let k = counts.iter().filter(|&&c| c > 0).count();
    if k == 0 {
        return (0, 0.0);
    }
    let kf = k as f64;
    let total = n_total as f64;
    let ratios = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 * kf / total);
    let d = if q == 0.0 {
        0.0
    } else if q == 1.0 {
        ratios.map(|r| r * r.ln()).sum::<f64>() / kf
    } else {
        (ratios.map(|r| r.powf(q)).sum::<f64>() / kf).ln() / (q - 1.0)
    };
    (k, d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionModel;
    use crate::sample::Provenance;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec(), Provenance::Ingested, vec![]).unwrap()
    }

    #[test]
    fn bin_width_examples() {
        assert!((bin_width(0.0, 10_000, 2.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((bin_width(4.1327f64.ln(), 2000, 2.0).unwrap() - 0.0924).abs() < 1e-4);
        assert!((bin_width(0.0, 10_000, 3.0).unwrap() - 0.0464).abs() < 1e-4);
        assert!(matches!(bin_width(0.0, 100, 0.5), Err(Error::Domain(_))));
        assert!(matches!(bin_width(0.0, 1, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn build_places_values() {
        let h = Histogram::build(&sample(&[0.1, 0.2, 0.8]), 0.5, 0.0).unwrap();
        assert_eq!(h.counts(), &[2, 1]);
        assert!(h.partial_last_bin());
        // the maximum on an exact edge stays in the last bin
        let h = Histogram::build(&sample(&[0.0, 0.5, 1.0]), 0.5, 0.0).unwrap();
        assert_eq!(h.counts(), &[1, 2]);
        assert!(!h.partial_last_bin());
        // constant sample gives one bin
        let h = Histogram::build_from_min(&sample(&[3.0, 3.0]), 0.1).unwrap();
        assert_eq!(h.counts(), &[2]);
    }

    #[test]
    fn build_errors() {
        assert_eq!(Histogram::build(&sample(&[]), 0.5, 0.0), Err(Error::EmptyInput));
        assert!(Histogram::build(&sample(&[1.0]), 0.0, 0.0).is_err());
        assert!(Histogram::build(&sample(&[1.0]), 0.5, 2.0).is_err());
    }

    #[test]
    fn normal_sample_counts_are_conserved() {
        let m = DistributionModel::standard_normal();
        let s = m.sample(2000, 1).unwrap();
        let d = bin_width(m.differential_entropy(), 2000, 2.0).unwrap();
        let h = Histogram::build_from_min(&s, d).unwrap();
        assert_eq!(h.counts().iter().sum::<u64>(), 2000);
    }

    #[test]
    fn uniform_bin_count_is_sqrt_n() {
        let s = DistributionModel::uniform(0.0, 1.0).unwrap().sample(10_000, 2).unwrap();
        let h = Histogram::build_from_min(&s, bin_width(0.0, 10_000, 2.0).unwrap()).unwrap();
        assert!((99..=101).contains(&h.n_bins()), "{}", h.n_bins());
    }

    #[test]
    fn shannon_entropy_examples() {
        let two = Histogram::from_counts(0.0, 1.0, vec![5, 5]).unwrap();
        assert!((two.shannon_entropy().unwrap() - LN_2).abs() < 1e-15);
        let one = Histogram::from_counts(0.0, 1.0, vec![10]).unwrap();
        assert_eq!(one.shannon_entropy().unwrap(), 0.0);
        let with_empty = Histogram::from_counts(0.0, 1.0, vec![3, 0, 1]).unwrap();
        let direct = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((with_empty.shannon_entropy().unwrap() - direct).abs() < 1e-15);
        let empty = Histogram::from_counts(0.0, 1.0, vec![0, 0]).unwrap();
        assert_eq!(empty.shannon_entropy(), Err(Error::EmptyInput));
    }

    #[test]
    fn uniform_entropy_is_half_log_n() {
        let n = 1_000_000;
        let s = DistributionModel::uniform(0.0, 1.0).unwrap().sample(n, 3).unwrap();
        let h = Histogram::build_from_min(&s, bin_width(0.0, n, 2.0).unwrap()).unwrap();
        let hb = h.shannon_entropy().unwrap();
        assert!((hb - 0.5 * (n as f64).ln()).abs() < 0.01, "{hb}");
    }

    #[test]
    fn m_estimators() {
        assert!((m_from_entropy(10, 10f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        assert!((m_from_entropy(1_000_000, 0.5 * 1e6f64.ln()).unwrap() - 2.0).abs() < 1e-12);
        assert!(m_from_entropy(10, 0.0).is_err());

        let e = m_from_max_bin(1024, 1024, false).unwrap();
        assert_eq!(e.entropy_bits, 1.0);
        assert_eq!(e.m, 10.0);
        let e = m_from_max_bin(4096, 64, true).unwrap();
        assert_eq!(e.entropy_bits, 6.0);
        assert!(m_from_max_bin(10, 11, false).is_err());
        assert!(m_from_max_bin(10, 0, false).is_err());
        assert!(m_from_max_bin(10, 10, true).is_err());

        assert_eq!(mu_entries_per_bin(10_000, 2.0).unwrap(), 100.0);
        assert_eq!(mu_entries_per_bin(10_000, 1.0).unwrap(), 1.0);
        assert!((mu_entries_per_bin(2000, 3.0).unwrap() - 158.74).abs() < 0.01);
    }

    #[test]
    fn normal_m_estimators_agree() {
        let m = DistributionModel::standard_normal();
        let n = 2000;
        let s = m.sample(n, 21).unwrap();
        let h = Histogram::build_from_min(&s, bin_width(m.differential_entropy(), n, 2.0).unwrap()).unwrap();
        let mb = h.m_from_entropy().unwrap();
        let mx = h.m_from_max_bin(false).unwrap().m;
        assert!((mb - 2.0).abs() < 0.1, "M_B {mb}");
        assert!((mx - mb).abs() <= 0.3, "M_X {mx} vs M_B {mb}");
    }

    #[test]
    fn csv_header_and_rows() {
        let h = Histogram::from_counts(-1.0, 0.5, vec![1, 0, 2]).unwrap();
        let csv = h.to_csv();
        assert!(csv.starts_with("# x_start=-1,delta=0.5,n_total=3,partial_last_bin=false\n"));
        assert!(csv.contains("\n2,0,2\n"));
        assert!(Histogram::from_csv("bin_index,left_edge,count\n").is_err());
        let bad = csv.replace("2,0,2", "2,0,x");
        assert!(matches!(Histogram::from_csv(&bad), Err(Error::Parse { line: 5, .. })));
    }

    proptest! {
        #[test]
        fn counts_conserved_for_any_geometry(
            values in prop::collection::vec(-1e3f64..1e3, 1..300),
            delta in 1e-2f64..50.0,
            offset in 0.0f64..10.0,
        ) {
            let s = sample(&values);
            let (lo, _) = s.range().unwrap();
            let h = Histogram::build(&s, delta, lo - offset).unwrap();
            prop_assert_eq!(h.counts().iter().sum::<u64>(), values.len() as u64);
            prop_assert_eq!(h.n_total(), values.len() as u64);
            for &v in &values {
                let i = h.bin_index(v).unwrap();
                prop_assert!(i < h.n_bins());
            }
        }

        #[test]
        fn csv_round_trips(
            counts in prop::collection::vec(0u64..1000, 1..50),
            x_start in -1e6f64..1e6,
            delta in 1e-6f64..1e3,
        ) {
            let h = Histogram::from_counts(x_start, delta, counts).unwrap();
            prop_assert_eq!(Histogram::from_csv(&h.to_csv()).unwrap(), h);
        }

        #[test]
        fn entropy_never_exceeds_log_of_occupied_bins(counts in prop::collection::vec(0u64..500, 1..40)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let h = Histogram::from_counts(0.0, 1.0, counts).unwrap();
            let hb = h.shannon_entropy().unwrap();
            prop_assert!(hb >= 0.0);
            prop_assert!(hb <= (h.occupied_bins() as f64).ln());
        }
    }
}
