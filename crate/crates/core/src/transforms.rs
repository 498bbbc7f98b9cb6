//! Monotone variable transforms (Box-Cox, Yeo-Johnson, log) and
//! amplification in the transformed variable.

use std::fmt;
use std::str::FromStr;

use crate::amplifier::gencopy;
use crate::error::{Error, Result};
use crate::knn::knn_entropy;
use crate::sample::Sample;

/// k used when the entropy of a transformed sample has to be estimated.
pub const TRANSFORMED_ENTROPY_K: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// `(x^λ - 1) / λ`, `ln x` at `λ = 0`; needs `x > 0`.
    BoxCox(f64),
    YeoJohnson(f64),
    /// Box-Cox at `λ = 0`.
    Log,
    Identity,
}

fn box_cox(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        x.ln()
    } else {
        (lambda * x.ln()).exp_m1() / lambda
    }
}

fn box_cox_inv(y: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        y.exp()
    } else {
        ((lambda * y).ln_1p() / lambda).exp()
    }
}

fn yeo_johnson(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda == 0.0 {
            x.ln_1p()
        } else {
            (lambda * x.ln_1p()).exp_m1() / lambda
        }
    } else {
        let l2 = 2.0 - lambda;
        if l2 == 0.0 {
            -(-x).ln_1p()
        } else {
            -(l2 * (-x).ln_1p()).exp_m1() / l2
        }
    }
}

fn yeo_johnson_inv(y: f64, lambda: f64) -> f64 {
    if y >= 0.0 {
        if lambda == 0.0 {
            y.exp_m1()
        } else {
            ((lambda * y).ln_1p() / lambda).exp_m1()
        }
    } else {
        let l2 = 2.0 - lambda;
        if l2 == 0.0 {
            -(-y).exp_m1()
        } else {
            -((-l2 * y).ln_1p() / l2).exp_m1()
        }
    }
}

/// Formats at most ten offending indices.
fn index_list(bad: &[usize]) -> String {
    let shown: Vec<String> = bad.iter().take(10).map(|i| i.to_string()).collect();
    if bad.len() > 10 {
        format!("{} (and {} more)", shown.join(", "), bad.len() - 10)
    } else {
        shown.join(", ")
    }
}

impl Transform {
    pub fn forward_value(&self, x: f64) -> f64 {
        match *self {
            Self::BoxCox(l) => box_cox(x, l),
            Self::YeoJohnson(l) => yeo_johnson(x, l),
            Self::Log => x.ln(),
            Self::Identity => x,
        }
    }

    pub fn inverse_value(&self, y: f64) -> f64 {
        match *self {
            Self::BoxCox(l) => box_cox_inv(y, l),
            Self::YeoJohnson(l) => yeo_johnson_inv(y, l),
            Self::Log => y.exp(),
            Self::Identity => y,
        }
    }

    fn needs_positive(&self) -> bool {
        matches!(self, Self::BoxCox(_) | Self::Log)
    }

    fn map(&self, sample: &Sample, f: impl Fn(f64) -> f64, what: &str) -> Result<Sample> {
        let values: Vec<f64> = sample.values().iter().map(|&v| f(v)).collect();
        let bad: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_finite())
            .map(|(i, _)| i)
            .collect();
        if !bad.is_empty() {
            return Err(Error::Domain(format!(
                "{what} of {self} is undefined at indices {}",
                index_list(&bad)
            )));
        }
        Ok(Sample::from_finite(values, sample.provenance(), sample.seed_lineage().to_vec()))
    }

    pub fn forward(&self, sample: &Sample) -> Result<Sample> {
        if self.needs_positive() {
            let bad: Vec<usize> = sample
                .values()
                .iter()
                .enumerate()
                .filter(|(_, &v)| !(v > 0.0))
                .map(|(i, _)| i)
                .collect();
            if !bad.is_empty() {
                return Err(Error::Domain(format!(
                    "{self} needs positive values; non-positive at indices {}",
                    index_list(&bad)
                )));
            }
        }
        self.map(sample, |x| self.forward_value(x), "forward map")
    }

    pub fn inverse(&self, sample: &Sample) -> Result<Sample> {
        self.map(sample, |y| self.inverse_value(y), "inverse map")
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BoxCox(l) => write!(f, "boxcox:{l}"),
            Self::YeoJohnson(l) => write!(f, "yeojohnson:{l}"),
            Self::Log => write!(f, "log"),
            Self::Identity => write!(f, "identity"),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lambda = |v: &str| -> Result<f64> {
            let l: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad lambda `{v}`")))?;
            if l.is_finite() {
                Ok(l)
            } else {
                Err(Error::InvalidParameter(format!("bad lambda `{v}`")))
            }
        };
        match s.split_once(':') {
            Some(("boxcox", v)) => Ok(Self::BoxCox(lambda(v)?)),
            Some(("yeojohnson", v)) => Ok(Self::YeoJohnson(lambda(v)?)),
            None if s == "log" => Ok(Self::Log),
            None if s == "identity" => Ok(Self::Identity),
            _ => Err(Error::InvalidParameter(format!(
                "unknown transform `{s}`; expected boxcox:<lambda>, yeojohnson:<lambda>, log or identity"
            ))),
        }
    }
}

/// Box-Cox profile log-likelihood under a normal model, up to a constant.
pub fn box_cox_log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let y: Vec<f64> = values.iter().map(|&x| box_cox(x, lambda)).collect();
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sum_ln: f64 = values.iter().map(|x| x.ln()).sum();
    -0.5 * n * var.ln() + (lambda - 1.0) * sum_ln
}

/// Box-Cox `λ` in `[lo, hi]` maximising the profile likelihood: a grid
/// search of step 0.05 refined by golden-section search.
pub fn box_cox_lambda_search(sample: &Sample, lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty lambda range [{lo}, {hi}]")));
    }
    Transform::Log.forward(sample)?;
    if sample.len() < 3 {
        return Err(Error::InvalidParameter("lambda search needs at least 3 points".into()));
    }
    let v = sample.values();
    let ll = |l: f64| box_cox_log_likelihood(v, l);
    let steps = ((hi - lo) / 0.05).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| (lo + i as f64 * 0.05).min(hi)).collect();
    let best = (0..grid.len())
        .max_by(|&a, &b| ll(grid[a]).total_cmp(&ll(grid[b])))
        .expect("non-empty grid");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    while b - a > 1e-8 {
        if ll(c) > ll(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    let l = 0.5 * (a + b);
    if !ll(l).is_finite() {
        return Err(Error::Fit("profile likelihood is not finite".into()));
    }
    Ok(l)
}

/// Maps the training sample, amplifies it with GenCopy and maps back.
/// `h_transformed` is the differential entropy of the transformed variable
/// when known; otherwise it is estimated with a kNN estimator.
pub fn mapped_amplify(
    training: &Sample,
    transform: Transform,
    gain: usize,
    seed: u64,
    h_transformed: Option<f64>,
) -> Result<Sample> {
    let mapped = transform.forward(training)?;
    let h = match h_transformed {
        Some(h) => h,
        None => knn_entropy(&mapped, TRANSFORMED_ENTROPY_K)?,
    };
    transform.inverse(&gencopy(&mapped, gain, h, seed)?)
}
