//! Closed-form one-dimensional probability models.
//!
//! Every model exposes its density, CDF, a seeded sampler and the entropy
//! quantities used throughout the crate: the differential entropy `h`, the
//! Rényi differential entropies `r_q`, the curvature of the density's
//! autocorrelation at zero lag, and the shape constants `A`, `F` and `S`.
//! Closed forms are used wherever they exist; the Moyal model falls back to
//! adaptive quadrature on its support truncated where the density drops
//! below 1e-16.
//!
//! All entropies are in nats.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature::integrate_pieces;
use crate::rng::rng_from_seed;
use crate::sample::{Provenance, Sample};

const QUAD_TOL: f64 = 1e-10;
/// Density below which the support is truncated for quadrature.
const PDF_FLOOR_LN: f64 = -36.841_361_487_904_73; // ln(1e-16)
const QUAD_PIECES: usize = 64;

/// A one-dimensional probability model with fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionModel {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// Standard Moyal density `exp(-(x + e^{-x})/2) / sqrt(2π)`; it has no
    /// location or scale parameters here.
    Moyal,
    Exponential { rate: f64 },
}

/// Second derivative of the autocorrelation `φ(τ) = ∫ p(x) p(x+τ) dx` at
/// zero lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    /// `φ'(0) = 0` and `φ''(0)` is the contained value.
    Smooth(f64),
    /// `φ` has a cusp at `τ = 0` (`φ'(0) ≠ 0`), as for densities with jumps.
    Cusp,
}

impl DistributionModel {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::Uniform { a, b }.validated()
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::Normal { mu, sigma }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::LogNormal { mu, sigma }.validated()
    }

    pub fn moyal() -> Self {
        Self::Moyal
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn standard_normal() -> Self {
        Self::Normal { mu: 0.0, sigma: 1.0 }
    }

    pub fn standard_lognormal() -> Self {
        Self::LogNormal { mu: 0.0, sigma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match *self {
            Self::Uniform { a, b } => {
                finite(a, "a")?;
                finite(b, "b")?;
                if a >= b {
                    return Err(Error::InvalidParameter(format!("uniform requires a < b, got a={a}, b={b}")));
                }
            }
            Self::Normal { mu, sigma } | Self::LogNormal { mu, sigma } => {
                finite(mu, "mu")?;
                finite(sigma, "sigma")?;
                if sigma <= 0.0 {
                    return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
                }
            }
            Self::Moyal => {}
            Self::Exponential { rate } => {
                finite(rate, "rate")?;
                if rate <= 0.0 {
                    return Err(Error::InvalidParameter(format!("rate must be > 0, got {rate}")));
                }
            }
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Normal { .. } => "normal",
            Self::LogNormal { .. } => "lognormal",
            Self::Moyal => "moyal",
            Self::Exponential { .. } => "exponential",
        }
    }

    /// Natural log of the density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - (sigma * (2.0 * PI).sqrt()).ln()
            }
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lx = x.ln();
                let z = (lx - mu) / sigma;
                -0.5 * z * z - lx - (sigma * (2.0 * PI).sqrt()).ln()
            }
            Self::Moyal => -0.5 * (x + (-x).exp()) - 0.5 * (2.0 * PI).ln(),
            Self::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Derivative of the density where it is differentiable.
    pub fn pdf_derivative(&self, x: f64) -> f64 {
        let p = self.pdf(x);
        if p == 0.0 {
            return 0.0;
        }
        match *self {
            Self::Uniform { .. } => 0.0,
            Self::Normal { mu, sigma } => -p * (x - mu) / (sigma * sigma),
            Self::LogNormal { mu, sigma } => -p * (1.0 + (x.ln() - mu) / (sigma * sigma)) / x,
            Self::Moyal => 0.5 * p * ((-x).exp() - 1.0),
            Self::Exponential { rate } => -rate * p,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::Normal { mu, sigma } => 0.5 * erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2)),
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * erfc(-(x.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
                }
            }
            Self::Moyal => erfc((-0.5 * x).exp() / std::f64::consts::SQRT_2),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// Probability mass in `[lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        // Upper-tail differences keep precision far in the right tail.
        let upper = |x: f64| match *self {
            Self::Normal { mu, sigma } => 0.5 * erfc((x - mu) / (sigma * std::f64::consts::SQRT_2)),
            Self::LogNormal { mu, sigma } if x > 0.0 => {
                0.5 * erfc((x.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
            }
            Self::Exponential { rate } if x > 0.0 => (-rate * x).exp(),
            _ => 1.0 - self.cdf(x),
        };
        (upper(lo) - upper(hi)).max(0.0)
    }

    /// Mode of the density (left edge for the exponential, midpoint for the
    /// uniform).
    fn mode(&self) -> f64 {
        match *self {
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Normal { mu, .. } => mu,
            Self::LogNormal { mu, sigma } => (mu - sigma * sigma).exp(),
            Self::Moyal => 0.0,
            Self::Exponential { .. } => 0.0,
        }
    }

    /// Finite interval on which `ln p(x) >= min_ln_pdf`, searched outward
    /// from the mode (`ln p` is unimodal for every model here).
    fn truncated_support(&self, min_ln_pdf: f64) -> Result<(f64, f64)> {
        match *self {
            Self::Uniform { a, b } => return Ok((a, b)),
            Self::Exponential { rate } => {
                let hi = (rate.ln() - min_ln_pdf) / rate;
                return Ok((0.0, hi.max(0.0)));
            }
            _ => {}
        }
        let mode = self.mode();
        if self.ln_pdf(mode) < min_ln_pdf {
            return Ok((mode, mode));
        }
        let scale = match *self {
            Self::Normal { sigma, .. } => sigma,
            Self::LogNormal { .. } => mode.max(1e-300),
            _ => 1.0,
        };
        let find = |dir: f64| -> Result<f64> {
            let lower_bound = if matches!(self, Self::LogNormal { .. }) && dir < 0.0 {
                Some(0.0)
            } else {
                None
            };
            let mut inner = mode;
            let mut step = scale;
            let mut outer = mode + dir * step;
            for _ in 0..2000 {
                if let Some(lb) = lower_bound {
                    if outer <= lb {
                        // Geometric approach to zero for the lognormal left tail.
                        outer = inner * 0.5;
                        if outer <= f64::MIN_POSITIVE || self.ln_pdf(outer) < min_ln_pdf {
                            break;
                        }
                        inner = outer;
                        continue;
                    }
                }
                if self.ln_pdf(outer) < min_ln_pdf {
                    break;
                }
                inner = outer;
                step *= 2.0;
                outer = mode + dir * step;
                if !outer.is_finite() {
                    return Err(Error::Divergent(format!(
                        "{} density does not fall below the quadrature floor",
                        self.name()
                    )));
                }
            }
            // Bisect between the last point above the floor and the first below.
            let (mut a, mut b) = (inner, outer);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if self.ln_pdf(m) >= min_ln_pdf {
                    a = m;
                } else {
                    b = m;
                }
            }
            Ok(b)
        };
        Ok((find(-1.0)?, find(1.0)?))
    }

    fn quadrature_breaks(&self, min_ln_pdf: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.truncated_support(min_ln_pdf)?;
        if hi <= lo {
            return Ok(vec![lo, lo]);
        }
        let breaks = match self {
            Self::LogNormal { .. } if lo > 0.0 => {
                let (l, h) = (lo.ln(), hi.ln());
                (0..=QUAD_PIECES)
                    .map(|i| (l + (h - l) * i as f64 / QUAD_PIECES as f64).exp())
                    .collect::<Vec<_>>()
            }
            _ => (0..=QUAD_PIECES)
                .map(|i| lo + (hi - lo) * i as f64 / QUAD_PIECES as f64)
                .collect(),
        };
        let mut breaks = breaks;
        // Pin the end points exactly; exp(ln(x)) may round.
        breaks[0] = lo;
        *breaks.last_mut().expect("non-empty") = hi;
        Ok(breaks)
    }

    /// `E[f(X)]` by quadrature over the truncated support.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.validate()?;
        let breaks = self.quadrature_breaks(PDF_FLOOR_LN)?;
        integrate_pieces(|x| self.pdf(x) * f(x), &breaks, QUAD_TOL)
    }

    /// Draws `n` values; identical `(model, n, seed)` give identical output.
    ///
    /// Moyal variates use the exact transform `X = -2 ln|Z|`, `Z ~ N(0, 1)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        let values: Vec<f64> = match *self {
            Self::Uniform { a, b } => (0..n).map(|_| a + (b - a) * rng.random::<f64>()).collect(),
            Self::Normal { mu, sigma } => (0..n)
                .map(|_| mu + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            Self::LogNormal { mu, sigma } => (0..n)
                .map(|_| (mu + sigma * rng.sample::<f64, _>(StandardNormal)).exp())
                .collect(),
            Self::Moyal => (0..n)
                .map(|_| loop {
                    let z: f64 = rng.sample(StandardNormal);
                    if z != 0.0 {
                        break -2.0 * z.abs().ln();
                    }
                })
                .collect(),
            Self::Exponential { rate } => (0..n).map(|_| rng.sample::<f64, _>(Exp1) / rate).collect(),
        };
        Ok(Sample::from_finite(values, Provenance::Simulated, vec![seed]))
    }

    /// Differential entropy `h = -∫ p ln p` in nats.
    pub fn differential_entropy(&self) -> f64 {
        match *self {
            Self::Uniform { a, b } => (b - a).ln(),
            Self::Normal { sigma, .. } => 0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).ln(),
            Self::LogNormal { mu, sigma } => mu + 0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).ln(),
            Self::Moyal => moyal_constants().entropy,
            Self::Exponential { rate } => 1.0 - rate.ln(),
        }
    }

    /// `Var(ln p(X))`, the shape term in the kNN entropy variance model.
    pub fn var_log_density(&self) -> f64 {
        match *self {
            Self::Uniform { .. } => 0.0,
            Self::Normal { .. } => 0.5,
            Self::LogNormal { sigma, .. } => 0.5 + sigma * sigma,
            Self::Moyal => moyal_constants().var_log_density,
            Self::Exponential { .. } => 1.0,
        }
    }

    /// `φ''(0) = ∫ p p'' dx = -∫ (p')² dx` for densities vanishing at the
    /// ends of their support.
    pub fn autocorr_second_derivative(&self) -> Result<Curvature> {
        self.validate()?;
        match *self {
            Self::Uniform { .. } | Self::Exponential { .. } => Ok(Curvature::Cusp),
            Self::Normal { sigma, .. } => Ok(Curvature::Smooth(-1.0 / (4.0 * PI.sqrt() * sigma.powi(3)))),
            Self::Moyal => Ok(Curvature::Smooth(moyal_constants().curvature)),
            Self::LogNormal { .. } => {
                let breaks = self.quadrature_breaks(PDF_FLOOR_LN)?;
                let v = integrate_pieces(|x| self.pdf_derivative(x).powi(2), &breaks, QUAD_TOL)?;
                Ok(Curvature::Smooth(-v))
            }
        }
    }

    /// Shape constant `A = -(1/12) φ''(0) exp(3h)` of the under-binning
    /// cost term. Zero for the uniform density, whose autocorrelation is
    /// piecewise linear; undefined for other cusp cases.
    pub fn theoretical_a(&self) -> Result<f64> {
        match (self, self.autocorr_second_derivative()?) {
            (Self::Uniform { .. }, _) => Ok(0.0),
            (_, Curvature::Cusp) => Err(Error::Cusp(self.to_string())),
            (_, Curvature::Smooth(phi2)) => Ok(-phi2 * (3.0 * self.differential_entropy()).exp() / 12.0),
        }
    }

    /// Rényi differential entropy `r_q = ln(∫ p^q) / (1 - q)`; `r_1 = h`.
    pub fn renyi_differential(&self, q: f64) -> Result<f64> {
        self.validate()?;
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("Rényi order must be finite and >= 0, got {q}")));
        }
        if q == 1.0 {
            return Ok(self.differential_entropy());
        }
        if q == 0.0 && !matches!(self, Self::Uniform { .. }) {
            return Err(Error::Divergent(format!(
                "∫ p^0 is the support length, infinite for {}",
                self.name()
            )));
        }
        match *self {
            Self::Uniform { a, b } => Ok((b - a).ln()),
            Self::Normal { sigma, .. } => Ok((sigma * (2.0 * PI).sqrt()).ln() + q.ln() / (2.0 * (q - 1.0))),
            Self::LogNormal { mu, sigma } => Ok(0.5 * (2.0 * PI * sigma * sigma).ln()
                + mu
                + q.ln() / (2.0 * (q - 1.0))
                + (1.0 - q) * sigma * sigma / (2.0 * q)),
            Self::Exponential { rate } => Ok(-rate.ln() + q.ln() / (q - 1.0)),
            Self::Moyal => {
                if q == 2.0 {
                    return Ok(moyal_constants().r2);
                }
                // Truncate where p^q, not p, reaches the floor.
                let breaks = self.quadrature_breaks(PDF_FLOOR_LN / q.min(1.0))?;
                let mass = integrate_pieces(|x| (q * self.ln_pdf(x)).exp(), &breaks, QUAD_TOL)?;
                if !(mass > 0.0) || !mass.is_finite() {
                    return Err(Error::Divergent(format!("∫ p^{q} evaluated to {mass}")));
                }
                Ok(mass.ln() / (1.0 - q))
            }
        }
    }

    /// `F = exp(r_1 - r_2)`; 1 for the uniform, larger for every other shape.
    pub fn shape_f(&self) -> Result<f64> {
        Ok((self.differential_entropy() - self.renyi_differential(2.0)?).exp())
    }

    /// Song's intrinsic shape measure, reported as the tabulated magnitude
    /// `Var(ln p(X))` (0.5 for any normal, 1 for any exponential).
    pub fn song_s(&self) -> f64 {
        self.var_log_density()
    }
}

struct MoyalConstants {
    entropy: f64,
    r2: f64,
    var_log_density: f64,
    curvature: f64,
}

fn moyal_constants() -> &'static MoyalConstants {
    static CONSTANTS: OnceLock<MoyalConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| {
        let m = DistributionModel::Moyal;
        let breaks = m
            .quadrature_breaks(PDF_FLOOR_LN)
            .expect("Moyal support is finite after truncation");
        let quad = |f: &dyn Fn(f64) -> f64| {
            integrate_pieces(f, &breaks, QUAD_TOL).expect("Moyal quadrature converges")
        };
        let entropy = quad(&|x| -m.pdf(x) * m.ln_pdf(x));
        let second = quad(&|x| m.pdf(x) * m.ln_pdf(x).powi(2));
        let r2 = -quad(&|x| m.pdf(x).powi(2)).ln();
        let curvature = -quad(&|x| m.pdf_derivative(x).powi(2));
        MoyalConstants {
            entropy,
            r2,
            var_log_density: second - entropy * entropy,
            curvature,
        }
    })
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Self::Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            Self::Moyal => write!(f, "moyal"),
            Self::Exponential { rate } => write!(f, "exponential({rate})"),
        }
    }
}

impl FromStr for DistributionModel {
    type Err = Error;

    /// Parses `normal(mu,sigma)`, `lognormal(mu,sigma)`, `uniform(a,b)`,
    /// `moyal` and `exponential(rate)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: String| Error::InvalidParameter(format!("model `{s}`: {msg}"));
        let (name, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .rfind(')')
                    .filter(|&c| c == s.len() - 1 && c > open)
                    .ok_or_else(|| bad("missing closing parenthesis".into()))?;
                let args = s[open + 1..close]
                    .split(',')
                    .map(|a| {
                        a.trim()
                            .parse::<f64>()
                            .map_err(|_| bad(format!("`{}` is not a number", a.trim())))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                (s[..open].trim().to_ascii_lowercase(), args)
            }
            None => (s.to_ascii_lowercase(), Vec::new()),
        };
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(format!("expected {n} parameter(s), got {}", args.len())))
            }
        };
        match name.as_str() {
            "uniform" => {
                want(2)?;
                Self::uniform(args[0], args[1])
            }
            "normal" => {
                want(2)?;
                Self::normal(args[0], args[1])
            }
            "lognormal" => {
                want(2)?;
                Self::lognormal(args[0], args[1])
            }
            "moyal" => {
                want(0)?;
                Ok(Self::Moyal)
            }
            "exponential" => {
                want(1)?;
                Self::exponential(args[0])
            }
            other => Err(bad(format!("unknown distribution `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn all_models() -> Vec<DistributionModel> {
        vec![
            DistributionModel::uniform(0.0, 1.0).unwrap(),
            DistributionModel::standard_normal(),
            DistributionModel::standard_lognormal(),
            DistributionModel::Moyal,
            DistributionModel::exponential(1.0).unwrap(),
        ]
    }

    #[test]
    fn parameter_validation() {
        assert!(DistributionModel::uniform(1.0, 1.0).is_err());
        assert!(DistributionModel::normal(0.0, 0.0).is_err());
        assert!(DistributionModel::lognormal(0.0, -1.0).is_err());
        assert!(DistributionModel::exponential(0.0).is_err());
        assert!(DistributionModel::normal(f64::NAN, 1.0).is_err());
        let bad = DistributionModel::Normal { mu: 0.0, sigma: -1.0 };
        assert!(bad.sample(10, 1).is_err());
    }

    #[test]
    fn grammar_round_trip() {
        for m in all_models() {
            let parsed: DistributionModel = m.to_string().parse().unwrap();
            assert_eq!(parsed, m);
        }
        let m: DistributionModel = " Normal( 1.5 , 2 ) ".parse().unwrap();
        assert_eq!(m, DistributionModel::Normal { mu: 1.5, sigma: 2.0 });
        assert!("normal(0)".parse::<DistributionModel>().is_err());
        assert!("gamma(1,2)".parse::<DistributionModel>().is_err());
        assert!("normal(0,x)".parse::<DistributionModel>().is_err());
        assert!("normal(0,1".parse::<DistributionModel>().is_err());
        assert!("uniform(2,1)".parse::<DistributionModel>().is_err());
    }

    #[test]
    fn densities_normalise_and_are_non_negative() {
        for m in all_models() {
            let mass = m.expectation(|_| 1.0).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "{m}: mass {mass}");
            let (lo, hi) = m.truncated_support(PDF_FLOOR_LN).unwrap();
            for i in 0..10_000 {
                let x = lo + (hi - lo) * i as f64 / 9_999.0;
                assert!(m.pdf(x) >= 0.0);
            }
        }
    }

    #[test]
    fn cdf_matches_integrated_density() {
        for m in all_models() {
            let (lo, hi) = m.truncated_support(PDF_FLOOR_LN).unwrap();
            let x = lo + 0.3 * (hi - lo).min(5.0);
            let by_quad = crate::quadrature::integrate(|t| m.pdf(t), lo, x, 1e-11).unwrap();
            assert!((by_quad - m.cdf(x)).abs() < 1e-8, "{m}");
            assert!((m.interval_mass(lo, x) - by_quad).abs() < 1e-8, "{m}");
        }
    }

    #[test]
    fn uniform_sample_stays_in_support() {
        let s = DistributionModel::uniform(0.0, 1.0).unwrap().sample(4, 9).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.values().iter().all(|&v| (0.0..1.0).contains(&v)));
        assert_eq!(s.provenance(), Provenance::Simulated);
        assert_eq!(s.seed_lineage(), &[9]);
    }

    #[test]
    fn sampling_is_deterministic() {
        for m in all_models() {
            assert_eq!(m.sample(100, 5).unwrap(), m.sample(100, 5).unwrap());
            assert_ne!(m.sample(100, 5).unwrap(), m.sample(100, 6).unwrap());
        }
        assert!(DistributionModel::Moyal.sample(0, 1).is_err());
    }

    #[test]
    fn normal_sample_moments() {
        // 3σ CLT bound on the mean is 3/√n ≈ 0.0095; sd is tighter still.
        let s = DistributionModel::standard_normal().sample(100_000, 11).unwrap();
        let n = s.len() as f64;
        let mean = s.mean().unwrap();
        let sd = (s.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 0.02);
        assert!((sd - 1.0).abs() < 0.02);
    }

    #[test]
    fn moyal_sampler_matches_closed_form_cdf() {
        let n = 1_000_000;
        let mut v = DistributionModel::Moyal.sample(n, 3).unwrap().into_values();
        v.sort_unstable_by(f64::total_cmp);
        // Oracle: P(X <= x) = erfc(e^{-x/2} / √2), independent of `cdf`.
        let oracle = |x: f64| erfc((-0.5 * x).exp() / std::f64::consts::SQRT_2);
        let ks = v
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = oracle(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.002, "KS statistic {ks}");
    }

    #[test]
    fn moyal_sampler_mean_matches_quadrature() {
        let n = 1_000_000;
        let s = DistributionModel::Moyal.sample(n, 17).unwrap();
        let mean = s.mean().unwrap();
        let var = s.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let quad_mean = DistributionModel::Moyal.expectation(|x| x).unwrap();
        // E[X] = γ + ln 2
        assert!((quad_mean - (EULER_GAMMA + LN_2)).abs() < 1e-8);
        assert!((mean - quad_mean).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn entropy_closed_forms() {
        assert_eq!(DistributionModel::uniform(0.0, 1.0).unwrap().differential_entropy(), 0.0);
        let h = DistributionModel::standard_normal().differential_entropy();
        assert!((h.exp() - 4.1327).abs() < 1e-3);
        // Moyal oracle: h = ½ln(2π) + (γ + ln2 + 1)/2, from E[X] and E[e^{-X}] = 1.
        let oracle = 0.5 * (2.0 * PI).ln() + 0.5 * (EULER_GAMMA + LN_2 + 1.0);
        assert!((DistributionModel::Moyal.differential_entropy() - oracle).abs() < 1e-8);
        for m in all_models() {
            let by_quad = m.expectation(|x| -m.ln_pdf(x)).unwrap();
            assert!((by_quad - m.differential_entropy()).abs() < 1e-7, "{m}");
        }
    }

    #[test]
    fn curvature_values() {
        assert_eq!(
            DistributionModel::uniform(0.0, 1.0).unwrap().autocorr_second_derivative().unwrap(),
            Curvature::Cusp
        );
        assert_eq!(
            DistributionModel::exponential(2.0).unwrap().autocorr_second_derivative().unwrap(),
            Curvature::Cusp
        );
        // Gaussian autocorrelation exp(-τ²/4σ²)/(2√π σ) differentiated twice at 0.
        let Curvature::Smooth(c) = DistributionModel::standard_normal().autocorr_second_derivative().unwrap()
        else {
            panic!("normal is smooth")
        };
        assert!((c + 1.0 / (4.0 * PI.sqrt())).abs() < 1e-14);
        // Moyal: -∫(p')² = -1/(8π) by the substitution y = e^{-x}.
        let Curvature::Smooth(c) = DistributionModel::Moyal.autocorr_second_derivative().unwrap() else {
            panic!("moyal is smooth")
        };
        assert!((c + 1.0 / (8.0 * PI)).abs() < 1e-9);
        // Lognormal quadrature against central finite differences of φ(τ).
        let m = DistributionModel::standard_lognormal();
        let Curvature::Smooth(c) = m.autocorr_second_derivative().unwrap() else {
            panic!("lognormal is smooth")
        };
        let breaks = m.quadrature_breaks(PDF_FLOOR_LN).unwrap();
        let phi = |tau: f64| integrate_pieces(|x| m.pdf(x) * m.pdf(x + tau), &breaks, 1e-13).unwrap();
        let t = 1e-3;
        let fd = (phi(t) - 2.0 * phi(0.0) + phi(-t)) / (t * t);
        assert!((fd - c).abs() < 1e-3 * c.abs(), "fd {fd} vs {c}");
    }

    #[test]
    fn theoretical_a_values() {
        assert_eq!(DistributionModel::uniform(0.0, 1.0).unwrap().theoretical_a().unwrap(), 0.0);
        let a_norm = DistributionModel::standard_normal().theoretical_a().unwrap();
        assert!((a_norm - 0.83).abs() < 0.005);
        for sigma in [0.5, 2.0] {
            let a = DistributionModel::normal(3.0, sigma).unwrap().theoretical_a().unwrap();
            assert!(((a - a_norm) / a_norm).abs() < 1e-9);
        }
        let a_ln = DistributionModel::standard_lognormal().theoretical_a().unwrap();
        assert!((a_ln - 11.80).abs() < 0.02, "{a_ln}");
        assert!(matches!(
            DistributionModel::exponential(1.0).unwrap().theoretical_a(),
            Err(Error::Cusp(_))
        ));
    }

    #[test]
    fn renyi_closed_forms() {
        let u = DistributionModel::uniform(0.0, 1.0).unwrap();
        for q in [0.0, 0.5, 2.0, 7.0] {
            assert_eq!(u.renyi_differential(q).unwrap(), 0.0);
        }
        let n = DistributionModel::standard_normal();
        let d = n.differential_entropy() - n.renyi_differential(2.0).unwrap();
        assert!((d - 0.5 * (1.0 - LN_2)).abs() < 1e-14);
        let ln = DistributionModel::standard_lognormal();
        let d = ln.differential_entropy() - ln.renyi_differential(2.0).unwrap();
        assert!((d - (0.5 * (1.0 - LN_2) + 0.25)).abs() < 1e-14);
        assert!(n.renyi_differential(0.0).is_err());
        assert!(n.renyi_differential(-1.0).is_err());
        assert_eq!(n.renyi_differential(1.0).unwrap(), n.differential_entropy());
    }

    #[test]
    fn renyi_closed_forms_match_quadrature() {
        for m in all_models() {
            for q in [0.5f64, 2.0, 3.0] {
                let breaks = m.quadrature_breaks(PDF_FLOOR_LN / q.min(1.0)).unwrap();
                let mass = integrate_pieces(|x| (q * m.ln_pdf(x)).exp(), &breaks, 1e-12).unwrap();
                let by_quad = mass.ln() / (1.0 - q);
                let r = m.renyi_differential(q).unwrap();
                assert!((r - by_quad).abs() < 1e-6, "{m} q={q}: {r} vs {by_quad}");
            }
        }
    }

    #[test]
    fn moyal_renyi_matches_gamma_closed_form() {
        // ∫ p^q = (2π)^{-q/2} Γ(q/2) (2/q)^{q/2}
        use statrs::function::gamma::ln_gamma;
        for q in [0.5f64, 2.0, 3.0] {
            let ln_mass = -0.5 * q * (2.0 * PI).ln() + ln_gamma(q / 2.0) + 0.5 * q * (2.0 / q).ln();
            let r = DistributionModel::Moyal.renyi_differential(q).unwrap();
            assert!((r - ln_mass / (1.0 - q)).abs() < 1e-8, "q={q}");
        }
    }

    #[test]
    fn shape_constants_table() {
        let f = |m: DistributionModel| m.shape_f().unwrap();
        assert_eq!(f(DistributionModel::uniform(0.0, 1.0).unwrap()), 1.0);
        assert!((f(DistributionModel::standard_normal()) - 1.1658).abs() < 5e-5);
        assert!((f(DistributionModel::exponential(3.0).unwrap()) - 1.359).abs() < 5e-4);
        assert!((f(DistributionModel::Moyal) - 1.2414).abs() < 5e-4);
        assert!((f(DistributionModel::standard_lognormal()) - 1.4969).abs() < 5e-5);

        assert_eq!(DistributionModel::uniform(0.0, 1.0).unwrap().song_s(), 0.0);
        assert_eq!(DistributionModel::exponential(2.0).unwrap().song_s(), 1.0);
        assert_eq!(DistributionModel::standard_lognormal().song_s(), 1.5);
        // Var(W - ln W)/4 for W ~ χ²₁: (2 + π²/2 - 4)/4
        let s_moyal = (PI * PI / 2.0 - 2.0) / 4.0;
        assert!((DistributionModel::Moyal.song_s() - s_moyal).abs() < 1e-8);
    }

    #[test]
    fn f_dominates_one_and_tracks_song_measure() {
        for m in all_models() {
            let f = m.shape_f().unwrap();
            assert!(f >= 1.0);
            let s = m.song_s();
            if s <= 1.0 {
                let approx = 1.0 + s / 3.0;
                assert!(((f - approx) / f).abs() < 0.1, "{m}");
            }
        }
    }

    #[test]
    fn var_log_density_matches_quadrature() {
        for m in all_models() {
            let h = m.differential_entropy();
            let v = m.expectation(|x| (m.ln_pdf(x) + h).powi(2)).unwrap();
            assert!((v - m.var_log_density()).abs() < 1e-7, "{m}");
        }
    }
}
