//! Polygamma functions used by the kNN estimators.
//!
//! Trigamma uses upward recurrence to push the argument above 10 and then
//! the asymptotic series; absolute error is below 1e-13 for x > 0.

/// Digamma ψ(x) for x > 0.
pub fn digamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    statrs::function::gamma::digamma(x)
}

/// Trigamma ψ₁(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0
                        - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + series
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-13);
        assert!((digamma(0.5) + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-13);
        // ψ(n) = H_{n-1} - γ
        let h9: f64 = (1..10).map(|i| 1.0 / i as f64).sum();
        assert!((digamma(10.0) - (h9 - EULER_GAMMA)).abs() < 1e-13);
        assert!(digamma(0.0).is_nan());
    }

    #[test]
    fn trigamma_known_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-13);
        assert!((trigamma(0.5) - 3.0 * pi2_6).abs() < 1e-12);
        // ψ₁(4) = π²/6 − 1 − 1/4 − 1/9; quoted as 0.284 for k = 4
        assert!((trigamma(4.0) - (pi2_6 - 1.0 - 0.25 - 1.0 / 9.0)).abs() < 1e-13);
        assert!((trigamma(1.0) - 1.645).abs() < 5e-4);
        assert!((trigamma(4.0) - 0.284).abs() < 5e-4);
    }

    #[test]
    fn recurrence_holds() {
        for &x in &[0.3, 1.7, 5.9, 6.1, 42.0] {
            assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-12);
            assert!((trigamma(x) - trigamma(x + 1.0) - 1.0 / (x * x)).abs() < 1e-12);
        }
    }
}
