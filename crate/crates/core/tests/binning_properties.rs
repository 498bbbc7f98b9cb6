use ampbound_core::cost::{cost_scan, default_grid};
use ampbound_core::histogram::{bin_width, mu_entries_per_bin};
use ampbound_core::renyi::{discrete_renyi, renyi_of_probabilities, weighted_entries_per_bin, RenyiSpectrum};
use ampbound_core::{DistributionModel, Histogram};
use proptest::prelude::*;

fn models() -> Vec<DistributionModel> {
    vec![
        DistributionModel::uniform(0.0, 1.0).unwrap(),
        DistributionModel::standard_normal(),
        DistributionModel::moyal(),
        DistributionModel::standard_lognormal(),
        DistributionModel::exponential(1.0).unwrap(),
    ]
}

fn binned(model: &DistributionModel, n: usize, m: f64, seed: u64) -> Histogram {
    let s = model.sample(n, seed).unwrap();
    let delta = bin_width(model.differential_entropy(), n, m).unwrap();
    Histogram::build_from_min(&s, delta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn histogram_entropy_is_capped(which in 0usize..5, m in 2.0f64..4.0, n in 1000usize..20_000, seed in any::<u64>()) {
        let model = &models()[which];
        let h = binned(model, n, m, seed);
        let bits = h.shannon_entropy().unwrap() / std::f64::consts::LN_2;
        prop_assert!(bits <= 0.5 * (n as f64).log2() + 0.05, "{} bits for n={}", bits, n);
    }

    #[test]
    fn counts_are_conserved(which in 0usize..5, delta in 0.01f64..2.0, offset in 0.0f64..3.0, seed in any::<u64>()) {
        let s = models()[which].sample(500, seed).unwrap();
        let (lo, _) = s.range().unwrap();
        let h = Histogram::build(&s, delta, lo - offset).unwrap();
        prop_assert_eq!(h.counts().iter().sum::<u64>(), 500);
    }

    #[test]
    fn bins_cover_at_least_the_uniform_count(which in 0usize..5, m in 2.0f64..3.0, seed in any::<u64>()) {
        let n = 10_000;
        let h = binned(&models()[which], n, m, seed);
        let uniform_bins = (n as f64).powf(1.0 / m);
        prop_assert!(h.n_bins() as f64 >= uniform_bins - 1.0);
        if which == 0 {
            prop_assert!((h.n_bins() as f64 - uniform_bins).abs() <= 1.0 + 1e-9);
        } else {
            prop_assert!(h.n_bins() as f64 > 1.5 * uniform_bins);
        }
    }

    #[test]
    fn renyi_orders_never_cross(which in 0usize..5, m in 1.5f64..3.5, seed in any::<u64>()) {
        let h = binned(&models()[which], 3000, m, seed);
        let r: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|&q| discrete_renyi(&h, q).unwrap()).collect();
        prop_assert!(r.windows(2).all(|w| w[0] >= w[1]), "{:?}", r);
        let occupied = h.occupied_bins() as f64;
        prop_assert!(weighted_entries_per_bin(&h).unwrap() >= h.n_total() as f64 / occupied * (1.0 - 1e-12));
    }
}

#[test]
fn uniform_entropy_round_trip() {
    let u = DistributionModel::uniform(0.0, 1.0).unwrap();
    for (i, n) in [2_000usize, 10_000, 100_000].into_iter().enumerate() {
        for m in [2.0, 2.5, 3.0] {
            let h = binned(&u, n, m, 40 + i as u64).shannon_entropy().unwrap();
            let target = (n as f64).ln() / m;
            assert!((h - target).abs() <= 5.0 / (n as f64).sqrt(), "n={n} M={m} {h} vs {target}");
        }
    }
}

#[test]
fn entropy_law_holds_for_all_models() {
    let n = 100_000;
    for (i, model) in models().iter().enumerate() {
        for m in [2.0, 2.5, 3.0] {
            let mb = binned(model, n, m, 7 + i as u64).m_from_entropy().unwrap();
            assert!((mb - m).abs() <= 0.1, "{} M={m} M_B={mb}", model.name());
        }
    }
}

#[test]
fn binning_width_is_recovered_from_entropy() {
    let n = 100_000;
    for (i, model) in models().iter().enumerate() {
        let h_model = model.differential_entropy();
        let delta = bin_width(h_model, n, 2.5).unwrap();
        let hist = binned(model, n, 2.5, 90 + i as u64);
        let recovered = (h_model - hist.shannon_entropy().unwrap()).exp();
        assert!((recovered / delta - 1.0).abs() < 0.02, "{} {recovered} vs {delta}", model.name());
    }
}

/// Exact bin probabilities at width `delta` over a range holding all but a
/// negligible fraction of the mass.
fn model_bin_probabilities(model: &DistributionModel, delta: f64) -> Vec<f64> {
    let (lo, hi) = match model.name() {
        "uniform" => (0.0, 1.0),
        "normal" => (-12.0, 12.0),
        "moyal" => (-8.0, 80.0),
        "lognormal" => (0.0, 5000.0),
        _ => (0.0, 60.0),
    };
    let n_bins = ((hi - lo) / delta).ceil() as usize;
    (0..n_bins)
        .map(|i| model.interval_mass(lo + i as f64 * delta, lo + (i + 1) as f64 * delta))
        .collect()
}

#[test]
fn renyi_shift_converges_to_differential() {
    let n = 100_000;
    let mut failures = Vec::new();
    for (i, model) in models().iter().enumerate() {
        let delta = bin_width(model.differential_entropy(), n, 2.0).unwrap();
        let probs = model_bin_probabilities(model, delta);
        for q in [0.5, 2.0] {
            let exact = model.renyi_differential(q).unwrap();
            let est = renyi_of_probabilities(&probs, q).unwrap() + delta.ln();
            if (est - exact).abs() > 0.03 {
                failures.push(format!("{} q={q}: {est} vs {exact}", model.name()));
            }
        }
        // Sampled histograms agree at q = 2; low orders are dominated by
        // the unsampled tails at this size.
        let hist = binned(model, n, 2.0, 300 + i as u64);
        let spec = RenyiSpectrum::of(&hist, &[2.0]).unwrap();
        let est = spec.continuous_estimates()[0];
        let exact = model.renyi_differential(2.0).unwrap();
        if (est - exact).abs() > 0.03 {
            failures.push(format!("{} sampled q=2: {est} vs {exact}", model.name()));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn weighted_entries_follow_shape_factor() {
    let n = 100_000;
    for (i, model) in models().iter().enumerate() {
        let f = model.shape_f().unwrap();
        for m in [2.0, 2.5, 3.0] {
            let hist = binned(model, n, m, 500 + i as u64);
            let predicted = n as f64 * (-hist.shannon_entropy().unwrap()).exp() * f;
            let measured = weighted_entries_per_bin(&hist).unwrap();
            assert!((measured / predicted - 1.0).abs() < 0.05, "{} M={m}: {measured} vs {predicted}", model.name());
            assert!(measured >= mu_entries_per_bin(n, m).unwrap() * 0.99 || i == 0);
        }
    }
}

#[test]
fn cost_ordering_at_three() {
    let order = [
        DistributionModel::uniform(0.0, 1.0).unwrap(),
        DistributionModel::standard_normal(),
        DistributionModel::moyal(),
        DistributionModel::standard_lognormal(),
    ];
    let medians: Vec<f64> = order
        .iter()
        .map(|model| {
            let mut c: Vec<f64> = (0..20)
                .map(|seed| {
                    let s = model.sample(10_000, seed).unwrap();
                    cost_scan(&s, model.differential_entropy(), &default_grid())
                        .unwrap()
                        .normalized_at(3.0)
                        .unwrap()
                })
                .collect();
            c.sort_unstable_by(f64::total_cmp);
            0.5 * (c[9] + c[10])
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[0] < w[1]), "{medians:?}");
}

#[test]
fn fitted_a_does_not_depend_on_normal_width() {
    let fits: Vec<f64> = [0.5, 1.0, 3.0]
        .iter()
        .map(|&sigma| {
            let model = DistributionModel::normal(0.0, sigma).unwrap();
            let mut a: Vec<f64> = (0..9)
                .map(|seed| {
                    let s = model.sample(10_000, seed).unwrap();
                    cost_scan(&s, model.differential_entropy(), &default_grid()).unwrap().fitted_a.unwrap()
                })
                .collect();
            a.sort_unstable_by(f64::total_cmp);
            a[4]
        })
        .collect();
    for a in &fits {
        assert!((a - fits[1]).abs() < 0.01, "{fits:?}");
    }
}
