use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use radial_tree::stats::{mean_and_se, uniform_circle_cdf, ScaledBeta};
use radial_tree::*;
use rand::SeedableRng;
use rand_distr::{Beta, Distribution};

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite rule on [0, 1] with panels [2^-(k+1), 2^-k], resolving the
/// non-smooth behaviour at 0.
fn integrate_unit(f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(20);
    let mut total = 0.0;
    for k in 0..60 {
        let (hi, lo) = (0.5f64.powi(k), 0.5f64.powi(k + 1));
        let (mid, half) = ((hi + lo) / 2.0, (hi - lo) / 2.0);
        total += half
            * rule
                .iter()
                .map(|&(x, w)| w * f(mid + half * x))
                .sum::<f64>();
    }
    total
}

/// ∫_0^x t^(a-1) (1-t)^(b-1) dt for x ≤ 1/2, after t = x·v^(1/a).
fn lower_integral(a: f64, b: f64, x: f64) -> f64 {
    x.powf(a) / a * integrate_unit(|v| (1.0 - x * v.powf(1.0 / a)).powf(b - 1.0))
}

fn oracle_beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    let total = lower_integral(a, b, 0.5) + lower_integral(b, a, 0.5);
    if x <= 0.5 {
        lower_integral(a, b, x) / total
    } else {
        1.0 - lower_integral(b, a, 1.0 - x) / total
    }
}

const SHAPES: [f64; 4] = [0.5, 1.0, 2.74, 5.38];

#[test]
fn quadrature_oracle_sanity() {
    // Beta(1,1) is uniform, Beta(2,1) has CDF x²
    for x in [0.1, 0.37, 0.5, 0.81] {
        assert!((oracle_beta_cdf(1.0, 1.0, x) - x).abs() < 1e-13);
        assert!((oracle_beta_cdf(2.0, 1.0, x) - x * x).abs() < 1e-13);
    }
    // arcsine law for (1/2, 1/2)
    let x: f64 = 0.3;
    assert!((oracle_beta_cdf(0.5, 0.5, x) - 2.0 / PI * x.sqrt().asin()).abs() < 1e-12);
}

#[test]
fn beta_cdf_matches_quadrature() {
    for &a in &SHAPES {
        for &b in &SHAPES {
            let sb = ScaledBeta::new(a, b);
            for k in 1..20 {
                let u = k as f64 / 20.0;
                let got = sb.cdf(u * TAU);
                let want = oracle_beta_cdf(a, b, u);
                assert!(
                    (got - want).abs() < 1e-8,
                    "a={a} b={b} u={u}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn symmetric_beta_has_median_pi() {
    for &a in &SHAPES {
        assert!((ScaledBeta::new(a, a).cdf(PI) - 0.5).abs() < 1e-8);
    }
}

#[test]
fn moment_fit_recovers_parameters() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for (a, b) in [(2.74, 5.38), (1.0, 1.0), (0.5, 2.0)] {
        let law = Beta::new(a, b).unwrap();
        let fits: Vec<BetaFit> = (0..100)
            .map(|_| {
                let xs: Vec<f64> = (0..10_000).map(|_| TAU * law.sample(&mut rng)).collect();
                beta_moment_fit(&xs).unwrap()
            })
            .collect();
        let alphas: Vec<f64> = fits.iter().map(|f| f.alpha_hat).collect();
        let betas: Vec<f64> = fits.iter().map(|f| f.beta_hat).collect();
        // spread of one fit = SE of the mean times √100
        let (ma, sea) = mean_and_se(&alphas);
        let (mb, seb) = mean_and_se(&betas);
        let (sd_a, sd_b) = (sea * 10.0, seb * 10.0);
        assert!(
            (fits[0].alpha_hat - a).abs() < 3.0 * sd_a,
            "alpha {} vs {a} (sd {sd_a})",
            fits[0].alpha_hat
        );
        assert!(
            (fits[0].beta_hat - b).abs() < 3.0 * sd_b,
            "beta {} vs {b} (sd {sd_b})",
            fits[0].beta_hat
        );
        assert!((ma - a).abs() < 3.0 * sea, "mean alpha {ma} vs {a}");
        assert!((mb - b).abs() < 3.0 * seb, "mean beta {mb} vs {b}");
    }
}

#[test]
fn two_point_fit_is_exact() {
    let fit = beta_moment_fit(&[PI / 2.0, 3.0 * PI / 2.0]).unwrap();
    assert!((fit.alpha_hat - 1.5).abs() < 1e-12);
    assert!((fit.beta_hat - 1.5).abs() < 1e-12);
}

fn brute_ks(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    sample
        .iter()
        .map(|&x| {
            let le = sample.iter().filter(|&&y| y <= x).count() as f64 / n;
            let lt = sample.iter().filter(|&&y| y < x).count() as f64 / n;
            let f = cdf(x);
            (le - f).abs().max((f - lt).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn ks_examples() {
    let d = ks_statistic(&[PI], uniform_circle_cdf).unwrap();
    assert!((d - 0.5).abs() < 1e-15);
    // a sample at the quantile midpoints is as close as possible
    let n = 50;
    let xs: Vec<f64> = (0..n).map(|i| TAU * (i as f64 + 0.5) / n as f64).collect();
    assert!((ks_statistic(&xs, uniform_circle_cdf).unwrap() - 0.5 / n as f64).abs() < 1e-12);
    assert!(ks_statistic(&[], uniform_circle_cdf).is_err());
}

#[test]
fn uniform_sample_passes_ks() {
    use rand::Rng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * TAU).collect();
    let d = ks_statistic(&xs, uniform_circle_cdf).unwrap();
    assert!(d < 1.36 / (xs.len() as f64).sqrt(), "D = {d}");
}

#[test]
fn empirical_distribution_examples() {
    // 2 of each of 1..=3, one 5
    let p = empirical_distribution(&[1, 2, 3, 1, 2, 3, 5], 0..=5).unwrap();
    let want = [0.0, 2.0, 2.0, 2.0, 0.0, 1.0].map(|c| c / 7.0);
    assert_eq!(p, want);
    assert!(empirical_distribution(&[6], 0..=5).is_err());
    assert!(empirical_distribution(&[], 0..=5).is_err());
}

proptest! {
    #[test]
    fn ks_matches_brute_force(xs in prop::collection::vec(0.0f64..TAU, 1..60), a in 0.5f64..6.0, b in 0.5f64..6.0) {
        let sb = ScaledBeta::new(a, b);
        let d = ks_statistic(&xs, |x| sb.cdf(x)).unwrap();
        prop_assert!((d - brute_ks(&xs, |x| sb.cdf(x))).abs() < 1e-12);
    }

    #[test]
    fn beta_cdf_is_monotone(a in 0.3f64..8.0, b in 0.3f64..8.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let sb = ScaledBeta::new(a, b);
        let (lo, hi) = (u.min(v) * TAU, u.max(v) * TAU);
        prop_assert!(sb.cdf(lo) <= sb.cdf(hi) + 1e-15);
        prop_assert!((0.0..=1.0).contains(&sb.cdf(lo)));
        prop_assert_eq!(sb.cdf(0.0), 0.0);
        prop_assert_eq!(sb.cdf(TAU), 1.0);
    }

    #[test]
    fn empirical_distribution_sums_to_one(vals in prop::collection::vec(0usize..=5, 1..200)) {
        let p = empirical_distribution(&vals, 0..=5).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_fit_matches_formula(xs in prop::collection::vec(0.01f64..6.27, 2..40)) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        if v > 1e-9 && v < m * (TAU - m) {
            let fit = beta_moment_fit(&xs).unwrap();
            let c = m * (TAU - m) / v - 1.0;
            prop_assert!((fit.alpha_hat - m / TAU * c).abs() <= 1e-9 * fit.alpha_hat.max(1.0));
            prop_assert!((fit.beta_hat - (TAU - m) / TAU * c).abs() <= 1e-9 * fit.beta_hat.max(1.0));
        }
    }
}
