//! Distributional checks of the samplers against closed-form laws.

use htlab::dist::{
    frechet_cdf, quantile_b_n, sample_stable, stable_reference_sample, HeavyTailLaw, Rng, SignMode, StableLaw,
};
use htlab::limits::{ks_distance, ks_two_sample, sorted};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

#[test]
fn half_stable_matches_levy_cdf() {
    // Index 1/2, skewness 1, unit scale is the unit Levy law.
    let law = StableLaw::standard(0.5, 1.0);
    let mut rng = Rng::new(11);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_stable(&law, &mut rng).unwrap()).collect();
    let d = ks_distance(&sorted(&xs), |x| if x <= 0.0 { 0.0 } else { erfc((0.5 / x).sqrt()) }).unwrap();
    assert!(d < 0.015, "KS {d}");
}

#[test]
fn symmetric_stable_index_one_is_cauchy() {
    let law = StableLaw::standard(1.0, 0.0);
    let mut rng = Rng::new(12);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_stable(&law, &mut rng).unwrap()).collect();
    let d = ks_distance(&sorted(&xs), |x| 0.5 + x.atan() / std::f64::consts::PI).unwrap();
    assert!(d < 0.015, "KS {d}");
}

/// Scale of the stable limit of `k^{-1/a}` times a sum of `k` unit Pareto
/// variables with index `a < 1`.
fn pareto_limit_scale(a: f64) -> f64 {
    (gamma(1.0 - a) * (std::f64::consts::FRAC_PI_2 * a).cos()).powf(1.0 / a)
}

#[test]
fn generalized_clt_reference_matches_stable_sampler() {
    for (k, tail) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        // With tail index equal to alpha the summands are the plain magnitudes.
        let law = HeavyTailLaw::pareto(tail);
        let reference = stable_reference_sample(tail, 5000, 100_000, &law, &Rng::new(100 + k as u64)).unwrap();
        let stable = StableLaw {
            scale: pareto_limit_scale(tail),
            ..StableLaw::standard(tail, 1.0)
        };
        let mut rng = Rng::new(200 + k as u64);
        let direct = sorted(&(0..200_000).map(|_| sample_stable(&stable, &mut rng).unwrap()).collect::<Vec<_>>());
        // Summands below 1 are missing from the Pareto law, which lowers the
        // normalized sum by a / (1 - a) k^{1 - 1/a} relative to the limit.
        let drift = tail / (1.0 - tail) * 100_000f64.powf(1.0 - 1.0 / tail);
        let shifted: Vec<f64> = direct.iter().map(|x| x - drift).collect();
        let d = ks_two_sample(&sorted(&reference), &shifted).unwrap();
        assert!(d <= 0.02, "tail {tail}: KS {d}");
    }
}

#[test]
fn inverse_transform_matches_ccdf() {
    let laws = [
        HeavyTailLaw::pareto(0.7),
        HeavyTailLaw::pareto(1.5).with_log_power(1.0),
        HeavyTailLaw::pareto(1.2).with_sign(SignMode::Positive).with_shift(-3.0),
        HeavyTailLaw::pareto(0.4).with_log_power(-0.5).with_sign(SignMode::TwoPoint(0.3)),
    ];
    let grid = [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0];
    let m = 100_000;
    for (k, law) in laws.iter().enumerate() {
        let sampler = law.sampler().unwrap();
        let mut rng = Rng::new(300 + k as u64);
        let draws: Vec<f64> = (0..m).map(|_| (sampler.sample(&mut rng) - law.shift).abs()).collect();
        for x in grid {
            let q = law.ccdf(x);
            let frac = draws.iter().filter(|d| **d > x).count() as f64 / m as f64;
            let sd = (q * (1.0 - q) / m as f64).sqrt();
            assert!((frac - q).abs() <= 3.0 * sd + 1e-12, "law {k} x {x}: {frac} vs {q}");
        }
    }
}

#[test]
fn sample_maximum_follows_frechet() {
    // b_n is the quantile at 2/(n(n+1)), the count of stored entries.
    let alpha = 1.3;
    let law = HeavyTailLaw::pareto(alpha);
    let sampler = law.sampler().unwrap();
    let n = 40;
    let entries = n * (n + 1) / 2;
    let b_n = quantile_b_n(&law, n);
    let mut rng = Rng::new(400);
    let maxima: Vec<f64> = (0..4000)
        .map(|_| (0..entries).map(|_| sampler.magnitude(&mut rng)).fold(0.0, f64::max) / b_n)
        .collect();
    let d = ks_distance(&sorted(&maxima), |x| frechet_cdf(alpha, x)).unwrap();
    assert!(d < 0.04, "KS {d}");
}
