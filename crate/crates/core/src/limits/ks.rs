use super::LimitsError;

fn check_sorted(x: &[f64], what: &str) -> Result<(), LimitsError> {
    if x.is_empty() {
        return Err(LimitsError::EmptySample(what.into()));
    }
    if x.iter().any(|v| v.is_nan()) || x.windows(2).any(|w| w[0] > w[1]) {
        return Err(LimitsError::Unsorted(what.into()));
    }
    Ok(())
}

/// `sup_x |F_m(x) - F(x)|` for the empirical cdf `F_m` of a sorted sample,
/// checking both sides of every jump.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, LimitsError> {
    check_sorted(sample, "sample")?;
    let m = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

/// Two-sample statistic `sup_x |F_a(x) - F_b(x)|`; symmetric in its
/// arguments. Ties are stepped over together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, LimitsError> {
    check_sorted(a, "first sample")?;
    check_sorted(b, "second sample")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Empirical cdf of a sorted sample: fraction of points `<= x`.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Sorts a copy, placing NaN last.
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}
