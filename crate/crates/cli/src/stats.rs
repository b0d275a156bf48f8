//! Small statistics kit for the experiment reports: means with batch-means
//! standard errors, sectioned quantile errors, least-squares slopes, empirical
//! characteristic functions, and a Kolmogorov-Smirnov distance to the
//! standard normal.

/// Number of batches for a sample of size `n`: at least 30, growing like
/// sqrt(n) so batch length and batch count both diverge.
pub fn batch_count(n: usize) -> usize {
    let root = (n as f64).sqrt().floor() as usize;
    root.max(30).min(n.max(1))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Splits `0..n` into `parts` contiguous ranges whose lengths differ by at
/// most one.
fn balanced_ranges(n: usize, parts: usize) -> impl Iterator<Item = core::ops::Range<usize>> {
    let base = n / parts;
    let extra = n % parts;
    let mut start = 0usize;
    (0..parts).map(move |i| {
        let len = base + usize::from(i < extra);
        let range = start..start + len;
        start += len;
        range
    })
}

/// Mean together with a batch-means standard error. Replicas are grouped in
/// replica order into `batch_count(n)` contiguous batches; the SE is the
/// spread of batch averages over sqrt(batches). With fewer than two usable
/// batches the plain iid standard error is reported instead.
pub fn mean_with_batch_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if n == 1 {
        return (xs[0], f64::INFINITY);
    }
    let b = batch_count(n);
    if b < 2 || n < 2 * b {
        let se = (sample_variance(xs) / n as f64).sqrt();
        return (mean(xs), se);
    }
    let overall = mean(xs);
    let mut spread = 0.0;
    for range in balanced_ranges(n, b) {
        let avg = mean(&xs[range]);
        spread += (avg - overall) * (avg - overall);
    }
    let se = (spread / (b as f64 * (b - 1) as f64)).sqrt();
    (overall, se)
}

/// Linear-interpolation quantile on a sorted copy (the common "type 7" rule:
/// index h = q(n-1), interpolate between the straddling order statistics).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!((0.0..=1.0).contains(&q), "quantile level out of range");
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Quantile with a sectioning standard error: the sample is cut into
/// `batch_count(n)` contiguous sections in replica order, the quantile is
/// taken per section, and the SE is the spread of section quantiles over
/// sqrt(sections). The reported point value is the full-sample quantile.
pub fn quantile_with_section_se(xs: &[f64], q: f64) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let point = quantile(xs, q);
    let b = batch_count(n);
    if b < 2 || n < 2 * b {
        return (point, f64::INFINITY);
    }
    let sections: Vec<f64> = balanced_ranges(n, b).map(|r| quantile(&xs[r], q)).collect();
    let center = mean(&sections);
    let spread: f64 = sections.iter().map(|s| (s - center) * (s - center)).sum();
    let se = (spread / (b as f64 * (b - 1) as f64)).sqrt();
    (point, se)
}

/// Standard errors add in quadrature when two independent estimates are
/// compared.
pub fn combined_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub ci95_half_width: f64,
}

/// Ordinary least squares of y on x with the usual residual-based standard
/// error for the slope; the 95% half-width uses the normal quantile 1.96,
/// adequate for the replica counts used here.
pub fn ols_slope(x: &[f64], y: &[f64]) -> SlopeFit {
    assert_eq!(x.len(), y.len(), "mismatched regression inputs");
    let n = x.len();
    assert!(n >= 2, "need at least two points for a slope");
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    assert!(sxx > 0.0, "regression abscissae are all equal");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n == 2 {
        0.0
    } else {
        let mut rss = 0.0;
        for i in 0..n {
            let r = y[i] - intercept - slope * x[i];
            rss += r * r;
        }
        (rss / (n - 2) as f64 / sxx).sqrt()
    };
    SlopeFit { slope, intercept, stderr, ci95_half_width: 1.96 * stderr }
}

/// Standard normal distribution function via the complementary error
/// function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and the
/// standard normal.
pub fn ks_statistic_standard_normal(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    assert!(n > 0, "KS of an empty sample");
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = standard_normal_cdf(x);
        d = d.max(f - i as f64 / n as f64);
        d = d.max((i + 1) as f64 / n as f64 - f);
    }
    d
}

/// Asymptotic 1% critical value of the KS statistic under the null.
pub fn ks_critical_1pct(n: u64) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Asymptotic standard deviation of sqrt(n) * KS under the null (the
/// Kolmogorov law has mean ~0.8687 and SD ~0.2603).
pub const KS_NULL_SD: f64 = 0.2603;

/// Empirical characteristic function at one frequency: (mean cos(l x),
/// mean sin(l x)) with batch-means standard errors for both parts.
pub struct EcfPoint {
    pub real: f64,
    pub real_se: f64,
    pub imag: f64,
    pub imag_se: f64,
}

pub fn ecf(xs: &[f64], lambda: f64) -> EcfPoint {
    let cos: Vec<f64> = xs.iter().map(|x| (lambda * x).cos()).collect();
    let sin: Vec<f64> = xs.iter().map(|x| (lambda * x).sin()).collect();
    let (real, real_se) = mean_with_batch_se(&cos);
    let (imag, imag_se) = mean_with_batch_se(&sin);
    EcfPoint { real, real_se, imag, imag_se }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn batch_count_respects_floor_and_growth() {
        assert_eq!(batch_count(10), 10);
        assert_eq!(batch_count(100), 30);
        assert_eq!(batch_count(900), 30);
        assert_eq!(batch_count(10_000), 100);
    }

    #[test]
    fn batch_se_matches_iid_scale_on_white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| rng.random_range(-1.0..1.0_f64))
            .collect();
        let (m, se) = mean_with_batch_se(&xs);
        // mean ~ 0 with SD sqrt(1/3)/sqrt(n) ~ 0.0041
        assert!(m.abs() < 0.02, "mean {m}");
        let iid = (sample_variance(&xs) / xs.len() as f64).sqrt();
        assert!(se > 0.5 * iid && se < 2.0 * iid, "se {se} vs iid {iid}");
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((quantile(&xs, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile(&xs, 0.25) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn quantile_section_se_shrinks_with_replicas() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let small: Vec<f64> = (0..400).map(|_| rng.random_range(0.0..1.0_f64)).collect();
        let big: Vec<f64> = (0..40_000).map(|_| rng.random_range(0.0..1.0_f64)).collect();
        let (_, se_small) = quantile_with_section_se(&small, 0.9);
        let (_, se_big) = quantile_with_section_se(&big, 0.9);
        assert!(se_big < se_small, "{se_big} !< {se_small}");
    }

    #[test]
    fn slope_is_exact_on_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [5.0, 7.0, 9.0, 11.0];
        let fit = ols_slope(&x, &y);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn slope_stderr_reflects_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x: Vec<f64> = (0..200).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| 1.5 * xi - 0.5 + rng.random_range(-0.1..0.1))
            .collect();
        let fit = ols_slope(&x, &y);
        assert!((fit.slope - 1.5).abs() < 5.0 * fit.stderr.max(1e-6));
        assert!(fit.stderr > 0.0);
    }

    #[test]
    fn normal_cdf_hits_known_points() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((standard_normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((standard_normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-12);
    }

    #[test]
    fn ks_accepts_normal_and_rejects_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 4000usize;
        // Box-Muller normals.
        let normals: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random_range(1e-12..1.0);
                let v: f64 = rng.random_range(0.0..core::f64::consts::TAU);
                (-2.0 * u.ln()).sqrt() * v.cos()
            })
            .collect();
        let uniforms: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let crit = ks_critical_1pct(n as u64);
        assert!(ks_statistic_standard_normal(&normals) < crit);
        assert!(ks_statistic_standard_normal(&uniforms) > crit);
    }

    #[test]
    fn ecf_of_symmetric_sample_has_tiny_imaginary_part() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i as f64) - 499.5) / 100.0).collect();
        let pt = ecf(&xs, 0.7);
        assert!(pt.imag.abs() < 1e-12);
        assert!(pt.real.abs() <= 1.0 + 1e-12);
        assert!(pt.real_se.is_finite());
    }

    #[test]
    fn combined_se_is_quadrature() {
        assert!((combined_se(3.0, 4.0) - 5.0).abs() < 1e-15);
    }
}
