//! Goodness-of-fit statistics used to validate the simulators.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic one-sample KS critical value `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Two-sample version of [`ks_critical`].
pub fn ks_critical_two_sample(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// `sup |F_n - F|` for a reference law that may carry atoms. `cdf` is
/// right-continuous and `cdf_left(y)` is `F(y-)`; for a continuous law pass
/// the same function twice.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64, cdf_left: impl Fn(f64) -> f64) -> f64 {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max((cdf_left(v) - below).abs()).max((upto - cdf(v)).abs());
        i = j;
    }
    d
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pearson statistic of `observed` against cell probabilities `probs`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

/// Upper `alpha` quantile of the chi-square law with `df` degrees of freedom.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// Jarque-Bera statistic `n/6 (S^2 + (K - 3)^2 / 4)`; asymptotically chi-square(2).
pub fn jarque_bera(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    n / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0)
}

/// Sample mean and unbiased variance; a single value has variance 0.
pub fn mean_and_variance(x: &[f64]) -> Option<(f64, f64)> {
    if x.is_empty() {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() == 1 {
        return Some((mean, 0.0));
    }
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    Some((mean, ss / (n - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::special::{norm_cdf, norm_quantile};

    #[test]
    fn critical_value_at_one_percent() {
        assert!((ks_critical(1, 0.01) - 1.627_624).abs() < 1e-6);
        assert!((ks_critical(10_000, 0.01) - 0.016_276).abs() < 1e-6);
    }

    #[test]
    fn uniform_sample_passes() {
        let mut r = derive_stream(1, 0);
        let xs: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        let d = ks_statistic(&xs, |y| y.clamp(0.0, 1.0), |y| y.clamp(0.0, 1.0));
        assert!(d < ks_critical(xs.len(), 0.01));
    }

    #[test]
    fn atom_is_not_penalised() {
        // Half the mass at 0, half uniform on (0, 1).
        let mut r = derive_stream(2, 0);
        let xs: Vec<f64> = (0..4000)
            .map(|_| if r.uniform() < 0.5 { 0.0 } else { r.uniform_open() })
            .collect();
        let f = |y: f64| if y < 0.0 { 0.0 } else { 0.5 + 0.5 * y.min(1.0) };
        let fl = |y: f64| if y <= 0.0 { 0.0 } else { 0.5 + 0.5 * y.min(1.0) };
        assert!(ks_statistic(&xs, f, fl) < ks_critical(xs.len(), 0.01));
        // Treating the law as continuous sees the whole jump.
        assert!(ks_statistic(&xs, f, f) > 0.4);
    }

    #[test]
    fn shifted_sample_fails() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0 + 0.1).collect();
        let d = ks_statistic(&xs, |y| y.clamp(0.0, 1.0), |y| y.clamp(0.0, 1.0));
        assert!((d - 0.1).abs() < 1e-3);
    }

    #[test]
    fn two_sample_distance() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample(&a, &b), 0.0);
        let c = [5.0, 6.0];
        assert_eq!(ks_two_sample(&a, &c), 1.0);
        let d = [2.5];
        assert_eq!(ks_two_sample(&a, &d), 0.5);
    }

    #[test]
    fn gaussian_jarque_bera_small() {
        // A 1% test rejects about 1 of 100 Gaussian samples.
        let crit = chi_square_critical(2, 0.01);
        let rejections = (0..100)
            .filter(|&s| {
                let mut r = derive_stream(s, 0);
                let xs: Vec<f64> = (0..2000).map(|_| norm_quantile(r.uniform_open())).collect();
                jarque_bera(&xs) > crit
            })
            .count();
        assert!(rejections <= 5, "{rejections} rejections");
        let mut r = derive_stream(3, 0);
        let xs: Vec<f64> = (0..5000).map(|_| norm_quantile(r.uniform_open())).collect();
        let expo: Vec<f64> = (0..5000).map(|_| -r.uniform_open().ln()).collect();
        assert!(jarque_bera(&expo) > 100.0);
        assert!(ks_statistic(&xs, norm_cdf, norm_cdf) < ks_critical(5000, 0.01));
    }

    #[test]
    fn chi_square_exact_fit_is_zero() {
        assert_eq!(chi_square(&[25, 25, 50], &[0.25, 0.25, 0.5]), 0.0);
        assert!((chi_square_critical(2, 0.01) - 9.2103).abs() < 1e-4);
    }

    #[test]
    fn moments() {
        assert_eq!(mean_and_variance(&[]), None);
        assert_eq!(mean_and_variance(&[3.0]), Some((3.0, 0.0)));
        let (m, v) = mean_and_variance(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }
}
