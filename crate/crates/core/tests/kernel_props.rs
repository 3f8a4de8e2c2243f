use proptest::prelude::*;
use sticky::kernel::{
    atom_mass, density, gaussian_ratio, kernel_density, transition_cdf, transition_cdf_left, KernelQuery,
    TransitionSampler, ATOM_MASS_PER_RHO,
};
use sticky::quad::{self, QuadOptions};
use sticky::special::norm_cdf;
use sticky::stats::{ks_critical, ks_statistic};
use sticky::derive_stream;

fn p(t: f64, x: f64, y: f64, rho: f64) -> f64 {
    density(t, x, y, rho).unwrap()
}

/// `∫ f` over the real line with breakpoints, tails mapped with width `scale`.
fn integrate_real(f: impl Fn(f64) -> f64, breaks: &[f64], scale: f64) -> f64 {
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_panels: 4000,
    };
    let mut b = breaks.to_vec();
    b.sort_by(f64::total_cmp);
    b.dedup();
    let mut total = quad::integrate_lower(&f, b[0], scale, opts).unwrap().value;
    for w in b.windows(2) {
        total += quad::integrate(&f, w[0], w[1], opts).unwrap().value;
    }
    total + quad::integrate_upper(&f, *b.last().unwrap(), scale, opts).unwrap().value
}

#[test]
fn total_mass_is_one() {
    for &t in &[0.1f64, 1.0, 5.0] {
        for &x in &[0.0, 0.5, 2.0] {
            for &rho in &[0.5, 1.0, 2.0] {
                let cont = integrate_real(|y| 2.0 * p(t, x, y, rho), &[0.0, x], t.sqrt());
                let total = cont + atom_mass(rho) * p(t, x, 0.0, rho);
                assert!((total - 1.0).abs() <= 1e-6, "t={t} x={x} rho={rho}: {total}");
            }
        }
    }
}

#[test]
fn atom_constant_is_linear() {
    for &rho in &[0.1, 1.0, 10.0] {
        assert_eq!(atom_mass(rho) / rho, ATOM_MASS_PER_RHO);
    }
}

#[test]
fn infinite_stickiness_keeps_mass_at_zero() {
    let mut prev = 0.0;
    for &rho in &[1.0, 10.0, 100.0, 1e4, 1e6] {
        let m = atom_mass(rho) * p(1.0, 0.0, 0.0, rho);
        assert!(m > prev);
        prev = m;
    }
    assert!((1.0 - prev).abs() < 1e-5, "{prev}");
}

#[test]
fn chapman_kolmogorov() {
    let mut r = derive_stream(77, 0);
    for _ in 0..10 {
        let s = 0.1 + 1.9 * r.uniform();
        let t = 0.1 + 1.9 * r.uniform();
        let x = -2.0 + 4.0 * r.uniform();
        let y = -2.0 + 4.0 * r.uniform();
        let rho = 0.2 + 2.8 * r.uniform();
        let lhs = integrate_real(|z| 2.0 * p(s, x, z, rho) * p(t, z, y, rho), &[x, 0.0, y], (s + t).sqrt())
            + atom_mass(rho) * p(s, x, 0.0, rho) * p(t, 0.0, y, rho);
        let rhs = p(s + t, x, y, rho);
        assert!((lhs - rhs).abs() <= 1e-4, "{lhs} vs {rhs}");
    }
}

#[test]
fn cdf_scaling_law() {
    let mut r = derive_stream(78, 0);
    for &c in &[4.0f64, 9.0] {
        let sc = c.sqrt();
        for _ in 0..25 {
            let t = 0.05 + 2.0 * r.uniform();
            let x = -3.0 + 6.0 * r.uniform();
            let y = -3.0 + 6.0 * r.uniform();
            let rho = 0.1 + 3.0 * r.uniform();
            let a = transition_cdf(c * t, x, y, rho).unwrap();
            let b = transition_cdf(t, x / sc, y / sc, rho / sc).unwrap();
            assert!((a - b).abs() <= 1e-6, "c={c}: {a} vs {b}");
        }
    }
}

#[test]
fn gaussian_bound_on_scan_grid() {
    let mut sup: f64 = 0.0;
    for &rho in &[0.01, 1.0, 100.0] {
        for i in 0..50 {
            let t = 10f64.powf(-3.0 + 4.0 * i as f64 / 49.0);
            for j in 0..50 {
                let x = -5.0 + 10.0 * j as f64 / 49.0;
                for k in 0..50 {
                    let y = -5.0 + 10.0 * k as f64 / 49.0;
                    let v = gaussian_ratio(&KernelQuery::new(t, x, y, rho).unwrap());
                    assert!(v.is_finite() && v >= 0.0);
                    sup = sup.max(v);
                }
            }
        }
    }
    assert!(sup <= 2.0, "sup {sup}");
}

#[test]
fn semigroup_bound_independent_of_stickiness() {
    // h = 1{1 < |y| < 2}, λ(|h|) = 2.
    for &rho in &[0.01, 1.0, 100.0] {
        for &t in &[0.01f64, 0.1, 1.0, 10.0] {
            for k in 0..11 {
                let x = -5.0 + k as f64;
                let mass = (transition_cdf_left(t, x, 2.0, rho).unwrap() - transition_cdf(t, x, 1.0, rho).unwrap())
                    + (transition_cdf_left(t, x, -1.0, rho).unwrap() - transition_cdf(t, x, -2.0, rho).unwrap());
                assert!(mass.abs() <= 2.0 * 2.0 / t.sqrt());
            }
        }
    }
}

#[test]
fn vanishing_stickiness_is_brownian() {
    for &y in &[-1.5, -0.5, 0.5, 1.0, 2.5] {
        let f = transition_cdf(1.0, 1.0, y, 1e-4).unwrap();
        assert!((f - norm_cdf(y - 1.0)).abs() < 1e-2, "y={y}");
    }
}

#[test]
fn far_upper_tail() {
    for &t in &[0.1f64, 1.0, 5.0] {
        for &x in &[-2.0, 0.0, 0.5, 2.0] {
            assert!(transition_cdf(t, x, 10.0 * t.sqrt() + x.abs(), 1.0).unwrap() >= 1.0 - 1e-6);
        }
    }
}

#[test]
fn zero_frequency_matches_atom() {
    let s = TransitionSampler::new(1.0, 1.0).unwrap();
    let mut r = derive_stream(5, 0);
    let n = 100_000;
    let zeros = (0..n).filter(|_| s.sample(0.0, &mut r).unwrap() == 0.0).count() as f64;
    let pa = atom_mass(1.0) * p(1.0, 0.0, 0.0, 1.0);
    let se = (pa * (1.0 - pa) / n as f64).sqrt();
    assert!((zeros / n as f64 - pa).abs() <= 3.0 * se, "{} vs {pa}", zeros / n as f64);
}

#[test]
fn sampler_matches_own_cdf() {
    let s = TransitionSampler::new(1.0, 1.0).unwrap();
    let mut r = derive_stream(6, 0);
    let xs: Vec<f64> = (0..100_000).map(|_| s.sample(0.5, &mut r).unwrap()).collect();
    let d = ks_statistic(&xs, |y| s.cdf(0.5, y), |y| s.cdf_left(0.5, y));
    assert!(d <= ks_critical(xs.len(), 0.01), "KS {d}");
}

proptest! {
    #[test]
    fn symmetric_in_endpoints(t in 0.01f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0, rho in 0.01f64..10.0) {
        let a = kernel_density(&KernelQuery::new(t, x, y, rho).unwrap());
        let b = kernel_density(&KernelQuery::new(t, y, x, rho).unwrap());
        prop_assert!((a - b).abs() <= 1e-15 * a.max(1e-300));
        prop_assert!(a >= 0.0 && a.is_finite());
    }

    #[test]
    fn cdf_is_monotone(t in 0.01f64..10.0, x in -5.0f64..5.0, y1 in -8.0f64..8.0, dy in 0.0f64..4.0, rho in 0.01f64..10.0) {
        let a = transition_cdf(t, x, y1, rho).unwrap();
        let b = transition_cdf(t, x, y1 + dy, rho).unwrap();
        prop_assert!(a <= b + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn jump_at_zero_is_atom(t in 0.01f64..10.0, x in -5.0f64..5.0, rho in 0.01f64..10.0) {
        let jump = transition_cdf(t, x, 0.0, rho).unwrap() - transition_cdf_left(t, x, 0.0, rho).unwrap();
        let atom = atom_mass(rho) * p(t, x, 0.0, rho);
        prop_assert!((jump - atom).abs() <= 1e-14);
    }
}
