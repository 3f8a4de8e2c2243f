use proptest::prelude::*;
use sticky::estimators::occupation_statistic;
use sticky::kernel::TransitionSampler;
use sticky::simulate::{build_grid, resample_path, simulate_sbm_exact, Grid, StmcaChain};
use sticky::stats::{chi_square_critical, jarque_bera, ks_critical, ks_critical_two_sample, ks_statistic, ks_two_sample};
use sticky::{derive_stream, StickyModel};

#[test]
fn exact_marginals_match_kernel() {
    for (k, &t) in [0.25, 0.5, 1.0].iter().enumerate() {
        let n = 16u64;
        let idx = (t * n as f64) as usize;
        let xs: Vec<f64> = (0..10_000u64)
            .map(|j| simulate_sbm_exact(0.0, 1.0, n, 1.0, &mut derive_stream(100 + k as u64, j)).unwrap().values()[idx])
            .collect();
        let s = TransitionSampler::new(t, 1.0).unwrap();
        let d = ks_statistic(&xs, |y| s.cdf(0.0, y), |y| s.cdf_left(0.0, y));
        assert!(d <= ks_critical(xs.len(), 0.01), "t={t}: KS {d}");
    }
}

#[test]
fn path_scaling_law() {
    // X^rho at time c t against sqrt(c) X^{rho / sqrt c} at time t, c = 4, t = 0.5.
    let (c, t, rho) = (4.0f64, 0.5, 1.0);
    let a: Vec<f64> = (0..10_000u64)
        .map(|j| *simulate_sbm_exact(0.0, rho, 4, c * t, &mut derive_stream(200, j)).unwrap().values().last().unwrap())
        .collect();
    let b: Vec<f64> = (0..10_000u64)
        .map(|j| {
            c.sqrt() * *simulate_sbm_exact(0.0, rho / c.sqrt(), 4, t, &mut derive_stream(201, j)).unwrap().values().last().unwrap()
        })
        .collect();
    let d = ks_two_sample(&a, &b);
    assert!(d <= ks_critical_two_sample(a.len(), b.len(), 0.01), "KS {d}");
}

#[test]
fn nearly_zero_stickiness_has_gaussian_increments() {
    let p = simulate_sbm_exact(5.0, 1e-4, 1000, 1.0, &mut derive_stream(300, 0)).unwrap();
    assert!(p.values().iter().all(|&x| x > 1.0), "path came near the sticky point");
    let inc: Vec<f64> = p.values().windows(2).map(|w| w[1] - w[0]).collect();
    assert!(jarque_bera(&inc) < chi_square_critical(2, 0.01));
}

#[test]
fn sticky_point_is_occupied() {
    let positive = (0..100u64)
        .filter(|&j| {
            let p = simulate_sbm_exact(0.0, 1.0, 10_000, 1.0, &mut derive_stream(400, j)).unwrap();
            occupation_statistic(&p, 1.0).unwrap() > 0.0
        })
        .count();
    assert!(positive >= 99, "{positive}/100");
}

#[test]
fn resampled_occupation_matches_events() {
    let m = StickyModel::sticky_bm(1.0).unwrap();
    let chain = StmcaChain::new(&m, build_grid(0.05, 10.0).unwrap()).unwrap();
    let dt_max = chain.holding_times().iter().cloned().fold(0.0, f64::max);
    let n = 1000;
    for j in 0..20 {
        let ep = chain.simulate(0.0, 1.0, &mut derive_stream(500, j)).unwrap();
        let from_events = ep.occupation_at_zero(1.0).unwrap();
        let p = resample_path(&ep, n, 1.0).unwrap();
        let from_obs = occupation_statistic(&p, 1.0).unwrap();
        // Each visit to 0 misplaces at most one observation interval at either end.
        let visits = ep.states().iter().filter(|&&s| s == 0.0).count() as f64;
        let bound = visits * 2.0 / n as f64 + dt_max;
        assert!((from_events - from_obs).abs() <= bound, "{from_events} vs {from_obs}");
    }
}

#[test]
fn stmca_converges_as_grid_refines() {
    let m = StickyModel::sticky_bm(1.0).unwrap();
    let s = TransitionSampler::new(1.0, 1.0).unwrap();
    let ks: Vec<f64> = [0.1, 0.05, 0.02]
        .iter()
        .map(|&h| {
            let chain = StmcaChain::new(&m, build_grid(h, 10.0).unwrap()).unwrap();
            let xs: Vec<f64> = (0..20_000u64)
                .map(|j| chain.observe(0.0, 1, 1.0, &mut derive_stream(600, j)).unwrap().values()[1])
                .collect();
            ks_statistic(&xs, |y| s.cdf(0.0, y), |y| s.cdf_left(0.0, y))
        })
        .collect();
    assert!(ks[0] > ks[1] && ks[1] > ks[2], "{ks:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grids_are_symmetric_with_zero(h in 0.01f64..0.99, xmax in 1.01f64..12.0) {
        for g in [build_grid(h, xmax).unwrap(), Grid::uniform(h, xmax).unwrap()] {
            let p = g.points();
            prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(p[g.zero_index()], 0.0);
            for (a, b) in p.iter().zip(p.iter().rev()) {
                prop_assert_eq!(*a, -*b);
            }
            prop_assert!(*p.last().unwrap() >= xmax * (1.0 - 1e-12));
        }
    }

    #[test]
    fn exact_paths_are_reproducible(seed in any::<u64>(), stream in 0u64..1000, rho in 0.05f64..5.0) {
        let a = simulate_sbm_exact(0.0, rho, 200, 1.0, &mut derive_stream(seed, stream)).unwrap();
        let b = simulate_sbm_exact(0.0, rho, 200, 1.0, &mut derive_stream(seed, stream)).unwrap();
        prop_assert_eq!(a, b);
    }
}
