mod common;

use common::{check_trace_against_oracle, instance, rel_diff};
use hiersel::baselines::{
    lasso_cd, lasso_path, lasso_select, lasso_select_with_grid, stepwise, Standardized, StopReason,
};
use hiersel::datakit::{Dataset, Hierarchy, Mode};
use hiersel::linalg::{dot, ols_fit};
use hiersel::solver::{solve, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn stepwise_matches_per_step_oracle() {
    for seed in 0..10u64 {
        let g = instance(80, 10, seed);
        for s in [2, 5, 10] {
            check_trace_against_oracle(&g.dataset, s).unwrap();
        }
    }
}

#[test]
fn stepwise_trace_invariants() {
    for seed in 0..10u64 {
        let g = instance(100, 12, seed + 50);
        for s in 1..=6 {
            let t = stepwise(&g.dataset, s).unwrap();
            let mut prev = t.initial_aic;
            for step in &t.steps {
                assert!(step.aic < prev);
                prev = step.aic;
            }
            assert!(t.fit.support_size() <= s);
            let exact = solve(&g.dataset, &Hierarchy::empty(), &SolverConfig::new(s, Mode::Basic)).unwrap();
            assert!(t.fit.rss >= exact.best.rss * (1.0 - 1e-9));
        }
    }
}

#[test]
fn stepwise_can_stop_early_on_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut stopped_early = false;
    for _ in 0..10 {
        let cols: Vec<Vec<f64>> = (0..8).map(|_| (0..60).map(|_| normal.sample(&mut rng)).collect()).collect();
        let y: Vec<f64> = (0..60).map(|_| normal.sample(&mut rng)).collect();
        let ds = Dataset::from_columns_unchecked(&cols, y);
        let t = stepwise(&ds, 8).unwrap();
        if t.stop == StopReason::NoImprovement {
            stopped_early = true;
            assert!(t.fit.support_size() < 8);
        }
    }
    assert!(stopped_early);
}

#[test]
fn lasso_one_dimensional_closed_form() {
    let x = vec![0.3, 1.7, -0.4, 2.2, 0.9, -1.1, 0.5, 1.4];
    let y = vec![1.0, 2.9, 0.2, 4.1, 1.6, -0.8, 1.5, 2.2];
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - xm) * (v - xm)).sum::<f64>() / n).sqrt();
    let z: Vec<f64> = x.iter().map(|v| (v - xm) / sd).collect();
    let zy = z.iter().zip(&y).map(|(a, b)| a * (b - ym)).sum::<f64>() / n;
    let expected = zy.signum() * (zy.abs() - 0.1).max(0.0);

    let ds = Dataset::from_columns_unchecked(&[x], y);
    let f = lasso_cd(&ds, 0.1).unwrap();
    assert!((f.std_coefficients[0] - expected).abs() < 1e-8);
    assert!((f.coefficients[0] - expected / sd).abs() < 1e-8);
    assert!((f.intercept - (ym - expected / sd * xm)).abs() < 1e-8);
}

#[test]
fn lasso_endpoints() {
    for seed in 0..5u64 {
        let g = instance(120, 10, seed);
        let ds = &g.dataset;
        let st = Standardized::new(ds);
        let lmax = st.lambda_max();
        for l in [lmax, lmax * 1.01, lmax + 1.0] {
            let f = lasso_cd(ds, l).unwrap();
            assert_eq!(f.support_size(), 0);
            assert!((f.intercept - ds.y().iter().sum::<f64>() / ds.n() as f64).abs() < 1e-12);
        }
        let f = lasso_cd(ds, lmax * 0.9).unwrap();
        assert!(f.support_size() > 0);

        let f = lasso_cd(ds, 0.0).unwrap();
        let ols = ols_fit(ds, &vec![true; ds.p()]).unwrap();
        assert!(f.converged);
        for j in 0..ds.p() {
            assert!((f.coefficients[j] - ols.coefficients[j]).abs() < 1e-5, "seed {seed} col {j}");
        }
        assert!((f.intercept - ols.intercept).abs() < 1e-5);
    }
}

#[test]
fn lasso_kkt_on_path() {
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    for seed in 0..5u64 {
        let g = instance(150, 12, seed + 10);
        let st = Standardized::new(&g.dataset);
        let path = lasso_path(&g.dataset, &grid).unwrap();
        assert_eq!(path.lambdas, grid);
        for (l, f) in path.lambdas.iter().zip(&path.fits) {
            assert!(f.converged);
            let r = st.kkt_residual(&f.std_coefficients, *l);
            assert!(r <= 1e-5, "seed {seed} lambda {l}: {r}");
        }
    }
}

#[test]
fn warm_path_matches_cold_starts() {
    let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let g = instance(150, 12, 3);
    let path = lasso_path(&g.dataset, &grid).unwrap();
    for (i, &l) in grid.iter().enumerate().step_by(5) {
        let cold = lasso_cd(&g.dataset, l).unwrap();
        for j in 0..12 {
            assert!((cold.coefficients[j] - path.fits[i].coefficients[j]).abs() < 1e-5);
        }
    }
}

#[test]
fn lasso_select_refit_properties() {
    for seed in 0..5u64 {
        let g = instance(150, 12, seed + 20);
        let ds = &g.dataset;
        for s in [1, 3, 6] {
            let sel = lasso_select(ds, s).unwrap();
            let fit = &sel.fit;
            assert!(fit.support_size() <= s);
            for j in 0..ds.p() {
                if !fit.support[j] {
                    assert_eq!(fit.coefficients[j], 0.0);
                }
            }
            for j in fit.selected() {
                let c = dot(ds.column(j), &fit.residuals);
                assert!(c.abs() < 1e-8 * (1.0 + fit.rss), "residual not orthogonal to column {j}: {c}");
            }
            if let Some(lasso) = &sel.lasso {
                assert_eq!(lasso.support(), fit.support);
                let st = Standardized::new(ds);
                assert!(st.kkt_residual(&lasso.std_coefficients, lasso.lambda) <= 1e-5);
            } else {
                assert!(sel.warning.is_some());
            }
            let exact = solve(ds, &Hierarchy::empty(), &SolverConfig::new(s, Mode::Basic)).unwrap();
            assert!(fit.rss >= exact.best.rss * (1.0 - 1e-9));
        }
    }
}

#[test]
fn lasso_select_full_size_is_ols() {
    let g = instance(150, 8, 4);
    let sel = lasso_select(&g.dataset, 8).unwrap();
    let ols = ols_fit(&g.dataset, &[true; 8]).unwrap();
    if sel.fit.support_size() == 8 {
        assert!(rel_diff(sel.fit.rss, ols.rss) < 1e-12);
    }
    // The smallest penalty keeps every column of this well-posed design.
    let sel = lasso_select_with_grid(&g.dataset, 8, &[0.0]).unwrap();
    assert_eq!(sel.fit.support_size(), 8);
    assert!(rel_diff(sel.fit.rss, ols.rss) < 1e-12);
}

#[test]
fn lasso_select_without_signal_warns() {
    let ds = Dataset::from_columns_unchecked(
        &[vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0]],
        vec![2.0; 6],
    );
    let sel = lasso_select(&ds, 2).unwrap();
    assert!(sel.warning.is_some());
    assert!(sel.lasso.is_none());
    assert_eq!(sel.fit.support_size(), 0);
    assert!((sel.fit.intercept - 2.0).abs() < 1e-12);
}

#[test]
fn lasso_select_skips_empty_large_penalties() {
    // Weak signal: lambda = 1 zeroes everything, so a smaller penalty is chosen.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let cols: Vec<Vec<f64>> = (0..6).map(|_| (0..200).map(|_| normal.sample(&mut rng)).collect()).collect();
    let y: Vec<f64> = (0..200).map(|i| 0.4 * cols[0][i] + normal.sample(&mut rng)).collect();
    let ds = Dataset::from_columns_unchecked(&cols, y);
    let st = Standardized::new(&ds);
    assert!(st.lambda_max() < 1.0);
    assert_eq!(lasso_cd(&ds, 1.0).unwrap().support_size(), 0);
    let sel = lasso_select(&ds, 3).unwrap();
    let l = sel.lambda().unwrap();
    assert!(l < st.lambda_max());
    assert!((1..=3).contains(&sel.fit.support_size()));
}
