mod common;

use common::{instance, rel_diff};
use hiersel::datakit::{generate, CategoryLayout, Dataset, Hierarchy, Mode, SyntheticConfig, Triple};
use hiersel::linalg::{ols_fit, tss, LsqProblem};
use hiersel::solver::{
    enumerate_all, enumerate_exact, is_feasible, lower_bound, solve, SelectionState, SolverConfig, Status,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn s_equal_p_is_full_ols() {
    let g = instance(60, 8, 1);
    let out = solve(&g.dataset, &g.hierarchy, &SolverConfig::new(8, Mode::Basic)).unwrap();
    let full = ols_fit(&g.dataset, &[true; 8]).unwrap();
    assert!(rel_diff(out.best.rss, full.rss) < 1e-12);
    assert!(out.proven_optimal);
}

#[test]
fn orthogonal_columns_pick_strongest_correlation() {
    let c0 = vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
    let c1 = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    let c2 = vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
    let e = [0.1, -0.2, 0.05, 0.3, -0.1, 0.0, 0.15, -0.3];
    let y: Vec<f64> = (0..8).map(|i| 0.5 * c0[i] + 1.0 * c1[i] + 2.0 * c2[i] + e[i]).collect();
    let cols = vec![c0, c1, c2];

    // Oracle: with orthogonal centered columns, RSS({j}) = TSS - (c_j' y)^2 / ||c_j||^2.
    let ybar = y.iter().sum::<f64>() / 8.0;
    let t = tss(&y);
    let rss: Vec<f64> = cols
        .iter()
        .map(|c| {
            let cy: f64 = c.iter().zip(&y).map(|(a, b)| a * (b - ybar)).sum();
            let cc: f64 = c.iter().map(|a| a * a).sum();
            t - cy * cy / cc
        })
        .collect();
    let oracle = (0..3).min_by(|&a, &b| rss[a].total_cmp(&rss[b])).unwrap();
    assert_eq!(oracle, 2);

    let ds = Dataset::from_columns_unchecked(&cols, y);
    let out = solve(&ds, &Hierarchy::empty(), &SolverConfig::new(1, Mode::Basic)).unwrap();
    assert_eq!(out.best.selected(), vec![2]);
    assert!(rel_diff(out.best.rss, rss[2]) < 1e-12);
}

/// n = 100, p = 12, one chain, signal only on the small category.
fn small_signal_instance() -> (Dataset, Hierarchy, usize, usize, usize) {
    let layout = CategoryLayout {
        demographics: 9,
        large: 1,
        medium: 1,
        small: 1,
        chains: 1,
    };
    let mut cfg = SyntheticConfig::new(100, layout, 2024);
    cfg.large_prob = 0.4;
    cfg.medium_prob = 0.3;
    cfg.small_prob = 0.3;
    cfg.sigma = 0.5;
    cfg.support = vec![11];
    cfg.coefficients = vec![4.0];
    let g = generate(&cfg).unwrap();
    (g.dataset, g.hierarchy, 9, 10, 11)
}

#[test]
fn small_category_signal_under_each_mode() {
    let (ds, h, l, m, sm) = small_signal_instance();
    assert_eq!(h.triples(), &[Triple::new(l, m, sm)]);

    let strong = SolverConfig::new(3, Mode::Strong);
    let out = solve(&ds, &h, &strong).unwrap();
    let oracle = enumerate_exact(&ds, &h, &strong).unwrap();
    assert_eq!(oracle.best.selected(), vec![l, m, sm]);
    assert_eq!(out.best.selected(), vec![l, m, sm]);

    let weak = SolverConfig::new(2, Mode::Weak);
    let out = solve(&ds, &h, &weak).unwrap();
    let oracle = enumerate_exact(&ds, &h, &weak).unwrap();
    assert_eq!(oracle.best.selected(), vec![l, sm]);
    assert_eq!(out.best.selected(), vec![l, sm]);
}

#[test]
fn enumeration_counts() {
    let ds = Dataset::from_columns_unchecked(
        &[
            vec![1.0, 0.0, 1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0, 0.0],
        ],
        vec![1.0, 2.0, 3.0, -1.0, 2.0],
    );
    let e = enumerate_all(&ds, &Hierarchy::empty(), &SolverConfig::new(3, Mode::Basic)).unwrap();
    assert_eq!(e.evaluated, 8);

    // Same columns as a large/medium/small chain.
    let (dsc, h) = chain_dataset();
    let e = enumerate_all(&dsc, &h, &SolverConfig::new(3, Mode::Strong)).unwrap();
    assert_eq!(e.evaluated, 4);
    let e = enumerate_all(&dsc, &h, &SolverConfig::new(3, Mode::Weak)).unwrap();
    // {}, {L}, {L,M}, {L,S}, {L,M,S}
    assert_eq!(e.evaluated, 5);
}

fn chain_dataset() -> (Dataset, Hierarchy) {
    use hiersel::datakit::{Group, VariableMeta};
    use hiersel::linalg::Matrix;
    let cols = vec![
        vec![1.0, 1.0, 1.0, 0.0, 1.0, 1.0],
        vec![1.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    ];
    let vars = ["L", "M", "S"]
        .iter()
        .zip([Group::L, Group::M, Group::S])
        .enumerate()
        .map(|(i, (n, g))| VariableMeta {
            index: i,
            name: n.to_string(),
            group: g,
        })
        .collect();
    let ds = Dataset::new(Matrix::from_columns(6, &cols), vec![3.0, 2.0, 1.0, -1.0, 4.0, 1.0], vars).unwrap();
    let h = Hierarchy::new(vec![Triple::new(0, 1, 2)], &ds).unwrap();
    (ds, h)
}

#[test]
fn enumeration_refuses_large_p() {
    let cols: Vec<Vec<f64>> = (0..26).map(|j| (0..30).map(|i| ((i * j) % 7) as f64).collect()).collect();
    let ds = Dataset::from_columns_unchecked(&cols, (0..30).map(|i| i as f64).collect());
    assert!(enumerate_exact(&ds, &Hierarchy::empty(), &SolverConfig::new(2, Mode::Basic)).is_err());
}

#[test]
fn matches_oracle_on_random_instances() {
    for seed in 0..30u64 {
        let p = if seed % 2 == 0 { 8 } else { 12 };
        let g = instance(80, p, seed);
        for mode in Mode::ALL {
            for s in [1, 2, 4, p - 1] {
                let cfg = SolverConfig::new(s, mode);
                let out = solve(&g.dataset, &g.hierarchy, &cfg).unwrap();
                let e = enumerate_all(&g.dataset, &g.hierarchy, &cfg).unwrap();
                assert!(out.proven_optimal);
                assert!(
                    rel_diff(out.best.rss, e.outcome.best.rss) <= 1e-9,
                    "seed {seed} {mode} s={s}: {} vs {}",
                    out.best.rss,
                    e.outcome.best.rss
                );
                assert!(is_feasible(&out.best.support, &g.hierarchy, mode, s));
                if e.is_unique(1e-6) {
                    assert_eq!(out.best.support, e.outcome.best.support, "seed {seed} {mode} s={s}");
                }
            }
        }
    }
}

#[test]
fn lower_bound_is_admissible_at_random_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..6u64 {
        let g = instance(60, 10, seed);
        let ds = &g.dataset;
        let problem = LsqProblem::new(ds);
        for _ in 0..40 {
            let mode = Mode::ALL[rng.random_range(0..3)];
            let s = rng.random_range(1..=6);
            let statuses: Vec<Status> = (0..10)
                .map(|_| match rng.random_range(0..5) {
                    0 => Status::FixedIn,
                    1 => Status::FixedOut,
                    _ => Status::Free,
                })
                .collect();
            let mut st = SelectionState::from_statuses(statuses);
            if st.propagate(&g.hierarchy, mode, s).is_err() {
                continue;
            }
            let bound = lower_bound(&st, &problem);
            // Exhaustive completions.
            let free = st.free_vars();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << free.len()) {
                let mut z: Vec<bool> = st.statuses().iter().map(|&x| x == Status::FixedIn).collect();
                for (b, &j) in free.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        z[j] = true;
                    }
                }
                if is_feasible(&z, &g.hierarchy, mode, s) {
                    best = best.min(ols_fit(ds, &z).unwrap().rss);
                }
            }
            assert!(best.is_finite());
            assert!(bound <= best * (1.0 + 1e-9), "bound {bound} > completion {best}");
            if free.is_empty() {
                assert!(rel_diff(bound, best) < 1e-9);
            }
        }
        let root = SelectionState::free(10);
        let full = ols_fit(ds, &[true; 10]).unwrap().rss;
        assert!(rel_diff(lower_bound(&root, &problem), full) < 1e-10);
    }
}

#[test]
fn nesting_and_monotonicity() {
    for seed in 0..10u64 {
        let g = instance(70, 12, seed + 100);
        let mut prev = [f64::INFINITY; 3];
        for s in 1..=12 {
            let rss: Vec<f64> = Mode::ALL
                .iter()
                .map(|&m| solve(&g.dataset, &g.hierarchy, &SolverConfig::new(s, m)).unwrap().best.rss)
                .collect();
            let (basic, strong, weak) = (rss[0], rss[1], rss[2]);
            assert!(strong >= weak * (1.0 - 1e-9), "seed {seed} s={s}");
            assert!(weak >= basic * (1.0 - 1e-9), "seed {seed} s={s}");
            for (i, r) in rss.iter().enumerate() {
                assert!(*r <= prev[i] * (1.0 + 1e-9));
                prev[i] = *r;
            }
        }
    }
}

#[test]
fn node_limited_runs_are_sound() {
    for seed in 0..5u64 {
        let g = instance(80, 12, seed + 7);
        for mode in Mode::ALL {
            let cfg = SolverConfig::new(4, mode);
            let opt = enumerate_exact(&g.dataset, &g.hierarchy, &cfg).unwrap().best.rss;
            for limit in [0u64, 1, 2, 3, 5, 8, 13, 21, 34] {
                let out = solve(&g.dataset, &g.hierarchy, &cfg.clone().with_node_limit(limit)).unwrap();
                assert!(is_feasible(&out.best.support, &g.hierarchy, mode, 4));
                assert!(out.best_bound <= opt * (1.0 + 1e-9), "{} > {opt}", out.best_bound);
                assert!(out.best.rss >= opt * (1.0 - 1e-9));
                if out.proven_optimal {
                    assert!(rel_diff(out.best.rss, opt) < 1e-9);
                }
                assert!(out.nodes_explored <= limit);
            }
        }
    }
}

#[test]
fn zero_time_limit_returns_greedy_incumbent() {
    let g = instance(80, 12, 3);
    let cfg = SolverConfig::new(3, Mode::Weak).with_time_limit(std::time::Duration::ZERO);
    let out = solve(&g.dataset, &g.hierarchy, &cfg).unwrap();
    assert_eq!(out.nodes_explored, 0);
    assert!(is_feasible(&out.best.support, &g.hierarchy, Mode::Weak, 3));
    let problem = LsqProblem::new(&g.dataset);
    let (greedy, _) = hiersel::solver::greedy_incumbent(&problem, &g.hierarchy, Mode::Weak, 3);
    assert_eq!(out.best.selected(), greedy);
}

#[test]
fn deterministic_outcomes() {
    let g = instance(90, 12, 42);
    for mode in Mode::ALL {
        let cfg = SolverConfig::new(5, mode);
        let mut a = solve(&g.dataset, &g.hierarchy, &cfg).unwrap();
        let mut b = solve(&g.dataset, &g.hierarchy, &cfg).unwrap();
        a.wall_time = 0.0;
        b.wall_time = 0.0;
        assert_eq!(a, b);
    }
}

#[test]
fn rejects_zero_cardinality() {
    let g = instance(30, 8, 0);
    assert!(solve(&g.dataset, &g.hierarchy, &SolverConfig::new(0, Mode::Basic)).is_err());
}

#[test]
fn record_serializes_expected_fields() {
    let g = instance(50, 8, 5);
    let out = solve(&g.dataset, &g.hierarchy, &SolverConfig::new(2, Mode::Strong)).unwrap();
    let v = serde_json::to_value(out.to_record(&g.dataset)).unwrap();
    for key in [
        "mode",
        "s",
        "rss",
        "proven_optimal",
        "best_bound",
        "wall_time_s",
        "nodes",
        "intercept",
        "coefficients",
        "selected",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["mode"], "strong");
}
