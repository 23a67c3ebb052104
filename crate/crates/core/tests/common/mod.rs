#![allow(dead_code)]

use hiersel::baselines::{aic, stepwise, Action, StopReason};
use hiersel::datakit::{generate, CategoryLayout, Dataset, Generated, Hierarchy, Mode, SyntheticConfig};
use hiersel::linalg::{ols_fit, tss};

pub fn layout_for(p: usize) -> CategoryLayout {
    match p {
        8 => CategoryLayout {
            demographics: 2,
            large: 1,
            medium: 2,
            small: 3,
            chains: 2,
        },
        10 => CategoryLayout {
            demographics: 3,
            large: 1,
            medium: 2,
            small: 4,
            chains: 3,
        },
        12 => CategoryLayout {
            demographics: 3,
            large: 2,
            medium: 3,
            small: 4,
            chains: 3,
        },
        15 => CategoryLayout {
            demographics: 4,
            large: 2,
            medium: 4,
            small: 5,
            chains: 4,
        },
        _ => panic!("no test layout for p = {p}"),
    }
}

/// Noisy synthetic instance with a planted support of size 3 drawn for a
/// seed-dependent mode.
pub fn instance(n: usize, p: usize, seed: u64) -> Generated {
    let mut cfg = SyntheticConfig::new(n, layout_for(p), seed);
    cfg.large_prob = 0.5;
    cfg.medium_prob = 0.4;
    cfg.small_prob = 0.35;
    cfg.sigma = 1.5;
    let mode = Mode::ALL[(seed % 3) as usize];
    cfg.plant(mode, 3, false).expect("plantable");
    generate(&cfg).expect("valid config")
}

pub fn pair(g: &Generated) -> (&Dataset, &Hierarchy) {
    (&g.dataset, &g.hierarchy)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn mask(p: usize, idx: &[usize]) -> Vec<bool> {
    let mut m = vec![false; p];
    for &j in idx {
        m[j] = true;
    }
    m
}

/// Replays the stepwise trace, checking each move against a full scan of
/// all single adds and removes scored with `ols_fit`.
pub fn check_trace_against_oracle(ds: &Dataset, s: usize) -> Result<(), String> {
    let trace = stepwise(ds, s).map_err(|e| e.to_string())?;
    let (n, p) = (ds.n(), ds.p());
    let t = tss(ds.y());
    let score = |sup: &[usize]| aic(ols_fit(ds, &mask(p, sup)).unwrap().rss, t, n, sup.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * b.abs().max(1.0);
    let mut support: Vec<usize> = Vec::new();
    let mut current = score(&support);
    if !close(trace.initial_aic, current) {
        return Err(format!("initial AIC {} vs oracle {current}", trace.initial_aic));
    }
    for (i, step) in trace.steps.iter().enumerate() {
        let mut moves: Vec<(f64, Action, usize)> = Vec::new();
        for j in (0..p).filter(|j| !support.contains(j)) {
            let mut t = support.clone();
            t.push(j);
            moves.push((score(&t), Action::Add, j));
        }
        for &j in &support {
            let t: Vec<usize> = support.iter().copied().filter(|&k| k != j).collect();
            moves.push((score(&t), Action::Remove, j));
        }
        let best = moves.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
        if best >= current {
            return Err(format!("step {i}: oracle finds no improving move"));
        }
        let Some(taken) = moves.iter().find(|m| m.1 == step.action && m.2 == step.variable) else {
            return Err(format!("step {i}: move {:?} {} is not available", step.action, step.variable));
        };
        // Equal up to floating-point ties between moves.
        if !close(taken.0, best) || !close(step.aic, taken.0) {
            return Err(format!("step {i}: took AIC {} but the oracle best is {best}", step.aic));
        }
        match step.action {
            Action::Add => support.push(step.variable),
            Action::Remove => support.retain(|&k| k != step.variable),
        }
        current = taken.0;
    }
    match trace.stop {
        StopReason::ReachedSize if support.len() != s => {
            return Err(format!("stopped at size {} instead of {s}", support.len()));
        }
        StopReason::NoImprovement => {
            let improving = moves_improve(ds, &support, current, &score);
            if support.len() >= s || improving {
                return Err("stopped although an improving move exists".into());
            }
        }
        _ => {}
    }
    support.sort_unstable();
    if trace.fit.selected() != support {
        return Err("final fit support differs from the replayed trace".into());
    }
    Ok(())
}

fn moves_improve(ds: &Dataset, support: &[usize], current: f64, score: &dyn Fn(&[usize]) -> f64) -> bool {
    let add = (0..ds.p()).filter(|j| !support.contains(j)).any(|j| {
        let mut t = support.to_vec();
        t.push(j);
        score(&t) < current - 1e-8 * current.abs().max(1.0)
    });
    let remove = support.iter().any(|&j| {
        let t: Vec<usize> = support.iter().copied().filter(|&k| k != j).collect();
        score(&t) < current - 1e-8 * current.abs().max(1.0)
    });
    add || remove
}
