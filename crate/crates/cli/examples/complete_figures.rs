//! Deterministic search for the parameters the figure captions leave open.
//!
//! For each figure family the captions fix a, d2, the coexistence state and
//! M/d1. With q = 1000, k = 0.01 and d = 0.01 held fixed, a grid over (m, c)
//! is scanned; p, r and d1 follow from the targets. A candidate must be
//! kinetically stable, satisfy the two-real-roots condition and have the
//! caption's unstable modes. Among those, the score is the smaller of the
//! slowest unstable growth rate and the decay rate of the homogeneous mode.
//!
//! Run with `cargo run -p fearbd --example complete_figures`.

use std::f64::consts::PI;

use fearbd_core::completion::{FIG1_FREE, FIG1_TARGET, FIG2_FREE, FIG2_TARGET};
use fearbd_core::{analyze, complete, CompletionTarget, FreeChoice, JacobianEntries, ModelParams};

/// Largest real part of the eigenvalues of J - mu diag(d1, d2).
fn growth(e: &JacobianEntries, p: &ModelParams, mu: f64) -> f64 {
    let trace = e.prey_self - e.predator_self - mu * (p.d1 + p.d2);
    let det = p.d1 * p.d2 * mu * mu + (e.predator_self * p.d1 - e.prey_self * p.d2) * mu + e.kinetic_det();
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        (trace + disc.sqrt()) / 2.0
    } else {
        trace / 2.0
    }
}

fn score(target: &CompletionTarget, free: &FreeChoice, modes: &[usize]) -> Option<(f64, ModelParams)> {
    let params = complete(target, free).ok()?;
    let report = analyze(&params, PI, 20).ok()?;
    if !(report.kinetically_stable && report.pattern_predicted && report.unstable_indices() == modes) {
        return None;
    }
    let e = report.entries;
    let slowest = modes.iter().map(|&i| growth(&e, &params, (i * i) as f64)).fold(f64::INFINITY, f64::min);
    let decay = -growth(&e, &params, 0.0);
    Some((slowest.min(decay), params))
}

fn search(name: &str, target: &CompletionTarget, modes: &[usize], committed: &FreeChoice) {
    let mut best: Option<(f64, FreeChoice)> = None;
    for m in [0.25, 0.5, 1.0, 2.0, 3.0, 4.0] {
        for step in 0..400 {
            let c = 10.0 + 5.0 * step as f64;
            let free = FreeChoice { m, c, q: 1000.0, k: 0.01, d: 0.01 };
            if let Some((s, _)) = score(target, &free, modes) {
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, free));
                }
            }
        }
    }
    println!("{name}: unstable modes {modes:?}");
    match best {
        Some((s, f)) => {
            println!("  best on grid: m = {}, c = {}  score = {s:.4e}", f.m, f.c);
            println!("  committed choice is the grid optimum: {}", f == *committed);
        }
        None => println!("  no feasible grid point"),
    }
    match score(target, committed, modes) {
        Some((s, p)) => {
            println!("  committed:    m = {}, c = {}  score = {s:.4e}", committed.m, committed.c);
            for name in ModelParams::NAMES {
                println!("  {name} = {}", p.get(name).unwrap());
            }
        }
        None => println!("  committed choice is infeasible"),
    }
}

fn main() {
    search("a = 0.1 family", &FIG1_TARGET, &[1], &FIG1_FREE);
    search("a = 0.055 family", &FIG2_TARGET, &[1, 2, 3], &FIG2_FREE);
}
