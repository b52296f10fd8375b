//! Shared helpers for integration and acceptance tests: seeded scenario
//! batches, dataset generators, and invariant replays.
//!
//! Each test target compiles its own copy, so not every helper is used
//! everywhere.
#![allow(dead_code)]

use linescout::control_det::{DetRun, SolveStage};
use linescout::geometry::{certainty_label, LabeledPoint, ParamBox, ParamPolygon};
use linescout::world::{range_grid, rng, Rect, Scenario, TrueClassifier};

pub fn rand_in(seed: u64, idx: u64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::unit_draw(seed, idx)
}

/// Batch scenario: random line with slope in [-1, 1] and intercept in
/// [-5, 5], anchors on two columns straddling it, a workspace wide enough
/// that forty steps never corner the agent, and a speed grid with a fine low
/// end so a thin late-run uncertain band stays reachable.
pub fn random_scenario(seed: u64) -> Scenario {
    let rho = rand_in(seed, 0, -1.0, 1.0);
    let c = rand_in(seed, 1, -5.0, 5.0);
    let classifier = TrueClassifier::new(rho, c).unwrap();
    let line = |x: f64| rho * x + c;
    let xa = -8.0 + rand_in(seed, 2, -1.0, 1.0);
    let xb = 8.0 + rand_in(seed, 3, -1.0, 1.0);
    let d = |i: u64| rand_in(seed, 4 + i, 0.6, 1.2);
    let anchors = [
        LabeledPoint::new(xa, line(xa) - d(0), -1).unwrap(),
        LabeledPoint::new(xa, line(xa) + d(1), 1).unwrap(),
        LabeledPoint::new(xb, line(xb) + d(2), 1).unwrap(),
        LabeledPoint::new(xb, line(xb) - d(3), -1).unwrap(),
    ];
    let mut s = Scenario::builtin_det();
    s.v_grid = {
        let mut g = vec![0.0, 0.002, 0.005, 0.01];
        g.extend(range_grid(0.02, 2.0, 0.02));
        g
    };
    s.workspace = Rect {
        x_min: -80.0,
        x_max: 80.0,
        z_min: -80.0,
        z_max: 80.0,
    };
    s.classifier = classifier;
    s.anchors = anchors;
    s.initial_box = ParamBox::new(-1.2, 1.2, -10.0, 10.0).unwrap();
    s.seed = seed;
    s.validate().unwrap();
    s
}

/// Base seed of the pinned twenty-scenario batch.
pub const BATCH_BASE_SEED: u64 = 13_000;
pub const BATCH_SIZE: u64 = 20;

/// Pair-midpoint separation used when estimating on batch runs (the batch
/// workspace is much larger than its anchor span, so the 10%-of-diagonal
/// default would reject every second pair).
pub const BATCH_MIN_SEPARATION: f64 = 3.0;

/// Replay a deterministic run and count invariant violations.
pub struct ReplayStats {
    pub nesting_violations: usize,
    pub revisit_violations: usize,
    pub certainty_violations: usize,
}

pub fn replay_invariants(scenario: &Scenario, run: &DetRun) -> ReplayStats {
    let mut stats = ReplayStats {
        nesting_violations: 0,
        revisit_violations: 0,
        certainty_violations: 0,
    };
    let mut poly = scenario.anchor_polygon();
    for tp in &run.trajectory[1..] {
        if certainty_label(&poly, (tp.state.x, tp.state.z)).unwrap_or(0) != 0 {
            stats.certainty_violations += 1;
        }
        let rotation = tp.solved.map(|(_, st)| st) == Some(SolveStage::Rotation);
        if tp.observed != 0 && !rotation {
            let pt = LabeledPoint::new(tp.state.x, tp.state.z, tp.observed).unwrap();
            let next = poly.clip_halfplane(&pt);
            for &(r, c) in next.vertices() {
                if !poly.contains(r, c, 1e-7) {
                    stats.nesting_violations += 1;
                }
            }
            poly = next;
        }
    }
    for (i, a) in run.trajectory.iter().enumerate() {
        for b in run.trajectory.iter().skip(i + 1) {
            if (a.state.x - b.state.x).hypot(a.state.z - b.state.z) < 1e-6 {
                stats.revisit_violations += 1;
            }
        }
    }
    stats
}

pub fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

/// Max pairwise distance between matched vertices after sorting; `None`
/// when the vertex counts differ.
pub fn polygon_vertex_distance(a: &ParamPolygon, b: &ParamPolygon) -> Option<f64> {
    if a.vertices().len() != b.vertices().len() {
        return None;
    }
    let sorted = |p: &ParamPolygon| {
        let mut v = p.vertices().to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        v
    };
    let (va, vb) = (sorted(a), sorted(b));
    Some(
        va.iter()
            .zip(&vb)
            .map(|(x, y)| (x.0 - y.0).hypot(x.1 - y.1))
            .fold(0.0, f64::max),
    )
}

// --- random dataset generators for the geometry/estimator oracles ---

/// Points labeled by a random hidden line with a clear margin band.
pub fn banded_dataset(seed: u64, max_points: usize, margin: f64) -> Vec<LabeledPoint> {
    let rho = rand_in(seed, 100, -1.5, 1.5);
    let c = rand_in(seed, 101, -6.0, 6.0);
    let n =
        2 + (rand_in(seed, 102, 0.0, (max_points - 2) as f64 + 0.999) as usize).min(max_points - 2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = rand_in(seed, 200 + 2 * i as u64, -9.0, 9.0);
        let side = if rand_in(seed, 201 + 2 * i as u64, 0.0, 1.0) < 0.5 {
            -1.0
        } else {
            1.0
        };
        let off = margin + rand_in(seed, 300 + i as u64, 0.0, 3.5);
        let z = rho * x + c + side * off;
        out.push(LabeledPoint::new(x, z, side as i8).unwrap());
    }
    out
}

/// Column-paired banded points: every sampled x carries one point above and
/// one below the hidden line, so the two classes always overlap in x and a
/// non-vertical max-margin separator exists.
pub fn paired_banded_dataset(seed: u64, max_pairs: usize, margin: f64) -> Vec<LabeledPoint> {
    let rho = rand_in(seed, 100, -1.5, 1.5);
    let c = rand_in(seed, 101, -6.0, 6.0);
    let n_pairs =
        1 + (rand_in(seed, 102, 0.0, (max_pairs - 1) as f64 + 0.999) as usize).min(max_pairs - 1);
    let mut out = Vec::with_capacity(2 * n_pairs);
    for i in 0..n_pairs {
        let x = rand_in(seed, 200 + 3 * i as u64, -9.0, 9.0);
        let up = margin + rand_in(seed, 201 + 3 * i as u64, 0.0, 3.5);
        let down = margin + rand_in(seed, 202 + 3 * i as u64, 0.0, 3.5);
        out.push(LabeledPoint::new(x, rho * x + c + up, 1).unwrap());
        out.push(LabeledPoint::new(x, rho * x + c - down, -1).unwrap());
    }
    out
}

/// Uniform points with independent random labels.
pub fn random_label_dataset(seed: u64, max_points: usize) -> Vec<LabeledPoint> {
    let n =
        1 + (rand_in(seed, 400, 0.0, (max_points - 1) as f64 + 0.999) as usize).min(max_points - 1);
    (0..n)
        .map(|i| {
            let x = rand_in(seed, 500 + 3 * i as u64, -9.0, 9.0);
            let z = rand_in(seed, 501 + 3 * i as u64, -9.0, 9.0);
            let label = if rand_in(seed, 502 + 3 * i as u64, 0.0, 1.0) < 0.5 {
                -1
            } else {
                1
            };
            LabeledPoint::new(x, z, label).unwrap()
        })
        .collect()
}

/// Jittered four-corner layout with alternating labels; never separable for
/// small jitter.
pub fn xor_dataset(seed: u64) -> Vec<LabeledPoint> {
    let corners = [(0.0, 0.0, 1), (4.0, 4.0, 1), (0.0, 4.0, -1), (4.0, 0.0, -1)];
    corners
        .iter()
        .enumerate()
        .map(|(i, &(x, z, l))| {
            let jx = rand_in(seed, 600 + 2 * i as u64, -0.3, 0.3);
            let jz = rand_in(seed, 601 + 2 * i as u64, -0.3, 0.3);
            LabeledPoint::new(x + jx, z + jz, l).unwrap()
        })
        .collect()
}
