//! Acceptance suite. Each test exercises one criterion at its pinned
//! tolerance and prints a single PASS line (failures abort with the detail).
//!
//! A1  default-scenario reproduction: bisector within 3 deg / 0.5 m in <= 5 s
//! A2  convergence trend over twenty random scenarios, m = 10 vs m = 40
//! A3  geometry matches the LP and grid oracles on 100 random datasets
//! A4  version-space invariants hold with zero violations on the A2 batch
//! A5  belief exactness: p = 1 reduction, normalization, truth retention
//! A6  credible-set calibration: level-0.8 coverage >= 0.70 over 200 runs
//! A7  exact max-margin beats the direction-grid oracle on 50 datasets

mod common;

use std::sync::OnceLock;
use std::time::Instant;

use linescout::control_det::{run_det, DetRun, SolveStage};
use linescout::control_stoch::{run_stoch, StochConfig, StochRun};
use linescout::estimator::{bisector_estimate, estimation_error, max_margin_estimate};
use linescout::geometry::{
    feasible_polygon, intercept_interval, is_separable, slope_set, LabeledPoint,
};
use linescout::oracle;
use linescout::world::{rng, Scenario};

use common::{
    banded_dataset, median, paired_banded_dataset, polygon_vertex_distance, random_label_dataset,
    random_scenario, replay_invariants, xor_dataset, BATCH_BASE_SEED, BATCH_MIN_SEPARATION,
    BATCH_SIZE,
};

/// The A2/A4 batch: (scenario, run at m = 10, run at m = 40), computed once.
fn det_batch() -> &'static Vec<(Scenario, DetRun, DetRun)> {
    static BATCH: OnceLock<Vec<(Scenario, DetRun, DetRun)>> = OnceLock::new();
    BATCH.get_or_init(|| {
        (0..BATCH_SIZE)
            .map(|k| {
                let mut s = random_scenario(BATCH_BASE_SEED + k);
                s.horizon = 10;
                let short = run_det(&s).expect("m=10 run");
                s.horizon = 40;
                let long = run_det(&s).expect("m=40 run");
                (s, short, long)
            })
            .collect()
    })
}

/// The A5/A6 batch: 200 seeded stochastic replicates of the default noisy
/// scenario, plus the wall time of the whole block.
fn stoch_batch() -> &'static (Vec<(Scenario, StochRun)>, std::time::Duration) {
    static BATCH: OnceLock<(Vec<(Scenario, StochRun)>, std::time::Duration)> = OnceLock::new();
    BATCH.get_or_init(|| {
        let base = Scenario::builtin_stoch();
        let started = Instant::now();
        let runs = (0..200u64)
            .map(|k| {
                let mut s = base.clone();
                s.seed = rng::replicate_seed(base.seed, k);
                let run = run_stoch(&s, &StochConfig::default()).expect("stochastic run");
                (s, run)
            })
            .collect();
        (runs, started.elapsed())
    })
}

#[test]
fn a1_default_scenario_reproduction() {
    let started = Instant::now();
    let s = Scenario::builtin_det();
    assert_eq!(s.v_grid.len(), 21);
    assert_eq!(s.w_grid.len(), 315);
    assert!((s.classifier.rho - 0.41).abs() < 1e-12);
    assert!((s.classifier.c - 3.5).abs() < 1e-12);
    assert!((s.varrho - 0.1).abs() < 1e-12);
    assert_eq!(s.horizon, 10);

    let run = run_det(&s).expect("deterministic run");
    let est = bisector_estimate(&run.dataset, s.min_pair_separation()).expect("estimate");
    let (dtheta, dc) = estimation_error(&est, &s.classifier);
    let elapsed = started.elapsed();
    assert!(
        dtheta.to_degrees() <= 3.0,
        "A1 FAIL: slope error {} deg exceeds 3 deg",
        dtheta.to_degrees()
    );
    assert!(dc <= 0.5, "A1 FAIL: intercept error {dc} m exceeds 0.5 m");
    assert!(
        elapsed.as_secs_f64() <= 5.0,
        "A1 FAIL: runtime {elapsed:?} exceeds 5 s"
    );
    println!(
        "A1 PASS: bisector dtheta = {:.3} deg (<= 3), dc = {:.3} m (<= 0.5), runtime {:.2?} (<= 5 s)",
        dtheta.to_degrees(),
        dc,
        elapsed
    );
}

#[test]
fn a2_convergence_trend_over_random_scenarios() {
    let batch = det_batch();
    let mut dt10 = Vec::new();
    let mut dc10 = Vec::new();
    let mut dt40 = Vec::new();
    let mut dc40 = Vec::new();
    for (k, (s, short, long)) in batch.iter().enumerate() {
        let e10 = bisector_estimate(&short.dataset, BATCH_MIN_SEPARATION)
            .unwrap_or_else(|e| panic!("scenario {k} m=10 estimate: {e}"));
        let e40 = bisector_estimate(&long.dataset, BATCH_MIN_SEPARATION)
            .unwrap_or_else(|e| panic!("scenario {k} m=40 estimate: {e}"));
        let (a, b) = estimation_error(&e10, &s.classifier);
        let (c, d) = estimation_error(&e40, &s.classifier);
        dt10.push(a);
        dc10.push(b);
        dt40.push(c);
        dc40.push(d);

        // Closest-opposite-pair distance is non-increasing across the flip
        // events of every run.
        for run in [short, long] {
            let mut prev = f64::INFINITY;
            for &flip_step in &run.flips {
                let dataset: Vec<LabeledPoint> = s
                    .anchors
                    .iter()
                    .copied()
                    .chain(run.trajectory[1..=flip_step].iter().filter_map(|tp| {
                        (tp.observed != 0).then(|| {
                            LabeledPoint::new(tp.state.x, tp.state.z, tp.observed).unwrap()
                        })
                    }))
                    .collect();
                let mut best = f64::INFINITY;
                for n in dataset.iter().filter(|p| p.label == -1) {
                    for p in dataset.iter().filter(|p| p.label == 1) {
                        best = best.min(n.distance(p));
                    }
                }
                assert!(
                    best <= prev + 1e-12,
                    "A2 FAIL: scenario {k} pair distance grew at flip {flip_step}"
                );
                prev = best;
            }
        }
    }
    let (m_dt10, m_dc10) = (median(&mut dt10), median(&mut dc10));
    let (m_dt40, m_dc40) = (median(&mut dt40), median(&mut dc40));
    assert!(
        m_dt40 < m_dt10,
        "A2 FAIL: median dtheta {m_dt40} rad at m=40 not below {m_dt10} rad at m=10"
    );
    assert!(
        m_dc40 < m_dc10,
        "A2 FAIL: median dc {m_dc40} m at m=40 not below {m_dc10} m at m=10"
    );
    println!(
        "A2 PASS: median dtheta {:.4} -> {:.4} deg, median dc {:.4} -> {:.4} m (both strictly down)",
        m_dt10.to_degrees(),
        m_dt40.to_degrees(),
        m_dc10,
        m_dc40
    );
}

#[test]
fn a3_geometry_matches_oracles() {
    let theta_step = 0.25f64.to_radians();
    let c_step = 0.05;
    let mut datasets: Vec<Vec<LabeledPoint>> = Vec::with_capacity(100);
    for k in 0..40u64 {
        datasets.push(banded_dataset(7_000 + k, 12, 0.5));
    }
    for k in 0..30u64 {
        datasets.push(random_label_dataset(8_000 + k, 12));
    }
    for k in 0..20u64 {
        datasets.push(xor_dataset(9_000 + k));
    }
    for k in 0..10u64 {
        datasets.push(banded_dataset(10_000 + k, 4, 0.5));
    }
    assert_eq!(datasets.len(), 100);

    for (i, pts) in datasets.iter().enumerate() {
        let ours = is_separable(pts).unwrap();
        let lp = oracle::lp_separable(pts);
        assert_eq!(
            ours, lp,
            "A3 FAIL: separability mismatch on dataset {i}: {pts:?}"
        );

        let bx = linescout::geometry::ParamBox::new(-1.2, 1.2, -10.0, 10.0).unwrap();
        let poly = feasible_polygon(pts, &bx).unwrap();
        let gb = oracle::grid_project(pts, -1.2, 1.2, -10.0, 10.0, theta_step, c_step);
        match (poly.is_empty(), gb) {
            (true, None) => {}
            (true, Some(_)) => panic!("A3 FAIL: oracle found points in empty polygon {i}"),
            (false, None) => {
                let hull = slope_set(&poly).hull().unwrap();
                let ic = intercept_interval(&poly).unwrap();
                assert!(
                    hull.width() <= theta_step + 1e-9 && ic.width() <= c_step + 1e-9,
                    "A3 FAIL: grid oracle missed a super-grid polygon on dataset {i}"
                );
            }
            (false, Some(gb)) => {
                let hull = slope_set(&poly).hull().unwrap();
                let ic = intercept_interval(&poly).unwrap();
                for (name, got, want, step) in [
                    ("theta_lo", hull.lo, gb.theta_lo, theta_step),
                    ("theta_hi", hull.hi, gb.theta_hi, theta_step),
                    ("c_lo", ic.lo, gb.c_lo, c_step),
                    ("c_hi", ic.hi, gb.c_hi, c_step),
                ] {
                    assert!(
                        (got - want).abs() <= step + 1e-9,
                        "A3 FAIL: {name} off by {} (> one grid step {step}) on dataset {i}",
                        (got - want).abs()
                    );
                }
            }
        }
    }
    println!(
        "A3 PASS: separability matches the LP oracle and projections match the \
         0.25 deg / 0.05 m grid oracle on all 100 datasets"
    );
}

#[test]
fn a4_version_space_invariants_zero_violations() {
    let batch = det_batch();
    let mut checked = 0usize;
    for (k, (s, short, long)) in batch.iter().enumerate() {
        for run in [short, long] {
            let stats = replay_invariants(s, run);
            assert_eq!(
                stats.nesting_violations, 0,
                "A4 FAIL: nesting, scenario {k}"
            );
            assert_eq!(
                stats.revisit_violations, 0,
                "A4 FAIL: revisit, scenario {k}"
            );
            assert_eq!(
                stats.certainty_violations, 0,
                "A4 FAIL: visited point was certain, scenario {k}"
            );
            checked += run.trajectory.len() - 1;
        }
    }
    println!(
        "A4 PASS: polygon nesting, 1e-6 no-revisit and visited-point uncertainty hold \
         across all {checked} steps of the A2 batch (zero violations)"
    );
}

#[test]
fn a5_belief_exactness() {
    // p = 1 reduction to the deterministic version space.
    let mut degenerate = Scenario::builtin_stoch();
    if let Some(nf) = &mut degenerate.noise {
        nf.keep_prob = 1.0;
    }
    let run = run_stoch(&degenerate, &StochConfig::default()).expect("p = 1 run");
    assert_eq!(
        run.belief.hypotheses.len(),
        1,
        "A5 FAIL: p = 1 left several hypotheses"
    );
    let mut pts = degenerate.anchors.to_vec();
    for tp in &run.trajectory[1..] {
        if tp.observed != 0 && tp.solved.map(|(_, st)| st) != Some(SolveStage::Rotation) {
            pts.push(LabeledPoint::new(tp.state.x, tp.state.z, tp.observed).unwrap());
        }
    }
    let det_poly = feasible_polygon(&pts, &degenerate.initial_box).unwrap();
    let dist = polygon_vertex_distance(&det_poly, &run.belief.hypotheses[0].polygon)
        .expect("A5 FAIL: vertex counts differ between belief and deterministic polygon");
    assert!(
        dist <= 1e-9,
        "A5 FAIL: polygon vertex distance {dist} exceeds 1e-9"
    );

    // 200 seeded runs: normalization at every step and truth retention.
    let (batch, elapsed) = stoch_batch();
    for (k, (s, run)) in batch.iter().enumerate() {
        assert!(
            run.belief.hypotheses.len() <= 1024,
            "A5 FAIL: run {k} hypothesis blow-up"
        );
        let mut per_step: std::collections::BTreeMap<usize, f64> = Default::default();
        for row in &run.belief_log {
            *per_step.entry(row.step).or_insert(0.0) += row.weight;
        }
        for (step, total) in per_step {
            assert!(
                (total - 1.0).abs() <= 1e-9,
                "A5 FAIL: run {k} step {step} weights sum to {total}"
            );
        }
        let mut actual = String::new();
        for tp in &run.trajectory[1..] {
            if tp.observed != 0 && tp.solved.map(|(_, st)| st) != Some(SolveStage::Rotation) {
                actual.push(if tp.epsilon > 0 { '+' } else { '-' });
            }
        }
        for prefix_len in 0..=actual.len() {
            let prefix = &actual[..prefix_len];
            let alive = run
                .belief_log
                .iter()
                .any(|row| row.step == prefix_len && row.eps_string == prefix);
            assert!(
                alive,
                "A5 FAIL: run {k} (seed {}): realized prefix {prefix:?} pruned",
                s.seed
            );
        }
    }
    assert!(
        elapsed.as_secs_f64() <= 60.0,
        "A5 FAIL: 200-run batch took {elapsed:?} (> 60 s)"
    );
    println!(
        "A5 PASS: p = 1 reduces to the deterministic polygon (<= 1e-9), weights normalize \
         to 1e-9 at every step, the realized noise sequence survives all 200 runs, \
         batch time {elapsed:.2?} (<= 60 s)"
    );
}

#[test]
fn a6_credible_set_calibration() {
    let (batch, _) = stoch_batch();
    let level = 0.8;
    let mut covered = 0usize;
    let mut theta_cov = 0usize;
    let mut c_cov = 0usize;
    println!("A6 coverage table (level {level}):");
    println!("run seed               attained theta_deg_lo theta_deg_hi c_lo    c_hi    covered");
    for (k, (s, run)) in batch.iter().enumerate() {
        let cs = run.belief.credible_sets(level);
        let theta_in = cs.slopes.contains(s.classifier.theta());
        let c_in = cs.intercept.map_or(false, |iv| iv.contains(s.classifier.c));
        theta_cov += theta_in as usize;
        c_cov += c_in as usize;
        let joint = theta_in && c_in;
        covered += joint as usize;
        let hull = cs.slopes.hull().unwrap();
        let ic = cs.intercept.unwrap();
        println!(
            "{k:3} {:18} {:8.4} {:12.3} {:12.3} {:7.3} {:7.3} {}",
            s.seed,
            cs.attained,
            hull.lo.to_degrees(),
            hull.hi.to_degrees(),
            ic.lo,
            ic.hi,
            if joint { "yes" } else { "NO" }
        );
    }
    let coverage = covered as f64 / batch.len() as f64;
    assert!(
        coverage >= 0.70,
        "A6 FAIL: empirical coverage {coverage} below 0.70 at level {level}"
    );
    println!(
        "A6 PASS: empirical coverage {} = {:.3} (>= 0.70) at level {level}; \
         theta coverage {:.3}, intercept coverage {:.3}",
        format_args!("{covered}/{}", batch.len()),
        coverage,
        theta_cov as f64 / batch.len() as f64,
        c_cov as f64 / batch.len() as f64
    );
}

#[test]
fn a7_max_margin_beats_grid_oracle() {
    let theta_step = 0.05f64.to_radians();
    for k in 0..50u64 {
        let pts = paired_banded_dataset(20_000 + k, 5, 0.3);
        let (est, margin) = max_margin_estimate(&pts)
            .unwrap_or_else(|e| panic!("A7 FAIL: dataset {k} unexpectedly failed: {e}"));
        for p in &pts {
            assert!(
                (p.label as f64) * p.residual(est.rho, est.c) > 0.0,
                "A7 FAIL: dataset {k} misclassified a point"
            );
        }
        let (grid_margin, _, _) = oracle::grid_margin(&pts, theta_step)
            .expect("A7 FAIL: grid oracle found no separator on a separable dataset");
        assert!(
            margin >= grid_margin - 1e-4,
            "A7 FAIL: dataset {k} exact margin {margin} below grid margin {grid_margin} - 1e-4"
        );
        assert!(
            margin + 1e-9 >= grid_margin,
            "A7 FAIL: dataset {k} grid beat the exact optimum by {}",
            grid_margin - margin
        );
    }
    println!(
        "A7 PASS: exact margin >= grid margin - 1e-4 and perfect classification on \
         50 random separable datasets"
    );
}
