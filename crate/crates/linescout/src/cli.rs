//! Experiment runner: scenario ingestion, deterministic/stochastic runs,
//! Monte Carlo calibration batches, and artifact emission (CSV logs, SVG
//! plot, plain-text report).
//!
//! CSV outputs are byte-deterministic for a fixed scenario and flags. The
//! report repeats only numbers recomputable from the emitted CSVs.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::belief::BeliefError;
use crate::control_det::{run_det, ControlError, DetRun, TrajPoint};
use crate::control_stoch::{run_stoch, StochConfig, StochError, StochRun};
use crate::estimator::{
    bisector_estimate, estimation_error, max_margin_estimate, polygon_center_estimate, Estimate,
};
use crate::geometry::{intercept_interval, slope_set, LabeledPoint, ParamPolygon};
use crate::oracle;
use crate::world::{rng, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Control(#[from] ControlError),
    #[error("{0}")]
    Belief(#[from] BeliefError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Input(String),
    #[error("stochastic mode requires a scenario with a [noise] section")]
    MissingNoise,
}

impl From<StochError> for CliError {
    fn from(e: StochError) -> Self {
        match e {
            StochError::Control(c) => CliError::Control(c),
            StochError::Belief(b) => CliError::Belief(b),
            StochError::Scenario(s) => CliError::Scenario(s),
            StochError::MissingNoise => CliError::MissingNoise,
        }
    }
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for runtime dead ends.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Input(_) | CliError::MissingNoise => 2,
            CliError::Control(ControlError::Stuck { .. }) => 3,
            CliError::Belief(_) => 3,
            CliError::Control(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Det,
    Stoch,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub no_svg: bool,
    /// Credible level summarized for stochastic runs.
    pub level: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            no_svg: false,
            level: 0.8,
        }
    }
}

/// Summary of one finished run, also serialized into `report.txt`.
#[derive(Debug)]
pub struct RunReport {
    pub scenario_hash: u64,
    pub mode: Mode,
    pub steps: usize,
    pub estimates: Vec<(Estimate, Option<(f64, f64)>, Option<f64>)>,
    pub slope_bounds_deg: Option<(f64, f64)>,
    pub intercept_bounds: Option<(f64, f64)>,
    pub belief_summary: Option<String>,
    pub wall_ms: u128,
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

fn write_trajectory_csv(path: &Path, trajectory: &[TrajPoint]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("step,x,z,theta_rad,v,w,true_label,observed_label,problem_solved\n");
    for tp in trajectory {
        let (v, w) = match tp.action {
            Some(a) => (fmt_f(a.v), fmt_f(a.w)),
            None => (String::new(), String::new()),
        };
        let tag = match tp.solved {
            Some((p, st)) => format!("{}{}", p, st.suffix()),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            tp.step,
            fmt_f(tp.state.x),
            fmt_f(tp.state.z),
            fmt_f(tp.state.theta),
            v,
            w,
            tp.true_label,
            tp.observed,
            tag
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_dataset_csv(
    path: &Path,
    scenario: &Scenario,
    samples: &[LabeledPoint],
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("x,z,label,source\n");
    for a in &scenario.anchors {
        let _ = writeln!(out, "{},{},{},anchor", fmt_f(a.x), fmt_f(a.z), a.label);
    }
    for p in samples {
        let _ = writeln!(out, "{},{},{},sample", fmt_f(p.x), fmt_f(p.z), p.label);
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_belief_csv(path: &Path, run: &StochRun) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("step,hypothesis_id,eps_string,weight,theta_lo_deg,theta_hi_deg,c_lo,c_hi\n");
    for row in &run.belief_log {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.step,
            row.hypothesis_id,
            row.eps_string,
            fmt_f(row.weight),
            fmt_f(row.theta_lo_deg),
            fmt_f(row.theta_hi_deg),
            fmt_f(row.c_lo),
            fmt_f(row.c_hi)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Minimal static SVG: workspace frame, anchors, trajectory, the hidden
/// line (dashed), estimate lines, and optionally the credible band.
fn write_svg(
    path: &Path,
    scenario: &Scenario,
    trajectory: &[TrajPoint],
    estimates: &[Estimate],
    band: Option<((f64, f64), (f64, f64))>,
) -> Result<(), CliError> {
    let ws = &scenario.workspace;
    let size = 640.0;
    let pad = 40.0;
    let sx = (size - 2.0 * pad) / (ws.x_max - ws.x_min);
    let sz = (size - 2.0 * pad) / (ws.z_max - ws.z_min);
    let px = |x: f64| pad + (x - ws.x_min) * sx;
    let pz = |z: f64| size - pad - (z - ws.z_min) * sz;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        s,
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        px(ws.x_min),
        pz(ws.z_max),
        (ws.x_max - ws.x_min) * sx,
        (ws.z_max - ws.z_min) * sz
    );
    let draw_line = |rho: f64, c: f64, color: &str, dash: &str, s: &mut String| {
        let z0 = rho * ws.x_min + c;
        let z1 = rho * ws.x_max + c;
        let _ = writeln!(
            s,
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\"{} />",
            px(ws.x_min),
            pz(z0),
            px(ws.x_max),
            pz(z1),
            color,
            dash
        );
    };
    if let Some(((t_lo, c_lo), (t_hi, c_hi))) = band {
        draw_line(t_lo.tan(), c_lo, "#9ecae1", " stroke-width=\"1\"", &mut s);
        draw_line(t_hi.tan(), c_hi, "#9ecae1", " stroke-width=\"1\"", &mut s);
    }
    draw_line(
        scenario.classifier.rho,
        scenario.classifier.c,
        "#555555",
        " stroke-dasharray=\"6 4\"",
        &mut s,
    );
    let palette = ["#d62728", "#2ca02c", "#9467bd", "#8c564b"];
    for (i, e) in estimates.iter().enumerate() {
        draw_line(e.rho, e.c, palette[i % palette.len()], "", &mut s);
    }
    for a in &scenario.anchors {
        let fill = if a.label > 0 { "#ff7f0e" } else { "#1f77b4" };
        let _ = writeln!(
            s,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{}\" stroke=\"black\"/>",
            px(a.x),
            pz(a.z),
            fill
        );
    }
    if trajectory.len() > 1 {
        let pts: Vec<String> = trajectory
            .iter()
            .map(|tp| format!("{:.2},{:.2}", px(tp.state.x), pz(tp.state.z)))
            .collect();
        let _ = writeln!(
            s,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
            pts.join(" ")
        );
    }
    for tp in trajectory {
        let fill = match tp.observed {
            1 => "#ff7f0e",
            -1 => "#1f77b4",
            _ => "#999999",
        };
        let _ = writeln!(
            s,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>",
            px(tp.state.x),
            pz(tp.state.z),
            fill
        );
    }
    let _ = writeln!(s, "</svg>");
    std::fs::write(path, s)?;
    Ok(())
}

fn estimate_block(
    scenario: &Scenario,
    dataset: &[LabeledPoint],
    polygon: &ParamPolygon,
) -> Vec<(Estimate, Option<(f64, f64)>, Option<f64>)> {
    let mut out = Vec::new();
    if let Ok(e) = bisector_estimate(dataset, scenario.min_pair_separation()) {
        out.push((e, Some(estimation_error(&e, &scenario.classifier)), None));
    }
    if let Ok((e, margin)) = max_margin_estimate(dataset) {
        out.push((
            e,
            Some(estimation_error(&e, &scenario.classifier)),
            Some(margin),
        ));
    }
    if let Ok(e) = polygon_center_estimate(polygon) {
        out.push((e, Some(estimation_error(&e, &scenario.classifier)), None));
    }
    out
}

fn render_report(r: &RunReport, scenario: &Scenario) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario_hash: {:016x}", r.scenario_hash);
    let _ = writeln!(
        s,
        "mode: {}",
        if r.mode == Mode::Det { "det" } else { "stoch" }
    );
    let _ = writeln!(s, "steps: {}", r.steps);
    let _ = writeln!(
        s,
        "true_classifier: rho={} theta_deg={} c={}",
        scenario.classifier.rho,
        scenario.classifier.theta().to_degrees(),
        scenario.classifier.c
    );
    if let Some((lo, hi)) = r.slope_bounds_deg {
        let _ = writeln!(s, "slope_bounds_deg: [{lo}, {hi}]");
    }
    if let Some((lo, hi)) = r.intercept_bounds {
        let _ = writeln!(s, "intercept_bounds_m: [{lo}, {hi}]");
    }
    let _ = writeln!(s, "estimates:");
    for (e, err, margin) in &r.estimates {
        let mut line = format!(
            "  {}: rho={} theta_deg={} c={}",
            e.method,
            e.rho,
            e.theta().to_degrees(),
            e.c
        );
        if let Some((dt, dc)) = err {
            let _ = write!(line, " dtheta_deg={} dc_m={}", dt.to_degrees(), dc);
        }
        if let Some(m) = margin {
            let _ = write!(line, " margin_m={m}");
        }
        let _ = writeln!(s, "{line}");
    }
    if let Some(b) = &r.belief_summary {
        let _ = writeln!(s, "{b}");
    }
    let _ = writeln!(s, "wall_time_ms: {}", r.wall_ms);
    s
}

/// Execute one run and write its artifacts into `out_dir`.
pub fn cmd_run(
    scenario_path: &Path,
    mode: Mode,
    out_dir: &Path,
    overrides: &[(String, String)],
    opts: &RunOptions,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let scenario = Scenario::from_file(scenario_path, overrides)?;
    std::fs::create_dir_all(out_dir)?;
    match mode {
        Mode::Det => {
            let run: DetRun = run_det(&scenario)?;
            write_trajectory_csv(&out_dir.join("trajectory.csv"), &run.trajectory)?;
            let samples: Vec<LabeledPoint> = run.dataset[4..].to_vec();
            write_dataset_csv(&out_dir.join("dataset.csv"), &scenario, &samples)?;
            let estimates = estimate_block(&scenario, &run.dataset, &run.polygon);
            let slope_hull = slope_set(&run.polygon).hull();
            let report = RunReport {
                scenario_hash: scenario.content_hash(),
                mode,
                steps: scenario.horizon,
                slope_bounds_deg: slope_hull.map(|iv| (iv.lo.to_degrees(), iv.hi.to_degrees())),
                intercept_bounds: intercept_interval(&run.polygon).map(|iv| (iv.lo, iv.hi)),
                estimates,
                belief_summary: None,
                wall_ms: started.elapsed().as_millis(),
            };
            std::fs::write(
                out_dir.join("report.txt"),
                render_report(&report, &scenario),
            )?;
            if !opts.no_svg {
                let es: Vec<Estimate> = report.estimates.iter().map(|(e, _, _)| *e).collect();
                write_svg(
                    &out_dir.join("plot.svg"),
                    &scenario,
                    &run.trajectory,
                    &es,
                    None,
                )?;
            }
            Ok(report)
        }
        Mode::Stoch => {
            if scenario.noise.is_none() {
                return Err(CliError::MissingNoise);
            }
            let run: StochRun = run_stoch(&scenario, &StochConfig::default())?;
            write_trajectory_csv(&out_dir.join("trajectory.csv"), &run.trajectory)?;
            write_belief_csv(&out_dir.join("belief.csv"), &run)?;
            // Estimators run on the MAP hypothesis's implied labels.
            let map = run.belief.map_hypothesis()?;
            let mut dataset = scenario.anchors.to_vec();
            for (pos, label) in run.belief.positions().iter().zip(&map.implied) {
                dataset.push(LabeledPoint::new(pos.0, pos.1, *label).expect("labels +-1"));
            }
            write_dataset_csv(&out_dir.join("dataset.csv"), &scenario, &dataset[4..])?;
            let estimates = estimate_block(&scenario, &dataset, &map.polygon);
            let cs = run.belief.credible_sets(opts.level);
            let mut belief_summary = String::new();
            let _ = writeln!(
                belief_summary,
                "hypotheses: {}",
                run.belief.hypotheses.len()
            );
            if let (Some(slope), Some(ic)) = (&run.report.slope, &run.report.intercept) {
                let _ = writeln!(
                    belief_summary,
                    "map_hypothesis: eps={} theta_deg=[{}, {}] c=[{}, {}] probability={}",
                    run.belief.map_hypothesis()?.eps_string(),
                    slope.lo.to_degrees(),
                    slope.hi.to_degrees(),
                    ic.lo,
                    ic.hi,
                    run.report.probability
                );
            }
            let hull = cs.slopes.hull();
            let _ = write!(
                belief_summary,
                "credible_level_{}: attained={} theta_deg=[{}, {}] c=[{}, {}]",
                opts.level,
                cs.attained,
                hull.map_or(f64::NAN, |h| h.lo.to_degrees()),
                hull.map_or(f64::NAN, |h| h.hi.to_degrees()),
                cs.intercept.map_or(f64::NAN, |i| i.lo),
                cs.intercept.map_or(f64::NAN, |i| i.hi)
            );
            let slope_hull = slope_set(&map.polygon).hull();
            let report = RunReport {
                scenario_hash: scenario.content_hash(),
                mode,
                steps: scenario.horizon,
                slope_bounds_deg: slope_hull.map(|iv| (iv.lo.to_degrees(), iv.hi.to_degrees())),
                intercept_bounds: intercept_interval(&map.polygon).map(|iv| (iv.lo, iv.hi)),
                estimates,
                belief_summary: Some(belief_summary),
                wall_ms: started.elapsed().as_millis(),
            };
            std::fs::write(
                out_dir.join("report.txt"),
                render_report(&report, &scenario),
            )?;
            if !opts.no_svg {
                let es: Vec<Estimate> = report.estimates.iter().map(|(e, _, _)| *e).collect();
                let band = hull
                    .zip(cs.intercept)
                    .map(|(h, ic)| ((h.lo, ic.lo), (h.hi, ic.hi)));
                write_svg(
                    &out_dir.join("plot.svg"),
                    &scenario,
                    &run.trajectory,
                    &es,
                    band,
                )?;
            }
            Ok(report)
        }
    }
}

/// Outcome of one calibration replicate.
#[derive(Debug, Clone)]
pub struct CoverageRow {
    pub run: usize,
    pub seed: u64,
    pub attained: f64,
    pub theta_lo_deg: f64,
    pub theta_hi_deg: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub theta_covered: bool,
    pub c_covered: bool,
    pub joint_covered: bool,
    pub hypotheses: usize,
}

/// Aggregate of a calibration batch.
#[derive(Debug)]
pub struct Calibration {
    pub rows: Vec<CoverageRow>,
    pub coverage: f64,
    pub theta_coverage: f64,
    pub c_coverage: f64,
}

/// Run `runs` seeded replicates of the stochastic loop and measure how often
/// the level-`level` credible set covers the true parameters.
pub fn calibrate(scenario: &Scenario, runs: usize, level: f64) -> Result<Calibration, CliError> {
    if scenario.noise.is_none() {
        return Err(CliError::MissingNoise);
    }
    let mut rows = Vec::with_capacity(runs);
    for k in 0..runs {
        let mut sc = scenario.clone();
        sc.seed = rng::replicate_seed(scenario.seed, k as u64);
        let run = run_stoch(&sc, &StochConfig::default())?;
        let cs = run.belief.credible_sets(level);
        let theta_true = sc.classifier.theta();
        let theta_covered = cs.slopes.contains(theta_true);
        let c_covered = cs
            .intercept
            .map_or(false, |iv| iv.contains(sc.classifier.c));
        let hull = cs.slopes.hull();
        rows.push(CoverageRow {
            run: k,
            seed: sc.seed,
            attained: cs.attained,
            theta_lo_deg: hull.map_or(f64::NAN, |h| h.lo.to_degrees()),
            theta_hi_deg: hull.map_or(f64::NAN, |h| h.hi.to_degrees()),
            c_lo: cs.intercept.map_or(f64::NAN, |i| i.lo),
            c_hi: cs.intercept.map_or(f64::NAN, |i| i.hi),
            theta_covered,
            c_covered,
            joint_covered: theta_covered && c_covered,
            hypotheses: run.belief.hypotheses.len(),
        });
    }
    let frac = |f: &dyn Fn(&CoverageRow) -> bool| {
        rows.iter().filter(|r| f(r)).count() as f64 / rows.len().max(1) as f64
    };
    Ok(Calibration {
        coverage: frac(&|r| r.joint_covered),
        theta_coverage: frac(&|r| r.theta_covered),
        c_coverage: frac(&|r| r.c_covered),
        rows,
    })
}

/// Calibration entry point: writes `coverage.csv` (per-run rows plus an
/// aggregate row) into `out_dir`.
pub fn cmd_calibrate(
    scenario_path: &Path,
    runs: usize,
    level: f64,
    out_dir: &Path,
    overrides: &[(String, String)],
) -> Result<Calibration, CliError> {
    if runs == 0 {
        return Err(CliError::Input("runs must be positive".into()));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(CliError::Input("level must lie in (0, 1]".into()));
    }
    let scenario = Scenario::from_file(scenario_path, overrides)?;
    let cal = calibrate(&scenario, runs, level)?;
    std::fs::create_dir_all(out_dir)?;
    let mut out = String::new();
    out.push_str(
        "run,seed,attained,theta_lo_deg,theta_hi_deg,c_lo,c_hi,theta_covered,c_covered,joint_covered,hypotheses\n",
    );
    for r in &cal.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.seed,
            fmt_f(r.attained),
            fmt_f(r.theta_lo_deg),
            fmt_f(r.theta_hi_deg),
            fmt_f(r.c_lo),
            fmt_f(r.c_hi),
            r.theta_covered as u8,
            r.c_covered as u8,
            r.joint_covered as u8,
            r.hypotheses
        );
    }
    let _ = writeln!(
        out,
        "aggregate,,,,,,,{},{},{},",
        fmt_f(cal.theta_coverage),
        fmt_f(cal.c_coverage),
        fmt_f(cal.coverage)
    );
    std::fs::write(out_dir.join("coverage.csv"), out)?;
    Ok(cal)
}

/// Read a labeled dataset: CSV or whitespace rows `x z label`, `#` comments,
/// optional header.
pub fn read_dataset(path: &Path) -> Result<Vec<LabeledPoint>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 3 {
            return Err(CliError::Input(format!(
                "{}:{}: expected `x,z,label`, got {t:?}",
                path.display(),
                lineno + 1
            )));
        }
        if lineno == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header row
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.parse::<f64>().map_err(|_| {
                CliError::Input(format!(
                    "{}:{}: bad number {s:?}",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        let label = parse(fields[2])? as i8;
        out.push(
            LabeledPoint::new(parse(fields[0])?, parse(fields[1])?, label)
                .map_err(|e| CliError::Input(e.to_string()))?,
        );
    }
    Ok(out)
}

/// Which brute-force oracle to expose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    SeparabilityGrid,
    PolygonProject,
    MarginGrid,
}

/// Run an oracle subcommand against a dataset file and return the printable
/// verdict.
pub fn cmd_oracle(
    kind: OracleKind,
    dataset_path: &Path,
    bx: Option<(f64, f64, f64, f64)>,
) -> Result<String, CliError> {
    let points = read_dataset(dataset_path)?;
    if points.iter().any(|p| p.label == 0) {
        return Err(CliError::Input(
            "label 0 not allowed in oracle datasets".into(),
        ));
    }
    match kind {
        OracleKind::SeparabilityGrid => {
            let lp = oracle::lp_separable(&points);
            let grid = oracle::grid_margin(&points, 0.05f64.to_radians()).is_some();
            Ok(format!(
                "lp: {}\ngrid: {}\n",
                if lp { "separable" } else { "non-separable" },
                if grid { "separable" } else { "non-separable" }
            ))
        }
        OracleKind::PolygonProject => {
            let (tmin, tmax, cmin, cmax) = bx.unwrap_or((-1.2, 1.2, -10.0, 10.0));
            match oracle::grid_project(&points, tmin, tmax, cmin, cmax, 0.25f64.to_radians(), 0.05)
            {
                None => Ok("empty\n".to_string()),
                Some(gb) => Ok(format!(
                    "theta_deg: [{}, {}]\nc: [{}, {}]\n",
                    gb.theta_lo.to_degrees(),
                    gb.theta_hi.to_degrees(),
                    gb.c_lo,
                    gb.c_hi
                )),
            }
        }
        OracleKind::MarginGrid => match oracle::grid_margin(&points, 0.05f64.to_radians()) {
            None => Ok("non-separable\n".to_string()),
            Some((margin, rho, c)) => Ok(format!("margin: {margin}\nrho: {rho}\nc: {c}\n")),
        },
    }
}
