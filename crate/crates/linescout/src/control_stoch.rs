//! One-step control under the belief and the stochastic sampling loop.
//!
//! P3 and P4 reuse the deterministic one-step machinery with belief-derived
//! heading rules: P3 avoids the slope angles of every hypothesis above a
//! weight floor, P4 steers into the slope angles of the maximum-posterior
//! hypothesis. Certainty regions default to the anchor-only version space;
//! a scenario flag switches to consensus regions of the surviving
//! hypotheses.

use thiserror::Error;

use crate::belief::{BeliefError, BeliefState, CredibleSummary};
use crate::control_det::{
    solve_one_step, ControlError, Problem, SolveStage, Solved, StepConstraints, TrajPoint,
};
use crate::geometry::{
    certainty_label, penetration_depth, slope_set, AngleSet, Interval, ParamPolygon,
};
use crate::world::{heading_slope_angle, observe, step, AgentState, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum StochError {
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("stochastic run requires a noise field in the scenario")]
    MissingNoise,
}

/// Knobs of the stochastic loop.
#[derive(Debug, Clone, Copy)]
pub struct StochConfig {
    /// Hypotheses below this normalized weight do not constrain P3.
    pub weight_floor: f64,
}

impl Default for StochConfig {
    fn default() -> Self {
        Self { weight_floor: 0.05 }
    }
}

impl StochConfig {
    pub fn new(weight_floor: f64) -> Result<Self, ScenarioError> {
        if !(0.0..0.5).contains(&weight_floor) {
            return Err(ScenarioError::Validation(format!(
                "weight_floor must lie in [0, 0.5), got {weight_floor}"
            )));
        }
        Ok(Self { weight_floor })
    }
}

fn floor_slope_sets(belief: &BeliefState, floor: f64) -> Vec<AngleSet> {
    let weights = belief.weights();
    belief
        .hypotheses
        .iter()
        .zip(weights)
        .filter(|(_, w)| *w >= floor)
        .map(|(h, _)| slope_set(&h.polygon))
        .collect()
}

/// Certainty of a landing point for the stochastic problems: anchor-only by
/// default, or the consensus of all floor-passing hypotheses when the
/// scenario asks for current regions.
fn stoch_certainty(
    scenario: &Scenario,
    anchor_poly: &ParamPolygon,
    belief: &BeliefState,
    floor: f64,
    p: (f64, f64),
) -> i8 {
    if !scenario.current_certainty {
        return certainty_label(anchor_poly, p).unwrap_or(0);
    }
    let weights = belief.weights();
    let mut consensus: Option<i8> = None;
    for (h, w) in belief.hypotheses.iter().zip(weights) {
        if w < floor {
            continue;
        }
        let l = certainty_label(&h.polygon, p).unwrap_or(0);
        if l == 0 {
            return 0;
        }
        match consensus {
            None => consensus = Some(l),
            Some(prev) if prev != l => return 0,
            _ => {}
        }
    }
    consensus.unwrap_or(0)
}

/// P3: explore in directions no plausible hypothesis considers a candidate
/// slope.
pub fn solve_p3(
    agent: &AgentState,
    belief: &BeliefState,
    anchor_poly: &ParamPolygon,
    scenario: &Scenario,
    cfg: &StochConfig,
    step_index: usize,
) -> Result<Solved, ControlError> {
    let sets = floor_slope_sets(belief, cfg.weight_floor);
    let union = AngleSet::union_all(sets.iter());
    let certainty =
        |x: f64, z: f64| stoch_certainty(scenario, anchor_poly, belief, cfg.weight_floor, (x, z));
    let penetration = |x: f64, z: f64| penetration_depth(anchor_poly, (x, z));
    let heading_ok = |a: f64| !sets.iter().any(|s| s.contains(a));
    let rotation_target = union
        .complement_gap_midpoint()
        .unwrap_or_else(|| heading_slope_angle(agent.theta));
    solve_one_step(
        agent,
        scenario,
        Problem::P3,
        &StepConstraints {
            certainty: &certainty,
            penetration: &penetration,
            heading_ok: &heading_ok,
            rotation_target,
        },
        step_index,
    )
}

/// P4: probe along the slope candidates of the maximum-posterior hypothesis.
pub fn solve_p4(
    agent: &AgentState,
    belief: &BeliefState,
    anchor_poly: &ParamPolygon,
    scenario: &Scenario,
    cfg: &StochConfig,
    step_index: usize,
) -> Result<Solved, ControlError> {
    let map_set = belief
        .map_hypothesis()
        .map(|h| slope_set(&h.polygon))
        .unwrap_or_else(|_| AngleSet::empty());
    let certainty =
        |x: f64, z: f64| stoch_certainty(scenario, anchor_poly, belief, cfg.weight_floor, (x, z));
    let penetration = |x: f64, z: f64| penetration_depth(anchor_poly, (x, z));
    let heading_ok = |a: f64| map_set.contains(a);
    let rotation_target = map_set
        .widest_interval_midpoint()
        .unwrap_or_else(|| heading_slope_angle(agent.theta));
    solve_one_step(
        agent,
        scenario,
        Problem::P4,
        &StepConstraints {
            certainty: &certainty,
            penetration: &penetration,
            heading_ok: &heading_ok,
            rotation_target,
        },
        step_index,
    )
}

/// Final answer of a stochastic run: the maximum-posterior hypothesis's
/// parameter bounds and its posterior probability.
#[derive(Debug, Clone)]
pub struct MapReport {
    pub slope: Option<Interval>,
    pub intercept: Option<Interval>,
    pub probability: f64,
    pub eps: Vec<i8>,
}

/// Per-step belief snapshot row for logging.
#[derive(Debug, Clone)]
pub struct BeliefRow {
    pub step: usize,
    pub hypothesis_id: usize,
    pub eps_string: String,
    pub weight: f64,
    pub theta_lo_deg: f64,
    pub theta_hi_deg: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

/// Result of a stochastic run.
#[derive(Debug)]
pub struct StochRun {
    pub trajectory: Vec<TrajPoint>,
    pub belief: BeliefState,
    pub report: MapReport,
    pub belief_log: Vec<BeliefRow>,
}

fn snapshot(belief: &BeliefState, log: &mut Vec<BeliefRow>) {
    let weights = belief.weights();
    for (i, h) in belief.hypotheses.iter().enumerate() {
        let hull = slope_set(&h.polygon).hull();
        let ic = intercept_interval_of(&h.polygon);
        log.push(BeliefRow {
            step: belief.step,
            hypothesis_id: i,
            eps_string: h.eps_string(),
            weight: weights[i],
            theta_lo_deg: hull.map_or(f64::NAN, |iv| iv.lo.to_degrees()),
            theta_hi_deg: hull.map_or(f64::NAN, |iv| iv.hi.to_degrees()),
            c_lo: ic.map_or(f64::NAN, |iv| iv.lo),
            c_hi: ic.map_or(f64::NAN, |iv| iv.hi),
        });
    }
}

fn intercept_interval_of(poly: &ParamPolygon) -> Option<Interval> {
    crate::geometry::intercept_interval(poly)
}

/// Stochastic sampling loop: P3 on even steps, P4 on odd steps, exact
/// Bayesian belief update after every observation.
pub fn run_stoch(scenario: &Scenario, cfg: &StochConfig) -> Result<StochRun, StochError> {
    scenario.validate()?;
    let noise = scenario.noise.as_ref().ok_or(StochError::MissingNoise)?;
    let anchor_poly = scenario.anchor_polygon();
    let mut belief = BeliefState::init(anchor_poly.clone());
    let mut agent = scenario.initial_state();
    let mut belief_log = Vec::new();
    snapshot(&belief, &mut belief_log);

    let mut trajectory = vec![TrajPoint {
        step: 0,
        state: agent,
        action: None,
        true_label: scenario.anchors[0].label,
        observed: scenario.anchors[0].label,
        epsilon: 1,
        solved: None,
    }];

    for j in 0..scenario.horizon {
        let solved = if j % 2 == 0 {
            solve_p3(&agent, &belief, &anchor_poly, scenario, cfg, j)?
        } else {
            solve_p4(&agent, &belief, &anchor_poly, scenario, cfg, j)?
        };
        agent = step(&agent, &solved.action);
        let obs = observe(
            Some(noise),
            &scenario.classifier,
            agent.position(),
            scenario.seed,
            (j + 1) as u64,
        );
        if obs.observed != 0 && solved.stage != SolveStage::Rotation {
            belief = belief.update(agent.position(), obs.observed, noise)?;
        } else if obs.observed == 0 {
            eprintln!(
                "warning: on-boundary sample at ({}, {}) excluded from belief",
                agent.x, agent.z
            );
        }
        snapshot(&belief, &mut belief_log);
        trajectory.push(TrajPoint {
            step: j + 1,
            state: agent,
            action: Some(solved.action),
            true_label: obs.true_label,
            observed: obs.observed,
            epsilon: obs.epsilon,
            solved: Some((solved.problem, solved.stage)),
        });
    }

    let report = {
        let idx = belief.map_index()?;
        let map = &belief.hypotheses[idx];
        MapReport {
            slope: slope_set(&map.polygon).hull(),
            intercept: intercept_interval_of(&map.polygon),
            probability: belief.weight(idx),
            eps: map.eps.clone(),
        }
    };
    Ok(StochRun {
        trajectory,
        belief,
        report,
        belief_log,
    })
}

/// Credible summary at `level` for a finished run.
pub fn credible_summary(run: &StochRun, level: f64) -> CredibleSummary {
    run.belief.credible_sets(level)
}
