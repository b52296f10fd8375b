//! One-step control problems over the discrete action grid and the
//! deterministic sampling loop.
//!
//! Both one-step problems maximize the squared displacement minus a control
//! cost over all grid actions whose landing point stays in the workspace and
//! is still label-uncertain under the current version space. They differ in
//! the heading rule: P1 steers outside the candidate slope angles (so the
//! agent must eventually cross the boundary), P2 steers inside them (so the
//! agent ranges along the boundary). Infeasibility falls down a relaxation
//! ladder instead of aborting.

use thiserror::Error;

use crate::geometry::{
    certainty_label, penetration_depth, slope_set, GeometryError, LabeledPoint, ParamPolygon,
};
use crate::world::{
    heading_slope_angle, observe, step, Action, AgentState, Scenario, ScenarioError,
};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("controller stuck: no feasible action at step {step}")]
    Stuck { step: usize },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which one-step problem produced an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    P1,
    P2,
    P3,
    P4,
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Problem::P1 => f.write_str("P1"),
            Problem::P2 => f.write_str("P2"),
            Problem::P3 => f.write_str("P3"),
            Problem::P4 => f.write_str("P4"),
        }
    }
}

/// How far down the relaxation ladder the solver had to go.
///
/// `Main` is the fully constrained argmax; `DropHeading` discards the
/// heading rule; `LeastPenetrating` admits the translating action that
/// enters a certainty region most shallowly; `Rotation` turns in place
/// toward a useful heading for the next step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStage {
    Main,
    DropHeading,
    LeastPenetrating,
    Rotation,
}

impl SolveStage {
    pub fn suffix(&self) -> &'static str {
        match self {
            SolveStage::Main => "",
            SolveStage::DropHeading => "a",
            SolveStage::LeastPenetrating => "b",
            SolveStage::Rotation => "c",
        }
    }
}

/// A solved one-step problem.
#[derive(Debug, Clone, Copy)]
pub struct Solved {
    pub action: Action,
    pub problem: Problem,
    pub stage: SolveStage,
    pub objective: f64,
}

impl Solved {
    /// Token written to trajectory logs, e.g. `P1`, `P2c`.
    pub fn tag(&self) -> String {
        format!("{}{}", self.problem, self.stage.suffix())
    }
}

/// Constraint bundle for the shared grid argmax.
pub(crate) struct StepConstraints<'a> {
    /// Tri-state certainty of a landing point; 0 means admissible.
    pub certainty: &'a dyn Fn(f64, f64) -> i8,
    /// Depth of a certainty violation, for the ladder's stage (b).
    pub penetration: &'a dyn Fn(f64, f64) -> f64,
    /// Heading admissibility applied to the slope angle of the new heading.
    pub heading_ok: &'a dyn Fn(f64) -> bool,
    /// Slope angle the stage (c) rotation should turn toward.
    pub rotation_target: f64,
}

/// Exhaustive argmax of `||step||^2 - varrho * ||u||^2` over the action
/// grids, walking the relaxation ladder on infeasibility. Grid order is
/// ascending `(v, w)` and only strictly better objectives replace the
/// incumbent, so ties resolve to the lexicographically smallest action.
pub(crate) fn solve_one_step(
    agent: &AgentState,
    scenario: &Scenario,
    problem: Problem,
    cons: &StepConstraints<'_>,
    step_index: usize,
) -> Result<Solved, ControlError> {
    let ws = &scenario.workspace;
    let objective = |v: f64, w: f64, next: &AgentState| {
        let dx = next.x - agent.x;
        let dz = next.z - agent.z;
        dx * dx + dz * dz - scenario.varrho * (v * v + w * w)
    };

    let mut best_main: Option<(f64, Action)> = None;
    let mut best_no_heading: Option<(f64, Action)> = None;
    let mut best_penetration: Option<(f64, Action)> = None;

    for &v in &scenario.v_grid {
        for &w in &scenario.w_grid {
            let a = Action { v, w };
            let next = step(agent, &a);
            if !ws.contains(next.x, next.z) {
                continue;
            }
            let certain = (cons.certainty)(next.x, next.z);
            if certain != 0 {
                if v > 0.0 {
                    let pen = (cons.penetration)(next.x, next.z);
                    if best_penetration.as_ref().map_or(true, |(p, _)| pen < *p) {
                        best_penetration = Some((pen, a));
                    }
                }
                continue;
            }
            let obj = objective(v, w, &next);
            if best_no_heading.as_ref().map_or(true, |(o, _)| obj > *o) {
                best_no_heading = Some((obj, a));
            }
            if (cons.heading_ok)(heading_slope_angle(next.theta)) {
                if best_main.as_ref().map_or(true, |(o, _)| obj > *o) {
                    best_main = Some((obj, a));
                }
            }
        }
    }

    if let Some((obj, action)) = best_main {
        return Ok(Solved {
            action,
            problem,
            stage: SolveStage::Main,
            objective: obj,
        });
    }
    if let Some((obj, action)) = best_no_heading {
        return Ok(Solved {
            action,
            problem,
            stage: SolveStage::DropHeading,
            objective: obj,
        });
    }
    if let Some((pen, action)) = best_penetration {
        return Ok(Solved {
            action,
            problem,
            stage: SolveStage::LeastPenetrating,
            objective: -pen,
        });
    }
    // Pure rotation: turn the heading as close as possible to the target
    // slope angle (distance on the direction circle, period pi).
    let mut best_rot: Option<(f64, Action)> = None;
    for &w in &scenario.w_grid {
        let next_theta = crate::world::wrap_angle(agent.theta + w);
        let next_slope = heading_slope_angle(next_theta);
        let mut d = (next_slope - cons.rotation_target).abs();
        d = d.min((d - std::f64::consts::PI).abs());
        if best_rot.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best_rot = Some((d, Action { v: 0.0, w }));
        }
    }
    match best_rot {
        Some((d, action)) => Ok(Solved {
            action,
            problem,
            stage: SolveStage::Rotation,
            objective: -d,
        }),
        None => Err(ControlError::Stuck { step: step_index }),
    }
}

/// P1: move far, stay uncertain, heading outside the version-space slope
/// angles.
pub fn solve_p1(
    agent: &AgentState,
    poly: &ParamPolygon,
    scenario: &Scenario,
    step_index: usize,
) -> Result<Solved, ControlError> {
    let slopes = slope_set(poly);
    let certainty = |x: f64, z: f64| certainty_label(poly, (x, z)).unwrap_or(0);
    let penetration = |x: f64, z: f64| penetration_depth(poly, (x, z));
    let heading_ok = |a: f64| !slopes.contains(a);
    let rotation_target = slopes
        .complement_gap_midpoint()
        .unwrap_or_else(|| heading_slope_angle(agent.theta));
    solve_one_step(
        agent,
        scenario,
        Problem::P1,
        &StepConstraints {
            certainty: &certainty,
            penetration: &penetration,
            heading_ok: &heading_ok,
            rotation_target,
        },
        step_index,
    )
}

/// P2: as P1 but the heading must lie inside the slope angles.
pub fn solve_p2(
    agent: &AgentState,
    poly: &ParamPolygon,
    scenario: &Scenario,
    step_index: usize,
) -> Result<Solved, ControlError> {
    let slopes = slope_set(poly);
    let certainty = |x: f64, z: f64| certainty_label(poly, (x, z)).unwrap_or(0);
    let penetration = |x: f64, z: f64| penetration_depth(poly, (x, z));
    let heading_ok = |a: f64| slopes.contains(a);
    let rotation_target = slopes
        .widest_interval_midpoint()
        .unwrap_or_else(|| heading_slope_angle(agent.theta));
    solve_one_step(
        agent,
        scenario,
        Problem::P2,
        &StepConstraints {
            certainty: &certainty,
            penetration: &penetration,
            heading_ok: &heading_ok,
            rotation_target,
        },
        step_index,
    )
}

/// One logged trajectory entry. The first entry carries no action.
#[derive(Debug, Clone)]
pub struct TrajPoint {
    pub step: usize,
    pub state: AgentState,
    pub action: Option<Action>,
    pub true_label: i8,
    pub observed: i8,
    pub epsilon: i8,
    pub solved: Option<(Problem, SolveStage)>,
}

/// Mutable state of the deterministic sampling loop.
#[derive(Debug, Clone)]
pub struct RunState {
    pub step: usize,
    pub label: i8,
    pub counter: u32,
    pub dataset: Vec<LabeledPoint>,
    pub polygon: ParamPolygon,
    pub agent: AgentState,
}

/// Result of a deterministic run.
#[derive(Debug, Clone)]
pub struct DetRun {
    pub trajectory: Vec<TrajPoint>,
    pub dataset: Vec<LabeledPoint>,
    pub polygon: ParamPolygon,
    /// Steps at which the observed label flipped relative to `label`.
    pub flips: Vec<usize>,
}

/// Deterministic sampling loop.
///
/// Starting at the first anchor with its known label, alternate: solve P1
/// until the observed label flips, then solve P2 exactly once. Every point
/// visited is observed exactly (no noise field is consulted) and folded into
/// the dataset and the version-space polygon.
pub fn run_det(scenario: &Scenario) -> Result<DetRun, ControlError> {
    scenario.validate()?;
    let mut st = RunState {
        step: 0,
        label: scenario.anchors[0].label,
        counter: 0,
        dataset: scenario.anchors.to_vec(),
        polygon: scenario.anchor_polygon(),
        agent: scenario.initial_state(),
    };
    let mut trajectory = vec![TrajPoint {
        step: 0,
        state: st.agent,
        action: None,
        true_label: scenario.anchors[0].label,
        observed: scenario.anchors[0].label,
        epsilon: 1,
        solved: None,
    }];
    let mut flips = Vec::new();

    while st.step < scenario.horizon {
        let p1_branch = st.counter % 2 == 0;
        let solved = if p1_branch {
            solve_p1(&st.agent, &st.polygon, scenario, st.step)?
        } else {
            solve_p2(&st.agent, &st.polygon, scenario, st.step)?
        };
        st.agent = step(&st.agent, &solved.action);
        st.step += 1;
        let obs = observe(
            None,
            &scenario.classifier,
            st.agent.position(),
            scenario.seed,
            st.step as u64,
        );
        // A pure rotation revisits the same position; its label is already
        // in the dataset, so only the log row is added.
        if obs.observed != 0 && solved.stage != SolveStage::Rotation {
            let point = LabeledPoint::new(st.agent.x, st.agent.z, obs.observed)
                .expect("observed labels are in {-1, 0, +1}");
            st.dataset.push(point);
            st.polygon = st.polygon.clip_halfplane(&point);
        } else if obs.observed == 0 {
            eprintln!(
                "warning: on-boundary sample at ({}, {}) excluded from dataset",
                st.agent.x, st.agent.z
            );
        }
        trajectory.push(TrajPoint {
            step: st.step,
            state: st.agent,
            action: Some(solved.action),
            true_label: obs.true_label,
            observed: obs.observed,
            epsilon: obs.epsilon,
            solved: Some((solved.problem, solved.stage)),
        });
        if p1_branch {
            if (obs.observed as i32) * (st.label as i32) == -1 {
                st.label = obs.observed;
                st.counter += 1;
                flips.push(st.step);
            }
        } else {
            st.counter += 1;
        }
    }

    Ok(DetRun {
        trajectory,
        dataset: st.dataset,
        polygon: st.polygon,
        flips,
    })
}
