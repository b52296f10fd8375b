//! Ground truth and physics: hidden classifier, label oracle, trusted-region
//! noise, unicycle dynamics over discrete action grids, and the scenario
//! configuration (including its TOML file format).
//!
//! Randomness is counter-based: every observation draw is a pure function of
//! `(seed, step_index)`, so replays are exact and independent of call order.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::{feasible_polygon, fold_slope_angle, LabeledPoint, ParamBox, ParamPolygon};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("io error reading scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario validation failed: {0}")]
    Validation(String),
}

/// The hidden line `z = rho * x + c`.
#[derive(Debug, Clone, Copy)]
pub struct TrueClassifier {
    pub rho: f64,
    pub c: f64,
}

impl TrueClassifier {
    pub fn new(rho: f64, c: f64) -> Result<Self, ScenarioError> {
        if !rho.is_finite() || !c.is_finite() {
            return Err(ScenarioError::Validation(
                "classifier parameters must be finite".into(),
            ));
        }
        if rho.atan().abs() >= FRAC_PI_2 - 1e-6 {
            return Err(ScenarioError::Validation(
                "classifier is too close to vertical".into(),
            ));
        }
        Ok(Self { rho, c })
    }

    pub fn theta(&self) -> f64 {
        self.rho.atan()
    }

    /// Sign of the vertical residual; residuals within 1e-12 map to 0.
    pub fn label(&self, x: f64, z: f64) -> i8 {
        let f = z - self.rho * x - self.c;
        if f.abs() < 1e-12 {
            0
        } else if f > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Union of trusted balls where observations are exact; elsewhere the label
/// is kept with probability `keep_prob` and flipped otherwise.
#[derive(Debug, Clone)]
pub struct NoiseField {
    pub centers: Vec<(f64, f64)>,
    pub radius: f64,
    pub keep_prob: f64,
}

impl NoiseField {
    pub fn new(
        centers: Vec<(f64, f64)>,
        radius: f64,
        keep_prob: f64,
    ) -> Result<Self, ScenarioError> {
        if radius < 0.0 || !radius.is_finite() {
            return Err(ScenarioError::Validation(
                "noise radius must be >= 0".into(),
            ));
        }
        if !(keep_prob > 0.5 && keep_prob <= 1.0) {
            return Err(ScenarioError::Validation(format!(
                "keep_prob must lie in (0.5, 1], got {keep_prob}"
            )));
        }
        Ok(Self {
            centers,
            radius,
            keep_prob,
        })
    }

    pub fn is_trusted(&self, x: f64, z: f64) -> bool {
        self.centers
            .iter()
            .any(|&(cx, cz)| (x - cx).hypot(z - cz) <= self.radius)
    }
}

/// Unicycle pose. The heading is kept wrapped to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x: f64,
    pub z: f64,
    pub theta: f64,
}

impl AgentState {
    pub fn new(x: f64, z: f64, theta: f64) -> Self {
        Self {
            x,
            z,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.z)
    }
}

/// One command from the finite grids: speed and turn rate per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub v: f64,
    pub w: f64,
}

/// Wrap to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two = 2.0 * PI;
    let mut r = a % two;
    if r <= -PI {
        r += two;
    } else if r > PI {
        r -= two;
    }
    r
}

/// One unicycle step. The heading updates before the translation, so the
/// displacement follows the new heading.
pub fn step(s: &AgentState, a: &Action) -> AgentState {
    let theta = wrap_angle(s.theta + a.w);
    AgentState {
        x: s.x + a.v * theta.cos(),
        z: s.z + a.v * theta.sin(),
        theta,
    }
}

/// Slope angle in `(-pi/2, pi/2]` of the travel direction for a heading.
pub fn heading_slope_angle(theta: f64) -> f64 {
    fold_slope_angle(theta)
}

pub mod rng {
    //! Counter-based generator: one uniform draw per (seed, index) pair.

    fn splitmix64(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^ (x >> 31)
    }

    /// Uniform draw in `[0, 1)` determined by `(seed, index)` alone.
    pub fn unit_draw(seed: u64, index: u64) -> f64 {
        let h = splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)));
        (h >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Derived seed for replicate `k` of a batch.
    pub fn replicate_seed(base: u64, k: u64) -> u64 {
        splitmix64(base.wrapping_add(splitmix64(k)))
    }
}

/// Result of sampling the label oracle at a position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub observed: i8,
    pub true_label: i8,
    /// Noise sign actually applied: observed = true_label * epsilon.
    pub epsilon: i8,
}

/// Sample the (possibly noisy) label at `pos`. With no noise field the
/// observation is exact. Inside the trusted region the noise sign is +1 with
/// probability one; outside it is +1 with probability `keep_prob`. Exactly
/// one draw is consumed per observation, indexed by `step_index`.
///
/// A true label of 0 (on the boundary) is passed through as observed 0; the
/// caller must exclude it from datasets.
pub fn observe(
    noise: Option<&NoiseField>,
    classifier: &TrueClassifier,
    pos: (f64, f64),
    seed: u64,
    step_index: u64,
) -> Observation {
    let true_label = classifier.label(pos.0, pos.1);
    let Some(nf) = noise else {
        return Observation {
            observed: true_label,
            true_label,
            epsilon: 1,
        };
    };
    let u = rng::unit_draw(seed, step_index);
    let epsilon: i8 = if nf.is_trusted(pos.0, pos.1) {
        1
    } else if u < nf.keep_prob {
        1
    } else {
        -1
    };
    if true_label == 0 {
        return Observation {
            observed: 0,
            true_label: 0,
            epsilon: 0,
        };
    }
    Observation {
        observed: true_label * epsilon,
        true_label,
        epsilon,
    }
}

/// Axis-aligned workspace rectangle.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, z: f64) -> bool {
        x >= self.x_min && x <= self.x_max && z >= self.z_min && z <= self.z_max
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.z_max - self.z_min)
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub workspace: Rect,
    pub classifier: TrueClassifier,
    pub anchors: [LabeledPoint; 4],
    pub noise: Option<NoiseField>,
    pub v_grid: Vec<f64>,
    pub w_grid: Vec<f64>,
    /// Control-cost weight in the one-step objectives.
    pub varrho: f64,
    /// Number of control steps.
    pub horizon: usize,
    pub seed: u64,
    pub initial_box: ParamBox,
    pub initial_heading: f64,
    /// When set, the one-step problems under belief use consensus certainty
    /// regions of the surviving hypotheses instead of the anchor-only ones.
    pub current_certainty: bool,
}

impl Scenario {
    /// Validate cross-field invariants. Called by every loader.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let ws = &self.workspace;
        if !(ws.x_min < ws.x_max && ws.z_min < ws.z_max) {
            return Err(ScenarioError::Validation(
                "workspace bounds out of order".into(),
            ));
        }
        let labels: Vec<i8> = self.anchors.iter().map(|a| a.label).collect();
        if labels != [-1, 1, 1, -1] {
            return Err(ScenarioError::Validation(format!(
                "anchor labels must be (-1, +1, +1, -1), got {labels:?}"
            )));
        }
        for (i, a) in self.anchors.iter().enumerate() {
            let truth = self.classifier.label(a.x, a.z);
            if truth != a.label {
                return Err(ScenarioError::Validation(format!(
                    "anchor {} at ({}, {}) declared {} but the classifier labels it {}",
                    i + 1,
                    a.x,
                    a.z,
                    a.label,
                    truth
                )));
            }
            if !ws.contains(a.x, a.z) {
                return Err(ScenarioError::Validation(format!(
                    "anchor {} lies outside the workspace",
                    i + 1
                )));
            }
        }
        for (name, grid) in [("v", &self.v_grid), ("w", &self.w_grid)] {
            if grid.is_empty() {
                return Err(ScenarioError::Validation(format!("{name}-grid is empty")));
            }
            if grid.iter().any(|g| !g.is_finite()) {
                return Err(ScenarioError::Validation(format!(
                    "{name}-grid has non-finite entries"
                )));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ScenarioError::Validation(format!(
                    "{name}-grid must be strictly increasing"
                )));
            }
        }
        if !(self.varrho >= 0.0 && self.varrho.is_finite()) {
            return Err(ScenarioError::Validation("varrho must be >= 0".into()));
        }
        if !self
            .initial_box
            .contains(self.classifier.theta(), self.classifier.c)
        {
            return Err(ScenarioError::Validation(
                "initial box does not contain the true classifier parameters".into(),
            ));
        }
        Ok(())
    }

    /// Version space implied by the anchors alone, clipped to the initial box.
    pub fn anchor_polygon(&self) -> ParamPolygon {
        feasible_polygon(&self.anchors, &self.initial_box)
            .expect("anchor labels validated as nonzero")
    }

    pub fn initial_state(&self) -> AgentState {
        AgentState::new(self.anchors[0].x, self.anchors[0].z, self.initial_heading)
    }

    /// Default pair-midpoint separation used by the quadrilateral estimator.
    pub fn min_pair_separation(&self) -> f64 {
        0.1 * self.workspace.diagonal()
    }

    /// Built-in deterministic scenario: 20 m x 20 m workspace, classifier
    /// rho = 0.41, c = 3.5, speed grid 0..2 step 0.1, turn grid +-1.57 step
    /// 0.01, varrho = 0.1, ten steps. Anchors sit one meter off the boundary
    /// at x = 2 and x = 18.
    pub fn builtin_det() -> Scenario {
        let classifier = TrueClassifier::new(0.41, 3.5).unwrap();
        let line = |x: f64| classifier.rho * x + classifier.c;
        let anchors = [
            LabeledPoint::new(2.0, line(2.0) - 1.0, -1).unwrap(),
            LabeledPoint::new(2.0, line(2.0) + 1.0, 1).unwrap(),
            LabeledPoint::new(18.0, line(18.0) + 1.0, 1).unwrap(),
            LabeledPoint::new(18.0, line(18.0) - 1.0, -1).unwrap(),
        ];
        let s = Scenario {
            workspace: Rect {
                x_min: 0.0,
                x_max: 20.0,
                z_min: 0.0,
                z_max: 20.0,
            },
            classifier,
            anchors,
            noise: None,
            v_grid: range_grid(0.0, 2.0, 0.1),
            w_grid: range_grid(-1.57, 1.57, 0.01),
            varrho: 0.1,
            horizon: 10,
            seed: 42,
            initial_box: ParamBox::new(-1.2, 1.2, -10.0, 10.0).unwrap(),
            initial_heading: 0.0,
            current_certainty: false,
        };
        s.validate()
            .expect("builtin deterministic scenario is valid");
        s
    }

    /// Built-in stochastic scenario: the deterministic one plus a trusted
    /// region of radius 1.5 around each anchor and keep probability 0.7.
    pub fn builtin_stoch() -> Scenario {
        let mut s = Self::builtin_det();
        let centers = s.anchors.iter().map(|a| (a.x, a.z)).collect();
        s.noise = Some(NoiseField::new(centers, 1.5, 0.7).unwrap());
        s.validate().expect("builtin stochastic scenario is valid");
        s
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        Self::from_toml_str_with_overrides(text, &[])
    }

    /// Parse, apply `key.path=value` overrides onto the raw document, then
    /// validate.
    pub fn from_toml_str_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Scenario, ScenarioError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| ScenarioError::Parse(format!("{e}")))?;
        let mut value = toml::Value::Table(table);
        for (path, literal) in overrides {
            apply_override(&mut value, path, literal)?;
        }
        let raw: RawScenario = value
            .try_into()
            .map_err(|e| ScenarioError::Parse(format!("{e}")))?;
        let scenario = raw.into_scenario()?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(
        path: &Path,
        overrides: &[(String, String)],
    ) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str_with_overrides(&text, overrides)
    }

    /// Stable content hash over the fields that determine a run.
    pub fn content_hash(&self) -> u64 {
        fn eat(h: &mut u64, bytes: &[u8]) {
            for &b in bytes {
                *h ^= b as u64;
                *h = h.wrapping_mul(0x0000_0100_0000_01B3);
            }
        }
        fn eat_f(h: &mut u64, v: f64) {
            eat(h, &v.to_bits().to_le_bytes());
        }
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in [
            self.workspace.x_min,
            self.workspace.x_max,
            self.workspace.z_min,
            self.workspace.z_max,
            self.classifier.rho,
            self.classifier.c,
        ] {
            eat_f(&mut h, v);
        }
        for a in &self.anchors {
            eat_f(&mut h, a.x);
            eat_f(&mut h, a.z);
            eat(&mut h, &[a.label as u8]);
        }
        if let Some(nf) = &self.noise {
            eat_f(&mut h, nf.radius);
            eat_f(&mut h, nf.keep_prob);
            for &(x, z) in &nf.centers {
                eat_f(&mut h, x);
                eat_f(&mut h, z);
            }
        }
        for &v in self.v_grid.iter().chain(self.w_grid.iter()) {
            eat_f(&mut h, v);
        }
        eat_f(&mut h, self.varrho);
        eat(&mut h, &self.horizon.to_le_bytes());
        eat(&mut h, &self.seed.to_le_bytes());
        for v in [
            self.initial_box.theta_min,
            self.initial_box.theta_max,
            self.initial_box.c_min,
            self.initial_box.c_max,
            self.initial_heading,
        ] {
            eat_f(&mut h, v);
        }
        eat(&mut h, &[self.current_certainty as u8]);
        h
    }
}

/// Inclusive arithmetic grid; the endpoint is kept when it lands within a
/// half-step of the last multiple.
pub fn range_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && stop > start, "bad grid range");
    let n = ((stop - start) / step + 0.5).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut k = 0usize;
    loop {
        let v = start + (k as f64) * step;
        if v > stop + step * 1e-9 {
            break;
        }
        out.push(v);
        k += 1;
    }
    out
}

fn apply_override(root: &mut toml::Value, path: &str, literal: &str) -> Result<(), ScenarioError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.is_empty() {
        return Err(ScenarioError::Parse("empty override path".into()));
    }
    // Parse the literal by wrapping it in a scratch document.
    let scratch: toml::Table = format!("v = {literal}")
        .parse()
        .or_else(|_| format!("v = \"{literal}\"").parse())
        .map_err(|e| ScenarioError::Parse(format!("override value {literal:?}: {e}")))?;
    let val = scratch.get("v").cloned().unwrap();
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| {
                ScenarioError::Parse(format!("override path {path:?} crosses a non-table"))
            })?
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| ScenarioError::Parse(format!("override path {path:?} crosses a non-table")))?
        .insert(parts[parts.len() - 1].to_string(), val);
    Ok(())
}

// ---------------------------------------------------------------------------
// TOML schema

/// An angle entry: plain number = radians, string with a `deg`/`rad` suffix
/// converts explicitly.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AngleSpec {
    Num(f64),
    Text(String),
}

impl AngleSpec {
    fn radians(&self) -> Result<f64, ScenarioError> {
        match self {
            AngleSpec::Num(v) => Ok(*v),
            AngleSpec::Text(s) => {
                let t = s.trim();
                if let Some(d) = t.strip_suffix("deg") {
                    let v: f64 = d
                        .trim()
                        .parse()
                        .map_err(|_| ScenarioError::Parse(format!("bad angle {s:?}")))?;
                    Ok(v.to_radians())
                } else if let Some(r) = t.strip_suffix("rad") {
                    let v: f64 = r
                        .trim()
                        .parse()
                        .map_err(|_| ScenarioError::Parse(format!("bad angle {s:?}")))?;
                    Ok(v)
                } else {
                    Err(ScenarioError::Parse(format!(
                        "angle {s:?} needs a deg or rad suffix"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<AngleSpec>),
    Range {
        start: AngleSpec,
        stop: AngleSpec,
        step: AngleSpec,
    },
}

impl GridSpec {
    fn values(&self) -> Result<Vec<f64>, ScenarioError> {
        match self {
            GridSpec::List(vs) => vs.iter().map(|v| v.radians()).collect(),
            GridSpec::Range { start, stop, step } => {
                let (a, b, s) = (start.radians()?, stop.radians()?, step.radians()?);
                if !(s > 0.0 && b > a) {
                    return Err(ScenarioError::Parse(
                        "grid range needs step > 0 and stop > start".into(),
                    ));
                }
                Ok(range_grid(a, b, s))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawRect {
    x_min: f64,
    x_max: f64,
    z_min: f64,
    z_max: f64,
}

#[derive(Debug, Deserialize)]
struct RawClassifier {
    rho: f64,
    c: f64,
}

#[derive(Debug, Deserialize)]
struct RawAnchor {
    x: f64,
    z: f64,
    label: i8,
}

#[derive(Debug, Deserialize)]
struct RawNoise {
    centers: Vec<[f64; 2]>,
    radius: f64,
    keep_prob: f64,
}

#[derive(Debug, Deserialize)]
struct RawGrids {
    v: GridSpec,
    w: GridSpec,
}

#[derive(Debug, Deserialize)]
struct RawControl {
    varrho: f64,
    horizon: usize,
    seed: u64,
    initial_heading: Option<AngleSpec>,
    #[serde(default)]
    current_certainty: bool,
}

#[derive(Debug, Deserialize)]
struct RawBox {
    theta_min: AngleSpec,
    theta_max: AngleSpec,
    c_min: f64,
    c_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    workspace: RawRect,
    classifier: RawClassifier,
    anchors: Vec<RawAnchor>,
    noise: Option<RawNoise>,
    grids: RawGrids,
    control: RawControl,
    initial_box: RawBox,
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        if self.anchors.len() != 4 {
            return Err(ScenarioError::Validation(format!(
                "exactly four anchors required, got {}",
                self.anchors.len()
            )));
        }
        let mut anchors = [LabeledPoint {
            x: 0.0,
            z: 0.0,
            label: 1,
        }; 4];
        for (i, a) in self.anchors.iter().enumerate() {
            anchors[i] = LabeledPoint::new(a.x, a.z, a.label)
                .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        }
        let noise = match self.noise {
            None => None,
            Some(n) => Some(NoiseField::new(
                n.centers.iter().map(|c| (c[0], c[1])).collect(),
                n.radius,
                n.keep_prob,
            )?),
        };
        let initial_box = ParamBox::new(
            self.initial_box.theta_min.radians()?,
            self.initial_box.theta_max.radians()?,
            self.initial_box.c_min,
            self.initial_box.c_max,
        )
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        Ok(Scenario {
            workspace: Rect {
                x_min: self.workspace.x_min,
                x_max: self.workspace.x_max,
                z_min: self.workspace.z_min,
                z_max: self.workspace.z_max,
            },
            classifier: TrueClassifier::new(self.classifier.rho, self.classifier.c)?,
            anchors,
            noise,
            v_grid: self.grids.v.values()?,
            w_grid: self.grids.w.values()?,
            varrho: self.control.varrho,
            horizon: self.control.horizon,
            seed: self.control.seed,
            initial_box,
            initial_heading: match self.control.initial_heading {
                Some(a) => a.radians()?,
                None => 0.0,
            },
            current_certainty: self.control.current_certainty,
        })
    }
}
