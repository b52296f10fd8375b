//! Exact 2-D separability tests and version-space geometry.
//!
//! A non-vertical line `z = rho * x + c` splits the plane into a positive
//! side (label +1, above) and a negative side (label -1, below). A labeled
//! point `(x_i, z_i, y_i)` constrains the parameter pair `(rho, c)` to the
//! closed halfplane `y_i * (z_i - rho * x_i - c) >= 0`, so the set of
//! parameters consistent with a dataset is convex. Clipped to a bounding box
//! in `(tan(theta), c)` it becomes a convex polygon: the version space.
//! Everything else in this module (slope/intercept bounds, certainty labels,
//! closest opposite pairs) is a query against that polygon or the dataset.

use thiserror::Error;

/// Tolerance for vertex dedup, halfplane membership and certainty tests.
pub const GEOM_EPS: f64 = 1e-9;

/// Polygons below this area are kept but considered degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("label must be -1, 0 or +1, got {0}")]
    BadLabel(i32),
    #[error("label 0 is not allowed in datasets used for separability")]
    ZeroLabelInDataset,
    #[error("malformed parameter box: {0}")]
    BadBox(String),
    #[error("operation requires a nonempty polygon")]
    EmptyPolygon,
    #[error("need at least two points of each label, got {pos} positive / {neg} negative")]
    TooFewPoints { pos: usize, neg: usize },
    #[error("no second opposite-label pair with midpoint separation >= {min_separation}")]
    InsufficientSpread { min_separation: f64 },
}

/// A 2-D position with a label in `{-1, 0, +1}`.
///
/// Label 0 marks an on-boundary oracle output; datasets fed to separability
/// machinery must carry only `+-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub z: f64,
    pub label: i8,
}

impl LabeledPoint {
    pub fn new(x: f64, z: f64, label: i8) -> Result<Self, GeometryError> {
        if !(-1..=1).contains(&label) {
            return Err(GeometryError::BadLabel(label as i32));
        }
        Ok(Self { x, z, label })
    }

    /// Signed vertical residual of this point against the line `(rho, c)`.
    #[inline]
    pub fn residual(&self, rho: f64, c: f64) -> f64 {
        self.z - rho * self.x - c
    }

    #[inline]
    pub fn distance(&self, other: &LabeledPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

fn check_binary_labels(points: &[LabeledPoint]) -> Result<(), GeometryError> {
    for p in points {
        match p.label {
            -1 | 1 => {}
            0 => return Err(GeometryError::ZeroLabelInDataset),
            other => return Err(GeometryError::BadLabel(other as i32)),
        }
    }
    Ok(())
}

/// Axis-aligned box in `(theta, c)` parameter space, `theta` in radians.
#[derive(Debug, Clone, Copy)]
pub struct ParamBox {
    pub theta_min: f64,
    pub theta_max: f64,
    pub c_min: f64,
    pub c_max: f64,
}

impl ParamBox {
    pub fn new(
        theta_min: f64,
        theta_max: f64,
        c_min: f64,
        c_max: f64,
    ) -> Result<Self, GeometryError> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(theta_min.is_finite()
            && theta_max.is_finite()
            && c_min.is_finite()
            && c_max.is_finite())
        {
            return Err(GeometryError::BadBox("non-finite bound".into()));
        }
        if theta_min <= -half_pi || theta_max >= half_pi {
            return Err(GeometryError::BadBox(format!(
                "theta bounds must lie strictly inside (-pi/2, pi/2), got [{theta_min}, {theta_max}]"
            )));
        }
        if theta_min >= theta_max {
            return Err(GeometryError::BadBox(format!(
                "theta_min {theta_min} must be < theta_max {theta_max}"
            )));
        }
        if c_min >= c_max {
            return Err(GeometryError::BadBox(format!(
                "c_min {c_min} must be < c_max {c_max}"
            )));
        }
        Ok(Self {
            theta_min,
            theta_max,
            c_min,
            c_max,
        })
    }

    /// Corners of the `(tan(theta), c)` image, counterclockwise.
    fn image_corners(&self) -> Vec<(f64, f64)> {
        let r0 = self.theta_min.tan();
        let r1 = self.theta_max.tan();
        vec![
            (r0, self.c_min),
            (r1, self.c_min),
            (r1, self.c_max),
            (r0, self.c_max),
        ]
    }

    pub fn contains(&self, theta: f64, c: f64) -> bool {
        theta >= self.theta_min && theta <= self.theta_max && c >= self.c_min && c <= self.c_max
    }
}

/// Convex polygon in `(rho, c)` parameter space, vertices counterclockwise.
///
/// An empty vertex list means the constraints are infeasible. One or two
/// vertices are possible after clipping and mark a degenerate but valid
/// version space (projections still make sense).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamPolygon {
    vertices: Vec<(f64, f64)>,
}

impl ParamPolygon {
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
        }
    }

    pub fn from_box(b: &ParamBox) -> Self {
        Self {
            vertices: b.image_corners(),
        }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.is_empty() && self.area() < DEGENERATE_AREA
    }

    /// Shoelace area; zero for fewer than three vertices.
    pub fn area(&self) -> f64 {
        if self.vertices.len() < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..self.vertices.len() {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % self.vertices.len()];
            acc += x0 * y1 - x1 * y0;
        }
        acc.abs() / 2.0
    }

    /// Clip by the halfplane of one labeled point: keep
    /// `y * (z - rho * x - c) >= -GEOM_EPS`.
    pub fn clip_halfplane(&self, p: &LabeledPoint) -> ParamPolygon {
        let g = |rho: f64, c: f64| (p.label as f64) * (p.z - rho * p.x - c);
        self.clip_linear(&g)
    }

    /// Sutherland-Hodgman step against a generic linear functional, keeping
    /// the side `g >= -GEOM_EPS`.
    fn clip_linear(&self, g: &dyn Fn(f64, f64) -> f64) -> ParamPolygon {
        if self.vertices.is_empty() {
            return ParamPolygon::empty();
        }
        if self.vertices.len() == 1 {
            let (r, c) = self.vertices[0];
            if g(r, c) >= -GEOM_EPS {
                return self.clone();
            }
            return ParamPolygon::empty();
        }
        let n = self.vertices.len();
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let s = self.vertices[i];
            let e = self.vertices[(i + 1) % n];
            let ds = g(s.0, s.1);
            let de = g(e.0, e.1);
            let s_in = ds >= -GEOM_EPS;
            let e_in = de >= -GEOM_EPS;
            match (s_in, e_in) {
                (true, true) => out.push(e),
                (true, false) => {
                    if let Some(p) = intersect(s, e, ds, de) {
                        out.push(p);
                    }
                }
                (false, true) => {
                    if let Some(p) = intersect(s, e, ds, de) {
                        out.push(p);
                    }
                    out.push(e);
                }
                (false, false) => {}
            }
        }
        ParamPolygon {
            vertices: dedup_ring(out),
        }
    }

    /// Point membership with tolerance; handles degenerate polygons.
    pub fn contains(&self, rho: f64, c: f64, tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => {
                let (r, cc) = self.vertices[0];
                (r - rho).hypot(cc - c) <= tol
            }
            2 => segment_distance((rho, c), self.vertices[0], self.vertices[1]) <= tol,
            n => {
                for i in 0..n {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    let cross = (b.0 - a.0) * (c - a.1) - (b.1 - a.1) * (rho - a.0);
                    if cross < -tol {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Mean of the vertices. Errors on an empty polygon.
    pub fn vertex_centroid(&self) -> Result<(f64, f64), GeometryError> {
        if self.vertices.is_empty() {
            return Err(GeometryError::EmptyPolygon);
        }
        let n = self.vertices.len() as f64;
        let (sr, sc) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(ar, ac), (r, c)| (ar + r, ac + c));
        Ok((sr / n, sc / n))
    }
}

fn intersect(s: (f64, f64), e: (f64, f64), ds: f64, de: f64) -> Option<(f64, f64)> {
    let denom = ds - de;
    if denom.abs() < 1e-300 {
        return None;
    }
    let t = ds / denom;
    Some((s.0 + t * (e.0 - s.0), s.1 + t * (e.1 - s.1)))
}

fn dedup_ring(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if v.is_empty() {
        return v;
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for p in v.drain(..) {
        if let Some(last) = out.last() {
            if (last.0 - p.0).abs() <= GEOM_EPS && (last.1 - p.1).abs() <= GEOM_EPS {
                continue;
            }
        }
        out.push(p);
    }
    while out.len() > 1 {
        let first = out[0];
        let last = *out.last().unwrap();
        if (first.0 - last.0).abs() <= GEOM_EPS && (first.1 - last.1).abs() <= GEOM_EPS {
            out.pop();
        } else {
            break;
        }
    }
    out
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 <= 1e-300 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    (p.0 - (a.0 + t * dx)).hypot(p.1 - (a.1 + t * dy))
}

/// Sorted, disjoint intervals of slope angles within `(-pi/2, pi/2)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AngleSet {
    intervals: Vec<(f64, f64)>,
}

impl AngleSet {
    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
        }
    }

    pub fn from_interval(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Self {
            intervals: vec![(lo, hi)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| angle >= lo && angle <= hi)
    }

    /// Hull `[min lo, max hi]`, or `None` when empty.
    pub fn hull(&self) -> Option<Interval> {
        if self.intervals.is_empty() {
            return None;
        }
        Some(Interval {
            lo: self.intervals.first().unwrap().0,
            hi: self.intervals.last().unwrap().1,
        })
    }

    /// Union of several sets, merging intervals that overlap or touch.
    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a AngleSet>) -> AngleSet {
        let mut all: Vec<(f64, f64)> = sets
            .into_iter()
            .flat_map(|s| s.intervals.iter().copied())
            .collect();
        if all.is_empty() {
            return AngleSet::empty();
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<(f64, f64)> = vec![all[0]];
        for (lo, hi) in all.into_iter().skip(1) {
            let last = merged.last_mut().unwrap();
            if lo <= last.1 + 1e-12 {
                last.1 = last.1.max(hi);
            } else {
                merged.push((lo, hi));
            }
        }
        AngleSet { intervals: merged }
    }

    /// Midpoint of the largest gap of the complement, on the circle of line
    /// directions (period pi). `None` when the set is empty.
    pub fn complement_gap_midpoint(&self) -> Option<f64> {
        if self.intervals.is_empty() {
            return None;
        }
        let n = self.intervals.len();
        let mut best_gap = f64::NEG_INFINITY;
        let mut best_mid = 0.0;
        for i in 0..n {
            let hi = self.intervals[i].1;
            let next_lo = if i + 1 < n {
                self.intervals[i + 1].0
            } else {
                self.intervals[0].0 + std::f64::consts::PI
            };
            let gap = next_lo - hi;
            if gap > best_gap {
                best_gap = gap;
                best_mid = hi + gap / 2.0;
            }
        }
        Some(fold_slope_angle(best_mid))
    }

    /// Midpoint of the widest member interval, `None` when empty.
    pub fn widest_interval_midpoint(&self) -> Option<f64> {
        self.intervals
            .iter()
            .max_by(|a, b| (a.1 - a.0).partial_cmp(&(b.1 - b.0)).unwrap())
            .map(|&(lo, hi)| (lo + hi) / 2.0)
    }
}

/// Fold any angle into the slope-angle range `(-pi/2, pi/2]` (period pi).
pub fn fold_slope_angle(mut a: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    while a > FRAC_PI_2 {
        a -= PI;
    }
    while a <= -FRAC_PI_2 {
        a += PI;
    }
    a
}

/// Closed interval in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// True iff some non-vertical line weakly separates the labels with at least
/// one strictly classified point per present label.
///
/// Route: clip a data-adaptive box in `(rho, c)` by every point constraint,
/// then require the surviving polygon to not be wholly contained in either
/// class's "all points on the line" flat. Both checks reduce to vertex
/// evaluations by convexity.
pub fn is_separable(points: &[LabeledPoint]) -> Result<bool, GeometryError> {
    check_binary_labels(points)?;
    let has_pos = points.iter().any(|p| p.label == 1);
    let has_neg = points.iter().any(|p| p.label == -1);
    if !has_pos || !has_neg {
        return Ok(true);
    }
    let (rho_bound, c_bound) = adaptive_bounds(points);
    let mut poly = ParamPolygon {
        vertices: vec![
            (-rho_bound, -c_bound),
            (rho_bound, -c_bound),
            (rho_bound, c_bound),
            (-rho_bound, c_bound),
        ],
    };
    for p in points {
        poly = poly.clip_halfplane(p);
        if poly.is_empty() {
            return Ok(false);
        }
    }
    let strict = |label: i8| {
        poly.vertices.iter().any(|&(r, c)| {
            points
                .iter()
                .filter(|p| p.label == label)
                .any(|p| (p.label as f64) * p.residual(r, c) > GEOM_EPS)
        })
    };
    Ok(strict(1) && strict(-1))
}

/// Slope and offset bounds large enough that a feasible, per-class-strict
/// parameter choice exists inside the box whenever one exists at all. Every
/// vertex of the unclipped feasible region has a slope equal to some pairwise
/// data slope, so a generous multiple of the largest pairwise slope suffices.
fn adaptive_bounds(points: &[LabeledPoint]) -> (f64, f64) {
    let mut max_slope: f64 = 1.0;
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1) {
            let dx = (a.x - b.x).abs();
            if dx > 1e-9 {
                max_slope = max_slope.max(((a.z - b.z) / (a.x - b.x)).abs());
            }
        }
    }
    let rho_bound = 8.0 * (1.0 + max_slope);
    let max_abs = points
        .iter()
        .map(|p| p.x.abs().max(p.z.abs()))
        .fold(0.0f64, f64::max);
    let c_bound = max_abs + rho_bound * max_abs + 16.0;
    (rho_bound, c_bound)
}

/// Clip the box image by every point constraint. Empty result means the
/// dataset is infeasible within the box; that is not an error.
pub fn feasible_polygon(
    points: &[LabeledPoint],
    bx: &ParamBox,
) -> Result<ParamPolygon, GeometryError> {
    check_binary_labels(points)?;
    let mut poly = ParamPolygon::from_box(bx);
    for p in points {
        poly = poly.clip_halfplane(p);
        if poly.is_empty() {
            break;
        }
    }
    Ok(poly)
}

/// `{arctan(rho) : (rho, c) in poly}` as a single interval from the vertex
/// extremes; empty set for an empty polygon.
pub fn slope_set(poly: &ParamPolygon) -> AngleSet {
    if poly.is_empty() {
        return AngleSet::empty();
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(r, _) in poly.vertices() {
        lo = lo.min(r);
        hi = hi.max(r);
    }
    AngleSet::from_interval(lo.atan(), hi.atan())
}

/// Intercept extremes over the vertices; `None` for an empty polygon.
pub fn intercept_interval(poly: &ParamPolygon) -> Option<Interval> {
    if poly.is_empty() {
        return None;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, c) in poly.vertices() {
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Some(Interval::new(lo, hi))
}

/// Tri-state implied label of a workspace point under every classifier in
/// the polygon: +1 / -1 when all vertices agree on the sign of the residual
/// (with tolerance `GEOM_EPS`), 0 when the sign varies.
pub fn certainty_label(poly: &ParamPolygon, p: (f64, f64)) -> Result<i8, GeometryError> {
    if poly.is_empty() {
        return Err(GeometryError::EmptyPolygon);
    }
    let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(r, c) in poly.vertices() {
        let f = p.1 - r * p.0 - c;
        fmin = fmin.min(f);
        fmax = fmax.max(f);
    }
    if fmin >= -GEOM_EPS && fmax > GEOM_EPS {
        Ok(1)
    } else if fmax <= GEOM_EPS && fmin < -GEOM_EPS {
        Ok(-1)
    } else {
        Ok(0)
    }
}

/// How deep a certainty-labeled point sits inside its region: the smallest
/// absolute residual over the polygon vertices.
pub fn penetration_depth(poly: &ParamPolygon, p: (f64, f64)) -> f64 {
    poly.vertices()
        .iter()
        .map(|&(r, c)| (p.1 - r * p.0 - c).abs())
        .fold(f64::INFINITY, f64::min)
}

/// An opposite-label pair ordered as (negative point, positive point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OppositePair {
    pub neg: LabeledPoint,
    pub pos: LabeledPoint,
}

impl OppositePair {
    pub fn distance(&self) -> f64 {
        self.neg.distance(&self.pos)
    }

    pub fn midpoint(&self) -> (f64, f64) {
        (
            (self.neg.x + self.pos.x) / 2.0,
            (self.neg.z + self.pos.z) / 2.0,
        )
    }
}

fn pair_key(p: &OppositePair) -> (f64, f64, f64, f64, f64) {
    (p.distance(), p.neg.x, p.neg.z, p.pos.x, p.pos.z)
}

fn shares_point(a: &OppositePair, b: &OppositePair) -> bool {
    let same = |u: &LabeledPoint, v: &LabeledPoint| u.x == v.x && u.z == v.z;
    same(&a.neg, &b.neg) || same(&a.pos, &b.pos)
}

/// The two closest opposite-label pairs whose midpoints are at least
/// `min_separation` apart and which share no point. Ties break
/// lexicographically on the negative point, then the positive point.
pub fn closest_opposite_pairs(
    points: &[LabeledPoint],
    min_separation: f64,
) -> Result<(OppositePair, OppositePair), GeometryError> {
    check_binary_labels(points)?;
    let pos_count = points.iter().filter(|p| p.label == 1).count();
    let neg_count = points.iter().filter(|p| p.label == -1).count();
    if pos_count < 2 || neg_count < 2 {
        return Err(GeometryError::TooFewPoints {
            pos: pos_count,
            neg: neg_count,
        });
    }
    let mut pairs: Vec<OppositePair> = Vec::new();
    for n in points.iter().filter(|p| p.label == -1) {
        for p in points.iter().filter(|p| p.label == 1) {
            pairs.push(OppositePair { neg: *n, pos: *p });
        }
    }
    pairs.sort_by(|a, b| pair_key(a).partial_cmp(&pair_key(b)).unwrap());
    let pair_a = pairs[0];
    let pair_b = pairs
        .iter()
        .skip(1)
        .find(|cand| {
            !shares_point(cand, &pair_a) && {
                let (mx, mz) = cand.midpoint();
                let (ax, az) = pair_a.midpoint();
                (mx - ax).hypot(mz - az) >= min_separation
            }
        })
        .copied()
        .ok_or(GeometryError::InsufficientSpread { min_separation })?;
    Ok((pair_a, pair_b))
}
