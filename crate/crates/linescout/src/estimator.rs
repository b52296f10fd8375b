//! Classifier estimation from collected datasets.
//!
//! Three estimators are provided: the quadrilateral angle-bisector built
//! from the two closest opposite-label pairs, an exact hard-margin
//! separator, and the version-space vertex centroid. All of them report a
//! non-vertical line `(rho, c)`.

use thiserror::Error;

use crate::geometry::{closest_opposite_pairs, GeometryError, LabeledPoint, ParamPolygon};
use crate::world::TrueClassifier;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("dataset is not linearly separable")]
    NotSeparable,
    #[error("best separator is vertical and cannot be expressed as z = rho*x + c")]
    VerticalSeparator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Bisector,
    MaxMargin,
    PolygonCenter,
    MidpointLine,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimateMethod::Bisector => "bisector",
            EstimateMethod::MaxMargin => "max_margin",
            EstimateMethod::PolygonCenter => "polygon_center",
            EstimateMethod::MidpointLine => "midpoint_line",
        };
        f.write_str(s)
    }
}

/// An estimated line together with the method that produced it.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub rho: f64,
    pub c: f64,
    pub method: EstimateMethod,
}

impl Estimate {
    pub fn theta(&self) -> f64 {
        self.rho.atan()
    }
}

/// Quadrilateral estimator: take the two closest opposite-label pairs
/// `(p1, -1), (p2, +1)` and `(p3, +1), (p4, -1)`, intersect the two
/// opposite-label cross segments `p1-p3` and `p2-p4` (each crosses the
/// boundary), and bisect the angle the first pair subtends at the
/// intersection. Falls back to the line through the two pair midpoints when
/// the construction degenerates.
pub fn bisector_estimate(
    dataset: &[LabeledPoint],
    min_separation: f64,
) -> Result<Estimate, EstimatorError> {
    let (pair_a, pair_b) = closest_opposite_pairs(dataset, min_separation)?;
    let p1 = (pair_a.neg.x, pair_a.neg.z);
    let p2 = (pair_a.pos.x, pair_a.pos.z);
    let p3 = (pair_b.pos.x, pair_b.pos.z);
    let p4 = (pair_b.neg.x, pair_b.neg.z);

    let midline = || -> Result<Estimate, EstimatorError> {
        let (ma, mb) = (pair_a.midpoint(), pair_b.midpoint());
        let dx = mb.0 - ma.0;
        if dx.abs() < 1e-12 {
            return Err(EstimatorError::VerticalSeparator);
        }
        let rho = (mb.1 - ma.1) / dx;
        Ok(Estimate {
            rho,
            c: ma.1 - rho * ma.0,
            method: EstimateMethod::MidpointLine,
        })
    };

    let Some(pm) = line_intersection(p1, p3, p2, p4) else {
        return midline();
    };
    let u = (p1.0 - pm.0, p1.1 - pm.1);
    let v = (p2.0 - pm.0, p2.1 - pm.1);
    let nu = (u.0.hypot(u.1), v.0.hypot(v.1));
    if nu.0 < 1e-12 || nu.1 < 1e-12 {
        return midline();
    }
    let bis = (u.0 / nu.0 + v.0 / nu.1, u.1 / nu.0 + v.1 / nu.1);
    if bis.0.hypot(bis.1) < 1e-9 || bis.0.abs() < 1e-9 {
        return midline();
    }
    let rho = bis.1 / bis.0;
    Ok(Estimate {
        rho,
        c: pm.1 - rho * pm.0,
        method: EstimateMethod::Bisector,
    })
}

fn line_intersection(
    a0: (f64, f64),
    a1: (f64, f64),
    b0: (f64, f64),
    b1: (f64, f64),
) -> Option<(f64, f64)> {
    let da = (a1.0 - a0.0, a1.1 - a0.1);
    let db = (b1.0 - b0.0, b1.1 - b0.1);
    let denom = da.0 * db.1 - da.1 * db.0;
    let scale = da.0.abs() + da.1.abs() + db.0.abs() + db.1.abs();
    if denom.abs() <= 1e-12 * scale * scale {
        return None;
    }
    let t = ((b0.0 - a0.0) * db.1 - (b0.1 - a0.1) * db.0) / denom;
    Some((a0.0 + t * da.0, a0.1 + t * da.1))
}

/// Exact hard-margin separator under the sign convention that positive
/// labels sit above the line.
///
/// For a fixed slope angle the best intercept centers the line between the
/// class extremes of the vertical residual, so the margin as a function of
/// the angle is piecewise smooth. Its interior maximizer is either a smooth
/// critical point of an active opposite-label pair (the pair's perpendicular
/// direction) or a breakpoint where two same-label points tie (the pair's
/// own slope). Enumerating those finitely many candidate angles solves the
/// problem exactly; no iterative optimization is involved.
pub fn max_margin_estimate(dataset: &[LabeledPoint]) -> Result<(Estimate, f64), EstimatorError> {
    let pos: Vec<&LabeledPoint> = dataset.iter().filter(|p| p.label == 1).collect();
    let neg: Vec<&LabeledPoint> = dataset.iter().filter(|p| p.label == -1).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(EstimatorError::NotSeparable);
    }
    // margin(theta) = cos(theta) * (min_pos v - max_neg v) / 2 with
    // v_i = z_i - tan(theta) x_i; c(theta) centers the two extremes.
    let eval = |theta: f64| -> (f64, f64) {
        let rho = theta.tan();
        let vmin = pos
            .iter()
            .map(|p| p.z - rho * p.x)
            .fold(f64::INFINITY, f64::min);
        let vmax = neg
            .iter()
            .map(|p| p.z - rho * p.x)
            .fold(f64::NEG_INFINITY, f64::max);
        ((vmin - vmax) / 2.0 * theta.cos(), (vmin + vmax) / 2.0)
    };

    let mut candidates: Vec<f64> = vec![0.0];
    for a in &pos {
        for b in &neg {
            let (dz, dx) = (a.z - b.z, a.x - b.x);
            if dz.abs() > 1e-300 {
                // Critical point of (dz cos - dx sin): the pair's
                // perpendicular-bisector direction.
                candidates.push((-dx / dz).atan());
            }
        }
    }
    let mut same_class = |class: &[&LabeledPoint]| {
        for (i, a) in class.iter().enumerate() {
            for b in class.iter().skip(i + 1) {
                if (a.x - b.x).abs() > 1e-300 {
                    candidates.push(((a.z - b.z) / (a.x - b.x)).atan());
                }
            }
        }
    };
    same_class(&pos);
    same_class(&neg);

    let mut best: Option<(f64, f64, f64)> = None;
    for &theta in &candidates {
        let (margin, c) = eval(theta);
        if margin > 0.0 && best.map_or(true, |(m, _, _)| margin > m) {
            best = Some((margin, theta, c));
        }
    }
    let Some((margin, theta, c)) = best else {
        return Err(EstimatorError::NotSeparable);
    };
    // A vertical separator can dominate every non-vertical candidate when
    // the classes split left/right; the supremum is then not attained.
    let vertical_limit = {
        let a = (neg.iter().map(|p| p.x).fold(f64::INFINITY, f64::min)
            - pos.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max))
            / 2.0;
        let b = (pos.iter().map(|p| p.x).fold(f64::INFINITY, f64::min)
            - neg.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max))
            / 2.0;
        a.max(b)
    };
    if vertical_limit > margin {
        return Err(EstimatorError::VerticalSeparator);
    }
    let rho = theta.tan();
    for p in dataset {
        if (p.label as f64) * (p.z - rho * p.x - c) <= 0.0 {
            return Err(EstimatorError::NotSeparable);
        }
    }
    Ok((
        Estimate {
            rho,
            c,
            method: EstimateMethod::MaxMargin,
        },
        margin,
    ))
}

/// Vertex centroid of the version space; always a consistent classifier for
/// the dataset that produced the polygon.
pub fn polygon_center_estimate(poly: &ParamPolygon) -> Result<Estimate, EstimatorError> {
    let (rho, c) = poly.vertex_centroid()?;
    Ok(Estimate {
        rho,
        c,
        method: EstimateMethod::PolygonCenter,
    })
}

/// Absolute errors `(|theta_hat - theta*|, |c_hat - c*|)` in radians/meters.
pub fn estimation_error(e: &Estimate, cl: &TrueClassifier) -> (f64, f64) {
    ((e.rho.atan() - cl.theta()).abs(), (e.c - cl.c).abs())
}
