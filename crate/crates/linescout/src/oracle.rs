//! Independent brute-force oracles used by tests and the `oracle` CLI
//! subcommands.
//!
//! Nothing here reuses the polygon-clipping path: separability is decided by
//! a small exact LP over `(rho, c, t)` solved by vertex enumeration, and the
//! projection/margin oracles sweep one parameter on a grid while solving the
//! other dimension in closed form.

use crate::geometry::LabeledPoint;

/// One linear constraint `a . v >= b` over `(rho, c, t)`.
#[derive(Debug, Clone, Copy)]
struct Row {
    a: [f64; 3],
    b: f64,
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(rows: [&Row; 3]) -> Option<[f64; 3]> {
    let a = [rows[0].a, rows[1].a, rows[2].a];
    let d = det3(a);
    let scale: f64 = a.iter().flatten().map(|v| v.abs()).sum::<f64>().max(1.0);
    if d.abs() <= 1e-12 * scale {
        return None;
    }
    let b = [rows[0].b, rows[1].b, rows[2].b];
    let mut out = [0.0; 3];
    for k in 0..3 {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        out[k] = det3(m) / d;
    }
    Some(out)
}

/// Exact separability oracle: for some pair (positive point i, negative
/// point j) the LP
///
/// ```text
/// max t  s.t.  y_k (z_k - rho x_k - c) >= 0 for all k,
///              (z_i - rho x_i - c)  >= t,
///             -(z_j - rho x_j - c)  >= t,   |rho| <= R, |c| <= C, t <= T
/// ```
///
/// must attain a strictly positive optimum. Optima are found by enumerating
/// all constraint triples (every LP vertex is the intersection of three
/// tight rows).
pub fn lp_separable(points: &[LabeledPoint]) -> bool {
    assert!(points.iter().all(|p| p.label == 1 || p.label == -1));
    let pos: Vec<&LabeledPoint> = points.iter().filter(|p| p.label == 1).collect();
    let neg: Vec<&LabeledPoint> = points.iter().filter(|p| p.label == -1).collect();
    if pos.is_empty() || neg.is_empty() {
        return true;
    }
    let mut max_slope: f64 = 1.0;
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1) {
            if (a.x - b.x).abs() > 1e-9 {
                max_slope = max_slope.max(((a.z - b.z) / (a.x - b.x)).abs());
            }
        }
    }
    let r_bound = 64.0 * (1.0 + max_slope);
    let max_abs = points
        .iter()
        .map(|p| p.x.abs().max(p.z.abs()))
        .fold(1.0f64, f64::max);
    let c_bound = 64.0 + max_abs * (1.0 + r_bound);
    let t_cap = 1e6;

    let mut base: Vec<Row> = Vec::with_capacity(points.len() + 6);
    for p in points {
        let y = p.label as f64;
        base.push(Row {
            a: [-y * p.x, -y, 0.0],
            b: -y * p.z,
        });
    }
    base.push(Row {
        a: [1.0, 0.0, 0.0],
        b: -r_bound,
    });
    base.push(Row {
        a: [-1.0, 0.0, 0.0],
        b: -r_bound,
    });
    base.push(Row {
        a: [0.0, 1.0, 0.0],
        b: -c_bound,
    });
    base.push(Row {
        a: [0.0, -1.0, 0.0],
        b: -c_bound,
    });
    base.push(Row {
        a: [0.0, 0.0, 1.0],
        b: -t_cap,
    });
    base.push(Row {
        a: [0.0, 0.0, -1.0],
        b: -t_cap,
    });

    for i in &pos {
        for j in &neg {
            let mut rows = base.clone();
            rows.push(Row {
                a: [-i.x, -1.0, -1.0],
                b: -i.z,
            });
            rows.push(Row {
                a: [j.x, 1.0, -1.0],
                b: j.z,
            });
            if lp_max_t(&rows) > 1e-7 {
                return true;
            }
        }
    }
    false
}

fn lp_max_t(rows: &[Row]) -> f64 {
    let n = rows.len();
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let Some(v) = solve3([&rows[i], &rows[j], &rows[k]]) else {
                    continue;
                };
                let feasible = rows.iter().all(|r| {
                    let lhs = r.a[0] * v[0] + r.a[1] * v[1] + r.a[2] * v[2];
                    lhs >= r.b - 1e-6 * (1.0 + lhs.abs() + r.b.abs())
                });
                if feasible && v[2] > best {
                    best = v[2];
                }
            }
        }
    }
    best
}

/// Bounds reported by the projection oracle.
#[derive(Debug, Clone, Copy)]
pub struct GridBounds {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

/// Grid oracle for the feasible-region projections. Sweeps theta columns
/// solving the feasible intercept interval exactly per column, then sweeps
/// intercept rows solving the slope interval exactly per row. Each reported
/// bound is therefore within one grid step of the true projection bound.
pub fn grid_project(
    points: &[LabeledPoint],
    theta_min: f64,
    theta_max: f64,
    c_min: f64,
    c_max: f64,
    theta_step: f64,
    c_step: f64,
) -> Option<GridBounds> {
    let c_interval_at = |rho: f64| -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (c_min, c_max);
        for p in points {
            let bound = p.z - rho * p.x;
            if p.label == 1 {
                hi = hi.min(bound);
            } else {
                lo = lo.max(bound);
            }
        }
        (lo <= hi + 1e-12).then_some((lo, hi))
    };
    let rho_interval_at = |c: f64| -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (theta_min.tan(), theta_max.tan());
        for p in points {
            let y = p.label as f64;
            // y (z - rho x - c) >= 0  <=>  y x rho <= y (z - c)
            let a = y * p.x;
            let b = y * (p.z - c);
            if a.abs() <= 1e-15 {
                if b < -1e-12 {
                    return None;
                }
            } else if a > 0.0 {
                hi = hi.min(b / a);
            } else {
                lo = lo.max(b / a);
            }
        }
        (lo <= hi + 1e-12).then_some((lo, hi))
    };

    let mut theta_bounds: Option<(f64, f64)> = None;
    let mut c_from_cols: Option<(f64, f64)> = None;
    let mut theta = theta_min;
    while theta <= theta_max + 1e-12 {
        if let Some((lo, hi)) = c_interval_at(theta.tan()) {
            theta_bounds = Some(match theta_bounds {
                None => (theta, theta),
                Some((a, b)) => (a.min(theta), b.max(theta)),
            });
            c_from_cols = Some(match c_from_cols {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        }
        theta += theta_step;
    }

    let mut c_bounds: Option<(f64, f64)> = None;
    let mut rho_from_rows: Option<(f64, f64)> = None;
    let mut c = c_min;
    while c <= c_max + 1e-12 {
        if let Some((lo, hi)) = rho_interval_at(c) {
            c_bounds = Some(match c_bounds {
                None => (c, c),
                Some((a, b)) => (a.min(c), b.max(c)),
            });
            rho_from_rows = Some(match rho_from_rows {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        }
        c += c_step;
    }

    match (theta_bounds, c_bounds) {
        (None, None) => None,
        (tb, cb) => {
            let (theta_lo, theta_hi) = tb
                .or_else(|| rho_from_rows.map(|(a, b)| (a.atan(), b.atan())))
                .unwrap();
            let (c_lo, c_hi) = cb.or(c_from_cols).unwrap();
            Some(GridBounds {
                theta_lo,
                theta_hi,
                c_lo,
                c_hi,
            })
        }
    }
}

/// Direction-grid margin oracle. For a fixed slope angle the best intercept
/// centers the separator between the class extremes of the vertical
/// residual, giving margin `(min_pos - max_neg) / 2 * cos(theta)` when
/// positive. Returns the best `(margin, rho, c)` over the grid.
pub fn grid_margin(points: &[LabeledPoint], theta_step: f64) -> Option<(f64, f64, f64)> {
    let pos: Vec<&LabeledPoint> = points.iter().filter(|p| p.label == 1).collect();
    let neg: Vec<&LabeledPoint> = points.iter().filter(|p| p.label == -1).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut best: Option<(f64, f64, f64)> = None;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut theta = -half_pi + theta_step;
    while theta < half_pi {
        let rho = theta.tan();
        let min_pos = pos
            .iter()
            .map(|p| p.z - rho * p.x)
            .fold(f64::INFINITY, f64::min);
        let max_neg = neg
            .iter()
            .map(|p| p.z - rho * p.x)
            .fold(f64::NEG_INFINITY, f64::max);
        let gap = min_pos - max_neg;
        if gap > 0.0 {
            let margin = gap / 2.0 * theta.cos();
            let c = (min_pos + max_neg) / 2.0;
            if best.map_or(true, |(m, _, _)| margin > m) {
                best = Some((margin, rho, c));
            }
        }
        theta += theta_step;
    }
    best
}
