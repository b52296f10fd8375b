//! Discrete Bayesian filter over noise-sign sequences.
//!
//! Each hypothesis fixes the noise sign of every observation so far, which
//! implies a true-label sequence and hence a version-space polygon. A
//! hypothesis survives only while its implied labels stay linearly separable
//! together with the anchors (its polygon is nonempty). Per-step weight
//! factors follow the noise law: inside the trusted region the sign is +1
//! with probability one; outside it is +1 with probability `keep_prob` and
//! -1 otherwise. Under a point-mass action choice with deterministic
//! dynamics the policy terms cancel in the normalization, so the posterior
//! is exactly the normalized product of these factors over surviving
//! hypotheses.
//!
//! Weights accumulate in log space; tied weights resolve toward the
//! noiseless-first sequence (+1 sorts before -1).

use thiserror::Error;

use crate::geometry::{
    intercept_interval, slope_set, AngleSet, Interval, LabeledPoint, ParamPolygon,
};
use crate::world::NoiseField;

#[derive(Debug, Error)]
pub enum BeliefError {
    #[error(
        "belief collapse at step {step}: every noise-sign extension is non-separable \
         (position ({x}, {z}), observed {observed}, {parents} parent hypotheses)"
    )]
    Collapse {
        step: usize,
        x: f64,
        z: f64,
        observed: i8,
        parents: usize,
    },
    #[error("belief is empty")]
    Empty,
}

/// One surviving noise-sign sequence.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    /// Noise sign per observation step, entries +-1.
    pub eps: Vec<i8>,
    /// Implied true labels, `observed * eps` per step.
    pub implied: Vec<i8>,
    /// Version space of the implied labels together with the anchors.
    pub polygon: ParamPolygon,
    /// Log of the unnormalized weight (sum of per-step log factors).
    pub log_weight: f64,
}

impl Hypothesis {
    /// Render the sign sequence as `+`/`-` characters.
    pub fn eps_string(&self) -> String {
        self.eps
            .iter()
            .map(|&e| if e > 0 { '+' } else { '-' })
            .collect()
    }
}

/// Compare sequences with +1 before -1, shorter prefixes first.
fn eps_order(a: &[i8], b: &[i8]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        // +1 ranks before -1.
        match y.cmp(x) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Posterior over noise-sign sequences after `step` observations.
#[derive(Debug, Clone)]
pub struct BeliefState {
    pub hypotheses: Vec<Hypothesis>,
    /// Log-sum-exp of the hypothesis log weights.
    pub log_normalizer: f64,
    pub step: usize,
    positions: Vec<(f64, f64)>,
    observed: Vec<i8>,
}

/// Credible parameter sets accumulated from the highest-weight hypotheses.
#[derive(Debug, Clone)]
pub struct CredibleSummary {
    pub slopes: AngleSet,
    pub intercept: Option<Interval>,
    pub attained: f64,
    /// Indices of the hypotheses included, heaviest first.
    pub included: Vec<usize>,
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl BeliefState {
    /// Belief before any observation: the empty sequence with probability
    /// one over the anchor version space.
    pub fn init(anchor_polygon: ParamPolygon) -> Self {
        Self {
            hypotheses: vec![Hypothesis {
                eps: Vec::new(),
                implied: Vec::new(),
                polygon: anchor_polygon,
                log_weight: 0.0,
            }],
            log_normalizer: 0.0,
            step: 0,
            positions: Vec::new(),
            observed: Vec::new(),
        }
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn observed(&self) -> &[i8] {
        &self.observed
    }

    /// Normalized weight of hypothesis `i`.
    pub fn weight(&self, i: usize) -> f64 {
        (self.hypotheses[i].log_weight - self.log_normalizer).exp()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.hypotheses.len()).map(|i| self.weight(i)).collect()
    }

    /// Fold one observation into the filter, spawning sign children,
    /// pruning non-separable ones and renormalizing.
    pub fn update(
        &self,
        pos: (f64, f64),
        observed: i8,
        noise: &NoiseField,
    ) -> Result<BeliefState, BeliefError> {
        assert!(
            observed == 1 || observed == -1,
            "observed label must be +-1"
        );
        let trusted = noise.is_trusted(pos.0, pos.1);
        let mut children: Vec<Hypothesis> = Vec::with_capacity(self.hypotheses.len() * 2);
        for parent in &self.hypotheses {
            let branches: &[(i8, f64)] = if trusted {
                &[(1, 1.0)]
            } else {
                &[(1, 0.0), (-1, 0.0)] // factors filled below
            };
            for &(eps, _) in branches {
                let factor = if trusted {
                    1.0
                } else if eps == 1 {
                    noise.keep_prob
                } else {
                    1.0 - noise.keep_prob
                };
                if factor <= 0.0 {
                    continue;
                }
                let implied_label = observed * eps;
                let point =
                    LabeledPoint::new(pos.0, pos.1, implied_label).expect("implied labels are +-1");
                let polygon = parent.polygon.clip_halfplane(&point);
                if polygon.is_empty() {
                    continue;
                }
                let mut eps_seq = parent.eps.clone();
                eps_seq.push(eps);
                let mut implied = parent.implied.clone();
                implied.push(implied_label);
                children.push(Hypothesis {
                    eps: eps_seq,
                    implied,
                    polygon,
                    log_weight: parent.log_weight + factor.ln(),
                });
            }
        }
        if children.is_empty() {
            return Err(BeliefError::Collapse {
                step: self.step + 1,
                x: pos.0,
                z: pos.1,
                observed,
                parents: self.hypotheses.len(),
            });
        }
        let log_normalizer = log_sum_exp(children.iter().map(|h| h.log_weight));
        let mut positions = self.positions.clone();
        positions.push(pos);
        let mut obs = self.observed.clone();
        obs.push(observed);
        Ok(BeliefState {
            hypotheses: children,
            log_normalizer,
            step: self.step + 1,
            positions,
            observed: obs,
        })
    }

    /// Hypothesis indices sorted heaviest first; near-ties (1e-12 in log
    /// weight) resolve by the noiseless-first sequence order.
    fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.hypotheses.len()).collect();
        idx.sort_by(|&a, &b| {
            let (la, lb) = (self.hypotheses[a].log_weight, self.hypotheses[b].log_weight);
            if (la - lb).abs() <= 1e-12 {
                eps_order(&self.hypotheses[a].eps, &self.hypotheses[b].eps)
            } else {
                lb.partial_cmp(&la).unwrap()
            }
        });
        idx
    }

    /// Index of the maximum-posterior hypothesis.
    pub fn map_index(&self) -> Result<usize, BeliefError> {
        if self.hypotheses.is_empty() {
            return Err(BeliefError::Empty);
        }
        Ok(self.ranked()[0])
    }

    /// Maximum-posterior hypothesis.
    pub fn map_hypothesis(&self) -> Result<&Hypothesis, BeliefError> {
        Ok(&self.hypotheses[self.map_index()?])
    }

    /// Union of slope sets and interval hull of intercepts over the
    /// heaviest hypotheses whose cumulative probability reaches `level`.
    /// A level approaching zero selects the MAP hypothesis alone.
    pub fn credible_sets(&self, level: f64) -> CredibleSummary {
        assert!(level > 0.0 && level <= 1.0, "level must lie in (0, 1]");
        let ranked = self.ranked();
        let mut included = Vec::new();
        let mut cumulative = 0.0;
        let mut slope_sets: Vec<AngleSet> = Vec::new();
        let mut hull: Option<Interval> = None;
        for i in ranked {
            included.push(i);
            cumulative += self.weight(i);
            slope_sets.push(slope_set(&self.hypotheses[i].polygon));
            if let Some(ic) = intercept_interval(&self.hypotheses[i].polygon) {
                hull = Some(match hull {
                    None => ic,
                    Some(h) => Interval::new(h.lo.min(ic.lo), h.hi.max(ic.hi)),
                });
            }
            if cumulative >= level {
                break;
            }
        }
        CredibleSummary {
            slopes: AngleSet::union_all(slope_sets.iter()),
            intercept: hull,
            attained: cumulative,
            included,
        }
    }
}
