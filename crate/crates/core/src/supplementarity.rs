//! Measures of supplementarity and the interference form of the formula of
//! total probability.
//!
//! For the b/a direction and a result outcome `β`:
//!
//! ```text
//! δ(β) = p_b(β) − Σ_α p_a(α)·p_{b|a}(β|α)
//! λ(β) = δ(β) / (2·sqrt(Π_α p_a(α)·p_{b|a}(β|α)))
//! ```
//!
//! The a/b direction mirrors this with the roles of the observables swapped.

use serde::{Deserialize, Serialize};

use crate::model::{ContextData, Direction, Tolerances};
use crate::{Error, Result};

/// `|λ|` may exceed 1 by this much and still count as trigonometric; it
/// absorbs the rounding of an exact boundary value `|λ| = 1`.
pub const LAMBDA_BOUNDARY_SLACK: f64 = 1e-12;

/// The stored marginal of the result outcome and the two (marginal,
/// conditional) pairs that enter its Bayes mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Terms {
    pub marginal: f64,
    pub weights: [f64; 2],
    pub conditionals: [f64; 2],
}

impl Terms {
    pub fn products(&self) -> [f64; 2] {
        [
            self.weights[0] * self.conditionals[0],
            self.weights[1] * self.conditionals[1],
        ]
    }

    pub fn classical(&self) -> f64 {
        let p = self.products();
        p[0] + p[1]
    }

    /// `2·sqrt(Π ...)`, the normalizer of λ.
    pub fn denom(&self) -> f64 {
        let p = self.products();
        2.0 * (p[0] * p[1]).sqrt()
    }

    pub fn all_positive(&self) -> bool {
        self.weights.iter().chain(&self.conditionals).all(|&x| x > 0.0)
    }
}

pub(crate) fn terms(data: &ContextData, direction: Direction, outcome: usize) -> Result<Terms> {
    debug_assert!(outcome < 2);
    match direction {
        Direction::BGivenA => {
            let m = &data.p_b_given_a;
            Ok(Terms {
                marginal: data.p_b[outcome],
                weights: data.p_a.0,
                conditionals: [m.get(0, outcome), m.get(1, outcome)],
            })
        }
        Direction::AGivenB => {
            let m = data.reverse()?;
            Ok(Terms {
                marginal: data.p_a[outcome],
                weights: data.p_b.0,
                conditionals: [m.get(0, outcome), m.get(1, outcome)],
            })
        }
    }
}

/// Gap between a stored marginal and its classical Bayes mixture.
pub fn delta(data: &ContextData, direction: Direction, outcome: usize) -> Result<f64> {
    let t = terms(data, direction, outcome)?;
    Ok(t.marginal - t.classical())
}

/// Normalized measure of supplementarity. `None` when any contributing
/// probability is zero.
pub fn lambda_coeff(data: &ContextData, direction: Direction, outcome: usize) -> Result<Option<f64>> {
    let t = terms(data, direction, outcome)?;
    Ok(lambda_from_terms(&t))
}

fn lambda_from_terms(t: &Terms) -> Option<f64> {
    if !t.all_positive() {
        return None;
    }
    let denom = t.denom();
    (denom > 0.0).then(|| (t.marginal - t.classical()) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtpDecomposition {
    pub classical_part: f64,
    pub interference_term: f64,
    pub reconstructed: f64,
}

/// Splits a marginal into its classical part and the interference term
/// `2·λ·sqrt(Π ...)`.
pub fn interference_ftp(
    data: &ContextData,
    direction: Direction,
    outcome: usize,
) -> Result<FtpDecomposition> {
    let t = terms(data, direction, outcome)?;
    let lambda = lambda_from_terms(&t).ok_or(Error::DegenerateContext { direction, outcome })?;
    let classical_part = t.classical();
    let interference_term = lambda * t.denom();
    Ok(FtpDecomposition {
        classical_part,
        interference_term,
        reconstructed: classical_part + interference_term,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplementarityMeasures {
    pub direction: Direction,
    pub delta: [f64; 2],
    pub lambda: [Option<f64>; 2],
    pub denom: [f64; 2],
}

impl SupplementarityMeasures {
    pub fn compute(data: &ContextData, direction: Direction) -> Result<Self> {
        let t = [terms(data, direction, 0)?, terms(data, direction, 1)?];
        Ok(SupplementarityMeasures {
            direction,
            delta: t.map(|t| t.marginal - t.classical()),
            lambda: t.map(|t| lambda_from_terms(&t)),
            denom: t.map(|t| t.denom()),
        })
    }

    pub fn is_supplementary(&self, threshold: f64) -> bool {
        self.delta.iter().any(|d| d.abs() > threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseKind {
    Trigonometric,
    Hyperbolic,
}

/// A probabilistic phase. Trigonometric phases hold the principal value
/// `arccos λ ∈ [0, π]`; their sign is left open (`None`) until a Hilbert
/// representation picks one. Hyperbolic phases hold `arccosh |λ|` and the
/// sign of λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub kind: PhaseKind,
    pub theta: f64,
    pub sign: Option<i8>,
}

impl Phase {
    pub fn from_lambda(lambda: f64) -> Phase {
        if lambda.abs() <= 1.0 + LAMBDA_BOUNDARY_SLACK {
            Phase {
                kind: PhaseKind::Trigonometric,
                theta: lambda.clamp(-1.0, 1.0).acos(),
                sign: None,
            }
        } else {
            Phase {
                kind: PhaseKind::Hyperbolic,
                theta: lambda.abs().acosh(),
                sign: Some(if lambda > 0.0 { 1 } else { -1 }),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub direction: Direction,
    pub outcome: usize,
    /// `None` when λ is undefined for this outcome.
    pub phase: Option<Phase>,
}

/// Phase records for every outcome of the given measures.
pub fn extract_phases(measures: &SupplementarityMeasures) -> Vec<PhaseRecord> {
    (0..2)
        .map(|outcome| PhaseRecord {
            direction: measures.direction,
            outcome,
            phase: measures.lambda[outcome].map(Phase::from_lambda),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContextClass {
    Nonsupplementary,
    Trigonometric,
    Hyperbolic,
    Mixed,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub measures_ba: SupplementarityMeasures,
    pub measures_ab: Option<SupplementarityMeasures>,
    pub phases: Vec<PhaseRecord>,
    pub context_class: ContextClass,
    pub supplementary_ba: bool,
    pub supplementary_ab: Option<bool>,
    /// Some b/a λ is undefined. Reported even for nonsupplementary contexts.
    pub degenerate_lambda: bool,
    pub delta_threshold: f64,
}

/// Classifies a context with the exact-table threshold `tol.exact_eps`.
pub fn classify_context(data: &ContextData, tol: &Tolerances) -> ClassificationReport {
    classify_context_at(data, tol.exact_eps)
}

/// Classifies a context, deciding supplementarity with `|δ| > delta_threshold`.
///
/// Supplementarity is decided over every available direction. The class
/// itself is read off the b/a coefficients, which are the ones a complex
/// amplitude over the outcomes of `b` is built from.
pub fn classify_context_at(data: &ContextData, delta_threshold: f64) -> ClassificationReport {
    let measures_ba = SupplementarityMeasures::compute(data, Direction::BGivenA)
        .expect("b/a measures need no optional data");
    let measures_ab = SupplementarityMeasures::compute(data, Direction::AGivenB).ok();

    let supplementary_ba = measures_ba.is_supplementary(delta_threshold);
    let supplementary_ab = measures_ab.as_ref().map(|m| m.is_supplementary(delta_threshold));
    let degenerate_lambda = measures_ba.lambda.iter().any(Option::is_none);

    let context_class = if !supplementary_ba && supplementary_ab != Some(true) {
        ContextClass::Nonsupplementary
    } else if degenerate_lambda {
        ContextClass::Degenerate
    } else {
        let trig = measures_ba
            .lambda
            .iter()
            .flatten()
            .filter(|l| l.abs() <= 1.0 + LAMBDA_BOUNDARY_SLACK)
            .count();
        match trig {
            2 => ContextClass::Trigonometric,
            0 => ContextClass::Hyperbolic,
            _ => ContextClass::Mixed,
        }
    };

    let mut phases = extract_phases(&measures_ba);
    if let Some(m) = &measures_ab {
        phases.extend(extract_phases(m));
    }

    ClassificationReport {
        measures_ba,
        measures_ab,
        phases,
        context_class,
        supplementary_ba,
        supplementary_ab,
        degenerate_lambda,
        delta_threshold,
    }
}

/// True when every b/a λ is defined and `|λ| ≤ 1`: the region where a
/// complex amplitude exists. Nonsupplementary nondegenerate contexts belong
/// to it with λ = 0.
pub fn in_trigonometric_region(data: &ContextData) -> bool {
    (0..2).all(|i| {
        matches!(
            lambda_coeff(data, Direction::BGivenA, i),
            Ok(Some(l)) if l.abs() <= 1.0 + LAMBDA_BOUNDARY_SLACK
        )
    })
}
