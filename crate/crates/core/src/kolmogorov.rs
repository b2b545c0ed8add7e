//! Structural tests on the data of a context: double stochasticity,
//! statistical balance, symmetric conditioning and the existence of a
//! single joint probability table (Kolmogorovness).
//!
//! The data is Kolmogorovian iff for every pair of outcomes
//!
//! ```text
//! p_a(α)·p_{b|a}(β|α) = p_b(β)·p_{a|b}(α|β)
//! ```
//!
//! in which case that common value is the joint table.

use serde::{Deserialize, Serialize};

use crate::model::{ContextData, Direction, ProbVector, Tolerances, TransitionMatrix};
use crate::supplementarity::SupplementarityMeasures;
use crate::{Error, Result};

/// A 2x2 joint probability table, `joint[α][β]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Joint(pub [[f64; 2]; 2]);

impl Joint {
    pub fn marginal_a(&self) -> ProbVector {
        let j = &self.0;
        ProbVector([j[0][0] + j[0][1], j[1][0] + j[1][1]])
    }

    pub fn marginal_b(&self) -> ProbVector {
        let j = &self.0;
        ProbVector([j[0][0] + j[1][0], j[0][1] + j[1][1]])
    }

    /// `p(β|α)`, row α. `None` if some marginal of `a` is zero.
    pub fn b_given_a(&self) -> Option<TransitionMatrix> {
        let pa = self.marginal_a();
        if pa.0.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let j = &self.0;
        Some(TransitionMatrix::b_given_a([
            [j[0][0] / pa[0], j[0][1] / pa[0]],
            [j[1][0] / pa[1], j[1][1] / pa[1]],
        ]))
    }

    /// `p(α|β)`, row β. `None` if some marginal of `b` is zero.
    pub fn a_given_b(&self) -> Option<TransitionMatrix> {
        let pb = self.marginal_b();
        if pb.0.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let j = &self.0;
        Some(TransitionMatrix::a_given_b([
            [j[0][0] / pb[0], j[1][0] / pb[0]],
            [j[0][1] / pb[1], j[1][1] / pb[1]],
        ]))
    }

    /// Reads marginals and both conditionals off the table.
    pub fn to_context(&self) -> Option<ContextData> {
        let ba = self.b_given_a()?;
        let ab = self.a_given_b()?;
        Some(ContextData::new(
            self.marginal_a().0,
            self.marginal_b().0,
            ba.rows,
            Some(ab.rows),
        ))
    }
}

pub fn is_double_stochastic(m: &TransitionMatrix, tol: &Tolerances) -> bool {
    (0..2).all(|c| (m.column_sum(c) - 1.0).abs() <= tol.exact_eps)
}

pub fn is_stochastic(m: &TransitionMatrix, tol: &Tolerances) -> bool {
    (0..2).all(|r| (m.row_sum(r) - 1.0).abs() <= tol.exact_eps)
        && m.rows.iter().flatten().all(|&x| x >= -tol.exact_eps)
}

/// `p_{a|b}(α|β) = p_{b|a}(β|α)` for all outcomes. Note the transposition:
/// rows of the a/b matrix are indexed by β.
pub fn is_symmetrically_conditioned(data: &ContextData, tol: &Tolerances) -> Result<bool> {
    let ab = data.reverse()?;
    let ba = &data.p_b_given_a;
    Ok((0..2).all(|alpha| {
        (0..2).all(|beta| (ab.get(beta, alpha) - ba.get(alpha, beta)).abs() <= tol.exact_eps)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovTest {
    pub kolmogorovian: bool,
    pub joint: Option<Joint>,
    /// Largest violation of `p_a(α)·p(β|α) = p_b(β)·p(α|β)` over all four cells.
    pub max_residual: f64,
    /// Some marginal is zero, so some conditional row is not determined by
    /// a joint table. All four cells are still checked; in a zero row both
    /// sides must vanish.
    pub degenerate_marginals: bool,
}

pub fn kolmogorov_test(data: &ContextData, tol: &Tolerances) -> Result<KolmogorovTest> {
    let ab = data.reverse()?;
    let ba = &data.p_b_given_a;
    let mut max_residual = 0.0f64;
    let mut joint = [[0.0; 2]; 2];
    for alpha in 0..2 {
        for beta in 0..2 {
            let left = data.p_a[alpha] * ba.get(alpha, beta);
            let right = data.p_b[beta] * ab.get(beta, alpha);
            max_residual = max_residual.max((left - right).abs());
            joint[alpha][beta] = left;
        }
    }
    let kolmogorovian = max_residual <= tol.exact_eps;
    let degenerate_marginals = data
        .p_a
        .0
        .iter()
        .chain(&data.p_b.0)
        .any(|&x| x <= tol.exact_eps);
    Ok(KolmogorovTest {
        kolmogorovian,
        joint: kolmogorovian.then_some(Joint(joint)),
        max_residual,
        degenerate_marginals,
    })
}

pub const ORACLE_GRID_STEP: f64 = 1e-4;
pub const ORACLE_CONSTRAINT_TOL: f64 = 1e-3;

/// Exhaustive search for a joint table reproducing the data.
///
/// Tables with the stored marginals form a one-parameter family
/// `[[t, p_a1 − t], [p_b1 − t, 1 − p_a1 − p_b1 + t]]` for `t` between
/// `max(0, p_a1 + p_b1 − 1)` and `min(p_a1, p_b1)`. Every grid point is
/// tested against the conditionals in product form,
/// `P(α, β) = p(β|α)·p_a(α)` and `P(α, β) = p(α|β)·p_b(β)`, which also
/// covers zero marginals.
pub fn brute_force_joint_oracle(data: &ContextData, grid_step: f64, constraint_tol: f64) -> Result<bool> {
    if !(grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid_step must be positive, got {grid_step}"
        )));
    }
    let ab = data.reverse()?;
    let ba = &data.p_b_given_a;
    let (pa, pb) = (data.p_a.0, data.p_b.0);
    let lo = (pa[0] + pb[0] - 1.0).max(0.0);
    let hi = pa[0].min(pb[0]);
    if lo > hi + constraint_tol {
        return Ok(false);
    }

    let matches = |t: f64| {
        let table = [[t, pa[0] - t], [pb[0] - t, 1.0 - pa[0] - pb[0] + t]];
        (0..2).all(|alpha| {
            (0..2).all(|beta| {
                let cell = table[alpha][beta];
                cell >= -constraint_tol
                    && (cell - ba.get(alpha, beta) * pa[alpha]).abs() <= constraint_tol
                    && (cell - ab.get(beta, alpha) * pb[beta]).abs() <= constraint_tol
            })
        })
    };

    let steps = ((hi - lo).max(0.0) / grid_step).floor() as u64;
    Ok((0..=steps).any(|k| matches(lo + k as f64 * grid_step)) || matches(hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricEquivalence {
    /// Symmetric conditioning holds, so the equivalence is claimed.
    pub applies: bool,
    pub kolmogorovian: Option<bool>,
    pub nonsupplementary: Option<bool>,
    pub equivalence_holds: bool,
    /// For nonsupplementary data: whether both marginals are uniform.
    pub forced_uniform: Option<bool>,
}

/// Under symmetric conditioning, Kolmogorovness and nonsupplementarity
/// coincide, and nonsupplementarity forces uniform marginals whenever the
/// conditionals are not deterministic.
pub fn check_symmetric_equivalence(data: &ContextData, tol: &Tolerances) -> SymmetricEquivalence {
    let applies = matches!(is_symmetrically_conditioned(data, tol), Ok(true));
    if !applies {
        return SymmetricEquivalence {
            applies,
            kolmogorovian: None,
            nonsupplementary: None,
            equivalence_holds: false,
            forced_uniform: None,
        };
    }
    let kolmogorovian = kolmogorov_test(data, tol)
        .expect("symmetric conditioning implies the reverse matrix")
        .kolmogorovian;
    let nonsupplementary = is_nonsupplementary(data, tol.exact_eps)
        .expect("symmetric conditioning implies the reverse matrix");
    let uniform = data
        .p_a
        .0
        .iter()
        .chain(&data.p_b.0)
        .all(|&x| (x - 0.5).abs() <= tol.exact_eps);
    SymmetricEquivalence {
        applies,
        kolmogorovian: Some(kolmogorovian),
        nonsupplementary: Some(nonsupplementary),
        equivalence_holds: kolmogorovian == nonsupplementary,
        forced_uniform: nonsupplementary.then_some(uniform),
    }
}

/// All δ vanish (within `threshold`) in both directions.
pub fn is_nonsupplementary(data: &ContextData, threshold: f64) -> Result<bool> {
    Direction::BOTH.iter().try_fold(true, |acc, &d| {
        SupplementarityMeasures::compute(data, d).map(|m| acc && !m.is_supplementary(threshold))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointEquivalences {
    pub double_stochastic_both: bool,
    pub uniform_marginals: bool,
    pub symmetric_conditioning: bool,
    pub all_equivalent: bool,
}

/// For a genuine joint table the three conditions (both conditional
/// matrices double stochastic, uniform marginals, symmetric conditioning)
/// are equivalent.
pub fn joint_equivalences(joint: &Joint, tol: &Tolerances) -> Result<JointEquivalences> {
    let pa = joint.marginal_a();
    let pb = joint.marginal_b();
    for (observable, p) in [("a", pa), ("b", pb)] {
        if let Some(index) = p.0.iter().position(|&x| x <= tol.exact_eps) {
            return Err(Error::ZeroMarginal { observable, index });
        }
    }
    let ba = joint.b_given_a().expect("marginals checked above");
    let ab = joint.a_given_b().expect("marginals checked above");

    let double_stochastic_both = is_double_stochastic(&ba, tol) && is_double_stochastic(&ab, tol);
    let uniform_marginals = pa.0.iter().chain(&pb.0).all(|&x| (x - 0.5).abs() <= tol.exact_eps);
    let symmetric_conditioning = (0..2)
        .all(|alpha| (0..2).all(|beta| (ab.get(beta, alpha) - ba.get(alpha, beta)).abs() <= tol.exact_eps));
    Ok(JointEquivalences {
        double_stochastic_both,
        uniform_marginals,
        symmetric_conditioning,
        all_equivalent: double_stochastic_both == uniform_marginals
            && uniform_marginals == symmetric_conditioning,
    })
}

/// The independent coupling `p_a(α)·p_b(β)`.
pub fn product_measure(p_a: &ProbVector, p_b: &ProbVector) -> Joint {
    Joint([
        [p_a[0] * p_b[0], p_a[0] * p_b[1]],
        [p_a[1] * p_b[0], p_a[1] * p_b[1]],
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub stochastic_ba: bool,
    pub stochastic_ab: Option<bool>,
    pub double_stochastic_ba: bool,
    pub double_stochastic_ab: Option<bool>,
    pub statistically_balanced: Option<bool>,
    pub symmetrically_conditioned: Option<bool>,
    pub kolmogorovian: Option<bool>,
    pub max_ax_residual: Option<f64>,
    pub degenerate_marginals: Option<bool>,
    pub joint: Option<Joint>,
}

/// Every structural test at once. Fields that need the reverse matrix are
/// `None` when it is absent.
pub fn structure_report(data: &ContextData, tol: &Tolerances) -> StructureReport {
    let ab = data.p_a_given_b.as_ref();
    let double_stochastic_ba = is_double_stochastic(&data.p_b_given_a, tol);
    let double_stochastic_ab = ab.map(|m| is_double_stochastic(m, tol));
    let k = kolmogorov_test(data, tol).ok();
    StructureReport {
        stochastic_ba: is_stochastic(&data.p_b_given_a, tol),
        stochastic_ab: ab.map(|m| is_stochastic(m, tol)),
        double_stochastic_ba,
        double_stochastic_ab,
        statistically_balanced: double_stochastic_ab.map(|d| d && double_stochastic_ba),
        symmetrically_conditioned: is_symmetrically_conditioned(data, tol).ok(),
        kolmogorovian: k.as_ref().map(|k| k.kolmogorovian),
        max_ax_residual: k.as_ref().map(|k| k.max_residual),
        degenerate_marginals: k.as_ref().map(|k| k.degenerate_marginals),
        joint: k.and_then(|k| k.joint),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sym07() -> ContextData {
        let m = [[0.7, 0.3], [0.3, 0.7]];
        ContextData::new([0.5, 0.5], [0.5, 0.5], m, Some(m))
    }

    fn no_joint() -> ContextData {
        ContextData::new(
            [0.5, 0.5],
            [0.5, 0.5],
            [[0.7, 0.3], [0.3, 0.7]],
            Some([[0.6, 0.4], [0.4, 0.6]]),
        )
    }

    #[test]
    fn double_stochastic_examples() {
        let t = tol();
        assert!(is_double_stochastic(&TransitionMatrix::b_given_a([[0.5, 0.5], [0.5, 0.5]]), &t));
        assert!(is_double_stochastic(&TransitionMatrix::b_given_a([[0.7, 0.3], [0.3, 0.7]]), &t));
        let m = TransitionMatrix::b_given_a([[0.9, 0.1], [0.8, 0.2]]);
        assert!(!is_double_stochastic(&m, &t));
        assert_abs_diff_eq!(m.column_sum(0), 1.7, epsilon = 1e-15);
        assert_abs_diff_eq!(m.column_sum(1), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_conditioning_examples() {
        let t = tol();
        assert!(is_symmetrically_conditioned(&sym07(), &t).unwrap());
        assert!(!is_symmetrically_conditioned(&no_joint(), &t).unwrap());
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let d = ContextData::new([0.3, 0.7], [0.3, 0.7], id, Some(id));
        assert!(is_symmetrically_conditioned(&d, &t).unwrap());

        // transposition matters: a/b row β holds p(α|β)
        let d = ContextData::new(
            [0.5, 0.5],
            [0.5, 0.5],
            [[0.9, 0.1], [0.8, 0.2]],
            Some([[0.9, 0.8], [0.1, 0.2]]),
        );
        assert!(is_symmetrically_conditioned(&d, &t).unwrap());

        let mut d = sym07();
        d.p_a_given_b = None;
        assert!(matches!(
            is_symmetrically_conditioned(&d, &t),
            Err(Error::MissingReverseMatrix)
        ));
    }

    #[test]
    fn kolmogorovian_symmetric_uniform() {
        let k = kolmogorov_test(&sym07(), &tol()).unwrap();
        assert!(k.kolmogorovian);
        let j = k.joint.unwrap();
        let expected = [[0.35, 0.15], [0.15, 0.35]];
        for a in 0..2 {
            for b in 0..2 {
                assert_abs_diff_eq!(j.0[a][b], expected[a][b], epsilon = 1e-15);
            }
        }
        let back = j.to_context().unwrap();
        assert_abs_diff_eq!(back.p_b_given_a.get(0, 0), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(back.p_a_given_b.unwrap().get(1, 0), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn nonsupplementary_but_not_kolmogorovian() {
        let d = no_joint();
        let k = kolmogorov_test(&d, &tol()).unwrap();
        assert!(!k.kolmogorovian);
        assert!(k.joint.is_none());
        assert_abs_diff_eq!(k.max_residual, 0.05, epsilon = 1e-12);
        assert!(is_nonsupplementary(&d, 1e-12).unwrap());
    }

    #[test]
    fn joint_first_contexts_are_kolmogorovian() {
        let j = Joint([[0.1, 0.2], [0.3, 0.4]]);
        let d = j.to_context().unwrap();
        let k = kolmogorov_test(&d, &tol()).unwrap();
        assert!(k.kolmogorovian, "residual {}", k.max_residual);
        for a in 0..2 {
            for b in 0..2 {
                assert_abs_diff_eq!(k.joint.unwrap().0[a][b], j.0[a][b], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn oracle_agrees_on_examples() {
        let t = tol();
        for d in [sym07(), no_joint()] {
            let closed = kolmogorov_test(&d, &t).unwrap().kolmogorovian;
            let brute = brute_force_joint_oracle(&d, ORACLE_GRID_STEP, ORACLE_CONSTRAINT_TOL).unwrap();
            assert_eq!(closed, brute);
        }
        assert!(brute_force_joint_oracle(&sym07(), ORACLE_GRID_STEP, ORACLE_CONSTRAINT_TOL).unwrap());
        assert!(!brute_force_joint_oracle(&no_joint(), ORACLE_GRID_STEP, ORACLE_CONSTRAINT_TOL).unwrap());
    }

    #[test]
    fn degenerate_marginal_consistent_tables() {
        // p_a = (1, 0): the second row of p(b|a) is arbitrary, the joint is
        // [[p_b1, p_b2], [0, 0]].
        let d = ContextData::new(
            [1.0, 0.0],
            [0.3, 0.7],
            [[0.3, 0.7], [0.9, 0.1]],
            Some([[1.0, 0.0], [1.0, 0.0]]),
        );
        let k = kolmogorov_test(&d, &tol()).unwrap();
        assert!(k.kolmogorovian);
        assert!(k.degenerate_marginals);
        assert!(brute_force_joint_oracle(&d, ORACLE_GRID_STEP, ORACLE_CONSTRAINT_TOL).unwrap());

        // same, but p(a|b) claims α2 occurs given β2
        let mut bad = d.clone();
        bad.p_a_given_b = Some(TransitionMatrix::a_given_b([[1.0, 0.0], [0.5, 0.5]]));
        assert!(!kolmogorov_test(&bad, &tol()).unwrap().kolmogorovian);
        assert!(!brute_force_joint_oracle(&bad, ORACLE_GRID_STEP, ORACLE_CONSTRAINT_TOL).unwrap());
    }

    #[test]
    fn symmetric_equivalence_examples() {
        let t = tol();
        let c = check_symmetric_equivalence(&sym07(), &t);
        assert!(c.applies && c.equivalence_holds);
        assert_eq!(c.forced_uniform, Some(true));

        let m = [[0.7, 0.3], [0.3, 0.7]];
        let d = ContextData::new([0.8, 0.2], [0.35, 0.65], m, Some(m));
        let c = check_symmetric_equivalence(&d, &t);
        assert!(c.applies && c.equivalence_holds);
        assert_eq!(c.kolmogorovian, Some(false));
        assert_eq!(c.nonsupplementary, Some(false));
        assert_eq!(c.forced_uniform, None);

        let c = check_symmetric_equivalence(&no_joint(), &t);
        assert!(!c.applies);
    }

    #[test]
    fn joint_equivalence_examples() {
        let t = tol();
        let e = joint_equivalences(&Joint([[0.35, 0.15], [0.15, 0.35]]), &t).unwrap();
        assert!(e.double_stochastic_both && e.uniform_marginals && e.symmetric_conditioning && e.all_equivalent);
        let e = joint_equivalences(&Joint([[0.5, 0.2], [0.1, 0.2]]), &t).unwrap();
        assert!(!e.double_stochastic_both && !e.uniform_marginals && !e.symmetric_conditioning && e.all_equivalent);
        let e = joint_equivalences(&Joint([[0.25, 0.25], [0.25, 0.25]]), &t).unwrap();
        assert!(e.double_stochastic_both && e.uniform_marginals && e.symmetric_conditioning);
        assert!(matches!(
            joint_equivalences(&Joint([[0.5, 0.5], [0.0, 0.0]]), &t),
            Err(Error::ZeroMarginal { observable: "a", index: 1 })
        ));
    }

    #[test]
    fn product_measure_examples() {
        let j = product_measure(&ProbVector::new(0.5, 0.5), &ProbVector::new(0.7, 0.3));
        assert_eq!(j.0, [[0.35, 0.15], [0.35, 0.15]]);
        let j = product_measure(&ProbVector::new(1.0, 0.0), &ProbVector::new(1.0, 0.0));
        assert_eq!(j.0, [[1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn product_measure_need_not_match_supplied_conditionals() {
        let d = no_joint();
        let j = product_measure(&d.p_a, &d.p_b);
        assert_eq!(j.marginal_a(), d.p_a);
        assert_eq!(j.marginal_b(), d.p_b);
        assert!(!kolmogorov_test(&d, &tol()).unwrap().kolmogorovian);
    }

    #[test]
    fn structure_report_fields() {
        let s = structure_report(&no_joint(), &tol());
        assert!(s.stochastic_ba && s.double_stochastic_ba);
        assert_eq!(s.statistically_balanced, Some(true));
        assert_eq!(s.symmetrically_conditioned, Some(false));
        assert_eq!(s.kolmogorovian, Some(false));
        assert!(s.joint.is_none());

        let mut d = no_joint();
        d.p_a_given_b = None;
        let s = structure_report(&d, &tol());
        assert_eq!(s.statistically_balanced, None);
        assert_eq!(s.kolmogorovian, None);
    }
}
