//! Complex Hilbert-space representation of a trigonometric context.
//!
//! With `A = p_a(α1)·p(β|α1)`, `B = p_a(α2)·p(β|α2)` and `λ(β) = cos θ(β)`
//! the interference formula reads `p_b(β) = A + B + 2·sqrt(AB)·cos θ`,
//! which equals `|sqrt(A) + e^{iθ}·sqrt(B)|²`. That amplitude, taken over
//! the two outcomes of `b`, is the state `ψ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kolmogorov::is_double_stochastic;
use crate::model::{ContextData, Direction, Tolerances, TransitionMatrix};
use crate::supplementarity::{lambda_coeff, LAMBDA_BOUNDARY_SLACK};
use crate::{Error, Result};

pub type CVector = [Complex64; 2];
pub type CMatrix = [[Complex64; 2]; 2];

/// Tolerance on `θ2 − θ1 ≡ π (mod 2π)`.
pub const PHASE_CONSTRAINT_TOL: f64 = 1e-9;

/// The phases used to build an amplitude: `theta[β] = sign[β]·principal[β]`
/// with `principal[β] = arccos λ(β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseChoice {
    pub principal: [f64; 2],
    pub sign: [i8; 2],
    pub theta: [f64; 2],
}

impl PhaseChoice {
    pub fn new(principal: [f64; 2], sign: [i8; 2]) -> Self {
        PhaseChoice {
            principal,
            sign,
            theta: [
                f64::from(sign[0]) * principal[0],
                f64::from(sign[1]) * principal[1],
            ],
        }
    }

    /// Arbitrary phases, recorded with a `+` sign.
    pub fn raw(theta: [f64; 2]) -> Self {
        PhaseChoice {
            principal: theta,
            sign: [1, 1],
            theta,
        }
    }

    /// Every phase negated.
    pub fn conjugate(&self) -> Self {
        PhaseChoice {
            principal: self.principal,
            sign: [-self.sign[0], -self.sign[1]],
            theta: [-self.theta[0], -self.theta[1]],
        }
    }

    /// `θ2 − θ1 ≡ π (mod 2π)` within `PHASE_CONSTRAINT_TOL`.
    pub fn opposed(&self) -> bool {
        let d = (self.theta[1] - self.theta[0] - std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
        d.min(std::f64::consts::TAU - d) <= PHASE_CONSTRAINT_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub values: CVector,
    pub phase_choice: PhaseChoice,
}

impl ComplexAmplitude {
    pub fn probabilities(&self) -> [f64; 2] {
        self.values.map(|z| z.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        inner_product(&self.values, &self.values).re
    }
}

/// `(u, v) = Σ u(β)·conj(v(β))`.
pub fn inner_product(u: &CVector, v: &CVector) -> Complex64 {
    u[0] * v[0].conj() + u[1] * v[1].conj()
}

fn check_trigonometric(data: &ContextData) -> Result<[f64; 2]> {
    let mut lambdas = [0.0; 2];
    for (outcome, slot) in lambdas.iter_mut().enumerate() {
        let l = lambda_coeff(data, Direction::BGivenA, outcome)?
            .ok_or(Error::DegenerateContext { direction: Direction::BGivenA, outcome })?;
        if l.abs() > 1.0 + LAMBDA_BOUNDARY_SLACK {
            return Err(Error::NotTrigonometric {
                reason: format!("|lambda(b{})| = {} exceeds 1", outcome + 1, l.abs()),
            });
        }
        *slot = l.clamp(-1.0, 1.0);
    }
    Ok(lambdas)
}

/// Phase selection: `θ1 = +arccos λ(β1)`. When `p(b|a)` is double stochastic
/// `λ(β2) = −λ(β1)` and `θ2 = θ1 − π = −arccos λ(β2)`, which makes the
/// a-basis orthonormal. Otherwise `θ2 = +arccos λ(β2)`.
pub fn select_phases(data: &ContextData, tol: &Tolerances) -> Result<PhaseChoice> {
    let lambdas = check_trigonometric(data)?;
    let principal = lambdas.map(f64::acos);
    let sign = if is_double_stochastic(&data.p_b_given_a, tol) {
        [1, -1]
    } else {
        [1, 1]
    };
    Ok(PhaseChoice::new(principal, sign))
}

/// `ψ(β) = sqrt(p_a(α1)·p(β|α1)) + e^{iθ(β)}·sqrt(p_a(α2)·p(β|α2))` for
/// the given phases. No precondition: the Born rule only holds when the
/// phases come from the context's own λ.
pub fn amplitude_with_phases(data: &ContextData, phases: &PhaseChoice) -> ComplexAmplitude {
    let m = &data.p_b_given_a;
    let values = [0, 1].map(|beta| {
        let first = (data.p_a[0] * m.get(0, beta)).sqrt();
        let second = (data.p_a[1] * m.get(1, beta)).sqrt();
        Complex64::new(first, 0.0) + Complex64::from_polar(second, phases.theta[beta])
    });
    ComplexAmplitude {
        values,
        phase_choice: *phases,
    }
}

pub fn build_amplitude(data: &ContextData, tol: &Tolerances) -> Result<ComplexAmplitude> {
    let phases = select_phases(data, tol)?;
    Ok(amplitude_with_phases(data, &phases))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ABasis {
    pub e1: CVector,
    pub e2: CVector,
    pub orthonormal: bool,
}

impl ABasis {
    pub fn vectors(&self) -> [CVector; 2] {
        [self.e1, self.e2]
    }

    /// Max-abs deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let v = self.vectors();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner_product(&v[i], &v[j]) - target).norm());
            }
        }
        worst
    }
}

/// `e1 = (u11, u12)`, `e2 = (e^{iθ1}·u21, e^{iθ2}·u22)` with
/// `u_ij = sqrt(p(β_j|α_i))`.
///
/// The basis is orthonormal iff the matrix is double stochastic and the
/// cross term `u11·u21·e^{-iθ1} + u12·u22·e^{-iθ2}` vanishes, which for a
/// double stochastic matrix means `θ2 − θ1 ≡ π` unless both products are
/// zero (a permutation matrix, where the phases play no role).
pub fn a_basis_with_phases(m: &TransitionMatrix, phases: &PhaseChoice, tol: &Tolerances) -> ABasis {
    let u = m.rows.map(|row| row.map(f64::sqrt));
    let e1 = [Complex64::new(u[0][0], 0.0), Complex64::new(u[0][1], 0.0)];
    let e2 = [
        Complex64::from_polar(u[1][0], phases.theta[0]),
        Complex64::from_polar(u[1][1], phases.theta[1]),
    ];
    let cross_free = u[0][0] * u[1][0] <= tol.exact_eps && u[0][1] * u[1][1] <= tol.exact_eps;
    let orthonormal = is_double_stochastic(m, tol) && (phases.opposed() || cross_free);
    ABasis { e1, e2, orthonormal }
}

/// The a-basis under the phase selection policy. Requires a trigonometric
/// context.
pub fn build_a_basis(data: &ContextData, tol: &Tolerances) -> Result<(ABasis, PhaseChoice)> {
    let phases = select_phases(data, tol)?;
    Ok((a_basis_with_phases(&data.p_b_given_a, &phases, tol), phases))
}

fn scale(z: f64, v: &CVector) -> CVector {
    [v[0] * z, v[1] * z]
}

/// `‖ψ − (sqrt(p_a(α1))·e1 + sqrt(p_a(α2))·e2)‖`.
pub fn decompose_in_a_basis(psi: &ComplexAmplitude, basis: &ABasis, p_a: &crate::model::ProbVector) -> f64 {
    let c1 = scale(p_a[0].sqrt(), &basis.e1);
    let c2 = scale(p_a[1].sqrt(), &basis.e2);
    let diff = [
        psi.values[0] - c1[0] - c2[0],
        psi.values[1] - c1[1] - c2[1],
    ];
    inner_product(&diff, &diff).re.sqrt()
}

/// `| |(ψ, e_α)|² − p_a(α) |` for both outcomes of `a`.
pub fn born_check_a(psi: &ComplexAmplitude, basis: &ABasis, p_a: &crate::model::ProbVector) -> Result<[f64; 2]> {
    if !basis.orthonormal {
        return Err(Error::BasisNotOrthonormal);
    }
    let v = basis.vectors();
    Ok([0, 1].map(|alpha| (inner_product(&psi.values, &v[alpha]).norm_sqr() - p_a[alpha]).abs()))
}

/// `| |ψ(β)|² − p_b(β) |` for both outcomes of `b`.
pub fn born_check_b(psi: &ComplexAmplitude, p_b: &crate::model::ProbVector) -> [f64; 2] {
    [0, 1].map(|beta| (psi.values[beta].norm_sqr() - p_b[beta]).abs())
}

fn apply(m: &CMatrix, v: &CVector) -> CVector {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// `Σ_k value_k·|e_k⟩⟨e_k|`.
fn spectral_sum(values: [f64; 2], vectors: [CVector; 2]) -> CMatrix {
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += vectors[k][i] * vectors[k][j].conj() * values[k];
            }
        }
    }
    m
}

pub fn self_adjoint_residual(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    /// `Σ value·p(outcome)`.
    pub classical: f64,
    /// `(Ôψ, ψ)`; real for a self-adjoint operator.
    pub quadratic_form: f64,
    pub difference: f64,
}

impl Expectation {
    fn new(classical: f64, op: &CMatrix, psi: &CVector) -> Self {
        let quadratic_form = inner_product(&apply(op, psi), psi).re;
        Expectation {
            classical,
            quadratic_form,
            difference: (quadratic_form - classical).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operators {
    pub op_b: CMatrix,
    pub op_a: Option<CMatrix>,
    pub b_values: [f64; 2],
    pub a_values: [f64; 2],
    pub expectation_b: Expectation,
    pub expectation_a: Option<Expectation>,
    pub op_a_self_adjoint_residual: Option<f64>,
}

/// Eigenvalues used when the observables carry none.
pub const DEFAULT_VALUES: [f64; 2] = [1.0, -1.0];

/// `b̂` is diagonal in the delta basis; `â` is the spectral sum over the
/// a-basis and only exists when that basis is orthonormal.
pub fn build_operators(
    psi: &ComplexAmplitude,
    basis: &ABasis,
    data: &ContextData,
    a_values: [f64; 2],
    b_values: [f64; 2],
) -> Operators {
    let zero = Complex64::new(0.0, 0.0);
    let op_b = [
        [Complex64::new(b_values[0], 0.0), zero],
        [zero, Complex64::new(b_values[1], 0.0)],
    ];
    let classical_b = b_values[0] * data.p_b[0] + b_values[1] * data.p_b[1];
    let expectation_b = Expectation::new(classical_b, &op_b, &psi.values);

    let op_a = basis.orthonormal.then(|| spectral_sum(a_values, basis.vectors()));
    let expectation_a = op_a.as_ref().map(|op| {
        let classical = a_values[0] * data.p_a[0] + a_values[1] * data.p_a[1];
        Expectation::new(classical, op, &psi.values)
    });
    Operators {
        op_b,
        op_a,
        b_values,
        a_values,
        expectation_b,
        expectation_a,
        op_a_self_adjoint_residual: op_a.as_ref().map(self_adjoint_residual),
    }
}

/// The full representation together with every residual that certifies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertRep {
    pub psi: ComplexAmplitude,
    pub b_basis: [CVector; 2],
    pub a_basis: ABasis,
    pub a_basis_gram_deviation: f64,
    pub norm_sqr: f64,
    pub born_residuals_b: [f64; 2],
    pub born_residuals_a: Option<[f64; 2]>,
    pub decomposition_residual: f64,
    pub operators: Operators,
}

pub fn build_hilbert_rep(
    data: &ContextData,
    a_values: [f64; 2],
    b_values: [f64; 2],
    tol: &Tolerances,
) -> Result<HilbertRep> {
    let psi = build_amplitude(data, tol)?;
    let a_basis = a_basis_with_phases(&data.p_b_given_a, &psi.phase_choice, tol);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(HilbertRep {
        b_basis: [[one, zero], [zero, one]],
        a_basis_gram_deviation: a_basis.gram_deviation(),
        norm_sqr: psi.norm_sqr(),
        born_residuals_b: born_check_b(&psi, &data.p_b),
        born_residuals_a: born_check_a(&psi, &a_basis, &data.p_a).ok(),
        decomposition_residual: decompose_in_a_basis(&psi, &a_basis, &data.p_a),
        operators: build_operators(&psi, &a_basis, data, a_values, b_values),
        psi,
        a_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn delta_fixture() -> ContextData {
        ContextData::new([0.5, 0.5], [0.7, 0.3], [[0.5, 0.5], [0.5, 0.5]], None)
    }

    fn uniform() -> ContextData {
        ContextData::new([0.5, 0.5], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], None)
    }

    #[test]
    fn amplitude_delta_fixture() {
        let psi = build_amplitude(&delta_fixture(), &tol()).unwrap();
        // 0.5 + 0.5·e^{iθ}, cos θ = 0.4: re = 0.7, im = 0.5·sqrt(0.84)
        assert_abs_diff_eq!(psi.values[0].re, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.values[0].im, 0.5 * 0.84f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(psi.values[0].im, 0.458_258, epsilon = 1e-6);
        assert_abs_diff_eq!(psi.values[0].norm_sqr(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.values[1].norm_sqr(), 0.3, epsilon = 1e-12);
        assert_eq!(psi.phase_choice.sign, [1, -1]);
        assert!(psi.phase_choice.opposed());
    }

    #[test]
    fn amplitude_uniform_fixture() {
        let psi = build_amplitude(&uniform(), &tol()).unwrap();
        assert_abs_diff_eq!(psi.phase_choice.theta[0], FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.values[0].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.values[0].im, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.values[0].norm_sqr(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn amplitude_boundary_lambda_one() {
        let d = ContextData::new([0.5, 0.5], [0.5, 0.5], [[0.25, 0.75], [0.25, 0.75]], None);
        let psi = build_amplitude(&d, &tol()).unwrap();
        assert_eq!(psi.phase_choice.theta[0], 0.0);
        assert_abs_diff_eq!(psi.values[0].re, 2.0 * 0.125f64.sqrt(), epsilon = 1e-15);
        assert_eq!(psi.values[0].im, 0.0);
    }

    #[test]
    fn amplitude_preconditions() {
        let mixed = ContextData::new([0.5, 0.5], [0.5, 0.5], [[0.98, 0.02], [0.98, 0.02]], None);
        assert!(matches!(build_amplitude(&mixed, &tol()), Err(Error::NotTrigonometric { .. })));
        let degenerate = ContextData::new([0.5, 0.5], [0.7, 0.3], [[1.0, 0.0], [0.5, 0.5]], None);
        assert!(matches!(build_amplitude(&degenerate, &tol()), Err(Error::DegenerateContext { .. })));
    }

    #[test]
    fn inner_product_examples() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(inner_product(&[one, zero], &[zero, one]), zero);
        assert_eq!(inner_product(&[one, i], &[one, i]), Complex64::new(2.0, 0.0));
        // conjugate on the second argument
        assert_eq!(inner_product(&[one, zero], &[i, zero]), -i);
        let psi = build_amplitude(&delta_fixture(), &tol()).unwrap();
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn a_basis_orthonormal_for_uniform_matrix() {
        let (basis, phases) = build_a_basis(&delta_fixture(), &tol()).unwrap();
        assert_abs_diff_eq!(phases.theta[1], phases.theta[0] - PI, epsilon = 1e-15);
        assert!(basis.orthonormal);
        assert!(inner_product(&basis.e1, &basis.e2).norm() < 1e-12);
        assert!(basis.gram_deviation() < 1e-12);
    }

    #[test]
    fn a_basis_not_orthonormal_without_double_stochasticity() {
        let m = TransitionMatrix::b_given_a([[0.9, 0.1], [0.8, 0.2]]);
        let basis = a_basis_with_phases(&m, &PhaseChoice::raw([0.3, 0.3 - PI]), &tol());
        assert!(!basis.orthonormal);
        assert!(basis.gram_deviation() > 1e-3);
    }

    #[test]
    fn identity_matrix_basis_is_canonical() {
        let m = TransitionMatrix::b_given_a([[1.0, 0.0], [0.0, 1.0]]);
        for theta in [[0.0, 0.0], [0.4, 2.0], [1.0, 1.0 - PI]] {
            let basis = a_basis_with_phases(&m, &PhaseChoice::raw(theta), &tol());
            assert!(basis.orthonormal);
            assert!(basis.gram_deviation() < 1e-15);
            assert_eq!(basis.e1, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
            assert_abs_diff_eq!(basis.e2[1].norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn decomposition_residuals() {
        for d in [delta_fixture(), uniform()] {
            let (basis, phases) = build_a_basis(&d, &tol()).unwrap();
            let psi = amplitude_with_phases(&d, &phases);
            assert!(decompose_in_a_basis(&psi, &basis, &d.p_a) < 1e-12);
        }
        // the decomposition is an identity for whatever phases build both
        // ψ and the basis; mixing two phase choices breaks it
        let d = delta_fixture();
        let phases = select_phases(&d, &tol()).unwrap();
        let equal = PhaseChoice::raw([phases.theta[0], phases.theta[0]]);
        let psi = amplitude_with_phases(&d, &phases);
        let basis = a_basis_with_phases(&d.p_b_given_a, &equal, &tol());
        assert!(decompose_in_a_basis(&psi, &basis, &d.p_a) > 1e-3);
    }

    #[test]
    fn born_rule_for_a() {
        let d = delta_fixture();
        let (basis, phases) = build_a_basis(&d, &tol()).unwrap();
        let psi = amplitude_with_phases(&d, &phases);
        let r = born_check_a(&psi, &basis, &d.p_a).unwrap();
        assert!(r[0] < 1e-10 && r[1] < 1e-10);

        let u = uniform();
        let (basis, phases) = build_a_basis(&u, &tol()).unwrap();
        let psi = amplitude_with_phases(&u, &phases);
        let p = inner_product(&psi.values, &basis.e1).norm_sqr();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);

        let bad = a_basis_with_phases(
            &TransitionMatrix::b_given_a([[0.9, 0.1], [0.8, 0.2]]),
            &PhaseChoice::raw([0.0, 0.0]),
            &tol(),
        );
        assert!(matches!(born_check_a(&psi, &bad, &u.p_a), Err(Error::BasisNotOrthonormal)));
    }

    #[test]
    fn operators_and_expectations() {
        let d = delta_fixture();
        let rep = build_hilbert_rep(&d, DEFAULT_VALUES, DEFAULT_VALUES, &tol()).unwrap();
        let ops = &rep.operators;
        assert_abs_diff_eq!(ops.expectation_b.classical, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.expectation_b.quadratic_form, 0.4, epsilon = 1e-12);
        let ea = ops.expectation_a.unwrap();
        assert_abs_diff_eq!(ea.classical, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ea.quadratic_form, 0.0, epsilon = 1e-12);
        assert!(ops.op_a_self_adjoint_residual.unwrap() < 1e-12);
        assert_eq!(ops.op_b[0][1], Complex64::new(0.0, 0.0));
        assert_eq!(ops.op_b[1][1], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn non_double_stochastic_has_no_a_operator() {
        // trigonometric, but columns of p(b|a) do not sum to 1
        let p_a = [0.4, 0.6];
        let m = [[0.6, 0.4], [0.3, 0.7]];
        let p_b0 = 0.4 * 0.6 + 0.6 * 0.3 + 0.1;
        let d = ContextData::new(p_a, [p_b0, 1.0 - p_b0], m, None);
        let rep = build_hilbert_rep(&d, DEFAULT_VALUES, DEFAULT_VALUES, &tol()).unwrap();
        assert!(!rep.a_basis.orthonormal);
        assert!(rep.operators.op_a.is_none());
        assert!(rep.born_residuals_a.is_none());
        assert!(rep.born_residuals_b.iter().all(|&r| r < 1e-12));
        assert_eq!(rep.psi.phase_choice.sign, [1, 1]);
    }

    #[test]
    fn conjugate_phases_conjugate_psi() {
        let d = delta_fixture();
        let psi = build_amplitude(&d, &tol()).unwrap();
        let flipped = amplitude_with_phases(&d, &psi.phase_choice.conjugate());
        for beta in 0..2 {
            assert_abs_diff_eq!(flipped.values[beta].re, psi.values[beta].re, epsilon = 1e-15);
            assert_abs_diff_eq!(flipped.values[beta].im, -psi.values[beta].im, epsilon = 1e-15);
        }
    }

    #[test]
    fn phase_constraint_modulo_two_pi() {
        assert!(PhaseChoice::raw([0.2, 0.2 + PI]).opposed());
        assert!(PhaseChoice::raw([0.2, 0.2 - PI]).opposed());
        assert!(PhaseChoice::raw([0.2, 0.2 + 3.0 * PI]).opposed());
        assert!(!PhaseChoice::raw([0.2, 0.2]).opposed());
    }
}
