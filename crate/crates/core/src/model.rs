//! Domain types for the probabilistic data of a context: two dichotomous
//! observables, their marginals and the transition matrices between them.
//!
//! Outcomes are indexed positionally (index 0 is the first spectrum label).
//! Every formula in this crate works on indices; labels are only carried
//! along for input and output.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Conditioning direction.
///
/// `BGivenA` is the b/a direction: rows of the matrix are indexed by the
/// outcome of `a`, columns by the outcome of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "b/a")]
    BGivenA,
    #[serde(rename = "a/b")]
    AGivenB,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::BGivenA, Direction::AGivenB];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::BGivenA => "b/a",
            Direction::AGivenB => "a/b",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub spectrum: [String; 2],
    /// Numeric eigenvalues attached to the two outcomes, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<[f64; 2]>,
}

impl Observable {
    pub fn new(name: impl Into<String>, first: impl Into<String>, second: impl Into<String>) -> Self {
        Observable {
            name: name.into(),
            spectrum: [first.into(), second.into()],
            values: None,
        }
    }

    pub fn with_values(mut self, values: [f64; 2]) -> Self {
        self.values = Some(values);
        self
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.spectrum.iter().position(|l| l == label)
    }
}

/// A distribution over the two outcomes of a dichotomous observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(pub [f64; 2]);

impl ProbVector {
    pub fn new(first: f64, second: f64) -> Self {
        ProbVector([first, second])
    }

    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn swapped(&self) -> Self {
        ProbVector([self.0[1], self.0[0]])
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A 2x2 matrix of transition probabilities. Row index is the conditioning
/// outcome, column index the result outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub rows: [[f64; 2]; 2],
    pub orientation: Direction,
}

impl TransitionMatrix {
    pub fn new(rows: [[f64; 2]; 2], orientation: Direction) -> Self {
        TransitionMatrix { rows, orientation }
    }

    pub fn b_given_a(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows, Direction::BGivenA)
    }

    pub fn a_given_b(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows, Direction::AGivenB)
    }

    #[inline]
    pub fn get(&self, condition: usize, result: usize) -> f64 {
        self.rows[condition][result]
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.rows[row][0] + self.rows[row][1]
    }

    pub fn column_sum(&self, col: usize) -> f64 {
        self.rows[0][col] + self.rows[1][col]
    }

    /// The matrix with its result outcomes relabeled (columns swapped).
    pub fn swap_results(&self) -> Self {
        let r = self.rows;
        Self::new([[r[0][1], r[0][0]], [r[1][1], r[1][0]]], self.orientation)
    }

    /// The matrix with its conditioning outcomes relabeled (rows swapped).
    pub fn swap_conditions(&self) -> Self {
        let r = self.rows;
        Self::new([r[1], r[0]], self.orientation)
    }
}

/// The probabilistic data of one context for the pair of reference
/// observables `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextData {
    pub label: String,
    pub a: Observable,
    pub b: Observable,
    pub p_a: ProbVector,
    pub p_b: ProbVector,
    pub p_b_given_a: TransitionMatrix,
    pub p_a_given_b: Option<TransitionMatrix>,
}

impl ContextData {
    /// Builds a context with default observables `a` (a1, a2) and `b` (b1, b2).
    pub fn new(
        p_a: [f64; 2],
        p_b: [f64; 2],
        p_b_given_a: [[f64; 2]; 2],
        p_a_given_b: Option<[[f64; 2]; 2]>,
    ) -> Self {
        ContextData {
            label: String::new(),
            a: Observable::new("a", "a1", "a2"),
            b: Observable::new("b", "b1", "b2"),
            p_a: ProbVector(p_a),
            p_b: ProbVector(p_b),
            p_b_given_a: TransitionMatrix::b_given_a(p_b_given_a),
            p_a_given_b: p_a_given_b.map(TransitionMatrix::a_given_b),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn reverse(&self) -> crate::Result<&TransitionMatrix> {
        self.p_a_given_b
            .as_ref()
            .ok_or(crate::Error::MissingReverseMatrix)
    }

    /// Swaps the two outcomes of `b` everywhere they appear.
    pub fn relabel_b(&self) -> Self {
        let mut out = self.clone();
        out.b.spectrum.swap(0, 1);
        if let Some(v) = out.b.values.as_mut() {
            v.swap(0, 1);
        }
        out.p_b = self.p_b.swapped();
        out.p_b_given_a = self.p_b_given_a.swap_results();
        out.p_a_given_b = self.p_a_given_b.map(|m| m.swap_conditions());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for structural checks on exact tables.
    pub exact_eps: f64,
    /// z-multiplier for tolerances on empirical data.
    pub stat_z: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact_eps: 1e-9,
            stat_z: 4.0,
        }
    }
}

impl Tolerances {
    pub fn new(exact_eps: f64, stat_z: f64) -> crate::Result<Self> {
        if !(exact_eps > 0.0 && exact_eps.is_finite()) {
            return Err(crate::Error::InvalidArgument(format!(
                "exact_eps must be positive, got {exact_eps}"
            )));
        }
        if !(stat_z > 0.0 && stat_z.is_finite()) {
            return Err(crate::Error::InvalidArgument(format!(
                "stat_z must be positive, got {stat_z}"
            )));
        }
        Ok(Tolerances { exact_eps, stat_z })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Dotted name of the violated constraint, e.g. `p_b_given_a.row[0].sum`.
    pub constraint: String,
    pub residual: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn find(&self, constraint: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.constraint == constraint)
    }
}

/// Compact decimal rendering used in violation messages (0.8999999999999999
/// prints as 0.9).
pub(crate) fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Checker<'t> {
    eps: f64,
    out: &'t mut Vec<Violation>,
}

impl Checker<'_> {
    fn entry(&mut self, name: String, x: f64) {
        if !x.is_finite() {
            self.out.push(Violation {
                message: format!("{name} is not a finite number"),
                constraint: name,
                residual: f64::INFINITY,
            });
            return;
        }
        let residual = if x < 0.0 {
            -x
        } else if x > 1.0 {
            x - 1.0
        } else {
            0.0
        };
        if residual > self.eps {
            self.out.push(Violation {
                message: format!("{name} = {} lies outside [0, 1]", fmt_num(x)),
                constraint: name,
                residual,
            });
        }
    }

    fn sum(&mut self, name: String, what: String, s: f64) {
        let residual = (s - 1.0).abs();
        if !(residual <= self.eps) {
            self.out.push(Violation {
                message: format!(
                    "{what} sums to {} (residual {})",
                    fmt_num(s),
                    fmt_num(residual)
                ),
                constraint: name,
                residual,
            });
        }
    }

    fn vector(&mut self, field: &str, v: &ProbVector) {
        for i in 0..2 {
            self.entry(format!("{field}[{i}]"), v.0[i]);
        }
        self.sum(format!("{field}.sum"), field.to_string(), v.sum());
    }

    fn matrix(&mut self, field: &str, m: &TransitionMatrix, expected: Direction) {
        if m.orientation != expected {
            self.out.push(Violation {
                constraint: format!("{field}.orientation"),
                residual: 1.0,
                message: format!(
                    "{field} is stored with orientation {} but must be {}",
                    m.orientation, expected
                ),
            });
        }
        for i in 0..2 {
            for j in 0..2 {
                self.entry(format!("{field}[{i}][{j}]"), m.rows[i][j]);
            }
            self.sum(
                format!("{field}.row[{i}].sum"),
                format!("{field} row {i}"),
                m.row_sum(i),
            );
        }
    }

    fn observable(&mut self, field: &str, o: &Observable) {
        if o.spectrum[0] == o.spectrum[1] {
            self.out.push(Violation {
                constraint: format!("{field}.spectrum"),
                residual: 1.0,
                message: format!(
                    "{field} spectrum labels must be distinct, both are {:?}",
                    o.spectrum[0]
                ),
            });
        }
    }
}

/// Checks every structural invariant of a context. Violations are returned
/// as data; an empty report means the context is valid within
/// `tol.exact_eps`.
pub fn validate_context(data: &ContextData, tol: &Tolerances) -> ValidationReport {
    let mut violations = Vec::new();
    let mut c = Checker {
        eps: tol.exact_eps,
        out: &mut violations,
    };
    c.observable("a", &data.a);
    c.observable("b", &data.b);
    c.vector("p_a", &data.p_a);
    c.vector("p_b", &data.p_b);
    c.matrix("p_b_given_a", &data.p_b_given_a, Direction::BGivenA);
    if let Some(m) = &data.p_a_given_b {
        c.matrix("p_a_given_b", m, Direction::AGivenB);
    }
    violations.sort_by(|x, y| x.constraint.cmp(&y.constraint));
    ValidationReport { violations }
}

/// Which parts of a context are free of zero probabilities. `a_given_b` is
/// `None` ("unknown") when the reverse matrix is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub a_marginal: bool,
    pub b_marginal: bool,
    pub b_given_a: bool,
    pub a_given_b: Option<bool>,
}

impl Nondegeneracy {
    /// Both observables nondegenerate and the context nondegenerate for
    /// both of them.
    pub fn fully_nondegenerate(&self) -> bool {
        self.a_marginal && self.b_marginal && self.b_given_a && self.a_given_b == Some(true)
    }
}

pub fn is_nondegenerate(data: &ContextData, tol: &Tolerances) -> Nondegeneracy {
    let positive = |x: f64| x > tol.exact_eps;
    let matrix_positive = |m: &TransitionMatrix| m.rows.iter().flatten().all(|&x| positive(x));
    Nondegeneracy {
        a_marginal: data.p_a.0.iter().all(|&x| positive(x)),
        b_marginal: data.p_b.0.iter().all(|&x| positive(x)),
        b_given_a: matrix_positive(&data.p_b_given_a),
        a_given_b: data.p_a_given_b.as_ref().map(matrix_positive),
    }
}
