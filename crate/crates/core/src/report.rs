//! Reports emitted by the command-line tool, and a text rendering derived
//! from their JSON form.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::frequency::density::CounterexampleReport;
use crate::frequency::simulate::{CoefficientEstimate, EmpiricalContext, EntryTolerances};
use crate::frequency::{estimate_frequencies, ContextStreams};
use crate::hilbert::{build_hilbert_rep, HilbertRep, DEFAULT_VALUES};
use crate::kolmogorov::{structure_report, StructureReport};
use crate::model::{
    is_nondegenerate, validate_context, ContextData, Direction, Nondegeneracy, Tolerances, ValidationReport,
};
use crate::supplementarity::{classify_context, delta, lambda_coeff, ClassificationReport, ContextClass};
use crate::Result;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
}

impl Provenance {
    pub fn new(input: &[u8], seed: Option<u64>, tolerances: Tolerances) -> Self {
        Provenance {
            input_sha256: sha256_hex(input),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            tolerances,
        }
    }
}

/// Everything `analyze` computes for one context. The analysis sections
/// are empty when validation fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub context_label: String,
    pub validation: ValidationReport,
    pub nondegeneracy: Option<Nondegeneracy>,
    pub structure: Option<StructureReport>,
    pub classification: Option<ClassificationReport>,
    pub hilbert: Option<HilbertRep>,
    pub provenance: Provenance,
}

/// Validation, structural tests, classification and, for trigonometric
/// nondegenerate contexts, the Hilbert representation.
pub fn analyze(data: &ContextData, input: &[u8], tol: &Tolerances) -> Result<AnalysisReport> {
    let validation = validate_context(data, tol);
    let provenance = Provenance::new(input, None, *tol);
    if !validation.is_valid() {
        return Ok(AnalysisReport {
            context_label: data.label.clone(),
            validation,
            nondegeneracy: None,
            structure: None,
            classification: None,
            hilbert: None,
            provenance,
        });
    }
    let nondegeneracy = is_nondegenerate(data, tol);
    let classification = classify_context(data, tol);
    let hilbert = if wants_hilbert(&classification, &nondegeneracy) {
        Some(build_hilbert_rep(
            data,
            data.a.values.unwrap_or(DEFAULT_VALUES),
            data.b.values.unwrap_or(DEFAULT_VALUES),
            tol,
        )?)
    } else {
        None
    };
    Ok(AnalysisReport {
        context_label: data.label.clone(),
        validation,
        nondegeneracy: Some(nondegeneracy),
        structure: Some(structure_report(data, tol)),
        classification: Some(classification),
        hilbert,
        provenance,
    })
}

fn wants_hilbert(c: &ClassificationReport, n: &Nondegeneracy) -> bool {
    c.context_class == ContextClass::Trigonometric && n.a_marginal && n.b_given_a
}

impl AnalysisReport {
    /// Structural promises of the report. An empty list is expected; any
    /// entry points at a bug.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        let p = &self.provenance;
        if p.input_sha256.len() != 64 || !p.input_sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
            out.push(format!("input hash {:?} is not a SHA-256 digest", p.input_sha256));
        }
        if p.tool_version.is_empty() {
            out.push("tool version is empty".into());
        }
        let sections = [
            self.nondegeneracy.is_some(),
            self.structure.is_some(),
            self.classification.is_some(),
        ];
        let valid = self.validation.is_valid();
        if sections.iter().any(|&s| s != valid) {
            out.push(format!("analysis sections {sections:?} disagree with validity {valid}"));
        }
        let expect_hilbert = match (&self.classification, &self.nondegeneracy) {
            (Some(c), Some(n)) => wants_hilbert(c, n),
            _ => false,
        };
        if self.hilbert.is_some() != expect_hilbert {
            out.push(format!(
                "hilbert section present = {}, expected {expect_hilbert}",
                self.hilbert.is_some()
            ));
        }
        if let Some(h) = &self.hilbert {
            if !((h.norm_sqr - 1.0).abs() < 1e-6) {
                out.push(format!("amplitude has squared norm {}", h.norm_sqr));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub entry: String,
    pub generating: f64,
    pub recovered: f64,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub direction: Direction,
    pub outcome: usize,
    pub generating_delta: f64,
    pub generating_lambda: Option<f64>,
    pub recovered: CoefficientEstimate,
    /// `|recovered λ − generating λ| ≤ tolerance`, when both are defined.
    pub lambda_within: Option<bool>,
    pub delta_within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub file: String,
    pub source: String,
    pub observable: String,
    pub length: usize,
    pub frequencies: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub context_label: String,
    pub n: usize,
    pub streams: Vec<StreamSummary>,
    pub entries: Vec<EntryCheck>,
    pub coefficients: Vec<CoefficientCheck>,
    pub tolerances: EntryTolerances,
    pub provenance: Provenance,
}

pub fn stream_file_name(source: &crate::frequency::StreamSource) -> String {
    format!("{}.csv", source.tag())
}

/// Compares the generating context with the one estimated from its
/// streams.
pub fn recovery_report(
    generating: &ContextData,
    streams: &ContextStreams,
    recovered: &EmpiricalContext,
    input: &[u8],
    seed: u64,
    tol: &Tolerances,
) -> Result<RecoveryReport> {
    let est = &recovered.data;
    let t = &recovered.tolerances;
    let mut entries = Vec::new();
    let mut push = |entry: String, g: f64, r: f64, tolerance: f64| {
        entries.push(EntryCheck {
            entry,
            generating: g,
            recovered: r,
            tolerance,
            within: (g - r).abs() <= tolerance,
        });
    };
    for i in 0..2 {
        push(format!("p_a[{i}]"), generating.p_a[i], est.p_a[i], t.p_a[i]);
    }
    for i in 0..2 {
        push(format!("p_b[{i}]"), generating.p_b[i], est.p_b[i], t.p_b[i]);
    }
    for r in 0..2 {
        for c in 0..2 {
            push(
                format!("p_b_given_a[{r}][{c}]"),
                generating.p_b_given_a.get(r, c),
                est.p_b_given_a.get(r, c),
                t.p_b_given_a[r][c],
            );
        }
    }
    if let (Some(g), Some(e), Some(tt)) = (&generating.p_a_given_b, &est.p_a_given_b, &t.p_a_given_b) {
        for r in 0..2 {
            for c in 0..2 {
                push(format!("p_a_given_b[{r}][{c}]"), g.get(r, c), e.get(r, c), tt[r][c]);
            }
        }
    }

    let mut coefficients = Vec::new();
    for c in &recovered.coefficients {
        let generating_delta = delta(generating, c.direction, c.outcome)?;
        let generating_lambda = lambda_coeff(generating, c.direction, c.outcome)?;
        let lambda_within = match (generating_lambda, c.lambda, c.lambda_tolerance) {
            (Some(g), Some(r), Some(t)) => Some((g - r).abs() <= t),
            _ => None,
        };
        coefficients.push(CoefficientCheck {
            direction: c.direction,
            outcome: c.outcome,
            generating_delta,
            generating_lambda,
            lambda_within,
            delta_within: (generating_delta - c.delta).abs() <= c.delta_tolerance,
            recovered: *c,
        });
    }

    let n = streams.x.len();
    let streams = streams
        .iter()
        .map(|s| StreamSummary {
            file: stream_file_name(&s.source),
            source: s.source.tag(),
            observable: s.observable.clone(),
            length: s.len(),
            frequencies: estimate_frequencies(s),
        })
        .collect();

    Ok(RecoveryReport {
        context_label: generating.label.clone(),
        n,
        streams,
        entries,
        coefficients,
        tolerances: t.clone(),
        provenance: Provenance::new(input, Some(seed), *tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDemoReport {
    pub counterexample: CounterexampleReport,
    pub tool_version: String,
}

impl DensityDemoReport {
    pub fn new(counterexample: CounterexampleReport) -> Self {
        DensityDemoReport {
            counterexample,
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

/// Plain-text rendering of any JSON report. Numbers are printed exactly as
/// in the JSON form; arrays of flat objects become tables.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    render_into(&mut out, value, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        Value::Object(_) => None,
    }
}

fn flat_table(items: &[Value]) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let first = items.first()?.as_object()?;
    let columns: Vec<String> = first.keys().cloned().collect();
    let mut rows = Vec::with_capacity(items.len());
    for item in items {
        let obj = item.as_object()?;
        if obj.len() != columns.len() {
            return None;
        }
        let row: Option<Vec<String>> = columns.iter().map(|c| obj.get(c).and_then(scalar)).collect();
        rows.push(row?);
    }
    Some((columns, rows))
}

fn render_into(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                if let Some(s) = scalar(v) {
                    out.push_str(&format!("{pad}{key}: {s}\n"));
                } else {
                    out.push_str(&format!("{pad}{key}:\n"));
                    render_into(out, v, indent + 1);
                }
            }
        }
        Value::Array(items) => {
            if let Some((columns, rows)) = flat_table(items) {
                let widths: Vec<usize> = columns
                    .iter()
                    .enumerate()
                    .map(|(i, c)| rows.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                    .collect();
                let line = |cells: &[String]| {
                    let joined: Vec<String> = cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect();
                    format!("{pad}{}\n", joined.join("  ").trim_end())
                };
                out.push_str(&line(&columns));
                for r in &rows {
                    out.push_str(&line(r));
                }
            } else {
                for (i, item) in items.iter().enumerate() {
                    match scalar(item) {
                        Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}[{i}]\n"));
                            render_into(out, item, indent + 1);
                        }
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
