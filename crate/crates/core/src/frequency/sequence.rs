use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which of the six observation streams of a context a sequence realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StreamSource {
    /// `b` observed under the context itself.
    X,
    /// `a` observed under the context itself.
    Y,
    /// `b` observed after selecting `a` = outcome.
    XGivenA(usize),
    /// `a` observed after selecting `b` = outcome.
    YGivenB(usize),
    /// A stream that does not come from a context simulation.
    Other,
}

impl StreamSource {
    pub const ALL: [StreamSource; 6] = [
        StreamSource::X,
        StreamSource::Y,
        StreamSource::XGivenA(0),
        StreamSource::XGivenA(1),
        StreamSource::YGivenB(0),
        StreamSource::YGivenB(1),
    ];

    pub fn tag(&self) -> String {
        match self {
            StreamSource::X => "x".into(),
            StreamSource::Y => "y".into(),
            StreamSource::XGivenA(i) => format!("x_alpha{}", i + 1),
            StreamSource::YGivenB(i) => format!("y_beta{}", i + 1),
            StreamSource::Other => "other".into(),
        }
    }
}

impl fmt::Display for StreamSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for StreamSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let indexed = |rest: &str| match rest {
            "1" => Some(0),
            "2" => Some(1),
            _ => None,
        };
        let parsed = match s {
            "x" => Some(StreamSource::X),
            "y" => Some(StreamSource::Y),
            "other" => Some(StreamSource::Other),
            _ => {
                if let Some(rest) = s.strip_prefix("x_alpha") {
                    indexed(rest).map(StreamSource::XGivenA)
                } else if let Some(rest) = s.strip_prefix("y_beta") {
                    indexed(rest).map(StreamSource::YGivenB)
                } else {
                    None
                }
            }
        };
        parsed.ok_or_else(|| Error::InvalidArgument(format!("unknown stream source {s:?}")))
    }
}

impl From<StreamSource> for String {
    fn from(s: StreamSource) -> String {
        s.tag()
    }
}

impl TryFrom<String> for StreamSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A finite realization of an observation sequence over a two-letter
/// alphabet. Outcomes are stored as spectrum indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SSequence {
    pub observable: String,
    pub labels: [String; 2],
    pub source: StreamSource,
    pub seed: Option<u64>,
    pub outcomes: Vec<u8>,
}

impl SSequence {
    pub fn new(
        observable: impl Into<String>,
        labels: [String; 2],
        source: StreamSource,
        outcomes: Vec<u8>,
    ) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidArgument("a sequence needs at least one outcome".into()));
        }
        if labels[0] == labels[1] {
            return Err(Error::InvalidArgument(format!(
                "sequence labels must be distinct, both are {:?}",
                labels[0]
            )));
        }
        if let Some(bad) = outcomes.iter().find(|&&o| o > 1) {
            return Err(Error::InvalidArgument(format!("outcome index {bad} is not 0 or 1")));
        }
        Ok(SSequence {
            observable: observable.into(),
            labels,
            source,
            seed: None,
            outcomes,
        })
    }

    /// A sequence from indicator values; `true` maps to the first label.
    pub fn from_indicator(
        observable: impl Into<String>,
        labels: [String; 2],
        source: StreamSource,
        hits: impl IntoIterator<Item = bool>,
    ) -> Result<Self> {
        let outcomes = hits.into_iter().map(|h| if h { 0 } else { 1 }).collect();
        Self::new(observable, labels, source, outcomes)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn count(&self, outcome: u8) -> usize {
        self.outcomes.iter().filter(|&&o| o == outcome).count()
    }
}

/// Relative frequencies `ν_N` of both outcomes over the whole sequence.
/// The second entry is the complement of the first, so the pair sums to
/// exactly 1.
pub fn estimate_frequencies(s: &SSequence) -> [f64; 2] {
    let first = s.count(0) as f64 / s.len() as f64;
    [first, 1.0 - first]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    /// Frequency of the first outcome among the first `n` observations.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationDiagnostic {
    pub checkpoints: Vec<Checkpoint>,
    pub n_min: u64,
    /// `max |ν_N − ν_M|` over checkpoints with `N, M ≥ n_min`.
    pub max_late_gap: f64,
    pub gap_threshold: f64,
    pub stabilized: bool,
}

pub const DEFAULT_N_MIN: u64 = 1 << 14;

/// `stat_z·sqrt(0.25/n_min)`: the worst-case binomial spread at `n_min`.
pub fn gap_threshold(n_min: u64, stat_z: f64) -> f64 {
    stat_z * (0.25 / n_min as f64).sqrt()
}

/// Frequencies of hits at every power of two up to `len`, plus `len` itself
/// when it is not a power of two.
pub fn dyadic_checkpoints(hits: impl IntoIterator<Item = bool>, len: u64) -> Vec<Checkpoint> {
    let mut out = Vec::new();
    let mut next = 1u64;
    let mut count = 0u64;
    for (i, hit) in hits.into_iter().enumerate().take(len as usize) {
        count += u64::from(hit);
        let n = i as u64 + 1;
        if n == next || n == len {
            out.push(Checkpoint {
                n,
                frequency: count as f64 / n as f64,
            });
            if n == next {
                next = next.saturating_mul(2);
            }
        }
    }
    out
}

/// Late-gap Cauchy criterion on dyadic checkpoints.
pub fn diagnose_checkpoints(checkpoints: Vec<Checkpoint>, n_min: u64, stat_z: f64) -> StabilizationDiagnostic {
    let (lo, hi) = checkpoints
        .iter()
        .filter(|c| c.n >= n_min)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.frequency), hi.max(c.frequency))
        });
    let max_late_gap = if lo.is_finite() { hi - lo } else { 0.0 };
    let threshold = gap_threshold(n_min, stat_z);
    StabilizationDiagnostic {
        checkpoints,
        n_min,
        max_late_gap,
        gap_threshold: threshold,
        stabilized: max_late_gap <= threshold,
    }
}

pub fn stabilization_diagnostic(s: &SSequence, n_min: u64, stat_z: f64) -> Result<StabilizationDiagnostic> {
    let required = (n_min as usize).saturating_mul(2);
    if s.len() < required {
        return Err(Error::SequenceTooShort {
            len: s.len(),
            required,
        });
    }
    let checkpoints = dyadic_checkpoints(s.outcomes.iter().map(|&o| o == 0), s.len() as u64);
    Ok(diagnose_checkpoints(checkpoints, n_min, stat_z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> [String; 2] {
        ["b1".into(), "b2".into()]
    }

    #[test]
    fn counting() {
        let s = SSequence::new("b", labels(), StreamSource::X, vec![0, 0, 1, 0]).unwrap();
        assert_eq!(estimate_frequencies(&s), [0.75, 0.25]);
        let c = SSequence::new("b", labels(), StreamSource::X, vec![0; 7]).unwrap();
        assert_eq!(estimate_frequencies(&c), [1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(SSequence::new("b", labels(), StreamSource::X, vec![]).is_err());
        assert!(SSequence::new("b", labels(), StreamSource::X, vec![0, 2]).is_err());
        assert!(SSequence::new("b", ["z".into(), "z".into()], StreamSource::X, vec![0]).is_err());
    }

    #[test]
    fn source_tags_round_trip() {
        for s in StreamSource::ALL.into_iter().chain([StreamSource::Other]) {
            assert_eq!(s.tag().parse::<StreamSource>().unwrap(), s);
        }
        assert!("x_alpha3".parse::<StreamSource>().is_err());
        assert!("z".parse::<StreamSource>().is_err());
    }

    #[test]
    fn checkpoints_are_dyadic() {
        let c = dyadic_checkpoints(std::iter::repeat(true), 20);
        let ns: Vec<u64> = c.iter().map(|c| c.n).collect();
        assert_eq!(ns, vec![1, 2, 4, 8, 16, 20]);
    }

    #[test]
    fn constant_stream_has_zero_gap() {
        let s = SSequence::new("b", labels(), StreamSource::X, vec![1; 1 << 15]).unwrap();
        let d = stabilization_diagnostic(&s, 1 << 10, 4.0).unwrap();
        assert_eq!(d.max_late_gap, 0.0);
        assert!(d.stabilized);
    }

    #[test]
    fn too_short() {
        let s = SSequence::new("b", labels(), StreamSource::X, vec![1; 100]).unwrap();
        assert!(matches!(
            stabilization_diagnostic(&s, 64, 4.0),
            Err(Error::SequenceTooShort { len: 100, required: 128 })
        ));
    }

    #[test]
    fn default_threshold() {
        assert_eq!(gap_threshold(DEFAULT_N_MIN, 4.0), 0.015625);
    }
}
