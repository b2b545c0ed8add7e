//! Seeded simulation of the six observation streams of a context and the
//! reverse step: assembling context data from observed streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sequence::{estimate_frequencies, SSequence, StreamSource};
use crate::model::{ContextData, Direction, Observable, ProbVector, TransitionMatrix};
use crate::supplementarity::terms;
use crate::{Error, Result};

/// Independent, reproducible generator for one stream: the ChaCha8 key is
/// `SHA-256(seed as little-endian u64 || tag)`.
pub fn stream_rng(seed: u64, tag: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn sample(p_first: f64, n: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.gen::<f64>() >= p_first)).collect()
}

/// The observation streams of one context.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextStreams {
    /// `b` under the context.
    pub x: SSequence,
    /// `a` under the context.
    pub y: SSequence,
    /// `b` under the selection `a = α`, indexed by α.
    pub x_given_a: [SSequence; 2],
    /// `a` under the selection `b = β`; absent when the context carries no
    /// a/b matrix.
    pub y_given_b: Option<[SSequence; 2]>,
}

impl ContextStreams {
    pub fn iter(&self) -> impl Iterator<Item = &SSequence> {
        [&self.x, &self.y]
            .into_iter()
            .chain(self.x_given_a.iter())
            .chain(self.y_given_b.iter().flatten())
    }

    /// Collects streams by their source tag. `x`, `y` and both `x_alpha`
    /// streams are required; the `y_beta` streams come as a pair or not at
    /// all.
    pub fn from_sequences(sequences: impl IntoIterator<Item = SSequence>) -> Result<Self> {
        let mut slots: [Option<SSequence>; 6] = Default::default();
        for s in sequences {
            let Some(i) = StreamSource::ALL.iter().position(|&t| t == s.source) else {
                return Err(Error::InvalidArgument(format!(
                    "stream with source {} does not belong to a context",
                    s.source
                )));
            };
            slots[i] = Some(s);
        }
        let [x, y, xa1, xa2, yb1, yb2] = slots;
        let need = |s: Option<SSequence>, source: StreamSource| {
            s.ok_or_else(|| Error::MissingStream(source.tag()))
        };
        let y_given_b = match (yb1, yb2) {
            (Some(a), Some(b)) => Some([a, b]),
            (None, None) => None,
            (None, Some(_)) => return Err(Error::MissingStream(StreamSource::YGivenB(0).tag())),
            (Some(_), None) => return Err(Error::MissingStream(StreamSource::YGivenB(1).tag())),
        };
        Ok(ContextStreams {
            x: need(x, StreamSource::X)?,
            y: need(y, StreamSource::Y)?,
            x_given_a: [
                need(xa1, StreamSource::XGivenA(0))?,
                need(xa2, StreamSource::XGivenA(1))?,
            ],
            y_given_b,
        })
    }
}

fn stream(obs: &Observable, source: StreamSource, p_first: f64, n: usize, seed: u64) -> SSequence {
    let mut rng = stream_rng(seed, &source.tag());
    SSequence {
        observable: obs.name.clone(),
        labels: obs.spectrum.clone(),
        source,
        seed: Some(seed),
        outcomes: sample(p_first, n, &mut rng),
    }
}

/// i.i.d. sampling of every stream the context defines: `x` from `p_b`,
/// `y` from `p_a`, `x_alpha` from the rows of `p(b|a)`, `y_beta` from the
/// rows of `p(a|b)`.
pub fn simulate_context(data: &ContextData, n: usize, seed: u64) -> Result<ContextStreams> {
    if n == 0 {
        return Err(Error::InvalidArgument("stream length must be at least 1".into()));
    }
    let ba = &data.p_b_given_a;
    Ok(ContextStreams {
        x: stream(&data.b, StreamSource::X, data.p_b[0], n, seed),
        y: stream(&data.a, StreamSource::Y, data.p_a[0], n, seed),
        x_given_a: [0, 1].map(|i| stream(&data.b, StreamSource::XGivenA(i), ba.get(i, 0), n, seed)),
        y_given_b: data.p_a_given_b.as_ref().map(|ab| {
            [0, 1].map(|i| stream(&data.a, StreamSource::YGivenB(i), ab.get(i, 0), n, seed))
        }),
    })
}

/// Per-entry statistical tolerances `z·sqrt(p̂(1 − p̂)/N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryTolerances {
    pub p_a: [f64; 2],
    pub p_b: [f64; 2],
    pub p_b_given_a: [[f64; 2]; 2],
    pub p_a_given_b: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub direction: Direction,
    pub outcome: usize,
    pub delta: f64,
    /// Propagated tolerance on δ (first-order delta method).
    pub delta_tolerance: f64,
    pub lambda: Option<f64>,
    pub lambda_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalContext {
    pub data: ContextData,
    pub tolerances: EntryTolerances,
    pub coefficients: Vec<CoefficientEstimate>,
}

impl EmpiricalContext {
    pub fn coefficient(&self, direction: Direction, outcome: usize) -> Option<&CoefficientEstimate> {
        self.coefficients
            .iter()
            .find(|c| c.direction == direction && c.outcome == outcome)
    }

    /// Largest δ tolerance, a supplementarity threshold for this data.
    pub fn delta_threshold(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.delta_tolerance)
            .fold(0.0, f64::max)
    }
}

/// Binomial variance of the first-outcome frequency of a stream.
fn variance(s: &SSequence) -> f64 {
    let p = estimate_frequencies(s)[0];
    p * (1.0 - p) / s.len() as f64
}

/// Propagates stream variances to δ and λ of one outcome. Every stream is
/// summarized by its first-outcome frequency, so a quantity depending on
/// the second outcome picks up a sign.
fn propagate(
    data: &ContextData,
    direction: Direction,
    outcome: usize,
    marginal_var: f64,
    weight_var: f64,
    conditional_var: [f64; 2],
    z: f64,
) -> Result<CoefficientEstimate> {
    let t = terms(data, direction, outcome)?;
    let delta = t.marginal - t.classical();
    let (w, c) = (t.weights, t.conditionals);

    // δ = m − w0·c0 − w1·c1 with w1 = 1 − w0
    let d_weight = c[1] - c[0];
    let delta_var = marginal_var + d_weight.powi(2) * weight_var
        + (0..2).map(|a| w[a].powi(2) * conditional_var[a]).sum::<f64>();

    let (lambda, lambda_tolerance) = if t.all_positive() && t.denom() > 0.0 {
        let s = t.denom();
        let lambda = delta / s;
        // ∂λ/∂x = ∂δ/∂x / s − λ·∂(ln s)/∂x, and ∂(ln s)/∂x = 1/(2x) for
        // every weight and conditional
        let dw = [0, 1].map(|a| -c[a] / s - lambda / (2.0 * w[a]));
        let dc = [0, 1].map(|a| -w[a] / s - lambda / (2.0 * c[a]));
        let var = marginal_var / (s * s)
            + (dw[0] - dw[1]).powi(2) * weight_var
            + (0..2).map(|a| dc[a].powi(2) * conditional_var[a]).sum::<f64>();
        (Some(lambda), Some(z * var.sqrt()))
    } else {
        (None, None)
    };

    Ok(CoefficientEstimate {
        direction,
        outcome,
        delta,
        delta_tolerance: z * delta_var.sqrt(),
        lambda,
        lambda_tolerance,
    })
}

fn frequencies_row(s: &SSequence) -> [f64; 2] {
    estimate_frequencies(s)
}

/// Estimates the context data from its streams. Rows and marginals come
/// from `estimate_frequencies` and sum to exactly 1.
pub fn empirical_context_data(streams: &ContextStreams, stat_z: f64) -> Result<EmpiricalContext> {
    let observable = |s: &SSequence| Observable {
        name: s.observable.clone(),
        spectrum: s.labels.clone(),
        values: None,
    };
    let entry_tol = |s: &SSequence| {
        let t = stat_z * variance(s).sqrt();
        [t, t]
    };

    let data = ContextData {
        label: String::new(),
        a: observable(&streams.y),
        b: observable(&streams.x),
        p_a: ProbVector(frequencies_row(&streams.y)),
        p_b: ProbVector(frequencies_row(&streams.x)),
        p_b_given_a: TransitionMatrix::b_given_a(streams.x_given_a.each_ref().map(frequencies_row)),
        p_a_given_b: streams
            .y_given_b
            .as_ref()
            .map(|ys| TransitionMatrix::a_given_b(ys.each_ref().map(frequencies_row))),
    };
    let tolerances = EntryTolerances {
        p_a: entry_tol(&streams.y),
        p_b: entry_tol(&streams.x),
        p_b_given_a: streams.x_given_a.each_ref().map(entry_tol),
        p_a_given_b: streams.y_given_b.as_ref().map(|ys| ys.each_ref().map(entry_tol)),
    };

    let mut coefficients = Vec::with_capacity(4);
    let (var_x, var_y) = (variance(&streams.x), variance(&streams.y));
    let var_xa = streams.x_given_a.each_ref().map(variance);
    for outcome in 0..2 {
        coefficients.push(propagate(&data, Direction::BGivenA, outcome, var_x, var_y, var_xa, stat_z)?);
    }
    if let Some(ys) = &streams.y_given_b {
        let var_yb = ys.each_ref().map(variance);
        for outcome in 0..2 {
            coefficients.push(propagate(&data, Direction::AGivenB, outcome, var_y, var_x, var_yb, stat_z)?);
        }
    }

    Ok(EmpiricalContext {
        data,
        tolerances,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_context, Tolerances};
    use crate::supplementarity::lambda_coeff;

    fn delta_fixture() -> ContextData {
        ContextData::new(
            [0.5, 0.5],
            [0.7, 0.3],
            [[0.5, 0.5], [0.5, 0.5]],
            Some([[0.5, 0.5], [0.5, 0.5]]),
        )
    }

    #[test]
    fn deterministic_given_seed() {
        let d = delta_fixture();
        let a = simulate_context(&d, 1000, 7).unwrap();
        let b = simulate_context(&d, 1000, 7).unwrap();
        assert_eq!(a, b);
        let c = simulate_context(&d, 1000, 8).unwrap();
        assert_ne!(a.x.outcomes, c.x.outcomes);
    }

    #[test]
    fn streams_use_distinct_sub_seeds() {
        // identical generating probabilities, different streams
        let d = ContextData::new([0.5, 0.5], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], None);
        let s = simulate_context(&d, 256, 1).unwrap();
        assert_ne!(s.x.outcomes, s.y.outcomes);
        assert_ne!(s.x_given_a[0].outcomes, s.x_given_a[1].outcomes);
        assert!(s.y_given_b.is_none());
        assert_eq!(s.iter().count(), 4);
    }

    #[test]
    fn degenerate_marginal_is_constant() {
        let d = ContextData::new([1.0, 0.0], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], None);
        let s = simulate_context(&d, 5000, 3).unwrap();
        assert!(s.y.outcomes.iter().all(|&o| o == 0));
    }

    #[test]
    fn frequency_within_binomial_band() {
        let d = delta_fixture();
        let s = simulate_context(&d, 1_000_000, 42).unwrap();
        let nu = estimate_frequencies(&s.x)[0];
        let band = 4.0 * (0.21f64 / 1e6).sqrt();
        assert!((nu - 0.7).abs() <= band, "nu = {nu}, band = {band}");
    }

    #[test]
    fn empirical_data_is_valid_by_construction() {
        let s = simulate_context(&delta_fixture(), 10, 5).unwrap();
        let e = empirical_context_data(&s, 4.0).unwrap();
        assert!(validate_context(&e.data, &Tolerances::default()).is_valid());
        for row in e.data.p_b_given_a.rows {
            assert_eq!(row[0] + row[1], 1.0);
        }
    }

    #[test]
    fn deterministic_streams_recover_exactly() {
        let b = ["b1".to_string(), "b2".to_string()];
        let a = ["a1".to_string(), "a2".to_string()];
        let seq = |obs: &str, labels: &[String; 2], source, pattern: &[u8]| {
            SSequence::new(obs, labels.clone(), source, pattern.repeat(25)).unwrap()
        };
        let streams = ContextStreams::from_sequences([
            seq("b", &b, StreamSource::X, &[0, 0, 0, 1]),
            seq("a", &a, StreamSource::Y, &[0, 1]),
            seq("b", &b, StreamSource::XGivenA(0), &[0, 1]),
            seq("b", &b, StreamSource::XGivenA(1), &[0, 1, 1, 0]),
        ])
        .unwrap();
        let e = empirical_context_data(&streams, 4.0).unwrap();
        assert_eq!(e.data.p_b.0, [0.75, 0.25]);
        assert_eq!(e.data.p_a.0, [0.5, 0.5]);
        assert_eq!(e.data.p_b_given_a.rows, [[0.5, 0.5], [0.5, 0.5]]);
        assert!(e.data.p_a_given_b.is_none());
        let c = e.coefficient(Direction::BGivenA, 0).unwrap();
        assert!((c.lambda.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_streams() {
        let b = ["b1".to_string(), "b2".to_string()];
        let x = SSequence::new("b", b.clone(), StreamSource::X, vec![0]).unwrap();
        let err = ContextStreams::from_sequences([x.clone()]).unwrap_err();
        assert!(matches!(err, Error::MissingStream(ref s) if s == "y"));

        let s = simulate_context(&delta_fixture(), 10, 1).unwrap();
        let mut partial: Vec<SSequence> = s.iter().cloned().collect();
        partial.pop();
        let err = ContextStreams::from_sequences(partial).unwrap_err();
        assert!(matches!(err, Error::MissingStream(ref s) if s == "y_beta2"));
    }

    #[test]
    fn small_samples_give_wide_tolerances() {
        let s = simulate_context(&delta_fixture(), 10, 11).unwrap();
        let e = empirical_context_data(&s, 4.0).unwrap();
        assert!(e.tolerances.p_b[0] > 0.1 || e.tolerances.p_b[0] == 0.0);
        assert!(e.delta_threshold() > 0.1);
    }

    /// Central finite differences over the four free frequencies.
    fn numeric_lambda_gradient(p: [f64; 4]) -> [f64; 4] {
        let lambda = |q: [f64; 4]| {
            let d = ContextData::new(
                [q[1], 1.0 - q[1]],
                [q[0], 1.0 - q[0]],
                [[q[2], 1.0 - q[2]], [q[3], 1.0 - q[3]]],
                None,
            );
            lambda_coeff(&d, Direction::BGivenA, 0).unwrap().unwrap()
        };
        let h = 1e-6;
        [0, 1, 2, 3].map(|i| {
            let (mut up, mut down) = (p, p);
            up[i] += h;
            down[i] -= h;
            (lambda(up) - lambda(down)) / (2.0 * h)
        })
    }

    #[test]
    fn lambda_tolerance_matches_finite_differences() {
        let p = [0.62, 0.3, 0.55, 0.8];
        let grad = numeric_lambda_gradient(p);
        let vars = [1e-6, 2e-6, 3e-6, 4e-6];
        let expected = 4.0 * (0..4).map(|i| grad[i].powi(2) * vars[i]).sum::<f64>().sqrt();
        let d = ContextData::new(
            [p[1], 1.0 - p[1]],
            [p[0], 1.0 - p[0]],
            [[p[2], 1.0 - p[2]], [p[3], 1.0 - p[3]]],
            None,
        );
        let c = propagate(&d, Direction::BGivenA, 0, vars[0], vars[1], [vars[2], vars[3]], 4.0).unwrap();
        let got = c.lambda_tolerance.unwrap();
        assert!((got - expected).abs() < 1e-6 * expected, "{got} vs {expected}");
    }
}
