//! Natural density of sets of positive integers and the construction of
//! two sets with densities whose intersection has none.
//!
//! `C` holds the even number `2m` iff `floor(log2 m)` is even, i.e. `m`
//! lies in one of the blocks `[1, 2)`, `[4, 8)`, `[16, 32)`, ... Its prefix
//! density swings between about 1/6 (at `N = 2·4^k`) and about 1/3 (at
//! `N = 4^(k+1)`). `B = C ∪ {2m − 1 : 2m ∉ C}` takes exactly one of
//! `{2m − 1, 2m}` for every `m`, so both `B` and the evens `A` have density
//! 1/2 while `A ∩ B = C` has none.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sequence::{diagnose_checkpoints, dyadic_checkpoints, Checkpoint, StabilizationDiagnostic};
use crate::{Error, Result};

type Membership = Arc<dyn Fn(u64) -> bool + Send + Sync>;

/// A subset of the positive integers given by a membership predicate.
#[derive(Clone)]
pub struct DensitySet {
    name: String,
    membership: Membership,
}

impl fmt::Debug for DensitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensitySet").field("name", &self.name).finish()
    }
}

impl DensitySet {
    pub fn new(name: impl Into<String>, membership: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        DensitySet {
            name: name.into(),
            membership: Arc::new(membership),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.membership)(n)
    }

    pub fn multiples_of(k: u64) -> Self {
        assert!(k > 0, "multiples of zero");
        DensitySet::new(format!("multiples of {k}"), move |n| n % k == 0)
    }

    pub fn evens() -> Self {
        DensitySet::new("evens", |n| n % 2 == 0)
    }

    pub fn odds() -> Self {
        DensitySet::new("odds", |n| n % 2 == 1)
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let mut members: Vec<u64> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        DensitySet::new(format!("finite set of {}", members.len()), move |n| {
            members.binary_search(&n).is_ok()
        })
    }

    /// The even numbers `2m` with `floor(log2 m)` even.
    pub fn oscillating() -> Self {
        DensitySet::new("oscillating subset of evens", oscillating_contains)
    }

    /// `C ∪ {2m − 1 : 2m ∉ C}`.
    pub fn oscillating_complement_pairing() -> Self {
        DensitySet::new("oscillating set paired with odds", |n| {
            if n % 2 == 0 {
                oscillating_contains(n)
            } else {
                !oscillating_contains(n + 1)
            }
        })
    }

    pub fn union(&self, other: &DensitySet) -> Self {
        let (a, b) = (self.membership.clone(), other.membership.clone());
        DensitySet::new(format!("({}) ∪ ({})", self.name, other.name), move |n| a(n) || b(n))
    }

    pub fn intersection(&self, other: &DensitySet) -> Self {
        let (a, b) = (self.membership.clone(), other.membership.clone());
        DensitySet::new(format!("({}) ∩ ({})", self.name, other.name), move |n| a(n) && b(n))
    }

    pub fn difference(&self, other: &DensitySet) -> Self {
        let (a, b) = (self.membership.clone(), other.membership.clone());
        DensitySet::new(format!("({}) \\ ({})", self.name, other.name), move |n| a(n) && !b(n))
    }
}

fn oscillating_contains(n: u64) -> bool {
    if n == 0 || n % 2 == 1 {
        return false;
    }
    let m = n / 2;
    (63 - m.leading_zeros()).is_multiple_of(2)
}

/// `|A ∩ {1..n}| / n`.
pub fn density(set: &DensitySet, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("prefix length must be at least 1".into()));
    }
    let count = (1..=n).filter(|&k| set.contains(k)).count();
    Ok(count as f64 / n as f64)
}

/// Prefix densities at every power of two up to `max_n` (and `max_n`).
pub fn density_checkpoints(set: &DensitySet, max_n: u64) -> Vec<Checkpoint> {
    dyadic_checkpoints((1..=max_n).map(|k| set.contains(k)), max_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCheckpoint {
    pub n: u64,
    pub a: f64,
    pub b: f64,
    pub joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationSummary {
    pub max_late_gap: f64,
    pub gap_threshold: f64,
    pub stabilized: bool,
}

impl From<&StabilizationDiagnostic> for StabilizationSummary {
    fn from(d: &StabilizationDiagnostic) -> Self {
        StabilizationSummary {
            max_late_gap: d.max_late_gap,
            gap_threshold: d.gap_threshold,
            stabilized: d.stabilized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub max_n: u64,
    pub n_min: u64,
    pub checkpoints: Vec<JointCheckpoint>,
    pub a: StabilizationSummary,
    pub b: StabilizationSummary,
    pub joint: StabilizationSummary,
    /// Smallest and largest joint prefix frequency over `N ∈ [max_n/4, max_n]`.
    pub joint_liminf_estimate: f64,
    pub joint_limsup_estimate: f64,
    /// Largest `|ν_N − 1/2|` of either marginal over checkpoints `N ≥ n_min`.
    pub marginal_max_late_deviation: f64,
}

pub const MIN_COUNTEREXAMPLE_N: u64 = 1 << 16;

/// Observes `a = I_A` (evens) and `b = I_B` on `1..=max_n`. Both marginal
/// frequencies stabilize at 1/2; the frequency of `(a, b) = (1, 1)` is the
/// prefix density of `C` and keeps oscillating.
pub fn counterexample(max_n: u64, n_min: u64, stat_z: f64) -> Result<CounterexampleReport> {
    if max_n < MIN_COUNTEREXAMPLE_N {
        return Err(Error::InvalidArgument(format!(
            "max_n must be at least {MIN_COUNTEREXAMPLE_N}, got {max_n}"
        )));
    }
    if n_min == 0 || n_min > max_n {
        return Err(Error::InvalidArgument(format!("n_min must lie in 1..={max_n}")));
    }
    let a_set = DensitySet::evens();
    let b_set = DensitySet::oscillating_complement_pairing();

    let mut counts = [0u64; 3];
    let mut checkpoints = Vec::new();
    let mut next = 1u64;
    let window_start = max_n / 4;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in 1..=max_n {
        let (a, b) = (a_set.contains(n), b_set.contains(n));
        counts[0] += u64::from(a);
        counts[1] += u64::from(b);
        counts[2] += u64::from(a && b);
        let nf = n as f64;
        if n >= window_start {
            let j = counts[2] as f64 / nf;
            lo = lo.min(j);
            hi = hi.max(j);
        }
        if n == next || n == max_n {
            checkpoints.push(JointCheckpoint {
                n,
                a: counts[0] as f64 / nf,
                b: counts[1] as f64 / nf,
                joint: counts[2] as f64 / nf,
            });
            if n == next {
                next *= 2;
            }
        }
    }

    let diagnose = |pick: fn(&JointCheckpoint) -> f64| {
        let cps = checkpoints
            .iter()
            .map(|c| Checkpoint {
                n: c.n,
                frequency: pick(c),
            })
            .collect();
        diagnose_checkpoints(cps, n_min, stat_z)
    };
    let a = diagnose(|c| c.a);
    let b = diagnose(|c| c.b);
    let joint = diagnose(|c| c.joint);
    let marginal_max_late_deviation = checkpoints
        .iter()
        .filter(|c| c.n >= n_min)
        .flat_map(|c| [(c.a - 0.5).abs(), (c.b - 0.5).abs()])
        .fold(0.0, f64::max);

    Ok(CounterexampleReport {
        max_n,
        n_min,
        a: (&a).into(),
        b: (&b).into(),
        joint: (&joint).into(),
        checkpoints,
        joint_liminf_estimate: lo,
        joint_limsup_estimate: hi,
        marginal_max_late_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDensity {
    pub name: String,
    pub density: f64,
    pub stabilization: StabilizationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityAlgebraReport {
    pub max_n: u64,
    pub first: SetDensity,
    pub second: SetDensity,
    pub union: SetDensity,
    pub intersection: SetDensity,
    pub first_minus_second: SetDensity,
    pub second_minus_first: SetDensity,
    /// No common element within the prefix.
    pub disjoint: bool,
    /// `|P(A1 ∪ A2) − P(A1) − P(A2)|`, for disjoint sets only.
    pub additivity_residual: Option<f64>,
    /// `|P(A1 ∪ A2) − (P(A1) + P(A2) − P(A1 ∩ A2))|`.
    pub inclusion_exclusion_residual: f64,
    /// `|P(A1 \ A2) − (P(A1) − P(A1 ∩ A2))|`.
    pub difference_residual: f64,
    /// Union, intersection and both differences stabilize together.
    pub stabilization_agrees: bool,
}

/// Additivity on disjoint sets, and inclusion–exclusion and the difference
/// formula when the intersection has a density, all evaluated at `max_n`.
pub fn density_algebra_check(
    first: &DensitySet,
    second: &DensitySet,
    max_n: u64,
    n_min: u64,
    stat_z: f64,
) -> Result<DensityAlgebraReport> {
    if max_n < 2 * n_min || n_min == 0 {
        return Err(Error::InvalidArgument(format!(
            "max_n ({max_n}) must be at least twice n_min ({n_min})"
        )));
    }
    let sets = [
        first.clone(),
        second.clone(),
        first.union(second),
        first.intersection(second),
        first.difference(second),
        second.difference(first),
    ];
    let measured: Vec<SetDensity> = sets
        .iter()
        .map(|s| {
            let cps = density_checkpoints(s, max_n);
            let density = cps.last().map_or(0.0, |c| c.frequency);
            let d = diagnose_checkpoints(cps, n_min, stat_z);
            SetDensity {
                name: s.name().to_string(),
                density,
                stabilization: (&d).into(),
            }
        })
        .collect();
    let [d1, d2, du, di, d12, d21]: [SetDensity; 6] = measured.try_into().expect("six sets");

    for s in [&d1, &d2, &di] {
        if !s.stabilization.stabilized {
            return Err(Error::NotStabilized {
                set: s.name.clone(),
                gap: s.stabilization.max_late_gap,
                threshold: s.stabilization.gap_threshold,
            });
        }
    }

    let disjoint = di.density == 0.0;
    let stab = [&du, &di, &d12, &d21].map(|s| s.stabilization.stabilized);
    Ok(DensityAlgebraReport {
        max_n,
        disjoint,
        additivity_residual: disjoint.then(|| (du.density - d1.density - d2.density).abs()),
        inclusion_exclusion_residual: (du.density - (d1.density + d2.density - di.density)).abs(),
        difference_residual: (d12.density - (d1.density - di.density)).abs(),
        stabilization_agrees: stab.iter().all(|&s| s == stab[0]),
        first: d1,
        second: d2,
        union: du,
        intersection: di,
        first_minus_second: d12,
        second_minus_first: d21,
    })
}
