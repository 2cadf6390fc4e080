//! Checking models against running products, plus drift and divergence
//! diagnostics.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, AffineMap1D, DynamicsError, Witness, INF_THRESHOLD, WITNESS_BOUND};
use crate::group::{Element, FiniteGroup};
use crate::ssm::{DcdSsm, SsmError, SsmState};
use crate::tasks::TokenStream;

/// Upper bound on model steps one exhaustive verification may evaluate.
pub const STEP_BUDGET: u64 = 100_000_000;
/// Residual allowed when searching for divergence witnesses.
pub const WITNESS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("exhaustive verification needs more than {budget} step evaluations")]
    BudgetExceeded { budget: u64 },
    #[error("model has {model} tokens but the group has order {group}")]
    GroupMismatch { model: usize, group: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Token indices up to and including the failing step.
    pub sequence: Vec<u32>,
    /// Zero-based position of the failing step.
    pub step: usize,
    pub expected: u32,
    /// `None` is a decode miss.
    pub decoded: Option<u32>,
    /// Set when the model could not take the step at all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub verdict: Verdict,
    pub sequences_checked: u64,
    /// Model steps actually evaluated; exhaustive runs share common prefixes.
    pub steps_evaluated: u64,
    pub first_counterexample: Option<Counterexample>,
    /// Largest `| |z| - 1 |` of a coordinate before quantization.
    pub max_modulus_drift: f64,
    /// Largest distance from a state to its nearest decoder anchor.
    pub max_decode_distance: f64,
}

/// JSON has no infinities; saturate instead.
fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

#[derive(Default)]
struct Stats {
    steps: u64,
    drift: f64,
    distance: f64,
}

enum Outcome {
    Ok(SsmState),
    Failed(Counterexample),
}

impl Stats {
    fn merge(&mut self, other: &Stats) {
        self.steps += other.steps;
        self.drift = self.drift.max(other.drift);
        self.distance = self.distance.max(other.distance);
    }

    /// One checked step. `path` already ends with `token`.
    fn check(
        &mut self,
        model: &DcdSsm,
        state: &SsmState,
        token: Element,
        expected: Element,
        path: &[u32],
    ) -> Outcome {
        self.steps += 1;
        let fail = |decoded: Option<Element>, error: Option<String>| {
            Outcome::Failed(Counterexample {
                sequence: path.to_vec(),
                step: path.len() - 1,
                expected: expected.0,
                decoded: decoded.map(|e| e.0),
                error,
            })
        };
        let (next, stats) = match model.step_traced(state, token) {
            Ok(x) => x,
            Err(e) => return fail(None, Some(e.to_string())),
        };
        self.drift = self.drift.max(finite(stats.raw_modulus_deviation));
        let nearest = model.nearest_anchor(&next);
        if let Some((_, d)) = nearest {
            self.distance = self.distance.max(finite(d));
        }
        let decoded = model.decode(&next);
        if decoded != Some(expected) {
            return fail(decoded, None);
        }
        Outcome::Ok(next)
    }
}

fn check_group(model: &DcdSsm, g: &FiniteGroup) -> Result<(), VerifyError> {
    if model.n_tokens() != g.order() {
        return Err(VerifyError::GroupMismatch { model: model.n_tokens(), group: g.order() });
    }
    Ok(())
}

fn report(stats: &Stats, sequences: u64, cx: Option<Counterexample>) -> TrackingReport {
    TrackingReport {
        verdict: if cx.is_none() { Verdict::Pass } else { Verdict::Fail },
        sequences_checked: sequences,
        steps_evaluated: stats.steps,
        first_counterexample: cx,
        max_modulus_drift: stats.drift,
        max_decode_distance: stats.distance,
    }
}

/// Checks every token sequence of length `1..=max_len` at every prefix.
///
/// Lengths are visited in increasing order and tokens lexicographically, so
/// the reported counterexample is the shortest, then lexicographically first.
/// A `(state bits, expected element)` pair that already survived all
/// continuations of some length is not expanded again: the model's future
/// depends on nothing else, so every sequence is still covered.
pub fn verify_exhaustive(model: &DcdSsm, g: &FiniteGroup, max_len: usize) -> Result<TrackingReport, VerifyError> {
    check_group(model, g)?;
    let mut search = Exhaustive {
        model,
        g,
        stats: Stats::default(),
        proven: HashMap::new(),
        path: Vec::with_capacity(max_len),
    };
    let start = model.initial_state();
    let mut sequences = 0u64;
    for len in 1..=max_len {
        if let Some(cx) = search.dfs(&start, g.identity(), len)? {
            return Ok(report(&search.stats, sequences, Some(cx)));
        }
        sequences = sequences.saturating_add((g.order() as u64).saturating_pow(len as u32));
    }
    Ok(report(&search.stats, sequences, None))
}

struct Exhaustive<'a> {
    model: &'a DcdSsm,
    g: &'a FiniteGroup,
    stats: Stats,
    /// Largest remaining depth known to pass from a node.
    proven: HashMap<(Vec<u64>, u32), usize>,
    path: Vec<u32>,
}

impl Exhaustive<'_> {
    fn dfs(&mut self, state: &SsmState, expected: Element, remaining: usize) -> Result<Option<Counterexample>, VerifyError> {
        let key = (state.key(), expected.0);
        if self.proven.get(&key).is_some_and(|&d| d >= remaining) {
            return Ok(None);
        }
        for token in self.g.elements() {
            if self.stats.steps >= STEP_BUDGET {
                return Err(VerifyError::BudgetExceeded { budget: STEP_BUDGET });
            }
            let next_expected = self.g.multiply(expected, token);
            self.path.push(token.0);
            let outcome = self.stats.check(self.model, state, token, next_expected, &self.path);
            match outcome {
                Outcome::Failed(cx) => return Ok(Some(cx)),
                Outcome::Ok(next) if remaining > 1 => {
                    if let Some(cx) = self.dfs(&next, next_expected, remaining - 1)? {
                        return Ok(Some(cx));
                    }
                }
                Outcome::Ok(_) => {}
            }
            self.path.pop();
        }
        self.proven.insert(key, remaining);
        Ok(None)
    }
}

/// Checks `count` uniform random sequences of length `len`.
///
/// Sequence `i` uses token stream `(seed, i)` of the dataset contract, so a
/// report is reproducible and identical to the dataset records with the same
/// seed. Sequences run in parallel; the reported counterexample is the one
/// with the smallest sequence index.
pub fn verify_random(
    model: &DcdSsm,
    g: &FiniteGroup,
    count: usize,
    len: usize,
    seed: u64,
) -> Result<TrackingReport, VerifyError> {
    check_group(model, g)?;
    let results: Vec<(Stats, Option<Counterexample>)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut stats = Stats::default();
            let mut state = model.initial_state();
            let mut expected = g.identity();
            let mut path = Vec::with_capacity(len);
            for token in TokenStream::new(seed, i, g.order()).take(len) {
                expected = g.multiply(expected, token);
                path.push(token.0);
                match stats.check(model, &state, token, expected, &path) {
                    Outcome::Ok(next) => state = next,
                    Outcome::Failed(cx) => return (stats, Some(cx)),
                }
            }
            (stats, None)
        })
        .collect();
    let mut stats = Stats::default();
    let mut first = None;
    for (s, cx) in results {
        stats.merge(&s);
        if first.is_none() {
            first = cx;
        }
    }
    Ok(report(&stats, count as u64, first))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub steps: usize,
    /// Largest `| |z| - 1 |` of a raw update, before renormalization.
    pub max_raw_modulus_deviation: f64,
    /// Largest `| |z| - 1 |` of a stored (quantized) coordinate.
    pub max_modulus_deviation: f64,
    pub max_anchor_distance: f64,
}

/// Runs `seq` and records modulus drift and distance to the decoder anchors.
pub fn drift_probe(model: &DcdSsm, seq: &[Element]) -> Result<DriftReport, SsmError> {
    let mut state = model.initial_state();
    let mut out = DriftReport {
        steps: 0,
        max_raw_modulus_deviation: 0.0,
        max_modulus_deviation: 0.0,
        max_anchor_distance: 0.0,
    };
    for &x in seq {
        let (next, stats) = model.step_traced(&state, x)?;
        state = next;
        out.steps += 1;
        out.max_raw_modulus_deviation = out.max_raw_modulus_deviation.max(stats.raw_modulus_deviation);
        out.max_modulus_deviation = out.max_modulus_deviation.max(stats.modulus_deviation);
        let d = model.nearest_anchor(&state).map_or(f64::INFINITY, |(_, d)| d);
        out.max_anchor_distance = out.max_anchor_distance.max(d);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSummary {
    pub witness: Witness,
    pub block_len: u32,
    /// Composite affine map of one block.
    pub block: AffineMap1D,
    /// `(1 - conj(λ1^α1)) (c2 - c1)`.
    pub predicted_translation: Complex64,
    pub repeats: usize,
    /// `|x_k - x_0|` after each block repeat, starting from `x_0 = c1`.
    pub displacements: Vec<f64>,
    pub monotone: bool,
    /// First step at which the magnitude exceeds the Inf threshold.
    pub inf_crossing_step: u64,
    /// Whether `inf_crossing_step` is extrapolated rather than observed.
    pub crossing_projected: bool,
}

impl DivergenceSummary {
    pub fn final_displacement(&self) -> f64 {
        self.displacements.last().copied().unwrap_or(0.0)
    }
}

/// Builds a near-translation block from two neutral rotations about distinct
/// centers and repeats it.
pub fn divergence_demo(
    lambda1: Complex64,
    c1: Complex64,
    lambda2: Complex64,
    c2: Complex64,
    repeats: usize,
) -> Result<DivergenceSummary, DynamicsError> {
    let m1 = AffineMap1D::rotation(lambda1, c1);
    let m2 = AffineMap1D::rotation(lambda2, c2);
    let witness = dynamics::divergence_witness(&m1, &m2, WITNESS_BOUND, WITNESS_TOLERANCE)?;
    let block = dynamics::witness_block(&m1, &m2, &witness);
    let lambda_a = lambda1.powu(witness.alpha1);
    let predicted_translation = (Complex64::new(1.0, 0.0) - lambda_a.conj()) * (c2 - c1);

    let x0 = c1;
    let mut x = x0;
    let mut displacements = Vec::with_capacity(repeats);
    let mut observed = None;
    for k in 1..=repeats {
        for _ in 0..witness.alpha1 {
            x = m1.apply(x);
        }
        for _ in 0..witness.alpha2 {
            x = m2.apply(x);
        }
        if observed.is_none() && x.norm() > INF_THRESHOLD {
            observed = Some(k as u64 * witness.block_len() as u64);
        }
        displacements.push((x - x0).norm());
    }
    let monotone = displacements.windows(2).all(|w| w[1] > w[0]);
    let (inf_crossing_step, crossing_projected) = match observed {
        Some(step) => (step, false),
        None => {
            let per_block = block.apply(x0) - x0;
            let blocks = ((INF_THRESHOLD + x0.norm()) / per_block.norm()).ceil() as u64;
            (blocks.saturating_mul(witness.block_len() as u64), true)
        }
    };
    Ok(DivergenceSummary {
        block_len: witness.block_len(),
        witness,
        block,
        predicted_translation,
        repeats,
        displacements,
        monotone,
        inf_crossing_step,
        crossing_projected,
    })
}
