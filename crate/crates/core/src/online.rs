//! Online algorithms: greedy with free disposal and the randomized
//! interval (doubling) algorithm, plus its derandomized form driven by an
//! explicit offset vector.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{sorted_opt, Instance, Placement, RunTrace, ValueReport};

/// Gains within this relative distance of the best gain count as tied.
///
/// Exactly tied gains in the adversarial greedy instance differ by a few
/// ulps once evaluated in floating point.
pub const GAIN_TIE_RTOL: f64 = 1e-9;

/// How greedy picks among machines with (near-)equal best gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    #[default]
    PreferFastest,
    PreferSlowest,
    PreferLowestIndex,
}

impl FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefer-fastest" | "fastest" => Ok(TieRule::PreferFastest),
            "prefer-slowest" | "slowest" => Ok(TieRule::PreferSlowest),
            "prefer-lowest-index" | "lowest-index" => Ok(TieRule::PreferLowestIndex),
            other => Err(Error::Domain(format!("unknown tie rule '{other}'"))),
        }
    }
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieRule::PreferFastest => "prefer-fastest",
            TieRule::PreferSlowest => "prefer-slowest",
            TieRule::PreferLowestIndex => "prefer-lowest-index",
        })
    }
}

/// An online assignment rule. Sees one job at a time and either picks a
/// machine (with an optional interval tag for the trace) or discards it.
pub trait OnlineAlgorithm {
    fn decide(
        &mut self,
        instance: &Instance,
        credited: &[f64],
        size: f64,
    ) -> Option<(usize, Option<i64>)>;
}

/// Runs `alg` over the arrival sequence. `observe(prefix_len, value)` is
/// called after every job with the algorithm's value so far.
pub fn simulate<A, F>(instance: &Instance, alg: &mut A, mut observe: F) -> RunTrace
where
    A: OnlineAlgorithm + ?Sized,
    F: FnMut(usize, f64),
{
    let speeds = instance.speeds();
    let mut trace = RunTrace::new(speeds);
    let mut credited = vec![0.0; speeds.len()];
    for (job, &size) in instance.jobs().iter().enumerate() {
        match alg.decide(instance, &credited, size) {
            Some((m, interval)) => {
                credited[m] = credited[m].max(size);
                trace.place(
                    m,
                    Placement {
                        job,
                        size,
                        interval,
                    },
                );
            }
            None => trace.discard(job),
        }
        let value: f64 = speeds.iter().zip(&credited).map(|(s, w)| s * w).sum();
        observe(job + 1, value);
    }
    trace
}

fn finish(instance: &Instance, trace: RunTrace) -> (RunTrace, ValueReport) {
    let report = ValueReport::new(trace.alg_value(), sorted_opt(instance).value);
    (trace, report)
}

/// Greedy: put the job where it raises the objective most, if anywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy {
    pub tie: TieRule,
}

impl OnlineAlgorithm for Greedy {
    fn decide(
        &mut self,
        instance: &Instance,
        credited: &[f64],
        size: f64,
    ) -> Option<(usize, Option<i64>)> {
        let speeds = instance.speeds();
        let gain = |m: usize| speeds[m] * (size - credited[m]);
        let best = (0..speeds.len())
            .map(gain)
            .fold(f64::NEG_INFINITY, f64::max);
        if best <= 0.0 {
            return None;
        }
        let cutoff = best - GAIN_TIE_RTOL * best;
        let tied = |m: &usize| gain(*m) >= cutoff;
        let order = instance.machine_order();
        let pick = match self.tie {
            TieRule::PreferFastest => order.iter().copied().find(tied),
            TieRule::PreferSlowest => order.iter().rev().copied().find(tied),
            TieRule::PreferLowestIndex => (0..speeds.len()).find(tied),
        };
        pick.map(|m| (m, None))
    }
}

pub fn run_greedy(instance: &Instance, tie: TieRule) -> (RunTrace, ValueReport) {
    let trace = simulate(instance, &mut Greedy { tie }, |_, _| {});
    finish(instance, trace)
}

/// The unique integer `k` with `c^(k+x) < size <= c^(k+1+x)`.
pub fn interval_index(size: f64, x: f64, c: f64) -> i64 {
    index_from_base(size, c, c.powf(x))
}

/// Interval index given the precomputed base `c^x`. Thresholds are
/// `base * c^k`, so scaling sizes by `c^m` shifts indices by exactly `m`
/// whenever `c^m` is exact in floating point.
fn index_from_base(size: f64, c: f64, base: f64) -> i64 {
    let threshold = |k: i64| base * c.powi(k as i32);
    let mut k = ((size / base).ln() / c.ln()).ceil() as i64 - 1;
    while threshold(k) >= size {
        k -= 1;
    }
    while threshold(k + 1) < size {
        k += 1;
    }
    k
}

/// Interval base `c` and one offset per machine, indexed fastest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalParams {
    c: f64,
    x: Vec<f64>,
}

impl IntervalParams {
    pub fn new(c: f64, x: Vec<f64>) -> Result<Self> {
        check_base(c)?;
        if let Some(bad) = x.iter().find(|&&xi| !(xi > 0.0 && xi <= 1.0)) {
            return Err(Error::Domain(format!(
                "interval offset {bad} outside (0, 1]"
            )));
        }
        Ok(IntervalParams { c, x })
    }

    /// The same offset on every one of `machines` machines.
    pub fn constant(c: f64, x: f64, machines: usize) -> Result<Self> {
        Self::new(c, vec![x; machines])
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
}

fn check_base(c: f64) -> Result<()> {
    if c.is_finite() && c > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "interval base c = {c} must be a finite number > 1"
        )))
    }
}

/// State of the interval algorithm during one run.
#[derive(Debug, Clone)]
pub struct IntervalAlgorithm {
    c: f64,
    bases: Vec<f64>,
    // interval index of the credited job, by rank
    current: Vec<Option<i64>>,
}

impl IntervalAlgorithm {
    pub fn new(instance: &Instance, params: &IntervalParams) -> Result<Self> {
        if params.x.len() != instance.num_machines() {
            return Err(Error::DimensionMismatch {
                expected: instance.num_machines(),
                got: params.x.len(),
            });
        }
        Ok(IntervalAlgorithm {
            c: params.c,
            bases: params.x.iter().map(|&x| params.c.powf(x)).collect(),
            current: vec![None; params.x.len()],
        })
    }
}

impl OnlineAlgorithm for IntervalAlgorithm {
    fn decide(
        &mut self,
        instance: &Instance,
        _credited: &[f64],
        size: f64,
    ) -> Option<(usize, Option<i64>)> {
        for (rank, &machine) in instance.machine_order().iter().enumerate() {
            let k = index_from_base(size, self.c, self.bases[rank]);
            if self.current[rank].is_none_or(|held| held < k) {
                self.current[rank] = Some(k);
                return Some((machine, Some(k)));
            }
        }
        None
    }
}

pub fn run_interval(
    instance: &Instance,
    params: &IntervalParams,
) -> Result<(RunTrace, ValueReport)> {
    let mut alg = IntervalAlgorithm::new(instance, params)?;
    let trace = simulate(instance, &mut alg, |_, _| {});
    Ok(finish(instance, trace))
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the random stream used by one trial.
pub fn trial_seed(seed: u64, trial_index: u64) -> u64 {
    mix64(seed ^ mix64(trial_index))
}

/// Offsets uniform on (0, 1], one per machine in fastest-first order.
pub fn draw_offsets(seed: u64, trial_index: u64, machines: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial_index));
    let scale = 2f64.powi(-64);
    (0..machines)
        .map(|_| (rng.next_u64() as f64 + 1.0) * scale)
        .collect()
}

/// The randomized interval algorithm for one reproducible trial.
pub fn run_interval_random(
    instance: &Instance,
    c: f64,
    seed: u64,
    trial_index: u64,
) -> Result<(RunTrace, ValueReport)> {
    check_base(c)?;
    let x = draw_offsets(seed, trial_index, instance.num_machines());
    run_interval(instance, &IntervalParams::new(c, x)?)
}

/// A fully deterministic online algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum DeterministicAlgorithm {
    Greedy(TieRule),
    Interval(IntervalParams),
}

impl DeterministicAlgorithm {
    /// Runs the algorithm, reporting the value after every prefix.
    pub fn simulate<F: FnMut(usize, f64)>(
        &self,
        instance: &Instance,
        observe: F,
    ) -> Result<RunTrace> {
        Ok(match self {
            DeterministicAlgorithm::Greedy(tie) => {
                simulate(instance, &mut Greedy { tie: *tie }, observe)
            }
            DeterministicAlgorithm::Interval(params) => {
                let mut alg = IntervalAlgorithm::new(instance, params)?;
                simulate(instance, &mut alg, observe)
            }
        })
    }
}
