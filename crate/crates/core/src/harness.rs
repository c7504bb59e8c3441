//! Experiment drivers: worst prefix of a deterministic run, the exact
//! strategy DP and enumeration for the doubling prefix distribution, and
//! Monte-Carlo estimation for the randomized interval algorithm.

use std::io::Write;

use serde::Serialize;

use crate::adversary::{rand_ub_family, RAND_UB_MAX_N};
use crate::error::{Error, Result};
use crate::instance::{sorted_opt, Instance};
use crate::numfmt::g17;
use crate::online::{
    draw_offsets, simulate, DeterministicAlgorithm, IntervalAlgorithm, IntervalParams,
};
use crate::par::{self, Threads};

/// Largest `n` accepted by [`enumerate_best_det`].
pub const ENUMERATION_MAX_N: usize = 20;

fn ratio_or_one(alg: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        alg / opt
    } else {
        1.0
    }
}

/// Ratios of a deterministic run after every prefix of the arrivals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixRatios {
    pub min_ratio: f64,
    /// Length of the prefix attaining `min_ratio`; 0 for an empty sequence.
    pub argmin_prefix: usize,
    /// `ratios[k - 1]` belongs to the prefix of length `k`.
    pub ratios: Vec<f64>,
}

/// Simulates `alg` once and compares its value after each prefix with the
/// optimum of that prefix. The first minimum wins ties.
pub fn prefix_worst_ratio(
    instance: &Instance,
    alg: &DeterministicAlgorithm,
) -> Result<PrefixRatios> {
    let mut values = Vec::with_capacity(instance.num_jobs());
    alg.simulate(instance, |_, v| values.push(v))?;
    let ratios: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| ratio_or_one(v, sorted_opt(&instance.prefix(k + 1)).value))
        .collect();
    let mut out = PrefixRatios {
        min_ratio: 1.0,
        argmin_prefix: 0,
        ratios,
    };
    for (k, &r) in out.ratios.iter().enumerate() {
        if out.argmin_prefix == 0 || r < out.min_ratio {
            out.min_ratio = r;
            out.argmin_prefix = k + 1;
        }
    }
    Ok(out)
}

/// An expected value held exactly as `units / denominator`.
///
/// For the doubling family every expectation is a multiple of
/// `1 / (4 (2^n - 1))`, so strategy values compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ExactValue {
    pub units: u128,
    pub denominator: u128,
}

impl ExactValue {
    pub fn value(&self) -> f64 {
        self.units as f64 / self.denominator as f64
    }
}

// Gains in units of 1/(4(2^n - 1)). Job t (size 2^t) is presented with
// probability T_t = (2^(n+1-t) - 1)/(2^n - 1).
struct Units {
    n: usize,
}

impl Units {
    fn denominator(&self) -> u128 {
        4 * ((1u128 << self.n) - 1)
    }

    fn tail(&self, t: usize) -> u128 {
        (1u128 << (self.n + 1 - t)) - 1
    }

    fn size(j: usize) -> u128 {
        if j == 0 {
            0
        } else {
            1u128 << j
        }
    }

    /// Job `t` replaces job `held` on the fast machine.
    fn fast(&self, t: usize, held: usize) -> u128 {
        (Self::size(t) - Self::size(held)) * 4 * self.tail(t)
    }

    /// Job `t` goes to its own slow machine.
    fn slow(&self, t: usize) -> u128 {
        Self::size(t) * self.tail(t)
    }
}

fn check_family_n(n: usize, limit: usize) -> Result<()> {
    if (1..=limit).contains(&n) {
        Ok(())
    } else {
        Err(Error::Domain(format!("n must lie in 1..={limit}, got {n}")))
    }
}

/// Table of `f(t, j)`: the best expected value after `t` jobs with job `j`
/// on the fast machine (`j = 0` means it is still empty).
#[derive(Debug, Clone)]
pub struct DpTable {
    n: usize,
    // rows[t][j], None where the state is unreachable (j > t)
    rows: Vec<Vec<Option<u128>>>,
}

impl DpTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn exact(&self, t: usize, j: usize) -> Option<ExactValue> {
        let units = (*self.rows.get(t)?.get(j)?)?;
        Some(ExactValue {
            units,
            denominator: Units { n: self.n }.denominator(),
        })
    }

    pub fn value(&self, t: usize, j: usize) -> Option<f64> {
        self.exact(t, j).map(|v| v.value())
    }

    /// `max_j f(n, j)`.
    pub fn best(&self) -> ExactValue {
        let units = self.rows[self.n]
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0);
        ExactValue {
            units,
            denominator: Units { n: self.n }.denominator(),
        }
    }
}

pub fn dp_table(n: usize) -> Result<DpTable> {
    check_family_n(n, RAND_UB_MAX_N)?;
    let u = Units { n };
    let mut rows = vec![vec![Some(0u128)]];
    for t in 1..=n {
        let prev = &rows[t - 1];
        let mut row: Vec<Option<u128>> = prev.iter().map(|f| f.map(|v| v + u.slow(t))).collect();
        let fast = prev
            .iter()
            .enumerate()
            .filter_map(|(m, f)| f.map(|v| v + u.fast(t, m)))
            .max();
        row.push(fast);
        rows.push(row);
    }
    Ok(DpTable { n, rows })
}

/// Best expected value of a deterministic algorithm against the doubling
/// prefix distribution with `n` jobs.
pub fn dp_best_det(n: usize) -> Result<ExactValue> {
    Ok(dp_table(n)?.best())
}

/// Expected value of one strategy; bit `t - 1` of `mask` sends job `t` to
/// the fast machine.
pub fn strategy_value(n: usize, mask: u64) -> Result<ExactValue> {
    check_family_n(n, RAND_UB_MAX_N)?;
    let u = Units { n };
    Ok(ExactValue {
        units: strategy_units(&u, mask),
        denominator: u.denominator(),
    })
}

fn strategy_units(u: &Units, mask: u64) -> u128 {
    let mut held = 0;
    let mut total = 0;
    for t in 1..=u.n {
        if mask >> (t - 1) & 1 == 1 {
            total += u.fast(t, held);
            held = t;
        } else {
            total += u.slow(t);
        }
    }
    total
}

/// Same maximum as [`dp_best_det`], by trying all `2^n` strategies.
pub fn enumerate_best_det(n: usize) -> Result<ExactValue> {
    enumerate_best_det_with(n, 0)
}

pub fn enumerate_best_det_with(n: usize, threads: Threads) -> Result<ExactValue> {
    if n > ENUMERATION_MAX_N {
        return Err(Error::TooLarge {
            machines: n + 1,
            jobs: n,
            limit: ENUMERATION_MAX_N,
        });
    }
    check_family_n(n, ENUMERATION_MAX_N)?;
    let u = Units { n };
    let masks = 1u64 << n;
    let chunk = 1024u64.min(masks);
    let chunks = masks.div_ceil(chunk) as usize;
    let best = par::map_range(chunks, threads, |i| {
        let start = i as u64 * chunk;
        (start..(start + chunk).min(masks))
            .map(|m| strategy_units(&u, m))
            .max()
            .unwrap_or(0)
    });
    Ok(ExactValue {
        units: best.into_iter().max().unwrap_or(0),
        denominator: u.denominator(),
    })
}

/// Closed form `c (5n/4 - (1 - 2^-n)/4)` for the expected prefix optimum.
///
/// It assumes `OPT_i = 2^i + (2^i - 1)/4` and so sits exactly 1/4 above
/// [`expected_opt_by_oracle`].
pub fn expected_opt_prefix(n: usize) -> Result<f64> {
    check_family_n(n, RAND_UB_MAX_N)?;
    let tail = 1.0 - 2f64.powi(-(n as i32));
    let c = 1.0 / tail;
    Ok(c * (1.25 * n as f64 - 0.25 * tail))
}

/// `sum_i p_i OPT(prefix i)` with every prefix optimum solved directly.
pub fn expected_opt_by_oracle(n: usize) -> Result<f64> {
    let family = rand_ub_family(n)?;
    let mut total = 0.0;
    for (i, p) in family.probabilities.iter().enumerate() {
        total += p * sorted_opt(&family.prefix_instance(i + 1)?).value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub alg_value: f64,
    pub opt_value: f64,
    pub ratio: f64,
}

/// Aggregate of a Monte-Carlo run; records are in trial order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McStats {
    pub trials: usize,
    pub mean_ratio: f64,
    /// Zero for a single trial.
    pub sample_std: f64,
    pub stderr: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl McStats {
    fn from_records(records: Vec<TrialRecord>) -> Self {
        let n = records.len();
        let ratios = || records.iter().map(|r| r.ratio);
        let mean = ratios().sum::<f64>() / n as f64;
        let sample_std = if n > 1 {
            (ratios().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        McStats {
            trials: n,
            mean_ratio: mean,
            sample_std,
            stderr: sample_std / (n as f64).sqrt(),
            min_ratio: ratios().fold(f64::INFINITY, f64::min),
            max_ratio: ratios().fold(f64::NEG_INFINITY, f64::max),
            records,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.csv().as_bytes())
    }

    /// `trial,alg_value,opt_value,ratio`, one row per trial, LF endings.
    pub fn csv(&self) -> String {
        let mut s = String::from("trial,alg_value,opt_value,ratio\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.trial_index,
                g17(r.alg_value),
                g17(r.opt_value),
                g17(r.ratio)
            ));
        }
        s
    }

    pub fn summary_json(&self) -> String {
        format!(
            "{{\"trials\":{},\"mean_ratio\":{},\"sample_std\":{},\"stderr\":{},\"min_ratio\":{},\"max_ratio\":{}}}\n",
            self.trials,
            g17(self.mean_ratio),
            g17(self.sample_std),
            g17(self.stderr),
            g17(self.min_ratio),
            g17(self.max_ratio)
        )
    }

    /// One line rounded to six digits for people.
    pub fn human_summary(&self) -> String {
        format!(
            "trials={} mean_ratio={:.6} std={:.6} stderr={:.6} min={:.6} max={:.6}",
            self.trials,
            self.mean_ratio,
            self.sample_std,
            self.stderr,
            self.min_ratio,
            self.max_ratio
        )
    }
}

/// Runs the randomized interval algorithm for trials `0..trials`. The
/// output does not depend on `threads`.
pub fn monte_carlo(
    instance: &Instance,
    c: f64,
    trials: usize,
    seed: u64,
    threads: Threads,
) -> Result<McStats> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let machines = instance.num_machines();
    // validates c before any trial runs
    IntervalParams::constant(c, 1.0, machines)?;
    let opt = sorted_opt(instance).value;
    let results = par::map_range(trials, threads, |i| {
        let trial_index = i as u64;
        let params = IntervalParams::new(c, draw_offsets(seed, trial_index, machines))?;
        let mut alg = IntervalAlgorithm::new(instance, &params)?;
        let alg_value = simulate(instance, &mut alg, |_, _| {}).alg_value();
        Ok(TrialRecord {
            trial_index,
            alg_value,
            opt_value: opt,
            ratio: ratio_or_one(alg_value, opt),
        })
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(McStats::from_records(records))
}
