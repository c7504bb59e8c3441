//! Hard instance families: one that traps greedy, a recurrence-driven
//! sequence that caps every deterministic algorithm near 0.618, and a
//! distribution over prefixes of a doubling sequence that caps randomized
//! algorithms near 0.8.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::numfmt::{g17, g17_array};

/// Relative slack used when checking the deterministic-bound conditions.
pub const CONDITION_RTOL: f64 = 1e-9;

const MAX_RECURRENCE_STEPS: usize = 1_000_000;

/// One machine of speed 1, `t = ceil(1/eps^2)` machines of speed `eps/2`,
/// and jobs `(1 - eps/2)^(-i)` for `i = 1..=t+1` in increasing order.
pub fn greedy_hard_instance(eps: f64) -> Result<Instance> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    let t_exact = 1.0 / (eps * eps);
    // 1/0.2^2 evaluates to 25.000000000000004
    let t = (t_exact - 1e-9 * t_exact).ceil() as usize;
    let q = 1.0 - eps / 2.0;
    let mut speeds = vec![1.0];
    speeds.extend(std::iter::repeat_n(eps / 2.0, t));
    let jobs = (1..=t + 1).map(|i| q.powi(-(i as i32))).collect();
    Instance::new(speeds, jobs)
}

/// `(a, r)`: target ratio and fast-machine speed of the deterministic
/// construction. The characteristic roots of the recurrence are
/// `(1 + sqrt 5)/2 +- i sqrt(delta)`.
pub fn det_ub_params(delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let sqrt5 = 5f64.sqrt();
    let num = 1.0 + (5.0 + 12.0 * delta + 4.0 * delta * delta).sqrt();
    Ok((
        num / (3.0 + sqrt5 + 2.0 * delta),
        num / (3.0 - sqrt5 + 2.0 * delta),
    ))
}

/// The deterministic construction: job sizes `w_0..=w_n` and the
/// parameters that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceParams {
    pub delta: f64,
    pub a: f64,
    pub r: f64,
    pub w: Vec<f64>,
    /// Index of the last job; also the number of slow machines.
    pub n: usize,
}

impl RecurrenceParams {
    /// One machine of speed `r`, `n` of speed 1, jobs `w` in order.
    pub fn instance(&self) -> Result<Instance> {
        let mut speeds = vec![self.r];
        speeds.extend(std::iter::repeat_n(1.0, self.n));
        Instance::new(speeds, self.w.clone())
    }

    /// Discriminant of `(ar - 1) z^2 - (a+1)(r-1) z + r`.
    pub fn discriminant(&self) -> f64 {
        let b = (self.a + 1.0) * (self.r - 1.0);
        b * b - 4.0 * self.r * (self.a * self.r - 1.0)
    }

    /// `{"a":..,"r":..,"delta":..,"w":[..]}` at 17 significant digits.
    pub fn sidecar_json(&self) -> String {
        format!(
            "{{\"a\":{},\"r\":{},\"delta\":{},\"w\":{}}}\n",
            g17(self.a),
            g17(self.r),
            g17(self.delta),
            g17_array(&self.w)
        )
    }
}

/// Iterates `(ar - 1) w_k = (a+1)(r-1) w_{k-1} - r w_{k-2}` from
/// `w_0 = 1`, `w_1 = (r - a)/(ar - 1)` up to the first `n` with
/// `w_n / w_{n-1} <= r/(r-1)`.
pub fn det_ub_sequence(delta: f64) -> Result<RecurrenceParams> {
    let (a, r) = det_ub_params(delta)?;
    let ar1 = a * r - 1.0;
    if ar1 <= 0.0 {
        return Err(Error::Domain(format!("a*r = {} must exceed 1", a * r)));
    }
    let stop = r / (r - 1.0);
    let mut w = vec![1.0, (r - a) / ar1];
    while w[w.len() - 1] / w[w.len() - 2] > stop {
        if w.len() > MAX_RECURRENCE_STEPS {
            return Err(Error::NonTermination {
                steps: MAX_RECURRENCE_STEPS,
            });
        }
        let k = w.len();
        let next = ((a + 1.0) * (r - 1.0) * w[k - 1] - r * w[k - 2]) / ar1;
        if !next.is_finite() {
            return Err(Error::NumericOverflow(format!(
                "recurrence term {k} is not finite"
            )));
        }
        w.push(next);
    }
    let n = w.len() - 1;
    Ok(RecurrenceParams { delta, a, r, w, n })
}

/// Which of the deterministic-bound conditions hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetUbCheck {
    /// `a r >= 1`.
    pub first: bool,
    /// Values of `k` in `1..=n` where `a (r w_k + sum_{j<k} w_j) >= r w_{k-1} + w_k` fails.
    pub middle_failures: Vec<usize>,
    /// `a (r w_n + sum_{j<n} w_j) >= r w_n`.
    pub last: bool,
    /// Strictly increasing sizes.
    pub increasing: bool,
    /// `|a (r w_1 + w_0) - (r w_0 + w_1)|` relative to the larger side.
    pub init_residual: f64,
    pub first_violation: Option<String>,
}

impl DetUbCheck {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn at_least(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - CONDITION_RTOL * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Checks the conditions that make every deterministic algorithm's ratio
/// at most `a` on some prefix of `w` (with one fast machine of speed `r`).
pub fn check_det_ub_conditions(a: f64, r: f64, w: &[f64]) -> DetUbCheck {
    let mut violations = Vec::new();
    let first = at_least(a * r, 1.0);
    if !first {
        violations.push(format!("a*r = {} < 1", a * r));
    }
    let increasing = w.windows(2).all(|p| p[0] < p[1]);
    if !increasing {
        violations.push("job sizes are not strictly increasing".to_string());
    }
    let mut middle_failures = Vec::new();
    let mut prefix_sum = w.first().copied().unwrap_or(0.0);
    for k in 1..w.len() {
        let lhs = a * (r * w[k] + prefix_sum);
        let rhs = r * w[k - 1] + w[k];
        if !at_least(lhs, rhs) {
            if middle_failures.is_empty() {
                violations.push(format!("prefix condition fails at k = {k}: {lhs} < {rhs}"));
            }
            middle_failures.push(k);
        }
        prefix_sum += w[k];
    }
    let last = match w.split_last() {
        Some((&wn, rest)) => {
            let lhs = a * (r * wn + rest.iter().sum::<f64>());
            let ok = at_least(lhs, r * wn);
            if !ok {
                violations.push(format!("final condition fails: {lhs} < {}", r * wn));
            }
            ok
        }
        None => true,
    };
    let init_residual = if w.len() >= 2 {
        let lhs = a * (r * w[1] + w[0]);
        let rhs = r * w[0] + w[1];
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
    } else {
        0.0
    };
    DetUbCheck {
        first,
        middle_failures,
        last,
        increasing,
        init_residual,
        first_violation: violations.into_iter().next(),
    }
}

/// Prefixes of the doubling sequence `2^1..2^n` on one speed-1 machine and
/// `n` speed-1/4 machines; prefix `i` appears with probability `c / 2^i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixDistribution {
    pub n: usize,
    pub sizes: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `c = 1 / (1 - 2^-n)`.
    pub normalizer: f64,
}

pub const RAND_UB_MAX_N: usize = 60;

pub fn rand_ub_family(n: usize) -> Result<PrefixDistribution> {
    if !(1..=RAND_UB_MAX_N).contains(&n) {
        return Err(Error::Domain(format!(
            "n must lie in 1..={RAND_UB_MAX_N}, got {n}"
        )));
    }
    let normalizer = 1.0 / (1.0 - 2f64.powi(-(n as i32)));
    let sizes = (1..=n).map(|i| 2f64.powi(i as i32)).collect();
    let probabilities = (1..=n)
        .map(|i| normalizer * 2f64.powi(-(i as i32)))
        .collect();
    Ok(PrefixDistribution {
        n,
        sizes,
        probabilities,
        normalizer,
    })
}

impl PrefixDistribution {
    /// The instance presenting the first `len` jobs.
    pub fn prefix_instance(&self, len: usize) -> Result<Instance> {
        let mut speeds = vec![1.0];
        speeds.extend(std::iter::repeat_n(0.25, self.n));
        Instance::new(speeds, self.sizes[..len.min(self.n)].to_vec())
    }

    pub fn full_instance(&self) -> Result<Instance> {
        self.prefix_instance(self.n)
    }

    /// Closed form `OPT_i = 2^i + (2^i - 1)/4`.
    ///
    /// This is a quarter above the optimum of `prefix_instance(i)`, which
    /// is `2^i + (2^i - 2)/4`; see [`Self::prefix_instance_opt`].
    pub fn prefix_opt(&self, len: usize) -> f64 {
        let p = 2f64.powi(len as i32);
        p + (p - 1.0) / 4.0
    }

    /// Exact optimum of `prefix_instance(len)`: the largest job on the fast
    /// machine, the rest at speed 1/4.
    pub fn prefix_instance_opt(&self, len: usize) -> f64 {
        let p = 2f64.powi(len as i32);
        p + (p - 2.0) / 4.0
    }
}
