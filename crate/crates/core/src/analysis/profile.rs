//! Structural quantities of the interval algorithm's analysis: the speed
//! profile of the optimum, the per-machine bound `Delta` on the loss of
//! optimum value, local maxima of the arrival sequence, and checkers that
//! replay runs and test the inequalities they must satisfy.

use serde::Serialize;

use crate::error::Result;
use crate::instance::{brute_force_opt, sorted_opt, Instance, RunTrace};
use crate::online::{run_interval, IntervalParams};

/// `s(y)`: speed of the optimum's machine holding the largest job `<= y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedProfile {
    /// `(job size, speed)` ascending by size, one entry per distinct size.
    breakpoints: Vec<(f64, f64)>,
}

impl SpeedProfile {
    pub fn from_instance(instance: &Instance) -> Self {
        let opt = sorted_opt(instance);
        let mut speed_of_job = vec![0.0; instance.num_jobs()];
        for &(m, j) in &opt.pairs {
            speed_of_job[j] = instance.speeds()[m];
        }
        let mut points: Vec<(f64, f64)> =
            instance.jobs().iter().copied().zip(speed_of_job).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        // equal sizes: keep the fastest holder
        let mut breakpoints: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for (size, speed) in points {
            match breakpoints.last_mut() {
                Some(last) if last.0 == size => last.1 = last.1.max(speed),
                _ => breakpoints.push((size, speed)),
            }
        }
        SpeedProfile { breakpoints }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn speed_at(&self, y: f64) -> f64 {
        let n = self.breakpoints.partition_point(|&(size, _)| size <= y);
        if n == 0 {
            0.0
        } else {
            self.breakpoints[n - 1].1
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

pub fn speed_profile(instance: &Instance) -> SpeedProfile {
    SpeedProfile::from_instance(instance)
}

/// The bound `Delta = s1 W - s(w) (W - w) + sum_k w_k s(w_k)` on how much
/// the optimum drops when the fastest machine and its jobs are removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaBreakdown {
    /// Largest job on the fastest machine (0 if none).
    pub w: f64,
    /// The fastest machine's other jobs, descending.
    pub w_ks: Vec<f64>,
    pub fastest_speed: f64,
    pub largest_job: f64,
    pub delta: f64,
}

/// `fastest_trace` holds the sizes the fastest machine received, in any
/// order. An empty trace gives `Delta = s1 W`.
pub fn delta_first_machine(instance: &Instance, fastest_trace: &[f64]) -> DeltaBreakdown {
    let profile = SpeedProfile::from_instance(instance);
    let s1 = instance.fastest_speed().unwrap_or(0.0);
    let big_w = instance.largest_job().unwrap_or(0.0);
    let mut sizes = fastest_trace.to_vec();
    sizes.sort_by(|a, b| b.total_cmp(a));
    let (w, w_ks) = match sizes.split_first() {
        Some((&w, rest)) => (w, rest.to_vec()),
        None => (0.0, Vec::new()),
    };
    let mut delta = s1 * big_w;
    if w > 0.0 {
        delta -= profile.speed_at(w) * (big_w - w);
    }
    delta += w_ks
        .iter()
        .map(|&wk| wk * profile.speed_at(wk))
        .sum::<f64>();
    DeltaBreakdown {
        w,
        w_ks,
        fastest_speed: s1,
        largest_job: big_w,
        delta,
    }
}

/// Rescales sizes so the largest becomes exactly `c`.
pub fn normalize_jobs(jobs: &[f64], c: f64) -> Vec<f64> {
    let max = jobs.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return jobs.to_vec();
    }
    let scale = c / max;
    jobs.iter()
        .map(|&w| if w == max { c } else { w * scale })
        .collect()
}

/// Jobs larger than every job before them, for a sequence normalized so
/// that its largest job is `c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMaxima {
    c: f64,
    maxima: Vec<f64>,
}

impl LocalMaxima {
    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }

    /// Smallest local maximum in `(y, c y]`, or 0.
    pub fn m_s(&self, y: f64) -> f64 {
        let i = self.maxima.partition_point(|&m| m <= y);
        match self.maxima.get(i) {
            Some(&m) if m <= self.c * y => m,
            _ => 0.0,
        }
    }

    /// `u0 = m_S(1)`.
    pub fn u0(&self) -> f64 {
        self.m_s(1.0)
    }
}

pub fn local_maxima_ms(jobs: &[f64], c: f64) -> LocalMaxima {
    let mut maxima = Vec::new();
    let mut top = f64::NEG_INFINITY;
    for &w in jobs {
        if w > top {
            maxima.push(w);
            top = w;
        }
    }
    LocalMaxima { c, maxima }
}

/// Which offline optimum the checkers use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptOracle {
    Sorted,
    /// Exhaustive search; limited to small sub-instances.
    BruteForce,
}

impl OptOracle {
    fn value(self, instance: &Instance) -> Result<f64> {
        match self {
            OptOracle::Sorted => Ok(sorted_opt(instance).value),
            OptOracle::BruteForce => brute_force_opt(instance),
        }
    }
}

/// One machine of a replayed interval run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Step {
    pub rank: usize,
    pub machine: usize,
    pub speed: f64,
    /// Jobs that reached this machine (declined by all faster ones).
    pub jobs_seen: usize,
    pub opt: f64,
    pub opt_next: f64,
    pub delta: f64,
    /// `A_i`.
    pub profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Report {
    pub steps: Vec<Lemma3Step>,
    pub opt: f64,
    pub total_delta: f64,
    /// `max_i (OPT_i - OPT_{i+1} - Delta_i)`; positive means violated.
    pub max_step_violation: f64,
    /// `OPT_1 - sum_i Delta_i`; positive means violated.
    pub sum_violation: f64,
}

impl Lemma3Report {
    pub fn max_violation(&self) -> f64 {
        self.max_step_violation.max(self.sum_violation)
    }

    /// Violations measured relative to `max(1, OPT)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation() <= tol * self.opt.max(1.0)
    }
}

/// Per rank, the machine index, its received sizes, and the sub-instance
/// of slower machines and the jobs that reached it.
struct Replay {
    trace: RunTrace,
    subinstances: Vec<Instance>,
}

fn replay(instance: &Instance, params: &IntervalParams) -> Result<Replay> {
    let (trace, _) = run_interval(instance, params)?;
    let order = instance.machine_order();
    let mut rank_of = vec![0; order.len()];
    for (r, &m) in order.iter().enumerate() {
        rank_of[m] = r;
    }
    let accepted_rank: Vec<usize> = trace
        .machine_of_job(instance.num_jobs())
        .into_iter()
        .map(|m| m.map_or(usize::MAX, |m| rank_of[m]))
        .collect();
    let mut subinstances = Vec::with_capacity(order.len());
    for r in 0..order.len() {
        let speeds: Vec<f64> = order[r..].iter().map(|&m| instance.speeds()[m]).collect();
        let jobs: Vec<f64> = instance
            .jobs()
            .iter()
            .zip(&accepted_rank)
            .filter(|(_, &ar)| ar >= r)
            .map(|(&w, _)| w)
            .collect();
        subinstances.push(Instance::new(speeds, jobs)?);
    }
    Ok(Replay {
        trace,
        subinstances,
    })
}

/// Replays the interval run with offsets `x` (fastest first) and checks,
/// for every machine, `OPT_i - OPT_{i+1} <= Delta_i`, plus `sum Delta_i >= OPT`.
pub fn verify_lemma3_recursion(
    instance: &Instance,
    c: f64,
    x: &[f64],
    oracle: OptOracle,
) -> Result<Lemma3Report> {
    let params = IntervalParams::new(c, x.to_vec())?;
    let Replay {
        trace,
        subinstances,
    } = replay(instance, &params)?;
    let order = instance.machine_order();
    let mut opts = Vec::with_capacity(order.len() + 1);
    for sub in &subinstances {
        opts.push(oracle.value(sub)?);
    }
    opts.push(0.0);

    let mut steps = Vec::with_capacity(order.len());
    let mut max_step_violation = f64::NEG_INFINITY;
    let mut total_delta = 0.0;
    for (r, sub) in subinstances.iter().enumerate() {
        let machine = order[r];
        let sizes: Vec<f64> = trace.assigned(machine).iter().map(|p| p.size).collect();
        let delta = delta_first_machine(sub, &sizes).delta;
        total_delta += delta;
        max_step_violation = max_step_violation.max(opts[r] - opts[r + 1] - delta);
        steps.push(Lemma3Step {
            rank: r,
            machine,
            speed: instance.speeds()[machine],
            jobs_seen: sub.num_jobs(),
            opt: opts[r],
            opt_next: opts[r + 1],
            delta,
            profit: trace.profit(machine),
        });
    }
    let opt = opts[0];
    Ok(Lemma3Report {
        steps,
        opt,
        total_delta,
        max_step_violation: if order.is_empty() {
            0.0
        } else {
            max_step_violation
        },
        sum_violation: opt - total_delta,
    })
}

/// Outcome of [`check_interval_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StructureReport {
    /// Machines that received at least one job.
    pub machines_checked: usize,
    /// Machines where `u0 <= w` failed.
    pub u0_above_w: usize,
    /// Machines where `w1 <= u0` failed.
    pub w1_above_u0: usize,
    /// Machines whose interval indices did not strictly increase.
    pub non_increasing_indices: usize,
}

impl StructureReport {
    pub fn violations(&self) -> usize {
        self.u0_above_w + self.w1_above_u0 + self.non_increasing_indices
    }

    pub fn merge(self, other: StructureReport) -> StructureReport {
        StructureReport {
            machines_checked: self.machines_checked + other.machines_checked,
            u0_above_w: self.u0_above_w + other.u0_above_w,
            w1_above_u0: self.w1_above_u0 + other.w1_above_u0,
            non_increasing_indices: self.non_increasing_indices + other.non_increasing_indices,
        }
    }
}

/// Replays an interval run and checks, for each machine on the jobs that
/// reached it (normalized so the largest is `c`), that `u0 <= w` and
/// `w1 <= u0`, where `w >= w1` are its two largest jobs, and that its
/// interval indices strictly increase. Each machine runs the algorithm
/// as the fastest machine of its own sub-instance, so all are checked.
pub fn check_interval_structure(
    instance: &Instance,
    params: &IntervalParams,
) -> Result<StructureReport> {
    let c = params.c();
    let Replay {
        trace,
        subinstances,
    } = replay(instance, params)?;
    let mut report = StructureReport::default();
    for (r, sub) in subinstances.iter().enumerate() {
        let placed = trace.assigned(instance.machine_order()[r]);
        if placed.is_empty() {
            continue;
        }
        report.machines_checked += 1;
        if placed
            .windows(2)
            .any(|p| p[0].interval.unwrap_or(i64::MIN) >= p[1].interval.unwrap_or(i64::MIN))
        {
            report.non_increasing_indices += 1;
        }
        let seen = sub.jobs();
        let max = seen.iter().copied().fold(0.0, f64::max);
        let scale = |w: f64| if w == max { c } else { w * (c / max) };
        let maxima = local_maxima_ms(&normalize_jobs(seen, c), c);
        let u0 = maxima.u0();
        let mut sizes: Vec<f64> = placed.iter().map(|p| scale(p.size)).collect();
        sizes.sort_by(|a, b| b.total_cmp(a));
        if u0 > sizes[0] {
            report.u0_above_w += 1;
        }
        if sizes.len() > 1 && sizes[1] > u0 {
            report.w1_above_u0 += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(s: &[f64], j: &[f64]) -> Instance {
        Instance::new(s.to_vec(), j.to_vec()).unwrap()
    }

    #[test]
    fn profile_examples() {
        let p = speed_profile(&inst(&[1.0, 0.5], &[4.0, 3.0]));
        assert_eq!(p.speed_at(4.0), 1.0);
        assert_eq!(p.speed_at(100.0), 1.0);
        assert_eq!(p.speed_at(3.5), 0.5);
        assert_eq!(p.speed_at(3.0), 0.5);
        assert_eq!(p.speed_at(2.9), 0.0);

        let p = speed_profile(&inst(&[1.0], &[]));
        assert_eq!(p.speed_at(5.0), 0.0);

        let p = speed_profile(&inst(&[2.0], &[1.0, 5.0, 3.0]));
        assert_eq!(p.speed_at(1.0), 0.0);
        assert_eq!(p.speed_at(3.0), 0.0);
        assert_eq!(p.speed_at(5.0), 2.0);
        assert!(p.is_monotone());
    }

    #[test]
    fn delta_examples() {
        let i = inst(&[1.0, 0.5], &[4.0, 3.0]);
        let d = delta_first_machine(&i, &[4.0, 3.0]);
        assert_eq!(d.delta, 5.5);
        assert_eq!(d.w, 4.0);
        assert_eq!(d.w_ks, vec![3.0]);
        let opt1 = brute_force_opt(&i).unwrap();
        let opt2 = 0.0; // both jobs gone with the fast machine
        assert!(opt1 - opt2 <= d.delta);

        let single = inst(&[2.0], &[1.0, 6.0]);
        let d = delta_first_machine(&single, &[6.0]);
        assert_eq!(d.delta, 12.0);
        assert_eq!(d.delta, brute_force_opt(&single).unwrap());

        // w unmatched in the optimum, so s(w) = 0
        let i = inst(&[1.0], &[2.0, 9.0]);
        assert_eq!(delta_first_machine(&i, &[2.0]).delta, 9.0);
        assert_eq!(delta_first_machine(&i, &[]).delta, 9.0);
    }

    #[test]
    fn local_maxima_examples() {
        let lm = local_maxima_ms(&[1.0, 3.0, 2.0, 4.0], 4.0);
        assert_eq!(lm.maxima(), &[1.0, 3.0, 4.0]);
        assert_eq!(lm.u0(), 3.0);
        assert_eq!(lm.m_s(0.1), 0.0);
        assert_eq!(lm.m_s(0.25), 1.0);
        assert_eq!(normalize_jobs(&[1.0, 2.0, 0.5], 4.0), vec![2.0, 4.0, 1.0]);
    }

    #[test]
    fn lemma3_examples() {
        let r = verify_lemma3_recursion(
            &inst(&[3.0], &[1.0, 5.0, 2.0]),
            2.0,
            &[0.4],
            OptOracle::BruteForce,
        )
        .unwrap();
        assert_eq!(r.steps[0].delta, r.steps[0].opt);
        assert!(r.max_violation().abs() <= 1e-12);

        let r = verify_lemma3_recursion(
            &inst(&[1.0, 0.5], &[4.0, 3.0]),
            2.0,
            &[1.0, 1.0],
            OptOracle::BruteForce,
        )
        .unwrap();
        assert!(r.holds(1e-9));
        assert_eq!(r.steps[0].delta, 4.0);
        assert_eq!(r.steps[0].opt, 5.5);
        assert_eq!(r.steps[1].opt, 1.5);
        assert_eq!(r.steps[1].delta, 1.5);
        assert_eq!(r.opt, 5.5);
    }

    fn random_case() -> impl Strategy<Value = (Instance, Vec<f64>, f64)> {
        (1usize..=6, 0usize..=6, 2.72f64..6.0).prop_flat_map(|(m, n, c)| {
            (
                prop::collection::vec(0.01f64..10.0, m),
                prop::collection::vec(0.01f64..10.0, n),
                prop::collection::vec(1e-6f64..=1.0, m),
                Just(c),
            )
                .prop_map(|(s, j, x, c)| (Instance::new(s, j).unwrap(), x, c))
        })
    }

    proptest! {
        #[test]
        fn profile_is_monotone_and_tops_out(s in prop::collection::vec(0.1f64..5.0, 1..6),
                                            j in prop::collection::vec(0.1f64..5.0, 1..8)) {
            let i = inst(&s, &j);
            let p = speed_profile(&i);
            prop_assert!(p.is_monotone());
            prop_assert_eq!(p.speed_at(i.largest_job().unwrap()), i.fastest_speed().unwrap());
        }

        #[test]
        fn delta_bounds_the_loss((i, x, c) in random_case()) {
            let r = verify_lemma3_recursion(&i, c, &x, OptOracle::BruteForce).unwrap();
            prop_assert!(r.holds(1e-9), "{:?}", r);
            let (trace, _) = run_interval(&i, &IntervalParams::new(c, x.clone()).unwrap()).unwrap();
            let fastest = i.machine_order()[0];
            let sizes: Vec<f64> = trace.assigned(fastest).iter().map(|p| p.size).collect();
            let d = delta_first_machine(&i, &sizes);
            prop_assert!(d.delta >= d.fastest_speed * d.w - 1e-9);
        }

        #[test]
        fn structure_holds((i, x, c) in random_case()) {
            let rep = check_interval_structure(&i, &IntervalParams::new(c, x).unwrap()).unwrap();
            prop_assert_eq!(rep.violations(), 0);
        }
    }
}
