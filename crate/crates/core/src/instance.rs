//! Instances, run traces, and the offline optimum.
//!
//! An instance is a complete bipartite graph with decomposable weights:
//! machine `u` has speed `s(u)`, job `v` has size `w(v)`, and the edge
//! weight is `s(u) * w(v)`. Jobs arrive in the order they are listed.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest side accepted by [`brute_force_opt`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// A validated instance. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    speeds: Vec<f64>,
    jobs: Vec<f64>,
    order: Vec<usize>,
}

/// Validates raw speeds and job sizes and derives the machine ordering.
pub fn validate_instance(speeds: &[f64], jobs: &[f64]) -> Result<Instance> {
    Instance::new(speeds.to_vec(), jobs.to_vec())
}

impl Instance {
    pub fn new(speeds: Vec<f64>, jobs: Vec<f64>) -> Result<Self> {
        for (index, &s) in speeds.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::NonFiniteValue {
                    what: "speed",
                    index,
                });
            }
            if s <= 0.0 {
                return Err(Error::NonPositiveSpeed { index, value: s });
            }
        }
        for (index, &w) in jobs.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteValue { what: "job", index });
            }
            if w <= 0.0 {
                return Err(Error::NonPositiveJob { index, value: w });
            }
        }
        if speeds.is_empty() && !jobs.is_empty() {
            return Err(Error::EmptyMachines);
        }
        let order = rank_descending(&speeds);
        Ok(Instance {
            speeds,
            jobs,
            order,
        })
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    /// Job sizes in arrival order.
    pub fn jobs(&self) -> &[f64] {
        &self.jobs
    }

    /// Machine indices fastest first; equal speeds keep index order.
    pub fn machine_order(&self) -> &[usize] {
        &self.order
    }

    pub fn num_machines(&self) -> usize {
        self.speeds.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn fastest_speed(&self) -> Option<f64> {
        self.order.first().map(|&i| self.speeds[i])
    }

    pub fn largest_job(&self) -> Option<f64> {
        self.jobs.iter().copied().reduce(f64::max)
    }

    /// The instance restricted to the first `len` arriving jobs.
    pub fn prefix(&self, len: usize) -> Instance {
        Instance {
            speeds: self.speeds.clone(),
            jobs: self.jobs[..len.min(self.jobs.len())].to_vec(),
            order: self.order.clone(),
        }
    }
}

/// Indices of `values` sorted descending, ties by index ascending.
pub(crate) fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps index order among equal values
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Totals of one online run against the offline optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueReport {
    pub alg_value: f64,
    pub opt_value: f64,
    /// `None` when the optimum is zero.
    pub ratio: Option<f64>,
}

impl ValueReport {
    pub fn new(alg_value: f64, opt_value: f64) -> Self {
        let ratio = (opt_value > 0.0).then(|| alg_value / opt_value);
        ValueReport {
            alg_value,
            opt_value,
            ratio,
        }
    }
}

/// One job handed to a machine during an online run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Placement {
    /// Arrival index of the job.
    pub job: usize,
    pub size: f64,
    /// Interval index the job fell into on this machine, for interval runs.
    pub interval: Option<i64>,
}

/// What an online algorithm did with every job.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    speeds: Vec<f64>,
    assigned: Vec<Vec<Placement>>,
    discarded: Vec<usize>,
}

impl RunTrace {
    pub(crate) fn new(speeds: &[f64]) -> Self {
        RunTrace {
            speeds: speeds.to_vec(),
            assigned: vec![Vec::new(); speeds.len()],
            discarded: Vec::new(),
        }
    }

    pub(crate) fn place(&mut self, machine: usize, placement: Placement) {
        self.assigned[machine].push(placement);
    }

    pub(crate) fn discard(&mut self, job: usize) {
        self.discarded.push(job);
    }

    /// Jobs handed to `machine`, in the order they arrived.
    pub fn assigned(&self, machine: usize) -> &[Placement] {
        &self.assigned[machine]
    }

    pub fn discarded(&self) -> &[usize] {
        &self.discarded
    }

    pub fn num_machines(&self) -> usize {
        self.assigned.len()
    }

    /// Largest job handed to `machine`, or 0 if it never received one.
    pub fn credited(&self, machine: usize) -> f64 {
        self.assigned[machine]
            .iter()
            .map(|p| p.size)
            .fold(0.0, f64::max)
    }

    /// `A_i`: speed times credited job.
    pub fn profit(&self, machine: usize) -> f64 {
        self.speeds[machine] * self.credited(machine)
    }

    pub fn alg_value(&self) -> f64 {
        (0..self.assigned.len()).map(|i| self.profit(i)).sum()
    }

    /// For each job, the machine it was handed to (`None` if discarded).
    pub fn machine_of_job(&self, num_jobs: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_jobs];
        for (m, list) in self.assigned.iter().enumerate() {
            for p in list {
                out[p.job] = Some(m);
            }
        }
        out
    }
}

/// The offline optimum together with its pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct OptSolution {
    pub value: f64,
    /// `(machine, job)` pairs: the i-th fastest machine with the i-th largest job.
    pub pairs: Vec<(usize, usize)>,
}

/// Job indices sorted by size descending, ties by arrival index.
pub fn jobs_by_size(instance: &Instance) -> Vec<usize> {
    rank_descending(instance.jobs())
}

/// Offline optimum: i-th largest job on the i-th fastest machine.
pub fn sorted_opt(instance: &Instance) -> OptSolution {
    let jobs = jobs_by_size(instance);
    let pairs: Vec<(usize, usize)> = instance.machine_order().iter().copied().zip(jobs).collect();
    let value = pairs
        .iter()
        .map(|&(m, j)| instance.speeds()[m] * instance.jobs()[j])
        .sum();
    OptSolution { value, pairs }
}

/// Exhaustive maximum over all one-to-one partial assignments.
pub fn brute_force_opt(instance: &Instance) -> Result<f64> {
    let (m, n) = (instance.num_machines(), instance.num_jobs());
    if m > BRUTE_FORCE_LIMIT || n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            machines: m,
            jobs: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    fn search(speeds: &[f64], jobs: &[f64], machine: usize, used: u32) -> f64 {
        if machine == speeds.len() {
            return 0.0;
        }
        // leave this machine empty
        let mut best = search(speeds, jobs, machine + 1, used);
        for (j, &w) in jobs.iter().enumerate() {
            if used & (1 << j) == 0 {
                let v = speeds[machine] * w + search(speeds, jobs, machine + 1, used | (1 << j));
                best = best.max(v);
            }
        }
        best
    }
    Ok(search(instance.speeds(), instance.jobs(), 0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validation_examples() {
        let inst = validate_instance(&[1.0], &[]).unwrap();
        assert_eq!(inst.num_jobs(), 0);

        assert!(matches!(
            validate_instance(&[1.0, -2.0], &[1.0]),
            Err(Error::NonPositiveSpeed { index: 1, .. })
        ));
        assert!(matches!(
            validate_instance(&[1.0], &[0.0]),
            Err(Error::NonPositiveJob { index: 0, .. })
        ));
        assert!(matches!(
            validate_instance(&[f64::NAN], &[]),
            Err(Error::NonFiniteValue { what: "speed", .. })
        ));
        assert!(matches!(
            validate_instance(&[1.0], &[f64::INFINITY]),
            Err(Error::NonFiniteValue { what: "job", .. })
        ));
        assert_eq!(validate_instance(&[], &[1.0]), Err(Error::EmptyMachines));
        assert!(validate_instance(&[], &[]).is_ok());

        let inst = validate_instance(&[0.5, 0.5, 1.0], &[3.0]).unwrap();
        assert_eq!(inst.machine_order(), &[2, 0, 1]);
    }

    #[test]
    fn sorted_opt_examples() {
        let inst = validate_instance(&[2.0, 1.0], &[3.0, 5.0]).unwrap();
        let opt = sorted_opt(&inst);
        assert_eq!(opt.value, 13.0);
        assert_eq!(opt.pairs, vec![(0, 1), (1, 0)]);

        let inst = validate_instance(&[1.0, 0.25, 0.25], &[2.0, 4.0, 8.0]).unwrap();
        assert_eq!(sorted_opt(&inst).value, 9.5);

        let inst = validate_instance(&[1.0], &[]).unwrap();
        assert_eq!(sorted_opt(&inst).value, 0.0);
    }

    #[test]
    fn equal_jobs_pair_in_arrival_order() {
        let inst = validate_instance(&[1.0, 2.0], &[5.0, 5.0, 1.0]).unwrap();
        let opt = sorted_opt(&inst);
        assert_eq!(opt.pairs, vec![(1, 0), (0, 1)]);
        assert_eq!(opt.value, 15.0);
    }

    #[test]
    fn brute_force_examples() {
        let bf = |s: &[f64], j: &[f64]| brute_force_opt(&validate_instance(s, j).unwrap()).unwrap();
        assert_eq!(bf(&[2.0, 1.0], &[3.0, 5.0]), 13.0);
        assert_eq!(bf(&[1.0], &[7.0]), 7.0);
        assert_eq!(bf(&[1.0, 1.0], &[5.0, 5.0]), 10.0);
        let big = validate_instance(&[1.0; 9], &[1.0]).unwrap();
        assert!(matches!(brute_force_opt(&big), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn trace_accounting() {
        let mut t = RunTrace::new(&[2.0, 1.0]);
        t.place(
            0,
            Placement {
                job: 0,
                size: 1.0,
                interval: None,
            },
        );
        t.place(
            0,
            Placement {
                job: 1,
                size: 3.0,
                interval: None,
            },
        );
        t.discard(2);
        assert_eq!(t.credited(0), 3.0);
        assert_eq!(t.credited(1), 0.0);
        assert_eq!(t.alg_value(), 6.0);
        assert_eq!(t.machine_of_job(3), vec![Some(0), Some(0), None]);
        assert_eq!(ValueReport::new(1.0, 0.0).ratio, None);
    }

    fn small_instance() -> impl Strategy<Value = Instance> {
        (
            prop::collection::vec(0.01f64..10.0, 1..6),
            prop::collection::vec(0.01f64..10.0, 0..6),
        )
            .prop_map(|(s, j)| Instance::new(s, j).unwrap())
    }

    proptest! {
        #[test]
        fn sorted_matches_brute_force(inst in small_instance()) {
            let fast = sorted_opt(&inst).value;
            let slow = brute_force_opt(&inst).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0));
        }

        #[test]
        fn opt_is_monotone(inst in small_instance(), extra in 0.01f64..10.0) {
            let base = sorted_opt(&inst).value;
            let mut jobs = inst.jobs().to_vec();
            jobs.push(extra);
            let more_jobs = Instance::new(inst.speeds().to_vec(), jobs).unwrap();
            prop_assert!(sorted_opt(&more_jobs).value >= base - 1e-9);
            let mut speeds = inst.speeds().to_vec();
            speeds.push(extra);
            let more_machines = Instance::new(speeds, inst.jobs().to_vec()).unwrap();
            prop_assert!(sorted_opt(&more_machines).value >= base - 1e-9);
        }

        #[test]
        fn opt_scales_linearly(inst in small_instance(), gamma in 0.1f64..10.0) {
            let base = sorted_opt(&inst).value;
            let s: Vec<f64> = inst.speeds().iter().map(|x| x * gamma).collect();
            let j: Vec<f64> = inst.jobs().iter().map(|x| x * gamma).collect();
            let by_speed = sorted_opt(&Instance::new(s, inst.jobs().to_vec()).unwrap()).value;
            let by_job = sorted_opt(&Instance::new(inst.speeds().to_vec(), j).unwrap()).value;
            prop_assert!((by_speed - gamma * base).abs() <= 1e-9 * (1.0 + gamma * base));
            prop_assert!((by_job - gamma * base).abs() <= 1e-9 * (1.0 + gamma * base));
        }
    }
}
