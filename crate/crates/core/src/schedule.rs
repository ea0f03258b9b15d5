//! Preemptive per-machine schedules at unit-slot granularity.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::instance::{ClassIndex, Instance, JobId, Time};
use crate::rational::{int, ratio, ExactValue, Rational};

/// Job `job` runs in slots `start..end` (half-open).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub job: JobId,
    pub start: Time,
    pub end: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub machines: Vec<Vec<Slice>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Shortest remaining processing time.
    Srpt,
    /// Lowest size class first; within a class by availability, then id.
    ClassSjf,
    /// Earliest availability first.
    Fifo,
}

/// A job as seen by a single-machine simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimJob {
    pub id: JobId,
    pub available: Time,
    pub p: Time,
    pub class: ClassIndex,
}

impl SimJob {
    pub fn new(id: JobId, available: Time, p: Time) -> Self {
        SimJob {
            id,
            available,
            p,
            class: ClassIndex::of(p),
        }
    }
}

/// Work-conserving unit-slot simulation of one machine.
///
/// Preemption happens only at slot boundaries; since priorities change only
/// on arrivals and completions the simulation jumps between those events.
pub fn simulate(jobs: &[SimJob], policy: Policy) -> Vec<Slice> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&j| (jobs[j].available, jobs[j].id));
    let mut remaining: Vec<Time> = jobs.iter().map(|j| j.p).collect();
    let mut slices: Vec<Slice> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut now: Time = 0;
    let mut left = jobs.len();
    while left > 0 {
        while next < order.len() && jobs[order[next]].available <= now {
            active.push(order[next]);
            next += 1;
        }
        if active.is_empty() {
            now = jobs[order[next]].available;
            continue;
        }
        let key = |&j: &usize| {
            let job = &jobs[j];
            match policy {
                Policy::Srpt => (remaining[j], 0, job.available, job.id),
                Policy::ClassSjf => (0, job.class.0, job.available, job.id),
                Policy::Fifo => (0, 0, job.available, job.id),
            }
        };
        let pos = (0..active.len())
            .min_by_key(|&a| key(&active[a]))
            .expect("active set is non-empty");
        let j = active[pos];
        let next_arrival = order.get(next).map(|&k| jobs[k].available);
        let run = match next_arrival {
            Some(t) if t - now < remaining[j] => t - now,
            _ => remaining[j],
        };
        match slices.last_mut() {
            Some(s) if s.job == jobs[j].id && s.end == now => s.end += run,
            _ => slices.push(Slice {
                job: jobs[j].id,
                start: now,
                end: now + run,
            }),
        }
        remaining[j] -= run;
        now += run;
        if remaining[j] == 0 {
            active.swap_remove(pos);
            left -= 1;
        }
    }
    slices
}

/// Per-job outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobMetrics {
    pub job: JobId,
    pub machine: usize,
    pub release: Time,
    pub p: Time,
    pub completion: Time,
    pub flow: Time,
    /// Exact fractional flow-time.
    #[serde(skip)]
    pub fractional: Rational,
    #[serde(rename = "fractional")]
    pub fractional_exact: ExactValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total_flow: Time,
    pub max_flow: Time,
    #[serde(skip)]
    pub total_fractional: Rational,
    #[serde(rename = "total_fractional_flow")]
    pub total_fractional_exact: ExactValue,
    pub jobs: Vec<JobMetrics>,
}

impl Default for Metrics {
    fn default() -> Self {
        Metrics {
            total_flow: 0,
            max_flow: 0,
            total_fractional: Rational::zero(),
            total_fractional_exact: ExactValue::from(0),
            jobs: Vec::new(),
        }
    }
}

/// Sum of `(s - r)` over slots `s` in `start..end`.
pub fn slot_offset_sum(start: Time, end: Time, release: Time) -> Time {
    let len = end - start;
    len * (start + end - 1) / 2 - len * release
}

/// A schedule violation found by [`Schedule::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BusyTwice { machine: usize, slot: Time },
    BeforeRelease { job: JobId, start: Time, release: Time },
    EmptySlice { job: JobId, machine: usize },
    UnknownJob { job: JobId },
    Ineligible { job: JobId, machine: usize },
    Migrated { job: JobId },
    WrongAmount { job: JobId, processed: Time, required: Time },
    Missing { job: JobId },
    MachineCount { got: usize, expected: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BusyTwice { machine, slot } => {
                write!(f, "machine {machine} busy twice at slot {slot}")
            }
            Violation::BeforeRelease { job, start, release } => {
                write!(f, "job {job} starts at {start} before its release {release}")
            }
            Violation::EmptySlice { job, machine } => {
                write!(f, "empty slice for job {job} on machine {machine}")
            }
            Violation::UnknownJob { job } => write!(f, "unknown job {job}"),
            Violation::Ineligible { job, machine } => {
                write!(f, "job {job} cannot run on machine {machine}")
            }
            Violation::Migrated { job } => write!(f, "job {job} runs on more than one machine"),
            Violation::WrongAmount {
                job,
                processed,
                required,
            } => write!(f, "job {job} processed {processed} of {required}"),
            Violation::Missing { job } => write!(f, "job {job} never runs"),
            Violation::MachineCount { got, expected } => {
                write!(f, "schedule has {got} machines, instance has {expected}")
            }
        }
    }
}

impl Schedule {
    pub fn empty(m: usize) -> Self {
        Schedule {
            machines: vec![Vec::new(); m],
        }
    }

    /// Machine of each job id, if it appears.
    pub fn machine_of(&self) -> HashMap<JobId, usize> {
        let mut out = HashMap::new();
        for (i, slices) in self.machines.iter().enumerate() {
            for s in slices {
                out.entry(s.job).or_insert(i);
            }
        }
        out
    }

    pub fn makespan(&self) -> Time {
        self.machines
            .iter()
            .flatten()
            .map(|s| s.end)
            .max()
            .unwrap_or(0)
    }

    /// All listed violations; empty iff the schedule is a valid
    /// non-migratory preemptive schedule of `inst`.
    pub fn validate(&self, inst: &Instance) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.machines.len() != inst.m() {
            out.push(Violation::MachineCount {
                got: self.machines.len(),
                expected: inst.m(),
            });
        }
        let mut seen_on: HashMap<JobId, usize> = HashMap::new();
        let mut processed: HashMap<JobId, Time> = HashMap::new();
        for (i, slices) in self.machines.iter().enumerate() {
            let mut sorted: Vec<&Slice> = slices.iter().collect();
            sorted.sort_by_key(|s| (s.start, s.end));
            for w in sorted.windows(2) {
                if w[1].start < w[0].end {
                    out.push(Violation::BusyTwice {
                        machine: i,
                        slot: w[1].start,
                    });
                }
            }
            for s in slices {
                if s.end <= s.start {
                    out.push(Violation::EmptySlice { job: s.job, machine: i });
                    continue;
                }
                let Some(idx) = inst.index_of(s.job) else {
                    out.push(Violation::UnknownJob { job: s.job });
                    continue;
                };
                let job = inst.job(idx);
                if s.start < job.release {
                    out.push(Violation::BeforeRelease {
                        job: s.job,
                        start: s.start,
                        release: job.release,
                    });
                }
                if job.on(i).is_none() {
                    out.push(Violation::Ineligible { job: s.job, machine: i });
                }
                match seen_on.get(&s.job) {
                    Some(&other) if other != i => out.push(Violation::Migrated { job: s.job }),
                    Some(_) => {}
                    None => {
                        seen_on.insert(s.job, i);
                    }
                }
                *processed.entry(s.job).or_insert(0) += s.end - s.start;
            }
        }
        for job in inst.jobs() {
            match (seen_on.get(&job.id), processed.get(&job.id)) {
                (Some(&i), Some(&amount)) => {
                    if let Some(p) = job.on(i) {
                        if amount != p {
                            out.push(Violation::WrongAmount {
                                job: job.id,
                                processed: amount,
                                required: p,
                            });
                        }
                    }
                }
                _ => out.push(Violation::Missing { job: job.id }),
            }
        }
        out.dedup();
        out
    }

    /// Flow metrics against `inst`. The schedule must be valid.
    pub fn metrics(&self, inst: &Instance) -> Metrics {
        let mut per_job: BTreeMap<usize, (usize, Time, Time)> = BTreeMap::new();
        for (i, slices) in self.machines.iter().enumerate() {
            for s in slices {
                let idx = inst.index_of(s.job).expect("schedule job in instance");
                let release = inst.job(idx).release;
                let e = per_job.entry(idx).or_insert((i, 0, 0));
                e.1 = e.1.max(s.end);
                e.2 += slot_offset_sum(s.start, s.end, release);
            }
        }
        let mut m = Metrics::default();
        for (idx, (machine, completion, offsets)) in per_job {
            let job = inst.job(idx);
            let p = job.on(machine).expect("job eligible on its machine");
            let flow = completion - job.release;
            let fractional = ratio(offsets, p);
            m.total_flow += flow;
            m.max_flow = m.max_flow.max(flow);
            m.total_fractional += &fractional;
            m.jobs.push(JobMetrics {
                job: job.id,
                machine,
                release: job.release,
                p,
                completion,
                flow,
                fractional_exact: ExactValue::from(&fractional),
                fractional,
            });
        }
        m.total_fractional_exact = ExactValue::from(&m.total_fractional);
        m
    }

    /// Maximum number of partially processed jobs of one class on one
    /// machine at any slot boundary. `class_of(job_id, machine)` gives the
    /// class used for grouping.
    pub fn max_partial_per_class(
        &self,
        inst: &Instance,
        class_of: impl Fn(JobId, usize) -> ClassIndex,
    ) -> usize {
        let mut worst = 0;
        for (i, slices) in self.machines.iter().enumerate() {
            let mut events: Vec<Time> = slices.iter().flat_map(|s| [s.start, s.end]).collect();
            events.sort_unstable();
            events.dedup();
            for &t in &events {
                let mut partial: BTreeMap<ClassIndex, usize> = BTreeMap::new();
                let mut done: HashMap<JobId, Time> = HashMap::new();
                for s in slices {
                    if s.start < t {
                        *done.entry(s.job).or_insert(0) += s.end.min(t) - s.start;
                    }
                }
                for (job, amount) in done {
                    let idx = inst.index_of(job).expect("job in instance");
                    let p = inst.job(idx).on(i).expect("eligible");
                    if amount > 0 && amount < p {
                        *partial.entry(class_of(job, i)).or_insert(0) += 1;
                    }
                }
                worst = worst.max(partial.values().copied().max().unwrap_or(0));
            }
        }
        worst
    }
}

/// Remaining-volume step functions per (machine, class).
///
/// `schedule[(i, k)][t]` is the processing left after slot `t` of class-`k`
/// jobs on machine `i` released by `t`. `tentative[(i, k)][t]` is the volume
/// of class-`k` jobs released by `t` whose availability slot is after `t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VolumeTrace {
    pub horizon: Time,
    pub schedule: BTreeMap<(usize, ClassIndex), Vec<Time>>,
    pub tentative: BTreeMap<(usize, ClassIndex), Vec<Time>>,
}

impl VolumeTrace {
    /// `available[idx]` is the availability slot of job index `idx`
    /// (the tentative slot for converted schedules).
    pub fn build(inst: &Instance, schedule: &Schedule, available: Option<&[Time]>) -> Self {
        let horizon = schedule.makespan().max(inst.max_release() + 1);
        let mut trace = VolumeTrace {
            horizon,
            ..Default::default()
        };
        for (i, slices) in schedule.machines.iter().enumerate() {
            let mut by_job: BTreeMap<usize, Vec<&Slice>> = BTreeMap::new();
            for s in slices {
                by_job
                    .entry(inst.index_of(s.job).expect("job in instance"))
                    .or_default()
                    .push(s);
            }
            for (idx, js) in by_job {
                let job = inst.job(idx);
                let p = job.on(i).expect("eligible");
                let k = ClassIndex::of(p);
                let sv = trace
                    .schedule
                    .entry((i, k))
                    .or_insert_with(|| vec![0; horizon as usize]);
                for t in job.release..horizon {
                    let done: Time = js
                        .iter()
                        .map(|s| (s.end.min(t + 1) - s.start).max(0))
                        .sum();
                    if done >= p {
                        break;
                    }
                    sv[t as usize] += p - done;
                }
                let tv = trace
                    .tentative
                    .entry((i, k))
                    .or_insert_with(|| vec![0; horizon as usize]);
                if let Some(av) = available {
                    for t in job.release..av[idx].min(horizon) {
                        tv[t as usize] += p;
                    }
                }
            }
        }
        trace
    }

    pub fn schedule_sum(&self, machine: usize, class: ClassIndex) -> Time {
        self.schedule
            .get(&(machine, class))
            .map_or(0, |v| v.iter().sum())
    }
}

/// `Σ (s - r_j)` over every processed unit slot of class-`k` jobs on `machine`.
pub fn offset_volume(inst: &Instance, schedule: &Schedule, machine: usize, class: ClassIndex) -> Time {
    schedule.machines[machine]
        .iter()
        .filter_map(|s| {
            let job = inst.job(inst.index_of(s.job)?);
            (ClassIndex::of(job.on(machine)?) == class)
                .then(|| slot_offset_sum(s.start, s.end, job.release))
        })
        .sum()
}

/// Convenience for tests and oracles: simulate each machine on the given
/// assignment (job index -> machine) with availability at release.
pub fn schedule_assignment(inst: &Instance, assignment: &[usize], policy: Policy) -> Schedule {
    let mut per_machine: Vec<Vec<SimJob>> = vec![Vec::new(); inst.m()];
    for (idx, &i) in assignment.iter().enumerate() {
        let job = inst.job(idx);
        let p = job.on(i).expect("assignment uses eligible machines");
        per_machine[i].push(SimJob::new(job.id, job.release, p));
    }
    Schedule {
        machines: per_machine.iter().map(|js| simulate(js, policy)).collect(),
    }
}

/// Fractional flow of one slice, as a rational.
pub fn slice_fractional(s: &Slice, release: Time, p: Time) -> Rational {
    if p == 0 {
        return int(0);
    }
    ratio(slot_offset_sum(s.start, s.end, release), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;

    fn one_machine(jobs: &[(Time, Time)]) -> Instance {
        Instance::new(
            1,
            jobs.iter()
                .enumerate()
                .map(|(id, &(r, p))| Job::new(id as JobId, r, vec![Some(p)]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn srpt_example() {
        let inst = one_machine(&[(0, 3), (1, 1)]);
        let s = schedule_assignment(&inst, &[0, 0], Policy::Srpt);
        assert!(s.validate(&inst).is_empty());
        let m = s.metrics(&inst);
        let flows: Vec<Time> = m.jobs.iter().map(|j| j.flow).collect();
        assert_eq!(flows, vec![4, 1]);
        assert_eq!(m.total_flow, 5);
    }

    #[test]
    fn fifo_example() {
        let inst = one_machine(&[(0, 2), (1, 2)]);
        let s = schedule_assignment(&inst, &[0, 0], Policy::Fifo);
        let flows: Vec<Time> = s.metrics(&inst).jobs.iter().map(|j| j.flow).collect();
        assert_eq!(flows, vec![2, 3]);
    }

    #[test]
    fn class_sjf_prefers_lower_class() {
        let jobs = [SimJob::new(0, 0, 2), SimJob::new(1, 0, 1)];
        let slices = simulate(&jobs, Policy::ClassSjf);
        assert_eq!(
            slices,
            vec![
                Slice { job: 1, start: 0, end: 1 },
                Slice { job: 0, start: 1, end: 3 }
            ]
        );
    }

    #[test]
    fn single_job_runs_from_availability() {
        let slices = simulate(&[SimJob::new(9, 4, 3)], Policy::ClassSjf);
        assert_eq!(slices, vec![Slice { job: 9, start: 4, end: 7 }]);
    }

    #[test]
    fn fractional_flow_definition() {
        let inst = one_machine(&[(0, 2)]);
        let s = Schedule {
            machines: vec![vec![Slice { job: 0, start: 2, end: 4 }]],
        };
        let m = s.metrics(&inst);
        assert_eq!(m.jobs[0].fractional, ratio(5, 2));
        assert_eq!(m.jobs[0].flow, 4);
    }

    #[test]
    fn empty_schedule_metrics() {
        let m = Schedule::empty(2).metrics(&one_machine(&[(0, 1)]));
        assert_eq!((m.total_flow, m.max_flow), (0, 0));
        assert!(m.total_fractional.is_zero());
    }

    #[test]
    fn validation_reports_violations() {
        let inst = one_machine(&[(0, 2), (3, 1)]);
        let overlapping = Schedule {
            machines: vec![vec![
                Slice { job: 0, start: 0, end: 2 },
                Slice { job: 1, start: 1, end: 2 },
            ]],
        };
        let v = overlapping.validate(&inst);
        assert!(v.contains(&Violation::BusyTwice { machine: 0, slot: 1 }));
        assert!(v.contains(&Violation::BeforeRelease { job: 1, start: 1, release: 3 }));
        assert_eq!(v[0].to_string(), "machine 0 busy twice at slot 1");

        let ok = schedule_assignment(&inst, &[0, 0], Policy::Srpt);
        assert!(ok.validate(&inst).is_empty());

        let missing = Schedule {
            machines: vec![vec![Slice { job: 0, start: 0, end: 1 }]],
        };
        let v = missing.validate(&inst);
        assert!(v.contains(&Violation::WrongAmount { job: 0, processed: 1, required: 2 }));
        assert!(v.contains(&Violation::Missing { job: 1 }));
    }

    #[test]
    fn flow_accounting_identity_on_small_case() {
        let inst = one_machine(&[(0, 3), (1, 1), (1, 4)]);
        let s = schedule_assignment(&inst, &[0, 0, 0], Policy::Srpt);
        let trace = VolumeTrace::build(&inst, &s, None);
        for k in 0..3 {
            let k = ClassIndex(k);
            assert_eq!(trace.schedule_sum(0, k), offset_volume(&inst, &s, 0, k));
        }
    }

    #[test]
    fn preemption_at_arrival() {
        // SRPT: job 0 (p=5) preempted by job 1 (p=1) arriving at 2.
        let jobs = [SimJob::new(0, 0, 5), SimJob::new(1, 2, 1)];
        let slices = simulate(&jobs, Policy::Srpt);
        assert_eq!(
            slices,
            vec![
                Slice { job: 0, start: 0, end: 2 },
                Slice { job: 1, start: 2, end: 3 },
                Slice { job: 0, start: 3, end: 6 }
            ]
        );
    }
}
