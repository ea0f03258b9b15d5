//! Brute-force optima for tiny instances.
//!
//! The non-migratory optimum is found by enumerating every job -> machine
//! assignment and scheduling each machine optimally: SRPT for total flow,
//! FIFO for maximum flow. An independent dynamic program over all unit-slot
//! schedules of one machine is provided to validate that reduction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Time};
use crate::schedule::{schedule_assignment, Policy, Schedule};

pub const DEFAULT_CAP: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} jobs, oracle cap is {cap}")]
    TooLarge { n: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    TotalFlow,
    MaxFlow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub value: Time,
    /// Machine per job index.
    pub assignment: Vec<usize>,
    pub schedule: Schedule,
}

/// Calls `visit` with every assignment of jobs to eligible machines, in
/// lexicographic order of the machine vector.
pub fn for_each_assignment(inst: &Instance, mut visit: impl FnMut(&[usize])) {
    let options: Vec<Vec<usize>> = inst
        .jobs()
        .iter()
        .map(|j| j.eligible().map(|(i, _)| i).collect())
        .collect();
    let mut pick = vec![0usize; inst.n()];
    let mut current: Vec<usize> = options.iter().map(|o| o[0]).collect();
    loop {
        visit(&current);
        let mut j = inst.n();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < options[j].len() {
                current[j] = options[j][pick[j]];
                break;
            }
            pick[j] = 0;
            current[j] = options[j][0];
        }
    }
}

fn best_over_assignments(
    inst: &Instance,
    cap: usize,
    policy: Policy,
    objective: Objective,
) -> Result<OracleResult, OracleError> {
    if inst.n() > cap {
        return Err(OracleError::TooLarge { n: inst.n(), cap });
    }
    let mut best: Option<OracleResult> = None;
    for_each_assignment(inst, |assignment| {
        let schedule = schedule_assignment(inst, assignment, policy);
        let m = schedule.metrics(inst);
        let value = match objective {
            Objective::TotalFlow => m.total_flow,
            Objective::MaxFlow => m.max_flow,
        };
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(OracleResult {
                value,
                assignment: assignment.to_vec(),
                schedule,
            });
        }
    });
    Ok(best.expect("at least one assignment exists"))
}

pub fn oracle_total(inst: &Instance) -> Result<OracleResult, OracleError> {
    oracle_total_with_cap(inst, DEFAULT_CAP)
}

pub fn oracle_total_with_cap(inst: &Instance, cap: usize) -> Result<OracleResult, OracleError> {
    best_over_assignments(inst, cap, Policy::Srpt, Objective::TotalFlow)
}

pub fn oracle_max(inst: &Instance) -> Result<OracleResult, OracleError> {
    oracle_max_with_cap(inst, DEFAULT_CAP)
}

pub fn oracle_max_with_cap(inst: &Instance, cap: usize) -> Result<OracleResult, OracleError> {
    best_over_assignments(inst, cap, Policy::Fifo, Objective::MaxFlow)
}

/// Optimum over *all* preemptive unit-slot schedules of one machine,
/// including ones that idle while work is pending. `jobs` are `(r, p)`.
pub fn exhaustive_single_machine(jobs: &[(Time, Time)], objective: Objective) -> Time {
    if jobs.is_empty() {
        return 0;
    }
    let limit = jobs.iter().map(|j| j.0).max().unwrap_or(0) + jobs.iter().map(|j| j.1).sum::<Time>();
    let mut memo: HashMap<(Time, Vec<Time>), Time> = HashMap::new();
    let start: Vec<Time> = jobs.iter().map(|j| j.1).collect();
    search(jobs, objective, limit, 0, start, &mut memo)
}

const UNREACHABLE: Time = Time::MAX / 4;

fn search(
    jobs: &[(Time, Time)],
    objective: Objective,
    limit: Time,
    t: Time,
    remaining: Vec<Time>,
    memo: &mut HashMap<(Time, Vec<Time>), Time>,
) -> Time {
    if remaining.iter().all(|&r| r == 0) {
        return 0;
    }
    if t >= limit {
        return UNREACHABLE;
    }
    if let Some(&v) = memo.get(&(t, remaining.clone())) {
        return v;
    }
    let alive: Vec<usize> = (0..jobs.len())
        .filter(|&j| jobs[j].0 <= t && remaining[j] > 0)
        .collect();
    let slot_cost = alive.len() as Time;
    let idle = search(jobs, objective, limit, t + 1, remaining.clone(), memo);
    let mut best = match objective {
        Objective::TotalFlow => idle.saturating_add(slot_cost),
        Objective::MaxFlow => idle,
    };
    for &j in &alive {
        let mut next = remaining.clone();
        next[j] -= 1;
        let rest = search(jobs, objective, limit, t + 1, next.clone(), memo);
        let value = match objective {
            Objective::TotalFlow => rest.saturating_add(slot_cost),
            Objective::MaxFlow => {
                let finished = if next[j] == 0 { t + 1 - jobs[j].0 } else { 0 };
                rest.max(finished)
            }
        };
        best = best.min(value);
    }
    memo.insert((t, remaining), best);
    best
}

/// Non-migratory optimum where each machine is solved by
/// [`exhaustive_single_machine`] instead of SRPT/FIFO.
pub fn exhaustive_nonmigratory(inst: &Instance, objective: Objective) -> Time {
    let mut best = UNREACHABLE;
    for_each_assignment(inst, |assignment| {
        let per_machine: Vec<Time> = (0..inst.m())
            .map(|i| {
                let jobs: Vec<(Time, Time)> = assignment
                    .iter()
                    .enumerate()
                    .filter(|&(_, &mi)| mi == i)
                    .map(|(idx, _)| {
                        let j = inst.job(idx);
                        (j.release, j.on(i).expect("eligible"))
                    })
                    .collect();
                exhaustive_single_machine(&jobs, objective)
            })
            .collect();
        let value = match objective {
            Objective::TotalFlow => per_machine.iter().sum(),
            Objective::MaxFlow => per_machine.iter().copied().max().unwrap_or(0),
        };
        best = best.min(value);
    });
    best
}
