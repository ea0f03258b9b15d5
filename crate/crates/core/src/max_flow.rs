//! Maximum flow-time: release-window feasibility LP, binary search on the
//! flow bound `D`, iterated rounding to a machine assignment and FIFO
//! assembly.
//!
//! `x(i, j)` is the volume of job `j` sent to machine `i`, allowed only when
//! `p_ij <= D`. Every job needs `Σ_i x(i, j) / p_ij >= 1`, and for every
//! machine and pair of release values `v <= w` the jobs released in `[v, w]`
//! carry at most `(w - v) + D` volume. Later rounds replace the windows by
//! groups of consecutive (by release, then id) surviving variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, JobId, Time};
use crate::lp::{
    solve_feasible_basic, solve_min_basic, verify_basic, BasicSolution, LinearProgram, LpError, Sense,
    SolveStatus, Tight,
};
use crate::rational::{int, ratio, Rational};
use crate::schedule::{schedule_assignment, Policy, Schedule};
use crate::total_flow::{ceil_log2, exact};
use crate::window::{max_window_excess, WindowExcess};

#[derive(Debug, Error)]
pub enum MaxFlowError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("round {round}: LP is infeasible")]
    Infeasible { round: usize },
    #[error("round {round}: solution is not a basic optimum")]
    NotBasic { round: usize },
    #[error("round cap {cap} exceeded with {left} jobs unassigned")]
    RoundCap { cap: usize, left: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// Jobs released in `[from, to]`.
    Window { from: Time, to: Time },
    /// A regrouped run of surviving variables; `padded` marks a short last
    /// group lifted to `2·p_max`.
    Group { padded: bool },
}

/// One capacity row: `Σ_{j in jobs} x(machine, j) <= size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub machine: usize,
    pub kind: RowKind,
    /// Job indices.
    pub jobs: Vec<usize>,
    #[serde(with = "exact")]
    pub size: Rational,
}

#[derive(Debug, Clone)]
pub struct MaxFlowLp {
    pub round: usize,
    pub d: Time,
    pub p_max: Time,
    pub lp: LinearProgram,
    /// `(machine, job index)` per LP variable.
    pub vars: Vec<(usize, usize)>,
    /// Unassigned job indices; row `r < jobs.len()` is the service row of `jobs[r]`.
    pub jobs: Vec<usize>,
    pub rows: Vec<CapacityRow>,
}

impl MaxFlowLp {
    pub fn is_capacity_row(&self, row: usize) -> bool {
        row >= self.jobs.len()
    }
}

/// Largest admissible `p_ij`, i.e. the largest finite `p_ij <= d`.
pub fn p_max_for(inst: &Instance, d: Time) -> Option<Time> {
    inst.jobs()
        .iter()
        .flat_map(|j| j.eligible().map(|(_, p)| p))
        .filter(|&p| p <= d)
        .max()
}

fn assemble(
    inst: &Instance,
    round: usize,
    d: Time,
    p_max: Time,
    vars: Vec<(usize, usize)>,
    jobs: Vec<usize>,
    rows: Vec<CapacityRow>,
) -> MaxFlowLp {
    let mut lp = LinearProgram::new();
    let index: HashMap<(usize, usize), usize> = vars
        .iter()
        .map(|&v| (v, lp.add_var(Rational::one())))
        .collect();
    let mut by_job: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for &(i, j) in &vars {
        let p = inst.p(i, j).expect("eligible");
        by_job.entry(j).or_default().push((index[&(i, j)], ratio(1, p)));
    }
    for j in &jobs {
        lp.add_constraint(by_job.remove(j).unwrap_or_default(), Sense::Ge, Rational::one());
    }
    for row in &rows {
        lp.add_constraint(
            row.jobs.iter().map(|&j| (index[&(row.machine, j)], Rational::one())),
            Sense::Le,
            row.size.clone(),
        );
    }
    MaxFlowLp {
        round,
        d,
        p_max,
        lp,
        vars,
        jobs,
        rows,
    }
}

/// The window LP for bound `d`, or `None` when some job has no machine
/// with `p_ij <= d`.
pub fn build_maxflow_lp(inst: &Instance, d: Time) -> Option<MaxFlowLp> {
    let mut vars = Vec::new();
    for (j, job) in inst.jobs().iter().enumerate() {
        let before = vars.len();
        vars.extend(job.eligible().filter(|&(_, p)| p <= d).map(|(i, _)| (i, j)));
        if vars.len() == before {
            return None;
        }
    }
    let p_max = p_max_for(inst, d).expect("some admissible pair");
    let releases: BTreeSet<Time> = inst.jobs().iter().map(|j| j.release).collect();
    let releases: Vec<Time> = releases.into_iter().collect();
    let mut rows = Vec::new();
    for i in 0..inst.m() {
        for (a, &from) in releases.iter().enumerate() {
            for &to in &releases[a..] {
                let jobs: Vec<usize> = vars
                    .iter()
                    .filter(|&&(mi, j)| {
                        let r = inst.job(j).release;
                        mi == i && from <= r && r <= to
                    })
                    .map(|&(_, j)| j)
                    .collect();
                if jobs.is_empty() {
                    continue;
                }
                rows.push(CapacityRow {
                    machine: i,
                    kind: RowKind::Window { from, to },
                    jobs,
                    size: int(to - from + d),
                });
            }
        }
    }
    Some(assemble(inst, 0, d, p_max, vars, (0..inst.n()).collect(), rows))
}

pub fn is_feasible(inst: &Instance, d: Time) -> Result<bool, LpError> {
    match build_maxflow_lp(inst, d) {
        None => Ok(false),
        Some(lp) => Ok(!solve_feasible_basic(&lp.lp)?.is_infeasible()),
    }
}

/// Search range `[max_j min_i p_ij, max_j r_j + Σ_j min_i p_ij]`.
pub fn search_range(inst: &Instance) -> (Time, Time) {
    let lo = inst.jobs().iter().map(|j| j.fastest().1).max().unwrap_or(0);
    let hi = inst.max_release() + inst.jobs().iter().map(|j| j.fastest().1).sum::<Time>();
    (lo, hi)
}

/// Smallest integer `D` whose window LP is feasible, with one vertex of it.
pub fn binary_search_d(inst: &Instance) -> Result<(Time, BasicSolution), MaxFlowError> {
    let (mut lo, mut hi) = search_range(inst);
    if !is_feasible(inst, hi)? {
        return Err(MaxFlowError::Invariant(format!("window LP infeasible at upper end D = {hi}")));
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if is_feasible(inst, mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if is_feasible(inst, lo - 1)? {
        return Err(MaxFlowError::Invariant(format!(
            "feasibility not monotone: D = {} feasible below D* = {lo}",
            lo - 1
        )));
    }
    let lp = build_maxflow_lp(inst, lo).expect("feasible bound admits every job");
    let sol = solve_feasible_basic(&lp.lp)?;
    Ok((lo, sol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineChoice {
    pub job: JobId,
    pub machine: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEntry {
    pub machine: usize,
    pub job: usize,
    #[serde(with = "exact")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRoundRecord {
    pub round: usize,
    pub unassigned: usize,
    pub fixed: Vec<MachineChoice>,
    pub variables: usize,
    pub support: usize,
    pub tight_capacity: usize,
    pub tight_capacity_all: usize,
    pub capacity_rows: usize,
    /// Positive variables of this round's solution.
    pub solution: Vec<VolumeEntry>,
    pub rows: Vec<CapacityRow>,
    pub carried_feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MaxTrace {
    pub d_star: Time,
    pub p_max: Time,
    pub rounds: Vec<MaxRoundRecord>,
}

impl MaxTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Debug, Clone)]
pub struct MaxSolution {
    pub d_star: Time,
    pub p_max: Time,
    /// Machine per job index.
    pub assignment: Vec<usize>,
    pub trace: MaxTrace,
    pub schedule: Schedule,
    pub realized: Time,
}

fn regroup(inst: &Instance, p_max: Time, survivors: &[((usize, usize), Rational)]) -> Vec<CapacityRow> {
    let threshold = int(2 * p_max);
    let mut rows = Vec::new();
    for i in 0..inst.m() {
        let mut members: Vec<&((usize, usize), Rational)> =
            survivors.iter().filter(|((mi, _), _)| *mi == i).collect();
        members.sort_by_key(|((_, j), _)| (inst.job(*j).release, inst.job(*j).id));
        let mut jobs = Vec::new();
        let mut sum = Rational::zero();
        for ((_, j), x) in members {
            jobs.push(*j);
            sum += x;
            if sum >= threshold {
                rows.push(CapacityRow {
                    machine: i,
                    kind: RowKind::Group { padded: false },
                    jobs: std::mem::take(&mut jobs),
                    size: std::mem::replace(&mut sum, Rational::zero()),
                });
            }
        }
        if !jobs.is_empty() {
            rows.push(CapacityRow {
                machine: i,
                kind: RowKind::Group { padded: true },
                jobs,
                size: threshold.clone(),
            });
        }
    }
    rows
}

/// One rounding step on the solution `sol` of `cur`.
pub fn round_once_max(
    inst: &Instance,
    cur: &MaxFlowLp,
    sol: &BasicSolution,
    trace: &mut MaxTrace,
) -> Result<MaxFlowLp, MaxFlowError> {
    let round = cur.round;
    if sol.is_infeasible() || !verify_basic(&cur.lp, sol) {
        return Err(MaxFlowError::NotBasic { round });
    }
    let support: Vec<((usize, usize), Rational)> = sol
        .support()
        .map(|v| (cur.vars[v], sol.values[v].clone()))
        .collect();
    let mut placed = vec![false; inst.n()];
    let mut fixed = Vec::new();
    for &((i, j), ref x) in &support {
        if *x == int(inst.p(i, j).expect("eligible")) && !placed[j] {
            placed[j] = true;
            fixed.push(MachineChoice {
                job: inst.job(j).id,
                machine: i,
            });
        }
    }
    fixed.sort_by_key(|c| c.job);
    let survivors: Vec<((usize, usize), Rational)> =
        support.iter().filter(|((_, j), _)| !placed[*j]).cloned().collect();
    let jobs: Vec<usize> = cur.jobs.iter().copied().filter(|&j| !placed[j]).collect();
    let rows = regroup(inst, cur.p_max, &survivors);
    let mut vars: Vec<(usize, usize)> = survivors.iter().map(|(v, _)| *v).collect();
    vars.sort();
    let next = assemble(inst, round + 1, cur.d, cur.p_max, vars, jobs, rows);

    let value: HashMap<(usize, usize), &Rational> = survivors.iter().map(|(v, x)| (*v, x)).collect();
    let carried: Vec<Rational> = next.vars.iter().map(|v| value[v].clone()).collect();
    let carried_feasible = next.lp.is_feasible_point(&carried);

    let tight_capacity = sol
        .tight
        .iter()
        .filter(|t| matches!(t, Tight::Row(r) if cur.is_capacity_row(*r)))
        .count();
    let tight_capacity_all = cur.lp.constraints()[cur.jobs.len()..]
        .iter()
        .filter(|c| c.is_tight(&sol.values))
        .count();
    trace.rounds.push(MaxRoundRecord {
        round,
        unassigned: cur.jobs.len(),
        fixed,
        variables: cur.vars.len(),
        support: support.len(),
        tight_capacity,
        tight_capacity_all,
        capacity_rows: cur.rows.len(),
        solution: support
            .into_iter()
            .map(|((machine, job), value)| VolumeEntry { machine, job, value })
            .collect(),
        rows: cur.rows.clone(),
        carried_feasible,
    });
    if !carried_feasible {
        return Err(MaxFlowError::Invariant(format!(
            "round {round}: carried solution infeasible for the next LP"
        )));
    }
    Ok(next)
}

pub fn round_cap(n: usize) -> usize {
    2 * ceil_log2(n) + 4
}

/// Binary search, iterated rounding and FIFO assembly.
pub fn solve_max(inst: &Instance) -> Result<MaxSolution, MaxFlowError> {
    let (d_star, _) = binary_search_d(inst)?;
    let mut cur = build_maxflow_lp(inst, d_star).expect("D* admits every job");
    let p_max = cur.p_max;
    let mut trace = MaxTrace {
        d_star,
        p_max,
        rounds: Vec::new(),
    };
    let cap = round_cap(inst.n());
    let mut assignment: Vec<Option<usize>> = vec![None; inst.n()];
    loop {
        if cur.round >= cap {
            return Err(MaxFlowError::RoundCap {
                cap,
                left: cur.jobs.len(),
            });
        }
        // Minimizing total volume keeps every service row tight.
        let sol = solve_min_basic(&cur.lp)?;
        if sol.status != SolveStatus::Optimal {
            return Err(MaxFlowError::Infeasible { round: cur.round });
        }
        let next = round_once_max(inst, &cur, &sol, &mut trace)?;
        for c in &trace.rounds.last().expect("just pushed").fixed {
            assignment[inst.index_of(c.job).expect("job in instance")] = Some(c.machine);
        }
        if next.jobs.is_empty() {
            break;
        }
        cur = next;
    }
    let assignment: Vec<usize> = assignment
        .into_iter()
        .map(|a| a.expect("every job assigned"))
        .collect();
    let schedule = schedule_assignment(inst, &assignment, Policy::Fifo);
    let realized = schedule.metrics(inst).max_flow;
    Ok(MaxSolution {
        d_star,
        p_max,
        assignment,
        trace,
        schedule,
        realized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxWindow {
    pub machine: usize,
    pub excess: Time,
    pub t1: Time,
    pub t2: Time,
}

/// Largest `Σ_{r_j in [t1, t2], j -> i} p_ij - (t2 - t1)` over machines and
/// windows with release-time endpoints. Machines without jobs report 0.
pub fn volume_check_max(inst: &Instance, assignment: &[usize]) -> MaxWindow {
    let releases: Vec<Time> = inst.jobs().iter().map(|j| j.release).collect();
    let mut best: Option<MaxWindow> = None;
    for i in 0..inst.m() {
        let points: Vec<(Time, Time)> = assignment
            .iter()
            .enumerate()
            .filter(|&(_, &mi)| mi == i)
            .map(|(j, _)| (inst.job(j).release, inst.p(i, j).expect("eligible")))
            .collect();
        let WindowExcess { excess, t1, t2 } = if points.is_empty() {
            WindowExcess { excess: 0, t1: 0, t2: 0 }
        } else {
            max_window_excess(&points, &releases)
        };
        let w = MaxWindow {
            machine: i,
            excess,
            t1,
            t2,
        };
        if best.map_or(true, |b| w.excess > b.excess) {
            best = Some(w);
        }
    }
    best.expect("at least one machine")
}
