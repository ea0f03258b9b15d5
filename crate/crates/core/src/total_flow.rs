//! Total flow-time: interval-capacity LP, iterated rounding to a tentative
//! placement, and conversion to a real schedule.
//!
//! Variables `y(i, j, t)` are the units of job `j` placed on machine `i` at
//! slot `t >= r_j`; a job is *placed* once some `y(i, j, t) = p_ij`. Round 0
//! caps, for every machine `i` and class `k`, the class `<= k` volume in
//! aligned blocks of `4·2^k` slots. Each later round drops zero variables,
//! freezes placed jobs and regroups the survivors of each `(i, k)` in slot
//! order into intervals whose previous-round volume first reaches `4·2^k`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ClassIndex, Instance, JobId, Time};
use crate::lp::{solve_min_basic, verify_basic, BasicSolution, LinearProgram, LpError, Sense, SolveStatus, Tight};
use crate::rational::{int, ratio, Rational};
use crate::schedule::{simulate, Policy, Schedule, SimJob};
use crate::window::{max_window_excess, WindowExcess};

#[derive(Debug, Error)]
pub enum TotalFlowError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("round {round}: LP is infeasible")]
    Infeasible { round: usize },
    #[error("round {round}: solution is not a basic optimum")]
    NotBasic { round: usize },
    #[error("round {round}: job {job} has a variable above its processing time")]
    AboveProcessingTime { round: usize, job: JobId },
    #[error("round cap {cap} exceeded with {left} jobs unplaced")]
    RoundCap { cap: usize, left: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// `y(machine, job, slot)`; `job` is the job index in the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarKey {
    pub machine: usize,
    pub job: usize,
    pub slot: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub vars: Vec<VarKey>,
    #[serde(with = "exact")]
    pub size: Rational,
    /// Last interval of its group whose carried volume fell short of
    /// `4·2^k`; its size was lifted to exactly `4·2^k`.
    pub padded: bool,
}

/// Capacity intervals per `(machine, class)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalLayout {
    #[serde(with = "layout_map")]
    pub groups: BTreeMap<(usize, ClassIndex), Vec<Interval>>,
}

impl IntervalLayout {
    pub fn intervals(&self) -> impl Iterator<Item = (usize, ClassIndex, &Interval)> {
        self.groups
            .iter()
            .flat_map(|(&(i, k), v)| v.iter().map(move |iv| (i, k, iv)))
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `LP(ℓ)` together with the bookkeeping needed to interpret its rows.
#[derive(Debug, Clone)]
pub struct RoundLp {
    pub round: usize,
    pub lp: LinearProgram,
    pub vars: Vec<VarKey>,
    /// Unplaced job indices; row `r < jobs.len()` is the service row of `jobs[r]`.
    pub jobs: Vec<usize>,
    /// Rows `jobs.len()..` are the layout intervals in iteration order.
    pub layout: IntervalLayout,
}

impl RoundLp {
    pub fn is_capacity_row(&self, row: usize) -> bool {
        row >= self.jobs.len()
    }
}

/// Job `job` (id) placed on `machine` at `slot`: `y(machine, job, slot) = p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub job: JobId,
    pub machine: usize,
    pub slot: Time,
}

/// The integral tentative solution, one placement per job index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TentativeAssignment {
    pub placements: Vec<Placement>,
}

impl TentativeAssignment {
    /// Objective of the interval LP evaluated at the placement:
    /// `Σ_j (t_j - r_j) + p_j / 2`.
    pub fn cost(&self, inst: &Instance) -> Rational {
        self.placements
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (idx, pl)| {
                let job = inst.job(idx);
                let p = job.on(pl.machine).expect("placement on eligible machine");
                acc + int(pl.slot - job.release) + ratio(p, 2)
            })
    }

    pub fn slots(&self) -> Vec<Time> {
        self.placements.iter().map(|p| p.slot).collect()
    }

    /// Checks one placement per job, at or after release, on an eligible machine.
    pub fn check(&self, inst: &Instance) -> Result<(), String> {
        if self.placements.len() != inst.n() {
            return Err(format!(
                "{} placements for {} jobs",
                self.placements.len(),
                inst.n()
            ));
        }
        for (idx, pl) in self.placements.iter().enumerate() {
            let job = inst.job(idx);
            if pl.job != job.id {
                return Err(format!("placement {idx} names job {} not {}", pl.job, job.id));
            }
            if job.on(pl.machine).is_none() {
                return Err(format!("job {} placed on ineligible machine {}", job.id, pl.machine));
            }
            if pl.slot < job.release {
                return Err(format!("job {} placed at {} before release {}", job.id, pl.slot, job.release));
            }
        }
        Ok(())
    }
}

/// What happened in one rounding iteration (the solve of `LP(round)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// `N_round`: jobs still unplaced when `LP(round)` was solved.
    pub unassigned: usize,
    /// Jobs placed by this round's solution.
    pub fixed: Vec<Placement>,
    /// Variables of `LP(round)`.
    pub variables: usize,
    pub support: usize,
    /// Capacity rows in the solver's independent tight family.
    pub tight_capacity: usize,
    /// Capacity rows satisfied with equality, independent or not.
    pub tight_capacity_all: usize,
    pub capacity_rows: usize,
    #[serde(with = "exact")]
    pub objective: Rational,
    /// Positive variables of the solution.
    #[serde(with = "exact_pairs")]
    pub solution: Vec<(VarKey, Rational)>,
    pub layout: IntervalLayout,
    /// Whether this round's solution, restricted to surviving variables,
    /// is feasible for the next LP.
    pub carried_feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundTrace {
    pub rounds: Vec<RoundRecord>,
}

impl RoundTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Debug, Clone)]
pub struct TotalSolution {
    pub assignment: TentativeAssignment,
    pub trace: RoundTrace,
    pub lp0_objective: Rational,
    pub cost: Rational,
}

fn objective_coefficient(slot: Time, release: Time, p: Time) -> Rational {
    // (t - r)/p + 1/2
    ratio(2 * (slot - release) + p, 2 * p)
}

fn class_on(inst: &Instance, machine: usize, job: usize) -> ClassIndex {
    ClassIndex::of(inst.p(machine, job).expect("variable on eligible machine"))
}

/// Largest class of any job eligible on each machine.
fn max_class_per_machine(inst: &Instance) -> Vec<Option<ClassIndex>> {
    (0..inst.m())
        .map(|i| {
            inst.jobs()
                .iter()
                .filter_map(|j| j.on(i).map(ClassIndex::of))
                .max()
        })
        .collect()
}

fn sort_key(inst: &Instance, v: &VarKey) -> (Time, JobId, usize) {
    (v.slot, inst.job(v.job).id, v.machine)
}

fn assemble(
    inst: &Instance,
    round: usize,
    vars: Vec<VarKey>,
    jobs: Vec<usize>,
    layout: IntervalLayout,
) -> RoundLp {
    let mut lp = LinearProgram::new();
    let mut index: HashMap<VarKey, usize> = HashMap::with_capacity(vars.len());
    for v in &vars {
        let job = inst.job(v.job);
        let p = job.on(v.machine).expect("eligible");
        let id = lp.add_var(objective_coefficient(v.slot, job.release, p));
        index.insert(*v, id);
    }
    let mut by_job: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for v in &vars {
        let p = inst.p(v.machine, v.job).expect("eligible");
        by_job.entry(v.job).or_default().push((index[v], ratio(1, p)));
    }
    for j in &jobs {
        let coeffs = by_job.remove(j).unwrap_or_default();
        lp.add_constraint(coeffs, Sense::Ge, Rational::one());
    }
    for (_, _, iv) in layout.intervals() {
        lp.add_constraint(
            iv.vars.iter().map(|v| (index[v], Rational::one())),
            Sense::Le,
            iv.size.clone(),
        );
    }
    RoundLp {
        round,
        lp,
        vars,
        jobs,
        layout,
    }
}

/// `LP(0)`: one variable per eligible `(i, j, t)` with `r_j <= t < T`,
/// a service row per job and a capacity row per non-empty aligned block.
pub fn build_lp0(inst: &Instance) -> RoundLp {
    let horizon = inst.horizon();
    let mut vars = Vec::new();
    for (idx, job) in inst.jobs().iter().enumerate() {
        for (i, _) in job.eligible() {
            for t in job.release..horizon {
                vars.push(VarKey {
                    machine: i,
                    job: idx,
                    slot: t,
                });
            }
        }
    }
    let mut layout = IntervalLayout::default();
    for (i, kmax) in max_class_per_machine(inst).into_iter().enumerate() {
        let Some(kmax) = kmax else { continue };
        for k in 0..=kmax.0 {
            let k = ClassIndex(k);
            let len = 4 * k.scale();
            let mut blocks: BTreeMap<Time, Vec<VarKey>> = BTreeMap::new();
            for v in vars.iter().filter(|v| v.machine == i && class_on(inst, i, v.job) <= k) {
                blocks.entry(v.slot / len).or_default().push(*v);
            }
            let intervals = blocks
                .into_values()
                .map(|mut vs| {
                    vs.sort_by_key(|v| sort_key(inst, v));
                    Interval {
                        vars: vs,
                        size: int(len),
                        padded: false,
                    }
                })
                .collect();
            layout.groups.insert((i, k), intervals);
        }
    }
    let jobs = (0..inst.n()).collect();
    assemble(inst, 0, vars, jobs, layout)
}

/// Greedy regrouping of surviving variables for `LP(round)`.
fn regroup(inst: &Instance, survivors: &[(VarKey, Rational)]) -> IntervalLayout {
    let mut layout = IntervalLayout::default();
    for (i, kmax) in max_class_per_machine(inst).into_iter().enumerate() {
        let Some(kmax) = kmax else { continue };
        for k in 0..=kmax.0 {
            let k = ClassIndex(k);
            let threshold = int(4 * k.scale());
            let mut members: Vec<&(VarKey, Rational)> = survivors
                .iter()
                .filter(|(v, _)| v.machine == i && class_on(inst, i, v.job) <= k)
                .collect();
            if members.is_empty() {
                continue;
            }
            members.sort_by_key(|(v, _)| sort_key(inst, v));
            let mut intervals = Vec::new();
            let mut vars = Vec::new();
            let mut sum = Rational::zero();
            for (v, y) in members {
                vars.push(*v);
                sum += y;
                if sum >= threshold {
                    intervals.push(Interval {
                        vars: std::mem::take(&mut vars),
                        size: std::mem::replace(&mut sum, Rational::zero()),
                        padded: false,
                    });
                }
            }
            if !vars.is_empty() {
                intervals.push(Interval {
                    vars,
                    size: threshold,
                    padded: true,
                });
            }
            layout.groups.insert((i, k), intervals);
        }
    }
    layout
}

/// One rounding step: record the solution of `cur`, freeze placed jobs,
/// drop zeros and build the next LP.
pub fn round_once(
    inst: &Instance,
    cur: &RoundLp,
    sol: &BasicSolution,
    trace: &mut RoundTrace,
) -> Result<RoundLp, TotalFlowError> {
    let round = cur.round;
    if sol.status != SolveStatus::Optimal || !verify_basic(&cur.lp, sol) {
        return Err(TotalFlowError::NotBasic { round });
    }
    let support: Vec<(VarKey, Rational)> = sol
        .support()
        .map(|v| (cur.vars[v], sol.values[v].clone()))
        .collect();

    let mut fixed = Vec::new();
    let mut placed = vec![false; inst.n()];
    for (v, y) in &support {
        let p = int(inst.p(v.machine, v.job).expect("eligible"));
        if *y > p {
            return Err(TotalFlowError::AboveProcessingTime {
                round,
                job: inst.job(v.job).id,
            });
        }
        if *y == p && !placed[v.job] {
            placed[v.job] = true;
            fixed.push(Placement {
                job: inst.job(v.job).id,
                machine: v.machine,
                slot: v.slot,
            });
        }
    }
    fixed.sort_by_key(|p| p.job);

    let survivors: Vec<(VarKey, Rational)> = support
        .iter()
        .filter(|(v, _)| !placed[v.job])
        .cloned()
        .collect();
    let jobs: Vec<usize> = cur.jobs.iter().copied().filter(|&j| !placed[j]).collect();
    let layout = regroup(inst, &survivors);
    let mut vars: Vec<VarKey> = survivors.iter().map(|(v, _)| *v).collect();
    vars.sort();
    let next = assemble(inst, round + 1, vars, jobs, layout);

    let carried: Vec<Rational> = {
        let value: HashMap<VarKey, &Rational> = survivors.iter().map(|(v, y)| (*v, y)).collect();
        next.vars.iter().map(|v| value[v].clone()).collect()
    };
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

    trace.rounds.push(RoundRecord {
        round,
        unassigned: cur.jobs.len(),
        fixed,
        variables: cur.vars.len(),
        support: support.len(),
        tight_capacity,
        tight_capacity_all,
        capacity_rows: cur.layout.len(),
        objective: sol.objective.clone(),
        solution: support,
        layout: cur.layout.clone(),
        carried_feasible,
    });
    if !carried_feasible {
        return Err(TotalFlowError::Invariant(format!(
            "round {round}: carried solution infeasible for the next LP"
        )));
    }
    Ok(next)
}

pub fn round_cap(n: usize) -> usize {
    2 * ceil_log2(n) + 4
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Iterated rounding from `LP(0)` until every job is placed.
pub fn solve_total(inst: &Instance) -> Result<TotalSolution, TotalFlowError> {
    let cap = round_cap(inst.n());
    let mut cur = build_lp0(inst);
    let mut trace = RoundTrace::default();
    let mut placements: Vec<Option<Placement>> = vec![None; inst.n()];
    let mut lp0_objective = None;
    loop {
        if cur.round >= cap {
            return Err(TotalFlowError::RoundCap {
                cap,
                left: cur.jobs.len(),
            });
        }
        let sol = solve_min_basic(&cur.lp)?;
        if sol.is_infeasible() {
            return Err(TotalFlowError::Infeasible { round: cur.round });
        }
        lp0_objective.get_or_insert_with(|| sol.objective.clone());
        let next = round_once(inst, &cur, &sol, &mut trace)?;
        for pl in &trace.rounds.last().expect("just pushed").fixed {
            let idx = inst.index_of(pl.job).expect("job in instance");
            placements[idx] = Some(*pl);
        }
        if next.jobs.is_empty() {
            break;
        }
        cur = next;
    }
    let assignment = TentativeAssignment {
        placements: placements
            .into_iter()
            .map(|p| p.expect("every job placed"))
            .collect(),
    };
    let lp0_objective = lp0_objective.expect("at least one round");
    let cost = assignment.cost(inst);
    if cost > lp0_objective {
        return Err(TotalFlowError::Invariant(format!(
            "tentative cost {cost} exceeds LP optimum {lp0_objective}"
        )));
    }
    Ok(TotalSolution {
        assignment,
        trace,
        lp0_objective,
        cost,
    })
}

/// Runs each machine's placed jobs with class-based SJF, a job becoming
/// available at its tentative slot; ties inside a class go by slot, then id.
pub fn tentative_to_schedule(inst: &Instance, y: &TentativeAssignment) -> Schedule {
    let mut per_machine: Vec<Vec<SimJob>> = vec![Vec::new(); inst.m()];
    for (idx, pl) in y.placements.iter().enumerate() {
        let p = inst.p(pl.machine, idx).expect("eligible");
        per_machine[pl.machine].push(SimJob::new(pl.job, pl.slot, p));
    }
    Schedule {
        machines: per_machine
            .iter()
            .map(|js| simulate(js, Policy::ClassSjf))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverloadEntry {
    pub machine: usize,
    pub class: ClassIndex,
    /// Max over windows `[t1, t2]` of placed class `<= k` volume minus `t2 - t1`.
    pub excess: Time,
    pub t1: Time,
    pub t2: Time,
}

impl OverloadEntry {
    /// `excess / 2^k`.
    pub fn normalized(&self) -> Rational {
        ratio(self.excess, self.class.scale())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OverloadProfile {
    pub entries: Vec<OverloadEntry>,
}

impl OverloadProfile {
    pub fn get(&self, machine: usize, class: ClassIndex) -> Option<&OverloadEntry> {
        self.entries
            .iter()
            .find(|e| e.machine == machine && e.class == class)
    }

    pub fn max_normalized(&self) -> Rational {
        self.entries
            .iter()
            .map(OverloadEntry::normalized)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Window overload of a tentative placement for every machine and class up
/// to the largest class eligible on that machine.
pub fn overload_profile(inst: &Instance, y: &TentativeAssignment) -> OverloadProfile {
    let horizon = inst.horizon();
    let mut out = OverloadProfile::default();
    for (i, kmax) in max_class_per_machine(inst).into_iter().enumerate() {
        let Some(kmax) = kmax else { continue };
        for k in 0..=kmax.0 {
            let k = ClassIndex(k);
            let points: Vec<(Time, Time)> = y
                .placements
                .iter()
                .enumerate()
                .filter(|(_, pl)| pl.machine == i)
                .filter_map(|(idx, pl)| {
                    let p = inst.p(i, idx)?;
                    (ClassIndex::of(p) <= k).then_some((pl.slot, p))
                })
                .collect();
            let mut candidates: Vec<Time> = vec![0, horizon];
            for &(t, p) in &points {
                candidates.push(t);
                candidates.push(t + p);
            }
            let WindowExcess { excess, t1, t2 } = max_window_excess(&points, &candidates);
            out.entries.push(OverloadEntry {
                machine: i,
                class: k,
                excess,
                t1,
                t2,
            });
        }
    }
    out
}

/// `(8 + 10·rounds)·2^k`.
pub fn overload_bound(rounds: usize, class: ClassIndex) -> Time {
    (8 + 10 * rounds as Time) * class.scale()
}

pub(crate) mod exact {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{parse_exact, to_exact_string, Rational};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_exact_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_exact(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

mod exact_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::VarKey;
    use crate::rational::{parse_exact, to_exact_string, Rational};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        machine: usize,
        job: usize,
        slot: i64,
        value: String,
    }

    pub fn serialize<S: Serializer>(v: &[(VarKey, Rational)], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|(k, q)| Entry {
                machine: k.machine,
                job: k.job,
                slot: k.slot,
                value: to_exact_string(q),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(VarKey, Rational)>, D::Error> {
        Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| {
                let q = parse_exact(&e.value)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad rational {:?}", e.value)))?;
                Ok((
                    VarKey {
                        machine: e.machine,
                        job: e.job,
                        slot: e.slot,
                    },
                    q,
                ))
            })
            .collect()
    }
}

mod layout_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Interval;
    use crate::instance::ClassIndex;

    #[derive(Serialize, Deserialize)]
    struct Group {
        machine: usize,
        class: ClassIndex,
        intervals: Vec<Interval>,
    }

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<(usize, ClassIndex), Vec<Interval>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(&(machine, class), iv)| Group {
                machine,
                class,
                intervals: iv.clone(),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, ClassIndex), Vec<Interval>>, D::Error> {
        Ok(Vec::<Group>::deserialize(d)?
            .into_iter()
            .map(|g| ((g.machine, g.class), g.intervals))
            .collect())
    }
}

/// Sanity helper for tests: every variable value is non-negative.
pub fn nonnegative(values: &[(VarKey, Rational)]) -> bool {
    values.iter().all(|(_, y)| !y.is_negative())
}
