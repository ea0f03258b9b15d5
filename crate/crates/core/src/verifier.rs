//! Replays solver artifacts and checks every structural property the
//! rounding algorithms promise, with explicit constants.
//!
//! Each check reports the bound it was held to and the value observed, so
//! slack in the constants is visible. A built-in mutation battery corrupts
//! artifacts in several ways; the auditor must reject every mutant.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::instance::{ClassIndex, Instance, Time};
use crate::max_flow::{is_feasible, volume_check_max, MaxTrace, RowKind};
use crate::rational::{int, ExactValue, Rational};
use crate::schedule::{offset_volume, schedule_assignment, Policy, Schedule, VolumeTrace};
use crate::total_flow::{
    ceil_log2, overload_bound, overload_profile, tentative_to_schedule, RoundTrace, TentativeAssignment,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub bound: ExactValue,
    pub observed: ExactValue,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: String,
    pub version: u32,
    pub objective: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl AuditReport {
    fn new(objective: &str) -> Self {
        AuditReport {
            schema: "flowsched.audit".to_string(),
            version: 1,
            objective: objective.to_string(),
            pass: true,
            checks: Vec::new(),
        }
    }

    /// Records `observed <= bound`.
    fn le(&mut self, name: &str, observed: impl Into<Rational>, bound: impl Into<Rational>, detail: String) {
        let (observed, bound) = (observed.into(), bound.into());
        let pass = observed <= bound;
        self.push(name, observed, bound, pass, detail);
    }

    fn push(&mut self, name: &str, observed: Rational, bound: Rational, pass: bool, detail: String) {
        self.pass &= pass;
        self.checks.push(Check {
            check: name.to_string(),
            bound: ExactValue::from(&bound),
            observed: ExactValue::from(&observed),
            pass,
            detail: if pass { String::new() } else { detail },
        });
    }

    /// A yes/no check: observed is the number of violations, bound 0.
    fn count(&mut self, name: &str, violations: Vec<String>) {
        let n = violations.len() as i64;
        let detail = violations.into_iter().take(3).collect::<Vec<_>>().join("; ");
        self.push(name, int(n), int(0), n == 0, detail);
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn q(v: Time) -> Rational {
    int(v)
}

/// Bookkeeping over per-round `(round, unassigned, fixed, tight capacity)`.
fn halving_checks(
    report: &mut AuditReport,
    n: usize,
    rounds: &[(usize, usize, usize, usize)],
    expected_total_fixed: usize,
    token_bound: bool,
) {
    let mut bookkeeping = Vec::new();
    for (pos, &(round, unassigned, fixed, _)) in rounds.iter().enumerate() {
        if round != pos {
            bookkeeping.push(format!("record {pos} is numbered {round}"));
        }
        let expected = if pos == 0 {
            n
        } else {
            rounds[pos - 1].1 - rounds[pos - 1].2.min(rounds[pos - 1].1)
        };
        if unassigned != expected {
            bookkeeping.push(format!("round {round}: {unassigned} unassigned, expected {expected}"));
        }
        if fixed > unassigned {
            bookkeeping.push(format!("round {round}: fixes {fixed} of {unassigned}"));
        }
    }
    match rounds.last() {
        None => bookkeeping.push("trace has no rounds".into()),
        Some(&(round, unassigned, fixed, _)) if unassigned != fixed => {
            bookkeeping.push(format!("final round {round} leaves {} unassigned", unassigned - fixed))
        }
        _ => {}
    }
    let total_fixed: usize = rounds.iter().map(|r| r.2).sum();
    if total_fixed != expected_total_fixed {
        bookkeeping.push(format!("{total_fixed} jobs fixed, expected {expected_total_fixed}"));
    }
    report.count("round_bookkeeping", bookkeeping);

    // N_l <= ceil(N_{l-1} / 2).
    let mut worst = Rational::zero();
    let mut detail = String::new();
    for w in rounds.windows(2) {
        let (prev, cur) = (w[0].1, w[1].1);
        let gap = q(cur as Time) - q(prev.div_ceil(2) as Time);
        if gap > worst {
            worst = gap;
            detail = format!("round {}: {} unassigned after {}", w[1].0, cur, prev);
        }
    }
    report.le("halving", worst, q(0), detail);

    let limit = ceil_log2(n) + 1;
    report.le(
        "round_count",
        q(rounds.len() as Time),
        q(limit as Time),
        format!("{} rounds for {n} jobs", rounds.len()),
    );

    // Fractional jobs of a vertex are bounded by its tight capacity rows.
    let mut worst = Rational::zero();
    let mut detail = String::new();
    for w in rounds.windows(2) {
        let (tight, cur) = (w[0].3, w[1].1);
        let gap = q(cur as Time) - q(tight as Time);
        if gap > worst {
            worst = gap;
            detail = format!("round {}: {cur} fractional jobs, {tight} tight capacity rows", w[0].0);
        }
    }
    report.le("fractional_vs_tight", worst, q(0), detail);

    if !token_bound {
        return;
    }
    let mut worst = Rational::zero();
    let mut detail = String::new();
    for &(round, unassigned, _, tight) in &rounds[..rounds.len().saturating_sub(1)] {
        let gap = q(tight as Time) - q(unassigned.div_ceil(2) as Time);
        if gap > worst {
            worst = gap;
            detail = format!("round {round}: {tight} tight capacity rows for {unassigned} jobs");
        }
    }
    report.le("token_bound", worst, q(0), detail);
}

/// Artifacts of one total-flow run.
#[derive(Debug, Clone)]
pub struct TotalArtifacts {
    pub assignment: TentativeAssignment,
    pub trace: RoundTrace,
    pub schedule: Schedule,
}

pub fn audit_total(inst: &Instance, art: &TotalArtifacts) -> AuditReport {
    let mut report = AuditReport::new("total");
    let TotalArtifacts {
        assignment: y,
        trace,
        schedule,
    } = art;

    let mut structure = Vec::new();
    if let Err(e) = y.check(inst) {
        structure.push(e);
    }
    structure.extend(schedule.validate(inst).iter().map(|v| v.to_string()));
    if schedule.machines.len() != inst.m() {
        structure.push(format!("schedule has {} machines", schedule.machines.len()));
    }
    let structurally_sound = structure.is_empty();
    report.count("artifacts_well_formed", structure);
    if !structurally_sound {
        return report;
    }

    let mut consistency = Vec::new();
    let mut from_trace: HashMap<u64, (usize, Time)> = HashMap::new();
    for r in &trace.rounds {
        for f in &r.fixed {
            if from_trace.insert(f.job, (f.machine, f.slot)).is_some() {
                consistency.push(format!("job {} fixed twice", f.job));
            }
        }
    }
    for pl in &y.placements {
        match from_trace.get(&pl.job) {
            Some(&(i, t)) if i == pl.machine && t == pl.slot => {}
            Some(&(i, t)) => consistency.push(format!(
                "job {} placed at ({}, {}) but trace fixed ({i}, {t})",
                pl.job, pl.machine, pl.slot
            )),
            None => consistency.push(format!("job {} never fixed in trace", pl.job)),
        }
    }
    if tentative_to_schedule(inst, y) != *schedule {
        consistency.push("schedule differs from class-SJF conversion of the placement".into());
    }
    report.count("trace_consistency", consistency);

    let rounds: Vec<(usize, usize, usize, usize)> = trace
        .rounds
        .iter()
        .map(|r| (r.round, r.unassigned, r.fixed.len(), r.tight_capacity))
        .collect();
    halving_checks(&mut report, inst.n(), &rounds, inst.n(), true);

    // Each round's surviving values fit the next round's intervals.
    let mut chain = Vec::new();
    for w in trace.rounds.windows(2) {
        let prev: HashMap<_, &Rational> = w[0].solution.iter().map(|(v, y)| (*v, y)).collect();
        for (i, k, iv) in w[1].layout.intervals() {
            let sum: Rational = iv
                .vars
                .iter()
                .map(|v| prev.get(v).map_or_else(Rational::zero, |y| (*y).clone()))
                .sum();
            if sum > iv.size {
                chain.push(format!("round {}: interval on ({i}, {}) holds {sum} > {}", w[1].round, k.0, iv.size));
            }
        }
        if !w[0].carried_feasible {
            chain.push(format!("round {}: carried solution flagged infeasible", w[0].round));
        }
    }
    report.count("relaxation_chain", chain);

    let (growth, growth_detail) = total_round_growth(inst, trace);
    report.le("round_growth", growth, q(10), growth_detail);

    let cost = y.cost(inst);
    let lp0 = trace
        .rounds
        .first()
        .map_or_else(Rational::zero, |r| r.objective.clone());
    report.le("cost", cost.clone(), lp0.clone(), format!("cost {cost} > LP optimum {lp0}"));

    let r = trace.rounds.len();
    let profile = overload_profile(inst, y);
    let mut worst: Option<(Rational, String)> = None;
    let mut violated = false;
    for e in &profile.entries {
        let bound = overload_bound(r, e.class);
        violated |= e.excess > bound;
        let norm = e.normalized();
        if worst.as_ref().map_or(true, |(w, _)| norm > *w) {
            worst = Some((
                norm,
                format!("machine {} class {} window [{}, {}] excess {}", e.machine, e.class.0, e.t1, e.t2, e.excess),
            ));
        }
    }
    let (observed, detail) = worst.unwrap_or_else(|| (Rational::zero(), String::new()));
    let bound = q(8 + 10 * r as Time);
    let pass = !violated && observed <= bound;
    report.push("overload", observed, bound, pass, detail);

    let slots: Vec<Time> = y.slots();
    let vt = VolumeTrace::build(inst, schedule, Some(&slots));
    let mut backlog_worst = Rational::zero();
    let mut backlog_fail = Vec::new();
    let classes: BTreeMap<usize, Vec<ClassIndex>> = profile.entries.iter().fold(BTreeMap::new(), |mut acc, e| {
        acc.entry(e.machine).or_insert_with(Vec::new).push(e.class);
        acc
    });
    for (&i, ks) in &classes {
        for &k in ks {
            let excess = profile.get(i, k).map_or(0, |e| e.excess).max(0);
            for t in 0..vt.horizon as usize {
                let mut gap = 0;
                for kk in 0..=k.0 {
                    let key = (i, ClassIndex(kk));
                    gap += vt.schedule.get(&key).map_or(0, |v| v[t]);
                    gap -= vt.tentative.get(&key).map_or(0, |v| v[t]);
                }
                let slack = q(gap) / q(k.scale());
                if slack > backlog_worst {
                    backlog_worst = slack;
                }
                if gap > excess {
                    backlog_fail.push(format!("machine {i} class <= {} slot {t}: backlog {gap} > overload {excess}", k.0));
                }
            }
        }
    }
    let n_fail = backlog_fail.len();
    report.push(
        "backlog",
        backlog_worst,
        q(8 + 10 * r as Time),
        n_fail == 0,
        backlog_fail.into_iter().take(3).collect::<Vec<_>>().join("; "),
    );

    let metrics = schedule.metrics(inst);
    let mut gap_worst: Option<Rational> = None;
    let mut gap_fail = Vec::new();
    let mut identity = Vec::new();
    for i in 0..inst.m() {
        let on_i: Vec<_> = metrics.jobs.iter().filter(|j| j.machine == i).collect();
        let busy: Time = on_i.iter().map(|j| j.p).sum();
        let mut per_class: BTreeMap<ClassIndex, (Time, Rational)> = BTreeMap::new();
        for j in &on_i {
            let e = per_class.entry(ClassIndex::of(j.p)).or_insert((0, Rational::zero()));
            e.0 += j.flow;
            e.1 += &j.fractional;
        }
        for (k, (flow, frac)) in per_class {
            let gap = q(flow) - frac - q(busy);
            if gap_worst.as_ref().map_or(true, |w| gap > *w) {
                gap_worst = Some(gap.clone());
            }
            if gap > Rational::zero() {
                gap_fail.push(format!("machine {i} class {}", k.0));
            }
            let lhs = vt.schedule_sum(i, k);
            let rhs = offset_volume(inst, schedule, i, k);
            if lhs != rhs {
                identity.push(format!("machine {i} class {}: {lhs} != {rhs}", k.0));
            }
        }
    }
    let pass = gap_fail.is_empty();
    report.push(
        "flow_gap",
        gap_worst.unwrap_or_else(Rational::zero),
        q(0),
        pass,
        gap_fail.join("; "),
    );
    report.count("flow_identity", identity);

    let partial = schedule.max_partial_per_class(inst, |job, i| {
        ClassIndex::of(inst.index_of(job).and_then(|j| inst.p(i, j)).unwrap_or(1))
    });
    report.le("partial_jobs", q(partial as Time), q(1), format!("{partial} partial jobs of one class"));
    report
}

/// Largest `(Vol_l - Vol_{l-1}) / 2^k` over rounds, machines, classes and
/// windows, where `Vol_l` counts class `<= k` volume placed in the window by
/// round `l`'s solution plus jobs fixed earlier.
fn total_round_growth(inst: &Instance, trace: &RoundTrace) -> (Rational, String) {
    // (machine, class, slot, volume) per round.
    let mass = |round: usize| -> Vec<(usize, ClassIndex, Time, Rational)> {
        let mut out = Vec::new();
        for r in &trace.rounds[..round] {
            for f in &r.fixed {
                if let Some(p) = inst.index_of(f.job).and_then(|j| inst.p(f.machine, j)) {
                    out.push((f.machine, ClassIndex::of(p), f.slot, q(p)));
                }
            }
        }
        for (v, y) in &trace.rounds[round].solution {
            if let Some(p) = (v.job < inst.n()).then(|| inst.p(v.machine, v.job)).flatten() {
                out.push((v.machine, ClassIndex::of(p), v.slot, y.clone()));
            }
        }
        out
    };
    let mut worst = Rational::zero();
    let mut detail = String::new();
    for l in 1..trace.rounds.len() {
        let (prev, cur) = (mass(l - 1), mass(l));
        let mut keys: Vec<(usize, ClassIndex)> = cur.iter().map(|m| (m.0, m.1)).collect();
        keys.sort();
        keys.dedup();
        for (i, kmax) in keys {
            for k in 0..=kmax.0 {
                let k = ClassIndex(k);
                let pick = |ms: &[(usize, ClassIndex, Time, Rational)]| -> Vec<(Time, Rational)> {
                    ms.iter()
                        .filter(|m| m.0 == i && m.1 <= k)
                        .map(|m| (m.2, m.3.clone()))
                        .collect()
                };
                let (a, b) = (pick(&prev), pick(&cur));
                let mut ends: Vec<Time> = a.iter().chain(&b).map(|x| x.0).collect();
                ends.sort_unstable();
                ends.dedup();
                let vol = |xs: &[(Time, Rational)], t1: Time, t2: Time| -> Rational {
                    xs.iter().filter(|x| t1 <= x.0 && x.0 <= t2).map(|x| x.1.clone()).sum()
                };
                for (s, &t1) in ends.iter().enumerate() {
                    for &t2 in &ends[s..] {
                        let g = (vol(&b, t1, t2) - vol(&a, t1, t2)) / q(k.scale());
                        if g > worst {
                            worst = g;
                            detail = format!("round {l} machine {i} class {} window [{t1}, {t2}]", k.0);
                        }
                    }
                }
            }
        }
    }
    (worst, detail)
}

/// Artifacts of one max-flow run.
#[derive(Debug, Clone)]
pub struct MaxArtifacts {
    pub d_star: Time,
    /// Machine per job index.
    pub assignment: Vec<usize>,
    pub trace: MaxTrace,
    pub schedule: Schedule,
}

/// Per-machine volume of jobs released in `[from, to]` under a round's
/// solution, counting jobs fixed in earlier rounds at full size.
fn round_volumes(
    inst: &Instance,
    trace: &MaxTrace,
    round: usize,
    releases: &[Time],
) -> BTreeMap<(usize, Time, Time), Rational> {
    let mut mass: Vec<(usize, Time, Rational)> = Vec::new();
    for r in &trace.rounds[..round] {
        for c in &r.fixed {
            if let Some(j) = inst.index_of(c.job) {
                if let Some(p) = inst.p(c.machine, j) {
                    mass.push((c.machine, inst.job(j).release, q(p)));
                }
            }
        }
    }
    for e in &trace.rounds[round].solution {
        if e.job < inst.n() {
            mass.push((e.machine, inst.job(e.job).release, e.value.clone()));
        }
    }
    let mut out = BTreeMap::new();
    for i in 0..inst.m() {
        for (a, &from) in releases.iter().enumerate() {
            for &to in &releases[a..] {
                let v: Rational = mass
                    .iter()
                    .filter(|(mi, r, _)| *mi == i && from <= *r && *r <= to)
                    .map(|(_, _, x)| x.clone())
                    .sum();
                out.insert((i, from, to), v);
            }
        }
    }
    out
}

pub fn audit_max(inst: &Instance, art: &MaxArtifacts) -> AuditReport {
    let mut report = AuditReport::new("max");
    let MaxArtifacts {
        d_star,
        assignment,
        trace,
        schedule,
    } = art;
    let d = *d_star;

    let mut structure = Vec::new();
    if assignment.len() != inst.n() {
        structure.push(format!("{} assignments for {} jobs", assignment.len(), inst.n()));
    }
    for (j, &i) in assignment.iter().enumerate().take(inst.n()) {
        match inst.p(i, j) {
            None => structure.push(format!("job {} on ineligible machine {i}", inst.job(j).id)),
            Some(p) if p > d => structure.push(format!("job {} has p = {p} > D* = {d}", inst.job(j).id)),
            _ => {}
        }
    }
    structure.extend(schedule.validate(inst).iter().map(|v| v.to_string()));
    let structurally_sound = structure.is_empty();
    report.count("artifacts_well_formed", structure);

    let feasible_at = is_feasible(inst, d).unwrap_or(false);
    let feasible_below = is_feasible(inst, d - 1).unwrap_or(true);
    let mut boundary = Vec::new();
    if !feasible_at {
        boundary.push(format!("LP infeasible at D* = {d}"));
    }
    if feasible_below {
        boundary.push(format!("LP feasible at D* - 1 = {}", d - 1));
    }
    if trace.d_star != d {
        boundary.push(format!("trace records D* = {}, report {d}", trace.d_star));
    }
    report.count("search_boundary", boundary);
    if !structurally_sound {
        return report;
    }

    let mut consistency = Vec::new();
    let mut from_trace: HashMap<u64, usize> = HashMap::new();
    for r in &trace.rounds {
        for c in &r.fixed {
            if from_trace.insert(c.job, c.machine).is_some() {
                consistency.push(format!("job {} fixed twice", c.job));
            }
        }
    }
    for (j, &i) in assignment.iter().enumerate() {
        let id = inst.job(j).id;
        match from_trace.get(&id) {
            Some(&t) if t == i => {}
            Some(&t) => consistency.push(format!("job {id} on machine {i} but trace fixed {t}")),
            None => consistency.push(format!("job {id} never fixed in trace")),
        }
    }
    if schedule_assignment(inst, assignment, Policy::Fifo) != *schedule {
        consistency.push("schedule differs from FIFO on the assignment".into());
    }
    report.count("trace_consistency", consistency);

    let rounds: Vec<(usize, usize, usize, usize)> = trace
        .rounds
        .iter()
        .map(|r| (r.round, r.unassigned, r.fixed.len(), r.tight_capacity))
        .collect();
    halving_checks(&mut report, inst.n(), &rounds, inst.n(), false);

    let mut chain = Vec::new();
    for w in trace.rounds.windows(2) {
        let prev: HashMap<(usize, usize), &Rational> =
            w[0].solution.iter().map(|e| ((e.machine, e.job), &e.value)).collect();
        for row in &w[1].rows {
            let sum: Rational = row
                .jobs
                .iter()
                .map(|&j| prev.get(&(row.machine, j)).map_or_else(Rational::zero, |x| (*x).clone()))
                .sum();
            if sum > row.size {
                chain.push(format!("round {}: group on machine {} holds {sum} > {}", w[1].round, row.machine, row.size));
            }
            if let RowKind::Window { .. } = row.kind {
                chain.push(format!("round {}: window row after round 0", w[1].round));
            }
        }
        if !w[0].carried_feasible {
            chain.push(format!("round {}: carried solution flagged infeasible", w[0].round));
        }
    }
    report.count("relaxation_chain", chain);

    let p_max = trace.p_max;
    let r = trace.rounds.len() as Time;
    let mut releases: Vec<Time> = inst.jobs().iter().map(|j| j.release).collect();
    releases.sort_unstable();
    releases.dedup();
    let mut growth = Rational::zero();
    let mut growth_detail = String::new();
    if !trace.rounds.is_empty() {
        let mut prev = round_volumes(inst, trace, 0, &releases);
        for l in 1..trace.rounds.len() {
            let cur = round_volumes(inst, trace, l, &releases);
            for (key, v) in &cur {
                let g = v - &prev[key];
                if g > growth {
                    growth = g;
                    growth_detail = format!("round {l} machine {} window [{}, {}]", key.0, key.1, key.2);
                }
            }
            prev = cur;
        }
    }
    report.le("round_growth", growth, q(6 * p_max), growth_detail);

    let w = volume_check_max(inst, assignment);
    report.le(
        "window_volume",
        q(w.excess),
        q(d + 6 * r * p_max),
        format!("machine {} window [{}, {}] excess {}", w.machine, w.t1, w.t2, w.excess),
    );

    let realized = schedule.metrics(inst).max_flow;
    report.le(
        "realized_max_flow",
        q(realized),
        q(d + (6 * r + 1) * p_max),
        format!("max flow {realized}"),
    );
    report
}

/// Artifact corruptions used to exercise the auditor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Move one tentative slot one step later.
    SlotShift,
    /// Move one job to another eligible machine.
    MachineSwap,
    /// Drop the first rounding round from the trace.
    RoundDeletion,
    /// Delay the first slice of the schedule by one slot.
    ScheduleTamper,
    /// Report `D* - 1` as the search result.
    LowerBound,
}

impl Fault {
    pub const TOTAL: [Fault; 4] = [Fault::SlotShift, Fault::MachineSwap, Fault::RoundDeletion, Fault::ScheduleTamper];
    pub const MAX: [Fault; 4] = [Fault::LowerBound, Fault::MachineSwap, Fault::RoundDeletion, Fault::ScheduleTamper];

    pub fn name(self) -> &'static str {
        match self {
            Fault::SlotShift => "slot_shift",
            Fault::MachineSwap => "machine_swap",
            Fault::RoundDeletion => "round_deletion",
            Fault::ScheduleTamper => "schedule_tamper",
            Fault::LowerBound => "lower_bound",
        }
    }

    pub fn parse(s: &str) -> Option<Fault> {
        [
            Fault::SlotShift,
            Fault::MachineSwap,
            Fault::RoundDeletion,
            Fault::ScheduleTamper,
            Fault::LowerBound,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }
}

fn tamper(schedule: &mut Schedule) -> bool {
    for slices in &mut schedule.machines {
        if let Some(s) = slices.first_mut() {
            s.start += 1;
            s.end += 1;
            return true;
        }
    }
    false
}

/// First `(job index, other machine)` with the job eligible there.
fn other_machine(inst: &Instance, current: impl Fn(usize) -> usize, limit: Option<Time>) -> Option<(usize, usize)> {
    (0..inst.n()).find_map(|j| {
        inst.job(j)
            .eligible()
            .find(|&(i, p)| i != current(j) && limit.map_or(true, |d| p <= d))
            .map(|(i, _)| (j, i))
    })
}

/// Applies `fault`; `None` when it does not apply to this instance.
pub fn mutate_total(inst: &Instance, art: &TotalArtifacts, fault: Fault) -> Option<TotalArtifacts> {
    let mut out = art.clone();
    match fault {
        Fault::SlotShift => {
            out.assignment.placements.first_mut()?.slot += 1;
            out.schedule = tentative_to_schedule(inst, &out.assignment);
        }
        Fault::MachineSwap => {
            let (j, i) = other_machine(inst, |j| art.assignment.placements[j].machine, None)?;
            out.assignment.placements[j].machine = i;
            out.schedule = tentative_to_schedule(inst, &out.assignment);
        }
        Fault::RoundDeletion => {
            out.trace.rounds.remove(0);
        }
        Fault::ScheduleTamper => {
            if !tamper(&mut out.schedule) {
                return None;
            }
        }
        Fault::LowerBound => return None,
    }
    Some(out)
}

pub fn mutate_max(inst: &Instance, art: &MaxArtifacts, fault: Fault) -> Option<MaxArtifacts> {
    let mut out = art.clone();
    match fault {
        Fault::LowerBound => out.d_star -= 1,
        Fault::MachineSwap => {
            let (j, i) = other_machine(inst, |j| art.assignment[j], Some(art.d_star))?;
            out.assignment[j] = i;
            out.schedule = schedule_assignment(inst, &out.assignment, Policy::Fifo);
        }
        Fault::RoundDeletion => {
            out.trace.rounds.remove(0);
        }
        Fault::ScheduleTamper => {
            if !tamper(&mut out.schedule) {
                return None;
            }
        }
        Fault::SlotShift => return None,
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationOutcome {
    pub fault: Fault,
    pub applied: bool,
    pub detected: bool,
}

pub fn mutation_battery_total(inst: &Instance, art: &TotalArtifacts) -> Vec<MutationOutcome> {
    Fault::TOTAL
        .iter()
        .map(|&fault| match mutate_total(inst, art, fault) {
            Some(m) => MutationOutcome {
                fault,
                applied: true,
                detected: !audit_total(inst, &m).pass,
            },
            None => MutationOutcome {
                fault,
                applied: false,
                detected: false,
            },
        })
        .collect()
}

pub fn mutation_battery_max(inst: &Instance, art: &MaxArtifacts) -> Vec<MutationOutcome> {
    Fault::MAX
        .iter()
        .map(|&fault| match mutate_max(inst, art, fault) {
            Some(m) => MutationOutcome {
                fault,
                applied: true,
                detected: !audit_max(inst, &m).pass,
            },
            None => MutationOutcome {
                fault,
                applied: false,
                detected: false,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;
    use crate::max_flow::solve_max;
    use crate::total_flow::solve_total;

    fn sample() -> Instance {
        Instance::new(
            2,
            vec![
                Job::new(0, 0, vec![Some(3), Some(2)]),
                Job::new(1, 1, vec![Some(1), Some(4)]),
                Job::new(2, 1, vec![Some(2), None]),
                Job::new(3, 2, vec![Some(2), Some(2)]),
            ],
        )
        .unwrap()
    }

    fn total_artifacts(inst: &Instance) -> TotalArtifacts {
        let s = solve_total(inst).unwrap();
        TotalArtifacts {
            schedule: tentative_to_schedule(inst, &s.assignment),
            assignment: s.assignment,
            trace: s.trace,
        }
    }

    fn max_artifacts(inst: &Instance) -> MaxArtifacts {
        let s = solve_max(inst).unwrap();
        MaxArtifacts {
            d_star: s.d_star,
            assignment: s.assignment,
            trace: s.trace,
            schedule: s.schedule,
        }
    }

    #[test]
    fn clean_runs_pass() {
        let inst = sample();
        let t = audit_total(&inst, &total_artifacts(&inst));
        assert!(t.pass, "{}", t.to_json());
        assert!(t.checks.len() >= 8);
        let m = audit_max(&inst, &max_artifacts(&inst));
        assert!(m.pass, "{}", m.to_json());
    }

    #[test]
    fn every_mutant_is_rejected() {
        let inst = sample();
        for o in mutation_battery_total(&inst, &total_artifacts(&inst)) {
            assert!(o.applied && o.detected, "{o:?}");
        }
        for o in mutation_battery_max(&inst, &max_artifacts(&inst)) {
            assert!(o.applied && o.detected, "{o:?}");
        }
    }

    #[test]
    fn lowered_bound_fails_boundary_check() {
        let inst = sample();
        let m = mutate_max(&inst, &max_artifacts(&inst), Fault::LowerBound).unwrap();
        let report = audit_max(&inst, &m);
        assert!(!report.get("search_boundary").unwrap().pass);
    }

    #[test]
    fn deleted_round_fails_bookkeeping() {
        let inst = sample();
        let m = mutate_total(&inst, &total_artifacts(&inst), Fault::RoundDeletion).unwrap();
        let report = audit_total(&inst, &m);
        assert!(!report.get("round_bookkeeping").unwrap().pass);
    }

    #[test]
    fn fault_names_round_trip() {
        for f in Fault::TOTAL.iter().chain(Fault::MAX.iter()) {
            assert_eq!(Fault::parse(f.name()), Some(*f));
        }
    }
}
