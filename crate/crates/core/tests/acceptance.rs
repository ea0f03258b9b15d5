//! Acceptance gate. Runs every criterion over the desk grid plus the
//! hand-written edge cases and prints one PASS/FAIL line per criterion.
//! Built with `harness = false` so the lines always reach the console.

mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use flowsched::instance::{Instance, Time};
use flowsched::lp::{solve_feasible_basic, solve_min_basic, verify_basic, LinearProgram, Sense, SolveStatus};
use flowsched::max_flow::{build_maxflow_lp, is_feasible, round_once_max, solve_max, MaxTrace};
use flowsched::rational::{int, ratio, Rational};
use flowsched::schedule::{simulate, Policy, Schedule, SimJob};
use flowsched::total_flow::{build_lp0, round_once, solve_total, tentative_to_schedule, RoundTrace};
use flowsched::verifier::{mutation_battery_max, mutation_battery_total, MaxArtifacts, TotalArtifacts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::{brute_optimum, edge_cases, grid_instances, run_machine, single_machine_dp, vertex_enumeration, SmallLp};

const CAP: usize = 7;

fn class(p: Time) -> u32 {
    let mut k = 0;
    while (1 << k) < p {
        k += 1;
    }
    k
}

fn log2_ceil(n: usize) -> usize {
    let mut k = 0;
    while (1usize << k) < n {
        k += 1;
    }
    k
}

/// Per-instance measurements; `Err` strings name violated criteria.
#[derive(Default)]
struct Record {
    name: String,
    in_cap: bool,
    violations: Vec<(usize, String)>,
    lps_verified: usize,
    total_ratio: Option<Rational>,
    overload_worst: Rational,
    max_gap_pmax: Rational,
    max_gap_assigned: Rational,
    total_rounds: usize,
    max_rounds: usize,
    faults_applied: usize,
    preprocess_checked: usize,
}

impl Record {
    fn fail(&mut self, criterion: usize, msg: String) {
        self.violations.push((criterion, format!("{}: {msg}", self.name)));
    }
}

/// Runs the total-flow rounding loop by hand so every LP can be checked.
fn manual_total(inst: &Instance, rec: &mut Record) -> Option<(Rational, RoundTrace)> {
    let mut cur = build_lp0(inst);
    let mut trace = RoundTrace::default();
    let mut lp0 = None;
    loop {
        let sol = solve_min_basic(&cur.lp).ok()?;
        if sol.status != SolveStatus::Optimal || !verify_basic(&cur.lp, &sol) {
            rec.fail(9, format!("total round {} solution is not a verified vertex", cur.round));
            return None;
        }
        rec.lps_verified += 1;
        lp0.get_or_insert(sol.objective.clone());
        let next = round_once(inst, &cur, &sol, &mut trace).ok()?;
        if next.jobs.is_empty() {
            return Some((lp0.unwrap(), trace));
        }
        if next.round > 2 * log2_ceil(inst.n()) + 4 {
            return None;
        }
        cur = next;
    }
}

fn manual_max(inst: &Instance, d: Time, rec: &mut Record) -> Option<MaxTrace> {
    let mut cur = build_maxflow_lp(inst, d)?;
    let probe = solve_feasible_basic(&cur.lp).ok()?;
    if !verify_basic(&cur.lp, &probe) {
        rec.fail(9, "feasibility vertex at D* not verified".into());
    }
    rec.lps_verified += 1;
    let mut trace = MaxTrace {
        d_star: d,
        p_max: cur.p_max,
        rounds: Vec::new(),
    };
    loop {
        let sol = solve_min_basic(&cur.lp).ok()?;
        if sol.status != SolveStatus::Optimal || !verify_basic(&cur.lp, &sol) {
            rec.fail(9, format!("max round {} solution is not a verified vertex", cur.round));
            return None;
        }
        rec.lps_verified += 1;
        let next = round_once_max(inst, &cur, &sol, &mut trace).ok()?;
        if next.jobs.is_empty() {
            return Some(trace);
        }
        if next.round > 2 * log2_ceil(inst.n()) + 4 {
            return None;
        }
        cur = next;
    }
}

/// `N_l <= ceil(N_{l-1} / 2)` and round count.
fn check_halving(rec: &mut Record, what: &str, n: usize, unassigned: &[usize]) {
    for w in unassigned.windows(2) {
        if w[1] > w[0].div_ceil(2) {
            rec.fail(2, format!("{what}: {} unassigned after {}", w[1], w[0]));
        }
    }
    if unassigned.first() != Some(&n) {
        rec.fail(2, format!("{what}: first round sees {:?} jobs", unassigned.first()));
    }
    if unassigned.len() > log2_ceil(n) + 1 {
        rec.fail(2, format!("{what}: {} rounds for n = {n}", unassigned.len()));
    }
}

/// Per-slot occupancy of one machine: `slot -> job index`.
fn occupancy(inst: &Instance, s: &Schedule, i: usize) -> Result<Vec<Option<usize>>, String> {
    let end = s.machines[i].iter().map(|x| x.end).max().unwrap_or(0);
    let mut occ = vec![None; end.max(0) as usize];
    for x in &s.machines[i] {
        let j = inst.index_of(x.job).ok_or("unknown job")?;
        for t in x.start..x.end {
            if occ[t as usize].replace(j).is_some() {
                return Err(format!("machine {i} double booked at {t}"));
            }
        }
    }
    Ok(occ)
}

fn check_total(inst: &Instance, rec: &mut Record, opt: Option<&common::Optimum>) {
    let sol = match solve_total(inst) {
        Ok(s) => s,
        Err(e) => {
            rec.fail(2, format!("solve_total failed: {e}"));
            return;
        }
    };
    match manual_total(inst, rec) {
        Some((lp0, trace)) => {
            if lp0 != sol.lp0_objective || trace != sol.trace {
                rec.fail(9, "manual rounding loop disagrees with solve_total".into());
            }
        }
        None => rec.fail(9, "manual total rounding loop failed".into()),
    }
    let lp0 = sol.lp0_objective.clone();
    let r = sol.trace.rounds.len();
    rec.total_rounds = r;

    // 1: LP lower bound.
    if let Some(opt) = opt {
        if lp0 > int(opt.value) {
            rec.fail(1, format!("LP optimum {lp0} > OPT {}", opt.value));
        }
    }

    // 2: halving.
    let unassigned: Vec<usize> = sol.trace.rounds.iter().map(|x| x.unassigned).collect();
    check_halving(rec, "total", inst.n(), &unassigned);

    // 3: cost, recomputed here.
    let mut cost = Rational::from_integer(0.into());
    for (j, pl) in sol.assignment.placements.iter().enumerate() {
        let job = inst.job(j);
        let Some(p) = job.p[pl.machine] else {
            rec.fail(3, format!("job {} on ineligible machine", job.id));
            return;
        };
        if pl.slot < job.release {
            rec.fail(3, format!("job {} placed before release", job.id));
        }
        cost += int(pl.slot - job.release) + ratio(p, 2);
    }
    if cost > lp0 {
        rec.fail(3, format!("cost {cost} > LP optimum {lp0}"));
    }

    // 4: overload over every integer window.
    let horizon = inst.horizon() + 1;
    for i in 0..inst.m() {
        let Some(kmax) = inst.jobs().iter().filter_map(|j| j.p[i]).map(class).max() else {
            continue;
        };
        for k in 0..=kmax {
            let placed: Vec<(Time, Time)> = sol
                .assignment
                .placements
                .iter()
                .enumerate()
                .filter(|(_, pl)| pl.machine == i)
                .map(|(j, pl)| (pl.slot, inst.job(j).p[i].unwrap()))
                .filter(|&(_, p)| class(p) <= k)
                .collect();
            let bound = (8 + 10 * r as Time) << k;
            for t1 in 0..=horizon {
                for t2 in t1..=horizon {
                    let vol: Time = placed.iter().filter(|(t, _)| (t1..=t2).contains(t)).map(|x| x.1).sum();
                    let excess = vol - (t2 - t1);
                    if excess > bound {
                        rec.fail(4, format!("machine {i} class {k} [{t1}, {t2}] excess {excess} > {bound}"));
                    }
                    let norm = ratio(excess, 1 << k);
                    if norm > rec.overload_worst {
                        rec.overload_worst = norm;
                    }
                }
            }
        }
    }

    // 5 and 6 on the converted schedule.
    let schedule = tentative_to_schedule(inst, &sol.assignment);
    let mut total_flow = 0;
    let mut processed = vec![0; inst.n()];
    let mut completion = vec![0; inst.n()];
    for i in 0..inst.m() {
        let occ = match occupancy(inst, &schedule, i) {
            Ok(o) => o,
            Err(e) => {
                rec.fail(5, e);
                return;
            }
        };
        let on_i: Vec<usize> = (0..inst.n()).filter(|&j| sol.assignment.placements[j].machine == i).collect();
        let busy: Time = on_i.iter().map(|&j| inst.job(j).p[i].unwrap()).sum();
        for (t, o) in occ.iter().enumerate() {
            if let Some(j) = *o {
                if (t as Time) < inst.job(j).release {
                    rec.fail(5, format!("job {j} runs before release"));
                }
                processed[j] += 1;
                completion[j] = completion[j].max(t as Time + 1);
            }
        }
        let classes: BTreeSet<u32> = on_i.iter().map(|&j| class(inst.job(j).p[i].unwrap())).collect();
        for k in classes {
            let members: Vec<usize> = on_i.iter().copied().filter(|&j| class(inst.job(j).p[i].unwrap()) == k).collect();
            // Remaining volume after each slot, summed over time.
            let mut lhs = 0;
            for t in 0..occ.len() as Time {
                for &j in &members {
                    let job = inst.job(j);
                    if job.release <= t {
                        let done = occ[..=t as usize].iter().filter(|o| **o == Some(j)).count() as Time;
                        lhs += job.p[i].unwrap() - done;
                    }
                }
            }
            let rhs: Time = occ
                .iter()
                .enumerate()
                .filter_map(|(t, o)| o.filter(|j| members.contains(j)).map(|j| t as Time - inst.job(j).release))
                .sum();
            if lhs != rhs {
                rec.fail(5, format!("machine {i} class {k}: accounting {lhs} != {rhs}"));
            }
            let mut flow = 0;
            let mut frac = Rational::from_integer(0.into());
            for &j in &members {
                let job = inst.job(j);
                let p = job.p[i].unwrap();
                let c = occ.iter().rposition(|o| *o == Some(j)).unwrap() as Time + 1;
                flow += c - job.release;
                let offsets: Time = occ
                    .iter()
                    .enumerate()
                    .filter(|(_, o)| **o == Some(j))
                    .map(|(t, _)| t as Time - job.release)
                    .sum();
                frac += ratio(offsets, p);
            }
            if int(flow) > frac.clone() + int(busy) {
                rec.fail(5, format!("machine {i} class {k}: flow {flow} > fractional {frac} + {busy}"));
            }
        }
    }
    for j in 0..inst.n() {
        let job = inst.job(j);
        let p = job.p[sol.assignment.placements[j].machine].unwrap();
        if processed[j] != p {
            rec.fail(6, format!("job {} processed {} of {p}", job.id, processed[j]));
        }
        total_flow += completion[j] - job.release;
    }
    if total_flow != schedule.metrics(inst).total_flow {
        rec.fail(6, "library metrics disagree with recount".into());
    }
    if let Some(opt) = opt {
        if total_flow < opt.value {
            rec.fail(6, format!("total flow {total_flow} below OPT {}", opt.value));
        }
        rec.total_ratio = Some(if opt.value == 0 { int(1) } else { ratio(total_flow, opt.value) });
    }

    // 12: mutation battery.
    let art = TotalArtifacts {
        schedule,
        assignment: sol.assignment,
        trace: sol.trace,
    };
    let outcomes = mutation_battery_total(inst, &art);
    let applied = outcomes.iter().filter(|o| o.applied).count();
    rec.faults_applied += applied;
    if applied < 3 {
        rec.fail(12, format!("only {applied} total-flow mutations applicable"));
    }
    for o in outcomes.iter().filter(|o| o.applied && !o.detected) {
        rec.fail(12, format!("total-flow mutation {:?} undetected", o.fault));
    }
}

fn check_max(inst: &Instance, rec: &mut Record, opt: Option<&common::Optimum>) {
    let sol = match solve_max(inst) {
        Ok(s) => s,
        Err(e) => {
            rec.fail(7, format!("solve_max failed: {e}"));
            return;
        }
    };
    let d = sol.d_star;
    match manual_max(inst, d, rec) {
        Some(trace) if trace == sol.trace => {}
        _ => rec.fail(9, "manual max rounding loop disagrees with solve_max".into()),
    }
    rec.max_rounds = sol.trace.rounds.len();

    // 7: boundary and oracle.
    if !is_feasible(inst, d).unwrap_or(false) {
        rec.fail(7, format!("LP infeasible at D* = {d}"));
    }
    if is_feasible(inst, d - 1).unwrap_or(true) {
        rec.fail(7, format!("LP feasible at D* - 1 = {}", d - 1));
    }
    if let Some(opt) = opt {
        if d > opt.value {
            rec.fail(7, format!("D* = {d} > OPT {}", opt.value));
        }
    }

    // 2: halving.
    let unassigned: Vec<usize> = sol.trace.rounds.iter().map(|x| x.unassigned).collect();
    check_halving(rec, "max", inst.n(), &unassigned);

    // 8: additive bound with an independently computed FIFO schedule.
    let p_max = inst
        .jobs()
        .iter()
        .flat_map(|j| j.p.iter().flatten().copied())
        .filter(|&p| p <= d)
        .max()
        .unwrap();
    if p_max != sol.p_max {
        rec.fail(8, format!("p_max {} != {p_max}", sol.p_max));
    }
    let r = sol.trace.rounds.len() as Time;
    let mut realized = 0;
    for i in 0..inst.m() {
        let idx: Vec<usize> = (0..inst.n()).filter(|&j| sol.assignment[j] == i).collect();
        let jobs: Vec<(Time, Time)> = idx
            .iter()
            .map(|&j| match inst.job(j).p[i] {
                Some(p) if p <= d => (inst.job(j).release, p),
                _ => (inst.job(j).release, Time::MAX / 8),
            })
            .collect();
        if jobs.iter().any(|j| j.1 == Time::MAX / 8) {
            rec.fail(8, format!("machine {i} has a job with p > D*"));
            return;
        }
        for (k, c) in run_machine(&jobs, false).into_iter().enumerate() {
            realized = realized.max(c - jobs[k].0);
        }
        let last = inst.max_release();
        for t1 in 0..=last {
            for t2 in t1..=last {
                let vol: Time = jobs.iter().filter(|(rj, _)| (t1..=t2).contains(rj)).map(|x| x.1).sum();
                if vol - (t2 - t1) > d + 6 * r * p_max {
                    rec.fail(8, format!("machine {i} window [{t1}, {t2}] volume {vol}"));
                }
            }
        }
    }
    if realized != sol.realized {
        rec.fail(8, format!("realized {} but recount gives {realized}", sol.realized));
    }
    if realized > d + (6 * r + 1) * p_max {
        rec.fail(8, format!("max flow {realized} > {d} + {}·{p_max}", 6 * r + 1));
    }
    if let Some(opt) = opt {
        rec.max_gap_pmax = ratio(realized - opt.value, p_max);
        let assigned = (0..inst.n()).filter_map(|j| inst.job(j).p[sol.assignment[j]]).max().unwrap();
        rec.max_gap_assigned = ratio(realized - opt.value, assigned);
    }

    let art = MaxArtifacts {
        d_star: d,
        assignment: sol.assignment,
        trace: sol.trace,
        schedule: sol.schedule,
    };
    let outcomes = mutation_battery_max(inst, &art);
    let applied = outcomes.iter().filter(|o| o.applied).count();
    rec.faults_applied += applied;
    if applied < 3 {
        rec.fail(12, format!("only {applied} max-flow mutations applicable"));
    }
    for o in outcomes.iter().filter(|o| o.applied && !o.detected) {
        rec.fail(12, format!("max-flow mutation {:?} undetected", o.fault));
    }
}

fn check_preprocessing(inst: &Instance, rec: &mut Record, opt: Option<&common::Optimum>) {
    let n2 = (inst.n() * inst.n()) as Time;
    let mut guesses: Vec<Time> = inst.jobs().iter().flat_map(|j| j.p.iter().flatten().copied()).collect();
    guesses.sort_unstable();
    guesses.dedup();
    for &g in &guesses {
        let Ok(out) = inst.preprocess_small_jobs(g) else {
            continue;
        };
        rec.preprocess_checked += 1;
        let ps: Vec<Time> = out.jobs().iter().flat_map(|j| j.p.iter().flatten().copied()).collect();
        let (lo, hi) = (*ps.iter().min().unwrap(), *ps.iter().max().unwrap());
        if hi > n2 * lo {
            rec.fail(11, format!("guess {g}: spread {hi}/{lo} > n^2"));
        }
        for (a, b) in inst.jobs().iter().zip(out.jobs()) {
            for (pa, pb) in a.p.iter().zip(&b.p) {
                if let (Some(pa), Some(pb)) = (pa, pb) {
                    if pb < pa {
                        rec.fail(11, format!("guess {g}: p decreased {pa} -> {pb}"));
                    }
                }
            }
        }
    }
    // The doubling claim is for the guess equal to the largest size an
    // optimal schedule uses.
    if let Some(opt) = opt {
        let g = (0..inst.n()).map(|j| inst.job(j).p[opt.assignment[j]].unwrap()).max().unwrap();
        match inst.preprocess_small_jobs(g) {
            Ok(out) => {
                let after = brute_optimum(&out, true).value;
                if after > 2 * opt.value {
                    rec.fail(11, format!("guess {g}: OPT(J') = {after} > 2·{}", opt.value));
                }
            }
            Err(e) => rec.fail(11, format!("optimal guess {g} rejected: {e}")),
        }
    }
}

fn run_instance(name: String, inst: Instance) -> Record {
    let mut rec = Record {
        name,
        in_cap: inst.n() <= CAP,
        overload_worst: int(0),
        max_gap_pmax: int(0),
        max_gap_assigned: int(0),
        ..Default::default()
    };
    let opt_total = rec.in_cap.then(|| brute_optimum(&inst, true));
    let opt_max = rec.in_cap.then(|| brute_optimum(&inst, false));
    check_total(&inst, &mut rec, opt_total.as_ref());
    check_max(&inst, &mut rec, opt_max.as_ref());
    check_preprocessing(&inst, &mut rec, opt_total.as_ref());
    rec
}

fn random_lp(rng: &mut ChaCha8Rng) -> (SmallLp, LinearProgram) {
    let n = rng.gen_range(1..=8);
    let rows = rng.gen_range(1..=7);
    let cost: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
    let mut small = SmallLp {
        cost: cost.clone(),
        rows: Vec::new(),
    };
    for _ in 0..rows {
        let coeffs: Vec<i64> = (0..n)
            .map(|_| if rng.gen_bool(0.6) { rng.gen_range(-3..=3) } else { 0 })
            .collect();
        let le = rng.gen_bool(0.6);
        let rhs = rng.gen_range(-2..=8);
        small.rows.push((coeffs, le, rhs));
    }
    // Keeps the region bounded.
    small.rows.push((vec![1; n], true, rng.gen_range(1..=10)));
    let mut lp = LinearProgram::new();
    let vars: Vec<usize> = cost.iter().map(|&c| lp.add_var(int(c))).collect();
    for (coeffs, le, rhs) in &small.rows {
        lp.add_constraint(
            coeffs.iter().enumerate().map(|(k, &a)| (vars[k], int(a))),
            if *le { Sense::Le } else { Sense::Ge },
            int(*rhs),
        );
    }
    (small, lp)
}

fn random_lps() -> (usize, usize, Vec<String>) {
    let results: Vec<(bool, Option<String>)> = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed);
            let (small, lp) = random_lp(&mut rng);
            let expected = vertex_enumeration(&small);
            let sol = match solve_min_basic(&lp) {
                Ok(s) => s,
                Err(e) => return (false, Some(format!("lp {seed}: solver error {e}"))),
            };
            match expected {
                None if sol.is_infeasible() => (false, None),
                None => (true, Some(format!("lp {seed}: solver found a point, oracle none"))),
                Some((num, den)) => {
                    let want = ratio(num as i64, den as i64);
                    if sol.is_infeasible() {
                        (true, Some(format!("lp {seed}: solver infeasible, oracle {want}")))
                    } else if sol.objective != want {
                        (true, Some(format!("lp {seed}: objective {} != {want}", sol.objective)))
                    } else if !verify_basic(&lp, &sol) {
                        (true, Some(format!("lp {seed}: vertex check failed")))
                    } else {
                        (true, None)
                    }
                }
            }
        })
        .collect();
    let feasible = results.iter().filter(|r| r.0).count();
    let errors: Vec<String> = results.into_iter().filter_map(|r| r.1).collect();
    (1000, feasible, errors)
}

/// Every single-machine instance with n <= 4, p <= 3, r <= 3.
fn simulator_ground_truth() -> (usize, Vec<String>) {
    let kinds: Vec<(Time, Time)> = (0..=3).flat_map(|r| (1..=3).map(move |p| (r, p))).collect();
    let mut sets: Vec<Vec<(Time, Time)>> = Vec::new();
    fn multisets(kinds: &[(Time, Time)], from: usize, cur: &mut Vec<(Time, Time)>, out: &mut Vec<Vec<(Time, Time)>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == 4 {
            return;
        }
        for k in from..kinds.len() {
            cur.push(kinds[k]);
            multisets(kinds, k, cur, out);
            cur.pop();
        }
    }
    multisets(&kinds, 0, &mut Vec::new(), &mut sets);
    let errors: Vec<String> = sets
        .par_iter()
        .filter_map(|jobs| {
            let sim: Vec<SimJob> = jobs
                .iter()
                .enumerate()
                .map(|(id, &(r, p))| SimJob::new(id as u64, r, p))
                .collect();
            let measure = |policy| {
                let mut completion = vec![0; jobs.len()];
                for s in simulate(&sim, policy) {
                    completion[s.job as usize] = completion[s.job as usize].max(s.end);
                }
                let flows: Vec<Time> = completion.iter().zip(jobs).map(|(c, j)| c - j.0).collect();
                (flows.iter().sum::<Time>(), flows.into_iter().max().unwrap())
            };
            let srpt = measure(Policy::Srpt).0;
            let fifo = measure(Policy::Fifo).1;
            let best_total = single_machine_dp(jobs, true);
            let best_max = single_machine_dp(jobs, false);
            (srpt != best_total || fifo != best_max).then(|| {
                format!("{jobs:?}: SRPT {srpt} vs {best_total}, FIFO {fifo} vs {best_max}")
            })
        })
        .collect();
    (sets.len(), errors)
}

fn main() {
    let start = Instant::now();
    let mut instances = grid_instances();
    let grid_count = instances.len();
    instances.extend(edge_cases());
    let records: Vec<Record> = instances
        .into_par_iter()
        .map(|(name, inst)| run_instance(name, inst))
        .collect();
    let (lp_count, lp_feasible, lp_errors) = random_lps();
    let (sim_count, sim_errors) = simulator_ground_truth();

    let in_cap = records.iter().filter(|r| r.in_cap).count();
    let violations = |c: usize| -> Vec<String> {
        records
            .iter()
            .flat_map(|r| r.violations.iter().filter(|v| v.0 == c).map(|v| v.1.clone()))
            .collect()
    };
    let max_ratio = records.iter().filter_map(|r| r.total_ratio.clone()).max().unwrap_or(int(1));
    let worst_overload = records.iter().map(|r| r.overload_worst.clone()).max().unwrap_or(int(0));
    let worst_gap = records.iter().map(|r| r.max_gap_pmax.clone()).max().unwrap_or(int(0));
    let worst_gap_assigned = records.iter().map(|r| r.max_gap_assigned.clone()).max().unwrap_or(int(0));
    let max_total_rounds = records.iter().map(|r| r.total_rounds).max().unwrap_or(0);
    let max_max_rounds = records.iter().map(|r| r.max_rounds).max().unwrap_or(0);
    let lps: usize = records.iter().map(|r| r.lps_verified).sum();
    let faults: usize = records.iter().map(|r| r.faults_applied).sum();
    let pre: usize = records.iter().map(|r| r.preprocess_checked).sum();
    let f = |q: &Rational| format!("{q} (~{:.3})", flowsched::rational::to_f64(q));

    let mut nine = violations(9);
    nine.extend(lp_errors);
    let lines: Vec<(usize, &str, Vec<String>, String)> = vec![
        (1, "LP lower bound", violations(1), format!("{in_cap} in-cap instances, LP optimum <= OPT exactly")),
        (
            2,
            "halving",
            violations(2),
            format!("max rounds: total {max_total_rounds}, max {max_max_rounds}"),
        ),
        (3, "cost preservation", violations(3), "cost(y*) <= LP optimum exactly".into()),
        (4, "low overload", violations(4), format!("worst excess / 2^k = {}", f(&worst_overload))),
        (5, "flow accounting", violations(5), "identity and per-class gap exact".into()),
        (6, "total-flow sanity", violations(6), format!("max ALG/OPT = {}", f(&max_ratio))),
        (7, "max-flow boundary", violations(7), "LP(D*) feasible, LP(D*-1) infeasible, D* <= OPT".into()),
        (8, "max-flow additive bound", violations(8), format!(
            "worst (ALG-OPT)/p_max = {}, per largest assigned p = {}",
            f(&worst_gap),
            f(&worst_gap_assigned)
        )),
        (
            9,
            "vertex solver",
            nine,
            format!("{lps} pipeline LPs verified; {lp_count} random LPs ({lp_feasible} feasible) match vertex enumeration"),
        ),
        (10, "simulator ground truth", sim_errors, format!("{sim_count} single-machine instances")),
        (11, "preprocessing", violations(11), format!("{pre} (instance, guess) pairs")),
        (12, "fault injection", violations(12), format!("{faults} mutants, all rejected")),
    ];

    let mut out = String::new();
    let _ = writeln!(
        out,
        "acceptance: {grid_count} grid instances + {} edge cases",
        records.len() - grid_count
    );
    let mut failed = 0;
    for (id, title, errs, summary) in &lines {
        let ok = errs.is_empty();
        failed += usize::from(!ok);
        let _ = writeln!(
            out,
            "criterion {id:>2} {} {title}: {}",
            if ok { "PASS" } else { "FAIL" },
            if ok { summary.clone() } else { format!("{} violations, e.g. {}", errs.len(), errs[..errs.len().min(3)].join(" | ")) }
        );
    }
    let _ = writeln!(out, "acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    print!("{out}");
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
