//! Test-side oracles, written independently of the library code they check.
#![allow(dead_code)]

use std::collections::HashMap;

use flowsched::instance::{generate_random, GeneratorParams, Instance, Job, Time};

pub fn job(id: u64, r: Time, p: &[Option<Time>]) -> Job {
    Job::new(id, r, p.to_vec())
}

pub fn one_machine(jobs: &[(Time, Time)]) -> Instance {
    Instance::new(
        1,
        jobs.iter()
            .enumerate()
            .map(|(id, &(r, p))| Job::new(id as u64, r, vec![Some(p)]))
            .collect(),
    )
    .unwrap()
}

/// All generator grid cells.
pub fn grid() -> Vec<GeneratorParams> {
    let mut out = Vec::new();
    for n in 2..=5 {
        for m in 1..=2 {
            for p_max in [2, 4] {
                for r_max in [0, 4] {
                    for density in [1.0, 0.7] {
                        for seed in 0..10 {
                            out.push(GeneratorParams {
                                n,
                                m,
                                p_max,
                                r_max,
                                density,
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn grid_instances() -> Vec<(String, Instance)> {
    grid()
        .into_iter()
        .map(|p| {
            (
                format!("n{}m{}p{}r{}d{}s{}", p.n, p.m, p.p_max, p.r_max, p.density, p.seed),
                generate_random(p),
            )
        })
        .collect()
}

/// Twenty hand-written edge cases.
pub fn edge_cases() -> Vec<(String, Instance)> {
    let s = Some;
    let x: Option<Time> = None;
    let cases: Vec<(&str, usize, Vec<Job>)> = vec![
        ("single_unit", 1, vec![job(0, 0, &[s(1)])]),
        ("single_one_eligible", 3, vec![job(0, 2, &[x, s(3), x])]),
        ("twins", 1, vec![job(0, 0, &[s(2)]), job(1, 0, &[s(2)])]),
        ("long_then_short", 1, vec![job(0, 0, &[s(3)]), job(1, 1, &[s(1)])]),
        ("overlap_pair", 1, vec![job(0, 0, &[s(2)]), job(1, 1, &[s(2)])]),
        ("unit_burst_one_machine", 1, (0..5).map(|i| job(i, 0, &[s(1)])).collect()),
        ("unit_burst_two_machines", 2, (0..5).map(|i| job(i, 0, &[s(1), s(1)])).collect()),
        ("staggered_no_overlap", 1, (0..4).map(|i| job(i, 2 * i as Time, &[s(2)])).collect()),
        (
            "class_burst",
            1,
            vec![job(0, 0, &[s(1)]), job(1, 0, &[s(2)]), job(2, 0, &[s(4)]), job(3, 0, &[s(8)]), job(4, 0, &[s(1)]), job(5, 0, &[s(2)])],
        ),
        (
            "asymmetric_speeds",
            2,
            vec![job(0, 0, &[s(1), s(6)]), job(1, 0, &[s(6), s(1)]), job(2, 1, &[s(2), s(3)]), job(3, 1, &[s(3), s(2)])],
        ),
        (
            "disjoint_eligibility",
            2,
            vec![job(0, 0, &[s(2), x]), job(1, 0, &[x, s(2)]), job(2, 1, &[s(3), x]), job(3, 1, &[x, s(1)])],
        ),
        ("release_gap", 1, vec![job(0, 0, &[s(2)]), job(1, 20, &[s(3)]), job(2, 21, &[s(1)])]),
        ("size_spread", 1, vec![job(0, 0, &[s(8)]), job(1, 0, &[s(1)]), job(2, 3, &[s(1)])]),
        ("unit_chain_seven", 1, (0..7).map(|i| job(i, i as Time, &[s(1)])).collect()),
        (
            "mixed_seven",
            2,
            vec![
                job(0, 0, &[s(3), s(1)]),
                job(1, 0, &[s(2), s(2)]),
                job(2, 1, &[s(1), s(4)]),
                job(3, 2, &[s(4), x]),
                job(4, 2, &[x, s(2)]),
                job(5, 3, &[s(1), s(1)]),
                job(6, 5, &[s(2), s(3)]),
            ],
        ),
        ("three_machines_single", 3, vec![job(0, 0, &[s(4), s(2), s(3)])]),
        (
            "nearly_dead_machine",
            2,
            vec![job(0, 0, &[s(2), x]), job(1, 0, &[s(2), x]), job(2, 0, &[s(2), s(7)])],
        ),
        (
            "decreasing_sizes",
            1,
            vec![job(0, 0, &[s(4)]), job(1, 0, &[s(3)]), job(2, 0, &[s(2)]), job(3, 0, &[s(1)])],
        ),
        ("short_interrupts_long", 1, vec![job(0, 0, &[s(8)]), job(1, 1, &[s(1)]), job(2, 2, &[s(1)])]),
        (
            "three_by_six",
            3,
            vec![
                job(0, 0, &[s(2), s(3), s(1)]),
                job(1, 0, &[s(1), x, s(2)]),
                job(2, 1, &[x, s(2), s(2)]),
                job(3, 1, &[s(3), s(1), x]),
                job(4, 2, &[s(2), s(2), s(2)]),
                job(5, 4, &[s(1), s(4), s(3)]),
            ],
        ),
    ];
    cases
        .into_iter()
        .map(|(name, m, jobs)| (name.to_string(), Instance::new(m, jobs).unwrap()))
        .collect()
}

/// Slot-by-slot single-machine simulation. `jobs` are `(r, p)`; returns
/// completion times. `srpt` picks least remaining work, otherwise earliest
/// release; ties by position.
pub fn run_machine(jobs: &[(Time, Time)], srpt: bool) -> Vec<Time> {
    let mut left: Vec<Time> = jobs.iter().map(|j| j.1).collect();
    let mut done = vec![0; jobs.len()];
    let mut t = 0;
    let mut open = jobs.len();
    while open > 0 {
        let pick = (0..jobs.len())
            .filter(|&j| jobs[j].0 <= t && left[j] > 0)
            .min_by_key(|&j| if srpt { (left[j], jobs[j].0, j) } else { (jobs[j].0, 0, j) });
        if let Some(j) = pick {
            left[j] -= 1;
            if left[j] == 0 {
                done[j] = t + 1;
                open -= 1;
            }
        }
        t += 1;
    }
    done
}

/// Visits every assignment of jobs (instance order) to eligible machines.
pub fn assignments(inst: &Instance, mut visit: impl FnMut(&[usize])) {
    fn rec(inst: &Instance, j: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if j == inst.n() {
            visit(cur);
            return;
        }
        for i in 0..inst.m() {
            if inst.p(i, j).is_some() {
                cur.push(i);
                rec(inst, j + 1, cur, visit);
                cur.pop();
            }
        }
    }
    rec(inst, 0, &mut Vec::new(), &mut visit);
}

pub struct Optimum {
    pub value: Time,
    pub assignment: Vec<usize>,
}

/// Non-migratory optimum by enumeration with an optimal single-machine
/// rule: SRPT for total flow, FIFO for maximum flow.
pub fn brute_optimum(inst: &Instance, total: bool) -> Optimum {
    let mut best = Optimum {
        value: Time::MAX,
        assignment: Vec::new(),
    };
    assignments(inst, |a| {
        let mut value = 0;
        for i in 0..inst.m() {
            let idx: Vec<usize> = (0..inst.n()).filter(|&j| a[j] == i).collect();
            let jobs: Vec<(Time, Time)> = idx
                .iter()
                .map(|&j| (inst.job(j).release, inst.p(i, j).unwrap()))
                .collect();
            let done = run_machine(&jobs, total);
            for (k, &c) in done.iter().enumerate() {
                let f = c - jobs[k].0;
                value = if total { value + f } else { value.max(f) };
            }
        }
        if value < best.value {
            best = Optimum {
                value,
                assignment: a.to_vec(),
            };
        }
    });
    best
}

/// Optimum over every unit-slot schedule of one machine (idling allowed).
pub fn single_machine_dp(jobs: &[(Time, Time)], total: bool) -> Time {
    fn go(
        jobs: &[(Time, Time)],
        total: bool,
        t: Time,
        left: &mut Vec<Time>,
        memo: &mut HashMap<(Time, Vec<Time>), Time>,
    ) -> Time {
        if left.iter().all(|&l| l == 0) {
            return 0;
        }
        let last = jobs.iter().map(|j| j.0).max().unwrap();
        let cap = last + jobs.iter().map(|j| j.1).sum::<Time>();
        if t > cap {
            return Time::MAX / 4;
        }
        if let Some(&v) = memo.get(&(t, left.clone())) {
            return v;
        }
        let alive = (0..jobs.len()).filter(|&j| jobs[j].0 <= t && left[j] > 0).count() as Time;
        let mut best = {
            let rest = go(jobs, total, t + 1, left, memo);
            if total {
                rest + alive
            } else {
                rest
            }
        };
        for j in 0..jobs.len() {
            if jobs[j].0 <= t && left[j] > 0 {
                left[j] -= 1;
                let rest = go(jobs, total, t + 1, left, memo);
                let finished = left[j] == 0;
                left[j] += 1;
                let v = if total {
                    rest + alive
                } else if finished {
                    rest.max(t + 1 - jobs[j].0)
                } else {
                    rest
                };
                best = best.min(v);
            }
        }
        memo.insert((t, left.clone()), best);
        best
    }
    if jobs.is_empty() {
        return 0;
    }
    let mut left: Vec<Time> = jobs.iter().map(|j| j.1).collect();
    go(jobs, total, 0, &mut left, &mut HashMap::new())
}

/// Small dense LP `min c·x, rows, x >= 0` with integer data.
#[derive(Debug, Clone)]
pub struct SmallLp {
    pub cost: Vec<i64>,
    /// `(coeffs, is_le, rhs)`.
    pub rows: Vec<(Vec<i64>, bool, i64)>,
}

/// Exact fraction `num / den` with `den > 0`.
pub type Frac = (i128, i128);

fn det_bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Exhaustive vertex enumeration: every choice of `n` constraints (rows or
/// bounds) whose system is nonsingular is solved by Cramer's rule and kept
/// if feasible. Returns the minimum objective, or `None` if no vertex is
/// feasible. Callers keep the region bounded.
pub fn vertex_enumeration(lp: &SmallLp) -> Option<Frac> {
    let n = lp.cost.len();
    // Constraint k < rows: row k; otherwise bound x_{k - rows} = 0.
    let total = lp.rows.len() + n;
    let coeff = |k: usize| -> (Vec<i128>, i128) {
        if k < lp.rows.len() {
            (lp.rows[k].0.iter().map(|&a| a as i128).collect(), lp.rows[k].2 as i128)
        } else {
            let mut e = vec![0i128; n];
            e[k - lp.rows.len()] = 1;
            (e, 0)
        }
    };
    let mut best: Option<Frac> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let sys: Vec<(Vec<i128>, i128)> = pick.iter().map(|&k| coeff(k)).collect();
        let a: Vec<Vec<i128>> = sys.iter().map(|s| s.0.clone()).collect();
        let d = det_bareiss(a.clone());
        if d != 0 {
            let (d, flip) = if d < 0 { (-d, -1) } else { (d, 1) };
            let nums: Vec<i128> = (0..n)
                .map(|c| {
                    let mut m = a.clone();
                    for (r, s) in sys.iter().enumerate() {
                        m[r][c] = s.1;
                    }
                    flip * det_bareiss(m)
                })
                .collect();
            let feasible = nums.iter().all(|&x| x >= 0)
                && lp.rows.iter().all(|(c, le, b)| {
                    let lhs: i128 = c.iter().zip(&nums).map(|(&a, &x)| a as i128 * x).sum();
                    let rhs = *b as i128 * d;
                    if *le {
                        lhs <= rhs
                    } else {
                        lhs >= rhs
                    }
                });
            if feasible {
                let obj: i128 = lp.cost.iter().zip(&nums).map(|(&c, &x)| c as i128 * x).sum();
                let better = match best {
                    None => true,
                    Some((bn, bd)) => obj * bd < bn * d,
                };
                if better {
                    best = Some((obj, d));
                }
            }
        }
        // Next combination of n indices out of `total`.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for j in i + 1..n {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}
