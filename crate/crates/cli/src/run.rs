//! Solve pipelines shared by `solve`, `compare` and `bench`.

use flowsched::instance::{Instance, InstanceError, Time};
use flowsched::max_flow::{solve_max, MaxTrace};
use flowsched::oracle::{oracle_max, oracle_total};
use flowsched::rational::{int, ratio, ExactValue, Rational};
use flowsched::schedule::{schedule_assignment, Metrics, Policy, Schedule};
use flowsched::total_flow::{overload_profile, solve_total, tentative_to_schedule, RoundTrace, TentativeAssignment};
use flowsched::verifier::{
    audit_max, audit_total, mutate_max, mutate_total, AuditReport, Fault, MaxArtifacts, TotalArtifacts,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Total,
    Max,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Total => "total",
            Objective::Max => "max",
        }
    }
}

/// Failure classes, mapped onto exit codes by the binary.
#[derive(Debug)]
pub enum RunError {
    /// Bad or unsolvable input (exit 1).
    Input(String),
    /// Flags that parse but make no sense (exit 2).
    Usage(String),
    /// A solver invariant or audit failed (exit 3).
    Audit(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(s) | RunError::Usage(s) | RunError::Audit(s) => f.write_str(s),
        }
    }
}

impl std::error::Error for RunError {}

impl From<InstanceError> for RunError {
    fn from(e: InstanceError) -> Self {
        RunError::Input(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub enum Artifacts {
    Total(TotalArtifacts),
    Max(MaxArtifacts),
}

/// Result of one solve, possibly on a preprocessed copy of the instance.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub objective: Objective,
    /// Instance the artifacts refer to (the preprocessed one, if any).
    pub solved: Instance,
    pub guess: Option<Time>,
    pub artifacts: Artifacts,
    /// Schedule of the original instance.
    pub schedule: Schedule,
    pub metrics: Metrics,
    pub rounds: usize,
    pub lp_objective: Option<Rational>,
    pub tentative_cost: Option<Rational>,
    pub d_star: Option<Time>,
    pub p_max: Option<Time>,
    /// Largest processing time among the chosen machines (max flow only).
    pub assigned_p_max: Option<Time>,
}

fn run_total(original: &Instance, solved: Instance, guess: Option<Time>) -> Result<Outcome, RunError> {
    let sol = solve_total(&solved).map_err(|e| RunError::Audit(format!("total-flow solver: {e}")))?;
    let schedule = tentative_to_schedule(original, &sol.assignment);
    let metrics = schedule.metrics(original);
    let art = TotalArtifacts {
        schedule: tentative_to_schedule(&solved, &sol.assignment),
        assignment: sol.assignment,
        trace: sol.trace,
    };
    Ok(Outcome {
        objective: Objective::Total,
        rounds: art.trace.rounds.len(),
        solved,
        guess,
        artifacts: Artifacts::Total(art),
        schedule,
        metrics,
        lp_objective: Some(sol.lp0_objective),
        tentative_cost: Some(sol.cost),
        d_star: None,
        p_max: None,
        assigned_p_max: None,
    })
}

fn run_max(original: &Instance, solved: Instance, guess: Option<Time>) -> Result<Outcome, RunError> {
    let sol = solve_max(&solved).map_err(|e| RunError::Audit(format!("max-flow solver: {e}")))?;
    let schedule = schedule_assignment(original, &sol.assignment, Policy::Fifo);
    let metrics = schedule.metrics(original);
    let assigned_p_max = sol
        .assignment
        .iter()
        .enumerate()
        .filter_map(|(j, &i)| solved.p(i, j))
        .max();
    Ok(Outcome {
        objective: Objective::Max,
        rounds: sol.trace.rounds.len(),
        solved,
        guess,
        artifacts: Artifacts::Max(MaxArtifacts {
            d_star: sol.d_star,
            assignment: sol.assignment,
            trace: sol.trace,
            schedule: sol.schedule,
        }),
        schedule,
        metrics,
        lp_objective: None,
        tentative_cost: None,
        d_star: Some(sol.d_star),
        p_max: Some(sol.p_max),
        assigned_p_max,
    })
}

fn value_of(o: &Outcome) -> Time {
    match o.objective {
        Objective::Total => o.metrics.total_flow,
        Objective::Max => o.metrics.max_flow,
    }
}

/// Solves `inst`. With `preprocess`, every distinct processing time is
/// tried as the size guess and the best schedule of the original instance
/// wins (ties go to the smaller guess).
pub fn solve(inst: &Instance, objective: Objective, preprocess: bool) -> Result<Outcome, RunError> {
    let once = |solved: Instance, guess| match objective {
        Objective::Total => run_total(inst, solved, guess),
        Objective::Max => run_max(inst, solved, guess),
    };
    if !preprocess {
        return once(inst.clone(), None);
    }
    let mut best: Option<Outcome> = None;
    for guess in inst.distinct_p() {
        let solved = match inst.preprocess_small_jobs(guess) {
            Ok(j) => j,
            Err(InstanceError::GuessExcludesJob { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let out = once(solved, Some(guess))?;
        if best.as_ref().map_or(true, |b| value_of(&out) < value_of(b)) {
            best = Some(out);
        }
    }
    best.ok_or_else(|| RunError::Input("no size guess admits every job".into()))
}

pub fn inject(outcome: &mut Outcome, fault: Fault) -> Result<(), RunError> {
    let not_applicable = || RunError::Usage(format!("fault {} does not apply to this run", fault.name()));
    outcome.artifacts = match &outcome.artifacts {
        Artifacts::Total(a) => Artifacts::Total(mutate_total(&outcome.solved, a, fault).ok_or_else(not_applicable)?),
        Artifacts::Max(a) => Artifacts::Max(mutate_max(&outcome.solved, a, fault).ok_or_else(not_applicable)?),
    };
    Ok(())
}

pub fn audit(outcome: &Outcome) -> AuditReport {
    match &outcome.artifacts {
        Artifacts::Total(a) => audit_total(&outcome.solved, a),
        Artifacts::Max(a) => audit_max(&outcome.solved, a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSummary {
    pub schema: String,
    pub version: u32,
    pub objective: Objective,
    pub n: usize,
    pub m: usize,
    pub total_flow: Time,
    pub max_flow: Time,
    pub total_fractional_flow: ExactValue,
    pub rounds: usize,
    pub preprocess_guess: Option<Time>,
    pub lp_objective: Option<ExactValue>,
    pub tentative_cost: Option<ExactValue>,
    pub d_star: Option<Time>,
    pub p_max: Option<Time>,
    pub assigned_p_max: Option<Time>,
    /// `"pass"`, `"fail"` or `"skipped"`.
    pub audit: String,
}

impl SolveSummary {
    pub fn new(inst: &Instance, o: &Outcome, audit: &str) -> Self {
        SolveSummary {
            schema: "flowsched.solve".into(),
            version: SCHEMA_VERSION,
            objective: o.objective,
            n: inst.n(),
            m: inst.m(),
            total_flow: o.metrics.total_flow,
            max_flow: o.metrics.max_flow,
            total_fractional_flow: o.metrics.total_fractional_exact.clone(),
            rounds: o.rounds,
            preprocess_guess: o.guess,
            lp_objective: o.lp_objective.as_ref().map(ExactValue::from),
            tentative_cost: o.tentative_cost.as_ref().map(ExactValue::from),
            d_star: o.d_star,
            p_max: o.p_max,
            assigned_p_max: o.assigned_p_max,
            audit: audit.into(),
        }
    }
}

/// `--out` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub schema: String,
    pub version: u32,
    pub objective: Objective,
    /// Machine per job, in instance order.
    pub assignment: Vec<AssignmentEntry>,
    pub schedule: Schedule,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentEntry {
    pub job: u64,
    pub machine: usize,
    /// Tentative slot (total flow only).
    pub slot: Option<Time>,
}

impl ScheduleFile {
    pub fn new(inst: &Instance, o: &Outcome) -> Self {
        let assignment = match &o.artifacts {
            Artifacts::Total(a) => a
                .assignment
                .placements
                .iter()
                .map(|p| AssignmentEntry {
                    job: p.job,
                    machine: p.machine,
                    slot: Some(p.slot),
                })
                .collect(),
            Artifacts::Max(a) => a
                .assignment
                .iter()
                .enumerate()
                .map(|(j, &machine)| AssignmentEntry {
                    job: inst.job(j).id,
                    machine,
                    slot: None,
                })
                .collect(),
        };
        ScheduleFile {
            schema: "flowsched.schedule".into(),
            version: SCHEMA_VERSION,
            objective: o.objective,
            assignment,
            schedule: o.schedule.clone(),
            metrics: o.metrics.clone(),
        }
    }
}

/// `--trace` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "objective", rename_all = "snake_case")]
pub enum TraceFile {
    Total {
        version: u32,
        preprocess_guess: Option<Time>,
        trace: RoundTrace,
        placements: TentativeAssignment,
    },
    Max {
        version: u32,
        preprocess_guess: Option<Time>,
        trace: MaxTrace,
    },
}

impl TraceFile {
    pub fn new(o: &Outcome) -> Self {
        match &o.artifacts {
            Artifacts::Total(a) => TraceFile::Total {
                version: SCHEMA_VERSION,
                preprocess_guess: o.guess,
                trace: a.trace.clone(),
                placements: a.assignment.clone(),
            },
            Artifacts::Max(a) => TraceFile::Max {
                version: SCHEMA_VERSION,
                preprocess_guess: o.guess,
                trace: a.trace.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TotalComparison {
    pub alg: Time,
    pub oracle: Time,
    pub ratio: ExactValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxComparison {
    pub alg: Time,
    pub oracle: Time,
    pub ratio: ExactValue,
    pub gap: Time,
    pub p_max: Time,
    pub gap_in_p_max: ExactValue,
    pub assigned_p_max: Time,
    pub gap_in_assigned_p_max: ExactValue,
    pub d_star: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub schema: String,
    pub version: u32,
    pub total: TotalComparison,
    pub max: MaxComparison,
}

fn ratio_of(alg: Time, opt: Time) -> Rational {
    if opt == 0 {
        int(1)
    } else {
        ratio(alg, opt)
    }
}

/// Algorithm vs brute-force optimum on both objectives.
pub fn compare(inst: &Instance) -> Result<Comparison, RunError> {
    let opt_total = oracle_total(inst).map_err(|e| RunError::Input(e.to_string()))?;
    let opt_max = oracle_max(inst).map_err(|e| RunError::Input(e.to_string()))?;
    let total = solve(inst, Objective::Total, false)?;
    let max = solve(inst, Objective::Max, false)?;
    let alg_total = total.metrics.total_flow;
    if alg_total < opt_total.value {
        return Err(RunError::Audit(format!(
            "algorithm total flow {alg_total} below the optimum {}",
            opt_total.value
        )));
    }
    let alg_max = max.metrics.max_flow;
    let p_max = max.p_max.expect("max run reports p_max");
    let assigned = max.assigned_p_max.expect("max run reports assigned sizes");
    Ok(Comparison {
        schema: "flowsched.compare".into(),
        version: SCHEMA_VERSION,
        total: TotalComparison {
            alg: alg_total,
            oracle: opt_total.value,
            ratio: ExactValue::from(ratio_of(alg_total, opt_total.value)),
        },
        max: MaxComparison {
            alg: alg_max,
            oracle: opt_max.value,
            ratio: ExactValue::from(ratio_of(alg_max, opt_max.value)),
            gap: alg_max - opt_max.value,
            p_max,
            gap_in_p_max: ExactValue::from(ratio(alg_max - opt_max.value, p_max)),
            assigned_p_max: assigned,
            gap_in_assigned_p_max: ExactValue::from(ratio(alg_max - opt_max.value, assigned)),
            d_star: max.d_star.expect("max run reports D*"),
        },
    })
}

/// Largest class-normalized overload of a total-flow run.
pub fn overload_normalized(o: &Outcome) -> Rational {
    match &o.artifacts {
        Artifacts::Total(a) => overload_profile(&o.solved, &a.assignment).max_normalized(),
        Artifacts::Max(_) => int(0),
    }
}
