//! Batch runs over a generator grid.

use std::path::{Path, PathBuf};

use flowsched::instance::{generate_random, GeneratorParams, Instance, Time};
use flowsched::oracle::DEFAULT_CAP;
use flowsched::rational::{int, ExactValue, Rational};
use flowsched::total_flow::ceil_log2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::run::{audit, compare, overload_normalized, solve, Objective, RunError, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellParams {
    pub n: usize,
    pub m: usize,
    pub pmax: Time,
    pub rmax: Time,
    pub density: f64,
    pub seed: u64,
}

impl From<GeneratorParams> for CellParams {
    fn from(p: GeneratorParams) -> Self {
        CellParams {
            n: p.n,
            m: p.m,
            pmax: p.p_max,
            rmax: p.r_max,
            density: p.density,
            seed: p.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TotalRow {
    pub flow: Time,
    pub rounds: usize,
    pub overload_normalized: ExactValue,
    pub oracle: Option<Time>,
    pub ratio: Option<ExactValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxRow {
    pub flow: Time,
    pub rounds: usize,
    pub d_star: Time,
    pub p_max: Time,
    pub assigned_p_max: Time,
    pub oracle: Option<Time>,
    pub gap_in_p_max: Option<ExactValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRow {
    pub params: CellParams,
    pub round_limit: usize,
    pub total: TotalRow,
    pub max: MaxRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSummary {
    pub instances: usize,
    pub compared: usize,
    pub max_rounds_total: usize,
    pub max_rounds_max: usize,
    /// Instances whose round count exceeded `ceil(log2 n) + 1` (either objective).
    pub round_limit_exceeded: usize,
    pub max_overload_normalized: ExactValue,
    pub max_total_ratio: Option<ExactValue>,
    pub max_max_gap_in_p_max: Option<ExactValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    pub schema: String,
    pub version: u32,
    pub grid: String,
    pub summary: BenchSummary,
    pub rows: Vec<BenchRow>,
}

/// Failure of one grid cell, with the instance that caused it.
#[derive(Debug)]
pub struct CellFailure {
    pub params: GeneratorParams,
    pub instance: Instance,
    pub error: RunError,
}

fn run_cell(params: GeneratorParams) -> Result<BenchRow, CellFailure> {
    let inst = generate_random(params);
    let fail = |error| CellFailure {
        params,
        instance: inst.clone(),
        error,
    };
    let total = solve(&inst, Objective::Total, false).map_err(fail)?;
    let report = audit(&total);
    if !report.pass {
        return Err(fail(RunError::Audit(format!("total-flow audit failed: {}", report.to_json()))));
    }
    let max = solve(&inst, Objective::Max, false).map_err(fail)?;
    let report = audit(&max);
    if !report.pass {
        return Err(fail(RunError::Audit(format!("max-flow audit failed: {}", report.to_json()))));
    }
    let cmp = if inst.n() <= DEFAULT_CAP {
        Some(compare(&inst).map_err(fail)?)
    } else {
        None
    };
    Ok(BenchRow {
        params: params.into(),
        round_limit: ceil_log2(inst.n()) + 1,
        total: TotalRow {
            flow: total.metrics.total_flow,
            rounds: total.rounds,
            overload_normalized: ExactValue::from(overload_normalized(&total)),
            oracle: cmp.as_ref().map(|c| c.total.oracle),
            ratio: cmp.as_ref().map(|c| c.total.ratio.clone()),
        },
        max: MaxRow {
            flow: max.metrics.max_flow,
            rounds: max.rounds,
            d_star: max.d_star.expect("max run"),
            p_max: max.p_max.expect("max run"),
            assigned_p_max: max.assigned_p_max.expect("max run"),
            oracle: cmp.as_ref().map(|c| c.max.oracle),
            gap_in_p_max: cmp.as_ref().map(|c| c.max.gap_in_p_max.clone()),
        },
    })
}

fn max_exact<'a>(values: impl Iterator<Item = &'a ExactValue>) -> Option<ExactValue> {
    values
        .filter_map(|v| v.value())
        .max()
        .map(|q: Rational| ExactValue::from(&q))
}

/// Runs every cell in parallel; rows come back in grid order.
pub fn run_grid(spec: &str, grid: &Grid) -> Result<BenchReport, CellFailure> {
    let rows: Vec<BenchRow> = grid
        .cells()
        .into_par_iter()
        .map(run_cell)
        .collect::<Result<_, _>>()?;
    let summary = BenchSummary {
        instances: rows.len(),
        compared: rows.iter().filter(|r| r.total.oracle.is_some()).count(),
        max_rounds_total: rows.iter().map(|r| r.total.rounds).max().unwrap_or(0),
        max_rounds_max: rows.iter().map(|r| r.max.rounds).max().unwrap_or(0),
        round_limit_exceeded: rows
            .iter()
            .filter(|r| r.total.rounds > r.round_limit || r.max.rounds > r.round_limit)
            .count(),
        max_overload_normalized: max_exact(rows.iter().map(|r| &r.total.overload_normalized))
            .unwrap_or_else(|| ExactValue::from(&int(0))),
        max_total_ratio: max_exact(rows.iter().filter_map(|r| r.total.ratio.as_ref())),
        max_max_gap_in_p_max: max_exact(rows.iter().filter_map(|r| r.max.gap_in_p_max.as_ref())),
    };
    Ok(BenchReport {
        schema: "flowsched.bench".into(),
        version: SCHEMA_VERSION,
        grid: spec.to_string(),
        summary,
        rows,
    })
}

/// Where a failing cell's instance is written, next to the report.
pub fn failure_path(out: &Path, params: &GeneratorParams) -> PathBuf {
    let name = format!(
        "failing-n{}-m{}-p{}-r{}-d{}-s{}.json",
        params.n, params.m, params.p_max, params.r_max, params.density, params.seed
    );
    out.parent().map_or_else(|| PathBuf::from(&name), |d| d.join(&name))
}
