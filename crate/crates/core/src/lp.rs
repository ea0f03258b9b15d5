//! Exact rational LP solver returning vertex solutions.
//!
//! Dense two-phase tableau simplex with Bland's smallest-index rule. Every
//! row gets its own slack column, so the equality form always has full row
//! rank and phase 1 can pivot every artificial out of the basis. The
//! nonbasic columns of the final basis give a linearly independent family
//! of tight constraints that pins the returned point.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{to_exact_string, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (v, a)| acc + a * &x[*v])
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }

    pub fn is_tight(&self, x: &[Rational]) -> bool {
        self.lhs(x) == self.rhs
    }
}

/// `min c.x` subject to the listed rows and `x >= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("row {row} references undeclared variable {var}")]
    UndeclaredVariable { row: usize, var: usize },
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: Rational) -> usize {
        self.objective.push(cost);
        self.objective.len() - 1
    }

    /// Adds a row; repeated variables are merged and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) -> usize {
        let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
        for (v, a) in coeffs {
            *merged.entry(v).or_insert_with(Rational::zero) += a;
        }
        let coeffs = merged.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.objective
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.holds(x))
    }

    fn check_well_formed(&self) -> Result<(), LpError> {
        for (row, c) in self.constraints.iter().enumerate() {
            if let Some(&(var, _)) = c.coeffs.iter().find(|(v, _)| *v >= self.num_vars()) {
                return Err(LpError::UndeclaredVariable { row, var });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
}

/// A constraint satisfied with equality: a row, or the bound `x_v >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tight {
    Row(usize),
    Bound(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    pub status: SolveStatus,
    pub values: Vec<Rational>,
    /// Linearly independent tight constraints determining `values`.
    pub tight: Vec<Tight>,
    pub objective: Rational,
}

impl BasicSolution {
    fn infeasible(num_vars: usize) -> Self {
        BasicSolution {
            status: SolveStatus::Infeasible,
            values: vec![Rational::zero(); num_vars],
            tight: Vec::new(),
            objective: Rational::zero(),
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == SolveStatus::Infeasible
    }

    pub fn tight_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.tight.iter().filter_map(|t| match t {
            Tight::Row(r) => Some(*r),
            Tight::Bound(_) => None,
        })
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(i, _)| i)
    }
}

/// One tableau; one solve per object.
pub struct SimplexSolver<'a> {
    lp: &'a LinearProgram,
    /// Original row index for each tableau row.
    row_origin: Vec<usize>,
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    obj: Vec<Rational>,
    n: usize,
    ncols: usize,
    art_start: usize,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<'a> SimplexSolver<'a> {
    pub fn new(lp: &'a LinearProgram) -> Result<Self, LpError> {
        lp.check_well_formed()?;
        Ok(SimplexSolver {
            lp,
            row_origin: Vec::new(),
            rows: Vec::new(),
            basis: Vec::new(),
            obj: Vec::new(),
            n: lp.num_vars(),
            ncols: 0,
            art_start: 0,
            pivots: 0,
        })
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Phase 1. Returns `false` if the LP is infeasible.
    fn phase_one(&mut self) -> bool {
        let lp = self.lp;
        let n = self.n;
        let mut kept = Vec::new();
        for (r, c) in lp.constraints.iter().enumerate() {
            if c.coeffs.is_empty() {
                let ok = match c.sense {
                    Sense::Le => !c.rhs.is_negative(),
                    Sense::Ge => !c.rhs.is_positive(),
                };
                if !ok {
                    return false;
                }
            } else {
                kept.push(r);
            }
        }
        let m = kept.len();
        let slack_start = n;
        self.art_start = n + m;
        let mut needs_art = Vec::with_capacity(m);
        for &r in &kept {
            let c = &lp.constraints[r];
            let slack_sign = match c.sense {
                Sense::Le => 1,
                Sense::Ge => -1,
            };
            let flip = c.rhs.is_negative();
            needs_art.push((slack_sign == 1) == flip);
        }
        let n_art = needs_art.iter().filter(|&&a| a).count();
        self.ncols = n + m + n_art;
        let width = self.ncols + 1;
        let mut art = self.art_start;
        for (t, &r) in kept.iter().enumerate() {
            let c = &lp.constraints[r];
            let mut row = vec![Rational::zero(); width];
            for (v, a) in &c.coeffs {
                row[*v] = a.clone();
            }
            row[slack_start + t] = match c.sense {
                Sense::Le => Rational::one(),
                Sense::Ge => -Rational::one(),
            };
            row[width - 1] = c.rhs.clone();
            if c.rhs.is_negative() {
                for e in row.iter_mut() {
                    *e = -&*e;
                }
            }
            if needs_art[t] {
                row[art] = Rational::one();
                self.basis.push(art);
                art += 1;
            } else {
                self.basis.push(slack_start + t);
            }
            self.rows.push(row);
        }
        self.row_origin = kept;

        // Reduced costs for min sum(artificials).
        self.obj = vec![Rational::zero(); width];
        for j in self.art_start..self.ncols {
            self.obj[j] = Rational::one();
        }
        for (r, &b) in self.basis.iter().enumerate() {
            if b >= self.art_start {
                for (o, e) in self.obj.iter_mut().zip(&self.rows[r]) {
                    if !e.is_zero() {
                        *o -= e;
                    }
                }
            }
        }
        match self.run(self.ncols) {
            Outcome::Optimal => {}
            Outcome::Unbounded => unreachable!("phase 1 objective is bounded below by 0"),
        }
        if !self.obj[width - 1].is_zero() {
            return false;
        }

        // Pivot remaining (zero-valued) artificials out of the basis.
        for r in 0..m {
            if self.basis[r] >= self.art_start {
                let col = (0..self.art_start)
                    .find(|&j| !self.rows[r][j].is_zero())
                    .expect("slack columns give full row rank");
                self.pivot(r, col);
            }
        }
        let rhs = width - 1;
        for row in self.rows.iter_mut() {
            row.swap(self.art_start, rhs);
            row.truncate(self.art_start + 1);
        }
        self.ncols = self.art_start;
        true
    }

    fn phase_two(&mut self) -> Outcome {
        let width = self.ncols + 1;
        self.obj = vec![Rational::zero(); width];
        self.obj[..self.n].clone_from_slice(&self.lp.objective);
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            if b < self.n && !self.lp.objective[b].is_zero() {
                let c = self.lp.objective[b].clone();
                for (o, e) in self.obj.iter_mut().zip(&self.rows[r]) {
                    if !e.is_zero() {
                        *o -= &c * e;
                    }
                }
            }
        }
        self.run(self.ncols)
    }

    /// Bland's rule until no entering column among `0..limit`.
    fn run(&mut self, limit: usize) -> Outcome {
        let rhs = self.ncols;
        loop {
            let Some(enter) = (0..limit).find(|&j| self.obj[j].is_negative()) else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = &row[enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / a;
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                None => return Outcome::Unbounded,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        self.pivots += 1;
        let inv = Rational::one() / &self.rows[r][col];
        let nz: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        for &j in &nz {
            self.rows[r][j] *= &inv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for &j in &nz {
                self.obj[j] -= &f * &prow[j];
            }
        }
        self.rows[r] = prow;
        self.basis[r] = col;
    }

    fn extract(&self, status: SolveStatus) -> BasicSolution {
        let rhs = self.ncols;
        let mut values = vec![Rational::zero(); self.n];
        let mut is_basic = vec![false; self.ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            is_basic[b] = true;
            if b < self.n {
                values[b] = self.rows[r][rhs].clone();
            }
        }
        let mut tight: Vec<Tight> = (0..self.n)
            .filter(|&j| !is_basic[j])
            .map(Tight::Bound)
            .collect();
        tight.extend(
            (0..self.row_origin.len())
                .filter(|&t| !is_basic[self.n + t])
                .map(|t| Tight::Row(self.row_origin[t])),
        );
        tight.sort();
        let objective = self.lp.evaluate(&values);
        BasicSolution {
            status,
            values,
            tight,
            objective,
        }
    }

    pub fn solve_min(&mut self) -> Result<BasicSolution, LpError> {
        if !self.phase_one() {
            return Ok(BasicSolution::infeasible(self.n));
        }
        match self.phase_two() {
            Outcome::Optimal => Ok(self.extract(SolveStatus::Optimal)),
            Outcome::Unbounded => Err(LpError::Unbounded),
        }
    }

    pub fn solve_feasible(&mut self) -> BasicSolution {
        if !self.phase_one() {
            return BasicSolution::infeasible(self.n);
        }
        self.extract(SolveStatus::Feasible)
    }

    /// Text dump of the current tableau.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "basis: {:?}", self.basis);
        for (r, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(to_exact_string).collect();
            let _ = writeln!(out, "r{r:<3} [{}]", cells.join(" "));
        }
        let cells: Vec<String> = self.obj.iter().map(to_exact_string).collect();
        let _ = writeln!(out, "obj  [{}]", cells.join(" "));
        out
    }
}

/// Minimizes `lp`, returning a vertex optimum or an infeasible status.
pub fn solve_min_basic(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    SimplexSolver::new(lp)?.solve_min()
}

/// Finds some vertex of the feasible region; the objective is ignored.
pub fn solve_feasible_basic(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    Ok(SimplexSolver::new(lp)?.solve_feasible())
}

/// Rank over the rationals by Gaussian elimination.
pub fn rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &pivot;
                for j in c..cols {
                    let d = &f * &m[rank][j];
                    m[r][j] -= d;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Exact check that `sol` is a vertex of `lp`.
///
/// Every row and bound must hold exactly, and the tight constraints must
/// have rank equal to the number of variables. If `sol.tight` is non-empty
/// it must itself be such a family.
pub fn verify_basic(lp: &LinearProgram, sol: &BasicSolution) -> bool {
    if sol.status == SolveStatus::Infeasible || !lp.is_feasible_point(&sol.values) {
        return false;
    }
    let x = &sol.values;
    let support: Vec<usize> = sol.support().collect();
    let mut col_of = vec![usize::MAX; lp.num_vars()];
    for (c, &v) in support.iter().enumerate() {
        col_of[v] = c;
    }
    let restricted = |c: &Constraint, cols: &[usize], width: usize| {
        let mut row = vec![Rational::zero(); width];
        for (v, a) in &c.coeffs {
            if cols[*v] != usize::MAX {
                row[cols[*v]] = a.clone();
            }
        }
        row
    };
    let tight_rows: Vec<Vec<Rational>> = lp
        .constraints
        .iter()
        .filter(|c| c.is_tight(x))
        .map(|c| restricted(c, &col_of, support.len()))
        .collect();
    let support_rank = if support.is_empty() { 0 } else { rank(tight_rows) };
    if support_rank != support.len() {
        return false;
    }

    if sol.tight.is_empty() {
        return true;
    }
    if sol.tight.len() != lp.num_vars() {
        return false;
    }
    let mut bounded = vec![false; lp.num_vars()];
    let mut rows = Vec::new();
    for t in &sol.tight {
        match *t {
            Tight::Bound(v) => {
                if v >= lp.num_vars() || !x[v].is_zero() || bounded[v] {
                    return false;
                }
                bounded[v] = true;
            }
            Tight::Row(r) => {
                if r >= lp.num_constraints() || !lp.constraints[r].is_tight(x) {
                    return false;
                }
                rows.push(r);
            }
        }
    }
    let mut free_col = vec![usize::MAX; lp.num_vars()];
    let mut width = 0;
    for v in 0..lp.num_vars() {
        if !bounded[v] {
            free_col[v] = width;
            width += 1;
        }
    }
    if rows.is_empty() {
        return width == 0;
    }
    let family: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&r| restricted(&lp.constraints[r], &free_col, width))
        .collect();
    rank(family) == width
}
