//! Dense two-phase tableau simplex returning an optimal basic feasible
//! solution together with a dual bound.
//!
//! Models are maximization problems over variables with a finite lower bound
//! and an optional upper bound. Internally every variable is shifted to a
//! zero lower bound, upper bounds become extra rows, and each row is
//! normalized to a non-negative right-hand side before slack, surplus and
//! artificial columns are appended.

use serde::Serialize;

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;
const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program `max c.x` subject to sparse rows and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with objective coefficient `obj` and bounds
    /// `[lower, upper]` (`upper` may be infinite) and returns its index.
    pub fn add_var(&mut self, obj: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn count_rows(&self, relation: Relation) -> usize {
        self.rows.iter().filter(|r| r.relation == relation).count()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let gap = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !self.objective[j].is_finite() {
                return Err(Error::LpModel(format!("objective coefficient of x{j} is not finite")));
            }
            if !lo.is_finite() {
                return Err(Error::LpModel(format!("x{j} needs a finite lower bound")));
            }
            if hi.is_nan() || hi < lo {
                return Err(Error::LpModel(format!("x{j} has empty bounds [{lo}, {hi}]")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::LpModel(format!("row {r} has a non-finite right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::LpModel(format!(
                        "row {r} references x{j} but the model has {n} variables"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::LpModel(format!("row {r} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Column of the internal standard form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Column {
    /// Model variable.
    Structural(usize),
    /// Slack or surplus of a model row.
    RowSlack(usize),
    /// Slack of a variable's upper bound.
    BoundSlack(usize),
    Artificial(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; meaningful only when optimal.
    pub value: f64,
    /// Variable assignment; empty unless optimal.
    pub x: Vec<f64>,
    /// Basic columns of the final tableau, one per non-redundant row.
    pub basis: Vec<Column>,
    /// Dual multipliers of the model rows (zero for rows found redundant).
    pub row_duals: Vec<f64>,
    /// `b.y` for the recovered dual solution, when that solution is dual
    /// feasible; an upper bound on every feasible objective value.
    pub dual_bound: Option<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            value: f64::NAN,
            x: Vec::new(),
            basis: Vec::new(),
            row_duals: Vec::new(),
            dual_bound: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct StandardForm {
    /// Row-major `m x cols` constraint matrix.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    columns: Vec<Column>,
    /// For each internal row: model row index (or `None` for a bound row) and
    /// the sign applied while normalizing the right-hand side.
    origin: Vec<(Option<usize>, f64)>,
    initial_basis: Vec<usize>,
    shift: f64,
}

fn standard_form(model: &LpModel) -> StandardForm {
    let n = model.num_vars();

    struct Pending {
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
        origin: Option<usize>,
        bound_of: Option<usize>,
    }

    let mut pending = Vec::new();
    for (r, row) in model.rows.iter().enumerate() {
        let shifted: f64 = row.coeffs.iter().map(|&(j, a)| a * model.lower[j]).sum();
        pending.push(Pending {
            coeffs: row.coeffs.clone(),
            relation: row.relation,
            rhs: row.rhs - shifted,
            origin: Some(r),
            bound_of: None,
        });
    }
    for j in 0..n {
        if model.upper[j].is_finite() {
            pending.push(Pending {
                coeffs: vec![(j, 1.0)],
                relation: Relation::Le,
                rhs: model.upper[j] - model.lower[j],
                origin: None,
                bound_of: Some(j),
            });
        }
    }

    let m = pending.len();
    let mut signs = vec![1.0; m];
    for (r, p) in pending.iter_mut().enumerate() {
        if p.rhs < 0.0 {
            signs[r] = -1.0;
            p.rhs = -p.rhs;
            for c in &mut p.coeffs {
                c.1 = -c.1;
            }
            p.relation = match p.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let mut columns: Vec<Column> = (0..n).map(Column::Structural).collect();
    let mut slack_col = vec![None; m];
    for (r, p) in pending.iter().enumerate() {
        if p.relation != Relation::Eq {
            slack_col[r] = Some(columns.len());
            columns.push(match p.bound_of {
                Some(j) => Column::BoundSlack(j),
                None => Column::RowSlack(p.origin.expect("model row")),
            });
        }
    }
    let mut art_col = vec![None; m];
    for (r, p) in pending.iter().enumerate() {
        if p.relation != Relation::Le {
            art_col[r] = Some(columns.len());
            columns.push(Column::Artificial(r));
        }
    }

    let cols = columns.len();
    let mut a = vec![vec![0.0; cols]; m];
    let mut initial_basis = vec![0; m];
    for (r, p) in pending.iter().enumerate() {
        for &(j, v) in &p.coeffs {
            a[r][j] += v;
        }
        if let Some(s) = slack_col[r] {
            a[r][s] = if p.relation == Relation::Le { 1.0 } else { -1.0 };
        }
        if let Some(c) = art_col[r] {
            a[r][c] = 1.0;
            initial_basis[r] = c;
        } else {
            initial_basis[r] = slack_col[r].expect("Le rows carry a slack");
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&model.objective);
    let shift = model.objective.iter().zip(&model.lower).map(|(c, l)| c * l).sum();

    StandardForm {
        a,
        b: pending.iter().map(|p| p.rhs).collect(),
        cost,
        columns,
        origin: pending.iter().zip(&signs).map(|(p, &s)| (p.origin, s)).collect(),
        initial_basis,
        shift,
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Surviving internal row indices (redundant rows are dropped).
    row_ids: Vec<usize>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize, reduced: &mut [f64], value: &mut f64) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][e];
            if f == 0.0 {
                continue;
            }
            for (v, &pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.rows[i][e] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
            if self.rhs[i] < 0.0 && self.rhs[i] > -1e-12 {
                self.rhs[i] = 0.0;
            }
        }
        let f = reduced[e];
        if f != 0.0 {
            for (v, &pv) in reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            reduced[e] = 0.0;
            *value += f * pivot_rhs;
        }
        self.basis[r] = e;
    }

    /// Maximizes `cost` over columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<(Phase, f64)> {
        let cols = cost.len();
        let mut reduced = cost.to_vec();
        let mut value = 0.0;
        for (i, &bcol) in self.basis.iter().enumerate() {
            let cb = cost[bcol];
            if cb != 0.0 {
                for (d, &a) in reduced.iter_mut().zip(&self.rows[i]) {
                    *d -= cb * a;
                }
                value += cb * self.rhs[i];
            }
        }

        let mut bland = false;
        let mut degenerate_run = 0;
        for _ in 0..MAX_PIVOTS {
            let entering = if bland {
                (0..cols).find(|&j| allowed[j] && reduced[j] > OPTIMALITY_TOL)
            } else {
                (0..cols)
                    .filter(|&j| allowed[j] && reduced[j] > OPTIMALITY_TOL)
                    .max_by(|&a, &b| reduced[a].total_cmp(&reduced[b]).then(b.cmp(&a)))
            };
            let Some(e) = entering else {
                return Ok((Phase::Optimal, value));
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((l, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                        if ratio < best && !tie
                            || tie && self.basis[i] < self.basis[l]
                        {
                            Some((i, ratio))
                        } else {
                            Some((l, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok((Phase::Unbounded, value));
            };

            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e, &mut reduced, &mut value);
        }
        Err(Error::LpModel(format!("simplex did not terminate within {MAX_PIVOTS} pivots")))
    }
}

/// Solves `B^T w = c_B` by Gaussian elimination with partial pivoting.
fn solve_transposed(basis_cols: &[Vec<f64>], c_b: &[f64]) -> Option<Vec<f64>> {
    let m = c_b.len();
    // row k of B^T is basic column k
    let mut mat: Vec<Vec<f64>> = basis_cols.to_vec();
    let mut rhs = c_b.to_vec();
    for col in 0..m {
        let piv = (col..m).max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))?;
        if mat[piv][col].abs() < 1e-12 {
            return None;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for i in col + 1..m {
            let f = mat[i][col] / mat[col][col];
            if f != 0.0 {
                for k in col..m {
                    mat[i][k] -= f * mat[col][k];
                }
                rhs[i] -= f * rhs[col];
            }
        }
    }
    let mut w = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| mat[i][k] * w[k]).sum();
        w[i] = (rhs[i] - s) / mat[i][i];
    }
    Some(w)
}

pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    model.validate()?;
    let n = model.num_vars();
    let sf = standard_form(model);
    let cols = sf.columns.len();
    let is_art: Vec<bool> = sf.columns.iter().map(|c| matches!(c, Column::Artificial(_))).collect();

    let mut tab = Tableau {
        rows: sf.a.clone(),
        rhs: sf.b.clone(),
        basis: sf.initial_basis.clone(),
        row_ids: (0..sf.b.len()).collect(),
    };

    // Phase 1: drive the artificial columns to zero.
    if is_art.iter().any(|&a| a) {
        let phase1_cost: Vec<f64> = is_art.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        let all = vec![true; cols];
        let (_, value) = tab.optimize(&phase1_cost, &all)?;
        if -value > FEASIBILITY_TOL {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        let mut r = 0;
        while r < tab.rows.len() {
            if !is_art[tab.basis[r]] {
                r += 1;
                continue;
            }
            let replacement = (0..cols)
                .filter(|&j| !is_art[j])
                .max_by(|&a, &b| tab.rows[r][a].abs().total_cmp(&tab.rows[r][b].abs()))
                .filter(|&j| tab.rows[r][j].abs() > PIVOT_TOL);
            match replacement {
                Some(e) => {
                    let mut scratch = vec![0.0; cols];
                    let mut v = 0.0;
                    tab.pivot(r, e, &mut scratch, &mut v);
                    r += 1;
                }
                None => {
                    // redundant row
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    tab.row_ids.remove(r);
                }
            }
        }
    }

    // Phase 2.
    let allowed: Vec<bool> = is_art.iter().map(|&a| !a).collect();
    let (phase, _) = tab.optimize(&sf.cost, &allowed)?;
    if let Phase::Unbounded = phase {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut shifted = vec![0.0; cols];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        shifted[bcol] = tab.rhs[i].max(0.0);
    }
    let x: Vec<f64> = (0..n).map(|j| shifted[j] + model.lower[j]).collect();
    let value = model.evaluate(&x);

    // Dual multipliers from the original basis columns.
    let basis_cols: Vec<Vec<f64>> = tab
        .basis
        .iter()
        .map(|&bcol| tab.row_ids.iter().map(|&rid| sf.a[rid][bcol]).collect())
        .collect();
    let c_b: Vec<f64> = tab.basis.iter().map(|&bcol| sf.cost[bcol]).collect();
    let mut row_duals = vec![0.0; model.num_rows()];
    let mut dual_bound = None;
    if let Some(w) = solve_transposed(&basis_cols, &c_b) {
        let max_reduced = (0..cols)
            .filter(|&j| !is_art[j])
            .map(|j| {
                let aw: f64 = tab.row_ids.iter().zip(&w).map(|(&rid, wi)| sf.a[rid][j] * wi).sum();
                sf.cost[j] - aw
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if max_reduced <= 1e-7 {
            let bound: f64 = tab.row_ids.iter().zip(&w).map(|(&rid, wi)| sf.b[rid] * wi).sum();
            dual_bound = Some(bound + sf.shift);
        }
        for (&rid, wi) in tab.row_ids.iter().zip(&w) {
            if let (Some(r), sign) = sf.origin[rid] {
                row_duals[r] = sign * wi;
            }
        }
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        x,
        basis: tab.basis.iter().map(|&bcol| sf.columns[bcol]).collect(),
        row_duals,
        dual_bound,
    })
}
