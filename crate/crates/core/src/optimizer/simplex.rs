//! Dense two-phase tableau simplex.
//!
//! General bounds and row senses are reduced to `min cᵀx, Ax = b, x ≥ 0`.
//! Pricing is Dantzig's rule, switching to Bland's rule while degenerate
//! pivots pile up so the method cannot cycle. The final basis is refactored
//! with an LU decomposition to clean up the primal values and recover duals.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::OptimizerError;

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const MAX_REFACTOR: usize = 3;
const RAY_TOL: f64 = 1e-6;
const PHASE1_TOL: f64 = 1e-6;
const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// `min cᵀx` subject to linear rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible { phase1_objective: f64 },
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row of the original program.
    pub duals: Vec<f64>,
    /// Dual objective including bound rows; equals `objective` at optimality.
    pub dual_objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram {
            names: Vec::new(),
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        cost: f64,
        lower: f64,
        upper: f64,
    ) -> usize {
        self.names.push(name.into());
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }

    pub fn num_variables(&self) -> usize {
        self.names.len()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let r = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(r);
        }
        worst
    }

    /// CPLEX-LP text form of the program.
    pub fn to_lp_text(&self) -> String {
        let mut s = String::from("\\ minimal grasp force\nMinimize\n obj:");
        let mut any = false;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(
                    s,
                    " {} {:e} {}",
                    if c < 0.0 { '-' } else { '+' },
                    c.abs(),
                    self.names[j]
                );
                any = true;
            }
        }
        if !any {
            s.push_str(" 0");
        }
        s.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(s, " {}:", row.name);
            for &(j, a) in &row.coeffs {
                let _ = write!(
                    s,
                    " {} {:e} {}",
                    if a < 0.0 { '-' } else { '+' },
                    a.abs(),
                    self.names[j]
                );
            }
            let op = match row.sense {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
            };
            let _ = writeln!(s, " {op} {:e}", row.rhs);
        }
        s.push_str("Bounds\n");
        for (j, name) in self.names.iter().enumerate() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (false, false) => {
                    let _ = writeln!(s, " {name} free");
                }
                (true, false) => {
                    let _ = writeln!(s, " {name} >= {lo:e}");
                }
                (false, true) => {
                    let _ = writeln!(s, " -inf <= {name} <= {hi:e}");
                }
                (true, true) => {
                    let _ = writeln!(s, " {lo:e} <= {name} <= {hi:e}");
                }
            }
        }
        s.push_str("End\n");
        s
    }

    pub fn solve(&self) -> Result<LpOutcome, OptimizerError> {
        StandardForm::build(self).solve(self)
    }
}

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new()
    }
}

/// Column image of an original variable: `x = offset + Σ sign·x_col`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct StandardForm {
    vars: Vec<VarMap>,
    /// Dense rows over structural + slack columns.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    c_offset: f64,
    /// Sign applied to each row (−1 when negated to make b ≥ 0).
    row_sign: Vec<f64>,
    /// Row of the original program, or None for bound rows.
    origin: Vec<Option<usize>>,
    /// Slack column usable as an initial basic variable.
    initial_basic: Vec<Option<usize>>,
    n_cols: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut vars = Vec::with_capacity(lp.num_variables());
        let mut n_cols = 0;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..lp.num_variables() {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            let map = if lo.is_finite() {
                if hi.is_finite() {
                    bound_rows.push((n_cols, hi - lo));
                }
                n_cols += 1;
                VarMap {
                    offset: lo,
                    cols: vec![(n_cols - 1, 1.0)],
                }
            } else if hi.is_finite() {
                n_cols += 1;
                VarMap {
                    offset: hi,
                    cols: vec![(n_cols - 1, -1.0)],
                }
            } else {
                n_cols += 2;
                VarMap {
                    offset: 0.0,
                    cols: vec![(n_cols - 2, 1.0), (n_cols - 1, -1.0)],
                }
            };
            vars.push(map);
        }
        let structural = n_cols;
        let mut c = vec![0.0; structural];
        let mut c_offset = 0.0;
        for (j, map) in vars.iter().enumerate() {
            c_offset += lp.objective[j] * map.offset;
            for &(col, s) in &map.cols {
                c[col] += lp.objective[j] * s;
            }
        }

        let mut rows: Vec<(Vec<f64>, RowSense, f64, Option<usize>)> = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let mut dense = vec![0.0; structural];
            let mut rhs = row.rhs;
            for &(j, a) in &row.coeffs {
                rhs -= a * vars[j].offset;
                for &(col, s) in &vars[j].cols {
                    dense[col] += a * s;
                }
            }
            rows.push((dense, row.sense, rhs, Some(i)));
        }
        for &(col, width) in &bound_rows {
            let mut dense = vec![0.0; structural];
            dense[col] = 1.0;
            rows.push((dense, RowSense::Le, width, None));
        }

        let slack_count = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
        let n_cols = structural + slack_count;
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut row_sign = Vec::with_capacity(rows.len());
        let mut origin = Vec::with_capacity(rows.len());
        let mut initial_basic = Vec::with_capacity(rows.len());
        let mut next_slack = structural;
        for (mut dense, sense, rhs, org) in rows {
            dense.resize(n_cols, 0.0);
            let slack = match sense {
                RowSense::Le => Some((next_slack, 1.0)),
                RowSense::Ge => Some((next_slack, -1.0)),
                RowSense::Eq => None,
            };
            if let Some((col, v)) = slack {
                dense[col] = v;
                next_slack += 1;
            }
            let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
            if sign < 0.0 {
                dense.iter_mut().for_each(|v| *v = -*v);
            }
            initial_basic.push(
                slack
                    .filter(|&(col, _)| dense[col] > 0.0)
                    .map(|(col, _)| col),
            );
            a.push(dense);
            b.push(rhs * sign);
            row_sign.push(sign);
            origin.push(org);
        }
        c.resize(n_cols, 0.0);
        StandardForm {
            vars,
            a,
            b,
            c,
            c_offset,
            row_sign,
            origin,
            initial_basic,
            n_cols,
        }
    }

    fn solve(&self, lp: &LinearProgram) -> Result<LpOutcome, OptimizerError> {
        let m = self.a.len();
        let n = self.n_cols;
        let artificial_count = self.initial_basic.iter().filter(|b| b.is_none()).count();
        let total = n + artificial_count;
        let width = total + 1;
        let mut t = Tableau {
            data: vec![0.0; m * width],
            width,
            rows: m,
            basis: vec![0; m],
            active: vec![true; m],
        };
        let mut next_art = n;
        for i in 0..m {
            t.data[i * width..i * width + n].copy_from_slice(&self.a[i]);
            t.data[i * width + total] = self.b[i];
            t.basis[i] = match self.initial_basic[i] {
                Some(col) => col,
                None => {
                    t.data[i * width + next_art] = 1.0;
                    next_art += 1;
                    next_art - 1
                }
            };
        }

        let original = t.data.clone();
        let mut pivots = 0;
        if artificial_count > 0 {
            let mut cost = vec![0.0; total];
            cost[n..].iter_mut().for_each(|v| *v = 1.0);
            let mut obj = t.reduced_costs(&cost);
            t.run(&mut obj, total, &mut pivots)?;
            let phase1 = -obj[total];
            let scale = 1.0 + self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if phase1 > PHASE1_TOL * scale {
                return Ok(LpOutcome::Infeasible {
                    phase1_objective: phase1,
                });
            }
            // drive remaining zero-level artificials out of the basis
            for i in 0..m {
                if t.basis[i] >= n {
                    let row = &t.data[i * width..i * width + n];
                    let best = (0..n)
                        .filter(|&j| row[j].abs() > PIVOT_TOL)
                        .max_by(|&x, &y| row[x].abs().total_cmp(&row[y].abs()));
                    match best {
                        Some(j) => t.pivot(i, j, &mut obj),
                        None => t.active[i] = false,
                    }
                }
            }
        }

        let mut cost = self.c.clone();
        cost.resize(total, 0.0);
        let mut obj = t.reduced_costs(&cost);
        let mut refactored = 0;
        loop {
            match t.run(&mut obj, n, &mut pivots) {
                // a ray may be an artifact of accumulated round-off
                Err(OptimizerError::Unbounded) if refactored < MAX_REFACTOR => {
                    t.refactor(&original)?;
                    obj = t.reduced_costs(&cost);
                    refactored += 1;
                }
                Err(OptimizerError::Unbounded) => return Ok(LpOutcome::Unbounded),
                other => break other?,
            }
        }

        let live: Vec<usize> = (0..m).filter(|&i| t.active[i]).collect();
        let mut xs = vec![0.0; n];
        for &i in &live {
            xs[t.basis[i]] = t.data[i * width + total];
        }
        // refactor the optimal basis for clean primal values and duals
        let k = live.len();
        let bmat = DMatrix::from_fn(k, k, |r, q| self.a[live[r]][t.basis[live[q]]]);
        let lu = bmat.clone().lu();
        let mut duals_std = vec![0.0; m];
        if let Some(xb) = lu.solve(&DVector::from_iterator(k, live.iter().map(|&i| self.b[i]))) {
            for (q, &i) in live.iter().enumerate() {
                xs[t.basis[i]] = xb[q].max(0.0);
            }
        }
        let cb = DVector::from_iterator(k, live.iter().map(|&i| self.c[t.basis[i]]));
        let y = bmat.transpose().lu().solve(&cb);
        let mut dual_objective = self.c_offset;
        if let Some(y) = &y {
            for (r, &i) in live.iter().enumerate() {
                duals_std[i] = y[r];
                dual_objective += y[r] * self.b[i];
            }
        }

        let x: Vec<f64> = self
            .vars
            .iter()
            .map(|map| map.offset + map.cols.iter().map(|&(col, s)| s * xs[col]).sum::<f64>())
            .collect();
        let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        let mut duals = vec![0.0; lp.rows.len()];
        for i in 0..m {
            if let Some(r) = self.origin[i] {
                duals[r] = duals_std[i] * self.row_sign[i];
            }
        }
        let scale = 1.0 + self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let violation = lp.max_violation(&x);
        if !violation.is_finite() || violation > 1e-6 * scale {
            return Err(OptimizerError::SolverFailure(format!(
                "solution violates constraints by {violation:e}"
            )));
        }
        Ok(LpOutcome::Optimal(LpSolution {
            x,
            objective,
            duals,
            dual_objective,
            pivots,
        }))
    }
}

struct Tableau {
    data: Vec<f64>,
    width: usize,
    rows: usize,
    basis: Vec<usize>,
    active: Vec<bool>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj = vec![0.0; self.width];
        obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 && self.active[i] {
                let row = &self.data[i * self.width..(i + 1) * self.width];
                obj.iter_mut().zip(row).for_each(|(o, r)| *o -= cb * r);
            }
        }
        obj
    }

    /// Recomputes the active rows as `B⁻¹ [A | b]` from the initial tableau.
    fn refactor(&mut self, original: &[f64]) -> Result<(), OptimizerError> {
        let w = self.width;
        let live: Vec<usize> = (0..self.rows).filter(|&i| self.active[i]).collect();
        let k = live.len();
        let b = DMatrix::from_fn(k, k, |r, q| original[live[r] * w + self.basis[live[q]]]);
        let rest = DMatrix::from_fn(k, w, |r, c| original[live[r] * w + c]);
        let fresh = b.lu().solve(&rest).ok_or_else(|| {
            OptimizerError::SolverFailure("singular basis on refactorization".into())
        })?;
        for (r, &i) in live.iter().enumerate() {
            for c in 0..w {
                self.data[i * w + c] = fresh[(r, c)];
            }
            let col = self.basis[i];
            self.data[i * w + col] = 1.0;
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, col: usize, obj: &mut [f64]) {
        let w = self.width;
        let p = self.data[r * w + col];
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w]
            .iter()
            .map(|v| v / p)
            .collect();
        self.data[r * w..(r + 1) * w].copy_from_slice(&pivot_row);
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + col];
            if f != 0.0 {
                let row = &mut self.data[i * w..(i + 1) * w];
                row.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, pv)| *v -= f * pv);
                row[col] = 0.0;
            }
        }
        let f = obj[col];
        if f != 0.0 {
            obj.iter_mut()
                .zip(&pivot_row)
                .for_each(|(v, pv)| *v -= f * pv);
            obj[col] = 0.0;
        }
        self.basis[r] = col;
    }

    /// Pivots until no column below `allowed` has a negative reduced cost.
    fn run(
        &mut self,
        obj: &mut [f64],
        allowed: usize,
        pivots: &mut usize,
    ) -> Result<(), OptimizerError> {
        let mut degenerate = 0;
        let cost_scale = obj[..allowed].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut skipped = vec![false; allowed];
        loop {
            let bland = degenerate >= DEGENERATE_STREAK;
            let candidates = (0..allowed).filter(|&j| obj[j] < -OPT_TOL && !skipped[j]);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&a, &b| obj[a].total_cmp(&obj[b]))
            };
            let Some(col) = entering else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                if !self.active[i] {
                    continue;
                }
                let a = self.data[i * self.width + col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let better = if ratio < best - 1e-12 {
                                true
                            } else if ratio <= best + 1e-12 {
                                if bland {
                                    self.basis[i] < self.basis[k]
                                } else {
                                    a > self.data[k * self.width + col]
                                }
                            } else {
                                false
                            };
                            if better {
                                Some((i, ratio.min(best)))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                // a marginal reduced cost on a ray is round-off on an ill-conditioned basis
                if obj[col] > -RAY_TOL * cost_scale {
                    skipped[col] = true;
                    continue;
                }
                return Err(OptimizerError::Unbounded);
            };
            skipped.iter_mut().for_each(|s| *s = false);
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, col, obj);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(OptimizerError::SolverFailure(format!(
                    "no convergence after {MAX_PIVOTS} pivots"
                )));
            }
            if !obj.iter().all(|v| v.is_finite()) {
                return Err(OptimizerError::SolverFailure(
                    "non-finite reduced costs".into(),
                ));
            }
        }
    }
}
