//! Dense two-phase primal simplex with bounded variables.
//!
//! Every LP in the crate goes through [`LinearProgram::solve`]: support
//! functions, Chebyshev centers, intersection tests, tube synthesis,
//! invariance certificates and the barycentric weights used by the runtime.
//! Problems are small (a few thousand rows at most), so a dense tableau with
//! sparse row updates is enough.
//!
//! Pricing uses the largest reduced cost. After a run of degenerate pivots
//! the solver switches to Bland's smallest-index rule until the objective
//! moves again, which rules out cycling.

use thiserror::Error;

/// Feasibility tolerance for classification and for the post-solve residual
/// check.
pub const LP_TOL: f64 = 1e-8;

/// Pivots smaller than this are refused with [`LpError::DegeneratePivot`].
pub const PIVOT_TOL: f64 = 1e-12;

/// Column entries below this magnitude are ignored by the ratio test.
const ENTRY_TOL: f64 = 1e-9;

/// Reduced costs below this magnitude are treated as zero.
const COST_TOL: f64 = 1e-10;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row {row} has {got} coefficients, expected {expected}")]
    Dimension { row: usize, got: usize, expected: usize },
    #[error("non-finite coefficient in the problem data")]
    NonFinite,
    #[error("degenerate pivot {pivot:e} in row {row}")]
    DegeneratePivot { row: usize, pivot: f64 },
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("solution violates constraints by {violation:e}")]
    NumericalBreakdown { violation: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize c·y` subject to linear rows and per-variable bounds.
///
/// Variables default to `[0, +inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    nvars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
    start_upper: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `status == Optimal`.
    pub point: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_point(status: LpStatus) -> Self {
        let objective = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        LpSolution { status, point: Vec::new(), objective }
    }
}

impl LinearProgram {
    pub fn new(nvars: usize) -> Self {
        LinearProgram {
            nvars,
            objective: vec![0.0; nvars],
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); nvars],
            start_upper: vec![false; nvars],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_objective(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.nvars, "objective length");
        self.objective = c;
    }

    pub fn set_objective_coeff(&mut self, var: usize, value: f64) {
        self.objective[var] = value;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    /// Hint: start the simplex with `var` at its upper bound. Does not
    /// change the problem, only where the search begins.
    pub fn prefer_upper(&mut self, var: usize) {
        self.start_upper[var] = true;
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = (f64::NEG_INFINITY, f64::INFINITY);
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.add_constraint(coeffs, Relation::Le, rhs);
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) {
        let neg = coeffs.into_iter().map(|a| -a).collect();
        self.add_constraint(neg, Relation::Le, -rhs);
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.add_constraint(coeffs, Relation::Eq, rhs);
    }

    /// Sparse convenience: `Σ coeff·y[idx] (rel) rhs`.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut row = vec![0.0; self.nvars];
        for &(i, a) in terms {
            row[i] += a;
        }
        self.add_constraint(row, relation, rhs);
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        solve(self)
    }

    /// Largest violation of any row or bound at `point`.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(point).map(|(a, y)| a * y).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&(lo, hi), &y) in self.bounds.iter().zip(point) {
            worst = worst.max(lo - y).max(y - hi);
        }
        worst
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite);
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.nvars {
                return Err(LpError::Dimension { row, got: c.coeffs.len(), expected: self.nvars });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::NonFinite);
            }
        }
        if self.bounds.iter().any(|&(lo, hi)| lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY) {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }
}

/// Phase-1 only: some point satisfying `constraints` and `bounds`, or `None`
/// when the system is infeasible.
pub fn feasible_point(nvars: usize, constraints: &[Constraint], bounds: &[(f64, f64)]) -> Result<Option<Vec<f64>>, LpError> {
    let mut lp = LinearProgram::new(nvars);
    lp.constraints = constraints.to_vec();
    lp.bounds = bounds.to_vec();
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.point),
        LpStatus::Infeasible => None,
        // zero objective cannot be unbounded
        LpStatus::Unbounded => unreachable!("zero objective reported unbounded"),
    })
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = lo + y`
    Shift { lo: f64, col: usize },
    /// `x = hi - y`
    Flip { hi: f64, col: usize },
    /// `x = y⁺ - y⁻`
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NonbasicAt {
    Lower,
    Upper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols` matrix `B⁻¹A`.
    a: Vec<f64>,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    /// Reduced costs of the active objective.
    d: Vec<f64>,
    upper: Vec<f64>,
    kind: Vec<ColKind>,
    basis: Vec<usize>,
    /// `Some(row)` for basic columns.
    basic_row: Vec<Option<usize>>,
    at: Vec<NonbasicAt>,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    #[inline]
    fn entry(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    fn nonbasic_value(&self, c: usize) -> f64 {
        match self.at[c] {
            NonbasicAt::Lower => 0.0,
            NonbasicAt::Upper => self.upper[c],
        }
    }

    fn column_value(&self, c: usize) -> f64 {
        match self.basic_row[c] {
            Some(r) => self.beta[r],
            None => self.nonbasic_value(c),
        }
    }

    /// Rebuilds reduced costs for objective `cost` (maximize) under the
    /// current basis.
    fn price(&mut self, cost: &[f64]) {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.cols..(r + 1) * self.cols];
                for (dj, &arj) in d.iter_mut().zip(row) {
                    *dj -= cb * arj;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.d = d;
    }

    fn eligible(&self, c: usize) -> Option<f64> {
        if self.basic_row[c].is_some() || self.kind[c] == ColKind::Artificial && self.upper[c] == 0.0 {
            return None;
        }
        let dj = self.d[c];
        match self.at[c] {
            NonbasicAt::Lower if dj > COST_TOL => Some(1.0),
            NonbasicAt::Upper if dj < -COST_TOL => Some(-1.0),
            _ => None,
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for c in 0..self.cols {
            if let Some(dir) = self.eligible(c) {
                if bland {
                    return Some((c, dir));
                }
                let score = self.d[c].abs();
                if score > best_score {
                    best_score = score;
                    best = Some((c, dir));
                }
            }
        }
        best
    }

    /// One simplex iteration. Returns whether the step was degenerate through
    /// `degenerate`.
    fn iterate(&mut self, bland: bool, degenerate: &mut bool) -> Result<Step, LpError> {
        let Some((e, dir)) = self.choose_entering(bland) else {
            return Ok(Step::Optimal);
        };
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(LpError::IterationLimit(self.max_iterations));
        }

        // Ratio test. `None` leaving row means the entering column flips bound.
        let mut t_max = self.upper[e];
        let mut leave: Option<(usize, NonbasicAt)> = None;
        let mut leave_alpha = 0.0f64;
        for r in 0..self.rows {
            let alpha = dir * self.entry(r, e);
            let (t, to) = if alpha > ENTRY_TOL {
                ((self.beta[r] / alpha).max(0.0), NonbasicAt::Lower)
            } else if alpha < -ENTRY_TOL && self.upper[self.basis[r]].is_finite() {
                (((self.upper[self.basis[r]] - self.beta[r]) / -alpha).max(0.0), NonbasicAt::Upper)
            } else {
                continue;
            };
            let better = if t < t_max - 1e-12 {
                true
            } else if t <= t_max + 1e-12 {
                match leave {
                    None => false,
                    Some((lr, _)) => {
                        if bland {
                            self.basis[r] < self.basis[lr]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    }
                }
            } else {
                false
            };
            if better {
                t_max = t.min(t_max);
                leave = Some((r, to));
                leave_alpha = alpha.abs();
            }
        }

        if t_max.is_infinite() {
            return Ok(Step::Unbounded);
        }
        *degenerate = t_max <= 1e-12;

        // Move basic values along the edge.
        for r in 0..self.rows {
            let alpha = self.entry(r, e);
            if alpha != 0.0 {
                self.beta[r] -= dir * alpha * t_max;
            }
        }
        let entering_value = self.nonbasic_value(e) + dir * t_max;

        match leave {
            None => {
                self.at[e] = match self.at[e] {
                    NonbasicAt::Lower => NonbasicAt::Upper,
                    NonbasicAt::Upper => NonbasicAt::Lower,
                };
            }
            Some((r, to)) => {
                let pivot = self.entry(r, e);
                if pivot.abs() < PIVOT_TOL {
                    return Err(LpError::DegeneratePivot { row: r, pivot });
                }
                let old = self.basis[r];
                self.pivot(r, e);
                self.basic_row[old] = None;
                self.at[old] = to;
                self.beta[r] = entering_value;
            }
        }
        Ok(Step::Moved)
    }

    /// Gauss-Jordan pivot on `(r, e)`, updating the matrix and reduced costs.
    fn pivot(&mut self, r: usize, e: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + e];
        let inv = 1.0 / p;
        let mut nz = Vec::new();
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    nz.push(j);
                }
            }
            row[e] = 1.0;
        }
        let pivot_row: Vec<(usize, f64)> = nz.iter().map(|&j| (j, self.a[r * cols + j])).collect();
        // Dense pivot rows are applied as a contiguous slice update, which
        // vectorizes; sparse ones through the index list.
        let dense = nz.len() * 4 > cols;
        let (lo, hi) = (nz.first().copied().unwrap_or(0), nz.last().map_or(0, |j| j + 1));
        let pivot_copy: Vec<f64> = if dense { self.a[r * cols + lo..r * cols + hi].to_vec() } else { Vec::new() };
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + e];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            if dense {
                for (x, &v) in row[lo..hi].iter_mut().zip(&pivot_copy) {
                    *x -= f * v;
                }
            } else {
                for &(j, v) in &pivot_row {
                    row[j] -= f * v;
                }
            }
            row[e] = 0.0;
        }
        let f = self.d[e];
        if f != 0.0 {
            for &(j, v) in &pivot_row {
                self.d[j] -= f * v;
            }
            self.d[e] = 0.0;
        }
        self.basis[r] = e;
        self.basic_row[e] = Some(r);
    }

    fn run(&mut self) -> Result<Step, LpError> {
        let mut degenerate_run = 0;
        loop {
            let bland = degenerate_run >= DEGENERATE_RUN;
            let mut degenerate = false;
            match self.iterate(bland, &mut degenerate)? {
                Step::Moved => {
                    if degenerate {
                        degenerate_run += 1;
                    } else {
                        degenerate_run = 0;
                    }
                }
                other => return Ok(other),
            }
        }
    }
}

/// Solves `lp` with the two-phase bounded simplex method.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;

    // Variable substitution onto nonnegative columns.
    let mut maps = Vec::with_capacity(lp.nvars);
    let mut upper = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo > hi {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        let m = if lo.is_finite() {
            upper.push(hi - lo);
            VarMap::Shift { lo, col: upper.len() - 1 }
        } else if hi.is_finite() {
            upper.push(f64::INFINITY);
            VarMap::Flip { hi, col: upper.len() - 1 }
        } else {
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
            VarMap::Split { pos: upper.len() - 2, neg: upper.len() - 1 }
        };
        maps.push(m);
    }
    let n_struct = upper.len();

    // Rows in column space, scaled so the largest coefficient is one.
    let rows = lp.constraints.len();
    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(rows);
    let mut rhs = Vec::with_capacity(rows);
    for c in &lp.constraints {
        let mut row = vec![0.0; n_struct];
        let mut b = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { lo, col } => {
                    row[col] += a;
                    b -= a * lo;
                }
                VarMap::Flip { hi, col } => {
                    row[col] -= a;
                    b -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            for v in row.iter_mut() {
                *v /= scale;
            }
            b /= scale;
        }
        dense.push(row);
        rhs.push(b);
    }

    // Empty rows: either trivially satisfied or infeasible.
    for (i, row) in dense.iter().enumerate() {
        if row.iter().all(|&v| v == 0.0) {
            let bad = match lp.constraints[i].relation {
                Relation::Le => rhs[i] < -LP_TOL,
                Relation::Eq => rhs[i].abs() > LP_TOL,
            };
            if bad {
                return Ok(LpSolution::without_point(LpStatus::Infeasible));
            }
        }
    }

    // Crash start: boxed columns may begin at their upper bound when that
    // lowers the total infeasibility of the starting point, which saves
    // phase-1 work on problems with many negative right-hand sides.
    let mut start_at = vec![NonbasicAt::Lower; n_struct];
    let mut col_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
    for (i, row) in dense.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                col_rows[j].push((i, v));
            }
        }
    }
    // Columns the objective wants to raise, or hinted ones, start at their
    // upper bound.
    for (j, &cj) in lp.objective.iter().enumerate() {
        let col = match maps[j] {
            VarMap::Shift { col, .. } if cj > 0.0 || lp.start_upper[j] => col,
            VarMap::Flip { col, .. } if cj < 0.0 => col,
            _ => continue,
        };
        if upper[col].is_finite() && upper[col] > 0.0 {
            for &(i, v) in &col_rows[col] {
                rhs[i] -= v * upper[col];
            }
            start_at[col] = NonbasicAt::Upper;
        }
    }
    let is_eq: Vec<bool> = lp.constraints.iter().map(|c| c.relation == Relation::Eq).collect();
    let infeas = |r: f64, eq: bool| if eq { r.abs() } else { (-r).max(0.0) };
    for _pass in 0..6 {
        for j in 0..n_struct {
            let u = upper[j];
            if !u.is_finite() || u == 0.0 {
                continue;
            }
            let sign = if start_at[j] == NonbasicAt::Lower { 1.0 } else { -1.0 };
            let delta: f64 = col_rows[j].iter().map(|&(i, v)| infeas(rhs[i] - sign * v * u, is_eq[i]) - infeas(rhs[i], is_eq[i])).sum();
            if delta < -1e-12 {
                for &(i, v) in &col_rows[j] {
                    rhs[i] -= sign * v * u;
                }
                start_at[j] = if sign > 0.0 { NonbasicAt::Upper } else { NonbasicAt::Lower };
            }
        }
    }
    drop(col_rows);

    // Column layout: structural | slacks | artificials.
    let n_slack = lp.constraints.iter().filter(|c| c.relation == Relation::Le).count();
    let mut needs_art = vec![false; rows];
    let mut sign = vec![1.0; rows];
    for i in 0..rows {
        let le = lp.constraints[i].relation == Relation::Le;
        if rhs[i] < 0.0 {
            sign[i] = -1.0;
        }
        needs_art[i] = !le || rhs[i] < 0.0;
    }
    let n_art = needs_art.iter().filter(|&&x| x).count();
    let cols = n_struct + n_slack + n_art;

    let mut kind = vec![ColKind::Structural; n_struct];
    kind.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
    kind.extend(std::iter::repeat_n(ColKind::Artificial, n_art));
    upper.extend(std::iter::repeat_n(f64::INFINITY, n_slack + n_art));

    let mut a = vec![0.0; rows * cols];
    let mut basis = vec![0; rows];
    let mut beta = vec![0.0; rows];
    let mut slack_col = n_struct;
    let mut art_col = n_struct + n_slack;
    for i in 0..rows {
        let s = sign[i];
        let row = &mut a[i * cols..(i + 1) * cols];
        for (j, &v) in dense[i].iter().enumerate() {
            row[j] = s * v;
        }
        beta[i] = s * rhs[i];
        let mut basic = None;
        if lp.constraints[i].relation == Relation::Le {
            row[slack_col] = s;
            if s > 0.0 {
                basic = Some(slack_col);
            }
            slack_col += 1;
        }
        if needs_art[i] {
            row[art_col] = 1.0;
            basic = Some(art_col);
            art_col += 1;
        }
        basis[i] = basic.expect("every row has a starting basic column");
    }
    drop(dense);

    let mut basic_row = vec![None; cols];
    for (r, &b) in basis.iter().enumerate() {
        basic_row[b] = Some(r);
    }
    let mut t = Tableau {
        rows,
        cols,
        a,
        beta,
        d: vec![0.0; cols],
        upper,
        kind,
        basis,
        basic_row,
        at: start_at.into_iter().chain(std::iter::repeat(NonbasicAt::Lower)).take(cols).collect(),
        iterations: 0,
        max_iterations: 50 * (rows + cols) + 10_000,
    };

    // Phase 1: maximize -Σ artificials.
    if n_art > 0 {
        let cost: Vec<f64> = t.kind.iter().map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 }).collect();
        t.price(&cost);
        match t.run()? {
            Step::Optimal => {}
            Step::Unbounded => unreachable!("phase 1 objective is bounded"),
            Step::Moved => unreachable!(),
        }
        let infeas: f64 = (0..cols).filter(|&c| t.kind[c] == ColKind::Artificial).map(|c| t.column_value(c)).sum();
        if infeas > LP_TOL {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        // Pin artificials at zero and drive basic ones out where possible.
        for c in 0..cols {
            if t.kind[c] == ColKind::Artificial {
                t.upper[c] = 0.0;
                t.at[c] = NonbasicAt::Lower;
            }
        }
        for r in 0..rows {
            let b = t.basis[r];
            if t.kind[b] != ColKind::Artificial {
                continue;
            }
            let candidate = (0..cols)
                .filter(|&c| t.kind[c] != ColKind::Artificial && t.basic_row[c].is_none())
                .max_by(|&x, &y| t.entry(r, x).abs().total_cmp(&t.entry(r, y).abs()).then(y.cmp(&x)));
            if let Some(c) = candidate {
                if t.entry(r, c).abs() > ENTRY_TOL {
                    // The artificial carried at most LP_TOL; the entering
                    // column keeps its current value.
                    let value = t.nonbasic_value(c);
                    t.pivot(r, c);
                    t.basic_row[b] = None;
                    t.at[b] = NonbasicAt::Lower;
                    t.beta[r] = value;
                }
            }
        }
    }

    // Phase 2.
    let mut cost = vec![0.0; cols];
    for (j, &cj) in lp.objective.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += cj,
            VarMap::Flip { col, .. } => cost[col] -= cj,
            VarMap::Split { pos, neg } => {
                cost[pos] += cj;
                cost[neg] -= cj;
            }
        }
    }
    t.price(&cost);
    if let Step::Unbounded = t.run()? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let col_val: Vec<f64> = (0..n_struct).map(|c| t.column_value(c)).collect();
    let point: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { lo, col } => lo + col_val[col],
            VarMap::Flip { hi, col } => hi - col_val[col],
            VarMap::Split { pos, neg } => col_val[pos] - col_val[neg],
        })
        .collect();

    let violation = lp.max_violation(&point);
    let scale = 1.0 + point.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if violation > LP_TOL * scale {
        return Err(LpError::NumericalBreakdown { violation });
    }
    let objective = lp.objective.iter().zip(&point).map(|(c, y)| c * y).sum();
    Ok(LpSolution { status: LpStatus::Optimal, point, objective })
}
