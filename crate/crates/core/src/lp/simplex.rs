//! Dense revised simplex for bounded-variable LPs.
//!
//! The basis inverse is kept explicitly and updated by a rank-one product
//! after each pivot, with a full re-inversion every `refactor_every` pivots.
//! Phase 1 minimizes the sum of artificial variables; a caller-supplied
//! vertex can replace it (see [`LpSolver::solve`]). Pricing is Dantzig's
//! most-violating reduced cost until a run of degenerate pivots switches it
//! to Bland's smallest-index rule.

use std::time::Instant;

use log::{debug, trace};

use super::presolve::{independent_rows, RowSelection};
use super::program::{dot, LinearProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The basis matrix became singular during re-inversion.
    NumericalFailure,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration_limit",
            LpStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the structural variables.
    pub primal: Vec<f64>,
    /// One multiplier per row of the original program; dropped redundant rows get 0.
    pub dual: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    pub runtime_secs: f64,
}

impl LpSolution {
    fn failed(status: LpStatus, lp: &LinearProgram, iterations: usize, start: Instant) -> Self {
        Self {
            status,
            primal: vec![0.0; lp.num_vars()],
            dual: vec![0.0; lp.num_rows()],
            objective_value: f64::NAN,
            iterations,
            runtime_secs: start.elapsed().as_secs_f64(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Primal, dual and gap residuals of this solution against `lp`.
    pub fn residuals(&self, lp: &LinearProgram) -> Residuals {
        Residuals::of(lp, &self.primal, &self.dual)
    }
}

/// Optimality diagnostics for a primal/dual pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    /// Largest violation of `A x = b` or of a bound.
    pub primal: f64,
    /// Largest reduced cost with the wrong sign for where the variable sits.
    pub dual: f64,
    /// `|c.x - dual bound|`.
    pub gap: f64,
}

impl Residuals {
    pub fn of(lp: &LinearProgram, x: &[f64], y: &[f64]) -> Self {
        let primal = lp.primal_residual(x);
        let z = lp.reduced_costs(y);
        let tol = 1e-9;
        let mut dual = 0.0f64;
        for ((&zj, &xj), &(lo, hi)) in z.iter().zip(x).zip(lp.bounds()) {
            if lo == hi {
                continue;
            }
            let at_lower = (xj - lo).abs() <= tol;
            let at_upper = (hi - xj).abs() <= tol;
            let violation = match (at_lower, at_upper) {
                (true, false) => (-zj).max(0.0),
                (false, true) => zj.max(0.0),
                (true, true) => 0.0,
                (false, false) => zj.abs(),
            };
            dual = dual.max(violation);
        }
        let (bound, infeasible) = lp.dual_bound(y);
        let gap = (lp.objective_at(x) - bound).abs();
        Self {
            primal,
            dual: dual.max(infeasible),
            gap,
        }
    }

    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Pivot cap; `None` means `100 * num_vars`.
    pub max_iterations: Option<usize>,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            max_iterations: None,
            bland_after: 50,
            refactor_every: 100,
        }
    }
}

/// Anything that can solve a [`LinearProgram`].
pub trait LpSolver: Send + Sync {
    /// `start`, when given, should be a feasible vertex of `lp`; solvers may
    /// use it to skip phase 1 and must ignore it if it is unusable.
    fn solve(&self, lp: &LinearProgram, start: Option<&[f64]>) -> LpSolution;

    fn name(&self) -> &'static str;

    fn tolerances(&self) -> (f64, f64);
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimplexSolver {
    pub options: SimplexOptions,
}

impl SimplexSolver {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }
}

/// Solves with default options and a cold start.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    SimplexSolver::default().solve(lp, None)
}

impl LpSolver for SimplexSolver {
    fn name(&self) -> &'static str {
        "revised-simplex"
    }

    fn tolerances(&self) -> (f64, f64) {
        (self.options.feasibility_tol, self.options.optimality_tol)
    }

    fn solve(&self, lp: &LinearProgram, start: Option<&[f64]>) -> LpSolution {
        let clock = Instant::now();
        let opts = &self.options;
        let kept = match independent_rows(lp, opts.feasibility_tol) {
            RowSelection::Independent(kept) => kept,
            RowSelection::Inconsistent { row, residual } => {
                debug!("presolve: row {row} inconsistent (residual {residual:e})");
                return LpSolution::failed(LpStatus::Infeasible, lp, 0, clock);
            }
        };
        let max_iterations = opts.max_iterations.unwrap_or(100 * lp.num_vars().max(1));
        let mut engine = Engine::new(lp, &kept, opts, max_iterations);

        let warm = start.map(|x0| engine.warm_start(x0)).unwrap_or(false);
        if !warm {
            engine.cold_start();
            match engine.run(Phase::One) {
                Outcome::Optimal => {}
                Outcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
                Outcome::IterationLimit => {
                    return LpSolution::failed(LpStatus::IterationLimit, lp, engine.iterations, clock)
                }
                Outcome::Singular => {
                    return LpSolution::failed(LpStatus::NumericalFailure, lp, engine.iterations, clock)
                }
            }
            let infeasibility: f64 = (engine.n..engine.n + engine.m).map(|j| engine.x[j]).sum();
            if infeasibility > opts.feasibility_tol * (1.0 + engine.b_scale) {
                debug!("phase 1 ends with infeasibility {infeasibility:e}");
                return LpSolution::failed(LpStatus::Infeasible, lp, engine.iterations, clock);
            }
            engine.fix_artificials();
        }

        let outcome = engine.run(Phase::Two);
        let status = match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => LpStatus::IterationLimit,
            Outcome::Singular => LpStatus::NumericalFailure,
        };
        if status != LpStatus::Optimal {
            return LpSolution::failed(status, lp, engine.iterations, clock);
        }

        let primal = engine.x[..engine.n].to_vec();
        let reduced_duals = engine.duals(&engine.phase_two_cost());
        let mut dual = vec![0.0; lp.num_rows()];
        for (k, &row) in kept.iter().enumerate() {
            dual[row] = reduced_duals[k];
        }
        let objective_value = lp.objective_at(&primal);
        trace!(
            "simplex: {} rows kept of {}, {} iterations, objective {objective_value}",
            kept.len(),
            lp.num_rows(),
            engine.iterations
        );
        LpSolution {
            status,
            primal,
            dual,
            objective_value,
            iterations: engine.iterations,
            runtime_secs: clock.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    /// Free variable resting at its current value.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
    Singular,
}

const PIVOT_TOL: f64 = 1e-9;

struct Engine<'a> {
    opts: &'a SimplexOptions,
    max_iterations: usize,
    m: usize,
    /// Structural variables; columns `n..n+m` are artificials.
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    b: Vec<f64>,
    b_scale: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Column-major `m x m` inverse of the basis matrix: column `c` is
    /// `binv[c*m..(c+1)*m]`.
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_streak: usize,
}

impl<'a> Engine<'a> {
    fn new(lp: &LinearProgram, kept: &[usize], opts: &'a SimplexOptions, max_iterations: usize) -> Self {
        let n = lp.num_vars();
        let m = kept.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        for (k, &row) in kept.iter().enumerate() {
            for &(j, v) in &lp.rows()[row] {
                match cols[j].last_mut() {
                    Some(last) if last.0 == k => last.1 += v,
                    _ => cols[j].push((k, v)),
                }
            }
        }
        for k in 0..m {
            cols[n + k].push((k, 1.0));
        }
        let b: Vec<f64> = kept.iter().map(|&r| lp.rhs()[r]).collect();
        let b_scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut lower: Vec<f64> = lp.bounds().iter().map(|b| b.0).collect();
        let mut upper: Vec<f64> = lp.bounds().iter().map(|b| b.1).collect();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(0.0, m));
        let mut cost = lp.objective().to_vec();
        cost.extend(std::iter::repeat_n(0.0, m));
        Self {
            opts,
            max_iterations,
            m,
            n,
            cols,
            cost,
            b,
            b_scale,
            lower,
            upper,
            x: vec![0.0; n + m],
            state: vec![VarState::Lower; n + m],
            basis: Vec::with_capacity(m),
            binv: vec![0.0; m * m],
            iterations: 0,
            since_refactor: 0,
            degenerate_streak: 0,
        }
    }

    fn phase_two_cost(&self) -> Vec<f64> {
        self.cost.clone()
    }

    fn phase_one_cost(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n + self.m];
        for v in &mut c[self.n..] {
            *v = 1.0;
        }
        c
    }

    fn place_nonbasic(&mut self, j: usize) {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if lo.is_finite() {
            self.x[j] = lo;
            self.state[j] = VarState::Lower;
        } else if hi.is_finite() {
            self.x[j] = hi;
            self.state[j] = VarState::Upper;
        } else {
            self.x[j] = 0.0;
            self.state[j] = VarState::Free;
        }
    }

    /// All structurals at a bound, artificials absorbing the residual.
    fn cold_start(&mut self) {
        for j in 0..self.n {
            self.place_nonbasic(j);
        }
        let mut residual = self.b.clone();
        for j in 0..self.n {
            if self.x[j] != 0.0 {
                for &(i, v) in &self.cols[j] {
                    residual[i] -= v * self.x[j];
                }
            }
        }
        self.basis.clear();
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for (i, r) in residual.iter().enumerate() {
            let a = self.n + i;
            let sign = if *r < 0.0 { -1.0 } else { 1.0 };
            self.cols[a] = vec![(i, sign)];
            self.lower[a] = 0.0;
            self.upper[a] = f64::INFINITY;
            self.x[a] = r.abs();
            self.state[a] = VarState::Basic;
            self.basis.push(a);
            self.binv[i * self.m + i] = sign;
        }
        self.since_refactor = 0;
        self.degenerate_streak = 0;
    }

    /// Artificials may no longer move once phase 1 is done.
    fn fix_artificials(&mut self) {
        for a in self.n..self.n + self.m {
            self.upper[a] = 0.0;
            if self.state[a] != VarState::Basic {
                self.x[a] = 0.0;
                self.state[a] = VarState::Lower;
            }
        }
        self.degenerate_streak = 0;
    }

    /// Builds a basis around the support of `x0`, padding with artificials
    /// fixed at zero. Returns false (leaving the engine to be cold-started)
    /// when `x0` is not a feasible vertex.
    fn warm_start(&mut self, x0: &[f64]) -> bool {
        let tol = self.opts.feasibility_tol;
        if x0.len() != self.n {
            return false;
        }
        let mut support = Vec::new();
        for (j, &v) in x0.iter().enumerate() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !v.is_finite() || v < lo - tol || v > hi + tol {
                return false;
            }
            if (v - lo).abs() <= tol {
                self.x[j] = lo;
                self.state[j] = VarState::Lower;
            } else if (hi - v).abs() <= tol {
                self.x[j] = hi;
                self.state[j] = VarState::Upper;
            } else {
                support.push(j);
            }
        }
        if support.len() > self.m {
            return false;
        }

        // Gaussian elimination on the support columns picks their pivot rows.
        let m = self.m;
        let mut reduced: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut row_used = vec![false; m];
        for &j in &support {
            let mut col = vec![0.0; m];
            for &(i, v) in &self.cols[j] {
                col[i] += v;
            }
            for (prow, pcol) in &reduced {
                let f = col[*prow];
                if f != 0.0 {
                    for (c, p) in col.iter_mut().zip(pcol) {
                        *c -= f * p;
                    }
                }
            }
            let (best, mag) =
                col.iter()
                    .enumerate()
                    .filter(|(i, _)| !row_used[*i])
                    .fold(
                        (usize::MAX, 0.0f64),
                        |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
                    );
            if best == usize::MAX || mag < 1e-9 {
                return false;
            }
            let inv = 1.0 / col[best];
            col.iter_mut().for_each(|c| *c *= inv);
            row_used[best] = true;
            reduced.push((best, col));
        }

        self.basis.clear();
        for &j in &support {
            self.state[j] = VarState::Basic;
            self.basis.push(j);
        }
        for (i, used) in row_used.iter().enumerate() {
            let a = self.n + i;
            self.cols[a] = vec![(i, 1.0)];
            self.lower[a] = 0.0;
            self.upper[a] = 0.0;
            self.x[a] = 0.0;
            if *used {
                self.state[a] = VarState::Lower;
            } else {
                self.state[a] = VarState::Basic;
                self.basis.push(a);
            }
        }
        if self.refactor().is_err() {
            return false;
        }
        let feasible = self
            .basis
            .iter()
            .all(|&j| self.x[j] >= self.lower[j] - tol && self.x[j] <= self.upper[j] + tol);
        if !feasible {
            debug!("warm start point is not a feasible vertex; falling back to phase 1");
        }
        self.degenerate_streak = 0;
        feasible
    }

    /// Re-inverts the basis matrix and recomputes the basic values.
    fn refactor(&mut self) -> Result<(), ()> {
        let m = self.m;
        // [B | I] -> [I | B^-1] by Gauss-Jordan with partial pivoting
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + k] += v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (p, mag) = (c..m).fold((c, 0.0f64), |acc, r| {
                let v = a[r * m + c].abs();
                if v > acc.1 {
                    (r, v)
                } else {
                    acc
                }
            });
            if mag < 1e-12 {
                return Err(());
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = 1.0 / a[c * m + c];
            for k in 0..m {
                a[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        // row-major -> column-major
        for r in 0..m {
            for c in 0..m {
                self.binv[c * m + r] = inv[r * m + c];
            }
        }

        let mut residual = self.b.clone();
        for j in 0..self.n + self.m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for &(i, v) in &self.cols[j] {
                    residual[i] -= v * self.x[j];
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (c, &r) in residual.iter().enumerate() {
            if r != 0.0 {
                for (x, v) in xb.iter_mut().zip(&self.binv[c * m..(c + 1) * m]) {
                    *x += v * r;
                }
            }
        }
        for (k, v) in xb.into_iter().enumerate() {
            self.x[self.basis[k]] = v;
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// `y^T = c_B^T B^-1`
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        (0..m).map(|i| dot(&cb, &self.binv[i * m..(i + 1) * m])).collect()
    }

    /// `B^-1 a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(i, v) in &self.cols[j] {
            for (a, b) in alpha.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                *a += b * v;
            }
        }
        alpha
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>()
    }

    /// Entering variable and its reduced cost, or `None` at optimality.
    fn price(&self, cost: &[f64], y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(cost, y, j);
            let eligible = match st {
                VarState::Lower => d < -tol,
                VarState::Upper => d > tol,
                VarState::Free => d.abs() > tol,
                VarState::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn run(&mut self, phase: Phase) -> Outcome {
        let cost = match phase {
            Phase::One => self.phase_one_cost(),
            Phase::Two => self.phase_two_cost(),
        };
        let feas_tol = self.opts.feasibility_tol;
        let mut y = self.duals(&cost);
        loop {
            if self.since_refactor >= self.opts.refactor_every && self.refactor().is_err() {
                return Outcome::Singular;
            }
            let bland = self.degenerate_streak >= self.opts.bland_after;
            if self.since_refactor == 0 {
                y = self.duals(&cost);
            }
            let (q, dq) = match self.price(&cost, &y, bland) {
                Some(choice) => choice,
                None => {
                    if self.since_refactor == 0 {
                        return Outcome::Optimal;
                    }
                    // confirm optimality on a fresh factorization
                    if self.refactor().is_err() {
                        return Outcome::Singular;
                    }
                    continue;
                }
            };
            if self.iterations >= self.max_iterations {
                return Outcome::IterationLimit;
            }
            self.iterations += 1;

            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);

            // Two-pass ratio test: relaxed bounds give the step cap, then the
            // largest pivot under the cap leaves (smallest index under Bland).
            let limit = |k: usize, relax: f64| -> Option<f64> {
                let rate = -dir * alpha[k];
                let j = self.basis[k];
                if rate < -PIVOT_TOL {
                    let lo = self.lower[j];
                    lo.is_finite().then(|| (self.x[j] - lo + relax) / -rate)
                } else if rate > PIVOT_TOL {
                    let hi = self.upper[j];
                    hi.is_finite().then(|| (hi - self.x[j] + relax) / rate)
                } else {
                    None
                }
            };
            let relax = if bland { 0.0 } else { feas_tol };
            let cap = (0..self.m)
                .filter_map(|k| limit(k, relax))
                .fold(f64::INFINITY, f64::min);
            let mut leave: Option<(usize, f64)> = None;
            if cap.is_finite() {
                for k in 0..self.m {
                    let Some(t) = limit(k, 0.0) else { continue };
                    let within = if bland { t <= cap + 1e-12 } else { t <= cap };
                    if !within {
                        continue;
                    }
                    leave = match leave {
                        None => Some((k, t)),
                        Some((bk, bt)) => {
                            let better = if bland {
                                self.basis[k] < self.basis[bk]
                            } else {
                                alpha[k].abs() > alpha[bk].abs()
                            };
                            if better {
                                Some((k, t))
                            } else {
                                Some((bk, bt))
                            }
                        }
                    };
                }
            }
            let flip = self.upper[q] - self.lower[q];
            let step_limit = leave.map_or(f64::INFINITY, |(_, t)| t.max(0.0));

            if flip.is_finite() && flip <= step_limit {
                // entering variable runs to its opposite bound, basis unchanged
                let theta = flip;
                for k in 0..self.m {
                    self.x[self.basis[k]] -= dir * theta * alpha[k];
                }
                if dir > 0.0 {
                    self.x[q] = self.upper[q];
                    self.state[q] = VarState::Upper;
                } else {
                    self.x[q] = self.lower[q];
                    self.state[q] = VarState::Lower;
                }
                self.degenerate_streak = 0;
                continue;
            }
            let Some((p, _)) = leave else {
                return Outcome::Unbounded;
            };
            let theta = step_limit;
            for k in 0..self.m {
                self.x[self.basis[k]] -= dir * theta * alpha[k];
            }
            self.x[q] += dir * theta;

            let out = self.basis[p];
            let rate = -dir * alpha[p];
            if rate < 0.0 {
                self.x[out] = self.lower[out];
                self.state[out] = VarState::Lower;
            } else {
                self.x[out] = self.upper[out];
                self.state[out] = if self.lower[out] == self.upper[out] {
                    VarState::Lower
                } else {
                    VarState::Upper
                };
            }
            self.state[q] = VarState::Basic;
            self.basis[p] = q;

            // B^-1 <- E B^-1, one column at a time; y follows with the new pivot row
            let m = self.m;
            let inv_pivot = 1.0 / alpha[p];
            let mut pivot_row = vec![0.0; m];
            for (c, col) in self.binv.chunks_exact_mut(m).enumerate() {
                let piv = col[p] * inv_pivot;
                if piv != 0.0 {
                    for (v, a) in col.iter_mut().zip(&alpha) {
                        *v -= a * piv;
                    }
                }
                col[p] = piv;
                pivot_row[c] = piv;
            }
            for (yi, r) in y.iter_mut().zip(&pivot_row) {
                *yi += dq * r;
            }
            self.since_refactor += 1;

            // Pivots that only remove a (zero-valued) artificial make progress
            // and cannot cycle, so they do not count toward Bland's rule.
            if theta <= 1e-12 && out < self.n {
                self.degenerate_streak += 1;
            } else {
                self.degenerate_streak = 0;
            }
        }
    }
}
