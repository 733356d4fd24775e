//! Bounded revised primal simplex with an explicit dense basis inverse.
//!
//! Two phases over a scaled copy of the problem: phase one minimizes the sum
//! of artificial variables, phase two the scaled objective. Pricing is
//! Goldfarb-Reid steepest edge with a Harris two-pass ratio test; after a run
//! of degenerate pivots the solver drops to Bland's rule until the objective
//! moves again. The inverse is rebuilt by Gauss-Jordan elimination every
//! `refactor_interval` pivots and always before optimality is declared.

use super::{BasisStatus, LpError, LpProblem, LpSolution, LpStatus};
use log::debug;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    SteepestEdge,
    Bland,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_interval: usize,
    pub max_iterations: Option<usize>,
    pub scaling: bool,
    pub pricing: Pricing,
    /// Consecutive degenerate pivots tolerated before switching to Bland.
    pub degenerate_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_interval: 100,
            max_iterations: None,
            scaling: true,
            pricing: Pricing::SteepestEdge,
            degenerate_limit: 60,
        }
    }
}

/// Solves `problem`, retrying with more conservative settings when the
/// first attempt breaks down numerically.
pub fn solve(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.validate()?;
    let attempts = [
        SolverOptions::default(),
        SolverOptions { pricing: Pricing::Bland, refactor_interval: 25, ..SolverOptions::default() },
        SolverOptions {
            pricing: Pricing::Bland,
            refactor_interval: 10,
            scaling: false,
            ..SolverOptions::default()
        },
    ];
    let mut last_err = None;
    let mut fallback: Option<(f64, LpSolution)> = None;
    let cost_scale = problem.objective.iter().fold(1f64, |a, c| a.max(c.abs()));
    for opts in attempts.iter() {
        match solve_with(problem, opts) {
            Ok(sol) if sol.status != LpStatus::Optimal => return Ok(sol),
            Ok(sol) => {
                // Badly scaled data can hide an improving column from the
                // scaled pricing; recheck against the original problem.
                let dual = super::kkt::verify_kkt(problem, &sol).dual_infeasibility;
                if dual <= DUAL_RECHECK_TOL * cost_scale {
                    return Ok(sol);
                }
                debug!("simplex attempt left dual infeasibility {dual:e}; restarting");
                if fallback.as_ref().is_none_or(|(d, _)| dual < *d) {
                    fallback = Some((dual, sol));
                }
            }
            Err(LpError::NumericalFailure(msg)) => {
                debug!("simplex attempt failed ({msg}); restarting");
                last_err = Some(LpError::NumericalFailure(msg));
            }
            Err(e) => return Err(e),
        }
    }
    if let Some((_, sol)) = fallback {
        return Ok(sol);
    }
    Err(last_err.unwrap_or_else(|| LpError::NumericalFailure("no attempt made".into())))
}

/// Accepted unscaled dual infeasibility, relative to the largest cost.
const DUAL_RECHECK_TOL: f64 = 1e-7;

/// Coefficients below this magnitude are left out of the scale estimates.
const SCALING_FLOOR: f64 = 1e-10;

pub fn solve_with(problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    problem.validate()?;
    let mut s = Simplex::new(problem, opts);
    s.run()?;
    Ok(s.extract(problem))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    Free,
}

struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
    cost: f64,
}

fn pow2_round(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    2f64.powi(v.log2().round() as i32)
}

impl Scaling {
    fn identity(m: usize, n: usize) -> Self {
        Self { row: vec![1.0; m], col: vec![1.0; n], cost: 1.0 }
    }

    /// Geometric equilibration with power-of-two factors, so scaling itself
    /// introduces no rounding.
    fn geometric(rows: &[&super::Constraint], objective: &[f64]) -> Self {
        let m = rows.len();
        let n = objective.len();
        let mut sc = Self::identity(m, n);
        for _pass in 0..6 {
            for (i, row) in rows.iter().enumerate() {
                let (mut lo, mut hi) = (f64::INFINITY, 0f64);
                for &(j, a) in &row.coeffs {
                    let v = (a * sc.col[j]).abs();
                    if a.abs() > SCALING_FLOOR {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if hi > 0.0 {
                    sc.row[i] = 1.0 / (lo * hi).sqrt();
                }
            }
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![0f64; n];
            for (i, row) in rows.iter().enumerate() {
                for &(j, a) in &row.coeffs {
                    let v = (a * sc.row[i]).abs();
                    if a.abs() > SCALING_FLOOR {
                        lo[j] = lo[j].min(v);
                        hi[j] = hi[j].max(v);
                    }
                }
            }
            for j in 0..n {
                if hi[j] > 0.0 {
                    sc.col[j] = 1.0 / (lo[j] * hi[j]).sqrt();
                }
            }
        }
        sc.row.iter_mut().for_each(|r| *r = pow2_round(*r));
        sc.col.iter_mut().for_each(|c| *c = pow2_round(*c));
        let cmax = objective
            .iter()
            .zip(&sc.col)
            .map(|(c, s)| (c * s).abs())
            .fold(0f64, f64::max);
        if cmax > 0.0 {
            sc.cost = pow2_round(1.0 / cmax);
        }
        sc
    }
}

struct Simplex<'a> {
    opts: &'a SolverOptions,
    m: usize,
    n_struct: usize,
    n_eq: usize,
    ncols: usize,
    first_artificial: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    head: Vec<usize>,
    pos: Vec<usize>,
    binv: Vec<f64>,
    weights: Vec<f64>,
    scaling: Scaling,
    iterations: usize,
    since_refactor: usize,
    status: LpStatus,
}

const NOT_BASIC: usize = usize::MAX;

impl<'a> Simplex<'a> {
    fn new(p: &LpProblem, opts: &'a SolverOptions) -> Self {
        let n = p.num_vars();
        let n_eq = p.eq_constraints.len();
        let n_le = p.ineq_constraints.len();
        let m = n_eq + n_le;
        let rows: Vec<&super::Constraint> =
            p.eq_constraints.iter().chain(p.ineq_constraints.iter()).collect();
        let scaling = if opts.scaling {
            Scaling::geometric(&rows, &p.objective)
        } else {
            Scaling::identity(m, n)
        };

        // Structural columns, merged per (row, col) so duplicates sum.
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    per_col[j].push((i, a * scaling.row[i] * scaling.col[j]));
                }
            }
        }
        let mut col_start = Vec::with_capacity(n + 2 * m + 1);
        let mut col_row = Vec::new();
        let mut col_val = Vec::new();
        col_start.push(0);
        for entries in per_col.iter_mut() {
            entries.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < entries.len() {
                let r = entries[k].0;
                let mut v = 0.0;
                while k < entries.len() && entries[k].0 == r {
                    v += entries[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    col_row.push(r);
                    col_val.push(v);
                }
            }
            col_start.push(col_row.len());
        }
        let b: Vec<f64> = rows.iter().enumerate().map(|(i, r)| r.rhs * scaling.row[i]).collect();

        let mut lo = Vec::with_capacity(n + 2 * m);
        let mut hi = Vec::with_capacity(n + 2 * m);
        let mut cost = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut state = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            let s = scaling.col[j];
            let (l, u) = (p.lower[j] / s, p.upper[j] / s);
            lo.push(l);
            hi.push(u);
            cost.push(p.objective[j] * s * scaling.cost);
            if l.is_finite() {
                x.push(l);
                state.push(State::Lower);
            } else if u.is_finite() {
                x.push(u);
                state.push(State::Upper);
            } else {
                x.push(0.0);
                state.push(State::Free);
            }
        }
        // Slack columns for the `<=` rows.
        for i in 0..n_le {
            col_row.push(n_eq + i);
            col_val.push(1.0);
            col_start.push(col_row.len());
            lo.push(0.0);
            hi.push(f64::INFINITY);
            cost.push(0.0);
            x.push(0.0);
            state.push(State::Lower);
        }

        // Residual with all structurals at their starting values.
        let mut resid = b.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for k in col_start[j]..col_start[j + 1] {
                    resid[col_row[k]] -= col_val[k] * x[j];
                }
            }
        }

        let first_artificial = n + n_le;
        let mut head = vec![NOT_BASIC; m];
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            let slack = (i >= n_eq).then(|| n + (i - n_eq));
            if let (Some(sj), true) = (slack, resid[i] >= 0.0) {
                head[i] = sj;
                x[sj] = resid[i];
                state[sj] = State::Basic;
                binv[i * m + i] = 1.0;
            } else {
                let sign = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
                col_row.push(i);
                col_val.push(sign);
                col_start.push(col_row.len());
                lo.push(0.0);
                hi.push(f64::INFINITY);
                cost.push(0.0);
                x.push(resid[i].abs());
                state.push(State::Basic);
                head[i] = lo.len() - 1;
                binv[i * m + i] = sign;
            }
        }
        let ncols = lo.len();
        let mut pos = vec![NOT_BASIC; ncols];
        for (i, &j) in head.iter().enumerate() {
            pos[j] = i;
        }
        let mut weights = vec![1.0; ncols];
        for j in 0..ncols {
            let norm2: f64 = col_val[col_start[j]..col_start[j + 1]].iter().map(|v| v * v).sum();
            weights[j] = 1.0 + norm2;
        }

        Self {
            opts,
            m,
            n_struct: n,
            n_eq,
            ncols,
            first_artificial,
            col_start,
            col_row,
            col_val,
            b,
            lo,
            hi,
            cost,
            x,
            state,
            head,
            pos,
            binv,
            weights,
            scaling,
            iterations: 0,
            since_refactor: 0,
            status: LpStatus::Optimal,
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_start[j]..self.col_start[j + 1];
        self.col_row[r.clone()].iter().copied().zip(self.col_val[r].iter().copied())
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    fn run(&mut self) -> Result<(), LpError> {
        let has_artificials = self.ncols > self.first_artificial;
        if has_artificials {
            let phase_one: Vec<f64> =
                (0..self.ncols).map(|j| if self.is_artificial(j) { 1.0 } else { 0.0 }).collect();
            self.iterate(&phase_one, false)?;
            let infeas: f64 = (self.first_artificial..self.ncols).map(|j| self.x[j].max(0.0)).sum();
            let scale = 1.0 + self.b.iter().fold(0f64, |a, v| a.max(v.abs()));
            if infeas > 1e-8 * scale {
                debug!("phase one ended with artificial mass {infeas:e}");
                self.status = LpStatus::Infeasible;
                return Ok(());
            }
            for j in self.first_artificial..self.ncols {
                self.hi[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.x[j] = 0.0;
                    self.state[j] = State::Lower;
                }
            }
        }
        let cost = self.cost.clone();
        let unbounded = self.iterate(&cost, true)?;
        self.status = if unbounded { LpStatus::Unbounded } else { LpStatus::Optimal };
        Ok(())
    }

    fn iteration_cap(&self) -> usize {
        self.opts.max_iterations.unwrap_or(20_000 + 50 * (self.m + self.ncols))
    }

    /// Runs simplex iterations on the given cost vector; returns `true` when
    /// an unbounded ray is found.
    fn iterate(&mut self, cost: &[f64], allow_unbounded: bool) -> Result<bool, LpError> {
        let mut degenerate_run = 0usize;
        let mut fresh = false;
        let m = self.m;
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            if self.since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
                fresh = true;
            }
            if self.iterations > self.iteration_cap() {
                return Err(LpError::NumericalFailure(format!(
                    "iteration limit reached after {} pivots",
                    self.iterations
                )));
            }
            // y = B^-T c_B
            for k in 0..m {
                let col = &self.binv[k * m..(k + 1) * m];
                y[k] = self.head.iter().zip(col).map(|(&h, v)| cost[h] * v).sum();
            }
            let bland = self.opts.pricing == Pricing::Bland || degenerate_run > self.opts.degenerate_limit;
            let entering = self.price(cost, &y, bland);
            let Some((q, dq)) = entering else {
                if !fresh {
                    self.refactor()?;
                    fresh = true;
                    continue;
                }
                self.check_primal_drift()?;
                return Ok(false);
            };

            // alpha = B^-1 a_q
            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (r, a) in self.column(q) {
                let col = &self.binv[r * m..(r + 1) * m];
                for (t, v) in alpha.iter_mut().zip(col) {
                    *t += a * v;
                }
            }
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let (leave, theta) = self.ratio_test(q, dir, &alpha, bland);
            let range = self.hi[q] - self.lo[q];
            if leave.is_none() && !range.is_finite() {
                if allow_unbounded {
                    return Ok(true);
                }
                return Err(LpError::NumericalFailure("unbounded ray in phase one".into()));
            }

            let tol = self.opts.feasibility_tol;
            if theta * dq.abs() <= tol * 1e-3 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.iterations += 1;

            // Primal step.
            self.x[q] += dir * theta;
            for i in 0..m {
                if alpha[i] != 0.0 {
                    let h = self.head[i];
                    self.x[h] -= dir * theta * alpha[i];
                }
            }

            match leave {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.x[q] = self.hi[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.state[q] = State::Lower;
                    }
                }
                Some((r, to_upper)) => {
                    let leaving = self.head[r];
                    self.update_weights(q, r, &alpha);
                    self.pivot(q, r, &alpha);
                    if to_upper {
                        self.x[leaving] = self.hi[leaving];
                        self.state[leaving] = State::Upper;
                    } else {
                        self.x[leaving] = self.lo[leaving];
                        self.state[leaving] = State::Lower;
                    }
                    fresh = false;
                }
            }
        }
    }

    fn price(&self, cost: &[f64], y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let st = self.state[j];
            if st == State::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = cost[j] - self.column(j).map(|(r, a)| a * y[r]).sum::<f64>();
            let eligible = match st {
                State::Lower => d < -tol,
                State::Upper => d > tol,
                State::Free => d.abs() > tol,
                State::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            let score = d * d / self.weights[j];
            if score > best_score {
                best_score = score;
                best = Some((j, d));
            }
        }
        best
    }

    /// Returns the leaving basis position with the bound it hits, or `None`
    /// for a bound flip of the entering variable, plus the step length.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> (Option<(usize, bool)>, f64) {
        let tol = self.opts.feasibility_tol;
        let ptol = self.opts.pivot_tol;
        let range = self.hi[q] - self.lo[q];
        // (position, exact ratio, hits upper)
        let limit = |i: usize, relax: f64| -> Option<(f64, bool)> {
            let delta = -dir * alpha[i];
            let h = self.head[i];
            if delta < -ptol && self.lo[h].is_finite() {
                Some(((self.x[h] - self.lo[h] + relax) / -delta, false))
            } else if delta > ptol && self.hi[h].is_finite() {
                Some(((self.hi[h] - self.x[h] + relax) / delta, true))
            } else {
                None
            }
        };
        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for i in 0..self.m {
                if let Some((ratio, up)) = limit(i, 0.0) {
                    let ratio = ratio.max(0.0);
                    let better = match best {
                        None => true,
                        Some((bi, br, _)) => {
                            ratio < br - 1e-12 * (1.0 + br)
                                || (ratio <= br + 1e-12 * (1.0 + br) && self.head[i] < self.head[bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio, up));
                    }
                }
            }
            return match best {
                Some((i, ratio, up)) if ratio < range => (Some((i, up)), ratio),
                _ => (None, range),
            };
        }
        // Harris pass one: largest step with bounds relaxed by tol.
        let mut theta_max = f64::INFINITY;
        for i in 0..self.m {
            if let Some((ratio, _)) = limit(i, tol) {
                theta_max = theta_max.min(ratio);
            }
        }
        if range <= theta_max {
            return (None, range);
        }
        // Pass two: biggest pivot among ratios within the relaxed step.
        let mut best: Option<(usize, f64, bool)> = None;
        let mut best_piv = 0.0;
        for i in 0..self.m {
            if let Some((ratio, up)) = limit(i, 0.0) {
                if ratio <= theta_max && alpha[i].abs() > best_piv {
                    best_piv = alpha[i].abs();
                    best = Some((i, ratio.max(0.0), up));
                }
            }
        }
        match best {
            Some((i, ratio, up)) => (Some((i, up)), ratio),
            None => (None, range),
        }
    }

    fn update_weights(&mut self, q: usize, r: usize, alpha: &[f64]) {
        if self.opts.pricing == Pricing::Bland {
            return;
        }
        let m = self.m;
        let ar = alpha[r];
        let gamma_q = 1.0 + alpha.iter().map(|v| v * v).sum::<f64>();
        // rho = e_r' B^-1, tau = B^-T alpha
        let rho: Vec<f64> = (0..m).map(|k| self.binv[k * m + r]).collect();
        let tau: Vec<f64> = (0..m)
            .map(|k| self.binv[k * m..(k + 1) * m].iter().zip(alpha).map(|(b, a)| b * a).sum())
            .collect();
        for j in 0..self.ncols {
            if j == q || self.state[j] == State::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            let mut arj = 0.0;
            let mut atau = 0.0;
            for (row, a) in self.column(j) {
                arj += a * rho[row];
                atau += a * tau[row];
            }
            if arj == 0.0 {
                continue;
            }
            let ratio = arj / ar;
            let w = self.weights[j] - 2.0 * ratio * atau + ratio * ratio * gamma_q;
            self.weights[j] = w.max(1.0 + ratio * ratio);
        }
        let leaving = self.head[r];
        self.weights[leaving] = (gamma_q / (ar * ar)).max(1.0 + 1.0 / (ar * ar));
        self.weights[q] = 1.0;
    }

    fn pivot(&mut self, q: usize, r: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        for k in 0..m {
            let col = &mut self.binv[k * m..(k + 1) * m];
            let v = col[r] / ar;
            if v != 0.0 {
                for (c, a) in col.iter_mut().zip(alpha) {
                    *c -= a * v;
                }
            }
            col[r] = v;
        }
        let leaving = self.head[r];
        self.pos[leaving] = NOT_BASIC;
        self.head[r] = q;
        self.pos[q] = r;
        self.state[q] = State::Basic;
        self.since_refactor += 1;
    }

    /// Rebuilds the inverse from the basis columns and recomputes basic values.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        // Row-major copy of B and an identity, eliminated together.
        let mut a = vec![0.0; m * m];
        for (i, &h) in self.head.iter().enumerate() {
            for (r, v) in self.column(h) {
                a[r * m + i] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        // Track nonzero span of each inverse row to skip zeros cheaply.
        for k in 0..m {
            let mut p = k;
            let mut best = a[k * m + k].abs();
            for i in k + 1..m {
                let v = a[i * m + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-11 {
                return Err(LpError::NumericalFailure("singular basis during refactorization".into()));
            }
            if p != k {
                for c in 0..m {
                    a.swap(k * m + c, p * m + c);
                    inv.swap(k * m + c, p * m + c);
                }
            }
            let piv = a[k * m + k];
            let (pivot_a, pivot_inv) = {
                let ra: Vec<f64> = a[k * m..(k + 1) * m].iter().map(|v| v / piv).collect();
                let ri: Vec<f64> = inv[k * m..(k + 1) * m].iter().map(|v| v / piv).collect();
                (ra, ri)
            };
            a[k * m..(k + 1) * m].copy_from_slice(&pivot_a);
            inv[k * m..(k + 1) * m].copy_from_slice(&pivot_inv);
            let nz_a: Vec<usize> = (k..m).filter(|&c| pivot_a[c] != 0.0).collect();
            let nz_i: Vec<usize> = (0..m).filter(|&c| pivot_inv[c] != 0.0).collect();
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = a[i * m + k];
                if f == 0.0 {
                    continue;
                }
                for &c in &nz_a {
                    a[i * m + c] -= f * pivot_a[c];
                }
                for &c in &nz_i {
                    inv[i * m + c] -= f * pivot_inv[c];
                }
            }
        }
        // inv is B^-1 row-major; store column-major.
        for r in 0..m {
            for c in 0..m {
                self.binv[c * m + r] = inv[r * m + c];
            }
        }
        // x_B = B^-1 (b - N x_N)
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for k in self.col_start[j]..self.col_start[j + 1] {
                    rhs[self.col_row[k]] -= self.col_val[k] * xj;
                }
            }
        }
        for i in 0..m {
            let h = self.head[i];
            self.x[h] = (0..m).map(|c| self.binv[c * m + i] * rhs[c]).sum();
        }
        Ok(())
    }

    fn check_primal_drift(&self) -> Result<(), LpError> {
        let tol = 1e-6;
        for &h in &self.head {
            let v = self.x[h];
            let scale = 1.0 + v.abs();
            if v < self.lo[h] - tol * scale || v > self.hi[h] + tol * scale {
                return Err(LpError::NumericalFailure(format!(
                    "basic column {h} drifted out of bounds ({v:e})"
                )));
            }
        }
        Ok(())
    }

    fn extract(&self, p: &LpProblem) -> LpSolution {
        if self.status != LpStatus::Optimal {
            return LpSolution::non_optimal(self.status, self.iterations);
        }
        let m = self.m;
        let n = self.n_struct;
        let sc = &self.scaling;
        let mut x: Vec<f64> = (0..n).map(|j| self.x[j] * sc.col[j]).collect();
        for j in 0..n {
            // Snap to bounds the basis places the variable on.
            match self.state[j] {
                State::Lower => x[j] = p.lower[j],
                State::Upper => x[j] = p.upper[j],
                _ => {}
            }
        }
        let y: Vec<f64> = (0..m)
            .map(|k| {
                let col = &self.binv[k * m..(k + 1) * m];
                let ys: f64 = self.head.iter().zip(col).map(|(&h, v)| self.cost[h] * v).sum();
                ys * sc.row[k] / sc.cost
            })
            .collect();
        let eq_duals = y[..self.n_eq].to_vec();
        let ineq_duals: Vec<f64> = y[self.n_eq..].iter().map(|v| -v).collect();
        let mut reduced_costs = p.objective.clone();
        for (row, mu) in p.eq_constraints.iter().zip(&eq_duals) {
            for &(j, a) in &row.coeffs {
                reduced_costs[j] -= a * mu;
            }
        }
        for (row, g) in p.ineq_constraints.iter().zip(&ineq_duals) {
            for &(j, a) in &row.coeffs {
                reduced_costs[j] += a * g;
            }
        }
        let status_of = |j: usize| match self.state[j] {
            State::Basic => BasisStatus::Basic,
            State::Lower => BasisStatus::AtLower,
            State::Upper => BasisStatus::AtUpper,
            State::Free => BasisStatus::Free,
        };
        LpSolution {
            status: LpStatus::Optimal,
            objective_value: p.objective_value(&x),
            x,
            eq_duals,
            ineq_duals,
            reduced_costs,
            var_status: (0..n).map(status_of).collect(),
            slack_status: (0..p.ineq_constraints.len()).map(|i| status_of(n + i)).collect(),
            iterations: self.iterations,
        }
    }
}
