//! Linear programs in a minimize-form with equality rows, `<=` rows and
//! per-variable bounds, solved by a bounded revised simplex.
//!
//! Dual sign convention (matches the Lagrangian
//! `c'x - mu'(A_eq x - b_eq) + gamma'(A_le x - b_le)`):
//!
//! * `eq_duals[i]` is `d objective / d b_eq[i]`;
//! * `ineq_duals[i] >= 0` and `d objective / d b_le[i] = -ineq_duals[i]`;
//! * `reduced_costs = c - A_eq' mu + A_le' gamma`.
//!
//! At degenerate optima duals are not unique; the solver reports the duals of
//! its final optimal basis.

mod dump;
mod kkt;
mod simplex;

pub use dump::write_lp_text;
pub use kkt::{verify_kkt, ResidualReport, KKT_TOLERANCE};
pub use simplex::{solve, solve_with, Pricing, SolverOptions};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("variable {index}: lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// One sparse row `sum coeffs[k].1 * x[coeffs[k].0]` with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// `min c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  lower <= x <= upper`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<Constraint>,
    pub ineq_constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds a variable with bounds `[0, +inf)`.
    pub fn add_var(&mut self, cost: f64) -> usize {
        self.add_bounded_var(cost, 0.0, f64::INFINITY)
    }

    pub fn add_bounded_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.eq_constraints.push(Constraint::new(coeffs, rhs));
        self.eq_constraints.len() - 1
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.ineq_constraints.push(Constraint::new(coeffs, rhs));
        self.ineq_constraints.len() - 1
    }

    /// Stored as the negated `<=` row, so its dual is the sensitivity of the
    /// objective to `rhs` with a positive sign.
    pub fn add_ge(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        let negated = coeffs.into_iter().map(|(j, a)| (j, -a)).collect();
        self.add_le(negated, -rhs)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "{} objective entries but {} lower / {} upper bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (j, c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(LpError::NonFinite(format!("objective entry v{j}")));
            }
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidBounds { index: j, lower: l, upper: u });
            }
        }
        let rows = self
            .eq_constraints
            .iter()
            .enumerate()
            .map(|(i, r)| ("equality", i, r))
            .chain(self.ineq_constraints.iter().enumerate().map(|(i, r)| ("inequality", i, r)));
        for (kind, i, row) in rows {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("{kind} row {i} right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::DimensionMismatch(format!(
                        "{kind} row {i} references v{j} but only {n} variables exist"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(format!("{kind} row {i}, column v{j}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Final simplex status of a structural variable or an inequality slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub eq_duals: Vec<f64>,
    pub ineq_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub var_status: Vec<BasisStatus>,
    /// Status of the slack of each `<=` row.
    pub slack_status: Vec<BasisStatus>,
    pub iterations: usize,
}

impl LpSolution {
    pub(crate) fn non_optimal(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective_value: f64::NAN,
            eq_duals: Vec::new(),
            ineq_duals: Vec::new(),
            reduced_costs: Vec::new(),
            var_status: Vec::new(),
            slack_status: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Structural variables that are basic yet sit on one of their bounds.
    pub fn degenerate_basic_vars(&self, problem: &LpProblem, tol: f64) -> Vec<usize> {
        self.var_status
            .iter()
            .enumerate()
            .filter(|(j, s)| {
                **s == BasisStatus::Basic && {
                    let x = self.x[*j];
                    let (l, u) = (problem.lower[*j], problem.upper[*j]);
                    (l.is_finite() && (x - l).abs() <= tol * (1.0 + l.abs()))
                        || (u.is_finite() && (u - x).abs() <= tol * (1.0 + u.abs()))
                }
            })
            .map(|(j, _)| j)
            .collect()
    }

    /// `<=` rows whose slack is basic at zero.
    pub fn degenerate_slack_rows(&self, problem: &LpProblem, tol: f64) -> Vec<usize> {
        self.slack_status
            .iter()
            .enumerate()
            .filter(|(i, s)| {
                let row = &problem.ineq_constraints[*i];
                **s == BasisStatus::Basic
                    && (row.rhs - row.activity(&self.x)).abs() <= tol * (1.0 + row.rhs.abs())
            })
            .map(|(i, _)| i)
            .collect()
    }
}
