use super::{Constraint, LpProblem};
use std::fmt::Write;

fn term(out: &mut String, first: bool, coef: f64, var: usize) {
    if first {
        let _ = write!(out, " {coef} v{var}");
    } else if coef < 0.0 {
        let _ = write!(out, " - {} v{var}", -coef);
    } else {
        let _ = write!(out, " + {coef} v{var}");
    }
}

fn row(out: &mut String, name: &str, r: &Constraint, sense: &str) {
    let _ = write!(out, " {name}:");
    if r.coeffs.is_empty() {
        out.push_str(" 0 v0");
    }
    for (k, &(j, a)) in r.coeffs.iter().enumerate() {
        term(out, k == 0, a, j);
    }
    let _ = writeln!(out, " {sense} {}", r.rhs);
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Renders the problem in CPLEX-LP layout. Variables are named `v{index}`,
/// equality rows `e{index}` and `<=` rows `l{index}`.
pub fn write_lp_text(problem: &LpProblem) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let nz: Vec<(usize, f64)> =
        problem.objective.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
    if nz.is_empty() {
        out.push_str(" 0 v0");
    }
    for (k, &(j, c)) in nz.iter().enumerate() {
        term(&mut out, k == 0, c, j);
    }
    out.push_str("\nSubject To\n");
    for (i, r) in problem.eq_constraints.iter().enumerate() {
        row(&mut out, &format!("e{i}"), r, "=");
    }
    for (i, r) in problem.ineq_constraints.iter().enumerate() {
        row(&mut out, &format!("l{i}"), r, "<=");
    }
    out.push_str("Bounds\n");
    for j in 0..problem.num_vars() {
        let (l, u) = (problem.lower[j], problem.upper[j]);
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(out, " v{j} free");
        } else {
            let _ = writeln!(out, " {} <= v{j} <= {}", bound(l), bound(u));
        }
    }
    out.push_str("End\n");
    out
}
