use super::{LpProblem, LpSolution};

/// Pass/fail threshold for every residual in a [`ResidualReport`].
pub const KKT_TOLERANCE: f64 = 1e-6;

/// KKT residuals recomputed from the problem data, the primal point and the
/// reported duals. The solution's own `reduced_costs` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Max row or bound violation, relative to `max(1, |rhs|)`.
    pub primal_infeasibility: f64,
    /// Max wrong-signed reduced cost or negative inequality dual.
    pub dual_infeasibility: f64,
    /// Max `|dual * slack|` over rows and bounds, relative to `max(1, |rhs|)`.
    pub complementarity: f64,
    /// `|primal objective - dual objective|`.
    pub duality_gap: f64,
    /// `duality_gap / max(1, |primal objective|)`.
    pub relative_gap: f64,
    pub pass: bool,
}

pub fn verify_kkt(problem: &LpProblem, solution: &LpSolution) -> ResidualReport {
    let x = &solution.x;
    let n = problem.num_vars();
    let mu = &solution.eq_duals;
    let gamma = &solution.ineq_duals;
    if x.len() != n
        || mu.len() != problem.eq_constraints.len()
        || gamma.len() != problem.ineq_constraints.len()
    {
        return ResidualReport {
            primal_infeasibility: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
            complementarity: f64::INFINITY,
            duality_gap: f64::INFINITY,
            relative_gap: f64::INFINITY,
            pass: false,
        };
    }

    let mut primal: f64 = 0.0;
    let mut comp: f64 = 0.0;
    let mut dual: f64 = 0.0;
    for row in &problem.eq_constraints {
        let r = (row.activity(x) - row.rhs).abs();
        primal = primal.max(r / row.rhs.abs().max(1.0));
    }
    for (row, &g) in problem.ineq_constraints.iter().zip(gamma) {
        let slack = row.rhs - row.activity(x);
        let scale = row.rhs.abs().max(1.0);
        primal = primal.max((-slack).max(0.0) / scale);
        comp = comp.max((g * slack).abs() / scale);
        dual = dual.max((-g).max(0.0));
    }

    let mut d = problem.objective.clone();
    for (row, m) in problem.eq_constraints.iter().zip(mu) {
        for &(j, a) in &row.coeffs {
            d[j] -= a * m;
        }
    }
    for (row, g) in problem.ineq_constraints.iter().zip(gamma) {
        for &(j, a) in &row.coeffs {
            d[j] += a * g;
        }
    }

    let mut dual_obj: f64 = problem.eq_constraints.iter().zip(mu).map(|(r, m)| r.rhs * m).sum::<f64>()
        - problem.ineq_constraints.iter().zip(gamma).map(|(r, g)| r.rhs * g).sum::<f64>();
    for j in 0..n {
        let (l, u, xj, dj) = (problem.lower[j], problem.upper[j], x[j], d[j]);
        let scale = xj.abs().max(1.0);
        primal = primal.max((l - xj).max(0.0) / scale).max((xj - u).max(0.0) / scale);
        let at_lower = l.is_finite() && (xj - l).abs() <= 1e-9 * (1.0 + l.abs());
        let at_upper = u.is_finite() && (u - xj).abs() <= 1e-9 * (1.0 + u.abs());
        let viol = if at_lower && at_upper {
            0.0
        } else if at_lower {
            (-dj).max(0.0)
        } else if at_upper {
            dj.max(0.0)
        } else {
            dj.abs()
        };
        dual = dual.max(viol);
        let pos = dj.max(0.0);
        let neg = (-dj).max(0.0);
        if pos > 0.0 && l.is_finite() {
            dual_obj += l * pos;
            comp = comp.max(pos * (xj - l).abs() / l.abs().max(1.0));
        }
        if neg > 0.0 && u.is_finite() {
            dual_obj -= u * neg;
            comp = comp.max(neg * (u - xj).abs() / u.abs().max(1.0));
        }
    }

    let primal_obj = problem.objective_value(x);
    let gap = (primal_obj - dual_obj).abs();
    let rel = gap / primal_obj.abs().max(1.0);
    let pass = primal <= KKT_TOLERANCE
        && dual <= KKT_TOLERANCE
        && comp <= KKT_TOLERANCE
        && rel <= KKT_TOLERANCE;
    ResidualReport {
        primal_infeasibility: primal,
        dual_infeasibility: dual,
        complementarity: comp,
        duality_gap: gap,
        relative_gap: rel,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve;

    fn merit_order() -> LpProblem {
        let mut p = LpProblem::new();
        let a = p.add_var(1.0);
        let b = p.add_var(2.0);
        p.add_eq(vec![(a, 1.0), (b, 1.0)], 1.0);
        p
    }

    #[test]
    fn optimal_solution_passes() {
        let p = merit_order();
        let s = solve(&p).unwrap();
        let r = verify_kkt(&p, &s);
        assert!(r.pass);
        assert!(r.primal_infeasibility <= 1e-12);
        assert!(r.dual_infeasibility <= 1e-12);
        assert!(r.complementarity <= 1e-12);
        assert!(r.duality_gap <= 1e-12);
    }

    #[test]
    fn suboptimal_point_fails_on_gap() {
        let p = merit_order();
        let mut s = solve(&p).unwrap();
        s.x = vec![0.0, 1.0];
        let r = verify_kkt(&p, &s);
        assert!(r.primal_infeasibility <= 1e-12);
        assert!((r.duality_gap - 1.0).abs() <= 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn perturbed_dual_shows_dual_infeasibility() {
        let p = merit_order();
        let mut s = solve(&p).unwrap();
        s.eq_duals[0] += 1e-3;
        let r = verify_kkt(&p, &s);
        // x0 = 1 is strictly inside [0, inf): its reduced cost must vanish.
        assert!((r.dual_infeasibility - 1e-3).abs() <= 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn wrong_length_fails() {
        let p = merit_order();
        let mut s = solve(&p).unwrap();
        s.x.pop();
        assert!(!verify_kkt(&p, &s).pass);
    }
}
