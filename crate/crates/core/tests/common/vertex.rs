//! Brute-force vertex enumeration for small bounded LPs, used as an oracle
//! independent of the simplex code.

use gridmarg::lp::LpProblem;

/// A hyperplane `a.x = rhs` that may be made active at a vertex.
struct Plane {
    a: Vec<f64>,
    rhs: f64,
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() < 1e-10 {
            return None;
        }
        m.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for c in k..n {
                    m[i][c] -= f * m[k][c];
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[k][c] * x[c]).sum();
        x[k] = (rhs[k] - s) / m[k][k];
    }
    Some(x)
}

fn feasible(p: &LpProblem, x: &[f64], tol: f64) -> bool {
    p.eq_constraints.iter().all(|r| (r.activity(x) - r.rhs).abs() <= tol * (1.0 + r.rhs.abs()))
        && p.ineq_constraints.iter().all(|r| r.activity(x) <= r.rhs + tol * (1.0 + r.rhs.abs()))
        && (0..x.len()).all(|j| x[j] >= p.lower[j] - tol && x[j] <= p.upper[j] + tol)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Minimum objective over all basic feasible solutions, or `None` when no
/// vertex is feasible. Assumes every variable has finite bounds.
pub fn vertex_enumeration_min(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let dense = |coeffs: &[(usize, f64)]| {
        let mut a = vec![0.0; n];
        for &(j, v) in coeffs {
            a[j] += v;
        }
        a
    };
    let eq: Vec<Plane> =
        p.eq_constraints.iter().map(|r| Plane { a: dense(&r.coeffs), rhs: r.rhs }).collect();
    let mut optional: Vec<Plane> =
        p.ineq_constraints.iter().map(|r| Plane { a: dense(&r.coeffs), rhs: r.rhs }).collect();
    for j in 0..n {
        for b in [p.lower[j], p.upper[j]] {
            assert!(b.is_finite(), "oracle needs finite bounds");
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            optional.push(Plane { a, rhs: b });
        }
    }
    if eq.len() > n {
        return None;
    }
    let mut best: Option<f64> = None;
    combinations(optional.len(), n - eq.len(), &mut |pick| {
        let mut m: Vec<Vec<f64>> = eq.iter().map(|pl| pl.a.clone()).collect();
        let mut rhs: Vec<f64> = eq.iter().map(|pl| pl.rhs).collect();
        for &i in pick {
            m.push(optional[i].a.clone());
            rhs.push(optional[i].rhs);
        }
        if let Some(x) = solve_dense(m, rhs) {
            if feasible(p, &x, 1e-9) {
                let obj = p.objective_value(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}
