use gridmarg::lp::LpProblem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Random feasible, bounded LP: every variable lives in a finite box and the
/// right-hand sides are built around an interior point.
pub fn random_feasible_lp(seed: u64, n: usize, n_eq: usize, n_le: usize) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = LpProblem::new();
    let mut x0 = Vec::with_capacity(n);
    for _ in 0..n {
        let lo: f64 = if rng.gen_bool(0.3) { rng.gen_range(-5.0..0.0) } else { 0.0 };
        let hi = lo + rng.gen_range(1.0..10.0);
        let c = rng.gen_range(-10.0..10.0);
        p.add_bounded_var(c, lo, hi);
        x0.push(rng.gen_range(lo..hi));
    }
    let row = |rng: &mut ChaCha8Rng| -> Vec<(usize, f64)> {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                coeffs.push((j, rng.gen_range(-5.0..5.0)));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.gen_range(0..n), 1.0));
        }
        coeffs
    };
    for _ in 0..n_eq {
        let c = row(&mut rng);
        let rhs = c.iter().map(|&(j, a)| a * x0[j]).sum();
        p.add_eq(c, rhs);
    }
    for _ in 0..n_le {
        let c = row(&mut rng);
        let act: f64 = c.iter().map(|&(j, a)| a * x0[j]).sum();
        p.add_le(c, act + rng.gen_range(0.0..3.0));
    }
    p
}
