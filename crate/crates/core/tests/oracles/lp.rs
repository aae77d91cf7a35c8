//! Brute-force LP oracle: enumerate every basic solution of a bounded
//! `A x <= b` system and keep the best feasible one.

use rand::Rng;
use tubeplan::linsolve::{LinearProgram, Relation};

/// Maximum of `c·x` over `{x : A x <= b}` by vertex enumeration, or `None`
/// when no vertex is feasible. The system must be bounded.
pub fn vertex_enumeration_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    let m = a.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    if m < n {
        return None;
    }
    loop {
        if let Some(x) =
            solve_square(&idx.iter().map(|&i| a[i].clone()).collect::<Vec<_>>(), &idx.iter().map(|&i| b[i]).collect::<Vec<_>>())
        {
            let feasible = a.iter().zip(b).all(|(row, &bi)| dot(row, &x) <= bi + 1e-9);
            if feasible {
                let v = dot(c, &x);
                best = Some(best.map_or(v, |w: f64| w.max(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut r = r.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, p);
        let pivot = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot[col];
                for (v, pv) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *v -= f * pv;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// A random bounded LP with integer data, plus its expansion into pure
/// `<=` rows for the oracle.
pub struct RandomLp {
    pub lp: LinearProgram,
    pub c: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

pub fn random_lp<R: Rng>(rng: &mut R) -> RandomLp {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=8);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let mut lp = LinearProgram::new(n);
    lp.set_objective(c.clone());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let b = rng.gen_range(-5..=10) as f64;
        if rng.gen_bool(0.15) {
            lp.add_eq(a.clone(), b);
            rows.push(a.iter().map(|v| -v).collect());
            rhs.push(-b);
        } else {
            lp.add_le(a.clone(), b);
        }
        rows.push(a);
        rhs.push(b);
    }
    // Keep everything bounded: 0 <= x_i <= 10.
    for i in 0..n {
        if rng.gen_bool(0.5) {
            lp.set_bounds(i, 0.0, 10.0);
        } else {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            lp.add_le(e, 10.0);
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push(e.clone());
        rhs.push(10.0);
        e[i] = -1.0;
        rows.push(e);
        rhs.push(0.0);
    }
    RandomLp { lp, c, rows, rhs }
}

/// Runs `count` random LPs; returns the number of disagreements and a
/// description of the first one.
pub fn compare_random(count: usize, seed: u64) -> (usize, Option<String>) {
    use rand::SeedableRng;
    use tubeplan::linsolve::LpStatus;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut first = None;
    for case in 0..count {
        let r = random_lp(&mut rng);
        let oracle = vertex_enumeration_max(&r.c, &r.rows, &r.rhs);
        let got = r.lp.solve();
        let ok = match (&got, oracle) {
            (Ok(s), Some(v)) => s.status == LpStatus::Optimal && (s.objective - v).abs() <= 1e-6 && r.lp.max_violation(&s.point) <= 1e-8,
            (Ok(s), None) => s.status == LpStatus::Infeasible,
            (Err(_), _) => false,
        };
        if !ok {
            bad += 1;
            if first.is_none() {
                first = Some(format!("case {case}: solver {got:?}, oracle {oracle:?}"));
            }
        }
    }
    (bad, first)
}

#[allow(dead_code)]
pub fn relation_is_le(r: Relation) -> bool {
    r == Relation::Le
}
