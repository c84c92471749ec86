//! Brute-force reference solver used by the test suite.
//!
//! Enumerates every basic solution of a small diet problem: each choice of
//! n active constraints (problem rows plus nonnegativity rows) is solved as a
//! linear system and screened for feasibility. The minimum feasible vertex
//! cost is the exact LP optimum, because the feasible region lies in the
//! nonnegative orthant and is therefore pointed. Deliberately shares no code
//! with the simplex path.

use super::{DietProblem, RowSense};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub enum OracleVerdict {
    Optimal { cost: f64, quantities: Vec<f64> },
    Infeasible,
}

pub fn enumerate_min_cost(problem: &DietProblem, tol: f64) -> OracleVerdict {
    let n = problem.n_items();
    let m = problem.n_rows();

    // Candidate active rows: the problem rows, then q_j = 0 planes.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + n);
    for r in 0..m {
        planes.push((problem.coeffs[r].clone(), problem.rows[r].rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }

    let feasible = |q: &[f64]| -> bool {
        for (r, row) in problem.rows.iter().enumerate() {
            let lhs: f64 = problem.coeffs[r].iter().zip(q).map(|(a, x)| a * x).sum();
            let slack = lhs - row.rhs;
            let budget = tol * (1.0 + row.rhs.abs());
            let ok = match row.sense {
                RowSense::Ge => slack >= -budget,
                RowSense::Le => slack <= budget,
                RowSense::Eq => slack.abs() <= budget,
            };
            if !ok {
                return false;
            }
        }
        q.iter().all(|&x| x >= -tol)
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (i, &p) in subset.iter().enumerate() {
            for j in 0..n {
                a[(i, j)] = planes[p].0[j];
            }
            b[i] = planes[p].1;
        }
        if let Some(q) = a.lu().solve(&b) {
            let q: Vec<f64> = q.iter().copied().collect();
            if q.iter().all(|x| x.is_finite()) && feasible(&q) {
                let cost: f64 = problem.prices.iter().zip(&q).map(|(p, x)| p * x).sum();
                if best.as_ref().map_or(true, |(c, _)| cost < *c) {
                    best = Some((cost, q));
                }
            }
        }

        // Advance to the next n-combination of plane indices.
        let total = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return match best {
                    Some((cost, quantities)) => OracleVerdict::Optimal { cost, quantities },
                    None => OracleVerdict::Infeasible,
                };
            }
            i -= 1;
            if subset[i] != i + total - n {
                subset[i] += 1;
                for k in i + 1..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}
