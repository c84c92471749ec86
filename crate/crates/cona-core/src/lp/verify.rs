//! Independent certification of claimed LP optima.
//!
//! Everything here is recomputed from the raw problem data with plain dot
//! products: no tableau, no factorization, no state shared with the solver.

use super::{DietProblem, DietSolution, RowSense, SolveStatus};

#[derive(Clone, Debug)]
pub struct CertificateReport {
    /// Signed slack per row (lhs - rhs), absolute units.
    pub row_slacks: Vec<f64>,
    /// Max sense-violating primal residual, normalized by 1 + |rhs|.
    pub max_primal_violation: f64,
    /// Max violation of reduced-cost nonnegativity and dual sign conditions.
    pub max_dual_violation: f64,
    /// Max complementary-slackness product, normalized.
    pub max_slackness_violation: f64,
    /// |primal cost - dual objective| / (1 + |primal cost|).
    pub duality_gap_rel: f64,
    /// |reported cost - price . quantity| / (1 + |reported cost|).
    pub cost_mismatch_rel: f64,
    pub pass: bool,
}

/// Check an optimal solution against its problem. `tol` bounds every
/// normalized violation for the certificate to pass.
pub fn verify(problem: &DietProblem, solution: &DietSolution, tol: f64) -> CertificateReport {
    assert_eq!(
        solution.status,
        SolveStatus::Optimal,
        "verify expects an optimal solution"
    );
    let m = problem.n_rows();
    let n = problem.n_items();
    let q = &solution.quantities;
    let y = &solution.duals;

    let mut row_slacks = Vec::with_capacity(m);
    let mut max_primal = 0.0f64;
    for (r, row) in problem.rows.iter().enumerate() {
        let lhs: f64 = problem.coeffs[r].iter().zip(q).map(|(a, x)| a * x).sum();
        let slack = lhs - row.rhs;
        row_slacks.push(slack);
        let viol = match row.sense {
            RowSense::Ge => (-slack).max(0.0),
            RowSense::Le => slack.max(0.0),
            RowSense::Eq => slack.abs(),
        };
        max_primal = max_primal.max(viol / (1.0 + row.rhs.abs()));
    }
    for &x in q {
        max_primal = max_primal.max(-x);
    }

    // Reduced costs and dual sign conditions.
    let mut max_dual = 0.0f64;
    let mut reduced = Vec::with_capacity(n);
    for j in 0..n {
        let a_dot_y: f64 = (0..m).map(|r| problem.coeffs[r][j] * y[r]).sum();
        let rc = problem.prices[j] - a_dot_y;
        reduced.push(rc);
        max_dual = max_dual.max(-rc / (1.0 + problem.prices[j].abs()));
    }
    for (r, row) in problem.rows.iter().enumerate() {
        let sign_viol = match row.sense {
            RowSense::Ge => (-y[r]).max(0.0),
            RowSense::Le => y[r].max(0.0),
            RowSense::Eq => 0.0,
        };
        max_dual = max_dual.max(sign_viol / (1.0 + y[r].abs()));
    }

    // Complementary slackness.
    let mut max_cs = 0.0f64;
    for (r, row) in problem.rows.iter().enumerate() {
        if row.sense == RowSense::Eq {
            continue;
        }
        let prod = (y[r] * row_slacks[r]).abs();
        max_cs = max_cs.max(prod / ((1.0 + y[r].abs()) * (1.0 + row.rhs.abs())));
    }
    for j in 0..n {
        let prod = (q[j] * reduced[j]).abs();
        max_cs = max_cs.max(prod / ((1.0 + q[j].abs()) * (1.0 + problem.prices[j].abs())));
    }

    let primal_cost: f64 = problem.prices.iter().zip(q).map(|(p, x)| p * x).sum();
    let dual_obj: f64 = problem.rows.iter().zip(y).map(|(row, yy)| row.rhs * yy).sum();
    let duality_gap_rel = (primal_cost - dual_obj).abs() / (1.0 + primal_cost.abs());
    let cost_mismatch_rel = (solution.cost - primal_cost).abs() / (1.0 + solution.cost.abs());

    let pass = max_primal <= tol
        && max_dual <= tol
        && max_cs <= tol
        && duality_gap_rel <= tol
        && cost_mismatch_rel <= tol;

    CertificateReport {
        row_slacks,
        max_primal_violation: max_primal,
        max_dual_violation: max_dual,
        max_slackness_violation: max_cs,
        duality_gap_rel,
        cost_mismatch_rel,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::simplex::{solve, SolverOptions};
    use crate::lp::LpRow;

    fn two_item_problem() -> DietProblem {
        DietProblem {
            item_ids: vec!["a".to_string(), "b".to_string()],
            food_indices: vec![0, 1],
            prices: vec![100.0, 300.0],
            rows: vec![
                LpRow {
                    label: "energy".to_string(),
                    sense: RowSense::Eq,
                    rhs: 2000.0,
                },
                LpRow {
                    label: "iron".to_string(),
                    sense: RowSense::Ge,
                    rhs: 20.0,
                },
            ],
            coeffs: vec![vec![4000.0, 2000.0], vec![10.0, 50.0]],
        }
    }

    #[test]
    fn certified_vertex_passes() {
        let p = two_item_problem();
        let sol = solve(&p, &SolverOptions::default());
        let report = verify(&p, &sol, 1e-9);
        assert!(report.pass, "{report:?}");
        assert!(report.max_primal_violation < 1e-9);
        assert!(report.max_dual_violation < 1e-9);
        assert!(report.max_slackness_violation < 1e-9);
        assert!(report.duality_gap_rel < 1e-9);
    }

    #[test]
    fn perturbed_quantity_is_detected() {
        let p = two_item_problem();
        let mut sol = solve(&p, &SolverOptions::default());
        sol.quantities[0] += 1e-3;
        let report = verify(&p, &sol, 1e-9);
        assert!(!report.pass);
        // Energy-equality residual equals the energy density times the bump.
        assert!((report.row_slacks[0] - 4000.0 * 1e-3).abs() < 1e-6);
    }

    #[test]
    fn strong_duality_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(2..=5);
            let energy: Vec<f64> = (0..n).map(|_| rng.gen_range(500.0..6000.0)).collect();
            let nutrient: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..80.0)).collect();
            let prices: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..500.0)).collect();
            let p = DietProblem {
                item_ids: (0..n).map(|i| format!("i{i}")).collect(),
                food_indices: (0..n).collect(),
                prices,
                rows: vec![
                    LpRow {
                        label: "energy".to_string(),
                        sense: RowSense::Eq,
                        rhs: 2000.0,
                    },
                    LpRow {
                        label: "nut".to_string(),
                        sense: RowSense::Ge,
                        rhs: rng.gen_range(0.0..30.0),
                    },
                ],
                coeffs: vec![energy, nutrient],
            };
            let sol = solve(&p, &SolverOptions::default());
            if sol.status == SolveStatus::Optimal {
                let report = verify(&p, &sol, 1e-8);
                assert!(report.duality_gap_rel < 1e-8, "{report:?}");
                assert!(report.pass, "{report:?}");
            }
        }
    }
}
