//! Dense two-phase simplex for diet problems.
//!
//! Problems here are small (a few dozen rows by at most ~50 menu columns), so
//! a dense tableau beats anything sparse. Rows are scaled by their bound
//! magnitude before solving to tame the unit disparity between kcal-scale and
//! microgram-scale constraints. Pricing is Dantzig's rule with a switch to
//! Bland's rule after a pivot-count threshold, which guarantees termination
//! on degenerate instances.

use super::{DietProblem, DietSolution, RowSense, SolveCertificate, SolveStatus};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Absolute feasibility tolerance on scaled constraints.
    pub feas_tol: f64,
    /// Smallest acceptable pivot element.
    pub pivot_tol: f64,
    /// Pivot count after which pricing switches to Bland's rule.
    pub bland_after: usize,
    pub max_pivots: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-8,
            pivot_tol: 1e-9,
            bland_after: 1_000,
            max_pivots: 50_000,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum ColKind {
    Item(usize),
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    n_cols: usize,
    /// Current tableau body, row-major m x n_cols.
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    col_kind: Vec<ColKind>,
    /// Original scaled equality-form matrix, kept for dual extraction.
    a0: Vec<f64>,
    b0: Vec<f64>,
    /// Reduced-cost row and current objective value.
    obj: Vec<f64>,
    obj_val: f64,
    pivots: usize,
}

enum PhaseOutcome {
    Converged,
    Unbounded,
    PivotLimit,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.n_cols + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let n = self.n_cols;
        let piv = self.a[pr * n + pc];
        let inv = 1.0 / piv;
        for c in 0..n {
            self.a[pr * n + c] *= inv;
        }
        self.rhs[pr] *= inv;
        for r in 0..self.m {
            if r == pr {
                continue;
            }
            let factor = self.a[r * n + pc];
            if factor != 0.0 {
                for c in 0..n {
                    self.a[r * n + c] -= factor * self.a[pr * n + c];
                }
                self.rhs[r] -= factor * self.rhs[pr];
            }
        }
        let factor = self.obj[pc];
        if factor != 0.0 {
            for c in 0..n {
                self.obj[c] -= factor * self.a[pr * n + c];
            }
            // Entering at level rhs[pr] moves the objective by rc * level.
            self.obj_val += factor * self.rhs[pr];
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Rebuild the reduced-cost row for the given column costs.
    fn set_objective(&mut self, costs: &[f64]) {
        let n = self.n_cols;
        self.obj.copy_from_slice(costs);
        self.obj_val = 0.0;
        for r in 0..self.m {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for c in 0..n {
                    self.obj[c] -= cb * self.a[r * n + c];
                }
                self.obj_val += cb * self.rhs[r];
            }
        }
    }

    /// Run pivots until optimal for the current objective. `allowed` masks
    /// columns permitted to enter the basis.
    fn optimize(&mut self, allowed: &[bool], opts: &SolverOptions) -> PhaseOutcome {
        loop {
            if self.pivots >= opts.max_pivots {
                return PhaseOutcome::PivotLimit;
            }
            let bland = self.pivots >= opts.bland_after;
            let mut entering: Option<usize> = None;
            let mut best_rc = -opts.feas_tol;
            for c in 0..self.n_cols {
                if !allowed[c] || self.basis.contains(&c) {
                    continue;
                }
                let rc = self.obj[c];
                if rc < best_rc {
                    entering = Some(c);
                    if bland {
                        break;
                    }
                    best_rc = rc;
                }
            }
            let Some(pc) = entering else {
                return PhaseOutcome::Converged;
            };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a_rc = self.at(r, pc);
                if a_rc > opts.pivot_tol {
                    let ratio = self.rhs[r].max(0.0) / a_rc;
                    let better = match leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio < lratio + 1e-12
                                    && (if bland {
                                        self.basis[r] < self.basis[lr]
                                    } else {
                                        r < lr
                                    }))
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((pr, _)) = leaving else {
                return PhaseOutcome::Unbounded;
            };
            self.pivot(pr, pc);
        }
    }
}

fn numerical(diagnostic: &str, pivots: usize) -> DietSolution {
    DietSolution {
        status: SolveStatus::Numerical,
        quantities: Vec::new(),
        cost: f64::NAN,
        duals: Vec::new(),
        certificate: SolveCertificate::default(),
        pivots,
        diagnostic: Some(diagnostic.to_string()),
    }
}

/// Solve a diet problem to a certified optimum or an infeasibility verdict.
pub fn solve(problem: &DietProblem, opts: &SolverOptions) -> DietSolution {
    let m = problem.n_rows();
    let n_items = problem.n_items();

    // Row scaling by bound magnitude; sign flips keep all rhs nonnegative.
    let mut scale = Vec::with_capacity(m);
    let mut flip = Vec::with_capacity(m);
    for row in &problem.rows {
        let s = 1.0 / row.rhs.abs().max(1.0);
        let f = if row.rhs * s < 0.0 { -1.0 } else { 1.0 };
        scale.push(s);
        flip.push(f);
    }

    // Columns: items, then slack/surplus, then artificials where the slack
    // cannot serve as the initial basic variable.
    let mut col_kind: Vec<ColKind> = (0..n_items).map(ColKind::Item).collect();
    let mut slack_col_of_row = vec![usize::MAX; m];
    for (r, row) in problem.rows.iter().enumerate() {
        if row.sense != RowSense::Eq {
            slack_col_of_row[r] = col_kind.len();
            col_kind.push(ColKind::Slack);
        }
    }
    let mut art_col_of_row = vec![usize::MAX; m];
    let mut basis = vec![usize::MAX; m];
    for (r, row) in problem.rows.iter().enumerate() {
        let slack_sign = match row.sense {
            RowSense::Le => flip[r],
            RowSense::Ge => -flip[r],
            RowSense::Eq => 0.0,
        };
        if slack_sign > 0.0 {
            basis[r] = slack_col_of_row[r];
        } else {
            art_col_of_row[r] = col_kind.len();
            col_kind.push(ColKind::Artificial);
            basis[r] = art_col_of_row[r];
        }
    }
    let n_cols = col_kind.len();

    let mut a0 = vec![0.0; m * n_cols];
    let mut b0 = vec![0.0; m];
    for (r, row) in problem.rows.iter().enumerate() {
        let k = scale[r] * flip[r];
        for c in 0..n_items {
            a0[r * n_cols + c] = problem.coeffs[r][c] * k;
        }
        if row.sense != RowSense::Eq {
            let sign = if row.sense == RowSense::Le { 1.0 } else { -1.0 };
            a0[r * n_cols + slack_col_of_row[r]] = sign * flip[r];
        }
        if art_col_of_row[r] != usize::MAX {
            a0[r * n_cols + art_col_of_row[r]] = 1.0;
        }
        b0[r] = row.rhs * k;
    }

    let mut t = Tableau {
        m,
        n_cols,
        a: a0.clone(),
        rhs: b0.clone(),
        basis,
        col_kind: col_kind.clone(),
        a0,
        b0,
        obj: vec![0.0; n_cols],
        obj_val: 0.0,
        pivots: 0,
    };

    // Phase 1: drive the artificial variables to zero.
    let phase1_costs: Vec<f64> = col_kind
        .iter()
        .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
        .collect();
    let has_artificials = phase1_costs.iter().any(|&c| c != 0.0);
    if has_artificials {
        t.set_objective(&phase1_costs);
        let allowed: Vec<bool> = vec![true; n_cols];
        match t.optimize(&allowed, opts) {
            PhaseOutcome::Converged => {}
            PhaseOutcome::Unbounded => {
                return numerical("phase-1 reported an unbounded direction", t.pivots)
            }
            PhaseOutcome::PivotLimit => return numerical("pivot limit in phase 1", t.pivots),
        }
        let phase1_obj = t.obj_val;
        if !phase1_obj.is_finite() {
            return numerical("phase-1 objective not finite", t.pivots);
        }
        if phase1_obj > opts.feas_tol {
            return DietSolution {
                status: SolveStatus::Infeasible,
                quantities: Vec::new(),
                cost: f64::NAN,
                duals: Vec::new(),
                certificate: SolveCertificate {
                    max_scaled_residual: 0.0,
                    duality_gap_rel: 0.0,
                    phase1_objective: phase1_obj,
                },
                pivots: t.pivots,
                diagnostic: None,
            };
        }
        // Pivot lingering zero-level artificials out of the basis.
        for r in 0..m {
            if t.col_kind[t.basis[r]] == ColKind::Artificial {
                let pc = (0..n_cols).find(|&c| {
                    t.col_kind[c] != ColKind::Artificial && t.at(r, c).abs() > opts.pivot_tol
                });
                if let Some(pc) = pc {
                    t.pivot(r, pc);
                }
                // A row with no eligible pivot is redundant; its artificial
                // stays basic at zero and is barred from re-entering.
            }
        }
    }

    // Phase 2: minimize cost over non-artificial columns.
    let phase2_costs: Vec<f64> = col_kind
        .iter()
        .enumerate()
        .map(|(c, k)| match k {
            ColKind::Item(i) => {
                let _ = c;
                problem.prices[*i]
            }
            _ => 0.0,
        })
        .collect();
    t.set_objective(&phase2_costs);
    let allowed: Vec<bool> = col_kind
        .iter()
        .map(|k| *k != ColKind::Artificial)
        .collect();
    match t.optimize(&allowed, opts) {
        PhaseOutcome::Converged => {}
        PhaseOutcome::Unbounded => {
            // Impossible with positive prices and q >= 0; surface loudly.
            return numerical("phase-2 reported an unbounded direction", t.pivots);
        }
        PhaseOutcome::PivotLimit => return numerical("pivot limit in phase 2", t.pivots),
    }

    // Extract quantities.
    let mut quantities = vec![0.0; n_items];
    for r in 0..m {
        if let ColKind::Item(i) = t.col_kind[t.basis[r]] {
            quantities[i] = t.rhs[r].max(0.0);
        }
    }
    if quantities.iter().any(|q| !q.is_finite()) {
        return numerical("non-finite quantities", t.pivots);
    }
    let cost: f64 = quantities
        .iter()
        .zip(&problem.prices)
        .map(|(q, p)| q * p)
        .sum();

    // Duals from the final basis: solve B^T y = c_B on the scaled system,
    // then undo row scaling and flips.
    let mut bmat = DMatrix::zeros(m, m);
    let mut cb = DVector::zeros(m);
    for (k, &col) in t.basis.iter().enumerate() {
        for r in 0..m {
            bmat[(r, k)] = t.a0[r * n_cols + col];
        }
        cb[k] = phase2_costs[col];
    }
    let duals_scaled = bmat.transpose().lu().solve(&cb);
    let duals: Vec<f64> = match duals_scaled {
        Some(y) => (0..m).map(|r| y[r] * scale[r] * flip[r]).collect(),
        None => return numerical("singular basis during dual extraction", t.pivots),
    };

    // Residuals on the scaled system.
    let mut max_scaled_residual = 0.0f64;
    for (r, row) in problem.rows.iter().enumerate() {
        let lhs: f64 = (0..n_items)
            .map(|c| t.a0[r * n_cols + c] * quantities[c])
            .sum();
        let viol = match row.sense {
            RowSense::Eq => (lhs - t.b0[r]).abs(),
            _ => {
                // In scaled space every inequality became `lhs ± slack = b`
                // with slack >= 0; check the original sense directly.
                let raw = problem.coeffs[r]
                    .iter()
                    .zip(&quantities)
                    .map(|(a, q)| a * q)
                    .sum::<f64>();
                match row.sense {
                    RowSense::Ge => (row.rhs - raw).max(0.0) * scale[r],
                    RowSense::Le => (raw - row.rhs).max(0.0) * scale[r],
                    RowSense::Eq => unreachable!(),
                }
            }
        };
        max_scaled_residual = max_scaled_residual.max(viol);
    }
    let dual_obj: f64 = duals
        .iter()
        .zip(&problem.rows)
        .map(|(y, row)| y * row.rhs)
        .sum();
    let duality_gap_rel = (cost - dual_obj).abs() / (1.0 + cost.abs());

    if max_scaled_residual > 10.0 * opts.feas_tol {
        return numerical(
            &format!("residual {max_scaled_residual:.3e} above tolerance after convergence"),
            t.pivots,
        );
    }

    DietSolution {
        status: SolveStatus::Optimal,
        quantities,
        cost,
        duals,
        certificate: SolveCertificate {
            max_scaled_residual,
            duality_gap_rel,
            phase1_objective: 0.0,
        },
        pivots: t.pivots,
        diagnostic: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpRow;

    fn tiny_problem(
        prices: &[f64],
        rows: Vec<(RowSense, f64, Vec<f64>)>,
        names: &[&str],
    ) -> DietProblem {
        DietProblem {
            item_ids: names.iter().map(|s| s.to_string()).collect(),
            food_indices: (0..prices.len()).collect(),
            prices: prices.to_vec(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, (sense, rhs, _))| LpRow {
                    label: format!("r{i}"),
                    sense: *sense,
                    rhs: *rhs,
                })
                .collect(),
            coeffs: rows.into_iter().map(|(_, _, c)| c).collect(),
        }
    }

    #[test]
    fn single_item_energy_equality() {
        // 4000 kcal/kg at 100/kg, energy budget 2000 -> 0.5 kg costing 50.
        let p = tiny_problem(
            &[100.0],
            vec![(RowSense::Eq, 2000.0, vec![4000.0])],
            &["only"],
        );
        let sol = solve(&p, &SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.quantities[0] - 0.5).abs() < 1e-10);
        assert!((sol.cost - 50.0).abs() < 1e-9);
    }

    #[test]
    fn two_item_binding_vertex() {
        // Expected values from enumerating the two basic feasible vertices of
        // the energy line: iron binds at q = (1/3, 1/3) costing 400/3; the
        // all-B vertex costs 300.
        let p = tiny_problem(
            &[100.0, 300.0],
            vec![
                (RowSense::Eq, 2000.0, vec![4000.0, 2000.0]),
                (RowSense::Ge, 20.0, vec![10.0, 50.0]),
            ],
            &["a", "b"],
        );
        let sol = solve(&p, &SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.quantities[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((sol.quantities[1] - 1.0 / 3.0).abs() < 1e-9);
        assert!((sol.cost - 400.0 / 3.0).abs() < 1e-8);
        assert!(sol.certificate.duality_gap_rel < 1e-8);
    }

    #[test]
    fn unreachable_iron_is_infeasible() {
        // Max iron on the energy line is 50 (all B); demanding 200 cannot work.
        let p = tiny_problem(
            &[100.0, 300.0],
            vec![
                (RowSense::Eq, 2000.0, vec![4000.0, 2000.0]),
                (RowSense::Ge, 200.0, vec![10.0, 50.0]),
            ],
            &["a", "b"],
        );
        let sol = solve(&p, &SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.certificate.phase1_objective > 1e-8);
    }

    #[test]
    fn upper_bound_binds() {
        // Cheap item capped by a toxicity row, forcing the expensive filler in.
        let p = tiny_problem(
            &[10.0, 50.0],
            vec![
                (RowSense::Eq, 2000.0, vec![4000.0, 4000.0]),
                (RowSense::Le, 30.0, vec![100.0, 0.0]),
            ],
            &["cheap", "filler"],
        );
        let sol = solve(&p, &SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.quantities[0] - 0.3).abs() < 1e-9);
        assert!((sol.quantities[1] - 0.2).abs() < 1e-9);
        assert!((sol.cost - 13.0).abs() < 1e-9);
    }

    #[test]
    fn scale_invariance_of_argmin() {
        let rows = vec![
            (RowSense::Eq, 2000.0, vec![4000.0, 2000.0]),
            (RowSense::Ge, 20.0, vec![10.0, 50.0]),
        ];
        let base = tiny_problem(&[100.0, 300.0], rows.clone(), &["a", "b"]);
        let scaled = tiny_problem(&[700.0, 2100.0], rows, &["a", "b"]);
        let s1 = solve(&base, &SolverOptions::default());
        let s2 = solve(&scaled, &SolverOptions::default());
        assert!((s2.cost - 7.0 * s1.cost).abs() < 1e-6);
        for (q1, q2) in s1.quantities.iter().zip(&s2.quantities) {
            assert!((q1 - q2).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_across_reruns() {
        let p = tiny_problem(
            &[3.0, 5.0, 2.0, 7.0],
            vec![
                (RowSense::Eq, 2000.0, vec![3000.0, 1500.0, 5000.0, 800.0]),
                (RowSense::Ge, 30.0, vec![10.0, 40.0, 5.0, 60.0]),
                (RowSense::Le, 90.0, vec![20.0, 10.0, 40.0, 5.0]),
            ],
            &["a", "b", "c", "d"],
        );
        let s1 = solve(&p, &SolverOptions::default());
        let s2 = solve(&p, &SolverOptions::default());
        assert_eq!(s1.status, s2.status);
        assert_eq!(s1.quantities, s2.quantities);
        assert_eq!(s1.cost, s2.cost);
    }
}
