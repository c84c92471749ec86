//! The least-cost diet linear program: formulation, a dense two-phase simplex
//! solver, and an independent certificate check of claimed optima.

pub mod simplex;
pub mod verify;

#[cfg(feature = "oracle")]
pub mod oracle;

use crate::data::FoodItem;
use crate::requirements::{HouseholdRequirement, RequirementRow};
use serde::{Deserialize, Serialize};

/// Constraint sense of one diet-problem row.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum RowSense {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    /// Nutrient id the row enforces; diagnostic only.
    pub label: String,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Nutrient bounds plus the energy budget of one diet problem, indexed like
/// the nutrient catalog.
#[derive(Clone, Debug)]
pub struct DietBounds {
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    pub energy: f64,
}

impl DietBounds {
    pub fn from_row(row: &RequirementRow) -> Self {
        DietBounds {
            lower: row.min_need.clone(),
            upper: row.max_tolerance.clone(),
            energy: row.energy_kcal,
        }
    }

    pub fn from_shared(req: &HouseholdRequirement) -> Self {
        DietBounds {
            lower: req.lower.clone(),
            upper: req.upper.clone(),
            energy: req.energy_total,
        }
    }
}

/// A fully formed diet LP: minimize price·quantity over the menu subject to
/// one row per nutrient bound and an energy equality.
#[derive(Clone, Debug)]
pub struct DietProblem {
    /// Menu item ids, in deterministic (item id) order; one LP column each.
    pub item_ids: Vec<String>,
    /// Dataset food indices matching `item_ids`.
    pub food_indices: Vec<usize>,
    /// Currency per kg, the objective coefficients.
    pub prices: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Row-major constraint coefficients, `rows.len() x item_ids.len()`.
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    /// No priced item in the market-month: infeasible by vacancy, distinct
    /// from LP infeasibility.
    #[error("empty menu: no priced items in this market-month")]
    EmptyMenu,
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// Assemble the LP for one requirement set over one market-month menu.
///
/// `menu` holds (food index, price per kg) pairs as produced by
/// `Dataset::menu`; rows are emitted for every bound present in `bounds`,
/// lower bounds first, then upper bounds, then the energy equality.
pub fn build_problem(
    bounds: &DietBounds,
    menu: &[(usize, f64)],
    foods: &[FoodItem],
    energy_idx: usize,
) -> Result<DietProblem, BuildError> {
    if menu.is_empty() {
        return Err(BuildError::EmptyMenu);
    }
    if !(bounds.energy > 0.0) {
        return Err(BuildError::Invalid(format!(
            "energy budget must be positive, got {}",
            bounds.energy
        )));
    }
    let n_nutrients = foods[menu[0].0].nutrient_content.len();
    if bounds.lower.len() != n_nutrients || bounds.upper.len() != n_nutrients {
        return Err(BuildError::Invalid(
            "bound vectors do not match the nutrient catalog".to_string(),
        ));
    }

    let mut item_ids = Vec::with_capacity(menu.len());
    let mut food_indices = Vec::with_capacity(menu.len());
    let mut prices = Vec::with_capacity(menu.len());
    for &(food, price) in menu {
        if !(price > 0.0) {
            return Err(BuildError::Invalid(format!(
                "nonpositive price for {}",
                foods[food].item_id
            )));
        }
        item_ids.push(foods[food].item_id.clone());
        food_indices.push(food);
        prices.push(price);
    }

    let mut rows = Vec::new();
    let mut coeffs = Vec::new();
    let mut push_row = |label: &str, sense: RowSense, rhs: f64, j: usize| {
        rows.push(LpRow {
            label: label.to_string(),
            sense,
            rhs,
        });
        coeffs.push(
            food_indices
                .iter()
                .map(|&f| foods[f].nutrient_content[j])
                .collect::<Vec<f64>>(),
        );
    };

    for (j, lo) in bounds.lower.iter().enumerate() {
        if let Some(lo) = lo {
            push_row(&format!("min_{j}"), RowSense::Ge, *lo, j);
        }
    }
    for (j, up) in bounds.upper.iter().enumerate() {
        if let Some(up) = up {
            if let Some(lo) = bounds.lower[j] {
                if lo > *up {
                    return Err(BuildError::Invalid(format!(
                        "lower bound {lo} exceeds upper bound {up} for nutrient {j}"
                    )));
                }
            }
            push_row(&format!("max_{j}"), RowSense::Le, *up, j);
        }
    }
    push_row("energy", RowSense::Eq, bounds.energy, energy_idx);

    Ok(DietProblem {
        item_ids,
        food_indices,
        prices,
        rows,
        coeffs,
    })
}

/// Outcome bucket of a single LP solve.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Condition blow-up or pivot-limit exhaustion; never coerced to
    /// infeasible.
    Numerical,
}

/// Residual summary attached to every solve.
#[derive(Clone, Debug, Default)]
pub struct SolveCertificate {
    /// Max absolute violation over scaled constraints at the returned point.
    pub max_scaled_residual: f64,
    /// |primal - dual objective| / (1 + |primal|).
    pub duality_gap_rel: f64,
    /// Phase-1 optimum; positive values certify infeasibility.
    pub phase1_objective: f64,
}

#[derive(Clone, Debug)]
pub struct DietSolution {
    pub status: SolveStatus,
    /// kg/day per menu item; empty unless optimal.
    pub quantities: Vec<f64>,
    /// Currency/day; meaningful only when optimal.
    pub cost: f64,
    /// Shadow price per problem row (original row scale and sense).
    pub duals: Vec<f64>,
    pub certificate: SolveCertificate,
    pub pivots: usize,
    pub diagnostic: Option<String>,
}

impl DietProblem {
    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Plain-text dump in an LP-format-like syntax for cross-checking with
    /// external solvers.
    pub fn dump_lp(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        out.push_str("min:");
        for (id, p) in self.item_ids.iter().zip(&self.prices) {
            let _ = write!(out, " + {p} {id}");
        }
        out.push_str(";\n");
        for (row, cs) in self.rows.iter().zip(&self.coeffs) {
            let _ = write!(out, "{}:", row.label);
            for (id, c) in self.item_ids.iter().zip(cs) {
                if *c != 0.0 {
                    let _ = write!(out, " + {c} {id}");
                }
            }
            let op = match row.sense {
                RowSense::Ge => ">=",
                RowSense::Le => "<=",
                RowSense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {};", row.rhs);
        }
        for id in &self.item_ids {
            let _ = writeln!(out, "{id} >= 0;");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{default_nutrient_catalog, FoodItem};

    fn food(id: &str, contents: &[(usize, f64)], n: usize) -> FoodItem {
        let mut nutrient_content = vec![0.0; n];
        for &(j, v) in contents {
            nutrient_content[j] = v;
        }
        FoodItem {
            item_id: id.to_string(),
            name: id.to_string(),
            food_group: "g".to_string(),
            nutrient_content,
        }
    }

    #[test]
    fn malawi_catalog_row_count() {
        let cat = default_nutrient_catalog();
        let energy_idx = 0;
        let n = cat.len();
        let foods: Vec<FoodItem> = (0..5)
            .map(|i| {
                let contents: Vec<(usize, f64)> = (0..n).map(|j| (j, 1.0 + j as f64)).collect();
                food(&format!("i{i}"), &contents, n)
            })
            .collect();
        let menu: Vec<(usize, f64)> = (0..5).map(|i| (i, 100.0)).collect();

        let mut lower = vec![None; n];
        let mut upper = vec![None; n];
        for (j, def) in cat.iter().enumerate() {
            if def.bound_kind.has_lower() {
                lower[j] = Some(10.0);
            }
            if def.bound_kind.has_upper() {
                upper[j] = Some(100.0);
            }
        }
        let bounds = DietBounds {
            lower,
            upper,
            energy: 2000.0,
        };
        let p = build_problem(&bounds, &menu, &foods, energy_idx).unwrap();
        // 19 lower bounds, 14 upper bounds (12 dual-bounded + retinol + sodium),
        // one energy equality.
        assert_eq!(p.n_rows(), 19 + 14 + 1);
        assert_eq!(p.n_items(), 5);
        let ge = p.rows.iter().filter(|r| r.sense == RowSense::Ge).count();
        let le = p.rows.iter().filter(|r| r.sense == RowSense::Le).count();
        let eq = p.rows.iter().filter(|r| r.sense == RowSense::Eq).count();
        assert_eq!((ge, le, eq), (19, 14, 1));
    }

    #[test]
    fn empty_menu_is_vacancy() {
        let cat = default_nutrient_catalog();
        let foods = vec![food("a", &[(0, 1000.0)], cat.len())];
        let bounds = DietBounds {
            lower: vec![None; cat.len()],
            upper: vec![None; cat.len()],
            energy: 2000.0,
        };
        assert!(matches!(
            build_problem(&bounds, &[], &foods, 0),
            Err(BuildError::EmptyMenu)
        ));
    }

    #[test]
    fn lp_dump_mentions_all_items() {
        let n = 2;
        let foods = vec![food("a", &[(0, 1000.0)], n), food("b", &[(0, 2000.0)], n)];
        let bounds = DietBounds {
            lower: vec![None, Some(5.0)],
            upper: vec![None, None],
            energy: 2000.0,
        };
        let p = build_problem(&bounds, &[(0, 10.0), (1, 20.0)], &foods, 0).unwrap();
        let dump = p.dump_lp();
        assert!(dump.contains("min:"));
        assert!(dump.contains("a >= 0;"));
        assert!(dump.contains("b >= 0;"));
    }
}
