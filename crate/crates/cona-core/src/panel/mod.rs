//! The CoNA panel: one least-cost diet cell per household, month, and
//! scenario, with PPP conversion via Denton-smoothed factors.
//!
//! The individualized scenario solves one LP per member and sums the costs;
//! it is optimal only when every member is. The shared scenario solves a
//! single LP under the pooled household bounds, plus individual LPs for
//! children aged 6-47 months, whose requirements are added identically in
//! both scenarios so the scenario difference isolates the sharing assumption
//! for the 4+ pool.

pub mod denton;

use crate::data::{Dataset, HouseholdRecord};
use crate::lp::simplex::{solve, SolverOptions};
use crate::lp::verify::verify;
use crate::lp::{build_problem, BuildError, DietBounds, SolveStatus};
use crate::requirements::{plan_household, HouseholdPlan, RequirementError};
use crate::time::YearMonth;
use denton::{denton_monthly_factors, DentonError, PppFactorSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Certificate tolerance for accepting a solve; failures trigger one re-solve
/// with tightened feasibility tolerance before the cell is marked numerical.
const CERT_TOL: f64 = 1e-7;

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Individualized,
    Shared,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Individualized => "individualized",
            Scenario::Shared => "shared",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Optimal,
    Infeasible,
    /// No priced item at all in the market-month.
    InfeasibleByVacancy,
    /// Shared lower bound exceeds the shared upper bound for some nutrient;
    /// no LP was run.
    StructuralInfeasible,
    /// Solver reported a numerical failure that one tightened re-solve did
    /// not cure. Never silently folded into `Infeasible`.
    Numerical,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Optimal => "optimal",
            CellStatus::Infeasible => "infeasible",
            CellStatus::InfeasibleByVacancy => "infeasible_by_vacancy",
            CellStatus::StructuralInfeasible => "structural_infeasible",
            CellStatus::Numerical => "numerical",
        }
    }

    pub fn is_optimal(self) -> bool {
        self == CellStatus::Optimal
    }
}

/// One household x market x month x scenario result.
#[derive(Clone, Debug)]
pub struct ConaCell {
    pub household_id: String,
    pub market_id: String,
    pub ym: YearMonth,
    pub scenario: Scenario,
    pub status: CellStatus,
    /// Currency per day; present iff optimal.
    pub cost_nominal: Option<f64>,
    /// 2011 US$ PPP per day.
    pub cost_ppp: Option<f64>,
    /// cost_ppp / members with a positive meals share.
    pub per_capita: Option<f64>,
    /// cost_ppp x 1000 / household energy (pool + add-ons).
    pub per_1000kcal: Option<f64>,
    /// Members whose individual LP failed; the shared pool is recorded as
    /// "(pool)".
    pub infeasible_members: Vec<String>,
    /// Shared-scenario cell for a household whose members are all under four:
    /// the cell is the sum of add-on solves only.
    pub addon_only: bool,
    /// Members with meals_share > 0 in the wave that produced this cell.
    pub eating_members: usize,
    /// Pool + add-on energy total (kcal/day) of that wave.
    pub energy_kcal: f64,
    /// Solver diagnostics for `Numerical` cells.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("household {household_id}: {source}")]
    Requirement {
        household_id: String,
        #[source]
        source: RequirementError,
    },
    #[error(transparent)]
    Denton(#[from] DentonError),
    #[error("no PPP factor covers {0}")]
    MissingFactor(YearMonth),
}

/// Which direction the PPP factors convert.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PppOrientation {
    /// Factors are currency per PPP dollar: divide nominal costs.
    CurrencyPerPpp,
    /// Factors are PPP dollars per currency unit: multiply nominal costs.
    PppPerCurrency,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioChoice {
    Both,
    Individualized,
    Shared,
}

impl ScenarioChoice {
    pub fn scenarios(self) -> &'static [Scenario] {
        match self {
            ScenarioChoice::Both => &[Scenario::Individualized, Scenario::Shared],
            ScenarioChoice::Individualized => &[Scenario::Individualized],
            ScenarioChoice::Shared => &[Scenario::Shared],
        }
    }
}

#[derive(Clone, Debug)]
pub struct PanelConfig {
    pub start: YearMonth,
    pub end: YearMonth,
    /// Wave-2 compositions drive cells from this month onward.
    pub switch_date: YearMonth,
    pub scenario: ScenarioChoice,
    pub solver: SolverOptions,
    pub ppp_orientation: PppOrientation,
}

impl Default for PanelConfig {
    fn default() -> Self {
        PanelConfig {
            start: YearMonth { year: 2013, month: 1 },
            end: YearMonth { year: 2017, month: 7 },
            switch_date: YearMonth { year: 2016, month: 1 },
            scenario: ScenarioChoice::Both,
            solver: SolverOptions::default(),
            ppp_orientation: PppOrientation::CurrencyPerPpp,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Panel {
    /// Ordered by household id, then scenario, then month.
    pub cells: Vec<ConaCell>,
    pub factors: PppFactorSeries,
}

enum MemberOutcome {
    Cost(f64),
    Infeasible,
    Numerical(String),
}

/// Solve with certification; a failed certificate triggers one tightened
/// re-solve.
fn solve_member(
    bounds: &DietBounds,
    menu: &[(usize, f64)],
    ds: &Dataset,
    solver: &SolverOptions,
) -> MemberOutcome {
    let problem = match build_problem(bounds, menu, &ds.foods, ds.energy_idx) {
        Ok(p) => p,
        Err(BuildError::EmptyMenu) => unreachable!("vacancy handled before member solves"),
        Err(BuildError::Invalid(msg)) => return MemberOutcome::Numerical(msg),
    };
    let sol = solve(&problem, solver);
    match sol.status {
        SolveStatus::Infeasible => MemberOutcome::Infeasible,
        SolveStatus::Numerical => {
            MemberOutcome::Numerical(sol.diagnostic.unwrap_or_else(|| "numerical".into()))
        }
        SolveStatus::Optimal => {
            if verify(&problem, &sol, CERT_TOL).pass {
                return MemberOutcome::Cost(sol.cost);
            }
            let tighter = SolverOptions {
                feas_tol: solver.feas_tol / 100.0,
                ..*solver
            };
            let again = solve(&problem, &tighter);
            if again.status == SolveStatus::Optimal && verify(&problem, &again, CERT_TOL).pass {
                MemberOutcome::Cost(again.cost)
            } else {
                MemberOutcome::Numerical("certificate failed after tightened re-solve".into())
            }
        }
    }
}

struct CellBody {
    status: CellStatus,
    cost_nominal: Option<f64>,
    infeasible_members: Vec<String>,
    addon_only: bool,
}

fn combine(outcomes: Vec<(String, MemberOutcome)>, addon_only: bool) -> CellBody {
    let mut cost = 0.0;
    let mut infeasible_members = Vec::new();
    let mut numerical = false;
    for (id, outcome) in outcomes {
        match outcome {
            MemberOutcome::Cost(c) => cost += c,
            MemberOutcome::Infeasible => infeasible_members.push(id),
            MemberOutcome::Numerical(_) => numerical = true,
        }
    }
    let status = if numerical {
        CellStatus::Numerical
    } else if !infeasible_members.is_empty() {
        CellStatus::Infeasible
    } else {
        CellStatus::Optimal
    };
    CellBody {
        status,
        cost_nominal: status.is_optimal().then_some(cost),
        infeasible_members,
        addon_only,
    }
}

/// One individualized cell: every member's own LP, costs summed.
fn individualized_body(
    plan: &HouseholdPlan,
    menu: &[(usize, f64)],
    ds: &Dataset,
    solver: &SolverOptions,
) -> CellBody {
    let outcomes = plan
        .pool_rows
        .iter()
        .chain(plan.addon_children.iter())
        .map(|(id, row)| {
            (
                id.clone(),
                solve_member(&DietBounds::from_row(row), menu, ds, solver),
            )
        })
        .collect();
    combine(outcomes, false)
}

/// One shared cell: the pooled LP plus add-on child LPs.
fn shared_body(
    plan: &HouseholdPlan,
    menu: &[(usize, f64)],
    ds: &Dataset,
    solver: &SolverOptions,
) -> CellBody {
    let mut outcomes = Vec::with_capacity(1 + plan.addon_children.len());
    match &plan.shared {
        Some(req) => {
            if !req.structural_infeasible.is_empty() {
                return CellBody {
                    status: CellStatus::StructuralInfeasible,
                    cost_nominal: None,
                    infeasible_members: vec!["(pool)".to_string()],
                    addon_only: false,
                };
            }
            outcomes.push((
                "(pool)".to_string(),
                solve_member(&DietBounds::from_shared(req), menu, ds, solver),
            ));
        }
        None => {}
    }
    for (id, row) in &plan.addon_children {
        outcomes.push((
            id.clone(),
            solve_member(&DietBounds::from_row(row), menu, ds, solver),
        ));
    }
    combine(outcomes, plan.shared.is_none())
}

/// Attach PPP and normalized costs to an optimal cell.
pub fn to_ppp(
    cell: &mut ConaCell,
    factors: &PppFactorSeries,
    orientation: PppOrientation,
) -> Result<(), PanelError> {
    let Some(nominal) = cell.cost_nominal else {
        return Ok(()); // non-optimal cells carry no costs, and no error
    };
    let factor = factors.get(cell.ym).ok_or(PanelError::MissingFactor(cell.ym))?;
    let ppp = match orientation {
        PppOrientation::CurrencyPerPpp => nominal / factor,
        PppOrientation::PppPerCurrency => nominal * factor,
    };
    cell.cost_ppp = Some(ppp);
    cell.per_capita = (cell.eating_members > 0).then(|| ppp / cell.eating_members as f64);
    cell.per_1000kcal = (cell.energy_kcal > 0.0).then(|| ppp * 1000.0 / cell.energy_kcal);
    Ok(())
}

/// Solve one cell from a prepared wave plan.
fn solve_cell(
    hh: &HouseholdRecord,
    plan: &HouseholdPlan,
    market_id: &str,
    ym: YearMonth,
    scenario: Scenario,
    ds: &Dataset,
    solver: &SolverOptions,
) -> ConaCell {
    let menu = ds.menu(market_id, ym);
    let body = if menu.is_empty() {
        CellBody {
            status: CellStatus::InfeasibleByVacancy,
            cost_nominal: None,
            infeasible_members: Vec::new(),
            addon_only: false,
        }
    } else {
        match scenario {
            Scenario::Individualized => individualized_body(plan, &menu, ds, solver),
            Scenario::Shared => shared_body(plan, &menu, ds, solver),
        }
    };
    ConaCell {
        household_id: hh.household_id.clone(),
        market_id: market_id.to_string(),
        ym,
        scenario,
        status: body.status,
        cost_nominal: body.cost_nominal,
        cost_ppp: None,
        per_capita: None,
        per_1000kcal: None,
        infeasible_members: body.infeasible_members,
        addon_only: body.addon_only,
        eating_members: plan.eating_members,
        energy_kcal: plan.energy_total,
    }
}

/// Build the full panel: per household and scenario, one cell per month of
/// the horizon. Compositions switch from the wave-1 to the wave-2 record at
/// `switch_date` when both are present. Deterministic and independent of
/// worker count.
pub fn cona_panel(ds: &Dataset, cfg: &PanelConfig) -> Result<Panel, PanelError> {
    let months: Vec<YearMonth> = YearMonth::range(cfg.start, cfg.end).collect();
    let factors = if ds.ppp_annual.is_empty() {
        PppFactorSeries::unit(cfg.start, cfg.end)
    } else {
        denton_monthly_factors(&ds.ppp_annual)?
    };
    for ym in &months {
        factors.get(*ym).ok_or(PanelError::MissingFactor(*ym))?;
    }

    struct Entity<'a> {
        waves: Vec<(&'a HouseholdRecord, HouseholdPlan)>,
    }
    let mut entities = Vec::new();
    for (_, rows) in ds.household_waves() {
        let mut waves = Vec::with_capacity(rows.len());
        for hh in rows {
            let plan = plan_household(hh, &ds.requirements, &ds.nutrients).map_err(|source| {
                PanelError::Requirement {
                    household_id: hh.household_id.clone(),
                    source,
                }
            })?;
            waves.push((hh, plan));
        }
        entities.push(Entity { waves });
    }

    let scenarios = cfg.scenario.scenarios();
    let per_entity: Vec<Vec<ConaCell>> = entities
        .par_iter()
        .map(|ent| {
            let mut cells =
                Vec::with_capacity(scenarios.len() * months.len());
            for &scenario in scenarios {
                for &ym in &months {
                    let (hh, plan) = if ent.waves.len() > 1 && ym >= cfg.switch_date {
                        let last = ent.waves.len() - 1;
                        (&ent.waves[last].0, &ent.waves[last].1)
                    } else {
                        (&ent.waves[0].0, &ent.waves[0].1)
                    };
                    let market = ds
                        .market_of(&hh.district_id)
                        .expect("district validated on load");
                    let mut cell = solve_cell(hh, plan, market, ym, scenario, ds, &cfg.solver);
                    to_ppp(&mut cell, &factors, cfg.ppp_orientation)
                        .expect("coverage checked above");
                    cells.push(cell);
                }
            }
            cells
        })
        .collect();

    Ok(Panel {
        cells: per_entity.into_iter().flatten().collect(),
        factors,
    })
}
