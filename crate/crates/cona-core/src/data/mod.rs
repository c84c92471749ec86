//! On-disk data model: prices, food composition, nutrient catalog, requirement
//! tables, households, and the district-to-market map.
//!
//! All quantities are held in one canonical unit system: nutrient contents per
//! kilogram edible portion (composition files are accepted per 100 g and scaled
//! on load), prices in nominal currency per kilogram, requirements per person
//! per day. A missing price row means the item is unavailable in that
//! market-month and is excluded from any menu built there.

mod availability;
mod load;
mod synth;
mod write;

pub use availability::{availability_matrix, AvailabilityCell};
pub use load::{load_catalog, DataPaths};
pub use synth::{synth_generate, SynthParams};
pub use write::write_dataset;

use crate::requirements::RequirementTable;
use crate::time::YearMonth;
use std::collections::BTreeMap;
use thiserror::Error;

/// Validation failure, carrying the file, row, and rule that was broken.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file}:{row}: schema violation: {msg}")]
    Schema { file: String, row: u64, msg: String },
    #[error("{file}:{row}: referential violation: {msg}")]
    Referential { file: String, row: u64, msg: String },
    #[error("{file}:{row}: unit violation: {msg}")]
    Unit { file: String, row: u64, msg: String },
    #[error("cannot read {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid parameter: {0}")]
    Params(String),
}

/// Which sides of a dietary bound a nutrient carries.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// The single energy nutrient; enters the diet problem as an equality.
    Energy,
    LowerOnly,
    UpperOnly,
    Both,
}

use serde::{Deserialize, Serialize};

impl BoundKind {
    pub fn has_lower(self) -> bool {
        matches!(self, BoundKind::LowerOnly | BoundKind::Both)
    }

    pub fn has_upper(self) -> bool {
        matches!(self, BoundKind::UpperOnly | BoundKind::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Energy => "energy",
            BoundKind::LowerOnly => "lower_only",
            BoundKind::UpperOnly => "upper_only",
            BoundKind::Both => "both",
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct NutrientDef {
    pub nutrient_id: String,
    pub name: String,
    pub unit: String,
    pub bound_kind: BoundKind,
}

#[derive(Clone, PartialEq, Debug)]
pub struct FoodItem {
    pub item_id: String,
    pub name: String,
    pub food_group: String,
    /// Quantity of each nutrient per 1 kg edible portion, indexed like
    /// `Dataset::nutrients`.
    pub nutrient_content: Vec<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Sex {
    M,
    F,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::M => "M",
            Sex::F => "F",
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct MemberRecord {
    pub person_id: String,
    pub age_months: u32,
    pub sex: Sex,
    pub lactating: bool,
    /// Fraction of meals eaten in the household over the recall period.
    pub meals_share: f64,
}

#[derive(Clone, PartialEq, Debug)]
pub struct HouseholdRecord {
    pub household_id: String,
    pub district_id: String,
    pub survey_year: i32,
    pub survey_month: u8,
    /// Nominal currency per day.
    pub food_exp_day: f64,
    pub total_exp_day: f64,
    pub sampling_weight: f64,
    /// Optional survey cluster (enumeration area) for clustered errors.
    pub cluster_id: Option<String>,
    pub members: Vec<MemberRecord>,
}

impl HouseholdRecord {
    pub fn survey_ym(&self) -> YearMonth {
        YearMonth::new(self.survey_year, self.survey_month).expect("validated on load")
    }
}

/// Immutable, validated dataset. Safe to share across worker threads.
#[derive(Clone, PartialEq, Debug)]
pub struct Dataset {
    pub nutrients: Vec<NutrientDef>,
    /// Index into `nutrients` of the energy row.
    pub energy_idx: usize,
    /// Sorted by `item_id`; menu columns inherit this order.
    pub foods: Vec<FoodItem>,
    /// market -> month -> sorted (food index, price per kg).
    pub prices: BTreeMap<String, BTreeMap<YearMonth, Vec<(usize, f64)>>>,
    /// district -> market (total over districts in the household file).
    pub market_map: BTreeMap<String, String>,
    /// Sorted by (household_id, survey_year); one row per household wave.
    pub households: Vec<HouseholdRecord>,
    pub requirements: RequirementTable,
    /// Annual currency-to-PPP conversion factors, possibly empty.
    pub ppp_annual: BTreeMap<i32, f64>,
}

impl Dataset {
    pub fn nutrient_index(&self, nutrient_id: &str) -> Option<usize> {
        self.nutrients.iter().position(|n| n.nutrient_id == nutrient_id)
    }

    pub fn food_index(&self, item_id: &str) -> Option<usize> {
        self.foods.binary_search_by(|f| f.item_id.as_str().cmp(item_id)).ok()
    }

    pub fn market_of(&self, district_id: &str) -> Option<&str> {
        self.market_map.get(district_id).map(|s| s.as_str())
    }

    /// Menu for one market-month: items with an observed price there, in
    /// item-id order. Items without positive energy content never enter a menu.
    pub fn menu(&self, market_id: &str, ym: YearMonth) -> Vec<(usize, f64)> {
        self.prices
            .get(market_id)
            .and_then(|by_month| by_month.get(&ym))
            .map(|rows| {
                rows.iter()
                    .filter(|(food, _)| self.foods[*food].nutrient_content[self.energy_idx] > 0.0)
                    .copied()
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Span of observed prices, `None` when there are no price rows at all.
    pub fn price_span(&self) -> Option<(YearMonth, YearMonth)> {
        let mut span: Option<(YearMonth, YearMonth)> = None;
        for by_month in self.prices.values() {
            for ym in by_month.keys() {
                span = Some(match span {
                    None => (*ym, *ym),
                    Some((lo, hi)) => (lo.min(*ym), hi.max(*ym)),
                });
            }
        }
        span
    }

    /// Household waves grouped by id: (household_id, rows sorted by survey year).
    pub fn household_waves(&self) -> Vec<(&str, Vec<&HouseholdRecord>)> {
        let mut out: Vec<(&str, Vec<&HouseholdRecord>)> = Vec::new();
        for hh in &self.households {
            match out.last_mut() {
                Some((id, rows)) if *id == hh.household_id => rows.push(hh),
                _ => out.push((hh.household_id.as_str(), vec![hh])),
            }
        }
        out
    }
}

/// The nutrient catalog used throughout the paper-scale fixtures: energy plus
/// 21 constrained nutrients, of which 12 carry both bounds, 7 only a lower
/// bound, and 2 (retinol, sodium) only an upper bound.
pub fn default_nutrient_catalog() -> Vec<NutrientDef> {
    fn def(id: &str, name: &str, unit: &str, kind: BoundKind) -> NutrientDef {
        NutrientDef {
            nutrient_id: id.to_string(),
            name: name.to_string(),
            unit: unit.to_string(),
            bound_kind: kind,
        }
    }
    vec![
        def("energy", "Energy", "kcal", BoundKind::Energy),
        def("carb", "Carbohydrate", "g", BoundKind::LowerOnly),
        def("protein", "Protein", "g", BoundKind::Both),
        def("lipid", "Lipids", "g", BoundKind::LowerOnly),
        def("vit_a", "Vitamin A", "ug_rae", BoundKind::Both),
        def("retinol", "Retinol", "ug", BoundKind::UpperOnly),
        def("vit_c", "Vitamin C", "mg", BoundKind::Both),
        def("vit_e", "Vitamin E", "mg", BoundKind::Both),
        def("thiamin", "Thiamin", "mg", BoundKind::LowerOnly),
        def("riboflavin", "Riboflavin", "mg", BoundKind::LowerOnly),
        def("niacin", "Niacin", "mg", BoundKind::Both),
        def("vit_b6", "Vitamin B6", "mg", BoundKind::Both),
        def("folate", "Folate", "ug_dfe", BoundKind::Both),
        def("vit_b12", "Vitamin B12", "ug", BoundKind::LowerOnly),
        def("calcium", "Calcium", "mg", BoundKind::Both),
        def("copper", "Copper", "mg", BoundKind::Both),
        def("iron", "Iron", "mg", BoundKind::Both),
        def("magnesium", "Magnesium", "mg", BoundKind::LowerOnly),
        def("phosphorus", "Phosphorus", "mg", BoundKind::LowerOnly),
        def("selenium", "Selenium", "ug", BoundKind::Both),
        def("zinc", "Zinc", "mg", BoundKind::Both),
        def("sodium", "Sodium", "mg", BoundKind::UpperOnly),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_partition() {
        let cat = default_nutrient_catalog();
        assert_eq!(cat.len(), 22);
        let energy = cat.iter().filter(|n| n.bound_kind == BoundKind::Energy).count();
        let both = cat.iter().filter(|n| n.bound_kind == BoundKind::Both).count();
        let lower = cat.iter().filter(|n| n.bound_kind == BoundKind::LowerOnly).count();
        let upper: Vec<_> = cat
            .iter()
            .filter(|n| n.bound_kind == BoundKind::UpperOnly)
            .map(|n| n.nutrient_id.as_str())
            .collect();
        assert_eq!(energy, 1);
        assert_eq!(both, 12);
        assert_eq!(lower, 7);
        assert_eq!(upper, ["retinol", "sodium"]);
    }
}
