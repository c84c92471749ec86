//! Individual requirement classification and shared household requirements.
//!
//! Individuals are classified into age-sex-maternity requirement groups; the
//! shared household requirement takes, per nutrient, the most restrictive
//! nutrient density over the pool of members four years and older, scaled to
//! the pool's total energy. Children from six months through three years keep
//! their individual requirements as add-on rows; infants under six months and
//! zero-meal members are excluded.

use crate::data::{HouseholdRecord, MemberRecord, NutrientDef, Sex};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RequirementError {
    #[error("member aged {age_months} months is below the 6-month classification floor")]
    BelowFloor { age_months: u32 },
    #[error("no requirement group matches sex {sex:?}, age {age_months} months, lactating {lactating}")]
    NoMatchingGroup {
        sex: Sex,
        age_months: u32,
        lactating: bool,
    },
    #[error("requirement table has no row for group {0}")]
    MissingGroupRow(String),
    #[error("meals share {0} outside [0, 1]")]
    InvalidShare(f64),
    #[error("shared requirements undefined for an empty pool")]
    EmptyPool,
}

/// One row of the requirement table: daily energy and per-nutrient bounds for
/// a demographic group, indexed like the nutrient catalog.
#[derive(Clone, PartialEq, Debug)]
pub struct RequirementRow {
    pub group_id: String,
    pub energy_kcal: f64,
    pub min_need: Vec<Option<f64>>,
    pub max_tolerance: Vec<Option<f64>>,
}

impl RequirementRow {
    /// Scale energy and every bound by a meals share in [0, 1].
    pub fn scaled(&self, meals_share: f64) -> Result<RequirementRow, RequirementError> {
        if !(0.0..=1.0).contains(&meals_share) || !meals_share.is_finite() {
            return Err(RequirementError::InvalidShare(meals_share));
        }
        let scale = |v: &Vec<Option<f64>>| v.iter().map(|b| b.map(|x| x * meals_share)).collect();
        Ok(RequirementRow {
            group_id: self.group_id.clone(),
            energy_kcal: self.energy_kcal * meals_share,
            min_need: scale(&self.min_need),
            max_tolerance: scale(&self.max_tolerance),
        })
    }
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct RequirementTable {
    rows: Vec<RequirementRow>,
    index: BTreeMap<String, usize>,
}

impl RequirementTable {
    pub fn new(rows: Vec<RequirementRow>) -> Self {
        let index = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.group_id.clone(), i))
            .collect();
        RequirementTable { rows, index }
    }

    pub fn get(&self, group_id: &str) -> Option<&RequirementRow> {
        self.index.get(group_id).map(|&i| &self.rows[i])
    }

    pub fn rows(&self) -> &[RequirementRow] {
        &self.rows
    }
}

/// A requirement group in the Dietary Reference Intakes scheme, with
/// 3-year-olds split out of the 1-3 y band. Ages are month ranges,
/// lower inclusive, upper exclusive.
pub struct GroupDef {
    pub group_id: &'static str,
    pub label: &'static str,
    /// `None` matches either sex.
    pub sex: Option<Sex>,
    pub age_lo: u32,
    pub age_hi: u32,
    pub lactating: bool,
    /// Rural population share in percent; used by the synthetic generator.
    pub population_share: f64,
}

pub const CLASSIFICATION_FLOOR_MONTHS: u32 = 6;
/// First month of the shared pool ("four years and above").
pub const SHARED_POOL_FLOOR_MONTHS: u32 = 48;

const NO_AGE_CAP: u32 = u32::MAX;

pub static GROUPS: &[GroupDef] = &[
    g("infant_6_11m", "Infant (all) 6 months-1 y", None, 6, 12, false, 1.35),
    g("child_1_2y", "Child (all) 1-2 y", None, 12, 36, false, 5.45),
    g("child_m_3y", "Child (M) 3 y", Some(Sex::M), 36, 48, false, 1.57),
    g("child_f_3y", "Child (F) 3 y", Some(Sex::F), 36, 48, false, 1.82),
    g("child_m_4_8y", "Child (M) 4-8 y", Some(Sex::M), 48, 108, false, 8.15),
    g("child_f_4_8y", "Child (F) 4-8 y", Some(Sex::F), 48, 108, false, 8.46),
    g("adol_m_9_13y", "Adolescent (M) 9-13 y", Some(Sex::M), 108, 168, false, 7.92),
    g("adol_m_14_18y", "Adolescent (M) 14-18 y", Some(Sex::M), 168, 228, false, 5.91),
    g("adult_m_19_30y", "Adult (M) 19-30 y", Some(Sex::M), 228, 372, false, 8.14),
    g("adult_m_31_50y", "Adult (M) 31-50 y", Some(Sex::M), 372, 612, false, 8.19),
    g("adult_m_51_70y", "Adult (M) 51-70 y", Some(Sex::M), 612, 852, false, 3.04),
    g("older_m_70y", "Older Adult (M) 70+ y", Some(Sex::M), 852, NO_AGE_CAP, false, 0.99),
    g("adol_f_9_13y", "Adolescent (F) 9-13 y", Some(Sex::F), 108, 168, false, 7.76),
    g("adol_f_14_18y", "Adolescent (F) 14-18 y", Some(Sex::F), 168, 228, false, 5.53),
    g("adult_f_19_30y", "Adult (F) 19-30 y", Some(Sex::F), 228, 372, false, 6.84),
    g("adult_f_31_50y", "Adult (F) 31-50 y", Some(Sex::F), 372, 612, false, 7.31),
    g("adult_f_51_70y", "Adult (F) 51-70 y", Some(Sex::F), 612, 852, false, 3.58),
    g("older_f_70y", "Older Adult (F) 70+ y", Some(Sex::F), 852, NO_AGE_CAP, false, 1.25),
    g("lact_f_14_18y", "Lactation (F) 14-18 y", Some(Sex::F), 168, 228, true, 0.28),
    g("lact_f_19_30y", "Lactation (F) 19-30 y", Some(Sex::F), 228, 372, true, 3.41),
    g("lact_f_31_50y", "Lactation (F) 31-50 y", Some(Sex::F), 372, 612, true, 1.64),
];

const fn g(
    group_id: &'static str,
    label: &'static str,
    sex: Option<Sex>,
    age_lo: u32,
    age_hi: u32,
    lactating: bool,
    population_share: f64,
) -> GroupDef {
    GroupDef {
        group_id,
        label,
        sex,
        age_lo,
        age_hi,
        lactating,
        population_share,
    }
}

/// Ages (in months) a lactation group exists for; lactating flags outside this
/// range are rejected at load time.
pub fn lactation_age_range() -> (u32, u32) {
    (168, 612)
}

pub fn group_for(sex: Sex, age_months: u32, lactating: bool) -> Option<&'static GroupDef> {
    GROUPS.iter().find(|grp| {
        grp.lactating == lactating
            && grp.sex.map_or(true, |s| s == sex)
            && age_months >= grp.age_lo
            && age_months < grp.age_hi
    })
}

/// Map a member to its requirement row.
pub fn classify<'t>(
    member: &MemberRecord,
    table: &'t RequirementTable,
) -> Result<&'t RequirementRow, RequirementError> {
    if member.age_months < CLASSIFICATION_FLOOR_MONTHS {
        return Err(RequirementError::BelowFloor {
            age_months: member.age_months,
        });
    }
    let grp = group_for(member.sex, member.age_months, member.lactating).ok_or(
        RequirementError::NoMatchingGroup {
            sex: member.sex,
            age_months: member.age_months,
            lactating: member.lactating,
        },
    )?;
    table
        .get(grp.group_id)
        .ok_or_else(|| RequirementError::MissingGroupRow(grp.group_id.to_string()))
}

/// Partition of a household into the shared pool, add-on children, and
/// excluded members.
#[derive(Debug)]
pub struct Partition<'h> {
    pub pool: Vec<&'h MemberRecord>,
    pub addon_children: Vec<&'h MemberRecord>,
    pub excluded: Vec<&'h MemberRecord>,
}

pub fn partition(household: &HouseholdRecord) -> Partition<'_> {
    let mut part = Partition {
        pool: Vec::new(),
        addon_children: Vec::new(),
        excluded: Vec::new(),
    };
    for m in &household.members {
        if m.meals_share <= 0.0 || m.age_months < CLASSIFICATION_FLOOR_MONTHS {
            part.excluded.push(m);
        } else if m.age_months < SHARED_POOL_FLOOR_MONTHS {
            part.addon_children.push(m);
        } else {
            part.pool.push(m);
        }
    }
    part
}

/// Shared bounds and energy for a pool of (already meals-share-scaled) rows.
#[derive(Clone, PartialEq, Debug)]
pub struct HouseholdRequirement {
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    /// Pool energy total (kcal/day) after meals-share scaling.
    pub energy_total: f64,
    /// Nutrient indices where the shared lower bound exceeds the shared upper
    /// bound: infeasible for any menu, before prices are even consulted.
    pub structural_infeasible: Vec<usize>,
}

/// Aggregate scaled individual rows into the shared household requirement.
///
/// Per lower-bounded nutrient the pool adopts the highest per-kcal density of
/// any member; per upper-bounded nutrient the lowest tolerated density.
/// Meals-share scaling multiplies each member's energy and needs alike, so
/// densities are unchanged and only the energy weights scale; scaling rows
/// before this step is therefore equivalent to scaling after.
pub fn shared_requirements(
    pool: &[RequirementRow],
    nutrients: &[NutrientDef],
) -> Result<HouseholdRequirement, RequirementError> {
    if pool.is_empty() {
        return Err(RequirementError::EmptyPool);
    }
    let energy_total: f64 = pool.iter().map(|r| r.energy_kcal).sum();
    let n = nutrients.len();
    let mut lower = vec![None; n];
    let mut upper = vec![None; n];
    for (j, nutrient) in nutrients.iter().enumerate() {
        if nutrient.bound_kind.has_lower() {
            let max_density = pool
                .iter()
                .filter_map(|r| r.min_need[j].map(|need| need / r.energy_kcal))
                .fold(f64::NEG_INFINITY, f64::max);
            if max_density.is_finite() {
                lower[j] = Some(energy_total * max_density);
            }
        }
        if nutrient.bound_kind.has_upper() {
            let min_density = pool
                .iter()
                .filter_map(|r| r.max_tolerance[j].map(|tol| tol / r.energy_kcal))
                .fold(f64::INFINITY, f64::min);
            if min_density.is_finite() {
                upper[j] = Some(energy_total * min_density);
            }
        }
    }
    let structural_infeasible = (0..n)
        .filter(|&j| matches!((lower[j], upper[j]), (Some(lo), Some(up)) if lo > up))
        .collect();
    Ok(HouseholdRequirement {
        lower,
        upper,
        energy_total,
        structural_infeasible,
    })
}

/// Age band (months, inclusive) for the protein upper-bound relaxation applied
/// to add-on rows of the youngest children.
const PROTEIN_RELAX_AGE: (u32, u32) = (6, 35);
const PROTEIN_RELAX_FACTOR: f64 = 1.5;

/// Everything the diet problems need for one household wave: the shared-pool
/// aggregate, per-member scaled rows, add-on child rows, and exclusions.
#[derive(Clone, Debug)]
pub struct HouseholdPlan {
    /// `None` when the pool is empty (add-on-only household).
    pub shared: Option<HouseholdRequirement>,
    /// (person_id, scaled row) for shared-pool members.
    pub pool_rows: Vec<(String, RequirementRow)>,
    /// (person_id, scaled row) for children 6-47 months, solved individually
    /// in both scenarios.
    pub addon_children: Vec<(String, RequirementRow)>,
    pub excluded: Vec<String>,
    /// Pool + add-on energy (kcal/day); denominator of per-1000-kcal costs.
    pub energy_total: f64,
    /// Members with a positive meals share; denominator of per-capita costs.
    pub eating_members: usize,
}

/// Classify, scale, and aggregate one household wave.
pub fn plan_household(
    household: &HouseholdRecord,
    table: &RequirementTable,
    nutrients: &[NutrientDef],
) -> Result<HouseholdPlan, RequirementError> {
    let part = partition(household);
    let protein_idx = nutrients.iter().position(|n| n.nutrient_id == "protein");

    let mut pool_rows = Vec::with_capacity(part.pool.len());
    for m in &part.pool {
        let row = classify(m, table)?.scaled(m.meals_share)?;
        pool_rows.push((m.person_id.clone(), row));
    }

    let mut addon_children = Vec::with_capacity(part.addon_children.len());
    for m in &part.addon_children {
        let mut row = classify(m, table)?.clone();
        if let Some(j) = protein_idx {
            if m.age_months >= PROTEIN_RELAX_AGE.0 && m.age_months <= PROTEIN_RELAX_AGE.1 {
                if let Some(tol) = row.max_tolerance[j].as_mut() {
                    *tol *= PROTEIN_RELAX_FACTOR;
                }
            }
        }
        let row = row.scaled(m.meals_share)?;
        addon_children.push((m.person_id.clone(), row));
    }

    let shared = if pool_rows.is_empty() {
        None
    } else {
        let rows: Vec<RequirementRow> = pool_rows.iter().map(|(_, r)| r.clone()).collect();
        Some(shared_requirements(&rows, nutrients)?)
    };

    let energy_total = pool_rows
        .iter()
        .chain(addon_children.iter())
        .map(|(_, r)| r.energy_kcal)
        .sum();
    let eating_members = household
        .members
        .iter()
        .filter(|m| m.meals_share > 0.0)
        .count();

    Ok(HouseholdPlan {
        shared,
        pool_rows,
        addon_children,
        excluded: part.excluded.iter().map(|m| m.person_id.clone()).collect(),
        energy_total,
        eating_members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::default_nutrient_catalog;

    fn member(person_id: &str, age_months: u32, sex: Sex, lactating: bool, share: f64) -> MemberRecord {
        MemberRecord {
            person_id: person_id.to_string(),
            age_months,
            sex,
            lactating,
            meals_share: share,
        }
    }

    fn row_with(
        nutrients: &[NutrientDef],
        group_id: &str,
        energy: f64,
        mins: &[(&str, f64)],
        maxs: &[(&str, f64)],
    ) -> RequirementRow {
        let idx = |id: &str| nutrients.iter().position(|n| n.nutrient_id == id).unwrap();
        let mut min_need = vec![None; nutrients.len()];
        let mut max_tolerance = vec![None; nutrients.len()];
        for (id, v) in mins {
            min_need[idx(id)] = Some(*v);
        }
        for (id, v) in maxs {
            max_tolerance[idx(id)] = Some(*v);
        }
        RequirementRow {
            group_id: group_id.to_string(),
            energy_kcal: energy,
            min_need,
            max_tolerance,
        }
    }

    #[test]
    fn classify_table_g_groups() {
        let nutrients = default_nutrient_catalog();
        let rows: Vec<RequirementRow> = GROUPS
            .iter()
            .map(|grp| row_with(&nutrients, grp.group_id, 2000.0, &[], &[]))
            .collect();
        let table = RequirementTable::new(rows);

        let lactating = member("p1", 300, Sex::F, true, 1.0);
        assert_eq!(classify(&lactating, &table).unwrap().group_id, "lact_f_19_30y");

        let boy = member("p2", 60, Sex::M, false, 1.0);
        assert_eq!(classify(&boy, &table).unwrap().group_id, "child_m_4_8y");

        let three_year_old = member("p3", 40, Sex::F, false, 1.0);
        assert_eq!(classify(&three_year_old, &table).unwrap().group_id, "child_f_3y");

        let newborn = member("p4", 3, Sex::M, false, 1.0);
        assert!(matches!(
            classify(&newborn, &table),
            Err(RequirementError::BelowFloor { age_months: 3 })
        ));
    }

    #[test]
    fn scale_partial_cases() {
        let nutrients = default_nutrient_catalog();
        let row = row_with(&nutrients, "adult_m_19_30y", 2400.0, &[("iron", 8.0)], &[("zinc", 40.0)]);

        let same = row.scaled(1.0).unwrap();
        assert_eq!(same, row);

        let half = row.scaled(0.5).unwrap();
        assert_eq!(half.energy_kcal, 1200.0);
        let iron = nutrients.iter().position(|n| n.nutrient_id == "iron").unwrap();
        let zinc = nutrients.iter().position(|n| n.nutrient_id == "zinc").unwrap();
        assert_eq!(half.min_need[iron], Some(4.0));
        assert_eq!(half.max_tolerance[zinc], Some(20.0));

        assert!(row.scaled(1.5).is_err());
        assert!(row.scaled(-0.1).is_err());
    }

    fn household(members: Vec<MemberRecord>) -> HouseholdRecord {
        HouseholdRecord {
            household_id: "h1".to_string(),
            district_id: "d1".to_string(),
            survey_year: 2013,
            survey_month: 4,
            food_exp_day: 5.0,
            total_exp_day: 8.0,
            sampling_weight: 1.0,
            cluster_id: None,
            members,
        }
    }

    #[test]
    fn partition_rules() {
        let hh = household(vec![
            member("infant", 2, Sex::F, false, 1.0),
            member("mother", 360, Sex::F, false, 1.0),
            member("boy", 48, Sex::M, false, 1.0),
        ]);
        let part = partition(&hh);
        assert_eq!(part.excluded.len(), 1);
        assert_eq!(part.addon_children.len(), 0);
        assert_eq!(part.pool.len(), 2);

        let toddler_only = household(vec![member("toddler", 18, Sex::M, false, 1.0)]);
        let part = partition(&toddler_only);
        assert!(part.pool.is_empty());
        assert_eq!(part.addon_children.len(), 1);

        let zero_meals = household(vec![member("away", 400, Sex::M, false, 0.0)]);
        let part = partition(&zero_meals);
        assert_eq!(part.excluded.len(), 1);
    }

    #[test]
    fn shared_requirement_density_rule() {
        let nutrients = default_nutrient_catalog();
        let iron = nutrients.iter().position(|n| n.nutrient_id == "iron").unwrap();
        let copper = nutrients.iter().position(|n| n.nutrient_id == "copper").unwrap();

        let a = row_with(&nutrients, "a", 2000.0, &[("iron", 18.0)], &[("copper", 8.0)]);
        let b = row_with(&nutrients, "b", 2500.0, &[("iron", 8.0)], &[("copper", 5.0)]);
        let req = shared_requirements(&[a.clone(), b], &nutrients).unwrap();

        assert_eq!(req.energy_total, 4500.0);
        assert!((req.lower[iron].unwrap() - 40.5).abs() < 1e-12);
        assert!((req.upper[copper].unwrap() - 9.0).abs() < 1e-12);
        assert!(req.upper[copper].unwrap() < 13.0);

        // Single-member pool reproduces the individual row exactly.
        let solo = shared_requirements(&[a.clone()], &nutrients).unwrap();
        assert_eq!(solo.lower[iron], a.min_need[iron]);
        assert_eq!(solo.upper[copper], a.max_tolerance[copper]);

        assert!(shared_requirements(&[], &nutrients).is_err());
    }

    #[test]
    fn structural_infeasibility_flagged() {
        let nutrients = default_nutrient_catalog();
        let zinc = nutrients.iter().position(|n| n.nutrient_id == "zinc").unwrap();
        // One member needs a zinc density above what the other tolerates.
        let needy = row_with(&nutrients, "a", 2000.0, &[("zinc", 30.0)], &[("zinc", 60.0)]);
        let sensitive = row_with(&nutrients, "b", 2000.0, &[("zinc", 5.0)], &[("zinc", 10.0)]);
        let req = shared_requirements(&[needy, sensitive], &nutrients).unwrap();
        assert!(req.lower[zinc].unwrap() > req.upper[zinc].unwrap());
        assert_eq!(req.structural_infeasible, vec![zinc]);
    }

    #[test]
    fn protein_relaxation_only_for_youngest() {
        let nutrients = default_nutrient_catalog();
        let protein = nutrients.iter().position(|n| n.nutrient_id == "protein").unwrap();
        let mut rows = Vec::new();
        for grp in GROUPS {
            rows.push(row_with(
                &nutrients,
                grp.group_id,
                1000.0,
                &[("protein", 10.0)],
                &[("protein", 20.0)],
            ));
        }
        let table = RequirementTable::new(rows);
        let hh = household(vec![
            member("baby", 10, Sex::F, false, 1.0),
            member("three", 40, Sex::M, false, 1.0),
            member("adult", 300, Sex::M, false, 1.0),
        ]);
        let plan = plan_household(&hh, &table, &nutrients).unwrap();
        let by_id: BTreeMap<&str, &RequirementRow> = plan
            .addon_children
            .iter()
            .map(|(id, r)| (id.as_str(), r))
            .collect();
        assert_eq!(by_id["baby"].max_tolerance[protein], Some(30.0));
        assert_eq!(by_id["three"].max_tolerance[protein], Some(20.0));
    }

    #[test]
    fn plan_counts_energy_and_eaters() {
        let nutrients = default_nutrient_catalog();
        let rows: Vec<RequirementRow> = GROUPS
            .iter()
            .map(|grp| row_with(&nutrients, grp.group_id, 1500.0, &[("iron", 10.0)], &[]))
            .collect();
        let table = RequirementTable::new(rows);
        let hh = household(vec![
            member("adult", 300, Sex::F, false, 1.0),
            member("half", 500, Sex::M, false, 0.5),
            member("toddler", 20, Sex::M, false, 1.0),
            member("away", 240, Sex::M, false, 0.0),
        ]);
        let plan = plan_household(&hh, &table, &nutrients).unwrap();
        assert_eq!(plan.pool_rows.len(), 2);
        assert_eq!(plan.addon_children.len(), 1);
        assert_eq!(plan.excluded, vec!["away".to_string()]);
        assert!((plan.energy_total - (1500.0 + 750.0 + 1500.0)).abs() < 1e-12);
        assert_eq!(plan.eating_members, 3);
    }

    mod properties {
        use super::*;
        use crate::data::BoundKind;
        use proptest::prelude::*;

        fn arb_pool(nutrients: usize) -> impl Strategy<Value = Vec<RequirementRow>> {
            let row = (
                800.0f64..4000.0,
                proptest::collection::vec(0.1f64..50.0, nutrients),
                proptest::collection::vec(1.0f64..4.0, nutrients),
            )
                .prop_map(move |(energy, mins, spreads)| {
                    let min_need: Vec<Option<f64>> = mins.iter().map(|&v| Some(v)).collect();
                    let max_tolerance = mins
                        .iter()
                        .zip(&spreads)
                        .map(|(&v, &s)| Some(v * s))
                        .collect();
                    RequirementRow {
                        group_id: "g".to_string(),
                        energy_kcal: energy,
                        min_need,
                        max_tolerance,
                    }
                });
            proptest::collection::vec(row, 1..6)
        }

        fn all_both_catalog(n: usize) -> Vec<NutrientDef> {
            (0..n)
                .map(|j| NutrientDef {
                    nutrient_id: format!("n{j}"),
                    name: format!("n{j}"),
                    unit: "mg".to_string(),
                    bound_kind: BoundKind::Both,
                })
                .collect()
        }

        proptest! {
            #[test]
            fn dominance_over_sums(pool in arb_pool(4)) {
                let nutrients = all_both_catalog(4);
                let req = shared_requirements(&pool, &nutrients).unwrap();
                for j in 0..4 {
                    let sum_min: f64 = pool.iter().map(|r| r.min_need[j].unwrap()).sum();
                    let sum_max: f64 = pool.iter().map(|r| r.max_tolerance[j].unwrap()).sum();
                    prop_assert!(req.lower[j].unwrap() >= sum_min * (1.0 - 1e-12));
                    prop_assert!(req.upper[j].unwrap() <= sum_max * (1.0 + 1e-12));
                }
            }

            #[test]
            fn permutation_invariant(pool in arb_pool(3), seed in 0u64..1000) {
                let nutrients = all_both_catalog(3);
                let base = shared_requirements(&pool, &nutrients).unwrap();
                let mut shuffled = pool.clone();
                // cheap deterministic shuffle
                let n = shuffled.len();
                for i in 0..n {
                    let j = ((seed as usize).wrapping_mul(31).wrapping_add(i * 17)) % n;
                    shuffled.swap(i, j);
                }
                let perm = shared_requirements(&shuffled, &nutrients).unwrap();
                for j in 0..3 {
                    prop_assert!((base.lower[j].unwrap() - perm.lower[j].unwrap()).abs() < 1e-9);
                    prop_assert!((base.upper[j].unwrap() - perm.upper[j].unwrap()).abs() < 1e-9);
                }
            }

            #[test]
            fn adding_member_never_loosens(pool in arb_pool(3), extra in arb_pool(3)) {
                let nutrients = all_both_catalog(3);
                let base = shared_requirements(&pool, &nutrients).unwrap();
                let mut bigger = pool.clone();
                bigger.push(extra[0].clone());
                let grown = shared_requirements(&bigger, &nutrients).unwrap();
                for j in 0..3 {
                    let d_lo_base = base.lower[j].unwrap() / base.energy_total;
                    let d_lo_grown = grown.lower[j].unwrap() / grown.energy_total;
                    let d_up_base = base.upper[j].unwrap() / base.energy_total;
                    let d_up_grown = grown.upper[j].unwrap() / grown.energy_total;
                    prop_assert!(d_lo_grown >= d_lo_base - 1e-12);
                    prop_assert!(d_up_grown <= d_up_base + 1e-12);
                }
            }
        }
    }
}
