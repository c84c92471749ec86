//! Synthetic dataset generator with known ground truth.
//!
//! Builds a full panel (catalog, foods, prices, markets, households,
//! requirement table, PPP factors) whose statistical structure is controlled:
//! log prices follow trend + seasonal cosine + noise with a configured
//! amplitude, missing prices land preferentially in configured lean months,
//! and household compositions are drawn from the standard requirement groups
//! with realistic population shares. Deterministic for a fixed seed.

use super::{
    default_nutrient_catalog, DataError, Dataset, FoodItem, HouseholdRecord, MemberRecord,
    NutrientDef, Sex,
};
use crate::requirements::{RequirementRow, RequirementTable, GROUPS};
use crate::time::YearMonth;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct SynthParams {
    pub n_markets: usize,
    pub n_items: usize,
    pub n_households: usize,
    pub start: YearMonth,
    pub months: u32,
    /// Seasonal amplitude of log prices (lambda in log units).
    pub price_seasonal_amplitude: f64,
    /// Standard deviation of iid log-price noise.
    pub price_noise_sd: f64,
    /// When set, every item shares this seasonal phase (radians); otherwise
    /// each item draws its own.
    pub common_phase: Option<f64>,
    /// Overall probability that a (market, item, month) price is missing.
    pub missingness_rate: f64,
    /// Calendar months where missingness concentrates.
    pub lean_season_months: Vec<u8>,
    /// Multiplier on the missingness rate inside lean months; the rate
    /// elsewhere is lowered so the overall mean stays at `missingness_rate`.
    pub lean_missingness_boost: f64,
    /// Second survey wave: households are re-observed with new compositions
    /// from this month onward.
    pub wave2_start: Option<YearMonth>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_markets: 4,
            n_items: 24,
            n_households: 60,
            start: YearMonth { year: 2013, month: 1 },
            months: 55,
            price_seasonal_amplitude: 0.08,
            price_noise_sd: 0.03,
            common_phase: None,
            missingness_rate: 0.10,
            lean_season_months: vec![12, 1, 2, 3],
            lean_missingness_boost: 2.5,
            wave2_start: Some(YearMonth { year: 2016, month: 1 }),
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<(), DataError> {
        let positive = [
            ("n_markets", self.n_markets),
            ("n_items", self.n_items),
            ("n_households", self.n_households),
            ("months", self.months as usize),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(DataError::Params(format!("{name} must be positive")));
            }
        }
        if self.price_seasonal_amplitude < 0.0 {
            return Err(DataError::Params("price_seasonal_amplitude must be >= 0".into()));
        }
        if self.price_noise_sd < 0.0 {
            return Err(DataError::Params("price_noise_sd must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.missingness_rate) {
            return Err(DataError::Params("missingness_rate must be in [0, 1)".into()));
        }
        if self.lean_season_months.iter().any(|m| !(1..=12).contains(m)) {
            return Err(DataError::Params("lean_season_months must be in 1..=12".into()));
        }
        let lean = self.lean_season_months.len() as f64;
        if lean > 0.0 && self.lean_missingness_boost * lean >= 12.0 {
            return Err(DataError::Params(
                "lean_missingness_boost too large: non-lean months would need negative rates".into(),
            ));
        }
        if self.lean_missingness_boost < 1.0 {
            return Err(DataError::Params("lean_missingness_boost must be >= 1".into()));
        }
        Ok(())
    }

    fn end(&self) -> YearMonth {
        YearMonth::from_index(self.start.index() + self.months as i64 - 1)
    }
}

/// Daily energy (kcal) by requirement group.
fn group_energy(group_id: &str) -> f64 {
    match group_id {
        "infant_6_11m" => 700.0,
        "child_1_2y" => 1000.0,
        "child_m_3y" => 1300.0,
        "child_f_3y" => 1250.0,
        "child_m_4_8y" => 1600.0,
        "child_f_4_8y" => 1500.0,
        "adol_m_9_13y" => 2100.0,
        "adol_m_14_18y" => 2800.0,
        "adult_m_19_30y" => 2800.0,
        "adult_m_31_50y" => 2700.0,
        "adult_m_51_70y" => 2400.0,
        "older_m_70y" => 2200.0,
        "adol_f_9_13y" => 1900.0,
        "adol_f_14_18y" => 2100.0,
        "adult_f_19_30y" => 2250.0,
        "adult_f_31_50y" => 2150.0,
        "adult_f_51_70y" => 1950.0,
        "older_f_70y" => 1800.0,
        "lact_f_14_18y" => 2600.0,
        "lact_f_19_30y" => 2750.0,
        "lact_f_31_50y" => 2650.0,
        other => panic!("unknown group {other}"),
    }
}

/// How demanding a group's nutrient density floor is, relative to the
/// reference density of an ordinary mixed diet.
fn group_density_multiplier(group_id: &str) -> f64 {
    match group_id {
        "infant_6_11m" => 1.35,
        "child_1_2y" => 1.30,
        "child_m_3y" | "child_f_3y" => 1.05,
        "child_m_4_8y" | "child_f_4_8y" => 0.80,
        "adol_m_9_13y" => 0.85,
        "adol_m_14_18y" => 0.80,
        "adult_m_19_30y" | "adult_m_31_50y" => 0.72,
        "adult_m_51_70y" => 0.80,
        "older_m_70y" => 1.05,
        "adol_f_9_13y" => 0.95,
        "adol_f_14_18y" => 1.00,
        "adult_f_19_30y" | "adult_f_31_50y" => 0.90,
        "adult_f_51_70y" => 0.95,
        "older_f_70y" => 1.10,
        "lact_f_14_18y" => 1.30,
        "lact_f_19_30y" | "lact_f_31_50y" => 1.25,
        other => panic!("unknown group {other}"),
    }
}

fn is_young_child(group_id: &str) -> bool {
    matches!(group_id, "infant_6_11m" | "child_1_2y" | "child_m_3y" | "child_f_3y")
}

/// Reference density per 1000 kcal for each non-energy nutrient, the anchor
/// both requirements and food contents are expressed against.
fn reference_density(nutrient_id: &str) -> f64 {
    match nutrient_id {
        "carb" => 120.0,
        "protein" => 40.0,
        "lipid" => 25.0,
        "vit_a" => 350.0,
        "retinol" => 300.0,
        "vit_c" => 40.0,
        "vit_e" => 7.0,
        "thiamin" => 0.6,
        "riboflavin" => 0.6,
        "niacin" => 7.0,
        "vit_b6" => 0.7,
        "folate" => 180.0,
        "vit_b12" => 1.2,
        "calcium" => 450.0,
        "copper" => 0.45,
        "iron" => 8.0,
        "magnesium" => 160.0,
        "phosphorus" => 350.0,
        "selenium" => 25.0,
        "zinc" => 5.0,
        "sodium" => 500.0,
        other => panic!("unknown nutrient {other}"),
    }
}

const FOOD_GROUPS: &[(&str, f64, f64)] = &[
    // (group, energy kcal/kg, base price per kg)
    ("cereals", 3600.0, 150.0),
    ("roots_tubers", 1100.0, 140.0),
    ("legumes", 3400.0, 500.0),
    ("dark_leafy_veg", 350.0, 200.0),
    ("other_veg", 300.0, 220.0),
    ("vit_a_veg", 400.0, 180.0),
    ("fruits", 600.0, 280.0),
    ("flesh_meat", 2000.0, 2200.0),
    ("fish", 3000.0, 2400.0),
    ("eggs_milk", 1400.0, 900.0),
    ("oils_fats", 8800.0, 1600.0),
];

fn gen_foods(rng: &mut ChaCha20Rng, params: &SynthParams, nutrients: &[NutrientDef]) -> Vec<FoodItem> {
    let energy_jitter = LogNormal::new(0.0, 0.15).unwrap();
    let base_phi = LogNormal::new((0.7f64).ln(), 0.55).unwrap();
    let rich_phi = |rng: &mut ChaCha20Rng| rng.gen_range(3.0..8.0);

    // Specialist assignment per nutrient: roughly one item in five carries an
    // outsized density of it.
    let n = params.n_items;
    let mut specialist: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
    for def in nutrients {
        if def.nutrient_id == "energy" {
            continue;
        }
        let flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
        specialist.insert(def.nutrient_id.as_str(), flags);
    }

    // Contents are quantized to exact multiples of their per-100g file
    // representation so a write/load cycle is bit-identical.
    let quantize = |per_kg: f64| (per_kg / 10.0) * 10.0;

    let mut foods = Vec::with_capacity(n);
    for f in 0..n {
        let (group, group_energy, _) = FOOD_GROUPS[f % FOOD_GROUPS.len()];
        let energy_per_kg = group_energy * energy_jitter.sample(rng);
        let mut content = vec![0.0; nutrients.len()];
        let mut se_phi = 0.0;
        for (j, def) in nutrients.iter().enumerate() {
            if def.bound_kind == super::BoundKind::Energy {
                content[j] = quantize(energy_per_kg);
                continue;
            }
            let mut phi = base_phi.sample(rng);
            if specialist[def.nutrient_id.as_str()][f] {
                phi *= rich_phi(rng);
            }
            // Couple copper to selenium: selenium-rich items carry copper too,
            // which is what makes dense shared diets brush the copper ceiling.
            if def.nutrient_id == "selenium" {
                se_phi = phi;
            }
            if def.nutrient_id == "copper" && se_phi > 2.0 {
                phi = phi.max(se_phi * rng.gen_range(0.7..1.2));
            }
            content[j] = quantize(reference_density(&def.nutrient_id) * (energy_per_kg / 1000.0) * phi);
        }
        foods.push(FoodItem {
            item_id: format!("i{f:03}"),
            name: format!("{group} item {f}"),
            food_group: group.to_string(),
            nutrient_content: content,
        });
    }
    foods
}

fn gen_requirements(rng: &mut ChaCha20Rng, nutrients: &[NutrientDef]) -> RequirementTable {
    let mut rows = Vec::with_capacity(GROUPS.len());
    for grp in GROUPS {
        let energy = group_energy(grp.group_id);
        let mult = group_density_multiplier(grp.group_id);
        let young = is_young_child(grp.group_id);
        let mut min_need = vec![None; nutrients.len()];
        let mut max_tolerance = vec![None; nutrients.len()];
        for (j, def) in nutrients.iter().enumerate() {
            let rho = if def.bound_kind == super::BoundKind::Energy {
                continue;
            } else {
                reference_density(&def.nutrient_id)
            };
            let per_day = rho * energy / 1000.0;
            if def.bound_kind.has_lower() {
                min_need[j] = Some(per_day * mult * rng.gen_range(0.82..1.0));
            }
            if def.bound_kind.has_upper() {
                let tight = matches!(def.nutrient_id.as_str(), "copper" | "zinc" | "retinol");
                let spread = match (young, tight) {
                    (true, true) => rng.gen_range(1.7..2.1),
                    (true, false) => rng.gen_range(2.4..3.2),
                    (false, true) => rng.gen_range(2.6..3.4),
                    (false, false) => rng.gen_range(3.6..5.5),
                };
                let floor = min_need[j].unwrap_or(per_day * mult);
                max_tolerance[j] = Some(floor * spread);
            }
        }
        rows.push(RequirementRow {
            group_id: grp.group_id.to_string(),
            energy_kcal: energy,
            min_need,
            max_tolerance,
        });
    }
    RequirementTable::new(rows)
}

type PriceTable = BTreeMap<String, BTreeMap<YearMonth, Vec<(usize, f64)>>>;

fn gen_prices(rng: &mut ChaCha20Rng, params: &SynthParams) -> PriceTable {
    let lambda = params.price_seasonal_amplitude;
    let noise = Normal::new(0.0, params.price_noise_sd.max(1e-300)).unwrap();
    let inflation_per_month = 0.012;

    let item_phase: Vec<f64> = (0..params.n_items)
        .map(|_| {
            let drawn = rng.gen_range(0.0..(2.0 * PI));
            params.common_phase.unwrap_or(drawn)
        })
        .collect();
    let market_offset: Vec<f64> = (0..params.n_markets).map(|_| rng.gen_range(-0.08..0.08)).collect();

    // Missingness weights per calendar month, mean exactly 1.
    let lean = &params.lean_season_months;
    let n_lean = lean.len() as f64;
    let boost = params.lean_missingness_boost;
    let w_other = if n_lean < 12.0 { (12.0 - boost * n_lean) / (12.0 - n_lean) } else { 1.0 };
    let month_weight = |m: u8| if lean.contains(&m) { boost } else { w_other };

    let mut table: PriceTable = BTreeMap::new();
    for mk in 0..params.n_markets {
        let market_id = format!("mk{mk:02}");
        let mut by_month = BTreeMap::new();
        for t in 0..params.months {
            let ym = YearMonth::from_index(params.start.index() + t as i64);
            let mut rows = Vec::new();
            for f in 0..params.n_items {
                let miss_p = (params.missingness_rate * month_weight(ym.month)).clamp(0.0, 0.98);
                let missing = rng.gen_bool(miss_p);
                // Draw the noise regardless so missingness does not shift the
                // RNG stream of observed prices.
                let eps = if params.price_noise_sd > 0.0 { noise.sample(rng) } else { 0.0 };
                if missing {
                    continue;
                }
                let (_, _, base_price) = FOOD_GROUPS[f % FOOD_GROUPS.len()];
                let seasonal = lambda * ((ym.month as f64) * PI / 6.0 - item_phase[f]).cos();
                let ln_p = base_price.ln()
                    + inflation_per_month * t as f64
                    + seasonal
                    + market_offset[mk]
                    + eps;
                rows.push((f, ln_p.exp()));
            }
            if !rows.is_empty() {
                by_month.insert(ym, rows);
            }
        }
        table.insert(market_id, by_month);
    }
    table
}

const HH_SIZE_WEIGHTS: &[(usize, f64)] = &[
    (1, 0.07),
    (2, 0.11),
    (3, 0.15),
    (4, 0.18),
    (5, 0.17),
    (6, 0.13),
    (7, 0.09),
    (8, 0.05),
    (9, 0.03),
    (10, 0.02),
];

fn draw_weighted<'a, T>(rng: &mut ChaCha20Rng, items: &'a [(T, f64)]) -> &'a T {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut u = rng.gen_range(0.0..total);
    for (item, w) in items {
        if u < *w {
            return item;
        }
        u -= w;
    }
    &items[items.len() - 1].0
}

fn draw_member(rng: &mut ChaCha20Rng, person_id: String) -> MemberRecord {
    let shares: Vec<(usize, f64)> = GROUPS
        .iter()
        .enumerate()
        .map(|(i, grp)| (i, grp.population_share))
        .collect();
    let grp = &GROUPS[*draw_weighted(rng, &shares)];
    let hi = grp.age_hi.min(1020);
    let age_months = rng.gen_range(grp.age_lo..hi);
    let sex = grp.sex.unwrap_or(if rng.gen_bool(0.5) { Sex::M } else { Sex::F });
    let meals_share = {
        let u: f64 = rng.gen();
        if u < 0.93 {
            1.0
        } else if u < 0.98 {
            rng.gen_range(0.25..0.95)
        } else {
            0.0
        }
    };
    MemberRecord {
        person_id,
        age_months,
        sex,
        lactating: grp.lactating,
        meals_share,
    }
}

fn gen_households(rng: &mut ChaCha20Rng, params: &SynthParams) -> Vec<HouseholdRecord> {
    let weight_dist = LogNormal::new(0.0, 0.5).unwrap();
    let percap_food = LogNormal::new(330.0f64.ln(), 0.5).unwrap();
    let end = params.end();
    let wave2 = params
        .wave2_start
        .filter(|w2| *w2 > params.start && *w2 <= end);

    let mut households = Vec::new();
    for h in 0..params.n_households {
        let household_id = format!("hh{h:04}");
        let district = rng.gen_range(0..params.n_markets);
        let weight = weight_dist.sample(rng);
        let cluster_id = Some(format!("d{district:02}_c{}", h % 3));

        let make_wave = |rng: &mut ChaCha20Rng, wave: usize, lo: YearMonth, hi: YearMonth| {
            let size = *draw_weighted(rng, HH_SIZE_WEIGHTS);
            let mut members: Vec<MemberRecord> = (0..size)
                .map(|p| draw_member(rng, format!("p{p}w{wave}")))
                .collect();
            if rng.gen_bool(0.05) {
                members.push(MemberRecord {
                    person_id: format!("p{size}w{wave}"),
                    age_months: rng.gen_range(0..6),
                    sex: if rng.gen_bool(0.5) { Sex::M } else { Sex::F },
                    lactating: false,
                    meals_share: 1.0,
                });
            }
            let eaters = members.iter().filter(|m| m.meals_share > 0.0).count().max(1);
            let span = (hi.index() - lo.index()) as u64 + 1;
            let survey = YearMonth::from_index(lo.index() + (rng.gen_range(0..span)) as i64);
            // Nominal spending drifts with the same inflation as prices.
            let t = survey.index() - params.start.index();
            let infl = (0.012 * t as f64).exp();
            let food_exp_day = percap_food.sample(rng) * eaters as f64 * infl;
            let total_exp_day = food_exp_day / rng.gen_range(0.55..0.90);
            HouseholdRecord {
                household_id: household_id.clone(),
                district_id: format!("d{district:02}"),
                survey_year: survey.year,
                survey_month: survey.month,
                food_exp_day,
                total_exp_day,
                sampling_weight: weight,
                cluster_id: cluster_id.clone(),
                members,
            }
        };

        match wave2 {
            Some(w2) => {
                let wave1_hi = YearMonth::from_index(w2.index() - 1).min(end);
                households.push(make_wave(rng, 1, params.start, wave1_hi));
                households.push(make_wave(rng, 2, w2, end));
            }
            None => {
                households.push(make_wave(rng, 1, params.start, end));
            }
        }
    }
    households
}

/// Generate a complete validated dataset. Byte-identical output for equal
/// (seed, params).
pub fn synth_generate(seed: u64, params: &SynthParams) -> Result<Dataset, DataError> {
    params.validate()?;
    let nutrients = default_nutrient_catalog();
    let energy_idx = 0;

    // Independent streams so that, say, resizing the household sample does not
    // shift the price panel.
    let mut rng_foods = ChaCha20Rng::seed_from_u64(seed ^ 0x464f4f44);
    let mut rng_req = ChaCha20Rng::seed_from_u64(seed ^ 0x52455155);
    let mut rng_prices = ChaCha20Rng::seed_from_u64(seed ^ 0x50524943);
    let mut rng_hh = ChaCha20Rng::seed_from_u64(seed ^ 0x484f5553);

    let foods = gen_foods(&mut rng_foods, params, &nutrients);
    let requirements = gen_requirements(&mut rng_req, &nutrients);
    let prices = gen_prices(&mut rng_prices, params);
    let households = gen_households(&mut rng_hh, params);

    let market_map: BTreeMap<String, String> = (0..params.n_markets)
        .map(|m| (format!("d{m:02}"), format!("mk{m:02}")))
        .collect();

    let mut ppp_annual = BTreeMap::new();
    let end = params.end();
    for year in params.start.year..=end.year {
        let t = year - params.start.year;
        ppp_annual.insert(year, 100.0 * 1.15f64.powi(t));
    }

    Ok(Dataset {
        nutrients,
        energy_idx,
        foods,
        prices,
        market_map,
        households,
        requirements,
        ppp_annual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::write_dataset;

    #[test]
    fn deterministic_for_fixed_seed() {
        let params = SynthParams::default();
        let a = synth_generate(7, &params).unwrap();
        let b = synth_generate(7, &params).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(8, &params).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn missingness_rate_matches_configuration() {
        let params = SynthParams {
            n_markets: 10,
            n_items: 30,
            n_households: 1,
            months: 48,
            missingness_rate: 0.20,
            ..SynthParams::default()
        };
        // 10 * 30 * 48 = 14,400 cells.
        let ds = synth_generate(11, &params).unwrap();
        let observed: usize = ds
            .prices
            .values()
            .flat_map(|by_month| by_month.values())
            .map(|rows| rows.len())
            .sum();
        let total = 10 * 30 * 48;
        let empirical_missing = 1.0 - observed as f64 / total as f64;
        assert!(
            (empirical_missing - 0.20).abs() < 0.01,
            "missingness {empirical_missing} not within 1pp of 0.20"
        );
    }

    #[test]
    fn missingness_concentrates_in_lean_months() {
        let params = SynthParams {
            n_markets: 10,
            n_items: 30,
            n_households: 1,
            months: 48,
            missingness_rate: 0.20,
            lean_season_months: vec![1, 2],
            lean_missingness_boost: 3.0,
            ..SynthParams::default()
        };
        let ds = synth_generate(3, &params).unwrap();
        let mut lean_obs = 0usize;
        let mut lean_total = 0usize;
        let mut other_obs = 0usize;
        let mut other_total = 0usize;
        for by_month in ds.prices.values() {
            for ym in YearMonth::range(params.start, params.end()) {
                let n = by_month.get(&ym).map_or(0, |rows| rows.len());
                if params.lean_season_months.contains(&ym.month) {
                    lean_obs += n;
                    lean_total += 30;
                } else {
                    other_obs += n;
                    other_total += 30;
                }
            }
        }
        let lean_missing = 1.0 - lean_obs as f64 / lean_total as f64;
        let other_missing = 1.0 - other_obs as f64 / other_total as f64;
        assert!(lean_missing > 2.0 * other_missing);
    }

    #[test]
    fn round_trip_through_csv() {
        let params = SynthParams {
            n_markets: 2,
            n_items: 12,
            n_households: 8,
            months: 26,
            ..SynthParams::default()
        };
        let ds = synth_generate(5, &params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let loaded = crate::data::load_catalog(&crate::data::DataPaths::in_dir(dir.path())).unwrap();
        assert_eq!(ds, loaded);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SynthParams::default();
        p.missingness_rate = 1.0;
        assert!(synth_generate(1, &p).is_err());
        let mut p = SynthParams::default();
        p.n_items = 0;
        assert!(synth_generate(1, &p).is_err());
        let mut p = SynthParams::default();
        p.lean_season_months = vec![13];
        assert!(synth_generate(1, &p).is_err());
    }
}
