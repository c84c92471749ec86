//! CSV loading and validation.
//!
//! Every error names the file, the 1-based data row, and the rule violated.
//! Composition inputs arrive per 100 g edible portion and are converted to
//! per-kg on load.

use super::{
    BoundKind, DataError, Dataset, FoodItem, HouseholdRecord, MemberRecord, NutrientDef, Sex,
};
use crate::requirements::{self, RequirementRow, RequirementTable};
use crate::time::YearMonth;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

/// Locations of the input files. `ppp_annual` is optional.
#[derive(Clone, Debug)]
pub struct DataPaths {
    pub nutrients: PathBuf,
    pub foods: PathBuf,
    pub prices: PathBuf,
    pub market_map: PathBuf,
    pub households: PathBuf,
    pub members: PathBuf,
    pub requirements: PathBuf,
    pub ppp_annual: Option<PathBuf>,
}

impl DataPaths {
    /// Conventional file names inside one directory.
    pub fn in_dir<P: AsRef<Path>>(dir: P) -> Self {
        let dir = dir.as_ref();
        let ppp = dir.join("ppp_annual.csv");
        DataPaths {
            nutrients: dir.join("nutrients.csv"),
            foods: dir.join("foods.csv"),
            prices: dir.join("prices.csv"),
            market_map: dir.join("market_map.csv"),
            households: dir.join("households.csv"),
            members: dir.join("members.csv"),
            requirements: dir.join("requirements.csv"),
            ppp_annual: ppp.exists().then_some(ppp),
        }
    }
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>, DataError> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => DataError::Io {
                file: path.display().to_string(),
                source,
            },
            other => DataError::Schema {
                file: path.display().to_string(),
                row: 0,
                msg: format!("{other:?}"),
            },
        })
}

struct FileCtx {
    file: String,
}

impl FileCtx {
    fn new(path: &Path) -> Self {
        FileCtx {
            file: path.display().to_string(),
        }
    }

    fn schema(&self, row: u64, msg: impl Into<String>) -> DataError {
        DataError::Schema {
            file: self.file.clone(),
            row,
            msg: msg.into(),
        }
    }

    fn referential(&self, row: u64, msg: impl Into<String>) -> DataError {
        DataError::Referential {
            file: self.file.clone(),
            row,
            msg: msg.into(),
        }
    }

    fn unit(&self, row: u64, msg: impl Into<String>) -> DataError {
        DataError::Unit {
            file: self.file.clone(),
            row,
            msg: msg.into(),
        }
    }
}

struct Sheet {
    ctx: FileCtx,
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Sheet {
    fn read(path: &Path) -> Result<Self, DataError> {
        let ctx = FileCtx::new(path);
        let mut rdr = open(path)?;
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| ctx.schema(0, e.to_string()))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| ctx.schema(i as u64 + 1, e.to_string()))?;
            records.push(rec);
        }
        Ok(Sheet {
            ctx,
            header,
            records,
        })
    }

    fn col(&self, name: &str) -> Result<usize, DataError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.ctx.schema(0, format!("missing column '{name}'")))
    }

    fn opt_col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn field<'a>(&self, rec: &'a csv::StringRecord, col: usize, row: u64) -> Result<&'a str, DataError> {
        rec.get(col)
            .ok_or_else(|| self.ctx.schema(row, format!("row has {} fields, need more", rec.len())))
    }

    fn parse_f64(&self, rec: &csv::StringRecord, col: usize, row: u64) -> Result<f64, DataError> {
        let raw = self.field(rec, col, row)?;
        raw.parse::<f64>().map_err(|_| {
            self.ctx
                .schema(row, format!("column '{}': expected number, got {raw:?}", self.header[col]))
        })
    }

    fn parse_i64(&self, rec: &csv::StringRecord, col: usize, row: u64) -> Result<i64, DataError> {
        let raw = self.field(rec, col, row)?;
        raw.parse::<i64>().map_err(|_| {
            self.ctx
                .schema(row, format!("column '{}': expected integer, got {raw:?}", self.header[col]))
        })
    }
}

fn load_nutrients(path: &Path) -> Result<(Vec<NutrientDef>, usize), DataError> {
    let sheet = Sheet::read(path)?;
    let c_id = sheet.col("nutrient_id")?;
    let c_name = sheet.col("name")?;
    let c_unit = sheet.col("unit")?;
    let c_kind = sheet.col("bound_kind")?;

    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let id = sheet.field(rec, c_id, row)?.to_string();
        if !seen.insert(id.clone()) {
            return Err(sheet.ctx.referential(row, format!("duplicate nutrient_id '{id}'")));
        }
        let kind = match sheet.field(rec, c_kind, row)? {
            "energy" => BoundKind::Energy,
            "lower_only" => BoundKind::LowerOnly,
            "upper_only" => BoundKind::UpperOnly,
            "both" => BoundKind::Both,
            other => {
                return Err(sheet.ctx.schema(
                    row,
                    format!("bound_kind must be energy|lower_only|upper_only|both, got {other:?}"),
                ))
            }
        };
        out.push(NutrientDef {
            nutrient_id: id,
            name: sheet.field(rec, c_name, row)?.to_string(),
            unit: sheet.field(rec, c_unit, row)?.to_string(),
            bound_kind: kind,
        });
    }
    let energies: Vec<usize> = out
        .iter()
        .enumerate()
        .filter(|(_, n)| n.bound_kind == BoundKind::Energy)
        .map(|(i, _)| i)
        .collect();
    if energies.len() != 1 {
        return Err(sheet.ctx.schema(
            0,
            format!("exactly one nutrient must have bound_kind 'energy', found {}", energies.len()),
        ));
    }
    Ok((out, energies[0]))
}

fn load_foods(path: &Path, nutrients: &[NutrientDef]) -> Result<Vec<FoodItem>, DataError> {
    let sheet = Sheet::read(path)?;
    let c_id = sheet.col("item_id")?;
    let c_name = sheet.col("name")?;
    let c_group = sheet.col("food_group")?;
    let nutrient_cols: Vec<usize> = nutrients
        .iter()
        .map(|n| sheet.col(&n.nutrient_id))
        .collect::<Result<_, _>>()?;

    let mut out: Vec<FoodItem> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let id = sheet.field(rec, c_id, row)?.to_string();
        if !seen.insert(id.clone()) {
            return Err(sheet.ctx.referential(row, format!("duplicate item_id '{id}'")));
        }
        let mut content = Vec::with_capacity(nutrients.len());
        for (&col, def) in nutrient_cols.iter().zip(nutrients) {
            let per_100g = sheet.parse_f64(rec, col, row)?;
            if !per_100g.is_finite() || per_100g < 0.0 {
                return Err(sheet.ctx.unit(
                    row,
                    format!("nutrient '{}' must be finite and >= 0, got {per_100g}", def.nutrient_id),
                ));
            }
            // Composition files are per 100 g edible portion; store per kg.
            content.push(per_100g * 10.0);
        }
        out.push(FoodItem {
            item_id: id,
            name: sheet.field(rec, c_name, row)?.to_string(),
            food_group: sheet.field(rec, c_group, row)?.to_string(),
            nutrient_content: content,
        });
    }
    out.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    Ok(out)
}

fn load_market_map(path: &Path) -> Result<BTreeMap<String, String>, DataError> {
    let sheet = Sheet::read(path)?;
    let c_district = sheet.col("district_id")?;
    let c_market = sheet.col("market_id")?;
    let mut map = BTreeMap::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let district = sheet.field(rec, c_district, row)?.to_string();
        let market = sheet.field(rec, c_market, row)?.to_string();
        if map.insert(district.clone(), market).is_some() {
            // A district listed twice would silently pick one market; refuse.
            return Err(sheet
                .ctx
                .referential(row, format!("district '{district}' mapped more than once")));
        }
    }
    Ok(map)
}

type PriceTable = BTreeMap<String, BTreeMap<YearMonth, Vec<(usize, f64)>>>;

fn load_prices(
    path: &Path,
    foods: &[FoodItem],
    markets: &BTreeSet<String>,
) -> Result<PriceTable, DataError> {
    let sheet = Sheet::read(path)?;
    let c_market = sheet.col("market_id")?;
    let c_year = sheet.col("year")?;
    let c_month = sheet.col("month")?;
    let c_item = sheet.col("item_id")?;
    let c_price = sheet.col("price_per_kg")?;

    let index_of: BTreeMap<&str, usize> = foods
        .iter()
        .enumerate()
        .map(|(i, f)| (f.item_id.as_str(), i))
        .collect();

    let mut table: PriceTable = BTreeMap::new();
    let mut seen: BTreeSet<(String, YearMonth, usize)> = BTreeSet::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let market = sheet.field(rec, c_market, row)?.to_string();
        if !markets.contains(&market) {
            return Err(sheet
                .ctx
                .referential(row, format!("market '{market}' not in market_map")));
        }
        let year = sheet.parse_i64(rec, c_year, row)? as i32;
        let month = sheet.parse_i64(rec, c_month, row)?;
        let ym = u8::try_from(month)
            .ok()
            .and_then(|m| YearMonth::new(year, m))
            .ok_or_else(|| sheet.ctx.schema(row, format!("month must be 1-12, got {month}")))?;
        let item = sheet.field(rec, c_item, row)?;
        let food = *index_of
            .get(item)
            .ok_or_else(|| sheet.ctx.referential(row, format!("unknown item_id '{item}'")))?;
        let price = sheet.parse_f64(rec, c_price, row)?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(sheet.ctx.unit(row, format!("price must be > 0, got {price}")));
        }
        if !seen.insert((market.clone(), ym, food)) {
            return Err(sheet.ctx.referential(
                row,
                format!("duplicate price for ({market}, {ym}, {item})"),
            ));
        }
        table
            .entry(market)
            .or_default()
            .entry(ym)
            .or_default()
            .push((food, price));
    }
    for by_month in table.values_mut() {
        for rows in by_month.values_mut() {
            rows.sort_by_key(|(food, _)| *food);
        }
    }
    Ok(table)
}

fn load_requirements(path: &Path, nutrients: &[NutrientDef]) -> Result<RequirementTable, DataError> {
    let sheet = Sheet::read(path)?;
    let c_group = sheet.col("group_id")?;
    let c_energy = sheet.col("energy_kcal")?;

    struct BoundCols {
        min: Option<usize>,
        max: Option<usize>,
    }
    let mut cols = Vec::with_capacity(nutrients.len());
    for n in nutrients {
        if n.bound_kind == BoundKind::Energy {
            cols.push(BoundCols { min: None, max: None });
            continue;
        }
        let min = sheet.opt_col(&format!("min_{}", n.nutrient_id));
        let max = sheet.opt_col(&format!("max_{}", n.nutrient_id));
        if n.bound_kind.has_lower() && min.is_none() {
            return Err(sheet.ctx.schema(0, format!("missing column 'min_{}'", n.nutrient_id)));
        }
        if n.bound_kind.has_upper() && max.is_none() {
            return Err(sheet.ctx.schema(0, format!("missing column 'max_{}'", n.nutrient_id)));
        }
        cols.push(BoundCols { min, max });
    }

    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let group_id = sheet.field(rec, c_group, row)?.to_string();
        if !seen.insert(group_id.clone()) {
            return Err(sheet.ctx.referential(row, format!("duplicate group_id '{group_id}'")));
        }
        let energy_kcal = sheet.parse_f64(rec, c_energy, row)?;
        if !(energy_kcal > 0.0) {
            return Err(sheet.ctx.unit(row, format!("energy_kcal must be > 0, got {energy_kcal}")));
        }
        let mut min_need = vec![None; nutrients.len()];
        let mut max_tolerance = vec![None; nutrients.len()];
        for (j, n) in nutrients.iter().enumerate() {
            let get = |col: Option<usize>| -> Result<Option<f64>, DataError> {
                match col {
                    None => Ok(None),
                    Some(c) => {
                        let raw = sheet.field(rec, c, row)?;
                        if raw.is_empty() {
                            Ok(None)
                        } else {
                            Ok(Some(sheet.parse_f64(rec, c, row)?))
                        }
                    }
                }
            };
            let min = get(cols[j].min)?;
            let max = get(cols[j].max)?;
            // Bounds must exist exactly where the catalog says they do.
            if n.bound_kind.has_lower() != min.is_some() {
                return Err(sheet.ctx.schema(
                    row,
                    format!(
                        "nutrient '{}' ({}) {} a min bound",
                        n.nutrient_id,
                        n.bound_kind.as_str(),
                        if min.is_some() { "must not carry" } else { "requires" }
                    ),
                ));
            }
            if n.bound_kind.has_upper() != max.is_some() {
                return Err(sheet.ctx.schema(
                    row,
                    format!(
                        "nutrient '{}' ({}) {} a max bound",
                        n.nutrient_id,
                        n.bound_kind.as_str(),
                        if max.is_some() { "must not carry" } else { "requires" }
                    ),
                ));
            }
            if let (Some(lo), Some(hi)) = (min, max) {
                if lo > hi {
                    return Err(sheet.ctx.unit(
                        row,
                        format!("nutrient '{}': min {lo} exceeds max {hi}", n.nutrient_id),
                    ));
                }
            }
            if let Some(v) = min {
                if !v.is_finite() || v < 0.0 {
                    return Err(sheet.ctx.unit(row, format!("min_{} must be >= 0", n.nutrient_id)));
                }
            }
            if let Some(v) = max {
                if !v.is_finite() || v < 0.0 {
                    return Err(sheet.ctx.unit(row, format!("max_{} must be >= 0", n.nutrient_id)));
                }
            }
            min_need[j] = min;
            max_tolerance[j] = max;
        }
        rows.push(RequirementRow {
            group_id,
            energy_kcal,
            min_need,
            max_tolerance,
        });
    }
    Ok(RequirementTable::new(rows))
}

fn load_households(
    households_path: &Path,
    members_path: &Path,
    market_map: &BTreeMap<String, String>,
) -> Result<Vec<HouseholdRecord>, DataError> {
    let sheet = Sheet::read(households_path)?;
    let c_id = sheet.col("household_id")?;
    let c_district = sheet.col("district_id")?;
    let c_year = sheet.col("survey_year")?;
    let c_month = sheet.col("survey_month")?;
    let c_food = sheet.col("food_exp_day")?;
    let c_total = sheet.col("total_exp_day")?;
    let c_weight = sheet.col("weight")?;
    let c_cluster = sheet.opt_col("cluster_id");

    let mut households = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let household_id = sheet.field(rec, c_id, row)?.to_string();
        let survey_year = sheet.parse_i64(rec, c_year, row)? as i32;
        if !seen.insert((household_id.clone(), survey_year)) {
            return Err(sheet.ctx.referential(
                row,
                format!("duplicate household ('{household_id}', {survey_year})"),
            ));
        }
        let district_id = sheet.field(rec, c_district, row)?.to_string();
        if !market_map.contains_key(&district_id) {
            return Err(sheet.ctx.referential(
                row,
                format!("district '{district_id}' has no market in market_map"),
            ));
        }
        let survey_month = sheet.parse_i64(rec, c_month, row)?;
        let survey_month = u8::try_from(survey_month)
            .ok()
            .filter(|m| (1..=12).contains(m))
            .ok_or_else(|| sheet.ctx.schema(row, format!("survey_month must be 1-12, got {survey_month}")))?;
        let food_exp_day = sheet.parse_f64(rec, c_food, row)?;
        let total_exp_day = sheet.parse_f64(rec, c_total, row)?;
        if !(food_exp_day > 0.0) || total_exp_day < food_exp_day {
            return Err(sheet.ctx.unit(
                row,
                format!("need total_exp_day >= food_exp_day > 0, got {total_exp_day} and {food_exp_day}"),
            ));
        }
        let sampling_weight = sheet.parse_f64(rec, c_weight, row)?;
        if !(sampling_weight > 0.0) {
            return Err(sheet.ctx.unit(row, format!("weight must be > 0, got {sampling_weight}")));
        }
        let cluster_id = match c_cluster {
            Some(c) => {
                let raw = sheet.field(rec, c, row)?;
                (!raw.is_empty()).then(|| raw.to_string())
            }
            None => None,
        };
        households.push(HouseholdRecord {
            household_id,
            district_id,
            survey_year,
            survey_month,
            food_exp_day,
            total_exp_day,
            sampling_weight,
            cluster_id,
            members: Vec::new(),
        });
    }
    households.sort_by(|a, b| {
        (a.household_id.as_str(), a.survey_year).cmp(&(b.household_id.as_str(), b.survey_year))
    });

    // Members attach by household_id, plus survey_year when the household
    // appears in more than one wave (the optional column disambiguates).
    let msheet = Sheet::read(members_path)?;
    let mc_hh = msheet.col("household_id")?;
    let mc_person = msheet.col("person_id")?;
    let mc_age = msheet.col("age_months")?;
    let mc_sex = msheet.col("sex")?;
    let mc_lact = msheet.col("lactating")?;
    let mc_share = msheet.col("meals_share")?;
    let mc_year = msheet.opt_col("survey_year");

    let mut waves_of: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, hh) in households.iter().enumerate() {
        waves_of.entry(hh.household_id.clone()).or_default().push(i);
    }

    for (i, rec) in msheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let hh_id = msheet.field(rec, mc_hh, row)?.to_string();
        let waves = waves_of
            .get(hh_id.as_str())
            .ok_or_else(|| msheet.ctx.referential(row, format!("unknown household_id '{hh_id}'")))?;
        let target = if waves.len() == 1 {
            waves[0]
        } else {
            let col = mc_year.ok_or_else(|| {
                msheet.ctx.schema(
                    row,
                    format!("household '{hh_id}' has multiple waves; members.csv needs a survey_year column"),
                )
            })?;
            let year = msheet.parse_i64(rec, col, row)? as i32;
            *waves
                .iter()
                .find(|&&w| households[w].survey_year == year)
                .ok_or_else(|| {
                    msheet
                        .ctx
                        .referential(row, format!("household '{hh_id}' has no wave surveyed in {year}"))
                })?
        };

        let age_months = msheet.parse_i64(rec, mc_age, row)?;
        if age_months < 0 {
            return Err(msheet.ctx.unit(row, format!("age_months must be >= 0, got {age_months}")));
        }
        let sex = match msheet.field(rec, mc_sex, row)? {
            "M" | "m" => Sex::M,
            "F" | "f" => Sex::F,
            other => return Err(msheet.ctx.schema(row, format!("sex must be M or F, got {other:?}"))),
        };
        let lactating = match msheet.field(rec, mc_lact, row)? {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                return Err(msheet.ctx.schema(row, format!("lactating must be 0/1, got {other:?}")))
            }
        };
        let age_months = age_months as u32;
        if lactating {
            let (lo, hi) = requirements::lactation_age_range();
            if sex != Sex::F || age_months < lo || age_months >= hi {
                return Err(msheet.ctx.unit(
                    row,
                    "lactating flag outside the female 14-50 y requirement groups".to_string(),
                ));
            }
        }
        let meals_share = msheet.parse_f64(rec, mc_share, row)?;
        if !(0.0..=1.0).contains(&meals_share) {
            return Err(msheet.ctx.unit(row, format!("meals_share must be in [0,1], got {meals_share}")));
        }
        households[target].members.push(MemberRecord {
            person_id: msheet.field(rec, mc_person, row)?.to_string(),
            age_months,
            sex,
            lactating,
            meals_share,
        });
    }

    for hh in &households {
        if hh.members.is_empty() {
            return Err(DataError::Referential {
                file: households_path.display().to_string(),
                row: 0,
                msg: format!(
                    "household ('{}', {}) has no members",
                    hh.household_id, hh.survey_year
                ),
            });
        }
    }
    Ok(households)
}

fn load_ppp(path: &Path) -> Result<BTreeMap<i32, f64>, DataError> {
    let sheet = Sheet::read(path)?;
    let c_year = sheet.col("year")?;
    let c_factor = sheet.col("factor")?;
    let mut out = BTreeMap::new();
    for (i, rec) in sheet.records.iter().enumerate() {
        let row = i as u64 + 1;
        let year = sheet.parse_i64(rec, c_year, row)? as i32;
        let factor = sheet.parse_f64(rec, c_factor, row)?;
        if !(factor > 0.0) {
            return Err(sheet.ctx.unit(row, format!("factor must be > 0, got {factor}")));
        }
        if out.insert(year, factor).is_some() {
            return Err(sheet.ctx.referential(row, format!("duplicate year {year}")));
        }
    }
    Ok(out)
}

/// Load and cross-validate the full file set.
pub fn load_catalog(paths: &DataPaths) -> Result<Dataset, DataError> {
    let (nutrients, energy_idx) = load_nutrients(&paths.nutrients)?;
    let foods = load_foods(&paths.foods, &nutrients)?;
    let market_map = load_market_map(&paths.market_map)?;
    let markets: BTreeSet<String> = market_map.values().cloned().collect();
    let prices = load_prices(&paths.prices, &foods, &markets)?;
    let requirements = load_requirements(&paths.requirements, &nutrients)?;
    let households = load_households(&paths.households, &paths.members, &market_map)?;
    let ppp_annual = match &paths.ppp_annual {
        Some(p) => load_ppp(p)?,
        None => BTreeMap::new(),
    };
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
