//! Dataset serialization back to the CSV layout the loader reads.

use super::{DataError, Dataset};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, DataError> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| DataError::Io {
            file: path.display().to_string(),
            source,
        })
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        file: path.display().to_string(),
        source,
    }
}

/// Per-100g value whose load-time conversion (x10) reproduces `per_kg`
/// bit-exactly. `per_kg / 10.0` can be one ulp off the true preimage, so
/// probe the neighbors.
fn per_100g_repr(per_kg: f64) -> f64 {
    let u = per_kg / 10.0;
    if u * 10.0 == per_kg || per_kg == 0.0 {
        return u;
    }
    let bits = u.to_bits();
    for candidate in [bits + 1, bits - 1, bits + 2, bits - 2] {
        let c = f64::from_bits(candidate);
        if c * 10.0 == per_kg {
            return c;
        }
    }
    u
}

/// Write all dataset files into `dir`. Inverse of `load_catalog` up to field
/// order: load(write(ds)) == ds.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<(), DataError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let path = dir.join("nutrients.csv");
    let mut w = create(&path)?;
    writeln!(w, "nutrient_id,name,unit,bound_kind").map_err(|e| io_err(&path, e))?;
    for n in &ds.nutrients {
        writeln!(w, "{},{},{},{}", n.nutrient_id, n.name, n.unit, n.bound_kind.as_str())
            .map_err(|e| io_err(&path, e))?;
    }

    let path = dir.join("foods.csv");
    let mut w = create(&path)?;
    let nutrient_headers: Vec<&str> = ds.nutrients.iter().map(|n| n.nutrient_id.as_str()).collect();
    writeln!(w, "item_id,name,food_group,{}", nutrient_headers.join(","))
        .map_err(|e| io_err(&path, e))?;
    for f in &ds.foods {
        let contents: Vec<String> = f
            .nutrient_content
            .iter()
            .map(|v| format!("{}", per_100g_repr(*v))) // stored per kg, written per 100 g
            .collect();
        writeln!(w, "{},{},{},{}", f.item_id, f.name, f.food_group, contents.join(","))
            .map_err(|e| io_err(&path, e))?;
    }

    let path = dir.join("prices.csv");
    let mut w = create(&path)?;
    writeln!(w, "market_id,year,month,item_id,price_per_kg").map_err(|e| io_err(&path, e))?;
    for (market, by_month) in &ds.prices {
        for (ym, rows) in by_month {
            for (food, price) in rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    market, ym.year, ym.month, ds.foods[*food].item_id, price
                )
                .map_err(|e| io_err(&path, e))?;
            }
        }
    }

    let path = dir.join("market_map.csv");
    let mut w = create(&path)?;
    writeln!(w, "district_id,market_id").map_err(|e| io_err(&path, e))?;
    for (district, market) in &ds.market_map {
        writeln!(w, "{district},{market}").map_err(|e| io_err(&path, e))?;
    }

    let multi_wave: BTreeSet<&str> = {
        let mut counts = std::collections::BTreeMap::new();
        for hh in &ds.households {
            *counts.entry(hh.household_id.as_str()).or_insert(0usize) += 1;
        }
        counts.into_iter().filter(|(_, c)| *c > 1).map(|(id, _)| id).collect()
    };
    let any_cluster = ds.households.iter().any(|h| h.cluster_id.is_some());

    let path = dir.join("households.csv");
    let mut w = create(&path)?;
    if any_cluster {
        writeln!(w, "household_id,district_id,survey_year,survey_month,food_exp_day,total_exp_day,weight,cluster_id")
            .map_err(|e| io_err(&path, e))?;
    } else {
        writeln!(w, "household_id,district_id,survey_year,survey_month,food_exp_day,total_exp_day,weight")
            .map_err(|e| io_err(&path, e))?;
    }
    for hh in &ds.households {
        let base = format!(
            "{},{},{},{},{},{},{}",
            hh.household_id,
            hh.district_id,
            hh.survey_year,
            hh.survey_month,
            hh.food_exp_day,
            hh.total_exp_day,
            hh.sampling_weight
        );
        if any_cluster {
            writeln!(w, "{base},{}", hh.cluster_id.as_deref().unwrap_or(""))
                .map_err(|e| io_err(&path, e))?;
        } else {
            writeln!(w, "{base}").map_err(|e| io_err(&path, e))?;
        }
    }

    let path = dir.join("members.csv");
    let mut w = create(&path)?;
    let need_wave_col = !multi_wave.is_empty();
    if need_wave_col {
        writeln!(w, "household_id,person_id,age_months,sex,lactating,meals_share,survey_year")
            .map_err(|e| io_err(&path, e))?;
    } else {
        writeln!(w, "household_id,person_id,age_months,sex,lactating,meals_share")
            .map_err(|e| io_err(&path, e))?;
    }
    for hh in &ds.households {
        for m in &hh.members {
            let base = format!(
                "{},{},{},{},{},{}",
                hh.household_id,
                m.person_id,
                m.age_months,
                m.sex.as_str(),
                if m.lactating { 1 } else { 0 },
                m.meals_share
            );
            if need_wave_col {
                writeln!(w, "{base},{}", hh.survey_year).map_err(|e| io_err(&path, e))?;
            } else {
                writeln!(w, "{base}").map_err(|e| io_err(&path, e))?;
            }
        }
    }

    let path = dir.join("requirements.csv");
    let mut w = create(&path)?;
    let mut header = vec!["group_id".to_string(), "energy_kcal".to_string()];
    for n in &ds.nutrients {
        if n.bound_kind.has_lower() {
            header.push(format!("min_{}", n.nutrient_id));
        }
    }
    for n in &ds.nutrients {
        if n.bound_kind.has_upper() {
            header.push(format!("max_{}", n.nutrient_id));
        }
    }
    writeln!(w, "{}", header.join(",")).map_err(|e| io_err(&path, e))?;
    for row in ds.requirements.rows() {
        let mut fields = vec![row.group_id.clone(), format!("{}", row.energy_kcal)];
        for (j, n) in ds.nutrients.iter().enumerate() {
            if n.bound_kind.has_lower() {
                fields.push(row.min_need[j].map(|v| format!("{v}")).unwrap_or_default());
            }
        }
        for (j, n) in ds.nutrients.iter().enumerate() {
            if n.bound_kind.has_upper() {
                fields.push(row.max_tolerance[j].map(|v| format!("{v}")).unwrap_or_default());
            }
        }
        writeln!(w, "{}", fields.join(",")).map_err(|e| io_err(&path, e))?;
    }

    if !ds.ppp_annual.is_empty() {
        let path = dir.join("ppp_annual.csv");
        let mut w = create(&path)?;
        writeln!(w, "year,factor").map_err(|e| io_err(&path, e))?;
        for (year, factor) in &ds.ppp_annual {
            writeln!(w, "{year},{factor}").map_err(|e| io_err(&path, e))?;
        }
    }

    Ok(())
}
