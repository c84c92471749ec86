//! Price-availability counts: how many markets observed a price for each item
//! in each month.

use super::Dataset;
use crate::time::YearMonth;

#[derive(Clone, PartialEq, Debug)]
pub struct AvailabilityCell {
    pub item_id: String,
    pub ym: YearMonth,
    pub n_markets_observed: usize,
}

/// Count per (item, year-month) the markets with an observed price. The grid
/// covers every item over `horizon`, defaulting to the observed price span;
/// items never priced produce all-zero rows.
pub fn availability_matrix(
    ds: &Dataset,
    horizon: Option<(YearMonth, YearMonth)>,
) -> Vec<AvailabilityCell> {
    let Some((start, end)) = horizon.or_else(|| ds.price_span()) else {
        return Vec::new();
    };
    let n_months = (end.index() - start.index() + 1).max(0) as usize;
    let mut counts = vec![0usize; ds.foods.len() * n_months];
    for by_month in ds.prices.values() {
        for (ym, rows) in by_month.range(start..=end) {
            let t = (ym.index() - start.index()) as usize;
            for (food, _) in rows {
                counts[food * n_months + t] += 1;
            }
        }
    }
    let mut out = Vec::with_capacity(counts.len());
    for (f, food) in ds.foods.iter().enumerate() {
        for (t, ym) in YearMonth::range(start, end).enumerate() {
            out.push(AvailabilityCell {
                item_id: food.item_id.clone(),
                ym,
                n_markets_observed: counts[f * n_months + t],
            });
        }
    }
    out
}
