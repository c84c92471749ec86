//! Denton benchmarking: distribute annual conversion factors over months.
//!
//! Proportional first-difference variant with an average benchmark: the
//! monthly series minimizes the sum of squared proportional first differences
//! while each calendar year's twelve values average to that year's annual
//! factor. With no sub-annual indicator the proportional objective is
//! linearized at a constant level, reducing it to squared first differences;
//! the resulting equality-constrained least-squares system is solved exactly.
//! (Linearizing against the step series instead would make the step series
//! itself a zero-roughness solution, defeating the smoothing.)

use crate::time::YearMonth;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DentonError {
    #[error("no annual factors supplied")]
    Empty,
    #[error("annual factors must be contiguous; missing year {0}")]
    MissingYear(i32),
    #[error("annual factor for {year} must be > 0, got {value}")]
    NonPositive { year: i32, value: f64 },
    #[error("benchmark system could not be solved")]
    Singular,
}

/// Monthly currency-to-PPP conversion factors.
#[derive(Clone, PartialEq, Debug)]
pub struct PppFactorSeries {
    factors: BTreeMap<YearMonth, f64>,
}

impl PppFactorSeries {
    /// Flat series: factor 1 for every month (used when no annual factors are
    /// supplied and costs stay in nominal currency).
    pub fn unit(start: YearMonth, end: YearMonth) -> Self {
        PppFactorSeries {
            factors: YearMonth::range(start, end).map(|ym| (ym, 1.0)).collect(),
        }
    }

    pub fn get(&self, ym: YearMonth) -> Option<f64> {
        self.factors.get(&ym).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (YearMonth, f64)> + '_ {
        self.factors.iter().map(|(ym, f)| (*ym, *f))
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Sum of squared proportional first differences, the smoothness metric the
/// benchmark minimizes.
pub fn roughness(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| {
            let r = w[1] / w[0] - 1.0;
            r * r
        })
        .sum()
}

/// Smooth annual factors into a monthly series whose yearly means reproduce
/// the annual values.
pub fn denton_monthly_factors(
    annual: &BTreeMap<i32, f64>,
) -> Result<PppFactorSeries, DentonError> {
    if annual.is_empty() {
        return Err(DentonError::Empty);
    }
    let first_year = *annual.keys().next().unwrap();
    let last_year = *annual.keys().last().unwrap();
    let mut a = Vec::new();
    for year in first_year..=last_year {
        let v = *annual.get(&year).ok_or(DentonError::MissingYear(year))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(DentonError::NonPositive { year, value: v });
        }
        a.push(v);
    }
    let n_years = a.len();
    let t = 12 * n_years;

    // KKT system for min ||M x||^2 s.t. C x = 12 a, where row i of M is
    // x_{i+1} - x_i.
    let dim = t + n_years;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    // 2 M^T M block.
    for i in 0..t - 1 {
        kkt[(i, i)] += 2.0;
        kkt[(i + 1, i + 1)] += 2.0;
        kkt[(i, i + 1)] += -2.0;
        kkt[(i + 1, i)] += -2.0;
    }
    // Constraint blocks.
    for y in 0..n_years {
        for month in 0..12 {
            let col = 12 * y + month;
            kkt[(t + y, col)] = 1.0;
            kkt[(col, t + y)] = 1.0;
        }
        rhs[t + y] = 12.0 * a[y];
    }

    let sol = kkt.lu().solve(&rhs).ok_or(DentonError::Singular)?;
    let mut factors = BTreeMap::new();
    for (i, ym) in YearMonth::range(
        YearMonth { year: first_year, month: 1 },
        YearMonth { year: last_year, month: 12 },
    )
    .enumerate()
    {
        let v = sol[i];
        if !(v > 0.0) || !v.is_finite() {
            return Err(DentonError::Singular);
        }
        factors.insert(ym, v);
    }
    Ok(PppFactorSeries { factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annual(pairs: &[(i32, f64)]) -> BTreeMap<i32, f64> {
        pairs.iter().copied().collect()
    }

    fn yearly_means(series: &PppFactorSeries) -> BTreeMap<i32, f64> {
        let mut sums: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
        for (ym, v) in series.iter() {
            let e = sums.entry(ym.year).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        sums.into_iter().map(|(y, (s, n))| (y, s / n as f64)).collect()
    }

    #[test]
    fn constant_input_constant_output() {
        let series = denton_monthly_factors(&annual(&[(2013, 80.0), (2014, 80.0)])).unwrap();
        assert_eq!(series.len(), 24);
        for (_, v) in series.iter() {
            assert!((v - 80.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_year_is_flat() {
        let series = denton_monthly_factors(&annual(&[(2015, 123.5)])).unwrap();
        assert_eq!(series.len(), 12);
        for (_, v) in series.iter() {
            assert!((v - 123.5).abs() < 1e-9);
        }
    }

    #[test]
    fn benchmarks_hold_and_path_is_smooth_monotone() {
        let series = denton_monthly_factors(&annual(&[(2013, 100.0), (2014, 112.0)])).unwrap();
        let means = yearly_means(&series);
        assert!((means[&2013] - 100.0).abs() / 100.0 < 1e-9);
        assert!((means[&2014] - 112.0).abs() / 112.0 < 1e-9);

        let values: Vec<f64> = series.iter().map(|(_, v)| v).collect();
        for w in values.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "path not monotone: {values:?}");
        }
        // Far smoother than repeating the annual values.
        let step: Vec<f64> = (0..24).map(|i| if i < 12 { 100.0 } else { 112.0 }).collect();
        assert!(roughness(&values) < roughness(&step));
        // The year-boundary step stays in line with neighboring steps instead
        // of absorbing the whole annual jump.
        let boundary = values[12] - values[11];
        let interior_max = values
            .windows(2)
            .enumerate()
            .filter(|(i, _)| *i != 11)
            .map(|(_, w)| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(boundary < 12.0 / 4.0, "boundary step {boundary} too large");
        assert!(boundary <= 2.0 * interior_max + 1e-9);
    }

    #[test]
    fn gaps_and_nonpositive_rejected() {
        let mut gapped = annual(&[(2013, 100.0), (2015, 120.0)]);
        assert!(matches!(
            denton_monthly_factors(&gapped),
            Err(DentonError::MissingYear(2014))
        ));
        gapped.insert(2014, -5.0);
        assert!(matches!(
            denton_monthly_factors(&gapped),
            Err(DentonError::NonPositive { year: 2014, .. })
        ));
        assert!(matches!(denton_monthly_factors(&annual(&[])), Err(DentonError::Empty)));
    }
}
