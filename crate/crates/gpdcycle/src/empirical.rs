//! Per-year income samples: normalization, empirical CDF, raw Gini, and
//! population-share statistics.

use crate::error::{Error, Result};
use crate::gpd::GpdParams;

/// One year's individual income observations.
///
/// `normalized` records whether the values have been divided by their
/// sample mean; `scale` keeps that divisor so thresholds quoted in
/// currency units (e.g. a statutory minimum wage) can be mapped into
/// normalized units later.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomeSample {
    year: i32,
    values: Vec<f64>,
    normalized: bool,
    scale: Option<f64>,
}

/// Minimum number of observations required before fitting is attempted.
pub const MIN_FIT_OBSERVATIONS: usize = 100;

impl IncomeSample {
    /// Wrap raw (currency- or otherwise-scaled) observations for a year.
    pub fn new(year: i32, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::data(format!("year {year}: empty sample")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::data(format!(
                "year {year}: incomes must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self {
            year,
            values,
            normalized: false,
            scale: None,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// The mean divided out by [`normalize`](Self::normalize), if any.
    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Divide every value by the sample mean so the output has unit mean.
    /// Order is preserved. Errors on an already-normalized sample or a
    /// zero-mean one.
    pub fn normalize(&self) -> Result<IncomeSample> {
        if self.normalized {
            return Err(Error::data(format!(
                "year {}: sample is already normalized",
                self.year
            )));
        }
        let mean = self.mean();
        if !mean.is_finite() || mean <= 0.0 {
            return Err(Error::data(format!(
                "year {}: cannot normalize a sample with mean {mean}",
                self.year
            )));
        }
        Ok(IncomeSample {
            year: self.year,
            values: self.values.iter().map(|v| v / mean).collect(),
            normalized: true,
            scale: Some(mean),
        })
    }

    /// Re-tag the sample with a different year. Useful when a sampler
    /// output is written into a per-year dataset.
    pub fn with_year(mut self, year: i32) -> Self {
        self.year = year;
        self
    }
}

/// Per-year external configuration: the statutory annual minimum wage in
/// the same currency units as the raw incomes, and the fraction of it
/// used as the effective-unemployment cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearConfig {
    pub year: i32,
    pub annual_minimum_wage: f64,
    pub x_d_fraction: f64,
}

impl YearConfig {
    pub fn new(year: i32, annual_minimum_wage: f64, x_d_fraction: f64) -> Result<Self> {
        if !annual_minimum_wage.is_finite() || annual_minimum_wage <= 0.0 {
            return Err(Error::invalid(
                "annual_minimum_wage",
                annual_minimum_wage,
                "must be > 0",
            ));
        }
        if x_d_fraction.is_nan() || x_d_fraction <= 0.0 || x_d_fraction >= 1.0 {
            return Err(Error::invalid("x_d_fraction", x_d_fraction, "must lie in (0, 1)"));
        }
        Ok(Self {
            year,
            annual_minimum_wage,
            x_d_fraction,
        })
    }

    /// Minimum wage in normalized income units given the year's mean income.
    pub fn minimum_wage_normalized(&self, mean_income: f64) -> f64 {
        self.annual_minimum_wage / mean_income
    }

    /// Effective-unemployment cutoff in normalized units.
    pub fn x_d_normalized(&self, mean_income: f64) -> f64 {
        self.x_d_fraction * self.annual_minimum_wage / mean_income
    }
}

/// Right-continuous empirical CDF of a normalized sample, queryable at
/// any income.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_sample(sample: &IncomeSample) -> Result<Self> {
        if !sample.is_normalized() {
            return Err(Error::data(format!(
                "year {}: empirical CDF expects a normalized sample",
                sample.year()
            )));
        }
        let mut sorted = sample.values().to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of observations less than or equal to `x`.
    pub fn query(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|v| *v <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Unique observed values paired with the CDF evaluated at each,
    /// so ties collapse to a single step.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.sorted.len());
        for (i, &x) in self.sorted.iter().enumerate() {
            let height = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = height,
                _ => out.push((x, height)),
            }
        }
        out
    }
}

/// Gini coefficient straight from the observations, by the sorted-data
/// formula `G = 2 sum(i x_(i)) / (n sum x) - (n + 1)/n`.
pub fn gini_raw(sample: &IncomeSample) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::data("raw Gini needs at least 2 observations"));
    }
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::data("raw Gini undefined for an all-zero sample"));
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (i + 1) as f64 * x)
        .sum();
    let n_f = n as f64;
    Ok(2.0 * weighted / (n_f * total) - (n_f + 1.0) / n_f)
}

/// Empirical population shares below the effective-unemployment cutoff,
/// the minimum wage, and the distribution threshold, in that order.
pub fn population_shares(
    sample: &IncomeSample,
    cfg: &YearConfig,
    params: &GpdParams,
) -> Result<(f64, f64, f64)> {
    if !sample.is_normalized() {
        return Err(Error::data("population shares expect a normalized sample"));
    }
    let mean_income = sample.scale().ok_or_else(|| {
        Error::data("normalized sample has no recorded scale; normalize() the raw sample first")
    })?;
    let x_d = cfg.x_d_normalized(mean_income);
    let minimum_wage = cfg.minimum_wage_normalized(mean_income);
    let threshold = params.threshold();
    if x_d >= minimum_wage || minimum_wage > threshold {
        return Err(Error::domain(format!(
            "thresholds must ascend: x_d {x_d} < minimum wage {minimum_wage} <= threshold {threshold}"
        )));
    }
    let cdf = EmpiricalCdf::from_sample(sample)?;
    Ok((cdf.query(x_d), cdf.query(minimum_wage), cdf.query(threshold)))
}
