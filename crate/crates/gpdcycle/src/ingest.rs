//! Input parsing: the `year,income` microdata CSV and the key-value run
//! configuration (per-year minimum wages, optional per-year fixed
//! thresholds, cutoff fraction).

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::empirical::IncomeSample;
use crate::error::{Error, Result};

/// Parsed run configuration.
///
/// Format: one `key = value` pair per line, `#` comments allowed.
/// Recognized keys are `x_d_fraction`, `minwage.<year>`, and `xt.<year>`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Fraction of the annual minimum wage used as the
    /// effective-unemployment cutoff.
    pub x_d_fraction: f64,
    /// Annual minimum wage per year, in the same units as the raw incomes.
    pub minimum_wage: BTreeMap<i32, f64>,
    /// Optional user-supplied fixed threshold per year (normalized units);
    /// years present here skip the threshold search.
    pub fixed_threshold: BTreeMap<i32, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            x_d_fraction: 0.5,
            minimum_wage: BTreeMap::new(),
            fixed_threshold: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{raw}`"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{}` is not a number", value.trim()),
            })?;
            if key == "x_d_fraction" {
                if value.is_nan() || value <= 0.0 || value >= 1.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("x_d_fraction must lie in (0, 1), got {value}"),
                    });
                }
                cfg.x_d_fraction = value;
            } else if let Some(year) = key.strip_prefix("minwage.") {
                let year: i32 = year.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad year in `{key}`"),
                })?;
                if !value.is_finite() || value <= 0.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("minimum wage must be > 0, got {value}"),
                    });
                }
                cfg.minimum_wage.insert(year, value);
            } else if let Some(year) = key.strip_prefix("xt.") {
                let year: i32 = year.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad year in `{key}`"),
                })?;
                if !value.is_finite() || value <= 0.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("fixed threshold must be > 0, got {value}"),
                    });
                }
                cfg.fixed_threshold.insert(year, value);
            } else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Read `year,income` rows from a CSV stream into per-year samples.
///
/// The header row is required and must name exactly those two columns.
/// Lines starting with `#` are treated as comments, so files that embed a
/// run manifest re-ingest cleanly.
pub fn read_income_csv<R: Read>(reader: R) -> Result<Vec<IncomeSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.len() != 2
        || !headers[0].eq_ignore_ascii_case("year")
        || !headers[1].eq_ignore_ascii_case("income")
    {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `year,income`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let year: i32 = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{}` is not a year", &record[0]),
        })?;
        let income: f64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{}` is not a number", &record[1]),
        })?;
        if !income.is_finite() || income < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("income must be finite and nonnegative, got {income}"),
            });
        }
        by_year.entry(year).or_default().push(income);
    }

    if by_year.is_empty() {
        return Err(Error::data("input contains no data rows"));
    }
    by_year
        .into_iter()
        .map(|(year, values)| IncomeSample::new(year, values))
        .collect()
}

/// Open and read a `year,income` CSV file.
pub fn read_income_csv_file(path: &Path) -> Result<Vec<IncomeSample>> {
    let file = std::fs::File::open(path)?;
    read_income_csv(std::io::BufReader::new(file))
}

fn csv_error(err: csv::Error) -> Error {
    let line = match err.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::Parse {
        line,
        message: err.to_string(),
    }
}
