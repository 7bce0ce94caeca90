//! Wage-share / employment-rate series and Lotka-Volterra coefficient
//! estimation by regression on numerical derivatives.
//!
//! Units: `u` (wage share) and `v` (employment rate) are carried in
//! percent, matching how such series are reported. The regressions run
//! directly in percent space, so the recovered center lands in percent
//! and the period in years; `a1` and `a2` are intercept-derived rates
//! per year, making `T = 2 pi / sqrt(a1 a2)` unit-safe.

use crate::error::{Error, Result};
use crate::gpd::GpdParams;
use crate::sim::LvRates;

/// One year's `(u, v)` observation, both in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvPoint {
    pub year: i32,
    /// Wage share, percent in (0, 100).
    pub u: f64,
    /// Employment rate, percent in (0, 100).
    pub v: f64,
}

impl UvPoint {
    pub fn new(year: i32, u: f64, v: f64) -> Result<Self> {
        if u.is_nan() || u <= 0.0 || u >= 100.0 {
            return Err(Error::invalid("u", u, "wage share must lie in (0, 100) percent"));
        }
        if v.is_nan() || v <= 0.0 || v >= 100.0 {
            return Err(Error::invalid("v", v, "employment rate must lie in (0, 100) percent"));
        }
        Ok(Self { year, u, v })
    }
}

/// A year-ordered series of `(u, v)` points over consecutive years.
#[derive(Debug, Clone, PartialEq)]
pub struct UvSeries {
    points: Vec<UvPoint>,
}

impl UvSeries {
    pub fn new(points: Vec<UvPoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].year != w[0].year + 1) {
            return Err(Error::data("series years must be consecutive and ascending"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[UvPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Estimated cycle coefficients with the derived center and period.
///
/// The underlying dynamics are `du/u dt = -a1 + b1 v` and
/// `dv/v dt = a2 - b2 u`, so the center is `(u_c, v_c) = (a2/b2, a1/b1)`
/// and the period `2 pi / sqrt(a1 a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    /// Cycle center, wage share in percent.
    pub u_c: f64,
    /// Cycle center, employment rate in percent.
    pub v_c: f64,
    /// Cycle period in years.
    pub period: f64,
    /// Residual sum of squares of the `du/u dt` on `v` regression.
    pub r1_fit_rss: f64,
    /// Residual sum of squares of the `dv/v dt` on `u` regression.
    pub r2_fit_rss: f64,
}

impl LvCoefficients {
    pub fn from_rates(a1: f64, b1: f64, a2: f64, b2: f64) -> Self {
        Self {
            a1,
            b1,
            a2,
            b2,
            u_c: a2 / b2,
            v_c: a1 / b1,
            period: 2.0 * std::f64::consts::PI / (a1 * a2).sqrt(),
            r1_fit_rss: 0.0,
            r2_fit_rss: 0.0,
        }
    }

    /// The rates in simulator form (`x` employment, `y` wage share).
    pub fn rates(&self) -> LvRates {
        LvRates {
            a1: self.a1,
            b1: self.b1,
            a2: self.a2,
            b2: self.b2,
        }
    }
}

/// Structural growth-model parameters behind the cycle rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodwinStructuralParams {
    /// Capital productivity, `1/sigma`.
    pub sigma_inv: f64,
    /// Labor productivity growth rate.
    pub alpha_lp: f64,
    /// Population growth rate.
    pub beta_pg: f64,
    /// Slope of the wage-bargaining (Phillips) relation.
    pub rho: f64,
    /// Constant of the wage-bargaining relation.
    pub gamma: f64,
}

impl GoodwinStructuralParams {
    pub fn new(sigma_inv: f64, alpha_lp: f64, beta_pg: f64, rho: f64, gamma: f64) -> Result<Self> {
        if !sigma_inv.is_finite() || sigma_inv <= 0.0 {
            return Err(Error::invalid("sigma_inv", sigma_inv, "capital productivity must be > 0"));
        }
        Ok(Self {
            sigma_inv,
            alpha_lp,
            beta_pg,
            rho,
            gamma,
        })
    }
}

/// Map structural parameters onto cycle rates:
/// `a1 = alpha + gamma`, `b1 = rho`, `a2 = 1/sigma - (alpha + beta)`,
/// `b2 = 1/sigma`. Returns the raw rates; `a2 <= 0` (no growth regime)
/// is legal here and left to the caller to interpret.
pub fn structural_to_lv(g: &GoodwinStructuralParams) -> LvRates {
    LvRates {
        a1: g.alpha_lp + g.gamma,
        b1: g.rho,
        a2: g.sigma_inv - (g.alpha_lp + g.beta_pg),
        b2: g.sigma_inv,
    }
}

/// Invert [`structural_to_lv`] given externally supplied productivity and
/// population growth rates (the system is underdetermined without them).
/// Returns the structural parameters and the consistency residual
/// `a2 - (1/sigma - (alpha + beta))`, which is zero when the inputs are
/// mutually consistent.
pub fn lv_to_structural(
    c: &LvRates,
    alpha_lp: f64,
    beta_pg: f64,
) -> (GoodwinStructuralParams, f64) {
    let params = GoodwinStructuralParams {
        sigma_inv: c.b2,
        alpha_lp,
        beta_pg,
        rho: c.b1,
        gamma: c.a1 - alpha_lp,
    };
    let residual = c.a2 - (c.b2 - (alpha_lp + beta_pg));
    (params, residual)
}

/// Compute one year's `(u, v)` from a fitted distribution and the
/// effective-unemployment cutoff `x_d` (normalized units):
/// `v = 100 (1 - F(x_d))` and `u = 100 F1(x_t)`, the income share of the
/// body segment.
pub fn uv_from_fit(params: &GpdParams, x_d: f64, year: i32) -> Result<UvPoint> {
    if x_d.is_nan() || x_d <= 0.0 || x_d >= params.threshold() {
        return Err(Error::domain(format!(
            "x_d must lie in (0, threshold = {}), got {x_d}",
            params.threshold()
        )));
    }
    let v = 100.0 * (1.0 - params.cdf(x_d)?);
    let u = 100.0 * (params.partial_mean(params.threshold())? / params.mean()?);
    UvPoint::new(year, u, v)
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    let slope = cov / var;
    let intercept = mean_y - slope * mean_x;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, intercept, rss)
}

/// Per-year relative growth rates of a series: second-order central
/// differences in the interior, second-order one-sided at the ends,
/// with a one-year time step.
fn log_derivatives(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let dv = if i == 0 {
            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / 2.0
        } else if i == n - 1 {
            (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / 2.0
        } else {
            (values[i + 1] - values[i - 1]) / 2.0
        };
        out.push(dv / values[i]);
    }
    out
}

/// Per-year rows of the derivative regressions: the growth rates and the
/// regressors they are paired with. Emitted alongside the coefficients so
/// the regression scatter can be plotted or audited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeRow {
    pub year: i32,
    pub u: f64,
    pub v: f64,
    /// du/u per year.
    pub du_over_u: f64,
    /// dv/v per year.
    pub dv_over_v: f64,
}

/// Build the per-year derivative table for a series.
pub fn derivative_table(series: &UvSeries) -> Result<Vec<DerivativeRow>> {
    if series.len() < 3 {
        return Err(Error::data("derivative table needs at least 3 points"));
    }
    let us: Vec<f64> = series.points().iter().map(|p| p.u).collect();
    let vs: Vec<f64> = series.points().iter().map(|p| p.v).collect();
    let du = log_derivatives(&us);
    let dv = log_derivatives(&vs);
    Ok(series
        .points()
        .iter()
        .zip(du.iter().zip(&dv))
        .map(|(p, (du_u, dv_v))| DerivativeRow {
            year: p.year,
            u: p.u,
            v: p.v,
            du_over_u: *du_u,
            dv_over_v: *dv_v,
        })
        .collect())
}

/// Estimate cycle coefficients from a `(u, v)` series.
///
/// Ordinary least squares of `du/u dt` on `v` yields slope `b1` and
/// intercept `-a1`; of `dv/v dt` on `u` yields slope `-b2` and intercept
/// `a2`. A slope with the wrong sign for a counter-clockwise cycle aborts
/// with diagnostics rather than being silently negated.
pub fn estimate_lv(series: &UvSeries) -> Result<LvCoefficients> {
    if series.len() < 5 {
        return Err(Error::data(format!(
            "cycle estimation needs at least 5 consecutive years, got {}",
            series.len()
        )));
    }
    let rows = derivative_table(series)?;
    let us: Vec<f64> = rows.iter().map(|r| r.u).collect();
    let vs: Vec<f64> = rows.iter().map(|r| r.v).collect();
    let du: Vec<f64> = rows.iter().map(|r| r.du_over_u).collect();
    let dv: Vec<f64> = rows.iter().map(|r| r.dv_over_v).collect();

    let (slope_u, intercept_u, r1_rss) = ols(&vs, &du);
    let (slope_v, intercept_v, r2_rss) = ols(&us, &dv);

    let b1 = slope_u;
    let a1 = -intercept_u;
    let b2 = -slope_v;
    let a2 = intercept_v;

    if b1.is_nan() || b2.is_nan() || b1 <= 0.0 || b2 <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "regression slopes have the wrong sign for a cycle: \
             du/u on v slope = {slope_u} (want > 0), dv/v on u slope = {slope_v} (want < 0)"
        )));
    }
    if a1.is_nan() || a2.is_nan() || a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "regression intercepts have the wrong sign for a cycle: a1 = {a1}, a2 = {a2}"
        )));
    }

    Ok(LvCoefficients {
        a1,
        b1,
        a2,
        b2,
        u_c: a2 / b2,
        v_c: a1 / b1,
        period: 2.0 * std::f64::consts::PI / (a1 * a2).sqrt(),
        r1_fit_rss: r1_rss,
        r2_fit_rss: r2_rss,
    })
}
