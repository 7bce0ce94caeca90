//! Two-segment income distribution: Gompertz body below a threshold,
//! Pareto tail above it, joined continuously at the threshold.
//!
//! Incomes are expressed in unit-mean normalized units throughout; all
//! probabilities stay in [0, 1]. Conversion to percent happens at the
//! reporting boundary, never here.

use crate::error::{Error, Result};
use crate::quad;

/// Absolute tolerance for the quadratures behind `partial_mean` and `gini`.
pub const QUAD_TOL: f64 = 1e-9;

/// Parameters of the two-segment income distribution.
///
/// Below the threshold `x_t` the cumulative distribution is the Gompertz
/// curve `G(x) = 1 - exp(-eta (e^{bx} - 1))`; at and above `x_t` it is the
/// Pareto curve `P(x) = 1 - pareto_scale * x^{-alpha}`. The scale constant
/// is fixed by continuity at the threshold, so `G(x_t) = P(x_t)` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdParams {
    threshold: f64,
    eta: f64,
    b: f64,
    alpha: f64,
    pareto_scale: f64,
}

impl GpdParams {
    /// Build a parameter set, deriving the Pareto scale from continuity.
    ///
    /// Requires `threshold > 0`, `eta > 0`, `b > 0` and `alpha > 1`
    /// (a finite mean needs `alpha > 1`).
    pub fn new(threshold: f64, eta: f64, b: f64, alpha: f64) -> Result<Self> {
        if !threshold.is_finite() || threshold <= 0.0 {
            return Err(Error::invalid("threshold", threshold, "must be finite and > 0"));
        }
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::invalid("eta", eta, "must be finite and > 0"));
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::invalid("b", b, "must be finite and > 0"));
        }
        if !alpha.is_finite() || alpha <= 1.0 {
            return Err(Error::invalid("alpha", alpha, "must be finite and > 1 for a finite mean"));
        }
        let tail_mass = (-eta * ((b * threshold).exp() - 1.0)).exp();
        let pareto_scale = threshold.powf(alpha) * tail_mass;
        if !pareto_scale.is_finite() || pareto_scale <= 0.0 {
            return Err(Error::invalid(
                "pareto_scale",
                pareto_scale,
                "continuity constant degenerate; threshold or rate too large",
            ));
        }
        Ok(Self {
            threshold,
            eta,
            b,
            alpha,
            pareto_scale,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The continuity constant multiplying `x^{-alpha}` in the tail.
    pub fn pareto_scale(&self) -> f64 {
        self.pareto_scale
    }

    /// Survival of the Gompertz segment: `exp(-eta (e^{bx} - 1))`.
    #[inline]
    fn gompertz_survival(&self, x: f64) -> f64 {
        (-self.eta * ((self.b * x).exp() - 1.0)).exp()
    }

    /// Probability mass at or above the threshold, `1 - F(x_t)`.
    #[inline]
    pub fn tail_mass(&self) -> f64 {
        self.gompertz_survival(self.threshold)
    }

    /// Cumulative distribution at `x >= 0`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::domain(format!("cdf requires x >= 0, got {x}")));
        }
        Ok(self.cdf_raw(x))
    }

    #[inline]
    pub(crate) fn cdf_raw(&self, x: f64) -> f64 {
        if x < self.threshold {
            1.0 - self.gompertz_survival(x)
        } else {
            1.0 - self.pareto_scale * x.powf(-self.alpha)
        }
    }

    /// Survival function `1 - F(x)`, computed without cancellation.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::domain(format!("survival requires x >= 0, got {x}")));
        }
        Ok(if x < self.threshold {
            self.gompertz_survival(x)
        } else {
            self.pareto_scale * x.powf(-self.alpha)
        })
    }

    /// Probability density at `x >= 0`.
    ///
    /// The piecewise rule is right-continuous: exactly at the threshold the
    /// Pareto branch is returned.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::domain(format!("pdf requires x >= 0, got {x}")));
        }
        Ok(self.pdf_raw(x))
    }

    #[inline]
    fn pdf_raw(&self, x: f64) -> f64 {
        if x < self.threshold {
            let ebx = (self.b * x).exp();
            self.eta * self.b * ebx * (-self.eta * (ebx - 1.0)).exp()
        } else {
            self.alpha * self.pareto_scale * x.powf(-self.alpha - 1.0)
        }
    }

    /// Quantile (inverse CDF) for `0 <= q < 1`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::domain(format!("quantile requires 0 <= q < 1, got {q}")));
        }
        Ok(self.quantile_raw(q))
    }

    #[inline]
    pub(crate) fn quantile_raw(&self, q: f64) -> f64 {
        let threshold_cdf = 1.0 - self.tail_mass();
        if q < threshold_cdf {
            // invert 1 - exp(-eta (e^{bx} - 1)) = q
            (1.0 - (1.0 - q).ln() / self.eta).ln() / self.b
        } else {
            // invert 1 - pareto_scale x^{-alpha} = q
            (self.pareto_scale / (1.0 - q)).powf(1.0 / self.alpha)
        }
    }

    /// Partial mean of the Gompertz segment: the integral of `y f(y)` from
    /// 0 to `x`, for `0 <= x <= threshold`. Deterministic quadrature to
    /// absolute tolerance [`QUAD_TOL`].
    pub fn partial_mean(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.threshold).contains(&x) {
            return Err(Error::domain(format!(
                "partial_mean requires 0 <= x <= threshold ({}), got {x}",
                self.threshold
            )));
        }
        Ok(quad::integrate(|y| y * self.pdf_raw(y), 0.0, x, QUAD_TOL))
    }

    /// Mean income of the full distribution.
    ///
    /// Closed form for the tail plus quadrature on the body:
    /// `I(x_t) + alpha x_t / (alpha - 1) * (1 - F(x_t))`.
    pub fn mean(&self) -> Result<f64> {
        let body = self.partial_mean(self.threshold)?;
        let tail = self.alpha * self.threshold / (self.alpha - 1.0) * self.tail_mass();
        Ok(body + tail)
    }

    /// Cumulative income share held by everyone with income at most `x`
    /// (the Lorenz ordinate as a function of income).
    pub fn income_share_below(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::domain(format!("income_share_below requires x >= 0, got {x}")));
        }
        let mean = self.mean()?;
        if x < self.threshold {
            Ok(self.partial_mean(x)? / mean)
        } else {
            // tail branch: 1 - alpha scale x^{1-alpha} / ((alpha - 1) mean)
            let tail = self.alpha * self.pareto_scale * x.powf(1.0 - self.alpha)
                / ((self.alpha - 1.0) * mean);
            Ok(1.0 - tail)
        }
    }

    /// Lorenz curve sampled on an ascending grid of incomes.
    ///
    /// A leading grid point at 0 is inserted if the grid does not start
    /// there, so the curve always begins at (0, 0).
    pub fn lorenz(&self, grid: &[f64]) -> Result<LorenzCurve> {
        if grid.is_empty() {
            return Err(Error::domain("lorenz requires a non-empty grid"));
        }
        if grid[0] < 0.0 {
            return Err(Error::domain("lorenz grid must be nonnegative"));
        }
        if grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("lorenz grid must be sorted ascending"));
        }

        let mean = self.mean()?;
        let mut xs: Vec<f64> = Vec::with_capacity(grid.len() + 1);
        if grid[0] > 0.0 {
            xs.push(0.0);
        }
        xs.extend_from_slice(grid);

        let mut points = Vec::with_capacity(xs.len());
        // Accumulate the body integral incrementally instead of re-integrating
        // from zero at every grid point.
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &x in &xs {
            let share = if x < self.threshold {
                acc += quad::integrate(|y| y * self.pdf_raw(y), prev, x, QUAD_TOL);
                prev = x;
                acc / mean
            } else {
                1.0 - self.alpha * self.pareto_scale * x.powf(1.0 - self.alpha)
                    / ((self.alpha - 1.0) * mean)
            };
            points.push((self.cdf_raw(x), share));
        }
        Ok(LorenzCurve { grid: xs, points })
    }

    /// Gini coefficient of the distribution, in (0, 1).
    ///
    /// The tail contribution is closed form; the body contribution is the
    /// nested quadrature of the partial mean against the body density.
    pub fn gini(&self) -> Result<f64> {
        let mean = self.mean()?;
        let tail_mass = self.tail_mass();
        let body = quad::integrate(
            |x| {
                let inner = quad::integrate(|y| y * self.pdf_raw(y), 0.0, x, QUAD_TOL);
                let ebx = (self.b * x).exp();
                inner * ebx * (-self.eta * (ebx - 1.0)).exp()
            },
            0.0,
            self.threshold,
            QUAD_TOL,
        );
        let alpha = self.alpha;
        let tail_term = alpha * alpha * self.threshold * tail_mass * tail_mass
            / (mean * (1.0 - alpha) * (2.0 * alpha - 1.0));
        let gini = 1.0 - 2.0 * (self.eta * self.b * body / mean + tail_mass + tail_term);
        if !(0.0..1.0).contains(&gini) {
            return Err(Error::domain(format!(
                "gini fell outside (0, 1): {gini}; parameters likely degenerate"
            )));
        }
        Ok(gini)
    }
}

/// A Lorenz curve: cumulative income share against cumulative population
/// share, evaluated on a stored income grid.
#[derive(Debug, Clone)]
pub struct LorenzCurve {
    /// Income values at which the curve was evaluated.
    pub grid: Vec<f64>,
    /// `(population_share, income_share)` pairs, both in [0, 1].
    pub points: Vec<(f64, f64)>,
}
