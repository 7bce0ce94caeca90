//! Verification oracles: a fixed-step Lotka-Volterra integrator with a
//! conserved-quantity record, a Poincare-section period measurement, and
//! an inverse-CDF income sampler.

use crate::empirical::IncomeSample;
use crate::error::{Error, Result};
use crate::gpd::GpdParams;

/// The four Lotka-Volterra rates in
/// `dx/dt = x (a2 - b2 y)`, `dy/dt = y (-a1 + b1 x)`.
///
/// In growth-cycle terms `x` is the employment rate and `y` the wage
/// share, so the fixed point sits at `x = a1/b1`, `y = a2/b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvRates {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl LvRates {
    /// Fixed point of the flow, `(x_c, y_c) = (a1/b1, a2/b2)`.
    pub fn center(&self) -> (f64, f64) {
        (self.a1 / self.b1, self.a2 / self.b2)
    }

    /// Small-amplitude orbital period `2 pi / sqrt(a1 a2)`.
    pub fn linear_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.a1 * self.a2).sqrt()
    }

    /// First integral `H(x, y) = b1 x - a1 ln x + b2 y - a2 ln y`,
    /// constant along exact trajectories.
    pub fn conserved(&self, x: f64, y: f64) -> f64 {
        self.b1 * x - self.a1 * x.ln() + self.b2 * y - self.a2 * y.ln()
    }

    #[inline]
    fn rhs(&self, x: f64, y: f64) -> (f64, f64) {
        (x * (self.a2 - self.b2 * y), y * (-self.a1 + self.b1 * x))
    }
}

/// Configuration for one integration run.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub rates: LvRates,
    /// Initial state `(x0, y0)`, both strictly positive.
    pub initial: (f64, f64),
    /// Step size in years.
    pub dt: f64,
    /// Total duration in years.
    pub t_end: f64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::invalid("dt", self.dt, "must be > 0"));
        }
        if self.t_end.is_nan() || self.t_end < self.dt {
            return Err(Error::invalid("t_end", self.t_end, "must be >= dt"));
        }
        let (x0, y0) = self.initial;
        if x0.is_nan() || y0.is_nan() || x0 <= 0.0 || y0 <= 0.0 {
            return Err(Error::domain(format!(
                "initial state must be strictly positive, got ({}, {})",
                x0, y0
            )));
        }
        Ok(())
    }
}

/// An integrated trajectory with the conserved quantity recorded per step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rates: LvRates,
    pub times: Vec<f64>,
    pub states: Vec<(f64, f64)>,
    pub conserved: Vec<f64>,
}

impl Trajectory {
    /// Largest departure of the conserved quantity from its initial value.
    pub fn max_conserved_drift(&self) -> f64 {
        let h0 = self.conserved[0];
        self.conserved
            .iter()
            .map(|h| (h - h0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrate the Lotka-Volterra system with classical fixed-step
/// fourth-order Runge-Kutta.
///
/// Errors if the state leaves the positive quadrant, which indicates the
/// step size is too large for the requested orbit.
pub fn integrate(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut conserved = Vec::with_capacity(steps + 1);

    let r = cfg.rates;
    let (mut x, mut y) = cfg.initial;
    times.push(0.0);
    states.push((x, y));
    conserved.push(r.conserved(x, y));

    let dt = cfg.dt;
    for i in 1..=steps {
        let (k1x, k1y) = r.rhs(x, y);
        let (k2x, k2y) = r.rhs(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
        let (k3x, k3y) = r.rhs(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
        let (k4x, k4y) = r.rhs(x + dt * k3x, y + dt * k3y);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        if x.is_nan() || y.is_nan() || x <= 0.0 || y <= 0.0 {
            return Err(Error::NonConvergence(format!(
                "state left the positive quadrant at step {i} (t = {}); reduce dt",
                i as f64 * dt
            )));
        }
        times.push(i as f64 * dt);
        states.push((x, y));
        conserved.push(r.conserved(x, y));
    }

    Ok(Trajectory {
        rates: r,
        times,
        states,
        conserved,
    })
}

/// Measure the orbital period from positive-direction crossings of the
/// Poincare section `x = x_c` (the center abscissa).
///
/// Crossing times are linearly interpolated between bracketing steps and
/// the period is averaged over all full cycles found. Errors when fewer
/// than two crossings exist.
pub fn measure_period(traj: &Trajectory) -> Result<f64> {
    let (x_c, _) = traj.rates.center();
    let mut crossings = Vec::new();
    for i in 1..traj.states.len() {
        let (x0, _) = traj.states[i - 1];
        let (x1, _) = traj.states[i];
        if x0 < x_c && x1 >= x_c {
            let frac = (x_c - x0) / (x1 - x0);
            crossings.push(traj.times[i - 1] + frac * (traj.times[i] - traj.times[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return Err(Error::data(format!(
            "need at least 2 section crossings to measure a period, found {}",
            crossings.len()
        )));
    }
    let cycles = (crossings.len() - 1) as f64;
    Ok((crossings[crossings.len() - 1] - crossings[0]) / cycles)
}

/// SplitMix64: a 64-bit-seed generator with a published, fixed algorithm,
/// so sampled streams are reproducible across platforms and releases.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 random mantissa bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Draw `n` incomes from the distribution by inverse-CDF sampling.
///
/// The output is a raw (unnormalized) sample: its mean is close to the
/// distribution mean but not exactly 1.
pub fn sample_gpd(params: &GpdParams, n: usize, seed: u64) -> Result<IncomeSample> {
    if n == 0 {
        return Err(Error::data("sample size must be at least 1"));
    }
    let mut rng = SplitMix64::new(seed);
    let values: Vec<f64> = (0..n).map(|_| params.quantile_raw(rng.next_f64())).collect();
    IncomeSample::new(0, values)
}
