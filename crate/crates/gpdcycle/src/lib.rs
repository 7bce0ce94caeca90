//! Income-distribution fitting and growth-cycle estimation.
//!
//! The crate models per-year income microdata with a two-segment
//! distribution (Gompertz body, Pareto tail), computes inequality
//! metrics (Lorenz curve, Gini coefficient), extracts wage-share /
//! employment-rate series from the per-year fits, and estimates
//! Lotka-Volterra cycle coefficients, center, and period from such a
//! series. A fixed-step ODE integrator and an inverse-CDF sampler are
//! included as verification oracles for the analytic code paths.
//!
//! All types are immutable values and all operations are pure functions,
//! so everything here is safe to use concurrently without synchronization.

pub mod empirical;
pub mod error;
pub mod fitting;
pub mod goodwin;
pub mod gpd;
pub mod ingest;
pub mod quad;
pub mod sim;

pub use empirical::{EmpiricalCdf, IncomeSample, YearConfig};
pub use error::{Error, Result};
pub use fitting::{FitConfig, FitResult};
pub use goodwin::{GoodwinStructuralParams, LvCoefficients, UvPoint, UvSeries};
pub use gpd::{GpdParams, LorenzCurve};
pub use sim::{LvRates, SimConfig, Trajectory};
