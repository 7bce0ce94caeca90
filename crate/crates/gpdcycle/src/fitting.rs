//! Parameter estimation from a normalized empirical sample: threshold
//! grid search, damped Gauss-Newton for the body parameters, and a
//! log-log least-squares fit for the tail exponent.

use crate::empirical::{EmpiricalCdf, IncomeSample, MIN_FIT_OBSERVATIONS};
use crate::error::{Error, Result};
use crate::gpd::GpdParams;

/// Minimum number of CDF points below a candidate threshold.
pub const MIN_BODY_POINTS: usize = 50;
/// Minimum number of CDF points at or above a candidate threshold.
pub const MIN_TAIL_POINTS: usize = 30;

/// Tuning knobs for the full fit. The defaults reproduce the documented
/// procedure: candidate thresholds at every 0.5th percentile between the
/// 60th and 99th, with both side-fits re-run per candidate.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub grid_lo_percentile: f64,
    pub grid_hi_percentile: f64,
    pub grid_step_percentile: f64,
    /// Iteration cap for one damped Gauss-Newton run.
    pub max_iterations: usize,
    /// During the threshold search each side of the split is thinned by a
    /// deterministic rank stride to at most this many points; the final
    /// fit at the selected threshold always uses every point.
    pub max_grid_fit_points: usize,
    /// Skip the search and fit at this threshold instead.
    pub fixed_threshold: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            grid_lo_percentile: 60.0,
            grid_hi_percentile: 99.0,
            grid_step_percentile: 0.5,
            max_iterations: 200,
            max_grid_fit_points: 2000,
            fixed_threshold: None,
        }
    }
}

/// Outcome of a full fit.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub params: GpdParams,
    /// Residual sum of squares of the body fit, CDF space.
    pub gompertz_rss: f64,
    /// Residual sum of squares of the tail fit, log-survival space.
    pub pareto_rss: f64,
    /// Model mean implied by the fitted parameters; close to 1 when the
    /// fit is good, since the data were normalized to unit mean.
    pub mean_check: f64,
    pub converged: bool,
    /// Total damped Gauss-Newton iterations spent, including the search.
    pub iterations: usize,
}

impl FitResult {
    /// Whether the implied mean sits within the accepted [0.99, 1.01] band.
    pub fn mean_check_ok(&self) -> bool {
        (0.99..=1.01).contains(&self.mean_check)
    }
}

/// Body fit result: `G(x) = 1 - exp(-eta (e^{bx} - 1))` matched to CDF points.
#[derive(Debug, Clone, Copy)]
pub struct GompertzFit {
    pub eta: f64,
    pub b: f64,
    pub rss: f64,
    pub iterations: usize,
}

/// Tail fit result: slope of `ln(1 - F)` against `ln x`.
#[derive(Debug, Clone, Copy)]
pub struct ParetoFit {
    pub alpha: f64,
    pub rss: f64,
}

fn gompertz_sse(points: &[(f64, f64)], eta: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|&(x, f)| {
            let r = (1.0 - (-eta * ((b * x).exp() - 1.0)).exp()) - f;
            r * r
        })
        .sum()
}

/// One damped Gauss-Newton (Levenberg-Marquardt style) run from a fixed
/// starting point. Returns `None` when the iteration stalls without
/// meeting the tolerances.
fn gauss_newton_run(
    points: &[(f64, f64)],
    mut eta: f64,
    mut b: f64,
    max_iterations: usize,
) -> Option<GompertzFit> {
    let mut lambda = 1e-3;
    let mut sse = gompertz_sse(points, eta, b);
    if !sse.is_finite() {
        return None;
    }

    for iter in 1..=max_iterations {
        // residuals and normal equations
        let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for &(x, f) in points {
            let ebx = (b * x).exp();
            let surv = (-eta * (ebx - 1.0)).exp();
            let r = (1.0 - surv) - f;
            let j_eta = (ebx - 1.0) * surv;
            let j_b = eta * x * ebx * surv;
            a11 += j_eta * j_eta;
            a12 += j_eta * j_b;
            a22 += j_b * j_b;
            g1 += j_eta * r;
            g2 += j_b * r;
        }

        let mut stepped = false;
        while lambda < 1e12 {
            let m11 = a11 * (1.0 + lambda);
            let m22 = a22 * (1.0 + lambda);
            let det = m11 * m22 - a12 * a12;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let d_eta = (-g1 * m22 + g2 * a12) / det;
            let d_b = (-g2 * m11 + g1 * a12) / det;
            let eta_new = eta + d_eta;
            let b_new = b + d_b;
            if eta_new > 0.0 && b_new > 0.0 {
                let sse_new = gompertz_sse(points, eta_new, b_new);
                if sse_new.is_finite() && sse_new <= sse {
                    let rel_drop = (sse - sse_new) / sse.max(1e-300);
                    let rel_step = (d_eta / eta_new).abs().max((d_b / b_new).abs());
                    eta = eta_new;
                    b = b_new;
                    sse = sse_new;
                    lambda = (lambda * 0.1).max(1e-12);
                    stepped = true;
                    if rel_drop < 1e-14 || rel_step < 1e-12 {
                        return Some(GompertzFit {
                            eta,
                            b,
                            rss: sse,
                            iterations: iter,
                        });
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !stepped {
            // damping maxed out: accept only if the gradient is essentially flat
            let grad = (g1 * g1 + g2 * g2).sqrt();
            if grad < 1e-12 {
                return Some(GompertzFit {
                    eta,
                    b,
                    rss: sse,
                    iterations: iter,
                });
            }
            return None;
        }
    }
    None
}

/// Fit the body CDF `G(x; eta, b)` to `(x, F)` points below the threshold
/// by damped Gauss-Newton from `init`, with a fixed multi-start fallback
/// when the primary start fails.
pub fn fit_gompertz(
    points: &[(f64, f64)],
    init: (f64, f64),
    max_iterations: usize,
) -> Result<GompertzFit> {
    if points.len() < MIN_BODY_POINTS {
        return Err(Error::data(format!(
            "body fit needs at least {MIN_BODY_POINTS} points, got {}",
            points.len()
        )));
    }
    if let Some(fit) = gauss_newton_run(points, init.0, init.1, max_iterations) {
        return Ok(fit);
    }
    let mut spent = max_iterations;
    for eta0 in [0.3, 1.0, 3.0] {
        for b0 in [0.3, 1.0, 3.0] {
            if let Some(mut fit) = gauss_newton_run(points, eta0, b0, max_iterations) {
                fit.iterations += spent;
                return Ok(fit);
            }
            spent += max_iterations;
        }
    }
    Err(Error::NonConvergence(format!(
        "body fit failed from init ({}, {}) and all fallback starts",
        init.0, init.1
    )))
}

/// Fit the tail exponent by ordinary least squares of `ln(1 - F)` on
/// `ln x` over points at or above the threshold.
///
/// The single largest point carries survival 0 (undefined in log space)
/// and is dropped by convention.
pub fn fit_pareto_tail(points: &[(f64, f64)]) -> Result<ParetoFit> {
    if points.len() < MIN_TAIL_POINTS {
        return Err(Error::data(format!(
            "tail fit needs at least {MIN_TAIL_POINTS} points, got {}",
            points.len()
        )));
    }
    // points arrive sorted ascending in x; drop the maximum
    let trimmed = &points[..points.len() - 1];
    let mut logs = Vec::with_capacity(trimmed.len());
    for &(x, f) in trimmed {
        let surv = 1.0 - f;
        if surv <= 0.0 || surv.is_nan() {
            return Err(Error::data(format!(
                "tail survival is 0 at x = {x}; cannot take logs"
            )));
        }
        if x <= 0.0 {
            return Err(Error::data(format!("tail point x = {x} must be positive")));
        }
        logs.push((x.ln(), surv.ln()));
    }

    let n = logs.len() as f64;
    let mean_t = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_s = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &(t, s) in &logs {
        cov += (t - mean_t) * (s - mean_s);
        var += (t - mean_t) * (t - mean_t);
    }
    if var <= 0.0 {
        return Err(Error::data("tail points share a single x value"));
    }
    let slope = cov / var;
    let intercept = mean_s - slope * mean_t;
    let alpha = -slope;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "tail regression produced nonpositive exponent {alpha}"
        )));
    }
    let rss = logs
        .iter()
        .map(|&(t, s)| {
            let r = s - (intercept + slope * t);
            r * r
        })
        .sum();
    Ok(ParetoFit { alpha, rss })
}

/// Hill estimator of the tail exponent over observations strictly above
/// `threshold`. Offered as a cross-check diagnostic for the log-log fit.
pub fn hill_alpha(values: &[f64], threshold: f64) -> Result<f64> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::invalid("threshold", threshold, "must be > 0"));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for &v in values {
        if v > threshold {
            sum += (v / threshold).ln();
            count += 1;
        }
    }
    if count < 2 || sum <= 0.0 {
        return Err(Error::data(format!(
            "Hill estimator needs at least 2 exceedances above {threshold}, found {count}"
        )));
    }
    Ok(count as f64 / sum)
}

/// Deterministic rank-stride thinning to at most `max_points` entries.
fn thin(points: &[(f64, f64)], max_points: usize) -> Vec<(f64, f64)> {
    if points.len() <= max_points {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(max_points);
    points.iter().copied().step_by(stride).collect()
}

fn median_x(points: &[(f64, f64)]) -> f64 {
    points[points.len() / 2].0
}

/// The `(below, at_or_above)` halves of a point list split at a threshold.
type SplitPoints<'a> = (&'a [(f64, f64)], &'a [(f64, f64)]);

fn split_at_threshold(points: &[(f64, f64)], threshold: f64) -> SplitPoints<'_> {
    let cut = points.partition_point(|p| p.0 < threshold);
    points.split_at(cut)
}

/// Combined per-point-normalized misfit of the two side-fits for one
/// candidate threshold: `body_rss / n_body + tail_rss / n_tail`.
///
/// This is the quantity the threshold search minimizes; it is exposed so
/// the selection can be audited by exhaustive re-evaluation.
pub fn threshold_objective(
    points: &[(f64, f64)],
    candidate: f64,
    cfg: &FitConfig,
) -> Result<(f64, usize)> {
    let (below, above) = split_at_threshold(points, candidate);
    if below.len() < MIN_BODY_POINTS {
        return Err(Error::data(format!(
            "candidate {candidate}: only {} body points",
            below.len()
        )));
    }
    if above.len() < MIN_TAIL_POINTS {
        return Err(Error::data(format!(
            "candidate {candidate}: only {} tail points",
            above.len()
        )));
    }
    let body = thin(below, cfg.max_grid_fit_points);
    let tail = thin(above, cfg.max_grid_fit_points);
    let init = (1.0, 1.0 / median_x(below));
    let g = fit_gompertz(&body, init, cfg.max_iterations)?;
    let p = fit_pareto_tail(&tail)?;
    Ok((
        g.rss / body.len() as f64 + p.rss / (tail.len() - 1) as f64,
        g.iterations,
    ))
}

/// Search an ascending candidate grid for the threshold with the smallest
/// combined misfit. Candidates that leave too few points on either side,
/// or whose side-fits fail, are skipped; it is an error when every
/// candidate is skipped.
pub fn find_threshold(
    points: &[(f64, f64)],
    candidates: &[f64],
    cfg: &FitConfig,
) -> Result<(f64, usize)> {
    if candidates.is_empty() {
        return Err(Error::data("threshold search needs at least one candidate"));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut iterations = 0usize;
    for &cand in candidates {
        match threshold_objective(points, cand, cfg) {
            Ok((objective, iters)) => {
                iterations += iters;
                if best.is_none_or(|(_, obj)| objective < obj) {
                    best = Some((cand, objective));
                }
            }
            Err(_) => continue,
        }
    }
    match best {
        Some((cand, _)) => Ok((cand, iterations)),
        None => Err(Error::NonConvergence(
            "no threshold candidate produced converged fits on both sides".into(),
        )),
    }
}

/// Candidate thresholds at evenly spaced percentiles of the sample.
fn percentile_candidates(sorted: &[f64], cfg: &FitConfig) -> Vec<f64> {
    let n = sorted.len();
    let mut out: Vec<f64> = Vec::new();
    let mut p = cfg.grid_lo_percentile;
    while p <= cfg.grid_hi_percentile + 1e-9 {
        let rank = ((p / 100.0) * (n - 1) as f64).round() as usize;
        let x = sorted[rank.min(n - 1)];
        if out.last() != Some(&x) {
            out.push(x);
        }
        p += cfg.grid_step_percentile;
    }
    out
}

/// Full estimation pipeline for one normalized sample: select the
/// threshold (grid search, or `cfg.fixed_threshold` when supplied), then
/// fit both segments at that threshold using every data point, and
/// validate the implied mean.
pub fn fit_full(sample: &IncomeSample, cfg: &FitConfig) -> Result<FitResult> {
    if !sample.is_normalized() {
        return Err(Error::data("fit_full expects a normalized sample"));
    }
    if sample.len() < MIN_FIT_OBSERVATIONS {
        return Err(Error::data(format!(
            "fit_full needs at least {MIN_FIT_OBSERVATIONS} observations, got {}",
            sample.len()
        )));
    }
    let ecdf = EmpiricalCdf::from_sample(sample)?;
    let points = ecdf.points();

    let (threshold, search_iterations) = match cfg.fixed_threshold {
        Some(t) => {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::invalid("fixed_threshold", t, "must be > 0"));
            }
            (t, 0)
        }
        None => {
            let candidates = percentile_candidates(ecdf.sorted_values(), cfg);
            find_threshold(&points, &candidates, cfg)?
        }
    };

    let (below, above) = split_at_threshold(&points, threshold);
    if below.len() < MIN_BODY_POINTS {
        return Err(Error::data(format!(
            "threshold {threshold} leaves only {} body points",
            below.len()
        )));
    }
    if above.len() < MIN_TAIL_POINTS {
        return Err(Error::data(format!(
            "threshold {threshold} leaves only {} tail points",
            above.len()
        )));
    }
    let init = (1.0, 1.0 / median_x(below));
    let g = fit_gompertz(below, init, cfg.max_iterations)?;
    let p = fit_pareto_tail(above)?;
    let params = GpdParams::new(threshold, g.eta, g.b, p.alpha)?;
    let mean_check = params.mean()?;

    Ok(FitResult {
        params,
        gompertz_rss: g.rss,
        pareto_rss: p.rss,
        mean_check,
        converged: true,
        iterations: search_iterations + g.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::sample_gpd;

    fn exact_body_points(eta: f64, b: f64, x_max: f64, n: usize) -> Vec<(f64, f64)> {
        (1..=n)
            .map(|i| {
                let x = x_max * i as f64 / n as f64;
                (x, 1.0 - (-eta * ((b * x).exp() - 1.0)).exp())
            })
            .collect()
    }

    #[test]
    fn recovers_exact_body_parameters() {
        let points = exact_body_points(2.491, 0.358, 2.1, 400);
        let fit = fit_gompertz(&points, (1.0, 1.0), 200).unwrap();
        assert!((fit.eta - 2.491).abs() < 1e-6, "eta {}", fit.eta);
        assert!((fit.b - 0.358).abs() < 1e-6, "b {}", fit.b);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn body_fit_rejects_degenerate_input() {
        assert!(fit_gompertz(&[(1.0, 0.5)], (1.0, 1.0), 200).is_err());
    }

    #[test]
    fn body_fit_recovers_from_far_start() {
        let points = exact_body_points(0.919, 0.703, 1.7, 300);
        let fit = fit_gompertz(&points, (50.0, 50.0), 200).unwrap();
        assert!((fit.eta - 0.919).abs() < 1e-6);
        assert!((fit.b - 0.703).abs() < 1e-6);
    }

    fn exact_tail_points(alpha: f64, scale: f64, x_t: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let x = x_t * (1.0 + i as f64 * 0.05);
                (x, 1.0 - scale * x.powf(-alpha))
            })
            .collect()
    }

    #[test]
    fn recovers_exact_tail_exponents() {
        for (alpha, x_t) in [(2.256_f64, 1.787_f64), (1.598, 2.135)] {
            let scale = x_t.powf(alpha) * 0.1;
            let points = exact_tail_points(alpha, scale, x_t, 60);
            let fit = fit_pareto_tail(&points).unwrap();
            assert!((fit.alpha - alpha).abs() < 1e-6, "alpha {}", fit.alpha);
            assert!(fit.rss < 1e-20);
        }
    }

    #[test]
    fn tail_fit_rejects_zero_survival_inside() {
        let mut points = exact_tail_points(2.0, 1.0, 1.5, 40);
        points[10].1 = 1.0; // interior survival of zero
        assert!(fit_pareto_tail(&points).is_err());
    }

    #[test]
    fn tail_fit_rejects_too_few_points() {
        let points = exact_tail_points(2.0, 1.0, 1.5, 10);
        assert!(fit_pareto_tail(&points).is_err());
    }

    #[test]
    fn hill_estimator_on_exact_pareto_sample() {
        let params = GpdParams::new(1.787, 0.919, 0.703, 2.256).unwrap();
        let sample = sample_gpd(&params, 200_000, 31).unwrap();
        let alpha = hill_alpha(sample.values(), params.threshold()).unwrap();
        assert!((alpha - 2.256).abs() / 2.256 < 0.05, "hill alpha {alpha}");
    }

    #[test]
    fn sampled_round_trip_recovers_parameters() {
        let truth = GpdParams::new(1.787, 0.919, 0.703, 2.256).unwrap();
        let sample = sample_gpd(&truth, 100_000, 7)
            .unwrap()
            .normalize()
            .unwrap();
        let fit = fit_full(&sample, &FitConfig::default()).unwrap();
        let p = fit.params;
        assert!((p.threshold() - 1.787).abs() / 1.787 < 0.10, "x_t {}", p.threshold());
        assert!((p.eta() - 0.919).abs() / 0.919 < 0.05, "eta {}", p.eta());
        assert!((p.b() - 0.703).abs() / 0.703 < 0.05, "b {}", p.b());
        assert!((p.alpha() - 2.256).abs() / 2.256 < 0.05, "alpha {}", p.alpha());
        assert!(fit.mean_check_ok(), "mean check {}", fit.mean_check);
    }

    #[test]
    fn fit_is_deterministic() {
        let truth = GpdParams::new(1.936, 1.738, 0.452, 2.122).unwrap();
        let sample = sample_gpd(&truth, 50_000, 11).unwrap().normalize().unwrap();
        let a = fit_full(&sample, &FitConfig::default()).unwrap();
        let b = fit_full(&sample, &FitConfig::default()).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.gompertz_rss.to_bits(), b.gompertz_rss.to_bits());
        assert_eq!(a.pareto_rss.to_bits(), b.pareto_rss.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn selected_threshold_minimizes_objective_over_grid() {
        let truth = GpdParams::new(1.722, 1.169, 0.610, 2.075).unwrap();
        let sample = sample_gpd(&truth, 30_000, 3).unwrap().normalize().unwrap();
        let ecdf = EmpiricalCdf::from_sample(&sample).unwrap();
        let points = ecdf.points();
        let cfg = FitConfig {
            grid_step_percentile: 2.0,
            ..FitConfig::default()
        };
        let candidates: Vec<f64> = {
            let n = ecdf.sorted_values().len();
            (0..20)
                .map(|i| ecdf.sorted_values()[((0.60 + i as f64 * 0.02) * (n - 1) as f64) as usize])
                .collect()
        };
        let (chosen, _) = find_threshold(&points, &candidates, &cfg).unwrap();
        let chosen_obj = threshold_objective(&points, chosen, &cfg).unwrap().0;
        for &cand in &candidates {
            if let Ok((obj, _)) = threshold_objective(&points, cand, &cfg) {
                assert!(chosen_obj <= obj, "candidate {cand} beats chosen {chosen}");
            }
        }
    }

    #[test]
    fn pure_body_sample_selects_last_candidate_or_errors() {
        // data with no tail segment at all: an exact body CDF truncated
        // far below any plausible threshold
        let points = exact_body_points(1.0, 1.0, 3.0, 2000);
        let cfg = FitConfig::default();
        let candidates: Vec<f64> = (0..10).map(|i| 1.0 + i as f64 * 0.2).collect();
        match find_threshold(&points, &candidates, &cfg) {
            Ok((chosen, _)) => assert_eq!(chosen, *candidates.last().unwrap()),
            Err(Error::NonConvergence(_)) | Err(Error::Data(_)) => {}
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn fixed_threshold_is_honored() {
        let truth = GpdParams::new(1.722, 1.169, 0.610, 2.075).unwrap();
        let sample = sample_gpd(&truth, 50_000, 5).unwrap().normalize().unwrap();
        let cfg = FitConfig {
            fixed_threshold: Some(1.722),
            ..FitConfig::default()
        };
        let fit = fit_full(&sample, &cfg).unwrap();
        assert_eq!(fit.params.threshold(), 1.722);
        assert!((fit.params.eta() - 1.169).abs() / 1.169 < 0.05);
    }

    #[test]
    fn fit_full_requires_normalized_input() {
        let truth = GpdParams::new(1.722, 1.169, 0.610, 2.075).unwrap();
        let sample = sample_gpd(&truth, 1000, 5).unwrap();
        assert!(fit_full(&sample, &FitConfig::default()).is_err());
    }

    #[test]
    fn fit_full_requires_enough_observations() {
        let truth = GpdParams::new(1.722, 1.169, 0.610, 2.075).unwrap();
        let sample = sample_gpd(&truth, 50, 5).unwrap().normalize().unwrap();
        assert!(fit_full(&sample, &FitConfig::default()).is_err());
    }
}
