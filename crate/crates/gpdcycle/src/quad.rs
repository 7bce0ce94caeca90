//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair with recursive bisection.
//! The integrands in this crate are smooth double exponentials, so the
//! embedded error estimate converges quickly; adaptivity only has to cope
//! with the steepness varying across the parameter range.

/// Kronrod abscissae on [0, 1] (positive half; the rule is symmetric).
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights matching `XK`.
const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights for the embedded 7-point rule (abscissae are XK[1], XK[3], XK[5], XK[7]).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One application of the G7/K15 pair on [a, b].
/// Returns (kronrod_estimate, |kronrod - gauss|).
fn kronrod_pair<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for i in 0..8 {
        let dx = half * XK[i];
        let fsum = if i == 7 {
            f(mid)
        } else {
            f(mid - dx) + f(mid + dx)
        };
        kronrod += WK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (estimate, err) = kronrod_pair(f, a, b);
    if err <= tol || depth >= 60 {
        return estimate;
    }
    let mid = 0.5 * (a + b);
    let half_tol = 0.5 * tol;
    adaptive(f, a, mid, half_tol, depth + 1) + adaptive(f, mid, b, half_tol, depth + 1)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is pre-split into eight panels before adaptivity kicks in,
/// so narrow features cannot slip between the nodes of a single rule
/// application. Deterministic: the subdivision sequence depends only on
/// the integrand values, so repeated calls return bit-identical results.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    const PANELS: usize = 8;
    let width = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    let mut sum = 0.0;
    for i in 0..PANELS {
        let lo = a + i as f64 * width;
        let hi = if i == PANELS - 1 { b } else { lo + width };
        sum += adaptive(&f, lo, hi, panel_tol, 0);
    }
    sum
}
