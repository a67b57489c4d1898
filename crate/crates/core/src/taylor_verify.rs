//! Convergence-order checks for the Gram-Schmidt frames of alternating chord
//! stencils against the Jordan frame of an analytic curve.
//!
//! Each check evaluates a residual at a decreasing sequence of steps and fits
//! the slope of `log residual` against `log h`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg_geo::{align_with, gram_schmidt, gram_schmidt_with_norms, rp_distance_vec, Vector};
use crate::smooth_curve::{jordan_frame, CurveOracle, INDEPENDENCE_TOL};

/// Relative rank tolerance for stencil vectors; the last residuals shrink
/// like `h^N`, far below the default rank tolerance.
const STENCIL_RANK_TOL: f64 = 1e-15;

/// Fitted slope must reach `order − SLOPE_SLACK` for an `O(h^order)` claim.
pub const SLOPE_SLACK: f64 = 0.2;

/// Chord stencil `v_0(h), …, v_count(h)` at `s`.
///
/// Even `k` is the forward chord `(c(s+(k+1)h) − c(s+(k−1)h)) / 2h`, odd `k`
/// the backward chord `(c(s−(k+2)h) − c(s−kh)) / 2h`. A negative `h` mirrors
/// the stencil through `s`.
pub fn stencil_vectors(c: &dyn CurveOracle, s: f64, h: f64, count: usize) -> Result<Vec<Vector>> {
    if !(h != 0.0 && h.is_finite()) {
        return Err(Error::BadParams(format!("stencil step {h}")));
    }
    if !c.closed() {
        let (a, b) = c.domain();
        let reach = (count as f64 + 2.0) * h.abs();
        if s - reach < a {
            return Err(Error::OutOfDomain(s - reach));
        }
        if s + reach > b {
            return Err(Error::OutOfDomain(s + reach));
        }
    }
    Ok((0..=count)
        .map(|k| {
            let kf = k as f64;
            let (from, to) = if k % 2 == 0 {
                (s + (kf - 1.0) * h, s + (kf + 1.0) * h)
            } else {
                (s - kf * h, s - (kf + 2.0) * h)
            };
            c.chord(from, to) / (2.0 * h)
        })
        .collect())
}

/// Orthonormalized stencil at one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StencilFrame {
    pub h: f64,
    /// `t(h), n_1(h), …`.
    pub frame: Vec<Vector>,
}

pub fn stencil_frame(c: &dyn CurveOracle, s: f64, h: f64, count: usize) -> Result<StencilFrame> {
    let v = stencil_vectors(c, s, h, count)?;
    let frame = gram_schmidt(&v, STENCIL_RANK_TOL).map_err(|_| Error::NotSmoothlyTurningAt(s))?;
    Ok(StencilFrame { h, frame })
}

/// Residual norms of one expansion over a step sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFitReport {
    pub quantity: String,
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted_slope: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Residuals strictly decrease along the steps.
    pub monotone: bool,
}

impl OrderFitReport {
    fn new(quantity: &str, steps: &[f64], residuals: Vec<f64>, order: f64) -> Self {
        let fitted_slope = fit_slope(steps, &residuals);
        let threshold = order - SLOPE_SLACK;
        let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
        Self {
            quantity: quantity.to_string(),
            steps: steps.to_vec(),
            residuals,
            fitted_slope,
            threshold,
            passed: fitted_slope >= threshold,
            monotone,
        }
    }
}

/// Least-squares slope of `ln r` against `ln |h|`.
pub fn fit_slope(steps: &[f64], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(residuals)
        .map(|(h, r)| (h.abs().ln(), r.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Rounds to a multiple of `2^{−40}`.
///
/// Stencil nodes `s ± k h` built from snapped `s` and `h` are exact in
/// floating point for `|s| < 2^12`, so the chord spans are exactly `2h` and
/// the residual floor is set by the chord evaluation alone.
pub fn snap_dyadic(x: f64) -> f64 {
    const SCALE: f64 = 1_099_511_627_776.0;
    (x * SCALE).round() / SCALE
}

/// `h_k = 2^{−k} (b − a) / 32` for `k = 3, …, 10`, snapped to the dyadic grid.
pub fn default_steps(c: &dyn CurveOracle) -> Vec<f64> {
    let (a, b) = c.domain();
    (3..=10).map(|k| snap_dyadic((b - a) / 32.0 / f64::powi(2.0, k))).collect()
}

fn check_steps(steps: &[f64]) -> Result<()> {
    if steps.len() < 4 {
        return Err(Error::BadParams(format!("{} steps, need at least 4", steps.len())));
    }
    if steps.iter().any(|h| !(*h > 0.0)) || steps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::BadParams("steps must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Derivatives `c⁽¹⁾ … c⁽ᵐ⁾` at `s` with the orthonormal frame they span.
fn analytic_frame(c: &dyn CurveOracle, s: f64, m: usize) -> Result<(Vec<Vector>, Vec<Vector>)> {
    if c.max_order() < m {
        return Err(Error::NotSmoothlyTurningAt(s));
    }
    let d: Vec<Vector> = (1..=m).map(|k| c.deriv(s, k)).collect();
    if d.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::NotSmoothlyTurningAt(s));
    }
    let (frame, _) =
        gram_schmidt_with_norms(&d, INDEPENDENCE_TOL).map_err(|_| Error::NotSmoothlyTurningAt(s))?;
    Ok((d, frame))
}

/// Stencil expansions in R^3: `v_0`, `v_1`, `t`, `N_1`, `n_1`, `N_2`, `n_2`.
///
/// Here and in the other `verify_*` functions `s` is first snapped with
/// [`snap_dyadic`].
pub fn verify_pgm3(c: &dyn CurveOracle, s: f64, steps: &[f64]) -> Result<Vec<OrderFitReport>> {
    let s = snap_dyadic(s);
    if c.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: c.dim() });
    }
    check_steps(steps)?;
    let (d, frame) = analytic_frame(c, s, 3)?;
    let (c1, c2, c3) = (&d[0], &d[1], &d[2]);
    let k2 = c2.norm();
    let c3_dot_c2 = c3.dot(c2);
    let c3_perp = c3 - c1 * c3.dot(c1) - c2 * (c3_dot_c2 / (k2 * k2));
    let n1 = &frame[1];
    let n2 = &frame[2];
    let t_coeff = (c1 * (k2 * k2) + c3) / 6.0;
    let n1_coeff = -c1 * k2 + c2 * (c3_dot_c2 / k2.powi(3)) - c3 / k2;

    let names = ["v0", "v1", "t", "N1", "n1", "N2", "n2"];
    let orders = [2.0, 2.0, 2.0, 2.0, 1.0, 2.0, 1.0];
    let mut res: Vec<Vec<f64>> = (0..names.len()).map(|_| Vec::with_capacity(steps.len())).collect();
    for &h in steps {
        let v = stencil_vectors(c, s, h, 2)?;
        let (v0, v1, v2) = (&v[0], &v[1], &v[2]);
        let t_h = v0 / v0.norm();
        let big_n1 = v1 - v0 * (v1.dot(v0) / v0.norm_squared());
        let n1_h = &big_n1 / big_n1.norm();
        let big_n2 = v2 - v0 * (v2.dot(v0) / v0.norm_squared()) - &n1_h * (v2.dot(&n1_h) / n1_h.norm_squared());
        let n2_h = align_with(&(&big_n2 / big_n2.norm()), n2);
        let r = [
            (v0 - c1 - c3 * (h * h / 6.0)).norm(),
            (v1 + c1 - c2 * (2.0 * h) + c3 * (13.0 / 6.0 * h * h)).norm(),
            (&t_h - c1 - &t_coeff * (h * h)).norm(),
            (&big_n1 - c2 * (2.0 * h) + (c1 * (k2 * k2) + c3) * (2.0 * h * h)).norm(),
            (&n1_h - n1 - &n1_coeff * h).norm(),
            (&big_n2 - &c3_perp * (4.0 * h * h)).norm(),
            (&n2_h - n2).norm(),
        ];
        for (acc, x) in res.iter_mut().zip(r) {
            acc.push(x);
        }
    }
    // o(h^k) remainders must decay faster than h^k; n_2(h) → n_2 is only o(1).
    Ok(names
        .iter()
        .zip(orders)
        .zip(res)
        .map(|((name, k), r)| {
            let order = if *name == "n2" { 1.0 } else { k + 2.0 * SLOPE_SLACK };
            OrderFitReport::new(name, steps, r, order)
        })
        .collect())
}

/// Closed-form coefficients of the stencil-frame expansions in R^4.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pgm4Coefficients {
    /// Jordan frame `t, n_1, n_2, n_3` by Gram-Schmidt on the derivatives.
    pub frame: Vec<Vector>,
    /// Coefficient of `h²` in `t(h)`.
    pub t_second: Vector,
    /// Coefficient of `h` in `n_1(h)`.
    pub n1_first: Vector,
    /// Coefficient of `h²` in `n_1(h)`.
    pub n1_second: Vector,
    /// `n_1` component of `n1_second`.
    pub omega: f64,
    /// Coefficient of `h` in `n_2(h)` before division by `‖c^{(3)⊥}‖`.
    pub n2_numerator: Vector,
    pub c3_perp_norm: f64,
}

pub fn pgm4_coefficients(c: &dyn CurveOracle, s: f64) -> Result<Pgm4Coefficients> {
    if c.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: c.dim() });
    }
    if c.max_order() < 5 {
        return Err(Error::NotSmoothlyTurningAt(s));
    }
    let (d, frame) = analytic_frame(c, s, 4)?;
    let (c1, c2, c3, c4) = (&d[0], &d[1], &d[2], &d[3]);
    let (t, n1, n2, n3) = (&frame[0], &frame[1], &frame[2], &frame[3]);
    let k2 = c2.norm();
    let p = c3.dot(c2);
    let c3_perp = c3 - t * c3.dot(t) - n1 * c3.dot(n1);
    let c3p = c3_perp.norm();
    let c4_perp = c4 - t * c4.dot(t) - n1 * c4.dot(n1) - n2 * c4.dot(n2);

    let omega = p * p / k2.powi(4) * (1.5 * k2 * k2 - 1.0) + 0.5 * k2 * k2 - 0.5 * c3.norm_squared() / (k2 * k2);
    let n2_coeff = 5.0 / 6.0 * c4.dot(&c3_perp) / (k2 * c3p) - p / k2.powi(3) * c3p;
    let n1_second = t * (-p / (6.0 * k2)) + n1 * omega + n2 * n2_coeff + n3 * (5.0 / 6.0 * c4_perp.norm() / k2);
    let n2_numerator =
        n1 * (c3.norm_squared() / k2 - k2.powi(3) - p * p / k2.powi(3)) + n2 * (p / (k2 * k2 * c3p));
    Ok(Pgm4Coefficients {
        t_second: (c1 * (k2 * k2) + c3) / 6.0,
        n1_first: -c1 * k2 + c2 * (p / k2.powi(3)) - c3 / k2,
        n1_second,
        omega,
        n2_numerator,
        c3_perp_norm: c3p,
        frame,
    })
}

/// Stencil expansions in R^4: `t`, `n_1` to second order, `n_2` to first
/// order and `n_3` to zeroth order.
pub fn verify_pgm4(c: &dyn CurveOracle, s: f64, steps: &[f64]) -> Result<Vec<OrderFitReport>> {
    let s = snap_dyadic(s);
    check_steps(steps)?;
    let k = pgm4_coefficients(c, s)?;
    let f = &k.frame;
    let n2_first = &k.n2_numerator / k.c3_perp_norm;
    let mut res: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(steps.len())).collect();
    for &h in steps {
        let sf = stencil_frame(c, s, h, 3)?;
        let g: Vec<Vector> = sf.frame.iter().zip(f).map(|(u, r)| align_with(u, r)).collect();
        let r = [
            (&g[0] - &f[0] - &k.t_second * (h * h)).norm(),
            (&g[1] - &f[1] - &k.n1_first * h - &k.n1_second * (h * h)).norm(),
            (&g[2] - &f[2] - &n2_first * h).norm(),
            (&g[3] - &f[3]).norm(),
        ];
        for (acc, x) in res.iter_mut().zip(r) {
            acc.push(x);
        }
    }
    let names = ["t", "n1", "n2", "n3"];
    let orders = [2.0, 2.0, 1.0, 1.0];
    Ok(names
        .iter()
        .zip(orders)
        .zip(res)
        .map(|((name, o), r)| OrderFitReport::new(name, steps, r, o + 2.0 * SLOPE_SLACK))
        .collect())
}

/// Projective distance between the stencil frame and the Jordan frame, for
/// `t = n_0, n_1, …, n_{j_max}`; each must vanish at least linearly.
pub fn verify_pgmn(c: &dyn CurveOracle, s: f64, j_max: usize, steps: &[f64]) -> Result<Vec<OrderFitReport>> {
    let s = snap_dyadic(s);
    check_steps(steps)?;
    let jf = jordan_frame(c, s, j_max)?;
    let mut res: Vec<Vec<f64>> = (0..=j_max).map(|_| Vec::with_capacity(steps.len())).collect();
    for &h in steps {
        let sf = stencil_frame(c, s, h, j_max)?;
        for (m, acc) in res.iter_mut().enumerate() {
            acc.push(rp_distance_vec(&sf.frame[m], &jf.frame[m]));
        }
    }
    Ok(res
        .into_iter()
        .enumerate()
        .map(|(m, r)| {
            let name = if m == 0 { "t".to_string() } else { format!("n{m}") };
            OrderFitReport::new(&name, steps, r, 1.0)
        })
        .collect())
}
