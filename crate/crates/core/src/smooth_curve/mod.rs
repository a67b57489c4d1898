//! Analytic curve oracles, Jordan frames and curvatures, the length of the
//! smooth j-th normal, transition functions, uniform inscription and
//! osculating spaces at mildly turning points.

mod builtins;
pub mod jet;
pub mod quadrature;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use builtins::{builtin_curve, Eflat, Eflex, Spiral, TrigCurve, BUILTIN_NAMES};
use quadrature::{integrate, integrate_split, QuadSpec};

use crate::error::{Error, Result};
use crate::linalg_geo::{
    gram_schmidt_with_norms, orthogonal_complement_direction, residual_against, ProjPoint, Vector,
};
use crate::polyline::InscribedPolygonal;

/// Relative tolerance of the derivative-independence checks.
pub const INDEPENDENCE_TOL: f64 = 1e-8;

/// Curve given by arc-length derivatives that can be evaluated exactly.
pub trait CurveOracle: Send + Sync {
    fn name(&self) -> &str;
    /// Ambient dimension `N + 1`.
    fn dim(&self) -> usize;
    /// Parameter interval in arc-length units.
    fn domain(&self) -> (f64, f64);
    /// Closed curves are periodic with period `b − a`.
    fn closed(&self) -> bool {
        false
    }
    /// Highest derivative order `deriv` supports.
    fn max_order(&self) -> usize;
    fn eval(&self, s: f64) -> Vector;
    /// `k`-th arc-length derivative.
    fn deriv(&self, s: f64, k: usize) -> Vector;
    /// `c(s1) − c(s0)`; implementations may override with a cancellation-free form.
    fn chord(&self, s0: f64, s1: f64) -> Vector {
        self.eval(s1) - self.eval(s0)
    }
    /// Interior parameters where the curve is only mildly smoothly turning.
    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }
    fn arc_length_parameterized(&self) -> bool {
        true
    }
}

/// JSON description of a builtin curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub curve: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    #[serde(default)]
    pub dim: Option<usize>,
}

impl CurveSpec {
    pub fn build(&self) -> Result<Box<dyn CurveOracle>> {
        builtin_curve(&self.curve, &self.params, self.domain.map(|d| (d[0], d[1])), self.dim)
    }
}

/// Jordan frame `(t, n_1, …, n_j)` and curvatures at one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JordanFrameSample {
    pub s: f64,
    pub frame: Vec<Vector>,
    /// `k_1, …, k_j`; `k_N` carries the orientation sign.
    pub curvatures: Vec<f64>,
    /// `k_{j+1}` when `j < N` (zero if the next derivative is dependent).
    pub next_curvature: Option<f64>,
    /// `‖ṅ_j(s)‖`.
    pub speed_nj: f64,
}

fn check_order(dim: usize, j: usize) -> Result<()> {
    let n = dim - 1;
    if j == 0 || j > n {
        return Err(Error::InvalidOrder { j, max: n });
    }
    Ok(())
}

/// Jordan frame from Gram-Schmidt on `ċ, c⁽²⁾, …, c⁽ʲ⁺¹⁾`.
///
/// Curvatures come from the residual norms, `k_m = ‖c^{(m+1)⊥}‖ / ‖c^{(m)⊥}‖`.
/// When `j = N` the last normal is the oriented complement of
/// `(t, n_1, …, n_{N−1})` and `k_N = c^{(N+1)} · n_N / ‖c^{(N)⊥}‖` is signed.
pub fn jordan_frame(c: &dyn CurveOracle, s: f64, j: usize) -> Result<JordanFrameSample> {
    let d = c.dim();
    check_order(d, j)?;
    let n = d - 1;
    if c.max_order() < j + 1 {
        return Err(Error::NotSmoothlyTurningAt(s));
    }
    let derivs: Vec<Vector> = (1..=j + 1).map(|k| c.deriv(s, k)).collect();
    if derivs.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::NotSmoothlyTurningAt(s));
    }
    let (mut frame, norms) =
        gram_schmidt_with_norms(&derivs, INDEPENDENCE_TOL).map_err(|_| Error::NotSmoothlyTurningAt(s))?;
    let mut curvatures: Vec<f64> = (1..=j).map(|m| norms[m] / norms[m - 1]).collect();
    let mut next_curvature = None;
    if j == n {
        let last = orthogonal_complement_direction(&frame[..n])?;
        curvatures[n - 1] = derivs[n].dot(&last) / norms[n - 1];
        frame[n] = last;
    } else if c.max_order() >= j + 2 {
        let next = c.deriv(s, j + 2);
        let r = residual_against(&next, &frame).norm();
        // A residual at rounding level means the next derivative is dependent.
        let k = if r <= 1e-12 * next.norm() { 0.0 } else { r / norms[j] };
        next_curvature = Some(k);
    }
    let speed_nj = match next_curvature {
        Some(k) => curvatures[j - 1].hypot(k),
        None if j == n => curvatures[n - 1].abs(),
        None => return Err(Error::NotSmoothlyTurningAt(s)),
    };
    Ok(JordanFrameSample { s, frame, curvatures, next_curvature, speed_nj })
}

/// `‖ṅ_j‖` at `s`.
pub fn normal_speed(c: &dyn CurveOracle, s: f64, j: usize) -> Result<f64> {
    jordan_frame(c, s, j).map(|f| f.speed_nj)
}

/// `∫ ‖ṅ_j(s)‖ ds` over the domain, split at the curve's singular points.
pub fn smooth_nj_length(c: &dyn CurveOracle, j: usize, quad: QuadSpec) -> Result<f64> {
    let (a, b) = c.domain();
    integrate_split(|s| normal_speed(c, s, j), a, b, &c.singular_points(), quad)
}

/// Tabulated `φ_j(s) = ∫_a^s ‖ṅ_j‖` with its inverse `ψ_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMap {
    pub s_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
}

impl TransitionMap {
    pub fn total(&self) -> f64 {
        *self.phi_grid.last().unwrap()
    }

    /// `φ_j(s)` by linear interpolation.
    pub fn phi(&self, s: f64) -> f64 {
        interpolate(&self.s_grid, &self.phi_grid, s)
    }

    /// `ψ_j(t)`, the inverse of [`Self::phi`] on the same piecewise-linear table.
    pub fn psi(&self, t: f64) -> f64 {
        interpolate(&self.phi_grid, &self.s_grid, t)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1) - 1;
    let (x0, x1) = (xs[i], xs[i + 1]);
    if x1 == x0 {
        return ys[i];
    }
    let f = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
    ys[i] + f * (ys[i + 1] - ys[i])
}

/// Builds the transition function on `cells` uniform cells (singular points
/// are added as extra nodes so no cell straddles them).
pub fn transition_function(c: &dyn CurveOracle, j: usize, cells: usize) -> Result<TransitionMap> {
    let (a, b) = c.domain();
    let mut s_grid: Vec<f64> = (0..=cells.max(2)).map(|i| a + (b - a) * i as f64 / cells.max(2) as f64).collect();
    for p in c.singular_points() {
        if p > a && p < b && !s_grid.iter().any(|&x| (x - p).abs() < 1e-14 * (b - a)) {
            s_grid.push(p);
        }
    }
    s_grid.sort_by(f64::total_cmp);
    let quad = QuadSpec { rel_tol: 1e-10, ..QuadSpec::default() };
    let mut phi_grid = vec![0.0; s_grid.len()];
    for i in 1..s_grid.len() {
        phi_grid[i] = phi_grid[i - 1] + integrate(|s| normal_speed(c, s, j), s_grid[i - 1], s_grid[i], quad)?;
    }
    if !(phi_grid.last().copied().unwrap_or(0.0) > 1e-14) {
        return Err(Error::NotInvertible);
    }
    Ok(TransitionMap { s_grid, phi_grid })
}

/// Vertices at `s_i = a + (b − a) i / n`; `n + 1` of them for open curves, `n` closed.
pub fn inscribe_uniform(c: &dyn CurveOracle, n: usize) -> Result<InscribedPolygonal> {
    let (a, b) = c.domain();
    let min = if c.closed() { 3 } else { 2 };
    if n < min {
        return Err(Error::InvalidPolygonal(format!("need at least {min} arcs, got {n}")));
    }
    let count = if c.closed() { n } else { n + 1 };
    let params = (0..count).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    InscribedPolygonal::new(c, params)
}

/// Osculating (j+1)-space at a possibly mildly turning point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OsculatingSpace {
    pub s: f64,
    /// Derivative orders `1 = i_1 < i_2 < … < i_{j+1}` that were used.
    pub orders: Vec<usize>,
    pub basis: Vec<Vector>,
    /// Last Gram-Schmidt vector, the mildly-turning j-th normal.
    pub normal: ProjPoint,
}

/// Spans `ċ` and the first derivatives that increase the rank, up to order
/// `max_order`; this is the lexicographically smallest admissible choice.
pub fn osculating_space(c: &dyn CurveOracle, s: f64, j: usize) -> Result<OsculatingSpace> {
    check_order(c.dim(), j)?;
    let mut orders = Vec::with_capacity(j + 1);
    let mut basis: Vec<Vector> = Vec::with_capacity(j + 1);
    for k in 1..=c.max_order() {
        if basis.len() == j + 1 {
            break;
        }
        let v = c.deriv(s, k);
        if v.iter().any(|x| !x.is_finite()) {
            break;
        }
        let r = residual_against(&v, &basis);
        let rn = r.norm();
        let scale = v.norm();
        if rn > INDEPENDENCE_TOL * scale && rn > 1e-300 {
            orders.push(k);
            basis.push(r / rn);
        } else if k == 1 {
            break;
        }
    }
    if basis.len() < j + 1 {
        return Err(Error::NotMildlyTurningAt(s));
    }
    let normal = ProjPoint::new(basis.last().unwrap())?;
    Ok(OsculatingSpace { s, orders, basis, normal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg_geo::{rp_distance, vector};
    use std::f64::consts::PI;

    fn curve(name: &str, params: &[(&str, f64)]) -> Box<dyn CurveOracle> {
        let p = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        builtin_curve(name, &p, None, None).unwrap()
    }

    #[test]
    fn helix_curvatures() {
        let h = curve("helix_r3", &[("a", 1.0), ("b", 0.5)]);
        for s in [0.0, 1.3, 5.0] {
            let f = jordan_frame(h.as_ref(), s, 2).unwrap();
            assert!((f.curvatures[0] - 0.8).abs() < 1e-14);
            assert!((f.curvatures[1] - 0.4).abs() < 1e-14);
            assert!((f.speed_nj - 0.4).abs() < 1e-14);
        }
        let flipped = curve("helix_r3", &[("a", 1.0), ("b", -0.5)]);
        let f = jordan_frame(flipped.as_ref(), 0.7, 2).unwrap();
        assert!((f.curvatures[1] + 0.4).abs() < 1e-14);
    }

    #[test]
    fn circle_and_line_degeneracies() {
        let c = curve("circle", &[("r", 2.0)]);
        let f = jordan_frame(c.as_ref(), 0.3, 1).unwrap();
        assert!((f.curvatures[0] - 0.5).abs() < 1e-15);
        assert_eq!(f.next_curvature, Some(0.0));
        assert!(matches!(jordan_frame(c.as_ref(), 0.3, 2), Err(Error::NotSmoothlyTurningAt(_))));
        let l = curve("line", &[]);
        assert!(matches!(jordan_frame(l.as_ref(), 0.3, 1), Err(Error::NotSmoothlyTurningAt(_))));
    }

    #[test]
    fn eflex_curvature_and_torsion() {
        let e = curve("eflex", &[]);
        let f = jordan_frame(e.as_ref(), 0.5, 2).unwrap();
        let expect = 2f64.sqrt() * 0.5 / (1.0 - 0.5f64.powi(4)).sqrt();
        assert!((expect - 0.730_296_743_3).abs() < 1e-10);
        assert!((f.curvatures[0] - expect).abs() < 1e-12);
        assert!((f.curvatures[1] + expect).abs() < 1e-12);
    }

    #[test]
    fn eflex_osculating_space_at_flex() {
        let e = curve("eflex", &[]);
        assert!(jordan_frame(e.as_ref(), 0.0, 1).is_err());
        let o = osculating_space(e.as_ref(), 0.0, 1).unwrap();
        assert_eq!(o.orders, vec![1, 3]);
        let n = ProjPoint::new(&vector(&[0.0, 1.0, 0.0])).unwrap();
        assert!(rp_distance(&o.normal, &n) < 1e-14);
        let b = osculating_space(e.as_ref(), 0.0, 2).unwrap();
        let bin = ProjPoint::new(&vector(&[-1.0, 0.0, 1.0])).unwrap();
        assert!(rp_distance(&b.normal, &bin) < 1e-14);
    }

    #[test]
    fn smooth_lengths() {
        let c = curve("circle", &[]);
        let l = smooth_nj_length(c.as_ref(), 1, QuadSpec::default()).unwrap();
        assert!((l - 2.0 * PI).abs() < 1e-10);
        let h = curve("helix_r3", &[]);
        let total = 2.0 * PI * 1.25f64.sqrt();
        let l = smooth_nj_length(h.as_ref(), 2, QuadSpec::default()).unwrap();
        assert!((l - 0.4 * total).abs() < 1e-10);
        // ∫ 2|s|/√(1−s⁴) over [−0.9, 0.9] = 2 asin(0.81).
        let e = curve("eflex", &[]);
        let l = smooth_nj_length(e.as_ref(), 1, QuadSpec::default()).unwrap();
        assert!((l - 2.0 * 0.81f64.asin()).abs() < 1e-8);
    }

    #[test]
    fn transition_round_trip() {
        let h = curve("helix_r3", &[]);
        let tm = transition_function(h.as_ref(), 2, 64).unwrap();
        let (a, b) = h.domain();
        for i in 0..=10 {
            let s = a + (b - a) * i as f64 / 10.0;
            assert!((tm.phi(s) - 0.4 * (s - a)).abs() < 1e-9);
            assert!((tm.psi(tm.phi(s)) - s).abs() < 1e-8 * (b - a));
        }
        let l = curve("line", &[]);
        assert!(transition_function(l.as_ref(), 1, 8).is_err());
    }

    #[test]
    fn unit_speed_on_grid() {
        for name in ["circle", "helix_r3", "generalized_helix_r4", "generalized_helix_r5", "eflex", "eflat"] {
            let c = curve(name, &[]);
            let (a, b) = c.domain();
            for i in 0..=1000 {
                let s = a + (b - a) * i as f64 / 1000.0;
                assert!((c.deriv(s, 1).norm() - 1.0).abs() < 1e-9, "{name} at {s}");
            }
        }
        let sp = curve("spiral_infinite_tc", &[]);
        let (_, b) = sp.domain();
        for i in 1..=1000 {
            let s = b * i as f64 / 1000.0;
            assert!((sp.deriv(s, 1).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for name in ["helix_r3", "generalized_helix_r4", "generalized_helix_r5", "eflex", "eflat", "spiral_infinite_tc"] {
            let c = curve(name, &[]);
            let (a, b) = c.domain();
            for i in 1..10 {
                let s = a + (b - a) * i as f64 / 10.0 + 0.0123;
                for k in 2..=c.max_order().min(4) {
                    let fd = (c.deriv(s + h, k - 1) - c.deriv(s - h, k - 1)) / (2.0 * h);
                    let ex = c.deriv(s, k);
                    assert!((&fd - &ex).norm() <= 1e-6 * ex.norm().max(1.0), "{name} k={k} s={s}");
                }
            }
        }
    }

    #[test]
    fn eval_matches_first_derivative() {
        let h = 1e-5;
        for name in ["eflex", "eflat", "spiral_infinite_tc", "helix_r3"] {
            let c = curve(name, &[]);
            let (a, b) = c.domain();
            // The spiral winds too fast near the origin for a 1e-5 step.
            let first = if name == "spiral_infinite_tc" { 5 } else { 1 };
            for i in first..10 {
                let s = a + (b - a) * i as f64 / 10.0 + 0.0123;
                let fd = (c.eval(s + h) - c.eval(s - h)) / (2.0 * h);
                assert!((&fd - c.deriv(s, 1)).norm() < 1e-8, "{name} at {s}");
            }
        }
    }

    #[test]
    fn bad_params() {
        let p = BTreeMap::from([("r".to_string(), -1.0)]);
        assert!(matches!(builtin_curve("circle", &p, None, None), Err(Error::BadParams(_))));
        assert!(matches!(
            builtin_curve("eflex", &BTreeMap::new(), Some((-1.0, 0.5)), None),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(builtin_curve("trefoil", &BTreeMap::new(), None, None), Err(Error::UnknownCurve(_))));
    }
}
