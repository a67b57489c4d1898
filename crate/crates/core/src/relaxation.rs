//! Relaxed total variation of the j-th normal of a curve, estimated by
//! inscribed polygonals with vanishing modulus, and the constant-speed weak
//! normal built from the finest discrete normal.

use rayon::prelude::*;
use serde::Serialize;

use crate::discrete_frame::{discrete_normal, normal_length_or_flat, NormalOptions};
use crate::error::{Error, Result};
use crate::linalg_geo::{
    align_with, collapse_duplicates, geodesic_point, orthogonal_complement_direction, rp_distance, ProjPoint,
    DUPLICATE_ANGLE,
};
use crate::polyline::{mesh, modulus, total_curvature, Polygonal};
use crate::smooth_curve::quadrature::{integrate, QuadSpec};
use crate::smooth_curve::{
    inscribe_uniform, jordan_frame, osculating_space, transition_function, CurveOracle, Spiral,
};

/// Samples per arc used for the modulus.
const MODULUS_SAMPLES: usize = 8;

/// Successive differences must shrink at least by this factor to count as Cauchy.
pub const CAUCHY_RATIO: f64 = 1.5;

/// `n = 16, 32, …, 4096`.
pub fn default_schedule() -> Vec<usize> {
    (4..=12).map(|k| 1usize << k).collect()
}

/// One refinement level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub n: usize,
    pub modulus: f64,
    pub mesh: f64,
    /// `L([n_j](P_n))`, or `None` when `P_n` was too flat for order `j`.
    pub length_j: Option<f64>,
    pub tc_ambient_j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationRun {
    pub curve: String,
    pub j: usize,
    pub levels: Vec<Level>,
    /// Aitken extrapolation of the last three level values, when they are Cauchy.
    pub extrapolated: Option<f64>,
}

impl RelaxationRun {
    /// Value at the finest non-flat level.
    pub fn last_value(&self) -> Option<f64> {
        self.levels.iter().rev().find_map(|l| l.length_j)
    }

    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.length_j).collect()
    }
}

/// Whether the last three values have shrinking successive differences.
pub fn is_cauchy(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let w = &values[values.len() - 3..];
    let (d1, d2) = ((w[1] - w[0]).abs(), (w[2] - w[1]).abs());
    let scale = w[2].abs().max(1.0);
    d2 <= 1e-12 * scale || d2 * CAUCHY_RATIO <= d1
}

/// Aitken's Δ² on the last three values (the Richardson estimate for an
/// unknown geometric rate).
fn extrapolate(values: &[f64]) -> Option<f64> {
    if !is_cauchy(values) {
        return None;
    }
    let w = &values[values.len() - 3..];
    let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
    let denom = d2 - d1;
    if d2 == 0.0 || denom == 0.0 {
        return Some(w[2]);
    }
    Some(w[2] - d2 * d2 / denom)
}

fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadParams("schedule must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

fn level_of(p: &Polygonal, n: usize, modulus: f64, j: usize) -> Result<Level> {
    let (length_j, tc_ambient_j) = match discrete_normal(p, j, NormalOptions::default()) {
        Ok(dn) => (Some(dn.stats.length), Some(dn.stats.ambient_tc)),
        Err(Error::FlatPolygonal) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(Level { n, modulus, mesh: mesh(p), length_j, tc_ambient_j })
}

fn finish(curve: &str, j: usize, levels: Vec<Level>) -> Result<RelaxationRun> {
    if levels.iter().all(|l| l.length_j.is_none()) {
        return Err(Error::DegenerateCurve(format!("{curve} is flat for order {j} at every level")));
    }
    let values: Vec<f64> = levels.iter().filter_map(|l| l.length_j).collect();
    let extrapolated = extrapolate(&values);
    Ok(RelaxationRun { curve: curve.to_string(), j, levels, extrapolated })
}

/// Lengths of `[n_j](P_n)` for uniform inscriptions `P_n` with `n` arcs.
///
/// Levels where `P_n` is too flat keep `length_j = None`; the run fails with
/// `DegenerateCurve` only when every level is flat.
pub fn estimate_fj(c: &dyn CurveOracle, j: usize, schedule: &[usize]) -> Result<RelaxationRun> {
    check_schedule(schedule)?;
    let n_max = c.dim() - 1;
    if j == 0 || j > n_max {
        return Err(Error::InvalidOrder { j, max: n_max });
    }
    let levels = schedule
        .par_iter()
        .map(|&n| {
            let ip = inscribe_uniform(c, n)?;
            let mu = modulus(&ip, c, MODULUS_SAMPLES);
            level_of(&ip.polygon, n, mu, j)
        })
        .collect::<Result<Vec<Level>>>()?;
    finish(c.name(), j, levels)
}

/// Splits every segment of `p` into `factor` equal parts.
pub fn subdivide(p: &Polygonal, factor: usize) -> Result<Polygonal> {
    if factor == 0 {
        return Err(Error::BadParams("subdivision factor 0".into()));
    }
    let v = p.vertices();
    let mut out = Vec::with_capacity(p.segment_count() * factor + 1);
    for (i, a) in v.iter().enumerate().take(p.segment_count()) {
        let d = p.segment(i);
        for k in 0..factor {
            out.push(a + &d * (k as f64 / factor as f64));
        }
    }
    if !p.is_closed() {
        out.push(v.last().unwrap().clone());
    }
    Polygonal::new(out, p.is_closed())
}

/// Polygonal counterpart of [`estimate_fj`]: level `k` subdivides every
/// segment into `factors[k]` parts, so the inscription keeps the corners and
/// the modulus equals the mesh.
pub fn estimate_fj_polygonal(p: &Polygonal, j: usize, factors: &[usize]) -> Result<RelaxationRun> {
    check_schedule(factors)?;
    let n_max = p.dim() - 1;
    if j == 0 || j > n_max {
        return Err(Error::InvalidOrder { j, max: n_max });
    }
    let levels = factors
        .par_iter()
        .map(|&f| {
            let q = subdivide(p, f)?;
            let h = mesh(&q);
            level_of(&q, q.segment_count(), h, j)
        })
        .collect::<Result<Vec<Level>>>()?;
    finish("polygonal", j, levels)
}

/// `L([n_1](P))` against `TC(P)` at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1TcRow {
    pub n: usize,
    pub length_1: f64,
    pub tc: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1TcReport {
    pub rows: Vec<F1TcRow>,
    pub all_hold: bool,
}

/// Tolerance of the `L([n_1]) ≤ TC` comparison.
pub const F1_TC_TOL: f64 = 1e-9;

/// The bound for one polygonal; a flat polygonal has a zero-length normal.
pub fn f1_tc_row(p: &Polygonal) -> Result<F1TcRow> {
    let (length_1, _) = normal_length_or_flat(p, 1, NormalOptions::default())?;
    let tc = total_curvature(p);
    Ok(F1TcRow { n: p.segment_count(), length_1, tc, holds: length_1 <= tc + F1_TC_TOL })
}

/// `L([n_1](P_n)) ≤ TC(P_n)` on every level of the uniform schedule.
pub fn check_f1_tc_bound(c: &dyn CurveOracle, schedule: &[usize]) -> Result<F1TcReport> {
    check_schedule(schedule)?;
    let rows = schedule
        .par_iter()
        .map(|&n| f1_tc_row(&inscribe_uniform(c, n)?.polygon))
        .collect::<Result<Vec<F1TcRow>>>()?;
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(F1TcReport { rows, all_hold })
}

/// Constant-speed parameterization of the finest discrete normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakNormalPath {
    pub j: usize,
    pub n_final: usize,
    /// Total length `L_j` in radians.
    pub length: f64,
    /// Uniform grid over `[0, L_j]`.
    pub t: Vec<f64>,
    pub samples: Vec<ProjPoint>,
}

/// Samples the projective polygon through `points` at `grid` equally spaced
/// arc-length positions, walking minimal geodesics between consecutive classes.
fn constant_speed_samples(points: &[ProjPoint], closed: bool, grid: usize) -> (f64, Vec<f64>, Vec<ProjPoint>) {
    let pts = collapse_duplicates(points, closed, DUPLICATE_ANGLE);
    let m = pts.len();
    let arcs = if m < 2 {
        0
    } else if closed {
        m
    } else {
        m - 1
    };
    let mut cum = vec![0.0];
    for i in 0..arcs {
        let d = rp_distance(&pts[i], &pts[(i + 1) % m]);
        cum.push(cum[i] + d);
    }
    let total = *cum.last().unwrap();
    let grid = grid.max(2);
    let t: Vec<f64> = (0..grid).map(|k| total * k as f64 / (grid - 1) as f64).collect();
    if arcs == 0 {
        return (0.0, t, vec![pts[0].clone(); grid]);
    }
    let mut samples = Vec::with_capacity(grid);
    let mut arc = 0;
    for &tk in &t {
        while arc + 1 < arcs && cum[arc + 1] < tk {
            arc += 1;
        }
        let u = pts[arc].rep();
        let w = align_with(pts[(arc + 1) % m].rep(), u);
        let len = cum[arc + 1] - cum[arc];
        let f = if len > 0.0 { ((tk - cum[arc]) / len).clamp(0.0, 1.0) } else { 0.0 };
        samples.push(ProjPoint::new(&geodesic_point(u, &w, f)).expect("unit geodesic point"));
    }
    (total, t, samples)
}

/// Levels `n_final/4, n_final/2, n_final` used to test convergence.
fn check_levels(n_final: usize) -> Vec<usize> {
    vec![(n_final / 4).max(4), (n_final / 2).max(5), n_final.max(6)]
}

/// Constant-speed reparameterization of `[n_j](P_{n_final})` on `grid` points.
///
/// Requires the level values of order `j` and of order `j − 1` to be Cauchy
/// over `n_final/4, n_final/2, n_final`; for `j = 1` the total curvatures of
/// the inscriptions play the role of order 0.
pub fn weak_normal(c: &dyn CurveOracle, j: usize, n_final: usize, grid: usize) -> Result<WeakNormalPath> {
    let schedule = check_levels(n_final);
    let run = estimate_fj(c, j, &schedule)?;
    if run.levels.iter().any(|l| l.length_j.is_none()) || !is_cauchy(&run.values()) {
        return Err(Error::NotConverged(format!("order {j} lengths {:?}", run.values())));
    }
    let lower: Vec<f64> = if j == 1 {
        schedule
            .iter()
            .map(|&n| inscribe_uniform(c, n).map(|ip| total_curvature(&ip.polygon)))
            .collect::<Result<_>>()?
    } else {
        let r = estimate_fj(c, j - 1, &schedule)?;
        if r.levels.iter().any(|l| l.length_j.is_none()) {
            return Err(Error::NotConverged(format!("order {} is flat", j - 1)));
        }
        r.values()
    };
    if !is_cauchy(&lower) {
        return Err(Error::NotConverged(format!("order {} values {lower:?}", j - 1)));
    }
    let p = inscribe_uniform(c, n_final)?.polygon;
    let dn = discrete_normal(&p, j, NormalOptions::default())?;
    let (length, t, samples) = constant_speed_samples(&dn.points, dn.closed, grid);
    Ok(WeakNormalPath { j, n_final, length, t, samples })
}

/// Distances between the weak normal and the smooth normal reparameterized
/// by its own arc length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothComparison {
    pub max_pointwise: f64,
    pub frechet_estimate: f64,
    pub smooth_length: f64,
    pub weak_length: f64,
}

/// Smooth class `[n_j(s)]`. At mildly turning points it falls back to the
/// osculating space; for `j = N` on a curve whose last derivative is
/// dependent it is the normal to the osculating N-space.
fn smooth_normal_class(c: &dyn CurveOracle, s: f64, j: usize) -> Result<ProjPoint> {
    match jordan_frame(c, s, j) {
        Ok(f) => ProjPoint::new(&f.frame[j]),
        Err(Error::NotSmoothlyTurningAt(_)) if j == c.dim() - 1 && j > 1 => {
            let f = jordan_frame(c, s, j - 1)?;
            ProjPoint::new(&orthogonal_complement_direction(&f.frame)?)
        }
        Err(Error::NotSmoothlyTurningAt(_)) => osculating_space(c, s, j).map(|o| o.normal),
        Err(e) => Err(e),
    }
}

/// Discrete Fréchet distance between two sequences under `dist`.
pub fn discrete_frechet<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return 0.0;
    }
    let mut prev = vec![0.0_f64; m];
    let mut cur = vec![0.0_f64; m];
    for (i, ai) in a.iter().enumerate().take(n) {
        for k in 0..m {
            let d = dist(ai, &b[k]);
            cur[k] = match (i, k) {
                (0, 0) => d,
                (0, _) => cur[k - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[k].min(prev[k - 1]).min(cur[k - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Cells of the tabulated transition function used by [`compare_to_smooth`].
const TRANSITION_CELLS: usize = 2048;

/// Compares `path(t)` with `[n_j(ψ_j(t·T/L))]`, where `T` is the smooth
/// normal's length and `L` the path's, so both parameterizations run over the
/// same fraction of their length.
pub fn compare_to_smooth(path: &WeakNormalPath, c: &dyn CurveOracle, j: usize) -> Result<SmoothComparison> {
    let (a, b) = c.domain();
    let (smooth_length, smooth): (f64, Vec<ProjPoint>) = match transition_function(c, j, TRANSITION_CELLS) {
        Ok(tm) => {
            let total = tm.total();
            let scale = if path.length > 0.0 { total / path.length } else { 0.0 };
            let pts = path
                .t
                .iter()
                .map(|&t| smooth_normal_class(c, tm.psi(t * scale), j))
                .collect::<Result<_>>()?;
            (total, pts)
        }
        // A zero-length smooth normal: compare against it on a uniform s-grid.
        Err(Error::NotInvertible | Error::NotSmoothlyTurningAt(_)) if path.length == 0.0 => {
            let m = path.t.len().max(2);
            let pts = (0..path.t.len())
                .map(|k| smooth_normal_class(c, a + (b - a) * k as f64 / (m - 1) as f64, j))
                .collect::<Result<_>>()?;
            (0.0, pts)
        }
        Err(e) => return Err(e),
    };
    let max_pointwise = path
        .samples
        .iter()
        .zip(&smooth)
        .map(|(p, q)| rp_distance(p, q))
        .fold(0.0, f64::max);
    let frechet_estimate = discrete_frechet(&path.samples, &smooth, rp_distance);
    Ok(SmoothComparison { max_pointwise, frechet_estimate, smooth_length, weak_length: path.length })
}

/// One level of the infinite-curvature demonstration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralLevel {
    pub n: usize,
    pub length: f64,
    pub relative_length_error: f64,
    pub tc: f64,
    pub tat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralDemo {
    /// Curve length by quadrature of the speed in the original parameter.
    pub quadrature_length: f64,
    pub levels: Vec<SpiralLevel>,
}

/// `n = 10, 100, 1000, 4096, 16384, 65536`.
pub fn spiral_schedule() -> Vec<usize> {
    vec![10, 100, 1000, 4096, 16384, 65536]
}

/// Uniform inscriptions of the spiral: polygonal lengths approach the curve
/// length while total curvatures grow without bound, and the torsion-type
/// length of the planar inscriptions stays 0.
pub fn spiral_demo(schedule: &[usize]) -> Result<SpiralDemo> {
    check_schedule(schedule)?;
    let c = crate::smooth_curve::builtin_curve("spiral_infinite_tc", &Default::default(), None, None)?;
    let (_, b) = c.domain();
    let t_end = Spiral::parameter_at(b);
    let quad = QuadSpec { rel_tol: 1e-12, ..QuadSpec::default() };
    let quadrature_length = integrate(|t| Ok(2.0 * (t * t + std::f64::consts::PI.powi(2)).sqrt()), 0.0, t_end, quad)?;
    let levels = schedule
        .par_iter()
        .map(|&n| {
            let p = inscribe_uniform(c.as_ref(), n)?.polygon;
            let length = p.length();
            let (tat, _) = normal_length_or_flat(&p, 2, NormalOptions::default())?;
            Ok(SpiralLevel {
                n,
                length,
                relative_length_error: (length - quadrature_length).abs() / quadrature_length,
                tc: total_curvature(&p),
                tat,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpiralDemo { quadrature_length, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg_geo::vector;
    use crate::smooth_curve::builtin_curve;
    use std::f64::consts::PI;

    fn curve(name: &str) -> Box<dyn CurveOracle> {
        builtin_curve(name, &Default::default(), None, None).unwrap()
    }

    #[test]
    fn circle_levels_are_two_pi() {
        let run = estimate_fj(curve("circle").as_ref(), 1, &[16, 64, 256]).unwrap();
        for v in run.values() {
            assert!((v - 2.0 * PI).abs() < 1e-9);
        }
        assert!(run.levels.windows(2).all(|w| w[1].modulus <= w[0].modulus));
    }

    #[test]
    fn line_is_degenerate() {
        let c = curve("line");
        assert!(matches!(estimate_fj(c.as_ref(), 1, &[8, 16]), Err(Error::DegenerateCurve(_))));
        let r = check_f1_tc_bound(c.as_ref(), &[8, 16]).unwrap();
        assert!(r.all_hold && r.rows.iter().all(|x| x.length_1 == 0.0 && x.tc == 0.0));
    }

    #[test]
    fn subdivision_keeps_normal_length() {
        let v = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 2.0, 1.5]];
        let p = Polygonal::new(v.iter().map(|c| vector(c)).collect(), true).unwrap();
        let direct = discrete_normal(&p, 2, NormalOptions::default()).unwrap().stats.length;
        let run = estimate_fj_polygonal(&p, 2, &[1, 2, 3, 8]).unwrap();
        for x in run.values() {
            assert!((x - direct).abs() < 1e-12, "{x} vs {direct}");
        }
    }

    #[test]
    fn frechet_of_shifted_sequences() {
        let a = [0.0, 1.0, 2.0, 3.0];
        let b = [0.5, 1.5, 2.5, 3.5];
        let d = discrete_frechet(&a, &b, |x: &f64, y: &f64| (x - y).abs());
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cauchy_and_aitken() {
        let v = [1.0 + 0.5, 1.0 + 0.25, 1.0 + 0.125];
        assert!(is_cauchy(&v));
        assert!((extrapolate(&v).unwrap() - 1.0).abs() < 1e-15);
        assert!(!is_cauchy(&[1.0, 2.0, 3.0]));
    }
}
