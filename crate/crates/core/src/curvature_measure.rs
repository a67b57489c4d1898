//! Distributional derivative of the unit tangent of the weak normal: jump
//! atoms for polygonals, an absolutely continuous density for smoothly
//! turning curves, and a binned comparison between the two.

use serde::Serialize;

use crate::discrete_frame::{discrete_normal, DiscreteNormal, NormalOptions};
use crate::error::{Error, Result};
use crate::linalg_geo::{align_with, angle_between, collapse_duplicates, rp_distance, Vector, DUPLICATE_ANGLE};
use crate::smooth_curve::quadrature::{integrate_split, QuadSpec};
use crate::smooth_curve::{inscribe_uniform, jordan_frame, transition_function, CurveOracle, TransitionMap};

/// Jump of the unit tangent at a junction of the normal polygon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    /// Arc-length position along the normal polygon.
    pub t: f64,
    /// Turning angle times the unit direction of `t_out − t_in`.
    pub jump: Vector,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySample {
    pub s: f64,
    /// `φ_j(s)`.
    pub t: f64,
    /// `d/ds (ṅ_j / ‖ṅ_j‖)`.
    pub density: Vector,
    /// Density with respect to `t`: `density / ‖ṅ_j‖`.
    pub density_t: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub j: usize,
    /// Length of the normal curve.
    pub length: f64,
    pub atoms: Vec<Atom>,
    /// Total variation of the measure: arc interiors contribute their length,
    /// junctions their turning angle; for smooth curves the integral of the
    /// density norm.
    pub total_variation: f64,
    pub ac_density_samples: Option<Vec<DensitySample>>,
}

/// Jump measure of the constant-speed lift of a discrete normal.
///
/// On each minimal geodesic arc the unit tangent rotates at unit rate, which
/// contributes the arc length to the total variation; at a junction it jumps
/// by the turning angle between the incoming and outgoing arcs.
pub fn polygonal_jump_measure(dn: &DiscreteNormal) -> MeasureReport {
    let pts = collapse_duplicates(&dn.points, dn.closed, DUPLICATE_ANGLE);
    let m = pts.len();
    if m < 2 {
        return MeasureReport { j: dn.j, length: 0.0, atoms: Vec::new(), total_variation: 0.0, ac_density_samples: None };
    }
    let arcs = if dn.closed { m } else { m - 1 };
    let mut cum = vec![0.0];
    for i in 0..arcs {
        let d = rp_distance(&pts[i], &pts[(i + 1) % m]);
        cum.push(cum[i] + d);
    }
    let length = cum[arcs];
    let junctions: Vec<usize> = if dn.closed { (0..m).collect() } else { (1..m - 1).collect() };
    let mut atoms = Vec::with_capacity(junctions.len());
    for i in junctions {
        let b = pts[i].rep();
        let a = align_with(pts[(i + m - 1) % m].rep(), b);
        let c = align_with(pts[(i + 1) % m].rep(), b);
        let t_in = -(&a - b * a.dot(b));
        let t_out = &c - b * c.dot(b);
        let (ni, no) = (t_in.norm(), t_out.norm());
        if ni == 0.0 || no == 0.0 {
            continue;
        }
        let (t_in, t_out) = (t_in / ni, t_out / no);
        let theta = angle_between(&t_in, &t_out);
        let diff = &t_out - &t_in;
        let dn_ = diff.norm();
        let jump = if dn_ > 0.0 { diff * (theta / dn_) } else { Vector::zeros(b.len()) };
        atoms.push(Atom { t: cum[i], jump, mass: theta });
    }
    let total_variation = length + atoms.iter().map(|a| a.mass).sum::<f64>();
    MeasureReport { j: dn.j, length, atoms, total_variation, ac_density_samples: None }
}

/// `ṅ_j / ‖ṅ_j‖` from the Jordan system, together with `‖ṅ_j‖`.
fn unit_normal_velocity(c: &dyn CurveOracle, s: f64, j: usize) -> Result<(Vector, f64)> {
    let n = c.dim() - 1;
    let f = jordan_frame(c, s, j)?;
    let kj = f.curvatures[j - 1];
    let mut v = &f.frame[j - 1] * (-kj);
    if j < n && f.next_curvature.is_some_and(|k| k > 0.0) {
        // k_N carries the orientation of n_N, so take both from one frame.
        let g = jordan_frame(c, s, j + 1)?;
        v += &g.frame[j + 1] * g.curvatures[j];
    }
    let speed = v.norm();
    if !(speed > 0.0) {
        return Err(Error::NotSmoothlyTurningAt(s));
    }
    Ok((v / speed, speed))
}

/// Finite-difference step `1e-5·(b − a)`.
fn fd_step(c: &dyn CurveOracle) -> f64 {
    let (a, b) = c.domain();
    1e-5 * (b - a)
}

/// `d/ds (ṅ_j/‖ṅ_j‖)` at `s` by central differences, and `‖ṅ_j(s)‖`.
pub fn density_at(c: &dyn CurveOracle, s: f64, j: usize) -> Result<(Vector, f64)> {
    let h = fd_step(c);
    let (up, _) = unit_normal_velocity(c, s + h, j)?;
    let (um, _) = unit_normal_velocity(c, s - h, j)?;
    let (_, speed) = unit_normal_velocity(c, s, j)?;
    Ok(((up - um) / (2.0 * h), speed))
}

/// Sample parameters: `grid` uniform points kept two steps away from the
/// domain ends and from singular points.
fn sample_params(c: &dyn CurveOracle, grid: usize) -> Vec<f64> {
    let (a, b) = c.domain();
    let h = fd_step(c);
    let (lo, hi) = (a + 2.0 * h, b - 2.0 * h);
    let sing = c.singular_points();
    let g = grid.max(2);
    (0..g)
        .map(|k| lo + (hi - lo) * k as f64 / (g - 1) as f64)
        .filter(|s| sing.iter().all(|p| (s - p).abs() > 2.0 * h))
        .collect()
}

/// Density of the measure on a grid of `grid` parameters, with positions
/// transported by the transition function.
pub fn smooth_density(c: &dyn CurveOracle, j: usize, grid: usize) -> Result<MeasureReport> {
    let tm = transition_function(c, j, 1024)?;
    let samples = sample_params(c, grid)
        .into_iter()
        .map(|s| {
            let (density, speed) = density_at(c, s, j)?;
            Ok(DensitySample { s, t: tm.phi(s), density_t: &density / speed, density })
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = c.domain();
    let h = fd_step(c);
    let total_variation = integrate_split(
        |s| density_at(c, s, j).map(|d| d.0.norm()),
        a + 2.0 * h,
        b - 2.0 * h,
        &c.singular_points(),
        QuadSpec { rel_tol: 1e-7, ..QuadSpec::default() },
    )?;
    Ok(MeasureReport { j, length: tm.total(), atoms: Vec::new(), total_variation, ac_density_samples: Some(samples) })
}

/// Component of the density tangent to the sphere at `n_j(s)`.
fn tangential_density(c: &dyn CurveOracle, s: f64, j: usize) -> Result<Vector> {
    let (d, _) = density_at(c, s, j)?;
    let f = jordan_frame(c, s, j)?;
    let p = &f.frame[j];
    Ok(&d - p * d.dot(p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentialReport {
    pub sign_tau: f64,
    pub samples: usize,
    pub max_error: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Tolerance of the tangential-component comparison.
pub const TANGENTIAL_TOL: f64 = 1e-5;

/// For the last normal, the tangential part of the density equals
/// `sgn τ · k_{N−1} n_{N−2}`.
pub fn tangential_component_check(c: &dyn CurveOracle, grid: usize) -> Result<TangentialReport> {
    let n = c.dim() - 1;
    if n < 2 {
        return Err(Error::InvalidOrder { j: n, max: n });
    }
    let params = sample_params(c, grid);
    let mut sign_tau = 0.0;
    let mut max_error: f64 = 0.0;
    for &s in &params {
        let f = jordan_frame(c, s, n)?;
        let tau = f.curvatures[n - 1];
        if tau == 0.0 {
            return Err(Error::NotSmoothlyTurningAt(s));
        }
        if sign_tau == 0.0 {
            sign_tau = tau.signum();
        } else if tau.signum() != sign_tau {
            return Err(Error::NotSmoothlyTurningAt(s));
        }
        let expected = &f.frame[n - 2] * (tau.signum() * f.curvatures[n - 2]);
        max_error = max_error.max((tangential_density(c, s, n)? - expected).norm());
    }
    Ok(TangentialReport {
        sign_tau,
        samples: params.len(),
        max_error,
        tol: TANGENTIAL_TOL,
        passed: max_error <= TANGENTIAL_TOL,
    })
}

/// Total masses below this are rounding noise (geodesic polygons on great
/// circles) and are not compared bin by bin.
pub const MASS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureLevel {
    pub n: usize,
    pub polygon_mass: f64,
    pub smooth_mass: f64,
    /// Largest bin difference relative to the smooth mass.
    pub max_bin_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureConvergence {
    pub j: usize,
    pub bins: usize,
    pub smooth_bins: Vec<f64>,
    pub levels: Vec<MeasureLevel>,
}

/// Bin masses of the tangential density over equal fractions of `[0, L_j]`.
fn smooth_bins(c: &dyn CurveOracle, j: usize, tm: &TransitionMap, bins: usize) -> Result<Vec<f64>> {
    let total = tm.total();
    let sing = c.singular_points();
    let (a, b) = c.domain();
    let h = fd_step(c);
    (0..bins)
        .map(|k| {
            let lo = tm.psi(total * k as f64 / bins as f64).max(a + 2.0 * h);
            let hi = tm.psi(total * (k + 1) as f64 / bins as f64).min(b - 2.0 * h);
            if hi <= lo {
                return Ok(0.0);
            }
            integrate_split(
                |s| tangential_density(c, s, j).map(|d| d.norm()),
                lo,
                hi,
                &sing,
                QuadSpec { rel_tol: 1e-7, ..QuadSpec::default() },
            )
        })
        .collect()
}

/// Polygonal atoms binned by their fraction of the normal's length, against
/// the tangential density of the smooth curve over the same fractions.
///
/// Atoms carry the turning of the normal polygon inside the sphere, so they
/// are compared with the tangential part of the density; the part normal to
/// the sphere integrates to the length and is not binned.
pub fn convergence_of_measures(c: &dyn CurveOracle, j: usize, schedule: &[usize], bins: usize) -> Result<MeasureConvergence> {
    if bins == 0 {
        return Err(Error::BadParams("zero bins".into()));
    }
    let sm = match transition_function(c, j, 2048) {
        Ok(tm) => smooth_bins(c, j, &tm, bins)?,
        Err(Error::NotInvertible) => vec![0.0; bins],
        Err(Error::NotSmoothlyTurningAt(_)) if j == c.dim() - 1 => vec![0.0; bins],
        Err(e) => return Err(e),
    };
    let smooth_mass: f64 = sm.iter().sum();
    let mut levels = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let p = inscribe_uniform(c, n)?.polygon;
        let dn = discrete_normal(&p, j, NormalOptions::default())?;
        let mr = polygonal_jump_measure(&dn);
        let mut pb = vec![0.0; bins];
        if mr.length > 0.0 {
            for at in &mr.atoms {
                let k = ((at.t / mr.length * bins as f64) as usize).min(bins - 1);
                pb[k] += at.mass;
            }
        }
        let polygon_mass: f64 = pb.iter().sum();
        let worst = pb.iter().zip(&sm).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let scale = smooth_mass.max(polygon_mass);
        let max_bin_discrepancy = if scale > MASS_FLOOR { worst / scale } else { 0.0 };
        levels.push(MeasureLevel { n, polygon_mass, smooth_mass, max_bin_discrepancy });
    }
    Ok(MeasureConvergence { j, bins, smooth_bins: sm, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg_geo::{geodesic_polygon_stats, vector, ProjPoint};
    use crate::smooth_curve::builtin_curve;

    fn dn_from(points: &[[f64; 3]], closed: bool) -> DiscreteNormal {
        let pts: Vec<ProjPoint> = points.iter().map(|p| ProjPoint::new(&vector(p)).unwrap()).collect();
        let stats = geodesic_polygon_stats(&pts, closed);
        DiscreteNormal { j: 1, closed, points: pts, fallback_segments: vec![], stats }
    }

    #[test]
    fn single_arc_has_no_atoms() {
        let dn = dn_from(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], false);
        let m = polygonal_jump_measure(&dn);
        assert!(m.atoms.is_empty());
        assert!((m.total_variation - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn two_arcs_one_atom() {
        let theta: f64 = 0.7;
        let dn = dn_from(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [theta.sin(), theta.cos(), theta.sin()]], false);
        let m = polygonal_jump_measure(&dn);
        assert_eq!(m.atoms.len(), 1);
        let atom = &m.atoms[0];
        assert!((atom.jump.norm() - atom.mass).abs() < 1e-15);
        assert!((m.total_variation - dn.stats.ambient_tc).abs() < 1e-14);
    }

    #[test]
    fn circle_density_is_minus_normal() {
        let c = builtin_curve("circle", &Default::default(), None, None).unwrap();
        let m = smooth_density(c.as_ref(), 1, 33).unwrap();
        for d in m.ac_density_samples.unwrap() {
            let n1 = c.deriv(d.s, 2);
            assert!((&d.density + &n1).norm() < 1e-6, "{}", (&d.density + &n1).norm());
        }
    }

    #[test]
    fn line_has_no_density() {
        let c = builtin_curve("line", &Default::default(), None, None).unwrap();
        assert!(smooth_density(c.as_ref(), 1, 8).is_err());
    }
}
