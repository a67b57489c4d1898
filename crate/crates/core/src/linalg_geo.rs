//! Dynamic-dimension vectors, Gram-Schmidt, orthogonal complements and the
//! metric geometry of the unit sphere and of real projective space.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Column vector in R^d.
pub type Vector = DVector<f64>;

/// Tolerance on unit norms.
pub const EPS_UNIT: f64 = 1e-9;
/// Tolerance on pairwise orthogonality.
pub const EPS_ORTH: f64 = 1e-9;
/// Default relative rank tolerance for Gram-Schmidt residuals.
pub const RANK_TOL: f64 = 1e-10;

/// Builds a vector from a slice.
pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

/// Standard basis vector `e_k` (0-based) in R^d.
pub fn basis_vector(d: usize, k: usize) -> Vector {
    let mut v = DVector::zeros(d);
    v[k] = 1.0;
    v
}

/// Angle in `[0, π]` between two nonzero vectors.
///
/// Uses `2·atan2(|û − ŵ|, |û + ŵ|)`, which keeps full relative accuracy for
/// nearly parallel and nearly antiparallel inputs where `acos` of the dot
/// product loses half the digits.
pub fn angle_between(u: &Vector, w: &Vector) -> f64 {
    let uh = u / u.norm();
    let wh = w / w.norm();
    2.0 * (&uh - &wh).norm().atan2((&uh + &wh).norm())
}

/// Residual of `v` against an orthonormal list, with one re-orthogonalization pass.
pub fn residual_against(v: &Vector, orthonormal: &[Vector]) -> Vector {
    let mut r = v.clone();
    for _ in 0..2 {
        for q in orthonormal {
            let c = r.dot(q);
            r.axpy(-c, q, 1.0);
        }
    }
    r
}

fn rank_threshold(input_norm: f64, tol: f64) -> f64 {
    if input_norm <= tol {
        tol
    } else {
        tol * input_norm
    }
}

/// Gram-Schmidt orthonormalization that also returns the residual norms
/// `‖v_k^⊥‖` before normalization.
pub fn gram_schmidt_with_norms(vectors: &[Vector], tol: f64) -> Result<(Vec<Vector>, Vec<f64>)> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    let mut norms = Vec::with_capacity(vectors.len());
    if let Some(first) = vectors.first() {
        let d = first.len();
        if vectors.len() > d {
            return Err(Error::RankDeficient(d + 1));
        }
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
    }
    for (k, v) in vectors.iter().enumerate() {
        let r = residual_against(v, &out);
        let rn = r.norm();
        if !(rn > rank_threshold(v.norm(), tol)) {
            return Err(Error::RankDeficient(k + 1));
        }
        norms.push(rn);
        out.push(r / rn);
    }
    Ok((out, norms))
}

/// Orthonormalizes `vectors` in order; the k-th output is the normalized
/// residual of the k-th input against the previous outputs.
///
/// Fails with `RankDeficient(k)` (1-based) when the k-th residual is below
/// `tol` relative to the k-th input norm.
pub fn gram_schmidt(vectors: &[Vector], tol: f64) -> Result<Vec<Vector>> {
    gram_schmidt_with_norms(vectors, tol).map(|(q, _)| q)
}

/// Unit vector orthogonal to `d − 1` independent vectors of R^d.
///
/// This is the generalized cross product: component `k` is the signed
/// cofactor of the last row of the `d × d` matrix whose first `d − 1` rows
/// are the basis, so `det[basis; w] > 0`. In R^3 it is `a × b`.
pub fn orthogonal_complement_direction(basis: &[Vector]) -> Result<Vector> {
    let d = basis.first().map_or(0, |b| b.len());
    if d < 2 || basis.len() != d - 1 {
        return Err(Error::DimensionMismatch { expected: d.max(2) - 1, found: basis.len() });
    }
    gram_schmidt(basis, RANK_TOL)?;
    let mut w = DVector::zeros(d);
    for k in 0..d {
        let minor = DMatrix::from_fn(d - 1, d - 1, |r, c| {
            let col = if c < k { c } else { c + 1 };
            basis[r][col]
        });
        let sign = if (d - 1 + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        w[k] = sign * minor.determinant();
    }
    let n = w.norm();
    if !(n > 0.0) {
        return Err(Error::RankDeficient(d - 1));
    }
    Ok(w / n)
}

/// Great-circle distance between unit vectors, in `[0, π]`.
pub fn sphere_distance(u: &Vector, w: &Vector) -> f64 {
    angle_between(u, w)
}

/// Point of RP^N stored through its canonical unit representative: the first
/// coordinate whose magnitude exceeds [`EPS_UNIT`] is positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjPoint {
    rep: Vector,
}

impl ProjPoint {
    /// Class of a nonzero vector.
    pub fn new(v: &Vector) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateArc);
        }
        let mut rep = v / n;
        if let Some(x) = rep.iter().find(|x| x.abs() > EPS_UNIT) {
            if *x < 0.0 {
                rep.neg_mut();
            }
        }
        Ok(Self { rep })
    }

    /// Canonical representative.
    pub fn rep(&self) -> &Vector {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.len()
    }
}

/// Distance in RP^N, in `[0, π/2]`.
pub fn rp_distance(p: &ProjPoint, q: &ProjPoint) -> f64 {
    rp_distance_vec(p.rep(), q.rep())
}

/// Projective distance between the classes of two nonzero vectors.
pub fn rp_distance_vec(u: &Vector, w: &Vector) -> f64 {
    let theta = angle_between(u, w);
    theta.min(std::f64::consts::PI - theta)
}

/// Flips `w` if needed so that `w · reference ≥ 0`.
pub fn align_with(w: &Vector, reference: &Vector) -> Vector {
    if w.dot(reference) < 0.0 {
        -w
    } else {
        w.clone()
    }
}

/// Exterior turning angle at `b` of the geodesic path `a → b → c` on the sphere.
///
/// The tangent at `b` of the incoming arc is `−â⊥` and of the outgoing arc is
/// `ĉ⊥`, where `⊥` denotes the residual against `b`.
pub fn turning_angle(a: &Vector, b: &Vector, c: &Vector) -> Result<f64> {
    let bn = b / b.norm();
    let ta = a - &bn * a.dot(&bn);
    let tc = c - &bn * c.dot(&bn);
    if ta.norm() <= 1e-14 * a.norm() || tc.norm() <= 1e-14 * c.norm() {
        return Err(Error::DegenerateArc);
    }
    Ok(angle_between(&(-ta), &tc))
}

/// Length, geodesic rotation and ambient total curvature of a geodesic polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct GeodesicStats {
    pub length: f64,
    pub geodesic_rotation: f64,
    pub ambient_tc: f64,
}

/// Projective points closer than this are merged before arcs are built.
pub const DUPLICATE_ANGLE: f64 = 1e-12;

/// Removes consecutive repetitions (cyclically if `closed`), comparing each
/// point against the last kept one.
pub fn collapse_duplicates(points: &[ProjPoint], closed: bool, tol: f64) -> Vec<ProjPoint> {
    let mut kept: Vec<ProjPoint> = Vec::with_capacity(points.len());
    for p in points {
        match kept.last() {
            Some(last) if rp_distance(last, p) <= tol => {}
            _ => kept.push(p.clone()),
        }
    }
    if closed {
        while kept.len() > 1 && rp_distance(&kept[0], kept.last().unwrap()) <= tol {
            kept.pop();
        }
    }
    kept
}

/// Stats of the projective polygon joining consecutive classes by minimal
/// geodesics. Turning angles are measured on local lifts chosen with
/// nonnegative dot products against the junction point.
pub fn geodesic_polygon_stats(points: &[ProjPoint], closed: bool) -> GeodesicStats {
    let pts = collapse_duplicates(points, closed, DUPLICATE_ANGLE);
    let m = pts.len();
    if m < 2 {
        return GeodesicStats::default();
    }
    let arcs = if closed { m } else { m - 1 };
    let length: f64 = (0..arcs).map(|i| rp_distance(&pts[i], &pts[(i + 1) % m])).sum();
    let junctions: Vec<usize> = if closed { (0..m).collect() } else { (1..m - 1).collect() };
    let mut rotation = 0.0;
    for i in junctions {
        let b = pts[i].rep();
        let a = align_with(pts[(i + m - 1) % m].rep(), b);
        let c = align_with(pts[(i + 1) % m].rep(), b);
        // After collapsing, arcs are nontrivial and shorter than π/2 on these lifts.
        rotation += turning_angle(&a, b, &c).unwrap_or(0.0);
    }
    GeodesicStats { length, geodesic_rotation: rotation, ambient_tc: length + rotation }
}

/// Stats of a polygon on the sphere itself (no antipodal identification).
/// Consecutive coincident points are merged; antipodal consecutive points
/// make the arc ambiguous and are reported as `DegenerateArc`.
pub fn sphere_polygon_stats(points: &[Vector], closed: bool) -> Result<GeodesicStats> {
    let mut pts: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        let u = p / p.norm();
        match pts.last() {
            Some(last) if sphere_distance(last, &u) <= DUPLICATE_ANGLE => {}
            _ => pts.push(u),
        }
    }
    if closed {
        while pts.len() > 1 && sphere_distance(&pts[0], pts.last().unwrap()) <= DUPLICATE_ANGLE {
            pts.pop();
        }
    }
    let m = pts.len();
    if m < 2 {
        return Ok(GeodesicStats::default());
    }
    let arcs = if closed { m } else { m - 1 };
    let mut length = 0.0;
    for i in 0..arcs {
        let d = sphere_distance(&pts[i], &pts[(i + 1) % m]);
        if std::f64::consts::PI - d <= 1e-12 {
            return Err(Error::DegenerateArc);
        }
        length += d;
    }
    let junctions: Vec<usize> = if closed { (0..m).collect() } else { (1..m - 1).collect() };
    let mut rotation = 0.0;
    for i in junctions {
        rotation += turning_angle(&pts[(i + m - 1) % m], &pts[i], &pts[(i + 1) % m])?;
    }
    Ok(GeodesicStats { length, geodesic_rotation: rotation, ambient_tc: length + rotation })
}

/// Point at fraction `f ∈ [0, 1]` of the minimal great-circle arc from `u` to `w`
/// (unit inputs, not antipodal).
pub fn geodesic_point(u: &Vector, w: &Vector, f: f64) -> Vector {
    let theta = sphere_distance(u, w);
    if theta < 1e-15 {
        return u.clone();
    }
    let s = theta.sin();
    let p = u * (((1.0 - f) * theta).sin() / s) + w * ((f * theta).sin() / s);
    let n = p.norm();
    p / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn e(d: usize, k: usize) -> Vector {
        basis_vector(d, k)
    }

    #[test]
    fn gram_schmidt_examples() {
        let q = gram_schmidt(&[vector(&[1.0, 0.0, 0.0]), vector(&[1.0, 1.0, 0.0])], RANK_TOL).unwrap();
        assert!((&q[1] - e(3, 1)).norm() < 1e-15);
        let err = gram_schmidt(&[vector(&[1.0, 0.0, 0.0]), vector(&[2.0, 0.0, 0.0])], RANK_TOL);
        assert_eq!(err, Err(Error::RankDeficient(2)));
    }

    #[test]
    fn complement_examples() {
        let w = orthogonal_complement_direction(&[e(3, 0), e(3, 1)]).unwrap();
        assert!((&w - e(3, 2)).norm() < 1e-15);
        let w4 = orthogonal_complement_direction(&[e(4, 0), e(4, 1), e(4, 2)]).unwrap();
        assert!((w4[3].abs() - 1.0).abs() < 1e-15);
        assert!(orthogonal_complement_direction(&[e(3, 0), e(3, 0) * 2.0]).is_err());
        // Matches the ordinary cross product on a generic pair.
        let a = vector(&[0.3, -1.2, 0.7]);
        let b = vector(&[2.0, 0.1, -0.4]);
        let c = a.cross(&b);
        let w = orthogonal_complement_direction(&[a, b]).unwrap();
        assert!((&w - &c / c.norm()).norm() < 1e-14);
    }

    #[test]
    fn distances() {
        assert_eq!(sphere_distance(&e(3, 0), &e(3, 0)), 0.0);
        assert!((sphere_distance(&e(3, 0), &(-e(3, 0))) - PI).abs() < 1e-15);
        assert!((sphere_distance(&e(3, 0), &e(3, 1)) - FRAC_PI_2).abs() < 1e-15);
        let p = ProjPoint::new(&e(3, 0)).unwrap();
        let q = ProjPoint::new(&(-e(3, 0))).unwrap();
        assert_eq!(p, q);
        assert_eq!(rp_distance(&p, &q), 0.0);
        let r = ProjPoint::new(&e(3, 1)).unwrap();
        assert!((rp_distance(&p, &r) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn small_angles_are_resolved() {
        let u = vector(&[1.0, 0.0, 0.0]);
        let w = vector(&[1.0, 1e-10, 0.0]);
        assert!((sphere_distance(&u, &w) - 1e-10).abs() < 1e-20);
    }

    #[test]
    fn turning_angle_examples() {
        let a = vector(&[1.0, 0.0, 0.0]);
        let b = vector(&[1.0, 1.0, 0.0]) / 2f64.sqrt();
        let c = e(3, 1);
        assert!(turning_angle(&a, &b, &c).unwrap().abs() < 1e-15);
        assert!((turning_angle(&e(3, 0), &e(3, 1), &e(3, 0)).unwrap() - PI).abs() < 1e-15);
        assert!((turning_angle(&e(3, 0), &e(3, 2), &e(3, 1)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(turning_angle(&e(3, 0), &e(3, 0), &e(3, 1)), Err(Error::DegenerateArc));
    }

    #[test]
    fn polygon_stats_examples() {
        let p = ProjPoint::new(&e(3, 0)).unwrap();
        assert_eq!(geodesic_polygon_stats(std::slice::from_ref(&p), false), GeodesicStats::default());
        let theta: f64 = 0.3;
        let q = ProjPoint::new(&vector(&[theta.cos(), theta.sin(), 0.0])).unwrap();
        let s = geodesic_polygon_stats(&[p, q], false);
        assert!((s.length - theta).abs() < 1e-15 && s.geodesic_rotation == 0.0);
        // Edge directions of a regular octagon: eight classes spaced 2π/8 on one projective line.
        let pts: Vec<ProjPoint> = (0..8)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 8.0;
                ProjPoint::new(&vector(&[a.cos(), a.sin(), 0.0])).unwrap()
            })
            .collect();
        let s = geodesic_polygon_stats(&pts, true);
        assert!((s.length - 2.0 * PI).abs() < 1e-12);
        assert!(s.geodesic_rotation.abs() < 1e-12);
    }
}
