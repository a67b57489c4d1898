//! Discrete j-th normals of polygonals, their projective lengths and
//! curvatures, the inequality checks between consecutive orders, and the
//! six-segment example where coarsening increases total absolute torsion.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg_geo::{
    gram_schmidt, orthogonal_complement_direction, residual_against, rp_distance_vec, sphere_distance,
    geodesic_polygon_stats, turning_angle, GeodesicStats, ProjPoint, Vector,
};
use crate::polyline::{segment_directions, total_curvature, Polygonal};

/// Thresholds of the pivot search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalOptions {
    /// Two directions are projectively distinct when their RP distance exceeds this.
    pub tol_angle: f64,
    /// A candidate is independent when its residual exceeds this fraction of its norm.
    pub rank_tol: f64,
}

impl Default for NormalOptions {
    fn default() -> Self {
        Self { tol_angle: 1e-8, rank_tol: 1e-10 }
    }
}

/// Discrete osculating space of one segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteOsculating {
    pub segment_index: usize,
    /// `i` followed by the pivot chain, in traversal order (indices taken mod the
    /// segment count for closed polygonals).
    pub pivots: Vec<usize>,
    /// Orthonormal basis of the span of the pivot directions.
    pub frame: Vec<Vector>,
}

/// The projective polygon `[n_j](P)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteNormal {
    pub j: usize,
    pub closed: bool,
    /// One class per segment.
    pub points: Vec<ProjPoint>,
    /// Segments whose class was copied from the previous segment.
    pub fallback_segments: Vec<usize>,
    pub stats: GeodesicStats,
}

/// Number of later directions needed after `v_i`: `j` for `j < N` and `N − 1` for `j = N`.
fn chain_length(dim: usize, j: usize) -> usize {
    if j == dim - 1 {
        j - 1
    } else {
        j
    }
}

/// Pivot chain of segment `i`: the first later direction projectively distinct
/// from `v_i`, then repeatedly the first later direction that increases the rank.
/// Closed polygonals are searched cyclically for at most one wrap.
pub fn discrete_osculating(
    dirs: &[Vector],
    closed: bool,
    i: usize,
    needed: usize,
    opts: NormalOptions,
) -> Option<DiscreteOsculating> {
    let m = dirs.len();
    let mut pivots = vec![i];
    let mut frame = vec![dirs[i].clone()];
    let end = if closed { i + m } else { m };
    let mut h = i + 1;
    while pivots.len() < needed + 1 && h < end {
        let idx = h % m;
        let v = &dirs[idx];
        let accept = if pivots.len() == 1 {
            rp_distance_vec(v, &dirs[i]) > opts.tol_angle
        } else {
            residual_against(v, &frame).norm() > opts.rank_tol * v.norm()
        };
        if accept {
            let r = residual_against(v, &frame);
            let rn = r.norm();
            frame.push(r / rn);
            pivots.push(idx);
        }
        h += 1;
    }
    (pivots.len() == needed + 1).then_some(DiscreteOsculating { segment_index: i, pivots, frame })
}

/// Normal direction attached to a completed chain.
fn chain_normal(dirs: &[Vector], osc: &DiscreteOsculating, dim: usize, j: usize) -> Result<Vector> {
    let chosen: Vec<Vector> = osc.pivots.iter().map(|&k| dirs[k].clone()).collect();
    if j == dim - 1 {
        orthogonal_complement_direction(&chosen)
    } else {
        // Direction of v_i orthogonal to the later pivots, inside their common span.
        let mut ordered: Vec<Vector> = chosen[1..].to_vec();
        ordered.push(chosen[0].clone());
        let q = gram_schmidt(&ordered, 0.0)?;
        Ok(q.last().unwrap().clone())
    }
}

/// Discrete j-th normal `[n_j](P)` with its geodesic stats in RP^N.
///
/// For `j < N` the class at segment `i` is the direction of `v_i` orthogonal to
/// its `j` pivots; for `j = N` it is the normal to the span of `v_i` and its
/// `N − 1` pivots. On open polygonals a segment without a complete chain
/// repeats the previous class.
pub fn discrete_normal(p: &Polygonal, j: usize, opts: NormalOptions) -> Result<DiscreteNormal> {
    let dim = p.dim();
    if j == 0 || j > dim - 1 {
        return Err(Error::InvalidOrder { j, max: dim - 1 });
    }
    let dirs = segment_directions(p);
    let needed = chain_length(dim, j);
    let closed = p.is_closed();
    let normals: Vec<Option<Vector>> = (0..dirs.len())
        .into_par_iter()
        .map(|i| {
            discrete_osculating(&dirs, closed, i, needed, opts).and_then(|osc| chain_normal(&dirs, &osc, dim, j).ok())
        })
        .collect();
    let mut points: Vec<ProjPoint> = Vec::with_capacity(dirs.len());
    let mut fallback_segments = Vec::new();
    for (i, n) in normals.into_iter().enumerate() {
        match (n, points.last()) {
            (Some(v), _) => points.push(ProjPoint::new(&v)?),
            (None, Some(prev)) if !closed => {
                fallback_segments.push(i);
                points.push(prev.clone());
            }
            _ => return Err(Error::FlatPolygonal),
        }
    }
    let stats = geodesic_polygon_stats(&points, closed);
    Ok(DiscreteNormal { j, closed, points, fallback_segments, stats })
}

/// Total absolute torsion of a polygonal in R^3: the RP^2 length of `[n_2](P)`.
pub fn tat(p: &Polygonal) -> Result<f64> {
    if p.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: p.dim() });
    }
    discrete_normal(p, 2, NormalOptions::default()).map(|n| n.stats.length)
}

/// Length of `[n_j](P)`, or zero when `P` is too flat for order `j`; the flag
/// records which case applied.
pub fn normal_length_or_flat(p: &Polygonal, j: usize, opts: NormalOptions) -> Result<(f64, bool)> {
    match discrete_normal(p, j, opts) {
        Ok(n) => Ok((n.stats.length, false)),
        Err(Error::FlatPolygonal) => Ok((0.0, true)),
        Err(e) => Err(e),
    }
}

/// One inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Tolerance used when deciding `lhs ≤ rhs`.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Inequality suite for every order `j = 1..N`:
/// `TC([n_1]) ≤ TC(P) + L([n_1])`, `TC([n_j]) ≤ L([n_{j−1}]) + L([n_j])` for
/// `j ≥ 2`, and `L([n_1]) ≤ TC(P)`. `TC` of a normal polygon is its
/// `length + geodesic rotation`. Orders at which `P` is too flat contribute
/// zero-length normals.
pub fn check_inequalities(p: &Polygonal, opts: NormalOptions) -> Result<Vec<InequalityCheck>> {
    let n = p.dim() - 1;
    let tc = total_curvature(p);
    let mut stats: Vec<GeodesicStats> = Vec::with_capacity(n);
    for j in 1..=n {
        stats.push(match discrete_normal(p, j, opts) {
            Ok(dn) => dn.stats,
            Err(Error::FlatPolygonal) => GeodesicStats::default(),
            Err(e) => return Err(e),
        });
    }
    let check = |name: &str, j: usize, lhs: f64, rhs: f64| InequalityCheck {
        name: name.to_string(),
        j,
        lhs,
        rhs,
        holds: lhs <= rhs + INEQUALITY_TOL,
    };
    let mut out = vec![check("tc_n1_le_tc_plus_l_n1", 1, stats[0].ambient_tc, tc + stats[0].length)];
    for j in 2..=n {
        out.push(check(
            "tc_nj_le_l_prev_plus_l_nj",
            j,
            stats[j - 1].ambient_tc,
            stats[j - 2].length + stats[j - 1].length,
        ));
    }
    out.push(check("l_n1_le_tc", 1, stats[0].length, tc));
    Ok(out)
}

/// Shape of the six-segment construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmonParams {
    /// Half the angle between the middle directions `v_3`, `v_4` on the equator.
    pub half_gap: f64,
    /// Angle between the great circle of `v_1, v_2, v_3` and the equator.
    pub alpha: f64,
    /// Arc from `v_2` to `v_3`.
    pub arc_near: f64,
    /// Arc from `v_1` to `v_2`.
    pub arc_far: f64,
}

impl Default for EmonParams {
    fn default() -> Self {
        Self { half_gap: 1.2, alpha: 0.5, arc_near: 1.4, arc_far: 0.3 }
    }
}

/// Output of [`counterexample_emon`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmonResult {
    pub params: EmonParams,
    pub p: Polygonal,
    pub p_prime: Polygonal,
    pub tat_p: f64,
    pub tat_p_prime: f64,
    /// Tantrix turning angles of `P` at `v_3` and `v_4`.
    pub alpha: f64,
    pub beta: f64,
    /// Tantrix turning angle of `P′` at `v_5`.
    pub epsilon: f64,
    /// Lengths of the two middle segments of `P` after balancing.
    pub middle_lengths: [f64; 2],
    /// Residual area difference of the triangles `(v_2, v_3, w)` and `(w, v_4, v_5)`.
    pub area_gap: f64,
}

fn spherical_triangle_area(a: &Vector, b: &Vector, c: &Vector) -> f64 {
    let triple = a.dot(&b.cross(c)).abs();
    2.0 * triple.atan2(1.0 + a.dot(b) + b.dot(c) + c.dot(a))
}

fn rotate_about(axis: &Vector, v: &Vector, angle: f64) -> Vector {
    let k = axis / axis.norm();
    let (s, c) = angle.sin_cos();
    v * c + k.cross(v) * s + &k * (k.dot(v) * (1.0 - c))
}

/// Six-segment polygonal `P` whose first and last three segments lie in two
/// planes, and the five-segment `P′` that merges the middle two, with
/// `TAT(P′) > TAT(P)`.
///
/// Directions: `v_3, v_4` on the equator at longitudes `∓half_gap`; `v_2, v_1`
/// on the great circle through `v_3` at angle `alpha`; `v_4, v_5, v_6` are the
/// images of `v_3, v_2, v_1` under the half-turn about `e_1`. The merged
/// direction `w` is balanced by bisection on the two middle segment lengths
/// until the triangles `(v_2, v_3, w)` and `(w, v_4, v_5)` have equal area.
pub fn counterexample_emon(params: EmonParams) -> Result<EmonResult> {
    let EmonParams { half_gap, alpha, arc_near, arc_far } = params;
    let v3 = Vector::from_vec(vec![half_gap.cos(), -half_gap.sin(), 0.0]);
    let v4 = Vector::from_vec(vec![half_gap.cos(), half_gap.sin(), 0.0]);
    let along_equator = Vector::from_vec(vec![half_gap.sin(), half_gap.cos(), 0.0]);
    let incoming = rotate_about(&v3, &along_equator, alpha);
    let v2 = &v3 * arc_near.cos() - &incoming * arc_near.sin();
    let v1 = &v3 * (arc_near + arc_far).cos() - &incoming * (arc_near + arc_far).sin();
    let half_turn = |x: &Vector| Vector::from_vec(vec![x[0], -x[1], -x[2]]);
    let v5 = half_turn(&v2);
    let v6 = half_turn(&v1);

    let merged = |l3: f64| -> Vector {
        let w = &v3 * l3 + &v4 * (2.0 - l3);
        let n = w.norm();
        w / n
    };
    let gap = |l3: f64| -> f64 {
        let w = merged(l3);
        spherical_triangle_area(&v2, &v3, &w) - spherical_triangle_area(&w, &v4, &v5)
    };
    // Larger l3 pulls w towards v3 and shrinks the first triangle.
    let (mut lo, mut hi) = (0.05, 1.95);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-15 {
            break;
        }
    }
    let l3 = 0.5 * (lo + hi);
    let l4 = 2.0 - l3;
    let area_gap = gap(l3).abs();

    let steps = [
        v1.clone(),
        v2.clone(),
        &v3 * l3,
        &v4 * l4,
        v5.clone(),
        v6.clone(),
    ];
    let mut vertices = vec![Vector::zeros(3)];
    for st in &steps {
        let next = vertices.last().unwrap() + st;
        vertices.push(next);
    }
    let p = Polygonal::new(vertices.clone(), false)?;
    let mut coarse = vertices;
    coarse.remove(3);
    let p_prime = Polygonal::new(coarse, false)?;

    let w = merged(l3);
    Ok(EmonResult {
        params,
        tat_p: tat(&p)?,
        tat_p_prime: tat(&p_prime)?,
        alpha: turning_angle(&v2, &v3, &v4)?,
        beta: turning_angle(&v3, &v4, &v5)?,
        epsilon: turning_angle(&w, &v5, &v6)?,
        middle_lengths: [l3, l4],
        area_gap,
        p,
        p_prime,
    })
}

/// Arc length of the tantrix `t_P` on the sphere (the polygonal's total curvature).
pub fn tantrix_length(p: &Polygonal) -> f64 {
    let dirs = segment_directions(p);
    let m = dirs.len();
    let arcs = if p.is_closed() { m } else { m - 1 };
    (0..arcs).map(|i| sphere_distance(&dirs[i], &dirs[(i + 1) % m])).sum()
}
