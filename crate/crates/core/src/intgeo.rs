//! Random (j+1)-planes, orthogonal projections of polygonals and of
//! spherical polygons, and Monte-Carlo checks of averaging formulas over the
//! Grassmannian.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrete_frame::{discrete_normal, NormalOptions};
use crate::error::{Error, Result};
use crate::linalg_geo::{
    gram_schmidt, rp_distance_vec, sphere_polygon_stats, GeodesicStats, ProjPoint, Vector,
};
use crate::polyline::{total_curvature, Polygonal, EPS_SEG};
use crate::relaxation::estimate_fj;
use crate::smooth_curve::{inscribe_uniform, CurveOracle};

/// Points whose projection is shorter than this are treated as polar.
pub const POLAR_TOL: f64 = 1e-8;

/// Monte-Carlo samples used when the caller does not choose.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Reports with `|z| > Z_LIMIT` are flagged.
pub const Z_LIMIT: f64 = 3.0;

/// Orthonormal basis of a k-plane through the origin of R^d.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrassmannPlane {
    pub basis: Vec<Vector>,
}

impl GrassmannPlane {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the orthogonal projection of `x` in this basis.
    pub fn project(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.basis.len(), self.basis.iter().map(|b| b.dot(x)))
    }

    /// Same subspace with an extra zero coordinate appended to projections.
    pub fn padded(&self) -> Self {
        let mut basis = self.basis.clone();
        basis.push(Vector::zeros(basis[0].len()));
        Self { basis }
    }
}

/// Generator for Monte-Carlo sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniformly distributed k-plane in R^d: Gram-Schmidt on `k` standard normal
/// vectors, redrawn in the (measure-zero) rank-deficient case.
pub fn sample_plane_with<R: Rng>(dim: usize, k: usize, rng: &mut R) -> Result<GrassmannPlane> {
    if k == 0 || k > dim {
        return Err(Error::BadParams(format!("plane dimension {k} outside 1..={dim}")));
    }
    loop {
        let g: Vec<Vector> = (0..k)
            .map(|_| Vector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal))))
            .collect();
        if let Ok(basis) = gram_schmidt(&g, 1e-10) {
            return Ok(GrassmannPlane { basis });
        }
    }
}

pub fn sample_plane(dim: usize, k: usize, seed: u64) -> Result<GrassmannPlane> {
    sample_plane_with(dim, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Projection of `p` in the coordinates of `plane`, with consecutive
/// coincident vertices merged.
pub fn project_polygonal(p: &Polygonal, plane: &GrassmannPlane) -> Result<Polygonal> {
    let mut out: Vec<Vector> = Vec::with_capacity(p.vertices().len());
    for v in p.vertices() {
        let w = plane.project(v);
        match out.last() {
            Some(last) if (&w - last).norm() <= EPS_SEG => {}
            _ => out.push(w),
        }
    }
    if p.is_closed() {
        while out.len() > 1 && (&out[0] - out.last().unwrap()).norm() <= EPS_SEG {
            out.pop();
        }
    }
    let min = if p.is_closed() { 3 } else { 2 };
    if out.len() < min {
        return Err(Error::DegenerateProjection);
    }
    Polygonal::new(out, p.is_closed()).map_err(|_| Error::DegenerateProjection)
}

/// `x ↦ π(x)/‖π(x)‖` in the plane's coordinates; fails with `NearPolar(i)`
/// for the first point that is almost orthogonal to the plane.
pub fn project_sphere_polygon(points: &[Vector], plane: &GrassmannPlane) -> Result<Vec<Vector>> {
    points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let w = plane.project(x);
            let n = w.norm();
            if n <= POLAR_TOL * x.norm() {
                Err(Error::NearPolar(i))
            } else {
                Ok(w / n)
            }
        })
        .collect()
}

/// Projective variant of [`project_sphere_polygon`].
pub fn project_projective_polygon(points: &[ProjPoint], plane: &GrassmannPlane) -> Result<Vec<ProjPoint>> {
    let reps: Vec<Vector> = points.iter().map(|p| p.rep().clone()).collect();
    project_sphere_polygon(&reps, plane)?.iter().map(ProjPoint::new).collect()
}

/// Direct value against a Monte-Carlo mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntGeoReport {
    pub quantity: String,
    pub direct: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub n_samples: usize,
    pub rejected: usize,
    pub z_score: f64,
    pub passed: bool,
}

impl IntGeoReport {
    fn new(quantity: &str, direct: f64, values: &[f64], rejected: usize) -> Self {
        let n = values.len();
        let mean = if n > 0 { values.iter().sum::<f64>() / n as f64 } else { f64::NAN };
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let stderr = (var / n.max(1) as f64).sqrt();
        let z_score = z_score(mean, direct, stderr);
        Self {
            quantity: quantity.to_string(),
            direct,
            mc_mean: mean,
            mc_stderr: stderr,
            n_samples: n,
            rejected,
            z_score,
            passed: n > 0 && z_score.abs() <= Z_LIMIT,
        }
    }
}

/// Relative rounding floor applied to the standard error, so that samples
/// that agree with the direct value to rounding do not produce huge z-scores.
const STDERR_FLOOR: f64 = 1e-10;

fn z_score(mean: f64, direct: f64, stderr: f64) -> f64 {
    let se = stderr.max(STDERR_FLOOR * direct.abs().max(1.0));
    (mean - direct) / se
}

/// Evaluates `f` on `samples` independent k-planes; `None` marks a rejected
/// sample. Results are reduced in sample order, so a seed fixes the output.
fn monte_carlo<F>(dim: usize, k: usize, samples: usize, seed: u64, f: F) -> Result<(Vec<Vec<f64>>, usize)>
where
    F: Fn(&GrassmannPlane) -> Result<Option<Vec<f64>>> + Sync,
{
    let raw = (0..samples)
        .into_par_iter()
        .map(|i| {
            let plane = sample_plane_with(dim, k, &mut sample_rng(seed, i as u64))?;
            f(&plane)
        })
        .collect::<Result<Vec<_>>>()?;
    let rejected = raw.iter().filter(|r| r.is_none()).count();
    Ok((raw.into_iter().flatten().collect(), rejected))
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// Which geometry the projected polygon lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TarMode {
    /// Points on S^N, arcs are minimal great-circle arcs.
    Sphere,
    /// Classes in RP^N, arcs are minimal projective geodesics.
    Projective,
}

/// Length, rotation and ambient total curvature of a polygon against the
/// averages of the same quantities over its projections onto `(j+1)`-planes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TarReport {
    pub length: IntGeoReport,
    pub rotation: IntGeoReport,
    pub tc: IntGeoReport,
}

fn polygon_stats(points: &[Vector], closed: bool, mode: TarMode) -> Result<GeodesicStats> {
    match mode {
        TarMode::Sphere => sphere_polygon_stats(points, closed),
        TarMode::Projective => {
            let pts = points.iter().map(ProjPoint::new).collect::<Result<Vec<_>>>()?;
            Ok(crate::linalg_geo::geodesic_polygon_stats(&pts, closed))
        }
    }
}

pub fn verify_tar(
    gamma: &[Vector],
    closed: bool,
    j: usize,
    mode: TarMode,
    samples: usize,
    seed: u64,
) -> Result<TarReport> {
    if samples < 100 {
        return Err(Error::BadParams(format!("{samples} samples, need at least 100")));
    }
    let dim = gamma.first().map_or(0, |g| g.len());
    if dim < 2 || j == 0 || j + 1 > dim {
        return Err(Error::InvalidOrder { j, max: dim.saturating_sub(1) });
    }
    let direct = polygon_stats(gamma, closed, mode)?;
    let (rows, rejected) = monte_carlo(dim, j + 1, samples, seed, |plane| {
        let projected = match project_sphere_polygon(gamma, plane) {
            Ok(p) => p,
            Err(Error::NearPolar(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        match polygon_stats(&projected, closed, mode) {
            Ok(s) => Ok(Some(vec![s.length, s.geodesic_rotation, s.ambient_tc])),
            Err(Error::DegenerateArc) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    Ok(TarReport {
        length: IntGeoReport::new("length", direct.length, &column(&rows, 0), rejected),
        rotation: IntGeoReport::new("rotation", direct.geodesic_rotation, &column(&rows, 1), rejected),
        tc: IntGeoReport::new("ambient_tc", direct.ambient_tc, &column(&rows, 2), rejected),
    })
}

/// Normal length of `P` against normal lengths of its projections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IgpReport {
    pub report: IntGeoReport,
    /// For `j = 1`: samples whose projected normal is longer than the
    /// projected total curvature.
    pub planar_bound_violations: Option<usize>,
}

/// `L([n_j](P))` against the mean of `L([n_j](π_p P))` over `(j+1)`-planes,
/// where the projected normal is the last normal in R^{j+1}.
pub fn verify_igp(p: &Polygonal, j: usize, samples: usize, seed: u64) -> Result<IgpReport> {
    let n = p.dim() - 1;
    if j == 0 || j >= n {
        return Err(Error::InvalidOrder { j, max: n.saturating_sub(1) });
    }
    let opts = NormalOptions::default();
    let direct = match discrete_normal(p, j, opts) {
        Ok(dn) => dn.stats.length,
        Err(Error::FlatPolygonal) => 0.0,
        Err(e) => return Err(e),
    };
    let (rows, rejected) = monte_carlo(p.dim(), j + 1, samples, seed, |plane| {
        let q = match project_polygonal(p, plane) {
            Ok(q) => q,
            Err(Error::DegenerateProjection) => return Ok(None),
            Err(e) => return Err(e),
        };
        match discrete_normal(&q, j, opts) {
            Ok(dn) => Ok(Some(vec![dn.stats.length, total_curvature(&q)])),
            Err(Error::FlatPolygonal) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let planar_bound_violations =
        (j == 1).then(|| rows.iter().filter(|r| r[0] > r[1] + crate::discrete_frame::INEQUALITY_TOL).count());
    Ok(IgpReport {
        report: IntGeoReport::new("normal_length", direct, &column(&rows, 0), rejected),
        planar_bound_violations,
    })
}

/// `TC(P)` against the mean of `TC(π_p P)` over `(j+1)`-planes, `0 ≤ j ≤ N − 1`.
pub fn verify_igtc(p: &Polygonal, j: usize, samples: usize, seed: u64) -> Result<IntGeoReport> {
    let n = p.dim() - 1;
    if j >= n {
        return Err(Error::InvalidOrder { j, max: n.saturating_sub(1) });
    }
    let direct = total_curvature(p);
    let (rows, rejected) = monte_carlo(p.dim(), j + 1, samples, seed, |plane| {
        // Line images are padded into a plane, where each reversal turns by π.
        let projected = if j == 0 { project_polygonal(p, &plane.padded()) } else { project_polygonal(p, plane) };
        match projected {
            Ok(q) => Ok(Some(vec![total_curvature(&q)])),
            Err(Error::DegenerateProjection) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    Ok(IntGeoReport::new("total_curvature", direct, &column(&rows, 0), rejected))
}

/// Mean projected length of a unit segment onto random `k`-planes of R^dim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CroftonReport {
    pub dim: usize,
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Ratio of the averaged projected length to the length, estimated on the
/// unit segment along `e_1`.
pub fn crofton_length_constant(dim: usize, k: usize, samples: usize, seed: u64) -> Result<CroftonReport> {
    let e1 = crate::linalg_geo::basis_vector(dim, 0);
    let (rows, _) = monte_carlo(dim, k, samples, seed, |plane| Ok(Some(vec![plane.project(&e1).norm()])))?;
    let r = IntGeoReport::new("crofton", 0.0, &column(&rows, 0), 0);
    Ok(CroftonReport { dim, k, mean: r.mc_mean, stderr: r.mc_stderr, n_samples: r.n_samples })
}

/// Relaxed normal length of `c` against the mean over planes of the normal
/// length of the projected finest inscription.
pub fn verify_igc_curve(
    c: &dyn CurveOracle,
    j: usize,
    schedule: &[usize],
    samples: usize,
    seed: u64,
) -> Result<IntGeoReport> {
    let run = estimate_fj(c, j, schedule)?;
    let direct = run.last_value().unwrap_or(0.0);
    let p = inscribe_uniform(c, *schedule.last().unwrap())?.polygon;
    let mut r = verify_igp(&p, j, samples, seed)?.report;
    r.quantity = "relaxed_normal_length".into();
    r.direct = direct;
    r.z_score = z_score(r.mc_mean, direct, r.mc_stderr);
    r.passed = r.n_samples > 0 && r.z_score.abs() <= Z_LIMIT;
    Ok(r)
}

/// Agreement between the normal of a projection and the projection of the normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionIdentityReport {
    pub j: usize,
    pub n_samples: usize,
    /// Samples skipped because the projection or its normal was degenerate.
    pub degenerate: usize,
    /// Per sample, the largest RP distance over segments.
    pub max_errors: Vec<f64>,
    pub worst: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Compares `[n_j](π_p P)` with `x ↦ [π_p x]` applied to `[n_j](P)`, segment by
/// segment, on `samples` random `(j+1)`-planes.
pub fn check_projection_identity(p: &Polygonal, j: usize, samples: usize, seed: u64, tol: f64) -> Result<ProjectionIdentityReport> {
    let n = p.dim() - 1;
    if j == 0 || j >= n {
        return Err(Error::InvalidOrder { j, max: n.saturating_sub(1) });
    }
    let opts = NormalOptions::default();
    let dn = discrete_normal(p, j, opts)?;
    let (rows, degenerate) = monte_carlo(p.dim(), j + 1, samples, seed, |plane| {
        let q = match project_polygonal(p, plane) {
            Ok(q) if q.segment_count() == p.segment_count() => q,
            Ok(_) | Err(Error::DegenerateProjection) => return Ok(None),
            Err(e) => return Err(e),
        };
        let dq = match discrete_normal(&q, j, opts) {
            Ok(d) => d,
            Err(Error::FlatPolygonal) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut worst: f64 = 0.0;
        for (a, b) in dn.points.iter().zip(&dq.points) {
            let w = plane.project(a.rep());
            if w.norm() <= POLAR_TOL {
                return Ok(None);
            }
            worst = worst.max(rp_distance_vec(&w, b.rep()));
        }
        Ok(Some(vec![worst]))
    })?;
    let max_errors = column(&rows, 0);
    let worst = max_errors.iter().copied().fold(0.0, f64::max);
    Ok(ProjectionIdentityReport {
        j,
        n_samples: max_errors.len(),
        degenerate,
        holds: !max_errors.is_empty() && worst <= tol,
        max_errors,
        worst,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg_geo::vector;

    #[test]
    fn full_plane_is_identity_up_to_rotation() {
        let plane = sample_plane(3, 3, 7).unwrap();
        let x = vector(&[0.3, -1.0, 2.0]);
        assert!((plane.project(&x).norm() - x.norm()).abs() < 1e-12);
    }

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(sample_plane(4, 2, 11).unwrap(), sample_plane(4, 2, 11).unwrap());
        assert_ne!(sample_plane(4, 2, 11).unwrap(), sample_plane(4, 2, 12).unwrap());
    }

    #[test]
    fn perpendicular_segment_collapses() {
        let p = Polygonal::new(vec![vector(&[0.0, 0.0, 0.0]), vector(&[0.0, 0.0, 1.0])], false).unwrap();
        let plane = GrassmannPlane { basis: vec![vector(&[1.0, 0.0, 0.0]), vector(&[0.0, 1.0, 0.0])] };
        assert_eq!(project_polygonal(&p, &plane), Err(Error::DegenerateProjection));
    }

    #[test]
    fn polar_points_are_flagged() {
        let plane = GrassmannPlane { basis: vec![vector(&[1.0, 0.0, 0.0]), vector(&[0.0, 1.0, 0.0])] };
        let pts = [vector(&[1.0, 0.0, 0.0]), vector(&[0.0, 0.0, 1.0])];
        assert_eq!(project_sphere_polygon(&pts, &plane), Err(Error::NearPolar(1)));
    }
}
