//! Polygonal curves: validation, segment directions, mesh, total curvature,
//! and polygonals inscribed in a curve oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg_geo::{sphere_distance, Vector};
use crate::smooth_curve::CurveOracle;

/// Segments shorter than this are rejected.
pub const EPS_SEG: f64 = 1e-12;

/// Ordered vertex list in R^d; a closed polygonal has the extra segment from
/// the last vertex back to the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygonal {
    vertices: Vec<Vector>,
    closed: bool,
}

impl Polygonal {
    pub fn new(vertices: Vec<Vector>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(Error::InvalidPolygonal(format!(
                "{} vertices, need at least {min}",
                vertices.len()
            )));
        }
        let d = vertices[0].len();
        if d < 2 {
            return Err(Error::InvalidPolygonal("ambient dimension below 2".into()));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
        if vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidPolygonal("non-finite coordinate".into()));
        }
        let p = Self { vertices, closed };
        for i in 0..p.segment_count() {
            if p.segment(i).norm() <= EPS_SEG {
                return Err(Error::DegenerateSegment(i));
            }
        }
        Ok(p)
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Displacement vector of segment `i`.
    pub fn segment(&self, i: usize) -> Vector {
        let n = self.vertices.len();
        &self.vertices[(i + 1) % n] - &self.vertices[i]
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count()).map(|i| self.segment(i).norm()).sum()
    }

    /// Same polygonal traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v, closed: self.closed }
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&self, f: impl Fn(&Vector) -> Vector) -> Result<Self> {
        Self::new(self.vertices.iter().map(f).collect(), self.closed)
    }
}

/// Unit direction of every segment, in order.
pub fn segment_directions(p: &Polygonal) -> Vec<Vector> {
    (0..p.segment_count())
        .map(|i| {
            let s = p.segment(i);
            let n = s.norm();
            s / n
        })
        .collect()
}

/// Maximum segment length.
pub fn mesh(p: &Polygonal) -> f64 {
    (0..p.segment_count()).map(|i| p.segment(i).norm()).fold(0.0, f64::max)
}

/// Sum of the angles between consecutive segment directions (cyclically if closed).
pub fn total_curvature(p: &Polygonal) -> f64 {
    let dirs = segment_directions(p);
    let m = dirs.len();
    let junctions = if p.is_closed() { m } else { m - 1 };
    (0..junctions).map(|i| sphere_distance(&dirs[i], &dirs[(i + 1) % m])).sum()
}

/// Polygonal whose vertices are `curve(params[i])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InscribedPolygonal {
    pub polygon: Polygonal,
    pub params: Vec<f64>,
}

impl InscribedPolygonal {
    /// Evaluates `curve` at `params`. For a closed curve the polygonal is closed
    /// and `params` must not repeat the initial point of the period.
    pub fn new(curve: &dyn CurveOracle, params: Vec<f64>) -> Result<Self> {
        if params.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPolygonal("parameters not strictly increasing".into()));
        }
        let closed = curve.closed();
        if closed {
            let (a, b) = curve.domain();
            if let (Some(f), Some(l)) = (params.first(), params.last()) {
                if !(l - f < b - a) {
                    return Err(Error::InvalidPolygonal("parameters span more than one period".into()));
                }
            }
        }
        let vertices = params.iter().map(|&s| curve.eval(s)).collect();
        Ok(Self { polygon: Polygonal::new(vertices, closed)?, params })
    }

    /// Parameter intervals `[s_i, s_{i+1}]`, including the wrap-around arc when closed.
    pub fn arcs(&self, curve: &dyn CurveOracle) -> Vec<(f64, f64)> {
        let mut arcs: Vec<(f64, f64)> = self.params.windows(2).map(|w| (w[0], w[1])).collect();
        if self.polygon.is_closed() {
            let (a, b) = curve.domain();
            arcs.push((*self.params.last().unwrap(), self.params[0] + (b - a)));
        }
        arcs
    }
}

/// Maximum over the parameter arcs of the diameter of the curve arc, estimated
/// by pairwise distances over `samples_per_arc` uniform samples per arc.
pub fn modulus(p: &InscribedPolygonal, curve: &dyn CurveOracle, samples_per_arc: usize) -> f64 {
    let k = samples_per_arc.max(2);
    let mut best: f64 = 0.0;
    for (s0, s1) in p.arcs(curve) {
        let pts: Vec<Vector> = (0..k)
            .map(|i| curve.eval(s0 + (s1 - s0) * i as f64 / (k - 1) as f64))
            .collect();
        for i in 0..k {
            for q in &pts[i + 1..] {
                best = best.max((&pts[i] - q).norm());
            }
        }
    }
    best
}

/// Inserts `factor − 1` equally spaced parameters inside every arc.
pub fn refine(p: &InscribedPolygonal, curve: &dyn CurveOracle, factor: usize) -> Result<InscribedPolygonal> {
    if factor < 2 {
        return Err(Error::InvalidPolygonal("refinement factor below 2".into()));
    }
    let mut params = Vec::with_capacity(p.params.len() * factor);
    for (s0, s1) in p.arcs(curve) {
        for i in 0..factor {
            params.push(s0 + (s1 - s0) * i as f64 / factor as f64);
        }
    }
    if !p.polygon.is_closed() {
        params.push(*p.params.last().unwrap());
    }
    InscribedPolygonal::new(curve, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg_geo::vector;
    use std::f64::consts::PI;

    fn square() -> Polygonal {
        let v = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        Polygonal::new(v.iter().map(|c| vector(c)).collect(), true).unwrap()
    }

    #[test]
    fn square_directions_mesh_tc() {
        let p = square();
        let d = segment_directions(&p);
        let expect = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        for (u, e) in d.iter().zip(expect) {
            assert!((u - vector(&e)).norm() < 1e-15);
        }
        assert_eq!(mesh(&p), 1.0);
        assert!((total_curvature(&p) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn collinear_and_repeated() {
        let p = Polygonal::new(vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[3.0, 0.0])], false)
            .unwrap();
        let d = segment_directions(&p);
        assert_eq!(d[0], d[1]);
        assert_eq!(total_curvature(&p), 0.0);
        let bad = Polygonal::new(vec![vector(&[0.0, 0.0]), vector(&[0.0, 0.0]), vector(&[1.0, 0.0])], false);
        assert_eq!(bad, Err(Error::DegenerateSegment(0)));
    }

    #[test]
    fn regular_polygons_turn_once() {
        for m in 3..=64 {
            let v = (0..m)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / m as f64;
                    vector(&[a.cos(), a.sin()])
                })
                .collect();
            let p = Polygonal::new(v, true).unwrap();
            assert!((total_curvature(&p) - 2.0 * PI).abs() < 1e-9, "m = {m}");
        }
    }
}
