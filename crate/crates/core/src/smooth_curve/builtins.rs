//! The builtin curve family.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use super::jet::{arc_length_derivatives, Jet};
use super::quadrature::{integrate, QuadSpec};
use super::CurveOracle;
use crate::error::{Error, Result};
use crate::linalg_geo::Vector;

/// Names accepted by [`builtin_curve`].
pub const BUILTIN_NAMES: [&str; 8] = [
    "line",
    "circle",
    "helix_r3",
    "generalized_helix_r4",
    "generalized_helix_r5",
    "eflex",
    "eflat",
    "spiral_infinite_tc",
];

/// Builds a builtin curve. `domain` (arc-length units) defaults to a natural
/// interval per curve; `dim` only applies to `line` and `circle`.
pub fn builtin_curve(
    name: &str,
    params: &BTreeMap<String, f64>,
    domain: Option<(f64, f64)>,
    dim: Option<usize>,
) -> Result<Box<dyn CurveOracle>> {
    let get = |key: &str, default: f64| -> f64 { params.get(key).copied().unwrap_or(default) };
    let check_domain = |(a, b): (f64, f64)| -> Result<(f64, f64)> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::BadParams(format!("domain [{a}, {b}] is empty or not finite")));
        }
        Ok((a, b))
    };
    let fixed_dim = |expected: usize| -> Result<()> {
        match dim {
            Some(d) if d != expected => Err(Error::DimensionMismatch { expected, found: d }),
            _ => Ok(()),
        }
    };
    match name {
        "line" => {
            let d = dim.unwrap_or(3);
            if d < 2 {
                return Err(Error::BadParams("line needs dim >= 2".into()));
            }
            let mut linear = vec![0.0; d];
            linear[0] = 1.0;
            let dom = check_domain(domain.unwrap_or((0.0, 1.0)))?;
            Ok(Box::new(TrigCurve::new("line", d, dom, false, vec![], linear)))
        }
        "circle" => {
            let r = get("r", 1.0);
            if !(r > 0.0) {
                return Err(Error::BadParams(format!("circle radius {r} must be positive")));
            }
            let d = dim.unwrap_or(3);
            if d < 2 {
                return Err(Error::BadParams("circle needs dim >= 2".into()));
            }
            let period = 2.0 * PI * r;
            let dom = check_domain(domain.unwrap_or((0.0, period)))?;
            let closed = ((dom.1 - dom.0) - period).abs() <= 1e-12 * period;
            if dom.1 - dom.0 > period * (1.0 + 1e-12) {
                return Err(Error::BadParams("circle domain exceeds one period".into()));
            }
            Ok(Box::new(TrigCurve::new("circle", d, dom, closed, vec![(r, 1.0 / r)], vec![0.0; d - 2])))
        }
        "helix_r3" => {
            fixed_dim(3)?;
            let (a, b) = (get("a", 1.0), get("b", 0.5));
            if !(a > 0.0) || !b.is_finite() {
                return Err(Error::BadParams(format!("helix needs a > 0 and finite b, got a={a}, b={b}")));
            }
            let c0 = a.hypot(b);
            let dom = check_domain(domain.unwrap_or((0.0, 2.0 * PI * c0)))?;
            Ok(Box::new(TrigCurve::new("helix_r3", 3, dom, false, vec![(a, 1.0 / c0)], vec![b / c0])))
        }
        "generalized_helix_r4" | "generalized_helix_r5" => {
            let five = name.ends_with("r5");
            fixed_dim(if five { 5 } else { 4 })?;
            let (a1, a2, f1, f2) = (get("a1", 1.0), get("a2", 0.5), get("f1", 1.0), get("f2", 2.0));
            let b = if five { get("b", 0.5) } else { 0.0 };
            if !(a1 > 0.0 && a2 > 0.0 && f1 > 0.0 && f2 > 0.0) || (f1 - f2).abs() < 1e-12 {
                return Err(Error::BadParams(
                    "generalized helix needs positive radii and two distinct positive frequencies".into(),
                ));
            }
            if five && b == 0.0 {
                return Err(Error::BadParams("generalized_helix_r5 needs b != 0".into()));
            }
            let c0 = ((a1 * f1).powi(2) + (a2 * f2).powi(2) + b * b).sqrt();
            let dom = check_domain(domain.unwrap_or((0.0, 2.0 * PI * c0)))?;
            let linear = if five { vec![b / c0] } else { vec![] };
            Ok(Box::new(TrigCurve::new(name, if five { 5 } else { 4 }, dom, false, vec![(a1, f1 / c0), (a2, f2 / c0)], linear)))
        }
        "eflex" => {
            fixed_dim(3)?;
            let dom = check_domain(domain.unwrap_or((-0.9, 0.9)))?;
            if dom.0 <= -1.0 || dom.1 >= 1.0 {
                return Err(Error::BadParams("eflex domain must lie inside (-1, 1)".into()));
            }
            Ok(Box::new(Eflex { domain: dom }))
        }
        "eflat" => {
            fixed_dim(3)?;
            let t_max = get("t_max", 1.0);
            if !(t_max > 0.0 && t_max <= 4.0) {
                return Err(Error::BadParams(format!("eflat t_max {t_max} must lie in (0, 4]")));
            }
            Eflat::new(t_max, domain).map(|c| Box::new(c) as Box<dyn CurveOracle>)
        }
        "spiral_infinite_tc" => {
            fixed_dim(3)?;
            let total = Spiral::arc_length(1.0);
            let dom = check_domain(domain.unwrap_or((0.0, total)))?;
            if dom.0 < 0.0 || dom.1 > total * (1.0 + 1e-14) {
                return Err(Error::BadParams(format!("spiral domain must lie in [0, {total}]")));
            }
            Ok(Box::new(Spiral { domain: dom }))
        }
        other => Err(Error::UnknownCurve(other.to_string())),
    }
}

/// Curves whose coordinates are `ρ cos ωs, ρ sin ωs` pairs followed by linear
/// coordinates `β s`: lines, circles and (generalized) helices.
#[derive(Debug, Clone)]
pub struct TrigCurve {
    name: String,
    dim: usize,
    domain: (f64, f64),
    closed: bool,
    pairs: Vec<(f64, f64)>,
    linear: Vec<f64>,
}

impl TrigCurve {
    pub fn new(
        name: &str,
        dim: usize,
        domain: (f64, f64),
        closed: bool,
        pairs: Vec<(f64, f64)>,
        linear: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(2 * pairs.len() + linear.len(), dim);
        Self { name: name.to_string(), dim, domain, closed, pairs, linear }
    }
}

impl CurveOracle for TrigCurve {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn closed(&self) -> bool {
        self.closed
    }
    fn max_order(&self) -> usize {
        16
    }
    fn eval(&self, s: f64) -> Vector {
        let mut v = Vector::zeros(self.dim);
        for (i, &(r, w)) in self.pairs.iter().enumerate() {
            let (sn, cs) = (w * s).sin_cos();
            v[2 * i] = r * cs;
            v[2 * i + 1] = r * sn;
        }
        let off = 2 * self.pairs.len();
        for (i, b) in self.linear.iter().enumerate() {
            v[off + i] = b * s;
        }
        v
    }
    fn deriv(&self, s: f64, k: usize) -> Vector {
        let mut v = Vector::zeros(self.dim);
        if k == 0 {
            return self.eval(s);
        }
        for (i, &(r, w)) in self.pairs.iter().enumerate() {
            let amp = r * w.powi(k as i32);
            let (sn, cs) = (w * s + k as f64 * FRAC_PI_2).sin_cos();
            v[2 * i] = amp * cs;
            v[2 * i + 1] = amp * sn;
        }
        if k == 1 {
            let off = 2 * self.pairs.len();
            for (i, b) in self.linear.iter().enumerate() {
                v[off + i] = *b;
            }
        }
        v
    }
    /// Sum-to-product form, free of cancellation for close parameters.
    fn chord(&self, s0: f64, s1: f64) -> Vector {
        let mut v = Vector::zeros(self.dim);
        for (i, &(r, w)) in self.pairs.iter().enumerate() {
            let m = 0.5 * w * (s0 + s1);
            let h = (0.5 * w * (s1 - s0)).sin();
            v[2 * i] = -2.0 * r * m.sin() * h;
            v[2 * i + 1] = 2.0 * r * m.cos() * h;
        }
        let off = 2 * self.pairs.len();
        for (i, b) in self.linear.iter().enumerate() {
            v[off + i] = b * (s1 - s0);
        }
        v
    }
}

/// Unit-speed curve with `ċ(s) = (1, s², √(1 − s⁴))/√2`: curvature and torsion
/// vanish at `s = 0`, where the principal normal flips.
#[derive(Debug, Clone)]
pub struct Eflex {
    domain: (f64, f64),
}

impl Eflex {
    fn quarter_root(s: f64) -> f64 {
        integrate(|u| Ok((1.0 - u.powi(4)).sqrt()), 0.0, s, QuadSpec { rel_tol: 1e-15, abs_tol: 1e-16, max_depth: 50 })
            .expect("smooth integrand on a bounded interval")
    }
}

impl CurveOracle for Eflex {
    fn name(&self) -> &str {
        "eflex"
    }
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn max_order(&self) -> usize {
        8
    }
    fn eval(&self, s: f64) -> Vector {
        Vector::from_vec(vec![s, s.powi(3) / 3.0, Self::quarter_root(s)]) / SQRT_2
    }
    fn deriv(&self, s: f64, k: usize) -> Vector {
        if k == 0 {
            return self.eval(s);
        }
        let u = Jet::variable(s, k);
        let u2 = &u * &u;
        let g = (&Jet::constant(1.0, k) - &(&u2 * &u2)).sqrt();
        let y = match k {
            1 => s * s,
            2 => 2.0 * s,
            3 => 2.0,
            _ => 0.0,
        };
        let x = if k == 1 { 1.0 } else { 0.0 };
        Vector::from_vec(vec![x, y, g.derivative_value(k - 1)]) / SQRT_2
    }
    fn singular_points(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// `γ(t) = (t, e^{−1/t²}, 0)` for `t < 0` and `(t, 0, e^{−1/t²})` for `t > 0`,
/// reparameterized by arc length measured from the junction `t = 0`.
#[derive(Debug, Clone)]
pub struct Eflat {
    t_max: f64,
    domain: (f64, f64),
    /// Cumulative arc length at `t_grid` nodes.
    t_grid: Vec<f64>,
    s_grid: Vec<f64>,
}

const EFLAT_CELLS: usize = 512;
const EFLAT_FLAT_ZONE: f64 = 0.05;

impl Eflat {
    fn new(t_max: f64, domain: Option<(f64, f64)>) -> Result<Self> {
        let t_grid: Vec<f64> =
            (0..=EFLAT_CELLS).map(|i| -t_max + 2.0 * t_max * i as f64 / EFLAT_CELLS as f64).collect();
        let spec = QuadSpec { rel_tol: 1e-15, abs_tol: 1e-16, max_depth: 50 };
        let mut s_grid = vec![0.0; t_grid.len()];
        let mid = EFLAT_CELLS / 2;
        for i in mid..EFLAT_CELLS {
            s_grid[i + 1] = s_grid[i] + integrate(|t| Ok(Self::speed(t)), t_grid[i], t_grid[i + 1], spec)?;
        }
        for i in (0..mid).rev() {
            s_grid[i] = s_grid[i + 1] - integrate(|t| Ok(Self::speed(t)), t_grid[i], t_grid[i + 1], spec)?;
        }
        let natural = (s_grid[0], s_grid[EFLAT_CELLS]);
        let dom = domain.unwrap_or(natural);
        if !(dom.1 > dom.0) || dom.0 < natural.0 - 1e-12 || dom.1 > natural.1 + 1e-12 {
            return Err(Error::BadParams(format!(
                "eflat domain must lie in [{}, {}]",
                natural.0, natural.1
            )));
        }
        Ok(Self { t_max, domain: dom, t_grid, s_grid })
    }

    fn flat(t: f64) -> f64 {
        if t.abs() < EFLAT_FLAT_ZONE {
            0.0
        } else {
            (-1.0 / (t * t)).exp()
        }
    }

    fn speed(t: f64) -> f64 {
        let fp = 2.0 * Self::flat(t) / t.powi(3);
        if fp.is_finite() {
            fp.hypot(1.0)
        } else {
            1.0
        }
    }

    fn arc_length_at(&self, t: f64) -> f64 {
        let pos = ((t + self.t_max) / (2.0 * self.t_max) * EFLAT_CELLS as f64).floor();
        let i = (pos.max(0.0) as usize).min(EFLAT_CELLS - 1);
        let spec = QuadSpec { rel_tol: 1e-15, abs_tol: 1e-16, max_depth: 50 };
        self.s_grid[i] + integrate(|x| Ok(Self::speed(x)), self.t_grid[i], t, spec).unwrap_or(0.0)
    }

    /// Original parameter `t` at arc length `s`.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let i = self.s_grid.partition_point(|&x| x <= s).clamp(1, EFLAT_CELLS) - 1;
        let (mut lo, mut hi) = (self.t_grid[i], self.t_grid[i + 1]);
        let mut t = lo + (hi - lo) * (s - self.s_grid[i]) / (self.s_grid[i + 1] - self.s_grid[i]);
        for _ in 0..60 {
            let g = self.arc_length_at(t) - s;
            if g.abs() <= 1e-15 * (1.0 + s.abs()) {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - g / Self::speed(t);
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        t
    }

    fn coordinate_jets(t: f64, len: usize) -> [Jet; 3] {
        let tj = Jet::variable(t, len);
        let f = if t.abs() < EFLAT_FLAT_ZONE {
            Jet::constant(0.0, len)
        } else {
            (&tj * &tj).recip().scale(-1.0).exp()
        };
        let zero = Jet::constant(0.0, len);
        if t < 0.0 {
            [tj, f, zero]
        } else {
            [tj, zero, f]
        }
    }
}

impl CurveOracle for Eflat {
    fn name(&self) -> &str {
        "eflat"
    }
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn max_order(&self) -> usize {
        4
    }
    fn eval(&self, s: f64) -> Vector {
        let t = self.parameter_at(s);
        let f = Self::flat(t);
        if t < 0.0 {
            Vector::from_vec(vec![t, f, 0.0])
        } else {
            Vector::from_vec(vec![t, 0.0, f])
        }
    }
    fn deriv(&self, s: f64, k: usize) -> Vector {
        if k == 0 {
            return self.eval(s);
        }
        let t = self.parameter_at(s);
        let jets = Self::coordinate_jets(t, k + 1);
        Vector::from_vec(arc_length_derivatives(&jets, k).pop().unwrap())
    }
    fn singular_points(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// Planar spiral `γ(t) = (t² sin(2π/t), t² cos(2π/t), 0)`, `t ∈ [0, 1]`, by arc length:
/// finite length, infinitely many loops near the origin.
#[derive(Debug, Clone)]
pub struct Spiral {
    domain: (f64, f64),
}

impl Spiral {
    /// Arc length from the origin, `∫₀ᵗ 2√(τ² + π²) dτ`.
    pub fn arc_length(t: f64) -> f64 {
        t * (t * t + PI * PI).sqrt() + PI * PI * (t / PI).asinh()
    }

    pub fn parameter_at(s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let mut t = s / (2.0 * PI);
        for _ in 0..50 {
            let step = (Self::arc_length(t) - s) / (2.0 * (t * t + PI * PI).sqrt());
            t -= step;
            if step.abs() <= 1e-16 * t.max(1e-300) {
                break;
            }
        }
        t
    }
}

impl CurveOracle for Spiral {
    fn name(&self) -> &str {
        "spiral_infinite_tc"
    }
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn max_order(&self) -> usize {
        4
    }
    fn eval(&self, s: f64) -> Vector {
        let t = Self::parameter_at(s);
        if t == 0.0 {
            return Vector::zeros(3);
        }
        let (sn, cs) = (2.0 * PI / t).sin_cos();
        Vector::from_vec(vec![t * t * sn, t * t * cs, 0.0])
    }
    /// Undefined (NaN) at the origin.
    fn deriv(&self, s: f64, k: usize) -> Vector {
        if k == 0 {
            return self.eval(s);
        }
        let t = Self::parameter_at(s);
        if t <= 0.0 {
            return Vector::from_element(3, f64::NAN);
        }
        let tj = Jet::variable(t, k + 1);
        let (sn, cs) = tj.recip().scale(2.0 * PI).sin_cos();
        let t2 = &tj * &tj;
        let jets = [&t2 * &sn, &t2 * &cs, Jet::constant(0.0, k + 1)];
        Vector::from_vec(arc_length_derivatives(&jets, k).pop().unwrap())
    }
}
