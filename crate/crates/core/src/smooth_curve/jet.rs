//! Truncated Taylor series ("jets") with the arithmetic needed to
//! differentiate the builtin curves to any fixed order.

use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients `a_k = f^{(k)}(t0) / k!` for `k = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(x: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = x;
        Jet(c)
    }

    /// The independent variable at `t0`.
    pub fn variable(t0: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = t0;
        if len > 1 {
            c[1] = 1.0;
        }
        Jet(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `k`-th derivative at the base point.
    pub fn derivative_value(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0.get(k).copied().unwrap_or(0.0) * fact
    }

    /// Jet of the derivative; one order shorter.
    pub fn differentiate(&self) -> Jet {
        Jet((1..self.len()).map(|k| k as f64 * self.0[k]).collect())
    }

    pub fn truncate(&self, len: usize) -> Jet {
        Jet(self.0[..len.min(self.len())].to_vec())
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet(self.0.iter().map(|x| x * s).collect())
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.len()).div(self)
    }

    pub fn div(&self, b: &Jet) -> Jet {
        let n = self.len().min(b.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.0[k];
            for i in 1..=k {
                acc -= b.0[i] * q[k - i];
            }
            q[k] = acc / b.0[0];
        }
        Jet(q)
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.len();
        let mut r = vec![0.0; n];
        r[0] = self.0[0].sqrt();
        for k in 1..n {
            let mut acc = self.0[k];
            for i in 1..k {
                acc -= r[i] * r[k - i];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Jet(r)
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let mut e = vec![0.0; n];
        e[0] = self.0[0].exp();
        for k in 1..n {
            let acc: f64 = (1..=k).map(|i| i as f64 * self.0[i] * e[k - i]).sum();
            e[k] = acc / k as f64;
        }
        Jet(e)
    }

    /// `(sin f, cos f)`.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.0[0].sin();
        c[0] = self.0[0].cos();
        for k in 1..n {
            let mut as_ = 0.0;
            let mut ac = 0.0;
            for i in 1..=k {
                let w = i as f64 * self.0[i];
                as_ += w * c[k - i];
                ac -= w * s[k - i];
            }
            s[k] = as_ / k as f64;
            c[k] = ac / k as f64;
        }
        (Jet(s), Jet(c))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, b: &Jet) -> Jet {
        let n = self.len().min(b.len());
        Jet((0..n).map(|k| self.0[k] + b.0[k]).collect())
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, b: &Jet) -> Jet {
        let n = self.len().min(b.len());
        Jet((0..n).map(|k| self.0[k] - b.0[k]).collect())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, b: &Jet) -> Jet {
        let n = self.len().min(b.len());
        Jet((0..n).map(|k| (0..=k).map(|i| self.0[i] * b.0[k - i]).sum()).collect())
    }
}

/// Arc-length derivatives `c^{(1)}, …, c^{(order)}` of a regular curve given by
/// the jets of its coordinates in an arbitrary parameter `t`.
///
/// Uses `c^{(k)} = ((1/σ) d/dt)^{k−1} (γ'/σ)` with `σ = |γ'|`; the coordinate
/// jets must have at least `order + 1` coefficients.
pub fn arc_length_derivatives(coords: &[Jet], order: usize) -> Vec<Vec<f64>> {
    let vel: Vec<Jet> = coords.iter().map(|c| c.differentiate()).collect();
    let sq = vel.iter().map(|v| v * v).reduce(|a, b| &a + &b).expect("at least one coordinate");
    let inv_speed = sq.sqrt().recip();
    let mut cur: Vec<Jet> = vel.iter().map(|v| v * &inv_speed).collect();
    let mut out = Vec::with_capacity(order);
    for k in 1..=order {
        out.push(cur.iter().map(|j| j.value()).collect());
        if k < order {
            cur = cur.iter().map(|j| &j.differentiate() * &inv_speed).collect();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_functions() {
        let t = Jet::variable(0.3, 6);
        let (s, c) = t.sin_cos();
        // d^k/dt^k sin t = sin(t + kπ/2)
        for k in 0..6 {
            let phase = 0.3 + k as f64 * std::f64::consts::FRAC_PI_2;
            assert!((s.derivative_value(k) - phase.sin()).abs() < 1e-13);
            assert!((c.derivative_value(k) - phase.cos()).abs() < 1e-13);
        }
        let e = t.exp();
        for k in 0..6 {
            assert!((e.derivative_value(k) - 0.3f64.exp()).abs() < 1e-13);
        }
        let r = (&t * &t).sqrt();
        assert!((r.derivative_value(1) - 1.0).abs() < 1e-14 && r.derivative_value(2).abs() < 1e-13);
        let q = Jet::constant(1.0, 6).div(&t);
        // d^3/dt^3 (1/t) = −6 / t^4
        assert!((q.derivative_value(3) + 6.0 / 0.3f64.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn reparameterized_circle() {
        // γ(t) = (2 cos 3t, 2 sin 3t): speed 6, arc-length curvature 1/2.
        let t = Jet::variable(0.4, 5);
        let (s, c) = t.scale(3.0).sin_cos();
        let d = arc_length_derivatives(&[c.scale(2.0), s.scale(2.0)], 4);
        let n1 = (d[0][0].powi(2) + d[0][1].powi(2)).sqrt();
        let n2 = (d[1][0].powi(2) + d[1][1].powi(2)).sqrt();
        let n3 = (d[2][0].powi(2) + d[2][1].powi(2)).sqrt();
        assert!((n1 - 1.0).abs() < 1e-14 && (n2 - 0.5).abs() < 1e-14 && (n3 - 0.25).abs() < 1e-14);
    }
}
