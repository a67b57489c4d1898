use std::collections::BTreeMap;

use polynormals::smooth_curve::{builtin_curve, CurveOracle};
use polynormals::taylor_verify::*;

fn curve(name: &str) -> Box<dyn CurveOracle> {
    builtin_curve(name, &BTreeMap::new(), None, None).unwrap()
}

#[test]
fn circle_symmetric_chord() {
    let c = curve("circle");
    let (h, s) = (0.1, 1.0);
    let v = stencil_vectors(c.as_ref(), s, h, 0).unwrap();
    let expected = c.deriv(s, 1) + c.deriv(s, 3) * (h * h / 6.0);
    assert!((&v[0] - expected).norm() <= 1e-4);
}

#[test]
fn helix_backward_chord_expansion() {
    let c = curve("helix_r3");
    let s = 2.0;
    let (c1, c2, c3) = (c.deriv(s, 1), c.deriv(s, 2), c.deriv(s, 3));
    let residual = |h: f64| {
        let v = stencil_vectors(c.as_ref(), s, h, 1).unwrap();
        (&v[1] + &c1 - &c2 * (2.0 * h) + &c3 * (13.0 / 6.0 * h * h)).norm()
    };
    let steps = [0.08, 0.04, 0.02, 0.01];
    let res: Vec<f64> = steps.iter().map(|&h| residual(h)).collect();
    assert!(fit_slope(&steps, &res) >= 2.8, "{res:?}");
}

#[test]
fn reversing_the_step_flips_odd_terms() {
    let c = curve("helix_r3");
    let s = 2.0;
    let (c1, c2, c3) = (c.deriv(s, 1), c.deriv(s, 2), c.deriv(s, 3));
    for h in [0.02, 0.01] {
        let (fwd, bwd) = (stencil_vectors(c.as_ref(), s, h, 1).unwrap(), stencil_vectors(c.as_ref(), s, -h, 1).unwrap());
        // v_0 is symmetric in h.
        assert!((&fwd[0] - &bwd[0]).norm() <= 1e-12);
        let odd = (&fwd[1] - &bwd[1]) / 2.0;
        let even = (&fwd[1] + &bwd[1]) / 2.0;
        assert!((odd - &c2 * (2.0 * h)).norm() <= 10.0 * h.powi(3));
        assert!((even + &c1 + &c3 * (13.0 / 6.0 * h * h)).norm() <= 10.0 * h.powi(4));
    }
}

#[test]
fn second_order_normal_coefficient_has_no_tangent_part_without_c2_c3_coupling() {
    let c = curve("generalized_helix_r4");
    for s in [0.5, 1.5, 3.0] {
        let k = pgm4_coefficients(c.as_ref(), s).unwrap();
        assert!(c.deriv(s, 2).dot(&c.deriv(s, 3)).abs() < 1e-12);
        assert!(k.n1_second.dot(&k.frame[0]).abs() < 1e-12);
    }
}

#[test]
fn frame_orders_on_helices() {
    let c = curve("helix_r3");
    let (a, b) = c.domain();
    let mid = 0.5 * (a + b);
    let steps = default_steps(c.as_ref());
    assert!(verify_pgm3(c.as_ref(), mid, &steps).unwrap().iter().all(|r| r.passed && r.monotone));
    let r5 = curve("generalized_helix_r5");
    let (a, b) = r5.domain();
    let reports = verify_pgmn(r5.as_ref(), 0.5 * (a + b), 4, &default_steps(r5.as_ref())).unwrap();
    assert_eq!(reports.len(), 5);
    assert!(reports.iter().all(|r| r.passed), "{reports:?}");
}

#[test]
fn pgm4_on_generalized_helix() {
    let c = curve("generalized_helix_r4");
    let (a, b) = c.domain();
    let reports = verify_pgm4(c.as_ref(), 0.5 * (a + b), &default_steps(c.as_ref())).unwrap();
    assert!(reports.iter().all(|r| r.passed), "{reports:?}");
}

#[test]
fn line_is_rejected() {
    let c = curve("line");
    let steps = default_steps(c.as_ref());
    assert!(verify_pgm3(c.as_ref(), 0.5, &steps).is_err());
    assert!(verify_pgmn(c.as_ref(), 0.5, 1, &steps).is_err());
}

#[test]
fn short_or_increasing_steps_are_rejected() {
    let c = curve("helix_r3");
    assert!(verify_pgm3(c.as_ref(), 2.0, &[0.1, 0.05, 0.025]).is_err());
    assert!(verify_pgm3(c.as_ref(), 2.0, &[0.1, 0.05, 0.1, 0.01]).is_err());
}
