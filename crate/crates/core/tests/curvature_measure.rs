use std::collections::BTreeMap;

use polynormals::curvature_measure::*;
use polynormals::discrete_frame::{discrete_normal, NormalOptions};
use polynormals::linalg_geo::vector;
use polynormals::polyline::Polygonal;
use polynormals::smooth_curve::{builtin_curve, jordan_frame, CurveOracle};

fn curve(name: &str, params: &[(&str, f64)]) -> Box<dyn CurveOracle> {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_curve(name, &p, None, None).unwrap()
}

#[test]
fn polygonal_variation_is_length_plus_rotation() {
    let v = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.3], [0.0, 1.5, 1.0], [-0.5, 0.2, 0.4]];
    let p = Polygonal::new(v.iter().map(|c| vector(c)).collect(), true).unwrap();
    for j in [1, 2] {
        let dn = discrete_normal(&p, j, NormalOptions::default()).unwrap();
        let m = polygonal_jump_measure(&dn);
        let expected = dn.stats.length + dn.stats.geodesic_rotation;
        assert!((m.total_variation - expected).abs() <= 1e-14 * expected.max(1.0), "j={j}");
        for a in &m.atoms {
            assert!((a.jump.norm() - a.mass).abs() < 1e-14);
        }
    }
}

#[test]
fn helix_last_normal_density_closed_form() {
    // Along the helix the binormal derivative direction is sgn τ · (−n_1),
    // whose derivative is sgn τ · (k t − τ b).
    for b in [0.5, -0.5] {
        let c = curve("helix_r3", &[("a", 1.0), ("b", b)]);
        let m = smooth_density(c.as_ref(), 2, 101).unwrap();
        for d in m.ac_density_samples.unwrap() {
            let f = jordan_frame(c.as_ref(), d.s, 2).unwrap();
            let (k, tau) = (f.curvatures[0], f.curvatures[1]);
            let expected = (&f.frame[0] * k - &f.frame[2] * tau) * tau.signum();
            assert!((&d.density - &expected).norm() <= 1e-5, "b={b} s={}", d.s);
        }
    }
}

#[test]
fn tangential_part_flips_with_torsion_sign() {
    let pos = tangential_component_check(curve("helix_r3", &[("b", 0.5)]).as_ref(), 101).unwrap();
    let neg = tangential_component_check(curve("helix_r3", &[("b", -0.5)]).as_ref(), 101).unwrap();
    assert!(pos.passed && neg.passed, "{pos:?} {neg:?}");
    assert_eq!(pos.sign_tau, -neg.sign_tau);
}

#[test]
fn tangential_check_rejects_planar_curve() {
    assert!(tangential_component_check(curve("circle", &[]).as_ref(), 11).is_err());
}

#[test]
fn smooth_variation_matches_density_samples() {
    // Constant-norm density on the helix: total variation = ‖density‖·(b − a).
    let c = curve("helix_r3", &[]);
    let (a, b) = c.domain();
    let m = smooth_density(c.as_ref(), 2, 11).unwrap();
    let norm = m.ac_density_samples.as_ref().unwrap()[0].density.norm();
    let span = (b - a) * (1.0 - 4e-5);
    assert!((m.total_variation - norm * span).abs() <= 1e-6 * m.total_variation);
}

#[test]
fn binned_atoms_converge_on_helix() {
    let c = curve("helix_r3", &[]);
    let r = convergence_of_measures(c.as_ref(), 2, &[256, 2048], 64).unwrap();
    let last = r.levels.last().unwrap();
    assert!(last.max_bin_discrepancy <= 0.05, "{r:?}");
    assert!(r.levels[1].max_bin_discrepancy <= r.levels[0].max_bin_discrepancy);
    assert!((last.polygon_mass - last.smooth_mass).abs() <= 0.01 * last.smooth_mass);
}

#[test]
fn great_circle_normal_has_no_geodesic_curvature() {
    let c = curve("circle", &[]);
    let r = convergence_of_measures(c.as_ref(), 1, &[128], 16).unwrap();
    assert!(r.levels[0].polygon_mass < 1e-9 && r.levels[0].smooth_mass < 1e-9, "{r:?}");
    assert_eq!(r.levels[0].max_bin_discrepancy, 0.0);
}

#[test]
fn pushforward_preserves_total_variation() {
    use polynormals::smooth_curve::quadrature::{integrate, QuadSpec};
    use polynormals::smooth_curve::transition_function;
    let c = curve("generalized_helix_r4", &[]);
    let (a, b) = c.domain();
    let h = 1e-5 * (b - a);
    let j = 2;
    let tm = transition_function(c.as_ref(), j, 2048).unwrap();
    let m = smooth_density(c.as_ref(), j, 5).unwrap();
    let spec = QuadSpec { rel_tol: 1e-9, ..QuadSpec::default() };
    let in_t = integrate(
        |t| density_at(c.as_ref(), tm.psi(t), j).map(|(d, speed)| d.norm() / speed),
        tm.phi(a + 2.0 * h),
        tm.phi(b - 2.0 * h),
        spec,
    )
    .unwrap();
    assert!((in_t - m.total_variation).abs() <= 1e-6 * m.total_variation, "{in_t} vs {}", m.total_variation);
}

#[test]
fn density_is_orthogonal_to_its_unit_vector() {
    // On constant-curvature curves the speed of the normal is constant, so
    // the density has no component along the path's unit tangent.
    for (name, j) in [("helix_r3", 1), ("helix_r3", 2), ("generalized_helix_r4", 2)] {
        let c = curve(name, &[]);
        let m = smooth_density(c.as_ref(), j, 21).unwrap();
        for d in m.ac_density_samples.unwrap() {
            let f = jordan_frame(c.as_ref(), d.s, j).unwrap();
            let g = if j < c.dim() - 1 { Some(jordan_frame(c.as_ref(), d.s, j + 1).unwrap()) } else { None };
            let mut v = &f.frame[j - 1] * -f.curvatures[j - 1];
            if let Some(g) = g {
                v += &g.frame[j + 1] * g.curvatures[j];
            }
            let u = &v / v.norm();
            assert!(d.density.dot(&u).abs() <= 1e-6, "{name} j={j}");
        }
    }
}
