use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use polynormals::linalg_geo::{rp_distance, sphere_distance, ProjPoint};
use polynormals::smooth_curve::{builtin_curve, jordan_frame, CurveOracle};

fn curve(name: &str) -> Box<dyn CurveOracle> {
    builtin_curve(name, &BTreeMap::new(), None, None).unwrap()
}

/// Largest deviation of central differences of the frame from the right-hand
/// side of the Jordan system, over `count` interior points.
fn jordan_residual(c: &dyn CurveOracle, count: usize) -> f64 {
    let n = c.dim() - 1;
    let (a, b) = c.domain();
    let h = 1e-5 * (b - a);
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let s = a + 2.0 * h + (b - a - 4.0 * h) * i as f64 / (count - 1) as f64;
        let f = jordan_frame(c, s, n).unwrap();
        let (fp, fm) = (jordan_frame(c, s + h, n).unwrap(), jordan_frame(c, s - h, n).unwrap());
        let k = |m: usize| if m == 0 || m > n { 0.0 } else { f.curvatures[m - 1] };
        for m in 0..=n {
            let fd = (&fp.frame[m] - &fm.frame[m]) / (2.0 * h);
            let mut rhs = f.frame[m].clone() * 0.0;
            if m > 0 {
                rhs -= &f.frame[m - 1] * k(m);
            }
            if m < n {
                rhs += &f.frame[m + 1] * k(m + 1);
            }
            worst = worst.max((fd - rhs).norm());
        }
        assert!(f.curvatures[n - 1].abs() > 0.0);
    }
    worst
}

#[test]
fn jordan_system_holds_on_helices() {
    for name in ["helix_r3", "generalized_helix_r4", "generalized_helix_r5"] {
        let r = jordan_residual(curve(name).as_ref(), 101);
        assert!(r <= 1e-5, "{name}: {r}");
    }
}

#[test]
fn eflex_normal_is_projectively_continuous() {
    let c = curve("eflex");
    let mut last = f64::INFINITY;
    for s in [1e-1, 1e-2, 1e-3] {
        let (p, m) = (jordan_frame(c.as_ref(), s, 1).unwrap(), jordan_frame(c.as_ref(), -s, 1).unwrap());
        let (up, um) = (&p.frame[1], &m.frame[1]);
        let d = rp_distance(&ProjPoint::new(up).unwrap(), &ProjPoint::new(um).unwrap());
        assert!(d <= last, "s={s}: {d}");
        last = d;
        assert!(sphere_distance(up, um) >= std::f64::consts::PI - 1e-2, "no flip at s={s}");
    }
    assert!(last <= 1e-3, "{last}");
}

#[test]
fn eflat_normal_jumps_at_junction_only() {
    let c = curve("eflat");
    let (a, b) = c.domain();
    let grid: Vec<f64> = (0..=400).map(|i| a + (b - a) * i as f64 / 400.0).collect();
    let normals: Vec<(f64, ProjPoint)> = grid
        .iter()
        .filter_map(|&s| jordan_frame(c.as_ref(), s, 1).ok().map(|f| (s, ProjPoint::new(&f.frame[1]).unwrap())))
        .collect();
    let jumps: Vec<(f64, f64, f64)> =
        normals.windows(2).map(|w| (w[0].0, w[1].0, rp_distance(&w[0].1, &w[1].1))).collect();
    let (lo, hi, big) = jumps.iter().copied().fold((0.0, 0.0, 0.0), |m, j| if j.2 > m.2 { j } else { m });
    assert!((big - FRAC_PI_2).abs() <= 1e-3, "{big}");
    assert!(lo < 0.0 && hi > 0.0);
    let rest = jumps.iter().filter(|j| j.0 != lo).map(|j| j.2).fold(0.0, f64::max);
    assert!(rest < 0.1, "{rest}");
}
