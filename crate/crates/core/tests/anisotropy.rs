mod common;

use common::{dot, models, norm, sampled_bipolar};
use proptest::prelude::*;
use tvcalib::anisotropy::AnisotropyModel;
use tvcalib::Error;

fn sample(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, dim)
}

fn nonzero(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    (sample(dim, -1.0, 1.0), -3.0f64..3.0)
        .prop_filter("nonzero", |(v, _)| norm(v) > 1e-3)
        .prop_map(|(v, e)| {
            let s = 10f64.powf(e) / norm(&v);
            v.iter().map(|c| c * s).collect()
        })
}

fn case() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = models().len();
    (0..n, 2usize..=3).prop_flat_map(move |(i, _)| {
        let d = if models()[i].1.dim() == 2 { 2 } else { 3 };
        (Just(i), sample(d, 0.0, 1.0), nonzero(d), nonzero(d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn homogeneity_and_euler((i, x, p, _) in case(), t in 1e-3f64..10.0) {
        let m = &models()[i].1;
        let f = m.value(&x, &p).unwrap();
        let tp: Vec<f64> = p.iter().map(|v| t * v).collect();
        prop_assert!((m.value(&x, &tp).unwrap() - t * f).abs() <= 1e-10 * t * f);
        let g = m.grad(&x, &p).unwrap();
        prop_assert!((dot(&g, &p) - f).abs() <= 1e-10 * f);
        let fo = m.polar(&x, &p).unwrap();
        let go = m.polar_grad(&x, &p).unwrap();
        prop_assert!((dot(&go, &p) - fo).abs() <= 1e-10 * fo);
    }

    #[test]
    fn gradient_is_zero_homogeneous((i, x, p, _) in case(), t in 1e-3f64..1e3) {
        let m = &models()[i].1;
        let tp: Vec<f64> = p.iter().map(|v| t * v).collect();
        let (a, b) = (m.grad(&x, &p).unwrap(), m.grad(&x, &tp).unwrap());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-10 * norm(&a));
        }
    }

    #[test]
    fn inverse_maps((i, x, p, _) in case()) {
        let m = &models()[i].1;
        let f = m.value(&x, &p).unwrap();
        let z = m.grad(&x, &p).unwrap();
        prop_assert!((m.polar(&x, &z).unwrap() - 1.0).abs() <= 1e-8);
        let back = m.polar_grad(&x, &z).unwrap();
        for (b, q) in back.iter().zip(&p) {
            prop_assert!((b - q / f).abs() <= 1e-8 * norm(&p) / f);
        }
        let fo = m.polar(&x, &p).unwrap();
        let w = m.polar_grad(&x, &p).unwrap();
        prop_assert!((m.value(&x, &w).unwrap() - 1.0).abs() <= 1e-8);
        let again = m.grad(&x, &w).unwrap();
        for (a, q) in again.iter().zip(&p) {
            prop_assert!((a - q / fo).abs() <= 1e-8 * norm(&p) / fo);
        }
    }

    #[test]
    fn gradient_matches_central_differences((i, x, p, _) in case()) {
        let m = &models()[i].1;
        let g = m.grad(&x, &p).unwrap();
        let step = 1e-6 * norm(&p);
        for k in 0..p.len() {
            let mut a = p.clone();
            let mut b = p.clone();
            a[k] += step;
            b[k] -= step;
            let fd = (m.value(&x, &a).unwrap() - m.value(&x, &b).unwrap()) / (2.0 * step);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * norm(&g), "k {k}: fd {fd} grad {}", g[k]);
        }
    }

    #[test]
    fn uniform_convexity((i, x, p, y) in case()) {
        let m = &models()[i].1;
        // absolute rounding of F² grows with the scale of the arguments
        let scale = dot(&y, &y).max(dot(&p, &p)).max(1.0);
        prop_assert!(m.strong_convexity_residual(&x, &y, &p).unwrap() >= -1e-10 * scale);
        prop_assert!(m.polar_strong_convexity_residual(&x, &y, &p).unwrap() >= -1e-10 * scale);
        prop_assert!(m.strong_convexity_residual(&x, &p, &p).unwrap().abs() <= 1e-10 * dot(&p, &p));
    }

    #[test]
    fn fenchel_young((i, x, p, z) in case()) {
        let m = &models()[i].1;
        let bound = m.value(&x, &p).unwrap() * m.polar(&x, &z).unwrap();
        prop_assert!(dot(&p, &z) <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn projection_is_feasible_and_idempotent((i, x, _, z) in case()) {
        let m = &models()[i].1;
        let q = m.project_dual(&x, &z);
        prop_assert!(m.polar(&x, &q).unwrap() <= 1.0 + 1e-12);
        let r = m.project_dual(&x, &q);
        for (a, b) in q.iter().zip(&r) {
            prop_assert!((a - b).abs() <= 1e-14 * norm(&q).max(1.0));
        }
        if m.polar(&x, &z).unwrap() <= 1.0 {
            prop_assert_eq!(q, z);
        }
    }

    #[test]
    fn bipolar_matches_sampled_supremum(i in 0usize..5, x in sample(2, 0.0, 1.0), p in nonzero(2)) {
        let m = &models()[i].1;
        let f = m.value(&x, &p).unwrap();
        let sup = sampled_bipolar(m, &x, &p, 10_000);
        prop_assert!((sup - f).abs() <= 1e-6 * f, "sup {sup} F {f}");
    }
}

#[test]
fn documented_values() {
    let e = AnisotropyModel::euclidean(2).unwrap();
    let g = e.grad(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
    assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
    assert_eq!(e.grad(&[0.0, 0.0], &[0.0, -7.0]).unwrap(), vec![0.0, -1.0]);
    assert_eq!(e.polar_grad(&[0.0, 0.0], &[0.0, -3.0]).unwrap(), vec![0.0, -1.0]);
    assert!(matches!(
        e.grad(&[0.0, 0.0], &[0.0, 0.0]),
        Err(Error::DegeneratePoint(_))
    ));
    assert!(matches!(
        e.polar_grad(&[0.0, 0.0], &[0.0, 0.0]),
        Err(Error::DegeneratePoint(_))
    ));
    let r = e
        .strong_convexity_residual(&[0.0, 0.0], &[2.0, 0.0], &[1.0, 0.0])
        .unwrap();
    assert!(r.abs() < 1e-14);

    let a = AnisotropyModel::preset("ellipse", 2).unwrap();
    let x = [0.5, 0.5];
    assert_eq!(a.grad(&x, &[0.0, 1.0]).unwrap(), vec![0.0, 2.0]);
    assert_eq!(a.polar_grad(&x, &[0.0, 2.0]).unwrap(), vec![0.0, 0.5]);
    assert_eq!(a.project_dual(&x, &[0.0, 4.0]), vec![0.0, 2.0]);
    assert!(a.strong_convexity_residual(&x, &[0.0, 1.0], &[1.0, 0.0]).unwrap() >= 0.0);
}

#[test]
fn measured_constants_are_consistent() {
    for (name, m) in models() {
        assert!(m.c0() > 0.0 && m.delta() > 0.0 && m.polar_delta() > 0.0, "{name}");
        let x = vec![0.5; m.dim()];
        let mut e = vec![0.0; m.dim()];
        e[0] = 1.0;
        // c0 |p| <= F(x, p)
        assert!(m.value(&x, &e).unwrap() >= m.c0() * (1.0 - 1e-12), "{name}");
    }
}
