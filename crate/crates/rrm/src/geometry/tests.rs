use super::*;
use crate::objective::BuiltinObjective;
use std::f64::consts::{FRAC_PI_2, PI};

fn s2() -> Manifold {
    Manifold::sphere(3).unwrap()
}

fn t21() -> Manifold {
    Manifold::torus(2.0, 1.0).unwrap()
}

#[test]
fn constructor_contracts() {
    assert!(Manifold::sphere(1).is_err());
    assert!(Manifold::torus(1.0, 1.0).is_err());
    assert!(Manifold::torus(1.0, 2.0).is_err());
    assert!(Manifold::entropy_simplex(1).is_err());
    let t = t21();
    assert_eq!(t.intrinsic_dim(), 2);
    assert!((t.injectivity_lower_bound() - PI / 4.0).abs() < 1e-15);
    assert_eq!(s2().intrinsic_dim(), 2);
}

#[test]
fn point_validation() {
    let m = s2();
    assert!(m.point(vec![1.0, 0.0, 0.0]).is_ok());
    assert!(matches!(
        m.point(vec![1.0, 1.0, 0.0]),
        Err(GeomError::OffManifold(_))
    ));
    assert!(matches!(
        m.point(vec![f64::NAN, 0.0, 0.0]),
        Err(GeomError::NonFinite)
    ));
    let t = t21();
    assert!(t.point(vec![3.0, 0.0, 0.0]).is_ok());
    assert!(t.point(vec![3.1, 0.0, 0.0]).is_err());
}

#[test]
fn inner_examples() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let u = m.tangent(&x, vec![0.0, 1.0, 0.0]).unwrap();
    assert!((m.inner(&x, &u, &u).unwrap() - 1.0).abs() < 1e-15);

    let e = Manifold::entropy_simplex(2).unwrap();
    let x = e.point(vec![0.5, 0.5]).unwrap();
    let u = e.tangent(&x, vec![1.0, -1.0]).unwrap();
    assert!((e.inner(&x, &u, &u).unwrap() - 4.0).abs() < 1e-14);

    let z = Tangent::zero_at(&x);
    assert_eq!(e.inner(&x, &z, &z).unwrap(), 0.0);
}

#[test]
fn inner_base_mismatch_is_contract_violation() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let y = m.point(vec![0.0, 1.0, 0.0]).unwrap();
    let u = Tangent::new(y.clone(), vec![0.0, 0.0, 1.0]);
    assert!(matches!(
        m.inner(&x, &u, &u),
        Err(GeomError::ContractViolation(_))
    ));
}

#[test]
fn exp_map_examples() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let v = m.tangent(&x, vec![0.0, FRAC_PI_2, 0.0]).unwrap();
    let y = m.exp_map(&x, &v).unwrap();
    assert!((y.coords[0]).abs() < 1e-10);
    assert!((y.coords[1] - 1.0).abs() < 1e-10);

    let z = Tangent::zero_at(&x);
    assert_eq!(m.exp_map(&x, &z).unwrap().coords, x.coords);

    let bad = Tangent::new(x.clone(), vec![f64::INFINITY, 0.0, 0.0]);
    assert!(m.exp_map(&x, &bad).is_err());
}

#[test]
fn log_map_examples() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let y = m.point(vec![0.0, 1.0, 0.0]).unwrap();
    let v = m.log_map(&x, &y).unwrap();
    assert!((v.vec[1] - FRAC_PI_2).abs() < 1e-12);
    let same = m.log_map(&x, &x).unwrap();
    assert!(linalg::norm(&same.vec) == 0.0);
    let anti = m.point(vec![-1.0, 0.0, 0.0]).unwrap();
    assert!(matches!(
        m.log_map(&x, &anti),
        Err(GeomError::OutsideInjectivityRadius)
    ));
}

#[test]
fn dist_examples() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let y = m.point(vec![0.0, 1.0, 0.0]).unwrap();
    assert!((m.dist(&x, &y).unwrap() - FRAC_PI_2).abs() < 1e-12);
    assert_eq!(m.dist(&x, &x).unwrap(), 0.0);
}

#[test]
fn retract_examples() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let v = m.tangent(&x, vec![0.0, 1.0, 0.0]).unwrap();
    let y = m.retract(&x, &v, RetractionKind::Projection).unwrap();
    let s = 1.0 / 2.0f64.sqrt();
    assert!((y.coords[0] - s).abs() < 1e-14);
    assert!((y.coords[1] - s).abs() < 1e-14);

    for kind in [RetractionKind::Exponential, RetractionKind::Projection] {
        let z = Tangent::zero_at(&x);
        assert_eq!(m.retract(&x, &z, kind).unwrap().coords, x.coords);
    }
    assert!(matches!(
        m.retract(&x, &v, RetractionKind::Prox),
        Err(GeomError::UnsupportedRetraction)
    ));
}

#[test]
fn riemannian_gradient_examples() {
    let m = s2();
    // f(x) = x_3 at x = e_1: ambient gradient e_3 is already tangent
    let f = BuiltinObjective::Linear {
        c: vec![0.0, 0.0, 1.0],
    };
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let g = m.riemannian_gradient(&f, &x);
    assert!((g.vec[2] - 1.0).abs() < 1e-15);
    assert!(g.vec[0].abs() < 1e-15 && g.vec[1].abs() < 1e-15);

    let constant = BuiltinObjective::Quadratic {
        a: vec![0.0, 0.0, 0.0],
        b: vec![0.0, 0.0, 0.0],
    };
    assert_eq!(linalg::norm(&m.riemannian_gradient(&constant, &x).vec), 0.0);

    // replicator form on the simplex: diag(x) c - (x'c) x
    let e = Manifold::entropy_simplex(2).unwrap();
    let x = e.point(vec![0.5, 0.5]).unwrap();
    let f = BuiltinObjective::Linear { c: vec![1.0, 0.0] };
    let g = e.riemannian_gradient(&f, &x);
    assert!((g.vec[0] - 0.25).abs() < 1e-15);
    assert!((g.vec[1] + 0.25).abs() < 1e-15);
}

#[test]
fn hessian_spectrum_examples() {
    let m = s2();
    let f = BuiltinObjective::Rayleigh {
        diag: vec![1.0, 2.0, 3.0],
    };
    // saddle at e_2: eigenvalues 2(1-2) and 2(3-2)
    let x = m.point(vec![0.0, 1.0, 0.0]).unwrap();
    let sp = m.hessian_spectrum(&f, &x).unwrap();
    assert!(!sp.non_critical);
    assert!((sp.eigenvalues[0] + 2.0).abs() < 1e-4, "{:?}", sp.eigenvalues);
    assert!((sp.eigenvalues[1] - 2.0).abs() < 1e-4);

    // minimizer at e_1: eigenvalues 2 and 4
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let sp = m.hessian_spectrum(&f, &x).unwrap();
    assert!((sp.eigenvalues[0] - 2.0).abs() < 1e-4);
    assert!((sp.eigenvalues[1] - 4.0).abs() < 1e-4);

    let constant = BuiltinObjective::Quadratic {
        a: vec![0.0; 3],
        b: vec![0.0; 3],
    };
    let sp = m.hessian_spectrum(&constant, &x).unwrap();
    assert!(sp.eigenvalues.iter().all(|e| e.abs() < 1e-9));

    // away from critical points the result carries the warning flag
    let x = m
        .point(linalg::normalize(&[0.5, 0.5, 0.70710678118654752]))
        .unwrap();
    let sp = m.hessian_spectrum(&f, &x).unwrap();
    assert!(sp.non_critical);
}

#[test]
fn geodesic_offset_examples() {
    let m = s2();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let v = m.tangent(&x, vec![0.0, 0.1, 0.0]).unwrap();
    let off = m.geodesic_offset(&x, &v).unwrap();
    assert!((off[0] - (0.1f64.cos() - 1.0)).abs() < 1e-15);
    assert!((off[1] - (0.1f64.sin() - 0.1)).abs() < 1e-15);
    assert!(off[2].abs() < 1e-15);

    let z = Tangent::zero_at(&x);
    assert!(linalg::norm(&m.geodesic_offset(&x, &z).unwrap()) == 0.0);

    // ||offset(x, t v)|| / t^2 -> 1/2 for unit v
    for t in [1e-1, 1e-2, 1e-3] {
        let tv = m.tangent(&x, vec![0.0, t, 0.0]).unwrap();
        let ratio = linalg::norm(&m.geodesic_offset(&x, &tv).unwrap()) / (t * t);
        assert!((ratio - 0.5).abs() < 0.5 * 0.01, "t={t} ratio={ratio}");
    }

    let e = Manifold::entropy_simplex(2).unwrap();
    let x = e.point(vec![0.5, 0.5]).unwrap();
    let v = Tangent::zero_at(&x);
    assert!(matches!(
        e.geodesic_offset(&x, &v),
        Err(GeomError::UnsupportedOperation(_))
    ));
}

#[test]
fn sphere_roundtrip_property() {
    let m = s2();
    let mut stream = crate::rng::Stream::new(2024);
    for _ in 0..200 {
        let x = m.random_point(&mut stream);
        let r = 0.9 * m.injectivity_lower_bound() * stream.next_f64();
        let v = m.random_tangent(&x, r, &mut stream);
        let y = m.exp_map(&x, &v).unwrap();
        let back = m.log_map(&x, &y).unwrap();
        let err = linalg::norm(&linalg::sub(&back.vec, &v.vec));
        assert!(err <= 1e-8, "roundtrip error {err} at radius {r}");
    }
}

#[test]
fn torus_roundtrip_property() {
    let m = t21();
    let mut stream = crate::rng::Stream::new(77);
    for _ in 0..50 {
        let x = m.random_point(&mut stream);
        let r = 0.9 * m.injectivity_lower_bound() * stream.next_f64();
        let v = m.random_tangent(&x, r, &mut stream);
        let y = m.exp_map(&x, &v).unwrap();
        let back = m.log_map(&x, &y).unwrap();
        let err = linalg::norm(&linalg::sub(&back.vec, &v.vec));
        assert!(err <= 1e-5, "roundtrip error {err} at radius {r}");
    }
}

#[test]
fn transport_isometry_property() {
    let mut stream = crate::rng::Stream::new(5150);
    for m in [s2(), t21(), Manifold::entropy_simplex(3).unwrap()] {
        for _ in 0..25 {
            let x = m.random_point(&mut stream);
            let y = m.random_point(&mut stream);
            if m.dist(&x, &y).unwrap() < 1e-6 {
                continue;
            }
            let v = m.random_tangent(&x, 0.5 + stream.next_f64(), &mut stream);
            let w = match m.transport(&x, &y, &v) {
                Ok(w) => w,
                Err(GeomError::OutsideInjectivityRadius) => continue,
                Err(e) => panic!("transport failed: {e}"),
            };
            let nv = m.norm(&v);
            let nw = m.norm(&w);
            assert!(
                (nv - nw).abs() <= 1e-8 * nv,
                "isometry violated: {nv} vs {nw} on {:?}",
                m.kind()
            );
        }
    }
}

/// First-order agreement of each retraction with the exponential map:
/// dist(R_x(tv), exp_x(tv)) / t^2 stays bounded as t decreases.
#[test]
fn retraction_first_order_ratio() {
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];

    let m = s2();
    let x = m.point(linalg::normalize(&[0.2, -0.7, 0.4])).unwrap();
    let v = m.random_tangent(&x, 1.0, &mut crate::rng::Stream::new(3));
    let mut prev = f64::INFINITY;
    for t in ts {
        let tv = v.scaled(t);
        let r = m.retract(&x, &tv, RetractionKind::Projection).unwrap();
        let e = m.exp_map(&x, &tv).unwrap();
        let ratio = m.dist(&r, &e).unwrap() / (t * t);
        assert!(ratio <= prev + 1e-9, "sphere ratio not monotone: {ratio}");
        assert!(ratio < 1.0, "sphere projection ratio {ratio}");
        prev = ratio;
    }

    let m = t21();
    let x = m.point(vec![3.0, 0.0, 0.0]).unwrap();
    let v = m.random_tangent(&x, 1.0, &mut crate::rng::Stream::new(4));
    for t in ts {
        let tv = v.scaled(t);
        let r = m.retract(&x, &tv, RetractionKind::Projection).unwrap();
        let e = m.exp_map(&x, &tv).unwrap();
        let ratio = m.dist(&r, &e).unwrap() / (t * t);
        assert!(ratio < 2.0, "torus projection ratio {ratio} at t={t}");
    }
}

/// The closed-form geodesic of the entropy metric (through the sqrt
/// isometry), used as an independent oracle against the prox retraction.
fn entropy_true_exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let q: Vec<f64> = x.iter().map(|xi| xi.sqrt()).collect();
    let w: Vec<f64> = v.iter().zip(&q).map(|(vi, qi)| vi / (2.0 * qi)).collect();
    let n = linalg::norm(&w);
    if n < 1e-300 {
        return x.to_vec();
    }
    let (s, c) = n.sin_cos();
    q.iter()
        .zip(&w)
        .map(|(qi, wi)| {
            let qn = c * qi + s * wi / n;
            qn * qn
        })
        .collect()
}

#[test]
fn prox_retraction_first_order_against_true_geodesic() {
    let m = Manifold::entropy_simplex(2).unwrap();
    let x = m.point(vec![0.3, 0.7]).unwrap();
    let v = m.tangent(&x, vec![0.5, -0.5]).unwrap();
    let mut ratios = Vec::new();
    for t in [1e-1, 1e-2, 1e-3, 1e-4] {
        let tv = v.scaled(t);
        let r = m.retract(&x, &tv, RetractionKind::Prox).unwrap();
        let e = Point::new(entropy_true_exp(&x.coords, &tv.vec));
        let ratio = m.dist(&r, &e).unwrap() / (t * t);
        ratios.push(ratio);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max.is_finite() && max < 10.0, "ratios {ratios:?}");
    // genuinely second-order difference: the ratio has a nonzero limit
    assert!(min > 1e-4, "prox ratio collapsed: {ratios:?}");
}

/// (R_x(tv) - x)/t -> v with O(t) error: the retraction's defining velocity
/// condition, checked on the prox retraction.
#[test]
fn prox_is_retraction_velocity_limit() {
    let m = Manifold::entropy_simplex(3).unwrap();
    let x = m.point(vec![0.2, 0.3, 0.5]).unwrap();
    let v = m.project_tangent(&x, &[0.4, -0.1, -0.3]);
    let mut prev_err = f64::INFINITY;
    for t in [1e-1, 1e-2, 1e-3, 1e-4] {
        let tv = v.scaled(t);
        let r = m.retract(&x, &tv, RetractionKind::Prox).unwrap();
        let rate: Vec<f64> = r
            .coords
            .iter()
            .zip(&x.coords)
            .map(|(ri, xi)| (ri - xi) / t)
            .collect();
        let err = linalg::norm(&linalg::sub(&rate, &v.vec));
        assert!(err < prev_err, "velocity error not decreasing at t={t}");
        assert!(err < 10.0 * t, "velocity error {err} not O(t) at t={t}");
        prev_err = err;
    }
}

#[test]
fn tangent_frames_are_orthonormal() {
    let mut stream = crate::rng::Stream::new(11);
    for m in [
        s2(),
        t21(),
        Manifold::entropy_simplex(3).unwrap(),
        Manifold::log_barrier(2).unwrap(),
        Manifold::euclidean(2).unwrap(),
    ] {
        let x = m.random_point(&mut stream);
        let frame = m.tangent_frame(&x);
        assert_eq!(frame.len(), m.intrinsic_dim());
        for i in 0..frame.len() {
            for j in 0..frame.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = m.inner(&x, &frame[i], &frame[j]).unwrap();
                assert!(
                    (got - want).abs() < 1e-10,
                    "frame not orthonormal on {:?}: <e{i},e{j}> = {got}",
                    m.kind()
                );
            }
        }
    }
}

#[test]
fn euclidean_manifold_is_flat() {
    let m = Manifold::euclidean(2).unwrap();
    let x = m.point(vec![1.0, -2.0]).unwrap();
    let v = m.tangent(&x, vec![0.5, 1.0]).unwrap();
    let y = m.exp_map(&x, &v).unwrap();
    assert_eq!(y.coords, vec![1.5, -1.0]);
    let back = m.log_map(&x, &y).unwrap();
    assert_eq!(back.vec, v.vec);
    assert!((m.dist(&x, &y).unwrap() - linalg::norm(&v.vec)).abs() < 1e-15);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn sphere_point() -> impl Strategy<Value = Point> {
        prop::collection::vec(-1.0f64..1.0, 3)
            .prop_filter("nonzero", |v| linalg::norm(v) > 1e-3)
            .prop_map(|v| Point::new(linalg::normalize(&v)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_sphere_roundtrip(x in sphere_point(), coeff in prop::collection::vec(-1.0f64..1.0, 2), scale in 1e-4f64..2.8) {
            let m = s2();
            let frame = m.tangent_frame(&x);
            let mut vec = vec![0.0; 3];
            let n = linalg::norm(&coeff);
            prop_assume!(n > 1e-3);
            for (c, e) in coeff.iter().zip(&frame) {
                vec = linalg::axpy(&vec, c / n * scale, &e.vec);
            }
            let v = Tangent::new(x.clone(), vec);
            let y = m.exp_map(&x, &v).unwrap();
            let back = m.log_map(&x, &y).unwrap();
            let err = linalg::norm(&linalg::sub(&back.vec, &v.vec));
            prop_assert!(err <= 1e-8, "roundtrip error {err} at scale {scale}");
        }

        #[test]
        fn prop_sphere_transport_isometry_and_linearity(
            x in sphere_point(),
            y in sphere_point(),
            a in -2.0f64..2.0,
        ) {
            let m = s2();
            prop_assume!(m.dist(&x, &y).unwrap() < 3.0);
            let v = m.project_tangent(&x, &[0.3, -0.9, 0.4]);
            prop_assume!(m.norm(&v) > 1e-6);
            let w = m.transport(&x, &y, &v).unwrap();
            prop_assert!((m.norm(&w) - m.norm(&v)).abs() <= 1e-8 * m.norm(&v));
            // transport commutes with scaling
            let aw = m.transport(&x, &y, &v.scaled(a)).unwrap();
            for (p, q) in aw.vec.iter().zip(&w.vec) {
                prop_assert!((p - a * q).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn prop_entropy_prox_stays_on_simplex(
            raw in prop::collection::vec(0.05f64..1.0, 3),
            dual in prop::collection::vec(-3.0f64..3.0, 3),
        ) {
            let m = Manifold::entropy_simplex(3).unwrap();
            let z: f64 = raw.iter().sum();
            let x = m.point(raw.iter().map(|r| r / z).collect()).unwrap();
            let p = m.prox_mapping(&x, &dual).unwrap();
            prop_assert!(p.coords.iter().all(|c| *c > 0.0));
            prop_assert!((p.coords.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // prox of the zero dual is the identity
            let id = m.prox_mapping(&x, &[0.0, 0.0, 0.0]).unwrap();
            for (a, b) in id.coords.iter().zip(&x.coords) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn triangle_inequality_sampled() {
    let mut stream = crate::rng::Stream::new(404);
    for m in [s2(), t21()] {
        for _ in 0..20 {
            let a = m.random_point(&mut stream);
            let b = m.random_point(&mut stream);
            let c = m.random_point(&mut stream);
            let ab = m.dist(&a, &b).unwrap();
            let bc = m.dist(&b, &c).unwrap();
            let ac = m.dist(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-7, "triangle violated on {:?}", m.kind());
        }
    }
}
