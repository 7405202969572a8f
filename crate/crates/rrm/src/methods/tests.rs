use super::*;
use crate::objective::BuiltinObjective;

fn flat_quadratic() -> (Manifold, BuiltinObjective) {
    // f(x) = x^2/2 on flat R^1, so the drift is v(x) = -x
    (
        Manifold::euclidean(1).unwrap(),
        BuiltinObjective::Quadratic {
            a: vec![0.5],
            b: vec![0.0],
        },
    )
}

fn silent() -> NoiseModel {
    NoiseModel::UniformSphereFrame { sigma: 0.0 }
}

fn rayleigh123() -> BuiltinObjective {
    BuiltinObjective::Rayleigh {
        diag: vec![1.0, 2.0, 3.0],
    }
}

#[test]
fn rrm_step_examples() {
    let m = Manifold::sphere(3).unwrap();
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let v = m.tangent(&x, vec![0.0, 1.0, 0.0]).unwrap();
    let y = rrm_step(&m, &x, std::f64::consts::FRAC_PI_2, &v).unwrap();
    assert!((y.coords[1] - 1.0).abs() < 1e-12);

    let z = Tangent::zero_at(&x);
    assert_eq!(rrm_step(&m, &x, 0.3, &z).unwrap().coords, x.coords);

    // flat special case reduces to x + gamma v
    let (e, _) = flat_quadratic();
    let x = e.point(vec![2.0]).unwrap();
    let v = e.tangent(&x, vec![1.5]).unwrap();
    assert_eq!(rrm_step(&e, &x, 2.0, &v).unwrap().coords, vec![5.0]);

    assert!(rrm_step(&e, &x, 0.0, &v).is_err());
}

#[test]
fn rsgd_descends_noiselessly() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let x0 = m.point(crate::linalg::normalize(&[0.5, 0.6, 0.62])).unwrap();
    let mut state = MethodState::new(x0.clone());
    let mut stream = Stream::new(1);
    step_rsgd(&m, &f, &mut state, &silent(), &mut stream, 0.05).unwrap();
    assert!(f.value(&state.current.coords) < f.value(&x0.coords));
}

#[test]
fn rsgd_is_stuck_at_exact_critical_point() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let saddle = m.point(vec![0.0, 1.0, 0.0]).unwrap();
    let mut state = MethodState::new(saddle.clone());
    let mut stream = Stream::new(2);
    for _ in 0..50 {
        step_rsgd(&m, &f, &mut state, &silent(), &mut stream, 0.1).unwrap();
        assert_eq!(state.current.coords, saddle.coords);
    }
}

#[test]
fn rsgd_step_equals_rrm_step_bitwise() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let x = m.point(crate::linalg::normalize(&[0.3, -0.8, 0.5])).unwrap();
    let model = NoiseModel::UniformSphereFrame { sigma: 0.3 };
    let gamma = 0.07;

    let mut stream_a = Stream::derive(9, 4);
    let mut state = MethodState::new(x.clone());
    let rec = step_rsgd(&m, &f, &mut state, &model, &mut stream_a, gamma).unwrap();

    let mut stream_b = Stream::derive(9, 4);
    let q = oracles::query(&model, &m, &f, &x, &mut stream_b);
    let direct = rrm_step(&m, &x, gamma, &q.value).unwrap();
    assert_eq!(state.current.coords, direct.coords);
    assert_eq!(rec.surrogate.value.vec, q.value.vec);
}

#[test]
fn resgd_exponential_kind_matches_rsgd_bitwise() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let x = m.point(crate::linalg::normalize(&[1.0, 2.0, -1.0])).unwrap();
    let model = NoiseModel::UniformSphereFrame { sigma: 0.2 };

    let mut sa = Stream::derive(5, 0);
    let mut st_a = MethodState::new(x.clone());
    step_rsgd(&m, &f, &mut st_a, &model, &mut sa, 0.1).unwrap();

    let mut sb = Stream::derive(5, 0);
    let mut st_b = MethodState::new(x.clone());
    step_resgd(
        &m,
        &f,
        &mut st_b,
        &model,
        &mut sb,
        0.1,
        RetractionKind::Exponential,
    )
    .unwrap();
    assert_eq!(st_a.current.coords, st_b.current.coords);
}

#[test]
fn resgd_projection_hand_value() {
    // gradient points along +e2 at e1, so the step goes to
    // normalize((1, -gamma, 0))
    let m = Manifold::sphere(3).unwrap();
    let f = BuiltinObjective::Linear {
        c: vec![0.0, 1.0, 0.0],
    };
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(3);
    step_resgd(
        &m,
        &f,
        &mut state,
        &silent(),
        &mut stream,
        0.1,
        RetractionKind::Projection,
    )
    .unwrap();
    let want = crate::linalg::normalize(&[1.0, -0.1, 0.0]);
    for (a, b) in state.current.coords.iter().zip(&want) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn resgd_implied_surrogate_offset_is_order_gamma() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let x = m.point(crate::linalg::normalize(&[0.6, 0.5, 0.62])).unwrap();
    let model = NoiseModel::UniformSphereFrame { sigma: 0.3 };
    let mut ratios = Vec::new();
    for gamma in [1e-1, 1e-2, 1e-3] {
        let mut stream = Stream::derive(31, 7);
        let mut max_ratio: f64 = 0.0;
        for _ in 0..20 {
            let mut state = MethodState::new(x.clone());
            let rec = step_resgd(
                &m,
                &f,
                &mut state,
                &model,
                &mut stream,
                gamma,
                RetractionKind::Projection,
            )
            .unwrap();
            let offset = rec.surrogate.offset_part.unwrap();
            max_ratio = max_ratio.max(m.norm(&offset) / gamma);
        }
        ratios.push(max_ratio);
    }
    // the offset is O(gamma) (here even O(gamma^2)), so the ratios must not
    // grow as gamma shrinks
    assert!(
        ratios[2] <= ratios[0].max(1e-3) * 2.0,
        "offset/gamma grew: {ratios:?}"
    );
}

#[test]
fn smd_entropy_hand_value() {
    // x = (1/2, 1/2), linear cost c = (1, 0), gamma = log 2, no noise:
    // dual step (-log 2, 0) sends x to (1/3, 2/3)
    let m = Manifold::entropy_simplex(2).unwrap();
    let f = BuiltinObjective::Linear { c: vec![1.0, 0.0] };
    let x = m.point(vec![0.5, 0.5]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(4);
    step_smd(&m, &f, &mut state, &silent(), &mut stream, 2.0f64.ln()).unwrap();
    assert!((state.current.coords[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((state.current.coords[1] - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn smd_step_is_continuous_in_gamma() {
    let m = Manifold::entropy_simplex(3).unwrap();
    let f = BuiltinObjective::Linear {
        c: vec![1.0, -0.5, 0.2],
    };
    let x = m.point(vec![0.2, 0.3, 0.5]).unwrap();
    let mut prev_move = f64::INFINITY;
    for gamma in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mut state = MethodState::new(x.clone());
        let mut stream = Stream::new(5);
        step_smd(&m, &f, &mut state, &silent(), &mut stream, gamma).unwrap();
        let moved = m.dist(&state.current, &x).unwrap();
        assert!(moved < prev_move);
        prev_move = moved;
    }
    assert!(prev_move < 1e-4);
}

#[test]
fn rog_flat_hand_iteration() {
    let (m, f) = flat_quadratic();
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(6);
    step_rog(&m, &f, &mut state, &silent(), &mut stream, 0.5).unwrap();
    assert!((state.current.coords[0] - 0.75).abs() < 1e-12);
    assert!((state.previous_leader.as_ref().unwrap().coords[0] - 0.5).abs() < 1e-12);
}

#[test]
fn rog_constant_objective_is_fixed() {
    let m = Manifold::sphere(3).unwrap();
    let f = BuiltinObjective::Quadratic {
        a: vec![0.0; 3],
        b: vec![0.0; 3],
    };
    let x = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    let mut state = MethodState::new(x.clone());
    let mut stream = Stream::new(7);
    for _ in 0..5 {
        step_rog(&m, &f, &mut state, &silent(), &mut stream, 0.2).unwrap();
        assert_eq!(state.current.coords, x.coords);
        assert_eq!(state.previous_leader.as_ref().unwrap().coords, x.coords);
    }
}

#[test]
fn rog_offset_is_bounded_by_leader_distance() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let x = m.point(crate::linalg::normalize(&[0.5, -0.6, 0.63])).unwrap();
    let model = NoiseModel::UniformSphereFrame { sigma: 0.2 };
    // Lipschitz bound for the Rayleigh drift field on the sphere: the
    // Hessian eigenvalues are within 2 * (spread of diag) + 2 * sup|grad|
    let lipschitz = 12.0;
    let mut stream = Stream::derive(12, 1);
    for _ in 0..50 {
        let mut state = MethodState::new(x.clone());
        let rec = step_rog(&m, &f, &mut state, &model, &mut stream, 0.05).unwrap();
        let leader = state.previous_leader.unwrap();
        let d = m.dist(&leader, &x).unwrap();
        let b = m.norm(rec.surrogate.offset_part.as_ref().unwrap());
        assert!(b <= lipschitz * d + 1e-9, "offset {b} vs L*dist {}", lipschitz * d);
    }
}

#[test]
fn ngd_log_barrier_hand_value() {
    // f(x) = x on the 1-dim log-barrier orthant: G^{-1} grad = x^2, so from
    // x = 1 with gamma = 0.1 the update lands at 0.9
    let m = Manifold::log_barrier(1).unwrap();
    let f = BuiltinObjective::Linear { c: vec![1.0] };
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(8);
    step_ngd(&m, &f, &mut state, &silent(), &mut stream, 0.1).unwrap();
    assert!((state.current.coords[0] - 0.9).abs() < 1e-14);
}

#[test]
fn ngd_fixed_point_and_simplex_mass_conservation() {
    let m = Manifold::entropy_simplex(3).unwrap();
    let constant = BuiltinObjective::Quadratic {
        a: vec![0.0; 3],
        b: vec![0.0; 3],
    };
    let x = m.point(vec![0.2, 0.3, 0.5]).unwrap();
    let mut state = MethodState::new(x.clone());
    let mut stream = Stream::new(9);
    step_ngd(&m, &constant, &mut state, &silent(), &mut stream, 0.1).unwrap();
    assert_eq!(state.current.coords, x.coords);

    let f = BuiltinObjective::Linear {
        c: vec![1.0, 0.0, -1.0],
    };
    let model = NoiseModel::UniformSphereFrame { sigma: 0.1 };
    let mut state = MethodState::new(x);
    for _ in 0..200 {
        step_ngd(&m, &f, &mut state, &model, &mut stream, 0.01).unwrap();
        let mass: f64 = state.current.coords.iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ngd_domain_escape() {
    let m = Manifold::log_barrier(1).unwrap();
    let f = BuiltinObjective::Linear { c: vec![1.0] };
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(10);
    // gamma * G^{-1} grad = 2.0 overshoots the origin
    let err = step_ngd(&m, &f, &mut state, &silent(), &mut stream, 2.0).unwrap_err();
    assert!(matches!(
        err,
        MethodError::Geometry(GeomError::DomainEscape) | MethodError::Geometry(GeomError::OffManifold(_))
    ));
}

#[test]
fn rppm_flat_hand_values() {
    let (m, f) = flat_quadratic();
    // gamma = 1: the implicit solve gives x/(1+gamma) = 0.5; the plain
    // Picard map two-cycles and the midpoint average resolves it
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x.clone());
    let mut stream = Stream::new(11);
    let rec = step_rppm(&m, &f, &mut state, &silent(), &mut stream, 1.0, 50, 1e-10).unwrap();
    assert!(
        (state.current.coords[0] - 0.5).abs() < 1e-10,
        "{}",
        state.current.coords[0]
    );
    assert!(!rec.non_contractive);

    // gamma = 0.5 contracts straight to x/(1+gamma) = 2/3
    let mut state = MethodState::new(x);
    let rec = step_rppm(&m, &f, &mut state, &silent(), &mut stream, 0.5, 50, 1e-12).unwrap();
    assert!((state.current.coords[0] - 2.0 / 3.0).abs() < 1e-10);
    assert!(!rec.non_contractive);
}

#[test]
fn rppm_fixed_point_when_gradient_vanishes() {
    let (m, _) = flat_quadratic();
    let constant = BuiltinObjective::Quadratic {
        a: vec![0.0],
        b: vec![0.0],
    };
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x.clone());
    let mut stream = Stream::new(12);
    step_rppm(&m, &constant, &mut state, &silent(), &mut stream, 1.0, 50, 1e-12).unwrap();
    assert_eq!(state.current.coords, x.coords);
}

#[test]
fn rppm_inner_iterates_contract_with_ratio_gamma() {
    // on the flat quadratic the Picard residuals shrink by exactly gamma
    let (m, f) = flat_quadratic();
    let gamma = 0.5;
    let x = m.point(vec![1.0]).unwrap();
    // run the fixed-point iteration by hand and measure the ratio
    let mut z = 1.0f64;
    let mut moves = Vec::new();
    for _ in 0..12 {
        let zn = 1.0 - gamma * z;
        moves.push((zn - z).abs());
        z = zn;
    }
    for w in moves.windows(2) {
        assert!((w[1] / w[0] - gamma).abs() < 1e-9);
    }
    // and the method ends at the same implicit point
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(13);
    step_rppm(&m, &f, &mut state, &silent(), &mut stream, gamma, 100, 1e-12).unwrap();
    assert!((state.current.coords[0] - 1.0 / (1.0 + gamma)).abs() < 1e-10);
}

#[test]
fn rppm_flags_non_convergence() {
    let (m, f) = flat_quadratic();
    // gamma L = 3: genuinely expansive, the inner loop cannot settle
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(14);
    let rec = step_rppm(&m, &f, &mut state, &silent(), &mut stream, 3.0, 30, 1e-12).unwrap();
    assert!(rec.non_contractive);
    assert!(state.current.coords[0].is_finite());
}

#[test]
fn rseg_flat_hand_iteration() {
    let (m, f) = flat_quadratic();
    let x = m.point(vec![1.0]).unwrap();
    let mut state = MethodState::new(x);
    let mut stream = Stream::new(15);
    step_rseg(&m, &f, &mut state, &silent(), &mut stream, 0.5).unwrap();
    assert!((state.current.coords[0] - 0.75).abs() < 1e-12);
}

#[test]
fn rseg_constant_objective_is_fixed() {
    let m = Manifold::sphere(3).unwrap();
    let f = BuiltinObjective::Quadratic {
        a: vec![0.0; 3],
        b: vec![0.0; 3],
    };
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    let mut state = MethodState::new(x.clone());
    let mut stream = Stream::new(16);
    step_rseg(&m, &f, &mut state, &silent(), &mut stream, 0.3).unwrap();
    assert_eq!(state.current.coords, x.coords);
}

#[test]
fn rseg_uses_two_distinct_draws() {
    // with noise on, querying twice must consume two different sub-streams:
    // replaying the same trial stream reproduces both, and the two draws
    // differ from each other
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let model = NoiseModel::UniformSphereFrame { sigma: 0.5 };
    let x = m.point(crate::linalg::normalize(&[1.0, 1.0, 0.2])).unwrap();

    let mut s1 = Stream::derive(77, 3);
    let q1a = oracles::query(&model, &m, &f, &x, &mut s1);
    let q1b = oracles::query(&model, &m, &f, &x, &mut s1);
    assert_ne!(q1a.noise_part.as_ref().unwrap().vec, q1b.noise_part.as_ref().unwrap().vec);

    let mut s2 = Stream::derive(77, 3);
    let q2a = oracles::query(&model, &m, &f, &x, &mut s2);
    let q2b = oracles::query(&model, &m, &f, &x, &mut s2);
    assert_eq!(q1a.value.vec, q2a.value.vec);
    assert_eq!(q1b.value.vec, q2b.value.vec);
}

#[test]
fn template_consistency_across_methods() {
    // every method's realized step must equal exp_x(gamma * recorded v)
    let sphere = Manifold::sphere(3).unwrap();
    let simplex = Manifold::entropy_simplex(3).unwrap();
    let rayleigh = rayleigh123();
    let linear3 = BuiltinObjective::Linear {
        c: vec![1.0, -0.3, 0.1],
    };
    let model = NoiseModel::UniformSphereFrame { sigma: 0.2 };
    let gamma = 0.05;

    let cases: Vec<(&Manifold, &BuiltinObjective, MethodKind)> = vec![
        (&sphere, &rayleigh, MethodKind::Rsgd),
        (
            &sphere,
            &rayleigh,
            MethodKind::Resgd {
                retraction: RetractionChoice::Projection,
            },
        ),
        (&sphere, &rayleigh, MethodKind::Rog),
        (&sphere, &rayleigh, MethodKind::Rseg),
        (
            &sphere,
            &rayleigh,
            MethodKind::Rppm {
                inner_iters: 50,
                inner_tol: 1e-12,
            },
        ),
        (&simplex, &linear3, MethodKind::Smd),
        (&simplex, &linear3, MethodKind::Ngd),
    ];
    for (m, f, method) in cases {
        let cfg = MethodConfig {
            method: method.clone(),
            schedule: StepSchedule::Constant { c: gamma },
            noise: model.clone(),
            max_iters: 5,
            record_decomposition: true,
        };
        let x0 = m.random_point(&mut Stream::new(1000));
        let mut stream = Stream::derive(2000, 0);
        let out = run(m, f, &cfg, x0, &mut stream).unwrap();
        assert!(out.error.is_none(), "{method:?} errored");
        let records = out.trajectory.step_records.as_ref().unwrap();
        for (n, rec) in records.iter().enumerate() {
            let x = &out.trajectory.points[n];
            let next = &out.trajectory.points[n + 1];
            let replay = m.exp_map(x, &rec.value.scaled(gamma)).unwrap();
            let dev = crate::linalg::norm(&crate::linalg::sub(&replay.coords, &next.coords));
            assert!(dev <= 1e-9, "{method:?} template deviation {dev} at step {n}");
        }
    }
}

#[test]
fn decomposition_identity_across_methods() {
    let sphere = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let model = NoiseModel::UniformSphereFrame { sigma: 0.3 };
    for method in [MethodKind::Rsgd, MethodKind::Rog, MethodKind::Rseg] {
        let cfg = MethodConfig {
            method,
            schedule: StepSchedule::Power { c: 0.2, p: 0.6 },
            noise: model.clone(),
            max_iters: 20,
            record_decomposition: true,
        };
        let x0 = sphere.random_point(&mut Stream::new(321));
        let mut stream = Stream::derive(99, 0);
        let out = run(&sphere, &f, &cfg, x0, &mut stream).unwrap();
        let records = out.trajectory.step_records.as_ref().unwrap();
        for (n, rec) in records.iter().enumerate() {
            let x = &out.trajectory.points[n];
            let drift = sphere.riemannian_gradient(&f, x).scaled(-1.0);
            let r = rec.decomposition_residual(&drift).unwrap();
            assert!(r <= 1e-10, "residual {r} at step {n}");
        }
    }
}

#[test]
fn run_with_zero_iters_returns_start() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let cfg = MethodConfig {
        method: MethodKind::Rsgd,
        schedule: StepSchedule::Power { c: 0.5, p: 0.6 },
        noise: NoiseModel::UniformSphereFrame { sigma: 0.1 },
        max_iters: 0,
        record_decomposition: false,
    };
    let x0 = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    let mut stream = Stream::new(0);
    let out = run(&m, &f, &cfg, x0.clone(), &mut stream).unwrap();
    assert_eq!(out.trajectory.len(), 1);
    assert_eq!(out.trajectory.points[0].coords, x0.coords);
    assert_eq!(out.trajectory.effective_times, vec![0.0]);
}

#[test]
fn run_converges_to_minimizer_from_generic_start() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let cfg = MethodConfig {
        method: MethodKind::Rsgd,
        schedule: StepSchedule::Power { c: 0.5, p: 0.6 },
        noise: NoiseModel::UniformSphereFrame { sigma: 0.1 },
        max_iters: 10_000,
        record_decomposition: false,
    };
    // start near (but not at) the saddle e2
    let x0 = m
        .point(crate::linalg::normalize(&[1e-3, 1.0, -1e-3]))
        .unwrap();
    let mut stream = Stream::derive(2024, 0);
    let out = run(&m, &f, &cfg, x0, &mut stream).unwrap();
    assert!(out.error.is_none());
    let t = out.trajectory.terminal();
    let d_plus = m.dist(t, &m.point(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
    let d_minus = m.dist(t, &m.point(vec![-1.0, 0.0, 0.0]).unwrap()).unwrap();
    assert!(d_plus.min(d_minus) < 1e-2, "terminal {:?}", t.coords);
}

#[test]
fn run_is_seed_deterministic_bitwise() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let cfg = MethodConfig {
        method: MethodKind::Rseg,
        schedule: StepSchedule::Power { c: 0.3, p: 0.7 },
        noise: NoiseModel::UniformSphereFrame { sigma: 0.2 },
        max_iters: 200,
        record_decomposition: false,
    };
    let x0 = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    let mut s1 = Stream::derive(555, 8);
    let mut s2 = Stream::derive(555, 8);
    let a = run(&m, &f, &cfg, x0.clone(), &mut s1).unwrap();
    let b = run(&m, &f, &cfg, x0, &mut s2).unwrap();
    for (p, q) in a.trajectory.points.iter().zip(&b.trajectory.points) {
        assert_eq!(p.coords, q.coords);
    }
}

#[test]
fn effective_times_are_strictly_increasing() {
    let m = Manifold::sphere(3).unwrap();
    let f = rayleigh123();
    let cfg = MethodConfig {
        method: MethodKind::Rsgd,
        schedule: StepSchedule::Power { c: 1.0, p: 1.0 },
        noise: silent(),
        max_iters: 50,
        record_decomposition: false,
    };
    let x0 = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    let mut stream = Stream::new(1);
    let out = run(&m, &f, &cfg, x0, &mut stream).unwrap();
    let t = &out.trajectory.effective_times;
    assert_eq!(t[0], 0.0);
    assert_eq!(t[1], 1.0);
    assert!((t[2] - 1.5).abs() < 1e-15);
    for w in t.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn clipping_keeps_steps_inside_the_guard() {
    // huge constant steps on the torus would overshoot the guard radius;
    // the clip caps them and counts the events
    let m = Manifold::torus(2.0, 1.0).unwrap();
    let f = BuiltinObjective::TorusHeight;
    let cfg = MethodConfig {
        method: MethodKind::Rsgd,
        schedule: StepSchedule::Constant { c: 5.0 },
        noise: silent(),
        max_iters: 10,
        record_decomposition: true,
    };
    // generic (non-critical) start so the height gradient actually pushes
    let (t0, p0) = (1.0f64, 0.5f64);
    let a = 2.0 + t0.cos();
    let x0 = m
        .point(vec![a * p0.cos(), a * p0.sin(), t0.sin()])
        .unwrap();
    let mut stream = Stream::new(2);
    let out = run(&m, &f, &cfg, x0, &mut stream).unwrap();
    assert!(out.error.is_none());
    assert!(out.clip_events > 0);
    let bound = 0.9 * m.injectivity_lower_bound();
    for (n, rec) in out.trajectory.step_records.as_ref().unwrap().iter().enumerate() {
        let step_len = 5.0 * m.norm(&rec.value);
        assert!(
            step_len <= bound * (1.0 + 1e-9),
            "step {n} length {step_len} exceeds guard {bound}"
        );
    }
}

#[test]
fn run_aborts_with_partial_trajectory_on_domain_escape() {
    // mirror descent maximizing x on the log-barrier half-line: the iterate
    // grows as x/(1 - gamma x) until the prox denominator crosses zero, at
    // which point the step fails and the run keeps what it had
    let m = Manifold::log_barrier(1).unwrap();
    let f = BuiltinObjective::Linear { c: vec![-1.0] };
    let cfg = MethodConfig {
        method: MethodKind::Smd,
        schedule: StepSchedule::Constant { c: 0.2 },
        noise: silent(),
        max_iters: 100,
        record_decomposition: false,
    };
    let x0 = m.point(vec![1.0]).unwrap();
    let mut stream = Stream::new(20);
    let out = run(&m, &f, &cfg, x0, &mut stream).unwrap();
    assert!(
        matches!(out.error, Some(MethodError::Geometry(GeomError::DomainEscape))),
        "expected a domain escape, got {:?}",
        out.error
    );
    assert!(out.trajectory.len() > 1, "partial trajectory missing");
    assert!(out.trajectory.len() < 101, "run should have aborted early");
    // everything kept is still interior and growing
    for w in out.trajectory.points.windows(2) {
        assert!(w[0].coords[0] > 0.0 && w[1].coords[0] > w[0].coords[0]);
    }
}

#[test]
fn config_validation_rejects_mismatched_method_and_manifold() {
    let sphere = Manifold::sphere(3).unwrap();
    let cfg = MethodConfig {
        method: MethodKind::Smd,
        schedule: StepSchedule::Constant { c: 0.1 },
        noise: silent(),
        max_iters: 1,
        record_decomposition: false,
    };
    assert!(cfg.validate(&sphere).is_err());
    let simplex = Manifold::entropy_simplex(2).unwrap();
    assert!(cfg.validate(&simplex).is_ok());
}
