use kpp_core::coeff::{equilibrium_path, make_constant, make_periodic, make_switching, CoefficientPath, NoiseParams, NoisePath};
use kpp_core::equilibria::logistic_solution;
use kpp_core::fronts::front_position;
use kpp_core::kppsolve::{init, solve, solve_moving_frame, Field, Frame, Grid1D, InitialData, SolveConfig};
use proptest::prelude::*;

fn path_strategy() -> impl Strategy<Value = CoefficientPath> {
    prop_oneof![
        (0.3f64..2.5).prop_map(|a| make_constant(a, 0.0, 10.0).unwrap()),
        (0.5f64..2.0, 0.0f64..0.45, 0.5f64..8.0)
            .prop_map(|(m, amp, per)| make_periodic(m, amp * m, per, 0.0, 10.0).unwrap()),
        (0.0f64..40.0).prop_map(|s| make_switching(-50.0, 100.0).unwrap().shift(s)),
    ]
}

fn data_strategy(n: usize) -> impl Strategy<Value = InitialData> {
    prop_oneof![
        (-5.0f64..5.0).prop_map(|at| InitialData::Heaviside { at }),
        (-5.0f64..5.0, 0.1f64..1.4, 0.5f64..6.0).prop_map(|(at, plateau, width)| InitialData::FrontLike {
            at,
            plateau,
            width
        }),
        (-3.0f64..3.0, 0.5f64..5.0, 0.0f64..1.5).prop_map(|(center, half_width, height)| {
            InitialData::CompactBump {
                center,
                half_width,
                height,
            }
        }),
        (0.0f64..1.5).prop_map(|value| InitialData::Constant { value }),
        prop::collection::vec(0.0f64..1.5, n).prop_map(|values| InitialData::Samples { values }),
    ]
}

fn frame_strategy() -> impl Strategy<Value = Frame> {
    prop_oneof![Just(Frame::Fixed), (0.4f64..2.5).prop_map(|mu| Frame::Moving { mu })]
}

const N: usize = 161;

fn grid() -> Grid1D {
    Grid1D::new(-20.0, 20.0, N).unwrap()
}

/// Largest admissible step for data bounded by `u_max` on `[0, t_end]`.
fn safe_dt(path: &CoefficientPath, t_end: f64, u_max: f64, want: f64) -> f64 {
    let a = path.max_on(0.0, t_end).unwrap();
    want.min(0.4 / (a * (2.0 * u_max - 1.0).max(1.0)))
}

fn run(u0: &Field, path: &CoefficientPath, t_end: f64, dt: f64, frame: Frame) -> Vec<Field> {
    let cfg = SolveConfig::with_dt(dt).store_every(7).margin(0.0).frame(frame);
    solve(u0, path, t_end, &cfg).unwrap().frames().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn comparison_principle(
        path in path_strategy(),
        a in data_strategy(N),
        b in data_strategy(N),
        frame in frame_strategy(),
        dt in 0.001f64..0.05,
        t_end in 0.2f64..4.0,
    ) {
        let g = grid();
        let fa = init(&a, &g).unwrap();
        let fb = init(&b, &g).unwrap();
        let lower: Vec<f64> = fa.values().iter().zip(fb.values()).map(|(x, y)| x.min(*y)).collect();
        let lower = Field::new(g, lower, 0.0).unwrap();
        let dt = safe_dt(&path, t_end, fa.max(), dt);
        let lo = run(&lower, &path, t_end, dt, frame);
        let hi = run(&fa, &path, t_end, dt, frame);
        for (l, h) in lo.iter().zip(&hi) {
            for (x, y) in l.values().iter().zip(h.values()) {
                prop_assert!(*x <= y + 1e-12, "{x} > {y} at t={}", l.t());
            }
        }
    }

    #[test]
    fn maximum_principle(
        path in path_strategy(),
        a in data_strategy(N),
        frame in frame_strategy(),
        dt in 0.001f64..0.05,
        t_end in 0.2f64..4.0,
    ) {
        let f = init(&a, &grid()).unwrap();
        let (lo, hi) = (f.min().min(0.0), f.max().max(1.0));
        let dt = safe_dt(&path, t_end, f.max(), dt);
        for fr in run(&f, &path, t_end, dt, frame) {
            prop_assert!(fr.min() >= lo - 1e-12 && fr.max() <= hi + 1e-12);
        }
    }

    #[test]
    fn monotone_data_stays_monotone(
        path in path_strategy(),
        at in -5.0f64..5.0,
        kind in 0usize..3,
        frame in frame_strategy(),
        dt in 0.001f64..0.05,
        t_end in 0.2f64..4.0,
    ) {
        let data = match kind {
            0 => InitialData::Heaviside { at },
            1 => InitialData::FrontLike { at, plateau: 1.3, width: 3.0 },
            _ => InitialData::Exponential { mu: 0.9, at },
        };
        let f = init(&data, &grid()).unwrap();
        let dt = safe_dt(&path, t_end, f.max(), dt);
        for fr in run(&f, &path, t_end, dt, frame) {
            for w in fr.values().windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }
}

#[test]
fn homogeneous_data_follows_logistic() {
    let noise = NoisePath::ou(NoiseParams { seed: 3, ..NoiseParams::default() }, -100.0, 40.0).unwrap();
    let paths = vec![
        make_constant(1.0, 0.0, 30.0).unwrap(),
        make_periodic(1.0, 0.5, 2.0 * std::f64::consts::PI, 0.0, 30.0).unwrap(),
        make_switching(0.0, 30.0).unwrap(),
        equilibrium_path(&noise, 0.0, 30.0, None).unwrap(),
    ];
    let g = Grid1D::new(-5.0, 5.0, 21).unwrap();
    for p in &paths {
        for &u0 in &[0.05, 0.5, 2.0] {
            let f = init(&InitialData::Constant { value: u0 }, &g).unwrap();
            let traj = solve(&f, p, 20.0, &SolveConfig::with_dt(1e-3).store_every(250).margin(0.0)).unwrap();
            for fr in traj.frames() {
                let exact = logistic_solution(u0, p, fr.t()).unwrap();
                assert!(fr.max() - fr.min() < 1e-10);
                assert!((fr.values()[0] - exact).abs() <= 5e-3, "{} u0={u0} t={}", p.describe(), fr.t());
            }
        }
    }
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn first_order_in_time() {
    let p = make_constant(1.0, 0.0, 10.0).unwrap();
    let g = Grid1D::new(0.0, 1.0, 5).unwrap();
    let f = init(&InitialData::Constant { value: 0.1 }, &g).unwrap();
    let dts = [0.04, 0.02, 0.01, 0.005];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let tr = solve(&f, &p, 4.0, &SolveConfig::with_dt(dt).margin(0.0)).unwrap();
            (tr.last().values()[0] - logistic_solution(0.1, &p, 4.0).unwrap()).abs()
        })
        .collect();
    let s = slope(&dts, &errs);
    assert!((s - 1.0).abs() <= 0.3, "time order {s}");
}

#[test]
fn second_order_in_space() {
    // smooth Neumann data; differences of successive refinements at fixed dt
    let p = make_constant(1.0, 0.0, 10.0).unwrap();
    let l = 10.0;
    let sols: Vec<Field> = [41usize, 81, 161, 321]
        .iter()
        .map(|&n| {
            let g = Grid1D::new(0.0, l, n).unwrap();
            let vals = g.nodes().map(|x| 0.4 + 0.3 * (std::f64::consts::PI * x / l).cos()).collect();
            let f = Field::new(g, vals, 0.0).unwrap();
            solve(&f, &p, 1.0, &SolveConfig::with_dt(1e-3).margin(0.0)).unwrap().last().clone()
        })
        .collect();
    let coarse = |f: &Field, i: usize| f.values()[i * (f.values().len() - 1) / 40];
    let diffs: Vec<f64> = sols
        .windows(2)
        .map(|w| (0..=40).map(|i| (coarse(&w[0], i) - coarse(&w[1], i)).abs()).fold(0.0, f64::max))
        .collect();
    let hs = [l / 40.0, l / 80.0, l / 160.0];
    let s = slope(&hs, &diffs);
    assert!((s - 2.0).abs() <= 0.3, "space order {s}, diffs {diffs:?}");
}

#[test]
fn moving_frame_matches_shifted_fixed_frame() {
    let p = make_periodic(1.0, 0.3, 4.0, 0.0, 30.0).unwrap();
    let g = Grid1D::with_spacing(-60.0, 120.0, 0.1).unwrap();
    let f = init(&InitialData::heaviside(0.0), &g).unwrap();
    let cfg = SolveConfig::with_dt(0.005).store_every(400).margin(0.0);
    let fixed = solve(&f, &p, 20.0, &cfg).unwrap();
    let gm = Grid1D::with_spacing(-100.0, 60.0, 0.1).unwrap();
    let fm = init(&InitialData::heaviside(0.0), &gm).unwrap();
    let moving = solve_moving_frame(&fm, &p, 1.0, 20.0, &cfg).unwrap();
    for (a, b) in fixed.frames().iter().zip(moving.frames()) {
        let mut worst: f64 = 0.0;
        for i in 0..gm.len() {
            let x = b.lab_x(i);
            if let Some(ua) = a.interpolate(x) {
                worst = worst.max((ua - b.values()[i]).abs());
            }
        }
        // O(dx) agreement
        assert!(worst <= 0.02, "t={} diff={worst}", a.t());
    }
}

#[test]
fn moving_frame_drift_is_bramson_sized() {
    let p = make_constant(1.0, 0.0, 200.0).unwrap();
    let g = Grid1D::with_spacing(-150.0, 50.0, 0.1).unwrap();
    let f = init(&InitialData::heaviside(0.0), &g).unwrap();
    let t_end = 100.0;
    let tr = solve_moving_frame(&f, &p, 1.0, t_end, &SolveConfig::with_dt(0.005).store_every(2000).margin(10.0)).unwrap();
    for fr in tr.frames() {
        let x = front_position(fr, 0.5).position().unwrap();
        let t = fr.t().max(1.0);
        assert!(x.abs() <= 3.0 + 1.5 * t.ln(), "t={} x={x}", fr.t());
    }
}

#[test]
fn steep_frame_recedes() {
    // frame speed 2.5, front speed about 2; the region ahead of the front
    // must be wide enough that the zero-flux end does not seed a second front
    let p = make_constant(1.0, 0.0, 100.0).unwrap();
    let g = Grid1D::with_spacing(-100.0, 100.0, 0.1).unwrap();
    let f = init(&InitialData::heaviside(0.0), &g).unwrap();
    let tr = solve_moving_frame(&f, &p, 2.0, 60.0, &SolveConfig::with_dt(0.005).store_every(1000).margin(10.0)).unwrap();
    let x = |t: f64| front_position(tr.nearest(t), 0.5).position().unwrap();
    let rate = (x(60.0) - x(30.0)) / 30.0;
    assert!((rate + 0.5).abs() < 0.05, "rate {rate}");
}

#[test]
fn unit_state_is_fixed_in_moving_frame() {
    let p = make_switching(0.0, 20.0).unwrap();
    let g = Grid1D::new(-10.0, 10.0, 101).unwrap();
    let f = init(&InitialData::Constant { value: 1.0 }, &g).unwrap();
    let tr = solve_moving_frame(&f, &p, 1.3, 10.0, &SolveConfig::with_dt(0.01).margin(0.0)).unwrap();
    assert!(tr.frames().iter().all(|fr| fr.values().iter().all(|v| (v - 1.0).abs() < 1e-14)));
}
