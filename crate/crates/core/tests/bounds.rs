use kpp_core::coeff::{make_constant, make_switching};
use kpp_core::equilibria::SlackModel;
use kpp_core::kppsolve::{init, solve, Field, Grid1D, InitialData, SolveConfig, Trajectory};
use kpp_core::subsuper::{
    capped_lower, certify_ordering, supersolution, BlockSpec, BoundCurve, BoundKind, Relation, WaveParams,
};
use kpp_core::Error;
use proptest::prelude::*;

const DX: f64 = 0.1;
const DT: f64 = 0.005;

fn start_at(bound: &BoundCurve, g: Grid1D) -> Field {
    let vals = g.nodes().map(|x| bound.eval(0.0, x).unwrap()).collect();
    Field::new(g, vals, 0.0).unwrap()
}

fn sandwich_run() -> (Trajectory, BoundCurve, WaveParams) {
    let p = make_constant(1.0, 0.0, 41.0).unwrap();
    let upper = supersolution(&p, 0.8).unwrap();
    let g = Grid1D::with_spacing(-60.0, 150.0, DX).unwrap();
    let tr = solve(&start_at(&upper, g), &p, 40.0, &SolveConfig::with_dt(DT).store_every(200)).unwrap();
    let spec = BlockSpec {
        r_min: 1.0,
        horizon: (0.0, 41.0),
    };
    let w = WaveParams::build(&p, 0.8, 1.0, None, None, spec).unwrap();
    (tr, upper, w)
}

#[test]
fn solution_stays_between_matched_bounds() {
    let (tr, upper, w) = sandwich_run();
    let slack = SlackModel::CALIBRATED.slack(DX, DT);
    let above = certify_ordering(&tr, &upper, Relation::Below, 1e-6 + slack).unwrap();
    assert!(above.passed, "upper violation {}", above.max_violation);
    assert_eq!(above.rows.len(), tr.frames().len());
    let below = certify_ordering(&tr, &capped_lower(&w, 0.0), Relation::Above, slack).unwrap();
    assert!(below.passed, "lower violation {}", below.max_violation);
    // the lower bound is positive at its peak, where it is tested hardest
    let last = tr.last();
    let lower = capped_lower(&w, 0.0);
    let peak = lower.peak_position(40.0).unwrap().unwrap();
    assert!(lower.eval(40.0, peak).unwrap() > 0.0);
    assert!(last.interpolate(peak).unwrap() >= lower.eval(40.0, peak).unwrap());
}

#[test]
fn unit_bound_holds_by_the_maximum_principle() {
    let p = make_switching(0.0, 21.0).unwrap();
    let g = Grid1D::with_spacing(-80.0, 80.0, DX).unwrap();
    let one = BoundCurve::constant(BoundKind::Super, 1.0);
    for d in [
        InitialData::heaviside(0.0),
        InitialData::CompactBump {
            center: 0.0,
            half_width: 3.0,
            height: 1.0,
        },
        InitialData::Constant { value: 1.0 },
    ] {
        let tr = solve(&init(&d, &g).unwrap(), &p, 20.0, &SolveConfig::with_dt(DT).margin(5.0)).unwrap();
        let rep = certify_ordering(&tr, &one, Relation::Below, 0.0).unwrap();
        assert!(rep.passed && rep.max_violation <= 0.0, "{d:?}: {}", rep.max_violation);
    }
}

#[test]
fn inconsistent_start_is_rejected() {
    let p = make_constant(1.0, 0.0, 2.0).unwrap();
    let g = Grid1D::with_spacing(-20.0, 60.0, DX).unwrap();
    let tr = solve(
        &init(&InitialData::Constant { value: 1.0 }, &g).unwrap(),
        &p,
        1.0,
        &SolveConfig::with_dt(DT).margin(0.0),
    )
    .unwrap();
    let upper = supersolution(&p, 1.0).unwrap();
    assert!(matches!(
        certify_ordering(&tr, &upper, Relation::Below, 0.0),
        Err(Error::InconsistentInitial { .. })
    ));
}

#[test]
fn ordering_csv_rows() {
    let (tr, upper, _) = sandwich_run();
    let rep = certify_ordering(&tr, &upper, Relation::Below, 1.0).unwrap();
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,max_violation,location"));
    assert_eq!(lines.count(), rep.rows.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn supersolution_dominates_steeper_data(mu in 0.5f64..1.5, shift in 0.0f64..10.0) {
        let p = make_constant(1.0, 0.0, 11.0).unwrap();
        let upper = supersolution(&p, mu).unwrap();
        let g = Grid1D::with_spacing(-30.0, 60.0, DX).unwrap();
        // a Heaviside step behind the supersolution's unit level lies below it
        let u0 = init(&InitialData::heaviside(-shift), &g).unwrap();
        let tr = solve(&u0, &p, 10.0, &SolveConfig::with_dt(DT).store_every(100).margin(5.0)).unwrap();
        let rep = certify_ordering(&tr, &upper, Relation::Below, SlackModel::CALIBRATED.slack(DX, DT)).unwrap();
        prop_assert!(rep.passed, "{}", rep.max_violation);
    }
}
