//! Convergence orders and algebraic properties checked against independent
//! oracles.

use proptest::prelude::*;

use shs_core::experiments::ode_trajectory;
use shs_core::grid::{integrate, lp_space_time_distance, Level, Snapshot, Trajectory};
use shs_core::limit::run_limit;
use shs_core::shs::run_shs;
use shs_core::{Domain1D, KineticsFamily, ScalarField, TimeGrid};

fn final_u(nodes: usize, dt: f64) -> Vec<f64> {
    let d = Domain1D::new(1.0, nodes).unwrap();
    let u0 = d.sample(|x| 0.3 * (std::f64::consts::PI * x).cos() - 0.1).unwrap();
    let v0 = ScalarField::constant(d, 1.0).unwrap();
    let kin = KineticsFamily::matkowsky_sivashinsky(0.1).unwrap();
    let traj = run_shs(&u0, &v0, &kin, TimeGrid::new(dt, 0.05, 1_000_000).unwrap()).unwrap();
    traj.last().u.clone()
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    let d = Domain1D::new(1.0, a.len()).unwrap();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    d.integrate_slice(&diff)
}

#[test]
fn splitting_is_first_order_in_time() {
    let dt0 = 1e-3;
    let reference = final_u(51, dt0 / 128.0);
    let errs: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|k| l1_diff(&final_u(51, dt0 / k), &reference)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "observed order {order} from {errs:?}");
    }
}

/// Front positions of a limit run from half-burned data, one per step.
fn limit_fronts(nodes: usize, horizon: f64) -> Vec<f64> {
    let d = Domain1D::new(2.0, nodes).unwrap();
    let u0 = d.sample(|x| if x <= 0.5 { 0.5 } else { -0.5 }).unwrap();
    let v0 = ScalarField::constant(d, 1.0).unwrap();
    let h = d.spacing();
    let traj = run_limit(&u0, &v0, TimeGrid::new(h * h / 2.0, horizon, 1_000_000).unwrap()).unwrap();
    traj.series.iter().map(|p| p.front.unwrap()).collect()
}

/// The limit front does not settle under refinement: with dt = h²/2 it
/// advances a fixed number of nodes per step, so its speed grows like 1/h.
/// This pins that behaviour instead of a convergence order.
#[test]
fn limit_front_speed_scales_inversely_with_h() {
    let horizon = 0.004;
    let travelled: Vec<f64> = [101, 201, 401]
        .iter()
        .map(|&n| {
            let f = limit_fronts(n, horizon);
            assert!(f.windows(2).all(|w| w[1] >= w[0]), "front retreated on {n} nodes");
            f.last().unwrap() - f[0]
        })
        .collect();
    for w in travelled.windows(2) {
        let ratio = w[1] / w[0];
        assert!((1.5..=2.5).contains(&ratio), "distance ratio {ratio} from {travelled:?}");
    }
}

/// Classical RK4 on `w' = g(u0 + 1 − e^{−w/ε})`, the reactant-progress form
/// of the space-independent system.
fn rk4_u(u0: f64, eps: f64, horizon: f64, steps: usize) -> Vec<f64> {
    let g = KineticsFamily::matkowsky_sivashinsky(eps).unwrap();
    let f = |w: f64| g.eval_g(u0 + 1.0 - (-w / eps).exp());
    let h = horizon / steps as f64;
    let mut w = 0.0;
    let mut out = vec![u0];
    for _ in 0..steps {
        let k1 = f(w);
        let k2 = f(w + 0.5 * h * k1);
        let k3 = f(w + 0.5 * h * k2);
        let k4 = f(w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(u0 + 1.0 - (-w / eps).exp());
    }
    out
}

#[test]
fn reaction_ode_matches_rk4() {
    for (u0, eps) in [(-0.5, 0.2), (-0.5, 0.1), (0.5, 1e-3)] {
        let ours = ode_trajectory(u0, &KineticsFamily::matkowsky_sivashinsky(eps).unwrap(), 2.0, 1e-4).unwrap();
        let oracle = rk4_u(u0, eps, 2.0, 20_000);
        let diff = ours.iter().zip(&oracle).map(|(a, b)| (a.1 - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-3, "u0 {u0}, eps {eps}: {diff}");
    }
    // a hot start burns out almost at once
    let hot = ode_trajectory(0.5, &KineticsFamily::matkowsky_sivashinsky(1e-3).unwrap(), 2.0, 1e-4).unwrap();
    assert!((hot.last().unwrap().1 - 1.5).abs() < 1e-12);
    assert!((hot[10].1 - 1.5).abs() < 1e-9);
}

fn trajectory(values: &[Vec<f64>], length: f64, dt: f64) -> Trajectory {
    let n = values[0].len();
    let domain = Domain1D::new(length, n).unwrap();
    let horizon = dt * (values.len() - 1) as f64;
    let time = TimeGrid::new(dt, horizon, 1).unwrap();
    let snapshots = values
        .iter()
        .enumerate()
        .map(|(k, u)| Snapshot { t: time.time_of(k), u: u.clone(), aux: vec![0.0; n] })
        .collect();
    Trajectory {
        domain,
        level: Level::Heat,
        time,
        v0: vec![0.0; n],
        snapshots,
        series: Vec::new(),
        clamp_events: 0,
    }
}

type Field = Vec<Vec<f64>>;

fn fields(len: usize) -> impl Strategy<Value = (Field, Field, Field)> {
    let one = || proptest::collection::vec(proptest::collection::vec(-10.0..10.0f64, len), 4);
    (one(), one(), one())
}

proptest! {
    #[test]
    fn distance_is_a_metric((a, b, c) in fields(7), p in 1.0..4.0f64) {
        let (ta, tb, tc) = (trajectory(&a, 2.0, 0.1), trajectory(&b, 2.0, 0.1), trajectory(&c, 2.0, 0.1));
        let ab = lp_space_time_distance(&ta, &tb, p).unwrap();
        let ba = lp_space_time_distance(&tb, &ta, p).unwrap();
        let ac = lp_space_time_distance(&ta, &tc, p).unwrap();
        let cb = lp_space_time_distance(&tc, &tb, p).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
        prop_assert!(ab <= ac + cb + 1e-9);
        prop_assert_eq!(lp_space_time_distance(&ta, &ta, p).unwrap(), 0.0);
    }

    #[test]
    fn lp_norms_are_ordered((a, b, _c) in fields(7)) {
        // On a set of measure T·L, Hölder gives ‖f‖₁ ≤ (TL)^{1/2}‖f‖₂.
        let (ta, tb) = (trajectory(&a, 2.0, 0.1), trajectory(&b, 2.0, 0.1));
        let l1 = lp_space_time_distance(&ta, &tb, 1.0).unwrap();
        let l2 = lp_space_time_distance(&ta, &tb, 2.0).unwrap();
        let measure: f64 = 0.3 * 2.0;
        prop_assert!(l1 <= measure.sqrt() * l2 * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn integrate_is_linear(
        f in proptest::collection::vec(-1e3..1e3f64, 9),
        g in proptest::collection::vec(-1e3..1e3f64, 9),
        a in -5.0..5.0f64,
        b in -5.0..5.0f64,
    ) {
        let d = Domain1D::new(3.0, 9).unwrap();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = integrate(&ScalarField::new(d, combo).unwrap());
        let rhs = a * integrate(&ScalarField::new(d, f).unwrap()) + b * integrate(&ScalarField::new(d, g).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }
}
