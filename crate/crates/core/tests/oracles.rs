use fom_core::engine::{propose, script_d, Step};
use fom_core::oracles::{is_registered, optimality_residual, prox_step};
use fom_core::steprules::{t_from_theta, theta_from_history};
use fom_core::{
    make_named, run_with_state, Backtracking, MethodConfig, ReferenceFn, RunOptions, SimpleFn,
    SmoothFn, StepRule, Vec64,
};
use proptest::prelude::*;

fn v(x: &[f64]) -> Vec64 {
    Vec64::from_f64(x)
}

fn positive(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

fn on_simplex(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn central_diff(f: impl Fn(&Vec64) -> f64, x: &Vec64, i: usize, h: f64) -> f64 {
    let mut up = x.to_f64();
    let mut dn = x.to_f64();
    up[i] += h;
    dn[i] -= h;
    (f(&v(&up)) - f(&v(&dn))) / (2.0 * h)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

const N: usize = 5;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reference_gradients_match_finite_differences(x in positive(N, 0.2, 3.0)) {
        let x = v(&x);
        for h in [ReferenceFn::SquaredEuclidean, ReferenceFn::Entropy, ReferenceFn::Burg] {
            let g = h.gradient(&x).unwrap();
            for i in 0..N {
                let fd = central_diff(|p| h.value(p).unwrap(), &x, i, 1e-6);
                prop_assert!(rel(g[i], fd) <= 1e-5, "{h}: {} vs {fd}", g[i]);
            }
        }
    }

    #[test]
    fn smooth_gradients_match_finite_differences(
        y in positive(N, 0.5, 2.0),
        b in positive(N, 0.1, 3.0),
    ) {
        let y = v(&y);
        let fs = [
            SmoothFn::LeastSquares { target: v(&b), offset: 0.3 },
            SmoothFn::PoissonLikelihood { counts: v(&b) },
            // keep the residual away from the kink at zero
            SmoothFn::HolderResidual { target: v(&b).scale(-1.0), nu: 0.5 },
        ];
        for f in &fs {
            let g = f.subgradient(&y).unwrap();
            for i in 0..N {
                let fd = central_diff(|p| f.value(p), &y, i, 1e-6);
                prop_assert!(rel(g[i], fd) <= 1e-5, "{}: {} vs {fd}", f.name(), g[i]);
            }
        }
    }

    #[test]
    fn three_point_identity(
        a in positive(N, 0.05, 3.0),
        b in positive(N, 0.05, 3.0),
        c in positive(N, 0.05, 3.0),
    ) {
        for h in [ReferenceFn::SquaredEuclidean, ReferenceFn::Entropy, ReferenceFn::Burg] {
            let (a, b, c) = if h == ReferenceFn::Entropy {
                (v(&on_simplex(&a)), v(&on_simplex(&b)), v(&on_simplex(&c)))
            } else {
                (v(&a), v(&b), v(&c))
            };
            let lhs = h.bregman(&a, &c).unwrap();
            let gb = h.gradient(&b).unwrap();
            let gc = h.gradient(&c).unwrap();
            let rhs = h.bregman(&a, &b).unwrap() + h.bregman(&b, &c).unwrap() + gb.sub(&gc).dot(&a.sub(&b));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{h}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn prox_optimality_on_registered_pairs(
        c in prop::collection::vec(-5.0..5.0f64, N),
        t in 0.01..5.0f64,
        z in positive(N, 0.2, 2.5),
        lambda in 0.0..2.0f64,
    ) {
        let c = v(&c);
        let boxed = SimpleFn::Box { lower: Vec64::filled(N, 0.1), upper: Vec64::filled(N, 3.0) };
        let half_line = SimpleFn::Box { lower: Vec64::zeros(N), upper: Vec64::filled(N, f64::INFINITY) };
        let pairs = [
            (ReferenceFn::SquaredEuclidean, SimpleFn::Zero),
            (ReferenceFn::SquaredEuclidean, SimpleFn::L1 { lambda }),
            (ReferenceFn::SquaredEuclidean, boxed.clone()),
            (ReferenceFn::SquaredEuclidean, SimpleFn::Simplex),
            (ReferenceFn::Entropy, SimpleFn::Simplex),
            (ReferenceFn::Burg, boxed.clone()),
            (ReferenceFn::Burg, half_line),
            (ReferenceFn::Zero, SimpleFn::Simplex),
            (ReferenceFn::Zero, boxed),
            (ReferenceFn::Zero, SimpleFn::L1Ball { radius: 1.5 }),
        ];
        for (h, psi) in &pairs {
            prop_assert!(is_registered(*h, psi));
            let z = match psi {
                SimpleFn::Simplex => v(&on_simplex(&z)),
                _ => v(&z),
            };
            let sol = match prox_step(*h, psi, &c, t, &z) {
                Ok(sol) => sol,
                // unbounded Burg subproblem: nothing to check
                Err(fom_core::Error::NotAdmissible(_)) if *h == ReferenceFn::Burg => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{h}/{}: {e}", psi.name()))),
            };
            prop_assert!(psi.contains(&sol.s), "{h}/{}: infeasible", psi.name());
            let res = optimality_residual(*h, &c, t, &z, &sol).unwrap();
            prop_assert!(res <= 1e-8, "{h}/{}: residual {res}", psi.name());
            // g_psi must be a subgradient of Ψ at s: Ψ(w) >= Ψ(s) + <g, w - s>
            let w = sol.s.lerp(&z, 0.5);
            let gap = psi.value(&w) - psi.value(&sol.s) - sol.g_psi.dot(&w.sub(&sol.s));
            prop_assert!(gap >= -1e-9 * (1.0 + sol.g_psi.norm_inf()), "{h}/{}: {gap}", psi.name());
        }
    }

    #[test]
    fn theta_recurrence_round_trips(theta in 1e-6..0.999f64, tp in 1e-3..1e3f64) {
        let t = t_from_theta(theta, tp, 1.0).unwrap();
        let back = theta_from_history(t, tp);
        prop_assert!((back - theta).abs() <= 1e-14, "{back} vs {theta}");
    }

    #[test]
    fn script_d_matches_direct_definition(
        x in positive(4, 0.1, 1.0),
        s in positive(4, 0.1, 1.0),
        sp in positive(4, 0.1, 1.0),
        theta in 0.01..1.0f64,
        seed in 0u64..50,
    ) {
        let inst = make_named::<f64>("poisson-burg", seed).unwrap();
        let n = inst.dim();
        let pad = |p: &[f64]| v(&(0..n).map(|i| 0.5 + p[i % p.len()]).collect::<Vec<_>>());
        let (x, s, sp) = (pad(&x), pad(&s), pad(&sp));
        let y = x.lerp(&sp, theta);
        let ay = inst.a.apply(&y).unwrap();
        let g = inst.f.subgradient(&ay).unwrap();
        let stable = script_d(&inst, &x, &y, &g, &s, theta).unwrap();
        let big_f = |p: &Vec64| inst.objective(p).unwrap();
        let fa = |p: &Vec64| inst.f.value(&inst.a.apply(p).unwrap());
        let dfy = fa(&s) - fa(&y) - g.dot(&inst.a.apply(&s.sub(&y)).unwrap());
        let direct = big_f(&x.lerp(&s, theta)) - (1.0 - theta) * big_f(&x) - theta * big_f(&s) + theta * dfy;
        prop_assert!((stable - direct).abs() <= 1e-9 * (1.0 + big_f(&x).abs()), "{stable} vs {direct}");
    }
}

#[test]
fn averages_match_recomputation() {
    let smooth = StepRule::BacktrackSmooth {
        params: Backtracking::default(),
    };
    let cases = [
        (
            "lasso",
            MethodConfig::FastGradient {
                gamma: None,
                rule: smooth.clone(),
            },
        ),
        ("poisson-burg", MethodConfig::ProxGradient { rule: smooth }),
        ("l1-regression", MethodConfig::ProxSubgradient { c: 1.0 }),
    ];
    for (name, method) in cases {
        let inst = make_named::<f64>(name, 0).unwrap();
        let (_, state) = run_with_state(&inst, &method, &RunOptions::new(300), None).unwrap();
        let (xs, zs) = state.averages_from_scratch();
        assert!(state.x.sub(&xs).norm_inf() <= 1e-12, "{name}: x");
        assert!(state.z.sub(&zs).norm_inf() <= 1e-12, "{name}: z");
    }
}

#[test]
fn first_step_sets_averages_to_first_points() {
    let inst = make_named::<f64>("lasso", 0).unwrap();
    let mut state = fom_core::EngineState::init(&inst).unwrap();
    let p = propose(
        &state,
        &inst,
        fom_core::YSelector::FastCombo,
        Step::from_t(0.01, 0.0),
    )
    .unwrap();
    let (s, y) = (p.sol.s.clone(), p.y.clone());
    state.commit(&inst, p, None).unwrap();
    assert_eq!(state.x, s);
    assert_eq!(state.z, y);
}

#[test]
fn single_precision_prox_is_feasible() {
    let c = fom_core::Vec32::from_f64(&[0.3, -1.0, 2.0]);
    let z = fom_core::Vec32::filled(3, 1.0 / 3.0);
    let sol = prox_step(ReferenceFn::Entropy, &SimpleFn::Simplex, &c, 0.5f32, &z).unwrap();
    assert!((sol.s.sum() - 1.0).abs() < 1e-6);
    let res = optimality_residual(ReferenceFn::Entropy, &c, 0.5f32, &z, &sol).unwrap();
    assert!(res < 1e-5);
}
