mod common;

use common::{example_51, example_52, random_params, rel_err};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uistop::sensitivity::{
    derivatives, isolines, lambda_star, limits, target_at, value_lambda0_sign_changes, Target,
    Window,
};
use uistop::{model, ModelParams};

fn b_star(p: &ModelParams) -> f64 {
    model::solve(p).unwrap().b_star
}

fn v(p: &ModelParams, x: f64) -> f64 {
    model::solve(p).unwrap().value(x)
}

fn central<F: Fn(f64) -> f64>(f: F, at: f64) -> f64 {
    let h = 1e-5 * at.abs();
    (f(at + h) - f(at - h)) / (2.0 * h)
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut checked = 0;
    while checked < 100 {
        let p = random_params(&mut rng);
        if p.mu.abs() < 1e-4 {
            continue;
        }
        let x = p.x;
        let bs = b_star(&p);
        if (x / bs - 1.0).abs() < 1e-3 {
            continue;
        }
        let r = derivatives(&p, x).unwrap();
        let with_mu = |m: f64| ModelParams { mu: m, ..p.clone() };
        let with_l0 = |l: f64| ModelParams { lambda0: l, ..p.clone() };
        let q_mu = central(|m| model::derive(&with_mu(m)).unwrap().q_star, p.mu);
        let q_l0 = central(|l| model::derive(&with_l0(l)).unwrap().q_star, p.lambda0);
        let b_mu = central(|m| b_star(&with_mu(m)), p.mu);
        let b_l0 = central(|l| b_star(&with_l0(l)), p.lambda0);
        let v_mu = central(|m| v(&with_mu(m), x), p.mu);
        let v_l0 = central(|l| v(&with_l0(l), x), p.lambda0);
        for (name, analytic, numeric) in [
            ("dq/dmu", r.dq_dmu, q_mu),
            ("dq/dl0", r.dq_dlambda0, q_l0),
            ("db/dmu", r.db_dmu, b_mu),
            ("db/dl0", r.db_dlambda0, b_l0),
            ("dv/dmu", r.dv_dmu, v_mu),
            ("dv/dl0", r.dv_dlambda0, v_l0),
        ] {
            assert!(
                rel_err(numeric, analytic) < 1e-4 || (numeric - analytic).abs() < 1e-8,
                "{name}: {analytic} vs {numeric} at {p:?}"
            );
        }
        assert!(r.dq_dmu < 0.0 && r.dq_dlambda0 > 0.0);
        assert!(r.db_dmu < 0.0 && r.db_dlambda0 < 0.0);
        assert!(r.dv_dmu > 0.0);
        checked += 1;
    }
}

#[test]
fn table_1_increments() {
    let r = derivatives(&example_52(), 346.0).unwrap();
    assert!((r.increments.d_mu - 4e-6).abs() < 1e-18);
    assert!((r.increments.d_lambda0 - 1e-4).abs() < 1e-18);
    assert!((r.increments.db_mu + 0.05585).abs() < 1e-4);
    assert!((r.increments.dv_mu - 3.97597).abs() < 1e-4);
    let r = derivatives(&example_51(), 346.0).unwrap();
    assert!((r.increments.db_mu + 0.06415).abs() < 1e-4);
    assert!((r.increments.dv_lambda0 + 4.64855).abs() < 1e-4);
}

#[test]
fn stopping_branch_derivatives() {
    let p = ModelParams { x: 500.0, ..example_52() };
    let r = derivatives(&p, 500.0).unwrap();
    let num = central(|m| v(&ModelParams { mu: m, ..p.clone() }, 500.0), p.mu);
    assert!(rel_err(num, r.dv_dmu) < 1e-6);
    assert_eq!(r.dv_dlambda0, 0.0);
    let num = central(|l| v(&ModelParams { lambda0: l, ..p.clone() }, 500.0), p.lambda0);
    assert!(num.abs() < 1e-3);
    let q = ModelParams { mu: 0.0, ..p.clone() };
    let r = derivatives(&q, 500.0).unwrap();
    let num = central(|l| v(&ModelParams { lambda0: l, ..q.clone() }, 500.0), q.lambda0);
    assert!(rel_err(num, r.dv_dlambda0) < 1e-6);
}

#[test]
fn monotone_in_drift_and_job_loss_rate() {
    for base in [example_51(), example_52()] {
        let mus: Vec<f64> = (0..200).map(|i| -0.004 + 0.0138 * i as f64 / 199.0).collect();
        let bs: Vec<f64> = mus.iter().map(|&m| b_star(&ModelParams { mu: m, ..base.clone() })).collect();
        let vs: Vec<f64> = mus.iter().map(|&m| v(&ModelParams { mu: m, ..base.clone() }, 346.0)).collect();
        assert!(bs.windows(2).all(|w| w[1] < w[0]));
        assert!(vs.windows(2).all(|w| w[1] > w[0]));
        let l0s: Vec<f64> = (0..200).map(|i| 0.001 + 0.1 * i as f64 / 199.0).collect();
        let bl: Vec<f64> = l0s.iter().map(|&l| b_star(&ModelParams { lambda0: l, ..base.clone() })).collect();
        assert!(bl.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn edge_limits() {
    let p = example_52();
    let lim = limits(&p, 346.0).unwrap();
    let find = |edge: &str| *lim.iter().find(|l| l.edge == edge).unwrap();

    let far = find("lambda0 -> inf");
    assert_eq!(far.b_star, 300.0);
    assert_eq!(far.value, 1380.0);
    let seq: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&l| b_star(&ModelParams { lambda0: l, ..p.clone() }))
        .collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0] && w[1] > 300.0));
    assert!(seq[3] - 300.0 < 2.0);
    let v_far = v(&ModelParams { lambda0: 1e4, ..p.clone() }, 346.0);
    assert!((v_far - 1380.0).abs() < 1.0);

    let top = find("mu -> r + lambda0");
    assert_eq!(top.q_star, 1.0);
    assert!(top.value.is_infinite());
    let near = ModelParams { mu: 0.0104 - 1e-7, ..p.clone() };
    let d = model::derive(&near).unwrap();
    assert!(d.q_star - 1.0 < 1e-3);
    assert!(rel_err(b_star(&near), top.b_star) < 1e-3);
    assert!(v(&near, 346.0) > 1e5);

    let bottom = find("mu -> -inf");
    let low = ModelParams { mu: -1.0, ..p.clone() };
    assert!(model::derive(&low).unwrap().q_star > 1e3);
    assert!(v(&low, 346.0) < 1e-12 && bottom.value == 0.0);

    let flat = find("lambda0 -> 0");
    assert_eq!(flat.q_star, 1.0);
    assert_eq!(flat.value, 30.0 * 346.0);
    let vals: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6, 1e-8]
        .iter()
        .map(|&l| v(&ModelParams { lambda0: l, ..p.clone() }, 346.0))
        .collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    assert!(rel_err(vals[4], flat.value) < 1e-3);

    let below = limits(&ModelParams { mu: 0.0, ..p.clone() }, 346.0).unwrap();
    let l = below.iter().find(|l| l.edge == "lambda0 -> 0").unwrap();
    assert!(l.b_star.is_infinite() && l.value == 0.0 && l.q_star > 1.0);

    let above = limits(&ModelParams { mu: 0.001, lambda0: 0.01, ..p.clone() }, 346.0).unwrap();
    let l = above.iter().find(|l| l.edge == "lambda0 -> mu - r").unwrap();
    let close = ModelParams { mu: 0.001, lambda0: 0.0006 + 1e-9, ..p.clone() };
    assert!(rel_err(b_star(&close), l.b_star) < 1e-3);
}

#[test]
fn critical_rate_for_unequal_drift() {
    for mu in [-0.001, 0.0, 0.0002, 0.0008] {
        let p = ModelParams { mu, ..example_52() };
        let lam = lambda_star(&p, 346.0).unwrap();
        let at = b_star(&ModelParams { lambda0: lam, ..p.clone() });
        assert!(rel_err(at, 346.0) < 1e-8, "mu {mu}: b*({lam}) = {at}");
    }
    let p = ModelParams { mu: 0.005, ..example_52() };
    let lam = lambda_star(&p, 1e4).unwrap();
    assert!((lam - 0.0046).abs() < 1e-12);
}

#[test]
fn threshold_isoline() {
    let p = example_52();
    let window = Window::new((0.005, 0.03), (-0.002, 0.002));
    let pts = isolines(&p, &window, 340.0, Target::BStar).unwrap();
    assert!(pts.len() > 100);
    for &(l, m) in &pts {
        let b = target_at(&p, Target::BStar, l, m);
        assert!((b - 340.0).abs() <= 1e-6 * 340.0, "{b} at ({l}, {m})");
    }
    // Higher job-loss rates need lower drifts to keep b* fixed.
    let first = pts.first().unwrap();
    let last = pts.last().unwrap();
    assert!(last.0 > first.0 && last.1 < first.1);

    let none = isolines(&p, &window, 1.0, Target::BStar).unwrap();
    assert!(none.is_empty());
}

#[test]
fn value_isoline_at_entry_value() {
    let p = example_52();
    let lam = lambda_star(&p, 346.0).unwrap();
    for l in [lam * 1.01, 0.02, 0.05] {
        let v = target_at(&p, Target::Value, l, p.r);
        assert!((v - 1380.0).abs() < 1e-9);
    }
    let window = Window { n: 101, ..Window::new((0.013, 0.05), (-0.0002, 0.0006)) };
    let pts = isolines(&p, &window, 1380.0, Target::Value).unwrap();
    assert!(!pts.is_empty());
    for &(l, m) in &pts {
        let v = target_at(&p, Target::Value, l, m);
        assert!((v - 1380.0).abs() <= 1e-6 * 1380.0);
        assert!((m - p.r).abs() < 1e-9, "({l}, {m})");
    }
}

#[test]
fn value_in_job_loss_rate_can_turn() {
    let turning = ModelParams { mu: 0.0002, ..example_52() };
    assert!(value_lambda0_sign_changes(&turning, (0.0005, 0.2), 400).unwrap() >= 1);
    let equal = ModelParams { mu: 0.0004, ..example_52() };
    assert_eq!(value_lambda0_sign_changes(&equal, (0.0005, 0.2), 400).unwrap(), 0);
}

#[test]
fn mortality_is_rejected() {
    let p = ModelParams { mortality: Some(uistop::Mortality { lambda2: 0.001, a_dag: 0.0 }), ..example_52() };
    assert!(derivatives(&p, 346.0).is_err());
}
