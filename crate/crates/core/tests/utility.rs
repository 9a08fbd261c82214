mod common;

use common::{example_51, example_52, rel_err};
use uistop::hitting::{enpv, hit_probability, ThresholdPolicy};
use uistop::utility::{
    consumption_gamma, kappa_dag, max_premium, max_premium_formula, mean_time_threshold,
    modified_threshold, modified_value, objective, solve, suboptimal_threshold_raw, MaxPremium,
    UtilityConfig, Variant,
};
use uistop::{model, ModelParams};

fn grid_argmax(p: &ModelParams, variant: Variant, kappa: f64, hi: f64, n: usize) -> (f64, f64) {
    let step = (hi - p.x) / (n - 1) as f64;
    (0..n)
        .map(|i| p.x + i as f64 * step)
        .map(|b| (b, objective(p, variant, kappa, b).unwrap()))
        .fold((p.x, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

#[test]
fn raw_variant() {
    let p = example_51();
    let b_star = model::solve(&p).unwrap().b_star;
    assert_eq!(suboptimal_threshold_raw(&p, 0.0).unwrap(), b_star);
    assert_eq!(suboptimal_threshold_raw(&p, 1e9).unwrap(), 346.0);

    let kappa = 100.0;
    let b = suboptimal_threshold_raw(&p, kappa).unwrap();
    assert!(b > 346.0 && b < b_star);
    let d = model::derive(&p).unwrap();
    let a = 1.0 - 2.0 * p.mu / (p.sigma * p.sigma);
    let lhs = a * kappa * (b / 346.0).powf(d.q_star - a) + (d.q_star - 1.0) * d.beta1 * b;
    assert!(rel_err(lhs, 9000.0 * d.q_star) < 1e-8);

    let n = 100_000;
    let (b_grid, _) = grid_argmax(&p, Variant::HitProbRaw, kappa, 2.0 * b_star, n);
    let step = (2.0 * b_star - 346.0) / (n - 1) as f64;
    assert!((b_grid - b).abs() <= step, "{b} vs grid {b_grid}");

    assert_eq!(suboptimal_threshold_raw(&example_52(), 100.0).unwrap(), model::solve(&example_52()).unwrap().b_star);
}

#[test]
fn powered_threshold_is_linear_in_kappa() {
    let p = example_52();
    let b0 = modified_threshold(&p, 0.0).unwrap();
    let b1 = modified_threshold(&p, 1000.0).unwrap();
    let b2 = modified_threshold(&p, 2000.0).unwrap();
    assert!(b1 < b0);
    assert!(((b0 - b1) - (b1 - b2)).abs() < 1e-9);
    assert_eq!(modified_threshold(&p, 9000.0).unwrap(), 0.0);
    assert!(modified_threshold(&p, 9000.1).is_err());
    assert!(modified_threshold(&p, -1.0).is_err());
    assert!(modified_value(&p, 9001.0, 346.0).is_err());
}

#[test]
fn powered_value_increases_in_kappa() {
    for p in [example_51(), example_52()] {
        for x in [100.0, 300.0, 346.0, 400.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=200 {
                let u = modified_value(&p, 9000.0 * i as f64 / 200.0, x).unwrap();
                assert!(u > prev);
                prev = u;
            }
        }
    }
    let p = example_52();
    let k = kappa_dag(&p, 346.0).unwrap();
    let below = modified_value(&p, k * (1.0 - 1e-12), 346.0).unwrap();
    let above = modified_value(&p, k * (1.0 + 1e-12), 346.0).unwrap();
    assert!((below - above).abs() < 1e-6);
}

#[test]
fn kappa_dag_edges() {
    let p = example_52();
    let b_star = model::solve(&p).unwrap().b_star;
    assert!(kappa_dag(&p, b_star).unwrap().abs() < 1e-9);
    assert_eq!(kappa_dag(&p, 0.0).unwrap(), 9000.0);
    assert!(kappa_dag(&p, 400.0).unwrap() < 0.0);
    let k = kappa_dag(&p, 346.0).unwrap();
    assert!(rel_err(modified_threshold(&p, k).unwrap(), 346.0) < 1e-10);
}

#[test]
fn powered_objective_reduces_to_modified_value() {
    let p = example_51();
    let d = model::derive(&p).unwrap();
    let a = 1.0 - 2.0 * p.mu / (p.sigma * p.sigma);
    for kappa in [0.0, 50.0, 150.0, 400.0] {
        let b = modified_threshold(&p, kappa).unwrap();
        let pol = ThresholdPolicy::new(&p, b).unwrap();
        let composed = hit_probability(&pol).powf(d.q_star / a) * kappa + enpv(&pol);
        let direct = modified_value(&p, kappa, 346.0).unwrap();
        assert!(rel_err(composed, direct) < 1e-10, "{composed} vs {direct}");
    }
}

#[test]
fn mean_time_variant() {
    let p = example_52();
    let b_star = model::solve(&p).unwrap().b_star;
    assert_eq!(mean_time_threshold(&p, 0.0).unwrap(), b_star);
    let b = mean_time_threshold(&p, 50.0).unwrap();
    let n = 100_000;
    let (b_grid, v_grid) = grid_argmax(&p, Variant::MeanTimeExp, 50.0, 2.0 * b_star, n);
    let step = (2.0 * b_star - 346.0) / (n - 1) as f64;
    assert!((b - b_grid).abs() <= step, "{b} vs {b_grid}");
    assert!(objective(&p, Variant::MeanTimeExp, 50.0, b).unwrap() >= v_grid - 1e-9);
    assert!(b <= b_star);
    assert!(mean_time_threshold(&example_51(), 50.0).is_err());

    for kappa in [0.0, 10.0, 162.0, 5000.0, 9000.0] {
        let powered = solve(&p, &UtilityConfig { kappa, variant: Variant::MeanTimePowered }).unwrap();
        assert_eq!(powered.b_dag, modified_threshold(&p, kappa).unwrap());
    }
}

#[test]
fn every_variant_lowers_the_threshold() {
    for p in [example_51(), example_52()] {
        let b_star = model::solve(&p).unwrap().b_star;
        for variant in [Variant::HitProbRaw, Variant::HitProbPowered, Variant::MeanTimeExp, Variant::MeanTimePowered] {
            for kappa in [0.0, 1.0, 50.0, 500.0, 5000.0] {
                match solve(&p, &UtilityConfig { kappa, variant }) {
                    Ok(s) => assert!(s.b_dag <= b_star + 1e-9, "{variant:?} {kappa}"),
                    Err(_) => assert_eq!(variant, Variant::MeanTimeExp),
                }
            }
        }
    }
}

#[test]
fn consumption() {
    assert_eq!(consumption_gamma(0.0, 0.0004, 0.01, 0.011).unwrap(), 0.0);
    let g = consumption_gamma(300.0, 0.0004, 0.01, 0.011).unwrap();
    assert!(rel_err(g, 0.01 * 300.0 / (0.0104 * 0.0114)) < 1e-15);
    assert!(rel_err(consumption_gamma(600.0, 0.0004, 0.01, 0.011).unwrap(), 2.0 * g) < 1e-15);
    assert!(rel_err(consumption_gamma(300.0, 0.0, 0.01, 0.011).unwrap(), 300.0 / 0.011) < 1e-15);
    assert!(consumption_gamma(-1.0, 0.0004, 0.01, 0.011).is_err());
}

fn finite(m: MaxPremium) -> f64 {
    match m {
        MaxPremium::Finite(v) => v,
        MaxPremium::Unbounded => panic!("unbounded"),
    }
}

#[test]
fn maximum_premium_with_consumption() {
    let p = example_52();
    // At c = 300 the consumption value exceeds β1x and no premium is affordable.
    let heavy = consumption_gamma(300.0, 0.0004, 0.01, 0.011).unwrap();
    assert!(heavy > 30.0 * 346.0);
    assert_eq!(finite(max_premium(&p, 346.0, heavy).unwrap()), 30.0 * 346.0 - heavy);

    let gamma = consumption_gamma(50.0, 0.0004, 0.01, 0.011).unwrap();
    let pmax = finite(max_premium(&p, 346.0, gamma).unwrap());
    let at = ModelParams { premium: pmax, ..p.clone() };
    let residual = model::solve(&at).unwrap().value(346.0) - gamma;
    assert!(residual.abs() < 1e-8 * 30.0 * 346.0, "{residual}");
    assert!(rel_err(max_premium_formula(&at, 346.0, gamma).unwrap(), pmax) < 1e-9);

    let mut prev = f64::INFINITY;
    for g in [gamma * 0.5, gamma, gamma * 2.0, gamma * 4.0] {
        let v = finite(max_premium(&p, 346.0, g).unwrap());
        assert!(v < prev);
        prev = v;
    }
    let mut prev = 0.0;
    for x in [200.0, 300.0, 346.0, 400.0, 600.0] {
        let v = finite(max_premium(&p, x, gamma).unwrap());
        assert!(v > prev);
        prev = v;
    }
    assert_eq!(finite(max_premium(&p, 346.0, 20000.0).unwrap()), 30.0 * 346.0 - 20000.0);
    assert!(max_premium(&p, 346.0, -1.0).is_err());
}
