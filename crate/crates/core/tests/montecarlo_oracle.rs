//! Monte Carlo samplers checked against the analytic model at n = 10⁶.

use std::f64::consts::FRAC_1_SQRT_2;

use mucorr_core::counterfactual::{rho_conditional_independence, OutcomeSequence};
use mucorr_core::montecarlo::*;
use mucorr_core::nsbox::{make_isotropic, pr_box};
use mucorr_core::quantum_model::{correlation_e, Direction};

const N: usize = 1_000_000;
const SEED: u64 = 42;

fn deg(d: f64) -> Direction {
    Direction::from_degrees(d).unwrap()
}

fn cfg() -> SampleConfig {
    SampleConfig::new(N, SEED).unwrap()
}

fn assert_fair(seq: &OutcomeSequence) {
    let band = 4.0 / (seq.len() as f64).sqrt();
    assert!(seq.mean().abs() <= band, "mean {} outside ±{band}", seq.mean());
}

#[test]
fn pair_sampler_tracks_correlation() {
    for (alpha, beta) in [(0.0, 45.0), (0.0, 90.0), (10.0, 130.0)] {
        let (m, u) = sample_pair(deg(alpha), deg(beta), &cfg());
        assert_fair(&m);
        assert_fair(&u);
        let e = estimate_correlation(&m, &u).unwrap();
        let target = correlation_e(deg(alpha), deg(beta));
        assert!(e.within(target, 4.0), "({alpha}, {beta}): {e:?} vs {target}");
    }
    let (m, u) = sample_pair(deg(0.0), deg(45.0), &cfg());
    assert!(estimate_correlation(&m, &u).unwrap().within(FRAC_1_SQRT_2, 4.0));
}

#[test]
fn conditional_independence_sampler_tracks_product_rule() {
    let (a, ap) = (deg(0.0), deg(90.0));
    for (theta, target) in [(45.0, 0.5), (55.0, 0.4699), (0.0, 0.0)] {
        let (m, u) = sample_counterfactual_ci(deg(theta), a, ap, &cfg());
        assert_fair(&m);
        assert_fair(&u);
        let e = estimate_correlation(&m, &u).unwrap();
        let exact = rho_conditional_independence(deg(theta), a, ap);
        assert!((exact - target).abs() < 1e-4);
        assert!(e.within(exact, 4.0), "θ = {theta}: {e:?} vs {exact}");
    }
}

#[test]
fn coin_and_shapes() {
    let coin = coin_counterfactual(&cfg()).unwrap();
    assert!(coin.within(0.0, 4.0), "{coin:?}");
    assert_eq!(coin, coin_counterfactual(&cfg()).unwrap());

    let shapes = shapes_box_sample(&cfg()).unwrap();
    assert!(shapes.within(0.5, 4.0), "{shapes:?}");
    let aligned = ShapesMixture::new(0.5, 1.0, 1.0).unwrap();
    let e = shapes_box_sample_with(&aligned, &cfg()).unwrap();
    assert!((e.value - 1.0).abs() < 1e-12);
}

#[test]
fn nsbox_sampler() {
    let (xa, xb) = sample_nsbox(&pr_box(), 0, 0, &SampleConfig::new(100_000, SEED).unwrap());
    assert!(xa.iter().zip(&xb).all(|(x, y)| x == y));

    let bx = make_isotropic(0.8).unwrap();
    let (xa, xb) = sample_nsbox(&bx, 1, 1, &cfg());
    let rate = estimate_target_rate(&xa, &xb, 1, 1).unwrap();
    let band = 4.0 * (0.8f64 * 0.2 / N as f64).sqrt();
    assert!((rate.value - 0.8).abs() <= band, "{rate:?}");

    let half = make_isotropic(0.5).unwrap();
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let (xa, xb) = sample_nsbox(&half, a, b, &cfg().derive((2 * a + b) as u64));
        let sa = OutcomeSequence::from_bits(&xa).unwrap();
        let sb = OutcomeSequence::from_bits(&xb).unwrap();
        assert_fair(&sa);
        assert_fair(&sb);
        let e = estimate_correlation(&sa, &sb).unwrap();
        assert!(e.within(0.0, 4.0), "({a},{b}): {e:?}");
    }
}

#[test]
fn nsbox_marginals_uniform() {
    let bx = make_isotropic(0.9).unwrap();
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let (xa, xb) = sample_nsbox(&bx, a, b, &cfg());
        assert_fair(&OutcomeSequence::from_bits(&xa).unwrap());
        assert_fair(&OutcomeSequence::from_bits(&xb).unwrap());
    }
}
