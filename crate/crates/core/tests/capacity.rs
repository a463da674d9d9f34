use std::f64::consts::PI;

use stable_info::alphapower::PowerOptions;
use stable_info::capacity::{
    capacity_stable, cost_constraint_mc, cost_function, optimal_input_scale, optimal_output_check, ChannelSpec,
};
use stable_info::stable::reference_entropy;

fn noise_power(alpha: f64, gamma: f64) -> f64 {
    alpha.powf(1.0 / alpha) * gamma
}

#[test]
fn awgn_reduction() {
    for &(sigma, p) in &[(1.0f64, 1.0f64), (0.3, 7.0), (2.0, 0.01)] {
        let spec = ChannelSpec::new(2.0, sigma / 2f64.sqrt(), (sigma * sigma + p).sqrt(), 1).unwrap();
        let c = capacity_stable(&spec).unwrap();
        assert!((c - 0.5 * (1.0 + p / (sigma * sigma)).ln()).abs() < 1e-14);
    }
}

#[test]
fn power_addition_of_optimal_input() {
    for &(alpha, g, a) in &[(2.0, 1.0, 3.0), (1.5, 1.0, 3.0), (1.2, 0.4, 1.0), (0.7, 1.0, 10.0)] {
        let spec = ChannelSpec::new(alpha, g, a, 1).unwrap();
        let gx = optimal_input_scale(&spec).unwrap();
        let px = noise_power(alpha, gx);
        let lhs = px.powf(alpha) + noise_power(alpha, g).powf(alpha);
        assert!((lhs - a.powf(alpha)).abs() < 1e-12 * a.powf(alpha));
    }
    // alpha = 2: gamma_y^2 = gamma_x^2 + gamma_n^2 with gamma_y = A / sqrt 2
    let spec = ChannelSpec::new(2.0, 1.0, 2.0, 1).unwrap();
    let gx = optimal_input_scale(&spec).unwrap();
    assert!((gx * gx + 1.0 - 2.0).abs() < 1e-14);
    // A^alpha = 2 P_N^alpha splits the power evenly
    let pn = noise_power(1.5, 0.8);
    let spec = ChannelSpec::new(1.5, 0.8, 2f64.powf(1.0 / 1.5) * pn, 1).unwrap();
    let px = noise_power(1.5, optimal_input_scale(&spec).unwrap());
    assert!((px - pn).abs() < 1e-12);
}

#[test]
fn capacity_monotone() {
    let mut last = -1.0;
    for k in 0..10 {
        let c = capacity_stable(&ChannelSpec::new(1.5, 1.0, 1.4 + 0.3 * k as f64, 1).unwrap()).unwrap();
        assert!(c > last);
        last = c;
    }
    let mut last = f64::INFINITY;
    for k in 1..10 {
        let c = capacity_stable(&ChannelSpec::new(1.5, 0.2 * k as f64, 3.0, 1).unwrap()).unwrap();
        assert!(c < last);
        last = c;
    }
    let c3 = capacity_stable(&ChannelSpec::new(2.0, 1.0, 3.0, 3).unwrap()).unwrap();
    let c1 = capacity_stable(&ChannelSpec::new(2.0, 1.0, 3.0, 1).unwrap()).unwrap();
    assert!((c3 - 3.0 * c1).abs() < 1e-14);
}

#[test]
fn optimal_output_reaches_the_cap() {
    let spec = ChannelSpec::new(1.5, 1.0, 3.0, 1).unwrap();
    let out = optimal_output_check(&spec, &PowerOptions::default()).unwrap();
    assert!((out.output_alpha_power - 3.0).abs() / 3.0 < 1e-2, "{out:?}");
    assert!((out.output_entropy - out.max_entropy).abs() < 1e-3, "{out:?}");
}

#[test]
fn cost_at_noise_power_is_reference_entropy() {
    for &alpha in &[1.2, 1.5, 1.8, 2.0] {
        let g = 0.7;
        let c = cost_function(0.0, noise_power(alpha, g), alpha, g).unwrap();
        let h = reference_entropy(alpha).unwrap();
        assert!((c - h).abs() < 1e-6, "alpha {alpha}: {c} vs {h}");
    }
}

#[test]
fn gaussian_cost_is_quadratic() {
    // N(0,1) reference: C = ln(2 pi)/2 + (x^2 + 2 gamma^2) / (2 P^2)
    let (g, p) = (0.8, 1.7);
    let mut ratios = Vec::new();
    for &x in &[10.0f64, 20.0, 40.0] {
        let c = cost_function(x, p, 2.0, g).unwrap();
        let exact = 0.5 * (2.0 * PI).ln() + (x * x + 2.0 * g * g) / (2.0 * p * p);
        assert!((c - exact).abs() < 1e-8 * exact);
        ratios.push(c / (x * x));
    }
    let limit = 1.0 / (2.0 * p * p);
    assert!(ratios.windows(2).all(|w| (w[1] - limit).abs() < (w[0] - limit).abs()));
    assert!((ratios[2] - limit).abs() / limit < 1e-2);
}

#[test]
fn heavy_tailed_cost_is_logarithmic() {
    let (alpha, g, p) = (1.5, 1.0, 2.0);
    let xs = [1e2f64, 1e3, 1e4];
    let c: Vec<f64> = xs.iter().map(|&x| cost_function(x, p, alpha, g).unwrap()).collect();
    let ratios: Vec<f64> = c.iter().zip(&xs).map(|(c, x)| c / x.ln()).collect();
    assert!(ratios.iter().all(|r| *r > 0.0));
    assert!((ratios[2] - ratios[1]).abs() < (ratios[1] - ratios[0]).abs());
    // -ln p_Z~(y) = (1 + alpha) ln|y| + const + o(1), so the offset settles
    let off: Vec<f64> = c.iter().zip(&xs).map(|(c, x)| c - (1.0 + alpha) * x.ln()).collect();
    assert!((off[2] - off[1]).abs() < 1e-3, "{off:?}");
    assert!((cost_function(-1e3, p, alpha, g).unwrap() - c[1]).abs() < 1e-9);
}

#[test]
fn average_divergence_matches_cost_constraint() {
    let spec = ChannelSpec::new(1.5, 1.0, 3.0, 1).unwrap();
    let r = cost_constraint_mc(&spec, 20_000, 42).unwrap();
    assert!(r.relative_error() < 0.02, "{r:?}");
}
