use std::f64::consts::PI;

use approx::assert_relative_eq;
use stable_info::density::{convolve, entropy, realize, realize_auto};
use stable_info::stable::{logpdf_sas, pdf_grid_sas, reference_entropy, sample_sas, tail_constant_k1};
use stable_info::{GridConfig, GridSpec, RandomLaw};

fn ln_gamma_oracle(x: f64) -> f64 {
    // Stirling series after shifting the argument up
    let mut x = x;
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= x.ln();
        x += 1.0;
    }
    acc + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

fn std_grid() -> GridSpec {
    GridSpec::symmetric(1 << 16, 400.0).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn gaussian_and_cauchy_limits() {
    let g = std_grid();
    let f = pdf_grid_sas(2.0, 1.0, &g).unwrap();
    for k in (0..g.n).step_by(97) {
        let x = g.x(k);
        let exact = (-x * x / 4.0).exp() / (4.0 * PI).sqrt();
        assert!((f.values()[k] - exact).abs() < 1e-8);
    }
    let c = pdf_grid_sas(1.0, 1.0, &g).unwrap();
    for k in (0..g.n).step_by(89) {
        let x = g.x(k);
        let exact = 1.0 / (PI * (1.0 + x * x));
        assert!((c.values()[k] - exact).abs() < 1e-8, "x = {x}");
    }
}

#[test]
fn density_at_origin() {
    let g = std_grid();
    let f = pdf_grid_sas(1.5, 1.0, &g).unwrap();
    let exact = ln_gamma_oracle(1.0 + 1.0 / 1.5).exp() / PI;
    assert_relative_eq!(f.values()[g.n / 2], exact, max_relative = 1e-8);
}

#[test]
fn logpdf_far_tail_against_inversion_integral() {
    // p(x) = (1/pi) int_0^inf exp(-w^1.5) cos(w x) dw, midpoint rule
    let x = 50.0;
    let dw = 2e-5;
    let mut s = 0.0;
    let mut w: f64 = 0.5 * dw;
    while w < 40.0 {
        s += (-w.powf(1.5)).exp() * (w * x).cos();
        w += dw;
    }
    let oracle = s * dw / PI;
    let got = logpdf_sas(1.5, 1.0, x).exp();
    assert_relative_eq!(got, oracle, max_relative = 1e-2);
}

#[test]
fn logpdf_is_continuous_at_handoff() {
    for &alpha in &[0.7, 1.3, 1.5, 1.8] {
        let r = stable_info::stable::tail_radius_unit(alpha);
        let a = logpdf_sas(alpha, 1.0, r * (1.0 - 1e-9));
        let b = logpdf_sas(alpha, 1.0, r * (1.0 + 1e-9));
        assert!((a - b).abs() < 1e-4, "alpha {alpha}: {a} vs {b}");
    }
}

#[test]
fn tail_constant_matches_far_density() {
    let alpha = 1.5;
    let x: f64 = 1e3;
    let lhs = x.powf(1.0 + alpha) * logpdf_sas(alpha, 1.0, x).exp();
    let rhs = alpha * tail_constant_k1(alpha, 1).unwrap() / 2.0;
    assert_relative_eq!(lhs, rhs, max_relative = 2e-2);
}

#[test]
fn reference_entropy_anchors() {
    assert_relative_eq!(reference_entropy(2.0).unwrap(), 0.5 * (2.0 * PI * std::f64::consts::E).ln(), max_relative = 1e-12);
    assert_relative_eq!(reference_entropy(1.0).unwrap(), (4.0 * PI).ln(), epsilon = 1e-7);
}

#[test]
fn reference_entropy_alpha_1p5_against_direct_quadrature() {
    // Invert the characteristic function pointwise with a midpoint rule,
    // then integrate -p ln p on [0, 60] plus the leading-order tail.
    let alpha = 1.5;
    let gamma = (1.0f64 / alpha).powf(1.0 / alpha);
    let pdf = |x: f64| {
        let dw = 2e-3;
        let mut s = 0.0;
        let mut w = 0.5 * dw;
        while w < 30.0 {
            s += (-(gamma * w).powf(alpha)).exp() * (w * x).cos();
            w += dw;
        }
        s * dw / PI
    };
    let dx = 0.01;
    let mut h = 0.0;
    let mut x = 0.5 * dx;
    while x < 60.0 {
        let p = pdf(x);
        h -= p * p.ln() * dx;
        x += dx;
    }
    let c = alpha * gamma.powf(alpha) * tail_constant_k1(alpha, 1).unwrap() / 2.0;
    // -int_60^inf c u^-(1+a) ln(c u^-(1+a)) du
    let d: f64 = 60.0;
    let m = c * d.powf(-alpha) / alpha;
    h += -(c.ln() * m) + (1.0 + alpha) * c * (d.powf(-alpha) * d.ln() / alpha + d.powf(-alpha) / (alpha * alpha));
    let oracle = 2.0 * h;
    assert_relative_eq!(reference_entropy(alpha).unwrap(), oracle, epsilon = 2e-4);
}

#[test]
fn scaling_of_density() {
    let g = std_grid();
    let base = pdf_grid_sas(1.3, 1.0, &g).unwrap();
    for &c in &[0.5, 2.0, 5.0] {
        let scaled = pdf_grid_sas(1.3, c, &GridSpec::new(g.n, c * g.h).unwrap()).unwrap();
        let diff = sup_diff(
            &scaled.values().iter().map(|v| v * c).collect::<Vec<_>>(),
            base.values(),
        );
        assert!(diff < 1e-7, "c = {c}: {diff}");
    }
}

#[test]
fn shift_moves_the_density() {
    let g = std_grid();
    let k = 160;
    let delta = k as f64 * g.h;
    for &alpha in &[1.0, 1.5] {
        let base = realize(&RandomLaw::sas(alpha, 1.0), &g).unwrap();
        let moved = realize(&RandomLaw::sas(alpha, 1.0).shifted(delta), &g).unwrap();
        let c = g.n / 2;
        for j in c - 2000..c + 2000 {
            assert!((moved.values()[j + k] - base.values()[j]).abs() < 1e-9, "alpha {alpha} at {j}");
        }
        for &x in &[-3.0, 0.0, 1.0, 7.5] {
            let exact = logpdf_sas(alpha, 1.0, x).exp();
            assert!((moved.value_at(x + delta) - exact).abs() < 1e-6 * exact.max(1e-3), "alpha {alpha} at {x}");
        }
    }
}

#[test]
fn symmetric_and_monotone() {
    let g = std_grid();
    for &alpha in &[0.8, 1.2, 1.7] {
        let f = pdf_grid_sas(alpha, 1.0, &g).unwrap();
        let v = f.values();
        let c = g.n / 2;
        for j in 1..c {
            assert_eq!(v[c - j], v[c + j]);
            assert!(v[c + j] <= v[c + j - 1] * (1.0 + 1e-12), "alpha {alpha} at {j}");
        }
    }
}

#[test]
fn stable_convolution() {
    let cfg = GridConfig::default();
    let law = RandomLaw::sas(1.5, 1.0).plus(RandomLaw::sas(1.5, 1.0));
    let grid = GridSpec::for_law(&law, &cfg).unwrap();
    let sum = realize(&law, &grid).unwrap();
    let exact = pdf_grid_sas(1.5, 2f64.powf(1.0 / 1.5), &grid).unwrap();
    assert!(sup_diff(sum.values(), exact.values()) < 1e-5);
}

#[test]
fn gaussian_and_cauchy_sums() {
    let cfg = GridConfig::default();
    let law = RandomLaw::cauchy(1.0).plus(RandomLaw::cauchy(2.0));
    let grid = GridSpec::for_law(&law, &cfg).unwrap();
    let sum = realize(&law, &grid).unwrap();
    let exact = realize(&RandomLaw::cauchy(3.0), &grid).unwrap();
    assert!(sup_diff(sum.values(), exact.values()) < 1e-5);

    let law = RandomLaw::gaussian(1.0).plus(RandomLaw::gaussian(1.0));
    let grid = GridSpec::for_law(&law, &cfg).unwrap();
    let sum = realize(&law, &grid).unwrap();
    let exact = realize(&RandomLaw::gaussian(2f64.sqrt()), &grid).unwrap();
    assert!(sup_diff(sum.values(), exact.values()) < 1e-6);

    let law = RandomLaw::gaussian(1.0).plus(RandomLaw::gaussian(2.0));
    let grid = GridSpec::for_law(&law, &cfg).unwrap();
    let sum = realize(&law, &grid).unwrap();
    let exact = realize(&RandomLaw::gaussian(5f64.sqrt()), &grid).unwrap();
    assert!(sup_diff(sum.values(), exact.values()) < 1e-6);
}

#[test]
fn spike_is_convolution_identity() {
    let cfg = GridConfig::default();
    let g = RandomLaw::gaussian(1.0);
    let grid = GridSpec::for_law(&g, &cfg).unwrap();
    let fg = realize(&g, &grid).unwrap();
    let spike = realize(&RandomLaw::gaussian(1e-3), &GridSpec::new(grid.n, grid.h).unwrap());
    // a spike narrower than the grid spacing cannot be resolved; use the finest resolvable one
    assert!(spike.is_err());
    let spike = realize(&RandomLaw::gaussian(2.0 * grid.h), &grid).unwrap();
    let out = convolve(&spike, &fg).unwrap();
    assert!(sup_diff(out.values(), fg.values()) < 1e-4);
}

#[test]
fn entropy_closed_forms() {
    let cfg = GridConfig::default();
    let e = entropy(&realize_auto(&RandomLaw::uniform(0.5), &cfg).unwrap());
    assert!(e.abs() < 1e-10);
    let e = entropy(&realize_auto(&RandomLaw::cauchy(1.7), &cfg).unwrap());
    assert_relative_eq!(e, (4.0 * PI * 1.7).ln(), epsilon = 1e-5);
}

#[test]
fn sampler_moments() {
    let s = sample_sas(2.0, 1.0, 1_000_000, 3).unwrap();
    let var = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
    assert_relative_eq!(var, 2.0, max_relative = 1e-2);

    let mut c = sample_sas(1.0, 1.0, 1_000_000, 4).unwrap();
    c.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| c[(p * (c.len() - 1) as f64) as usize];
    assert!(q(0.5).abs() < 0.01);
    assert_relative_eq!(q(0.75) - q(0.25), 2.0, max_relative = 2e-2);
}

#[test]
fn sampler_ks_distance() {
    let g = std_grid();
    let f = pdf_grid_sas(1.5, 1.0, &g).unwrap();
    let mut s = sample_sas(1.5, 1.0, 100_000, 11).unwrap();
    s.sort_by(|a, b| a.total_cmp(b));
    // cumulative trapezoid CDF starting from the left tail mass
    let mut cdf = Vec::with_capacity(g.n);
    let left_tail = 0.5 * f.tail_mass();
    let mut acc = left_tail;
    for k in 0..g.n {
        let prev = if k == 0 { 0.0 } else { f.values()[k - 1] };
        acc += 0.5 * (prev + f.values()[k]) * g.h;
        cdf.push(acc);
    }
    let mut ks: f64 = 0.0;
    for (i, x) in s.iter().enumerate() {
        let t = (x - g.x0()) / g.h;
        let model = if t < 0.0 {
            left_tail
        } else if t >= (g.n - 1) as f64 {
            1.0 - left_tail
        } else {
            let k = t.floor() as usize;
            cdf[k] + (t - k as f64) * (cdf[k + 1] - cdf[k])
        };
        let emp = (i + 1) as f64 / s.len() as f64;
        ks = ks.max((emp - model).abs());
    }
    assert!(ks < 0.01, "KS distance {ks}");
}

#[test]
fn kde_entropy_of_gaussian_samples() {
    let samples = RandomLaw::gaussian(1.0).sample(1_000_000, 5).unwrap();
    let h = entropy(&realize_auto(&RandomLaw::empirical(samples), &GridConfig::default()).unwrap());
    let exact = 0.5 * (2.0 * PI * std::f64::consts::E).ln();
    assert!((h - exact).abs() < 0.01, "{h} vs {exact}");
}
