//! Quadrature rules: Gauss-Legendre, adaptive Gauss-Kronrod, tanh-sinh and a
//! log-spaced rule for semi-infinite power-law tails.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 20-point rule.
pub fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

// Kronrod tables kept at their published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// Returns the integral and the summed error estimate.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let mut segments = vec![(a, b, gk15(&mut f, a, b))];
    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2 .0).sum();
        let err: f64 = segments.iter().map(|s| s.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return (total, err);
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty segment list");
        let (lo, hi, _) = segments.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        segments.push((lo, mid, gk15(&mut f, lo, mid)));
        segments.push((mid, hi, gk15(&mut f, mid, hi)));
    }
    let total = segments.iter().map(|s| s.2 .0).sum();
    let err = segments.iter().map(|s| s.2 .1).sum();
    (total, err)
}

/// Tanh-sinh quadrature on [0, 1]. The integrand receives both `t` and `1 - t`
/// so endpoint singularities at 1 can be evaluated without cancellation.
pub fn tanh_sinh_unit<F: FnMut(f64, f64) -> f64>(mut f: F, tol: f64) -> f64 {
    let eval = |f: &mut F, t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // x = 1 / (1 + e^{-2u}), 1 - x = 1 / (1 + e^{2u})
        let (x, xc) = if u >= 0.0 {
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        // dx/dt = (pi/4) cosh(t) sech^2(u)
        let w = 0.25 * PI * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if w == 0.0 || x <= 0.0 || xc <= 0.0 {
            return 0.0;
        }
        let v = f(x, xc) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 4.0;
    let mut h = 0.5;
    let mut sum = eval(&mut f, 0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval(&mut f, t) + eval(&mut f, -t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1;
        let mut add = 0.0;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            add += eval(&mut f, t) + eval(&mut f, -t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        let done = (next - estimate).abs() <= tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Integral of `f` over [d, inf) for integrands with algebraic or faster decay.
///
/// Substitutes u = d e^s and applies 20-point Gauss-Legendre panels of width
/// 1/2 in s until four consecutive panels are negligible.
pub fn tail_integral<F: FnMut(f64) -> f64>(mut f: F, d: f64) -> f64 {
    assert!(d > 0.0, "tail integral needs a positive start");
    let rule = gl20();
    let width = 0.5;
    let mut total = 0.0;
    let mut quiet = 0;
    let mut s0 = 0.0;
    while s0 < 700.0 {
        let panel = rule.integrate(
            |s| {
                let u = d * s.exp();
                let v = f(u) * u;
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            s0,
            s0 + width,
        );
        total += panel;
        if panel.abs() <= 1e-17 * total.abs() || panel == 0.0 {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        s0 += width;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = GaussLegendre::new(10);
        let v = rule.integrate(|x| x.powi(18) + 3.0 * x.powi(4), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 19.0 + 6.0 / 5.0, max_relative = 1e-13);
        let s: f64 = rule.weights().iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let (v, _) = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert_relative_eq!(v, exact, max_relative = 1e-10);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // int_0^1 t^(-1/2) (1-t)^(-1/2) dt = pi
        let v = tanh_sinh_unit(|t, tc| t.powf(-0.5) * tc.powf(-0.5), 1e-14);
        assert_relative_eq!(v, PI, max_relative = 1e-12);
    }

    #[test]
    fn tail_of_power_law() {
        // int_10^inf x^(-2.2) ln x dx = 10^(-1.2) (ln 10 / 1.2 + 1 / 1.44)
        let v = tail_integral(|x| x.powf(-2.2) * x.ln(), 10.0);
        let exact = 10f64.powf(-1.2) * (10f64.ln() / 1.2 + 1.0 / 1.44);
        assert_relative_eq!(v, exact, max_relative = 1e-12);
        let slow = tail_integral(|x| x.powf(-1.2), 1.0);
        assert_relative_eq!(slow, 5.0, max_relative = 1e-10);
    }
}
