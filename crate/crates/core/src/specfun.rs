//! Special functions: Gamma, digamma, Gauss hypergeometric 2F1, Hurwitz zeta
//! and the isoperimetric constant kappa_alpha.

use std::f64::consts::PI;

use crate::error::{domain, numeric, Result};
use crate::quad;

/// Euler-Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.57721566490153286061;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    s
}

/// Gamma function for positive arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return gamma_unchecked(x + 1.0) / x;
    }
    if x > 171.6 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Digamma function psi(x) = d/dx ln Gamma(x) for positive arguments.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut acc = 0.0;
    let mut z = x;
    while z < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let r = 1.0 / (z * z);
    // Asymptotic expansion with Bernoulli coefficients B_2k / 2k
    let tail = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * 691.0 / 32760.0)))));
    Ok(acc + z.ln() - 0.5 / z - tail)
}

const SERIES_TOL: f64 = 1e-14;
const SERIES_CAP: usize = 1_000_000;

/// Power series of 2F1 for |z| < 1, without any transformation.
pub fn gauss_2f1_direct(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_c(c)?;
    if !(z.abs() < 1.0) {
        return Err(domain(format!("direct 2F1 series needs |z| < 1, got {z}")));
    }
    series_2f1(a, b, c, z)
}

fn check_c(c: f64) -> Result<()> {
    if c <= 0.0 && c == c.round() {
        return Err(domain(format!("2F1 undefined for non-positive integer c = {c}")));
    }
    Ok(())
}

fn series_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    for n in 0..SERIES_CAP {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() < SERIES_TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(numeric(format!(
        "2F1({a}, {b}; {c}; {z}) series did not converge in {SERIES_CAP} terms"
    )))
}

/// Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.
///
/// Negative arguments go through the Pfaff transformation
/// 2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)) so the series argument
/// lands in [0, 1). Arguments very close to 1 switch to Euler's integral.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_c(c)?;
    if z.is_nan() || z >= 1.0 {
        return Err(domain(format!("2F1 implemented for z < 1 only, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z < 0.0 {
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * unit_interval_2f1(a, c - b, c, w)?);
    }
    unit_interval_2f1(a, b, c, z)
}

fn unit_interval_2f1(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    if w <= 0.99 {
        return series_2f1(a, b, c, w);
    }
    // 2F1 is symmetric in (a, b); Euler's integral needs c > b > 0
    if c > b && b > 0.0 {
        return euler_2f1(a, b, c, w);
    }
    if c > a && a > 0.0 {
        return euler_2f1(b, a, c, w);
    }
    series_2f1(a, b, c, w)
}

fn euler_2f1(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let norm = (ln_gamma_unchecked(c) - ln_gamma_unchecked(b) - ln_gamma_unchecked(c - b)).exp();
    let integral = quad::tanh_sinh_unit(
        |t, one_minus_t| {
            t.powf(b - 1.0) * one_minus_t.powf(c - b - 1.0) * (1.0 - w * t).powf(-a)
        },
        1e-13,
    );
    let v = norm * integral;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(numeric(format!("Euler integral for 2F1 at w = {w} is not finite")))
    }
}

/// kappa_alpha = exp((alpha - 1)(psi(alpha) + gamma_e) - 1), the lower bound
/// of the generalized isoperimetric inequality.
pub fn kappa_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain(format!("kappa_alpha needs alpha in (1, 2], got {alpha}")));
    }
    Ok(((alpha - 1.0) * (digamma(alpha)? + EULER_GAMMA) - 1.0).exp())
}

// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta function sum_{k>=0} (q + k)^(-s) for s > 1, q > 0.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0) || !(q > 0.0) {
        return Err(domain(format!("hurwitz_zeta needs s > 1 and q > 0, got ({s}, {q})")));
    }
    Ok(hurwitz_unchecked(s, q))
}

pub(crate) fn hurwitz_unchecked(s: f64, q: f64) -> f64 {
    // Euler-Maclaurin after summing the first n terms directly
    let n = 10usize.max(s.ceil() as usize);
    let mut sum = 0.0;
    for k in 0..n {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + n as f64;
    let a_s = a.powf(-s);
    sum += a * a_s / (s - 1.0) + 0.5 * a_s;
    // term_j = B_2j / (2j)! * s (s+1) ... (s+2j-2) * a^(-s-2j+1)
    let mut poch = s;
    let mut fact = 2.0;
    let mut apow = a_s / a;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * poch * apow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        poch *= (s + k - 1.0) * (s + k);
        fact *= (k + 1.0) * (k + 2.0);
        apow /= a * a;
    }
    sum
}

/// Coefficient c(s) = Gamma(1+s) sin(pi s/2) / pi of the pair
/// F^{-1}[|w|^s](x) = -c(s) |x|^(-1-s), valid for non-even s > 0.
pub fn riesz_coefficient(s: f64) -> f64 {
    let sn = (PI * s / 2.0).sin();
    if sn == 0.0 {
        return 0.0;
    }
    sn.signum() * (ln_gamma_unchecked(1.0 + s) + sn.abs().ln()).exp() / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_anchor_values() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(2.5).unwrap(), 1.5 * 0.5 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(1e-3).unwrap(), 999.4237724845955, max_relative = 1e-12);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.01, 0.3, 1.7, 5.5, 40.0, 120.0] {
            assert_relative_eq!(
                ln_gamma(x).unwrap(),
                gamma_fn(x).unwrap().ln(),
                max_relative = 1e-12,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn digamma_anchor_values() {
        assert_relative_eq!(digamma(1.0).unwrap(), -0.5772156649, max_relative = 1e-9);
        assert_relative_eq!(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, max_relative = 1e-12);
        let exact = 2.0 - EULER_GAMMA - 2.0 * 2f64.ln();
        assert_relative_eq!(digamma(1.5).unwrap(), exact, max_relative = 1e-10);
        assert_relative_eq!(digamma(1.5).unwrap(), 0.0364899740, max_relative = 1e-8);
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn hypergeometric_anchor_values() {
        assert_relative_eq!(gauss_2f1(1.0, 1.0, 2.0, -1.0).unwrap(), 2f64.ln(), max_relative = 1e-12);
        assert_eq!(gauss_2f1(0.8, 0.8, 1.8, 0.0).unwrap(), 1.0);
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(gauss_2f1(1.0, 1.0, -2.0, 0.5).is_err());
    }

    #[test]
    fn hypergeometric_matches_euler_integral_oracle() {
        // 2F1(a,b;c;z) = 1/B(b,c-b) int_0^1 t^(b-1) (1-t)^(c-b-1) (1-zt)^(-a) dt,
        // here with b = 0.8, c - b = 1 so the weight is t^(-0.2); substitute t = u^5.
        let (a, z) = (0.8, -2.0);
        let n = 200_000;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let t = u.powi(5);
            acc += 5.0 * u.powi(3) * (1.0 - z * t).powf(-a);
        }
        let oracle = acc / n as f64 * 0.8; // 1/B(0.8, 1) = 0.8
        assert_relative_eq!(gauss_2f1(0.8, 0.8, 1.8, z).unwrap(), oracle, max_relative = 1e-8);
    }

    #[test]
    fn hypergeometric_paths_agree() {
        for i in 1..20 {
            let z = -(i as f64) / 20.0;
            for &(a, b, c) in &[(0.3, 0.3, 1.3), (0.8, 0.8, 1.8), (1.0, 1.0, 2.0), (0.5, 1.5, 2.5)] {
                let direct = gauss_2f1_direct(a, b, c, z).unwrap();
                let transformed = gauss_2f1(a, b, c, z).unwrap();
                assert_relative_eq!(direct, transformed, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn hypergeometric_far_negative_argument() {
        // ln(1 + t) = t 2F1(1,1;2;-t) stays accurate where the Euler fallback kicks in
        for &t in &[50.0, 1e3, 1e5] {
            let v = t * gauss_2f1(1.0, 1.0, 2.0, -t).unwrap();
            assert_relative_eq!(v, (1.0 + t).ln(), max_relative = 1e-9);
        }
    }

    #[test]
    fn kappa_values() {
        assert_relative_eq!(kappa_alpha(2.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!((kappa_alpha(1.8).unwrap() - 0.7333).abs() < 5e-4);
        assert!(kappa_alpha(1.0).is_err());
        assert!(kappa_alpha(2.1).is_err());
    }

    #[test]
    fn kappa_matches_independent_digamma() {
        // series oracle: psi(x) + gamma_e = sum_{k>=0} (1/(k+1) - 1/(k+x))
        let alpha: f64 = 1.2;
        let mut s = 0.0;
        for k in 0..2_000_000u64 {
            let k = k as f64;
            s += 1.0 / (k + 1.0) - 1.0 / (k + alpha);
        }
        // tail of the series ~ (alpha - 1) / N
        s += (alpha - 1.0) / 2_000_000.0;
        let oracle = ((alpha - 1.0) * s - 1.0).exp();
        assert_relative_eq!(kappa_alpha(alpha).unwrap(), oracle, max_relative = 1e-9);
    }

    #[test]
    fn hurwitz_against_direct_sum() {
        for &(s, q) in &[(1.5, 0.5), (2.2, 1.0), (3.0, 1.4), (13.0, 0.6), (40.0, 0.9)] {
            let mut direct = 0.0;
            for k in 0..2_000_000u64 {
                direct += (q + k as f64).powf(-s);
            }
            // Integral tail beyond the truncated sum
            let m = q + 2_000_000.0;
            direct += m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s);
            assert_relative_eq!(hurwitz_zeta(s, q).unwrap(), direct, max_relative = 1e-11);
        }
        assert_relative_eq!(
            hurwitz_zeta(2.0, 1.0).unwrap(),
            PI * PI / 6.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn riesz_coefficient_cauchy_and_even_powers() {
        // c(1) = Gamma(2) sin(pi/2) / pi = 1/pi
        assert_relative_eq!(riesz_coefficient(1.0), 1.0 / PI, max_relative = 1e-14);
        assert!(riesz_coefficient(2.0).abs() < 1e-14);
    }
}
