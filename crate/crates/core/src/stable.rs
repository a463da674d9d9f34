//! Symmetric alpha-stable engine: characteristic function, gridded density by
//! FFT inversion with analytic tail stitching, log-density queries, sampling
//! and the reference variable used to define the alpha-power.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::fourier;
use crate::grid::{CfTerm, GridSpec, GriddedDensity, PowerTail, TailLaw};
use crate::specfun::{gamma_unchecked, ln_gamma_unchecked};

/// Parameters (alpha, beta, gamma, delta) of a univariate stable law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(-1.0..=1.0).contains(&beta) {
            return Err(domain(format!("beta must lie in [-1, 1], got {beta}")));
        }
        check_gamma(gamma)?;
        if !delta.is_finite() {
            return Err(domain("delta must be finite"));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// Symmetric, centered law S(alpha, gamma).
    pub fn symmetric(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, 0.0, gamma, 0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.beta == 0.0
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha must lie in (0, 2], got {alpha}")))
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("scale must be positive and finite, got {gamma}")))
    }
}

/// Characteristic function exp(i delta w - gamma^alpha |w|^alpha).
pub fn cf_sas(params: &StableParams, omega: f64) -> Result<Complex64> {
    if !params.is_symmetric() {
        return Err(domain("cf_sas is defined for beta = 0 only"));
    }
    let m = (-(params.gamma * omega.abs()).powf(params.alpha)).exp();
    Ok(Complex64::from_polar(m, params.delta * omega))
}

/// Tail constant k1 of the isotropic stable law in dimension d.
pub fn tail_constant_k1(alpha: f64, d: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain(format!("k1 needs alpha in (0, 2), got {alpha}")));
    }
    if d == 0 {
        return Err(domain("dimension must be at least 1"));
    }
    let half = PI * alpha / 2.0;
    let d = d as f64;
    Ok(2f64.powf(alpha) * (half.sin() / half) * gamma_unchecked((2.0 + alpha) / 2.0)
        * gamma_unchecked((d + alpha) / 2.0)
        / gamma_unchecked(d / 2.0))
}

/// Scale of the reference variable, (1/alpha)^(1/alpha).
pub fn reference_gamma(alpha: f64) -> f64 {
    (1.0 / alpha).powf(1.0 / alpha)
}

/// Coefficients of the unit-scale tail series p(u) = sum_j a_j u^(-1 - j alpha).
fn series_coefficients(alpha: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| {
            let jf = j as f64;
            let s = (jf * PI * alpha / 2.0).sin();
            if s.abs() < 1e-13 {
                return 0.0;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * s.signum()
                * (ln_gamma_unchecked(jf * alpha + 1.0) - ln_gamma_unchecked(jf + 1.0) + s.abs().ln())
                    .exp()
                / PI
        })
        .collect()
}

#[derive(Debug, Clone)]
struct SeriesPlan {
    radius: f64,
    coeffs: Vec<f64>,
}

const RADIUS_CANDIDATES: [f64; 18] = [
    1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0, 192.0, 256.0,
    384.0, 512.0,
];

/// Picks the smallest handoff radius where the truncated series is accurate
/// to about 1e-12 relative, and the number of terms to keep.
fn plan_series(alpha: f64) -> SeriesPlan {
    let kmax = if alpha <= 1.0 { 400 } else { 160 };
    let a = series_coefficients(alpha, kmax);
    let mut fallback = None;
    for &r in RADIUS_CANDIDATES.iter() {
        if alpha == 1.0 && r <= 1.0 {
            continue;
        }
        let v = r.powf(-alpha);
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut vj = 1.0;
        let mut keep = 0;
        let mut err = f64::INFINITY;
        let mut prev = f64::INFINITY;
        let mut quiet = 0;
        for (j, aj) in a.iter().enumerate() {
            vj *= v;
            let t = aj * vj;
            if alpha > 1.0 && *aj != 0.0 && t.abs() >= prev {
                // asymptotic series started to diverge: stop before this term
                err = t.abs();
                break;
            }
            if *aj != 0.0 {
                prev = t.abs();
            }
            sum += t;
            abs_sum += t.abs();
            keep = j + 1;
            if t.abs() < 1e-17 * abs_sum {
                quiet += 1;
                if quiet >= 4 {
                    err = 0.0;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        let rel_err = err / sum.abs();
        let cancellation = abs_sum / sum.abs();
        let plan = SeriesPlan { radius: r, coeffs: a[..keep].to_vec() };
        if sum > 0.0 && rel_err <= 1e-12 && cancellation <= 1e3 {
            return plan;
        }
        fallback = Some(plan);
    }
    log::warn!("stable tail series for alpha = {alpha} is not accurate to 1e-12 at any radius");
    fallback.expect("radius candidates are non-empty")
}

fn series_plan(alpha: f64) -> Arc<SeriesPlan> {
    static PLANS: OnceLock<Mutex<HashMap<u64, Arc<SeriesPlan>>>> = OnceLock::new();
    let map = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = map.lock().expect("plan cache poisoned").get(&alpha.to_bits()) {
        return p.clone();
    }
    let p = Arc::new(plan_series(alpha));
    map.lock().expect("plan cache poisoned").insert(alpha.to_bits(), p.clone());
    p
}

/// Handoff radius (in units of gamma) beyond which the tail series is used.
pub fn tail_radius_unit(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        return f64::INFINITY;
    }
    series_plan(alpha).radius
}

/// Power tail of S(alpha, gamma) centered at delta, as characteristic-function terms.
pub(crate) fn stable_tail(alpha: f64, gamma: f64, delta: f64) -> PowerTail {
    let plan = series_plan(alpha);
    let mut terms = Vec::with_capacity(plan.coeffs.len());
    let mut w = 1.0;
    for j in 1..=plan.coeffs.len() {
        // exp(-g^a |w|^a) = sum_j (-g^a)^j / j! |w|^(j a)
        w *= -gamma.powf(alpha) / j as f64;
        terms.push(CfTerm { weight: w, power: j as f64 * alpha });
    }
    PowerTail::new(delta, plan.radius * gamma, terms)
}

/// Coarseness check: the characteristic function must be negligible at the Nyquist frequency.
fn check_resolution(alpha: f64, gamma: f64, h: f64) -> Result<()> {
    let decay = (gamma * PI / h).powf(alpha);
    if decay < 30.0 {
        return Err(config(format!(
            "grid spacing {h} too coarse for S({alpha}, {gamma}): need (gamma*pi/h)^alpha >= 30, got {decay:.3}; \
             use at least {:.3e} spacing or more points",
            gamma * PI / 30f64.powf(1.0 / alpha)
        )));
    }
    Ok(())
}

/// Density of S(alpha, gamma) on a symmetric grid.
pub fn pdf_grid_sas(alpha: f64, gamma: f64, grid: &GridSpec) -> Result<GriddedDensity> {
    pdf_grid_stable(alpha, gamma, 0.0, grid)
}

/// Density of S(alpha, gamma) shifted by delta.
pub(crate) fn pdf_grid_stable(alpha: f64, gamma: f64, delta: f64, grid: &GridSpec) -> Result<GriddedDensity> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let (n, h) = (grid.n, grid.h);
    let x0 = grid.x0();
    let half = grid.half_width();
    check_resolution(alpha, gamma, h)?;

    if alpha == 2.0 {
        let s2 = 2.0 * gamma * gamma;
        if half - delta.abs() < 12.0 * s2.sqrt() {
            return Err(config("grid does not cover the Gaussian body (need 12 standard deviations)"));
        }
        let norm = 1.0 / (2.0 * PI * s2).sqrt();
        let values = (0..n).map(|k| norm * (-(grid.x(k) - delta).powi(2) / (2.0 * s2)).exp()).collect();
        return GriddedDensity::new(x0, h, values, TailLaw::Light);
    }

    let tail = stable_tail(alpha, gamma, delta);
    if half - delta.abs() < tail.radius {
        return Err(config(format!(
            "grid half-width {half} is below the tail-series radius {} for S({alpha}, {gamma})",
            tail.radius
        )));
    }
    let period = grid.period();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let w = fourier::omega(j, n, h);
            let m = (-(gamma * w.abs()).powf(alpha)).exp() / period;
            Complex64::from_polar(m, w * (x0 - delta))
        })
        .collect();
    fourier::inverse(&mut buf);
    let mut values: Vec<f64> = buf.iter().map(|c| c.re).collect();

    let raw = GriddedDensity::from_parts(x0, h, vec![0.0; n], TailLaw::Power(tail.clone()));
    let images = raw.periodic_images();
    let tl = TailLaw::Power(tail.clone());
    for (k, v) in values.iter_mut().enumerate() {
        let x = grid.x(k);
        if (x - delta).abs() > tail.radius {
            *v = tl.density(x);
        } else {
            *v -= images[k];
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    if delta == 0.0 {
        let c = n / 2;
        for j in 1..c {
            let m = 0.5 * (values[c - j] + values[c + j]);
            values[c - j] = m;
            values[c + j] = m;
        }
    }
    GriddedDensity::new(x0, h, values, tl)
}

/// Cached unit-scale density used for point log-density queries.
struct UnitStable {
    h: f64,
    ln_p: Vec<f64>,
    radius: f64,
    alpha: f64,
    coeffs: Vec<f64>,
    entropy: f64,
}

impl UnitStable {
    fn build(alpha: f64) -> Result<Self> {
        let plan = series_plan(alpha);
        let h = (PI / 36f64.powf(1.0 / alpha)).min(0.02);
        let half = (4.0 * plan.radius).max(40.0);
        let n = ((2.0 * half / h).ceil() as usize).next_power_of_two();
        let grid = GridSpec::new(n, h)?;
        let dens = pdf_grid_stable(alpha, 1.0, 0.0, &grid)?;
        let entropy = crate::density::entropy(&dens);
        let c = n / 2;
        let m = (plan.radius / h).ceil() as usize + 3;
        let ln_p = (0..=m).map(|k| dens.values()[c + k].max(crate::grid::DENSITY_FLOOR).ln()).collect();
        Ok(Self { h, ln_p, radius: plan.radius, alpha, coeffs: plan.coeffs.clone(), entropy })
    }

    fn series(&self, u: f64) -> f64 {
        let v = u.powf(-self.alpha);
        let mut acc = 0.0;
        for a in self.coeffs.iter().rev() {
            acc = acc * v + a;
        }
        acc * v / u
    }

    fn ln_pdf(&self, u: f64) -> f64 {
        let u = u.abs();
        if u > self.radius {
            return self.series(u).ln();
        }
        let t = u / self.h;
        let k = t.floor() as usize;
        let f = t - k as f64;
        let at = |i: isize| -> f64 { self.ln_p[i.unsigned_abs()] };
        let k = k as isize;
        let (a, b, c, d) = (at(k - 1), at(k), at(k + 1), at(k + 2));
        let wa = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let wb = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let wc = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let wd = (f + 1.0) * f * (f - 1.0) / 6.0;
        a * wa + b * wb + c * wc + d * wd
    }
}

type UnitCell = Arc<OnceLock<std::result::Result<Arc<UnitStable>, Error>>>;

fn unit_stable(alpha: f64) -> Result<Arc<UnitStable>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, UnitCell>>> = OnceLock::new();
    let cell = {
        let mut map = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().expect("cache poisoned");
        map.entry(alpha.to_bits()).or_default().clone()
    };
    cell.get_or_init(|| UnitStable::build(alpha).map(Arc::new)).clone()
}

/// ln p(x) of S(alpha, gamma). Returns NaN for invalid parameters.
pub fn logpdf_sas(alpha: f64, gamma: f64, x: f64) -> f64 {
    if check_alpha(alpha).is_err() || check_gamma(gamma).is_err() || x.is_nan() {
        return f64::NAN;
    }
    if alpha == 2.0 {
        let s2 = 2.0 * gamma * gamma;
        return -0.5 * (2.0 * PI * s2).ln() - x * x / (2.0 * s2);
    }
    match unit_stable(alpha) {
        Ok(u) => u.ln_pdf(x / gamma) - gamma.ln(),
        Err(_) => f64::NAN,
    }
}

/// ln p of S(alpha, gamma) as a reusable closure (avoids the cache lookup per call).
pub(crate) fn logpdf_fn(alpha: f64, gamma: f64) -> Result<impl Fn(f64) -> f64 + Send + Sync> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let unit = if alpha == 2.0 { None } else { Some(unit_stable(alpha)?) };
    let lg = gamma.ln();
    let s2 = 2.0 * gamma * gamma;
    let gauss0 = -0.5 * (2.0 * PI * s2).ln();
    Ok(move |x: f64| match &unit {
        Some(u) => u.ln_pdf(x / gamma) - lg,
        None => gauss0 - x * x / (2.0 * s2),
    })
}

/// Entropy of S(alpha, 1) in nats.
pub fn unit_entropy(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 2.0 {
        return Ok(0.5 * (4.0 * PI * std::f64::consts::E).ln());
    }
    Ok(unit_stable(alpha)?.entropy)
}

/// h(Z~_alpha) for the reference variable S(alpha, (1/alpha)^(1/alpha)).
pub fn reference_entropy(alpha: f64) -> Result<f64> {
    Ok(unit_entropy(alpha)? + reference_gamma(alpha).ln())
}

/// The reference variable Z~_alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStable {
    pub alpha: f64,
    pub gamma_ref: f64,
}

impl ReferenceStable {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, gamma_ref: reference_gamma(alpha) })
    }

    /// Differential entropy, computed once per alpha and cached.
    pub fn entropy(&self) -> Result<f64> {
        reference_entropy(self.alpha)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        logpdf_sas(self.alpha, self.gamma_ref, x)
    }
}

/// One Chambers-Mallows-Stuck draw from S(alpha, gamma).
pub fn draw_sas<R: Rng + ?Sized>(rng: &mut R, alpha: f64, gamma: f64) -> f64 {
    let mut u: f64 = rng.random();
    while u == 0.0 {
        u = rng.random();
    }
    let v = PI * (u - 0.5);
    if alpha == 1.0 {
        return gamma * v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let x = (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    gamma * x
}

/// n i.i.d. draws from S(alpha, gamma), deterministic in `seed`.
pub fn sample_sas(alpha: f64, gamma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw_sas(&mut rng, alpha, gamma)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn characteristic_function_values() {
        let p = StableParams::symmetric(2.0, 1.0).unwrap();
        assert_relative_eq!(cf_sas(&p, 1.0).unwrap().re, (-1f64).exp(), max_relative = 1e-15);
        let p = StableParams::symmetric(1.0, 2.0).unwrap();
        assert_relative_eq!(cf_sas(&p, -3.0).unwrap().re, (-6f64).exp(), max_relative = 1e-15);
        assert_eq!(cf_sas(&p, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let skew = StableParams::new(1.5, 0.5, 1.0, 0.0).unwrap();
        assert!(cf_sas(&skew, 1.0).is_err());
    }

    #[test]
    fn k1_cauchy_and_small_alpha() {
        assert_relative_eq!(tail_constant_k1(1.0, 1).unwrap(), 2.0 / PI, max_relative = 1e-14);
        assert!(tail_constant_k1(0.1, 1).unwrap().is_finite());
        assert!(tail_constant_k1(2.0, 1).is_err());
    }

    #[test]
    fn leading_series_coefficient_matches_k1() {
        for &alpha in &[0.5, 1.0, 1.5, 1.9] {
            let a1 = series_coefficients(alpha, 1)[0];
            let k1 = tail_constant_k1(alpha, 1).unwrap();
            assert_relative_eq!(a1, alpha * k1 / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn series_plans_exist_over_range() {
        for i in 0..32 {
            let alpha = 0.4 + 0.05 * i as f64;
            let r = tail_radius_unit(alpha);
            assert!(r.is_finite() && r <= 200.0, "alpha {alpha}: radius {r}");
        }
    }

    #[test]
    fn logpdf_closed_forms() {
        assert_relative_eq!(logpdf_sas(1.0, 1.0, 0.0), (1.0 / PI).ln(), max_relative = 1e-9);
        assert_relative_eq!(
            logpdf_sas(2.0, 1.0, 2.0),
            -0.5 * (4.0 * PI).ln() - 1.0,
            max_relative = 1e-14
        );
        for &x in &[0.3, 1.7, 5.0, 40.0, 1e4] {
            let exact = -(PI * (1.0 + x * x)).ln();
            assert_relative_eq!(logpdf_sas(1.0, 1.0, x), exact, max_relative = 1e-8);
        }
        assert!(logpdf_sas(2.5, 1.0, 0.0).is_nan());
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_sas(1.3, 2.0, 100, 7).unwrap();
        let b = sample_sas(1.3, 2.0, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(sample_sas(1.3, 2.0, 0, 7).is_err());
    }
}
