//! The alpha-power P_alpha(X): the scale P at which X/P has the cross-entropy
//! of the reference stable variable against itself.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{realize_auto, RandomLaw};
use crate::error::{domain, numeric, Result};
use crate::grid::{GridConfig, GriddedDensity};
use crate::root::{brent, expand_bracket_positive};
use crate::stable::{check_alpha, logpdf_fn, reference_entropy, reference_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMethod {
    ClosedFormAlpha2,
    ClosedFormStable,
    NumericRoot,
    /// The law is the point mass at zero.
    Degenerate,
}

impl fmt::Display for PowerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PowerMethod::ClosedFormAlpha2 => "closed_form_alpha2",
            PowerMethod::ClosedFormStable => "closed_form_stable",
            PowerMethod::NumericRoot => "numeric_root",
            PowerMethod::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPowerResult {
    /// P_alpha(X); +inf when alpha = 2 and E X^2 is infinite.
    pub value: f64,
    pub alpha: f64,
    pub method: PowerMethod,
    /// |g(P) - h(Z~)| at the returned value.
    pub residual: f64,
    pub bracket: (f64, f64),
    /// Standard error of the value when g is a sample average.
    pub std_error: Option<f64>,
}

impl AlphaPowerResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub grid: GridConfig,
    /// Relative tolerance on P.
    pub rel_tol: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { grid: GridConfig::default(), rel_tol: 1e-7 }
    }
}

/// g(P) = -E ln p_Z~(X / P) evaluated against a fixed law.
pub struct CrossEntropy {
    alpha: f64,
    source: Source,
    ln_ref: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

enum Source {
    Grid(GriddedDensity),
    Samples(Vec<f64>),
    SecondMoment(f64),
}

const CHUNK: usize = 4096;

impl CrossEntropy {
    pub fn new(law: &RandomLaw, alpha: f64, grid: &GridConfig) -> Result<Self> {
        check_alpha(alpha)?;
        law.validate()?;
        let source = if alpha == 2.0 {
            Source::SecondMoment(second_moment(law)?)
        } else if let RandomLaw::Empirical(s) = law {
            Source::Samples(s.to_vec())
        } else {
            Source::Grid(realize_auto(law, grid)?)
        };
        Self::with_source(alpha, source)
    }

    /// Uses an already realized density.
    pub fn from_density(f: GriddedDensity, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::with_source(alpha, Source::Grid(f))
    }

    fn with_source(alpha: f64, source: Source) -> Result<Self> {
        let ln_ref = Box::new(logpdf_fn(alpha, reference_gamma(alpha))?);
        Ok(Self { alpha, source, ln_ref })
    }

    pub fn eval(&self, p: f64) -> f64 {
        let lr = &self.ln_ref;
        match &self.source {
            // -ln N(0,1)(x/P) averaged: ln(2 pi)/2 + E X^2 / (2 P^2)
            Source::SecondMoment(m2) => 0.5 * (2.0 * PI).ln() + m2 / (2.0 * p * p),
            Source::Samples(s) => {
                let parts: Vec<f64> =
                    s.par_chunks(CHUNK).map(|c| c.iter().map(|&x| -lr(x / p)).sum::<f64>()).collect();
                parts.iter().sum::<f64>() / s.len() as f64
            }
            Source::Grid(f) => {
                let x0 = f.x0();
                let h = f.h();
                let parts: Vec<f64> = f
                    .values()
                    .par_chunks(CHUNK)
                    .enumerate()
                    .map(|(ci, c)| {
                        let base = ci * CHUNK;
                        c.iter()
                            .enumerate()
                            .filter(|(_, v)| **v > 0.0)
                            .map(|(i, v)| -v * lr((x0 + (base + i) as f64 * h) / p))
                            .sum::<f64>()
                    })
                    .collect();
                let body = parts.iter().sum::<f64>() * h;
                let (dl, dr) = f.tail_distances();
                let c = f.tail().center();
                let tails = if dl > 0.0 && dr > 0.0 {
                    f.tail().integrate_beyond(dl, |u| -lr((c - u) / p))
                        + f.tail().integrate_beyond(dr, |u| -lr((c + u) / p))
                } else {
                    0.0
                };
                body + tails
            }
        }
    }

    /// Standard error of the sample-average g(P), if g is a sample average.
    fn std_error(&self, p: f64) -> Option<f64> {
        let Source::Samples(s) = &self.source else { return None };
        let n = s.len() as f64;
        if s.len() < 2 {
            return None;
        }
        let vals: Vec<f64> = s.iter().map(|&x| -(self.ln_ref)(x / p)).collect();
        let m = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        Some((var / n).sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// g(P) for a law (Appendix-style definition, no Jacobian).
pub fn g_of_p(law: &RandomLaw, alpha: f64, p: f64, grid: &GridConfig) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("P must be positive and finite, got {p}")));
    }
    if alpha == 2.0 && second_moment(law)?.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(CrossEntropy::new(law, alpha, grid)?.eval(p))
}

fn second_moment(law: &RandomLaw) -> Result<f64> {
    if let RandomLaw::Empirical(s) = law {
        if hill_tail_index(s).is_some_and(|a| a < 2.0) {
            return Ok(f64::INFINITY);
        }
    }
    Ok(law.second_moment())
}

/// Hill estimate of the tail index from the largest sqrt(n) absolute values.
pub fn hill_tail_index(samples: &[f64]) -> Option<f64> {
    if samples.len() < 100 {
        return None;
    }
    let mut a: Vec<f64> = samples.iter().map(|x| x.abs()).filter(|x| *x > 0.0).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let k = (a.len() as f64).sqrt() as usize;
    if k < 2 || k >= a.len() {
        return None;
    }
    let base = a[k].ln();
    let xi = a[..k].iter().map(|x| x.ln() - base).sum::<f64>() / k as f64;
    (xi > 0.0).then(|| 1.0 / xi)
}

/// Scale of a law that is exactly S(alpha, gamma) centered at zero.
pub(crate) fn as_centered_sas(law: &RandomLaw) -> Option<(f64, f64)> {
    match law {
        RandomLaw::SaS { alpha, gamma } => Some((*alpha, *gamma)),
        RandomLaw::Cauchy { gamma } => Some((1.0, *gamma)),
        RandomLaw::Gaussian { sigma } => Some((2.0, sigma / 2f64.sqrt())),
        RandomLaw::Scaled(l, c) => as_centered_sas(l).map(|(a, g)| (a, g * c.abs())),
        RandomLaw::Sum(x, y) => {
            let (ax, gx) = as_centered_sas(x)?;
            let (ay, gy) = as_centered_sas(y)?;
            (ax == ay).then(|| (ax, (gx.powf(ax) + gy.powf(ax)).powf(1.0 / ax)))
        }
        _ => None,
    }
}

/// P_alpha(X) with closed-form fast paths.
pub fn alpha_power(law: &RandomLaw, alpha: f64, opts: &PowerOptions) -> Result<AlphaPowerResult> {
    check_alpha(alpha)?;
    law.validate()?;
    if law.is_point_mass_at_zero() {
        return Ok(AlphaPowerResult {
            value: 0.0,
            alpha,
            method: PowerMethod::Degenerate,
            residual: 0.0,
            bracket: (0.0, 0.0),
            std_error: None,
        });
    }
    if alpha == 2.0 {
        let m2 = second_moment(law)?;
        return Ok(AlphaPowerResult {
            value: m2.sqrt(),
            alpha,
            method: PowerMethod::ClosedFormAlpha2,
            residual: 0.0,
            bracket: (0.0, f64::INFINITY),
            std_error: None,
        });
    }
    if let Some((a, g)) = as_centered_sas(law) {
        if a == alpha {
            let v = alpha.powf(1.0 / alpha) * g;
            return Ok(AlphaPowerResult {
                value: v,
                alpha,
                method: PowerMethod::ClosedFormStable,
                residual: 0.0,
                bracket: (v, v),
                std_error: None,
            });
        }
    }
    alpha_power_numeric(law, alpha, opts)
}

/// P_alpha(X) by root finding only, bypassing every closed form.
pub fn alpha_power_numeric(law: &RandomLaw, alpha: f64, opts: &PowerOptions) -> Result<AlphaPowerResult> {
    check_alpha(alpha)?;
    if law.is_degenerate() {
        return Err(domain("the numeric alpha-power needs a non-degenerate law"));
    }
    let g = CrossEntropy::new(law, alpha, &opts.grid)?;
    solve(&g, law.scale(), opts.rel_tol)
}

/// Solves g(P) = h(Z~) for a prepared cross-entropy functional.
pub fn solve(g: &CrossEntropy, scale: f64, rel_tol: f64) -> Result<AlphaPowerResult> {
    let alpha = g.alpha();
    let target = reference_entropy(alpha)?;
    let f = |p: f64| g.eval(p) - target;
    let (lo, hi) = expand_bracket_positive(f, scale / 50.0, scale * 50.0, 60)?;
    let root = brent(f, lo, hi, 0.0, rel_tol, 200)?;
    if !root.fx.is_finite() {
        return Err(numeric("alpha-power root has a non-finite residual"));
    }
    let std_error = g.std_error(root.x).map(|se| {
        // delta method: dP = se / |g'(P)|
        let dp = 1e-4 * root.x;
        let slope = (g.eval(root.x + dp) - g.eval(root.x - dp)) / (2.0 * dp);
        se / slope.abs()
    });
    Ok(AlphaPowerResult {
        value: root.x,
        alpha,
        method: PowerMethod::NumericRoot,
        residual: root.fx.abs(),
        bracket: (lo, hi),
        std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        let o = PowerOptions::default();
        let r = alpha_power(&RandomLaw::sas(1.5, 2.0), 1.5, &o).unwrap();
        assert_eq!(r.method, PowerMethod::ClosedFormStable);
        assert_relative_eq!(r.value, 1.5f64.powf(1.0 / 1.5) * 2.0, max_relative = 1e-15);
        let r = alpha_power(&RandomLaw::gaussian(1.0), 2.0, &o).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-15);
        let r = alpha_power(&RandomLaw::cauchy(1.0), 2.0, &o).unwrap();
        assert!(r.is_infinite());
        let r = alpha_power(&RandomLaw::empirical(vec![0.0; 3]), 1.2, &o).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn hill_detects_heavy_tails() {
        let s = crate::stable::sample_sas(1.2, 1.0, 100_000, 5).unwrap();
        assert!(hill_tail_index(&s).unwrap() < 2.0);
    }
}
