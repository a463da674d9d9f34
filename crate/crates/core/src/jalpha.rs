//! Alpha-Fisher information: closed form for stable laws, a spectral
//! evaluator, an entropy finite-difference evaluator and a de Bruijn check.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alphapower::as_centered_sas;
use crate::bounds::BoundReport;
use crate::density::{entropy, ln_density_values, realize, RandomLaw, TailClass};
use crate::error::{config, domain, numeric, Error, Result};
use crate::fourier::{self, power_images};
use crate::grid::{GridConfig, GridSpec, GriddedDensity, PowerTerm, TailLaw};
use crate::quad::tail_integral;
use crate::specfun::riesz_coefficient;
use crate::stable::check_alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JMethod {
    ClosedFormStable,
    Spectral,
    FiniteDifference,
}

impl fmt::Display for JMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JMethod::ClosedFormStable => "closed_form_stable",
            JMethod::Spectral => "spectral",
            JMethod::FiniteDifference => "finite_difference",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JDiagnostics {
    pub grid_points: usize,
    pub spacing: f64,
    /// |P(w_N)| / P(0) for the density's transform.
    pub spectral_cutoff: f64,
    /// |w_N|^alpha |P(w_N)| relative to the largest |w|^alpha |P(w)|.
    pub integrability_ratio: f64,
    pub tail_mass: f64,
    /// Scale of the stable perturbation added before the spectral path, if any.
    pub presmoothing: Option<f64>,
    /// (t, difference quotient) pairs of the finite-difference path.
    pub quotients: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JAlphaEstimate {
    pub value: f64,
    pub alpha: f64,
    pub method: JMethod,
    pub step: Option<f64>,
    pub diagnostics: JDiagnostics,
}

/// d / (alpha gamma^alpha).
pub fn jalpha_closed_stable(alpha: f64, gamma: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(domain(format!("gamma must be positive, got {gamma}")));
    }
    if d == 0 {
        return Err(domain("dimension must be at least 1"));
    }
    Ok(d as f64 / (alpha * gamma.powf(alpha)))
}

/// Why J is infinite for this tail, if it is.
fn infinite_reason(tail: &TailLaw, alpha: f64) -> Option<&'static str> {
    match tail {
        TailLaw::Compact => Some("bounded support: ln p is -inf outside it"),
        TailLaw::Light if alpha < 2.0 => Some("tails lighter than exponential against a power-law q"),
        TailLaw::Exponential { .. } if alpha <= 1.0 => Some("exponential tails need alpha > 1"),
        _ => None,
    }
}

fn infinite(alpha: f64, method: JMethod, why: &str) -> JAlphaEstimate {
    JAlphaEstimate {
        value: f64::INFINITY,
        alpha,
        method,
        step: None,
        diagnostics: JDiagnostics { notes: vec![format!("infinite: {why}")], ..Default::default() },
    }
}

/// Tail terms of q = F^{-1}[|w|^alpha phi] for the given density tail.
fn q_tail_terms(f: &GriddedDensity, alpha: f64) -> Vec<PowerTerm> {
    match f.tail() {
        TailLaw::Power(p) => p.q_terms(alpha),
        _ => {
            // phi(w) = 1 - V w^2 / 2 + ... about the center
            let mut out = Vec::new();
            let lead = -riesz_coefficient(alpha);
            if lead != 0.0 {
                out.push(PowerTerm { coefficient: lead, exponent: 1.0 + alpha });
                let v = f.variance();
                if v.is_finite() {
                    out.push(PowerTerm { coefficient: 0.5 * v * riesz_coefficient(alpha + 2.0), exponent: 3.0 + alpha });
                }
            }
            out
        }
    }
}

/// J_alpha(X) = int ln p(x) q(x) dx with q = F^{-1}[|w|^alpha phi].
pub fn jalpha_spectral(f: &GriddedDensity, alpha: f64) -> Result<JAlphaEstimate> {
    check_alpha(alpha)?;
    if let Some(why) = infinite_reason(f.tail(), alpha) {
        return Ok(infinite(alpha, JMethod::Spectral, why));
    }
    let grid = f.grid().ok_or_else(|| config("the spectral path needs a symmetric power-of-two grid"))?;
    let (n, h) = (grid.n, grid.h);
    let images = f.periodic_images();
    let mut buf: Vec<Complex64> =
        f.values().iter().zip(&images).map(|(v, i)| Complex64::new(v + i, 0.0)).collect();
    fourier::forward(&mut buf);
    let p0 = buf[0].norm();
    let cutoff = buf[n / 2].norm() / p0;
    if cutoff > 1e-4 {
        return Err(Error::Method(format!(
            "density is not resolved at the Nyquist frequency (|P(w_N)|/|P(0)| = {cutoff:.2e}); \
             use a finer grid or the finite-difference method"
        )));
    }
    let mut top: f64 = 0.0;
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= fourier::omega(j, n, h).abs().powf(alpha);
        top = top.max(c.norm());
    }
    let integrability_ratio = buf[n / 2].norm() / top;
    fourier::inverse(&mut buf);

    let qt = q_tail_terms(f, alpha);
    let center = f.tail().center();
    let pairs: Vec<(f64, f64)> = qt.iter().map(|t| (t.coefficient, t.exponent)).collect();
    let q_images = power_images(&pairs, center, grid.period(), grid.x0(), h, n);
    let ln_p = ln_density_values(f);
    let body: f64 = buf
        .iter()
        .zip(&q_images)
        .zip(&ln_p)
        .map(|((c, qi), lp)| lp * (c.re / n as f64 - qi))
        .sum::<f64>()
        * h;
    let q_tail = |u: f64| qt.iter().map(|t| t.coefficient * u.powf(-t.exponent)).sum::<f64>();
    let (dl, dr) = f.tail_distances();
    let tails = if qt.is_empty() || dl <= 0.0 || dr <= 0.0 {
        0.0
    } else {
        let side = |d: f64| {
            tail_integral(
                |u| {
                    let lp = f.tail().ln_density_at_distance(u);
                    if lp.is_finite() {
                        lp * q_tail(u)
                    } else {
                        0.0
                    }
                },
                d,
            )
        };
        side(dl) + side(dr)
    };
    let value = body + tails;
    if !value.is_finite() {
        return Err(numeric("spectral alpha-Fisher information is not finite"));
    }
    if value < -1e-6 {
        return Err(numeric(format!("spectral alpha-Fisher information is negative ({value:.3e})")));
    }
    Ok(JAlphaEstimate {
        value,
        alpha,
        method: JMethod::Spectral,
        step: None,
        diagnostics: JDiagnostics {
            grid_points: n,
            spacing: h,
            spectral_cutoff: cutoff,
            integrability_ratio,
            tail_mass: f.tail_mass(),
            ..Default::default()
        },
    })
}

/// Grid wide enough for the widest and fine enough for the narrowest of `laws`.
pub fn common_grid(laws: &[RandomLaw], cfg: &GridConfig) -> Result<GridSpec> {
    let mut half: f64 = 0.0;
    let mut h = f64::INFINITY;
    for l in laws {
        let g = GridSpec::for_law(l, cfg)?;
        half = half.max(g.half_width());
        h = h.min(g.h);
    }
    let n = ((2.0 * half / h).ceil() as usize).next_power_of_two().max(cfg.n_points);
    if n > cfg.max_points {
        return Err(config(format!("common grid needs {n} points, above the cap {}", cfg.max_points)));
    }
    GridSpec::symmetric(n, half)
}

fn perturbed(law: &RandomLaw, alpha: f64, scale: f64) -> RandomLaw {
    law.clone().plus(RandomLaw::sas(alpha, scale))
}

/// Default step sequence {0.2, 0.1, 0.05, 0.025} gamma_eff^alpha.
pub fn default_t_sequence(law: &RandomLaw, alpha: f64) -> Vec<f64> {
    let g = law.min_component_scale().powf(alpha);
    [0.2, 0.1, 0.05, 0.025].iter().map(|c| c * g).collect()
}

/// J_alpha as the limit of (h(X + t^(1/alpha) N) - h(X)) / t, N ~ S(alpha, 1),
/// with two-point Richardson extrapolation of the last two quotients.
pub fn jalpha_finite_diff(
    law: &RandomLaw,
    alpha: f64,
    t_sequence: &[f64],
    cfg: &GridConfig,
) -> Result<JAlphaEstimate> {
    check_alpha(alpha)?;
    law.validate()?;
    if t_sequence.len() < 2 {
        return Err(config("finite differences need at least two steps"));
    }
    if t_sequence.iter().any(|t| !(*t > 0.0)) || t_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config("t_sequence must be positive and strictly decreasing"));
    }
    let t_max = t_sequence[0];
    let t_min = t_sequence[t_sequence.len() - 1];
    let grid = common_grid(
        &[
            law.clone(),
            perturbed(law, alpha, t_max.powf(1.0 / alpha)),
            perturbed(law, alpha, t_min.powf(1.0 / alpha)),
        ],
        cfg,
    )?;
    let h0 = entropy(&realize(law, &grid)?);
    let mut quotients = Vec::with_capacity(t_sequence.len());
    for &t in t_sequence {
        let ht = entropy(&realize(&perturbed(law, alpha, t.powf(1.0 / alpha)), &grid)?);
        quotients.push((t, (ht - h0) / t));
    }
    let mut notes = Vec::new();
    for w in quotients.windows(2) {
        // concavity in t: quotients grow as t shrinks
        if w[1].1 < w[0].1 - 1e-6 * w[0].1.abs().max(1.0) {
            notes.push(format!("quotient decreased from t={} to t={}", w[0].0, w[1].0));
        }
    }
    let (t1, q1) = quotients[quotients.len() - 2];
    let (t2, q2) = quotients[quotients.len() - 1];
    let value = (t1 * q2 - t2 * q1) / (t1 - t2);
    Ok(JAlphaEstimate {
        value,
        alpha,
        method: JMethod::FiniteDifference,
        step: Some(t2),
        diagnostics: JDiagnostics { grid_points: grid.n, spacing: grid.h, quotients, notes, ..Default::default() },
    })
}

/// Relative scale of the stable perturbation used to smooth compact laws.
pub const PRESMOOTH_ETA: f64 = 1e-3;

/// J_alpha of a law: closed form when available, otherwise spectral on the
/// realized density (compact laws are smoothed by a small stable perturbation first).
pub fn jalpha(law: &RandomLaw, alpha: f64, cfg: &GridConfig) -> Result<JAlphaEstimate> {
    check_alpha(alpha)?;
    law.validate()?;
    if law.is_degenerate() {
        return Ok(infinite(alpha, JMethod::ClosedFormStable, "point mass"));
    }
    if let Some((a, g)) = as_centered_sas(law) {
        if a == alpha {
            return Ok(JAlphaEstimate {
                value: jalpha_closed_stable(alpha, g, 1)?,
                alpha,
                method: JMethod::ClosedFormStable,
                step: None,
                diagnostics: JDiagnostics::default(),
            });
        }
    }
    let (target, presmoothing) = match law.tail_class() {
        TailClass::Compact => {
            let s = PRESMOOTH_ETA.powf(1.0 / alpha) * law.scale();
            (perturbed(law, alpha, s), Some(s))
        }
        _ => (law.clone(), None),
    };
    let grid = GridSpec::for_law(&target, cfg)?;
    let f = realize(&target, &grid)?;
    let mut est = jalpha_spectral(&f, alpha)?;
    est.diagnostics.presmoothing = presmoothing;
    Ok(est)
}

/// Checks d/d eta h(X + eta^(1/alpha) N) = gamma^alpha J_alpha(X_eta), N ~ S(alpha, gamma).
pub fn debruijn_check(law: &RandomLaw, alpha: f64, gamma: f64, eta: f64, cfg: &GridConfig) -> Result<BoundReport> {
    check_alpha(alpha)?;
    if !(eta > 0.0) {
        return Err(domain(format!("eta must be positive, got {eta}")));
    }
    if !(gamma > 0.0) {
        return Err(domain(format!("gamma must be positive, got {gamma}")));
    }
    let delta = eta / 10.0;
    let at = |e: f64| perturbed(law, alpha, gamma * e.powf(1.0 / alpha));
    let laws = [at(eta - delta), at(eta), at(eta + delta)];
    let grid = common_grid(&laws, cfg)?;
    let hm = entropy(&realize(&laws[0], &grid)?);
    let f_eta = realize(&laws[1], &grid)?;
    let hp = entropy(&realize(&laws[2], &grid)?);
    let lhs = (hp - hm) / (2.0 * delta);
    let j = jalpha_spectral(&f_eta, alpha)?;
    let rhs = gamma.powf(alpha) * j.value;
    let rel = (lhs - rhs).abs() / rhs.abs();
    Ok(BoundReport {
        name: "debruijn".into(),
        lhs,
        rhs,
        slack: -rel,
        inputs: vec![
            ("law".into(), law.to_string()),
            ("alpha".into(), alpha.to_string()),
            ("gamma".into(), gamma.to_string()),
            ("eta".into(), eta.to_string()),
        ],
        method: format!("centered difference (step {delta}) vs spectral J on {} points", grid.n),
        relative_error: Some(rel),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(jalpha_closed_stable(2.0, 1.0 / 2f64.sqrt(), 1).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(jalpha_closed_stable(1.0, 1.0, 1).unwrap(), 1.0);
        assert_relative_eq!(jalpha_closed_stable(1.5, 2.0, 3).unwrap(), 2.0 / 2f64.powf(1.5), max_relative = 1e-14);
    }

    #[test]
    fn infinite_domains() {
        let cfg = GridConfig::default();
        let g = realize(&RandomLaw::gaussian(1.0), &GridSpec::for_law(&RandomLaw::gaussian(1.0), &cfg).unwrap()).unwrap();
        assert!(jalpha_spectral(&g, 1.5).unwrap().value.is_infinite());
        let l = RandomLaw::laplace(1.0);
        let f = realize(&l, &GridSpec::for_law(&l, &cfg).unwrap()).unwrap();
        assert!(jalpha_spectral(&f, 0.9).unwrap().value.is_infinite());
    }
}
