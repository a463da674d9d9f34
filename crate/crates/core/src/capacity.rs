//! Capacity of the additive symmetric stable noise channel Y = X + N under an
//! output alpha-power cap, and the input cost function that induces it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphapower::{alpha_power_numeric, PowerOptions};
use crate::density::{entropy, realize_auto, RandomLaw};
use crate::error::{domain, Error, Result};
use crate::quad::{integrate_adaptive, tail_integral};
use crate::stable::{check_alpha, check_gamma, logpdf_fn, reference_entropy, reference_gamma, sample_sas};

/// Channel with S(alpha, gamma_n) noise and output alpha-power cap `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub alpha: f64,
    pub gamma_n: f64,
    pub a: f64,
    pub d: usize,
}

impl ChannelSpec {
    pub fn new(alpha: f64, gamma_n: f64, a: f64, d: usize) -> Result<Self> {
        let s = Self { alpha, gamma_n, a, d };
        s.validate()?;
        Ok(s)
    }

    /// alpha^(1/alpha) gamma_n.
    pub fn noise_power(&self) -> f64 {
        self.alpha.powf(1.0 / self.alpha) * self.gamma_n
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_gamma(self.gamma_n)?;
        if self.d == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(domain(format!("power cap must be positive and finite, got {}", self.a)));
        }
        let pn = self.noise_power();
        // one ulp of slack so that A = P_alpha(N) computed elsewhere is accepted
        if self.a < pn * (1.0 - 4.0 * f64::EPSILON) {
            return Err(Error::Constraint(format!("power cap {} is below the noise alpha-power {pn}", self.a)));
        }
        Ok(())
    }
}

/// C = d ln(A / P_alpha(N)) in nats.
pub fn capacity_stable(spec: &ChannelSpec) -> Result<f64> {
    spec.validate()?;
    Ok((spec.d as f64 * (spec.a / spec.noise_power()).ln()).max(0.0))
}

/// Scale of the capacity-achieving input S(alpha, gamma_x*); 0 when A = P_alpha(N).
pub fn optimal_input_scale(spec: &ChannelSpec) -> Result<f64> {
    spec.validate()?;
    let al = spec.alpha;
    let gap = (spec.a.powf(al) - spec.noise_power().powf(al)).max(0.0);
    Ok((1.0 / al).powf(1.0 / al) * gap.powf(1.0 / al))
}

/// C(x, P) = -E_N ln p_Z~((x + N) / P) with N ~ S(alpha, gamma_n).
pub fn cost_function(x: f64, p: f64, alpha: f64, gamma_n: f64) -> Result<f64> {
    Ok(CostFunction::new(alpha, gamma_n)?.eval(x, p))
}

/// Cost function with the noise and reference log-densities prepared once.
pub struct CostFunction {
    alpha: f64,
    gamma_n: f64,
    ln_noise: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ln_ref: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CostFunction {
    pub fn new(alpha: f64, gamma_n: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_gamma(gamma_n)?;
        Ok(Self {
            alpha,
            gamma_n,
            ln_noise: Box::new(logpdf_fn(alpha, gamma_n)?),
            ln_ref: Box::new(logpdf_fn(alpha, reference_gamma(alpha))?),
        })
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        if !(p > 0.0) {
            return f64::NAN;
        }
        let g = self.gamma_n;
        let f = |n: f64| {
            let w = (self.ln_noise)(n).exp();
            if w == 0.0 {
                0.0
            } else {
                -w * (self.ln_ref)((x + n) / p)
            }
        };
        // the integrand has its bulk near n = 0 and a dip of -ln p_Z~ near n = -x
        let zs = p * reference_gamma(self.alpha);
        let lim = 2.0 * x.abs() + 100.0 * g + 10.0 * zs;
        let mut pts = vec![-lim, lim, 0.0, -x, -5.0 * g, 5.0 * g, -x - 5.0 * zs, -x + 5.0 * zs];
        pts.retain(|v| v.abs() <= lim);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut total = 0.0;
        for w in pts.windows(2) {
            total += integrate_adaptive(f, w[0], w[1], 1e-13, 1e-11).0;
        }
        total + tail_integral(f, lim) + tail_integral(|u| f(-u), lim)
    }

    /// D(p_N(. - x) || p_{P Z~}) = C(x, P) - h(Z~) - ln(P_alpha(N) / P).
    pub fn divergence(&self, x: f64, p: f64) -> Result<f64> {
        let pn = self.alpha.powf(1.0 / self.alpha) * self.gamma_n;
        Ok(self.eval(x, p) - reference_entropy(self.alpha)? - (pn / p).ln())
    }
}

/// Average divergence over the optimal input at cost level P, against its target ln(P / P_alpha(N)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCheck {
    pub p: f64,
    pub mean_divergence: f64,
    pub std_error: f64,
    pub target: f64,
    pub samples: usize,
}

impl CostCheck {
    pub fn relative_error(&self) -> f64 {
        (self.mean_divergence - self.target).abs() / self.target.abs()
    }
}

/// Monte Carlo estimate of E_X* D(p_N(. - X*) || p_{A Z~}) with X* the optimal input.
pub fn cost_constraint_mc(spec: &ChannelSpec, samples: usize, seed: u64) -> Result<CostCheck> {
    let gx = optimal_input_scale(spec)?;
    if gx == 0.0 || samples < 2 {
        return Err(domain("the cost check needs A above the noise power and at least two samples"));
    }
    let cost = CostFunction::new(spec.alpha, spec.gamma_n)?;
    let xs = sample_sas(spec.alpha, gx, samples, seed)?;
    let ds: Vec<f64> = xs.par_iter().map(|&x| cost.divergence(x, spec.a)).collect::<Result<_>>()?;
    let n = ds.len() as f64;
    let mean = ds.iter().sum::<f64>() / n;
    let var = ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(CostCheck {
        p: spec.a,
        mean_divergence: mean,
        std_error: (var / n).sqrt(),
        target: (spec.a / spec.noise_power()).ln(),
        samples,
    })
}

/// Diagnostics of the optimal output S(alpha, gamma_x*) + N realized on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputCheck {
    pub output_alpha_power: f64,
    pub output_entropy: f64,
    /// h(Z~) + ln A, the maximum entropy under the cap.
    pub max_entropy: f64,
}

/// Realizes the optimal output numerically and measures its alpha-power and entropy.
/// Only meaningful for d = 1.
pub fn optimal_output_check(spec: &ChannelSpec, opts: &PowerOptions) -> Result<OutputCheck> {
    if spec.d != 1 {
        return Err(domain("grid checks are univariate"));
    }
    let gx = optimal_input_scale(spec)?;
    let noise = RandomLaw::sas(spec.alpha, spec.gamma_n);
    let law = if gx > 0.0 { RandomLaw::sas(spec.alpha, gx).plus(noise) } else { noise };
    let power = alpha_power_numeric(&law, spec.alpha, opts)?;
    let h = entropy(&realize_auto(&law, &opts.grid)?);
    Ok(OutputCheck {
        output_alpha_power: power.value,
        output_entropy: h,
        max_entropy: reference_entropy(spec.alpha)? + spec.a.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gain_and_one_nat() {
        let pn = 1.5f64.powf(1.0 / 1.5) * 0.7;
        let s = ChannelSpec::new(1.5, 0.7, pn, 1).unwrap();
        assert_eq!(capacity_stable(&s).unwrap(), 0.0);
        assert_eq!(optimal_input_scale(&s).unwrap(), 0.0);
        let s = ChannelSpec::new(1.5, 0.7, std::f64::consts::E * pn, 1).unwrap();
        assert_relative_eq!(capacity_stable(&s).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn cap_below_noise_is_rejected() {
        let err = ChannelSpec::new(1.2, 1.0, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }
}
