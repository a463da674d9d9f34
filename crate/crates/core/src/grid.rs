//! Uniform grids, tail descriptors and the gridded density type.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{config, numeric, Error, Result};
use crate::fourier::{cubic_at, power_images};
use crate::quad::tail_integral;
use crate::specfun::riesz_coefficient;

/// Symmetric power-of-two grid: x_k = (k - n/2) h for k = 0..n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(config(format!("grid length must be a power of two >= 16, got {n}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(config(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Self { n, h })
    }

    /// Grid of `n` points covering [-half_width, half_width).
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, 2.0 * half_width / n as f64)
    }

    pub fn x0(&self) -> f64 {
        -((self.n / 2) as f64) * self.h
    }

    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.h
    }

    pub fn period(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.period()
    }
}

/// Grid sizing policy used when a grid is derived from a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Minimum number of grid points (power of two).
    pub n_points: usize,
    /// Half-width of the grid in units of the law's scale.
    pub extent_factor: f64,
    /// Hard cap on the number of points.
    pub max_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_points: 1 << 16, extent_factor: 200.0, max_points: 1 << 22 }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n_points.is_power_of_two() || self.n_points < (1 << 12) {
            return Err(config(format!(
                "n_points must be a power of two >= 4096, got {}",
                self.n_points
            )));
        }
        if !(self.extent_factor >= 50.0) {
            return Err(config(format!("extent_factor must be >= 50, got {}", self.extent_factor)));
        }
        if self.max_points < self.n_points {
            return Err(config("max_points must be at least n_points"));
        }
        Ok(())
    }
}

/// p(x) ~ coefficient |x - center|^(-exponent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Term `weight * |w|^power` of the small-frequency expansion of the
/// characteristic function (phase removed). Even integer powers are the
/// analytic part and produce no density tail of their own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfTerm {
    pub weight: f64,
    pub power: f64,
}

fn is_even_integer(s: f64) -> bool {
    let r = (s / 2.0).round();
    (s / 2.0 - r).abs() < 1e-9
}

/// Power-law tail described through the characteristic-function expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub center: f64,
    /// Distance from `center` beyond which the series is trusted.
    pub radius: f64,
    cf_terms: Vec<CfTerm>,
    p_terms: Vec<PowerTerm>,
}

impl PowerTail {
    pub fn new(center: f64, radius: f64, cf_terms: Vec<CfTerm>) -> Self {
        let p_terms = cf_terms
            .iter()
            .filter(|t| !is_even_integer(t.power))
            .map(|t| PowerTerm {
                coefficient: -t.weight * riesz_coefficient(t.power),
                exponent: 1.0 + t.power,
            })
            .filter(|t| t.coefficient != 0.0)
            .collect();
        Self { center, radius, cf_terms, p_terms }
    }

    pub fn cf_terms(&self) -> &[CfTerm] {
        &self.cf_terms
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.p_terms
    }

    /// Leading density term (smallest exponent).
    pub fn leading(&self) -> Option<PowerTerm> {
        self.p_terms.iter().copied().min_by(|a, b| a.exponent.total_cmp(&b.exponent))
    }

    fn density_at_distance(&self, u: f64) -> f64 {
        self.p_terms.iter().map(|t| t.coefficient * u.powf(-t.exponent)).sum()
    }

    /// Tail terms of q = F^{-1}[|w|^alpha phi] implied by the expansion.
    pub fn q_terms(&self, alpha: f64) -> Vec<PowerTerm> {
        let mut out = Vec::with_capacity(self.cf_terms.len() + 1);
        let lead = -riesz_coefficient(alpha);
        if lead != 0.0 && !is_even_integer(alpha) {
            out.push(PowerTerm { coefficient: lead, exponent: 1.0 + alpha });
        }
        for t in &self.cf_terms {
            let s = alpha + t.power;
            if is_even_integer(s) {
                continue;
            }
            let c = -t.weight * riesz_coefficient(s);
            if c != 0.0 {
                out.push(PowerTerm { coefficient: c, exponent: 1.0 + s });
            }
        }
        out
    }

    /// Expansion of the convolution of two power tails (product of expansions).
    pub fn convolve(&self, other: &PowerTail, distance: f64, radius: f64) -> PowerTail {
        let mut terms: Vec<CfTerm> = self.cf_terms.clone();
        terms.extend_from_slice(&other.cf_terms);
        for a in &self.cf_terms {
            for b in &other.cf_terms {
                terms.push(CfTerm { weight: a.weight * b.weight, power: a.power + b.power });
            }
        }
        PowerTail::new(self.center + other.center, radius, prune(terms, distance))
    }

    /// Adds a light-tailed independent component of the given mean and variance.
    pub fn with_light_component(&self, mean: f64, variance: f64, distance: f64, radius: f64) -> PowerTail {
        let mut terms = self.cf_terms.clone();
        if variance > 0.0 {
            let v = CfTerm { weight: -0.5 * variance, power: 2.0 };
            for a in &self.cf_terms {
                terms.push(CfTerm { weight: a.weight * v.weight, power: a.power + 2.0 });
            }
            terms.push(v);
        }
        PowerTail::new(self.center + mean, radius, prune(terms, distance))
    }
}

/// Merges equal powers and drops terms negligible at `distance`.
fn prune(mut terms: Vec<CfTerm>, distance: f64) -> Vec<CfTerm> {
    terms.sort_by(|a, b| a.power.total_cmp(&b.power));
    let mut merged: Vec<CfTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.last_mut() {
            Some(last) if (last.power - t.power).abs() < 1e-9 => last.weight += t.weight,
            _ => merged.push(t),
        }
    }
    let size = |t: &CfTerm| {
        t.weight.abs()
            * (crate::specfun::ln_gamma_unchecked(1.0 + t.power) - t.power * distance.ln()).exp()
    };
    let biggest = merged.iter().map(size).fold(0.0, f64::max);
    let mut kept: Vec<CfTerm> =
        merged.into_iter().filter(|t| t.weight != 0.0 && size(t) >= 1e-18 * biggest).collect();
    kept.truncate(96);
    kept
}

/// Behaviour of a density beyond its grid-accurate region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TailLaw {
    /// Algebraic decay given by a (possibly multi-term) power series.
    Power(PowerTail),
    /// p(x) ~ coefficient exp(-rate |x - center|).
    Exponential { center: f64, radius: f64, coefficient: f64, rate: f64 },
    /// Decays faster than any exponential (Gaussian-like); positive everywhere.
    Light,
    /// Zero outside a bounded set.
    Compact,
}

impl TailLaw {
    pub fn is_power(&self) -> bool {
        matches!(self, TailLaw::Power(_))
    }

    pub fn center(&self) -> f64 {
        match self {
            TailLaw::Power(p) => p.center,
            TailLaw::Exponential { center, .. } => *center,
            _ => 0.0,
        }
    }

    /// Density of the tail model at distance `u` from its center.
    pub fn density_at_distance(&self, u: f64) -> f64 {
        match self {
            TailLaw::Power(p) => p.density_at_distance(u),
            TailLaw::Exponential { coefficient, rate, .. } => coefficient * (-rate * u).exp(),
            _ => 0.0,
        }
    }

    /// ln of the tail density at distance `u`, without underflow for exponential tails.
    pub fn ln_density_at_distance(&self, u: f64) -> f64 {
        match self {
            TailLaw::Exponential { coefficient, rate, .. } => coefficient.ln() - rate * u,
            _ => self.density_at_distance(u).ln(),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.density_at_distance((x - self.center()).abs())
    }

    /// The same tail model moved by `d`.
    pub fn translated(&self, d: f64) -> TailLaw {
        let mut t = self.clone();
        match &mut t {
            TailLaw::Power(p) => p.center += d,
            TailLaw::Exponential { center, .. } => *center += d,
            _ => {}
        }
        t
    }

    /// Probability mass beyond distance `d` on one side.
    pub fn mass_beyond(&self, d: f64) -> f64 {
        match self {
            TailLaw::Power(p) => p
                .p_terms
                .iter()
                .map(|t| t.coefficient * d.powf(1.0 - t.exponent) / (t.exponent - 1.0))
                .sum(),
            TailLaw::Exponential { coefficient, rate, .. } => coefficient / rate * (-rate * d).exp(),
            _ => 0.0,
        }
    }

    /// -int_d^inf p ln p on one side.
    pub fn entropy_beyond(&self, d: f64) -> f64 {
        match self {
            TailLaw::Power(p) => -tail_integral(
                |u| {
                    let v = p.density_at_distance(u);
                    if v > 0.0 {
                        v * v.ln()
                    } else {
                        0.0
                    }
                },
                d,
            ),
            TailLaw::Exponential { coefficient: c, rate: r, .. } => {
                // -int_d^inf c e^{-ru} (ln c - r u) du
                let e = (-r * d).exp();
                -(c / r) * e * (c.ln() - r * d - 1.0)
            }
            _ => 0.0,
        }
    }

    /// One-sided integral int_d^inf p(u) g(u) du for a caller-supplied weight,
    /// where u is the distance from the center.
    pub fn integrate_beyond<G: FnMut(f64) -> f64>(&self, d: f64, mut g: G) -> f64 {
        match self {
            TailLaw::Power(_) | TailLaw::Exponential { .. } => {
                tail_integral(|u| self.density_at_distance(u) * g(u), d)
            }
            _ => 0.0,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            TailLaw::Power(p) => p.radius,
            TailLaw::Exponential { radius, .. } => *radius,
            _ => f64::INFINITY,
        }
    }

    fn rescale(&mut self, k: f64) {
        if let TailLaw::Exponential { coefficient, .. } = self {
            *coefficient *= k;
        }
    }
}

/// Density sampled on a uniform grid plus a description of its tails.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedDensity {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    tail: TailLaw,
}

/// Density floor used wherever a logarithm is taken.
pub const DENSITY_FLOOR: f64 = 1e-300;

impl GriddedDensity {
    /// Builds a density and normalizes it so grid mass plus analytic tail mass is one.
    pub fn new(x0: f64, h: f64, values: Vec<f64>, tail: TailLaw) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x0.is_finite() {
            return Err(config("grid origin and spacing must be finite with h > 0"));
        }
        if values.len() < 4 {
            return Err(config("a gridded density needs at least four points"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(numeric("density values must be finite and non-negative"));
        }
        let mut d = Self { x0, h, values, tail };
        d.normalize()?;
        Ok(d)
    }

    pub(crate) fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) || !m.is_finite() {
            return Err(numeric(format!("density has non-positive or infinite mass {m}")));
        }
        let k = 1.0 / m;
        for v in &mut self.values {
            *v *= k;
        }
        self.tail.rescale(k);
        Ok(())
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> &TailLaw {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    /// The grid spec, if this density lives on a symmetric power-of-two grid.
    pub fn grid(&self) -> Option<GridSpec> {
        let n = self.values.len();
        let g = GridSpec::new(n, self.h).ok()?;
        ((g.x0() - self.x0).abs() <= 1e-9 * self.h).then_some(g)
    }

    /// Cell edges (each sample represents a cell of width h).
    pub fn edges(&self) -> (f64, f64) {
        (self.x0 - 0.5 * self.h, self.x0 + (self.len() as f64 - 0.5) * self.h)
    }

    /// Distances from the tail center to the left and right cell edges.
    pub(crate) fn tail_distances(&self) -> (f64, f64) {
        let (l, r) = self.edges();
        let c = self.tail.center();
        (c - l, r - c)
    }

    /// Grid mass plus analytic tail mass beyond the grid.
    pub fn mass(&self) -> f64 {
        let grid: f64 = self.values.iter().sum::<f64>() * self.h;
        let (dl, dr) = self.tail_distances();
        let tail = if dl > 0.0 && dr > 0.0 {
            self.tail.mass_beyond(dl) + self.tail.mass_beyond(dr)
        } else {
            0.0
        };
        grid + tail
    }

    /// Analytic tail mass outside the grid.
    pub fn tail_mass(&self) -> f64 {
        let (dl, dr) = self.tail_distances();
        if dl > 0.0 && dr > 0.0 {
            self.tail.mass_beyond(dl) + self.tail.mass_beyond(dr)
        } else {
            0.0
        }
    }

    /// Density at an arbitrary point: cubic interpolation on the grid, tail model outside.
    pub fn value_at(&self, x: f64) -> f64 {
        match cubic_at(&self.values, self.x0, self.h, x) {
            Some(v) => v.max(0.0),
            None => self.tail.density(x),
        }
    }

    /// ln p on the grid with the log floor applied.
    pub fn ln_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(DENSITY_FLOOR).ln()).collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().enumerate().map(|(k, v)| self.x(k) * v).sum::<f64>() * self.h
    }

    /// Second central moment from the grid; infinite when the tail is too heavy.
    pub fn variance(&self) -> f64 {
        if let TailLaw::Power(p) = &self.tail {
            if p.terms().iter().any(|t| t.exponent <= 3.0) {
                return f64::INFINITY;
            }
        }
        let m = self.mean();
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| (self.x(k) - m).powi(2) * v)
            .sum::<f64>()
            * self.h
    }

    /// Periodic images of the tail model for the period n h, at every grid point.
    pub(crate) fn periodic_images(&self) -> Vec<f64> {
        match &self.tail {
            TailLaw::Power(p) => {
                let terms: Vec<(f64, f64)> =
                    p.terms().iter().map(|t| (t.coefficient, t.exponent)).collect();
                power_images(&terms, p.center, self.len() as f64 * self.h, self.x0, self.h, self.len())
            }
            _ => vec![0.0; self.len()],
        }
    }

    /// Resamples onto a symmetric grid by cubic interpolation, using the tail
    /// model outside the current grid, then renormalizes.
    pub fn resample(&self, grid: &GridSpec) -> Result<GriddedDensity> {
        let values: Vec<f64> = (0..grid.n).map(|k| self.value_at(grid.x(k))).collect();
        GriddedDensity::new(grid.x0(), grid.h, values, self.tail.clone())
    }

    /// Writes the density as CSV with columns x, p.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "p"]).map_err(io_err)?;
        for (k, v) in self.values.iter().enumerate() {
            wtr.write_record([format!("{:.17e}", self.x(k)), format!("{:.17e}", v)])
                .map_err(io_err)?;
        }
        wtr.flush().map_err(|e| config(e.to_string()))
    }

    /// Reads an x, p CSV. The tail descriptor is not stored in CSV; it is
    /// taken as compact when both end values are zero and light otherwise.
    pub fn read_csv<R: Read>(r: R) -> Result<GriddedDensity> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut xs = Vec::new();
        let mut ps = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(io_err)?;
            let x: f64 = rec.get(0).unwrap_or("").trim().parse().map_err(|_| config("bad x"))?;
            let p: f64 = rec.get(1).unwrap_or("").trim().parse().map_err(|_| config("bad p"))?;
            xs.push(x);
            ps.push(p);
        }
        if xs.len() < 4 {
            return Err(config("density CSV needs at least four rows"));
        }
        let h = xs[1] - xs[0];
        for w in xs.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(config("density CSV grid is not uniform"));
            }
        }
        let tail = if ps[0] == 0.0 && ps[ps.len() - 1] == 0.0 { TailLaw::Compact } else { TailLaw::Light };
        GriddedDensity::new(xs[0], h, ps, tail)
    }

    pub(crate) fn from_parts(x0: f64, h: f64, values: Vec<f64>, tail: TailLaw) -> Self {
        Self { x0, h, values, tail }
    }

    /// Density of X + d: the same samples on an origin moved by `d`.
    pub fn translated(self, d: f64) -> Self {
        let tail = self.tail.translated(d);
        Self { x0: self.x0 + d, tail, ..self }
    }
}

fn io_err(e: csv::Error) -> Error {
    config(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout_is_symmetric() {
        let g = GridSpec::new(16, 0.5).unwrap();
        assert_eq!(g.x(8), 0.0);
        assert_eq!(g.x0(), -4.0);
        assert!(GridSpec::new(12, 0.5).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
    }

    #[test]
    fn q_terms_of_cauchy_lead_with_riesz_constant() {
        let tail = PowerTail::new(0.0, 10.0, vec![CfTerm { weight: -1.0, power: 1.0 }]);
        assert!((tail.terms()[0].coefficient - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        let q = tail.q_terms(1.5);
        assert_eq!(q[0].exponent, 2.5);
        assert!(q[0].coefficient < 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let g = GridSpec::new(64, 0.25).unwrap();
        let v: Vec<f64> = (0..64).map(|k| (-(g.x(k)).powi(2) / 2.0).exp()).collect();
        let d = GriddedDensity::new(g.x0(), g.h, v, TailLaw::Light).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = GriddedDensity::read_csv(buf.as_slice()).unwrap();
        for (a, b) in d.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
