//! Test laws, realization on grids, convolution, entropy, logarithmic moments
//! and kernel density estimates.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{config, domain, Result};
use crate::fourier;
use crate::grid::{GridConfig, GridSpec, GriddedDensity, TailLaw, DENSITY_FLOOR};
use crate::stable::{check_alpha, draw_sas, pdf_grid_stable, tail_radius_unit};

/// A random variable described analytically or by samples.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomLaw {
    /// N(0, sigma^2).
    Gaussian { sigma: f64 },
    /// Uniform on [-a, a].
    Uniform { a: f64 },
    /// Density exp(-|x|/b) / (2b).
    Laplace { b: f64 },
    /// Cauchy with scale gamma.
    Cauchy { gamma: f64 },
    /// Symmetric alpha-stable S(alpha, gamma).
    SaS { alpha: f64, gamma: f64 },
    /// X + delta.
    Shifted(Box<RandomLaw>, f64),
    /// c X.
    Scaled(Box<RandomLaw>, f64),
    /// X + Y with X, Y independent.
    Sum(Box<RandomLaw>, Box<RandomLaw>),
    /// Empirical law of a sample set.
    Empirical(Arc<Vec<f64>>),
}

impl RandomLaw {
    pub fn gaussian(sigma: f64) -> Self {
        RandomLaw::Gaussian { sigma }
    }

    pub fn uniform(a: f64) -> Self {
        RandomLaw::Uniform { a }
    }

    pub fn laplace(b: f64) -> Self {
        RandomLaw::Laplace { b }
    }

    pub fn cauchy(gamma: f64) -> Self {
        RandomLaw::Cauchy { gamma }
    }

    pub fn sas(alpha: f64, gamma: f64) -> Self {
        RandomLaw::SaS { alpha, gamma }
    }

    pub fn empirical(samples: Vec<f64>) -> Self {
        RandomLaw::Empirical(Arc::new(samples))
    }

    pub fn shifted(self, delta: f64) -> Self {
        RandomLaw::Shifted(Box::new(self), delta)
    }

    pub fn scaled(self, c: f64) -> Self {
        RandomLaw::Scaled(Box::new(self), c)
    }

    pub fn plus(self, other: RandomLaw) -> Self {
        RandomLaw::Sum(Box::new(self), Box::new(other))
    }

    /// Checks parameter domains recursively.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            RandomLaw::Gaussian { sigma } => positive("sigma", *sigma),
            RandomLaw::Uniform { a } => positive("a", *a),
            RandomLaw::Laplace { b } => positive("b", *b),
            RandomLaw::Cauchy { gamma } => positive("gamma", *gamma),
            RandomLaw::SaS { alpha, gamma } => {
                check_alpha(*alpha)?;
                positive("gamma", *gamma)
            }
            RandomLaw::Shifted(l, d) => {
                if !d.is_finite() {
                    return Err(domain("shift must be finite"));
                }
                l.validate()
            }
            RandomLaw::Scaled(l, c) => {
                if !c.is_finite() {
                    return Err(domain("scale factor must be finite"));
                }
                l.validate()
            }
            RandomLaw::Sum(a, b) => {
                a.validate()?;
                b.validate()
            }
            RandomLaw::Empirical(s) => {
                if s.is_empty() {
                    return Err(domain("empirical law needs at least one sample"));
                }
                if s.iter().any(|x| !x.is_finite()) {
                    return Err(domain("empirical samples must be finite"));
                }
                Ok(())
            }
        }
    }

    /// True for the law of the constant 0.
    pub fn is_point_mass_at_zero(&self) -> bool {
        match self {
            RandomLaw::Empirical(s) => s.iter().all(|&x| x == 0.0),
            RandomLaw::Scaled(l, c) => *c == 0.0 || l.is_point_mass_at_zero(),
            RandomLaw::Sum(a, b) => a.is_point_mass_at_zero() && b.is_point_mass_at_zero(),
            _ => false,
        }
    }

    /// Whether the law is a point mass (anywhere).
    pub fn is_degenerate(&self) -> bool {
        match self {
            RandomLaw::Empirical(s) => s.iter().all(|&x| x == s[0]),
            RandomLaw::Scaled(l, c) => *c == 0.0 || l.is_degenerate(),
            RandomLaw::Shifted(l, _) => l.is_degenerate(),
            RandomLaw::Sum(a, b) => a.is_degenerate() && b.is_degenerate(),
            _ => false,
        }
    }

    /// Robust scale used to size grids and brackets.
    pub fn scale(&self) -> f64 {
        match self {
            RandomLaw::Gaussian { sigma } => *sigma,
            RandomLaw::Uniform { a } => *a,
            RandomLaw::Laplace { b } => *b,
            RandomLaw::Cauchy { gamma } => *gamma,
            RandomLaw::SaS { gamma, .. } => *gamma,
            RandomLaw::Shifted(l, d) => l.scale() + d.abs(),
            RandomLaw::Scaled(l, c) => c.abs() * l.scale(),
            RandomLaw::Sum(a, b) => a.scale() + b.scale(),
            RandomLaw::Empirical(s) => {
                let (q1, q3) = quartiles(s);
                let iqr = 0.5 * (q3 - q1);
                if iqr > 0.0 {
                    iqr
                } else {
                    let m = s.iter().map(|x| x.abs()).fold(0.0, f64::max);
                    if m > 0.0 {
                        m
                    } else {
                        1.0
                    }
                }
            }
        }
    }

    /// Smallest scale among the components (drives finite-difference steps).
    pub fn min_component_scale(&self) -> f64 {
        match self {
            RandomLaw::Shifted(l, _) => l.min_component_scale(),
            RandomLaw::Scaled(l, c) => c.abs() * l.min_component_scale(),
            RandomLaw::Sum(a, b) => a.min_component_scale().min(b.min_component_scale()),
            other => other.scale(),
        }
    }

    /// Largest admissible grid spacing for this law.
    fn resolution(&self) -> f64 {
        match self {
            RandomLaw::Gaussian { sigma } => sigma / 8.0,
            RandomLaw::Uniform { a } => a / 200.0,
            RandomLaw::Laplace { b } => b / 100.0,
            RandomLaw::Cauchy { gamma } => stable_resolution(1.0, *gamma),
            RandomLaw::SaS { alpha, gamma } => stable_resolution(*alpha, *gamma),
            RandomLaw::Shifted(l, _) => l.resolution(),
            RandomLaw::Scaled(l, c) => c.abs() * l.resolution(),
            RandomLaw::Sum(a, b) => a.resolution().min(b.resolution()),
            RandomLaw::Empirical(s) => silverman_bandwidth(s) / 4.0,
        }
    }

    /// Grid half-width needed beyond the extent factor (tail-series radius, shifts).
    fn min_half_width(&self) -> f64 {
        match self {
            RandomLaw::Cauchy { gamma } => 2.0 * tail_radius_unit(1.0) * gamma,
            RandomLaw::SaS { alpha, gamma } if *alpha < 2.0 => 2.0 * tail_radius_unit(*alpha) * gamma,
            RandomLaw::Shifted(l, d) => l.min_half_width() + d.abs(),
            RandomLaw::Scaled(l, c) => c.abs() * l.min_half_width(),
            RandomLaw::Sum(a, b) => a.min_half_width().max(b.min_half_width()),
            _ => 0.0,
        }
    }

    /// Tail class of the law.
    pub fn tail_class(&self) -> TailClass {
        match self {
            RandomLaw::Gaussian { .. } => TailClass::Light,
            RandomLaw::Uniform { .. } => TailClass::Compact,
            RandomLaw::Laplace { .. } => TailClass::Exponential,
            RandomLaw::Cauchy { .. } => TailClass::Power,
            RandomLaw::SaS { alpha, .. } => {
                if *alpha < 2.0 {
                    TailClass::Power
                } else {
                    TailClass::Light
                }
            }
            RandomLaw::Shifted(l, _) => l.tail_class(),
            RandomLaw::Scaled(l, _) => l.tail_class(),
            RandomLaw::Sum(a, b) => a.tail_class().max(b.tail_class()),
            RandomLaw::Empirical(_) => TailClass::Light,
        }
    }

    /// E[X^2], infinite for heavy-tailed laws.
    pub fn second_moment(&self) -> f64 {
        match self {
            RandomLaw::Gaussian { sigma } => sigma * sigma,
            RandomLaw::Uniform { a } => a * a / 3.0,
            RandomLaw::Laplace { b } => 2.0 * b * b,
            RandomLaw::Cauchy { .. } => f64::INFINITY,
            RandomLaw::SaS { alpha, gamma } => {
                if *alpha == 2.0 {
                    2.0 * gamma * gamma
                } else {
                    f64::INFINITY
                }
            }
            RandomLaw::Shifted(l, d) => l.second_moment() + 2.0 * d * l.mean() + d * d,
            RandomLaw::Scaled(l, c) => c * c * l.second_moment(),
            RandomLaw::Sum(a, b) => a.second_moment() + b.second_moment() + 2.0 * a.mean() * b.mean(),
            RandomLaw::Empirical(s) => s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64,
        }
    }

    /// Mean (0 for symmetric laws, including heavy-tailed ones where it is the center).
    pub fn mean(&self) -> f64 {
        match self {
            RandomLaw::Shifted(l, d) => l.mean() + d,
            RandomLaw::Scaled(l, c) => c * l.mean(),
            RandomLaw::Sum(a, b) => a.mean() + b.mean(),
            RandomLaw::Empirical(s) => s.iter().sum::<f64>() / s.len() as f64,
            _ => 0.0,
        }
    }

    /// Draws n samples (for Monte Carlo oracles).
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        use rand::Rng;
        match self {
            RandomLaw::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            RandomLaw::Uniform { a } => a * (2.0 * rng.random::<f64>() - 1.0),
            RandomLaw::Laplace { b } => {
                let e: f64 = rng.sample(rand_distr::Exp1);
                if rng.random::<bool>() {
                    b * e
                } else {
                    -b * e
                }
            }
            RandomLaw::Cauchy { gamma } => draw_sas(rng, 1.0, *gamma),
            RandomLaw::SaS { alpha, gamma } => draw_sas(rng, *alpha, *gamma),
            RandomLaw::Shifted(l, d) => l.draw(rng) + d,
            RandomLaw::Scaled(l, c) => c * l.draw(rng),
            RandomLaw::Sum(a, b) => a.draw(rng) + b.draw(rng),
            RandomLaw::Empirical(s) => s[rng.random_range(0..s.len())],
        }
    }

    /// Half-width of the support of a top-level uniform (used to align grids).
    fn uniform_edge(&self) -> Option<f64> {
        match self {
            RandomLaw::Uniform { a } => Some(*a),
            RandomLaw::Scaled(l, c) => l.uniform_edge().map(|a| a * c.abs()),
            _ => None,
        }
    }
}

impl fmt::Display for RandomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RandomLaw::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            RandomLaw::Uniform { a } => write!(f, "uniform(a={a})"),
            RandomLaw::Laplace { b } => write!(f, "laplace(b={b})"),
            RandomLaw::Cauchy { gamma } => write!(f, "cauchy(gamma={gamma})"),
            RandomLaw::SaS { alpha, gamma } => write!(f, "sas(alpha={alpha};gamma={gamma})"),
            RandomLaw::Shifted(l, d) => write!(f, "shift({l};{d})"),
            RandomLaw::Scaled(l, c) => write!(f, "scale({l};{c})"),
            RandomLaw::Sum(a, b) => write!(f, "sum({a};{b})"),
            RandomLaw::Empirical(s) => write!(f, "empirical(n={})", s.len()),
        }
    }
}

/// Parses `name:param[:param]` terms joined by `+`, for example
/// `laplace:1+sas:1.5:0.5`. Names: gaussian (sigma), uniform (a),
/// laplace (b), cauchy (gamma), sas (alpha, gamma).
impl FromStr for RandomLaw {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut law: Option<RandomLaw> = None;
        for term in s.split('+') {
            let mut parts = term.trim().split(':');
            let name = parts.next().unwrap_or_default().to_ascii_lowercase();
            let params: Vec<f64> = parts
                .map(|p| p.trim().parse::<f64>().map_err(|_| config(format!("bad number '{p}' in law '{term}'"))))
                .collect::<Result<_>>()?;
            let want = |n: usize| {
                if params.len() == n {
                    Ok(())
                } else {
                    Err(config(format!("law '{name}' takes {n} parameter(s), got {}", params.len())))
                }
            };
            let next = match name.as_str() {
                "gaussian" | "normal" => want(1).map(|_| RandomLaw::gaussian(params[0])),
                "uniform" => want(1).map(|_| RandomLaw::uniform(params[0])),
                "laplace" => want(1).map(|_| RandomLaw::laplace(params[0])),
                "cauchy" => want(1).map(|_| RandomLaw::cauchy(params[0])),
                "sas" | "stable" => want(2).map(|_| RandomLaw::sas(params[0], params[1])),
                _ => Err(config(format!("unknown law '{name}'"))),
            }?;
            law = Some(match law {
                None => next,
                Some(l) => l.plus(next),
            });
        }
        let law = law.ok_or_else(|| config("empty law"))?;
        law.validate()?;
        Ok(law)
    }
}

/// Ordering reflects tail heaviness: a sum inherits the heavier class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TailClass {
    Compact,
    Light,
    Exponential,
    Power,
}

fn stable_resolution(alpha: f64, gamma: f64) -> f64 {
    // Nyquist criterion (gamma pi / h)^alpha >= 36, plus a body-resolution cap
    (gamma * PI / 36f64.powf(1.0 / alpha)).min(gamma / 4.0)
}

impl GridSpec {
    /// Symmetric grid sized for `law`: half-width extent_factor times the
    /// law's scale, spacing fine enough for every component.
    pub fn for_law(law: &RandomLaw, cfg: &GridConfig) -> Result<GridSpec> {
        cfg.validate()?;
        law.validate()?;
        if law.is_degenerate() {
            return Err(config("a point mass has no density to put on a grid"));
        }
        let half = (cfg.extent_factor * law.scale()).max(law.min_half_width());
        let mut h = law.resolution();
        let mut n = cfg.n_points;
        let needed = (2.0 * half / h).ceil() as usize;
        if needed > n {
            n = needed.next_power_of_two();
        }
        if n > cfg.max_points {
            return Err(config(format!(
                "law {law} needs {n} grid points (half-width {half:.3e}, spacing {h:.3e}), above the cap {}",
                cfg.max_points
            )));
        }
        h = 2.0 * half / n as f64;
        if let Some(a) = law.uniform_edge() {
            // put +-a on cell boundaries
            let m = (a / h - 0.5).ceil().max(1.0);
            h = a / (m + 0.5);
        }
        GridSpec::new(n, h)
    }
}

/// Density of `law` on `grid`.
pub fn realize(law: &RandomLaw, grid: &GridSpec) -> Result<GriddedDensity> {
    law.validate()?;
    realize_affine(law, grid, 1.0, 0.0)
}

/// Density of `law` on a grid chosen by [`GridSpec::for_law`].
///
/// Outer shifts move the origin of the result instead of the grid, so the
/// values match those of the unshifted law exactly. The result then has no
/// symmetric grid; use [`realize`] where one is needed.
pub fn realize_auto(law: &RandomLaw, cfg: &GridConfig) -> Result<GriddedDensity> {
    law.validate()?;
    let mut inner = law;
    let mut shift = 0.0;
    while let RandomLaw::Shifted(l, d) = inner {
        inner = l;
        shift += d;
    }
    let grid = GridSpec::for_law(inner, cfg)?;
    let f = realize(inner, &grid)?;
    Ok(if shift == 0.0 { f } else { f.translated(shift) })
}

fn coverage(grid: &GridSpec, center: f64, reach: f64, what: &str) -> Result<()> {
    if grid.half_width() - center.abs() < reach {
        return Err(config(format!(
            "grid half-width {} does not cover {what} (needs {reach} beyond center {center})",
            grid.half_width()
        )));
    }
    Ok(())
}

fn resolved(grid: &GridSpec, scale: f64, what: &str) -> Result<()> {
    if grid.h > scale {
        return Err(config(format!("grid spacing {} too coarse for {what} (scale {scale})", grid.h)));
    }
    Ok(())
}

/// Realizes c X + delta.
fn realize_affine(law: &RandomLaw, grid: &GridSpec, c: f64, delta: f64) -> Result<GriddedDensity> {
    let s = c.abs();
    let n = grid.n;
    match law {
        RandomLaw::Gaussian { sigma } => {
            let sd = sigma * s;
            coverage(grid, delta, 12.0 * sd, "the Gaussian body")?;
            resolved(grid, 0.5 * sd, "the Gaussian")?;
            let norm = 1.0 / (2.0 * PI * sd * sd).sqrt();
            let v = (0..n).map(|k| norm * (-(grid.x(k) - delta).powi(2) / (2.0 * sd * sd)).exp()).collect();
            GriddedDensity::new(grid.x0(), grid.h, v, TailLaw::Light)
        }
        RandomLaw::Uniform { a } => {
            let a = a * s;
            coverage(grid, delta, a + 2.0 * grid.h, "the uniform support")?;
            resolved(grid, 0.5 * a, "the uniform")?;
            let (lo, hi) = (delta - a, delta + a);
            let h = grid.h;
            let v = (0..n)
                .map(|k| {
                    let x = grid.x(k);
                    let overlap = ((x + 0.5 * h).min(hi) - (x - 0.5 * h).max(lo)).max(0.0);
                    overlap / h / (2.0 * a)
                })
                .collect();
            GriddedDensity::new(grid.x0(), grid.h, v, TailLaw::Compact)
        }
        RandomLaw::Laplace { b } => {
            let b = b * s;
            coverage(grid, delta, 40.0 * b, "the Laplace body")?;
            resolved(grid, 0.25 * b, "the Laplace")?;
            let v = (0..n).map(|k| (-(grid.x(k) - delta).abs() / b).exp() / (2.0 * b)).collect();
            let radius = grid.half_width() - delta.abs();
            let tail = TailLaw::Exponential { center: delta, radius, coefficient: 0.5 / b, rate: 1.0 / b };
            GriddedDensity::new(grid.x0(), grid.h, v, tail)
        }
        RandomLaw::Cauchy { gamma } => pdf_grid_stable(1.0, gamma * s, delta, grid),
        RandomLaw::SaS { alpha, gamma } => pdf_grid_stable(*alpha, gamma * s, delta, grid),
        RandomLaw::Shifted(l, d) => realize_affine(l, grid, c, delta + c * d),
        RandomLaw::Scaled(l, k) => {
            if *k == 0.0 || c * k == 0.0 {
                return Err(config("scaling by zero yields a point mass without density"));
            }
            realize_affine(l, grid, c * k, delta)
        }
        RandomLaw::Sum(a, b) => {
            let fa = realize_affine(a, grid, c, delta)?;
            let fb = realize_affine(b, grid, c, 0.0)?;
            convolve(&fa, &fb)
        }
        RandomLaw::Empirical(samples) => {
            let xs: Vec<f64> = samples.iter().map(|x| c * x + delta).collect();
            kde(&xs, grid)
        }
    }
}

/// Density of the sum of independent variables with densities f and g.
///
/// Power-tailed inputs are convolved as periodic sequences with their
/// periodic images restored, then the images of the result are removed;
/// otherwise a zero-padded linear convolution is used.
pub fn convolve(f: &GriddedDensity, g: &GriddedDensity) -> Result<GriddedDensity> {
    let grid = match f.grid() {
        Some(gr) => gr,
        None => return Err(config("convolution needs a symmetric power-of-two grid")),
    };
    let g_owned;
    let g = if g.grid() == Some(grid) {
        g
    } else {
        g_owned = g.resample(&grid)?;
        &g_owned
    };
    let n = grid.n;
    let h = grid.h;
    let shift = n / 2;
    let (fl, fr) = f.tail_distances();
    let (gl, gr) = g.tail_distances();
    let distance = fl.min(fr).min(gl).min(gr).max(h);

    let tail = match (f.tail(), g.tail()) {
        (TailLaw::Power(a), TailLaw::Power(b)) => {
            Some(TailLaw::Power(a.convolve(b, distance, 0.5 * grid.half_width())))
        }
        (TailLaw::Power(a), _) => Some(TailLaw::Power(a.with_light_component(
            g.mean(),
            g.variance(),
            distance,
            0.5 * grid.half_width(),
        ))),
        (_, TailLaw::Power(b)) => Some(TailLaw::Power(b.with_light_component(
            f.mean(),
            f.variance(),
            distance,
            0.5 * grid.half_width(),
        ))),
        _ => None,
    };

    let mut values: Vec<f64>;
    let out_tail;
    if let Some(tail) = tail {
        let add = |d: &GriddedDensity| -> Vec<f64> {
            d.values().iter().zip(d.periodic_images()).map(|(v, i)| v + i).collect()
        };
        let cc = fourier::circular_convolve(&add(f), &add(g));
        values = (0..n).map(|k| cc[(k + shift) % n] * h).collect();
        let probe = GriddedDensity::from_parts(grid.x0(), h, vec![0.0; n], tail.clone());
        let images = probe.periodic_images();
        let radius = tail.radius();
        let center = tail.center();
        for (k, v) in values.iter_mut().enumerate() {
            *v -= images[k];
            let x = grid.x(k);
            if (x - center).abs() > radius {
                let model = tail.density(x);
                if *v < 0.5 * model {
                    *v = model;
                }
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        out_tail = tail;
    } else {
        let lin = fourier::linear_convolve(f.values(), g.values());
        values = (0..n).map(|k| (lin[k + shift] * h).max(0.0)).collect();
        out_tail = light_tail(f, g, &grid, &values);
    }
    GriddedDensity::new(grid.x0(), h, values, out_tail)
}

fn light_tail(f: &GriddedDensity, g: &GriddedDensity, grid: &GridSpec, values: &[f64]) -> TailLaw {
    let exp = |t: &TailLaw| match *t {
        TailLaw::Exponential { center, coefficient, rate, .. } => Some((center, coefficient, rate)),
        _ => None,
    };
    let (heavy, other) = match (exp(f.tail()), exp(g.tail())) {
        (None, None) => {
            return if matches!(f.tail(), TailLaw::Compact) && matches!(g.tail(), TailLaw::Compact) {
                TailLaw::Compact
            } else {
                TailLaw::Light
            };
        }
        (Some(ea), Some(eb)) if eb.2 < ea.2 => (eb, f),
        (Some(ea), _) => (ea, g),
        (None, Some(eb)) => (eb, f),
    };
    let (c_heavy, coefficient, r) = heavy;
    let half = grid.half_width();
    match exp(other.tail()) {
        Some((c, _, rb)) if rb <= r * (1.0 + 1e-9) => refit_exponential(c_heavy + c, r, grid, values),
        t => {
            // Exponential(C, r) * g has tail C M_g(r) e^(-r|x - c|), M_g taken about g's own center
            let c = t.map_or_else(|| other.mean(), |e| e.0);
            let m = (exp_moment(other, c, r) * exp_moment(other, c, -r)).sqrt();
            let center = c_heavy + c;
            TailLaw::Exponential { center, radius: 0.6 * (half - center.abs()), coefficient: coefficient * m, rate: r }
        }
    }
}

/// Integral of d(y) e^(s (y - c)); cells below the FFT noise floor are skipped
/// and an exponential tail is continued analytically past the cut.
fn exp_moment(d: &GriddedDensity, c: f64, s: f64) -> f64 {
    let peak = d.values().iter().cloned().fold(0.0, f64::max);
    let floor = 1e-14 * peak;
    let cut = match *d.tail() {
        TailLaw::Exponential { coefficient, rate, .. } => (coefficient / floor).ln().max(0.0) / rate,
        _ => f64::INFINITY,
    };
    let (dl, dr) = (c - d.x0(), d.x(d.values().len() - 1) - c);
    let mut sum = 0.0;
    for (k, &v) in d.values().iter().enumerate() {
        let u = d.x(k) - c;
        let inside = if cut.is_finite() { u.abs() <= cut } else { v > floor };
        if inside && v > 0.0 {
            sum += (v.ln() + s * u).exp();
        }
    }
    sum *= d.h();
    if let TailLaw::Exponential { coefficient, rate, .. } = *d.tail() {
        // right side grows like e^(s u), left like e^(-s u)
        for (edge, sign) in [(cut.min(dr), 1.0), (cut.min(dl), -1.0)] {
            let k = rate - sign * s;
            if k > 0.0 {
                sum += coefficient * (-k * edge).exp() / k;
            }
        }
    }
    sum
}

/// Equal rates give a u e^(-r u) tail; fit ln C = ln p + r |x - center| on the
/// outer part of the resolved region.
fn refit_exponential(center: f64, r: f64, grid: &GridSpec, values: &[f64]) -> TailLaw {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * peak;
    let reach = (0..values.len())
        .filter(|&k| values[k] > floor)
        .map(|k| (grid.x(k) - center).abs())
        .fold(0.0, f64::max);
    let (mut acc, mut cnt) = (0.0, 0usize);
    for (k, &v) in values.iter().enumerate() {
        let u = (grid.x(k) - center).abs();
        if u > 0.6 * reach && v > floor {
            acc += v.ln() + r * u;
            cnt += 1;
        }
    }
    if cnt == 0 {
        return TailLaw::Light;
    }
    TailLaw::Exponential { center, radius: 0.6 * reach, coefficient: (acc / cnt as f64).exp(), rate: r }
}

/// Differential entropy in nats: grid sum plus analytic tail entropy beyond the grid.
pub fn entropy(f: &GriddedDensity) -> f64 {
    let h = f.h();
    let body: f64 = f
        .values()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum::<f64>()
        * h;
    let (dl, dr) = f.tail_distances();
    let tails = if dl > 0.0 && dr > 0.0 {
        f.tail().entropy_beyond(dl) + f.tail().entropy_beyond(dr)
    } else {
        0.0
    };
    body + tails
}

/// Entropy of a law, realized on its default grid (KDE for empirical laws).
pub fn entropy_of(law: &RandomLaw, cfg: &GridConfig) -> Result<f64> {
    if law.is_degenerate() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(entropy(&realize_auto(law, cfg)?))
}

/// E[ln(1 + |X|)].
pub fn log_moment(law: &RandomLaw, cfg: &GridConfig) -> Result<f64> {
    law.validate()?;
    if let RandomLaw::Empirical(s) = law {
        return Ok(s.iter().map(|x| x.abs().ln_1p()).sum::<f64>() / s.len() as f64);
    }
    if law.is_point_mass_at_zero() {
        return Ok(0.0);
    }
    let f = realize_auto(law, cfg)?;
    Ok(expect_on_density(&f, |x| x.abs().ln_1p()))
}

/// E[w(X)] for a gridded density, including the analytic tails.
pub fn expect_on_density<W: Fn(f64) -> f64>(f: &GriddedDensity, w: W) -> f64 {
    let body: f64 = f.values().iter().enumerate().map(|(k, v)| v * w(f.x(k))).sum::<f64>() * f.h();
    let (dl, dr) = f.tail_distances();
    let c = f.tail().center();
    let tails = if dl > 0.0 && dr > 0.0 {
        f.tail().integrate_beyond(dl, |u| w(c - u)) + f.tail().integrate_beyond(dr, |u| w(c + u))
    } else {
        0.0
    };
    body + tails
}

/// Silverman-type bandwidth 0.9 (IQR/1.34) n^(-1/5), falling back to the
/// standard deviation when the IQR vanishes.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len().max(1) as f64;
    let (q1, q3) = quartiles(samples);
    let mut spread = (q3 - q1) / 1.34;
    if !(spread > 0.0) {
        let m = samples.iter().sum::<f64>() / n;
        spread = (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    }
    if !(spread > 0.0) {
        spread = 1.0;
    }
    0.9 * spread * n.powf(-0.2)
}

fn quartiles(s: &[f64]) -> (f64, f64) {
    let mut v: Vec<f64> = s.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    (quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.75))
}

pub(crate) fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - f) + v[i + 1] * f
    } else {
        v[i]
    }
}

/// Gaussian-kernel density estimate on `grid` (linear binning + FFT smoothing).
/// Samples outside the grid are dropped.
pub fn kde(samples: &[f64], grid: &GridSpec) -> Result<GriddedDensity> {
    if samples.is_empty() {
        return Err(domain("kernel density estimate needs samples"));
    }
    let bw = silverman_bandwidth(samples);
    if grid.h > bw {
        return Err(config(format!("grid spacing {} exceeds the KDE bandwidth {bw}", grid.h)));
    }
    let n = grid.n;
    let mut bins = vec![0.0; n];
    let x0 = grid.x0();
    let mut kept = 0usize;
    for &x in samples {
        let t = (x - x0) / grid.h;
        if t >= 0.0 && t < (n - 1) as f64 {
            let k = t.floor() as usize;
            let f = t - k as f64;
            bins[k] += 1.0 - f;
            bins[k + 1] += f;
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(config("no samples fall inside the KDE grid"));
    }
    let h = grid.h;
    let smoothed = fourier::apply_multiplier(&bins, h, |w| (-0.5 * (bw * w).powi(2)).exp());
    let values = smoothed.iter().map(|v| (v / h).max(0.0)).collect();
    GriddedDensity::new(x0, h, values, TailLaw::Light)
}

/// Grid for a KDE of the given samples.
pub fn kde_grid(samples: &[f64], cfg: &GridConfig) -> Result<GridSpec> {
    let law = RandomLaw::Empirical(Arc::new(samples.to_vec()));
    let bw = silverman_bandwidth(samples);
    let max_abs = samples.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let half = (max_abs + 12.0 * bw).min(cfg.extent_factor * law.scale()).max(12.0 * bw);
    let h = bw / 4.0;
    let n = ((2.0 * half / h).ceil() as usize).next_power_of_two().max(cfg.n_points).min(cfg.max_points);
    GridSpec::symmetric(n, half)
}

/// ln p at grid points, taken from the tail model where values fell to the floor.
pub(crate) fn ln_density_values(f: &GriddedDensity) -> Vec<f64> {
    let c = f.tail().center();
    f.values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if v > DENSITY_FLOOR {
                v.ln()
            } else {
                let lm = f.tail().ln_density_at_distance((f.x(k) - c).abs());
                if lm.is_finite() {
                    lm
                } else {
                    DENSITY_FLOOR.ln()
                }
            }
        })
        .collect()
}
