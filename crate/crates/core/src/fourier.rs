//! FFT plumbing shared by the density, stable and alpha-Fisher code.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::specfun::hurwitz_unchecked;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place forward transform, sum_k a_k e^{-2 pi i jk/n}.
pub(crate) fn forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place inverse transform without normalization, sum_j a_j e^{+2 pi i jk/n}.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Angular frequency of FFT bin `j` for `n` samples at spacing `h`.
#[inline]
pub(crate) fn omega(j: usize, n: usize, h: f64) -> f64 {
    let jj = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
    2.0 * PI * jj / (n as f64 * h)
}

pub(crate) fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Applies a real, even Fourier multiplier m(omega) to periodic samples.
pub(crate) fn apply_multiplier<M: Fn(f64) -> f64>(values: &[f64], h: f64, m: M) -> Vec<f64> {
    let n = values.len();
    let mut buf = to_complex(values);
    forward(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= m(omega(j, n, h));
    }
    inverse(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Circular convolution sum_j a_j b_{(k - j) mod n}.
pub(crate) fn circular_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let mut fa = to_complex(a);
    let mut fb = to_complex(b);
    forward(&mut fa);
    forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse(&mut fa);
    fa.iter().map(|c| c.re / n as f64).collect()
}

/// Linear convolution of two length-n sequences, length 2n (last entry zero).
pub(crate) fn linear_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut pa = a.to_vec();
    pa.resize(2 * n, 0.0);
    let mut pb = b.to_vec();
    pb.resize(2 * n, 0.0);
    circular_convolve(&pa, &pb)
}

/// Four-point Lagrange interpolation on uniform samples `v` at x0 + k h.
/// Returns None outside [x0, x0 + (n-1) h].
pub(crate) fn cubic_at(v: &[f64], x0: f64, h: f64, x: f64) -> Option<f64> {
    let n = v.len();
    let t = (x - x0) / h;
    if !(t >= 0.0) || t > (n - 1) as f64 {
        return None;
    }
    if n < 4 {
        let k = (t.floor() as usize).min(n - 2);
        let f = t - k as f64;
        return Some(v[k] * (1.0 - f) + v[k + 1] * f);
    }
    let k = (t.floor() as usize).clamp(1, n - 3);
    let f = t - k as f64;
    let (a, b, c, d) = (v[k - 1], v[k], v[k + 1], v[k + 2]);
    // Lagrange basis at nodes -1, 0, 1, 2
    let wa = -f * (f - 1.0) * (f - 2.0) / 6.0;
    let wb = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    let wc = -(f + 1.0) * f * (f - 2.0) / 2.0;
    let wd = (f + 1.0) * f * (f - 1.0) / 6.0;
    Some(a * wa + b * wb + c * wc + d * wd)
}

/// Sum over non-zero periods of a power-law tail:
/// sum_{m != 0} sum_i c_i |x - center + m T|^(-e_i), at every grid point.
///
/// The image sum is smooth on the scale of the period, so it is evaluated on
/// a coarse grid with Hurwitz zeta and interpolated.
pub(crate) fn power_images(
    terms: &[(f64, f64)],
    center: f64,
    period: f64,
    x0: f64,
    h: f64,
    n: usize,
) -> Vec<f64> {
    if terms.is_empty() {
        return vec![0.0; n];
    }
    let lo = x0 - center;
    let hi = x0 + (n - 1) as f64 * h - center;
    let coarse = 513usize;
    let step = (hi - lo) / (coarse - 1) as f64;
    let exact = |y: f64| -> f64 {
        let r = y / period;
        terms
            .iter()
            .map(|&(c, e)| {
                c * period.powf(-e) * (hurwitz_unchecked(e, 1.0 + r) + hurwitz_unchecked(e, 1.0 - r))
            })
            .sum()
    };
    if n <= coarse {
        return (0..n).map(|k| exact(lo + k as f64 * h)).collect();
    }
    let samples: Vec<f64> = (0..coarse).map(|i| exact(lo + i as f64 * step)).collect();
    (0..n)
        .map(|k| {
            let y = lo + k as f64 * h;
            cubic_at(&samples, lo, step, y).unwrap_or_else(|| exact(y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_identity_round_trip() {
        let v: Vec<f64> = (0..64).map(|k| ((k as f64) * 0.3).sin()).collect();
        let w = apply_multiplier(&v, 0.1, |_| 1.0);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_convolution_matches_direct() {
        let a = [1.0, 2.0, 3.0, 0.5];
        let b = [0.0, 1.0, -1.0, 2.0];
        let c = linear_convolve(&a, &b);
        for k in 0..7 {
            let mut d = 0.0;
            for j in 0..4 {
                if k >= j && k - j < 4 {
                    d += a[j] * b[k - j];
                }
            }
            assert!((c[k] - d).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_is_exact_for_cubics() {
        let v: Vec<f64> = (0..10).map(|k| (k as f64).powi(3) - 2.0 * k as f64).collect();
        let x: f64 = 4.37;
        let got = cubic_at(&v, 0.0, 1.0, x).unwrap();
        assert!((got - (x.powi(3) - 2.0 * x)).abs() < 1e-10);
    }

    #[test]
    fn images_match_direct_sum() {
        let terms = [(0.3, 2.5), (-0.1, 4.0)];
        let (period, n, h) = (20.0, 1024usize, 20.0 / 1024.0);
        let x0 = -10.0;
        let img = power_images(&terms, 0.0, period, x0, h, n);
        for &k in &[0usize, 100, 512, 1000] {
            let x = x0 + k as f64 * h;
            let mut d = 0.0;
            let big = 200_000i64;
            for m in 1..big {
                for s in [-1.0, 1.0] {
                    let y = (x + s * m as f64 * period).abs();
                    d += terms.iter().map(|&(c, e)| c * y.powf(-e)).sum::<f64>();
                }
            }
            // remaining periods, midpoint integral
            let m = big as f64 - 0.5;
            d += terms.iter().map(|&(c, e)| 2.0 * c * period.powf(-e) * m.powf(1.0 - e) / (e - 1.0)).sum::<f64>();
            assert!((img[k] - d).abs() < 1e-9 * d.abs().max(1e-6), "k={k}: {} vs {d}", img[k]);
        }
    }
}
