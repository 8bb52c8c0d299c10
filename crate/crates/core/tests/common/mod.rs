//! Shared brute-force helpers for the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rayon::prelude::*;

/// Composite Simpson over any sample count. An odd interval count opens
/// with the 3/8 rule on the first three intervals, the opposite end from the
/// library rule, so the two do not share truncation patterns.
pub fn simpson_any(f: &[f64], h: f64) -> f64 {
    let n = f.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (f[0] + f[1]),
        _ if n.is_multiple_of(2) => {
            let mut acc = f[0] + f[n];
            for (i, v) in f.iter().enumerate().take(n).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            acc * h / 3.0
        }
        _ => {
            let head = 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
            head + simpson_any(&f[3..], h)
        }
    }
}

/// Zero-temperature Ohmic correlation (λ/2)Ω²/(1 + iΩs)².
pub fn kappa_vacuum(lambda: f64, cutoff: f64, s: f64) -> Complex64 {
    let z = Complex64::new(1.0, cutoff * s);
    Complex64::from(0.5 * lambda * cutoff * cutoff) / (z * z)
}

/// (n, m, l, k) at the end of [0, t_max] by direct nested quadrature: every
/// inner integral and every running n(t₁) is re-integrated from scratch,
/// costing O(N²).
pub fn direct_coefficients(
    b: f64,
    alpha: f64,
    t_max: f64,
    intervals: usize,
    kappa: impl Fn(f64) -> Complex64 + Sync,
) -> [f64; 4] {
    let h = t_max / intervals as f64;
    let times: Vec<f64> = (0..=intervals).map(|j| j as f64 * h).collect();
    let kap: Vec<Complex64> = times.par_iter().map(|&t| kappa(t)).collect();
    let fc: Vec<f64> = times.iter().zip(&kap).map(|(t, k)| (b * t).cos() * k.re).collect();
    let fs: Vec<f64> = times.iter().zip(&kap).map(|(t, k)| (b * t).sin() * k.re).collect();
    let f0: Vec<f64> = kap.iter().map(|k| k.re).collect();
    let ft: Vec<f64> = times
        .iter()
        .zip(&kap)
        .map(|(t, k)| (Complex64::from_polar(1.0, -b * t) * k).re)
        .collect();
    let inner = |f: &Vec<f64>| -> Vec<f64> { (0..=intervals).into_par_iter().map(|i| simpson_any(&f[..=i], h)).collect() };
    let ic = inner(&fc);
    let is = inner(&fs);
    let i0 = inner(&f0);
    let it = inner(&ft);
    let (s2, c2) = (alpha.sin().powi(2), alpha.cos().powi(2));
    let n_run: Vec<f64> = (0..=intervals).into_par_iter().map(|i| 4.0 * s2 * simpson_any(&ic[..=i], h)).collect();
    let n = n_run[intervals];
    let l_inner: Vec<f64> = ic.iter().zip(&i0).map(|(c, z)| 4.0 * c2 * z + 2.0 * s2 * c).collect();
    let l = simpson_any(&l_inner, h);
    let k = 2.0 * s2 * simpson_any(&is, h);
    let m_inner: Vec<f64> = it.iter().zip(&n_run).map(|(v, nv)| v * nv.exp()).collect();
    let m = 2.0 * s2 * simpson_any(&m_inner, h);
    [n, m, l, k]
}

/// Relative agreement with an absolute floor for near-zero values.
pub fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(a.abs()) || (a - b).abs() <= floor
}

/// Interior local extrema of a sampled curve.
pub fn count_extrema(y: &[f64]) -> usize {
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).filter(|d| d.abs() > 1e-15).collect();
    d.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

/// l′(T₀) for a general path by direct nested quadrature, given the mixing
/// angle along the path.
pub fn direct_path_dephasing(
    b: f64,
    alpha: impl Fn(f64) -> f64 + Sync,
    t_max: f64,
    intervals: usize,
    kappa: impl Fn(f64) -> Complex64 + Sync,
) -> f64 {
    let h = t_max / intervals as f64;
    let times: Vec<f64> = (0..=intervals).map(|j| j as f64 * h).collect();
    let re: Vec<f64> = times.iter().map(|&t| kappa(t).re).collect();
    let (sa, ca): (Vec<f64>, Vec<f64>) = times.iter().map(|&t| alpha(t).sin_cos()).unzip();
    let inner: Vec<f64> = (0..=intervals)
        .into_par_iter()
        .map(|i| {
            let f: Vec<f64> = (0..=i)
                .map(|j| {
                    let lag = i - j;
                    (4.0 * ca[i] * ca[lag] + 2.0 * sa[i] * sa[lag] * (b * times[j]).cos()) * re[j]
                })
                .collect();
            simpson_any(&f, h)
        })
        .collect();
    simpson_any(&inner, h)
}

/// Thermal Ohmic correlation from the image-sum representation
/// κ_T(s) = λ Σ_{n≥1} Re 1/(1/Ω + n/T + is)², closed with an
/// Euler-Maclaurin tail, plus the vacuum part.
pub fn kappa_thermal_series(lambda: f64, cutoff: f64, temperature: f64, s: f64, terms: usize) -> Complex64 {
    let mut sum = 0.0;
    for n in 1..=terms {
        let z = Complex64::new(1.0 / cutoff + n as f64 / temperature, s);
        sum += (Complex64::from(1.0) / (z * z)).re;
    }
    let zt = Complex64::new(1.0 / cutoff + (terms as f64 + 0.5) / temperature, s);
    sum += (Complex64::from(temperature) / zt).re;
    kappa_vacuum(lambda, cutoff, s) + lambda * sum
}
