//! Ohmic bosonic bath: spectral density, Bose occupation and the force
//! autocorrelation function κ(s).
//!
//! κ(s) = ∫₀^∞ J(ω)[2N(ω)cos(ωs) + e^{−iωs}] dω splits into a vacuum part,
//! which has the closed form (λ/2)Ω²/(1 + iΩs)² for the Ohmic spectrum, and a
//! thermal part 2∫ J N cos(ωs) dω. The thermal part is a pure cosine transform
//! of a smooth, exponentially decaying function and is evaluated with the
//! Filon-Simpson rule on a truncated frequency interval.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{filon, filon_with_estimate};

/// Default relative tolerance for thermal-kernel quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Ohmic bath parameters in units with ħ = k_B = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// Dimensionless coupling strength λ.
    pub lambda: f64,
    /// Cutoff frequency Ω.
    pub cutoff: f64,
    /// Temperature T.
    pub temperature: f64,
}

/// One sample of the autocorrelation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSample {
    pub s: f64,
    pub value: Complex64,
}

impl BathSpec {
    pub fn new(lambda: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Domain(format!("coupling lambda must be >= 0, got {lambda}")));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff must be > 0, got {cutoff}")));
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
        }
        Ok(Self { lambda, cutoff, temperature })
    }

    /// Builds a bath from the integrated noise power λΩ²/2 instead of λ, so
    /// that cutoff sweeps hold the total spectral weight fixed.
    pub fn from_lambda_norm(lambda_norm: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff must be > 0, got {cutoff}")));
        }
        Self::new(2.0 * lambda_norm / (cutoff * cutoff), cutoff, temperature)
    }

    /// ∫₀^∞ J(ω) dω = λΩ²/2.
    pub fn lambda_norm(&self) -> f64 {
        0.5 * self.lambda * self.cutoff * self.cutoff
    }

    /// Noise correlation time τ_c = 1/Ω.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.cutoff
    }
}

/// Ohmic spectral density J(ω) = (λ/2) ω e^{−ω/Ω}.
pub fn spectral_density(spec: &BathSpec, omega: f64) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::Domain(format!("spectral density needs omega >= 0, got {omega}")));
    }
    Ok(ohmic(spec, omega))
}

#[inline]
fn ohmic(spec: &BathSpec, omega: f64) -> f64 {
    0.5 * spec.lambda * omega * (-omega / spec.cutoff).exp()
}

/// Bose-Einstein occupation N(ω) = 1/(e^{ω/T} − 1), exactly zero at T = 0.
pub fn bose_occupation(spec: &BathSpec, omega: f64) -> Result<f64> {
    if omega.is_nan() || omega <= 0.0 {
        return Err(Error::Domain(format!("Bose occupation needs omega > 0, got {omega}")));
    }
    if spec.temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / spec.temperature).exp_m1())
}

/// Vacuum part ∫ J(ω) e^{−iωs} dω = (λ/2)Ω²/(1 + iΩs)².
pub fn vacuum_correlation(spec: &BathSpec, s: f64) -> Complex64 {
    let z = Complex64::new(1.0, spec.cutoff * s);
    Complex64::from(spec.lambda_norm()) / (z * z)
}

/// The bath autocorrelation κ(s).
///
/// At T = 0 this is the closed form. At T > 0 the thermal cosine transform is
/// added by quadrature, and an error estimate above [`DEFAULT_TOLERANCE`]
/// (relative to κ_T(0)) is reported as [`Error::NumericalAccuracy`].
pub fn correlation(spec: &BathSpec, s: f64) -> Result<Complex64> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("correlation needs a finite time, got {s}")));
    }
    let vac = vacuum_correlation(spec, s);
    if spec.temperature == 0.0 || spec.lambda == 0.0 {
        return Ok(vac);
    }
    let kernel = ThermalKernel::for_range(spec, DEFAULT_TOLERANCE, s.abs())?;
    Ok(vac + kernel.eval_checked(s)?)
}

/// κ(s) on a list of times. The thermal kernel is prepared once and shared
/// across a parallel map, so the result does not depend on scheduling.
pub fn sample_correlation(spec: &BathSpec, times: &[f64]) -> Result<Vec<Complex64>> {
    if spec.temperature == 0.0 || spec.lambda == 0.0 {
        return Ok(times.iter().map(|&s| vacuum_correlation(spec, s)).collect());
    }
    let s_max = times.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let kernel = ThermalKernel::for_range(spec, DEFAULT_TOLERANCE, s_max)?;
    kernel.eval_checked(s_max)?;
    Ok(times
        .par_iter()
        .map(|&s| vacuum_correlation(spec, s) + kernel.eval(s))
        .collect())
}

/// Tail-truncation exponent: e^{−L} bounds the neglected weight.
fn truncation_exponent(tol: f64) -> f64 {
    (10.0 * (1.0 / tol).ln()).max(40.0)
}

/// Pre-sampled integrand of the thermal cosine transform
/// κ_T(s) = ∫₀^{ω_max} λ ω e^{−ω/Ω} N(ω) cos(ωs) dω.
#[derive(Debug, Clone)]
pub struct ThermalKernel {
    samples: Vec<f64>,
    step: f64,
    scale: f64,
    tolerance: f64,
}

impl ThermalKernel {
    /// Kernel accurate at s = 0; see [`for_range`](Self::for_range).
    pub fn new(spec: &BathSpec, tolerance: f64) -> Result<Self> {
        Self::for_range(spec, tolerance, 0.0)
    }

    /// Chooses ω_max from the combined decay rate 1/Ω + 1/T and refines the
    /// frequency grid until the halving estimate meets `tolerance` at nine
    /// evenly spaced probe times in [0, s_max].
    pub fn for_range(spec: &BathSpec, tolerance: f64, s_max: f64) -> Result<Self> {
        if spec.temperature <= 0.0 {
            return Err(Error::Domain("thermal kernel needs T > 0".into()));
        }
        let decay = 1.0 / spec.cutoff + 1.0 / spec.temperature;
        let omega_max = truncation_exponent(tolerance) / decay;
        let integrand = |w: f64| -> f64 {
            if w == 0.0 {
                // lim ω→0 of 2 J N = λT
                spec.lambda * spec.temperature
            } else {
                spec.lambda * w * (-w / spec.cutoff).exp() / (w / spec.temperature).exp_m1()
            }
        };
        let scale = thermal_scale(spec);
        let mut intervals = 1024usize;
        loop {
            let step = omega_max / intervals as f64;
            let samples: Vec<f64> = (0..=intervals).map(|j| integrand(j as f64 * step)).collect();
            let est = (0..=8)
                .map(|k| filon_with_estimate(&samples, 0.0, step, s_max * k as f64 / 8.0).1)
                .fold(0.0, f64::max);
            if est <= tolerance * scale {
                return Ok(Self { samples, step, scale, tolerance });
            }
            if intervals >= 1 << 20 {
                return Err(Error::NumericalAccuracy {
                    what: "thermal correlation quadrature".into(),
                    estimate: est / scale,
                    tolerance,
                });
            }
            intervals *= 2;
        }
    }

    /// Thermal contribution at time `s` (real and even in `s`).
    pub fn eval(&self, s: f64) -> f64 {
        filon(&self.samples, 0.0, self.step, s.abs()).0
    }

    /// As [`eval`](Self::eval) with a halving error estimate.
    pub fn eval_checked(&self, s: f64) -> Result<f64> {
        let ((c, _), est) = filon_with_estimate(&self.samples, 0.0, self.step, s.abs());
        if est > self.tolerance * self.scale {
            return Err(Error::NumericalAccuracy {
                what: format!("thermal correlation at s = {s}"),
                estimate: est / self.scale,
                tolerance: self.tolerance,
            });
        }
        Ok(c)
    }
}

/// Magnitude of κ_T(0), used to make tolerances relative. Bounded below by
/// the vacuum weight so that very cold baths do not demand absurd accuracy.
fn thermal_scale(spec: &BathSpec) -> f64 {
    let decay = 1.0 / spec.cutoff + 1.0 / spec.temperature;
    // λT/decay is the small-ω estimate of ∫ 2JN
    (spec.lambda * spec.temperature / decay).max(spec.lambda_norm()).max(f64::MIN_POSITIVE)
}

/// κ(s) from direct Filon quadrature of the full defining integral, without
/// the vacuum closed form. Used to validate that closed form.
pub fn correlation_by_quadrature(spec: &BathSpec, s: f64, tolerance: f64) -> Result<Complex64> {
    let omega_max = truncation_exponent(tolerance) * spec.cutoff;
    let scale = spec.lambda_norm().max(f64::MIN_POSITIVE);
    let mut intervals = 2048usize;
    loop {
        let h = omega_max / intervals as f64;
        let mut even = Vec::with_capacity(intervals + 1);
        let mut odd = Vec::with_capacity(intervals + 1);
        for j in 0..=intervals {
            let w = j as f64 * h;
            let j_w = ohmic(spec, w);
            let two_n_j = if spec.temperature == 0.0 {
                0.0
            } else if w == 0.0 {
                spec.lambda * spec.temperature
            } else {
                2.0 * j_w / (w / spec.temperature).exp_m1()
            };
            even.push(j_w + two_n_j);
            odd.push(j_w);
        }
        let ((c, _), est_c) = filon_with_estimate(&even, 0.0, h, s);
        let ((_, sn), est_s) = filon_with_estimate(&odd, 0.0, h, s);
        let est = est_c.hypot(est_s);
        if est <= tolerance * scale {
            return Ok(Complex64::new(c, -sn));
        }
        if intervals >= 1 << 22 {
            return Err(Error::NumericalAccuracy {
                what: format!("correlation quadrature at s = {s}"),
                estimate: est / scale,
                tolerance,
            });
        }
        intervals *= 2;
    }
}

/// Integrated spectrum ∫₀^∞ J dω by composite Simpson quadrature.
pub fn integrated_spectrum_by_quadrature(spec: &BathSpec) -> f64 {
    let omega_max = truncation_exponent(1e-12) * spec.cutoff;
    let n = 1 << 16;
    let h = omega_max / n as f64;
    let f: Vec<f64> = (0..=n).map(|j| ohmic(spec, j as f64 * h)).collect();
    crate::quadrature::simpson(&f, h)
}
