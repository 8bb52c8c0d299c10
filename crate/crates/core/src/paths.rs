//! Closed field loops θ(t), φ(t) over one period and their Berry phase.
//!
//! Three shapes are supported: the uniform circle θ = const, φ = Ω₀t; the
//! tilted circle obtained by rotating a cone of half-angle θ′ about the x axis
//! by γ; and user samples interpolated periodically. Every path can be
//! traversed backwards, which is how the second half of the echo protocol is
//! built.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::Ket;

/// Minimum sin θ tolerated along a loop before the azimuth is considered
/// undefined.
const POLE_TOLERANCE: f64 = 1e-6;
/// Samples per period of the unwrapped-azimuth lookup table.
const PHI_TABLE: usize = 4096;

/// Cone of half-angle θ′ about an axis z′ tilted from z by γ (rotation about
/// x), traversed at angular speed ω₀ in φ′.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedCircle {
    pub theta_prime: f64,
    pub gamma: f64,
    pub omega_0: f64,
}

impl TiltedCircle {
    /// Unit field direction and its first two time derivatives.
    fn kinematics(&self, t: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (sg, cg) = self.gamma.sin_cos();
        let (stp, ctp) = self.theta_prime.sin_cos();
        let w = self.omega_0;
        let (sp, cp) = (w * t).sin_cos();
        let n = [stp * cp, cg * stp * sp + sg * ctp, cg * ctp - sg * stp * sp];
        let dn = [-w * stp * sp, w * cg * stp * cp, -w * sg * stp * cp];
        let w2 = w * w;
        let ddn = [-w2 * n[0], -w2 * (n[1] - sg * ctp), -w2 * (n[2] - cg * ctp)];
        (n, dn, ddn)
    }

    /// Time of the first pole visit, if the cone passes through one.
    fn pole_time(&self) -> Option<f64> {
        let period = TAU / self.omega_0.abs();
        let at_phase = |phase: f64| -> f64 {
            let t = phase / self.omega_0.abs();
            if self.omega_0 > 0.0 {
                t
            } else {
                (period - t) % period
            }
        };
        let mut hits = Vec::new();
        // z is smallest at φ′ = π/2 (value cos(θ′ + γ)) and largest at 3π/2
        if (self.theta_prime + self.gamma - PI).abs() < POLE_TOLERANCE {
            hits.push(at_phase(0.5 * PI));
        }
        if (self.theta_prime - self.gamma).abs() < POLE_TOLERANCE {
            hits.push(at_phase(1.5 * PI));
        }
        hits.into_iter().min_by(f64::total_cmp)
    }
}

/// Angles and rates of a path at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
    pub phi_ddot: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Circle { theta: f64, omega0: f64 },
    Tilted { tc: TiltedCircle, phi_table: Vec<f64>, winding: i64 },
    Sampled { theta: Vec<f64>, phi_periodic: Vec<f64>, winding: i64 },
}

/// A closed adiabatic field loop on [0, T₀].
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    shape: Shape,
    period: f64,
    reversed: bool,
}

/// Uniform circle θ = const, φ = Ω₀t.
pub fn circle_path(theta: f64, omega0: f64) -> Result<PathSpec> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidPath(format!("polar angle {theta} outside [0, pi]")));
    }
    if !(omega0.is_finite() && omega0 != 0.0) {
        return Err(Error::InvalidPath(format!("rotation rate must be nonzero, got {omega0}")));
    }
    Ok(PathSpec { shape: Shape::Circle { theta, omega0 }, period: TAU / omega0.abs(), reversed: false })
}

/// The tilted circle cos θ(t) = cos γ cos θ′ − sin γ sin θ′ sin(ω₀t), with the
/// azimuth unwrapped continuously.
pub fn tilted_circle_path(tc: TiltedCircle) -> Result<PathSpec> {
    if !(tc.theta_prime > 0.0 && tc.theta_prime < PI) {
        return Err(Error::InvalidPath(format!("cone angle {} outside (0, pi)", tc.theta_prime)));
    }
    if !(0.0..=PI).contains(&tc.gamma) {
        return Err(Error::InvalidPath(format!("tilt angle {} outside [0, pi]", tc.gamma)));
    }
    if !(tc.omega_0.is_finite() && tc.omega_0 != 0.0) {
        return Err(Error::InvalidPath(format!("angular speed must be nonzero, got {}", tc.omega_0)));
    }
    if let Some(t) = tc.pole_time() {
        return Err(Error::PoleCrossing { t });
    }
    let period = TAU / tc.omega_0.abs();
    let h = period / PHI_TABLE as f64;
    let mut table: Vec<f64> = Vec::with_capacity(PHI_TABLE + 1);
    for j in 0..=PHI_TABLE {
        let (n, _, _) = tc.kinematics(j as f64 * h);
        let raw = n[1].atan2(n[0]);
        let value = match table.last() {
            None => raw,
            Some(&prev) => raw + TAU * ((prev - raw) / TAU).round(),
        };
        table.push(value);
    }
    let winding = ((table[PHI_TABLE] - table[0]) / TAU).round() as i64;
    Ok(PathSpec { shape: Shape::Tilted { tc, phi_table: table, winding }, period, reversed: false })
}

impl PathSpec {
    /// A loop given by samples θ_j, φ_j at t_j = jT₀/N, j = 0..=N. The last
    /// sample must close the loop (θ_N = θ_0, φ_N ≡ φ_0 mod 2π). φ may be
    /// wrapped; it is unwrapped here.
    pub fn from_samples(theta: Vec<f64>, phi: Vec<f64>, period: f64) -> Result<Self> {
        let n = theta.len();
        if n < 5 || phi.len() != n {
            return Err(Error::InvalidPath("need at least 5 matching theta/phi samples".into()));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidPath(format!("period must be > 0, got {period}")));
        }
        if theta.iter().any(|t| !(0.0..=PI).contains(t)) {
            return Err(Error::InvalidPath("theta samples must lie in [0, pi]".into()));
        }
        let mut unwrapped: Vec<f64> = Vec::with_capacity(n);
        for &p in &phi {
            let v = match unwrapped.last() {
                None => p,
                Some(&prev) => p + TAU * ((prev - p) / TAU).round(),
            };
            unwrapped.push(v);
        }
        let span = unwrapped[n - 1] - unwrapped[0];
        let winding = (span / TAU).round();
        if (theta[n - 1] - theta[0]).abs() > 1e-9 || (span - TAU * winding).abs() > 1e-9 {
            return Err(Error::InvalidPath("samples do not close the loop".into()));
        }
        let h = period / (n - 1) as f64;
        if let Some(j) = theta.iter().position(|t| t.sin() < POLE_TOLERANCE) {
            return Err(Error::PoleCrossing { t: j as f64 * h });
        }
        let phi_periodic = unwrapped
            .iter()
            .enumerate()
            .map(|(j, &p)| p - TAU * winding * j as f64 / (n - 1) as f64)
            .collect();
        Ok(Self {
            shape: Shape::Sampled { theta, phi_periodic, winding: winding as i64 },
            period,
            reversed: false,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Net number of turns of φ over one period (sign follows traversal).
    pub fn winding(&self) -> i64 {
        let w = match &self.shape {
            Shape::Circle { omega0, .. } => omega0.signum() as i64,
            Shape::Tilted { winding, .. } | Shape::Sampled { winding, .. } => *winding,
        };
        if self.reversed {
            -w
        } else {
            w
        }
    }

    /// Angles and rates at time t, extended periodically outside [0, T₀].
    pub fn point(&self, t: f64) -> PathPoint {
        if self.reversed {
            let p = self.forward_point(self.period - t);
            PathPoint { theta_dot: -p.theta_dot, phi_dot: -p.phi_dot, ..p }
        } else {
            self.forward_point(t)
        }
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        self.point(t).theta
    }

    pub fn phi_at(&self, t: f64) -> f64 {
        self.point(t).phi
    }

    /// (t_j, θ_j, φ_j) at `n + 1` uniform samples over one period.
    pub fn samples(&self, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.period / n as f64;
        let mut ts = Vec::with_capacity(n + 1);
        let mut th = Vec::with_capacity(n + 1);
        let mut ph = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = j as f64 * h;
            let p = self.point(t);
            ts.push(t);
            th.push(p.theta);
            ph.push(p.phi);
        }
        (ts, th, ph)
    }

    fn forward_point(&self, t: f64) -> PathPoint {
        let turns = (t / self.period).floor();
        let tr = t - turns * self.period;
        let offset = TAU * turns * self.forward_winding() as f64;
        match &self.shape {
            Shape::Circle { theta, omega0 } => PathPoint {
                theta: *theta,
                phi: omega0 * t,
                theta_dot: 0.0,
                phi_dot: *omega0,
                phi_ddot: 0.0,
            },
            Shape::Tilted { tc, phi_table, .. } => {
                let (n, dn, ddn) = tc.kinematics(tr);
                let rho2 = n[0] * n[0] + n[1] * n[1];
                let theta = n[2].clamp(-1.0, 1.0).acos();
                let cross = n[0] * dn[1] - n[1] * dn[0];
                let phi_dot = cross / rho2;
                let dcross = n[0] * ddn[1] - n[1] * ddn[0];
                let drho2 = 2.0 * (n[0] * dn[0] + n[1] * dn[1]);
                let phi_ddot = dcross / rho2 - cross * drho2 / (rho2 * rho2);
                let theta_dot = -dn[2] / rho2.sqrt();
                let h = self.period / PHI_TABLE as f64;
                let j = ((tr / h).round() as usize).min(PHI_TABLE);
                let raw = n[1].atan2(n[0]);
                let phi = raw + TAU * ((phi_table[j] - raw) / TAU).round();
                PathPoint { theta, phi: phi + offset, theta_dot, phi_dot, phi_ddot }
            }
            Shape::Sampled { theta, phi_periodic, winding } => {
                let m = theta.len() - 1;
                let h = self.period / m as f64;
                let (th, dth, _) = periodic_cubic(theta, h, tr);
                let (ph, dph, ddph) = periodic_cubic(phi_periodic, h, tr);
                let rate = TAU * *winding as f64 / self.period;
                PathPoint {
                    theta: th.clamp(0.0, PI),
                    phi: ph + rate * tr + offset,
                    theta_dot: dth,
                    phi_dot: dph + rate,
                    phi_ddot: ddph,
                }
            }
        }
    }

    fn forward_winding(&self) -> i64 {
        match &self.shape {
            Shape::Circle { .. } => 0, // φ = Ω₀t is already continuous
            Shape::Tilted { winding, .. } | Shape::Sampled { winding, .. } => *winding,
        }
    }

    /// Largest polar-angle distance check: the smallest sin θ on `n` samples.
    pub fn min_sin_theta(&self, n: usize) -> (f64, f64) {
        let h = self.period / n as f64;
        (0..=n)
            .map(|j| {
                let t = j as f64 * h;
                (self.theta_at(t).sin(), t)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((1.0, 0.0))
    }
}

/// Catmull-Rom interpolation of periodic samples (first and last equal):
/// value, first and second derivative.
fn periodic_cubic(y: &[f64], h: f64, t: f64) -> (f64, f64, f64) {
    let m = y.len() - 1;
    let at = |j: isize| y[j.rem_euclid(m as isize) as usize];
    let x = t / h;
    let j = (x.floor() as isize).clamp(0, m as isize - 1);
    let u = x - j as f64;
    let (p0, p1, p2, p3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
    let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    let c = -0.5 * p0 + 0.5 * p2;
    let v = ((a * u + b) * u + c) * u + p1;
    let dv = ((3.0 * a * u + 2.0 * b) * u + c) / h;
    let ddv = (6.0 * a * u + 2.0 * b) / (h * h);
    (v, dv, ddv)
}

/// θ₂(t) = θ₁(T₀ − t), φ₂(t) = φ₁(T₀ − t).
pub fn reversed_path(path: &PathSpec) -> PathSpec {
    PathSpec { reversed: !path.reversed, ..path.clone() }
}

/// Φ = ½∮(1 − cos θ) dφ over the unwrapped azimuth, by the periodic
/// trapezoid rule with at least 4096 samples, refined until halving changes
/// the result by less than 10⁻¹².
pub fn berry_phase(path: &PathSpec) -> Result<f64> {
    let integrand = |t: f64| {
        let p = path.point(t);
        0.5 * (1.0 - p.theta.cos()) * p.phi_dot
    };
    if let Shape::Sampled { theta, .. } = &path.shape {
        // Midpoint sum on the given samples; the interpolant adds nothing.
        let (_, th, ph) = path.samples(theta.len() - 1);
        let mut sum = 0.0;
        for j in 0..th.len() - 1 {
            let c = 0.5 * (th[j].cos() + th[j + 1].cos());
            sum += 0.5 * (1.0 - c) * (ph[j + 1] - ph[j]);
        }
        return Ok(sum);
    }
    let trapezoid = |n: usize| {
        let h = path.period / n as f64;
        (0..n).map(|j| integrand(j as f64 * h)).sum::<f64>() * h
    };
    let mut n = 4096;
    let mut prev = trapezoid(n / 2);
    loop {
        let cur = trapezoid(n);
        if (cur - prev).abs() <= 1e-12 * (1.0 + cur.abs()) {
            return Ok(cur);
        }
        if n >= 1 << 22 {
            return Err(Error::NumericalAccuracy {
                what: "Berry phase line integral".into(),
                estimate: (cur - prev).abs(),
                tolerance: 1e-12,
            });
        }
        prev = cur;
        n *= 2;
    }
}

/// Instantaneous eigenstates (|g⟩, |e⟩) of a field pointing along (θ, φ),
/// with the same phase convention as the uniform-circle eigenstates.
pub fn eigenstates_along(theta: f64, phi: f64) -> (Ket, Ket) {
    let (s, c) = (0.5 * theta).sin_cos();
    let ph = Complex64::from_polar(1.0, phi);
    let e = Ket::new(Complex64::from(c), ph * s);
    let g = Ket::new(ph.conj() * s, Complex64::from(-c));
    (g, e)
}

/// Mixing angle, gap and their rates in the co-rotating frame of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    /// α(t) = atan2(B sin θ, B cos θ − φ̇).
    pub alpha: f64,
    /// E(t) = |(B sin θ, B cos θ − φ̇)|.
    pub gap: f64,
    pub alpha_dot: f64,
    /// Effective splitting including the frame-rotation term, √(E² + α̇²).
    pub gap_effective: f64,
}

pub fn local_frame(b: f64, p: &PathPoint) -> LocalFrame {
    let (st, ct) = p.theta.sin_cos();
    let u = b * st;
    let v = b * ct - p.phi_dot;
    let du = b * ct * p.theta_dot;
    let dv = -b * st * p.theta_dot - p.phi_ddot;
    let r2 = u * u + v * v;
    let alpha_dot = (v * du - u * dv) / r2;
    let gap = r2.sqrt();
    LocalFrame { alpha: u.atan2(v), gap, alpha_dot, gap_effective: gap.hypot(alpha_dot) }
}
