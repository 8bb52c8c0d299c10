//! Drive parameters, rotating-frame angles, instantaneous eigenstates and
//! the 2×2 density matrix with its frame maps.
//!
//! The chain of frames is
//! lab → U₁(t) = e^{iσ_zΩ₀t/2} (co-rotating) → U₂ = e^{iσ_yα/2} (tilted, the
//! "tilde" frame) → e^{iσ_zEt/2} (interaction picture). A tilde-frame state
//! maps back to the lab as ρ = V ρ̃ V† with V = U₁†U₂†e^{−iσ_zEt/2}.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Ket = Vector2<Complex64>;
pub type Op = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Magnetic field of magnitude `b` at polar angle `theta`, rotating about z
/// at the signed rate `omega0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub b: f64,
    pub theta: f64,
    pub omega0: f64,
}

impl DriveParams {
    pub fn new(b: f64, theta: f64, omega0: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("field magnitude B must be > 0, got {b}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("polar angle must lie in [0, pi], got {theta}")));
        }
        if !(omega0.is_finite() && omega0 != 0.0) {
            return Err(Error::Domain(format!("rotation rate must be finite and nonzero, got {omega0}")));
        }
        Ok(Self { b, theta, omega0 })
    }

    /// The same loop traversed backwards (Ω₀ → −Ω₀).
    pub fn reversed(&self) -> Self {
        Self { omega0: -self.omega0, ..*self }
    }

    /// T₀ = 2π/|Ω₀|.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0.abs()
    }

    /// Adiabatic time scale τ₀ = 1/|Ω₀|.
    pub fn adiabatic_time(&self) -> f64 {
        1.0 / self.omega0.abs()
    }

    /// Lab-frame Hamiltonian H_s(t) = (B/2) n(t)·σ.
    pub fn hamiltonian(&self, t: f64) -> Op {
        let (st, ct) = self.theta.sin_cos();
        let ph = Complex64::from_polar(1.0, self.omega0 * t);
        let h = 0.5 * self.b;
        Op::new(c(h * ct), c(h * st) * ph.conj(), c(h * st) * ph, c(-h * ct))
    }
}

/// Tilt angle α, gap E and ζ = α − θ of the co-rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameAngles {
    pub alpha: f64,
    pub gap: f64,
    pub zeta: f64,
}

/// α = atan2(B sinθ, B cosθ − Ω₀) and E = |(B sinθ, B cosθ − Ω₀)|.
pub fn frame_angles(drive: &DriveParams) -> Result<FrameAngles> {
    let y = drive.b * drive.theta.sin();
    let x = drive.b * drive.theta.cos() - drive.omega0;
    let gap = y.hypot(x);
    if gap <= 1e-14 * drive.b {
        return Err(Error::DegenerateFrame);
    }
    let alpha = y.atan2(x);
    Ok(FrameAngles { alpha, gap, zeta: alpha - drive.theta })
}

/// Instantaneous eigenstates (|g(t)⟩, |e(t)⟩) of H_s(t) with the phase
/// convention |e⟩ = (cos θ/2, sin θ/2 e^{iΩ₀t}), |g⟩ = (sin θ/2 e^{−iΩ₀t}, −cos θ/2).
pub fn instantaneous_eigenstates(drive: &DriveParams, t: f64) -> (Ket, Ket) {
    let (s, co) = (0.5 * drive.theta).sin_cos();
    let ph = Complex64::from_polar(1.0, drive.omega0 * t);
    let e = Ket::new(c(co), c(s) * ph);
    let g = Ket::new(c(s) * ph.conj(), c(-co));
    (g, e)
}

/// U₁(t) = diag(e^{iΩ₀t/2}, e^{−iΩ₀t/2}).
pub fn u1(omega0: f64, t: f64) -> Op {
    z_rotation(omega0 * t)
}

/// e^{iσ_z x/2}.
pub fn z_rotation(x: f64) -> Op {
    let p = Complex64::from_polar(1.0, 0.5 * x);
    Op::new(p, c(0.0), c(0.0), p.conj())
}

/// U₂(α) = e^{iσ_yα/2} = [[cos α/2, sin α/2], [−sin α/2, cos α/2]].
pub fn u2(alpha: f64) -> Op {
    let (s, co) = (0.5 * alpha).sin_cos();
    Op::new(c(co), c(s), c(-s), c(co))
}

/// Unit-trace Hermitian 2×2 matrix stored as (ρ₀₀, ρ₀₁); ρ₁₁ = 1 − ρ₀₀ so the
/// trace is exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub p00: f64,
    pub c01: Complex64,
}

impl DensityMatrix2 {
    pub fn new(p00: f64, c01: Complex64) -> Self {
        Self { p00, c01 }
    }

    pub fn maximally_mixed() -> Self {
        Self { p00: 0.5, c01: c(0.0) }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) ket.
    pub fn pure(psi: &Ket) -> Self {
        let norm = psi.norm_squared();
        Self { p00: psi[0].norm_sqr() / norm, c01: psi[0] * psi[1].conj() / norm }
    }

    /// Projects a matrix onto the unit-trace Hermitian set, assuming its trace
    /// is one up to rounding.
    pub fn from_matrix(m: &Op) -> Self {
        Self {
            p00: 0.5 * (1.0 + m[(0, 0)].re - m[(1, 1)].re),
            c01: 0.5 * (m[(0, 1)] + m[(1, 0)].conj()),
        }
    }

    pub fn from_bloch(v: [f64; 3]) -> Self {
        Self { p00: 0.5 * (1.0 + v[2]), c01: Complex64::new(0.5 * v[0], -0.5 * v[1]) }
    }

    pub fn p11(&self) -> f64 {
        1.0 - self.p00
    }

    pub fn matrix(&self) -> Op {
        Op::new(c(self.p00), self.c01, self.c01.conj(), c(self.p11()))
    }

    /// Bloch vector (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩).
    pub fn bloch(&self) -> [f64; 3] {
        [2.0 * self.c01.re, -2.0 * self.c01.im, 2.0 * self.p00 - 1.0]
    }

    pub fn purity(&self) -> f64 {
        self.p00 * self.p00 + self.p11() * self.p11() + 2.0 * self.c01.norm_sqr()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let [x, y, z] = self.bloch();
        let r = (x * x + y * y + z * z).sqrt();
        [0.5 * (1.0 - r), 0.5 * (1.0 + r)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// ½‖ρ − σ‖₁, half the Bloch-vector distance.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let a = self.bloch();
        let b = other.bloch();
        0.5 * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// U ρ U†.
    pub fn conjugate(&self, u: &Op) -> Self {
        Self::from_matrix(&(u * self.matrix() * u.adjoint()))
    }

    /// Spectral decomposition as (weight, normalized eigenvector) pairs.
    pub fn spectral(&self) -> [(f64, Ket); 2] {
        let [x, y, z] = self.bloch();
        let r = (x * x + y * y + z * z).sqrt();
        let [lo, hi] = self.eigenvalues();
        if r < 1e-15 {
            return [(lo, Ket::new(c(1.0), c(0.0))), (hi, Ket::new(c(0.0), c(1.0)))];
        }
        // Eigenvector along the unit Bloch direction n: (cos θ/2, e^{iφ} sin θ/2).
        let th = (z / r).clamp(-1.0, 1.0).acos();
        let ph = y.atan2(x);
        let (s, co) = (0.5 * th).sin_cos();
        let up = Ket::new(c(co), Complex64::from_polar(s, ph));
        let down = Ket::new(Complex64::from_polar(s, -ph), c(-co));
        [(lo, down), (hi, up)]
    }
}

/// Maps between the lab frame and the tilde / interaction frames of a
/// constant-angle drive. Angles are computed once.
#[derive(Debug, Clone, Copy)]
pub struct RotatingFrame {
    pub drive: DriveParams,
    pub angles: FrameAngles,
}

impl RotatingFrame {
    pub fn new(drive: &DriveParams) -> Result<Self> {
        Ok(Self { drive: *drive, angles: frame_angles(drive)? })
    }

    /// V(t) = U₁†(t) U₂† e^{−iσ_zEt/2}.
    pub fn v(&self, t: f64) -> Op {
        u1(self.drive.omega0, t).adjoint() * u2(self.angles.alpha).adjoint() * z_rotation(-self.angles.gap * t)
    }

    /// Interaction-frame state at time t → lab frame.
    pub fn to_original(&self, rho_tilde: &DensityMatrix2, t: f64) -> DensityMatrix2 {
        rho_tilde.conjugate(&self.v(t))
    }

    /// Lab frame → interaction frame at time t.
    pub fn to_rotated(&self, rho: &DensityMatrix2, t: f64) -> DensityMatrix2 {
        rho.conjugate(&self.v(t).adjoint())
    }
}

/// Interaction-frame state → lab frame (see [`RotatingFrame::to_original`]).
pub fn to_original_frame(rho_tilde: &DensityMatrix2, drive: &DriveParams, t: f64) -> Result<DensityMatrix2> {
    Ok(RotatingFrame::new(drive)?.to_original(rho_tilde, t))
}

/// Lab frame → interaction frame, the inverse of [`to_original_frame`].
pub fn to_rotated_frame(rho: &DensityMatrix2, drive: &DriveParams, t: f64) -> Result<DensityMatrix2> {
    Ok(RotatingFrame::new(drive)?.to_rotated(rho, t))
}

/// (|e(0)⟩ + |g(0)⟩)/√2 in the lab basis.
pub fn initial_ket(drive: &DriveParams) -> Ket {
    let (g, e) = instantaneous_eigenstates(drive, 0.0);
    (e + g) * c(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn initial_state(drive: &DriveParams) -> DensityMatrix2 {
    DensityMatrix2::pure(&initial_ket(drive))
}

/// Exact rotating-frame Hamiltonian (E/2)(sin α σ_x + cos α σ_z) propagator
/// e^{−iH_rot t}.
pub fn rotating_propagator(angles: &FrameAngles, t: f64) -> Op {
    let (s, co) = (0.5 * angles.gap * t).sin_cos();
    let (sa, ca) = angles.alpha.sin_cos();
    Op::new(
        c(co) - I * (s * ca),
        -I * (s * sa),
        -I * (s * sa),
        c(co) + I * (s * ca),
    )
}
