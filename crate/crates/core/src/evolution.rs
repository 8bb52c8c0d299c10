//! Reduced-state propagation, the two-cycle echo protocol, isolated-system
//! references, fidelities and the derived phase and dephasing quantities.
//!
//! Protocol: forward cycle at Ω₀, an instantaneous π pulse
//! A = |e⟩⟨g| + |g⟩⟨e| at T₀, then the reversed cycle at −Ω₀ with a fresh
//! bath (the coefficients restart from zero). Dynamical phases cancel and the
//! isolated final state carries the relative phase 4Φ.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::bath::{bose_occupation, sample_correlation, spectral_density, BathSpec};
use crate::coefficients::{
    compute_coefficients, compute_coefficients_multinoise, compute_coefficients_path, CoefficientSet,
    CoefficientValues, TimeGrid,
};
use crate::error::{Error, Result};
use crate::frames::{
    frame_angles, initial_state, instantaneous_eigenstates, rotating_propagator, u1, u2, z_rotation,
    DensityMatrix2, DriveParams, FrameAngles, Ket, Op, RotatingFrame,
};
use crate::paths::{berry_phase, eigenstates_along, local_frame, reversed_path, PathSpec};
use crate::quadrature::{cumulative_simpson, simpson};

/// Tolerance on populations and eigenvalues before a state is flagged.
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

/// A perturbative state that left the physical set by more than
/// [`POSITIVITY_TOLERANCE`]. Reported, not fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityWarning {
    pub t: f64,
    pub p00: f64,
    pub min_eigenvalue: f64,
}

impl std::fmt::Display for PositivityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "state at t = {:.6} leaves the physical set (p00 = {:.3e}, min eigenvalue = {:.3e})",
            self.t, self.p00, self.min_eigenvalue
        )
    }
}

fn check_positivity(rho: &DensityMatrix2, t: f64) -> Option<PositivityWarning> {
    let min_eigenvalue = rho.min_eigenvalue();
    let bad_pop = rho.p00 < -POSITIVITY_TOLERANCE || rho.p00 > 1.0 + POSITIVITY_TOLERANCE;
    (bad_pop || min_eigenvalue < -POSITIVITY_TOLERANCE).then_some(PositivityWarning {
        t,
        p00: rho.p00,
        min_eigenvalue,
    })
}

/// A propagated state with its positivity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagated {
    pub state: DensityMatrix2,
    pub warning: Option<PositivityWarning>,
}

/// ρ̃₀₀ ← e^{−n}(m + ρ̃₀₀(0)), ρ̃₀₁ ← e^{−l−ik} ρ̃₀₁(0).
pub fn apply_coefficients(rho0_tilde: &DensityMatrix2, v: &CoefficientValues) -> DensityMatrix2 {
    DensityMatrix2 {
        p00: (-v.n).exp() * (v.m + rho0_tilde.p00),
        c01: Complex64::from_polar((-v.l).exp(), -v.k) * rho0_tilde.c01,
    }
}

/// Interaction-frame state at time t. Coefficients are interpolated linearly
/// between grid samples (exact at grid times).
pub fn propagate_reduced(rho0_tilde: &DensityMatrix2, coeffs: &CoefficientSet, t: f64) -> Propagated {
    let state = apply_coefficients(rho0_tilde, &coeffs.values_at(t));
    Propagated { state, warning: check_positivity(&state, t) }
}

/// Trace overlap Tr[ρ σ].
pub fn fidelity(rho: &DensityMatrix2, rho_ref: &DensityMatrix2) -> f64 {
    rho.p00 * rho_ref.p00 + rho.p11() * rho_ref.p11() + 2.0 * (rho.c01 * rho_ref.c01.conj()).re
}

/// Adiabatic propagator: each instantaneous eigenstate follows its
/// eigenvector with dynamical phase ∓Bt/2 and Berry phase ∓Ω₀t sin²(θ/2).
fn adiabatic_propagator(drive: &DriveParams, t: f64) -> Op {
    let (g0, e0) = instantaneous_eigenstates(drive, 0.0);
    let (gt, et) = instantaneous_eigenstates(drive, t);
    let geo = drive.omega0 * t * (0.5 * drive.theta).sin().powi(2);
    let fe = Complex64::from_polar(1.0, -0.5 * drive.b * t - geo);
    let fg = Complex64::from_polar(1.0, 0.5 * drive.b * t + geo);
    et * e0.adjoint() * fe + gt * g0.adjoint() * fg
}

/// Isolated evolution under the adiabatic approximation.
pub fn isolated_adiabatic(drive: &DriveParams, t: f64, rho0: &DensityMatrix2) -> DensityMatrix2 {
    rho0.conjugate(&adiabatic_propagator(drive, t))
}

/// Exact isolated evolution U₁†(t) e^{−iH_rot t} applied to a lab state.
pub fn isolated_exact(drive: &DriveParams, t: f64, rho0: &DensityMatrix2) -> Result<DensityMatrix2> {
    let angles = frame_angles(drive)?;
    let u = u1(drive.omega0, t).adjoint() * rotating_propagator(&angles, t);
    Ok(rho0.conjugate(&u))
}

/// The π pulse exchanging |e(t)⟩ and |g(t)⟩.
pub fn pi_pulse(g: &Ket, e: &Ket) -> Op {
    e * g.adjoint() + g * e.adjoint()
}

/// Isolated two-cycle echo under the adiabatic approximation.
pub fn isolated_adiabatic_echo(drive: &DriveParams, rho0: &DensityMatrix2) -> DensityMatrix2 {
    let t0 = drive.period();
    let rho = isolated_adiabatic(drive, t0, rho0);
    let (g, e) = instantaneous_eigenstates(drive, t0);
    let rho = rho.conjugate(&pi_pulse(&g, &e));
    isolated_adiabatic(&drive.reversed(), t0, &rho)
}

/// Exact isolated two-cycle echo.
pub fn isolated_exact_echo(drive: &DriveParams, rho0: &DensityMatrix2) -> Result<DensityMatrix2> {
    let t0 = drive.period();
    let rho = isolated_exact(drive, t0, rho0)?;
    let (g, e) = instantaneous_eigenstates(drive, t0);
    let rho = rho.conjugate(&pi_pulse(&g, &e));
    isolated_exact(&drive.reversed(), t0, &rho)
}

/// Closed-form adiabatic echo state for the equal-superposition start:
/// ½[[1 + sin θ cos 4Φ, −cos θ cos 4Φ − i sin 4Φ], [c.c., 1 − sin θ cos 4Φ]].
pub fn echo_reference(theta: f64) -> DensityMatrix2 {
    let phi = PI * (1.0 - theta.cos());
    let (s4, c4) = (4.0 * phi).sin_cos();
    DensityMatrix2::new(0.5 * (1.0 + theta.sin() * c4), Complex64::new(-0.5 * theta.cos() * c4, -0.5 * s4))
}

/// Which isolated evolution a single-cycle fidelity is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Exact unitary evolution of the isolated spin.
    Exact,
    /// Adiabatic (eigenstate-following) evolution.
    Adiabatic,
}

/// ½[1 + e^{−l}cos k cos²ζ + sin ζ + e^{−n} sin ζ (sin ζ − 1 − 2m)].
pub fn single_cycle_closed_form(zeta: f64, v: &CoefficientValues) -> f64 {
    let (sz, cz) = zeta.sin_cos();
    0.5 * (1.0 + (-v.l).exp() * v.k.cos() * cz * cz + sz + (-v.n).exp() * sz * (sz - 1.0 - 2.0 * v.m))
}

/// Closed-form single-cycle fidelity F(t). It coincides with the composed
/// pipeline measured against the exact isolated evolution.
pub fn fidelity_single_cycle(drive: &DriveParams, coeffs: &CoefficientSet, t: f64) -> Result<f64> {
    let angles = frame_angles(drive)?;
    Ok(single_cycle_closed_form(angles.zeta, &coeffs.values_at(t)))
}

/// Single-cycle fidelity by composition: propagate, map to the lab and
/// overlap with the chosen isolated reference.
pub fn fidelity_single_cycle_pipeline(
    drive: &DriveParams,
    coeffs: &CoefficientSet,
    t: f64,
    reference: Reference,
) -> Result<f64> {
    let frame = RotatingFrame::new(drive)?;
    let rho0 = initial_state(drive);
    let rho_t = frame.to_rotated(&rho0, 0.0);
    let lab = frame.to_original(&propagate_reduced(&rho_t, coeffs, t).state, t);
    let iso = match reference {
        Reference::Exact => isolated_exact(drive, t, &rho0)?,
        Reference::Adiabatic => isolated_adiabatic(drive, t, &rho0),
    };
    Ok(fidelity(&lab, &iso))
}

/// Lab state after the echo, given the coefficient values at T₀ of each
/// cycle. Returns the state and any positivity warnings.
pub fn echo_state(
    drive: &DriveParams,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
) -> Result<(DensityMatrix2, Vec<PositivityWarning>)> {
    let t0 = drive.period();
    let f1 = RotatingFrame::new(drive)?;
    let f2 = RotatingFrame::new(&drive.reversed())?;
    let mut warnings = Vec::new();

    let rho = initial_state(drive);
    let s1 = apply_coefficients(&f1.to_rotated(&rho, 0.0), c1);
    warnings.extend(check_positivity(&s1, t0));
    let rho = f1.to_original(&s1, t0);

    let (g, e) = instantaneous_eigenstates(drive, t0);
    let rho = rho.conjugate(&pi_pulse(&g, &e));

    let s2 = apply_coefficients(&f2.to_rotated(&rho, 0.0), c2);
    warnings.extend(check_positivity(&s2, 2.0 * t0));
    Ok((f2.to_original(&s2, t0), warnings))
}

/// Two-cycle fidelity in closed form. `phase1`, `phase2` are T₀E₁ and T₀E₂.
///
/// Differs from the long expression usually quoted for this protocol in two
/// places, both confirmed against the composed pipeline: the second group
/// carries coefficient 1 rather than ½, and the angle combination is
/// ζ₁ + ζ₂. See [`two_cycle_as_printed`] for the uncorrected form.
pub fn two_cycle_closed_form(
    a1: &FrameAngles,
    a2: &FrameAngles,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
    t0: f64,
    phi: f64,
) -> f64 {
    two_cycle_expression(a1.zeta, a2.zeta, t0 * a1.gap + c1.k, t0 * a2.gap + c2.k, c1, c2, phi, a1.zeta + a2.zeta, 1.0)
}

/// The long two-cycle expression transcribed as commonly printed, with
/// ζ₁₂ = ζ₁ − ζ₂ and a factor ½ on the second group. Kept for comparison;
/// it does not reproduce the protocol (it gives ≈ 0.75 for an isolated spin).
pub fn two_cycle_as_printed(
    a1: &FrameAngles,
    a2: &FrameAngles,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
    t0: f64,
    phi: f64,
) -> f64 {
    two_cycle_expression(a1.zeta, a2.zeta, t0 * a1.gap + c1.k, t0 * a2.gap + c2.k, c1, c2, phi, a1.zeta - a2.zeta, 0.5)
}

#[allow(clippy::too_many_arguments)]
fn two_cycle_expression(
    z1: f64,
    z2: f64,
    eta1: f64,
    eta2: f64,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
    phi: f64,
    z12: f64,
    second_group: f64,
) -> f64 {
    let (s4, c4) = (4.0 * phi).sin_cos();
    let (sz1, cz1) = z1.sin_cos();
    let (sz2, cz2) = z2.sin_cos();
    let (sz12, cz12) = z12.sin_cos();
    let (se1, ce1) = eta1.sin_cos();
    let (se2, ce2) = eta2.sin_cos();
    let (en1, el1) = (c1.n.exp(), c1.l.exp());
    let rot = c4 * ce2 * cz2 - s4 * se2;
    let first = (-c1.l - c1.n - c2.n).exp()
        * c4
        * sz2
        * (en1 * (ce1 * cz1 * sz12 - el1 * (1.0 + cz12 + 2.0 * c2.m)) - el1 * cz12 * (sz1 - 1.0 - 2.0 * c1.m));
    let second = (-c1.l - c2.l - c1.n).exp()
        * (en1 * cz1 * (ce1 * cz12 * rot + (ce2 * s4 + c4 * cz2 * se2) * se1)
            + el1 * rot * sz12 * (en1 - 1.0 + sz1 - 2.0 * c1.m));
    0.5 * (1.0 + c4 * sz2 + first + second_group * second)
}

/// Convenience wrapper: closed-form F(2T₀) from the two cycles' coefficient
/// records, evaluated at T₀ = the records' end time.
pub fn fidelity_two_cycle_closed_form(
    a1: &FrameAngles,
    a2: &FrameAngles,
    coeffs1: &CoefficientSet,
    coeffs2: &CoefficientSet,
    phi: f64,
) -> f64 {
    let t0 = coeffs1.grid.t_max;
    two_cycle_closed_form(a1, a2, &coeffs1.final_values(), &coeffs2.final_values(), t0, phi)
}

/// Adiabatic-limit (ζ₁ = ζ₂ = 0) two-cycle fidelity
/// ½[1 + e^{−l₁−l₂} cos(4Φ − T₀(E₁ − E₂) − (k₁ − k₂))].
///
/// The sign of k₁ − k₂ follows the coherence convention ρ̃₀₁ ∝ e^{−ik}.
pub fn two_cycle_adiabatic_limit(
    gap1: f64,
    gap2: f64,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
    t0: f64,
    phi: f64,
) -> f64 {
    0.5 * (1.0 + (-c1.l - c2.l).exp() * (4.0 * phi - t0 * (gap1 - gap2) - (c1.k - c2.k)).cos())
}

/// The echo expressed in the eigenbasis frame, where a cycle is fixed by the
/// tilt ζ of the rotating frame and the dynamical phase T₀E. Setting ζ = 0
/// gives the adiabatic limit exactly. Returns the fidelity against the ideal
/// state (e^{2iΦ}|e⟩ + e^{−2iΦ}|g⟩)/√2.
pub fn eigenframe_echo_fidelity(
    z1: f64,
    z2: f64,
    phase1: f64,
    phase2: f64,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
    phi: f64,
) -> f64 {
    let r = Complex64::from(FRAC_1_SQRT_2);
    // |e⟩ = (1, 0), |g⟩ = (0, −1) in this frame
    let mut rho = DensityMatrix2::pure(&Ket::new(r, -r));
    let pulse = Op::new(0.0.into(), (-1.0).into(), (-1.0).into(), 0.0.into());
    let cycle = |rho: &DensityMatrix2, z: f64, phase: f64, c: &CoefficientValues| {
        let tilt = u2(z);
        apply_coefficients(&rho.conjugate(&tilt), c).conjugate(&(tilt.adjoint() * z_rotation(-phase)))
    };
    rho = cycle(&rho, z1, phase1, c1).conjugate(&pulse);
    rho = cycle(&rho, z2, phase2, c2);
    let ideal = Ket::new(Complex64::from_polar(FRAC_1_SQRT_2, 2.0 * phi), -Complex64::from_polar(FRAC_1_SQRT_2, -2.0 * phi));
    fidelity(&rho, &DensityMatrix2::pure(&ideal))
}

/// Which bath configuration the echo runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    SingleBath,
    MultiNoise,
}

/// Outcome of a two-cycle echo.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoResult {
    /// Lab-frame state at 2T₀.
    pub rho_2t0: DensityMatrix2,
    /// F(2T₀) against the adiabatic echo state.
    pub fidelity: f64,
    /// Overlap with the same protocol run with the bath switched off. For a
    /// uniform circle this is the exact isolated echo.
    pub fidelity_vs_isolated: f64,
    /// Berry phase Φ of |g⟩ over the forward cycle.
    pub berry_phase: f64,
    /// δΦ = k₁(T₀) − k₂(T₀).
    pub phase_correction: f64,
    /// l₁(T₀) + l₂(T₀).
    pub dephasing: f64,
    /// η = (accumulated gap phase) + k(T₀) for each cycle.
    pub eta1: f64,
    pub eta2: f64,
    /// Frame angles of each cycle (at t = 0 for general paths).
    pub angles1: FrameAngles,
    pub angles2: FrameAngles,
    pub coeffs1: CoefficientValues,
    pub coeffs2: CoefficientValues,
    pub period: f64,
    pub warnings: Vec<PositivityWarning>,
}

impl EchoResult {
    pub const CSV_HEADER: &'static str = "F_2T0,Phi,delta_Phi,l1_plus_l2,eta1,eta2";

    pub fn csv_fields(&self) -> String {
        format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            self.fidelity, self.berry_phase, self.phase_correction, self.dephasing, self.eta1, self.eta2
        )
    }
}

fn check_cycle_grid(grid: &TimeGrid, t0: f64) -> Result<()> {
    if (grid.t_max - t0).abs() > 1e-9 * t0 {
        return Err(Error::Resolution(format!(
            "grid ends at {} but the cycle period is {}",
            grid.t_max, t0
        )));
    }
    Ok(())
}

/// Coefficient records of both cycles for a uniform-circle echo.
pub fn echo_coefficients(
    drive: &DriveParams,
    bath: &BathSpec,
    grid: &TimeGrid,
    variant: Variant,
) -> Result<(CoefficientSet, CoefficientSet)> {
    let compute = match variant {
        Variant::SingleBath => compute_coefficients,
        Variant::MultiNoise => compute_coefficients_multinoise,
    };
    let c1 = compute(drive, bath, grid)?;
    let c2 = compute(&drive.reversed(), bath, grid)?;
    Ok((c1, c2))
}

/// Runs the two-cycle echo for a uniform circle.
pub fn run_echo(drive: &DriveParams, bath: &BathSpec, grid: &TimeGrid, variant: Variant) -> Result<EchoResult> {
    if drive.omega0 <= 0.0 {
        return Err(Error::Domain(format!("the forward cycle needs omega0 > 0, got {}", drive.omega0)));
    }
    let t0 = drive.period();
    check_cycle_grid(grid, t0)?;
    let (set1, set2) = echo_coefficients(drive, bath, grid, variant)?;
    echo_from_values(drive, &set1.final_values(), &set2.final_values())
}

/// Echo outcome from the coefficient values at T₀ of both cycles.
pub fn echo_from_values(drive: &DriveParams, c1: &CoefficientValues, c2: &CoefficientValues) -> Result<EchoResult> {
    let t0 = drive.period();
    let angles1 = frame_angles(drive)?;
    let angles2 = frame_angles(&drive.reversed())?;
    let (rho, warnings) = echo_state(drive, c1, c2)?;
    let isolated = isolated_exact_echo(drive, &initial_state(drive))?;
    Ok(EchoResult {
        rho_2t0: rho,
        fidelity: fidelity(&rho, &echo_reference(drive.theta)),
        fidelity_vs_isolated: fidelity(&rho, &isolated),
        berry_phase: PI * (1.0 - drive.theta.cos()),
        phase_correction: c1.k - c2.k,
        dephasing: c1.l + c2.l,
        eta1: t0 * angles1.gap + c1.k,
        eta2: t0 * angles2.gap + c2.k,
        angles1,
        angles2,
        coeffs1: *c1,
        coeffs2: *c2,
        period: t0,
        warnings,
    })
}

/// F(2T₀) of the isolated spin against the adiabatic echo state. Departs
/// from one by the non-adiabatic error, which oscillates at small T₀.
pub fn isolated_echo_fidelity(drive: &DriveParams) -> Result<f64> {
    let rho = isolated_exact_echo(drive, &initial_state(drive))?;
    Ok(fidelity(&rho, &echo_reference(drive.theta)))
}

/// δΦ from the full coefficients and from the single-integral estimate
/// 4Ω₀ sin²θ cos θ ∫₀^{T₀}∫₀^t s cos(Bs) Re κ(s) ds dt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCorrection {
    pub exact: f64,
    pub approximate: f64,
}

pub fn phase_correction(drive: &DriveParams, bath: &BathSpec, grid: &TimeGrid) -> Result<PhaseCorrection> {
    let t0 = drive.period();
    check_cycle_grid(grid, t0)?;
    let (c1, c2) = echo_coefficients(drive, bath, grid, Variant::SingleBath)?;
    let exact = c1.final_values().k - c2.final_values().k;
    let times = grid.times();
    let kappa = sample_correlation(bath, &times)?;
    let f: Vec<f64> = times.iter().zip(&kappa).map(|(s, k)| s * (drive.b * s).cos() * k.re).collect();
    let inner = cumulative_simpson(&f, grid.step);
    let double = simpson(&inner, grid.step);
    let (st, ct) = drive.theta.sin_cos();
    let approximate = 4.0 * drive.omega0.abs() * st * st * ct * double;
    Ok(PhaseCorrection { exact, approximate })
}

/// Markov limit of l₁(T₀) + l₂(T₀): 2 sin²θ T₀ π J(B)[2N(B) + 1].
pub fn markovian_dephasing_limit(drive: &DriveParams, bath: &BathSpec) -> Result<f64> {
    let j = spectral_density(bath, drive.b)?;
    let n = bose_occupation(bath, drive.b)?;
    Ok(2.0 * drive.theta.sin().powi(2) * drive.period() * PI * j * (2.0 * n + 1.0))
}

/// Frame of a general path at one instant: W(t) = U₂(α(t)) U₁(φ(t)).
fn path_frame(path: &PathSpec, b: f64, t: f64) -> Op {
    let p = path.point(t);
    u2(local_frame(b, &p).alpha) * z_rotation(p.phi)
}

/// ∫₀^{T₀} √(E(t)² + α̇(t)²) dt on the grid.
fn accumulated_gap(path: &PathSpec, b: f64, grid: &TimeGrid) -> f64 {
    let f: Vec<f64> = grid.times().iter().map(|&t| local_frame(b, &path.point(t)).gap_effective).collect();
    simpson(&f, grid.step)
}

fn path_angles(path: &PathSpec, b: f64) -> FrameAngles {
    let p = path.point(0.0);
    let lf = local_frame(b, &p);
    FrameAngles { alpha: lf.alpha, gap: lf.gap, zeta: lf.alpha - p.theta }
}

/// One path cycle from a lab state, with coefficients given at T₀.
fn path_cycle(
    path: &PathSpec,
    b: f64,
    grid: &TimeGrid,
    rho: &DensityMatrix2,
    c: &CoefficientValues,
) -> (DensityMatrix2, f64, Option<PositivityWarning>) {
    let t0 = path.period();
    let w0 = path_frame(path, b, 0.0);
    let s = apply_coefficients(&rho.conjugate(&w0), c);
    let theta = accumulated_gap(path, b, grid);
    let v = path_frame(path, b, t0).adjoint() * z_rotation(-theta);
    (s.conjugate(&v), theta, check_positivity(&s, t0))
}

fn path_echo_state(
    path: &PathSpec,
    b: f64,
    grid: &TimeGrid,
    c1: &CoefficientValues,
    c2: &CoefficientValues,
) -> (DensityMatrix2, f64, f64, Vec<PositivityWarning>) {
    let start = path.point(0.0);
    let (g0, e0) = eigenstates_along(start.theta, start.phi);
    let rho = DensityMatrix2::pure(&((e0 + g0) * Complex64::from(FRAC_1_SQRT_2)));
    let (rho, th1, w1) = path_cycle(path, b, grid, &rho, c1);
    let end = path.point(path.period());
    let (g, e) = eigenstates_along(end.theta, end.phi);
    let rho = rho.conjugate(&pi_pulse(&g, &e));
    let (rho, th2, w2) = path_cycle(&reversed_path(path), b, grid, &rho, c2);
    (rho, th1, th2, w1.into_iter().chain(w2).collect())
}

/// Two-cycle echo along a general loop, the second cycle being the reversed
/// loop. Dynamical phases use √(E² + α̇²) accumulated on the grid.
pub fn run_echo_path(path: &PathSpec, bath: &BathSpec, grid: &TimeGrid, b: f64) -> Result<EchoResult> {
    let t0 = path.period();
    check_cycle_grid(grid, t0)?;
    let (sin_min, t_min) = path.min_sin_theta(grid.intervals());
    if sin_min < 1e-6 {
        return Err(Error::PoleCrossing { t: t_min });
    }
    let rev = reversed_path(path);
    let set1 = compute_coefficients_path(path, bath, grid, b)?;
    let set2 = compute_coefficients_path(&rev, bath, grid, b)?;
    let (c1, c2) = (set1.final_values(), set2.final_values());
    let (rho, th1, th2, warnings) = path_echo_state(path, b, grid, &c1, &c2);
    let (isolated, _, _, _) = path_echo_state(path, b, grid, &CoefficientValues::zero(), &CoefficientValues::zero());
    let phi = berry_phase(path)?;
    let start = path.point(0.0);
    let (g0, e0) = eigenstates_along(start.theta, start.phi);
    let ideal = e0 * Complex64::from_polar(FRAC_1_SQRT_2, 2.0 * phi) + g0 * Complex64::from_polar(FRAC_1_SQRT_2, -2.0 * phi);
    Ok(EchoResult {
        rho_2t0: rho,
        fidelity: fidelity(&rho, &DensityMatrix2::pure(&ideal)),
        fidelity_vs_isolated: fidelity(&rho, &isolated),
        berry_phase: phi,
        phase_correction: c1.k - c2.k,
        dephasing: c1.l + c2.l,
        eta1: th1 + c1.k,
        eta2: th2 + c2.k,
        angles1: path_angles(path, b),
        angles2: path_angles(&rev, b),
        coeffs1: c1,
        coeffs2: c2,
        period: t0,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_values(a: f64, b: f64, c: f64, d: f64) -> CoefficientValues {
        CoefficientValues { n: a, m: b, l: c, k: d }
    }

    #[test]
    fn fidelity_examples() {
        let up = DensityMatrix2::new(1.0, 0.0.into());
        let down = DensityMatrix2::new(0.0, 0.0.into());
        assert_eq!(fidelity(&up, &up), 1.0);
        assert_eq!(fidelity(&up, &down), 0.0);
        assert_eq!(fidelity(&up, &DensityMatrix2::maximally_mixed()), 0.5);
    }

    #[test]
    fn zero_coefficients_are_the_identity_map() {
        let rho = DensityMatrix2::new(0.3, Complex64::new(0.2, -0.1));
        assert_eq!(apply_coefficients(&rho, &CoefficientValues::zero()), rho);
        for z in [-0.4, 0.0, 0.3] {
            assert_abs_diff_eq!(single_cycle_closed_form(z, &CoefficientValues::zero()), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn large_leak_is_flagged() {
        let rho = DensityMatrix2::new(0.5, Complex64::new(0.5, 0.0));
        let v = random_values(0.0, 0.6, 0.0, 0.0);
        let s = apply_coefficients(&rho, &v);
        assert!(check_positivity(&s, 1.0).is_some());
    }

    #[test]
    fn adiabatic_echo_reproduces_closed_form_state() {
        for th in [0.0, 0.3, PI / 4.0, PI / 2.0, 2.0, PI] {
            let d = DriveParams::new(100.0, th, 2.0).unwrap();
            let rho = isolated_adiabatic_echo(&d, &initial_state(&d));
            let r = echo_reference(th);
            assert_abs_diff_eq!(rho.p00, r.p00, epsilon = 1e-12);
            assert_abs_diff_eq!((rho.c01 - r.c01).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        }
        let r = echo_reference(PI / 2.0);
        assert_abs_diff_eq!(r.p00, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.c01.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn berry_phase_of_ground_state_from_exact_propagator() {
        // ⟨g(0)|U(T₀)|g(0)⟩ → e^{i(BT₀/2 + Φ)} as Ω₀/B → 0
        let th = 1.1;
        let d = DriveParams::new(4000.0, th, 1.0).unwrap();
        let a = frame_angles(&d).unwrap();
        let t0 = d.period();
        let u = u1(d.omega0, t0).adjoint() * rotating_propagator(&a, t0);
        let (g, _) = instantaneous_eigenstates(&d, 0.0);
        let amp = (g.adjoint() * u * g)[(0, 0)];
        // E ≈ B − Ω₀ cos θ, and U₁(T₀) = −1 supplies the remaining π
        let expected = Complex64::from_polar(1.0, 0.5 * d.b * t0 + PI * (1.0 - th.cos()));
        assert!(amp.norm() > 1.0 - 1e-6);
        assert_abs_diff_eq!((amp - expected).norm(), 0.0, epsilon = 2e-3);
    }

    #[test]
    fn exact_and_adiabatic_agree_when_slow() {
        let d = DriveParams::new(1e4, PI / 3.0, 1.0).unwrap();
        let rho0 = initial_state(&d);
        for t in [0.5, 3.0, d.period()] {
            let ex = isolated_exact(&d, t, &rho0).unwrap();
            let ad = isolated_adiabatic(&d, t, &rho0);
            assert!(ex.trace_distance(&ad) < 1e-3);
        }
    }

    #[test]
    fn exact_rabi_period_and_aligned_field() {
        let d = DriveParams::new(5.0, 0.7, 1.0).unwrap();
        let a = frame_angles(&d).unwrap();
        let tr = 2.0 * PI / a.gap;
        let u = rotating_propagator(&a, tr);
        assert_abs_diff_eq!((u + Op::identity()).norm(), 0.0, epsilon = 1e-12);
        let d = DriveParams::new(5.0, 0.0, 1.0).unwrap();
        let rho = isolated_exact(&d, 0.9, &initial_state(&d)).unwrap();
        assert_abs_diff_eq!(rho.p00, 0.5, epsilon = 1e-14);
        // pure σ_z precession at rate B
        assert_abs_diff_eq!(rho.c01.arg(), PI - 5.0 * 0.9, epsilon = 1e-12);
    }

    #[test]
    fn adiabatic_limit_does_not_see_energy_exchange() {
        let c1 = random_values(0.2, 0.1, 0.3, 0.05);
        let c2 = random_values(0.4, 0.2, 0.1, -0.02);
        let strip = |c: &CoefficientValues| CoefficientValues { n: 0.0, m: 0.0, ..*c };
        let a = eigenframe_echo_fidelity(0.0, 0.0, 300.0, 310.0, &c1, &c2, 0.9);
        let b = eigenframe_echo_fidelity(0.0, 0.0, 300.0, 310.0, &strip(&c1), &strip(&c2), 0.9);
        assert_eq!(a, b);
    }

    #[test]
    fn markov_limit_example() {
        let d = DriveParams::new(100.0, PI / 4.0, 2.0 * PI / 10.0).unwrap();
        let bath = BathSpec::from_lambda_norm(2.0, 200.0, 0.0).unwrap();
        assert_abs_diff_eq!(markovian_dephasing_limit(&d, &bath).unwrap(), 0.09527, epsilon = 1e-5);
        let d0 = DriveParams::new(100.0, 0.0, 1.0).unwrap();
        assert_eq!(markovian_dephasing_limit(&d0, &bath).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn closed_forms_match_pipelines(
            b in 5.0f64..120.0, th in 0.05f64..3.0, om in 0.2f64..3.0,
            n1 in 0.0f64..0.4, m1 in 0.0f64..0.2, l1 in 0.0f64..0.5, k1 in -0.3f64..0.3,
            n2 in 0.0f64..0.4, m2 in 0.0f64..0.2, l2 in 0.0f64..0.5, k2 in -0.3f64..0.3,
        ) {
            let d = DriveParams::new(b, th, om).unwrap();
            prop_assume!(frame_angles(&d).is_ok() && frame_angles(&d.reversed()).is_ok());
            let c1 = random_values(n1, m1, l1, k1);
            let c2 = random_values(n2, m2, l2, k2);
            let r = echo_from_values(&d, &c1, &c2).unwrap();
            let cf = two_cycle_closed_form(&r.angles1, &r.angles2, &c1, &c2, r.period, r.berry_phase);
            prop_assert!((cf - r.fidelity).abs() < 1e-9, "closed {cf} vs pipeline {}", r.fidelity);
            let ef = eigenframe_echo_fidelity(
                r.angles1.zeta, r.angles2.zeta, r.period * r.angles1.gap, r.period * r.angles2.gap, &c1, &c2, r.berry_phase);
            prop_assert!((ef - r.fidelity).abs() < 1e-9);
            let lim = two_cycle_adiabatic_limit(r.angles1.gap, r.angles2.gap, &c1, &c2, r.period, r.berry_phase);
            let ef0 = eigenframe_echo_fidelity(0.0, 0.0, r.period * r.angles1.gap, r.period * r.angles2.gap, &c1, &c2, r.berry_phase);
            prop_assert!((lim - ef0).abs() < 1e-9);
        }

        #[test]
        fn coherence_decays_as_exp_minus_l(l in 0.0f64..3.0, k in -2.0f64..2.0) {
            let rho = DensityMatrix2::new(0.4, Complex64::new(0.3, 0.2));
            let s = apply_coefficients(&rho, &random_values(0.1, 0.05, l, k));
            prop_assert!((s.c01.norm() - (-l).exp() * rho.c01.norm()).abs() < 1e-14);
            prop_assert!((s.p00 + s.p11() - 1.0).abs() == 0.0);
        }
    }
}
