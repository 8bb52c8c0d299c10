//! Brute-force validators for the secular solution.
//!
//! [`tcl2_nonsecular`] integrates the second-order master equation before the
//! secular step, keeping every oscillating term. [`FewModeSolver`] replaces
//! the continuum bath by a handful of truncated oscillators and propagates
//! spin and modes exactly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::bath::{sample_correlation, BathSpec};
use crate::coefficients::TimeGrid;
use crate::error::{Error, Result};
use crate::frames::{frame_angles, u1, u2, z_rotation, DensityMatrix2, DriveParams, FrameAngles, Op};
use crate::quadrature::cumulative_simpson;

/// Largest joint Hilbert-space dimension the few-mode solver accepts.
pub const MAX_DIMENSION: usize = 4096;

/// Step-halving tolerance (trace distance at the final time) for the
/// non-secular integrator.
pub const TCL2_TOLERANCE: f64 = 1e-6;

/// Interaction-frame trajectory from the non-secular integrator.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    /// Richardson estimate of the final-state error from a run at twice the step.
    pub error_estimate: f64,
    /// Largest |Tr ρ − 1| met before normalization.
    pub max_trace_drift: f64,
}

fn complex_cumulative(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let re: Vec<f64> = f.iter().map(|z| z.re).collect();
    let im: Vec<f64> = f.iter().map(|z| z.im).collect();
    cumulative_simpson(&re, h)
        .into_iter()
        .zip(cumulative_simpson(&im, h))
        .map(|(a, b)| Complex64::new(a, b))
        .collect()
}

/// dρ/dt = −[σ(t), Λ(t)ρ − ρΛ(t)†] with σ(t) the interaction-picture
/// coupling and Λ(t) = ∫₀^t κ(u) σ(t − u) du, integrated by RK4.
fn tcl2_run(
    angles: &FrameAngles,
    bath: &BathSpec,
    rho0: &Op,
    grid: &TimeGrid,
) -> Result<(Vec<Op>, f64)> {
    let n = grid.intervals();
    let hf = 0.5 * grid.step;
    let half_times: Vec<f64> = (0..=2 * n).map(|j| j as f64 * hf).collect();
    let kappa = sample_correlation(bath, &half_times)?;
    let e = angles.gap;
    let phase: Vec<Complex64> = half_times.iter().map(|&t| Complex64::from_polar(1.0, e * t)).collect();
    let k0 = complex_cumulative(&kappa, hf);
    let km_f: Vec<Complex64> = kappa.iter().zip(&phase).map(|(k, p)| k * p.conj()).collect();
    let kp_f: Vec<Complex64> = kappa.iter().zip(&phase).map(|(k, p)| k * p).collect();
    let km = complex_cumulative(&km_f, hf);
    let kp = complex_cumulative(&kp_f, hf);
    let (s, c) = angles.alpha.sin_cos();
    let sigma = |j: usize| -> Op {
        let p = phase[j];
        Op::new(Complex64::from(c), -s * p, -s * p.conj(), Complex64::from(-c))
    };
    let lambda = |j: usize| -> Op {
        let p = phase[j];
        Op::new(c * k0[j], -s * p * km[j], -s * p.conj() * kp[j], -c * k0[j])
    };
    let rhs = |j: usize, r: &Op| -> Op {
        let sg = sigma(j);
        let x = lambda(j) * r - r * lambda(j).adjoint();
        -(sg * x - x * sg)
    };
    let mut r = *rho0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(r);
    let h = grid.step;
    let mut drift: f64 = 0.0;
    let half = Complex64::from(0.5 * h);
    let full = Complex64::from(h);
    for i in 0..n {
        let j = 2 * i;
        let k1 = rhs(j, &r);
        let k2 = rhs(j + 1, &(r + k1 * half));
        let k3 = rhs(j + 1, &(r + k2 * half));
        let k4 = rhs(j + 2, &(r + k3 * full));
        r += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0);
        drift = drift.max((r.trace() - Complex64::from(1.0)).norm());
        out.push(r);
    }
    Ok((out, drift))
}

/// Non-secular second-order dynamics of the interaction-frame state over
/// `grid`, with a step-halving accuracy check.
pub fn tcl2_nonsecular(
    drive: &DriveParams,
    bath: &BathSpec,
    rho0_tilde: &DensityMatrix2,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let angles = frame_angles(drive)?;
    grid.validate(drive.b, bath.cutoff)?;
    let rho0 = rho0_tilde.matrix();
    let (fine, drift) = tcl2_run(&angles, bath, &rho0, grid)?;
    let coarse_grid = TimeGrid::new(grid.t_max, grid.intervals().div_ceil(2).max(2))?;
    let (coarse, _) = tcl2_run(&angles, bath, &rho0, &coarse_grid)?;
    let last_f = DensityMatrix2::from_matrix(fine.last().expect("nonempty"));
    let last_c = DensityMatrix2::from_matrix(coarse.last().expect("nonempty"));
    let error_estimate = last_f.trace_distance(&last_c) / 15.0;
    if error_estimate > TCL2_TOLERANCE {
        return Err(Error::Resolution(format!(
            "non-secular integration: step-halving estimate {error_estimate:.3e} exceeds {TCL2_TOLERANCE:.1e}"
        )));
    }
    Ok(Trajectory {
        times: grid.times(),
        states: fine.iter().map(DensityMatrix2::from_matrix).collect(),
        error_estimate,
        max_trace_drift: drift,
    })
}

/// Discrete bosonic modes standing in for the continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct FewModeBath {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    /// Fock truncation per mode (occupations 0..=n_max).
    pub n_max: usize,
    pub temperature: f64,
}

impl FewModeBath {
    pub fn new(frequencies: Vec<f64>, couplings: Vec<f64>, n_max: usize, temperature: f64) -> Result<Self> {
        if frequencies.len() != couplings.len() || frequencies.is_empty() {
            return Err(Error::Configuration("need matching, nonempty frequency and coupling lists".into()));
        }
        if frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Configuration("mode frequencies must be positive".into()));
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::Configuration(format!("temperature must be >= 0, got {temperature}")));
        }
        Ok(Self { frequencies, couplings, n_max, temperature })
    }

    /// Equal-width bins over [0, upper·Ω]: g_k² is the bin integral of J and
    /// ω_k the J-weighted bin centroid.
    pub fn ohmic(bath: &BathSpec, modes: usize, n_max: usize, upper: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Configuration("need at least one mode".into()));
        }
        let cut = bath.cutoff;
        // ∫ (λ/2) ω e^{−ω/Ω} = (λ/2)Ω² γ(2, x) and ∫ (λ/2) ω² e^{−ω/Ω} = (λ/2)Ω³ γ(3, x)
        let g2 = |x: f64| 1.0 - (-x).exp() * (1.0 + x);
        let g3 = |x: f64| 2.0 - (-x).exp() * (x * x + 2.0 * x + 2.0);
        let width = upper / modes as f64;
        let mut frequencies = Vec::with_capacity(modes);
        let mut couplings = Vec::with_capacity(modes);
        for k in 0..modes {
            let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
            let weight = 0.5 * bath.lambda * cut * cut * (g2(b) - g2(a));
            let first = 0.5 * bath.lambda * cut.powi(3) * (g3(b) - g3(a));
            frequencies.push(if weight > 0.0 { first / weight } else { 0.5 * (a + b) * cut });
            couplings.push(weight.sqrt());
        }
        Self::new(frequencies, couplings, n_max, bath.temperature)
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    /// 2·(n_max + 1)^M, or `None` on overflow.
    pub fn dimension(&self) -> Option<usize> {
        (0..self.modes()).try_fold(2usize, |acc, _| acc.checked_mul(self.n_max + 1))
    }

    /// Σ g_k², the discrete counterpart of ∫ J dω.
    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }

    fn occupation(&self, w: f64) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            1.0 / (w / self.temperature).exp_m1()
        }
    }

    /// κ(s) = Σ g_k² [(2N_k + 1) cos ω_k s − i sin ω_k s].
    pub fn correlation(&self, s: f64) -> Complex64 {
        self.frequencies
            .iter()
            .zip(&self.couplings)
            .map(|(&w, &g)| {
                let (sn, cs) = (w * s).sin_cos();
                g * g * Complex64::new((2.0 * self.occupation(w) + 1.0) * cs, -sn)
            })
            .sum()
    }

    /// Per-mode thermal weights over the truncated ladder, normalized within
    /// the truncation.
    fn ladder_weights(&self, w: f64) -> Vec<f64> {
        if self.temperature == 0.0 {
            let mut p = vec![0.0; self.n_max + 1];
            p[0] = 1.0;
            return p;
        }
        let raw: Vec<f64> = (0..=self.n_max).map(|n| (-(n as f64) * w / self.temperature).exp()).collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / z).collect()
    }
}

/// Exact propagator of spin ⊗ modes in the co-rotating tilted frame, where
/// H = (E/2)σ_z + (cos α σ_z − sin α σ_x) ⊗ Σ g_k(a_k + a_k†) + Σ ω_k a_k†a_k
/// is time independent. Diagonalized once.
#[derive(Debug, Clone)]
pub struct FewModeSolver {
    drive: DriveParams,
    angles: FrameAngles,
    bath: FewModeBath,
    bath_dim: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl FewModeSolver {
    pub fn new(drive: &DriveParams, bath: &FewModeBath) -> Result<Self> {
        let dim = bath
            .dimension()
            .filter(|d| *d <= MAX_DIMENSION)
            .ok_or_else(|| Error::Configuration(format!("few-mode Hilbert space exceeds {MAX_DIMENSION}")))?;
        let angles = frame_angles(drive)?;
        let bath_dim = dim / 2;
        let levels = bath.n_max + 1;
        let modes = bath.modes();
        let digit = |idx: usize, k: usize| (idx / levels.pow((modes - 1 - k) as u32)) % levels;
        let stride = |k: usize| levels.pow((modes - 1 - k) as u32);

        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let (sa, ca) = angles.alpha.sin_cos();
        for spin in 0..2 {
            let sz = if spin == 0 { 1.0 } else { -1.0 };
            for b in 0..bath_dim {
                let i = spin * bath_dim + b;
                let mut diag = 0.5 * angles.gap * sz;
                for k in 0..modes {
                    diag += bath.frequencies[k] * digit(b, k) as f64;
                }
                h[(i, i)] = diag;
                // σ-part of the coupling: cos α σ_z (diagonal in spin) and −sin α σ_x
                for k in 0..modes {
                    let nk = digit(b, k);
                    if nk < bath.n_max {
                        let amp = bath.couplings[k] * ((nk + 1) as f64).sqrt();
                        let b_up = b + stride(k);
                        let j_same = spin * bath_dim + b_up;
                        h[(i, j_same)] += ca * sz * amp;
                        h[(j_same, i)] += ca * sz * amp;
                        let j_flip = (1 - spin) * bath_dim + b_up;
                        h[(i, j_flip)] -= sa * amp;
                        h[(j_flip, i)] -= sa * amp;
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(h);
        Ok(Self {
            drive: *drive,
            angles,
            bath: bath.clone(),
            bath_dim,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn angles(&self) -> &FrameAngles {
        &self.angles
    }

    /// Reduced spin states in the tilted co-rotating frame at each time, for
    /// a product initial state (given spin state ⊗ thermal modes).
    pub fn trajectory_rotated(&self, spin0: &DensityMatrix2, times: &[f64]) -> Vec<DensityMatrix2> {
        let levels = self.bath.n_max + 1;
        let modes = self.bath.modes();
        let ladders: Vec<Vec<f64>> = self.bath.frequencies.iter().map(|&w| self.bath.ladder_weights(w)).collect();
        let mut components = Vec::new();
        for (p_spin, chi) in spin0.spectral() {
            if p_spin < 1e-14 {
                continue;
            }
            for b in 0..self.bath_dim {
                let mut q = 1.0;
                for (k, ladder) in ladders.iter().enumerate() {
                    let nk = (b / levels.pow((modes - 1 - k) as u32)) % levels;
                    q *= ladder[nk];
                }
                if q < 1e-14 {
                    continue;
                }
                // coefficients in the eigenbasis: c = Vᵀ ψ₀
                let r0 = self.vectors.row(b);
                let r1 = self.vectors.row(self.bath_dim + b);
                let c: Vec<Complex64> = (0..r0.len()).map(|j| chi[0] * r0[j] + chi[1] * r1[j]).collect();
                components.push((p_spin * q, c));
            }
        }
        let dim = 2 * self.bath_dim;
        times
            .iter()
            .map(|&t| {
                let mut rho = Op::zeros();
                for (w, c) in &components {
                    let evolved: Vec<Complex64> = c
                        .iter()
                        .zip(self.energies.iter())
                        .map(|(ci, e)| ci * Complex64::from_polar(1.0, -e * t))
                        .collect();
                    let mut psi = vec![Complex64::from(0.0); dim];
                    for (j, a) in evolved.iter().enumerate() {
                        let col = self.vectors.column(j);
                        for (i, p) in psi.iter_mut().enumerate() {
                            *p += col[i] * a;
                        }
                    }
                    let (up, down) = psi.split_at(self.bath_dim);
                    let mut r = Op::zeros();
                    for (u, d) in up.iter().zip(down) {
                        r[(0, 0)] += u * u.conj();
                        r[(0, 1)] += u * d.conj();
                        r[(1, 1)] += d * d.conj();
                    }
                    r[(1, 0)] = r[(0, 1)].conj();
                    rho += r * Complex64::from(*w);
                }
                DensityMatrix2::from_matrix(&rho)
            })
            .collect()
    }

    /// As [`trajectory_rotated`](Self::trajectory_rotated) but in the
    /// interaction picture of the secular solution (the e^{iσ_zEt/2} frame).
    pub fn trajectory_interaction(&self, spin0_tilde: &DensityMatrix2, times: &[f64]) -> Vec<DensityMatrix2> {
        self.trajectory_rotated(spin0_tilde, times)
            .into_iter()
            .zip(times)
            .map(|(r, &t)| r.conjugate(&z_rotation(self.angles.gap * t)))
            .collect()
    }

    /// Lab-frame reduced state at time t for a lab-frame spin start.
    pub fn lab_state(&self, spin0_lab: &DensityMatrix2, t: f64) -> DensityMatrix2 {
        let w0 = u2(self.angles.alpha);
        let start = spin0_lab.conjugate(&w0);
        let rot = self.trajectory_rotated(&start, &[t])[0];
        let back = u1(self.drive.omega0, t).adjoint() * u2(self.angles.alpha).adjoint();
        rot.conjugate(&back)
    }
}

/// Exact spin ⊗ few-mode propagation; returns the lab-frame reduced state.
pub fn few_mode_exact(
    drive: &DriveParams,
    bath: &FewModeBath,
    spin0_lab: &DensityMatrix2,
    t: f64,
) -> Result<DensityMatrix2> {
    Ok(FewModeSolver::new(drive, bath)?.lab_state(spin0_lab, t))
}
