//! Decoherence coefficients n(t), m(t), l(t), k(t) of one cycle.
//!
//! For a constant polar angle every coefficient is a double integral
//! ∫₀^t dt₁ ∫₀^{t₁} dt₂ w(t₂) Re κ(t₂) whose inner primitive does not depend
//! on t₁, so two cumulative passes give the whole record in O(N). Along a
//! general path the weights couple t₁ and t₁ − t₂ and the evaluation is
//! O(N²).
//!
//! Inside the integrands the gap is approximated by the field magnitude B.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{sample_correlation, BathSpec};
use crate::error::{Error, Result};
use crate::frames::{frame_angles, DriveParams};
use crate::paths::{local_frame, PathSpec};
use crate::quadrature::{cumulative_simpson, simpson};

/// Uniform time grid t_j = j·step, j = 0..samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub step: f64,
    pub samples: usize,
}

impl TimeGrid {
    /// `intervals` equal steps over [0, t_max].
    pub fn new(t_max: f64, intervals: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Resolution(format!("grid end time must be > 0, got {t_max}")));
        }
        if intervals < 2 {
            return Err(Error::Resolution(format!("grid needs at least 2 intervals, got {intervals}")));
        }
        Ok(Self { t_max, step: t_max / intervals as f64, samples: intervals + 1 })
    }

    /// The coarsest uniform grid over [0, t_max] with step ≤ `max_step`.
    /// t_max itself is always a sample.
    pub fn with_max_step(t_max: f64, max_step: f64) -> Result<Self> {
        if !(max_step.is_finite() && max_step > 0.0) {
            return Err(Error::Resolution(format!("maximum step must be > 0, got {max_step}")));
        }
        let intervals = ((t_max / max_step) * (1.0 - 1e-12)).ceil().max(2.0) as usize;
        Self::new(t_max, intervals)
    }

    /// Largest admissible step, min(π/(20B), 1/(20Ω)).
    pub fn resolution_bound(b: f64, cutoff: f64) -> f64 {
        (PI / (20.0 * b)).min(1.0 / (20.0 * cutoff))
    }

    /// Default grid for a cycle: half the admissible step, which keeps the
    /// step-halving change of the coefficients below 10⁻⁵ relative.
    pub fn for_cycle(t_max: f64, b: f64, cutoff: f64) -> Result<Self> {
        Self::with_max_step(t_max, 0.5 * Self::resolution_bound(b, cutoff))
    }

    /// The same interval with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self { t_max: self.t_max, step: self.step / factor as f64, samples: self.intervals() * factor + 1 }
    }

    pub fn intervals(&self) -> usize {
        self.samples - 1
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.intervals() {
            self.t_max
        } else {
            j as f64 * self.step
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|j| self.time(j)).collect()
    }

    /// Fails with a resolution error naming the violated bound.
    pub fn validate(&self, b: f64, cutoff: f64) -> Result<()> {
        let slack = 1.0 + 1e-9;
        let osc = PI / (20.0 * b);
        if self.step > osc * slack {
            return Err(Error::Resolution(format!(
                "step {:.6e} exceeds pi/(20 B) = {:.6e} needed to resolve the e^(iBt) oscillation",
                self.step, osc
            )));
        }
        let corr = 1.0 / (20.0 * cutoff);
        if self.step > corr * slack {
            return Err(Error::Resolution(format!(
                "step {:.6e} exceeds 1/(20 cutoff) = {:.6e} needed to resolve the correlation decay",
                self.step, corr
            )));
        }
        Ok(())
    }
}

/// Coefficient values at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientValues {
    pub n: f64,
    pub m: f64,
    pub l: f64,
    pub k: f64,
}

impl CoefficientValues {
    pub fn zero() -> Self {
        Self::default()
    }
}

/// How a coefficient set couples the bath to the spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientVariant {
    /// One bath coupled to σ_z, constant polar angle.
    SingleBath,
    /// Independent identical baths on σ_z and on the rotating transverse
    /// component.
    MultiNoise,
    /// One σ_z bath along a general loop.
    Path(PathCoupling),
    /// A user-supplied correlation record (for instance a discrete bath).
    Kernel,
}

/// Angle entering the path coefficients' weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathCoupling {
    /// The co-rotating mixing angle α(t) = atan2(B sin θ, B cos θ − φ̇).
    /// Reduces exactly to the constant-angle coefficients on a circle.
    #[default]
    MixingAngle,
    /// The field polar angle θ(t) itself (zeroth order in φ̇/B).
    FieldAngle,
}

/// What produced a coefficient set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub variant: CoefficientVariant,
    pub b: f64,
    pub drive: Option<DriveParams>,
    pub bath: Option<BathSpec>,
}

/// Sampled n, m, l, k on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub grid: TimeGrid,
    pub n: Vec<f64>,
    pub m: Vec<f64>,
    pub l: Vec<f64>,
    pub k: Vec<f64>,
    pub provenance: Provenance,
}

impl CoefficientSet {
    pub fn sample(&self, j: usize) -> CoefficientValues {
        CoefficientValues { n: self.n[j], m: self.m[j], l: self.l[j], k: self.k[j] }
    }

    /// Linear interpolation between grid samples, exact at grid times and
    /// clamped to [0, t_max].
    pub fn values_at(&self, t: f64) -> CoefficientValues {
        let last = self.grid.intervals();
        if t >= self.grid.t_max {
            return self.sample(last);
        }
        if t <= 0.0 {
            return self.sample(0);
        }
        let x = t / self.grid.step;
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 {
            return self.sample((nearest as usize).min(last));
        }
        let j = (x.floor() as usize).min(last - 1);
        let w = x - j as f64;
        let lerp = |v: &[f64]| (1.0 - w) * v[j] + w * v[j + 1];
        CoefficientValues { n: lerp(&self.n), m: lerp(&self.m), l: lerp(&self.l), k: lerp(&self.k) }
    }

    pub fn final_values(&self) -> CoefficientValues {
        self.sample(self.grid.intervals())
    }

    /// CSV with columns t, n, m, l, k.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,n,m,l,k\n");
        for j in 0..self.grid.samples {
            let _ = writeln!(
                out,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                self.grid.time(j),
                self.n[j],
                self.m[j],
                self.l[j],
                self.k[j]
            );
        }
        out
    }
}

/// Coefficients of a constant-angle cycle.
pub fn compute_coefficients(drive: &DriveParams, bath: &BathSpec, grid: &TimeGrid) -> Result<CoefficientSet> {
    grid.validate(drive.b, bath.cutoff)?;
    let kappa = sample_correlation(bath, &grid.times())?;
    let angles = frame_angles(drive)?;
    let (s2, c2) = (angles.alpha.sin().powi(2), angles.alpha.cos().powi(2));
    let (n, m, l, k) = secular_record(drive.b, s2, c2, &kappa, grid.step);
    Ok(CoefficientSet {
        grid: *grid,
        n,
        m,
        l,
        k,
        provenance: Provenance {
            variant: CoefficientVariant::SingleBath,
            b: drive.b,
            drive: Some(*drive),
            bath: Some(*bath),
        },
    })
}

/// Constant-angle coefficients from a sampled correlation record κ(t_j).
/// Only the oscillation bound π/(20B) is checked, since the record's own
/// correlation time is unknown here.
pub fn compute_coefficients_from_kernel(
    drive: &DriveParams,
    kappa: &[Complex64],
    grid: &TimeGrid,
) -> Result<CoefficientSet> {
    if kappa.len() != grid.samples {
        return Err(Error::Resolution(format!(
            "correlation record has {} samples, grid has {}",
            kappa.len(),
            grid.samples
        )));
    }
    grid.validate(drive.b, 0.0)?;
    let angles = frame_angles(drive)?;
    let (s2, c2) = (angles.alpha.sin().powi(2), angles.alpha.cos().powi(2));
    let (n, m, l, k) = secular_record(drive.b, s2, c2, kappa, grid.step);
    Ok(CoefficientSet {
        grid: *grid,
        n,
        m,
        l,
        k,
        provenance: Provenance { variant: CoefficientVariant::Kernel, b: drive.b, drive: Some(*drive), bath: None },
    })
}

/// Channel-summed coefficients for identical independent baths on σ_z and
/// on the rotating transverse component. The α weights sum to one, so the
/// output does not depend on the polar angle.
pub fn compute_coefficients_multinoise(
    drive: &DriveParams,
    bath: &BathSpec,
    grid: &TimeGrid,
) -> Result<CoefficientSet> {
    grid.validate(drive.b, bath.cutoff)?;
    let kappa = sample_correlation(bath, &grid.times())?;
    let (n, m, l, k) = secular_record(drive.b, 1.0, 1.0, &kappa, grid.step);
    Ok(CoefficientSet {
        grid: *grid,
        n,
        m,
        l,
        k,
        provenance: Provenance {
            variant: CoefficientVariant::MultiNoise,
            b: drive.b,
            drive: Some(*drive),
            bath: Some(*bath),
        },
    })
}

type Record = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// n = 4s²∫∫cos(Bt₂)Reκ, l = ∫∫(4c² + 2s²cos(Bt₂))Reκ, k = 2s²∫∫sin(Bt₂)Reκ,
/// m = 2s²∫dt₁ e^{n(t₁)} ∫dt₂ Re[e^{−iBt₂}κ].
fn secular_record(b: f64, s2: f64, c2: f64, kappa: &[Complex64], h: f64) -> Record {
    let len = kappa.len();
    let mut fc = Vec::with_capacity(len);
    let mut fs = Vec::with_capacity(len);
    let mut f0 = Vec::with_capacity(len);
    let mut ft = Vec::with_capacity(len);
    for (j, kap) in kappa.iter().enumerate() {
        let (sn, cs) = (b * j as f64 * h).sin_cos();
        fc.push(cs * kap.re);
        fs.push(sn * kap.re);
        f0.push(kap.re);
        ft.push(cs * kap.re + sn * kap.im);
    }
    let ic = cumulative_simpson(&fc, h);
    let is = cumulative_simpson(&fs, h);
    let i0 = cumulative_simpson(&f0, h);
    let it = cumulative_simpson(&ft, h);

    let n: Vec<f64> = cumulative_simpson(&ic, h).into_iter().map(|v| 4.0 * s2 * v).collect();
    let l_inner: Vec<f64> = i0.iter().zip(&ic).map(|(a, c)| 4.0 * c2 * a + 2.0 * s2 * c).collect();
    let l = cumulative_simpson(&l_inner, h);
    let k: Vec<f64> = cumulative_simpson(&is, h).into_iter().map(|v| 2.0 * s2 * v).collect();
    let m_inner: Vec<f64> = it.iter().zip(&n).map(|(a, nv)| a * nv.exp()).collect();
    let m: Vec<f64> = cumulative_simpson(&m_inner, h).into_iter().map(|v| 2.0 * s2 * v).collect();
    (n, m, l, k)
}

/// Primed coefficients along a general loop with the mixing-angle coupling.
pub fn compute_coefficients_path(path: &PathSpec, bath: &BathSpec, grid: &TimeGrid, b: f64) -> Result<CoefficientSet> {
    compute_coefficients_path_with(path, bath, grid, b, PathCoupling::MixingAngle)
}

/// Primed coefficients along a general loop:
/// n′ = 4∫dt₁∫dt₂ s(t₁)s(t₁−t₂)cos(Bt₂)Reκ(t₂), and likewise for l′, k′, m′,
/// with s, c the sine and cosine of the chosen coupling angle.
pub fn compute_coefficients_path_with(
    path: &PathSpec,
    bath: &BathSpec,
    grid: &TimeGrid,
    b: f64,
    coupling: PathCoupling,
) -> Result<CoefficientSet> {
    grid.validate(b, bath.cutoff)?;
    let times = grid.times();
    let kappa = sample_correlation(bath, &times)?;
    let angle: Vec<f64> = times
        .iter()
        .map(|&t| {
            let p = path.point(t);
            match coupling {
                PathCoupling::MixingAngle => local_frame(b, &p).alpha,
                PathCoupling::FieldAngle => p.theta,
            }
        })
        .collect();
    let sa: Vec<f64> = angle.iter().map(|a| a.sin()).collect();
    let ca: Vec<f64> = angle.iter().map(|a| a.cos()).collect();
    let h = grid.step;
    let mut wc = Vec::with_capacity(times.len());
    let mut ws = Vec::with_capacity(times.len());
    let mut wt = Vec::with_capacity(times.len());
    for (j, kap) in kappa.iter().enumerate() {
        let (sn, cs) = (b * times[j]).sin_cos();
        wc.push(cs * kap.re);
        ws.push(sn * kap.re);
        wt.push(cs * kap.re + sn * kap.im);
    }
    let f0: Vec<f64> = kappa.iter().map(|k| k.re).collect();

    let inner: Vec<[f64; 4]> = (0..times.len())
        .into_par_iter()
        .map(|i| {
            let mut bn = Vec::with_capacity(i + 1);
            let mut bl = Vec::with_capacity(i + 1);
            let mut bk = Vec::with_capacity(i + 1);
            let mut bm = Vec::with_capacity(i + 1);
            for j in 0..=i {
                let (s_lag, c_lag) = (sa[i - j], ca[i - j]);
                bn.push(s_lag * wc[j]);
                bl.push(4.0 * ca[i] * c_lag * f0[j] + 2.0 * sa[i] * s_lag * wc[j]);
                bk.push(s_lag * ws[j]);
                bm.push(s_lag * wt[j]);
            }
            [
                sa[i] * simpson(&bn, h),
                simpson(&bl, h),
                sa[i] * simpson(&bk, h),
                sa[i] * simpson(&bm, h),
            ]
        })
        .collect();
    let col = |c: usize| inner.iter().map(|v| v[c]).collect::<Vec<f64>>();
    let n: Vec<f64> = cumulative_simpson(&col(0), h).into_iter().map(|v| 4.0 * v).collect();
    let l = cumulative_simpson(&col(1), h);
    let k: Vec<f64> = cumulative_simpson(&col(2), h).into_iter().map(|v| 2.0 * v).collect();
    let m_inner: Vec<f64> = col(3).iter().zip(&n).map(|(a, nv)| a * nv.exp()).collect();
    let m: Vec<f64> = cumulative_simpson(&m_inner, h).into_iter().map(|v| 2.0 * v).collect();
    Ok(CoefficientSet {
        grid: *grid,
        n,
        m,
        l,
        k,
        provenance: Provenance { variant: CoefficientVariant::Path(coupling), b, drive: None, bath: Some(*bath) },
    })
}
