//! Figure experiments and sweeps. Each sweep point is an independent job run
//! on the rayon pool; rows are sorted by their sweep key afterwards so the
//! output never depends on scheduling.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use berry_decoherence::evolution::{
    echo_coefficients, echo_from_values, fidelity_single_cycle, isolated_echo_fidelity, run_echo_path,
};
use berry_decoherence::paths::{circle_path, tilted_circle_path, PathSpec, TiltedCircle};
use berry_decoherence::{BathSpec, DriveParams, EchoResult, TimeGrid, Variant};
use rayon::prelude::*;

use crate::config::{ExperimentId, PathConfig, PathKind, Settings};
use crate::failure::Failure;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub key: Vec<f64>,
    pub values: Vec<f64>,
}

/// Echo outcome of one sweep point, kept for the summary.
#[derive(Debug, Clone)]
pub struct PointEcho {
    pub key: Vec<f64>,
    pub label: String,
    pub echo: EchoResult,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: String,
    pub rows: Vec<Row>,
    pub echoes: Vec<PointEcho>,
}

impl Table {
    /// The echo of the point with the largest sweep key.
    pub fn last_point(&self) -> Option<&PointEcho> {
        self.echoes.last()
    }

    pub fn csv_body(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.values.iter().map(|&v| num(v)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn key_order(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}

struct JobOut {
    rows: Vec<Row>,
    echo: PointEcho,
}

fn run_jobs<J, F>(header: &str, jobs: Vec<J>, f: F) -> Result<Table, Failure>
where
    J: Send,
    F: Fn(J) -> Result<JobOut, Failure> + Sync + Send,
{
    let outs: Vec<JobOut> = jobs.into_par_iter().map(f).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut echoes = Vec::with_capacity(outs.len());
    for out in outs {
        rows.extend(out.rows);
        echoes.push(out.echo);
    }
    rows.sort_by(|a, b| key_order(&a.key, &b.key));
    echoes.sort_by(|a, b| key_order(&a.key, &b.key));
    Ok(Table { header: header.to_string(), rows, echoes })
}

fn variant(s: &Settings) -> Variant {
    if s.multinoise {
        Variant::MultiNoise
    } else {
        Variant::SingleBath
    }
}

/// Default cycle grid (or the configured maximum step), then refined.
fn cycle_grid(s: &Settings, t0: f64, cutoff: f64) -> Result<TimeGrid, Failure> {
    let base = match s.max_step {
        Some(h) => TimeGrid::with_max_step(t0, h)?,
        None => TimeGrid::for_cycle(t0, s.b, cutoff)?,
    };
    Ok(base.refined(s.refine))
}

fn bath(s: &Settings, cutoff: f64, temperature: f64) -> Result<BathSpec, Failure> {
    Ok(s.coupling.bath(cutoff, temperature)?)
}

/// Both cycles of a uniform-circle echo.
fn circle_echo(s: &Settings, theta: f64, t0: f64, cutoff: f64, temperature: f64) -> Result<EchoResult, Failure> {
    let drive = DriveParams::new(s.b, theta, TAU / t0)?;
    let grid = cycle_grid(s, t0, cutoff)?;
    let (c1, c2) = echo_coefficients(&drive, &bath(s, cutoff, temperature)?, &grid, variant(s))?;
    Ok(echo_from_values(&drive, &c1.final_values(), &c2.final_values())?)
}

fn label(parts: &[(&str, f64)]) -> String {
    parts.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")
}

fn grid3<A: Copy, B: Copy, C: Copy>(a: &[A], b: &[B], c: &[C]) -> Vec<(A, B, C)> {
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for &x in a {
        for &y in b {
            for &z in c {
                out.push((x, y, z));
            }
        }
    }
    out
}

pub const FIG1_HEADER: &str = "t,theta,cutoff,F";
pub const FIG2_HEADER: &str = "T0,cutoff,temperature,F_2T0,F_isolated";
pub const FIG3_HEADER: &str = "T0,cutoff,n1,l1,k1,k1_minus_k2";
pub const FIG4_HEADER: &str = "theta,cutoff,temperature,F_2T0";
pub const FIG6_HEADER: &str = "gamma,theta_prime,F_2T0";

pub fn sweep_header() -> String {
    format!("B,theta,T0,omega0,cutoff,temperature,lambda,{},F_isolated", EchoResult::CSV_HEADER)
}

/// Single-cycle F(t) on [0, T₀] for every (θ, cutoff) at one temperature.
fn fig1(s: &Settings) -> Result<Table, Failure> {
    let t0 = s.single_value("t0_list", &s.t0_list)?;
    let temperature = s.single_value("temperatures", &s.temperatures)?;
    let jobs = grid3(&s.cutoffs, &s.thetas, &[temperature]);
    let segments = s.points - 1;
    run_jobs(FIG1_HEADER, jobs, |(cutoff, theta, temperature)| {
        let drive = DriveParams::new(s.b, theta, TAU / t0)?;
        // align the coefficient grid with the output times
        let base = cycle_grid(s, t0, cutoff)?;
        let grid = TimeGrid::new(t0, base.intervals().div_ceil(segments) * segments)?;
        let (c1, c2) = echo_coefficients(&drive, &bath(s, cutoff, temperature)?, &grid, variant(s))?;
        let mut rows = Vec::with_capacity(s.points);
        for i in 0..=segments {
            let t = if i == segments { t0 } else { i as f64 * t0 / segments as f64 };
            let f = fidelity_single_cycle(&drive, &c1, t)?;
            rows.push(Row { key: vec![cutoff, theta, t], values: vec![t, theta, cutoff, f] });
        }
        let echo = echo_from_values(&drive, &c1.final_values(), &c2.final_values())?;
        Ok(JobOut {
            rows,
            echo: PointEcho { key: vec![cutoff, theta], label: label(&[("cutoff", cutoff), ("theta", theta)]), echo },
        })
    })
}

/// F(2T₀) against T₀ for every (cutoff, temperature), with the isolated spin
/// alongside.
fn fig2(s: &Settings) -> Result<Table, Failure> {
    let theta = s.single_value("thetas", &s.thetas)?;
    let jobs = grid3(&s.cutoffs, &s.temperatures, &s.t0_list);
    run_jobs(FIG2_HEADER, jobs, |(cutoff, temperature, t0)| {
        let echo = circle_echo(s, theta, t0, cutoff, temperature)?;
        let isolated = isolated_echo_fidelity(&DriveParams::new(s.b, theta, TAU / t0)?)?;
        let key = vec![cutoff, temperature, t0];
        Ok(JobOut {
            rows: vec![Row { key: key.clone(), values: vec![t0, cutoff, temperature, echo.fidelity, isolated] }],
            echo: PointEcho {
                key,
                label: label(&[("cutoff", cutoff), ("temperature", temperature), ("T0", t0)]),
                echo,
            },
        })
    })
}

/// Forward-cycle n₁, l₁, k₁ and the echo phase correction k₁ − k₂ at T₀.
fn fig3(s: &Settings) -> Result<Table, Failure> {
    let theta = s.single_value("thetas", &s.thetas)?;
    let temperature = s.single_value("temperatures", &s.temperatures)?;
    let jobs = grid3(&s.cutoffs, &s.t0_list, &[temperature]);
    run_jobs(FIG3_HEADER, jobs, |(cutoff, t0, temperature)| {
        let echo = circle_echo(s, theta, t0, cutoff, temperature)?;
        let c1 = echo.coeffs1;
        let key = vec![cutoff, t0];
        Ok(JobOut {
            rows: vec![Row { key: key.clone(), values: vec![t0, cutoff, c1.n, c1.l, c1.k, echo.phase_correction] }],
            echo: PointEcho { key, label: label(&[("cutoff", cutoff), ("T0", t0)]), echo },
        })
    })
}

/// F(2T₀) against θ for every (cutoff, temperature).
fn fig4(s: &Settings) -> Result<Table, Failure> {
    let t0 = s.single_value("t0_list", &s.t0_list)?;
    let jobs = grid3(&s.cutoffs, &s.temperatures, &s.thetas);
    run_jobs(FIG4_HEADER, jobs, |(cutoff, temperature, theta)| {
        let echo = circle_echo(s, theta, t0, cutoff, temperature)?;
        let key = vec![cutoff, temperature, theta];
        Ok(JobOut {
            rows: vec![Row { key: key.clone(), values: vec![theta, cutoff, temperature, echo.fidelity] }],
            echo: PointEcho {
                key,
                label: label(&[("cutoff", cutoff), ("temperature", temperature), ("theta", theta)]),
                echo,
            },
        })
    })
}

fn path_from(p: &PathConfig, omega0: f64) -> Result<PathSpec, Failure> {
    let w = p.omega0.unwrap_or(omega0);
    Ok(match p.kind {
        PathKind::Circle => circle_path(p.theta_prime, w)?,
        PathKind::Tilted => tilted_circle_path(TiltedCircle { theta_prime: p.theta_prime, gamma: p.gamma, omega_0: w })?,
    })
}

fn path_echo(s: &Settings, path: &PathSpec, cutoff: f64, temperature: f64) -> Result<EchoResult, Failure> {
    let grid = cycle_grid(s, path.period(), cutoff)?;
    Ok(run_echo_path(path, &bath(s, cutoff, temperature)?, &grid, s.b)?)
}

/// F(2T₀) against the tilt γ of the loop axis, for each cone angle θ′.
fn fig6(s: &Settings) -> Result<Table, Failure> {
    let t0 = s.single_value("t0_list", &s.t0_list)?;
    let cutoff = s.single_value("cutoffs", &s.cutoffs)?;
    let temperature = s.single_value("temperatures", &s.temperatures)?;
    let jobs = grid3(&s.theta_primes, &s.gammas, &[()]);
    run_jobs(FIG6_HEADER, jobs, |(theta_prime, gamma, ())| {
        let loop_cfg = PathConfig { kind: PathKind::Tilted, theta_prime, gamma, omega0: None };
        let echo = path_echo(s, &path_from(&loop_cfg, TAU / t0)?, cutoff, temperature)?;
        let key = vec![theta_prime, gamma];
        Ok(JobOut {
            rows: vec![Row { key: key.clone(), values: vec![gamma, theta_prime, echo.fidelity] }],
            echo: PointEcho { key, label: label(&[("theta_prime", theta_prime), ("gamma", gamma)]), echo },
        })
    })
}

fn sweep_row(s: &Settings, theta: f64, t0: f64, cutoff: f64, temperature: f64, echo: &EchoResult) -> Result<Row, Failure> {
    let lambda = bath(s, cutoff, temperature)?.lambda;
    let isolated = isolated_echo_fidelity(&DriveParams::new(s.b, theta, TAU / t0)?)?;
    let mut values = vec![s.b, theta, t0, TAU / t0, cutoff, temperature, lambda];
    values.extend([echo.fidelity, echo.berry_phase, echo.phase_correction, echo.dephasing, echo.eta1, echo.eta2]);
    values.push(isolated);
    Ok(Row { key: vec![theta, t0, cutoff, temperature], values })
}

/// Full echo record over θ × T₀ × cutoff × temperature.
fn sweep(s: &Settings) -> Result<Table, Failure> {
    let mut jobs = Vec::new();
    for &theta in &s.thetas {
        for (cutoff, temperature, t0) in grid3(&s.cutoffs, &s.temperatures, &s.t0_list) {
            jobs.push((theta, t0, cutoff, temperature));
        }
    }
    run_jobs(&sweep_header(), jobs, |(theta, t0, cutoff, temperature)| {
        let echo = circle_echo(s, theta, t0, cutoff, temperature)?;
        let row = sweep_row(s, theta, t0, cutoff, temperature, &echo)?;
        Ok(JobOut {
            echo: PointEcho {
                key: row.key.clone(),
                label: label(&[("theta", theta), ("T0", t0), ("cutoff", cutoff), ("temperature", temperature)]),
                echo,
            },
            rows: vec![row],
        })
    })
}

pub fn run_experiment(s: &Settings) -> Result<Table, Failure> {
    match s.experiment {
        ExperimentId::Fig1 => fig1(s),
        ExperimentId::Fig2 => fig2(s),
        ExperimentId::Fig3 => fig3(s),
        ExperimentId::Fig4 => fig4(s),
        ExperimentId::Fig6 => fig6(s),
        ExperimentId::Sweep => sweep(s),
        ExperimentId::Single => {
            let single = run_single(s)?;
            Ok(Table {
                header: sweep_header(),
                rows: single.row.into_iter().collect(),
                echoes: vec![PointEcho { key: vec![], label: single.label, echo: single.echo }],
            })
        }
    }
}

/// One echo with every intermediate quantity.
#[derive(Debug, Clone)]
pub struct Single {
    pub label: String,
    pub echo: EchoResult,
    /// CSV row in the sweep layout; absent for a configured loop.
    pub row: Option<Row>,
    pub lambda: f64,
    pub f_isolated: Option<f64>,
}

pub fn run_single(s: &Settings) -> Result<Single, Failure> {
    let t0 = s.single_value("t0_list", &s.t0_list)?;
    let cutoff = s.single_value("cutoffs", &s.cutoffs)?;
    let temperature = s.single_value("temperatures", &s.temperatures)?;
    let lambda = bath(s, cutoff, temperature)?.lambda;
    if let Some(p) = &s.path {
        let path = path_from(p, TAU / t0)?;
        let echo = path_echo(s, &path, cutoff, temperature)?;
        let label = label(&[("theta_prime", p.theta_prime), ("gamma", p.gamma), ("T0", path.period())]);
        return Ok(Single { label, echo, row: None, lambda, f_isolated: None });
    }
    let theta = s.single_value("thetas", &s.thetas)?;
    let echo = circle_echo(s, theta, t0, cutoff, temperature)?;
    let row = sweep_row(s, theta, t0, cutoff, temperature, &echo)?;
    let f_isolated = row.values.last().copied();
    let label = label(&[("theta", theta), ("T0", t0), ("cutoff", cutoff), ("temperature", temperature)]);
    Ok(Single { label, echo, row: Some(row), lambda, f_isolated })
}
