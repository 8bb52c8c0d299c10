//! `berry-echo`: runs the figure experiments and parameter sweeps of the
//! berry-decoherence library and writes CSV.
//!
//! Exit codes: 0 success, 1 output error, 2 configuration error,
//! 3 numerical-accuracy failure.

mod config;
mod experiments;
mod failure;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{ExperimentId, FileConfig, Overrides, Settings};
use experiments::{num, run_experiment, run_single, Single, Table};
use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "berry-echo", version, about = "Berry-phase decoherence experiments with CSV output")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentId,
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Field magnitude B.
    #[arg(long = "B", value_name = "X")]
    b: Option<f64>,
    /// Polar angle θ of the field (single value).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Rotation rate Ω₀; pins the cycle period to 2π/Ω₀.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    omega0: Option<f64>,
    /// Bath cutoff frequency Ω (single value).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    cutoff: Option<f64>,
    /// Integrated noise power λΩ²/2.
    #[arg(long = "lambda-norm", value_name = "X", allow_negative_numbers = true)]
    lambda_norm: Option<f64>,
    /// Raw coupling λ, as an alternative to --lambda-norm.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Bath temperature (single value).
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    temp: Option<f64>,
    /// Write CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Couple identical independent baths to both noise directions.
    #[arg(long)]
    multinoise: bool,
    /// Tilt angles γ of the loop axis for fig6.
    #[arg(long = "gamma-list", value_name = "A,B,C", value_delimiter = ',', allow_negative_numbers = true)]
    gamma_list: Option<Vec<f64>>,
    /// Cone angle θ′ of the tilted loop (single value).
    #[arg(long = "theta-prime", value_name = "X")]
    theta_prime: Option<f64>,
    /// Largest time step of the coefficient grid.
    #[arg(long = "max-step", value_name = "X")]
    max_step: Option<f64>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            b: self.b,
            theta: self.theta,
            omega0: self.omega0,
            cutoff: self.cutoff,
            lambda_norm: self.lambda_norm,
            lambda: self.lambda,
            temperature: self.temp,
            multinoise: self.multinoise,
            gammas: self.gamma_list.clone(),
            theta_prime: self.theta_prime,
            max_step: self.max_step,
        }
    }
}

fn provenance(settings: &Settings) -> String {
    format!(
        "# berry-echo {}\n# experiment: {}\n# config: {}\n",
        env!("CARGO_PKG_VERSION"),
        settings.experiment,
        settings.echo()
    )
}

fn warnings_summary(out: &mut String, warnings: &[String]) {
    if warnings.is_empty() {
        let _ = writeln!(out, "positivity warnings: none");
        return;
    }
    let _ = writeln!(out, "positivity warnings: {}", warnings.len());
    for w in warnings.iter().take(5) {
        let _ = writeln!(out, "  {w}");
    }
    if warnings.len() > 5 {
        let _ = writeln!(out, "  ... {} more", warnings.len() - 5);
    }
}

fn table_summary(settings: &Settings, table: &Table, dest: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}: {} rows written to {dest}", settings.experiment, table.rows.len());
    if let Some(last) = table.last_point() {
        let e = &last.echo;
        let _ = writeln!(out, "last point: {}", last.label);
        let _ = writeln!(out, "  Phi = {}", num(e.berry_phase));
        let _ = writeln!(out, "  delta_Phi = {}", num(e.phase_correction));
        let _ = writeln!(out, "  l1_plus_l2 = {}", num(e.dephasing));
        let _ = writeln!(out, "  F_2T0 = {}", num(e.fidelity));
    }
    let warnings: Vec<String> = table
        .echoes
        .iter()
        .flat_map(|p| p.echo.warnings.iter().map(move |w| format!("{}: {w}", p.label)))
        .collect();
    warnings_summary(&mut out, &warnings);
    out
}

fn single_report(settings: &Settings, single: &Single) -> String {
    let e = &single.echo;
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("point", single.label.clone());
    line("B", num(settings.b));
    line("lambda", num(single.lambda));
    line("variant", if settings.multinoise { "multinoise" } else { "single bath" }.into());
    line("T0", num(e.period));
    for (i, (a, c)) in [(&e.angles1, &e.coeffs1), (&e.angles2, &e.coeffs2)].into_iter().enumerate() {
        let i = i + 1;
        line(&format!("alpha{i}"), num(a.alpha));
        line(&format!("E{i}"), num(a.gap));
        line(&format!("zeta{i}"), num(a.zeta));
        line(&format!("n{i}"), num(c.n));
        line(&format!("m{i}"), num(c.m));
        line(&format!("l{i}"), num(c.l));
        line(&format!("k{i}"), num(c.k));
    }
    line("eta1", num(e.eta1));
    line("eta2", num(e.eta2));
    line("Phi", num(e.berry_phase));
    line("delta_Phi", num(e.phase_correction));
    line("l1_plus_l2", num(e.dephasing));
    // overlap with the same protocol run without the bath
    line("F(2T0)", format!("{:.12}", e.fidelity_vs_isolated));
    // overlap with the ideal adiabatic echo state, as in the CSV column
    line("F_2T0", format!("{:.12}", e.fidelity));
    if let Some(f) = single.f_isolated {
        line("F_isolated(2T0)", format!("{f:.12}"));
    }
    let warnings: Vec<String> = e.warnings.iter().map(ToString::to_string).collect();
    warnings_summary(&mut out, &warnings);
    out
}

fn write_csv(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out_path = cli.out.clone().or_else(|| file.out.clone().map(PathBuf::from));
    let settings = Settings::resolve(cli.experiment, file, cli.overrides())?;

    if settings.experiment == ExperimentId::Single {
        let single = run_single(&settings)?;
        print!("{}", single_report(&settings, &single));
        if let (Some(path), Some(row)) = (&out_path, &single.row) {
            let table = Table { header: experiments::sweep_header(), rows: vec![row.clone()], echoes: vec![] };
            write_csv(Some(path), &(provenance(&settings) + &table.csv_body()))?;
        }
        return Ok(());
    }

    let table = run_experiment(&settings)?;
    write_csv(out_path.as_ref(), &(provenance(&settings) + &table.csv_body()))?;
    match &out_path {
        Some(p) => print!("{}", table_summary(&settings, &table, &p.display().to_string())),
        None => eprint!("{}", table_summary(&settings, &table, "standard output")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("berry-echo: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
