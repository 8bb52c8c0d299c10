//! Experiment configuration: a JSON file, per-experiment defaults and
//! command-line overrides, resolved into one validated [`Settings`].

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::fmt;
use std::path::Path;

use berry_decoherence::paths::{tilted_circle_path, TiltedCircle};
use berry_decoherence::{frames::frame_angles, BathSpec, DriveParams};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig6,
    Sweep,
    Single,
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Sweep => "sweep",
            Self::Single => "single",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Circle,
    Tilted,
}

/// A closed field loop. For `circle`, `theta_prime` is the polar angle of the
/// cone about z and `gamma` must be zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub kind: PathKind,
    pub theta_prime: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
}

/// Keys accepted in a config file. Every key is optional; absent keys take
/// the experiment's defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<ExperimentId>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub theta: Option<f64>,
    pub thetas: Option<Vec<f64>>,
    pub omega0: Option<f64>,
    pub t0_list: Option<Vec<f64>>,
    pub lambda_norm: Option<f64>,
    pub lambda: Option<f64>,
    pub cutoff: Option<f64>,
    pub cutoffs: Option<Vec<f64>>,
    pub temperature: Option<f64>,
    pub temperatures: Option<Vec<f64>>,
    pub theta_prime: Option<f64>,
    pub theta_primes: Option<Vec<f64>>,
    pub gammas: Option<Vec<f64>>,
    pub path: Option<PathConfig>,
    pub max_step: Option<f64>,
    pub refine: Option<usize>,
    pub points: Option<usize>,
    pub multinoise: Option<bool>,
    pub out: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line. They win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub b: Option<f64>,
    pub theta: Option<f64>,
    pub omega0: Option<f64>,
    pub cutoff: Option<f64>,
    pub lambda_norm: Option<f64>,
    pub lambda: Option<f64>,
    pub temperature: Option<f64>,
    pub multinoise: bool,
    pub gammas: Option<Vec<f64>>,
    pub theta_prime: Option<f64>,
    pub max_step: Option<f64>,
}

/// Coupling strength, either as the integrated noise power λΩ²/2 (held
/// fixed across cutoffs) or as raw λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    LambdaNorm(f64),
    Lambda(f64),
}

impl Coupling {
    pub fn bath(&self, cutoff: f64, temperature: f64) -> berry_decoherence::Result<BathSpec> {
        match *self {
            Self::LambdaNorm(v) => BathSpec::from_lambda_norm(v, cutoff, temperature),
            Self::Lambda(v) => BathSpec::new(v, cutoff, temperature),
        }
    }
}

/// Fully resolved configuration. Its JSON form is echoed into every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub experiment: ExperimentId,
    #[serde(rename = "B")]
    pub b: f64,
    pub thetas: Vec<f64>,
    /// Cycle periods T₀; each sets Ω₀ = 2π/T₀.
    pub t0_list: Vec<f64>,
    pub coupling: Coupling,
    pub cutoffs: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub theta_primes: Vec<f64>,
    pub gammas: Vec<f64>,
    pub path: Option<PathConfig>,
    pub max_step: Option<f64>,
    pub refine: usize,
    pub points: usize,
    pub multinoise: bool,
}

fn default_t0_axis() -> Vec<f64> {
    let mut v: Vec<f64> = (1..=8).map(|i| 0.25 * i as f64).collect();
    v.extend((3..=20).map(f64::from));
    v
}

fn defaults(experiment: ExperimentId) -> Settings {
    let circle = vec![TAU / 2.0];
    let mut s = Settings {
        experiment,
        b: 100.0,
        thetas: vec![FRAC_PI_4],
        t0_list: circle,
        coupling: Coupling::LambdaNorm(2.0),
        cutoffs: vec![20.0],
        temperatures: vec![0.0],
        theta_primes: vec![FRAC_PI_4],
        gammas: vec![0.0],
        path: None,
        max_step: None,
        refine: 1,
        points: 201,
        multinoise: false,
    };
    match experiment {
        ExperimentId::Fig1 => {
            s.thetas = vec![FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];
            s.cutoffs = vec![2.0, 20.0];
        }
        ExperimentId::Fig2 => {
            s.t0_list = default_t0_axis();
            s.cutoffs = vec![200.0, 20.0, 2.0];
            s.temperatures = vec![0.0, 1.0, 5.0];
        }
        ExperimentId::Fig3 => {
            s.t0_list = (1..=40).map(|i| 0.5 * i as f64).collect();
            s.cutoffs = vec![20.0, 2.0];
        }
        ExperimentId::Fig4 => {
            s.thetas = (1..=20).map(|i| i as f64 * PI / 40.0).collect();
            s.cutoffs = vec![2.0, 20.0, 200.0];
            s.temperatures = vec![0.0, 1.0, 5.0];
        }
        ExperimentId::Fig6 => {
            s.cutoffs = vec![2.0];
            s.theta_primes = vec![FRAC_PI_4, FRAC_PI_3];
            s.gammas = (0..=10).map(|i| 0.05 * i as f64).collect();
        }
        ExperimentId::Sweep | ExperimentId::Single => {}
    }
    s
}

fn exclusive<T>(scalar: Option<T>, list: Option<Vec<T>>, names: (&str, &str)) -> Result<Option<Vec<T>>, Failure> {
    match (scalar, list) {
        (Some(_), Some(_)) => Err(Failure::Config(format!("give either `{}` or `{}`, not both", names.0, names.1))),
        (Some(v), None) => Ok(Some(vec![v])),
        (None, list) => Ok(list),
    }
}

impl Settings {
    /// Defaults, then the file, then the flags.
    pub fn resolve(experiment: ExperimentId, file: FileConfig, flags: Overrides) -> Result<Self, Failure> {
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(Failure::Config(format!("config file is for `{e}` but `{experiment}` was requested")));
            }
        }
        let mut s = defaults(experiment);
        if let Some(b) = flags.b.or(file.b) {
            s.b = b;
        }
        let thetas = exclusive(file.theta, file.thetas, ("theta", "thetas"))?;
        if let Some(v) = flags.theta.map(|x| vec![x]).or(thetas) {
            s.thetas = v;
        }
        let periods = match (file.omega0, file.t0_list) {
            (Some(_), Some(_)) => return Err(Failure::Config("give either `omega0` or `t0_list`, not both".into())),
            (Some(w), None) => Some(vec![period_of(w)?]),
            (None, list) => list,
        };
        if let Some(v) = flags.omega0.map(period_of).transpose()?.map(|t| vec![t]).or(periods) {
            s.t0_list = v;
        }
        let coupling = match (file.lambda_norm, file.lambda) {
            (Some(_), Some(_)) => {
                return Err(Failure::Config("give either `lambda_norm` or `lambda`, not both".into()));
            }
            (Some(v), None) => Some(Coupling::LambdaNorm(v)),
            (None, Some(v)) => Some(Coupling::Lambda(v)),
            (None, None) => None,
        };
        let flag_coupling = match (flags.lambda_norm, flags.lambda) {
            (Some(_), Some(_)) => {
                return Err(Failure::Config("give either --lambda-norm or --lambda, not both".into()));
            }
            (Some(v), None) => Some(Coupling::LambdaNorm(v)),
            (None, Some(v)) => Some(Coupling::Lambda(v)),
            (None, None) => None,
        };
        if let Some(c) = flag_coupling.or(coupling) {
            s.coupling = c;
        }
        let cutoffs = exclusive(file.cutoff, file.cutoffs, ("cutoff", "cutoffs"))?;
        if let Some(v) = flags.cutoff.map(|x| vec![x]).or(cutoffs) {
            s.cutoffs = v;
        }
        let temps = exclusive(file.temperature, file.temperatures, ("temperature", "temperatures"))?;
        if let Some(v) = flags.temperature.map(|x| vec![x]).or(temps) {
            s.temperatures = v;
        }
        let primes = exclusive(file.theta_prime, file.theta_primes, ("theta_prime", "theta_primes"))?;
        if let Some(v) = flags.theta_prime.map(|x| vec![x]).or(primes) {
            s.theta_primes = v;
        }
        if let Some(v) = flags.gammas.or(file.gammas) {
            s.gammas = v;
        }
        s.path = file.path;
        s.max_step = flags.max_step.or(file.max_step);
        if let Some(r) = file.refine {
            s.refine = r;
        }
        if let Some(p) = file.points {
            s.points = p;
        }
        s.multinoise = flags.multinoise || file.multinoise.unwrap_or(false);
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), Failure> {
        let bad = |msg: String| Err(Failure::Config(msg));
        for (name, list) in [
            ("thetas", &self.thetas),
            ("t0_list", &self.t0_list),
            ("cutoffs", &self.cutoffs),
            ("temperatures", &self.temperatures),
            ("theta_primes", &self.theta_primes),
            ("gammas", &self.gammas),
        ] {
            if list.is_empty() {
                return bad(format!("sweep list `{name}` is empty"));
            }
            if list.iter().any(|v| !v.is_finite()) {
                return bad(format!("sweep list `{name}` contains a non-finite value"));
            }
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return bad(format!("B must be > 0, got {}", self.b));
        }
        if let Some(&t) = self.thetas.iter().find(|t| !(0.0..=PI).contains(*t)) {
            return bad(format!("theta {t} outside [0, pi]"));
        }
        if let Some(&t) = self.t0_list.iter().find(|t| **t <= 0.0) {
            return bad(format!("cycle period {t} must be > 0"));
        }
        if self.refine == 0 {
            return bad("refine must be >= 1".into());
        }
        if self.points < 2 {
            return bad(format!("points must be >= 2, got {}", self.points));
        }
        if let Some(h) = self.max_step {
            if !(h.is_finite() && h > 0.0) {
                return bad(format!("max_step must be > 0, got {h}"));
            }
        }
        for &cutoff in &self.cutoffs {
            for &temp in &self.temperatures {
                self.coupling.bath(cutoff, temp).map_err(|e| Failure::Config(e.to_string()))?;
            }
        }
        for &theta in &self.thetas {
            for &t0 in &self.t0_list {
                let drive = DriveParams::new(self.b, theta, TAU / t0).map_err(|e| Failure::Config(e.to_string()))?;
                frame_angles(&drive).map_err(|e| Failure::Config(format!("theta {theta}, T0 {t0}: {e}")))?;
            }
        }
        let needs_loops = self.experiment == ExperimentId::Fig6;
        if needs_loops {
            for &tp in &self.theta_primes {
                for &gamma in &self.gammas {
                    tilted_circle_path(TiltedCircle { theta_prime: tp, gamma, omega_0: TAU / self.t0_list[0] })
                        .map_err(|e| Failure::Config(format!("theta_prime {tp}, gamma {gamma}: {e}")))?;
                }
            }
        }
        if let Some(p) = &self.path {
            if p.kind == PathKind::Circle && p.gamma != 0.0 {
                return bad("a circle path has no tilt; drop `gamma` or use kind \"tilted\"".into());
            }
            if let Some(w) = p.omega0 {
                period_of(w)?;
            }
        }
        if self.multinoise && (needs_loops || self.path.is_some()) {
            return bad("the multi-noise coupling is only available for uniform circles".into());
        }
        Ok(())
    }

    /// Fails unless the named axis holds exactly one value.
    pub fn single_value(&self, name: &str, list: &[f64]) -> Result<f64, Failure> {
        match list {
            [v] => Ok(*v),
            _ => Err(Failure::Config(format!(
                "experiment `{}` takes a single `{name}`, got {} values",
                self.experiment,
                list.len()
            ))),
        }
    }

    /// Compact JSON echo written into CSV provenance lines.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("settings serialize")
    }
}

fn period_of(omega0: f64) -> Result<f64, Failure> {
    if omega0.is_finite() && omega0 > 0.0 {
        Ok(TAU / omega0)
    } else {
        Err(Failure::Config(format!("omega0 must be > 0, got {omega0}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FileConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse(r#"{"B": 100, "cutof": 2}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn flags_win_over_file() {
        let file = parse(r#"{"B": 50, "cutoffs": [2, 20], "temperature": 1}"#).unwrap();
        let flags = Overrides { b: Some(80.0), cutoff: Some(7.0), ..Default::default() };
        let s = Settings::resolve(ExperimentId::Sweep, file, flags).unwrap();
        assert_eq!(s.b, 80.0);
        assert_eq!(s.cutoffs, vec![7.0]);
        assert_eq!(s.temperatures, vec![1.0]);
    }

    #[test]
    fn omega0_pins_the_period() {
        let flags = Overrides { omega0: Some(4.0), ..Default::default() };
        let s = Settings::resolve(ExperimentId::Fig2, FileConfig::default(), flags).unwrap();
        assert_eq!(s.t0_list, vec![TAU / 4.0]);
    }

    #[test]
    fn fig_defaults_follow_captions() {
        let f1 = defaults(ExperimentId::Fig1);
        assert_eq!(f1.cutoffs, vec![2.0, 20.0]);
        assert_eq!(f1.coupling, Coupling::LambdaNorm(2.0));
        assert_eq!(f1.t0_list, vec![PI]);
        let f2 = defaults(ExperimentId::Fig2);
        assert_eq!(f2.cutoffs, vec![200.0, 20.0, 2.0]);
        assert_eq!(f2.temperatures, vec![0.0, 1.0, 5.0]);
        assert_eq!(f2.thetas, vec![FRAC_PI_4]);
    }

    #[test]
    fn empty_sweep_list_is_a_config_error() {
        let file = parse(r#"{"temperatures": []}"#).unwrap();
        let err = Settings::resolve(ExperimentId::Fig4, file, Overrides::default()).unwrap_err();
        assert!(matches!(err, Failure::Config(ref m) if m.contains("temperatures")), "{err}");
    }

    #[test]
    fn conflicting_keys_are_rejected() {
        for text in [r#"{"lambda": 1, "lambda_norm": 2}"#, r#"{"theta": 1, "thetas": [1]}"#, r#"{"omega0": 1, "t0_list": [1]}"#] {
            let err = Settings::resolve(ExperimentId::Sweep, parse(text).unwrap(), Overrides::default());
            assert!(err.is_err(), "{text}");
        }
    }

    #[test]
    fn pole_crossing_loop_is_rejected() {
        let file = parse(r#"{"theta_primes": [0.5], "gammas": [0.5]}"#).unwrap();
        assert!(Settings::resolve(ExperimentId::Fig6, file, Overrides::default()).is_err());
    }

    #[test]
    fn echo_is_stable_json() {
        let s = Settings::resolve(ExperimentId::Single, FileConfig::default(), Overrides::default()).unwrap();
        let echo = s.echo();
        assert!(echo.starts_with(r#"{"experiment":"single","B":100.0,"#), "{echo}");
        assert_eq!(echo, s.clone().echo());
    }
}
