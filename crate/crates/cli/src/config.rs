//! Run configuration: TOML file merged with command-line flags.
//!
//! ```toml
//! preset = "example1"          # base parameter set (default example1)
//! model.theta = 0.5            # per-parameter overrides: r K lambda m mu a theta d
//! solver.alpha = [0.85, 0.95]
//! solver.step = 0.05
//! solver.t0 = 0.0
//! solver.t_end = 500.0
//! solver.corrector_iterations = 1
//! solver.memory_truncation = 4000
//! initial_states = [[30, 5, 10], [10, 20, 5]]
//! output.dir = "out"
//! output.format = "csv"
//! ```

use std::path::{Path, PathBuf};

use ecoepi_core::{ModelParams, Preset, SolverConfig, State};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub initial_states: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub r: Option<f64>,
    #[serde(rename = "K", alias = "k")]
    pub k: Option<f64>,
    pub lambda: Option<f64>,
    pub m: Option<f64>,
    pub mu: Option<f64>,
    pub a: Option<f64>,
    pub theta: Option<f64>,
    pub d: Option<f64>,
}

impl ModelSection {
    fn overrides(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("r", self.r),
            ("K", self.k),
            ("lambda", self.lambda),
            ("m", self.m),
            ("mu", self.mu),
            ("a", self.a),
            ("theta", self.theta),
            ("d", self.d),
        ]
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub alpha: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub corrector_iterations: Option<usize>,
    pub memory_truncation: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub preset: Option<String>,
    pub alpha: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub initial_states: Option<Vec<State>>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub params: ModelParams,
    pub alphas: Vec<f64>,
    pub initial_states: Vec<State>,
    pub t0: f64,
    pub step: f64,
    pub t_end: f64,
    pub corrector_iterations: usize,
    pub memory_truncation: Option<usize>,
    pub out: PathBuf,
}

pub const DEFAULT_ALPHAS: [f64; 2] = [0.85, 0.95];
pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_T_END: f64 = 500.0;

impl RunConfig {
    pub fn resolve(file: Option<ConfigFile>, flags: Overrides) -> CliResult<Self> {
        let file = file.unwrap_or_default();
        if let Some(format) = &file.output.format {
            if format != "csv" {
                return Err(CliError::Validation(format!(
                    "output.format `{format}` is not supported (only csv)"
                )));
            }
        }
        let preset = match flags.preset.as_deref().or(file.preset.as_deref()) {
            Some(name) => Some(parse_preset(name)?),
            None => None,
        };
        let mut params = preset.unwrap_or(Preset::Example1).params();
        for (name, value) in file.model.overrides() {
            if let Some(v) = value {
                params = params
                    .with(name, v)
                    .map_err(|e| CliError::Validation(format!("model.{name}: {e}")))?;
            }
        }
        let alphas = flags
            .alpha
            .or(file.solver.alpha)
            .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
        if alphas.is_empty() {
            return Err(CliError::Validation("alpha list is empty".into()));
        }
        for &a in &alphas {
            validate_alpha(a)?;
        }
        let initial_states = match flags.initial_states {
            Some(states) => states,
            None => match file.initial_states {
                Some(rows) => rows
                    .into_iter()
                    .map(|[s, i, p]| State::new(s, i, p))
                    .collect(),
                None => vec![Preset::initial_states()[0]],
            },
        };
        if initial_states.is_empty() {
            return Err(CliError::Validation("no initial states".into()));
        }
        for x in &initial_states {
            if !x.is_finite() || x.has_negative() {
                return Err(CliError::Validation(format!(
                    "initial state {x} must be finite and non-negative"
                )));
            }
        }
        let t0 = file.solver.t0.unwrap_or(0.0);
        let step = flags.step.or(file.solver.step).unwrap_or(DEFAULT_STEP);
        let t_end = flags.t_end.or(file.solver.t_end).unwrap_or(DEFAULT_T_END);
        let corrector_iterations = file.solver.corrector_iterations.unwrap_or(1);
        if file.solver.memory_truncation == Some(0) {
            return Err(CliError::Validation(
                "solver.memory_truncation must be positive".into(),
            ));
        }
        let config = RunConfig {
            preset,
            params,
            alphas,
            initial_states,
            t0,
            step,
            t_end,
            corrector_iterations,
            memory_truncation: file.solver.memory_truncation,
            out: flags
                .out
                .or(file.output.dir)
                .unwrap_or_else(|| PathBuf::from("out")),
        };
        config.solver_config().node_count(t0)?;
        if !(t0 >= 0.0) {
            return Err(CliError::Validation(format!(
                "solver.t0 = {t0} must be non-negative"
            )));
        }
        Ok(config)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::new(self.step, self.t_end)
            .with_corrector_iterations(self.corrector_iterations);
        if let Some(w) = self.memory_truncation {
            c = c.with_memory_truncation(w);
        }
        c
    }
}

pub fn parse_preset(name: &str) -> CliResult<Preset> {
    name.parse::<Preset>()
        .map_err(|e| CliError::Validation(e.to_string()))
}

pub fn validate_alpha(a: f64) -> CliResult<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "alpha = {a}: order must lie in (0,1]"
        )))
    }
}

/// Parses `0.85`, `2/3` and the like.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let n: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad number `{text}`"))?;
            let d: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad number `{text}`"))?;
            n / d
        }
        None => text.parse().map_err(|_| format!("bad number `{text}`"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

/// Parses `S,I,P`.
pub fn parse_state(text: &str) -> Result<State, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(parse_number)
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [s, i, p] => Ok(State::new(s, i, p)),
        _ => Err(format!("initial state `{text}` needs three values S,I,P")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_parse() {
        let file = ConfigFile::parse(
            "preset = \"example2\"\nmodel.theta = 0.07\nsolver.alpha = [0.9]\nsolver.t_end = 20\ninitial_states = [[1, 2, 3]]\n",
        )
        .unwrap();
        let run = RunConfig::resolve(Some(file), Overrides::default()).unwrap();
        assert_eq!(run.preset, Some(Preset::Example2));
        assert_eq!(run.params.theta, 0.07);
        assert_eq!(run.alphas, vec![0.9]);
        assert_eq!(run.t_end, 20.0);
        assert_eq!(run.initial_states, vec![State::new(1.0, 2.0, 3.0)]);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = ConfigFile::parse("solver.stepsize = 0.1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("stepsize"), "{err}");
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse("solver.alpha = [0.9]\nsolver.step = 0.1\n").unwrap();
        let flags = Overrides {
            alpha: Some(vec![0.5, 1.0]),
            preset: Some("example3".into()),
            ..Overrides::default()
        };
        let run = RunConfig::resolve(Some(file), flags).unwrap();
        assert_eq!(run.alphas, vec![0.5, 1.0]);
        assert_eq!(run.step, 0.1);
        assert_eq!(run.params, Preset::Example3.params());
    }

    #[test]
    fn invalid_values_are_validation_errors() {
        let bad_alpha = Overrides {
            alpha: Some(vec![1.2]),
            ..Overrides::default()
        };
        let err = RunConfig::resolve(None, bad_alpha).unwrap_err();
        assert!(err.to_string().contains("order must lie in (0,1]"));
        let err = RunConfig::resolve(
            Some(ConfigFile::parse("initial_states = [[1, -2, 3]]").unwrap()),
            Overrides::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        let bad_preset = Overrides {
            preset: Some("nope".into()),
            ..Overrides::default()
        };
        assert!(RunConfig::resolve(None, bad_preset).is_err());
    }

    #[test]
    fn numbers_and_states() {
        assert!((parse_number("2/3").unwrap() - 2.0 / 3.0).abs() < 1e-16);
        assert_eq!(parse_state("30,5,10").unwrap(), State::new(30.0, 5.0, 10.0));
        assert!(parse_state("1,2").is_err());
        assert!(parse_number("x").is_err());
    }
}
