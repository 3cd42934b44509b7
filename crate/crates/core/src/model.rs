//! Susceptible prey `S`, infected prey `I` and predator `P` with logistic
//! prey growth, mass-action infection and a Holling type II response on the
//! infected prey:
//!
//! ```text
//! D^α S = r S (1 - (S + I)/K) - λ I S
//! D^α I = λ I S - m I P/(a + I) - μ I
//! D^α P = θ I P/(a + I) - d P
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fode::{solve_pece, FodeProblem, SolverConfig, Trajectory, VectorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Intrinsic prey birth rate.
    pub r: f64,
    /// Carrying capacity.
    pub k: f64,
    /// Force of infection.
    pub lambda: f64,
    /// Maximum predation rate.
    pub m: f64,
    /// Death rate of infected prey.
    pub mu: f64,
    /// Half-saturation constant.
    pub a: f64,
    /// Conversion efficiency, at most one.
    pub theta: f64,
    /// Predator death rate.
    pub d: f64,
}

impl ModelParams {
    pub const NAMES: [&'static str; 8] = ["r", "K", "lambda", "m", "mu", "a", "theta", "d"];

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        k: f64,
        lambda: f64,
        m: f64,
        mu: f64,
        a: f64,
        theta: f64,
        d: f64,
    ) -> Result<Self> {
        let p = Self {
            r,
            k,
            lambda,
            m,
            mu,
            a,
            theta,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.entries() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::param(name, value, "must be positive and finite"));
            }
        }
        if self.theta > 1.0 {
            return Err(Error::param(
                "theta",
                self.theta,
                "conversion efficiency must not exceed 1",
            ));
        }
        Ok(())
    }

    pub fn entries(&self) -> [(&'static str, f64); 8] {
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

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.entries()
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries()
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }

    /// Copy with one parameter replaced, validated.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = *self;
        let slot = match name {
            "r" => &mut p.r,
            "K" | "k" => &mut p.k,
            "lambda" => &mut p.lambda,
            "m" => &mut p.m,
            "mu" => &mut p.mu,
            "a" => &mut p.a,
            "theta" => &mut p.theta,
            "d" => &mut p.d,
            other => return Err(Error::Unsupported(format!("unknown parameter `{other}`"))),
        };
        *slot = value;
        p.validate()?;
        Ok(p)
    }

    pub fn r0(&self) -> f64 {
        self.lambda * self.k / self.mu
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Preset::Example1.params()
    }
}

/// Built-in parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Base set: interior equilibrium locally stable.
    Example1,
    /// `K = 200, λ = 0.15, a = 5, θ = 0.9`: interior equilibrium unstable for large α.
    Example1Unstable,
    /// Base set with `θ = 0.5`, inside the global-stability window of the interior equilibrium.
    Example1Theta05,
    /// `θ = 0.08`: predator-free equilibrium globally stable.
    Example2,
    /// `λ = 0.005`: disease-free axial equilibrium globally stable.
    Example3,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Example1,
        Preset::Example1Unstable,
        Preset::Example1Theta05,
        Preset::Example2,
        Preset::Example3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example1Unstable => "example1-unstable",
            Preset::Example1Theta05 => "example1-theta05",
            Preset::Example2 => "example2",
            Preset::Example3 => "example3",
        }
    }

    pub fn params(self) -> ModelParams {
        let base = ModelParams {
            r: 2.0,
            k: 40.0,
            lambda: 0.015,
            m: 0.52,
            mu: 0.28,
            a: 15.0,
            theta: 0.189,
            d: 0.09,
        };
        match self {
            Preset::Example1 => base,
            Preset::Example1Unstable => ModelParams {
                k: 200.0,
                lambda: 0.15,
                a: 5.0,
                theta: 0.9,
                ..base
            },
            Preset::Example1Theta05 => ModelParams { theta: 0.5, ..base },
            Preset::Example2 => ModelParams {
                theta: 0.08,
                ..base
            },
            Preset::Example3 => ModelParams {
                lambda: 0.005,
                ..base
            },
        }
    }

    /// Initial points used for the multi-start runs.
    pub fn initial_states() -> [State; 3] {
        [
            State::new(30.0, 5.0, 10.0),
            State::new(10.0, 20.0, 5.0),
            State::new(50.0, 2.0, 15.0),
        ]
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Unsupported(format!(
                    "unknown preset `{s}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub s: f64,
    pub i: f64,
    pub p: f64,
}

impl State {
    pub const fn new(s: f64, i: f64, p: f64) -> Self {
        Self { s, i, p }
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match x {
            &[s, i, p] => Ok(Self { s, i, p }),
            _ => Err(Error::DimensionMismatch {
                expected: 3,
                got: x.len(),
            }),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.i, self.p]
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.i.is_finite() && self.p.is_finite()
    }

    /// True when any component is negative.
    pub fn has_negative(&self) -> bool {
        self.s < 0.0 || self.i < 0.0 || self.p < 0.0
    }

    pub fn max_distance(&self, other: &State) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.i - other.i).abs())
            .max((self.p - other.p).abs())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.s, self.i, self.p)
    }
}

#[inline]
fn field(p: &ModelParams, s: f64, i: f64, pr: f64) -> [f64; 3] {
    let response = i / (p.a + i);
    [
        p.r * s * (1.0 - (s + i) / p.k) - p.lambda * i * s,
        p.lambda * i * s - p.m * response * pr - p.mu * i,
        p.theta * response * pr - p.d * pr,
    ]
}

/// Right-hand side of the model at `state`.
pub fn rhs(params: &ModelParams, state: State) -> Result<[f64; 3]> {
    if !state.is_finite() {
        return Err(Error::InadmissibleState(format!(
            "non-finite state {state}"
        )));
    }
    if params.a + state.i == 0.0 {
        return Err(Error::InadmissibleState("a + I vanishes".into()));
    }
    Ok(field(params, state.s, state.i, state.p))
}

/// The model as a [`VectorField`] for the fractional solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcoEpiModel {
    pub params: ModelParams,
}

impl EcoEpiModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    /// Integrates the model from `initial` and records the parameters in the
    /// trajectory metadata.
    pub fn simulate(
        &self,
        alpha: f64,
        initial: State,
        config: &SolverConfig,
    ) -> Result<Trajectory> {
        self.simulate_from(alpha, 0.0, initial, config)
    }

    /// As [`simulate`](Self::simulate) with the initial state given at `t0`.
    pub fn simulate_from(
        &self,
        alpha: f64,
        t0: f64,
        initial: State,
        config: &SolverConfig,
    ) -> Result<Trajectory> {
        let problem = FodeProblem::new(alpha, t0, initial.to_array().to_vec(), *self)?;
        let mut traj = solve_pece(&problem, config)?;
        traj.metadata.parameters = self.params.to_map();
        Ok(traj)
    }
}

impl VectorField for EcoEpiModel {
    fn dimension(&self) -> usize {
        3
    }

    fn eval(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        dx.copy_from_slice(&field(&self.params, x[0], x[1], x[2]));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquilibriumKind {
    /// Trivial.
    E0,
    /// Axial, disease and predator free.
    E1,
    /// Planar, predator free.
    E2,
    /// Interior.
    EStar,
}

impl EquilibriumKind {
    pub const ALL: [EquilibriumKind; 4] = [Self::E0, Self::E1, Self::E2, Self::EStar];

    pub fn label(self) -> &'static str {
        match self {
            Self::E0 => "E0",
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::EStar => "E*",
        }
    }
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceCondition {
    pub name: &'static str,
    pub satisfied: bool,
    /// Signed distance to the boundary; positive when satisfied.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    /// Formula coordinates; NaN where the formula is singular.
    pub coords: State,
    pub exists: bool,
    pub conditions: Vec<ExistenceCondition>,
    pub note: Option<&'static str>,
}

/// `(S*, I*, P*)` from the interior formulas, `None` when `θ = d`.
pub fn interior_point(params: &ModelParams) -> Option<State> {
    let p = params;
    if p.theta == p.d {
        return None;
    }
    let i = p.a * p.d / (p.theta - p.d);
    let s = p.k - (1.0 + p.lambda * p.k / p.r) * i;
    let pr = (p.a + i) * (p.lambda * s - p.mu) / p.m;
    Some(State::new(s, i, pr))
}

pub fn equilibrium(params: &ModelParams, kind: EquilibriumKind) -> Equilibrium {
    let p = params;
    let r0 = p.r0();
    let r0_condition = ExistenceCondition {
        name: "R0 > 1",
        satisfied: r0 > 1.0,
        margin: r0 - 1.0,
    };
    match kind {
        EquilibriumKind::E0 => Equilibrium {
            kind,
            coords: State::new(0.0, 0.0, 0.0),
            exists: true,
            conditions: Vec::new(),
            note: None,
        },
        EquilibriumKind::E1 => Equilibrium {
            kind,
            coords: State::new(p.k, 0.0, 0.0),
            exists: true,
            conditions: Vec::new(),
            note: None,
        },
        EquilibriumKind::E2 => {
            let s = p.mu / p.lambda;
            let i = p.r * (p.lambda * p.k - p.mu) / (p.lambda * (p.r + p.lambda * p.k));
            Equilibrium {
                kind,
                coords: State::new(s, i, 0.0),
                exists: r0_condition.satisfied,
                conditions: vec![r0_condition],
                note: None,
            }
        }
        EquilibriumKind::EStar => {
            let theta1 = theta1(p);
            let theta_condition = ExistenceCondition {
                name: "theta > theta1",
                satisfied: theta1.is_some_and(|t| p.theta > t),
                margin: theta1.map_or(f64::NAN, |t| p.theta - t),
            };
            let d_condition = ExistenceCondition {
                name: "theta > d",
                satisfied: p.theta > p.d,
                margin: p.theta - p.d,
            };
            let exists = r0_condition.satisfied && theta_condition.satisfied;
            let (coords, note) = if p.theta <= p.d {
                (
                    State::new(f64::NAN, f64::NAN, f64::NAN),
                    Some("theta <= d makes I* nonpositive or singular"),
                )
            } else {
                (interior_point(p).expect("theta != d"), None)
            };
            Equilibrium {
                kind,
                coords,
                exists,
                conditions: vec![r0_condition, d_condition, theta_condition],
                note,
            }
        }
    }
}

/// All four equilibria in the order E0, E1, E2, E*.
pub fn equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    params.validate()?;
    Ok(EquilibriumKind::ALL
        .iter()
        .map(|&k| equilibrium(params, k))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub r0: f64,
    /// Local-stability predator death threshold for E2.
    pub d1: Option<f64>,
    /// Global-stability predator death threshold for E2.
    pub d2: Option<f64>,
    /// Conversion efficiency above which E* exists.
    pub theta1: Option<f64>,
    /// Upper end of the E* global-stability window.
    pub theta2: Option<f64>,
    /// The `S*` used for `theta2`.
    pub theta2_s_star: Option<f64>,
    /// Node/focus boundary `1 + r/4` for R0 at E2.
    pub r_focus: f64,
}

fn theta1(p: &ModelParams) -> Option<f64> {
    let excess = p.lambda * p.k - p.mu;
    (excess > 0.0).then(|| p.d + p.lambda * p.a * p.d * (p.r + p.lambda * p.k) / (p.r * excess))
}

/// Closed-form thresholds. `theta2` depends on `S*`; by default it is taken
/// from the interior point at `params.theta`, while `theta2_reference`
/// supplies an explicit state instead.
pub fn thresholds(params: &ModelParams, theta2_reference: Option<State>) -> Result<Thresholds> {
    params.validate()?;
    let p = params;
    let excess = p.lambda * p.k - p.mu;
    let applicable = excess > 0.0;
    let d1 = applicable
        .then(|| p.theta * p.r * excess / (p.a * p.lambda * (p.lambda * p.k + p.r) + p.r * excess));
    let d2 = applicable.then(|| p.theta * p.r * excess / (p.a * p.lambda * (p.r + p.lambda * p.k)));

    let s_star = match theta2_reference {
        Some(state) => Some(state.s),
        None => (p.theta > p.d)
            .then(|| interior_point(p))
            .flatten()
            .map(|e| e.s),
    };
    let theta2 = s_star.and_then(|s| {
        let denom = 2.0 * p.k * (p.lambda * s - p.mu) - p.r;
        (denom > 0.0).then(|| p.m * p.d * p.k / denom)
    });

    Ok(Thresholds {
        r0: p.r0(),
        d1,
        d2,
        theta1: theta1(p),
        theta2,
        theta2_s_star: s_star,
        r_focus: 1.0 + p.r / 4.0,
    })
}
