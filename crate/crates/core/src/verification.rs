//! Checks of the model's qualitative guarantees on computed trajectories.
//!
//! These are numerical surrogates: the analytic statements concern the
//! exact solution, so every check carries a tolerance for discretisation
//! error.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::fode::Trajectory;
use crate::mittag_leffler::ml_one;
use crate::model::{rhs, thresholds, Equilibrium, EquilibriumKind, ModelParams, State};

/// Largest fraction of nodes a Lyapunov scan may skip before failing.
pub const MAX_SKIPPED_FRACTION: f64 = 0.01;

fn require_states(traj: &Trajectory) -> Result<()> {
    if traj.dimension() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: traj.dimension(),
        });
    }
    Ok(())
}

fn node_state(traj: &Trajectory, node: usize) -> State {
    let x = traj.state(node);
    State::new(x[0], x[1], x[2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonnegativityReport {
    pub passed: bool,
    pub tol: f64,
    /// `max(0, -min_t x_c(t))` per component.
    pub worst_undershoot: Vec<f64>,
    /// Nodes where some component is below `-tol`.
    pub offending_nodes: Vec<usize>,
}

pub fn check_nonnegativity(traj: &Trajectory, tol: f64) -> NonnegativityReport {
    let mut worst = vec![0.0f64; traj.dimension()];
    let mut offending_nodes = Vec::new();
    for (node, x) in traj.states().enumerate() {
        let mut bad = false;
        for (w, &v) in worst.iter_mut().zip(x) {
            *w = w.max(-v);
            bad |= v < -tol;
        }
        if bad {
            offending_nodes.push(node);
        }
    }
    NonnegativityReport {
        passed: offending_nodes.is_empty(),
        tol,
        worst_undershoot: worst,
        offending_nodes,
    }
}

/// `V = S + I + (m/θ) P`.
pub fn total_population_function(params: &ModelParams, state: State) -> f64 {
    state.s + state.i + params.m / params.theta * state.p
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessCertificate {
    pub eta: f64,
    /// `K (r + η)² / (4r)`.
    pub l: f64,
    /// `l / η`.
    pub bound: f64,
    pub epsilon_margin: f64,
    pub v0: f64,
    pub max_v: f64,
    /// `(t, V)` where `V > max(V(0), l/η) + ε`.
    pub violated_nodes: Vec<(f64, f64)>,
    /// Whether the Mittag-Leffler envelope was checked (only when `V(0) > l/η`).
    pub envelope_checked: bool,
    /// `(t, V)` above `(V(0) - l/η) E_α(-η t^α) + l/η + ε`.
    pub envelope_violations: Vec<(f64, f64)>,
    pub passed: bool,
}

pub fn boundedness_certificate(
    params: &ModelParams,
    traj: &Trajectory,
    eta: f64,
) -> Result<BoundednessCertificate> {
    params.validate()?;
    require_states(traj)?;
    let limit = params.mu.min(params.d);
    if !(eta > 0.0 && eta < limit) {
        return Err(Error::param(
            "eta",
            eta,
            "must lie strictly between 0 and min(mu, d)",
        ));
    }
    let l = params.k * (params.r + eta).powi(2) / (4.0 * params.r);
    let bound = l / eta;
    let values: Vec<f64> = (0..traj.len())
        .map(|n| total_population_function(params, node_state(traj, n)))
        .collect();
    let v0 = values.first().copied().unwrap_or(0.0);
    let ceiling = v0.max(bound);
    let epsilon_margin = 1e-9 * ceiling;
    let violated_nodes: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&values)
        .filter(|(_, &v)| !(v <= ceiling + epsilon_margin))
        .map(|(&t, &v)| (t, v))
        .collect();

    let envelope_checked = v0 > bound;
    let mut envelope_violations = Vec::new();
    if envelope_checked {
        let t0 = traj.times[0];
        for (&t, &v) in traj.times.iter().zip(&values) {
            let z = -eta * (t - t0).powf(traj.alpha);
            let envelope = (v0 - bound) * ml_one(traj.alpha, z)? + bound;
            if v > envelope + epsilon_margin {
                envelope_violations.push((t, v));
            }
        }
    }
    let max_v = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    Ok(BoundednessCertificate {
        eta,
        l,
        bound,
        epsilon_margin,
        v0,
        max_v,
        passed: violated_nodes.is_empty() && envelope_violations.is_empty(),
        violated_nodes,
        envelope_checked,
        envelope_violations,
    })
}

/// `x - x* - x* ln(x/x*)`, zero at `x = x*`.
fn log_term(x: f64, target: f64) -> f64 {
    x - target - target * (x / target).ln()
}

/// Lyapunov function for the global stability of `target`.
///
/// * E1: `(S - K - K ln(S/K)) + I + (m/θ) P`
/// * E2: `(S - S1 - S1 ln(S/S1)) + (I - I1 - I1 ln(I/I1)) + (m/θ) P`
/// * E*: the same log form in all three components, P weighted by `m/θ`.
pub fn lyapunov_value(params: &ModelParams, target: &Equilibrium, state: State) -> Result<f64> {
    if !target.exists {
        return Err(Error::NonexistentEquilibrium(target.kind.label()));
    }
    let w = params.m / params.theta;
    let e = target.coords;
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::InadmissibleState(format!(
                "{what} must be positive for the {} Lyapunov function, got {state}",
                target.kind
            )))
        }
    };
    match target.kind {
        EquilibriumKind::E0 => Err(Error::Unsupported(
            "no Lyapunov function for the trivial equilibrium".into(),
        )),
        EquilibriumKind::E1 => {
            need(state.s > 0.0, "S")?;
            Ok(log_term(state.s, e.s) + state.i + w * state.p)
        }
        EquilibriumKind::E2 => {
            need(state.s > 0.0 && state.i > 0.0, "S and I")?;
            Ok(log_term(state.s, e.s) + log_term(state.i, e.i) + w * state.p)
        }
        EquilibriumKind::EStar => {
            need(
                state.s > 0.0 && state.i > 0.0 && state.p > 0.0,
                "S, I and P",
            )?;
            Ok(log_term(state.s, e.s) + log_term(state.i, e.i) + w * log_term(state.p, e.p))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub description: String,
    pub holds: bool,
}

/// The global-stability condition attached to each Lyapunov function.
pub fn global_stability_hypothesis(
    params: &ModelParams,
    kind: EquilibriumKind,
) -> Result<HypothesisCheck> {
    let t = thresholds(params, None)?;
    Ok(match kind {
        EquilibriumKind::E0 => HypothesisCheck {
            description: "E0 is never globally stable".into(),
            holds: false,
        },
        EquilibriumKind::E1 => HypothesisCheck {
            description: format!("R0 = {} < 1", t.r0),
            holds: t.r0 < 1.0,
        },
        EquilibriumKind::E2 => match t.d2 {
            Some(d2) => HypothesisCheck {
                description: format!("d = {} > d2 = {d2}", params.d),
                holds: params.d > d2,
            },
            None => HypothesisCheck {
                description: "d2 not applicable (R0 <= 1)".into(),
                holds: false,
            },
        },
        EquilibriumKind::EStar => match (t.theta1, t.theta2) {
            (Some(t1), Some(t2)) => HypothesisCheck {
                description: format!("theta1 = {t1} < theta = {} < theta2 = {t2}", params.theta),
                holds: t1 < params.theta && params.theta < t2,
            },
            _ => HypothesisCheck {
                description: "theta1 or theta2 not applicable".into(),
                holds: false,
            },
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub target: EquilibriumKind,
    /// `V` per node; NaN where the node was skipped.
    pub values: Vec<f64>,
    /// Largest increase between consecutive evaluated nodes.
    pub max_increase: f64,
    pub slack: f64,
    pub monotone: bool,
    pub skipped_nodes: usize,
    pub hypothesis: HypothesisCheck,
    /// `monotone` and at most 1% of nodes skipped.
    pub passed: bool,
}

pub fn lyapunov_monotonicity(
    params: &ModelParams,
    target: &Equilibrium,
    traj: &Trajectory,
    slack: f64,
) -> Result<LyapunovReport> {
    require_states(traj)?;
    let hypothesis = global_stability_hypothesis(params, target.kind)?;
    let mut values = Vec::with_capacity(traj.len());
    let mut skipped_nodes = 0;
    let mut max_increase = 0.0f64;
    let mut previous: Option<f64> = None;
    for n in 0..traj.len() {
        match lyapunov_value(params, target, node_state(traj, n)) {
            Ok(v) => {
                if let Some(prev) = previous {
                    max_increase = max_increase.max(v - prev);
                }
                previous = Some(v);
                values.push(v);
            }
            Err(Error::InadmissibleState(_)) => {
                skipped_nodes += 1;
                values.push(f64::NAN);
            }
            Err(other) => return Err(other),
        }
    }
    let monotone = max_increase <= slack;
    let skipped_ok = (skipped_nodes as f64) <= MAX_SKIPPED_FRACTION * traj.len() as f64;
    Ok(LyapunovReport {
        target: target.kind,
        values,
        max_increase,
        slack,
        monotone,
        skipped_nodes,
        hypothesis,
        passed: monotone && skipped_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub max_tail_distance: f64,
    pub tail_start_node: usize,
}

/// Max-norm distance to `target` over the final `tail_fraction` of nodes.
pub fn convergence_check(
    traj: &Trajectory,
    target: State,
    tol: f64,
    tail_fraction: f64,
) -> Result<ConvergenceReport> {
    require_states(traj)?;
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::param(
            "tail_fraction",
            tail_fraction,
            "must lie in (0,1]",
        ));
    }
    let tail_len = ((traj.len() as f64 * tail_fraction).ceil() as usize).clamp(1, traj.len());
    let tail_start_node = traj.len() - tail_len;
    let max_tail_distance = (tail_start_node..traj.len())
        .map(|n| node_state(traj, n).max_distance(&target))
        .fold(0.0f64, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) });
    Ok(ConvergenceReport {
        converged: max_tail_distance <= tol,
        max_tail_distance,
        tail_start_node,
    })
}

/// Lipschitz constant of the vector field (1-norm) on `max(|S|,|I|,|P|) ≤ M`.
pub fn lipschitz_bound(params: &ModelParams, m_radius: f64) -> Result<f64> {
    params.validate()?;
    if !(m_radius > 0.0) || !m_radius.is_finite() {
        return Err(Error::param(
            "M",
            m_radius,
            "domain radius must be positive",
        ));
    }
    let p = params;
    let m = m_radius;
    let cross = (2.0 * p.lambda + p.r / p.k) * m;
    let sat2 = (p.a + m) * (p.a + m);
    let response = p.a * m * (p.m + p.theta) / sat2;
    let first = p.r + 2.0 * p.r * m / p.k + cross;
    let second = cross + p.mu + response;
    let third = response + p.d + m * m * (p.m + p.theta) / sat2;
    Ok(first.max(second).max(third))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck {
    pub bound: f64,
    /// Largest observed `|f(X) - f(Y)|₁ / |X - Y|₁`.
    pub max_quotient: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Compares [`lipschitz_bound`] with difference quotients at `samples`
/// random pairs drawn uniformly from `[0, M]³` (the vector field has a pole
/// at `I = -a`, so the negative part of the box is excluded).
pub fn lipschitz_empirical(
    params: &ModelParams,
    m_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<LipschitzCheck> {
    let bound = lipschitz_bound(params, m_radius)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let draw = |rng: &mut StdRng| {
        State::new(
            rng.gen_range(0.0..=m_radius),
            rng.gen_range(0.0..=m_radius),
            rng.gen_range(0.0..=m_radius),
        )
    };
    let mut max_quotient = 0.0f64;
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let fx = rhs(params, x)?;
        let fy = rhs(params, y)?;
        let num: f64 = fx.iter().zip(&fy).map(|(a, b)| (a - b).abs()).sum();
        let den = (x.s - y.s).abs() + (x.i - y.i).abs() + (x.p - y.p).abs();
        if den > 0.0 {
            max_quotient = max_quotient.max(num / den);
        }
    }
    Ok(LipschitzCheck {
        bound,
        max_quotient,
        samples,
        passed: max_quotient <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{equilibrium, Preset};

    fn constant(state: [f64; 3], nodes: usize) -> Trajectory {
        let times = (0..nodes).map(|n| n as f64 * 0.5).collect();
        let rows = vec![state.to_vec(); nodes];
        Trajectory::from_rows(0.9, times, &rows).unwrap()
    }

    #[test]
    fn nonnegativity_detects_undershoot() {
        let ok = check_nonnegativity(&constant([0.0; 3], 5), 1e-8);
        assert!(ok.passed);
        assert_eq!(ok.worst_undershoot, vec![0.0; 3]);

        let bad = check_nonnegativity(&constant([1.0, -0.5, 2.0], 4), 1e-8);
        assert!(!bad.passed);
        assert_eq!(bad.worst_undershoot, vec![0.0, 0.5, 0.0]);
        assert_eq!(bad.offending_nodes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn certificate_numbers() {
        let p = Preset::Example1.params();
        let cert = boundedness_certificate(&p, &constant([30.0, 5.0, 10.0], 3), 0.045).unwrap();
        assert!((cert.l - 40.0 * 2.045f64.powi(2) / 8.0).abs() < 1e-12);
        assert!((cert.bound - 464.7).abs() < 0.05);
        assert!(cert.passed && !cert.envelope_checked);
        assert!(boundedness_certificate(&p, &constant([1.0; 3], 2), 0.09).is_err());
        assert!(boundedness_certificate(&p, &constant([1.0; 3], 2), 0.0).is_err());
    }

    #[test]
    fn lyapunov_vanishes_at_target() {
        let p = Preset::Example1.params();
        let e1 = equilibrium(&p, EquilibriumKind::E1);
        assert_eq!(lyapunov_value(&p, &e1, e1.coords).unwrap(), 0.0);
        assert!(lyapunov_value(&p, &e1, State::new(0.0, 1.0, 1.0)).is_err());
        let q = Preset::Example1Theta05.params();
        let estar = equilibrium(&q, EquilibriumKind::EStar);
        assert_eq!(lyapunov_value(&q, &estar, estar.coords).unwrap(), 0.0);
        assert!(lyapunov_value(&q, &estar, State::new(30.0, 5.0, 10.0)).unwrap() > 0.0);
    }

    #[test]
    fn constant_target_trajectory_is_monotone() {
        let p = Preset::Example3.params();
        let e1 = equilibrium(&p, EquilibriumKind::E1);
        let report = lyapunov_monotonicity(&p, &e1, &constant([40.0, 0.0, 0.0], 10), 1e-3).unwrap();
        assert_eq!(report.max_increase, 0.0);
        assert!(report.passed && report.hypothesis.holds);
    }

    #[test]
    fn convergence_of_constant() {
        let r = convergence_check(
            &constant([1.0, 2.0, 3.0], 20),
            State::new(1.0, 2.0, 3.0),
            1e-12,
            0.1,
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.max_tail_distance, 0.0);
        assert_eq!(r.tail_start_node, 18);
        assert!(convergence_check(&constant([1.0; 3], 2), State::default(), 1.0, 0.0).is_err());
    }

    #[test]
    fn lipschitz_small_radius_limit() {
        let p = Preset::Example1.params();
        let l = lipschitz_bound(&p, 1e-12).unwrap();
        assert!((l - 2.0).abs() < 1e-9);
        assert!(lipschitz_bound(&p, 0.0).is_err());
    }
}
