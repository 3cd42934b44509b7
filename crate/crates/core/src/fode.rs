//! Fractional Adams–Bashforth–Moulton predictor–corrector (PECE) for Caputo
//! initial value problems of commensurate order `0 < α ≤ 1`.
//!
//! The problem `D^α x = f(t, x)`, `x(t0) = x0` is integrated in its Volterra
//! form
//!
//! ```text
//! x(t) = x0 + 1/Γ(α) ∫_{t0}^{t} (t - s)^{α-1} f(s, x(s)) ds
//! ```
//!
//! on a uniform grid. The predictor is the product rectangle rule over the
//! history; the corrector is the product trapezoidal rule, applied
//! `corrector_iterations` times. At `α = 1` this is the classical
//! Adams–Bashforth/Moulton pair of order two.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::special::gamma;

/// Default cap on grid nodes; the memory term costs O(n²).
pub const DEFAULT_MAX_NODES: usize = 2_000_000;

/// Any state component beyond this magnitude is treated as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Right-hand side `f(t, x)` of a first-order system.
pub trait VectorField {
    fn dimension(&self) -> usize;
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]);
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).eval(t, x, dx)
    }
}

/// Adapts a closure `(t, x, dx)` of fixed dimension into a [`VectorField`].
pub struct FnField<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnField<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64])> VectorField for FnField<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (self.f)(t, x, dx)
    }
}

#[derive(Debug, Clone)]
pub struct FodeProblem<F> {
    alpha: f64,
    t0: f64,
    initial_state: Vec<f64>,
    rhs: F,
}

impl<F: VectorField> FodeProblem<F> {
    pub fn new(alpha: f64, t0: f64, initial_state: Vec<f64>, rhs: F) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param("alpha", alpha, "order must lie in (0,1]"));
        }
        if !(t0 >= 0.0) || !t0.is_finite() {
            return Err(Error::param("t0", t0, "must be finite and non-negative"));
        }
        if initial_state.len() != rhs.dimension() {
            return Err(Error::DimensionMismatch {
                expected: rhs.dimension(),
                got: initial_state.len(),
            });
        }
        if let Some(&bad) = initial_state.iter().find(|x| !x.is_finite()) {
            return Err(Error::param("initial_state", bad, "must be finite"));
        }
        Ok(Self {
            alpha,
            t0,
            initial_state,
            rhs,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn dimension(&self) -> usize {
        self.initial_state.len()
    }

    pub fn rhs(&self) -> &F {
        &self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub step: f64,
    pub t_end: f64,
    pub corrector_iterations: usize,
    /// Keep only the most recent `n` history nodes in the memory sums.
    /// `None` keeps the full history.
    pub memory_truncation: Option<usize>,
    pub max_nodes: usize,
}

impl SolverConfig {
    pub fn new(step: f64, t_end: f64) -> Self {
        Self {
            step,
            t_end,
            corrector_iterations: 1,
            memory_truncation: None,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    pub fn with_corrector_iterations(mut self, iterations: usize) -> Self {
        self.corrector_iterations = iterations;
        self
    }

    /// Short-memory variant: the fractional integrals only see the last
    /// `window` nodes. This trades accuracy for O(n·window) cost and is only
    /// sensible once the kernel `(t - s)^{α-1}` has decayed enough.
    pub fn with_memory_truncation(mut self, window: usize) -> Self {
        self.memory_truncation = Some(window);
        self
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    /// Number of grid nodes (including the initial one) from `t0` to `t_end`.
    /// A span that is not a whole number of steps is rounded up.
    pub fn node_count(&self, t0: f64) -> Result<usize> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::param(
                "step",
                self.step,
                "must be positive and finite",
            ));
        }
        if !(self.t_end >= t0) || !self.t_end.is_finite() {
            return Err(Error::param(
                "t_end",
                self.t_end,
                "must be finite and not before t0",
            ));
        }
        if self.corrector_iterations == 0 {
            return Err(Error::param(
                "corrector_iterations",
                0.0,
                "must be at least one",
            ));
        }
        if self.memory_truncation == Some(0) {
            return Err(Error::param(
                "memory_truncation",
                0.0,
                "window must be positive",
            ));
        }
        let ratio = (self.t_end - t0) / self.step;
        let rounded = ratio.round();
        let steps = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded
        } else {
            ratio.ceil()
        };
        if steps >= self.max_nodes as f64 {
            return Err(Error::NodeCapExceeded {
                nodes: if steps < usize::MAX as f64 {
                    steps as usize + 1
                } else {
                    usize::MAX
                },
                cap: self.max_nodes,
            });
        }
        Ok(steps as usize + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMetadata {
    pub step: f64,
    pub t0: f64,
    pub t_end: f64,
    pub corrector_iterations: usize,
    pub memory_truncation: Option<usize>,
    /// Echo of the model parameters that produced the run, if any.
    pub parameters: BTreeMap<String, f64>,
}

/// Grid solution: node times and one state row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    states: Vec<f64>,
    dimension: usize,
    pub alpha: f64,
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    /// Builds a trajectory from externally produced rows (e.g. a CSV file).
    pub fn from_rows(alpha: f64, times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dimension = rows.first().map_or(0, Vec::len);
        if times.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: rows.len(),
            });
        }
        if let Some(row) = rows.iter().find(|r| r.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: row.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InadmissibleState(
                "times must be strictly increasing".into(),
            ));
        }
        let step = if times.len() > 1 {
            times[1] - times[0]
        } else {
            0.0
        };
        let metadata = TrajectoryMetadata {
            step,
            t0: times.first().copied().unwrap_or(0.0),
            t_end: times.last().copied().unwrap_or(0.0),
            corrector_iterations: 1,
            memory_truncation: None,
            parameters: BTreeMap::new(),
        };
        Ok(Self {
            times,
            states: rows.iter().flatten().copied().collect(),
            dimension,
            alpha,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn state(&self, node: usize) -> &[f64] {
        &self.states[node * self.dimension..(node + 1) * self.dimension]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dimension.max(1))
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states().map(|s| s[index]).collect()
    }

    /// Flat row-major state storage.
    pub fn raw_states(&self) -> &[f64] {
        &self.states
    }
}

/// Product-integration weights for advancing from node `n` to `n + 1`.
///
/// Both sets are the exact integrals `∫ (t_{n+1} - τ)^{α-1} φ_j(τ) dτ` of
/// the rule's basis functions (without the `1/Γ(α)` factor), so each sums
/// to `t_{n+1}^α / α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbmWeights {
    /// `b_{j,n+1}`, `j = 0..=n` (piecewise-constant basis).
    pub predictor: Vec<f64>,
    /// `a_{j,n+1}`, `j = 0..=n+1` (hat-function basis).
    pub corrector: Vec<f64>,
}

pub fn abm_weights(alpha: f64, n: usize, step: f64) -> Result<AbmWeights> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", alpha, "order must lie in (0,1]"));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::param("step", step, "must be positive and finite"));
    }
    let h_alpha = step.powf(alpha);
    let pred_scale = h_alpha / alpha;
    let corr_scale = h_alpha / (alpha * (alpha + 1.0));

    let predictor = (0..=n)
        .map(|j| pred_scale * predictor_coefficient(alpha, n - j))
        .collect();
    let mut corrector = Vec::with_capacity(n + 2);
    corrector.push(corr_scale * corrector_first(alpha, n));
    corrector.extend((1..=n).map(|j| corr_scale * corrector_coefficient(alpha, n - j)));
    corrector.push(corr_scale);
    Ok(AbmWeights {
        predictor,
        corrector,
    })
}

/// Below this lag the weight differences are evaluated directly.
const SERIES_LAG: usize = 16;

/// Sum of `coeff_j u^j` for the binomial coefficients of `exponent`, starting at `first`.
fn binomial_tail(exponent: f64, first: usize, u: f64, weight: impl Fn(usize, f64) -> f64) -> f64 {
    // c_j = binom(exponent, j)
    let mut c = 1.0;
    for j in 0..first {
        c *= (exponent - j as f64) / (j + 1) as f64;
    }
    let mut sum = 0.0;
    let mut u_pow = 1.0;
    for j in first..first + 60 {
        let term = weight(j, c) * u_pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        c *= (exponent - j as f64) / (j + 1) as f64;
        u_pow *= u;
    }
    sum
}

/// `(k+1)^α - k^α`
fn predictor_coefficient(alpha: f64, k: usize) -> f64 {
    let kf = k as f64;
    if k < SERIES_LAG {
        return (kf + 1.0).powf(alpha) - kf.powf(alpha);
    }
    // k^{α-1} Σ_{j≥1} binom(α,j) k^{1-j}
    kf.powf(alpha - 1.0) * binomial_tail(alpha, 1, 1.0 / kf, |_, c| c)
}

/// `(k+2)^{α+1} + k^{α+1} - 2(k+1)^{α+1}`
fn corrector_coefficient(alpha: f64, k: usize) -> f64 {
    let beta = alpha + 1.0;
    let kf = k as f64;
    if k < SERIES_LAG {
        return (kf + 2.0).powf(beta) + kf.powf(beta) - 2.0 * (kf + 1.0).powf(beta);
    }
    // k^{β-2} Σ_{j≥2} binom(β,j) (2^j - 2) k^{2-j}
    kf.powf(beta - 2.0) * binomial_tail(beta, 2, 1.0 / kf, |j, c| c * (2f64.powi(j as i32) - 2.0))
}

/// `n^{α+1} - (n-α)(n+1)^α`, the weight of the initial node.
fn corrector_first(alpha: f64, n: usize) -> f64 {
    let nf = n as f64;
    if n < SERIES_LAG {
        return nf.powf(alpha + 1.0) - (nf - alpha) * (nf + 1.0).powf(alpha);
    }
    // n^{α-1} Σ_{j≥2} (α binom(α,j-1) - binom(α,j)) n^{2-j}
    let u = 1.0 / nf;
    let mut prev = alpha; // binom(α,1)
    let mut sum = 0.0;
    let mut u_pow = 1.0;
    for j in 2..62 {
        let current = prev * (alpha - (j - 1) as f64) / j as f64;
        let term = (alpha * prev - current) * u_pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        prev = current;
        u_pow *= u;
    }
    nf.powf(alpha - 1.0) * sum
}

fn check_finite(node: usize, time: f64, x: &[f64]) -> Result<()> {
    for (component, &value) in x.iter().enumerate() {
        if !value.is_finite() || value.abs() > DIVERGENCE_THRESHOLD {
            return Err(Error::Divergence {
                node,
                time,
                component,
                value,
            });
        }
    }
    Ok(())
}

/// Reversed dot product `Σ_i weights[len-1-i] * values[i]`.
#[inline]
fn memory_sum(weights: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), values.len());
    weights
        .iter()
        .rev()
        .zip(values)
        .fold(0.0, |acc, (w, v)| acc + w * v)
}

pub fn solve_pece<F: VectorField>(
    problem: &FodeProblem<F>,
    config: &SolverConfig,
) -> Result<Trajectory> {
    let nodes = config.node_count(problem.t0)?;
    let dim = problem.dimension();
    let alpha = problem.alpha;
    let h = config.step;
    let t0 = problem.t0;
    let x0 = &problem.initial_state;
    let rhs = &problem.rhs;

    let steps = nodes - 1;
    let pred_coeff: Vec<f64> = (0..steps.max(1))
        .map(|k| predictor_coefficient(alpha, k))
        .collect();
    let corr_coeff: Vec<f64> = (0..steps.max(1))
        .map(|k| corrector_coefficient(alpha, k))
        .collect();
    let h_alpha = h.powf(alpha);
    let pred_scale = h_alpha / gamma(alpha + 1.0);
    let corr_scale = h_alpha / gamma(alpha + 2.0);

    let mut times = Vec::with_capacity(nodes);
    let mut states = Vec::with_capacity(nodes * dim);
    // history of f, one contiguous column per component
    let mut history: Vec<Vec<f64>> = vec![Vec::with_capacity(nodes); dim];

    let mut x = x0.clone();
    let mut fx = vec![0.0; dim];
    check_finite(0, t0, &x)?;
    rhs.eval(t0, &x, &mut fx);
    times.push(t0);
    states.extend_from_slice(&x);
    for (col, &f) in history.iter_mut().zip(&fx) {
        col.push(f);
    }

    let mut pred_sum = vec![0.0; dim];
    let mut corr_sum = vec![0.0; dim];
    for n in 0..steps {
        let t_next = t0 + (n + 1) as f64 * h;
        let start = match config.memory_truncation {
            Some(window) => (n + 1).saturating_sub(window),
            None => 0,
        };
        let corr_start = start.max(1);
        let first_weight = corrector_first(alpha, n);

        for c in 0..dim {
            let col = &history[c];
            pred_sum[c] = memory_sum(&pred_coeff[..=n - start], &col[start..=n]);
            let mut s = if corr_start <= n {
                memory_sum(&corr_coeff[..=n - corr_start], &col[corr_start..=n])
            } else {
                0.0
            };
            if start == 0 {
                s += first_weight * col[0];
            }
            corr_sum[c] = s;
        }

        for c in 0..dim {
            x[c] = x0[c] + pred_scale * pred_sum[c];
        }
        for _ in 0..config.corrector_iterations {
            rhs.eval(t_next, &x, &mut fx);
            for c in 0..dim {
                x[c] = x0[c] + corr_scale * (fx[c] + corr_sum[c]);
            }
        }
        check_finite(n + 1, t_next, &x)?;
        rhs.eval(t_next, &x, &mut fx);

        times.push(t_next);
        states.extend_from_slice(&x);
        for (col, &f) in history.iter_mut().zip(&fx) {
            col.push(f);
        }
    }

    Ok(Trajectory {
        times,
        states,
        dimension: dim,
        alpha,
        metadata: TrajectoryMetadata {
            step: h,
            t0,
            t_end: config.t_end,
            corrector_iterations: config.corrector_iterations,
            memory_truncation: config.memory_truncation,
            parameters: BTreeMap::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_linear(lambda: f64) -> FnField<impl Fn(f64, &[f64], &mut [f64])> {
        FnField::new(1, move |_, x: &[f64], dx: &mut [f64]| dx[0] = lambda * x[0])
    }

    #[test]
    fn integer_order_weights_are_rectangle_and_trapezoid() {
        let h = 0.1;
        for n in [0usize, 1, 5, 40] {
            let w = abm_weights(1.0, n, h).unwrap();
            assert!(w.predictor.iter().all(|&b| (b - h).abs() < 1e-15));
            assert_eq!(w.corrector.len(), n + 2);
            for (j, &a) in w.corrector.iter().enumerate() {
                let expected = if j == 0 || j == n + 1 { h / 2.0 } else { h };
                assert!((a - expected).abs() < 1e-15, "n={n} j={j} a={a}");
            }
        }
    }

    #[test]
    fn first_predictor_weight_half_order() {
        let h = 0.01;
        let w = abm_weights(0.5, 0, h).unwrap();
        assert!((w.predictor[0] - 2.0 * h.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weight_sums_match_kernel_integral() {
        for &alpha in &[0.3, 0.75, 0.95] {
            for &n in &[0usize, 3, 17, 250] {
                let h = 0.05;
                let w = abm_weights(alpha, n, h).unwrap();
                let exact = (h * (n + 1) as f64).powf(alpha) / alpha;
                let pred: f64 = w.predictor.iter().sum();
                let corr: f64 = w.corrector.iter().sum();
                assert!((pred - exact).abs() < 1e-12 * exact);
                assert!((corr - exact).abs() < 1e-12 * exact);
                assert!(w.predictor.iter().all(|&b| b > 0.0));
                assert!(w.corrector.iter().all(|&a| a > 0.0));
            }
        }
    }

    #[test]
    fn series_branch_agrees_with_direct_formula_at_switch() {
        // at moderate lags the direct formulas are still accurate to ~1e-13
        for &alpha in &[0.2, 0.5, 0.85, 1.0] {
            for k in [16usize, 20, 40] {
                let kf = k as f64;
                let direct_p = (kf + 1.0).powf(alpha) - kf.powf(alpha);
                let beta = alpha + 1.0;
                let direct_c = (kf + 2.0).powf(beta) + kf.powf(beta) - 2.0 * (kf + 1.0).powf(beta);
                let direct_a0 = kf.powf(beta) - (kf - alpha) * (kf + 1.0).powf(alpha);
                assert!(
                    (predictor_coefficient(alpha, k) - direct_p).abs() < 1e-12 * direct_p.abs()
                );
                assert!(
                    (corrector_coefficient(alpha, k) - direct_c).abs()
                        < 1e-9 * direct_c.abs().max(1e-3)
                );
                assert!((corrector_first(alpha, k) - direct_a0).abs() < 1e-9 * direct_a0.abs());
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = scalar_linear(-1.0);
        assert!(FodeProblem::new(1.2, 0.0, vec![1.0], &f).is_err());
        assert!(FodeProblem::new(0.0, 0.0, vec![1.0], &f).is_err());
        assert!(FodeProblem::new(0.5, 0.0, vec![f64::NAN], &f).is_err());
        assert!(matches!(
            FodeProblem::new(0.5, 0.0, vec![1.0, 2.0], &f),
            Err(Error::DimensionMismatch { .. })
        ));

        let problem = FodeProblem::new(0.5, 0.0, vec![1.0], &f).unwrap();
        let capped = SolverConfig::new(1e-3, 10.0).with_max_nodes(100);
        assert!(matches!(
            solve_pece(&problem, &capped),
            Err(Error::NodeCapExceeded { .. })
        ));
        assert!(solve_pece(&problem, &SolverConfig::new(0.0, 1.0)).is_err());
        assert!(solve_pece(
            &problem,
            &SolverConfig::new(0.1, 1.0).with_corrector_iterations(0)
        )
        .is_err());
    }

    #[test]
    fn zero_span_gives_initial_state_only() {
        let f = scalar_linear(-1.0);
        let problem = FodeProblem::new(0.7, 2.0, vec![3.5], &f).unwrap();
        let traj = solve_pece(&problem, &SolverConfig::new(0.1, 2.0)).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.state(0), &[3.5]);
        assert_eq!(traj.times, vec![2.0]);
    }

    #[test]
    fn divergence_is_reported() {
        let f = scalar_linear(50.0);
        let problem = FodeProblem::new(1.0, 0.0, vec![1.0], &f).unwrap();
        let err = solve_pece(&problem, &SolverConfig::new(0.1, 100.0)).unwrap_err();
        match err {
            Error::Divergence {
                node, component, ..
            } => {
                assert!(node > 0);
                assert_eq!(component, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_is_uniform() {
        let f = scalar_linear(-1.0);
        let problem = FodeProblem::new(0.9, 0.0, vec![1.0], &f).unwrap();
        let traj = solve_pece(&problem, &SolverConfig::new(0.05, 500.0)).unwrap();
        assert_eq!(traj.len(), 10_001);
        assert_eq!(*traj.times.last().unwrap(), 500.0);
        assert!(traj
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - 0.05).abs() < 1e-12));
    }
}
