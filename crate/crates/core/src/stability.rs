//! Local stability of the equilibria for a commensurate order `α`.
//!
//! An equilibrium is asymptotically stable when every Jacobian eigenvalue
//! satisfies `|arg ξ| > απ/2` (Matignon). At the interior point the
//! eigenvalues are the roots of `ξ³ + A1 ξ² + A2 ξ + A3`, and the sign
//! pattern of the coefficients and discriminant gives four sufficient cases
//! that are reported alongside the eigenvalue verdict.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{thresholds, Equilibrium, EquilibriumKind, ModelParams, State};

/// Width of the marginal band around `|arg ξ| = απ/2`, in radians.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Relative tolerance for the `A1 A2 = A3` equality.
pub const ROUTH_TIE_TOLERANCE: f64 = 1e-9;

/// Eigenvalues below this fraction of the spectral scale count as zero.
const ZERO_EIGENVALUE_TOLERANCE: f64 = 1e-12;

/// Analytic Jacobian of the vector field at `state`.
pub fn jacobian(params: &ModelParams, state: State) -> Result<Matrix3<f64>> {
    let p = params;
    let State { s, i, p: pr } = state;
    let sat = p.a + i;
    if !(sat > 0.0) {
        return Err(Error::InadmissibleState("a + I must be positive".into()));
    }
    let sat2 = sat * sat;
    Ok(Matrix3::new(
        p.r - p.r * (2.0 * s + i) / p.k - p.lambda * i,
        -(p.r / p.k + p.lambda) * s,
        0.0,
        p.lambda * i,
        p.lambda * s - p.m * p.a * pr / sat2 - p.mu,
        -p.m * i / sat,
        0.0,
        p.theta * p.a * pr / sat2,
        p.theta * i / sat - p.d,
    ))
}

/// `F(ξ) = ξ³ + A1 ξ² + A2 ξ + A3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCharacteristic {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub discriminant: f64,
    /// `A1 A2 - A3`.
    pub routh_product: f64,
}

impl CubicCharacteristic {
    pub fn from_coefficients(a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            a1,
            a2,
            a3,
            discriminant: discriminant_terms(a1, a2, a3).iter().sum(),
            routh_product: a1 * a2 - a3,
        }
    }

    /// Characteristic polynomial `det(ξI - J)` of a 3×3 matrix.
    pub fn from_matrix(j: &Matrix3<f64>) -> Self {
        let minors = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)] + j[(0, 0)] * j[(2, 2)]
            - j[(0, 2)] * j[(2, 0)]
            + j[(1, 1)] * j[(2, 2)]
            - j[(1, 2)] * j[(2, 1)];
        Self::from_coefficients(-j.trace(), minors, -j.determinant())
    }

    pub fn eval(&self, xi: Complex64) -> Complex64 {
        ((xi + self.a1) * xi + self.a2) * xi + self.a3
    }

    fn derivative(&self, xi: Complex64) -> Complex64 {
        (3.0 * xi + 2.0 * self.a1) * xi + self.a2
    }

    /// Sum of the magnitudes of the terms in the discriminant expansion.
    pub fn discriminant_scale(&self) -> f64 {
        discriminant_terms(self.a1, self.a2, self.a3)
            .iter()
            .map(|t| t.abs())
            .sum()
    }
}

/// `18 A1 A2 A3`, `(A1 A2)²`, `-4 A3 A1³`, `-4 A2³`, `-27 A3²`.
fn discriminant_terms(a1: f64, a2: f64, a3: f64) -> [f64; 5] {
    [
        18.0 * a1 * a2 * a3,
        (a1 * a2) * (a1 * a2),
        -4.0 * a3 * a1 * a1 * a1,
        -4.0 * a2 * a2 * a2,
        -27.0 * a3 * a3,
    ]
}

/// Coefficients of the characteristic cubic at the interior equilibrium in
/// closed form.
pub fn characteristic_cubic(params: &ModelParams, estar: State) -> Result<CubicCharacteristic> {
    let p = params;
    let State { s, i, p: pr } = estar;
    if !(s > 0.0 && i > 0.0 && pr > 0.0) {
        return Err(Error::InadmissibleState(format!(
            "interior equilibrium must be strictly positive, got {estar}"
        )));
    }
    let sat2 = (p.a + i) * (p.a + i);
    let a1 = p.r * s / p.k - p.m * i * pr / sat2;
    let a2 =
        p.a * p.m * p.d * pr / sat2 + p.r * p.lambda * i * s / p.k + p.lambda * p.lambda * i * s
            - p.r * p.m * s * i * pr / (p.k * sat2);
    let a3 = p.r * p.m * p.d * p.a * s * pr / (p.k * sat2);
    Ok(CubicCharacteristic::from_coefficients(a1, a2, a3))
}

/// Three eigenvalues with their principal arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSpectrum {
    pub eigenvalues: [Complex64; 3],
    pub args: [f64; 3],
    pub min_abs_arg: f64,
}

impl EigenSpectrum {
    pub fn from_eigenvalues(mut eigenvalues: [Complex64; 3]) -> Self {
        eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let args = eigenvalues.map(|z| z.arg());
        let min_abs_arg = args.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
        Self {
            eigenvalues,
            args,
            min_abs_arg,
        }
    }

    pub fn from_matrix(j: &Matrix3<f64>) -> Self {
        let ev = j.complex_eigenvalues();
        Self::from_eigenvalues([ev[0], ev[1], ev[2]])
    }

    fn scale(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(1.0, |m: f64, z| m.max(z.norm()))
    }

    fn is_zero(&self, z: Complex64) -> bool {
        z.norm() <= ZERO_EIGENVALUE_TOLERANCE * self.scale()
    }

    pub fn has_zero_eigenvalue(&self) -> bool {
        self.eigenvalues.iter().any(|&z| self.is_zero(z))
    }

    pub fn all_real(&self) -> bool {
        self.eigenvalues.iter().all(|z| z.im == 0.0)
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |m, z| m.max(z.re))
    }

    /// True when two eigenvalues coincide to `rel_tol` of the spectral scale.
    pub fn has_repeated(&self, rel_tol: f64) -> bool {
        let e = &self.eigenvalues;
        let tol = rel_tol * self.scale();
        (e[0] - e[1]).norm() <= tol || (e[0] - e[2]).norm() <= tol || (e[1] - e[2]).norm() <= tol
    }

    /// `[(ξ1 - ξ2)(ξ1 - ξ3)(ξ2 - ξ3)]²`
    pub fn root_discriminant(&self) -> f64 {
        let e = &self.eigenvalues;
        let v = (e[0] - e[1]) * (e[0] - e[2]) * (e[1] - e[2]);
        (v * v).re
    }
}

/// Roots of the cubic from the eigenvalues of its companion matrix, each
/// refined by Newton steps on the polynomial.
pub fn cubic_roots(cubic: &CubicCharacteristic) -> EigenSpectrum {
    let c = cubic;
    if c.a3 == 0.0 {
        // exact zero root; the rest solve a quadratic
        let [x, y] = quadratic_roots(c.a1, c.a2);
        return EigenSpectrum::from_eigenvalues([Complex64::new(0.0, 0.0), x, y]);
    }
    let companion = Matrix3::new(-c.a1, -c.a2, -c.a3, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let ev = companion.complex_eigenvalues();
    let mut roots = [ev[0], ev[1], ev[2]];

    for z in roots.iter_mut() {
        *z = polish(c, *z);
    }
    // restore exact conjugate symmetry of the complex pair
    roots.sort_by(|x, y| x.im.total_cmp(&y.im));
    if roots[0].im < 0.0 && roots[2].im > 0.0 {
        let upper = roots[2];
        roots[0] = upper.conj();
        roots[1].im = 0.0;
    } else {
        for z in roots.iter_mut() {
            z.im = 0.0;
        }
    }
    EigenSpectrum::from_eigenvalues(roots)
}

fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

/// Newton steps that are kept only while they shrink the residual.
fn polish(c: &CubicCharacteristic, mut z: Complex64) -> Complex64 {
    let mut residual = c.eval(z).norm();
    for _ in 0..3 {
        let slope = c.derivative(z);
        if slope.norm() == 0.0 {
            break;
        }
        let candidate = z - c.eval(z) / slope;
        let r = c.eval(candidate).norm();
        if !(r < residual) {
            break;
        }
        z = candidate;
        residual = r;
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatignonStatus {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatignonOutcome {
    pub status: MatignonStatus,
    /// `min |arg ξ| - απ/2` over the nonzero eigenvalues.
    pub margin: f64,
    /// `(2/π) min |arg ξ|`, capped at 1. Zero means no order in (0, 1] stabilises.
    pub critical_order: f64,
    pub zero_eigenvalue: bool,
}

pub fn matignon_check(spectrum: &EigenSpectrum, alpha: f64) -> Result<MatignonOutcome> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", alpha, "order must lie in (0,1]"));
    }
    let zero_eigenvalue = spectrum.has_zero_eigenvalue();
    let min_arg = spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.args)
        .filter(|(z, _)| !spectrum.is_zero(**z))
        .fold(f64::INFINITY, |m, (_, a)| m.min(a.abs()));
    let margin = min_arg - alpha * PI / 2.0;
    let status = if margin < -TIE_TOLERANCE {
        MatignonStatus::Unstable
    } else if zero_eigenvalue || margin <= TIE_TOLERANCE {
        MatignonStatus::Marginal
    } else {
        MatignonStatus::Stable
    };
    let critical_order = if min_arg.is_finite() {
        (2.0 / PI * min_arg).min(1.0)
    } else {
        0.0
    };
    Ok(MatignonOutcome {
        status,
        margin,
        critical_order,
        zero_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityLabel {
    StableNode,
    StableFocus,
    /// Matignon-stable although some eigenvalue has a nonnegative real part.
    StableNonHyperbolic,
    Marginal,
    UnstableNode,
    UnstableFocus,
    Unstable,
}

impl StabilityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::StableNode => "stable-node",
            Self::StableFocus => "stable-focus",
            Self::StableNonHyperbolic => "stable (Matignon, non-hyperbolic-real-part)",
            Self::Marginal => "marginal",
            Self::UnstableNode => "unstable-node",
            Self::UnstableFocus => "unstable-focus",
            Self::Unstable => "unstable",
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(
            self,
            Self::StableNode | Self::StableFocus | Self::StableNonHyperbolic
        )
    }
}

impl fmt::Display for StabilityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sufficient conditions on the interior cubic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignCase {
    /// `D > 0, A1 > 0, A3 > 0, A1 A2 - A3 > 0`: stable for every α.
    I,
    /// `D < 0, A1 ≥ 0, A2 ≥ 0, A3 > 0, α < 2/3`: stable.
    II,
    /// `D < 0, A1 < 0, A2 < 0, α > 2/3`: unstable.
    III,
    /// `D < 0, A1 > 0, A2 > 0, A1 A2 = A3`: stable for α < 1.
    IV,
}

impl SignCase {
    pub const ALL: [Self; 4] = [Self::I, Self::II, Self::III, Self::IV];

    pub fn tag(self) -> &'static str {
        match self {
            Self::I => "(i)",
            Self::II => "(ii)",
            Self::III => "(iii)",
            Self::IV => "(iv)",
        }
    }

    /// Status the case asserts for order `alpha`.
    pub fn predicted(self, alpha: f64) -> MatignonStatus {
        match self {
            Self::I | Self::II => MatignonStatus::Stable,
            Self::III => MatignonStatus::Unstable,
            Self::IV if alpha < 1.0 => MatignonStatus::Stable,
            Self::IV => MatignonStatus::Marginal,
        }
    }
}

impl fmt::Display for SignCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseCheck {
    pub case: SignCase,
    pub holds: bool,
    /// Hypotheses that fail, empty when `holds`.
    pub failed: Vec<&'static str>,
}

/// Evaluates the hypotheses of every case at order `alpha`.
pub fn sign_case_checks(cubic: &CubicCharacteristic, alpha: f64) -> Vec<CaseCheck> {
    let CubicCharacteristic {
        a1,
        a2,
        a3,
        discriminant: disc,
        routh_product,
    } = *cubic;
    let routh_equal = routh_product.abs() <= ROUTH_TIE_TOLERANCE * (a1 * a2).abs().max(a3.abs());
    let two_thirds = 2.0 / 3.0;
    SignCase::ALL
        .iter()
        .map(|&case| {
            let hypotheses: Vec<(&'static str, bool)> = match case {
                SignCase::I => vec![
                    ("D > 0", disc > 0.0),
                    ("A1 > 0", a1 > 0.0),
                    ("A3 > 0", a3 > 0.0),
                    ("A1*A2 - A3 > 0", routh_product > 0.0 && !routh_equal),
                ],
                SignCase::II => vec![
                    ("D < 0", disc < 0.0),
                    ("A1 >= 0", a1 >= 0.0),
                    ("A2 >= 0", a2 >= 0.0),
                    ("A3 > 0", a3 > 0.0),
                    ("alpha < 2/3", alpha < two_thirds),
                ],
                SignCase::III => vec![
                    ("D < 0", disc < 0.0),
                    ("A1 < 0", a1 < 0.0),
                    ("A2 < 0", a2 < 0.0),
                    ("alpha > 2/3", alpha > two_thirds),
                ],
                SignCase::IV => vec![
                    ("D < 0", disc < 0.0),
                    ("A1 > 0", a1 > 0.0),
                    ("A2 > 0", a2 > 0.0),
                    ("A1*A2 = A3", routh_equal),
                ],
            };
            let failed: Vec<_> = hypotheses
                .iter()
                .filter(|(_, ok)| !ok)
                .map(|&(name, _)| name)
                .collect();
            CaseCheck {
                case,
                holds: failed.is_empty(),
                failed,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub equilibrium_kind: EquilibriumKind,
    pub alpha: f64,
    pub label: StabilityLabel,
    pub spectrum: EigenSpectrum,
    pub matignon: MatignonOutcome,
    pub margin: f64,
    pub critical_order: f64,
    pub repeated_eigenvalue: bool,
    /// Interior equilibrium only.
    pub cubic: Option<CubicCharacteristic>,
    pub sign_cases: Vec<CaseCheck>,
    pub sign_case: Option<SignCase>,
    /// Whether the first applicable case predicts the eigenvalue verdict.
    pub case_agrees: Option<bool>,
    pub notes: Vec<String>,
}

fn eigen_label(spectrum: &EigenSpectrum, outcome: &MatignonOutcome, alpha: f64) -> StabilityLabel {
    match outcome.status {
        MatignonStatus::Marginal => StabilityLabel::Marginal,
        MatignonStatus::Stable => {
            if spectrum.max_real_part() >= 0.0 {
                StabilityLabel::StableNonHyperbolic
            } else if spectrum.all_real() {
                StabilityLabel::StableNode
            } else {
                StabilityLabel::StableFocus
            }
        }
        MatignonStatus::Unstable => {
            let threshold = alpha * PI / 2.0 - TIE_TOLERANCE;
            if spectrum.args.iter().all(|a| a.abs() < threshold) {
                if spectrum.all_real() {
                    StabilityLabel::UnstableNode
                } else {
                    StabilityLabel::UnstableFocus
                }
            } else {
                StabilityLabel::Unstable
            }
        }
    }
}

/// Local stability verdict for an existing equilibrium at order `alpha`.
pub fn classify_equilibrium(
    params: &ModelParams,
    eq: &Equilibrium,
    alpha: f64,
) -> Result<StabilityVerdict> {
    params.validate()?;
    if !eq.exists {
        return Err(Error::NonexistentEquilibrium(eq.kind.label()));
    }
    let mut notes = Vec::new();
    let (spectrum, cubic) = match eq.kind {
        EquilibriumKind::EStar => {
            let cubic = characteristic_cubic(params, eq.coords)?;
            (cubic_roots(&cubic), Some(cubic))
        }
        _ => (
            EigenSpectrum::from_matrix(&jacobian(params, eq.coords)?),
            None,
        ),
    };
    let matignon = matignon_check(&spectrum, alpha)?;
    let mut label = eigen_label(&spectrum, &matignon, alpha);

    if eq.kind == EquilibriumKind::E2 && label.is_stable() {
        // node/focus split by the R0 rule; eigenvalue structure reported if it differs
        let t = thresholds(params, None)?;
        let rule = if t.r0 < t.r_focus {
            StabilityLabel::StableNode
        } else {
            StabilityLabel::StableFocus
        };
        if rule != label {
            notes.push(format!(
                "R0 rule gives {rule} but the eigenvalues give {label}"
            ));
        }
        label = rule;
    }

    let (sign_cases, sign_case, case_agrees) = match &cubic {
        Some(c) => {
            let checks = sign_case_checks(c, alpha);
            let case = checks.iter().find(|c| c.holds).map(|c| c.case);
            let agrees = case.map(|c| c.predicted(alpha) == matignon.status);
            if agrees == Some(false) {
                notes.push(format!(
                    "case {} predicts {:?} but the eigenvalues give {:?}",
                    case.unwrap(),
                    case.unwrap().predicted(alpha),
                    matignon.status
                ));
            }
            (checks, case, agrees)
        }
        None => (Vec::new(), None, None),
    };
    let repeated_eigenvalue = spectrum.has_repeated(1e-8);
    if repeated_eigenvalue && matignon.status == MatignonStatus::Marginal {
        notes.push(
            "repeated eigenvalue on the stability boundary; multiplicity not adjudicated".into(),
        );
    }

    Ok(StabilityVerdict {
        equilibrium_kind: eq.kind,
        alpha,
        label,
        spectrum,
        matignon,
        margin: matignon.margin,
        critical_order: matignon.critical_order,
        repeated_eigenvalue,
        cubic,
        sign_cases,
        sign_case,
        case_agrees,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{equilibrium, Preset};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_re(s: &EigenSpectrum) -> Vec<f64> {
        s.eigenvalues.iter().map(|z| z.re).collect()
    }

    #[test]
    fn jacobian_at_trivial_point_is_diagonal() {
        let p = Preset::Example1.params();
        let j = jacobian(&p, State::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(
            j,
            Matrix3::from_diagonal(&nalgebra::Vector3::new(2.0, -0.28, -0.09))
        );
    }

    #[test]
    fn axial_eigenvalues() {
        let p = Preset::Example1.params();
        let s = EigenSpectrum::from_matrix(&jacobian(&p, State::new(40.0, 0.0, 0.0)).unwrap());
        let re = sorted_re(&s);
        for (got, want) in re.iter().zip([-2.0, -0.09, 0.32]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_roots() {
        let s = cubic_roots(&CubicCharacteristic::from_coefficients(-6.0, 11.0, -6.0));
        for (got, want) in s.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12);
        }
        let s = cubic_roots(&CubicCharacteristic::from_coefficients(1.0, 1.0, 1.0));
        let want = [c(-1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0)];
        for (got, want) in s.eigenvalues.iter().zip(want) {
            assert!((got - want).norm() < 1e-12, "{got}");
        }
        assert_eq!(s.eigenvalues[1], s.eigenvalues[2].conj());
    }

    #[test]
    fn zero_constant_term_gives_exact_zero_root() {
        let cubic = CubicCharacteristic::from_coefficients(0.0, 0.0, 0.0);
        assert_eq!(cubic.discriminant, 0.0);
        let s = cubic_roots(&cubic);
        assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
        let m = matignon_check(&s, 0.5).unwrap();
        assert_eq!(m.status, MatignonStatus::Marginal);
        assert!(m.zero_eigenvalue);
    }

    #[test]
    fn matignon_examples() {
        let neg = EigenSpectrum::from_eigenvalues([c(-1.0, 0.0), c(-2.0, 0.0), c(-3.0, 0.0)]);
        assert_eq!(
            matignon_check(&neg, 1.0).unwrap().status,
            MatignonStatus::Stable
        );
        let e0 = EigenSpectrum::from_eigenvalues([c(2.0, 0.0), c(-0.28, 0.0), c(-0.09, 0.0)]);
        let m = matignon_check(&e0, 0.3).unwrap();
        assert_eq!(m.status, MatignonStatus::Unstable);
        assert_eq!(m.critical_order, 0.0);
        let centre = EigenSpectrum::from_eigenvalues([c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]);
        assert_eq!(
            matignon_check(&centre, 0.99).unwrap().status,
            MatignonStatus::Stable
        );
        let at_one = matignon_check(&centre, 1.0).unwrap();
        assert_eq!(at_one.status, MatignonStatus::Marginal);
        assert_eq!(at_one.critical_order, 1.0);
        assert!(matignon_check(&centre, 1.5).is_err());
    }

    #[test]
    fn closed_form_cubic_matches_jacobian() {
        for preset in [
            Preset::Example1,
            Preset::Example1Unstable,
            Preset::Example1Theta05,
        ] {
            let p = preset.params();
            let e = equilibrium(&p, EquilibriumKind::EStar);
            let closed = characteristic_cubic(&p, e.coords).unwrap();
            let from_j = CubicCharacteristic::from_matrix(&jacobian(&p, e.coords).unwrap());
            for (x, y) in [
                (closed.a1, from_j.a1),
                (closed.a2, from_j.a2),
                (closed.a3, from_j.a3),
            ] {
                assert!(
                    (x - y).abs() < 1e-10 * x.abs().max(1.0),
                    "{preset}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn nonexistent_equilibrium_rejected() {
        let p = Preset::Example3.params();
        let e2 = equilibrium(&p, EquilibriumKind::E2);
        assert!(matches!(
            classify_equilibrium(&p, &e2, 0.9),
            Err(Error::NonexistentEquilibrium("E2"))
        ));
    }

    #[test]
    fn trivial_point_always_unstable() {
        let p = Preset::Example1.params();
        let e0 = equilibrium(&p, EquilibriumKind::E0);
        for alpha in [0.1, 0.5, 1.0] {
            let v = classify_equilibrium(&p, &e0, alpha).unwrap();
            assert_eq!(v.label, StabilityLabel::Unstable);
        }
    }
}
