use std::io::Write;
use std::path::Path;

use ecoepi_core::model::interior_point;
use ecoepi_core::verification::{
    boundedness_certificate, check_nonnegativity, convergence_check, lipschitz_empirical,
    lyapunov_monotonicity,
};
use ecoepi_core::{
    classify_equilibrium, equilibria, rhs, thresholds, EcoEpiModel, Equilibrium, EquilibriumKind,
    ModelParams, State, Trajectory,
};
use rayon::prelude::*;

use crate::config::{parse_number, validate_alpha, RunConfig};
use crate::csvio::{fmt_float, load_trajectory, save_trajectory, writer};
use crate::error::{CliError, CliResult};
use crate::Format;

pub const REPORT_ALPHAS: [f64; 5] = [0.6, 2.0 / 3.0, 0.85, 0.95, 1.0];

/// `theta` at which the alternative `theta2` convention evaluates `S*`.
pub const THETA2_REFERENCE_THETA: f64 = 0.189;

const LYAPUNOV_SLACK: f64 = 1e-3;
const NONNEGATIVITY_TOL: f64 = 1e-8;

fn out_line(stdout: &mut dyn Write, line: std::fmt::Arguments<'_>) -> CliResult<()> {
    writeln!(stdout, "{line}").map_err(CliError::io("<stdout>"))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        out_line($out, format_args!($($arg)*))
    };
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(CliError::io(path))
}

pub fn trajectory_file_name(alpha: f64, ic: usize) -> String {
    format!("trajectory_alpha{alpha}_ic{ic}.csv")
}

fn scenario(alpha: f64, x0: State) -> String {
    format!("alpha {alpha}, initial {x0}")
}

/// Solves every (alpha, initial state) pair concurrently, results in grid order.
pub fn solve_grid(run: &RunConfig) -> Vec<(f64, usize, State, CliResult<Trajectory>)> {
    let model = EcoEpiModel { params: run.params };
    let solver = run.solver_config();
    let tasks: Vec<(f64, usize, State)> = run
        .alphas
        .iter()
        .flat_map(|&a| {
            run.initial_states
                .iter()
                .enumerate()
                .map(move |(k, &x)| (a, k, x))
        })
        .collect();
    tasks
        .into_par_iter()
        .map(|(alpha, k, x0)| {
            let result = model
                .simulate_from(alpha, run.t0, x0, &solver)
                .map_err(CliError::solve(scenario(alpha, x0)));
            (alpha, k, x0, result)
        })
        .collect()
}

pub fn simulate(run: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    create_dir(&run.out)?;
    let summary_path = run.out.join("summary.csv");
    let mut summary =
        writer(std::fs::File::create(&summary_path).map_err(CliError::io(&summary_path))?);
    let csv_err = CliError::csv(&summary_path);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut first_error = None;
    for (alpha, k, x0, result) in solve_grid(run) {
        let traj = match result {
            Ok(t) => t,
            Err(e) => {
                say!(stdout, "alpha {alpha} ic {k} {x0}: {e}")?;
                first_error.get_or_insert(e);
                continue;
            }
        };
        let name = trajectory_file_name(alpha, k);
        save_trajectory(&traj, &run.out.join(&name))?;
        let nonneg = check_nonnegativity(&traj, NONNEGATIVITY_TOL);
        let eta = 0.5 * run.params.mu.min(run.params.d);
        let cert = boundedness_certificate(&run.params, &traj, eta)?;
        let end = traj.last_state();
        let undershoot = nonneg
            .worst_undershoot
            .iter()
            .fold(0.0f64, |m, v| m.max(*v));
        say!(
            stdout,
            "alpha {alpha} ic {k} {x0} -> ({:.6}, {:.6}, {:.6}) at t = {}; non-negative: {}; bounded (V <= {:.4}): {}; {}",
            end[0],
            end[1],
            end[2],
            traj.times.last().unwrap(),
            nonneg.passed,
            cert.bound.max(cert.v0),
            cert.passed,
            name
        )?;
        rows.push(vec![
            alpha.to_string(),
            k.to_string(),
            fmt_float(x0.s),
            fmt_float(x0.i),
            fmt_float(x0.p),
            fmt_float(end[0]),
            fmt_float(end[1]),
            fmt_float(end[2]),
            nonneg.passed.to_string(),
            fmt_float(undershoot),
            cert.passed.to_string(),
            name,
        ]);
    }
    summary
        .write_record([
            "alpha",
            "ic",
            "S0",
            "I0",
            "P0",
            "S_end",
            "I_end",
            "P_end",
            "nonnegative",
            "worst_undershoot",
            "bounded",
            "file",
        ])
        .map_err(csv_err)?;
    for row in rows {
        summary
            .write_record(&row)
            .map_err(CliError::csv(&summary_path))?;
    }
    summary.flush().map_err(CliError::io(&summary_path))?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

fn describe(run: &RunConfig) -> String {
    let name = run.preset.map_or("custom".to_string(), |p| p.to_string());
    let values: Vec<String> = run
        .params
        .entries()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!("{name}: {}", values.join(" "))
}

fn residual(params: &ModelParams, e: &Equilibrium) -> f64 {
    if !e.coords.is_finite() {
        return f64::NAN;
    }
    rhs(params, e.coords).map_or(f64::NAN, |f| f.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub fn equilibria_table(run: &RunConfig, format: Format, stdout: &mut dyn Write) -> CliResult<()> {
    let eqs = equilibria(&run.params)?;
    match format {
        Format::Csv => {
            let mut w = writer(Vec::new());
            let mut record = |fields: Vec<String>| w.write_record(&fields);
            record(vec![
                "kind".into(),
                "exists".into(),
                "S".into(),
                "I".into(),
                "P".into(),
                "residual".into(),
                "conditions".into(),
            ])
            .map_err(CliError::csv("<stdout>"))?;
            for e in &eqs {
                let conditions: Vec<String> = e
                    .conditions
                    .iter()
                    .map(|c| format!("{}:{}", c.name, c.satisfied))
                    .collect();
                record(vec![
                    e.kind.label().into(),
                    e.exists.to_string(),
                    fmt_float(e.coords.s),
                    fmt_float(e.coords.i),
                    fmt_float(e.coords.p),
                    fmt_float(residual(&run.params, e)),
                    conditions.join(";"),
                ])
                .map_err(CliError::csv("<stdout>"))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            stdout.write_all(&bytes).map_err(CliError::io("<stdout>"))
        }
        Format::Table => {
            say!(stdout, "{}", describe(run))?;
            for e in &eqs {
                write_equilibrium(&run.params, e, stdout)?;
            }
            Ok(())
        }
    }
}

fn write_equilibrium(
    params: &ModelParams,
    e: &Equilibrium,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let conditions: Vec<String> = e
        .conditions
        .iter()
        .map(|c| {
            format!(
                "{} ({}, margin {:.6})",
                c.name,
                if c.satisfied { "holds" } else { "fails" },
                c.margin
            )
        })
        .collect();
    say!(
        stdout,
        "  {:<3} {:<12} ({:.6}, {:.6}, {:.6})  residual {:.1e}{}{}",
        e.kind.label(),
        if e.exists { "exists" } else { "nonexistent" },
        e.coords.s,
        e.coords.i,
        e.coords.p,
        residual(params, e),
        if conditions.is_empty() {
            String::new()
        } else {
            format!("  [{}]", conditions.join(", "))
        },
        e.note.map_or(String::new(), |n| format!("  ({n})"))
    )
}

pub fn report(
    run: &RunConfig,
    alphas: &[f64],
    format: Format,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    for &a in alphas {
        validate_alpha(a)?;
    }
    let p = &run.params;
    let t = thresholds(p, None)?;
    let reference = p
        .with("theta", THETA2_REFERENCE_THETA)
        .ok()
        .and_then(|q| interior_point(&q));
    let t_ref = thresholds(p, reference)?;
    let eqs = equilibria(p)?;
    let verdicts: Vec<(f64, &Equilibrium, ecoepi_core::StabilityVerdict)> = alphas
        .iter()
        .flat_map(|&a| eqs.iter().filter(|e| e.exists).map(move |e| (a, e)))
        .map(|(a, e)| classify_equilibrium(p, e, a).map(|v| (a, e, v)))
        .collect::<Result<_, _>>()?;

    if format == Format::Csv {
        let mut w = writer(Vec::new());
        let err = CliError::csv("<stdout>");
        let result: csv::Result<()> = (|| {
            w.write_record([
                "alpha",
                "equilibrium",
                "label",
                "margin",
                "critical_order",
                "case",
                "case_agrees",
            ])?;
            for (a, e, v) in &verdicts {
                w.write_record([
                    a.to_string(),
                    e.kind.label().to_string(),
                    v.label.to_string(),
                    fmt_float(v.margin),
                    fmt_float(v.critical_order),
                    v.sign_case.map_or(String::new(), |c| c.tag().to_string()),
                    v.case_agrees.map_or(String::new(), |b| b.to_string()),
                ])?;
            }
            Ok(())
        })();
        result.map_err(err)?;
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        return stdout.write_all(&bytes).map_err(CliError::io("<stdout>"));
    }

    say!(stdout, "{}", describe(run))?;
    say!(stdout, "thresholds")?;
    say!(stdout, "  R0                         = {:.6}", t.r0)?;
    say!(stdout, "  1 + r/4                    = {:.6}", t.r_focus)?;
    say!(stdout, "  d1                         = {}", opt(t.d1))?;
    say!(stdout, "  d2                         = {}", opt(t.d2))?;
    say!(stdout, "  theta1                     = {}", opt(t.theta1))?;
    say!(
        stdout,
        "  {:<27}= {}  [S* = {}]",
        format!("theta2 (S* at theta={})", p.theta),
        opt(t.theta2),
        opt(t.theta2_s_star)
    )?;
    say!(
        stdout,
        "  {:<27}= {}  [S* = {}]",
        format!("theta2 (S* at theta={})", THETA2_REFERENCE_THETA),
        opt(t_ref.theta2),
        opt(t_ref.theta2_s_star)
    )?;
    say!(stdout, "equilibria")?;
    for e in &eqs {
        write_equilibrium(p, e, stdout)?;
    }
    say!(stdout, "stability")?;
    for (a, e, v) in &verdicts {
        let case = match (v.sign_case, v.case_agrees) {
            (Some(c), Some(agrees)) => {
                format!("  case {c}{}", if agrees { "" } else { " (disagrees)" })
            }
            _ => String::new(),
        };
        say!(
            stdout,
            "  alpha {:<8.6} {:<3} {:<14} margin {:+.6}  critical order {:.6}{}",
            a,
            e.kind.label(),
            v.label.as_str(),
            v.margin,
            v.critical_order,
            case
        )?;
        for note in &v.notes {
            say!(stdout, "      note: {note}")?;
        }
        if e.kind == EquilibriumKind::EStar {
            for check in v.sign_cases.iter().filter(|c| !c.holds) {
                say!(
                    stdout,
                    "      case {} conditions not met: {}",
                    check.case,
                    check.failed.join(", ")
                )?;
            }
        }
    }
    Ok(())
}

/// `start:stop:count` or `v1,v2,...`; the empty string is an empty grid.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |m: String| CliError::Validation(format!("grid `{spec}`: {m}"));
    if let Some((start, rest)) = spec.split_once(':') {
        let (stop, count) = rest
            .split_once(':')
            .ok_or_else(|| bad("expected start:stop:count".into()))?;
        let start = parse_number(start).map_err(bad)?;
        let stop = parse_number(stop).map_err(bad)?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| bad("count must be an integer".into()))?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                .collect(),
        });
    }
    spec.split(',')
        .map(|v| parse_number(v).map_err(bad))
        .collect()
}

pub fn sweep(
    base: &ModelParams,
    name: &str,
    grid: &[f64],
    alphas: &[f64],
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if base.get(name).is_none() {
        return Err(CliError::Validation(format!(
            "unknown parameter `{name}` (expected one of {})",
            ModelParams::NAMES.join(", ")
        )));
    }
    for &a in alphas {
        validate_alpha(a)?;
    }
    let params: Vec<ModelParams> = grid
        .iter()
        .map(|&v| {
            base.with(name, v).map_err(|e| {
                CliError::Validation(format!("grid value {name} = {v} is invalid: {e}"))
            })
        })
        .collect::<CliResult<_>>()?;
    let tasks: Vec<(usize, f64)> = (0..grid.len())
        .flat_map(|g| alphas.iter().map(move |&a| (g, a)))
        .collect();
    let rows: Vec<Vec<String>> = tasks
        .par_iter()
        .map(|&(g, alpha)| -> CliResult<Vec<String>> {
            let p = &params[g];
            let mut row = vec![fmt_float(grid[g]), alpha.to_string()];
            for e in equilibria(p)? {
                row.push(e.exists.to_string());
                row.extend([e.coords.s, e.coords.i, e.coords.p].map(fmt_float));
                if e.exists {
                    let v = classify_equilibrium(p, &e, alpha)?;
                    row.extend([
                        v.label.to_string(),
                        fmt_float(v.margin),
                        fmt_float(v.critical_order),
                    ]);
                } else {
                    row.extend([String::new(), String::new(), String::new()]);
                }
            }
            Ok(row)
        })
        .collect::<CliResult<_>>()?;

    let mut header = vec![name.to_string(), "alpha".to_string()];
    for kind in EquilibriumKind::ALL {
        let k = match kind {
            EquilibriumKind::EStar => "Estar",
            other => other.label(),
        };
        for field in ["exists", "S", "I", "P", "label", "margin", "critical_order"] {
            header.push(format!("{k}_{field}"));
        }
    }
    let write = |w: &mut csv::Writer<Box<dyn Write + '_>>| -> csv::Result<()> {
        w.write_record(&header)?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    };
    match out {
        Some(dir) => {
            create_dir(dir)?;
            let path = dir.join(format!("sweep_{name}.csv"));
            let file = std::fs::File::create(&path).map_err(CliError::io(&path))?;
            let mut w = writer(Box::new(std::io::BufWriter::new(file)) as Box<dyn Write>);
            write(&mut w).map_err(CliError::csv(&path))?;
            say!(stdout, "{} rows written to {}", rows.len(), path.display())
        }
        None => {
            let mut w = writer(Box::new(&mut *stdout) as Box<dyn Write>);
            write(&mut w).map_err(CliError::csv("<stdout>"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CheckStatus {
    Pass,
    Fail,
    /// Reported only: the global-stability hypothesis behind the check fails.
    Info,
}

impl CheckStatus {
    fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Info => "info",
        }
    }
}

struct CheckRow {
    check: String,
    alpha: String,
    ic: String,
    status: CheckStatus,
    value: f64,
    detail: String,
}

fn verify_trajectory(
    params: &ModelParams,
    eqs: &[Equilibrium],
    traj: &Trajectory,
    alpha: f64,
    ic: &str,
    tol: f64,
) -> CliResult<Vec<CheckRow>> {
    let row = |check: &str, status, value, detail: String| CheckRow {
        check: check.into(),
        alpha: alpha.to_string(),
        ic: ic.into(),
        status,
        value,
        detail,
    };
    let pass_fail = |ok: bool| {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    };
    let mut rows = Vec::new();

    let nonneg = check_nonnegativity(traj, NONNEGATIVITY_TOL);
    let worst = nonneg
        .worst_undershoot
        .iter()
        .fold(0.0f64, |m, v| m.max(*v));
    rows.push(row(
        "non-negativity",
        pass_fail(nonneg.passed),
        worst,
        format!(
            "worst undershoot {worst:.3e}, {} offending nodes",
            nonneg.offending_nodes.len()
        ),
    ));

    let eta = 0.5 * params.mu.min(params.d);
    let cert = boundedness_certificate(params, traj, eta)?;
    rows.push(row(
        "boundedness",
        pass_fail(cert.passed),
        cert.max_v,
        format!(
            "max V {:.6}, bound max(V0, l/eta) = {:.6} (eta {eta}){}",
            cert.max_v,
            cert.bound.max(cert.v0),
            if cert.envelope_checked {
                format!(", {} envelope violations", cert.envelope_violations.len())
            } else {
                String::new()
            }
        ),
    ));

    for e in eqs
        .iter()
        .filter(|e| e.exists && e.kind != EquilibriumKind::E0)
    {
        let verdict = classify_equilibrium(params, e, alpha)?;
        if !verdict.label.is_stable() {
            continue;
        }
        let label = e.kind.label();
        let lyap = lyapunov_monotonicity(params, e, traj, LYAPUNOV_SLACK)?;
        let governed = lyap.hypothesis.holds;
        let status = |ok: bool| match (ok, governed) {
            (true, _) => CheckStatus::Pass,
            (false, true) => CheckStatus::Fail,
            (false, false) => CheckStatus::Info,
        };
        let conv = convergence_check(traj, e.coords, tol, 0.1)?;
        rows.push(row(
            &format!("convergence {label}"),
            status(conv.converged),
            conv.max_tail_distance,
            format!(
                "tail distance {:.6} (tol {tol}); hypothesis {}: {}",
                conv.max_tail_distance,
                if governed { "holds" } else { "fails" },
                lyap.hypothesis.description
            ),
        ));
        rows.push(row(
            &format!("lyapunov {label}"),
            status(lyap.passed),
            lyap.max_increase,
            format!(
                "max increase {:.3e} (slack {LYAPUNOV_SLACK}), {} skipped nodes",
                lyap.max_increase, lyap.skipped_nodes
            ),
        ));
    }
    Ok(rows)
}

pub fn verify(
    run: &RunConfig,
    tol: f64,
    input: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if !(tol > 0.0) {
        return Err(CliError::Validation(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let params = run.params;
    let eqs = equilibria(&params)?;
    let runs: Vec<(f64, String, Trajectory)> = match input {
        Some(path) => {
            let [alpha] = run.alphas[..] else {
                return Err(CliError::Validation(
                    "--input needs exactly one --alpha".into(),
                ));
            };
            vec![(
                alpha,
                path.display().to_string(),
                load_trajectory(alpha, path)?,
            )]
        }
        None => solve_grid(run)
            .into_iter()
            .map(|(alpha, k, x0, traj)| traj.map(|t| (alpha, format!("{k} {x0}"), t)))
            .collect::<CliResult<_>>()?,
    };

    let mut rows = Vec::new();
    let mut radius = 1.0f64;
    for (alpha, ic, traj) in &runs {
        radius = traj.raw_states().iter().fold(radius, |m, v| m.max(v.abs()));
        rows.extend(verify_trajectory(&params, &eqs, traj, *alpha, ic, tol)?);
    }
    let lip = lipschitz_empirical(&params, radius, 10_000, 0)?;
    rows.push(CheckRow {
        check: "lipschitz".into(),
        alpha: String::new(),
        ic: String::new(),
        status: if lip.passed {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        value: lip.max_quotient,
        detail: format!(
            "max quotient {:.6} <= L = {:.6} on [0, {radius:.3}]^3",
            lip.max_quotient, lip.bound
        ),
    });

    create_dir(&run.out)?;
    let path = run.out.join("verify.csv");
    let mut w = writer(std::io::BufWriter::new(
        std::fs::File::create(&path).map_err(CliError::io(&path))?,
    ));
    let result: csv::Result<()> = (|| {
        w.write_record(["check", "alpha", "initial", "status", "value", "detail"])?;
        for r in &rows {
            w.write_record([
                &r.check,
                &r.alpha,
                &r.ic,
                r.status.as_str(),
                &fmt_float(r.value),
                &r.detail,
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(CliError::csv(&path))?;

    for r in &rows {
        let at = if r.alpha.is_empty() {
            String::new()
        } else {
            format!(" [alpha {} ic {}]", r.alpha, r.ic)
        };
        say!(
            stdout,
            "{:<4} {}{}: {}",
            r.status.as_str().to_uppercase(),
            r.check,
            at,
            r.detail
        )?;
    }
    let failed = rows
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .count();
    if failed > 0 {
        return Err(CliError::CheckFailed(format!(
            "{failed} verification checks failed"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_grid("0:1:0").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(
            parse_grid("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn sweep_rejects_invalid_grid_value() {
        let base = ecoepi_core::Preset::Example1.params();
        let mut sink = Vec::new();
        let err = sweep(&base, "theta", &[0.5, 1.5, 2.0], &[0.9], None, &mut sink).unwrap_err();
        assert!(err.to_string().contains("1.5"), "{err}");
        assert!(sweep(&base, "zeta", &[0.5], &[0.9], None, &mut sink).is_err());
    }

    #[test]
    fn empty_sweep_has_header_only() {
        let base = ecoepi_core::Preset::Example1.params();
        let mut sink = Vec::new();
        sweep(&base, "theta", &[], &[0.9], None, &mut sink).unwrap();
        let text = String::from_utf8(sink).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("theta,alpha,E0_exists"));
    }
}
