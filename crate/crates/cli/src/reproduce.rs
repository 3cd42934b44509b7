//! Recomputes the published examples and figures and compares them with the
//! printed values.
//!
//! A numeric item passes when the computed value lies within half a unit of
//! the last printed digit (never tighter than `5e-4`), or when truncating the
//! computed value to the printed number of decimals reproduces the printed
//! string exactly. `--tolerance` replaces the per-item tolerance.

use std::fmt;
use std::io::Write;
use std::path::Path;

use ecoepi_core::{
    characteristic_cubic, classify_equilibrium, equilibria, thresholds, EcoEpiModel, Equilibrium,
    EquilibriumKind, ModelParams, Preset, SolverConfig, State, Trajectory,
};
use rayon::prelude::*;

use crate::csvio::{fmt_float, save_trajectory, writer};
use crate::error::{CliError, CliResult};

pub const IDS: [&str; 9] = [
    "ex1",
    "ex1-unstable",
    "ex2",
    "ex3",
    "fig1",
    "fig2",
    "fig3",
    "fig4",
    "fig5",
];

const FIGURE_STEP: f64 = 0.05;
/// A run converges when its tail stays within this fraction of its initial distance.
const RELATIVE_CONVERGENCE: f64 = 0.05;
const TAIL_FRACTION: f64 = 0.1;
const MIN_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The published value disagrees with its own closed form.
    KnownDiscrepancy,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::KnownDiscrepancy => "known-paper-discrepancy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineItem {
    pub quantity: String,
    /// As printed.
    pub published: String,
    pub computed: String,
    pub abs_diff: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub note: String,
}

/// Default tolerance for a value printed as `printed`.
pub fn printed_tolerance(printed: &str) -> f64 {
    let decimals = printed.split_once('.').map_or(0, |(_, frac)| frac.len());
    (0.5 * 10f64.powi(-(decimals as i32))).max(MIN_TOLERANCE)
}

/// Whether cutting `value` after the printed number of decimals gives `printed`.
pub fn truncates_to(value: f64, printed: &str) -> bool {
    let decimals = printed.split_once('.').map_or(0, |(_, frac)| frac.len());
    let scale = 10f64.powi(decimals as i32);
    let cut = (value * scale).trunc() / scale;
    let text = format!("{cut:.decimals$}");
    text == printed || (text == format!("-{printed}") && cut == 0.0)
}

struct Items {
    items: Vec<LineItem>,
    tolerance: Option<f64>,
}

impl Items {
    fn numeric(&mut self, quantity: &str, printed: &str, value: f64) {
        self.numeric_with(quantity, printed, value, String::new());
    }

    fn numeric_with(&mut self, quantity: &str, printed: &str, value: f64, note: String) {
        let reference: f64 = printed.parse().expect("printed value");
        let tol = self.tolerance.unwrap_or_else(|| printed_tolerance(printed));
        let diff = (value - reference).abs();
        let truncated = self.tolerance.is_none() && truncates_to(value, printed);
        let note = match (diff <= tol, truncated, note.is_empty()) {
            (false, true, true) => "matches the printed digits after truncation".to_string(),
            (false, true, false) => format!("{note}; matches the printed digits after truncation"),
            _ => note,
        };
        self.items.push(LineItem {
            quantity: quantity.into(),
            published: printed.into(),
            computed: format!("{value:.10}"),
            abs_diff: Some(diff),
            tolerance: Some(tol),
            status: if diff <= tol || truncated {
                Status::Pass
            } else {
                Status::Fail
            },
            note,
        });
    }

    /// A printed value that its closed form does not reproduce.
    fn discrepancy(&mut self, quantity: &str, printed: &str, value: f64, note: &str) {
        let reference: f64 = printed.parse().expect("printed value");
        self.items.push(LineItem {
            quantity: quantity.into(),
            published: printed.into(),
            computed: format!("{value:.10}"),
            abs_diff: Some((value - reference).abs()),
            tolerance: None,
            status: Status::KnownDiscrepancy,
            note: note.into(),
        });
    }

    fn claim(&mut self, quantity: &str, expected: &str, computed: String, holds: bool, note: String) {
        self.items.push(LineItem {
            quantity: quantity.into(),
            published: expected.into(),
            computed,
            abs_diff: None,
            tolerance: None,
            status: if holds { Status::Pass } else { Status::Fail },
            note,
        });
    }
}

fn find(eqs: &[Equilibrium], kind: EquilibriumKind) -> &Equilibrium {
    eqs.iter()
        .find(|e| e.kind == kind)
        .expect("every kind is listed")
}

fn coords(items: &mut Items, e: &Equilibrium, printed: [&str; 3]) {
    let c = e.coords.to_array();
    for ((name, value), p) in ["S", "I", "P"].iter().zip(c).zip(printed) {
        items.numeric(&format!("{} {name}", e.kind.label()), p, value);
    }
}

fn stable_at(
    items: &mut Items,
    params: &ModelParams,
    e: &Equilibrium,
    alphas: &[f64],
    expect_stable: bool,
) -> CliResult<()> {
    for &alpha in alphas {
        let v = classify_equilibrium(params, e, alpha)?;
        let expected = if expect_stable { "stable" } else { "unstable" };
        items.claim(
            &format!("{} at alpha {alpha:.4}", e.kind.label()),
            expected,
            v.label.to_string(),
            v.label.is_stable() == expect_stable,
            format!(
                "margin {:+.6}, critical order {:.6}",
                v.margin, v.critical_order
            ),
        );
    }
    Ok(())
}

fn cubic_items(items: &mut Items, params: &ModelParams, printed: &[(&str, &str)]) -> CliResult<()> {
    let estar = find(&equilibria(params)?, EquilibriumKind::EStar).coords;
    let c = characteristic_cubic(params, estar)?;
    for &(name, p) in printed {
        let value = match name {
            "D" => c.discriminant,
            "A1" => c.a1,
            "A2" => c.a2,
            "A3" => c.a3,
            "A1A2-A3" => c.routh_product,
            _ => unreachable!("unknown coefficient {name}"),
        };
        items.numeric(name, p, value);
    }
    Ok(())
}

fn ex1(items: &mut Items) -> CliResult<()> {
    let p = Preset::Example1.params();
    cubic_items(
        items,
        &p,
        &[
            ("D", "0.0077"),
            ("A1", "1.0879"),
            ("A3", "0.0028"),
            ("A1A2-A3", "0.2909"),
        ],
    )?;
    let t = thresholds(&p, None)?;
    items.numeric("theta1", "0.1723", t.theta1.unwrap_or(f64::NAN));
    let reference = p
        .with("theta", 0.189)
        .ok()
        .and_then(|q| ecoepi_core::model::interior_point(&q));
    let t_ref = thresholds(&p, reference)?;
    items.numeric_with(
        "theta2",
        "0.8044",
        t_ref.theta2.unwrap_or(f64::NAN),
        format!(
            "S* taken at theta = 0.189; with S* at theta = {} the formula gives {}",
            p.theta,
            t.theta2.map_or("n/a".into(), |v| format!("{v:.6}"))
        ),
    );
    let eqs = equilibria(&p)?;
    stable_at(
        items,
        &p,
        find(&eqs, EquilibriumKind::EStar),
        &crate::commands::REPORT_ALPHAS,
        true,
    )
}

fn ex1_unstable(items: &mut Items) -> CliResult<()> {
    let p = Preset::Example1Unstable.params();
    cubic_items(
        items,
        &p,
        &[("D", "-463.8995"), ("A1", "-0.9276"), ("A2", "-0.5775")],
    )?;
    let eqs = equilibria(&p)?;
    stable_at(
        items,
        &p,
        find(&eqs, EquilibriumKind::EStar),
        &[0.85],
        false,
    )
}

fn ex2(items: &mut Items) -> CliResult<()> {
    let p = Preset::Example2.params();
    let t = thresholds(&p, None)?;
    items.numeric("R0", "2.142", t.r0);
    let d1 = t.d1.unwrap_or(f64::NAN);
    items.discrepancy(
        "d - d1",
        "0.0025",
        p.d - d1,
        &format!("closed form gives d1 = {d1:.6}"),
    );
    let eqs = equilibria(&p)?;
    let e2 = find(&eqs, EquilibriumKind::E2);
    coords(items, e2, ["18.67", "16.4", "0"]);
    stable_at(items, &p, e2, &[0.85, 0.95, 1.0], true)
}

fn ex3(items: &mut Items) -> CliResult<()> {
    let p = Preset::Example3.params();
    let t = thresholds(&p, None)?;
    items.numeric("R0", "0.7143", t.r0);
    let eqs = equilibria(&p)?;
    let e1 = find(&eqs, EquilibriumKind::E1);
    coords(items, e1, ["40", "0", "0"]);
    stable_at(items, &p, e1, &[0.85, 0.95, 1.0], true)
}

struct Figure {
    id: &'static str,
    preset: Preset,
    target: EquilibriumKind,
    alphas: &'static [f64],
    initial_states: Vec<State>,
    t_end: f64,
    claim: FigureClaim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FigureClaim {
    /// Every run settles on the target.
    Converges,
    /// Every run moves toward the target, more slowly for smaller orders.
    ApproachesSlowerForSmallerOrder,
    /// The runs do not settle on the target.
    DoesNotConverge,
}

fn figure(id: &str) -> Option<Figure> {
    let all_ics = Preset::initial_states().to_vec();
    let first_ic = vec![Preset::initial_states()[0]];
    Some(match id {
        "fig1" => Figure {
            id: "fig1",
            preset: Preset::Example1,
            target: EquilibriumKind::EStar,
            alphas: &[0.75, 0.85, 0.95, 1.0],
            initial_states: first_ic,
            t_end: 500.0,
            claim: FigureClaim::ApproachesSlowerForSmallerOrder,
        },
        "fig2" => Figure {
            id: "fig2",
            preset: Preset::Example1Theta05,
            target: EquilibriumKind::EStar,
            alphas: &[0.85, 0.95],
            initial_states: all_ics,
            t_end: 500.0,
            claim: FigureClaim::Converges,
        },
        "fig3" => Figure {
            id: "fig3",
            preset: Preset::Example1Unstable,
            target: EquilibriumKind::EStar,
            alphas: &[0.85],
            initial_states: first_ic,
            t_end: 1000.0,
            claim: FigureClaim::DoesNotConverge,
        },
        "fig4" => Figure {
            id: "fig4",
            preset: Preset::Example2,
            target: EquilibriumKind::E2,
            alphas: &[0.85, 0.95, 1.0],
            initial_states: all_ics,
            t_end: 500.0,
            claim: FigureClaim::Converges,
        },
        "fig5" => Figure {
            id: "fig5",
            preset: Preset::Example3,
            target: EquilibriumKind::E1,
            alphas: &[0.85, 0.95, 1.0],
            initial_states: all_ics,
            t_end: 500.0,
            claim: FigureClaim::Converges,
        },
        _ => return None,
    })
}

fn data_file(fig: &str, alpha: f64, ic: usize) -> String {
    format!("{fig}_alpha{alpha}_ic{ic}.csv")
}

fn tail_distance(traj: &Trajectory, target: State) -> f64 {
    let start = ((1.0 - TAIL_FRACTION) * (traj.len() - 1) as f64).floor() as usize;
    (start..traj.len())
        .map(|n| {
            let x = traj.state(n);
            (x[0] - target.s)
                .abs()
                .max((x[1] - target.i).abs())
                .max((x[2] - target.p).abs())
        })
        .fold(0.0, f64::max)
}

fn gnuplot_script(fig: &Figure, files: &[String]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    s.push_str(&format!(
        "set terminal pngcairo size 1200,900\nset output '{}.png'\n",
        fig.id
    ));
    s.push_str("set multiplot layout 2,2\n");
    for (col, name) in [(2, "S"), (3, "I"), (4, "P")] {
        s.push_str(&format!("set title '{name}(t)'\nplot "));
        let plots: Vec<String> = files
            .iter()
            .map(|f| {
                format!(
                    "'{f}' using 1:{col} with lines title '{}'",
                    f.trim_end_matches(".csv")
                )
            })
            .collect();
        s.push_str(&plots.join(", \\\n     "));
        s.push('\n');
    }
    s.push_str(
        "set title 'phase portrait'\nset xlabel 'S'\nset ylabel 'I'\nset zlabel 'P'\nsplot ",
    );
    let plots: Vec<String> = files
        .iter()
        .map(|f| {
            format!(
                "'{f}' using 2:3:4 with lines title '{}'",
                f.trim_end_matches(".csv")
            )
        })
        .collect();
    s.push_str(&plots.join(", \\\n      "));
    s.push_str("\nunset multiplot\n");
    s
}

fn figure_items(items: &mut Items, fig: &Figure, dir: &Path) -> CliResult<()> {
    let params = fig.preset.params();
    let model = EcoEpiModel::new(params)?;
    let eqs = equilibria(&params)?;
    let target = find(&eqs, fig.target);
    if !target.exists {
        return Err(CliError::Validation(format!(
            "{}: {} does not exist",
            fig.id, target.kind
        )));
    }
    if fig.id == "fig2" {
        coords(items, target, ["35.7195", "3.2927", "8.9983"]);
    }
    let config = SolverConfig::new(FIGURE_STEP, fig.t_end);
    let tasks: Vec<(f64, usize, State)> = fig
        .alphas
        .iter()
        .flat_map(|&a| {
            fig.initial_states
                .iter()
                .enumerate()
                .map(move |(k, &x)| (a, k, x))
        })
        .collect();
    let runs: Vec<_> = tasks
        .par_iter()
        .map(|&(alpha, k, x0)| (alpha, k, x0, model.simulate(alpha, x0, &config)))
        .collect();
    let mut files = Vec::new();
    let mut tails = Vec::new();
    for (alpha, k, x0, result) in runs {
        let quantity = format!("{} alpha {alpha} from {x0}", fig.id);
        let expected = match fig.claim {
            FigureClaim::Converges => format!("converges to {}", target.kind),
            FigureClaim::ApproachesSlowerForSmallerOrder => format!("approaches {}", target.kind),
            FigureClaim::DoesNotConverge => format!("does not converge to {}", target.kind),
        };
        let traj = match result {
            Ok(t) => t,
            Err(e) => {
                items.claim(
                    &quantity,
                    &expected,
                    "diverged".into(),
                    false,
                    e.to_string(),
                );
                continue;
            }
        };
        let name = data_file(fig.id, alpha, k);
        save_trajectory(&traj, &dir.join(&name))?;
        files.push(name);
        let initial = x0.max_distance(&target.coords);
        let tail = tail_distance(&traj, target.coords);
        let ratio = tail / initial.max(f64::MIN_POSITIVE);
        tails.push((k, alpha, tail));
        let holds = match fig.claim {
            FigureClaim::Converges => ratio <= RELATIVE_CONVERGENCE,
            FigureClaim::ApproachesSlowerForSmallerOrder => ratio < 1.0,
            FigureClaim::DoesNotConverge => ratio > RELATIVE_CONVERGENCE,
        };
        items.claim(
            &quantity,
            &expected,
            format!("tail/initial distance {ratio:.4}"),
            holds,
            format!(
                "max distance over last {:.0}% of [0, {}] is {tail:.4}, initial {initial:.4}, threshold {}",
                TAIL_FRACTION * 100.0,
                fig.t_end,
                if fig.claim == FigureClaim::ApproachesSlowerForSmallerOrder { 1.0 } else { RELATIVE_CONVERGENCE }
            ),
        );
    }
    if fig.claim == FigureClaim::ApproachesSlowerForSmallerOrder {
        for k in 0..fig.initial_states.len() {
            let mut by_order: Vec<(f64, f64)> = tails
                .iter()
                .filter(|t| t.0 == k)
                .map(|t| (t.1, t.2))
                .collect();
            by_order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ordered = by_order.windows(2).all(|w| w[0].1 > w[1].1);
            let listing: Vec<String> = by_order
                .iter()
                .map(|(a, d)| format!("{a}: {d:.4}"))
                .collect();
            items.claim(
                &format!(
                    "{} from {} slower for smaller alpha",
                    fig.id, fig.initial_states[k]
                ),
                "tail distance decreases with alpha",
                listing.join(", "),
                ordered,
                String::new(),
            );
        }
    }
    let script = dir.join(format!("{}.gp", fig.id));
    std::fs::write(&script, gnuplot_script(fig, &files)).map_err(CliError::io(&script))
}

/// Line items for `id`, writing figure data into `dir`.
pub fn compute(id: &str, dir: &Path, tolerance: Option<f64>) -> CliResult<Vec<LineItem>> {
    if let Some(t) = tolerance {
        if !(t > 0.0) {
            return Err(CliError::Validation(format!(
                "tolerance {t} must be positive"
            )));
        }
    }
    let mut items = Items {
        items: Vec::new(),
        tolerance,
    };
    let figures: &[&str] = match id {
        "ex1" => {
            ex1(&mut items)?;
            &["fig1", "fig2"]
        }
        "ex1-unstable" => {
            ex1_unstable(&mut items)?;
            &["fig3"]
        }
        "ex2" => {
            ex2(&mut items)?;
            &["fig4"]
        }
        "ex3" => {
            ex3(&mut items)?;
            &["fig5"]
        }
        "fig1" | "fig2" | "fig3" | "fig4" | "fig5" => std::slice::from_ref(&id),
        _ => {
            return Err(CliError::Validation(format!(
                "unknown reproduction id `{id}` (expected one of {})",
                IDS.join(", ")
            )))
        }
    };
    if !figures.is_empty() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    for fig in figures {
        figure_items(&mut items, &figure(fig).expect("known figure"), dir)?;
    }
    Ok(items.items)
}

pub fn write_report(items: &[LineItem], path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(CliError::io(path))?;
    let mut w = writer(std::io::BufWriter::new(file));
    let result: csv::Result<()> = (|| {
        w.write_record([
            "quantity",
            "published",
            "computed",
            "abs_diff",
            "tolerance",
            "status",
            "note",
        ])?;
        for item in items {
            w.write_record([
                item.quantity.clone(),
                item.published.clone(),
                item.computed.clone(),
                item.abs_diff.map_or(String::new(), fmt_float),
                item.tolerance.map_or(String::new(), fmt_float),
                item.status.to_string(),
                item.note.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(CliError::csv(path))
}

pub fn reproduce(
    id: &str,
    out: &Path,
    tolerance: Option<f64>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let dir = out.join(id);
    let items = compute(id, &dir, tolerance)?;
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let report = dir.join("report.csv");
    write_report(&items, &report)?;

    let io = CliError::io("<stdout>");
    let width = items.iter().map(|i| i.quantity.len()).max().unwrap_or(8);
    let result: std::io::Result<()> = (|| {
        writeln!(
            stdout,
            "{:<width$}  {:>12}  {:>14}  {:>10}  status",
            "quantity", "published", "computed", "diff"
        )?;
        for i in &items {
            writeln!(
                stdout,
                "{:<width$}  {:>12}  {:>14}  {:>10}  {}{}",
                i.quantity,
                i.published,
                shorten(&i.computed),
                i.abs_diff.map_or(String::new(), |d| format!("{d:.2e}")),
                i.status,
                if i.note.is_empty() {
                    String::new()
                } else {
                    format!("  ({})", i.note)
                }
            )?;
        }
        writeln!(stdout, "report written to {}", report.display())
    })();
    result.map_err(io)?;

    let failed = items.iter().filter(|i| i.status == Status::Fail).count();
    if failed > 0 {
        return Err(CliError::CheckFailed(format!(
            "{id}: {failed} of {} items failed",
            items.len()
        )));
    }
    Ok(())
}

fn shorten(computed: &str) -> String {
    match computed.parse::<f64>() {
        Ok(v) => format!("{v:.6}"),
        Err(_) => computed.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_follows_printed_digits() {
        assert_eq!(printed_tolerance("16.4"), 0.05);
        assert_eq!(printed_tolerance("0.0077"), 5e-4);
        assert_eq!(printed_tolerance("40"), 0.5);
        assert_eq!(printed_tolerance("-463.8995"), 5e-4);
    }

    #[test]
    fn truncation_match() {
        assert!(truncates_to(2.142857, "2.142"));
        assert!(!truncates_to(2.142857, "2.143"));
        assert!(truncates_to(-0.57753, "-0.5775"));
        assert!(truncates_to(-1e-9, "0"));
    }

    #[test]
    fn unknown_id_is_validation() {
        let dir = std::env::temp_dir();
        assert!(matches!(
            compute("fig9", &dir, None),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn examples_pass() {
        let mut items = Items {
            items: Vec::new(),
            tolerance: None,
        };
        ex1(&mut items).unwrap();
        ex2(&mut items).unwrap();
        ex3(&mut items).unwrap();
        ex1_unstable(&mut items).unwrap();
        for i in &items.items {
            assert_ne!(i.status, Status::Fail, "{i:?}");
        }
        assert!(items
            .items
            .iter()
            .any(|i| i.status == Status::KnownDiscrepancy));
    }
}
