//! Executes an experiment: one row per (instance, mesh), CSV and SVG output, and
//! evaluation of the declared assertions.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use lipbound_core::rearrangement::xn_norm;
use lipbound_core::solver::{
    energy_estimate_check, gradient_bound_ratio, natural_growth_solve, solve_with, LinearSolver,
    SolverOptions,
};
use lipbound_core::SolverError;
use rayon::prelude::*;

use crate::build::{self, build_problem};
use crate::config::{AssertSpec, ExperimentConfig, LinearSpec};
use crate::svg::{LinePlot, Series};
use crate::HarnessError;

/// CSV columns with their documentation, in output order.
pub const COLUMNS: &[(&str, &str)] = &[
    ("instance", "index of the sweep instance, in declared order"),
    ("value", "value of the swept parameter (empty without a sweep)"),
    ("h", "target mesh size"),
    ("nodes", "number of mesh vertices"),
    ("triangles", "number of mesh triangles"),
    ("status", "ok, or the solver error for this row"),
    ("grad_sup", "max over triangles of |grad u_h|"),
    ("h_grad_sup", "max over triangles of H(grad u_h)"),
    ("u_sup", "max over nodes of |u_h|"),
    ("xn_norm", "two-dimensional X norm of the sampled source"),
    ("l2_norm", "L2 norm of the sampled source"),
    ("grad_ratio", "grad_sup / b^-1(xn_norm)"),
    ("l2_ratio", "grad_sup / b^-1(l2_norm)"),
    ("energy_ratio", "sum |T| B(H(grad u_h)) / conj(B)(l2_norm)"),
    ("natural_ratio", "grad_sup / (xn_norm^(1/(p-1)) exp(2|kappa| u_sup/(p-1))), natural growth only"),
    ("grad_err", "max over triangles of |grad u_h - grad u| at centroids, manufactured only"),
    ("nodal_err", "max over nodes of |u_h - u|, manufactured only"),
    ("newton_iters", "Newton iterations summed over the epsilon schedule (last solve)"),
    ("picard_iters", "fixed-point iterations of the natural-growth solver"),
    ("residual", "final residual norm"),
];

/// Timing sidecar columns.
pub const TIMING_COLUMNS: &[(&str, &str)] = &[
    ("instance", "index of the sweep instance"),
    ("h", "target mesh size"),
    ("seconds", "wall time to mesh, assemble and solve"),
];

/// Numeric results of one solved row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub grad_sup: f64,
    pub h_grad_sup: f64,
    pub u_sup: f64,
    pub xn_norm: f64,
    pub l2_norm: f64,
    pub grad_ratio: Option<f64>,
    pub l2_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub natural_ratio: Option<f64>,
    pub grad_err: Option<f64>,
    pub nodal_err: Option<f64>,
    pub newton_iters: usize,
    pub picard_iters: Option<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub instance: usize,
    pub value: Option<f64>,
    pub h: f64,
    pub nodes: usize,
    pub triangles: usize,
    pub result: Result<Metrics, String>,
    pub seconds: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Row {
    /// A numeric column by name; `None` when absent or the row failed.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "instance" => return Some(self.instance as f64),
            "value" => return self.value,
            "h" => return Some(self.h),
            "nodes" => return Some(self.nodes as f64),
            "triangles" => return Some(self.triangles as f64),
            _ => {}
        }
        let m = self.result.as_ref().ok()?;
        match name {
            "grad_sup" => Some(m.grad_sup),
            "h_grad_sup" => Some(m.h_grad_sup),
            "u_sup" => Some(m.u_sup),
            "xn_norm" => Some(m.xn_norm),
            "l2_norm" => Some(m.l2_norm),
            "grad_ratio" => m.grad_ratio,
            "l2_ratio" => m.l2_ratio,
            "energy_ratio" => m.energy_ratio,
            "natural_ratio" => m.natural_ratio,
            "grad_err" => m.grad_err,
            "nodal_err" => m.nodal_err,
            "newton_iters" => Some(m.newton_iters as f64),
            "picard_iters" => m.picard_iters.map(|v| v as f64),
            "residual" => Some(m.residual),
            _ => None,
        }
    }

    fn record(&self) -> Vec<String> {
        let mut out = vec![
            self.instance.to_string(),
            opt(self.value),
            self.h.to_string(),
            self.nodes.to_string(),
            self.triangles.to_string(),
        ];
        match &self.result {
            Ok(_) => out.push("ok".into()),
            Err(e) => out.push(format!("error: {e}")),
        }
        for (name, _) in &COLUMNS[6..] {
            out.push(match *name {
                "newton_iters" | "picard_iters" => {
                    self.column(name).map(|v| (v as usize).to_string()).unwrap_or_default()
                }
                _ => opt(self.column(name)),
            });
        }
        out
    }

    pub fn ok(&self) -> bool {
        self.result.is_ok()
    }
}

/// Outcome of one declared assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct AssertOutcome {
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<Row>,
    pub assertions: Vec<AssertOutcome>,
    pub csv: Option<PathBuf>,
    pub timing: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Report {
    pub fn all_rows_ok(&self) -> bool {
        self.rows.iter().all(Row::ok)
    }

    pub fn passed(&self) -> bool {
        self.all_rows_ok() && self.assertions.iter().all(|a| a.passed)
    }
}

fn options(cfg: &ExperimentConfig) -> SolverOptions<f64> {
    let mut o = SolverOptions::default();
    if let Some(t) = cfg.solver.tol {
        o.tol = t;
    }
    o.linear = match cfg.solver.linear {
        LinearSpec::Auto => LinearSolver::Auto,
        LinearSpec::Direct => LinearSolver::Direct,
        LinearSpec::Cg => LinearSolver::ConjugateGradient,
    };
    o
}

fn solve_row(cfg: &ExperimentConfig, h: f64) -> Result<(usize, usize, Result<Metrics, String>), HarnessError> {
    let built = build_problem(cfg, h)?;
    let prob = &built.problem;
    let (nodes, triangles) = (prob.mesh().num_nodes(), prob.mesh().num_triangles());
    let opts = options(cfg);
    let kappa = cfg.solver.kappa;
    let solved = if kappa != 0.0 {
        natural_growth_solve(prob, kappa, &opts).map(|ng| (ng.u, Some(ng.picard_iters), Some(ng.bound_ratio)))
    } else {
        solve_with(prob, &opts, None).map(|s| (s, None, None))
    };
    let (sol, picard, natural) = match solved {
        Ok(v) => v,
        Err(e) => return Ok((nodes, triangles, Err(e.to_string()))),
    };
    let f = prob.source();
    let xn = xn_norm(f, 2)?;
    let l2 = f.lp_norm(2.0);
    let grad_ratio = match gradient_bound_ratio(&sol, prob) {
        Ok(r) => Some(r),
        Err(SolverError::UndefinedRatio) => None,
        Err(e) => return Err(e.into()),
    };
    let l2_ratio = if l2 > 0.0 {
        Some(sol.grad_sup / prob.young().inverse_derivative(l2)?)
    } else {
        None
    };
    let energy = energy_estimate_check(&sol, prob)?;
    let energy_ratio = (energy.rhs > 0.0).then_some(energy.ratio);
    let errs = built.exact.as_ref().map(|m| m.errors(&sol));
    let metrics = Metrics {
        grad_sup: sol.grad_sup,
        h_grad_sup: sol.h_grad_sup,
        u_sup: sol.u.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        xn_norm: xn,
        l2_norm: l2,
        grad_ratio,
        l2_ratio,
        energy_ratio,
        natural_ratio: natural,
        grad_err: errs.map(|e| e.gradient_sup),
        nodal_err: errs.map(|e| e.nodal_max),
        newton_iters: sol.newton_iters,
        picard_iters: picard,
        residual: sol.residual_norm,
    };
    Ok((nodes, triangles, Ok(metrics)))
}

/// Solves every (instance, mesh) pair. Instances run in parallel on the current rayon
/// pool; rows come back in declared order.
pub fn compute_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, HarnessError> {
    // resolve every spec before solving anything
    for (_, c) in cfg.instances() {
        build::domain(&c.domain)?;
        build::norm(&c.norm)?;
        build::young(&c.young)?;
    }
    let sizes = cfg.sorted_sizes();
    let jobs: Vec<(usize, Option<f64>, ExperimentConfig, f64)> = cfg
        .instances()
        .into_iter()
        .enumerate()
        .flat_map(|(i, (v, c))| sizes.iter().map(move |h| (i, v, c.clone(), *h)))
        .collect();
    jobs.into_par_iter()
        .map(|(instance, value, c, h)| {
            let start = Instant::now();
            let out = solve_row(&c, h);
            let seconds = start.elapsed().as_secs_f64();
            let (nodes, triangles, result) = match out {
                Ok(v) => v,
                Err(e @ HarnessError::Config(_)) => return Err(e),
                Err(e) => (0, 0, Err(e.to_string())),
            };
            Ok(Row {
                instance,
                value,
                h,
                nodes,
                triangles,
                result,
                seconds,
            })
        })
        .collect()
}

/// Runs the experiment and writes its outputs under `out_dir`.
///
/// Output files are only created after every row has been computed, so a failure
/// before that point leaves no partial CSV.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report, HarnessError> {
    let rows = compute_rows(cfg)?;
    let assertions = cfg.asserts.iter().map(|a| evaluate(a, &rows)).collect();
    let mut report = Report {
        rows,
        assertions,
        csv: None,
        timing: None,
        svg: None,
    };
    let io = |path: &Path| {
        let p = path.to_path_buf();
        move |e| HarnessError::Io { path: p, source: e }
    };
    if let Some(name) = &cfg.output.csv {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io(parent))?;
        }
        let file = File::create(&path).map_err(io(&path))?;
        write_csv(cfg, &report.rows, BufWriter::new(file))?;
        let timing = path.with_extension("timing.csv");
        let file = File::create(&timing).map_err(io(&timing))?;
        write_timing(&report.rows, BufWriter::new(file))?;
        report.csv = Some(path);
        report.timing = Some(timing);
    }
    if let Some(name) = &cfg.output.svg {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io(parent))?;
        }
        let column = cfg.output.plot.as_deref().unwrap_or("grad_ratio");
        let plot = plot_rows(&report.rows, column, cfg.sweep.as_ref().map(|s| s.parameter.name()));
        std::fs::write(&path, plot.render()).map_err(io(&path))?;
        report.svg = Some(path);
    }
    Ok(report)
}

/// Writes the documented CSV: `#` metadata lines, then header and rows.
pub fn write_csv<W: Write>(cfg: &ExperimentConfig, rows: &[Row], mut w: W) -> Result<(), HarnessError> {
    let io = |e| HarnessError::Io {
        path: PathBuf::from("<csv>"),
        source: e,
    };
    if let Some(name) = &cfg.name {
        writeln!(w, "# experiment: {name}").map_err(io)?;
    }
    writeln!(w, "# seed: {}", cfg.seed).map_err(io)?;
    if let Some(sw) = &cfg.sweep {
        writeln!(w, "# sweep: {}", sw.parameter.name()).map_err(io)?;
    }
    for (name, doc) in COLUMNS {
        writeln!(w, "# {name}: {doc}").map_err(io)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(COLUMNS.iter().map(|c| c.0))?;
    for r in rows {
        csv.write_record(r.record())?;
    }
    csv.flush().map_err(io)?;
    Ok(())
}

fn write_timing<W: Write>(rows: &[Row], mut w: W) -> Result<(), HarnessError> {
    let io = |e| HarnessError::Io {
        path: PathBuf::from("<timing>"),
        source: e,
    };
    for (name, doc) in TIMING_COLUMNS {
        writeln!(w, "# {name}: {doc}").map_err(io)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(TIMING_COLUMNS.iter().map(|c| c.0))?;
    for r in rows {
        csv.write_record([r.instance.to_string(), r.h.to_string(), format!("{:.6}", r.seconds)])?;
    }
    csv.flush().map_err(io)?;
    Ok(())
}

/// Plots a column against the swept value (one series per mesh size), or against `h`
/// (one series per instance) when there is no sweep.
pub fn plot_rows(rows: &[Row], column: &str, parameter: Option<&str>) -> LinePlot {
    let mut series: Vec<Series> = Vec::new();
    let mut push = |label: String, x: f64, y: f64| match series.iter_mut().find(|s| s.label == label) {
        Some(s) => s.points.push((x, y)),
        None => series.push(Series {
            label,
            points: vec![(x, y)],
        }),
    };
    for r in rows {
        let Some(y) = r.column(column) else { continue };
        match (parameter, r.value) {
            (Some(_), Some(v)) => push(format!("h = {}", r.h), v, y),
            _ => push(format!("instance {}", r.instance), r.h, y),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    LinePlot {
        title: format!("{column} vs {}", parameter.unwrap_or("h")),
        x_label: parameter.unwrap_or("h").to_string(),
        y_label: column.to_string(),
        series,
    }
}

fn by_instance(rows: &[Row]) -> Vec<Vec<&Row>> {
    let mut groups: Vec<Vec<&Row>> = Vec::new();
    for r in rows {
        if groups.len() <= r.instance {
            groups.resize_with(r.instance + 1, Vec::new);
        }
        groups[r.instance].push(r);
    }
    for g in &mut groups {
        g.sort_by(|a, b| b.h.total_cmp(&a.h));
    }
    groups
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "missing".into())
}

/// Evaluates one assertion against the computed rows.
pub fn evaluate(spec: &AssertSpec, rows: &[Row]) -> AssertOutcome {
    let groups = by_instance(rows);
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let description = match spec {
        AssertSpec::GradSup { target, rel_tol } => {
            for g in &groups {
                let Some(last) = g.last() else { continue };
                let v = last.column("grad_sup");
                let rel = v.map(|v| (v - target).abs() / target.abs());
                notes.push(format!("instance {}: {} (rel {})", last.instance, fmt_opt(v), fmt_opt(rel)));
                if !rel.is_some_and(|r| r <= *rel_tol) {
                    failures.push(last.instance);
                }
            }
            format!("grad_sup within {rel_tol} of {target} on the finest mesh")
        }
        AssertSpec::Convergence { column, min_rate } => {
            for g in &groups {
                let pts: Option<Vec<(f64, f64)>> =
                    g.iter().map(|r| r.column(column).map(|v| (r.h, v))).collect();
                let ok = pts.as_ref().and_then(|p| {
                    let decreasing = p.windows(2).all(|w| w[1].1 < w[0].1);
                    let rate = log_slope(p)?;
                    Some((decreasing, rate))
                });
                let inst = g.first().map_or(0, |r| r.instance);
                match ok {
                    Some((dec, rate)) => {
                        notes.push(format!("instance {inst}: rate {rate:.3}, monotone {dec}"));
                        if !(dec && rate >= *min_rate) {
                            failures.push(inst);
                        }
                    }
                    None => {
                        notes.push(format!("instance {inst}: not enough data"));
                        failures.push(inst);
                    }
                }
            }
            format!("{column} decreases with order >= {min_rate}")
        }
        AssertSpec::Bounded { column, max } => {
            let mut worst = f64::NEG_INFINITY;
            for r in rows {
                match r.column(column) {
                    Some(v) if v.is_finite() && v <= *max => worst = worst.max(v),
                    v => {
                        worst = worst.max(v.unwrap_or(f64::NAN));
                        failures.push(r.instance);
                    }
                }
            }
            notes.push(format!("max {worst:.6e}"));
            format!("{column} <= {max}")
        }
        AssertSpec::Stable { column, rel_tol } => {
            for g in &groups {
                let inst = g.first().map_or(0, |r| r.instance);
                let n = g.len();
                let pair = (n >= 2).then(|| (g[n - 2].column(column), g[n - 1].column(column)));
                match pair {
                    Some((Some(a), Some(b))) if b != 0.0 => {
                        let rel = (a - b).abs() / b.abs();
                        notes.push(format!("instance {inst}: change {rel:.3e}"));
                        if !(rel <= *rel_tol) {
                            failures.push(inst);
                        }
                    }
                    _ => {
                        notes.push(format!("instance {inst}: not enough data"));
                        failures.push(inst);
                    }
                }
            }
            format!("{column} changes by at most {rel_tol} between the two finest meshes")
        }
        AssertSpec::Trend { column, max_abs_slope } => {
            let finest: Vec<&Row> = groups.iter().filter_map(|g| g.last().copied()).collect();
            let pts: Option<Vec<(f64, f64)>> = finest
                .iter()
                .map(|r| Some((r.value?, r.column(column)?.abs())))
                .collect();
            let slope = pts.as_deref().and_then(log_slope);
            notes.push(format!("slope {}", fmt_opt(slope)));
            if !slope.is_some_and(|s| s.abs() <= *max_abs_slope) {
                failures.push(0);
            }
            format!("log-log slope of {column} within ±{max_abs_slope}")
        }
    };
    AssertOutcome {
        description,
        passed: failures.is_empty(),
        detail: notes.join("; "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: usize, value: Option<f64>, h: f64, grad: f64, err: Option<f64>) -> Row {
        Row {
            instance,
            value,
            h,
            nodes: 10,
            triangles: 10,
            result: Ok(Metrics {
                grad_sup: grad,
                grad_err: err,
                grad_ratio: Some(grad),
                ..Default::default()
            }),
            seconds: 0.0,
        }
    }

    #[test]
    fn log_slope_of_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|x: &f64| (*x, 3.0 * x.powf(-0.5))).collect();
        assert!((log_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert!(log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn convergence_assertion() {
        let rows = vec![
            row(0, None, 0.2, 1.0, Some(0.4)),
            row(0, None, 0.1, 1.0, Some(0.2)),
            row(0, None, 0.05, 1.0, Some(0.1)),
        ];
        let spec = AssertSpec::Convergence {
            column: "grad_err".into(),
            min_rate: 0.9,
        };
        assert!(evaluate(&spec, &rows).passed);
        let slow = AssertSpec::Convergence {
            column: "grad_err".into(),
            min_rate: 1.1,
        };
        assert!(!evaluate(&slow, &rows).passed);
    }

    #[test]
    fn failed_rows_fail_assertions() {
        let mut rows = vec![row(0, None, 0.2, 0.5, None), row(0, None, 0.1, 0.5, None)];
        let spec = AssertSpec::GradSup {
            target: 0.5,
            rel_tol: 0.01,
        };
        assert!(evaluate(&spec, &rows).passed);
        rows[1].result = Err("boom".into());
        assert!(!evaluate(&spec, &rows).passed);
    }

    #[test]
    fn trend_and_stability() {
        let rows: Vec<Row> = [1.0, 2.0, 4.0]
            .iter()
            .enumerate()
            .flat_map(|(i, k)| {
                [row(i, Some(*k), 0.1, 2.0, None), row(i, Some(*k), 0.05, 2.0 * k, None)]
            })
            .collect();
        let flat = AssertSpec::Trend {
            column: "grad_ratio".into(),
            max_abs_slope: 0.1,
        };
        assert!(!evaluate(&flat, &rows).passed);
        let stable = AssertSpec::Stable {
            column: "grad_sup".into(),
            rel_tol: 0.05,
        };
        let out = evaluate(&stable, &rows);
        assert!(!out.passed, "{out:?}");
    }

    #[test]
    fn every_column_is_documented_and_addressable() {
        let r = row(0, Some(1.0), 0.1, 1.0, Some(0.1));
        assert_eq!(r.record().len(), COLUMNS.len());
        for (name, doc) in COLUMNS {
            assert!(!doc.is_empty());
            if *name != "status" {
                let _ = r.column(name);
            }
        }
    }
}
