//! `khess solve`: reads a problem file, runs the prescribed sigma_k
//! solver, and writes the solution radii, the iteration trace, and the
//! diagnostics report. A reported non-convergence still writes the trace
//! (exit 4); an inadmissible starting graph or malformed problem file is
//! a usage error (exit 2).

use std::path::Path;

use khess::solve::{diagnostics, solve, DiagnosticsReport, QWeights, SolveTrace};
use khess::report::{float_cell, write_json, Table};
use khess::{Error, Result};
use serde::Serialize;

use crate::plots;
use crate::problem::ProblemFile;
use crate::RunCtx;

#[derive(Serialize)]
struct Report {
    converged: bool,
    diagnostics: Option<DiagnosticsReport>,
    iterations: usize,
    k: usize,
    reason: Option<String>,
    residual_history: Vec<f64>,
    rhs: String,
    sites: usize,
    step_sizes: Option<Vec<f64>>,
    margin_history: Option<Vec<f64>>,
}

pub fn run(ctx: &RunCtx, path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(path)?;
    let problem: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("problem file {}: {e}", path.display())))?;
    let start = problem.build_graph()?;
    let rhs = problem.build_rhs()?;
    let cfg = problem.build_config()?;
    let k = cfg.k;

    match solve(&start, &rhs, &cfg) {
        Ok(solution) => {
            let diag = diagnostics(&solution.graph, k, QWeights::default())?;
            solution_table(&solution.graph).write_csv(&ctx.out.join("solution.csv"))?;
            let report = Report {
                converged: true,
                diagnostics: Some(diag),
                iterations: solution.trace.iterations,
                k,
                reason: None,
                residual_history: solution.trace.residual_history.clone(),
                rhs: rhs.describe(),
                sites: solution.graph.site_count(),
                step_sizes: Some(solution.trace.step_sizes.clone()),
                margin_history: Some(solution.trace.margin_history.clone()),
            };
            write_json(&ctx.out.join("solve_report.json"), &report)?;
            if ctx.emit_plots {
                emit_plots(ctx, &solution.graph, &solution.trace)?;
            }
            let sup = report
                .residual_history
                .last()
                .copied()
                .unwrap_or(f64::NAN);
            println!(
                "solve: converged in {} iterations, final sup residual = {sup:.3e}",
                report.iterations
            );
            Ok(0)
        }
        Err(Error::NonConvergence {
            iterations,
            reason,
            history,
        }) => {
            let report = Report {
                converged: false,
                diagnostics: None,
                iterations,
                k,
                reason: Some(reason.clone()),
                residual_history: history.clone(),
                rhs: rhs.describe(),
                sites: start.site_count(),
                step_sizes: None,
                margin_history: None,
            };
            write_json(&ctx.out.join("solve_report.json"), &report)?;
            eprintln!("solve: no convergence after {iterations} iterations: {reason}");
            Ok(4)
        }
        Err(e) => Err(e),
    }
}

fn solution_table(graph: &khess::geom::RadialGraph) -> Table {
    let values = graph.values();
    let sites = graph.sites();
    let has_psi = sites.first().map_or(false, |(_, psi)| psi.is_some());
    let mut table = if has_psi {
        Table::new(&["site", "theta", "psi", "radius"])
    } else {
        Table::new(&["site", "theta", "radius"])
    };
    for (i, ((theta, psi), r)) in sites.iter().zip(values.iter()).enumerate() {
        let mut row = vec![i.to_string(), float_cell(*theta)];
        if let Some(p) = psi {
            row.push(float_cell(*p));
        }
        row.push(float_cell(*r));
        table.push_row(row);
    }
    table
}

fn emit_plots(
    ctx: &RunCtx,
    graph: &khess::geom::RadialGraph,
    trace: &SolveTrace,
) -> Result<()> {
    let values = graph.values();
    let profile: Vec<(f64, f64)> = graph
        .sites()
        .iter()
        .zip(values.iter())
        .map(|((theta, _), r)| (*theta, *r))
        .collect();
    plots::write_line_svg(
        &ctx.out.join("solve_profile.svg"),
        "solved radius over theta",
        &[("radius", &profile)],
    )?;
    let history: Vec<(f64, f64)> = trace
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, &r)| (i as f64, r.max(1e-20).log10()))
        .collect();
    plots::write_line_svg(
        &ctx.out.join("solve_history.svg"),
        "log10 sup residual per iteration",
        &[("residual", &history)],
    )?;
    Ok(())
}
