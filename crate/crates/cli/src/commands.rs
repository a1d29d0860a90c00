use std::cell::RefCell;
use std::path::Path;

use serde_json::{json, Value};
use sgswe::scenarios::{
    closure_discrepancy, collocation_solve, convergence_table, error_norm, lake_at_rest_check,
};
use sgswe::solver::{Integrator, RunDiagnostics, SourceDiscretization};

use crate::config::{GridSize, Resolved};
use crate::output::{num, write_fields, write_json, write_text};
use crate::CliError;

fn config(e: sgswe::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn solver(e: sgswe::Error) -> CliError {
    CliError::Solver(e.to_string())
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// All resolved parameters of a problem, for manifests.
pub fn parameters(r: &Resolved) -> Value {
    let spec = &r.spec;
    let dx = (spec.x[1] - spec.x[0]) / r.grid.nx as f64;
    let dy = (spec.y[1] - spec.y[0]) / r.grid.ny as f64;
    let cfg = &r.cfg;
    let b = &cfg.boundaries;
    json!({
        "scenario": spec.id,
        "name": spec.name,
        "domain": { "x": spec.x, "y": spec.y },
        "grid": [r.grid.nx, r.grid.ny],
        "terms": spec.index_set.len(),
        "max_degrees": spec.index_set.max_degrees(),
        "distribution": spec.distribution.marginals().iter()
            .map(|m| json!({ "alpha": m.alpha, "beta": m.beta }))
            .collect::<Vec<_>>(),
        "g": cfg.physics.g,
        "theta": cfg.theta,
        "delta": cfg.delta,
        "epsilon": cfg.epsilon.unwrap_or(dx.min(dy)),
        "cfl": cfg.cfl,
        "integrator": match cfg.integrator {
            Integrator::SspRk2 => "ssp-rk2",
            Integrator::SspRk3 => "ssp-rk3",
        },
        "source": match cfg.source {
            SourceDiscretization::WellBalanced => "well-balanced",
            SourceDiscretization::CellCentered => "cell-centered",
        },
        "boundaries": {
            "left": format!("{:?}", b.left),
            "right": format!("{:?}", b.right),
            "bottom": format!("{:?}", b.bottom),
            "top": format!("{:?}", b.top),
        },
        "end_time": spec.end_time,
        "snapshots": spec.snapshots,
        "max_halvings": cfg.max_halvings,
        "threads": rayon::current_num_threads(),
    })
}

fn diagnostics(d: &RunDiagnostics) -> Value {
    json!({
        "steps": d.steps(),
        "dt_history": d.dt_history,
        "min_node_height_per_step": d.min_node_history,
        "min_eigenvalue_per_step": d.min_eigen_history,
        "min_node_height": d.min_node_height,
        "min_eigenvalue": d.min_eigenvalue,
        "filter_activations": d.filter_activations,
        "positivity_corrections": d.corrections,
        "dt_halvings": d.halvings,
        "mu": { "max": d.mu_max, "mean": d.mu_mean(), "samples": d.mu_samples },
    })
}

/// Solves the problem, writing both field files at every snapshot time
/// (and at `t = 0` when it is listed) plus a manifest.
pub fn run(r: &Resolved) -> Result<(), CliError> {
    prepare(&r.output)?;
    let spec = &r.spec;
    let space = spec.space().map_err(config)?;
    let grid = spec.grid(r.grid.nx, r.grid.ny).map_err(config)?;
    let bottom = spec.build_bottom(&grid, &space);
    let mut state = spec.initial_state(&grid, &space, &bottom).map_err(config)?;
    let want_initial = spec.snapshots.contains(&0.0);
    let files = RefCell::new(Vec::new());
    let failure = RefCell::new(None);
    let result = sgswe::solver::run(
        &mut state,
        &bottom,
        &space,
        &r.cfg,
        spec.end_time,
        &spec.snapshots,
        |s| {
            if s.t == 0.0 && !want_initial {
                return Ok(());
            }
            match write_fields(&r.output, s, &bottom) {
                Ok(written) => {
                    files.borrow_mut().extend(written);
                    Ok(())
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    Err(sgswe::Error::Domain("output failed".into()))
                }
            }
        },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let files: Vec<String> = files
        .into_inner()
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let mut manifest = json!({
        "command": "run",
        "parameters": parameters(r),
        "files": files,
    });
    let outcome = match &result {
        Ok(d) => {
            manifest["status"] = json!("completed");
            manifest["final_time"] = json!(state.t);
            manifest["diagnostics"] = diagnostics(d);
            Ok(())
        }
        Err(e) => {
            manifest["status"] = json!("aborted");
            manifest["error"] = json!(e.to_string());
            Err(solver(e.clone()))
        }
    };
    write_json(&r.output.join("manifest.json"), &manifest)?;
    if outcome.is_ok() {
        println!(
            "completed {} steps to t = {}; output in {}",
            manifest["diagnostics"]["steps"],
            state.t,
            r.output.display()
        );
    }
    outcome
}

/// Errors against a reference run and observed orders.
pub fn convergence(r: &Resolved) -> Result<(), CliError> {
    prepare(&r.output)?;
    let grids = r.params.grids.clone().unwrap_or_else(|| {
        [100, 200, 400]
            .iter()
            .map(|&n| GridSize { nx: n, ny: n })
            .collect()
    });
    let reference = r.params.reference.unwrap_or(GridSize { nx: 800, ny: 800 });
    let fine = r.spec.grid(reference.nx, reference.ny).map_err(config)?;
    for g in &grids {
        let coarse = r.spec.grid(g.nx, g.ny).map_err(config)?;
        if coarse.refinement_factor(&fine).is_none() {
            return Err(CliError::Config(format!(
                "reference {reference} does not refine {g}"
            )));
        }
    }
    let pairs: Vec<(usize, usize)> = grids.iter().map(|g| (g.nx, g.ny)).collect();
    let rows =
        convergence_table(&r.spec, &pairs, (reference.nx, reference.ny), &r.cfg).map_err(solver)?;

    let mut text = format!(
        "scenario {}, K = {}, reference {reference}, t = {}\n{:>12}  {:>14}  {:>10}\n",
        r.spec.id,
        r.spec.index_set.len(),
        r.spec.end_time,
        "grid",
        "error",
        "order"
    );
    let mut csv = String::from("nx,ny,error,order\n");
    for row in &rows {
        let order = row
            .order
            .map(|o| format!("{o:.6}"))
            .unwrap_or_else(|| "-".into());
        text += &format!(
            "{:>12}  {:>14.6e}  {:>10}\n",
            format!("{}x{}", row.nx, row.ny),
            row.error,
            order
        );
        csv += &format!(
            "{},{},{},{}\n",
            row.nx,
            row.ny,
            num(row.error),
            row.order.map(num).unwrap_or_default()
        );
    }
    write_text(&r.output.join("convergence.txt"), &text)?;
    write_text(&r.output.join("convergence.csv"), &csv)?;
    write_json(
        &r.output.join("manifest.json"),
        &json!({ "command": "convergence", "parameters": parameters(r), "reference": [reference.nx, reference.ny] }),
    )?;
    print!("{text}");
    Ok(())
}

/// Stochastic Galerkin against stochastic collocation on the same grid.
pub fn compare_collocation(r: &Resolved) -> Result<(), CliError> {
    prepare(&r.output)?;
    let spec = &r.spec;
    let space = spec.space().map_err(config)?;
    let p3 = space.basis().p3_points_per_dim();
    let points = r
        .params
        .points
        .unwrap_or_else(|| p3.iter().copied().max().unwrap_or(1));
    let mut warnings = Vec::new();
    if p3.iter().any(|&n| points < n) {
        warnings.push(format!(
            "{points} collocation points per dimension is below the {p3:?} needed for exact triple products"
        ));
    }
    let (nx, ny) = (r.grid.nx, r.grid.ny);
    let sg = spec
        .simulate(nx, ny, &r.cfg, spec.end_time, |_| Ok(()))
        .map_err(solver)?;
    let sc = collocation_solve(spec, nx, ny, points, &r.cfg, &space).map_err(solver)?;
    let difference = error_norm(&sc, &sg.state).map_err(solver)?;
    let sg_dir = r.output.join("sg");
    let sc_dir = r.output.join("sc");
    prepare(&sg_dir)?;
    prepare(&sc_dir)?;
    write_fields(&sg_dir, &sg.state, &sg.bottom)?;
    write_fields(&sc_dir, &sc, &sg.bottom)?;
    write_json(
        &r.output.join("manifest.json"),
        &json!({
            "command": "compare-collocation",
            "parameters": parameters(r),
            "collocation_points_per_dim": points,
            "difference": difference,
            "warnings": warnings,
            "sg_diagnostics": diagnostics(&sg.diagnostics),
        }),
    )?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!("difference between SG and SC fields: {difference:e}");
    Ok(())
}

/// Runs a stochastic lake at rest and reports the drift.
pub fn wellbalance(r: &Resolved) -> Result<(), CliError> {
    prepare(&r.output)?;
    let k = r.spec.index_set.len();
    let eta = r
        .params
        .eta
        .clone()
        .unwrap_or_else(|| [1.0, 0.01].into_iter().take(k).collect());
    let tol = r.params.tol.unwrap_or(1e-12);
    let end = r.params.end_time.unwrap_or(1.0);
    let report = lake_at_rest_check(&r.spec, &eta, r.grid.nx, r.grid.ny, end, &r.cfg).map_err(
        |e| match e {
            sgswe::Error::Domain(_) | sgswe::Error::DimensionMismatch { .. } => config(e),
            other => solver(other),
        },
    )?;
    let pass = report.passes(tol);
    write_json(
        &r.output.join("wellbalance.json"),
        &json!({
            "command": "wellbalance",
            "parameters": parameters(r),
            "eta": eta,
            "end_time": end,
            "tolerance": tol,
            "max_deviation": report.max_deviation,
            "max_discharge": report.max_discharge,
            "steps": report.steps,
            "pass": pass,
        }),
    )?;
    println!(
        "{}: max |U - U0| = {:e}, max |q| = {:e} after {} steps",
        if pass { "pass" } else { "fail" },
        report.max_deviation,
        report.max_discharge,
        report.steps
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "lake at rest drifted beyond {tol:e}"
        )))
    }
}

/// Gap between the two closures of `qx qy / h` at the end time, for a
/// range of basis sizes.
pub fn discrepancy(r: &Resolved) -> Result<(), CliError> {
    prepare(&r.output)?;
    let ks = r.params.ks.clone().unwrap_or_else(|| vec![2, 3, 4, 6, 8]);
    let mut csv = String::from("k,discrepancy\n");
    let mut values = Vec::new();
    for &k in &ks {
        let spec = r.spec.clone().with_terms(k).map_err(config)?;
        let sim = spec
            .simulate(r.grid.nx, r.grid.ny, &r.cfg, spec.end_time, |_| Ok(()))
            .map_err(solver)?;
        let d = closure_discrepancy(&sim.state, &sim.space).map_err(solver)?;
        println!("K = {k}: {d:e}");
        csv += &format!("{k},{}\n", num(d));
        values.push(d);
    }
    write_text(&r.output.join("discrepancy.csv"), &csv)?;
    write_json(
        &r.output.join("manifest.json"),
        &json!({
            "command": "discrepancy",
            "parameters": parameters(r),
            "terms": ks,
            "discrepancy": values,
            "non_increasing": values.windows(2).all(|w| w[1] <= w[0]),
        }),
    )?;
    Ok(())
}
