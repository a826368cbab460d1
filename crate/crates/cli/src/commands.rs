//! The three subcommands as library functions; `main` only parses
//! arguments and prints.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use cnlse_core::analysis::DEFAULT_RHO_TAU_THRESHOLD;
use cnlse_core::scenario::Warning;
use cnlse_core::{
    convergence_q, element_bounds, invariants, load_scenario, matrix_norm_bound, preset_for_scheme, preset_sweep,
    RunRecord, Scenario, Scheme, StabilityBudget, Termination,
};

use crate::error::{exit, CliError, CliResult};
use crate::output::{self, fmt_num, OutputPlan};

/// Ordered `key = value` pairs as written to summaries and printed reports.
pub type KeyValues = Vec<(String, String)>;
/// Items tagged with the label of the run they belong to.
pub type Labelled<T> = Vec<(String, T)>;

/// Where a scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Preset(String),
    Config(PathBuf),
}

impl Source {
    /// Labelled scenarios; sweep presets expand to several runs.
    pub fn scenarios(&self, scheme: Option<Scheme>) -> CliResult<Vec<(String, Scenario)>> {
        match self {
            Source::Preset(name) => {
                let mut runs = preset_sweep(name)?;
                if let Some(scheme) = scheme {
                    if runs.len() == 1 {
                        runs[0].1 = preset_for_scheme(name, scheme)?;
                    } else {
                        for (_, s) in &mut runs {
                            s.scheme = scheme;
                        }
                    }
                }
                Ok(runs)
            }
            Source::Config(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let mut scenario =
                    load_scenario(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                if let Some(scheme) = scheme {
                    scenario.scheme = scheme;
                }
                let label = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("config")
                    .to_string();
                Ok(vec![(label, scenario)])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub source: Source,
    pub scheme: Option<Scheme>,
    /// New time step; the final time is kept.
    pub tau: Option<f64>,
    /// Number of steps to take at the (possibly overridden) time step.
    pub steps: Option<u64>,
    pub plan: OutputPlan,
}

/// One finished run and the files written for it.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub directory: PathBuf,
    pub scenario: Scenario,
    pub record: RunRecord,
    pub budget: StabilityBudget,
    /// Convergence residual at the final state.
    pub q_final: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcomes: Vec<RunOutcome>,
    pub warnings: Vec<(String, Warning)>,
}

impl RunReport {
    /// Exit status: the most severe termination among the runs.
    pub fn exit_code(&self) -> i32 {
        self.outcomes
            .iter()
            .map(|o| match o.record.termination {
                Termination::Completed => exit::OK,
                Termination::BlewUp { .. } => exit::BLOW_UP,
                Termination::IterationFailure { .. } => exit::ITERATION_FAILURE,
            })
            .max()
            .unwrap_or(exit::OK)
    }
}

/// Applies the command-line overrides to every scenario of the request and
/// validates the result.
pub fn prepare_runs(request: &RunRequest) -> CliResult<(Labelled<Scenario>, Labelled<Warning>)> {
    request.plan.validate()?;
    if let Some(tau) = request.tau {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CliError::Config(format!("--tau must be positive, got {tau}")));
        }
    }
    if request.steps == Some(0) {
        return Err(CliError::Config("--steps must be positive".into()));
    }
    let mut runs = request.source.scenarios(request.scheme)?;
    let mut warnings = Vec::new();
    for (label, s) in &mut runs {
        if let Some(tau) = request.tau {
            *s = s.with_tau(tau, true);
        }
        if let Some(n) = request.steps {
            s.grid.n_time = n;
        }
        if request.tau.is_some() || request.steps.is_some() {
            s.observe_every = (s.grid.n_time / 200).max(1);
        }
        for w in s.validate()? {
            warnings.push((label.clone(), w));
        }
    }
    Ok((runs, warnings))
}

fn run_one(label: String, scenario: Scenario, directory: PathBuf, plan: &OutputPlan) -> CliResult<RunOutcome> {
    let initial = scenario.initial_state();
    let budget = StabilityBudget::assess(&scenario.phys, &scenario.grid, &initial, DEFAULT_RHO_TAU_THRESHOLD)?;
    let cadence = plan.cadence(scenario.grid.n_time, scenario.observe_every);
    let record = scenario.run(&scenario.evolve_options(cadence), &mut [])?;

    let final_inv = invariants(&record.final_state)?;
    let (exact_inv, q_reference) = match scenario.oracle() {
        Some(oracle) => {
            let exact = oracle.sample(&scenario.grid, record.final_state.time, &scenario.phys)?;
            (invariants(&exact)?, "oracle")
        }
        None => (record.initial_invariants(), "initial"),
    };
    let q_final = convergence_q(&scenario.phys, &final_inv, &exact_inv);

    fs::create_dir_all(&directory).map_err(|e| CliError::io(&directory, e))?;
    remove_stale_snapshots(&directory)?;
    output::write_timeseries(&directory, &record, plan.precision)?;
    for snap in &record.snapshots {
        output::write_snapshot(&directory, &scenario.grid, snap, plan.precision)?;
    }
    // A failed run still leaves its last finite state behind.
    let final_written = record
        .snapshots
        .last()
        .is_some_and(|s| s.time == record.final_state.time);
    if !final_written {
        output::write_snapshot(&directory, &scenario.grid, &record.final_state, plan.precision)?;
    }

    let p = plan.precision;
    let g = &scenario.grid;
    let mut summary: KeyValues = vec![
        ("label".into(), label.clone()),
        ("scheme".into(), scenario.scheme.to_string()),
        ("termination".into(), record.termination.to_string()),
        (
            "failing_step".into(),
            record
                .termination
                .failing_step()
                .map_or_else(|| "none".to_string(), |s| s.to_string()),
        ),
        ("n_space".into(), g.n_space.to_string()),
        ("n_time".into(), g.n_time.to_string()),
        ("h".into(), fmt_num(g.h(), p)),
        ("tau".into(), fmt_num(g.tau, p)),
        ("final_time".into(), fmt_num(record.final_state.time, p)),
        ("rho".into(), fmt_num(budget.rho, p)),
        ("rho_tau".into(), fmt_num(budget.rho_tau, p)),
        ("verdict".into(), budget.verdict.to_string()),
        ("recommended_tau".into(), fmt_num(budget.recommended_tau, p)),
        ("I_u_initial".into(), fmt_num(record.initial_invariants().i_u, p)),
        ("I_v_initial".into(), fmt_num(record.initial_invariants().i_v, p)),
        ("I_u_final".into(), fmt_num(final_inv.i_u, p)),
        ("I_v_final".into(), fmt_num(final_inv.i_v, p)),
        ("max_invariant_drift".into(), fmt_num(record.max_invariant_drift(), p)),
        ("q_final".into(), fmt_num(q_final, p)),
        ("q_reference".into(), q_reference.into()),
    ];
    if let Some(err) = record.max_error() {
        summary.push(("max_error".into(), fmt_num(err, p)));
    }
    if let Some(m) = record.median_step_iterations() {
        summary.push(("median_iterations".into(), m.to_string()));
    }
    output::write_key_values(&directory.join(output::SUMMARY_FILE), &summary)?;
    output::write_key_values(
        &directory.join(output::TIMING_FILE),
        &[("wall_time_s".into(), format!("{:.6}", record.wall_time.as_secs_f64()))],
    )?;

    Ok(RunOutcome {
        label,
        directory,
        scenario,
        record,
        budget,
        q_final,
    })
}

fn remove_stale_snapshots(dir: &Path) -> CliResult<()> {
    for (_, path) in output::list_snapshots(dir)? {
        fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

/// Runs the request, writing one directory per run.
///
/// Nothing is created on disk until every scenario has loaded and
/// validated. Sweeps run concurrently, one thread per scenario, each
/// writing into `<out>/<label>`.
pub fn cmd_run(request: &RunRequest) -> CliResult<RunReport> {
    let (runs, warnings) = prepare_runs(request)?;
    let plan = &request.plan;
    let outcomes = if runs.len() == 1 {
        let (label, scenario) = runs.into_iter().next().unwrap();
        vec![run_one(label, scenario, plan.directory.clone(), plan)?]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = runs
                .into_iter()
                .map(|(label, scenario)| {
                    let dir = plan.directory.join(&label);
                    scope.spawn(move || run_one(label, scenario, dir, plan))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect::<CliResult<Vec<_>>>()
        })?
    };
    Ok(RunReport { outcomes, warnings })
}

/// `key=value` diagnostics of one scenario's stability budget.
pub fn stability_report(scenario: &Scenario, threshold: f64) -> CliResult<KeyValues> {
    let state = scenario.initial_state();
    let budget = StabilityBudget::assess(&scenario.phys, &scenario.grid, &state, threshold)?;
    let bounds = element_bounds(&scenario.phys, &scenario.grid, &state)?;
    let inv = invariants(&state)?;
    let mut out: KeyValues = vec![
        ("rho".into(), budget.rho.to_string()),
        ("rho_tau".into(), budget.rho_tau.to_string()),
        ("threshold".into(), budget.threshold.to_string()),
        ("verdict".into(), budget.verdict.to_string()),
        ("recommended_tau".into(), budget.recommended_tau.to_string()),
        (
            "matrix_norm_bound".into(),
            matrix_norm_bound(&scenario.phys, &scenario.grid, &inv).to_string(),
        ),
    ];
    out.extend(bounds.named().iter().map(|(k, v)| (k.to_string(), v.to_string())));
    Ok(out)
}

/// Stability diagnostics for every scenario of `source`.
pub fn cmd_stability(source: &Source, threshold: f64) -> CliResult<Labelled<KeyValues>> {
    source
        .scenarios(None)?
        .into_iter()
        .map(|(label, s)| {
            s.validate()?;
            Ok((label, stability_report(&s, threshold)?))
        })
        .collect()
}

/// Differences of the moduli at one common snapshot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub time: f64,
    pub l2_u: f64,
    pub max_u: f64,
    pub l2_v: f64,
    pub max_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Largest max-norm difference of either modulus over all common times.
    pub max_difference: f64,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(1.0)
}

/// Compares `|U|` and `|V|` of two runs at the snapshot times they share.
pub fn cmd_compare(dir_a: &Path, dir_b: &Path) -> CliResult<CompareReport> {
    let snaps_a = output::list_snapshots(dir_a)?;
    let snaps_b = output::list_snapshots(dir_b)?;
    let mut rows = Vec::new();
    for (ta, path_a) in &snaps_a {
        let Some((tb, path_b)) = snaps_b.iter().find(|(tb, _)| same_time(*ta, *tb)) else {
            continue;
        };
        let a = output::read_snapshot(path_a, *ta)?;
        let b = output::read_snapshot(path_b, *tb)?;
        let same_grid = a.x.len() == b.x.len()
            && a.x
                .iter()
                .zip(&b.x)
                .all(|(p, q)| (p - q).abs() <= 1e-9 * p.abs().max(1.0));
        if !same_grid {
            return Err(CliError::Config(format!(
                "snapshots at t={ta} use different spatial grids ({} vs {} nodes)",
                a.x.len(),
                b.x.len()
            )));
        }
        let h = if a.x.len() > 1 { a.x[1] - a.x[0] } else { 1.0 };
        let diff = |p: &[f64], q: &[f64]| {
            let (mut sq, mut mx) = (0.0f64, 0.0f64);
            for (x, y) in p.iter().zip(q) {
                let d = (x - y).abs();
                sq += d * d;
                mx = mx.max(d);
            }
            (h * sq.sqrt(), mx)
        };
        let (l2_u, max_u) = diff(&a.abs_u, &b.abs_u);
        let (l2_v, max_v) = diff(&a.abs_v, &b.abs_v);
        rows.push(CompareRow {
            time: *ta,
            l2_u,
            max_u,
            l2_v,
            max_v,
        });
    }
    if rows.is_empty() {
        return Err(CliError::NoCommonTimes(format!(
            "no common snapshot times between {} ({} snapshots) and {} ({} snapshots)",
            dir_a.display(),
            snaps_a.len(),
            dir_b.display(),
            snaps_b.len()
        )));
    }
    let max_difference = rows.iter().map(|r| r.max_u.max(r.max_v)).fold(0.0, f64::max);
    Ok(CompareReport { rows, max_difference })
}
