//! Named experiment reproductions and the pieces behind the CLI subcommands.
//!
//! Built-in experiments (`[experiment] name = ...`):
//!
//! * `table1-left`   - classical overlapping Schwarz, overlap fixed at 8
//!   cells, meshes (1/100,1/120), (1/200,1/240), (1/400,1/480).
//! * `table1-right`  - classical at (1/100,1/120), overlap 2/4/8/16 cells.
//! * `fig-u3`        - nonoverlapping relaxation, `f = u^3`, three meshes.
//! * `fig-u2ux`      - `f = u^2 u_x`, linear vs nonlinear transmission.
//! * `delta-sweep`   - error after 3 iterations against the cubic
//!   transmission coefficient delta.
//! * `order-study`   - self-convergence orders on a refinement chain.
//! * `energy-check`  - energy-identity battery, lower-bound sampling,
//!   energy traces and interface remainder records.
//!
//! All experiments run on the space domain `[0, 4]` over `[0, 2]` with the
//! initial pulse `p(x) = x^3 (2-x)^3`, `q(x) = 3 x^2 (2-x)^2 (x-1)` supported
//! in `(0, 2)`: at t = 0 the solution lives in the left half and it crosses
//! into the right half before the final time, so the interface carries real
//! signal for the whole window.

use crate::config::ConfigFile;
use crate::energy::{
    discrete_energy, energy_identity_residual, solve_linear_auxiliary, staggered_energy_levels,
    swr_remainder, RemainderRecord, SourceTerm,
};
use crate::model::{
    sample_initial_data, InitialData, MeshSpec, NonlinearitySpec, SubdomainLayout,
    TransmissionSpec,
};
use crate::output::{
    format_float, write_csv, write_energy_trace, write_field, write_iteration_history,
    write_remainders, Manifest,
};
use crate::solver::{
    extract_trace, solve_monodomain, solve_subdomain, EdgeCondition, Side, SubdomainProblem,
    TraceRole, TraceSeries,
};
use crate::swr::{
    run_classical, run_swr, theoretical_iteration_count, Algorithm, InitialGuess, IterationHistory,
    ResidualMetric, SwrConfig,
};
use crate::{Error, Result};
use rayon::prelude::*;
use std::path::Path;

/// Initial pulse position, supported in (0, 2).
pub fn pulse_position(x: f64) -> f64 {
    if x > 0.0 && x < 2.0 {
        x.powi(3) * (2.0 - x).powi(3)
    } else {
        0.0
    }
}

/// Initial pulse velocity, supported in (0, 2).
pub fn pulse_velocity(x: f64) -> f64 {
    if x > 0.0 && x < 2.0 {
        3.0 * x * x * (2.0 - x) * (2.0 - x) * (x - 1.0)
    } else {
        0.0
    }
}

/// The three meshes used throughout the experiments: dx = 1/100, 1/200,
/// 1/400 with dt = 1/120, 1/240, 1/480.
pub const STUDY_MESHES: [(usize, usize); 3] = [(400, 240), (800, 480), (1600, 960)];

/// Delta grid of the built-in sweep; the derived transmission coefficient
/// 1/6 sits in the interior of the grid.
pub const DELTA_GRID: [f64; 8] = [
    0.0,
    1.0 / 24.0,
    1.0 / 12.0,
    1.0 / 8.0,
    1.0 / 6.0,
    5.0 / 24.0,
    1.0 / 4.0,
    1.0 / 3.0,
];

pub fn study_mesh(intervals: usize, steps: usize) -> Result<MeshSpec> {
    MeshSpec::new(0.0, 4.0, intervals, steps, 2.0)
}

pub fn pulse_data(mesh: &MeshSpec) -> InitialData {
    sample_initial_data(pulse_position, pulse_velocity, mesh)
}

fn initial_data_from_tag(tag: &str, mesh: &MeshSpec) -> Result<InitialData> {
    if tag == "pulse" {
        Ok(pulse_data(mesh))
    } else if tag == "zero" {
        Ok(sample_initial_data(|_| 0.0, |_| 0.0, mesh))
    } else if let Some(amp) = tag.strip_prefix("pulse-scaled:") {
        Ok(pulse_data(mesh).scaled(crate::config::parse_number(amp)?))
    } else {
        Err(Error::Config(format!("unknown initial_data tag `{tag}`")))
    }
}

fn metric_from_tag(tag: &str) -> Result<ResidualMetric> {
    match tag {
        "perturbation" => Ok(ResidualMetric::OperatorPerturbation),
        "trace" => Ok(ResidualMetric::TraceIncrement),
        other => Err(Error::Config(format!("unknown residual metric `{other}`"))),
    }
}

/// Two-subdomain relaxation setup split at x = 2.
pub fn swr_setup(
    mesh: MeshSpec,
    f: NonlinearitySpec,
    transmission: TransmissionSpec,
    tol: f64,
    max_iters: usize,
    metric: ResidualMetric,
) -> Result<SwrConfig> {
    let layout = SubdomainLayout::nonoverlapping(&mesh, &[2.0])?;
    let init = pulse_data(&mesh);
    Ok(SwrConfig {
        algorithm: Algorithm::NonoverlappingSwr,
        layout,
        mesh,
        f,
        transmission,
        init,
        initial_guess: InitialGuess::ZeroTraces,
        tol,
        max_iters,
        metric,
    })
}

/// Classical overlapping setup: left subdomain (0, 2 + overlap), right (2, 4).
pub fn classical_setup(
    mesh: MeshSpec,
    f: NonlinearitySpec,
    overlap_cells: usize,
    max_iters: usize,
) -> Result<SwrConfig> {
    let layout = SubdomainLayout::overlapping(&mesh, 2.0, overlap_cells as f64 * mesh.dx)?;
    let init = pulse_data(&mesh);
    Ok(SwrConfig {
        algorithm: Algorithm::ClassicalOverlapping,
        layout,
        mesh,
        f,
        transmission: TransmissionSpec::linear(),
        init,
        initial_guess: InitialGuess::ZeroTraces,
        tol: SwrConfig::DEFAULT_TOL,
        max_iters,
        metric: ResidualMetric::TraceIncrement,
    })
}

/// Aggregate outcome of one experiment, used for the CLI exit code.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExperimentOutcome {
    pub blow_ups: usize,
    pub non_converged: usize,
}

impl ExperimentOutcome {
    fn absorb(&mut self, history: &IterationHistory) {
        if history.failure.is_some() {
            self.blow_ups += 1;
        } else if !history.converged {
            self.non_converged += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Table 1: classical overlapping Schwarz
// ---------------------------------------------------------------------------

fn classical_rows(
    cases: &[(usize, usize, usize)], // (intervals, steps, overlap_cells)
    f: &NonlinearitySpec,
    max_iters: usize,
) -> Result<Vec<(MeshSpec, usize, IterationHistory)>> {
    cases
        .par_iter()
        .map(|&(intervals, steps, cells)| {
            let mesh = study_mesh(intervals, steps)?;
            let cfg = classical_setup(mesh, f.clone(), cells, max_iters)?;
            let history = run_classical(&cfg)?;
            Ok((mesh, cells, history))
        })
        .collect()
}

fn table1(cases: &[(usize, usize, usize)], name: &str, cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let f = NonlinearitySpec::from_tag(&cfg.string("problem", "nonlinearity", "u3"))?;
    let max_iters = cfg.integer("iteration", "max_iters", 400)?;
    let rows = classical_rows(cases, &f, max_iters)?;
    let mut outcome = ExperimentOutcome::default();
    let mut summary = Vec::new();
    let mut manifest = Manifest::new(name);
    manifest.push_config_echo(&cfg.echo());
    for (mesh, cells, history) in &rows {
        outcome.absorb(history);
        let n_th = theoretical_iteration_count(mesh.dx, mesh.dt, mesh.t_final, *cells as f64 * mesh.dx);
        summary.push(vec![
            format_float(mesh.dx),
            format_float(mesh.dt),
            cells.to_string(),
            history.iterations_used.to_string(),
            n_th.to_string(),
            format_float(history.final_residual()),
            format_float(history.final_error()),
            history.converged.to_string(),
        ]);
        write_iteration_history(
            &out.join(format!("history-J{}-L{}.csv", mesh.intervals, cells)),
            history,
        )?;
        manifest.push(
            "results",
            &format!("N_comp_J{}_L{}", mesh.intervals, cells),
            history.iterations_used.to_string(),
        );
    }
    write_csv(
        &out.join("summary.csv"),
        "dx,dt,overlap_cells,N_comp,N_th,final_residual,final_error,converged",
        &summary,
    )?;
    manifest.write(&out.join("manifest.txt"))?;
    Ok(outcome)
}

pub fn table1_left(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let cases: Vec<(usize, usize, usize)> =
        STUDY_MESHES.iter().map(|&(j, n)| (j, n, 8)).collect();
    table1(&cases, "table1-left", cfg, out)
}

pub fn table1_right(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let cases: Vec<(usize, usize, usize)> =
        [2usize, 4, 8, 16].iter().map(|&c| (400, 240, c)).collect();
    table1(&cases, "table1-right", cfg, out)
}

// ---------------------------------------------------------------------------
// Convergence-history figures
// ---------------------------------------------------------------------------

pub fn fig_u3(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let tol = cfg.number("iteration", "tol", SwrConfig::DEFAULT_TOL)?;
    let max_iters = cfg.integer("iteration", "max_iters", SwrConfig::DEFAULT_MAX_ITERS)?;
    let runs: Vec<Result<(MeshSpec, IterationHistory)>> = STUDY_MESHES
        .par_iter()
        .map(|&(j, n)| {
            let mesh = study_mesh(j, n)?;
            let swr = swr_setup(
                mesh,
                NonlinearitySpec::cubic_u(),
                TransmissionSpec::linear(),
                tol,
                max_iters,
                ResidualMetric::OperatorPerturbation,
            )?;
            Ok((mesh, run_swr(&swr)?))
        })
        .collect();
    let mut outcome = ExperimentOutcome::default();
    let mut summary = Vec::new();
    let mut manifest = Manifest::new("fig-u3");
    manifest.push_config_echo(&cfg.echo());
    for run in runs {
        let (mesh, history) = run?;
        outcome.absorb(&history);
        summary.push(vec![
            mesh.intervals.to_string(),
            mesh.steps.to_string(),
            history.iterations_used.to_string(),
            format_float(history.final_residual()),
            format_float(history.final_error()),
            history.converged.to_string(),
        ]);
        manifest.push(
            "results",
            &format!("iterations_J{}", mesh.intervals),
            history.iterations_used.to_string(),
        );
        write_iteration_history(&out.join(format!("history-J{}.csv", mesh.intervals)), &history)?;
    }
    write_csv(
        &out.join("summary.csv"),
        "intervals,steps,iterations,final_residual,final_error,converged",
        &summary,
    )?;
    manifest.write(&out.join("manifest.txt"))?;
    Ok(outcome)
}

pub fn fig_u2ux(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let tol = cfg.number("iteration", "tol", SwrConfig::DEFAULT_TOL)?;
    let max_iters = cfg.integer("iteration", "max_iters", SwrConfig::DEFAULT_MAX_ITERS)?;
    let f = NonlinearitySpec::square_ux();
    let cases: Vec<(usize, usize, bool)> = STUDY_MESHES
        .iter()
        .flat_map(|&(j, n)| [(j, n, false), (j, n, true)])
        .collect();
    let runs: Vec<Result<(MeshSpec, bool, IterationHistory)>> = cases
        .par_iter()
        .map(|&(j, n, nonlinear)| {
            let mesh = study_mesh(j, n)?;
            let transmission = if nonlinear {
                crate::model::transmission_from_nonlinearity(&f)?
            } else {
                TransmissionSpec::linear()
            };
            let swr = swr_setup(
                mesh,
                f.clone(),
                transmission,
                tol,
                max_iters,
                ResidualMetric::OperatorPerturbation,
            )?;
            Ok((mesh, nonlinear, run_swr(&swr)?))
        })
        .collect();
    let mut outcome = ExperimentOutcome::default();
    let mut summary = Vec::new();
    let mut manifest = Manifest::new("fig-u2ux");
    manifest.push_config_echo(&cfg.echo());
    for run in runs {
        let (mesh, nonlinear, history) = run?;
        outcome.absorb(&history);
        let kind = if nonlinear { "nonlinear" } else { "linear" };
        summary.push(vec![
            mesh.intervals.to_string(),
            mesh.steps.to_string(),
            kind.to_string(),
            history.iterations_used.to_string(),
            format_float(history.final_residual()),
            format_float(history.final_error()),
            history.converged.to_string(),
        ]);
        manifest.push(
            "results",
            &format!("iterations_J{}_{kind}", mesh.intervals),
            history.iterations_used.to_string(),
        );
        write_iteration_history(
            &out.join(format!("history-J{}-{kind}.csv", mesh.intervals)),
            &history,
        )?;
    }
    write_csv(
        &out.join("summary.csv"),
        "intervals,steps,transmission,iterations,final_residual,final_error,converged",
        &summary,
    )?;
    manifest.write(&out.join("manifest.txt"))?;
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// Delta sweep
// ---------------------------------------------------------------------------

/// For each delta run exactly three iterations of the relaxation with
/// `g(+-) = (+-) delta u^3` and report the global error after the third;
/// blow-ups yield `None`.
pub fn delta_sweep(
    f: &NonlinearitySpec,
    mesh: &MeshSpec,
    deltas: &[f64],
) -> Result<Vec<(f64, Option<f64>)>> {
    let runs: Vec<Result<(f64, Option<f64>)>> = deltas
        .par_iter()
        .map(|&delta| {
            let swr = swr_setup(
                *mesh,
                f.clone(),
                TransmissionSpec::delta_cubic(delta),
                1e-300, // never stop on the residual; exactly 3 iterations
                3,
                ResidualMetric::OperatorPerturbation,
            )?;
            let history = run_swr(&swr)?;
            if history.failure.is_some() || history.records.len() < 3 {
                Ok((delta, None))
            } else {
                Ok((delta, Some(history.records[2].global_error)))
            }
        })
        .collect();
    let mut rows: Vec<(f64, Option<f64>)> = runs.into_iter().collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows)
}

pub fn delta_sweep_experiment(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let mesh = study_mesh(
        cfg.integer("mesh", "intervals", 400)?,
        cfg.integer("mesh", "steps", 240)?,
    )?;
    let f = NonlinearitySpec::from_tag(&cfg.string("problem", "nonlinearity", "u2ux"))?;
    let deltas = cfg
        .number_list("sweep", "deltas")?
        .unwrap_or_else(|| DELTA_GRID.to_vec());
    let rows = delta_sweep(&f, &mesh, &deltas)?;
    let mut outcome = ExperimentOutcome::default();
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(d, e)| {
            vec![
                format_float(*d),
                e.map(format_float).unwrap_or_default(),
            ]
        })
        .collect();
    outcome.blow_ups = rows.iter().filter(|(_, e)| e.is_none()).count();
    write_csv(&out.join("delta-sweep.csv"), "delta,error_after_3", &csv_rows)?;
    let mut manifest = Manifest::new("delta-sweep");
    manifest.push_config_echo(&cfg.echo());
    if let Some((best, err)) = rows
        .iter()
        .filter_map(|(d, e)| e.map(|v| (*d, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        manifest.push("results", "argmin_delta", format_float(best));
        manifest.push("results", "min_error_after_3", format_float(err));
    }
    manifest.write(&out.join("manifest.txt"))?;
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// Order study
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct OrderStudy {
    /// (intervals, steps) per level, coarse to fine; the last is the reference.
    pub levels: Vec<(usize, usize)>,
    /// Max-over-time L2 errors of each coarse level against the reference.
    pub errors: Vec<f64>,
    /// log2(E_coarse / E_fine) per adjacent pair of coarse levels.
    pub orders: Vec<f64>,
}

/// Single-domain self-convergence study on a refinement chain (each level
/// halves dx and dt; the finest level is the reference).
pub fn order_study(f: &NonlinearitySpec, levels: &[(usize, usize)]) -> Result<OrderStudy> {
    if levels.len() < 3 {
        return Err(Error::Config("order study needs at least three levels".into()));
    }
    for pair in levels.windows(2) {
        if pair[1].0 != 2 * pair[0].0 || pair[1].1 != 2 * pair[0].1 {
            return Err(Error::Config(format!(
                "levels must halve dx and dt: {:?} -> {:?}",
                pair[0], pair[1]
            )));
        }
    }
    let fields: Vec<Result<_>> = levels
        .par_iter()
        .map(|&(j, n)| {
            let mesh = study_mesh(j, n)?;
            let init = pulse_data(&mesh);
            let g0 = crate::model::BoundaryNonlinearity::Zero;
            Ok((mesh, solve_monodomain(&mesh, f, &g0, &g0, &init)?))
        })
        .collect();
    let fields: Vec<_> = fields.into_iter().collect::<Result<_>>()?;
    let (fine_mesh, fine) = fields.last().unwrap();
    let mut errors = Vec::new();
    for (mesh, field) in &fields[..fields.len() - 1] {
        let rj = fine_mesh.intervals / mesh.intervals;
        let rn = fine_mesh.steps / mesh.steps;
        let mut worst = 0.0f64;
        for n in 0..=mesh.steps {
            let mut sum = 0.0;
            for j in 0..=mesh.intervals {
                let d = field.at(j, n) - fine.at(j * rj, n * rn);
                sum += mesh.dx * d * d;
            }
            worst = worst.max(sum.sqrt());
        }
        errors.push(worst);
    }
    let orders = errors
        .windows(2)
        .map(|pair| (pair[0] / pair[1]).log2())
        .collect();
    Ok(OrderStudy {
        levels: levels.to_vec(),
        errors,
        orders,
    })
}

pub fn order_study_experiment(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let f = NonlinearitySpec::from_tag(&cfg.string("problem", "nonlinearity", "u3"))?;
    let levels: Vec<(usize, usize)> = match cfg.number_list("study", "intervals")? {
        Some(js) => {
            let ns = cfg.number_list("study", "steps")?.ok_or_else(|| {
                Error::Config("order study config needs both intervals and steps lists".into())
            })?;
            if ns.len() != js.len() {
                return Err(Error::Config("intervals and steps lists differ in length".into()));
            }
            js.iter()
                .zip(ns.iter())
                .map(|(&j, &n)| (j as usize, n as usize))
                .collect()
        }
        None => vec![(200, 120), (400, 240), (800, 480), (1600, 960)],
    };
    let study = order_study(&f, &levels)?;
    let err_rows: Vec<Vec<String>> = study
        .levels
        .iter()
        .zip(study.errors.iter())
        .map(|(&(j, n), e)| {
            vec![
                format_float(4.0 / j as f64),
                format_float(2.0 / n as f64),
                format_float(*e),
            ]
        })
        .collect();
    write_csv(&out.join("errors.csv"), "dx,dt,error", &err_rows)?;
    let order_rows: Vec<Vec<String>> = study
        .orders
        .iter()
        .enumerate()
        .map(|(i, o)| vec![i.to_string(), format_float(*o)])
        .collect();
    write_csv(&out.join("orders.csv"), "pair,order", &order_rows)?;
    let mut manifest = Manifest::new("order-study");
    manifest.push_config_echo(&cfg.echo());
    for (i, o) in study.orders.iter().enumerate() {
        manifest.push("results", &format!("order_{i}"), format_float(*o));
    }
    manifest.write(&out.join("manifest.txt"))?;
    Ok(ExperimentOutcome::default())
}

// ---------------------------------------------------------------------------
// Energy check
// ---------------------------------------------------------------------------

/// SplitMix64; deterministic across platforms, good enough for test data.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

pub fn energy_check(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let mut manifest = Manifest::new("energy-check");
    manifest.push_config_echo(&cfg.echo());

    // 1. identity battery: randomized auxiliary solves on a 20 x 25 grid
    let mesh = MeshSpec::new(0.0, 1.0, 20, 25, 0.5)?;
    let mut rng = SplitMix64(cfg.integer("battery", "seed", 7)? as u64);
    let cases = cfg.integer("battery", "cases", 50)?;
    let mut battery_rows = Vec::new();
    let mut battery_worst_rel: f64 = 0.0;
    for case in 0..cases {
        let init = InitialData {
            position: (0..=mesh.intervals).map(|_| rng.uniform()).collect(),
            velocity: (0..=mesh.intervals).map(|_| rng.uniform()).collect(),
        };
        let draws: Vec<Vec<f64>> = (0..=mesh.steps)
            .map(|_| (0..=mesh.intervals).map(|_| rng.uniform()).collect())
            .collect();
        let source = SourceTerm::from_fn(&mesh, |j, n| draws[n][j]);
        let hm: Vec<f64> = (0..=mesh.steps).map(|_| rng.uniform()).collect();
        let hp: Vec<f64> = (0..=mesh.steps).map(|_| rng.uniform()).collect();
        let field = solve_linear_auxiliary(&mesh, &init, &source, &hm, &hp)?;
        let scale = 1.0
            + (0..mesh.steps)
                .map(|n| discrete_energy(&field, n).total.abs())
                .fold(0.0f64, f64::max);
        let worst = (0..=mesh.steps)
            .map(|n| energy_identity_residual(&field, &source, &init, n))
            .fold(0.0f64, f64::max);
        battery_worst_rel = battery_worst_rel.max(worst / scale);
        battery_rows.push(vec![
            case.to_string(),
            format_float(worst),
            format_float(scale),
        ]);
    }
    write_csv(&out.join("identity.csv"), "case,max_residual,scale", &battery_rows)?;
    manifest.push("results", "identity_worst_rel_residual", format_float(battery_worst_rel));
    if battery_worst_rel > 1e-12 {
        manifest.write(&out.join("manifest.txt"))?;
        return Err(Error::Config(format!(
            "energy identity residual {battery_worst_rel:.3e} exceeds 1e-12 of the energy scale"
        )));
    }

    // 2. lower-bound sampling on the CFL mesh of the experiments
    let (dx, dt) = (1.0 / 100.0, 1.0 / 120.0);
    let bound = 1.0 - dt * dt / (dx * dx) - dt * dt / 4.0;
    let draws = cfg.integer("battery", "bound_draws", 1000)?;
    let mut violations = 0usize;
    for _ in 0..draws {
        let lower: Vec<f64> = (0..21).map(|_| rng.uniform()).collect();
        let upper: Vec<f64> = (0..21).map(|_| rng.uniform()).collect();
        let snap = staggered_energy_levels(&lower, &upper, dx, dt);
        if snap.total < bound * snap.kinetic - 1e-12 * (1.0 + snap.kinetic) {
            violations += 1;
        }
    }
    manifest.push("results", "lower_bound_violations", violations.to_string());
    manifest.push("results", "lower_bound_draws", draws.to_string());

    // 3. energy trace of the reference run
    let run_mesh = study_mesh(400, 240)?;
    let init = pulse_data(&run_mesh);
    let g0 = crate::model::BoundaryNonlinearity::Zero;
    let reference = solve_monodomain(&run_mesh, &NonlinearitySpec::cubic_u(), &g0, &g0, &init)?;
    let rows: Vec<(usize, f64, crate::energy::EnergySnapshot)> = (0..run_mesh.steps)
        .map(|n| (n, run_mesh.time(n), discrete_energy(&reference, n)))
        .collect();
    write_energy_trace(&out.join("energy.csv"), &rows)?;

    // 4. interface remainder records over a short relaxation run
    let records = remainder_probe(&run_mesh, &reference, &init)?;
    write_remainders(&out.join("remainders.csv"), &records)?;
    let empirical_m = records
        .iter()
        .map(|r| r.ratio)
        .filter(|r| r.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    manifest.push("constants", "empirical_M", format_float(empirical_m));

    manifest.write(&out.join("manifest.txt"))?;
    if violations > 0 {
        return Err(Error::Config(format!(
            "energy lower bound violated {violations} times"
        )));
    }
    Ok(ExperimentOutcome::default())
}

/// Drive three relaxation iterations by hand and collect remainder records
/// against the restricted reference on both subdomains.
fn remainder_probe(
    mesh: &MeshSpec,
    reference: &crate::solver::SpaceTimeField,
    init: &InitialData,
) -> Result<Vec<RemainderRecord>> {
    let f = NonlinearitySpec::cubic_u();
    let g0 = crate::model::BoundaryNonlinearity::Zero;
    let steps = mesh.steps;
    let split = mesh.intervals / 2;
    let left_mesh = mesh.submesh(0, split);
    let right_mesh = mesh.submesh(split, mesh.intervals);
    let left_init = init.restrict(0, split);
    let right_init = init.restrict(split, mesh.intervals);

    // restrictions of the reference
    let mut ref_left = crate::solver::SpaceTimeField::zeros(&left_mesh);
    let mut ref_right = crate::solver::SpaceTimeField::zeros(&right_mesh);
    for n in 0..=steps + 1 {
        for j in 0..=split {
            ref_left.set_raw(j, n, reference.at(j, n));
        }
        for j in split..=mesh.intervals {
            ref_right.set_raw(j - split, n, reference.at(j, n));
        }
    }

    let mut to_left = vec![0.0; steps + 1];
    let mut to_right = vec![0.0; steps + 1];
    let mut records = Vec::new();
    for k in 1..=3usize {
        let left_prob = SubdomainProblem {
            mesh: left_mesh,
            f: f.clone(),
            init: left_init.clone(),
            left: EdgeCondition::absorbing(steps, TraceRole::IncomingMinus),
            right: EdgeCondition::Transmission {
                incoming: TraceSeries { values: to_left.clone(), role: TraceRole::IncomingPlus },
                g: g0.clone(),
            },
        };
        let right_prob = SubdomainProblem {
            mesh: right_mesh,
            f: f.clone(),
            init: right_init.clone(),
            left: EdgeCondition::Transmission {
                incoming: TraceSeries { values: to_right.clone(), role: TraceRole::IncomingMinus },
                g: g0.clone(),
            },
            right: EdgeCondition::absorbing(steps, TraceRole::IncomingPlus),
        };
        let u1 = solve_subdomain(&left_prob)?;
        let u2 = solve_subdomain(&right_prob)?;
        for n in (8..steps).step_by(8) {
            records.push(swr_remainder(&u1, &ref_left, &f, &g0, &g0, &left_init, 0, k, n));
            records.push(swr_remainder(&u2, &ref_right, &f, &g0, &g0, &right_init, 1, k, n));
        }
        to_left = extract_trace(Side::Left, &u2, &f, &g0, &right_init).values;
        to_right = extract_trace(Side::Right, &u1, &f, &g0, &left_init).values;
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Custom runs for the solve/swr/classical subcommands
// ---------------------------------------------------------------------------

fn custom_mesh(cfg: &ConfigFile) -> Result<MeshSpec> {
    MeshSpec::new(
        cfg.number("domain", "a_minus", 0.0)?,
        cfg.number("domain", "a_plus", 4.0)?,
        cfg.integer("mesh", "intervals", 400)?,
        cfg.integer("mesh", "steps", 240)?,
        cfg.number("domain", "t_final", 2.0)?,
    )
}

fn custom_pieces(cfg: &ConfigFile) -> Result<(MeshSpec, NonlinearitySpec, TransmissionSpec, InitialData)> {
    let mesh = custom_mesh(cfg)?;
    let f = NonlinearitySpec::from_tag(&cfg.string("problem", "nonlinearity", "u3"))?;
    let transmission =
        TransmissionSpec::from_tag(&cfg.string("problem", "transmission", "linear"), &f)?;
    let init = initial_data_from_tag(&cfg.string("problem", "initial_data", "pulse"), &mesh)?;
    Ok((mesh, f, transmission, init))
}

/// Single-domain solve with the configured absorbing conditions (linear by
/// default); dumps the field as CSV.
pub fn run_custom_solve(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let (mesh, f, transmission, init) = custom_pieces(cfg)?;
    let field = solve_monodomain(&mesh, &f, &transmission.g_minus, &transmission.g_plus, &init)?;
    write_field(&out.join("field.csv"), &field)?;
    let mut manifest = Manifest::new("solve");
    manifest.push_config_echo(&cfg.echo());
    manifest.push("results", "max_abs", format_float(field.max_abs()));
    manifest.write(&out.join("manifest.txt"))?;
    Ok(ExperimentOutcome::default())
}

fn custom_iteration(cfg: &ConfigFile, algorithm: Algorithm) -> Result<SwrConfig> {
    let (mesh, f, transmission, init) = custom_pieces(cfg)?;
    let layout = match algorithm {
        Algorithm::NonoverlappingSwr => {
            let interfaces = cfg
                .number_list("decomposition", "interfaces")?
                .unwrap_or_else(|| vec![0.5 * (mesh.a_minus + mesh.a_plus)]);
            SubdomainLayout::nonoverlapping(&mesh, &interfaces)?
        }
        Algorithm::ClassicalOverlapping => {
            let split = cfg.number(
                "decomposition",
                "split",
                0.5 * (mesh.a_minus + mesh.a_plus),
            )?;
            let cells = cfg.integer("decomposition", "overlap_cells", 8)?;
            SubdomainLayout::overlapping(&mesh, split, cells as f64 * mesh.dx)?
        }
    };
    Ok(SwrConfig {
        algorithm,
        layout,
        mesh,
        f,
        transmission,
        init,
        initial_guess: InitialGuess::ZeroTraces,
        tol: cfg.number("iteration", "tol", SwrConfig::DEFAULT_TOL)?,
        max_iters: cfg.integer("iteration", "max_iters", SwrConfig::DEFAULT_MAX_ITERS)?,
        metric: metric_from_tag(&cfg.string("iteration", "metric", "perturbation"))?,
    })
}

fn write_run_outputs(
    name: &str,
    cfg: &ConfigFile,
    history: &IterationHistory,
    out: &Path,
) -> Result<()> {
    write_iteration_history(&out.join("history.csv"), history)?;
    let mut manifest = Manifest::new(name);
    manifest.push_config_echo(&cfg.echo());
    manifest.push("results", "iterations", history.iterations_used.to_string());
    manifest.push("results", "converged", history.converged.to_string());
    manifest.push("results", "final_residual", format_float(history.final_residual()));
    manifest.push("results", "final_error", format_float(history.final_error()));
    if let Some(b) = &history.failure {
        manifest.push(
            "results",
            "blow_up",
            format!("iteration {} subdomain {} j {} n {}", b.iteration, b.subdomain, b.j, b.n),
        );
    }
    manifest.write(&out.join("manifest.txt"))
}

pub fn run_custom_swr(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let swr = custom_iteration(cfg, Algorithm::NonoverlappingSwr)?;
    let history = run_swr(&swr)?;
    write_run_outputs("swr", cfg, &history, out)?;
    let mut outcome = ExperimentOutcome::default();
    outcome.absorb(&history);
    Ok(outcome)
}

pub fn run_custom_classical(cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    let swr = custom_iteration(cfg, Algorithm::ClassicalOverlapping)?;
    let history = run_classical(&swr)?;
    write_run_outputs("classical", cfg, &history, out)?;
    let mut outcome = ExperimentOutcome::default();
    outcome.absorb(&history);
    Ok(outcome)
}

/// Dispatch a named experiment.
pub fn run_experiment(name: &str, cfg: &ConfigFile, out: &Path) -> Result<ExperimentOutcome> {
    match name {
        "table1-left" => table1_left(cfg, out),
        "table1-right" => table1_right(cfg, out),
        "fig-u3" => fig_u3(cfg, out),
        "fig-u2ux" => fig_u2ux(cfg, out),
        "delta-sweep" => delta_sweep_experiment(cfg, out),
        "order-study" => order_study_experiment(cfg, out),
        "energy-check" => energy_check(cfg, out),
        other => Err(Error::Config(format!("unknown experiment `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_study_rejects_non_nested_levels() {
        let f = NonlinearitySpec::zero();
        assert!(order_study(&f, &[(100, 60), (150, 90), (300, 180)]).is_err());
        assert!(order_study(&f, &[(100, 60), (200, 120)]).is_err());
    }

    #[test]
    fn order_study_zero_solution_exact_at_all_levels() {
        // constant data would not stay constant under the absorbing closure,
        // but the zero solution is exact on every level
        let f = NonlinearitySpec::zero();
        let levels = [(50, 30), (100, 60), (200, 120)];
        let fields: Vec<_> = levels
            .iter()
            .map(|&(j, n)| {
                let mesh = study_mesh(j, n).unwrap();
                let init = sample_initial_data(|_| 0.0, |_| 0.0, &mesh);
                let g0 = crate::model::BoundaryNonlinearity::Zero;
                solve_monodomain(&mesh, &f, &g0, &g0, &init).unwrap()
            })
            .collect();
        for field in fields {
            assert_eq!(field.max_abs(), 0.0);
        }
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64(99);
        let mut b = SplitMix64(99);
        for _ in 0..100 {
            let (x, y) = (a.uniform(), b.uniform());
            assert_eq!(x, y);
            assert!((-1.0..1.0).contains(&x));
        }
    }

    #[test]
    fn delta_zero_matches_linear_transmission() {
        let mesh = study_mesh(200, 120).unwrap();
        let f = NonlinearitySpec::square_ux();
        let rows = delta_sweep(&f, &mesh, &[0.0]).unwrap();
        let lin = swr_setup(
            mesh,
            f,
            TransmissionSpec::linear(),
            1e-300,
            3,
            ResidualMetric::OperatorPerturbation,
        )
        .unwrap();
        let hist = run_swr(&lin).unwrap();
        assert_eq!(rows[0].1.unwrap(), hist.records[2].global_error);
    }

    #[test]
    fn duplicate_delta_entries_identical() {
        let mesh = study_mesh(200, 120).unwrap();
        let f = NonlinearitySpec::square_ux();
        let rows = delta_sweep(&f, &mesh, &[1.0 / 6.0, 1.0 / 6.0]).unwrap();
        assert_eq!(rows[0].1.unwrap(), rows[1].1.unwrap());
    }
}
