use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rbi_core::geometry::{
    barycentric_xy, boundary_points, collinearity_residual, entropy_gap, find_tilde_tau,
    tau_double_prime, BoundarySpec,
};
use rbi_core::inference::{ObservationModel, QueryBatch};
use rbi_core::simulation::{
    momentum_ordering_grid, prop1_harness, run_experiment, run_rng, run_trial_with, sweep,
    with_threads, CellStatus, MomentumOrderingCheck, Prop1Config, Prop1Report, Responder,
    ScenarioConfig, SimulatedResponder, SweepTarget, TrialTrace,
};
use rbi_core::{AlphaOrder, RbiError};
use serde::Serialize;

use crate::args::{GeometryCommand, Prop1Args, RunArgs, SweepArgs, SweepWhich, TauCurve, TrajectoryArgs};
use crate::config::{load, RunManifest, SweepSpec, MANIFEST_FILE};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt_f64, print_csv, write_csv, write_json};

pub const RUNS_HEADER: [&str; 6] = ["run_id", "decided_state", "true_target", "correct", "num_sequences", "stopped_by"];
pub const SWEEP_HEADER: [&str; 5] = ["alpha", "lambda", "accuracy", "mean_sequences", "speed"];
pub const PROP1_HEADER: [&str; 7] = ["alpha", "lambda", "valid_draws", "lhs", "rhs", "difference", "status"];

fn load_scenario(args: &RunArgs) -> CliResult<(ScenarioConfig, Option<SweepSpec>)> {
    let (mut config, sweep) = match &args.config {
        Some(path) => {
            let loaded = load::<ScenarioConfig>(path)?;
            (loaded.config, loaded.sweep)
        }
        None => (ScenarioConfig::default(), None),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.num_runs = runs;
    }
    config.validate()?;
    Ok((config, sweep))
}

fn threaded<T: Send>(threads: usize, f: impl FnOnce() -> Result<T, RbiError> + Send) -> CliResult<T> {
    with_threads(threads, f).map_err(|e| CliError::Runtime(e.to_string()))?.map_err(CliError::from)
}

fn write_manifest<C: Serialize>(out: &Path, manifest: &RunManifest<C>) -> CliResult<()> {
    ensure_dir(out)?;
    write_json(&out.join(MANIFEST_FILE), manifest)
}

#[derive(Debug, Serialize)]
struct SummaryOut {
    num_runs: usize,
    num_correct: usize,
    accuracy: f64,
    mean_sequences: f64,
    speed: f64,
    mean_queries: f64,
}

#[derive(Debug, Serialize)]
struct TrajectoryOut<'a> {
    run_id: usize,
    trajectory: Vec<&'a [f64]>,
}

pub fn simulate(args: &RunArgs) -> CliResult<()> {
    let (config, _) = load_scenario(args)?;
    let mut outputs = vec!["runs.csv", "summary.json"];
    if config.record_trajectories {
        outputs.push("trajectories.json");
    }
    write_manifest(&args.out, &RunManifest::new("simulate", config.seed, &config, &outputs))?;

    let summary = threaded(args.threads, || run_experiment(&config))?;
    let rows: Vec<Vec<String>> = summary
        .runs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.decided_state.to_string(),
                config.true_target.to_string(),
                r.correct.to_string(),
                r.num_sequences.to_string(),
                r.stopped_by.as_str().to_string(),
            ]
        })
        .collect();
    write_csv(&args.out.join("runs.csv"), &RUNS_HEADER, &rows)?;
    write_json(
        &args.out.join("summary.json"),
        &SummaryOut {
            num_runs: summary.num_runs,
            num_correct: summary.num_correct,
            accuracy: summary.accuracy,
            mean_sequences: summary.mean_sequences,
            speed: summary.speed,
            mean_queries: summary.mean_queries,
        },
    )?;
    if config.record_trajectories {
        let trajectories: Vec<TrajectoryOut> = summary
            .runs
            .iter()
            .enumerate()
            .map(|(run_id, r)| TrajectoryOut {
                run_id,
                trajectory: r.trajectory.iter().flatten().map(|p| p.values()).collect(),
            })
            .collect();
        write_json(&args.out.join("trajectories.json"), &trajectories)?;
    }
    println!(
        "accuracy {} mean_sequences {} speed {}",
        fmt_f64(summary.accuracy),
        fmt_f64(summary.mean_sequences),
        fmt_f64(summary.speed)
    );
    Ok(())
}

/// Parses a comma-separated list, rejecting empty lists.
pub fn parse_list<T: std::str::FromStr>(field: &str, text: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| CliError::Config(format!("field `{field}`: {s:?}: {e}"))))
        .collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(CliError::Config(format!("field `{field}`: grid must not be empty")));
    }
    Ok(items)
}

pub fn sweep_cmd(args: &SweepArgs) -> CliResult<()> {
    let (config, from_manifest) = load_scenario(&args.run)?;
    let target = match (args.which, &from_manifest) {
        (Some(SweepWhich::QueryParams), _) => SweepTarget::QueryParams,
        (Some(SweepWhich::StoppingParams), _) => SweepTarget::StoppingParams,
        (None, Some(spec)) => spec.target,
        (None, None) => SweepTarget::QueryParams,
    };
    let alphas = match (&args.alphas, &from_manifest) {
        (Some(text), _) => parse_list::<AlphaOrder>("alphas", text)?,
        (None, Some(spec)) => spec.alphas.clone(),
        (None, None) => return Err(CliError::Config("field `alphas`: required".into())),
    };
    let lambdas = match (&args.lambdas, &from_manifest) {
        (Some(text), _) => parse_list::<f64>("lambdas", text)?,
        (None, Some(spec)) => spec.lambdas.clone(),
        (None, None) => return Err(CliError::Config("field `lambdas`: required".into())),
    };
    if alphas.is_empty() || lambdas.is_empty() {
        return Err(CliError::Config("field `alphas`/`lambdas`: grid must not be empty".into()));
    }
    for cell in alphas.iter().flat_map(|&a| lambdas.iter().map(move |&l| (a, l))) {
        rbi_core::simulation::sweep_scenario(&config, cell.0, cell.1, target).validate()?;
    }

    let mut manifest = RunManifest::new("sweep", config.seed, &config, &["sweep.csv"]);
    manifest.sweep = Some(SweepSpec { target, alphas: alphas.clone(), lambdas: lambdas.clone() });
    write_manifest(&args.run.out, &manifest)?;

    let table = threaded(args.run.threads, || sweep(&config, &alphas, &lambdas, target))?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|c| {
            vec![
                c.alpha.to_string(),
                fmt_f64(c.lambda),
                fmt_f64(c.summary.accuracy),
                fmt_f64(c.summary.mean_sequences),
                fmt_f64(c.summary.speed),
            ]
        })
        .collect();
    write_csv(&args.run.out.join("sweep.csv"), &SWEEP_HEADER, &rows)?;
    println!("{} cells written", rows.len());
    Ok(())
}

/// `from, from + step, …, to`, each rounded to 12 decimals.
pub fn tau_grid(curve: &TauCurve) -> CliResult<Vec<f64>> {
    if !(curve.step > 0.0 && curve.step.is_finite()) {
        return Err(CliError::Config("field `step`: must be > 0".into()));
    }
    if !(curve.from.is_finite() && curve.to.is_finite() && curve.from <= curve.to) {
        return Err(CliError::Config("fields `from`/`to`: need from <= to".into()));
    }
    let count = ((curve.to - curve.from) / curve.step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| ((curve.from + i as f64 * curve.step) * 1e12).round() / 1e12)
        .collect())
}

pub fn geometry(cmd: &GeometryCommand) -> CliResult<()> {
    match cmd {
        GeometryCommand::TauDoublePrime { tau, n } => {
            let b = BoundarySpec::new(*tau, *n, AlphaOrder::SHANNON)?;
            let value = tau_double_prime(&b)?;
            print_csv(&["tau", "n", "tau_double_prime"], &[vec![fmt_f64(*tau), n.to_string(), fmt_f64(value)]])
        }
        GeometryCommand::GapCurve(curve) => {
            let rows = tau_grid(curve)?
                .into_iter()
                .map(|tau| {
                    let gap = entropy_gap(&BoundarySpec::new(tau, curve.n, curve.alpha)?)?;
                    Ok(vec![fmt_f64(tau), fmt_f64(gap)])
                })
                .collect::<CliResult<Vec<_>>>()?;
            print_csv(&["tau", "entropy_gap"], &rows)
        }
        GeometryCommand::TildeTau(curve) => {
            let rows = tau_grid(curve)?
                .into_iter()
                .map(|tau| {
                    let t = find_tilde_tau(&BoundarySpec::new(tau, curve.n, curve.alpha)?)?;
                    Ok(vec![fmt_f64(tau), t.map(fmt_f64).unwrap_or_default()])
                })
                .collect::<CliResult<Vec<_>>>()?;
            print_csv(&["tau", "tilde_tau"], &rows)
        }
        GeometryCommand::BoundaryPoints { tau, n } => {
            let (v, w) = boundary_points(&BoundarySpec::new(*tau, *n, AlphaOrder::SHANNON)?)?;
            let mut rows = Vec::new();
            for (name, p) in [("v", &v), ("w", &w)] {
                for (state, x) in p.values().iter().enumerate() {
                    rows.push(vec![name.to_string(), state.to_string(), fmt_f64(*x)]);
                }
            }
            print_csv(&["point", "state", "probability"], &rows)
        }
    }
}

/// Reads y/n answers: `y` stands for evidence at the target-density mean, `n` for the
/// non-target mean.
pub struct StdinResponder<I, O> {
    pub input: I,
    pub prompt: O,
}

impl<I: BufRead, O: Write, R: Rng + ?Sized> Responder<R> for StdinResponder<I, O> {
    fn respond(&mut self, batch: &QueryBatch, model: &ObservationModel, _rng: &mut R) -> Result<Vec<f64>, RbiError> {
        let eof = || RbiError::InvalidConfig { field: "interactive".into(), reason: "input ended".into() };
        let mut evidence = Vec::with_capacity(batch.len());
        for &phi in batch.queries() {
            loop {
                let _ = write!(self.prompt, "state {phi}: is this your target? [y/n] ");
                let _ = self.prompt.flush();
                let mut line = String::new();
                if self.input.read_line(&mut line).map_err(|_| eof())? == 0 {
                    return Err(eof());
                }
                match line.trim().to_ascii_lowercase().as_str() {
                    "y" | "yes" => {
                        evidence.push(model.evidence.target.mean);
                        break;
                    }
                    "n" | "no" => {
                        evidence.push(model.evidence.nontarget.mean);
                        break;
                    }
                    _ => continue,
                }
            }
        }
        Ok(evidence)
    }
}

#[derive(Debug, Serialize)]
pub struct SequenceOut {
    pub sequence: usize,
    pub batch: Vec<usize>,
    pub evidence: Vec<f64>,
    pub posterior: Vec<f64>,
    pub stopping_value: f64,
    /// Collinearity residual for single-query sequences, `null` otherwise.
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xy: Option<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct RunOut {
    pub run_id: usize,
    pub true_target: usize,
    pub decided_state: usize,
    pub correct: bool,
    pub num_sequences: usize,
    pub stopped_by: &'static str,
    pub prior: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_xy: Option<[f64; 2]>,
    pub sequences: Vec<SequenceOut>,
}

pub fn export_run(run_id: usize, config: &ScenarioConfig, trace: &TrialTrace) -> CliResult<RunOut> {
    let xy = |p| barycentric_xy(p).map(|(x, y)| [x, y]);
    let history = &trace.history;
    let sequences = history
        .records()
        .iter()
        .enumerate()
        .map(|(i, record)| {
            let residual = match record.batch.queries() {
                [phi] => Some(collinearity_residual(history.posterior_at(i), &record.posterior_after, *phi)?),
                _ => None,
            };
            Ok(SequenceOut {
                sequence: i + 1,
                batch: record.batch.queries().to_vec(),
                evidence: record.evidence.clone(),
                posterior: record.posterior_after.values().to_vec(),
                stopping_value: trace.stopping_values[i],
                residual,
                xy: xy(&record.posterior_after),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(RunOut {
        run_id,
        true_target: config.true_target,
        decided_state: trace.result.decided_state,
        correct: trace.result.correct,
        num_sequences: trace.result.num_sequences,
        stopped_by: trace.result.stopped_by.as_str(),
        prior: history.prior().values().to_vec(),
        prior_xy: xy(history.prior()),
        sequences,
    })
}

pub fn trajectory(args: &TrajectoryArgs) -> CliResult<()> {
    let (mut config, _) = load_scenario(&args.run)?;
    if args.run.runs.is_none() {
        config.num_runs = 1;
    }
    if args.interactive {
        config.num_runs = 1;
    }
    write_manifest(&args.run.out, &RunManifest::new("trajectory", config.seed, &config, &["trajectory.json"]))?;
    let runs = if args.interactive {
        let mut responder = StdinResponder { input: std::io::stdin().lock(), prompt: std::io::stderr() };
        let trace = run_trial_with(&config, &mut responder, &mut run_rng(config.seed, 0))?;
        vec![export_run(0, &config, &trace)?]
    } else {
        let traces = collect_traces(&config)?;
        traces
            .iter()
            .enumerate()
            .map(|(i, t)| export_run(i, &config, t))
            .collect::<CliResult<Vec<_>>>()?
    };
    let decided: Vec<String> = runs.iter().map(|r| r.decided_state.to_string()).collect();
    write_json(&args.run.out.join("trajectory.json"), &runs)?;
    println!("decided states: {}", decided.join(","));
    Ok(())
}

fn collect_traces(config: &ScenarioConfig) -> Result<Vec<TrialTrace>, RbiError> {
    (0..config.num_runs)
        .map(|i| {
            let mut responder = SimulatedResponder { true_state: config.true_target };
            run_trial_with(config, &mut responder, &mut run_rng(config.seed, i as u64))
        })
        .collect()
}

/// Levels of `p(a)` for the deterministic Momentum-ordering grid.
pub fn ordering_levels() -> Vec<f64> {
    (1..=24).map(|i| i as f64 * 0.02).filter(|&x| x < 0.5).collect()
}

#[derive(Debug, Serialize)]
struct Prop1Out<'a> {
    report: &'a Prop1Report,
    ordering_grid: &'a MomentumOrderingCheck,
    ordering_levels: Vec<f64>,
    ordering_steps: usize,
}

pub fn prop1(args: &Prop1Args) -> CliResult<()> {
    let mut config = match &args.config {
        Some(path) => load::<Prop1Config>(path)?.config,
        None => Prop1Config::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(draws) = args.draws {
        config.num_draws = draws;
    }
    if let Some(text) = &args.alphas {
        config.alpha_grid = parse_list("alphas", text)?;
    }
    if let Some(text) = &args.lambdas {
        config.lambda_grid = parse_list("lambdas", text)?;
    }
    config.validate()?;
    write_manifest(&args.out, &RunManifest::new("prop1-harness", config.seed, &config, &["prop1.csv", "prop1.json"]))?;

    let levels = ordering_levels();
    let steps = 2;
    let (report, grid) = threaded(args.threads, || {
        let report = prop1_harness(&config)?;
        let grid = momentum_ordering_grid(&config.alpha_grid, &levels, steps, config.evidence, &config.quadrature)?;
        Ok((report, grid))
    })?;
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.alpha.to_string(),
                fmt_f64(c.lambda),
                c.valid_draws.to_string(),
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
                fmt_f64(c.difference),
                match c.status {
                    CellStatus::Pass => "pass",
                    CellStatus::Fail => "fail",
                    CellStatus::Skipped => "skipped",
                }
                .to_string(),
            ]
        })
        .collect();
    write_csv(&args.out.join("prop1.csv"), &PROP1_HEADER, &rows)?;
    write_json(
        &args.out.join("prop1.json"),
        &Prop1Out { report: &report, ordering_grid: &grid, ordering_levels: levels.clone(), ordering_steps: steps },
    )?;
    for row in &rows {
        println!("{}", row.join(","));
    }
    println!(
        "ordering grid: {} histories, antecedent held {}, violations {}",
        grid.histories, grid.antecedent_held, grid.violations
    );
    Ok(())
}
