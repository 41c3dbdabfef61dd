//! Command-line surface: dataset generation, training, single-goal solving,
//! evaluation, timing benchmarks, and SVG plots.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use amortize::data::{ArmDataset, BallisticDataset, FiberDataset, Path2D};
use amortize::losses::{RobotCostConfig, PATH_LAMBDA_DO_GRID};
use amortize::nn::Mlp;
use amortize::optim::BfgsConfig;
use amortize::pipeline::{
    arm_direct_optimize, arm_encoder_design, ballistic_direct_optimize, ballistic_encoder_design,
    evaluate_path_method, evaluate_robot_method, fiber_direct_optimize, fiber_encoder_design,
    gen_arm, gen_ballistic, gen_fiber, robot_eval_goals, time_inference, train_arm_decoder,
    train_arm_direct, train_arm_encoder, train_ballistic_decoder, train_ballistic_direct,
    train_ballistic_encoder, train_fiber_decoder, train_fiber_direct, train_fiber_encoder,
    EvalReport, ModelKind, Task, TrainConfig,
};
use amortize::plot::{plot_paths, plot_robot};
use amortize::sim::{ballistic_realize, BallisticConfig, FiberConfig};

/// Quadrature points for the parameterization-free path distance.
const N_QUAD: usize = 100;

#[derive(Parser)]
#[command(name = "amortize", version, about = "Amortized synthesis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Ballistic,
    Fiber,
    Arm,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Ballistic => Task::Ballistic,
            TaskArg::Fiber => Task::Fiber,
            TaskArg::Arm => Task::Arm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Decoder,
    Encoder,
    Direct,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum MethodArg {
    /// Trained encoder (amortized inference).
    Encoder,
    /// Direct-learning baseline model.
    DirectLearning,
    /// Per-goal BFGS on the frozen decoder surrogate.
    DirectOpt,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and write it as NDJSON.
    Gen(GenArgs),
    /// Train a model and write a JSON checkpoint plus a loss CSV.
    Train(TrainArgs),
    /// Produce a design for one test goal and write it as JSON.
    Solve(SolveArgs),
    /// Evaluate a method over the test split; write CSV and JSON reports.
    Eval(EvalArgs),
    /// Time encoder inference against direct optimization.
    Bench(BenchArgs),
    /// Render a dataset sample as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Points per sampled extruder path before resampling (fiber only).
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Elliptical-slice iterations per path (fiber only).
    #[arg(long, default_value_t = 100)]
    ess_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    data: PathBuf,
    /// Decoder checkpoint; required when training an encoder.
    #[arg(long)]
    decoder: Option<PathBuf>,
    /// Optional JSON file with training fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lr_decay: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated hidden sizes; `0` trains a linear model.
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    data: PathBuf,
    /// Index into the test split.
    #[arg(long, default_value_t = 0)]
    goal_index: usize,
    /// Trained design network (encoder / direct-learning methods).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Decoder checkpoint (direct-opt method).
    #[arg(long)]
    decoder: Option<PathBuf>,
    #[arg(long, default_value_t = PATH_LAMBDA_DO_GRID[1])]
    lambda_do: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    decoder: Option<PathBuf>,
    #[arg(long, default_value_t = PATH_LAMBDA_DO_GRID[1])]
    lambda_do: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Cap on evaluated test goals (0 = all).
    #[arg(long, default_value_t = 0)]
    max_goals: usize,
    #[arg(long)]
    out_csv: PathBuf,
    #[arg(long)]
    out_json: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    decoder: PathBuf,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 5)]
    max_goals: usize,
    #[arg(long, default_value_t = PATH_LAMBDA_DO_GRID[1])]
    lambda_do: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long)]
    out_json: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long)]
    data: PathBuf,
    /// Index into the full sample list.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Usage errors exit 2; runtime errors exit 1.
enum CliError {
    Usage(String),
    Runtime(amortize::Error),
}

impl From<amortize::Error> for CliError {
    fn from(e: amortize::Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_gen(a: GenArgs) -> CliResult {
    if a.count == 0 {
        return Err(usage("--count must be >= 1"));
    }
    let task: Task = a.task.into();
    match task {
        Task::Ballistic => gen_ballistic(a.count, a.seed)?.save_ndjson("ballistic", &a.out)?,
        Task::Fiber => {
            if a.points < 3 {
                return Err(usage("--points must be >= 3"));
            }
            gen_fiber(a.count, a.points, a.ess_iters, a.seed)?.save_ndjson("fiber", &a.out)?
        }
        Task::Arm => gen_arm(a.count, a.seed)?.save_ndjson("arm", &a.out)?,
    }
    println!("wrote {} samples (task {}, seed {}) to {}", a.count, task, a.seed, a.out.display());
    Ok(())
}

/// JSON config file for `train`; any present field acts as a default that
/// explicit flags override.
#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TrainFileConfig {
    epochs: Option<usize>,
    lr: Option<f64>,
    lr_decay: Option<f64>,
    batch_size: Option<usize>,
    lambda: Option<f64>,
    seed: Option<u64>,
    hidden: Option<Vec<usize>>,
}

fn parse_hidden(spec: &str) -> CliResult<Vec<usize>> {
    if spec.trim() == "0" {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| usage(format!("bad --hidden entry '{s}'")))
        })
        .collect()
}

fn loss_csv_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    name.push_str(".loss.csv");
    checkpoint.with_file_name(name)
}

fn cmd_train(a: TrainArgs) -> CliResult {
    let task: Task = a.task.into();
    let kind = match a.model {
        ModelArg::Decoder => ModelKind::Decoder,
        ModelArg::Encoder => ModelKind::Encoder,
        ModelArg::Direct => ModelKind::DirectLearning,
    };
    if kind == ModelKind::Encoder && a.decoder.is_none() {
        return Err(usage("--model encoder requires --decoder"));
    }

    let file: TrainFileConfig = match &a.config {
        Some(p) => {
            let f = std::fs::File::open(p).map_err(amortize::Error::from)?;
            serde_json::from_reader(f)
                .map_err(|e| usage(format!("bad --config {}: {e}", p.display())))?
        }
        None => TrainFileConfig::default(),
    };

    let mut cfg = TrainConfig::defaults(task, kind);
    if let Some(v) = file.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = file.lr {
        cfg.lr = v;
    }
    if let Some(v) = file.lr_decay {
        cfg.lr_decay = v;
    }
    if let Some(v) = file.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = file.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = file.seed {
        cfg.seed = v;
    }
    if let Some(v) = file.hidden {
        cfg.hidden = Some(v);
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.lr {
        cfg.lr = v;
    }
    if let Some(v) = a.lr_decay {
        cfg.lr_decay = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(spec) = &a.hidden {
        cfg.hidden = Some(parse_hidden(spec)?);
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let decoder = a
        .decoder
        .as_ref()
        .map(|p| Mlp::load(p))
        .transpose()?;

    let result = match task {
        Task::Ballistic => {
            let ds = BallisticDataset::load_ndjson(&a.data)?.1;
            match kind {
                ModelKind::Decoder => train_ballistic_decoder(&ds, &cfg)?,
                ModelKind::Encoder => train_ballistic_encoder(&ds, decoder.as_ref().unwrap(), &cfg)?,
                ModelKind::DirectLearning => train_ballistic_direct(&ds, &cfg)?,
            }
        }
        Task::Fiber => {
            let ds = FiberDataset::load_ndjson(&a.data)?.1;
            match kind {
                ModelKind::Decoder => train_fiber_decoder(&ds, &cfg)?,
                ModelKind::Encoder => train_fiber_encoder(&ds, decoder.as_ref().unwrap(), &cfg)?,
                ModelKind::DirectLearning => train_fiber_direct(&ds, &cfg)?,
            }
        }
        Task::Arm => {
            let ds = ArmDataset::load_ndjson(&a.data)?.1;
            match kind {
                ModelKind::Decoder => train_arm_decoder(&ds, &cfg)?,
                ModelKind::Encoder => train_arm_encoder(&ds, decoder.as_ref().unwrap(), &cfg)?,
                ModelKind::DirectLearning => train_arm_direct(&ds, &cfg)?,
            }
        }
    };

    result.model.save(&a.out)?;
    result.save_loss_csv(&loss_csv_path(&a.out))?;
    println!(
        "trained {} epochs; final train loss {:.6e}, val loss {:.6e}; checkpoint {}",
        cfg.epochs,
        result.train_loss.last().copied().unwrap_or(f64::NAN),
        result.val_loss.last().copied().unwrap_or(f64::NAN),
        a.out.display()
    );
    Ok(())
}

fn require_model(p: &Option<PathBuf>) -> CliResult<Mlp> {
    let p = p.as_ref().ok_or_else(|| usage("this method requires --model"))?;
    Ok(Mlp::load(p)?)
}

fn require_decoder(p: &Option<PathBuf>) -> CliResult<Mlp> {
    let p = p.as_ref().ok_or_else(|| usage("this method requires --decoder"))?;
    Ok(Mlp::load(p)?)
}

fn bfgs_with(max_iters: usize) -> BfgsConfig {
    BfgsConfig { max_iterations: max_iters, ..BfgsConfig::default() }
}

fn cmd_solve(a: SolveArgs) -> CliResult {
    let task: Task = a.task.into();
    let out = std::fs::File::create(&a.out).map_err(amortize::Error::from)?;
    match task {
        Task::Ballistic => {
            let ds = BallisticDataset::load_ndjson(&a.data)?.1;
            let &i = ds.split.test.get(a.goal_index).ok_or_else(|| usage("goal index out of range"))?;
            let goal = ds.samples[i].goal;
            let theta = match a.method {
                MethodArg::Encoder | MethodArg::DirectLearning => {
                    ballistic_encoder_design(&require_model(&a.model)?, goal)?
                }
                MethodArg::DirectOpt => {
                    ballistic_direct_optimize(goal, &require_decoder(&a.decoder)?, &bfgs_with(a.max_iters))?.0
                }
            };
            serde_json::to_writer_pretty(out, &theta).map_err(amortize::Error::from)?;
        }
        Task::Fiber => {
            let ds = FiberDataset::load_ndjson(&a.data)?.1;
            let &i = ds.split.test.get(a.goal_index).ok_or_else(|| usage("goal index out of range"))?;
            let goal = &ds.samples[i].goal;
            let theta = match a.method {
                MethodArg::Encoder | MethodArg::DirectLearning => {
                    fiber_encoder_design(&require_model(&a.model)?, goal)?
                }
                MethodArg::DirectOpt => {
                    let dec = require_decoder(&a.decoder)?;
                    fiber_direct_optimize(goal, &dec, a.lambda_do, N_QUAD, &bfgs_with(a.max_iters))?.0
                }
            };
            serde_json::to_writer_pretty(out, &theta).map_err(amortize::Error::from)?;
        }
        Task::Arm => {
            let ds = ArmDataset::load_ndjson(&a.data)?.1;
            let goals = robot_eval_goals(&ds)?;
            let goal = goals.get(a.goal_index).ok_or_else(|| usage("goal index out of range"))?;
            let design = match a.method {
                MethodArg::Encoder | MethodArg::DirectLearning => {
                    arm_encoder_design(&require_model(&a.model)?, goal)?
                }
                MethodArg::DirectOpt => {
                    let dec = require_decoder(&a.decoder)?;
                    arm_direct_optimize(goal, &dec, &RobotCostConfig::default(), &bfgs_with(a.max_iters))?.0
                }
            };
            serde_json::to_writer_pretty(out, &design).map_err(amortize::Error::from)?;
        }
    }
    println!("wrote design to {}", a.out.display());
    Ok(())
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Encoder => "encoder",
        MethodArg::DirectLearning => "direct-learning",
        MethodArg::DirectOpt => "direct-opt",
    }
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let task: Task = a.task.into();
    let cap = |n: usize| if a.max_goals == 0 { n } else { n.min(a.max_goals) };
    let run = match task {
        Task::Ballistic => {
            let ds = BallisticDataset::load_ndjson(&a.data)?.1;
            let cfg = BallisticConfig::default();
            let goals: Vec<f64> = ds
                .split
                .test
                .iter()
                .take(cap(ds.split.test.len()))
                .map(|&i| ds.samples[i].goal)
                .collect();
            let mut metrics = Vec::with_capacity(goals.len());
            match a.method {
                MethodArg::Encoder | MethodArg::DirectLearning => {
                    let model = require_model(&a.model)?;
                    for &g in &goals {
                        let theta = ballistic_encoder_design(&model, g)?;
                        metrics.push((ballistic_realize(theta, &cfg)? - g).abs());
                    }
                }
                MethodArg::DirectOpt => {
                    let dec = require_decoder(&a.decoder)?;
                    let bfgs = bfgs_with(a.max_iters);
                    for &g in &goals {
                        let theta = ballistic_direct_optimize(g, &dec, &bfgs)?.0;
                        metrics.push((ballistic_realize(theta, &cfg)? - g).abs());
                    }
                }
            }
            amortize::pipeline::RunEval { metrics, successes: Vec::new() }
        }
        Task::Fiber => {
            let ds = FiberDataset::load_ndjson(&a.data)?.1;
            let goals: Vec<&Path2D> = ds
                .split
                .test
                .iter()
                .take(cap(ds.split.test.len()))
                .map(|&i| &ds.samples[i].goal)
                .collect();
            let fib_cfg = FiberConfig::default();
            match a.method {
                MethodArg::Encoder | MethodArg::DirectLearning => {
                    let model = require_model(&a.model)?;
                    evaluate_path_method(&goals, &fib_cfg, |g| fiber_encoder_design(&model, g))?
                }
                MethodArg::DirectOpt => {
                    let dec = require_decoder(&a.decoder)?;
                    let bfgs = bfgs_with(a.max_iters);
                    evaluate_path_method(&goals, &fib_cfg, |g| {
                        Ok(fiber_direct_optimize(g, &dec, a.lambda_do, N_QUAD, &bfgs)?.0)
                    })?
                }
            }
        }
        Task::Arm => {
            let ds = ArmDataset::load_ndjson(&a.data)?.1;
            let goals = robot_eval_goals(&ds)?;
            let goals = &goals[..cap(goals.len())];
            match a.method {
                MethodArg::Encoder | MethodArg::DirectLearning => {
                    let model = require_model(&a.model)?;
                    evaluate_robot_method(goals, |g| arm_encoder_design(&model, g))?
                }
                MethodArg::DirectOpt => {
                    let dec = require_decoder(&a.decoder)?;
                    let bfgs = bfgs_with(a.max_iters);
                    let cost = RobotCostConfig::default();
                    evaluate_robot_method(goals, |g| {
                        Ok(arm_direct_optimize(g, &dec, &cost, &bfgs)?.0)
                    })?
                }
            }
        }
    };
    let report = EvalReport::from_runs(method_name(a.method), std::slice::from_ref(&run));
    report.write_csv(&a.out_csv)?;
    report.write_json(&a.out_json)?;
    println!(
        "evaluated {} goals; mean metric {:.6e}{}",
        run.metrics.len(),
        run.mean_metric(),
        if run.successes.is_empty() {
            String::new()
        } else {
            format!("; successes {}/{}", run.success_count(), run.successes.len())
        }
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct BenchReport {
    task: String,
    goals: usize,
    repetitions: usize,
    encoder_median_s: f64,
    direct_opt_median_s: f64,
    ratio: f64,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn cmd_bench(a: BenchArgs) -> CliResult {
    let task: Task = a.task.into();
    let model = Mlp::load(&a.model)?;
    let decoder = Mlp::load(&a.decoder)?;
    let bfgs = bfgs_with(a.max_iters);

    let (mut enc_times, mut do_times) = match task {
        Task::Ballistic => {
            let ds = BallisticDataset::load_ndjson(&a.data)?.1;
            let goals: Vec<f64> = ds
                .split
                .test
                .iter()
                .take(a.max_goals.max(1))
                .map(|&i| ds.samples[i].goal)
                .collect();
            let enc = time_inference(goals.len(), a.reps, |i| {
                ballistic_encoder_design(&model, goals[i]).map(|_| ())
            })?;
            let dopt = time_inference(goals.len(), a.reps, |i| {
                ballistic_direct_optimize(goals[i], &decoder, &bfgs).map(|_| ())
            })?;
            (enc, dopt)
        }
        Task::Fiber => {
            let ds = FiberDataset::load_ndjson(&a.data)?.1;
            let goals: Vec<&Path2D> = ds
                .split
                .test
                .iter()
                .take(a.max_goals.max(1))
                .map(|&i| &ds.samples[i].goal)
                .collect();
            let enc = time_inference(goals.len(), a.reps, |i| {
                fiber_encoder_design(&model, goals[i]).map(|_| ())
            })?;
            let dopt = time_inference(goals.len(), a.reps, |i| {
                fiber_direct_optimize(goals[i], &decoder, a.lambda_do, N_QUAD, &bfgs).map(|_| ())
            })?;
            (enc, dopt)
        }
        Task::Arm => {
            let ds = ArmDataset::load_ndjson(&a.data)?.1;
            let goals = robot_eval_goals(&ds)?;
            let goals = &goals[..goals.len().min(a.max_goals.max(1))];
            let cost = RobotCostConfig::default();
            let enc = time_inference(goals.len(), a.reps, |i| {
                arm_encoder_design(&model, &goals[i]).map(|_| ())
            })?;
            let dopt = time_inference(goals.len(), a.reps, |i| {
                arm_direct_optimize(&goals[i], &decoder, &cost, &bfgs).map(|_| ())
            })?;
            (enc, dopt)
        }
    };

    let report = BenchReport {
        task: task.to_string(),
        goals: enc_times.len(),
        repetitions: a.reps,
        encoder_median_s: median(&mut enc_times),
        direct_opt_median_s: median(&mut do_times),
        ratio: median(&mut do_times) / median(&mut enc_times).max(f64::MIN_POSITIVE),
    };
    let f = std::fs::File::create(&a.out_json).map_err(amortize::Error::from)?;
    serde_json::to_writer_pretty(f, &report).map_err(amortize::Error::from)?;
    println!(
        "encoder {:.3e} s/goal, direct-opt {:.3e} s/goal, ratio {:.1} ({} goals x {} reps)",
        report.encoder_median_s, report.direct_opt_median_s, report.ratio, report.goals, report.repetitions
    );
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> CliResult {
    let task: Task = a.task.into();
    match task {
        Task::Ballistic => return Err(usage("plotting supports the fiber and arm tasks")),
        Task::Fiber => {
            let ds = FiberDataset::load_ndjson(&a.data)?.1;
            let s = ds.samples.get(a.index).ok_or_else(|| usage("index out of range"))?;
            plot_paths(
                &[("goal", &s.goal), ("design", &s.design), ("realization", &s.realization)],
                &a.out,
            )?;
        }
        Task::Arm => {
            let ds = ArmDataset::load_ndjson(&a.data)?.1;
            let s = ds.samples.get(a.index).ok_or_else(|| usage("index out of range"))?;
            plot_robot(&s.realization, &s.goal, &a.out)?;
        }
    }
    println!("wrote {}", a.out.display());
    Ok(())
}
