//! `oksvm` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 a run did not
//! converge under `--strict`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oksvm::dataset::{
    generate_synthetic, load_csv, split_train_test, standardize, Dataset, LoadOptions, SyntheticConfig,
};
use oksvm::error::{Error, Result};
use oksvm::harness::{
    emit_heatmap, evaluate_model, fit, format_mean_std, read_rows_file, run_fixed_grid, run_real_cv, run_tuned_grid,
    write_heatmap_csv, write_rows_file, write_summary, Axis, CvSpec, ExperimentConfig, GridSpec, HeatValue, Method,
    ResultRow, TuningSpec, GRID_CS, GRID_DIMS, GRID_GAMMAS, GRID_SEPS, REAL_CS, REAL_GAMMAS,
};
use oksvm::model_io::save_model;
use oksvm::optimizer::{train_oksvm, write_trace_file, OksvmConfig, Termination};
use oksvm::solver::SolverConfig;

#[derive(Parser, Debug)]
#[command(name = "oksvm", version, about = "RBF SVMs with a learned kernel width")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file; each key is a long flag of the chosen subcommand.
    /// Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Exit with status 3 if any solve or outer loop failed to converge.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic two-blob dataset as CSV.
    Generate(GenerateArgs),
    /// Train one model and print its test metrics.
    Train(TrainArgs),
    /// Both methods at every fixed (dim, sep, C, gamma) cell.
    GridFixed(GridArgs),
    /// Both methods with validation-tuned hyperparameters per (dim, sep).
    GridTuned(TunedArgs),
    /// Stratified k-fold cross-validation on a CSV dataset.
    Cv(CvArgs),
    /// Aggregate result rows into a long-format heatmap CSV.
    Heatmap(HeatmapArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    n_samples: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 0.01)]
    eta0: f64,
    #[arg(long, default_value_t = 1.01)]
    zeta_plus: f64,
    #[arg(long, default_value_t = 0.1)]
    zeta_minus: f64,
    #[arg(long, default_value_t = 1000.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 5)]
    ws_limit: usize,
    #[arg(long, default_value_t = 500)]
    max_outer_steps: usize,
    /// Re-solve every outer step from zero instead of the previous multipliers.
    #[arg(long)]
    cold_start: bool,
    #[arg(long, default_value_t = 1e-3)]
    kkt_tolerance: f64,
    /// Pair updates per solve (default 10 N^2).
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Add a wall_time column to result rows (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl OptimizerArgs {
    fn experiment(&self, gamma0: f64) -> ExperimentConfig {
        ExperimentConfig {
            oksvm: OksvmConfig {
                gamma0,
                eta0: self.eta0,
                zeta_plus: self.zeta_plus,
                zeta_minus: self.zeta_minus,
                gamma_max: self.gamma_max,
                epsilon: self.epsilon,
                ws_limit: self.ws_limit,
                max_outer_steps: self.max_outer_steps,
                warm_start: !self.cold_start,
                ..OksvmConfig::default()
            },
            solver: SolverConfig {
                kkt_tolerance: self.kkt_tolerance,
                max_iterations: self.max_iterations,
                ..SolverConfig::default()
            },
            timing: self.timing,
        }
    }
}

#[derive(Args, Debug)]
struct CsvArgs {
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value = "1")]
    positive_label: String,
    /// Keep only rows with these labels.
    #[arg(long, value_delimiter = ',')]
    keep_labels: Option<Vec<String>>,
    /// Label > T is positive, label <= T negative (overrides --positive-label).
    #[arg(long, value_name = "T")]
    positive_above: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    drop_columns: Vec<String>,
    /// Skip rows with empty or `?` cells.
    #[arg(long)]
    drop_incomplete: bool,
}

impl CsvArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            keep_labels: self.keep_labels.clone(),
            positive_above: self.positive_above,
            drop_columns: self.drop_columns.clone(),
            drop_incomplete: self.drop_incomplete,
            ..LoadOptions::new(&self.label_column, &self.positive_label)
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Training CSV.
    #[arg(long)]
    data: PathBuf,
    /// Test CSV; without it a stratified split of --data is used.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "oksvm")]
    method: Method,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Fixed gamma for svm, starting gamma for oksvm.
    #[arg(long, default_value_t = oksvm::optimizer::DEFAULT_GAMMA0)]
    gamma: f64,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Where to write the outer-loop trace (oksvm only).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = GRID_DIMS)]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = GRID_SEPS)]
    seps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = GRID_CS)]
    cs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = GRID_GAMMAS)]
    gammas: Vec<f64>,
    /// Repetitions per cell.
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Use 100 repetitions.
    #[arg(long, conflicts_with = "reps")]
    full_scale: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    n_samples: usize,
    #[arg(long, default_value_t = 0.5)]
    test_fraction: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    opt: OptimizerArgs,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            dims: self.dims.clone(),
            seps: self.seps.clone(),
            cs: self.cs.clone(),
            gammas: self.gammas.clone(),
            repetitions: if self.full_scale { 100 } else { self.reps },
            base_seed: self.seed,
            test_fraction: self.test_fraction,
            n_samples: self.n_samples,
        }
    }
}

#[derive(Args, Debug)]
struct TunedArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 10)]
    tuning_runs: usize,
    #[arg(long, default_value_t = 0.25)]
    validation_fraction: f64,
    /// Starting gamma of OKSVM.
    #[arg(long, default_value_t = oksvm::optimizer::DEFAULT_GAMMA0)]
    gamma0: f64,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    /// Name written in the dataset column (default: file stem).
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long, value_delimiter = ',', default_values_t = REAL_CS)]
    cs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = REAL_GAMMAS)]
    gammas: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    tuning_runs: usize,
    #[arg(long, default_value_t = 0.25)]
    validation_fraction: f64,
    #[arg(long, default_value_t = oksvm::optimizer::DEFAULT_GAMMA0)]
    gamma0: f64,
    /// Per-fold result rows.
    #[arg(long)]
    out: PathBuf,
    /// Mean/std summary CSV.
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    /// Result rows written by grid-fixed, grid-tuned or cv.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "dim,sep")]
    group_by: Vec<String>,
    /// acc, precision, recall, f1, auc, f1_diff or wlr.
    #[arg(long, default_value = "f1")]
    value: String,
    /// Restrict a metric value to one method.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_data_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

/// Inserts the flags from `--config FILE` right after the subcommand name, so
/// that flags given on the command line, which come later, override them.
fn expand_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, Failure> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Failure {
            code: 1,
            message: format!("{}:{}: expected key=value", path.display(), n + 1),
        })?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        match value.trim() {
            "true" => extra.push(OsString::from(flag)),
            "false" => {}
            v => {
                extra.push(OsString::from(flag));
                extra.push(OsString::from(v));
            }
        }
    }
    const SUBCOMMANDS: [&str; 6] = ["generate", "train", "grid-fixed", "grid-tuned", "cv", "heatmap"];
    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(args.len(), |i| i + 1);
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(all_converged) => {
            if cli.strict && !all_converged {
                eprintln!("error: at least one run did not converge");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Returns whether every run converged.
fn run(cli: &Cli) -> std::result::Result<bool, Failure> {
    match &cli.command {
        Command::Generate(a) => {
            let ds = generate_synthetic(&SyntheticConfig {
                n_samples: a.n_samples,
                dim: a.dim,
                sep: a.sep,
                seed: a.seed,
            })?;
            ds.write_csv(&a.out)?;
            Ok(true)
        }
        Command::Train(a) => train(a),
        Command::GridFixed(a) => {
            let rows = run_fixed_grid(&a.spec(), &a.opt.experiment(oksvm::optimizer::DEFAULT_GAMMA0))?;
            write_rows_file(&rows, &a.out, a.opt.timing)?;
            Ok(all_converged(&rows))
        }
        Command::GridTuned(a) => {
            let tuning = TuningSpec {
                validation_fraction: a.validation_fraction,
                tuning_runs: a.tuning_runs,
            };
            let rows = run_tuned_grid(&a.grid.spec(), &tuning, &a.grid.opt.experiment(a.gamma0))?;
            write_rows_file(&rows, &a.grid.out, a.grid.opt.timing)?;
            Ok(all_converged(&rows))
        }
        Command::Cv(a) => cv(a),
        Command::Heatmap(a) => {
            let axes = a
                .group_by
                .iter()
                .map(|s| s.parse::<Axis>())
                .collect::<Result<Vec<_>>>()?;
            let value = HeatValue::parse(&a.value, a.method)?;
            let rows = read_rows_file(&a.input)?;
            let cells = emit_heatmap(&rows, &axes, &value)?;
            let file = std::fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
            write_heatmap_csv(&cells, &axes, std::io::BufWriter::new(file))?;
            Ok(true)
        }
    }
}

fn all_converged(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| r.converged)
}

fn load(path: &Path, csv: &CsvArgs) -> Result<Dataset> {
    load_csv(path, &csv.options())
}

fn train(a: &TrainArgs) -> std::result::Result<bool, Failure> {
    let data = load(&a.data, &a.csv)?;
    let (mut train, mut test) = match &a.test {
        Some(p) => (data, load(p, &a.csv)?),
        None => split_train_test(&data, a.test_fraction, true, a.seed)?,
    };
    if a.standardize {
        let (t, others) = standardize(&train, &[&test])?;
        train = t;
        test = others.into_iter().next().ok_or(Error::EmptyInput)?;
    }
    let config = a.opt.experiment(a.gamma);
    let (model, converged, terminated_by, steps) = match a.method {
        Method::Svm => {
            let f = fit(Method::Svm, &train, a.c, a.gamma, &config)?;
            (f.model, f.converged, None, 0)
        }
        Method::Oksvm => {
            let (model, state) = train_oksvm(&train, a.c, &config.oksvm, &config.solver)?;
            if let Some(path) = &a.trace_out {
                write_trace_file(&state.trace, path)?;
            }
            let ok = model.converged && state.terminated_by != Some(Termination::StepCap);
            (model, ok, state.terminated_by, state.t)
        }
    };
    let metrics = evaluate_model(&model, &test)?;
    if let Some(path) = &a.model_out {
        save_model(&model, path)?;
    }

    let mut out = std::io::stdout().lock();
    let mut lines = vec![
        format!("method={}", a.method),
        format!("c={}", a.c),
        format!("gamma0={}", a.gamma),
        format!("final_gamma={}", model.gamma),
        format!("n_support={}", model.n_support()),
    ];
    if let Some(t) = terminated_by {
        lines.push(format!("terminated_by={t}"));
        lines.push(format!("outer_steps={steps}"));
    }
    lines.push(format!("converged={converged}"));
    for name in oksvm::metrics::METRIC_NAMES {
        lines.push(format!("{name}={}", metrics.get(name)?));
    }
    if let Some(p) = &a.trace_out {
        if a.method == Method::Oksvm {
            lines.push(format!("trace={}", p.display()));
        }
    }
    for l in lines {
        writeln!(out, "{l}").map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(converged)
}

fn cv(a: &CvArgs) -> std::result::Result<bool, Failure> {
    let ds = load(&a.data, &a.csv)?;
    let name = a.name.clone().unwrap_or_else(|| {
        a.data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into())
    });
    let spec = CvSpec {
        k: a.k,
        seed: a.seed,
        standardize: !a.no_standardize,
        cs: a.cs.clone(),
        gammas: a.gammas.clone(),
        tuning: TuningSpec {
            validation_fraction: a.validation_fraction,
            tuning_runs: a.tuning_runs,
        },
    };
    let result = run_real_cv(&ds, &name, &spec, &a.opt.experiment(a.gamma0))?;
    write_rows_file(&result.rows, &a.out, a.opt.timing)?;
    if let Some(p) = &a.summary_out {
        let file = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
        write_summary(&name, &result.summary, std::io::BufWriter::new(file))?;
    }
    let mut out = std::io::stdout().lock();
    for s in &result.summary {
        let cells: Vec<String> = s
            .metrics
            .iter()
            .map(|&(m, mean, std)| format!("{m}={}", format_mean_std(mean, std)))
            .collect();
        writeln!(out, "{name} {} {}", s.method, cells.join(" ")).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(all_converged(&result.rows))
}
