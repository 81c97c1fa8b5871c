use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fos_core::baselines::{default_path_tol, POLISH_EVERY};
use fos_core::io::{
    read_csv_dataset, read_csv_matrix, read_libsvm_with, write_bench_csv, write_dataset_csv, write_edges_csv,
    write_json, write_support_csv, BenchOutput, GraphSummary, ResponseColumn,
};
use fos_core::synth::summarize;
use fos_core::{
    build_grid, combine, cv_select, fos_run_with, gen_synthetic, ic_select, neighborhood_regressions_with,
    run_benchmark, standardize_design, standardize_sparse, BenchConfig, CombineRule, CvConfig, Dataset, Design,
    Error, FosOptions, GraphConfig, IcConfig, InformationCriterion, Method, ModelConstants, NeighborhoodMethod,
    SelectionReport, SynthSpec, TuningGrid,
};

#[derive(Parser)]
#[command(name = "fos", version, about = "Lasso feature selection with adaptive tuning-parameter calibration")]
struct Cli {
    /// Worker threads for CV folds, benchmark replicates and graph nodes.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Select features with the adaptive grid walk.
    Fit(FitArgs),
    /// K-fold cross-validated Lasso.
    Cv(CvArgs),
    /// Lasso path calibrated by BIC or AIC.
    Ic(IcArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Compare methods on synthetic replicates.
    Bench(BenchArgs),
    /// Neighborhood selection on the columns of a data matrix.
    Graph(GraphArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Response column for CSV input: header name or 1-based position.
    #[arg(long, default_value = "y")]
    response: String,
    /// Read LIBSVM text instead of CSV.
    #[arg(long)]
    libsvm: bool,
    /// Feature count for LIBSVM input (default: largest index seen).
    #[arg(long)]
    features: Option<usize>,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    /// Number of grid points m.
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    /// Ratio u = r_max / r_min.
    #[arg(long, default_value_t = 1000.0)]
    grid_ratio: f64,
}

#[derive(Args, Clone, Copy)]
struct ConstantArgs {
    #[arg(long = "c", default_value_t = 0.75)]
    c: f64,
    #[arg(long = "cap-c", default_value_t = 1.0)]
    cap_c: f64,
}

impl ConstantArgs {
    fn constants(&self) -> Result<ModelConstants, Error> {
        ModelConstants::new(self.c, self.cap_c)
    }
}

#[derive(Args, Clone, Copy)]
struct SolverArgs {
    #[arg(long, default_value_t = fos_core::lasso::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Use accelerated updates with active-set refinement.
    #[arg(long)]
    fast: bool,
    /// Fail instead of continuing when a grid point exhausts --max-iters.
    #[arg(long)]
    strict: bool,
}

impl SolverArgs {
    fn options(&self) -> FosOptions {
        FosOptions {
            max_iters: self.max_iters,
            accelerated: self.fast,
            strict: self.strict,
            polish_every: self.fast.then_some(POLISH_EVERY),
            ..FosOptions::default()
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    constants: ConstantArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gap tolerance per path point (default 1e-7 ||Y||^2).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct IcArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Criterion::Bic)]
    criterion: Criterion,
    /// Noise variance sigma^2.
    #[arg(long)]
    noise_variance: f64,
    /// Gap tolerance per path point (default 1e-7 ||Y||^2).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Bic,
    Aic,
}

#[derive(Args, Clone, Copy)]
struct SpecArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Number of nonzero coefficients.
    #[arg(long)]
    support: usize,
    #[arg(long, default_value_t = 5.0)]
    snr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SpecArgs {
    fn spec(&self) -> SynthSpec {
        SynthSpec {
            n: self.n,
            p: self.p,
            rho: self.rho,
            support_size: self.support,
            snr: self.snr,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Also write the true coefficients and support as JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Comma-separated subset of fos, lasso_cv, lasso_bic, lasso_aic.
    #[arg(long, default_value = "fos,lasso_cv")]
    methods: String,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 1.0)]
    noise_variance: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    constants: ConstantArgs,
}

#[derive(Args)]
struct GraphArgs {
    /// CSV with a header row; every column is a node.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "fos")]
    method: String,
    /// Edge rule: or, and.
    #[arg(long, default_value = "or")]
    rule: String,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    constants: ConstantArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

enum Loaded {
    Dense(Dataset, Vec<String>),
    Sparse(Dataset<fos_core::StandardizedSparse>),
}

fn load(args: &InputArgs) -> Result<Loaded, Error> {
    if args.libsvm {
        let (x, y) = read_libsvm_with(&args.input, args.features)?;
        return Ok(Loaded::Sparse(standardize_sparse(&x, &y)?));
    }
    let response: ResponseColumn = args.response.parse().unwrap_or_else(|e| match e {});
    let data = read_csv_dataset(&args.input, &response)?;
    Ok(Loaded::Dense(standardize_design(&data.x, &data.y)?, data.feature_names))
}

fn grid_for<X: Design>(dataset: &Dataset<X>, grid: &GridArgs) -> Result<TuningGrid, Error> {
    build_grid(dataset, grid.grid_size, grid.grid_ratio)
}

fn emit_report(out: &mut dyn Write, format: Format, report: &SelectionReport, names: Option<&[String]>) -> Result<(), Error> {
    match format {
        Format::Json => write_json(out, report),
        Format::Csv => write_support_csv(out, report, names),
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), Error> {
    let parallel = cli.threads > 1;
    match &cli.command {
        Command::Fit(args) => {
            let constants = args.constants.constants()?;
            let options = args.solver.options();
            match load(&args.input)? {
                Loaded::Dense(ds, names) => {
                    let report = fos_run_with(&ds, &grid_for(&ds, &args.grid)?, &constants, &options)?;
                    emit_report(out, cli.format, &report, Some(&names))
                }
                Loaded::Sparse(ds) => {
                    let report = fos_run_with(&ds, &grid_for(&ds, &args.grid)?, &constants, &options)?;
                    emit_report(out, cli.format, &report, None)
                }
            }
        }
        Command::Cv(args) => match load(&args.input)? {
            Loaded::Dense(ds, names) => {
                let config = CvConfig {
                    folds: args.folds,
                    seed: args.seed,
                    tol: args.tol.unwrap_or_else(|| default_path_tol(&ds)),
                    parallel,
                    ..CvConfig::for_dataset(&ds)
                };
                let report = cv_select(&ds, &grid_for(&ds, &args.grid)?, &config)?;
                emit_report(out, cli.format, &report, Some(&names))
            }
            Loaded::Sparse(_) => Err(Error::InvalidParameter("cv needs dense CSV input".into())),
        },
        Command::Ic(args) => {
            let config = IcConfig {
                criterion: match args.criterion {
                    Criterion::Bic => InformationCriterion::Bic,
                    Criterion::Aic => InformationCriterion::Aic,
                },
                noise_variance: args.noise_variance,
            };
            match load(&args.input)? {
                Loaded::Dense(ds, names) => {
                    let tol = args.tol.unwrap_or_else(|| default_path_tol(&ds));
                    let report = ic_select(&ds, &grid_for(&ds, &args.grid)?, &config, tol)?;
                    emit_report(out, cli.format, &report, Some(&names))
                }
                Loaded::Sparse(ds) => {
                    let tol = args.tol.unwrap_or_else(|| default_path_tol(&ds));
                    let report = ic_select(&ds, &grid_for(&ds, &args.grid)?, &config, tol)?;
                    emit_report(out, cli.format, &report, None)
                }
            }
        }
        Command::Synth(args) => {
            let data = gen_synthetic(&args.spec.spec())?;
            if let Some(path) = &args.truth {
                let truth = serde_json::json!({ "beta": data.beta, "support": data.support });
                write_json(BufWriter::new(File::create(path)?), &truth)?;
            }
            match cli.format {
                Format::Csv => write_dataset_csv(out, data.dataset.x(), data.dataset.y()),
                Format::Json => {
                    let x = data.dataset.x();
                    let rows: Vec<Vec<f64>> = (0..x.nrows()).map(|i| x.row(i)).collect();
                    let doc = serde_json::json!({
                        "x": rows,
                        "y": data.dataset.y(),
                        "beta": data.beta,
                        "support": data.support,
                    });
                    write_json(out, &doc)
                }
            }
        }
        Command::Bench(args) => {
            let methods = args
                .methods
                .split(',')
                .map(|m| m.trim().parse::<Method>())
                .collect::<Result<Vec<_>, _>>()?;
            let config = BenchConfig {
                grid_size: args.grid.grid_size,
                grid_ratio: args.grid.grid_ratio,
                constants: args.constants.constants()?,
                folds: args.folds,
                noise_variance: args.noise_variance,
                parallel,
                ..BenchConfig::default()
            };
            let rows = run_benchmark(&args.spec.spec(), &methods, args.replicates, &config)?;
            match cli.format {
                Format::Csv => {
                    write_bench_csv(&mut *out, &rows)?;
                    for s in summarize(&rows) {
                        eprintln!(
                            "{}: hamming {:.2} +- {:.2}, time {:.3} +- {:.3} s ({} replicates)",
                            s.method, s.hamming_mean, s.hamming_sd, s.wall_time_mean, s.wall_time_sd, s.replicates
                        );
                    }
                    Ok(())
                }
                Format::Json => write_json(out, &BenchOutput::new(rows)),
            }
        }
        Command::Graph(args) => {
            let table = read_csv_matrix(&args.input)?;
            let config = GraphConfig {
                method: args.method.parse::<NeighborhoodMethod>()?,
                constants: args.constants.constants()?,
                grid_size: args.grid.grid_size,
                grid_ratio: args.grid.grid_ratio,
                fos: args.solver.options(),
                folds: args.folds,
                seed: args.seed,
                parallel,
            };
            let rule: CombineRule = args.rule.parse()?;
            let supports = neighborhood_regressions_with(&table.data, &config)?;
            let graph = combine(&supports, rule);
            match cli.format {
                Format::Csv => write_edges_csv(out, &graph),
                Format::Json => write_json(out, &GraphSummary::from(&graph)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| -> Result<(), Error> {
        match &cli.output {
            Some(path) => {
                let mut file = BufWriter::new(File::create(path)?);
                run(&cli, &mut file)?;
                file.flush()?;
                Ok(())
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                run(&cli, &mut lock)?;
                lock.flush()?;
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
