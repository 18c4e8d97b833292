//! Command-line front end: `generate`, `encode`, `train`, `experiment`, `plot`.

use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::{Path, PathBuf};

use yinyang::config::{Command, Options, Settings};
use yinyang::encoders::{encode_latency, encode_lif_current, encode_rate, RateEncoding, RateMode};
use yinyang::experiments::{hidden_sweep, run_seeds, run_single_with_net, table1, Scenario};
use yinyang::geometry::ClassLabel;
use yinyang::io::{self, EncodedRows, EventRow};
use yinyang::plot::{FigureKind, FigureSpec};
use yinyang::rng::Rng;
use yinyang::sampler::{generate, Splits};
use yinyang::Error;

#[derive(Debug, Parser)]
#[command(name = "yinyang", version, about = "Yin-Yang dataset generator, encoders and benchmark")]
pub struct Cli {
    /// JSON file with option defaults; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Random seed (meaning depends on the command).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Write a dataset CSV (`x,y,class`).
    Generate(GenerateArgs),
    /// Encode a dataset CSV into spike events or rates.
    Encode(EncodeArgs),
    /// Train one network and write its result JSON.
    Train(TrainArgs),
    /// Run a benchmark protocol.
    Experiment(ExperimentArgs),
    /// Render an SVG figure.
    Plot(PlotArgs),
}

#[derive(Debug, Default, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub r_big: Option<f64>,
    #[arg(long)]
    pub r_small: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub size: Option<usize>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Dataset CSV to encode.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// latency, lif, continuous, poisson or regular.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub t_early: Option<f64>,
    #[arg(long)]
    pub t_late: Option<f64>,
    #[arg(long)]
    pub tau_m: Option<f64>,
    #[arg(long)]
    pub tau_syn: Option<f64>,
    #[arg(long)]
    pub theta_i: Option<f64>,
    #[arg(long)]
    pub i_scale: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub window_ms: Option<f64>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Default, Args)]
pub struct TrainingArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub train_seed: Option<u64>,
    #[arg(long)]
    pub val_seed: Option<u64>,
    #[arg(long)]
    pub test_seed: Option<u64>,
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long)]
    pub val_size: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Hidden layer width.
    #[arg(long, conflicts_with = "shallow")]
    pub hidden: Option<usize>,
    /// No hidden layer.
    #[arg(long)]
    pub shallow: bool,
    /// Keep the input-to-hidden weights at their initial values.
    #[arg(long, conflicts_with = "shallow")]
    pub freeze_lower: bool,
    /// Also write the trained network here.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
    /// Dataset CSVs to use instead of generated splits (all three together).
    #[arg(long, value_name = "PATH", requires_all = ["val_data", "test_data"])]
    pub train_data: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires = "train_data")]
    pub val_data: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires = "train_data")]
    pub test_data: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(subcommand)]
    pub protocol: ExperimentKind,
    /// Parallel training runs (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Where to write the summary CSV (default: the JSON path with a .csv extension).
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentKind {
    /// Deep, frozen-lower and shallow networks at 20 and 30 hidden units.
    Table1 {
        #[arg(long)]
        runs: Option<usize>,
        #[command(flatten)]
        training: TrainingArgs,
    },
    /// Deep networks over a range of hidden sizes.
    Sweep {
        #[arg(long)]
        reps: Option<usize>,
        /// Comma-separated hidden sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        training: TrainingArgs,
    },
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// scatter, curves, sweep, test_overlay or confusion.
    pub kind: String,
    /// Input files, in the order the figure kind expects.
    #[arg(long = "input", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Divergence(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Input(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Usage(m) | CliError::Io(m) | CliError::Divergence(m) | CliError::Input(m)) = self;
        f.write_str(m)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => CliError::Io(msg),
            Error::Divergence { .. } => CliError::Divergence(msg),
            Error::Parse { .. } | Error::Json(_) => CliError::Input(msg),
            Error::Config(_) | Error::OutsideSymbol { .. } | Error::IterationCap { .. } | Error::TooFewSamples { .. } => {
                CliError::Usage(msg)
            }
        }
    }
}

type CliResult<T> = Result<T, CliError>;

impl GeometryArgs {
    fn apply(&self, o: &mut Options) {
        o.r_big = self.r_big;
        o.r_small = self.r_small;
    }
}

impl TrainingArgs {
    fn apply(&self, o: &mut Options) {
        o.epochs = self.epochs;
        o.batch_size = self.batch_size;
        o.lr = self.lr;
        o.beta1 = self.beta1;
        o.beta2 = self.beta2;
        o.eps = self.eps;
        o.train_seed = self.train_seed;
        o.val_seed = self.val_seed;
        o.test_seed = self.test_seed;
        o.train_size = self.train_size;
        o.val_size = self.val_size;
        o.test_size = self.test_size;
        self.geometry.apply(o);
    }
}

impl Cli {
    /// Options set on the command line.
    pub fn flag_options(&self) -> Options {
        let mut o = Options { seed: self.seed, ..Options::default() };
        match &self.command {
            Cmd::Generate(a) => {
                o.size = a.size;
                a.geometry.apply(&mut o);
            }
            Cmd::Encode(a) => {
                o.scheme = a.scheme.clone();
                o.t_early = a.t_early;
                o.t_late = a.t_late.map(Some);
                o.tau_m = a.tau_m;
                o.tau_syn = a.tau_syn;
                o.theta_i = a.theta_i;
                o.i_scale = a.i_scale.map(Some);
                o.r_max = a.r_max;
                o.window_ms = a.window_ms;
                o.population_size = a.population_size;
                a.geometry.apply(&mut o);
            }
            Cmd::Train(a) => {
                o.hidden = a.hidden;
                o.shallow = a.shallow.then_some(true);
                o.freeze_lower = a.freeze_lower.then_some(true);
                a.training.apply(&mut o);
            }
            Cmd::Experiment(a) => {
                o.workers = a.workers;
                match &a.protocol {
                    ExperimentKind::Table1 { runs, training } => {
                        o.runs = *runs;
                        training.apply(&mut o);
                    }
                    ExperimentKind::Sweep { reps, sizes, training } => {
                        o.reps = *reps;
                        o.sizes = sizes.clone();
                        training.apply(&mut o);
                    }
                }
            }
            Cmd::Plot(a) => a.geometry.apply(&mut o),
        }
        o
    }

    fn command_kind(&self) -> Command {
        match self.command {
            Cmd::Generate(_) => Command::Generate,
            Cmd::Encode(_) => Command::Encode,
            Cmd::Train(_) => Command::Train,
            Cmd::Experiment(_) => Command::Experiment,
            Cmd::Plot(_) => Command::Plot,
        }
    }

    pub fn settings(&self) -> CliResult<Settings> {
        Ok(Settings::load(self.command_kind(), self.config.as_deref(), &self.flag_options())?)
    }

    fn out(&self) -> CliResult<&Path> {
        self.out.as_deref().ok_or_else(|| CliError::Usage("--out <PATH> is required".into()))
    }
}

/// Runs a parsed command line, writing human-readable progress to `log`.
pub fn run(cli: &Cli, log: &mut dyn std::io::Write) -> CliResult<()> {
    let settings = cli.settings()?;
    match &cli.command {
        Cmd::Generate(_) => cmd_generate(&settings, cli.out()?, log),
        Cmd::Encode(a) => cmd_encode(&settings, &a.input, cli.out()?, log),
        Cmd::Train(a) => cmd_train(&settings, a, cli.out()?, log),
        Cmd::Experiment(a) => cmd_experiment(&settings, a, cli.out()?, log),
        Cmd::Plot(a) => cmd_plot(&settings, a, cli.out()?, log),
    }
}

fn say(log: &mut dyn std::io::Write, msg: impl fmt::Display) {
    let _ = writeln!(log, "{msg}");
}

pub fn cmd_generate(s: &Settings, out: &Path, log: &mut dyn std::io::Write) -> CliResult<()> {
    let ds = generate(s.seed, s.size, &s.geometry()?)?;
    io::write_atomic(out, io::dataset_to_csv(&ds).as_bytes())?;
    let counts = ds.class_counts();
    for c in ClassLabel::ALL {
        say(log, format!("{}: {}", c.name(), counts[c.index()]));
    }
    Ok(())
}

pub fn cmd_encode(s: &Settings, input: &Path, out: &Path, log: &mut dyn std::io::Write) -> CliResult<()> {
    let g = s.geometry()?;
    let ds = io::load_dataset(input, &g)?;
    let feats = ds.features();
    let rows = match s.scheme.as_str() {
        "latency" | "lif" => {
            let mut rows: Vec<EventRow> = Vec::new();
            for (i, f) in feats.iter().enumerate() {
                let train = if s.scheme == "latency" {
                    encode_latency(f, &s.latency()?)?
                } else {
                    encode_lif_current(f, &s.lif()?)?
                };
                rows.extend(io::event_rows(i, &train));
            }
            EncodedRows::Events(rows)
        }
        other => {
            let mode: RateMode = other
                .parse()
                .map_err(|_| CliError::Usage(format!("unknown encoding scheme `{other}`")))?;
            let cfg = s.rate(mode)?;
            let mut rng = Rng::new(s.seed);
            let mut rows =
                if mode == RateMode::Continuous { EncodedRows::Rates(vec![]) } else { EncodedRows::Events(vec![]) };
            for (i, f) in feats.iter().enumerate() {
                let enc: RateEncoding = encode_rate(f, &cfg, &mut rng)?;
                rows.push(i, &enc);
            }
            rows
        }
    };
    io::write_atomic(out, rows.to_csv().as_bytes())?;
    let n = match &rows {
        EncodedRows::Events(r) => r.len(),
        EncodedRows::Rates(r) => r.len(),
    };
    say(log, format!("encoded {} samples into {n} rows ({})", ds.len(), s.scheme));
    Ok(())
}

fn scenario_from(s: &Settings) -> Scenario {
    if s.shallow {
        Scenario::Shallow
    } else if s.freeze_lower {
        Scenario::FrozenDeep { hidden: s.hidden }
    } else {
        Scenario::Deep { hidden: s.hidden }
    }
}

fn load_splits(s: &Settings, a: &TrainArgs) -> CliResult<Splits> {
    let g = s.geometry()?;
    match (&a.train_data, &a.val_data, &a.test_data) {
        (Some(tr), Some(va), Some(te)) => Ok(Splits {
            train: io::load_dataset(tr, &g)?,
            validation: io::load_dataset(va, &g)?,
            test: io::load_dataset(te, &g)?,
        }),
        _ => Ok(s.splits().generate(&g)?),
    }
}

pub fn cmd_train(s: &Settings, a: &TrainArgs, out: &Path, log: &mut dyn std::io::Write) -> CliResult<()> {
    if s.shallow && s.freeze_lower {
        return Err(CliError::Usage("a shallow network has no lower layer to freeze".into()));
    }
    let scenario = scenario_from(s);
    let splits = load_splits(s, a)?;
    let (init_seed, shuffle_seed) = run_seeds(s.seed, 0);
    let (result, net) = run_single_with_net(scenario, init_seed, shuffle_seed, &s.protocol(), &splits)?;
    if let Some(path) = &a.checkpoint {
        io::save_checkpoint(path, &net)?;
    }
    io::write_atomic(out, io::to_json(&result)?.as_bytes())?;
    say(log, format!("{scenario}: final test accuracy {:.4}", result.final_test_accuracy));
    Ok(())
}

fn csv_path(a: &ExperimentArgs, out: &Path) -> PathBuf {
    a.csv.clone().unwrap_or_else(|| out.with_extension("csv"))
}

fn fmt_std(std: Option<f64>) -> String {
    std.map(|v| format!("{v:.4}")).unwrap_or_else(|| io::NOT_AVAILABLE.into())
}

pub fn cmd_experiment(s: &Settings, a: &ExperimentArgs, out: &Path, log: &mut dyn std::io::Write) -> CliResult<()> {
    let splits = s.splits().generate(&s.geometry()?)?;
    let protocol = s.protocol();
    let csv = csv_path(a, out);
    match a.protocol {
        ExperimentKind::Table1 { .. } => {
            let t = table1(s.runs, s.seed, &protocol, &splits)?;
            io::write_atomic(out, io::to_json(&t)?.as_bytes())?;
            io::write_atomic(&csv, io::table1_to_csv(&io::table1_rows(&t)).as_bytes())?;
            for c in &t.cells {
                say(log, format!("{:<50} {:.4} ± {}", c.scenario.to_string(), c.accuracy.mean, fmt_std(c.accuracy.std)));
            }
        }
        ExperimentKind::Sweep { .. } => {
            let r = hidden_sweep(&s.sizes, s.reps, s.seed, &protocol, &splits)?;
            io::write_atomic(out, io::to_json(&r)?.as_bytes())?;
            io::write_atomic(&csv, io::sweep_to_csv(&io::sweep_rows(&r)).as_bytes())?;
            for e in &r.entries {
                say(log, format!("hidden {:>4}: test error {:.4} ± {}", e.hidden, e.error.mean, fmt_std(e.error.std)));
            }
        }
    }
    Ok(())
}

pub fn cmd_plot(s: &Settings, a: &PlotArgs, out: &Path, log: &mut dyn std::io::Write) -> CliResult<()> {
    let kind: FigureKind = a.kind.parse()?;
    let spec = FigureSpec { kind, inputs: a.inputs.clone(), output: out.to_path_buf() };
    spec.write(&s.geometry()?)?;
    say(log, format!("wrote {} figure to {}", kind.name(), out.display()));
    Ok(())
}
