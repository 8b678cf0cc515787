use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use noisereg_core::channels::{gamma_from_t1, gamma_from_t2, parse_duration};
use noisereg_core::experiments::{self, DEFAULT_DEPTHS};
use noisereg_core::report::{self, RunManifest};
use noisereg_core::{
    load_diabetes, prepare, AdamConfig, AnsatzConfig, ChannelKind, Error, GammaGrid, HardwareCoherence, MetricMode,
    NoiseSpec, PrepareOptions, PreparedDataset, QnnModel, SweepConfig, TrainConfig,
};

#[derive(Parser)]
#[command(name = "noisereg", version, about = "Noise as a regularizer for quantum neural network regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write its per-epoch losses and final parameters.
    Train(TrainArgs),
    /// Train replicas across a grid of noise strengths.
    Sweep(SweepArgs),
    /// Sweep, then evaluate every trained model at every grid noise level.
    Noisemap(NoisemapArgs),
    /// Optimal noise strength per circuit depth.
    Depthstudy(DepthArgs),
    /// Convert T1/T2 and gate time to damping strengths.
    Calibrate(CalibrateArgs),
    /// Validation loss of the constant predictors 0 and 1.
    Baselines(BaselineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ChannelArg {
    Ad,
    Pd,
    Dp,
    None,
}

impl ChannelArg {
    fn kind(self) -> Option<ChannelKind> {
        match self {
            ChannelArg::Ad => Some(ChannelKind::AmplitudeDamping),
            ChannelArg::Pd => Some(ChannelKind::PhaseDamping),
            ChannelArg::Dp => Some(ChannelKind::Depolarizing),
            ChannelArg::None => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args, Serialize)]
struct DataArgs {
    /// Diabetes table (tab or comma separated, with header).
    #[arg(long, default_value = "data/diabetes.tab")]
    data: PathBuf,
    /// Seed for the train/validation split and for all training runs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct OutputArgs {
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MetricArg {
    /// Full training set re-evaluated after each epoch.
    PostEpoch,
    /// Mean of the per-sample losses seen during the epoch.
    BatchRunning,
}

#[derive(Args, Serialize)]
struct TrainingArgs {
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 20)]
    batch: usize,
    #[arg(long, default_value_t = 0.03)]
    lr: f64,
    /// Apply the channel after the encoding gates as well.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    noise_after_encoding: bool,
    /// How the per-epoch training MSE is measured.
    #[arg(long, value_enum, default_value_t = MetricArg::PostEpoch)]
    train_metric: MetricArg,
}

impl TrainingArgs {
    fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            seed,
            adam: AdamConfig {
                learning_rate: self.lr,
                ..AdamConfig::default()
            },
            metric: match self.train_metric {
                MetricArg::PostEpoch => MetricMode::PostEpoch,
                MetricArg::BatchRunning => MetricMode::BatchRunning,
            },
        }
    }
}

#[derive(Args, Serialize)]
struct GridArgs {
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    grid_min_exp: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    grid_max_exp: f64,
    #[arg(long, default_value_t = 0.25)]
    grid_step: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<GammaGrid, Failure> {
        GammaGrid::decades(self.grid_min_exp, self.grid_max_exp, self.grid_step, true).map_err(usage)
    }
}

#[derive(Args, Serialize)]
struct SweepShared {
    #[arg(long, default_value_t = 16)]
    seeds: usize,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    training: TrainingArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: OutputArgs,
}

impl SweepShared {
    fn config(&self, layers: usize) -> SweepConfig {
        SweepConfig {
            layers,
            n_seeds: self.seeds,
            master_seed: self.data.seed,
            train: self.training.config(self.data.seed),
            noise_after_encoding: self.training.noise_after_encoding,
            workers: self.workers,
        }
    }
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = ChannelArg::None)]
    channel: ChannelArg,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    #[command(flatten)]
    training: TrainingArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    /// One or more channels, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ad")]
    channel: Vec<ChannelArg>,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    #[command(flatten)]
    shared: SweepShared,
}

#[derive(Args, Serialize)]
struct NoisemapArgs {
    #[arg(long, value_enum, default_value_t = ChannelArg::Ad)]
    channel: ChannelArg,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    #[command(flatten)]
    shared: SweepShared,
}

#[derive(Args, Serialize)]
struct DepthArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ad,pd,dp")]
    channel: Vec<ChannelArg>,
    /// Circuit depths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DEPTHS)]
    layers: Vec<usize>,
    #[command(flatten)]
    shared: SweepShared,
}

#[derive(Args, Serialize)]
struct CalibrateArgs {
    /// Relaxation time, e.g. 25us.
    #[arg(long)]
    t1: String,
    /// Dephasing time, e.g. 28us.
    #[arg(long)]
    t2: String,
    /// Gate duration, e.g. 240ns.
    #[arg(long)]
    tgate: String,
}

#[derive(Args, Serialize)]
struct BaselineArgs {
    #[command(flatten)]
    data: DataArgs,
}

enum Failure {
    /// Bad flag values: exit 2.
    Usage(String),
    /// Data, IO or numerical failure: exit 1.
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn noise_channels(list: &[ChannelArg]) -> Result<Vec<ChannelKind>, Failure> {
    let mut out: Vec<ChannelKind> = Vec::new();
    for c in list {
        let kind = c
            .kind()
            .ok_or_else(|| Failure::Usage("--channel none has no noise strength to sweep".into()))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

fn load(args: &DataArgs) -> Result<(PreparedDataset, String), Failure> {
    let raw = load_diabetes(&args.data)?;
    let digest = report::file_sha256(&args.data)?;
    Ok((prepare(&raw, &PrepareOptions::with_seed(args.seed))?, digest))
}

struct Run<'a> {
    command: &'a str,
    argv: &'a [String],
    out: &'a Path,
    format: Format,
}

impl Run<'_> {
    fn path(&self, stem: &str) -> PathBuf {
        self.out.join(format!("{}_{stem}.{}", self.command, self.format.ext()))
    }

    fn manifest(
        &self,
        params: &impl Serialize,
        data: &DataArgs,
        digest: String,
        grid: Vec<f64>,
        outputs: &[&PathBuf],
    ) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: self.command.into(),
            params: serde_json::to_value(params).map_err(Error::from)?,
            master_seed: data.seed,
            grid,
            data_path: Some(data.data.clone()),
            data_sha256: Some(digest),
            outputs: outputs.iter().map(|p| (*p).clone()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            argv: self.argv.to_vec(),
        };
        report::write_file(self.out.join(format!("{}_manifest.json", self.command)), &manifest.to_json()?)?;
        Ok(())
    }

    fn table<T: Serialize + ?Sized>(&self, path: &Path, csv: impl FnOnce() -> String, rows: &T) -> Result<(), Failure> {
        let text = match self.format {
            Format::Csv => csv(),
            Format::Json => serde_json::to_string_pretty(rows).map_err(Error::from)? + "\n",
        };
        report::write_file(path, &text)?;
        Ok(())
    }
}

fn train(args: &TrainArgs, argv: &[String]) -> Result<(), Failure> {
    let noise = match args.channel.kind() {
        Some(kind) => NoiseSpec::new(kind, args.gamma).map_err(usage)?,
        None => NoiseSpec::none(),
    };
    let model = QnnModel::new(
        AnsatzConfig {
            noise_after_encoding: args.training.noise_after_encoding,
            ..AnsatzConfig::new(args.layers)
        },
        noise,
    )
    .map_err(usage)?;
    let (data, digest) = load(&args.data)?;
    let run = Run {
        command: "train",
        argv,
        out: &args.output.out,
        format: args.output.format,
    };
    let epochal = run.path("epochal");
    let record_path = args.output.out.join("train_record.json");
    let split_path = args.output.out.join("train_split.json");
    run.manifest(args, &args.data, digest, vec![noise.gamma], &[&epochal, &record_path, &split_path])?;

    let record = noisereg_core::train(&model, &data, &args.training.config(args.data.seed))?;
    run.table(&epochal, || report::record_csv(&record), &record)?;
    report::write_file(&record_path, &report::record_json(&record)?)?;
    report::write_file(&split_path, &(data.split_json()? + "\n"))?;
    println!(
        "train channel={} gamma={} final_train_mse={:.6} final_val_mse={:.6}",
        noise.label(),
        noise.gamma,
        record.final_train_mse(),
        record.final_val_mse()
    );
    Ok(())
}

fn sweep(args: &SweepArgs, argv: &[String]) -> Result<(), Failure> {
    let channels = noise_channels(&args.channel)?;
    let grid = args.shared.grid.grid()?;
    let (data, digest) = load(&args.shared.data)?;
    let run = Run {
        command: "sweep",
        argv,
        out: &args.shared.output.out,
        format: args.shared.output.format,
    };
    let (epochal, summary) = (run.path("epochal"), run.path("summary"));
    run.manifest(args, &args.shared.data, digest, grid.gammas().to_vec(), &[&epochal, &summary])?;

    let config = args.shared.config(args.layers);
    let sweeps = channels
        .iter()
        .map(|&c| experiments::run_noise_sweep(c, &grid, &data, &config))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<_> = sweeps.iter().collect();
    let runs: Vec<_> = sweeps.iter().flat_map(|s| &s.runs).collect();
    let rows: Vec<_> = sweeps.iter().flat_map(|s| s.summary.iter().cloned()).collect();
    run.table(&epochal, || report::epochal_csv(&refs), &runs)?;
    run.table(&summary, || report::summary_csv(&rows), &rows)?;
    for s in &sweeps {
        let opt = experiments::find_optimum(&s.summary)?;
        println!(
            "sweep channel={} gamma_opt={:e} val_mse={:.6} val_mse_noiseless={:.6} improvement={:.2}%",
            s.channel,
            opt.gamma,
            opt.val_mse,
            opt.val_mse_noiseless,
            100.0 * opt.improvement
        );
    }
    Ok(())
}

fn noisemap(args: &NoisemapArgs, argv: &[String]) -> Result<(), Failure> {
    let channel = noise_channels(&[args.channel])?[0];
    let grid = args.shared.grid.grid()?;
    let (data, digest) = load(&args.shared.data)?;
    let run = Run {
        command: "noisemap",
        argv,
        out: &args.shared.output.out,
        format: args.shared.output.format,
    };
    let (summary, map_path) = (run.path("summary"), run.path("map"));
    run.manifest(args, &args.shared.data, digest, grid.gammas().to_vec(), &[&summary, &map_path])?;

    let sweep = experiments::run_noise_sweep(channel, &grid, &data, &args.shared.config(args.layers))?;
    let map = experiments::run_noise_map(channel, &grid, &sweep, &data, args.shared.workers)?;
    run.table(&summary, || report::summary_csv(&sweep.summary), &sweep.summary)?;
    run.table(&map_path, || report::noisemap_csv(&map), &map)?;
    let diag_best = (0..grid.len())
        .map(|f| format!("{:e}", map.best_train_gamma[f]))
        .collect::<Vec<_>>()
        .join(" ");
    println!("noisemap channel={channel} best gamma_train per gamma_eval: {diag_best}");
    Ok(())
}

fn depthstudy(args: &DepthArgs, argv: &[String]) -> Result<(), Failure> {
    let channels = noise_channels(&args.channel)?;
    let grid = args.shared.grid.grid()?;
    if args.layers.is_empty() || args.layers.contains(&0) {
        return Err(Failure::Usage("--layers needs positive depths".into()));
    }
    let (data, digest) = load(&args.shared.data)?;
    let run = Run {
        command: "depthstudy",
        argv,
        out: &args.shared.output.out,
        format: args.shared.output.format,
    };
    let (depth, summary) = (run.path("depth"), run.path("summary"));
    run.manifest(args, &args.shared.data, digest, grid.gammas().to_vec(), &[&depth, &summary])?;

    let result = experiments::run_depth_study(&channels, &args.layers, &grid, &data, &args.shared.config(0))?;
    #[derive(Serialize)]
    struct LayerRow<'a> {
        layers: usize,
        #[serde(flatten)]
        row: &'a experiments::SummaryRow,
    }
    let rows: Vec<_> = result.sweeps.iter().flat_map(|s| s.summary.iter().cloned()).collect();
    let json_rows: Vec<_> = result
        .sweeps
        .iter()
        .flat_map(|s| s.summary.iter().map(|row| LayerRow { layers: s.layers, row }))
        .collect();
    run.table(&depth, || report::depth_csv(&result.rows), &result)?;
    run.table(&summary, || report::summary_csv(&rows), &json_rows)?;
    for a in &result.aggregates {
        println!(
            "depthstudy channel={} mean_opt_arithmetic={:e} mean_opt_geometric={:e}",
            a.channel, a.arithmetic_mean, a.geometric_mean
        );
    }
    Ok(())
}

fn calibrate(args: &CalibrateArgs) -> Result<(), Failure> {
    let hw = HardwareCoherence::new(
        parse_duration(&args.t1).map_err(usage)?,
        parse_duration(&args.t2).map_err(usage)?,
        parse_duration(&args.tgate).map_err(usage)?,
    )
    .map_err(usage)?;
    if let Some(w) = hw.warning() {
        eprintln!("warning: {w}");
    }
    let (ad, pd) = (gamma_from_t1(&hw)?, gamma_from_t2(&hw)?);
    println!("gamma_ad={ad:.2e} gamma_pd={pd:.2e}");
    println!("{}", serde_json::json!({ "gamma_ad": ad, "gamma_pd": pd }));
    Ok(())
}

fn baselines(args: &BaselineArgs) -> Result<(), Failure> {
    let (data, _) = load(&args.data)?;
    let (zero, one) = experiments::naive_baseline_losses(&data)?;
    println!("loss_at_zero={zero:.6} loss_at_one={one:.6}");
    println!("{}", serde_json::json!({ "loss_at_zero": zero, "loss_at_one": one }));
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Train(a) => train(a, &argv),
        Command::Sweep(a) => sweep(a, &argv),
        Command::Noisemap(a) => noisemap(a, &argv),
        Command::Depthstudy(a) => depthstudy(a, &argv),
        Command::Calibrate(a) => calibrate(a),
        Command::Baselines(a) => baselines(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
