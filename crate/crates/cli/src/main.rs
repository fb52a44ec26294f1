use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rislearn::dataset;
use rislearn::harness::{
    self, derive_seed, eval_classifier, sweep_csv, ClassifierMode, PipelineArtifacts, SeedDomain,
};
use rislearn::neuralnet::{load_model, save_model};
use rislearn::{CnnModel, ExperimentConfig, LabeledDataset};

#[derive(Parser, Debug)]
#[command(name = "rislearn", version, about = "Spectrum-aware RIS ON/OFF control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML experiment config; unspecified keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_window_len)]
    window_len: Option<usize>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Use ground-truth labels instead of the trained CNN in the sweeps.
    #[arg(long, global = true)]
    perfect_classifier: bool,
    /// Override any config key, e.g. `--set k_max=4`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_key_value)]
    overrides: Vec<(String, String)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the labelled I/Q dataset.
    GenData,
    /// Train the CNN classifier.
    Train {
        /// Dataset to train on; generated from the config when absent.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the held-out split.
    Eval {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Mean SINR versus interferer angle.
    SweepTheta {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Mean SINR versus number of RISs.
    SweepK {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Dataset, training, evaluation and both sweeps.
    All,
}

fn parse_window_len(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if rislearn::signalgen::SUPPORTED_WINDOW_LENGTHS.contains(&n) => Ok(n),
        _ => Err(format!("must be one of {:?}", rislearn::signalgen::SUPPORTED_WINDOW_LENGTHS)),
    }
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or("expected KEY=VALUE")?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Error reported as a single `error: <code>: <message>` line.
struct CliError {
    code: &'static str,
    message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.replace(['\n', '\r'], " ");
        write!(f, "error: {}: {}", self.code, one_line)
    }
}

impl From<rislearn::Error> for CliError {
    fn from(e: rislearn::Error) -> Self {
        Self { code: e.code(), message: e.to_string() }
    }
}

trait Context<T> {
    fn at(self, path: &Path) -> Result<T, CliError>;
}

impl<T> Context<T> for rislearn::Result<T> {
    fn at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|e| CliError {
            code: e.code(),
            message: format!("{}: {e}", path.display()),
        })
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut overrides = common.overrides.clone();
    let mut put = |k: &str, v: String| overrides.push((k.to_string(), v));
    if let Some(s) = common.seed {
        put("seed", s.to_string());
    }
    if let Some(o) = &common.out {
        put("out", format!("{:?}", o.display().to_string()));
    }
    if let Some(l) = common.window_len {
        put("window_len", l.to_string());
    }
    if let Some(r) = common.realizations {
        put("realizations", r.to_string());
    }
    if common.perfect_classifier {
        put("perfect_classifier", "true".into());
    }
    match &common.config {
        Some(p) => ExperimentConfig::load(Some(p), &overrides).at(p),
        None => Ok(ExperimentConfig::load(None, &overrides)?),
    }
}

fn log(msg: &str) {
    eprintln!("{msg}");
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(rislearn::Error::from).at(path)
}

/// Explicit `--data`, else the dataset in the output directory, else a fresh one.
fn dataset_or_generate(cfg: &ExperimentConfig, path: Option<&Path>) -> Result<LabeledDataset, CliError> {
    let default = PipelineArtifacts::in_dir(&cfg.out).dataset;
    match path {
        Some(p) => dataset::load(p).at(p),
        None if default.exists() => dataset::load(&default).at(&default),
        None => {
            log(&format!("generating {} windows/class at L={}", cfg.n_per_class, cfg.window_len));
            Ok(harness::generate_dataset(cfg)?)
        }
    }
}

fn model_path(cfg: &ExperimentConfig, explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| cfg.classifier.clone())
        .unwrap_or_else(|| PipelineArtifacts::in_dir(&cfg.out).model)
}

fn run_sweep(
    cfg: &ExperimentConfig,
    model: Option<PathBuf>,
    domain: SeedDomain,
    file: &str,
) -> Result<(), CliError> {
    let loaded: Option<CnnModel> = if cfg.perfect_classifier {
        None
    } else {
        let p = model_path(cfg, model);
        Some(load_model(&p).at(&p)?)
    };
    let classifier = ClassifierMode::from_config(cfg, loaded.as_ref())?;
    let sweep_cfg = ExperimentConfig { seed: derive_seed(cfg.seed, domain), ..cfg.clone() };
    let rows = match domain {
        SeedDomain::SweepK => harness::sweep_k(&sweep_cfg, classifier)?,
        _ => harness::sweep_theta(&sweep_cfg, classifier)?,
    };
    let path = cfg.out.join(file);
    write(&path, sweep_csv(&rows))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli.common)?;
    fs::create_dir_all(&cfg.out).map_err(rislearn::Error::from).at(&cfg.out)?;
    let paths = PipelineArtifacts::in_dir(&cfg.out);

    match cli.command {
        Command::GenData => {
            let ds = harness::generate_dataset(&cfg)?;
            dataset::save(&ds, &paths.dataset).at(&paths.dataset)?;
            println!("wrote {} ({} windows)", paths.dataset.display(), ds.len());
        }
        Command::Train { data } => {
            let ds = dataset_or_generate(&cfg, data.as_deref())?;
            let (model, report) = harness::train_classifier(&cfg, &ds, |e| {
                log(&format!(
                    "epoch {:>3}  loss {:.5}  train acc {:.4}",
                    e.epoch, e.train_loss, e.train_accuracy
                ))
            })?;
            save_model(&model, &paths.model).at(&paths.model)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write(&paths.report, json + "\n")?;
            write(&paths.confusion, report.confusion.to_csv())?;
            println!("test accuracy {:.4}", report.test_accuracy);
            println!("wrote {}", paths.model.display());
        }
        Command::Eval { data, model } => {
            let p = model_path(&cfg, model);
            let model: CnnModel = load_model(&p).at(&p)?;
            let ds = dataset_or_generate(&cfg, data.as_deref())?;
            let split = dataset::split(&ds, cfg.split_ratio, derive_seed(cfg.seed, SeedDomain::Split))?;
            let eval = eval_classifier(&model, &split.test)?;
            write(&paths.confusion, eval.confusion.to_csv())?;
            print!("{}", eval.confusion);
            println!("overall accuracy {:.4}", eval.overall_accuracy);
        }
        Command::SweepTheta { model } => run_sweep(&cfg, model, SeedDomain::SweepTheta, "sweep_theta.csv")?,
        Command::SweepK { model } => run_sweep(&cfg, model, SeedDomain::SweepK, "sweep_k.csv")?,
        Command::All => {
            let artifacts = harness::run_all(&cfg, &cfg.out, log)?;
            for p in artifacts.all() {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let message = first.strip_prefix("error: ").unwrap_or(first).to_string();
            eprintln!("{}", CliError { code: "usage", message });
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
