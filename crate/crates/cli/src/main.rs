//! `forge`: command-line access to every pipeline stage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use forge_core::ecfp::InvariantKind;
use forge_core::harness::{self, ExperimentConfig, ModelConfig};
use forge_core::mmp::ActivityUnits;
use forge_core::pooling::PoolMethod;
use forge_core::synth::SynthConfig;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Circular fingerprints, pooling, MMPs and activity-cliff models"
)]
struct Cli {
    /// Maximum worker threads (defaults to all cores).
    #[arg(long, env = "FORGE_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, canonicalise and merge a dataset; writes cleaned JSON.
    Parse {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate circular substructures; writes one JSON object per line.
    Fingerprint {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        ecfp: EcfpArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit or apply a pooling operator.
    Pool {
        #[command(subcommand)]
        command: PoolCommand,
    },
    /// List matched molecular pairs as CSV.
    Mmp {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build repeated k-fold split plans; writes JSON.
    Split {
        #[command(flatten)]
        data: DataArgs,
        /// Number of folds.
        #[arg(long)]
        k: Option<usize>,
        /// Comma-separated seeds, one repetition each.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit pooling and a model on one split plan of an experiment config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: ExperimentArgs,
        /// Index into the config's plans (seed-major, fold-minor).
        #[arg(long, default_value_t = 0)]
        plan: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained model on the plan it was trained for.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: ExperimentArgs,
        /// Model file written by `forge train`.
        #[arg(long)]
        trained: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline over every split plan and write a results file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: ExperimentArgs,
        /// Results path; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic structure-activity dataset as CSV.
    Synth {
        /// Start from a bundled dataset's settings.
        #[arg(long, value_enum, default_value = "sar")]
        preset: Preset,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Label noise standard deviation in p units.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, value_enum)]
        units: Option<Units>,
        /// Extra rows repeating earlier molecules in another atom order.
        #[arg(long)]
        duplicates: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PoolCommand {
    /// Fit on a fingerprint file (labels are taken from it).
    Fit {
        #[arg(long)]
        fps: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a fingerprint file to fixed-width vectors.
    Transform {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        fps: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Experiment config supplying dataset, units and settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV with `smiles` and `label` columns (overrides the config).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Whether labels are nanomolar values or already p-transformed.
    #[arg(long, value_enum)]
    units: Option<Units>,
}

#[derive(Args)]
struct EcfpArgs {
    /// Maximum substructure radius.
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long, value_enum)]
    invariants: Option<Invariants>,
    /// Include tetrahedral markers in atom invariants.
    #[arg(long)]
    chirality: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    ecfp: EcfpArgs,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Replace the configured model by this one with default settings.
    #[arg(long, value_enum)]
    model: Option<Model>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Units {
    P,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Invariants {
    Standard,
    Pharmacophoric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Hash,
    Sortslice,
    Filter,
    Mim,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Knn,
    Mlp,
    Twin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Sar,
    Toy60,
}

impl From<Units> for ActivityUnits {
    fn from(u: Units) -> Self {
        match u {
            Units::P => ActivityUnits::P,
            Units::Raw => ActivityUnits::Raw,
        }
    }
}

impl From<Method> for PoolMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Hash => PoolMethod::Hash,
            Method::Sortslice => PoolMethod::SortSlice,
            Method::Filter => PoolMethod::Filter,
            Method::Mim => PoolMethod::Mim,
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading config {}", path.display()))
}

impl DataArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.input) {
            (Some(path), _) => load_config(path)?,
            (None, Some(input)) => ExperimentConfig::new(input),
            (None, None) => bail!("either --config or --input is required"),
        };
        if let Some(input) = &self.input {
            cfg.dataset = input.clone();
        }
        if let Some(u) = self.units {
            cfg.units = u.into();
        }
        Ok(cfg)
    }
}

impl EcfpArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(r) = self.radius {
            cfg.ecfp.radius = r;
        }
        if let Some(inv) = self.invariants {
            cfg.ecfp.invariants = match inv {
                Invariants::Standard => InvariantKind::Standard,
                Invariants::Pharmacophoric => InvariantKind::Pharmacophoric,
            };
        }
        if self.chirality {
            cfg.ecfp.use_chirality = true;
        }
    }
}

impl ExperimentArgs {
    fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        self.ecfp.apply(&mut cfg);
        if let Some(m) = self.method {
            cfg.pooling.method = m.into();
        }
        if let Some(d) = self.dim {
            cfg.pooling.dim = d;
        }
        if let Some(k) = self.k {
            cfg.split.k = k;
        }
        if let Some(s) = &self.seeds {
            cfg.split.seeds = s.clone();
        }
        if let Some(m) = self.model {
            let json = match m {
                Model::Knn => r#"{"type":"knn"}"#,
                Model::Mlp => r#"{"type":"mlp"}"#,
                Model::Twin => r#"{"type":"twin"}"#,
            };
            cfg.model = serde_json::from_str::<ModelConfig>(json)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse { data, out } => {
            let cfg = data.resolve()?;
            let f = harness::cmd_parse(&cfg.dataset, cfg.units, &out)?;
            println!(
                "{} compounds, {} rows dropped -> {}",
                f.compounds.len(),
                f.dropped.len(),
                out.display()
            );
        }
        Command::Fingerprint { data, ecfp, out } => {
            let mut cfg = data.resolve()?;
            ecfp.apply(&mut cfg);
            let rows = harness::cmd_fingerprint(&cfg.dataset, cfg.units, &cfg.ecfp, &out)?;
            println!("{} fingerprints -> {}", rows.len(), out.display());
        }
        Command::Pool { command } => match command {
            PoolCommand::Fit { fps, method, dim, out } => {
                let spec = harness::cmd_pool_fit(&fps, method.into(), dim, &out)?;
                println!("{:?} pooling, dim {} -> {}", spec.method(), spec.dim(), out.display());
            }
            PoolCommand::Transform { spec, fps, out } => {
                let rows = harness::cmd_pool_transform(&spec, &fps, &out)?;
                println!("{} vectors -> {}", rows.len(), out.display());
            }
        },
        Command::Mmp { data, out } => {
            let cfg = data.resolve()?;
            let rows = harness::cmd_mmp(&cfg.dataset, cfg.units, &out)?;
            println!("{} matched pairs -> {}", rows.len(), out.display());
        }
        Command::Split { data, k, seeds, out } => {
            let cfg = data.resolve()?;
            let k = k.unwrap_or(cfg.split.k);
            let seeds = seeds.unwrap_or(cfg.split.seeds);
            let plans = harness::cmd_split(&cfg.dataset, cfg.units, k, &seeds, &out)?;
            println!("{} plans -> {}", plans.len(), out.display());
        }
        Command::Train {
            config,
            overrides,
            plan,
            out,
        } => {
            let cfg = overrides.apply(load_config(&config)?)?;
            let t = harness::cmd_train(&cfg, plan, &out)?;
            println!("trained plan (seed {}, fold {}) -> {}", t.seed, t.fold, out.display());
        }
        Command::Evaluate {
            config,
            overrides,
            trained,
            out,
        } => {
            let cfg = overrides.apply(load_config(&config)?)?;
            let r = harness::cmd_evaluate(&cfg, &trained, &out)?;
            println!(
                "seed {}, fold {}: {} test pairs -> {}",
                r.seed,
                r.fold,
                r.test.n_pairs,
                out.display()
            );
        }
        Command::Experiment { config, overrides, out } => {
            let cfg = overrides.apply(load_config(&config)?)?;
            if out.is_none() && cfg.output.is_none() {
                bail!("no output path: pass --out or set `output` in the config");
            }
            let r = harness::cmd_experiment(&cfg, out.as_deref())?;
            let target = out.or(cfg.output).unwrap_or_default();
            println!(
                "{} plans, {} compounds, {} MMPs -> {}",
                r.plans.len(),
                r.n_compounds,
                r.n_mmps,
                target.display()
            );
        }
        Command::Synth {
            preset,
            n,
            seed,
            noise,
            units,
            duplicates,
            out,
        } => {
            let mut cfg = match preset {
                Preset::Sar => SynthConfig::SAR,
                Preset::Toy60 => SynthConfig::TOY60,
            };
            cfg.n = n.unwrap_or(cfg.n);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.noise = noise.unwrap_or(cfg.noise);
            cfg.units = units.map_or(cfg.units, Into::into);
            cfg.duplicates = duplicates.unwrap_or(cfg.duplicates);
            let rows = harness::cmd_synth(&cfg, &out)?;
            println!("{rows} rows -> {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        harness::init_threads(n);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
