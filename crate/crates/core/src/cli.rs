//! Command-line surface: `synth`, `split`, `stats`, `train`, `eval`,
//! `rank` and `export`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::Baseline;
use crate::dataset::{
    chronological_split, interaction_stats, parse_tweets, rating_engagement_histogram,
    write_histogram_csv, Dataset, SplitFractions,
};
use crate::featurizer::{
    build_aggregates, extract_features, featurize_dataset, fit_normalizer, prune_outlier_users,
    write_letor, PruneBounds,
};
use crate::pipeline::{evaluate, rank_for_user, train_pipeline, Scorer, TrainConfig};
use crate::ranker::{BoostParams, RankingModel};
use crate::synthgen::{generate, SynthConfig};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "tweetrank",
    version,
    about = "Rank tweets by predicted engagement"
)]
pub struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// nDCG cutoff.
    #[arg(long, global = true, default_value_t = 10)]
    pub k: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as line-delimited JSON.
    Synth(SynthArgs),
    /// Split a dataset chronologically into train, test and eval files.
    Split(SplitArgs),
    /// Per-user interaction statistics and the rating-engagement histogram.
    Stats(StatsArgs),
    /// Train the MART + LambdaMART blend and write a model file.
    Train(TrainArgs),
    /// Mean nDCG@k of a model file or a named baseline.
    Eval(EvalArgs),
    /// Print one user's tweet ids, best first.
    Rank(RankArgs),
    /// Write features in the svmlight-style learning-to-rank format.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub users: usize,
    #[arg(long, default_value_t = 50)]
    pub items: usize,
    #[arg(long, default_value_t = 4)]
    pub min_per_user: usize,
    #[arg(long, default_value_t = 40)]
    pub max_per_user: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rating_effect: f64,
    #[arg(long, default_value_t = 0.3)]
    pub metadata_effect: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.05)]
    pub retweet_fraction: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub input: PathBuf,
    /// Comma-separated train,test,eval fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    pub fractions: Vec<f64>,
    /// Output prefix; writes `<prefix>.train.jsonl`, `.test.jsonl`, `.eval.jsonl`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub input: PathBuf,
    /// Statistics CSV.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Rating-engagement histogram CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub leaves: usize,
    #[arg(long, default_value_t = 0.1)]
    pub shrinkage: f64,
    #[arg(long, default_value_t = 50)]
    pub early_stop: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_trees: usize,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 4)]
    pub prune_min: usize,
    #[arg(long, default_value_t = 200)]
    pub prune_max: usize,
    #[arg(long, default_value_t = 0.2)]
    pub validation_fraction: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model file, or one of recRating, recHEI, recRandom, ideal.
    #[arg(long)]
    pub model: String,
    /// Training split the aggregates are built from.
    #[arg(long)]
    pub train: PathBuf,
    /// Split to evaluate.
    #[arg(long)]
    pub data: PathBuf,
    /// Per-user `user_id,ndcg` CSV.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub user: String,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Apply z-scores fitted on the pruned training split.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 4)]
    pub prune_min: usize,
    #[arg(long, default_value_t = 200)]
    pub prune_max: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_tweets(&name, BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

enum Loaded {
    Model(Box<RankingModel>),
    Baseline(Baseline),
    Ideal,
}

impl Loaded {
    fn open(name: &str) -> Result<Self> {
        if name == "ideal" {
            return Ok(Loaded::Ideal);
        }
        if let Ok(b) = name.parse() {
            return Ok(Loaded::Baseline(b));
        }
        let model = RankingModel::load(BufReader::new(File::open(name)?))?;
        Ok(Loaded::Model(Box::new(model)))
    }

    fn scorer(&self) -> Scorer<'_> {
        match self {
            Loaded::Model(m) => Scorer::Model(m),
            Loaded::Baseline(b) => Scorer::Baseline(*b),
            Loaded::Ideal => Scorer::Ideal,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    eprintln!("config: {cli:?}");
    if cli.k == 0 {
        return Err(Error::InvalidConfig("--k must be at least 1".into()));
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Synth(a) => {
            let config = SynthConfig {
                user_count: a.users,
                item_count: a.items,
                interactions_per_user: (a.min_per_user, a.max_per_user),
                rating_effect: a.rating_effect,
                metadata_effect: a.metadata_effect,
                noise: a.noise,
                retweet_fraction: a.retweet_fraction,
                seed: cli.seed,
            };
            let d = generate(&config)?;
            d.write_jsonl(create(&a.output)?)?;
            writeln!(
                out,
                "wrote {} interactions to {}",
                d.len(),
                a.output.display()
            )?;
        }
        Command::Split(a) => {
            let fractions: [f64; 3] = a
                .fractions
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidFractions("expected three fractions".into()))?;
            let d = read_dataset(&a.input)?;
            let (train, test, eval) = chronological_split(&d, SplitFractions(fractions))?;
            for (part, split) in [("train", &train), ("test", &test), ("eval", &eval)] {
                let path = PathBuf::from(format!("{}.{part}.jsonl", a.out_prefix.display()));
                split.write_jsonl(create(&path)?)?;
                writeln!(
                    out,
                    "{part}: {} interactions -> {}",
                    split.len(),
                    path.display()
                )?;
            }
        }
        Command::Stats(a) => {
            let d = read_dataset(&a.input)?;
            let stats = interaction_stats(&d)?;
            writeln!(out, "{}", stats.summary())?;
            if let Some(path) = &a.output {
                stats.write_csv(create(path)?)?;
            }
            if let Some(path) = &a.histogram {
                write_histogram_csv(&rating_engagement_histogram(&d), create(path)?)?;
            }
        }
        Command::Train(a) => {
            let train = read_dataset(&a.train)?;
            let cfg = TrainConfig {
                boost: BoostParams {
                    max_trees: a.max_trees,
                    leaves_per_tree: a.leaves,
                    min_samples_leaf: a.min_samples_leaf,
                    shrinkage: a.shrinkage,
                    early_stop_rounds: a.early_stop,
                    ndcg_cutoff: cli.k,
                    sigma: a.sigma,
                    seed: cli.seed,
                },
                prune: PruneBounds {
                    min: a.prune_min,
                    max: a.prune_max,
                },
                validation_fraction: a.validation_fraction,
            };
            let report = train_pipeline(&train, &cfg)?;
            for w in report.warnings() {
                eprintln!("warning: {w}");
            }
            report.model.save(create(&a.output)?)?;
            for m in report.model.blend.members() {
                writeln!(
                    out,
                    "{:?}: weight {} with {} trees",
                    m.role,
                    m.weight,
                    m.ensemble.len()
                )?;
            }
            writeln!(
                out,
                "validation mean_ndcg@{}={:.6} ({} fitting users, {} validation users)",
                cli.k, report.blend_valid_ndcg, report.fit_groups, report.valid_groups
            )?;
        }
        Command::Eval(a) => {
            let loaded = Loaded::open(&a.model)?;
            let train = read_dataset(&a.train)?;
            let data = read_dataset(&a.data)?;
            let report = evaluate(loaded.scorer(), &train, &data, cli.k, cli.seed)?;
            if let Some(path) = &a.output {
                report.write_csv(create(path)?)?;
            }
            writeln!(out, "{}", report.summary_line())?;
        }
        Command::Rank(a) => {
            let loaded = Loaded::open(&a.model)?;
            let train = read_dataset(&a.train)?;
            let data = read_dataset(&a.data)?;
            for id in rank_for_user(loaded.scorer(), &train, &data, &a.user, cli.seed)? {
                writeln!(out, "{id}")?;
            }
        }
        Command::Export(a) => {
            let train = read_dataset(&a.train)?;
            let data = read_dataset(&a.data)?;
            let agg = build_aggregates(&train)?;
            let normalizer = if a.normalize {
                let bounds = PruneBounds {
                    min: a.prune_min,
                    max: a.prune_max,
                };
                let pruned = prune_outlier_users(&train, bounds)?;
                let raw: Vec<_> = pruned.iter().map(|t| extract_features(t, &agg)).collect();
                Some(fit_normalizer(&raw)?)
            } else {
                None
            };
            let groups = featurize_dataset(&data, &agg, normalizer.as_ref());
            write_letor(&groups, create(&a.output)?)?;
            writeln!(
                out,
                "wrote {} users to {}",
                groups.len(),
                a.output.display()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
