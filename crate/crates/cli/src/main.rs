use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wsi::cluster::Metric;
use wsi::corpus::{read_dataset, write_dataset_to, Dataset, TokenMode};
use wsi::embedding::{EmbeddingModel, ModelFormat, WeightKind};
use wsi::evaluation::{evaluate, project_2d, write_projection_csv};
use wsi::pipeline::{
    grid_search, induce_senses, prepare, GridSpec, ModelSource, Objective, PipelineConfig,
    PipelineError, Preference, Strategy, WsiSettings,
};
use wsi::synthetic::PlantedSenses;

#[derive(Parser, Debug)]
#[command(name = "wsi", version, about = "Word sense induction with averaged word embeddings")]
struct Cli {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: one per core). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster the contexts of every query word and write predictions.
    Induce {
        /// Dataset TSV.
        dataset: PathBuf,
        /// Output TSV (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print per-word cluster counts to stderr.
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Score predictions against gold senses.
    Evaluate {
        /// TSV with predicted_sense_id filled in.
        predictions: PathBuf,
        /// Separate gold TSV, joined on context_id. Without it the gold
        /// column of the predictions file is used.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Try every (preference, damping) pair on a labeled training set.
    Gridsearch {
        /// Labeled training TSV.
        train: PathBuf,
        /// Grid table CSV (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        preferences: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        dampings: Option<Vec<f64>>,
        #[arg(long, default_value = "weighted-ari")]
        objective: Objective,
        /// Write a config file holding the winning parameters.
        #[arg(long)]
        best_config: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Project fingerprints onto two principal axes, one word at a time.
    Project {
        dataset: PathBuf,
        /// CSV output (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Only this query word.
        #[arg(long)]
        word: Option<String>,
        /// Run induction first so the CSV carries fresh predictions.
        #[arg(long)]
        induce: bool,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Print vocabulary size, dimensionality and frequency coverage.
    InspectModel {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "word2vec-text")]
        model_format: ModelFormat,
        #[arg(long)]
        frequencies: Option<PathBuf>,
        /// Show vector norm and weight of these tokens.
        #[arg(long = "token")]
        tokens: Vec<String>,
        #[arg(long, default_value = "log-inverse")]
        weight_scheme: WeightKind,
    },
    /// Write a planted-sense model, frequency list and dataset.
    MakeFixture {
        #[arg(long)]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        words: usize,
        #[arg(long, default_value_t = 2)]
        senses: usize,
        #[arg(long, default_value_t = 50)]
        contexts: usize,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
    },
}

#[derive(Args, Debug, Default)]
struct SettingsArgs {
    /// TOML config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    model_format: Option<ModelFormat>,
    #[arg(long)]
    frequencies: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    /// A number or `median`.
    #[arg(long, allow_negative_numbers = true)]
    preference: Option<Preference>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    convergence_window: Option<usize>,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    weight_scheme: Option<WeightKind>,
    #[arg(long)]
    weight_floor: Option<f64>,
    /// Keep fingerprints unnormalized.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    token_mode: Option<TokenMode>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(msg) => Failure::Usage(msg),
            other => Failure::Data(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

impl SettingsArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => {
                let path = self
                    .model
                    .clone()
                    .ok_or_else(|| Failure::Usage("either --config or --model is required".into()))?;
                PipelineConfig::new(
                    ModelSource {
                        path,
                        format: ModelFormat::Word2vecText,
                        frequencies: None,
                    },
                    WsiSettings::default(),
                )
            }
        };
        if let Some(p) = &self.model {
            cfg.model.path = p.clone();
        }
        if let Some(f) = self.model_format {
            cfg.model.format = f;
        }
        if let Some(p) = &self.frequencies {
            cfg.model.frequencies = Some(p.clone());
        }
        let c = &mut cfg.clustering;
        if let Some(s) = self.strategy {
            c.strategy = s;
        }
        if let Some(p) = self.preference {
            c.preference = p;
        }
        if let Some(d) = self.damping {
            c.damping = d;
        }
        if let Some(m) = self.max_iter {
            c.max_iter = m;
        }
        if let Some(w) = self.convergence_window {
            c.convergence_window = w;
        }
        if let Some(m) = self.metric {
            c.metric = m;
        }
        let fp = &mut cfg.fingerprint;
        if let Some(k) = self.weight_scheme {
            fp.scheme.kind = k;
        }
        if let Some(f) = self.weight_floor {
            fp.scheme.floor = f;
        }
        if self.no_normalize {
            fp.normalize = false;
        }
        if let Some(t) = self.token_mode {
            fp.token_mode = t;
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.settings().validate()?;
        Ok(cfg)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Data(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(cfg: &PipelineConfig) -> Result<EmbeddingModel> {
    cfg.model.load().map_err(Failure::data)
}

fn dataset(path: &Path) -> Result<Dataset> {
    read_dataset(path).map_err(Failure::data)
}

fn induce(cli: &Cli, path: &Path, out: Option<&Path>, summary: bool, args: &SettingsArgs) -> Result<()> {
    let cfg = args.resolve(cli.seed)?;
    let data = dataset(path)?;
    let model = load(&cfg)?;
    let result = induce_senses(&data, &model, &cfg.settings())?;
    let mut w = output(out)?;
    write_dataset_to(&result.dataset, &mut w)
        .and_then(|_| w.flush())
        .map_err(Failure::data)?;
    if summary {
        for o in &result.words {
            eprintln!(
                "{}\tk={}\tap_k={}\tconverged={}\tzero={}",
                o.word, o.k, o.ap_k, o.converged, o.n_zero
            );
        }
    }
    Ok(())
}

fn merge_gold(pred: &mut Dataset, gold: &Dataset) -> Result<()> {
    let by_id: std::collections::HashMap<&str, &Option<String>> = gold
        .records
        .iter()
        .map(|r| (r.context_id.as_str(), &r.gold_sense_id))
        .collect();
    for r in &mut pred.records {
        let g = by_id
            .get(r.context_id.as_str())
            .ok_or_else(|| Failure::Data(format!("context {:?} is not in the gold file", r.context_id)))?;
        r.gold_sense_id = (*g).clone();
    }
    Ok(())
}

fn evaluate_cmd(pred: &Path, gold: Option<&Path>, json: Option<&Path>) -> Result<()> {
    let mut data = dataset(pred)?;
    if let Some(g) = gold {
        merge_gold(&mut data, &dataset(g)?)?;
    }
    let report = evaluate(&data.records).map_err(Failure::data)?;
    println!("{report}");
    if let Some(p) = json {
        std::fs::write(p, report.to_json() + "\n")
            .map_err(|e| Failure::Data(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gridsearch(
    cli: &Cli,
    train: &Path,
    out: Option<&Path>,
    preferences: Option<&Vec<f64>>,
    dampings: Option<&Vec<f64>>,
    objective: Objective,
    best_config: Option<&Path>,
    args: &SettingsArgs,
) -> Result<()> {
    let cfg = args.resolve(cli.seed)?;
    let defaults = GridSpec::default();
    let grid = GridSpec {
        preferences: preferences.cloned().unwrap_or(defaults.preferences),
        dampings: dampings.cloned().unwrap_or(defaults.dampings),
        objective,
    };
    let data = dataset(train)?;
    let model = load(&cfg)?;
    let result = grid_search(&data, &model, &cfg.settings(), &grid)?;
    let mut w = output(out)?;
    result.write_csv(&mut w).map_err(Failure::data)?;
    let b = result.best;
    eprintln!(
        "best: preference={} damping={} macro_ari={:.4} weighted_ari={:.4}",
        b.preference, b.damping, b.macro_ari, b.weighted_ari
    );
    if let Some(p) = best_config {
        let mut best = cfg.clone();
        best.clustering.preference = Preference::Value(b.preference);
        best.clustering.damping = b.damping;
        // Loading resolves relative paths against the config's own directory.
        best.model.path = absolute(&best.model.path);
        best.model.frequencies = best.model.frequencies.as_deref().map(absolute);
        std::fs::write(p, best.to_toml())
            .map_err(|e| Failure::Data(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn absolute(p: &Path) -> PathBuf {
    std::fs::canonicalize(p).unwrap_or_else(|_| p.to_owned())
}

fn project(
    cli: &Cli,
    path: &Path,
    out: Option<&Path>,
    word: Option<&str>,
    run_induction: bool,
    args: &SettingsArgs,
) -> Result<()> {
    let cfg = args.resolve(cli.seed)?;
    let mut data = dataset(path)?;
    if let Some(w) = word {
        data.records.retain(|r| r.query_word == w);
        if data.records.is_empty() {
            return Err(Failure::Data(format!("no contexts for {w:?}")));
        }
    }
    let model = load(&cfg)?;
    if run_induction {
        data = induce_senses(&data, &model, &cfg.settings())?.dataset;
    }
    let mut w = output(out)?;
    let mut header = true;
    for p in prepare(&data, &model, &cfg.fingerprint) {
        let records: Vec<_> = p.records.iter().map(|&i| &data.records[i]).collect();
        let coords = if records.len() < 2 {
            ndarray::Array2::zeros((records.len(), 2))
        } else {
            project_2d(p.fingerprints.rows.view()).map_err(Failure::data)?
        };
        write_projection_csv(&records, coords.view(), &mut w, header).map_err(Failure::data)?;
        header = false;
    }
    Ok(())
}

fn inspect_model(
    path: &Path,
    format: ModelFormat,
    frequencies: Option<&Path>,
    tokens: &[String],
    kind: WeightKind,
) -> Result<()> {
    let source = ModelSource {
        path: path.to_owned(),
        format,
        frequencies: frequencies.map(Path::to_owned),
    };
    let model = source.load().map_err(Failure::data)?;
    println!("vocabulary\t{}", model.len());
    println!("dimension\t{}", model.dim());
    let norms: Vec<f64> = model
        .vectors()
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt())
        .collect();
    if !norms.is_empty() {
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        let zero = norms.iter().filter(|&&n| n == 0.0).count();
        println!("mean_norm\t{mean:.6}");
        println!("zero_vectors\t{zero}");
    }
    if let Some(table) = model.frequencies() {
        let covered = model.words().iter().filter(|w| table.get(w).is_some()).count();
        println!("frequency_entries\t{}", table.len());
        println!("vocabulary_with_frequency\t{covered}");
    }
    let scheme = wsi::WeightScheme { kind, floor: 0.0 };
    for t in tokens {
        match model.vector(t) {
            Some(v) => {
                let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
                let weight = model.token_weight(&scheme, t).map_err(Failure::data)?;
                println!("token\t{t}\tnorm={norm:.6}\tweight={weight:.6}");
            }
            None => println!("token\t{t}\tmissing"),
        }
    }
    Ok(())
}

fn make_fixture(cli: &Cli, dir: &Path, words: usize, senses: usize, contexts: usize, dim: usize, sigma: f64) -> Result<()> {
    if senses == 0 || senses > dim {
        return Err(Failure::Usage("--senses must be between 1 and --dim".into()));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Failure::Usage("--sigma must be a non-negative number".into()));
    }
    let corpus = PlantedSenses {
        query_words: words,
        n_senses: senses,
        contexts_per_word: contexts,
        dim,
        noise_sigma: sigma,
        seed: cli.seed.unwrap_or(wsi::pipeline::DEFAULT_SEED),
        ..Default::default()
    }
    .generate();
    corpus.write_to(dir).map_err(Failure::data)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Induce {
            dataset,
            output,
            summary,
            settings,
        } => induce(cli, dataset, output.as_deref(), *summary, settings),
        Command::Evaluate {
            predictions,
            gold,
            json,
        } => evaluate_cmd(predictions, gold.as_deref(), json.as_deref()),
        Command::Gridsearch {
            train,
            output,
            preferences,
            dampings,
            objective,
            best_config,
            settings,
        } => gridsearch(
            cli,
            train,
            output.as_deref(),
            preferences.as_ref(),
            dampings.as_ref(),
            *objective,
            best_config.as_deref(),
            settings,
        ),
        Command::Project {
            dataset,
            output,
            word,
            induce,
            settings,
        } => project(cli, dataset, output.as_deref(), word.as_deref(), *induce, settings),
        Command::InspectModel {
            model,
            model_format,
            frequencies,
            tokens,
            weight_scheme,
        } => inspect_model(model, *model_format, frequencies.as_deref(), tokens, *weight_scheme),
        Command::MakeFixture {
            output_dir,
            words,
            senses,
            contexts,
            dim,
            sigma,
        } => make_fixture(cli, output_dir, *words, *senses, *contexts, *dim, *sigma),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
