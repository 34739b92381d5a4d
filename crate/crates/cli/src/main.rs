//! `citeshift`: score, rank and compare researchers from CSV corpora.

mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use citeshift::corpus::{write_corpus, CorpusError};
use citeshift::pipeline::{ranking_file, score_stage, PipelineOptions};
use citeshift::ranking::RankingError;
use citeshift::report::{
    pair_rankings, rank_scores, read_ranking, read_scores, write_comparison, write_ranking, write_scores,
    CohortRanking, ReportError, BASELINES_FILE, SCORES_FILE,
};
use citeshift::{
    compare::build_report, load_corpus, run_pipeline, write_pipeline, BylinePolicy, CohortKey, CohortKind, CorpusFiles,
    Error, ObservationConfig, Precision, ScoreVariant, SdsId, SynthSpec,
};

use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "citeshift",
    version,
    about = "Citation-impact scoring and ranking comparison"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Observation configuration (`key=value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the cohort key of the configuration.
    #[arg(long, global = true, value_enum)]
    cohort_key: Option<CohortArg>,
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
    /// Write numbers at full precision instead of table precision.
    #[arg(long, global = true)]
    full_precision: bool,
    /// Seed for synthetic generation; overrides the spec file.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CohortArg {
    Sds,
    #[value(name = "sds_and_rank")]
    SdsAndRank,
}

impl From<CohortArg> for CohortKind {
    fn from(a: CohortArg) -> Self {
        match a {
            CohortArg::Sds => CohortKind::Sds,
            CohortArg::SdsAndRank => CohortKind::SdsAndRank,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    C,
    Wc,
    Both,
}

impl VariantArg {
    fn variants(self) -> &'static [ScoreVariant] {
        match self {
            Self::C => &[ScoreVariant::C],
            Self::Wc => &[ScoreVariant::WC],
            Self::Both => &ScoreVariant::BOTH,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Alphabetical,
    Positional,
}

impl From<PolicyArg> for BylinePolicy {
    fn from(a: PolicyArg) -> Self {
        match a {
            PolicyArg::Alphabetical => BylinePolicy::Alphabetical,
            PolicyArg::Positional => BylinePolicy::Positional,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute baselines and total-impact scores of a corpus.
    Score(CorpusArgs),
    /// Rank a scores file within cohorts.
    Rank {
        #[arg(long)]
        scores: PathBuf,
        /// Keep only these SDS (repeatable).
        #[arg(long = "sds")]
        sds: Vec<String>,
    },
    /// Compare a baseline ranking with an alternative ranking.
    Compare {
        /// Baseline ranking (usually TI_C).
        #[arg(long = "c")]
        baseline: PathBuf,
        /// Alternative ranking (usually TI_WC).
        #[arg(long = "wc")]
        alternative: PathBuf,
    },
    /// Generate a synthetic corpus.
    Synth {
        /// Generator spec (`key=value` lines); defaults apply when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Run score, rank and compare in one go.
    Pipeline(CorpusArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Directory holding the five corpus CSV files.
    #[arg(long)]
    corpus_dir: PathBuf,
    /// Apply one byline policy to every SDS.
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    ReportError::Io {
        path: path.to_owned(),
        source,
    }
    .into()
}

fn usage(message: impl Into<String>) -> Error {
    CorpusError::Config(message.into()).into()
}

impl Global {
    fn precision(&self) -> Precision {
        if self.full_precision {
            Precision::Full
        } else {
            Precision::Table
        }
    }

    fn base_config(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("variant".into(), format!("{:?}", self.variant).to_lowercase());
        m.insert(
            "precision".into(),
            if self.full_precision { "full" } else { "table" }.into(),
        );
        m
    }

    fn prepare_out_dir(&self) -> Result<(), Error> {
        fs::create_dir_all(&self.out_dir).map_err(|e| io_error(&self.out_dir, e))
    }

    fn finish(
        &self,
        command: &str,
        inputs: &[PathBuf],
        config: BTreeMap<String, String>,
        outputs: &[PathBuf],
    ) -> Result<(), Error> {
        let manifest = RunManifest::new(command, inputs, config)
            .map_err(|e| io_error(&self.out_dir, e))?
            .with_outputs(&self.out_dir, outputs);
        manifest.write(&self.out_dir).map_err(|e| io_error(&self.out_dir, e))?;
        Ok(())
    }
}

struct LoadedCorpus {
    corpus: citeshift::Corpus,
    inputs: Vec<PathBuf>,
}

fn load(global: &Global, args: &CorpusArgs) -> Result<LoadedCorpus, Error> {
    let config_path = global
        .config
        .clone()
        .unwrap_or_else(|| args.corpus_dir.join(CorpusFiles::CONFIG));
    let mut config = ObservationConfig::from_file(&config_path)?;
    if let Some(kind) = global.cohort_key {
        config = config.with_cohort_kind(kind.into());
    }
    let files = CorpusFiles::in_dir(&args.corpus_dir);
    let corpus = load_corpus(&files, config)?;
    let mut inputs: Vec<PathBuf> = files.all().iter().map(|p| p.to_path_buf()).collect();
    inputs.push(config_path);
    Ok(LoadedCorpus { corpus, inputs })
}

fn corpus_config(corpus: &citeshift::Corpus, policy: Option<PolicyArg>, global: &Global) -> BTreeMap<String, String> {
    let mut m = global.base_config();
    let c = corpus.config();
    m.insert("period_start".into(), c.period_start.to_string());
    m.insert("period_end".into(), c.period_end.to_string());
    m.insert("observation_year".into(), c.observation_year.to_string());
    m.insert("cohort_key".into(), c.cohort_kind.to_string());
    if let Some(p) = policy {
        m.insert("policy_override".into(), BylinePolicy::from(p).to_string());
    }
    m
}

fn cmd_score(global: &Global, args: &CorpusArgs) -> Result<(), Error> {
    let loaded = load(global, args)?;
    let (baselines, records) = score_stage(&loaded.corpus, global.variant.variants(), args.policy.map(Into::into))?;
    global.prepare_out_dir()?;
    let baselines_path = global.out_dir.join(BASELINES_FILE);
    baselines.write_csv(&baselines_path)?;
    let scores_path = global.out_dir.join(SCORES_FILE);
    write_scores(&scores_path, &records, global.precision())?;
    let config = corpus_config(&loaded.corpus, args.policy, global);
    global.finish("score", &loaded.inputs, config, &[baselines_path, scores_path])
}

fn cohort_kind(global: &Global) -> Result<CohortKind, Error> {
    if let Some(kind) = global.cohort_key {
        return Ok(kind.into());
    }
    match &global.config {
        Some(path) => Ok(ObservationConfig::from_file(path)?.cohort_kind),
        None => Ok(CohortKind::default()),
    }
}

fn cmd_rank(global: &Global, scores: &Path, sds: &[String]) -> Result<(), Error> {
    let kind = cohort_kind(global)?;
    let mut records = read_scores(scores)?;
    if !sds.is_empty() {
        records.retain(|r| sds.contains(&r.sds_id.0));
    }
    let mut rankings: Vec<(ScoreVariant, Vec<CohortRanking>)> = Vec::new();
    for &variant in global.variant.variants() {
        if !records.iter().any(|r| r.variant == variant) {
            let key = CohortKey::sds(SdsId(sds.join(",")));
            return Err(RankingError::EmptyCohort(key).into());
        }
        rankings.push((variant, rank_scores(&records, variant, kind)?));
    }
    global.prepare_out_dir()?;
    let mut outputs = Vec::new();
    for (variant, cohorts) in &rankings {
        let path = global.out_dir.join(ranking_file(*variant));
        write_ranking(&path, cohorts, global.precision())?;
        outputs.push(path);
    }
    let mut config = global.base_config();
    config.insert("cohort_key".into(), kind.to_string());
    if !sds.is_empty() {
        config.insert("sds_filter".into(), sds.join(","));
    }
    global.finish("rank", &[scores.to_owned()], config, &outputs)
}

fn cmd_compare(global: &Global, baseline: &Path, alternative: &Path) -> Result<(), Error> {
    let c: Vec<CohortRanking> = read_ranking(baseline)?.into_values().collect();
    let wc: Vec<CohortRanking> = read_ranking(alternative)?.into_values().collect();
    let report = build_report(pair_rankings(&c, &wc)?)?;
    let outputs = write_comparison(&global.out_dir, &report, global.precision())?;
    global.finish(
        "compare",
        &[baseline.to_owned(), alternative.to_owned()],
        global.base_config(),
        &outputs,
    )
}

fn cmd_synth(global: &Global, spec_path: Option<&Path>) -> Result<(), Error> {
    let mut spec = match spec_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            SynthSpec::from_kv_str(&text)?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }
    let corpus = citeshift::generate_corpus(&spec)?;
    let files = write_corpus(&corpus, &global.out_dir)?;
    let mut outputs: Vec<PathBuf> = files.all().iter().map(|p| p.to_path_buf()).collect();
    outputs.push(global.out_dir.join(CorpusFiles::CONFIG));
    let mut config = BTreeMap::new();
    config.insert("seed".into(), spec.seed.to_string());
    let inputs: Vec<PathBuf> = spec_path.into_iter().map(Path::to_path_buf).collect();
    global.finish("synth", &inputs, config, &outputs)
}

fn cmd_pipeline(global: &Global, args: &CorpusArgs) -> Result<(), Error> {
    if global.variant != VariantArg::Both {
        return Err(usage("the pipeline compares both variants; drop --variant"));
    }
    let loaded = load(global, args)?;
    let options = PipelineOptions {
        cohort_kind: None,
        policy_override: args.policy.map(Into::into),
    };
    let out = run_pipeline(&loaded.corpus, options)?;
    let outputs = write_pipeline(&global.out_dir, &out, global.precision())?;
    let config = corpus_config(&loaded.corpus, args.policy, global);
    global.finish("pipeline", &loaded.inputs, config, &outputs)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Score(args) => cmd_score(g, args),
        Command::Rank { scores, sds } => cmd_rank(g, scores, sds),
        Command::Compare { baseline, alternative } => cmd_compare(g, baseline, alternative),
        Command::Synth { spec } => cmd_synth(g, spec.as_deref()),
        Command::Pipeline(args) => cmd_pipeline(g, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
