use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use segaug::align::{write_pharaoh_file, BidirectionalModel, Heuristic};
use segaug::augment::{export_partials, extract_corpus, AugmentConfig, AugmentationMode};
use segaug::backtranslate::{TranslatorArg, TranslatorSpec};
use segaug::corpus::{Joiner, Lang};
use segaug::pipeline::{
    load_corpus, obtain_alignments, parse_opt, AlignmentSource, FileConfig, InputConfig, InputFiles, PipelineConfig,
    PipelineError, Stage,
};
use segaug::report::corpus_stats_with;
use segaug::segment::{RateDenominator, SegmenterConfig};
use segaug::tokenizer::{DelimiterSet, Tokenizer};

#[derive(Parser)]
#[command(name = "segaug", version, about = "Parallel-corpus augmentation by long-sentence segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate augmented corpora.
    Augment(AugmentArgs),
    /// Train IBM Model 1 in both directions and write the tables.
    TrainAlign(TrainArgs),
    /// Export the aligned partial pairs of long sentence pairs.
    ExtractPartials(ExtractArgs),
    /// Print corpus statistics as JSON.
    Stats(StatsArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Source side, one sentence per line.
    #[arg(long, requires = "tgt", conflicts_with = "tsv")]
    src: Option<PathBuf>,
    /// Target side, line-aligned with --src.
    #[arg(long, requires = "src")]
    tgt: Option<PathBuf>,
    /// Single `source<TAB>target` file instead of --src/--tgt.
    #[arg(long)]
    tsv: Option<PathBuf>,
    #[arg(long)]
    src_lang: Option<String>,
    #[arg(long)]
    tgt_lang: Option<String>,
    /// pre | whitespace | chars
    #[arg(long)]
    src_tokenizer: Option<String>,
    #[arg(long)]
    tgt_tokenizer: Option<String>,
    /// space | none
    #[arg(long)]
    src_joiner: Option<String>,
    #[arg(long)]
    tgt_joiner: Option<String>,
    /// Comma-separated delimiters; `U+XXXX` for code points.
    #[arg(long)]
    delims: Option<String>,
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// Pharaoh alignment file, one line per pair.
    #[arg(long, conflicts_with = "train_align")]
    align: Option<PathBuf>,
    /// Train IBM Model 1 on the corpus instead of reading alignments.
    #[arg(long)]
    train_align: bool,
    #[arg(long)]
    iters: Option<usize>,
    /// intersection | union | grow-diag-final
    #[arg(long)]
    heuristic: Option<String>,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    min_segments: Option<usize>,
    /// aligned | all
    #[arg(long)]
    rate_denominator: Option<String>,
}

#[derive(Args)]
struct AugmentArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    align: AlignArgs,
    #[command(flatten)]
    segment: SegmentArgs,
    /// baseline | copied | partial | backtrans | proposed (repeatable)
    #[arg(long = "mode", required = true)]
    modes: Vec<AugmentationMode>,
    /// cmd:"..." | http:URL | mock-identity | mock-dict:FILE
    #[arg(long)]
    translator: Option<String>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Per-batch timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// HTTP batches in flight.
    #[arg(long)]
    concurrency: Option<usize>,
    /// Retry each failed batch once.
    #[arg(long)]
    retry: bool,
    /// Translate repeated partials every time.
    #[arg(long)]
    no_cache: bool,
    /// Keep pseudo pairs identical to an existing pair.
    #[arg(long)]
    keep_duplicates: bool,
    /// Include per-pair accounting in the report.
    #[arg(long)]
    per_pair: bool,
    /// Outputs go to `{prefix}{mode}.{lang}`.
    #[arg(long)]
    out_prefix: String,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Directory for alignments, Model 1 tables and partials.
    #[arg(long)]
    intermediates: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    heuristic: Option<String>,
    /// Table of t(target | source).
    #[arg(long)]
    out: PathBuf,
    /// Table of t(source | target).
    #[arg(long)]
    reverse_out: Option<PathBuf>,
    /// Symmetrized alignments in Pharaoh format.
    #[arg(long)]
    align_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    align: AlignArgs,
    #[command(flatten)]
    segment: SegmentArgs,
    /// Source and target output files.
    #[arg(long, num_args = 2, value_names = ["SRC", "TGT"])]
    out: Vec<PathBuf>,
    /// `pair_id<TAB>src_span<TAB>tgt_span` file; defaults to SRC.tsv.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    min_segments: Option<usize>,
}

fn config_err(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::config(e.to_string())
}

fn first<T>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

impl CorpusArgs {
    fn file_config(&self) -> Result<FileConfig, PipelineError> {
        match &self.config {
            Some(path) => FileConfig::load(path),
            None => Ok(FileConfig::default()),
        }
    }

    fn input(&self, file: &FileConfig) -> Result<InputConfig, PipelineError> {
        let files = match (&self.src, &self.tgt, &self.tsv) {
            (Some(s), Some(t), None) => InputFiles::Parallel {
                source: s.clone(),
                target: t.clone(),
            },
            (None, None, Some(p)) => InputFiles::Tsv(p.clone()),
            _ => return Err(config_err("give either --src and --tgt, or --tsv")),
        };
        let tokenizer = |cli: &Option<String>, file: &Option<String>| -> Result<Tokenizer, PipelineError> {
            Ok(first(parse_opt(cli)?, parse_opt(file)?, Tokenizer::default()))
        };
        let joiner = |cli: &Option<String>, file: &Option<String>| -> Result<Joiner, PipelineError> {
            Ok(first(parse_opt(cli)?, parse_opt(file)?, Joiner::Space))
        };
        let delimiters = match &self.delims {
            Some(list) => DelimiterSet::parse_list(list).map_err(config_err)?,
            None => file.delimiter_set()?.unwrap_or_default(),
        };
        let lang = |cli: &Option<String>, file: &Option<String>, default: &str| {
            Lang::new(first(cli.clone(), file.clone(), default.to_string()))
        };
        Ok(InputConfig {
            files,
            source_lang: lang(&self.src_lang, &file.src_lang, "src"),
            target_lang: lang(&self.tgt_lang, &file.tgt_lang, "tgt"),
            source_tokenizer: tokenizer(&self.src_tokenizer, &file.src_tokenizer)?,
            target_tokenizer: tokenizer(&self.tgt_tokenizer, &file.tgt_tokenizer)?,
            source_joiner: joiner(&self.src_joiner, &file.src_joiner)?,
            target_joiner: joiner(&self.tgt_joiner, &file.tgt_joiner)?,
            delimiters,
        })
    }
}

fn heuristic(cli: &Option<String>, file: &FileConfig) -> Result<Heuristic, PipelineError> {
    Ok(first(parse_opt(cli)?, parse_opt(&file.heuristic)?, Heuristic::default()))
}

const DEFAULT_ITERS: usize = 5;

impl AlignArgs {
    fn source(&self, file: &FileConfig) -> Result<AlignmentSource, PipelineError> {
        match (&self.align, self.train_align) {
            (Some(path), false) => Ok(AlignmentSource::Pharaoh(path.clone())),
            (None, true) => Ok(AlignmentSource::Train {
                iterations: first(self.iters, file.iters, DEFAULT_ITERS),
                heuristic: heuristic(&self.heuristic, file)?,
            }),
            _ => Err(config_err("give either --align FILE or --train-align")),
        }
    }
}

impl SegmentArgs {
    fn config(&self, file: &FileConfig) -> Result<SegmenterConfig, PipelineError> {
        let defaults = SegmenterConfig::default();
        let cfg = SegmenterConfig {
            theta: first(self.theta, file.theta, defaults.theta),
            min_segments: first(self.min_segments, file.min_segments, defaults.min_segments),
            denominator: first(
                parse_opt::<RateDenominator>(&self.rate_denominator)?,
                file.rate_denominator()?,
                defaults.denominator,
            ),
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

fn augment(args: AugmentArgs) -> Result<(), PipelineError> {
    let file = args.corpus.file_config()?;
    let translator = match args.translator.as_ref().or(file.translator.as_ref()) {
        None => None,
        Some(arg) => {
            let kind = arg
                .parse::<TranslatorArg>()
                .and_then(TranslatorArg::into_kind)
                .map_err(|e| PipelineError::new(Stage::Config, e))?;
            let defaults = TranslatorSpec::new(kind);
            let timeout = match args.timeout {
                Some(s) => Some(Duration::try_from_secs_f64(s).map_err(|e| config_err(format!("--timeout: {e}")))?),
                None => file.timeout()?,
            };
            Some(TranslatorSpec {
                batch_size: first(args.batch_size, file.batch_size, defaults.batch_size),
                timeout: timeout.unwrap_or(defaults.timeout),
                concurrency: first(args.concurrency, file.concurrency, defaults.concurrency),
                retry: args.retry || file.retry.unwrap_or(false),
                ..defaults
            })
        }
    };
    let cfg = PipelineConfig {
        input: args.corpus.input(&file)?,
        alignment: args.align.source(&file)?,
        augment: AugmentConfig {
            segmenter: args.segment.config(&file)?,
            keep_duplicates: args.keep_duplicates || file.keep_duplicates.unwrap_or(false),
            per_pair: args.per_pair,
        },
        modes: args.modes,
        translator,
        use_cache: !(args.no_cache || file.no_cache.unwrap_or(false)),
        out_prefix: args.out_prefix,
        report: args.report,
        intermediates: args.intermediates,
    };
    let report = segaug::run_pipeline(&cfg)?;
    for run in &report.runs {
        let mode = run.mode.map(|m| m.to_string()).unwrap_or_default();
        eprintln!(
            "{mode}: {} pairs ({} added, {} duplicates dropped, {} failures)",
            run.total_pairs, run.pseudo_pairs_emitted, run.duplicates_dropped, run.failures
        );
    }
    Ok(())
}

fn train_align(args: TrainArgs) -> Result<(), PipelineError> {
    let file = args.corpus.file_config()?;
    let corpus = load_corpus(&args.corpus.input(&file)?)?;
    let iters = first(args.iters, file.iters, DEFAULT_ITERS);
    let heuristic = heuristic(&args.heuristic, &file)?;
    let model = BidirectionalModel::train(&corpus, iters).map_err(|e| PipelineError::new(Stage::Align, e))?;
    let write = |e| PipelineError::new(Stage::Write, e);
    model.forward.write_tsv(&args.out).map_err(write)?;
    if let Some(path) = &args.reverse_out {
        model.reverse.write_tsv(path).map_err(write)?;
    }
    if let Some(path) = &args.align_out {
        write_pharaoh_file(path, &model.align_corpus(&corpus, heuristic))
            .map_err(|e| PipelineError::new(Stage::Write, e))?;
    }
    Ok(())
}

fn sidecar_default(src: &Path) -> PathBuf {
    let mut name = src.as_os_str().to_owned();
    name.push(".tsv");
    PathBuf::from(name)
}

fn extract(args: ExtractArgs) -> Result<(), PipelineError> {
    let file = args.corpus.file_config()?;
    let input = args.corpus.input(&file)?;
    let segmenter = args.segment.config(&file)?;
    let [src_out, tgt_out] = &args.out[..] else {
        return Err(config_err("--out needs a source and a target path"));
    };
    let corpus = load_corpus(&input)?;
    let alignments = obtain_alignments(&corpus, &args.align.source(&file)?, None)?;
    let extraction =
        extract_corpus(&corpus, &alignments, &segmenter).map_err(|e| PipelineError::new(Stage::Extract, e))?;
    let sidecar = args.sidecar.clone().unwrap_or_else(|| sidecar_default(src_out));
    let written = export_partials(
        &extraction.partials,
        src_out,
        tgt_out,
        &sidecar,
        input.source_joiner,
        input.target_joiner,
    )
    .map_err(|e| PipelineError::new(Stage::Write, e))?;
    eprintln!(
        "{written} partial pairs from {} long pairs ({} pairs read)",
        extraction.long_pairs,
        corpus.len()
    );
    Ok(())
}

fn stats(args: StatsArgs) -> Result<(), PipelineError> {
    let file = args.corpus.file_config()?;
    let corpus = load_corpus(&args.corpus.input(&file)?)?;
    let cfg = SegmenterConfig {
        min_segments: first(args.min_segments, file.min_segments, 2),
        ..SegmenterConfig::default()
    };
    cfg.validate().map_err(config_err)?;
    println!("{}", corpus_stats_with(&corpus, &cfg).to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Augment(a) => augment(a),
        Command::TrainAlign(a) => train_align(a),
        Command::ExtractPartials(a) => extract(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("segaug: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
