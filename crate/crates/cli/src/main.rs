use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use gojun::corpus::{self, FilterCriteria, Sentence};
use gojun::experiments::{self, Experiment, ExperimentConfig, ExperimentInput, Judge, Mode};
use gojun::scoring::{
    render_for, BidirectionalScorer, Direction, ExternalScorer, NGramConfig, NGramModel, ScoringError, Unit,
};
use gojun::synth::{generate_corpus_with_workers, GrammarSpec};
use gojun::transform::{self, Variant, VariantSet};
use gojun::CaseRole;

#[derive(Parser)]
#[command(name = "gojun", version, about = "Word-order preference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an n-gram model on plain-text lines or a sentence JSONL corpus.
    Train(TrainArgs),
    /// Score word-order variants and mark the preferred one.
    Compare(CompareArgs),
    /// Run one of the order-preference analyses.
    Experiment(ExperimentArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Convert CoNLL-U to the sentence JSONL format.
    ImportConllu(ConvertArgs),
    /// Keep only sentences meeting the selection criteria.
    Filter(FilterArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Char,
    Pretokenized,
}

impl From<UnitArg> for Unit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Char => Unit::Char,
            UnitArg::Pretokenized => Unit::Pretokenized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    #[value(alias = "forward")]
    Fwd,
    #[value(alias = "backward")]
    Bwd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lm,
    Count,
}

#[derive(Args)]
struct TrainArgs {
    /// Training text (one sentence per line) or `.jsonl` corpus.
    input: PathBuf,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    #[arg(long, value_enum, default_value = "char")]
    unit: UnitArg,
    #[arg(long, value_enum, default_value = "fwd")]
    direction: DirectionArg,
    #[arg(long, default_value_t = 0.75)]
    discount: f64,
    #[arg(long, default_value_t = 1)]
    unk_threshold: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScorerArgs {
    /// Forward n-gram model.
    #[arg(long, requires = "bwd", conflicts_with = "scorer_cmd")]
    fwd: Option<PathBuf>,
    /// Backward n-gram model.
    #[arg(long, requires = "fwd")]
    bwd: Option<PathBuf>,
    /// External scorer command line, spoken to over standard input/output.
    #[arg(long)]
    scorer_cmd: Option<String>,
    /// Text unit for the external scorer.
    #[arg(long, value_enum, default_value = "char")]
    unit: UnitArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Swap,
    Topicalize,
    Enumerate,
}

#[derive(Args)]
struct CompareArgs {
    /// JSONL of variants (`{"label", "sentence"}` or bare sentences), or
    /// sentences to transform with --transform.
    input: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    /// Roles exchanged by --transform swap.
    #[arg(long, value_delimiter = ',', default_value = "DAT,ACC")]
    swap: Vec<CaseRole>,
    /// Head whose dependents --transform enumerate permutes (default: root).
    #[arg(long)]
    site: Option<usize>,
    #[arg(long, default_value_t = gojun::scoring::DEFAULT_TIE_EPSILON)]
    tie_epsilon: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_parser = experiment_parser())]
    name: Experiment,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Annotated preference pairs (human-agreement).
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[command(flatten)]
    scorer: ScorerArgs,
    /// JSON experiment configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tie_epsilon: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_delimiter = ',')]
    show_verbs: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pass_verbs: Option<Vec<String>>,
    /// Also write SVG scatter plots.
    #[arg(long)]
    plots: bool,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON grammar spec; the built-in five-role grammar when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, short)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    input: PathBuf,
    /// JSON filter criteria; the defaults when omitted.
    #[arg(long)]
    criteria: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn experiment_parser() -> impl TypedValueParser<Value = Experiment> {
    PossibleValuesParser::new(Experiment::ALL.map(Experiment::name))
        .map(|s| s.parse::<Experiment>().expect("restricted to known names"))
}

/// Distinguishes bad invocations (exit 2) from data and runtime failures
/// (exit 1).
enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(a) => train(a),
        Command::Compare(a) => compare(a),
        Command::Experiment(a) => experiment(a),
        Command::Synth(a) => synth(a),
        Command::ImportConllu(a) => import_conllu(a),
        Command::Filter(a) => filter(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_corpus(path: &Path) -> Result<Vec<Sentence>> {
    Ok(corpus::load_jsonl(path)?)
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn write_corpus(path: &Path, sentences: &[Sentence]) -> anyhow::Result<()> {
    let mut w = create(path)?;
    corpus::write_jsonl(&mut w, sentences)?;
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

fn train(a: TrainArgs) -> Result<()> {
    let config = NGramConfig {
        order: a.order as usize,
        unit: a.unit.into(),
        direction: match a.direction {
            DirectionArg::Fwd => Direction::Forward,
            DirectionArg::Bwd => Direction::Backward,
        },
        discount: a.discount,
        unk_threshold: a.unk_threshold,
    };
    if !(0.0..1.0).contains(&config.discount) {
        return usage(format!("--discount must lie in [0, 1), got {}", config.discount));
    }
    let lines: Vec<String> = if is_jsonl(&a.input) {
        load_corpus(&a.input)?.iter().map(|s| render_for(config.unit, s)).collect()
    } else {
        let file = File::open(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
        BufReader::new(file)
            .lines()
            .collect::<io::Result<_>>()
            .with_context(|| format!("cannot read {}", a.input.display()))?
    };
    let model = NGramModel::train(&lines, config).map_err(anyhow::Error::from)?;
    model.save(&a.out).map_err(anyhow::Error::from)?;
    eprintln!("trained {}-gram model on {} lines -> {}", config.order, lines.len(), a.out.display());
    Ok(())
}

fn build_scorer(a: &ScorerArgs) -> Result<BidirectionalScorer> {
    match (&a.fwd, &a.bwd, &a.scorer_cmd) {
        (Some(f), Some(b), None) => {
            let load = |p: &Path| NGramModel::load(p).with_context(|| format!("cannot load model {}", p.display()));
            let scorer = BidirectionalScorer::from_models(load(f)?, load(b)?);
            Ok(scorer.map_err(anyhow::Error::from)?)
        }
        (None, None, Some(cmd)) => {
            let mut parts = cmd.split_whitespace().map(str::to_string);
            let Some(program) = parts.next() else {
                return usage("--scorer-cmd is empty");
            };
            let args: Vec<String> = parts.collect();
            let client = ExternalScorer::spawn(&program, &args, gojun::scoring::DEFAULT_TIMEOUT)
                .map_err(|e: ScoringError| anyhow!(e))?;
            Ok(BidirectionalScorer::external(Arc::new(client), a.unit.into()).map_err(anyhow::Error::from)?)
        }
        _ => usage("a scorer is required: --fwd and --bwd models, or --scorer-cmd"),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VariantLine {
    Labeled { label: String, sentence: Sentence },
    Bare(Sentence),
}

fn read_variants(path: &Path) -> Result<VariantSet> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut variants = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: VariantLine =
            serde_json::from_str(&line).with_context(|| format!("{}: line {}", path.display(), i + 1))?;
        variants.push(match v {
            VariantLine::Labeled { label, sentence } => Variant::new(label, sentence),
            VariantLine::Bare(s) => Variant::new(s.id.clone(), s),
        });
    }
    let Some(base) = variants.first().map(|v| v.sentence.clone()) else {
        return Err(anyhow!("{}: no variants", path.display()).into());
    };
    Ok(VariantSet::new(base, variants).map_err(|e| anyhow!(e))?)
}

fn transformed(s: &Sentence, a: &CompareArgs, t: TransformArg) -> anyhow::Result<VariantSet> {
    let set = match t {
        TransformArg::Swap => {
            let [x, y] = a.swap[..] else {
                anyhow::bail!("--swap takes exactly two roles");
            };
            let swapped = transform::swap_cases(s, x, y)?;
            VariantSet::new(
                s.clone(),
                vec![Variant::new("original", s.clone()), Variant::new("swapped", swapped)],
            )?
        }
        TransformArg::Topicalize => {
            let variants = ExperimentConfig::default()
                .canonical_order
                .into_iter()
                .filter_map(|r| transform::topicalize(s, r).ok().map(|t| Variant::new(r.as_str(), t)))
                .collect();
            VariantSet::new(s.clone(), variants)?
        }
        TransformArg::Enumerate => {
            transform::enumerate_orders(s, a.site.unwrap_or_else(|| s.root()), transform::DEFAULT_ORDER_CAP)?
        }
    };
    Ok(set)
}

fn compare(a: CompareArgs) -> Result<()> {
    let sets: Vec<(String, VariantSet)> = match a.transform {
        None => {
            let set = read_variants(&a.input)?;
            vec![(set.base.id.clone(), set)]
        }
        Some(t) => load_corpus(&a.input)?
            .iter()
            .map(|s| transformed(s, &a, t).map(|set| (s.id.clone(), set)).with_context(|| format!("sentence {}", s.id)))
            .collect::<anyhow::Result<_>>()?,
    };
    let scorer = build_scorer(&a.scorer)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let write = |out: &mut io::StdoutLock, line: String| writeln!(out, "{line}").context("cannot write to standard output");
    write(&mut out, "id\tlabel\tfwd\tbwd\tcombined\twinner".into())?;
    for (id, set) in sets {
        let result = scorer.compare(&set, a.tie_epsilon).map_err(anyhow::Error::from)?;
        for v in &result.variants {
            let mark = match result.winner.label() {
                None => "TIE",
                Some(l) if l == v.label => "*",
                Some(_) => "",
            };
            write(
                &mut out,
                format!("{id}\t{}\t{}\t{}\t{}\t{mark}", v.label, v.forward_logp, v.backward_logp, v.combined_logp()),
            )?;
        }
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::Lm => Mode::Lm,
            ModeArg::Count => Mode::Count,
        };
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = a.tie_epsilon {
        cfg.tie_epsilon = eps;
    }
    if let Some(v) = a.show_verbs.clone() {
        cfg.show_verbs = v;
    }
    if let Some(v) = a.pass_verbs.clone() {
        cfg.pass_verbs = v;
    }
    cfg.workers = a.workers.max(1);

    let corpus = match (&a.corpus, a.name) {
        (Some(p), _) => load_corpus(p)?,
        (None, Experiment::HumanAgreement) => Vec::new(),
        (None, name) => return usage(format!("experiment {name} needs --corpus")),
    };
    let pairs = match (&a.pairs, a.name) {
        (Some(p), _) => corpus::load_preference_pairs(p)?,
        (None, Experiment::HumanAgreement) => return usage("human-agreement needs --pairs"),
        (None, _) => Vec::new(),
    };
    let scorer = match cfg.mode {
        Mode::Lm => Some(build_scorer(&a.scorer)?),
        Mode::Count => None,
    };
    let judge = scorer.as_ref().map_or(Judge::Count, Judge::Lm);
    let input = ExperimentInput {
        corpus: &corpus,
        pairs: &pairs,
        cooccurrence: None,
    };
    let report = experiments::run(a.name, input, judge, &cfg).map_err(|e| anyhow!("{}: {e}", e.code()))?;

    let written = report
        .write_dir(&a.out, a.plots)
        .with_context(|| format!("cannot write report to {}", a.out.display()))?;
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let run = json!({
        "experiment": a.name.name(),
        "corpus": path(&a.corpus),
        "pairs": path(&a.pairs),
        "fwd": path(&a.scorer.fwd),
        "bwd": path(&a.scorer.bwd),
        "scorer_cmd": a.scorer.scorer_cmd,
        "unit": scorer.as_ref().map(|s| s.unit()),
        "config": report.config,
    });
    let mut w = create(&a.out.join("run.json"))?;
    serde_json::to_writer_pretty(&mut w, &run).context("cannot write run.json")?;
    writeln!(w).and_then(|_| w.flush()).context("cannot write run.json")?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str::<GrammarSpec>(&text).with_context(|| format!("invalid grammar spec {}", p.display()))?
        }
        None => GrammarSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if a.n == 0 {
        return usage("-n must be at least 1");
    }
    let corpus = generate_corpus_with_workers(&spec, a.n, a.workers).map_err(|e| anyhow!(e))?;
    write_corpus(&a.out, &corpus)?;
    Ok(())
}

fn import_conllu(a: ConvertArgs) -> Result<()> {
    let sentences = corpus::import_conllu(&a.input)?;
    write_corpus(&a.out, &sentences)?;
    eprintln!("imported {} sentences", sentences.len());
    Ok(())
}

fn filter(a: FilterArgs) -> Result<()> {
    let criteria: FilterCriteria = match &a.criteria {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid criteria {}", p.display()))?
        }
        None => FilterCriteria::default(),
    };
    let sentences = load_corpus(&a.input)?;
    let kept = corpus::filter_sentences(&sentences, &criteria);
    write_corpus(&a.out, &kept)?;
    eprintln!("kept {} of {} sentences", kept.len(), sentences.len());
    Ok(())
}
