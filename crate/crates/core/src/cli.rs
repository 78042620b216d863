//! Command-line front end. Every subcommand reads and writes the canonical
//! file formats of [`crate::io`].

use std::collections::HashMap;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::comparator::external::{run_stub, StubMode, COMMAND_ENV};
use crate::comparator::{train, ComparatorModel, Regime, TrainConfig};
use crate::gaze::{consolidate, gold_pipeline, AlignmentConfig};
use crate::io::{self, InputFormat, LoadedDocument, OrderFile};
use crate::metrics::{evaluate_corpus, Aggregation, EvalItem};
use crate::model::ReadingSequence;
use crate::orderers::ZOrderConfig;
use crate::preorder::{order_with_strategy, PreorderOptions, Strategy, StrategyConfig};
use crate::render::{render_svg, SvgStyle};
use crate::stats::corpus_stats;
use crate::synth::{synth_corpus, Emission, SynthSpec};

#[derive(Debug, Parser)]
#[command(name = "readorder", version, about = "Reading orders for visually rich documents")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads for corpus commands (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive gold orders from gaze files.
    Align(AlignArgs),
    /// Predict reading orders with a strategy.
    Order(OrderArgs),
    /// Train the native comparator.
    Train(TrainArgs),
    /// Score predicted orders against gold orders.
    Eval(EvalArgs),
    /// Draw an order overlay as SVG.
    Render(RenderArgs),
    /// Generate a synthetic corpus with gaze.
    Synth(SynthArgs),
    /// Corpus statistics per split and subset.
    Stats(StatsArgs),
    /// Reference external comparator speaking the wire protocol on stdio.
    #[command(hide = true)]
    StubComparator(StubArgs),
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Document file, or a corpus directory with `<name>.gaze.json` beside each `<name>.json`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Gaze files for a single document; several files are consolidated.
    #[arg(long)]
    pub gaze: Vec<PathBuf>,
    /// Output document file, or directory in corpus mode.
    #[arg(long)]
    pub out: PathBuf,
    /// Peripheral radius in pixels; defaults to half the median box height.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub reach_factor: f64,
    /// Order boxes by their latest visit instead of the first.
    #[arg(long)]
    pub no_dedupe: bool,
    /// Leave unvisited boxes missing instead of attaching them to a read neighbour.
    #[arg(long)]
    pub no_repair: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    DefaultOcr,
    ZOrder,
    XyOrder,
    Model,
    ExternalModel,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::DefaultOcr => Strategy::DefaultOcr,
            StrategyArg::ZOrder => Strategy::ZOrder,
            StrategyArg::XyOrder => Strategy::XyOrder,
            StrategyArg::Model => Strategy::Model,
            StrategyArg::ExternalModel => Strategy::ExternalModel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Box,
    Text,
    #[value(name = "text_box", alias = "text-box")]
    TextBox,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Box => Regime::Box,
            RegimeArg::Text => Regime::Text,
            RegimeArg::TextBox => Regime::TextBox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Canonical,
    Doctrack,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Canonical => InputFormat::Canonical,
            FormatArg::Doctrack => InputFormat::Doctrack,
        }
    }
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    #[arg(long, value_enum, default_value = "default-ocr")]
    pub strategy: StrategyArg,
    /// Trained comparator for the `model` strategy.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Command line of an external comparator.
    #[arg(long, env = COMMAND_ENV)]
    pub external: Option<String>,
    #[arg(long, value_enum, default_value = "box")]
    pub regime: RegimeArg,
    /// Per-pair timeout for external comparators.
    #[arg(long, default_value_t = 10_000)]
    pub timeout_ms: u64,
    /// Line threshold for z-order; defaults to half the median box height.
    #[arg(long)]
    pub y_threshold: Option<f64>,
    /// Reuse comparator scores for pairs already seen.
    #[arg(long)]
    pub cache: bool,
    /// Stop after the first pass without swaps.
    #[arg(long)]
    pub early_exit: bool,
    /// Sort with O(n log n) comparisons instead of bubble passes.
    #[arg(long)]
    pub merge_sort: bool,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Document file or corpus directory.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Order file, or directory in corpus mode.
    #[arg(long)]
    pub out: PathBuf,
    /// Input file format.
    #[arg(long, value_enum, default_value = "canonical")]
    pub format: FormatArg,
    #[command(flatten)]
    pub strategy: StrategyArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus with gold orders.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Input file format.
    #[arg(long, value_enum, default_value = "canonical")]
    pub format: FormatArg,
    #[arg(long, value_enum, default_value = "box")]
    pub regime: RegimeArg,
    /// Buckets of the hashed text features.
    #[arg(long, default_value_t = 256)]
    pub hash_width: usize,
    /// Passes over the training pairs.
    #[arg(long, default_value_t = 40)]
    pub epochs: usize,
    /// Learning rate.
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    /// L2 penalty on the weights.
    #[arg(long, default_value_t = 1e-5)]
    pub l2: f64,
    /// Mini-batch size; 0 for full-batch descent.
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Keep only pairs at most this many ordinals apart.
    #[arg(long)]
    pub window: Option<usize>,
    /// Fraction of documents held out for validation.
    #[arg(long, default_value_t = 0.2)]
    pub holdout: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    Macro,
    Micro,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Document file or corpus directory with gold orders.
    #[arg(long)]
    pub gold: PathBuf,
    /// Order file or directory of `*.order.json` files.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Input file format.
    #[arg(long, value_enum, default_value = "canonical")]
    pub format: FormatArg,
    #[arg(long, value_enum, default_value = "macro")]
    pub aggregation: AggregationArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Without --pred, score this strategy's orders computed on the fly.
    #[command(flatten)]
    pub strategy: StrategyArgs,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Document file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Order file; defaults to the document's gold order, then emission order.
    #[arg(long)]
    pub order: Option<PathBuf>,
    /// SVG output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output pixels per page pixel.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    #[value(name = "normal_z", alias = "normal-z")]
    NormalZ,
    #[value(name = "local_priority", alias = "local-priority")]
    LocalPriority,
    #[value(name = "cross_modal", alias = "cross-modal")]
    CrossModal,
    #[value(name = "visual_instruction", alias = "visual-instruction")]
    VisualInstruction,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Layout and scanpath family.
    #[arg(long, value_enum, default_value = "normal_z")]
    pub pattern: PatternArg,
    /// Number of documents.
    #[arg(long, default_value_t = 10)]
    pub docs: usize,
    /// Rows of the layout.
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    /// Columns of the layout.
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    /// Standard deviation of gaze noise in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Maximum vertical offset of each box in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub row_jitter: f64,
    /// Fraction of boxes never fixated.
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    /// Regressions to earlier boxes per box read.
    #[arg(long, default_value_t = 0.0)]
    pub returns: f64,
    /// Emit boxes in gold order instead of a shuffled order.
    #[arg(long)]
    pub gold_emission: bool,
    /// Output corpus directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Document file or corpus directory.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Input file format.
    #[arg(long, value_enum, default_value = "canonical")]
    pub format: FormatArg,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct StubArgs {
    /// Reply with this constant instead of the left-of rule.
    #[arg(long)]
    pub constant: Option<f64>,
}

fn pattern_of(p: PatternArg) -> crate::gaze::ReadingPattern {
    use crate::gaze::ReadingPattern as P;
    match p {
        PatternArg::NormalZ => P::NormalZ,
        PatternArg::LocalPriority => P::LocalPriority,
        PatternArg::CrossModal => P::CrossModal,
        PatternArg::VisualInstruction => P::VisualInstruction,
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(cli)
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .context("building the worker pool")?;
    let seed = cli.seed;
    pool.install(|| match cli.command {
        Command::Align(a) => align(a),
        Command::Order(a) => order(a),
        Command::Train(a) => train_cmd(a, seed),
        Command::Eval(a) => eval(a),
        Command::Render(a) => render(a),
        Command::Synth(a) => synth_cmd(a, seed),
        Command::Stats(a) => stats(a),
        Command::StubComparator(a) => stub(a),
    })
}

fn align(args: AlignArgs) -> anyhow::Result<()> {
    let cfg = AlignmentConfig {
        periphery_radius: args.radius,
        dedupe: !args.no_dedupe,
        repair: !args.no_repair,
        repair_reach_factor: args.reach_factor,
    };
    let corpus = args.input.is_dir();
    let docs = io::ingest(&args.input, InputFormat::Canonical)?;
    let results: Vec<(LoadedDocument, ReadingSequence, f64)> = docs
        .into_par_iter()
        .map(|loaded| {
            let gaze_files = if corpus || args.gaze.is_empty() {
                vec![io::gaze_path_for(&loaded.path)]
            } else {
                args.gaze.clone()
            };
            let mut annotations = Vec::with_capacity(gaze_files.len());
            for file in &gaze_files {
                let traj = io::read_gaze(file)?;
                annotations.push(gold_pipeline(&loaded.doc, &traj, &cfg)?.sequence);
            }
            let chosen = consolidate(&annotations)?.clone();
            let rate = crate::metrics::missing_rate(&chosen, &loaded.doc).unwrap_or(0.0);
            Ok((loaded, chosen, rate))
        })
        .collect::<crate::Result<_>>()?;

    for (loaded, gold, _) in &results {
        let target = if corpus {
            args.out.join(format!("{}.json", loaded.doc.doc_id))
        } else {
            args.out.clone()
        };
        io::write_document(&target, &loaded.doc, Some(gold))?;
    }
    let mean = results.iter().map(|r| r.2).sum::<f64>() / results.len().max(1) as f64;
    eprintln!("aligned {} documents, mean missing rate {:.4}", results.len(), mean);
    Ok(())
}

fn load_model(path: &Path) -> anyhow::Result<ComparatorModel> {
    let text = io::read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("{}: not a comparator model", path.display()))
}

struct Orderer {
    strategy: Strategy,
    model: Option<ComparatorModel>,
    external: Option<String>,
    regime: Regime,
    timeout: Duration,
    z_order: ZOrderConfig,
    preorder: PreorderOptions,
}

impl Orderer {
    fn new(args: &StrategyArgs) -> anyhow::Result<Self> {
        let strategy: Strategy = args.strategy.into();
        let model = match (&args.model, strategy) {
            (Some(path), _) => Some(load_model(path)?),
            (None, Strategy::Model) => bail!("strategy `model` needs --model <file>"),
            _ => None,
        };
        if strategy == Strategy::ExternalModel && args.external.is_none() {
            bail!("strategy `external-model` needs --external <command> or {COMMAND_ENV}");
        }
        Ok(Self {
            strategy,
            regime: model.as_ref().map_or(args.regime.into(), |m| m.regime),
            model,
            external: args.external.clone(),
            timeout: Duration::from_millis(args.timeout_ms),
            z_order: ZOrderConfig {
                y_threshold: args.y_threshold,
            },
            preorder: PreorderOptions {
                cache: args.cache,
                early_exit: args.early_exit,
                merge_sort: args.merge_sort,
                log_swaps: false,
            },
        })
    }

    fn order(&self, doc: &crate::model::Document) -> crate::Result<ReadingSequence> {
        let mut model = self.model.as_ref();
        let mut cfg = StrategyConfig {
            z_order: self.z_order,
            comparator: match (&mut model, self.strategy) {
                (Some(m), Strategy::Model) => Some(m as &mut dyn crate::comparator::PairwiseComparator),
                _ => None,
            },
            external_command: self.external.clone(),
            regime: self.regime,
            timeout: self.timeout,
            preorder: self.preorder,
        };
        order_with_strategy(doc, self.strategy, &mut cfg)
    }
}

fn order(args: OrderArgs) -> anyhow::Result<()> {
    let orderer = Orderer::new(&args.strategy)?;
    let corpus = args.input.is_dir();
    let docs = io::ingest(&args.input, args.format.into())?;
    let orders: Vec<OrderFile> = docs
        .par_iter()
        .map(|loaded| {
            Ok(OrderFile {
                doc_id: loaded.doc.doc_id.clone(),
                strategy: Some(orderer.strategy.to_string()),
                order: orderer.order(&loaded.doc)?,
            })
        })
        .collect::<crate::Result<_>>()?;
    for o in &orders {
        let target = if corpus {
            args.out.join(format!("{}{}", o.doc_id, io::ORDER_SUFFIX))
        } else {
            args.out.clone()
        };
        io::write_order(&target, o)?;
    }
    eprintln!("wrote {} orders ({})", orders.len(), orderer.strategy);
    Ok(())
}

fn with_gold(docs: &[LoadedDocument]) -> anyhow::Result<Vec<(&crate::model::Document, &ReadingSequence)>> {
    docs.iter()
        .map(|d| match &d.gold {
            Some(g) => Ok((&d.doc, g)),
            None => bail!("{}: document has no gold_order", d.path.display()),
        })
        .collect()
}

fn train_cmd(args: TrainArgs, seed: u64) -> anyhow::Result<()> {
    let docs = io::ingest(&args.input, args.format.into())?;
    let corpus = with_gold(&docs)?;
    let cfg = TrainConfig {
        regime: args.regime.into(),
        hash_width: args.hash_width,
        epochs: args.epochs,
        learning_rate: args.lr,
        l2: args.l2,
        batch_size: (args.batch_size > 0).then_some(args.batch_size),
        window: args.window,
        holdout_fraction: args.holdout,
        seed,
    };
    let (model, report) = train(&corpus, &cfg)?;
    io::write_text(&args.out, &(serde_json::to_string_pretty(&model)? + "\n"))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let docs = io::ingest(&args.gold, args.format.into())?;
    let gold = with_gold(&docs)?;
    // (doc_id, strategy, order)
    let preds: Vec<(String, String, ReadingSequence)> = match &args.pred {
        Some(path) => {
            let files = if path.is_dir() {
                let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.to_string_lossy().ends_with(io::ORDER_SUFFIX))
                    .collect();
                files.sort();
                files
            } else {
                vec![path.clone()]
            };
            files
                .iter()
                .map(|f| {
                    let o = io::read_order(f)?;
                    Ok((o.doc_id, o.strategy.unwrap_or_else(|| "prediction".into()), o.order))
                })
                .collect::<crate::Result<_>>()?
        }
        None => {
            let orderer = Orderer::new(&args.strategy)?;
            gold.par_iter()
                .map(|(doc, _)| Ok((doc.doc_id.clone(), orderer.strategy.to_string(), orderer.order(doc)?)))
                .collect::<crate::Result<_>>()?
        }
    };

    let by_id: HashMap<&str, (&crate::model::Document, &ReadingSequence)> =
        gold.iter().map(|&(d, g)| (d.doc_id.as_str(), (d, g))).collect();
    let mut items = Vec::with_capacity(preds.len());
    for (doc_id, strategy, pred) in &preds {
        let &(doc, g) = by_id
            .get(doc_id.as_str())
            .with_context(|| format!("prediction for unknown document `{doc_id}`"))?;
        pred.check_against(doc)?;
        items.push(EvalItem {
            doc,
            gold: g,
            pred,
            strategy,
        });
    }
    let aggregation = match args.aggregation {
        AggregationArg::Macro => Aggregation::MacroOverDocuments,
        AggregationArg::Micro => Aggregation::MicroPooled,
    };
    let report = evaluate_corpus(&items, aggregation)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => io::write_text(path, &text)?,
        None => print!("{text}"),
    }
    let overall = report.overall();
    eprintln!(
        "documents {}  tau {}  rho {}  missing {}",
        overall.documents,
        fmt_opt(overall.tau),
        fmt_opt(overall.rho),
        fmt_opt(overall.missing_rate)
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

fn render(args: RenderArgs) -> anyhow::Result<()> {
    let loaded = io::read_document(&args.input)?;
    let seq = match &args.order {
        Some(path) => io::read_order(path)?.order,
        None => loaded
            .gold
            .clone()
            .unwrap_or_else(|| crate::orderers::default_order(&loaded.doc)),
    };
    seq.check_against(&loaded.doc)?;
    let style = SvgStyle {
        scale: args.scale,
        ..SvgStyle::default()
    };
    io::write_text(&args.out, &render_svg(&loaded.doc, &seq, &style))?;
    Ok(())
}

fn synth_cmd(args: SynthArgs, seed: u64) -> anyhow::Result<()> {
    let spec = SynthSpec {
        pattern: pattern_of(args.pattern),
        rows: args.rows,
        cols: args.cols,
        jitter_px: args.jitter,
        row_jitter_px: args.row_jitter,
        dropout_rate: args.dropout,
        return_rate: args.returns,
        emission: if args.gold_emission { Emission::Gold } else { Emission::Shuffled },
        seed,
    };
    let corpus = synth_corpus(&spec, args.docs)?;
    corpus.par_iter().try_for_each(|s| -> crate::Result<()> {
        io::write_document(args.out.join(format!("{}.json", s.doc.doc_id)), &s.doc, Some(&s.gold))?;
        io::write_gaze(args.out.join(format!("{}{}", s.doc.doc_id, io::GAZE_SUFFIX)), &s.gaze)
    })?;
    eprintln!("wrote {} documents to {}", corpus.len(), args.out.display());
    Ok(())
}

fn stats(args: StatsArgs) -> anyhow::Result<()> {
    let docs = io::ingest(&args.input, args.format.into())?;
    let stats = corpus_stats(docs.iter().map(|d| &d.doc));
    if args.json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
    } else {
        print!("{stats}");
    }
    Ok(())
}

fn stub(args: StubArgs) -> anyhow::Result<()> {
    let mode = args.constant.map_or(StubMode::LeftOf, StubMode::Constant);
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    run_stub(mode, stdin.lock(), &mut out)?;
    out.flush()?;
    Ok(())
}
