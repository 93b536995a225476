//! Command-line surface: `train`, `segment`, `eval`, `analyze`, `lexicon`
//! and `scales`.
//!
//! Commands write to caller-supplied streams so they can be driven from tests
//! as well as from the binary.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, evaluate, format_tau_matrix, label_feature_tau, tau_matrix, InfoVariable};
use crate::corpus::{self, parse_corpus, word_length_coverage, Sentence};
use crate::crf::{Hyper, OptimConfig, DEFAULT_L1, DEFAULT_L2};
use crate::error::{Error, Result};
use crate::features::{compute_species_scales, full_species, FeatureConfig, Scaling, Shape, SpeciesScale};
use crate::labels::LabelScheme;
use crate::lexicon::{read_lexemes, Lexicon};
use crate::model_file;
use crate::segmenter::{self, SegmenterModel, TrainConfig};

pub const DEFAULT_ALPHA: f64 = 0.325;

#[derive(Debug, Parser)]
#[command(name = "charseg", version, about = "Character-tagging word segmenter with hot-swappable lexicons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it to --model.
    Train(TrainArgs),
    /// Segment raw text lines.
    Segment(SegmentArgs),
    /// Segment a gold corpus and score the result.
    Eval(EvalArgs),
    /// Corpus and feature analysis reports.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Build and edit lexicon files.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Print the scale table stored in a model.
    Scales(ScalesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Bies,
    B23ies,
    Final,
}

impl SchemeArg {
    pub fn scheme(self) -> LabelScheme {
        match self {
            SchemeArg::Bies => LabelScheme::bies(),
            SchemeArg::B23ies => LabelScheme::b23ies(),
            SchemeArg::Final => LabelScheme::final_design(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TemplatesArg {
    Vanilla,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    None,
    Boost,
    Learned,
}

/// Training configuration.
#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Development corpus, required with --scale learned.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Output model path.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "final")]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "full")]
    pub templates: TemplatesArg,
    #[arg(long, value_enum, default_value = "none")]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_L1, allow_negative_numbers = true)]
    pub l1: f64,
    #[arg(long, default_value_t = DEFAULT_L2, allow_negative_numbers = true)]
    pub l2: f64,
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Extra lexemes added to the training lexicon.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub wc_include_char: bool,
    /// Suppress the per-iteration log.
    #[arg(long)]
    pub quiet: bool,
}

impl TrainArgs {
    /// Checks every numeric field before any work starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("--alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.l1.is_finite() && self.l1 >= 0.0) {
            return bad(format!("--l1 {} must be finite and non-negative", self.l1));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("--l2 {} must be finite and non-negative", self.l2));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("--tol {} must be positive", self.tol));
        }
        if self.max_iter == 0 {
            return bad("--max-iter must be at least 1".into());
        }
        if self.scale == ScaleArg::Learned && self.dev.is_none() {
            return bad("--scale learned requires --dev".into());
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let species = match self.templates {
            TemplatesArg::Vanilla => crate::features::vanilla_species(),
            TemplatesArg::Full => full_species(),
        };
        TrainConfig {
            scheme: self.scheme.scheme(),
            features: FeatureConfig {
                species,
                wc_include_char: self.wc_include_char,
                scaling: match self.scale {
                    ScaleArg::Boost => Scaling::Boost,
                    _ => Scaling::Unit,
                },
            },
            hyper: Hyper { l1: self.l1, l2: self.l2 },
            optim: OptimConfig { tol: self.tol, max_iter: self.max_iter, ..OptimConfig::default() },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Input text; standard input when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lexemes added to the model's lexicon for this run only.
    #[arg(long)]
    pub extra_lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Gold segmented corpus.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub extra_lexicon: Option<PathBuf>,
    /// Machine-readable key=value output.
    #[arg(long)]
    pub porcelain: bool,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Cumulative word-length coverage.
    Coverage {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_k: usize,
        #[arg(long)]
        porcelain: bool,
    },
    /// Tau between a character n-gram and the labels of a scheme.
    Tau {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "b23ies")]
        scheme: SchemeArg,
        /// Window shape such as u0, b-1, s0 or t-1 (centered trigram).
        #[arg(long, default_value = "t-1")]
        shape: String,
        /// Prefix the n-gram with the previous label.
        #[arg(long)]
        prev_label: bool,
        #[arg(long)]
        porcelain: bool,
    },
    /// Tau matrix over sentence-wise information variables.
    TauMatrix {
        #[arg(long)]
        input: PathBuf,
        /// Lexicon file; defaults to the words of --input.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Comma-separated subset of T, L_R, L_S, O, L.
        #[arg(long, default_value = "T,L_R,L_S,O,L")]
        variables: String,
        #[arg(long)]
        porcelain: bool,
    },
    /// Per-character sentence-wise information.
    Info {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        /// Treat input lines as unsegmented text.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum LexiconCommand {
    /// Collect the distinct words of a corpus.
    Build {
        #[arg(long)]
        train: PathBuf,
    },
    /// Add and remove lexemes.
    Expand {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        add: Option<PathBuf>,
        #[arg(long)]
        remove: Option<PathBuf>,
    },
    /// Print the lexicon stored in a model.
    Export {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ScalesArgs {
    #[arg(long)]
    pub model: PathBuf,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::OutOfBounds { .. } => 2,
        Error::Io(_) => 3,
        Error::Decode { .. } | Error::Format { .. } | Error::Model(_) | Error::Alignment(_) | Error::UnknownLabel(_) => 4,
        Error::NonFinite(_) | Error::Diverged(_) => 5,
        Error::EmptyInput(_) | Error::Undefined(_) => 1,
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| with_path(path, e.into()))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn load_model(path: &Path) -> Result<SegmenterModel> {
    model_file::load(path).map_err(|e| with_path(path, e))
}

fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    parse_corpus(open(path)?)
}

fn read_lexicon_file(path: &Path) -> Result<Vec<String>> {
    read_lexemes(open(path)?)
}

/// Effective lexicon for inference: the model's training lexicon plus the
/// optional extra lexemes.
fn inference_lexicon(model: &SegmenterModel, extra: Option<&Path>) -> Result<Lexicon> {
    let base = model.training_lexicon();
    match extra {
        None => Ok(base),
        Some(p) => Ok(base.expand(read_lexicon_file(p)?, Vec::<String>::new())?.0),
    }
}

/// Runs a parsed command.
pub fn run(cli: Cli, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(&args, out),
        Command::Segment(args) => cmd_segment(&args, stdin, out),
        Command::Eval(args) => cmd_eval(&args, out),
        Command::Analyze(cmd) => cmd_analyze(cmd, out),
        Command::Lexicon(cmd) => cmd_lexicon(cmd, out, err),
        Command::Scales(args) => cmd_scales(&args, out),
    }
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    args.validate()?;
    let train = read_corpus(&args.train)?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training corpus has no sentences"));
    }
    let dev = args.dev.as_deref().map(read_corpus).transpose()?;
    let extra = args.lexicon.as_deref().map(read_lexicon_file).transpose()?.unwrap_or_default();
    let lexicon = Lexicon::from_entries(train.iter().flat_map(|s| s.word_strings()).chain(extra));

    let mut config = args.train_config();
    if args.scale == ScaleArg::Learned {
        let dev = dev.as_deref().unwrap_or_default();
        writeln!(out, "computing scales for {} species", config.features.species.len())?;
        let rows = compute_species_scales(&train, dev, &lexicon, args.alpha, &config)?;
        config.features.scaling = Scaling::Learned(rows);
    }

    let quiet = args.quiet;
    let mut last = None;
    let mut log_err = None;
    let model = segmenter::train_with_lexicon(&train, &config, lexicon, &mut |it| {
        last = Some((it.iteration, it.objective));
        if !quiet && log_err.is_none() {
            if let Err(e) = writeln!(
                out,
                "iter {:>4}  objective {:.6}  |pg| {:.4e}  step {:.3e}  nonzero {}",
                it.iteration, it.objective, it.pseudo_grad_norm, it.step, it.nonzero
            ) {
                log_err = Some(e);
            }
        }
    })?;
    if let Some(e) = log_err {
        return Err(e.into());
    }
    model_file::save(&model, &args.model).map_err(|e| with_path(&args.model, e))?;
    if let Some((iters, objective)) = last {
        writeln!(out, "final objective {objective:.6} after {iters} iterations")?;
    }
    writeln!(
        out,
        "model written to {} ({} labels, {} features, {:.2}% zero weights)",
        args.model.display(),
        model.labels.len(),
        model.crf.dict.len(),
        100.0 * model.crf.zero_fraction()
    )?;
    Ok(())
}

pub fn cmd_segment(args: &SegmentArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let lexicon = inference_lexicon(&model, args.extra_lexicon.as_deref())?;
    let reader: Box<dyn BufRead + '_> = match &args.input {
        Some(p) => Box::new(open(p)?),
        None => Box::new(BufReader::new(stdin)),
    };
    let mut inputs = Vec::new();
    for (k, line) in reader.split(b'\n').enumerate() {
        let bytes = line?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Decode { line: k + 1 })?;
        let text = text.strip_suffix('\r').unwrap_or(text);
        inputs.push(text.chars().filter(|c| *c != ' ').collect::<Vec<char>>());
    }
    for result in model.segment_all(&inputs, &lexicon)? {
        match result {
            Some(s) => writeln!(out, "{s}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}

/// Segments the characters of `gold` with `model` and scores the result.
pub fn eval_report(model: &SegmenterModel, gold: &[Sentence], lexicon: &Lexicon) -> Result<analysis::EvalReport> {
    let inputs: Vec<Vec<char>> = gold.iter().map(|s| s.chars().to_vec()).collect();
    let system: Vec<Sentence> = model.segment_all(&inputs, lexicon)?.into_iter().flatten().collect();
    evaluate(gold, &system, &model.train_vocab(), &model.scheme)
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let lexicon = inference_lexicon(&model, args.extra_lexicon.as_deref())?;
    let gold = read_corpus(&args.test)?;
    let report = eval_report(&model, &gold, &lexicon)?;
    if args.porcelain {
        write!(out, "{}", report.to_porcelain())?;
    } else {
        write!(out, "{report}")?;
    }
    Ok(())
}

pub fn cmd_analyze(cmd: AnalyzeCommand, out: &mut dyn Write) -> Result<()> {
    match cmd {
        AnalyzeCommand::Coverage { input, max_k, porcelain } => {
            let table = word_length_coverage(&read_corpus(&input)?, max_k)?;
            if porcelain {
                write!(out, "{}", table.to_porcelain())?;
            } else {
                write!(out, "{table}")?;
            }
        }
        AnalyzeCommand::Tau { input, scheme, shape, prev_label, porcelain } => {
            let shape: Shape = shape.parse()?;
            let tau = label_feature_tau(&read_corpus(&input)?, &scheme.scheme(), shape, prev_label)?;
            if porcelain {
                writeln!(out, "tau={tau:.6}")?;
            } else {
                let prefix = if prev_label { "y-1 " } else { "" };
                writeln!(out, "tau({prefix}{shape} -> {}) = {tau:.5}", scheme.scheme().name())?;
            }
        }
        AnalyzeCommand::TauMatrix { input, lexicon, variables, porcelain } => {
            let corpus = read_corpus(&input)?;
            let lex = match lexicon {
                Some(p) => Lexicon::from_entries(read_lexicon_file(&p)?),
                None => Lexicon::build_from_corpus(&corpus),
            };
            let vars = variables
                .split(',')
                .map(|v| v.trim().parse())
                .collect::<Result<Vec<InfoVariable>>>()?;
            let mut records = Vec::new();
            for s in &corpus {
                records.extend(lex.sentence_info(s.chars(), Some(s))?);
            }
            let m = tau_matrix(&records, &vars)?;
            if porcelain {
                for (vx, row) in vars.iter().zip(&m) {
                    for (vy, cell) in vars.iter().zip(row) {
                        let v = cell.map_or("NA".to_string(), |t| format!("{t:.6}"));
                        writeln!(out, "tau.{}.{}={v}", vx.name(), vy.name())?;
                    }
                }
            } else {
                write!(out, "{}", format_tau_matrix(&vars, &m))?;
            }
        }
        AnalyzeCommand::Info { input, lexicon, raw } => {
            let lex = Lexicon::from_entries(read_lexicon_file(&lexicon)?);
            let mut text = String::new();
            open(&input)?.read_to_string(&mut text)?;
            writeln!(out, "{}", crate::lexicon::CharRecord::HEADER)?;
            for (k, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let records = if raw {
                    let chars: Vec<char> = line.chars().filter(|c| *c != ' ').collect();
                    lex.sentence_info(&chars, None)?
                } else {
                    let s = corpus::parse_line(line, k + 1)?;
                    lex.sentence_info(s.chars(), Some(&s))?
                };
                for r in records {
                    writeln!(out, "{}", r.to_row())?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

pub fn cmd_lexicon(cmd: LexiconCommand, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        LexiconCommand::Build { train } => {
            let lex = Lexicon::build_from_corpus(&read_corpus(&train)?);
            write!(out, "{}", lex.to_file_string())?;
        }
        LexiconCommand::Expand { lexicon, add, remove } => {
            let lex = Lexicon::from_entries(read_lexicon_file(&lexicon)?);
            let add = add.as_deref().map(read_lexicon_file).transpose()?.unwrap_or_default();
            let remove = remove.as_deref().map(read_lexicon_file).transpose()?.unwrap_or_default();
            let (next, summary) = lex.expand(add, remove)?;
            write!(out, "{}", next.to_file_string())?;
            writeln!(
                err,
                "added {}, removed {}, already present {}, not found {}",
                summary.added,
                summary.removed,
                summary.duplicates,
                summary.missing.len()
            )?;
        }
        LexiconCommand::Export { model } => {
            let model = load_model(&model)?;
            write!(out, "{}", model.training_lexicon().to_file_string())?;
        }
    }
    Ok(())
}

pub fn cmd_scales(args: &ScalesArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    match &model.features.scaling {
        Scaling::Learned(rows) => {
            writeln!(out, "{}", SpeciesScale::HEADER)?;
            for r in rows {
                writeln!(out, "{}", r.to_row())?;
            }
        }
        other => {
            writeln!(out, "species\tvalue")?;
            for sp in &model.features.species {
                writeln!(out, "{sp}\t{}", other.value(*sp))?;
            }
        }
    }
    Ok(())
}
