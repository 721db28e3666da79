//! Command-line interface.
//!
//! Subcommands: `train`, `test`, `classify`, `xval`, `ig-report`, `window`,
//! `lexicon`, `tag`. Exit status is 0 on success, 1 on usage errors
//! (including invalid configuration) and 2 on data errors (unreadable or
//! malformed files, corrupt models). All randomness is controlled by the
//! mandatory `--seed` of `xval`.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{train, InstanceBase, MetricChoice, MetricSpec, ModelError, TrainConfig, Weighting};
use crate::data::{parse_dataset, parse_kinds, serialize_dataset, FeatureKind, FeatureValue, Pattern};
use crate::eval::{cross_validate, evaluate, EvalError};
use crate::tasks::seqio::{parse_lexicon, parse_sequences, parse_tag_list, parse_tagged_corpus, serialize_lexicon};
use crate::tasks::{
    build_tagging_dataset, derive_lexicon, retag_corpus, tag, window_identification_all,
    window_segmentation_all, TagOutcome, TaggerConfig, TaskError,
};
use crate::weighting::gain_profile;

#[derive(Parser)]
#[command(name = "mbl", about = "Memory-based learning toolkit", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from an instance file
    Train {
        /// Training instance file
        #[arg(short, long)]
        input: PathBuf,
        /// Output model file
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        opts: TrainOpts,
    },
    /// Evaluate a model on a labelled instance file
    Test {
        /// Model file
        #[arg(short, long)]
        model: PathBuf,
        /// Test instance file
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Classify comma-separated patterns from standard input, one per line
    Classify {
        /// Model file
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Repeated random-split cross-validation (10 x 90/10)
    Xval {
        /// Instance file
        #[arg(short, long)]
        input: PathBuf,
        /// Seed for the split generator
        #[arg(long)]
        seed: u64,
        /// Emit the report as a JSON object
        #[arg(long)]
        json: bool,
        /// Draw each category's share of the test split separately
        #[arg(long)]
        stratify: bool,
        #[command(flatten)]
        opts: TrainOpts,
    },
    /// Print the per-feature information-gain profile of an instance file
    #[command(name = "ig-report")]
    IgReport {
        /// Instance file
        datafile: PathBuf,
        /// Show gains as shares summing to one
        #[arg(long)]
        normalize: bool,
        /// Per-column kinds, e.g. sym,num,tag (overrides a #kinds header)
        #[arg(long)]
        kinds: Option<String>,
    },
    /// Encode a sequence file as windowed instances on standard output
    Window {
        /// Sequence file
        seqfile: PathBuf,
        /// ident: predict each item's annotation; segment: predict
        /// boundaries; tagging: windows of ambiguous categories
        #[arg(long)]
        mode: WindowMode,
        /// Items of left context
        #[arg(long)]
        left: usize,
        /// Items of right context
        #[arg(long)]
        right: usize,
        /// Pad symbol for out-of-range positions
        #[arg(long, default_value = "_")]
        pad: String,
        /// Lexicon file (tagging mode; default: derived from the input)
        #[arg(short, long)]
        lexicon: Option<PathBuf>,
        /// Fallback tags for unknown words in tagging mode
        #[arg(long)]
        fallback: Option<String>,
    },
    /// Derive a word -> tag:count lexicon from a tagged corpus
    Lexicon {
        /// Tagged corpus (word/tag items)
        corpus: PathBuf,
    },
    /// Tag space-separated word lines from standard input
    Tag {
        /// Model file trained on a tagging dataset
        #[arg(short, long)]
        model: PathBuf,
        /// Lexicon file
        #[arg(short, long)]
        lexicon: PathBuf,
        /// Items of left context (default: centred window from the model)
        #[arg(long)]
        left: Option<usize>,
        /// Items of right context
        #[arg(long)]
        right: Option<usize>,
        /// Pad tag for sentence edges
        #[arg(long, default_value = "_")]
        pad: String,
        /// Fallback tags for unknown words, comma-separated
        /// (default: every tag in the lexicon)
        #[arg(long)]
        fallback: Option<String>,
    },
}

#[derive(Args)]
struct TrainOpts {
    /// Feature weighting: information gain or none
    #[arg(long, value_enum, default_value_t = WeightingArg::Ig)]
    weighting: WeightingArg,
    /// Metric for non-numeric features: overlap, vdm or tagset; a
    /// comma-separated list configures each feature separately
    #[arg(long)]
    metric: Option<String>,
    /// Neighbours consulted per classification
    #[arg(short, long, default_value_t = 1)]
    k: usize,
    /// Per-column kinds, e.g. sym,num,tag (overrides a #kinds header)
    #[arg(long)]
    kinds: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Ig,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowMode {
    Ident,
    Segment,
    Tagging,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(e: impl Display) -> CliError {
        CliError::Usage(e.to_string())
    }

    fn data(e: impl Display) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> CliError {
        match e {
            ModelError::BadConfig { .. } => CliError::usage(e),
            other => CliError::data(other),
        }
    }
}

impl From<crate::data::DataError> for CliError {
    fn from(e: crate::data::DataError) -> CliError {
        CliError::data(e)
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> CliError {
        match e {
            TaskError::Model(m) => m.into(),
            other => CliError::data(other),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> CliError {
        match e {
            EvalError::Model(m) => m.into(),
            other => CliError::data(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::data(e)
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

impl TrainOpts {
    fn config(&self) -> Result<TrainConfig, CliError> {
        if self.k == 0 {
            return Err(CliError::Usage("k must be at least 1".to_string()));
        }
        let metrics = match &self.metric {
            None => MetricSpec::Default,
            Some(spec) if spec.contains(',') => {
                let choices = spec
                    .split(',')
                    .map(MetricChoice::parse_token)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::usage)?;
                MetricSpec::PerFeature(choices)
            }
            Some(spec) => {
                let choice = MetricChoice::parse_token(spec).map_err(CliError::usage)?;
                if choice == MetricChoice::Numeric {
                    return Err(CliError::Usage(
                        "the numeric metric applies only to numeric columns".to_string(),
                    ));
                }
                MetricSpec::Uniform(choice)
            }
        };
        Ok(TrainConfig {
            weighting: match self.weighting {
                WeightingArg::Ig => Weighting::InformationGain,
                WeightingArg::None => Weighting::None,
            },
            metrics,
            k: self.k,
        })
    }

    fn declared_kinds(&self) -> Result<Option<Vec<FeatureKind>>, CliError> {
        match &self.kinds {
            None => Ok(None),
            Some(decl) => Ok(Some(parse_kinds(decl).map_err(CliError::usage)?)),
        }
    }
}

/// Runs the CLI against explicit streams and returns the exit status.
pub fn run<I, S>(argv: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            }
        }
    };
    let timed = matches!(
        cli.command,
        Command::Train { .. } | Command::Test { .. } | Command::Xval { .. }
    );
    let start = std::time::Instant::now();
    let outcome = dispatch(cli.command, stdin, stdout);
    if timed && outcome.is_ok() {
        let _ = writeln!(stderr, "elapsed: {:.1?}", start.elapsed());
    }
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Train { input, output, opts } => cmd_train(&input, &output, &opts, stdout),
        Command::Test { model, input } => cmd_test(&model, &input, stdout),
        Command::Classify { model } => cmd_classify(&model, stdin, stdout),
        Command::Xval {
            input,
            seed,
            json,
            stratify,
            opts,
        } => cmd_xval(&input, seed, json, stratify, &opts, stdout),
        Command::IgReport {
            datafile,
            normalize,
            kinds,
        } => cmd_ig_report(&datafile, normalize, kinds.as_deref(), stdout),
        Command::Window {
            seqfile,
            mode,
            left,
            right,
            pad,
            lexicon,
            fallback,
        } => cmd_window(
            &seqfile,
            mode,
            left,
            right,
            &pad,
            lexicon.as_deref(),
            fallback.as_deref(),
            stdout,
        ),
        Command::Lexicon { corpus } => cmd_lexicon(&corpus, stdout),
        Command::Tag {
            model,
            lexicon,
            left,
            right,
            pad,
            fallback,
        } => cmd_tag(&model, &lexicon, left, right, &pad, fallback.as_deref(), stdin, stdout),
    }
}

fn cmd_train(input: &Path, output: &Path, opts: &TrainOpts, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = opts.config()?;
    let kinds = opts.declared_kinds()?;
    let dataset = parse_dataset(&read_file(input)?, kinds.as_deref())?;
    let base = train(dataset, &config)?;
    base.save_file(output)?;
    writeln!(
        stdout,
        "stored {} instances ({} features, {} categories) in {}",
        base.instance_count(),
        base.arity(),
        base.categories().len(),
        output.display()
    )?;
    Ok(())
}

fn cmd_test(model: &Path, input: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let base = InstanceBase::load_file(model)?;
    let kinds = base.schema().kinds();
    let dataset = parse_dataset(&read_file(input)?, Some(&kinds))?;
    let report = evaluate(&base, dataset.instances())?;
    write!(stdout, "{}", report.render())?;
    writeln!(stdout)?;
    write!(stdout, "{}", report.render_confusion())?;
    Ok(())
}

fn cmd_classify(model: &Path, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<(), CliError> {
    let base = InstanceBase::load_file(model)?;
    let kinds = base.schema().kinds();
    for (i, line) in stdin.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != kinds.len() {
            return Err(CliError::data(format!(
                "stdin line {}: expected {} fields, found {}",
                i + 1,
                kinds.len(),
                fields.len()
            )));
        }
        let values = fields
            .iter()
            .zip(&kinds)
            .map(|(field, &kind)| FeatureValue::parse_field(field, kind, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        let got = base.classify(&Pattern::new(values))?;
        writeln!(stdout, "{}", got.category)?;
    }
    Ok(())
}

fn cmd_xval(
    input: &Path,
    seed: u64,
    json: bool,
    stratify: bool,
    opts: &TrainOpts,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let config = opts.config()?;
    let kinds = opts.declared_kinds()?;
    let dataset = parse_dataset(&read_file(input)?, kinds.as_deref())?;
    let report = cross_validate(&dataset, &config, seed, stratify)?;
    if json {
        writeln!(stdout, "{}", report.to_json())?;
    } else {
        write!(stdout, "{}", report.render())?;
    }
    Ok(())
}

fn cmd_ig_report(
    datafile: &Path,
    normalize: bool,
    kinds: Option<&str>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let kinds = match kinds {
        None => None,
        Some(decl) => Some(parse_kinds(decl).map_err(CliError::usage)?),
    };
    let dataset = parse_dataset(&read_file(datafile)?, kinds.as_deref())?;
    let profile = gain_profile(&dataset)?;
    write!(stdout, "{}", profile.render(normalize))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_window(
    seqfile: &Path,
    mode: WindowMode,
    left: usize,
    right: usize,
    pad: &str,
    lexicon: Option<&Path>,
    fallback: Option<&str>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let text = read_file(seqfile)?;
    let dataset = match mode {
        WindowMode::Ident => {
            let seqs = parse_sequences(&text)?;
            window_identification_all(&seqs, left, right, pad)?
        }
        WindowMode::Segment => {
            let seqs = parse_sequences(&text)?;
            window_segmentation_all(&seqs, left, right, pad)?
        }
        WindowMode::Tagging => {
            let corpus = parse_tagged_corpus(&text)?;
            let lexicon = match lexicon {
                Some(path) => parse_lexicon(&read_file(path)?)?,
                None => derive_lexicon(&corpus)?,
            };
            let fallback = match fallback {
                Some(list) => parse_tag_list(list).map_err(CliError::usage)?,
                None => lexicon.all_tags()?,
            };
            let retagged = retag_corpus(&corpus, &lexicon, &fallback);
            build_tagging_dataset(&retagged.sentences, left, right, pad)?
        }
    };
    write!(stdout, "{}", serialize_dataset(&dataset))?;
    Ok(())
}

fn cmd_lexicon(corpus: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let corpus = parse_tagged_corpus(&read_file(corpus)?)?;
    let lexicon = derive_lexicon(&corpus)?;
    write!(stdout, "{}", serialize_lexicon(&lexicon))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_tag(
    model: &Path,
    lexicon_path: &Path,
    left: Option<usize>,
    right: Option<usize>,
    pad: &str,
    fallback: Option<&str>,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let base = InstanceBase::load_file(model)?;
    let lexicon = parse_lexicon(&read_file(lexicon_path)?)?;
    let arity = base.arity();
    let (left, right) = match (left, right) {
        (Some(l), Some(r)) => (l, r),
        (Some(l), None) => (l, arity.saturating_sub(l + 1)),
        (None, Some(r)) => (arity.saturating_sub(r + 1), r),
        // Centred target by default.
        (None, None) => {
            let l = (arity - 1) / 2;
            (l, arity - 1 - l)
        }
    };
    let config = TaggerConfig {
        left,
        right,
        pad: pad.to_string(),
        fallback: match fallback {
            Some(list) => parse_tag_list(list).map_err(CliError::usage)?,
            None => lexicon.all_tags()?,
        },
    };
    for line in stdin.lines() {
        let line = line?;
        let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        let TagOutcome { tags, .. } = tag(&words, &lexicon, &base, &config)?;
        let tagged: Vec<String> = words
            .iter()
            .zip(&tags)
            .map(|(w, t)| format!("{w}/{t}"))
            .collect();
        writeln!(stdout, "{}", tagged.join(" "))?;
    }
    Ok(())
}
