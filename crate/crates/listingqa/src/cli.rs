//! Command-line interface. [`run`] returns the process exit code:
//! 0 on success, 1 on usage errors, 2 on data or validation errors.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use listingqa_core::datapipe::{extract_reply_pairs, generate_synthetic, mine_all, split, MiningConfig, SynthConfig};
use listingqa_core::evalkit::evaluate;
use listingqa_core::ranker::{Message, Model};
use listingqa_core::trainer::{build_training_vocab, finetune, from_pretrained, pretrain};

use crate::checkpoint;
use crate::configfile::{read_settings, Settings};
use crate::error::{Error, Result};
use crate::jsonl::{read_chats, read_dataset, read_listings, read_pairs, read_records, write_dataset, write_records};
use crate::scoring::{score_request, ScoreRequest};
use crate::service::{self, AppState, Catalog};
use crate::vocabfile::write_vocab;

#[derive(Debug, Parser)]
#[command(name = "listingqa", version, about = "Answer buyer questions from listing descriptions")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine labelled QA examples from chats and their listings
    Mine(MineArgs),
    /// Generate a synthetic corpus of listings and chats
    Synth(SynthArgs),
    /// Split a dataset into train and test sets by listing
    Split(SplitArgs),
    /// Pre-train on reply suggestion
    Pretrain(PretrainArgs),
    /// Fine-tune on QA examples
    Train(TrainArgs),
    /// Report accuracy of a model on a dataset
    Eval(EvalArgs),
    /// Run the HTTP scoring service
    Serve(ServeArgs),
    /// Score one question and print the ranked sentences
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct MineArgs {
    #[arg(long, env = "MQA_CHATS")]
    chats: PathBuf,
    #[arg(long, env = "MQA_LISTINGS")]
    listings: PathBuf,
    #[arg(long, env = "MQA_OUT")]
    out: PathBuf,
    /// Context messages kept before each question
    #[arg(long, default_value_t = 10, env = "MQA_MAX_HISTORY")]
    max_history: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0, env = "MQA_SEED")]
    seed: u64,
    /// Number of listings
    #[arg(long, env = "MQA_LISTINGS_COUNT")]
    listings: usize,
    #[arg(long, env = "MQA_OUT_DIR")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    questions_per_listing: usize,
    #[arg(long, default_value_t = 0.37)]
    negative_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    followup_fraction: f64,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long = "in", env = "MQA_IN")]
    input: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 0.9, env = "MQA_FRAC")]
    frac: f64,
    #[arg(long, default_value_t = 0, env = "MQA_SEED")]
    seed: u64,
}

#[derive(Debug, Args)]
struct PretrainArgs {
    #[arg(long, env = "MQA_PAIRS")]
    pairs: PathBuf,
    #[arg(long, env = "MQA_OUT")]
    out: PathBuf,
    /// Flat key = value settings file
    #[arg(long, env = "MQA_CONFIG")]
    config: Option<PathBuf>,
    /// QA examples whose text should also enter the vocabulary
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Flags {
    lstm: bool,
    attention: bool,
    context: bool,
}

fn parse_flags(s: &str) -> std::result::Result<Flags, String> {
    let mut flags = Flags::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "lstm" => flags.lstm = true,
            "attention" => flags.attention = true,
            "context" => flags.context = true,
            "none" => {}
            other => return Err(format!("unknown flag {other:?} (expected lstm, attention, context)")),
        }
    }
    Ok(flags)
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, env = "MQA_DATA")]
    data: PathBuf,
    #[arg(long, env = "MQA_DEV")]
    dev: Option<PathBuf>,
    /// Pre-trained checkpoint to start from
    #[arg(long, env = "MQA_INIT")]
    init: Option<PathBuf>,
    /// Optional encoders, comma separated: lstm,attention,context
    #[arg(long, value_parser = parse_flags, default_value = "none", env = "MQA_FLAGS")]
    flags: Flags,
    #[arg(long, env = "MQA_OUT")]
    out: PathBuf,
    #[arg(long, env = "MQA_CONFIG")]
    config: Option<PathBuf>,
    /// Write per-epoch statistics here, one JSON record per line
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, env = "MQA_MODEL")]
    model: PathBuf,
    #[arg(long, env = "MQA_DATA")]
    data: PathBuf,
    /// Append the report as one JSON record to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "MQA_MODEL")]
    model: PathBuf,
    #[arg(long, default_value_t = 8080, env = "MQA_PORT")]
    port: u16,
    #[arg(long, default_value = "127.0.0.1", env = "MQA_HOST")]
    host: String,
    /// Directory of listing files (*.jsonl) served under /v1/listings
    #[arg(long, env = "MQA_FIXTURES_DIR")]
    fixtures_dir: Option<PathBuf>,
    /// Allowed browser origin, or * for any
    #[arg(long, env = "MQA_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long, env = "MQA_MODEL")]
    model: PathBuf,
    #[arg(long)]
    question: String,
    #[arg(long, conflicts_with_all = ["description_file", "candidate"])]
    description: Option<String>,
    #[arg(long, conflicts_with = "candidate")]
    description_file: Option<PathBuf>,
    /// A candidate sentence; repeat for several
    #[arg(long)]
    candidate: Vec<String>,
    /// Earlier messages, one {"speaker", "text"} record per line
    #[arg(long)]
    history_file: Option<PathBuf>,
    /// Print the response as JSON instead of a table
    #[arg(long)]
    json: bool,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn settings(path: Option<&Path>) -> Result<Settings> {
    match path {
        Some(p) => read_settings(p),
        None => Ok(Settings::default()),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Mine(a) => {
            let chats = read_chats(&a.chats)?;
            let listings = read_listings(&a.listings)?;
            let config = MiningConfig { max_history: a.max_history, ..MiningConfig::default() };
            let (examples, skipped) = mine_all(&chats, &listings, &config);
            write_dataset(&a.out, &examples)?;
            let negatives = examples.iter().filter(|e| e.label == 0).count();
            writeln!(
                out,
                "mined {} examples ({} with answer, {negatives} without); {skipped} chats had no listing",
                examples.len(),
                examples.len() - negatives
            )
            .map_err(io_err)
        }
        Command::Synth(a) => {
            let config = SynthConfig {
                seed: a.seed,
                n_listings: a.listings,
                questions_per_listing: a.questions_per_listing,
                negative_fraction: a.negative_fraction,
                followup_fraction: a.followup_fraction,
            };
            if !(0.0..=1.0).contains(&config.negative_fraction) || !(0.0..=1.0).contains(&config.followup_fraction) {
                return Err(Error::Config("fractions must lie in [0, 1]".into()));
            }
            let corpus = generate_synthetic(&config);
            std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
            write_records(&a.out_dir.join("listings.jsonl"), &corpus.listings)?;
            write_records(&a.out_dir.join("chats.jsonl"), &corpus.chats)?;
            write_records(&a.out_dir.join("truths.jsonl"), &corpus.truths)?;
            write_records(&a.out_dir.join("pairs.jsonl"), &extract_reply_pairs(&corpus.chats))?;
            writeln!(out, "wrote {} listings and {} chats to {}", corpus.listings.len(), corpus.chats.len(), a.out_dir.display())
                .map_err(io_err)
        }
        Command::Split(a) => {
            let examples = read_dataset(&a.input)?;
            let (train, test) = split(examples, a.frac, a.seed)?;
            write_dataset(&a.train, &train)?;
            write_dataset(&a.test, &test)?;
            writeln!(out, "train {} examples, test {} examples", train.len(), test.len()).map_err(io_err)
        }
        Command::Pretrain(a) => {
            let s = settings(a.config.as_deref())?;
            let pairs = read_pairs(&a.pairs)?;
            let extra = match &a.data {
                Some(p) => read_dataset(p)?,
                None => Vec::new(),
            };
            let vocab = build_training_vocab(&extra, &pairs, &s.model)?;
            if let Some(p) = &a.vocab_out {
                write_vocab(p, &vocab)?;
            }
            let outcome = pretrain(&pairs, vocab, &s.model, &s.train)?;
            for (i, loss) in outcome.epoch_losses.iter().enumerate() {
                writeln!(out, "epoch {:>3}  loss {loss:.5}", i + 1).map_err(io_err)?;
            }
            checkpoint::save(&a.out, &outcome.model)
        }
        Command::Train(a) => {
            let s = settings(a.config.as_deref())?;
            let train = read_dataset(&a.data)?;
            let dev = match &a.dev {
                Some(p) => read_dataset(p)?,
                None => Vec::new(),
            };
            let mut config = s.model.clone();
            config.use_answer_lstm = a.flags.lstm;
            config.use_attention = a.flags.attention;
            config.use_conv_context = a.flags.context;
            let model = match &a.init {
                Some(p) => from_pretrained(&checkpoint::load(p)?, config, s.train.seed)?,
                None => Model::new(config.clone(), build_training_vocab(&train, &[], &config)?, s.train.seed)?,
            };
            if let Some(p) = &a.vocab_out {
                write_vocab(p, &model.vocab)?;
            }
            let outcome = finetune(&train, &dev, model, &s.train)?;
            for h in &outcome.history {
                let dev = h.dev_overall.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
                writeln!(out, "epoch {:>3}  loss {:.5}  dev overall {dev}", h.epoch, h.train_loss).map_err(io_err)?;
            }
            writeln!(out, "best epoch {} ({})", outcome.best_epoch, outcome.model.config.variant_name()).map_err(io_err)?;
            if let Some(p) = &a.history {
                write_records(p, &outcome.history)?;
            }
            checkpoint::save(&a.out, &outcome.model)
        }
        Command::Eval(a) => {
            let model = checkpoint::load(&a.model)?;
            let data = read_dataset(&a.data)?;
            let report = evaluate(&model, &data)?;
            write!(out, "{}", report.table()).map_err(io_err)?;
            if let Some(p) = &a.report {
                let mut f = std::fs::OpenOptions::new().create(true).append(true).open(p).map_err(|e| Error::io(p, e))?;
                serde_json::to_writer(&mut f, &report).map_err(|e| Error::io(p, e.into()))?;
                f.write_all(b"\n").map_err(|e| Error::io(p, e))?;
            }
            Ok(())
        }
        Command::Serve(a) => {
            let model = checkpoint::load(&a.model)?;
            let catalog = match &a.fixtures_dir {
                Some(d) => Catalog::load_dir(d)?,
                None => Catalog::default(),
            };
            let addr: SocketAddr = format!("{}:{}", a.host, a.port)
                .parse()
                .map_err(|_| Error::Config(format!("bad listen address {}:{}", a.host, a.port)))?;
            let state = AppState { model: Arc::new(model), catalog: Arc::new(catalog) };
            let app = service::router(state, a.cors_origin.as_deref())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
            runtime.block_on(service::serve(addr, app)).map_err(|e| Error::io(addr.to_string(), e))
        }
        Command::Score(a) => {
            let model = checkpoint::load(&a.model)?;
            let description = match (&a.description, &a.description_file) {
                (Some(d), _) => Some(d.clone()),
                (None, Some(p)) => Some(std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
                (None, None) => None,
            };
            let candidates = (description.is_none()).then(|| a.candidate.clone());
            let history: Option<Vec<Message>> = match &a.history_file {
                Some(p) => Some(read_records(p)?),
                None => None,
            };
            let request = ScoreRequest { question: a.question, description, candidates, history };
            let response = score_request(&model, &request).map_err(|e| Error::Config(e.to_string()))?;
            if a.json {
                serde_json::to_writer_pretty(&mut *out, &response).map_err(|e| io_err(e.into()))?;
                writeln!(out).map_err(io_err)
            } else {
                writeln!(out, "{:>4}  {:>8}  sentence", "rank", "prob").map_err(io_err)?;
                writeln!(out, "{:>4}  {:>8.4}  (no answer)", "-", response.no_answer_prob).map_err(io_err)?;
                for (rank, ans) in response.answers.iter().enumerate() {
                    writeln!(out, "{:>4}  {:>8.4}  [{}] {}", rank + 1, ans.prob, ans.index, ans.sentence).map_err(io_err)?;
                }
                Ok(())
            }
        }
    }
}
