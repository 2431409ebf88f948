//! Command-line front end for the attribution pipeline.
//!
//! Exit codes: 0 success, 1 input/config validation failure, 2 every grid
//! cell failed, 3 model/vocabulary hash mismatch, 64 usage error. Every
//! command is a pure function of its flags and input files; all randomness
//! flows from explicit seeds.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use chatstylo::classifiers::{
    default_m_try, vocab_hash, ClassifierKind, ConditionalTreeModel, LinearSvmModel, ModelContainer,
    NaiveBayesModel, RandomForestModel, TrainedModel,
};
use chatstylo::config::FlatConfig;
use chatstylo::eval::{confusion, format_metric, report};
use chatstylo::experiment::{
    best_cells, classifier_label, render_results_csv, render_tables_markdown, run_grid, split,
    token_label, weight_label, CellOutcome, GridConfig,
};
use chatstylo::features::{
    doc_row, top_distinctive_terms, vectorize, NGramSpec, Vocabulary, WeightScheme,
};
use chatstylo::ingest::{chunk_messages, parse_jsonl, parse_whatsapp, Corpus, FormatHint};
use chatstylo::synthgen::{default_profiles, generate, profiles_from_config, SeparabilityDial};

const EXIT_VALIDATION: u8 = 1;
const EXIT_GRID_ALL_FAILED: u8 = 2;
const EXIT_HASH_MISMATCH: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "chatstylo",
    version,
    about = "Authorship attribution for short chat texts: n-gram features, four classifiers, reproducible grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Bracketed,
    Dashed,
}

impl From<FormatArg> for FormatHint {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Auto => FormatHint::Auto,
            FormatArg::Bracketed => FormatHint::Bracketed,
            FormatArg::Dashed => FormatHint::Dashed,
        }
    }
}

fn parse_token(text: &str) -> Result<NGramSpec, String> {
    NGramSpec::parse(text)
        .map_err(|_| format!("expected one of word1, word2, char3, char4, char5; got {text:?}"))
}

fn parse_scheme(text: &str) -> Result<WeightScheme, String> {
    WeightScheme::parse(text).ok_or_else(|| format!("expected tf, tfidf, or binary; got {text:?}"))
}

fn parse_classifier(text: &str) -> Result<ClassifierKind, String> {
    ClassifierKind::parse(text).ok_or_else(|| format!("expected nb, svm, ctree, or rf; got {text:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Parse a WhatsApp export or labeled JSONL into canonical corpus JSONL
    #[command(group(ArgGroup::new("source").required(true).args(["whatsapp", "jsonl"])))]
    Ingest {
        /// WhatsApp .txt export (bracketed or dashed line grammar)
        #[arg(long)]
        whatsapp: Option<PathBuf>,
        /// JSONL with string fields `author` and `text`
        #[arg(long)]
        jsonl: Option<PathBuf>,
        /// Line grammar for --whatsapp
        #[arg(long, value_enum, default_value = "auto")]
        format: FormatArg,
        /// Words per document when chunking WhatsApp messages
        #[arg(long, default_value_t = 100)]
        target_words: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic multi-author corpus
    Synth {
        /// Author profiles file; omitted = built-in four-author pack
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        docs_per_author: usize,
        #[arg(long, default_value_t = 100)]
        words_per_doc: usize,
        /// 0 = authors share variant spellings, 1 = each keeps their own
        #[arg(long, default_value_t = 1.0)]
        skew: f64,
        /// 1 = base vocabularies fully shared, 0 = authors keep their own
        #[arg(long, default_value_t = 1.0)]
        overlap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the document-term matrix and vocabulary for a corpus
    Featurize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = parse_token, default_value = "word1")]
        token: NGramSpec,
        #[arg(long, value_parser = parse_scheme, default_value = "tf")]
        scheme: WeightScheme,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
        #[arg(long)]
        keep_case: bool,
        #[arg(long)]
        out_matrix: PathBuf,
        #[arg(long)]
        out_vocab: PathBuf,
    },
    /// Train one classifier and write the model + vocabulary files
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = parse_classifier)]
        classifier: ClassifierKind,
        #[arg(long, value_parser = parse_token, default_value = "word1")]
        token: NGramSpec,
        #[arg(long, value_parser = parse_scheme, default_value = "binary")]
        scheme: WeightScheme,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
        #[arg(long)]
        keep_case: bool,
        /// Naive Bayes smoothing
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// SVM regularization
        #[arg(long, default_value_t = 1e-4)]
        lambda: f64,
        /// SVM training epochs
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        /// Conditional-tree significance level
        #[arg(long, default_value_t = 0.05)]
        alpha_sig: f64,
        /// Conditional-tree minimum node size
        #[arg(long, default_value_t = 7)]
        min_node: usize,
        /// Forest size
        #[arg(long, default_value_t = 100)]
        ntree: usize,
        /// Features per forest split; 0 = floor(sqrt(n_terms))
        #[arg(long, default_value_t = 0)]
        mtry: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace the forest bootstrap with the identity sample (test hook)
        #[arg(long)]
        no_bootstrap: bool,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_vocab: PathBuf,
    },
    /// Predict authors for a corpus with a trained model
    Predict {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a predictions CSV against gold labels
    Eval {
        /// Predictions CSV written by `predict`
        #[arg(long)]
        pred: PathBuf,
        /// Gold corpus JSONL, aligned with the predictions row for row
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Run the full weight x token x classifier x test grid
    Grid {
        #[arg(long)]
        corpus: PathBuf,
        /// Flat key = value config; omitted = defaults
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Rank each author's most distinctive terms
    Distinctive {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = parse_token, default_value = "word1")]
        token: NGramSpec,
        #[arg(long, value_parser = parse_scheme, default_value = "tf")]
        scheme: WeightScheme,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
        #[arg(long)]
        keep_case: bool,
    },
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_VALIDATION,
        }
    }

    fn hash_mismatch(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_HASH_MISMATCH,
        }
    }
}

macro_rules! impl_validation_error {
    ($($ty:ty),+) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::validation(e.to_string())
            }
        }
    )+};
}
impl_validation_error!(
    chatstylo::ingest::IngestError,
    chatstylo::features::FeatureError,
    chatstylo::classifiers::ClassifierError,
    chatstylo::eval::EvalError,
    chatstylo::experiment::ExperimentError,
    chatstylo::synthgen::SynthError,
    chatstylo::config::ConfigError
);

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    let corpus = Corpus::from_jsonl(&read_file(path)?)?;
    if corpus.is_empty() {
        return Err(CliError::validation(format!(
            "{}: corpus has no documents",
            path.display()
        )));
    }
    Ok(corpus)
}

fn require_multiple_authors(corpus: &Corpus, path: &Path) -> Result<(), CliError> {
    if corpus.authors().len() < 2 {
        return Err(CliError::validation(format!(
            "{}: corpus has {} author(s); at least 2 are required",
            path.display(),
            corpus.authors().len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Ingest {
            whatsapp,
            jsonl,
            format,
            target_words,
            out,
        } => cmd_ingest(whatsapp, jsonl, format, target_words, &out),
        Command::Synth {
            profiles,
            docs_per_author,
            words_per_doc,
            skew,
            overlap,
            seed,
            out,
        } => cmd_synth(profiles, docs_per_author, words_per_doc, skew, overlap, seed, &out),
        Command::Featurize {
            corpus,
            token,
            scheme,
            min_df,
            keep_case,
            out_matrix,
            out_vocab,
        } => cmd_featurize(&corpus, token, scheme, min_df, keep_case, &out_matrix, &out_vocab),
        Command::Train {
            corpus,
            classifier,
            token,
            scheme,
            min_df,
            keep_case,
            alpha,
            lambda,
            epochs,
            alpha_sig,
            min_node,
            ntree,
            mtry,
            seed,
            no_bootstrap,
            out_model,
            out_vocab,
        } => cmd_train(TrainArgs {
            corpus,
            classifier,
            token,
            scheme,
            min_df,
            keep_case,
            alpha,
            lambda,
            epochs,
            alpha_sig,
            min_node,
            ntree,
            mtry,
            seed,
            no_bootstrap,
            out_model,
            out_vocab,
        }),
        Command::Predict {
            corpus,
            model,
            vocab,
            out,
        } => cmd_predict(&corpus, &model, &vocab, &out),
        Command::Eval { pred, corpus } => cmd_eval(&pred, &corpus),
        Command::Grid {
            corpus,
            config,
            out_dir,
        } => cmd_grid(&corpus, config.as_deref(), &out_dir),
        Command::Distinctive {
            corpus,
            token,
            scheme,
            top,
            min_df,
            keep_case,
        } => cmd_distinctive(&corpus, token, scheme, top, min_df, keep_case),
    }
}

fn print_author_counts(corpus: &Corpus) {
    for author in corpus.authors() {
        let count = corpus
            .documents()
            .iter()
            .filter(|d| &d.author == author)
            .count();
        println!("{author} {count}");
    }
}

fn cmd_ingest(
    whatsapp: Option<PathBuf>,
    jsonl: Option<PathBuf>,
    format: FormatArg,
    target_words: usize,
    out: &Path,
) -> Result<u8, CliError> {
    if target_words == 0 {
        return Err(CliError::validation("--target-words must be positive"));
    }
    let corpus = if let Some(path) = whatsapp {
        let messages = parse_whatsapp(&read_file(&path)?, format.into())?;
        chunk_messages(&messages, target_words)
    } else {
        let path = jsonl.expect("clap guarantees one source");
        Corpus::new(parse_jsonl(&read_file(&path)?)?)
    };
    write_file(out, &corpus.to_jsonl())?;
    print_author_counts(&corpus);
    if corpus.authors().len() < 2 {
        eprintln!(
            "warning: corpus has {} author(s); grid and train require at least 2",
            corpus.authors().len()
        );
    }
    Ok(0)
}

fn cmd_synth(
    profiles: Option<PathBuf>,
    docs_per_author: usize,
    words_per_doc: usize,
    skew: f64,
    overlap: f64,
    seed: u64,
    out: &Path,
) -> Result<u8, CliError> {
    let profiles = match profiles {
        Some(path) => profiles_from_config(&FlatConfig::parse(&read_text(&path)?)?)?,
        None => default_profiles(),
    };
    let dial = SeparabilityDial {
        variant_skew: skew,
        vocab_overlap: overlap,
    };
    let corpus = generate(&profiles, dial, docs_per_author, words_per_doc, seed)?;
    write_file(out, &corpus.to_jsonl())?;
    print_author_counts(&corpus);
    Ok(0)
}

fn build_features(
    corpus: &Corpus,
    token: NGramSpec,
    scheme: WeightScheme,
    min_df: usize,
    keep_case: bool,
) -> Result<(Vocabulary, chatstylo::features::DocTermMatrix), CliError> {
    let docs: Vec<&chatstylo::ingest::Document> = corpus.documents().iter().collect();
    let vocab = Vocabulary::build(&docs, token, min_df, keep_case)?;
    let matrix = vectorize(&docs, &vocab, scheme, &corpus.class_index(), keep_case)?;
    Ok((vocab, matrix))
}

fn cmd_featurize(
    corpus_path: &Path,
    token: NGramSpec,
    scheme: WeightScheme,
    min_df: usize,
    keep_case: bool,
    out_matrix: &Path,
    out_vocab: &Path,
) -> Result<u8, CliError> {
    if min_df == 0 {
        return Err(CliError::validation("--min-df must be positive"));
    }
    let corpus = load_corpus(corpus_path)?;
    let (vocab, matrix) = build_features(&corpus, token, scheme, min_df, keep_case)?;
    write_file(out_matrix, &matrix.to_coordinate_string())?;
    write_file(out_vocab, &vocab.to_export_string())?;
    println!(
        "{} documents, {} terms ({token}, {scheme})",
        matrix.n_docs(),
        matrix.n_terms()
    );
    Ok(0)
}

struct TrainArgs {
    corpus: PathBuf,
    classifier: ClassifierKind,
    token: NGramSpec,
    scheme: WeightScheme,
    min_df: usize,
    keep_case: bool,
    alpha: f64,
    lambda: f64,
    epochs: usize,
    alpha_sig: f64,
    min_node: usize,
    ntree: usize,
    mtry: usize,
    seed: u64,
    no_bootstrap: bool,
    out_model: PathBuf,
    out_vocab: PathBuf,
}

fn cmd_train(args: TrainArgs) -> Result<u8, CliError> {
    if args.min_df == 0 {
        return Err(CliError::validation("--min-df must be positive"));
    }
    let corpus = load_corpus(&args.corpus)?;
    require_multiple_authors(&corpus, &args.corpus)?;
    let (vocab, matrix) =
        build_features(&corpus, args.token, args.scheme, args.min_df, args.keep_case)?;

    let model = match args.classifier {
        ClassifierKind::NaiveBayes => {
            TrainedModel::NaiveBayes(NaiveBayesModel::train(&matrix, args.alpha)?)
        }
        ClassifierKind::LinearSvm => TrainedModel::LinearSvm(LinearSvmModel::train(
            &matrix,
            args.lambda,
            args.epochs,
            args.seed,
        )?),
        ClassifierKind::ConditionalTree => TrainedModel::ConditionalTree(
            ConditionalTreeModel::train(&matrix, args.alpha_sig, args.min_node)?,
        ),
        ClassifierKind::RandomForest => {
            let m_try = if args.mtry == 0 {
                default_m_try(matrix.n_terms())
            } else {
                args.mtry
            };
            TrainedModel::RandomForest(RandomForestModel::train_opts(
                &matrix,
                args.ntree,
                m_try,
                args.seed,
                !args.no_bootstrap,
            )?)
        }
    };

    let vocab_export = vocab.to_export_string();
    let container = ModelContainer::new(
        model,
        args.scheme,
        args.keep_case,
        &vocab_export,
        corpus.authors().to_vec(),
    );
    write_file(&args.out_model, &container.to_json())?;
    write_file(&args.out_vocab, &vocab_export)?;
    println!(
        "trained {} on {} documents, {} terms",
        args.classifier,
        matrix.n_docs(),
        matrix.n_terms()
    );
    Ok(0)
}

fn cmd_predict(
    corpus_path: &Path,
    model_path: &Path,
    vocab_path: &Path,
    out: &Path,
) -> Result<u8, CliError> {
    let corpus = load_corpus(corpus_path)?;
    let container = ModelContainer::from_json(&read_text(model_path)?)?;
    let vocab_export = read_text(vocab_path)?;
    if !container.matches_vocab(&vocab_export) {
        return Err(CliError::hash_mismatch(format!(
            "vocabulary {} (hash {}) does not match the one this model was trained with ({})",
            vocab_path.display(),
            &vocab_hash(&vocab_export)[..12],
            &container.vocab_hash[..12],
        )));
    }
    let vocab = Vocabulary::from_export_str(&vocab_export)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["source_id".to_string(), "predicted".to_string()];
    header.extend(container.authors.iter().map(|a| format!("score_{a}")));
    writer
        .write_record(&header)
        .map_err(|e| CliError::validation(e.to_string()))?;

    let n_classes = container.authors.len();
    for doc in corpus.documents() {
        let row = doc_row(&doc.text, &vocab, container.scheme, container.keep_case);
        let class = container.model.predict(&row);
        let scores = container.model.scores(&row, n_classes);
        let mut record = vec![doc.source_id.clone(), container.authors[class].clone()];
        record.extend(scores.iter().map(|s| format!("{s:.9e}")));
        writer
            .write_record(&record)
            .map_err(|e| CliError::validation(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::validation(e.to_string()))?;
    write_file(out, &String::from_utf8(bytes).expect("csv is utf-8"))?;
    println!("predicted {} documents", corpus.len());
    Ok(0)
}

fn cmd_eval(pred_path: &Path, corpus_path: &Path) -> Result<u8, CliError> {
    let corpus = load_corpus(corpus_path)?;
    let class_index = corpus.class_index();

    let pred_bytes = read_file(pred_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(pred_bytes.as_slice());
    let mut predicted = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::validation(format!("{}: {e}", pred_path.display())))?;
        let author = record.get(1).ok_or_else(|| {
            CliError::validation(format!(
                "{}: expected `source_id,predicted,...` columns",
                pred_path.display()
            ))
        })?;
        let class = class_index.get(author).copied().ok_or_else(|| {
            CliError::validation(format!(
                "predicted author {author:?} does not appear in the gold corpus"
            ))
        })?;
        predicted.push(class);
    }

    let truth = corpus.labels();
    let cm = confusion(&truth, &predicted, corpus.authors().len())?;
    let r = report(&cm);
    println!("documents {}", r.n_docs);
    println!("accuracy {}", format_metric(r.accuracy));
    println!("tpr {}", format_metric(r.tpr));
    println!("precision {}", format_metric(r.precision));
    Ok(0)
}

fn cmd_grid(corpus_path: &Path, config_path: Option<&Path>, out_dir: &Path) -> Result<u8, CliError> {
    let corpus = load_corpus(corpus_path)?;
    require_multiple_authors(&corpus, corpus_path)?;
    let config = match config_path {
        Some(path) => GridConfig::from_flat(&FlatConfig::parse(&read_text(path)?)?)?,
        None => GridConfig::default(),
    };

    let plan = split(&corpus, config.seed)?;
    let run = run_grid(&corpus, &plan, &config)?;

    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", out_dir.display())))?;
    write_file(&out_dir.join("results.csv"), &render_results_csv(&run.results))?;
    write_file(&out_dir.join("tables.md"), &render_tables_markdown(&run.results))?;

    let mut any_ok = false;
    for (index, best) in best_cells(&run.results).iter().enumerate() {
        match best {
            Some(result) => {
                any_ok = true;
                if let CellOutcome::Ok(report) = &result.outcome {
                    println!(
                        "best test {}: {} / {} / {} accuracy {}",
                        index + 1,
                        classifier_label(result.classifier),
                        weight_label(result.weight),
                        token_label(result.token),
                        format_metric(report.accuracy)
                    );
                }
            }
            None => println!("best test {}: no completed cells", index + 1),
        }
    }
    Ok(if any_ok { 0 } else { EXIT_GRID_ALL_FAILED })
}

fn cmd_distinctive(
    corpus_path: &Path,
    token: NGramSpec,
    scheme: WeightScheme,
    top: usize,
    min_df: usize,
    keep_case: bool,
) -> Result<u8, CliError> {
    if top == 0 {
        return Err(CliError::validation("--top must be positive"));
    }
    if min_df == 0 {
        return Err(CliError::validation("--min-df must be positive"));
    }
    let corpus = load_corpus(corpus_path)?;
    require_multiple_authors(&corpus, corpus_path)?;
    let (vocab, matrix) = build_features(&corpus, token, scheme, min_df, keep_case)?;
    let ranked = top_distinctive_terms(&matrix, &vocab, top);
    for (author, terms) in corpus.authors().iter().zip(&ranked) {
        println!("# {author}");
        for (term, score) in terms {
            println!("{term}\t{score:.6}");
        }
    }
    Ok(0)
}
