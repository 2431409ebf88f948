//! The stratified 30/35/35 split, the full weight-by-token-by-classifier
//! grid, and the result renderers (flat CSV and grouped markdown tables).
//!
//! Grid cells fail in isolation: an empty vocabulary or a degenerate matrix
//! marks the affected rows `ERROR <reason>` and the rest of the grid keeps
//! going. Reruns with identical corpus bytes and config bytes produce
//! identical output bytes.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::classifiers::{
    default_m_try, ClassifierKind, ConditionalTreeModel, LinearSvmModel, NaiveBayesModel,
    RandomForestModel,
};
use crate::config::{ConfigError, FlatConfig};
use crate::eval::{confusion, format_metric, report, EvalReport};
use crate::features::{vectorize, DocTermMatrix, NGramSpec, Vocabulary, WeightScheme};
use crate::ingest::{Corpus, Document};
use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("author {author:?} has {count} documents; the 30/35/35 split needs at least 3")]
    TooFewDocuments { author: String, count: usize },
    #[error("corpus has {0} author(s); at least 2 are required")]
    TooFewAuthors(usize),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Disjoint document-index partition covering the whole corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub train_ids: Vec<usize>,
    pub test1_ids: Vec<usize>,
    pub test2_ids: Vec<usize>,
    pub seed: u64,
}

/// Stratified split: per author, a seeded shuffle of that author's document
/// indices is cut into 30% training (round half up) and the remainder into
/// two test halves, test one taking the odd document.
pub fn split(corpus: &Corpus, seed: u64) -> Result<SplitPlan, ExperimentError> {
    let mut train_ids = Vec::new();
    let mut test1_ids = Vec::new();
    let mut test2_ids = Vec::new();

    for author in corpus.authors() {
        let mut ids: Vec<usize> = corpus
            .documents()
            .iter()
            .enumerate()
            .filter(|(_, d)| &d.author == author)
            .map(|(i, _)| i)
            .collect();
        let n = ids.len();
        if n < 3 {
            return Err(ExperimentError::TooFewDocuments {
                author: author.clone(),
                count: n,
            });
        }
        let mut stream = rng::stream(seed, format!("split:{author}").as_bytes());
        ids.shuffle(&mut stream);

        let train_n = (3 * n + 5) / 10; // round-half-up of 0.30 * n
        let remainder = n - train_n;
        let test1_n = remainder.div_ceil(2);
        train_ids.extend(&ids[..train_n]);
        test1_ids.extend(&ids[train_n..train_n + test1_n]);
        test2_ids.extend(&ids[train_n + test1_n..]);
    }
    // membership is random, list order is canonical
    train_ids.sort_unstable();
    test1_ids.sort_unstable();
    test2_ids.sort_unstable();
    Ok(SplitPlan {
        train_ids,
        test1_ids,
        test2_ids,
        seed,
    })
}

/// Everything the grid needs, read from the flat config namespace.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub seed: u64,
    pub target_words: usize,
    pub min_df: usize,
    pub keep_case: bool,
    pub nb_alpha: f64,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub ctree_alpha_sig: f64,
    pub ctree_min_node: usize,
    pub rf_ntree: usize,
    /// `None` selects floor(sqrt(n_terms)) per cell.
    pub rf_mtry: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            target_words: 100,
            min_df: 1,
            keep_case: false,
            nb_alpha: 1.0,
            svm_lambda: 1e-4,
            svm_epochs: 20,
            ctree_alpha_sig: 0.05,
            ctree_min_node: 7,
            rf_ntree: 100,
            rf_mtry: None,
        }
    }
}

const CONFIG_KEYS: [&str; 11] = [
    "split.seed",
    "chunk.target_words",
    "features.min_df",
    "features.keep_case",
    "nb.alpha",
    "svm.lambda",
    "svm.epochs",
    "ctree.alpha_sig",
    "ctree.min_node",
    "rf.ntree",
    "rf.mtry",
];

impl GridConfig {
    pub fn from_flat(config: &FlatConfig) -> Result<Self, ConfigError> {
        for key in config.keys() {
            if !CONFIG_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                });
            }
        }
        let defaults = Self::default();
        let out = Self {
            seed: config.u64_or("split.seed", defaults.seed)?,
            target_words: config.usize_or("chunk.target_words", defaults.target_words)?,
            min_df: config.usize_or("features.min_df", defaults.min_df)?,
            keep_case: config.bool_or("features.keep_case", defaults.keep_case)?,
            nb_alpha: config.f64_or("nb.alpha", defaults.nb_alpha)?,
            svm_lambda: config.f64_or("svm.lambda", defaults.svm_lambda)?,
            svm_epochs: config.usize_or("svm.epochs", defaults.svm_epochs)?,
            ctree_alpha_sig: config.f64_or("ctree.alpha_sig", defaults.ctree_alpha_sig)?,
            ctree_min_node: config.usize_or("ctree.min_node", defaults.ctree_min_node)?,
            rf_ntree: config.usize_or("rf.ntree", defaults.rf_ntree)?,
            rf_mtry: match config.get("rf.mtry") {
                None | Some("auto") => None,
                Some(v) => Some(v.parse().map_err(|_| ConfigError::BadValue {
                    key: "rf.mtry".into(),
                    expected: "a positive integer or `auto`",
                    value: v.to_string(),
                })?),
            },
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range_err = |key: &str, message: String| ConfigError::OutOfRange {
            key: key.to_string(),
            message,
        };
        if self.target_words == 0 {
            return Err(range_err("chunk.target_words", "must be positive".into()));
        }
        if self.min_df == 0 {
            return Err(range_err("features.min_df", "must be positive".into()));
        }
        if !(self.nb_alpha > 0.0 && self.nb_alpha.is_finite()) {
            return Err(range_err(
                "nb.alpha",
                format!("must be positive, got {}", self.nb_alpha),
            ));
        }
        if !(self.svm_lambda > 0.0 && self.svm_lambda.is_finite()) {
            return Err(range_err(
                "svm.lambda",
                format!("must be positive, got {}", self.svm_lambda),
            ));
        }
        if self.svm_epochs == 0 {
            return Err(range_err("svm.epochs", "must be positive".into()));
        }
        if !(self.ctree_alpha_sig > 0.0 && self.ctree_alpha_sig < 1.0) {
            return Err(range_err(
                "ctree.alpha_sig",
                format!("must lie in (0, 1), got {}", self.ctree_alpha_sig),
            ));
        }
        if self.ctree_min_node == 0 {
            return Err(range_err("ctree.min_node", "must be positive".into()));
        }
        if self.rf_ntree == 0 {
            return Err(range_err("rf.ntree", "must be positive".into()));
        }
        if self.rf_mtry == Some(0) {
            return Err(range_err("rf.mtry", "must be positive or `auto`".into()));
        }
        Ok(())
    }
}

/// One grid cell: either a finished report or the error that kept the cell
/// from completing.
#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Ok(EvalReport),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub weight: WeightScheme,
    pub token: NGramSpec,
    pub classifier: ClassifierKind,
    pub test_id: u8,
    pub outcome: CellOutcome,
}

/// Document ids materialized for vocabulary construction or training,
/// recorded before any evaluation happens.
#[derive(Debug, Default, Clone)]
pub struct LeakageAudit {
    touched: BTreeSet<usize>,
}

impl LeakageAudit {
    pub fn touched(&self) -> &BTreeSet<usize> {
        &self.touched
    }
}

pub struct GridRun {
    pub results: Vec<GridResult>,
    pub audit: LeakageAudit,
}

fn select_docs<'c>(
    corpus: &'c Corpus,
    ids: &[usize],
    audit: Option<&mut LeakageAudit>,
) -> Vec<&'c Document> {
    if let Some(audit) = audit {
        audit.touched.extend(ids.iter().copied());
    }
    ids.iter().map(|&i| &corpus.documents()[i]).collect()
}

/// Runs the full 3 x 5 x 4 x 2 grid. Vocabularies and matrices are built
/// from training documents only; both test sets reuse the frozen vocabulary.
pub fn run_grid(
    corpus: &Corpus,
    plan: &SplitPlan,
    config: &GridConfig,
) -> Result<GridRun, ExperimentError> {
    if corpus.authors().len() < 2 {
        return Err(ExperimentError::TooFewAuthors(corpus.authors().len()));
    }
    config.validate()?;
    let class_index = corpus.class_index();
    let n_classes = corpus.authors().len();

    let mut audit = LeakageAudit::default();
    let train_docs = select_docs(corpus, &plan.train_ids, Some(&mut audit));
    let test_sets = [
        select_docs(corpus, &plan.test1_ids, None),
        select_docs(corpus, &plan.test2_ids, None),
    ];

    let svm_seed = rng::derive_seed(config.seed, b"svm");
    let rf_seed = rng::derive_seed(config.seed, b"rf");

    // the vocabulary depends on the token spec only; build each once
    let vocabs: Vec<Result<Vocabulary, String>> = NGramSpec::all()
        .iter()
        .map(|&spec| {
            Vocabulary::build(&train_docs, spec, config.min_df, config.keep_case)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut results = Vec::with_capacity(120);
    for weight in WeightScheme::all() {
        for (spec_index, token) in NGramSpec::all().into_iter().enumerate() {
            let push_pair_error = |results: &mut Vec<GridResult>, reason: &str| {
                for classifier in ClassifierKind::all() {
                    for test_id in [1u8, 2] {
                        results.push(GridResult {
                            weight,
                            token,
                            classifier,
                            test_id,
                            outcome: CellOutcome::Error(reason.to_string()),
                        });
                    }
                }
            };

            let vocab = match &vocabs[spec_index] {
                Ok(v) => v,
                Err(reason) => {
                    push_pair_error(&mut results, reason);
                    continue;
                }
            };
            let built = vectorize(&train_docs, vocab, weight, &class_index, config.keep_case)
                .and_then(|train| {
                    let tests = [
                        vectorize(&test_sets[0], vocab, weight, &class_index, config.keep_case)?,
                        vectorize(&test_sets[1], vocab, weight, &class_index, config.keep_case)?,
                    ];
                    Ok((train, tests))
                });
            let (train_matrix, test_matrices) = match built {
                Ok(pair) => pair,
                Err(e) => {
                    push_pair_error(&mut results, &e.to_string());
                    continue;
                }
            };

            for classifier in ClassifierKind::all() {
                let trained = train_one(classifier, &train_matrix, config, svm_seed, rf_seed);
                for (test_index, test_matrix) in test_matrices.iter().enumerate() {
                    let outcome = match &trained {
                        Err(reason) => CellOutcome::Error(reason.clone()),
                        Ok(predictor) => evaluate_cell(predictor, test_matrix, n_classes),
                    };
                    results.push(GridResult {
                        weight,
                        token,
                        classifier,
                        test_id: test_index as u8 + 1,
                        outcome,
                    });
                }
            }
        }
    }
    Ok(GridRun { results, audit })
}

enum CellModel {
    NaiveBayes(NaiveBayesModel),
    LinearSvm(LinearSvmModel),
    ConditionalTree(ConditionalTreeModel),
    RandomForest(RandomForestModel),
}

impl CellModel {
    fn predict(&self, row: &[(usize, f64)]) -> usize {
        match self {
            Self::NaiveBayes(m) => m.predict(row).0,
            Self::LinearSvm(m) => m.predict(row).0,
            Self::ConditionalTree(m) => m.predict(row),
            Self::RandomForest(m) => m.predict(row).0,
        }
    }
}

fn train_one(
    classifier: ClassifierKind,
    train: &DocTermMatrix,
    config: &GridConfig,
    svm_seed: u64,
    rf_seed: u64,
) -> Result<CellModel, String> {
    match classifier {
        ClassifierKind::NaiveBayes => NaiveBayesModel::train(train, config.nb_alpha)
            .map(CellModel::NaiveBayes)
            .map_err(|e| e.to_string()),
        ClassifierKind::LinearSvm => {
            LinearSvmModel::train(train, config.svm_lambda, config.svm_epochs, svm_seed)
                .map(CellModel::LinearSvm)
                .map_err(|e| e.to_string())
        }
        ClassifierKind::ConditionalTree => {
            ConditionalTreeModel::train(train, config.ctree_alpha_sig, config.ctree_min_node)
                .map(CellModel::ConditionalTree)
                .map_err(|e| e.to_string())
        }
        ClassifierKind::RandomForest => {
            let m_try = config
                .rf_mtry
                .unwrap_or_else(|| default_m_try(train.n_terms()))
                .min(train.n_terms().max(1));
            RandomForestModel::train(train, config.rf_ntree, m_try, rf_seed)
                .map(CellModel::RandomForest)
                .map_err(|e| e.to_string())
        }
    }
}

fn evaluate_cell(model: &CellModel, test: &DocTermMatrix, n_classes: usize) -> CellOutcome {
    let predicted: Vec<usize> = test.rows().iter().map(|row| model.predict(row)).collect();
    match confusion(test.labels(), &predicted, n_classes) {
        Ok(cm) => CellOutcome::Ok(report(&cm)),
        Err(e) => CellOutcome::Error(e.to_string()),
    }
}

/// Flat CSV: `weight,token,classifier,test_id,accuracy,tpr,precision`.
/// Failed cells carry `ERROR <reason>` in every metric column.
pub fn render_results_csv(results: &[GridResult]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["weight", "token", "classifier", "test_id", "accuracy", "tpr", "precision"])
        .expect("csv header");
    for result in results {
        let (accuracy, tpr, precision) = match &result.outcome {
            CellOutcome::Ok(r) => (
                format_metric(r.accuracy),
                format_metric(r.tpr),
                format_metric(r.precision),
            ),
            CellOutcome::Error(reason) => {
                let flag = format!("ERROR {reason}");
                (flag.clone(), flag.clone(), flag)
            }
        };
        writer
            .write_record([
                result.weight.to_string(),
                result.token.to_string(),
                result.classifier.to_string(),
                result.test_id.to_string(),
                accuracy,
                tpr,
                precision,
            ])
            .expect("csv row");
    }
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv is utf-8")
}

pub fn weight_label(weight: WeightScheme) -> &'static str {
    match weight {
        WeightScheme::Tf => "TF",
        WeightScheme::TfIdf => "TF-IDF",
        WeightScheme::Binary => "Weight Bin",
    }
}

pub fn token_label(token: NGramSpec) -> String {
    match token.to_string().as_str() {
        "word1" => "Unigram (Word)".to_string(),
        "word2" => "Bigram (Word)".to_string(),
        other => {
            let n = &other[4..];
            format!("Char {n} Gram")
        }
    }
}

pub fn classifier_label(kind: ClassifierKind) -> &'static str {
    match kind {
        ClassifierKind::NaiveBayes => "Naive Bayes",
        ClassifierKind::LinearSvm => "SVM",
        ClassifierKind::ConditionalTree => "Conditional Tree",
        ClassifierKind::RandomForest => "Random Forest",
    }
}

/// One markdown table per classifier, rows grouped by weight then token,
/// test-one and test-two metric columns side by side.
pub fn render_tables_markdown(results: &[GridResult]) -> String {
    let mut out = String::from("# Result tables\n");
    for classifier in ClassifierKind::all() {
        out.push_str(&format!("\n## {}\n\n", classifier_label(classifier)));
        out.push_str(
            "| Weight | Token | Test One Accuracy | Test One TPR | Test One Precision | Test Two Accuracy | Test Two TPR | Test Two Precision |\n",
        );
        out.push_str("| --- | --- | --- | --- | --- | --- | --- | --- |\n");
        for weight in WeightScheme::all() {
            for token in NGramSpec::all() {
                let mut cells = Vec::with_capacity(6);
                for test_id in [1u8, 2] {
                    let cell = results.iter().find(|r| {
                        r.classifier == classifier
                            && r.weight == weight
                            && r.token == token
                            && r.test_id == test_id
                    });
                    match cell.map(|r| &r.outcome) {
                        Some(CellOutcome::Ok(r)) => {
                            cells.push(format_metric(r.accuracy));
                            cells.push(format_metric(r.tpr));
                            cells.push(format_metric(r.precision));
                        }
                        Some(CellOutcome::Error(reason)) => {
                            let flag = format!("ERROR {reason}");
                            cells.extend([flag.clone(), flag.clone(), flag]);
                        }
                        None => cells.extend(["-".to_string(), "-".to_string(), "-".to_string()]),
                    }
                }
                out.push_str(&format!(
                    "| {} | {} | {} |\n",
                    weight_label(weight),
                    token_label(token),
                    cells.join(" | ")
                ));
            }
        }
    }
    out
}

/// Highest-accuracy completed cell per test set, for the grid summary line.
pub fn best_cells(results: &[GridResult]) -> Vec<Option<&GridResult>> {
    [1u8, 2]
        .iter()
        .map(|&test_id| {
            results
                .iter()
                .filter(|r| r.test_id == test_id)
                .filter_map(|r| match &r.outcome {
                    CellOutcome::Ok(report) => Some((r, report.accuracy)),
                    CellOutcome::Error(_) => None,
                })
                .max_by(|a, b| a.1.partial_cmp(&b.1).expect("accuracy is finite"))
                .map(|(r, _)| r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Document;
    use crate::synthgen::{default_profiles, generate, SeparabilityDial};

    fn uniform_corpus(per_author: usize) -> Corpus {
        let mut docs = Vec::new();
        for author in ["aa", "bb"] {
            for i in 0..per_author {
                docs.push(Document::new(author, format!("word{i} hai na"), format!("{author}:{i}")));
            }
        }
        Corpus::new(docs)
    }

    #[test]
    fn split_exact_percentages() {
        let plan = split(&uniform_corpus(100), 1).unwrap();
        assert_eq!(plan.train_ids.len(), 60);
        assert_eq!(plan.test1_ids.len(), 70);
        assert_eq!(plan.test2_ids.len(), 70);
    }

    #[test]
    fn split_ten_docs_rounds_to_3_4_3() {
        let docs: Vec<Document> = (0..10)
            .map(|i| Document::new("aa", "hai", format!("s{i}")))
            .chain((0..10).map(|i| Document::new("bb", "na", format!("t{i}"))))
            .collect();
        let plan = split(&Corpus::new(docs), 9).unwrap();
        // per author: 3 train, 4 test1, 3 test2
        assert_eq!(plan.train_ids.len(), 6);
        assert_eq!(plan.test1_ids.len(), 8);
        assert_eq!(plan.test2_ids.len(), 6);
    }

    #[test]
    fn split_partitions_cover_and_are_disjoint() {
        let corpus = uniform_corpus(13);
        let plan = split(&corpus, 5).unwrap();
        let mut all: Vec<usize> = plan
            .train_ids
            .iter()
            .chain(&plan.test1_ids)
            .chain(&plan.test2_ids)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..corpus.len()).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let corpus = uniform_corpus(20);
        assert_eq!(split(&corpus, 4).unwrap(), split(&corpus, 4).unwrap());
        assert_ne!(split(&corpus, 4).unwrap(), split(&corpus, 5).unwrap());
    }

    #[test]
    fn split_stratifies_per_author() {
        let corpus = uniform_corpus(10);
        let plan = split(&corpus, 2).unwrap();
        // authors occupy disjoint id ranges in uniform_corpus
        for ids in [&plan.train_ids, &plan.test1_ids, &plan.test2_ids] {
            let first = ids.iter().filter(|&&i| i < 10).count();
            let second = ids.len() - first;
            assert!(first.abs_diff(second) <= 1);
        }
    }

    #[test]
    fn split_rejects_tiny_authors() {
        let docs = vec![
            Document::new("aa", "hai", "1"),
            Document::new("aa", "na", "2"),
            Document::new("bb", "hai", "3"),
            Document::new("bb", "na", "4"),
            Document::new("bb", "to", "5"),
        ];
        let err = split(&Corpus::new(docs), 0).unwrap_err();
        assert_eq!(
            err,
            ExperimentError::TooFewDocuments {
                author: "aa".into(),
                count: 2
            }
        );
    }

    fn small_config() -> GridConfig {
        GridConfig {
            svm_epochs: 5,
            rf_ntree: 10,
            ..GridConfig::default()
        }
    }

    fn small_corpus() -> Corpus {
        generate(&default_profiles(), SeparabilityDial::default(), 8, 30, 11).unwrap()
    }

    #[test]
    fn grid_has_120_cells_in_canonical_order() {
        let corpus = small_corpus();
        let plan = split(&corpus, 11).unwrap();
        let run = run_grid(&corpus, &plan, &small_config()).unwrap();
        assert_eq!(run.results.len(), 120);

        let mut expected_index = 0;
        for weight in WeightScheme::all() {
            for token in NGramSpec::all() {
                for classifier in ClassifierKind::all() {
                    for test_id in [1u8, 2] {
                        let r = &run.results[expected_index];
                        assert_eq!((r.weight, r.token, r.classifier, r.test_id),
                                   (weight, token, classifier, test_id));
                        expected_index += 1;
                    }
                }
            }
        }
        for r in &run.results {
            if let CellOutcome::Ok(report) = &r.outcome {
                for v in [report.accuracy, report.tpr, report.precision] {
                    assert!((0.0..=100.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn grid_is_deterministic() {
        let corpus = small_corpus();
        let plan = split(&corpus, 11).unwrap();
        let a = run_grid(&corpus, &plan, &small_config()).unwrap();
        let b = run_grid(&corpus, &plan, &small_config()).unwrap();
        assert_eq!(render_results_csv(&a.results), render_results_csv(&b.results));
        assert_eq!(
            render_tables_markdown(&a.results),
            render_tables_markdown(&b.results)
        );
    }

    #[test]
    fn grid_never_touches_test_documents_before_eval() {
        let corpus = small_corpus();
        let plan = split(&corpus, 11).unwrap();
        let run = run_grid(&corpus, &plan, &small_config()).unwrap();
        for id in plan.test1_ids.iter().chain(&plan.test2_ids) {
            assert!(!run.audit.touched().contains(id));
        }
        for id in &plan.train_ids {
            assert!(run.audit.touched().contains(id));
        }
    }

    #[test]
    fn short_documents_fail_only_the_big_char_cells() {
        // three-character documents: char4 and char5 vocabularies are
        // empty, everything else succeeds
        let mut docs = Vec::new();
        for (author, word) in [("aa", "p q"), ("bb", "r s")] {
            for i in 0..6 {
                docs.push(Document::new(author, word, format!("{author}:{i}")));
            }
        }
        let corpus = Corpus::new(docs);
        let plan = split(&corpus, 3).unwrap();
        let run = run_grid(&corpus, &plan, &small_config()).unwrap();
        for r in &run.results {
            let big_char = r.token.to_string() == "char4" || r.token.to_string() == "char5";
            match (&r.outcome, big_char) {
                (CellOutcome::Error(reason), true) => {
                    assert!(reason.contains("no term"), "unexpected reason {reason}")
                }
                (CellOutcome::Ok(_), false) => {}
                (outcome, _) => panic!(
                    "cell {} {} {}: unexpected outcome {outcome:?}",
                    r.weight, r.token, r.classifier
                ),
            }
        }
    }

    #[test]
    fn csv_and_markdown_share_numeric_strings() {
        let corpus = small_corpus();
        let plan = split(&corpus, 11).unwrap();
        let run = run_grid(&corpus, &plan, &small_config()).unwrap();
        let csv = render_results_csv(&run.results);
        let md = render_tables_markdown(&run.results);
        for r in &run.results {
            if let CellOutcome::Ok(report) = &r.outcome {
                for v in [report.accuracy, report.tpr, report.precision] {
                    let s = format_metric(v);
                    assert!(csv.contains(&s), "{s} missing from csv");
                    assert!(md.contains(&s), "{s} missing from markdown");
                }
            }
        }
    }

    #[test]
    fn error_cells_render_flagged() {
        let results = vec![GridResult {
            weight: WeightScheme::Tf,
            token: NGramSpec::parse("char5").unwrap(),
            classifier: ClassifierKind::NaiveBayes,
            test_id: 1,
            outcome: CellOutcome::Error("no term survives".into()),
        }];
        let csv = render_results_csv(&results);
        assert!(csv.contains("ERROR no term survives"));
        let md = render_tables_markdown(&results);
        assert!(md.contains("ERROR no term survives"));
    }

    #[test]
    fn config_parses_and_validates() {
        let flat = FlatConfig::parse("split.seed = 9\nsvm.lambda = 0.5\nrf.mtry = auto\n").unwrap();
        let config = GridConfig::from_flat(&flat).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.svm_lambda, 0.5);
        assert_eq!(config.rf_mtry, None);

        let bad = FlatConfig::parse("svm.lambda = -1\n").unwrap();
        let err = GridConfig::from_flat(&bad).unwrap_err();
        assert!(err.to_string().contains("svm.lambda"));

        let unknown = FlatConfig::parse("svm.gamma = 2\n").unwrap();
        assert!(matches!(
            GridConfig::from_flat(&unknown),
            Err(ConfigError::UnknownKey { .. })
        ));
    }
}
