//! The four supervised models and their on-disk container.
//!
//! Class indices come from the corpus's lexicographic author order and are
//! shared by every model in a run. Ties anywhere break toward the lowest
//! class index. Trained models are immutable; prediction never mutates
//! state.

mod ctree;
mod forest;
mod naive_bayes;
mod svm;
mod tree;

pub use ctree::ConditionalTreeModel;
pub use forest::{default_m_try, RandomForestModel};
pub use naive_bayes::NaiveBayesModel;
pub use svm::LinearSvmModel;
pub use tree::TreeNode;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{DocTermMatrix, WeightScheme};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad model container: {0}")]
    BadContainer(String),
}

/// Common trainer precondition: at least one document, at least one term,
/// and no empty class. Returns the class count and per-class document
/// counts.
pub(crate) fn validate_matrix(
    matrix: &DocTermMatrix,
) -> Result<(usize, Vec<usize>), ClassifierError> {
    if matrix.n_docs() == 0 {
        return Err(ClassifierError::DegenerateMatrix("no documents".into()));
    }
    if matrix.n_terms() == 0 {
        return Err(ClassifierError::DegenerateMatrix("no terms".into()));
    }
    let n_classes = matrix.n_classes();
    let mut class_docs = vec![0usize; n_classes];
    for &label in matrix.labels() {
        class_docs[label] += 1;
    }
    if let Some(empty) = class_docs.iter().position(|&c| c == 0) {
        return Err(ClassifierError::DegenerateMatrix(format!(
            "class {empty} has no documents"
        )));
    }
    Ok((n_classes, class_docs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    NaiveBayes,
    LinearSvm,
    ConditionalTree,
    RandomForest,
}

impl ClassifierKind {
    pub fn all() -> [ClassifierKind; 4] {
        [
            Self::NaiveBayes,
            Self::LinearSvm,
            Self::ConditionalTree,
            Self::RandomForest,
        ]
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "nb" => Some(Self::NaiveBayes),
            "svm" => Some(Self::LinearSvm),
            "ctree" => Some(Self::ConditionalTree),
            "rf" => Some(Self::RandomForest),
            _ => None,
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NaiveBayes => "nb",
            Self::LinearSvm => "svm",
            Self::ConditionalTree => "ctree",
            Self::RandomForest => "rf",
        })
    }
}

/// Any of the four trained models, for uniform prediction and storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    NaiveBayes(NaiveBayesModel),
    LinearSvm(LinearSvmModel),
    ConditionalTree(ConditionalTreeModel),
    RandomForest(RandomForestModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            Self::LinearSvm(_) => ClassifierKind::LinearSvm,
            Self::ConditionalTree(_) => ClassifierKind::ConditionalTree,
            Self::RandomForest(_) => ClassifierKind::RandomForest,
        }
    }

    pub fn predict(&self, row: &[(usize, f64)]) -> usize {
        match self {
            Self::NaiveBayes(m) => m.predict(row).0,
            Self::LinearSvm(m) => m.predict(row).0,
            Self::ConditionalTree(m) => m.predict(row),
            Self::RandomForest(m) => m.predict(row).0,
        }
    }

    /// Per-class scores where the model has them (log-posteriors, margins,
    /// votes); the conditional tree reports a one-hot vector.
    pub fn scores(&self, row: &[(usize, f64)], n_classes: usize) -> Vec<f64> {
        match self {
            Self::NaiveBayes(m) => m.predict(row).1,
            Self::LinearSvm(m) => m.predict(row).1,
            Self::ConditionalTree(m) => {
                let mut scores = vec![0.0; n_classes];
                scores[m.predict(row)] = 1.0;
                scores
            }
            Self::RandomForest(m) => {
                let (_, votes) = m.predict(row);
                let mut scores: Vec<f64> = votes.into_iter().map(|v| v as f64).collect();
                scores.resize(n_classes, 0.0);
                scores
            }
        }
    }
}

const CONTAINER_FORMAT: &str = "chatstylo-model";
const CONTAINER_VERSION: u32 = 1;

/// Versioned, self-describing model file. Binds the model to the exact
/// vocabulary it was trained with via a content hash, and carries everything
/// prediction needs to rebuild feature rows the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelContainer {
    pub format: String,
    pub version: u32,
    pub kind: ClassifierKind,
    pub scheme: WeightScheme,
    pub keep_case: bool,
    pub vocab_hash: String,
    pub authors: Vec<String>,
    pub model: TrainedModel,
}

impl ModelContainer {
    pub fn new(
        model: TrainedModel,
        scheme: WeightScheme,
        keep_case: bool,
        vocab_export: &str,
        authors: Vec<String>,
    ) -> Self {
        Self {
            format: CONTAINER_FORMAT.to_string(),
            version: CONTAINER_VERSION,
            kind: model.kind(),
            scheme,
            keep_case,
            vocab_hash: vocab_hash(vocab_export),
            authors,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model container serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let container: ModelContainer = serde_json::from_str(text)
            .map_err(|e| ClassifierError::BadContainer(e.to_string()))?;
        if container.format != CONTAINER_FORMAT {
            return Err(ClassifierError::BadContainer(format!(
                "unknown format {:?}",
                container.format
            )));
        }
        if container.version != CONTAINER_VERSION {
            return Err(ClassifierError::BadContainer(format!(
                "unsupported version {}",
                container.version
            )));
        }
        if container.kind != container.model.kind() {
            return Err(ClassifierError::BadContainer(
                "kind field disagrees with the stored model".into(),
            ));
        }
        Ok(container)
    }

    /// True when `vocab_export` is byte-identical to the vocabulary this
    /// model was trained against.
    pub fn matches_vocab(&self, vocab_export: &str) -> bool {
        self.vocab_hash == vocab_hash(vocab_export)
    }
}

/// SHA-256 of the vocabulary's canonical text export, hex-encoded.
pub fn vocab_hash(vocab_export: &str) -> String {
    let digest = Sha256::digest(vocab_export.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
