//! Cross-module pipeline checks on synthetic corpora.

use std::collections::HashMap;

use chatstylo::classifiers::NaiveBayesModel;
use chatstylo::features::{
    top_distinctive_terms, vectorize, NGramSpec, NGramUnit, Vocabulary, WeightScheme,
};
use chatstylo::ingest::{Corpus, Document};
use chatstylo::synthgen::{generate, AuthorProfile, SeparabilityDial, VariantGroup};

fn doc_refs(corpus: &Corpus) -> Vec<&Document> {
    corpus.documents().iter().collect()
}

fn mein_main_profiles() -> Vec<AuthorProfile> {
    let mk = |name: &str, form: &str| AuthorProfile {
        name: name.into(),
        base_vocab: vec![
            ("kya".into(), 0.4),
            ("kar".into(), 0.3),
            ("na".into(), 0.3),
        ],
        variant_prefs: vec![VariantGroup {
            name: "mein".into(),
            prefs: vec![(form.into(), 1.0)],
        }],
        msg_len: (8.0, 2.0),
    };
    vec![mk("aa", "mein"), mk("bb", "main")]
}

/// Authors who always write "mein" vs always "main": the variant form is
/// the top distinctive unigram of each, verified against an exhaustive
/// recount of the generated text.
#[test]
fn distinctive_terms_recover_spelling_preferences() {
    let dial = SeparabilityDial {
        variant_skew: 1.0,
        vocab_overlap: 1.0,
    };
    let corpus = generate(&mein_main_profiles(), dial, 20, 60, 5).unwrap();
    let docs = doc_refs(&corpus);
    let spec = NGramSpec::new(NGramUnit::Word, 1).unwrap();
    let vocab = Vocabulary::build(&docs, spec, 1, false).unwrap();
    let matrix = vectorize(&docs, &vocab, WeightScheme::Tf, &corpus.class_index(), false).unwrap();
    let top = top_distinctive_terms(&matrix, &vocab, 3);

    assert_eq!(top[0][0].0, "mein");
    assert_eq!(top[1][0].0, "main");

    // exhaustive-count oracle: recompute the score of "mein" for class 0
    // directly from the document texts
    let mut mean_in = 0.0;
    let mut mean_out = 0.0;
    let (mut n_in, mut n_out) = (0usize, 0usize);
    for doc in corpus.documents() {
        let words: Vec<&str> = doc.text.split_whitespace().collect();
        let tf = words.iter().filter(|w| **w == "mein").count() as f64 / words.len() as f64;
        if doc.author == "aa" {
            mean_in += tf;
            n_in += 1;
        } else {
            mean_out += tf;
            n_out += 1;
        }
    }
    let oracle_score = mean_in / n_in as f64 - mean_out / n_out as f64;
    assert!((top[0][0].1 - oracle_score).abs() < 1e-12);
    assert!(oracle_score > 0.0);

    // "main" never appears in author aa's documents at skew 1
    for doc in corpus.documents() {
        if doc.author == "aa" {
            assert!(!doc.text.split_whitespace().any(|w| w == "main"));
        }
    }
}

fn disjoint_profiles() -> Vec<AuthorProfile> {
    let mk = |name: &str, words: [&str; 3], form: &str| AuthorProfile {
        name: name.into(),
        base_vocab: words.iter().map(|w| (w.to_string(), 1.0 / 3.0)).collect(),
        variant_prefs: vec![VariantGroup {
            name: "hai".into(),
            prefs: vec![(form.into(), 1.0)],
        }],
        msg_len: (8.0, 2.0),
    };
    vec![
        mk("aa", ["aanaa", "aakar", "aaja"], "hai"),
        mk("bb", ["bolo", "bata", "bas"], "h"),
    ]
}

/// Disjoint author vocabularies force a perfect naive Bayes training fit.
#[test]
fn naive_bayes_fits_disjoint_support_perfectly() {
    let dial = SeparabilityDial {
        variant_skew: 1.0,
        vocab_overlap: 0.0,
    };
    let corpus = generate(&disjoint_profiles(), dial, 15, 40, 9).unwrap();
    let docs = doc_refs(&corpus);
    let spec = NGramSpec::new(NGramUnit::Word, 1).unwrap();
    let vocab = Vocabulary::build(&docs, spec, 1, false).unwrap();
    let matrix =
        vectorize(&docs, &vocab, WeightScheme::Binary, &corpus.class_index(), false).unwrap();
    let model = NaiveBayesModel::train(&matrix, 1.0).unwrap();
    for (row, &label) in matrix.rows().iter().zip(matrix.labels()) {
        assert_eq!(model.predict(row).0, label);
    }
}

/// Word-count bookkeeping survives the canonical JSONL round trip even for
/// texts with unusual whitespace and non-ASCII content.
#[test]
fn canonical_jsonl_preserves_documents() {
    let docs = vec![
        Document::new("aa", "kya kar rahe ho \u{0939}\u{093e}\u{0901}", "x:1"),
        Document::new("bb", "acha theek hai", "x:2"),
    ];
    let corpus = Corpus::new(docs);
    let text = corpus.to_jsonl();
    let back = Corpus::from_jsonl(text.as_bytes()).unwrap();
    assert_eq!(back, corpus);
    assert_eq!(back.documents()[0].word_count, 5);
}

/// The class-index mapping is the lexicographic author order, shared by all
/// models in a run.
#[test]
fn class_indices_follow_sorted_authors() {
    let corpus = generate(
        &disjoint_profiles(),
        SeparabilityDial::default(),
        3,
        10,
        1,
    )
    .unwrap();
    let index: HashMap<String, usize> = corpus.class_index();
    assert_eq!(index["aa"], 0);
    assert_eq!(index["bb"], 1);
    assert_eq!(corpus.authors(), ["aa", "bb"]);
}
