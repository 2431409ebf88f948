//! Corpus ingestion: WhatsApp `.txt` exports, generic JSONL, and the greedy
//! chunker that turns per-author message streams into classification units.
//!
//! Two export grammars are recognized:
//!
//! ```text
//! bracketed:  [12/05/18, 22:01:10] Ravi: haan
//! dashed:     12/05/18, 22:01 - Asha: kya kar raha hai
//! ```
//!
//! Lines matching neither grammar continue the previous message. System lines
//! (a timestamp but no `Author:` segment) and media placeholders are dropped.
//! Anything beyond these two dialects should be converted to JSONL first.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    /// No line of the input parsed as a message. Carries the first few
    /// (at most three) line numbers that matched neither grammar.
    #[error("no message line parsed (first unparseable lines: {0:?})")]
    EmptyInput(Vec<usize>),
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
}

/// One raw chat message. `text` never contains line breaks; continuation
/// lines are joined with a single space at parse time.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub author: String,
    pub text: String,
    /// Preserved verbatim from the export; never interpreted.
    pub timestamp: Option<String>,
}

/// The unit of classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub author: String,
    pub text: String,
    pub word_count: usize,
    pub source_id: String,
}

impl Document {
    pub fn new(author: impl Into<String>, text: impl Into<String>, source_id: impl Into<String>) -> Self {
        let text = text.into();
        let word_count = text.split_whitespace().count();
        Self {
            author: author.into(),
            text,
            word_count,
            source_id: source_id.into(),
        }
    }
}

/// An ordered document collection plus the canonical (lexicographic) author
/// list that fixes class indices for every downstream model.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    authors: Vec<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        let authors: BTreeSet<&str> = documents.iter().map(|d| d.author.as_str()).collect();
        let authors = authors.into_iter().map(str::to_string).collect();
        Self { documents, authors }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn authors(&self) -> &[String] {
        &self.authors
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Author name -> class index, in lexicographic author order.
    pub fn class_index(&self) -> HashMap<String, usize> {
        self.authors
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect()
    }

    /// Class label of each document, per `class_index`.
    pub fn labels(&self) -> Vec<usize> {
        let index = self.class_index();
        self.documents.iter().map(|d| index[&d.author]).collect()
    }

    /// Canonical JSONL: one record per line, fixed field order
    /// (author, text, word_count, source_id), LF endings.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("document serializes"));
            out.push('\n');
        }
        out
    }

    /// Reads canonical corpus JSONL. `source_id` is honored when present;
    /// `word_count` is always recomputed from the text.
    pub fn from_jsonl(raw: &[u8]) -> Result<Self, IngestError> {
        Ok(Self::new(parse_jsonl_inner(raw, true)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatHint {
    Auto,
    Bracketed,
    Dashed,
}

const MEDIA_PLACEHOLDERS: [&str; 3] = ["<media omitted>", "image omitted", "video omitted"];

fn bracketed_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\[(\d{1,4}[./-]\d{1,2}[./-]\d{1,4},?\s+\d{1,2}[:.]\d{2}(?:[:.]\d{2})?(?:\s?[AaPp]\.?[Mm]\.?)?)\]\s(.*)$",
        )
        .expect("valid regex")
    })
}

fn dashed_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(\d{1,4}[./-]\d{1,2}[./-]\d{1,4},\s+\d{1,2}[:.]\d{2}(?:[:.]\d{2})?(?:\s?[AaPp]\.?[Mm]\.?)?)\s-\s(.*)$",
        )
        .expect("valid regex")
    })
}

fn grammar_re(format: FormatHint) -> &'static Regex {
    match format {
        FormatHint::Bracketed => bracketed_re(),
        FormatHint::Dashed => dashed_re(),
        FormatHint::Auto => unreachable!("auto is resolved before matching"),
    }
}

/// Strips the invisible direction/BOM marks WhatsApp likes to prepend.
fn clean_line(raw: &str) -> &str {
    raw.trim_start_matches(['\u{feff}', '\u{200e}', '\u{200f}'])
        .trim_end()
}

fn detect_format(lines: &[&str]) -> Option<FormatHint> {
    for line in lines {
        if bracketed_re().is_match(line) {
            return Some(FormatHint::Bracketed);
        }
        if dashed_re().is_match(line) {
            return Some(FormatHint::Dashed);
        }
    }
    None
}

/// Parses a WhatsApp text export into messages, in file order.
///
/// Invalid UTF-8 is replaced with U+FFFD. CRLF and LF inputs, and trailing
/// whitespace on any line, parse identically.
pub fn parse_whatsapp(raw: &[u8], format: FormatHint) -> Result<Vec<Message>, IngestError> {
    let text = String::from_utf8_lossy(raw);
    let lines: Vec<&str> = text.lines().map(clean_line).collect();

    let resolved = match format {
        FormatHint::Auto => detect_format(&lines),
        other => Some(other),
    };
    let Some(resolved) = resolved else {
        return Err(empty_input(&lines));
    };
    let re = grammar_re(resolved);

    // Continuation lines attach to `open`; `open = None` after a dropped
    // system line so its continuations are discarded with it.
    let mut messages: Vec<Message> = Vec::new();
    let mut open: Option<Message> = None;
    let mut any_parsed = false;
    let mut unparseable: Vec<usize> = Vec::new();

    for (i, line) in lines.iter().enumerate() {
        if let Some(caps) = re.captures(line) {
            if let Some(prev) = open.take() {
                messages.push(prev);
            }
            let timestamp = caps.get(1).map(|m| m.as_str().to_string());
            let rest = caps.get(2).map_or("", |m| m.as_str());
            match rest.split_once(": ") {
                Some((author, body)) if !author.trim().is_empty() => {
                    any_parsed = true;
                    open = Some(Message {
                        author: author.trim().to_string(),
                        text: body.to_string(),
                        timestamp,
                    });
                }
                // timestamp but no `Author:` segment: system line, dropped
                _ => {}
            }
        } else if line.is_empty() {
            continue;
        } else if let Some(msg) = open.as_mut() {
            if !msg.text.is_empty() {
                msg.text.push(' ');
            }
            msg.text.push_str(line);
        } else {
            unparseable.push(i + 1);
        }
    }
    if let Some(prev) = open.take() {
        messages.push(prev);
    }

    if !any_parsed {
        unparseable.truncate(3);
        return Err(IngestError::EmptyInput(unparseable));
    }

    messages.retain(|m| {
        let lowered = m.text.to_lowercase();
        !MEDIA_PLACEHOLDERS.contains(&lowered.as_str())
    });
    Ok(messages)
}

fn empty_input(lines: &[&str]) -> IngestError {
    let nums = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, _)| i + 1)
        .take(3)
        .collect();
    IngestError::EmptyInput(nums)
}

/// Parses generic labeled JSONL: each non-blank line is an object with string
/// fields `author` and `text`. Stops at the first malformed record.
pub fn parse_jsonl(raw: &[u8]) -> Result<Vec<Document>, IngestError> {
    parse_jsonl_inner(raw, false)
}

fn parse_jsonl_inner(raw: &[u8], keep_source_id: bool) -> Result<Vec<Document>, IngestError> {
    let text = String::from_utf8_lossy(raw);
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| IngestError::MalformedRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        let author = string_field(&value, "author", line_no)?;
        let author = author.trim();
        if author.is_empty() {
            return Err(IngestError::MalformedRecord {
                line: line_no,
                reason: "field `author` is empty".into(),
            });
        }
        let doc_text = string_field(&value, "text", line_no)?;
        if doc_text.is_empty() {
            return Err(IngestError::MalformedRecord {
                line: line_no,
                reason: "field `text` is empty".into(),
            });
        }
        let source_id = match value.get("source_id").and_then(|v| v.as_str()) {
            Some(s) if keep_source_id => s.to_string(),
            _ => format!("jsonl:{line_no}"),
        };
        docs.push(Document::new(author, doc_text, source_id));
    }
    Ok(docs)
}

fn string_field<'v>(
    value: &'v serde_json::Value,
    field: &str,
    line_no: usize,
) -> Result<&'v str, IngestError> {
    match value.get(field) {
        Some(serde_json::Value::String(s)) => Ok(s),
        Some(_) => Err(IngestError::MalformedRecord {
            line: line_no,
            reason: format!("field `{field}` is not a string"),
        }),
        None => Err(IngestError::MalformedRecord {
            line: line_no,
            reason: format!("missing field `{field}`"),
        }),
    }
}

/// Greedily chunks each author's message stream into documents of
/// `target_words` words. The final partial chunk survives only if it holds at
/// least `ceil(target_words / 2)` words.
pub fn chunk_messages(messages: &[Message], target_words: usize) -> Corpus {
    assert!(target_words >= 1, "target_words must be positive");
    let keep_threshold = target_words.div_ceil(2);

    // per-author word streams, authors emitted in sorted order
    let mut streams: HashMap<&str, Vec<&str>> = HashMap::new();
    for msg in messages {
        let entry = streams.entry(msg.author.as_str()).or_default();
        entry.extend(msg.text.split_whitespace());
    }
    let mut authors: Vec<&str> = streams.keys().copied().collect();
    authors.sort_unstable();

    let mut documents = Vec::new();
    for author in authors {
        let words = &streams[author];
        let mut index = 0usize;
        for chunk in words.chunks(target_words) {
            if chunk.len() == target_words || chunk.len() >= keep_threshold {
                documents.push(Document::new(
                    author,
                    chunk.join(" "),
                    format!("{author}:chunk:{index}"),
                ));
                index += 1;
            }
        }
    }
    Corpus::new(documents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dashed_single_line() {
        let msgs = parse_whatsapp(b"12/05/18, 22:01 - Asha: kya kar raha hai", FormatHint::Auto)
            .unwrap();
        assert_eq!(
            msgs,
            vec![Message {
                author: "Asha".into(),
                text: "kya kar raha hai".into(),
                timestamp: Some("12/05/18, 22:01".into()),
            }]
        );
    }

    #[test]
    fn bracketed_continuation_joins_with_space() {
        let msgs =
            parse_whatsapp(b"[12/05/18, 22:01:10] Ravi: haan\nbilkul", FormatHint::Auto).unwrap();
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].author, "Ravi");
        assert_eq!(msgs[0].text, "haan bilkul");
    }

    #[test]
    fn media_placeholders_dropped() {
        let input = b"12/05/18, 22:02 - Asha: <Media omitted>\n\
                      12/05/18, 22:03 - Asha: IMAGE OMITTED\n\
                      12/05/18, 22:04 - Asha: ok";
        let msgs = parse_whatsapp(input, FormatHint::Auto).unwrap();
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].text, "ok");
    }

    #[test]
    fn system_lines_and_their_continuations_dropped() {
        let input = b"12/05/18, 22:01 - Asha: hi\n\
                      12/05/18, 22:02 - Messages to this group are now secured\n\
                      orphan continuation\n\
                      12/05/18, 22:03 - Ravi: yo";
        let msgs = parse_whatsapp(input, FormatHint::Auto).unwrap();
        let texts: Vec<&str> = msgs.iter().map(|m| m.text.as_str()).collect();
        assert_eq!(texts, vec!["hi", "yo"]);
    }

    #[test]
    fn crlf_and_trailing_whitespace_are_invisible() {
        let unix = b"12/05/18, 22:01 - Asha: hi\nthere\n".to_vec();
        let dos = b"12/05/18, 22:01 - Asha: hi   \r\nthere \r\n".to_vec();
        assert_eq!(
            parse_whatsapp(&unix, FormatHint::Auto).unwrap(),
            parse_whatsapp(&dos, FormatHint::Auto).unwrap()
        );
    }

    #[test]
    fn empty_input_reports_first_three_line_numbers() {
        let err = parse_whatsapp(b"junk one\njunk two\n\njunk three\njunk four", FormatHint::Auto)
            .unwrap_err();
        assert_eq!(err, IngestError::EmptyInput(vec![1, 2, 4]));
    }

    #[test]
    fn explicit_hint_overrides_detection() {
        // a dashed line parsed under the bracketed grammar is unparseable
        let err =
            parse_whatsapp(b"12/05/18, 22:01 - Asha: hi", FormatHint::Bracketed).unwrap_err();
        assert!(matches!(err, IngestError::EmptyInput(_)));
    }

    #[test]
    fn jsonl_happy_path_and_blank_lines() {
        let raw = b"{\"author\":\"A\",\"text\":\"hai na\"}\n\n{\"author\":\"B\",\"text\":\"ok\"}";
        let docs = parse_jsonl(raw).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].word_count, 2);
        assert_eq!(docs[0].source_id, "jsonl:1");
        assert_eq!(docs[1].source_id, "jsonl:3");
    }

    #[test]
    fn jsonl_missing_field_aborts_with_line_number() {
        let err = parse_jsonl(b"{\"author\":\"A\",\"text\":\"x\"}\n{\"author\":\"A\"}").unwrap_err();
        assert_eq!(
            err,
            IngestError::MalformedRecord {
                line: 2,
                reason: "missing field `text`".into()
            }
        );
    }

    #[test]
    fn jsonl_non_string_field_rejected() {
        let err = parse_jsonl(b"{\"author\":3,\"text\":\"x\"}").unwrap_err();
        assert!(matches!(err, IngestError::MalformedRecord { line: 1, .. }));
    }

    fn msg(author: &str, text: &str) -> Message {
        Message {
            author: author.into(),
            text: text.into(),
            timestamp: None,
        }
    }

    #[test]
    fn chunk_hand_trace_ten_words_target_four() {
        // 10 words -> documents of 4, 4, and a 2-word remainder; the
        // remainder survives because 2 >= ceil(4/2).
        let messages = vec![
            msg("A", "w1 w2 w3"),
            msg("A", "w4 w5"),
            msg("A", "w6 w7 w8 w9 w10"),
        ];
        let corpus = chunk_messages(&messages, 4);
        let docs = corpus.documents();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[0].text, "w1 w2 w3 w4");
        assert_eq!(docs[1].text, "w5 w6 w7 w8");
        assert_eq!(docs[2].text, "w9 w10");
        assert_eq!(docs[2].source_id, "A:chunk:2");
    }

    #[test]
    fn chunk_short_remainder_discarded() {
        // 9 words, target 4: remainder of 1 < ceil(4/2) = 2 is dropped
        let corpus = chunk_messages(&[msg("A", "a b c d e f g h i")], 4);
        assert_eq!(corpus.len(), 2);
        assert_eq!(
            corpus.documents().iter().map(|d| d.word_count).sum::<usize>(),
            8
        );
    }

    #[test]
    fn chunk_degenerate_target_one() {
        let corpus = chunk_messages(&[msg("A", "x y"), msg("A", "z")], 1);
        assert_eq!(corpus.len(), 3);
        assert!(corpus.documents().iter().all(|d| d.word_count == 1));
    }

    #[test]
    fn chunk_empty_input_gives_empty_corpus() {
        let corpus = chunk_messages(&[], 10);
        assert!(corpus.is_empty());
        assert!(corpus.authors().is_empty());
    }

    #[test]
    fn corpus_authors_sorted_and_deduplicated() {
        let corpus = Corpus::new(vec![
            Document::new("zoya", "a", "s1"),
            Document::new("asha", "b", "s2"),
            Document::new("zoya", "c", "s3"),
        ]);
        assert_eq!(corpus.authors(), ["asha", "zoya"]);
        assert_eq!(corpus.labels(), vec![1, 0, 1]);
    }

    #[test]
    fn canonical_jsonl_round_trip() {
        let corpus = chunk_messages(&[msg("A", "ek do teen"), msg("B", "char paanch")], 2);
        let text = corpus.to_jsonl();
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        let back = Corpus::from_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, corpus);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // chunking never invents words; any deficit comes from the
            // discarded short remainder only
            #[test]
            fn chunk_conserves_words(words in proptest::collection::vec("[a-z]{1,5}", 0..60),
                                     target in 1usize..12) {
                let text = words.join(" ");
                let messages = if text.is_empty() { vec![] } else { vec![msg("A", &text)] };
                let corpus = chunk_messages(&messages, target);
                let total: usize = corpus.documents().iter().map(|d| d.word_count).sum();
                prop_assert!(total <= words.len());
                let deficit = words.len() - total;
                prop_assert!(deficit < target.div_ceil(2));
            }

            #[test]
            fn chunk_is_deterministic(words in proptest::collection::vec("[a-z]{1,4}", 1..40),
                                      target in 1usize..8) {
                let m = vec![msg("A", &words.join(" ")), msg("B", &words.join(" "))];
                let a = chunk_messages(&m, target);
                let b = chunk_messages(&m, target);
                prop_assert_eq!(a.to_jsonl(), b.to_jsonl());
            }
        }
    }
}
