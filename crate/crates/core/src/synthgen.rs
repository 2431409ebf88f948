//! Deterministic synthetic corpora with controllable author separability.
//!
//! Authors are described by a base word distribution plus per-variant-group
//! preferences (spelling choices like `hai`/`h`/`hain` that real chat
//! authors make consistently). A two-knob dial blends every author's
//! distributions toward the pool mean: `variant_skew = 0` gives all authors
//! one shared variant distribution, `1` keeps their own; `vocab_overlap`
//! does the same for base vocabulary with the opposite polarity (`1` =
//! fully shared).
//!
//! Documents are sampled word by word: each slot is a variant slot with
//! probability [`VARIANT_SLOT_RATE`] (group chosen uniformly), otherwise a
//! base-vocabulary draw. Multi-word base entries (fixed collocations) emit
//! their words in order and are truncated at the document boundary, so
//! every document has exactly the requested word count.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::FlatConfig;
use crate::ingest::{Corpus, Document};
use crate::rng;

/// Probability that a word slot is filled from a variant group.
pub const VARIANT_SLOT_RATE: f64 = 0.45;

const DIST_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid profile {author:?}: {reason}")]
    InvalidProfile { author: String, reason: String },
    #[error("need at least 2 author profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad profiles file: {0}")]
    BadProfilesFile(String),
}

/// A named spelling-variant group with this author's preference
/// distribution over its surface forms.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantGroup {
    pub name: String,
    pub prefs: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorProfile {
    pub name: String,
    /// Word (or fixed collocation) sampling distribution; must sum to 1.
    pub base_vocab: Vec<(String, f64)>,
    pub variant_prefs: Vec<VariantGroup>,
    /// (mean, stddev) message length in words; descriptive profile metadata,
    /// document sampling is driven by `words_per_doc`.
    pub msg_len: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityDial {
    /// 0 = all authors share one variant distribution, 1 = each keeps their own.
    pub variant_skew: f64,
    /// 1 = base vocabularies fully shared, 0 = each author keeps their own.
    pub vocab_overlap: f64,
}

impl Default for SeparabilityDial {
    fn default() -> Self {
        Self {
            variant_skew: 1.0,
            vocab_overlap: 1.0,
        }
    }
}

fn check_distribution(
    author: &str,
    what: &str,
    dist: &[(String, f64)],
) -> Result<(), SynthError> {
    let fail = |reason: String| SynthError::InvalidProfile {
        author: author.to_string(),
        reason,
    };
    if dist.is_empty() {
        return Err(fail(format!("{what} is empty")));
    }
    let mut sum = 0.0;
    let mut seen = std::collections::HashSet::new();
    for (word, p) in dist {
        if word.trim().is_empty() {
            return Err(fail(format!("{what} contains an empty word")));
        }
        if !seen.insert(word.as_str()) {
            return Err(fail(format!("{what} lists {word:?} twice")));
        }
        if !(p.is_finite() && *p >= 0.0) {
            return Err(fail(format!("{what}: weight of {word:?} is {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > DIST_EPS {
        return Err(fail(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn validate_profiles(profiles: &[AuthorProfile]) -> Result<(), SynthError> {
    if profiles.len() < 2 {
        return Err(SynthError::TooFewProfiles(profiles.len()));
    }
    let mut names = std::collections::HashSet::new();
    for profile in profiles {
        if profile.name.trim().is_empty() {
            return Err(SynthError::InvalidProfile {
                author: profile.name.clone(),
                reason: "author name is empty".into(),
            });
        }
        if !names.insert(profile.name.as_str()) {
            return Err(SynthError::InvalidProfile {
                author: profile.name.clone(),
                reason: "duplicate author name".into(),
            });
        }
        check_distribution(&profile.name, "base_vocab", &profile.base_vocab)?;
        for group in &profile.variant_prefs {
            check_distribution(
                &profile.name,
                &format!("variant group `{}`", group.name),
                &group.prefs,
            )?;
        }
        if !(profile.msg_len.0 > 0.0 && profile.msg_len.1 >= 0.0) {
            return Err(SynthError::InvalidProfile {
                author: profile.name.clone(),
                reason: format!("msg_len {:?} must be (positive, non-negative)", profile.msg_len),
            });
        }
    }

    // all profiles must declare the same variant groups, and each group's
    // pooled form set must offer a real choice
    let group_names: Vec<&str> = profiles[0].variant_prefs.iter().map(|g| g.name.as_str()).collect();
    for profile in &profiles[1..] {
        let theirs: Vec<&str> = profile.variant_prefs.iter().map(|g| g.name.as_str()).collect();
        if theirs != group_names {
            return Err(SynthError::InvalidProfile {
                author: profile.name.clone(),
                reason: format!(
                    "variant groups {theirs:?} do not match the first profile's {group_names:?}"
                ),
            });
        }
    }
    for (gi, name) in group_names.iter().enumerate() {
        let mut forms = std::collections::HashSet::new();
        for profile in profiles {
            for (form, _) in &profile.variant_prefs[gi].prefs {
                forms.insert(form.as_str());
            }
        }
        if forms.len() < 2 {
            return Err(SynthError::InvalidProfile {
                author: profiles[0].name.clone(),
                reason: format!("variant group `{name}` has fewer than 2 surface forms"),
            });
        }
    }
    Ok(())
}

/// Union-domain mean of the authors' distributions.
fn pooled(dists: &[&[(String, f64)]]) -> Vec<(String, f64)> {
    let mut acc: BTreeMap<&str, f64> = BTreeMap::new();
    for dist in dists {
        for (word, p) in *dist {
            *acc.entry(word.as_str()).or_insert(0.0) += p;
        }
    }
    let n = dists.len() as f64;
    acc.into_iter().map(|(w, p)| (w.to_string(), p / n)).collect()
}

/// `weight_own * own + (1 - weight_own) * shared` over the union domain,
/// sorted by word so sampling order is reproducible.
fn blend(
    own: &[(String, f64)],
    shared: &[(String, f64)],
    weight_own: f64,
) -> Vec<(String, f64)> {
    let mut acc: BTreeMap<&str, f64> = BTreeMap::new();
    for (word, p) in own {
        *acc.entry(word.as_str()).or_insert(0.0) += weight_own * p;
    }
    for (word, p) in shared {
        *acc.entry(word.as_str()).or_insert(0.0) += (1.0 - weight_own) * p;
    }
    acc.into_iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(w, p)| (w.to_string(), p))
        .collect()
}

fn sample<'d>(dist: &'d [(String, f64)], stream: &mut ChaCha8Rng) -> &'d str {
    let u: f64 = stream.gen();
    let mut acc = 0.0;
    for (word, p) in dist {
        acc += p;
        if u < acc {
            return word;
        }
    }
    // numerically possible when u lands in the rounding gap at the top
    &dist.last().expect("distribution is non-empty").0
}

/// The dial-adjusted sampling distributions one author draws from.
#[derive(Debug, Clone)]
pub(crate) struct EffectiveAuthor {
    name: String,
    base: Vec<(String, f64)>,
    variants: Vec<Vec<(String, f64)>>,
}

pub(crate) fn effective_authors(
    profiles: &[AuthorProfile],
    dial: SeparabilityDial,
) -> Vec<EffectiveAuthor> {
    let shared_base = pooled(&profiles.iter().map(|p| p.base_vocab.as_slice()).collect::<Vec<_>>());
    let n_groups = profiles[0].variant_prefs.len();
    let shared_variants: Vec<Vec<(String, f64)>> = (0..n_groups)
        .map(|g| {
            pooled(
                &profiles
                    .iter()
                    .map(|p| p.variant_prefs[g].prefs.as_slice())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();

    profiles
        .iter()
        .map(|p| EffectiveAuthor {
            name: p.name.clone(),
            base: blend(&p.base_vocab, &shared_base, 1.0 - dial.vocab_overlap),
            variants: (0..n_groups)
                .map(|g| blend(&p.variant_prefs[g].prefs, &shared_variants[g], dial.variant_skew))
                .collect(),
        })
        .collect()
}

/// Generates a corpus of `n_docs_per_author` documents of exactly
/// `words_per_doc` words for every profile. Byte-identical for identical
/// `(profiles, dial, seed)`.
pub fn generate(
    profiles: &[AuthorProfile],
    dial: SeparabilityDial,
    n_docs_per_author: usize,
    words_per_doc: usize,
    seed: u64,
) -> Result<Corpus, SynthError> {
    validate_profiles(profiles)?;
    if n_docs_per_author == 0 || words_per_doc == 0 {
        return Err(SynthError::InvalidParameter(
            "documents per author and words per document must be positive".into(),
        ));
    }
    for (knob, value) in [("variant_skew", dial.variant_skew), ("vocab_overlap", dial.vocab_overlap)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(SynthError::InvalidParameter(format!(
                "{knob} must lie in [0, 1], got {value}"
            )));
        }
    }

    let mut effective = effective_authors(profiles, dial);
    effective.sort_by(|a, b| a.name.cmp(&b.name));

    let mut documents = Vec::with_capacity(effective.len() * n_docs_per_author);
    for author in &effective {
        // per-author stream: corpus content does not depend on profile order
        let mut stream = rng::stream(seed, format!("synth:{}", author.name).as_bytes());
        let n_groups = author.variants.len();
        for doc_index in 0..n_docs_per_author {
            let mut words: Vec<&str> = Vec::with_capacity(words_per_doc);
            while words.len() < words_per_doc {
                let take_variant = n_groups > 0 && stream.gen::<f64>() < VARIANT_SLOT_RATE;
                if take_variant {
                    let g = stream.gen_range(0..n_groups);
                    words.push(sample(&author.variants[g], &mut stream));
                } else {
                    let entry = sample(&author.base, &mut stream);
                    for word in entry.split_whitespace() {
                        if words.len() < words_per_doc {
                            words.push(word);
                        }
                    }
                }
            }
            documents.push(Document::new(
                &author.name,
                words.join(" "),
                format!("{}:synth:{}", author.name, doc_index),
            ));
        }
    }
    Ok(Corpus::new(documents))
}

/// Deterministic long-tail filler vocabulary: two- and three-syllable
/// pseudo-words over a fixed syllable inventory, Zipf-weighted. Shared by
/// all default authors, so it carries no authorship signal; it exists to
/// give the feature space realistic width and character-gram overlap.
fn long_tail_vocab(count: usize, reserved: &std::collections::HashSet<&str>) -> Vec<(String, f64)> {
    const CONSONANTS: [&str; 24] = [
        "k", "kh", "g", "gh", "ch", "j", "jh", "t", "th", "d", "dh", "n", "p", "ph", "b", "bh",
        "m", "y", "r", "l", "v", "s", "sh", "z",
    ];
    const VOWELS: [&str; 10] = ["a", "aa", "i", "ee", "u", "oo", "e", "ai", "o", "au"];
    let syllable = |i: usize| {
        format!(
            "{}{}",
            CONSONANTS[i % CONSONANTS.len()],
            VOWELS[(i / CONSONANTS.len()) % VOWELS.len()]
        )
    };
    let n_syllables = CONSONANTS.len() * VOWELS.len();

    // enumerate with a coprime stride so consecutive words do not share a
    // leading syllable; purely cosmetic but keeps the tail varied up front
    let mut words = Vec::with_capacity(count);
    'outer: for length in [2usize, 3] {
        let combos = n_syllables.pow(length as u32);
        let stride = 7919; // prime, coprime with 240^2 and 240^3
        for step in 0..combos {
            let mut v = (step * stride) % combos;
            let mut word = String::new();
            for _ in 0..length {
                word.push_str(&syllable(v % n_syllables));
                v /= n_syllables;
            }
            if reserved.contains(word.as_str()) || words.iter().any(|(w, _): &(String, f64)| w == &word) {
                continue;
            }
            words.push((word, 0.0));
            if words.len() == count {
                break 'outer;
            }
        }
    }
    words
        .into_iter()
        .enumerate()
        .map(|(i, (w, _))| (w, 1.0 / (i + 8) as f64))
        .collect()
}

/// How strongly a default author prefers their form within a group.
const DEFAULT_PREF: f64 = 0.88;

/// The built-in four-author pack: shared chat vocabulary plus a wide shared
/// long tail, a signature word pair per author, and fifteen spelling-variant
/// groups with moderately peaked per-author preferences. No single form
/// gives an author away; the accumulation over groups does.
pub fn default_profiles() -> Vec<AuthorProfile> {
    let common: &[(&str, f64)] = &[
        ("kya", 5.0),
        ("kar", 4.0),
        ("na", 4.0),
        ("ka", 3.0),
        ("ki", 3.0),
        ("ko", 3.0),
        ("to", 3.0),
        ("bhi", 3.0),
        ("bas", 2.0),
        ("ab", 2.0),
        ("kal", 2.0),
        ("aaj", 2.0),
        ("ghar", 2.0),
        ("kaam", 2.0),
        ("time", 2.0),
        ("phone", 1.0),
        ("school", 1.0),
        ("movie", 1.0),
        ("khana", 1.0),
        ("paani", 1.0),
        ("dekh", 1.0),
        ("bol", 1.0),
        ("sun", 1.0),
        ("chal", 1.0),
        ("mat", 1.0),
        ("sab", 1.0),
        ("log", 1.0),
        ("dost", 1.0),
        ("bhai", 1.0),
        ("ok", 1.0),
        ("good", 1.0),
        ("night", 1.0),
        ("kya kar", 1.5),
        ("chal na", 1.0),
    ];

    // thirty spelling-variant groups; the first carries three forms
    let groups: [(&str, &[&str]); 30] = [
        ("hai", &["hai", "h", "hain"]),
        ("mein", &["mein", "main"]),
        ("raha", &["raha", "rha"]),
        ("nahi", &["nahi", "nhi"]),
        ("kyun", &["kyun", "kyu"]),
        ("acha", &["acha", "accha"]),
        ("thik", &["thik", "theek"]),
        ("yaar", &["yaar", "yar"]),
        ("please", &["please", "plz"]),
        ("okay", &["okay", "okk"]),
        ("haan", &["haan", "han"]),
        ("gaya", &["gaya", "gya"]),
        ("wala", &["wala", "vala"]),
        ("karna", &["karna", "krna"]),
        ("kuch", &["kuch", "kch"]),
        ("bahut", &["bahut", "bohot"]),
        ("abhi", &["abhi", "abi"]),
        ("kaise", &["kaise", "kese"]),
        ("kahan", &["kahan", "kaha"]),
        ("sahi", &["sahi", "shi"]),
        ("matlab", &["matlab", "mtlb"]),
        ("tumhara", &["tumhara", "tumhra"]),
        ("pata", &["pata", "pta"]),
        ("hoga", &["hoga", "hga"]),
        ("kitna", &["kitna", "ktna"]),
        ("karo", &["karo", "kro"]),
        ("liye", &["liye", "lie"]),
        ("hona", &["hona", "hna"]),
        ("waise", &["waise", "vese"]),
        ("mujhe", &["mujhe", "mje"]),
    ];

    // preferred-form index per author per group; the first three groups
    // carry the classic idiolect examples, and every author pair disagrees
    // on at least half the groups
    let patterns: [fn(usize) -> usize; 4] = [
        |_| 0,
        |_| 1,
        |g| if g == 0 { 2 } else { g % 2 },
        |g| if g == 0 { 0 } else { 1 - g % 2 },
    ];
    let authors: [(&str, [(&str, f64); 2]); 4] = [
        ("asha", [("haha", 2.0), ("arre", 1.0)]),
        ("meera", [("hehe", 2.0), ("uff", 1.0)]),
        ("ravi", [("lol", 2.0), ("abe", 1.0)]),
        ("zoya", [("lmao", 2.0), ("ohho", 1.0)]),
    ];

    let mut reserved: std::collections::HashSet<&str> =
        common.iter().map(|&(w, _)| w).collect();
    reserved.extend(groups.iter().flat_map(|(_, forms)| forms.iter().copied()));
    reserved.extend(
        authors
            .iter()
            .flat_map(|(_, signatures)| signatures.iter().map(|&(w, _)| w)),
    );
    let tail = long_tail_vocab(700, &reserved);

    // core words keep a bit over half the base mass, the long tail the rest
    let core_total: f64 = common.iter().map(|&(_, p)| p).sum::<f64>() + 3.0;
    let tail_total: f64 = tail.iter().map(|&(_, p)| p).sum();
    let tail_scale = core_total * 0.8 / tail_total;

    authors
        .iter()
        .zip(&patterns)
        .map(|((name, signatures), pattern)| {
            let mut vocab: Vec<(String, f64)> =
                common.iter().map(|&(w, p)| (w.to_string(), p)).collect();
            vocab.extend(signatures.iter().map(|&(w, p)| (w.to_string(), p)));
            vocab.extend(tail.iter().map(|(w, p)| (w.clone(), p * tail_scale)));
            let total: f64 = vocab.iter().map(|(_, p)| p).sum();
            for (_, p) in &mut vocab {
                *p /= total;
            }

            let variant_prefs = groups
                .iter()
                .enumerate()
                .map(|(g, (group_name, forms))| {
                    let liked = pattern(g);
                    let spread = (1.0 - DEFAULT_PREF) / (forms.len() - 1) as f64;
                    VariantGroup {
                        name: group_name.to_string(),
                        prefs: forms
                            .iter()
                            .enumerate()
                            .map(|(i, &f)| {
                                (f.to_string(), if i == liked { DEFAULT_PREF } else { spread })
                            })
                            .collect(),
                    }
                })
                .collect();

            AuthorProfile {
                name: name.to_string(),
                base_vocab: vocab,
                variant_prefs,
                msg_len: (8.0, 3.0),
            }
        })
        .collect()
}

/// Loads profiles from the flat config format:
///
/// ```text
/// author.0.name = asha
/// author.0.msg_len = 8 3
/// author.0.vocab = kya:0.4, kar:0.3, kya kar:0.3
/// author.0.variant.hai = hai:0.9, h:0.05, hain:0.05
/// ```
pub fn profiles_from_config(config: &FlatConfig) -> Result<Vec<AuthorProfile>, SynthError> {
    let mut indices: Vec<usize> = Vec::new();
    for key in config.keys_with_prefix("author.") {
        let rest = &key["author.".len()..];
        let Some((index, _)) = rest.split_once('.') else {
            return Err(SynthError::BadProfilesFile(format!("malformed key `{key}`")));
        };
        let index: usize = index
            .parse()
            .map_err(|_| SynthError::BadProfilesFile(format!("bad author index in `{key}`")))?;
        if !indices.contains(&index) {
            indices.push(index);
        }
    }
    indices.sort_unstable();
    if indices.is_empty() {
        return Err(SynthError::BadProfilesFile("no author.<i>.* keys".into()));
    }
    if *indices.last().expect("non-empty") != indices.len() - 1 {
        return Err(SynthError::BadProfilesFile(format!(
            "author indices must be contiguous from 0, got {indices:?}"
        )));
    }

    let mut profiles = Vec::with_capacity(indices.len());
    for i in indices {
        let prefix = format!("author.{i}.");
        let name = config
            .get(&format!("{prefix}name"))
            .ok_or_else(|| SynthError::BadProfilesFile(format!("missing {prefix}name")))?
            .to_string();
        let vocab_text = config
            .get(&format!("{prefix}vocab"))
            .ok_or_else(|| SynthError::BadProfilesFile(format!("missing {prefix}vocab")))?;
        let base_vocab = parse_weighted_list(vocab_text)
            .map_err(|e| SynthError::BadProfilesFile(format!("{prefix}vocab: {e}")))?;

        let msg_len = match config.get(&format!("{prefix}msg_len")) {
            None => (8.0, 3.0),
            Some(text) => {
                let parts: Vec<&str> = text.split_whitespace().collect();
                let parsed: Option<(f64, f64)> = match parts.as_slice() {
                    [m, s] => m.parse().ok().zip(s.parse().ok()),
                    _ => None,
                };
                parsed.ok_or_else(|| {
                    SynthError::BadProfilesFile(format!("{prefix}msg_len: expected `mean stddev`"))
                })?
            }
        };

        let variant_prefix = format!("{prefix}variant.");
        let mut variant_prefs = Vec::new();
        let group_keys: Vec<String> = config
            .keys_with_prefix(&variant_prefix)
            .map(str::to_string)
            .collect();
        for key in group_keys {
            let group_name = key[variant_prefix.len()..].to_string();
            let prefs = parse_weighted_list(config.get(&key).expect("key exists"))
                .map_err(|e| SynthError::BadProfilesFile(format!("{key}: {e}")))?;
            variant_prefs.push(VariantGroup {
                name: group_name,
                prefs,
            });
        }
        variant_prefs.sort_by(|a, b| a.name.cmp(&b.name));

        profiles.push(AuthorProfile {
            name,
            base_vocab,
            variant_prefs,
            msg_len,
        });
    }
    Ok(profiles)
}

/// `word:weight, word:weight, ...`; words may contain spaces (collocations).
fn parse_weighted_list(text: &str) -> Result<Vec<(String, f64)>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (word, weight) = part
            .rsplit_once(':')
            .ok_or_else(|| format!("entry {part:?} is not `word:weight`"))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| format!("bad weight in {part:?}"))?;
        out.push((word.trim().to_string(), weight));
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}
