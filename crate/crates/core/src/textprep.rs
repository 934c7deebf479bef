//! Normalization and tokenization for mixed Arabic / Latin text.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Minimal default stopword list: common Arabic function words (including
/// dialect spellings) and a handful of English ones.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "في", "من", "على", "الى", "إلى", "عن", "مع", "هل", "ما", "ماذا", "لا", "لم", "لن", "او", "أو",
    "ان", "أن", "إن", "هذا", "هذه", "ذلك", "تلك", "هو", "هي", "انا", "أنا", "نحن", "انت", "أنت",
    "كان", "كانت", "يكون", "قد", "ثم", "كل", "بعد", "قبل", "عند", "التي", "الذي", "الذين", "و",
    "يا", "اي", "أي", "شي", "شيء", "بس", "جدا", "the", "a", "an", "and", "or", "of", "to", "in",
    "is", "it", "for", "on", "with",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepOptions {
    pub remove_diacritics: bool,
    pub strip_nonalpha: bool,
    pub normalize_alef_ya: bool,
    pub light_stem: bool,
    pub lowercase_latin: bool,
    pub stopwords: Vec<String>,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self {
            remove_diacritics: true,
            strip_nonalpha: true,
            normalize_alef_ya: true,
            light_stem: false,
            lowercase_latin: true,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PrepOptions {
    pub fn with_stopwords(mut self, words: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }
}

/// A document after cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: String,
}

/// Arabic short vowels, tanween, shadda, sukun and the superscript alef.
pub fn is_arabic_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}')
}

fn fold_arabic(c: char) -> char {
    match c {
        'أ' | 'إ' | 'آ' => 'ا',
        'ة' => 'ه',
        'ى' => 'ي',
        other => other,
    }
}

fn is_latin_block(c: char) -> bool {
    (c as u32) < 0x0250
}

/// Normalizes text. The output has single spaces between runs and no
/// leading or trailing whitespace; applying it twice changes nothing.
pub fn normalize(text: &str, opts: &PrepOptions) -> String {
    let mut buf = String::with_capacity(text.len());
    for c in text.chars() {
        if opts.remove_diacritics && is_arabic_diacritic(c) {
            continue;
        }
        let c = if opts.normalize_alef_ya { fold_arabic(c) } else { c };
        if opts.lowercase_latin && is_latin_block(c) && c.is_uppercase() {
            buf.extend(c.to_lowercase());
        } else {
            buf.push(c);
        }
    }
    let mut out = String::with_capacity(buf.len());
    for c in buf.chars() {
        let keep = !opts.strip_nonalpha || c.is_alphabetic() || c.is_whitespace();
        let c = if keep { c } else { ' ' };
        if c.is_whitespace() {
            if !out.is_empty() && !out.ends_with(' ') {
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Splits on runs of Unicode whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

const STEM_PREFIXES: &[&str] = &["ال", "لل", "و", "ف", "ب", "ك"];
const STEM_SUFFIXES: &[&str] = &["ها", "ان", "ات", "ون", "ين", "ه", "ة", "ي"];

fn strip_affix(token: &str, affixes: &[&str], leading: bool) -> Option<String> {
    // Longest matching affix wins.
    let mut best: Option<&str> = None;
    for a in affixes {
        let hit = if leading {
            token.starts_with(a)
        } else {
            token.ends_with(a)
        };
        if hit && best.is_none_or(|b| a.chars().count() > b.chars().count()) {
            best = Some(a);
        }
    }
    let a = best?;
    let rest = if leading {
        &token[a.len()..]
    } else {
        &token[..token.len() - a.len()]
    };
    (rest.chars().count() >= 3).then(|| rest.to_owned())
}

/// Conservative single-affix stemmer: removes at most one prefix and one
/// suffix, each only if at least three characters remain.
pub fn light_stem(token: &str) -> String {
    let t = strip_affix(token, STEM_PREFIXES, true).unwrap_or_else(|| token.to_owned());
    strip_affix(&t, STEM_SUFFIXES, false).unwrap_or(t)
}

/// Reads a stopword file: one token per line, `#` starts a comment.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

pub fn parse_stopwords(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Compiled preprocessing pipeline. Stopwords are normalized with the same
/// options as documents so that spelling variants still match.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    opts: PrepOptions,
    stopwords: HashSet<String>,
}

impl Preprocessor {
    pub fn new(opts: PrepOptions) -> Self {
        let stopwords = opts
            .stopwords
            .iter()
            .flat_map(|w| tokenize(&normalize(w, &opts)))
            .collect();
        Self { opts, stopwords }
    }

    pub fn options(&self) -> &PrepOptions {
        &self.opts
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// normalize → tokenize → drop stopwords → optional light stem.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let normalized = normalize(text, &self.opts);
        tokenize(&normalized)
            .into_iter()
            .filter(|t| !self.is_stopword(t))
            .map(|t| if self.opts.light_stem { light_stem(&t) } else { t })
            // stemming can land on a stopword
            .filter(|t| !self.is_stopword(t))
            .collect()
    }
}

/// Result of [`preprocess_corpus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub documents: Vec<TokenizedDocument>,
    /// Documents left with no tokens. They are kept, not dropped.
    pub empty_documents: usize,
}

pub fn preprocess_corpus(corpus: &Corpus, opts: &PrepOptions) -> Preprocessed {
    let prep = Preprocessor::new(opts.clone());
    let mut empty_documents = 0;
    let documents = corpus
        .documents()
        .iter()
        .map(|d| {
            let tokens = prep.tokens(&d.text);
            if tokens.is_empty() {
                empty_documents += 1;
            }
            TokenizedDocument {
                id: d.id.clone(),
                tokens,
                label: d.label.clone(),
            }
        })
        .collect();
    Preprocessed {
        documents,
        empty_documents,
    }
}

/// Drops documents whose token sequence exactly repeats an earlier one.
/// Returns the kept documents and how many were removed. Near-duplicate
/// detection is not attempted.
pub fn remove_exact_duplicates(docs: Vec<TokenizedDocument>) -> (Vec<TokenizedDocument>, usize) {
    let mut seen = HashSet::new();
    let before = docs.len();
    let kept: Vec<_> = docs
        .into_iter()
        .filter(|d| seen.insert(d.tokens.clone()))
        .collect();
    let removed = before - kept.len();
    (kept, removed)
}
