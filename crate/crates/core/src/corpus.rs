//! Labeled document corpora.
//!
//! On disk a corpus is UTF-8 JSON lines, one record per line with exactly the
//! keys `id`, `text` and `label`. Label order is the order of first
//! appearance in the file and defines class indices everywhere downstream.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::weighting::KeywordTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    labels: Vec<String>,
}

impl Corpus {
    /// Builds a corpus with an explicit label order.
    ///
    /// Fails on empty or duplicate ids, duplicate labels, or a document whose
    /// label is not declared.
    pub fn new(documents: Vec<Document>, labels: Vec<String>) -> Result<Self> {
        let mut seen_labels = HashSet::new();
        for l in &labels {
            if !seen_labels.insert(l.as_str()) {
                return Err(Error::invalid(format!("label `{l}` declared twice")));
            }
        }
        let mut ids = HashSet::with_capacity(documents.len());
        for d in &documents {
            if d.id.is_empty() {
                return Err(Error::invalid("document id must be non-empty"));
            }
            if !ids.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
            if !seen_labels.contains(d.label.as_str()) {
                return Err(Error::UnknownLabel(d.label.clone()));
            }
        }
        Ok(Self { documents, labels })
    }

    /// Builds a corpus whose labels are taken in order of first appearance.
    pub fn from_documents(documents: Vec<Document>) -> Result<Self> {
        let labels = first_appearance_labels(&documents);
        Self::new(documents, labels)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Class index of every document, in document order.
    pub fn label_indices(&self) -> Vec<usize> {
        let map: HashMap<&str, usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        self.documents.iter().map(|d| map[d.label.as_str()]).collect()
    }

    /// A sub-corpus with the given documents (in the given order) and the
    /// full label set.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Serializes to the line format accepted by [`load_corpus`].
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            out.push_str(&serde_json::to_string(d).expect("documents serialize"));
            out.push('\n');
        }
        out
    }
}

fn first_appearance_labels(documents: &[Document]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut labels = Vec::new();
    for d in documents {
        if seen.insert(d.label.as_str()) {
            labels.push(d.label.clone());
        }
    }
    labels
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path)
}

pub(crate) fn parse_corpus(text: &str, path: &Path) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut ids = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if !ids.insert(doc.id.clone()) {
            return Err(Error::DuplicateId(doc.id));
        }
        documents.push(doc);
    }
    if documents.is_empty() {
        return Err(Error::Empty(format!("corpus file {}", path.display())));
    }
    Corpus::from_documents(documents)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(corpus.to_jsonl().as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Per-class document counts in corpus label order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassHistogram {
    labels: Vec<String>,
    counts: Vec<usize>,
}

impl ClassHistogram {
    pub fn new(labels: Vec<String>, counts: Vec<usize>) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: counts.len(),
            });
        }
        Ok(Self { labels, counts })
    }

    /// Counts class indices against a label list.
    pub fn from_indices(labels: &[String], indices: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = vec![0; labels.len()];
        for i in indices {
            counts[i] += 1;
        }
        Self {
            labels: labels.to_vec(),
            counts,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.counts[i])
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }
}

pub fn class_histogram(corpus: &Corpus) -> ClassHistogram {
    ClassHistogram::from_indices(corpus.labels(), corpus.label_indices())
}

/// Synthetic corpus generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub num_classes: usize,
    pub total_docs: usize,
    pub zipf_exponent: f64,
    pub keyword_vocab_per_class: usize,
    pub background_vocab: usize,
    pub keyword_prob: f64,
    pub doc_length_min: usize,
    pub doc_length_max: usize,
    pub seed: u64,
    pub keyword_prefix: String,
    pub background_prefix: String,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            num_classes: 12,
            total_docs: 6000,
            zipf_exponent: 1.6,
            keyword_vocab_per_class: 20,
            background_vocab: 500,
            keyword_prob: 0.8,
            doc_length_min: 4,
            doc_length_max: 12,
            seed: 0,
            keyword_prefix: "kw".into(),
            background_prefix: "bg".into(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::invalid("num_classes must be at least 2"));
        }
        if self.num_classes > self.total_docs {
            return Err(Error::invalid(format!(
                "num_classes ({}) exceeds total_docs ({})",
                self.num_classes, self.total_docs
            )));
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return Err(Error::invalid("zipf_exponent must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.keyword_prob) {
            return Err(Error::invalid("keyword_prob must lie in [0, 1]"));
        }
        if self.doc_length_min < 1 || self.doc_length_max < self.doc_length_min {
            return Err(Error::invalid("doc length range must satisfy 1 <= min <= max"));
        }
        if self.keyword_vocab_per_class < 1 || self.background_vocab < 1 {
            return Err(Error::invalid("vocabulary sizes must be at least 1"));
        }
        Ok(())
    }

    /// Zipf class sizes: class `c` (1-based) gets weight `c^-s`, apportioned
    /// over `total_docs` by largest remainder.
    pub fn class_sizes(&self) -> Vec<usize> {
        let weights: Vec<f64> = (1..=self.num_classes)
            .map(|c| (c as f64).powf(-self.zipf_exponent))
            .collect();
        largest_remainder(&weights, self.total_docs)
    }

    pub fn class_name(&self, class: usize) -> String {
        let width = self.num_classes.to_string().len().max(2);
        format!("class_{:0width$}", class + 1)
    }
}

/// Apportions `total` proportionally to `weights`: floor each quota, then
/// hand the leftover units to the largest fractional parts (lower index
/// wins ties). The result always sums to `total`.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

/// Output of [`generate_synthetic_corpus`].
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub keywords: KeywordTable,
    pub class_sizes: Vec<usize>,
}

fn encode_word(prefix: &str, mut n: usize, width: usize) -> String {
    let mut letters = vec![b'a'; width];
    for slot in letters.iter_mut().rev() {
        *slot = b'a' + (n % 26) as u8;
        n /= 26;
    }
    let mut s = String::with_capacity(prefix.len() + width);
    s.push_str(prefix);
    s.push_str(std::str::from_utf8(&letters).expect("ascii"));
    s
}

fn letters_needed(n: usize) -> usize {
    let mut width = 1;
    let mut cap = 26usize;
    while cap < n {
        width += 1;
        cap = cap.saturating_mul(26);
    }
    width
}

/// Generates a long-tailed labeled corpus.
///
/// Documents are emitted class by class. For every document the generator
/// draws, in order: the length, whether it carries a keyword, then the
/// background tokens, then (if keyworded) the keyword position and keyword.
pub fn generate_synthetic_corpus(cfg: &GenConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let sizes = cfg.class_sizes();
    let class_width = letters_needed(cfg.num_classes);
    let kw_width = letters_needed(cfg.keyword_vocab_per_class);
    let bg_width = letters_needed(cfg.background_vocab);

    let background: Vec<String> = (0..cfg.background_vocab)
        .map(|j| encode_word(&cfg.background_prefix, j, bg_width))
        .collect();
    let keyword_vocab: Vec<Vec<String>> = (0..cfg.num_classes)
        .map(|c| {
            let class_prefix = encode_word(&cfg.keyword_prefix, c, class_width);
            (0..cfg.keyword_vocab_per_class)
                .map(|j| encode_word(&class_prefix, j, kw_width))
                .collect()
        })
        .collect();

    let mut all = HashSet::new();
    for w in background.iter().chain(keyword_vocab.iter().flatten()) {
        if !all.insert(w.as_str()) {
            return Err(Error::invalid(format!(
                "keyword and background vocabularies overlap on `{w}`"
            )));
        }
    }

    let mut rng = seeded(cfg.seed);
    let labels: Vec<String> = (0..cfg.num_classes).map(|c| cfg.class_name(c)).collect();
    let mut documents = Vec::with_capacity(cfg.total_docs);
    let id_width = cfg.total_docs.to_string().len();
    for (c, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let len = rng.gen_range(cfg.doc_length_min..=cfg.doc_length_max);
            let keyworded = rng.gen::<f64>() < cfg.keyword_prob;
            let mut tokens: Vec<&str> = (0..len)
                .map(|_| background[rng.gen_range(0..background.len())].as_str())
                .collect();
            if keyworded {
                let pos = rng.gen_range(0..len);
                let kw = rng.gen_range(0..keyword_vocab[c].len());
                tokens[pos] = keyword_vocab[c][kw].as_str();
            }
            documents.push(Document {
                id: format!("d{:0id_width$}", documents.len() + 1),
                text: tokens.join(" "),
                label: labels[c].clone(),
            });
        }
    }

    let mut keywords = KeywordTable::default();
    for (c, vocab) in keyword_vocab.into_iter().enumerate() {
        keywords.insert(labels[c].clone(), vocab);
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::new(documents, labels)?,
        keywords,
        class_sizes: sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str, label: &str) -> Document {
        Document {
            id: id.into(),
            text: text.into(),
            label: label.into(),
        }
    }

    #[test]
    fn parses_three_records_with_first_appearance_labels() {
        let text = r#"{"id":"q1","text":"ألم في الصدر","label":"Cardiology"}
{"id":"q2","text":"حكة شديده","label":"Allergy"}
{"id":"q3","text":"ضيق نفس","label":"Cardiology"}
"#;
        let c = parse_corpus(text, Path::new("mem")).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.labels(), ["Cardiology", "Allergy"]);
        assert_eq!(c.label_indices(), vec![0, 1, 0]);
    }

    #[test]
    fn duplicate_id_is_named() {
        let text = "{\"id\":\"q1\",\"text\":\"a\",\"label\":\"A\"}\n{\"id\":\"q1\",\"text\":\"b\",\"label\":\"B\"}\n";
        let err = parse_corpus(text, Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "q1"));
        assert!(err.to_string().contains("q1"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"id\":\"q1\",\"text\":\"a\",\"label\":\"A\"}\n{\"id\":\"q2\",\"text\":\"b\"}\n";
        match parse_corpus(text, Path::new("mem")).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let extra = "{\"id\":\"q1\",\"text\":\"a\",\"label\":\"A\",\"x\":1}\n";
        assert!(matches!(
            parse_corpus(extra, Path::new("mem")),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            parse_corpus("", Path::new("mem")),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn histogram_counts_and_zero_classes() {
        let c = Corpus::from_documents(vec![
            doc("1", "x", "A"),
            doc("2", "y", "A"),
            doc("3", "z", "B"),
        ])
        .unwrap();
        let h = class_histogram(&c);
        assert_eq!(h.get("A"), Some(2));
        assert_eq!(h.get("B"), Some(1));
        assert_eq!(h.total(), 3);

        let empty = Corpus::new(vec![], vec!["A".into(), "B".into()]).unwrap();
        let h = class_histogram(&empty);
        assert_eq!(h.counts(), [0, 0]);
    }

    #[test]
    fn uniform_zipf_splits_evenly() {
        let cfg = GenConfig {
            num_classes: 2,
            total_docs: 10,
            zipf_exponent: 0.0,
            ..GenConfig::default()
        };
        assert_eq!(cfg.class_sizes(), vec![5, 5]);
    }

    #[test]
    fn generator_rejects_more_classes_than_docs() {
        let cfg = GenConfig {
            num_classes: 11,
            total_docs: 10,
            ..GenConfig::default()
        };
        assert!(generate_synthetic_corpus(&cfg).is_err());
    }

    #[test]
    fn generator_rejects_overlapping_vocabularies() {
        // Background words "kwaa", "kwab", ... collide with class 0's
        // keywords "kw" + "a" + "a", "kw" + "a" + "b".
        let cfg = GenConfig {
            num_classes: 2,
            total_docs: 10,
            keyword_vocab_per_class: 2,
            background_vocab: 5,
            keyword_prefix: "kw".into(),
            background_prefix: "kwa".into(),
            ..GenConfig::default()
        };
        let err = generate_synthetic_corpus(&cfg).unwrap_err();
        assert!(err.to_string().contains("overlap"));
    }

    #[test]
    fn generated_histogram_matches_size_table() {
        let cfg = GenConfig {
            num_classes: 5,
            total_docs: 100,
            zipf_exponent: 1.0,
            seed: 3,
            ..GenConfig::default()
        };
        let g = generate_synthetic_corpus(&cfg).unwrap();
        assert_eq!(class_histogram(&g.corpus).counts(), g.class_sizes.as_slice());
        assert_eq!(g.class_sizes.iter().sum::<usize>(), 100);
    }

    #[test]
    fn generator_is_deterministic() {
        let cfg = GenConfig {
            num_classes: 4,
            total_docs: 1000,
            zipf_exponent: 1.6,
            seed: 7,
            ..GenConfig::default()
        };
        let a = generate_synthetic_corpus(&cfg).unwrap();
        let b = generate_synthetic_corpus(&cfg).unwrap();
        assert_eq!(a.corpus.to_jsonl(), b.corpus.to_jsonl());
    }
}
