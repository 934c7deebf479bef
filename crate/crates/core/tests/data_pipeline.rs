use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use skewclass::corpus::{class_histogram, generate_synthetic_corpus, largest_remainder, load_corpus, save_corpus};
use skewclass::features::{build_vocabulary, encode_sequences};
use skewclass::rng::seeded;
use skewclass::textprep::{is_arabic_diacritic, normalize, preprocess_corpus, tokenize};
use skewclass::{Corpus, Document, GenConfig, PrepOptions, TokenizedDocument};

#[test]
fn thousand_record_round_trip() {
    let pieces = ["صداع", "ألم \"حاد\"", "back\\slash", "tab\there", "سُعال", "fever", "新", "é"];
    let mut rng = seeded(77);
    let docs: Vec<Document> = (0..1000)
        .map(|i| Document {
            id: format!("r{i}"),
            text: (0..rng.gen_range(0..6))
                .map(|_| pieces[rng.gen_range(0..pieces.len())])
                .collect::<Vec<_>>()
                .join(" "),
            label: format!("L{}", rng.gen_range(0..7)),
        })
        .collect();
    let corpus = Corpus::from_documents(docs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    save_corpus(&corpus, &a).unwrap();
    let loaded = load_corpus(&a).unwrap();
    save_corpus(&loaded, &b).unwrap();
    assert_eq!(load_corpus(&b).unwrap(), loaded);
    assert_eq!(loaded.documents(), corpus.documents());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn generated_counts_match_size_table() {
    let cfg = GenConfig {
        num_classes: 5,
        zipf_exponent: 1.0,
        total_docs: 100,
        seed: 3,
        ..Default::default()
    };
    let g = generate_synthetic_corpus(&cfg).unwrap();
    assert_eq!(class_histogram(&g.corpus).counts(), g.class_sizes.as_slice());
    // Largest-remainder apportionment of 100 over c^-1, computed offline.
    assert_eq!(g.class_sizes, vec![44, 22, 14, 11, 9]);
}

#[test]
fn zipf_apportionment_values() {
    // Computed offline with an independent floor-then-remainder script.
    let w = |k: usize, s: f64| (1..=k).map(|c| (c as f64).powf(-s)).collect::<Vec<_>>();
    assert_eq!(largest_remainder(&w(4, 1.6), 1000), vec![621, 205, 107, 67]);
    assert_eq!(
        largest_remainder(&w(12, 1.6), 6000),
        vec![3126, 1031, 539, 340, 238, 178, 139, 112, 93, 78, 67, 59]
    );
}

#[test]
fn diacritic_fixture_matches_code_point_filter() {
    let text = include_str!("fixtures/diacritized.txt");
    let opts = PrepOptions {
        remove_diacritics: true,
        strip_nonalpha: false,
        normalize_alef_ya: false,
        light_stem: false,
        lowercase_latin: false,
        stopwords: Vec::new(),
    };
    let listed: BTreeSet<u32> = (0x064B..=0x0652).chain([0x0670]).collect();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 50);
    for line in lines {
        let oracle: String = line.chars().filter(|c| !listed.contains(&(*c as u32))).collect();
        assert_ne!(oracle, line);
        assert_eq!(normalize(line, &opts), oracle);
        assert!(!normalize(line, &opts).chars().any(is_arabic_diacritic));
    }
}

#[test]
fn vocabulary_cap_keeps_top_ranked_tokens() {
    let g = generate_synthetic_corpus(&GenConfig {
        total_docs: 500,
        num_classes: 6,
        background_vocab: 300,
        seed: 8,
        ..Default::default()
    })
    .unwrap();
    let docs = preprocess_corpus(&g.corpus, &PrepOptions::default()).documents;
    let vocab = build_vocabulary(&docs, 1, 100).unwrap();

    let mut df: HashMap<&str, usize> = HashMap::new();
    for d in &docs {
        let uniq: BTreeSet<&str> = d.tokens.iter().map(String::as_str).collect();
        for t in uniq {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let expected: Vec<String> = ranked.iter().take(100).map(|(t, _)| t.to_string()).collect();
    assert_eq!(vocab.tokens(), expected.as_slice());
    for (t, n) in ranked.iter().take(100) {
        assert_eq!(vocab.df(t), Some(*n));
    }
}

#[test]
fn sequence_truncation_matches_slicing() {
    let tokens: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
    let doc = TokenizedDocument {
        id: "x".into(),
        tokens: tokens.clone(),
        label: "A".into(),
    };
    let vocab = build_vocabulary(std::slice::from_ref(&doc), 1, 100).unwrap();
    let seqs = encode_sequences(&[doc], &vocab, 5, &["A".to_string()]).unwrap();
    let expected: Vec<u32> = tokens[..5].iter().map(|t| vocab.sequence_id(t)).collect();
    assert_eq!(seqs.row_ids(0), expected.as_slice());
    assert_eq!(seqs.row_mask(0), &[1, 1, 1, 1, 1]);
}

#[test]
fn generated_text_survives_preprocessing_unchanged() {
    let g = generate_synthetic_corpus(&GenConfig {
        total_docs: 200,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    let pre = preprocess_corpus(&g.corpus, &PrepOptions::default());
    for (d, t) in g.corpus.documents().iter().zip(&pre.documents) {
        assert_eq!(tokenize(&d.text), t.tokens);
    }
}
