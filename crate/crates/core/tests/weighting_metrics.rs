use rand::Rng;
use skewclass::corpus::{class_histogram, generate_synthetic_corpus, ClassHistogram};
use skewclass::evalmetrics::{confusion_matrix, metrics_report, pr_curve, rare_class_report, stratified_kfold, stratified_split};
use skewclass::features::build_vocabulary;
use skewclass::rng::seeded;
use skewclass::textprep::{preprocess_corpus, Preprocessor};
use skewclass::weighting::{extract_class_keywords, rare_classes, sample_weights};
use skewclass::{ClassWeighting, GenConfig, KeywordTable, PrepOptions, TokenizedDocument, WeightScheme};

#[test]
fn rare_set_matches_histogram_filter() {
    let g = generate_synthetic_corpus(&GenConfig::default()).unwrap();
    let hist = class_histogram(&g.corpus);
    let got = rare_classes(&hist, 120);
    let expected: Vec<String> = hist
        .labels()
        .iter()
        .zip(hist.counts())
        .filter(|(_, &n)| n < 120)
        .map(|(l, _)| l.clone())
        .collect();
    assert_eq!(got, expected);
    assert!(!got.is_empty());
}

#[test]
fn extraction_recovers_injected_keywords() {
    let cfg = GenConfig {
        keyword_vocab_per_class: 5,
        seed: 6,
        ..Default::default()
    };
    let g = generate_synthetic_corpus(&cfg).unwrap();
    let docs = preprocess_corpus(&g.corpus, &PrepOptions::default()).documents;
    let vocab = build_vocabulary(&docs, 1, 100_000).unwrap();
    let table = extract_class_keywords(&docs, &vocab, 10, g.corpus.labels()).unwrap();
    for (class, injected) in g.keywords.iter() {
        let top = table.get(class).unwrap();
        let hits = injected.iter().filter(|k| top.contains(k)).count();
        assert!(
            hits as f64 >= 0.8 * injected.len() as f64,
            "{class}: {hits}/{} in {top:?}",
            injected.len()
        );
    }
}

fn contains_run(tokens: &[String], run: &[String]) -> bool {
    (0..tokens.len()).any(|s| s + run.len() <= tokens.len() && (0..run.len()).all(|j| tokens[s + j] == run[j]))
}

#[test]
fn sample_weights_match_naive_scan() {
    let words = ["wa", "wb", "wc", "wd", "we", "wf"];
    let mut rng = seeded(13);
    let labels = ["big", "mid", "small"];
    let docs: Vec<TokenizedDocument> = (0..200)
        .map(|i| TokenizedDocument {
            id: i.to_string(),
            tokens: (0..rng.gen_range(0..7))
                .map(|_| words[rng.gen_range(0..words.len())].to_string())
                .collect(),
            label: labels[[0, 0, 0, 1, 1, 2][rng.gen_range(0..6)]].to_string(),
        })
        .collect();
    let mut kw = KeywordTable::default();
    kw.insert("small", ["wa wb".to_string(), "wf".to_string()]);
    kw.insert("mid", ["wc".to_string()]);
    kw.insert("big", ["wd".to_string()]);
    let hist = ClassHistogram::from_indices(
        &labels.map(String::from),
        docs.iter().map(|d| labels.iter().position(|l| *l == d.label).unwrap()),
    );
    let prep = Preprocessor::new(PrepOptions::default());
    let scheme = WeightScheme::new(&hist, ClassWeighting::Balanced, 5.0, 60).unwrap();
    let got = sample_weights(&docs, &scheme, &kw, &prep).unwrap();

    let n = docs.len() as f64;
    for (d, w) in docs.iter().zip(&got) {
        let count = docs.iter().filter(|o| o.label == d.label).count();
        let base = n / (3.0 * count as f64);
        let runs: Vec<Vec<String>> = kw
            .get(&d.label)
            .unwrap()
            .iter()
            .map(|k| k.split(' ').map(String::from).collect())
            .collect();
        let hit = count < 60 && runs.iter().any(|r| contains_run(&d.tokens, r));
        let expected = if hit { base * 5.0 } else { base };
        assert!((w - expected).abs() < 1e-12, "{d:?}: {w} vs {expected}");
    }
}

fn proportion_oracle(labels: &[usize], idx: &[usize], c: usize) -> usize {
    idx.iter().filter(|&&i| labels[i] == c).count()
}

#[test]
fn stratified_split_on_zipf_corpus() {
    let g = generate_synthetic_corpus(&GenConfig::default()).unwrap();
    let labels = g.corpus.label_indices();
    let s = stratified_split(&labels, 0.2, 42).unwrap();
    for (c, &n) in g.class_sizes.iter().enumerate() {
        let t = proportion_oracle(&labels, &s.test, c) as f64;
        assert!((t - 0.2 * n as f64).abs() <= 1.0, "class {c}: {t} of {n}");
    }
    let mut all = [s.train.clone(), s.test.clone()].concat();
    all.sort_unstable();
    assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
}

#[test]
fn kfold_proportions_follow_global_ones() {
    let labels: Vec<usize> = (0..203).map(|i| [0, 0, 0, 0, 1, 1, 2][i % 7]).collect();
    let (folds, _) = stratified_kfold(&labels, 5, 9).unwrap();
    let mut seen = vec![0; labels.len()];
    for f in &folds {
        for &i in &f.test {
            seen[i] += 1;
        }
        for c in 0..3 {
            let total = proportion_oracle(&labels, &(0..labels.len()).collect::<Vec<_>>(), c) as f64;
            let here = proportion_oracle(&labels, &f.test, c) as f64;
            assert!((here - total / 5.0).abs() <= 1.0);
        }
        assert_eq!(f.train.len() + f.test.len(), labels.len());
    }
    assert!(seen.iter().all(|&n| n == 1));
}

#[test]
fn confusion_matrix_matches_counting_oracle() {
    let mut rng = seeded(2);
    let (t, p): (Vec<usize>, Vec<usize>) = (0..200).map(|_| (rng.gen_range(0..4), rng.gen_range(0..4))).unzip();
    let names: Vec<String> = (0..4).map(|c| c.to_string()).collect();
    let cm = confusion_matrix(&t, &p, &names).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let n = t.iter().zip(&p).filter(|&(&a, &b)| a == i && b == j).count() as u64;
            assert_eq!(cm.counts[i][j], n);
        }
    }
    let r = metrics_report(&cm).unwrap();
    let acc = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / 200.0;
    assert_eq!(r.accuracy, acc);
    let weighted_recall: f64 = r.per_class.iter().map(|c| c.recall * c.support as f64).sum::<f64>() / 200.0;
    assert!((weighted_recall - acc).abs() < 1e-12);
}

#[test]
fn pr_curve_matches_threshold_scan() {
    let mut rng = seeded(5);
    let scores: Vec<f64> = (0..20).map(|_| (rng.gen_range(0..8) as f64) / 8.0).collect();
    let pos: Vec<bool> = (0..20).map(|_| rng.gen_bool(0.4)).collect();
    let curve = pr_curve(&scores, &pos).unwrap();
    let mut thresholds: Vec<f64> = scores.clone();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let n_pos = pos.iter().filter(|&&p| p).count() as f64;
    let expected: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let tp = (0..20).filter(|&i| scores[i] >= t && pos[i]).count() as f64;
            let flagged = (0..20).filter(|&i| scores[i] >= t).count() as f64;
            (tp / n_pos, tp / flagged)
        })
        .collect();
    assert_eq!(curve, expected);
    assert!(curve.windows(2).all(|w| w[0].0 <= w[1].0));
}

#[test]
fn rare_report_macro_is_mean_of_rows() {
    let mut rng = seeded(3);
    let (t, p): (Vec<usize>, Vec<usize>) = (0..600)
        .map(|_| {
            let y = rng.gen_range(0..12);
            (y, if rng.gen_bool(0.6) { y } else { rng.gen_range(0..12) })
        })
        .unzip();
    let names: Vec<String> = (0..12).map(|c| format!("s{c}")).collect();
    let r = metrics_report(&confusion_matrix(&t, &p, &names).unwrap()).unwrap();
    let rare: Vec<String> = [1, 4, 5, 9, 11].iter().map(|&c| names[c].clone()).collect();
    let rr = rare_class_report(&r, &rare).unwrap();
    assert_eq!(rr.per_class.len(), 5);
    let mean = |f: fn(&skewclass::evalmetrics::ClassMetrics) -> f64| {
        [1, 4, 5, 9, 11].iter().map(|&c| f(&r.per_class[c])).sum::<f64>() / 5.0
    };
    assert!((rr.macro_precision - mean(|c| c.precision)).abs() < 1e-12);
    assert!((rr.macro_recall - mean(|c| c.recall)).abs() < 1e-12);
    assert!((rr.macro_f1 - mean(|c| c.f1)).abs() < 1e-12);
    for c in &r.per_class {
        assert!(c.f1 <= (c.precision + c.recall) / 2.0 + 1e-15);
        assert_eq!(c.f1 == 0.0, c.precision * c.recall == 0.0);
    }
}
