//! Summary tables.
//!
//! The TSV files carry full precision; the text tables round to three
//! decimals. Macro precision, recall and F1 are unweighted means over
//! classes, and a class that is never predicted has precision 0.

use serde::{Deserialize, Serialize};
use skewclass::MetricsReport;

use crate::config::Method;

pub const SUMMARY_HEADER: [&str; 5] = ["model", "precision", "recall", "f1", "accuracy"];
pub const RARE_HEADER: [&str; 4] = ["method", "precision", "recall", "f1"];

/// One finished cell as it appears in the tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub method: Method,
    pub hidden: usize,
    pub report: MetricsReport,
    /// Restricted to the rare classes; `None` when no class is rare.
    pub rare: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    pub summary_tsv: String,
    pub summary_text: String,
    /// Baseline and keyword-factor rows over the rare classes.
    pub rare_tsv: String,
    pub rare_text: String,
    pub json: serde_json::Value,
}

fn rare_label(method: &Method) -> Option<String> {
    match method {
        Method::None => Some("Imbalanced".into()),
        Method::KeywordFactor(_) => Some(method.label()),
        _ => None,
    }
}

fn tsv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    out
}

/// First column left-aligned, numbers right-aligned.
fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            let pad = w - c.chars().count();
            if i == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn full(v: f64) -> String {
    format!("{v}")
}

fn round3(v: f64) -> String {
    format!("{v:.3}")
}

pub fn render_tables(rows: &[SummaryRow]) -> Tables {
    let multi_h = rows.iter().any(|r| r.hidden != rows[0].hidden);
    let summary = |fmt: fn(f64) -> String| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                let m = &r.report;
                vec![
                    r.model.clone(),
                    fmt(m.macro_precision),
                    fmt(m.macro_recall),
                    fmt(m.macro_f1),
                    fmt(m.accuracy),
                ]
            })
            .collect()
    };
    let rare_rows: Vec<(String, &MetricsReport)> = rows
        .iter()
        .filter_map(|r| {
            let label = rare_label(&r.method)?;
            let rare = r.rare.as_ref()?;
            let name = if multi_h {
                let arch = r.model.split(' ').next().unwrap_or_default();
                format!("{arch} {} {label}", r.hidden)
            } else {
                label
            };
            Some((name, rare))
        })
        .collect();
    let rare = |fmt: fn(f64) -> String| -> Vec<Vec<String>> {
        rare_rows
            .iter()
            .map(|(name, m)| vec![name.clone(), fmt(m.macro_precision), fmt(m.macro_recall), fmt(m.macro_f1)])
            .collect()
    };
    let json = serde_json::json!({
        "summary": rows.iter().map(|r| serde_json::json!({
            "model": r.model,
            "method": r.method,
            "hidden": r.hidden,
            "precision": r.report.macro_precision,
            "recall": r.report.macro_recall,
            "f1": r.report.macro_f1,
            "accuracy": r.report.accuracy,
            "f1_of_macro_pr": r.report.f1_of_macro_pr,
            "weighted_precision": r.report.weighted_precision,
            "weighted_recall": r.report.weighted_recall,
            "weighted_f1": r.report.weighted_f1,
        })).collect::<Vec<_>>(),
        "rare": rare_rows.iter().map(|(name, m)| serde_json::json!({
            "method": name,
            "precision": m.macro_precision,
            "recall": m.macro_recall,
            "f1": m.macro_f1,
            "classes": m.per_class.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    Tables {
        summary_tsv: tsv(&SUMMARY_HEADER, &summary(full)),
        summary_text: aligned(&SUMMARY_HEADER, &summary(round3)),
        rare_tsv: tsv(&RARE_HEADER, &rare(full)),
        rare_text: aligned(&RARE_HEADER, &rare(round3)),
        json,
    }
}
