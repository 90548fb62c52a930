mod common;

use std::time::Instant;

use chrono::Utc;
use common::*;
use factcheck_core::align::AlignmentTables;
use factcheck_core::extraction::{extract_document, RuleBasedExtractor};
use factcheck_core::media::{MediaSource, MediaType};
use factcheck_core::scoring::score_document;
use factcheck_core::veracity::check_veracity;
use factcheck_core::{MediaDocument, MetricRegistry, ProximityConfig, TrustChannel, Verdict, WeightConfig};

#[test]
fn html_article_end_to_end() {
    let started = Instant::now();
    let raw = std::fs::read(fixtures_dir().join("article.html")).unwrap();
    let doc = MediaDocument::process(MediaSource::InlineText, MediaType::Html, raw, Utc::now()).unwrap();
    assert!(!doc.text.contains("español"));
    let tables = AlignmentTables::from_json(&fixture("tables.json")).unwrap();
    let g = ground_truth();
    let mut out = extract_document(&doc, &RuleBasedExtractor::default(), &tables, TrustChannel::UntrustedMedia);
    assert!(out.failures.is_empty());
    assert_eq!(out.records.len(), 2);
    for r in &mut out.records {
        assert_eq!(r.span.slice(&doc.text), Some(r.sentence.as_str()));
        r.verdict = Some(check_veracity(&g, &r.triple, &ProximityConfig::default()).unwrap());
    }
    let report = score_document(&out.records, &WeightConfig::default(), &MetricRegistry::default()).unwrap();
    let verdicts: Vec<Verdict> = report.statements.iter().map(|s| s.verdict).collect();
    assert_eq!(verdicts, [Verdict::Confirmed, Verdict::Supported]);
    let expected_mean = (1.0 + 1.0 / (1.0 + 2f64.ln())) / 2.0;
    assert!((report.mean - expected_mean).abs() <= 1e-12);
    assert!((report.mean - 0.7953).abs() <= 1e-4);
    assert_eq!(report.verdict_counts.len(), 4);
    assert!(started.elapsed().as_secs_f64() < 2.0);
}

#[test]
fn trusted_report_segments_into_paragraph_sentences() {
    let raw = std::fs::read(fixtures_dir().join("trusted_report.txt")).unwrap();
    let doc = MediaDocument::process(MediaSource::InlineText, MediaType::PlainText, raw, Utc::now()).unwrap();
    let tables = AlignmentTables::from_json(&fixture("tables.json")).unwrap();
    let out = extract_document(&doc, &RuleBasedExtractor::default(), &tables, TrustChannel::TrustedSource);
    let triples: Vec<String> = out.records.iter().map(|r| r.triple.to_string()).collect();
    assert_eq!(
        triples,
        [
            "<http://example.org/climate/ocean_warming> <http://example.org/climate/reduces> <http://example.org/climate/sea_ice_extent> .",
            "<http://example.org/climate/human_activity> <http://example.org/climate/increases> <http://example.org/climate/co2_concentration> .",
        ]
    );
}
