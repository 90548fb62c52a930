//! Weighted accuracy score.
//!
//! `s_acc = sum_i s_i * w_i` with `sum_i w_i = 1` and the veracity weight at
//! least one half and at least the sum of all other weights. Only the
//! veracity metric ships; further metrics plug in through
//! [`MetricRegistry::register_metric`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::record::{RecordId, StatementRecord};
use crate::veracity::Verdict;

pub const VERACITY: &str = "veracity";
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("veracity weight {veracity} must be >= 0.5 and >= the other weights' sum {others}")]
    VeracityWeight { veracity: f64, others: f64 },
    #[error("weight {weight} for `{metric}` is outside [0, 1]")]
    WeightRange { metric: String, weight: f64 },
    #[error("no metric registered under `{0}`")]
    UnknownMetric(String),
    #[error("metric `{0}` is already registered")]
    DuplicateMetric(String),
    #[error("weighted metric `{0}` has no score")]
    MissingMetric(String),
    #[error("metric `{0}` scored more than once")]
    DuplicateScore(String),
    #[error("score {score} for `{metric}` is outside [0, 1]")]
    ScoreRange { metric: String, score: f64 },
    #[error("record `{0}` has no verdict")]
    MissingVerdict(String),
    #[error("document has no statements")]
    EmptyDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric_id: String,
    pub score: f64,
    #[serde(default)]
    pub detail: Value,
}

impl MetricScore {
    pub fn new(metric_id: impl Into<String>, score: f64) -> Self {
        Self { metric_id: metric_id.into(), score, detail: Value::Null }
    }
}

/// Metric id to weight. Serialized as a plain JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightConfig {
    pub weights: BTreeMap<String, f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self { weights: BTreeMap::from([(VERACITY.to_string(), 1.0)]) }
    }
}

impl WeightConfig {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self { weights: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedComponent {
    pub metric: MetricScore,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyScore {
    pub s_acc: f64,
    pub components: Vec<WeightedComponent>,
}

pub trait MetricEvaluator: Send + Sync {
    fn evaluate(&self, record: &StatementRecord) -> Result<MetricScore, ScoringError>;
}

/// Reads the record's veracity verdict.
pub struct VeracityMetric;

impl MetricEvaluator for VeracityMetric {
    fn evaluate(&self, record: &StatementRecord) -> Result<MetricScore, ScoringError> {
        let verdict =
            record.verdict.as_ref().ok_or_else(|| ScoringError::MissingVerdict(record.record_id.to_string()))?;
        Ok(MetricScore {
            metric_id: VERACITY.into(),
            score: verdict.veracity,
            detail: serde_json::json!({ "verdict": verdict.verdict, "threshold_used": verdict.threshold_used }),
        })
    }
}

pub struct MetricRegistry {
    evaluators: BTreeMap<String, Box<dyn MetricEvaluator>>,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.evaluators.insert(VERACITY.into(), Box::new(VeracityMetric));
        r
    }
}

impl MetricRegistry {
    pub fn empty() -> Self {
        Self { evaluators: BTreeMap::new() }
    }

    pub fn register_metric(
        &mut self,
        metric_id: impl Into<String>,
        evaluator: Box<dyn MetricEvaluator>,
    ) -> Result<(), ScoringError> {
        let id = metric_id.into();
        if self.evaluators.contains_key(&id) {
            return Err(ScoringError::DuplicateMetric(id));
        }
        self.evaluators.insert(id, evaluator);
        Ok(())
    }

    pub fn contains(&self, metric_id: &str) -> bool {
        self.evaluators.contains_key(metric_id)
    }

    pub fn metric_ids(&self) -> impl Iterator<Item = &str> {
        self.evaluators.keys().map(String::as_str)
    }

    pub fn evaluate(&self, metric_id: &str, record: &StatementRecord) -> Result<MetricScore, ScoringError> {
        let evaluator =
            self.evaluators.get(metric_id).ok_or_else(|| ScoringError::UnknownMetric(metric_id.to_string()))?;
        evaluator.evaluate(record)
    }
}

pub fn validate_weights(w: &WeightConfig, registry: &MetricRegistry) -> Result<(), ScoringError> {
    for (metric, &weight) in &w.weights {
        if !registry.contains(metric) {
            return Err(ScoringError::UnknownMetric(metric.clone()));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(ScoringError::WeightRange { metric: metric.clone(), weight });
        }
    }
    let sum: f64 = w.weights.values().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ScoringError::WeightSum(sum));
    }
    let veracity = w.weights.get(VERACITY).copied().unwrap_or(0.0);
    let others: f64 = w.weights.iter().filter(|(k, _)| k.as_str() != VERACITY).map(|(_, v)| v).sum();
    if veracity + WEIGHT_SUM_TOLERANCE < 0.5 || veracity + WEIGHT_SUM_TOLERANCE < others {
        return Err(ScoringError::VeracityWeight { veracity, others });
    }
    Ok(())
}

/// Weighted sum over the metrics named in `w`; the caller has validated `w`.
pub fn score_statement(metrics: &[MetricScore], w: &WeightConfig) -> Result<AccuracyScore, ScoringError> {
    for m in metrics {
        if !(0.0..=1.0).contains(&m.score) {
            return Err(ScoringError::ScoreRange { metric: m.metric_id.clone(), score: m.score });
        }
    }
    let mut components = Vec::with_capacity(w.weights.len());
    let mut s_acc = 0.0;
    for (metric_id, &weight) in &w.weights {
        let mut found = metrics.iter().filter(|m| &m.metric_id == metric_id);
        let metric = found.next().ok_or_else(|| ScoringError::MissingMetric(metric_id.clone()))?;
        if found.next().is_some() {
            return Err(ScoringError::DuplicateScore(metric_id.clone()));
        }
        s_acc += metric.score * weight;
        components.push(WeightedComponent { metric: metric.clone(), weight });
    }
    // A convex combination stays within the component range; clamping only
    // removes rounding overshoot.
    let lo = components.iter().map(|c| c.metric.score).fold(f64::INFINITY, f64::min);
    let hi = components.iter().map(|c| c.metric.score).fold(f64::NEG_INFINITY, f64::max);
    let s_acc = if components.is_empty() { 0.0 } else { s_acc.clamp(lo, hi) };
    Ok(AccuracyScore { s_acc, components })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementScore {
    pub record_id: RecordId,
    pub verdict: Verdict,
    pub score: AccuracyScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentReport {
    pub statements: Vec<StatementScore>,
    /// Arithmetic mean of the statement scores.
    pub mean: f64,
    pub aggregation: String,
    pub verdict_counts: BTreeMap<Verdict, usize>,
}

pub fn score_document(
    records: &[StatementRecord],
    w: &WeightConfig,
    registry: &MetricRegistry,
) -> Result<DocumentReport, ScoringError> {
    if records.is_empty() {
        return Err(ScoringError::EmptyDocument);
    }
    validate_weights(w, registry)?;
    let mut verdict_counts: BTreeMap<Verdict, usize> = Verdict::ALL.iter().map(|v| (*v, 0)).collect();
    let mut statements = Vec::with_capacity(records.len());
    for record in records {
        let verdict = record
            .verdict
            .as_ref()
            .ok_or_else(|| ScoringError::MissingVerdict(record.record_id.to_string()))?
            .verdict;
        let metrics = w
            .weights
            .keys()
            .map(|id| registry.evaluate(id, record))
            .collect::<Result<Vec<_>, _>>()?;
        let score = score_statement(&metrics, w)?;
        *verdict_counts.entry(verdict).or_default() += 1;
        statements.push(StatementScore { record_id: record.record_id.clone(), verdict, score });
    }
    // Summing in sorted order makes the mean independent of statement order.
    let mut values: Vec<f64> = statements.iter().map(|s| s.score.s_acc).collect();
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(DocumentReport { statements, mean, aggregation: "arithmetic_mean".into(), verdict_counts })
}
