use factcheck_core::scoring::{score_statement, validate_weights, MetricEvaluator, MetricScore, ScoringError};
use factcheck_core::{MetricRegistry, StatementRecord, WeightConfig};
use proptest::prelude::*;

struct Fixed;

impl MetricEvaluator for Fixed {
    fn evaluate(&self, _record: &StatementRecord) -> Result<MetricScore, ScoringError> {
        Ok(MetricScore::new("objectivity", 0.0))
    }
}

fn registry() -> MetricRegistry {
    let mut r = MetricRegistry::default();
    r.register_metric("objectivity", Box::new(Fixed)).unwrap();
    r.register_metric("source_quality", Box::new(Fixed)).unwrap();
    r
}

proptest! {
    #[test]
    fn score_is_a_convex_combination(ver in 0.5f64..=1.0, split in 0.0f64..=1.0, s in prop::array::uniform3(0.0f64..=1.0)) {
        let rest = 1.0 - ver;
        let w = WeightConfig::from_pairs([("veracity", ver), ("objectivity", rest * split), ("source_quality", rest - rest * split)]);
        prop_assume!(validate_weights(&w, &registry()).is_ok());
        let metrics = [MetricScore::new("veracity", s[0]), MetricScore::new("objectivity", s[1]), MetricScore::new("source_quality", s[2])];
        let score = score_statement(&metrics, &w).unwrap();
        let expected = s[1] * (rest * split) + s[2] * (rest - rest * split) + s[0] * ver;
        prop_assert!((score.s_acc - expected).abs() <= 1e-12);
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= score.s_acc && score.s_acc <= hi);
    }
}

#[test]
fn default_weights_pass_veracity_through() {
    for v in [0.0, 0.25, 0.5906161091496412, 1.0] {
        let s = score_statement(&[MetricScore::new("veracity", v)], &WeightConfig::default()).unwrap();
        assert_eq!(s.s_acc, v);
    }
}

#[test]
fn invalid_configurations() {
    let r = registry();
    let bad = [
        WeightConfig::from_pairs([("veracity", 0.4), ("objectivity", 0.6)]),
        WeightConfig::from_pairs([("veracity", 0.5), ("objectivity", 0.4)]),
        WeightConfig::from_pairs([("veracity", 1.1), ("objectivity", -0.1)]),
        WeightConfig::from_pairs([("veracity", 0.5), ("unknown", 0.5)]),
        WeightConfig::from_pairs([("objectivity", 1.0)]),
    ];
    for w in bad {
        assert!(validate_weights(&w, &r).is_err(), "{w:?}");
    }
    assert!(validate_weights(&WeightConfig::from_pairs([("veracity", 0.5), ("objectivity", 0.5)]), &r).is_ok());
}
