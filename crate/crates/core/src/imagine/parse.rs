//! Parse predictor replies. The payload sits between `# Start` and `# End`
//! flags and maps `pred_N` keys to per-region predictions.

use super::{PredictedObject, PredictedRegion};
use crate::fixtures::PREDICTOR_CHOICES;
use crate::geom::WorldPoint;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing or misordered # Start / # End flags")]
    MissingFlags,
    #[error("bad prediction payload: {0}")]
    Schema(String),
}

fn schema(msg: impl Into<String>) -> ParseError {
    ParseError::Schema(msg.into())
}

/// Extract predictions from a reply. Labels outside the predictor vocabulary
/// collapse to `unknown`; caption confidences are renormalized to sum 1,
/// with a warning when the raw sum deviates by more than `tolerance`.
pub fn parse_prediction(
    text: &str,
    tolerance: f64,
) -> Result<(Vec<PredictedRegion>, Vec<String>), ParseError> {
    let start = text.find("# Start").ok_or(ParseError::MissingFlags)?;
    let rest = &text[start + "# Start".len()..];
    let end = rest.find("# End").ok_or(ParseError::MissingFlags)?;
    let body: String = rest[..end]
        .lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n");

    let v: Value = serde_json::from_str(&body).map_err(|e| schema(e.to_string()))?;
    let map = v.as_object().ok_or_else(|| schema("top level must be an object"))?;

    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for (key, entry) in map {
        let id: usize = key
            .strip_prefix("pred_")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| schema(format!("bad key {key:?}, expected pred_N")))?;
        let entry = entry
            .as_object()
            .ok_or_else(|| schema(format!("{key}: entry must be an object")))?;

        let raw_caption = entry
            .get("caption")
            .and_then(Value::as_object)
            .ok_or_else(|| schema(format!("{key}: caption must be an object")))?;
        let mut caption: Vec<(String, f64)> = Vec::new();
        let mut raw_sum = 0.0;
        for (label, conf) in raw_caption {
            let conf = conf
                .as_f64()
                .ok_or_else(|| schema(format!("{key}: confidence for {label:?}")))?;
            raw_sum += conf;
            let label = if PREDICTOR_CHOICES.contains(&label.as_str()) {
                label.clone()
            } else {
                warnings.push(format!("{key}: label {label:?} not in vocabulary, using unknown"));
                "unknown".to_string()
            };
            match caption.iter_mut().find(|(l, _)| *l == label) {
                Some((_, c)) => *c += conf,
                None => caption.push((label, conf)),
            }
        }
        if caption.is_empty() {
            return Err(schema(format!("{key}: empty caption")));
        }
        if (raw_sum - 1.0).abs() > tolerance {
            warnings.push(format!("{key}: caption confidences sum to {raw_sum}, renormalizing"));
        }
        if raw_sum > 0.0 && (raw_sum - 1.0).abs() > 1e-9 {
            for (_, c) in &mut caption {
                *c /= raw_sum;
            }
        }
        caption.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        caption.truncate(2);
        let kept: f64 = caption.iter().map(|(_, c)| c).sum();
        if kept > 0.0 && (kept - 1.0).abs() > 1e-9 {
            for (_, c) in &mut caption {
                *c /= kept;
            }
        }

        let reasoning = entry
            .get("reasoning")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();

        let mut predicted_objects = Vec::new();
        for o in entry.get("objects").and_then(Value::as_array).into_iter().flatten() {
            let category = o["category"]
                .as_str()
                .ok_or_else(|| schema(format!("{key}: object category")))?
                .to_string();
            let center = o["center"]
                .as_array()
                .filter(|a| a.len() == 2)
                .and_then(|a| Some(WorldPoint::new(a[0].as_f64()?, a[1].as_f64()?)))
                .ok_or_else(|| schema(format!("{key}: object center must be [x, y]")))?;
            let confidence = o["confidence"].as_f64().unwrap_or(1.0);
            if !(0.0..=1.0).contains(&confidence) {
                return Err(schema(format!("{key}: object confidence {confidence} out of range")));
            }
            predicted_objects.push(PredictedObject { category, center, confidence, corr_score: 0.0 });
        }

        out.push(PredictedRegion {
            target_unknown_region_id: id,
            caption,
            reasoning,
            predicted_objects,
        });
    }
    out.sort_by_key(|p| p.target_unknown_region_id);
    Ok((out, warnings))
}

/// Inverse of `parse_prediction` for normalized predictions:
/// `parse(serialize(p))` returns `p` with no warnings.
pub fn serialize_predictions(predictions: &[PredictedRegion]) -> String {
    let mut map = serde_json::Map::new();
    for p in predictions {
        let caption: serde_json::Map<String, Value> =
            p.caption.iter().map(|(l, c)| (l.clone(), json!(c))).collect();
        let objects: Vec<Value> = p
            .predicted_objects
            .iter()
            .map(|o| {
                json!({
                    "category": o.category,
                    "center": [o.center.x, o.center.y],
                    "confidence": o.confidence,
                })
            })
            .collect();
        map.insert(
            format!("pred_{}", p.target_unknown_region_id),
            json!({"caption": caption, "reasoning": p.reasoning, "objects": objects}),
        );
    }
    format!(
        "# Start\n{}\n# End\n",
        serde_json::to_string_pretty(&Value::Object(map)).unwrap()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_well_formed_reply() {
        let text = r#"Here is my answer.
# Start
{"pred_0": {"caption": {"bedroom": 0.7, "bathroom": 0.3},
            "reasoning": "next to a bathroom",
            "objects": [{"category": "bed", "center": [1.5, 2.0], "confidence": 0.8}]}}
# End
"#;
        let (preds, warnings) = parse_prediction(text, 0.05).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(preds.len(), 1);
        assert_eq!(preds[0].target_unknown_region_id, 0);
        assert_eq!(preds[0].caption[0], ("bedroom".to_string(), 0.7));
        assert_eq!(preds[0].predicted_objects[0].category, "bed");
    }

    #[test]
    fn tolerates_json_fences() {
        let text = "# Start\n```json\n{\"pred_2\": {\"caption\": {\"kitchen\": 1.0}, \"objects\": []}}\n```\n# End";
        let (preds, _) = parse_prediction(text, 0.05).unwrap();
        assert_eq!(preds[0].target_unknown_region_id, 2);
    }

    #[test]
    fn missing_flags_rejected() {
        assert!(matches!(parse_prediction("{}", 0.05), Err(ParseError::MissingFlags)));
        assert!(matches!(
            parse_prediction("# End then # Start", 0.05),
            Err(ParseError::MissingFlags)
        ));
    }

    #[test]
    fn out_of_vocab_label_becomes_unknown_with_warning() {
        let text = "# Start\n{\"pred_0\": {\"caption\": {\"garage\": 0.6, \"kitchen\": 0.4}}}\n# End";
        let (preds, warnings) = parse_prediction(text, 0.05).unwrap();
        assert_eq!(preds[0].caption[0].0, "unknown");
        assert!(warnings.iter().any(|w| w.contains("garage")));
    }

    #[test]
    fn unnormalized_confidences_renormalized_with_warning() {
        let text = "# Start\n{\"pred_0\": {\"caption\": {\"bedroom\": 0.6, \"kitchen\": 0.6}}}\n# End";
        let (preds, warnings) = parse_prediction(text, 0.05).unwrap();
        let sum: f64 = preds[0].caption.iter().map(|(_, c)| c).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(warnings.iter().any(|w| w.contains("renormalizing")));
    }

    #[test]
    fn roundtrip_identity() {
        let preds = vec![PredictedRegion {
            target_unknown_region_id: 3,
            caption: vec![("bedroom".into(), 0.75), ("bathroom".into(), 0.25)],
            reasoning: "prior".into(),
            predicted_objects: vec![PredictedObject {
                category: "bed".into(),
                center: WorldPoint::new(4.25, 7.5),
                confidence: 0.4,
                corr_score: 0.0,
            }],
        }];
        let text = serialize_predictions(&preds);
        let (back, warnings) = parse_prediction(&text, 0.05).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(back, preds);
    }

    #[test]
    fn malformed_payload_is_schema_error() {
        let text = "# Start\n{\"pred_0\": {\"caption\": []}}\n# End";
        assert!(matches!(parse_prediction(text, 0.05), Err(ParseError::Schema(_))));
        let text = "# Start\n{\"room_0\": {\"caption\": {\"kitchen\": 1.0}}}\n# End";
        assert!(matches!(parse_prediction(text, 0.05), Err(ParseError::Schema(_))));
    }
}
