//! Pluggable scene-graph predictors and the merge of their output into the
//! graph as imagined nodes.

use super::{
    identify_unknown_regions, parse_prediction, BevLayout, ParseError,
    PredictedObject, PredictedRegion, UnknownRegion,
};
use crate::config::ImagineConfig;
use crate::fixtures::{adjacency, cooccurrence, PREDICTOR_CHOICES};
use crate::geom::WorldPoint;
use crate::graph::{make_object, Provenance, RegionId, RegionNode, SceneGraph};
use crate::grid::OccupancyGrid;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub trait ScenePredictor {
    fn predict(
        &self,
        bev: &BevLayout,
        unknowns: &[UnknownRegion],
        target: &str,
    ) -> Result<Vec<PredictedRegion>, PredictError>;
}

/// Offline predictor: rank room labels for each unknown region by summed
/// adjacency weight against the captions of its nearby regions, then propose
/// the top objects of the winning label.
#[derive(Debug, Default, Clone)]
pub struct AdjacencyPriorPredictor;

impl ScenePredictor for AdjacencyPriorPredictor {
    fn predict(
        &self,
        _bev: &BevLayout,
        unknowns: &[UnknownRegion],
        _target: &str,
    ) -> Result<Vec<PredictedRegion>, PredictError> {
        let adj = adjacency();
        let co = cooccurrence();
        let mut out = Vec::new();
        for u in unknowns {
            if u.nearby_regions.is_empty() {
                continue;
            }
            // Nearby top captions weight the label prior.
            let nearby_labels: Vec<String> = u
                .nearby_regions
                .iter()
                .filter_map(|(rid, _)| {
                    _bev.blocks
                        .iter()
                        .find(|b| b.id == u.id)
                        .and_then(|b| b.nearby.iter().find(|n| n.id == *rid))
                        .and_then(|n| n.caption.first().map(|(l, _)| l.clone()))
                })
                .collect();
            if nearby_labels.is_empty() {
                continue;
            }
            let mut scores: Vec<(&str, f64)> = PREDICTOR_CHOICES
                .iter()
                .filter(|l| **l != "unknown")
                .map(|&label| {
                    let s: f64 = nearby_labels.iter().map(|n| adj.weight(label, n)).sum();
                    (label, s)
                })
                .collect();
            scores.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
            scores.truncate(2);
            let total: f64 = scores.iter().map(|(_, s)| s).sum();
            let caption: Vec<(String, f64)> = if total > 0.0 {
                scores.iter().map(|(l, s)| (l.to_string(), s / total)).collect()
            } else {
                vec![("unknown".to_string(), 1.0)]
            };

            let top = caption[0].0.clone();
            let mut objects: Vec<(String, f64)> = co
                .region_distribution(&top)
                .map(|d| d.iter().map(|(o, p)| (o.clone(), *p)).collect())
                .unwrap_or_default();
            objects.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            objects.truncate(3);
            let predicted_objects = objects
                .into_iter()
                .enumerate()
                .map(|(i, (category, p))| PredictedObject {
                    category,
                    center: WorldPoint::new(u.center.x + 0.15 * i as f64, u.center.y),
                    confidence: p,
                    corr_score: 0.0,
                })
                .collect();

            out.push(PredictedRegion {
                target_unknown_region_id: u.id,
                caption,
                reasoning: format!("adjacency prior over nearby labels {nearby_labels:?}"),
                predicted_objects,
            });
        }
        Ok(out)
    }
}

/// Fixed-reply predictor for tests.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPredictor {
    pub result: Vec<PredictedRegion>,
}

impl ScenePredictor for ScriptedPredictor {
    fn predict(
        &self,
        _bev: &BevLayout,
        _unknowns: &[UnknownRegion],
        _target: &str,
    ) -> Result<Vec<PredictedRegion>, PredictError> {
        Ok(self.result.clone())
    }
}

/// Chat-completion client for an external predictor. Plain-http endpoints
/// only; any transport problem surfaces as `PredictError::Transport`.
#[derive(Debug, Clone)]
pub struct HttpPredictor {
    pub endpoint: String,
    pub model: String,
    pub api_key: String,
    pub timeout_secs: u64,
    pub confidence_tolerance: f64,
}

impl HttpPredictor {
    pub fn prompt_text(bev: &BevLayout, target: &str) -> String {
        let adj = adjacency();
        let mut hints = Vec::new();
        for a in PREDICTOR_CHOICES.iter().filter(|l| **l != "unknown") {
            for b in PREDICTOR_CHOICES.iter().filter(|l| **l != "unknown" && *l > a) {
                let w = adj.weight(a, b);
                if w >= 0.6 {
                    hints.push(format!("{a} is usually near {b}."));
                } else if w <= 0.05 {
                    hints.push(format!("{a} is usually NOT near {b}."));
                }
            }
        }
        format!(
            "You are completing a partial indoor scene graph while searching for a {target}.\n\
             The attached top-down map shows explored space; choose the most likely room type\n\
             for each unknown region from: {}.\n\
             Hints: {}\n\
             Unknown regions locations and nearby regions:\n{}\
             Reply with a JSON object between a line `# Start` and a line `# End`.\n\
             Use keys pred_N for unknown region N, each with fields `caption` (two labels\n\
             with confidences summing to 1), `reasoning`, and `objects` (list of\n\
             {{category, center: [x, y], confidence}}).\n",
            PREDICTOR_CHOICES.join(", "),
            hints.join(" "),
            bev.prompt_blocks(),
        )
    }

    fn post(&self, body: &str) -> Result<String, PredictError> {
        http_post(&self.endpoint, &self.api_key, self.timeout_secs, body)
            .map_err(PredictError::Transport)
    }
}

/// Plain-http POST of a JSON body; returns the response payload on 200.
pub(crate) fn http_post(
    endpoint: &str,
    api_key: &str,
    timeout_secs: u64,
    body: &str,
) -> Result<String, String> {
    use std::io::{Read, Write};
    let url = endpoint
        .strip_prefix("http://")
        .ok_or_else(|| "only http:// endpoints supported".to_string())?;
    let (host, path) = url.split_once('/').unwrap_or((url, ""));
    let addr = if host.contains(':') { host.to_string() } else { format!("{host}:80") };
    let timeout = std::time::Duration::from_secs(timeout_secs);
    let mut stream = std::net::TcpStream::connect(&addr).map_err(|e| e.to_string())?;
    stream.set_read_timeout(Some(timeout)).ok();
    stream.set_write_timeout(Some(timeout)).ok();
    let req = format!(
        "POST /{path} HTTP/1.1\r\nHost: {host}\r\nAuthorization: Bearer {api_key}\r\n\
         Content-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len(),
    );
    stream.write_all(req.as_bytes()).map_err(|e| e.to_string())?;
    let mut response = String::new();
    stream.read_to_string(&mut response).map_err(|e| e.to_string())?;
    let (head, payload) = response
        .split_once("\r\n\r\n")
        .ok_or_else(|| "malformed http response".to_string())?;
    let status = head.lines().next().unwrap_or_default();
    if !status.contains(" 200") {
        return Err(format!("http status {status:?}"));
    }
    Ok(payload.to_string())
}

fn base64(data: &[u8]) -> String {
    const T: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    let mut out = String::with_capacity(data.len().div_ceil(3) * 4);
    for chunk in data.chunks(3) {
        let b = [chunk[0], *chunk.get(1).unwrap_or(&0), *chunk.get(2).unwrap_or(&0)];
        let n = (u32::from(b[0]) << 16) | (u32::from(b[1]) << 8) | u32::from(b[2]);
        let idx = [(n >> 18) & 63, (n >> 12) & 63, (n >> 6) & 63, n & 63];
        for (i, &x) in idx.iter().enumerate() {
            out.push(if i <= chunk.len() { T[x as usize] as char } else { '=' });
        }
    }
    out
}

impl ScenePredictor for HttpPredictor {
    fn predict(
        &self,
        bev: &BevLayout,
        _unknowns: &[UnknownRegion],
        target: &str,
    ) -> Result<Vec<PredictedRegion>, PredictError> {
        let image = base64(&bev.to_png());
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": Self::prompt_text(bev, target)},
                    {"type": "image_url",
                     "image_url": {"url": format!("data:image/png;base64,{image}")}},
                ],
            }],
        });
        let payload = self.post(&body.to_string())?;
        let v: serde_json::Value = serde_json::from_str(payload.trim())
            .map_err(|e| PredictError::Transport(format!("bad response body: {e}")))?;
        let content = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| PredictError::Transport("missing message content".into()))?;
        let (preds, _) = parse_prediction(content, self.confidence_tolerance)?;
        Ok(preds)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PredictOutcome {
    pub unknown_regions: Vec<UnknownRegion>,
    pub predictions: Vec<PredictedRegion>,
    pub inserted_regions: Vec<RegionId>,
    pub warnings: Vec<String>,
}

/// Run one imagination pass: find unknown regions, query the predictor, and
/// replace the floor's imagined nodes with the fresh predictions. A transport
/// failure leaves the graph untouched and is reported as a warning.
pub fn predict_scene_graph(
    graph: &mut SceneGraph,
    grid: &OccupancyGrid,
    predictor: &dyn ScenePredictor,
    target: &str,
    cfg: &ImagineConfig,
) -> PredictOutcome {
    let mut outcome = PredictOutcome::default();
    outcome.unknown_regions =
        identify_unknown_regions(grid, graph, cfg.min_unknown_area, cfg.context_radius);
    if outcome.unknown_regions.is_empty() {
        graph.clear_imagined(Some(grid.floor_id));
        return outcome;
    }
    let bev = super::build_bev(graph, grid, &outcome.unknown_regions, target);
    let mut preds = match predictor.predict(&bev, &outcome.unknown_regions, target) {
        Ok(p) => p,
        Err(e) => {
            outcome.warnings.push(format!("prediction failed, graph unchanged: {e}"));
            return outcome;
        }
    };

    let co = cooccurrence();
    for p in &mut preds {
        for o in &mut p.predicted_objects {
            o.corr_score = co.object_object_score(&o.category, target);
        }
    }

    graph.clear_imagined(Some(grid.floor_id));
    for p in &preds {
        let Some(u) = outcome
            .unknown_regions
            .iter()
            .find(|u| u.id == p.target_unknown_region_id)
        else {
            outcome
                .warnings
                .push(format!("prediction for unknown region {} has no target", p.target_unknown_region_id));
            continue;
        };
        let rid = graph.alloc_region_id();
        let mut members = Vec::new();
        for o in &p.predicted_objects {
            let oid = graph.alloc_object_id();
            let mut node =
                make_object(oid, &o.category, o.center, grid.floor_id, o.confidence, Provenance::Imagined);
            node.observation_count = 0;
            graph.objects.insert(oid, node);
            graph.object_parent.insert(oid, rid);
            members.push(oid);
        }
        graph.regions.insert(
            rid,
            RegionNode {
                id: rid,
                caption: p.caption.clone(),
                center: u.center,
                members,
                floor: grid.floor_id,
                provenance: Provenance::Imagined,
                imagined_for: Some(u.id),
            },
        );
        outcome.inserted_regions.push(rid);
    }
    outcome.predictions = preds;
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Cell;
    use crate::grid::CellState;
    use crate::imagine::serialize_predictions;

    fn half_unknown_grid() -> OccupancyGrid {
        let mut g = OccupancyGrid::new(40, 40, 0.05, WorldPoint::new(0.0, 0.0), 0);
        for r in 0..40 {
            for c in 0..20 {
                g.set_state(Cell::new(r, c), CellState::Free);
                g.set_height(Cell::new(r, c), 0.0);
            }
        }
        g
    }

    #[test]
    fn adjacency_prior_prefers_bathroom_next_to_bedroom() {
        let g = half_unknown_grid();
        let graph = crate::graph::tests_support::bedroom_graph();
        let unknowns = identify_unknown_regions(&g, &graph, 40, 10.0);
        let bev = super::super::build_bev(&graph, &g, &unknowns, "toilet");
        let preds = AdjacencyPriorPredictor.predict(&bev, &unknowns, "toilet").unwrap();
        assert_eq!(preds.len(), 1);
        assert_eq!(preds[0].caption[0].0, "bathroom");
        let sum: f64 = preds[0].caption.iter().map(|(_, c)| c).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(!preds[0].predicted_objects.is_empty());
    }

    #[test]
    fn predict_inserts_imagined_nodes_and_reruns_replace_them() {
        let g = half_unknown_grid();
        let mut graph = crate::graph::tests_support::bedroom_graph();
        let cfg = ImagineConfig { context_radius: 10.0, ..Default::default() };
        let out = predict_scene_graph(&mut graph, &g, &AdjacencyPriorPredictor, "toilet", &cfg);
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
        assert_eq!(out.inserted_regions.len(), 1);
        let rid = out.inserted_regions[0];
        assert_eq!(graph.regions[&rid].provenance, Provenance::Imagined);
        assert!(graph.regions[&rid].members.iter().all(|m| {
            graph.objects[m].provenance == Provenance::Imagined
        }));
        graph.check_tree().unwrap();
        let n_regions = graph.regions.len();

        let out2 = predict_scene_graph(&mut graph, &g, &AdjacencyPriorPredictor, "toilet", &cfg);
        assert_eq!(graph.regions.len(), n_regions, "rerun must replace, not accumulate");
        assert_eq!(out2.inserted_regions.len(), 1);
        assert_ne!(out2.inserted_regions[0], rid);
    }

    #[test]
    fn transport_failure_leaves_graph_unchanged() {
        struct Failing;
        impl ScenePredictor for Failing {
            fn predict(
                &self,
                _: &BevLayout,
                _: &[UnknownRegion],
                _: &str,
            ) -> Result<Vec<PredictedRegion>, PredictError> {
                Err(PredictError::Transport("connection refused".into()))
            }
        }
        let g = half_unknown_grid();
        let mut graph = crate::graph::tests_support::bedroom_graph();
        let before = crate::graph::graph_to_json(&graph);
        let cfg = ImagineConfig { context_radius: 10.0, ..Default::default() };
        let out = predict_scene_graph(&mut graph, &g, &Failing, "toilet", &cfg);
        assert_eq!(out.warnings.len(), 1);
        assert!(out.inserted_regions.is_empty());
        assert_eq!(crate::graph::graph_to_json(&graph), before);
    }

    #[test]
    fn scripted_roundtrip_through_serialized_text() {
        let preds = vec![PredictedRegion {
            target_unknown_region_id: 0,
            caption: vec![("kitchen".into(), 0.6), ("dining room".into(), 0.4)],
            reasoning: "script".into(),
            predicted_objects: vec![],
        }];
        let text = serialize_predictions(&preds);
        let (back, _) = parse_prediction(&text, 0.05).unwrap();
        assert_eq!(back, preds);
    }

    #[test]
    fn base64_known_vectors() {
        assert_eq!(base64(b""), "");
        assert_eq!(base64(b"f"), "Zg==");
        assert_eq!(base64(b"fo"), "Zm8=");
        assert_eq!(base64(b"foo"), "Zm9v");
        assert_eq!(base64(b"foobar"), "Zm9vYmFy");
    }
}
