//! Region-level precision/recall of a (partially imagined) scene graph
//! against a ground-truth region list, via maximum bipartite matching.

use crate::geom::WorldPoint;
use crate::graph::SceneGraph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("ground truth has no regions")]
    EmptyTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrMetrics {
    pub matched: usize,
    pub truth_count: usize,
    pub predicted_count: usize,
    pub recall: f64,
    /// `None` when the graph has no regions on the floor at all.
    pub precision: Option<f64>,
}

/// Match graph regions (observed and imagined) on `floor` to ground-truth
/// `(label, center)` pairs. A pair is matchable when the labels are equal and
/// the centers are within `match_radius` meters; the matching is maximum, so
/// the metrics do not depend on enumeration order.
pub fn graph_precision_recall(
    graph: &SceneGraph,
    truth: &[(String, WorldPoint)],
    floor: usize,
    match_radius: f64,
) -> Result<PrMetrics, MetricsError> {
    graph_precision_recall_at_k(graph, truth, floor, match_radius, 1)
}

/// Like [`graph_precision_recall`], but a region matches a truth label when
/// any of its top-`k` caption labels agrees.
pub fn graph_precision_recall_at_k(
    graph: &SceneGraph,
    truth: &[(String, WorldPoint)],
    floor: usize,
    match_radius: f64,
    k: usize,
) -> Result<PrMetrics, MetricsError> {
    if truth.is_empty() {
        return Err(MetricsError::EmptyTruth);
    }
    let k = k.max(1);
    let predicted: Vec<(Vec<&str>, WorldPoint)> = graph
        .regions_on_floor(floor)
        .map(|r| {
            let mut labels: Vec<&str> =
                r.caption.iter().take(k).map(|(l, _)| l.as_str()).collect();
            if labels.is_empty() {
                labels.push("unknown");
            }
            (labels, r.center)
        })
        .collect();
    let truth_count = truth.len();
    let predicted_count = predicted.len();
    if predicted.is_empty() {
        return Ok(PrMetrics {
            matched: 0,
            truth_count,
            predicted_count: 0,
            recall: 0.0,
            precision: None,
        });
    }

    // Kuhn's augmenting-path matching: truth on the left, regions right.
    let edges: Vec<Vec<usize>> = truth
        .iter()
        .map(|(label, center)| {
            predicted
                .iter()
                .enumerate()
                .filter(|(_, (pl, pc))| {
                    pl.iter().any(|l| l == label) && pc.distance(*center) <= match_radius
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut match_right: Vec<Option<usize>> = vec![None; predicted_count];
    fn augment(
        i: usize,
        edges: &[Vec<usize>],
        match_right: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &j in &edges[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if match_right[j].is_none()
                || augment(match_right[j].unwrap(), edges, match_right, seen)
            {
                match_right[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut matched = 0;
    for i in 0..truth_count {
        let mut seen = vec![false; predicted_count];
        if augment(i, &edges, &mut match_right, &mut seen) {
            matched += 1;
        }
    }

    Ok(PrMetrics {
        matched,
        truth_count,
        predicted_count,
        recall: matched as f64 / truth_count as f64,
        precision: Some(matched as f64 / predicted_count as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests_support::bedroom_graph;

    #[test]
    fn empty_truth_is_an_error() {
        let g = bedroom_graph();
        assert!(matches!(
            graph_precision_recall(&g, &[], 0, 2.0),
            Err(MetricsError::EmptyTruth)
        ));
    }

    #[test]
    fn empty_graph_zero_recall_no_precision() {
        let g = SceneGraph::new();
        let truth = vec![("bedroom".to_string(), WorldPoint::new(2.0, 2.0))];
        let m = graph_precision_recall(&g, &truth, 0, 2.0).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.precision, None);
    }

    #[test]
    fn exact_match_perfect_scores() {
        let g = bedroom_graph();
        let truth = vec![("bedroom".to_string(), WorldPoint::new(2.17, 2.17))];
        let m = graph_precision_recall(&g, &truth, 0, 2.0).unwrap();
        assert_eq!(m.matched, 1);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.precision, Some(1.0));
    }

    #[test]
    fn top_k_matches_secondary_caption_label() {
        let g = bedroom_graph();
        // "wardrobe area" is the second caption label of the fixture region.
        let truth = vec![("wardrobe area".to_string(), WorldPoint::new(2.17, 2.17))];
        assert_eq!(graph_precision_recall_at_k(&g, &truth, 0, 2.0, 1).unwrap().matched, 0);
        assert_eq!(graph_precision_recall_at_k(&g, &truth, 0, 2.0, 2).unwrap().matched, 1);
    }

    #[test]
    fn label_mismatch_or_distance_breaks_match() {
        let g = bedroom_graph();
        let wrong_label = vec![("kitchen".to_string(), WorldPoint::new(2.17, 2.17))];
        assert_eq!(graph_precision_recall(&g, &wrong_label, 0, 2.0).unwrap().matched, 0);
        let far = vec![("bedroom".to_string(), WorldPoint::new(20.0, 20.0))];
        assert_eq!(graph_precision_recall(&g, &far, 0, 2.0).unwrap().matched, 0);
    }

    #[test]
    fn maximum_matching_resolves_greedy_trap() {
        // Two truths, two predictions; greedy in truth order could pair the
        // first truth with the only prediction the second truth can reach.
        use crate::graph::{Provenance, RegionId, RegionNode};
        let mut g = SceneGraph::new();
        g.ensure_floor(0, (0.0, 3.0));
        for (x, y) in [(1.0, 1.0), (2.5, 1.0)] {
            let id: RegionId = g.alloc_region_id();
            g.regions.insert(
                id,
                RegionNode {
                    id,
                    caption: vec![("bedroom".into(), 1.0)],
                    center: WorldPoint::new(x, y),
                    members: vec![],
                    floor: 0,
                    provenance: Provenance::Observed,
                    imagined_for: None,
                },
            );
        }
        // Truth A reaches both predictions; truth B only the first.
        let truth = vec![
            ("bedroom".to_string(), WorldPoint::new(1.8, 1.0)),
            ("bedroom".to_string(), WorldPoint::new(0.2, 1.0)),
        ];
        let m = graph_precision_recall(&g, &truth, 0, 1.0).unwrap();
        assert_eq!(m.matched, 2);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.precision, Some(1.0));
    }
}
