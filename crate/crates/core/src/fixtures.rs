//! Shipped semantic priors: the region/object co-occurrence table and the
//! region-adjacency table encoding typical indoor layout hints (including
//! the near-zero weights for pairings that rarely occur, e.g. bedroom next
//! to study room).

use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// The fixed region caption vocabulary.
pub const REGION_VOCABULARY: [&str; 16] = [
    "living room",
    "study room",
    "dining room",
    "stair hall",
    "hallway",
    "bedroom",
    "wardrobe area",
    "balcony",
    "laundry room",
    "tv room",
    "gym",
    "entryway",
    "storage",
    "kitchen",
    "bathroom",
    "garage",
];

/// The restricted choice set offered to the scene-graph predictor.
pub const PREDICTOR_CHOICES: [&str; 7] = [
    "bathroom",
    "kitchen",
    "bedroom",
    "dining room",
    "living room",
    "study room",
    "unknown",
];

const COOCCURRENCE_JSON: &str = include_str!("../fixtures/cooccurrence.json");
const ADJACENCY_JSON: &str = include_str!("../fixtures/adjacency.json");

#[derive(Debug, Deserialize)]
struct CooccurrenceFile {
    regions: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Deserialize)]
struct AdjacencyFile {
    default_weight: f64,
    pairs: Vec<(String, String, f64)>,
}

/// P(object-category | region-label) lookup, normalized per region.
#[derive(Debug, Clone)]
pub struct CooccurrenceTable {
    regions: BTreeMap<String, BTreeMap<String, f64>>,
}

impl CooccurrenceTable {
    fn from_json(text: &str) -> Self {
        let file: CooccurrenceFile = serde_json::from_str(text).expect("co-occurrence fixture");
        let mut regions = BTreeMap::new();
        for (region, objs) in file.regions {
            let total: f64 = objs.values().sum();
            let normed = objs.into_iter().map(|(k, v)| (k, v / total)).collect();
            regions.insert(region, normed);
        }
        CooccurrenceTable { regions }
    }

    /// P(object | region), 0 when either is unlisted.
    pub fn prob(&self, region: &str, object: &str) -> f64 {
        self.regions
            .get(region)
            .and_then(|m| m.get(object))
            .copied()
            .unwrap_or(0.0)
    }

    /// The sampling distribution of object categories for a region.
    pub fn region_distribution(&self, region: &str) -> Option<&BTreeMap<String, f64>> {
        self.regions.get(region)
    }

    pub fn region_labels(&self) -> impl Iterator<Item = &str> {
        self.regions.keys().map(|s| s.as_str())
    }

    /// Regions where the object plausibly occurs (probability above `min_p`).
    pub fn regions_for_object(&self, object: &str, min_p: f64) -> Vec<&str> {
        self.regions
            .iter()
            .filter(|(_, m)| m.get(object).copied().unwrap_or(0.0) >= min_p)
            .map(|(r, _)| r.as_str())
            .collect()
    }

    /// Object-object affinity: cosine similarity of the two categories'
    /// P(object | region) profiles across regions. 0 for unrelated pairs,
    /// 1 when the profiles coincide.
    pub fn object_object_score(&self, a: &str, b: &str) -> f64 {
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for m in self.regions.values() {
            let pa = m.get(a).copied().unwrap_or(0.0);
            let pb = m.get(b).copied().unwrap_or(0.0);
            dot += pa * pb;
            na += pa * pa;
            nb += pb * pb;
        }
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na.sqrt() * nb.sqrt())
        }
    }
}

/// Symmetric region-adjacency weights with a neutral default.
#[derive(Debug, Clone)]
pub struct AdjacencyTable {
    default_weight: f64,
    pairs: BTreeMap<(String, String), f64>,
}

impl AdjacencyTable {
    fn from_json(text: &str) -> Self {
        let file: AdjacencyFile = serde_json::from_str(text).expect("adjacency fixture");
        let mut pairs = BTreeMap::new();
        for (a, b, w) in file.pairs {
            let key = if a <= b { (a, b) } else { (b, a) };
            pairs.insert(key, w);
        }
        AdjacencyTable {
            default_weight: file.default_weight,
            pairs,
        }
    }

    pub fn weight(&self, a: &str, b: &str) -> f64 {
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        self.pairs.get(&key).copied().unwrap_or(self.default_weight)
    }

    /// Neighbor labels of `region` ranked by descending weight (then label),
    /// restricted to `choices`.
    pub fn top_neighbors<'a>(&self, region: &str, choices: &[&'a str], k: usize) -> Vec<(&'a str, f64)> {
        let mut scored: Vec<(&str, f64)> = choices
            .iter()
            .filter(|&&c| c != region && c != "unknown")
            .map(|&c| (c, self.weight(region, c)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        scored.truncate(k);
        scored
    }
}

pub fn cooccurrence() -> &'static CooccurrenceTable {
    static TABLE: OnceLock<CooccurrenceTable> = OnceLock::new();
    TABLE.get_or_init(|| CooccurrenceTable::from_json(COOCCURRENCE_JSON))
}

pub fn adjacency() -> &'static AdjacencyTable {
    static TABLE: OnceLock<AdjacencyTable> = OnceLock::new();
    TABLE.get_or_init(|| AdjacencyTable::from_json(ADJACENCY_JSON))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_load_and_normalize() {
        let t = cooccurrence();
        for region in REGION_VOCABULARY {
            let sum: f64 = t.region_distribution(region).unwrap().values().sum();
            assert!((sum - 1.0).abs() < 1e-9, "{region} sums to {sum}");
        }
    }

    #[test]
    fn bed_is_a_bedroom_thing() {
        let t = cooccurrence();
        assert!(t.prob("bedroom", "bed") > 0.3);
        assert_eq!(t.prob("kitchen", "bed"), 0.0);
        // P(bed | bedroom) is the maximum of P(bed | r) over all regions.
        let max = REGION_VOCABULARY
            .iter()
            .map(|r| t.prob(r, "bed"))
            .fold(0.0, f64::max);
        assert_eq!(max, t.prob("bedroom", "bed"));
    }

    #[test]
    fn adjacency_encodes_negative_hints() {
        let a = adjacency();
        assert!(a.weight("bedroom", "bathroom") > a.weight("bedroom", "study room"));
        assert!(a.weight("study room", "bedroom") < 0.05);
        // Symmetric regardless of argument order.
        assert_eq!(a.weight("kitchen", "bathroom"), a.weight("bathroom", "kitchen"));
    }

    #[test]
    fn top_neighbors_ranked() {
        let a = adjacency();
        let top = a.top_neighbors("bedroom", &PREDICTOR_CHOICES, 2);
        assert_eq!(top[0].0, "bathroom");
        assert!(top.iter().all(|(l, _)| *l != "unknown"));
    }

    #[test]
    fn object_object_score_bounds() {
        let t = cooccurrence();
        let s = t.object_object_score("bed", "pillow");
        assert!(s > 0.0 && s <= 1.0);
        assert!(t.object_object_score("bed", "bed") > 0.999);
        assert_eq!(t.object_object_score("bed", "no-such-thing"), 0.0);
    }
}
