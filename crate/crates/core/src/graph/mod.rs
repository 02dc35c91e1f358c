//! Hierarchical Floor -> Region -> Object scene graph built from symbolic
//! detections, with region grouping and captioning.

mod caption;
mod grouping;
mod io;
mod kdtree;

pub use caption::{CaptionError, PriorCaptioner, RegionCaptioner, ScriptedCaptioner};
pub use grouping::{group_regions, wall_crossings, RegionProposal};
pub use io::{graph_from_json, graph_to_json};

use crate::config::GroupingConfig;
use crate::geom::WorldPoint;
use crate::grid::{DerivedLayers, OccupancyGrid};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub u32);

/// Whether a node came from sensing or from the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Observed,
    Imagined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub id: ObjectId,
    pub category: String,
    pub position: WorldPoint,
    pub floor: usize,
    pub confidence: f64,
    pub observation_count: u32,
    /// Optional stand-in for a visual feature vector; only the embedding
    /// scorer uses it.
    pub embedding: Option<Vec<f64>>,
    pub source_views: Vec<u64>,
    pub provenance: Provenance,
    /// Accumulated confidence weight behind `position`.
    weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionNode {
    pub id: RegionId,
    /// Top-K caption labels with confidences summing to 1.
    pub caption: Vec<(String, f64)>,
    pub center: WorldPoint,
    pub members: Vec<ObjectId>,
    pub floor: usize,
    pub provenance: Provenance,
    /// For imagined regions: the unknown-region index they were predicted
    /// for, in the identification pass that produced them.
    pub imagined_for: Option<usize>,
}

impl RegionNode {
    /// Confidence of `label` in the caption distribution, 0 when absent.
    pub fn caption_confidence(&self, label: &str) -> f64 {
        self.caption
            .iter()
            .find(|(l, _)| l == label)
            .map_or(0.0, |(_, c)| *c)
    }

    pub fn top_caption(&self) -> Option<&str> {
        self.caption.first().map(|(l, _)| l.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorNode {
    pub id: usize,
    /// World z range covered by the floor.
    pub z_range: (f64, f64),
}

/// A symbolic detection delivered by the simulator (or any perception
/// front-end).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detection {
    pub category: String,
    pub position: WorldPoint,
    pub floor: usize,
    pub confidence: f64,
    pub view_id: u64,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("detection confidence {0} outside [0, 1]")]
    BadConfidence(f64),
    #[error("bad scene-graph json: {0}")]
    BadJson(String),
}

/// The tree-structured scene graph. Edges connect only adjacent levels:
/// regions to their floor, objects to at most one region (ungrouped objects
/// attach directly to their floor).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub floors: Vec<FloorNode>,
    pub objects: BTreeMap<ObjectId, ObjectNode>,
    pub regions: BTreeMap<RegionId, RegionNode>,
    /// Object -> parent region; objects without an entry hang off their floor.
    pub object_parent: BTreeMap<ObjectId, RegionId>,
    next_object_id: u32,
    next_region_id: u32,
}

impl SceneGraph {
    pub fn new() -> Self {
        SceneGraph::default()
    }

    pub fn ensure_floor(&mut self, id: usize, z_range: (f64, f64)) {
        if !self.floors.iter().any(|f| f.id == id) {
            self.floors.push(FloorNode { id, z_range });
            self.floors.sort_by_key(|f| f.id);
        }
    }

    pub fn alloc_object_id(&mut self) -> ObjectId {
        let id = ObjectId(self.next_object_id);
        self.next_object_id += 1;
        id
    }

    pub fn alloc_region_id(&mut self) -> RegionId {
        let id = RegionId(self.next_region_id);
        self.next_region_id += 1;
        id
    }

    pub fn objects_on_floor(&self, floor: usize) -> impl Iterator<Item = &ObjectNode> {
        self.objects.values().filter(move |o| o.floor == floor)
    }

    pub fn regions_on_floor(&self, floor: usize) -> impl Iterator<Item = &RegionNode> {
        self.regions.values().filter(move |r| r.floor == floor)
    }

    pub fn parent_region(&self, object: ObjectId) -> Option<&RegionNode> {
        self.object_parent.get(&object).and_then(|r| self.regions.get(r))
    }

    /// Verify the tree invariant: every region's floor exists, every parent
    /// edge references existing nodes on the same floor, and region member
    /// lists agree with the parent map.
    pub fn check_tree(&self) -> Result<(), String> {
        for region in self.regions.values() {
            if !self.floors.iter().any(|f| f.id == region.floor) {
                return Err(format!("region {:?} on missing floor {}", region.id, region.floor));
            }
            for m in &region.members {
                let obj = self
                    .objects
                    .get(m)
                    .ok_or_else(|| format!("region {:?} references missing object", region.id))?;
                if obj.floor != region.floor {
                    return Err(format!("object {:?} on wrong floor for region {:?}", m, region.id));
                }
                if self.object_parent.get(m) != Some(&region.id) {
                    return Err(format!("member list and parent map disagree at {m:?}"));
                }
            }
        }
        for (obj, region) in &self.object_parent {
            let r = self
                .regions
                .get(region)
                .ok_or_else(|| format!("object {obj:?} parented to missing region"))?;
            if !r.members.contains(obj) {
                return Err(format!("object {obj:?} missing from region {region:?} members"));
            }
        }
        for obj in self.objects.values() {
            if !self.floors.iter().any(|f| f.id == obj.floor) {
                return Err(format!("object {:?} on missing floor {}", obj.id, obj.floor));
            }
        }
        Ok(())
    }

    /// Fold detections into the graph and re-run region grouping on the
    /// affected floors. Detections within `merge_radius` of a same-category
    /// observed object merge into it (confidence-weighted position, max
    /// confidence); nodes are never deleted, only merged or re-parented.
    pub fn update(
        &mut self,
        detections: &[Detection],
        grid: &OccupancyGrid,
        layers: &DerivedLayers,
        params: &GroupingConfig,
        captioner: &dyn RegionCaptioner,
    ) -> Result<(), GraphError> {
        for d in detections {
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(GraphError::BadConfidence(d.confidence));
            }
        }
        let mut touched_floors = Vec::new();
        for d in detections {
            self.ensure_floor(d.floor, (0.0, 0.0));
            if !touched_floors.contains(&d.floor) {
                touched_floors.push(d.floor);
            }
            // Nearest same-category observed object within merge radius.
            let target = self
                .objects
                .values()
                .filter(|o| {
                    o.provenance == Provenance::Observed
                        && o.floor == d.floor
                        && o.category == d.category
                })
                .map(|o| (o.position.distance(d.position), o.id))
                .filter(|(dist, _)| *dist <= params.merge_radius)
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
                .map(|(_, id)| id);
            match target {
                Some(id) => {
                    let o = self.objects.get_mut(&id).unwrap();
                    let w = o.weight + d.confidence;
                    if w > 0.0 {
                        o.position.x = (o.position.x * o.weight + d.position.x * d.confidence) / w;
                        o.position.y = (o.position.y * o.weight + d.position.y * d.confidence) / w;
                    }
                    o.weight = w;
                    o.observation_count += 1;
                    o.confidence = o.confidence.max(d.confidence);
                    if !o.source_views.contains(&d.view_id) {
                        o.source_views.push(d.view_id);
                    }
                }
                None => {
                    let id = self.alloc_object_id();
                    self.objects.insert(
                        id,
                        ObjectNode {
                            id,
                            category: d.category.clone(),
                            position: d.position,
                            floor: d.floor,
                            confidence: d.confidence,
                            observation_count: 1,
                            embedding: None,
                            source_views: vec![d.view_id],
                            provenance: Provenance::Observed,
                            weight: d.confidence,
                        },
                    );
                }
            }
        }
        for floor in touched_floors {
            self.regroup_floor(floor, grid, layers, params, captioner);
        }
        Ok(())
    }

    /// Re-run region grouping for one floor over its observed objects and
    /// remap region ids by maximal member overlap so stable clusters keep
    /// their identity.
    pub fn regroup_floor(
        &mut self,
        floor: usize,
        grid: &OccupancyGrid,
        layers: &DerivedLayers,
        params: &GroupingConfig,
        captioner: &dyn RegionCaptioner,
    ) {
        let objects: Vec<&ObjectNode> = self
            .objects
            .values()
            .filter(|o| o.floor == floor && o.provenance == Provenance::Observed)
            .collect();
        let proposals = group_regions(&objects, grid, layers, params);

        let old_ids: Vec<RegionId> = self
            .regions
            .values()
            .filter(|r| r.floor == floor && r.provenance == Provenance::Observed)
            .map(|r| r.id)
            .collect();

        // Greedy id remap by overlap size (largest overlap first).
        let mut assignments: Vec<(usize, Option<RegionId>)> = Vec::new();
        let mut scored: Vec<(usize, RegionId, usize)> = Vec::new();
        for (pi, p) in proposals.iter().enumerate() {
            for &oid in &old_ids {
                let old = &self.regions[&oid];
                let overlap = p.members.iter().filter(|m| old.members.contains(m)).count();
                if overlap > 0 {
                    scored.push((pi, oid, overlap));
                }
            }
        }
        scored.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        let mut used_old = Vec::new();
        let mut assigned_new = Vec::new();
        for (pi, oid, _) in scored {
            if used_old.contains(&oid) || assigned_new.contains(&pi) {
                continue;
            }
            used_old.push(oid);
            assigned_new.push(pi);
            assignments.push((pi, Some(oid)));
        }
        for pi in 0..proposals.len() {
            if !assigned_new.contains(&pi) {
                assignments.push((pi, None));
            }
        }
        assignments.sort_by_key(|(pi, _)| *pi);

        // Drop old observed regions on this floor, then rebuild.
        for oid in &old_ids {
            self.regions.remove(oid);
        }
        self.object_parent.retain(|_, rid| !old_ids.contains(rid));

        for (pi, reuse) in assignments {
            let p = &proposals[pi];
            let id = reuse.unwrap_or_else(|| self.alloc_region_id());
            let categories: Vec<String> = p
                .members
                .iter()
                .map(|m| self.objects[m].category.clone())
                .collect();
            let caption = match captioner.caption(&categories) {
                Ok(c) => c,
                Err(_) => vec![("unknown".to_string(), 1.0)],
            };
            for m in &p.members {
                self.object_parent.insert(*m, id);
            }
            self.regions.insert(
                id,
                RegionNode {
                    id,
                    caption,
                    center: p.center,
                    members: p.members.clone(),
                    floor,
                    provenance: Provenance::Observed,
                    imagined_for: None,
                },
            );
        }
    }

    /// Remove all imagined nodes (regions and their objects), optionally
    /// restricted to one floor.
    pub fn clear_imagined(&mut self, floor: Option<usize>) {
        let doomed_regions: Vec<RegionId> = self
            .regions
            .values()
            .filter(|r| r.provenance == Provenance::Imagined && floor.is_none_or(|f| r.floor == f))
            .map(|r| r.id)
            .collect();
        for rid in &doomed_regions {
            let members = self.regions[rid].members.clone();
            for m in members {
                self.objects.remove(&m);
                self.object_parent.remove(&m);
            }
            self.regions.remove(rid);
        }
    }

    /// Remove imagined regions whose center is no longer over unknown space
    /// on `grid`: observation overrides imagination.
    pub fn clear_imagined_over_known(&mut self, grid: &OccupancyGrid) {
        use crate::grid::CellState;
        let doomed: Vec<RegionId> = self
            .regions
            .values()
            .filter(|r| {
                r.provenance == Provenance::Imagined
                    && r.floor == grid.floor_id
                    && grid.state(grid.world_to_cell(r.center)) != CellState::Unknown
            })
            .map(|r| r.id)
            .collect();
        for rid in doomed {
            let members = self.regions[&rid].members.clone();
            for m in members {
                self.objects.remove(&m);
                self.object_parent.remove(&m);
            }
            self.regions.remove(&rid);
        }
    }
}

pub fn make_object(
    id: ObjectId,
    category: &str,
    position: WorldPoint,
    floor: usize,
    confidence: f64,
    provenance: Provenance,
) -> ObjectNode {
    ObjectNode {
        id,
        category: category.to_string(),
        position,
        floor,
        confidence,
        observation_count: if provenance == Provenance::Observed { 1 } else { 0 },
        embedding: None,
        source_views: Vec::new(),
        provenance,
        weight: confidence,
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// One floor, one captioned bedroom region with three members, plus an
    /// ungrouped object.
    pub fn bedroom_graph() -> SceneGraph {
        let mut g = SceneGraph::new();
        g.ensure_floor(0, (0.0, 3.0));
        let rid = g.alloc_region_id();
        let mut members = Vec::new();
        for (cat, x, y) in [("bed", 2.0, 2.0), ("wardrobe", 2.5, 2.0), ("pillow", 2.0, 2.5)] {
            let oid = g.alloc_object_id();
            g.objects.insert(
                oid,
                make_object(oid, cat, WorldPoint::new(x, y), 0, 0.9, Provenance::Observed),
            );
            g.object_parent.insert(oid, rid);
            members.push(oid);
        }
        g.regions.insert(
            rid,
            RegionNode {
                id: rid,
                caption: vec![("bedroom".into(), 0.8), ("wardrobe area".into(), 0.2)],
                center: WorldPoint::new(2.17, 2.17),
                members,
                floor: 0,
                provenance: Provenance::Observed,
                imagined_for: None,
            },
        );
        let stray = g.alloc_object_id();
        g.objects.insert(
            stray,
            make_object(stray, "plant", WorldPoint::new(6.0, 6.0), 0, 0.7, Provenance::Observed),
        );
        g
    }
}
