//! Region grouping: link spatially close objects that are not separated by
//! walls, then keep connected components with enough members.

use super::kdtree::KdTree;
use super::{ObjectId, ObjectNode};
use crate::config::GroupingConfig;
use crate::geom::{Cell, WorldPoint};
use crate::grid::{DerivedLayers, OccupancyGrid};

/// A candidate region: member objects plus their centroid.
#[derive(Debug, Clone)]
pub struct RegionProposal {
    pub members: Vec<ObjectId>,
    pub center: WorldPoint,
}

/// Count distinct wall cells inside a narrow rectangular corridor around the
/// segment between two world points. The corridor half-width is in cells.
pub fn wall_crossings(
    a: WorldPoint,
    b: WorldPoint,
    grid: &OccupancyGrid,
    layers: &DerivedLayers,
    half_width_cells: f64,
) -> usize {
    let res = grid.resolution;
    let ax = (a.x - grid.origin.x) / res;
    let ay = (a.y - grid.origin.y) / res;
    let bx = (b.x - grid.origin.x) / res;
    let by = (b.y - grid.origin.y) / res;
    let dx = bx - ax;
    let dy = by - ay;
    let len2 = dx * dx + dy * dy;

    let pad = half_width_cells + 1.0;
    let min_col = (ax.min(bx) - pad).floor() as i32;
    let max_col = (ax.max(bx) + pad).ceil() as i32;
    let min_row = (ay.min(by) - pad).floor() as i32;
    let max_row = (ay.max(by) + pad).ceil() as i32;

    let mut count = 0;
    for row in min_row..=max_row {
        for col in min_col..=max_col {
            let cell = Cell::new(row, col);
            if !layers.is_wall(cell) {
                continue;
            }
            let cx = col as f64 + 0.5;
            let cy = row as f64 + 0.5;
            // Perpendicular distance from cell center to the segment.
            let t = if len2 > 0.0 {
                (((cx - ax) * dx + (cy - ay) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let px = ax + t * dx;
            let py = ay + t * dy;
            let d = ((cx - px).powi(2) + (cy - py).powi(2)).sqrt();
            if d <= half_width_cells {
                count += 1;
            }
        }
    }
    count
}

/// Cluster `objects` (all on one floor) into region proposals.
///
/// Object i links to neighbor j iff j is among i's k nearest, their distance
/// is below `d_max`, and the corridor between them crosses fewer than
/// `w_max` wall cells. Components with at least `n_min` members survive.
pub fn group_regions(
    objects: &[&ObjectNode],
    grid: &OccupancyGrid,
    layers: &DerivedLayers,
    params: &GroupingConfig,
) -> Vec<RegionProposal> {
    let n = objects.len();
    if n == 0 {
        return Vec::new();
    }
    let points: Vec<(f64, f64)> = objects.iter().map(|o| (o.position.x, o.position.y)).collect();
    let tree = KdTree::build(&points);

    // Union-find over the retained links.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }

    for i in 0..n {
        for j in tree.knn(points[i], params.k, i) {
            let dist = objects[i].position.distance(objects[j].position);
            if dist >= params.d_max {
                continue;
            }
            let crossings = wall_crossings(
                objects[i].position,
                objects[j].position,
                grid,
                layers,
                params.corridor_half_width_cells,
            );
            if crossings >= params.w_max {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut components: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }

    let mut proposals = Vec::new();
    for (_, mut members) in components {
        if members.len() < params.n_min {
            continue;
        }
        members.sort_by_key(|&i| objects[i].id);
        let cx = members.iter().map(|&i| objects[i].position.x).sum::<f64>() / members.len() as f64;
        let cy = members.iter().map(|&i| objects[i].position.y).sum::<f64>() / members.len() as f64;
        proposals.push(RegionProposal {
            members: members.into_iter().map(|i| objects[i].id).collect(),
            center: WorldPoint::new(cx, cy),
        });
    }
    // Deterministic output order by center, then first member.
    proposals.sort_by(|a, b| {
        (a.center.y, a.center.x, a.members[0])
            .partial_cmp(&(b.center.y, b.center.x, b.members[0]))
            .unwrap()
    });
    proposals
}
