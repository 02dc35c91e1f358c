//! Bird's-eye-view context for the scene-graph predictor: grid snapshot,
//! annotated markers, and the textual block format the predictor prompt
//! embeds.

use super::UnknownRegion;
use crate::geom::{Cell, WorldPoint};
use crate::graph::{Provenance, RegionId, SceneGraph};
use crate::grid::{CellState, OccupancyGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearbyRegion {
    pub id: RegionId,
    pub caption: Vec<(String, f64)>,
    pub center: WorldPoint,
    pub objects: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnknownBlock {
    pub id: usize,
    pub center_cell: Cell,
    pub center: WorldPoint,
    pub nearby: Vec<NearbyRegion>,
}

/// Grid snapshot plus the markers the predictor sees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BevLayout {
    pub floor: usize,
    pub width: usize,
    pub height_cells: usize,
    pub target: String,
    pub blocks: Vec<UnknownBlock>,
    /// Observed region centers with their top caption.
    pub region_markers: Vec<(RegionId, Cell, String)>,
    /// Observed object cells with categories.
    pub object_markers: Vec<(Cell, String)>,
    cells: Vec<CellState>,
}

pub fn build_bev(
    graph: &SceneGraph,
    grid: &OccupancyGrid,
    unknowns: &[UnknownRegion],
    target: &str,
) -> BevLayout {
    let blocks = unknowns
        .iter()
        .map(|u| UnknownBlock {
            id: u.id,
            center_cell: grid.world_to_cell(u.center),
            center: u.center,
            nearby: u
                .nearby_regions
                .iter()
                .filter_map(|(rid, _)| graph.regions.get(rid))
                .map(|r| NearbyRegion {
                    id: r.id,
                    caption: r.caption.clone(),
                    center: r.center,
                    objects: r
                        .members
                        .iter()
                        .map(|m| graph.objects[m].category.clone())
                        .collect(),
                })
                .collect(),
        })
        .collect();

    let region_markers = graph
        .regions_on_floor(grid.floor_id)
        .filter(|r| r.provenance == Provenance::Observed)
        .map(|r| {
            (
                r.id,
                grid.world_to_cell(r.center),
                r.top_caption().unwrap_or("unknown").to_string(),
            )
        })
        .filter(|(_, c, _)| grid.in_bounds(*c))
        .collect();

    let object_markers = graph
        .objects_on_floor(grid.floor_id)
        .filter(|o| o.provenance == Provenance::Observed)
        .map(|o| (grid.world_to_cell(o.position), o.category.clone()))
        .filter(|(c, _)| grid.in_bounds(*c))
        .collect();

    BevLayout {
        floor: grid.floor_id,
        width: grid.width,
        height_cells: grid.height_cells,
        target: target.to_string(),
        blocks,
        region_markers,
        object_markers,
        cells: grid.cells().to_vec(),
    }
}

impl BevLayout {
    /// The "Unknown regions locations and nearby regions" text block, in the
    /// predictor prompt's format.
    pub fn prompt_blocks(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            out.push_str(&format!(
                "Unknown region {}, center: [{} {}], nearby regions:\n",
                b.id, b.center_cell.row, b.center_cell.col
            ));
            if b.nearby.is_empty() {
                out.push_str("None \n");
            } else {
                for r in &b.nearby {
                    let caption = r
                        .caption
                        .iter()
                        .map(|(l, c)| format!("'{l}': {c}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    let objects = r
                        .objects
                        .iter()
                        .map(|o| format!("'{o}'"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    out.push_str(&format!(
                        "Region {}: {{{caption}}} center: [{}, {}] contained objects: [{objects}] \n",
                        r.id.0, r.center.x, r.center.y
                    ));
                }
            }
            out.push_str("----------\n");
        }
        out
    }

    /// Render the layout as a PNG: unknown dark, free light, occupied black,
    /// region markers blue, objects green, unknown centers red.
    pub fn to_png(&self) -> Vec<u8> {
        let mut img = image::RgbImage::new(self.width as u32, self.height_cells as u32);
        for r in 0..self.height_cells {
            for c in 0..self.width {
                let px = match self.cells[r * self.width + c] {
                    CellState::Unknown => [64u8, 64, 64],
                    CellState::Free => [230, 230, 230],
                    CellState::Occupied => [0, 0, 0],
                };
                img.put_pixel(c as u32, r as u32, image::Rgb(px));
            }
        }
        let mut mark = |cell: &Cell, color: [u8; 3]| {
            for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    let (r, c) = (cell.row + dr, cell.col + dc);
                    if r >= 0 && c >= 0 && (r as usize) < self.height_cells && (c as usize) < self.width {
                        img.put_pixel(c as u32, r as u32, image::Rgb(color));
                    }
                }
            }
        };
        for (cell, _) in &self.object_markers {
            mark(cell, [0, 180, 0]);
        }
        for (_, cell, _) in &self.region_markers {
            mark(cell, [0, 0, 220]);
        }
        for b in &self.blocks {
            mark(&b.center_cell, [220, 0, 0]);
        }
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png).expect("png encode");
        buf.into_inner()
    }
}
