//! Central configuration. Every tunable named in the module ledgers lives
//! here with its default, and the whole tree loads from a TOML document.

use crate::grid::LayerParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub resolution: f64,
    pub map_size: usize,
    pub min_frontier_size: usize,
    pub wall_threshold: f64,
    pub traversable_threshold: f64,
    pub flat_epsilon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            resolution: 0.05,
            map_size: 480,
            min_frontier_size: 4,
            wall_threshold: 1.2,
            traversable_threshold: 0.3,
            flat_epsilon: 0.02,
        }
    }
}

impl GridConfig {
    pub fn layer_params(&self) -> LayerParams {
        LayerParams {
            wall_threshold: self.wall_threshold,
            traversable_threshold: self.traversable_threshold,
            flat_epsilon: self.flat_epsilon,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupingConfig {
    /// k nearest neighbors considered per object.
    pub k: usize,
    /// Maximum link length in meters.
    pub d_max: f64,
    /// Links crossing this many wall cells or more are cut.
    pub w_max: usize,
    /// Minimum objects per region.
    pub n_min: usize,
    /// Half-width of the wall-crossing corridor, in cells.
    pub corridor_half_width_cells: f64,
    /// Object merge radius for repeated detections, meters.
    pub merge_radius: f64,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        GroupingConfig {
            k: 5,
            d_max: 2.5,
            w_max: 15,
            n_min: 3,
            corridor_half_width_cells: 1.0,
            merge_radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ImagineConfig {
    /// Minimum unknown-component size in cells.
    pub min_unknown_area: usize,
    /// Radius for attaching nearby known regions to an unknown region, meters.
    pub context_radius: f64,
    /// Re-run prediction every this many agent steps.
    pub cadence: usize,
    /// Center distance for matching predicted to truth regions, meters.
    pub match_radius: f64,
    /// Tolerated deviation of a caption confidence sum from 1.
    pub confidence_tolerance: f64,
    /// Offer the full region vocabulary to the predictor instead of the
    /// restricted choice set.
    pub full_vocabulary: bool,
}

impl Default for ImagineConfig {
    fn default() -> Self {
        ImagineConfig {
            min_unknown_area: 40,
            context_radius: 4.0,
            cadence: 10,
            match_radius: 2.0,
            confidence_tolerance: 0.05,
            full_vocabulary: false,
        }
    }
}

/// Which scene-graph levels the exploitation scorer consults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyLevels {
    ObjectOnly,
    RegionOnly,
    ObjectAndRegion,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GainConfig {
    /// Exploitation threshold for the fallback selector.
    pub lambda: f64,
    /// Per-waypoint discount for exploration gain.
    pub gamma: f64,
    /// Subgraph extraction radius around a frontier, meters.
    pub subgraph_radius: f64,
    /// Ray length for visibility, meters.
    pub r_ray: f64,
    /// Rays per waypoint.
    pub num_rays: usize,
    /// Waypoint cap for the exploration-gain path.
    pub max_waypoints: usize,
    pub hierarchy: HierarchyLevels,
}

impl Default for GainConfig {
    fn default() -> Self {
        GainConfig {
            lambda: 0.5,
            gamma: 0.8,
            subgraph_radius: 3.0,
            r_ray: 4.0,
            num_rays: 20,
            max_waypoints: 12,
            hierarchy: HierarchyLevels::RegionOnly,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Snap a non-traversable goal to the nearest traversable cell within
    /// this radius, meters.
    pub snap_radius: f64,
    /// Waypoint / stair-entrance arrival radius, meters.
    pub arrival_radius: f64,
    /// Obstacle inflation radius, meters.
    pub agent_radius: f64,
    /// Floor-point count confirming arrival on a new level (assumes 0.05 m
    /// cells).
    pub floor_points_threshold: usize,
    /// Agent base height used to split stair candidates up/down, meters.
    pub base_height: f64,
    /// Half-size of the local stair-climbing window, meters (2x2 m window).
    pub stair_window: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            snap_radius: 0.5,
            arrival_radius: 0.25,
            agent_radius: 0.18,
            floor_points_threshold: 800,
            base_height: 0.1,
            stair_window: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub step_budget: usize,
    pub success_distance: f64,
    /// Minimum detection confidence for a goal candidate sighting.
    pub conf_min: f64,
    /// Sightings before a candidate becomes verification-eligible.
    pub min_sightings: usize,
    /// Re-select the frontier at least every this many steps.
    pub replan_interval: usize,
    /// Query the goal verifier; when off, eligible candidates are accepted
    /// outright.
    pub verify_enabled: bool,
    /// Use the region-prior context check in the deterministic verifier.
    pub context_check: bool,
    /// Allow the stair state machine (floor transitions).
    pub stairs_enabled: bool,
    /// Simulator steps charged per verifier query.
    pub verify_step_penalty: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            step_budget: 500,
            success_distance: 0.1,
            conf_min: 0.6,
            min_sightings: 2,
            replan_interval: 25,
            verify_enabled: true,
            context_check: true,
            stairs_enabled: true,
            verify_step_penalty: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Sensor field of view, degrees.
    pub fov_deg: f64,
    /// Sensor range, meters.
    pub range: f64,
    /// Base detection confidence.
    pub detection_confidence: f64,
    /// Confidence assigned to decoy objects.
    pub decoy_confidence: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            fov_deg: 90.0,
            range: 5.0,
            detection_confidence: 0.9,
            decoy_confidence: 0.7,
        }
    }
}

/// Optional external-LLM adapter settings; read from the environment when
/// unset. Absence disables the adapters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub timeout_secs: u64,
}

impl LlmConfig {
    pub fn resolved(&self) -> Option<(String, String, String)> {
        let endpoint = self
            .endpoint
            .clone()
            .or_else(|| std::env::var("SEMNAV_LLM_ENDPOINT").ok())?;
        let model = self
            .model
            .clone()
            .or_else(|| std::env::var("SEMNAV_LLM_MODEL").ok())?;
        let key = self
            .api_key
            .clone()
            .or_else(|| std::env::var("SEMNAV_LLM_API_KEY").ok())
            .unwrap_or_default();
        Some((endpoint, model, key))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    pub grid: GridConfig,
    pub grouping: GroupingConfig,
    pub imagine: ImagineConfig,
    pub gain: GainConfig,
    pub planner: PlannerConfig,
    pub agent: AgentConfig,
    pub sim: SimConfig,
    pub llm: LlmConfig,
}

impl NavConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Stable fingerprint of the full configuration, for report headers.
    pub fn fingerprint(&self) -> String {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.to_toml().hash(&mut h);
        format!("{:016x}", h.finish())
    }
}
