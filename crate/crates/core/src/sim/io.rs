//! Scene and episode persistence. Scenes store only the generative specs
//! and are re-rasterized on load, so files stay small and loading is exact.

use super::gen::{build_ground_truth, rasterize, SceneGenConfig};
use super::{DoorSpec, EpisodeSpec, RoomSpec, Scene, SceneObject, SimError, StairSpec};
use serde::{Deserialize, Serialize};

pub const SCENE_SCHEMA: &str = "semnav-scene-v1";

#[derive(Debug, Serialize, Deserialize)]
struct SceneDoc {
    schema: String,
    seed: u64,
    config: SceneGenConfig,
    n: usize,
    rooms: Vec<RoomSpec>,
    doors: Vec<DoorSpec>,
    stairs: Vec<StairSpec>,
    objects: Vec<SceneObject>,
}

pub fn scene_to_json(scene: &Scene) -> serde_json::Value {
    serde_json::to_value(SceneDoc {
        schema: SCENE_SCHEMA.to_string(),
        seed: scene.seed,
        config: scene.config.clone(),
        n: scene.n,
        rooms: scene.rooms.clone(),
        doors: scene.doors.clone(),
        stairs: scene.stairs.clone(),
        objects: scene.objects.clone(),
    })
    .expect("scene serializes")
}

pub fn scene_from_json(value: &serde_json::Value) -> Result<Scene, SimError> {
    let doc: SceneDoc =
        serde_json::from_value(value.clone()).map_err(|e| SimError::BadScene(e.to_string()))?;
    if doc.schema != SCENE_SCHEMA {
        return Err(SimError::BadScene(format!(
            "schema {:?}, expected {SCENE_SCHEMA:?}",
            doc.schema
        )));
    }
    let floors = rasterize(&doc.config, doc.n, &doc.rooms, &doc.doors, &doc.stairs);
    let ground_truth = build_ground_truth(&doc.config, &doc.rooms, &doc.objects);
    Ok(Scene {
        seed: doc.seed,
        resolution: doc.config.resolution,
        config: doc.config,
        n: doc.n,
        rooms: doc.rooms,
        doors: doc.doors,
        stairs: doc.stairs,
        objects: doc.objects,
        floors,
        ground_truth,
    })
}

/// One JSON object per line.
pub fn episodes_to_jsonl(episodes: &[EpisodeSpec]) -> String {
    let mut out = String::new();
    for ep in episodes {
        out.push_str(&serde_json::to_string(ep).expect("episode serializes"));
        out.push('\n');
    }
    out
}

pub fn episodes_from_jsonl(text: &str) -> Result<Vec<EpisodeSpec>, SimError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| SimError::BadScene(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gen::generate_scene;

    #[test]
    fn scene_roundtrip_preserves_rasters_and_graph() {
        let cfg = SceneGenConfig { floors: 2, decoys: 1, ..Default::default() };
        let scene = generate_scene(17, &cfg).unwrap();
        let loaded = scene_from_json(&scene_to_json(&scene)).unwrap();
        assert_eq!(scene.rooms, loaded.rooms);
        assert_eq!(scene.objects, loaded.objects);
        for (a, b) in scene.floors.iter().zip(&loaded.floors) {
            assert_eq!(a.wall, b.wall);
            assert_eq!(a.height, b.height);
            assert_eq!(a.room_id, b.room_id);
        }
        assert_eq!(
            serde_json::to_string(&scene.ground_truth).unwrap(),
            serde_json::to_string(&loaded.ground_truth).unwrap()
        );
    }

    #[test]
    fn wrong_schema_rejected() {
        let scene = generate_scene(1, &SceneGenConfig::default()).unwrap();
        let mut v = scene_to_json(&scene);
        v["schema"] = serde_json::json!("something-else");
        assert!(scene_from_json(&v).is_err());
    }

    #[test]
    fn episode_jsonl_roundtrip() {
        let scene = generate_scene(3, &SceneGenConfig::default()).unwrap();
        let eps = crate::sim::sample_episodes(&scene, 1, 4, &Default::default()).unwrap();
        let text = episodes_to_jsonl(&eps);
        assert_eq!(episodes_from_jsonl(&text).unwrap(), eps);
    }
}
