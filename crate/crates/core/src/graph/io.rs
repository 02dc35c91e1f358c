//! Scene-graph dump/load as JSON: regions with caption maps, centers, and
//! contained objects, plus floors, ungrouped objects, and provenance.

use super::{
    make_object, FloorNode, GraphError, ObjectId, Provenance, RegionId, RegionNode, SceneGraph,
};
use crate::geom::WorldPoint;
use serde_json::{json, Value};

fn provenance_str(p: Provenance) -> &'static str {
    match p {
        Provenance::Observed => "observed",
        Provenance::Imagined => "imagined",
    }
}

fn parse_provenance(v: &Value) -> Result<Provenance, GraphError> {
    match v.as_str() {
        Some("observed") => Ok(Provenance::Observed),
        Some("imagined") => Ok(Provenance::Imagined),
        other => Err(GraphError::BadJson(format!("bad provenance {other:?}"))),
    }
}

pub fn graph_to_json(graph: &SceneGraph) -> Value {
    let floors: Vec<Value> = graph
        .floors
        .iter()
        .map(|f| json!({"id": f.id, "z_range": [f.z_range.0, f.z_range.1]}))
        .collect();

    let regions: Vec<Value> = graph
        .regions
        .values()
        .map(|r| {
            let caption: serde_json::Map<String, Value> = r
                .caption
                .iter()
                .map(|(l, c)| (l.clone(), json!(c)))
                .collect();
            let objects: Vec<Value> = r
                .members
                .iter()
                .map(|m| {
                    let o = &graph.objects[m];
                    json!({
                        "id": o.id.0,
                        "caption": o.category,
                        "center": [o.position.x, o.position.y],
                        "confidence": o.confidence,
                        "provenance": provenance_str(o.provenance),
                    })
                })
                .collect();
            json!({
                "id": r.id.0,
                "caption": caption,
                "center": [r.center.x, r.center.y],
                "floor": r.floor,
                "provenance": provenance_str(r.provenance),
                "objects": objects,
            })
        })
        .collect();

    let ungrouped: Vec<Value> = graph
        .objects
        .values()
        .filter(|o| !graph.object_parent.contains_key(&o.id))
        .map(|o| {
            json!({
                "id": o.id.0,
                "caption": o.category,
                "center": [o.position.x, o.position.y],
                "confidence": o.confidence,
                "floor": o.floor,
                "provenance": provenance_str(o.provenance),
            })
        })
        .collect();

    json!({
        "schema": "semnav-scenegraph-v1",
        "floors": floors,
        "regions": regions,
        "ungrouped_objects": ungrouped,
    })
}

fn point_from(v: &Value) -> Result<WorldPoint, GraphError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| GraphError::BadJson("center must be [x, y]".into()))?;
    Ok(WorldPoint::new(
        arr[0].as_f64().ok_or_else(|| GraphError::BadJson("bad x".into()))?,
        arr[1].as_f64().ok_or_else(|| GraphError::BadJson("bad y".into()))?,
    ))
}

pub fn graph_from_json(v: &Value) -> Result<SceneGraph, GraphError> {
    let mut graph = SceneGraph::new();
    for f in v["floors"].as_array().into_iter().flatten() {
        let id = f["id"].as_u64().ok_or_else(|| GraphError::BadJson("floor id".into()))? as usize;
        let zr = f["z_range"].as_array();
        let z_range = zr
            .filter(|a| a.len() == 2)
            .map(|a| (a[0].as_f64().unwrap_or(0.0), a[1].as_f64().unwrap_or(0.0)))
            .unwrap_or((0.0, 0.0));
        graph.floors.push(FloorNode { id, z_range });
    }

    let mut max_obj = 0u32;
    let mut max_region = 0u32;
    let mut add_object = |graph: &mut SceneGraph, o: &Value, floor: usize| -> Result<ObjectId, GraphError> {
        let id = ObjectId(o["id"].as_u64().ok_or_else(|| GraphError::BadJson("object id".into()))? as u32);
        let category = o["caption"]
            .as_str()
            .ok_or_else(|| GraphError::BadJson("object caption".into()))?;
        let position = point_from(&o["center"])?;
        let confidence = o["confidence"].as_f64().unwrap_or(1.0);
        let provenance = parse_provenance(&o["provenance"])?;
        let mut node = make_object(id, category, position, floor, confidence, provenance);
        if provenance == Provenance::Imagined {
            node.observation_count = 0;
        }
        max_obj = max_obj.max(id.0 + 1);
        graph.objects.insert(id, node);
        Ok(id)
    };

    for r in v["regions"].as_array().into_iter().flatten() {
        let id = RegionId(r["id"].as_u64().ok_or_else(|| GraphError::BadJson("region id".into()))? as u32);
        max_region = max_region.max(id.0 + 1);
        let floor = r["floor"].as_u64().unwrap_or(0) as usize;
        let mut caption: Vec<(String, f64)> = r["caption"]
            .as_object()
            .ok_or_else(|| GraphError::BadJson("region caption".into()))?
            .iter()
            .map(|(l, c)| (l.clone(), c.as_f64().unwrap_or(0.0)))
            .collect();
        caption.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let provenance = parse_provenance(&r["provenance"])?;
        let mut members = Vec::new();
        for o in r["objects"].as_array().into_iter().flatten() {
            let oid = add_object(&mut graph, o, floor)?;
            members.push(oid);
            graph.object_parent.insert(oid, id);
        }
        graph.regions.insert(
            id,
            RegionNode {
                id,
                caption,
                center: point_from(&r["center"])?,
                members,
                floor,
                provenance,
                imagined_for: None,
            },
        );
    }

    for o in v["ungrouped_objects"].as_array().into_iter().flatten() {
        let floor = o["floor"].as_u64().unwrap_or(0) as usize;
        add_object(&mut graph, o, floor)?;
    }

    graph.next_object_id = max_obj;
    graph.next_region_id = max_region;
    graph.check_tree().map_err(GraphError::BadJson)?;
    Ok(graph)
}
