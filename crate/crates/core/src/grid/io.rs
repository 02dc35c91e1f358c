//! Map snapshot export: PGM occupancy images with a JSON sidecar, and a
//! small header + row-major little-endian f32 format for float layers.

use super::{CellState, GridError, OccupancyGrid};
use serde_json::json;
use std::io::{Read, Write};
use std::path::Path;

/// Write the occupancy lattice as a binary PGM (P5): 0 = occupied,
/// 128 = unknown, 255 = free. A `<path>.json` sidecar carries resolution,
/// origin, and floor id.
pub fn export_pgm(grid: &OccupancyGrid, path: &Path) -> Result<(), GridError> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", grid.width, grid.height_cells)?;
    let bytes: Vec<u8> = grid
        .cells()
        .iter()
        .map(|s| match s {
            CellState::Occupied => 0u8,
            CellState::Unknown => 128,
            CellState::Free => 255,
        })
        .collect();
    f.write_all(&bytes)?;

    let sidecar = json!({
        "schema": "semnav-map-sidecar-v1",
        "resolution": grid.resolution,
        "origin": [grid.origin.x, grid.origin.y],
        "floor_id": grid.floor_id,
        "width": grid.width,
        "height_cells": grid.height_cells,
    });
    let mut sidecar_path = path.as_os_str().to_owned();
    sidecar_path.push(".json");
    std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar).unwrap())?;
    Ok(())
}

const FLOAT_RASTER_MAGIC: &str = "F32R v1";

/// Write a row-major float raster: ASCII header `F32R v1 <width> <height>\n`
/// followed by width*height little-endian f32 values.
pub fn export_float_raster(
    values: &[f64],
    width: usize,
    height: usize,
    path: &Path,
) -> Result<(), GridError> {
    assert_eq!(values.len(), width * height);
    let mut f = std::fs::File::create(path)?;
    write!(f, "{FLOAT_RASTER_MAGIC} {width} {height}\n")?;
    let mut buf = Vec::with_capacity(values.len() * 4);
    for &v in values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Read a raster written by [`export_float_raster`].
pub fn import_float_raster(path: &Path) -> Result<(Vec<f64>, usize, usize), GridError> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let header_end = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| GridError::BadFormat("missing header".into()))?;
    let header = std::str::from_utf8(&data[..header_end])
        .map_err(|_| GridError::BadFormat("non-utf8 header".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "F32R" || parts[1] != "v1" {
        return Err(GridError::BadFormat(format!("bad header: {header}")));
    }
    let width: usize = parts[2]
        .parse()
        .map_err(|_| GridError::BadFormat("bad width".into()))?;
    let height: usize = parts[3]
        .parse()
        .map_err(|_| GridError::BadFormat("bad height".into()))?;
    let body = &data[header_end + 1..];
    if body.len() != width * height * 4 {
        return Err(GridError::BadFormat(format!(
            "expected {} bytes, found {}",
            width * height * 4,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok((values, width, height))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Cell, WorldPoint};

    #[test]
    fn pgm_roundtrip_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut g = OccupancyGrid::new(4, 3, 0.05, WorldPoint::new(1.0, 2.0), 1);
        g.set_state(Cell::new(0, 0), CellState::Free);
        g.set_state(Cell::new(2, 3), CellState::Occupied);
        let path = dir.path().join("map.pgm");
        export_pgm(&g, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let body_start = bytes.len() - 12;
        assert_eq!(&bytes[..body_start], b"P5\n4 3\n255\n");
        assert_eq!(bytes[body_start], 255); // (0,0) free
        assert_eq!(bytes[body_start + 1], 128); // unknown
        assert_eq!(bytes[body_start + 11], 0); // (2,3) occupied
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("map.pgm.json")).unwrap())
                .unwrap();
        assert_eq!(sidecar["floor_id"], 1);
        assert_eq!(sidecar["resolution"], 0.05);
    }

    #[test]
    fn float_raster_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let vals = vec![0.0, 1.5, -2.25, 3.125, 4.0, 5.5];
        let path = dir.path().join("h.f32r");
        export_float_raster(&vals, 3, 2, &path).unwrap();
        let (back, w, h) = import_float_raster(&path).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(back, vals);
    }
}
