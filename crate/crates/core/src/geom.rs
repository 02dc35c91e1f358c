//! Basic grid/world geometry shared across modules.

use serde::{Deserialize, Serialize};

/// Integer grid cell, addressed as (row, col). Signed so intermediate
/// arithmetic can leave the map before bounds checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

impl Cell {
    pub const fn new(row: i32, col: i32) -> Self {
        Cell { row, col }
    }

    /// 4-neighborhood (N, S, W, E).
    pub fn neighbors4(self) -> [Cell; 4] {
        [
            Cell::new(self.row - 1, self.col),
            Cell::new(self.row + 1, self.col),
            Cell::new(self.row, self.col - 1),
            Cell::new(self.row, self.col + 1),
        ]
    }

    /// 8-neighborhood.
    pub fn neighbors8(self) -> [Cell; 8] {
        [
            Cell::new(self.row - 1, self.col - 1),
            Cell::new(self.row - 1, self.col),
            Cell::new(self.row - 1, self.col + 1),
            Cell::new(self.row, self.col - 1),
            Cell::new(self.row, self.col + 1),
            Cell::new(self.row + 1, self.col - 1),
            Cell::new(self.row + 1, self.col),
            Cell::new(self.row + 1, self.col + 1),
        ]
    }
}

/// A point in world coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        WorldPoint { x, y }
    }

    pub fn distance(self, other: WorldPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Agent pose: planar position plus height, heading, and current floor.
/// Heading is radians, measured counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub heading: f64,
    pub floor: usize,
}

impl AgentPose {
    pub fn point(&self) -> WorldPoint {
        WorldPoint::new(self.x, self.y)
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * std::f64::consts::PI);
    if a <= -std::f64::consts::PI {
        a += 2.0 * std::f64::consts::PI;
    } else if a > std::f64::consts::PI {
        a -= 2.0 * std::f64::consts::PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = wrap_angle(0.37 * k as f64);
            assert!(a > -std::f64::consts::PI && a <= std::f64::consts::PI);
        }
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
    }
}
