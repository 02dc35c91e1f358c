//! Minimal deterministic rasterizer for benchmark artifacts: map snapshots
//! with trajectory overlays and per-step gain curves.

use crate::agent::TraceRow;
use crate::sim::Scene;
use std::path::Path;

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];
pub const GRAY: Rgb = [180, 180, 180];
pub const LIGHT: Rgb = [230, 230, 230];
pub const RED: Rgb = [200, 30, 30];
pub const BLUE: Rgb = [30, 60, 200];
pub const GREEN: Rgb = [20, 140, 60];
pub const ORANGE: Rgb = [230, 140, 20];

pub struct Canvas {
    pub width: usize,
    pub height: usize,
    px: Vec<Rgb>,
}

impl Canvas {
    pub fn new(width: usize, height: usize, bg: Rgb) -> Canvas {
        Canvas { width, height, px: vec![bg; width * height] }
    }

    pub fn set(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.px[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn disc(&mut self, x: i64, y: i64, r: i64, c: Rgb) {
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    self.set(x + dx, y + dy, c);
                }
            }
        }
    }

    pub fn line(&mut self, mut x0: i64, mut y0: i64, x1: i64, y1: i64, c: Rgb) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set(x0, y0, c);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut img = image::RgbImage::new(self.width as u32, self.height as u32);
        for y in 0..self.height {
            for x in 0..self.width {
                img.put_pixel(x as u32, y as u32, image::Rgb(self.px[y * self.width + x]));
            }
        }
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).expect("in-memory PNG encode");
        out.into_inner()
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_png())
    }
}

/// One map snapshot per floor: walls black, stairs gray, open floor light;
/// the trajectory drawn over it (start green disc, stop red disc).
pub fn render_floor_map(scene: &Scene, floor: usize, trace: &[TraceRow]) -> Canvas {
    let n = scene.n;
    let raster = &scene.floors[floor];
    let mut canvas = Canvas::new(n, n, WHITE);
    let base = floor as f64 * crate::sim::FLOOR_HEIGHT;
    for r in 0..n {
        for c in 0..n {
            let cell = crate::geom::Cell::new(r as i32, c as i32);
            let color = if raster.is_wall(cell) {
                BLACK
            } else if (raster.height_at(cell) - base).abs() > 0.02 {
                GRAY
            } else {
                LIGHT
            };
            // Image y grows downward; grid rows grow with world y.
            canvas.set(c as i64, (n - 1 - r) as i64, color);
        }
    }
    let to_px = |x: f64, y: f64| {
        let c = (x / scene.resolution).floor() as i64;
        let r = (y / scene.resolution).floor() as i64;
        (c, n as i64 - 1 - r)
    };
    let rows: Vec<&TraceRow> = trace.iter().filter(|t| t.floor == floor).collect();
    for w in rows.windows(2) {
        // Consecutive steps only; a floor change breaks the polyline.
        if w[1].step == w[0].step + 1 {
            let (x0, y0) = to_px(w[0].x, w[0].y);
            let (x1, y1) = to_px(w[1].x, w[1].y);
            canvas.line(x0, y0, x1, y1, BLUE);
        }
    }
    if let Some(first) = rows.first() {
        let (x, y) = to_px(first.x, first.y);
        canvas.disc(x, y, 3, GREEN);
    }
    if let Some(last) = rows.last() {
        let (x, y) = to_px(last.x, last.y);
        canvas.disc(x, y, 3, RED);
    }
    canvas
}

/// Selected-frontier gains over steps: exploitation orange, exploration blue.
pub fn render_gain_curves(trace: &[TraceRow]) -> Canvas {
    let (w, h) = (600usize, 200usize);
    let mut canvas = Canvas::new(w, h, WHITE);
    canvas.line(0, h as i64 - 1, w as i64 - 1, h as i64 - 1, BLACK);
    canvas.line(0, 0, 0, h as i64 - 1, BLACK);
    let max_step = trace.last().map(|t| t.step).unwrap_or(0).max(1);
    let px = |step: usize, v: f64| {
        let x = (step as f64 / max_step as f64 * (w as f64 - 2.0)) as i64 + 1;
        let y = h as i64 - 2 - (v.clamp(0.0, 1.0) * (h as f64 - 4.0)) as i64;
        (x, y)
    };
    for (value, color) in [
        (&(|t: &TraceRow| t.s_s) as &dyn Fn(&TraceRow) -> Option<f64>, ORANGE),
        (&(|t: &TraceRow| t.s_g), BLUE),
    ] {
        let mut prev: Option<(i64, i64)> = None;
        for t in trace {
            if let Some(v) = value(t) {
                let p = px(t.step, v);
                if let Some(q) = prev {
                    canvas.line(q.0, q.1, p.0, p.1, color);
                }
                prev = Some(p);
            }
        }
    }
    canvas
}
