//! Occupancy rasterization of a mesh onto a square grid.

use serde::{Deserialize, Serialize};

use super::{point_in_polygon, MeshError, MeshModel};

/// Axis-aligned region in millimetres mapped onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Frame {
    /// Bounding box of all vertices grown by 5% of the extent on every side.
    pub fn around(mesh: &MeshModel) -> Result<Frame, MeshError> {
        let (x0, y0, x1, y1) = mesh.bbox_um().ok_or(MeshError::DegenerateFrame)?;
        let (x0, y0, x1, y1) = (
            x0 as f64 / 1000.0,
            y0 as f64 / 1000.0,
            x1 as f64 / 1000.0,
            y1 as f64 / 1000.0,
        );
        let (dx, dy) = (x1 - x0, y1 - y0);
        if dx <= 0.0 || dy <= 0.0 {
            return Err(MeshError::DegenerateFrame);
        }
        Ok(Frame {
            x0: x0 - 0.05 * dx,
            y0: y0 - 0.05 * dy,
            x1: x1 + 0.05 * dx,
            y1: y1 + 0.05 * dy,
        })
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Frame {
        Frame {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }
}

/// Row-major binary occupancy; row 0 is the lowest y.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub size: usize,
    pub cells: Vec<u8>,
}

impl Grid {
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.size + col]
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| **c != 0).count()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.cells.iter().map(|&c| c as f64).collect()
    }
}

/// Rasterizes with the default frame from [`Frame::around`].
pub fn rasterize(mesh: &MeshModel, size: usize) -> Result<Grid, MeshError> {
    rasterize_in(mesh, &Frame::around(mesh)?, size)
}

/// A cell is set when its centre lies inside any polygon.
pub fn rasterize_in(mesh: &MeshModel, frame: &Frame, size: usize) -> Result<Grid, MeshError> {
    if size < 8 {
        return Err(MeshError::GridTooSmall(size));
    }
    let (w, h) = (frame.x1 - frame.x0, frame.y1 - frame.y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(MeshError::DegenerateFrame);
    }
    let shapes: Vec<Vec<(f64, f64)>> = (0..mesh.polygons().len())
        .map(|p| {
            mesh.polygon_points(p)
                .iter()
                .map(|q| (q.x_mm() - frame.x0, q.y_mm() - frame.y0))
                .collect()
        })
        .collect();
    let (dx, dy) = (w / size as f64, h / size as f64);
    let mut cells = vec![0u8; size * size];
    for row in 0..size {
        let cy = (row as f64 + 0.5) * dy;
        for col in 0..size {
            let cx = (col as f64 + 0.5) * dx;
            if shapes.iter().any(|s| point_in_polygon(cx, cy, s)) {
                cells[row * size + col] = 1;
            }
        }
    }
    Ok(Grid { size, cells })
}
