//! Domain masks of arbitrary shape inside the unpadded region of a box grid:
//! boolean shape expressions (balls, axis boxes, half-spaces, seeded blobs,
//! bitmap imports), deterministic cell-center rasterization, interior margins
//! for finite-difference stencils, and the packed mask file format.
//!
//! Shape coordinates are fractions of the box length (a ball at
//! `center = [0.5, 0.5]` with `radius = 0.15` is the centered disk of radius
//! `0.15 L`). Shape expressions are rasterized over the unpadded region only;
//! imported cell data (bitmaps, mask files) must already live inside it and
//! error out otherwise.

use crate::error::{Error, Result};
use crate::grid::BoxGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{Read, Write};
use std::path::Path;

/// Boolean shape expression, coordinates in units of the box length.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(rename = "box")]
    AxisBox {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    /// Points with `normal . x <= offset`.
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    Union(Vec<Shape>),
    Intersection(Vec<Shape>),
    /// `base` minus `subtract`.
    Difference {
        base: Box<Shape>,
        subtract: Box<Shape>,
    },
    /// Seeded irregular union of balls inside the safe central region;
    /// deterministic in (seed, count), possibly disconnected.
    Blob {
        seed: u64,
        count: usize,
    },
    /// Cell data imported from a bitmap file (one byte per cell).
    Bitmap {
        path: String,
    },
}

impl Shape {
    /// Membership of a fractional coordinate. Bitmap shapes are resolved at
    /// rasterization time, not here.
    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Ball { center, radius } => {
                let d2: f64 = x
                    .iter()
                    .zip(center.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d2 <= radius * radius
            }
            Shape::AxisBox { min, max } => x
                .iter()
                .zip(min.iter().zip(max.iter()))
                .all(|(v, (lo, hi))| v >= lo && v < hi),
            Shape::HalfSpace { normal, offset } => {
                let dot: f64 = x.iter().zip(normal.iter()).map(|(a, b)| a * b).sum();
                dot <= *offset
            }
            Shape::Union(parts) => parts.iter().any(|s| s.contains(x)),
            Shape::Intersection(parts) => parts.iter().all(|s| s.contains(x)),
            Shape::Difference { base, subtract } => base.contains(x) && !subtract.contains(x),
            Shape::Blob { seed, count } => {
                let balls = blob_balls(x.len(), *seed, *count);
                balls.iter().any(|(c, r)| {
                    let d2: f64 = x.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    d2 <= r * r
                })
            }
            Shape::Bitmap { .. } => false,
        }
    }
}

/// Deterministic ball parameters for [`Shape::Blob`]: centers in the safe
/// central band, radii small enough to stay clear of the padding at factor 2.
fn blob_balls(n: usize, seed: u64, count: usize) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb10b);
    (0..count.max(1))
        .map(|_| {
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.36..0.64)).collect();
            let r = rng.gen_range(0.035..0.10);
            (c, r)
        })
        .collect()
}

/// Boolean cell mask on a box grid; every true cell lies in the unpadded
/// region.
#[derive(Clone, Debug)]
pub struct DomainMask {
    grid: BoxGrid,
    cells: Vec<bool>,
    true_cells: Vec<usize>,
}

impl DomainMask {
    /// Rasterizes a shape expression over the unpadded region (cell centers;
    /// the shape is clipped to the region). Errors when empty.
    pub fn from_shape(grid: &BoxGrid, shape: &Shape) -> Result<Self> {
        let mut cells = vec![false; grid.points()];
        let l = grid.length();
        match shape {
            Shape::Bitmap { path } => {
                let imported = import_bitmap(Path::new(path), grid)?;
                return Ok(imported);
            }
            _ => {
                for (idx, cell) in cells.iter_mut().enumerate() {
                    if !grid.is_unpadded(idx) {
                        continue;
                    }
                    let x: Vec<f64> = grid.coord(idx).iter().map(|v| v / l).collect();
                    *cell = shape.contains(&x);
                }
            }
        }
        Self::from_cells_clipped(grid, cells)
    }

    fn from_cells_clipped(grid: &BoxGrid, cells: Vec<bool>) -> Result<Self> {
        let true_cells: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        if true_cells.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(DomainMask {
            grid: grid.clone(),
            cells,
            true_cells,
        })
    }

    /// Builds a mask from raw cell data; errors when a true cell touches the
    /// padded region.
    pub fn from_cells(grid: &BoxGrid, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != grid.points() {
            return Err(Error::DimensionMismatch(format!(
                "cell data has {} entries, grid has {} points",
                cells.len(),
                grid.points()
            )));
        }
        for (idx, &b) in cells.iter().enumerate() {
            if b && !grid.is_unpadded(idx) {
                return Err(Error::MaskTouchesPadding);
            }
        }
        Self::from_cells_clipped(grid, cells)
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }
    pub fn contains(&self, idx: usize) -> bool {
        self.cells[idx]
    }
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }
    pub fn true_cells(&self) -> &[usize] {
        &self.true_cells
    }
    pub fn cell_count(&self) -> usize {
        self.true_cells.len()
    }

    /// Mask volume `#cells * h^n`.
    pub fn volume(&self) -> f64 {
        self.cell_count() as f64 * self.grid.h().powi(self.grid.n() as i32)
    }

    /// Centroid of the cell centers.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut c = vec![0.0; n];
        for &idx in &self.true_cells {
            for (j, v) in self.grid.coord(idx).iter().enumerate() {
                c[j] += v;
            }
        }
        for v in c.iter_mut() {
            *v /= self.true_cells.len() as f64;
        }
        c
    }

    /// Cells whose full cube of `radius` cells lies inside the mask
    /// (separable erosion, one axis at a time).
    pub fn interior_cells(&self, radius: usize) -> Vec<usize> {
        let mut current = self.cells.clone();
        let size = self.grid.size();
        let n = self.grid.n();
        for axis in 0..n {
            let mut next = vec![false; current.len()];
            for (idx, slot) in next.iter_mut().enumerate() {
                if !current[idx] {
                    continue;
                }
                let ix = self.grid.decompose(idx);
                let mut ok = true;
                for off in 1..=radius {
                    for dir in [-1i64, 1] {
                        let mut jx = ix.clone();
                        let moved = ix[axis] as i64 + dir * off as i64;
                        if moved < 0 || moved >= size as i64 {
                            ok = false;
                            break;
                        }
                        jx[axis] = moved as usize;
                        if !current[self.grid.flatten(&jx)] {
                            ok = false;
                            break;
                        }
                    }
                    if !ok {
                        break;
                    }
                }
                *slot = ok;
            }
            current = next;
        }
        current
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Sub-mask of the interior cells (errors when the margin empties it).
    pub fn interior_mask(&self, radius: usize) -> Result<DomainMask> {
        let cells_idx = self.interior_cells(radius);
        let mut cells = vec![false; self.grid.points()];
        for idx in cells_idx {
            cells[idx] = true;
        }
        Self::from_cells_clipped(&self.grid, cells)
    }

    /// Number of connected components (face-adjacency flood fill).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.grid.points()];
        let mut comps = 0;
        let size = self.grid.size() as i64;
        for &start in &self.true_cells {
            if seen[start] {
                continue;
            }
            comps += 1;
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(idx) = queue.pop_front() {
                let ix = self.grid.decompose(idx);
                for axis in 0..self.grid.n() {
                    for dir in [-1i64, 1] {
                        let moved = ix[axis] as i64 + dir;
                        if moved < 0 || moved >= size {
                            continue;
                        }
                        let mut jx = ix.clone();
                        jx[axis] = moved as usize;
                        let j = self.grid.flatten(&jx);
                        if self.cells[j] && !seen[j] {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        comps
    }

    /// Chebyshev distance (in cells) from each true cell to the complement;
    /// returns the deepest cell and its distance. Used to center interior
    /// bump data.
    pub fn incenter(&self) -> (usize, usize) {
        // multi-source BFS from the complement under the Chebyshev metric is
        // approximated by iterated erosion; depths are small in practice
        let mut depth = 0usize;
        let mut best = self.true_cells[0];
        loop {
            let next = self.interior_cells(depth + 1);
            if next.is_empty() || depth > self.grid.size() {
                return (best, depth);
            }
            best = next[0];
            depth += 1;
        }
    }

    // ---------------------------------------------------------------
    // file formats
    // ---------------------------------------------------------------

    /// Writes the packed-bit mask format plus a JSON sidecar describing the
    /// grid and (optionally) the originating shape expression.
    pub fn write_mask_file(&self, path: &Path, shape: Option<&Shape>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(b"MXMK")?;
        f.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        for s in self.grid.sizes() {
            f.write_all(&(s as u32).to_le_bytes())?;
        }
        let mut packed = vec![0u8; self.cells.len().div_ceil(8)];
        for (i, &b) in self.cells.iter().enumerate() {
            if b {
                packed[i / 8] |= 1 << (i % 8);
            }
        }
        f.write_all(&packed)?;

        let sidecar = serde_json::json!({
            "grid": {
                "n": self.grid.n(),
                "size": self.grid.size(),
                "length": self.grid.length(),
                "padding": self.grid.padding(),
            },
            "shape": shape,
            "cells": self.cell_count(),
        });
        let sidecar_path = path.with_extension(format!(
            "{}.json",
            path.extension().and_then(|e| e.to_str()).unwrap_or("mask")
        ));
        std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    /// Reads the packed-bit mask format; sizes must match the grid and true
    /// cells must lie in the unpadded region.
    pub fn read_mask_file(path: &Path, grid: &BoxGrid) -> Result<Self> {
        let mut f = std::fs::File::open(path)?;
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != b"MXMK" {
            return Err(Error::Format("bad mask magic".into()));
        }
        let mut u32buf = [0u8; 4];
        f.read_exact(&mut u32buf)?;
        let n = u32::from_le_bytes(u32buf) as usize;
        if n != grid.n() {
            return Err(Error::Format(format!(
                "mask dimension {n} differs from grid dimension {}",
                grid.n()
            )));
        }
        for _ in 0..n {
            f.read_exact(&mut u32buf)?;
            let s = u32::from_le_bytes(u32buf) as usize;
            if s != grid.size() {
                return Err(Error::Format(format!(
                    "mask size {s} differs from grid size {}",
                    grid.size()
                )));
            }
        }
        let mut packed = vec![0u8; grid.points().div_ceil(8)];
        f.read_exact(&mut packed)?;
        let cells: Vec<bool> = (0..grid.points())
            .map(|i| packed[i / 8] & (1 << (i % 8)) != 0)
            .collect();
        Self::from_cells(grid, cells)
    }
}

/// Imports a one-byte-per-cell bitmap (header: magic, n, sizes); nonzero
/// bytes are mask cells.
pub fn import_bitmap(path: &Path, grid: &BoxGrid) -> Result<DomainMask> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != b"MXBM" {
        return Err(Error::Format("bad bitmap magic".into()));
    }
    let mut u32buf = [0u8; 4];
    f.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf) as usize;
    if n != grid.n() {
        return Err(Error::Format(format!(
            "bitmap dimension {n} differs from grid dimension {}",
            grid.n()
        )));
    }
    for _ in 0..n {
        f.read_exact(&mut u32buf)?;
        let s = u32::from_le_bytes(u32buf) as usize;
        if s != grid.size() {
            return Err(Error::Format(format!(
                "bitmap size {s} differs from grid size {}",
                grid.size()
            )));
        }
    }
    let mut bytes = vec![0u8; grid.points()];
    f.read_exact(&mut bytes)?;
    DomainMask::from_cells(grid, bytes.iter().map(|&b| b != 0).collect())
}

/// Writes the one-byte-per-cell bitmap format.
pub fn export_bitmap(mask: &DomainMask, path: &Path) -> Result<()> {
    let grid = mask.grid();
    let mut f = std::fs::File::create(path)?;
    f.write_all(b"MXBM")?;
    f.write_all(&(grid.n() as u32).to_le_bytes())?;
    for s in grid.sizes() {
        f.write_all(&(s as u32).to_le_bytes())?;
    }
    let bytes: Vec<u8> = mask.cells().iter().map(|&b| u8::from(b)).collect();
    f.write_all(&bytes)?;
    Ok(())
}

/// Convenience constructor matching the bench suite's mask families.
pub fn named_mask(grid: &BoxGrid, family: &str) -> Result<DomainMask> {
    let n = grid.n();
    let center = vec![0.5; n];
    let shape = match family {
        "disk" => Shape::Ball {
            center,
            radius: 0.2,
        },
        "small_disk" => Shape::Ball {
            center,
            radius: 0.15,
        },
        "square" => Shape::AxisBox {
            min: vec![0.3; n],
            max: vec![0.7; n],
        },
        "two_ball" => Shape::Union(vec![
            Shape::Ball {
                center: vec![0.385; n],
                radius: 0.105,
            },
            Shape::Ball {
                center: vec![0.615; n],
                radius: 0.095,
            },
        ]),
        "blob" => Shape::Blob { seed: 17, count: 7 },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown mask family '{other}'"
            )))
        }
    };
    DomainMask::from_shape(grid, &shape)
}
