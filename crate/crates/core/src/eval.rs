//! Rasterized polygon IoU, optimal one-to-one matching and detection metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CartesianPolygon;

pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
/// Fractional padding of the union bbox before rasterizing.
const PAD: f64 = 0.02;

/// Sorted x coordinates where the polygon boundary crosses the line `y`.
/// Half-open rule on edge endpoints so vertices are not counted twice.
fn crossings(poly: &CartesianPolygon, y: f64, out: &mut Vec<f64>) {
    out.clear();
    for (a, b) in poly.edges() {
        if (a.y > y) != (b.y > y) {
            out.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    out.sort_by(f64::total_cmp);
}

/// Fills `mask[i]` with the even-odd inside test at pixel centre `x0 + (i + 0.5) dx`.
fn scan_row(xs: &[f64], x0: f64, dx: f64, mask: &mut [bool]) {
    let mut next = 0;
    let mut inside = false;
    for (i, cell) in mask.iter_mut().enumerate() {
        let xc = x0 + (i as f64 + 0.5) * dx;
        while next < xs.len() && xs[next] < xc {
            inside = !inside;
            next += 1;
        }
        *cell = inside;
    }
}

/// IoU of two polygons rasterized on a `grid` x `grid` lattice spanning
/// their padded union bounding box.
pub fn polygon_iou(a: &CartesianPolygon, b: &CartesianPolygon, grid: usize) -> Result<f64> {
    if grid < MIN_GRID {
        return Err(Error::InvalidConfig(format!("grid must be >= {MIN_GRID}, got {grid}")));
    }
    let bb = a.bbox().union(&b.bbox());
    let (px, py) = (bb.width() * PAD, bb.height() * PAD);
    let x0 = bb.min.x - px;
    let y0 = bb.min.y - py;
    let dx = (bb.width() + 2.0 * px) / grid as f64;
    let dy = (bb.height() + 2.0 * py) / grid as f64;
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    let (mut ma, mut mb) = (vec![false; grid], vec![false; grid]);
    let (mut inter, mut union) = (0u64, 0u64);
    for j in 0..grid {
        let y = y0 + (j as f64 + 0.5) * dy;
        crossings(a, y, &mut xa);
        crossings(b, y, &mut xb);
        if xa.is_empty() && xb.is_empty() {
            continue;
        }
        scan_row(&xa, x0, dx, &mut ma);
        scan_row(&xb, x0, dx, &mut mb);
        for (&p, &q) in ma.iter().zip(&mb) {
            inter += (p && q) as u64;
            union += (p || q) as u64;
        }
    }
    if union == 0 {
        return Err(Error::InvalidPolygon("both polygons are empty on the lattice".into()));
    }
    Ok(inter as f64 / union as f64)
}

/// Prediction-by-ground-truth IoU table.
#[derive(Debug, Clone, PartialEq)]
pub struct IoUMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl IoUMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidConfig(format!("IoU entry {v} outside [0, 1]")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig("ragged IoU matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Pairwise rasterized IoU; rows are computed on scoped threads.
    pub fn from_polygons(preds: &[CartesianPolygon], gts: &[CartesianPolygon], grid: usize) -> Result<Self> {
        let row = |p: &CartesianPolygon| -> Result<Vec<f64>> { gts.iter().map(|g| polygon_iou(p, g, grid)).collect() };
        let rows: Vec<Result<Vec<f64>>> = if preds.len() * gts.len() >= 16 {
            std::thread::scope(|s| {
                let handles: Vec<_> = preds.iter().map(|p| s.spawn(move || row(p))).collect();
                handles.into_iter().map(|h| h.join().expect("IoU worker panicked")).collect()
            })
        } else {
            preds.iter().map(row).collect()
        };
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        Self::new(preds.len(), gts.len(), rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Rows assigned to columns minimizing `cost`, for `n <= m`. Classic
/// shortest-augmenting-path method with row and column potentials.
fn min_cost_rows(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= m);
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row (1-based) matched to column j; column 0 is the virtual root.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// One-to-one assignment maximizing total IoU, as `(pred, gt)` pairs sorted
/// by prediction index. Every row or every column (whichever is fewer) is
/// assigned.
pub fn hungarian_assign(iou: &IoUMatrix) -> Vec<(usize, usize)> {
    let (n, m) = (iou.rows, iou.cols);
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let mut pairs: Vec<(usize, usize)> = if n <= m {
        min_cost_rows(n, m, |i, j| 1.0 - iou.get(i, j))
            .into_iter()
            .enumerate()
            .collect()
    } else {
        min_cost_rows(m, n, |j, i| 1.0 - iou.get(i, j))
            .into_iter()
            .enumerate()
            .map(|(j, i)| (i, j))
            .collect()
    };
    pairs.sort_unstable();
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assignment {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub assignments: Vec<Assignment>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou_threshold: f64,
    /// Set when either input list was empty.
    pub empty: bool,
}

/// Precision, recall and F1 after optimal matching; pairs below
/// `iou_threshold` are dropped, and unmatched predictions (including
/// duplicates of one object) count as false positives.
pub fn evaluate(
    preds: &[CartesianPolygon],
    gts: &[CartesianPolygon],
    iou_threshold: f64,
    grid: usize,
) -> Result<MatchReport> {
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "IoU threshold must lie in (0, 1), got {iou_threshold}"
        )));
    }
    if grid < MIN_GRID {
        return Err(Error::InvalidConfig(format!("grid must be >= {MIN_GRID}, got {grid}")));
    }
    if preds.is_empty() || gts.is_empty() {
        return Ok(MatchReport {
            assignments: Vec::new(),
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            iou_threshold,
            empty: true,
        });
    }
    let matrix = IoUMatrix::from_polygons(preds, gts, grid)?;
    let assignments: Vec<Assignment> = hungarian_assign(&matrix)
        .into_iter()
        .map(|(pred, gt)| Assignment {
            pred,
            gt,
            iou: matrix.get(pred, gt),
        })
        .filter(|a| a.iou >= iou_threshold)
        .collect();
    let tp = assignments.len() as f64;
    let precision = tp / preds.len() as f64;
    let recall = tp / gts.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MatchReport {
        assignments,
        precision,
        recall,
        f1,
        iou_threshold,
        empty: false,
    })
}
