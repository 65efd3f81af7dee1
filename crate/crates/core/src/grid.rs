//! Uniform bucket grid over a square window, stored in compressed-row form.

use crate::geometry::Point;

/// Relative slack applied to ring lower bounds so that floating-point cell
/// assignment near a cell border can never hide a closer point.
const RING_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpatialGrid {
    min_x: f64,
    min_y: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    /// `starts[c]..starts[c + 1]` indexes `items` for cell `c`.
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SpatialGrid {
    /// Buckets `points` into square cells of side `cell` covering `[-half_width, half_width]^2`.
    pub fn new(points: &[Point], half_width: f64, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell side must be positive");
        let half_width = half_width.max(cell);
        let n_side = ((2.0 * half_width / cell).ceil() as usize).clamp(1, 1 << 15);
        let cell = 2.0 * half_width / n_side as f64;
        let mut grid = SpatialGrid {
            min_x: -half_width,
            min_y: -half_width,
            cell,
            nx: n_side,
            ny: n_side,
            starts: vec![0; n_side * n_side + 1],
            items: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|&p| grid.cell_index(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..grid.nx * grid.ny {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    #[inline]
    pub fn cell_side(&self) -> f64 {
        self.cell
    }

    #[inline]
    fn coord(&self, v: f64, min: f64, n: usize) -> usize {
        let c = ((v - min) / self.cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(n - 1)
        }
    }

    #[inline]
    pub fn cell_coords(&self, p: Point) -> (usize, usize) {
        (
            self.coord(p.x, self.min_x, self.nx),
            self.coord(p.y, self.min_y, self.ny),
        )
    }

    #[inline]
    fn cell_index(&self, p: Point) -> usize {
        let (i, j) = self.cell_coords(p);
        j * self.nx + i
    }

    #[inline]
    fn bucket(&self, i: usize, j: usize) -> &[u32] {
        let c = j * self.nx + i;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Visits every item whose cell intersects the axis-aligned box `[lo, hi]`.
    pub fn for_each_in_box(&self, lo: Point, hi: Point, mut f: impl FnMut(usize)) {
        let (i0, j0) = self.cell_coords(lo);
        let (i1, j1) = self.cell_coords(hi);
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &k in self.bucket(i, j) {
                    f(k as usize);
                }
            }
        }
    }

    /// Visits the buckets of the cells at Chebyshev distance exactly `k` from `(ci, cj)`.
    fn for_each_in_ring(&self, ci: usize, cj: usize, k: usize, mut f: impl FnMut(usize)) {
        let (ci, cj, k) = (ci as isize, cj as isize, k as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let mut visit = |i: isize, j: isize| {
            if i >= 0 && j >= 0 && i < nx && j < ny {
                for &idx in self.bucket(i as usize, j as usize) {
                    f(idx as usize);
                }
            }
        };
        if k == 0 {
            visit(ci, cj);
            return;
        }
        for i in ci - k..=ci + k {
            visit(i, cj - k);
            visit(i, cj + k);
        }
        for j in cj - k + 1..=cj + k - 1 {
            visit(ci - k, j);
            visit(ci + k, j);
        }
    }

    /// Nearest admissible item to `center` by squared Euclidean distance.
    ///
    /// Equal distances are resolved by the smaller `rank`. Rings are scanned
    /// outward until no unscanned cell can hold a point at distance not larger
    /// than the current best, so the result equals an exhaustive scan.
    pub fn nearest(
        &self,
        points: &[Point],
        center: Point,
        admissible: impl Fn(usize) -> bool,
        rank: impl Fn(usize) -> usize,
    ) -> Option<usize> {
        let (ci, cj) = self.cell_coords(center);
        let max_ring = self.nx.max(self.ny);
        let mut best: Option<(f64, usize, usize)> = None;
        for k in 0..=max_ring {
            self.for_each_in_ring(ci, cj, k, |idx| {
                if !admissible(idx) {
                    return;
                }
                let d = points[idx].dist_sq(center);
                let r = rank(idx);
                let better = match best {
                    None => true,
                    Some((bd, br, _)) => d < bd || (d == bd && r < br),
                };
                if better {
                    best = Some((d, r, idx));
                }
            });
            if let Some((bd, _, _)) = best {
                // anything outside rings 0..=k is at least k cells away
                let bound = k as f64 * self.cell * (1.0 - RING_SLACK);
                if bd < bound * bound {
                    break;
                }
            }
        }
        best.map(|(_, _, idx)| idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_matches_scan() {
        let pts: Vec<Point> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.731;
                Point::new(9.0 * (t * 1.3).sin(), 9.0 * (t * 0.7).cos())
            })
            .collect();
        let grid = SpatialGrid::new(&pts, 10.0, 1.0);
        for q in [
            Point::new(0.1, 0.2),
            Point::new(-9.5, 9.5),
            Point::new(3.3, -7.0),
        ] {
            let got = grid.nearest(&pts, q, |_| true, |i| i).unwrap();
            let want = (0..pts.len())
                .min_by(|&a, &b| {
                    pts[a]
                        .dist_sq(q)
                        .total_cmp(&pts[b].dist_sq(q))
                        .then(a.cmp(&b))
                })
                .unwrap();
            assert_eq!(got, want);
        }
        assert_eq!(grid.nearest(&pts, Point::ORIGIN, |_| false, |i| i), None);
    }

    #[test]
    fn box_query_covers_items() {
        let pts = vec![
            Point::new(0.5, 0.5),
            Point::new(-3.0, 2.0),
            Point::new(4.9, -4.9),
        ];
        let grid = SpatialGrid::new(&pts, 5.0, 1.0);
        let mut seen = Vec::new();
        grid.for_each_in_box(Point::new(-5.0, -5.0), Point::new(5.0, 5.0), |i| {
            seen.push(i)
        });
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }
}
