//! Radial spanning tree and directed spanning forest construction, plus the
//! checks for the defining emptiness property and for non-crossing edges.
//!
//! In the RST the ancestor of `X != O` is the point closest to `X` among those
//! of strictly smaller norm; equivalently no point lies in
//! `B(O, |X|) ∩ B(X, |X - A(X)|)`. In the DSF with direction `-e_x` the ancestor
//! is the closest point among those of strictly smaller abscissa.
//!
//! Equal candidate distances are resolved by the smaller position in the norm
//! order (RST) or abscissa order (DSF).

use crate::geometry::{normalize_angle, open_segments_cross, Point};
use crate::grid::SpatialGrid;
use crate::ppp::{PointSet, ORIGIN};
use crate::{Error, Result};

/// Grid cell side for a point set of the given intensity.
fn cell_side(intensity: f64) -> f64 {
    1.0 / intensity.sqrt()
}

/// Empirical intensity estimate used to size the grid.
fn estimated_intensity(ps: &PointSet) -> f64 {
    let r = ps.window_radius();
    (ps.len() as f64 / (std::f64::consts::PI * r * r)).max(1e-12)
}

pub(crate) fn grid_for(ps: &PointSet) -> SpatialGrid {
    SpatialGrid::new(
        ps.points(),
        ps.window_radius(),
        cell_side(estimated_intensity(ps)),
    )
}

/// Children adjacency in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
struct Adjacency {
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl Adjacency {
    fn from_parents(n: usize, parent: impl Fn(usize) -> Option<usize>) -> Self {
        let mut starts = vec![0usize; n + 1];
        for i in 0..n {
            if let Some(p) = parent(i) {
                starts[p + 1] += 1;
            }
        }
        for i in 0..n {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut items = vec![0usize; starts[n]];
        for i in 0..n {
            if let Some(p) = parent(i) {
                items[fill[p]] = i;
                fill[p] += 1;
            }
        }
        Adjacency { starts, items }
    }

    #[inline]
    fn get(&self, i: usize) -> &[usize] {
        &self.items[self.starts[i]..self.starts[i + 1]]
    }

    fn sort_each(&mut self, mut key: impl FnMut(usize, usize) -> f64) {
        for i in 0..self.starts.len() - 1 {
            let (a, b) = (self.starts[i], self.starts[i + 1]);
            self.items[a..b].sort_by(|&u, &v| key(i, u).total_cmp(&key(i, v)).then(u.cmp(&v)));
        }
    }
}

/// The radial spanning tree of a [`PointSet`], rooted at the origin.
///
/// `children(x)` lists the children of `x` by increasing oriented angle
/// `∠(A(x), x, child)` measured counterclockwise in `[0, 2π)` from the
/// direction of the ancestor. For the origin the angle is the argument of the
/// child, so the children of `O` are in trigonometric order from angle 0.
#[derive(Clone, Debug)]
pub struct Tree<'p> {
    points: &'p PointSet,
    ancestor: Vec<usize>,
    children: Adjacency,
    rank: Vec<usize>,
}

impl<'p> Tree<'p> {
    /// Assembles a tree from an explicit ancestor map (`ancestor[ORIGIN] == ORIGIN`).
    ///
    /// The map must strictly decrease norms, which rules out cycles. No
    /// emptiness or crossing property is checked here; see
    /// [`verify_rst_property`] and [`check_noncrossing`].
    pub fn from_ancestors(points: &'p PointSet, ancestor: Vec<usize>) -> Result<Self> {
        let n = points.len();
        if ancestor.len() != n {
            return Err(Error::InvalidTree(format!(
                "ancestor map has {} entries for {n} points",
                ancestor.len()
            )));
        }
        if ancestor[ORIGIN] != ORIGIN {
            return Err(Error::InvalidTree(
                "the origin must be its own ancestor".into(),
            ));
        }
        let pts = points.points();
        for (x, &a) in ancestor.iter().enumerate().skip(1) {
            if a >= n {
                return Err(Error::InvalidTree(format!(
                    "ancestor {a} of {x} is out of range"
                )));
            }
            if pts[a].norm_sq() >= pts[x].norm_sq() {
                return Err(Error::InvalidTree(format!(
                    "ancestor {a} of {x} does not have a strictly smaller norm"
                )));
            }
        }
        let mut rank = vec![0usize; n];
        for (r, &i) in points.norm_order().iter().enumerate() {
            rank[i] = r;
        }
        let mut children =
            Adjacency::from_parents(n, |i| if i == ORIGIN { None } else { Some(ancestor[i]) });
        children.sort_each(|x, c| oriented_angle_raw(pts, &ancestor, x, c));
        Ok(Tree {
            points,
            ancestor,
            children,
            rank,
        })
    }

    #[inline]
    pub fn point_set(&self) -> &'p PointSet {
        self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ancestor.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ancestor.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> Point {
        self.points.point(i)
    }

    #[inline]
    pub fn ancestor(&self, i: usize) -> usize {
        self.ancestor[i]
    }

    pub fn ancestors(&self) -> &[usize] {
        &self.ancestor
    }

    #[inline]
    pub fn children(&self, i: usize) -> &[usize] {
        self.children.get(i)
    }

    pub fn children_of_origin(&self) -> &[usize] {
        self.children(ORIGIN)
    }

    #[inline]
    pub fn norm_order(&self) -> &[usize] {
        self.points.norm_order()
    }

    /// Position of `i` in the norm order.
    #[inline]
    pub fn norm_rank(&self, i: usize) -> usize {
        self.rank[i]
    }

    /// `∠(A(x), x, child)` in `[0, 2π)`; the plain argument when `x` is the origin.
    pub fn oriented_angle(&self, x: usize, child: usize) -> f64 {
        oriented_angle_raw(self.points.points(), &self.ancestor, x, child)
    }

    /// Non-origin vertices, i.e. the descendant endpoints of the edges.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.len()).map(move |x| (x, self.ancestor[x]))
    }

    /// Path from `x` back to the origin, `x` first.
    pub fn root_path(&self, mut x: usize) -> Vec<usize> {
        let mut out = vec![x];
        while x != ORIGIN {
            x = self.ancestor[x];
            out.push(x);
        }
        out
    }
}

fn oriented_angle_raw(pts: &[Point], ancestor: &[usize], x: usize, child: usize) -> f64 {
    let base = pts[x];
    let out = (pts[child] - base).arg();
    if x == ORIGIN {
        out
    } else {
        normalize_angle(out - (pts[ancestor[x]] - base).arg())
    }
}

/// Reference O(n²) construction: scans every point of smaller norm.
pub fn build_rst_naive(ps: &PointSet) -> Tree<'_> {
    let pts = ps.points();
    let order = ps.norm_order();
    let mut ancestor = vec![ORIGIN; pts.len()];
    // scanning in norm order makes the first minimum the smallest rank
    for (pos, &x) in order.iter().enumerate().skip(1) {
        let nx = pts[x].norm_sq();
        let mut best = ORIGIN;
        let mut best_d = f64::INFINITY;
        for &y in &order[..pos] {
            if pts[y].norm_sq() >= nx {
                continue;
            }
            let d = pts[y].dist_sq(pts[x]);
            if d < best_d {
                best_d = d;
                best = y;
            }
        }
        ancestor[x] = best;
    }
    Tree::from_ancestors(ps, ancestor).expect("naive construction yields a valid tree")
}

/// Grid-accelerated construction with output identical to [`build_rst_naive`].
///
/// Each point's smaller-norm nearest neighbour is found by an expanding-ring
/// search over a uniform grid with cell side `1/√intensity`.
pub fn build_rst_indexed(ps: &PointSet) -> Tree<'_> {
    let grid = grid_for(ps);
    build_rst_with_grid(ps, &grid)
}

pub(crate) fn build_rst_with_grid<'p>(ps: &'p PointSet, grid: &SpatialGrid) -> Tree<'p> {
    let pts = ps.points();
    let norms: Vec<f64> = pts.iter().map(|p| p.norm_sq()).collect();
    let mut rank = vec![0usize; pts.len()];
    for (r, &i) in ps.norm_order().iter().enumerate() {
        rank[i] = r;
    }
    let mut ancestor = vec![ORIGIN; pts.len()];
    for x in 1..pts.len() {
        let nx = norms[x];
        ancestor[x] = grid
            .nearest(pts, pts[x], |y| norms[y] < nx, |y| rank[y])
            .expect("the origin is always a candidate");
    }
    Tree::from_ancestors(ps, ancestor).expect("indexed construction yields a valid tree")
}

/// Checks the defining emptiness property: for every `X != O`,
/// `|A(X)| < |X|` and no point lies in the open set `B(O, |X|) ∩ B(X, |X - A(X)|)`.
///
/// Uses range queries only, so it does not share code paths with either builder.
pub fn verify_rst_property(t: &Tree<'_>) -> bool {
    first_rst_violation(t).is_none()
}

/// First vertex violating the emptiness property, if any.
pub fn first_rst_violation(t: &Tree<'_>) -> Option<usize> {
    let ps = t.point_set();
    let pts = ps.points();
    let grid = grid_for(ps);
    (1..pts.len()).find(|&x| {
        let p = pts[x];
        let a = t.ancestor(x);
        let nx = p.norm_sq();
        if pts[a].norm_sq() >= nx {
            return true;
        }
        let d2 = p.dist_sq(pts[a]);
        let d = d2.sqrt();
        let mut bad = false;
        grid.for_each_in_box(
            Point::new(p.x - d, p.y - d),
            Point::new(p.x + d, p.y + d),
            |y| {
                if !bad && y != x && pts[y].norm_sq() < nx && pts[y].dist_sq(p) < d2 {
                    bad = true;
                }
            },
        );
        bad
    })
}

/// All pairs of tree edges whose open segments meet, each edge named by its
/// descendant vertex, with `e1 < e2` in each pair, sorted.
///
/// Edges are bucketed by bounding box; each candidate pair is tested once with
/// exact orientation predicates.
pub fn check_noncrossing(t: &Tree<'_>) -> Vec<(usize, usize)> {
    let pts = t.point_set().points();
    let edges: Vec<(usize, Point, Point)> = t.edges().map(|(x, a)| (x, pts[x], pts[a])).collect();
    crossing_pairs(
        &edges,
        t.point_set().window_radius(),
        estimated_intensity(t.point_set()),
    )
}

pub(crate) fn crossing_pairs(
    edges: &[(usize, Point, Point)],
    half_width: f64,
    intensity: f64,
) -> Vec<(usize, usize)> {
    if edges.len() < 2 {
        return Vec::new();
    }
    let cell = cell_side(intensity);
    let n_side = ((2.0 * half_width.max(cell) / cell).ceil() as usize).clamp(1, 1 << 12);
    let cell = 2.0 * half_width.max(cell) / n_side as f64;
    let min = -half_width.max(cell);
    let to_cell = |v: f64| -> usize {
        let c = ((v - min) / cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(n_side - 1)
        }
    };
    let boxes: Vec<[usize; 4]> = edges
        .iter()
        .map(|&(_, a, b)| {
            [
                to_cell(a.x.min(b.x)),
                to_cell(a.y.min(b.y)),
                to_cell(a.x.max(b.x)),
                to_cell(a.y.max(b.y)),
            ]
        })
        .collect();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n_side * n_side];
    for (e, bx) in boxes.iter().enumerate() {
        for j in bx[1]..=bx[3] {
            for i in bx[0]..=bx[2] {
                buckets[j * n_side + i].push(e as u32);
            }
        }
    }
    let mut out = Vec::new();
    for (c, bucket) in buckets.iter().enumerate() {
        let (ci, cj) = (c % n_side, c / n_side);
        for (k, &e) in bucket.iter().enumerate() {
            let be = boxes[e as usize];
            for &f in &bucket[k + 1..] {
                let bf = boxes[f as usize];
                // test each pair only in the lowest cell shared by both boxes
                if ci != be[0].max(bf[0]) || cj != be[1].max(bf[1]) {
                    continue;
                }
                let (ea, a0, a1) = edges[e as usize];
                let (fa, b0, b1) = edges[f as usize];
                if open_segments_cross(a0, a1, b0, b1) {
                    out.push((ea.min(fa), ea.max(fa)));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// The directed spanning forest with direction `-e_x` on a [`PointSet`].
///
/// Roots are the points of smallest abscissa.
#[derive(Clone, Debug)]
pub struct Forest<'p> {
    points: &'p PointSet,
    ancestor: Vec<Option<usize>>,
    children: Adjacency,
}

impl<'p> Forest<'p> {
    pub fn from_ancestors(points: &'p PointSet, ancestor: Vec<Option<usize>>) -> Result<Self> {
        let n = points.len();
        if ancestor.len() != n {
            return Err(Error::InvalidTree(format!(
                "ancestor map has {} entries for {n} points",
                ancestor.len()
            )));
        }
        let pts = points.points();
        for (x, a) in ancestor.iter().enumerate() {
            if let Some(a) = *a {
                if a >= n || pts[a].x >= pts[x].x {
                    return Err(Error::InvalidTree(format!(
                        "ancestor {a} of {x} does not have a strictly smaller abscissa"
                    )));
                }
            }
        }
        let children = Adjacency::from_parents(n, |i| ancestor[i]);
        Ok(Forest {
            points,
            ancestor,
            children,
        })
    }

    #[inline]
    pub fn point_set(&self) -> &'p PointSet {
        self.points
    }

    #[inline]
    pub fn ancestor(&self, i: usize) -> Option<usize> {
        self.ancestor[i]
    }

    pub fn ancestors(&self) -> &[Option<usize>] {
        &self.ancestor
    }

    #[inline]
    pub fn children(&self, i: usize) -> &[usize] {
        self.children.get(i)
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ancestor.len()).filter(|&i| self.ancestor[i].is_none())
    }
}

/// Answers DSF ancestor queries point by point, for callers that only need a
/// few of them.
pub(crate) struct DsfQuery<'a> {
    pts: &'a [Point],
    grid: &'a SpatialGrid,
    rank: Vec<usize>,
}

impl<'a> DsfQuery<'a> {
    pub(crate) fn new(ps: &'a PointSet, grid: &'a SpatialGrid) -> Self {
        let pts = ps.points();
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_unstable_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x));
        let mut rank = vec![0usize; pts.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        DsfQuery { pts, grid, rank }
    }

    pub(crate) fn ancestor(&self, x: usize) -> Option<usize> {
        let px = self.pts[x].x;
        let pts = self.pts;
        self.grid
            .nearest(pts, pts[x], |y| pts[y].x < px, |y| self.rank[y])
    }
}

/// Builds the directed spanning forest with direction `-e_x`.
pub fn build_dsf(ps: &PointSet) -> Forest<'_> {
    let grid = grid_for(ps);
    let q = DsfQuery::new(ps, &grid);
    let ancestor = (0..ps.len()).map(|x| q.ancestor(x)).collect();
    Forest::from_ancestors(ps, ancestor).expect("DSF construction yields a valid forest")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppp::sample_palm_ppp;

    fn ps(points: &[(f64, f64)], window: f64) -> PointSet {
        PointSet::new(points.iter().map(|&(x, y)| Point::new(x, y)), window).unwrap()
    }

    #[test]
    fn collinear_chain() {
        let p = ps(&[(1.0, 0.0), (2.0, 0.0)], 3.0);
        for t in [build_rst_naive(&p), build_rst_indexed(&p)] {
            assert_eq!(t.ancestors(), &[0, 0, 1]);
        }
    }

    #[test]
    fn nearer_of_two_smaller_norm_points() {
        // |(1.2,1.2)-(1,0)| ≈ 1.2166 < |(1.2,1.2)-(0,1.5)| ≈ 1.2369
        let p = ps(&[(1.0, 0.0), (0.0, 1.5), (1.2, 1.2)], 2.0);
        let t = build_rst_naive(&p);
        assert_eq!(t.ancestor(3), 1);
        assert_eq!(build_rst_indexed(&p).ancestors(), t.ancestors());
    }

    #[test]
    fn origin_alone() {
        let p = ps(&[], 1.0);
        let t = build_rst_indexed(&p);
        assert_eq!(t.len(), 1);
        assert!(t.children(ORIGIN).is_empty());
        assert!(verify_rst_property(&t));
        assert!(check_noncrossing(&t).is_empty());
    }

    #[test]
    fn verify_detects_reassigned_ancestor() {
        let p = ps(&[(1.0, 0.0), (0.0, 1.5), (1.2, 1.2)], 2.0);
        let good = build_rst_naive(&p);
        assert!(verify_rst_property(&good));
        let mut anc = good.ancestors().to_vec();
        anc[3] = 2; // farther smaller-norm point
        let bad = Tree::from_ancestors(&p, anc).unwrap();
        assert!(!verify_rst_property(&bad));
        assert_eq!(first_rst_violation(&bad), Some(3));
    }

    #[test]
    fn crossing_pair_detected() {
        let p = ps(&[(2.0, 2.0), (0.0, 1.9), (2.0, 0.0)], 3.0);
        let t = Tree::from_ancestors(&p, vec![0, 0, 0, 2]).unwrap();
        assert_eq!(check_noncrossing(&t), vec![(1, 3)]);
    }

    #[test]
    fn single_edge_never_crosses() {
        let p = ps(&[(1.0, 1.0)], 2.0);
        assert!(check_noncrossing(&build_rst_indexed(&p)).is_empty());
    }

    #[test]
    fn from_ancestors_rejects_norm_increase() {
        let p = ps(&[(1.0, 0.0), (2.0, 0.1)], 3.0);
        assert!(Tree::from_ancestors(&p, vec![0, 2, 0]).is_err());
        assert!(Tree::from_ancestors(&p, vec![1, 0, 1]).is_err());
    }

    #[test]
    fn children_sorted_by_oriented_angle() {
        let p = sample_palm_ppp(1.0, 12.0, 5).unwrap();
        let t = build_rst_indexed(&p);
        for x in 0..t.len() {
            let angles: Vec<f64> = t
                .children(x)
                .iter()
                .map(|&c| t.oriented_angle(x, c))
                .collect();
            assert!(angles.windows(2).all(|w| w[0] <= w[1]));
            for &c in t.children(x) {
                assert_eq!(t.ancestor(c), x);
            }
        }
    }

    #[test]
    fn dsf_small_examples() {
        let p = ps(&[(1.0, 0.0), (1.5, 2.0)], 3.0);
        let f = build_dsf(&p);
        assert_eq!(f.ancestor(0), None);
        assert_eq!(f.ancestor(1), Some(0));
        assert_eq!(f.ancestor(2), Some(1));
        assert_eq!(f.roots().collect::<Vec<_>>(), vec![0]);

        let single = ps(&[], 1.0);
        assert_eq!(build_dsf(&single).roots().collect::<Vec<_>>(), vec![0]);

        let chain = ps(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], 4.0);
        let f = build_dsf(&chain);
        assert_eq!(f.ancestors(), &[None, Some(0), Some(1), Some(2)]);
    }
}
