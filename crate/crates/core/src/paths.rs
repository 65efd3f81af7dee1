//! Finite-window proxies for semi-infinite paths.
//!
//! A vertex *survives* when its subtree reaches beyond `cut_radius`. Edges
//! `[X, A(X)]` with `X` surviving stand in for edges of semi-infinite paths.
//! Statistics are only read at radii up to `analysis_radius`, leaving a
//! buffer before the cut.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::geometry::{angular_distance, for_each_edge_crossing, signed_angle, Point};
use crate::grid::SpatialGrid;
use crate::ppp::{PointSet, ORIGIN};
use crate::tree::{grid_for, DsfQuery, Tree};
use crate::{Error, Result};

pub const DEFAULT_CUT_FRACTION: f64 = 0.8;
pub const DEFAULT_ANALYSIS_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivorConfig {
    pub cut_radius: f64,
    pub analysis_radius: f64,
}

impl SurvivorConfig {
    pub fn new(cut_radius: f64, analysis_radius: f64) -> Result<Self> {
        if !(analysis_radius > 0.0 && analysis_radius <= cut_radius && cut_radius.is_finite()) {
            return Err(Error::param(format!(
                "need 0 < analysis_radius ({analysis_radius}) <= cut_radius ({cut_radius})"
            )));
        }
        Ok(SurvivorConfig {
            cut_radius,
            analysis_radius,
        })
    }

    /// Radii as fractions of the window radius.
    pub fn from_fractions(
        window_radius: f64,
        cut_fraction: f64,
        analysis_fraction: f64,
    ) -> Result<Self> {
        if !(cut_fraction <= 1.0) {
            return Err(Error::param(format!(
                "cut fraction {cut_fraction} exceeds 1"
            )));
        }
        Self::new(
            cut_fraction * window_radius,
            analysis_fraction * window_radius,
        )
    }

    pub fn default_for(window_radius: f64) -> Self {
        Self::from_fractions(
            window_radius,
            DEFAULT_CUT_FRACTION,
            DEFAULT_ANALYSIS_FRACTION,
        )
        .expect("default fractions are consistent")
    }

    fn check_window(&self, ps: &PointSet) -> Result<()> {
        if self.cut_radius > ps.window_radius() {
            return Err(Error::param(format!(
                "cut radius {} exceeds the window radius {}",
                self.cut_radius,
                ps.window_radius()
            )));
        }
        Ok(())
    }

    /// Same cut radius, different analysis radius.
    pub fn with_analysis_radius(self, analysis_radius: f64) -> Result<Self> {
        Self::new(self.cut_radius, analysis_radius)
    }
}

/// Ordered vertices from an anchor outward; each is a child of the previous.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathProxy {
    pub vertices: Vec<usize>,
}

impl PathProxy {
    pub fn anchor(&self) -> usize {
        self.vertices[0]
    }

    pub fn terminal(&self) -> usize {
        *self.vertices.last().expect("paths are never empty")
    }

    /// Argument of the last vertex.
    pub fn terminal_direction(&self, t: &Tree<'_>) -> f64 {
        t.point(self.terminal()).arg()
    }

    /// Consecutive vertices are ancestor/child and norms strictly increase.
    pub fn is_consistent(&self, t: &Tree<'_>) -> bool {
        !self.vertices.is_empty()
            && self.vertices.windows(2).all(|w| {
                t.ancestor(w[1]) == w[0] && t.point(w[0]).norm_sq() < t.point(w[1]).norm_sq()
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Largest oriented angle at every step.
    Rightmost,
    /// Smallest oriented angle at every step.
    Leftmost,
}

/// A tree together with its surviving set for one [`SurvivorConfig`].
pub struct Survivors<'t, 'p> {
    tree: &'t Tree<'p>,
    cfg: SurvivorConfig,
    reach: Vec<f64>,
    alive: Vec<bool>,
}

impl<'t, 'p> Survivors<'t, 'p> {
    pub fn new(tree: &'t Tree<'p>, cfg: SurvivorConfig) -> Result<Self> {
        cfg.check_window(tree.point_set())?;
        let mut reach: Vec<f64> = tree.point_set().points().iter().map(|p| p.norm()).collect();
        for &x in tree.norm_order().iter().rev() {
            if x != ORIGIN {
                let a = tree.ancestor(x);
                if reach[x] > reach[a] {
                    reach[a] = reach[x];
                }
            }
        }
        let alive = reach.iter().map(|&r| r > cfg.cut_radius).collect();
        Ok(Survivors {
            tree,
            cfg,
            reach,
            alive,
        })
    }

    pub fn tree(&self) -> &'t Tree<'p> {
        self.tree
    }

    pub fn config(&self) -> SurvivorConfig {
        self.cfg
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.alive[x]
    }

    /// Largest norm in the subtree of `x`, `x` included.
    pub fn reach(&self, x: usize) -> f64 {
        self.reach[x]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive.len()).filter(|&i| self.alive[i])
    }

    pub fn len(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn surviving_children(&self, x: usize) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.tree
            .children(x)
            .iter()
            .copied()
            .filter(|&c| self.alive[c])
    }

    fn check_radius(&self, r: f64, min_exclusive: f64) -> Result<()> {
        if !(r > min_exclusive && r <= self.cfg.analysis_radius) {
            return Err(Error::param(format!(
                "radius {r} outside ({min_exclusive}, {}]",
                self.cfg.analysis_radius
            )));
        }
        Ok(())
    }

    fn count_crossings(&self, r: f64, keep: impl Fn(Point) -> bool) -> usize {
        let pts = self.tree.point_set().points();
        let mut n = 0;
        for x in 1..pts.len() {
            if !self.alive[x] {
                continue;
            }
            for_each_edge_crossing(pts[x], pts[self.tree.ancestor(x)], r, |p| {
                if keep(p) {
                    n += 1;
                }
            });
        }
        n
    }

    /// Crossings of `S(O, r)` by surviving edges.
    pub fn chi(&self, r: f64) -> Result<usize> {
        self.check_radius(r, 0.0)?;
        Ok(self.count_crossings(r, |_| true))
    }

    /// Crossings of the arc `{r e^{iθ} : |θ| <= 1/r}` (length 2) by surviving edges.
    pub fn chi_tilde(&self, r: f64) -> Result<usize> {
        self.check_radius(r, FRAC_2_PI)?;
        let half = 1.0 / r;
        Ok(self.count_crossings(r, |p| p.y.atan2(p.x).abs() <= half))
    }

    /// Extreme surviving path from `x`, picking the surviving child of
    /// largest (`Rightmost`) or smallest (`Leftmost`) oriented angle until
    /// none is left.
    pub fn extreme_path(&self, x: usize, side: Side) -> Result<PathProxy> {
        if !self.alive[x] {
            return Err(Error::NotSurviving(x));
        }
        let mut vertices = vec![x];
        let mut cur = x;
        loop {
            let next = match side {
                Side::Rightmost => self.surviving_children(cur).next_back(),
                Side::Leftmost => self.surviving_children(cur).next(),
            };
            match next {
                Some(c) => {
                    vertices.push(c);
                    cur = c;
                }
                None => break,
            }
        }
        Ok(PathProxy { vertices })
    }

    /// Last vertices of the maximal surviving paths from the origin inside
    /// the closed ball of radius `analysis_radius`: surviving vertices in the
    /// ball none of whose surviving children is in the ball.
    pub fn exit_vertices(&self) -> Vec<usize> {
        let pts = self.tree.point_set().points();
        let a2 = self.cfg.analysis_radius * self.cfg.analysis_radius;
        (1..pts.len())
            .filter(|&x| {
                self.alive[x]
                    && pts[x].norm_sq() <= a2
                    && self.surviving_children(x).all(|c| pts[c].norm_sq() > a2)
            })
            .collect()
    }

    fn path_from_origin(&self, terminal: usize) -> PathProxy {
        let mut vertices = self.tree.root_path(terminal);
        vertices.reverse();
        PathProxy { vertices }
    }

    /// Maximal surviving paths from the origin (inside the analysis ball)
    /// whose terminal vertex has argument within `half_width` of `theta`.
    pub fn directional_paths(&self, theta: f64, half_width: f64) -> Result<Vec<PathProxy>> {
        if !(half_width > 0.0 && half_width < PI) {
            return Err(Error::param(format!(
                "half width {half_width} outside (0, π)"
            )));
        }
        let pts = self.tree.point_set().points();
        Ok(self
            .exit_vertices()
            .into_iter()
            .filter(|&x| angular_distance(pts[x].arg(), theta) <= half_width)
            .map(|x| self.path_from_origin(x))
            .collect())
    }

    /// Proxy for the path with direction 0: the maximal surviving path whose
    /// terminal argument is closest to 0, ties going to the larger terminal norm.
    pub fn spine(&self) -> Option<PathProxy> {
        let pts = self.tree.point_set().points();
        self.exit_vertices()
            .into_iter()
            .min_by(|&a, &b| {
                angular_distance(pts[a].arg(), 0.0)
                    .total_cmp(&angular_distance(pts[b].arg(), 0.0))
                    .then(pts[b].norm_sq().total_cmp(&pts[a].norm_sq()))
            })
            .map(|x| self.path_from_origin(x))
    }

    /// Spine vertices of norm `< r` (origin excluded) with at least one
    /// surviving child off the spine.
    pub fn spine_bifurcations(&self, r: f64) -> Result<usize> {
        self.check_radius(r, 0.0)?;
        let Some(spine) = self.spine() else {
            return Ok(0);
        };
        let pts = self.tree.point_set().points();
        let r2 = r * r;
        Ok(spine
            .vertices
            .windows(2)
            .skip(1)
            .filter(|w| {
                pts[w[0]].norm_sq() < r2 && self.surviving_children(w[0]).any(|c| c != w[1])
            })
            .count())
    }

    /// Terminal directions, as signed angles, of the leftmost and rightmost
    /// surviving paths through the first spine vertex beyond radius `r`.
    pub fn direction_interval(&self, r: f64) -> Option<(f64, f64)> {
        let spine = self.spine()?;
        let pts = self.tree.point_set().points();
        let x = spine
            .vertices
            .iter()
            .copied()
            .find(|&v| pts[v].norm() > r)?;
        let lo = self.extreme_path(x, Side::Leftmost).ok()?;
        let hi = self.extreme_path(x, Side::Rightmost).ok()?;
        Some((
            signed_angle(lo.terminal_direction(self.tree)),
            signed_angle(hi.terminal_direction(self.tree)),
        ))
    }
}

/// The surviving set of `t` as a membership mask indexed by point.
pub fn surviving_set(t: &Tree<'_>, cfg: SurvivorConfig) -> Result<Vec<bool>> {
    Ok(Survivors::new(t, cfg)?.alive)
}

pub fn chi(t: &Tree<'_>, r: f64, cfg: SurvivorConfig) -> Result<usize> {
    Survivors::new(t, cfg)?.chi(r)
}

pub fn chi_tilde(t: &Tree<'_>, r: f64, cfg: SurvivorConfig) -> Result<usize> {
    Survivors::new(t, cfg)?.chi_tilde(r)
}

pub fn extreme_path(t: &Tree<'_>, x: usize, side: Side, cfg: SurvivorConfig) -> Result<PathProxy> {
    Survivors::new(t, cfg)?.extreme_path(x, side)
}

pub fn directional_paths(
    t: &Tree<'_>,
    theta: f64,
    half_width: f64,
    cfg: SurvivorConfig,
) -> Result<Vec<PathProxy>> {
    Survivors::new(t, cfg)?.directional_paths(theta, half_width)
}

pub fn spine_bifurcations(t: &Tree<'_>, cfg: SurvivorConfig, r: f64) -> Result<usize> {
    Survivors::new(t, cfg)?.spine_bifurcations(r)
}

fn check_ball(ps: &PointSet, center_abscissa: f64, ball_radius: f64) -> Result<()> {
    if !(ball_radius > 0.0 && center_abscissa.is_finite()) {
        return Err(Error::param(format!("invalid ball radius {ball_radius}")));
    }
    if center_abscissa.abs() + 2.0 * ball_radius > ps.window_radius() {
        return Err(Error::param(format!(
            "ball B(({center_abscissa}, 0), {ball_radius}) needs a margin of {ball_radius} inside the window"
        )));
    }
    Ok(())
}

/// True when every point in `B((center_abscissa, 0), ball_radius)` has the
/// same ancestor in the RST as in the DSF with direction `-e_x`.
pub fn dsf_rst_agreement(ps: &PointSet, center_abscissa: f64, ball_radius: f64) -> Result<bool> {
    check_ball(ps, center_abscissa, ball_radius)?;
    let grid = grid_for(ps);
    let tree = crate::tree::build_rst_with_grid(ps, &grid);
    let dsf = DsfQuery::new(ps, &grid);
    Ok(agreement_in_ball(
        &tree,
        &dsf,
        &grid,
        center_abscissa,
        ball_radius,
    ))
}

/// Several agreement probes on one tree, sharing the DSF index.
pub(crate) struct AgreementProbe<'a> {
    grid: &'a SpatialGrid,
    dsf: DsfQuery<'a>,
}

impl<'a> AgreementProbe<'a> {
    pub(crate) fn new(ps: &'a PointSet, grid: &'a SpatialGrid) -> Self {
        AgreementProbe {
            grid,
            dsf: DsfQuery::new(ps, grid),
        }
    }

    pub(crate) fn agrees(
        &self,
        tree: &Tree<'_>,
        center_abscissa: f64,
        ball_radius: f64,
    ) -> Result<bool> {
        check_ball(tree.point_set(), center_abscissa, ball_radius)?;
        Ok(agreement_in_ball(
            tree,
            &self.dsf,
            self.grid,
            center_abscissa,
            ball_radius,
        ))
    }
}

fn agreement_in_ball(
    tree: &Tree<'_>,
    dsf: &DsfQuery<'_>,
    grid: &SpatialGrid,
    center_abscissa: f64,
    ball_radius: f64,
) -> bool {
    let pts = tree.point_set().points();
    let c = Point::new(center_abscissa, 0.0);
    let r2 = ball_radius * ball_radius;
    let mut inside = Vec::new();
    grid.for_each_in_box(
        Point::new(c.x - ball_radius, -ball_radius),
        Point::new(c.x + ball_radius, ball_radius),
        |i| {
            if pts[i].dist_sq(c) < r2 {
                inside.push(i);
            }
        },
    );
    inside.into_iter().all(|x| {
        let rst = if x == ORIGIN {
            None
        } else {
            Some(tree.ancestor(x))
        };
        rst.is_some() && dsf.ancestor(x) == rst
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::build_rst_indexed;

    fn ps(points: &[(f64, f64)], window: f64) -> PointSet {
        PointSet::new(points.iter().map(|&(x, y)| Point::new(x, y)), window).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SurvivorConfig::new(1.0, 2.0).is_err());
        assert!(SurvivorConfig::new(1.0, 0.0).is_err());
        assert!(SurvivorConfig::from_fractions(10.0, 1.2, 0.5).is_err());
        let p = ps(&[(1.0, 0.0)], 2.0);
        let t = build_rst_indexed(&p);
        assert!(Survivors::new(&t, SurvivorConfig::new(3.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn surviving_set_of_chain() {
        let p = ps(&[(1.0, 0.0), (2.0, 0.0)], 2.0);
        let t = build_rst_indexed(&p);
        let s = surviving_set(&t, SurvivorConfig::new(1.5, 1.0).unwrap()).unwrap();
        assert_eq!(s, vec![true, true, true]);

        let p = ps(&[(1.0, 0.0)], 2.0);
        let t = build_rst_indexed(&p);
        let s = surviving_set(&t, SurvivorConfig::new(1.5, 1.0).unwrap()).unwrap();
        assert_eq!(s, vec![false, false]);
    }

    #[test]
    fn chi_on_a_chain() {
        let p = ps(&[(0.5, 0.0), (1.5, 0.0), (2.5, 0.0)], 3.0);
        let t = build_rst_indexed(&p);
        let cfg = SurvivorConfig::new(2.0, 1.0).unwrap();
        assert_eq!(chi(&t, 1.0, cfg).unwrap(), 1);
        assert!(chi(&t, 3.0, cfg).is_err());
        let wide = SurvivorConfig::new(3.0, 3.0).unwrap();
        assert_eq!(chi(&t, 3.0, wide).unwrap(), 0);
    }

    #[test]
    fn chi_tilde_on_axis_chains() {
        let cfg = SurvivorConfig::new(2.0, 1.0).unwrap();
        let pos = ps(&[(0.5, 0.01), (1.5, 0.0), (2.5, 0.0)], 3.0);
        let t = build_rst_indexed(&pos);
        assert_eq!(chi_tilde(&t, 1.0, cfg).unwrap(), 1);
        let neg = ps(&[(-0.5, 0.01), (-1.5, 0.0), (-2.5, 0.0)], 3.0);
        let t = build_rst_indexed(&neg);
        assert_eq!(chi_tilde(&t, 1.0, cfg).unwrap(), 0);
        assert_eq!(chi(&t, 1.0, cfg).unwrap(), 1);
        assert!(chi_tilde(&t, 0.5, cfg).is_err());
    }

    #[test]
    fn extreme_path_requires_survivor() {
        let p = ps(&[(1.0, 0.0)], 2.0);
        let t = build_rst_indexed(&p);
        let err = extreme_path(
            &t,
            1,
            Side::Rightmost,
            SurvivorConfig::new(1.5, 1.0).unwrap(),
        );
        assert!(matches!(err, Err(Error::NotSurviving(1))));
    }

    #[test]
    fn dsf_agreement_ball_checks() {
        let p = ps(&[(1.0, 0.0), (2.0, 0.5)], 5.0);
        assert!(dsf_rst_agreement(&p, 4.0, 1.0).is_err());
        // at the origin the RST has no ancestor for O while the DSF does
        assert!(!dsf_rst_agreement(&ps(&[(-1.0, 0.3), (2.0, 0.5)], 5.0), 0.0, 1.0).unwrap());
    }
}
