//! Coloured RST, normalised traces on circles and competition interfaces.
//!
//! Every subtree rooted at a child of the origin gets its own colour, and
//! each edge `[X, A(X)]` carries the colour of `X`. On the circle `S(O, r)`
//! the coloured crossings form contiguous monochromatic arcs; the interface
//! angle `θ_r(i, j)` bisects the empty arc running counterclockwise from the
//! last crossing of colour `i` to the next crossing, of colour `j`.

use std::f64::consts::TAU;
use std::fmt;

use log::warn;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{ccw_gap, ccw_midpoint, for_each_edge_crossing};
use crate::paths::{SurvivorConfig, Survivors};
use crate::ppp::ORIGIN;
use crate::tree::Tree;
use crate::{Error, Result};

/// Colour label, starting at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u8);

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    /// Colour 1 is the first child met counterclockwise from angle 0.
    Trigonometric,
    /// Colours rank independent uniform marks attached to the children.
    Random,
}

impl std::str::FromStr for LabelScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trig" | "trigonometric" => Ok(LabelScheme::Trigonometric),
            "random" => Ok(LabelScheme::Random),
            other => Err(Error::param(format!("unknown labeling scheme {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coloring {
    pub scheme: LabelScheme,
    /// `None` for the origin.
    color_of: Vec<Option<Color>>,
    /// `child_of_color[c - 1]` is the child of `O` painted `c`.
    child_of_color: Vec<usize>,
}

impl Coloring {
    #[inline]
    pub fn color_of(&self, x: usize) -> Option<Color> {
        self.color_of[x]
    }

    pub fn child_of_color(&self, c: Color) -> usize {
        self.child_of_color[c.0 as usize - 1]
    }

    /// Number of colours, i.e. of children of the origin.
    pub fn num_colors(&self) -> usize {
        self.child_of_color.len()
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> {
        (1..=self.child_of_color.len() as u8).map(Color)
    }
}

/// Paints every subtree rooted at a child of the origin.
///
/// `seed` only matters for [`LabelScheme::Random`].
pub fn color_subtrees(t: &Tree<'_>, scheme: LabelScheme, seed: u64) -> Result<Coloring> {
    // children of O are stored in trigonometric order from angle 0
    let children = t.children_of_origin();
    if children.is_empty() {
        return Err(Error::NoChildren);
    }
    let child_of_color: Vec<usize> = match scheme {
        LabelScheme::Trigonometric => children.to_vec(),
        LabelScheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut marked: Vec<(f64, usize)> =
                children.iter().map(|&c| (rng.random::<f64>(), c)).collect();
            marked.sort_by(|a, b| a.0.total_cmp(&b.0));
            marked.into_iter().map(|(_, c)| c).collect()
        }
    };
    let mut color_of = vec![None; t.len()];
    for (k, &c) in child_of_color.iter().enumerate() {
        color_of[c] = Some(Color(k as u8 + 1));
    }
    for &x in t.norm_order() {
        if x != ORIGIN && color_of[x].is_none() {
            color_of[x] = color_of[t.ancestor(x)];
        }
    }
    Ok(Coloring {
        scheme,
        color_of,
        child_of_color,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// In `[0, 2π)`.
    pub angle: f64,
    pub color: Color,
}

/// Coloured crossings of `S(O, r)` by the tree edges, sorted by angle.
pub fn trace_at(t: &Tree<'_>, col: &Coloring, r: f64) -> Vec<TracePoint> {
    let pts = t.point_set().points();
    let mut out = Vec::new();
    for x in 1..pts.len() {
        let color = col.color_of(x).expect("non-origin points are coloured");
        for_each_edge_crossing(pts[x], pts[t.ancestor(x)], r, |p| {
            out.push(TracePoint {
                angle: p.arg(),
                color,
            });
        });
    }
    out.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    out
}

/// Outcome of an interface-angle query on one trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaR {
    Defined(f64),
    /// No crossing of colour `i` is immediately followed by one of colour `j`.
    Undefined,
    /// Several such pairs exist; only possible under numerical degeneracy.
    Ambiguous,
}

impl ThetaR {
    pub fn angle(self) -> Option<f64> {
        match self {
            ThetaR::Defined(a) => Some(a),
            _ => None,
        }
    }
}

/// Interface angle between colours `i` and `j` on a trace sorted by angle.
pub fn theta_r(trace: &[TracePoint], i: Color, j: Color) -> ThetaR {
    let n = trace.len();
    if n < 2 || i == j {
        return ThetaR::Undefined;
    }
    let mut found = None;
    for k in 0..n {
        let (p, q) = (trace[k], trace[(k + 1) % n]);
        if p.color == i && q.color == j {
            if found.is_some() {
                warn!("colours {i} and {j} are adjacent more than once on one circle");
                return ThetaR::Ambiguous;
            }
            found = Some(ccw_midpoint(p.angle, q.angle));
        }
    }
    found.map_or(ThetaR::Undefined, ThetaR::Defined)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSample {
    pub r: f64,
    pub theta: Option<f64>,
}

impl InterfaceSample {
    pub fn defined(&self) -> bool {
        self.theta.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTrace {
    pub color_pair: (Color, Color),
    pub samples: Vec<InterfaceSample>,
    /// Smallest grid radius where the interface is defined.
    pub birth: Option<f64>,
    /// Largest grid radius where the interface is defined.
    pub death: Option<f64>,
}

impl InterfaceTrace {
    /// Interface angle at the largest grid radius where it is defined.
    pub fn direction(&self) -> Option<f64> {
        self.samples.iter().rev().find_map(|s| s.theta)
    }
}

/// Samples `θ_r(i, j)` along a strictly increasing radius grid.
pub fn trace_interface(
    t: &Tree<'_>,
    col: &Coloring,
    i: Color,
    j: Color,
    r_grid: &[f64],
) -> Result<InterfaceTrace> {
    if r_grid.iter().any(|&r| !(r > 0.0)) || r_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(
            "radius grid must be positive and strictly increasing",
        ));
    }
    let samples: Vec<InterfaceSample> = r_grid
        .iter()
        .map(|&r| InterfaceSample {
            r,
            theta: theta_r(&trace_at(t, col, r), i, j).angle(),
        })
        .collect();
    let birth = samples.iter().find(|s| s.defined()).map(|s| s.r);
    let death = samples.iter().rev().find(|s| s.defined()).map(|s| s.r);
    Ok(InterfaceTrace {
        color_pair: (i, j),
        samples,
        birth,
        death,
    })
}

/// Colours whose subtree reaches beyond the cut radius.
pub fn surviving_colors(s: &Survivors<'_, '_>, col: &Coloring) -> Vec<Color> {
    col.colors()
        .filter(|&c| s.contains(col.child_of_color(c)))
        .collect()
}

/// Number of colours whose subtree reaches beyond `cfg.cut_radius`.
pub fn unbounded_count(t: &Tree<'_>, col: &Coloring, cfg: SurvivorConfig) -> Result<usize> {
    let s = Survivors::new(t, cfg)?;
    Ok(surviving_colors(&s, col).len())
}

/// Angular extent of one surviving colour between its two interfaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub color: Color,
    /// Width of the sector; all widths sum to 2π.
    pub phi: f64,
    /// Interface with the previous surviving colour (clockwise side).
    pub start: f64,
    /// Interface with the next surviving colour (counterclockwise side).
    pub end: f64,
}

/// Sectors of the surviving colours at radius `r`, in counterclockwise order
/// starting from the sector whose opening interface has the smallest angle.
///
/// Crossings of non-surviving colours are ignored, so adjacent surviving
/// colours always share an interface. The last width is taken as the
/// complement of the others so the total is exactly 2π.
pub fn sectors_at(s: &Survivors<'_, '_>, col: &Coloring, r: f64) -> Result<Vec<Sector>> {
    let alive = surviving_colors(s, col);
    if alive.len() < 2 {
        return Err(Error::TooFewColors(alive.len(), r));
    }
    let trace: Vec<TracePoint> = trace_at(s.tree(), col, r)
        .into_iter()
        .filter(|p| alive.contains(&p.color))
        .collect();
    let n = trace.len();
    // (angle of interface, colour after it)
    let mut interfaces: Vec<(f64, Color)> = (0..n)
        .filter_map(|k| {
            let (p, q) = (trace[(k + n - 1) % n], trace[k]);
            (p.color != q.color).then(|| (ccw_midpoint(p.angle, q.angle), q.color))
        })
        .collect();
    let mut seen: Vec<Color> = interfaces.iter().map(|&(_, c)| c).collect();
    seen.sort();
    seen.dedup();
    if interfaces.len() != alive.len() || seen.len() != alive.len() {
        return Err(Error::DegenerateTrace(r));
    }
    interfaces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = interfaces.len();
    let mut sectors: Vec<Sector> = (0..m)
        .map(|k| {
            let (start, color) = interfaces[k];
            let end = interfaces[(k + 1) % m].0;
            Sector {
                color,
                phi: ccw_gap(start, end),
                start,
                end,
            }
        })
        .collect();
    let head: f64 = sectors[..m - 1].iter().map(|s| s.phi).sum();
    sectors[m - 1].phi = TAU - head;
    Ok(sectors)
}

/// Sector widths `(colour, φ)` of the surviving colours at radius `r`.
pub fn sector_angles(
    t: &Tree<'_>,
    col: &Coloring,
    cfg: SurvivorConfig,
    r: f64,
) -> Result<Vec<(Color, f64)>> {
    let s = Survivors::new(t, cfg)?;
    Ok(sectors_at(&s, col, r)?
        .into_iter()
        .map(|s| (s.color, s.phi))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::ppp::PointSet;
    use crate::tree::build_rst_indexed;

    fn tp(angle: f64, c: u8) -> TracePoint {
        TracePoint {
            angle,
            color: Color(c),
        }
    }

    #[test]
    fn theta_midpoint_and_seam() {
        assert_eq!(
            theta_r(&[tp(0.0, 1), tp(1.0, 2)], Color(1), Color(2)),
            ThetaR::Defined(0.5)
        );
        let th = theta_r(&[tp(0.2, 2), tp(6.0, 1)], Color(1), Color(2))
            .angle()
            .unwrap();
        assert!((th - (3.1 + std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn theta_needs_empty_arc() {
        let tr = [tp(0.0, 1), tp(1.0, 3), tp(2.0, 2)];
        assert_eq!(theta_r(&tr, Color(1), Color(2)), ThetaR::Undefined);
        assert_eq!(theta_r(&tr, Color(4), Color(2)), ThetaR::Undefined);
    }

    #[test]
    fn theta_flags_repeated_adjacency() {
        let tr = [tp(0.0, 1), tp(1.0, 2), tp(2.0, 1), tp(3.0, 2)];
        assert_eq!(theta_r(&tr, Color(1), Color(2)), ThetaR::Ambiguous);
    }

    fn two_children() -> PointSet {
        let pts = [
            Point::polar(1.0, 0.1),
            Point::polar(2.0, 0.1 + 1e-3),
            Point::polar(1.1, 3.0),
            Point::polar(2.1, 3.0 - 1e-3),
        ];
        PointSet::new(pts, 2.5).unwrap()
    }

    #[test]
    fn trig_colors_follow_angle() {
        let p = two_children();
        let t = build_rst_indexed(&p);
        let col = color_subtrees(&t, LabelScheme::Trigonometric, 0).unwrap();
        assert_eq!(col.color_of(1), Some(Color(1)));
        assert_eq!(col.color_of(2), Some(Color(1)));
        assert_eq!(col.color_of(3), Some(Color(2)));
        assert_eq!(col.color_of(4), Some(Color(2)));
        assert_eq!(col.color_of(ORIGIN), None);
    }

    #[test]
    fn no_children_is_an_error() {
        let p = PointSet::new([], 1.0).unwrap();
        let t = build_rst_indexed(&p);
        assert!(matches!(
            color_subtrees(&t, LabelScheme::Random, 1),
            Err(Error::NoChildren)
        ));
    }

    #[test]
    fn trace_beyond_tree_is_empty() {
        let p = two_children();
        let t = build_rst_indexed(&p);
        let col = color_subtrees(&t, LabelScheme::Trigonometric, 0).unwrap();
        assert!(trace_at(&t, &col, 5.0).is_empty());
        let tr = trace_at(&t, &col, 1.5);
        assert_eq!(tr.len(), 2);
        assert_eq!(tr[0].color, Color(1));
    }
}
