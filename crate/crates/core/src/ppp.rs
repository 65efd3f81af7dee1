//! Palm-version Poisson point processes in a disk, and the deterministic
//! configurations that force one or two children of the origin.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::geometry::Point;
use crate::{Error, Result};

/// Index of the origin in every [`PointSet`].
pub const ORIGIN: usize = 0;

/// A finite planar configuration containing the origin at index [`ORIGIN`].
///
/// Norms are pairwise distinct; every point lies in the
/// closed disk of radius `window_radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    window_radius: f64,
    norm_order: Vec<usize>,
}

impl PointSet {
    /// Builds a point set from the non-origin points; the origin is inserted
    /// at index 0.
    pub fn new(non_origin: impl IntoIterator<Item = Point>, window_radius: f64) -> Result<Self> {
        let mut points = vec![Point::ORIGIN];
        points.extend(non_origin);
        Self::from_points(points, window_radius)
    }

    /// Validates a full point list whose first entry must be the origin.
    pub fn from_points(points: Vec<Point>, window_radius: f64) -> Result<Self> {
        if !(window_radius.is_finite() && window_radius > 0.0) {
            return Err(Error::InvalidPointSet(format!(
                "window radius must be positive and finite, got {window_radius}"
            )));
        }
        if points.first() != Some(&Point::ORIGIN) {
            return Err(Error::InvalidPointSet("the origin must come first".into()));
        }
        let r2 = window_radius * window_radius;
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidPointSet(format!("point {i} is not finite")));
            }
            if p.norm_sq() > r2 {
                return Err(Error::InvalidPointSet(format!(
                    "point {i} ({}, {}) lies outside the window of radius {window_radius}",
                    p.x, p.y
                )));
            }
        }
        if let Some((i, j)) = first_tie(&points, |p| p.norm_sq()) {
            return Err(Error::InvalidPointSet(format!(
                "points {i} and {j} have equal norms"
            )));
        }
        let norm_order = sorted_indices(&points, |p| p.norm_sq());
        Ok(PointSet {
            points,
            window_radius,
            norm_order,
        })
    }

    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Never true: the origin is always present.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    /// Point indices sorted by increasing norm; the origin comes first.
    #[inline]
    pub fn norm_order(&self) -> &[usize] {
        &self.norm_order
    }
}

fn sorted_indices(points: &[Point], key: impl Fn(&Point) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_unstable_by(|&a, &b| key(&points[a]).total_cmp(&key(&points[b])).then(a.cmp(&b)));
    idx
}

/// First pair `(i, j)`, `i < j`, whose keys compare equal.
fn first_tie(points: &[Point], key: impl Fn(&Point) -> f64 + Copy) -> Option<(usize, usize)> {
    let idx = sorted_indices(points, key);
    idx.windows(2)
        .filter(|w| key(&points[w[0]]) == key(&points[w[1]]))
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .min_by_key(|&(_, j)| j)
}

fn uniform_in_disk(rng: &mut impl Rng, radius: f64) -> Point {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Point::polar(radius * u.sqrt(), TAU * v)
}

/// Samples a homogeneous Poisson process of the given intensity in the disk
/// `B(O, window_radius)` and adds the origin.
///
/// Points tying with an earlier point in norm or abscissa (including the
/// origin) are redrawn, so the result always satisfies the [`PointSet`]
/// invariants. The output is a pure function of the three arguments.
pub fn sample_palm_ppp(intensity: f64, window_radius: f64, seed: u64) -> Result<PointSet> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::param(format!(
            "intensity must be positive, got {intensity}"
        )));
    }
    if !(window_radius.is_finite() && window_radius > 0.0) {
        return Err(Error::param(format!(
            "window radius must be positive, got {window_radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = intensity * PI * window_radius * window_radius;
    let count = Poisson::new(mean)
        .map_err(|e| Error::param(format!("Poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;

    let mut points = Vec::with_capacity(count + 1);
    points.push(Point::ORIGIN);
    points.extend((0..count).map(|_| uniform_in_disk(&mut rng, window_radius)));

    loop {
        let tie = first_tie(&points, |p| p.norm_sq()).or_else(|| first_tie(&points, |p| p.x));
        match tie {
            Some((_, j)) => points[j] = uniform_in_disk(&mut rng, window_radius),
            None => break,
        }
    }
    PointSet::from_points(points, window_radius)
}

/// Modulus ratio between consecutive points of the single-child configuration.
pub const M1_GROWTH: f64 = 1.9;

/// Centres `z_1..z_6` of the single-child configuration: `|z_1| = 1`,
/// `|z_k| = 1.9 |z_{k-1}|`, `arg z_k = kπ/3`.
pub fn m1_centers() -> [Point; 6] {
    let mut out = [Point::ORIGIN; 6];
    let mut modulus = 1.0;
    for (k, z) in out.iter_mut().enumerate() {
        *z = Point::polar(modulus, (k + 1) as f64 * FRAC_PI_3);
        modulus *= M1_GROWTH;
    }
    out
}

/// Six points on a spiral around the origin such that only the first one is a
/// child of the origin in the RST.
///
/// `epsilon` is the radius of the balls around the centres. It is rejected when
/// the balls would overlap (`|z_k| - ε <= |z_{k-1}| + ε`) or when a point
/// perturbed within its ball could attach to the origin
/// (`|z_k - z_{k-1}| + 2ε >= |z_k| - ε`). Points are placed at the centres.
pub fn make_m1_config(epsilon: f64) -> Result<PointSet> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let z = m1_centers();
    for k in 1..z.len() {
        let (prev, cur) = (z[k - 1], z[k]);
        if cur.norm() - epsilon <= prev.norm() + epsilon {
            return Err(Error::param(format!(
                "epsilon {epsilon} makes balls {k} and {} overlap",
                k + 1
            )));
        }
        if cur.dist(prev) + 2.0 * epsilon >= cur.norm() - epsilon {
            return Err(Error::param(format!(
                "epsilon {epsilon} too large: point {} could attach to the origin",
                k + 1
            )));
        }
    }
    let window = z[5].norm() + epsilon;
    PointSet::new(z, window)
}

/// Default angular step of the two-cardioid configuration.
pub const M2_DEFAULT_ANGLE_STEP: f64 = PI / 64.0;

/// Default ball radius of the two-cardioid configuration, as a fraction of `min(r1, r2)`.
pub const M2_DEFAULT_EPSILON_FRACTION: f64 = 0.02;

/// Two-children configuration: points along the cardioids
/// `ρ(θ) = ±s (1 + cos θ)`, `s = min(r1, r2)`, at `θ_j = j · angle_step < π`,
/// plus a chain of spacing `2ε` on the axis joining radius `min(r1, r2)` to
/// `max(r1, r2)` (positive abscissas when `r1 < r2`, negative otherwise).
///
/// The two cardioid branches have equal norms at equal `θ_j`; points of the
/// second branch are therefore moved radially inward by `ε/4`, which keeps
/// them inside their balls and makes every norm distinct. Any other exact
/// tie is broken the same way.
pub fn make_m2_config(r1: f64, r2: f64, epsilon: f64, angle_step: f64) -> Result<PointSet> {
    for (name, v) in [
        ("r1", r1),
        ("r2", r2),
        ("epsilon", epsilon),
        ("angle_step", angle_step),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(format!("{name} must be positive, got {v}")));
        }
    }
    let s = r1.min(r2);
    if angle_step > PI / 8.0 {
        return Err(Error::param(format!(
            "angle step {angle_step} is too coarse (max π/8)"
        )));
    }
    if epsilon > 0.05 * s {
        return Err(Error::param(format!(
            "epsilon {epsilon} too large relative to min(r1, r2) = {s} (max 0.05·min)"
        )));
    }
    if epsilon >= s * angle_step {
        return Err(Error::param(format!(
            "epsilon {epsilon} must be smaller than the cardioid spacing scale {}",
            s * angle_step
        )));
    }

    let mut points = Vec::new();
    let mut j = 0usize;
    loop {
        let theta = j as f64 * angle_step;
        if theta >= PI {
            break;
        }
        let rho = s * (1.0 + theta.cos());
        points.push(Point::polar(rho, theta));
        points.push(Point::polar(rho - epsilon / 4.0, theta + PI));
        j += 1;
    }

    let cardioid_len = points.len();
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let direction = if r1 < r2 { 1.0 } else { -1.0 };
    if hi > lo {
        let steps = ((hi - lo) / (2.0 * epsilon)).floor() as usize;
        for n in 0..=steps {
            points.push(Point::new(direction * (lo + 2.0 * n as f64 * epsilon), 0.0));
        }
    }

    // break any remaining exact ties inside the balls, keeping the axis chain fixed
    let mut all = vec![Point::ORIGIN];
    all.extend(points);
    for _ in 0..all.len() {
        match first_tie(&all, |p| p.norm_sq()) {
            Some((i, j)) => {
                let j = if j > cardioid_len { i } else { j };
                let p = all[j];
                let n = p.norm();
                all[j] = p * ((n - epsilon / 4.0) / n) + Point::new(0.0, epsilon / 8.0);
            }
            None => break,
        }
    }

    let window = all.iter().map(|p| p.norm()).fold(0.0, f64::max);
    PointSet::from_points(all, window)
}
