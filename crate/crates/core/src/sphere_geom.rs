//! Spherical convexity on `S^{d-1}` under the chord metric `||u - v||`.
//!
//! The s-convex hull of a finite set `A` of unit vectors is the radial
//! projection of the Euclidean hull of `A` with the origin removed. It is the
//! set of normalised conical combinations of `A`, so membership reduces to a
//! cone test:
//!
//! * `d = 2` (and any generator set spanning at most a plane): closed circular
//!   arcs in an angle parametrisation;
//! * `d = 3` with full rank: the facet normals of the generated cone;
//! * otherwise: non-negative least squares against the generators.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::rng;

/// Tolerance for cone membership; boundary points count as members.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const ANGLE_EPS: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-12;

/// A point of `S^{d-1}`, or the zero vector (the image of the origin).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitVec(Vec<f64>);

impl UnitVec {
    /// Checks the unit-norm (or zero) invariant.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let n = norm(&components);
        if n == 0.0 || (n - 1.0).abs() <= UNIT_TOL {
            Ok(UnitVec(components))
        } else {
            Err(Error::InvalidInput(format!("not a unit vector (norm {n})")))
        }
    }

    pub fn axis(dimension: usize, index: usize) -> Self {
        let mut v = vec![0.0; dimension];
        v[index] = 1.0;
        UnitVec(v)
    }

    pub fn from_angle(theta: f64) -> Self {
        UnitVec(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn neg(&self) -> Self {
        UnitVec(self.0.iter().map(|x| -x).collect())
    }

    /// Planar angle in `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        normalize_angle(self.0[1].atan2(self.0[0]))
    }
}

impl AsRef<[f64]> for UnitVec {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn chord(u: &[f64], v: &[f64]) -> f64 {
    linalg::dist(u, v)
}

/// Chord length subtending angle `theta`.
pub fn angle_to_chord(theta: f64) -> f64 {
    2.0 * (theta / 2.0).sin()
}

/// Angle subtended by a chord of length `c` in `[0, 2]`.
pub fn chord_to_angle(c: f64) -> f64 {
    2.0 * (c / 2.0).clamp(-1.0, 1.0).asin()
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `x / ||x||`, with the origin mapped to itself.
pub fn hat(x: &[f64]) -> UnitVec {
    let n = norm(x);
    if n == 0.0 {
        return UnitVec(vec![0.0; x.len()]);
    }
    if n.is_finite() {
        return UnitVec(x.iter().map(|c| c / n).collect());
    }
    // overflowed norm: rescale by the largest component first
    let m = x.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if m.is_infinite() {
        let v: Vec<f64> = x
            .iter()
            .map(|c| if c.is_infinite() { c.signum() } else { 0.0 })
            .collect();
        let n = norm(&v);
        return UnitVec(v.into_iter().map(|c| c / n).collect());
    }
    let v: Vec<f64> = x.iter().map(|c| c / m).collect();
    let n = norm(&v);
    UnitVec(v.into_iter().map(|c| c / n).collect())
}

/// Normalised convex combination `I_alpha(u, v)`; zero for `v = -u`, `alpha = 1/2`.
pub fn interpolate(u: &UnitVec, v: &UnitVec, alpha: f64) -> UnitVec {
    if alpha == 0.0 {
        return v.clone();
    }
    if alpha == 1.0 {
        return u.clone();
    }
    let w: Vec<f64> = u
        .0
        .iter()
        .zip(&v.0)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect();
    if norm(&w) <= UNIT_TOL {
        return UnitVec(vec![0.0; u.dim()]);
    }
    hat(&w)
}

/// Open cap `C(u; r) = { x != 0 : ||x^ - u|| < r }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: UnitVec,
    pub radius: f64,
}

impl Cap {
    /// Any `r > 0` is accepted; `r > 2` covers every non-zero vector.
    pub fn new(center: UnitVec, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || center.is_zero() {
            return Err(Error::InvalidInput(format!(
                "cap needs a unit centre and positive radius, got r = {radius}"
            )));
        }
        Ok(Cap { center, radius })
    }

    /// Minimum dot product `x^ . u` for membership, from
    /// `||x^ - u||^2 = 2 - 2 x^ . u`.
    pub fn dot_threshold(&self) -> f64 {
        1.0 - self.radius * self.radius / 2.0
    }
}

pub fn cap_contains(cap: &Cap, x: &[f64]) -> bool {
    let h = hat(x);
    if h.is_zero() {
        return false;
    }
    chord(h.as_slice(), cap.center.as_slice()) < cap.radius
}

// ---------------------------------------------------------------------------
// arcs on the circle

/// Closed counter-clockwise arc from `start` to `end` (angles in `[0, 2 pi)`).
/// `start == end` is a single point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

impl From<[f64; 2]> for Arc {
    fn from(a: [f64; 2]) -> Self {
        Arc {
            start: a[0],
            end: a[1],
        }
    }
}

impl From<Arc> for [f64; 2] {
    fn from(a: Arc) -> Self {
        [a.start, a.end]
    }
}

impl Arc {
    pub fn length(&self) -> f64 {
        (self.end - self.start).rem_euclid(TAU)
    }

    pub fn contains_angle(&self, phi: f64, tol: f64) -> bool {
        let off = (phi - self.start).rem_euclid(TAU);
        off <= self.length() + tol || off >= TAU - tol
    }
}

/// Finite union of closed arcs; the planar form of an s-hull.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcSet {
    pub arcs: Vec<Arc>,
}

impl ArcSet {
    pub fn full_circle() -> Self {
        // two half circles so that every endpoint stays in [0, 2 pi)
        ArcSet {
            arcs: vec![Arc { start: 0.0, end: PI }, Arc { start: PI, end: 0.0 }],
        }
    }

    pub fn is_full_circle(&self) -> bool {
        let total: f64 = self.arcs.iter().map(Arc::length).sum();
        total >= TAU - 1e-9
    }

    pub fn contains_angle(&self, phi: f64, tol: f64) -> bool {
        self.arcs.iter().any(|a| a.contains_angle(phi, tol))
    }

    /// s-hull of points on the circle given by their angles.
    pub fn from_angles(angles: &[f64]) -> Self {
        let mut a: Vec<f64> = angles.iter().map(|&t| normalize_angle(t)).collect();
        a.sort_by(f64::total_cmp);
        a.dedup_by(|x, y| (*x - *y).abs() <= ANGLE_EPS);
        if a.len() > 1 && (a[0] + TAU - a[a.len() - 1]) <= ANGLE_EPS {
            a.pop();
        }
        let k = a.len();
        if k == 1 {
            return ArcSet {
                arcs: vec![Arc { start: a[0], end: a[0] }],
            };
        }
        // gap i runs from a[i] to a[i + 1] (cyclically)
        let gaps: Vec<f64> = (0..k)
            .map(|i| if i + 1 < k { a[i + 1] - a[i] } else { a[0] + TAU - a[k - 1] })
            .collect();
        let (imax, &gmax) = gaps
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        let complement = |i: usize| Arc {
            start: a[(i + 1) % k],
            end: a[i],
        };
        if gmax > PI + ANGLE_EPS {
            ArcSet { arcs: vec![complement(imax)] }
        } else if gmax >= PI - ANGLE_EPS {
            let half: Vec<usize> = (0..k).filter(|&i| gaps[i] >= PI - ANGLE_EPS).collect();
            if half.len() >= 2 {
                // exactly an antipodal pair
                ArcSet {
                    arcs: vec![
                        Arc { start: a[0], end: a[0] },
                        Arc { start: a[1], end: a[1] },
                    ],
                }
            } else {
                ArcSet { arcs: vec![complement(imax)] }
            }
        } else {
            ArcSet::full_circle()
        }
    }

    /// Boundary relative to the circle: arc endpoints, or nothing for the
    /// whole circle.
    pub fn boundary_angles(&self) -> Vec<f64> {
        if self.is_full_circle() {
            return Vec::new();
        }
        let mut out: Vec<f64> = Vec::new();
        for a in &self.arcs {
            for t in [a.start, a.end] {
                if !out.iter().any(|&s| (s - t).abs() <= ANGLE_EPS) {
                    out.push(t);
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// s-hull

/// A two-dimensional linear subspace with an orthonormal basis.
#[derive(Clone, Debug)]
struct Plane {
    b1: Vec<f64>,
    b2: Vec<f64>,
}

impl Plane {
    fn coords(&self, x: &[f64]) -> (f64, f64) {
        (dot(x, &self.b1), dot(x, &self.b2))
    }

    fn angle(&self, x: &[f64]) -> f64 {
        let (a, b) = self.coords(x);
        normalize_angle(b.atan2(a))
    }

    fn point(&self, theta: f64) -> Vec<f64> {
        self.b1
            .iter()
            .zip(&self.b2)
            .map(|(x, y)| theta.cos() * x + theta.sin() * y)
            .collect()
    }

    /// Distance from `x` to the plane.
    fn offset(&self, x: &[f64]) -> f64 {
        let (a, b) = self.coords(x);
        let r: Vec<f64> = x
            .iter()
            .zip(self.b1.iter().zip(&self.b2))
            .map(|(xi, (p, q))| xi - a * p - b * q)
            .collect();
        norm(&r)
    }
}

#[derive(Clone, Debug)]
enum Repr {
    /// Generators span at most a plane (always the case for `d = 2`).
    Planar { plane: Plane, arcs: ArcSet },
    /// `d = 3`, full rank: inward facet normals (empty means the whole sphere).
    Cone3 { normals: Vec<Vec<f64>> },
    /// Membership oracle via non-negative least squares.
    Oracle,
}

/// s-convex hull of a finite set of unit vectors.
#[derive(Clone, Debug)]
pub struct SHull {
    generators: Vec<UnitVec>,
    dimension: usize,
    origin_in_hull: bool,
    repr: Repr,
}

/// Boundary of an s-hull relative to the sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SBoundary {
    Points { points: Vec<UnitVec> },
    Arcs { arcs: Vec<GreatArc> },
}

impl SBoundary {
    pub fn is_empty(&self) -> bool {
        match self {
            SBoundary::Points { points } => points.is_empty(),
            SBoundary::Arcs { arcs } => arcs.is_empty(),
        }
    }
}

/// Great-circle arc from `start` turning towards `end` by `angle` radians
/// inside the plane with normal `axis`. Zero angle is a single point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreatArc {
    pub start: UnitVec,
    pub end: UnitVec,
    pub axis: UnitVec,
    pub angle: f64,
}

impl GreatArc {
    /// Points along the arc, endpoints included.
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        let s = self.start.as_slice();
        let d = s.len();
        // second basis vector: axis x start for d = 3
        let t = if d == 3 {
            linalg::cross3(self.axis.as_slice(), s).to_vec()
        } else {
            vec![0.0; d]
        };
        (0..count.max(2))
            .map(|i| {
                let th = self.angle * i as f64 / (count.max(2) - 1) as f64;
                s.iter()
                    .zip(&t)
                    .map(|(a, b)| th.cos() * a + th.sin() * b)
                    .collect()
            })
            .collect()
    }
}

fn plane_of(generators: &[UnitVec], dimension: usize) -> Plane {
    if dimension == 2 {
        // keep planar arcs in global angles
        return Plane {
            b1: vec![1.0, 0.0],
            b2: vec![0.0, 1.0],
        };
    }
    let vecs: Vec<Vec<f64>> = generators.iter().map(|g| g.0.clone()).collect();
    let mut basis = linalg::span_basis(&vecs, 1e-10);
    // complete to a plane with coordinate axes
    let mut i = 0;
    while basis.len() < 2 && i < dimension {
        let mut e = vec![0.0; dimension];
        e[i] = 1.0;
        let mut all = basis.clone();
        all.push(e);
        basis = linalg::span_basis(&all, 1e-6);
        i += 1;
    }
    Plane {
        b1: basis[0].clone(),
        b2: basis[1].clone(),
    }
}

fn origin_in_hull(generators: &[UnitVec]) -> bool {
    // minimise ||sum b_i g_i||^2 + w^2 (sum b_i - 1)^2 over b >= 0
    let w = 1.0;
    let cols: Vec<Vec<f64>> = generators
        .iter()
        .map(|g| {
            let mut c = g.0.clone();
            c.push(w);
            c
        })
        .collect();
    let mut target = vec![0.0; generators[0].dim()];
    target.push(w);
    let (_, res) = linalg::nnls(&cols, &target);
    res <= 1e-9
}

/// s-hull of `generators`.
pub fn s_hull(generators: &[UnitVec]) -> Result<SHull> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("s-hull needs at least one generator".into()));
    }
    let dimension = generators[0].dim();
    for (i, g) in generators.iter().enumerate() {
        if g.dim() != dimension {
            return Err(Error::InvalidInput(format!("generator {i} has dimension {}", g.dim())));
        }
        if g.is_zero() || (norm(&g.0) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("generator {i} is not a unit vector")));
        }
    }
    let vecs: Vec<Vec<f64>> = generators.iter().map(|g| g.0.clone()).collect();
    let rank = linalg::rank(&vecs, 1e-10);
    let repr = if dimension >= 2 && rank <= 2 {
        let plane = plane_of(generators, dimension);
        let angles: Vec<f64> = generators.iter().map(|g| plane.angle(&g.0)).collect();
        Repr::Planar {
            arcs: ArcSet::from_angles(&angles),
            plane,
        }
    } else if dimension == 3 {
        Repr::Cone3 {
            normals: facet_normals3(generators),
        }
    } else {
        Repr::Oracle
    };
    Ok(SHull {
        generators: generators.to_vec(),
        dimension,
        origin_in_hull: origin_in_hull(generators),
        repr,
    })
}

fn facet_normals3(generators: &[UnitVec]) -> Vec<Vec<f64>> {
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let tol = 1e-12;
    for i in 0..generators.len() {
        for j in (i + 1)..generators.len() {
            let c = linalg::cross3(&generators[i].0, &generators[j].0);
            let n = norm(&c);
            if n < 1e-12 {
                continue;
            }
            let c: Vec<f64> = c.iter().map(|x| x / n).collect();
            let dots: Vec<f64> = generators.iter().map(|g| dot(&g.0, &c)).collect();
            let cand = if dots.iter().all(|&t| t >= -tol) {
                c
            } else if dots.iter().all(|&t| t <= tol) {
                c.iter().map(|x| -x).collect()
            } else {
                continue;
            };
            if !normals.iter().any(|m| linalg::dist(m, &cand) < 1e-9) {
                normals.push(cand);
            }
        }
    }
    normals
}

impl SHull {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> &[UnitVec] {
        &self.generators
    }

    pub fn origin_in_hull(&self) -> bool {
        self.origin_in_hull
    }

    /// True when the hull is the whole sphere.
    pub fn is_full(&self) -> bool {
        match &self.repr {
            Repr::Planar { arcs, .. } => self.dimension == 2 && arcs.is_full_circle(),
            Repr::Cone3 { normals } => normals.is_empty(),
            Repr::Oracle => {
                // the cone is everything iff +-e_i are all members
                (0..self.dimension).all(|i| {
                    let e = UnitVec::axis(self.dimension, i);
                    self.contains(&e) && self.contains(&e.neg())
                })
            }
        }
    }

    /// Planar arc description (only when the generators span at most a plane).
    pub fn arcs(&self) -> Option<&ArcSet> {
        match &self.repr {
            Repr::Planar { arcs, .. } => Some(arcs),
            _ => None,
        }
    }

    /// `[start, end]` arcs in radians for `d = 2`.
    pub fn to_arcs_json(&self) -> Result<String> {
        match (&self.repr, self.dimension) {
            (Repr::Planar { arcs, .. }, 2) => Ok(serde_json::to_string(arcs)?),
            _ => Err(Error::UnsupportedDimension {
                dimension: self.dimension,
                reason: "arc serialisation is planar only".into(),
            }),
        }
    }

    pub fn contains(&self, w: &UnitVec) -> bool {
        s_hull_contains(self, w)
    }
}

/// True iff the ray `{t w : t > 0}` meets the Euclidean hull of the generators.
pub fn s_hull_contains(h: &SHull, w: &UnitVec) -> bool {
    if w.is_zero() || w.dim() != h.dimension {
        return false;
    }
    match &h.repr {
        Repr::Planar { plane, arcs } => {
            if plane.offset(&w.0) > MEMBERSHIP_TOL {
                return false;
            }
            let (a, b) = plane.coords(&w.0);
            if (a * a + b * b).sqrt() < 0.5 {
                return false;
            }
            arcs.contains_angle(plane.angle(&w.0), MEMBERSHIP_TOL)
        }
        Repr::Cone3 { normals } => normals.iter().all(|n| dot(n, &w.0) >= -MEMBERSHIP_TOL),
        Repr::Oracle => cone_contains_nnls(&h.generators, w),
    }
}

/// Cone membership by non-negative least squares; usable for any dimension.
pub fn cone_contains_nnls(generators: &[UnitVec], w: &UnitVec) -> bool {
    let cols: Vec<Vec<f64>> = generators.iter().map(|g| g.0.clone()).collect();
    let (_, res) = linalg::nnls(&cols, &w.0);
    res <= MEMBERSHIP_TOL
}

/// Boundary of the s-hull relative to the sphere, for `d` in {2, 3}.
pub fn s_boundary(h: &SHull) -> Result<SBoundary> {
    match (h.dimension, &h.repr) {
        (2, Repr::Planar { plane, arcs }) => Ok(SBoundary::Points {
            points: arcs
                .boundary_angles()
                .into_iter()
                .map(|t| UnitVec(plane.point(t)))
                .collect(),
        }),
        (3, Repr::Planar { plane, arcs }) => {
            // a subset of a great circle has empty interior in S^2
            Ok(SBoundary::Arcs {
                arcs: arcs_on_plane(plane, arcs),
            })
        }
        (3, Repr::Cone3 { normals }) => {
            let mut out = Vec::new();
            for n in normals {
                let face: Vec<UnitVec> = h
                    .generators
                    .iter()
                    .filter(|g| dot(&g.0, n).abs() <= 1e-9)
                    .cloned()
                    .collect();
                if face.is_empty() {
                    continue;
                }
                let plane = plane_with_normal(n);
                let angles: Vec<f64> = face.iter().map(|g| plane.angle(&g.0)).collect();
                out.extend(arcs_on_plane(&plane, &ArcSet::from_angles(&angles)));
            }
            Ok(SBoundary::Arcs { arcs: out })
        }
        (d, _) => Err(Error::UnsupportedDimension {
            dimension: d,
            reason: "boundaries are computed for d = 2 and d = 3 only".into(),
        }),
    }
}

fn plane_with_normal(n: &[f64]) -> Plane {
    // pick the coordinate axis least aligned with n
    let i = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap();
    let mut e = vec![0.0; 3];
    e[i] = 1.0;
    let b1 = hat(&linalg::cross3(n, &e)).into_vec();
    let b2 = linalg::cross3(n, &b1).to_vec();
    Plane { b1, b2 }
}

fn arcs_on_plane(plane: &Plane, arcs: &ArcSet) -> Vec<GreatArc> {
    let axis = if plane.b1.len() == 3 {
        UnitVec(hat(&linalg::cross3(&plane.b1, &plane.b2)).into_vec())
    } else {
        UnitVec(vec![0.0; plane.b1.len()])
    };
    arcs.arcs
        .iter()
        .map(|a| GreatArc {
            start: UnitVec(plane.point(a.start)),
            end: UnitVec(plane.point(a.end)),
            axis: axis.clone(),
            angle: a.length(),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// evaluation grid

const GRID_STREAM: u64 = 0x6772_6964;

/// Deterministic direction grid: equally spaced angles for `d = 2`, a
/// well-spread seeded point set for `d >= 3`.
pub fn direction_grid(d: usize, m: usize, seed: u64) -> Result<Vec<UnitVec>> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidInput("direction grid needs d >= 1 and M >= 1".into()));
    }
    match d {
        1 => Ok((0..m)
            .map(|i| UnitVec(vec![if i % 2 == 0 { 1.0 } else { -1.0 }]))
            .collect()),
        2 => Ok((0..m)
            .map(|k| {
                let t = TAU * k as f64 / m as f64;
                // exact values on the axes
                let (s, c) = match (4 * k) % m {
                    0 => exact_axis(4 * k / m),
                    _ => t.sin_cos(),
                };
                UnitVec(vec![c, s])
            })
            .collect()),
        _ => Ok(spread_points(d, m, seed)),
    }
}

fn exact_axis(quarter: usize) -> (f64, f64) {
    match quarter % 4 {
        0 => (0.0, 1.0),
        1 => (1.0, 0.0),
        2 => (0.0, -1.0),
        _ => (-1.0, 0.0),
    }
}

fn gaussian_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Best-candidate sampling from a seeded Gaussian stream, followed by a few
/// rounds of pairwise repulsion.
fn spread_points(d: usize, m: usize, seed: u64) -> Vec<UnitVec> {
    const CANDIDATES: usize = 32;
    const ROUNDS: usize = 40;
    let mut rng = rng::stream(seed, GRID_STREAM);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut best = gaussian_unit(&mut rng, d);
        let mut best_gap = min_dist(&pts, &best);
        for _ in 1..CANDIDATES {
            let c = gaussian_unit(&mut rng, d);
            let g = min_dist(&pts, &c);
            if g > best_gap {
                best = c;
                best_gap = g;
            }
        }
        pts.push(best);
    }
    if m > 1 {
        // typical spacing from the sphere area divided among m points
        let spacing = (sphere_area(d) / m as f64).powf(1.0 / (d as f64 - 1.0));
        for round in 0..ROUNDS {
            let step = 0.2 * spacing * (1.0 - round as f64 / ROUNDS as f64);
            let forces: Vec<Vec<f64>> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut f = vec![0.0; d];
                    for (j, q) in pts.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let r = linalg::dist(p, q).max(1e-9);
                        if r < 3.0 * spacing {
                            let w = 1.0 / (r * r * r);
                            f.iter_mut().zip(p.iter().zip(q)).for_each(|(fi, (a, b))| *fi += w * (a - b));
                        }
                    }
                    // tangential part only
                    let radial = dot(&f, p);
                    f.iter_mut().zip(p).for_each(|(fi, a)| *fi -= radial * a);
                    f
                })
                .collect();
            for (p, f) in pts.iter_mut().zip(&forces) {
                let fnorm = norm(f);
                if fnorm > 0.0 {
                    p.iter_mut().zip(f).for_each(|(a, b)| *a += step * b / fnorm);
                    let n = norm(p);
                    p.iter_mut().for_each(|a| *a /= n);
                }
            }
        }
    }
    pts.into_iter().map(UnitVec).collect()
}

fn min_dist(pts: &[Vec<f64>], x: &[f64]) -> f64 {
    pts.iter().map(|p| linalg::dist(p, x)).fold(f64::INFINITY, f64::min)
}

/// Surface area of `S^{d-1}`.
fn sphere_area(d: usize) -> f64 {
    // A_{d-1} = 2 pi^{d/2} / Gamma(d/2), via the recursion A_{n+1} = 2 pi A_{n-1} / n
    let mut a = [2.0, TAU];
    let mut n = 2;
    while n < d {
        let next = TAU * a[0] / (n as f64 - 1.0);
        a = [a[1], next];
        n += 1;
    }
    if d == 1 {
        2.0
    } else {
        a[1]
    }
}
