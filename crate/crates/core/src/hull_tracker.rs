//! Convex hull `H_n` of `{S_0, ..., S_n}`, its inscribed radius
//! `r_n = inf { ||x|| : x outside H_n }` and half-space confinement.
//!
//! In the plane the hull is exact: points are buffered and merged into the
//! vertex list with a monotone-chain rebuild. In higher dimensions the hull
//! is summarized by its support function over a fixed direction grid.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfmt;
use crate::sphere_geom::{direction_grid, UnitVec};
use crate::walk_engine::{Observer, StepView};

pub const BATCH: usize = 1024;
pub const DEFAULT_TRACKED: usize = 16;

const EXACT: f64 = 9_007_199_254_740_992.0;

fn exact_int(v: f64) -> bool {
    v.fract() == 0.0 && v.abs() <= EXACT
}

/// Twice the signed area of `(a, b, c)`; positive for a left turn. Exact for
/// integer coordinates.
pub fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    if [a, b, c].iter().all(|p| exact_int(p[0]) && exact_int(p[1])) {
        let i = |v: f64| v as i128;
        let v = (i(b[0]) - i(a[0])) * (i(c[1]) - i(a[1])) - (i(b[1]) - i(a[1])) * (i(c[0]) - i(a[0]));
        v.signum() as f64 * (v.unsigned_abs() as f64)
    } else {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }
}

/// Counter-clockwise hull without collinear vertices.
pub fn monotone_chain(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

fn seg_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (-(a[0] * dx + a[1] * dy) / len2).clamp(0.0, 1.0)
    };
    (a[0] + t * dx).hypot(a[1] + t * dy)
}

#[derive(Clone, Debug)]
enum Body {
    Planar {
        vertices: Vec<[f64; 2]>,
        pending: Vec<[f64; 2]>,
    },
    Support {
        flat: Vec<f64>,
        support: Vec<f64>,
        /// Point attaining the support value in each grid direction.
        argmax: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug)]
pub struct HullState {
    dimension: usize,
    body: Body,
    n: u64,
    tracked: Vec<UnitVec>,
    confinement: Vec<f64>,
    overflowed: bool,
}

impl HullState {
    /// `hull{0}` with the given confinement directions.
    pub fn new(dimension: usize, tracked: Vec<UnitVec>, support_grid: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::UnsupportedDimension {
                dimension,
                reason: "hull tracking needs d >= 2".into(),
            });
        }
        if tracked.iter().any(|u| u.dim() != dimension) {
            return Err(Error::InvalidInput("tracked directions have the wrong dimension".into()));
        }
        let body = if dimension == 2 {
            Body::Planar {
                vertices: vec![[0.0, 0.0]],
                pending: Vec::with_capacity(BATCH),
            }
        } else {
            let grid = direction_grid(dimension, support_grid, 0)?;
            let flat = grid.iter().flat_map(|u| u.as_slice().iter().copied()).collect();
            let m = grid.len();
            Body::Support {
                flat,
                support: vec![0.0; m],
                argmax: vec![vec![0.0; dimension]; m],
            }
        };
        let k = tracked.len();
        Ok(HullState {
            dimension,
            body,
            n: 0,
            tracked,
            confinement: vec![0.0; k],
            overflowed: false,
        })
    }

    /// Default tracking: the 16-point direction grid.
    pub fn with_defaults(dimension: usize) -> Result<Self> {
        let tracked = direction_grid(dimension, DEFAULT_TRACKED, 0)?;
        Self::new(dimension, tracked, 256)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn tracked(&self) -> &[UnitVec] {
        &self.tracked
    }

    /// True once a non-finite point was seen; later points are ignored.
    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    /// Adds one trajectory point.
    pub fn push(&mut self, x: &[f64]) {
        if self.overflowed {
            return;
        }
        if x.iter().any(|v| !v.is_finite()) {
            self.overflowed = true;
            return;
        }
        self.n += 1;
        for (c, u) in self.confinement.iter_mut().zip(&self.tracked) {
            let p = u.dot(x);
            if p < *c {
                *c = p;
            }
        }
        match &mut self.body {
            Body::Planar { pending, .. } => {
                pending.push([x[0], x[1]]);
                if pending.len() >= BATCH {
                    self.flush();
                }
            }
            Body::Support {
                flat, support, argmax, ..
            } => {
                let d = x.len();
                for (i, u) in flat.chunks_exact(d).enumerate() {
                    let p: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
                    if p > support[i] {
                        support[i] = p;
                        argmax[i].copy_from_slice(x);
                    }
                }
            }
        }
    }

    /// Merges buffered points into the vertex list.
    pub fn flush(&mut self) {
        if let Body::Planar { vertices, pending } = &mut self.body {
            if pending.is_empty() {
                return;
            }
            let mut all = std::mem::take(vertices);
            all.append(pending);
            *vertices = monotone_chain(all);
        }
    }

    /// Counter-clockwise hull vertices (d = 2) or the distinct support
    /// attaining points (d >= 3).
    pub fn vertices(&mut self) -> Vec<Vec<f64>> {
        self.flush();
        match &self.body {
            Body::Planar { vertices, .. } => vertices.iter().map(|v| v.to_vec()).collect(),
            Body::Support { argmax, .. } => {
                let mut out: Vec<Vec<f64>> = argmax.clone();
                out.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
                out.dedup();
                out
            }
        }
    }

    pub fn vertex_count(&mut self) -> usize {
        self.flush();
        match &self.body {
            Body::Planar { vertices, .. } => vertices.len(),
            Body::Support { .. } => self.vertices().len(),
        }
    }

    /// Support function `max_i v_i . u` over the hull.
    pub fn support(&mut self, u: &[f64]) -> f64 {
        self.flush();
        match &self.body {
            Body::Planar { vertices, .. } => vertices
                .iter()
                .map(|v| v[0] * u[0] + v[1] * u[1])
                .fold(f64::NEG_INFINITY, f64::max),
            Body::Support { argmax, .. } => argmax
                .iter()
                .map(|v| v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// Point-in-polygon test for d = 2 (boundary counts as inside).
    pub fn contains(&mut self, x: &[f64]) -> Result<bool> {
        self.flush();
        match &self.body {
            Body::Planar { vertices, .. } => {
                let p = [x[0], x[1]];
                Ok(match vertices.len() {
                    0 => false,
                    1 => vertices[0] == p,
                    2 => orient(vertices[0], vertices[1], p) == 0.0 && seg_dist_point(vertices[0], vertices[1], p) == 0.0,
                    k => (0..k).all(|i| orient(vertices[i], vertices[(i + 1) % k], p) >= 0.0),
                })
            }
            Body::Support { .. } => Err(Error::UnsupportedDimension {
                dimension: self.dimension,
                reason: "exact membership is only available in the plane".into(),
            }),
        }
    }

    /// `inf_{k <= n} S_k . u` for a tracked direction.
    pub fn confinement(&self, u: &UnitVec) -> Result<f64> {
        self.tracked
            .iter()
            .position(|t| t.as_slice().iter().zip(u.as_slice()).all(|(a, b)| (a - b).abs() <= 1e-12))
            .map(|i| self.confinement[i])
            .ok_or_else(|| Error::InvalidInput("direction is not tracked".into()))
    }

    pub fn confinements(&self) -> &[f64] {
        &self.confinement
    }
}

fn seg_dist_point(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    seg_dist([a[0] - p[0], a[1] - p[1]], [b[0] - p[0], b[1] - p[1]])
}

/// Radius of the largest origin-centred ball inside the hull. Exact in the
/// plane; in higher dimensions the grid minimum of the support function,
/// an upper estimate with grid-resolution error.
pub fn inscribed_radius(h: &mut HullState) -> f64 {
    h.flush();
    match &h.body {
        Body::Planar { vertices, .. } => {
            let k = vertices.len();
            if k < 3 {
                return 0.0;
            }
            let o = [0.0, 0.0];
            if (0..k).any(|i| orient(vertices[i], vertices[(i + 1) % k], o) <= 0.0) {
                return 0.0;
            }
            (0..k)
                .map(|i| seg_dist(vertices[i], vertices[(i + 1) % k]))
                .fold(f64::INFINITY, f64::min)
        }
        Body::Support { support, .. } => support.iter().copied().fold(f64::INFINITY, f64::min).max(0.0),
    }
}

/// Convenience: hull of an explicit point set (the origin is not added).
pub fn hull_of(points: &[Vec<f64>]) -> Result<HullState> {
    let d = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::InvalidInput("empty point set".into()))?;
    let mut h = HullState::new(d, Vec::new(), 256)?;
    match &mut h.body {
        Body::Planar { vertices, .. } => {
            *vertices = monotone_chain(points.iter().map(|p| [p[0], p[1]]).collect());
        }
        Body::Support {
            flat, support, argmax, ..
        } => {
            support.iter_mut().for_each(|s| *s = f64::NEG_INFINITY);
            for x in points {
                for (i, u) in flat.chunks_exact(d).enumerate() {
                    let p: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
                    if p > support[i] {
                        support[i] = p;
                        argmax[i].clone_from(x);
                    }
                }
            }
        }
    }
    h.n = points.len() as u64;
    Ok(h)
}

// ---------------------------------------------------------------------------
// growth report

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullRow {
    pub n: u64,
    pub inscribed_radius: f64,
    pub vertex_count: usize,
    pub confinement: Vec<f64>,
}

/// Observer updating the hull at every step and recording a row per checkpoint.
#[derive(Clone, Debug)]
pub struct HullObserver {
    pub hull: HullState,
    pub rows: Vec<HullRow>,
}

impl HullObserver {
    pub fn new(hull: HullState) -> Self {
        HullObserver { hull, rows: Vec::new() }
    }
}

impl Observer for HullObserver {
    fn name(&self) -> &str {
        "hull_tracker"
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        self.hull.push(view.point);
        Ok(())
    }

    fn checkpoint(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        let r = inscribed_radius(&mut self.hull);
        if let Some(prev) = self.rows.last() {
            if r < prev.inscribed_radius {
                return Err(format!("inscribed radius decreased from {} to {r}", prev.inscribed_radius));
            }
        }
        let vertex_count = self.hull.vertex_count();
        self.rows.push(HullRow {
            n: view.n,
            inscribed_radius: r,
            vertex_count,
            confinement: self.hull.confinements().to_vec(),
        });
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HullFlag {
    FullSpaceTrend,
    Confined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullReport {
    pub rows: Vec<HullRow>,
    pub tracked: Vec<UnitVec>,
    pub flags: Vec<HullFlag>,
    /// Tracked directions whose confinement held still over the last three
    /// checkpoints while `r_n` was frozen.
    pub confined_directions: Vec<usize>,
}

/// FULL_SPACE_TREND: `r_n` grew at three consecutive checkpoints.
/// CONFINED: `r_n` and some tracked confinement value were both unchanged
/// over the last three checkpoints.
pub fn hull_growth_report(obs: &HullObserver) -> HullReport {
    let rows = &obs.rows;
    let grew: Vec<bool> = rows
        .windows(2)
        .map(|w| w[1].inscribed_radius > w[0].inscribed_radius)
        .collect();
    let full = grew.windows(3).any(|w| w.iter().all(|&g| g));
    let mut confined_directions = Vec::new();
    if rows.len() >= 3 {
        let tail = &rows[rows.len() - 3..];
        let frozen = tail.iter().all(|r| r.inscribed_radius == tail[0].inscribed_radius);
        if frozen {
            for i in 0..obs.hull.tracked.len() {
                if tail.iter().all(|r| r.confinement[i] == tail[0].confinement[i]) {
                    confined_directions.push(i);
                }
            }
        }
    }
    let mut flags = Vec::new();
    if full {
        flags.push(HullFlag::FullSpaceTrend);
    }
    if !confined_directions.is_empty() {
        flags.push(HullFlag::Confined);
    }
    HullReport {
        rows: rows.clone(),
        tracked: obs.hull.tracked.clone(),
        flags,
        confined_directions,
    }
}

impl HullReport {
    pub fn has(&self, flag: HullFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,r_n,vertex_count");
        (0..self.tracked.len()).for_each(|i| write!(out, ",conf_{i}").unwrap());
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{},{}", r.n, numfmt::float(r.inscribed_radius), r.vertex_count).unwrap();
            r.confinement
                .iter()
                .for_each(|c| write!(out, ",{}", numfmt::float(*c)).unwrap());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::samplers::{IncrementSpec, ScalarLaw};
    use crate::walk_engine::run_walk;
    use rand::Rng;

    fn pts(v: &[[f64; 2]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn diamond_inscribed_radius() {
        let mut h = hull_of(&pts(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])).unwrap();
        assert!((inscribed_radius(&mut h) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn origin_on_boundary_or_outside() {
        let mut h = hull_of(&pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])).unwrap();
        assert_eq!(inscribed_radius(&mut h), 0.0);
        let mut h = hull_of(&pts(&[[1.0, 0.0], [2.0, 0.0]])).unwrap();
        assert_eq!(inscribed_radius(&mut h), 0.0);
    }

    #[test]
    fn triangle_from_origin_and_axes() {
        let mut h = HullState::new(2, Vec::new(), 0).unwrap();
        h.push(&[1.0, 0.0]);
        h.push(&[0.0, 1.0]);
        let mut v = h.vertices();
        v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        assert_eq!(v, pts(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]));
        h.push(&[0.2, 0.2]);
        assert_eq!(h.vertex_count(), 3);
    }

    #[test]
    fn order_does_not_matter() {
        let mut rng = stream(3, 0);
        let p: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.random_range(-50..50) as f64, rng.random_range(-50..50) as f64])
            .collect();
        let mut q = p.clone();
        q.reverse();
        q.rotate_left(77);
        let mut a = hull_of(&p).unwrap().vertices();
        let mut b = hull_of(&q).unwrap().vertices();
        a.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
        b.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
        assert_eq!(a, b);
    }

    #[test]
    fn polygon_is_convex_and_contains_all_points() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::STwoSided { alpha: 1.3 }]);
        let mut obs = HullObserver::new(HullState::with_defaults(2).unwrap());
        let sampler = crate::samplers::make_increment_sampler(&spec).unwrap();
        let rec = crate::walk_engine::run_walk_stream(
            &sampler,
            5000,
            1,
            0,
            &mut [&mut obs],
            &crate::walk_engine::RunOptions { dense_cap: 5000 },
        )
        .unwrap();
        let v = obs.hull.vertices();
        let k = v.len();
        for i in 0..k {
            let (a, b, c) = (&v[i], &v[(i + 1) % k], &v[(i + 2) % k]);
            assert!(orient([a[0], a[1]], [b[0], b[1]], [c[0], c[1]]) >= -1e-12);
        }
        for r in &rec.dense {
            assert!(obs.hull.contains(&r.point).unwrap());
        }
        assert!(obs.hull.contains(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn ball_of_inscribed_radius_is_inside() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher; 2]);
        let mut obs = HullObserver::new(HullState::with_defaults(2).unwrap());
        run_walk(&spec, 20_000, 6, &mut [&mut obs]).unwrap();
        let r = inscribed_radius(&mut obs.hull);
        assert!(r > 1.0);
        let mut rng = stream(6, 1);
        for _ in 0..1000 {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (r - 1e-6) * rng.random::<f64>().sqrt();
            assert!(obs.hull.contains(&[s * t.cos(), s * t.sin()]).unwrap());
        }
        let rs: Vec<f64> = obs.rows.iter().map(|r| r.inscribed_radius).collect();
        assert!(rs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn drift_walk_confinement() {
        let e1 = UnitVec::axis(2, 0);
        let mut h = HullState::new(2, vec![e1.clone(), e1.neg()], 0).unwrap();
        for n in 1..=100 {
            h.push(&[n as f64, 0.0]);
            assert_eq!(h.confinement(&e1).unwrap(), 0.0);
            assert_eq!(h.confinement(&e1.neg()).unwrap(), -(n as f64));
        }
        assert!(h.confinement(&UnitVec::axis(2, 1)).is_err());
    }

    #[test]
    fn confinement_never_positive() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher; 2]).with_drift(vec![1.0, 0.0]);
        let mut obs = HullObserver::new(HullState::with_defaults(2).unwrap());
        run_walk(&spec, 4096, 2, &mut [&mut obs]).unwrap();
        assert!(obs.hull.confinements().iter().all(|&c| c <= 0.0));
        let rep = hull_growth_report(&obs);
        assert!(rep.has(HullFlag::Confined));
        assert!(rep.confined_directions.contains(&0));
        assert!(!rep.has(HullFlag::FullSpaceTrend));
        assert_eq!(rep.to_csv().lines().count(), rep.rows.len() + 1);
    }

    #[test]
    fn exact_orientation_for_large_integers() {
        let big = 2f64.powi(52);
        let a = [big, big + 1.0];
        let b = [big + 2.0, big + 3.0];
        let c = [big + 4.0, big + 5.0];
        assert_eq!(orient(a, b, c), 0.0);
        assert!(orient(a, b, [big + 4.0, big + 6.0]) > 0.0);
    }

    #[test]
    fn support_grid_radius_in_three_dimensions() {
        let mut v = Vec::new();
        for i in 0..3 {
            for s in [-1.0, 1.0] {
                let mut p = vec![0.0; 3];
                p[i] = s;
                v.push(p);
            }
        }
        // octahedron: true inscribed radius 1/sqrt(3)
        let mut h = hull_of(&v).unwrap();
        let r = inscribed_radius(&mut h);
        assert!(r >= 1.0 / 3f64.sqrt() - 1e-12 && r < 0.7, "{r}");
        assert_eq!(h.vertex_count(), 6);
    }
}
