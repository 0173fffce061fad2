//! One-dimensional projections `S_n . u`: running extremes at dyadic
//! checkpoints and a heuristic split into drifting-up, drifting-down and
//! oscillating directions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;
use crate::sphere_geom::UnitVec;
use crate::walk_engine::{dyadic_checkpoints, Observer, StepView, TrajectoryRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierThresholds {
    /// Growth factor `g` for an extreme that keeps growing.
    pub growth: f64,
    /// The final value must exceed `c sqrt(N)` for a drift verdict.
    pub final_scale: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        ClassifierThresholds {
            growth: 1.5,
            final_scale: 0.1,
        }
    }
}

impl ClassifierThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.growth >= 1.0 && self.growth.is_finite()) {
            return Err(Error::config("classifier.growth", format!("must be >= 1, got {}", self.growth)));
        }
        if !(self.final_scale >= 0.0 && self.final_scale.is_finite()) {
            return Err(Error::config(
                "classifier.final_scale",
                format!("must be non-negative, got {}", self.final_scale),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProjectionVerdict {
    Plus,
    Minus,
    Osc,
    Undecided,
}

impl ProjectionVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionVerdict::Plus => "PLUS",
            ProjectionVerdict::Minus => "MINUS",
            ProjectionVerdict::Osc => "OSC",
            ProjectionVerdict::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionStats {
    pub direction: UnitVec,
    pub checkpoints: Vec<u64>,
    /// `min_{n <= n_j} S_n . u`, with `S_0 = 0` included.
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub final_value: f64,
    /// False when extremes were taken over checkpoints only.
    pub dense: bool,
}

/// `S_n . u` from a step view; overflowed norms give signed infinities.
fn project(view: &StepView<'_>, u: &[f64]) -> f64 {
    if view.norm.is_finite() {
        view.point.iter().zip(u).map(|(a, b)| a * b).sum()
    } else {
        let c: f64 = view.unit.iter().zip(u).map(|(a, b)| a * b).sum();
        if c == 0.0 {
            0.0
        } else {
            c.signum() * f64::INFINITY
        }
    }
}

/// Live observer keeping running extremes for many directions at once.
#[derive(Clone, Debug)]
pub struct ProjectionObserver {
    directions: Vec<UnitVec>,
    flat: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    last: Vec<f64>,
    checkpoints: Vec<u64>,
    mins: Vec<Vec<f64>>,
    maxs: Vec<Vec<f64>>,
}

impl ProjectionObserver {
    pub fn new(directions: Vec<UnitVec>) -> Self {
        let m = directions.len();
        let flat = directions.iter().flat_map(|u| u.as_slice().iter().copied()).collect();
        ProjectionObserver {
            directions,
            flat,
            lo: vec![0.0; m],
            hi: vec![0.0; m],
            last: vec![0.0; m],
            checkpoints: Vec::new(),
            mins: vec![Vec::new(); m],
            maxs: vec![Vec::new(); m],
        }
    }

    pub fn directions(&self) -> &[UnitVec] {
        &self.directions
    }

    pub fn stats(&self) -> Vec<ProjectionStats> {
        self.directions
            .iter()
            .enumerate()
            .map(|(i, u)| ProjectionStats {
                direction: u.clone(),
                checkpoints: self.checkpoints.clone(),
                mins: self.mins[i].clone(),
                maxs: self.maxs[i].clone(),
                final_value: self.last[i],
                dense: true,
            })
            .collect()
    }
}

impl Observer for ProjectionObserver {
    fn name(&self) -> &str {
        "projection_classifier"
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        let d = view.point.len();
        if view.norm.is_finite() && d == 2 {
            let (x, y) = (view.point[0], view.point[1]);
            for (i, u) in self.flat.chunks_exact(2).enumerate() {
                let p = x * u[0] + y * u[1];
                self.lo[i] = self.lo[i].min(p);
                self.hi[i] = self.hi[i].max(p);
                self.last[i] = p;
            }
        } else {
            for (i, u) in self.flat.chunks_exact(d).enumerate() {
                let p = project(view, u);
                self.lo[i] = self.lo[i].min(p);
                self.hi[i] = self.hi[i].max(p);
                self.last[i] = p;
            }
        }
        Ok(())
    }

    fn checkpoint(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        self.checkpoints.push(view.n);
        for i in 0..self.directions.len() {
            self.mins[i].push(self.lo[i]);
            self.maxs[i].push(self.hi[i]);
        }
        Ok(())
    }
}

/// Projection statistics from a recorded trajectory. Extremes are exact when
/// the record holds every step densely, otherwise they only see checkpoints.
pub fn project_series(record: &TrajectoryRecord, u: &UnitVec) -> ProjectionStats {
    let dense = record.dense.len() as u64 == record.n_steps && !record.overflowed;
    let schedule = if record.overflowed {
        record.checkpoints.iter().map(|r| r.n).collect()
    } else {
        dyadic_checkpoints(record.n_steps)
    };
    let rows = if dense { &record.dense } else { &record.checkpoints };
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    let mut last = 0.0;
    let mut out = ProjectionStats {
        direction: u.clone(),
        checkpoints: Vec::new(),
        mins: Vec::new(),
        maxs: Vec::new(),
        final_value: 0.0,
        dense,
    };
    let mut next = 0;
    for r in rows {
        let view = StepView {
            n: r.n,
            point: &r.point,
            unit: &r.unit,
            norm: r.norm(),
            ln_norm: r.ln_norm,
            jumps: None,
        };
        last = project(&view, u.as_slice());
        lo = lo.min(last);
        hi = hi.max(last);
        while next < schedule.len() && schedule[next] == r.n {
            out.checkpoints.push(r.n);
            out.mins.push(lo);
            out.maxs.push(hi);
            next += 1;
        }
    }
    out.final_value = last;
    out
}

/// Index of the last checkpoint with `n_j <= n`.
fn at_or_before(checkpoints: &[u64], n: u64) -> Option<usize> {
    checkpoints.iter().rposition(|&c| c <= n)
}

struct Shape {
    min_stable: bool,
    max_stable: bool,
    max_drift: bool,
    min_drift: bool,
    max_grows: bool,
    min_grows: bool,
}

fn shape(stats: &ProjectionStats, thr: &ClassifierThresholds) -> Result<Shape> {
    let j = stats.checkpoints.len();
    if j < 4 || stats.mins.len() != j || stats.maxs.len() != j {
        return Err(Error::InvalidInput(format!(
            "classification needs at least 4 checkpoints, got {j}"
        )));
    }
    let g = thr.growth;
    let last = j - 1;
    let half = j / 2;
    let quarter = j / 4;
    let n = stats.checkpoints[last];
    let (hi, lo) = (&stats.maxs, &stats.mins);
    // the last two doublings: N/4 -> N/2 -> N
    let doubling = |xs: &[f64]| -> bool {
        let (Some(a), Some(b)) = (at_or_before(&stats.checkpoints, n / 2), at_or_before(&stats.checkpoints, n / 4))
        else {
            return false;
        };
        a < last && b < a && xs[b] > 0.0 && xs[a] >= g * xs[b] && xs[last] >= g * xs[a]
    };
    let neg: Vec<f64> = lo.iter().map(|v| -v).collect();
    Ok(Shape {
        min_stable: lo[half] == lo[last],
        max_stable: hi[half] == hi[last],
        max_drift: doubling(hi),
        min_drift: doubling(&neg),
        max_grows: hi[last] > 0.0 && hi[last] >= g * hi[quarter],
        min_grows: neg[last] > 0.0 && neg[last] >= g * neg[quarter],
    })
}

/// PLUS: the minimum is frozen over the last half of the checkpoints, the
/// maximum grew by `g` over each of the last two doublings and the final
/// value exceeds `c sqrt(N)`. MINUS mirrors it. OSC: both extremes grew by
/// `g` over the last three quarters of the checkpoints.
pub fn classify(stats: &ProjectionStats, thr: &ClassifierThresholds) -> Result<ProjectionVerdict> {
    let s = shape(stats, thr)?;
    let n = *stats.checkpoints.last().unwrap_or(&0) as f64;
    let floor = thr.final_scale * n.sqrt();
    Ok(if s.min_stable && s.max_drift && stats.final_value > floor {
        ProjectionVerdict::Plus
    } else if s.max_stable && s.min_drift && stats.final_value < -floor {
        ProjectionVerdict::Minus
    } else if s.max_grows && s.min_grows {
        ProjectionVerdict::Osc
    } else {
        ProjectionVerdict::Undecided
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Signature {
    /// The maximum stopped growing: a finite limsup candidate.
    BoundedAbove,
    /// The minimum stopped growing: a finite liminf candidate.
    BoundedBelow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalCandidate {
    pub index: usize,
    pub direction: UnitVec,
    pub verdict: ProjectionVerdict,
    pub signature: Signature,
    pub min: f64,
    pub max: f64,
    pub final_value: f64,
}

/// Directions left UNDECIDED whose max or min froze over the last half of
/// the run. In the plane such directions are finite-sample artifacts.
pub fn scan_exceptional(stats: &[ProjectionStats], thr: &ClassifierThresholds) -> Result<Vec<ExceptionalCandidate>> {
    let mut out = Vec::new();
    for (i, s) in stats.iter().enumerate() {
        if classify(s, thr)? != ProjectionVerdict::Undecided {
            continue;
        }
        let sh = shape(s, thr)?;
        let signature = if sh.max_stable {
            Signature::BoundedAbove
        } else if sh.min_stable {
            Signature::BoundedBelow
        } else {
            continue;
        };
        out.push(ExceptionalCandidate {
            index: i,
            direction: s.direction.clone(),
            verdict: ProjectionVerdict::Undecided,
            signature,
            min: *s.mins.last().unwrap_or(&0.0),
            max: *s.maxs.last().unwrap_or(&0.0),
            final_value: s.final_value,
        });
    }
    Ok(out)
}

/// One row per direction: components, verdict, final value, then the
/// min/max ladder.
pub fn projections_csv(stats: &[ProjectionStats], thr: &ClassifierThresholds) -> String {
    let mut out = String::from("index");
    let d = stats.first().map_or(0, |s| s.direction.dim());
    (0..d).for_each(|i| write!(out, ",u{i}").unwrap());
    out.push_str(",verdict,final");
    if let Some(s) = stats.first() {
        for n in &s.checkpoints {
            write!(out, ",min_{n},max_{n}").unwrap();
        }
    }
    out.push('\n');
    for (i, s) in stats.iter().enumerate() {
        write!(out, "{i}").unwrap();
        s.direction
            .as_slice()
            .iter()
            .for_each(|x| write!(out, ",{}", numfmt::float(*x)).unwrap());
        let v = classify(s, thr).map_or("UNDECIDED", |v| v.as_str());
        write!(out, ",{v},{}", numfmt::float(s.final_value)).unwrap();
        for (a, b) in s.mins.iter().zip(&s.maxs) {
            write!(out, ",{},{}", numfmt::float(*a), numfmt::float(*b)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{IncrementSpec, ScalarLaw};
    use crate::sphere_geom::interpolate;
    use crate::walk_engine::{run_walk, run_walk_stream, RunOptions};

    /// Stats from an explicit path, evaluated at dyadic checkpoints.
    fn from_path(path: &[Vec<f64>], u: &UnitVec) -> ProjectionStats {
        let n = path.len() as u64;
        let cps = dyadic_checkpoints(n);
        let (mut lo, mut hi, mut last) = (0.0f64, 0.0f64, 0.0);
        let mut out = ProjectionStats {
            direction: u.clone(),
            checkpoints: Vec::new(),
            mins: Vec::new(),
            maxs: Vec::new(),
            final_value: 0.0,
            dense: true,
        };
        for (k, x) in path.iter().enumerate() {
            last = u.dot(x);
            lo = lo.min(last);
            hi = hi.max(last);
            if cps.contains(&(k as u64 + 1)) {
                out.checkpoints.push(k as u64 + 1);
                out.mins.push(lo);
                out.maxs.push(hi);
            }
        }
        out.final_value = last;
        out
    }

    fn axis_walk(n: usize, sign: f64) -> Vec<Vec<f64>> {
        (1..=n).map(|k| vec![sign * k as f64, 0.0]).collect()
    }

    #[test]
    fn axis_walk_projections() {
        let path = axis_walk(1000, 1.0);
        let s = from_path(&path, &UnitVec::axis(2, 0));
        assert!(s.mins.iter().all(|&m| m == 0.0));
        assert_eq!(s.maxs, s.checkpoints.iter().map(|&n| n as f64).collect::<Vec<_>>());
        let t = from_path(&path, &UnitVec::axis(2, 1));
        assert!(t.mins.iter().chain(&t.maxs).all(|&v| v == 0.0));
    }

    #[test]
    fn three_point_path() {
        let path = vec![vec![1.0, 1.0], vec![2.0, 0.0], vec![3.0, 1.0]];
        let s = from_path(&path, &UnitVec::axis(2, 1));
        assert_eq!(*s.mins.last().unwrap(), 0.0);
        assert_eq!(*s.maxs.last().unwrap(), 1.0);
        assert_eq!(s.final_value, 1.0);
    }

    #[test]
    fn monotone_series_classify() {
        let thr = ClassifierThresholds::default();
        let e1 = UnitVec::axis(2, 0);
        for n in [1000, 3000, 4096, 100_000] {
            assert_eq!(classify(&from_path(&axis_walk(n, 1.0), &e1), &thr).unwrap(), ProjectionVerdict::Plus);
            assert_eq!(classify(&from_path(&axis_walk(n, -1.0), &e1), &thr).unwrap(), ProjectionVerdict::Minus);
        }
    }

    #[test]
    fn too_few_checkpoints() {
        let s = from_path(&axis_walk(4, 1.0), &UnitVec::axis(2, 0));
        assert!(matches!(
            classify(&s, &ClassifierThresholds::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn observer_matches_dense_record() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::STwoSided { alpha: 1.2 }]);
        let sampler = crate::samplers::make_increment_sampler(&spec).unwrap();
        let dirs: Vec<UnitVec> = (0..8).map(|k| UnitVec::from_angle(k as f64 * 0.7)).collect();
        let mut obs = ProjectionObserver::new(dirs.clone());
        let rec = run_walk_stream(&sampler, 3000, 4, 0, &mut [&mut obs], &RunOptions { dense_cap: 3000 }).unwrap();
        for (u, live) in dirs.iter().zip(obs.stats()) {
            let offline = project_series(&rec, u);
            assert!(offline.dense);
            assert_eq!(offline.mins, live.mins);
            assert_eq!(offline.maxs, live.maxs);
            assert_eq!(offline.checkpoints, live.checkpoints);
        }
    }

    #[test]
    fn negation_swaps_extremes_exactly() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::Rademacher]);
        let u = UnitVec::from_angle(0.3);
        let mut obs = ProjectionObserver::new(vec![u.clone(), u.neg()]);
        run_walk(&spec, 5000, 2, &mut [&mut obs]).unwrap();
        let st = obs.stats();
        for (a, b) in st[1].mins.iter().zip(&st[0].maxs) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn interpolated_minimum_bound() {
        // S.w = (a S.u + (1-a) S.v) / ||a u + (1-a) v||
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::Rademacher])
            .with_drift(vec![1.0, 0.0]);
        let u = UnitVec::from_angle(0.4);
        let v = UnitVec::from_angle(-0.5);
        let a = 0.3;
        let w = interpolate(&u, &v, a);
        let scale = u
            .as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(x, y)| a * x + (1.0 - a) * y)
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt();
        let mut obs = ProjectionObserver::new(vec![u, v, w]);
        run_walk(&spec, 20_000, 8, &mut [&mut obs]).unwrap();
        let st = obs.stats();
        let thr = ClassifierThresholds::default();
        assert_eq!(classify(&st[0], &thr).unwrap(), ProjectionVerdict::Plus);
        assert_eq!(classify(&st[1], &thr).unwrap(), ProjectionVerdict::Plus);
        for j in 0..st[2].mins.len() {
            let rhs = (a * st[0].mins[j] + (1.0 - a) * st[1].mins[j]) / scale;
            assert!(st[2].mins[j] >= rhs - 1e-9);
        }
    }

    #[test]
    fn drift_walk_scan_lists_only_boundary_directions() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Constant { value: 1.0 }, ScalarLaw::Rademacher]);
        let grid = crate::sphere_geom::direction_grid(2, 256, 0).unwrap();
        let mut obs = ProjectionObserver::new(grid);
        run_walk(&spec, 1 << 14, 3, &mut [&mut obs]).unwrap();
        let found = scan_exceptional(&obs.stats(), &ClassifierThresholds::default()).unwrap();
        for c in found {
            assert!(c.direction.as_slice()[0].abs() < 0.2, "{:?}", c.direction);
        }
    }

    #[test]
    fn csv_rows() {
        let path = axis_walk(64, 1.0);
        let s = vec![from_path(&path, &UnitVec::axis(2, 0)), from_path(&path, &UnitVec::axis(2, 1))];
        let csv = projections_csv(&s, &ClassifierThresholds::default());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("index,u0,u1,verdict,final,min_1,max_1,min_2"));
        assert!(lines[1].contains(",PLUS,64,"));
    }
}
