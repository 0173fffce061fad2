//! Cap-visit estimates of the set of asymptotic directions.
//!
//! A grid direction `u` collects evidence whenever `||S^_n - u|| < r` while
//! `||S_n||` exceeds the escape levels `R_l = R_0 2^l`. Finite-sample verdicts
//! come from thresholds that are configuration, not theory.

use std::f64::consts::LN_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;
use crate::sphere_geom::{direction_grid, UnitVec};
use crate::walk_engine::{Observer, StepView};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Grid size `M`; `None` picks 64 for d = 2 and 256 otherwise.
    pub grid_size: Option<usize>,
    pub grid_seed: u64,
    pub cap_radius: f64,
    /// Lowest escape radius `R_0`; `None` picks 10, or 10^3 for log-tail laws.
    pub r0: Option<f64>,
    /// Number of escape levels.
    pub levels: usize,
    /// Growth exponents for the graded sets.
    pub alphas: Vec<f64>,
    pub v_min: u64,
    pub l_out: usize,
    pub kappa: f64,
    /// IN needs the global top level to be at least this index.
    pub min_top_level: usize,
    /// Steps with `n < n_min` are ignored.
    pub n_min: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            grid_size: None,
            grid_seed: 0,
            cap_radius: 0.3,
            r0: None,
            levels: 8,
            alphas: vec![0.25, 0.5, 1.0],
            v_min: 3,
            l_out: 1,
            kappa: 0.1,
            min_top_level: 2,
            n_min: 1,
        }
    }
}

pub fn default_grid_size(d: usize) -> usize {
    if d == 2 {
        64
    } else {
        256
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, r: String| Err(Error::config(format!("estimator.{f}"), r));
        if let Some(m) = self.grid_size {
            if m == 0 {
                return bad("grid_size", "must be positive".into());
            }
        }
        if !(self.cap_radius > 0.0 && self.cap_radius <= 2.0) {
            return bad("cap_radius", format!("must lie in (0, 2], got {}", self.cap_radius));
        }
        if let Some(r0) = self.r0 {
            if !(r0 > 0.0 && r0.is_finite()) {
                return bad("r0", format!("must be positive, got {r0}"));
            }
        }
        if self.levels == 0 || self.levels > 60 {
            return bad("levels", format!("must lie in 1..=60, got {}", self.levels));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return bad("alphas", format!("exponents must be positive, got {a}"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa", format!("must be positive, got {}", self.kappa));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    In,
    Out,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::In => "IN",
            Verdict::Out => "OUT",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CapVisitAccumulator {
    dimension: usize,
    grid: Vec<UnitVec>,
    radius: f64,
    dot_min: f64,
    r0: f64,
    ln_levels: Vec<f64>,
    alphas: Vec<f64>,
    ln_kappa: f64,
    n_min: u64,
    v_min: u64,
    l_out: usize,
    min_top_level: usize,
    /// Equal-angle planar grid: candidate caps are found by index.
    planar_step: Option<f64>,
    visits: Vec<u64>,
    first_visit: Vec<u64>,
    ln_alpha_max: Vec<f64>,
    scale_mask: Vec<u64>,
    steps_seen: u64,
    n_last: u64,
}

impl CapVisitAccumulator {
    /// Builds the accumulator with the grid for dimension `d`.
    pub fn new(d: usize, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.grid_size.unwrap_or_else(|| default_grid_size(d));
        let grid = direction_grid(d, m, cfg.grid_seed)?;
        Self::with_grid(grid, cfg)
    }

    pub fn with_grid(grid: Vec<UnitVec>, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let d = grid
            .first()
            .map(|u| u.dim())
            .ok_or_else(|| Error::InvalidInput("empty direction grid".into()))?;
        if grid.iter().any(|u| u.dim() != d || u.is_zero()) {
            return Err(Error::InvalidInput("grid must hold unit vectors of one dimension".into()));
        }
        let r0 = cfg.r0.unwrap_or(10.0);
        let ln_levels = (0..cfg.levels).map(|l| r0.ln() + l as f64 * LN_2).collect();
        let m = grid.len();
        let planar_step = (d == 2 && m >= 8 && is_equal_angle(&grid)).then(|| std::f64::consts::TAU / m as f64);
        let cells = m * cfg.levels;
        let graded = m * cfg.alphas.len();
        Ok(CapVisitAccumulator {
            dimension: d,
            grid,
            radius: cfg.cap_radius,
            dot_min: 1.0 - cfg.cap_radius * cfg.cap_radius / 2.0,
            r0,
            ln_levels,
            alphas: cfg.alphas.clone(),
            ln_kappa: cfg.kappa.ln(),
            n_min: cfg.n_min,
            v_min: cfg.v_min,
            l_out: cfg.l_out,
            min_top_level: cfg.min_top_level,
            planar_step,
            visits: vec![0; cells],
            first_visit: vec![0; cells],
            ln_alpha_max: vec![f64::NEG_INFINITY; graded],
            scale_mask: vec![0; graded],
            steps_seen: 0,
            n_last: 0,
        })
    }

    pub fn grid(&self) -> &[UnitVec] {
        &self.grid
    }

    pub fn levels(&self) -> usize {
        self.ln_levels.len()
    }

    /// Escape radii `R_l`.
    pub fn ladder(&self) -> Vec<f64> {
        (0..self.levels()).map(|l| self.r0 * 2f64.powi(l as i32)).collect()
    }

    pub fn visits(&self, point: usize, level: usize) -> u64 {
        self.visits[point * self.levels() + level]
    }

    pub fn first_visit(&self, point: usize, level: usize) -> Option<u64> {
        match self.first_visit[point * self.levels() + level] {
            0 => None,
            n => Some(n),
        }
    }

    /// Number of levels `l` with `||S|| > R_l`.
    fn levels_exceeded(&self, ln_norm: f64) -> usize {
        self.ln_levels.partition_point(|&lr| ln_norm > lr)
    }

    /// Records `S_n` given as a plain vector.
    pub fn record_visit(&mut self, s: &[f64], n: u64) {
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return;
        }
        let unit: Vec<f64> = s.iter().map(|x| x / norm).collect();
        self.record(&unit, norm.ln(), n);
    }

    /// Records a step from its direction and `ln ||S_n||`.
    pub fn record(&mut self, unit: &[f64], ln_norm: f64, n: u64) {
        if n == 0 || n < self.n_min || ln_norm == f64::NEG_INFINITY {
            return;
        }
        self.steps_seen += 1;
        self.n_last = n;
        let lv = self.levels_exceeded(ln_norm);
        let ln_n = (n as f64).ln();
        let scale_bit = 1u64 << (63 - n.leading_zeros());
        if let Some(step) = self.planar_step {
            let m = self.grid.len() as i64;
            let theta = unit[1].atan2(unit[0]);
            let centre = (theta / step).round() as i64;
            let span = (2.0 * (self.radius / 2.0).min(1.0).asin() / step).ceil() as i64 + 1;
            if 2 * span + 1 >= m {
                for i in 0..self.grid.len() {
                    self.touch(i, unit, lv, ln_norm, ln_n, n, scale_bit);
                }
            } else {
                for k in centre - span..=centre + span {
                    self.touch(k.rem_euclid(m) as usize, unit, lv, ln_norm, ln_n, n, scale_bit);
                }
            }
        } else {
            for i in 0..self.grid.len() {
                self.touch(i, unit, lv, ln_norm, ln_n, n, scale_bit);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn touch(&mut self, i: usize, unit: &[f64], lv: usize, ln_norm: f64, ln_n: f64, n: u64, scale_bit: u64) {
        if self.grid[i].dot(unit) <= self.dot_min {
            return;
        }
        let base = i * self.ln_levels.len();
        for l in 0..lv {
            let c = base + l;
            self.visits[c] += 1;
            if self.first_visit[c] == 0 {
                self.first_visit[c] = n;
            }
        }
        let ga = i * self.alphas.len();
        for (j, &a) in self.alphas.iter().enumerate() {
            let r = ln_norm - a * ln_n;
            let c = ga + j;
            if r > self.ln_alpha_max[c] {
                self.ln_alpha_max[c] = r;
            }
            if r > self.ln_kappa {
                self.scale_mask[c] |= scale_bit;
            }
        }
    }

    pub fn finalize(&self) -> Result<DirectionSetEstimate> {
        self.finalize_with_meta(String::new(), self.n_last)
    }

    pub fn finalize_with_meta(&self, seed: String, n_steps: u64) -> Result<DirectionSetEstimate> {
        if self.steps_seen == 0 {
            return Err(Error::InvalidState("no steps recorded by the accumulator".into()));
        }
        let levels = self.levels();
        let top_of = |i: usize| (0..levels).rev().find(|&l| self.visits(i, l) > 0);
        let global_top = (0..self.grid.len()).filter_map(top_of).max();
        let expected_full: Vec<bool> = self
            .alphas
            .iter()
            .map(|&a| self.dimension >= 3 && a < 0.5)
            .collect();
        let points = (0..self.grid.len())
            .map(|i| {
                let visits: Vec<u64> = (0..levels).map(|l| self.visits(i, l)).collect();
                let top = top_of(i);
                let is_in = match global_top {
                    Some(g) => {
                        g >= self.min_top_level
                            && visits[..=g].iter().all(|&v| v > 0)
                            && visits[g] >= self.v_min
                    }
                    None => false,
                };
                let verdict = if is_in {
                    Verdict::In
                } else if visits.iter().skip(self.l_out + 1).all(|&v| v == 0) {
                    Verdict::Out
                } else {
                    Verdict::Undecided
                };
                let graded = self
                    .alphas
                    .iter()
                    .enumerate()
                    .map(|(j, &alpha)| {
                        let c = i * self.alphas.len() + j;
                        let scales = self.scale_mask[c].count_ones();
                        GradedVerdict {
                            alpha,
                            verdict: match scales {
                                0 => Verdict::Out,
                                1 => Verdict::Undecided,
                                _ => Verdict::In,
                            },
                            scales,
                            ln_max_ratio: self.ln_alpha_max[c],
                            expected_full: expected_full[j],
                        }
                    })
                    .collect();
                PointEstimate {
                    verdict,
                    top_level: top,
                    visits,
                    first_visit: (0..levels).map(|l| self.first_visit(i, l)).collect(),
                    graded,
                }
            })
            .collect();
        Ok(DirectionSetEstimate {
            grid: self.grid.clone(),
            cap_radius: self.radius,
            ladder: self.ladder(),
            global_top,
            seed,
            n_steps,
            thresholds: Thresholds {
                v_min: self.v_min,
                l_out: self.l_out,
                kappa: self.ln_kappa.exp(),
                min_top_level: self.min_top_level,
                n_min: self.n_min,
            },
            points,
        })
    }
}

fn is_equal_angle(grid: &[UnitVec]) -> bool {
    let m = grid.len() as f64;
    grid.iter().enumerate().all(|(k, u)| {
        let t = std::f64::consts::TAU * k as f64 / m;
        (u.as_slice()[0] - t.cos()).abs() < 1e-12 && (u.as_slice()[1] - t.sin()).abs() < 1e-12
    })
}

impl Observer for CapVisitAccumulator {
    fn name(&self) -> &str {
        "direction_estimator"
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        self.record(view.unit, view.ln_norm, view.n);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradedVerdict {
    pub alpha: f64,
    pub verdict: Verdict,
    /// Distinct dyadic scales at which `||S_n|| / n^alpha > kappa` inside the cap.
    pub scales: u32,
    /// `ln max ||S_n|| / n^alpha` inside the cap.
    pub ln_max_ratio: f64,
    /// `d >= 3` and `alpha < 1/2`: the graded set is the whole direction set.
    pub expected_full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEstimate {
    pub verdict: Verdict,
    pub top_level: Option<usize>,
    pub visits: Vec<u64>,
    pub first_visit: Vec<Option<u64>>,
    pub graded: Vec<GradedVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub v_min: u64,
    pub l_out: usize,
    pub kappa: f64,
    pub min_top_level: usize,
    pub n_min: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSetEstimate {
    pub grid: Vec<UnitVec>,
    pub cap_radius: f64,
    pub ladder: Vec<f64>,
    /// Highest level reached by any grid point.
    pub global_top: Option<usize>,
    pub seed: String,
    pub n_steps: u64,
    pub thresholds: Thresholds,
    pub points: Vec<PointEstimate>,
}

impl DirectionSetEstimate {
    pub fn verdicts(&self) -> Vec<Verdict> {
        self.points.iter().map(|p| p.verdict).collect()
    }

    pub fn in_points(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.points[i].verdict == Verdict::In).collect()
    }

    /// Fraction of the grid marked IN.
    pub fn coverage(&self) -> f64 {
        self.in_points().len() as f64 / self.points.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let d = self.grid.first().map_or(0, |u| u.dim());
        let mut out = String::from("index");
        (0..d).for_each(|i| write!(out, ",u{i}").unwrap());
        out.push_str(",verdict,top_level");
        (0..self.ladder.len()).for_each(|l| write!(out, ",visits_{l}").unwrap());
        let alphas: Vec<f64> = self.points.first().map_or(Vec::new(), |p| p.graded.iter().map(|g| g.alpha).collect());
        for a in &alphas {
            write!(out, ",max_ratio_{a},graded_{a}").unwrap();
        }
        out.push('\n');
        for (i, (u, p)) in self.grid.iter().zip(&self.points).enumerate() {
            write!(out, "{i}").unwrap();
            u.as_slice().iter().for_each(|x| write!(out, ",{}", numfmt::float(*x)).unwrap());
            write!(out, ",{}", p.verdict.as_str()).unwrap();
            match p.top_level {
                Some(t) => write!(out, ",{t}").unwrap(),
                None => out.push(','),
            }
            p.visits.iter().for_each(|v| write!(out, ",{v}").unwrap());
            for g in &p.graded {
                let tag = if g.expected_full { "_EXPECTED_FULL" } else { "" };
                write!(out, ",{},{}{tag}", numfmt::ext(1.0, g.ln_max_ratio), g.verdict.as_str()).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// multi-run consensus

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusPoint {
    pub verdict: Verdict,
    pub in_runs: usize,
    pub out_runs: usize,
    pub undecided_runs: usize,
    /// Fraction of decided runs matching the consensus; `None` without decided runs.
    pub agreement: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Consensus {
    pub runs: usize,
    pub points: Vec<ConsensusPoint>,
    /// Mean agreement over grid points with at least one decided run.
    pub agreement: f64,
    /// Fraction of the grid whose consensus is IN.
    pub coverage: f64,
    /// Fraction of the grid marked IN by at least one run.
    pub union_coverage: f64,
    pub mean_run_coverage: f64,
}

pub fn combine_runs(estimates: &[DirectionSetEstimate]) -> Result<Consensus> {
    if estimates.len() < 2 {
        return Err(Error::InvalidInput("consensus needs at least two estimates".into()));
    }
    let grid = &estimates[0].grid;
    for e in &estimates[1..] {
        let same = e.grid.len() == grid.len()
            && e.grid
                .iter()
                .zip(grid)
                .all(|(a, b)| a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= 1e-12));
        if !same {
            return Err(Error::InvalidInput("estimates use different direction grids".into()));
        }
    }
    let m = grid.len();
    let mut points = Vec::with_capacity(m);
    let mut union_in = 0usize;
    for i in 0..m {
        let (mut a, mut b, mut c) = (0, 0, 0);
        for e in estimates {
            match e.points[i].verdict {
                Verdict::In => a += 1,
                Verdict::Out => b += 1,
                Verdict::Undecided => c += 1,
            }
        }
        if a > 0 {
            union_in += 1;
        }
        let verdict = match a.cmp(&b) {
            std::cmp::Ordering::Greater => Verdict::In,
            std::cmp::Ordering::Less => Verdict::Out,
            std::cmp::Ordering::Equal => Verdict::Undecided,
        };
        let decided = a + b;
        let agreement = (decided > 0).then(|| a.max(b) as f64 / decided as f64);
        points.push(ConsensusPoint {
            verdict,
            in_runs: a,
            out_runs: b,
            undecided_runs: c,
            agreement,
        });
    }
    let decided: Vec<f64> = points.iter().filter_map(|p| p.agreement).collect();
    let agreement = if decided.is_empty() {
        f64::NAN
    } else {
        decided.iter().sum::<f64>() / decided.len() as f64
    };
    let coverage = points.iter().filter(|p| p.verdict == Verdict::In).count() as f64 / m as f64;
    let mean_run_coverage = estimates.iter().map(|e| e.coverage()).sum::<f64>() / estimates.len() as f64;
    Ok(Consensus {
        runs: estimates.len(),
        points,
        agreement,
        coverage,
        union_coverage: union_in as f64 / m as f64,
        mean_run_coverage,
    })
}

impl Consensus {
    pub fn to_csv(&self, grid: &[UnitVec]) -> String {
        let d = grid.first().map_or(0, |u| u.dim());
        let mut out = String::from("index");
        (0..d).for_each(|i| write!(out, ",u{i}").unwrap());
        out.push_str(",consensus,in_runs,out_runs,undecided_runs,agreement\n");
        for (i, (u, p)) in grid.iter().zip(&self.points).enumerate() {
            write!(out, "{i}").unwrap();
            u.as_slice().iter().for_each(|x| write!(out, ",{}", numfmt::float(*x)).unwrap());
            let ag = p.agreement.map(numfmt::float).unwrap_or_default();
            writeln!(
                out,
                ",{},{},{},{},{ag}",
                p.verdict.as_str(),
                p.in_runs,
                p.out_runs,
                p.undecided_runs
            )
            .unwrap();
        }
        out
    }
}

// ---------------------------------------------------------------------------
// band tally

/// Counts, per escape level, the steps beyond `R_l` and those among them with
/// `|S^_n . axis| > threshold`.
#[derive(Clone, Debug)]
pub struct BandTally {
    axis: UnitVec,
    threshold: f64,
    ln_levels: Vec<f64>,
    r0: f64,
    beyond: Vec<u64>,
    in_band: Vec<u64>,
}

impl BandTally {
    pub fn new(axis: UnitVec, threshold: f64, r0: f64, levels: usize) -> Self {
        BandTally {
            axis,
            threshold,
            ln_levels: (0..levels).map(|l| r0.ln() + l as f64 * LN_2).collect(),
            r0,
            beyond: vec![0; levels],
            in_band: vec![0; levels],
        }
    }

    pub fn record(&mut self, unit: &[f64], ln_norm: f64) {
        let lv = self.ln_levels.partition_point(|&lr| ln_norm > lr);
        let hit = self.axis.dot(unit).abs() > self.threshold;
        for l in 0..lv {
            self.beyond[l] += 1;
            self.in_band[l] += hit as u64;
        }
    }

    /// Highest level with at least one step beyond it.
    pub fn top_level(&self) -> Option<usize> {
        self.beyond.iter().rposition(|&c| c > 0)
    }

    pub fn counts(&self, level: usize) -> (u64, u64) {
        (self.in_band[level], self.beyond[level])
    }

    /// Off-band fraction at `level`; `None` when nothing went beyond it.
    pub fn fraction(&self, level: usize) -> Option<f64> {
        let (h, b) = self.counts(level);
        (b > 0).then(|| h as f64 / b as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,radius,beyond,off_band,fraction\n");
        for l in 0..self.beyond.len() {
            let f = self.fraction(l).map(numfmt::float).unwrap_or_default();
            let r = self.r0 * 2f64.powi(l as i32);
            writeln!(out, "{l},{},{},{},{f}", numfmt::float(r), self.beyond[l], self.in_band[l]).unwrap();
        }
        out
    }
}

impl Observer for BandTally {
    fn name(&self) -> &str {
        "band_tally"
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        self.record(view.unit, view.ln_norm);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{IncrementSpec, ScalarLaw};
    use crate::walk_engine::run_walk;

    fn planar(m: usize, r: f64, r0: f64, levels: usize) -> CapVisitAccumulator {
        let cfg = EstimatorConfig {
            grid_size: Some(m),
            cap_radius: r,
            r0: Some(r0),
            levels,
            ..Default::default()
        };
        CapVisitAccumulator::new(2, &cfg).unwrap()
    }

    #[test]
    fn origin_changes_nothing() {
        let mut acc = planar(64, 0.3, 10.0, 4);
        acc.record_visit(&[0.0, 0.0], 5);
        assert!(acc.visits.iter().all(|&v| v == 0));
        assert!(matches!(acc.finalize(), Err(Error::InvalidState(_))));
    }

    #[test]
    fn far_point_hits_all_levels() {
        let mut acc = planar(64, 0.3, 10.0, 4);
        assert_eq!(acc.ladder(), vec![10.0, 20.0, 40.0, 80.0]);
        acc.record_visit(&[100.0, 0.0], 1);
        for l in 0..4 {
            assert_eq!(acc.visits(0, l), 1);
            assert_eq!(acc.first_visit(0, l), Some(1));
        }
        // only caps within chord 0.3 of e1: grid spacing gives chord 0.098 per index
        let hit: Vec<usize> = (0..64).filter(|&i| acc.visits(i, 0) > 0).collect();
        assert_eq!(hit, vec![0, 1, 2, 3, 61, 62, 63]);
    }

    #[test]
    fn planar_fast_path_matches_brute_force() {
        let mut fast = planar(64, 0.35, 1.0, 3);
        let grid = fast.grid().to_vec();
        let cfg = EstimatorConfig {
            cap_radius: 0.35,
            r0: Some(1.0),
            levels: 3,
            ..Default::default()
        };
        let mut slow = CapVisitAccumulator::with_grid(grid, &cfg).unwrap();
        slow.planar_step = None;
        for k in 0..2000u64 {
            let t = k as f64 * 0.0137;
            let s = [(1.0 + k as f64) * t.cos(), (1.0 + k as f64) * t.sin()];
            fast.record_visit(&s, k + 1);
            slow.record_visit(&s, k + 1);
        }
        assert_eq!(fast.visits, slow.visits);
        assert_eq!(fast.scale_mask, slow.scale_mask);
    }

    #[test]
    fn below_lowest_level_counts_nothing() {
        let mut acc = planar(64, 0.3, 10.0, 4);
        acc.record_visit(&[5.0, 0.0], 1);
        assert!(acc.visits.iter().all(|&v| v == 0));
    }

    #[test]
    fn drift_walk_is_in_only_near_e1() {
        let mut acc = planar(64, 0.3, 10.0, 8);
        for n in 1..=5000u64 {
            acc.record_visit(&[n as f64, 0.0], n);
        }
        let est = acc.finalize().unwrap();
        for (u, p) in est.grid.iter().zip(&est.points) {
            let near = crate::sphere_geom::chord(u.as_slice(), &[1.0, 0.0]) < 0.3;
            assert_eq!(p.verdict == Verdict::In, near);
        }
        assert_eq!(est.points[32].verdict, Verdict::Out);
    }

    #[test]
    fn low_levels_only_gives_no_in() {
        let mut acc = planar(64, 0.3, 10.0, 8);
        for n in 1..=100u64 {
            acc.record_visit(&[15.0, 0.0], n);
        }
        let est = acc.finalize().unwrap();
        assert!(est.points.iter().all(|p| p.verdict != Verdict::In));
    }

    #[test]
    fn level_cascade_holds_on_a_walk() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::STwoSided { alpha: 1.5 }]);
        let mut acc = planar(64, 0.3, 10.0, 8);
        run_walk(&spec, 20_000, 5, &mut [&mut acc]).unwrap();
        for i in 0..64 {
            for l in 1..8 {
                assert!(acc.visits(i, l) <= acc.visits(i, l - 1));
            }
        }
    }

    #[test]
    fn extending_a_run_never_turns_in_into_out() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::STwoSided { alpha: 1.5 }]);
        let mut short = planar(64, 0.3, 10.0, 8);
        let mut long = planar(64, 0.3, 10.0, 8);
        run_walk(&spec, 10_000, 9, &mut [&mut short]).unwrap();
        run_walk(&spec, 40_000, 9, &mut [&mut long]).unwrap();
        let (a, b) = (short.finalize().unwrap(), long.finalize().unwrap());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!(!(p.verdict == Verdict::In && q.verdict == Verdict::Out));
        }
    }

    #[test]
    fn identical_runs_agree_fully() {
        let mut acc = planar(64, 0.3, 10.0, 8);
        for n in 1..=3000u64 {
            let t = n as f64 * 0.01;
            acc.record_visit(&[n as f64 * t.cos(), n as f64 * t.sin()], n);
        }
        let est = acc.finalize().unwrap();
        let c = combine_runs(&vec![est.clone(); 10]).unwrap();
        assert!(c.points.iter().all(|p| p.agreement.is_none_or(|a| a == 1.0)));
        assert_eq!(c.agreement, 1.0);
        assert_eq!(c.coverage, est.coverage());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let mut a = planar(64, 0.3, 10.0, 4);
        let mut b = planar(32, 0.3, 10.0, 4);
        a.record_visit(&[100.0, 0.0], 1);
        b.record_visit(&[100.0, 0.0], 1);
        let err = combine_runs(&[a.finalize().unwrap(), b.finalize().unwrap()]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn graded_needs_two_scales() {
        let cfg = EstimatorConfig {
            grid_size: Some(64),
            alphas: vec![0.5],
            kappa: 0.1,
            ..Default::default()
        };
        let mut acc = CapVisitAccumulator::new(2, &cfg).unwrap();
        acc.record_visit(&[3.0, 0.0], 4);
        let e = acc.finalize().unwrap();
        assert_eq!(e.points[0].graded[0].verdict, Verdict::Undecided);
        acc.record_visit(&[3.0, 0.0], 9);
        let e = acc.finalize().unwrap();
        assert_eq!(e.points[0].graded[0].verdict, Verdict::In);
        assert!((e.points[0].graded[0].ln_max_ratio - 1.5f64.ln()).abs() < 1e-12);
        assert!(!e.points[0].graded[0].expected_full);
    }

    #[test]
    fn expected_full_annotation_in_high_dimension() {
        let cfg = EstimatorConfig {
            grid_size: Some(32),
            alphas: vec![0.25, 0.75],
            ..Default::default()
        };
        let mut acc = CapVisitAccumulator::new(3, &cfg).unwrap();
        acc.record_visit(&[0.0, 0.0, 50.0], 3);
        let e = acc.finalize().unwrap();
        let g = &e.points[0].graded;
        assert!(g[0].expected_full && !g[1].expected_full);
        assert!(e.to_csv().contains("_EXPECTED_FULL"));
    }

    #[test]
    fn csv_has_one_row_per_grid_point() {
        let mut acc = planar(16, 0.5, 10.0, 3);
        acc.record_visit(&[100.0, 1.0], 1);
        let csv = acc.finalize().unwrap().to_csv();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.starts_with("index,u0,u1,verdict,top_level,visits_0,visits_1,visits_2,max_ratio_0.25"));
    }

    #[test]
    fn band_tally_counts() {
        let mut b = BandTally::new(UnitVec::axis(2, 1), 0.3, 10.0, 3);
        b.record(&[1.0, 0.0], 100f64.ln());
        b.record(&[0.0, 1.0], 100f64.ln());
        b.record(&[0.0, 1.0], 15f64.ln());
        assert_eq!(b.top_level(), Some(2));
        assert_eq!(b.counts(0), (2, 3));
        assert_eq!(b.fraction(2), Some(0.5));
    }

    #[test]
    fn config_errors_name_the_field() {
        let cfg = EstimatorConfig {
            cap_radius: -1.0,
            ..Default::default()
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("estimator.cap_radius"), "{msg}");
    }
}
